"""
Composable predicates on sampled kernels.

Conditions combine with `&`, `|` and `~` and are called with a SampledKernel;
the pipeline uses them to decide whether a stage applies to the kernel at hand.
"""

import logging

import numpy as np

from fredholm_backstepping.kernels import SampledKernel, is_volterra, l2_norm

logger = logging.getLogger(__name__)


class KernelCondition:
    def check(self, sk: SampledKernel) -> bool:
        raise NotImplementedError

    def __call__(self, sk: SampledKernel) -> bool:
        return self.check(sk)

    def __and__(self, other):
        return AndCondition(self, other)

    def __or__(self, other):
        return OrCondition(self, other)

    def __invert__(self):
        return NotCondition(self)


class IsXOnly(KernelCondition):
    """
    g depends on x only. With `tol` set, the sample itself is inspected
    (columns equal up to tol) instead of trusting the descriptor flag.
    """

    def __init__(self, tol=None):
        self.tol = tol

    def check(self, sk):
        if self.tol is None:
            return sk.x_only
        spread = np.abs(sk.G - sk.G[:, :1]).max(initial=0.0)
        return bool(spread <= self.tol)


class IsVolterra(KernelCondition):
    def __init__(self, tol=0.0):
        self.tol = tol

    def check(self, sk):
        return is_volterra(sk, self.tol)


class HasSmallGain(KernelCondition):
    """||g||_L2 < margin * sqrt(2) / L."""

    def __init__(self, margin=1.0):
        self.margin = margin

    def check(self, sk):
        norm = l2_norm(sk)
        bound = self.margin * np.sqrt(2.0) / sk.grid.L
        logger.debug(f"HasSmallGain {sk.label}: ||g||={norm:.6g} bound={bound:.6g}")
        return norm < bound


class IsRealValued(KernelCondition):
    def __init__(self, tol=0.0):
        self.tol = tol

    def check(self, sk):
        return bool(np.abs(sk.G.imag).max(initial=0.0) <= self.tol)


class AndCondition(KernelCondition):
    def __init__(self, cond1, cond2):
        self.cond1 = cond1
        self.cond2 = cond2

    def check(self, sk):
        return self.cond1.check(sk) and self.cond2.check(sk)


class OrCondition(KernelCondition):
    def __init__(self, cond1, cond2):
        self.cond1 = cond1
        self.cond2 = cond2

    def check(self, sk):
        return self.cond1.check(sk) or self.cond2.check(sk)


class NotCondition(KernelCondition):
    def __init__(self, cond):
        self.cond = cond

    def check(self, sk):
        return not self.cond.check(sk)
