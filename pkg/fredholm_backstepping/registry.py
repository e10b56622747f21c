import logging
from collections.abc import Callable

logger = logging.getLogger(__name__)

_kernel_types: dict[str, Callable] = {}


def register_kernel(name: str, factory: Callable) -> None:
    """
    Register a kernel descriptor factory under a configuration name.

    The factory receives the flat configuration mapping (keys without the
    `kernel.` prefix) and returns a KernelFunction.
    """
    key = name.lower()
    if key in _kernel_types and _kernel_types[key] is not factory:
        logger.debug(f"Replacing kernel type {key}: {_kernel_types[key]} -> {factory}")
    else:
        logger.debug(f"Registered kernel type {key}")
    _kernel_types[key] = factory


def get_kernel_factory(name: str) -> Callable:
    key = name.lower()
    factory = _kernel_types.get(key)
    logger.debug(f"get_kernel_factory {key} found={factory is not None}")
    if factory is None:
        raise KeyError(key)
    return factory


def unregister_kernel(name: str) -> None:
    _kernel_types.pop(name.lower(), None)
    logger.debug(f"Unregistered kernel type {name}")


def list_all_kernels() -> list[str]:
    """Names of all registered kernel types, sorted."""
    return sorted(_kernel_types)
