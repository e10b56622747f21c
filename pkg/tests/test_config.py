"""
Tests for the config module.
"""

import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np

from fredholm_backstepping.config import (
    KERNEL_DEFAULTS,
    PipelineConfig,
    load_config,
    parse_config,
    write_resolved_config,
)
from fredholm_backstepping.csv_io import write_state
from fredholm_backstepping.enums import MomentAnsatz, SimulationMode
from fredholm_backstepping.exceptions import ConfigError, InvalidArgumentError
from fredholm_backstepping.grid import make_grid
from fredholm_backstepping.kernels import Constant, sample_kernel

EXAMPLE = """
# closed-loop run for a small constant kernel
L = 1
n = 128
N = 16
kernel.type = Constant
kernel.c = 0.5   # gain
u0.type = bump
sim.mode = periodic
moments.ansatz = gram
tol.invert = 1e-9
"""


class TestParseConfig(TestCase):
    """Test the key=value parser."""

    def test_empty_text_gives_defaults(self):
        self.assertEqual(parse_config(""), PipelineConfig())

    def test_example(self):
        """Comments are stripped and values parsed into their types."""
        config = parse_config(EXAMPLE)
        self.assertEqual(config.n, 128)
        self.assertEqual(config.N, 16)
        self.assertEqual(config.kernel_type, "constant")
        self.assertEqual(config.kernel_params["c"], "0.5")
        self.assertEqual(config.kernel_params["a0"], KERNEL_DEFAULTS["a0"])
        self.assertEqual(config.u0_type, "bump")
        self.assertEqual(config.sim_mode, SimulationMode.PERIODIC)
        self.assertEqual(config.ansatz, MomentAnsatz.GRAM)
        self.assertEqual(config.tol_invert, 1e-9)
        self.assertIsNone(config.T)

    def test_complex_values(self):
        config = parse_config("u0.c = 1+2j\nsim.control = -0.5j")
        self.assertEqual(config.u0_c, 1 + 2j)
        self.assertEqual(config.sim_control, -0.5j)

    def test_optional_values(self):
        """T and tol.invert accept none/default."""
        config = parse_config("T = none\ntol.invert = default")
        self.assertIsNone(config.T)
        self.assertIsNone(config.tol_invert)

    def test_malformed_lines(self):
        """Each problem names the source and the line."""
        cases = {
            "L = 1\nn 64": ":2: expected key=value",
            "n = 64\nn = 128": ":2: key n given twice",
            "colour = blue": ":1: unknown key colour",
            "kernel.gain = 2": ":1: unknown key kernel.gain",
        }
        for text, message in cases.items():
            with self.assertRaises(ConfigError) as ctx:
                parse_config(text, source="run.cfg")
            self.assertIn("run.cfg" + message, str(ctx.exception))

    def test_bad_values(self):
        for text in (
            "L = -1",
            "L = zero",
            "n = 1",
            "N = -2",
            "T = 0",
            "u0.type = triangle",
            "sim.mode = sideways",
            "moments.ansatz = wavelet",
            "convergence.levels = 0",
            "tol.fattorini = -1e-6",
        ):
            with self.assertRaises(ConfigError, msg=text):
                parse_config(text)

    def test_load_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.cfg"
            path.write_text(EXAMPLE, encoding="utf-8")
            self.assertEqual(load_config(path), parse_config(EXAMPLE))
            with self.assertRaises(ConfigError):
                load_config(Path(tmp) / "missing.cfg")


class TestPipelineConfig(TestCase):
    """Test the derived quantities of a configuration."""

    def test_horizon_defaults_to_two_crossings(self):
        self.assertEqual(PipelineConfig(L=1.5).horizon, 3.0)
        self.assertEqual(PipelineConfig(T=0.75).horizon, 0.75)

    def test_grid(self):
        config = PipelineConfig(L=2.0, n=32)
        self.assertEqual(config.grid(), make_grid(2.0, 32))
        self.assertEqual(config.grid(64).n, 64)

    def test_truncation_must_fit_the_grid(self):
        """The default N = 32 needs at least 65 cells."""
        self.assertEqual(PipelineConfig(n=128).truncation(), 32)
        self.assertEqual(PipelineConfig(n=64).truncation(64, 8), 8)
        with self.assertRaises(ConfigError) as ctx:
            PipelineConfig(n=64).truncation()
        self.assertIn("set N <= 31 or n >= 65", str(ctx.exception))

    def test_kernel(self):
        config = parse_config("n = 16\nkernel.type = constant\nkernel.c = 0.25")
        sk = config.kernel(config.grid())
        np.testing.assert_array_equal(sk.G, sample_kernel(Constant(c=0.25), config.grid()).G)

    def test_counterexample_reads_L(self):
        config = parse_config("L = 1\nn = 64\nkernel.type = fattorini\nkernel.N = 2")
        self.assertTrue(config.kernel(config.grid()).x_only)

    def test_kernel_errors(self):
        """Unknown types and unparsable parameters become ConfigError."""
        grid = make_grid(1.0, 16)
        for text in (
            "kernel.type = hyperbolic",
            "kernel.type = constant\nkernel.c = abc",
            "kernel.type = fattorini\nkernel.N = 1.5",
            "kernel.type = file",
        ):
            with self.assertRaises(ConfigError, msg=text):
                parse_config(text).kernel(grid)

    def test_kernel_keeps_argument_errors(self):
        """Errors raised by the kernel builders themselves are not rewrapped."""
        config = parse_config("kernel.type = fattorini\nkernel.N = 0")
        with self.assertRaises(InvalidArgumentError) as ctx:
            config.kernel(make_grid(1.0, 16))
        self.assertNotIsInstance(ctx.exception, ConfigError)

    def test_initial_states(self):
        grid = make_grid(1.0, 16)
        sine = PipelineConfig(u0_c=2.0).initial_state(grid)
        np.testing.assert_allclose(sine, 2 * np.sin(np.pi * grid.nodes))
        bump = PipelineConfig(u0_type="bump").initial_state(grid)
        self.assertAlmostEqual(bump[8], 1.0)
        self.assertEqual(int(np.argmax(np.abs(bump))), 8)
        constant = PipelineConfig(u0_type="constant", u0_c=1j).initial_state(grid)
        np.testing.assert_array_equal(constant, 1j)
        np.testing.assert_array_equal(PipelineConfig(u0_type="zero").initial_state(grid), 0.0)

    def test_initial_state_from_file(self):
        grid = make_grid(1.0, 8)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_state(Path(tmp) / "u0.csv", np.arange(9) * (1 - 1j), grid)
            state = PipelineConfig(u0_type="file", u0_file=str(path)).initial_state(grid)
        np.testing.assert_array_equal(state, np.arange(9) * (1 - 1j))
        with self.assertRaises(ConfigError):
            PipelineConfig(u0_type="file").initial_state(grid)


class TestResolvedConfig(TestCase):
    """Test the record of every effective parameter."""

    def test_defaults_are_listed(self):
        resolved = PipelineConfig().resolved()
        self.assertEqual(resolved["T"], "2")
        self.assertEqual(resolved["tol.invert"], "default")
        self.assertEqual(resolved["kernel.type"], "zero")
        self.assertEqual(resolved["sim.mode"], "dirichlet")
        self.assertEqual(resolved["tol.fattorini"], "9.9999999999999995e-07")
        keys = list(resolved)
        self.assertEqual(keys[:9], ["L", "n", "N", "T", "kernel.type", "kernel.c", "kernel.a0", "kernel.N", "kernel.file"])

    def test_round_trip(self):
        """Parsing the resolved record gives back the same effective parameters."""
        config = parse_config(EXAMPLE + "u0.c = 0.5-1j\n")
        text = "\n".join(f"{key}={value}" for key, value in config.resolved().items())
        self.assertEqual(parse_config(text).resolved(), config.resolved())

    def test_write_resolved_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_resolved_config(PipelineConfig(n=64), Path(tmp) / "nested" / "resolved-config.txt")
            lines = path.read_text(encoding="utf-8").split("\n")
        self.assertEqual(lines[:3], ["L=1", "n=64", "N=32"])
        self.assertEqual(lines[-1], "")
