"""
Pytest configuration for fredholm-backstepping tests.
"""

import pytest
from hypothesis import settings

from fredholm_backstepping import registry

# numerical examples are slower than hypothesis' default deadline allows
settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture(scope="function", autouse=True)
def restore_kernel_registry():
    """Keep kernel types registered by a test from leaking into the next one."""
    saved = dict(registry._kernel_types)
    yield
    registry._kernel_types.clear()
    registry._kernel_types.update(saved)
