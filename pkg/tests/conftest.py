import pytest

from sparseroof.hardware import EngineClass, HardwareProfile


@pytest.fixture
def simple_profile():
    """Round numbers: scalar 1e12, matrix 1.6e13 (16x), bandwidth 1e11 B/s."""
    return HardwareProfile(
        name="simple",
        peak_flops={EngineClass.SCALAR: 1.0e12, EngineClass.MATRIX: 1.6e13},
        peak_mem_bw=1.0e11,
    )


@pytest.fixture
def scalar_profile():
    return HardwareProfile(
        name="scalar-only",
        peak_flops={EngineClass.SCALAR: 1.0e12},
        peak_mem_bw=1.0e11,
    )
