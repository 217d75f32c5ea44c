import pytest

from pmpdescent import IntegerQuadratic, Problem


@pytest.fixture(scope="session")
def benchmark_integrand():
    """Integer-lattice quadratic cost with the benchmark parameters."""
    return IntegerQuadratic(alpha=0.01, b=10)


@pytest.fixture(scope="session")
def problem16(benchmark_integrand):
    return Problem.build(16, benchmark_integrand)


@pytest.fixture(scope="session")
def problem8(benchmark_integrand):
    return Problem.build(8, benchmark_integrand)
