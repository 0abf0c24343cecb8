import pytest

from morse_forge import FactorSpec, FreeProduct

Z2_TABLE = [[0, 1], [1, 0]]
Z6_TABLE = [[(i + j) % 6 for j in range(6)] for i in range(6)]


@pytest.fixture
def line_a():
    return FactorSpec.integer_line("A", "x")


@pytest.fixture
def line_b():
    return FactorSpec.integer_line("B", "y")


@pytest.fixture
def lattice2():
    return FactorSpec.integer_lattice("A", 2)


@pytest.fixture
def free2():
    return FactorSpec.free_group("A", 2, names=("x", "y"))


@pytest.fixture
def z6():
    return FactorSpec.finite_table("A", Z6_TABLE, [1, 5], names=["s", "s_inv"])


@pytest.fixture
def zz(line_a, line_b):
    return FreeProduct(line_a, line_b)


@pytest.fixture
def dihedral():
    a = FactorSpec.finite_table("A", Z2_TABLE, [1], names=["a"])
    b = FactorSpec.finite_table("B", Z2_TABLE, [1], names=["b"])
    return FreeProduct(a, b)


@pytest.fixture
def lattice_product(lattice2, line_b):
    return FreeProduct(lattice2, line_b)
