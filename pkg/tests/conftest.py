import pytest

from fmr.finring import construct_zmod
from fmr.formal import MultiplierSystem, build_formal_ring, make_triangular


@pytest.fixture(scope="session")
def z2():
    return construct_zmod(2)


@pytest.fixture(scope="session")
def z3():
    return construct_zmod(3)


@pytest.fixture(scope="session")
def z4():
    return construct_zmod(4)


@pytest.fixture(scope="session")
def z6():
    return construct_zmod(6)


@pytest.fixture(scope="session")
def t2_z2(z2):
    return make_triangular(z2, 2)


@pytest.fixture(scope="session")
def t2_z3(z3):
    return make_triangular(z3, 2)


@pytest.fixture(scope="session")
def t3_z2(z2):
    return make_triangular(z2, 3)


@pytest.fixture(scope="session")
def t2_z4(z4):
    return make_triangular(z4, 2)


@pytest.fixture(scope="session")
def m2_z2(z2):
    return build_formal_ring(z2, MultiplierSystem.all_ones(2, z2))


@pytest.fixture(scope="session")
def m2_z3(z3):
    return build_formal_ring(z3, MultiplierSystem.all_ones(2, z3))


@pytest.fixture(scope="session")
def m2_z4(z4):
    return build_formal_ring(z4, MultiplierSystem.all_ones(2, z4))


@pytest.fixture(scope="session")
def blocked_z3(z3):
    """M(3, Z/3) with every non-forced multiplier zero: three singleton blocks."""
    return build_formal_ring(z3, MultiplierSystem.all_zero(3, z3))
