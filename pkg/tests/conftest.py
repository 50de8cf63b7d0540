import pytest

from cylg.cayley import cylg_pipeline
from cylg.modular import xyzw_qexp
from cylg.potential import build_f0_p442


@pytest.fixture(scope="session")
def mfs200():
    return xyzw_qexp(200)


@pytest.fixture(scope="session")
def f0_p442():
    return build_f0_p442(24)


@pytest.fixture(scope="session")
def pipeline():
    return cylg_pipeline(n_terms=9, degree=4, precision=256, high_precision=384)
