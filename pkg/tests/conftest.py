import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from gaussctl.core import (
    SymplecticTransform,
    apply_symplectic,
    is_physical,
    make_from_normal_form,
    pt_min_eigenvalue,
)

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
settings.load_profile("default")

F3 = (4.5, 3.5, 2.2, -3.5)
F5 = (5.0, 6.0, 5.2, -4.8)
TMSV_R = math.log(math.sqrt(2.0) + 1.0) / 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def f3():
    return make_from_normal_form(*F3)


def single_mode(phi, log_z, theta):
    c1, s1 = math.cos(phi), math.sin(phi)
    c2, s2 = math.cos(theta), math.sin(theta)
    z = math.exp(log_z)
    return np.array([[c1, s1], [-s1, c1]]) @ np.diag([z, 1 / z]) @ np.array([[c2, s2], [-s2, c2]])


angles = st.floats(0.0, 2 * math.pi)
log_squeeze = st.floats(-1.5, 1.5)


@st.composite
def local_symplectics(draw):
    return SymplecticTransform.local_pair(
        single_mode(draw(angles), draw(log_squeeze), draw(angles)),
        single_mode(draw(angles), draw(log_squeeze), draw(angles)),
    )


@st.composite
def normal_forms(draw, entangled=None):
    a = draw(st.floats(1.0, 6.0))
    b = draw(st.floats(1.0, 6.0))
    cp = draw(st.floats(-5.0, 5.0))
    cm = draw(st.floats(-5.0, 5.0))
    m = make_from_normal_form(a, b, cp, cm)
    assume(is_physical(m))
    if entangled is not None:
        nu = pt_min_eigenvalue(m)
        assume(nu < 0.99 if entangled else nu > 1.01)
    return a, b, cp, cm


@st.composite
def physical_states(draw, entangled=None):
    nf = draw(normal_forms(entangled=entangled))
    return apply_symplectic(make_from_normal_form(*nf), draw(local_symplectics()))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
