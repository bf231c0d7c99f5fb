import cmath
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from qndeff import PureState, QndDetector, QubitState


@st.composite
def pure_states(draw):
    theta = draw(st.floats(0.0, math.pi, allow_nan=False))
    phi = draw(st.floats(-math.pi, math.pi, allow_nan=False))
    return PureState(
        complex(math.cos(theta / 2.0)),
        cmath.exp(1j * phi) * math.sin(theta / 2.0),
    )


@st.composite
def qubit_states(draw):
    rho00 = draw(st.floats(0.0, 1.0, allow_nan=False))
    frac = draw(st.floats(0.0, 1.0, allow_nan=False))
    phase = draw(st.floats(-math.pi, math.pi, allow_nan=False))
    mag = frac * math.sqrt(rho00 * (1.0 - rho00))
    return QubitState(rho00, mag * cmath.exp(1j * phase))


@st.composite
def detectors(draw, finite_d=False, allow_destroy=True):
    f0 = draw(st.floats(0.0, 1.0, allow_nan=False))
    f1 = draw(st.floats(0.0, 1.0, allow_nan=False))
    phi0 = draw(st.floats(-math.pi, math.pi, allow_nan=False))
    phi1 = draw(st.floats(-math.pi, math.pi, allow_nan=False))
    d_strategy = st.floats(0.0, 6.0, allow_nan=False)
    if not finite_d:
        d_strategy = st.one_of(d_strategy, st.just(0.0), st.just(math.inf))
    d0 = draw(d_strategy)
    d1 = draw(d_strategy)
    destroys = draw(st.booleans()) if allow_destroy else False
    return QndDetector(f0=f0, f1=f1, phi0=phi0, phi1=phi1, d0=d0, d1=d1,
                       destroys_on_1=destroys)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
