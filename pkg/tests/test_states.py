import math

import pytest
from hypothesis import given

from qndeff import PureState, QubitState, StateValidationError

from conftest import pure_states


def test_from_pure_basis_state():
    st = QubitState.from_pure(PureState(1.0, 0.0))
    assert st.rho00 == 1.0
    assert st.rho01 == 0.0
    assert st.rho11 == 0.0


def test_from_pure_equal_superposition():
    r = 1.0 / math.sqrt(2.0)
    st = QubitState.from_pure(PureState(r, r))
    assert st.rho00 == pytest.approx(0.5, abs=1e-15)
    assert st.rho01 == pytest.approx(0.5, abs=1e-15)


def test_from_pure_complex_phase():
    r = 1.0 / math.sqrt(2.0)
    st = QubitState.from_pure(PureState(r, 1j * r))
    assert st.rho00 == pytest.approx(0.5, abs=1e-15)
    assert st.rho01 == pytest.approx(-0.5j, abs=1e-15)


@pytest.mark.parametrize(
    "rho00,rho01,expected",
    [
        (0.5, 0.5 + 0j, 0.0),
        (0.5, 0j, 0.25),
        (0.75, 0.25 + 0j, 0.125),
    ],
)
def test_purity_defect_values(rho00, rho01, expected):
    assert QubitState(rho00, rho01).purity_defect() == pytest.approx(expected, abs=1e-15)


def test_rejects_unnormalized_pure_state():
    with pytest.raises(StateValidationError):
        PureState(1.0, 0.1)


def test_rejects_nonpositive_density_matrix():
    with pytest.raises(StateValidationError):
        QubitState(0.5, 0.6 + 0j)
    with pytest.raises(StateValidationError):
        QubitState(1.2, 0j)


def test_accepts_tolerance_sized_violations():
    QubitState(0.5, complex(math.sqrt(0.25 + 0.9e-12), 0.0))


def test_json_round_trip():
    st = QubitState(0.3, 0.2 - 0.1j)
    again = QubitState.from_json_dict(st.to_json_dict())
    assert again == st


@given(pure_states())
def test_pure_states_have_zero_defect(pure):
    st = QubitState.from_pure(pure)
    assert abs(st.purity_defect()) < 1e-12


@given(pure_states())
def test_trace_is_structural(pure):
    st = QubitState.from_pure(pure)
    assert st.rho00 + st.rho11 == 1.0
