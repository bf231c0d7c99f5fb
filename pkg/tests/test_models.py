import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qndeff import (
    IndirectProjectiveConfig,
    LinearDetectorConfig,
    PhaseQubitConfig,
    PureState,
    TunnelingConfig,
    apply_outcome,
    average_transform,
    d_min,
    efficiency_report,
    estimate_d0_from_visibility,
    indirect_projective_detector,
    linear_d0,
    linear_d1,
    linear_detector,
    linear_ensemble_eta,
    linear_fidelities,
    phase_qubit_detector,
    tunneling_d1,
    tunneling_detector,
    tunneling_ensemble,
    visibility,
)
from qndeff.models import (
    AnalyticUnsupportedError,
    DegenerateModelError,
    InconsistentDataError,
    ModelConfigError,
    mirrored,
)
from qndeff.states import EQUAL_SUPERPOSITION, QubitState


class TestErfAccuracy:
    def test_math_erf_against_arbitrary_precision_table(self):
        # 20-point cross-check of the libm erf/erfc used by the linear model
        mpmath.mp.dps = 30
        points = np.linspace(-4.5, 4.5, 20)
        for x in points:
            exact = float(mpmath.erf(mpmath.mpf(float(x))))
            assert math.erf(float(x)) == pytest.approx(exact, rel=1e-12, abs=1e-300)
            exact_c = float(mpmath.erfc(mpmath.mpf(float(x))))
            assert math.erfc(float(x)) == pytest.approx(exact_c, rel=1e-12)


class TestIndirectProjective:
    def test_orthogonal_amplitudes_give_projective_detector(self):
        det = indirect_projective_detector(
            IndirectProjectiveConfig(c00=1.0, c01=0.0, c10=0.0, c11=1.0)
        )
        assert det.f0 == 1.0 and det.f1 == 1.0
        assert det.d0 == 0.0 and det.d1 == 0.0

    def test_real_amplitudes_make_everything_ideal(self):
        r = math.sqrt(0.9)
        q = math.sqrt(0.1)
        det = indirect_projective_detector(
            IndirectProjectiveConfig(c00=r, c01=q, c10=q, c11=r)
        )
        rep = efficiency_report(det)
        for name in rep.METRIC_NAMES:
            assert rep.metric(name) == pytest.approx(1.0, abs=1e-12), name

    def test_relative_phase_lowers_eta_only(self):
        chi = math.pi / 4.0
        r, q = math.sqrt(0.9), math.sqrt(0.1)
        det = indirect_projective_detector(
            IndirectProjectiveConfig(c00=r, c01=q, c10=q * cmath.exp(1j * chi), c11=r)
        )
        rep = efficiency_report(det)
        # direct evaluation of the phase-difference efficiency for this model
        m0 = math.sqrt(det.f0 * (1.0 - det.f1))
        m1 = math.sqrt((1.0 - det.f0) * det.f1)
        expected = (-math.log(m0 + m1)) / (
            -math.log(abs(m0 + m1 * cmath.exp(1j * (det.phi1 - det.phi0))))
        )
        assert rep.eta == pytest.approx(expected, rel=1e-12)
        assert rep.eta < 1.0
        assert rep.eta_tilde == pytest.approx(1.0, abs=1e-12)
        assert rep.eta0 == 1.0 and rep.eta1 == 1.0

    def test_rejects_unnormalized_columns(self):
        with pytest.raises(ModelConfigError):
            IndirectProjectiveConfig(c00=1.0, c01=0.0, c10=0.5, c11=1.0)


class TestLinearFidelities:
    def test_zero_threshold_symmetry(self):
        f0, f1 = linear_fidelities(LinearDetectorConfig(s=0.7, r_th=0.0))
        assert f0 == f1

    def test_large_threshold_limits(self):
        f0, f1 = linear_fidelities(LinearDetectorConfig(s=0.5, r_th=20.0))
        assert f0 == pytest.approx(1.0, abs=1e-15)
        assert f1 == pytest.approx(0.0, abs=1e-15)

    def test_unit_strength_value_from_high_precision_erf(self):
        # (1 + erf(1))/2 evaluated with mpmath at 30 digits
        mpmath.mp.dps = 30
        expected = float((1 + mpmath.erf(1)) / 2)
        f0, f1 = linear_fidelities(LinearDetectorConfig(s=1.0, r_th=0.0))
        assert f0 == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.92135, abs=5e-6)

    def test_physical_unit_converter(self):
        cfg = LinearDetectorConfig.from_physical(
            i0=0.0, i1=2.0, spectral_density=4.0, t=8.0, threshold_current=1.5,
        )
        # tau_m = 2S/dI^2 = 2, s = sqrt(t/2tau_m) = sqrt(2)
        assert cfg.s == pytest.approx(math.sqrt(2.0), rel=1e-15)
        assert cfg.r_th == pytest.approx(0.5 * math.sqrt(2.0), rel=1e-15)


class TestLinearDecoherence:
    def test_no_measurement_no_decoherence(self):
        assert linear_d0(LinearDetectorConfig(s=0.0, r_th=0.8)) == 0.0
        assert linear_d0(LinearDetectorConfig(s=0.0, r_th=-2.0)) == 0.0

    def test_pushed_out_threshold_reduces_to_s_squared(self):
        cfg = LinearDetectorConfig(s=0.8, r_th=9.0)
        assert linear_d0(cfg) == pytest.approx(cfg.s**2, abs=1e-12)

    def test_degenerate_window_is_infinite(self):
        assert linear_d0(LinearDetectorConfig(s=0.5, r_th=-40.0)) == math.inf

    def test_kappa_requires_oracle(self):
        with pytest.raises(AnalyticUnsupportedError):
            linear_d0(LinearDetectorConfig(s=1.0, r_th=0.0, kappa=0.3))

    def test_mirror_rule_is_bitwise(self):
        for s in (0.1, 1.0, 2.0):
            for r_th in np.linspace(-3.0, 3.0, 13):
                cfg = LinearDetectorConfig(s=s, r_th=float(r_th))
                assert linear_d1(cfg) == linear_d0(mirrored(cfg))

    def test_dephasing_adds_linearly(self):
        base = LinearDetectorConfig(s=0.9, r_th=0.4)
        bumped = LinearDetectorConfig(s=0.9, r_th=0.4, gamma_t=0.25)
        assert linear_d0(bumped) == pytest.approx(linear_d0(base) + 0.25, rel=1e-12)


class TestLinearDetector:
    def test_zero_threshold_outcome_symmetry(self):
        det = linear_detector(LinearDetectorConfig(s=1.0, r_th=0.0))
        rep = efficiency_report(det)
        assert det.d0 == det.d1
        assert rep.eta0 == rep.eta1
        assert rep.eta == pytest.approx(rep.eta0, rel=1e-12)

    def test_mirror_detectors_swap_roles(self):
        cfg = LinearDetectorConfig(s=1.0, r_th=1.0)
        det = linear_detector(cfg)
        mirror = linear_detector(mirrored(cfg))
        assert det.f0 == mirror.f1 and det.f1 == mirror.f0
        assert det.d0 == mirror.d1 and det.d1 == mirror.d0

    def test_weak_strength_curve_peak(self):
        # eta0 against the threshold at s = 0.1: peak just below 0.692
        # near r_th = -0.56
        grid = np.linspace(-3.0, 3.0, 241)
        values = []
        for r_th in grid:
            rep = efficiency_report(
                linear_detector(LinearDetectorConfig(s=0.1, r_th=float(r_th)))
            )
            values.append(rep.eta0 if rep.eta0 is not None else -1.0)
        values = np.array(values)
        peak = float(values.max())
        argmax = float(grid[values.argmax()])
        assert 0.683 <= peak <= 0.695
        assert -0.70 <= argmax <= -0.45

    def test_asymmetry_grows_with_strength(self):
        def asymmetry(s):
            worst = 0.0
            for r_th in np.linspace(0.2, 2.0, 10):
                plus = efficiency_report(
                    linear_detector(LinearDetectorConfig(s=s, r_th=float(r_th)))
                ).eta0
                minus = efficiency_report(
                    linear_detector(LinearDetectorConfig(s=s, r_th=float(-r_th)))
                ).eta0
                worst = max(worst, abs(plus - minus))
            return worst

        a = [asymmetry(s) for s in (0.1, 1.0, 2.0)]
        assert a[0] < a[1] < a[2]


class TestLinearEnsemble:
    def test_kappa_zero_efficiencies_coincide(self):
        eta, eta_tilde = linear_ensemble_eta(LinearDetectorConfig(s=1.2, r_th=0.3))
        assert eta == eta_tilde

    def test_kappa_enters_only_eta(self):
        cfg = LinearDetectorConfig(s=1.2, r_th=0.3, kappa=0.8)
        eta, eta_tilde = linear_ensemble_eta(cfg)
        eta_ref, _ = linear_ensemble_eta(LinearDetectorConfig(s=1.2, r_th=0.3))
        assert eta < eta_tilde
        assert eta_tilde == pytest.approx(eta_ref, rel=1e-15)

    def test_weak_limit_approaches_two_over_pi(self):
        eta, _ = linear_ensemble_eta(LinearDetectorConfig(s=0.01, r_th=0.0))
        assert 2.0 / math.pi - 1e-3 <= eta <= 2.0 / math.pi

    def test_matched_dephasing_halves_eta(self):
        s = 0.8
        eta0, _ = linear_ensemble_eta(LinearDetectorConfig(s=s, r_th=0.4))
        half, _ = linear_ensemble_eta(
            LinearDetectorConfig(s=s, r_th=0.4, gamma_t=s * s)
        )
        assert half == pytest.approx(eta0 / 2.0, rel=1e-14)

    def test_no_measurement_undefined(self):
        assert linear_ensemble_eta(LinearDetectorConfig(s=0.0, r_th=0.0)) == (None, None)

    def test_report_eta_matches_closed_form(self):
        cfg = LinearDetectorConfig(s=1.0, r_th=0.7, gamma_t=0.2)
        eta, _ = linear_ensemble_eta(cfg)
        rep = efficiency_report(linear_detector(cfg))
        assert rep.eta == pytest.approx(eta, rel=1e-12)


class TestPhaseQubit:
    def test_moderate_strength_report(self):
        det = phase_qubit_detector(PhaseQubitConfig(p=0.5))
        rep = efficiency_report(det)
        assert det.f0 == 1.0 and det.f1 == 0.5
        assert rep.eta0 == 1.0
        for name in ("eta", "eta_tilde", "eta_tilde_tilde", "eta1"):
            assert rep.metric(name) is None
            assert rep.reason(name) == "destroyed-branch"

    def test_zero_strength_still_destroys_branch_one(self):
        det = phase_qubit_detector(PhaseQubitConfig(p=0.0, p0=0.2))
        assert det.f0 == pytest.approx(0.8)
        assert det.destroys_on_1

    def test_spurious_tunneling_keeps_eta0_ideal(self):
        rep = efficiency_report(phase_qubit_detector(PhaseQubitConfig(p=0.5, p0=0.1)))
        assert rep.eta0 == 1.0

    def test_null_result_keeps_state_pure(self):
        det = phase_qubit_detector(PhaseQubitConfig(p=0.37))
        state = QubitState.from_pure(PureState.equal_superposition())
        post = apply_outcome(state, det, 0).post_state
        assert post.purity_defect() < 1e-12


class TestVisibility:
    def test_no_dephasing_full_visibility(self):
        assert visibility(2.0 / 9.0, 0.0) == 1.0

    def test_full_dephasing_limit(self):
        assert visibility(2.0 / 9.0, 60.0) == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_katz_point_estimate(self):
        d0 = estimate_d0_from_visibility(0.93, 0.5, PureState.equal_superposition())
        assert d0 == pytest.approx(0.0824, abs=5e-4)
        dmin = math.log(2.0) / 2.0
        eta0 = dmin / (d0 + dmin)
        assert 0.79 <= eta0 <= 0.83

    def test_perfect_visibility_means_zero_d0(self):
        assert estimate_d0_from_visibility(1.0, 0.5, PureState.equal_superposition()) == 0.0

    def test_inconsistent_visibility_rejected(self):
        with pytest.raises(InconsistentDataError):
            estimate_d0_from_visibility(0.2, 0.5, PureState.equal_superposition())

    @given(
        st.floats(0.01, 0.25, allow_nan=False),
        st.floats(0.0, 4.0, allow_nan=False),
    )
    @settings(max_examples=100)
    def test_round_trip_with_visibility(self, product, d0):
        v = visibility(product, d0)
        # invert manually for an arbitrary diagonal product
        x = (1.0 - v * v) / (4.0 * product)
        recovered = -0.5 * math.log1p(-x) if x < 1.0 else math.inf
        assert recovered == pytest.approx(d0, abs=1e-10)


class TestTunneling:
    def test_equal_rates_no_information_no_decoherence(self):
        det = tunneling_detector(TunnelingConfig(g0t=0.7, g1t=0.7))
        assert det.d1 == 0.0
        assert det.f0 + det.f1 == pytest.approx(1.0, abs=1e-15)

    def test_reference_point_ratio_three(self):
        # frozen from the discretized-continuum oracle (see test_oracles):
        # the ODE value at ratio 3, g1t = ln 2 is 0.002179 with ~2e-5 of
        # finite-band systematics
        d1 = tunneling_d1(math.log(2.0) / 3.0, math.log(2.0))
        assert d1 == pytest.approx(0.0021998313914178835, rel=1e-12)

    def test_matches_naive_formula_at_moderate_exposure(self):
        a, b = 0.9, 2.4
        naive = -math.log(
            (2.0 * math.sqrt(a * b) / (a + b))
            * (1.0 - math.exp(-(a + b) / 2.0))
            / math.sqrt((1.0 - math.exp(-a)) * (1.0 - math.exp(-b)))
        )
        assert tunneling_d1(a, b) == pytest.approx(naive, rel=1e-12)

    def test_small_exposure_quadratic_law(self):
        # d1 ~ (a - b)^2 / 96 for small exposures; the naive form loses
        # everything to cancellation here
        a, b = 2e-4, 3e-4
        assert tunneling_d1(a, b) == pytest.approx((a - b) ** 2 / 96.0, rel=1e-3)

    def test_vanishing_slow_rate_limit(self):
        b = 1.3
        expected = -math.log(
            (2.0 / math.sqrt(b))
            * (1.0 - math.exp(-b / 2.0))
            / math.sqrt(1.0 - math.exp(-b))
        )
        assert tunneling_d1(0.0, b) == pytest.approx(expected, rel=1e-12)

    def test_ideal_null_result(self):
        det = tunneling_detector(TunnelingConfig(g0t=0.2, g1t=0.9))
        rep = efficiency_report(det)
        assert det.d0 == 0.0
        assert rep.eta0 == 1.0

    def test_slow_rate_to_zero_keeps_ensemble_ideal(self):
        b = 1.1
        for g0t in (0.0, 1e-12):
            cfg = TunnelingConfig(g0t=g0t, g1t=b)
            ens = tunneling_ensemble(cfg)
            assert ens.eta == pytest.approx(1.0, abs=1e-9)
            assert ens.d_av == pytest.approx(b / 2.0, rel=1e-9)
            rep = efficiency_report(tunneling_detector(cfg))
            assert rep.eta1_tilde == pytest.approx(1.0, abs=1e-9)
            assert rep.eta1 is not None and rep.eta1 < 1.0

    def test_ensemble_matches_average_transform(self):
        cfg = TunnelingConfig(g0t=0.3, g1t=1.4, phi1=0.6)
        det = tunneling_detector(cfg)
        ens = tunneling_ensemble(cfg)
        avg = average_transform(EQUAL_SUPERPOSITION, det)
        factor = avg.rho01 / EQUAL_SUPERPOSITION.rho01
        assert -math.log(abs(factor)) == pytest.approx(ens.d_av, abs=1e-12)
        assert cmath.phase(factor) == pytest.approx(ens.phi_av, abs=1e-12)

    def test_phase_free_efficiencies_coincide(self):
        cfg = TunnelingConfig(g0t=0.4, g1t=1.1)
        rep = efficiency_report(tunneling_detector(cfg))
        ens = tunneling_ensemble(cfg)
        assert rep.eta == pytest.approx(ens.eta, rel=1e-12)
        assert rep.eta_tilde == pytest.approx(ens.eta, rel=1e-12)
        assert rep.eta_tilde_tilde == pytest.approx(ens.eta, rel=1e-12)

    def test_saturation_and_ordering(self):
        # fixed f1: d1 grows with the rate ratio while eta1 grows too
        g1t = math.log(2.0)
        d1s, eta1s = [], []
        for ratio in (1.5, 3.0, 100.0):
            cfg = TunnelingConfig(g0t=g1t / ratio, g1t=g1t)
            det = tunneling_detector(cfg)
            d1s.append(det.d1)
            eta1s.append(efficiency_report(det).eta1)
        assert d1s[0] < d1s[1] < d1s[2]
        assert eta1s[0] < eta1s[1] < eta1s[2]

    def test_large_exposure_saturates_to_prefactor_log(self):
        ratio = 1.5
        g1t = 40.0
        det_d1 = tunneling_d1(g1t / ratio, g1t)
        sat = -math.log(2.0 * math.sqrt(1.0 / ratio) / (1.0 + 1.0 / ratio))
        assert det_d1 == pytest.approx(sat, abs=1e-8)

    def test_degenerate_configs_raise(self):
        with pytest.raises(DegenerateModelError):
            tunneling_detector(TunnelingConfig(g0t=0.0, g1t=0.0))
        with pytest.raises(DegenerateModelError):
            tunneling_d1(0.0, 0.0)
        with pytest.raises(ModelConfigError):
            TunnelingConfig(g0t=2.0, g1t=1.0)

    def test_rate_converter(self):
        cfg = TunnelingConfig.from_rates(gamma0=0.5, gamma1=2.0, t=3.0)
        assert cfg.g0t == 1.5 and cfg.g1t == 6.0
        assert cfg.ratio == pytest.approx(4.0)
