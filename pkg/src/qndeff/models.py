"""Concrete binary-outcome detector models.

Four models, each reduced to dimensionless parameter groups and mapped onto a
:class:`~qndeff.qnd.QndDetector`:

* **Indirect projective**: the qubit entangles with an ancilla qubit that is
  then measured projectively. Ideal (d0 = d1 = 0); fidelities and phases come
  from the four entanglement amplitudes.

* **Linear detector with a threshold**: a linear detector integrated for time
  t produces a Gaussian record r (variance 1/2, mean -s for |0> and +s for
  |1>, s = sqrt(t / 2 tau_m)); outcome 1 means r >= r_th. Closed forms:

    f0 = [1 + erf(r_th + s)]/2,   f1 = [1 + erf(s - r_th)]/2
    d0 = gamma*t + s^2 - ln{ [1 + erf(r_th)] / (2 sqrt(f0 (1 - f1))) }   (kappa = 0)

  and d1 follows from the mirror rule r_th -> -r_th (which swaps f0 and f1).
  The ensemble decoherence is gamma*t + s^2 (1 + kappa^2), where kappa is the
  dimensionless output/back-action noise correlation; for kappa != 0 the
  outcome-resolved decoherence has no closed form here and is available only
  through the quadrature oracle.

* **Phase-qubit detector**: tunneling of the qubit itself out of its well.
  Outcome 1 destroys the qubit; the null result (outcome 0) is an ideal
  partial collapse with f0 = 1 - p0, f1 = p, d0 = 0. The null-result
  dephasing actually realized in an experiment is inferred from the loss of
  tomography-fringe visibility via :func:`estimate_d0_from_visibility`.

* **Tunneling into continuum**: a separate sensor tunnels at rate Gamma0 or
  Gamma1 depending on the qubit state. With a = Gamma0*t, b = Gamma1*t,

    f0 = exp(-a),  f1 = 1 - exp(-b),  d0 = 0,
    d1 = -ln[ (2 sqrt(ab)/(a+b)) (1 - e^{-(a+b)/2}) / sqrt((1-e^{-a})(1-e^{-b})) ]

  evaluated in log space (see :func:`tunneling_d1`) so the small-rate limit,
  including a = 0 exactly, is free of cancellation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

from .qnd import INF, QndDetector, d_min
from .states import PureState, QubitState

_NORM_TOL = 1e-12


class ModelConfigError(ValueError):
    """Model parameters violate their invariants."""


class AnalyticUnsupportedError(ValueError):
    """Requested closed form does not exist for these parameters."""


class InconsistentDataError(ValueError):
    """Measured inputs cannot be produced by any valid parameter value."""


class DegenerateModelError(ValueError):
    """Model parameters describe a measurement that never fires."""


# ---------------------------------------------------------------------------
# indirect projective measurement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndirectProjectiveConfig:
    """Ancilla amplitudes: qubit state |j> drives the ancilla to
    c0j |0_a> + c1j |1_a>; both columns must be normalized."""

    c00: complex
    c01: complex
    c10: complex
    c11: complex

    def __post_init__(self) -> None:
        col0 = abs(self.c00) ** 2 + abs(self.c10) ** 2
        col1 = abs(self.c01) ** 2 + abs(self.c11) ** 2
        if abs(col0 - 1.0) > _NORM_TOL or abs(col1 - 1.0) > _NORM_TOL:
            raise ModelConfigError(
                f"ancilla columns not normalized: {col0!r}, {col1!r}"
            )


def indirect_projective_detector(cfg: IndirectProjectiveConfig) -> QndDetector:
    """f0 = |c00|^2, f1 = |c11|^2, phi0 = arg(c00 c01*), phi1 = arg(c10 c11*),
    with no extra decoherence on either branch."""
    return QndDetector(
        f0=min(abs(cfg.c00) ** 2, 1.0),
        f1=min(abs(cfg.c11) ** 2, 1.0),
        phi0=cmath.phase(cfg.c00 * cfg.c01.conjugate()),
        phi1=cmath.phase(cfg.c10 * cfg.c11.conjugate()),
        d0=0.0,
        d1=0.0,
    )


# ---------------------------------------------------------------------------
# linear detector in binary-outcome regime
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearDetectorConfig:
    """Dimensionless linear-detector parameters.

    s        measurement strength sqrt(t / 2 tau_m), >= 0
    r_th     threshold on the record r separating outcome 0 (r < r_th) from 1
    gamma_t  extra dephasing gamma * t, >= 0
    kappa    output/back-action noise correlation tau_m * K * dI / 2
    """

    s: float
    r_th: float
    gamma_t: float = 0.0
    kappa: float = 0.0

    def __post_init__(self) -> None:
        if not (self.s >= 0.0):
            raise ModelConfigError(f"s = {self.s!r} must be >= 0")
        if not (self.gamma_t >= 0.0):
            raise ModelConfigError(f"gamma_t = {self.gamma_t!r} must be >= 0")
        if not math.isfinite(self.r_th):
            raise ModelConfigError(f"r_th = {self.r_th!r} must be finite")

    @classmethod
    def from_physical(
        cls,
        i0: float,
        i1: float,
        spectral_density: float,
        t: float,
        threshold_current: float | None = None,
        gamma: float = 0.0,
        noise_correlation: float = 0.0,
    ) -> "LinearDetectorConfig":
        """Thin converter from raw units: currents I0 < I1, white-noise spectral
        density S, integration time t, absolute threshold on the mean current."""
        di = i1 - i0
        if di <= 0.0 or spectral_density <= 0.0 or t < 0.0:
            raise ModelConfigError("need I1 > I0, S > 0, t >= 0")
        s = 0.5 * di * math.sqrt(t / spectral_density)
        mid = 0.5 * (i0 + i1)
        r_th = 0.0 if threshold_current is None else (
            (threshold_current - mid) * math.sqrt(t / spectral_density)
        )
        kappa = noise_correlation * spectral_density / di
        return cls(s=s, r_th=r_th, gamma_t=gamma * t, kappa=kappa)


def mirrored(cfg: LinearDetectorConfig) -> LinearDetectorConfig:
    """Threshold reflection r_th -> -r_th; swaps the roles of the outcomes."""
    return replace(cfg, r_th=-cfg.r_th)


def linear_fidelities(cfg: LinearDetectorConfig) -> tuple[float, float]:
    """(f0, f1) = ([1 + erf(r_th + s)]/2, [1 + erf(s - r_th)]/2), via erfc
    so that extreme thresholds keep full relative precision."""
    f0 = 0.5 * math.erfc(-(cfg.r_th + cfg.s))
    f1 = 0.5 * math.erfc(cfg.r_th - cfg.s)
    return f0, f1


def linear_d0(cfg: LinearDetectorConfig) -> float:
    """Outcome-0 decoherence gamma*t + s^2 - ln{[1+erf(r_th)] / (2 sqrt(f0(1-f1)))}.

    Only the kappa = 0 closed form exists; for kappa != 0 use the quadrature
    oracle. Returns +inf when the outcome-0 window has vanishing weight.
    """
    if cfg.kappa != 0.0:
        raise AnalyticUnsupportedError(
            "outcome-resolved decoherence has no closed form for kappa != 0; "
            "use the quadrature oracle"
        )
    f0, f1 = linear_fidelities(cfg)
    gain_sq = f0 * (1.0 - f1)
    window = 0.5 * math.erfc(-cfg.r_th)  # = (1 + erf(r_th))/2
    if window == 0.0:
        return INF
    if gain_sq <= 0.0:
        return INF
    value = cfg.gamma_t + cfg.s**2 - math.log(window / math.sqrt(gain_sq))
    if value < 0.0:
        if value < -1e-10:
            raise AssertionError(f"negative decoherence {value!r} from {cfg!r}")
        value = 0.0
    return value


def linear_d1(cfg: LinearDetectorConfig) -> float:
    """Mirror rule: d1(r_th) = d0(-r_th)."""
    return linear_d0(mirrored(cfg))


def linear_detector(cfg: LinearDetectorConfig) -> QndDetector:
    """Full QND parameter set of the thresholded linear detector (kappa = 0)."""
    f0, f1 = linear_fidelities(cfg)
    return QndDetector(
        f0=f0, f1=f1, phi0=0.0, phi1=0.0,
        d0=linear_d0(cfg), d1=linear_d1(cfg),
    )


def linear_ensemble_eta(cfg: LinearDetectorConfig) -> tuple[float | None, float | None]:
    """(eta, eta_tilde) at the ensemble level.

    eta = D_min / [gamma*t + s^2 (1 + kappa^2)]; eta_tilde drops the kappa^2
    term. Both are None when the denominator vanishes (no measurement, no
    dephasing: 0/0).
    """
    f0, f1 = linear_fidelities(cfg)
    dmin = d_min(f0, f1)
    den_tilde = cfg.gamma_t + cfg.s**2
    den = den_tilde + (cfg.s * cfg.kappa) ** 2
    if den == 0.0:
        return None, None
    return dmin / den, dmin / den_tilde


# ---------------------------------------------------------------------------
# phase-qubit detector (destructive outcome 1)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseQubitConfig:
    """p: tunneling probability from |1> (measurement strength); p0: spurious
    tunneling probability from |0>; phi0: null-result phase."""

    p: float
    p0: float = 0.0
    phi0: float = 0.0

    def __post_init__(self) -> None:
        for name in ("p", "p0"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ModelConfigError(f"{name} = {v!r} outside [0, 1]")


def phase_qubit_detector(cfg: PhaseQubitConfig) -> QndDetector:
    """f0 = 1 - p0, f1 = p; tunneling (outcome 1) destroys the qubit, the
    null result is an ideal partial collapse (d0 = 0)."""
    return QndDetector(
        f0=1.0 - cfg.p0, f1=cfg.p, phi0=cfg.phi0, d0=0.0, destroys_on_1=True
    )


def visibility(pop_product: float, d0: float) -> float:
    """Tomography-fringe visibility sqrt(1 - 4 q (1 - e^{-2 d0})) for a
    null-result state with diagonal product q = rho00 * rho11."""
    if not (0.0 <= pop_product <= 0.25 + _NORM_TOL):
        raise ModelConfigError(f"diagonal product {pop_product!r} outside [0, 1/4]")
    if d0 < 0.0:
        raise ModelConfigError(f"d0 = {d0!r} must be >= 0")
    return math.sqrt(max(1.0 + 4.0 * pop_product * math.expm1(-2.0 * d0), 0.0))


def null_result_populations(p: float, initial: PureState) -> QubitState:
    """Ideal null-result state of the phase-qubit detector at strength p."""
    from .qnd import apply_outcome

    det = phase_qubit_detector(PhaseQubitConfig(p=p))
    result = apply_outcome(QubitState.from_pure(initial), det, 0)
    assert result.post_state is not None
    return result.post_state


def estimate_d0_from_visibility(
    v_ratio: float, p: float, initial: PureState
) -> float:
    """Invert the visibility formula: the measured visibility ratio v_ratio
    (measurement on / measurement off) at strength p determines

        d0 = -(1/2) ln[ 1 - (1 - v^2) / (4 q) ],

    with q the diagonal product of the ideal null-result state. Raises
    :class:`InconsistentDataError` when v_ratio is too small to be explained
    by pure dephasing of that state.
    """
    if not (0.0 < v_ratio <= 1.0):
        raise ModelConfigError(f"v_ratio = {v_ratio!r} outside (0, 1]")
    post = null_result_populations(p, initial)
    q = post.rho00 * post.rho11
    if q == 0.0:
        if v_ratio == 1.0:
            return 0.0
        raise InconsistentDataError("no coherence to dephase, yet visibility dropped")
    x = (1.0 - v_ratio**2) / (4.0 * q)
    if x >= 1.0:
        raise InconsistentDataError(
            f"visibility ratio {v_ratio} below the d0 -> inf floor for this state"
        )
    return -0.5 * math.log1p(-x)


# ---------------------------------------------------------------------------
# tunneling-into-continuum detector
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TunnelingConfig:
    """Dimensionless exposures g0t = Gamma0 * t <= g1t = Gamma1 * t, plus the
    relative phase phi1 = arg(T0 / T1) of the tunneling amplitudes."""

    g0t: float
    g1t: float
    phi1: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.g0t <= self.g1t):
            raise ModelConfigError(
                f"need 0 <= g0t <= g1t, got ({self.g0t!r}, {self.g1t!r})"
            )

    @classmethod
    def from_rates(
        cls, gamma0: float, gamma1: float, t: float, phi1: float = 0.0
    ) -> "TunnelingConfig":
        if t < 0.0:
            raise ModelConfigError(f"t = {t!r} must be >= 0")
        return cls(g0t=gamma0 * t, g1t=gamma1 * t, phi1=phi1)

    @property
    def ratio(self) -> float:
        """Gamma1 / Gamma0 (inf when g0t = 0)."""
        return INF if self.g0t == 0.0 else self.g1t / self.g0t


def _log_decay_fraction(x: float) -> float:
    """ln[(1 - e^{-x}) / x], the log of the mean decay fraction; 0 at x = 0."""
    if x == 0.0:
        return 0.0
    return math.log(-math.expm1(-x) / x)


def tunneling_d1(g0t: float, g1t: float) -> float:
    """Outcome-1 decoherence in cancellation-free form.

    With lg(x) = ln[(1-e^{-x})/x], d1 = [lg(g0t) + lg(g1t)]/2 - lg((g0t+g1t)/2),
    algebraically identical to
    -ln[(2 sqrt(g0t*g1t)/(g0t+g1t)) (1-e^{-(g0t+g1t)/2}) / sqrt((1-e^{-g0t})(1-e^{-g1t}))]
    but stable for small exposures; g0t = 0 reproduces the
    -ln[(2/sqrt(g1t)) (1-e^{-g1t/2}) / sqrt(1-e^{-g1t})] limit exactly.
    """
    if g0t == 0.0 and g1t == 0.0:
        raise DegenerateModelError("no tunneling on either branch; d1 undefined")
    value = (
        0.5 * (_log_decay_fraction(g0t) + _log_decay_fraction(g1t))
        - _log_decay_fraction(0.5 * (g0t + g1t))
    )
    return max(value, 0.0)


def tunneling_detector(cfg: TunnelingConfig) -> QndDetector:
    """f0 = e^{-g0t}, f1 = 1 - e^{-g1t}, d0 = 0, d1 from :func:`tunneling_d1`.

    At g0t = 0 the outcome-1 coherence weight sqrt((1-f0) f1) vanishes, so the
    (finite) limiting d1 is physically unobservable but still reported.
    """
    if cfg.g1t == 0.0:
        raise DegenerateModelError("outcome 1 has probability 0 for every state")
    return QndDetector(
        f0=math.exp(-cfg.g0t),
        f1=-math.expm1(-cfg.g1t),
        phi0=0.0,
        phi1=cfg.phi1,
        d0=0.0,
        d1=tunneling_d1(cfg.g0t, cfg.g1t),
    )


def tunneling_prefactor(cfg: TunnelingConfig) -> float:
    """2 sqrt(Gamma0 Gamma1) / (Gamma0 + Gamma1), a function of the ratio only."""
    if cfg.g1t == 0.0:
        raise DegenerateModelError("prefactor undefined for g0t = g1t = 0")
    return 2.0 * math.sqrt(cfg.g0t * cfg.g1t) / (cfg.g0t + cfg.g1t)


@dataclass(frozen=True)
class TunnelingEnsemble:
    d_av: float
    phi_av: float
    eta: float | None


def tunneling_ensemble(cfg: TunnelingConfig) -> TunnelingEnsemble:
    """Ensemble decoherence and the coinciding eta = eta_tilde = eta_tilde_tilde.

    exp(-d_av + i phi_av) = e^{-(g0t+g1t)/2}
                            + [2 sqrt(g0t g1t)/(g0t+g1t)] e^{i phi1} (1 - e^{-(g0t+g1t)/2}).

    The returned eta is the phase-free ratio D_min / D_av|_{phi1=0}; for
    phi1 = 0 all three ensemble efficiencies equal it, and for phi1 != 0 it
    is eta_tilde. None for equal exposures (the 0/0 no-information case).
    """
    if cfg.g1t == 0.0:
        raise DegenerateModelError("no measurement; ensemble efficiency undefined")
    half = 0.5 * (cfg.g0t + cfg.g1t)
    survive = math.exp(-half)
    decay = -math.expm1(-half)
    pref = tunneling_prefactor(cfg)
    z = survive + pref * decay * cmath.exp(1j * cfg.phi1)
    mod = abs(z)
    d_av = INF if mod == 0.0 else max(-math.log(mod), 0.0)
    phi_av = cmath.phase(z) if mod > 0.0 else 0.0

    dmin = d_min(math.exp(-cfg.g0t), -math.expm1(-cfg.g1t))
    d_ref = max(-math.log(survive + pref * decay), 0.0)
    eta = None if d_ref == 0.0 else min(dmin / d_ref, 1.0)
    return TunnelingEnsemble(d_av=d_av, phi_av=phi_av, eta=eta)
