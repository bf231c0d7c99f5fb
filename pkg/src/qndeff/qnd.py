"""Six-parameter algebra of binary-outcome QND qubit detectors.

A QND detector leaves the basis states |0> and |1> invariant, so one
measurement is fully described by six parameters:

  f0, f1      outcome fidelities: P(outcome 0 | state |0>) and P(outcome 1 | state |1>)
  phi0, phi1  outcome-conditioned phase kicks on the coherence rho01
  d0, d1      outcome-conditioned extra decoherence, as suppression exp(-d_i)

Conditioned on outcome i, the (unnormalized) state map scales the density
matrix elements as

  outcome 0:  rho00 -> f0*rho00,     rho01 -> sqrt(f0*(1-f1)) e^{-d0} e^{i phi0} rho01,  rho11 -> (1-f1)*rho11
  outcome 1:  rho00 -> (1-f0)*rho00, rho01 -> sqrt((1-f0)*f1) e^{-d1} e^{i phi1} rho01,  rho11 -> f1*rho11

with outcome probabilities P0 = f0*rho00 + (1-f1)*rho11 and P1 = 1 - P0.

Averaging over the outcome multiplies rho01 by

  e^{-D_av} e^{i phi_av} = sqrt(f0(1-f1)) e^{-d0 + i phi0} + sqrt((1-f0) f1) e^{-d1 + i phi1},

which is bounded by the purely informational decoherence floor

  D_av >= D_min = -ln[ sqrt(f0*(1-f1)) + sqrt((1-f0)*f1) ] >= 0.

Seven efficiency metrics compare realized decoherence with that floor; see
:func:`efficiency_report`. Metrics can be *undefined* (destroyed branch,
indeterminate 0/0 or inf/inf limits, or a destructive-interference regime
where the phase-only numerator of eta_tilde_tilde exceeds D_av); undefined
metrics carry a machine-readable reason instead of a number.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .states import QubitState, VALIDATION_TOL

INF = math.inf

#: Reason codes attached to undefined efficiency metrics.
REASON_DESTROYED = "destroyed-branch"
REASON_ZERO_OVER_ZERO = "zero-over-zero"
REASON_PROJECTIVE = "projective-limit"
REASON_INTERFERENCE = "destructive-interference"
UNDEFINED_REASONS = frozenset(
    {REASON_DESTROYED, REASON_ZERO_OVER_ZERO, REASON_PROJECTIVE, REASON_INTERFERENCE}
)

# Rounding slack for clamping metrics onto [0, 1]; anything farther out is a
# genuine out-of-range value, not float dust.
_CLAMP_TOL = 1e-12


class DetectorValidationError(ValueError):
    """Detector parameters violate their invariants."""


class ImpossibleOutcomeError(ValueError):
    """Requested an outcome whose probability is zero."""


class UndefinedAverageError(ValueError):
    """Ensemble average requested for a detector that destroys one branch."""


def canonical_phase(phi: float) -> float:
    """Map an angle to the branch (-pi, pi]."""
    if not math.isfinite(phi):
        raise DetectorValidationError(f"phase must be finite, got {phi!r}")
    out = math.remainder(phi, math.tau)
    if out <= -math.pi:  # remainder() can return the open endpoint
        out += math.tau
    return out


@dataclass(frozen=True)
class QndDetector:
    """Binary-outcome QND detector (f0, f1, phi0, phi1, d0, d1).

    ``destroys_on_1`` marks detectors whose outcome-1 branch physically
    destroys the qubit (e.g. tunneling of the qubit itself); d1 is then
    forced to +inf and phi1 to 0, and outcome-1 post-states do not exist.
    """

    f0: float
    f1: float
    phi0: float = 0.0
    phi1: float = 0.0
    d0: float = 0.0
    d1: float = 0.0
    destroys_on_1: bool = False

    def __post_init__(self) -> None:
        for name in ("f0", "f1"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise DetectorValidationError(f"{name} = {v!r} outside [0, 1]")
        for name in ("d0", "d1"):
            v = getattr(self, name)
            if math.isnan(v) or v < 0.0:
                raise DetectorValidationError(f"{name} = {v!r} must be >= 0 (inf allowed)")
        object.__setattr__(self, "phi0", canonical_phase(self.phi0))
        if self.destroys_on_1:
            object.__setattr__(self, "d1", INF)
            object.__setattr__(self, "phi1", 0.0)
        else:
            object.__setattr__(self, "phi1", canonical_phase(self.phi1))

    # Off-diagonal moduli sqrt(f0(1-f1)) and sqrt((1-f0)f1) recur everywhere.
    @property
    def gain0(self) -> float:
        return math.sqrt(self.f0 * (1.0 - self.f1))

    @property
    def gain1(self) -> float:
        return math.sqrt((1.0 - self.f0) * self.f1)

    def coherence_factor(self, outcome: int) -> complex:
        """Complex multiplier applied to rho01 by the unnormalized outcome map."""
        if outcome == 0:
            return self.gain0 * math.exp(-self.d0) * cmath.exp(1j * self.phi0)
        return self.gain1 * math.exp(-self.d1) * cmath.exp(1j * self.phi1)

    def to_json_dict(self) -> dict:
        return {
            "f0": self.f0,
            "f1": self.f1,
            "phi0": self.phi0,
            "phi1": self.phi1,
            "d0": "inf" if math.isinf(self.d0) else self.d0,
            "d1": "inf" if math.isinf(self.d1) else self.d1,
            "destroys_on_1": self.destroys_on_1,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "QndDetector":
        def as_d(value) -> float:
            if isinstance(value, str):
                if value.lower() in ("inf", "+inf", "infinity"):
                    return INF
                raise DetectorValidationError(f"bad decoherence value {value!r}")
            return float(value)

        try:
            return cls(
                f0=float(data["f0"]),
                f1=float(data["f1"]),
                phi0=float(data.get("phi0", 0.0)),
                phi1=float(data.get("phi1", 0.0)),
                d0=as_d(data.get("d0", 0.0)),
                d1=as_d(data.get("d1", 0.0)),
                destroys_on_1=bool(data.get("destroys_on_1", False)),
            )
        except KeyError as exc:
            raise DetectorValidationError(f"missing detector field: {exc}") from exc


@dataclass(frozen=True)
class OutcomeResult:
    """One conditioned measurement branch: outcome bit, its probability, post-state.

    ``post_state is None`` marks a destroyed qubit (destructive outcome-1 branch).
    """

    outcome: int
    probability: float
    post_state: Optional[QubitState]

    @property
    def is_destroyed(self) -> bool:
        return self.post_state is None


def outcome_probabilities(state: QubitState, det: QndDetector) -> tuple[float, float]:
    """(P0, P1) with P0 = f0*rho00 + (1-f1)*rho11 and P1 = 1 - P0 exactly."""
    p0 = det.f0 * state.rho00 + (1.0 - det.f1) * state.rho11
    return p0, 1.0 - p0


def apply_outcome(state: QubitState, det: QndDetector, outcome: int) -> OutcomeResult:
    """Conditioned state update for one measurement outcome.

    Diagonals follow the classical Bayes rule; the coherence is scaled by
    ``det.coherence_factor(outcome) / P_outcome``. Raises
    :class:`ImpossibleOutcomeError` when the outcome has zero probability.
    """
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    w00 = det.f0 if outcome == 0 else 1.0 - det.f0
    w11 = (1.0 - det.f1) if outcome == 0 else det.f1
    # normalize by the weight sum directly: 1 - P0 would lose all precision
    # for rare outcomes and push the Bayes ratio out of [0, 1]
    p = w00 * state.rho00 + w11 * state.rho11
    if p <= 0.0:
        raise ImpossibleOutcomeError(f"outcome {outcome} has probability {p!r}")
    if outcome == 1 and det.destroys_on_1:
        return OutcomeResult(1, p, None)
    rho00 = w00 * state.rho00 / p
    rho01 = det.coherence_factor(outcome) * state.rho01 / p
    # guard against float dust pushing |rho01| past the positivity bound
    bound = math.sqrt(max(rho00 * max(w11 * state.rho11 / p, 0.0), 0.0))
    mag = abs(rho01)
    if bound < mag <= bound * (1.0 + 1e-13):
        rho01 *= bound / mag
    return OutcomeResult(outcome, p, QubitState(rho00, rho01))


def ensemble_coherence_factor(det: QndDetector) -> complex:
    """exp(-D_av + i*phi_av): outcome-averaged multiplier on rho01."""
    if det.destroys_on_1:
        raise UndefinedAverageError("detector destroys the qubit on outcome 1")
    return det.coherence_factor(0) + det.coherence_factor(1)


def average_transform(state: QubitState, det: QndDetector) -> QubitState:
    """Outcome-averaged state: diagonal untouched, rho01 scaled by the ensemble factor.

    Equals the probability-weighted mixture P0*rho^(0) + P1*rho^(1).
    """
    return QubitState(state.rho00, ensemble_coherence_factor(det) * state.rho01)


def d_min(f0: float, f1: float) -> float:
    """Informational lower bound on ensemble decoherence.

    -ln[sqrt(f0*(1-f1)) + sqrt((1-f0)*f1)]; zero iff f0 + f1 = 1 and +inf in
    the degenerate corners (f0, f1) in {(0, 0), (1, 1)} where the bracket
    vanishes (perfectly projective or anti-projective outcome statistics).
    """
    for name, v in (("f0", f0), ("f1", f1)):
        if not (0.0 <= v <= 1.0):
            raise DetectorValidationError(f"{name} = {v!r} outside [0, 1]")
    bracket = math.sqrt(f0 * (1.0 - f1)) + math.sqrt((1.0 - f0) * f1)
    if bracket == 0.0:
        return INF
    return max(-math.log(bracket), 0.0)


@dataclass(frozen=True)
class EfficiencyReport:
    """D_min, ensemble decoherence, and the seven efficiency metrics.

    Every field except ``d_min`` may be None (undefined); the reason is then
    recorded in ``undefined_reasons`` under the field's name. Defined metric
    values always lie in [0, 1].
    """

    d_min: float
    d_av: Optional[float]
    phi_av: Optional[float]
    eta: Optional[float]
    eta_tilde: Optional[float]
    eta_tilde_tilde: Optional[float]
    eta0: Optional[float]
    eta1: Optional[float]
    eta0_tilde: Optional[float]
    eta1_tilde: Optional[float]
    undefined_reasons: dict = field(default_factory=dict)

    METRIC_NAMES = (
        "eta", "eta_tilde", "eta_tilde_tilde", "eta0", "eta1",
        "eta0_tilde", "eta1_tilde",
    )

    def metric(self, name: str) -> Optional[float]:
        if name not in self.METRIC_NAMES + ("d_min", "d_av", "phi_av"):
            raise KeyError(f"unknown metric {name!r}")
        return getattr(self, name)

    def reason(self, name: str) -> Optional[str]:
        return self.undefined_reasons.get(name)

    def to_json_dict(self) -> dict:
        def enc(v):
            if v is None:
                return None
            if math.isinf(v):
                return "inf"
            return v

        out = {"d_min": enc(self.d_min), "d_av": enc(self.d_av), "phi_av": enc(self.phi_av)}
        for name in self.METRIC_NAMES:
            out[name] = enc(getattr(self, name))
        for name, why in sorted(self.undefined_reasons.items()):
            out[f"{name}_undefined_reason"] = why
        return out


def _clamp_unit(value: float) -> float:
    """Snap rounding dust at the ends of [0, 1]; leave real violations alone."""
    if -_CLAMP_TOL <= value < 0.0:
        return 0.0
    if 1.0 < value <= 1.0 + _CLAMP_TOL:
        return 1.0
    return value


def _ratio(num: float, den: float) -> tuple[Optional[float], Optional[str]]:
    """num/den for num, den in [0, inf] with limit rules x/inf = 0, inf/inf undefined."""
    if den == 0.0:  # den >= num for every metric routed here, so num is ~0 too
        return None, REASON_ZERO_OVER_ZERO
    if math.isinf(num) and math.isinf(den):
        return None, REASON_PROJECTIVE
    if math.isinf(den):
        return 0.0, None
    return _clamp_unit(num / den), None


def efficiency_report(det: QndDetector) -> EfficiencyReport:
    """All seven quantum-efficiency metrics of a detector, with undefined handling.

    Metrics:
      eta              = D_min / D_av
      eta_tilde        = D_min / -ln[g0 e^{-d0} + g1 e^{-d1}]         (phases dropped)
      eta_tilde_tilde  = -ln|g0 + g1 e^{i(phi1-phi0)}| / D_av         (decoherences dropped)
      eta0, eta1       = D_min / (d_i + D_min)
      eta0_tilde       = L0 / (d0 + L0) with L0 = -ln g0; eta1_tilde analogous with g1, d1

    where g0 = sqrt(f0(1-f1)) and g1 = sqrt((1-f0)f1). Undefined cases:

      * destroyed outcome-1 branch: everything needing that branch;
      * projective statistics (D_min = +inf): every metric — the formalism
        does not apply to perfect-fidelity measurement;
      * indeterminate 0/0 or inf/inf limits;
      * eta_tilde_tilde in the destructive-interference regime where its
        phase-only numerator exceeds D_av (the outcome decoherences then
        *reduce* the net phase cancellation and the ratio loses its meaning
        as an efficiency, exceeding 1).

    The per-outcome eta_i_tilde resolve to 1 when g_i = 0 with finite d_i:
    the branch coherence weight vanishes, so the extra dephasing is
    unobservable and the detector is ideal for that outcome.
    """
    g0, g1 = det.gain0, det.gain1
    dmin = d_min(det.f0, det.f1)
    values: dict[str, Optional[float]] = {}
    reasons: dict[str, str] = {}

    def undefine(name: str, why: str) -> None:
        values[name] = None
        reasons[name] = why

    def define(name: str, pair: tuple[Optional[float], Optional[str]]) -> None:
        value, why = pair
        if why is None:
            values[name] = value
        else:
            undefine(name, why)

    destroyed = det.destroys_on_1
    orthodox = math.isinf(dmin)

    # ensemble decoherence and phase
    if destroyed:
        undefine("d_av", REASON_DESTROYED)
        undefine("phi_av", REASON_DESTROYED)
        d_av = None
    else:
        z = ensemble_coherence_factor(det)
        mod = abs(z)
        d_av = INF if mod == 0.0 else max(-math.log(mod), 0.0)
        values["d_av"] = d_av
        values["phi_av"] = cmath.phase(z) if mod > 0.0 else 0.0

    # metrics needing the averaged (or outcome-1) branch
    ensemble_metrics = ("eta", "eta_tilde", "eta_tilde_tilde", "eta1", "eta1_tilde")
    if destroyed:
        for name in ensemble_metrics:
            undefine(name, REASON_DESTROYED)
        if orthodox:
            undefine("eta0", REASON_PROJECTIVE)
            undefine("eta0_tilde", REASON_PROJECTIVE)
        else:
            define("eta0", _ratio(dmin, det.d0 + dmin))
            define("eta0_tilde", _tilde_outcome(g0, det.d0))
    elif orthodox:
        for name in ("eta", "eta_tilde", "eta_tilde_tilde", "eta0", "eta1",
                     "eta0_tilde", "eta1_tilde"):
            undefine(name, REASON_PROJECTIVE)
    else:
        define("eta", _ratio(dmin, d_av))
        damped = g0 * math.exp(-det.d0) + g1 * math.exp(-det.d1)
        d_tilde = INF if damped == 0.0 else max(-math.log(damped), 0.0)
        define("eta_tilde", _ratio(dmin, d_tilde))
        define("eta0", _ratio(dmin, det.d0 + dmin))
        define("eta1", _ratio(dmin, det.d1 + dmin))
        define("eta0_tilde", _tilde_outcome(g0, det.d0))
        define("eta1_tilde", _tilde_outcome(g1, det.d1))
        define("eta_tilde_tilde", _phase_only_metric(g0, g1, det.phi1 - det.phi0, d_av))

    return EfficiencyReport(
        d_min=dmin,
        d_av=values.get("d_av"),
        phi_av=values.get("phi_av"),
        eta=values.get("eta"),
        eta_tilde=values.get("eta_tilde"),
        eta_tilde_tilde=values.get("eta_tilde_tilde"),
        eta0=values.get("eta0"),
        eta1=values.get("eta1"),
        eta0_tilde=values.get("eta0_tilde"),
        eta1_tilde=values.get("eta1_tilde"),
        undefined_reasons=reasons,
    )


def _tilde_outcome(gain: float, d: float) -> tuple[Optional[float], Optional[str]]:
    """L/(d + L) with L = -ln(gain), resolved as 1/(1 + d/L) so that a
    vanishing branch weight (L = inf) with finite d gives exactly 1."""
    if gain >= 1.0:  # L = 0: only reachable at f0 = 1, f1 = 0 (or mirrored)
        return _ratio(0.0, d)
    if gain == 0.0:
        if math.isinf(d):
            return None, REASON_PROJECTIVE
        return 1.0, None
    ell = -math.log(gain)
    return _ratio(ell, d + ell)


def _phase_only_metric(
    g0: float, g1: float, dphi: float, d_av: float
) -> tuple[Optional[float], Optional[str]]:
    """eta_tilde_tilde = -ln|g0 + g1 e^{i dphi}| / D_av, undefined when the
    phase-only numerator exceeds D_av (destructive-interference regime)."""
    mod = abs(g0 + g1 * cmath.exp(1j * dphi))
    num = INF if mod == 0.0 else max(-math.log(mod), 0.0)
    if d_av == 0.0:  # then no damping and aligned phases, so num is ~0 as well
        return None, REASON_ZERO_OVER_ZERO
    if math.isinf(num):
        return None, REASON_INTERFERENCE
    if math.isinf(d_av):
        return 0.0, None
    value = num / d_av
    if value > 1.0 + _CLAMP_TOL:
        return None, REASON_INTERFERENCE
    return _clamp_unit(value), None


@dataclass(frozen=True)
class ComposedOutcome:
    """Fixed-outcome composition of two QND detectors, as an unnormalized map.

    The per-outcome QND maps are diagonal scalings, so composing (detector a,
    outcome oa) then (detector b, outcome ob) is again a diagonal scaling with
    weights w00, w11 and coherence factor c. Used for internal-consistency
    property tests.
    """

    w00: float
    w11: float
    c: complex

    def probability(self, state: QubitState) -> float:
        return self.w00 * state.rho00 + self.w11 * state.rho11

    def post_state(self, state: QubitState) -> QubitState:
        p = self.probability(state)
        if p <= 0.0:
            raise ImpossibleOutcomeError(f"composed outcome has probability {p!r}")
        return QubitState(self.w00 * state.rho00 / p, self.c * state.rho01 / p)


def compose_sequential(
    det_a: QndDetector, det_b: QndDetector, outcome_a: int, outcome_b: int
) -> ComposedOutcome:
    """Closed form of measuring det_a (outcome_a) then det_b (outcome_b)."""
    for det, outcome, tag in ((det_a, outcome_a, "a"), (det_b, outcome_b, "b")):
        if outcome not in (0, 1):
            raise ValueError(f"outcome_{tag} must be 0 or 1")
        if outcome == 1 and det.destroys_on_1:
            raise UndefinedAverageError(
                f"detector {tag} destroys the qubit on outcome 1; no composition"
            )

    def weights(det: QndDetector, outcome: int) -> tuple[float, float]:
        if outcome == 0:
            return det.f0, 1.0 - det.f1
        return 1.0 - det.f0, det.f1

    wa00, wa11 = weights(det_a, outcome_a)
    wb00, wb11 = weights(det_b, outcome_b)
    return ComposedOutcome(
        w00=wa00 * wb00,
        w11=wa11 * wb11,
        c=det_a.coherence_factor(outcome_a) * det_b.coherence_factor(outcome_b),
    )
