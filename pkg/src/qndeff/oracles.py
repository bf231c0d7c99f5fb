"""Independent numerical verifiers for the closed-form detector results.

Three routes, deliberately disjoint from the analytic formulas they check:

* :func:`quad_linear` integrates the record-conditioned Bayesian state of the
  linear detector over the measurement record r with adaptive quadrature,
  recovering outcome probabilities and post-states without using the
  closed-form fidelity/decoherence expressions.

* :func:`mc_linear` / :func:`mc_detector_outcomes` sample the same statistics
  with a seeded, chunk-deterministic Monte Carlo.

* :func:`solve_discretized_continuum` integrates the Schrodinger equation of
  the well + discretized-continuum tunneling model with a fixed-step RK4 and
  extracts fidelities and outcome-1 decoherence from the raw amplitudes.

All stochastic outputs carry their seed; all solvers report achieved error
bounds so results can be serialized as self-describing records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .models import DegenerateModelError, LinearDetectorConfig, TunnelingConfig
from .qnd import QndDetector, outcome_probabilities
from .states import QubitState

_SQRT_PI = math.sqrt(math.pi)
#: Gaussian tail cutoff, in units of the record's unit standard deviation of
#: the exponent variable; erfc(8) ~ 1.1e-28 bounds the discarded mass.
_TAIL_SIGMA = 8.0


class AccuracyError(RuntimeError):
    """Requested tolerance could not be achieved; carries the achieved bound."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


class DiscretizationError(ValueError):
    """Continuum discretization too coarse (or recurrence reached) for this time."""


class StepperAccuracyError(RuntimeError):
    """Integrator norm drift exceeded its budget."""


# ---------------------------------------------------------------------------
# quadrature over the linear-detector record
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadLinearResult:
    """Outcome-resolved averages of the record-conditioned linear-detector state."""

    p0: float
    post0: QubitState
    p1: float
    post1: QubitState
    error_bound: float

    def to_json_dict(self) -> dict:
        return {
            "p0": self.p0,
            "post0": self.post0.to_json_dict(),
            "p1": self.p1,
            "post1": self.post1.to_json_dict(),
            "error_bound": self.error_bound,
        }


def quad_linear(
    cfg: LinearDetectorConfig, state: QubitState, tol: float = 1e-10
) -> QuadLinearResult:
    """Average the Bayesian post-measurement state over each outcome window.

    Conditioned on the record r, the state |j> contributes likelihood
    L_j(r) = exp(-(r -+ ... +- s)^2)/sqrt(pi) (mean -s for |0>, +s for |1>,
    variance 1/2), the diagonals follow Bayes' rule, and the coherence is
    rho01 * sqrt(L0 L1)/P(r) * e^{-gamma t} * e^{i 2 kappa s r}. Outcome 0
    collects r < r_th, outcome 1 the rest. Integrals run over the windows
    truncated at +-(8 + s) unit deviations with the discarded Gaussian mass
    bounded by erfc and folded into ``error_bound``.
    """
    if cfg.s <= 0.0:
        raise ValueError("quadrature oracle needs s > 0")
    s, rt = cfg.s, cfg.r_th
    damp = math.exp(-cfg.gamma_t) * math.exp(-s * s)
    twoks = 2.0 * cfg.kappa * s

    def like0(r: float) -> float:
        return math.exp(-((r + s) ** 2)) / _SQRT_PI

    def like1(r: float) -> float:
        return math.exp(-((r - s) ** 2)) / _SQRT_PI

    def coh_re(r: float) -> float:
        return math.exp(-r * r) / _SQRT_PI * math.cos(twoks * r)

    def coh_im(r: float) -> float:
        return math.exp(-r * r) / _SQRT_PI * math.sin(twoks * r)

    lo = min(-_TAIL_SIGMA - s, rt - 1.0)
    hi = max(_TAIL_SIGMA + s, rt + 1.0)
    windows = {0: (lo, rt), 1: (rt, hi)}
    eps = tol / 16.0
    achieved = 0.0

    def integrate(f, a: float, b: float) -> float:
        nonlocal achieved
        value, err = quad(f, a, b, epsabs=eps, epsrel=0.0, limit=200)
        achieved += err
        return value

    tail = math.erfc(_TAIL_SIGMA)  # discarded mass, all four integrands combined
    achieved += tail

    results = {}
    for outcome, (a, b) in windows.items():
        w0 = integrate(like0, a, b)
        w1 = integrate(like1, a, b)
        n00 = state.rho00 * w0
        n11 = state.rho11 * w1
        p = n00 + n11
        coh = damp * complex(integrate(coh_re, a, b), integrate(coh_im, a, b))
        results[outcome] = (p, n00, state.rho01 * coh)

    if achieved > tol:
        raise AccuracyError(
            f"quadrature achieved {achieved:.3e} > requested {tol:.3e}", achieved
        )

    def build(p: float, n00: float, off: complex) -> QubitState:
        rho00 = min(max(n00 / p, 0.0), 1.0)
        rho01 = off / p
        bound = math.sqrt(rho00 * (1.0 - rho00))
        mag = abs(rho01)
        if mag > bound:  # quadrature dust may overshoot the positivity edge
            rho01 *= bound / mag if mag > 0.0 else 0.0
        return QubitState(rho00, rho01)

    p0, n00_0, off0 = results[0]
    p1, n00_1, off1 = results[1]
    return QuadLinearResult(
        p0=p0, post0=build(p0, n00_0, off0),
        p1=p1, post1=build(p1, n00_1, off1),
        error_bound=achieved,
    )


def recover_outcome_decoherence(
    result: QuadLinearResult, state: QubitState, f0: float, f1: float, outcome: int = 0
) -> tuple[float, float]:
    """(d, phi) of one outcome implied by a quadrature result.

    Matches the averaged coherence against the QND off-diagonal structure
    gain * e^{-d} e^{i phi} * rho01 / P using the supplied fidelities. This is
    the only route to the outcome-resolved decoherence when kappa != 0.
    """
    if state.rho01 == 0:
        raise ValueError("need a state with coherence to read off the decoherence")
    if outcome == 0:
        post, p, gain = result.post0, result.p0, math.sqrt(f0 * (1.0 - f1))
    else:
        post, p, gain = result.post1, result.p1, math.sqrt((1.0 - f0) * f1)
    c = post.rho01 * p / state.rho01
    mag = abs(c)
    if mag == 0.0:
        return math.inf, 0.0
    return -math.log(mag / gain), math.atan2(c.imag, c.real)


# ---------------------------------------------------------------------------
# Monte Carlo record sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate with its standard error and provenance."""

    value: float
    std_error: float
    n_samples: int
    seed: int

    def z_score(self, target: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.value == target else math.inf
        return (self.value - target) / self.std_error


_CHUNK = 1 << 19


def _fraction(hits: int, total: int, seed: int) -> McEstimate:
    if total == 0:
        return McEstimate(math.nan, math.nan, 0, seed)
    p = hits / total
    return McEstimate(p, math.sqrt(max(p * (1.0 - p), 0.0) / total), total, seed)


def mc_linear(
    cfg: LinearDetectorConfig, state: QubitState, n: int, seed: int
) -> dict[str, McEstimate]:
    """Sample the linear-detector record and threshold it.

    Draws the underlying basis state from diag(rho), then the record from the
    matching Gaussian (mean -+s, variance 1/2), and bins at r_th. Returns
    estimates for p0, the fidelities, and the outcome-conditioned diagonals.
    Chunked with per-chunk spawned substreams, so a fixed seed gives a
    bit-identical result regardless of platform threading.
    """
    if n < 1000:
        raise ValueError("need at least 1e3 samples")
    scale = math.sqrt(0.5)
    children = np.random.SeedSequence(seed).spawn((n + _CHUNK - 1) // _CHUNK)
    n1 = out1 = n1_out1 = n0_out0 = n0_out1 = 0
    remaining = n
    for child in children:
        m = min(_CHUNK, remaining)
        remaining -= m
        rng = np.random.default_rng(child)
        is1 = rng.random(m) >= state.rho00
        r = rng.standard_normal(m) * scale + np.where(is1, cfg.s, -cfg.s)
        o1 = r >= cfg.r_th
        n1 += int(is1.sum())
        out1 += int(o1.sum())
        n1_out1 += int((is1 & o1).sum())
        n0_out0 += int((~is1 & ~o1).sum())
        n0_out1 += int((~is1 & o1).sum())
    n0 = n - n1
    out0 = n - out1
    return {
        "p0": _fraction(out0, n, seed),
        "f0": _fraction(n0_out0, n0, seed),
        "f1": _fraction(n1_out1, n1, seed),
        "rho00_given_0": _fraction(n0 - n0_out1, out0, seed),
        "rho11_given_0": _fraction(out0 - (n0 - n0_out1), out0, seed),
        "rho00_given_1": _fraction(n0_out1, out1, seed),
        "rho11_given_1": _fraction(n1_out1, out1, seed),
    }


def mc_detector_outcomes(
    det: QndDetector, state: QubitState, n: int, seed: int
) -> McEstimate:
    """Bernoulli check of the outcome probabilities: estimate of P0."""
    if n < 1000:
        raise ValueError("need at least 1e3 samples")
    p0, _ = outcome_probabilities(state, det)
    children = np.random.SeedSequence(seed).spawn((n + _CHUNK - 1) // _CHUNK)
    hits = 0
    remaining = n
    for child in children:
        m = min(_CHUNK, remaining)
        remaining -= m
        rng = np.random.default_rng(child)
        hits += int((rng.random(m) < p0).sum())
    return _fraction(hits, n, seed)


# ---------------------------------------------------------------------------
# discretized-continuum tunneling model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuumDiscretization:
    """Uniform discretization of the tunneling continuum.

    levels     number of continuum levels M, uniform on [-W/2, W/2]
    bandwidth  full bandwidth W in energy units (hbar = 1)
    dt         integrator step

    The grid must satisfy, for the requested evolution time t,
    spacing * t <= 0.1 (no recurrences) and W >= 100 * Gamma1 (wide band).
    """

    levels: int
    bandwidth: float
    dt: float

    def __post_init__(self) -> None:
        if self.levels < 3 or self.bandwidth <= 0.0 or self.dt <= 0.0:
            raise DiscretizationError(
                f"bad discretization (M={self.levels}, W={self.bandwidth}, dt={self.dt})"
            )

    @property
    def spacing(self) -> float:
        return self.bandwidth / (self.levels - 1)

    @property
    def density_of_states(self) -> float:
        return 1.0 / self.spacing

    @classmethod
    def for_evolution(
        cls,
        gamma1: float,
        t: float,
        base_levels: int = 4001,
        bandwidth_factor: float = 200.0,
        max_wdt: float = 0.05,
    ) -> "ContinuumDiscretization":
        """Default grid: W = 200*Gamma1, M = 4001 raised as needed so that
        spacing * t <= 0.1, and dt with W*dt <= 0.05."""
        if gamma1 <= 0.0 or t <= 0.0:
            raise DiscretizationError("need gamma1 > 0 and t > 0")
        w = bandwidth_factor * gamma1
        min_levels = int(math.ceil(w * t / 0.1)) + 1
        m = max(base_levels, min_levels)
        return cls(levels=m, bandwidth=w, dt=max_wdt / w)

    def validate_for(self, gamma1: float, t: float) -> None:
        if self.spacing * t > 0.1 * (1.0 + 1e-12):
            raise DiscretizationError(
                f"spacing*t = {self.spacing * t:.3f} > 0.1: recurrence risk; "
                f"raise the level count"
            )
        if self.bandwidth < 100.0 * gamma1:
            raise DiscretizationError(
                f"bandwidth {self.bandwidth:.3g} below the wide-band floor "
                f"100*Gamma1 = {100.0 * gamma1:.3g}"
            )

    def to_json_dict(self) -> dict:
        return {"levels": self.levels, "bandwidth": self.bandwidth, "dt": self.dt}


@dataclass(frozen=True)
class TunnelingOdeResult:
    """Raw-amplitude observables of the two-branch tunneling evolution."""

    f0: float
    f1: float
    d1: Optional[float]
    phi1: Optional[float]
    overlap: complex
    norm_drift: float
    discretization: ContinuumDiscretization

    def to_json_dict(self) -> dict:
        return {
            "f0": self.f0,
            "f1": self.f1,
            "d1": self.d1,
            "phi1": self.phi1,
            "overlap_re": self.overlap.real,
            "overlap_im": self.overlap.imag,
            "norm_drift": self.norm_drift,
            "discretization": self.discretization.to_json_dict(),
        }


def _propagate_branch(
    amp_t: complex, energies: np.ndarray, t: float, dt: float
) -> tuple[complex, np.ndarray, float, float]:
    """RK4 for a' = -i conj(T) sum(b), b_k' = -i e_k b_k - i T a from a=1, b=0.

    Returns (a, b, norm drift, max |a| rise between coarse samples).
    """
    steps = max(int(math.ceil(t / dt)), 1)
    h = t / steps
    a = 1.0 + 0.0j
    b = np.zeros(energies.size, dtype=np.complex128)
    i_conj_t = -1j * amp_t.conjugate()
    i_t = -1j * amp_t
    i_eps = -1j * energies
    check_every = max(steps // 64, 1)
    prev_mag = 1.0
    max_rise = 0.0
    for step in range(steps):
        ka1 = i_conj_t * b.sum()
        kb1 = i_eps * b + i_t * a
        a2 = a + 0.5 * h * ka1
        b2 = b + 0.5 * h * kb1
        ka2 = i_conj_t * b2.sum()
        kb2 = i_eps * b2 + i_t * a2
        a3 = a + 0.5 * h * ka2
        b3 = b + 0.5 * h * kb2
        ka3 = i_conj_t * b3.sum()
        kb3 = i_eps * b3 + i_t * a3
        a4 = a + h * ka3
        b4 = b + h * kb3
        ka4 = i_conj_t * b4.sum()
        kb4 = i_eps * b4 + i_t * a4
        a = a + h * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4) / 6.0
        b = b + h * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4) / 6.0
        if (step + 1) % check_every == 0:
            mag = abs(a)
            if mag > prev_mag:
                max_rise = max(max_rise, mag - prev_mag)
            prev_mag = mag
    norm = abs(a) ** 2 + float(np.sum(np.abs(b) ** 2))
    return a, b, abs(norm - 1.0), max_rise


def solve_discretized_continuum(
    cfg: TunnelingConfig,
    disc: ContinuumDiscretization,
    t: float,
    norm_tol: float = 1e-8,
) -> TunnelingOdeResult:
    """Integrate both qubit-branch detector evolutions and extract observables.

    The branch-j tunneling amplitude is T_j = sqrt(Gamma_j / (2 pi D)) with D
    the discrete density of states; T_0 carries the phase e^{i phi1} so that
    arg(T0/T1) = phi1. Fidelities come from the surviving well amplitudes,
    f0 = |a0(t)|^2 and f1 = 1 - |a1(t)|^2, and the outcome-1 decoherence from
    the continuum overlap sum_k b0k conj(b1k) matched against the QND
    off-diagonal weight sqrt((1-f0) f1) e^{-d1} e^{i phi1}.
    """
    if t <= 0.0:
        raise ValueError("need t > 0")
    if cfg.g1t == 0.0:
        raise DegenerateModelError("no tunneling; nothing to integrate")
    gamma0 = cfg.g0t / t
    gamma1 = cfg.g1t / t
    disc.validate_for(gamma1, t)

    energies = np.linspace(
        -disc.bandwidth / 2.0, disc.bandwidth / 2.0, disc.levels
    )
    dos = disc.density_of_states
    t0 = math.sqrt(gamma0 / (2.0 * math.pi * dos)) * complex(
        math.cos(cfg.phi1), math.sin(cfg.phi1)
    )
    t1 = complex(math.sqrt(gamma1 / (2.0 * math.pi * dos)))

    a0, b0, drift0, rise0 = _propagate_branch(t0, energies, t, disc.dt)
    a1, b1, drift1, rise1 = _propagate_branch(t1, energies, t, disc.dt)

    drift = max(drift0, drift1)
    if drift > norm_tol:
        raise StepperAccuracyError(
            f"norm drift {drift:.3e} exceeds budget {norm_tol:.0e}; reduce dt"
        )
    if max(rise0, rise1) > 1e-9:
        raise DiscretizationError(
            "well amplitude rising: recurrence reached; refine the level grid"
        )

    f0 = abs(a0) ** 2
    f1 = 1.0 - abs(a1) ** 2
    overlap = complex(np.vdot(b1, b0))  # sum_k b0k * conj(b1k)
    weight = math.sqrt(max((1.0 - f0) * f1, 0.0))
    if weight == 0.0 or abs(overlap) == 0.0:
        d1: Optional[float] = None
        phi1: Optional[float] = None
    else:
        d1 = -math.log(abs(overlap) / weight)
        phi1 = math.atan2(overlap.imag, overlap.real)
    return TunnelingOdeResult(
        f0=f0, f1=f1, d1=d1, phi1=phi1, overlap=overlap,
        norm_drift=drift, discretization=disc,
    )
