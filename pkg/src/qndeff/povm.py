"""General two-outcome measurement channels as linear superoperators.

Each outcome branch is a linear map on 2x2 operators, stored as a 4x4 complex
matrix acting on row-major vectorized operators: vec(rho) = (rho00, rho01,
rho10, rho11). In this convention

  * completeness Tr S0[rho] + Tr S1[rho] = Tr rho for all rho is the single
    linear condition u (S0 + S1) = u with u = (1, 0, 0, 1);
  * complete positivity of a map S is positive semidefiniteness of its Choi
    matrix C[(a,m),(b,n)] = S[(m,n),(a,b)], obtained by reshuffling;
  * Hermiticity preservation is Hermiticity of the Choi matrix.

QND detectors embed as diagonal superoperator pairs (:func:`from_qnd`), and
:func:`extract_qnd` inverts the embedding for channels that preserve both
basis-state populations.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .qnd import (
    INF,
    ImpossibleOutcomeError,
    OutcomeResult,
    QndDetector,
    UndefinedAverageError,
)
from .states import QubitState

STRUCTURAL_TOL = 1e-10
EXTRACTION_TOL = 1e-8

_TRACE_ROW = np.array([1.0, 0.0, 0.0, 1.0])


class InvalidChannelError(ValueError):
    """Superoperator pair violates completeness, CP, or Hermiticity preservation."""


def _as_map(mat) -> np.ndarray:
    arr = np.asarray(mat, dtype=complex)
    if arr.shape != (4, 4):
        raise InvalidChannelError(f"superoperator must be 4x4, got shape {arr.shape}")
    return arr


def choi_matrix(action: np.ndarray) -> np.ndarray:
    """Choi matrix of a 4x4 action matrix (row-major vec convention)."""
    return np.ascontiguousarray(
        action.reshape(2, 2, 2, 2).transpose(2, 0, 3, 1).reshape(4, 4)
    )


@dataclass(frozen=True)
class BinarySuperoperator:
    """Pair of outcome maps (map0, map1) forming one binary measurement."""

    map0: np.ndarray
    map1: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "map0", _as_map(self.map0))
        object.__setattr__(self, "map1", _as_map(self.map1))

    def choi(self, outcome: int) -> np.ndarray:
        return choi_matrix(self.map0 if outcome == 0 else self.map1)

    def hermiticity_residual(self) -> float:
        return max(
            float(np.max(np.abs(c - c.conj().T))) for c in (self.choi(0), self.choi(1))
        )

    def min_choi_eigenvalue(self) -> float:
        out = INF
        for outcome in (0, 1):
            c = self.choi(outcome)
            herm = (c + c.conj().T) / 2.0
            out = min(out, float(np.linalg.eigvalsh(herm)[0]))
        return out

    def completeness_residual(self) -> float:
        return float(np.max(np.abs(_TRACE_ROW @ (self.map0 + self.map1) - _TRACE_ROW)))

    def validate(self, tol: float = STRUCTURAL_TOL) -> None:
        if self.hermiticity_residual() > tol:
            raise InvalidChannelError(
                f"maps are not Hermiticity-preserving (residual {self.hermiticity_residual():.3e})"
            )
        if self.min_choi_eigenvalue() < -tol:
            raise InvalidChannelError(
                f"maps are not completely positive (min Choi eigenvalue "
                f"{self.min_choi_eigenvalue():.3e})"
            )
        ok, residual = check_completeness(self, tol)
        if not ok:
            raise InvalidChannelError(f"completeness violated (residual {residual:.3e})")

    def to_json_dict(self) -> dict:
        def enc(m: np.ndarray) -> list:
            return [[float(z.real), float(z.imag)] for z in m.ravel()]

        return {"map0": enc(self.map0), "map1": enc(self.map1)}

    @classmethod
    def from_json_dict(cls, data: dict) -> "BinarySuperoperator":
        def dec(entries) -> np.ndarray:
            if len(entries) != 16:
                raise InvalidChannelError("each map needs 16 (re, im) entries")
            return np.array([complex(re, im) for re, im in entries]).reshape(4, 4)

        return cls(dec(data["map0"]), dec(data["map1"]))


def check_completeness(
    sup: BinarySuperoperator, tol: float = STRUCTURAL_TOL
) -> tuple[bool, float]:
    """Whether Tr S0[rho] + Tr S1[rho] = Tr rho for all rho, plus max residual."""
    residual = sup.completeness_residual()
    return residual <= tol, residual


def apply(sup: BinarySuperoperator, state: QubitState, outcome: int) -> OutcomeResult:
    """Apply one outcome branch: probability Tr S[rho], post-state S[rho]/P."""
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    sup.validate()
    action = sup.map0 if outcome == 0 else sup.map1
    vec = np.array([state.rho00, state.rho01, state.rho01.conjugate(), state.rho11])
    out = action @ vec
    p = float((out[0] + out[3]).real)
    if p <= 0.0:
        raise ImpossibleOutcomeError(f"outcome {outcome} has probability {p!r}")
    rho00 = float(out[0].real) / p
    rho01 = complex(out[1] + out[2].conjugate()) / (2.0 * p)  # symmetrize dust
    return OutcomeResult(outcome, p, QubitState(min(max(rho00, 0.0), 1.0), rho01))


def from_qnd(det: QndDetector) -> BinarySuperoperator:
    """Embed a (non-destructive) QND detector as a diagonal superoperator pair.

    Infinite d_i maps to an off-diagonal factor of exactly zero.
    """
    if det.destroys_on_1:
        raise UndefinedAverageError(
            "destructive detector has no outcome-1 superoperator"
        )
    c0 = det.coherence_factor(0)
    c1 = det.coherence_factor(1)
    map0 = np.diag([det.f0 + 0j, c0, c0.conjugate(), 1.0 - det.f1])
    map1 = np.diag([1.0 - det.f0 + 0j, c1, c1.conjugate(), det.f1])
    return BinarySuperoperator(map0, map1)


def extract_qnd(
    sup: BinarySuperoperator, tol: float = EXTRACTION_TOL
) -> Optional[QndDetector]:
    """Recover QND parameters from a channel, or None if it is not QND.

    The channel is QND iff both outcome maps send |0><0| to a multiple of
    |0><0| and |1><1| to a multiple of |1><1| (population preservation); the
    fidelities are then the outcome probabilities on the basis states and
    (d_i, phi_i) come from the complex off-diagonal gain c_i = <0|S_i[|0><1|]|1>
    via c_i = gain_i * exp(-d_i) * exp(i phi_i). A zero gain is reported as
    d = +inf, phi = 0. Raises InvalidChannelError when |c_i| exceeds the CP
    bound sqrt(f0(1-f1)) (resp. sqrt((1-f0) f1)) beyond tol.
    """
    sup.validate()
    for action in (sup.map0, sup.map1):
        # columns 0 and 3 are the images of |0><0| and |1><1|
        if np.max(np.abs(action[1:4, 0])) > tol or np.max(np.abs(action[0:3, 3])) > tol:
            return None

    f0 = float((sup.map0[0, 0] + sup.map0[3, 0]).real)
    f1 = float((sup.map1[0, 3] + sup.map1[3, 3]).real)
    f0 = min(max(f0, 0.0), 1.0)
    f1 = min(max(f1, 0.0), 1.0)

    def polar(c: complex, gain: float, tag: str) -> tuple[float, float]:
        mag = abs(c)
        if mag <= tol:
            return INF, 0.0
        if mag > gain * (1.0 + tol) + tol:
            raise InvalidChannelError(
                f"off-diagonal gain |c{tag}| = {mag:.6e} exceeds CP bound {gain:.6e}"
            )
        d = max(-math.log(mag / gain), 0.0)
        return d, cmath.phase(c)

    d0, phi0 = polar(complex(sup.map0[1, 1]), math.sqrt(f0 * (1.0 - f1)), "0")
    d1, phi1 = polar(complex(sup.map1[1, 1]), math.sqrt((1.0 - f0) * f1), "1")
    return QndDetector(f0=f0, f1=f1, phi0=phi0, phi1=phi1, d0=d0, d1=d1)
