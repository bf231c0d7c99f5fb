"""Qubit pure states and density matrices.

A single-qubit density matrix is stored as the pair (rho00, rho01): the trace
condition rho11 = 1 - rho00 and Hermiticity rho10 = conj(rho01) are structural,
so only positivity |rho01|^2 <= rho00*rho11 needs checking. Constructors reject
invalid input rather than clamping it, so that numerical bugs upstream surface
as errors instead of being silently absorbed.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

VALIDATION_TOL = 1e-12


class StateValidationError(ValueError):
    """Input violates a state invariant (normalization, trace, positivity)."""


@dataclass(frozen=True)
class PureState:
    """Pure qubit state amp0|0> + amp1|1>, normalized to 1 within 1e-12."""

    amp0: complex
    amp1: complex

    def __post_init__(self) -> None:
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > VALIDATION_TOL:
            raise StateValidationError(
                f"pure state not normalized: |amp0|^2 + |amp1|^2 = {norm!r}"
            )

    @staticmethod
    def equal_superposition() -> "PureState":
        r = 1.0 / 2**0.5
        return PureState(complex(r), complex(r))


@dataclass(frozen=True)
class QubitState:
    """Qubit density matrix with rho11 and rho10 derived from (rho00, rho01).

    Invariants enforced on construction:
      * 0 <= rho00 <= 1 (within 1e-12),
      * |rho01|^2 <= rho00 * rho11 (within 1e-12).
    Trace 1 and Hermiticity hold by construction. Instances are immutable and
    safe to share across threads.
    """

    rho00: float
    rho01: complex = 0j

    def __post_init__(self) -> None:
        if not (-VALIDATION_TOL <= self.rho00 <= 1.0 + VALIDATION_TOL):
            raise StateValidationError(f"rho00 = {self.rho00!r} outside [0, 1]")
        defect = self.rho00 * (1.0 - self.rho00) - abs(self.rho01) ** 2
        if defect < -VALIDATION_TOL:
            raise StateValidationError(
                f"state not positive: rho00*rho11 - |rho01|^2 = {defect!r}"
            )

    @property
    def rho11(self) -> float:
        return 1.0 - self.rho00

    @property
    def rho10(self) -> complex:
        return self.rho01.conjugate()

    @classmethod
    def from_pure(cls, state: PureState) -> "QubitState":
        """Density matrix of a pure state: rho00 = |amp0|^2, rho01 = amp0*conj(amp1)."""
        return cls(abs(state.amp0) ** 2, state.amp0 * state.amp1.conjugate())

    def purity_defect(self) -> float:
        """det(rho) = rho00*rho11 - |rho01|^2; >= 0, and 0 iff the state is pure."""
        return self.rho00 * self.rho11 - abs(self.rho01) ** 2

    def bloch_phase(self) -> float:
        """arg(rho01); 0 for a coherence-free state."""
        return cmath.phase(self.rho01)

    def to_json_dict(self) -> dict:
        return {
            "rho00": self.rho00,
            "rho01_re": self.rho01.real,
            "rho01_im": self.rho01.imag,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "QubitState":
        try:
            return cls(float(data["rho00"]),
                       complex(float(data["rho01_re"]), float(data["rho01_im"])))
        except KeyError as exc:
            raise StateValidationError(f"missing state field: {exc}") from exc


#: Convenience states; the equal superposition uses the exact dyadic entries.
GROUND = QubitState(1.0)
EXCITED = QubitState(0.0)
EQUAL_SUPERPOSITION = QubitState(0.5, 0.5 + 0j)
