"""Parameter sweeps, CSV emission with manifests, and the efficiency maximizer.

CSV bodies are deterministic: numbers are written with 17 significant digits
(round-trip exact for doubles), undefined metrics as the token ``nan``,
infinities as ``inf``/``-inf``, so reruns with the same spec are
byte-identical. Each CSV is accompanied by exactly one
``<name>.manifest.json`` recording the tool version, the fully resolved spec,
and a timestamp.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ._version import __version__
from .models import (
    IndirectProjectiveConfig,
    LinearDetectorConfig,
    PhaseQubitConfig,
    TunnelingConfig,
    indirect_projective_detector,
    linear_detector,
    linear_ensemble_eta,
    linear_fidelities,
    phase_qubit_detector,
    tunneling_detector,
)
from .qnd import QndDetector, d_min, efficiency_report

MODELS = ("linear", "tunneling", "phase_qubit", "indirect")

THREADS_ENV_VAR = "QNDEFF_THREADS"

#: Metric names a sweep may request. Values a model cannot provide (or that
#: are undefined for a given point) appear in the CSV as ``nan``.
METRIC_NAMES = (
    "f0", "f1", "one_minus_f0", "d0", "d1", "phi0", "phi1",
    "d_min", "d_av", "phi_av",
    "eta", "eta_tilde", "eta_tilde_tilde", "eta0", "eta1",
    "eta0_tilde", "eta1_tilde",
)


class SweepSpecError(ValueError):
    """Sweep specification is malformed."""


@dataclass(frozen=True)
class AxisSpec:
    """Swept parameter: either a (min, max, points, spacing) grid or an
    explicit value list (used by the presets)."""

    name: str
    lo: float = 0.0
    hi: float = 1.0
    points: int = 2
    spacing: str = "linear"
    values: Optional[tuple[float, ...]] = None

    def grid(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.points < 2:
            raise SweepSpecError("axis needs at least 2 grid points")
        if self.spacing == "linear":
            return np.linspace(self.lo, self.hi, self.points)
        if self.spacing == "log":
            if self.lo <= 0.0 or self.hi <= 0.0:
                raise SweepSpecError("log axis needs positive endpoints")
            return np.geomspace(self.lo, self.hi, self.points)
        raise SweepSpecError(f"unknown spacing {self.spacing!r}")

    def to_json_dict(self) -> dict:
        if self.values is not None:
            return {"name": self.name, "values": list(self.values)}
        return {
            "name": self.name, "min": self.lo, "max": self.hi,
            "points": self.points, "spacing": self.spacing,
        }


@dataclass(frozen=True)
class SweepSpec:
    model: str
    fixed: dict
    axis: AxisSpec
    outputs: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise SweepSpecError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.axis.name in self.fixed:
            raise SweepSpecError(f"axis parameter {self.axis.name!r} also in fixed")
        if not self.outputs:
            raise SweepSpecError("no output metrics requested")
        for metric in self.outputs:
            if metric not in METRIC_NAMES:
                raise SweepSpecError(
                    f"unknown metric {metric!r}; choose from {METRIC_NAMES}"
                )

    @classmethod
    def from_json_dict(cls, data: dict) -> "SweepSpec":
        try:
            ax = data["axis"]
            if "values" in ax:
                axis = AxisSpec(
                    name=ax["name"], values=tuple(float(v) for v in ax["values"])
                )
            else:
                axis = AxisSpec(
                    name=ax["name"], lo=float(ax["min"]), hi=float(ax["max"]),
                    points=int(ax["points"]), spacing=ax.get("spacing", "linear"),
                )
            return cls(
                model=data["model"],
                fixed={k: float(v) for k, v in data.get("fixed", {}).items()},
                axis=axis,
                outputs=tuple(data["outputs"]),
            )
        except KeyError as exc:
            raise SweepSpecError(f"missing sweep field: {exc}") from exc

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "fixed": dict(self.fixed),
            "axis": self.axis.to_json_dict(),
            "outputs": list(self.outputs),
        }


# ---------------------------------------------------------------------------
# metric evaluation
# ---------------------------------------------------------------------------

def resolve_tunneling(params: dict) -> TunnelingConfig:
    """Accept (g0t, g1t) directly or (ratio, f1 | g1t): f1 fixes
    g1t = -ln(1 - f1) and ratio = Gamma1/Gamma0 fixes g0t = g1t / ratio."""
    phi1 = params.get("phi1", 0.0)
    if "g0t" in params and "g1t" in params:
        return TunnelingConfig(g0t=params["g0t"], g1t=params["g1t"], phi1=phi1)
    ratio = params.get("ratio")
    if ratio is None or ratio <= 0.0:
        raise SweepSpecError("tunneling model needs (g0t, g1t) or positive ratio")
    if "f1" in params:
        g1t = -math.log1p(-params["f1"])
    elif "g1t" in params:
        g1t = params["g1t"]
    else:
        raise SweepSpecError("tunneling ratio form needs f1 or g1t")
    return TunnelingConfig(g0t=g1t / ratio, g1t=g1t, phi1=phi1)


def build_detector(model: str, params: dict) -> QndDetector:
    """Resolve a parameter map to a detector for any of the four models."""
    if model == "linear":
        return linear_detector(LinearDetectorConfig(
            s=params["s"], r_th=params["r_th"],
            gamma_t=params.get("gamma_t", 0.0), kappa=params.get("kappa", 0.0),
        ))
    if model == "tunneling":
        return tunneling_detector(resolve_tunneling(params))
    if model == "phase_qubit":
        return phase_qubit_detector(PhaseQubitConfig(
            p=params["p"], p0=params.get("p0", 0.0), phi0=params.get("phi0", 0.0),
        ))
    if model == "indirect":
        amps = [complex(re, im) for re, im in params["c"]]
        return indirect_projective_detector(IndirectProjectiveConfig(*amps))
    raise SweepSpecError(f"unknown model {model!r}")


def metric_map(model: str, params: dict) -> dict[str, float]:
    """All available metrics for one model point; missing/undefined -> nan."""
    values = {name: math.nan for name in METRIC_NAMES}

    def fill_detector(det: QndDetector) -> None:
        values.update(
            f0=det.f0, f1=det.f1, one_minus_f0=1.0 - det.f0,
            d0=det.d0, d1=det.d1, phi0=det.phi0, phi1=det.phi1,
        )
        report = efficiency_report(det)
        for name in ("d_min", "d_av", "phi_av", *report.METRIC_NAMES):
            value = getattr(report, name)
            if value is not None:
                values[name] = value

    if model == "linear" and params.get("kappa", 0.0) != 0.0:
        # outcome-resolved decoherence has no closed form here: only the
        # fidelity-level and ensemble-level metrics are available
        cfg = LinearDetectorConfig(
            s=params["s"], r_th=params["r_th"],
            gamma_t=params.get("gamma_t", 0.0), kappa=params["kappa"],
        )
        f0, f1 = linear_fidelities(cfg)
        eta, eta_tilde = linear_ensemble_eta(cfg)
        values.update(f0=f0, f1=f1, one_minus_f0=1.0 - f0, d_min=d_min(f0, f1))
        values["eta"] = math.nan if eta is None else eta
        values["eta_tilde"] = math.nan if eta_tilde is None else eta_tilde
        return values

    fill_detector(build_detector(model, params))
    return values


def _evaluate_point(spec: SweepSpec, axis_value: float) -> list[float]:
    params = dict(spec.fixed)
    params[spec.axis.name] = float(axis_value)
    values = metric_map(spec.model, params)
    return [values[name] for name in spec.outputs]


def default_thread_count() -> int:
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            return max(int(env), 1)
        except ValueError:
            raise SweepSpecError(f"{THREADS_ENV_VAR}={env!r} is not an integer")
    return min(os.cpu_count() or 1, 4)


def format_value(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def manifest_path_for(csv_path: Path) -> Path:
    name = csv_path.name
    stem = name[:-4] if name.endswith(".csv") else name
    return csv_path.parent / f"{stem}.manifest.json"


def run_sweep(
    spec: SweepSpec, out_csv: Path | str, threads: Optional[int] = None
) -> dict:
    """Evaluate the sweep, write the CSV and its manifest, return the manifest."""
    out_csv = Path(out_csv)
    grid = spec.axis.grid()
    workers = threads if threads is not None else default_thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda v: _evaluate_point(spec, v), grid))
    else:
        rows = [_evaluate_point(spec, v) for v in grid]

    lines = [",".join([spec.axis.name, *spec.outputs])]
    for value, row in zip(grid, rows):
        lines.append(",".join([format_value(float(value)), *map(format_value, row)]))
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    out_csv.write_text("\n".join(lines) + "\n")

    manifest = {
        "tool": "qndeff",
        "version": __version__,
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "csv": out_csv.name,
        "rows": len(rows),
        "spec": spec.to_json_dict(),
        "seeds": None,
        "oracle_error_bounds": {},
    }
    manifest_path_for(out_csv).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


# ---------------------------------------------------------------------------
# presets reproducing the reference curves
# ---------------------------------------------------------------------------

def _fig4_grid() -> tuple[float, ...]:
    # log-spaced f1 from 1e-3 to 0.999 with the f1 = 0.5 row pinned exactly,
    # so cross-ratio comparisons at fixed f1 read exact grid rows
    base = [float(v) for v in np.geomspace(1e-3, 0.999, 120)]
    return tuple(sorted(set(base) | {0.5}))


def preset_sweeps(name: str) -> list[tuple[str, SweepSpec]]:
    """Named preset: list of (file stem, spec) pairs.

    fig1: thresholded ideal linear detector, eta0 and eta against r_th for
    measurement strengths 0.1, 1, 2. fig4: tunneling detector, decoherences
    and efficiencies against f1 for rate ratios 1.5, 3, 100.
    """
    if name == "fig1":
        return [
            (
                f"fig1_s{s:g}",
                SweepSpec(
                    model="linear",
                    fixed={"s": s, "gamma_t": 0.0, "kappa": 0.0},
                    axis=AxisSpec(name="r_th", lo=-3.0, hi=3.0, points=241),
                    outputs=("eta0", "eta"),
                ),
            )
            for s in (0.1, 1.0, 2.0)
        ]
    if name == "fig4":
        return [
            (
                f"fig4_r{ratio:g}",
                SweepSpec(
                    model="tunneling",
                    fixed={"ratio": ratio, "phi1": 0.0},
                    axis=AxisSpec(name="f1", values=_fig4_grid()),
                    outputs=("d1", "d_min", "eta1", "eta", "eta0", "one_minus_f0"),
                ),
            )
            for ratio in (1.5, 3.0, 100.0)
        ]
    raise SweepSpecError(f"unknown preset {name!r}; choose fig1 or fig4")


# ---------------------------------------------------------------------------
# maximizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaximizeResult:
    s: float
    r_th: float
    value: float
    resolution: float

    def to_json_dict(self) -> dict:
        return {"s": self.s, "r_th": self.r_th, "value": self.value,
                "resolution": self.resolution}


def _linear_metric(metric: str, s: float, r_th: float) -> float:
    cfg = LinearDetectorConfig(s=s, r_th=r_th)
    if metric == "eta0":
        report = efficiency_report(linear_detector(cfg))
        return -math.inf if report.eta0 is None else report.eta0
    if metric == "eta":
        eta, _ = linear_ensemble_eta(cfg)
        return -math.inf if eta is None else eta
    raise SweepSpecError(f"unknown maximize metric {metric!r}; choose eta0 or eta")


def maximize_linear(
    metric: str = "eta0",
    s_bounds: tuple[float, float] = (0.01, 3.0),
    rth_bounds: tuple[float, float] = (-4.0, 4.0),
) -> MaximizeResult:
    """Grid search plus local refinement over (s, r_th) on a bounded domain.

    Four zoom rounds (factor 5 each) around the running best, clamped to the
    bounds; the reported resolution is the larger final grid step.
    """
    s_lo, s_hi = s_bounds
    r_lo, r_hi = rth_bounds
    if not (0.0 <= s_lo <= s_hi) or not (r_lo <= r_hi):
        raise SweepSpecError("invalid search bounds")

    def grid(lo: float, hi: float, n: int) -> np.ndarray:
        return np.array([lo]) if lo == hi else np.linspace(lo, hi, n)

    def scan(s_grid: np.ndarray, r_grid: np.ndarray, best):
        for s in s_grid:
            for r in r_grid:
                v = _linear_metric(metric, float(s), float(r))
                if v > best[0]:
                    best = (v, float(s), float(r))
        return best

    best = scan(grid(s_lo, s_hi, 31), grid(r_lo, r_hi, 81), (-math.inf, s_lo, r_lo))
    s_step = (s_hi - s_lo) / 30.0
    r_step = (r_hi - r_lo) / 80.0
    for _ in range(4):
        s_step /= 5.0
        r_step /= 5.0
        _, s0, r0 = best
        s_grid = grid(max(s_lo, s0 - 5 * s_step), min(s_hi, s0 + 5 * s_step), 11) \
            if s_step > 0.0 else np.array([s0])
        r_grid = grid(max(r_lo, r0 - 5 * r_step), min(r_hi, r0 + 5 * r_step), 11) \
            if r_step > 0.0 else np.array([r0])
        best = scan(s_grid, r_grid, best)

    value, s_best, r_best = best
    return MaximizeResult(s=s_best, r_th=r_best, value=value,
                          resolution=max(s_step, r_step))
