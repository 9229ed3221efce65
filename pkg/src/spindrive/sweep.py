"""Parameter-sweep engine: 2-D spectra over (w_RF, MW detuning).

Each grid cell averages the configured observable over `phases`
uniformly spaced RF phases. Cells are independent work items written to
preallocated slots by index, so spectra are deterministic and
bit-identical regardless of evaluation order or thread count.

Lab-frame sweeps pick one of the three drive geometries; the MW axis is
always expressed as a detuning delta = Delta - w_MW from the static
splitting. RWA sweeps use the fixed geometry of the rotating-frame
model (transverse MW, longitudinal RF).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from . import _kernels, __version__
from .dynamics import SimConfig, SimulationError
from .units import TWO_PI, to_mhz

__all__ = [
    "GEOMETRIES",
    "GridSpec",
    "SpectrumGrid",
    "GridComparison",
    "compute_spectrum",
    "normalize_rows",
    "compare_grids",
    "write_spectrum_csv",
    "read_spectrum_csv",
]

GEOMETRIES = ("mw_x_rf_z", "mw_z_rf_x", "mw_x_rf_x")

Frame = Literal["lab", "rwa"]


def _check_axis(name: str, axis: np.ndarray) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or len(axis) == 0:
        raise ValueError(f"{name} must be a nonempty 1-D array")
    if len(axis) > 1:
        d = np.diff(axis)
        if np.any(d <= 0):
            raise ValueError(f"{name} must be strictly increasing")
        if (d.max() - d.min()) > 1e-9 * abs(d[0]):
            raise ValueError(f"{name} must be uniform")
    return axis


@dataclass(frozen=True)
class GridSpec:
    """Sweep definition. Axes in rad/us; mw_axis holds detuning values
    delta = Delta - w_MW (for lab-frame runs the absolute MW carrier is
    delta_static - delta)."""

    rf_axis: np.ndarray
    mw_axis: np.ndarray
    rabi_mw: float
    mod_rf: float
    frame: Frame = "rwa"
    geometry: Optional[str] = None
    phases: int = 16
    sim: SimConfig = field(default_factory=SimConfig)
    delta_static: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "rf_axis", _check_axis("rf_axis", self.rf_axis))
        object.__setattr__(self, "mw_axis", _check_axis("mw_axis", self.mw_axis))
        if self.phases < 1:
            raise ValueError("phases must be >= 1")
        if self.frame not in ("lab", "rwa"):
            raise ValueError(f"unknown frame {self.frame!r}")
        if self.frame == "lab":
            if self.geometry not in GEOMETRIES:
                raise ValueError(
                    f"lab frame requires geometry in {GEOMETRIES}, "
                    f"got {self.geometry!r}")
            if self.delta_static is None:
                raise ValueError("lab frame requires delta_static")
        if self.rabi_mw < 0 or self.mod_rf < 0:
            raise ValueError("amplitudes must be >= 0")


@dataclass(frozen=True)
class SpectrumGrid:
    rf_axis: np.ndarray
    mw_axis: np.ndarray
    signal: np.ndarray  # shape (len(rf_axis), len(mw_axis))
    normalization: Literal["raw", "row_mean"] = "raw"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.signal.shape != (len(self.rf_axis), len(self.mw_axis)):
            raise ValueError("signal shape does not match axes")


def _geometry_vectors(geometry: str, rabi_mw: float, mod_rf: float):
    if geometry == "mw_x_rf_z":
        return (rabi_mw, 0.0, 0.0), (0.0, 0.0, mod_rf)
    if geometry == "mw_z_rf_x":
        return (0.0, 0.0, rabi_mw), (mod_rf, 0.0, 0.0)
    if geometry == "mw_x_rf_x":
        return (rabi_mw, 0.0, 0.0), (mod_rf, 0.0, 0.0)
    raise ValueError(f"unknown geometry {geometry!r}")


def compute_spectrum(spec: GridSpec) -> SpectrumGrid:
    """Evaluate the sweep; returns a raw (unnormalized) SpectrumGrid."""
    t_start = time.time()
    nrf = len(spec.rf_axis)
    nmw = len(spec.mw_axis)
    nph = spec.phases
    phases = np.arange(nph) * (TWO_PI / nph)
    sim = spec.sim
    nsteps = sim.nsteps

    # flatten (rf, mw, phase) into one batch of independent cells
    rf = np.repeat(spec.rf_axis, nmw * nph)
    mw = np.tile(np.repeat(spec.mw_axis, nph), nrf)
    ph = np.tile(phases, nrf * nmw)

    try:
        if spec.frame == "rwa":
            if sim.dephasing_rate > 0:
                mean, endp = _kernels.rwa_bloch_batch(
                    mw, spec.rabi_mw, spec.mod_rf, rf, ph,
                    sim.dephasing_rate, sim.dt, nsteps)
            else:
                mean, endp, _ = _kernels.rwa_schrodinger_batch(
                    mw, spec.rabi_mw, spec.mod_rf, rf, ph, sim.dt, nsteps)
        else:
            if sim.dephasing_rate > 0:
                raise SimulationError(
                    "dephasing is supported only for rwa-frame sweeps")
            mw_amp, rf_amp = _geometry_vectors(
                spec.geometry, spec.rabi_mw, spec.mod_rf)
            mw_carrier = spec.delta_static - mw
            if np.any(mw_carrier < 0):
                raise SimulationError("mw carrier went negative; "
                                      "delta_static too small for mw_axis")
            mean, endp, _ = _kernels.lab_schrodinger_batch(
                spec.delta_static, np.array(mw_amp), mw_carrier,
                np.array(rf_amp), rf, ph, sim.dt, nsteps)
    except SimulationError:
        raise
    except Exception as exc:  # attach sweep context to integrator errors
        raise SimulationError(f"sweep evaluation failed: {exc}") from exc

    vals = mean if sim.observable_mode == "time_average" else endp
    signal = vals.reshape(nrf, nmw, nph).mean(axis=2)

    meta = {
        "engine_version": __version__,
        "frame": spec.frame,
        "geometry": spec.geometry or "",
        "phases": nph,
        "rabi_mw_mhz": to_mhz(spec.rabi_mw),
        "mod_rf_mhz": to_mhz(spec.mod_rf),
        "delta_static_mhz": to_mhz(spec.delta_static) if spec.delta_static else 0.0,
        "dt_us": sim.dt,
        "t_total_us": sim.t_total,
        "observable": sim.observable_mode,
        "dephasing_mhz": to_mhz(sim.dephasing_rate),
        "wall_time_s": round(time.time() - t_start, 3),
    }
    return SpectrumGrid(rf_axis=spec.rf_axis, mw_axis=spec.mw_axis,
                        signal=signal, normalization="raw", meta=meta)


def normalize_rows(grid: SpectrumGrid) -> SpectrumGrid:
    """Divide each constant-w_RF row by its mean (the experimental
    per-sweep normalization). Idempotent."""
    means = grid.signal.mean(axis=1)
    if np.any(means == 0):
        bad = int(np.argmax(means == 0))
        raise ValueError(f"row {bad} has zero mean; cannot normalize")
    return replace(grid, signal=grid.signal / means[:, None],
                   normalization="row_mean")


@dataclass(frozen=True)
class GridComparison:
    max_abs: float
    mean_abs: float
    worst_rf: float
    worst_mw: float
    worst_index: tuple[int, int]
    tol: float
    passed: bool


def compare_grids(a: SpectrumGrid, b: SpectrumGrid,
                  tol: float) -> GridComparison:
    """Absolute comparison for golden-file regression."""
    if (len(a.rf_axis) != len(b.rf_axis) or len(a.mw_axis) != len(b.mw_axis)
            or not np.array_equal(a.rf_axis, b.rf_axis)
            or not np.array_equal(a.mw_axis, b.mw_axis)):
        raise ValueError("grids have mismatched axes")
    diff = np.abs(a.signal - b.signal)
    i, j = np.unravel_index(np.argmax(diff), diff.shape)
    mx = float(diff[i, j])
    return GridComparison(
        max_abs=mx,
        mean_abs=float(diff.mean()),
        worst_rf=float(a.rf_axis[i]),
        worst_mw=float(a.mw_axis[j]),
        worst_index=(int(i), int(j)),
        tol=tol,
        passed=mx <= tol,
    )


def write_spectrum_csv(grid: SpectrumGrid, path) -> None:
    r"""CSV matrix: first row MW-axis values (MHz), first column RF-axis
    values (MHz), corner cell the literal `rf\mw`; 17 significant
    digits. A sidecar `<path>.meta` carries flat key = value metadata."""
    with open(path, "w", newline="") as f:
        f.write("rf\\mw," + ",".join("%.17g" % to_mhz(v)
                                     for v in grid.mw_axis) + "\n")
        for i, rf in enumerate(grid.rf_axis):
            f.write("%.17g," % to_mhz(rf)
                    + ",".join("%.17g" % v for v in grid.signal[i]) + "\n")
    with open(str(path) + ".meta", "w", newline="") as f:
        f.write("# spectrum metadata\n")
        f.write(f"normalization = {grid.normalization}\n")
        for k, v in grid.meta.items():
            f.write(f"{k} = {v}\n")


def read_spectrum_csv(path) -> SpectrumGrid:
    """Read a spectrum written by write_spectrum_csv (axes back to rad/us)."""
    with open(path, newline="") as f:
        header = f.readline().strip().split(",")
        if header[0] != "rf\\mw":
            raise ValueError(f"{path}: not a spectrum CSV (bad corner cell)")
        mw_axis = np.array([float(v) for v in header[1:]]) * TWO_PI
        rf_vals = []
        rows = []
        for line in f:
            parts = line.strip().split(",")
            rf_vals.append(float(parts[0]))
            rows.append([float(v) for v in parts[1:]])
    return SpectrumGrid(rf_axis=np.array(rf_vals) * TWO_PI, mw_axis=mw_axis,
                        signal=np.array(rows))
