"""Time-domain propagation and observable extraction.

Fixed-step classical RK4 throughout (no adaptive stepping), so results
are bit-reproducible across runs and thread counts. Defaults follow the
standard recipe: dt = 1e-4 us, t_total = 100 us, spin initially in
index 0 (m_s = 0). Norm is never renormalized during Schrodinger
evolution; the drift is a diagnostic carried on the trajectory.

Open-system evolution integrates the Bloch equations

    dr/dt = b(t) x r - Gamma2 (r_x, r_y, 0),

with b(t) = (Omega_MW, 0, delta + 2*Omega_RF*cos(w_RF t + phi)) the
instantaneous effective-field vector of the rotating-frame model.
Pure dephasing only; r_z has no decay term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Union

import numpy as np

from . import _kernels
from .model import (HermitianOp2, RwaModel, TwoLevelModel,
                    build_lab_hamiltonian, build_rwa_hamiltonian)

__all__ = [
    "SpinState",
    "BlochState",
    "SimConfig",
    "Trajectory",
    "SimulationError",
    "NoOscillationError",
    "evolve_schrodinger",
    "evolve_bloch",
    "observable",
    "fit_nutation_frequency",
    "write_trajectory_csv",
]

ObservableMode = Literal["time_average", "endpoint"]


class SimulationError(RuntimeError):
    """Raised when a propagation request is invalid or fails."""


class NoOscillationError(SimulationError):
    """fit_nutation_frequency found no spectral peak above the leakage floor."""


@dataclass(frozen=True)
class SpinState:
    """Pure state (c0, c1) in the {index 0, index 1} basis."""

    c0: complex
    c1: complex

    def __post_init__(self):
        n = abs(self.c0) ** 2 + abs(self.c1) ** 2
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"state norm^2 = {n} deviates from 1 by > 1e-9")

    @classmethod
    def ground(cls) -> "SpinState":
        """The optically polarized initial state m_s = 0 (index 0)."""
        return cls(1.0 + 0.0j, 0.0j)

    @property
    def p0(self) -> float:
        return abs(self.c0) ** 2


@dataclass(frozen=True)
class BlochState:
    """Real Bloch vector; population in index 0 is (1 + r_z)/2."""

    rx: float
    ry: float
    rz: float

    def __post_init__(self):
        r = math.sqrt(self.rx ** 2 + self.ry ** 2 + self.rz ** 2)
        if r > 1.0 + 1e-9:
            raise ValueError(f"|r| = {r} exceeds the Bloch ball")

    @classmethod
    def ground(cls) -> "BlochState":
        return cls(0.0, 0.0, 1.0)

    @property
    def p0(self) -> float:
        return 0.5 * (1.0 + self.rz)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-4
    t_total: float = 100.0
    record_stride: int = 100
    observable_mode: ObservableMode = "time_average"
    dephasing_rate: float = 0.0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not (self.t_total >= self.dt):
            raise ValueError("t_total must be >= dt")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.observable_mode not in ("time_average", "endpoint"):
            raise ValueError(f"unknown observable_mode {self.observable_mode!r}")
        if self.dephasing_rate < 0:
            raise ValueError("dephasing_rate must be >= 0")

    @property
    def nsteps(self) -> int:
        return max(1, round(self.t_total / self.dt))


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples of one evolution.

    mean_p0 is the trapezoidal time average of the index-0 population
    over every integration step (not just recorded samples);
    final_norm is the unrenormalized norm^2 at the end (diagnostic,
    1.0 exactly for Bloch evolutions).
    """

    t: np.ndarray
    p0: np.ndarray
    mean_p0: float
    final_norm: float = 1.0
    states: Optional[np.ndarray] = None   # (n, 2) complex amplitudes
    bloch: Optional[np.ndarray] = None    # (n, 3) Bloch vectors

    def __post_init__(self):
        if len(self.t) == 0:
            raise ValueError("trajectory must contain at least one sample")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("trajectory timestamps must be strictly increasing")
        if np.any(self.p0 < -1e-9) or np.any(self.p0 > 1 + 1e-9):
            raise ValueError("populations outside [0, 1] beyond tolerance")


def _record_times(nsteps: int, stride: int, dt: float) -> np.ndarray:
    ks = list(range(0, nsteps + 1, stride))
    if ks[-1] != nsteps:
        ks.append(nsteps)
    return np.array(ks, dtype=float) * dt


HamiltonianSource = Union[RwaModel, TwoLevelModel,
                          Callable[[float], HermitianOp2]]


def evolve_schrodinger(hamiltonian: HamiltonianSource, psi0: SpinState,
                       cfg: SimConfig) -> Trajectory:
    """Propagate i dpsi/dt = H(t) psi with fixed-step RK4.

    `hamiltonian` may be an RwaModel, a TwoLevelModel, or any callable
    t -> HermitianOp2 (the callable path trades speed for generality).
    """
    if cfg.dephasing_rate != 0.0:
        raise SimulationError(
            "evolve_schrodinger is the pure-state path; "
            "use evolve_bloch for dephasing_rate > 0")
    nsteps = cfg.nsteps
    psi_init = np.array([psi0.c0.real, psi0.c0.imag,
                         psi0.c1.real, psi0.c1.imag])
    if isinstance(hamiltonian, RwaModel):
        m = hamiltonian
        p_rec, psi_rec, mean, norm = _kernels.rwa_schrodinger_traj(
            m.detuning, m.rabi_mw, m.mod_rf, m.omega_rf, m.phase_rf,
            psi_init, cfg.dt, nsteps, cfg.record_stride)
    elif isinstance(hamiltonian, TwoLevelModel):
        mdl = hamiltonian
        nd = max(len(mdl.drives), 1)
        amp = np.zeros((nd, 3))
        carrier = np.zeros(nd)
        phase = np.zeros(nd)
        for i, d in enumerate(mdl.drives):
            amp[i] = d.amplitude
            carrier[i] = d.carrier
            phase[i] = d.phase
        p_rec, psi_rec, mean, norm = _kernels.lab_schrodinger_traj(
            mdl.delta_static, amp, carrier, phase, psi_init,
            cfg.dt, nsteps, cfg.record_stride)
    else:
        p_rec, psi_rec, mean, norm = _evolve_callable(
            hamiltonian, psi_init, cfg.dt, nsteps, cfg.record_stride)
    times = _record_times(nsteps, cfg.record_stride, cfg.dt)
    return Trajectory(t=times, p0=p_rec, mean_p0=mean,
                      final_norm=norm, states=psi_rec)


def _evolve_callable(hfunc, psi_init, dt, nsteps, stride):
    """Generic RK4 over a Python-callable Hamiltonian source."""
    psi = np.array([psi_init[0] + 1j * psi_init[1],
                    psi_init[2] + 1j * psi_init[3]])

    def deriv(t, y):
        h = hfunc(t)
        if isinstance(h, HermitianOp2):
            h = h.to_matrix()
        return -1j * (h @ y)

    nrec = _kernels.n_records(nsteps, stride)
    p_rec = np.empty(nrec)
    psi_rec = np.empty((nrec, 2), dtype=np.complex128)
    p = abs(psi[0]) ** 2
    acc = 0.5 * p
    p_rec[0] = p
    psi_rec[0] = psi
    idx = 1
    for k in range(nsteps):
        t = k * dt
        k1 = deriv(t, psi)
        k2 = deriv(t + 0.5 * dt, psi + 0.5 * dt * k1)
        k3 = deriv(t + 0.5 * dt, psi + 0.5 * dt * k2)
        k4 = deriv(t + dt, psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        p = abs(psi[0]) ** 2
        acc += p
        if (k + 1) % stride == 0 or k == nsteps - 1:
            p_rec[idx] = p
            psi_rec[idx] = psi
            idx += 1
    acc -= 0.5 * p
    norm = abs(psi[0]) ** 2 + abs(psi[1]) ** 2
    return p_rec, psi_rec, acc / nsteps, norm


def evolve_bloch(rwa: RwaModel, r0: BlochState, cfg: SimConfig) -> Trajectory:
    """Integrate the Bloch equations with pure dephasing (RK4)."""
    nsteps = cfg.nsteps
    r_init = np.array([r0.rx, r0.ry, r0.rz])
    p_rec, r_rec, mean = _kernels.rwa_bloch_traj(
        rwa.detuning, rwa.rabi_mw, rwa.mod_rf, rwa.omega_rf, rwa.phase_rf,
        cfg.dephasing_rate, r_init, cfg.dt, nsteps, cfg.record_stride)
    times = _record_times(nsteps, cfg.record_stride, cfg.dt)
    return Trajectory(t=times, p0=p_rec, mean_p0=mean, bloch=r_rec)


def observable(traj: Trajectory, mode: ObservableMode) -> float:
    """Extract the scalar signal: mean population (time_average, over all
    integration steps) or the final recorded sample (endpoint)."""
    if len(traj.p0) == 0:
        raise ValueError("empty trajectory")
    if mode == "time_average":
        return float(traj.mean_p0)
    if mode == "endpoint":
        return float(traj.p0[-1])
    raise ValueError(f"unknown observable mode {mode!r}")


def fit_nutation_frequency(traj: Trajectory) -> float:
    """Dominant oscillation angular frequency (rad/us) of p0(t).

    Spectral-peak estimation: mean removal, Hann window, rFFT, global
    peak outside the DC leakage bins, refined by local quadratic
    interpolation of the log magnitude. Accuracy ~1% for records
    holding at least two full oscillations (and improving with more).
    Chosen over damped-sinusoid least squares for robustness to
    multi-frequency content near CDT points.
    """
    t = np.asarray(traj.t, dtype=float)
    p = np.asarray(traj.p0, dtype=float)
    if len(t) >= 3:
        step = t[1] - t[0]
        # drop an off-stride final sample so the grid stays uniform
        if abs((t[-1] - t[-2]) - step) > 1e-12 * max(1.0, abs(step)):
            t = t[:-1]
            p = p[:-1]
    n = len(p)
    if n < 8:
        raise NoOscillationError("trajectory too short for spectral fitting")
    dt_s = t[1] - t[0]
    x = (p - p.mean()) * np.hanning(n)
    spec = np.abs(np.fft.rfft(x))
    kmin = 3  # Hann-windowed DC leakage occupies bins 0..2
    if len(spec) <= kmin + 1:
        raise NoOscillationError("trajectory too short for spectral fitting")
    body = spec[kmin:]
    kpk = int(np.argmax(body)) + kmin
    floor = max(np.median(body) * 10.0, 1e-9 * n * max(1.0, np.max(np.abs(p))))
    if spec[kpk] <= floor:
        raise NoOscillationError("no oscillation detected")
    # quadratic interpolation on log magnitude around the peak
    k = kpk
    if 0 < k < len(spec) - 1 and spec[k - 1] > 0 and spec[k + 1] > 0:
        la, lb, lc = np.log(spec[k - 1]), np.log(spec[k]), np.log(spec[k + 1])
        denom = la - 2 * lb + lc
        shift = 0.5 * (la - lc) / denom if denom != 0 else 0.0
        shift = min(0.5, max(-0.5, shift))
    else:
        shift = 0.0
    freq = (k + shift) / (n * dt_s)
    return 2.0 * math.pi * freq


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Export as CSV: header t_us,p0[,rx,ry,rz], 17 significant digits."""
    with open(path, "w", newline="") as f:
        if traj.bloch is not None:
            f.write("t_us,p0,rx,ry,rz\n")
            for i in range(len(traj.t)):
                f.write("%.17g,%.17g,%.17g,%.17g,%.17g\n" % (
                    traj.t[i], traj.p0[i], traj.bloch[i, 0],
                    traj.bloch[i, 1], traj.bloch[i, 2]))
        else:
            f.write("t_us,p0\n")
            for i in range(len(traj.t)):
                f.write("%.17g,%.17g\n" % (traj.t[i], traj.p0[i]))
