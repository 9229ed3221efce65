"""Physical model types and Hamiltonian construction.

Lab-frame Hamiltonian of a driven two-level spin,

    H(t) = (Delta/2) sigma_z + sum_i sigma . B_i cos(w_i t + phi_i),

and its reduction to the frame rotating with the microwave carrier,

    H = (delta/2) sigma_z + (Omega_MW/2) sigma_x
        + Omega_RF cos(w_RF t + phi) sigma_z.

Conventions (fixed, documented here once):
  * basis index 0 <-> m_s = 0, with sigma_z |0> = +|0>;
  * transverse amplitude components equal the resonant Rabi angular
    frequency (no factor 1/2 on the drive vector); longitudinal
    components enter unhalved, so the instantaneous splitting is
    delta + 2*Omega_RF*cos(w_RF t + phi);
  * the MW phase is eliminated by coordinate choice; only the RF
    phase phi is retained.

All types are immutable and all operations pure, so everything here is
safe to share across concurrent workers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .units import TWO_PI

__all__ = [
    "DriveField",
    "TwoLevelModel",
    "RwaModel",
    "HermitianOp2",
    "ReductionWarning",
    "build_lab_hamiltonian",
    "reduce_to_rwa",
    "build_rwa_hamiltonian",
]


class ReductionWarning(UserWarning):
    """Diagnostic emitted by reduce_to_rwa (dropped components, bad hierarchy)."""


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class DriveField:
    """One oscillatory drive: B cos(carrier * t + phase).

    amplitude: 3-vector (x, y, z) of angular frequencies (rad/us),
    relative to the spin quantization axis. carrier in rad/us,
    phase in radians (stored reduced into [0, 2pi)).
    """

    amplitude: tuple[float, float, float]
    carrier: float
    phase: float = 0.0

    def __post_init__(self):
        if len(self.amplitude) != 3:
            raise ValueError("amplitude must have exactly 3 components")
        _require_finite("amplitude", *self.amplitude)
        _require_finite("carrier", self.carrier)
        _require_finite("phase", self.phase)
        if self.carrier < 0:
            raise ValueError(f"carrier must be >= 0, got {self.carrier}")
        object.__setattr__(self, "amplitude", tuple(float(a) for a in self.amplitude))
        object.__setattr__(self, "phase", float(self.phase) % TWO_PI)

    @classmethod
    def along_x(cls, amp: float, carrier: float, phase: float = 0.0) -> "DriveField":
        return cls((amp, 0.0, 0.0), carrier, phase)

    @classmethod
    def along_z(cls, amp: float, carrier: float, phase: float = 0.0) -> "DriveField":
        return cls((0.0, 0.0, amp), carrier, phase)

    @property
    def transverse_magnitude(self) -> float:
        ax, ay, _ = self.amplitude
        return math.hypot(ax, ay)

    @property
    def longitudinal(self) -> float:
        return self.amplitude[2]

    def is_zero(self) -> bool:
        return all(a == 0.0 for a in self.amplitude)


@dataclass(frozen=True)
class TwoLevelModel:
    """Static splitting Delta plus an ordered list of lab-frame drives."""

    delta_static: float
    drives: tuple[DriveField, ...] = ()

    def __post_init__(self):
        _require_finite("delta_static", self.delta_static)
        object.__setattr__(self, "drives", tuple(self.drives))
        for d in self.drives:
            if not isinstance(d, DriveField):
                raise TypeError("drives must be DriveField instances")


@dataclass(frozen=True)
class RwaModel:
    """Rotating-frame model: detuning delta = Delta - w_MW, transverse
    Rabi amplitude Omega_MW, longitudinal modulation Omega_RF at w_RF."""

    detuning: float
    rabi_mw: float
    mod_rf: float = 0.0
    omega_rf: float = 0.0
    phase_rf: float = 0.0

    def __post_init__(self):
        _require_finite(
            "RwaModel fields",
            self.detuning, self.rabi_mw, self.mod_rf, self.omega_rf, self.phase_rf,
        )
        if self.rabi_mw < 0:
            raise ValueError("rabi_mw must be >= 0 (sign absorbed into phase)")
        if self.mod_rf < 0:
            raise ValueError("mod_rf must be >= 0 (sign absorbed into phase)")
        if self.omega_rf < 0:
            raise ValueError("omega_rf must be >= 0")

    def with_phase(self, phase_rf: float) -> "RwaModel":
        return RwaModel(self.detuning, self.rabi_mw, self.mod_rf,
                        self.omega_rf, phase_rf)


@dataclass(frozen=True)
class HermitianOp2:
    """2x2 Hermitian operator: two real diagonals and one complex
    off-diagonal (the <0|H|1> element); Hermitian by construction."""

    d0: float
    d1: float
    off: complex = 0.0j

    def to_matrix(self) -> np.ndarray:
        return np.array(
            [[self.d0, self.off], [np.conj(self.off), self.d1]],
            dtype=np.complex128,
        )


def build_lab_hamiltonian(model: TwoLevelModel, t: float) -> HermitianOp2:
    """Evaluate the lab-frame Hamiltonian at time t (us)."""
    _require_finite("t", t)
    d0 = 0.5 * model.delta_static
    d1 = -0.5 * model.delta_static
    off = 0.0j
    for drv in model.drives:
        c = math.cos(drv.carrier * t + drv.phase)
        ax, ay, az = drv.amplitude
        d0 += az * c
        d1 -= az * c
        off += (ax - 1j * ay) * c
    return HermitianOp2(d0, d1, off)


def build_rwa_hamiltonian(m: RwaModel, t: float) -> HermitianOp2:
    """Evaluate the rotating-frame Hamiltonian at time t (us)."""
    _require_finite("t", t)
    mod = m.mod_rf * math.cos(m.omega_rf * t + m.phase_rf)
    return HermitianOp2(
        0.5 * m.detuning + mod,
        -0.5 * m.detuning - mod,
        complex(0.5 * m.rabi_mw),
    )


def reduce_to_rwa(model: TwoLevelModel, mw_index: int) -> RwaModel:
    """Reduce a lab-frame model to the rotating frame of the drive at
    mw_index.

    The MW transverse magnitude becomes rabi_mw and delta = Delta - w_MW.
    The single remaining drive is taken as the RF; its z component
    becomes mod_rf. Transverse RF components and longitudinal MW
    components do not survive the reduction; they are dropped with a
    ReductionWarning, as is a violated parameter hierarchy
    w_MW >> Omega_RF ~ w_RF > Omega_MW (corrections of relative order
    (Omega_MW / w_MW)^2 apply).
    """
    if not 0 <= mw_index < len(model.drives):
        raise IndexError(
            f"mw_index {mw_index} does not name a drive "
            f"(model has {len(model.drives)})"
        )
    mw = model.drives[mw_index]
    if mw.transverse_magnitude == 0.0:
        raise ValueError("MW drive has no transverse amplitude component")
    others = [d for i, d in enumerate(model.drives) if i != mw_index]
    if len(others) > 1:
        raise ValueError("reduce_to_rwa supports exactly one non-MW drive")

    if mw.longitudinal != 0.0:
        warnings.warn(
            f"dropping longitudinal MW component {mw.longitudinal:g} rad/us",
            ReductionWarning, stacklevel=2,
        )

    mod_rf = 0.0
    omega_rf = 0.0
    phase_rf = 0.0
    if others:
        rf = others[0]
        mod_rf = abs(rf.longitudinal)
        omega_rf = rf.carrier
        phase_rf = rf.phase
        if rf.transverse_magnitude != 0.0:
            warnings.warn(
                f"dropping transverse RF component {rf.transverse_magnitude:g} rad/us",
                ReductionWarning, stacklevel=2,
            )

    rabi_mw = mw.transverse_magnitude
    scale = max(mod_rf, omega_rf, rabi_mw)
    if mw.carrier < 10.0 * scale and scale > 0.0:
        ratio = rabi_mw / mw.carrier if mw.carrier > 0 else math.inf
        warnings.warn(
            "parameter hierarchy w_MW >> Omega_RF ~ w_RF > Omega_MW violated; "
            f"RWA corrections of order (Omega_MW/w_MW)^2 ~ {ratio ** 2:.3g}",
            ReductionWarning, stacklevel=2,
        )

    return RwaModel(
        detuning=model.delta_static - mw.carrier,
        rabi_mw=rabi_mw,
        mod_rf=mod_rf,
        omega_rf=omega_rf,
        phase_rf=phase_rf,
    )
