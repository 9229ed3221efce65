"""spindrive: a driven two-level spin under simultaneous MW and RF excitation.

Simulation and analysis of multifrequency spin resonance: lab-frame and
rotating-frame Hamiltonians, RK4 Schrodinger/Bloch propagation,
Bessel-sideband analytics (multiphoton resonances, coherent destruction
of tunneling, quasistatic lineshapes, Floquet quasienergies), and a
deterministic parameter-sweep engine.
"""

__version__ = "0.1.0"

from .model import (DriveField, HermitianOp2, ReductionWarning, RwaModel,
                    TwoLevelModel, build_lab_hamiltonian,
                    build_rwa_hamiltonian, reduce_to_rwa)
from .dynamics import (BlochState, NoOscillationError, SimConfig,
                       SimulationError, SpinState, Trajectory, evolve_bloch,
                       evolve_schrodinger, fit_nutation_frequency, observable,
                       write_trajectory_csv)
from .analytic import (AnalyticError, LineProfile, ResonanceLine, SidebandSet,
                       bessel_j, bessel_zero, cdt_missing_resonances,
                       flipflop_rate, floquet_central_gap,
                       floquet_quasienergies, multiphoton_lines,
                       quasistatic_lineshape, sideband_amplitudes)
from .sweep import (GridSpec, SpectrumGrid, GridComparison, compare_grids,
                    compute_spectrum, normalize_rows, read_spectrum_csv,
                    write_spectrum_csv)
from .units import from_mhz, to_mhz

__all__ = [
    "DriveField", "HermitianOp2", "ReductionWarning", "RwaModel",
    "TwoLevelModel", "build_lab_hamiltonian", "build_rwa_hamiltonian",
    "reduce_to_rwa",
    "BlochState", "NoOscillationError", "SimConfig", "SimulationError",
    "SpinState", "Trajectory", "evolve_bloch", "evolve_schrodinger",
    "fit_nutation_frequency", "observable", "write_trajectory_csv",
    "AnalyticError", "LineProfile", "ResonanceLine", "SidebandSet",
    "bessel_j", "bessel_zero", "cdt_missing_resonances", "flipflop_rate",
    "floquet_central_gap", "floquet_quasienergies", "multiphoton_lines",
    "quasistatic_lineshape", "sideband_amplitudes",
    "GridSpec", "SpectrumGrid", "GridComparison", "compare_grids",
    "compute_spectrum", "normalize_rows", "read_spectrum_csv",
    "write_spectrum_csv",
    "from_mhz", "to_mhz",
]
