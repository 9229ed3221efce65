"""End-to-end acceptance checks.

Each test prints a single ``ACCEPTANCE k (...): PASS|FAIL`` line (run
pytest with ``-s`` to see them as they complete). The three 61x81
lab-frame spectra dominate the runtime (~6 min each on one core).
"""

import math

import numpy as np
import pytest

from spindrive import _kernels
from spindrive.analytic import (bessel_j, cdt_missing_resonances,
                                floquet_central_gap, quasistatic_lineshape)
from spindrive.dynamics import (SimConfig, SpinState, evolve_schrodinger,
                                fit_nutation_frequency)
from spindrive.model import RwaModel
from spindrive.sweep import GridSpec, compute_spectrum

TP = 2 * math.pi

# Frozen oracle values (independent 25-digit power-series evaluation)
J_1P2 = {0: 0.6711327442643627, 1: 0.4982890575672155, 2: 0.1593490183476631}

RF_AXIS = TP * np.linspace(1.0, 16.0, 61)     # 0.25 MHz cells
MW_AXIS = TP * np.linspace(-20.0, 20.0, 81)   # 0.5 MHz cells
GRID_SIM = SimConfig(dt=1e-4, t_total=20.0)
RABI_MW = TP * 0.5
MOD_RF = TP * 3.0
DELTA_STATIC = TP * 100.0
MW_CELL = 0.5  # MHz


def _report(capsys, num: int, name: str, ok: bool) -> None:
    with capsys.disabled():
        print(f"\nACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'}")
    assert ok, f"acceptance criterion {num} ({name}) failed"


def _lab_grid(geometry: str):
    return compute_spectrum(GridSpec(
        rf_axis=RF_AXIS, mw_axis=MW_AXIS, rabi_mw=RABI_MW, mod_rf=MOD_RF,
        frame="lab", geometry=geometry, phases=16, sim=GRID_SIM,
        delta_static=DELTA_STATIC))


@pytest.fixture(scope="session")
def grid_mw_x_rf_z():
    return _lab_grid("mw_x_rf_z")


@pytest.fixture(scope="session")
def grid_mw_x_rf_x():
    return _lab_grid("mw_x_rf_x")


@pytest.fixture(scope="session")
def grid_mw_z_rf_x():
    return _lab_grid("mw_z_rf_x")


def _row(grid, rf_mhz: float):
    i = int(np.argmin(np.abs(grid.rf_axis / TP - rf_mhz)))
    return grid.mw_axis / TP, grid.signal[i]


def _local_minima(mw, sig):
    return [mw[j] for j in range(1, len(sig) - 1)
            if sig[j] < sig[j - 1] and sig[j] < sig[j + 1]]


def _depth(mw, sig, center_mhz: float) -> float:
    """Dip depth at a line position: row maximum minus the minimum
    within one grid cell of the predicted center."""
    near = np.abs(mw - center_mhz) <= MW_CELL + 1e-9
    return float(sig.max() - sig[near].min())


def test_criterion_1_multiphoton_dip_positions(grid_mw_x_rf_z, capsys):
    mw, sig = _row(grid_mw_x_rf_z, 5.0)
    minima = _local_minima(mw, sig)
    ok = True
    for n in (-2, -1, 0, 1, 2):
        target = 5.0 * n
        nearby = [m for m in minima if abs(m - target) <= 2.0]
        hit = bool(nearby) and min(abs(m - target)
                                   for m in nearby) <= MW_CELL + 1e-9
        ok = ok and hit
    _report(capsys, 1, "multiphoton dips at delta = n*w_RF", ok)


def test_criterion_2_selection_rules(grid_mw_x_rf_z, grid_mw_x_rf_x,
                                     grid_mw_z_rf_x, capsys):
    mw, ref = _row(grid_mw_x_rf_z, 5.0)
    _, xx = _row(grid_mw_x_rf_x, 5.0)
    _, zx = _row(grid_mw_z_rf_x, 5.0)

    # mw_x_rf_x: the allowed lines have odd total photon number. The
    # single-photon line sits at delta = 0; even-photon positions
    # (delta = +-w_RF, +-3w_RF) must be suppressed below 1/10 of it and
    # the weak three-photon line (delta = +-2w_RF) must be detectable
    # as a local minimum at the predicted cell.
    one_photon = _depth(mw, xx, 0.0)
    even_ok = all(_depth(mw, xx, c) < one_photon / 10.0
                  for c in (-15.0, -5.0, 5.0, 15.0))
    minima = _local_minima(mw, xx)
    three_ok = all(
        any(abs(m - c) <= MW_CELL + 1e-9 for m in minima)
        and _depth(mw, xx, c) > 1e-3
        for c in (-10.0, 10.0))

    # mw_z_rf_x: every multiphoton dip (|n| >= 1 RF photons) suppressed
    # below 1/10 of the corresponding mw_x_rf_z dip
    zx_ok = all(_depth(mw, zx, 5.0 * n) < _depth(mw, ref, 5.0 * n) / 10.0
                for n in (-3, -2, -1, 1, 2, 3))

    _report(capsys, 2, "geometry selection rules", even_ok and three_ok and zx_ok)


def test_criterion_3_cdt_missing_resonances(capsys):
    rf = TP * np.linspace(3.2, 14.0, 217)
    grid = compute_spectrum(GridSpec(
        rf_axis=rf, mw_axis=TP * np.array([0.0]), rabi_mw=TP * 0.43,
        mod_rf=TP * 15.4, frame="rwa", phases=16,
        sim=SimConfig(dt=1e-4, t_total=5.0, observable_mode="endpoint",
                      dephasing_rate=TP * 0.5)))
    sig = grid.signal[:, 0]
    ok = True
    for w_pred in cdt_missing_resonances(0, TP * 15.4, 3):
        p = w_pred / TP
        win = np.where((rf / TP > 0.9 * p) & (rf / TP < 1.1 * p))[0]
        i = win[np.argmax(sig[win])]
        ok = ok and abs(rf[i] / TP - p) / p <= 0.03 and sig[i] >= 0.9
    _report(capsys, 3, "CDT maxima at 2*mod_rf/j_0m with signal >= 0.9", ok)


def test_criterion_4_effective_rabi(capsys):
    ok = True
    for n in (0, 1, 2):
        m = RwaModel(n * TP * 5.0, TP * 0.5, TP * 3.0, TP * 5.0)
        traj = evolve_schrodinger(
            m, SpinState.ground(),
            SimConfig(dt=1e-4, t_total=100.0, record_stride=25))
        fitted = fit_nutation_frequency(traj)
        predicted = TP * 0.5 * J_1P2[n]
        ok = ok and abs(fitted - predicted) / predicted <= 0.05
    _report(capsys, 4, "nutation frequency = rabi_mw*|J_n(1.2)|", ok)


def test_criterion_5_quasistatic_lineshape(capsys):
    n_sims = 100_000
    rabi = TP * 0.5
    mod = TP * 6.0
    hwhm = TP * 0.5
    dt = 2e-3
    nsteps = 4000
    rng = np.random.default_rng(20260823)
    phases = rng.uniform(0.0, TP, n_sims)

    # frozen-phase runs (w_RF -> 0): fit the generalized Rabi frequency
    # of each trajectory and recover the static detuning offset it
    # implies; the offset sign is known from the frozen phase
    centers = np.empty(n_sims)
    nrec = _kernels.n_records(nsteps, 1)
    window = np.hanning(nrec)
    chunk = 5000
    for lo in range(0, n_sims, chunk):
        hi = min(lo + chunk, n_sims)
        ph = phases[lo:hi]
        series, _ = _kernels.rwa_schrodinger_series_batch(
            np.zeros(hi - lo), rabi, mod, np.zeros(hi - lo), ph, dt,
            nsteps, 1)
        x = (series - series.mean(axis=1, keepdims=True)) * window
        mag = np.abs(np.fft.rfft(x, axis=1))
        kpk = np.argmax(mag[:, 3:-1], axis=1) + 3
        rows = np.arange(hi - lo)
        lm = np.log(mag[rows, kpk - 1] + 1e-300)
        l0 = np.log(mag[rows, kpk] + 1e-300)
        lp = np.log(mag[rows, kpk + 1] + 1e-300)
        den = lm - 2 * l0 + lp
        dk = np.where(np.abs(den) > 1e-300, 0.5 * (lm - lp) / den, 0.0)
        om_gen = TP * (kpk + dk) / (nrec * dt)
        d = np.sqrt(np.clip(om_gen ** 2 - rabi ** 2, 0.0, None))
        centers[lo:hi] = np.sign(np.cos(ph)) * d

    binw = 0.2  # MHz
    edges = np.arange(-20.0, 20.0 + binw / 2, binw)
    mids = 0.5 * (edges[1:] + edges[:-1])
    counts, _ = np.histogram(centers / TP, bins=edges)
    density = counts / (n_sims * binw)  # per MHz

    # smooth with the same unit-area Lorentzian used by the analytic
    # reference profile, then renormalize over the grid
    nb = len(mids)
    ker_x = np.arange(-nb + 1, nb) * binw
    gam = hwhm / TP
    ker = (gam / math.pi) / (ker_x ** 2 + gam ** 2)
    ker /= ker.sum() * binw
    smooth = np.convolve(density * binw, ker)[nb - 1:2 * nb - 1]
    smooth /= np.trapezoid(smooth, mids)

    analytic = quasistatic_lineshape(0.0, mod, hwhm, TP * mids).density * TP

    sup_norm = float(np.max(np.abs(smooth - analytic)))
    mid = nb // 2
    sep = mids[mid + np.argmax(smooth[mid:])] - mids[np.argmax(smooth[:mid])]
    sep_ok = abs(sep - 24.0) <= 0.05 * 24.0
    _report(capsys, 5, "Monte Carlo quasistatic arcsine lineshape",
            sup_norm <= 0.05 and sep_ok)


def test_criterion_6_rwa_validity(grid_mw_x_rf_z, capsys):
    lab_rf_idx = {3.0: 8, 5.0: 16, 8.0: 28}
    lab_mw_idx = {-5.0: 30, 0.0: 40, 5.0: 50}
    worst = 0.0
    for rf_mhz, i in lab_rf_idx.items():
        assert grid_mw_x_rf_z.rf_axis[i] / TP == pytest.approx(rf_mhz)
        rwa = compute_spectrum(GridSpec(
            rf_axis=TP * np.array([rf_mhz]),
            mw_axis=TP * np.array([-5.0, 0.0, 5.0]),
            rabi_mw=RABI_MW, mod_rf=MOD_RF, frame="rwa", phases=16,
            sim=GRID_SIM))
        for k, (mw_mhz, j) in enumerate(lab_mw_idx.items()):
            assert grid_mw_x_rf_z.mw_axis[j] / TP == pytest.approx(mw_mhz)
            diff = abs(grid_mw_x_rf_z.signal[i, j] - rwa.signal[0, k])
            worst = max(worst, diff)
    _report(capsys, 6, "lab vs RWA spot check <= 0.02", worst <= 0.02)


def test_criterion_7_property_suite(capsys):
    checks = []

    # norm conservation over 1e6 steps
    m = RwaModel(TP * 5.0, TP * 0.5, TP * 3.0, TP * 5.0, 0.3)
    traj = evolve_schrodinger(m, SpinState.ground(),
                              SimConfig(dt=1e-4, t_total=100.0))
    checks.append(abs(traj.final_norm - 1.0) <= 1e-6)

    # dt-halving stability
    a = evolve_schrodinger(m, SpinState.ground(),
                           SimConfig(dt=1e-4, t_total=5.0))
    b = evolve_schrodinger(m, SpinState.ground(),
                           SimConfig(dt=5e-5, t_total=5.0))
    checks.append(abs(a.mean_p0 - b.mean_p0) <= 1e-6)

    # detuning symmetry of the phase-averaged signal
    phases = np.arange(8) * TP / 8
    means = []
    for sign in (+1, -1):
        vals = [evolve_schrodinger(
                    RwaModel(sign * TP * 3.0, TP * 0.5, TP * 3.0,
                             TP * 5.0, p),
                    SpinState.ground(),
                    SimConfig(dt=1e-4, t_total=5.0)).mean_p0
                for p in phases]
        means.append(float(np.mean(vals)))
    checks.append(abs(means[0] - means[1]) <= 1e-6)

    # Bessel recurrence and completeness
    rec_ok = all(
        abs(bessel_j(n - 1, x) + bessel_j(n + 1, x)
            - (2.0 * n / x) * bessel_j(n, x)) <= 1e-9
        for n in range(1, 20) for x in (0.3, 1.2, 4.7, 11.0))
    comp_ok = all(
        abs(sum(bessel_j(n, x) ** 2
                for n in range(-25 - int(x), 26 + int(x))) - 1.0) <= 1e-9
        for x in (0.5, 1.2, 6.0, 15.0))
    checks.append(rec_ok and comp_ok)

    # Floquet central gap vs Bessel-renormalized Rabi frequency
    gap_ok = all(
        abs(floquet_central_gap(
                RwaModel(n * TP * 5.0, TP * 0.5, TP * 3.0, TP * 5.0), 20)
            - TP * 0.5 * J_1P2[n]) <= 0.02 * TP * 0.5 * J_1P2[n]
        for n in (0, 1, 2))
    checks.append(gap_ok)

    # determinism: bit-identical spectra across thread settings
    import numba
    spec = GridSpec(rf_axis=TP * np.linspace(4.0, 5.0, 3),
                    mw_axis=TP * np.linspace(-2.0, 2.0, 5),
                    rabi_mw=TP * 0.5, mod_rf=TP * 3.0, frame="rwa",
                    phases=4, sim=SimConfig(dt=1e-3, t_total=2.0))
    max_threads = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(1)
    g1 = compute_spectrum(spec)
    numba.set_num_threads(max_threads)
    g2 = compute_spectrum(spec)
    checks.append(bool(np.array_equal(g1.signal, g2.signal)))

    _report(capsys, 7, "property suite", all(checks))
