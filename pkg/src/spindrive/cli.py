"""Command-line front end.

Subcommands: evolve, spectrum, analyze {sidebands|cdt|lineshape|floquet|lines}.
Exit codes: 0 success, 2 config error, 3 simulation error, 4 analytic
domain error.

Configs are flat `key = value` text (dotted key prefixes, `#` comments).
All frequencies at this boundary are ordinary MHz and times are us; the
angular-unit conversion happens in units.from_mhz/to_mhz only. Unknown
keys are a hard error, and every run writes a config echo sidecar that
reproduces the run bit-identically when fed back in.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .analytic import (AnalyticError, cdt_missing_resonances,
                       floquet_quasienergies, multiphoton_lines,
                       quasistatic_lineshape, sideband_amplitudes)
from .dynamics import (BlochState, SimConfig, SimulationError, SpinState,
                       evolve_bloch, evolve_schrodinger, observable,
                       write_trajectory_csv)
from .model import DriveField, RwaModel, TwoLevelModel
from .sweep import (GEOMETRIES, GridSpec, compute_spectrum, normalize_rows,
                    write_spectrum_csv)
from .units import from_mhz, to_mhz

__all__ = ["ConfigError", "parse_config", "main"]


class ConfigError(Exception):
    pass


def _enum(*allowed):
    def cast(s):
        if s not in allowed:
            raise ValueError(f"must be one of {', '.join(allowed)}")
        return s
    return cast


# key -> (default value, caster from string)
KNOWN_KEYS = {
    "model.frame": ("rwa", _enum("rwa", "lab")),
    "model.geometry": ("mw_x_rf_z", _enum(*GEOMETRIES)),
    "model.delta_static_mhz": (100.0, float),
    "model.detuning_mhz": (0.0, float),
    "model.rabi_mw_mhz": (0.5, float),
    "model.mod_rf_mhz": (3.0, float),
    "model.omega_rf_mhz": (5.0, float),
    "model.phase_rf": (0.0, float),
    "sim.dt_us": (1e-4, float),
    "sim.t_total_us": (100.0, float),
    "sim.record_stride": (100, int),
    "sim.observable": ("time_average", _enum("time_average", "endpoint")),
    "sim.dephasing_mhz": (0.0, float),
    "grid.rf_min_mhz": (1.0, float),
    "grid.rf_max_mhz": (16.0, float),
    "grid.rf_points": (61, int),
    "grid.mw_min_mhz": (-20.0, float),
    "grid.mw_max_mhz": (20.0, float),
    "grid.mw_points": (81, int),
    "grid.phases": (16, int),
    "analyze.n": (0, int),
    "analyze.k": (3, int),
    "analyze.max_order": (5, int),
    "analyze.truncation": (0, int),   # 0 = automatic
    "analyze.center_mhz": (0.0, float),
    "analyze.hwhm_mhz": (0.5, float),
    "analyze.delta_min_mhz": (-12.0, float),
    "analyze.delta_max_mhz": (12.0, float),
    "analyze.grid_points": (2001, int),
    "output.prefix": ("run", str),
}


def parse_config(path) -> dict:
    """Parse a flat config file into a fully defaulted key -> value dict."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    cfg = {k: v for k, (v, _) in KNOWN_KEYS.items()}
    for lineno, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{p}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{p}:{lineno}: unknown key {key!r}")
        _, cast = KNOWN_KEYS[key]
        try:
            cfg[key] = cast(value)
        except ValueError as exc:
            raise ConfigError(f"{p}:{lineno}: bad value for {key}: {exc}")
    return cfg


def _format_value(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_config_echo(cfg: dict, path) -> None:
    """Write the full effective config (provenance sidecar; feeding it
    back reproduces the outputs bit-identically)."""
    with open(path, "w", newline="") as f:
        for k in KNOWN_KEYS:
            f.write(f"{k} = {_format_value(cfg[k])}\n")


def _sim_config(cfg: dict) -> SimConfig:
    return SimConfig(
        dt=cfg["sim.dt_us"],
        t_total=cfg["sim.t_total_us"],
        record_stride=cfg["sim.record_stride"],
        observable_mode=cfg["sim.observable"],
        dephasing_rate=from_mhz(cfg["sim.dephasing_mhz"]),
    )


def _rwa_model(cfg: dict) -> RwaModel:
    return RwaModel(
        detuning=from_mhz(cfg["model.detuning_mhz"]),
        rabi_mw=from_mhz(cfg["model.rabi_mw_mhz"]),
        mod_rf=from_mhz(cfg["model.mod_rf_mhz"]),
        omega_rf=from_mhz(cfg["model.omega_rf_mhz"]),
        phase_rf=cfg["model.phase_rf"],
    )


def _lab_model(cfg: dict) -> TwoLevelModel:
    delta = from_mhz(cfg["model.delta_static_mhz"])
    carrier = delta - from_mhz(cfg["model.detuning_mhz"])
    rabi = from_mhz(cfg["model.rabi_mw_mhz"])
    mod = from_mhz(cfg["model.mod_rf_mhz"])
    geom = cfg["model.geometry"]
    if geom == "mw_x_rf_z":
        mw = DriveField.along_x(rabi, carrier)
        rf = DriveField.along_z(mod, from_mhz(cfg["model.omega_rf_mhz"]),
                                cfg["model.phase_rf"])
    elif geom == "mw_z_rf_x":
        mw = DriveField.along_z(rabi, carrier)
        rf = DriveField.along_x(mod, from_mhz(cfg["model.omega_rf_mhz"]),
                                cfg["model.phase_rf"])
    else:
        mw = DriveField.along_x(rabi, carrier)
        rf = DriveField.along_x(mod, from_mhz(cfg["model.omega_rf_mhz"]),
                                cfg["model.phase_rf"])
    return TwoLevelModel(delta_static=delta, drives=(mw, rf))


def cmd_evolve(cfg: dict, out_dir: Path) -> int:
    sim = _sim_config(cfg)
    if sim.dephasing_rate > 0:
        if cfg["model.frame"] != "rwa":
            raise SimulationError("dephasing requires the rwa frame")
        traj = evolve_bloch(_rwa_model(cfg), BlochState.ground(), sim)
    elif cfg["model.frame"] == "rwa":
        traj = evolve_schrodinger(_rwa_model(cfg), SpinState.ground(), sim)
    else:
        traj = evolve_schrodinger(_lab_model(cfg), SpinState.ground(), sim)
    prefix = out_dir / cfg["output.prefix"]
    write_trajectory_csv(traj, f"{prefix}_trajectory.csv")
    write_config_echo(cfg, f"{prefix}_trajectory.cfg")
    value = observable(traj, sim.observable_mode)
    print("observable = %.17g" % value)
    return 0


def cmd_spectrum(cfg: dict, out_dir: Path, normalize: str | None) -> int:
    frame = cfg["model.frame"]
    spec = GridSpec(
        rf_axis=from_mhz(np.linspace(cfg["grid.rf_min_mhz"],
                                     cfg["grid.rf_max_mhz"],
                                     cfg["grid.rf_points"])),
        mw_axis=from_mhz(np.linspace(cfg["grid.mw_min_mhz"],
                                     cfg["grid.mw_max_mhz"],
                                     cfg["grid.mw_points"])),
        rabi_mw=from_mhz(cfg["model.rabi_mw_mhz"]),
        mod_rf=from_mhz(cfg["model.mod_rf_mhz"]),
        frame=frame,
        geometry=cfg["model.geometry"] if frame == "lab" else None,
        phases=cfg["grid.phases"],
        sim=_sim_config(cfg),
        delta_static=(from_mhz(cfg["model.delta_static_mhz"])
                      if frame == "lab" else None),
    )
    grid = compute_spectrum(spec)
    if normalize == "rows":
        grid = normalize_rows(grid)
    prefix = out_dir / cfg["output.prefix"]
    write_spectrum_csv(grid, f"{prefix}_spectrum.csv")
    write_config_echo(cfg, f"{prefix}_spectrum.cfg")
    print(f"wrote {prefix}_spectrum.csv")
    return 0


def cmd_analyze(cfg: dict, which: str) -> int:
    rwa = _rwa_model(cfg)
    out = sys.stdout
    if which == "sidebands":
        x = (2.0 * rwa.mod_rf / rwa.omega_rf) if rwa.omega_rf > 0 else 0.0
        n = max(cfg["analyze.max_order"], math.ceil(x) + 20)
        sb = sideband_amplitudes(rwa, n)
        out.write("n,a_n_mhz\n")
        for order, amp in zip(sb.orders, sb.amplitudes):
            if abs(order) <= cfg["analyze.max_order"]:
                out.write("%d,%.17g\n" % (order, to_mhz(amp)))
    elif which == "cdt":
        freqs = cdt_missing_resonances(cfg["analyze.n"], rwa.mod_rf,
                                       cfg["analyze.k"])
        out.write("m,omega_rf_mhz\n")
        for m, w in enumerate(freqs, start=1):
            out.write("%d,%.17g\n" % (m, to_mhz(w)))
    elif which == "lineshape":
        center = from_mhz(cfg["analyze.center_mhz"])
        hwhm = from_mhz(cfg["analyze.hwhm_mhz"])
        span = 1.2 * (2.0 * rwa.mod_rf + 10.0 * hwhm)
        grid = np.linspace(center - span, center + span,
                           cfg["analyze.grid_points"])
        prof = quasistatic_lineshape(center, rwa.mod_rf, hwhm, grid)
        out.write("delta_mhz,density\n")
        for d, rho in zip(prof.delta, prof.density):
            # density converts to per-MHz units along with the axis
            out.write("%.17g,%.17g\n" % (to_mhz(d), rho * 2.0 * math.pi))
    elif which == "floquet":
        trunc = cfg["analyze.truncation"]
        if trunc <= 0:
            x = 2.0 * rwa.mod_rf / rwa.omega_rf if rwa.omega_rf > 0 else 0.0
            trunc = math.ceil(x) + 15
        qs = floquet_quasienergies(rwa, trunc)
        out.write("index,quasienergy_mhz\n")
        for i, q in enumerate(qs):
            out.write("%d,%.17g\n" % (i, to_mhz(q)))
    elif which == "lines":
        rng = (from_mhz(cfg["analyze.delta_min_mhz"]),
               from_mhz(cfg["analyze.delta_max_mhz"]))
        lines = multiphoton_lines(rwa, rng, cfg["analyze.max_order"])
        out.write("n,delta_mhz,effective_rabi_mhz\n")
        for ln in lines:
            out.write("%d,%.17g,%.17g\n" % (
                ln.order, to_mhz(ln.detuning), to_mhz(ln.effective_rabi)))
    else:
        raise ConfigError(f"unknown analyze subcommand {which!r}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spindrive",
        description="Driven two-level spin simulation and analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (speed only, never results)")

    pe = sub.add_parser("evolve", help="single time evolution")
    common(pe)
    ps = sub.add_parser("spectrum", help="2-D parameter sweep")
    common(ps)
    ps.add_argument("--normalize", choices=["rows"], default=None)
    pa = sub.add_parser("analyze", help="analytic predictions (CSV to stdout)")
    pa.add_argument("which", choices=["sidebands", "cdt", "lineshape",
                                      "floquet", "lines"])
    common(pa)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.threads is not None:
            import numba
            numba.set_num_threads(max(1, args.threads))
        cfg = parse_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "evolve":
            return cmd_evolve(cfg, out_dir)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out_dir, args.normalize)
        return cmd_analyze(cfg, args.which)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AnalyticError as exc:
        print(f"analytic error: {exc}", file=sys.stderr)
        return 4
    except (SimulationError, ValueError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
