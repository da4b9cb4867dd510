"""Command-line interface.

Subcommands
-----------
phase-diagram  order parameters and critical lines on a coupling grid
bands          excitation bands of one or all theories
spectroscopy   probe response surface (analytic resolvent or real-time ED)
exponents      critical-exponent fits for one theory
circuit        circuit-parameter mapping and critical cavity frequency

Every run writes a manifest.json recording the resolved configuration,
its hash and the produced files; identical configurations produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import CircuitParams, critical_cavity_frequency, renormalize_circuit
from .core import Boundary, ModelParams, derive_scales
from .ed import EdCache, TruncationSpec, cache_key, ed_ground, spectroscopy_experiment
from .errors import SpinBosonError, ValidationError
from .excitations import (
    BlockConvention, Theory, band_scan, fit_exponents, make_critical_path,
)
from .ising import ising_magnetization
from .meanfield import mf_critical_omega0, mf_polarizations, solve_mf_params
from .polaron import ansatz_critical_omega0, ansatz_ground_state, ansatz_polarizations
from .spectroscopy import ProbeParams, analytic_response

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _load_config(path):
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError("config", str(exc)) from exc


def _canonical(config):
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def _write_manifest(out_dir, command, config, outputs):
    blob = _canonical(config)
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "config_sha256": hashlib.sha256(blob.encode()).hexdigest(),
        "outputs": sorted(outputs),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def _grid(spec, key):
    try:
        return np.linspace(float(spec["min"]), float(spec["max"]), int(spec["n"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(key, f"expected {{min, max, n}}, got {spec!r}") from exc


def _params_from(config, default_n_sites=2):
    d = dict(config.get("params", {}))
    d.setdefault("omega", 1.0)
    d.setdefault("n_sites", default_n_sites)
    return ModelParams.from_dict(d)


def _fmt(x):
    return f"{x:.17g}"


# --- phase-diagram --------------------------------------------------------

_CRITICAL_LINES = {
    "spin_wave": mf_critical_omega0,
    "dispersive": lambda x: 4.0 * x * x,
    "ansatz": ansatz_critical_omega0,
}


def _phase_point(theory, x, y):
    """(|<sigma^x>|, |<a>|) at g/omega = x, omega0/omega = y."""
    params = ModelParams(omega=1.0, omega0=y, g=x, n_sites=2)
    if theory == "spin_wave":
        sol = solve_mf_params(params)
        sx, a = mf_polarizations(sol, sol.scales, 0)
        return abs(sx), abs(a)
    if theory == "dispersive":
        return ising_magnetization(derive_scales(params).lam_d), 0.0
    if theory == "ansatz":
        state = ansatz_ground_state(params)
        sx, a = ansatz_polarizations(state, 0)
        return abs(sx), abs(a)
    raise ValidationError("theory", f"unknown theory {theory!r}")


def cmd_phase_diagram(args, config, out_dir):
    theories = config.get("theories", ["spin_wave", "dispersive", "ansatz"])
    xs = _grid(config.get("g_over_omega", {"min": 0.05, "max": 0.4, "n": 15}), "g_over_omega")
    ys = _grid(config.get("omega0_over_omega", {"min": 0.05, "max": 2.0, "n": 15}),
               "omega0_over_omega")

    points = [(t, x, y) for t in theories for x in xs for y in ys]
    ed_cfg = config.get("ed", {})
    errors = []

    def compute(item):
        theory, x, y = item
        if theory == "ed":
            params = ModelParams(omega=1.0, omega0=y, g=x,
                                 n_sites=int(ed_cfg.get("n_sites", 2)))
            trunc = TruncationSpec(n_max=int(ed_cfg.get("n_max", 6)))
            try:
                res = ed_ground(params, trunc, n_levels=2, sweep=False)
            except SpinBosonError as exc:
                errors.append({"point": [x, y], "error": str(exc)})
                return theory, x, y, math.nan, math.nan
            return theory, x, y, res.spin_order, res.cavity_order
        sx, a = _phase_point(theory, x, y)
        return theory, x, y, sx, a

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(compute, points))
    else:
        rows = [compute(p) for p in points]

    lines = ["theory,g_over_omega,omega0_over_omega,abs_sx,abs_a"]
    lines += [f"{t},{_fmt(x)},{_fmt(y)},{_fmt(sx)},{_fmt(a)}" for t, x, y, sx, a in rows]
    (out_dir / "phase_diagram.csv").write_text("\n".join(lines) + "\n")

    crit = ["theory,g_over_omega,omega0_over_omega"]
    for name, line in _CRITICAL_LINES.items():
        crit += [f"{name},{_fmt(x)},{_fmt(line(x))}" for x in xs]
    (out_dir / "critical_lines.csv").write_text("\n".join(crit) + "\n")
    out = ["phase_diagram.csv", "critical_lines.csv"]
    if errors:
        (out_dir / "errors.json").write_text(json.dumps(errors, sort_keys=True, indent=2) + "\n")
        out.append("errors.json")
    return out


# --- bands ----------------------------------------------------------------

def cmd_bands(args, config, out_dir):
    params = _params_from(config)
    n_q = int(config.get("n_q", 64))
    convention = BlockConvention(config.get("convention", "main_text"))
    qs = np.linspace(math.pi / n_q, math.pi, n_q)
    theories = [Theory(args.theory)] if args.theory != "all" else list(Theory)
    chunks = []
    for theory in theories:
        scan = band_scan(params, theory, qs=qs, convention=convention)
        csv = scan.to_csv()
        chunks.append(csv if not chunks else csv.split("\n", 1)[1])
    (out_dir / "bands.csv").write_text("".join(chunks))
    return ["bands.csv"]


# --- spectroscopy -----------------------------------------------------------

def cmd_spectroscopy(args, config, out_dir):
    params = _params_from(config, default_n_sites=3)
    probe_cfg = config.get("probe", {"omega_p": 0.1, "g_p": 0.01, "alpha_p": 0.5})
    probe = ProbeParams(**probe_cfg)
    nus = _grid(config.get("nu", {"min": 0.0, "max": 1.5, "n": 751}), "nu")

    if args.engine == "analytic":
        result = analytic_response(params, probe, nus, eta=float(config.get("eta", 0.02)),
                                   convention=BlockConvention(config.get("convention",
                                                                         "main_text")))
    else:
        ed_cfg = config.get("ed", {})
        trunc = TruncationSpec(n_max=int(ed_cfg.get("n_max", 3)),
                               n_max_probe=int(ed_cfg.get("n_max_probe", 6)))
        t_final = float(ed_cfg.get("t_final", 400.0))
        dt = float(ed_cfg.get("dt", 0.5))
        if params.boundary is not Boundary.OPEN:
            params = ModelParams(params.omega, params.omega0, params.g, params.n_sites,
                                 params.coupling_pattern, Boundary.OPEN)
        cache = EdCache(out_dir / "cache")
        key = cache_key("spectroscopy", params.to_dict(), probe_cfg, trunc.to_dict(),
                        t_final, dt)
        times = np.arange(0.0, t_final + 0.5 * dt, dt)
        hit = cache.load(key)
        if hit is not None:
            from .spectroscopy import sine_time_fourier
            print("cache hit: reusing stored trajectory")
            result = sine_time_fourier(np.array(hit["signal"]), np.array(hit["times"]),
                                       nus, metadata=hit["metadata"])
        else:
            result = spectroscopy_experiment(params, probe, trunc, times, nus,
                                             method=ed_cfg.get("method", "auto"))
            # the raw time signals are cached, not the surface, so the nu
            # grid can change without re-running the evolution
            cache.store(key, {"signal": result.metadata["raw_signal"],
                              "times": times.tolist(), "metadata": result.metadata})

    (out_dir / "spectroscopy.csv").write_text(result.to_csv())
    (out_dir / "spectroscopy_peaks.json").write_text(result.peaks_json() + "\n")
    return ["spectroscopy.csv", "spectroscopy_peaks.json"]


# --- exponents --------------------------------------------------------------

def cmd_exponents(args, config, out_dir):
    theory = Theory(config.get("theory", args.theory if args.theory != "all" else "ansatz"))
    g_rel = float(config.get("g_over_omega", 0.01))
    path = make_critical_path(theory, g_rel,
                              n_points=int(config.get("n_points", 25)),
                              closest=float(config.get("closest", 1e-4)),
                              farthest=float(config.get("farthest", 1e-1)))
    fit = fit_exponents(path, theory)
    payload = {"theory": theory.value, "z": fit.z, "z_nu": fit.z_nu,
               "g_over_omega": g_rel, "diagnostics": fit.diagnostics}
    (out_dir / "exponents.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return ["exponents.json"]


# --- circuit ----------------------------------------------------------------

def cmd_circuit(args, config, out_dir):
    payload = {}
    if args.g_rel is not None:
        ratio = critical_cavity_frequency(args.g_rel)
        payload["g_rel"] = args.g_rel
        payload["critical_omega_over_omega0"] = ratio
        print(f"critical cavity frequency: {ratio:.6g} * omega0")
    if "circuit" in config:
        circ = CircuitParams(**config["circuit"])
        eff = renormalize_circuit(circ)
        payload["effective"] = {
            "omega_tilde_rad_s": eff.omega_tilde,
            "z_tilde_ohm": eff.z_tilde,
            "g_tilde_rad_s": eff.g_tilde,
            "omega0_rad_s": eff.omega0,
            "c_tilde_f": eff.c_tilde,
            "g_rel": eff.g_rel,
            "omega0_ratio": eff.omega0_ratio,
        }
        if args.si:
            print(f"loaded resonator: {eff.omega_tilde / (2 * math.pi) / 1e9:.6g} GHz, "
                  f"{eff.z_tilde:.6g} Ohm; coupling {eff.g_tilde / (2 * math.pi) / 1e6:.6g} MHz")
    if not payload:
        raise ValidationError("circuit", "provide --g-rel and/or a 'circuit' config block")
    (out_dir / "circuit.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return ["circuit.json"]


# --- entry point -------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="spinboson",
                                     description="spin-boson lattice magnet toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("phase-diagram", help="order parameters on a coupling grid")
    common(p)

    p = sub.add_parser("bands", help="excitation bands")
    common(p)
    p.add_argument("--theory", default="all",
                   choices=["spin_wave", "dispersive", "ansatz", "all"])

    p = sub.add_parser("spectroscopy", help="probe response surface")
    common(p)
    p.add_argument("--engine", default="analytic", choices=["analytic", "ed"])

    p = sub.add_parser("exponents", help="critical-exponent fits")
    common(p)
    p.add_argument("--theory", default="ansatz",
                   choices=["spin_wave", "dispersive", "ansatz"])

    p = sub.add_parser("circuit", help="circuit parameter mapping")
    common(p)
    p.add_argument("--g-rel", type=float, default=None,
                   help="coupling in units of the qubit splitting")
    p.add_argument("--si", action="store_true", help="print SI-unit summary")
    return parser


_COMMANDS = {
    "phase-diagram": cmd_phase_diagram,
    "bands": cmd_bands,
    "spectroscopy": cmd_spectroscopy,
    "exponents": cmd_exponents,
    "circuit": cmd_circuit,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        outputs = _COMMANDS[args.command](args, config, out_dir)
        manifest = _write_manifest(out_dir, args.command, config, outputs)
        print(f"wrote {', '.join(outputs)} and {manifest.name} to {out_dir}")
        return EXIT_OK
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SpinBosonError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
