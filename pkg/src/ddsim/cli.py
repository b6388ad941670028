"""Command line entry point.

Subcommands:

    ddsim run <config.json> [--out DIR] [--jobs N] [--seed S]
    ddsim validate <config.json>
    ddsim compare <config.json> [--out DIR] [--seed S]

`run` executes the configured mode and writes a manifest, a summary,
and mode-specific data files (delimited text, one header row, LF line
endings, full float precision so reruns are byte-identical).  All
outputs are computed before anything is written, so a failing run
leaves no partial files.  `validate` checks a configuration without
computing.  `compare` propagates an exact tier and evaluates the
closed-form model on the same grid, reporting the worst population
deviation against the perturbative error scale.

Exit codes: 0 success, 2 configuration problem, 3 numerical failure,
4 I/O failure.  Errors also land on stderr as a single JSON object.
Set DDSIM_LOG=DEBUG|INFO|WARNING|ERROR to control log verbosity.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    build_envelope,
    build_gate_spec,
    build_initial_state,
    build_integrator,
    build_pulse_pair,
    build_spectrum_model,
    config_with_overrides,
    load_config,
    sweep_points,
)
from .drive import PulsePair, classify_regime, derive_couplings
from .dynamics import (
    PropagationError,
    check_adiabatic_elimination,
    propagate_averaged,
    propagate_bare,
    propagate_rwa,
)
from .effective import (
    EffectiveEvolution,
    apply,
    diagonal_evolution_check,
    effective_hamiltonian,
    evolution_matrix,
)
from .gates import (
    GateSynthesisError,
    polarization_leakage,
    schedule_stirap,
    synthesize_gate,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_PROPAGATE_FRAMES = {
    "propagate-rwa": "rwa",
    "propagate-averaged": "averaged",
    "propagate-bare": "bare",
}


def _fmt(value) -> str:
    return format(float(value), ".17g")


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex to JSON types."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _qubit_amplitudes(cfg) -> np.ndarray:
    """Normalized (alpha, beta) pair for two-level model evaluation."""
    section = cfg.get("initial_state")
    if section is None:
        return np.array([1.0, 0.0], dtype=complex)
    alpha = complex(section["alpha"][0], section["alpha"][1])
    beta = complex(section["beta"][0], section["beta"][1])
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    if norm < 1e-12:
        raise ConfigError("initial_state: alpha and beta are both zero")
    return np.array([alpha / norm, beta / norm], dtype=complex)


def _gate_matrix_quiet(ev, spectrum, t0, t):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return evolution_matrix(ev, spectrum, t0, t)


# ---------------------------------------------------------------------
# mode runners; each returns {filename_suffix: text}
# ---------------------------------------------------------------------


def _run_propagate(cfg, mode):
    spectrum = build_spectrum_model(cfg)
    pulses = build_pulse_pair(cfg, spectrum)
    settings = build_integrator(cfg)
    frame = _PROPAGATE_FRAMES[mode]
    psi0 = build_initial_state(cfg, spectrum.n_excited, frame=frame)

    summary = {"mode": mode}
    if mode == "propagate-bare":
        traj = propagate_bare(spectrum, pulses, psi0, settings)
    else:
        couplings = derive_couplings(spectrum, pulses)
        regime = classify_regime(couplings)
        leak = polarization_leakage(pulses, regime)
        if mode == "propagate-rwa":
            traj = propagate_rwa(couplings, pulses, psi0, settings)
        else:
            traj = propagate_averaged(couplings, pulses, psi0, settings)
        summary["regime"] = {
            "labels": list(regime.labels),
            "all_off_resonant": regime.all_off_resonant,
        }
        summary["polarization"] = {
            "class": leak.regime_class,
            "gamma_sq": leak.gamma_sq,
            "leakage": leak.leakage,
            "success_weight": leak.success_weight,
        }
        try:
            rep = check_adiabatic_elimination(traj)
            summary["elimination"] = {
                "peak_residual": rep.peak_residual,
                "peak_manifold_population": rep.peak_manifold_population,
                "valid": rep.valid,
            }
        except ValueError as exc:
            logger.info("elimination check skipped: %s", exc)

    pops = traj.populations
    summary["final_populations"] = {
        "p0": float(pops[-1, 0]),
        "p1": float(pops[-1, 1]),
        "manifold": float(np.sum(pops[-1, 2:])),
    }
    summary["peak_manifold_population"] = float(np.max(traj.manifold_population))
    summary["norm_drift"] = traj.norm_drift
    return {"trajectory.csv": traj.csv_text(), "summary.json": _json_text(summary)}


def _run_effective(cfg):
    spectrum = build_spectrum_model(cfg)
    pulses = build_pulse_pair(cfg, spectrum)
    settings = build_integrator(cfg)
    couplings = derive_couplings(spectrum, pulses)
    ham = effective_hamiltonian(couplings, pulses.phi0, pulses.phi1)
    ev = EffectiveEvolution(ham, pulses.envelope0, pulses.envelope1, 0.0, pulses.duration)
    check = diagonal_evolution_check(ev)

    grid = np.linspace(0.0, pulses.duration, settings.save_points)
    rows = []
    for t in grid:
        f0 = float(pulses.envelope0(t))
        f1 = float(pulses.envelope1(t))
        rows.append(
            [t, f0, f1, ev.theta(t), ev.omega(t), ev.E_plus(t), ev.E_minus(t)]
        )
    csv = _csv_text(["t", "f0", "f1", "theta", "omega", "e_plus", "e_minus"], rows)

    gate = _gate_matrix_quiet(ev, spectrum, 0.0, pulses.duration)
    summary = {
        "mode": "effective",
        "lambda0": ham.Lambda0,
        "lambda1": ham.Lambda1,
        "lambda2": complex(ham.Lambda2),
        "mixing_angle": ham.mixing_angle,
        "rabi": ham.rabi,
        "adiabaticity": {
            "max_ratio": check.max_ratio,
            "time_of_max": check.time_of_max,
            "passed": check.passed,
        },
        "gate_matrix": {
            "u00": gate.u00,
            "u01": gate.u01,
            "u10": gate.u10,
            "u11": gate.u11,
            "global_phase": gate.global_phase,
            "adiabatic": gate.adiabatic,
        },
    }
    if "gate" in cfg:
        solution = synthesize_gate(build_gate_spec(cfg), ham, spectrum.delta)
        summary["gate_solution"] = solution.to_dict()
    return {"effective.csv": csv, "summary.json": _json_text(summary)}


def _run_synthesize(cfg):
    spectrum = build_spectrum_model(cfg)
    pulses = build_pulse_pair(cfg, spectrum)
    couplings = derive_couplings(spectrum, pulses)
    regime = classify_regime(couplings)
    leak = polarization_leakage(pulses, regime)
    ham = effective_hamiltonian(couplings, pulses.phi0, pulses.phi1)
    solution = synthesize_gate(build_gate_spec(cfg), ham, spectrum.delta)
    summary = {
        "mode": "synthesize-gate",
        "solution": solution.to_dict(),
        "effective_sums": {
            "lambda0": ham.Lambda0,
            "lambda1": ham.Lambda1,
            "lambda2": complex(ham.Lambda2),
            "mixing_angle": ham.mixing_angle,
            "rabi": ham.rabi,
        },
        "regime_labels": list(regime.labels),
        "polarization": {
            "class": leak.regime_class,
            "gamma_sq": leak.gamma_sq,
            "leakage": leak.leakage,
            "success_weight": leak.success_weight,
        },
    }
    return {"gate.json": _json_text(summary)}


def _run_stirap(cfg):
    spectrum = build_spectrum_model(cfg)
    section = cfg["pulses"]
    duration = section["duration"]
    st = cfg["stirap"]
    base_env = build_envelope(st["envelope"], duration)
    probe = build_pulse_pair(cfg, spectrum)  # validates amplitudes and carriers
    couplings = derive_couplings(spectrum, probe)
    ham = effective_hamiltonian(couplings, probe.phi0, probe.phi1)

    schedule = schedule_stirap(
        st["ordering"], base_env, st["delay"], duration,
        ham=ham, delta_qubit=spectrum.delta,
    )
    try:
        pulses = PulsePair(
            amp0=probe.amp0,
            amp1=probe.amp1,
            envelope0=schedule.envelope0,
            envelope1=schedule.envelope1,
            omega0=probe.omega0,
            omega1=probe.omega1,
            duration=duration,
            phi0=probe.phi0,
            phi1=probe.phi1,
            gamma_y0=probe.gamma_y0,
            gamma_z0=probe.gamma_z0,
            gamma_y1=probe.gamma_y1,
            gamma_z1=probe.gamma_z1,
        )
    except ValueError as exc:
        raise ConfigError(f"stirap envelopes: {exc}") from exc

    settings = build_integrator(cfg)
    psi0 = build_initial_state(cfg, spectrum.n_excited, frame="rwa")
    traj = propagate_rwa(couplings, pulses, psi0, settings)
    pops = traj.populations

    summary = {
        "mode": "stirap",
        "ordering": schedule.ordering,
        "delay": schedule.delay,
        "overlap": schedule.overlap,
        "theta_start": schedule.theta_start,
        "theta_end": schedule.theta_end,
        "omega_tilde": schedule.omega_tilde,
        "residual_phase_plus": schedule.residual_phase_plus,
        "residual_phase_minus": schedule.residual_phase_minus,
        "residual_beat": schedule.residual_beat,
        "final_populations": {
            "p0": float(pops[-1, 0]),
            "p1": float(pops[-1, 1]),
            "manifold": float(np.sum(pops[-1, 2:])),
        },
        "transfer_probability": float(pops[-1, 1]),
        "peak_manifold_population": float(np.max(traj.manifold_population)),
        "norm_drift": traj.norm_drift,
    }
    return {"trajectory.csv": traj.csv_text(), "summary.json": _json_text(summary)}


_SWEEP_COLUMNS = {
    "propagate-rwa": ["p0", "p1", "p_manifold", "norm_drift"],
    "propagate-averaged": ["p0", "p1", "p_manifold", "norm_drift"],
    "propagate-bare": ["p0", "p1", "p_manifold", "norm_drift"],
    "effective": ["p0", "p1", "rabi_uev", "adiabatic"],
}


def _sweep_worker(payload):
    """Evaluate one sweep point; module-level so it pickles for workers."""
    cfg, overrides, sub_mode = payload
    sub_cfg = config_with_overrides(cfg, overrides)
    sub_cfg["mode"] = sub_mode
    if sub_mode == "effective":
        spectrum = build_spectrum_model(sub_cfg)
        pulses = build_pulse_pair(sub_cfg, spectrum)
        couplings = derive_couplings(spectrum, pulses)
        ham = effective_hamiltonian(couplings, pulses.phi0, pulses.phi1)
        ev = EffectiveEvolution(ham, pulses.envelope0, pulses.envelope1, 0.0, pulses.duration)
        gate = _gate_matrix_quiet(ev, spectrum, 0.0, pulses.duration)
        out = apply(gate, _qubit_amplitudes(sub_cfg))
        return [abs(out[0]) ** 2, abs(out[1]) ** 2, ham.rabi, 1.0 if gate.adiabatic else 0.0]

    spectrum = build_spectrum_model(sub_cfg)
    pulses = build_pulse_pair(sub_cfg, spectrum)
    settings = build_integrator(sub_cfg)
    frame = _PROPAGATE_FRAMES[sub_mode]
    psi0 = build_initial_state(sub_cfg, spectrum.n_excited, frame=frame)
    if sub_mode == "propagate-bare":
        traj = propagate_bare(spectrum, pulses, psi0, settings)
    else:
        couplings = derive_couplings(spectrum, pulses)
        if sub_mode == "propagate-rwa":
            traj = propagate_rwa(couplings, pulses, psi0, settings)
        else:
            traj = propagate_averaged(couplings, pulses, psi0, settings)
    pops = traj.populations
    return [
        float(pops[-1, 0]),
        float(pops[-1, 1]),
        float(np.sum(pops[-1, 2:])),
        traj.norm_drift,
    ]


def _run_sweep(cfg, jobs):
    sub_mode = cfg["sweep"]["mode"]
    points = sweep_points(cfg["sweep"])
    axis_paths = [ax["path"] for ax in cfg["sweep"]["axes"]]
    payloads = [(cfg, pt, sub_mode) for pt in points]

    logger.info("sweep: %d points, mode %s, %d worker(s)", len(points), sub_mode, jobs)
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_worker, payloads))
    else:
        results = [_sweep_worker(p) for p in payloads]

    rows = []
    for pt, res in zip(points, results):
        rows.append([v for _, v in pt] + list(res))
    header = axis_paths + _SWEEP_COLUMNS[sub_mode]
    summary = {
        "mode": "sweep",
        "sub_mode": sub_mode,
        "n_points": len(points),
        "axes": cfg["sweep"]["axes"],
    }
    return {"sweep.csv": _csv_text(header, rows), "summary.json": _json_text(summary)}


def _run_compare(cfg):
    spectrum = build_spectrum_model(cfg)
    pulses = build_pulse_pair(cfg, spectrum)
    settings = build_integrator(cfg)
    tier = cfg.get("compare", {}).get("exact_tier", "rwa")
    mode = f"propagate-{tier}"
    frame = _PROPAGATE_FRAMES[mode]
    psi0 = build_initial_state(cfg, spectrum.n_excited, frame=frame)

    couplings = derive_couplings(spectrum, pulses)
    if tier == "rwa":
        traj = propagate_rwa(couplings, pulses, psi0, settings)
    elif tier == "averaged":
        traj = propagate_averaged(couplings, pulses, psi0, settings)
    else:
        traj = propagate_bare(spectrum, pulses, psi0, settings)

    ham = effective_hamiltonian(couplings, pulses.phi0, pulses.phi1)
    ev = EffectiveEvolution(ham, pulses.envelope0, pulses.envelope1, 0.0, pulses.duration)
    psi2 = _qubit_amplitudes(cfg)

    pops = traj.populations
    rows = []
    max_dev = 0.0
    for i, t in enumerate(traj.times):
        gate = _gate_matrix_quiet(ev, spectrum, 0.0, float(t))
        out = apply(gate, psi2)
        p0m, p1m = float(abs(out[0]) ** 2), float(abs(out[1]) ** 2)
        p0e, p1e = float(pops[i, 0]), float(pops[i, 1])
        dev = max(abs(p0e - p0m), abs(p1e - p1m))
        max_dev = max(max_dev, dev)
        rows.append([t, p0e, p1e, float(np.sum(pops[i, 2:])), p0m, p1m, dev])

    ratio = couplings.max_lambda_over_delta
    bound = 5.0 * ratio**2
    check = diagonal_evolution_check(ev)
    summary = {
        "mode": "compare",
        "exact_tier": tier,
        "max_population_deviation": max_dev,
        "coupling_over_detuning": ratio,
        "deviation_bound": bound,
        "within_bound": bool(max_dev <= bound),
        "model_adiabatic": check.passed,
        "norm_drift": traj.norm_drift,
    }
    csv = _csv_text(
        ["t", "p0_exact", "p1_exact", "p_manifold_exact", "p0_model", "p1_model", "deviation"],
        rows,
    )
    return {"compare.csv": csv, "summary.json": _json_text(summary)}


# ---------------------------------------------------------------------
# command plumbing
# ---------------------------------------------------------------------


def _output_prefix(cfg, config_path) -> str:
    return cfg.get("output", {}).get("prefix") or Path(config_path).stem


def _write_outputs(files: dict, out_dir: Path, prefix: str, cfg, elapsed: float, extra=None) -> Path:
    """Write data files plus a manifest; nothing touches disk before this."""
    out_dir.mkdir(parents=True, exist_ok=True)
    named = {f"{prefix}_{suffix}": text for suffix, text in files.items()}
    manifest_name = f"{prefix}_manifest.json"
    manifest = {
        "package": "ddsim",
        "version": __version__,
        "mode": cfg["mode"],
        "config": cfg,
        "outputs": sorted(named) + [manifest_name],
        "elapsed_s": round(elapsed, 6),
    }
    if extra:
        manifest.update(extra)
    for name, text in named.items():
        with open(out_dir / name, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    manifest_path = out_dir / manifest_name
    with open(manifest_path, "w", newline="", encoding="utf-8") as fh:
        fh.write(_json_text(manifest))
    return manifest_path


def _load_with_seed(args) -> dict:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = dict(cfg)
        cfg["seed"] = args.seed
    return cfg


def _cmd_run(args) -> int:
    cfg = _load_with_seed(args)
    mode = cfg["mode"]
    start = time.perf_counter()
    if mode in _PROPAGATE_FRAMES:
        files = _run_propagate(cfg, mode)
    elif mode == "effective":
        files = _run_effective(cfg)
    elif mode == "synthesize-gate":
        files = _run_synthesize(cfg)
    elif mode == "stirap":
        files = _run_stirap(cfg)
    else:
        files = _run_sweep(cfg, args.jobs)
    elapsed = time.perf_counter() - start
    manifest = _write_outputs(files, Path(args.out), _output_prefix(cfg, args.config), cfg, elapsed)
    print(manifest)
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    mode = cfg["mode"]
    # dry-run the builders so semantic problems surface here, not mid-run
    if "spectrum" in cfg:
        spectrum = build_spectrum_model(cfg)
        if "pulses" in cfg:
            pulses = build_pulse_pair(cfg, spectrum)
            build_initial_state(cfg, spectrum.n_excited)
            if mode != "propagate-bare":
                derive_couplings(spectrum, pulses)
    if "integrator" in cfg:
        build_integrator(cfg)
    if "gate" in cfg:
        build_gate_spec(cfg)
    print(json.dumps({"valid": True, "mode": mode}))
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = _load_with_seed(args)
    start = time.perf_counter()
    files = _run_compare(cfg)
    elapsed = time.perf_counter() - start
    manifest = _write_outputs(
        files, Path(args.out), _output_prefix(cfg, args.config), cfg, elapsed,
        extra={"command": "compare"},
    )
    print(manifest)
    return EXIT_OK


def _emit_error(code: int, kind: str, message: str) -> int:
    logger.error("%s: %s", kind, message)
    print(
        json.dumps({"error": {"type": kind, "message": message, "exit_code": code}}),
        file=sys.stderr,
    )
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddsim",
        description="Simulate optical single-qubit control of a double-donor charge qubit.",
        epilog="Set DDSIM_LOG=DEBUG|INFO|WARNING|ERROR to control log verbosity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configuration file")
    p_run.add_argument("config", help="path to a JSON configuration")
    p_run.add_argument("--out", default=".", help="output directory (default: current)")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel workers for sweeps")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a configuration without running it")
    p_val.add_argument("config", help="path to a JSON configuration")
    p_val.set_defaults(func=_cmd_validate)

    p_cmp = sub.add_parser("compare", help="exact propagation vs the closed-form model")
    p_cmp.add_argument("config", help="path to a JSON configuration")
    p_cmp.add_argument("--out", default=".", help="output directory (default: current)")
    p_cmp.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    level_name = os.environ.get("DDSIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level_name, logging.WARNING))

    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        return _emit_error(EXIT_CONFIG, "config", "--jobs must be >= 1")

    try:
        return args.func(args)
    except ConfigError as exc:
        return _emit_error(EXIT_CONFIG, "config", str(exc))
    except (PropagationError, GateSynthesisError) as exc:
        return _emit_error(EXIT_NUMERIC, "numeric", str(exc))
    except ValueError as exc:
        return _emit_error(EXIT_NUMERIC, "numeric", str(exc))
    except OSError as exc:
        return _emit_error(EXIT_IO, "io", str(exc))


if __name__ == "__main__":
    sys.exit(main())
