"""Command line interface: config parsing, dispatch, deterministic output.

Config sources are merged in order: built-in defaults, config file,
WEHRLSIM_* environment variables, then --set flags.  All numbers are
serialized with 17 significant digits and LF line endings so identical
configs produce byte-identical CSV files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ParseError, ValidationError, WehrlSimError
from .scenarios import (
    SCENARIOS,
    ScenarioConfig,
    SweepTable,
    compute_exp_params,
    detect_ness,
    resolve_config,
    run_coupling_sweep,
    run_doublewell,
    run_eigen_compare,
    run_lambda_sweep,
    run_low_coupling,
    run_spin_study,
    run_squeeze_sweep,
)

ENV_PREFIX = "WEHRLSIM_"

_INT_KEYS = {
    "n_levels", "kappa", "sample_every", "sweep_points", "ness_window",
    "workers", "n_theta", "n_phi", "n_points", "k_levels",
}
_BOOL_KEYS = {"renormalize_trace"}
_STR_KEYS = {"scenario", "localization_operator"}
_FLOAT_KEYS = {
    "calE", "W", "tau", "mass", "omega", "gamma", "lambda", "beta_bath",
    "beta_init", "zeta", "dt", "t_end", "sweep_min", "sweep_max",
    "zeta_step", "ness_tol", "ness_cap_factor", "half_width", "radius",
    "wavelength", "numerical_aperture", "epsilon", "pressure",
    "gas_temperature", "gas_molecular_mass", "particle_mass",
    "trap_frequency",
}
CONFIG_KEYS = _INT_KEYS | _BOOL_KEYS | _STR_KEYS | _FLOAT_KEYS

# the master-equation coupling is written "lambda" in config files but
# stored on the (python-keyword-safe) field name "Lambda"
_KEY_TO_FIELD = {"lambda": "Lambda"}
_FIELD_TO_KEY = {"Lambda": "lambda"}

TRAJECTORY_COLUMNS = (
    "time", "energy", "S_Q", "S_vN", "dS_U", "dS_th", "dS_lc",
    "Pi_th", "Phi_th", "Pi_lc", "coherence_l1", "fidelity_ref",
    "trace_err", "min_eig",
)
POPULATION_COLUMNS = ("time", "level_index", "probability")

FIGURE_OF = {
    "EigenCompare": "Fig. 1",
    "SpinStudy": "Fig. 2",
    "LambdaSweep": "Fig. 3",
    "DoubleWellIsolated": "Fig. 4",
    "DoubleWellCombined": "Fig. 4",
    "CouplingSweep": "Fig. 5",
    "LowCoupling": "Fig. 6",
    "SqueezeSweep": "Fig. 6",
    "ExpParams": "rate calculator (no figure)",
}

_VERB_SCENARIOS = {
    "simulate": ("SpinStudy", "DoubleWellIsolated", "DoubleWellCombined",
                 "LowCoupling"),
    "sweep": ("LambdaSweep", "CouplingSweep", "SqueezeSweep"),
    "eigs": ("EigenCompare",),
    "expparams": ("ExpParams",),
}


def _cast(key: str, raw: str, where: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _BOOL_KEYS:
            lowered = raw.strip().lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if key in _STR_KEYS:
            return raw.strip()
        return float(raw)
    except ValueError as exc:
        raise ParseError(f"{where}: cannot parse {key} = {raw!r} ({exc})")


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; '#' starts a comment; unknown keys fail."""
    values = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', "
                             f"got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _cast(key, raw, f"{path}:{lineno}")
    return values


def _env_overrides(environ) -> dict:
    values = {}
    for key in sorted(CONFIG_KEYS):
        raw = environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            values[key] = _cast(key, raw, f"environment {ENV_PREFIX}{key.upper()}")
    return values


def _flag_overrides(pairs) -> dict:
    values = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ParseError(f"--set expects key=value, got {pair!r}")
        key, raw = (part.strip() for part in pair.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ParseError(f"--set: unknown key {key!r}")
        values[key] = _cast(key, raw, f"--set {key}")
    return values


def parse_config(path=None, set_pairs=(), environ=None,
                 extra=None) -> ScenarioConfig:
    """Merge defaults, file, environment and flags into a ScenarioConfig."""
    merged = {}
    if path is not None:
        merged.update(read_config_file(path))
    merged.update(_env_overrides(environ if environ is not None else os.environ))
    merged.update(_flag_overrides(set_pairs))
    if extra:
        merged.update(extra)
    kwargs = {_KEY_TO_FIELD.get(key, key): value
              for key, value in merged.items()}
    cfg = ScenarioConfig(**kwargs)
    return resolve_config(cfg)


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.17g" % float(value)


def write_csv(path, columns, rows) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(row[col]) for col in columns))
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_table(path, table: SweepTable) -> None:
    write_csv(path, table.columns, table.rows)


def write_trajectory_csv(path, record) -> None:
    obs = record.observables
    rows = []
    for i, t in enumerate(record.times):
        row = {"time": t}
        for col in TRAJECTORY_COLUMNS[1:]:
            row[col] = obs[col][i]
        rows.append(row)
    write_csv(path, TRAJECTORY_COLUMNS, rows)


def write_populations_csv(path, record) -> None:
    rows = []
    for i, t in enumerate(record.times):
        for level, prob in enumerate(record.populations[i]):
            rows.append({"time": t, "level_index": level,
                         "probability": prob})
    write_csv(path, POPULATION_COLUMNS, rows)


def write_initial_distributions_csv(path, record) -> None:
    columns = ("basis", "level_index", "eigenvalue", "probability")
    rows = []
    for basis_name in ("position", "momentum"):
        eigenvalues, probs = record.initial_distributions[basis_name]
        for level, (x, prob) in enumerate(zip(eigenvalues, probs)):
            rows.append({"basis": basis_name, "level_index": level,
                         "eigenvalue": x, "probability": prob})
    write_csv(path, columns, rows)


def config_snapshot(cfg: ScenarioConfig) -> dict:
    snapshot = {}
    for name, value in vars(cfg).items():
        snapshot[_FIELD_TO_KEY.get(name, name)] = value
    return snapshot


def _write_trajectory_outputs(out_dir, stem, record, outputs,
                              with_initial=False):
    traj = out_dir / f"{stem}_trajectory.csv"
    pops = out_dir / f"{stem}_populations.csv"
    write_trajectory_csv(traj, record)
    write_populations_csv(pops, record)
    outputs += [traj.name, pops.name]
    if with_initial:
        init = out_dir / f"{stem}_initial_distributions.csv"
        write_initial_distributions_csv(init, record)
        outputs.append(init.name)


def run(cfg: ScenarioConfig, out_dir) -> dict:
    """Execute the configured scenario and write its outputs.

    Returns the manifest dictionary (also written to manifest.json).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    outputs = []
    convergence = {}

    if cfg.scenario == "SpinStudy":
        runs = run_spin_study(cfg)
        for branch, record in runs.items():
            _write_trajectory_outputs(out_dir, f"spin_study_{branch}",
                                      record, outputs)
        report = detect_ness(runs["combined"], cfg.ness_window, cfg.ness_tol)
        convergence = {"ness_detected": report.is_ness,
                       "ness_residual": report.residual}
    elif cfg.scenario in ("DoubleWellIsolated", "DoubleWellCombined"):
        isolated = cfg.scenario == "DoubleWellIsolated"
        record = run_doublewell(cfg, isolated=isolated)
        stem = "doublewell_isolated" if isolated else "doublewell_combined"
        _write_trajectory_outputs(out_dir, stem, record, outputs,
                                  with_initial=True)
    elif cfg.scenario == "LowCoupling":
        record = run_low_coupling(cfg)
        _write_trajectory_outputs(out_dir, "low_coupling", record, outputs,
                                  with_initial=True)
    elif cfg.scenario == "LambdaSweep":
        table = run_lambda_sweep(cfg)
        write_table(out_dir / "lambda_sweep.csv", table)
        outputs.append("lambda_sweep.csv")
        convergence = {
            "ness_detected": all(bool(row["is_ness"]) for row in table.rows),
        }
    elif cfg.scenario == "CouplingSweep":
        table = run_coupling_sweep(cfg)
        write_table(out_dir / "coupling_sweep.csv", table)
        outputs.append("coupling_sweep.csv")
    elif cfg.scenario == "SqueezeSweep":
        table = run_squeeze_sweep(cfg)
        write_table(out_dir / "squeeze_sweep.csv", table)
        outputs.append("squeeze_sweep.csv")
    elif cfg.scenario == "EigenCompare":
        tables = run_eigen_compare(cfg)
        names = {"eigenenergies": "eigen_compare.csv",
                 "potential": "potential.csv",
                 "potential_discrete": "potential_discrete.csv"}
        for key, name in names.items():
            write_table(out_dir / name, tables[key])
            outputs.append(name)
    elif cfg.scenario == "ExpParams":
        results = compute_exp_params(cfg)
        payload = dict(results)
        payload["inputs"] = {
            key: getattr(cfg, key) for key in (
                "radius", "wavelength", "numerical_aperture", "epsilon",
                "pressure", "gas_temperature", "gas_molecular_mass",
                "particle_mass", "trap_frequency")
        }
        path = out_dir / "expparams.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        newline="\n")
        outputs.append("expparams.json")
    else:  # pragma: no cover - resolve_config already rejects
        raise ValidationError([f"unknown scenario {cfg.scenario!r}"])

    manifest = {
        "artifact_version": __version__,
        "scenario": cfg.scenario,
        "config": config_snapshot(cfg),
        "outputs": outputs,
        "duration_seconds": time.monotonic() - started,
        "convergence": convergence,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", newline="\n")
    missing = [name for name in outputs if not (out_dir / name).exists()]
    if missing:
        raise WehrlSimError(f"outputs missing after run: {missing}")
    return manifest


def list_scenarios() -> str:
    lines = [f"{name} → {FIGURE_OF[name]}" for name in SCENARIOS]
    return "\n".join(lines)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wehrlsim",
        description="Open-system spin simulator for a harmonic-to-double-well "
                    "trap protocol, with Wehrl-entropy thermodynamics.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_text in (
        ("simulate", "run a trajectory scenario"),
        ("sweep", "run a parameter sweep scenario"),
        ("eigs", "compare spin and continuous eigenenergies"),
        ("expparams", "evaluate the experimental rate calculator"),
    ):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("--config", default=None, help="flat key=value file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a single config key (repeatable)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes for sweep points "
                            "(default: available cores)")
    sub.add_parser("list", help="list scenarios and the figures they feed")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.verb == "list":
        print(list_scenarios())
        return 0
    try:
        extra = {}
        if args.workers is not None:
            extra["workers"] = args.workers
        cfg = parse_config(path=args.config, set_pairs=args.set, extra=extra)
        allowed = _VERB_SCENARIOS[args.verb]
        if cfg.scenario not in allowed:
            explicit = any(pair.split("=", 1)[0].strip() == "scenario"
                           for pair in args.set)
            if args.config is None and not explicit and len(allowed) == 1:
                cfg = parse_config(path=None, set_pairs=args.set,
                                   extra={**extra, "scenario": allowed[0]})
            else:
                raise ValidationError(
                    [f"scenario {cfg.scenario} is not handled by "
                     f"'{args.verb}' (expected one of {', '.join(allowed)})"]
                )
        manifest = run(cfg, args.out)
        print(f"{cfg.scenario}: wrote {len(manifest['outputs'])} file(s) "
              f"to {args.out}")
        return 0
    except WehrlSimError as exc:
        category = getattr(exc, "category", "numerical")
        code = {"config": 2, "numerical": 3, "io": 4}.get(category, 3)
        print(f"error[{category}]: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
