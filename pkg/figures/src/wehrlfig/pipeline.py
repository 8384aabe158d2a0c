"""Render the six standard figure layouts from wehrlsim output files.

The pipeline is a pure function of the CSV/JSON files written by the
simulator CLI: fonts are matplotlib's bundled defaults, SVG ids are
salted with a fixed string, and no timestamps are embedded, so rendering
the same inputs twice produces byte-identical images.

Figure inputs are located by the run-directory names that
``scripts/run_all_scenarios.py`` produces (one subdirectory per
scenario run, each holding the CSVs plus a manifest).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "wehrlfig"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402


class MissingColumnError(RuntimeError):
    pass


class EmptySeriesError(RuntimeError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    figure_id: int
    inputs: dict
    out_dir: Path


@dataclass
class RenderResult:
    figure_id: int
    png: Path
    svg: Path
    n_panels: int
    labels: list = field(default_factory=list)


# run-directory names feeding each figure; optional entries may be
# replaced by an explicit placeholder panel instead of failing the render
FIGURE_INPUTS = {
    1: {"eigs": "eigen_compare"},
    2: {"spin": "spin_study"},
    3: {"sweep": "lambda_sweep"},
    4: {"isolated": "doublewell_isolated", "combined": "doublewell_combined"},
    5: {"sweep": "coupling_sweep"},
    6: {"weak": "low_coupling_weak", "strong": "low_coupling_strong",
        "squeezed": "low_coupling_squeezed", "sweep": "squeeze_sweep"},
}
OPTIONAL_INPUTS = {6: {"squeezed"}}


def load_csv(path, required_columns) -> pd.DataFrame:
    frame = pd.read_csv(path)
    missing = [col for col in required_columns if col not in frame.columns]
    if missing:
        raise MissingColumnError(f"{path}: missing column(s) {missing}")
    if frame.empty:
        raise EmptySeriesError(f"{path}: no data rows")
    return frame


def _label_panels(axes, n_exposed=None):
    labels = []
    for k, ax in enumerate(axes if n_exposed is None else axes[:n_exposed]):
        label = f"({chr(ord('a') + k)})"
        ax.set_title(label, loc="left", fontsize=10)
        labels.append(label)
    return labels


def _placeholder(ax, text):
    ax.text(0.5, 0.5, f"data missing:\n{text}", ha="center", va="center",
            transform=ax.transAxes, fontsize=9, color="0.35")
    ax.set_xticks([])
    ax.set_yticks([])


def _populations_pivot(frame):
    return frame.pivot(index="time", columns="level_index",
                       values="probability")


def _fig_potential_and_spectra(spec):
    eigs_dir = spec.inputs["eigs"]
    pot = load_csv(eigs_dir / "potential.csv", ("time", "x", "v"))
    disc = load_csv(eigs_dir / "potential_discrete.csv", ("time", "x", "v"))
    eig = load_csv(eigs_dir / "eigen_compare.csv",
                   ("time", "level_index", "energy_continuous",
                    "energy_spin"))
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))
    for t, group in pot.groupby("time"):
        axes[0].plot(group["x"], group["v"], label=f"t = {t:g}")
    axes[0].set_xlabel("x")
    axes[0].set_ylabel("potential")
    axes[0].set_ylim(-12, 8)
    axes[0].legend(fontsize=7)
    for t, group in disc.groupby("time"):
        axes[1].plot(group["x"], group["v"], marker="o", ms=2.5, lw=0.8)
    axes[1].set_xlabel("Jx' eigenvalue")
    axes[1].set_ylabel("potential")
    axes[1].set_ylim(-12, 8)
    for level, group in eig.groupby("level_index"):
        group = group.sort_values("time")
        axes[2].plot(group["time"], group["energy_continuous"], "k--", lw=0.9)
        axes[2].plot(group["time"], group["energy_spin"], lw=1.2)
    axes[2].set_xlabel("time")
    axes[2].set_ylabel("eigenenergy")
    labels = _label_panels(axes)
    return fig, 3, labels


TRAJ_COLS = ("time", "energy", "S_Q", "dS_U", "dS_th", "dS_lc",
             "Pi_th", "Phi_th", "Pi_lc", "coherence_l1")


def _fig_spin_study(spec):
    spin = spec.inputs["spin"]
    branches = ("thermal", "localization", "combined")
    pops, trajs = {}, {}
    for branch in branches:
        pops[branch] = _populations_pivot(load_csv(
            spin / f"spin_study_{branch}_populations.csv",
            ("time", "level_index", "probability")))
        trajs[branch] = load_csv(
            spin / f"spin_study_{branch}_trajectory.csv", TRAJ_COLS)
    fig, axes = plt.subplots(2, 3, figsize=(12, 6.4))
    axes = axes.ravel()
    for ax, branch in zip(axes[:3], branches):
        for level in pops[branch].columns:
            ax.plot(pops[branch].index, pops[branch][level],
                    label=f"level {level}")
        ax.set_xlabel("time")
        ax.set_ylabel("population")
        ax.legend(fontsize=6)
    for branch in branches:
        axes[3].plot(trajs[branch]["time"], trajs[branch]["S_Q"],
                     label=branch)
    axes[3].set_xlabel("time")
    axes[3].set_ylabel("Wehrl entropy")
    axes[3].legend(fontsize=7)
    axes[4].plot(trajs["thermal"]["time"], trajs["thermal"]["Pi_th"],
                 label="production (thermal run)")
    axes[4].plot(trajs["thermal"]["time"], trajs["thermal"]["Phi_th"],
                 label="flux (thermal run)")
    axes[4].plot(trajs["localization"]["time"],
                 trajs["localization"]["Pi_lc"],
                 label="production (localization run)")
    axes[4].set_xlabel("time")
    axes[4].set_ylabel("entropy rate")
    axes[4].legend(fontsize=7)
    combined = trajs["combined"]
    for column, label in (("Pi_th", "thermal production"),
                          ("Pi_lc", "localization production"),
                          ("Phi_th", "thermal flux")):
        axes[5].plot(combined["time"], combined[column], label=label)
    axes[5].set_xlabel("time")
    axes[5].set_ylabel("entropy rate")
    axes[5].legend(fontsize=7)
    labels = _label_panels(axes)
    return fig, 6, labels


def _fig_lambda_sweep(spec):
    table = load_csv(spec.inputs["sweep"] / "lambda_sweep.csv",
                     ("sweep_param", "coherence_l1", "fidelity_thermal",
                      "S_Q", "Pi_th", "Phi_th", "Pi_lc",
                      "S_Q_thermal_ref", "S_Q_localized_ref"))
    table = table.sort_values("sweep_param")
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))
    axes[0].semilogx(table["sweep_param"], table["coherence_l1"], "o-")
    axes[0].set_xlabel("localization coupling")
    axes[0].set_ylabel("coherence (l1)")
    axes[1].semilogx(table["sweep_param"], table["S_Q"], "o-",
                     label="Wehrl entropy")
    axes[1].axhline(table["S_Q_thermal_ref"].iloc[0], color="r", ls=":",
                    lw=1, label="thermal state")
    axes[1].axhline(table["S_Q_localized_ref"].iloc[0], color="0.4",
                    ls="-.", lw=1, label="localized state")
    twin = axes[1].twinx()
    twin.semilogx(table["sweep_param"], table["fidelity_thermal"], "s--",
                  color="g", ms=3, label="fidelity to thermal")
    twin.set_ylabel("fidelity")
    axes[1].set_xlabel("localization coupling")
    axes[1].set_ylabel("Wehrl entropy")
    axes[1].legend(fontsize=7, loc="center left")
    for column, label in (("Pi_th", "thermal production"),
                          ("Pi_lc", "localization production"),
                          ("Phi_th", "thermal flux")):
        axes[2].semilogx(table["sweep_param"], table[column], "o-",
                         label=label)
    axes[2].set_xlabel("localization coupling")
    axes[2].set_ylabel("steady entropy rate")
    axes[2].legend(fontsize=7)
    labels = _label_panels(axes)
    return fig, 3, labels


def _fig_double_well(spec):
    runs = {}
    for key, stem in (("isolated", "doublewell_isolated"),
                      ("combined", "doublewell_combined")):
        base = spec.inputs[key]
        runs[key] = {
            "pops": _populations_pivot(load_csv(
                base / f"{stem}_populations.csv",
                ("time", "level_index", "probability"))),
            "traj": load_csv(base / f"{stem}_trajectory.csv", TRAJ_COLS),
        }
    fig, axes = plt.subplots(2, 3, figsize=(12, 6.4))
    axes = axes.ravel()
    for ax, key in ((axes[0], "isolated"), (axes[3], "combined")):
        pops = runs[key]["pops"]
        mesh = ax.pcolormesh(pops.index, pops.columns,
                             pops.to_numpy().T, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="population")
        ax.set_xlabel("time")
        ax.set_ylabel(f"position level ({key})")
    for key, color in (("isolated", "tab:blue"), ("combined", "tab:red")):
        traj = runs[key]["traj"]
        axes[1].plot(traj["time"], traj["energy"], color=color, label=key)
        axes[1].plot(traj["time"], traj["coherence_l1"], color=color,
                     ls="--", lw=1)
        axes[2].plot(traj["time"], traj["S_Q"], color=color, label=key)
        axes[4].plot(traj["time"], traj["dS_U"], color=color, label=key)
    axes[1].set_xlabel("time")
    axes[1].set_ylabel("energy (solid), coherence (dashed)")
    axes[1].legend(fontsize=7)
    axes[2].set_xlabel("time")
    axes[2].set_ylabel("Wehrl entropy")
    axes[2].legend(fontsize=7)
    axes[4].set_xlabel("time")
    axes[4].set_ylabel("unitary entropy rate")
    axes[4].legend(fontsize=7)
    combined = runs["combined"]["traj"]
    for column, label in (("Pi_th", "thermal production"),
                          ("Pi_lc", "localization production"),
                          ("Phi_th", "thermal flux")):
        axes[5].plot(combined["time"], combined[column], label=label)
    axes[5].set_xlabel("time")
    axes[5].set_ylabel("entropy rate")
    axes[5].legend(fontsize=7)
    labels = _label_panels(axes)
    return fig, 6, labels


def _fig_coupling_sweep(spec):
    table = load_csv(spec.inputs["sweep"] / "coupling_sweep.csv",
                     ("sweep_param", "branch", "fidelity_isolated",
                      "coherence_l1", "S_Q"))
    styles = {"thermal": ("r", "--"), "localization": ("purple", "-."),
              "combined": ("b", "-")}
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    twin = axes[0].twinx()
    for branch, group in table.groupby("branch"):
        group = group.sort_values("sweep_param")
        color, ls = styles[branch]
        axes[0].semilogx(group["sweep_param"], group["fidelity_isolated"],
                         color=color, ls=ls, label=branch)
        axes[1].semilogx(group["sweep_param"], group["S_Q"],
                         color=color, ls=ls, label=branch)
        if branch == "combined":
            twin.semilogx(group["sweep_param"], group["coherence_l1"],
                          color="0.5", ls=":", lw=1)
    axes[0].set_xlabel("coupling strength")
    axes[0].set_ylabel("fidelity to isolated final state")
    twin.set_ylabel("coherence (combined)")
    axes[0].legend(fontsize=7)
    axes[1].set_xlabel("coupling strength")
    axes[1].set_ylabel("final Wehrl entropy")
    axes[1].legend(fontsize=7)
    labels = _label_panels(axes)
    return fig, 2, labels


def _fig_low_coupling(spec):
    fig, axes = plt.subplots(2, 3, figsize=(12, 6.4))
    axes = axes.ravel()
    weak_dir = spec.inputs["weak"]
    pops = _populations_pivot(load_csv(
        weak_dir / "low_coupling_populations.csv",
        ("time", "level_index", "probability")))
    mesh = axes[0].pcolormesh(pops.index, pops.columns, pops.to_numpy().T,
                              shading="nearest")
    fig.colorbar(mesh, ax=axes[0], label="population")
    axes[0].set_xlabel("time")
    axes[0].set_ylabel("position level")

    def rate_panel(ax, directory, stem, title):
        traj = load_csv(directory / f"{stem}_trajectory.csv", TRAJ_COLS)
        ax.plot(traj["time"], traj["dS_U"], label="unitary")
        ax.plot(traj["time"], traj["dS_th"] + traj["dS_lc"], ls="--",
                label="dissipative")
        ax.axhline(0.0, color="0.7", lw=0.6)
        ax.set_xlabel("time")
        ax.set_ylabel(f"entropy rate ({title})")
        ax.legend(fontsize=7)

    rate_panel(axes[1], weak_dir, "low_coupling", "weak coupling")
    rate_panel(axes[2], spec.inputs["strong"], "low_coupling",
               "moderate coupling")
    init = load_csv(weak_dir / "low_coupling_initial_distributions.csv",
                    ("basis", "level_index", "eigenvalue", "probability"))
    for basis, group in init.groupby("basis"):
        axes[3].plot(group["eigenvalue"], group["probability"],
                     label=basis)
    axes[3].set_xlabel("quadrature eigenvalue")
    axes[3].set_ylabel("initial probability")
    axes[3].legend(fontsize=7)
    sweep = load_csv(spec.inputs["sweep"] / "squeeze_sweep.csv",
                     ("sweep_param", "energy", "coherence_l1"))
    sweep = sweep.sort_values("sweep_param")
    axes[4].plot(sweep["sweep_param"], sweep["energy"], "o-",
                 label="final energy", ms=3)
    twin = axes[4].twinx()
    twin.plot(sweep["sweep_param"], sweep["coherence_l1"], "s--",
              color="tab:red", ms=3, label="final coherence")
    axes[4].set_xlabel("initial squeezing")
    axes[4].set_ylabel("final energy")
    twin.set_ylabel("final coherence")
    if spec.inputs.get("squeezed") is not None:
        rate_panel(axes[5], spec.inputs["squeezed"], "low_coupling",
                   "squeezed start")
    else:
        _placeholder(axes[5], "squeezed weak-coupling run")
    labels = _label_panels(axes)
    return fig, 6, labels


_BUILDERS = {
    1: _fig_potential_and_spectra,
    2: _fig_spin_study,
    3: _fig_lambda_sweep,
    4: _fig_double_well,
    5: _fig_coupling_sweep,
    6: _fig_low_coupling,
}


def render(spec: FigureSpec) -> RenderResult:
    """Render one figure layout to PNG and SVG."""
    builder = _BUILDERS[spec.figure_id]
    fig, n_panels, labels = builder(spec)
    fig.tight_layout()
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    png = spec.out_dir / f"figure{spec.figure_id}.png"
    svg = spec.out_dir / f"figure{spec.figure_id}.svg"
    fig.savefig(png, dpi=150, metadata={"Software": None})
    fig.savefig(svg, metadata={"Date": None})
    plt.close(fig)
    return RenderResult(spec.figure_id, png, svg, n_panels, labels)


def figure_specs(run_root, out_dir) -> dict[int, FigureSpec]:
    """Locate each figure's input run directories under ``run_root``."""
    run_root = Path(run_root)
    specs = {}
    for figure_id, inputs in FIGURE_INPUTS.items():
        resolved = {}
        for key, run_name in inputs.items():
            directory = run_root / run_name
            if not (directory / "manifest.json").exists():
                directory = None
            resolved[key] = directory
        specs[figure_id] = FigureSpec(figure_id, resolved, Path(out_dir))
    return specs


def render_all(run_root, out_dir):
    """Render every figure whose inputs exist.

    Returns (results, errors): figure id -> RenderResult for the
    rendered ones, figure id -> message for skipped or failed ones.
    Optional inputs get placeholder panels instead of failing.
    """
    results, errors = {}, {}
    for figure_id, spec in figure_specs(run_root, out_dir).items():
        optional = OPTIONAL_INPUTS.get(figure_id, set())
        missing = [key for key, path in spec.inputs.items()
                   if path is None and key not in optional]
        if missing:
            errors[figure_id] = f"missing run(s): {', '.join(missing)}"
            continue
        try:
            results[figure_id] = render(spec)
        except (MissingColumnError, EmptySeriesError, OSError) as exc:
            errors[figure_id] = str(exc)
    return results, errors


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wehrlfig",
        description="Render the six figure layouts from wehrlsim outputs.")
    parser.add_argument("--runs", required=True,
                        help="root directory holding the scenario runs")
    parser.add_argument("--out", default="figures_out",
                        help="directory for the rendered images")
    args = parser.parse_args(argv)
    results, errors = render_all(args.runs, args.out)
    for figure_id in sorted(results):
        result = results[figure_id]
        print(f"figure {figure_id}: {result.png} ({result.n_panels} panels)")
    for figure_id in sorted(errors):
        print(f"figure {figure_id}: skipped ({errors[figure_id]})",
              file=sys.stderr)
    return 0 if results and not errors else (1 if errors else 0)


if __name__ == "__main__":
    sys.exit(main())
