"""Renderers for the paper-style figure kinds.

Each renderer takes a FigureSpec (input CSV paths, output image path, styling
options) and writes one deterministic image.  Inputs are the simulator's
versioned CSVs; nothing here mutates them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bands import align_runs, median_curve, percentile_band
from .io import SchemaError, read_columns, require

TASK_COLORS = {"simple": "tab:blue", "hard": "tab:orange"}
ALG_COLORS = {"ga": "tab:blue", "es": "tab:red"}


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    output: str
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in RENDERERS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


def _save(fig, spec: FigureSpec) -> None:
    fig.savefig(spec.output, dpi=120, metadata={"Software": "forage-figures"})
    plt.close(fig)


def render_fitness_curves(spec: FigureSpec):
    """Per-run best/median fitness vs generation (one summary.csv per run)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in spec.inputs:
        cols = read_columns(path)
        require(cols, ("generation", "best_fitness", "median_fitness"), path)
        ax.plot(cols["generation"], cols["median_fitness"], lw=1.0, alpha=0.8)
        ax.plot(cols["generation"], cols["best_fitness"], lw=0.8, alpha=0.4, ls="--")
    ax.axhline(2.0, color="k", lw=0.6, ls=":")
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")
    _save(fig, spec)


def render_delta_trajectories(spec: FigureSpec):
    """Top-k mean distance-to-criticality vs generation, colored by the final
    mean fitness of the same genomes (one deltas.csv per run)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    trajectories = []
    for path in spec.inputs:
        cols = read_columns(path)
        require(cols, ("generation", "rank", "fitness", "delta"), path)
        gens = np.unique(cols["generation"])
        mean_delta = np.array([cols["delta"][cols["generation"] == g].mean() for g in gens])
        final_fitness = cols["fitness"][cols["generation"] == gens[-1]].mean()
        trajectories.append((gens, mean_delta, final_fitness))
    fits = np.array([t[2] for t in trajectories])
    lo, hi = float(fits.min()), float(fits.max())
    span = (hi - lo) or 1.0
    cmap = plt.get_cmap("viridis")
    for gens, mean_delta, fit in trajectories:
        ax.plot(gens, mean_delta, color=cmap((fit - lo) / span), lw=1.2)
    ax.axhline(0.0, color="k", lw=0.6, ls=":")
    ax.set_xlabel("generation")
    ax.set_ylabel("delta (log10 c_beta_crit)")
    fig.colorbar(plt.cm.ScalarMappable(cmap=cmap,
                                       norm=plt.Normalize(lo, hi)), ax=ax, label="final fitness")
    _save(fig, spec)


def render_delta_bands(spec: FigureSpec):
    """Median delta trajectory per input group with 15/85 and 33/67 percentile
    shading (each input CSV holds the deltas.csv rows of one run)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    light = spec.options.get("light_band", (15.0, 85.0))
    heavy = spec.options.get("heavy_band", (33.0, 67.0))
    per_run = []
    for path in spec.inputs:
        cols = read_columns(path)
        require(cols, ("generation", "delta"), path)
        gens = np.unique(cols["generation"])
        per_run.append(np.array([cols["delta"][cols["generation"] == g].mean() for g in gens]))
    curves = np.stack(per_run)
    gens = np.unique(read_columns(spec.inputs[0])["generation"])
    for (plo, phi), alpha in ((light, 0.2), (heavy, 0.4)):
        lo_curve, hi_curve = percentile_band(curves, plo, phi)
        ax.fill_between(gens, lo_curve, hi_curve, alpha=alpha, color="tab:green", lw=0)
    ax.plot(gens, median_curve(curves), color="tab:green", lw=1.5)
    ax.set_xlabel("generation")
    ax.set_ylabel("delta")
    _save(fig, spec)


def render_heat_capacity(spec: FigureSpec):
    """Heat-capacity curves over c_beta, one line per genome, peaks marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in spec.inputs:
        cols = read_columns(path)
        require(cols, ("genome_id", "c_beta", "C_H"), path)
        for gid in np.unique(cols["genome_id"]):
            sel = cols["genome_id"] == gid
            x = cols["c_beta"][sel]
            y = cols["C_H"][sel]
            order = np.argsort(x)
            ax.plot(x[order], y[order], lw=0.8, alpha=0.7)
            peak = order[np.argmax(y[order])]
            ax.plot(x[peak], y[peak], "o", ms=3)
    ax.set_xscale("log")
    ax.set_xlabel("c_beta")
    ax.set_ylabel("C_H")
    _save(fig, spec)


def render_scaling(spec: FigureSpec):
    """Median heat-capacity curve per network size (scaling_curves.csv)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    cols = read_columns(spec.inputs[0])
    require(cols, ("network_size", "genome_id", "c_beta", "C_H"), spec.inputs[0])
    for n in np.unique(cols["network_size"]):
        sel = cols["network_size"] == n
        grid, curves = align_runs(cols["c_beta"][sel], cols["C_H"][sel], cols["genome_id"][sel])
        ax.plot(grid, median_curve(curves), lw=1.4, label=f"N={int(n)}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("effective beta")
    ax.set_ylabel("median C_H")
    ax.legend()
    _save(fig, spec)


def render_sensor_modes(spec: FigureSpec):
    """Mean heat-capacity curve per sensor handling mode."""
    fig, ax = plt.subplots(figsize=(6, 4))
    cols = read_columns(spec.inputs[0])
    require(cols, ("sensor_mode", "c_beta", "mean_C_H"), spec.inputs[0])
    for mode in np.unique(cols["sensor_mode"]):
        sel = cols["sensor_mode"] == mode
        x = cols["c_beta"][sel]
        order = np.argsort(x)
        ax.plot(x[order], cols["mean_C_H"][sel][order], lw=1.2, label=str(mode))
    ax.set_xscale("log")
    ax.set_xlabel("c_beta")
    ax.set_ylabel("mean C_H")
    ax.legend()
    _save(fig, spec)


def render_generalizability(spec: FigureSpec):
    """Scatter of the lifespan-extension growth ratio per population."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in spec.inputs:
        cols = read_columns(path)
        require(cols, ("population_id", "gamma", "mean_energy_train", "cluster"), path)
        colors = np.where(cols["cluster"] == 1.0, "tab:red", "tab:blue")
        ax.scatter(cols["mean_energy_train"], cols["gamma"], c=colors, s=24)
    ax.axhline(1.0, color="k", lw=0.6, ls=":")
    ax.set_xlabel("mean energy at training lifespan")
    ax.set_ylabel("generalizability gamma")
    _save(fig, spec)


def render_perturbation_decay(spec: FigureSpec):
    """Mean fitness vs perturbation magnitude with the exponential fit."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in spec.inputs:
        cols = read_columns(path)
        require(cols, ("f_pert", "mean_fitness", "alpha_fit"), path)
        order = np.argsort(cols["f_pert"])
        x = cols["f_pert"][order]
        y = cols["mean_fitness"][order]
        ax.plot(x, y, "o-", ms=4, lw=0.8)
        alpha = cols["alpha_fit"][0]
        if np.isfinite(alpha) and (y > 0).all():
            anchor = y[0]
            ax.plot(x, anchor * np.exp(alpha * x), "k--", lw=0.8,
                    label=f"exp fit, slope {alpha:.2f}")
    ax.set_yscale("log")
    ax.set_xlabel("perturbation magnitude")
    ax.set_ylabel("mean fitness")
    ax.legend()
    _save(fig, spec)


def render_operator_histograms(spec: FigureSpec):
    """Fitness histograms by evolutionary operator over a generation window."""
    cols = read_columns(spec.inputs[0])
    require(cols, ("generation", "agent_id", "fitness", "lineage_op"), spec.inputs[0])
    gen_lo = spec.options.get("gen_lo", float(cols["generation"].min()))
    gen_hi = spec.options.get("gen_hi", float(cols["generation"].max()))
    sel = (cols["generation"] >= gen_lo) & (cols["generation"] <= gen_hi)
    tags = ("copy", "mutate", "mate")
    fig, axes = plt.subplots(1, 3, figsize=(9, 3), sharey=True)
    for ax, tag in zip(axes, tags):
        values = cols["fitness"][sel & (cols["lineage_op"] == tag)]
        if values.size:
            ax.hist(values, bins=20, color="tab:purple", alpha=0.8)
        ax.set_title(tag)
        ax.set_xlabel("fitness")
    axes[0].set_ylabel("count")
    _save(fig, spec)


def render_benchmark_comparison(spec: FigureSpec):
    """Median normalized loss per algorithm with 25/75 percentile bands."""
    cols = read_columns(spec.inputs[0])
    require(cols, ("function", "algorithm", "run", "generation", "normalized_loss"),
            spec.inputs[0])
    lo_p, hi_p = spec.options.get("band", (25.0, 75.0))
    functions = list(dict.fromkeys(cols["function"]))
    fig, axes = plt.subplots(1, len(functions), figsize=(4 * len(functions), 3.2), squeeze=False)
    for ax, fn in zip(axes[0], functions):
        for alg in ("ga", "es"):
            sel = (cols["function"] == fn) & (cols["algorithm"] == alg)
            if not sel.any():
                continue
            grid, curves = align_runs(cols["generation"][sel], cols["normalized_loss"][sel],
                                      cols["run"][sel])
            color = ALG_COLORS[alg]
            lo_curve, hi_curve = percentile_band(curves, lo_p, hi_p)
            ax.fill_between(grid, lo_curve, hi_curve, color=color, alpha=0.25, lw=0)
            ax.plot(grid, median_curve(curves), color=color, lw=1.4, label=alg.upper())
        ax.set_yscale("log")
        ax.set_title(fn)
        ax.set_xlabel("generation")
        ax.legend()
    axes[0][0].set_ylabel("normalized loss")
    _save(fig, spec)


def render_delta_distribution(spec: FigureSpec):
    """Box plot and histogram of the per-run mean delta by task."""
    cols = read_columns(spec.inputs[0])
    require(cols, ("run_id", "task", "delta_mean"), spec.inputs[0])
    groups = {}
    for task in np.unique(cols["task"]):
        groups[str(task)] = cols["delta_mean"][cols["task"] == task]
    fig, (ax_box, ax_hist) = plt.subplots(1, 2, figsize=(8, 3.2))
    labels = sorted(groups)
    ax_box.boxplot([groups[t] for t in labels], tick_labels=labels)
    ax_box.set_ylabel("mean delta of top agents")
    for task in labels:
        ax_hist.hist(groups[task], bins=10, alpha=0.6,
                     color=TASK_COLORS.get(task, "gray"), label=task)
    ax_hist.set_xlabel("mean delta")
    ax_hist.legend()
    _save(fig, spec)


RENDERERS = {
    "fitness_curves": render_fitness_curves,
    "delta_trajectories": render_delta_trajectories,
    "delta_bands": render_delta_bands,
    "heat_capacity": render_heat_capacity,
    "scaling": render_scaling,
    "sensor_modes": render_sensor_modes,
    "generalizability": render_generalizability,
    "perturbation_decay": render_perturbation_decay,
    "operator_histograms": render_operator_histograms,
    "benchmark_comparison": render_benchmark_comparison,
    "delta_distribution": render_delta_distribution,
}


def render(spec: FigureSpec) -> str:
    """Render one figure; returns the output path."""
    spec.validate()
    RENDERERS[spec.kind](spec)
    return spec.output
