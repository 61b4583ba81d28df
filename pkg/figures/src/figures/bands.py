"""Percentile statistics across replicate runs."""

from __future__ import annotations

import numpy as np


def percentile_band(curves: np.ndarray, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise (lo, hi) percentiles over the run axis of an (n_runs,
    n_points) array, with linear interpolation between order statistics."""
    curves = np.asarray(curves, dtype=float)
    if curves.ndim != 2 or curves.shape[0] < 1:
        raise ValueError("need an (n_runs, n_points) array")
    if not 0.0 <= lo <= hi <= 100.0:
        raise ValueError("percentiles must satisfy 0 <= lo <= hi <= 100")
    return (
        np.percentile(curves, lo, axis=0, method="linear"),
        np.percentile(curves, hi, axis=0, method="linear"),
    )


def median_curve(curves: np.ndarray) -> np.ndarray:
    return np.median(np.asarray(curves, dtype=float), axis=0)


def align_runs(x: np.ndarray, y: np.ndarray, runs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stack per-run (x, y) rows into a shared-grid matrix.

    Every run must be logged on the same x grid (the simulator guarantees
    this); returns (grid, curves[n_runs, n_points])."""
    run_ids = np.unique(runs)
    grid = np.unique(x)
    curves = np.empty((run_ids.shape[0], grid.shape[0]))
    for k, rid in enumerate(run_ids):
        sel = runs == rid
        xs = x[sel]
        ys = y[sel]
        order = np.argsort(xs, kind="stable")
        if xs[order].shape != grid.shape or not np.array_equal(xs[order], grid):
            raise ValueError(f"run {rid!r} is not logged on the shared grid")
        curves[k] = ys[order]
    return grid, curves
