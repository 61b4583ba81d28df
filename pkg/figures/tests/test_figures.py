import math
from pathlib import Path

import numpy as np
import pytest

from figures.bands import align_runs, median_curve, percentile_band
from figures.cli import main as cli_main
from figures.io import SchemaError, read_columns
from figures.plots import RENDERERS, FigureSpec, render

FIXTURES = Path(__file__).parent / "fixtures"

KIND_INPUTS = {
    "fitness_curves": ["summary_run0.csv", "summary_run1.csv"],
    "delta_trajectories": ["deltas_run0.csv", "deltas_run1.csv", "deltas_run2.csv"],
    "delta_bands": ["deltas_run0.csv", "deltas_run1.csv", "deltas_run2.csv"],
    "heat_capacity": ["curves.csv"],
    "scaling": ["scaling_curves.csv"],
    "sensor_modes": ["sensor_modes.csv"],
    "generalizability": ["gamma.csv"],
    "perturbation_decay": ["perturb.csv"],
    "operator_histograms": ["generations.csv"],
    "benchmark_comparison": ["benchmark.csv"],
    "delta_distribution": ["delta_dist.csv"],
}


def spec_for(kind: str, out_dir: Path) -> FigureSpec:
    return FigureSpec(
        kind=kind,
        inputs=[str(FIXTURES / name) for name in KIND_INPUTS[kind]],
        output=str(out_dir / f"{kind}.png"),
    )


def test_every_kind_has_fixture_coverage():
    assert set(KIND_INPUTS) == set(RENDERERS)


@pytest.mark.parametrize("kind", sorted(RENDERERS))
def test_render_all_kinds_from_fixtures(kind, tmp_path):
    out = render(spec_for(kind, tmp_path))
    data = Path(out).read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(data) > 2000


@pytest.mark.parametrize("kind", ["benchmark_comparison", "delta_bands", "heat_capacity"])
def test_rendering_is_deterministic(kind, tmp_path):
    a = Path(render(spec_for(kind, tmp_path))).read_bytes()
    spec = spec_for(kind, tmp_path)
    spec.output = str(tmp_path / f"{kind}_again.png")
    b = Path(render(spec)).read_bytes()
    assert a == b


def test_rendering_does_not_mutate_inputs(tmp_path):
    before = {p.name: p.read_bytes() for p in FIXTURES.glob("*.csv")}
    render(spec_for("benchmark_comparison", tmp_path))
    after = {p.name: p.read_bytes() for p in FIXTURES.glob("*.csv")}
    assert before == after


def test_schema_mismatch_fails_loudly(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("#schema=v2\ngeneration,best_fitness,mean_fitness,median_fitness,delta_topk\n0,1,1,1,\n")
    spec = FigureSpec(kind="fitness_curves", inputs=[str(bad)], output=str(tmp_path / "x.png"))
    with pytest.raises(SchemaError):
        render(spec)
    # CLI exit code 2 with a message
    assert cli_main(["fitness_curves", "--in", str(bad), "--out", str(tmp_path / "x.png")]) == 2


def test_missing_columns_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("#schema=v1\ngeneration,foo\n0,1\n")
    spec = FigureSpec(kind="fitness_curves", inputs=[str(bad)], output=str(tmp_path / "x.png"))
    with pytest.raises(SchemaError):
        render(spec)


def test_unknown_kind_rejected(tmp_path):
    spec = FigureSpec(kind="pie_chart", inputs=["x.csv"], output="y.png")
    with pytest.raises(SchemaError):
        spec.validate()


def test_cli_renders(tmp_path):
    out = tmp_path / "bench.png"
    rc = cli_main(["benchmark_comparison", "--in", str(FIXTURES / "benchmark.csv"),
                   "--out", str(out)])
    assert rc == 0
    assert out.exists()


def quantile_oracle(values, q):
    """Independent longhand quantile with linear interpolation."""
    xs = sorted(float(v) for v in values)
    if len(xs) == 1:
        return xs[0]
    pos = q / 100.0 * (len(xs) - 1)
    lo = int(math.floor(pos))
    hi = int(math.ceil(pos))
    frac = pos - lo
    return xs[lo] * (1.0 - frac) + xs[hi] * frac


def test_percentile_bands_match_quantile_oracle():
    cols = read_columns(FIXTURES / "benchmark.csv")
    sel = (cols["function"] == "sphere") & (cols["algorithm"] == "es")
    grid, curves = align_runs(cols["generation"][sel], cols["normalized_loss"][sel], cols["run"][sel])
    for lo_p, hi_p in ((25.0, 75.0), (15.0, 85.0), (33.0, 67.0)):
        lo_band, hi_band = percentile_band(curves, lo_p, hi_p)
        for k in range(grid.shape[0]):
            assert lo_band[k] == pytest.approx(quantile_oracle(curves[:, k], lo_p), abs=1e-9)
            assert hi_band[k] == pytest.approx(quantile_oracle(curves[:, k], hi_p), abs=1e-9)
    med = median_curve(curves)
    for k in range(grid.shape[0]):
        assert med[k] == pytest.approx(quantile_oracle(curves[:, k], 50.0), abs=1e-9)


def test_align_runs_rejects_ragged_grids():
    x = np.array([0.0, 1.0, 0.0])
    y = np.zeros(3)
    runs = np.array([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        align_runs(x, y, runs)


def test_percentile_band_validation():
    with pytest.raises(ValueError):
        percentile_band(np.zeros((2, 3)), 80.0, 20.0)
    with pytest.raises(ValueError):
        percentile_band(np.zeros(3), 25.0, 75.0)
