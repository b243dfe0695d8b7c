import pytest

from hybridsim_client import (EmptyResults, ResultSet, build_and_run, fattree,
                              plot_rates, plot_timings)

KS = (4, 6, 8)
APPS = ("ecmp-srcdst", "ecmp-5tuple", "hedera")


@pytest.fixture(scope="module")
def matrix(tmp_path_factory):
    """The 9-cell demo matrix: k in {4, 6, 8} x the three TE apps."""
    root = tmp_path_factory.mktemp("matrix")
    results = {}
    for k in KS:
        for app in APPS:
            builder = (fattree(k).te(app).seed(1)
                       .traffic_start_s(3).end_s(10).sample_interval_s(0.5))
            results[(k, app)] = build_and_run(builder, root / f"k{k}-{app}")
    return results


def test_rate_curves_per_k_nonempty(matrix, tmp_path):
    for k in KS:
        path = tmp_path / f"rates-k{k}.png"
        plot_rates([matrix[(k, app)] for app in APPS], path)
        assert path.stat().st_size > 0


def test_timing_bars_across_matrix_nonempty(matrix, tmp_path):
    path = tmp_path / "timings.png"
    plot_timings([matrix[cell] for cell in sorted(matrix)], path)
    assert path.stat().st_size > 0


def test_three_labeled_curves(matrix, tmp_path):
    results = [matrix[(4, app)] for app in APPS]
    assert len({r.label for r in results}) == 3
    path = tmp_path / "k4.png"
    plot_rates(results, path)
    assert path.stat().st_size > 0


def test_empty_results_rejected(tmp_path):
    with pytest.raises(EmptyResults):
        plot_rates([], tmp_path / "x.png")
    with pytest.raises(EmptyResults):
        plot_timings([ResultSet(label="empty")], tmp_path / "y.png")
