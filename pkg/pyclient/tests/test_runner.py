import pytest

from hybridsim_client import (BinaryNotFound, MissingResult, RunFailed,
                              build_and_run, fattree, find_cli, load_results)


def quick(app="ecmp-5tuple", seed=1):
    return (fattree(k=4).te(app).seed(seed)
            .traffic_start_s(3).end_s(10).sample_interval_s(0.5))


def test_find_cli_resolves():
    cmd = find_cli()
    assert cmd  # entry point or module fallback


def test_find_cli_explicit_missing():
    with pytest.raises(BinaryNotFound):
        find_cli("/no/such/binary")


def test_build_and_run_produces_resultset(tmp_path):
    rs = build_and_run(quick("hedera"), tmp_path)
    assert rs.label == "fattree-k4-hedera"
    assert len(rs.hosts) == 16
    assert rs.aggregate and rs.aggregate[-1][1] > 0
    assert rs.modes[0] == (0.0, "DES")
    assert "run_wall_s" in rs.report
    assert rs.report["converged_by_traffic_start"] == "yes"
    assert rs.mean_aggregate(from_time=6.0) > 0


def test_invalid_spec_surfaces_cli_error(tmp_path):
    with pytest.raises(RunFailed, match="even"):
        build_and_run(fattree(k=5).te("hedera").end_s(10), tmp_path)


def test_same_builder_twice_identical_rates(tmp_path):
    r1 = build_and_run(quick(seed=9), tmp_path / "a")
    r2 = build_and_run(quick(seed=9), tmp_path / "b")
    assert r1.hosts == r2.hosts
    assert r1.aggregate == r2.aggregate
    assert r1.modes == r2.modes


def test_load_results_missing_file(tmp_path):
    with pytest.raises(MissingResult):
        load_results(tmp_path, "nothing")
