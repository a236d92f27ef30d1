import json

import numpy as np
import pytest

from secbeam import ExperimentSpec, SpecError, parse_spec_file, run_experiment, validate_spec
from secbeam.harness import EXPERIMENTS, db_to_linear, linear_to_db


def tiny_spec(**overrides):
    base = dict(
        experiment="power_fraction_broadcast",
        n_tx=4, n_rx=2, n_eve=4, k_users=3,
        p_db_grid=np.array([10.0, 20.0]),
        s_db=5.0, trials=6, seed=42,
    )
    base.update(overrides)
    return ExperimentSpec(**base)


def test_db_helpers_round_trip():
    vals = np.array([0.1, 1.0, 31.6227766])
    assert np.allclose(db_to_linear(linear_to_db(vals)), vals, rtol=1e-12)


def test_parse_spec_file(tmp_path):
    path = tmp_path / "exp.spec"
    path.write_text(
        "# comment line\n"
        "experiment = sinr_broadcast\n"
        "n_tx = 4\nn_rx = 2\nn_eve = 4\nk_users = 3\n"
        "p_db_grid = 0, 10, 20  # inline comment\n"
        "s_db = 5\ntrials = 12\nseed = 9\n"
    )
    spec = parse_spec_file(path)
    assert spec.experiment == "sinr_broadcast"
    assert np.array_equal(spec.p_db_grid, [0.0, 10.0, 20.0])
    assert spec.trials == 12 and spec.seed == 9


@pytest.mark.parametrize("body,fragment", [
    ("experiment = nope\n", "unknown experiment"),
    ("experiment = ber_ml\nwat = 1\n", "unknown key"),
    ("experiment = ber_ml\ntrials = 5\ntrials = 6\n", "duplicate"),
    ("experiment = ber_ml\ntrials = x\n", "bad value"),
    ("experiment = ber_ml\n", "s_db_grid"),
    ("experiment = sinr_broadcast\np_db_grid = 5, 5\ns_db = 5\n",
     "strictly increasing"),
])
def test_parse_rejects_bad_specs(tmp_path, body, fragment):
    path = tmp_path / "bad.spec"
    path.write_text(body)
    with pytest.raises(SpecError, match=fragment):
        parse_spec_file(path)


def test_validate_cites_antenna_requirement():
    spec = tiny_spec(k_users=4)
    problems = validate_spec(spec)
    assert any("K < N_t" in p for p in problems)
    with pytest.raises(SpecError, match="K < N_t"):
        run_experiment(spec)


def test_run_is_deterministic_and_worker_independent():
    spec = tiny_spec()
    t1 = run_experiment(spec, workers=1)
    t2 = run_experiment(spec, workers=2)
    t3 = run_experiment(spec, workers=1)
    assert t1.to_csv() == t2.to_csv() == t3.to_csv()


def test_trials_and_seed_overrides():
    spec = tiny_spec()
    base = run_experiment(spec)
    more = run_experiment(spec, trials=8)
    reseeded = run_experiment(spec, seed=43)
    assert all(r.n_trials == 6 for r in base.rows)
    assert all(r.n_trials == 8 for r in more.rows)
    assert reseeded.to_csv() != base.to_csv()
    assert base.metadata["seed"] == 42 and reseeded.metadata["seed"] == 43


def test_power_fraction_rows_sum_to_one():
    table = run_experiment(tiny_spec())
    by_key = {(r.sweep_db, r.series): r for r in table.rows}
    for sweep in (10.0, 20.0):
        for tag in ("zf", "joint"):
            info = by_key[(sweep, f"{tag}_info")]
            jam = by_key[(sweep, f"{tag}_jam")]
            assert info.mean + jam.mean == pytest.approx(1.0, abs=1e-12)
            assert info.n_infeasible == jam.n_infeasible


def test_infeasible_trials_are_counted_not_dropped():
    spec = tiny_spec(p_db_grid=np.array([-20.0, 20.0]), trials=10)
    table = run_experiment(spec)
    starved = [r for r in table.rows if r.sweep_db == -20.0 and r.series == "zf_info"]
    assert starved[0].n_infeasible == 10
    assert starved[0].n_trials == 10  # averaged in, never excluded
    assert starved[0].mean == pytest.approx(1.0, abs=1e-12)


def test_csv_and_json_contain_identical_numbers():
    table = run_experiment(tiny_spec())
    csv_rows = {}
    lines = table.to_csv().strip().splitlines()
    header = lines[0].split(",")
    for line in lines[1:]:
        parts = dict(zip(header, line.split(",")))
        key = (float(parts["sweep_db"]), parts["series"])
        csv_rows[key] = (float(parts["mean"]), float(parts["stderr"]),
                         int(parts["n_trials"]), int(parts["n_infeasible"]))
    for row in json.loads(table.to_json())["rows"]:
        key = (row["sweep_db"], row["series"])
        assert csv_rows[key] == (row["mean"], row["stderr"],
                                 row["n_trials"], row["n_infeasible"])


def test_ber_rows_pool_bits():
    spec = ExperimentSpec(
        experiment="ber_ml", n_tx=4, n_rx=2, n_eve=4, k_users=3,
        s_db_grid=np.array([0.0, 10.0]), p_db=15.0, n_symbols=5,
        trials=10, seed=7,
    )
    table = run_experiment(spec)
    for row in table.rows:
        assert row.n_bits == 10 * 5 * 3
        assert 0.0 <= row.mean <= 1.0
        expected = np.sqrt(row.mean * (1 - row.mean) / row.n_bits)
        assert row.stderr == pytest.approx(expected, rel=1e-12)
    a = {(r.sweep_db, r.series): r.mean for r in table.rows}
    assert a[(0.0, "eve_ber_an")] >= a[(0.0, "eve_ber_no_an")]
    assert "n_bits" in table.to_csv().splitlines()[0]


def test_multicast_experiment_groups_series_by_target():
    spec = ExperimentSpec(
        experiment="power_fraction_multicast", n_tx=4, n_rx=2, n_eve=4,
        k_users=3, p_db_grid=np.array([10.0]),
        s_db_list=np.array([5.0, 10.0]), trials=3, seed=3,
    )
    table = run_experiment(spec)
    names = {r.series for r in table.rows}
    assert names == {"mc_info_s5", "mc_jam_s5", "mc_info_s10", "mc_jam_s10"}


def test_series_accessor_orders_by_sweep():
    table = run_experiment(tiny_spec())
    x, y = table.series("zf_info")
    assert np.array_equal(x, [10.0, 20.0])
    assert y[0] > y[1]  # information share shrinks as the budget grows
    with pytest.raises(KeyError):
        table.series("nonexistent")


def test_failed_trials_are_reported(monkeypatch, capsys):
    exp = EXPERIMENTS["power_fraction_broadcast"]
    original = exp.trial

    def flaky(cfg, spec, seedseq, suffix=""):
        rec = original(cfg, spec, seedseq, suffix=suffix)
        if seedseq.spawn_key[-1] == 2:
            raise RuntimeError("synthetic failure")
        return rec

    monkeypatch.setattr(exp, "trial", flaky)
    table = run_experiment(tiny_spec(p_db_grid=np.array([10.0])))
    err = capsys.readouterr().err
    assert "1 trial(s) failed" in err
    assert table.metadata["n_failed"] == 1
    assert all(r.n_trials == 5 for r in table.rows)
