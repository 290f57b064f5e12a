import json
import math

import pytest
from hypothesis import given, strategies as st

from treesilhouette.errors import ConfigError
from treesilhouette.experiments import (
    REGISTRY,
    Check,
    ExperimentConfig,
    evaluate,
    run_experiment,
)

# cheap settings for every registered experiment; verdicts at this scale are not asserted
SMALL = {
    "mean_variance": dict(n=[1, 100, 1000], replicates=2000),
    "clt": dict(n=2000, replicates=500),
    "fixed_point": dict(n=1000, replicates=1000, levels=12),
    "recursion": dict(n=50, replicates=2000),
    "increments": dict(n=1000, replicates=1000, k=2),
    "psi_convergence": dict(replicates=1000, params={"iterations": 12, "window": [3, 10]}),
    "holder": dict(n=64, replicates=2000, params={"moment_replicates": 1000}),
    "dst": dict(n=100, replicates=500, params={"insertions": 5000, "birth_replicates": 500}),
    "height_fill_sanity": dict(n=1000, replicates=100),
    "identities": dict(n=200, replicates=100),
    "zeta_moments": dict(replicates=10_000),
    "mgf_bound": dict(n=100, replicates=2000),
}

REPORT_KEYS = {"experiment", "config", "seed", "metrics", "targets", "verdicts", "pass",
               "elapsed_seconds", "slack"}


def small(name, **extra):
    return ExperimentConfig.from_dict({**SMALL[name], "seed": 11, **extra}, name)


@pytest.fixture(scope="module")
def reports():
    return {name: run_experiment(small(name)) for name in SMALL}


def test_every_experiment_has_small_settings():
    assert set(SMALL) == set(REGISTRY)


class TestConfig:
    @pytest.mark.parametrize("data", [
        {"replicates": 99},
        {"replicates": 1000.0},
        {"seed": -1},
        {"seed": 2**64},
        {"seed": True},
        {"n": 0},
        {"n": [10, 20]},
        {"k": -1},
        {"levels": 65},
        {"tolerances": {"ks": 0.1}},
        {"tolerances": {"mean_z": 0}},
        {"tolerances": {"mean_z": -1.0}},
        {"bogus": 1},
    ])
    def test_rejects(self, data):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(data, "recursion")

    def test_unknown_name(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({}, "no_such_experiment")

    def test_name_mismatch(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"name": "clt"}, "dst")

    def test_name_required(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({})

    @pytest.mark.parametrize("s, t", [("2/3", "1/3"), ("1/2", "1/2"), ("0", "3/2")])
    def test_clt_paths(self, s, t):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"params": {"s": s, "t": t}}, "clt")

    def test_list_of_sizes_only_for_mean_variance(self):
        assert ExperimentConfig.from_dict({"n": [10, 20]}, "mean_variance").n == [10, 20]

    def test_defaults_merge(self):
        cfg = ExperimentConfig.from_dict({"tolerances": {"w1": 0.5}, "params": {"insertions": 10}}, "dst")
        assert cfg.tolerances == {**REGISTRY["dst"].tolerances, "w1": 0.5}
        assert cfg.params["insertions"] == 10 and cfg.params["frozen_size"] == 50
        assert cfg.n == 500

    def test_load(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"name": "zeta_moments", "replicates": 500}))
        assert ExperimentConfig.load(path).replicates == 500

    @pytest.mark.parametrize("text", ["{not json", "[1, 2]"])
    def test_load_bad_file(self, tmp_path, text):
        path = tmp_path / "cfg.json"
        path.write_text(text)
        with pytest.raises(ConfigError):
            ExperimentConfig.load(path, "zeta_moments")

    def test_echo_leaves_out_output(self):
        a = ExperimentConfig.from_dict({"output": "a.json"}, "zeta_moments")
        b = ExperimentConfig.from_dict({"output": "b.json"}, "zeta_moments")
        assert a.echo() == b.echo() and "output" not in a.echo()


class TestCheck:
    @pytest.mark.parametrize("op, metric, target, tol, ok", [
        ("le", 1.05, 1.0, 0.1, True),
        ("le", 1.2, 1.0, 0.1, False),
        ("near", 0.9, 1.0, 0.1, True),
        ("near", 0.85, 1.0, 0.1, False),
        ("floor", 0.01, 0.0, 0.001, True),
        ("floor", 0.0001, 0.0, 0.001, False),
        ("gt", 0.5, 0.0, None, True),
        ("gt", 0.0, 0.0, None, False),
    ])
    def test_ops(self, op, metric, target, tol, ok):
        check = Check("m", op, "tol" if tol is not None else None, target)
        assert check.passes({"m": metric}, {"tol": tol}) is ok

    def test_none_tolerance_is_zero(self):
        assert Check("m", "le").passes({"m": 0.0}, {})
        assert not Check("m", "le").passes({"m": 1e-300}, {})

    def test_nan_fails(self):
        assert not Check("m", "le", "tol").passes({"m": math.nan}, {"tol": 1.0})

    def test_unknown_op(self):
        with pytest.raises(ValueError):
            Check("m", "approx").passes({"m": 0.0}, {})

    @given(st.sampled_from(["le", "near", "floor", "gt"]), st.floats(-10, 10), st.floats(-10, 10),
           st.floats(1e-6, 10), st.floats(1, 100))
    def test_loosening_never_fails_a_pass(self, op, metric, target, tol, factor):
        check = Check("m", op, "tol", target)
        if check.passes({"m": metric}, {"tol": tol}):
            assert check.passes({"m": metric}, check.loosened({"tol": tol}, factor))


class TestReports:
    @pytest.mark.parametrize("name", sorted(SMALL))
    def test_shape(self, reports, name):
        data = json.loads(reports[name].to_json())
        assert set(data) == REPORT_KEYS
        assert data["experiment"] == name and data["seed"] == 11
        assert set(data["verdicts"]) == set(data["targets"])
        assert data["pass"] == all(data["verdicts"].values())
        assert data["elapsed_seconds"] == 0.0
        assert "output" not in data["config"]
        assert data["verdicts"] == evaluate(reports[name].checks, data["metrics"],
                                            small(name).tolerances)

    @pytest.mark.parametrize("name", sorted(SMALL))
    def test_deterministic(self, reports, name):
        assert run_experiment(small(name)).to_json() == reports[name].to_json()

    @pytest.mark.parametrize("name", sorted(SMALL))
    def test_loosening_is_monotone(self, reports, name):
        report, tolerances = reports[name], small(name).tolerances
        for check in report.checks.values():
            looser = evaluate(report.checks, report.metrics, check.loosened(tolerances, 3.0))
            assert all(looser[k] for k, v in report.verdicts.items() if v)

    @pytest.mark.parametrize("name", ["zeta_moments", "recursion"])
    def test_seed_matters(self, reports, name):
        other = run_experiment(small(name, seed=12))
        assert other.metrics != reports[name].metrics

    def test_record_elapsed(self):
        report = run_experiment(small("holder", record_elapsed=True))
        assert report.elapsed_seconds > 0.0
        assert report.config["record_elapsed"] is True

    def test_trailing_newline(self, reports):
        text = reports["zeta_moments"].to_json()
        assert text.endswith("}\n") and not text.endswith("\n\n")

    def test_write(self, reports, tmp_path):
        path = tmp_path / "r.json"
        reports["recursion"].write(path)
        assert path.read_text() == reports["recursion"].to_json()

    def test_dump_pools(self, reports, tmp_path):
        report = reports["recursion"]
        written = report.dump_pools(tmp_path / "pools")
        assert len(written) == len(report.pools) > 0
        for path in written:
            lines = path.read_text().splitlines()
            name = lines[0]
            assert path.name == f"recursion_{name}.csv"
            assert len(lines) - 1 == len(report.pools[name])
            assert [float(v) for v in lines[1:6]] == [float(v) for v in report.pools[name][:5]]


class TestSmallScaleIdentities:
    """Exact identities hold at any scale."""

    @pytest.mark.parametrize("name", ["dst", "increments", "mean_variance", "holder", "mgf_bound"])
    def test_smoke_checks(self, reports, name):
        m = reports[name].metrics
        assert m["smoke_kraft_failures"] == 0 and m["smoke_roundtrip_failures"] == 0

    def test_identities_pass(self, reports):
        report = reports["identities"]
        assert report.passed
        assert all(v == 0 for v in report.metrics.values())

    def test_oracle_mgf(self, reports):
        assert reports["mgf_bound"].verdicts["mgf_zeta_oracle"]

    def test_n_equals_one(self, reports):
        m = reports["mean_variance"].metrics
        assert m["mean[n=1]"] == 1.0 and m["variance[n=1]"] == 0.0
