import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankpca import mc, scores
from rankpca.errors import ConfigError, DomainError, ParseError

SMALL = dict(families=("gaussian", "t:1"), xis=(0, 3))


def test_scenario_defaults_and_validation():
    s = mc.Scenario()
    assert (s.k, s.n, s.reps, s.Lambda) == (3, 100, 2500, (10.0, 4.0, 1.0))
    for bad in (dict(problem="x"), dict(n=3), dict(Lambda=(1.0, 2.0, 3.0)), dict(alpha=1.0),
                dict(methods=("davis",)), dict(methods=("rank",)), dict(families=("t:x",)),
                dict(cv_modes=("simulated",), cv_reps=10), dict(kurtosis="median")):
        with pytest.raises((ConfigError, ParseError)):
            mc.Scenario(**bad)


def test_parse_method():
    assert mc.parse_method("anderson", "eigvec", 3) == ("anderson", None)
    name, K = mc.parse_method("rank:tscore:5", "eigval", 3)
    assert name == "rank" and K.label == "tscore:5"
    with pytest.raises(ConfigError):
        mc.parse_method("gauss", "eigval", 3)
    with pytest.raises(ConfigError):
        mc.parse_method("rank:median", "eigvec", 3)


def test_innovations_are_keyed_by_replicate():
    fam = mc.elliptic.parse_family("t:3", 3)
    a = mc.innovations(fam, 20, 6, seed=5)
    b = mc.innovations(fam, 20, 3, seed=5, start=3)
    assert np.array_equal(a[3:], b)
    assert not np.array_equal(a, mc.innovations(fam, 20, 6, seed=6))


def test_run_scenario_reproducible_and_worker_free():
    s = mc.Scenario(**SMALL, reps=300, methods=("anderson", "rank:sign"), seed=3)
    t1 = mc.run_scenario(s, workers=1)
    t2 = mc.run_scenario(s, workers=2)
    assert t1.to_csv() == t2.to_csv()
    assert t1.to_csv() == mc.run_scenario(s, workers=1).to_csv()
    assert len(t1.rows) == 2 * 2 * 2
    assert 0 <= t1.cell("anderson", "t:1", 0) <= 1
    assert t1.cell("rank:sign", "gaussian", 3) > t1.cell("rank:sign", "gaussian", 0)


def test_single_replicate_gives_zero_or_one():
    s = mc.Scenario(reps=1, families=("gaussian",), xis=(0,), methods=("anderson",))
    assert mc.run_scenario(s).rows[0]["freq"] in (0.0, 1.0)


def test_eigval_scenario_and_table_outputs():
    s = mc.Scenario(problem="eigval", reps=30, families=("t:5",), xis=(0, 2),
                    methods=("anderson", "davis", "rank:vdw"), seed=1)
    t = mc.run_scenario(s)
    header = t.to_csv().splitlines()[0]
    assert header == ",".join(mc.TABLE_COLUMNS)
    d = json.loads(t.to_json())
    assert d["rows"] == t.rows
    assert d["metadata"]["scenario"]["problem"] == "eigval"
    assert "rank:vdw|asymptotic" in d["metadata"]["critical_values"]
    assert "rank:vdw" in t.format()
    with pytest.raises(KeyError):
        t.cell("rank:sign", "t:5", 0)


def test_parse_config():
    text = """
    # eigenvalue design
    problem = eigval
    lambda = 10, 4, 1
    families = gaussian, t:1
    xis = 0, 3
    methods = anderson, rank:vdw
    p = 1/3
    n_reps = 500
    cv_modes = asymptotic, simulated
    """
    s = mc.parse_config(text)
    assert s.problem == "eigval" and s.reps == 500 and s.p == pytest.approx(1 / 3)
    assert s.cv_modes == ("asymptotic", "simulated")
    with pytest.raises(ConfigError):
        mc.parse_config("colour = blue")
    with pytest.raises(ConfigError):
        mc.parse_config("n = many")
    with pytest.raises(ParseError):
        mc.parse_config("just words")


@given(st.integers(1, 10_000), st.integers(1, 5))
def test_config_round_trip(reps, n_xi):
    text = f"reps = {reps}\nxis = {', '.join(str(i) for i in range(n_xi))}\n"
    s = mc.parse_config(text)
    assert s.reps == reps and s.xis == tuple(range(n_xi))


def test_critical_values_direction_and_reproducibility():
    K = scores.parse_score("wilcoxon", 3)
    lam = np.array([10.0, 4.0, 1.0])
    a = mc.simulate_critical_value(K, "eigval", 3, 50, 1000, seed=4, lam0=lam, method="oracle")
    b = mc.simulate_critical_value(K, "eigval", 3, 50, 1000, seed=4, lam0=lam, method="oracle")
    assert a == b and a < 0
    up = mc.simulate_critical_value(K, "eigvec", 3, 50, 1000, seed=4, method="oracle")
    assert up > 0
    with pytest.raises(DomainError):
        mc.simulate_critical_value(K, "eigval", 3, 50, 999)
    with pytest.raises(DomainError):
        mc.simulate_critical_value(K, "eigval", 3, 50, 1000, method="bootstrap")


def test_ks_checks():
    g = np.random.default_rng(0)
    z = g.standard_normal(2000)
    assert mc.null_distribution_check(z, "normal").p_value > 0.01
    assert mc.null_distribution_check(g.chisquare(2, 2000), "chi2:2").p_value > 0.01
    assert mc.null_distribution_check(z, "chi2:2").p_value < 1e-6
    assert mc.two_sample_check(z, g.standard_normal(2000)).p_value > 0.01
    with pytest.raises(DomainError):
        mc.null_distribution_check(z[:10], "normal")
    with pytest.raises(DomainError):
        mc.null_distribution_check(z, "cauchy")
