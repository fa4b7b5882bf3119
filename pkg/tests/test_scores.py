import csv
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankpca import elliptic, scores
from rankpca.elliptic import RadialFamily, parse_family
from rankpca.errors import ParseError

TABLE1 = Path(__file__).parent / "data" / "table1_are.csv"
FAMILY_COLUMNS = ["t:5", "t:8", "t:12", "gaussian", "e:2", "e:3", "e:5"]


def _table1_rows():
    with open(TABLE1, newline="") as fh:
        for row in csv.DictReader(fh):
            for fam in FAMILY_COLUMNS:
                yield row["score"], int(row["k"]), fam, float(row[fam])


@pytest.mark.parametrize("score,k,fam,expected", list(_table1_rows()))
def test_are_table(score, k, fam, expected):
    K = scores.parse_score(score, k)
    assert scores.are_ratio(K, parse_family(fam, k)) == pytest.approx(expected, abs=1e-3)


def test_are_anchors():
    assert scores.are_ratio(scores.vdw(2), parse_family("t:5", 2)) == pytest.approx(2.204, abs=5e-4)
    w = scores.parse_score("wilcoxon", 2)
    assert scores.are_ratio(w, parse_family("gaussian", 2)) == pytest.approx(0.844, abs=5e-4)
    sp = scores.parse_score("spearman", 10)
    assert scores.are_ratio(sp, parse_family("t:5", 10)) == pytest.approx(2.001, abs=5e-4)


def test_vdw_score_value():
    assert scores.eval_score(scores.vdw(3), 0.5) == pytest.approx(2.3660, abs=5e-5)


@pytest.mark.parametrize("name,J", [("wilcoxon", 12.0), ("vdw", 15.0), ("sign", 9.0),
                                    ("spearman", 81.0 / 5.0), ("tscore:5", 12.0)])
def test_score_norms_k3(name, J):
    K = scores.parse_score(name, 3)
    assert scores.score_norm(K) == pytest.approx(J, rel=1e-12)
    assert scores.score_norm(K, "quadrature") == pytest.approx(J, rel=1e-7)


@pytest.mark.parametrize("name", ["vdw", "sign", "wilcoxon", "spearman", "tscore:3",
                                  "tscore:1", "power:0.5"])
@pytest.mark.parametrize("k", [2, 3, 5])
def test_scores_integrate_to_k(name, k):
    assert scores.score_mean(scores.parse_score(name, k)) == pytest.approx(k, rel=1e-8)


@pytest.mark.parametrize("k", [2, 3, 4, 6, 10])
def test_vdw_dominates_gaussian_test(k):
    # ARE of van der Waerden against pseudo-Gaussian is at least one for every family tried
    K = scores.vdw(k)
    for spec in ["gaussian", "t:5", "t:8", "t:12", "e:2", "e:3", "e:5", "e:0.5", "t:20"]:
        assert scores.are_ratio(K, parse_family(spec, k)) >= 1.0 - 1e-9


@pytest.mark.parametrize("k", [2, 3, 6])
def test_optimal_score_attains_parametric_efficiency(k):
    fam = parse_family("t:8", k)
    K = scores.density_score(fam)
    assert scores.cross_info(K, fam) == pytest.approx(scores.score_norm(K), rel=1e-12)


@given(st.floats(0.0, 4.0), st.integers(2, 8))
def test_power_score_norm_closed_form(a, k):
    K = scores.power_score(a, k)
    assert scores.score_norm(K) == pytest.approx(k**2 * (a + 1) ** 2 / (2 * a + 1))
    v = scores.score_values(K, 7)
    assert np.all(np.diff(v) >= 0)


def test_parse_score_labels():
    assert scores.parse_score("vdw", 3).label == "vdw"
    assert scores.parse_score("tscore:5", 3).label == "tscore:5"
    assert scores.parse_score("power:1", 3).label == "wilcoxon"
    for bad in ("median", "power:x", "tscore"):
        with pytest.raises(ParseError):
            scores.parse_score(bad, 3)


def test_sign_cross_information():
    # sign cross information is k^2 for every family (the family score integrates to k)
    fam = RadialFamily("powerexp", 3, 2.0)
    K = scores.parse_score("sign", 3)
    Kg = scores.density_score(fam)
    assert scores.cross_info(K, fam) == pytest.approx(3 * elliptic.integrate_unit(
        lambda u: float(scores.eval_score(Kg, u))), rel=1e-9)
