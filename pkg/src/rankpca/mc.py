"""Monte-Carlo engine: scenario runs, simulated critical values, null-law checks.

Replicate ``r`` of the radial family ``g`` always draws its spherical
innovations from ``stream(seed, hash(g, k, n), r)``, so tables do not depend
on how replicates are split across chunks or worker processes. All methods
and all perturbation sizes of a family reuse the same innovations.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, asdict
import csv
import io
import json
import math
import os

import numpy as np
from scipy import stats

from . import eigtests, elliptic, estimate, scores
from .errors import ConfigError, DomainError, ParseError
from .rng import stable_hash, stream

PROBLEMS = ("eigvec", "eigval")
CV_MODES = ("asymptotic", "simulated")
CV_METHODS = ("plugin", "oracle")
CHUNK = 250  # fixed replicate blocks; never depends on the worker count
MIN_KS_DRAWS = 500

TABLE_COLUMNS = ("method", "family", "xi", "freq", "N", "n", "alpha", "cv_mode")


@dataclass(frozen=True)
class Scenario:
    """Simulation design; defaults reproduce the published k = 3, n = 100 setting.

    Eigenvector samples are B_xi Lambda^{1/2} eps, with B_xi the rotation by
    ``xi * rot_step`` in the (e1, e2) plane, testing beta0 = e1. Eigenvalue
    samples are (Lambda + diag(val_step * xi, 0, ..., 0))^{1/2} eps, testing
    the proportion hypothesis (p, q).
    """

    problem: str = "eigvec"
    k: int = 3
    n: int = 100
    reps: int = 2500
    families: tuple = ("gaussian", "t:5", "t:3", "t:1")
    xis: tuple = (0, 1, 2, 3)
    Lambda: tuple = (10.0, 4.0, 1.0)
    methods: tuple = ("anderson", "gauss", "tyler", "pseudo", "rank:vdw", "rank:sign")
    seed: int = 0
    alpha: float = 0.05
    cv_modes: tuple = ("asymptotic",)
    cv_reps: int = 100_000
    cv_method: str = "plugin"
    kurtosis: str = "robust"
    p: float = 1 / 3
    q: int = 1
    rot_step: float = math.pi / 12
    val_step: float = 3.0

    def __post_init__(self):
        for name in ("families", "xis", "Lambda", "methods", "cv_modes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "Lambda", tuple(float(x) for x in self.Lambda))
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if int(self.k) != self.k or self.k < 2:
            raise ConfigError("k must be an integer >= 2")
        if self.n <= self.k:
            raise ConfigError("n must exceed k")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if any(int(x) != x or x < 0 for x in self.xis):
            raise ConfigError("xi values must be nonnegative integers")
        lam = np.asarray(self.Lambda)
        if lam.size != self.k or np.any(lam <= 0) or np.any(np.diff(lam) > 0):
            raise ConfigError("Lambda must be k positive values in descending order")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if any(m not in CV_MODES for m in self.cv_modes) or not self.cv_modes:
            raise ConfigError(f"cv_modes must be a non-empty subset of {CV_MODES}")
        if self.kurtosis not in eigtests.KURTOSIS_MODES:
            raise ConfigError(f"kurtosis must be one of {eigtests.KURTOSIS_MODES}")
        if self.cv_method not in CV_METHODS:
            raise ConfigError(f"cv_method must be one of {CV_METHODS}")
        if "simulated" in self.cv_modes and self.cv_reps < 1000:
            raise ConfigError("cv_reps must be >= 1000")
        for fam in self.families:
            elliptic.parse_family(fam, self.k)
        for m in self.methods:
            parse_method(m, self.problem, self.k)

    def radial_families(self):
        return [elliptic.parse_family(f, self.k) for f in self.families]


def parse_method(tag, problem, k):
    """``name`` or ``rank:<score>``; returns (name, ScoreSpec or None)."""
    name, _, score = str(tag).partition(":")
    allowed = eigtests.EIGVEC_METHODS if problem == "eigvec" else eigtests.EIGVAL_METHODS
    if name not in allowed:
        raise ConfigError(f"method {tag!r} is not available for the {problem} problem")
    if name == "rank":
        if not score:
            raise ConfigError("rank methods need a score, e.g. rank:vdw")
        try:
            return name, scores.parse_score(score, k)
        except ParseError as exc:
            raise ConfigError(str(exc)) from None
    if score:
        raise ConfigError(f"method {name!r} takes no score")
    return name, None


def rotation(k, angle):
    B = np.eye(k)
    c, s = math.cos(angle), math.sin(angle)
    B[:2, :2] = [[c, -s], [s, c]]
    return B


def innovations(family, n, reps, seed, start=0):
    """eps[r] for replicate indices start..start+reps-1, shape (reps, n, k)."""
    key = stable_hash((family.label, family.k, n))
    out = np.empty((reps, n, family.k))
    for i in range(reps):
        g = stream(seed, key, start + i)
        U = elliptic.sample_spherical_signs(g, n, family.k)
        out[i] = elliptic.sample_distances(g, n, family)[:, None] * U
    return out


def _design(s, eps, xi):
    lam = np.asarray(s.Lambda)
    if s.problem == "eigvec":
        A = rotation(s.k, xi * s.rot_step) * np.sqrt(lam)
        return eps @ A.T
    shift = np.zeros(s.k)
    shift[0] = s.val_step * xi
    return eps * np.sqrt(lam + shift)


def _statistics(s, X):
    """Statistic arrays for every method on a batch; NaN marks infeasible samples."""
    est = estimate.hr_tyler(X)
    out = {}
    if s.problem == "eigvec":
        b0 = np.eye(s.k)[0]
        for tag in s.methods:
            name, K = parse_method(tag, s.problem, s.k)
            if name == "anderson":
                out[tag] = eigtests.q_anderson_stat(X, b0)
            elif name == "gauss":
                out[tag] = eigtests.q_gaussian_stat(X, b0)
            elif name == "tyler":
                out[tag] = eigtests.q_tyler_stat(X, b0, s.kurtosis, est)
            elif name == "pseudo":
                out[tag] = eigtests.q_pseudo_gaussian_stat(X, b0, s.kurtosis, est)
            else:
                out[tag] = eigtests.q_rank_stat(X, b0, K, est=est)
    else:
        for tag in s.methods:
            name, K = parse_method(tag, s.problem, s.k)
            if name == "anderson":
                out[tag] = eigtests.t_anderson_stat(X, s.p, s.q)
            elif name == "davis":
                out[tag] = eigtests.t_davis_stat(X, s.p, s.q, s.kurtosis, est)
            else:
                out[tag] = eigtests.t_rank_stat(X, s.p, s.q, K, est=est, infeasible="nan")
    return out


def _chunk_job(args):
    s, fam_spec, start, stop = args
    fam = elliptic.parse_family(fam_spec, s.k)
    eps = innovations(fam, s.n, stop - start, s.seed, start)
    return {xi: _statistics(s, _design(s, eps, xi)) for xi in s.xis}


def simulate_critical_values(Ks, problem, k, n, M, alpha=0.05, seed=0, lam0=None, p=1 / 3, q=1,
                             method="plugin", family=None):
    """Simulated critical values for several scores on common samples.

    ``method='plugin'`` simulates the statistic actually used by the test
    (ranks and signs of residuals at the HR/Tyler estimate) on samples from
    the null with the radial ``family`` (Gaussian by default). ``'oracle'``
    simulates the exact-residual statistic, whose law is the same for every
    radial density. Lower alpha-quantile for ``eigval``, upper for ``eigvec``.
    """
    if M < 1000:
        raise DomainError(f"need M >= 1000 replications, got {M}")
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    level = alpha if problem == "eigval" else 1.0 - alpha
    Ks = list(Ks)
    if method == "plugin":
        key = stable_hash(("critval-plugin", problem, k, n))
        draws = eigtests.plugin_null_draws(Ks, problem, k, n, M, stream(seed, key), lam0=lam0,
                                           p=p, q=q, family=family)
    elif method == "oracle":
        draws = np.array([
            eigtests.null_rank_draws(K, problem, k, n, M,
                                     stream(seed, stable_hash(("critval", K.label, problem, k, n))),
                                     lam0=lam0, p=p, q=q)
            for K in Ks])
    else:
        raise DomainError(f"unknown critical-value method {method!r}; expected {CV_METHODS}")
    return {K.label: float(np.quantile(d, level)) for K, d in zip(Ks, draws)}


def simulate_critical_value(K, problem, k, n, M, alpha=0.05, seed=0, lam0=None, p=1 / 3, q=1,
                            method="plugin", family=None):
    """Single-score version of ``simulate_critical_values``."""
    return simulate_critical_values([K], problem, k, n, M, alpha, seed, lam0, p, q,
                                    method, family)[K.label]


def _critical_values(s):
    """(method, cv_mode) -> critical value, in the direction of rejection."""
    out = {}
    ranked = {}
    for tag in s.methods:
        name, K = parse_method(tag, s.problem, s.k)
        if s.problem == "eigvec":
            out[tag, "asymptotic"] = stats.chi2.isf(s.alpha, s.k - 1)
        else:
            out[tag, "asymptotic"] = stats.norm.ppf(s.alpha)
        if K is not None:
            ranked[tag] = K
    if ranked and "simulated" in s.cv_modes:
        cvs = simulate_critical_values(list(ranked.values()), s.problem, s.k, s.n, s.cv_reps,
                                       s.alpha, s.seed, lam0=np.asarray(s.Lambda), p=s.p, q=s.q,
                                       method=s.cv_method)
        for tag, K in ranked.items():
            out[tag, "simulated"] = cvs[K.label]
    return out


@dataclass
class RejectionTable:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def cell(self, method, family, xi, cv_mode="asymptotic"):
        for r in self.rows:
            if (r["method"], r["family"], r["xi"], r["cv_mode"]) == (method, family, xi, cv_mode):
                return r["freq"]
        raise KeyError((method, family, xi, cv_mode))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({c: repr(r[c]) if isinstance(r[c], float) else r[c] for c in TABLE_COLUMNS})
        return buf.getvalue()

    def to_json(self):
        return json.dumps({"rows": self.rows, "metadata": self.metadata}, indent=2) + "\n"

    def format(self):
        """Plain-text view, one line per row."""
        lines = [f"{'method':<16}{'family':<10}{'xi':>3}  {'cv':<11}{'freq':>8}"]
        for r in self.rows:
            lines.append(f"{r['method']:<16}{r['family']:<10}{r['xi']:>3}  "
                         f"{r['cv_mode']:<11}{r['freq']:>8.4f}")
        return "\n".join(lines)


def run_scenario(s, methods=None, workers=1):
    """Rejection frequencies for every (method, family, xi, cv mode).

    Infeasible eigenvalue-rank replicates (constrained spectrum outside the
    positive orthant) count as non-rejections and are tallied in the metadata.
    """
    if methods is not None:
        s = Scenario(**(asdict(s) | {"methods": tuple(methods)}))
    if not s.methods:
        raise ConfigError("no methods requested")
    jobs = [(s, fam, a, min(a + CHUNK, s.reps))
            for fam in s.families for a in range(0, s.reps, CHUNK)]
    workers = max(1, min(int(workers), len(jobs)))
    if workers == 1:
        parts = [_chunk_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_chunk_job, jobs))

    crit = _critical_values(s)
    rows, infeasible = [], {}
    for fam in s.families:
        idx = [i for i, j in enumerate(jobs) if j[1] == fam]
        for tag in s.methods:
            for xi in s.xis:
                st = np.concatenate([parts[i][xi][tag] for i in idx])
                bad = np.isnan(st)
                if bad.any():
                    infeasible[f"{tag}|{fam}|{xi}"] = int(bad.sum())
                for mode in s.cv_modes:
                    if (tag, mode) not in crit:
                        continue
                    c = crit[tag, mode]
                    rej = st > c if s.problem == "eigvec" else st < c
                    rows.append({"method": tag, "family": fam, "xi": int(xi),
                                 "freq": float(np.count_nonzero(rej & ~bad)) / s.reps,
                                 "N": s.reps, "n": s.n, "alpha": s.alpha, "cv_mode": mode})
    meta = {"scenario": {k: (list(v) if isinstance(v, tuple) else v)
                         for k, v in asdict(s).items()},
            "critical_values": {f"{t}|{m}": float(v) for (t, m), v in crit.items()},
            "infeasible": infeasible}
    return RejectionTable(rows, meta)


# ---------------------------------------------------------------- configs

def _parse_value(name, raw, default):
    try:
        if isinstance(default, tuple):
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if name == "Lambda":
                return tuple(float(x) for x in items)
            if name == "xis":
                return tuple(int(x) for x in items)
            return tuple(items)
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            if "/" in raw:
                a, b = raw.split("/")
                return float(a) / float(b)
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def parse_config(text):
    """Scenario from flat ``key = value`` lines; ``#`` starts a comment.

    List fields take comma-separated values; ``lambda`` is accepted for
    ``Lambda``. Unknown keys are errors.
    """
    defaults = {f.name: f.default for f in fields(Scenario)}
    aliases = {"lambda": "Lambda", "n_reps": "reps"}
    kw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key = value, got {line!r}", line=lineno, column=1)
        key, raw = (x.strip() for x in line.split("=", 1))
        key = aliases.get(key, key)
        if key not in defaults:
            raise ConfigError(f"unknown config key {key!r} on line {lineno}")
        kw[key] = _parse_value(key, raw, defaults[key])
    return Scenario(**kw)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def default_workers():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


# ---------------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float
    n: int


def _reference_cdf(reference):
    ref = str(reference).strip().lower()
    if ref in ("normal", "stdnormal", "n(0,1)"):
        return stats.norm.cdf
    head, _, df = ref.partition(":")
    if head in ("chi2", "chisquare"):
        try:
            df = float(df)
        except ValueError:
            raise DomainError(f"bad reference {reference!r}") from None
        return stats.chi2(df).cdf
    raise DomainError(f"unknown reference {reference!r}; expected normal or chi2:<df>")


def null_distribution_check(draws, reference):
    """Two-sided one-sample KS test of ``draws`` against ``normal`` or ``chi2:<df>``."""
    x = np.asarray(draws, dtype=float).ravel()
    if x.size < MIN_KS_DRAWS:
        raise DomainError(f"need at least {MIN_KS_DRAWS} draws, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("draws must be finite")
    res = stats.kstest(x, _reference_cdf(reference))
    return KSResult(float(res.statistic), float(res.pvalue), x.size)


def two_sample_check(a, b):
    """Two-sided two-sample KS test (equality of two simulated null laws)."""
    a, b = np.asarray(a, float).ravel(), np.asarray(b, float).ravel()
    if min(a.size, b.size) < MIN_KS_DRAWS:
        raise DomainError(f"need at least {MIN_KS_DRAWS} draws per sample")
    res = stats.ks_2samp(a, b)
    return KSResult(float(res.statistic), float(res.pvalue), a.size + b.size)
