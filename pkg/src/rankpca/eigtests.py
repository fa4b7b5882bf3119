"""Test statistics for principal directions and eigenvalue proportions.

Eigenvector null:  the first principal direction equals ``beta0`` (up to sign).
Eigenvalue null:   sum_{j>q} lambda_j / sum_j lambda_j = p, against "< p".

Every statistic has a batched core (``*_stat``) operating on ``(..., n, k)``
arrays, used by the Monte-Carlo engine, and a report-producing wrapper for a
single sample. Eigenvector tests reject for large values against chi2_{k-1};
eigenvalue tests reject for values below the normal alpha-quantile.
"""

from dataclasses import asdict, dataclass, field
import math
import warnings

import numpy as np
from scipy import stats

from . import elliptic, estimate, matops, scores
from .errors import DomainError, InternalConsistencyError, DegenerateDataError

EIGVEC_METHODS = ("anderson", "gauss", "pseudo", "tyler", "rank")
EIGVAL_METHODS = ("anderson", "davis", "rank")
SMALL_N_WARNING = 250


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class

    method: str
    statistic: float
    reference: str
    p_value: float
    alpha: float
    reject: bool
    n: int
    k: int
    nuisance: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def check_beta0(beta0, k=None, tol=1e-12):
    b = np.asarray(beta0, dtype=float).ravel()
    if k is not None and b.size != k:
        raise DomainError(f"beta0 has length {b.size}, expected {k}")
    if abs(np.linalg.norm(b) - 1.0) > tol:
        raise DomainError("beta0 must have unit norm")
    return b


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _chi2_report(method, stat, X, alpha, nuisance):
    n, k = X.shape
    p = float(stats.chi2.sf(stat, k - 1))
    crit = stats.chi2.isf(alpha, k - 1)
    return TestReport(method, float(stat), f"chi2({k - 1})", p, alpha, bool(stat > crit),
                      n, k, nuisance)


def _normal_report(method, stat, X, alpha, nuisance):
    n, k = X.shape
    p = float(stats.norm.cdf(stat))
    return TestReport(method, float(stat), "normal-lower", p, alpha,
                      bool(stat < stats.norm.ppf(alpha)), n, k, nuisance)


def _single(X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DomainError("expected a single (n, k) sample")
    n, k = X.shape
    if n <= k:
        raise DomainError(f"need n > k observations, got n={n}, k={k}")
    return X


def _sample_spectrum(X):
    _, S = estimate.mean_cov(X)
    lam, beta = matops.symmetric_eigen(S)
    if np.any(lam[..., -1] <= 0):
        raise DegenerateDataError("sample covariance is singular")
    return S, lam, beta


def _proj(beta, S, b0):
    """beta_j' S b0 for every column j."""
    return np.einsum("...ij,...ik,k->...j", beta, S, b0)


# ---------------------------------------------------------------- eigenvectors

def q_anderson_stat(X, beta0, form="spectral"):
    """(n/l1) sum_{j>=2} (lj - l1)^2 / lj^3 (bj' S b0)^2.

    ``form='inverse'`` evaluates n [l1 b0' S^-1 b0 + b0' S b0 / l1 - 2].
    """
    n = X.shape[-2]
    S, lam, beta = _sample_spectrum(X)
    if form == "inverse":
        Sinv_b = np.linalg.solve(S, np.broadcast_to(beta0, S.shape[:-1])[..., None])[..., 0]
        a = np.einsum("k,...k->...", beta0, Sinv_b)
        b = np.einsum("k,...kl,l->...", beta0, S, beta0)
        return n * (lam[..., 0] * a + b / lam[..., 0] - 2.0)
    t = _proj(beta, S, beta0)[..., 1:]
    l1 = lam[..., :1]
    return n / l1[..., 0] * np.sum((lam[..., 1:] - l1) ** 2 / lam[..., 1:] ** 3 * t**2, axis=-1)


def q_gaussian_stat(X, beta0):
    """(n/l1) sum_{j>=2} lj^-1 (bt_j' S b0)^2, bt the Gram-Schmidt frame through b0."""
    n = X.shape[-2]
    S, lam, beta = _sample_spectrum(X)
    bt = estimate.constrained_eigvecs(beta, beta0)
    t = _proj(bt, S, beta0)[..., 1:]
    return n / lam[..., 0] * np.sum(t**2 / lam[..., 1:], axis=-1)


KURTOSIS_MODES = ("moment", "robust")


def kappa_hat(X, kurtosis="moment", est=None):
    """Kurtosis estimate used by the kurtosis-corrected Gaussian tests.

    ``moment``: distances at (mean, S); ``robust``: distances at
    (theta_HR, V_Tyler), reusing ``est`` when given.
    """
    if kurtosis == "moment":
        kap = estimate.kurtosis_hat(X)
    elif kurtosis == "robust":
        kap = estimate.robust_kurtosis_hat(X, est=est)
    else:
        raise DomainError(f"unknown kurtosis estimator {kurtosis!r}; expected {KURTOSIS_MODES}")
    if np.any(~(kap > -1.0)):
        raise DegenerateDataError("estimated kurtosis is <= -1")
    return kap


def q_tyler_stat(X, beta0, kurtosis="moment", est=None):
    return q_anderson_stat(X, beta0) / (1.0 + kappa_hat(X, kurtosis, est))


def q_pseudo_gaussian_stat(X, beta0, kurtosis="moment", est=None):
    return q_gaussian_stat(X, beta0) / (1.0 + kappa_hat(X, kurtosis, est))


def signed_rank_matrix(U, R, K):
    """S_K = n^-1 sum K(R_i/(n+1)) U_i U_i'."""
    n = U.shape[-2]
    w = scores.score_values(K, n)[R - 1]
    return np.einsum("...n,...ni,...nj->...ij", w, U, U) / n


def _q_rank_from_SK(SK, beta0, frame, K):
    n_factor = SK.shape[-1] * (SK.shape[-1] + 2.0) / scores.score_norm(K)
    t = _proj(frame, SK, beta0)[..., 1:]
    q1 = np.sum(t**2, axis=-1)
    v = np.einsum("...ij,j->...i", SK, beta0)
    q2 = np.sum(v**2, axis=-1) - (v @ beta0) ** 2
    return n_factor * q1, n_factor * q2


def q_rank_stat(X, beta0, K, est=None, both=False):
    """Signed-rank eigenvector statistic with HR location and Tyler shape.

    Ranks and signs are taken at (theta_HR, bt diag(Lambda_Tyler) bt') with bt
    the Gram-Schmidt frame of the Tyler eigenvectors through ``beta0``.
    """
    n = X.shape[-2]
    est = est if est is not None else estimate.hr_tyler(X)
    bt = estimate.constrained_eigvecs(est.beta, beta0)
    V0 = np.einsum("...ij,...j,...kj->...ik", bt, est.Lambda, bt)
    sr = estimate.signs_ranks(X, est.theta, V0)
    SK = signed_rank_matrix(sr.U, sr.R, K)
    q1, q2 = _q_rank_from_SK(SK, beta0, bt, K)
    q1, q2 = n * q1, n * q2
    if np.any(np.abs(q1 - q2) > 1e-6 * np.maximum(1.0, np.abs(q1))):
        raise InternalConsistencyError("the two forms of the rank statistic disagree")
    return (q1, q2) if both else q1


def q_rank_oracle_stat(X, beta0, K, theta, V):
    """Rank eigenvector statistic with ranks and signs at a given (theta, V)."""
    n = X.shape[-2]
    sr = estimate.signs_ranks(X, theta, V)
    SK = signed_rank_matrix(sr.U, sr.R, K)
    return n * _q_rank_from_SK(SK, beta0, np.eye(SK.shape[-1]), K)[1]


def parametric_S(X, theta, sigma2, V, f1):
    """S_{theta;f1} = n^-1 sum phi(d_i/sigma)(d_i/sigma) U_i U_i'."""
    sr = estimate.signs_ranks(X, theta, V)
    r = sr.d / math.sqrt(sigma2)
    w = elliptic.optimal_score_phi(f1, r) * r
    return np.einsum("...n,...ni,...nj->...ij", w, sr.U, sr.U) / X.shape[-2]


def _parameter(vartheta):
    theta, sigma2, lam, beta = vartheta
    lam = np.asarray(lam, dtype=float)
    beta = np.asarray(beta, dtype=float)
    V = beta @ np.diag(lam) @ beta.T
    if abs(np.prod(lam) - 1.0) > 1e-8:
        raise DomainError("Lambda must have determinant one")
    return np.asarray(theta, dtype=float), float(sigma2), lam, beta, V


def q_parametric_stat(X, vartheta, f1, beta0, route="score"):
    """Optimal parametric eigenvector statistic at a fully specified parameter.

    ``vartheta = (theta, sigma2, Lambda, beta)``. With ``route='gaussian'``
    (Gaussian f1 only) uses S = a_k/(n sigma2) sum V^{-1/2}(X-theta)(X-theta)'V^{-1/2}.
    """
    theta, sigma2, lam, beta, V = _parameter(vartheta)
    n, k = X.shape[-2:]
    if route == "gaussian":
        if f1.kind != "gaussian":
            raise DomainError("the gaussian route needs a Gaussian f1")
        Z = (X - theta) @ matops.symmetric_power(V, -0.5)
        S = f1.constant / (n * sigma2) * np.swapaxes(Z, -1, -2) @ Z
    else:
        S = parametric_S(X, theta, sigma2, V, f1)
    t = _proj(beta, S, beta0)[..., 1:]
    return n * k * (k + 2.0) / elliptic.fisher_info_shape(f1) * np.sum(t**2, axis=-1)


# ---------------------------------------------------------------- eigenvalues

def _check_null_spectrum(lam, p, q, tol=1e-10):
    c = matops.c_pq(lam.shape[-1], p, q)
    if np.any(np.abs(lam @ c) > tol * np.max(lam)):
        raise DomainError("Lambda does not satisfy the eigenvalue-proportion null")


def t_anderson_stat(X, p, q):
    """sqrt(n) a_pq(L_S)^{-1/2} ((1-p) sum_{j>q} l_j - p sum_{j<=q} l_j)."""
    n = X.shape[-2]
    _, lam, _ = _sample_spectrum(X)
    c = matops.c_pq(lam.shape[-1], p, q)
    return math.sqrt(n) * (lam @ c) / np.sqrt(matops.a_pq(lam, p, q))


def t_davis_stat(X, p, q, kurtosis="moment", est=None):
    return t_anderson_stat(X, p, q) / np.sqrt(1.0 + kappa_hat(X, kurtosis, est))


def _t_from_SK(SK, beta, lam, p, q, J):
    k = lam.shape[-1]
    c = matops.c_pq(k, p, q)
    M = np.einsum("...ji,...jk,...kl->...il", beta, SK, beta)
    dv = np.diagonal(M, axis1=-2, axis2=-1) * lam
    return math.sqrt(k * (k + 2.0) / J) * (dv @ c) / np.sqrt(matops.a_pq(lam, p, q))


def t_rank_stat(X, p, q, K, est=None, infeasible="raise"):
    """Signed-rank eigenvalue statistic with HR location and Tyler shape.

    ``infeasible='nan'`` returns NaN for samples whose constrained spectrum
    estimate leaves the positive orthant (see ``estimate.constrained_eigvals``).
    """
    n = X.shape[-2]
    est = est if est is not None else estimate.hr_tyler(X)
    lam = estimate.constrained_eigvals(est.Lambda, p, q, infeasible=infeasible)
    bad = np.isnan(lam[..., 0])
    lam_ok = np.where(bad[..., None], 1.0, lam)
    V0 = np.einsum("...ij,...j,...kj->...ik", est.beta, lam_ok, est.beta)
    sr = estimate.signs_ranks(X, est.theta, V0)
    SK = signed_rank_matrix(sr.U, sr.R, K)
    t = math.sqrt(n) * _t_from_SK(SK, est.beta, lam_ok, p, q, scores.score_norm(K))
    return np.where(bad, np.nan, t)


def t_rank_oracle_stat(X, p, q, K, theta, V):
    """Rank eigenvalue statistic at a given null (theta, V)."""
    n = X.shape[-2]
    lam, beta = matops.symmetric_eigen(V)
    _check_null_spectrum(lam, p, q)
    sr = estimate.signs_ranks(X, theta, V)
    SK = signed_rank_matrix(sr.U, sr.R, K)
    return math.sqrt(n) * _t_from_SK(SK, beta, lam, p, q, scores.score_norm(K))


def t_parametric_stat(X, vartheta, f1, p, q):
    """Optimal parametric eigenvalue statistic at a null parameter value."""
    theta, sigma2, lam, beta, V = _parameter(vartheta)
    _check_null_spectrum(lam, p, q)
    n = X.shape[-2]
    S = parametric_S(X, theta, sigma2, V, f1)
    return math.sqrt(n) * _t_from_SK(S, beta, lam, p, q, elliptic.fisher_info_shape(f1))


def null_rank_draws(K, problem, k, n, reps, rng, lam0=None, p=1 / 3, q=1, chunk=2000):
    """Exact finite-n null draws of the oracle rank statistics.

    At the true parameter the signs are uniform on the sphere and the ranks
    a uniform permutation, independent of each other, whatever the radial
    density. For the eigenvalue problem the law depends on the null spectrum
    ``lam0`` (defaults to ``default_null_spectrum(k, p, q)``).
    """
    J = scores.score_norm(K)
    w_all = scores.score_values(K, n)
    out = np.empty(reps)
    if problem == "eigval":
        lam0 = default_null_spectrum(k, p, q) if lam0 is None else np.asarray(lam0, float)
        lam0 = lam0 / np.exp(np.mean(np.log(lam0)))
        _check_null_spectrum(lam0, p, q)
        c = matops.c_pq(k, p, q)
        scale = math.sqrt(n * k * (k + 2.0) / J) / math.sqrt(matops.a_pq(lam0, p, q))
    elif problem != "eigvec":
        raise DomainError(f"unknown problem {problem!r}")
    for start in range(0, reps, chunk):
        m = min(chunk, reps - start)
        U = elliptic.sample_spherical_signs(rng, (m, n), k)
        w = w_all[rng.permuted(np.broadcast_to(np.arange(n), (m, n)), axis=1)]
        if problem == "eigval":
            diag = np.einsum("bn,bnj->bj", w, U**2) / n
            out[start:start + m] = scale * (diag * lam0) @ c
        else:
            v = np.einsum("bn,bn,bnj->bj", w, U[..., 0], U) / n
            out[start:start + m] = n * k * (k + 2.0) / J * np.sum(v[:, 1:] ** 2, axis=1)
    return out


def plugin_null_draws(Ks, problem, k, n, reps, rng, lam0=None, p=1 / 3, q=1, family=None,
                      chunk=2500):
    """Null draws of the estimated-parameter rank statistics, one row per score.

    Samples are drawn at theta = 0, beta = I and the null spectrum ``lam0``
    from the radial ``family`` (Gaussian by default); every score in ``Ks``
    is evaluated on the same samples. For the eigenvalue problem, samples
    whose constrained spectrum is infeasible are returned as +inf: they lie
    in the upper tail and never affect a lower-tail quantile below 1/2.
    """
    Ks = list(Ks)
    family = family if family is not None else elliptic.RadialFamily("gaussian", k)
    if family.k != k:
        raise DomainError("radial family dimension differs from k")
    if problem == "eigval":
        lam0 = default_null_spectrum(k, p, q) if lam0 is None else np.asarray(lam0, float)
        lam0 = lam0 / np.exp(np.mean(np.log(lam0)))
        _check_null_spectrum(lam0, p, q)
    elif problem == "eigvec":
        lam0 = np.arange(k, 0, -1.0) if lam0 is None else np.asarray(lam0, float)
        if np.any(np.diff(lam0) >= 0):
            raise DomainError("eigenvector null spectrum must be strictly descending")
    else:
        raise DomainError(f"unknown problem {problem!r}")
    b0 = np.eye(k)[0]
    out = np.empty((len(Ks), reps))
    for start in range(0, reps, chunk):
        m = min(chunk, reps - start)
        U = elliptic.sample_spherical_signs(rng, (m, n), k)
        X = elliptic.sample_distances(rng, (m, n), family)[..., None] * U * np.sqrt(lam0)
        est = estimate.hr_tyler(X)
        for i, K in enumerate(Ks):
            if problem == "eigvec":
                v = q_rank_stat(X, b0, K, est=est)
            else:
                v = t_rank_stat(X, p, q, K, est=est, infeasible="nan")
                v = np.where(np.isnan(v), np.inf, v)
            out[i, start:start + m] = v
    return out


def default_null_spectrum(k, p=1 / 3, q=1):
    """Det-1 null spectrum obtained by projecting (k, k-1, ..., 1) onto the null."""
    return estimate.constrained_eigvals(np.arange(k, 0, -1.0), p, q)


# ---------------------------------------------------------------- reports

def q_anderson(X, beta0, alpha=0.05):
    X = _single(X)
    b0 = check_beta0(beta0, X.shape[1])
    _, lam, _ = _sample_spectrum(X)
    return _chi2_report("anderson", q_anderson_stat(X, b0), X, alpha,
                        {"theta": X.mean(0).tolist(), "Lambda_S": lam.tolist()})


def q_gaussian(X, beta0, alpha=0.05):
    X = _single(X)
    b0 = check_beta0(beta0, X.shape[1])
    _, lam, _ = _sample_spectrum(X)
    return _chi2_report("gauss", q_gaussian_stat(X, b0), X, alpha,
                        {"theta": X.mean(0).tolist(), "Lambda_S": lam.tolist()})


def q_pseudo_gaussian(X, beta0, alpha=0.05, variant="pseudo", kurtosis="moment"):
    """Kurtosis-corrected Gaussian test; ``variant='tyler'`` corrects Anderson's statistic."""
    X = _single(X)
    b0 = check_beta0(beta0, X.shape[1])
    kap = float(kappa_hat(X, kurtosis))
    if variant == "pseudo":
        stat = q_gaussian_stat(X, b0) / (1.0 + kap)
    elif variant == "tyler":
        stat = q_anderson_stat(X, b0) / (1.0 + kap)
    else:
        raise DomainError(f"unknown variant {variant!r}")
    _, lam, _ = _sample_spectrum(X)
    return _chi2_report(variant, stat, X, alpha,
                        {"theta": X.mean(0).tolist(), "Lambda_S": lam.tolist(), "kappa": kap,
                         "kurtosis": kurtosis})


def q_rank(X, beta0, K, alpha=0.05):
    X = _single(X)
    b0 = check_beta0(beta0, X.shape[1])
    est = estimate.hr_tyler(X)
    stat = float(q_rank_stat(X, b0, K, est=est))
    nuis = est.as_dict() | {"score": K.label}
    return _chi2_report("rank", stat, X, alpha, nuis)


def t_anderson(X, p, q, alpha=0.05):
    X = _single(X)
    _, lam, _ = _sample_spectrum(X)
    return _normal_report("anderson", float(t_anderson_stat(X, p, q)), X, alpha,
                          {"Lambda_S": lam.tolist(), "p": p, "q": q})


def t_davis(X, p, q, alpha=0.05, kurtosis="moment"):
    X = _single(X)
    kap = float(kappa_hat(X, kurtosis))
    _, lam, _ = _sample_spectrum(X)
    stat = float(t_anderson_stat(X, p, q)) / math.sqrt(1.0 + kap)
    return _normal_report("davis", stat, X, alpha,
                          {"Lambda_S": lam.tolist(), "kappa": kap, "kurtosis": kurtosis,
                           "p": p, "q": q})


def t_rank(X, p, q, K, alpha=0.05, cv="asymptotic", cv_reps=100_000, seed=0,
           cv_method="plugin"):
    """Rank eigenvalue test with asymptotic or simulated critical value.

    The simulated reference is taken at the constrained spectrum estimate,
    either from the estimated-parameter statistic on Gaussian samples
    (``cv_method='plugin'``) or from the exact-residual statistic
    (``'oracle'``); the p-value is the simulated lower-tail frequency.
    """
    X = _single(X)
    n, k = X.shape
    est = estimate.hr_tyler(X)
    lam = estimate.constrained_eigvals(est.Lambda, p, q)
    stat = float(t_rank_stat(X, p, q, K, est=est))
    nuis = est.as_dict() | {"Lambda_null": lam.tolist(), "score": K.label, "p": p, "q": q,
                            "cv_mode": cv}
    if cv == "asymptotic":
        if n < SMALL_N_WARNING:
            warnings.warn(f"n={n} < {SMALL_N_WARNING}: asymptotic critical values of the rank "
                          "eigenvalue test tend to overreject; consider cv='simulated'",
                          stacklevel=2)
        return _normal_report("rank", stat, X, alpha, nuis)
    if cv != "simulated":
        raise DomainError(f"unknown critical-value mode {cv!r}")
    from .rng import stream
    if cv_method == "plugin":
        draws = plugin_null_draws([K], "eigval", k, n, cv_reps, stream(seed), lam0=lam,
                                  p=p, q=q)[0]
    elif cv_method == "oracle":
        draws = null_rank_draws(K, "eigval", k, n, cv_reps, stream(seed), lam0=lam, p=p, q=q)
    else:
        raise DomainError(f"unknown critical-value method {cv_method!r}")
    nuis["cv_method"] = cv_method
    crit = float(np.quantile(draws, alpha))
    pval = (1.0 + np.sum(draws <= stat)) / (cv_reps + 1.0)
    nuis["critical_value"] = crit
    return TestReport("rank", stat, f"simulated({cv_reps})", float(pval), alpha,
                      bool(stat < crit), n, k, nuis)


def test_eigvec(X, beta0, method, K=None, alpha=0.05, kurtosis="moment"):
    _check_alpha(alpha)
    if method == "anderson":
        return q_anderson(X, beta0, alpha)
    if method == "gauss":
        return q_gaussian(X, beta0, alpha)
    if method in ("pseudo", "tyler"):
        return q_pseudo_gaussian(X, beta0, alpha, variant=method, kurtosis=kurtosis)
    if method == "rank":
        if K is None:
            raise DomainError("rank method needs a score")
        return q_rank(X, beta0, K, alpha)
    raise DomainError(f"unknown eigenvector method {method!r}; expected one of {EIGVEC_METHODS}")


def test_eigval(X, p, q, method, K=None, alpha=0.05, kurtosis="moment", **rank_kw):
    _check_alpha(alpha)
    if method == "anderson":
        return t_anderson(X, p, q, alpha)
    if method == "davis":
        return t_davis(X, p, q, alpha, kurtosis=kurtosis)
    if method == "rank":
        if K is None:
            raise DomainError("rank method needs a score")
        return t_rank(X, p, q, K, alpha, **rank_kw)
    raise DomainError(f"unknown eigenvalue method {method!r}; expected one of {EIGVAL_METHODS}")


# ---------------------------------------------------------------- local powers

def noncentrality_eigvec(lam, beta, b1):
    """r^beta = 4 sum_{j>=2} nu_{1j}^{-1} (beta_j' b1)^2."""
    ops = matops.eigvec_operators(beta, lam)
    k = len(lam)
    t = np.asarray(beta, float)[:, 1:].T @ np.asarray(b1, float)
    return 4.0 * float(np.sum(t**2 / ops.nu[: k - 1]))


def noncentrality_eigvec_G(lam, beta, b):
    """Same quantity via G diag(nu^-1) G' applied to vec(b), b a k x k perturbation of beta.

    Only the first column of ``b`` (the perturbation of beta_1) enters when the
    other columns are tangent, i.e. beta' b is skew-symmetric.
    """
    ops = matops.eigvec_operators(beta, lam)
    k = len(lam)
    w = np.zeros(len(ops.pairs))
    w[: k - 1] = 1.0 / ops.nu[: k - 1]  # only the pairs (1, j) carry weight
    vb = matops.vectorize(b)
    return float(vb @ ops.G @ np.diag(w) @ ops.G.T @ vb)


def noncentrality_eigval(lam, l, p, q, tol=1e-10):
    """r^Lambda = (1-p) sum_{j>q} l_j - p sum_{j<=q} l_j, for tr(Lambda^-1 l) = 0."""
    lam = np.asarray(lam, float)
    l = np.diag(l) if np.ndim(l) == 2 else np.asarray(l, float)
    if abs(np.sum(l / lam)) > tol * max(1.0, np.max(np.abs(l))):
        raise DomainError("perturbation violates tr(Lambda^-1 l) = 0")
    return float(l @ matops.c_pq(len(lam), p, q))


def local_power(method, problem, g1, r, alpha=0.05, lam=None, p=None, q=None, K=None):
    """Asymptotic local power from a noncentrality ``r`` (r^beta or r^Lambda).

    ``method`` is ``pseudo`` (pseudo-Gaussian) or ``rank`` (with score ``K``).
    For the eigenvalue problem ``lam``, ``p`` and ``q`` are needed for a_pq.
    """
    k = g1.k
    if method == "pseudo":
        kap = elliptic.kurtosis(g1)
        eff_vec = 1.0 / (4.0 * (1.0 + kap))
        eff_val = 1.0 / math.sqrt(4.0 * (1.0 + kap))
    elif method == "rank":
        if K is None:
            raise DomainError("rank local power needs a score")
        J, Jg = scores.score_norm(K), scores.cross_info(K, g1)
        eff_vec = Jg**2 / (4.0 * k * (k + 2.0) * J)
        eff_val = Jg / math.sqrt(4.0 * k * (k + 2.0) * J)
    else:
        raise DomainError(f"unknown method {method!r}")
    if problem == "eigvec":
        nc = eff_vec * r
        crit = stats.chi2.isf(alpha, k - 1)
        if nc == 0:
            return float(alpha)
        return float(stats.ncx2.sf(crit, k - 1, nc))
    if problem == "eigval":
        shift = eff_val * r / math.sqrt(matops.a_pq(lam, p, q))
        return float(stats.norm.cdf(stats.norm.ppf(alpha) - shift))
    raise DomainError(f"unknown problem {problem!r}")
