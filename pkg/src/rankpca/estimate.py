"""Nuisance estimators and the signs/ranks extraction.

All estimators accept a single sample ``X`` of shape ``(n, k)`` or a stack of
samples ``(B, n, k)``; outputs carry the matching leading batch axis. Batched
fixed-point iterations freeze each sample as soon as it has converged, so a
sample's result does not depend on which other samples share its batch.
"""

from dataclasses import dataclass

import numpy as np

from . import matops
from .errors import ConvergenceError, DegenerateDataError, DimensionError, InfeasibleNullError

TYLER_TOL = 1e-10
TYLER_MAXITER = 200
HR_TOL = 1e-9
HR_MAXITER = 500
TIE_TOL = 1e-9  # below this fraction of the mean distance, a residual counts as zero
SNAP_TOL = 1e-2  # relative distance below which the nearest observation is tested as the median


@dataclass(frozen=True)
class SignsRanks:
    U: np.ndarray
    d: np.ndarray
    R: np.ndarray
    ties: bool = False


@dataclass(frozen=True)
class ShapeEstimate:
    theta: np.ndarray
    V: np.ndarray
    Lambda: np.ndarray
    beta: np.ndarray
    sigma2: float | None = None

    def as_dict(self):
        out = {"theta": np.asarray(self.theta).tolist(),
               "Lambda": np.asarray(self.Lambda).tolist(),
               "beta": np.asarray(self.beta).tolist()}
        if self.sigma2 is not None:
            out["sigma2"] = float(self.sigma2)
        return out


def _data(X, min_n=2):
    X = np.asarray(X, dtype=float)
    if X.ndim not in (2, 3):
        raise DimensionError(f"data must be (n, k) or (B, n, k), got shape {X.shape}")
    n, k = X.shape[-2:]
    if k < 2:
        raise DimensionError("dimension k must be at least 2")
    if n < min_n:
        raise DimensionError(f"need at least {min_n} observations, got {n}")
    if not np.all(np.isfinite(X)):
        raise DimensionError("data contain non-finite values")
    return X


def mean_cov(X):
    """Sample mean and covariance with divisor n."""
    X = _data(X)
    m = X.mean(axis=-2)
    Y = X - m[..., None, :]
    S = np.swapaxes(Y, -1, -2) @ Y / X.shape[-2]
    return m, S


def _chol(V):
    try:
        return np.linalg.cholesky(V)
    except np.linalg.LinAlgError:
        raise DegenerateDataError("shape iterate lost positive definiteness") from None


def _whiten(Y, L):
    """Rows of Y multiplied by L^{-T}, i.e. Z_i = L^{-1} y_i (L lower Cholesky)."""
    # batched k x k inverse + matmul beats a gufunc solve with n right-hand sides
    return Y @ np.swapaxes(np.linalg.inv(L), -1, -2)


def _tyler_map(Y, L, drop_ties=False):
    """(M, U, r) with M = (k/n) sum Z Z' / |Z|^2 in the Cholesky frame.

    With ``drop_ties`` an observation at (relative) distance below TIE_TOL
    from the location gets a zero sign and r = inf, and n counts the others.
    """
    n, k = Y.shape[-2:]
    Z = _whiten(Y, L)
    r = np.linalg.norm(Z, axis=-1)
    if drop_ties:
        tied = r <= TIE_TOL * np.mean(r, axis=-1, keepdims=True)
        r = np.where(tied, np.inf, r)
        n_eff = n - tied.sum(axis=-1)[..., None, None]
    elif np.any(r <= 0.0):
        raise DegenerateDataError("an observation coincides with the location")
    else:
        n_eff = n
    U = Z / r[..., None]
    M = (k / n_eff) * np.swapaxes(U, -1, -2) @ U
    return M, U, r


def tyler_residual(X, theta, V):
    """max-norm of (k/n) sum Z Z'/|Z|^2 - I with Z = V^{-1/2}(X - theta)."""
    X = np.asarray(X, dtype=float)
    n, k = X.shape[-2:]
    Z = (X - np.asarray(theta)[..., None, :]) @ matops.symmetric_power(V, -0.5)
    r = np.linalg.norm(Z, axis=-1, keepdims=True)
    tied = r <= TIE_TOL * np.mean(r, axis=-2, keepdims=True)
    U = np.where(tied, 0.0, Z / np.where(tied, 1.0, r))
    n_eff = n - tied.sum(axis=(-2, -1))[..., None, None]
    M = (k / n_eff) * np.swapaxes(U, -1, -2) @ U
    return np.max(np.abs(M - np.eye(k)), axis=(-2, -1))


def tyler_shape(X, theta, init=None, tol=TYLER_TOL, maxiter=TYLER_MAXITER):
    """Tyler's shape M-estimator about a fixed ``theta``, scaled to det 1.

    Iterates V <- L M L' (V = L L') until the Frobenius norm of M - I drops
    below ``tol``.
    """
    X = _data(X)
    n, k = X.shape[-2:]
    if n <= k * (k - 1):
        raise DimensionError(f"need n > k(k-1) observations for a shape estimate, got n={n}")
    batch = X.shape[:-2]
    Y = (X - np.asarray(theta, dtype=float)[..., None, :]).reshape((-1, n, k))
    B = Y.shape[0]
    V = np.broadcast_to(np.eye(k) if init is None else np.asarray(init, float), batch + (k, k))
    V = matops.det_normalize(V.reshape((B, k, k)).copy())
    active = np.arange(B)
    res = np.full(B, np.inf)
    I = np.eye(k)
    for _ in range(maxiter + 1):
        L = _chol(V[active])
        M, _, _ = _tyler_map(Y[active], L, drop_ties=True)
        err = np.linalg.norm(M - I, axis=(-2, -1))
        res[active] = err
        done = err < tol
        keep = ~done
        if not np.any(keep):
            active = active[:0]
            break
        act = active[keep]
        Lk = L[keep]
        V[act] = matops.det_normalize(Lk @ M[keep] @ np.swapaxes(Lk, -1, -2))
        active = act
    if active.size:
        raise ConvergenceError(f"Tyler iteration did not converge in {maxiter} steps "
                               f"({active.size} of {B} samples)", residual=float(res.max()))
    return V.reshape(batch + (k, k))


def hr_median(X, tol=HR_TOL, maxiter=HR_MAXITER, return_shape=False):
    """Affine-equivariant spatial median paired with Tyler's shape.

    Solves jointly  mean_i U_i = 0  and  (k/n) sum U_i U_i' = I, where
    U_i is the sign of V^{-1/2}(X_i - theta). Each sweep takes one Tyler
    step at the current location and one Weiszfeld step in the whitened
    coordinates. Starts at the sample mean and V = I.

    The joint solution can sit exactly on an observation. When the signs of
    the other observations about the nearest one sum to norm <= 1 (Vardi and
    Zhang's condition), the location is pinned to that observation, which is
    then dropped from the Tyler sum while the shape finishes converging.
    """
    X = _data(X)
    n, k = X.shape[-2:]
    batch = X.shape[:-2]
    Xf = X.reshape((-1, n, k))
    B = Xf.shape[0]
    theta = Xf.mean(axis=1)
    V = np.broadcast_to(np.eye(k), (B, k, k)).copy()
    I = np.eye(k)
    active = np.arange(B)
    pinned = np.zeros(B, dtype=bool)
    res = np.full(B, np.inf)
    for _ in range(maxiter):
        Xa = Xf[active]
        L = _chol(V[active])
        M, _, _ = _tyler_map(Xa - theta[active][:, None, :], L, drop_ties=True)
        Vn = matops.det_normalize(L @ M @ np.swapaxes(L, -1, -2))
        Ln = _chol(Vn)
        _, U, r = _tyler_map(Xa - theta[active][:, None, :], Ln, drop_ties=True)
        # Weiszfeld step for the spatial median of the whitened sample
        s = U.sum(axis=1)
        step_z = s / (1.0 / r).sum(axis=1)[:, None]
        on_point = np.isinf(r).any(axis=1)
        if on_point.any():
            gam = np.linalg.norm(s, axis=-1)
            shrink = np.where(on_point, np.maximum(0.0, 1.0 - 1.0 / np.maximum(gam, 1e-300)), 1.0)
            step_z = step_z * shrink[:, None]
        # Newton step where it lowers sum |z_i - z|; Weiszfeld alone crawls
        # when the median sits close to an observation
        w = 1.0 / r
        H = w.sum(axis=1)[:, None, None] * I - np.swapaxes(U * w[..., None], 1, 2) @ U
        newton = np.linalg.solve(H, s[..., None])[..., 0]
        Z = U * np.where(np.isinf(r), 0.0, r)[..., None]
        f_old = np.linalg.norm(Z, axis=-1).sum(axis=1)
        f_new = np.linalg.norm(Z - newton[:, None, :], axis=-1).sum(axis=1)
        use = ~on_point & np.isfinite(f_new) & (f_new < f_old)
        step_z = np.where(use[:, None], newton, step_z)
        step = np.einsum("bij,bj->bi", Ln, step_z)
        new_theta = theta[active] + step
        # a nearby observation is the exact median once the signs of the
        # others about it sum to norm <= 1
        j = np.argmin(r, axis=1)
        near = ~on_point & (r[np.arange(r.size // n), j] < SNAP_TOL * np.mean(np.where(on_point[:, None], 0.0, r), axis=1))
        if near.any():
            b = np.flatnonzero(near)
            Zj = Z[b] - Z[b, j[b]][:, None, :]
            nz = np.linalg.norm(Zj, axis=-1)
            nz[np.arange(b.size), j[b]] = np.inf
            gam = np.linalg.norm((Zj / nz[..., None]).sum(axis=1), axis=-1)
            snap = b[gam <= 1.0]
            new_theta[snap] = Xa[snap, j[snap]]
            step_z[snap] = Z[snap, j[snap]]
            pinned[active[snap]] = True
        pin = pinned[active] & on_point
        new_theta[pin] = theta[active][pin]
        step_z[pin] = 0.0
        theta[active] = new_theta
        V[active] = Vn
        err = np.maximum(np.linalg.norm(M - I, axis=(-2, -1)), np.linalg.norm(step_z, axis=-1))
        res[active] = err
        active = active[err >= tol]
        if not active.size:
            break
    if active.size:
        raise ConvergenceError(f"HR iteration did not converge in {maxiter} steps "
                               f"({active.size} of {B} samples)", residual=float(res.max()))
    theta = theta.reshape(batch + (k,))
    if return_shape:
        return theta, V.reshape(batch + (k, k))
    return theta


def hr_tyler(X):
    """ShapeEstimate (HR location, Tyler shape about it); batched arrays if X is."""
    theta, V0 = hr_median(X, return_shape=True)
    V = tyler_shape(X, theta, init=V0)
    lam, beta = matops.symmetric_eigen(V)
    return ShapeEstimate(theta=theta, V=V, Lambda=lam, beta=beta)


def distances(X, theta, V):
    """d_i(theta, V) = |V^{-1/2}(X_i - theta)|."""
    X = np.asarray(X, dtype=float)
    Z = (X - np.asarray(theta)[..., None, :]) @ matops.symmetric_power(V, -0.5)
    return np.linalg.norm(Z, axis=-1)


def scale_median(X, theta, V):
    """Empirical median of d_i^2(theta, V); even n averages the central pair."""
    return np.median(distances(X, theta, V) ** 2, axis=-1)


def kurtosis_hat(X):
    """k mean(d^4) / ((k+2) mean(d^2)^2) - 1 with d_i = d_i(mean, S)."""
    X = _data(X)
    k = X.shape[-1]
    m, S = mean_cov(X)
    Y = X - m[..., None, :]
    try:
        Si = np.linalg.inv(S)
    except np.linalg.LinAlgError:
        raise DegenerateDataError("sample covariance is singular") from None
    d2 = np.einsum("...ni,...ij,...nj->...n", Y, Si, Y)
    if np.any(~(d2.mean(axis=-1) > 0)):
        raise DegenerateDataError("sample covariance is singular")
    return k * np.mean(d2**2, axis=-1) / ((k + 2.0) * np.mean(d2, axis=-1) ** 2) - 1.0


def robust_kurtosis_hat(X, est=None):
    """Same ratio as ``kurtosis_hat`` but with d_i at (theta_HR, V_Tyler).

    Consistent for kappa_k whenever fourth moments exist, and much less
    sensitive to the bounded-ratio effect of covariance-standardized
    distances under heavy tails.
    """
    X = _data(X)
    k = X.shape[-1]
    est = est if est is not None else hr_tyler(X)
    d2 = distances(X, est.theta, est.V) ** 2
    return k * np.mean(d2**2, axis=-1) / ((k + 2.0) * np.mean(d2, axis=-1) ** 2) - 1.0


def constrained_eigvecs(beta_hat, beta0, tol=1e-12):
    """Gram-Schmidt frame whose first column is ``beta0``.

    Column j >= 2 is the normalized projection of the j-th column of
    ``beta_hat`` on the orthocomplement of the columns already built. The last
    column is flipped, if needed, to give determinant +1.
    """
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)
    k = beta_hat.shape[-1]
    if beta0.shape != (k,):
        raise DimensionError("beta0 must be a k-vector")
    out = np.empty_like(beta_hat)
    out[..., :, 0] = beta0
    for j in range(1, k):
        v = beta_hat[..., :, j].copy()
        for i in range(j):
            b = out[..., :, i]
            v -= np.sum(b * beta_hat[..., :, j], axis=-1)[..., None] * b
        nv = np.linalg.norm(v, axis=-1)
        if np.any(nv < tol):
            raise DegenerateDataError("Gram-Schmidt projection vanished; frame column lies "
                                      "in the span of the previous ones")
        out[..., :, j] = v / nv[..., None]
    flip = np.linalg.det(out) < 0
    out[..., :, -1] *= np.where(flip, -1.0, 1.0)[..., None]
    return out


def constrained_eigvals(lam_hat, p, q, infeasible="raise"):
    """Project dvec(Lambda) onto c_pq-orthogonal spectra, then rescale to det 1.

    A projection with a nonpositive entry raises ``InfeasibleNullError``; with
    ``infeasible='nan'`` the offending rows of a batch are set to NaN instead.
    """
    lam_hat = np.asarray(lam_hat, dtype=float)
    k = lam_hat.shape[-1]
    c = matops.c_pq(k, p, q)
    lam = lam_hat - (lam_hat @ c)[..., None] * c / (c @ c)
    bad = np.any(lam <= 0, axis=-1)
    if np.any(bad):
        if infeasible != "nan":
            raise InfeasibleNullError("constrained eigenvalues are not all positive; "
                                      "the sample is too far from the null for this plug-in")
        lam = np.where(bad[..., None], np.nan, lam)
    return lam / np.exp(np.mean(np.log(lam), axis=-1))[..., None]


def signs_ranks(X, theta, V):
    """Signs U_i, distances d_i and ranks R_i (1..n) at (theta, V).

    Ties in d are broken by observation index and reported via ``ties``.
    A zero residual has sign 0 and rank 1.
    """
    X = np.asarray(X, dtype=float)
    Z = (X - np.asarray(theta, dtype=float)[..., None, :]) @ matops.symmetric_power(V, -0.5)
    d = np.linalg.norm(Z, axis=-1)
    # an observation sitting at the location (the HR median can) gets sign 0
    U = Z / np.where(d > 0, d, 1.0)[..., None]
    order = np.argsort(d, axis=-1, kind="stable")
    R = np.empty_like(order)
    np.put_along_axis(R, order, np.arange(1, d.shape[-1] + 1), axis=-1)
    ds = np.take_along_axis(d, order, axis=-1)
    ties = bool(np.any(np.diff(ds, axis=-1) == 0))
    return SignsRanks(U=U, d=d, R=R, ties=ties)
