"""Small dense matrix toolbox.

Vectorization operators, the structural matrices used by the eigenvector and
eigenvalue statistics, and symmetric eigendecomposition/roots. Everything is
dense; ``k`` is small (at most ~10) in every use.

Functions acting on symmetric matrices (``symmetric_eigen``,
``symmetric_power`` and friends) accept stacks of shape ``(..., k, k)``.
"""

from typing import NamedTuple

import numpy as np

from .errors import DegenerateSpectrumError, DimensionError, DomainError

VEC_MODES = ("full", "upper_diag", "upper_off_diag", "diagonal", "diagonal_tail")


def _square(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] < 2:
        raise DimensionError("dimension must be at least 2")
    return A


def _check_k(k):
    if int(k) != k or k < 2:
        raise DomainError(f"dimension k must be an integer >= 2, got {k!r}")
    return int(k)


def vectorize(A, mode="full"):
    """Stack entries of a square matrix.

    Modes: ``full`` (column stacking, vec), ``upper_diag`` (vech: upper
    triangle incl. diagonal, column by column), ``upper_off_diag`` (vech+),
    ``diagonal`` (dvec) and ``diagonal_tail`` (dvec without its first entry).
    """
    A = _square(A)
    k = A.shape[0]
    if mode == "full":
        return A.reshape(-1, order="F").copy()
    if mode == "upper_diag":
        return np.array([A[i, j] for j in range(k) for i in range(j + 1)])
    if mode == "upper_off_diag":
        return np.array([A[i, j] for j in range(k) for i in range(j)])
    if mode == "diagonal":
        return np.diag(A).copy()
    if mode == "diagonal_tail":
        return np.diag(A)[1:].copy()
    raise DomainError(f"unknown vectorization mode {mode!r}; expected one of {VEC_MODES}")


def unvec(v, k):
    """Inverse of ``vectorize(., 'full')``."""
    return np.asarray(v, dtype=float).reshape((k, k), order="F")


def commutation(k):
    """Commutation matrix K_k with K_k vec(A) = vec(A')."""
    k = _check_k(k)
    K = np.zeros((k * k, k * k))
    for i in range(k):
        for j in range(k):
            K[i + j * k, j + i * k] = 1.0
    return K


def diag_selector(k):
    """The k x k^2 matrix H_k with H_k vec(A) = dvec(A)."""
    k = _check_k(k)
    H = np.zeros((k, k * k))
    for i in range(k):
        H[i, i + i * k] = 1.0
    return H


def tail_selector(k):
    """N_k = (0 | I_{k-1}), dropping the first coordinate of a k-vector."""
    k = _check_k(k)
    return np.hstack([np.zeros((k - 1, 1)), np.eye(k - 1)])


def _spectrum(lam):
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 2:
        lam = np.diag(lam)
    if lam.ndim != 1 or lam.size < 2:
        raise DimensionError("spectrum must be a vector of length >= 2")
    if np.any(lam <= 0):
        raise DomainError("eigenvalues must be strictly positive")
    return lam


def eigval_jacobian(lam):
    """(k-1) x k matrix M_k^Lambda.

    Transposed Jacobian of (lambda_2..lambda_k) -> (prod lambda_j^-1, lambda_2..lambda_k),
    evaluated with the supplied lambda_1 (so det-1 is not enforced).
    """
    lam = _spectrum(lam)
    k = lam.size
    M = np.zeros((k - 1, k))
    M[:, 0] = -lam[0] / lam[1:]
    M[:, 1:] = np.eye(k - 1)
    return M


def pairs(k):
    """Index pairs (j, h), j < h, in the order (1,2),(1,3),...,(k-1,k) (0-based)."""
    return [(j, h) for j in range(k) for h in range(j + 1, k)]


class EigvecOperators(NamedTuple):
    G: np.ndarray
    L: np.ndarray
    nu: np.ndarray
    pairs: list


def eigvec_operators(beta, lam):
    """G_k^beta, L_k^{beta,Lambda} and nu_{jh} = lam_j lam_h / (lam_j - lam_h)^2.

    ``nu`` is returned as a vector aligned with ``pairs(k)``.
    """
    beta = _square(beta)
    lam = _spectrum(lam)
    k = lam.size
    if beta.shape[0] != k:
        raise DimensionError("frame and spectrum dimensions differ")
    if np.any(np.diff(lam) >= 0):
        raise DegenerateSpectrumError("eigenvalues must be strictly descending for nu_jh")
    I = np.eye(k)
    idx = pairs(k)
    G = np.empty((k * k, len(idx)))
    L = np.empty((len(idx), k * k))
    nu = np.empty(len(idx))
    for c, (j, h) in enumerate(idx):
        G[:, c] = np.kron(I[:, j], beta[:, h]) - np.kron(I[:, h], beta[:, j])
        L[c, :] = (lam[h] - lam[j]) * np.kron(beta[:, h], beta[:, j])
        nu[c] = lam[j] * lam[h] / (lam[j] - lam[h]) ** 2
    return EigvecOperators(G, L, nu, idx)


def tangent_chart(frame, tol=1e-10):
    """k^2 x k(k-1) matrix P_k^{beta_0} spanning the tangent of the eigenvector null.

    ``frame`` is orthonormal with the hypothesized direction as first column.
    Columns of the lower block are indexed by (i, j) blocks with i inner.
    """
    beta = _square(frame)
    k = beta.shape[0]
    if np.max(np.abs(beta.T @ beta - np.eye(k))) > tol:
        raise DomainError("frame is not orthonormal")
    b0 = beta[:, 0]
    lower = np.kron(np.eye(k - 1), np.eye(k) - np.outer(b0, b0))
    for i in range(k - 1):
        for j in range(k - 1):
            E = np.zeros((k - 1, k - 1))
            E[i, j] = 1.0
            lower -= np.kron(E, np.outer(beta[:, j + 1], beta[:, i + 1]))
    return np.vstack([np.zeros((k, k * (k - 1))), lower])


def shape_info_D(lam):
    """D_k(Lambda) = 1/4 M H (I + K) (Lambda^-1 kron Lambda^-1) H' M'."""
    lam = _spectrum(lam)
    k = lam.size
    M = eigval_jacobian(lam)
    H = diag_selector(k)
    Li = np.diag(1.0 / lam)
    return 0.25 * M @ H @ (np.eye(k * k) + commutation(k)) @ np.kron(Li, Li) @ H.T @ M.T


def shape_info_D_inverse(lam):
    """Closed-form inverse of ``shape_info_D``.

    N H P (I + K) (Lambda kron Lambda) P' H' N' with
    P = I - (1/k) (Lambda kron Lambda) vec(Lambda^-1) vec(Lambda^-1)'.
    """
    lam = _spectrum(lam)
    k = lam.size
    Lam = np.diag(lam)
    LL = np.kron(Lam, Lam)
    v = vectorize(np.diag(1.0 / lam))
    P = np.eye(k * k) - LL @ np.outer(v, v) / k
    N = tail_selector(k)
    H = diag_selector(k)
    return N @ H @ P @ (np.eye(k * k) + commutation(k)) @ LL @ P.T @ H.T @ N.T


def c_pq(k, p, q):
    """Contrast vector (-p 1_q', (1-p) 1_{k-q}')'."""
    _check_p_q(k, p, q)
    return np.concatenate([np.full(q, -p), np.full(k - q, 1.0 - p)])


def a_pq(lam, p, q):
    """2 (p^2 sum_{j<=q} lam_j^2 + (1-p)^2 sum_{j>q} lam_j^2); accepts stacks (..., k)."""
    lam = np.asarray(lam, dtype=float)
    _check_p_q(lam.shape[-1], p, q)
    return 2.0 * (p**2 * np.sum(lam[..., :q] ** 2, axis=-1)
                  + (1.0 - p) ** 2 * np.sum(lam[..., q:] ** 2, axis=-1))


def grad_h(lam, p, q):
    """Gradient of the eigenvalue-proportion constraint w.r.t. (lambda_2..lambda_k).

    ``lam`` is the full det-1 spectrum; lambda_1 enters through the det constraint.
    """
    lam = _spectrum(lam)
    k = lam.size
    _check_p_q(k, p, q)
    g = p * (lam[0] / lam[1:] - 1.0)
    g[q - 1:] += 1.0
    return g


def _check_p_q(k, p, q):
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if int(q) != q or not 1 <= q <= k - 1:
        raise DomainError(f"q must be an integer in 1..{k - 1}, got {q}")


def symmetric_eigen(S):
    """Descending eigenvalues and an oriented eigenframe of symmetric ``S``.

    Each eigenvector has its largest-magnitude entry positive; the last column
    is then flipped if needed so that det(frame) = +1. Works on stacks.
    """
    S = np.asarray(S, dtype=float)
    if S.shape[-1] != S.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {S.shape}")
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    w, Q = np.linalg.eigh(S)
    w = w[..., ::-1]
    Q = Q[..., ::-1]
    lead = np.take_along_axis(Q, np.argmax(np.abs(Q), axis=-2)[..., None, :], axis=-2)
    Q = Q * np.where(lead < 0, -1.0, 1.0)
    flip = np.linalg.det(Q) < 0
    Q[..., :, -1] *= np.where(flip, -1.0, 1.0)[..., None]
    return w, Q


def symmetric_power(S, power):
    """S^power for symmetric positive definite S (stacks allowed)."""
    S = np.asarray(S, dtype=float)
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    w, Q = np.linalg.eigh(S)
    if np.any(w <= 0):
        raise DomainError("matrix is not positive definite")
    return (Q * w[..., None, :] ** power) @ np.swapaxes(Q, -1, -2)


def symmetric_sqrt(S):
    """Symmetric positive definite square root."""
    return symmetric_power(S, 0.5)


def det_normalize(S):
    """Rescale PD matrices to determinant one."""
    S = np.asarray(S, dtype=float)
    sign, logdet = np.linalg.slogdet(S)
    if np.any(sign <= 0):
        raise DomainError("matrix is not positive definite")
    return S * np.exp(-logdet / S.shape[-1])[..., None, None]
