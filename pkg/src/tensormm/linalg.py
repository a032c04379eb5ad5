"""Spectral building blocks: truncated eigen/singular vectors, hollowing,
subspace distances, Procrustes alignment and tensor spectral diagnostics.

Dense symmetric eigenproblems go through LAPACK (``numpy.linalg.eigh``);
everything here works in double precision at desk scale.
"""

import numpy as np

from .exceptions import ConvergenceError, RankDeficiencyError
from .tensor_core import MODES, matricize

SYMMETRY_TOL = 1e-8
RESIDUAL_TOL = 1e-8


def fix_signs(vectors):
    """Flip columns so each one's largest-magnitude entry is positive.

    Ties in magnitude resolve to the lowest row index.  Returns a new array.
    """
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig_top(a, r):
    """Top-``r`` algebraically largest eigenpairs of a symmetric matrix.

    Parameters
    ----------
    a : (n, n) array_like
        Symmetric up to ``1e-8 * max|a|``; it is symmetrized before solving.
    r : int
        Number of eigenpairs, ``1 <= r <= n``.

    Returns
    -------
    values : (r,) ndarray
        Eigenvalues, nonincreasing.
    vectors : (n, r) ndarray
        Orthonormal eigenvectors, sign-fixed by :func:`fix_signs`.

    Raises
    ------
    ValueError
        If ``a`` is not square, not symmetric within tolerance, or ``r`` is
        out of range.
    ConvergenceError
        If LAPACK fails or a returned pair has residual above
        ``1e-8 * ||a||``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if not 1 <= r <= n:
        raise ValueError(f"r must be in [1, {n}], got {r}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * max(scale, np.finfo(float).tiny):
        raise ValueError("matrix is not symmetric")

    sym = 0.5 * (a + a.T)
    try:
        values, vectors = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc

    values = values[::-1][:r]
    vectors = fix_signs(vectors[:, ::-1][:, :r])

    norm = np.linalg.norm(sym, 2) if n else 0.0
    residual = np.linalg.norm(sym @ vectors - vectors * values, axis=0).max()
    if residual > RESIDUAL_TOL * max(norm, 1.0):
        raise ConvergenceError(
            f"eigenpair residual {residual:.3e} exceeds tolerance", residual=residual)
    return values, vectors


def svd_left_top(m, r):
    """Leading ``r`` left singular vectors and singular values of ``m``.

    Computed through the smaller Gram matrix: ``m m^T`` when ``m`` is wide,
    otherwise ``m^T m`` followed by ``u = m v / s``.  Negative Gram
    eigenvalues are clamped to zero before taking square roots.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    rows, cols = m.shape
    if not 1 <= r <= min(rows, cols):
        raise ValueError(f"r must be in [1, {min(rows, cols)}], got {r}")

    if rows <= cols:
        values, u = sym_eig_top(m @ m.T, r)
        return np.sqrt(np.clip(values, 0.0, None)), u

    values, v = sym_eig_top(m.T @ m, r)
    s = np.sqrt(np.clip(values, 0.0, None))
    if s[-1] <= 1e-12 * max(s[0], np.finfo(float).tiny):
        # Left vectors of null directions are not recoverable from m v; fall
        # back to the rows-side Gram for this rank-deficient case.
        values, u = sym_eig_top(m @ m.T, r)
        return np.sqrt(np.clip(values, 0.0, None)), u
    u = (m @ v) / s
    # one QR pass restores orthonormality lost to Gram squaring
    q, rr = np.linalg.qr(u)
    q = q * np.sign(np.diag(rr))
    return s, fix_signs(q)


def hollow(a):
    """Copy of the square matrix ``a`` with its diagonal set to zero."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"hollowing needs a square matrix, got shape {a.shape}")
    out = a.copy()
    np.fill_diagonal(out, 0.0)
    return out


def sin_theta(u, v):
    """Spectral sin-theta distance ``||(I - u u^T) v||`` between column spaces."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    resid = v - u @ (u.T @ v)
    return float(np.linalg.norm(resid, 2))


def procrustes_sign(u_ref, u_hat):
    """Orthogonal ``W`` minimizing ``||u_ref W - u_hat||_F``.

    ``W = A B^T`` where ``A S B^T`` is the SVD of ``u_ref^T u_hat``.

    Returns
    -------
    w : (r, r) ndarray
    degenerate : bool
        True when the cross-Gram is zero, in which case ``w`` is the identity.
    """
    u_ref = np.asarray(u_ref, dtype=float)
    u_hat = np.asarray(u_hat, dtype=float)
    if u_ref.shape != u_hat.shape:
        raise ValueError(f"shape mismatch: {u_ref.shape} vs {u_hat.shape}")
    cross = u_ref.T @ u_hat
    r = cross.shape[0]
    if not np.any(cross):
        return np.eye(r), True
    a, _, bt = np.linalg.svd(cross)
    return a @ bt, False


def two_inf_norm(m):
    """Largest Euclidean row norm of ``m``."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    return float(np.sqrt(np.max(np.sum(m * m, axis=1))))


def incoherence(factors):
    """``mu_0 = max_k sqrt(p_k / r_k) * ||U_k||_{2,inf}`` over the three factors."""
    return max(np.sqrt(u.shape[0] / u.shape[1]) * two_inf_norm(u)
               for u in map(np.asarray, factors))


def _matricization_spectra(t, ranks):
    t = np.asarray(t, dtype=float)
    spectra = []
    for mode, r in zip(MODES, ranks):
        m = matricize(t, mode)
        if not 1 <= r <= min(m.shape):
            raise ValueError(f"rank {r} invalid for mode {mode} with shape {m.shape}")
        # direct singular values: the Gram route cannot resolve sigma_r below
        # sqrt(eps) * sigma_1, which the rank check needs
        s = np.linalg.svd(m, compute_uv=False)[:r]
        if s[0] == 0.0 or s[-1] < 1e-12 * s[0]:
            raise RankDeficiencyError(
                f"mode-{mode} matricization has numerical rank below {r}")
        spectra.append(s)
    return spectra


def tensor_lambda_min(t, ranks):
    """Smallest retained singular value over all three matricizations."""
    return float(min(s[-1] for s in _matricization_spectra(t, ranks)))


def tensor_kappa(t, ranks):
    """Tensor condition number ``max_k sigma_1(M_k) / sigma_{r_k}(M_k)``."""
    return float(max(s[0] / s[-1] for s in _matricization_spectra(t, ranks)))


def tucker_factors(t, ranks):
    """Exact leading singular factors ``U_k = SVD_{r_k}(M_k(t))`` of each mode."""
    t = np.asarray(t, dtype=float)
    return tuple(svd_left_top(matricize(t, mode), r)[1] for mode, r in zip(MODES, ranks))
