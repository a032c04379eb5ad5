"""Successive projection corner finding and membership estimation."""

from dataclasses import dataclass

import numpy as np

from .exceptions import (CornerConditioningError, CornerDeficiencyError,
                         EstimationError, TensorMMError)
from .hooi import HooiOptions, dd_init, hooi
from .tensor_core import MODES, as_tensor

COND_LIMIT = 1e10
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class CornerSet:
    """Row indices picked by SPA (0-based, in pick order) and the squared
    residual norm of each pick."""

    indices: tuple
    residual_norms: tuple


@dataclass(frozen=True)
class EstimatedMembership:
    membership: np.ndarray
    raw: np.ndarray
    corners: CornerSet
    n_degenerate_rows: int = 0


def spa_corners(u, r=None):
    """Successive projection algorithm on the rows of ``u``.

    Repeatedly picks the row of the residual with the largest squared norm
    (exact ties go to the smallest index) and projects the residual onto the
    orthogonal complement of that row.

    Raises
    ------
    CornerDeficiencyError
        If the residual vanishes before ``r`` rows were picked.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={u.ndim}")
    p, cols = u.shape
    r = cols if r is None else int(r)
    if not 1 <= r <= min(p, cols):
        raise ValueError(f"need p >= r >= 1 with r <= {cols}, got p={p}, r={r}")

    resid = u.copy()
    scale = max(float(np.max(np.sum(u * u, axis=1))), np.finfo(float).tiny)
    picks, norms = [], []
    for _ in range(r):
        sq = np.sum(resid * resid, axis=1)
        j = int(np.argmax(sq))
        if sq[j] <= ZERO_TOL * scale:
            raise CornerDeficiencyError(
                f"residual vanished after {len(picks)} of {r} corners", picks=picks)
        v = resid[j].copy()
        resid = resid - np.outer(resid @ v, v) / sq[j]
        picks.append(j)
        norms.append(float(sq[j]))
    return CornerSet(tuple(picks), tuple(norms))


def memberships_from_factors(u, corners):
    """Raw estimate ``u @ inv(u[J])``; corner rows map to standard basis rows.

    Raises
    ------
    CornerConditioningError
        If the corner submatrix has condition number above ``1e10``.
    """
    u = np.asarray(u, dtype=float)
    block = u[list(corners.indices)]
    cond = np.linalg.cond(block)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise CornerConditioningError(
            f"corner submatrix condition number {cond:.3e} exceeds {COND_LIMIT:.0e}",
            condition=cond)
    # solve block^T X^T = u^T  <=>  X = u block^{-1}, via pivoted LU
    raw = np.linalg.solve(block.T, u.T).T
    return EstimatedMembership(raw, raw, corners)


def clean_memberships(raw):
    """Zero out negative entries and rescale each row to sum to one.

    Rows whose sum is at most 1e-12 after thresholding become uniform; their
    count is reported in ``n_degenerate_rows``.  Accepts either an array or an
    :class:`EstimatedMembership`.
    """
    corners = None
    if isinstance(raw, EstimatedMembership):
        corners = raw.corners
        raw = raw.raw
    raw = np.asarray(raw, dtype=float)
    cleaned = np.clip(raw, 0.0, None)
    sums = cleaned.sum(axis=1)
    bad = sums <= 1e-12
    cleaned[~bad] /= sums[~bad, None]
    cleaned[bad] = 1.0 / raw.shape[1]
    return EstimatedMembership(cleaned, raw, corners, int(bad.sum()))


@dataclass(frozen=True)
class Estimate:
    memberships: tuple
    factors: object

    @property
    def pis(self):
        return tuple(m.membership for m in self.memberships)


def estimate_all(that, ranks, opts=None):
    """Full pipeline: diagonal-deletion init, HOOI, then SPA on each mode.

    Returns an :class:`Estimate` with the three cleaned memberships (raw
    estimates and corner sets attached) and the HOOI :class:`FactorSet`.
    Failures are re-raised as :class:`EstimationError` naming the mode.
    """
    that = as_tensor(that)
    ranks = tuple(int(r) for r in ranks)
    for mode, (p, r) in enumerate(zip(that.shape, ranks), start=1):
        if not 1 <= r <= p:
            raise ValueError(f"rank {r} invalid for mode {mode} of size {p}")
    opts = opts or HooiOptions()

    try:
        init = dd_init(that, ranks)
    except TensorMMError as exc:
        raise EstimationError(f"initialization failed: {exc}") from exc
    try:
        fs = hooi(that, ranks, init, opts)
    except TensorMMError as exc:
        raise EstimationError(f"HOOI failed: {exc}", mode=getattr(exc, "mode", None)) from exc

    out = []
    for mode in MODES:
        u = fs.factors[mode - 1]
        try:
            corners = spa_corners(u)
            out.append(clean_memberships(memberships_from_factors(u, corners)))
        except TensorMMError as exc:
            raise EstimationError(f"mode {mode}: {exc}", mode=mode) from exc
    return Estimate(tuple(out), fs)
