"""Permutation-aligned membership errors, sin-theta reports and K-medians."""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .linalg import procrustes_sign, sin_theta, two_inf_norm

EXHAUSTIVE_LIMIT = 8


@dataclass(frozen=True)
class AlignmentResult:
    """``permutation[l]`` is the estimated column matched to true column ``l``,
    i.e. ``est[:, permutation]`` is aligned with ``truth``.  ``l1_permutation``
    is the (possibly different) minimizer of the average l1 error."""

    permutation: np.ndarray
    l2inf_error: float
    avg_l1_error: float
    l1_permutation: np.ndarray
    exhaustive: bool = True


def _l2inf(est, truth, perm):
    return two_inf_norm(truth - est[:, perm])


def avg_l1_error(est, truth, perm):
    """``(1/p) sum_i ||(est[:, perm] - truth)_i||_1``."""
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if est.shape != truth.shape:
        raise ValueError(f"shape mismatch: {est.shape} vs {truth.shape}")
    return float(np.abs(est[:, np.asarray(perm)] - truth).sum(axis=1).mean())


def align_memberships(est, truth, relax=False):
    """Best column permutation of ``est`` against ``truth``.

    For ``r <= 8`` all ``r!`` permutations are scanned, separately for the
    max-row l2 error and the average l1 error.  Larger ``r`` requires
    ``relax=True``: a linear assignment on the column cost
    ``sum_i |est_il - truth_im|`` is then used for both metrics, which is not
    guaranteed optimal for the l2,inf metric.
    """
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if est.shape != truth.shape or est.ndim != 2:
        raise ValueError(f"shape mismatch: {est.shape} vs {truth.shape}")
    r = est.shape[1]

    if r <= EXHAUSTIVE_LIMIT:
        best_l2, best_l1 = (np.inf, None), (np.inf, None)
        for perm in itertools.permutations(range(r)):
            perm = np.array(perm)
            e2 = _l2inf(est, truth, perm)
            if e2 < best_l2[0]:
                best_l2 = (e2, perm)
            e1 = avg_l1_error(est, truth, perm)
            if e1 < best_l1[0]:
                best_l1 = (e1, perm)
        return AlignmentResult(best_l2[1], best_l2[0], best_l1[0], best_l1[1])

    if not relax:
        raise NotImplementedError(
            f"exhaustive alignment is limited to r <= {EXHAUSTIVE_LIMIT}; pass relax=True")
    cost = np.abs(truth[:, :, None] - est[:, None, :]).sum(axis=0)
    rows, cols = linear_sum_assignment(cost)
    perm = cols[np.argsort(rows)]
    return AlignmentResult(perm, _l2inf(est, truth, perm), avg_l1_error(est, truth, perm),
                           perm, exhaustive=False)


def factor_two_inf_error(u_hat, u):
    """``||u_hat - u W||_{2,inf}`` with ``W`` the Procrustes alignment of ``u`` to ``u_hat``."""
    w, _ = procrustes_sign(u, u_hat)
    return two_inf_norm(np.asarray(u_hat) - np.asarray(u) @ w)


def sintheta_report(fs, truth_factors):
    """Per-mode sin-theta distance between estimated and true factors."""
    factors = getattr(fs, "factors", fs)
    return np.array([sin_theta(u, v) for u, v in zip(truth_factors, factors)])


# --------------------------------------------------------------------------
# K-medians

@dataclass(frozen=True)
class ClusterResult:
    labels: np.ndarray
    centers: np.ndarray
    cost: float
    cost_trace: tuple = ()


def _l1_dist(x, centers):
    return np.abs(x[:, None, :] - centers[None, :, :]).sum(axis=2)


def _kmedians_once(x, r, iters, rng):
    p = x.shape[0]
    # k-means++ style seeding with l1 distances
    centers = [x[rng.integers(p)]]
    for _ in range(1, r):
        d = _l1_dist(x, np.array(centers)).min(axis=1)
        total = d.sum()
        idx = rng.integers(p) if total == 0 else rng.choice(p, p=d / total)
        centers.append(x[idx])
    centers = np.array(centers, dtype=float)

    labels = None
    trace = []
    for _ in range(iters):
        dist = _l1_dist(x, centers)
        new_labels = np.argmin(dist, axis=1)
        for c in range(r):
            if not np.any(new_labels == c):
                # empty cluster: move it to the point farthest from its center
                far = int(np.argmax(dist[np.arange(p), new_labels]))
                centers[c] = x[far]
                dist = _l1_dist(x, centers)
                new_labels = np.argmin(dist, axis=1)
        trace.append(float(dist[np.arange(p), new_labels].sum()))
        for c in range(r):
            members = x[new_labels == c]
            if len(members):
                centers[c] = np.median(members, axis=0)
        trace.append(float(_l1_dist(x, centers)[np.arange(p), new_labels].sum()))
        if labels is not None and np.array_equal(labels, new_labels):
            labels = new_labels
            break
        labels = new_labels
    dist = _l1_dist(x, centers)
    labels = np.argmin(dist, axis=1)
    cost = float(dist[np.arange(p), labels].sum())
    trace.append(cost)
    return ClusterResult(labels, centers, cost, tuple(trace))


def kmedians(rows, r, restarts=10, iters=100, rng=None):
    """Lloyd-style K-medians on the rows of a matrix.

    Points are assigned to the nearest center in l1 distance and centers are
    updated to the coordinate-wise median of their cluster, so the total l1
    cost never increases within a restart.  The best of ``restarts`` seeded
    runs (lowest total cost) is returned.
    """
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[0] < r or r < 1:
        raise ValueError(f"need at least r={r} rows, got shape {x.shape}")
    if rng is None:
        rng = np.random.default_rng(0)
    best = None
    for _ in range(max(1, restarts)):
        res = _kmedians_once(x, r, iters, rng)
        if best is None or res.cost < best.cost:
            best = res
    return best


def misclustering(labels, truth_labels):
    """Fraction of points mislabelled under the best relabeling."""
    labels = np.asarray(labels)
    truth_labels = np.asarray(truth_labels)
    k = int(max(labels.max(), truth_labels.max())) + 1
    confusion = np.zeros((k, k))
    np.add.at(confusion, (truth_labels, labels), 1)
    rows, cols = linear_sum_assignment(-confusion)
    n = len(labels)
    return (n - int(confusion[rows, cols].sum())) / n


def labels_to_membership(labels, r):
    """One-hot membership matrix from integer labels."""
    return np.eye(r)[np.asarray(labels)]


def perfect_recovery(cluster, truth):
    """``(misclustering == 0, misclustering)`` against a one-hot ``truth`` matrix."""
    labels = getattr(cluster, "labels", cluster)
    truth_labels = np.argmax(np.asarray(truth), axis=1)
    frac = misclustering(labels, truth_labels)
    return frac == 0.0, frac
