"""Tucker rank selection by the profile-likelihood elbow of a scree sequence."""

import warnings

import numpy as np

from .exceptions import DegenerateSpectrumWarning
from .hooi import hollowed_gram
from .tensor_core import MODES, as_tensor, matricize


def profile_loglik(values):
    """Profile log-likelihood of each split point ``q = 1..n-1``.

    The first ``q`` values and the remaining ``n - q`` values are modelled as
    two Gaussian groups with their own means and a common variance (pooled
    with ``n - 2`` degrees of freedom).  Returns an array of length ``n - 1``
    whose entry ``q - 1`` is the log-likelihood of splitting after ``q``.
    """
    d = np.asarray(values, dtype=float)
    n = d.size
    if n < 3:
        raise ValueError("need at least three values")
    scale = max(np.max(np.abs(d)), np.finfo(float).tiny)
    out = np.empty(n - 1)
    for q in range(1, n):
        a, b = d[:q], d[q:]
        ss = np.sum((a - a.mean()) ** 2) + np.sum((b - b.mean()) ** 2)
        var = max(ss / (n - 2), (1e-15 * scale) ** 2)
        resid = np.concatenate([a - a.mean(), b - b.mean()])
        out[q - 1] = -0.5 * n * np.log(2 * np.pi * var) - 0.5 * np.sum(resid ** 2) / var
    return out


def elbow(values):
    """Number of leading values before the first profile-likelihood elbow.

    ``values`` should be sorted nonincreasing.  A spectrum with fewer than
    three entries or no spread returns 1 with a
    :class:`DegenerateSpectrumWarning`.
    """
    d = np.asarray(values, dtype=float)
    if d.size < 3 or np.ptp(d) <= 1e-12 * max(np.max(np.abs(d)), np.finfo(float).tiny):
        warnings.warn("degenerate spectrum, defaulting to rank 1", DegenerateSpectrumWarning,
                      stacklevel=2)
        return 1
    return int(np.argmax(profile_loglik(d))) + 1


def mode_scree(that, mode, max_rank=None):
    """Scree sequence used for one mode and whether the fallback was needed.

    Square roots of the nonnegative eigenvalues of the hollowed Gram matrix.
    Falls back to the singular values of the matricization when fewer than
    three eigenvalues are nonnegative, or when no more than ``max_rank`` are
    (the hollowed scree then has no noise floor inside the search range).
    """
    ev = np.linalg.eigvalsh(hollowed_gram(that, mode))[::-1]
    nonneg = ev[ev >= 0]
    if nonneg.size >= 3 and (max_rank is None or nonneg.size > max_rank):
        return np.sqrt(nonneg), False
    m = matricize(that, mode)
    ev = np.linalg.eigvalsh(m @ m.T)[::-1]
    return np.sqrt(np.clip(ev, 0.0, None)), True


def select_ranks(that, max_rank):
    """Elbow-selected rank for each mode, capped at ``max_rank``."""
    that = as_tensor(that)
    if max_rank < 1 or max_rank > min(that.shape):
        raise ValueError(f"max_rank must be in [1, {min(that.shape)}], got {max_rank}")
    ranks = []
    for mode in MODES:
        scree, _ = mode_scree(that, mode, max_rank)
        ranks.append(min(elbow(scree), max_rank))
    return tuple(ranks)
