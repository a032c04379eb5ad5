"""Independent reference computations for the test suite.

Nothing here imports tensormm; each oracle is a slow, direct transcription of
a definition.
"""

import itertools
import math

import numpy as np


def jacobi_eigh(a, sweeps=100, tol=1e-15):
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Returns eigenvalues sorted nonincreasing and matching eigenvectors.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(np.linalg.norm(a), 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    vals = np.diag(a)
    order = np.argsort(vals)[::-1]
    return vals[order], v[:, order]


def unfold_by_enumeration(t, mode):
    """Mode-k unfolding by looping over every index: for mode k the column is
    (index of mode k+1) * p_{k+2} + (index of mode k+2), modes cyclic, 0-based."""
    t = np.asarray(t)
    dims = t.shape
    k = mode - 1
    a, b = (k + 1) % 3, (k + 2) % 3
    out = np.zeros((dims[k], dims[a] * dims[b]))
    for idx in itertools.product(*(range(d) for d in dims)):
        out[idx[k], idx[a] * dims[b] + idx[b]] = t[idx]
    return out


def mode1_product_by_summation(t, m):
    t = np.asarray(t)
    p1, p2, p3 = t.shape
    out = np.zeros((m.shape[0], p2, p3))
    for j in range(m.shape[0]):
        for i2 in range(p2):
            for i3 in range(p3):
                out[j, i2, i3] = sum(t[i1, i2, i3] * m[j, i1] for i1 in range(p1))
    return out


def mixed_tensor_by_summation(core, pi1, pi2, pi3):
    """T_{i1 i2 i3} = sum_{l1 l2 l3} S_{l1 l2 l3} Pi1_{i1 l1} Pi2_{i2 l2} Pi3_{i3 l3}."""
    r1, r2, r3 = core.shape
    out = np.zeros((pi1.shape[0], pi2.shape[0], pi3.shape[0]))
    for i1 in range(pi1.shape[0]):
        for i2 in range(pi2.shape[0]):
            for i3 in range(pi3.shape[0]):
                acc = 0.0
                for l1 in range(r1):
                    for l2 in range(r2):
                        for l3 in range(r3):
                            acc += core[l1, l2, l3] * pi1[i1, l1] * pi2[i2, l2] * pi3[i3, l3]
                out[i1, i2, i3] = acc
    return out


def max_row_norm_loop(m):
    best = 0.0
    for row in np.asarray(m):
        best = max(best, math.sqrt(sum(x * x for x in row)))
    return best


def profile_loglik_direct(d):
    """Two-group Gaussian profile log-likelihood via scipy.stats, one per split."""
    from scipy.stats import norm

    d = list(map(float, d))
    n = len(d)
    out = []
    for q in range(1, n):
        g1, g2 = d[:q], d[q:]
        m1, m2 = sum(g1) / len(g1), sum(g2) / len(g2)
        s1 = sum((x - m1) ** 2 for x in g1)
        s2 = sum((x - m2) ** 2 for x in g2)
        sd = math.sqrt((s1 + s2) / (n - 2))
        out.append(sum(norm.logpdf(x, m1, sd) for x in g1)
                   + sum(norm.logpdf(x, m2, sd) for x in g2))
    return np.array(out)


def best_permutation_errors(est, truth):
    """Brute force over permutation matrices: (min max-row-l2, min mean-row-l1)."""
    r = est.shape[1]
    best2, best1 = math.inf, math.inf
    for perm in itertools.permutations(range(r)):
        pmat = np.zeros((r, r))
        for l, m in enumerate(perm):
            pmat[m, l] = 1.0
        diff = truth - est @ pmat
        best2 = min(best2, max(math.sqrt(sum(x * x for x in row)) for row in diff))
        best1 = min(best1, sum(sum(abs(x) for x in row) for row in diff) / len(diff))
    return best2, best1


def random_orthonormal(rng, p, r):
    q, rr = np.linalg.qr(rng.standard_normal((p, r)))
    return q * np.sign(np.diag(rr))
