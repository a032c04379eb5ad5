"""Tensor mixed-membership blockmodel: ground truth and synthetic noise.

All samplers take an explicit ``numpy.random.Generator``.  Use
:func:`make_rng` to build reproducible, counter-based (Philox) streams keyed
by a seed plus any number of integer indices.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import GenerationError, RankDeficiencyError
from .linalg import incoherence, tensor_kappa, tensor_lambda_min, tucker_factors, svd_left_top
from .tensor_core import MODES, matricize, multilinear, other_modes

CORE_RETRIES = 100


def make_rng(seed, *key):
    """Philox generator for ``seed`` and an optional integer stream key.

    ``make_rng(s, 3, 7)`` and ``make_rng(s, 3, 8)`` are independent streams;
    the same arguments always give the same stream on every platform.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def _check_ranks(ranks):
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != 3 or min(ranks) < 1:
        raise ValueError(f"ranks must be three positive integers, got {ranks}")
    return ranks


def sample_core(ranks, delta, rng, max_tries=CORE_RETRIES):
    """Gaussian core rescaled so its smallest matricization singular value is ``delta``.

    Entries are drawn i.i.d. N(0, 1) and the whole core is multiplied by
    ``delta / lambda_min(core)``, which leaves its condition number unchanged.
    Draws with a rank-deficient matricization are rejected and redrawn.
    """
    ranks = _check_ranks(ranks)
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    r1, r2, r3 = ranks
    if r1 > r2 * r3 or r2 > r3 * r1 or r3 > r1 * r2:
        raise ValueError(f"ranks {ranks} admit no full-rank core (some r_k exceeds the "
                         "product of the other two)")
    for _ in range(max_tries):
        core = rng.standard_normal(ranks)
        try:
            lam = tensor_lambda_min(core, ranks)
        except RankDeficiencyError:
            continue
        if lam > 1e-10 * np.abs(core).max():
            return core * (delta / lam)
    raise GenerationError(f"no full-rank core of shape {ranks} after {max_tries} draws")


def sample_membership(p, r, rng, concentration=1.0, shuffle=False):
    """Mixed membership matrix with pure nodes in the first ``r`` rows.

    Rows ``r..p-1`` are i.i.d. Dirichlet(concentration * ones(r)).  With
    ``shuffle=True`` the rows are randomly permuted afterwards.
    """
    if r < 1 or p < r:
        raise ValueError(f"need p >= r >= 1, got p={p}, r={r}")
    pi = np.empty((p, r))
    pi[:r] = np.eye(r)
    if p > r:
        pi[r:] = rng.dirichlet(np.full(r, float(concentration)), size=p - r)
    if shuffle:
        pi = pi[rng.permutation(p)]
    return pi


def sample_blockmodel_membership(p, r, rng):
    """One-hot memberships with balanced community sizes (``floor(p/r)`` or ``ceil(p/r)``)."""
    if r < 1 or p < r:
        raise ValueError(f"need p >= r >= 1, got p={p}, r={r}")
    labels = rng.permutation(np.arange(p) % r)
    return np.eye(r)[labels]


def pure_node_indices(pi, atol=1e-12):
    """For each community, the first row index that equals ``e_l`` (or -1 if none)."""
    pi = np.asarray(pi)
    out = np.full(pi.shape[1], -1)
    for l in range(pi.shape[1]):
        target = np.zeros(pi.shape[1])
        target[l] = 1.0
        hits = np.flatnonzero(np.all(np.abs(pi - target) <= atol, axis=1))
        if hits.size:
            out[l] = hits[0]
    return out


def is_membership(pi, atol=1e-12):
    pi = np.asarray(pi)
    return (pi.ndim == 2 and bool(np.all(pi >= 0))
            and bool(np.allclose(pi.sum(axis=1), 1.0, rtol=0, atol=atol)))


@dataclass(frozen=True)
class NoiseSpec:
    """Heteroskedastic Gaussian noise: ``sigma_ijk ~ sigma_max * Beta(alpha, alpha)``."""

    sigma_max: float
    alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma_max >= 0:
            raise ValueError(f"sigma_max must be >= 0, got {self.sigma_max}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")


def sample_noise(dims, spec, rng=None):
    """Draw per-entry scales, then independent ``N(0, sigma_ijk^2)`` noise."""
    dims = tuple(int(d) for d in dims)
    if rng is None:
        rng = make_rng(spec.seed)
    if spec.sigma_max == 0:
        return np.zeros(dims)
    scales = spec.sigma_max * rng.beta(spec.alpha, spec.alpha, size=dims)
    return scales * rng.standard_normal(dims)


@dataclass(frozen=True)
class MixedModel:
    """Ground truth ``T = S x1 Pi1 x2 Pi2 x3 Pi3`` and its spectral summaries."""

    core: np.ndarray
    memberships: tuple = field(default_factory=tuple)

    def __post_init__(self):
        core = np.asarray(self.core, dtype=float)
        pis = tuple(np.asarray(pi, dtype=float) for pi in self.memberships)
        if core.ndim != 3 or len(pis) != 3:
            raise ValueError("need a 3-mode core and three membership matrices")
        for k, pi in enumerate(pis):
            if pi.ndim != 2 or pi.shape[1] != core.shape[k]:
                raise ValueError(
                    f"membership {k + 1} has shape {pi.shape}, core dim is {core.shape[k]}")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "memberships", pis)

    @property
    def ranks(self):
        return self.core.shape

    @property
    def dims(self):
        return tuple(pi.shape[0] for pi in self.memberships)

    @cached_property
    def tensor(self):
        return synth_tensor(self)

    @cached_property
    def delta(self):
        return tensor_lambda_min(self.core, self.ranks)

    @cached_property
    def lam(self):
        return tensor_lambda_min(self.tensor, self.ranks)

    @cached_property
    def kappa(self):
        return tensor_kappa(self.tensor, self.ranks)

    @cached_property
    def factors(self):
        """Exact singular factors ``U_k`` of the signal tensor."""
        return tucker_factors(self.tensor, self.ranks)

    @cached_property
    def mu0(self):
        return incoherence(self.factors)


def synth_tensor(model):
    """Signal tensor of ``model`` via multilinear synthesis."""
    return multilinear(model.core, *model.memberships)


def sample_mixed_model(dims, ranks, delta, rng, core=None, concentration=1.0, shuffle=False):
    """Convenience: draw (or reuse) a core and three Dirichlet memberships."""
    ranks = _check_ranks(ranks)
    if core is None:
        core = sample_core(ranks, delta, rng)
    pis = tuple(sample_membership(p, r, rng, concentration, shuffle)
                for p, r in zip(dims, ranks))
    return MixedModel(core, pis)


def sample_blockmodel(dims, ranks, delta, rng, core=None):
    ranks = _check_ranks(ranks)
    if core is None:
        core = sample_core(ranks, delta, rng)
    pis = tuple(sample_blockmodel_membership(p, r, rng) for p, r in zip(dims, ranks))
    return MixedModel(core, pis)


# --------------------------------------------------------------------------
# diagnostics tied to the regularity / signal-strength assumptions

def regularity_constants(pi):
    """Eigenvalue range of ``Pi^T Pi`` scaled by ``r / p`` (both O(1) when regular)."""
    pi = np.asarray(pi, dtype=float)
    p, r = pi.shape
    ev = np.linalg.eigvalsh(pi.T @ pi)
    return ev[0] * r / p, ev[-1] * r / p


def signal_strength_rhs(dims, ranks, kappa=1.0):
    """Right-hand side ``kappa^2 p^2 log(p) r1 r2 r3 / (p1 p2 p3 p_min^{1/2})``.

    The signal-strength condition asks ``Delta^2 / sigma^2`` to exceed a
    constant multiple of this quantity.
    """
    p = max(dims)
    return (kappa ** 2 * p ** 2 * np.log(p) * np.prod(ranks)
            / (np.prod(dims, dtype=float) * min(dims) ** 0.5))


def pure_factor_identity(model, mode):
    """Return ``(U_pure U_pure^T, (Pi^T Pi)^{-1}, ||U - Pi U_pure||_max)`` for one mode.

    ``U`` is the exact singular factor of the mode's matricization and
    ``U_pure`` its rows at the first pure node of each community.
    """
    pi = model.memberships[mode - 1]
    u = model.factors[mode - 1]
    idx = pure_node_indices(pi)
    if np.any(idx < 0):
        raise ValueError(f"mode {mode} has a community without a pure node")
    u_pure = u[idx]
    gram_inv = np.linalg.inv(pi.T @ pi)
    return u_pure @ u_pure.T, gram_inv, float(np.max(np.abs(u - pi @ u_pure)))


def lambda_bracket(model, mode):
    """Two-sided bound on ``sigma_{r_k}(M_k(T))^2`` from the membership Grams.

    With ``s = sigma_{r_k}(M_k(S))``, ``A = Pi_k^T Pi_k`` and ``B`` the Gram
    of the Kronecker product of the other two memberships (in unfolding
    order)::

        s^2 lmin(A) lmin(B) <= sigma_{r_k}(M_k(T))^2 <= s^2 lmax(A) lmax(B)

    Returns ``(lower, value, upper)``.
    """
    r = model.ranks[mode - 1]
    pi = model.memberships[mode - 1]
    a, b = other_modes(mode)
    kron = np.kron(model.memberships[a - 1], model.memberships[b - 1])
    ev_a = np.linalg.eigvalsh(pi.T @ pi)
    ev_b = np.linalg.eigvalsh(kron.T @ kron)
    s = svd_left_top(matricize(model.core, mode), r)[0][-1]
    value = svd_left_top(matricize(model.tensor, mode), r)[0][-1]
    return s ** 2 * ev_a[0] * ev_b[0], value ** 2, s ** 2 * ev_a[-1] * ev_b[-1]
