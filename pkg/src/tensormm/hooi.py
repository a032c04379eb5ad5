"""Diagonal-deletion spectral initialization and higher-order orthogonal iteration."""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegeneracyError, DegenerateSpectrumWarning
from .linalg import hollow, sin_theta, svd_left_top, sym_eig_top
from .tensor_core import MODES, as_tensor, matricize, multilinear, project

SAFETY_SWEEPS = 2


def hollowed_gram(that, mode):
    """``Gamma(M_k(T) M_k(T)^T)``: the mode-k Gram matrix with zero diagonal."""
    m = matricize(that, mode)
    return hollow(m @ m.T)


def dd_init(that, ranks, modes=(2, 3)):
    """Diagonal-deletion initialization.

    For each requested mode, the leading ``r_k`` eigenvectors of the hollowed
    Gram matrix of the mode-k matricization.  HOOI needs modes 2 and 3; mode 1
    may be requested for diagnostics.

    Returns
    -------
    dict
        ``{mode: p_k x r_k orthonormal array}``.

    Warns
    -----
    DegenerateSpectrumWarning
        When a hollowed Gram matrix is identically zero; the returned basis is
        then an arbitrary (coordinate) orthonormal basis.
    """
    that = as_tensor(that)
    out = {}
    for mode in modes:
        r = ranks[mode - 1]
        if r > that.shape[mode - 1]:
            raise ValueError(f"rank {r} exceeds dimension {that.shape[mode - 1]} of mode {mode}")
        g = hollowed_gram(that, mode)
        if not np.any(g):
            warnings.warn(f"hollowed Gram of mode {mode} is zero", DegenerateSpectrumWarning,
                          stacklevel=2)
        out[mode] = sym_eig_top(g, r)[1]
    return out


@dataclass(frozen=True)
class HooiOptions:
    """Stopping controls for :func:`hooi`.

    ``auto_iters`` replaces ``t_max`` with :func:`default_iters`, which needs
    ``snr`` (Delta / sigma) and ``kappa``.
    """

    t_max: int = 100
    tol: float = 1e-9
    auto_iters: bool = False
    snr: float = None
    kappa: float = None

    def __post_init__(self):
        if self.t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {self.t_max}")
        if self.tol < 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")
        if self.auto_iters and (self.snr is None or self.kappa is None):
            raise ValueError("auto_iters needs snr and kappa")


@dataclass(frozen=True)
class SweepRecord:
    iteration: int
    mode: int
    change: float
    singular_values: np.ndarray


@dataclass(frozen=True)
class FactorSet:
    """HOOI output: final factors plus the per-sweep trace."""

    factors: tuple
    ranks: tuple
    iterations_run: int
    converged: bool
    history: list = field(default_factory=list)

    def changes(self):
        """Max-over-modes subspace change per iteration."""
        out = {}
        for rec in self.history:
            out[rec.iteration] = max(out.get(rec.iteration, 0.0), rec.change)
        return [out[t] for t in sorted(out)]


def default_iters(p_vec, r_vec, delta_over_sigma, kappa):
    """Iteration count ``ceil(log(kappa p sqrt(r1 r2 r3) / ((Delta/sigma) sqrt(p1 p2 p3))))``.

    Floored at 1 when the log argument is at most ``e``, then padded with
    ``SAFETY_SWEEPS`` extra sweeps.
    """
    if min(p_vec) <= 0 or min(r_vec) <= 0 or delta_over_sigma <= 0 or kappa <= 0:
        raise ValueError("all inputs must be positive")
    p = max(p_vec)
    arg = kappa * p * math.sqrt(math.prod(r_vec)) / (
        delta_over_sigma * math.sqrt(math.prod(p_vec)))
    if arg <= 1.0:
        return 1 + SAFETY_SWEEPS
    return max(1, math.ceil(math.log(arg))) + SAFETY_SWEEPS


def hooi(that, ranks, init, opts=None):
    """Higher-order orthogonal iteration.

    At iteration ``t`` the modes are updated in order 1, 2, 3; mode ``k``
    takes the leading ``r_k`` left singular vectors of the mode-k unfolding
    of ``that`` contracted with the already-updated factors of earlier modes
    and the previous-iteration factors of later modes.  Iteration stops once
    every mode's sin-theta change is below ``opts.tol`` or after ``t_max``
    iterations.

    Parameters
    ----------
    that : (p1, p2, p3) array_like
    ranks : (r1, r2, r3)
    init : sequence or dict
        ``(U2, U3)``, ``(U1, U2, U3)`` or ``{mode: U}`` containing modes 2
        and 3.  A mode-1 initial factor only feeds the first change record.
    opts : HooiOptions, optional

    Raises
    ------
    DegeneracyError
        If a projected unfolding loses rank (``sigma_r < 1e-12 sigma_1``).
    """
    that = as_tensor(that)
    opts = opts or HooiOptions()
    ranks = tuple(int(r) for r in ranks)
    if isinstance(init, dict):
        current = [init.get(1), init[2], init[3]]
    elif len(init) == 2:
        current = [None, init[0], init[1]]
    else:
        current = list(init)
    for mode in (2, 3):
        u = np.asarray(current[mode - 1], dtype=float)
        if u.shape != (that.shape[mode - 1], ranks[mode - 1]):
            raise ValueError(f"initial factor for mode {mode} has shape {u.shape}")
        if np.max(np.abs(u.T @ u - np.eye(u.shape[1]))) > 1e-8:
            raise ValueError(f"initial factor for mode {mode} is not orthonormal")
        current[mode - 1] = u

    t_max = opts.t_max
    if opts.auto_iters:
        t_max = default_iters(that.shape, ranks, opts.snr, opts.kappa)

    history = []
    converged = False
    t = 0
    while t < t_max:
        t += 1
        changes = []
        for mode in MODES:
            m = matricize(project(that, current, skip=mode), mode)
            s, u = svd_left_top(m, ranks[mode - 1])
            if s[0] == 0.0 or s[-1] < 1e-12 * s[0]:
                raise DegeneracyError(
                    f"rank collapse in mode {mode} at iteration {t}", mode=mode, iteration=t)
            prev = current[mode - 1]
            change = sin_theta(prev, u) if prev is not None else math.inf
            current[mode - 1] = u
            changes.append(change)
            history.append(SweepRecord(t, mode, change, s))
        if max(changes) < opts.tol:
            converged = True
            break

    return FactorSet(tuple(current), ranks, t, converged, history)


def estimate_snr(that, ranks, refine=10):
    """Plug-in ``(Delta/sigma, kappa)`` for :func:`default_iters` on observed data.

    Diagonal-deletion factors refined by ``refine`` HOOI sweeps give a
    projected core; its matricization spectra give ``lambda`` and ``kappa``,
    the residual energy gives a per-entry noise scale, and ``lambda/sigma``
    is converted to the ``Delta/sigma`` scale by ``sqrt(r1 r2 r3 / (p1 p2 p3))``.
    """
    that = as_tensor(that)
    ranks = tuple(int(r) for r in ranks)
    fs = hooi(that, ranks, dd_init(that, ranks), HooiOptions(t_max=max(1, refine)))
    core = core_estimate(that, fs)
    spectra = [svd_left_top(matricize(core, m), r)[0] for m, r in zip(MODES, ranks)]
    lam = min(s[-1] for s in spectra)
    kappa = max(s[0] / s[-1] if s[-1] > 0 else math.inf for s in spectra)
    total = float(np.sum(that ** 2))
    resid = total - float(np.sum(core ** 2))
    dof = that.size - math.prod(ranks)
    if dof <= 0 or resid <= 1e-12 * total:
        return math.inf, kappa
    snr = (lam / math.sqrt(resid / dof)) * math.sqrt(math.prod(ranks) / that.size)
    return snr, kappa


def core_estimate(that, fs):
    """Tucker core ``T x1 U1^T x2 U2^T x3 U3^T`` for the factors in ``fs``."""
    return project(that, fs.factors)


def reconstruct(that, fs):
    """Projection of ``that`` onto the estimated Tucker subspace."""
    return multilinear(core_estimate(that, fs), *fs.factors)
