"""Dense 3-mode tensors: unfolding, refolding, mode products and text I/O.

Tensors are plain ``numpy.ndarray`` objects of shape ``(p1, p2, p3)`` and
matrices are 2-D arrays.  Modes are numbered 1, 2, 3.

Unfolding convention
--------------------
``matricize(t, k)`` returns a ``p_k x p_{-k}`` matrix whose columns run over
the remaining two indices in cyclic order: for mode ``k`` the index of mode
``k+1`` varies slowest and the index of mode ``k+2`` fastest (modes taken
mod 3).  Concretely (0-based)::

    mode 1: column = i2 * p3 + i3
    mode 2: column = i3 * p1 + i1
    mode 3: column = i1 * p2 + i2

With this ordering the Kronecker unfolding identity reads::

    M_1(S x1 U1 x2 U2 x3 U3) = U1 M_1(S) (U2 kron U3)^T
    M_2(S x1 U1 x2 U2 x3 U3) = U2 M_2(S) (U3 kron U1)^T
    M_3(S x1 U1 x2 U2 x3 U3) = U3 M_3(S) (U1 kron U2)^T
"""

import math

import numpy as np

from .exceptions import TensorFormatError

MODES = (1, 2, 3)


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")
    return mode - 1


def _axes(mode):
    k = _check_mode(mode)
    return (k, (k + 1) % 3, (k + 2) % 3)


def as_tensor(t):
    """Validate and return ``t`` as a finite float64 3-way array."""
    arr = np.asarray(t, dtype=float)
    if arr.ndim != 3:
        raise ValueError(f"expected a 3-mode tensor, got ndim={arr.ndim}")
    if 0 in arr.shape:
        raise ValueError(f"tensor dimensions must be positive, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains non-finite entries")
    return arr


def other_modes(mode):
    """The two remaining modes in cyclic order, e.g. ``other_modes(2) == (3, 1)``."""
    _, a, b = _axes(mode)
    return a + 1, b + 1


def matricize(t, mode):
    """Mode-``mode`` unfolding of ``t`` (see module docstring for the column order)."""
    t = np.asarray(t)
    axes = _axes(mode)
    if t.ndim != 3:
        raise ValueError(f"expected a 3-mode tensor, got ndim={t.ndim}")
    p = t.shape[axes[0]]
    return np.ascontiguousarray(np.transpose(t, axes)).reshape(p, -1)


def refold(m, mode, dims):
    """Inverse of :func:`matricize` for the given mode and target dimensions."""
    m = np.asarray(m)
    axes = _axes(mode)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise ValueError(f"dims must have length 3, got {dims}")
    permuted = tuple(dims[a] for a in axes)
    if m.ndim != 2 or m.shape != (permuted[0], permuted[1] * permuted[2]):
        raise ValueError(
            f"cannot refold a {m.shape} matrix along mode {mode} into {dims}")
    return np.transpose(m.reshape(permuted), np.argsort(axes))


def mode_product(t, m, mode):
    """Multiply ``t`` along ``mode`` by the matrix ``m`` (applied as given).

    ``(t x_1 m)[j, i2, i3] = sum_{i1} t[i1, i2, i3] * m[j, i1]``; the output
    replaces ``p_mode`` by ``m.shape[0]``.
    """
    t = np.asarray(t)
    m = np.asarray(m)
    k = _check_mode(mode)
    if t.ndim != 3 or m.ndim != 2 or m.shape[1] != t.shape[k]:
        raise ValueError(
            f"mode-{mode} product needs a matrix with {t.shape[k]} columns, "
            f"got shape {m.shape}")
    out = np.tensordot(m, t, axes=(1, k))
    return np.moveaxis(out, 0, k)


def multilinear(core, m1, m2, m3):
    """Tucker synthesis ``core x1 m1 x2 m2 x3 m3``."""
    core = np.asarray(core)
    mats = [np.asarray(m) for m in (m1, m2, m3)]
    if core.ndim != 3:
        raise ValueError(f"core must be 3-mode, got ndim={core.ndim}")
    for k, m in enumerate(mats):
        if m.ndim != 2 or m.shape[1] != core.shape[k]:
            raise ValueError(
                f"factor {k + 1} must have {core.shape[k]} columns, got {m.shape}")
    out = core
    for k, m in enumerate(mats):
        out = mode_product(out, m, k + 1)
    return out


def project(t, factors, skip=None):
    """Contract ``t`` with ``U_k^T`` on every mode except ``skip``.

    ``factors`` is a length-3 sequence of ``p_k x r_k`` matrices; entries may
    be ``None`` for the skipped mode.
    """
    out = np.asarray(t)
    for mode in MODES:
        if mode == skip:
            continue
        out = mode_product(out, np.asarray(factors[mode - 1]).T, mode)
    return out


# --------------------------------------------------------------------------
# text format: header "p1 p2 p3" then p1*p2*p3 reals in (i1, i2, i3) order

def read_tensor(path):
    """Read a tensor in the whitespace text format.

    The first non-blank line holds ``p1 p2 p3``; the remaining tokens are the
    entries in lexicographic ``(i1, i2, i3)`` order with ``i3`` fastest.

    Raises
    ------
    TensorFormatError
        On a bad header, a wrong number of values, or a non-finite or
        unparsable value (the message carries the line number).
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    header_line = None
    for lineno, line in enumerate(lines, start=1):
        if line.strip():
            header_line = lineno
            break
    if header_line is None:
        raise TensorFormatError("empty tensor file", line=1)

    tokens = lines[header_line - 1].split()
    if len(tokens) != 3:
        raise TensorFormatError(
            f"header must be 'p1 p2 p3', got {len(tokens)} fields", line=header_line)
    try:
        dims = tuple(int(tok) for tok in tokens)
    except ValueError:
        raise TensorFormatError("dimensions must be integers", line=header_line) from None
    if min(dims) < 1:
        raise TensorFormatError("dimensions must be positive", line=header_line)

    expected = math.prod(dims)
    values = np.empty(expected, dtype=float)
    n = 0
    for lineno in range(header_line + 1, len(lines) + 1):
        for tok in lines[lineno - 1].split():
            try:
                val = float(tok)
            except ValueError:
                raise TensorFormatError(f"cannot parse value {tok!r}", line=lineno) from None
            if not math.isfinite(val):
                raise TensorFormatError(f"non-finite value {tok!r}", line=lineno)
            if n >= expected:
                raise TensorFormatError(
                    f"too many values (expected {expected})", line=lineno)
            values[n] = val
            n += 1
    if n != expected:
        raise TensorFormatError(
            f"expected {expected} values, found {n}", line=len(lines))
    return values.reshape(dims)


def write_tensor(path, t):
    """Write ``t`` in the text format read by :func:`read_tensor`."""
    t = as_tensor(t)
    p1, p2, p3 = t.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{p1} {p2} {p3}\n")
        for row in t.reshape(p1 * p2, p3):
            fh.write(" ".join(f"{x:.17g}" for x in row))
            fh.write("\n")
