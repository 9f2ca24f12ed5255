"""The polarizing transform ``x -> x G_n`` with ``G_n = B_n F^{(x)m}`` over GF(2).

Vectors are row vectors and indices are 0-based; index ``i`` here is
index ``i + 1`` in the usual 1-based notation.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .exceptions import ParameterError


def log2_exact(n: int) -> int:
    """Return ``m`` with ``n == 2**m``, or raise."""
    n = int(n)
    if n < 1 or n & (n - 1):
        raise ParameterError(f"length {n} is not a power of two")
    return n.bit_length() - 1


@lru_cache(maxsize=32)
def _bit_reversal(n: int) -> np.ndarray:
    m = log2_exact(n)
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(m):
        rev |= ((idx >> b) & 1) << (m - 1 - b)
    rev.setflags(write=False)
    return rev


def bit_reversal(n: int) -> np.ndarray:
    """Permutation sending ``i`` to the ``log2(n)``-bit reversal of ``i``."""
    return _bit_reversal(int(n))


def butterfly(x: np.ndarray) -> np.ndarray:
    """``x F^{(x)m}`` along the last axis, in place on a copy."""
    x = np.array(x, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    m = log2_exact(n)
    lead = x.shape[:-1]
    for s in range(m):
        h = 1 << s
        v = x.reshape(lead + (n // (2 * h), 2, h))
        v[..., 0, :] ^= v[..., 1, :]
    return x


def polar_transform(x) -> np.ndarray:
    """Compute ``x G_n`` over GF(2) along the last axis.

    The transform is an involution, so it also inverts itself.
    """
    x = np.asarray(x)
    if x.ndim == 0:
        raise ParameterError("polar_transform needs at least one axis")
    if x.size and (x.min() < 0 or x.max() > 1):
        raise ParameterError("polar_transform expects bits")
    n = x.shape[-1]
    log2_exact(n)
    return butterfly(x.astype(np.uint8)[..., bit_reversal(n)])


def generator_matrix(n: int) -> np.ndarray:
    """Explicit ``G_n`` as a dense 0/1 matrix (for small ``n``)."""
    m = log2_exact(n)
    f = np.array([[1, 0], [1, 1]], dtype=np.int64)
    k = np.ones((1, 1), dtype=np.int64)
    for _ in range(m):
        k = np.kron(k, f)
    b = np.zeros((n, n), dtype=np.int64)
    b[np.arange(n), bit_reversal(n)] = 1
    return (b @ k) % 2
