"""Lattice-point and multi-index arithmetic.

Covariables live on the integer lattice Z^n; regularity of symbols is measured
through iterated forward differences.  Everything here is exact integer stencil
arithmetic on top of whatever (scalar or matrix) values the supplied lattice
functions return.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError

LatticePoint = tuple  # n signed integers
MultiIndex = tuple  # n non-negative integers


def as_point(k) -> tuple:
    """Normalize an int or int sequence to a tuple of Python ints."""
    if isinstance(k, (int, np.integer)):
        return (int(k),)
    return tuple(int(c) for c in k)


def as_multiindex(alpha, n: int) -> tuple:
    a = as_point(alpha)
    if len(a) != n:
        raise DomainError(f"multi-index of length {len(a)}, expected {n}")
    if any(c < 0 for c in a):
        raise DomainError(f"multi-index must be non-negative, got {a}")
    return a


def order(alpha) -> int:
    """|alpha|, the total order of a multi-index."""
    return int(sum(as_point(alpha)))


def bracket(k) -> float:
    """Japanese bracket <k> = (1 + |k|^2)^(1/2)."""
    kk = as_point(k)
    return math.sqrt(1.0 + sum(c * c for c in kk))


def aniso_bracket(k, lam: complex, m: float) -> float:
    """Anisotropic bracket <k, lam> = (1 + |k|^2 + |lam|^(2/m))^(1/2)."""
    if m <= 0:
        raise DomainError(f"order m must be positive, got {m}")
    kk = as_point(k)
    return math.sqrt(1.0 + sum(c * c for c in kk) + abs(lam) ** (2.0 / m))


def aniso_magnitude(k, lam: complex, m: float) -> float:
    """|(k, lam)| = (|k|^2 + |lam|^(2/m))^(1/2), the threshold quantity."""
    if m <= 0:
        raise DomainError(f"order m must be positive, got {m}")
    kk = as_point(k)
    return math.sqrt(sum(c * c for c in kk) + abs(lam) ** (2.0 / m))


@dataclass(frozen=True)
class TruncationBox:
    """Finite surrogate for Z^n: all k with |k|_inf <= K.

    Enumeration is lexicographic from (-K, ..., -K) to (K, ..., K) and is the
    deterministic order used everywhere coefficients are stored flat.
    """

    K: int
    n: int

    def __post_init__(self):
        if self.K < 0:
            raise DomainError(f"box bound K must be >= 0, got {self.K}")
        if self.n < 1:
            raise DomainError(f"dimension n must be >= 1, got {self.n}")

    @property
    def side(self) -> int:
        return 2 * self.K + 1

    @property
    def size(self) -> int:
        return self.side**self.n

    def points(self) -> Iterator[tuple]:
        rng = range(-self.K, self.K + 1)
        return itertools.product(rng, repeat=self.n)

    def point_array(self) -> np.ndarray:
        """All points as an (size, n) int array in enumeration order."""
        axes = [np.arange(-self.K, self.K + 1)] * self.n
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def contains(self, k) -> bool:
        kk = as_point(k)
        return len(kk) == self.n and all(abs(c) <= self.K for c in kk)

    def shell_mask(self) -> np.ndarray:
        """Boolean mask (in enumeration order) of the outermost shell |k|_inf = K."""
        pts = self.point_array()
        return np.abs(pts).max(axis=1) == self.K


def iter_multiindices(n: int, max_order: int) -> Iterator[tuple]:
    """All alpha in N_0^n with |alpha| <= max_order, ordered by order then lexicographically."""
    for total in range(max_order + 1):
        for alpha in itertools.product(range(total + 1), repeat=n):
            if sum(alpha) == total:
                yield alpha


def multiindices_leq(alpha) -> Iterator[tuple]:
    """All beta with 0 <= beta <= alpha componentwise, lexicographic."""
    a = as_point(alpha)
    return itertools.product(*(range(c + 1) for c in a))


def multiindex_binom(alpha, beta) -> int:
    """Product of componentwise binomial coefficients."""
    return int(
        np.prod([math.comb(a, b) for a, b in zip(as_point(alpha), as_point(beta))])
    )


def _shift(k: tuple, axis: int, by: int = 1) -> tuple:
    return k[:axis] + (k[axis] + by,) + k[axis + 1 :]


def forward_difference(f: Callable, alpha, k):
    """Iterated forward difference (Delta^alpha f)(k).

    Computed by repeated first differences f(k + delta_j) - f(k); alpha = 0
    returns f(k) itself.  f must be evaluable on the stencil {k, ..., k+alpha}.
    """
    k = as_point(k)
    alpha = as_multiindex(alpha, len(k))

    def rec(a: tuple, base: tuple):
        for j, aj in enumerate(a):
            if aj > 0:
                lowered = a[:j] + (aj - 1,) + a[j + 1 :]
                return rec(lowered, _shift(base, j)) - rec(lowered, base)
        return np.asarray(f(base))

    return rec(alpha, k)


def backward_difference(f: Callable, alpha, k):
    """Iterated backward difference, stencil {k - alpha, ..., k}."""
    k = as_point(k)
    alpha = as_multiindex(alpha, len(k))

    def rec(a: tuple, base: tuple):
        for j, aj in enumerate(a):
            if aj > 0:
                lowered = a[:j] + (aj - 1,) + a[j + 1 :]
                return rec(lowered, base) - rec(lowered, _shift(base, j, -1))
        return np.asarray(f(base))

    return rec(alpha, k)


def _compose(x, y):
    x = np.asarray(x)
    y = np.asarray(y)
    if x.ndim == 2 and y.ndim == 2:
        return x @ y
    return x * y


def leibniz_rhs(f: Callable, g: Callable, alpha, k):
    """Right side of the discrete Leibniz formula for Delta^alpha (f g)(k).

    Sum over beta <= alpha of binom(alpha, beta) (Delta^beta f)(k)
    (Delta^(alpha-beta) g)(k + beta).  Matrix values compose in that order.
    """
    k = as_point(k)
    alpha = as_multiindex(alpha, len(k))
    total = None
    for beta in multiindices_leq(alpha):
        gamma = tuple(a - b for a, b in zip(alpha, beta))
        shifted = tuple(c + b for c, b in zip(k, beta))
        term = multiindex_binom(alpha, beta) * _compose(
            forward_difference(f, beta, k), forward_difference(g, gamma, shifted)
        )
        total = term if total is None else total + term
    return total


def boxed(f: Callable, box: TruncationBox, pad: int = 0) -> Callable:
    """Wrap f so evaluation outside the box (padded by pad on both sides) raises."""

    def wrapped(k):
        kk = as_point(k)
        if len(kk) != box.n or any(abs(c) > box.K + pad for c in kk):
            raise DomainError(f"stencil point {kk} outside |k|_inf <= {box.K + pad}")
        return f(kk)

    return wrapped
