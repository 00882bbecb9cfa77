"""Fourier analysis on uniform torus grids and multiplier quantization.

Functions live on the nodal grid x_i = -pi + 2 pi i / N per axis (the node set
contains -pi and excludes +pi), where character orthogonality is exact, so the
trapezoidal transform is the exact Fourier transform of band-limited data.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError
from .lattice import TruncationBox, as_multiindex, as_point


def axis_nodes(N: int) -> np.ndarray:
    """The N grid nodes -pi + 2 pi i / N of one axis."""
    return -np.pi + 2.0 * np.pi * np.arange(N) / N


def max_band(N: int) -> int:
    """Largest K with N >= 2K+1, the band representable without aliasing."""
    return (N - 1) // 2


@dataclass
class GridFunction:
    """Samples of a vector-valued function on the uniform N^n torus grid.

    values has shape (N,)*n + fiber_shape; the fiber is a d-vector for
    ordinary functions and a (d, d) matrix for kernel-valued grids.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim < self.n:
            raise DimensionMismatchError(
                f"values of rank {self.values.ndim} for an n={self.n} grid"
            )
        sides = self.values.shape[: self.n]
        if len(set(sides)) > 1:
            raise DimensionMismatchError(f"grid must be uniform, got sides {sides}")
        if not np.all(np.isfinite(self.values)):
            raise DimensionMismatchError("grid values must be finite")

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def fiber_shape(self) -> tuple:
        return self.values.shape[self.n :]

    @property
    def d(self) -> int:
        return self.fiber_shape[-1] if self.fiber_shape else 1

    @classmethod
    def zeros(cls, n: int, d: int, N: int) -> "GridFunction":
        return cls(n, np.zeros((N,) * n + (d,), dtype=complex))

    @classmethod
    def from_callable(cls, func: Callable, n: int, d: int, N: int) -> "GridFunction":
        """Sample func(x) (returning a length-d vector) on the grid."""
        nodes = axis_nodes(N)
        vals = np.zeros((N,) * n + (d,), dtype=complex)
        for idx in np.ndindex(*(N,) * n):
            x = tuple(nodes[i] for i in idx)
            vals[idx] = np.asarray(func(x), dtype=complex).reshape(d)
        return cls(n, vals)

    @classmethod
    def from_mode(cls, n: int, N: int, k0, z) -> "GridFunction":
        """The pure mode e^(i k0 . x) z."""
        k0 = as_point(k0)
        if len(k0) != n:
            raise DimensionMismatchError(f"mode {k0} for dimension n={n}")
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        nodes = axis_nodes(N)
        phase = np.ones((N,) * n, dtype=complex)
        for j, kj in enumerate(k0):
            ax = np.exp(1j * kj * nodes).reshape(
                (1,) * j + (N,) + (1,) * (n - j - 1)
            )
            phase = phase * ax
        return cls(n, phase[..., None] * z)

    def copy(self) -> "GridFunction":
        return GridFunction(self.n, self.values.copy())

    # ---- file formats ----------------------------------------------------

    def to_csv(self, path) -> None:
        """Write x-coordinates plus re/im columns per fiber component."""
        if len(self.fiber_shape) != 1:
            raise DimensionMismatchError("CSV export supports vector fibers only")
        d = self.d
        nodes = axis_nodes(self.N)
        header = [f"x{j+1}" for j in range(self.n)]
        for c in range(d):
            header += [f"re{c+1}", f"im{c+1}"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for idx in np.ndindex(*(self.N,) * self.n):
                row = [repr(nodes[i]) for i in idx]
                for c in range(d):
                    v = self.values[idx + (c,)]
                    row += [repr(v.real), repr(v.imag)]
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path, n: int) -> "GridFunction":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, data = rows[0], rows[1:]
        d = (len(header) - n) // 2
        if len(header) != n + 2 * d:
            raise ConfigurationError(f"CSV header {header} does not fit n={n}")
        N = round(len(data) ** (1.0 / n))
        if N**n != len(data):
            raise ConfigurationError(f"{len(data)} rows is not an n={n} cube")
        vals = np.zeros((N,) * n + (d,), dtype=complex)
        for row, idx in zip(data, np.ndindex(*(N,) * n)):
            for c in range(d):
                vals[idx + (c,)] = float(row[n + 2 * c]) + 1j * float(row[n + 2 * c + 1])
        return cls(n, vals)

    def to_json_document(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "fiber_shape": list(self.fiber_shape),
            "values_re": self.values.real.ravel().tolist(),
            "values_im": self.values.imag.ravel().tolist(),
        }

    @classmethod
    def from_json_document(cls, doc: dict) -> "GridFunction":
        n, N = int(doc["n"]), int(doc["N"])
        fiber = tuple(int(c) for c in doc["fiber_shape"])
        shape = (N,) * n + fiber
        vals = np.asarray(doc["values_re"], dtype=float).reshape(shape) + 1j * np.asarray(
            doc["values_im"], dtype=float
        ).reshape(shape)
        return cls(n, vals)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_document(), fh)

    @classmethod
    def from_json(cls, path) -> "GridFunction":
        with open(path) as fh:
            return cls.from_json_document(json.load(fh))


@dataclass
class SpectralFunction:
    """Fourier coefficients on a truncation box.

    coefficients has shape (2K+1,)*n + fiber_shape, indexed by k + K per axis,
    which matches the box's lexicographic enumeration when raveled in C order.
    """

    n: int
    box: TruncationBox
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        expected = (self.box.side,) * self.n
        if self.coefficients.shape[: self.n] != expected:
            raise DimensionMismatchError(
                f"coefficient shape {self.coefficients.shape} does not match box side {self.box.side}"
            )

    @property
    def fiber_shape(self) -> tuple:
        return self.coefficients.shape[self.n :]

    @property
    def d(self) -> int:
        return self.fiber_shape[-1] if self.fiber_shape else 1

    def coefficient(self, k) -> np.ndarray:
        kk = as_point(k)
        if not self.box.contains(kk):
            raise DimensionMismatchError(f"{kk} outside the coefficient box")
        return self.coefficients[tuple(c + self.box.K for c in kk)]

    def copy(self) -> "SpectralFunction":
        return SpectralFunction(self.n, self.box, self.coefficients.copy())


def _alternating_sign(K: int) -> np.ndarray:
    k = np.arange(-K, K + 1)
    return np.where(k % 2 == 0, 1.0, -1.0)


def _sign_grid(n: int, K: int) -> np.ndarray:
    s = np.ones((1,) * n)
    for j in range(n):
        ax = _alternating_sign(K).reshape((1,) * j + (2 * K + 1,) + (1,) * (n - j - 1))
        s = s * ax
    return s


def analyze_array(values: np.ndarray, n: int, box: TruncationBox) -> np.ndarray:
    """Fourier coefficients of a grid array, for k in the box; fiber axes pass through."""
    N = values.shape[0]
    K = box.K
    if N < 2 * K + 1:
        raise ConfigurationError(f"grid N={N} cannot represent the band K={K} (need N >= 2K+1)")
    spec = np.fft.fftn(values, axes=tuple(range(n))) / N**n
    idx = np.arange(-K, K + 1) % N
    for j in range(n):
        spec = np.take(spec, idx, axis=j)
    sign = _sign_grid(n, K)
    return sign.reshape(sign.shape + (1,) * (values.ndim - n)) * spec


def synthesize_array(coeffs: np.ndarray, n: int, box: TruncationBox, N: int) -> np.ndarray:
    """Evaluate sum_k e^(i k . x) c(k) on the N^n grid; fiber axes pass through."""
    K = box.K
    if N < 2 * K + 1:
        raise ConfigurationError(f"grid N={N} cannot represent the band K={K} (need N >= 2K+1)")
    fiber = coeffs.shape[n:]
    sign = _sign_grid(n, K)
    sign = sign.reshape(sign.shape + (1,) * len(fiber))
    full = np.zeros((N,) * n + fiber, dtype=complex)
    idx = np.arange(-K, K + 1) % N
    full[np.ix_(*([idx] * n))] = sign * coeffs
    return np.fft.ifftn(full, axes=tuple(range(n))) * N**n


def analyze(u: GridFunction, box: TruncationBox) -> SpectralFunction:
    """Toroidal Fourier transform restricted to the box: u_hat(k) = N^-n sum_x e^(-ik.x) u(x)."""
    if box.n != u.n:
        raise DimensionMismatchError(f"box dimension {box.n} vs grid dimension {u.n}")
    return SpectralFunction(u.n, box, analyze_array(u.values, u.n, box))


def synthesize(v: SpectralFunction, N: int) -> GridFunction:
    """Inverse transform u(x) = sum_k e^(ik.x) v(k) sampled on the N^n grid."""
    return GridFunction(v.n, synthesize_array(v.coefficients, v.n, v.box, N))


def mode_powers(box: TruncationBox, alpha) -> np.ndarray:
    """The monomial k^alpha on the box, shaped like a coefficient array (no fiber)."""
    alpha = as_multiindex(alpha, box.n)
    k = np.arange(-box.K, box.K + 1, dtype=float)
    out = np.ones((1,) * box.n)
    for j, aj in enumerate(alpha):
        ax = (k**aj).reshape((1,) * j + (box.side,) + (1,) * (box.n - j - 1))
        out = out * ax
    return out


def derivative(u: GridFunction, alpha) -> GridFunction:
    """Spectral derivative D^alpha u, where D = -i d/dx, so modes pick up k^alpha."""
    box = TruncationBox(max_band(u.N), u.n)
    spec = analyze(u, box)
    mult = mode_powers(box, alpha).reshape(
        (box.side,) * u.n + (1,) * len(u.fiber_shape)
    )
    return synthesize(SpectralFunction(u.n, box, mult * spec.coefficients), u.N)


def partial_derivative(u: GridFunction, alpha) -> GridFunction:
    """Classical derivative d^alpha u = i^|alpha| D^alpha u."""
    a = as_multiindex(alpha, u.n)
    out = derivative(u, a)
    out.values = out.values * (1j) ** int(sum(a))
    return out


def quantize_apply(symbol, u):
    """Apply the Fourier multiplier of a symbol: coefficients become a(k) u_hat(k).

    Accepts a GridFunction (returns a GridFunction on the same grid, using the
    full representable band) or a SpectralFunction (returns a SpectralFunction
    on the same box).  Exact on the represented band.
    """
    if isinstance(u, SpectralFunction):
        if symbol.n != u.n or symbol.d != u.d:
            raise DimensionMismatchError(
                f"symbol (n={symbol.n}, d={symbol.d}) vs function (n={u.n}, d={u.d})"
            )
        table = symbol.tabulate(u.box)
        coeffs = np.einsum("...ij,...j->...i", table, u.coefficients)
        return SpectralFunction(u.n, u.box, coeffs)
    if isinstance(u, GridFunction):
        if symbol.n != u.n or symbol.d != u.d:
            raise DimensionMismatchError(
                f"symbol (n={symbol.n}, d={symbol.d}) vs function (n={u.n}, d={u.d})"
            )
        box = TruncationBox(max_band(u.N), u.n)
        return synthesize(quantize_apply(symbol, analyze(u, box)), u.N)
    raise DimensionMismatchError(f"cannot quantize onto {type(u).__name__}")
