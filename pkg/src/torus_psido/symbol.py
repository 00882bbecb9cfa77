"""Operator-valued symbols on the lattice and their empirical certification.

A symbol is a map k -> d x d complex matrix together with a declared order m
and difference-regularity rho.  The module estimates symbol-class seminorms
over truncation boxes, sweeps the closed right half-plane for parabolicity,
forms resolvent symbols and pointwise products, and extends symbols off the
lattice by a compactly supported interpolation profile.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatchError, DomainError, SingularResolventError, SymbolSpecError
from .lattice import (
    TruncationBox,
    as_point,
    bracket,
    aniso_magnitude,
    iter_multiindices,
)

MATRIX_NORMS = ("spectral", "max-row-sum", "max-col-sum")
_NORM_ORD = {"spectral": 2, "max-row-sum": np.inf, "max-col-sum": 1}

# LU inverses are declared singular past this 1-norm condition number
SINGULAR_COND = 1.0e13


def matrix_norms(arr: np.ndarray, kind: str = "spectral") -> np.ndarray:
    """Norms of a stack of matrices (..., d, d) under the selected operator norm."""
    if kind not in MATRIX_NORMS:
        raise DomainError(f"unknown matrix norm {kind!r}")
    return np.linalg.norm(arr, ord=_NORM_ORD[kind], axis=(-2, -1))


def invert_stack(arr: np.ndarray):
    """Invert a stack of matrices, returning (inverses, cond1).

    The 1-norm condition number is computed exactly (cheap at d <= 8); exactly
    singular matrices get a zero inverse placeholder flagged by cond = inf.
    """
    a = np.asarray(arr)
    norms = np.linalg.norm(a, ord=1, axis=(-2, -1))
    try:
        inv = np.linalg.inv(a)
        cond = norms * np.linalg.norm(inv, ord=1, axis=(-2, -1))
        return inv, np.where(np.isfinite(cond), cond, np.inf)
    except np.linalg.LinAlgError:
        pass
    flat = a.reshape((-1,) + a.shape[-2:])
    inv = np.empty_like(flat)
    cond = np.empty(flat.shape[0])
    for i, mat in enumerate(flat):
        try:
            mi = np.linalg.inv(mat)
            c = np.linalg.norm(mat, 1) * np.linalg.norm(mi, 1)
        except np.linalg.LinAlgError:
            mi = np.zeros_like(mat)
            c = np.inf
        inv[i] = mi
        cond[i] = c
    return inv.reshape(a.shape), cond.reshape(a.shape[:-2])


@dataclass(frozen=True)
class Symbol:
    """A lattice symbol k -> d x d complex matrix with declared order and regularity."""

    n: int
    d: int
    order: float
    regularity: int
    eval_fn: Callable = field(repr=False)
    matrix_norm: str = "spectral"
    name: str = ""

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise DomainError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        if self.regularity < 0:
            raise DomainError(f"regularity must be >= 0, got {self.regularity}")
        if self.matrix_norm not in MATRIX_NORMS:
            raise DomainError(f"unknown matrix norm {self.matrix_norm!r}")

    def __call__(self, k) -> np.ndarray:
        kk = as_point(k)
        if len(kk) != self.n:
            raise DimensionMismatchError(f"point {kk} for symbol dimension n={self.n}")
        val = np.asarray(self.eval_fn(kk), dtype=complex)
        if val.shape != (self.d, self.d):
            val = val.reshape(self.d, self.d)
        return val

    def mat_norm(self, a: np.ndarray) -> float:
        return float(matrix_norms(np.asarray(a, dtype=complex), self.matrix_norm))

    def tabulate(self, box: TruncationBox, pad_hi: int = 0) -> np.ndarray:
        """Values on [-K, K+pad_hi]^n, shaped (side+pad,)*n + (d, d).

        The pad extends the high side only, which is where forward-difference
        stencils reach.
        """
        if box.n != self.n:
            raise DimensionMismatchError(f"box n={box.n} vs symbol n={self.n}")
        side = box.side + pad_hi
        out = np.empty((side,) * self.n + (self.d, self.d), dtype=complex)
        rng = range(-box.K, box.K + pad_hi + 1)
        for idx in np.ndindex(*(side,) * self.n):
            k = tuple(rng[i] for i in idx)
            out[idx] = self.eval_fn(k)
        return out

    def with_order(self, order: float) -> "Symbol":
        return replace(self, order=order)


def identity_symbol(n: int, d: int, rho: Optional[int] = None, matrix_norm: str = "spectral") -> Symbol:
    eye = np.eye(d, dtype=complex)
    return Symbol(n, d, 0.0, rho if rho is not None else n + 1, lambda k: eye, matrix_norm, "identity")


def bracket_power_symbol(n: int, d: int, s: float, rho: Optional[int] = None,
                         order: Optional[float] = None, matrix_norm: str = "spectral") -> Symbol:
    eye = np.eye(d, dtype=complex)
    return Symbol(
        n, d, s if order is None else order, rho if rho is not None else n + 1,
        lambda k: bracket(k) ** s * eye, matrix_norm, f"bracket_power({s})",
    )


def laplacian_symbol(n: int, d: int, rho: Optional[int] = None, matrix_norm: str = "spectral") -> Symbol:
    eye = np.eye(d, dtype=complex)
    return Symbol(
        n, d, 2.0, rho if rho is not None else n + 1,
        lambda k: float(sum(c * c for c in k)) * eye, matrix_norm, "laplacian",
    )


def shifted_laplacian_symbol(n: int, d: int, rho: Optional[int] = None, matrix_norm: str = "spectral") -> Symbol:
    eye = np.eye(d, dtype=complex)
    return Symbol(
        n, d, 2.0, rho if rho is not None else n + 1,
        lambda k: (1.0 + sum(c * c for c in k)) * eye, matrix_norm, "shifted_laplacian",
    )


def nilpotent_shift(d: int) -> np.ndarray:
    """The d x d nilpotent shift N with ones on the superdiagonal."""
    return np.diag(np.ones(d - 1), 1).astype(complex) if d > 1 else np.zeros((1, 1), dtype=complex)


def jordan_symbol(n: int, d: int, s: float, rho: Optional[int] = None,
                  order: Optional[float] = None, matrix_norm: str = "spectral") -> Symbol:
    base = np.eye(d, dtype=complex) + nilpotent_shift(d)
    return Symbol(
        n, d, s if order is None else order, rho if rho is not None else n + 1,
        lambda k: bracket(k) ** s * base, matrix_norm, f"jordan({s})",
    )


def polynomial_symbol(n: int, d: int, terms: Sequence, s: float = 0.0,
                      rho: Optional[int] = None, order: Optional[float] = None,
                      matrix_norm: str = "spectral") -> Symbol:
    """a(k) = <k>^s sum_alpha M_alpha k^alpha for a finite list of (alpha, matrix) terms."""
    parsed = []
    for alpha, mat in terms:
        alpha = as_point(alpha)
        if len(alpha) != n or any(c < 0 for c in alpha):
            raise DomainError(f"bad polynomial exponent {alpha}")
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (d, d):
            raise DomainError(f"term matrix of shape {mat.shape}, expected {(d, d)}")
        parsed.append((alpha, mat))
    degree = max((sum(a) for a, _ in parsed), default=0)

    def ev(k):
        acc = np.zeros((d, d), dtype=complex)
        for alpha, mat in parsed:
            acc = acc + math.prod(c**e for c, e in zip(k, alpha)) * mat
        if s:
            acc = bracket(k) ** s * acc
        return acc

    return Symbol(
        n, d, (degree + s) if order is None else order,
        rho if rho is not None else n + 1, ev, matrix_norm, "polynomial",
    )


# ---------------------------------------------------------------------------
# specification documents


def _require(doc: dict, key: str, location: str):
    if key not in doc:
        raise SymbolSpecError(f"missing required field {key!r}", location)
    return doc[key]


def _parse_entry(x, location: str) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(c, (int, float)) for c in x):
        return complex(x[0], x[1])
    raise SymbolSpecError(f"matrix entry must be a number or [re, im], got {x!r}", location)


def _parse_matrix(rows, d: int, location: str) -> np.ndarray:
    if not isinstance(rows, (list, tuple)) or len(rows) != d:
        raise SymbolSpecError(f"expected {d} rows, got {rows!r}", location)
    out = np.zeros((d, d), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, (list, tuple)) or len(row) != d:
            raise SymbolSpecError(f"row must have {d} entries, got {row!r}", f"{location}[{i}]")
        for j, x in enumerate(row):
            out[i, j] = _parse_entry(x, f"{location}[{i}][{j}]")
    return out


def parse_symbol_spec(document, location: str = "symbol") -> Symbol:
    """Build a Symbol from a configuration document (dict or JSON text).

    Required fields: family, n, d.  Optional: m (defaults per family), rho
    (defaults to n+1), matrix_norm, and the family parameters s or terms.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SymbolSpecError(f"not valid JSON: {exc}", location) from exc
    if not isinstance(document, dict):
        raise SymbolSpecError(f"expected an object, got {type(document).__name__}", location)

    family = _require(document, "family", location)
    n = int(_require(document, "n", location))
    d = int(_require(document, "d", location))
    if n < 1:
        raise SymbolSpecError(f"n must be >= 1, got {n}", f"{location}.n")
    if d < 1:
        raise SymbolSpecError(f"d must be >= 1, got {d}", f"{location}.d")
    rho = document.get("rho")
    if rho is not None:
        rho = int(rho)
        if rho < 0:
            raise SymbolSpecError(f"rho must be >= 0, got {rho}", f"{location}.rho")
    matrix_norm = document.get("matrix_norm", "spectral")
    if matrix_norm not in MATRIX_NORMS:
        raise SymbolSpecError(
            f"matrix_norm must be one of {MATRIX_NORMS}, got {matrix_norm!r}",
            f"{location}.matrix_norm",
        )
    m = document.get("m")
    m = float(m) if m is not None else None

    if family == "identity":
        sym = identity_symbol(n, d, rho, matrix_norm)
        return sym.with_order(m) if m is not None else sym
    if family == "bracket_power":
        s = float(_require(document, "s", f"{location}.s"))
        return bracket_power_symbol(n, d, s, rho, m, matrix_norm)
    if family == "laplacian":
        sym = laplacian_symbol(n, d, rho, matrix_norm)
        return sym.with_order(m) if m is not None else sym
    if family == "shifted_laplacian":
        sym = shifted_laplacian_symbol(n, d, rho, matrix_norm)
        return sym.with_order(m) if m is not None else sym
    if family == "jordan":
        s = float(_require(document, "s", f"{location}.s"))
        return jordan_symbol(n, d, s, rho, m, matrix_norm)
    if family == "polynomial":
        raw = _require(document, "terms", f"{location}.terms")
        if not isinstance(raw, (list, tuple)):
            raise SymbolSpecError("terms must be a list", f"{location}.terms")
        terms = []
        for i, item in enumerate(raw):
            here = f"{location}.terms[{i}]"
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise SymbolSpecError("term must be [alpha, matrix]", here)
            alpha = item[0]
            if isinstance(alpha, (int, float)):
                alpha = [alpha]
            alpha = tuple(int(c) for c in alpha)
            if len(alpha) != n or any(c < 0 for c in alpha):
                raise SymbolSpecError(f"exponent {alpha} must be {n} non-negative ints", here)
            terms.append((alpha, _parse_matrix(item[1], d, f"{here}.matrix")))
        s = float(document.get("s", 0.0))
        return polynomial_symbol(n, d, terms, s, rho, m, matrix_norm)
    raise SymbolSpecError(f"unknown symbol family {family!r}", f"{location}.family")


# ---------------------------------------------------------------------------
# symbol-class seminorms


@dataclass(frozen=True)
class ClassNormEntry:
    alpha: tuple
    constant: float
    argmax: tuple
    tail_ratio: float


@dataclass(frozen=True)
class SymbolClassReport:
    """Estimated symbol-class constants C_alpha over a truncation box.

    constant(alpha) = max over the box of <k>^(|alpha| - m) |Delta^alpha a(k)|;
    norm is the max over all |alpha| <= rho.  tail_ratio compares the constant
    restricted to the outermost shell against the full constant; values near 1
    together with growth in K flag symbols whose declared order is too small.
    """

    order: float
    regularity: int
    K: int
    matrix_norm: str
    entries: tuple
    norm: float
    norm_alpha: tuple
    norm_argmax: tuple

    def entry(self, alpha) -> ClassNormEntry:
        alpha = tuple(alpha)
        for e in self.entries:
            if e.alpha == alpha:
                return e
        raise KeyError(alpha)

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "regularity": self.regularity,
            "K": self.K,
            "matrix_norm": self.matrix_norm,
            "norm": self.norm,
            "norm_alpha": list(self.norm_alpha),
            "norm_argmax": list(self.norm_argmax),
            "entries": [
                {
                    "alpha": list(e.alpha),
                    "constant": e.constant,
                    "argmax": list(e.argmax),
                    "tail_ratio": e.tail_ratio,
                }
                for e in self.entries
            ],
        }


def class_norm(a: Symbol, box: TruncationBox) -> SymbolClassReport:
    """Estimate the symbol-class norm of a over the box.

    The report always exists; non-membership shows up as constants that keep
    growing with K, not as an error.
    """
    if box.n != a.n:
        raise DimensionMismatchError(f"box n={box.n} vs symbol n={a.n}")
    rho = a.regularity
    table = a.tabulate(box, pad_hi=rho)
    pts = box.point_array()
    brackets = np.sqrt(1.0 + (pts.astype(float) ** 2).sum(axis=1)).reshape((box.side,) * box.n)
    shell = box.shell_mask().reshape((box.side,) * box.n)

    entries = []
    best = (-1.0, None, None)
    for alpha in iter_multiindices(box.n, rho):
        block = table
        for j, aj in enumerate(alpha):
            if aj:
                block = np.diff(block, n=aj, axis=j)
        sl = tuple(slice(0, box.side) for _ in range(box.n))
        block = block[sl]
        weights = brackets ** (sum(alpha) - a.order)
        quotient = weights * matrix_norms(block, a.matrix_norm)
        flat_arg = int(np.argmax(quotient))
        c_alpha = float(quotient.ravel()[flat_arg])
        argmax = tuple(int(c) for c in pts[flat_arg])
        on_shell = quotient[shell]
        tail = float(on_shell.max() / c_alpha) if c_alpha > 0 else 0.0
        entries.append(ClassNormEntry(alpha, c_alpha, argmax, tail))
        if c_alpha > best[0]:
            best = (c_alpha, alpha, argmax)

    return SymbolClassReport(
        order=a.order,
        regularity=rho,
        K=box.K,
        matrix_norm=a.matrix_norm,
        entries=tuple(entries),
        norm=best[0],
        norm_alpha=best[1],
        norm_argmax=best[2],
    )


# ---------------------------------------------------------------------------
# parabolicity


@dataclass(frozen=True)
class SamplingPlan:
    """Where the half-plane is probed: a lattice box crossed with lambda rays.

    Moduli are log-spaced as 10^(j / per_decade) between the two decade
    endpoints, so refining per_decade by an integer factor keeps the coarser
    samples and the kappa estimate monotone.  lambda = 0 is always included.
    """

    box: TruncationBox
    rays: tuple = (0.0, np.pi / 2, -np.pi / 2)
    decade_lo: int = 0
    decade_hi: int = 4
    per_decade: int = 16
    omega: float = 0.0

    def lambdas(self) -> np.ndarray:
        js = np.arange(self.decade_lo * self.per_decade, self.decade_hi * self.per_decade + 1)
        moduli = 10.0 ** (js / self.per_decade)
        vals = [0.0 + 0.0j]
        for theta in self.rays:
            vals.extend(moduli * np.exp(1j * theta))
        arr = np.array(vals, dtype=complex)
        # deterministic order, exact duplicates removed
        keys = sorted(range(len(arr)), key=lambda i: (abs(arr[i]), arr[i].real, arr[i].imag))
        out = []
        for i in keys:
            if not out or arr[i] != out[-1]:
                out.append(arr[i])
        return np.array(out)


@dataclass(frozen=True)
class ParabolicityReport:
    """Empirical half-plane resolvent estimates for one symbol.

    kappa_estimate is the largest sampled <k,lambda>^m |(a(k)+lambda)^-1| and
    only ever grows under sweep refinement; it is an estimate of the true
    constant, never a certificate.  A verdict of parabolic requires that no
    sampled point at magnitude >= omega_requested was singular.
    """

    order: float
    omega_requested: float
    omega_estimate: float
    kappa_estimate: float
    worst_pair: tuple
    failures: tuple
    samples: int
    parabolic: bool

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "omega_requested": self.omega_requested,
            "omega_estimate": self.omega_estimate,
            "kappa_estimate": self.kappa_estimate,
            "worst_pair": {
                "k": list(self.worst_pair[0]),
                "lambda": [self.worst_pair[1].real, self.worst_pair[1].imag],
            }
            if self.worst_pair is not None
            else None,
            "failures": [
                {"k": list(k), "lambda": [lam.real, lam.imag]} for (k, lam) in self.failures
            ],
            "samples": self.samples,
            "parabolic": self.parabolic,
        }


def parabolicity_estimate(a: Symbol, plan: SamplingPlan) -> ParabolicityReport:
    """Sweep the box and the lambda rays, accumulating the resolvent constant.

    Samples with |(k, lambda)| < plan.omega are excluded, matching the
    half-plane condition that only holds outside a ball.
    """
    if plan.box.n != a.n:
        raise DimensionMismatchError(f"plan box n={plan.box.n} vs symbol n={a.n}")
    m = a.order
    pts = plan.box.point_array()
    table = a.tabulate(plan.box).reshape((-1, a.d, a.d))
    eye = np.eye(a.d, dtype=complex)
    ksq = (pts.astype(float) ** 2).sum(axis=1)

    kappa = 0.0
    worst = None
    failures = []
    samples = 0
    for lam in plan.lambdas():
        lam_pow = abs(lam) ** (2.0 / m)
        magnitudes = np.sqrt(ksq + lam_pow)
        mask = magnitudes >= plan.omega
        if not mask.any():
            continue
        shifted = table[mask] + lam * eye
        inv, cond = invert_stack(shifted)
        anis = np.sqrt(1.0 + ksq[mask] + lam_pow)
        sel = np.flatnonzero(mask)
        bad = cond > SINGULAR_COND
        for i in np.flatnonzero(bad):
            failures.append((tuple(int(c) for c in pts[sel[i]]), complex(lam)))
        good = ~bad
        samples += int(mask.sum())
        if good.any():
            vals = anis[good] ** m * matrix_norms(inv[good], a.matrix_norm)
            j = int(np.argmax(vals))
            if vals[j] > kappa:
                kappa = float(vals[j])
                worst = (tuple(int(c) for c in pts[sel[np.flatnonzero(good)[j]]]), complex(lam))

    # smallest sampled magnitude strictly above every recorded failure
    if failures:
        fail_mag = max(aniso_magnitude(k, lam, m) for k, lam in failures)
        omega_est = float("inf")
        for lam in plan.lambdas():
            mags = np.sqrt(ksq + abs(lam) ** (2.0 / m))
            above = mags[mags > fail_mag]
            if above.size:
                omega_est = min(omega_est, float(above.min()))
    else:
        omega_est = 0.0

    return ParabolicityReport(
        order=m,
        omega_requested=plan.omega,
        omega_estimate=omega_est,
        kappa_estimate=kappa,
        worst_pair=worst,
        failures=tuple(failures),
        samples=samples,
        parabolic=not failures,
    )


# ---------------------------------------------------------------------------
# resolvents, products, extension


def resolvent_symbol(a: Symbol, lam: complex) -> Symbol:
    """The symbol k -> (a(k) + lambda)^-1, declared order -m, same regularity."""

    def ev(k):
        mat = np.asarray(a.eval_fn(k), dtype=complex).reshape(a.d, a.d) + lam * np.eye(a.d)
        try:
            inv = np.linalg.inv(mat)
            cond = np.linalg.norm(mat, 1) * np.linalg.norm(inv, 1)
        except np.linalg.LinAlgError:
            raise SingularResolventError(tuple(k), lam) from None
        if cond > SINGULAR_COND:
            raise SingularResolventError(tuple(k), lam, cond)
        return inv

    return Symbol(
        a.n, a.d, -a.order, a.regularity, ev, a.matrix_norm,
        f"resolvent({a.name or 'symbol'}, {lam})",
    )


def resolvent_condition(a: Symbol, lam: complex, k) -> float:
    """1-norm condition number of a(k) + lambda, inf if singular."""
    mat = a(k) + lam * np.eye(a.d)
    try:
        return float(np.linalg.norm(mat, 1) * np.linalg.norm(np.linalg.inv(mat), 1))
    except np.linalg.LinAlgError:
        return float("inf")


def symbol_product(a1: Symbol, a2: Symbol) -> Symbol:
    """Pointwise matrix product; orders add, regularity is the minimum."""
    if a1.n != a2.n or a1.d != a2.d:
        raise DimensionMismatchError(
            f"cannot multiply (n={a1.n}, d={a1.d}) with (n={a2.n}, d={a2.d})"
        )
    return Symbol(
        a1.n, a1.d, a1.order + a2.order, min(a1.regularity, a2.regularity),
        lambda k: np.asarray(a1.eval_fn(k), dtype=complex).reshape(a1.d, a1.d)
        @ np.asarray(a2.eval_fn(k), dtype=complex).reshape(a2.d, a2.d),
        a1.matrix_norm, f"({a1.name})*({a2.name})",
    )


def symbol_difference(a1: Symbol, a2: Symbol) -> Symbol:
    if a1.n != a2.n or a1.d != a2.d:
        raise DimensionMismatchError("difference of incompatible symbols")
    return Symbol(
        a1.n, a1.d, a1.order, min(a1.regularity, a2.regularity),
        lambda k: np.asarray(a1.eval_fn(k), dtype=complex).reshape(a1.d, a1.d)
        - np.asarray(a2.eval_fn(k), dtype=complex).reshape(a2.d, a2.d),
        a1.matrix_norm, f"({a1.name})-({a2.name})",
    )


def standard_bump(x: float) -> float:
    """The smooth even bump with value 1 at 0 and support (-1, 1)."""
    ax = abs(x)
    if ax >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - ax * ax))


@dataclass(frozen=True)
class ExtensionKernel:
    """Tensor-product interpolation profile for extending symbols off the lattice.

    The profile is even, equals 1 at 0, and vanishes outside (-1, 1), so the
    extension restricted to lattice points recovers the symbol bit for bit.
    """

    profile: Callable = standard_bump


def extend(a: Symbol, kern: ExtensionKernel, xi) -> np.ndarray:
    """Evaluate the interpolated extension at a real covariable xi.

    Only the lattice cell corners within the open unit support of the profile
    contribute; at exact lattice points the single unit weight reproduces a(k)
    without touching the matrix.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (a.n,):
        raise DimensionMismatchError(f"xi of shape {xi.shape}, expected ({a.n},)")
    cands = []
    for x in xi:
        f = math.floor(x)
        cands.append([j for j in (f, f + 1) if abs(x - j) < 1.0])
    total = None
    for corner in itertools.product(*cands):
        w = math.prod(kern.profile(x - j) for x, j in zip(xi, corner))
        if w == 0.0:
            continue
        val = a(tuple(int(j) for j in corner))
        term = val if w == 1.0 else w * val
        total = term if total is None else total + term
    if total is None:
        total = np.zeros((a.d, a.d), dtype=complex)
    return total
