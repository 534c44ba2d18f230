"""
Functions on the unit circle: Fourier representation, grids, norms, and the
elementary analytic constructors (outer functions, fractional powers of
outer functions, finite Blaschke products).

A matrix function is stored as a :class:`TrigSymbol`, i.e. a dense table of
matrix Fourier coefficients on a contiguous frequency window
``kmin .. kmax``.  Non-polynomial functions (outer factors, Blaschke products,
inverses) are represented by a truncated expansion computed on a grid.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

LOGGER = logging.getLogger(__name__)

COEFF_TOL = 1e-10
MODULUS_TOL = 1e-8
FLOOR_EPS = 1e-10


class AliasingError(ValueError):
    """The grid is too coarse for the frequency content of a symbol."""


class OuterDomainError(ValueError):
    """A modulus cannot be the boundary modulus of an outer function."""


# ---------------------------------------------------------------------------
# exponents and grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentTriple:
    """The exponents used throughout: ``p`` (approximation norm), ``q`` with
    ``1/p + 1/q = 1/2`` (Hankel domain) and the Hoelder conjugate ``p'``.

    ``q`` is ``math.inf`` when ``p == 2``.
    """

    p: float

    def __post_init__(self):
        if not (2.0 <= self.p < math.inf):
            raise ValueError(f"exponent p must lie in [2, inf), got {self.p}")

    @property
    def q(self) -> float:
        if self.p == 2.0:
            return math.inf
        return 2.0 * self.p / (self.p - 2.0)

    @property
    def p_prime(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def q_finite(self) -> float:
        if math.isinf(self.q):
            raise ValueError("q is infinite for p = 2; this operation needs p > 2")
        return self.q


@dataclass(frozen=True)
class CircleGrid:
    """Equispaced nodes ``exp(2 pi i j / N)`` with weights ``1/N``."""

    N: int

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError(f"grid size must be a power of two >= 2, got {self.N}")

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(self.N) / self.N)

    @property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.N) / self.N

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.N, 1.0 / self.N)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Mean over the nodes along axis 0 (normalized arc measure)."""
        return np.mean(values, axis=0)

    @classmethod
    def at_least(cls, n: int) -> "CircleGrid":
        return cls(max(2, 1 << max(1, int(math.ceil(math.log2(max(n, 2)))))))


# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TrigSymbol:
    """Matrix trigonometric polynomial ``sum_k C_k z^k``, ``kmin <= k <= kmax``.

    ``coeffs`` has shape ``(K, rows, cols)`` and row ``i`` holds the coefficient
    of frequency ``kmin + i``.  ``truncation`` records the sup-norm residual of
    the expansion for symbols that were truncated from grid data.
    """

    coeffs: np.ndarray
    kmin: int = 0
    truncation: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[:, None, None]
        if c.ndim != 3 or c.shape[0] == 0:
            raise ValueError(f"coefficient table must have shape (K, m, n), got {c.shape}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "kmin", int(self.kmin))

    # -- constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "TrigSymbol":
        return cls(np.zeros((1, rows, cols)), 0)

    @classmethod
    def constant(cls, value) -> "TrigSymbol":
        a = np.atleast_2d(np.asarray(value, dtype=complex))
        return cls(a[None], 0)

    @classmethod
    def monomial(cls, k: int, value=1.0) -> "TrigSymbol":
        """``value * z^k``; ``value`` may be a scalar or a matrix."""
        a = np.atleast_2d(np.asarray(value, dtype=complex))
        return cls(a[None], k)

    @classmethod
    def from_dict(cls, table: dict[int, object]) -> "TrigSymbol":
        """Build from ``{frequency: scalar-or-matrix}``."""
        if not table:
            raise ValueError("empty coefficient table")
        ks = sorted(table)
        first = np.atleast_2d(np.asarray(table[ks[0]], dtype=complex))
        c = np.zeros((ks[-1] - ks[0] + 1,) + first.shape, dtype=complex)
        for k in ks:
            c[k - ks[0]] = np.atleast_2d(np.asarray(table[k], dtype=complex))
        return cls(c, ks[0])

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence["TrigSymbol"]]) -> "TrigSymbol":
        """Assemble a matrix symbol from a nested list of scalar symbols."""
        rows, cols = len(entries), len(entries[0])
        lo = min(e.kmin for row in entries for e in row)
        hi = max(e.kmax for row in entries for e in row)
        c = np.zeros((hi - lo + 1, rows, cols), dtype=complex)
        for i, row in enumerate(entries):
            for j, e in enumerate(row):
                if e.shape != (1, 1):
                    raise ValueError("from_entries expects scalar symbols")
                c[e.kmin - lo:e.kmax - lo + 1, i, j] = e.coeffs[:, 0, 0]
        return cls(c, lo, truncation=max(e.truncation for row in entries for e in row))

    @classmethod
    def from_samples(cls, samples: np.ndarray, kmin: int, kmax: int,
                     truncation: float | None = None) -> "TrigSymbol":
        """Fourier-analyze grid samples (shape ``(N,)``, ``(N, m)`` or ``(N, m, n)``)
        and keep frequencies ``kmin .. kmax``.

        When ``truncation`` is None the sup-norm residual of the kept expansion
        on the sampling grid is recorded.
        """
        s = np.asarray(samples, dtype=complex)
        if s.ndim == 1:
            s = s[:, None, None]
        elif s.ndim == 2:
            s = s[:, :, None]
        N = s.shape[0]
        if kmax - kmin + 1 > N:
            raise AliasingError(f"window {kmin}..{kmax} does not fit a grid of {N} nodes")
        full = np.fft.fft(s, axis=0) / N
        idx = np.arange(kmin, kmax + 1) % N
        sym = cls(full[idx], kmin, 0.0)
        if truncation is None:
            truncation = float(np.max(np.abs(sym.samples(N) - s))) if N else 0.0
        object.__setattr__(sym, "truncation", float(truncation))
        return sym

    # -- basic properties ---------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[1], self.coeffs.shape[2]

    @property
    def rows(self) -> int:
        return self.coeffs.shape[1]

    @property
    def cols(self) -> int:
        return self.coeffs.shape[2]

    @property
    def kmax(self) -> int:
        return self.kmin + self.coeffs.shape[0] - 1

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(self.kmin, self.kmax + 1)

    @property
    def degree(self) -> int:
        """Largest |frequency| carried by the table."""
        return max(abs(self.kmin), abs(self.kmax))

    def coeff(self, k: int) -> np.ndarray:
        if self.kmin <= k <= self.kmax:
            return np.array(self.coeffs[k - self.kmin])
        return np.zeros(self.shape, dtype=complex)

    def window(self, kmin: int, kmax: int) -> "TrigSymbol":
        """Coefficients restricted (or zero-padded) to ``kmin .. kmax``."""
        if kmax < kmin:
            return TrigSymbol(np.zeros((1,) + self.shape), 0)
        c = np.zeros((kmax - kmin + 1,) + self.shape, dtype=complex)
        lo, hi = max(kmin, self.kmin), min(kmax, self.kmax)
        if lo <= hi:
            c[lo - kmin:hi - kmin + 1] = self.coeffs[lo - self.kmin:hi - self.kmin + 1]
        return TrigSymbol(c, kmin, self.truncation)

    def trim(self, tol: float = 0.0) -> "TrigSymbol":
        """Drop leading/trailing frequencies whose coefficients are <= tol."""
        mags = np.max(np.abs(self.coeffs), axis=(1, 2))
        keep = np.nonzero(mags > tol)[0]
        if keep.size == 0:
            return TrigSymbol(np.zeros((1,) + self.shape), 0)
        return TrigSymbol(self.coeffs[keep[0]:keep[-1] + 1], self.kmin + keep[0], self.truncation)

    def effective_band(self, tol: float = COEFF_TOL) -> tuple[int, int]:
        t = self.trim(tol)
        return t.kmin, t.kmax

    # -- predicates ---------------------------------------------------------
    def is_analytic(self, tol: float = COEFF_TOL) -> bool:
        if self.kmin >= 0:
            return True
        neg = self.coeffs[: min(-self.kmin, self.coeffs.shape[0])]
        return bool(np.max(np.abs(neg)) <= tol)

    def is_analytic_vanishing_at_zero(self, tol: float = COEFF_TOL) -> bool:
        return self.is_analytic(tol) and bool(np.max(np.abs(self.coeff(0))) <= tol)

    def is_zero(self, tol: float = COEFF_TOL) -> bool:
        return bool(np.max(np.abs(self.coeffs)) <= tol)

    # -- evaluation ---------------------------------------------------------
    def min_grid(self) -> CircleGrid:
        """Smallest admissible grid, N >= 2 * degree + 2."""
        return CircleGrid.at_least(2 * self.degree + 2)

    def samples(self, N: int | CircleGrid) -> np.ndarray:
        """Values at the N-th roots of unity, shape ``(N, rows, cols)``."""
        if isinstance(N, CircleGrid):
            N = N.N
        if self.coeffs.shape[0] > N:
            raise AliasingError(
                f"{self.coeffs.shape[0]} frequencies ({self.kmin}..{self.kmax}) alias on a grid of {N} nodes")
        key = ("samples", N)
        if key not in self._cache:
            buf = np.zeros((N,) + self.shape, dtype=complex)
            np.add.at(buf, self.freqs % N, self.coeffs)
            vals = np.fft.ifft(buf, axis=0) * N
            vals.setflags(write=False)
            self._cache[key] = vals
        return self._cache[key]

    def __call__(self, z) -> np.ndarray:
        """Evaluate at arbitrary points z (scalar or array); returns ``(..., m, n)``."""
        z = np.asarray(z, dtype=complex)
        powers = z[..., None] ** self.freqs
        return np.einsum("...k,kij->...ij", powers, self.coeffs)

    # -- algebra ------------------------------------------------------------
    def _binary(self, other: "TrigSymbol", sign: float) -> "TrigSymbol":
        other = as_symbol(other, self.shape)
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        lo, hi = min(self.kmin, other.kmin), max(self.kmax, other.kmax)
        a, b = self.window(lo, hi), other.window(lo, hi)
        return TrigSymbol(a.coeffs + sign * b.coeffs, lo, self.truncation + other.truncation)

    def __add__(self, other):
        return self._binary(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __rsub__(self, other):
        return as_symbol(other, self.shape)._binary(self, -1.0)

    def __neg__(self):
        return TrigSymbol(-self.coeffs, self.kmin, self.truncation)

    def __mul__(self, c):
        if isinstance(c, TrigSymbol):
            if c.shape == (1, 1) or self.shape == (1, 1):
                return scalar_times(c, self) if c.shape == (1, 1) else scalar_times(self, c)
            raise TypeError("use @ for matrix products of symbols")
        return TrigSymbol(self.coeffs * complex(c), self.kmin, self.truncation * abs(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / complex(c))

    def __matmul__(self, other: "TrigSymbol") -> "TrigSymbol":
        """Exact product of trigonometric polynomials (matrix convolution)."""
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        K = self.coeffs.shape[0] + other.coeffs.shape[0] - 1
        N = 1 << int(math.ceil(math.log2(max(K, 2))))
        fa = np.fft.fft(self.coeffs, n=N, axis=0)
        fb = np.fft.fft(other.coeffs, n=N, axis=0)
        prod = np.fft.ifft(np.einsum("kij,kjl->kil", fa, fb), axis=0)[:K]
        trunc = self.truncation * _sup_bound(other) + other.truncation * _sup_bound(self)
        return TrigSymbol(prod, self.kmin + other.kmin, trunc)

    def shift(self, s: int) -> "TrigSymbol":
        """Multiply by z^s."""
        return TrigSymbol(self.coeffs, self.kmin + s, self.truncation)

    @property
    def T(self) -> "TrigSymbol":
        return TrigSymbol(np.transpose(self.coeffs, (0, 2, 1)), self.kmin, self.truncation)

    @property
    def H(self) -> "TrigSymbol":
        """Pointwise adjoint on the circle: coefficient k of Phi* is (C_{-k})^*."""
        c = np.conj(np.transpose(self.coeffs, (0, 2, 1)))[::-1]
        return TrigSymbol(c, -self.kmax, self.truncation)

    def conj(self) -> "TrigSymbol":
        """Pointwise complex conjugate of the values on the circle."""
        return TrigSymbol(np.conj(self.coeffs)[::-1], -self.kmax, self.truncation)

    def block(self, rows: slice | int, cols: slice | int) -> "TrigSymbol":
        r = rows if isinstance(rows, slice) else slice(rows, rows + 1)
        c = cols if isinstance(cols, slice) else slice(cols, cols + 1)
        return TrigSymbol(self.coeffs[:, r, c], self.kmin, self.truncation)

    def entry(self, i: int, j: int) -> "TrigSymbol":
        return self.block(i, j)

    # -- interchange --------------------------------------------------------
    def to_json_dict(self, tol: float = 0.0) -> dict:
        entries = []
        for i in range(self.rows):
            row = []
            for j in range(self.cols):
                cs = [[int(k), float(v.real), float(v.imag)]
                      for k, v in zip(self.freqs, self.coeffs[:, i, j]) if abs(v) > tol]
                row.append({"coeffs": cs})
            entries.append(row)
        return {"rows": self.rows, "cols": self.cols, "entries": entries}

    @classmethod
    def from_json_dict(cls, data: dict) -> "TrigSymbol":
        return symbol_from_json(data)

    def __repr__(self) -> str:
        return f"TrigSymbol({self.rows}x{self.cols}, freqs {self.kmin}..{self.kmax})"


class SymbolSchemaError(ValueError):
    """Malformed symbol JSON; ``path`` names the offending location."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


def symbol_from_json(data: dict, path: str = "$") -> TrigSymbol:
    if not isinstance(data, dict):
        raise SymbolSchemaError(path, "expected an object")
    for key in ("rows", "cols", "entries"):
        if key not in data:
            raise SymbolSchemaError(f"{path}.{key}", "missing")
    m, n = data["rows"], data["cols"]
    if not (isinstance(m, int) and isinstance(n, int) and m > 0 and n > 0):
        raise SymbolSchemaError(f"{path}.rows", "rows/cols must be positive integers")
    ent = data["entries"]
    if not isinstance(ent, list) or len(ent) != m:
        raise SymbolSchemaError(f"{path}.entries", f"expected {m} rows")
    table: dict[tuple[int, int, int], complex] = {}
    for i, row in enumerate(ent):
        if not isinstance(row, list) or len(row) != n:
            raise SymbolSchemaError(f"{path}.entries[{i}]", f"expected {n} entries")
        for j, cell in enumerate(row):
            cpath = f"{path}.entries[{i}][{j}]"
            if not isinstance(cell, dict) or not isinstance(cell.get("coeffs"), list):
                raise SymbolSchemaError(cpath, "expected {\"coeffs\": [[k, re, im], ...]}")
            for t, trip in enumerate(cell["coeffs"]):
                tpath = f"{cpath}.coeffs[{t}]"
                if not (isinstance(trip, list) and len(trip) == 3):
                    raise SymbolSchemaError(tpath, "expected [k, re, im]")
                k, re, im = trip
                if isinstance(k, bool) or not isinstance(k, int):
                    raise SymbolSchemaError(tpath, "frequency must be an integer")
                if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in (re, im)):
                    raise SymbolSchemaError(tpath, "re/im must be numbers")
                table[(k, i, j)] = table.get((k, i, j), 0) + complex(re, im)
    if not table:
        return TrigSymbol.zeros(m, n)
    ks = [k for k, _, _ in table]
    lo, hi = min(ks), max(ks)
    c = np.zeros((hi - lo + 1, m, n), dtype=complex)
    for (k, i, j), v in table.items():
        c[k - lo, i, j] = v
    return TrigSymbol(c, lo)


def load_symbol(path: str) -> TrigSymbol:
    with open(path) as fh:
        return symbol_from_json(json.load(fh))


def dump_symbol(sym: TrigSymbol, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(sym.to_json_dict(), fh, indent=1)


def as_symbol(x, shape: tuple[int, int] | None = None) -> TrigSymbol:
    if isinstance(x, TrigSymbol):
        return x
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0 and shape is not None:
        a = a * np.eye(*shape) if shape[0] == shape[1] and shape != (1, 1) else np.full(shape, a)
    return TrigSymbol.constant(a)


def scalar_times(s: TrigSymbol, M: TrigSymbol) -> TrigSymbol:
    """Product of a scalar symbol with a matrix symbol."""
    eye = s.coeffs[:, 0, 0]
    K = eye.shape[0] + M.coeffs.shape[0] - 1
    N = 1 << int(math.ceil(math.log2(max(K, 2))))
    prod = np.fft.ifft(np.fft.fft(eye, n=N)[:, None, None] * np.fft.fft(M.coeffs, n=N, axis=0), axis=0)[:K]
    return TrigSymbol(prod, s.kmin + M.kmin, s.truncation * _sup_bound(M) + M.truncation * _sup_bound(s))


def _sup_bound(s: TrigSymbol) -> float:
    return float(np.sum(np.linalg.norm(s.coeffs, ord=2, axis=(1, 2))))


def z(power: int = 1) -> TrigSymbol:
    """The coordinate function z^power (1x1)."""
    return TrigSymbol.monomial(power)


def poly(coeffs: Iterable[complex], kmin: int = 0) -> TrigSymbol:
    """Scalar symbol sum_i coeffs[i] z^(kmin + i)."""
    return TrigSymbol(np.asarray(list(coeffs), dtype=complex), kmin)


def diag(*entries) -> TrigSymbol:
    """Diagonal matrix symbol from scalar symbols or numbers."""
    syms = [as_symbol(e) for e in entries]
    zero = TrigSymbol.zeros(1, 1)
    return TrigSymbol.from_entries([[syms[i] if i == j else zero for j in range(len(syms))]
                                    for i in range(len(syms))])


def block_diag(a: TrigSymbol, b: TrigSymbol) -> TrigSymbol:
    lo, hi = min(a.kmin, b.kmin), max(a.kmax, b.kmax)
    aw, bw = a.window(lo, hi), b.window(lo, hi)
    c = np.zeros((hi - lo + 1, a.rows + b.rows, a.cols + b.cols), dtype=complex)
    c[:, :a.rows, :a.cols] = aw.coeffs
    c[:, a.rows:, a.cols:] = bw.coeffs
    return TrigSymbol(c, lo, a.truncation + b.truncation)


def pointwise(samples_fn, *syms: TrigSymbol, N: int, kmin: int, kmax: int) -> TrigSymbol:
    """Apply a pointwise map to grid samples of ``syms`` and re-expand."""
    vals = samples_fn(*(s.samples(N) for s in syms))
    return TrigSymbol.from_samples(vals, kmin, kmax)


# ---------------------------------------------------------------------------
# transforms and projections
# ---------------------------------------------------------------------------

def synthesize(sym: TrigSymbol, grid: CircleGrid) -> np.ndarray:
    """Grid samples of ``sym``; raises :class:`AliasingError` when
    ``grid.N < 2*degree + 2``."""
    if grid.N < 2 * sym.degree + 2:
        raise AliasingError(f"grid of {grid.N} nodes is too small for degree {sym.degree} "
                            f"(need N >= {2 * sym.degree + 2})")
    return sym.samples(grid.N)


def analyze(samples: np.ndarray, degree: int) -> TrigSymbol:
    """Coefficients ``-degree .. degree`` of grid samples."""
    return TrigSymbol.from_samples(samples, -degree, degree)


def riesz_project(sym: TrigSymbol, part: str = "minus") -> TrigSymbol:
    """Frequency split: ``plus`` keeps ``k >= 0``; ``minus`` (and
    ``minus-strict``) keeps ``k <= -1``."""
    if part == "plus":
        return sym.window(0, max(0, sym.kmax))
    if part in ("minus", "minus-strict"):
        return sym.window(min(-1, sym.kmin), -1)
    raise ValueError(f"unknown projection part {part!r}")


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormSpec:
    """Pointwise matrix norm ``operator`` or ``schatten`` with index r, and the
    outer Lebesgue exponent s."""

    pointwise: str = "operator"
    r: float = 2.0
    s: float = 2.0

    def __post_init__(self):
        if self.pointwise not in ("operator", "schatten"):
            raise ValueError(f"unknown pointwise norm {self.pointwise!r}")
        if self.pointwise == "schatten" and self.r < 1:
            raise ValueError("Schatten index must be >= 1")
        if self.s < 1:
            raise ValueError("outer exponent must be >= 1")


def _complement(u: np.ndarray) -> np.ndarray:
    return np.stack([-np.conj(u[:, 1]), np.conj(u[:, 0])], axis=1)


def _svd_2x2(M: np.ndarray):
    # closed form through the eigenpairs of M* M; much faster than a batched LAPACK call
    a = np.sum(np.abs(M[:, :, 0]) ** 2, axis=1)
    c = np.sum(np.abs(M[:, :, 1]) ** 2, axis=1)
    b = np.sum(np.conj(M[:, :, 0]) * M[:, :, 1], axis=1)
    half = 0.5 * (a - c)
    lam1 = 0.5 * (a + c) + np.sqrt(half ** 2 + np.abs(b) ** 2)
    det = np.abs(M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0])
    s1 = np.sqrt(lam1)
    s2 = np.where(s1 > 0, det / np.where(s1 > 0, s1, 1.0), 0.0)
    # eigenvector of lam1: (b, lam1 - a), or a coordinate axis when b vanishes
    v = np.stack([b, lam1 - a], axis=1)
    alt = np.where((a >= c)[:, None], np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])).astype(complex)
    nv = np.linalg.norm(v, axis=1)
    small = nv <= 1e-14 * np.maximum(lam1, 1e-300)
    v = np.where(small[:, None], alt, v / np.where(small, 1.0, nv)[:, None])
    v2 = _complement(v)
    u1 = np.einsum("nij,nj->ni", M, v)
    u1 = np.where((s1 > 0)[:, None], u1 / np.where(s1 > 0, s1, 1.0)[:, None], np.array([[1.0, 0.0]]))
    u2 = np.einsum("nij,nj->ni", M, v2)
    ok = s2 > 1e-13 * np.maximum(s1, 1e-300)
    u2 = np.where(ok[:, None], u2 / np.where(ok, s2, 1.0)[:, None], _complement(u1))
    U = np.stack([u1, u2], axis=2)
    Vh = np.conj(np.stack([v, v2], axis=1))
    return U, np.stack([s1, s2], axis=1), Vh


def svd_batch(vals: np.ndarray):
    """Pointwise SVD ``U, s, Vh`` of samples ``(N, m, n)`` (reduced form)."""
    vals = np.asarray(vals, dtype=complex)
    N, m, n = vals.shape
    if m == 1 or n == 1:
        x = vals.reshape(N, m * n)
        s = np.linalg.norm(x, axis=1)
        safe = np.where(s > 0, s, 1.0)
        unit = np.zeros_like(x)
        unit[:, 0] = 1.0
        d = np.where((s > 0)[:, None], x / safe[:, None], unit)
        if m == 1:
            return np.ones((N, 1, 1), dtype=complex), s[:, None], d.reshape(N, 1, n)
        return d.reshape(N, m, 1), s[:, None], np.ones((N, 1, 1), dtype=complex)
    if m == 2 and n == 2:
        return _svd_2x2(vals)
    return np.linalg.svd(vals, full_matrices=False)


def singular_values(vals: np.ndarray) -> np.ndarray:
    """Pointwise singular values for samples of shape ``(N, m, n)``."""
    vals = np.asarray(vals)
    if vals.ndim == 3 and (min(vals.shape[1:]) == 1 or vals.shape[1:] == (2, 2)):
        return svd_batch(vals)[1]
    return np.linalg.svd(vals, compute_uv=False)


def pointwise_norm(vals: np.ndarray, pointwise: str = "operator", r: float = 2.0) -> np.ndarray:
    s = singular_values(vals)
    if pointwise == "operator":
        return s[..., 0] if s.shape[-1] else np.zeros(vals.shape[0])
    if math.isinf(r):
        return s[..., 0]
    return np.sum(s ** r, axis=-1) ** (1.0 / r)


def lp_mean(rho: np.ndarray, s: float) -> float:
    """(mean rho^s)^(1/s) for grid samples rho >= 0; sup for s = inf."""
    if math.isinf(s):
        return float(np.max(rho))
    top = float(np.max(rho))
    if top == 0.0:
        return 0.0
    return top * float(np.mean((rho / top) ** s)) ** (1.0 / s)


def lebesgue_norm(sym: TrigSymbol | np.ndarray, norms: NormSpec | None = None,
                  grid: CircleGrid | None = None, s: float | None = None) -> float:
    """``(int ||Phi(zeta)||^s dm)^(1/s)`` by grid quadrature.

    ``sym`` may also be an array of grid samples ``(N, m, n)``.
    """
    norms = norms or NormSpec()
    s = norms.s if s is None else s
    if isinstance(sym, TrigSymbol):
        grid = grid or sym.min_grid()
        vals = synthesize(sym, grid)
    else:
        vals = np.asarray(sym)
        if vals.ndim == 1:
            vals = vals[:, None, None]
    return lp_mean(pointwise_norm(vals, norms.pointwise, norms.r), s)


def lp_norm(sym, p: float, grid: CircleGrid | None = None, pointwise: str = "operator",
            r: float = 2.0) -> float:
    return lebesgue_norm(sym, NormSpec(pointwise, r, 1.0), grid, s=p)


# ---------------------------------------------------------------------------
# outer functions, fractional powers, Blaschke products
# ---------------------------------------------------------------------------

def _analytic_log(logmod: np.ndarray) -> np.ndarray:
    """Grid samples of the analytic function with real part ``logmod`` and
    real mean (Herglotz / log-FFT construction)."""
    N = logmod.shape[0]
    u = np.fft.fft(logmod) / N
    c = np.zeros(N, dtype=complex)
    c[0] = u[0].real
    c[1:N // 2] = 2 * u[1:N // 2]
    c[N // 2] = u[N // 2]  # Nyquist term split evenly between +-N/2
    return np.fft.ifft(c) * N


def _floor(w: np.ndarray, eps: float) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise OuterDomainError("modulus must be strictly positive on the grid "
                               "(surrogate for log w in L^1)")
    small = w < eps
    if np.any(small):
        warnings.warn(f"modulus floored at {eps:g} on {int(np.sum(small))} nodes", RuntimeWarning)
        w = np.maximum(w, eps)
    return w


def outer_log_samples(w: np.ndarray, floor: float = FLOOR_EPS) -> np.ndarray:
    """Samples of ``log h`` for the outer h with ``|h| = w`` and ``h(0) > 0``."""
    return _analytic_log(np.log(_floor(w, floor)))


def outer_from_modulus(w: np.ndarray, degree: int | None = None,
                       floor: float = FLOOR_EPS) -> TrigSymbol:
    """Outer function h with ``|h| = w`` on the grid and ``h(0) > 0``.

    ``w`` holds positive samples on an N-point grid.  The expansion is
    truncated to frequencies ``0 .. degree`` (default ``N // 2``) and the
    truncation residual is kept on the result.
    """
    w = np.asarray(w, dtype=float).ravel()
    hs = np.exp(outer_log_samples(w, floor))
    degree = w.shape[0] // 2 if degree is None else degree
    return TrigSymbol.from_samples(hs, 0, degree)


def outer_log(h: TrigSymbol, N: int | None = None) -> np.ndarray:
    """Samples of a branch of ``log h`` for a scalar outer h.

    Raises when h vanishes on the grid or fails the Jensen equality
    ``log|h(0)| = mean log|h|`` (which detects zeros inside the disk).
    """
    if h.shape != (1, 1):
        raise ValueError("outer_log expects a scalar symbol")
    N = N or max(h.min_grid().N, 256)
    vals = h.samples(N)[:, 0, 0]
    mod = np.abs(vals)
    if np.min(mod) <= FLOOR_EPS * max(1.0, np.max(mod)):
        raise OuterDomainError("h vanishes on the grid; fractional powers need an outer function")
    L = _analytic_log(np.log(mod))
    h0 = h.coeff(0)[0, 0] if h.kmin <= 0 else 0.0
    jensen = abs(math.log(abs(h0)) - float(np.mean(np.log(mod)))) if abs(h0) > 0 else math.inf
    if jensen > 1e-6:
        raise OuterDomainError(f"h is not outer: Jensen defect {jensen:.3g} (zeros inside the disk)")
    phase = np.angle(h0)
    return L + 1j * phase


def outer_power(h: TrigSymbol, s: float, N: int | None = None, degree: int | None = None) -> TrigSymbol:
    """``h^s`` for a scalar outer h, on the branch with ``(h^s)(0) = h(0)^s``."""
    N = N or max(4 * h.min_grid().N, 256)
    L = outer_log(h, N)
    vals = np.exp(s * L)
    degree = N // 2 if degree is None else degree
    return TrigSymbol.from_samples(vals, 0, degree)


class BlaschkeError(ValueError):
    pass


def blaschke(zeros: Sequence[complex], degree: int | None = None, N: int | None = None) -> TrigSymbol:
    """Finite Blaschke product ``prod (z - a) / (1 - conj(a) z)``.

    Stored as a truncated Taylor expansion of the given degree (default
    ``4 * len(zeros) / (1 - max|a|)``, raised until the geometric tail is
    negligible); the sup residual on the sampling grid is kept in
    ``truncation``.
    """
    zs = [complex(a) for a in zeros]
    for a in zs:
        if abs(a) >= 1:
            raise BlaschkeError(f"Blaschke zero {a} is not inside the open unit disk")
    if not zs:
        return TrigSymbol.constant(1.0)
    rmax = max(abs(a) for a in zs)
    if degree is None:
        degree = int(math.ceil(4 * len(zs) / (1 - rmax)))
        if rmax > 0:
            degree = max(degree, int(math.ceil(math.log(1e-16) / math.log(rmax))) + len(zs))
    N = N or CircleGrid.at_least(4 * degree + 4).N
    zeta = CircleGrid(N).nodes
    vals = np.ones(N, dtype=complex)
    for a in zs:
        vals *= (zeta - a) / (1 - np.conj(a) * zeta)
    return TrigSymbol.from_samples(vals, 0, degree)
