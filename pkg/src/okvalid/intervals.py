"""Directed-rounding interval arithmetic for scalars, vectors, and dense matrices.

Endpoints are IEEE doubles.  Outward rounding is implemented by nextafter
adjustment of round-to-nearest results; an operation whose result is provably
exact (detected via error-free transforms or exact rational comparison) is not
widened, so integer-endpoint arithmetic stays sharp and zero stays zero.
The contract is containment: every arithmetic result encloses all pointwise
results of its operands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_INF = math.inf
# generous unit roundoff (2x the true 2^-53) used in aggregate error bounds
_EPS = 2.0 ** -52


class IntervalDomainError(ValueError):
    """Raised when no rigorous enclosure exists (e.g. division through zero)."""


# ---------------------------------------------------------------------------
# scalar rounding helpers
# ---------------------------------------------------------------------------

def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _sum_is_exact(a: float, b: float, s: float) -> bool:
    # Fast2Sum error recovery: both orderings agree iff fl(a+b) == a+b.
    return (s - a) == b and (s - b) == a


def _small_int(x: float) -> bool:
    # cheap filter before the exact rational tests; a miss only widens
    return -67108864.0 <= x <= 67108864.0 and x == int(x)


def _prod_is_exact(a: float, b: float, p: float) -> bool:
    if a == 0.0 or b == 0.0:
        return True
    if not (_small_int(a) and _small_int(b)):
        return False
    return math.isfinite(p) and Fraction(a) * Fraction(b) == Fraction(p)


def _quot_is_exact(a: float, b: float, q: float) -> bool:
    if b == 0.0:
        return False
    if a == 0.0:
        return True
    if not (_small_int(a) and _small_int(b)):
        return False
    return math.isfinite(q) and Fraction(a) / Fraction(b) == Fraction(q)


def _add_down(a: float, b: float) -> float:
    s = a + b
    return s if _sum_is_exact(a, b, s) else _down(s)


def _add_up(a: float, b: float) -> float:
    s = a + b
    return s if _sum_is_exact(a, b, s) else _up(s)


class Interval:
    """Closed interval [lo, hi] of reals with containment-preserving arithmetic."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float | None = None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise IntervalDomainError(f"invalid interval endpoints [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    # -- constructors ------------------------------------------------------

    @classmethod
    def point(cls, v: float) -> "Interval":
        return cls(v, v)

    @classmethod
    def hull(cls, *values: float) -> "Interval":
        return cls(min(values), max(values))

    # -- queries -----------------------------------------------------------

    @property
    def mid(self) -> float:
        m = 0.5 * (self.lo + self.hi)
        if not math.isfinite(m):
            m = 0.5 * self.lo + 0.5 * self.hi
        return m

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mag(self) -> float:
        """max |x| over the interval"""
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def strictly_positive(self) -> bool:
        return self.lo > 0.0

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __eq__(self, other) -> bool:
        if isinstance(other, Interval):
            return self.lo == other.lo and self.hi == other.hi
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    # -- arithmetic --------------------------------------------------------

    @staticmethod
    def _coerce(x) -> "Interval":
        if isinstance(x, Interval):
            return x
        return Interval(float(x), float(x))

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __abs__(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def __add__(self, other) -> "Interval":
        o = self._coerce(other)
        return Interval(_add_down(self.lo, o.lo), _add_up(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other) -> "Interval":
        o = self._coerce(other)
        return Interval(_add_down(self.lo, -o.hi), _add_up(self.hi, -o.lo))

    def __rsub__(self, other) -> "Interval":
        return self._coerce(other) - self

    @staticmethod
    def _extremum(cands, prods, pick_min: bool) -> float:
        m = min(prods) if pick_min else max(prods)
        exact = all(
            _prod_is_exact(x, y, p)
            for (x, y), p in zip(cands, prods)
            if p == m
        )
        if exact:
            return m
        return _down(m) if pick_min else _up(m)

    def __mul__(self, other) -> "Interval":
        o = self._coerce(other)
        cands = (
            (self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi),
        )
        prods = tuple(x * y for x, y in cands)
        return Interval(
            self._extremum(cands, prods, True),
            self._extremum(cands, prods, False),
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        o = self._coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise IntervalDomainError(f"division by interval containing zero: {o}")
        cands = (
            (self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi),
        )
        quots = tuple(x / y for x, y in cands)
        lo = min(quots)
        hi = max(quots)
        lo_exact = all(
            _quot_is_exact(x, y, q) for (x, y), q in zip(cands, quots) if q == lo
        )
        hi_exact = all(
            _quot_is_exact(x, y, q) for (x, y), q in zip(cands, quots) if q == hi
        )
        return Interval(lo if lo_exact else _down(lo), hi if hi_exact else _up(hi))

    def __rtruediv__(self, other) -> "Interval":
        return self._coerce(other) / self

    def square(self) -> "Interval":
        a, b = abs(self).lo, abs(self).hi
        plo = a * a
        phi = b * b
        lo = plo if _prod_is_exact(a, a, plo) else max(_down(plo), 0.0)
        hi = phi if _prod_is_exact(b, b, phi) else _up(phi)
        return Interval(lo, hi)

    def __pow__(self, n: int) -> "Interval":
        if not isinstance(n, int):
            raise TypeError("interval powers are integer only")
        if n < 0:
            return Interval(1.0) / self ** (-n)
        if n == 0:
            return Interval(1.0)
        if n == 1:
            return self
        half = self ** (n // 2)
        out = half.square()
        return out * self if n % 2 else out

    def sqrt(self) -> "Interval":
        if self.lo < 0.0:
            raise IntervalDomainError(f"sqrt of interval with negative part: {self}")
        slo = math.sqrt(self.lo)
        shi = math.sqrt(self.hi)
        lo = slo if _small_int(slo) and slo * slo == self.lo else max(_down(slo), 0.0)
        hi = shi if _small_int(shi) and shi * shi == self.hi else _up(shi)
        return Interval(lo, hi)


# enclosures of the constants every rigorous formula needs; the float seeds are
# correctly rounded, so one ulp on each side is enough
PI = Interval(_down(math.pi), _up(math.pi))
SQRT2 = Interval(_down(math.sqrt(2.0)), _up(math.sqrt(2.0)))
PI2 = PI.square()
PI4 = PI2.square()


# ---------------------------------------------------------------------------
# vectorized kernels on (lo, hi) ndarray pairs
# ---------------------------------------------------------------------------

def _ndown(x: np.ndarray) -> np.ndarray:
    return np.nextafter(x, -_INF)


def _nup(x: np.ndarray) -> np.ndarray:
    return np.nextafter(x, _INF)


def vadd(alo, ahi, blo, bhi):
    slo = alo + blo
    shi = ahi + bhi
    lo_exact = ((slo - alo) == blo) & ((slo - blo) == alo)
    hi_exact = ((shi - ahi) == bhi) & ((shi - bhi) == ahi)
    return np.where(lo_exact, slo, _ndown(slo)), np.where(hi_exact, shi, _nup(shi))


def vneg(lo, hi):
    return -hi, -lo


def vmul(alo, ahi, blo, bhi):
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    # a point-zero factor gives an exact zero product; everything else rounds out
    pzero = ((alo == 0.0) & (ahi == 0.0)) | ((blo == 0.0) & (bhi == 0.0))
    lo = np.where(pzero, 0.0, _ndown(lo))
    hi = np.where(pzero, 0.0, _nup(hi))
    return lo, hi


def vscale(lo, hi, c: Interval):
    """interval scalar times interval vector"""
    return vmul(lo, hi, np.float64(c.lo), np.float64(c.hi))


def vsquare(lo, hi):
    a = np.where(lo > 0.0, lo, np.where(hi < 0.0, -hi, 0.0))  # mignitude
    b = np.maximum(np.abs(lo), np.abs(hi))
    plo = a * a
    phi = b * b
    exact = (lo == hi) & ((lo == np.rint(lo)) & (np.abs(lo) < 2**26))
    out_lo = np.where(exact, plo, np.maximum(_ndown(plo), 0.0))
    out_hi = np.where(exact, phi, _nup(phi))
    return out_lo, out_hi


def _sum_slack(abssum: float, n: int) -> float:
    # valid for any summation order of n doubles under round-to-nearest
    return (n + 4) * _EPS * abssum


def vsum(lo, hi) -> Interval:
    """Rigorous enclosure of the sum of a vector of intervals."""
    lo = np.asarray(lo, dtype=np.float64).ravel()
    hi = np.asarray(hi, dtype=np.float64).ravel()
    n = lo.size
    if n == 0:
        return Interval(0.0)
    slo = float(np.sum(lo))
    shi = float(np.sum(hi))
    err_lo = _sum_slack(float(np.sum(np.abs(lo))), n)
    err_hi = _sum_slack(float(np.sum(np.abs(hi))), n)
    lower = slo if err_lo == 0.0 else _down(_down(slo) - err_lo)
    upper = shi if err_hi == 0.0 else _up(_up(shi) + err_hi)
    return Interval(lower, upper)


def vsum_upper_nonneg(x) -> float:
    """Upper bound for the sum of a nonnegative float vector."""
    x = np.asarray(x, dtype=np.float64).ravel()
    s = float(np.sum(x))
    slack = _sum_slack(s, x.size)
    return s if slack == 0.0 else _up(_up(s) + slack)


def vdot_upper_nonneg(x, y) -> float:
    """Upper bound for sum(x*y) with x, y nonnegative float vectors."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    s = float(np.dot(x, y))
    slack = _sum_slack(s, x.size + 1)
    return s if slack == 0.0 else _up(_up(s) + slack)


# ---------------------------------------------------------------------------
# dense interval matrices
# ---------------------------------------------------------------------------

@dataclass
class IntervalMatrix:
    """Dense matrix of intervals stored as a pair of float arrays."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.ascontiguousarray(self.lo, dtype=np.float64)
        self.hi = np.ascontiguousarray(self.hi, dtype=np.float64)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 2:
            raise ValueError("IntervalMatrix needs two 2-d arrays of equal shape")
        if np.any(self.lo > self.hi):
            raise IntervalDomainError("matrix with lo > hi entry")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_point(cls, a: np.ndarray) -> "IntervalMatrix":
        a = np.ascontiguousarray(a, dtype=np.float64)
        return cls(a, a.copy())

    @classmethod
    def identity(cls, n: int) -> "IntervalMatrix":
        return cls.from_point(np.eye(n))

    # -- basics ------------------------------------------------------------

    @property
    def shape(self):
        return self.lo.shape

    @property
    def rows(self) -> int:
        return self.lo.shape[0]

    @property
    def cols(self) -> int:
        return self.lo.shape[1]

    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def rad(self) -> np.ndarray:
        # outward radius: mid - rad <= lo and mid + rad >= hi
        return _nup(np.maximum(self.mid() - self.lo, self.hi - self.mid()))

    def mag(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    @property
    def T(self) -> "IntervalMatrix":
        return IntervalMatrix(self.lo.T, self.hi.T)

    def entry(self, i: int, j: int) -> Interval:
        return Interval(self.lo[i, j], self.hi[i, j])

    def contains_point(self, a: np.ndarray) -> bool:
        return bool(np.all(self.lo <= a) and np.all(a <= self.hi))

    def __matmul__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        return mat_mul(self, other)

    def __sub__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        lo = _ndown(self.lo - other.hi)
        hi = _nup(self.hi - other.lo)
        return IntervalMatrix(lo, hi)

    # -- norms -------------------------------------------------------------

    def norm1_upper(self) -> float:
        m = self.mag()
        sums = np.sum(m, axis=0)
        worst = float(np.max(sums))
        return _up(_up(worst) + _sum_slack(worst, self.rows))

    def norminf_upper(self) -> float:
        m = self.mag()
        sums = np.sum(m, axis=1)
        worst = float(np.max(sums))
        return _up(_up(worst) + _sum_slack(worst, self.cols))

    def norm2_upper(self, refine: str = "auto") -> float:
        return mat_norm2_upper(self, refine=refine)


def mat_mul(a: IntervalMatrix, b: IntervalMatrix) -> IntervalMatrix:
    """Interval matrix product with entrywise containment.

    One rank-1 update per inner index; every elementary operation is rounded
    outward, so the result contains every real product of member matrices.
    """
    m, p = a.shape
    p2, n = b.shape
    if p != p2:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    clo = np.zeros((m, n))
    chi = np.zeros((m, n))
    a_point = np.array_equal(a.lo, a.hi)
    for k in range(p):
        blo = b.lo[k, :][np.newaxis, :]
        bhi = b.hi[k, :][np.newaxis, :]
        if a_point:
            col = a.lo[:, k][:, np.newaxis]
            p1 = col * blo
            p2_ = col * bhi
            plo = np.minimum(p1, p2_)
            phi = np.maximum(p1, p2_)
            nz = col != 0.0
        else:
            alo = a.lo[:, k][:, np.newaxis]
            ahi = a.hi[:, k][:, np.newaxis]
            p1 = alo * blo
            p2_ = alo * bhi
            p3 = ahi * blo
            p4 = ahi * bhi
            plo = np.minimum(np.minimum(p1, p2_), np.minimum(p3, p4))
            phi = np.maximum(np.maximum(p1, p2_), np.maximum(p3, p4))
            nz = (alo != 0.0) | (ahi != 0.0)
        bnz = (blo != 0.0) | (bhi != 0.0)
        active = nz & bnz
        np.add(clo, _ndown(plo), out=plo)
        np.add(chi, _nup(phi), out=phi)
        clo = np.where(active, _ndown(plo), clo)
        chi = np.where(active, _nup(phi), chi)
    return IntervalMatrix(clo, chi)


def mat_sub_identity(a: IntervalMatrix) -> IntervalMatrix:
    n = min(a.shape)
    lo = a.lo.copy()
    hi = a.hi.copy()
    idx = np.arange(n)
    alo = lo[idx, idx]
    ahi = hi[idx, idx]
    slo = alo - 1.0
    shi = ahi - 1.0
    lo_exact = ((slo - alo) == -1.0) & ((slo + 1.0) == alo)
    hi_exact = ((shi - ahi) == -1.0) & ((shi + 1.0) == ahi)
    lo[idx, idx] = np.where(lo_exact, slo, _ndown(slo))
    hi[idx, idx] = np.where(hi_exact, shi, _nup(shi))
    return IntervalMatrix(lo, hi)


def _sqrt_up(x: float) -> float:
    return _up(math.sqrt(x))


def _mul_up(a: float, b: float) -> float:
    return _up(a * b)


def _cholesky_shift(n: int, norm_bound: float) -> float:
    # covers the backward error of (blocked) floating Cholesky on n x n input,
    # plus the rounding made while forming the shifted matrix's diagonal
    g = (n + 1) * _EPS / (1.0 - (n + 1) * _EPS)
    return (2.0 * n * g + 8.0 * _EPS) * norm_bound


def _psd_upper_bound(g: IntervalMatrix) -> float:
    """Smallest certified s with lambda_max(G) <= s for all symmetric G in g.

    Verified by the shifted Cholesky test: if floating Cholesky succeeds on
    s*I - mid(G) - beta*I with beta covering the interval radii and the
    factorization's backward error, then s*I - G is positive semidefinite for
    every member.  Returns inf when no shift in the ladder certifies.
    """
    gm = 0.5 * (g.mid() + g.mid().T)
    n = gm.shape[0]
    rad = IntervalMatrix(-g.rad(), g.rad())
    rho_rad = rad.norminf_upper()
    try:
        lam_hat = float(np.linalg.eigvalsh(gm)[-1])
    except np.linalg.LinAlgError:
        return _INF
    lam_hat = max(lam_hat, 0.0)
    scale = max(lam_hat, float(np.max(np.abs(gm))), 1.0)
    gm_norm = float(np.linalg.norm(gm, np.inf))
    for bump in (1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 2.0, 10.0):
        s = lam_hat + bump * scale + rho_rad
        # alpha also absorbs the rounding made while forming the shifted matrix
        alpha = _cholesky_shift(n, s + gm_norm)
        c_shift = _down(_down(s - rho_rad) - alpha)
        shifted = c_shift * np.eye(n) - gm
        try:
            np.linalg.cholesky(shifted)
        except np.linalg.LinAlgError:
            continue
        return _up(s)
    return _INF


def _gersh_sq_upper(g: IntervalMatrix) -> float:
    """Gershgorin upper bound for lambda_max of a symmetric interval matrix."""
    m = g.mag()
    n = g.rows
    rowsum = np.sum(m, axis=1)
    diag_hi = np.diag(g.hi)
    diag_mag = np.diag(m)
    vals = rowsum - diag_mag + diag_hi
    worst = float(np.max(vals))
    return _up(_up(worst) + _sum_slack(float(np.max(rowsum)), n))


def mat_norm2_upper(a: IntervalMatrix, refine: str = "auto") -> float:
    """Rigorous upper bound on the spectral norm of every member of a.

    The cheap bound sqrt(norm1 * norminf) always holds; when it looks loose
    against a floating estimate (or refinement is forced), a verified
    enclosure of the spectrum of A^T A sharpens it.
    """
    cheap = _sqrt_up(_mul_up(a.norm1_upper(), a.norminf_upper()))
    if refine == "never":
        return cheap
    if refine == "auto":
        try:
            sigma_hat = float(np.linalg.norm(a.mid(), 2))
        except np.linalg.LinAlgError:
            sigma_hat = cheap
        if cheap <= 1.1 * sigma_hat or cheap == 0.0:
            return cheap
    g = mat_mul(a.T, a)
    best_sq = min(_gersh_sq_upper(g), _psd_upper_bound(g))
    best_sq = max(best_sq, 0.0)
    return min(cheap, _sqrt_up(best_sq))


def mat_inverse_norm2_upper(a: IntervalMatrix):
    """Certified upper bound for ||A^{-1}||_2 via an approximate inverse.

    Computes a floating inverse C of mid(A), encloses E = C*A - I, and if
    ||E|| = e < 1 returns (||C|| / (1 - e), e, ||C||).  Raises
    IntervalDomainError when the defect cannot be certified below one.
    """
    mid = a.mid()
    try:
        c = np.linalg.inv(mid)
    except np.linalg.LinAlgError as exc:
        raise IntervalDomainError(f"approximate inverse failed: {exc}") from exc
    cm = IntervalMatrix.from_point(c)
    e_mat = mat_sub_identity(mat_mul(cm, a))
    e = e_mat.norm2_upper(refine="never")
    if e >= 0.01:
        e = min(e, e_mat.norm2_upper(refine="force"))
    if e >= 1.0:
        raise IntervalDomainError(
            f"finite inverse not certified: ||C*A - I|| bound {e:.3g} >= 1"
        )
    c_norm = cm.norm2_upper(refine="auto")
    bound = _up(_up(c_norm) / _down(1.0 - e))
    return bound, e, c_norm
