"""Cosine-series algebra on the unit cube in dimensions 1-3.

Functions are represented by dense multi-index coefficient arrays in the
orthonormal basis phi_k(x) = c_k * prod_i cos(k_i pi x_i), c_0 = 1 and
c_m = sqrt(2) for m >= 1.  Coefficients are intervals, so every norm and
product below is a rigorous enclosure; Newton iteration uses the same
convolution fold in plain float arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .intervals import (
    PI2,
    SQRT2,
    Interval,
    IntervalDomainError,
    _ndown,
    _nup,
    vadd,
    vmul,
    vscale,
    vsquare,
    vsum,
)

# interval values of c_k and 1/c_k by number of nonzero index components
_C_FACTOR = (Interval(1.0), SQRT2, Interval(2.0), Interval(2.0) * SQRT2)
_C_INVERSE = tuple(Interval(1.0) / f for f in _C_FACTOR)


# ---------------------------------------------------------------------------
# multi-index helpers
# ---------------------------------------------------------------------------

def kappa(k) -> float:
    """Laplacian eigenvalue pi^2 |k|^2 of the cosine mode k (point value)."""
    return math.pi ** 2 * sum(int(ki) ** 2 for ki in k)

def kappa_iv(k) -> Interval:
    """Interval enclosure of pi^2 |k|^2."""
    return PI2 * Interval(float(sum(int(ki) ** 2 for ki in k)))

def mode_sup(k) -> float:
    """Sup norm c_k of the basis mode phi_k."""
    nz = sum(1 for ki in k if int(ki) != 0)
    return math.sqrt(2.0) ** nz

def k2_grid(extent) -> np.ndarray:
    """|k|^2 over the coefficient grid (exact integers as floats)."""
    grids = np.indices(extent, dtype=np.int64)
    return np.sum(grids.astype(np.float64) ** 2, axis=0)

def nz_grid(extent) -> np.ndarray:
    """Number of nonzero index components over the coefficient grid."""
    grids = np.indices(extent, dtype=np.int64)
    return np.sum(grids != 0, axis=0)


def _vpow_pos(lo: np.ndarray, hi: np.ndarray, n: int):
    """Entrywise n-th power of nonnegative intervals (n >= 1)."""
    rlo = lo.copy()
    rhi = hi.copy()
    for _ in range(n - 1):
        rlo = np.maximum(_ndown(rlo * lo), 0.0)
        rhi = _nup(rhi * hi)
    return rlo, rhi


def _kappa_pow_grid(extent, power: int, mask_origin: bool):
    """Interval arrays of kappa_k^power over the grid.

    For negative powers the origin entry is set to zero and must be masked
    out by the caller (it is only used where the k=0 coefficient vanishes).
    """
    k2 = k2_grid(extent)
    klo = np.maximum(_ndown(PI2.lo * k2), 0.0)
    khi = _nup(PI2.hi * k2)
    origin = tuple(0 for _ in extent)
    if power == 0:
        lo = np.ones(extent)
        hi = np.ones(extent)
    elif power > 0:
        lo, hi = _vpow_pos(klo, khi, power)
        lo[origin] = 0.0
        hi[origin] = 0.0
    else:
        plo, phi = _vpow_pos(klo, khi, -power)
        plo[origin] = 1.0  # placeholder, masked below
        phi[origin] = 1.0
        lo = np.maximum(_ndown(1.0 / phi), 0.0)
        hi = _nup(1.0 / plo)
        lo[origin] = 0.0
        hi[origin] = 0.0
    if mask_origin and power >= 0:
        lo[origin] = 0.0
        hi[origin] = 0.0
    return lo, hi


# ---------------------------------------------------------------------------
# the series container
# ---------------------------------------------------------------------------

@dataclass
class CosineSeries:
    """Truncated cosine expansion with interval coefficients."""

    lo: np.ndarray
    hi: np.ndarray
    zero_mean: bool = False

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=np.float64)
        self.hi = np.asarray(self.hi, dtype=np.float64)
        if self.lo.shape != self.hi.shape:
            raise ValueError("coefficient bound arrays must have equal shape")
        if not 1 <= self.lo.ndim <= 3:
            raise ValueError("only dimensions 1-3 are supported")
        if np.any(self.lo > self.hi):
            raise IntervalDomainError("series with lo > hi coefficient")
        if self.zero_mean:
            origin = tuple(0 for _ in range(self.lo.ndim))
            if self.lo[origin] != 0.0 or self.hi[origin] != 0.0:
                raise IntervalDomainError("zero_mean series with nonzero k=0 mode")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, extent, zero_mean: bool = True) -> "CosineSeries":
        extent = tuple(int(n) for n in extent)
        return cls(np.zeros(extent), np.zeros(extent), zero_mean)

    @classmethod
    def from_point(cls, coeffs, zero_mean: bool = False) -> "CosineSeries":
        a = np.asarray(coeffs, dtype=np.float64)
        return cls(a.copy(), a.copy(), zero_mean)

    @classmethod
    def single_mode(cls, extent, k, amplitude: float = 1.0) -> "CosineSeries":
        extent = tuple(int(n) for n in extent)
        a = np.zeros(extent)
        a[tuple(int(ki) for ki in k)] = amplitude
        zm = a[tuple(0 for _ in extent)] == 0.0
        return cls(a, a.copy(), zm)

    # -- basics --------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.lo.ndim

    @property
    def extent(self):
        return self.lo.shape

    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def width(self) -> float:
        return float(np.max(self.hi - self.lo)) if self.lo.size else 0.0

    def coefficient(self, k) -> Interval:
        idx = tuple(int(ki) for ki in k)
        return Interval(self.lo[idx], self.hi[idx])

    def contains_coeffs(self, coeffs: np.ndarray) -> bool:
        c = _pad_to(np.asarray(coeffs, dtype=np.float64), self.extent)
        return bool(np.all(self.lo <= c) and np.all(c <= self.hi))

    def pad_to(self, extent) -> "CosineSeries":
        extent = tuple(int(n) for n in extent)
        return CosineSeries(
            _pad_to(self.lo, extent), _pad_to(self.hi, extent), self.zero_mean
        )

    def __neg__(self) -> "CosineSeries":
        return CosineSeries(-self.hi, -self.lo, self.zero_mean)

    def __add__(self, other: "CosineSeries") -> "CosineSeries":
        ext = tuple(
            max(a, b) for a, b in zip(self.extent, other.extent)
        )
        a = self.pad_to(ext)
        b = other.pad_to(ext)
        lo, hi = vadd(a.lo, a.hi, b.lo, b.hi)
        return CosineSeries(lo, hi, self.zero_mean and other.zero_mean)

    def __sub__(self, other: "CosineSeries") -> "CosineSeries":
        return self + (-other)

    def scale(self, c) -> "CosineSeries":
        c = c if isinstance(c, Interval) else Interval(float(c))
        lo, hi = vscale(self.lo, self.hi, c)
        return CosineSeries(lo, hi, self.zero_mean)

    def add_constant(self, c) -> "CosineSeries":
        """Add a constant (shifts only the mean mode)."""
        c = c if isinstance(c, Interval) else Interval(float(c))
        lo = self.lo.copy()
        hi = self.hi.copy()
        origin = tuple(0 for _ in range(self.dim))
        mean = Interval(lo[origin], hi[origin]) + c
        lo[origin] = mean.lo
        hi[origin] = mean.hi
        return CosineSeries(lo, hi, zero_mean=(mean.lo == 0.0 == mean.hi))


def _pad_to(a: np.ndarray, extent) -> np.ndarray:
    if a.shape == tuple(extent):
        return a
    if any(n < s for n, s in zip(extent, a.shape)):
        raise ValueError(f"cannot pad {a.shape} down to {extent}")
    out = np.zeros(extent, dtype=a.dtype)
    out[tuple(slice(0, s) for s in a.shape)] = a
    return out


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def norm(u: CosineSeries, space: str, ell: int = 0) -> Interval:
    """Enclosure of a Sobolev-type norm of the series.

    space is one of:
      "L2"    -- (sum alpha_k^2)^(1/2)
      "Hbar"  -- (sum_{|k|>0} kappa_k^ell alpha_k^2)^(1/2), zero-mean functions
      "H"     -- (sum (1 + kappa_k^ell) alpha_k^2)^(1/2), ell >= 0
      "sup"   -- the l1 bound sum |alpha_k| c_k, an upper bound for the sup norm
    """
    if space == "L2":
        sq = vsquare(u.lo, u.hi)
        return vsum(*sq).sqrt()
    if space == "Hbar":
        if not u.zero_mean:
            raise IntervalDomainError("Hbar norm requires a zero-mean series")
        sq = vsquare(u.lo, u.hi)
        wlo, whi = _kappa_pow_grid(u.extent, ell, mask_origin=True)
        tlo, thi = vmul(sq[0], sq[1], wlo, whi)
        return vsum(tlo, thi).sqrt()
    if space == "H":
        if ell < 0:
            raise IntervalDomainError("H norm needs ell >= 0")
        if ell == 0:
            return norm(u, "L2")
        sq = vsquare(u.lo, u.hi)
        klo, khi = _kappa_pow_grid(u.extent, ell, mask_origin=False)
        wlo, whi = vadd(np.ones(u.extent), np.ones(u.extent), klo, khi)
        tlo, thi = vmul(sq[0], sq[1], wlo, whi)
        return vsum(tlo, thi).sqrt()
    if space == "sup":
        return sup_bound(u)
    raise ValueError(f"unknown norm space {space!r}")


def sup_bound(u: CosineSeries) -> Interval:
    """Enclosure of sum_k |alpha_k| c_k; its upper end bounds the sup norm."""
    alo = np.where(u.lo > 0.0, u.lo, np.where(u.hi < 0.0, -u.hi, 0.0))
    ahi = np.maximum(np.abs(u.lo), np.abs(u.hi))
    nz = nz_grid(u.extent)
    clo = np.array([f.lo for f in _C_FACTOR])[nz]
    chi = np.array([f.hi for f in _C_FACTOR])[nz]
    return vsum(*vmul(alo, ahi, clo, chi))


# ---------------------------------------------------------------------------
# Laplacian and projections
# ---------------------------------------------------------------------------

def laplacian(u: CosineSeries, power: int = 1) -> CosineSeries:
    """Coefficientwise (-Delta)^power ... applied as alpha_k -> (-kappa_k)^power alpha_k.

    Positive powers annihilate the mean mode; negative powers require a
    zero-mean series.
    """
    if power == 0:
        return u
    if power < 0 and not u.zero_mean:
        raise IntervalDomainError("inverse Laplacian requires a zero-mean series")
    wlo, whi = _kappa_pow_grid(u.extent, power, mask_origin=True)
    if power % 2:  # odd power of (-kappa)
        wlo, whi = -whi, -wlo
    lo, hi = vmul(u.lo, u.hi, wlo, whi)
    return CosineSeries(lo, hi, zero_mean=True)


def project(u: CosineSeries, n: int) -> CosineSeries:
    """Keep the modes with |k|_inf < n."""
    if n < 1:
        raise ValueError("projection cut must be >= 1")
    sl = tuple(slice(0, min(n, s)) for s in u.extent)
    return CosineSeries(u.lo[sl].copy(), u.hi[sl].copy(), u.zero_mean)


def tail(u: CosineSeries, n: int) -> CosineSeries:
    """The complementary part u - P_n u."""
    lo = u.lo.copy()
    hi = u.hi.copy()
    sl = tuple(slice(0, min(n, s)) for s in u.extent)
    lo[sl] = 0.0
    hi[sl] = 0.0
    return CosineSeries(lo, hi, u.zero_mean)


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def _fold_segments(a_idx, b_shape):
    """Per-axis (target, source) slice pairs for one cosine product shift.

    cos(a t) cos(b t) = (cos((a+b)t) + cos(|a-b|t)) / 2, applied per axis;
    the |a-b| branch splits into a reversed and a forward slice.
    """
    per_axis = []
    for ai, nb in zip(a_idx, b_shape):
        ai = int(ai)
        segs = [(slice(ai, ai + nb), slice(0, nb, 1))]
        m = min(ai, nb - 1)
        segs.append((slice(ai - m, ai + 1), slice(m, None, -1)))
        if nb - 1 > ai:
            segs.append((slice(1, nb - ai), slice(ai + 1, nb, 1)))
        per_axis.append(segs)
    for combo in itertools.product(*per_axis):
        yield tuple(c[0] for c in combo), tuple(c[1] for c in combo)


def _raw_conv(alo, ahi, blo, bhi):
    """Exact cosine-product convolution of raw coefficient interval arrays."""
    d = alo.ndim
    out_shape = tuple(na + nb - 1 for na, nb in zip(alo.shape, blo.shape))
    out_lo = np.zeros(out_shape)
    out_hi = np.zeros(out_shape)
    half = Interval(0.5 ** d)
    for idx in np.argwhere((alo != 0.0) | (ahi != 0.0)):
        a_idx = tuple(int(i) for i in idx)
        w = Interval(alo[a_idx], ahi[a_idx]) * half
        for out_sl, b_sl in _fold_segments(a_idx, blo.shape):
            clo, chi = vscale(blo[b_sl], bhi[b_sl], w)
            rlo, rhi = vadd(out_lo[out_sl], out_hi[out_sl], clo, chi)
            out_lo[out_sl] = rlo
            out_hi[out_sl] = rhi
    return out_lo, out_hi


def _raw_conv_point(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Float version of the same fold (non-rigorous Newton path)."""
    d = a.ndim
    out = np.zeros(tuple(na + nb - 1 for na, nb in zip(a.shape, b.shape)))
    half = 0.5 ** d
    for idx in np.argwhere(a != 0.0):
        a_idx = tuple(int(i) for i in idx)
        w = a[a_idx] * half
        for out_sl, b_sl in _fold_segments(a_idx, b.shape):
            out[out_sl] += w * b[b_sl]
    return out


def _c_factor_arrays(extent, inverse: bool):
    table = _C_INVERSE if inverse else _C_FACTOR
    nz = nz_grid(extent)
    return (
        np.array([f.lo for f in table])[nz],
        np.array([f.hi for f in table])[nz],
    )


def to_raw(u: CosineSeries):
    """Raw cosine coefficients alpha_k c_k as interval arrays."""
    clo, chi = _c_factor_arrays(u.extent, inverse=False)
    return vmul(u.lo, u.hi, clo, chi)


def from_raw(lo: np.ndarray, hi: np.ndarray, zero_mean: bool = False) -> CosineSeries:
    clo, chi = _c_factor_arrays(lo.shape, inverse=True)
    nlo, nhi = vmul(lo, hi, clo, chi)
    return CosineSeries(nlo, nhi, zero_mean)


def multiply(u: CosineSeries, v: CosineSeries) -> CosineSeries:
    """Exact product of two series (no truncation, outward rounding only)."""
    if u.dim != v.dim:
        raise ValueError("product of series with different dimensions")
    # iterate over the factor with fewer populated modes
    nu = int(np.count_nonzero((u.lo != 0.0) | (u.hi != 0.0)))
    nv = int(np.count_nonzero((v.lo != 0.0) | (v.hi != 0.0)))
    if nv < nu:
        u, v = v, u
    ulo, uhi = to_raw(u)
    vlo, vhi = to_raw(v)
    rlo, rhi = _raw_conv(ulo, uhi, vlo, vhi)
    return from_raw(rlo, rhi, zero_mean=False)


def multiply_point(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Float product in normalized coefficients (Newton path)."""
    if np.count_nonzero(b) < np.count_nonzero(a):
        a, b = b, a
    ca = math.sqrt(2.0) ** nz_grid(a.shape)
    cb = math.sqrt(2.0) ** nz_grid(b.shape)
    raw = _raw_conv_point(a * ca, b * cb)
    return raw / (math.sqrt(2.0) ** nz_grid(raw.shape))


# ---------------------------------------------------------------------------
# evaluation (non-rigorous; plotting and diagnostics)
# ---------------------------------------------------------------------------

def evaluate(u: CosineSeries, x) -> float:
    """Pointwise value of the midpoint series at x in [0,1]^d."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.size != u.dim:
        raise ValueError("point dimension mismatch")
    raw = u.mid() * math.sqrt(2.0) ** nz_grid(u.extent)
    val = raw
    for axis in range(u.dim):
        kcos = np.cos(np.arange(u.extent[axis]) * math.pi * x[axis])
        val = np.tensordot(kcos, val, axes=(0, 0))
    return float(val)


def evaluate_grid(u: CosineSeries, axes) -> np.ndarray:
    """Values of the midpoint series on a tensor grid (one 1-d array per axis)."""
    raw = u.mid() * math.sqrt(2.0) ** nz_grid(u.extent)
    val = raw
    for axis, pts in enumerate(axes):
        pts = np.asarray(pts, dtype=np.float64)
        mat = np.cos(np.outer(np.arange(u.extent[axis]), math.pi * pts))
        # contract the leading remaining coefficient axis against this axis' modes
        val = np.tensordot(val, mat, axes=(0, 0))
    return val
