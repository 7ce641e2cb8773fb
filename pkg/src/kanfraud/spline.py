"""Uniform B-spline bases on extended knot vectors.

A spline of degree ``k`` with ``G`` intervals over ``[lo, hi]`` uses
``G + 2k + 1`` knots: the ``G + 1`` domain breakpoints plus ``k`` extra knots
on each side that continue the uniform spacing. That gives ``G + k`` basis
functions which form a partition of unity everywhere on ``[lo, hi]``.

Inputs outside the domain are clamped to it, so evaluation is total.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    InvalidParameterError,
    InvalidRangeError,
    NonFiniteInputError,
    UnsupportedDegreeError,
)

__all__ = [
    "KnotVector",
    "SplineFunction",
    "make_knots",
    "cox_de_boor",
    "basis_values",
    "basis_matrix",
    "basis_with_derivative",
    "spline_eval",
    "spline_grad_coeffs",
    "spline_deriv_input",
]


@dataclass(frozen=True, eq=False)
class KnotVector:
    domain_lo: float
    domain_hi: float
    grid: int
    degree: int
    knots: np.ndarray

    @property
    def n_basis(self):
        return self.grid + self.degree

    @property
    def spacing(self):
        return (self.domain_hi - self.domain_lo) / self.grid

    def clamp(self, t):
        return np.clip(t, self.domain_lo, self.domain_hi)

    def to_dict(self):
        return {
            "domain_lo": self.domain_lo,
            "domain_hi": self.domain_hi,
            "grid": self.grid,
            "degree": self.degree,
            "knots": self.knots.tolist(),
        }


@dataclass(frozen=True, eq=False)
class SplineFunction:
    knots: KnotVector
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=np.float64)
        if coeffs.shape != (self.knots.n_basis,):
            raise InvalidParameterError(
                f"expected {self.knots.n_basis} coefficients, got shape {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, t):
        return spline_eval(self, t)


def make_knots(domain_lo, domain_hi, grid, degree):
    """Build the uniform extended knot vector for ``grid`` intervals of ``degree``."""
    domain_lo = float(domain_lo)
    domain_hi = float(domain_hi)
    if not (np.isfinite(domain_lo) and np.isfinite(domain_hi)) or domain_lo >= domain_hi:
        raise InvalidRangeError(f"need domain_lo < domain_hi, got [{domain_lo}, {domain_hi}]")
    if int(grid) != grid or grid < 1:
        raise InvalidParameterError(f"grid must be a positive integer, got {grid}")
    if int(degree) != degree or degree < 1:
        raise InvalidParameterError(f"degree must be a positive integer, got {degree}")
    grid, degree = int(grid), int(degree)
    h = (domain_hi - domain_lo) / grid
    knots = domain_lo + np.arange(-degree, grid + degree + 1, dtype=np.float64) * h
    # pin the domain ends so clamped inputs land exactly on a breakpoint
    knots[degree] = domain_lo
    knots[degree + grid] = domain_hi
    knots.setflags(write=False)
    return KnotVector(domain_lo, domain_hi, grid, degree, knots)


def _check_finite(t):
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise NonFiniteInputError("spline input contains NaN or infinity")
    return t


def cox_de_boor(knots, t, degree):
    """Every basis function of ``degree`` over arbitrary ``knots`` at ``t``.

    Straight vectorised Cox-de Boor recursion from the degree-0 indicators
    on half-open knot spans. Returns ``(B_degree, B_degree-1)``; the second
    item is None for degree 0.
    """
    knots = np.asarray(knots, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)[..., None]
    prev = None
    basis = ((t >= knots[:-1]) & (t < knots[1:])).astype(np.float64)
    for p in range(1, degree + 1):
        left = (t - knots[: -(p + 1)]) / (knots[p:-1] - knots[: -(p + 1)])
        right = (knots[p + 1 :] - t) / (knots[p + 1 :] - knots[1:-p])
        prev = basis
        basis = left * prev[..., :-1] + right * prev[..., 1:]
    return basis, prev


def _find_span(kv, t):
    """Index s with knots[s] <= t < knots[s+1]; the domain's right end maps
    to the last domain interval."""
    k, G, knots = kv.degree, kv.grid, kv.knots
    s = k + np.floor((t - kv.domain_lo) / kv.spacing).astype(np.int64)
    s = np.clip(s, k, k + G - 1)
    s = np.where(t < knots[s], s - 1, s)
    s = np.where((t >= knots[s + 1]) & (s < k + G - 1), s + 1, s)
    return np.clip(s, k, k + G - 1)


def _local_basis(kv, t):
    """Nonzero basis values on each point's knot span.

    ``t`` is 1-D and already clamped. With uniform spacing ``h`` and local
    coordinate ``u = (t - knots[span]) / h`` every Cox-de Boor denominator
    at level ``j`` equals ``j * h``, so each level is two vectorised
    multiply-adds. Returns the span indices, the k+1 degree-k values and the
    k degree-(k-1) values.
    """
    k = kv.degree
    span = _find_span(kv, t)
    u = np.clip((t - kv.knots[span]) / kv.spacing, 0.0, 1.0)
    n = t.shape[0]
    # rows are basis functions, columns points: contiguous row operations
    N = np.ones((1, n))
    lower = N
    for j in range(1, k + 1):
        r = np.arange(j)[:, None]
        temp = N * (1.0 / j)
        nxt = np.empty((j + 1, n))
        nxt[:j] = (r + 1 - u) * temp
        nxt[j] = 0.0
        nxt[1:] += (u + (j - 1 - r)) * temp
        lower, N = N, nxt
    return span, N.T, lower.T


def _scatter(span, local, offset, width):
    out = np.zeros((span.shape[0], width))
    cols = (span - offset)[:, None] + np.arange(local.shape[1])
    np.put_along_axis(out, cols, local, axis=1)
    return out


def basis_matrix(kv, t):
    """Vectorised basis values: array of shape ``t.shape + (G + k,)``."""
    t = kv.clamp(_check_finite(t))
    flat = np.atleast_1d(t).ravel()
    span, N, _ = _local_basis(kv, flat)
    return _scatter(span, N, kv.degree, kv.n_basis).reshape(np.shape(t) + (kv.n_basis,))


def basis_values(kv, t):
    """All ``G + k`` basis values at a scalar ``t`` (clamped into the domain)."""
    return basis_matrix(kv, np.float64(t))


def basis_with_derivative(kv, t):
    """Basis values and their derivatives with respect to ``t``.

    The derivative is zero wherever ``t`` was clamped, matching the
    flat extension of the spline outside its domain.
    """
    t = _check_finite(t)
    shape = np.shape(t)
    flat = np.atleast_1d(t).ravel()
    inside = (flat >= kv.domain_lo) & (flat <= kv.domain_hi)
    span, N, lower = _local_basis(kv, kv.clamp(flat))
    k = kv.degree
    # dB_i/dt = k N_{i,k-1}/(t_{i+k}-t_i) - k N_{i+1,k-1}/(t_{i+k+1}-t_{i+1})
    # reduces to (N_{i,k-1} - N_{i+1,k-1}) / h on uniform knots;
    # i = span-k+c and lower[c'] holds N_{span-k+1+c', k-1}
    padded = np.zeros((flat.shape[0], k + 2))
    padded[:, 1 : k + 1] = lower
    dlocal = (padded[:, : k + 1] - padded[:, 1:]) * (inside[:, None] / kv.spacing)
    basis = _scatter(span, N, k, kv.n_basis).reshape(shape + (kv.n_basis,))
    dbasis = _scatter(span, dlocal, k, kv.n_basis).reshape(shape + (kv.n_basis,))
    return basis, dbasis


def spline_eval(f, t):
    return basis_matrix(f.knots, t) @ f.coeffs


def spline_grad_coeffs(f, t):
    """Gradient of ``spline_eval(f, t)`` with respect to the coefficients."""
    return basis_values(f.knots, t)


def spline_deriv_input(f, t):
    """d/dt of the spline, via differenced coefficients on the degree-reduced basis.

    Zero outside the domain, where the spline is extended flat.
    """
    kv = f.knots
    if kv.degree < 1:
        raise UnsupportedDegreeError("derivative needs degree >= 1")
    t = _check_finite(t)
    shape = np.shape(t)
    flat = np.atleast_1d(t).ravel()
    inside = (flat >= kv.domain_lo) & (flat <= kv.domain_hi)
    k, knots, c = kv.degree, kv.knots, f.coeffs
    span, _, lower = _local_basis(kv, kv.clamp(flat))
    # lower[:, m] is N_{j,k-1} with j = span-k+1+m; 1 <= j <= G+k-1
    j = (span - k + 1)[:, None] + np.arange(k)
    weights = k * (c[j] - c[j - 1]) / (knots[j + k] - knots[j])
    out = np.where(inside, np.sum(lower * weights, axis=1), 0.0)
    return out.reshape(shape) if shape else float(out[0])
