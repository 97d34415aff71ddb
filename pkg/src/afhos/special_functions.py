"""Scalar special functions used by the capacity kernels and fading models.

All functions accept scalars or numpy arrays and return the same kind.
Nothing here depends on an external special-function library; the heavy
lifting is done with series, asymptotic expansions and the log-concave
quadrature engine in :mod:`afhos._quad`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import log_concave_integral
from .errors import DomainError

EULER_GAMMA = 0.5772156649015328606

# Positive root of Ei, split in two doubles so x - root is accurate near it.
_EI_ROOT_HI = 0.3725074107813666
_EI_ROOT_LO = 1.3140183414386028e-17

_X_EI_ASYMPTOTIC = 40.0
_X_KUMMER_ASYMPTOTIC = 60.0
_X_KUMMER_SERIES_MAX = 700.0

# B_2k for the polygamma asymptotic expansion
_BERNOULLI_2K = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
)


@dataclass(frozen=True)
class AccuracyTarget:
    """Relative tolerance plus an absolute floor for a numerical routine."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise DomainError(f"abs_tol must be non-negative, got {self.abs_tol}")


@dataclass(frozen=True)
class MathConstants:
    euler_gamma: float = EULER_GAMMA


DEFAULT_ACCURACY = AccuracyTarget()


def _unwrap(out: np.ndarray, scalar: bool):
    return float(np.asarray(out).reshape(-1)[0]) if scalar else out


def _sinpi(a: float) -> float:
    k = round(a)
    return math.sin(math.pi * (a - k)) * (-1.0 if k % 2 else 1.0)


class _Neumaier:
    """Vectorised compensated summation."""

    def __init__(self, shape):
        self.s = np.zeros(shape)
        self.c = np.zeros(shape)

    def add(self, term):
        t = self.s + term
        big = np.abs(self.s) >= np.abs(term)
        self.c += np.where(big, (self.s - t) + term, (term - t) + self.s)
        self.s = t

    @property
    def value(self):
        return self.s + self.c


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------


def _zeta_table(kmax: int = 40) -> list[float]:
    """zeta(k) for k = 0..kmax (entries 0, 1 unused), Euler-Maclaurin at N = 16."""
    n = 16
    table = [math.nan, math.nan]
    for k in range(2, kmax + 1):
        terms = [j ** -k for j in range(1, n)]
        terms += [n ** (1 - k) / (k - 1), 0.5 * n**-k]
        rising = k
        for j, b2j in enumerate(_BERNOULLI_2K[:6], start=1):
            terms.append(b2j / math.factorial(2 * j) * rising * n ** (-k - 2 * j + 1))
            rising *= (k + 2 * j - 1) * (k + 2 * j)
        table.append(math.fsum(terms))
    return table


_ZETA = _zeta_table()


def _lgamma_near_one(eps: float) -> float:
    """log Gamma(1 + eps) for |eps| <= 0.25, accurate relative to its size."""
    terms = [-EULER_GAMMA * eps]
    power = -eps
    for k in range(2, len(_ZETA)):
        power *= -eps
        terms.append(_ZETA[k] * power / k)
    return math.fsum(terms)


def _lgamma_scalar(x: float) -> float:
    if abs(x - 1.0) <= 0.25:
        return _lgamma_near_one(x - 1.0)
    if abs(x - 2.0) <= 0.25:
        return _lgamma_near_one(x - 2.0) + math.log1p(x - 2.0)
    return math.lgamma(x)


def log_gamma(x):
    """Natural log of the Gamma function for ``x > 0``.

    Defers to :func:`math.lgamma` except near the zeros at 1 and 2, where a
    zeta series keeps the relative error small.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("log_gamma requires x > 0")
    if arr.ndim == 0:
        return _lgamma_scalar(float(arr))
    return np.vectorize(_lgamma_scalar, otypes=[float])(arr)


def polygamma(j: int, x):
    """Polygamma function ``psi^(j)(x)`` for ``j`` in 0..4 and ``x > 0``.

    Upward recurrence to ``x >= 15`` followed by the Bernoulli asymptotic
    series.
    """
    if j not in (0, 1, 2, 3, 4):
        raise DomainError(f"polygamma order must be in 0..4, got {j}")
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(~(arr > 0)):
        raise DomainError("polygamma requires x > 0")

    shift = np.maximum(0, np.ceil(15.0 - arr)).astype(int)
    y = arr + shift
    acc = _Neumaier(arr.shape)
    fact_j = math.factorial(j)
    sign = -1.0 if j == 0 else (-1.0) ** (j + 1) * fact_j
    for i in range(int(shift.max(initial=0))):
        active = i < shift
        acc.add(np.where(active, sign / (arr + i) ** (j + 1), 0.0))

    inv = 1.0 / y
    if j == 0:
        asym = np.log(y) - 0.5 * inv
        inv2 = inv * inv
        power = inv2
        for k, b2k in enumerate(_BERNOULLI_2K, start=1):
            asym = asym - b2k / (2 * k) * power
            power = power * inv2
    else:
        series = math.factorial(j - 1) * inv**j + 0.5 * fact_j * inv ** (j + 1)
        for k, b2k in enumerate(_BERNOULLI_2K, start=1):
            coef = b2k * math.factorial(2 * k + j - 1) / math.factorial(2 * k)
            series = series + coef * inv ** (2 * k + j)
        asym = (-1.0) ** (j + 1) * series
    acc.add(asym)
    return _unwrap(acc.value, scalar)


# ---------------------------------------------------------------------------
# Modified Bessel function of the second kind
# ---------------------------------------------------------------------------


def log_bessel_k(nu, x):
    """``log K_nu(x)`` via ``K_nu(x) = 1/2 int exp(nu t - x cosh t) dt``."""
    nu_arr, x_arr = np.broadcast_arrays(np.abs(np.asarray(nu, dtype=float)), np.asarray(x, dtype=float))
    scalar = x_arr.ndim == 0
    nu_flat = np.atleast_1d(nu_arr).ravel()
    x_flat = np.atleast_1d(x_arr).ravel()
    if np.any(~(x_flat > 0)):
        raise DomainError("bessel_k requires x > 0")

    mode = np.arcsinh(nu_flat / x_flat)
    curvature = np.hypot(x_flat, nu_flat)

    def logf(t):
        with np.errstate(over="ignore"):
            return nu_flat[:, None] * t - x_flat[:, None] * np.cosh(t)

    out = np.log(0.5) + log_concave_integral(logf, mode, curvature)
    out = out.reshape(np.shape(x_arr)) if not scalar else out[0]
    return _unwrap(out, scalar)


def bessel_k(nu, x):
    """Modified Bessel function of the second kind ``K_nu(x)`` for real ``nu``.

    ``K_{-nu} = K_nu``, so only ``|nu|`` is used.  Returns 0 where the value
    underflows.
    """
    val = np.exp(log_bessel_k(nu, x))
    return float(val) if np.ndim(val) == 0 else val


# ---------------------------------------------------------------------------
# Exponential integral
# ---------------------------------------------------------------------------


def _ein_positive(x: np.ndarray) -> np.ndarray:
    """``sum_{k>=1} x^k / (k k!)`` (= Ei(x) - gamma - ln x), positive terms."""
    acc = _Neumaier(x.shape)
    r = np.ones_like(x)
    kmax = int(np.ceil(np.max(x, initial=0.0) + 12.0 * np.sqrt(np.max(x, initial=0.0)) + 40))
    for k in range(1, kmax + 1):
        r = r * x / k
        acc.add(r / k)
        if k > 2 * np.max(x, initial=0.0) and np.all(r / k <= 1e-18 * np.abs(acc.s)):
            break
    return acc.value


def _ei_asymptotic_scaled(x: np.ndarray) -> np.ndarray:
    """``exp(-x) Ei(x)`` from the optimally truncated asymptotic series."""
    acc = _Neumaier(x.shape)
    term = 1.0 / x
    prev = np.full_like(x, np.inf)
    live = np.ones(x.shape, dtype=bool)
    k = 0
    while live.any() and k < 400:
        live &= np.abs(term) < np.abs(prev)
        acc.add(np.where(live, term, 0.0))
        live &= np.abs(term) > 1e-18 * np.abs(acc.s)
        prev = term
        k += 1
        term = term * k / x
    return acc.value


_EI_ROOT_COEFS = None


def _ei_root_coefficients(order: int = 10):
    """Taylor coefficients of Ei about its positive root."""
    global _EI_ROOT_COEFS
    if _EI_ROOT_COEFS is None:
        x0 = _EI_ROOT_HI
        coefs = [0.0]
        for k in range(1, order + 1):
            j = k - 1  # j-th derivative of exp(x)/x
            deriv = math.exp(x0) * sum(
                math.comb(j, i) * (-1) ** i * math.factorial(i) / x0 ** (i + 1) for i in range(j + 1)
            )
            coefs.append(deriv / math.factorial(k))
        _EI_ROOT_COEFS = coefs
    return _EI_ROOT_COEFS


def exp_integral_ei(x):
    """Exponential integral ``Ei(x)`` for ``x > 0``.

    Ascending series up to 40, optimally truncated asymptotic expansion
    beyond, and a Taylor expansion about the root x0 = 0.3725... to keep the
    relative error small where Ei changes sign.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(~(arr > 0)):
        raise DomainError("exp_integral_ei requires x > 0")
    out = np.empty_like(arr)
    small = arr <= _X_EI_ASYMPTOTIC
    if small.any():
        xs = arr[small]
        out[small] = EULER_GAMMA + np.log(xs) + _ein_positive(xs)
    if (~small).any():
        xl = arr[~small]
        with np.errstate(over="ignore"):
            out[~small] = np.exp(xl) * _ei_asymptotic_scaled(xl)
    near = np.abs(arr - _EI_ROOT_HI) < 1e-3
    if near.any():
        d = (arr[near] - _EI_ROOT_HI) - _EI_ROOT_LO
        coefs = _ei_root_coefficients()
        val = np.zeros_like(d)
        for c in reversed(coefs[1:]):
            val = (val + c) * d
        out[near] = val
    return _unwrap(out[0] if scalar else out, scalar)


def ei_minus_log_scaled(x):
    """``exp(-x) (Ei(x) - gamma - ln x)`` without cancellation, ``x >= 0``."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    small = arr <= _X_EI_ASYMPTOTIC
    if small.any():
        xs = arr[small]
        out[small] = np.exp(-xs) * _ein_positive(xs)
    if (~small).any():
        xl = arr[~small]
        out[~small] = _ei_asymptotic_scaled(xl) - np.exp(-xl) * (EULER_GAMMA + np.log(xl))
    return _unwrap(out[0] if scalar else out, scalar)


# ---------------------------------------------------------------------------
# Kummer 1F1[a; 1; z] for z <= 0
# ---------------------------------------------------------------------------


def _kummer_series(a: float, x: np.ndarray, start: int = 0) -> np.ndarray:
    """``exp(-x) sum_{k>=start} (1-a)_k x^k / (k!)^2`` for ``0 <= x <= 700``."""
    b = 1.0 - a
    acc = _Neumaier(x.shape)
    t = np.exp(-x)
    if start == 0:
        acc.add(t)
    xmax = float(np.max(x, initial=0.0))
    kmax = int(np.ceil(xmax + 12.0 * math.sqrt(xmax) + 60))
    for k in range(1, kmax + 1):
        t = t * ((b + k - 1) * x / (k * k))
        if k >= start:
            acc.add(t)
        if b <= 0 and b == round(b) and k >= -b:
            break  # (1-a)_k vanishes from here on
        if k > max(start, 2 * xmax + abs(b) + 2) and np.all(np.abs(t) <= 1e-18 * np.abs(acc.s)):
            break
    return acc.value


def _kummer_head(a: float, x: np.ndarray, start: int) -> np.ndarray:
    """``exp(-x) sum_{k<start} (1-a)_k x^k / (k!)^2``."""
    b = 1.0 - a
    t = np.exp(-x)
    head = t.copy()
    for k in range(1, start):
        t = t * ((b + k - 1) * x / (k * k))
        head = head + t
    return head


def _recip_gamma_one_minus(a: float) -> float:
    """``1 / Gamma(1 - a)``, exact zero at positive integers."""
    if a <= 0:
        return math.exp(-math.lgamma(1.0 - a))
    if a == round(a):
        return 0.0
    return _sinpi(a) * math.gamma(a) / math.pi


def _kummer_asymptotic(a: float, x: np.ndarray) -> np.ndarray:
    """Algebraic large-x part ``x^-a / Gamma(1-a) sum ((a)_j)^2 / j! x^-j``."""
    acc = _Neumaier(x.shape)
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    live = np.ones(x.shape, dtype=bool)
    j = 0
    while live.any() and j < 200:
        live &= np.abs(term) < np.abs(prev)
        acc.add(np.where(live, term, 0.0))
        live &= np.abs(term) > 1e-18 * np.abs(acc.s)
        prev = term
        term = term * (a + j) ** 2 / ((j + 1) * x)
        j += 1
    return _recip_gamma_one_minus(a) * x ** (-a) * acc.value


def _subdominant_negligible(a: float, x: np.ndarray) -> np.ndarray:
    """True where the exp(-x) part of the large-x expansion is below 1e-17 relative."""
    rg = abs(_recip_gamma_one_minus(a))
    if rg == 0.0:
        return np.zeros(x.shape, dtype=bool)
    log_ga = math.lgamma(a) if a > 0 else 0.0
    with np.errstate(divide="ignore"):
        log_ratio = -x + (2 * a - 1) * np.log(x) - log_ga - math.log(rg)
    return log_ratio < -40.0


def kummer_tail(a: float, z, start: int = 0):
    """``1F1[a;1;z]`` minus its first ``start`` Kummer-transformed terms.

    With ``x = -z`` the Kummer transform gives
    ``1F1[a;1;-x] = exp(-x) sum_k (1-a)_k x^k / (k!)^2``; this returns the
    sum from ``k = start``.  Dropping leading terms that are polynomials of
    degree ``< start`` in ``a`` is exact under an order-``start`` difference
    in ``a``, which is how the Grünwald-Letnikov kernel uses it.
    """
    if not -1.0 <= a <= 3.0:
        raise DomainError(f"kummer_1f1_b1 supports a in [-1, 3], got {a}")
    zarr = np.asarray(z, dtype=float)
    scalar = zarr.ndim == 0
    x = -np.atleast_1d(zarr)
    if np.any(~(x >= 0)):
        raise DomainError("kummer_1f1_b1 requires z <= 0")
    out = np.empty_like(x)
    terminating = a >= 1 and a == round(a)  # finite polynomial times exp(-x)
    asym = (x > _X_KUMMER_ASYMPTOTIC) & (_subdominant_negligible(a, x) | (x > _X_KUMMER_SERIES_MAX)) & (not terminating)
    if (~asym).any():
        out[~asym] = _kummer_series(a, x[~asym], start)
    if asym.any():
        xa = x[asym]
        val = _kummer_asymptotic(a, xa)
        if start > 0:
            val = val - _kummer_head(a, xa, start)
        out[asym] = val
    return _unwrap(out[0] if scalar else out, scalar)


def kummer_1f1_b1(a: float, z):
    """Confluent hypergeometric ``1F1[a; 1; z]`` for ``a`` in [-1, 3], ``z <= 0``.

    Equivalent to the Laguerre function ``L_{-a}(z)``.
    """
    return kummer_tail(a, z, 0)


# ---------------------------------------------------------------------------
# Extended incomplete Gamma function
# ---------------------------------------------------------------------------


def _eig_mode(alpha, b, beta):
    """Maximiser of ``alpha v - e^v - b e^{-beta v}`` by bisection."""
    pos_b = b > 0
    hi = np.log(np.abs(alpha) + b * beta + 2.0)
    with np.errstate(divide="ignore"):
        lo_b = np.minimum(0.0, np.log(b * beta / (np.abs(alpha) + 2.0)) / beta)
    lo_free = np.where(alpha > 0, np.log(np.where(alpha > 0, alpha, 1.0)) - 1.0, -745.0)
    lo = np.where(pos_b, lo_b, lo_free)
    lo = np.minimum(lo, hi - 1.0)

    def slope(v):
        return alpha - np.exp(v) + b * beta * np.exp(-beta * v)

    for _ in range(80):
        mid = 0.5 * (lo + hi)
        up = slope(mid) > 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    return 0.5 * (lo + hi)


def log_extended_incomplete_gamma(alpha, x, b, beta):
    """Log of :func:`extended_incomplete_gamma`."""
    alpha, x, b, beta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (alpha, x, b, beta)))
    shape = alpha.shape
    alpha, x, b, beta = (np.atleast_1d(v).ravel() for v in (alpha, x, b, beta))
    if np.any(~(x >= 0)) or np.any(~(b >= 0)) or np.any(~(beta > 0)):
        raise DomainError("extended_incomplete_gamma requires x >= 0, b >= 0, beta > 0")
    if np.any((b == 0) & (x == 0) & (alpha <= 0)):
        raise DomainError("extended_incomplete_gamma diverges for b = 0, x = 0, alpha <= 0")

    out = np.empty(alpha.shape)
    complete = (b == 0) & (x == 0)
    for i in np.flatnonzero(complete):
        out[i] = math.lgamma(alpha[i])
    rest = ~complete
    if rest.any():
        al, xr, br, be = alpha[rest], x[rest], b[rest], beta[rest]
        mode = _eig_mode(al, br, be)
        with np.errstate(divide="ignore"):
            lower = np.where(xr > 0, np.log(np.where(xr > 0, xr, 1.0)), -np.inf)
        clamped = np.maximum(mode, lower)
        curvature = np.exp(clamped) + br * be**2 * np.exp(-be * clamped)

        def logf(v):
            with np.errstate(over="ignore"):
                return al[:, None] * v - np.exp(v) - br[:, None] * np.exp(-be[:, None] * v)

        out[rest] = log_concave_integral(logf, mode, curvature, lower=lower)
    return out.reshape(shape) if shape else out[0]


def extended_incomplete_gamma(alpha, x, b, beta):
    """Extended incomplete Gamma ``int_x^inf t^(alpha-1) exp(-t - b t^-beta) dt``.

    The substitution ``t = e^v`` turns the integrand into ``exp`` of a
    concave function of ``v``, which is integrated by
    :func:`afhos._quad.log_concave_integral`.
    """
    val = np.exp(log_extended_incomplete_gamma(alpha, x, b, beta))
    return float(val) if np.ndim(val) == 0 else val
