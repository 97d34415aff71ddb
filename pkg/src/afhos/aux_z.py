"""The capacity kernel ``Z_n(s) = (-1)^n d^n/da^n 1F1[1+a; 1; -s] |_{a=0}``.

Three independent routes are provided:

* closed forms for ``n = 0`` (``exp(-s)``) and ``n = 1``
  (``exp(-s) (Ei(s) - gamma - ln s)``),
* the symmetric Grünwald-Letnikov difference of Laguerre functions
  :func:`z_gl`, optionally Richardson-extrapolated,
* :func:`z_series_oracle`, which differentiates the Kummer-transformed
  series term by term with polygamma values.

``Z_n`` is entire in ``s`` with ``Z_n(s) = O(s^n)`` at the origin and
``Z_n(s) ~ n log(s)^(n-1) / s`` for large ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._quad import adaptive_trapezoid
from .errors import DomainError, OracleRangeError
from .special_functions import _Neumaier, ei_minus_log_scaled, kummer_1f1_b1, kummer_tail, polygamma

MAX_ORDER = 4
SERIES_ORACLE_MAX_S = 60.0


@dataclass(frozen=True)
class GlConfig:
    """Settings for the Grünwald-Letnikov kernel.

    ``richardson`` combines the steps ``delta`` and ``delta / 2`` to cancel the
    leading ``O(delta^2)`` error; :func:`z_gl` itself always evaluates the
    plain difference.
    """

    order: int = 1
    delta: float = 0.01
    richardson: bool = True

    def __post_init__(self):
        if not (isinstance(self.order, (int, np.integer)) and 0 <= self.order <= MAX_ORDER):
            raise DomainError(f"order must be an integer in 0..{MAX_ORDER}, got {self.order}")
        if not 0 < self.delta <= 2.0 / max(self.order, 1):
            raise DomainError(f"delta must lie in (0, {2.0 / max(self.order, 1)}], got {self.delta}")

    def with_order(self, n: int) -> "GlConfig":
        return replace(self, order=n)


def _as_s(s, strictly_positive: bool = False):
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    bad = ~(arr > 0) if strictly_positive else ~(arr >= 0)
    if np.any(bad):
        raise DomainError(f"s must be {'> 0' if strictly_positive else '>= 0'}")
    return arr, scalar


def _ret(out, scalar):
    return float(out[0]) if scalar else out


def z_order0(s):
    """``Z_0(s) = 1F1[1; 1; -s] = exp(-s)``."""
    arr, scalar = _as_s(s)
    return _ret(np.exp(-arr), scalar)


def z1_closed(s):
    """``Z_1(s) = -exp(-s) (gamma - Ei(s) + ln s)`` for ``s > 0``."""
    arr, scalar = _as_s(s, strictly_positive=True)
    return _ret(ei_minus_log_scaled(arr), scalar)


def z_gl(cfg: GlConfig, s):
    """Grünwald-Letnikov approximation of ``Z_n`` with step ``cfg.delta``.

    ``sum_k (-1)^k C(n,k) / (2 delta^n) {L_{-1-k delta}(-s) + (-1)^n L_{-1+k delta}(-s)}``
    with ``L_{-1-a}(-s) = 1F1[1+a; 1; -s]``.  Kummer-series terms of degree
    below ``n`` in ``a`` cancel exactly under the difference and are left out
    before summing, which keeps the result accurate where ``Z_n`` is small.
    """
    arr, scalar = _as_s(s)
    n, d = cfg.order, cfg.delta
    if n == 0:
        return _ret(kummer_1f1_b1(1.0, -arr), scalar)
    acc = _Neumaier(arr.shape)
    scale = 1.0 / (2.0 * d**n)
    sign_n = -1.0 if n % 2 else 1.0
    for k in range(n + 1):
        w = (-1.0) ** k * math.comb(n, k) * scale
        acc.add(w * kummer_tail(1.0 + k * d, -arr, start=n))
        acc.add(w * sign_n * kummer_tail(1.0 - k * d, -arr, start=n))
    return _ret(acc.value, scalar)


def z_gl_extrapolated(cfg: GlConfig, s):
    """Richardson combination ``(4 Z(delta/2) - Z(delta)) / 3`` of :func:`z_gl`."""
    coarse = np.asarray(z_gl(cfg, s))
    fine = np.asarray(z_gl(replace(cfg, delta=0.5 * cfg.delta), s))
    out = (4.0 * fine - coarse) / 3.0
    return float(out) if out.ndim == 0 else out


def _bell_complete(g: list[np.ndarray], j: int, shape) -> np.ndarray:
    """Complete Bell polynomial ``Y_j(g_1, ..., g_j)`` (``g[i]`` holds ``g_{i+1}``)."""
    y = [np.ones(shape)]
    for m in range(j):
        total = np.zeros_like(y[0])
        for i in range(m + 1):
            total = total + math.comb(m, i) * y[m - i] * g[i]
        y.append(total)
    return y[j]


def z_series_oracle(n: int, s):
    """Reference value of ``Z_n(s)`` for ``n`` in 0..4 and ``0 <= s <= 60``.

    Uses ``1F1[1+a;1;-s] = exp(-s) sum_k (-a)_k s^k / (k!)^2`` and
    ``(-a)_k = -a (1-a)_{k-1}``; derivatives of ``(1-a)_{k-1}`` at ``a = 0``
    follow from the log-derivatives ``(-1)^i [psi^(i-1)(k) - psi^(i-1)(1)]``
    through complete Bell polynomials.  All terms share one sign, so the
    sum is well conditioned.
    """
    if n not in range(MAX_ORDER + 1):
        raise DomainError(f"order must be in 0..{MAX_ORDER}, got {n}")
    arr, scalar = _as_s(s)
    if np.any(arr > SERIES_ORACLE_MAX_S):
        raise OracleRangeError(f"series oracle supports 0 <= s <= {SERIES_ORACLE_MAX_S}")
    if n == 0:
        return _ret(np.exp(-arr), scalar)

    smax = float(arr.max(initial=0.0))
    kmax = int(math.ceil(smax + 12.0 * math.sqrt(smax) + 60))
    k = np.arange(1, kmax + 1, dtype=float)
    g = [(-1.0) ** i * (polygamma(i - 1, k) - polygamma(i - 1, 1.0)) for i in range(1, n)]
    bell = _bell_complete(g, n - 1, k.shape)
    bell[k < n] = 0.0  # (1-a)_{k-1} has degree k-1 < n-1: exact zero
    log_k_fact = np.array([math.lgamma(v + 1.0) for v in k])

    out = np.zeros_like(arr)
    pos = arr > 0
    if pos.any():
        sp = arr[pos][:, None]
        expo = k[None, :] * np.log(sp) - log_k_fact[None, :] - sp
        out[pos] = (bell[None, :] / k[None, :] * np.exp(expo)).sum(axis=1)
    out *= (-1.0) ** (n + 1) * n
    return _ret(out, scalar)


def z_kernel(n: int, s, cfg: GlConfig | None = None, route: str = "auto"):
    """``Z_n(s)`` as used by the capacity engine.

    ``route="auto"`` uses the closed forms for ``n <= 1`` and the
    Grünwald-Letnikov kernel otherwise; ``route="gl"`` forces the
    Grünwald-Letnikov kernel for every ``n >= 1``.  Richardson
    extrapolation is applied when ``cfg.richardson`` is set.
    """
    if n not in range(MAX_ORDER + 1):
        raise DomainError(f"order must be in 0..{MAX_ORDER}, got {n}")
    if route not in ("auto", "gl"):
        raise DomainError(f"unknown kernel route {route!r}")
    if n == 0:
        return z_order0(s)
    if n == 1 and route == "auto":
        return z1_closed(s)
    cfg = (cfg or GlConfig()).with_order(n)
    return z_gl_extrapolated(cfg, s) if cfg.richardson else z_gl(cfg, s)


def kernel_identity_check(gamma: float) -> float:
    """Numerically integrate ``int_0^inf exp(-gamma u) 1F1[1; 1; -u] du``.

    The result should equal ``1 / (1 + gamma)``.
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")

    def integrand(t):
        u = np.exp(t)
        return u * np.exp(-gamma * u) * kummer_1f1_b1(1.0, -u)

    return adaptive_trapezoid(integrand, rel_tol=1e-12, abs_tol=1e-15, max_refinements=12).value
