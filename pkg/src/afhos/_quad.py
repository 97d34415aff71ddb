"""Trapezoid rules on the real line.

Two engines live here:

* :func:`log_concave_integral` integrates a *batch* of log-concave
  integrands ``exp(logf(v))`` over ``[lower, inf)``.  Each integrand is
  located by its mode, truncated where it has dropped by ``exp(-drop)`` and
  integrated with a nested tanh-sinh rule on the remaining window.
* :func:`adaptive_trapezoid` integrates one scalar integrand over the real
  line with outward scanning for the truncation points and step halving.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError

_DROP = 46.0  # exp(-46) ~ 1e-20 relative to the peak


def _safe(values: np.ndarray) -> np.ndarray:
    return np.where(np.isnan(values), -np.inf, values)


def _find_drop(logf, mode, peak, scale, direction, drop):
    """Distance from ``mode`` at which ``logf`` has fallen by ``drop``."""
    p = mode.shape[0]
    hi = scale.copy()
    need = np.ones(p, dtype=bool)
    for _ in range(200):
        vals = _safe(logf((mode + direction * hi)[:, None])[:, 0])
        need = peak - vals < drop
        if not need.any():
            break
        hi = np.where(need, 2.0 * hi, hi)
    lo = np.zeros(p)
    # a tight bracket is not needed, only a range that is not wastefully wide
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        vals = _safe(logf((mode + direction * mid)[:, None])[:, 0])
        above = peak - vals < drop
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return hi


def _tanh_sinh_nodes(h: float, offset: float, tau_max: float = 3.2):
    tau = np.arange(offset, tau_max, h)
    tau = np.concatenate([-tau[::-1], tau]) if offset > 0 else np.concatenate([-tau[:0:-1], tau])
    arg = 0.5 * np.pi * np.sinh(tau)
    return np.tanh(arg), 0.5 * np.pi * np.cosh(tau) / np.cosh(arg) ** 2


def log_concave_integral(
    logf: Callable[[np.ndarray], np.ndarray],
    mode: np.ndarray,
    curvature: np.ndarray,
    lower: np.ndarray | None = None,
    rel_tol: float = 1e-13,
    drop: float = _DROP,
    max_levels: int = 10,
) -> np.ndarray:
    """Return ``log(int_lower^inf exp(logf(v)) dv)`` for a batch of integrands.

    Every ``logf`` row must be concave, so the mass sits in one window around
    the (possibly clamped) mode.  The window is cut where the integrand has
    dropped by ``exp(-drop)`` and integrated with a nested tanh-sinh rule,
    which also copes with a finite, non-negligible ``lower`` endpoint.

    Parameters
    ----------
    logf : callable
        Maps an array of shape ``(P, N)`` to the log-integrand of the same
        shape; row ``i`` belongs to integrand ``i``.
    mode : ndarray, shape (P,)
        Location of each unconstrained maximum.
    curvature : ndarray, shape (P,)
        ``-logf''(mode)``; only sets the initial search scale.
    lower : ndarray, shape (P,), optional
        Lower integration limits; ``-inf`` or ``None`` for the whole line.
    """
    mode = np.asarray(mode, dtype=float)
    p = mode.shape[0]
    if p == 0:
        return np.empty(0)
    if lower is None:
        lower = np.full(p, -np.inf)
    mode = np.maximum(mode, lower)
    peak = logf(mode[:, None])[:, 0]
    scale = np.clip(1.0 / np.sqrt(np.maximum(curvature, 1e-300)), 1e-12, 1e6)
    left = np.maximum(mode - _find_drop(logf, mode, peak, scale, -1.0, drop), lower)
    right = mode + _find_drop(logf, mode, peak, scale, 1.0, drop)
    centre = 0.5 * (left + right)
    half = 0.5 * (right - left)

    def level_sum(h, offset):
        g, w = _tanh_sinh_nodes(h, offset)
        v = centre[:, None] + half[:, None] * g[None, :]
        return (w[None, :] * np.exp(_safe(logf(v)) - peak[:, None])).sum(axis=1)

    h = 0.25
    total = level_sum(h, 0.0)
    estimate = half * h * total
    for _ in range(max_levels):
        total = total + level_sum(h, 0.5 * h)
        h *= 0.5
        new = half * h * total
        change = np.abs(new - estimate) / np.abs(new)
        estimate = new
        if np.all(change <= rel_tol):
            break
    else:
        worst = float(np.max(change))
        if worst > 1e-8:
            raise ConvergenceError(f"tanh-sinh rule stalled (rel. change {worst:.2e})")
    return peak + np.log(estimate)


@dataclass(frozen=True)
class TrapezoidResult:
    value: float
    err_estimate: float
    converged: bool
    evaluations: int
    levels: int


def _scan(f, start: float, step: float, threshold_of, limit: float, chunk: int = 8):
    """Walk outward from ``start`` until three consecutive values are negligible."""
    us, vals = [], []
    quiet = 0
    k = 0
    while True:
        u = start + step * (k + np.arange(chunk))
        if np.abs(u[0]) > limit:
            break
        fu = np.asarray(f(u), dtype=float)
        us.append(u)
        vals.append(fu)
        stop = False
        peak = max(np.max(np.abs(v)) for v in vals)
        for value in fu:
            quiet = quiet + 1 if abs(value) <= threshold_of(peak) else 0
            if quiet >= 3:
                stop = True
                break
        if stop:
            break
        k += chunk
    return np.concatenate(us), np.concatenate(vals)


def adaptive_trapezoid(
    f: Callable[[np.ndarray], np.ndarray],
    rel_tol: float,
    abs_tol: float,
    max_refinements: int,
    h0: float = 1.0,
    tail_ratio: float = 1e-17,
    limit: float = 720.0,
    min_levels: int = 3,
) -> TrapezoidResult:
    """Integrate a vectorised ``f`` over the real line.

    Truncation points are found by stepping outward from 0 in steps of
    ``h0`` until three consecutive values fall below
    ``max(1e-3 * abs_tol, tail_ratio * max|f|)``.  The step is then halved
    until successive estimates agree to ``max(rel_tol * |I|, abs_tol)``.
    ``err_estimate`` is the last difference between levels.
    """

    def threshold(peak):
        return max(1e-3 * abs_tol, tail_ratio * peak)

    u_r, f_r = _scan(f, 0.0, h0, threshold, limit)
    u_l, f_l = _scan(f, -h0, -h0, threshold, limit)
    a, b = float(u_l[-1]), float(u_r[-1])
    base = np.concatenate([f_l, f_r])
    if not np.all(np.isfinite(base)):
        raise ConvergenceError("integrand is not finite on the scan grid")

    h = h0
    total = base.sum()  # endpoints are negligible by construction
    estimate = h * total
    evaluations = base.size
    err = np.inf
    converged = False
    level = 0
    n_intervals = int(round((b - a) / h0))
    for level in range(1, max_refinements + 1):
        # midpoints of the current grid, evaluated in bounded chunks
        count = n_intervals * 2 ** (level - 1)
        step = h
        added = 0.0
        for start in range(0, count, 1 << 16):
            idx = np.arange(start, min(count, start + (1 << 16)))
            vals = np.asarray(f(a + (idx + 0.5) * step), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise ConvergenceError("integrand is not finite on the refinement grid")
            added += vals.sum()
        evaluations += count
        total += added
        h *= 0.5
        new = h * total
        err = abs(new - estimate)
        estimate = new
        if level >= min_levels and err <= max(rel_tol * abs(estimate), abs_tol):
            converged = True
            break
    return TrapezoidResult(float(estimate), float(err), converged, evaluations, level)
