"""Capacity moments ``mu_n = E[log^n(1 + gamma_end)]`` from reciprocal MGFs.

Every moment is the single integral ``int_0^inf Z_n(s) (M(s) - M'(s)) ds``
of the kernel against the end-to-end reciprocal MGF.  It is evaluated on
``s = exp(u)`` with :func:`afhos._quad.adaptive_trapezoid`, so ``s = 0`` is
never touched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._quad import adaptive_trapezoid
from .aux_z import MAX_ORDER, GlConfig, z_kernel
from .errors import ConvergenceError, DomainError, InconsistencyError
from .fading import LinkConfig, _call_vectorized, link_mgf_product


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_refinements: int = 20

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if not self.abs_tol >= 0:
            raise DomainError("abs_tol must be non-negative")
        if not (isinstance(self.max_refinements, (int, np.integer)) and self.max_refinements >= 1):
            raise DomainError("max_refinements must be an integer >= 1")


@dataclass(frozen=True)
class HosResult:
    """One capacity moment in nats^order with its quadrature error estimate."""

    order: int
    value: float
    err_estimate: float


def _check_order(n):
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= MAX_ORDER):
        raise DomainError(f"order must be an integer in 0..{MAX_ORDER}, got {n}")


def _integrate(end_pair: Callable, n: int, qcfg, glcfg, kernel) -> HosResult:
    qcfg = qcfg or QuadratureConfig()
    glcfg = glcfg or GlConfig()

    def integrand(u):
        s = np.exp(u)
        m, dm = end_pair(s)
        return s * z_kernel(n, s, glcfg, kernel) * (m - dm)

    res = adaptive_trapezoid(integrand, qcfg.rel_tol, qcfg.abs_tol, qcfg.max_refinements)
    value, err = res.value, res.err_estimate
    if value < 0:
        # tiny negative moments are rounding noise around zero
        if -value > max(err, qcfg.abs_tol):
            raise InconsistencyError(f"negative capacity moment mu_{n} = {value!r}")
        value = 0.0
    result = HosResult(n, value, err)
    if not res.converged:
        raise ConvergenceError(
            f"mu_{n} did not converge after {res.levels} refinements "
            f"(value {value!r}, error estimate {err:.3e})",
            partial=result,
        )
    return result


def hos_moment(
    link: LinkConfig,
    n: int,
    qcfg: QuadratureConfig | None = None,
    glcfg: GlConfig | None = None,
    kernel: str = "auto",
) -> HosResult:
    """Capacity moment of order ``n`` for a link of independent hops.

    Parameters
    ----------
    link : LinkConfig
    n : int
        Moment order, 0 to 4.
    qcfg, glcfg : optional
        Quadrature tolerances and kernel settings.
    kernel : {"auto", "gl"}
        ``"gl"`` forces the Grünwald-Letnikov kernel also for ``n = 1``.

    Raises
    ------
    ConvergenceError
        If the quadrature misses its tolerance; ``partial`` holds the estimate.
    """
    _check_order(n)
    return _integrate(lambda s: link_mgf_product(link, s), n, qcfg, glcfg, kernel)


def hos_moment_custom_end(
    mgf_end: Callable,
    mgf_end_deriv: Callable,
    n: int,
    qcfg: QuadratureConfig | None = None,
    glcfg: GlConfig | None = None,
    kernel: str = "auto",
) -> HosResult:
    """Capacity moment from a caller-supplied end-to-end reciprocal MGF.

    Useful when the hops are correlated and only the joint MGF is known.
    Scalar-only callables are accepted and looped.
    """
    _check_order(n)
    at_zero = float(_call_vectorized(mgf_end, np.zeros(1))[0])
    if not abs(at_zero - 1.0) <= 1e-8:
        raise DomainError(f"end-to-end reciprocal MGF must equal 1 at s = 0, got {at_zero}")

    def pair(s):
        return _call_vectorized(mgf_end, s), _call_vectorized(mgf_end_deriv, s)

    return _integrate(pair, n, qcfg, glcfg, kernel)


def ergodic_capacity(link: LinkConfig, qcfg: QuadratureConfig | None = None) -> HosResult:
    """Mean capacity in nats, always through the closed-form first-order kernel."""
    return hos_moment(link, 1, qcfg, kernel="auto")
