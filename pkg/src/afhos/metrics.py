"""Dispersion and shape metrics built from the raw capacity moments."""

from __future__ import annotations

from dataclasses import dataclass

from .aux_z import GlConfig
from .capacity import QuadratureConfig, ergodic_capacity, hos_moment
from .errors import DegenerateVarianceError, DomainError, InconsistencyError
from .fading import LinkConfig

VARIANCE_CLAMP = 1e-10
VARIANCE_FAIL = 1e-6


def variance(mu1: float, mu2: float) -> float:
    """``mu2 - mu1**2``.

    Values in ``[-1e-10, 0)`` are rounding noise and clamp to 0.  Anything
    below ``-1e-6`` means the moments are inconsistent and raises
    :class:`InconsistencyError`; the band in between is returned unchanged.
    """
    if mu1 < 0 or mu2 < 0:
        raise DomainError("capacity moments are non-negative")
    var = mu2 - mu1 * mu1
    if var < -VARIANCE_FAIL:
        raise InconsistencyError(f"negative variance {var!r}; moments are inconsistent")
    if -VARIANCE_CLAMP <= var < 0:
        return 0.0
    return var


def aod(mu1: float, mu2: float) -> float:
    """Amount of dispersion ``mu2 / mu1 - mu1``."""
    if not mu1 > 0:
        raise DomainError("amount of dispersion needs a positive ergodic capacity")
    return variance(mu1, mu2) / mu1


def reliability(aod_value: float) -> float:
    """Reliability percentage ``100 - 100 * AoD``."""
    if aod_value < 0:
        raise DomainError("AoD is non-negative")
    return 100.0 - 100.0 * aod_value


def _spread(mu1, mu2, tol):
    var = mu2 - mu1 * mu1
    if not var > tol:
        raise DegenerateVarianceError(f"variance {var!r} is too small for a standardized moment")
    return var


def skewness_paper(mu1: float, mu2: float, mu3: float, tol: float = VARIANCE_CLAMP) -> float:
    """``(mu3 - mu1**3) / (mu2 - mu1**2)**1.5`` (no central-moment cross terms)."""
    return (mu3 - mu1**3) / _spread(mu1, mu2, tol) ** 1.5


def kurtosis_paper(mu1: float, mu2: float, mu4: float, tol: float = VARIANCE_CLAMP) -> float:
    """``(mu4 - mu1**4) / (mu2 - mu1**2)**2`` (no central-moment cross terms)."""
    return (mu4 - mu1**4) / _spread(mu1, mu2, tol) ** 2


def central_skewness(mu1: float, mu2: float, mu3: float, tol: float = VARIANCE_CLAMP) -> float:
    """Standardized third central moment ``E[(C - mu1)^3] / sigma^3``."""
    var = _spread(mu1, mu2, tol)
    return (mu3 - 3.0 * mu1 * mu2 + 2.0 * mu1**3) / var**1.5


def central_kurtosis(mu1: float, mu2: float, mu3: float, mu4: float, tol: float = VARIANCE_CLAMP) -> float:
    """Standardized fourth central moment ``E[(C - mu1)^4] / sigma^4``."""
    var = _spread(mu1, mu2, tol)
    return (mu4 - 4.0 * mu1 * mu3 + 6.0 * mu1**2 * mu2 - 3.0 * mu1**4) / var**2


@dataclass(frozen=True)
class CapacityMetrics:
    ergodic: float
    variance: float
    aod: float
    reliability_pct: float
    skewness: float
    kurtosis: float


def metrics_from_moments(mu1: float, mu2: float, mu3: float, mu4: float) -> CapacityMetrics:
    """Bundle the metrics; skewness and kurtosis use the uncentred forms."""
    a = aod(mu1, mu2)
    return CapacityMetrics(
        ergodic=mu1,
        variance=variance(mu1, mu2),
        aod=a,
        reliability_pct=reliability(a),
        skewness=skewness_paper(mu1, mu2, mu3),
        kurtosis=kurtosis_paper(mu1, mu2, mu4),
    )


def capacity_metrics(
    link: LinkConfig,
    qcfg: QuadratureConfig | None = None,
    glcfg: GlConfig | None = None,
) -> CapacityMetrics:
    """Compute ``mu_1..mu_4`` for ``link`` and derive every metric."""
    mu = [ergodic_capacity(link, qcfg).value] + [hos_moment(link, n, qcfg, glcfg).value for n in (2, 3, 4)]
    return metrics_from_moments(*mu)
