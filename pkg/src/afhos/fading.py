"""Per-hop fading models and their reciprocal MGFs.

The capacity engine only ever needs ``M(s) = E[exp(-s / gamma)]`` and its
first derivative for each hop.  Two closed-form families are provided
(Gamma / Nakagami-m and Generalized Gamma); anything else can be plugged in
as a :class:`CustomHop`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DomainError
from .special_functions import log_bessel_k, log_extended_incomplete_gamma, log_gamma

_LOG2 = math.log(2.0)


def _as_s(s, strictly_positive=False):
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(~(arr > 0) if strictly_positive else ~(arr >= 0)):
        raise DomainError(f"s must be {'> 0' if strictly_positive else '>= 0'}")
    return arr, scalar


def _ret(out, scalar):
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class GammaHop:
    """Gamma-distributed SNR (Nakagami-m amplitude), fading figure ``m >= 1/2``."""

    m: float
    gamma_bar: float

    def __post_init__(self):
        if not self.m >= 0.5:
            raise DomainError(f"Gamma fading needs m >= 1/2, got {self.m}")
        if not self.gamma_bar > 0:
            raise DomainError(f"average SNR must be positive, got {self.gamma_bar}")

    def mgf(self, s):
        arr, scalar = _as_s(s)
        out = np.ones_like(arr)
        pos = arr > 0
        if pos.any():
            c = self.m * arr[pos] / self.gamma_bar
            log_m = _LOG2 - log_gamma(self.m) + 0.5 * self.m * np.log(c) + log_bessel_k(self.m, 2.0 * np.sqrt(c))
            out[pos] = np.exp(log_m)
        return _ret(out, scalar)

    def mgf_deriv(self, s):
        # d/dz [z^nu K_nu(z)] = -z^nu K_{nu-1}(z)
        arr, scalar = _as_s(s, strictly_positive=True)
        m, g = self.m, self.gamma_bar
        c = m * arr / g
        log_d = (
            _LOG2
            - log_gamma(m)
            + 0.5 * (m + 1) * math.log(m / g)
            + 0.5 * (m - 1) * np.log(arr)
            + log_bessel_k(m - 1.0, 2.0 * np.sqrt(c))
        )
        return _ret(-np.exp(log_d), scalar)


@dataclass(frozen=True)
class GeneralizedGammaHop:
    """Generalized Gamma SNR with fading figure ``m``, shape ``xi`` and mean ``gamma_bar``."""

    m: float
    xi: float
    gamma_bar: float
    beta: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.m >= 0.5:
            raise DomainError(f"Generalized Gamma fading needs m >= 1/2, got {self.m}")
        if not self.xi > 0:
            raise DomainError(f"shape factor xi must be positive, got {self.xi}")
        if not self.gamma_bar > 0:
            raise DomainError(f"average SNR must be positive, got {self.gamma_bar}")
        beta = math.exp(log_gamma(self.m + 1.0 / self.xi) - log_gamma(self.m))
        object.__setattr__(self, "beta", beta)

    def mgf(self, s):
        arr, scalar = _as_s(s)
        b = self.beta * arr / self.gamma_bar
        log_m = log_extended_incomplete_gamma(self.m, 0.0, b, 1.0 / self.xi) - log_gamma(self.m)
        return _ret(np.exp(np.atleast_1d(log_m)), scalar)

    def mgf_deriv(self, s):
        arr, scalar = _as_s(s, strictly_positive=True)
        b = self.beta * arr / self.gamma_bar
        log_d = log_extended_incomplete_gamma(self.m - 1.0 / self.xi, 0.0, b, 1.0 / self.xi) - log_gamma(self.m)
        return _ret(-(self.beta / self.gamma_bar) * np.exp(np.atleast_1d(log_d)), scalar)


def _call_vectorized(fn: Callable, s: np.ndarray) -> np.ndarray:
    if s.size == 1:
        return np.full(s.shape, float(np.asarray(fn(float(s.reshape(-1)[0]))).reshape(-1)[0]))
    try:
        out = np.asarray(fn(s), dtype=float)
        if out.shape == s.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(float(v))) for v in s])


@dataclass(frozen=True)
class CustomHop:
    """Hop described only by a user-supplied reciprocal MGF and its derivative.

    ``sampler(rng, size)`` is optional and only needed for Monte-Carlo runs.
    Callables should accept numpy arrays; scalar-only callables are looped.
    """

    mgf_fn: Callable
    mgf_deriv_fn: Callable
    sampler: Callable | None = None

    def __post_init__(self):
        if not (callable(self.mgf_fn) and callable(self.mgf_deriv_fn)):
            raise DomainError("a custom hop needs both the MGF and its derivative")
        at_zero = float(_call_vectorized(self.mgf_fn, np.zeros(1))[0])
        if not abs(at_zero - 1.0) <= 1e-8:
            raise DomainError(f"a reciprocal MGF must equal 1 at s = 0, got {at_zero}")

    def mgf(self, s):
        arr, scalar = _as_s(s)
        return _ret(_call_vectorized(self.mgf_fn, arr), scalar)

    def mgf_deriv(self, s):
        arr, scalar = _as_s(s, strictly_positive=True)
        return _ret(_call_vectorized(self.mgf_deriv_fn, arr), scalar)


@dataclass(frozen=True)
class ExpMgf:
    """``exp(-s / gamma_bar)``: reciprocal MGF of a constant SNR."""

    gamma_bar: float

    def __call__(self, s):
        return np.exp(-np.asarray(s, dtype=float) / self.gamma_bar)


@dataclass(frozen=True)
class ExpMgfDeriv:
    gamma_bar: float

    def __call__(self, s):
        return -np.exp(-np.asarray(s, dtype=float) / self.gamma_bar) / self.gamma_bar


@dataclass(frozen=True)
class ConstantSampler:
    value: float

    def __call__(self, rng, size):
        return np.full(size, self.value)


def deterministic_hop(gamma_bar: float) -> CustomHop:
    """Non-fading hop with fixed SNR ``gamma_bar``."""
    if not gamma_bar > 0:
        raise DomainError(f"average SNR must be positive, got {gamma_bar}")
    return CustomHop(ExpMgf(gamma_bar), ExpMgfDeriv(gamma_bar), ConstantSampler(gamma_bar))


HopModel = Union[GammaHop, GeneralizedGammaHop, CustomHop]


@dataclass(frozen=True)
class LinkConfig:
    """Ordered, statistically independent hops of an AF multihop link."""

    hops: tuple

    def __init__(self, hops: Sequence[HopModel]):
        hops = tuple(hops)
        if not hops:
            raise DomainError("a link needs at least one hop")
        for hop in hops:
            if not isinstance(hop, (GammaHop, GeneralizedGammaHop, CustomHop)):
                raise DomainError(f"not a hop model: {hop!r}")
        object.__setattr__(self, "hops", hops)

    def __len__(self):
        return len(self.hops)

    @classmethod
    def repeat(cls, hop: HopModel, count: int) -> "LinkConfig":
        return cls([hop] * count)


def recip_mgf(hop: HopModel, s):
    """``E[exp(-s / gamma)]`` of one hop, ``s >= 0``."""
    return hop.mgf(s)


def recip_mgf_deriv(hop: HopModel, s):
    """``d/ds E[exp(-s / gamma)]`` of one hop, ``s > 0``."""
    return hop.mgf_deriv(s)


def _grouped(hops):
    groups: list[list] = []
    for hop in hops:
        for group in groups:
            if group[0] == hop:
                group[1] += 1
                break
        else:
            groups.append([hop, 1])
    return groups


def link_mgf_product(link: LinkConfig, s):
    """End-to-end reciprocal MGF and its derivative for independent hops.

    Returns ``(prod_l M_l(s), sum_l M_l'(s) prod_{k != l} M_k(s))``.
    Identical hops are evaluated once.
    """
    arr, scalar = _as_s(s, strictly_positive=True)
    groups = _grouped(link.hops)
    values = [(np.atleast_1d(hop.mgf(arr)), np.atleast_1d(hop.mgf_deriv(arr)), count) for hop, count in groups]
    total = np.ones_like(arr)
    for m, _, count in values:
        total = total * m**count
    deriv = np.zeros_like(arr)
    for i, (m, d, count) in enumerate(values):
        term = count * d * m ** (count - 1)
        for j, (other, _, other_count) in enumerate(values):
            if j != i:
                term = term * other**other_count
        deriv = deriv + term
    if scalar:
        return float(total[0]), float(deriv[0])
    return total, deriv
