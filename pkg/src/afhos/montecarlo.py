"""Monte-Carlo estimates of the capacity moments.

Samples are drawn from counter-based Philox streams spawned from one seed,
so each stream is independent and a run is reproducible bit for bit.
Per-stream statistics are merged in stream order with the pairwise
mean/variance update, which keeps the result independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .aux_z import MAX_ORDER
from .errors import DomainError, UnsupportedModelError
from .fading import CustomHop, GammaHop, GeneralizedGammaHop, HopModel, LinkConfig

CHUNK = 1 << 18


@dataclass(frozen=True)
class McConfig:
    num_samples: int
    seed: int = 0
    num_streams: int = 1

    def __post_init__(self):
        if not (isinstance(self.num_samples, (int, np.integer)) and self.num_samples >= 1):
            raise DomainError("num_samples must be an integer >= 1")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise DomainError("seed must be an unsigned 64-bit integer")
        if not (isinstance(self.num_streams, (int, np.integer)) and self.num_streams >= 1):
            raise DomainError("num_streams must be an integer >= 1")


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error ``sample_std / sqrt(n_used)``."""

    mean: float
    std_error: float
    n_used: int


def stream_generators(cfg: McConfig) -> list[np.random.Generator]:
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.num_streams)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def sample_hop_snr(hop: HopModel, rng: np.random.Generator, size=None):
    """Draw instantaneous SNRs of one hop.

    Gamma hops are ``(gamma_bar / m) G`` and Generalized Gamma hops
    ``(gamma_bar / beta) G**(1 / xi)`` with ``G ~ Gamma(m, 1)``.  Custom hops
    need a ``sampler``.
    """
    if isinstance(hop, GammaHop):
        return (hop.gamma_bar / hop.m) * rng.standard_gamma(hop.m, size)
    if isinstance(hop, GeneralizedGammaHop):
        return (hop.gamma_bar / hop.beta) * rng.standard_gamma(hop.m, size) ** (1.0 / hop.xi)
    if isinstance(hop, CustomHop) and hop.sampler is not None:
        out = np.asarray(hop.sampler(rng, 1 if size is None else size), dtype=float)
        return float(out[0]) if size is None else out
    raise UnsupportedModelError("this hop has no sampler; only its MGF is known")


def sample_end_to_end(link: LinkConfig, rng: np.random.Generator, size=None):
    """Harmonic-sum end-to-end SNR ``1 / sum_l 1/gamma_l`` from fresh hop draws."""
    draws = [sample_hop_snr(hop, rng, size) for hop in link.hops]
    if len(draws) == 1:
        return draws[0]
    inv = sum(1.0 / np.asarray(d) for d in draws)
    out = 1.0 / inv
    return float(out) if size is None else out


class _Stats:
    """Running count, mean and centred sum of squares for several columns."""

    def __init__(self, width: int):
        self.count = 0
        self.mean = np.zeros(width)
        self.m2 = np.zeros(width)

    def merge(self, count, mean, m2):
        if count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = count, mean, m2
            return
        total = self.count + count
        delta = mean - self.mean
        self.mean = self.mean + delta * (count / total)
        self.m2 = self.m2 + m2 + delta * delta * (self.count * count / total)
        self.count = total

    def add_block(self, values: np.ndarray):
        # shift by the first row so constant columns give exact means and m2 = 0
        ref = values[0]
        shifted = values - ref
        mean = shifted.mean(axis=0)
        m2 = ((shifted - mean) ** 2).sum(axis=0)
        self.merge(values.shape[0], ref + mean, m2)


def _stream_counts(cfg: McConfig) -> list[int]:
    base, extra = divmod(cfg.num_samples, cfg.num_streams)
    return [base + (1 if i < extra else 0) for i in range(cfg.num_streams)]


def mc_hos_orders(link: LinkConfig, orders: Iterable[int], cfg: McConfig) -> dict[int, McEstimate]:
    """Estimate several moment orders from one shared set of draws."""
    orders = list(orders)
    for n in orders:
        if not (isinstance(n, (int, np.integer)) and 0 <= n <= MAX_ORDER):
            raise DomainError(f"order must be an integer in 0..{MAX_ORDER}, got {n}")
    powers = np.array(orders, dtype=float)
    total = _Stats(len(orders))
    for rng, count in zip(stream_generators(cfg), _stream_counts(cfg)):
        stream = _Stats(len(orders))
        done = 0
        while done < count:
            size = min(CHUNK, count - done)
            cap = np.log1p(sample_end_to_end(link, rng, size))
            stream.add_block(cap[:, None] ** powers[None, :])
            done += size
        total.merge(stream.count, stream.mean, stream.m2)

    out = {}
    for i, n in enumerate(orders):
        if total.count > 1:
            se = math.sqrt(total.m2[i] / (total.count - 1) / total.count)
        else:
            se = math.inf
        out[n] = McEstimate(float(total.mean[i]), se, total.count)
    return out


def mc_hos(link: LinkConfig, n: int, cfg: McConfig) -> McEstimate:
    """Monte-Carlo estimate of ``E[log^n(1 + gamma_end)]``."""
    return mc_hos_orders(link, [n], cfg)[n]


def empirical_moments(link: LinkConfig, cfg: McConfig, orders: Sequence[int] = (1, 2, 3, 4)) -> list[float]:
    """Plain sample means of the requested raw capacity moments."""
    est = mc_hos_orders(link, orders, cfg)
    return [est[n].mean for n in orders]
