"""Fused performance of the n-out-of-K vote under reporting errors.

The fusion center declares the primary user active when at least ``n`` of the
``K`` received bits are 1. Received bits are the radios' hard decisions
passed through the symmetric flip channel, so both fused error probabilities
are binomial tail sums in the post-flip bit probabilities. Sums are evaluated
term by term in the log domain and compensated, which keeps full relative
accuracy even for the tiny asymptotic floors at high reporting SNR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .mathx import Probability, as_probability, log_binomial
from .reporting import flip_composition

__all__ = [
    "FusionConfig",
    "PerfPoint",
    "fused_qf",
    "fused_qm",
    "asymptotic_qf",
    "asymptotic_qm",
    "enumerate_rule",
]

ENUMERATION_MAX_RADIOS = 20


@dataclass(frozen=True)
class FusionConfig:
    """Vote rule: declare the band occupied when >= vote_threshold_n of the
    num_radios_k received bits are 1."""

    num_radios_k: int
    vote_threshold_n: int

    def __post_init__(self):
        k, n = self.num_radios_k, self.vote_threshold_n
        if not isinstance(k, int) or k < 1:
            raise ValueError(f"num_radios_k must be a positive integer, got {k!r}")
        if not isinstance(n, int) or not 1 <= n <= k:
            raise ValueError(f"vote_threshold_n must satisfy 1 <= n <= {k}, got {n!r}")


@dataclass(frozen=True)
class PerfPoint:
    """A fused (false alarm, miss detection) operating point.

    Analytical points carry no sampling error; empirical points carry the
    per-hypothesis trial counts they were estimated from (at least one trial
    in total) and binomial standard errors sqrt(p*(1-p)/N).
    """

    qf: Probability
    qm: Probability
    kind: str  # "analytical" or "empirical"
    qf_stderr: float = 0.0
    qm_stderr: float = 0.0
    trials_h0: Optional[int] = None
    trials_h1: Optional[int] = None

    def __post_init__(self):
        Probability(self.qf)
        Probability(self.qm)
        if self.kind == "analytical":
            if self.qf_stderr != 0.0 or self.qm_stderr != 0.0:
                raise ValueError("analytical points have zero standard errors")
            if self.trials_h0 is not None or self.trials_h1 is not None:
                raise ValueError("analytical points carry no trial counts")
        elif self.kind == "empirical":
            if self.trials_h0 is None or self.trials_h1 is None:
                raise ValueError("empirical points must carry trial counts")
            if self.trials_h0 < 0 or self.trials_h1 < 0 or self.trials_h0 + self.trials_h1 < 1:
                raise ValueError("empirical points need at least one trial")
            if self.qf_stderr < 0.0 or self.qm_stderr < 0.0:
                raise ValueError("standard errors must be nonnegative")
        else:
            raise ValueError(f"kind must be 'analytical' or 'empirical', got {self.kind!r}")


def _binomial_sum(k: int, j_lo: int, j_hi: int, p_one: float, p_zero: float) -> Probability:
    """Sum of C(k, j) * p_one^j * p_zero^(k-j) over j in [j_lo, j_hi].

    ``p_one`` and ``p_zero`` are passed separately (both computed directly,
    never as 1 - x) so tiny tails keep their relative accuracy. Terms are
    assembled in the log domain and added with compensated summation.
    """
    terms = []
    for j in range(j_lo, j_hi + 1):
        if (p_one == 0.0 and j > 0) or (p_zero == 0.0 and j < k):
            continue
        t = log_binomial(k, j)
        if j > 0:
            t += j * math.log(p_one)
        if j < k:
            t += (k - j) * math.log(p_zero)
        terms.append(math.exp(t))
    return as_probability(math.fsum(terms))


def fused_qf(cfg: FusionConfig, pf, pe) -> Probability:
    """Overall false alarm: Pr{>= n received bits are 1} under the idle band.

    Each received bit is 1 with probability pf*(1-pe) + (1-pf)*pe.
    """
    pf = Probability(pf)
    pe = Probability(pe)
    one = flip_composition(pf, pe)
    zero = flip_composition(Probability(1.0 - pf), pe)
    k, n = cfg.num_radios_k, cfg.vote_threshold_n
    return _binomial_sum(k, n, k, one, zero)


def fused_qm(cfg: FusionConfig, pm, pe) -> Probability:
    """Overall miss detection: Pr{<= n-1 received bits are 1} under an active PU.

    Each received bit is 1 with probability (1-pm)*(1-pe) + pm*pe.
    """
    pm = Probability(pm)
    pe = Probability(pe)
    one = flip_composition(Probability(1.0 - pm), pe)
    zero = flip_composition(pm, pe)
    k, n = cfg.num_radios_k, cfg.vote_threshold_n
    return _binomial_sum(k, 0, n - 1, one, zero)


def asymptotic_qf(cfg: FusionConfig, pe) -> Probability:
    """False alarm floor as the local detector becomes perfect (pf -> 0).

    Residual false alarms are caused purely by report bit flips; strictly
    decreasing in n. Equal to fused_qf at pf = 0 by construction.
    """
    pe = Probability(pe)
    k, n = cfg.num_radios_k, cfg.vote_threshold_n
    return _binomial_sum(k, n, k, pe, Probability(1.0 - pe))


def asymptotic_qm(cfg: FusionConfig, pe) -> Probability:
    """Miss detection floor as the local detector becomes perfect (pm -> 0).

    Strictly increasing in n. Equal to fused_qm at pm = 0 by construction.
    """
    pe = Probability(pe)
    k, n = cfg.num_radios_k, cfg.vote_threshold_n
    return _binomial_sum(k, 0, n - 1, Probability(1.0 - pe), pe)


def enumerate_rule(cfg: FusionConfig, p_assert, pe) -> Probability:
    """Exhaustive-enumeration oracle for the vote probabilities.

    Walks every possible received bit vector, weighting each by its exact
    per-bit probability, and accumulates the mass of vectors with at least n
    ones. Each radio independently asserts 1 with probability ``p_assert``
    and each transmitted bit flips with probability ``pe``. Exact up to
    floating-point summation; limited to K <= 20 (2^K vectors).
    """
    k, n = cfg.num_radios_k, cfg.vote_threshold_n
    if k > ENUMERATION_MAX_RADIOS:
        raise ValueError(f"exhaustive enumeration is limited to K <= {ENUMERATION_MAX_RADIOS}, got {k}")
    p = float(Probability(p_assert))
    e = float(Probability(pe))
    one = p * (1.0 - e) + (1.0 - p) * e
    zero = (1.0 - p) * (1.0 - e) + p * e
    total = math.fsum(
        one ** mask.bit_count() * zero ** (k - mask.bit_count())
        for mask in range(1 << k)
        if mask.bit_count() >= n
    )
    return as_probability(total)
