"""Analytical ROC curves, vote-rule crossovers, and adaptive rule selection.

With a perfect reporting channel the 1-out-of-K (OR) rule gives the lowest
fused false alarm at any miss level. Reporting errors put a floor under both
fused error probabilities, the floors move in opposite directions with n, and
consecutive rules' ROC curves cross: above some miss level the larger rule
wins. The selection rule here locates those crossovers and picks the vote
threshold from the target miss probability, then double-checks itself against
a direct constrained minimization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .fusion import FusionConfig, asymptotic_qf, asymptotic_qm, fused_qf, fused_qm
from .local_sensing import SensingParams, local_pd, local_pf, threshold_for_pf
from .mathx import Probability
from .reporting import ReportChannel

__all__ = [
    "RocCurve",
    "CrossoverTable",
    "OptimalRule",
    "NoCrossoverError",
    "InfeasibleTargetError",
    "operating_point",
    "analytic_roc",
    "qf_at_qm",
    "qm_star",
    "crossover_table",
    "optimal_n",
]

# Threshold sweep endpoints cover local false alarm from 1 - 1e-9 down to 1e-9.
_PF_SWEEP_HI = 1.0 - 1e-9
_PF_SWEEP_LO = 1e-9
_CROSSOVER_SCAN_POINTS = 400
# False-alarm differences below this are ties: the smaller (cheaper) rule wins.
# Keeps the vanishing-error channel in the OR-rule regime, where the larger
# rule's residual advantage is the sub-nano floor gap and of no practical value.
_QF_TIE_TOL = 1e-9


class NoCrossoverError(RuntimeError):
    """One vote rule dominates the other over the whole threshold sweep."""

    def __init__(self, n: int, dominant: int):
        super().__init__(f"no crossover between rules n={n} and n={n + 1}: rule n={dominant} dominates")
        self.n = n
        self.dominant = dominant


class InfeasibleTargetError(ValueError):
    """The target miss probability lies below every rule's floor."""

    def __init__(self, target_qm: float, min_achievable_qm: float):
        super().__init__(
            f"target_qm={target_qm:.6g} is infeasible: no vote rule achieves a miss "
            f"probability below {min_achievable_qm:.6g}"
        )
        self.target_qm = target_qm
        self.min_achievable_qm = min_achievable_qm


@dataclass(frozen=True)
class RocCurve:
    """Fused operating points swept over the detection threshold.

    ``points`` are (lambda, qf, qm) triples with strictly increasing lambda;
    qf is nonincreasing and qm nondecreasing along the sweep, and neither can
    fall below its reporting-error floor.
    """

    fusion: FusionConfig
    sensing: SensingParams  # threshold field is the sweep variable, ignored here
    channel: ReportChannel
    points: Tuple[Tuple[float, Probability, Probability], ...]
    qf_floor: Probability
    qm_floor: Probability

    def __post_init__(self):
        lams = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("curve points must have strictly increasing lambda")
        for (_, qf_a, qm_a), (_, qf_b, qm_b) in zip(self.points, self.points[1:]):
            if qf_b > qf_a + 1e-12:
                raise ValueError("qf must be nonincreasing along the sweep")
            if qm_b < qm_a - 1e-12:
                raise ValueError("qm must be nondecreasing along the sweep")
        for _, qf, qm in self.points:
            if qf < self.qf_floor - 1e-12:
                raise ValueError("qf fell below its asymptotic floor")
            if qm < self.qm_floor - 1e-12:
                raise ValueError("qm fell below its asymptotic floor")

    @property
    def lambdas(self) -> Tuple[float, ...]:
        return tuple(p[0] for p in self.points)

    @property
    def qf_values(self) -> Tuple[float, ...]:
        return tuple(p[1] for p in self.points)

    @property
    def qm_values(self) -> Tuple[float, ...]:
        return tuple(p[2] for p in self.points)


@dataclass(frozen=True)
class CrossoverTable:
    """Miss levels at which consecutive vote rules exchange superiority.

    entries[n] is the miss probability above which rule n+1 achieves a lower
    fused false alarm than rule n. math.inf marks a pair where rule n
    dominates everywhere (no crossover); a dominated rule n is recorded at
    the n+1 floor, the lowest miss level where rule n+1 exists at all.
    """

    num_radios_k: int
    entries: Dict[int, float]

    @property
    def is_monotone(self) -> bool:
        vals = [self.entries[n] for n in sorted(self.entries)]
        return all(b >= a for a, b in zip(vals, vals[1:]))


@dataclass(frozen=True)
class OptimalRule:
    """Outcome of the adaptive vote-threshold selection."""

    target_qm: float
    n: int
    interval_n: int
    direct_n: int
    agree: bool
    achieved_lambda: float  # inf when the miss constraint never binds
    achieved_qf: Probability
    achieved_qm: Probability
    table: CrossoverTable


def operating_point(fusion: FusionConfig, sensing: SensingParams, channel: ReportChannel,
                    threshold: float) -> Tuple[Probability, Probability]:
    """Fused (qf, qm) of one rule at one detection threshold."""
    p = replace(sensing, threshold_lambda=threshold)
    pe = channel.pe
    return fused_qf(fusion, local_pf(p), pe), fused_qm(fusion, Probability(1.0 - local_pd(p)), pe)


def analytic_roc(fusion: FusionConfig, sensing: SensingParams, channel: ReportChannel,
                 lambda_grid: Sequence[float]) -> RocCurve:
    """Closed-form ROC curve over a strictly increasing threshold grid."""
    grid = [float(v) for v in lambda_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda_grid must be a non-empty strictly increasing sequence")
    pe = channel.pe
    points = tuple((lam, *operating_point(fusion, sensing, channel, lam)) for lam in grid)
    return RocCurve(
        fusion=fusion,
        sensing=sensing,
        channel=channel,
        points=points,
        qf_floor=asymptotic_qf(fusion, pe),
        qm_floor=asymptotic_qm(fusion, pe),
    )


def qf_at_qm(curve: RocCurve, qm: float) -> float:
    """Linearly interpolated qf of a curve at a given miss level."""
    qms = np.asarray(curve.qm_values)
    qfs = np.asarray(curve.qf_values)
    if not curve.points or qm < qms[0] or qm > qms[-1]:
        raise ValueError(f"qm={qm!r} is outside the curve's swept range [{qms[0]}, {qms[-1]}]")
    return float(np.interp(qm, qms, qfs))


def _qm_of_lambda(fusion, sensing, channel, lam: float) -> float:
    p = replace(sensing, threshold_lambda=lam)
    return float(fused_qm(fusion, Probability(1.0 - local_pd(p)), channel.pe))


def _qf_of_lambda(fusion, sensing, channel, lam: float) -> float:
    p = replace(sensing, threshold_lambda=lam)
    return float(fused_qf(fusion, local_pf(p), channel.pe))


def _qm_loose_limit(fusion: FusionConfig, pe: Probability) -> float:
    # Supremum of the fused miss probability as the threshold grows without
    # bound: the local detector then never fires and only bit flips remain.
    return float(fused_qm(fusion, Probability(1.0), pe))


def _lambda_for_qm(fusion, sensing, channel, target: float) -> Optional[float]:
    """Largest threshold whose fused miss probability equals the target.

    Returns None when the target is at or above the loose-threshold limit, in
    which case every threshold satisfies the miss constraint.
    """
    lo = 0.0
    hi = threshold_for_pf(_PF_SWEEP_LO, sensing.samples_m)
    f = lambda lam: _qm_of_lambda(fusion, sensing, channel, lam) - target
    if f(lo) > 0.0:
        raise ValueError(f"target qm={target!r} is below the rule's floor")
    if target >= _qm_loose_limit(fusion, channel.pe):
        return None
    # Extend the bracket geometrically; the fused miss saturates exactly once
    # the local tail probabilities underflow, so this always terminates.
    for _ in range(200):
        if f(hi) >= 0.0:
            break
        hi *= 2.0
    else:
        return None
    return float(optimize.brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16, maxiter=200))


def qm_star(fusion: FusionConfig, sensing: SensingParams, channel: ReportChannel) -> Probability:
    """Miss level at which rules n and n+1 exchange superiority.

    Scans the miss range where both rules are feasible, comparing their fused
    false alarms at equal miss probability (each rule at its own threshold),
    and root-finds the first sign change. Raises :class:`NoCrossoverError`
    when one rule dominates throughout, which includes the perfect-channel
    limit (smaller rule wins) and the fully scrambled pe = 0.5 channel, where
    the comparison is a tie and the smaller rule is preferred.
    """
    k, n = fusion.num_radios_k, fusion.vote_threshold_n
    if n >= k:
        raise ValueError(f"crossover needs vote thresholds n and n+1 within K={k}, got n={n}")
    rule_a = fusion
    rule_b = replace(fusion, vote_threshold_n=n + 1)
    pe = channel.pe

    floor_b = float(asymptotic_qm(rule_b, pe))
    sup = _qm_loose_limit(rule_a, pe)  # rule n saturates first (limit grows with n)
    if not floor_b < sup:
        raise NoCrossoverError(n, dominant=n)
    lo = floor_b + (sup - floor_b) * 1e-9
    hi = sup - (sup - floor_b) * 1e-9

    def delta(q: float) -> float:
        la = _lambda_for_qm(rule_a, sensing, channel, q)
        lb = _lambda_for_qm(rule_b, sensing, channel, q)
        qa = _qf_of_lambda(rule_a, sensing, channel, la) if la is not None else float("nan")
        qb = _qf_of_lambda(rule_b, sensing, channel, lb) if lb is not None else float("nan")
        return qb - qa

    qs = [float(q) for q in np.geomspace(max(lo, 1e-300), hi, _CROSSOVER_SCAN_POINTS)]
    deltas = [delta(q) for q in qs]
    # a crossover only counts once the larger rule's advantage clears the tie
    # tolerance; sub-tie dips (vanishing-error channels, underflowed floors)
    # leave the smaller rule dominant
    first_adv = next((i for i, d in enumerate(deltas) if d < -_QF_TIE_TOL), None)
    if first_adv is None:
        raise NoCrossoverError(n, dominant=n)
    positives = [i for i in range(first_adv) if deltas[i] > 0.0]
    if not positives:
        raise NoCrossoverError(n, dominant=n + 1)  # ahead as soon as both rules exist
    bracket = (qs[positives[-1]], qs[first_adv])
    root = float(optimize.brentq(delta, *bracket, xtol=1e-15, rtol=8.9e-16, maxiter=200))
    return Probability(root)


def crossover_table(num_radios_k: int, sensing: SensingParams,
                    channel: ReportChannel) -> CrossoverTable:
    """Crossover miss levels for every consecutive rule pair 1..K-1."""
    entries: Dict[int, float] = {}
    pe = channel.pe
    for n in range(1, num_radios_k):
        rule = FusionConfig(num_radios_k=num_radios_k, vote_threshold_n=n)
        try:
            entries[n] = float(qm_star(rule, sensing, channel))
        except NoCrossoverError as err:
            if err.dominant == n:
                entries[n] = math.inf
            else:
                # Rule n+1 wins as soon as it is feasible at all.
                entries[n] = float(asymptotic_qm(replace(rule, vote_threshold_n=n + 1), pe))
    return CrossoverTable(num_radios_k=num_radios_k, entries=entries)


def _direct_search(num_radios_k: int, sensing, channel, target: float) -> Tuple[int, float, float, float]:
    """Constrained minimization: over rules and thresholds, the lowest fused
    false alarm subject to the fused miss staying at or below the target."""
    pe = channel.pe
    best = None
    for n in range(1, num_radios_k + 1):
        rule = FusionConfig(num_radios_k=num_radios_k, vote_threshold_n=n)
        if target < float(asymptotic_qm(rule, pe)):
            continue  # this rule cannot reach the target at any threshold
        lam = _lambda_for_qm(rule, sensing, channel, target)
        if lam is None:
            qf = float(asymptotic_qf(rule, pe))
            qm = _qm_loose_limit(rule, pe)
            lam = math.inf
        else:
            qf = _qf_of_lambda(rule, sensing, channel, lam)
            qm = _qm_of_lambda(rule, sensing, channel, lam)
        if best is None or qf < best[1] - _QF_TIE_TOL:
            best = (n, qf, qm, lam)
    if best is None:
        raise InfeasibleTargetError(target, float(asymptotic_qm(
            FusionConfig(num_radios_k=num_radios_k, vote_threshold_n=1), pe)))
    return best


def optimal_n(target_qm: float, num_radios_k: int, sensing: SensingParams,
              channel: ReportChannel, table: Optional[CrossoverTable] = None) -> OptimalRule:
    """Adaptive vote threshold for a target miss probability.

    Applies the interval rule over the crossover table: stay at n = 1 for
    targets at or below the first crossover, step up one rule per crossover
    passed, and use n = K beyond the last one. A direct constrained search
    over (rule, threshold) is run alongside and both answers are reported;
    ties go to the smaller rule. Raises :class:`InfeasibleTargetError` when
    the target lies below every rule's miss floor.
    """
    target = float(target_qm)
    if not 0.0 < target < 1.0 or not math.isfinite(target):
        raise ValueError(f"target_qm must lie strictly inside (0, 1), got {target_qm!r}")
    if not isinstance(num_radios_k, int) or num_radios_k < 1:
        raise ValueError(f"num_radios_k must be a positive integer, got {num_radios_k!r}")
    pe = channel.pe
    min_floor = float(asymptotic_qm(FusionConfig(num_radios_k=num_radios_k, vote_threshold_n=1), pe))
    if target < min_floor:
        raise InfeasibleTargetError(target, min_floor)

    if table is None:
        table = crossover_table(num_radios_k, sensing, channel)
    interval_n = 1 + sum(1 for n in range(1, num_radios_k) if table.entries[n] < target)

    direct_n, _, _, _ = _direct_search(num_radios_k, sensing, channel, target)

    chosen = FusionConfig(num_radios_k=num_radios_k, vote_threshold_n=interval_n)
    lam = _lambda_for_qm(chosen, sensing, channel, target)
    if lam is None:
        qf = float(asymptotic_qf(chosen, pe))
        qm = _qm_loose_limit(chosen, pe)
        lam = math.inf
    else:
        qf = _qf_of_lambda(chosen, sensing, channel, lam)
        qm = _qm_of_lambda(chosen, sensing, channel, lam)

    return OptimalRule(
        target_qm=target,
        n=interval_n,
        interval_n=interval_n,
        direct_n=direct_n,
        agree=interval_n == direct_n,
        achieved_lambda=lam,
        achieved_qf=Probability(qf),
        achieved_qm=Probability(qm),
        table=table,
    )
