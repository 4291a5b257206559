"""
Contraction bounds from spanning-tree schedules.

Single-tree bounds use the guaranteed weight ``alpha(t)`` that agents reached
at step ``t+1`` put on agents reached at step ``t``.  Multi-tree bounds use an
``m x m`` sub-stochastic matrix ``A(t)`` of such weights between trees.  Both
produce a per-interval factor ``f`` with ``Delta(t1) <= f * Delta(t0)``; a rate
estimate is the geometric mean of the factors over time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidSchedule,
    ParamOutOfRange,
    PreconditionViolated,
    SubStochasticityViolated,
)
from .matrix_core import MatrixSequence
from .schedules import (
    IntervalPartition,
    MultiTreeSchedule,
    TreeSchedule,
    validate_multi_schedule,
    validate_tree_schedule,
)

SUBSTOCHASTIC_TOLERANCE = 1e-12

SINGLE_TREE = "single_tree"
COROLLARY = "corollary"
MULTI_TREE = "multi_tree"
CLOSED_FORM = "lemma4_closed_form"

PERIODIC_EXACT = "periodic"
WINDOW_ESTIMATE = "window estimate"


@dataclass(frozen=True)
class AlphaProfile:
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if any(not 0.0 <= v <= 1.0 for v in vals):
            raise ValueError(f"alpha values must lie in [0, 1], got {vals}")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class AlphaMatrixProfile:
    """Matrices ``A(0), ..., A(T-1)``; the factor uses ``A(T-1) ... A(0)``."""

    matrices: tuple

    def __post_init__(self):
        mats = []
        for i, a in enumerate(self.matrices):
            a = np.array(a, dtype=float)
            if a.ndim == 0:
                a = a.reshape(1, 1)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise DimensionMismatch(f"A({i}) is not square: {a.shape}")
            a.setflags(write=False)
            mats.append(a)
        if mats and any(a.shape != mats[0].shape for a in mats):
            raise DimensionMismatch("profile matrices differ in size")
        object.__setattr__(self, "matrices", tuple(mats))

    @property
    def m(self) -> int:
        return self.matrices[0].shape[0]

    def __len__(self):
        return len(self.matrices)

    def product(self) -> np.ndarray:
        p = np.eye(self.m)
        for a in self.matrices:
            p = a @ p
        return p


@dataclass(frozen=True)
class BoundReport:
    """
    Per-interval contraction factors and the aggregated rate.

    ``estimate_kind`` is ``"periodic"`` when the partition repeats a cycle, in
    which case ``rate_estimate`` is the exact limit of the geometric mean, and
    ``"window estimate"`` for a finite list of intervals.
    """

    method: str
    per_interval_factors: tuple
    rate_estimate: float
    partition: Optional[IntervalPartition] = None
    estimate_kind: str = PERIODIC_EXACT
    profiles: tuple = field(default=(), compare=False, repr=False)

    def to_dict(self) -> dict:
        doc = {
            "method": self.method,
            "per_interval_factors": list(self.per_interval_factors),
            "rate_estimate": self.rate_estimate,
            "estimate_kind": self.estimate_kind,
        }
        if self.partition is not None:
            doc["partition"] = self.partition.to_dict()
        if self.profiles:
            doc["profiles"] = [_profile_to_list(p) for p in self.profiles]
        return doc


def _profile_to_list(prof):
    if isinstance(prof, AlphaProfile):
        return list(prof.values)
    return [a.tolist() for a in prof.matrices]


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


# ---------------------------------------------------------------- single tree


def _check_fits(sched, interval) -> None:
    a, b = interval
    if sched.t0 != a or sched.t0 + sched.T > b:
        raise InvalidSchedule(
            f"schedule spans {sched.interval}, which does not start and end inside [{a}, {b})"
        )


def extract_alpha(seq: MatrixSequence, sched: TreeSchedule) -> AlphaProfile:
    """
    Largest weights with ``sum_{l in N_t} gamma[k, l](t0+t) >= alpha(t)`` for
    every ``k`` in ``N_{t+1}``.
    """
    validate_tree_schedule(seq, sched)
    values = []
    for t in range(sched.T):
        gamma = seq[sched.t0 + t]
        src = sorted(sched.sets[t])
        dst = sorted(sched.sets[t + 1])
        values.append(_clamp01(gamma[np.ix_(dst, src)].sum(axis=1).min()))
    return AlphaProfile(tuple(values))


def single_tree_factor(prof: AlphaProfile) -> float:
    return _clamp01(1.0 - math.prod(prof.values))


def corollary_rate(alpha: float, T: int) -> float:
    """``(1 - alpha**T) ** (1/T)``: the rate for a uniform weight bound."""
    if not 0.0 <= alpha <= 1.0:
        raise ParamOutOfRange(f"alpha={alpha} outside [0, 1]")
    if T < 1:
        raise ParamOutOfRange(f"T={T} must be at least 1")
    return (1.0 - alpha**T) ** (1.0 / T)


def aggregate_rate(factors: Sequence[float], partition: IntervalPartition) -> tuple:
    """
    Geometric mean of the factors per unit time.

    With a cyclic partition only the repeating cycle matters.  Returns
    ``(rate, kind)``.
    """
    factors = list(factors)
    if partition.cycle_start is not None:
        cyc = factors[partition.cycle_start:]
        length = partition.cycle_length
        kind = PERIODIC_EXACT
    else:
        cyc = factors
        length = partition.breakpoints[-1] - partition.breakpoints[0]
        kind = WINDOW_ESTIMATE
    if not cyc or length <= 0:
        return 1.0, kind
    prod = math.prod(cyc)
    return _clamp01(prod ** (1.0 / length)), kind


def replicate_schedule(seq: MatrixSequence, sched) -> tuple:
    """
    Repeat one schedule back to back from ``sched.t0``.

    Periodic sequences repeat until a breakpoint recurs modulo the period,
    finite ones while the copies fit in the horizon.  Every copy is
    validated.  Returns ``(partition, schedules)``.
    """
    breakpoints = [sched.t0]
    copies = []
    seen = {sched.t0 % seq.period: 0} if seq.is_periodic else None
    step = max(sched.T, 1)
    while True:
        start = breakpoints[-1]
        if not seq.is_periodic and start + sched.T > seq.horizon:
            break
        copy = sched.shifted(start - sched.t0)
        copies.append(copy)
        breakpoints.append(start + step)
        if seen is not None:
            residue = breakpoints[-1] % seq.period
            if residue in seen:
                return IntervalPartition(tuple(breakpoints), seen[residue], tuple(copies)), tuple(copies)
            seen[residue] = len(breakpoints) - 1
    if not copies:
        raise InvalidSchedule(f"schedule {sched.interval} does not fit in the horizon")
    return IntervalPartition(tuple(breakpoints), None, tuple(copies)), tuple(copies)


def _resolve_schedules(partition: IntervalPartition, schedules):
    if schedules is None:
        schedules = partition.schedules
    schedules = tuple(schedules)
    if len(schedules) != len(partition.intervals):
        raise InvalidSchedule(
            f"{len(schedules)} schedules for {len(partition.intervals)} intervals"
        )
    return schedules


def rate_single(
    seq: MatrixSequence, partition: IntervalPartition, schedules=None
) -> BoundReport:
    """
    Single-tree rate bound over a partition.

    ``schedules[p]`` must start at the ``p``-th breakpoint and finish before
    the next one.  When omitted, the witnesses stored on the partition are
    used.
    """
    if seq.n == 1:
        return BoundReport(SINGLE_TREE, (0.0,), 0.0, partition)
    schedules = _resolve_schedules(partition, schedules)
    factors, profiles = [], []
    for interval, sched in zip(partition.intervals, schedules):
        _check_fits(sched, interval)
        prof = extract_alpha(seq, sched)
        profiles.append(prof)
        factors.append(single_tree_factor(prof))
    rate, kind = aggregate_rate(factors, partition)
    return BoundReport(SINGLE_TREE, tuple(factors), rate, partition, kind, tuple(profiles))


def rate_corollary(alpha: float, T: int) -> BoundReport:
    r = corollary_rate(alpha, T)
    part = IntervalPartition((0, T), 0)
    return BoundReport(COROLLARY, (1.0 - alpha**T,), r, part)


# ----------------------------------------------------------------- multi tree


def _subset_members(m: int) -> np.ndarray:
    masks = np.arange(1 << m)
    return ((masks[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)


def _priority(i: int, m: int) -> list:
    # Own tree first, then lower trees in decreasing order, then higher ones.
    return [i] + list(range(i - 1, -1, -1)) + list(range(m - 1, i, -1))


def _split_row(guarantee: np.ndarray, order: list, bits: np.ndarray) -> np.ndarray:
    """
    Split guaranteed weights among trees, one at a time in ``order``.

    ``guarantee[S]`` is the weight every target agent puts on the union of
    the source sets of the trees in ``S``.  Tree ``j`` receives the largest
    share such that, for every group ``S`` of already-served trees
    containing ``j``, the shares of ``S`` add up to at most ``guarantee[S]``.
    """
    m = len(order)
    shares = np.zeros(m)
    served = np.zeros(m, dtype=bool)
    for j in order:
        served[j] = True
        groups = bits[:, j] & ~(bits & ~served[None, :]).any(axis=1)
        slack = guarantee[groups] - bits[groups].astype(float) @ shares
        shares[j] = max(0.0, float(slack.min()))
    return shares


def _default_alpha_matrix(seq, ms: MultiTreeSchedule, t: int) -> np.ndarray:
    m, n = ms.m, seq.n
    gamma = seq[ms.t0 + t]
    bits = _subset_members(m)
    tree_members = np.zeros((m, n), dtype=bool)
    for j, tree in enumerate(ms.trees):
        tree_members[j, sorted(tree.sets[t])] = True
    union = (bits.astype(int) @ tree_members.astype(int)) > 0  # union[S, l]
    mass = union.astype(float) @ gamma.T  # mass[S, k]
    a = np.zeros((m, m))
    for i, tree in enumerate(ms.trees):
        targets = sorted(tree.sets[t + 1])
        guarantee = mass[:, targets].min(axis=1)
        a[i] = _split_row(guarantee, _priority(i, m), bits)
    return a


def _given_alpha_matrix(seq, ms: MultiTreeSchedule, t: int) -> np.ndarray:
    m = ms.m
    gamma = seq[ms.t0 + t]
    per_k = ms.attribution[t]
    a = np.zeros((m, m))
    for i, tree in enumerate(ms.trees):
        for j in range(m):
            a[i, j] = min(
                gamma[k, sorted(per_k[k][j])].sum() if per_k[k][j] else 0.0
                for k in tree.sets[t + 1]
            )
    return a


def extract_alpha_matrix(seq: MatrixSequence, ms: MultiTreeSchedule) -> AlphaMatrixProfile:
    """
    Guaranteed inter-tree weights ``A(t)[i, j]`` along a multi-tree schedule.

    With explicit attribution sets, ``A(t)[i, j]`` is the least weight an
    agent of ``N^i_{t+1}`` puts on its sources credited to tree ``j``.
    Otherwise the weight of each agent is credited fractionally: for row
    ``i`` the trees are served in the order ``i, i-1, ..., 0, m-1, ..., i+1``
    and each receives the largest share compatible with every union of
    source sets.  This reduces to the single-tree weight when ``m == 1``.

    Raises
    ------
    InvalidSchedule
    SubStochasticityViolated
        A row of some ``A(t)`` sums above one.
    """
    validate_multi_schedule(seq, ms)
    build = _default_alpha_matrix if ms.attribution is None else _given_alpha_matrix
    mats = []
    for t in range(ms.T):
        a = np.clip(build(seq, ms, t), 0.0, 1.0)
        sums = a.sum(axis=1)
        if np.any(sums > 1.0 + SUBSTOCHASTIC_TOLERANCE):
            raise SubStochasticityViolated(
                f"A({t}) row sums {sums.tolist()} exceed 1"
            )
        mats.append(a)
    return AlphaMatrixProfile(tuple(mats))


def multi_tree_factor(prof: AlphaMatrixProfile) -> float:
    """``1 -`` the largest row sum of ``A(T-1) ... A(0)``."""
    return _clamp01(1.0 - prof.product().sum(axis=1).max())


def rate_multi(
    seq: MatrixSequence, partition: IntervalPartition, schedules
) -> BoundReport:
    """Multi-tree rate bound; ``schedules[p]`` is a MultiTreeSchedule per interval."""
    if seq.n == 1:
        return BoundReport(MULTI_TREE, (0.0,), 0.0, partition)
    schedules = _resolve_schedules(partition, schedules)
    factors, profiles = [], []
    for interval, ms in zip(partition.intervals, schedules):
        _check_fits(ms, interval)
        prof = extract_alpha_matrix(seq, ms)
        profiles.append(prof)
        factors.append(multi_tree_factor(prof))
    rate, kind = aggregate_rate(factors, partition)
    return BoundReport(MULTI_TREE, tuple(factors), rate, partition, kind, tuple(profiles))


def profile_rate(prof) -> float:
    """Rate of a profile repeated back to back: ``factor ** (1/T)``."""
    if isinstance(prof, AlphaProfile):
        factor, length = single_tree_factor(prof), len(prof)
    else:
        factor, length = multi_tree_factor(prof), len(prof)
    if length == 0:
        raise InvalidSchedule("empty profile")
    return factor ** (1.0 / length)


# ---------------------------------------------------------- diameter vectors


def propagate_diameter_bound(C, d0, D0: float) -> tuple:
    """
    Bound on per-population diameters after applying ``C(0), ..., C(T-1)``.

    Returns ``(P @ d0 + (1 - P @ 1) * D0, D0)`` with ``P = C(T-1) ... C(0)``.
    """
    d0 = np.asarray(d0, dtype=float)
    if d0.ndim != 1:
        raise DimensionMismatch(f"d0 must be a vector, got shape {d0.shape}")
    m = d0.shape[0]
    D0 = float(D0)
    if np.any(d0 < -1e-15) or np.any(d0 > D0 + 1e-12):
        raise PreconditionViolated("need 0 <= d0_i <= D0")
    p = np.eye(m)
    for i, c in enumerate(C):
        c = np.asarray(c, dtype=float)
        if c.shape != (m, m):
            raise DimensionMismatch(f"C({i}) has shape {c.shape}, expected {(m, m)}")
        p = c @ p
    dT = p @ d0 + (1.0 - p.sum(axis=1)) * D0
    return np.clip(dT, 0.0, D0), D0


# ------------------------------------------------------------- chain example


def binom_count(m: int, n: int) -> int:
    """Number of nondecreasing ``m``-tuples with entries in ``1..n``."""
    if m < 1 or n < 1:
        raise ParamOutOfRange(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    return math.comb(m + n - 1, m)


def lemma4_closed_form(n: int, q: int, gamma: float) -> float:
    """
    Rate bound for the averaging chain analysed with ``q`` staggered trees.

    ``(1 - gamma**(n-1) * sum_{i<q} (1-gamma)**i * C(n+i-2, n-2)) ** (1/(n+q-2))``

    The bracket equals the probability of fewer than ``n - 1`` successes in
    ``T = n + q - 2`` trials of success probability ``gamma``.  That sum of
    positive terms is evaluated in log space, so large ``q`` does not lose
    everything to cancellation.
    """
    if n < 2 or q < 1:
        raise ParamOutOfRange(f"need n >= 2 and q >= 1, got n={n}, q={q}")
    if not 0.0 < gamma <= 1.0:
        raise ParamOutOfRange(f"gamma={gamma} outside (0, 1]")
    if gamma == 1.0:
        return 0.0
    T = n + q - 2
    log_g, log_h = math.log(gamma), math.log1p(-gamma)
    logs = [
        math.lgamma(T + 1) - math.lgamma(k + 1) - math.lgamma(T - k + 1)
        + k * log_g + (T - k) * log_h
        for k in range(n - 1)
    ]
    top = max(logs)
    log_tail = top + math.log(sum(math.exp(v - top) for v in logs))
    return _clamp01(math.exp(log_tail / T))


def example6_profile(n: int, q: int, gamma: float) -> AlphaMatrixProfile:
    """
    Inter-tree weights for the averaging chain with ``q`` staggered trees.

    Tree ``i`` (0-based) leaves the head of the chain at step ``i`` and
    reaches the tail at step ``n - 1 + i``; while growing it keeps weight
    ``gamma`` on itself, and from step ``i`` it passes ``1 - gamma`` on from
    tree ``i - 1``.  There are ``n + q - 2`` steps.
    """
    if n < 2 or q < 1:
        raise ParamOutOfRange(f"need n >= 2 and q >= 1, got n={n}, q={q}")
    mats = []
    for t in range(n + q - 2):
        a = np.eye(q)
        if t <= n - 2:
            a[0, 0] -= 1.0 - gamma
        for i in range(1, q):
            if i <= t <= i + n - 2:
                a[i, i] -= 1.0 - gamma
                a[i, i - 1] += 1.0 - gamma
        mats.append(a)
    return AlphaMatrixProfile(tuple(mats))
