"""
Communication graphs and connectivity tests.

An arc ``(k, l)`` is present at time ``t`` iff ``gamma[k, l](t) > 0``; agent
``k`` listens to agent ``l`` so information travels from ``l`` to ``k``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    HorizonExceeded,
    InvalidSchedule,
    NoSchedule,
    PreconditionViolated,
    SearchBudgetExceeded,
)
from .matrix_core import MatrixSequence
from .schedules import IntervalPartition, TreeSchedule, listeners, validate_tree_schedule

EXHAUSTIVE_MAX_AGENTS = 8
EXHAUSTIVE_MAX_STEPS = 12

MAXIMAL = "maximal"
EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class DirectedGraphSnapshot:
    """Boolean adjacency ``adjacency[k, l]`` meaning ``k`` listens to ``l``."""

    adjacency: np.ndarray

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def arcs(self) -> frozenset:
        return frozenset((int(k), int(l)) for k, l in np.argwhere(self.adjacency))

    def __eq__(self, other):
        if not isinstance(other, DirectedGraphSnapshot):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(self.adjacency.tobytes())


def graph_at(seq: MatrixSequence, t: int) -> DirectedGraphSnapshot:
    return DirectedGraphSnapshot(seq[t] > 0)


def neighbors(s, g: DirectedGraphSnapshot) -> frozenset:
    """Agents outside ``s`` that listen to at least one member of ``s``."""
    s = frozenset(s)
    return listeners(g.adjacency, s) - s


def union_graph(seq: MatrixSequence, interval) -> DirectedGraphSnapshot:
    t0, t1 = interval
    if t1 < t0:
        raise HorizonExceeded(t1, seq.horizon)
    seq.check_horizon(t0)
    seq.check_horizon(t1)
    adj = np.zeros((seq.n, seq.n), dtype=bool)
    for t in range(t0, t1):
        adj |= seq[t] > 0
    return DirectedGraphSnapshot(adj)


def _reached_from(adjacency: np.ndarray, root: int) -> np.ndarray:
    # Breadth-first search along the influence direction l -> k.
    reached = np.zeros(adjacency.shape[0], dtype=bool)
    reached[root] = True
    frontier = reached.copy()
    while frontier.any():
        new = adjacency[:, frontier].any(axis=1) & ~reached
        reached |= new
        frontier = new
    return reached


def is_weakly_connected(g: DirectedGraphSnapshot) -> tuple:
    """
    Return ``(connected, roots)`` where ``roots`` are the agents whose value
    can reach every other agent along directed paths of ``g``.
    """
    roots = frozenset(r for r in range(g.n) if _reached_from(g.adjacency, r).all())
    return bool(roots), roots


def _trim_full(sets: list, n: int) -> list:
    everyone = frozenset(range(n))
    for i, s in enumerate(sets):
        if s == everyone:
            return sets[: i + 1]
    return sets


def _maximal_schedule(seq, t0: int, t1: int, root: int) -> Optional[TreeSchedule]:
    # Each new set is every agent with positive weight on the previous set.
    n = seq.n
    everyone = frozenset(range(n))
    sets = [frozenset([root])]
    if n == 1:
        return TreeSchedule(root, sets, t0)
    for t in range(t0, t1):
        nxt = listeners(seq[t] > 0, sets[-1])
        if not nxt:
            return None
        sets.append(nxt)
        if nxt == everyone:
            return TreeSchedule(root, sets, t0)
    return None


def _subset_masks(n: int) -> np.ndarray:
    masks = np.arange(1 << n)
    return ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)


def _exhaustive_schedule(seq, t0: int, t1: int, root: int) -> Optional[TreeSchedule]:
    # Dynamic programme over agent subsets maximising the product of the step
    # weights min_{k in S'} sum_{l in S} gamma[k, l]; a zero product means
    # some agent of S' has no weight on S, which is not a valid step.
    n = seq.n
    steps = t1 - t0
    if n > EXHAUSTIVE_MAX_AGENTS or steps > EXHAUSTIVE_MAX_STEPS:
        raise SearchBudgetExceeded(
            f"exhaustive search limited to n <= {EXHAUSTIVE_MAX_AGENTS} and "
            f"{EXHAUSTIVE_MAX_STEPS} steps, got n={n}, {steps} steps"
        )
    if n == 1:
        return TreeSchedule(root, [[root]], t0)
    bits = _subset_masks(n)
    full = (1 << n) - 1
    value = np.zeros(1 << n)
    value[1 << root] = 1.0
    choices = []
    for t in range(t0, t1):
        gamma = seq[t]
        mass = bits.astype(float) @ gamma.T  # mass[S, k] = sum_{l in S} gamma[k, l]
        weight = np.where(bits[None, :, :], mass[:, None, :], np.inf).min(axis=2)
        weight[:, 0] = 0.0
        candidate = value[:, None] * weight
        best_prev = candidate.argmax(axis=0)
        value = candidate[best_prev, np.arange(1 << n)]
        choices.append(best_prev)
    if value[full] <= 0.0:
        return None
    masks = [full]
    for best_prev in reversed(choices):
        masks.append(int(best_prev[masks[-1]]))
    masks.reverse()
    sets = [frozenset(int(k) for k in np.flatnonzero(bits[m])) for m in masks]
    return TreeSchedule(root, _trim_full(sets, n), t0)


def find_tree_schedule(
    seq: MatrixSequence, interval, root: int, strategy: str = MAXIMAL
) -> TreeSchedule:
    """
    Build a spanning-tree schedule rooted at ``root`` inside ``interval``.

    Every agent placed in ``N_t`` puts positive weight on ``N_{t-1}``, so the
    guaranteed weights of the result are positive.  The schedule stops at the
    first time all agents are reached and may be shorter than the interval.

    Parameters
    ----------
    strategy : {"maximal", "exhaustive"}
        ``maximal`` takes every supported agent at each step (fastest
        coverage).  ``exhaustive`` searches all subset choices for the largest
        product of guaranteed weights.

    Raises
    ------
    NoSchedule
        The root cannot reach every agent within the interval.
    SearchBudgetExceeded
        Exhaustive search requested beyond its size limits.
    """
    t0, t1 = interval
    seq.check_horizon(t0)
    seq.check_horizon(t1)
    if not 0 <= root < seq.n:
        raise InvalidSchedule(f"root {root} outside [0, {seq.n})")
    if strategy == MAXIMAL:
        sched = _maximal_schedule(seq, t0, t1, root)
    elif strategy == EXHAUSTIVE:
        sched = _exhaustive_schedule(seq, t0, t1, root)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if sched is None:
        raise NoSchedule(f"root {root} does not reach every agent in [{t0}, {t1})")
    return sched


def _first_cover(seq, start: int, max_len: int) -> Optional[TreeSchedule]:
    # Shortest interval first, then smallest root.
    best = None
    for root in range(seq.n):
        sched = _maximal_schedule(seq, start, start + max_len, root)
        if sched is not None and (best is None or sched.T < best.T):
            best = sched
    return best


def _periodic_cycle(seq, T: int) -> Optional[IntervalPartition]:
    # Exact search used when the greedy scan from t=0 gets stuck.  Once all
    # agents are reached they stay reached, so an interval starting at
    # residue r may have any length from its shortest cover up to T.  The
    # sequence is T-sequentially connected iff the graph of such moves on
    # residues mod P has a cycle, possibly entered after an uncovered prefix.
    period = seq.period
    covers = {}
    for r in range(period):
        sched = _first_cover(seq, r, T)
        if sched is not None:
            covers[r] = sched

    def targets(r):
        return [(L, (r + L) % period) for L in range(covers[r].T, T + 1)]

    alive = set(covers)
    changed = True
    while changed:
        changed = False
        for r in sorted(alive):
            if not any(nxt in alive for _, nxt in targets(r)):
                alive.discard(r)
                changed = True
    if not alive:
        return None
    start = min(alive)
    breakpoints, schedules, seen = [start], [], {start: 0}
    while True:
        t = breakpoints[-1]
        r = t % period
        length = min(L for L, nxt in targets(r) if nxt in alive)
        schedules.append(covers[r].shifted(t - r))
        breakpoints.append(t + length)
        residue = breakpoints[-1] % period
        if residue in seen:
            return IntervalPartition(tuple(breakpoints), seen[residue], tuple(schedules))
        seen[residue] = len(breakpoints) - 1


def check_T_sequential(
    seq: MatrixSequence, T: int, horizon: Optional[int] = None
) -> Optional[IntervalPartition]:
    """
    Greedy left-to-right search for a partition with gaps at most ``T``.

    Each interval is the shortest one starting at the previous breakpoint
    that is sequentially connected from some root.  For periodic sequences
    the scan stops once a breakpoint repeats modulo the period, and the
    returned partition repeats that cycle; if the scan from ``t = 0`` gets
    stuck, an exact search over start times modulo the period is run, and
    the partition may then begin after a short uncovered prefix.  For finite
    sequences a trailing remainder shorter than ``T`` may be left uncovered.

    Returns ``None`` when the greedy scan fails.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    if seq.n == 1:
        return IntervalPartition((0, 1), 0 if seq.is_periodic else None,
                                 (TreeSchedule(0, [[0]], 0),))
    breakpoints = [0]
    schedules = []
    if seq.is_periodic:
        seen = {0: 0}
        while True:
            s = breakpoints[-1]
            sched = _first_cover(seq, s, T)
            if sched is None:
                return _periodic_cycle(seq, T)
            schedules.append(sched)
            breakpoints.append(s + sched.T)
            residue = breakpoints[-1] % seq.period
            if residue in seen:
                return IntervalPartition(tuple(breakpoints), seen[residue], tuple(schedules))
            seen[residue] = len(breakpoints) - 1

    horizon = seq.horizon if horizon is None else horizon
    seq.check_horizon(horizon)
    while breakpoints[-1] < horizon:
        s = breakpoints[-1]
        sched = _first_cover(seq, s, min(T, horizon - s))
        if sched is None:
            if horizon - s < T:
                break
            return None
        schedules.append(sched)
        breakpoints.append(s + sched.T)
    if len(breakpoints) < 2:
        return None
    return IntervalPartition(tuple(breakpoints), None, tuple(schedules))


def weak_to_sequential(
    seq: MatrixSequence, weak_partition: IntervalPartition, n: Optional[int] = None
) -> tuple:
    """
    Turn weak connectivity on every interval into a sequential schedule.

    Among the first ``(n-1)**2`` weak intervals some agent is a root of at
    least ``n-1`` of the union graphs.  Growing the reached set from that
    agent through every arc in time order adds at least one agent per such
    interval, so all agents are reached inside the window.

    Returns
    -------
    bound : int
        ``(n-1)**2 * T`` with ``T`` the largest gap of ``weak_partition``.
    schedule : TreeSchedule
        The constructed schedule, stopped when every agent is reached.

    Raises
    ------
    PreconditionViolated
        An interval of the window is not weakly connected, or the partition
        has too few intervals to reach every agent.
    """
    n = seq.n if n is None else n
    if n != seq.n:
        raise PreconditionViolated(f"n={n} but the sequence has {seq.n} agents")
    window = max(1, (n - 1) ** 2)
    intervals = weak_partition.first_intervals(window)
    gaps = [b - a for a, b in intervals]
    bound = (n - 1) ** 2 * max(gaps + [weak_partition.max_gap])
    start = intervals[0][0] if intervals else weak_partition.breakpoints[0]
    if n == 1:
        return bound, TreeSchedule(0, [[0]], start)

    counts = Counter()
    for a, b in intervals:
        ok, roots = is_weakly_connected(union_graph(seq, (a, b)))
        if not ok:
            raise PreconditionViolated(f"union graph on [{a}, {b}) is not weakly connected")
        counts.update(roots)
    hub = min(counts, key=lambda k: (-counts[k], k))

    everyone = frozenset(range(n))
    sets = [frozenset([hub])]
    t = start
    end = intervals[-1][1]
    while sets[-1] != everyone and t < end:
        adj = seq[t] > 0
        sets.append(sets[-1] | listeners(adj, sets[-1]))
        t += 1
    if sets[-1] != everyone:
        raise PreconditionViolated(
            f"agent {hub} reaches only {sorted(sets[-1])} within [{start}, {end})"
        )
    sched = TreeSchedule(hub, sets, start)
    validate_tree_schedule(seq, sched)
    return bound, sched
