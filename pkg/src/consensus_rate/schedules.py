"""
Spanning-tree schedules and interval partitions.

A tree schedule records, for a root agent and an interval ``[t0, t0 + T)``,
the growing sets ``N_0 = {root}, N_1, ..., N_T = all agents`` of agents
already reached by the root's information.  Agent indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import islice
from typing import Iterator, Optional

import numpy as np

from .errors import InvalidSchedule, ValidationError


@dataclass(frozen=True)
class IntervalPartition:
    """
    Strictly increasing breakpoints ``t_0 < t_1 < ... < t_K``.

    When ``cycle_start`` is set, the intervals from ``breakpoints[cycle_start]``
    to ``breakpoints[-1]`` repeat forever, shifted by ``cycle_length``.  This is
    how partitions of periodic systems are stored.  ``schedules`` optionally
    holds one witness schedule per listed interval.
    """

    breakpoints: tuple
    cycle_start: Optional[int] = None
    schedules: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        b = tuple(int(t) for t in self.breakpoints)
        object.__setattr__(self, "breakpoints", b)
        if len(b) < 1:
            raise ValidationError("a partition needs at least one breakpoint")
        if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise ValidationError(f"breakpoints not strictly increasing: {b}")
        if self.cycle_start is not None and not 0 <= self.cycle_start < len(b) - 1:
            raise ValidationError(f"cycle_start {self.cycle_start} out of range")

    @property
    def intervals(self) -> list:
        b = self.breakpoints
        return list(zip(b[:-1], b[1:]))

    @property
    def gaps(self) -> list:
        return [t1 - t0 for t0, t1 in self.intervals]

    @property
    def max_gap(self) -> int:
        return max(self.gaps) if len(self.breakpoints) > 1 else 0

    @property
    def cycle_length(self) -> Optional[int]:
        if self.cycle_start is None:
            return None
        return self.breakpoints[-1] - self.breakpoints[self.cycle_start]

    def iter_intervals(self) -> Iterator[tuple]:
        """All intervals, cycling forever for periodic partitions."""
        yield from self.intervals
        if self.cycle_start is None:
            return
        base = self.intervals[self.cycle_start:]
        shift = 0
        while True:
            shift += self.cycle_length
            for t0, t1 in base:
                yield t0 + shift, t1 + shift

    def schedule_for(self, index: int):
        """Witness schedule of the ``index``-th interval, shifted for cycle repeats."""
        if not self.schedules:
            return None
        listed = len(self.schedules)
        if index < listed:
            return self.schedules[index]
        if self.cycle_start is None:
            raise IndexError(index)
        per_cycle = listed - self.cycle_start
        laps, offset = divmod(index - listed, per_cycle)
        base = self.schedules[self.cycle_start + offset]
        return base.shifted((laps + 1) * self.cycle_length)

    def first_intervals(self, count: int) -> list:
        return list(islice(self.iter_intervals(), count))

    def to_dict(self) -> dict:
        doc = {"breakpoints": list(self.breakpoints), "cycle_start": self.cycle_start}
        if self.schedules:
            doc["schedules"] = [s.to_dict() for s in self.schedules]
        return doc


def _frozen_sets(sets) -> tuple:
    return tuple(frozenset(int(k) for k in s) for s in sets)


@dataclass(frozen=True)
class TreeSchedule:
    root: int
    sets: tuple
    t0: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sets", _frozen_sets(self.sets))
        object.__setattr__(self, "root", int(self.root))
        object.__setattr__(self, "t0", int(self.t0))

    @property
    def T(self) -> int:
        return len(self.sets) - 1

    @property
    def interval(self) -> tuple:
        return self.t0, self.t0 + self.T

    def shifted(self, dt: int) -> "TreeSchedule":
        return TreeSchedule(self.root, self.sets, self.t0 + dt)

    def to_dict(self) -> dict:
        return {"root": self.root, "t0": self.t0, "sets": [sorted(s) for s in self.sets]}

    @classmethod
    def from_dict(cls, doc: dict) -> "TreeSchedule":
        try:
            return cls(doc["root"], doc["sets"], doc.get("t0", 0))
        except (KeyError, TypeError) as exc:
            raise InvalidSchedule(f"malformed tree schedule: {exc}") from None


@dataclass(frozen=True)
class MultiTreeSchedule:
    """
    Several tree schedules on one interval.

    ``attribution``, when given, is indexed ``[t][k][j]`` and holds the set of
    source agents whose weight in agent ``k``'s update at step ``t`` is
    credited to tree ``j``.  Without it, weights are split automatically (see
    :func:`consensus_rate.bounds.extract_alpha_matrix`).
    """

    trees: tuple
    attribution: Optional[tuple] = field(default=None)

    def __post_init__(self):
        trees = tuple(self.trees)
        if not trees:
            raise InvalidSchedule("a multi-tree schedule needs at least one tree")
        object.__setattr__(self, "trees", trees)
        t0, T = trees[0].t0, trees[0].T
        for j, tr in enumerate(trees):
            if (tr.t0, tr.T) != (t0, T):
                raise InvalidSchedule(
                    f"tree {j} spans {tr.interval}, expected {trees[0].interval}"
                )
        if self.attribution is not None:
            att = tuple(
                tuple(_frozen_sets(per_k) for per_k in per_t) for per_t in self.attribution
            )
            object.__setattr__(self, "attribution", att)

    @property
    def m(self) -> int:
        return len(self.trees)

    @property
    def t0(self) -> int:
        return self.trees[0].t0

    @property
    def T(self) -> int:
        return self.trees[0].T

    @property
    def interval(self) -> tuple:
        return self.trees[0].interval

    def shifted(self, dt: int) -> "MultiTreeSchedule":
        return MultiTreeSchedule(tuple(tr.shifted(dt) for tr in self.trees), self.attribution)

    def to_dict(self) -> dict:
        doc = {"trees": [tr.to_dict() for tr in self.trees]}
        if self.attribution is not None:
            doc["attribution"] = [
                [[sorted(s) for s in per_k] for per_k in per_t] for per_t in self.attribution
            ]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "MultiTreeSchedule":
        try:
            trees = tuple(TreeSchedule.from_dict(d) for d in doc["trees"])
        except (KeyError, TypeError) as exc:
            raise InvalidSchedule(f"malformed multi-tree schedule: {exc}") from None
        return cls(trees, doc.get("attribution"))


def listeners(adj: np.ndarray, sources) -> frozenset:
    """Agents ``k`` with an arc ``(k, l)`` for some ``l`` in ``sources`` (members included)."""
    idx = sorted(sources)
    if not idx:
        return frozenset()
    return frozenset(int(k) for k in np.flatnonzero(adj[:, idx].any(axis=1)))


def validate_tree_schedule(seq, sched: TreeSchedule, strict: bool = False) -> None:
    """
    Replay a schedule against the communication graphs of ``seq``.

    The basic rule is ``N_t ⊆ N_{t-1} ∪ neighbors(N_{t-1}, A(t0+t-1))``.  With
    ``strict=True`` every member of ``N_t`` must also listen, with positive
    weight, to some member of ``N_{t-1}``; this is what makes the guaranteed
    weights of the schedule positive.

    Raises
    ------
    InvalidSchedule
    """
    n = seq.n
    everyone = frozenset(range(n))
    sets = sched.sets
    if not sets or sets[0] != frozenset([sched.root]):
        raise InvalidSchedule(f"N_0 must be {{{sched.root}}}, got {sets[:1]}")
    if not 0 <= sched.root < n:
        raise InvalidSchedule(f"root {sched.root} outside [0, {n})")
    if sets[-1] != everyone:
        raise InvalidSchedule(f"N_T = {sorted(sets[-1])} is not the full agent set")
    if sched.T < 1 and n > 1:
        raise InvalidSchedule("a schedule must span at least one step")
    if sched.t0 < 0 or (seq.horizon is not None and sched.t0 + sched.T > seq.horizon):
        raise InvalidSchedule(f"interval {sched.interval} outside the sequence horizon")
    for t in range(1, len(sets)):
        prev, cur = sets[t - 1], sets[t]
        if not cur <= everyone or not cur:
            raise InvalidSchedule(f"N_{t} = {sorted(cur)} is empty or out of range")
        adj = seq[sched.t0 + t - 1] > 0
        heard = listeners(adj, prev)
        allowed = prev | heard
        if not cur <= allowed:
            raise InvalidSchedule(
                f"N_{t} contains {sorted(cur - allowed)} with no arc into N_{t-1}"
            )
        if strict and not cur <= heard:
            raise InvalidSchedule(
                f"N_{t} contains {sorted(cur - heard)} with zero weight on N_{t-1}"
            )


def validate_multi_schedule(seq, ms: MultiTreeSchedule) -> None:
    for j, tree in enumerate(ms.trees):
        try:
            validate_tree_schedule(seq, tree)
        except InvalidSchedule as exc:
            raise InvalidSchedule(f"tree {j}: {exc}") from None
    if ms.attribution is None:
        return
    n, m = seq.n, ms.m
    if len(ms.attribution) != ms.T:
        raise InvalidSchedule(f"attribution covers {len(ms.attribution)} steps, expected {ms.T}")
    for t, per_t in enumerate(ms.attribution):
        if len(per_t) != n:
            raise InvalidSchedule(f"attribution at step {t} lists {len(per_t)} agents, expected {n}")
        for k, per_k in enumerate(per_t):
            if len(per_k) != m:
                raise InvalidSchedule(f"attribution[{t}][{k}] has {len(per_k)} sets, expected {m}")
            for j, s in enumerate(per_k):
                if not s <= ms.trees[j].sets[t]:
                    raise InvalidSchedule(
                        f"attribution[{t}][{k}][{j}] = {sorted(s)} not inside N^{j}_{t}"
                    )
            for j in range(m):
                for jj in range(j + 1, m):
                    common = per_k[j] & per_k[jj]
                    if common:
                        raise InvalidSchedule(
                            f"attribution[{t}][{k}] sets {j} and {jj} share {sorted(common)}"
                        )


def highest_index_attribution(ms: MultiTreeSchedule, n: int) -> MultiTreeSchedule:
    """
    Copy of ``ms`` where every source agent is credited to the
    highest-index tree whose current set contains it.

    The same split is used for every listening agent.  On nested trees
    such as the averaging chain this gives weaker bounds than the automatic
    split of :func:`consensus_rate.bounds.extract_alpha_matrix`.
    """
    attribution = []
    for t in range(ms.T):
        per_j = [set() for _ in range(ms.m)]
        for l in range(n):
            owners = [j for j, tree in enumerate(ms.trees) if l in tree.sets[t]]
            if owners:
                per_j[owners[-1]].add(l)
        attribution.append([per_j] * n)
    return MultiTreeSchedule(ms.trees, attribution)
