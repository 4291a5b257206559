"""
Time-varying row-stochastic systems ``x(t+1) = Gamma(t) x(t)``.

A :class:`MatrixSequence` holds the update matrices, either as a finite list
(``Gamma(t)`` defined for ``0 <= t < len``) or as a periodic list indexed by
``t mod P``.  All matrices handed out are read-only numpy arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    HorizonExceeded,
    NegativeEntry,
    NotSquare,
    RowSumViolation,
    ValidationError,
)

DEFAULT_TOLERANCE = 1e-12

FINITE = "finite"
PERIODIC = "periodic"


def validate_stochastic(m, tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """
    Check that ``m`` is a square row-stochastic matrix.

    Rows are not renormalised.  The returned array is a read-only float copy.

    Raises
    ------
    NotSquare, NegativeEntry, RowSumViolation
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NotSquare(a.shape)
    if not np.all(np.isfinite(a)):
        bad = np.argwhere(~np.isfinite(a))[0]
        raise ValidationError(f"non-finite entry at {tuple(int(i) for i in bad)}")
    neg = np.argwhere(a < 0)
    if len(neg):
        k, l = (int(i) for i in neg[0])
        raise NegativeEntry(k, l, float(a[k, l]))
    sums = a.sum(axis=1)
    for k, s in enumerate(sums):
        if abs(s - 1.0) > tolerance:
            raise RowSumViolation(k, float(s))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MatrixSequence:
    """A finite or periodic sequence of validated stochastic matrices."""

    matrices: tuple
    kind: str = FINITE

    def __post_init__(self):
        if self.kind not in (FINITE, PERIODIC):
            raise ValidationError(f"unknown sequence kind {self.kind!r}")
        if len(self.matrices) == 0:
            raise ValidationError("a sequence needs at least one matrix")
        n = self.matrices[0].shape[0]
        for i, g in enumerate(self.matrices):
            if g.shape != (n, n):
                raise DimensionMismatch(
                    f"matrix {i} has shape {g.shape}, expected {(n, n)}"
                )

    @classmethod
    def finite(cls, matrices: Iterable, tolerance: float = DEFAULT_TOLERANCE):
        return cls(tuple(validate_stochastic(m, tolerance) for m in matrices), FINITE)

    @classmethod
    def periodic(cls, matrices: Iterable, tolerance: float = DEFAULT_TOLERANCE):
        return cls(tuple(validate_stochastic(m, tolerance) for m in matrices), PERIODIC)

    @property
    def n(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def is_periodic(self) -> bool:
        return self.kind == PERIODIC

    @property
    def period(self) -> int | None:
        return len(self.matrices) if self.is_periodic else None

    @property
    def horizon(self) -> int | None:
        """Number of defined steps, or ``None`` when the sequence is infinite."""
        return None if self.is_periodic else len(self.matrices)

    def __getitem__(self, t: int) -> np.ndarray:
        t = int(t)
        if t < 0:
            raise HorizonExceeded(t, self.horizon)
        if self.is_periodic:
            return self.matrices[t % len(self.matrices)]
        if t >= len(self.matrices):
            raise HorizonExceeded(t, self.horizon)
        return self.matrices[t]

    def check_horizon(self, t: int) -> None:
        """Raise unless time ``t`` may be used as an interval end (``t <= horizon``)."""
        if t < 0 or (self.horizon is not None and t > self.horizon):
            raise HorizonExceeded(t, self.horizon)

    def shifted(self, q: int) -> "MatrixSequence":
        """The sequence ``t -> Gamma(t + q)``."""
        if self.is_periodic:
            p = len(self.matrices)
            q %= p
            return MatrixSequence(self.matrices[q:] + self.matrices[:q], PERIODIC)
        self.check_horizon(q)
        rest = self.matrices[q:]
        if not rest:
            raise HorizonExceeded(q, self.horizon)
        return MatrixSequence(rest, FINITE)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind,
            "matrices": [g.tolist() for g in self.matrices],
        }

    @classmethod
    def from_dict(cls, doc: dict, tolerance: float = DEFAULT_TOLERANCE):
        try:
            kind = doc["kind"]
            raw = doc["matrices"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"missing field in sequence document: {exc}") from None
        if kind not in (FINITE, PERIODIC):
            raise ValidationError(f"unknown sequence kind {kind!r}")
        mats = tuple(validate_stochastic(m, tolerance) for m in raw)
        seq = cls(mats, kind)
        if "n" in doc and int(doc["n"]) != seq.n:
            raise DimensionMismatch(f"declared n={doc['n']} but matrices are {seq.n}x{seq.n}")
        return seq


def load_sequence(path, tolerance: float = DEFAULT_TOLERANCE) -> MatrixSequence:
    with open(path) as fh:
        return MatrixSequence.from_dict(json.load(fh), tolerance)


def dump_sequence(seq: MatrixSequence, path) -> None:
    with open(path, "w") as fh:
        json.dump(seq.to_dict(), fh)


def _as_state(seq: MatrixSequence, x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (seq.n,):
        raise DimensionMismatch(f"state has shape {v.shape}, expected ({seq.n},)")
    return v


def step(seq: MatrixSequence, x: Sequence[float], t: int) -> np.ndarray:
    """One update ``Gamma(t) @ x``; the input is left untouched."""
    return seq[t] @ _as_state(seq, x)


def transition_product(seq: MatrixSequence, t0: int, t1: int) -> np.ndarray:
    """``Gamma(t1-1) ... Gamma(t0)``; identity when ``t0 == t1``."""
    if t1 < t0:
        raise HorizonExceeded(t1, seq.horizon)
    seq.check_horizon(t0)
    seq.check_horizon(t1)
    phi = np.eye(seq.n)
    for t in range(t0, t1):
        phi = seq[t] @ phi
    sums = phi.sum(axis=1)
    assert np.all(np.abs(sums - 1.0) <= 1e-9 * max(1, t1 - t0)), sums
    return phi


def diameter(x) -> float:
    """Spread ``max(x) - min(x)`` of the agent values."""
    x = np.asarray(x, dtype=float)
    return float(x.max() - x.min())
