"""
Trajectories, measured contraction rates and delay augmentation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NotPeriodic, ParamOutOfRange, RowSumViolation
from .matrix_core import DEFAULT_TOLERANCE, MatrixSequence, _as_state, diameter, transition_product


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray  # shape (horizon + 1, n)
    diameters: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.diameters) - 1


@dataclass(frozen=True)
class EmpiricalRate:
    value: float
    horizon: int
    initial_states: int

    def to_dict(self) -> dict:
        return {"value": self.value, "horizon": self.horizon, "initial_states": self.initial_states}


def simulate(seq: MatrixSequence, x0, horizon: int, t0: int = 0) -> Trajectory:
    """Iterate ``x(t+1) = Gamma(t) x(t)`` for ``horizon`` steps from time ``t0``."""
    x = _as_state(seq, x0).copy()
    seq.check_horizon(t0 + horizon)
    states = np.empty((horizon + 1, seq.n))
    states[0] = x
    for t in range(horizon):
        x = seq[t0 + t] @ x
        states[t + 1] = x
    diam = states.max(axis=1) - states.min(axis=1)
    states.setflags(write=False)
    diam.setflags(write=False)
    return Trajectory(states, diam)


def _sample_rate(seq: MatrixSequence, x: np.ndarray, horizon: int) -> Optional[float]:
    # Renormalise every step so the diameter never underflows; the log of
    # the per-step shrink ratios adds up to log(Delta(H) / Delta(0)).
    d = diameter(x)
    if d == 0.0:
        return None
    x = (x - x.min()) / d
    log_ratio = 0.0
    for t in range(horizon):
        x = seq[t] @ x
        d = diameter(x)
        if d <= 0.0:
            return 0.0
        log_ratio += math.log(d)
        x = (x - x.min()) / d
    return math.exp(log_ratio / horizon)


def empirical_rate(
    seq: MatrixSequence, horizon: int, samples: int, seed: int = 0
) -> EmpiricalRate:
    """
    Largest observed ``(Delta(H) / Delta(0)) ** (1/H)``.

    The initial states are ``samples`` uniform draws on ``[0, 1]^n`` plus the
    ``n`` unit vectors.  Each draw uses its own stream spawned from ``seed``.
    """
    if samples < 1:
        raise ParamOutOfRange("samples must be at least 1")
    if horizon < 1:
        raise ParamOutOfRange("horizon must be at least 1")
    seq.check_horizon(horizon)
    n = seq.n
    streams = np.random.SeedSequence(seed).spawn(samples)
    starts = [np.random.default_rng(s).uniform(size=n) for s in streams]
    starts.extend(np.eye(n))
    best = None
    used = 0
    for x0 in starts:
        r = _sample_rate(seq, np.asarray(x0, dtype=float), horizon)
        if r is None:
            continue
        used += 1
        best = r if best is None else max(best, r)
    return EmpiricalRate(0.0 if best is None else best, horizon, used)


def spectral_rate_periodic(seq: MatrixSequence) -> float:
    """``|lambda_2| ** (1/P)`` of the period product ``Gamma(P-1) ... Gamma(0)``."""
    if not seq.is_periodic:
        raise NotPeriodic("spectral rate needs a periodic sequence")
    if seq.n < 2:
        return 0.0
    product = transition_product(seq, 0, seq.period)
    moduli = np.sort(np.abs(np.linalg.eigvals(product)))[::-1]
    return float(moduli[1]) ** (1.0 / seq.period)


@dataclass(frozen=True)
class DelayTerm:
    """Agent ``target`` uses ``weight * x_source(t - delay)``."""

    target: int
    source: int
    delay: int
    weight: float


def augment_delays(
    n: int, terms: Sequence, tolerance: float = DEFAULT_TOLERANCE
) -> MatrixSequence:
    """
    Memoryless form of a stationary system with delayed terms.

    The augmented state is ``(x(t), x(t-1), ..., x(t-d))`` with ``d`` the
    largest delay, so the sequence has ``n * (d + 1)`` coordinates; rows past
    the first ``n`` shift the history down by one step.  Without delays the
    plain ``n x n`` system is returned.

    Parameters
    ----------
    terms : iterable of DelayTerm or (target, source, delay, weight) tuples

    Raises
    ------
    RowSumViolation
        The weights of some agent do not add up to one.
    """
    terms = [t if isinstance(t, DelayTerm) else DelayTerm(*t) for t in terms]
    for term in terms:
        if not (0 <= term.target < n and 0 <= term.source < n):
            raise DimensionMismatch(f"term {term} refers to an agent outside [0, {n})")
        if term.delay < 0:
            raise ParamOutOfRange(f"negative delay in {term}")
    dmax = max((t.delay for t in terms), default=0)
    size = n * (dmax + 1)
    gamma = np.zeros((size, size))
    for term in terms:
        gamma[term.target, term.delay * n + term.source] += term.weight
    sums = gamma[:n].sum(axis=1)
    for k, s in enumerate(sums):
        if abs(s - 1.0) > tolerance:
            raise RowSumViolation(k, float(s))
    for lag in range(1, dmax + 1):
        for k in range(n):
            gamma[lag * n + k, (lag - 1) * n + k] = 1.0
    return MatrixSequence.periodic([gamma], tolerance)
