"""
Worked example systems.

Agent indices are 0-based throughout; literature on these systems usually
numbers agents from 1.
"""

from __future__ import annotations

import numpy as np

from .bounds import AlphaMatrixProfile, AlphaProfile
from .errors import ParamOutOfRange
from .matrix_core import MatrixSequence
from .schedules import MultiTreeSchedule, TreeSchedule
from .simulation import DelayTerm, augment_delays


def _check_range(name, value, lo, hi, lo_open=False, hi_open=False):
    below = value <= lo if lo_open else value < lo
    above = value >= hi if hi_open else value > hi
    if below or above:
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        raise ParamOutOfRange(f"{name}={value} outside {lb}{lo}, {hi}{rb}")


# ------------------------------------------------------------ two-periodic


def two_periodic_sequence() -> MatrixSequence:
    """Three agents; the odd-step matrix has no self-loops."""
    even = [[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 1.0]]
    odd = [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [1.0, 0.0, 0.0]]
    return MatrixSequence.periodic([even, odd])


def two_periodic_schedule() -> TreeSchedule:
    return TreeSchedule(0, [[0], [0, 1], [0, 1, 2]])


# ------------------------------------------------------- stationary 3-agent


def stationary_matrix(eps: float) -> np.ndarray:
    _check_range("eps", eps, 0.0, 1.0 / 3.0)
    third = 1.0 / 3.0
    return np.array([[third, third, third], [third, third, third], [third, 2 * third - eps, eps]])


def stationary_sequence(eps: float) -> MatrixSequence:
    return MatrixSequence.periodic([stationary_matrix(eps)])


def root_trees(trees=(0, 1, 2)) -> MultiTreeSchedule:
    """One-step trees rooted at each listed agent of the stationary system."""
    return MultiTreeSchedule(tuple(TreeSchedule(j, [[j], [0, 1, 2]]) for j in trees))


# ---------------------------------------------------- finite-time consensus


def finite_time_sequence(horizon: int = 64) -> MatrixSequence:
    """
    Pairs of steps whose product sends every agent to agent 0's value.

    The weight of agent 2 on agent 0 at odd step ``2p + 1`` is ``1/(p+2)``,
    which has no positive lower bound over time.
    """
    if horizon < 2:
        raise ParamOutOfRange("horizon must be at least 2")
    even = [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    mats = []
    for t in range(horizon):
        if t % 2 == 0:
            mats.append(even)
        else:
            c = 1.0 / (t // 2 + 2)
            mats.append([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [c, 1.0 - c, 0.0]])
    return MatrixSequence.finite(mats)


# ---------------------------------------------------------- averaging chain


def chain_matrix(n: int, gamma: float) -> np.ndarray:
    """Agent 0 is fixed; agent ``i`` mixes ``gamma`` of agent ``i-1`` into itself."""
    if n < 2:
        raise ParamOutOfRange("n must be at least 2")
    _check_range("gamma", gamma, 0.0, 1.0)
    g = np.diag(np.full(n, 1.0 - gamma))
    g[0, 0] = 1.0
    g[np.arange(1, n), np.arange(n - 1)] = gamma
    return g


def chain_sequence(n: int, gamma: float) -> MatrixSequence:
    return MatrixSequence.periodic([chain_matrix(n, gamma)])


def chain_trees(n: int, q: int, t0: int = 0) -> MultiTreeSchedule:
    """``q`` trees leaving agent 0 at steps ``0, ..., q-1``, one agent per step."""
    if q < 1:
        raise ParamOutOfRange("q must be at least 1")
    T = n + q - 2
    trees = []
    for j in range(q):
        sets = [range(min(n, max(0, t - j) + 1)) for t in range(T + 1)]
        trees.append(TreeSchedule(0, sets, t0))
    return MultiTreeSchedule(tuple(trees))


# ------------------------------------------------- crossing two-branch trees

BRANCH_STEPS = 5


def branch_lower_bounds(gamma: float, eta: float = 1.0) -> list:
    """
    Entrywise lower bounds of the five matrices of one period of the
    six-agent system whose tree splits into two crossing branches.
    ``eta`` weakens the left branch at steps 1 and 2.
    """
    _check_range("gamma", gamma, 0.0, 0.5, lo_open=True, hi_open=True)
    _check_range("eta", eta, 0.0, 1.0)
    arcs = [
        [(0, 0), (1, 0)],
        [(0, 0), (1, 1), (2, 1, eta), (3, 1)],
        [(0, 0), (1, 1), (2, 2, eta), (3, 3), (4, 2), (5, 3)],
        [(0, 0), (1, 1), (2, 2), (3, 3), (4, 4), (4, 5), (5, 4), (5, 5)],
        [(0, 0), (1, 1), (2, 4), (3, 5), (4, 4), (5, 5)],
    ]
    mats = []
    for step in arcs:
        low = np.zeros((6, 6))
        for arc in step:
            k, l = arc[:2]
            scale = arc[2] if len(arc) > 2 else 1.0
            low[k, l] = scale * gamma
        mats.append(low)
    return mats


def branch_sequence(gamma: float, eta: float = 1.0) -> MatrixSequence:
    """The lower bounds completed to stochastic matrices on the diagonal."""
    mats = []
    for low in branch_lower_bounds(gamma, eta):
        g = low.copy()
        g[np.diag_indices(6)] += 1.0 - low.sum(axis=1)
        mats.append(g)
    return MatrixSequence.periodic(mats)


def branch_trees() -> MultiTreeSchedule:
    left = [[0], [0, 1], [0, 1, 2], [0, 1, 2, 4], [0, 1, 2, 4, 5], range(6)]
    right = [[0], [0, 1], [0, 1, 3], [0, 1, 3, 5], [0, 1, 3, 4, 5], range(6)]
    return MultiTreeSchedule((TreeSchedule(0, left), TreeSchedule(0, right)))


def branch_union_tree() -> TreeSchedule:
    left, right = branch_trees().trees
    return TreeSchedule(0, [a | b for a, b in zip(left.sets, right.sets)])


def branch_profiles(gamma: float, eta: float = 1.0) -> dict:
    """
    Guaranteed-weight profiles read off the lower bounds.

    ``single``: the union tree alone.  ``two_trees``: both branches.
    ``three_populations``: both branches plus their union as a third
    population feeding the other two once it is complete.
    """
    _check_range("gamma", gamma, 0.0, 0.5, lo_open=True, hi_open=True)
    _check_range("eta", eta, 0.0, 1.0)
    single = AlphaProfile((gamma, eta * gamma, eta * gamma, 1.0, 1.0))
    two = AlphaMatrixProfile(tuple(np.diag([gamma, gamma]) for _ in range(BRANCH_STEPS)))
    weak = np.diag([eta * gamma, gamma, eta * gamma])
    merge = np.array([[gamma, 0.0, 1.0 - gamma], [0.0, gamma, 1.0 - gamma], [0.0, 0.0, gamma]])
    three = AlphaMatrixProfile((gamma * np.eye(3), weak, weak, merge, merge))
    return {"single": single, "two_trees": two, "three_populations": three}


# -------------------------------------------------------------- delay suite


DELAY_SYSTEMS = {
    # x_0(t+1) and x_1(t+1) as (target, source, delay, weight) terms
    "sima": [(0, 0, 0, 0.5), (0, 1, 0, 0.5), (1, 0, 0, 0.5), (1, 1, 0, 0.5)],
    "simb": [(0, 0, 0, 0.5), (0, 1, 0, 0.5), (1, 0, 1, 0.5), (1, 1, 1, 0.5)],
    "simc": [(0, 0, 0, 0.25), (0, 0, 1, 0.25), (0, 1, 1, 0.5), (1, 0, 0, 0.5), (1, 1, 1, 0.5)],
    "simd": [(0, 0, 1, 0.5), (0, 1, 0, 0.5), (1, 0, 0, 0.5), (1, 1, 1, 0.5)],
}


def delay_system(name: str) -> MatrixSequence:
    try:
        terms = DELAY_SYSTEMS[name]
    except KeyError:
        raise ParamOutOfRange(f"unknown delay system {name!r}") from None
    return augment_delays(2, [DelayTerm(*t) for t in terms])
