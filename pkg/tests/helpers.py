"""Random system generators shared by the test modules."""

import numpy as np

from consensus_rate import MatrixSequence


def random_stochastic(rng, n, density=0.5, self_loops=None):
    """Random stochastic matrix with a random support; every row nonempty."""
    support = rng.uniform(size=(n, n)) < density
    if self_loops is True:
        np.fill_diagonal(support, True)
    elif self_loops is False:
        np.fill_diagonal(support, False)
    for k in range(n):
        if not support[k].any():
            choices = [l for l in range(n) if self_loops is not False or l != k] or [k]
            support[k, rng.choice(choices)] = True
    w = np.where(support, rng.uniform(0.05, 1.0, size=(n, n)), 0.0)
    return w / w.sum(axis=1, keepdims=True)


def random_sequence(rng, n, length, density=0.5, self_loops=None, periodic=False):
    mats = [random_stochastic(rng, n, density, self_loops) for _ in range(length)]
    return MatrixSequence.periodic(mats) if periodic else MatrixSequence.finite(mats)


def weakly_connected_block(rng, n, steps, density=0.2):
    """``steps`` matrices whose union contains a random spanning tree."""
    support = rng.uniform(size=(steps, n, n)) < density
    order = rng.permutation(n)
    for pos in range(1, n):
        child = order[pos]
        parent = order[rng.integers(pos)]
        # child listens to parent at a random step: influence parent -> child
        support[rng.integers(steps), child, parent] = True
    mats = []
    for s in range(steps):
        sup = support[s]
        for k in range(n):
            if not sup[k].any():
                sup[k, rng.integers(n)] = True
        w = np.where(sup, rng.uniform(0.05, 1.0, size=(n, n)), 0.0)
        mats.append(w / w.sum(axis=1, keepdims=True))
    return mats


def random_tree_schedule(rng, seq, t0, T, root, keep=0.6):
    """
    Tree schedule on ``[t0, t0 + T)`` that adds each new listener with
    probability ``keep`` and everyone it can on the last step; ``None`` when
    the root does not reach every agent.
    """
    from consensus_rate import TreeSchedule
    from consensus_rate.schedules import listeners

    n = seq.n
    sets = [frozenset([root])]
    for t in range(T):
        heard = listeners(seq[t0 + t] > 0, sets[-1])
        fresh = sorted(heard - sets[-1])
        if t < T - 1:
            fresh = [k for k in fresh if rng.uniform() < keep]
        sets.append(sets[-1] | frozenset(fresh))
    if len(sets[-1]) != n:
        return None
    return TreeSchedule(root, sets, t0)
