"""
Reproducible experiments on the worked example systems.

Each experiment returns an :class:`ExperimentResult` holding a table of
computed quantities and a list of checks against reference closed forms.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .bounds import (
    corollary_rate,
    example6_profile,
    extract_alpha_matrix,
    lemma4_closed_form,
    multi_tree_factor,
    profile_rate,
    rate_multi,
    rate_single,
    replicate_schedule,
)
from .errors import DegenerateDraw, NoSchedule, ParamOutOfRange, UnknownExample
from .graphs import check_T_sequential, find_tree_schedule
from .matrix_core import MatrixSequence, diameter
from .schedules import IntervalPartition
from .simulation import empirical_rate, simulate, spectral_rate_periodic
from . import systems

FORMULA_TOLERANCE = 1e-9
EMPIRICAL_TOLERANCE = 0.02
SOUNDNESS_SLACK = 1e-9

HISTOGRAM_BIN_WIDTH = 0.05


@dataclass(frozen=True)
class Check:
    name: str
    computed: float
    expected: float
    tolerance: float
    # "eq": |computed - expected| <= tol; "le": computed <= expected + tol;
    # "lt": computed < expected
    relation: str = "eq"

    @property
    def passed(self) -> bool:
        if self.relation == "lt":
            return self.computed < self.expected
        if self.relation == "le":
            return self.computed <= self.expected + self.tolerance
        return abs(self.computed - self.expected) <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "computed": self.computed,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "relation": self.relation,
            "pass": self.passed,
        }


@dataclass
class ExperimentResult:
    name: str
    rows: list
    checks: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "rows": self.rows,
            "checks": [c.to_dict() for c in self.checks],
            "metadata": self.metadata,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        keys = list(self.rows[0]) if self.rows else []
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows)
        return buf.getvalue()


@dataclass(frozen=True)
class HistogramReport:
    bin_edges: tuple
    counts: tuple
    trials: int
    redraws: int
    max_ratio: float
    ratios: tuple = field(default=(), repr=False, compare=False)

    def mass_between(self, lo: float, hi: float) -> float:
        """Fraction of trials in the bins covering ``[lo, hi)``."""
        edges = np.asarray(self.bin_edges)
        sel = (edges[:-1] >= lo - 1e-12) & (edges[1:] <= hi + 1e-12)
        return float(np.asarray(self.counts)[sel].sum()) / self.trials

    def to_dict(self) -> dict:
        return {
            "bin_edges": list(self.bin_edges),
            "counts": list(self.counts),
            "trials": self.trials,
            "redraws": self.redraws,
            "max_ratio": self.max_ratio,
        }


def _metadata(**params) -> dict:
    return {"version": __version__, "params": params}


# ------------------------------------------------------------- helpers


def sequential_index(seq: MatrixSequence, max_T: int = 16) -> Optional[IntervalPartition]:
    """Partition found for the smallest ``T <= max_T`` that works, or ``None``."""
    for T in range(1, max_T + 1):
        part = check_T_sequential(seq, T)
        if part is not None:
            return part
    return None


def _random_stochastic(rng: np.random.Generator, n: int) -> tuple:
    redraws = 0
    while True:
        raw = rng.uniform(size=(n, n))
        sums = raw.sum(axis=1)
        if np.all(sums > 0):
            return raw / sums[:, None], redraws
        redraws += 1
        if redraws > 1000:
            raise DegenerateDraw("could not draw a matrix with nonzero rows")


def random_trial(rng: np.random.Generator) -> tuple:
    """
    One random two-periodic 3-agent system with the fixed schedule
    ``{0}, {0, 1}, {0, 1, 2}``.  Returns ``(rho, rho_bound, redraws)``.
    """
    g0, r0 = _random_stochastic(rng, 3)
    g1, r1 = _random_stochastic(rng, 3)
    alpha0 = min(g0[0, 0], g0[1, 0])
    alpha1 = float((g1[:, 0] + g1[:, 1]).min())
    bound = math.sqrt(1.0 - alpha0 * alpha1)
    moduli = np.sort(np.abs(np.linalg.eigvals(g1 @ g0)))[::-1]
    return math.sqrt(moduli[1]), bound, r0 + r1


def random_histogram(trials: int, seed: int = 0) -> HistogramReport:
    """Distribution of ``rho / rho_bound`` over random two-periodic systems."""
    if trials < 1:
        raise ParamOutOfRange("trials must be at least 1")
    ratios = np.empty(trials)
    redraws = 0
    for i, stream in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rho, bound, r = random_trial(np.random.default_rng(stream))
        redraws += r
        ratios[i] = rho / bound if bound > 0 else 0.0
    nbins = int(round(1.0 / HISTOGRAM_BIN_WIDTH))
    edges = np.round(np.arange(nbins + 1) * HISTOGRAM_BIN_WIDTH, 12)
    # ratios in (1, 1 + slack] belong with the last bin
    idx = np.minimum((ratios / HISTOGRAM_BIN_WIDTH).astype(int), nbins - 1)
    counts = np.bincount(idx, minlength=nbins)
    return HistogramReport(
        tuple(float(e) for e in edges),
        tuple(int(c) for c in counts),
        trials,
        redraws,
        float(ratios.max()),
        tuple(float(r) for r in ratios),
    )


def lemma4_sweep(n: int, q_max: int, gammas) -> ExperimentResult:
    """Closed-form chain rates for ``q = 1..q_max`` beside the product path."""
    if n < 2 or q_max < 1:
        raise ParamOutOfRange("need n >= 2 and q_max >= 1")
    rows, checks = [], []
    for gamma in gammas:
        for q in range(1, q_max + 1):
            closed = lemma4_closed_form(n, q, gamma)
            product = multi_tree_factor(example6_profile(n, q, gamma)) ** (1.0 / (n + q - 2))
            rows.append(
                {"gamma": gamma, "q": q, "rho_q": closed, "one_minus_gamma": 1.0 - gamma,
                 "product_path": product}
            )
            checks.append(Check(f"product_path[gamma={gamma},q={q}]", product, closed, 1e-10))
    return ExperimentResult("lemma4_sweep", rows, checks,
                            _metadata(n=n, q_max=q_max, gammas=list(gammas)))


# ------------------------------------------------------------ examples


def _ex1(trials: int = 200, seed: int = 0, **_):
    report = random_histogram(trials, seed)
    rows = [{"trials": trials, "max_ratio": report.max_ratio, "redraws": report.redraws,
             "mean_ratio": float(np.mean(report.ratios))}]
    checks = [Check("max rho/rho_bound", report.max_ratio, 1.0, SOUNDNESS_SLACK, "le")]
    return rows, checks, {"trials": trials, "seed": seed}


def _ex2(horizon: int = 64, samples: int = 32, seed: int = 0, **_):
    seq = systems.two_periodic_sequence()
    part = check_T_sequential(seq, 2)
    single = rate_single(seq, part)
    cor = corollary_rate(0.5, 2)
    spectral = spectral_rate_periodic(seq)
    emp = empirical_rate(seq, horizon, samples, seed).value
    reference = math.sqrt(5.0 / 8.0)
    rows = [{"rho_single": single.rate_estimate, "rho_corollary": cor,
             "rho_spectral": spectral, "rho_empirical": emp}]
    checks = [
        Check("rho_single", single.rate_estimate, math.sqrt(3) / 2, FORMULA_TOLERANCE),
        Check("rho_corollary", cor, math.sqrt(3) / 2, FORMULA_TOLERANCE),
        Check("rho_spectral", spectral, reference, FORMULA_TOLERANCE),
        Check("rho_empirical", emp, reference, EMPIRICAL_TOLERANCE),
        Check("rho_spectral <= rho_single", spectral, single.rate_estimate, SOUNDNESS_SLACK, "le"),
    ]
    return rows, checks, {"horizon": horizon, "samples": samples, "seed": seed}


def _ex3(eps: float = 0.1, horizon: int = 64, samples: int = 32, seed: int = 0, **_):
    seq = systems.stationary_sequence(eps)
    single = rate_single(seq, check_T_sequential(seq, 1))
    multi = rate_multi(seq, IntervalPartition((0, 1), 0), [systems.root_trees()])
    spectral = spectral_rate_periodic(seq)
    emp = empirical_rate(seq, horizon, samples, seed).value
    exact = 1.0 / 3.0 - eps
    rows = [{"eps": eps, "rho_single": single.rate_estimate, "rho_multi3": multi.rate_estimate,
             "rho_spectral": spectral, "rho_empirical": emp}]
    checks = [
        Check("rho_single", single.rate_estimate, 2.0 / 3.0, FORMULA_TOLERANCE),
        Check("rho_multi3", multi.rate_estimate, exact, FORMULA_TOLERANCE),
        Check("rho_spectral", spectral, exact, FORMULA_TOLERANCE),
        Check("rho_empirical", emp, exact, EMPIRICAL_TOLERANCE),
    ]
    return rows, checks, {"eps": eps, "horizon": horizon, "samples": samples, "seed": seed}


def _ex35(horizon: int = 64, samples: int = 100, seed: int = 0, **_):
    seq = systems.finite_time_sequence(horizon)
    part = check_T_sequential(seq, 2)
    report = rate_single(seq, part)
    rng = np.random.default_rng(seed)
    worst = max(diameter(simulate(seq, rng.uniform(size=3), 2).states[2]) for _ in range(samples))
    rows = [{"rho_single": report.rate_estimate, "max_diameter_at_2": worst,
             "estimate_kind": report.estimate_kind}]
    checks = [
        Check("rho_single", report.rate_estimate, 0.0, 0.0),
        Check("max diameter at t=2", worst, 0.0, 0.0),
    ]
    return rows, checks, {"horizon": horizon, "samples": samples, "seed": seed}


def _ex5(eps: float = 0.1, **_):
    seq = systems.stationary_sequence(eps)
    part = IntervalPartition((0, 1), 0)
    expected = {
        (0, 1, 2): 1.0 / 3.0 - eps,
        (0, 1): 1.0 / 3.0,
        (0, 2): 2.0 / 3.0 - eps,
        (1, 2): 2.0 / 3.0 - eps,
    }
    rows, checks = [], []
    for trees, value in expected.items():
        report = rate_multi(seq, part, [systems.root_trees(trees)])
        a = report.profiles[0].matrices[0]
        rows.append({"trees": list(trees), "rho_multi": report.rate_estimate, "A": a.tolist()})
        checks.append(Check(f"rho_multi{list(trees)}", report.rate_estimate, value, FORMULA_TOLERANCE))
    a = np.asarray(rows[0]["A"])
    row = np.array([1.0 / 3.0, min(1.0 / 3.0, 2.0 / 3.0 - eps), min(1.0 / 3.0, eps)])
    checks.append(Check("A rows", float(np.abs(a - row[None, :]).max()), 0.0, FORMULA_TOLERANCE))
    return rows, checks, {"eps": eps}


def _ex6(n: int = 4, gamma: float = 0.3, q: int = 3, **_):
    seq = systems.chain_sequence(n, gamma)
    T = n + q - 2
    ms = systems.chain_trees(n, q)
    extracted = extract_alpha_matrix(seq, ms)
    pattern = example6_profile(n, q, gamma)
    part, copies = replicate_schedule(seq, ms)
    report = rate_multi(seq, part, copies)
    closed = lemma4_closed_form(n, q, gamma)
    spectral = spectral_rate_periodic(seq)
    gap = max(float(np.abs(x - y).max()) for x, y in zip(extracted.matrices, pattern.matrices))
    rows = [{"n": n, "q": q, "gamma": gamma, "rho_multi": report.rate_estimate,
             "rho_closed_form": closed, "rho_spectral": spectral}]
    checks = [
        Check("extracted A equals pattern", gap, 0.0, 1e-12),
        Check("rho_multi", report.rate_estimate, closed, FORMULA_TOLERANCE),
        Check("product path", multi_tree_factor(pattern), closed**T, 1e-10),
        Check("rho_spectral", spectral, 1.0 - gamma, FORMULA_TOLERANCE),
        Check("rho_spectral <= rho_multi", spectral, report.rate_estimate, SOUNDNESS_SLACK, "le"),
    ]
    return rows, checks, {"n": n, "q": q, "gamma": gamma}


def _ex55(gamma: float = 0.4, **_):
    prof = systems.branch_profiles(gamma)
    r1 = profile_rate(prof["single"])
    r2 = profile_rate(prof["two_trees"])
    r3 = profile_rate(prof["three_populations"])
    seq = systems.branch_sequence(gamma)
    spectral = spectral_rate_periodic(seq)
    rows = [{"gamma": gamma, "rho_1": r1, "rho_2": r2, "rho_3": r3, "rho_spectral": spectral}]
    checks = [
        Check("rho_1", r1, (1 - gamma**3) ** 0.2, FORMULA_TOLERANCE),
        Check("rho_2", r2, (1 - gamma**5) ** 0.2, FORMULA_TOLERANCE),
        Check("rho_3", r3, (1 - gamma**4 * (2 - gamma)) ** 0.2, FORMULA_TOLERANCE),
        Check("rho_1 <= rho_3", r1, r3, 1e-12, "le"),
        Check("rho_3 <= rho_2", r3, r2, 1e-12, "le"),
        Check("rho_spectral <= rho_1", spectral, r1, SOUNDNESS_SLACK, "le"),
    ]
    return rows, checks, {"gamma": gamma}


def crossover_threshold(gamma: float) -> float:
    """Exact ``eta`` below which three populations beat the single tree."""
    return gamma / math.sqrt(1.0 - 2.0 * gamma * (1.0 - gamma))


def stated_threshold(gamma: float) -> float:
    """Smaller sufficient ``eta`` threshold ``gamma / sqrt(1 + 2 gamma (1 - gamma))``."""
    return gamma / math.sqrt(1.0 + 2.0 * gamma * (1.0 - gamma))


def _ex8(gamma: float = 0.4, eta: float = 0.2, **_):
    prof = systems.branch_profiles(gamma, eta)
    r1 = profile_rate(prof["single"])
    r3 = profile_rate(prof["three_populations"])
    seq = systems.branch_sequence(gamma, eta)
    spectral = spectral_rate_periodic(seq)
    rows = [{"gamma": gamma, "eta": eta, "rho_1": r1, "rho_3": r3, "rho_spectral": spectral,
             "stated_threshold": stated_threshold(gamma),
             "exact_threshold": crossover_threshold(gamma)}]
    checks = [
        Check("rho_1", r1, (1 - eta**2 * gamma**3) ** 0.2, FORMULA_TOLERANCE),
        Check("rho_3", r3, (1 - gamma**4 * (gamma + 2 * eta**2 * (1 - gamma))) ** 0.2,
              FORMULA_TOLERANCE),
        Check("rho_spectral <= min(rho_1, rho_3)", spectral, min(r1, r3), SOUNDNESS_SLACK, "le"),
    ]
    if eta < stated_threshold(gamma):
        checks.append(Check("rho_3 < rho_1", r3, r1, 0.0, "lt"))
    return rows, checks, {"gamma": gamma, "eta": eta}


DELAY_REFERENCE = {
    "sima": (1, 0.5, 0.0),
    "simb": (3, 7 ** (1 / 3) / 2, 0.5),
    "simc": (2, math.sqrt(7) / (2 * math.sqrt(2)), 0.5),
    "simd": (None, None, 1.0),
}


def delay_row(name: str) -> dict:
    seq = systems.delay_system(name)
    part = sequential_index(seq)
    no_schedule_roots = []
    for root in range(seq.n):
        try:
            find_tree_schedule(seq, (0, 4 * seq.n * seq.n), root)
        except NoSchedule:
            no_schedule_roots.append(root)
    return {
        "system": name,
        "index": None if part is None else part.max_gap,
        "rho_bound": None if part is None else rate_single(seq, part).rate_estimate,
        "rho_spectral": spectral_rate_periodic(seq),
        "roots_without_schedule": no_schedule_roots,
    }


def _delays(**_):
    rows, checks = [], []
    for name, (index, bound, rho) in DELAY_REFERENCE.items():
        row = delay_row(name)
        rows.append(row)
        if index is None:
            checks.append(Check(f"{name} roots without schedule",
                                len(row["roots_without_schedule"]), 4, 0))
        else:
            checks.append(Check(f"{name} index", row["index"] if row["index"] else -1, index, 0))
            checks.append(Check(f"{name} rho_bound", row["rho_bound"], bound, FORMULA_TOLERANCE))
        checks.append(Check(f"{name} rho_spectral", row["rho_spectral"], rho, FORMULA_TOLERANCE))
    return rows, checks, {}


EXAMPLES: dict = {
    "ex1": _ex1,
    "ex2": _ex2,
    "ex3": _ex3,
    "ex35": _ex35,
    "ex5": _ex5,
    "ex6": _ex6,
    "ex55": _ex55,
    "ex8": _ex8,
    "delays": _delays,
}


def run_example(name: str, **params) -> ExperimentResult:
    """
    Run a named example.

    Parameters (all optional): ``eps`` in [0, 1/3]; ``gamma`` in (0, 1) (in
    (0, 1/2) for ex55/ex8); ``eta`` in [0, 1]; ``n >= 2``; ``q >= 1``;
    ``seed``, ``horizon``, ``samples``, ``trials``.

    Raises
    ------
    UnknownExample, ParamOutOfRange
    """
    try:
        fn: Callable = EXAMPLES[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None
    params = {k: v for k, v in params.items() if v is not None}
    if "gamma" in params and not 0.0 < params["gamma"] < 1.0:
        raise ParamOutOfRange(f"gamma={params['gamma']} outside (0, 1)")
    if "q" in params and params["q"] < 1:
        raise ParamOutOfRange("q must be at least 1")
    start = time.perf_counter()
    rows, checks, used = fn(**params)
    elapsed = time.perf_counter() - start
    return ExperimentResult(name, rows, checks, _metadata(**used), elapsed)
