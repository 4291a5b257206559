import math

import numpy as np
import pytest
import sympy as sp

from consensus_rate import DegenerateDraw, ParamOutOfRange, UnknownExample
from consensus_rate import experiments
from consensus_rate.experiments import (
    EXAMPLES,
    Check,
    crossover_threshold,
    delay_row,
    lemma4_sweep,
    random_histogram,
    random_trial,
    run_example,
    stated_threshold,
)

# frozen output of random_histogram(1, seed=0)
GOLDEN_RATIO_SEED0 = 0.15020451847391528


def test_check_relations():
    assert Check("a", 1.0, 1.0 + 1e-10, 1e-9).passed
    assert not Check("a", 1.0, 1.1, 1e-9).passed
    assert Check("b", 0.5, 0.5, 0.0, "le").passed
    assert not Check("c", 0.5, 0.5, 0.0, "lt").passed
    assert Check("c", 0.4, 0.5, 0.0, "lt").to_dict()["pass"] is True


def test_unknown_example():
    with pytest.raises(UnknownExample):
        run_example("ex99")


@pytest.mark.parametrize("params", [{"gamma": 0.0}, {"gamma": 1.5}, {"q": 0}])
def test_parameter_ranges(params):
    with pytest.raises(ParamOutOfRange):
        run_example("ex6", **params)


def test_eps_range():
    with pytest.raises(ParamOutOfRange):
        run_example("ex3", eps=0.5)


def test_eta_range():
    with pytest.raises(ParamOutOfRange):
        run_example("ex8", eta=1.5)


@pytest.mark.parametrize("name", ["ex1", "ex3", "ex35", "ex5", "ex6", "ex55", "ex8"])
def test_examples_pass(name):
    result = run_example(name)
    assert result.rows and result.passed, [c.to_dict() for c in result.checks if not c.passed]


def test_example_results_are_serialisable():
    for name in EXAMPLES:
        doc = run_example(name).to_dict()
        assert doc["name"] == name and "runtime" not in doc
        assert doc["metadata"]["version"]
        assert isinstance(doc["pass"], bool)


def test_ex3_values():
    row = run_example("ex3", eps=0.1).rows[0]
    assert row["rho_single"] == pytest.approx(2 / 3)
    assert row["rho_multi3"] == pytest.approx(0.23333333333, abs=1e-9)
    assert row["rho_spectral"] == pytest.approx(0.23333333333, abs=1e-9)


def test_ex2_spectral_value_is_the_exact_eigenvalue():
    # the stated reference sqrt(5/8) disagrees with the eigenvalues of the
    # period product, which give 1/sqrt(2); the check reports the mismatch
    result = run_example("ex2")
    row = result.rows[0]
    assert row["rho_single"] == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
    assert row["rho_spectral"] == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    failed = {c.name for c in result.checks if not c.passed}
    assert failed == {"rho_spectral", "rho_empirical"}


def test_ex55_values():
    row = run_example("ex55", gamma=0.4).rows[0]
    assert row["rho_1"] == pytest.approx((1 - 0.064) ** 0.2, abs=1e-12)
    assert row["rho_2"] == pytest.approx((1 - 0.01024) ** 0.2, abs=1e-12)
    assert row["rho_3"] == pytest.approx((1 - 0.0256 * 1.6) ** 0.2, abs=1e-12)


def test_ex8_thresholds():
    g = 0.4
    assert stated_threshold(g) < crossover_threshold(g)
    # at the exact threshold the two rates coincide
    result = run_example("ex8", gamma=g, eta=crossover_threshold(g))
    row = result.rows[0]
    assert row["rho_1"] == pytest.approx(row["rho_3"], abs=1e-12)
    # between the two thresholds the three-population bound still wins
    eta = 0.5 * (stated_threshold(g) + crossover_threshold(g))
    row = run_example("ex8", gamma=g, eta=eta).rows[0]
    assert row["rho_3"] < row["rho_1"]


def test_delay_rows():
    assert delay_row("sima")["index"] == 1
    row = delay_row("simb")
    assert row["index"] == 3
    assert row["rho_bound"] == pytest.approx(7 ** (1 / 3) / 2, abs=1e-12)
    assert row["rho_spectral"] == pytest.approx(0.5, abs=1e-9)
    row = delay_row("simc")
    assert row["index"] == 2
    assert row["rho_bound"] == pytest.approx(math.sqrt(7) / (2 * math.sqrt(2)), abs=1e-12)
    row = delay_row("simd")
    assert row["index"] is None and row["roots_without_schedule"] == [0, 1, 2, 3]
    assert row["rho_spectral"] == pytest.approx(1.0, abs=1e-9)


def test_simc_spectral_rate_of_displayed_matrix():
    # characteristic polynomial (z - 1)(8 z^3 + 6 z^2 - 1) / 8: the cubic's
    # complex pair has modulus above 1/2
    h, q = sp.Rational(1, 2), sp.Rational(1, 4)
    m = sp.Matrix([[q, 0, q, h], [h, 0, 0, h], [1, 0, 0, 0], [0, 1, 0, 0]])
    z = sp.Symbol("z")
    roots = sp.Poly(m.charpoly(z).as_expr(), z).nroots(n=30)
    second = sorted((abs(complex(r)) for r in roots), reverse=True)[1]
    assert delay_row("simc")["rho_spectral"] == pytest.approx(second, abs=1e-12)
    assert second > 0.6


def test_histogram_basic_invariants():
    report = random_histogram(200, seed=3)
    assert sum(report.counts) == 200 == report.trials
    assert len(report.bin_edges) == 21 and report.bin_edges[-1] == 1.0
    assert all(0 < r <= 1 + 1e-9 for r in report.ratios)
    assert report.max_ratio == max(report.ratios)
    assert report.mass_between(0.0, 1.0) == 1.0


def test_histogram_golden_single_trial():
    report = random_histogram(1, seed=0)
    assert report.ratios[0] == GOLDEN_RATIO_SEED0
    assert report.counts[3] == 1


def test_histogram_is_seed_deterministic():
    assert random_histogram(50, seed=9) == random_histogram(50, seed=9)
    assert random_histogram(50, seed=9) != random_histogram(50, seed=10)


def test_histogram_rejects_zero_trials():
    with pytest.raises(ParamOutOfRange):
        random_histogram(0)


def test_random_trial_redraws_zero_rows():
    class Stub:
        def __init__(self):
            self.calls = 0

        def uniform(self, size):
            self.calls += 1
            out = np.full(size, 0.5)
            if self.calls == 1:
                out[0] = 0.0
            return out

    rho, bound, redraws = random_trial(Stub())
    assert redraws == 1 and rho <= bound


def test_degenerate_draws_give_up():
    class Zero:
        def uniform(self, size):
            return np.zeros(size)

    with pytest.raises(DegenerateDraw):
        random_trial(Zero())


def test_sweep_rows_and_curves():
    result = lemma4_sweep(3, 3, [0.2, 0.5])
    assert result.passed and len(result.rows) == 6
    g = 0.5
    by_q = {r["q"]: r["rho_q"] for r in result.rows if r["gamma"] == g}
    assert by_q[1] == pytest.approx(math.sqrt(1 - g**2))
    assert by_q[2] == pytest.approx((1 - 3 * g**2 + 2 * g**3) ** (1 / 3))
    assert by_q[3] == pytest.approx((1 - 3 * g**4 + 8 * g**3 - 6 * g**2) ** 0.25)
    assert result.to_csv().splitlines()[0] == "gamma,q,rho_q,one_minus_gamma,product_path"


def test_sweep_at_gamma_one():
    result = lemma4_sweep(4, 3, [1.0])
    assert all(r["rho_q"] == 0.0 for r in result.rows)


def test_sweep_limit():
    assert abs(experiments.lemma4_closed_form(3, 200, 0.5) - 0.5) <= 0.02
    with pytest.raises(ParamOutOfRange):
        lemma4_sweep(1, 3, [0.5])
