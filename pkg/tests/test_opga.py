import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qevo import opga
from qevo.opga import GAParams, LearningSet

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def error_oracle(A, S):
    total = 0.0
    for x, y in zip(S.inputs, S.targets):
        total += sum(abs(sum(A[i][j] * x[j] for j in range(S.n)) - y[i]) for i in range(S.n))
    return total / (S.n * S.m)


class ConstRng:
    """Stand-in generator whose uniform draws are always zero."""

    def random(self, shape):
        return np.zeros(shape)


def test_hadamard_fits_both_sets():
    assert opga.error(H, opga.quant02n()) == pytest.approx(0, abs=1e-9)
    assert opga.error(H, opga.example002()) == pytest.approx(0, abs=1e-9)


def test_error_exact_operator():
    rng = np.random.default_rng(0)
    A = rng.uniform(-1, 1, (3, 3))
    x = rng.normal(size=(4, 3))
    S = LearningSet(x, x @ A.T)
    assert opga.error(A, S) == pytest.approx(0, abs=1e-12)


def test_error_hand_value():
    S = LearningSet([[1, 0]], [[0, 1]])
    assert opga.error(np.eye(2), S) == pytest.approx(1.0)


def test_error_matches_loop_oracle():
    rng = np.random.default_rng(1)
    S = LearningSet(rng.normal(size=(5, 3)), rng.normal(size=(5, 3)))
    for _ in range(5):
        A = rng.uniform(-1, 1, (3, 3))
        assert opga.error(A, S) == pytest.approx(error_oracle(A, S), rel=1e-12)


def test_error_dimension_mismatch():
    with pytest.raises(ValueError):
        opga.error(np.eye(3), opga.quant02n())


def test_fitness_values():
    S = LearningSet([[1, 0]], [[0, 1]])
    assert opga.fitness(np.eye(2), S) == pytest.approx(math.exp(-1))
    assert opga.fitness(H, opga.quant02n()) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 5), st.floats(0, 5))
def test_fitness_monotone(a, b):
    S = LearningSet([[1.0]], [[0.0]])
    fa, fb = opga.fitness(np.array([[a]]), S), opga.fitness(np.array([[b]]), S)
    if a < b:
        assert fa > fb or math.isclose(fa, fb)


def test_crossover_identical_parents():
    A = np.random.default_rng(0).uniform(-1, 1, (3, 3))
    c1, c2 = opga.crossover(A, A, np.random.default_rng(1))
    assert np.array_equal(c1, A) and np.array_equal(c2, A)


def test_crossover_alleles_come_from_parents():
    rng = np.random.default_rng(2)
    for _ in range(20):
        A, B = rng.uniform(-1, 1, (2, 4, 4))
        for c in opga.crossover(A, B, rng):
            assert np.all((c == A) | (c == B))


def test_crossover_degenerate_rng_picks_first_parent():
    A, B = np.ones((2, 2)), -np.ones((2, 2))
    c1, c2 = opga.crossover(A, B, ConstRng())
    assert np.array_equal(c1, A)


def test_mutate_zero_number():
    A = np.random.default_rng(0).uniform(-1, 1, (2, 2))
    p = GAParams(mutation_number=0)
    assert np.array_equal(opga.mutate(A, p, np.random.default_rng(0)), A)


def test_mutate_single_entry_in_range():
    p = GAParams(mutation_number=1, mutation_prob=1.0)
    rng = np.random.default_rng(3)
    for _ in range(200):
        A = rng.uniform(-0.8, 0.8, (2, 2))
        d = opga.mutate(A, p, rng) - A
        nz = np.flatnonzero(d)
        assert len(nz) == 1
        assert 0.001 - 1e-12 <= abs(d.flat[nz[0]]) <= 0.1 + 1e-12


def test_mutate_clamps_at_one():
    p = GAParams(mutation_number=4, mutation_prob=1.0)
    # same seed on a zero matrix exposes the raw perturbation (no clamp needed there)
    delta = opga.mutate(np.zeros((2, 2)), p, np.random.default_rng(4))
    out = opga.mutate(np.ones((2, 2)), p, np.random.default_rng(4))
    assert (delta > 0).any() and (delta < 0).any()
    assert np.array_equal(out, np.minimum(1.0 + delta, 1.0))
    assert np.all(out[delta > 0] == 1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 6))
def test_mutate_changes_at_most_nm(seed, nm):
    rng = np.random.default_rng(seed)
    p = GAParams(mutation_number=nm, mutation_prob=0.7)
    A = rng.uniform(-1, 1, (3, 3))
    out = opga.mutate(A, p, rng)
    assert np.count_nonzero(out != A) <= nm
    assert np.all(np.abs(out) <= 1.0)


def test_params_validation():
    with pytest.raises(ValueError, match="elite_count"):
        GAParams(population_size=10, elite_count=10)
    with pytest.raises(ValueError, match="crossover_prob"):
        GAParams(crossover_prob=1.5)
    with pytest.raises(ValueError, match="population_size"):
        GAParams(population_size=0, elite_count=0)
    with pytest.raises(ValueError, match="perturbation"):
        GAParams(perturbation=(0.2, 0.1))


def test_learning_presets():
    r1 = opga.PRESETS["table1-row1"]
    assert (r1.generations, r1.population_size, r1.crossover_prob, r1.mutation_prob,
            r1.selection_pressure, r1.elite_count, r1.mutation_number) == \
        (100, 200, 0.85, 0.95, 0.30, 30, 1)
    assert opga.PRESETS["table1-row2"].generations == 200


def test_evaluate_sort_orders_by_error():
    rng = np.random.default_rng(5)
    pop = rng.uniform(-1, 1, (50, 2, 2))
    sorted_pop, errs = opga.evaluate_sort(pop, opga.quant02n())
    assert np.all(np.diff(errs) >= 0)
    fit = np.exp(-errs)
    assert np.all(np.diff(fit) <= 0)
    assert np.allclose(errs, [opga.error(A, opga.quant02n()) for A in sorted_pop])


def test_run_invariants():
    S = opga.quant02n()
    params = GAParams(population_size=40, generations=30, elite_count=6)
    prev = {}

    def check(t, pop, errs):
        assert pop.shape == (40, 2, 2)
        assert np.allclose(errs, [opga.error(A, S) for A in pop])
        assert np.allclose(np.exp(-errs), [opga.fitness(A, S) for A in pop])
        if "pop" in prev:
            order = np.argsort(prev["errs"], kind="stable")
            elite = prev["pop"][order][:6]
            assert np.array_equal(pop[:6], elite)
        prev["pop"], prev["errs"] = pop.copy(), errs.copy()

    res = opga.run_learning_ga(S, params, seed=3, callback=check)
    assert len(res.history) == 30
    assert np.all(np.diff(res.history) <= 0)
    assert res.best_error == pytest.approx(res.history[-1])


def test_run_is_deterministic():
    a = opga.run_learning_ga(opga.quant02n(), GAParams(generations=20), seed=9)
    b = opga.run_learning_ga(opga.quant02n(), GAParams(generations=20), seed=9)
    assert np.array_equal(a.best, b.best) and np.array_equal(a.history, b.history)


def test_learns_identity():
    S = opga.LEARNING_SETS["identity2"]()
    res = opga.run_learning_ga(S, GAParams(), seed=0)
    assert res.best_error < 0.05
    assert error_oracle(res.best, S) < 0.05
    assert np.allclose(res.best, np.eye(2), atol=0.1)


def test_example002_converges_towards_hadamard():
    res = opga.run_learning_ga(opga.example002(), opga.PRESETS["table1-row2"], seed=1)
    assert res.best_error < 0.05
    assert np.allclose(res.best, H, atol=0.1)


def test_learning_set_roundtrip(tmp_path):
    S = opga.example002()
    S.dump(tmp_path / "s.txt")
    T = LearningSet.load(tmp_path / "s.txt")
    assert np.array_equal(S.inputs, T.inputs) and np.array_equal(S.targets, T.targets)
    (tmp_path / "bad.txt").write_text("2 2\n1 2 3 4\n")
    with pytest.raises(ValueError):
        LearningSet.load(tmp_path / "bad.txt")
