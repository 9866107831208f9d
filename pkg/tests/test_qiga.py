import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qevo.qiga import cga, knapsack, qiga
from qevo.qiga.knapsack import KnapsackInstance

S2 = 1 / math.sqrt(2)


def brute_force(inst):
    X = np.array(list(itertools.product([0, 1], repeat=inst.m)))
    w, p = X @ inst.weights, X @ inst.profits
    ok = w <= inst.capacity
    return float(p[ok].max())


def repair_oracle(x, inst, remove_order, add_order):
    """The repair procedure as a plain loop over explicit item orders."""
    x = list(map(int, x))
    w, C = inst.weights, inst.capacity
    load = lambda: sum(w[i] for i in range(inst.m) if x[i])
    if load() > C:
        for i in remove_order:
            if x[i]:
                x[i] = 0
                if load() <= C:
                    break
    for j in add_order:
        if not x[j]:
            x[j] = 1
            if load() > C:
                x[j] = 0
                break
    return np.array(x)


def decode_oracle(v, inst, items):
    lst, left, x = list(items), inst.capacity, np.zeros(inst.m, dtype=int)
    for k in v:
        item = lst.pop(k - 1)
        if inst.weights[item] <= left:
            x[item] = 1
            left -= inst.weights[item]
    return x


# ---- instances ------------------------------------------------------------

def test_generated_instance_shape():
    inst = knapsack.generate_instance(100, seed=0)
    assert np.allclose(inst.profits - inst.weights, 5)
    assert inst.capacity / inst.weights.sum() == 0.5
    assert np.all((inst.weights >= 1) & (inst.weights < 10))
    assert not np.all(np.diff(inst.weights) >= 0)  # not sorted


def test_single_item_never_fits():
    inst = KnapsackInstance([4.0], [9.0], 2.0)
    assert knapsack.repair([1], inst, "random", 0).tolist() == [0]
    assert knapsack.repair([1], inst, "greedy").tolist() == [0]
    assert knapsack.decode_ordinal([1], inst).tolist() == [0]
    assert knapsack.decode_ordinal([1], KnapsackInstance([1.0], [6.0], 2.0)).tolist() == [1]


def test_instance_roundtrip(tmp_path):
    inst = knapsack.generate_instance(7, seed=3)
    inst.dump(tmp_path / "k.txt")
    back = KnapsackInstance.load(tmp_path / "k.txt")
    assert np.array_equal(back.weights, inst.weights) and back.capacity == inst.capacity
    (tmp_path / "bad.txt").write_text("3 10\n1 2\n")
    with pytest.raises(ValueError):
        KnapsackInstance.load(tmp_path / "bad.txt")


def test_instance_validation():
    with pytest.raises(ValueError):
        KnapsackInstance([0.0], [1.0], 1.0)
    with pytest.raises(ValueError):
        KnapsackInstance([1.0], [1.0], 0.0)
    with pytest.raises(ValueError):
        knapsack.generate_instance(0)


# ---- profit, penalties ----------------------------------------------------

def test_profit_values():
    inst = knapsack.generate_instance(6, seed=1)
    assert knapsack.profit(np.zeros(6), inst) == 0
    e = np.eye(6, dtype=int)
    assert np.allclose(knapsack.profit(e, inst), inst.profits)


def test_penalties():
    inst = KnapsackInstance([2.0, 3.0, 4.0], [7.0, 8.0, 9.0], 5.0)
    rho = 3.5
    x = np.array([1, 1, 1])  # overflow d = 4
    d = 4.0
    assert knapsack.penalty_fitness(x, inst, 2) == pytest.approx(24 - rho * d)
    assert knapsack.penalty_fitness(x, inst, 1) == pytest.approx(24 - math.log2(1 + rho * d))
    assert knapsack.penalty(x, inst, 3) == pytest.approx(knapsack.penalty(x, inst, 2) ** 2)
    for k in (1, 2, 3):
        assert knapsack.penalty_fitness([1, 1, 0], inst, k) == 15
    with pytest.raises(ValueError):
        knapsack.penalty(x, inst, 4)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0 / 3.5, 50))
def test_linear_penalty_dominates_log(d):
    inst = KnapsackInstance([1.0], [4.5], 1.0)
    x = np.array([[1]])
    over = KnapsackInstance([1.0 + d], [4.5 + 3.5 * d], 1.0)
    assert knapsack.penalty(x, over, 2)[0] >= knapsack.penalty(x, over, 1)[0]
    assert knapsack.penalty(x, inst, 2)[0] == 0


# ---- repair ---------------------------------------------------------------

def test_greedy_repair_matches_loop():
    rng = np.random.default_rng(0)
    for _ in range(100):
        inst = knapsack.generate_instance(int(rng.integers(1, 25)), seed=rng)
        x = rng.integers(0, 2, inst.m)
        order = inst.greedy_order()
        want = repair_oracle(x, inst, order[::-1], order)
        assert np.array_equal(knapsack.repair(x, inst, "greedy"), want)


def test_random_repair_matches_loop_with_same_orders():
    rng = np.random.default_rng(1)
    for k in range(100):
        inst = knapsack.generate_instance(int(rng.integers(1, 25)), seed=rng)
        x = rng.integers(0, 2, inst.m)
        draw = np.random.default_rng(k)
        rem = np.argsort(draw.random((1, inst.m)), axis=1)[0]
        add = np.argsort(draw.random((1, inst.m)), axis=1)[0]
        assert np.array_equal(knapsack.repair(x, inst, "random", k), repair_oracle(x, inst, rem, add))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**32 - 1), st.sampled_from(["random", "greedy"]))
def test_repair_always_feasible(m, seed, mode):
    rng = np.random.default_rng(seed)
    inst = knapsack.generate_instance(m, seed=rng)
    X = rng.integers(0, 2, (20, m))
    R = knapsack.batch_repair(X, inst, mode, rng)
    assert np.all(knapsack.is_feasible(R, inst))
    feasible = knapsack.is_feasible(X, inst)
    # a feasible input loses nothing in the removal phase
    assert np.all(R[feasible] >= X[feasible])


def test_repair_bad_mode():
    with pytest.raises(ValueError):
        knapsack.repair([1], knapsack.generate_instance(1, 0), "best")


# ---- ordinal decoding -----------------------------------------------------

def test_ordinal_ones_greedy_is_greedy_packing():
    inst = KnapsackInstance([5, 1, 2, 4, 3], [6, 6, 7, 9, 8], 7.0)
    # ratios 1.2, 6, 3.5, 2.25, 2.67 -> order 1, 2, 4, 3, 0; packs 1, 2, 4 (w 6), skips 3 and 0
    assert knapsack.decode_ordinal(np.ones(5, int), inst, "greedy").tolist() == [0, 1, 1, 0, 1]
    assert knapsack.greedy_solution(inst).tolist() == [0, 1, 1, 0, 1]


def test_decode_matches_list_oracle():
    rng = np.random.default_rng(2)
    for _ in range(50):
        inst = knapsack.generate_instance(int(rng.integers(1, 20)), seed=rng)
        V = knapsack.random_ordinal(5, inst.m, rng)
        for mode, items in (("random", np.arange(inst.m)), ("greedy", inst.greedy_order())):
            got = knapsack.batch_decode_ordinal(V, inst, mode)
            for v, g in zip(V, got):
                assert np.array_equal(g, decode_oracle(v, inst, items))
                assert knapsack.is_feasible(g, inst)


def test_ordinal_range_checked():
    inst = knapsack.generate_instance(3, seed=0)
    with pytest.raises(ValueError):
        knapsack.decode_ordinal([1, 3, 1], inst)
    with pytest.raises(ValueError):
        knapsack.decode_ordinal([0, 1, 1], inst)
    V = knapsack.random_ordinal(1000, 6, np.random.default_rng(0))
    knapsack.check_ordinal(V)
    assert V[:, 0].max() == 6 and V[:, -1].max() == 1


# ---- observation and update ----------------------------------------------

def test_observe_extremes():
    rng = np.random.default_rng(0)
    ones = np.tile([1.0, 0.0], (50, 1))
    assert qiga.observe(ones, rng).sum() == 0
    assert qiga.observe(ones[:, ::-1], rng).sum() == 50


def test_observe_marginals():
    rng = np.random.default_rng(1)
    th = np.array([0.2, 0.7, 1.1])
    Q = np.stack([np.cos(th), np.sin(th)], -1)
    n = 10_000
    X = qiga.observe(np.broadcast_to(Q, (n, 3, 2)), rng)
    p = np.sin(th) ** 2
    sigma = np.sqrt(p * (1 - p) / n)
    assert np.all(np.abs(X.mean(0) - p) < 3 * sigma)
    uni = qiga.observe(qiga.uniform_population(n, 1), rng).mean()
    assert abs(uni - 0.5) < 0.02


def test_observe_argmax_rules():
    assert qiga.observe_argmax(np.array([[0.6, 0.8]])).tolist() == [1]
    assert qiga.observe_argmax(qiga.uniform_population(1, 5))[0].tolist() == [0] * 5


@pytest.mark.parametrize("m", [1, 4, 10])
def test_observe_argmax_indexes_largest_product_term(m):
    rng = np.random.default_rng(m)
    th = rng.uniform(-np.pi, np.pi, m)
    Q = np.stack([np.cos(th), np.sin(th)], -1)
    amp = np.array([1.0])
    for a0, a1 in Q:  # qubit 1 is the most significant factor
        amp = np.kron(amp, [a0, a1])
    best = int(np.argmax(np.abs(amp) ** 2))
    bits = [int(c) for c in format(best, f"0{m}b")]
    assert qiga.observe_argmax(Q).tolist() == bits


def test_update_examples():
    Q = np.array([[S2, S2], [S2, S2]])
    out = qiga.update(Q, np.array([0, 0]), np.array([1, 0]))
    assert out[0, 1] ** 2 > 0.5
    assert np.allclose(out[1], Q[1])
    assert np.allclose(out[0], [np.cos(np.pi / 4 + 0.025), np.sin(np.pi / 4 + 0.025)])
    # a fitter x pulls toward its own bits
    out = qiga.update(Q, np.array([0, 1]), np.array([1, 0]), fx=5.0, fb=1.0)
    assert out[0, 0] ** 2 > 0.5 and out[1, 1] ** 2 > 0.5


def test_update_second_quadrant_sign():
    # α0 α1 < 0: growing |α1|² needs a negative angle
    th = np.array([2.0])
    Q = np.stack([np.cos(th), np.sin(th)], -1)
    out = qiga.update(Q, np.array([0]), np.array([1]))
    assert out[0, 1] ** 2 > Q[0, 1] ** 2
    assert np.allclose(qiga.rotation_angles(Q, np.array([1]), np.array([True])), -0.025)


def test_update_on_axis_is_frozen():
    Q = np.array([[1.0, 0.0]])
    assert np.array_equal(qiga.update(Q, np.array([0]), np.array([1])), Q)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_update_preserves_norm(seed):
    rng = np.random.default_rng(seed)
    th = rng.uniform(-np.pi, np.pi, (4, 12))
    Q = np.stack([np.cos(th), np.sin(th)], -1)
    for _ in range(50):
        x, b = rng.integers(0, 2, (4, 12)), rng.integers(0, 2, 12)
        Q = qiga.update(Q, x, b, rng.random(4), 0.5)
    assert np.allclose((Q ** 2).sum(-1), 1, atol=1e-12)


def test_update_length_mismatch():
    with pytest.raises(ValueError):
        qiga.update(np.full((3, 2), S2), np.zeros(3), np.zeros(4))


# ---- QIGA runs ------------------------------------------------------------

def test_qiga_history_monotone_and_feasible():
    inst = knapsack.generate_instance(30, seed=4)
    seen = []
    res = qiga.run_qiga(inst, 5, 60, seed=1, callback=lambda t, Q, X: seen.append(
        (np.allclose((Q ** 2).sum(-1), 1, atol=1e-12), knapsack.is_feasible(X, inst).all())))
    assert all(a and b for a, b in seen) and len(seen) == 60
    assert np.all(np.diff(res.history) >= 0)
    assert knapsack.is_feasible(res.best, inst)
    assert knapsack.profit(res.best, inst) == pytest.approx(res.best_profit)


def test_qiga_deterministic():
    inst = knapsack.generate_instance(20, seed=0)
    a = qiga.run_qiga(inst, 3, 30, seed=7)
    b = qiga.run_qiga(inst, 3, 30, seed=7)
    assert np.array_equal(a.history, b.history) and np.array_equal(a.best, b.best)


@pytest.mark.parametrize("mode", ["random", "greedy"])
def test_qiga_small_instance_optimum(mode):
    hits = 0
    for s in range(5):
        inst = knapsack.generate_instance(10, seed=500 + s)
        res = qiga.run_qiga(inst, 10, 200, seed=s, repair_mode=mode)
        hits += res.best_profit == pytest.approx(brute_force(inst))
    assert hits >= 3


def test_qiga_argmax_mode_runs():
    inst = knapsack.generate_instance(15, seed=2)
    res = qiga.run_qiga(inst, 2, 40, seed=0, observe_mode="argmax")
    assert knapsack.is_feasible(res.best, inst)
    with pytest.raises(ValueError):
        qiga.run_qiga(inst, 2, 5, observe_mode="best")


# ---- CGA baselines --------------------------------------------------------

@pytest.mark.parametrize("variant", cga.VARIANTS)
def test_cga_variant_reports_feasible_best(variant):
    inst = knapsack.generate_instance(25, seed=9)
    res = cga.run_cga(inst, variant, seed=0, params=cga.CGAParams(population_size=30, generations=40))
    assert knapsack.is_feasible(res.best, inst)
    assert knapsack.profit(res.best, inst) == pytest.approx(res.best_profit)
    assert np.all(np.diff(res.history) >= 0)
    assert res.best_profit <= brute_force(knapsack.generate_instance(12, seed=9)) or inst.m > 12


def test_cga_reaches_optimum_on_small_instance():
    inst = knapsack.generate_instance(12, seed=21)
    opt = brute_force(inst)
    best = max(cga.run_cga(inst, v, seed=s, params=cga.CGAParams(generations=100)).best_profit
               for v in cga.VARIANTS for s in range(3))
    assert best == pytest.approx(opt)


def test_cga_penalized_fitness_can_exceed_feasible_profit():
    inst = knapsack.generate_instance(30, seed=3)
    res = cga.run_cga(inst, "pen1", seed=0, params=cga.CGAParams(generations=30))
    assert res.best_fitness >= res.best_profit


def test_one_point_crossover_and_selection():
    rng = np.random.default_rng(0)
    a, b = np.zeros((100, 8), int), np.ones((100, 8), int)
    c1, c2 = cga.one_point_crossover(a, b, rng)
    assert np.all(c1 + c2 == 1)
    assert np.all(np.diff(c1, axis=1) >= 0)  # one switch from a to b
    assert np.all(c1[:, 0] == 0) and np.all(c1[:, -1] == 1)
    assert np.array_equal(cga.selection_weights(np.array([-2.0, 1.0])), [0.0, 3.0])
    assert np.array_equal(cga.selection_weights(np.array([2.0, 1.0])), [2.0, 1.0])


def test_cga_validation():
    inst = knapsack.generate_instance(5, seed=0)
    with pytest.raises(ValueError):
        cga.run_cga(inst, "pen4")
    with pytest.raises(ValueError, match="population_size"):
        cga.CGAParams(population_size=1)


def test_cga_deterministic():
    inst = knapsack.generate_instance(20, seed=1)
    p = cga.CGAParams(generations=20)
    for v in ("rep1", "dec1"):
        a, b = cga.run_cga(inst, v, 3, p), cga.run_cga(inst, v, 3, p)
        assert np.array_equal(a.history, b.history)
