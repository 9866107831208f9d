"""QIGA against the eight classical GA variants on one 100-item instance."""
from qevo.qiga import cga, knapsack, qiga

inst = knapsack.generate_instance(100, seed=0)
gens = 200
print(f"m={inst.m} capacity={inst.capacity:.2f} greedy={knapsack.profit(knapsack.greedy_solution(inst), inst):.2f}")
print(f"{'QIGA pop 10':12s} {qiga.run_qiga(inst, 10, gens, seed=0).best_profit:.2f}")
print(f"{'QIGA pop 1':12s} {qiga.run_qiga(inst, 1, gens, seed=0).best_profit:.2f}")
for v in cga.VARIANTS:
    r = cga.run_cga(inst, v, seed=0, params=cga.CGAParams(generations=gens))
    print(f"{v:12s} {r.best_profit:.2f}")
