"""Collapse, mutation and selection on entangled individual/fitness registers."""
import numpy as np

from qevo import qga

f = np.array([1, 0, 1, 0])
ind = qga.init_individual(4, f)
print("initial support", ind.support_pairs())
m = qga.measure_fitness(ind, rng=0)
print("observed", m.value, "-> support", m.individual.support_pairs())
mutated = qga.qga_mutate(m.individual)
print("after mutation", np.round(mutated.probabilities, 4))

ce = qga.product_state_counterexample(2, [0, 1], rng=1)
print("product state keeps the pair", ce.pair, "although f differs")

landscape = qga.hamming_landscape(6)
res = qga.run_qga(qga.QGAPopulation.uniform(8, 64, landscape), 30, 0.5, seed=0)
for g, best, support in res.history[::5]:
    print(f"generation {g:2d} best {best:4.1f} mean support {support:.1f}")
