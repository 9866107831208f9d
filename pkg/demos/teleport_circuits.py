"""Decode the two known teleporters, then let the GA shrink the 11-gate one."""
import numpy as np

from qevo.circga import codon, teleport

for name, text in [("reference", codon.REFERENCE_11_GATE), ("optimized", codon.OPTIMIZED_8_GATE)]:
    circ = codon.decode(text)
    print(f"{name:9s} {text}  {circ.gate_count} gates  {circ.describe()}")
    print("          teleports 100 random inputs:", teleport.is_correct(text, 100, np.random.default_rng(0)))

# a smaller population than the full 5000 keeps this demo quick
params = teleport.CircuitGAParams(population_size=2000, max_generations=300, target_gates=8)
res = teleport.run_circuit_ga(params, seed=0, initial=codon.REFERENCE_11_GATE)
print("GA result", res.best_string, res.best_gate_count, "gates, correct:", res.correct)
print("          ", codon.decode(res.best).describe())
