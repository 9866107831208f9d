"""Learn the Hadamard matrix from two input/output examples."""
import numpy as np

from qevo import opga

S = opga.quant02n()
res = opga.run_learning_ga(S, opga.PRESETS["table1-row1"], seed=0)
print("best error", res.best_error)
print(np.round(res.best, 4))
print("error every 20 generations:", np.round(res.history[::20], 5))
