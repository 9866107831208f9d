"""Quantum-inspired GA for the 0-1 knapsack and its conventional GA baselines."""
