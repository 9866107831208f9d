"""Genetic algorithms for and inspired by quantum computing."""
