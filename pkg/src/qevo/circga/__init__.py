"""Genetic search over quantum circuits: codon-encoded teleporters and gate-structure designs."""
