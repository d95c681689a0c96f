"""Quantum Fisher information of two flip-flop coupled qubits under
independent Markovian decay."""

__version__ = "0.1.0"
