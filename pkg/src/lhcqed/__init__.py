"""Circuit and Hamiltonian models of a transmon coupled to a left-handed metamaterial resonator."""

__version__ = "0.1.0"
