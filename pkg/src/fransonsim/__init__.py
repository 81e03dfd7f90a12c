"""Simulation and planning tools for a Franson two-photon interference test
of Multisimultaneity with moving (acousto-optic) beam splitters."""

__version__ = "0.1.0"
