"""Executable checks for fuzzy metric spaces: t-norms, GV axioms, sequence
classification, cover refinement and catalogued Lebesgue certificates."""

__version__ = "0.1.0"
