"""Entropy inequalities on abelian groups: exact finite-group computations,
grid and closed-form continuous densities, Ruzsa-type divergences, a registry
of checkable inequalities and an extremizer search."""

__version__ = "0.1.0"
