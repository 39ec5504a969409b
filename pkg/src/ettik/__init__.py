"""Intensional type theory kernel with funext and UIP primitives, a
homotopy certificate algebra, and a finite contextual-category
toolbench for computing extensional kernels and quotients."""

__version__ = "0.1.0"
