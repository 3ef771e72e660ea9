"""Numerical verification library for gauge fields whose structure group
varies over the base: Lie-group bundles in trivialized charts, group-valued
logarithmic derivatives, compatible fibre connections, and the curved
Yang-Mills Lagrangian with its instanton example."""

__version__ = "0.1.0"
