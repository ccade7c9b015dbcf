"""Transversal lines and circles through closed space curves, with
linking-number signature checks."""

__version__ = "0.1.0"
