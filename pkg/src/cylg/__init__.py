"""Exact and numeric workbench for the genus-zero CY/LG correspondence of P1(4,4,2) and (E7~, Gmax)."""

__version__ = "0.1.0"
