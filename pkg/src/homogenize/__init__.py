"""Periodic homogenization of conductivities."""

__version__ = "0.1.0"
