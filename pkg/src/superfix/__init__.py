"""Executable checks for fixed-point results in super-metric spaces."""

__version__ = "0.1.0"
