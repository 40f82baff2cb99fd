"""Hylomorphic Q-balls of the nonlinear Klein-Gordon equation."""

__version__ = "0.1.0"
