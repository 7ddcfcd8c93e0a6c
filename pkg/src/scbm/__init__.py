"""Scenario-based cognitive classification from driving-video embeddings."""

__version__ = "0.1.0"
