"""Volumetric lung-CT analysis and multitask-training toolkit."""

__version__ = "0.1.0"
