"""Coordinated active/reactive scheduling for off-grid power-to-hydrogen plants."""

__version__ = "0.1.0"
