"""QAOA for unit commitment with an HHL/real-QADC transmission-cost oracle."""

__version__ = "0.1.0"
