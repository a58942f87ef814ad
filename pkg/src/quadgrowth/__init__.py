"""quadgrowth: exact combinatorics and simulation of random quadrangulation growth."""

__version__ = "0.1.0"
