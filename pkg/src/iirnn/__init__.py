"""Inter-intra RNN session-based recommendation toolkit."""

__version__ = "0.1.0"
