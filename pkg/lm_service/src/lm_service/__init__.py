"""HTTP scoring sidecar for causal language models."""

__version__ = "0.1.0"
