"""Linear response of open quantum systems governed by Lindblad generators."""

__version__ = "0.1.0"
