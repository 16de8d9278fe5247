"""Figure rendering for readtask report, pattern, and feature files."""

__version__ = "0.1.0"
