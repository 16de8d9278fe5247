"""Reading-task decoding from co-registered eye-tracking and EEG recordings."""

__version__ = "0.1.0"

# Version of every JSON artifact this package writes (reports, patterns,
# serialized models, corpus manifests). Bump on any breaking schema change.
SCHEMA_VERSION = 1
