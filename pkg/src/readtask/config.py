"""Flat key/value run-configuration files.

Grammar (documented contract, one assignment per line)::

    # comment
    runs = 50
    features = "sent_gaze"       # quoted or bare strings
    balanced = true              # true/false
    fractions = 0.1, 0.2, 0.5    # comma list -> python list

Keys use the CLI flag names with dashes replaced by underscores; explicit
command-line flags override file values.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ParameterError


def _parse_scalar(text: str):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    lowered = text.lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_value(text: str):
    if "," in text:
        return [_parse_scalar(part) for part in text.split(",") if part.strip()]
    return _parse_scalar(text)


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ParameterError(f"config file {path} not found")
    values: dict[str, object] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
        key, text = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key.isidentifier():
            raise ParameterError(f"{path}:{lineno}: bad key {key!r}")
        values[key] = parse_value(text)
    return values
