"""Deterministic seed derivation for nested, order-independent work items.

Every randomized step derives its own seed from the master seed plus a
string path (subject id, run index, ...). Work items can then execute in
any order, or concurrently, without changing results.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, *parts: object) -> int:
    """Hash (master_seed, *parts) into a 64-bit seed.

    Parts are joined by their repr, so ("a", 1) and ("a1",) hash differently.
    """
    text = repr(int(master_seed)) + "\x1f" + "\x1f".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derived_rng(master_seed: int, *parts: object) -> np.random.Generator:
    """Generator seeded by :func:`derive_seed`."""
    return np.random.default_rng(derive_seed(master_seed, *parts))
