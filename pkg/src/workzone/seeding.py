"""Per-item seed derivation.

Hashing (master_seed, item_id) gives every image its own PCG64 stream,
so outputs depend only on the pair and never on processing order,
worker count, or how many items precede it.
"""
from __future__ import annotations

from hashlib import blake2b


def derive_seed(master_seed: int, item_id: str) -> int:
    h = blake2b(f"{master_seed}:{item_id}".encode("utf-8"), digest_size=8)
    return int.from_bytes(h.digest(), "big")
