"""Seed derivation and generator construction for reproducible trials.

Every trial owns its own counter-based generator (numpy Philox) keyed by
a 64-bit seed derived from (master seed, parameter-point key, trial
index) via blake2b.  Because substreams are derived by hashing rather
than by drawing from a shared parent generator, results never depend on
scheduling or worker count.
"""

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def point_key(text: str) -> int:
    """64-bit fingerprint of a canonical parameter-point description."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def trial_seed(master_seed: int, key: int, trial: int) -> int:
    """Seed for one (point, trial) substream."""
    blob = b"".join(
        (v & MASK64).to_bytes(8, "little") for v in (master_seed, key, trial)
    )
    digest = hashlib.blake2b(blob, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & MASK64))
