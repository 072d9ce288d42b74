"""Counter-based random streams with order-independent seeding.

Every random draw in the package comes from a Philox generator keyed by a
64-bit seed. Seeds for individual trials or entities are derived with
:func:`subseed`, a keyed BLAKE2b hash of ``(base, tag, index)``. A trial's
stream therefore depends only on its identity, never on which worker ran it
or in what order.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def subseed(base: int, tag: str, index: int) -> int:
    """Derive a stable 64-bit seed from a base seed, an entity tag and an index."""
    payload = f"{int(base) & _MASK64}\x1f{tag}\x1f{int(index)}".encode()
    digest = hashlib.blake2b(payload, digest_size=8, person=b"specpert").digest()
    return int.from_bytes(digest, "little")


def stream(seed: int) -> np.random.Generator:
    """Return a fresh Philox generator for ``seed`` (reduced mod 2**64)."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def uniform_open(gen: np.random.Generator, size) -> np.ndarray:
    """Uniform draws on the half-open interval (0, 1]."""
    return 1.0 - gen.random(size)


def box_muller(gen: np.random.Generator, count: int) -> np.ndarray:
    """Draw ``count`` standard normals with the Box-Muller transform.

    The transform is written out instead of calling ``gen.standard_normal``
    so the stream depends only on the uniform sequence, which Philox fixes
    across platforms and numpy versions.
    """
    half = (count + 1) // 2
    u1 = uniform_open(gen, half)
    u2 = gen.random(half)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.empty(2 * half)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:count]
