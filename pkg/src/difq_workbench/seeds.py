"""
Seed expansion

One run seed is expanded into independent streams with the splitmix64
finalizer, so that every module can draw its own numbers without
coordinating with the others.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z = (z + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *labels: str) -> int:
    """
    Derive a 64-bit stream seed from a run seed and a label path.

    Args:
        seed: Run seed (any integer, reduced mod 2^64)
        labels: Stream names, e.g. ("numdiff", "linearity")

    Returns:
        Deterministic 64-bit integer
    """
    state = mix64(seed & MASK64)
    for label in labels:
        for byte in label.encode("utf-8"):
            state = mix64(state ^ byte)
        state = mix64(state ^ 0xFF)
    return state


def rng(seed: int, *labels: str) -> np.random.Generator:
    """numpy Generator for the stream (seed, labels)."""
    return np.random.default_rng(derive_seed(seed, *labels))
