"""Portable seeded PRNG used for every data split.

SplitMix64 (Steele, Lea & Flood) is used so that splits can be reproduced
bit-for-bit by any implementation: the state advances by the golden-gamma
constant and each output is the standard 64-bit finalizer of the state.
Bounded integers use rejection sampling; shuffles are Fisher-Yates from the
last index down.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed=0):
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def randbelow(self, n):
        """Uniform integer in ``[0, n)`` without modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def random(self):
        """Uniform float in ``[0, 1)`` from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, items):
        """Return a shuffled copy of ``items``."""
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.randbelow(i + 1)
            out[i], out[j] = out[j], out[i]
        return out


def split_fraction(items, fraction, seed):
    """Shuffle ``items`` and cut off the first ``round(fraction * n)``.

    Returns ``(head, tail)``; order inside each part is the shuffled order.
    """
    shuffled = SplitMix64(seed).shuffle(items)
    k = int(round(fraction * len(shuffled)))
    return shuffled[:k], shuffled[k:]
