"""Deterministic random number generation for all samplers.

The generator is SplitMix64 (Steele, Lea, Flood 2014; public domain), a
64-bit counter-based generator: the state advances by a fixed odd constant
and the output is a bijective scramble of the state. It is seedable from
any 64-bit integer, has period 2^64, and passes BigCrush. Two properties
matter here:

* the entire stream is a pure function of the seed, using only 64-bit
  integer arithmetic, so compiled batch kernels and the pure-Python
  reference sampler produce bit-identical draws;
* parallel batches get independent streams by seeding batch b with
  (base_seed + b) mod 2^64, which is how every Monte Carlo driver in this
  package derives its per-batch seeds.

Each uniform draw consumes exactly one generator step. Doubles are built
from the top 53 bits, uniform on [0, 1).
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


class SplitMix64:
    """Stream of uniform doubles on [0, 1) from a 64-bit seed."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_uint64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_uint64() >> 11) * INV_2_53


def batch_seed(base_seed: int, batch_index: int) -> int:
    """Seed of the independent stream for one batch."""
    return (base_seed + batch_index) & MASK64
