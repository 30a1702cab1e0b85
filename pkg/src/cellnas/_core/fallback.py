"""Pure-Python kernels for the synthetic fitness landscape.

These are the reference implementations: the compiled extension in
``_nkcore.pyx`` must reproduce them bit-for-bit. All hashing is integer-only
(64-bit splitmix) so results are identical across platforms and languages.
"""

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixing function over a 64-bit integer."""
    x = (x + _GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def nk_affinity(symbols: bytes, seed: int, epistasis: int, salt: int) -> float:
    """Epistatic landscape value of a symbol string, in [0, 1).

    Position i contributes a pseudo-random value keyed by (seed, salt, i) and
    the symbols at positions i..i+epistasis taken cyclically; the result is
    the mean contribution. Changing one symbol therefore moves the value by
    at most (epistasis + 1) / len(symbols).
    """
    n = len(symbols)
    if n == 0:
        raise ValueError("empty symbol string")
    if epistasis < 0:
        raise ValueError("epistasis must be >= 0")
    base = splitmix64(seed & MASK64)
    base = splitmix64(base ^ (salt & MASK64))
    total = 0.0
    for i in range(n):
        h = splitmix64(base ^ i)
        for j in range(epistasis + 1):
            h = splitmix64(h ^ symbols[(i + j) % n])
        total += h / 18446744073709551616.0  # 2**64
    return total / n
