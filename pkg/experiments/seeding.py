import zlib

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(base: int, key: str) -> int:
    """
    Seed of a named stream: splitmix64(base ^ crc32(key)) cut to 32 bits.
    Depends only on the base seed and the key, never on how many other streams exist.
    """
    return splitmix64((int(base) & MASK64) ^ zlib.crc32(key.encode("utf-8"))) & 0xFFFFFFFF
