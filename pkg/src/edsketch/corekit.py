"""Prime-field arithmetic, pairwise-independent hashing, and seeded
randomness streams shared by every sketching layer.

Field elements are plain Python ints in [0, p).  gmpy2 is used for the
two expensive operations (modular exponentiation and inversion); all
other arithmetic stays in native ints.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import gmpy2

DEFAULT_PRIME = 2**255 - 19
TEST_PRIME = 101


class ZeroInverse(ZeroDivisionError):
    """Raised when inverting 0 in a prime field."""


class DomainOverflow(ValueError):
    """Raised when a hash input falls outside the declared domain."""


class Field:
    """Arithmetic mod an odd prime p."""

    __slots__ = ("p", "_mpz_p")

    def __init__(self, p: int = DEFAULT_PRIME):
        if p < 3 or p % 2 == 0:
            raise ValueError("modulus must be an odd prime")
        self.p = p
        self._mpz_p = gmpy2.mpz(p)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroInverse("0 has no inverse")
        return int(gmpy2.invert(a, self._mpz_p))

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        return int(gmpy2.powmod(a, e, self._mpz_p))

    def elem_bytes(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def encode(self, a: int) -> bytes:
        return a.to_bytes(self.elem_bytes(), "little")

    def decode(self, raw: bytes) -> int:
        v = int.from_bytes(raw, "little")
        if v >= self.p:
            raise ValueError("encoded element out of range")
        return v

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("Field", self.p))

    def __repr__(self) -> str:
        return f"Field(p={self.p})"


@dataclass(frozen=True)
class PairwiseHash:
    """Multiply-shift hash onto a power-of-two range.

    Maps x in [0, 2^domain_bits) to [0, 2^range_bits) via
    ((a*x + b) mod 2^(2w)) >> (2w - range_bits) with odd a.
    Pairwise independence holds for range_bits <= w.
    """

    a: int
    b: int
    domain_bits: int
    range_bits: int

    @property
    def w(self) -> int:
        return max(32, self.domain_bits)

    def __call__(self, x: int) -> int:
        if x < 0 or x >> self.domain_bits:
            raise DomainOverflow(f"input {x} exceeds {self.domain_bits} bits")
        if self.range_bits == 0:
            return 0
        tw = 2 * self.w
        return ((self.a * x + self.b) & ((1 << tw) - 1)) >> (tw - self.range_bits)

    # fractional output in [0, 1), used for threshold decisions
    def frac(self, x: int, bits: int = 30) -> int:
        if x < 0 or x >> self.domain_bits:
            raise DomainOverflow(f"input {x} exceeds {self.domain_bits} bits")
        tw = 2 * self.w
        return ((self.a * x + self.b) & ((1 << tw) - 1)) >> (tw - bits)


def pairwise_from_stream(stream: "Stream", domain_bits: int, range_bits: int) -> PairwiseHash:
    w = max(32, domain_bits)
    a = stream.uint(2 * w) | 1
    b = stream.uint(2 * w)
    return PairwiseHash(a=a, b=b, domain_bits=domain_bits, range_bits=range_bits)


def _encode_path(path) -> bytes:
    out = bytearray()
    for tag, index in path:
        t = tag.encode()
        out += len(t).to_bytes(1, "big") + t
        idx = int(index)
        ib = idx.to_bytes((idx.bit_length() + 8) // 8, "big", signed=False)
        out += len(ib).to_bytes(2, "big") + ib
    return bytes(out)


class Stream:
    """Deterministic byte stream keyed by a 32-byte master seed and a
    prefix-free path of (tag, index) pairs.  Children are independent
    streams; the same (seed, path) always replays the same bytes."""

    __slots__ = ("seed", "path", "_key", "_counter", "_buf", "_pos")

    def __init__(self, seed: bytes, path: tuple = ()):
        if len(seed) != 32:
            raise ValueError("master seed must be 32 bytes")
        self.seed = seed
        self.path = path
        self._key = hashlib.blake2b(_encode_path(path), key=seed, digest_size=32).digest()
        self._counter = 0
        self._buf = b""
        self._pos = 0

    def child(self, tag: str, index: int = 0) -> "Stream":
        return Stream(self.seed, self.path + ((tag, index),))

    def read(self, n: int) -> bytes:
        out = bytearray()
        while n > 0:
            if self._pos >= len(self._buf):
                self._buf = hashlib.blake2b(
                    self._counter.to_bytes(8, "big"), key=self._key, digest_size=64
                ).digest()
                self._counter += 1
                self._pos = 0
            take = min(n, len(self._buf) - self._pos)
            out += self._buf[self._pos : self._pos + take]
            self._pos += take
            n -= take
        return bytes(out)

    def uint(self, bits: int) -> int:
        nbytes = (bits + 7) // 8
        v = int.from_bytes(self.read(nbytes), "big")
        return v >> (nbytes * 8 - bits)

    def randrange(self, n: int) -> int:
        """Uniform int in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("range must be positive")
        bits = n.bit_length() + 16
        while True:
            v = self.uint(bits)
            limit = (1 << bits) - ((1 << bits) % n)
            if v < limit:
                return v % n

    def field_elem(self, field: Field) -> int:
        return self.randrange(field.p)

    def field_nonzero(self, field: Field) -> int:
        return 1 + self.randrange(field.p - 1)


def derive_stream(master_seed: bytes, path: tuple = ()) -> Stream:
    return Stream(master_seed, path)


def ceil_pow2(x: int) -> int:
    """Smallest power of two >= x (>= 1)."""
    if x <= 1:
        return 1
    return 1 << (x - 1).bit_length()
