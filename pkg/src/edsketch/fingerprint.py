"""Sequence fingerprints.

Two kinds:

* Karp-Rabin: polynomial fingerprint over a prime q <= n^5 chosen so the
  collision probability for sequences of length <= n is below ~2/n^4.
  Values live in {1..n^5}; the empty sequence maps to 1.

* Gap fingerprint: equality test with a distance gap.  The sequence is
  cut at content-defined anchors into chunks of expected length
  ~ t / 8, adjacent chunk pairs are hashed, and a content-sampled
  subset of the pairs (rate q = min(1, beta / t)) is summed into one
  value.  An edit touches O(1) chunks, so close sequences differ with
  probability about beta * e / t, while pairs that differ in many
  chunks are separated with overwhelming probability.  The measured
  gap constant P-hat is reported by the calibration harness.

A coin-driven random-walk embedding (cgk_fingerprint) is kept for
comparison; its walk desynchronization is heavy-tailed, which makes
its measured gap grow with the sequence length, so the pipeline uses
the anchored construction everywhere.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import gmpy2

from .corekit import Stream, pairwise_from_stream

C_TED = 4.0  # sampling-rate constant of the gap fingerprint


class InputTooLong(ValueError):
    """Sequence longer than the declared bound n."""


_prime_cache: dict = {}


def fingerprint_prime(n: int) -> int:
    """Largest prime <= n^5 (always > n^4 for n >= 2)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    q = _prime_cache.get(n)
    if q is None:
        c = gmpy2.mpz(n) ** 5
        while not gmpy2.is_prime(c):
            c -= 1
        q = int(c)
        _prime_cache[n] = q
    return q


@dataclass(frozen=True)
class KrState:
    """Shared randomness of a Karp-Rabin fingerprint run."""

    n: int
    q: int
    r: int


def kr_state(n: int, stream: Stream) -> KrState:
    q = fingerprint_prime(n)
    return KrState(n=n, q=q, r=2 + stream.randrange(q - 2))


def kr_poly(seq, st: KrState) -> int:
    """Raw polynomial sum_{i=1..L} (s_i + 1) * r^i mod q."""
    if len(seq) > st.n:
        raise InputTooLong(f"length {len(seq)} exceeds bound {st.n}")
    acc = 0
    rp = 1
    q, r = st.q, st.r
    for s in seq:
        rp = rp * r % q
        acc = (acc + (s + 1) * rp) % q
    return acc


def kr_combine(left_poly: int, left_len: int, right_poly: int, st: KrState) -> int:
    """Polynomial of a concatenation from the parts' polynomials."""
    return (left_poly + right_poly * pow(st.r, left_len, st.q)) % st.q


def kr_value(poly: int) -> int:
    """Fingerprint value in {1..q}; the empty sequence gives 1."""
    return poly + 1


def kr_fingerprint(seq, st: KrState) -> int:
    return kr_value(kr_poly(seq, st))


@dataclass(frozen=True)
class GapFingerprint:
    value: int
    t: int
    n: int

    def __eq__(self, other) -> bool:
        if not isinstance(other, GapFingerprint):
            return NotImplemented
        if (self.t, self.n) != (other.t, other.n):
            raise ValueError("gap fingerprints with different parameters")
        return self.value == other.value

    def __hash__(self) -> int:
        return hash((self.value, self.t, self.n))


_SENTINEL = b"\x00" * 16


def ted_fingerprint(seq, t: int, n: int, stream: Stream,
                    beta: float = C_TED, lam: int = None) -> GapFingerprint:
    """Gap fingerprint of seq with threshold t and length bound n.

    Both parties must pass the same stream; the anchor, pair and
    sampling hashes are all keyed from it.  beta controls the chunk
    sampling rate min(1, beta / t): larger values are more sensitive
    to single edits (beta >= t degenerates to a full content hash),
    smaller values buy a smaller gap constant.
    """
    if len(seq) > n:
        raise InputTooLong(f"length {len(seq)} exceeds bound {n}")
    if t < 1:
        raise ValueError("threshold must be >= 1")
    key = stream.child("chunk-key").read(16)

    def h(tag: bytes, data: bytes) -> bytes:
        return hashlib.blake2b(tag + data, key=key, digest_size=16).digest()

    if lam is None:
        lam = max(1, t // 8)  # default: chunk length tracks the threshold
    cut_anchor = (1 << 30) // lam
    cut_sample = min(1 << 30, int(min(1.0, beta / t) * (1 << 30)))
    q_mod = fingerprint_prime(n)

    acc = 0
    prev = _SENTINEL
    chunk = bytearray()
    L = len(seq)
    for i in range(L):
        chunk += int(seq[i]).to_bytes(12, "little")
        window = seq[max(0, i - 3): i + 1]
        wd = b"".join(int(s).to_bytes(12, "little") for s in window)
        boundary = int.from_bytes(h(b"A", wd)[:4], "little") >> 2 < cut_anchor
        if boundary or i == L - 1:
            dg = h(b"C", bytes(chunk))
            pair = h(b"P", prev + dg)
            prev = dg
            if int.from_bytes(pair[:4], "little") >> 2 < cut_sample:
                acc = (acc + int.from_bytes(pair[4:16], "little")) % q_mod
            chunk = bytearray()
    return GapFingerprint(value=acc + 1, t=t, n=n)


def cgk_fingerprint(seq, t: int, n: int, stream: Stream) -> GapFingerprint:
    """Random-walk (coin-per-step) gap fingerprint, kept for the
    calibration harness.  The sequence is emitted by a read head whose
    advance is a pairwise-independent coin of (step, symbol); embedded
    positions are subsampled at rate min(1, 4 ln(n) / t) and hashed.
    Desynchronization after an edit is heavy-tailed, so the measured
    gap grows with the sequence length.
    """
    if len(seq) > n:
        raise InputTooLong(f"length {len(seq)} exceeds bound {n}")
    if t < 1:
        raise ValueError("threshold must be >= 1")
    steps = 3 * n
    sym_bits = max(1, (n**3).bit_length())
    step_bits = max(1, steps.bit_length())
    coin = pairwise_from_stream(stream.child("coin"), step_bits + sym_bits, 1)
    rate_bits = 30
    rate = min(1.0, C_TED * math.log(max(n, 2)) / t)
    cut = int(rate * (1 << rate_bits))
    sample = pairwise_from_stream(stream.child("sample"), step_bits, rate_bits)
    st = kr_state(n, stream.child("hash"))
    q, r = st.q, st.r

    acc = 0
    rp = 1
    i = 0
    L = len(seq)
    for j in range(steps):
        rp = rp * r % q
        if i >= L:
            break  # only padding remains; it contributes nothing
        s = seq[i]
        if cut > sample(j):
            acc = (acc + (s + 1) * rp) % q
        i += coin((j << sym_bits) | (s + 1))
    return GapFingerprint(value=acc + 1, t=t, n=n)
