"""Mismatch recovery for long sparse sequences over a prime field.

A sequence u indexed by D contributes, for each index i, the trace
vector

    (u_i,  i * u_i,  u_i^2,  alpha^i * u_i)

summed into a bucket chosen by a pairwise-independent hash of i.  The
difference of two such sketches is the sketch of u - w, so a bucket
that received exactly one differing index can be inverted exactly:

    index = product / value
    x_val = (square + value^2) / (2 * value)
    y_val = (square - value^2) / (2 * value)

Buckets holding two or more differing indices are filtered out by the
alpha component except with probability (|D|-1) * |S| / p over the
random alpha.  A redundancy wrapper repeats the construction with
independent (alpha, hash) pairs and keeps the triples reported by a
strict majority of the repetitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corekit import Field, PairwiseHash, Stream, ceil_pow2, pairwise_from_stream


class IndexOverflow(ValueError):
    """Sequence index outside the declared domain size."""


class SketchMismatch(ValueError):
    """Two sketches with different parameters or randomness."""


def trace(F: Field, i: int, u: int, alpha: int) -> tuple:
    p = F.p
    return (u % p, i * u % p, u * u % p, F.pow(alpha, i) * u % p)


def trace_add(p: int, a: tuple, b: tuple) -> tuple:
    return ((a[0] + b[0]) % p, (a[1] + b[1]) % p,
            (a[2] + b[2]) % p, (a[3] + b[3]) % p)


def trace_sub(p: int, a: tuple, b: tuple) -> tuple:
    return ((a[0] - b[0]) % p, (a[1] - b[1]) % p,
            (a[2] - b[2]) % p, (a[3] - b[3]) % p)


def restore(F: Field, t: tuple) -> tuple:
    """Invert the trace of a single index: (index, x_val, y_val).

    Requires t to be the trace difference of exactly one index with
    x_val != y_val; in particular t[0] != 0.
    """
    v, pr, sq = t[0], t[1], t[2]
    inv_v = F.inv(v)
    idx = pr * inv_v % F.p
    inv_2v = F.inv(2 * v % F.p)
    x_val = (sq + v * v) * inv_2v % F.p
    y_val = (sq - v * v) * inv_2v % F.p
    return (idx, x_val, y_val)


@dataclass
class SuperSketch:
    """One superposition sketch: |S| buckets of 4 field components.
    Zero buckets are kept implicit."""

    field: Field
    domain: int            # |D|
    alpha: int
    h: PairwiseHash
    range_bits: int
    buckets: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return 1 << self.range_bits

    def check_compatible(self, other: "SuperSketch"):
        if (self.field != other.field or self.domain != other.domain
                or self.alpha != other.alpha or self.h != other.h
                or self.range_bits != other.range_bits):
            raise SketchMismatch("sketch parameters differ")


def _new_sketch(domain: int, size: int, field: Field, alpha: int,
                h: PairwiseHash) -> SuperSketch:
    if size < 1 or size & (size - 1):
        raise ValueError("bucket count must be a power of two")
    return SuperSketch(field=field, domain=domain, alpha=alpha, h=h,
                       range_bits=size.bit_length() - 1)


def super_sketch(u: dict, domain: int, size: int, field: Field,
                 alpha: int, h: PairwiseHash) -> SuperSketch:
    """Sketch a sparse sequence {index: value}; runtime O(|u| log p)."""
    sk = _new_sketch(domain, size, field, alpha, h)
    p = field.p
    buckets = sk.buckets
    for i, v in u.items():
        if not 0 <= i < domain:
            raise IndexOverflow(f"index {i} outside domain of size {domain}")
        v %= p
        if v == 0:
            continue
        b = h(i)
        av = field.pow(alpha, i)
        cur = buckets.get(b)
        t = (v, i * v % p, v * v % p, av * v % p)
        buckets[b] = t if cur is None else trace_add(p, cur, t)
    for b in [b for b, t in buckets.items() if t == (0, 0, 0, 0)]:
        del buckets[b]
    return sk


def _dense_base(values, domain: int, p: int) -> tuple:
    """Value-dependent arrays shared by every slot sketching `values`."""
    vals = np.asarray(values, dtype=np.int64) % p
    if len(vals) > domain:
        raise IndexOverflow("dense sequence longer than domain")
    ii = np.arange(len(vals), dtype=np.int64)
    return vals, ii, (vals, ii % p * vals % p, vals * vals % p)


def _dense_apow(n: int, alpha: int, p: int) -> np.ndarray:
    """alpha^i mod p for i < n via a two-level power table."""
    half = (n - 1).bit_length() // 2 + 1 if n > 1 else 1
    lo_size = 1 << half
    lo = np.empty(lo_size, dtype=np.int64)
    lo[0] = 1
    for i in range(1, lo_size):
        lo[i] = lo[i - 1] * alpha % p
    step = int(lo[lo_size - 1]) * alpha % p
    hi_size = (n + lo_size - 1) // lo_size
    hi = np.empty(hi_size, dtype=np.int64)
    hi[0] = 1
    for i in range(1, hi_size):
        hi[i] = hi[i - 1] * step % p
    ii = np.arange(n, dtype=np.int64)
    return hi[ii >> half] * lo[ii & (lo_size - 1)] % p


def super_sketch_dense(values, domain: int, size: int, field: Field,
                       alpha: int, h: PairwiseHash, _base=None) -> SuperSketch:
    """Vectorised equivalent of super_sketch for a dense value array.

    Bit-identical to the sparse path.  Only valid for p < 2^31 and
    hash word size 32 (domain_bits <= 32).  _base carries the
    value-dependent arrays when many slots sketch the same values.
    """
    p = field.p
    if p >= 1 << 31 or h.w != 32:
        raise ValueError("dense path needs a small modulus and 32-bit hash words")
    vals, ii, comps3 = _dense_base(values, domain, p) if _base is None else _base
    sk = _new_sketch(domain, size, field, alpha, h)
    n = len(vals)
    idx = np.arange(n, dtype=np.uint64)
    mask = np.uint64((1 << 64) - 1)
    hv = ((np.uint64(h.a) * idx + np.uint64(h.b)) & mask) >> np.uint64(64 - h.range_bits) \
        if h.range_bits else np.zeros(n, dtype=np.uint64)
    apow = _dense_apow(n, alpha, p)
    acc = np.zeros((4, sk.size), dtype=np.int64)
    hb = hv.astype(np.int64)
    for c, comp in enumerate(comps3 + (apow * vals % p,)):
        np.add.at(acc[c], hb, comp)
    acc %= p
    # entries are reduced and non-negative, so a zero column sum means
    # an all-zero trace
    for b in np.flatnonzero(acc.sum(axis=0)):
        sk.buckets[int(b)] = (int(acc[0, b]), int(acc[1, b]),
                              int(acc[2, b]), int(acc[3, b]))
    return sk


def super_recover(sk_u: SuperSketch, sk_w: SuperSketch) -> set:
    """Candidate mismatch triples (index, x_val, y_val) from one sketch
    pair.  Every bucket holding exactly one mismatch is inverted
    exactly; merged buckets survive the alpha filter with probability
    at most (|D|-1)*|S|/p."""
    sk_u.check_compatible(sk_w)
    F = sk_u.field
    p = F.p
    out = set()
    alpha = sk_u.alpha
    zero = (0, 0, 0, 0)
    for b in sk_u.buckets.keys() | sk_w.buckets.keys():
        d = trace_sub(p, sk_u.buckets.get(b, zero), sk_w.buckets.get(b, zero))
        if d == zero or d[0] == 0:
            continue
        idx, x_val, y_val = restore(F, d)
        if idx >= sk_u.domain:
            continue
        if d[3] != F.pow(alpha, idx) * (x_val - y_val) % p:
            continue
        out.add((idx, x_val, y_val))
    return out


@dataclass
class RmrsSketch:
    """Redundant mismatch-recovery sketch: ell independent slots."""

    domain: int
    size: int
    ell: int
    slots: list

    def check_compatible(self, other: "RmrsSketch"):
        if (self.domain, self.size, self.ell) != (other.domain, other.size, other.ell):
            raise SketchMismatch("redundancy parameters differ")
        for a, b in zip(self.slots, other.slots):
            a.check_compatible(b)


def redundancy_count(domain: int, delta: float, multiplier: float = 8.0) -> int:
    """Slot count ceil(mult * (ln|D| + ln(1/delta) + 2))."""
    return max(1, math.ceil(multiplier * (math.log(domain) + math.log(1.0 / delta) + 2)))


def rmrs_sketch(u: dict, domain: int, size: int, ell: int, field: Field,
                stream: Stream, dense=None) -> RmrsSketch:
    """Sketch with ell slots of independent (alpha, hash) randomness.

    If dense is given it must be the full value array equal to u, and
    the vectorised path is used.
    """
    bits = max(1, (domain - 1).bit_length())
    base = _dense_base(dense, domain, field.p) if dense is not None else None
    slots = []
    for i in range(ell):
        st = stream.child("redundancy-slot", i)
        alpha = st.field_nonzero(field)
        h = pairwise_from_stream(st, bits, size.bit_length() - 1)
        if dense is not None:
            slots.append(super_sketch_dense(dense, domain, size, field,
                                            alpha, h, _base=base))
        else:
            slots.append(super_sketch(u, domain, size, field, alpha, h))
    return RmrsSketch(domain=domain, size=size, ell=ell, slots=slots)


def rmrs_recover(sk_u: RmrsSketch, sk_w: RmrsSketch) -> set:
    """Triples reported by strictly more than ell/2 slots."""
    sk_u.check_compatible(sk_w)
    counts: dict = {}
    for a, b in zip(sk_u.slots, sk_w.slots):
        for t in super_recover(a, b):
            counts[t] = counts.get(t, 0) + 1
    need = sk_u.ell / 2
    return {t for t, c in counts.items() if c > need}


def hamming_sketch_params(domain: int, K: int, delta: float) -> tuple:
    """(bucket count, slot count) for recovering up to K mismatches."""
    return ceil_pow2(4 * K), redundancy_count(domain, delta)
