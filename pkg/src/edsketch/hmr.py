"""Hierarchical mismatch recovery.

Sequences are indexed by the leaves of a rooted tree with uniform
per-level branching (level sizes L_1 .. L_d).  Every tree node at depth
j owns kappa_j buckets (kappa_0 >= ... >= kappa_d = 1, powers of two).
A leaf's trace is routed to one bucket per ancestor: its bucket at
depth j is a pairwise-independent function of (its depth-j+1 label,
its bucket at depth j+1), so heavy subtrees can only pollute a bounded
number of buckets higher up.  Only the root buckets are kept; the rest
of the trajectory is implicit in the routing functions.

Recovery inverts root buckets exactly like the flat superposition
sketch and takes a strict majority over ell independent slots.  The
load oracle reproduces the accessibility rule used in the analysis:
node load = min(kappa_j, sum of child loads) with leaf load 1 on
mismatches, a node is R-overloaded when its load reaches kappa_j / R,
and a mismatch leaf is accessible when every strict ancestor
(including the root) is R-underloaded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corekit import Field, PairwiseHash, Stream, pairwise_from_stream
from .mrs import SketchMismatch, redundancy_count, trace_add


class HypothesisViolated(ValueError):
    """Tree shape or capacity sequence breaks a structural requirement."""


@dataclass(frozen=True)
class TreeShape:
    """Uniform tree: level_sizes[j] children per node at depth j."""

    level_sizes: tuple

    def __post_init__(self):
        for L in self.level_sizes:
            if L < 2 or L & (L - 1):
                raise HypothesisViolated("level sizes must be powers of two >= 2")

    @property
    def depth(self) -> int:
        return len(self.level_sizes)

    @property
    def leaves(self) -> int:
        out = 1
        for L in self.level_sizes:
            out *= L
        return out

    def flatten(self, labels: tuple) -> int:
        """Mixed-radix rank of a leaf given per-level labels."""
        if len(labels) != self.depth:
            raise HypothesisViolated("label count != depth")
        out = 0
        for L, a in zip(self.level_sizes, labels):
            if not 0 <= a < L:
                raise HypothesisViolated("label out of range")
            out = out * L + a
        return out

    def unflatten(self, index: int) -> tuple:
        labels = []
        for L in reversed(self.level_sizes):
            labels.append(index % L)
            index //= L
        return tuple(reversed(labels))


def check_capacities(shape: TreeShape, kappa: tuple):
    if len(kappa) != shape.depth + 1:
        raise HypothesisViolated("need one capacity per depth 0..d")
    if kappa[-1] != 1:
        raise HypothesisViolated("leaf capacity must be 1")
    prev = None
    for k in kappa:
        if k < 1 or k & (k - 1):
            raise HypothesisViolated("capacities must be powers of two")
        if prev is not None and k > prev:
            raise HypothesisViolated("capacities must be non-increasing")
        prev = k


def _routing(stream: Stream, shape: TreeShape, kappa: tuple) -> list:
    """Routing hash per depth j: (depth-j+1 label, bucket) -> bucket."""
    fns = []
    for j in range(shape.depth):
        L = shape.level_sizes[j]
        dom_bits = (L * kappa[j + 1] - 1).bit_length()
        rng_bits = kappa[j].bit_length() - 1
        fns.append(pairwise_from_stream(stream.child("route", j), dom_bits, rng_bits))
    return fns


def leaf_to_root(shape: TreeShape, kappa: tuple, routing: list, labels: tuple) -> int:
    """Root bucket of a leaf: compose the routing functions upward
    starting from the single leaf bucket."""
    b = 0
    for j in range(shape.depth - 1, -1, -1):
        b = routing[j](labels[j] * kappa[j + 1] + b)
    return b


@dataclass
class HmrSlot:
    alpha: int
    routing: list
    buckets: dict  # root bucket -> 4-component trace sum, zeros implicit


@dataclass
class HmrSketch:
    field: Field
    shape: TreeShape
    kappa: tuple
    R: int
    delta: float
    ell: int
    slots: list

    @property
    def domain(self) -> int:
        return self.shape.leaves

    def check_compatible(self, other: "HmrSketch"):
        if (self.field != other.field or self.shape != other.shape
                or self.kappa != other.kappa or self.R != other.R
                or self.ell != other.ell):
            raise SketchMismatch("hierarchical sketch parameters differ")
        for a, b in zip(self.slots, other.slots):
            if a.alpha != b.alpha or a.routing != b.routing:
                raise SketchMismatch("slot randomness differs")


def hmr_redundancy(shape: TreeShape, delta: float, multiplier: float = 8.0) -> int:
    total = sum(math.log(L) for L in shape.level_sizes)
    return max(1, math.ceil(multiplier * (total + math.log(1.0 / delta) + 2)))


def hmr_sketch(u: dict, shape: TreeShape, kappa: tuple, R: int, delta: float,
               field: Field, stream: Stream, ell: int = None,
               strict_field_check: bool = False) -> HmrSketch:
    """Sketch a sparse sequence {flat leaf index: value}.

    With strict_field_check the conservative requirement
    p >= 4 * |D|^2 is enforced; otherwise the filter-soundness bound
    4 * (|D|-1) * kappa_0 <= p is required.
    """
    check_capacities(shape, kappa)
    D = shape.leaves
    if strict_field_check:
        if field.p < 4 * D * D:
            raise HypothesisViolated("field too small for strict soundness bound")
    elif field.p < 4 * (D - 1) * kappa[0]:
        raise HypothesisViolated("field too small for filter soundness")
    if ell is None:
        ell = hmr_redundancy(shape, delta)
    p = field.p
    items = []
    for i, v in u.items():
        v %= p
        if v:
            items.append((i, v, shape.unflatten(i)))
    depth = shape.depth
    # per-depth label arrays for the vectorized walk
    label_cols = None
    if items and depth:
        import numpy as _np
        label_cols = [_np.array([it[2][j] for it in items], dtype=_np.uint64)
                      for j in range(depth)]
    slots = []
    for s in range(ell):
        st = stream.child("redundancy-slot", s)
        alpha = st.field_nonzero(field)
        routing = _routing(st, shape, kappa)
        buckets: dict = {}
        if items:
            root = _walk_to_root(routing, kappa, depth, items, label_cols)
            # alpha^i split as alpha^(high * 2^40) * alpha^low; the high
            # part repeats for all leaves under one node
            hi_pow: dict = {}
            a40 = field.pow(alpha, 1 << 40)
            powmod = gmpy2.powmod
            mask40 = (1 << 40) - 1
            get = buckets.get
            for (i, v, labels), b in zip(items, root):
                hi = i >> 40
                ah = hi_pow.get(hi)
                if ah is None:
                    ah = int(powmod(a40, hi, p))
                    hi_pow[hi] = ah
                av = ah * int(powmod(alpha, i & mask40, p)) % p
                cur = get(b)
                if cur is None:
                    buckets[b] = (v, i * v % p, v * v % p, av * v % p)
                else:
                    buckets[b] = (
                        (cur[0] + v) % p,
                        (cur[1] + i * v) % p,
                        (cur[2] + v * v) % p,
                        (cur[3] + av * v) % p,
                    )
            for b in [b for b, t in buckets.items() if t == (0, 0, 0, 0)]:
                del buckets[b]
        slots.append(HmrSlot(alpha=alpha, routing=routing, buckets=buckets))
    return HmrSketch(field=field, shape=shape, kappa=kappa, R=R, delta=delta,
                     ell=ell, slots=slots)


def _walk_to_root(routing: list, kappa: tuple, depth: int, items: list,
                  label_cols) -> list:
    """Root bucket per item.  Depths whose hash works in exactly 64-bit
    arithmetic (w == 32) are evaluated as one numpy pass; wider depths
    fall back to memoized scalar evaluation."""
    import numpy as _np

    b = _np.zeros(len(items), dtype=_np.uint64)
    for j in range(depth - 1, -1, -1):
        h = routing[j]
        x = label_cols[j] * _np.uint64(kappa[j + 1]) + b
        if h.w == 32 and h.range_bits > 0:
            y = (_np.uint64(h.a & ((1 << 64) - 1)) * x
                 + _np.uint64(h.b & ((1 << 64) - 1)))
            b = y >> _np.uint64(64 - h.range_bits)
        elif h.range_bits == 0:
            b = _np.zeros(len(items), dtype=_np.uint64)
        else:
            memo: dict = {}
            out = _np.empty(len(items), dtype=_np.uint64)
            for idx, key in enumerate(x.tolist()):
                nb = memo.get(key)
                if nb is None:
                    nb = h(key)
                    memo[key] = nb
                out[idx] = nb
            b = out
    return b.tolist()


def hmr_recover(sk_u: HmrSketch, sk_w: HmrSketch) -> set:
    """Triples (flat leaf index, x_val, y_val) present in a strict
    majority of slots; at most kappa_0 triples are returned.

    A slot appearance only counts when its alpha-power component checks
    out; the check is deferred until a triple has enough raw
    appearances to possibly win the majority, which skips the expensive
    exponentiation for the garbage produced by bucket collisions."""
    sk_u.check_compatible(sk_w)
    F = sk_u.field
    p = F.p
    D = sk_u.domain
    inv2 = (p + 1) >> 1
    invert = F.inv
    candidates: dict = {}
    zero = (0, 0, 0, 0)
    for su, sw in zip(sk_u.slots, sk_w.slots):
        alpha = su.alpha
        ub, wb = su.buckets, sw.buckets
        for b in ub.keys() | wb.keys():
            tu = ub.get(b, zero)
            tw = wb.get(b, zero)
            if tu == tw:
                continue
            v = (tu[0] - tw[0]) % p
            if v == 0:
                continue
            inv_v = invert(v)
            idx = (tu[1] - tw[1]) * inv_v % p
            if idx >= D:
                continue
            sq = (tu[2] - tw[2]) % p
            vv = v * v % p
            inv_2v = inv_v * inv2 % p
            x_val = (sq + vv) * inv_2v % p
            y_val = (sq - vv) * inv_2v % p
            d3 = (tu[3] - tw[3]) % p
            candidates.setdefault((idx, x_val, y_val), []).append(
                (alpha, d3, v))
    need = sk_u.ell / 2
    out = []
    for t, seen in candidates.items():
        if len(seen) <= need:
            continue
        idx = t[0]
        good = sum(d3 == F.pow(alpha, idx) * v % p for alpha, d3, v in seen)
        if good > need:
            out.append(t)
    out.sort()
    return set(out[: sk_u.kappa[0]])


def hmr_load_oracle(mismatch_leaves, shape: TreeShape, kappa: tuple, R: int) -> tuple:
    """(loads, accessible): loads maps (depth, node rank) -> load for
    every node with nonzero load; accessible is the set of mismatch
    leaves whose strict ancestors are all R-underloaded."""
    check_capacities(shape, kappa)
    d = shape.depth
    loads = [dict() for _ in range(d + 1)]
    for leaf in mismatch_leaves:
        loads[d][leaf] = 1
    for j in range(d - 1, -1, -1):
        L = shape.level_sizes[j]
        for child, ld in loads[j + 1].items():
            node = child // L
            loads[j][node] = loads[j].get(node, 0) + ld
        for node in loads[j]:
            loads[j][node] = min(kappa[j], loads[j][node])
    accessible = set()
    for leaf in mismatch_leaves:
        node = leaf
        ok = True
        for j in range(d - 1, -1, -1):
            node //= shape.level_sizes[j]
            if loads[j].get(node, 0) >= kappa[j] / R:
                ok = False
                break
        if ok:
            accessible.add(leaf)
    all_loads = {(j, node): ld for j in range(d + 1) for node, ld in loads[j].items()}
    return all_loads, accessible
