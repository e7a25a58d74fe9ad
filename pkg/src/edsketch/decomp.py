"""Locally consistent decomposition of a sequence into fragments, each
encoded by a small content-addressed grammar.

Fragment boundaries are anchored to raw content: a cut lands before
position i exactly when a keyed hash of the few symbols preceding i
falls under a threshold tuned to the rule budget.  A boundary decision
therefore depends only on a constant-size window of nearby content, so
an edit can only toggle the handful of cuts whose windows overlap it —
everything farther away splits identically.

Within a fragment, maximal runs of equal symbols collapse into run
rules, and a few chunking rounds group symbols whenever a pairwise hash
of a symbol's own id crosses a threshold (with a forced cut at a
maximum chunk size); the resulting top symbols fold into a unique start
rule.

Rule ids are short salted content hashes.  A fragment's grammar is
exactly the set of rules reachable from its start rule, so any proper
subset fails to decode; decoding needs no side table because rule
contents travel with the sketch values, not with the ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import hashlib

from .corekit import Stream, ceil_pow2, pairwise_from_stream

RULE_ID_BITS = 40
RULE_UNIVERSE = 1 << RULE_ID_BITS

KIND_TERMINAL = 1
KIND_PAIR = 2
KIND_RUN = 3
KIND_START = 4

# decoding failure sentinel
UNDEFINED = object()

_FRAC_BITS = 30
_FRAC_ONE = 1 << _FRAC_BITS
_CHUNK_RATE = _FRAC_ONE // 4  # mean chunk of ~4 symbols
_MAX_CHUNK = 8


class RuleCollision(Exception):
    """Two distinct rule contents hashed to the same id."""


def encode_rule(kind: int, a: int, b: int = 0) -> int:
    if not (0 <= a < 1 << 64 and 0 <= b < 1 << 64):
        raise ValueError("rule argument out of range")
    return (kind << 128) | (a << 64) | b


def decode_rule(enc: int) -> tuple:
    return (enc >> 128, (enc >> 64) & ((1 << 64) - 1), enc & ((1 << 64) - 1))


@dataclass
class Grammar:
    """rules: id -> (kind, a, b); start is an id or None."""

    rules: dict = field(default_factory=dict)
    start: int = None

    def rule_ids(self) -> frozenset:
        return frozenset(self.rules)


class _Builder:
    """Content-addressed rule interning with per-run salt."""

    def __init__(self, salt: bytes, universe: int = RULE_UNIVERSE):
        self.salt = salt
        self.universe = universe
        self.by_content: dict = {}
        self.by_id: dict = {}
        self.length: dict = {}  # id -> expanded length

    def intern(self, kind: int, a: int, b: int = 0, length: int = 1) -> int:
        content = (kind, a, b)
        rid = self.by_content.get(content)
        if rid is not None:
            return rid
        enc = encode_rule(kind, a, b)
        digest = hashlib.blake2b(
            enc.to_bytes(17, "big"), key=self.salt, digest_size=8
        ).digest()
        rid = (int.from_bytes(digest, "big") % self.universe) + 1
        other = self.by_id.get(rid)
        if other is not None and other != content:
            raise RuleCollision(f"id {rid} already bound")
        self.by_content[content] = rid
        self.by_id[rid] = content
        self.length[rid] = length
        return rid


@dataclass
class Decomposition:
    """Fragments laid out in the first slots of a width-n table."""

    slots: int
    fragments: dict  # slot -> tuple of symbols
    grammars: dict   # slot -> Grammar

    def count(self) -> int:
        return len(self.fragments)

    def concat(self) -> tuple:
        out = []
        for i in sorted(self.fragments):
            out.extend(self.fragments[i])
        return tuple(out)


def _as_tuple(x) -> tuple:
    if isinstance(x, str):
        return tuple(ord(c) for c in x)
    return tuple(x)


def _run_compress(syms: list, bld: _Builder) -> list:
    """Collapse maximal runs of equal ids into run rules."""
    out = []
    i = 0
    while i < len(syms):
        rid = syms[i]
        j = i + 1
        while j < len(syms) and syms[j] == rid:
            j += 1
        if j - i > 1:
            out.append(bld.intern(KIND_RUN, rid, j - i,
                                   length=bld.length[rid] * (j - i)))
        else:
            out.append(rid)
        i = j
    return out


def _chunk_round(syms: list, bld: _Builder, h) -> list:
    """Group symbols into chunks at content-defined boundaries and fold
    each chunk into left-nested pair rules."""
    out = []
    cur = []
    for t, rid in enumerate(syms):
        boundary = t > 0 and h.frac(rid) < _CHUNK_RATE
        if cur and (boundary or len(cur) >= _MAX_CHUNK):
            out.append(_fold(cur, bld))
            cur = []
        cur.append(rid)
    if cur:
        out.append(_fold(cur, bld))
    return out


def _fold(ids: list, bld: _Builder) -> int:
    acc = ids[0]
    for rid in ids[1:]:
        acc = bld.intern(KIND_PAIR, acc, rid,
                         length=bld.length[acc] + bld.length[rid])
    return acc


def chunk_rounds(k: int) -> int:
    """Chunking rounds so top symbols stay well under the fragment
    size implied by the rule budget k."""
    return max(0, math.ceil((math.log2(ceil_pow2(max(k, 1))) - 4) / 2))


def _reachable(bld: _Builder, start: int):
    seen = set()
    stack = [start]
    while stack:
        rid = stack.pop()
        if rid in seen:
            continue
        seen.add(rid)
        kind, a, b = bld.by_id[rid]
        if kind == KIND_PAIR:
            stack.extend((a, b))
        elif kind in (KIND_RUN, KIND_START):
            stack.append(a)
    return seen


def _grammar_for(bld: _Builder, tokens: list) -> Grammar:
    start = bld.intern(KIND_START, _fold(tokens, bld),
                       length=sum(bld.length[t] for t in tokens))
    ids = _reachable(bld, start)
    return Grammar(rules={rid: bld.by_id[rid] for rid in ids}, start=start)


def basic_decomp(x, n: int, k: int, stream: Stream) -> Decomposition:
    """Split x (length <= n) into at most n fragments whose grammars
    hold at most max(k, 4) rules each."""
    xt = _as_tuple(x)
    if len(xt) > n:
        raise ValueError("sequence longer than bound n")
    if not xt:
        return Decomposition(slots=n, fragments={}, grammars={})
    budget = max(k, 4)
    for attempt in range(16):
        try:
            return _decomp_attempt(xt, n, budget, stream, attempt)
        except RuleCollision:
            continue
    # salted retries exhausted: trivial one-symbol fragments
    return _trivial_decomp(xt, n, stream)


_CUT_WINDOW = 4


def cut_points(xt: tuple, k: int, key: bytes) -> list:
    """Content-anchored fragment boundaries: a cut lands before position
    i when a keyed hash of the preceding window falls under ~6/k, except
    inside runs (a uniform window never cuts).  Each decision sees only
    the window, so an edit toggles only the cuts overlapping it."""
    rate = min(_FRAC_ONE, max(1, int(6.0 * _FRAC_ONE / max(k, 4))))
    cuts = []
    for i in range(_CUT_WINDOW, len(xt)):
        win = xt[i - _CUT_WINDOW:i]
        if win.count(win[0]) == _CUT_WINDOW:
            continue
        raw = b"".join(sv.to_bytes(16, "little") for sv in win)
        dg = hashlib.blake2b(raw, key=key, digest_size=4).digest()
        if int.from_bytes(dg, "big") >> (32 - _FRAC_BITS) < rate:
            cuts.append(i)
    return cuts


def _decomp_attempt(xt: tuple, n: int, k: int, stream: Stream,
                    attempt: int) -> Decomposition:
    bld = _Builder(stream.child("salt", attempt).read(16))
    bounds = [0] + cut_points(xt, k, stream.child("cut-key", 0).read(16))
    bounds.append(len(xt))
    rounds = chunk_rounds(k)
    hs = [pairwise_from_stream(stream.child("decomp-round", r),
                               RULE_ID_BITS + 1, _FRAC_BITS)
          for r in range(rounds)]

    final = []
    for a, b in zip(bounds, bounds[1:]):
        frag = xt[a:b]
        syms = [bld.intern(KIND_TERMINAL, sv) for sv in frag]
        syms = _run_compress(syms, bld)
        for h in hs:
            syms = _chunk_round(syms, bld, h)
            syms = _run_compress(syms, bld)
        g = _grammar_for(bld, syms)
        if len(g.rules) <= k:
            final.append((frag, g))
        else:
            # over budget: the fragment falls apart per symbol, which is
            # still determined by its content alone
            for sv in frag:
                t = bld.intern(KIND_TERMINAL, sv)
                final.append(((sv,), _grammar_for(bld, [t])))

    fragments = {}
    grammars = {}
    for i, (frag, g) in enumerate(final):
        if i >= n:
            raise RuleCollision("fragment table overflow")  # forces retry
        fragments[i] = frag
        grammars[i] = g
    return Decomposition(slots=n, fragments=fragments, grammars=grammars)


def _trivial_decomp(xt: tuple, n: int, stream: Stream) -> Decomposition:
    bld = _Builder(stream.child("salt", 9999).read(16))
    fragments = {}
    grammars = {}
    for i, s in enumerate(xt):
        fragments[i] = (s,)
        grammars[i] = _grammar_for(bld, [bld.intern(KIND_TERMINAL, s)])
    return Decomposition(slots=n, fragments=fragments, grammars=grammars)


def basic_decode(g: Grammar, limit: int = None):
    """Expand a grammar; UNDEFINED on any structural defect: missing or
    duplicated start, dangling reference, unreachable rule, cycle, or
    expansion beyond limit."""
    if not g.rules:
        return UNDEFINED
    starts = [rid for rid, (kind, _, _) in g.rules.items() if kind == KIND_START]
    if len(starts) != 1 or g.start not in (None, starts[0]):
        return UNDEFINED
    start = starts[0]

    # reachability must cover the rule set exactly
    seen = set()
    stack = [start]
    while stack:
        rid = stack.pop()
        if rid in seen:
            continue
        if rid not in g.rules:
            return UNDEFINED
        seen.add(rid)
        kind, a, b = g.rules[rid]
        if kind == KIND_PAIR:
            stack.extend((a, b))
        elif kind in (KIND_RUN, KIND_START):
            stack.append(a)
        elif kind != KIND_TERMINAL:
            return UNDEFINED
    if seen != set(g.rules):
        return UNDEFINED

    # sizes bottom-up; content addressing makes cycles impossible, but
    # adversarial rule sets are caught by the in-progress marker
    sizes: dict = {}

    def size_of(rid, guard):
        if rid in sizes:
            return sizes[rid]
        if rid in guard:
            return None
        guard.add(rid)
        kind, a, b = g.rules[rid]
        if kind == KIND_TERMINAL:
            out = 1
        elif kind == KIND_PAIR:
            sa, sb = size_of(a, guard), size_of(b, guard)
            out = None if sa is None or sb is None else sa + sb
        elif kind == KIND_RUN:
            if b < 2:
                return None
            sa = size_of(a, guard)
            out = None if sa is None else sa * b
        else:
            out = size_of(a, guard)
        guard.discard(rid)
        if out is not None and limit is not None and out > limit:
            return None
        sizes[rid] = out
        return out

    if size_of(start, set()) is None:
        return UNDEFINED

    out: list = []

    def expand(rid):
        kind, a, b = g.rules[rid]
        if kind == KIND_TERMINAL:
            out.append(a)
        elif kind == KIND_PAIR:
            expand(a)
            expand(b)
        elif kind == KIND_RUN:
            for _ in range(b):
                expand(a)
        else:
            expand(a)

    expand(start)
    return tuple(out)
