"""End-to-end edit-distance sketching.

sketch side
    the input is decomposed level by level into fragments whose rule
    budgets halve (main_decomp); each level's grammars are folded into a
    hierarchical mismatch-recovery sketch keyed by (node, rule id) with
    values carrying a per-node gap fingerprint watermark plus the rule
    content (grammar_condense); the binary interpolation tree over the
    deepest fragments contributes one sketch per depth whose values pack
    a Karp-Rabin fingerprint with the left-child size (location_condense).

recover side
    differing (node, rule) entries are pulled out of the sketch pairs,
    rebuilt into per-node grammars and decoded (find_strings); subtree
    sizes of the binary tree give each recovered node its start offset
    in both sequences (find_locations); prefix-minimal recovered nodes
    are aligned canonically and their costly edges merged across
    repetitions by majority (main_reconstruct / ed_recover).

Everything is derived from one 32-byte seed carried in the sketch, so
two sketches made independently with the same seed and parameters are
comparable, and a sketch file alone is enough to re-derive all hashing.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field as dfield

from . import align
from .corekit import DEFAULT_PRIME, Field, Stream, ceil_pow2, derive_stream
from .decomp import (RULE_ID_BITS, RULE_UNIVERSE, UNDEFINED, Grammar,
                     basic_decode, basic_decomp, decode_rule, encode_rule)
from .fingerprint import (InputTooLong, fingerprint_prime, kr_poly, kr_state,
                          kr_value, ted_fingerprint)
from .hmr import HmrSketch, TreeShape, hmr_recover, hmr_redundancy, hmr_sketch
from .mrs import SketchMismatch

ENC_BITS = 131
ENC_MASK = (1 << ENC_BITS) - 1

MAGIC = b"EDSK"
VERSION = 1


class ConstraintViolated(ValueError):
    """Parameter combination outside the supported envelope."""


class FieldTooSmall(ConstraintViolated):
    pass


class EncodingOverflow(ConstraintViolated):
    pass


class IncompatibleSketch(ValueError):
    """Sketches built with different parameters or seeds."""


class SliceDisciplineError(RuntimeError):
    """An output edge set crossed some slice twice."""


LARGE = "LARGE"


@dataclass(frozen=True)
class Profile:
    """Calibration profile: constants plugged into the parameter
    schedule and its validity checks."""

    name: str
    c_k: int = 32             # rule budget per threshold unit
    c_kappa: int = 256        # bucket capacity per threshold unit
    c_split: float = 2.0      # split-incompatibility constant
    c_eh: float = 8.0         # edit-to-Hamming constant
    c_load_base: float = 512.0  # load constant (raised to 8P when P > 4)
    markov: float = 2.0       # capacity margin over the threshold
    rho: int = 7              # repetition count
    ell: int = 5              # redundancy slots (0: use the formula)
    redundancy_multiplier: float = 8.0
    # per-level watermark prints sample every chunk pair (sharp), so a
    # node pair decodes from the sketch whenever its contents differ;
    # only the top print needs the coarse distance gap
    beta_level: float = math.inf
    # The top print is a bank of independent gap fingerprints with a
    # differ-count threshold: a single print cannot be simultaneously
    # quiet at distance k and loud at distance 5k (both tails are
    # exponential in the sampled-pair count), but counting how many of
    # m sparse prints differ separates the two regimes.  beta_top sets
    # the per-print sampling so roughly 5% of prints differ at
    # distance k and >20% at distance 5k.
    beta_top: float = 0.5     # chunk-sampling constant per top print
    lam_top: int = 8          # top-print chunk length (small, so the
                              # differing-chunk count tracks the distance
                              # instead of saturating)
    m_top: int = 128          # number of independent top prints
    theta_top: int = 18       # differ count that triggers LARGE
    strict: bool = False

    def c_load(self, P: float) -> float:
        return max(self.c_load_base, 8.0 * P)


DESK = Profile(name="desk")
PAPER = Profile(name="paper", ell=0, strict=True)

PROFILES = {"desk": DESK, "paper": PAPER}


@dataclass(frozen=True)
class Params:
    n: int
    k: int
    P: float
    s: int                 # log2 n
    d: int                 # levels; t_d = 1
    t: tuple               # thresholds t_0 .. t_d
    ks: tuple              # rule budgets k_0 .. k_d
    kappas: tuple          # capacities kappa_0 .. kappa_d
    rho: int
    ell: int               # 0 means: per-sketch formula
    R_gram: int
    R_loc: int
    delta: float
    p: int
    profile: str

    @property
    def field(self) -> Field:
        return Field(self.p)

    def gram_shape(self, j: int) -> tuple:
        shape = TreeShape((self.n,) * j + (RULE_UNIVERSE,))
        kappa = self.kappas[: j + 1] + (1,)
        return shape, kappa

    def loc_shape(self, j: int) -> tuple:
        shape = TreeShape((self.n,) * j)
        kappa = self.kappas[:j] + (1,)
        return shape, kappa

    def ell_for(self, shape: TreeShape) -> int:
        if self.ell:
            return self.ell
        mult = PROFILES[self.profile].redundancy_multiplier
        return hmr_redundancy(shape, self.delta, mult)


def _pow2(x: float) -> int:
    return ceil_pow2(max(1, math.ceil(x)))


def derive_params(k: int, n: int, P: float = 1.5, profile: str = "desk",
                  p: int = DEFAULT_PRIME) -> Params:
    if profile not in PROFILES:
        raise ConstraintViolated(f"unknown profile {profile!r}")
    prof = PROFILES[profile]
    if k < 1:
        raise ConstraintViolated("k must be >= 1")
    if P <= 1.0:
        raise ConstraintViolated("gap constant must exceed 1")
    if n < 2 or n & (n - 1):
        raise ConstraintViolated("n must be a power of two")
    if 40 * k * P > n:
        raise ConstraintViolated("need n >= 40 * k * P")
    s = n.bit_length() - 1
    t0 = _pow2(20 * k * P)
    d = t0.bit_length() - 1
    t = tuple(t0 >> j for j in range(d + 1))

    if prof.strict:
        lg = float(s)
        s_split = lg**4
        c_k = 32 * s_split * lg**6
        c_kappa = 512 * s_split * P * lg**12
        c_load = 64 * s_split * P * lg**6
        markov_factor = 8 * c_load / 8  # s_load * log^6 n over 8 t_j
        ks = tuple(_pow2(c_k * tj) for tj in t)
        kappas = tuple(_pow2(c_kappa * tj) for tj in t)
        c_split = s_split
        c_eh = s_split
    else:
        ks = tuple(prof.c_k * tj for tj in t)
        kappas = tuple(prof.c_kappa * tj for tj in t)
        c_load = prof.c_load(P)
        c_split = prof.c_split
        c_eh = prof.c_eh
        markov_factor = 8 * prof.markov

    # schedule validity
    if c_load < c_eh:
        raise ConstraintViolated("load constant below edit-to-Hamming constant")
    for j in range(1, d + 1):
        if ks[j] < kappas[j - 1] * 2 * c_split / c_load:
            raise ConstraintViolated(f"rule budget too small at level {j}")
        if t[j] < 2 * P * ks[j] / c_load:
            raise ConstraintViolated(f"threshold too small at level {j}")
        if not prof.strict and kappas[j] < markov_factor * t[j]:
            raise ConstraintViolated(f"capacity margin too small at level {j}")
        if kappas[j] < 4 * ks[j]:
            raise ConstraintViolated(f"capacity below 4x rule budget at level {j}")

    delta = float(n) ** -4
    params = Params(n=n, k=k, P=P, s=s, d=d, t=t, ks=ks, kappas=kappas,
                    rho=prof.rho, ell=prof.ell, R_gram=4 * (d + 1),
                    R_loc=4 * (d + 1), delta=delta, p=p, profile=profile)

    # field-size checks: filter soundness and value-packing injectivity
    max_print = n**5 + 1
    if (max_print << ENC_BITS) + ENC_MASK >= p:
        raise EncodingOverflow("modulus cannot pack watermark and rule content")
    if (max_print * n + n) * n >= p:
        raise EncodingOverflow("modulus cannot pack fingerprint, offset and size")
    worst_gram = n**d * RULE_UNIVERSE
    worst_loc = n**d
    if 4 * (worst_gram - 1) * kappas[0] > p or 4 * (worst_loc - 1) * kappas[0] > p:
        raise FieldTooSmall("modulus too small for the deepest level")
    return params


# ---------------------------------------------------------------------------
# stream layout helpers (shared by sketching and file deserialization)

def _rep_stream(root: Stream, ridx: int) -> Stream:
    return root.child("repetition", ridx)


def _gram_stream(rep: Stream, j: int) -> Stream:
    return rep.child("gram-sketch", j)


def _loc_stream(rep: Stream, j: int) -> Stream:
    return rep.child("loc-sketch", j)


# ---------------------------------------------------------------------------
# sketch side

@dataclass
class Bundle:
    """Per-repetition decomposition of one sequence."""

    substrs: list   # substrs[j]: {rank: fragment tuple}, j = 0..d
    grams: list     # grams[j-1]: {rank: Grammar}, j = 1..d
    prints: list    # prints[j-1]: {rank: watermark value}, j = 1..d
    loc_vals: list  # loc_vals[j-1]: {rank: packed (hash, offset, size)}, j = 1..d


def main_decomp(x: tuple, params: Params, rep: Stream) -> Bundle:
    n, d, s = params.n, params.d, params.s
    substrs = [{0: x}]
    grams = []
    prints = []
    for j in range(1, d + 1):
        cur = substrs[-1]
        nxt: dict = {}
        gj: dict = {}
        pj: dict = {}
        level_stream = rep.child("level", j)
        fp_stream = rep.child("orfp", j)
        mp = fingerprint_prime(n)
        off = 0
        for rank in sorted(cur.keys()):
            dec = basic_decomp(cur[rank], n, params.ks[j],
                               level_stream.child("node", rank))
            for i, frag in dec.fragments.items():
                crank = rank * n + i
                nxt[crank] = frag
                gj[crank] = dec.grammars[i]
                w = ted_fingerprint(
                    frag, params.t[j], n, fp_stream.child("node", crank),
                    beta=PROFILES[params.profile].beta_level).value
                # fold in the absolute offset: a fragment that merely
                # shifted still surfaces in the recovered difference, so
                # region merging sees no hole there
                pj[crank] = (w + off) % mp
                off += len(frag)
        substrs.append(nxt)
        grams.append(gj)
        prints.append(pj)

    # self-locating records: every fragment carries a content hash plus
    # its absolute start offset and size, packed into one field value
    st = kr_state(n, rep.child("fingerprint", 1))
    loc_vals = []
    for j in range(1, d + 1):
        vals: dict = {}
        off = 0
        for rank in sorted(substrs[j]):
            frag = substrs[j][rank]
            kv = kr_value(kr_poly(frag, st))
            vals[rank] = (kv * n + off) * n + len(frag)
            off += len(frag)
        loc_vals.append(vals)
    return Bundle(substrs=substrs, grams=grams, prints=prints, loc_vals=loc_vals)


def grammar_condense(bundle: Bundle, params: Params, rep: Stream) -> list:
    F = params.field
    out = []
    for j in range(1, params.d + 1):
        seq: dict = {}
        pj = bundle.prints[j - 1]
        for rank, g in bundle.grams[j - 1].items():
            w = pj[rank] << ENC_BITS
            base = rank * RULE_UNIVERSE
            for rid, (kind, a, b) in g.rules.items():
                seq[base + rid - 1] = w | encode_rule(kind, a, b)
        shape, kappa = params.gram_shape(j)
        out.append(hmr_sketch(seq, shape, kappa, params.R_gram, params.delta,
                              F, _gram_stream(rep, j), ell=params.ell_for(shape)))
    return out


def location_condense(bundle: Bundle, params: Params, rep: Stream) -> list:
    F = params.field
    out = []
    for j in range(1, params.d + 1):
        shape, kappa = params.loc_shape(j)
        out.append(hmr_sketch(bundle.loc_vals[j - 1], shape, kappa, params.R_loc,
                              params.delta, F, _loc_stream(rep, j),
                              ell=params.ell_for(shape)))
    return out


@dataclass
class RepSketch:
    grams: list
    locs: list


@dataclass
class EdSketch:
    params: Params
    seed: bytes
    top_print: tuple = ()
    reps: list = dfield(default_factory=list)
    verbatim: tuple = None  # raw sequence when the scheme degenerates

    def check_compatible(self, other: "EdSketch"):
        if self.params != other.params or self.seed != other.seed:
            raise IncompatibleSketch("parameters or seed differ")
        if (self.verbatim is None) != (other.verbatim is None):
            raise IncompatibleSketch("verbatim flag differs")


def _check_input(x: tuple, n: int):
    if len(x) >= n:
        raise InputTooLong(f"sequence length must stay below n = {n}")
    bound = n**3
    for sym in x:
        if not 0 <= sym < bound:
            raise ValueError("symbol outside the declared alphabet")


def ed_sketch(x, k: int, n: int, seed: bytes, P: float = 1.5,
              profile: str = "desk", p: int = DEFAULT_PRIME) -> EdSketch:
    xt = tuple(ord(c) for c in x) if isinstance(x, str) else tuple(x)
    if n < 2 or n & (n - 1):
        raise ConstraintViolated("n must be a power of two")
    _check_input(xt, n)
    if 40 * k * P >= n:
        # degenerate envelope: keep the sequence itself
        params = Params(n=n, k=k, P=P, s=n.bit_length() - 1, d=0, t=(1,),
                        ks=(0,), kappas=(1,), rho=1, ell=1, R_gram=4,
                        R_loc=4, delta=float(n) ** -4, p=p, profile=profile)
        return EdSketch(params=params, seed=seed, verbatim=xt)
    params = derive_params(k, n, P, profile, p)
    root = derive_stream(seed)
    prof = PROFILES[profile]
    t_top = math.ceil(20 * k * P)
    fs = root.child("fingerprint", 0)
    tops = tuple(
        ted_fingerprint(xt, t_top, n, fs.child("print", i),
                        beta=prof.beta_top, lam=prof.lam_top).value
        for i in range(prof.m_top))
    sk = EdSketch(params=params, seed=seed, top_print=tops)
    for ridx in range(params.rho):
        rep = _rep_stream(root, ridx)
        bundle = main_decomp(xt, params, rep)
        sk.reps.append(RepSketch(grams=grammar_condense(bundle, params, rep),
                                 locs=location_condense(bundle, params, rep)))
    return sk


# ---------------------------------------------------------------------------
# recover side

def find_strings(rx: RepSketch, ry: RepSketch, params: Params) -> dict:
    """{(level, rank): (x fragment, y fragment)} for every node whose
    recovered rule sets decode; a side with no values at all is a
    fragment present in only one string and decodes to the empty tuple."""
    out: dict = {}
    for j in range(1, params.d + 1):
        triples = hmr_recover(rx.grams[j - 1], ry.grams[j - 1])
        nodes: dict = {}
        for flat, a, b in triples:
            rank, off = divmod(flat, RULE_UNIVERSE)
            nodes.setdefault(rank, []).append((off + 1, a, b))
        for rank, entries in nodes.items():
            gx = _rules_from_values(entries, 1)
            gy = _rules_from_values(entries, 2)
            if gx is None or gy is None:
                continue
            fx = basic_decode(Grammar(rules=gx), params.n) if gx else ()
            fy = basic_decode(Grammar(rules=gy), params.n) if gy else ()
            if fx is UNDEFINED or fy is UNDEFINED:
                continue
            out[(j, rank)] = (fx, fy)
    return out


def _rules_from_values(entries: list, pos: int):
    """Parse one side's rule set out of packed values; None when the
    watermarks disagree or a value is malformed."""
    rules: dict = {}
    print_seen = None
    for rid, a, b in entries:
        v = a if pos == 1 else b
        if v == 0:
            continue
        w, enc = v >> ENC_BITS, v & ENC_MASK
        if print_seen is None:
            print_seen = w
        elif print_seen != w:
            return None
        kind, ra, rb = decode_rule(enc)
        if kind < 1 or kind > 4:
            return None
        rules[rid] = (kind, ra, rb)
    return rules


def find_locations(rx: RepSketch, ry: RepSketch, params: Params,
                   str_nodes: dict) -> dict:
    """{(level, rank): (x start, y start)} unpacked from the self-locating
    records; a one-sided node keeps None for its absent side.  Records
    whose sizes contradict the decoded fragments are dropped."""
    n = params.n
    levels: dict = {}
    for j in range(1, params.d + 1):
        level: dict = {}
        for flat, a, b in hmr_recover(rx.locs[j - 1], ry.locs[j - 1]):
            level[flat] = (a, b)
        levels[j] = level
    out: dict = {}
    for (j, rank), (fx, fy) in str_nodes.items():
        got = levels[j].get(rank)
        if got is None:
            continue
        a, b = got
        if (a % n != len(fx) if a else fx != ()):
            continue
        if (b % n != len(fy) if b else fy != ()):
            continue
        ox = (a // n) % n if a else None
        oy = (b // n) % n if b else None
        out[(j, rank)] = (ox, oy)
    return out


def _top_nodes(loc_nodes, s: int) -> list:
    """Prefix-minimal nodes; (j, rank) is below (j', rank') when j' < j
    and rank >> ((j - j') * s) == rank'."""
    keep = []
    items = sorted(loc_nodes)
    present = set(items)
    for (j, rank) in items:
        covered = False
        for jp in range(1, j):
            if (jp, rank >> ((j - jp) * s)) in present:
                covered = True
                break
        if not covered:
            keep.append((j, rank))
    return keep


def main_reconstruct(rx: RepSketch, ry: RepSketch, params: Params) -> set:
    """Edges from one repetition: recovered fragments that are adjacent
    on both sides merge into maximal regions, and each region pair is
    aligned as a whole — so fragment boundaries that drifted between the
    two decompositions still reconstruct the true edit script."""
    str_nodes = find_strings(rx, ry, params)
    locs = find_locations(rx, ry, params, str_nodes)
    nodes = []
    for (j, rank) in _top_nodes(locs, params.s):
        fx, fy = str_nodes[(j, rank)]
        ox, oy = locs[(j, rank)]
        order = rank * params.n ** (params.d - j)
        nodes.append((order, fx, ox, fy, oy))
    nodes.sort(key=lambda nd: nd[0])

    groups = []
    cur = None  # [x syms, x start, x end, y syms, y start, y end]
    drift = 0   # x minus y offset after the preceding group
    for _, fx, ox, fy, oy in nodes:
        if cur is not None and (ox is None or ox == cur[2]) \
                and (oy is None or oy == cur[5]):
            cur[0].extend(fx)
            cur[2] += len(fx)
            cur[3].extend(fy)
            cur[5] += len(fy)
            continue
        if cur is not None:
            groups.append(cur)
            drift = cur[2] - cur[5]
        if ox is None:
            ox = oy + drift
        if oy is None:
            oy = ox - drift
        cur = [list(fx), ox, ox + len(fx), list(fy), oy, oy + len(fy)]
    if cur is not None:
        groups.append(cur)

    edges: set = set()
    for xs, sx, _, ys, sy, _ in groups:
        x_part, y_part = tuple(xs), tuple(ys)
        path = align.canonical_alignment(x_part, y_part)
        edges |= align.costly_annotated(x_part, y_part, path, sx, sy)
    return edges


def check_slice_discipline(edges):
    by_v: dict = {}
    by_h: dict = {}
    for e in edges:
        if e.kind in (align.HORIZONTAL, align.DIAGONAL):
            if by_v.setdefault(e.i, e) is not e:
                raise SliceDisciplineError(f"two edges in vertical slice {e.i + 1}")
        if e.kind in (align.VERTICAL, align.DIAGONAL):
            if by_h.setdefault(e.j, e) is not e:
                raise SliceDisciplineError(f"two edges in horizontal slice {e.j + 1}")


@dataclass
class Verdict:
    large: bool
    distance: int = None
    edges: frozenset = None


def ed_recover(sk_x: EdSketch, sk_y: EdSketch) -> Verdict:
    sk_x.check_compatible(sk_y)
    params = sk_x.params
    if sk_x.verbatim is not None:
        xt, yt = sk_x.verbatim, sk_y.verbatim
        dist = align.edit_distance(xt, yt)
        if dist > params.k:
            return Verdict(large=True)
        edges = frozenset(align.costly_annotated(xt, yt, align.canonical_alignment(xt, yt)))
        check_slice_discipline(edges)
        return Verdict(large=False, distance=dist, edges=edges)
    prof = PROFILES[params.profile]
    differ = sum(a != b for a, b in zip(sk_x.top_print, sk_y.top_print))
    if differ >= prof.theta_top:
        return Verdict(large=True)
    counts: dict = {}
    for rx, ry in zip(sk_x.reps, sk_y.reps):
        for e in main_reconstruct(rx, ry, params):
            counts[e] = counts.get(e, 0) + 1
    need = params.rho / 2
    found = frozenset(e for e, c in counts.items() if c > need)
    if len(found) > params.k:
        return Verdict(large=True)
    check_slice_discipline(found)
    return Verdict(large=False, distance=len(found), edges=found)


# ---------------------------------------------------------------------------
# serialization

def _write_u(buf, v: int, width: int):
    buf.write(int(v).to_bytes(width, "little"))


def _read_u(buf, width: int) -> int:
    return int.from_bytes(buf.read(width), "little")


def _serialize_hmr(buf, sk: HmrSketch):
    F = sk.field
    w = F.elem_bytes()
    _write_u(buf, sk.shape.depth, 4)
    for L in sk.shape.level_sizes:
        _write_u(buf, L, 8)
    for kp in sk.kappa:
        _write_u(buf, kp, 8)
    _write_u(buf, sk.R, 4)
    _write_u(buf, int(sk.delta * (1 << 62)), 8)
    _write_u(buf, sk.ell, 4)
    _write_u(buf, sk.domain % (1 << 128), 16)
    for slot in sk.slots:
        occupied = sorted(slot.buckets)
        chunk = bytearray()
        chunk += len(occupied).to_bytes(8, "little")
        for b in occupied:
            chunk += b.to_bytes(8, "little")
            for c in slot.buckets[b]:
                chunk += c.to_bytes(w, "little")
        buf.write(bytes(chunk))


def _deserialize_hmr(buf, params: Params, shape: TreeShape, kappa: tuple,
                     R: int, stream: Stream) -> HmrSketch:
    F = params.field
    w = F.elem_bytes()
    depth = _read_u(buf, 4)
    sizes = tuple(_read_u(buf, 8) for _ in range(depth))
    kap = tuple(_read_u(buf, 8) for _ in range(depth + 1))
    r_read = _read_u(buf, 4)
    delta = _read_u(buf, 8) / (1 << 62)
    ell = _read_u(buf, 4)
    _read_u(buf, 16)
    if sizes != shape.level_sizes or kap != kappa or r_read != R:
        raise IncompatibleSketch("sketch header does not match parameters")
    sk = hmr_sketch({}, shape, kappa, R, params.delta, F, stream, ell=ell)
    for slot in sk.slots:
        occupied = _read_u(buf, 8)
        for _ in range(occupied):
            b = _read_u(buf, 8)
            slot.buckets[b] = tuple(F.decode(buf.read(w)) for _ in range(4))
    return sk


def serialize(sk: EdSketch, buf):
    params = sk.params
    buf.write(MAGIC)
    _write_u(buf, VERSION, 2)
    _write_u(buf, params.n, 8)
    _write_u(buf, params.k, 8)
    _write_u(buf, int(round(params.P * 10**6)), 8)
    name = params.profile.encode()
    _write_u(buf, len(name), 1)
    buf.write(name)
    pb = params.p.to_bytes((params.p.bit_length() + 7) // 8, "little")
    _write_u(buf, len(pb), 2)
    buf.write(pb)
    _write_u(buf, 1 if sk.verbatim is not None else 0, 1)
    buf.write(sk.seed)
    if sk.verbatim is not None:
        _write_u(buf, len(sk.verbatim), 8)
        for sym in sk.verbatim:
            _write_u(buf, sym, 8)
        return
    _write_u(buf, len(sk.top_print), 2)
    for v in sk.top_print:
        _write_u(buf, v, 16)
    for rep in sk.reps:
        for h in rep.grams + rep.locs:
            payload = io.BytesIO()
            _serialize_hmr(payload, h)
            raw = payload.getvalue()
            _write_u(buf, len(raw), 8)
            buf.write(raw)


def deserialize(buf) -> EdSketch:
    if buf.read(4) != MAGIC:
        raise IncompatibleSketch("bad magic")
    if _read_u(buf, 2) != VERSION:
        raise IncompatibleSketch("unsupported version")
    n = _read_u(buf, 8)
    k = _read_u(buf, 8)
    P = _read_u(buf, 8) / 10**6
    name = buf.read(_read_u(buf, 1)).decode()
    p = int.from_bytes(buf.read(_read_u(buf, 2)), "little")
    verbatim = _read_u(buf, 1)
    seed = buf.read(32)
    if verbatim:
        L = _read_u(buf, 8)
        xt = tuple(_read_u(buf, 8) for _ in range(L))
        sk = ed_sketch(xt, k, n, seed, P, name, p)
        if sk.verbatim is None:
            raise IncompatibleSketch("verbatim flag does not match parameters")
        return sk
    params = derive_params(k, n, P, name, p)
    m = _read_u(buf, 2)
    top = tuple(_read_u(buf, 16) for _ in range(m))
    sk = EdSketch(params=params, seed=seed, top_print=top)
    root = derive_stream(seed)
    for ridx in range(params.rho):
        rep = _rep_stream(root, ridx)
        grams = []
        for j in range(1, params.d + 1):
            _read_u(buf, 8)
            shape, kappa = params.gram_shape(j)
            grams.append(_deserialize_hmr(buf, params, shape, kappa,
                                          params.R_gram, _gram_stream(rep, j)))
        locs = []
        for j in range(1, params.d + 1):
            _read_u(buf, 8)
            shape, kappa = params.loc_shape(j)
            locs.append(_deserialize_hmr(buf, params, shape, kappa,
                                         params.R_loc, _loc_stream(rep, j)))
        sk.reps.append(RepSketch(grams=grams, locs=locs))
    return sk


class _CountingSink:
    def __init__(self):
        self.count = 0

    def write(self, raw: bytes):
        self.count += len(raw)


def serialized_size(sk: EdSketch) -> int:
    sink = _CountingSink()
    serialize(sk, sink)
    return sink.count
