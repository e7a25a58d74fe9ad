"""Empirical calibration of the scheme's measured constants.

Each helper here plants a controlled amount of damage into random
strings, measures one observable, and reports the constant that makes
the corresponding bound tight:

* ``split_stats`` — how often a decomposition boundary of one string
  has no partner boundary on the other string's side of the canonical
  alignment (the "incompatible split" rate).
* ``gram_diff_stats`` — how many grammar rules differ between the two
  sides of a compatible fragment pair, normalised by the pair's edit
  distance.
* ``fingerprint_gap`` — the smallest edit-distance multiple at which a
  gap fingerprint of threshold t reliably distinguishes the strings.

All randomness is drawn from explicit seeds so reports are
reproducible run to run.
"""

import math
import random

from . import align
from .corekit import derive_stream
from .decomp import basic_decomp, cut_points
from .fingerprint import cgk_fingerprint, ted_fingerprint


def _random_string(rng: random.Random, length: int, alphabet: int = 16) -> tuple:
    return tuple(rng.randrange(alphabet) for _ in range(length))


def _plant_edits(x: tuple, e: int, rng: random.Random, alphabet: int = 16) -> tuple:
    """Apply e random substitutions/insertions/deletions to x.

    Inserted and substituted symbols come from a disjoint range so the
    planted edit distance equals e.
    """
    y = list(x)
    hi = alphabet
    for _ in range(e):
        op = rng.randrange(3)
        pos = rng.randrange(len(y)) if y else 0
        if op == 0 and y:
            y[pos] = hi + rng.randrange(alphabet)
        elif op == 1 and y:
            del y[pos]
        else:
            y.insert(pos, hi + rng.randrange(alphabet))
    return tuple(y)


def _path_vertices(path) -> set:
    """All lattice vertices visited by an alignment path."""
    verts = {(0, 0)}
    for edge in path:
        verts.add(edge.head)
    return verts


def split_stats(n: int, kp: int, e: int, trials: int, seed: int):
    """(incompatible boundaries, total boundaries) over planted-edit pairs.

    A boundary of x at position i is compatible when some boundary of y
    at position j puts the vertex (i, j) on the canonical alignment
    path of (x, y); otherwise the decomposition split it inconsistently.
    """
    rng = random.Random(f"split-{n}-{kp}-{e}-{seed}")
    bad = total = 0
    for t in range(trials):
        key = rng.randbytes(16)
        x = _random_string(rng, n - n // 8)
        y = _plant_edits(x, e, rng)
        cx = cut_points(x, kp, key)
        cy = set(cut_points(y, kp, key))
        path = align.canonical_alignment(x, y)
        verts = _path_vertices(path)
        for i in cx:
            total += 1
            if not any((i, j) in verts for j in cy):
                bad += 1
    return bad, total


def fit_through_origin(xs, ys):
    """Least-squares slope c for y = c·x, plus the R² of that fit."""
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    c = sxy / sxx if sxx else 0.0
    mean = sum(ys) / len(ys)
    ss_tot = sum((y - mean) ** 2 for y in ys)
    ss_res = sum((y - c * x) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 - ss_res / ss_tot if ss_tot else 1.0
    return c, r2


def c_split_fit(n: int, kp: int, edit_counts, trials: int, seed: int):
    """Fit rate = ĉ_split·(e/k') across the given edit counts.

    Returns (ĉ_split, R², rows) where rows holds (e, rate) pairs.
    """
    xs, ys, rows = [], [], []
    for e in edit_counts:
        bad, total = split_stats(n, kp, e, trials, seed)
        rate = bad / total if total else 0.0
        xs.append(e / kp)
        ys.append(rate)
        rows.append((e, rate))
    c, r2 = fit_through_origin(xs, ys)
    return c, r2, rows


def _fragment_pairs(x: tuple, y: tuple, kp: int, key: bytes):
    """Compatible fragment pairs of (x, y) under a shared cut key.

    Fragments pair up when both their endpoints are vertices of the
    canonical alignment path (corner-point compatibility).
    """
    bx = [0] + cut_points(x, kp, key) + [len(x)]
    by = [0] + cut_points(y, kp, key) + [len(y)]
    verts = _path_vertices(align.canonical_alignment(x, y))
    partner = {}
    for i in bx:
        for j in by:
            if (i, j) in verts:
                partner[i] = j
                break
    pairs = []
    for a, b in zip(bx, bx[1:]):
        if a in partner and b in partner and partner[a] < partner[b]:
            pairs.append((x[a:b], y[partner[a]:partner[b]]))
    return pairs


def gram_diff_stats(n: int, kp: int, e: int, trials: int, seed: int):
    """Per compatible pair: (|rule-set symmetric difference|, ED).

    Both fragments are parsed with the same randomness stream, so any
    rule difference is driven purely by content.  Identical fragments
    parse identically and are skipped (symmetric difference 0).
    """
    rng = random.Random(f"gram-{n}-{kp}-{e}-{seed}")
    out = []
    for t in range(trials):
        key = rng.randbytes(16)
        stream = derive_stream(rng.randbytes(32)).child("calib", t)
        x = _random_string(rng, n - n // 8)
        y = _plant_edits(x, e, rng)
        for idx, (fx, fy) in enumerate(_fragment_pairs(x, y, kp, key)):
            if fx == fy:
                continue
            st = stream.child("pair", idx)
            dx = basic_decomp(fx, n, kp, st)
            dy = basic_decomp(fy, n, kp, st)
            rx = set().union(*(g.rules.items() for g in dx.grammars.values())) \
                if dx.grammars else set()
            ry = set().union(*(g.rules.items() for g in dy.grammars.values())) \
                if dy.grammars else set()
            ed = align.edit_distance(fx, fy)
            out.append((len(rx ^ ry), ed))
    return out


def c_eh_estimate(n: int, kp: int, edit_counts, trials: int, seed: int) -> float:
    """ĉ_EH such that symdiff ≤ ĉ_EH·log²(n)·ED on the measured pairs.

    Uses the 95th percentile of the per-pair ratio, which is stable
    across string lengths (the max is dominated by rare outliers).
    """
    log2n = math.log2(n) ** 2
    ratios = []
    for e in edit_counts:
        for sym, ed in gram_diff_stats(n, kp, e, trials, seed):
            ratios.append(sym / (log2n * ed))
    if not ratios:
        return 0.0
    ratios.sort()
    return ratios[min(len(ratios) - 1, int(0.95 * len(ratios)))]


def fingerprint_gap(kind: str, t: int, n: int, trials: int, seed: int) -> float:
    """P̂: smallest multiple m with t·m planted edits separating the
    fingerprints in ≥ 95% of trials (∞ if none of the tested m work).
    """
    fp = ted_fingerprint if kind == "anchored" else cgk_fingerprint
    rng = random.Random(f"gap-{kind}-{t}-{n}-{seed}")
    for m in (0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0):
        e = max(1, int(t * m))
        hits = 0
        for tr in range(trials):
            stream = derive_stream(rng.randbytes(32)).child("fp", tr)
            x = _random_string(rng, n - n // 8)
            y = _plant_edits(x, e, rng)
            if fp(x, t, n, stream).value != fp(y, t, n, stream).value:
                hits += 1
        if hits >= 0.95 * trials:
            return m
    return math.inf
