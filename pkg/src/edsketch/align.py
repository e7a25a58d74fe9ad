"""Alignment grids, canonical optimal alignments, and annotated edit
scripts.

A grid for sequences x, y has vertices (i, j) with 0 <= i <= |x| and
0 <= j <= |y|.  Edges:

  horizontal (i, j) -> (i+1, j)   consumes x[i+1], cost 1 (deletion)
  vertical   (i, j) -> (i, j+1)   consumes y[j+1], cost 1 (insertion)
  diagonal   (i, j) -> (i+1, j+1) cost 0 if x[i+1] == y[j+1] else 1

The canonical alignment is the optimal source-to-sink path that is
lexicographically maximal under the edge order
vertical > diagonal > horizontal, read from the source.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

VERTICAL = "V"
DIAGONAL = "D"
HORIZONTAL = "H"

# sentinel for restrict() on a box whose corners miss the path
NOT_COMPATIBLE = object()

# sentinel for absent symbol annotations
EPS = None


class MalformedEdgeSet(ValueError):
    """Raised when an annotated edge set is not a subset of any valid
    source-to-sink path for the given sequence."""


@dataclass(frozen=True, order=True)
class Edge:
    i: int
    j: int
    kind: str  # V, D or H

    @property
    def head(self) -> tuple:
        if self.kind == VERTICAL:
            return (self.i, self.j + 1)
        if self.kind == HORIZONTAL:
            return (self.i + 1, self.j)
        return (self.i + 1, self.j + 1)


@dataclass(frozen=True, order=True)
class AnnotatedEdge:
    """A costly edge together with the symbols it consumes.

    x_sym is EPS for vertical edges, y_sym is EPS for horizontal ones.
    """

    i: int
    j: int
    kind: str
    x_sym: object = EPS
    y_sym: object = EPS

    def text(self) -> str:
        if self.kind == DIAGONAL:
            return f"D {self.i} {self.j} {self.x_sym} {self.y_sym}"
        return f"{self.kind} {self.i} {self.j}"


def _as_tuple(seq: Sequence) -> tuple:
    if isinstance(seq, str):
        return tuple(ord(c) for c in seq)
    return tuple(seq)


def _dp_rows_small(x: tuple, y: tuple) -> list:
    n, m = len(x), len(y)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for j in range(m + 1):
        dist[n][j] = m - j
    for i in range(n - 1, -1, -1):
        row = dist[i]
        nxt = dist[i + 1]
        row[m] = n - i
        for j in range(m - 1, -1, -1):
            c = 0 if x[i] == y[j] else 1
            row[j] = min(nxt[j] + 1, row[j + 1] + 1, nxt[j + 1] + c)
    return dist

def _dp_rows_numpy(x: tuple, y: tuple) -> np.ndarray:
    # suffix-distance table computed row by row; the in-row dependency
    # row[j] = min(t[j], row[j+1] + 1) is a reverse running minimum of
    # t[j'] + j', so each row is a few vectorised passes
    n, m = len(x), len(y)
    xa = np.asarray(x, dtype=np.int64)
    ya = np.asarray(y, dtype=np.int64)
    dist = np.empty((n + 1, m + 1), dtype=np.int32)
    dist[n] = np.arange(m, -1, -1, dtype=np.int32)
    idx = np.arange(m + 1, dtype=np.int32)
    big = np.int32(n + m + 2)
    for i in range(n - 1, -1, -1):
        nxt = dist[i + 1]
        t = np.empty(m + 1, dtype=np.int32)
        t[m] = big
        c = (xa[i] != ya).astype(np.int32)
        t[:m] = np.minimum(nxt[:m] + 1, nxt[1:] + c)
        t[m] = min(t[m], nxt[m] + 1)
        shifted = t + idx
        best = np.minimum.accumulate(shifted[::-1])[::-1] - idx
        dist[i] = np.minimum(t, best)
    return dist


def suffix_distance_table(x: Sequence, y: Sequence):
    """Table D with D[i][j] = edit distance between x[i:] and y[j:]."""
    xt, yt = _as_tuple(x), _as_tuple(y)
    if (len(xt) + 1) * (len(yt) + 1) <= 1200:
        return _dp_rows_small(xt, yt)
    return _dp_rows_numpy(xt, yt)


def edit_distance(x: Sequence, y: Sequence) -> int:
    return int(suffix_distance_table(x, y)[0][0])


def canonical_alignment(x: Sequence, y: Sequence) -> list:
    """Greedy forward walk over the suffix-distance table, preferring
    vertical, then diagonal, then horizontal at every step.  Returns the
    edge list of the canonical optimal alignment."""
    xt, yt = _as_tuple(x), _as_tuple(y)
    dist = suffix_distance_table(xt, yt)
    n, m = len(xt), len(yt)
    i = j = 0
    edges = []
    while i < n or j < m:
        cur = dist[i][j]
        if j < m and 1 + dist[i][j + 1] == cur:
            edges.append(Edge(i, j, VERTICAL))
            j += 1
            continue
        if i < n and j < m:
            c = 0 if xt[i] == yt[j] else 1
            if c + dist[i + 1][j + 1] == cur:
                edges.append(Edge(i, j, DIAGONAL))
                i += 1
                j += 1
                continue
        edges.append(Edge(i, j, HORIZONTAL))
        i += 1
    return edges


def alignment_cost(x: Sequence, y: Sequence, edges: list) -> int:
    xt, yt = _as_tuple(x), _as_tuple(y)
    total = 0
    for e in edges:
        if e.kind == DIAGONAL:
            total += 0 if xt[e.i] == yt[e.j] else 1
        else:
            total += 1
    return total


def costly_annotated(x: Sequence, y: Sequence, edges: list,
                     x_offset: int = 0, y_offset: int = 0) -> set:
    """Annotated set of the costly edges of an alignment, optionally
    shifted into global coordinates."""
    xt, yt = _as_tuple(x), _as_tuple(y)
    out = set()
    for e in edges:
        if e.kind == VERTICAL:
            out.add(AnnotatedEdge(e.i + x_offset, e.j + y_offset, VERTICAL,
                                  EPS, yt[e.j]))
        elif e.kind == HORIZONTAL:
            out.add(AnnotatedEdge(e.i + x_offset, e.j + y_offset, HORIZONTAL,
                                  xt[e.i], EPS))
        else:
            if xt[e.i] != yt[e.j]:
                out.add(AnnotatedEdge(e.i + x_offset, e.j + y_offset, DIAGONAL,
                                      xt[e.i], yt[e.j]))
    return out


def reconstruct_other(x: Sequence, costly: set) -> tuple:
    """Rebuild y from x and the annotated costly edges of some
    alignment of (x, y).  All unlisted path edges must be free
    diagonals, which pins the path and the missing symbols."""
    xt = _as_tuple(x)
    edges = sorted(costly, key=lambda e: (e.i, e.j))
    y = []
    i = j = 0
    for e in edges:
        di, dj = e.i - i, e.j - j
        if di != dj or di < 0:
            raise MalformedEdgeSet(f"gap to edge at ({e.i},{e.j}) is not diagonal")
        if e.i > len(xt) or (e.kind != VERTICAL and e.i >= len(xt)):
            raise MalformedEdgeSet("edge beyond end of sequence")
        for t in range(di):
            y.append(xt[i + t])  # free diagonal run
        i, j = e.i, e.j
        if e.kind == VERTICAL:
            if e.y_sym is EPS:
                raise MalformedEdgeSet("vertical edge lacks its symbol")
            y.append(e.y_sym)
            j += 1
        elif e.kind == HORIZONTAL:
            if e.x_sym is not EPS and e.x_sym != xt[i]:
                raise MalformedEdgeSet("horizontal edge contradicts sequence")
            i += 1
        else:
            if e.y_sym is EPS:
                raise MalformedEdgeSet("diagonal edge lacks its symbol")
            if e.x_sym is not EPS and e.x_sym != xt[i]:
                raise MalformedEdgeSet("diagonal edge contradicts sequence")
            if e.x_sym == e.y_sym:
                raise MalformedEdgeSet("free diagonal listed as costly")
            y.append(e.y_sym)
            i += 1
            j += 1
    while i < len(xt):
        y.append(xt[i])
        i += 1
    return tuple(y)


def restrict(edges: list, box: tuple):
    """Sub-path of an alignment inside box = (i_lo, i_hi, j_lo, j_hi),
    meaning the vertex range (i_lo, j_lo) .. (i_hi, j_hi).  Returns
    NOT_COMPATIBLE unless the path passes through both corners."""
    i_lo, i_hi, j_lo, j_hi = box
    verts = []
    cur = (edges[0].i, edges[0].j) if edges else None
    if cur is None:
        return NOT_COMPATIBLE
    points = [cur]
    for e in edges:
        points.append(e.head)
    if (i_lo, j_lo) not in points or (i_hi, j_hi) not in points:
        return NOT_COMPATIBLE
    lo = points.index((i_lo, j_lo))
    hi = points.index((i_hi, j_hi))
    return edges[lo:hi]


def edge_slice(edges, kind: str, index: int) -> list:
    """Edges of the given slice.  Vertical slice i holds the edges whose
    first coordinate goes from i-1 to i (horizontal and diagonal edges
    with tail first-coordinate i-1); horizontal slice j is symmetric."""
    out = []
    for e in edges:
        if kind == VERTICAL:
            if e.kind in (HORIZONTAL, DIAGONAL) and e.i == index - 1:
                out.append(e)
        else:
            if e.kind in (VERTICAL, DIAGONAL) and e.j == index - 1:
                out.append(e)
    return out
