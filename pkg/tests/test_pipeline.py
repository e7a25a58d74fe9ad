import io
import random

import pytest

from edsketch import align
from edsketch.align import AnnotatedEdge
from edsketch.pipeline import (ConstraintViolated, EncodingOverflow,
                               IncompatibleSketch, SliceDisciplineError,
                               check_slice_discipline, derive_params,
                               deserialize, ed_recover, ed_sketch, serialize,
                               serialized_size)

from conftest import plant_edits, random_symbols

SEED = b"\x51" * 32


def _roundtrip(sk):
    buf = io.BytesIO()
    serialize(sk, buf)
    raw = buf.getvalue()
    assert len(raw) == serialized_size(sk)
    return deserialize(io.BytesIO(raw)), raw


def test_identical_strings_have_distance_zero(rng):
    x = bytes(random_symbols(rng, 120, 256))
    a = ed_sketch(x, 4, 256, SEED)
    b = ed_sketch(x, 4, 256, SEED)
    v = ed_recover(a, b)
    assert not v.large and v.distance == 0 and v.edges == frozenset()


def test_single_substitution_recovered_exactly(rng):
    x = random_symbols(rng, 180, 8)
    y = x[:90] + (99,) + x[91:]
    v = ed_recover(ed_sketch(x, 4, 256, SEED), ed_sketch(y, 4, 256, SEED))
    assert not v.large
    assert v.distance == 1
    assert v.edges == {AnnotatedEdge(90, 90, "D", x[90], 99)}


def test_recovered_script_matches_dp_oracle(rng):
    for trial in range(3):
        x = random_symbols(rng, 150 + 20 * trial, 8)
        y = plant_edits(x, 3, rng, 8)
        v = ed_recover(ed_sketch(x, 4, 256, SEED), ed_sketch(y, 4, 256, SEED))
        want = align.costly_annotated(x, y, align.canonical_alignment(x, y))
        assert not v.large
        assert v.edges == frozenset(want)
        assert align.reconstruct_other(x, v.edges) == y


def test_serialization_roundtrip_preserves_verdict(rng):
    x = random_symbols(rng, 160, 8)
    y = plant_edits(x, 2, rng, 8)
    a = ed_sketch(x, 4, 256, SEED)
    b = ed_sketch(y, 4, 256, SEED)
    want = ed_recover(a, b)
    a2, raw_a = _roundtrip(a)
    b2, _ = _roundtrip(b)
    got = ed_recover(a2, b2)
    assert (got.large, got.distance, got.edges) \
        == (want.large, want.distance, want.edges)
    # re-serialization is byte-identical
    buf = io.BytesIO()
    serialize(a2, buf)
    assert buf.getvalue() == raw_a


def test_verbatim_mode_small_budget_ratio(rng):
    # 40*k*P >= n forces the degenerate sketch that stores the string
    x = bytes(random_symbols(rng, 100, 256))
    y = bytes(plant_edits(tuple(x), 2, rng, 200))
    a = ed_sketch(x, 8, 256, SEED)
    assert a.verbatim is not None
    b = ed_sketch(y, 8, 256, SEED)
    v = ed_recover(a, b)
    assert not v.large and v.distance == align.edit_distance(x, y)
    a2, _ = _roundtrip(a)
    assert a2.verbatim == a.verbatim
    far = bytes(random_symbols(rng, 200, 256))
    assert ed_recover(a, ed_sketch(far, 8, 256, SEED)).large


def test_incompatible_sketches_rejected(rng):
    x = bytes(random_symbols(rng, 100, 256))
    a = ed_sketch(x, 4, 256, SEED)
    with pytest.raises(IncompatibleSketch):
        ed_recover(a, ed_sketch(x, 4, 256, b"\x52" * 32))
    with pytest.raises(IncompatibleSketch):
        ed_recover(a, ed_sketch(x, 2, 256, SEED))
    with pytest.raises(IncompatibleSketch):
        ed_recover(a, ed_sketch(x, 4, 512, SEED))


def test_input_constraints():
    with pytest.raises(ConstraintViolated):
        ed_sketch(b"ab", 2, 100, SEED)  # n not a power of two
    with pytest.raises(Exception):
        ed_sketch(bytes(300), 2, 256, SEED)  # length >= n
    with pytest.raises(ValueError):
        ed_sketch([1 << 40], 2, 256, SEED)  # symbol outside alphabet


def test_slice_discipline_checker():
    check_slice_discipline({AnnotatedEdge(0, 0, "D", 1, 2),
                            AnnotatedEdge(5, 5, "V", None, 3)})
    with pytest.raises(SliceDisciplineError):
        check_slice_discipline({AnnotatedEdge(0, 0, "D", 1, 2),
                                AnnotatedEdge(0, 1, "H", 1, None)})


def test_derive_params_ladder():
    p = derive_params(8, 1024)
    assert p.t[0] >= p.t[-1] == 1
    assert all(a >= b for a, b in zip(p.t, p.t[1:]))
    assert len(p.t) == p.d + 1
    assert len(p.ks) == len(p.kappas) == p.d + 1
    assert p.rho >= 1 and p.rho % 2 == 1


def test_sketch_deterministic(rng):
    x = bytes(random_symbols(rng, 150, 256))
    a = ed_sketch(x, 4, 256, SEED)
    b = ed_sketch(x, 4, 256, SEED)
    ba, bb = io.BytesIO(), io.BytesIO()
    serialize(a, ba)
    serialize(b, bb)
    assert ba.getvalue() == bb.getvalue()
