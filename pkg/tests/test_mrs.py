import random

import pytest

from edsketch.corekit import (DEFAULT_PRIME, TEST_PRIME, Field, derive_stream,
                              pairwise_from_stream)
from edsketch.mrs import (IndexOverflow, SketchMismatch, hamming_sketch_params,
                          redundancy_count, restore, rmrs_recover, rmrs_sketch,
                          super_recover, super_sketch, super_sketch_dense,
                          trace, trace_add, trace_sub)

SMALL_PRIME = (1 << 31) - 1  # prime below the dense-path limit


@pytest.mark.parametrize("p", [TEST_PRIME, DEFAULT_PRIME])
def test_restore_inverts_single_mismatch(p, rng):
    F = Field(p)
    for _ in range(200):
        i = rng.randrange(min(p - 1, 1 << 20))
        u = rng.randrange(p)
        w = rng.randrange(p)
        if u == w:
            w = (w + 1) % p
        alpha = rng.randrange(1, p)
        d = trace_sub(p, trace(F, i, u, alpha), trace(F, i, w, alpha))
        assert restore(F, d) == (i, u, w)


def test_trace_add_sub_are_inverse(rng):
    F = Field(TEST_PRIME)
    a = trace(F, 3, 7, 5)
    b = trace(F, 9, 11, 5)
    assert trace_sub(TEST_PRIME, trace_add(TEST_PRIME, a, b), b) == a


def _planted_pair(rng, domain, count, p):
    pos = rng.sample(range(domain), count)
    u = {i: rng.randrange(1, p) for i in pos}
    w = {}
    for i in pos:
        v = rng.randrange(1, p)
        while v == u[i]:
            v = rng.randrange(1, p)
        w[i] = v
    shared = {i: rng.randrange(1, p)
              for i in rng.sample(sorted(set(range(domain)) - set(pos)), count)}
    u.update(shared)
    w.update(shared)
    return u, w, {(i, u[i], w[i]) for i in pos}


def test_rmrs_recovers_planted_mismatches(rng):
    F = Field(DEFAULT_PRIME)
    st = derive_stream(b"\x11" * 32)
    for trial in range(10):
        u, w, want = _planted_pair(rng, 1 << 12, 8, F.p)
        sku = rmrs_sketch(u, 1 << 12, 64, 9, F, st.child("t", trial))
        skw = rmrs_sketch(w, 1 << 12, 64, 9, F, st.child("t", trial))
        assert rmrs_recover(sku, skw) == want


def test_identical_inputs_recover_nothing(rng):
    F = Field(DEFAULT_PRIME)
    st = derive_stream(b"\x12" * 32)
    u = {i: rng.randrange(1, F.p) for i in range(100)}
    a = rmrs_sketch(u, 1 << 10, 32, 5, F, st)
    b = rmrs_sketch(dict(u), 1 << 10, 32, 5, F, st)
    assert rmrs_recover(a, b) == set()


def test_dense_path_matches_sparse(rng):
    F = Field(SMALL_PRIME)
    st = derive_stream(b"\x13" * 32)
    vals = [rng.randrange(F.p) for _ in range(500)]
    sparse = {i: v for i, v in enumerate(vals) if v}
    alpha = st.child("a", 0).field_nonzero(F)
    h = pairwise_from_stream(st.child("h", 0), 10, 5)
    a = super_sketch(sparse, 1 << 10, 32, F, alpha, h)
    b = super_sketch_dense(vals, 1 << 10, 32, F, alpha, h)
    assert a.buckets == b.buckets


def test_dense_path_rejects_wide_modulus():
    F = Field(DEFAULT_PRIME)
    st = derive_stream(b"\x14" * 32)
    alpha = st.child("a", 0).field_nonzero(F)
    h = pairwise_from_stream(st.child("h", 0), 10, 5)
    with pytest.raises(ValueError):
        super_sketch_dense([1, 2, 3], 1 << 10, 32, F, alpha, h)


def test_index_overflow():
    F = Field(TEST_PRIME)
    st = derive_stream(b"\x15" * 32)
    alpha = st.child("a", 0).field_nonzero(F)
    h = pairwise_from_stream(st.child("h", 0), 4, 2)
    with pytest.raises(IndexOverflow):
        super_sketch({16: 1}, 16, 4, F, alpha, h)


def test_mismatched_sketches_rejected():
    F = Field(TEST_PRIME)
    st = derive_stream(b"\x16" * 32)
    a = rmrs_sketch({1: 2}, 16, 4, 3, F, st.child("s", 0))
    b = rmrs_sketch({1: 2}, 16, 4, 3, F, st.child("s", 1))
    with pytest.raises(SketchMismatch):
        rmrs_recover(a, b)


def test_recovery_is_sound_under_overload(rng):
    """With far more mismatches than buckets, anything reported by a
    majority must still be a true mismatch (no fabricated triples)."""
    F = Field(DEFAULT_PRIME)
    st = derive_stream(b"\x17" * 32)
    u, w, want = _planted_pair(rng, 1 << 10, 200, F.p)
    sku = rmrs_sketch(u, 1 << 10, 8, 9, F, st)
    skw = rmrs_sketch(w, 1 << 10, 8, 9, F, st)
    assert rmrs_recover(sku, skw) <= want


def test_parameter_helpers():
    size, ell = hamming_sketch_params(4096, 32, 1e-3)
    assert size >= 4 * 32 and size & (size - 1) == 0
    assert ell >= 1
    assert redundancy_count(4096, 1e-3) == ell
