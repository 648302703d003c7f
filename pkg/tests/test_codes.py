import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ftqm import codes as cd


def brute_codewords(gen: np.ndarray) -> np.ndarray:
    """Every message times the generator, computed densely."""
    k = gen.shape[0]
    msgs = np.array(list(itertools.product([0, 1], repeat=k)), dtype=np.int64)
    return (msgs @ gen.astype(np.int64)) % 2


def brute_distribution(gen: np.ndarray) -> dict:
    words = brute_codewords(gen)
    w, c = np.unique(words.sum(axis=1), return_counts=True)
    return dict(zip(w.tolist(), c.tolist()))


dense_matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 10).flatmap(
        lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                           min_size=r, max_size=r)))


@given(st.lists(st.lists(st.integers(0, 1), min_size=70, max_size=70), min_size=1, max_size=4))
def test_pack_unpack_round_trip(rows):
    dense = np.array(rows, dtype=np.uint8)
    assert np.array_equal(cd.unpack_bits(cd.pack_bits(dense), 70), dense)


def test_packing_is_little_endian():
    words = cd.pack_bits([1, 0, 1] + [0] * 61 + [1])
    assert words.shape == (1, 2)
    assert int(words[0, 0]) == 0b101
    assert int(words[0, 1]) == 1


def test_tail_bits_rejected():
    with pytest.raises(ValueError):
        cd.BinaryMatrix(np.array([[1 << 5]], dtype=np.uint64), 3)


@settings(max_examples=60)
@given(dense_matrices)
def test_rank_and_null_space_against_brute_force(rows):
    a = np.array(rows, dtype=np.uint8)
    n = a.shape[1]
    mat = cd.BinaryMatrix.from_dense(a)
    null = mat.null_space()
    kernel = {v for v in itertools.product([0, 1], repeat=n)
              if not ((a.astype(int) @ np.array(v)) % 2).any()}
    assert 2 ** null.nrows == len(kernel)
    assert mat.rank() + null.nrows == n
    for row in null.to_dense():
        assert tuple(int(x) for x in row) in kernel
    # canonical form: null space is already reduced
    assert null.rref()[0] == null


def test_rref_pivots_are_identity_columns():
    mat = cd.BinaryMatrix.from_strings(["1101", "0111", "1010"])
    red, piv = mat.rref()
    dense = red.to_dense()
    assert np.array_equal(dense[:, piv], np.eye(len(piv), dtype=np.uint8))


def test_rm13_generator_matches_reference_matrix():
    expected = "00001111\n00110011\n01010101\n11111111"
    assert cd.rm_generator(1, 3).to_text() == expected


@pytest.mark.parametrize("r,m", [(-1, 3), (4, 3), (1, 17)])
def test_rm_generator_range(r, m):
    with pytest.raises(ValueError):
        cd.rm_generator(r, m)


@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
def test_shortened_and_punctured_closed_forms(m):
    bar, star = cd.shortened_rm(m), cd.punctured_rm(m)
    assert (bar.n, bar.k) == (2 ** m - 1, m)
    assert (star.n, star.k) == (2 ** m - 1, m + 1)
    assert cd.weight_distribution(bar).counts == brute_distribution(bar.generator.to_dense())
    assert cd.weight_distribution(bar) == cd.shortened_rm_distribution(m)
    assert cd.weight_distribution(star) == cd.punctured_rm_distribution(m)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_rm_star_weights_as_stated(m):
    # one word of weight 0, 2^m-1 of weight 2^(m-1)-1, 2^m-1 of weight 2^(m-1), one of 2^m-1
    h = 2 ** (m - 1)
    assert cd.punctured_rm_distribution(m).counts == {0: 1, h - 1: 2 ** m - 1, h: 2 ** m - 1,
                                                      2 ** m - 1: 1}


def test_hamming_15_11():
    ham = cd.dual(cd.shortened_rm(4))
    assert (ham.n, ham.k) == (15, 11)
    dist = cd.weight_distribution(ham)
    assert dist.counts == brute_distribution(ham.generator.to_dense())
    assert dist.as_list()[:5] == [1, 0, 0, 35, 105]
    assert dist.min_distance == 3


@pytest.mark.parametrize("m", [3, 4, 5])
def test_hamming_min_distance(m):
    assert cd.macwilliams_transform(cd.shortened_rm_distribution(m)).min_distance == 3


def test_macwilliams_known_pair():
    d = cd.macwilliams_transform(cd.punctured_rm_distribution(3))
    assert d.counts == {0: 1, 4: 7}


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_macwilliams_matches_enumerated_dual(m):
    for code in (cd.shortened_rm(m), cd.punctured_rm(m)):
        enumerated_dual = cd.weight_distribution(cd.dual(code), max_dim=26)
        assert cd.macwilliams_transform(cd.weight_distribution(code)) == enumerated_dual
        assert cd.macwilliams_transform(enumerated_dual) == cd.weight_distribution(code)


def test_macwilliams_rejects_inconsistent_dual_size():
    with pytest.raises(ValueError):
        cd.macwilliams_transform(cd.shortened_rm_distribution(3), dual_size=8)
    with pytest.raises(ValueError):
        cd.macwilliams_transform(cd.WeightDistribution(4, {0: 1, 1: 2}))


@pytest.mark.parametrize("m", [4, 5])
def test_rm2_closed_form_matches_enumeration(m):
    code = cd.BinaryCode.from_generator(cd.rm_generator(2, m))
    assert cd.weight_distribution(code) == cd.rm2_weight_distribution(m)


@pytest.mark.parametrize("m", [6, 8, 10])
def test_rm2_closed_form_total(m):
    assert cd.rm2_weight_distribution(m).total == 2 ** (1 + m + m * (m - 1) // 2)


def test_enumeration_guard():
    with pytest.raises(ValueError):
        cd.weight_distribution(cd.dual(cd.shortened_rm(5)))


def test_weight_enum_eval_counts_and_values():
    d = cd.punctured_rm_distribution(4)
    assert cd.weight_enum_eval(d, 1, 1) == 16 * 2
    assert abs(cd.weight_enum_eval(d, 0.9, 0.1) - sum(
        c * 0.9 ** (15 - w) * 0.1 ** w for w, c in d.counts.items())) < 1e-15


def test_code_rejects_non_orthogonal_pair():
    g = cd.BinaryMatrix.from_strings(["110"])
    h = cd.BinaryMatrix.from_strings(["100", "001"])
    with pytest.raises(ValueError):
        cd.BinaryCode(g, h)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_qrm_checks(m):
    q = cd.qrm(m)
    assert q.h_x.shape == (m, 2 ** m - 1)
    assert q.h_z.shape == (2 ** m - m - 2, 2 ** m - 1)
    # CSS condition: X checks commute with Z checks
    assert not q.h_x.mul_transpose(q.h_z).any()


def test_syndromes_single_and_batch_agree():
    q = cd.qrm(4)
    rng = np.random.default_rng(1)
    dense = rng.integers(0, 2, size=(200, 15), dtype=np.uint8)
    packed = cd.pack_bits(dense)[:, 0]
    batch = cd.syndrome_batch(q.h_z, packed)
    for e, s in zip(dense, batch):
        assert np.array_equal(cd.syndrome(q.h_z, e), s)


def test_undetected_x_errors_are_rm_star_words():
    q = cd.qrm(3)
    words = brute_codewords(q.rm_star.generator.to_dense())
    for w in words:
        assert not cd.syndrome(q.h_z, w).any()
    assert cd.syndrome(q.h_z, np.eye(7, dtype=np.uint8)[0]).any()
    with pytest.raises(ValueError):
        cd.syndrome(q.h_z, np.zeros(6))
