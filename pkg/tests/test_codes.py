import json
import warnings

import numpy as np
import pytest

from bfcert.codes import (BUILTIN_CODES, ParityCheckMatrix, adjacency_row, adjacency_values,
                          array_shifts, build_explicit, build_monomial, build_qc2, dense_adjacency,
                          distinct_row_profiles, girth, load_spec, matrix_to_spec, max_gamma,
                          qc2_adjacency_rows, random_monomial_girth6, random_qc2_girth6,
                          representative_columns, spec_to_matrix, syndrome)
from bfcert.errors import DimensionError, InvalidSpecError


def test_permutation_circulants():
    H = build_qc2(3, [0], [1])
    assert (H.n, H.r) == (6, 3)
    assert list(H.column_weights) == [1] * 6
    assert H.col_supports[:3] == ((0,), (1,), (2,))
    assert H.col_supports[3:] == ((1,), (2,), (0,))


def test_hand_expanded_circulant(toy_qc):
    H = toy_qc
    assert (H.r, H.n) == (5, 10)
    # column 7 is column 2 of the second block: {0,2,3} shifted by 2
    assert set(H.col_supports[7]) == {2, 4, 0}
    assert list(H.row_weights) == [6] * 5
    assert H.check_transpose()


def test_qc2_rejects_bad_supports():
    with pytest.raises(InvalidSpecError):
        build_qc2(5, [0, 0, 1], [0, 1, 2])
    with pytest.raises(InvalidSpecError):
        build_qc2(5, [0, 5], [0, 1])
    with pytest.raises(InvalidSpecError):
        build_qc2(5, [0, 1], [0, 1, 2])


def test_monomial_small():
    H = build_monomial(7, [[0, 1, 3], [0, 2, 6]])
    assert (H.r, H.n) == (14, 21)
    assert set(H.column_weights) == {2}
    assert set(H.row_weights) == {3}
    assert H.check_transpose()


def test_monomial_identity_pair_has_girth_four_structure():
    H = build_monomial(4, [[0, 0]])
    assert (H.r, H.n) == (4, 8)
    row = adjacency_row(H, 0)
    assert row.entries == ((1, 1),)


def test_monomial_table_parameters():
    H = build_monomial(97, array_shifts(97, 15, 43))
    assert (H.n, H.r) == (4171, 1455)
    assert girth(H, 4) is None  # no 4-cycles for prime p


def test_monomial_rejects_bad_shift():
    with pytest.raises(InvalidSpecError):
        build_monomial(5, [[0, 5]])


def test_random_monomial_girth6():
    shifts = random_monomial_girth6(31, 3, 6, np.random.default_rng(2))
    H = build_monomial(31, shifts)
    assert max_gamma(H) == 1
    assert girth(H, 4) is None


def test_random_qc2_girth6(small_qc):
    assert max_gamma(small_qc) == 1
    assert girth(small_qc) == 6


def test_random_qc2_refuses_impossible_p():
    with pytest.raises(InvalidSpecError):
        random_qc2_girth6(11, 5, np.random.default_rng(0))


def test_syndrome_matches_dense(small_qc):
    rng = np.random.default_rng(5)
    D = small_qc.dense()
    for _ in range(20):
        e = (rng.random(small_qc.n) < 0.1).astype(np.uint8)
        assert np.array_equal(syndrome(small_qc, e), D.dot(e) % 2)
    assert not syndrome(small_qc, np.zeros(small_qc.n, dtype=np.uint8)).any()
    with pytest.raises(DimensionError):
        syndrome(small_qc, np.zeros(3, dtype=np.uint8))


def test_codeword_has_zero_syndrome():
    H = build_qc2(3, [0], [1])
    # columns 0 and 5 are both e_0
    e = np.zeros(6, dtype=np.uint8)
    e[[0, 5]] = 1
    assert not syndrome(H, e).any()


def test_adjacency_matches_dense_and_is_symmetric():
    rng = np.random.default_rng(9)
    for _ in range(5):
        rows = [sorted(rng.choice(24, size=int(rng.integers(2, 7)), replace=False).tolist())
                for _ in range(10)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            H = ParityCheckMatrix.from_rows(rows, n=24)
        G = dense_adjacency(H)
        assert np.array_equal(G, G.T)
        for i in range(H.n):
            cols, vals = adjacency_values(H, i)
            expect = np.flatnonzero(G[i])
            assert np.array_equal(cols, expect)
            assert np.array_equal(vals, G[i][expect])


def test_qc_rows_share_profile_within_block(toy_qc):
    p = 5
    for i in range(toy_qc.n):
        rep = 0 if i < p else p
        assert adjacency_row(toy_qc, i).entries == adjacency_row(toy_qc, rep).entries


def test_difference_rows_match_matrix_rows():
    rng = np.random.default_rng(4)
    for _ in range(15):
        p = int(rng.integers(5, 40))
        v = int(rng.integers(1, min(p, 7)))
        S0, S1 = rng.choice(p, v, replace=False), rng.choice(p, v, replace=False)
        H = build_qc2(p, S0, S1)
        assert qc2_adjacency_rows(p, S0, S1) == [adjacency_row(H, i) for i in (0, p)]


def test_profiles_cover_all_columns(toy_qc):
    prof = distinct_row_profiles(toy_qc)
    assert len(prof) == 2 and all(m == 5 for _, m in prof)
    assert representative_columns(toy_qc) == [0, 5]
    flat = distinct_row_profiles(toy_qc, use_structure=False)
    assert len(flat) == toy_qc.n


def test_explicit_profiles_one_per_column():
    H = build_explicit([[0, 1, 2], [2, 3, 4], [0, 4, 5]], n=6)
    assert len(distinct_row_profiles(H)) == 6


def test_duplicate_columns_warn():
    with pytest.warns(UserWarning):
        H = build_explicit([[0, 1], [0, 1, 2]], n=3)
    assert H.duplicate_columns() == [(0, 1)]


def test_girth_values():
    assert girth(build_qc2(5, [0, 1, 3], [0, 2, 3])) == 4
    # a single cycle of length 2k in the Tanner graph
    rows = [[0, 1], [1, 2], [2, 3], [3, 0]]
    assert girth(build_explicit(rows, n=4)) == 8
    assert girth(build_explicit(rows, n=4), cutoff=6) is None
    with pytest.raises(ValueError):
        girth(build_explicit(rows, n=4), cutoff=7)


def test_girth_four_iff_gamma_two(small_qc, toy_qc):
    for H in (small_qc, toy_qc):
        assert (girth(H, 4) == 4) == (max_gamma(H) >= 2)


def test_weight_three_circulants_have_girth_at_most_six():
    S0, S1 = random_qc2_girth6(101, 3, np.random.default_rng(1))
    assert girth(build_qc2(101, S0, S1), 12) <= 6


def test_spec_round_trip(tmp_path, toy_qc):
    doc = matrix_to_spec(toy_qc)
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(doc))
    H = load_spec(path)
    assert H.fingerprint == toy_qc.fingerprint
    mono = build_monomial(7, [[0, 1, 3], [0, 2, 6]])
    assert spec_to_matrix(matrix_to_spec(mono)).fingerprint == mono.fingerprint
    ex = build_explicit([[0, 1, 2], [2, 3, 4], [0, 3]], n=5)
    assert spec_to_matrix(matrix_to_spec(ex)).fingerprint == ex.fingerprint


def test_bad_specs(tmp_path):
    with pytest.raises(InvalidSpecError):
        load_spec("builtin:C9")
    with pytest.raises(InvalidSpecError):
        load_spec({"type": "qc2", "p": 5})
    with pytest.raises(InvalidSpecError):
        load_spec({"type": "weird"})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidSpecError):
        load_spec(bad)


def test_builtins_load():
    for name in BUILTIN_CODES:
        H = load_spec(f"builtin:{name}")
        assert H.n == 2 * H.r and H.is_regular
        assert H.name == name


def test_matrix_is_read_only(toy_qc):
    with pytest.raises(ValueError):
        toy_qc.csc.indices[0] = 3
