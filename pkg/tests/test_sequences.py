import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from besovlab import sequences
from besovlab.params import Params
from besovlab.sequences import (
    BlockLevel,
    BlockSequence,
    block_average,
    blocks_from_json,
    blocks_to_json,
    build_S,
    build_lambda_blocks,
    coverage_count,
    gamma,
    lemma_le_partial,
    lemma_le_partials,
    materialize,
    mixed_norm,
    rearrange,
    sup_diagnostic,
    total_window_weight,
    verify_blocks,
)
from besovlab.slowly_varying import constant, log_power


# ---------------------------------------------------------------------------
# series test


class TestLemmaLE:
    def test_m2_converges_to_known_tail(self):
        # u_j == 1: sum 1/j^2 -> pi^2/6, minus nothing since U_j = j
        value = lemma_le_partial(np.ones(10000), 2.0, 10000)
        assert value == pytest.approx(math.pi**2 / 6.0, abs=1e-3)

    def test_m1_is_harmonic(self):
        n = 1000
        value = lemma_le_partial(np.ones(n), 1.0, n)
        harmonic = sum(1.0 / j for j in range(1, n + 1))
        assert value == pytest.approx(harmonic, rel=1e-12)

    def test_callable_terms(self):
        value = lemma_le_partial(lambda j: 1.0, 2.0, 50)
        direct = lemma_le_partial(np.ones(50), 2.0, 50)
        assert value == direct

    def test_partials_are_running_sums(self):
        partials = lemma_le_partials(np.ones(100), 1.5, 100)
        assert np.all(np.diff(partials) > 0)
        assert partials[-1] == pytest.approx(lemma_le_partial(np.ones(100), 1.5, 100))

    def test_rejects_nonpositive_terms(self):
        with pytest.raises(ValueError):
            lemma_le_partial(np.array([1.0, 0.0, 1.0]), 2.0, 3)

    @given(
        st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=1, max_size=50),
        st.floats(min_value=1.1, max_value=4.0),
    )
    def test_bounded_by_integral_estimate(self, terms, m):
        # sum u_j / U_j^m <= u_1^(1-m) + integral bound; crude but universal:
        # each term u_j/U_j^m <= (U_j - U_{j-1}) / U_{j-1}^m for j >= 2
        u = np.array(terms)
        value = lemma_le_partial(u, m, len(terms))
        U1 = terms[0]
        bound = U1 ** (1.0 - m) + U1 ** (1.0 - m) / (m - 1.0)
        assert value <= bound * (1.0 + 1e-9)


# ---------------------------------------------------------------------------
# construction


class TestBuild:
    def test_S_for_constant_psi(self, psi_one):
        S = build_S(psi_one, 2.0, 8)
        assert np.allclose(S, np.arange(1, 9))

    def test_gamma_values(self, psi_one):
        # Psi == 1: Gamma_{j,1} = 1/j
        assert gamma(psi_one, 2.0, 4, 1.0) == pytest.approx(0.25)
        assert gamma(psi_one, 2.0, 4, 2.0) == pytest.approx(1.0 / 16.0)

    def test_levels_zero_and_one_are_off(self, flagship_params, psi_one):
        blocks = build_lambda_blocks(psi_one, flagship_params, 6)
        assert blocks.levels[0].n == 0
        assert blocks.levels[1].n == 0

    def test_counts_match_exact_floor(self, flagship_params, psi_one):
        blocks = build_lambda_blocks(psi_one, flagship_params, 12)
        for j in range(2, 13):
            expected = math.floor(Fraction(1, j) * (1 << j))
            # Gamma_{j,1} = 1/j passes through a float before flooring
            float_expected = math.floor(Fraction(1.0 / j) * (1 << j))
            assert blocks.levels[j].n == float_expected
            assert abs(blocks.levels[j].n - expected) <= 1

    def test_theta_matches_closed_form(self, flagship_params, psi_one):
        blocks = build_lambda_blocks(psi_one, flagship_params, 10)
        for j in range(2, 11):
            # S_j = j, Psi == 1, so theta_j = j^L
            assert blocks.levels[j].theta == pytest.approx(j**0.25, rel=1e-12)

    def test_deep_build_is_finite(self, flagship_params, psi_one):
        blocks = build_lambda_blocks(psi_one, flagship_params, 2048)
        lvl = blocks.levels[2048]
        assert math.isfinite(lvl.theta)
        assert 0 < lvl.n <= 1 << 2048

    def test_requires_p_below_q(self, psi_one):
        params = Params(N=2, d=1, p=2.0, q=2.0, s=0.5, M=1, L=0.1)
        with pytest.raises(ValueError):
            build_lambda_blocks(psi_one, params, 4)


# ---------------------------------------------------------------------------
# rearrangement


def _random_blocks(rng, J):
    levels = [BlockLevel(0, 0.0, 0, 0), BlockLevel(1, 0.0, 0, 0)]
    for j in range(2, J + 1):
        n = int(rng.integers(0, (1 << j) + 1))
        theta = float(rng.uniform(0.1, 10.0)) if n else 0.0
        levels.append(BlockLevel(j, theta, n, 0))
    return BlockSequence(J=J, levels=tuple(levels))


class TestRearrange:
    def test_preserves_multisets_per_block(self, rng):
        for _ in range(20):
            J = int(rng.integers(2, 11))
            blocks = _random_blocks(rng, J)
            moved = rearrange(blocks)
            before = materialize(blocks)
            after = materialize(moved)
            for j in range(J + 1):
                size = 1 << j
                a = np.sort(before[size : 2 * size])
                b = np.sort(after[size : 2 * size])
                assert np.array_equal(a, b), f"block {j} multiset changed"

    def test_block_averages_bitwise_stable(self, rng):
        blocks = _random_blocks(rng, 10)
        moved = rearrange(blocks)
        for j in range(11):
            assert block_average(blocks, j) == block_average(moved, j)

    def test_cursor_is_exact_window_weight_mod_one(self, flagship_params, psi_one):
        blocks = rearrange(build_lambda_blocks(psi_one, flagship_params, 64))
        assert blocks.cursor == total_window_weight(blocks) % 1

    def test_windows_chain_without_gaps(self, rng):
        # each window starts in the cell containing the previous cursor
        blocks = rearrange(_random_blocks(rng, 12))
        c = Fraction(0)
        for lvl in blocks.levels:
            size = 1 << lvl.j
            assert lvl.start == math.floor(c * size)
            c = Fraction(lvl.start + lvl.n, size) % 1

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.integers(3, 12))
    def test_property_multiset_preservation(self, seed, J):
        rng = np.random.default_rng(seed)
        blocks = _random_blocks(rng, J)
        moved = rearrange(blocks)
        before = materialize(blocks)
        after = materialize(moved)
        for j in range(J + 1):
            size = 1 << j
            assert sorted(before[size : 2 * size]) == sorted(after[size : 2 * size])


# ---------------------------------------------------------------------------
# coverage


class TestCoverage:
    def test_full_blocks_cover_every_level(self):
        J = 8
        levels = [BlockLevel(j, 1.0, 1 << j, 0) for j in range(J + 1)]
        blocks = BlockSequence(J=J, levels=tuple(levels), rearranged=True)
        assert coverage_count(blocks, Fraction(3, 2)) == J + 1

    def test_zero_levels_do_not_count(self, flagship_params, psi_one):
        blocks = rearrange(build_lambda_blocks(psi_one, flagship_params, 8))
        # levels 0-1 are off, so coverage can never exceed J - 1
        for i in range(16):
            x = 1 + Fraction(i, 16) + Fraction(1, 64)
            assert coverage_count(blocks, x) <= 7

    def test_matches_dense_oracle(self, flagship_params, psi_one):
        blocks = rearrange(build_lambda_blocks(psi_one, flagship_params, 10))
        dense = materialize(blocks)
        for i in range(32):
            x = 1 + Fraction(i, 32) + Fraction(1, 128)
            expected = sum(
                1
                for j in range(11)
                if dense[(x.numerator << j) // x.denominator] > 0.0
            )
            assert coverage_count(blocks, x) == expected

    def test_deep_probe_uses_exact_cells(self, flagship_params, psi_one):
        # beyond 52 bits a float 2^j*x would truncate to the wrong cell
        blocks = rearrange(build_lambda_blocks(psi_one, flagship_params, 80))
        x = 1 + Fraction(1, 3)
        count = coverage_count(blocks, x)
        assert count >= math.floor(total_window_weight(blocks)) - 1

    def test_rejects_x_outside_unit_shift(self, blocks_j8):
        with pytest.raises(ValueError):
            coverage_count(blocks_j8, Fraction(5, 2))


# ---------------------------------------------------------------------------
# norms and diagnostics


class TestMixedNorm:
    def test_matches_dense_sum(self, flagship_params, psi_one):
        p, q = flagship_params.p, flagship_params.q
        blocks = rearrange(build_lambda_blocks(psi_one, flagship_params, 12))
        dense = materialize(blocks)
        inner = []
        for j in range(13):
            size = 1 << j
            block = dense[size : 2 * size]
            lam_p = np.where(block > 0, block / size, 0.0)
            inner.append(np.sum(lam_p) ** (q / p))
        expected = math.fsum(inner) ** (1.0 / q)
        assert mixed_norm(blocks, p, q) == pytest.approx(expected, rel=1e-12)

    def test_q_inf_takes_sup(self, blocks_j8):
        value = mixed_norm(blocks_j8, 1.0, math.inf)
        expected = max(block_average(blocks_j8, j) for j in range(9))
        assert value == pytest.approx(expected)

    def test_truncation_monotone(self, blocks_j8):
        values = [mixed_norm(blocks_j8, 1.0, 2.0, J) for J in range(2, 9)]
        assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


class TestSupDiagnostic:
    def test_closed_form_on_covered_level(self, flagship_params, psi_one):
        blocks = rearrange(build_lambda_blocks(psi_one, flagship_params, 64))
        # theta_j = j^0.25, Psi == 1: diagnostic value at a covered level j
        # is theta_j^(1/p) = j^0.25, and the max picks the deepest cover
        x = 1 + Fraction(1, 128)
        value = sup_diagnostic(blocks, psi_one, 1.0, x)
        dense_candidates = [
            blocks.levels[j].theta
            for j in range(65)
            if blocks.levels[j].n > 0
            and blocks.is_on(j, ((x.numerator << j) // x.denominator))
        ]
        assert value == pytest.approx(max(dense_candidates), rel=1e-12)

    def test_grows_with_depth(self, flagship_params, psi_one):
        blocks = rearrange(build_lambda_blocks(psi_one, flagship_params, 512))
        x = 1 + Fraction(1, 128)
        shallow = sup_diagnostic(blocks, psi_one, 1.0, x, 64)
        deep = sup_diagnostic(blocks, psi_one, 1.0, x, 512)
        assert deep > shallow

    def test_zero_when_nothing_covers(self):
        levels = tuple(BlockLevel(j, 0.0, 0, 0) for j in range(5))
        blocks = BlockSequence(J=4, levels=levels, rearranged=True)
        assert sup_diagnostic(blocks, constant(1.0), 1.0, Fraction(3, 2)) == 0.0


# ---------------------------------------------------------------------------
# serialization and verification


class TestSerialization:
    def test_json_round_trip(self, blocks_j8):
        again = blocks_from_json(blocks_to_json(blocks_j8))
        assert again == blocks_j8

    def test_verify_accepts_fresh_build(self, blocks_j8):
        assert verify_blocks(blocks_j8) == []

    def test_verify_flags_tampered_start(self, blocks_j8):
        from dataclasses import replace

        levels = list(blocks_j8.levels)
        levels[5] = replace(levels[5], start=(levels[5].start + 1) % (1 << 5))
        bad = BlockSequence(
            J=blocks_j8.J,
            levels=tuple(levels),
            rearranged=True,
            cursor=blocks_j8.cursor,
        )
        problems = verify_blocks(bad)
        assert any("start_5" in p for p in problems)

    def test_verify_flags_active_level_zero(self):
        levels = [BlockLevel(0, 1.0, 1, 0)] + [
            BlockLevel(j, 0.0, 0, 0) for j in range(1, 4)
        ]
        problems = verify_blocks(BlockSequence(J=3, levels=tuple(levels)))
        assert any("level 0" in p for p in problems)

    def test_materialize_capped(self, flagship_params, psi_one):
        blocks = build_lambda_blocks(psi_one, flagship_params, 30)
        with pytest.raises(ValueError):
            materialize(blocks)
