"""Dyadic block sequences: series test, block construction, rearrangement.

A BlockSequence stores O(J) data per level (on-value, on-count, window start);
the dense array of 2^(J+1) positions exists only as a small-J oracle.  The
rearrangement is the cyclic sliding-window placement: each level's on-run
starts where the previous level's run ended, modulo 1, tracked by an exact
rational cursor with power-of-two denominator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .params import Params
from .slowly_varying import PsiDescriptor, psi_dyadic, psi_dyadic_log

_DENSE_J_CAP = 22  # dense materialization is a test oracle, never a data path


@dataclass(frozen=True)
class BlockLevel:
    j: int
    theta: float  # on-value
    n: int        # on-count, exact integer in [0, 2^j]
    start: int    # window start cell in [0, 2^j)


@dataclass(frozen=True)
class BlockSequence:
    """Sparse per-level representation of a blockwise on/off sequence.

    Within block T_j = {2^j, ..., 2^(j+1)-1}, positions whose cell offset
    satisfies (k - 2^j - start_j) mod 2^j < n_j carry value theta_j; all other
    positions carry 0.  Levels 0 and 1 are identically zero.
    """

    J: int
    levels: tuple[BlockLevel, ...]
    rearranged: bool = False
    cursor: Fraction = Fraction(0)

    def __post_init__(self):
        if len(self.levels) != self.J + 1:
            raise ValueError("levels must cover j = 0..J")
        for lvl in self.levels:
            if not 0 <= lvl.n <= 1 << lvl.j:
                raise ValueError(f"n_{lvl.j} out of range: {lvl.n}")
            if not 0 <= lvl.start < max(1 << lvl.j, 1):
                raise ValueError(f"start_{lvl.j} out of range: {lvl.start}")

    def level(self, j: int) -> BlockLevel:
        return self.levels[j]

    def is_on(self, j: int, k: int) -> bool:
        """Whether position k of block T_j carries the on-value."""
        lvl = self.levels[j]
        size = 1 << j
        if not size <= k < 2 * size:
            raise ValueError(f"k={k} not in T_{j}")
        if lvl.n == 0:
            return False
        return (k - size - lvl.start) % size < lvl.n

    def value_at(self, k: int) -> float:
        """Sequence value at index k >= 0 (0 outside every active block)."""
        if k < 0:
            raise ValueError(f"k must be >= 0, got {k}")
        if k == 0:
            return 0.0
        j = k.bit_length() - 1
        if j > self.J:
            raise ValueError(f"index {k} beyond truncation depth J={self.J}")
        lvl = self.levels[j]
        return lvl.theta if self.is_on(j, k) else 0.0


def lemma_le_partial(u, m: float, n: int) -> float:
    """Partial sum over j = 1..n of u_j / (u_1 + ... + u_j)^m.

    `u` is an array-like of at least n positive terms (u_1 first) or a
    callable j -> u_j for 1-based j.  m <= 1 is accepted: the divergent
    regime is exactly what the experiments exhibit.
    """
    return float(lemma_le_partials(u, m, n)[-1])


def lemma_le_partials(u, m: float, n: int) -> np.ndarray:
    """Running partial sums (length n) of the series of lemma_le_partial."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if callable(u):
        terms = np.array([u(j) for j in range(1, n + 1)], dtype=float)
    else:
        terms = np.asarray(u, dtype=float)[:n]
        if terms.size < n:
            raise ValueError(f"need {n} terms, got {terms.size}")
    if not np.all(terms > 0):
        raise ValueError("sequence terms must all be positive")
    U = np.cumsum(terms)
    return np.cumsum(terms / U**m)


def build_S(desc: PsiDescriptor, kappa: float, J: int) -> np.ndarray:
    """(S_1, ..., S_J) with S_j = sum_{k=1..j} Psi(2^-k)^kappa."""
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    terms = np.array([psi_dyadic(desc, j) ** kappa for j in range(1, J + 1)])
    return np.cumsum(terms)


def gamma(desc: PsiDescriptor, kappa: float, j: int, m: float) -> float:
    """Psi(2^-j)^kappa / S_j^m."""
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j}")
    S = build_S(desc, kappa, j)
    return float(psi_dyadic(desc, j) ** kappa / S[-1] ** m)


def _exact_floor_count(g: float, j: int) -> int:
    # floor(2^j * g) with g a float, computed exactly via binary rationals
    frac = Fraction(g) * (1 << j)
    n = math.floor(frac)
    return min(max(n, 0), 1 << j)


def build_lambda_blocks(desc: PsiDescriptor, params: Params, J: int) -> BlockSequence:
    """Unrearranged block sequence with n_j = floor(2^j Gamma_{j,1}) on-cells
    of value theta_j = S_j^L / Psi(2^-j)^p per level, levels 0-1 zero."""
    if not params.p < params.q:
        raise ValueError("construction requires p < q")
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    kap = params.kappa
    S = build_S(desc, kap, J)
    levels = [BlockLevel(0, 0.0, 0, 0), BlockLevel(1, 0.0, 0, 0)]
    for j in range(2, J + 1):
        log_psi = psi_dyadic_log(desc, j)
        # powers in log space so deep levels neither overflow nor underflow
        theta = math.exp(params.L * math.log(S[j - 1]) - params.p * log_psi)
        g = math.exp(kap * log_psi - math.log(S[j - 1]))
        levels.append(BlockLevel(j, theta, _exact_floor_count(g, j), 0))
    return BlockSequence(J=J, levels=tuple(levels))


def block_average(blocks: BlockSequence, j: int) -> float:
    """n_j * theta_j / 2^j, the exact average of the sequence over T_j."""
    lvl = blocks.levels[j]
    return float(Fraction(lvl.n, 1 << j)) * lvl.theta


def total_window_weight(blocks: BlockSequence, J: int | None = None) -> Fraction:
    """W_J = sum_{j<=J} n_j 2^-j, exact."""
    if J is None:
        J = blocks.J
    return sum((Fraction(lvl.n, 1 << lvl.j) for lvl in blocks.levels[: J + 1]), Fraction(0))


def rearrange(blocks: BlockSequence) -> BlockSequence:
    """Sliding-window rearrangement; preserves each block's value multiset.

    Cursor rule: start_j = floor(c * 2^j), then c <- frac((start_j + n_j)/2^j).
    The floor may move a window start earlier by less than one cell, which can
    only increase coverage, never create gaps.
    """
    c = Fraction(0)
    levels = []
    for lvl in blocks.levels:
        size = 1 << lvl.j
        start = math.floor(c * size)
        levels.append(replace(lvl, start=start))
        c = Fraction(start + lvl.n, size) % 1
    return BlockSequence(J=blocks.J, levels=tuple(levels), rearranged=True, cursor=c)


def coverage_count(blocks: BlockSequence, x, J: int | None = None) -> int:
    """Number of levels j <= J whose on-window contains position floor(2^j x).

    x in [1,2); converted to an exact rational so deep levels resolve the
    correct cell (a float times 2^j loses the cell index past 52 bits).
    """
    xf = Fraction(x)
    if not 1 <= xf < 2:
        raise ValueError(f"x must lie in [1,2), got {x}")
    if J is None:
        J = blocks.J
    num, den = xf.numerator, xf.denominator
    count = 0
    for j in range(min(J, blocks.J) + 1):
        lvl = blocks.levels[j]
        if lvl.n == 0 or lvl.theta == 0.0:
            continue
        size = 1 << j
        k = (num << j) // den
        if (k - size - lvl.start) % size < lvl.n:
            count += 1
    return count


def lambda_value(blocks: BlockSequence, p: float, j: int, k: int) -> float:
    """lambda_{j,k} = 2^(-j/p) * (block value at k)^(1/p) for k in T_j, else 0."""
    if j < 0 or k < 0:
        raise ValueError("j and k must be nonnegative")
    size = 1 << j
    if not size <= k < 2 * size:
        return 0.0
    v = blocks.value_at(k)
    if v == 0.0:
        return 0.0
    return math.exp((math.log(v) - j * math.log(2.0)) / p)


def mixed_norm(blocks: BlockSequence, p: float, q: float, J: int | None = None) -> float:
    """(sum_j (sum_k lambda_{j,k}^p)^(q/p))^(1/q) via the block-average identity
    sum_k lambda_{j,k}^p = block_average(j); sup-norm form when q = inf."""
    if J is None:
        J = blocks.J
    averages = [block_average(blocks, j) for j in range(min(J, blocks.J) + 1)]
    if math.isinf(q):
        return max((a ** (1.0 / p) for a in averages), default=0.0)
    total = math.fsum(a ** (q / p) for a in averages)
    return total ** (1.0 / q)


def sup_diagnostic(blocks: BlockSequence, desc: PsiDescriptor, p: float, x, J: int | None = None) -> float:
    """max over j <= J of 2^(j/p) lambda_{j,floor(2^j x)} Psi(2^-j).

    Computed through the identity with (block value)^(1/p) * Psi(2^-j), in log
    space, so deep levels neither overflow nor underflow.
    """
    xf = Fraction(x)
    if not 1 <= xf < 2:
        raise ValueError(f"x must lie in [1,2), got {x}")
    if J is None:
        J = blocks.J
    num, den = xf.numerator, xf.denominator
    best = 0.0
    for j in range(min(J, blocks.J) + 1):
        lvl = blocks.levels[j]
        if lvl.n == 0 or lvl.theta <= 0.0:
            continue
        size = 1 << j
        k = (num << j) // den
        if (k - size - lvl.start) % size < lvl.n:
            val = math.exp(math.log(lvl.theta) / p + psi_dyadic_log(desc, j))
            best = max(best, val)
    return best


def materialize(blocks: BlockSequence, J: int | None = None) -> np.ndarray:
    """Dense array of values at indices 0 .. 2^(J+1)-1.  Test oracle only."""
    if J is None:
        J = blocks.J
    if J > _DENSE_J_CAP:
        raise ValueError(f"dense materialization capped at J={_DENSE_J_CAP}")
    out = np.zeros(1 << (J + 1))
    for j in range(J + 1):
        lvl = blocks.levels[j]
        size = 1 << j
        for r in range(lvl.n):
            out[size + (lvl.start + r) % size] = lvl.theta
    return out


def blocks_to_dict(blocks: BlockSequence) -> dict:
    return {
        "J": blocks.J,
        "rearranged": blocks.rearranged,
        "cursor": [blocks.cursor.numerator, blocks.cursor.denominator],
        "levels": [
            {"j": lvl.j, "theta": lvl.theta, "n": lvl.n, "start": lvl.start}
            for lvl in blocks.levels
        ],
    }


def blocks_from_dict(data: dict) -> BlockSequence:
    levels = tuple(
        BlockLevel(j=int(d["j"]), theta=float(d["theta"]), n=int(d["n"]), start=int(d["start"]))
        for d in sorted(data["levels"], key=lambda d: d["j"])
    )
    num, den = data.get("cursor", [0, 1])
    return BlockSequence(
        J=int(data["J"]),
        levels=levels,
        rearranged=bool(data.get("rearranged", False)),
        cursor=Fraction(int(num), int(den)),
    )


def blocks_to_json(blocks: BlockSequence) -> str:
    return json.dumps(blocks_to_dict(blocks), indent=2)


def blocks_from_json(text: str) -> BlockSequence:
    return blocks_from_dict(json.loads(text))


def verify_blocks(blocks: BlockSequence) -> list[str]:
    """Re-check structural invariants; returns violation messages."""
    problems = []
    for j in (0, 1):
        if j <= blocks.J and blocks.levels[j].n != 0:
            problems.append(f"level {j} must be identically zero")
    for lvl in blocks.levels:
        if lvl.theta < 0:
            problems.append(f"theta_{lvl.j} negative")
    if blocks.rearranged:
        expected = rearrange(BlockSequence(J=blocks.J, levels=tuple(
            replace(lvl, start=0) for lvl in blocks.levels)))
        for lvl, exp in zip(blocks.levels, expected.levels):
            if lvl.start != exp.start:
                problems.append(f"start_{lvl.j}={lvl.start} inconsistent with cursor rule ({exp.start})")
        if blocks.cursor != expected.cursor:
            problems.append(f"cursor {blocks.cursor} != recomputed {expected.cursor}")
    return problems
