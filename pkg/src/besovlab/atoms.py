"""Smooth bump atoms and synthesis of the truncated counterexample field.

Atoms at level j are scaled, translated copies of a compactly supported bump
psi (a product of normalized 1-D bumps psi0); level-j atoms live near
x_1 = C_M * j with C_M = 2(M+2), so distinct levels have disjoint supports in
the first coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import Params
from .sequences import BlockSequence

# exp(-x) is exactly 0.0 in IEEE double past x ~ 745; clamping at 708 (the
# overflow threshold of exp) keeps supports exact and avoids subnormals
_EXP_CLAMP = 708.0


def bump_u(t):
    """e^(-1/t^2) for t > 0, exactly 0 otherwise (and when it would underflow)."""
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros_like(t_arr)
    with np.errstate(divide="ignore", over="ignore"):
        arg = np.where(t_arr > 0, 1.0 / np.where(t_arr > 0, t_arr, 1.0) ** 2, np.inf)
    mask = arg <= _EXP_CLAMP
    out[mask] = np.exp(-arg[mask])
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def bump_v(t):
    """u(1+t) * u(1-t); even, supported exactly in (-1,1)."""
    t_arr = np.asarray(t, dtype=float)
    out = bump_u(1.0 + t_arr) * bump_u(1.0 - t_arr)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def psi0(t):
    """Normalized bump v(t) / (v(t-1) + v(t) + v(t+1)).

    Supported in (-1,1); integer translates sum to 1 wherever the shared
    denominator is positive.  Returns 0 whenever v(t) = 0 (support
    convention), even where the denominator vanishes.
    """
    t_arr = np.asarray(t, dtype=float)
    num = bump_v(t_arr)
    num_arr = np.asarray(num, dtype=float)
    den = bump_v(t_arr - 1.0) + num_arr + bump_v(t_arr + 1.0)
    out = np.zeros_like(num_arr)
    mask = num_arr > 0
    out[mask] = num_arr[mask] / den[mask]
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def psi_nd(x):
    """Product bump prod_i (1/2) psi0(x_i / 2) over the last axis.

    Supported in (-2,2)^N; value 2^-N at the origin.
    """
    x_arr = np.atleast_2d(np.asarray(x, dtype=float))
    vals = 0.5 * np.asarray(psi0(x_arr / 2.0))
    out = np.prod(vals, axis=-1)
    return float(out[0]) if np.asarray(x).ndim == 1 else out


def atom_offset(params: Params, j: int, k: int) -> tuple[int, ...]:
    """Lattice offset m_{j,k}: first N-1 coordinates C_M 2^j j, last one k."""
    if j < 0 or k < 0:
        raise ValueError("j and k must be nonnegative")
    c = 2 * (params.M + 2)
    return (c * (1 << j) * j,) * (params.N - 1) + (k,)


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    @property
    def ndim(self) -> int:
        return len(self.lo)

    def inflate(self, amount: float) -> "Box":
        return Box(tuple(a - amount for a in self.lo), tuple(b + amount for b in self.hi))


@dataclass(frozen=True)
class BoxDomain:
    """Finite union of axis-aligned boxes with a uniform grid resolution."""

    boxes: tuple[Box, ...]
    resolution: float

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")

    @property
    def ndim(self) -> int:
        return self.boxes[0].ndim if self.boxes else 0

    def inflate(self, amount: float) -> "BoxDomain":
        return BoxDomain(tuple(b.inflate(amount) for b in self.boxes), self.resolution)

    def with_resolution(self, resolution: float) -> "BoxDomain":
        return BoxDomain(self.boxes, resolution)


@dataclass(frozen=True)
class AtomicField:
    """Truncated counterexample function f_J as a sum of bump atoms.

    Atom (j,k) contributes lambda_{j,k} * 2^(-j(s - N/p)) * psi(2^j x - m_{j,k});
    lambda is read from the rearranged block sequence, never densified.
    """

    params: Params
    blocks: BlockSequence
    J: int

    def __post_init__(self):
        if not self.blocks.rearranged:
            raise ValueError("AtomicField requires a rearranged BlockSequence")
        if self.J > self.blocks.J:
            raise ValueError(f"J={self.J} exceeds block depth {self.blocks.J}")

    @property
    def C_M(self) -> int:
        return 2 * (self.params.M + 2)

    def amplitude(self, j: int) -> float:
        """2^(-j(s - N/p))."""
        p = self.params
        return 2.0 ** (-j * (p.s - p.N / p.p))

    def lam(self, j: int) -> float:
        """Common value of lambda_{j,k} on the on-cells of level j."""
        lvl = self.blocks.levels[j]
        if lvl.theta <= 0.0 or lvl.n == 0:
            return 0.0
        return math.exp((math.log(lvl.theta) - j * math.log(2.0)) / self.params.p)

    def active_levels(self) -> list[int]:
        return [
            j
            for j in range(self.J + 1)
            if self.blocks.levels[j].n > 0 and self.blocks.levels[j].theta > 0.0
        ]


def _level_for_x1(field: AtomicField, x1: np.ndarray) -> np.ndarray:
    """Candidate level per point from the first coordinate; -1 when none.

    Level-j atoms satisfy |x1 - C_M j| <= 2^(1-j); C_M >= 6 separates levels.
    """
    cand = np.rint(x1 / field.C_M).astype(int)
    ok = (cand >= 0) & (cand <= field.J)
    safe = np.clip(cand, 0, field.J)
    width = 2.0 ** (1.0 - safe)
    ok &= np.abs(x1 - field.C_M * safe) <= width
    return np.where(ok, safe, -1)


def level_weight(field: AtomicField, j: int, xN) -> np.ndarray:
    """Sum over on-cells k of (1/2) psi0((2^j xN - k)/2) at last coordinate xN."""
    xN_arr = np.atleast_1d(np.asarray(xN, dtype=float))
    lvl = field.blocks.levels[j]
    out = np.zeros_like(xN_arr)
    if lvl.n == 0 or lvl.theta <= 0.0:
        return out
    size = 1 << j
    scaled = (2.0**j) * xN_arr
    base = np.floor(scaled).astype(np.int64)
    for delta in (-1, 0, 1, 2):
        k = base + delta
        in_block = (k >= size) & (k < 2 * size)
        on = np.zeros_like(in_block)
        kk = np.where(in_block, k, size)
        on[in_block] = ((kk[in_block] - size - lvl.start) % size) < lvl.n
        vals = 0.5 * np.asarray(psi0((scaled - k) / 2.0))
        out += np.where(on, vals, 0.0)
    return out


def level_x1_profile(field: AtomicField, j: int, x1) -> np.ndarray:
    """Product over the first N-1 coordinates (all equal to x1 here) of the
    per-coordinate bump factor, times amplitude and lambda."""
    x1_arr = np.atleast_1d(np.asarray(x1, dtype=float))
    scaled = (2.0**j) * x1_arr - field.C_M * (1 << j) * j
    factor = 0.5 * np.asarray(psi0(scaled / 2.0))
    return field.lam(j) * field.amplitude(j) * factor ** (field.params.N - 1)


def eval_f(field: AtomicField, x) -> np.ndarray:
    """Pointwise value of f_J at points of shape (n, N) (or a single point).

    Prunes by the first coordinate (at most one candidate level) and the last
    coordinate (at most four candidate atoms); equals the dense sum over all
    (j,k) exactly, since skipped atoms vanish at the point.
    """
    x_arr = np.asarray(x, dtype=float)
    single = x_arr.ndim == 1
    pts = np.atleast_2d(x_arr)
    if pts.shape[1] != field.params.N:
        raise ValueError(f"points must have {field.params.N} coordinates")
    out = np.zeros(pts.shape[0])
    levels = _level_for_x1(field, pts[:, 0])
    for j in field.active_levels():
        mask = levels == j
        if not mask.any():
            continue
        sub = pts[mask]
        center = field.C_M * (1 << j) * j
        prof = field.lam(j) * field.amplitude(j) * np.ones(sub.shape[0])
        for i in range(field.params.N - 1):
            prof *= 0.5 * np.asarray(psi0(((2.0**j) * sub[:, i] - center) / 2.0))
        w = level_weight(field, j, sub[:, -1])
        out[mask] = prof * w
    return float(out[0]) if single else out


def eval_f_dense(field: AtomicField, x) -> np.ndarray:
    """Brute-force sum over every atom (j <= J, k in T_j).  Test oracle."""
    x_arr = np.asarray(x, dtype=float)
    single = x_arr.ndim == 1
    pts = np.atleast_2d(x_arr)
    out = np.zeros(pts.shape[0])
    for j in field.active_levels():
        lvl = field.blocks.levels[j]
        size = 1 << j
        coef = field.lam(j) * field.amplitude(j)
        for k in range(size, 2 * size):
            if not field.blocks.is_on(j, k):
                continue
            m = atom_offset(field.params, j, k)
            arg = (2.0**j) * pts - np.asarray(m, dtype=float)
            out += coef * np.asarray(psi_nd(arg))
    return float(out[0]) if single else out


def partial_map(field: AtomicField, y: float):
    """One-variable function x1 -> f(x1, y).  Requires N = 2, d = 1.

    Returns a closure with precomputed per-level weights at y; evaluable on
    arrays of x1 values.
    """
    if field.params.N != 2 or field.params.d != 1:
        raise ValueError("partial_map supports N = 2, d = 1 only")
    weights = {j: float(level_weight(field, j, np.array([y]))[0]) for j in field.active_levels()}

    def g(x1):
        x1_arr = np.atleast_1d(np.asarray(x1, dtype=float))
        out = np.zeros_like(x1_arr)
        levels = _level_for_x1(field, x1_arr)
        for j, w in weights.items():
            if w == 0.0:
                continue
            mask = levels == j
            if mask.any():
                out[mask] = level_x1_profile(field, j, x1_arr[mask]) * w
        return float(out[0]) if np.asarray(x1).ndim == 0 else out

    g.level_weights = weights
    return g


def partial_map_level_weight(field: AtomicField, j: int, y: float) -> float:
    return float(level_weight(field, j, np.array([y]))[0])


def level_box(field: AtomicField, j: int) -> Box:
    """Support box of level j (N = 2): x1 near C_M j, x2 covering [1,2]."""
    half = 2.0 ** (1 - j)
    return Box(
        (field.C_M * j - half, 1.0 - half),
        (field.C_M * j + half, 2.0 + half),
    )


def support_boxes(field: AtomicField, inflate: float = 0.0, resolution: float | None = None) -> BoxDomain:
    """Union of per-level support boxes, optionally inflated for difference
    stencils.  Boxes are pairwise disjoint in x1 for every inflation < C_M - 1."""
    if field.params.N != 2:
        raise ValueError("support_boxes supports N = 2 only")
    boxes = tuple(level_box(field, j).inflate(inflate) for j in field.active_levels())
    if resolution is None:
        resolution = 2.0 ** (-(field.J + 3))
    return BoxDomain(boxes, resolution)
