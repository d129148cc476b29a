"""Global experiment parameters and the derived exponents sigma_p and kappa."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

INF = math.inf


def sigma_p(p: float, N: int) -> float:
    """Threshold N*(1/p - 1)_+ below which the smoothness s must not fall."""
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return N * max(1.0 / p - 1.0, 0.0)


def kappa(p: float, q: float) -> float:
    """Exponent with 1/kappa = 1/p - 1/q.  +inf when p == q, p when q = inf."""
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    if q < p:
        # The summability condition degenerates for q <= p (the function is
        # merely required to be bounded); callers handle that case themselves.
        raise ValueError(f"kappa requires p <= q, got p={p}, q={q}")
    if p == q:
        return INF
    if math.isinf(q):
        return p
    return 1.0 / (1.0 / p - 1.0 / q)


@dataclass(frozen=True)
class Params:
    """Immutable experiment configuration (N, d, p, q, s, M, L).

    kappa and sigma_p are always derived, never stored or read from input.
    L defaults to the midpoint of its admissible interval (0, 1 - p/q).
    """

    N: int
    d: int
    p: float
    q: float
    s: float
    M: int
    L: float | None = None

    def __post_init__(self):
        if self.L is None and 0 < self.p < self.q:
            object.__setattr__(self, "L", 0.5 * (1.0 - self.p / self.q))

    @property
    def sigma_p(self) -> float:
        return sigma_p(self.p, self.N)

    @property
    def kappa(self) -> float:
        return kappa(self.p, self.q)


def validate(params: Params) -> list[str]:
    """Return the list of violated invariants (empty when the config is usable).

    Violations are data, not failures: callers decide whether to proceed.
    """
    v: list[str] = []
    if not isinstance(params.N, int) or params.N < 2:
        v.append(f"N must be an integer >= 2, got {params.N}")
    if not isinstance(params.d, int) or not 1 <= params.d < max(params.N, 2):
        v.append(f"d must satisfy 1 <= d < N, got d={params.d}, N={params.N}")
    if not params.p > 0:
        v.append(f"p must be positive, got {params.p}")
    if math.isinf(params.p):
        v.append("p = inf rejected in experiment configurations")
    if not params.q > 0:
        v.append(f"q must be positive, got {params.q}")
    if params.p > 0 and not math.isinf(params.p):
        if not params.s > sigma_p(params.p, max(params.N, 1)):
            v.append(f"s > sigma_p fails: s={params.s}, sigma_p={sigma_p(params.p, max(params.N, 1))}")
    if not isinstance(params.M, int) or params.M < 1:
        v.append(f"M must be an integer >= 1, got {params.M}")
    elif not params.M > params.s:
        v.append(f"M > s fails: M={params.M}, s={params.s}")
    if 0 < params.p < params.q:
        bound = 1.0 - params.p / params.q
        if params.L is None or not 0 < params.L < bound:
            v.append(f"L < 1 - p/q fails: L={params.L}, 1 - p/q={bound}")
    return v


def _parse_exponent(value) -> float:
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return INF
        return float(value)
    return float(value)


def params_from_dict(cfg: dict) -> Params:
    """Build Params from a JSON config object with keys {N, d, p, q, s, M, L}."""
    return Params(
        N=int(cfg["N"]),
        d=int(cfg["d"]),
        p=_parse_exponent(cfg["p"]),
        q=_parse_exponent(cfg["q"]),
        s=float(cfg["s"]),
        M=int(cfg["M"]),
        L=float(cfg["L"]) if cfg.get("L") is not None else None,
    )


def load_config(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
