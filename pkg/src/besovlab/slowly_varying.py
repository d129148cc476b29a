"""Catalog of admissible weight functions on (0,1] and their summability check.

The catalog works in closed form at dyadic points t = 2^-j so experiments at
depth j = 1000 never have to materialize t itself (which would underflow).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LN2 = math.log(2.0)

CONSTANT = "constant"
LOG_POWER = "log-power"
ITERATED_LOG_POWER = "iterated-log-power"
TABULATED = "tabulated"

SATISFIED = "satisfied"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class PsiDescriptor:
    """Symbolic description of a positive weight function on (0,1].

    Families:
      constant              Psi(t) = c
      log-power             Psi(t) = (1 - ln t)^(-b)
      iterated-log-power    Psi(t) = (1 - ln t)^(-b) * (1 + ln(1 - ln t))^(-b2)
      tabulated             values given at t = 2^-j only
    """

    family: str
    b: float = 0.0
    b2: float = 0.0
    c: float = 1.0
    table: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.family not in (CONSTANT, LOG_POWER, ITERATED_LOG_POWER, TABULATED):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == CONSTANT and not self.c > 0:
            raise ValueError("constant family requires c > 0")
        if self.family in (LOG_POWER, ITERATED_LOG_POWER) and self.b < 0:
            raise ValueError("log-power families require b >= 0")
        if self.family == TABULATED:
            for j, value in self.table:
                if not value > 0:
                    raise ValueError(f"tabulated value at j={j} must be positive")


def constant(c: float = 1.0) -> PsiDescriptor:
    return PsiDescriptor(CONSTANT, c=c)


def log_power(b: float) -> PsiDescriptor:
    return PsiDescriptor(LOG_POWER, b=b)


def iterated_log_power(b: float, b2: float) -> PsiDescriptor:
    return PsiDescriptor(ITERATED_LOG_POWER, b=b, b2=b2)


def tabulated(pairs) -> PsiDescriptor:
    return PsiDescriptor(TABULATED, table=tuple((int(j), float(v)) for j, v in pairs))


def _table_lookup(desc: PsiDescriptor, j: int) -> float:
    for jj, value in desc.table:
        if jj == j:
            return value
    raise ValueError(f"tabulated descriptor has no entry for j={j}")


def _log_psi_from_ell(desc: PsiDescriptor, ell: float) -> float:
    """ln Psi(t) as a function of ell = -ln t >= 0."""
    if desc.family == CONSTANT:
        return math.log(desc.c)
    if desc.family == LOG_POWER:
        return -desc.b * math.log1p(ell)
    if desc.family == ITERATED_LOG_POWER:
        return -desc.b * math.log1p(ell) - desc.b2 * math.log1p(math.log1p(ell))
    raise ValueError("tabulated family has no closed form")


def psi_eval(desc: PsiDescriptor, t: float) -> float:
    """Value of Psi at t in (0,1]."""
    if not 0 < t <= 1:
        raise ValueError(f"t must lie in (0,1], got {t}")
    if desc.family == TABULATED:
        j = round(-math.log2(t))
        if j < 0 or 2.0 ** (-j) != t:
            raise ValueError(f"tabulated family defined only at dyadic t, got {t}")
        return _table_lookup(desc, j)
    if desc.family == CONSTANT:
        return desc.c
    return math.exp(_log_psi_from_ell(desc, -math.log(t)))


def psi_dyadic(desc: PsiDescriptor, j: int) -> float:
    """Psi(2^-j) in closed form (never forms 2^-j, so deep j cannot underflow)."""
    if j < 0:
        raise ValueError(f"j must be >= 0, got {j}")
    if desc.family == TABULATED:
        return _table_lookup(desc, j)
    if desc.family == CONSTANT:
        return desc.c
    return math.exp(_log_psi_from_ell(desc, j * LN2))


def psi_dyadic_log(desc: PsiDescriptor, j: int) -> float:
    """ln Psi(2^-j), for power computations that must stay in log space."""
    if j < 0:
        raise ValueError(f"j must be >= 0, got {j}")
    if desc.family == TABULATED:
        return math.log(_table_lookup(desc, j))
    return _log_psi_from_ell(desc, j * LN2)


def summability_partial(desc: PsiDescriptor, kappa: float, J: int) -> float:
    """Partial sum over j = 0..J of Psi(2^-j)^kappa (not raised to 1/kappa)."""
    if not (kappa > 0 and math.isfinite(kappa)):
        raise ValueError(f"kappa must be positive and finite, got {kappa}")
    return math.fsum(psi_dyadic(desc, j) ** kappa for j in range(J + 1))


def classify_condition(desc: PsiDescriptor, kappa: float) -> str:
    """Classify the summability condition sum_j Psi(2^-j)^kappa < inf.

    Exact p-series / Bertrand-series criterion for catalog families; the
    boundary exponent 1 classifies as violated (harmonic-type divergence).
    Tabulated input is honestly inconclusive: finite data cannot settle
    convergence.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if desc.family == TABULATED:
        return INCONCLUSIVE
    if math.isinf(kappa):
        # p = q convention: Psi only needs to be bounded, which every catalog
        # family is on (0,1].
        return SATISFIED
    if desc.family == CONSTANT:
        return VIOLATED
    if desc.family == LOG_POWER:
        return SATISFIED if desc.b * kappa > 1 else VIOLATED
    # iterated-log-power: Bertrand series criterion
    bk = desc.b * kappa
    if bk > 1:
        return SATISFIED
    if bk == 1 and desc.b2 * kappa > 1:
        return SATISFIED
    return VIOLATED


def slow_variation_deviation(desc: PsiDescriptor, r: float, j_max: int) -> float:
    """Max over j in {j_max//2, ..., j_max} of |Psi(r*2^-j)/Psi(2^-j) - 1|.

    Small values certify approximate slow variation at depth j_max.  The ratio
    is tested along t = 2^-j -> 0+, the fine-scale reading of the defining
    limit.
    """
    if not 0 < r <= 1:
        raise ValueError(f"r must lie in (0,1], got {r}")
    if r == 1:
        return 0.0
    if desc.family == TABULATED:
        i = round(-math.log2(r))
        if 2.0 ** (-i) != r:
            raise ValueError("tabulated family supports dyadic r only")
        return max(
            abs(_table_lookup(desc, j + i) / _table_lookup(desc, j) - 1.0)
            for j in range(j_max // 2, j_max + 1)
        )
    shift = -math.log(r)
    return max(
        abs(
            math.exp(
                _log_psi_from_ell(desc, j * LN2 + shift) - _log_psi_from_ell(desc, j * LN2)
            )
            - 1.0
        )
        for j in range(j_max // 2, j_max + 1)
    )


def psi_from_dict(cfg: dict) -> PsiDescriptor:
    """Build a descriptor from the JSON sub-object `psi`."""
    family = cfg["family"]
    if family == CONSTANT:
        return constant(float(cfg.get("c", 1.0)))
    if family == LOG_POWER:
        return log_power(float(cfg["b"]))
    if family == ITERATED_LOG_POWER:
        return iterated_log_power(float(cfg["b"]), float(cfg.get("b2", 0.0)))
    if family == TABULATED:
        return tabulated(cfg["table"])
    raise ValueError(f"unknown psi family {family!r}")
