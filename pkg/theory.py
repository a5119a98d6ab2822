import math
from dataclasses import dataclass, replace
from fractions import Fraction

import pandas as pd

from graph_core import ParameterError
from observation import ObservationTable, bucket_table, optimal_error
from spectral import QuantizedCodes, codebook_size

# Natural logs throughout; C_ent = 2 with c_ent = 1 is the form used to organize sweeps.
DEFAULT_C_ENT = 2.0
DEFAULT_c_ENT = 1.0


@dataclass(frozen=True)
class BudgetInputs:
    n: int
    k: int
    m: int
    eta: float
    c_ent: float = DEFAULT_c_ENT
    C_ent: float = DEFAULT_C_ENT

    def __post_init__(self):
        if self.n < 16:
            raise ParameterError(f"budget ratio needs n >= 16 so that log log n > 0, got n={self.n}")
        if not self.eta > 0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if self.k < 0 or self.m < 0:
            raise ParameterError(f"k and m must be non-negative, got k={self.k}, m={self.m}")


def rho_eng(b: BudgetInputs) -> float:
    log_n = math.log(b.n)
    return (b.k * math.log(log_n) + b.c_ent * b.m * math.log(b.C_ent / b.eta)) / log_n


def is_subcritical(rho: float, epsilon0: float) -> bool:
    if not 0 < epsilon0 < 1:
        raise ParameterError(f"epsilon0 must lie in (0, 1), got {epsilon0}")
    return rho <= 1 - epsilon0


def subcritical_check(b: BudgetInputs, epsilon0: float) -> bool:
    """Advisory: does k log log n + c_ent m log(C_ent/eta) <= (1 - epsilon0) log n hold."""
    return is_subcritical(rho_eng(b), epsilon0)


def rho_grid(kemp_table: pd.DataFrame) -> pd.DataFrame:
    """Adds rho at the empirical threshold to a table with n, m, eta, k_emp columns; n/a below n = 16."""
    out = kemp_table.copy()
    out["rho_emp"] = [
        rho_eng(BudgetInputs(int(row.n), int(row.k_emp), int(row.m), float(row.eta)))
        if pd.notna(row.k_emp) and row.n >= 16
        else None
        for row in out.itertuples()
    ]
    return out


# ----------------------------------------------------------------------------
# Instance-level image bounds
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    image_size: int
    profile_bound: int
    codebook: int
    generic_bound: int
    generic_ok: bool
    refined_bound: float | None = None  # None: not applicable; inf: vacuous
    refined_ok: bool | None = None
    beta_hat: float | None = None
    coll_hat: float | None = None

    @property
    def satisfied(self) -> bool:
        return self.generic_ok and self.refined_ok is not False


def generic_image_bound(t: ObservationTable, codes: QuantizedCodes) -> BoundReport:
    """|Im F| <= D(G, A) * |Q(S(V))| with the measured profile count D."""
    d = t.profile_count
    book = codebook_size(codes)
    return BoundReport(
        image_size=t.image_size,
        profile_bound=d,
        codebook=book,
        generic_bound=d * book,
        generic_ok=t.image_size <= d * book,
    )


def refined_image_bound(t: ObservationTable, codes: QuantizedCodes) -> BoundReport:
    """|Im F| <= D (1 + beta / coll) with beta = max Bal(B), coll = min Coll(B) over non-singleton buckets."""
    report = generic_image_bound(t, codes)
    bt = bucket_table(t)
    keep = bt.sizes >= 2
    if not keep.any() or not bt.colliding_pairs[keep].any():
        return report

    sizes = bt.sizes[keep].tolist()
    colls = [Fraction(p, b * (b - 1)) for p, b in zip(bt.colliding_pairs[keep].tolist(), sizes)]
    bals = [Fraction(mm * top, b) for mm, top, b in zip(bt.code_counts[keep].tolist(), bt.max_occupancy[keep].tolist(), sizes)]
    beta, coll = max(bals), min(colls)
    if coll == 0:
        # a collision-free bucket makes the substituted bound infinite
        return replace(report, refined_bound=math.inf, refined_ok=True, beta_hat=float(beta), coll_hat=0.0)
    bound = report.profile_bound * (1 + beta / coll)
    return replace(
        report,
        refined_bound=float(bound),
        refined_ok=t.image_size <= bound,
        beta_hat=float(beta),
        coll_hat=float(coll),
    )


def bound_report(t: ObservationTable, codes: QuantizedCodes) -> BoundReport:
    return refined_image_bound(t, codes)


def impossibility_floor(t: ObservationTable) -> float:
    return optimal_error(t)
