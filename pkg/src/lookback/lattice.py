"""Cheuk-Vorst lattice model for floating-strike lookback options.

The n-period tree tracks the level j = log-gap (in powers of u) between
the underlying and its running extremum, so a single state per node
suffices.  Valuation away from emission starts at the generally
non-integer level

    j0 = log(spot / extremum) / (sigma sqrt(tau/n))   (call; put swaps the ratio)

and the level moves as j -> j+1 on an up step, j -> max(j-1, 0) on a down
step.  Absorption at 0 happens where the running extremum is refreshed;
fractional levels j0 + i and integer levels therefore coexist until a
path is absorbed.

Three prices of the same quantity are implemented:

* ``price_closed``: the literal triple-sum formula S (V1 - V2 + V3) with
  reflection-principle path counts, O(n^2) terms;
* ``price_closed_reduced``: the same value rearranged into complementary
  binomial CDFs, O(n) time, stable to ~1e-12 at n = 1e5;
* ``price_backward_induction``: risk-neutral dynamic programming on the
  level lattice, an independent O(n^2) oracle.

Path counts Lambda^{j0}_{j,k,n} (number of n-step words with k ups ending
at level j) come in three classes: plain binomial C(n,k) for paths that
never reach the absorbing region, partial binomial C(n,k) - C(n,k+f+1)
(reflection correction, f = floor(j0)) for unabsorbed paths started low
enough to have lost reflected twins, and the inner Cheuk-Vorst counts
C(n,k-j) - C(n,k-j-1) for absorbed paths ending on integer levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np
from scipy.special import gammaln

from .errors import BudgetError, DomainError, ModelError
from .numerics import binom_cdf_complement, binom_cdf_exact, binom_pmf

__all__ = [
    "Side",
    "MarketState",
    "TreeParams",
    "PathCount",
    "tree_params",
    "path_count",
    "iter_path_counts",
    "path_count_enumerate",
    "price_closed",
    "price_closed_reduced",
    "price_backward_induction",
]

Side = Literal["call", "put"]
PathClass = Literal["binomial", "partial_binomial", "inner_cv"]

# Levels within 1e-9 of an integer are treated as exactly integer: the
# count-class branches differ between the two cases and a floating
# log/sqrt can land 1 ulp off an exact integer.  The threshold is far
# below any economically meaningful level difference.
LEVEL_SNAP = 1e-9

ENUMERATION_MAX_N = 22
TREE_MAX_N = 5000


@dataclass(frozen=True)
class MarketState:
    """Market inputs at valuation time t.

    ``extremum`` is the running minimum of the underlying for calls and
    the running maximum for puts; the side-dependent inequality is
    checked where the side is known (``tree_params``, ``d_values``).
    """

    spot: float
    extremum: float
    sigma: float
    rate: float
    tau: float

    def __post_init__(self) -> None:
        if not (self.spot > 0.0):
            raise DomainError(f"spot must be positive, got {self.spot}")
        if not (self.extremum > 0.0):
            raise DomainError(f"extremum must be positive, got {self.extremum}")
        if not (self.sigma > 0.0):
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not (self.rate >= 0.0):
            raise DomainError(f"rate must be nonnegative, got {self.rate}")
        if not (self.tau > 0.0):
            raise DomainError(f"tau must be positive, got {self.tau}")

    def require_side(self, side: Side) -> None:
        """Running-extremum consistency: min <= spot for calls, max >= spot for puts."""
        if side == "call" and self.extremum > self.spot:
            raise DomainError(
                f"call requires extremum <= spot (running minimum), "
                f"got extremum={self.extremum}, spot={self.spot}"
            )
        if side == "put" and self.extremum < self.spot:
            raise DomainError(
                f"put requires extremum >= spot (running maximum), "
                f"got extremum={self.extremum}, spot={self.spot}"
            )


@dataclass(frozen=True)
class TreeParams:
    """Per-n lattice quantities.

    p_up is the risk-neutral up probability (e^{r tau/n} - d)/(u - d);
    q_adj = p_up u e^{-r tau/n} is the adjusted weight under which the
    lookback price is S_t times an expectation over terminal levels.
    j0 = j0_floor + j0_frac after integer snapping; kappa = {j0}(1 - {j0}).
    """

    n: int
    u: float
    d: float
    p_up: float
    q_adj: float
    j0: float
    j0_floor: int
    j0_frac: float
    kappa: float


@dataclass(frozen=True)
class PathCount:
    """One nonzero lattice path count Lambda^{j0}_{j,k,n}."""

    j: float
    k: int
    count: int
    class_tag: PathClass


def _comb0(n: int, m: int) -> int:
    """C(n, m) extended by 0 for m < 0 (math.comb already gives 0 for m > n)."""
    return math.comb(n, m) if m >= 0 else 0


def _split_level(j0: float) -> tuple[int, float]:
    """(floor, fractional part) of j0 with integer snapping at LEVEL_SNAP."""
    nearest = round(j0)
    if abs(j0 - nearest) < LEVEL_SNAP:
        return int(nearest), 0.0
    floor = math.floor(j0)
    return int(floor), j0 - floor


def _initial_level(market: MarketState, side: Side) -> float:
    if side == "call":
        return math.log(market.spot / market.extremum)
    return math.log(market.extremum / market.spot)


def tree_params(market: MarketState, n: int, side: Side) -> TreeParams:
    """Lattice parameters for an n-period tree.

    u = e^{sigma sqrt(tau/n)}, d = 1/u.  p and q are assembled from
    expm1/sinh differences so that e.g. 2q - 1 = O(sqrt(tau/n)) keeps
    full relative precision at n = 1e5 (u + d - 2 computed directly
    would lose nine digits).
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    market.require_side(side)
    dt = market.tau / n
    s = market.sigma * math.sqrt(dt)
    if market.rate * dt >= s:
        raise ModelError(
            f"n too small for given r, sigma, tau: need r*tau/n < sigma*sqrt(tau/n), "
            f"got n={n}, r={market.rate}, sigma={market.sigma}, tau={market.tau}"
        )
    u = math.exp(s)
    d = math.exp(-s)
    um1 = math.expm1(s)
    dm1 = math.expm1(-s)
    ep = math.expm1(market.rate * dt)
    em = math.expm1(-market.rate * dt)
    ud = 2.0 * math.sinh(s)  # u - d without cancellation
    p_up = (ep - dm1) / ud
    q_adj = (um1 - em) / ud
    raw_j0 = _initial_level(market, side) / s
    floor, frac = _split_level(raw_j0)
    j0 = floor + frac
    return TreeParams(
        n=n, u=u, d=d, p_up=p_up, q_adj=q_adj,
        j0=j0, j0_floor=floor, j0_frac=frac, kappa=frac * (1.0 - frac),
    )


def path_count(j0: float, j: float, k: int, n: int) -> int:
    """Lambda^{j0}_{j,k,n}: paths from level j0 with k ups ending at level j.

    Out-of-range (j, k) return 0.  The three class ranges are pairwise
    disjoint in (j, k), including for integer j0 where unabsorbed levels
    are themselves integers.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if j0 < 0.0:
        raise DomainError(f"j0 must be nonnegative, got {j0}")
    record = _classify_path_count(j0, j, k, n)
    return 0 if record is None else record.count


def _classify_path_count(j0: float, j: float, k: int, n: int) -> PathCount | None:
    floor, frac = _split_level(j0)
    j0_eff = floor + frac
    if k < 0 or k > n:
        return None
    k_partial_min = n - (n + floor) // 2
    # unabsorbed terminal level for k ups is exactly j0 + 2k - n
    if abs(j - (j0_eff + (2 * k - n))) < LEVEL_SNAP:
        if n - floor <= k <= n:
            return PathCount(j=j0_eff + (2 * k - n), k=k, count=math.comb(n, k),
                             class_tag="binomial")
        if k_partial_min <= k <= n - floor - 1:
            count = math.comb(n, k) - math.comb(n, k + floor + 1)
            return PathCount(j=j0_eff + (2 * k - n), k=k, count=count,
                             class_tag="partial_binomial")
    j_int = round(j)
    if abs(j - j_int) < LEVEL_SNAP and 0 <= j_int <= n - floor - 1:
        if j_int <= k <= (n - floor - 1 + j_int) // 2:
            count = _comb0(n, k - j_int) - _comb0(n, k - j_int - 1)
            return PathCount(j=float(j_int), k=k, count=count, class_tag="inner_cv")
    return None


def iter_path_counts(j0: float, n: int) -> Iterator[PathCount]:
    """All path counts with nonzero count, each (j, k) exactly once."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if j0 < 0.0:
        raise DomainError(f"j0 must be nonnegative, got {j0}")
    floor, frac = _split_level(j0)
    j0_eff = floor + frac
    for k in range(max(n - floor, 0), n + 1):
        yield PathCount(j=j0_eff + (2 * k - n), k=k, count=math.comb(n, k),
                        class_tag="binomial")
    k_partial_min = n - (n + floor) // 2
    for k in range(max(k_partial_min, 0), n - floor):
        count = math.comb(n, k) - math.comb(n, k + floor + 1)
        if count:
            yield PathCount(j=j0_eff + (2 * k - n), k=k, count=count,
                            class_tag="partial_binomial")
    for j_int in range(0, n - floor):
        for k in range(j_int, (n - floor - 1 + j_int) // 2 + 1):
            count = _comb0(n, k - j_int) - _comb0(n, k - j_int - 1)
            if count:
                yield PathCount(j=float(j_int), k=k, count=count,
                                class_tag="inner_cv")


def path_count_enumerate(j0: float, n: int) -> dict[tuple[float, int], int]:
    """Exhaustive tally over all 2^n up/down words of (terminal level, ups).

    Level dynamics j -> j+1 (up), j -> max(j-1, 0) (down).  States are
    tracked symbolically (fractional offset vs. absorbed integer) so the
    returned keys are exact.  Budget: n <= 22.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if j0 < 0.0:
        raise DomainError(f"j0 must be nonnegative, got {j0}")
    if n > ENUMERATION_MAX_N:
        raise BudgetError(
            f"path_count_enumerate is limited to n <= {ENUMERATION_MAX_N} "
            f"(2^n words), got {n}"
        )
    floor, frac = _split_level(j0)
    # state: ("frac", i) = level j0 + i (only while i >= -floor), or
    # ("int", m) = absorbed integer level m
    start = ("int", floor) if frac == 0.0 else ("frac", 0)
    states: dict[tuple[str, int], dict[int, int]] = {start: {0: 1}}
    for _ in range(n):
        nxt: dict[tuple[str, int], dict[int, int]] = {}

        def _add(state: tuple[str, int], k: int, count: int) -> None:
            nxt.setdefault(state, {})
            nxt[state][k] = nxt[state].get(k, 0) + count

        for (kind, i), by_k in states.items():
            for k, count in by_k.items():
                if kind == "frac":
                    _add(("frac", i + 1), k + 1, count)
                    if i - 1 >= -floor:
                        _add(("frac", i - 1), k, count)
                    else:
                        _add(("int", 0), k, count)
                else:
                    _add(("int", i + 1), k + 1, count)
                    _add(("int", max(i - 1, 0)), k, count)
        states = nxt
    out: dict[tuple[float, int], int] = {}
    j0_eff = floor + frac
    for (kind, i), by_k in states.items():
        level = j0_eff + i if kind == "frac" else float(i)
        for k, count in by_k.items():
            out[(level, k)] = out.get((level, k), 0) + count
    return out


def _log_binom_row(n: int) -> np.ndarray:
    """log C(n, k) for k = 0..n."""
    ks = np.arange(n + 1, dtype=np.float64)
    return gammaln(n + 1.0) - gammaln(ks + 1.0) - gammaln(n - ks + 1.0)


def price_closed(market: MarketState, n: int, side: Side) -> float:
    """S_t (V1 - V2 + V3) by the literal sums over terminal levels.

    V1 and V2 run over unabsorbed levels j0 + 2k - n (V2 subtracts the
    reflected counts C(n, k+f+1)); V3 is the double sum over absorbed
    integer levels.  Each term is assembled in log space; the inner
    count difference C(n,i) - C(n,i-1) is evaluated as
    C(n,i) (n - 2i + 1)/(n - i + 1) to avoid cancellation of huge
    binomials.  O(n^2) work, intended for n <= ~5000.
    """
    par = tree_params(market, n, side)
    s = market.sigma * math.sqrt(market.tau / n)
    floor = par.j0_floor
    w_up = par.q_adj if side == "call" else 1.0 - par.q_adj
    lw_up = math.log(w_up)
    lw_dn = math.log1p(-w_up)
    sign = -1.0 if side == "call" else 1.0  # payoff = sign * expm1(sign * level * s)
    log_c = _log_binom_row(n)

    # k below n - (n+f)/2 cannot stay unabsorbed; for j0 > n no path is
    # ever absorbed and every k >= 0 is plain binomial
    k_min = max(n - (n + floor) // 2, 0)
    ks = np.arange(k_min, n + 1, dtype=np.int64)
    levels = par.j0 + 2 * ks.astype(np.float64) - n
    payoffs = sign * np.expm1(sign * levels * s)
    weights = np.exp(log_c[ks] + ks * lw_up + (n - ks) * lw_dn)
    v1 = math.fsum((payoffs * weights).tolist())

    n_inner = n - floor - 1  # top absorbed level; negative when j0 >= n
    if n_inner < 0:
        return market.spot * v1

    ks2 = np.arange(k_min, n - floor, dtype=np.int64)
    if ks2.size:
        levels2 = par.j0 + 2 * ks2.astype(np.float64) - n
        payoffs2 = sign * np.expm1(sign * levels2 * s)
        weights2 = np.exp(log_c[ks2 + floor + 1] + ks2 * lw_up + (n - ks2) * lw_dn)
        v2 = math.fsum((payoffs2 * weights2).tolist())
    else:
        v2 = 0.0

    v3_rows = []
    for j in range(0, n_inner + 1):
        k_hi = (n_inner + j) // 2
        if k_hi < j:
            continue
        kj = np.arange(j, k_hi + 1, dtype=np.int64)
        i = kj - j
        # C(n,i) - C(n,i-1) = C(n,i) (n - 2i + 1) / (n - i + 1), exact and
        # cancellation-free on this range (i <= (n-1)/2)
        diff_factor = (n - 2 * i + 1).astype(np.float64) / (n - i + 1).astype(np.float64)
        terms = np.exp(log_c[i] + kj * lw_up + (n - kj) * lw_dn) * diff_factor
        payoff_j = sign * math.expm1(sign * j * s)
        v3_rows.append(payoff_j * float(np.sum(terms)))
    v3 = math.fsum(v3_rows)
    return market.spot * (v1 - v2 + v3)


class _ReducedScalars:
    """Cancellation-free building blocks for the reduced closed form.

    All quantities that vanish as n grows (2q - 1, Q - 1, Qd - 1, ...)
    are assembled from expm1/sinh differences; u + d - 2 in particular is
    4 sinh^2(s/2).  Powers like Q^{-(f+1)} go through exp(-(f+1) log1p(Q-1)).
    """

    def __init__(self, market: MarketState, n: int, side: Side) -> None:
        par = tree_params(market, n, side)
        dt = market.tau / n
        s = market.sigma * math.sqrt(dt)
        self.par = par
        self.s = s
        self.u = par.u
        self.d = par.d
        self.um1 = math.expm1(s)
        dm1 = math.expm1(-s)
        ep = math.expm1(market.rate * dt)
        em = math.expm1(-market.rate * dt)
        a = 4.0 * math.sinh(0.5 * s) ** 2  # u + d - 2
        ud = 2.0 * math.sinh(s)            # u - d
        self.p = (ep - dm1) / ud
        self.q = (self.um1 - em) / ud
        self.one_m_p = (self.um1 - ep) / ud
        self.one_m_q = (em - dm1) / ud
        two_q_m1 = (a - 2.0 * em) / ud
        two_p_m1 = (2.0 * ep - a) / ud
        self.Q = self.q / self.one_m_q
        self.P = self.p / self.one_m_p
        self.Qm1 = two_q_m1 / self.one_m_q
        self.Pm1 = two_p_m1 / self.one_m_p
        self.Qdm1 = -(1.0 + self.d) * em / (em - dm1)        # Q d - 1
        self.uWm1 = (1.0 + self.u) * em / (ud * self.q)      # u/Q - 1
        self.disc = math.exp(-market.rate * market.tau)


def price_closed_reduced(market: MarketState, n: int, side: Side) -> float:
    """Same value as ``price_closed`` via complementary binomial CDFs.

    V1 and V2 become complementary-CDF differences at the split indices
    j1 = n - floor((n + j0_floor)/2) and j2 = j1 + j0_floor + 1; the V3
    double sum telescopes into geometric combinations of CDFs with
    ratios Q = q/(1-q) and P = p/(1-p) for r > 0, and into the separate
    rate-zero form (using k C(n,k) = n C(n-1,k-1)) when the geometric
    ratios degenerate to 1.  O(n) time; stable at n = 1e5.

    Branch dispatch is on rate == 0.0 exactly, never an epsilon: the two
    cases are distinct exact formulas and their r -> 0 continuity is a
    tested property.  The r > 0 rearrangement is consequently
    ill-conditioned for economically meaningless tiny rates (absolute
    error ~ eps sigma^2 spot / (2 r), noticeable below r ~ 1e-9).
    """
    sc = _ReducedScalars(market, n, side)
    par = sc.par
    spot = market.spot
    floor = par.j0_floor
    u, d, q, p = sc.u, sc.d, sc.q, sc.p
    disc = sc.disc
    j1 = n - (n + floor) // 2
    j2 = j1 + floor + 1
    j3 = j1 - 1
    n_inner = n - floor - 1
    log_q_ratio = math.log1p(sc.Qm1)
    log_p_ratio = math.log1p(sc.Pm1)
    if side == "call":
        # extremum/spot as u^{-j0}: consistent with the snapped level
        ms_disc = math.exp(-par.j0 * sc.s) * disc
        v1 = (binom_cdf_complement(n, q, j1 - 1)
              - ms_disc * binom_cdf_complement(n, p, j1 - 1))
        if n_inner < 0:
            return spot * v1
        v2 = (math.exp(-(floor + 1) * log_q_ratio) * binom_cdf_complement(n, q, j2 - 1)
              - ms_disc * math.exp(-(floor + 1) * log_p_ratio)
              * binom_cdf_complement(n, p, j2 - 1))
        if market.rate == 0.0:
            um1 = sc.um1
            v3 = ((floor - n - 1.0 / um1)
                  * (binom_pmf(n, q, j3) - um1 * binom_cdf_exact(n, q, j3 - 1))
                  - 2.0 * u * binom_cdf_exact(n, q, j3 - 1)
                  + math.exp(-(floor + 1) * sc.s) / um1
                  * (um1 * binom_cdf_exact(n, p, j3 - 1) + u * binom_pmf(n, p, j3))
                  + 2.0 * n * q
                  * (binom_pmf(n - 1, q, j3 - 1)
                     - um1 * binom_cdf_exact(n - 1, q, j3 - 2)))
        else:
            log_qd_ratio = math.log1p(sc.Qdm1)
            c_a = sc.Q * (1.0 - d) / (sc.Qm1 * sc.Qdm1)
            c_b = math.exp(-(floor + 1) * log_q_ratio) / sc.Qm1
            c_c = -disc * math.exp(-(floor + 1) * log_qd_ratio) / (d * sc.Qdm1)
            # Bin(j3) - Q Bin(j3-1) and friends, rewritten through the pmf at
            # j3 so the near-cancelling CDF pair never meets head on
            pair_a = binom_pmf(n, q, j3) - sc.Qm1 * binom_cdf_exact(n, q, j3 - 1)
            pair_b = (sc.Q * binom_pmf(n, 1.0 - q, j3)
                      + sc.Qm1 * binom_cdf_exact(n, 1.0 - q, j3 - 1))
            pair_c = (sc.P * binom_pmf(n, 1.0 - p, j3)
                      + sc.Pm1 * binom_cdf_exact(n, 1.0 - p, j3 - 1))
            v3 = c_a * pair_a + c_b * pair_b + c_c * pair_c
        return spot * (v1 - v2 + v3)

    ms_disc = math.exp(par.j0 * sc.s) * disc
    v1 = (ms_disc * binom_cdf_complement(n, 1.0 - p, j1 - 1)
          - binom_cdf_complement(n, 1.0 - q, j1 - 1))
    if n_inner < 0:
        return spot * v1
    v2 = (ms_disc * math.exp((floor + 1) * log_p_ratio)
          * binom_cdf_complement(n, 1.0 - p, j2 - 1)
          - math.exp((floor + 1) * log_q_ratio)
          * binom_cdf_complement(n, 1.0 - q, j2 - 1))
    # parity edge term: the top absorbed level is reached only when
    # n - floor - 1 and the step count share parity
    edge = (1.0 - d) * binom_pmf(n, 1.0 - q, j3) if n_inner % 2 == 0 else 0.0
    if market.rate == 0.0:
        v3 = ((1.0 - d)
              * (n_inner * binom_cdf_exact(n, p, j3)
                 - 2.0 * n * p * binom_cdf_exact(n - 1, p, j3 - 1))
              + d * binom_cdf_exact(n, p, j3)
              - math.exp((floor + 1) * sc.s) * binom_cdf_exact(n, q, j3)
              + edge)
    else:
        log_uw_ratio = math.log1p(sc.uWm1)
        u2wm1 = u * sc.uWm1 + sc.um1  # u^2/Q - 1
        c_a = (1.0 / sc.Q) * u2wm1 / sc.uWm1
        c_b = -(sc.Qm1 / sc.Q) / sc.uWm1 - 1.0
        v3 = (disc * c_a * math.exp(-(floor + 2) * log_uw_ratio)
              * binom_cdf_exact(n, p, j3)
              + c_b * binom_cdf_exact(n, 1.0 - q, j3)
              - math.exp((floor + 1) * log_q_ratio) * binom_cdf_exact(n, q, j3)
              + edge)
    return spot * (v1 - v2 + v3)


def price_backward_induction(market: MarketState, n: int, side: Side) -> float:
    """Risk-neutral backward induction on the level lattice.

    Two value columns evolve together: F over fractional levels
    {j0_frac + g : g = 0..floor+n} and G over integer levels {0..floor+n}
    (both must span floor + n + 1 cells: the start level floor + j0_frac
    can climb n more steps).  A down move from the lowest fractional
    level lands on integer 0, coupling F to G; integer levels reflect at
    0.  Up weight is q_adj for calls and 1 - q_adj for puts.  No
    per-step discounting: the adjusted weights already price relative to
    the spot numeraire (q_adj + (1 - q_adj) = 1 absorbs e^{-r tau/n}),
    so the price is simply spot times the start-level expectation.
    """
    if n > TREE_MAX_N:
        raise BudgetError(
            f"price_backward_induction is limited to n <= {TREE_MAX_N}, got {n}"
        )
    par = tree_params(market, n, side)
    s = market.sigma * math.sqrt(market.tau / n)
    floor, frac = par.j0_floor, par.j0_frac
    w_up = par.q_adj if side == "call" else 1.0 - par.q_adj
    w_dn = 1.0 - w_up
    size = floor + n + 1
    sign = -1.0 if side == "call" else 1.0

    int_levels = np.arange(size, dtype=np.float64)
    g = sign * np.expm1(sign * int_levels * s)
    has_frac = frac > 0.0
    if has_frac:
        f_col = sign * np.expm1(sign * (frac + int_levels) * s)

    for _ in range(n):
        g_new = np.empty_like(g)
        g_new[0] = w_up * g[1] + w_dn * g[0]
        g_new[1:-1] = w_up * g[2:] + w_dn * g[:-2]
        g_new[-1] = g[-1]  # stale top cell, never reachable from the start
        if has_frac:
            f_new = np.empty_like(f_col)
            f_new[0] = w_up * f_col[1] + w_dn * g[0]
            f_new[1:-1] = w_up * f_col[2:] + w_dn * f_col[:-2]
            f_new[-1] = f_col[-1]
            f_col = f_new
        g = g_new

    start_value = f_col[floor] if has_frac else g[floor]
    return market.spot * float(start_value)
