"""Statistical checkers for the three group-fairness axioms.

Each axiom is operationalized as an independence test on continuous
data:

* independence (statistical parity): price independent of D — a
  distance-correlation permutation test.
* separation (equalized odds): price independent of D given Y — the
  response is sliced into equal-probability bins, the permutation test
  runs inside each bin, and per-bin p-values are Fisher-combined.
* sufficiency (predictive parity): Y independent of D given the price —
  the same machinery with the roles of Y and the price exchanged.

The permutation core discretizes both variables into quantile levels
and works on the resulting contingency table: the distance covariance
of the discretized pair is <N, A~ N B~> for fixed centered
level-distance matrices, and permuting one variable induces exactly the
fixed-margins hypergeometric law on tables, which is sampled directly
(Patefield's algorithm).  This keeps every observation in play at
O(levels^3) per permutation instead of O(n^2).

Within conditioning bins, both tested variables are linearly detrended
on the conditioning variable (all three on the normal-scores scale), to
remove the spurious dependence that finite-width bins otherwise leak in
the tails of the conditioning variable.  Per-bin mid-p values feed
Fisher's combination so that the combined statistic keeps its
chi-square reference despite the permutation p-value grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import stats as sps

from .errors import ConfigError, EmptyBin, LengthMismatch, OutOfRange, TooFewSamples
from .streams import generator, normal_ppf

POWER_GUARD_N = 100_000  # HOLDS requires at least this many observations

MIN_BIN_COUNT = 30

HOLDS = "HOLDS"
VIOLATED = "VIOLATED"
INCONCLUSIVE = "INCONCLUSIVE"

INDEPENDENCE = "independence"
SEPARATION = "separation"
SUFFICIENCY = "sufficiency"
AXIOM_KINDS = (INDEPENDENCE, SEPARATION, SUFFICIENCY)

# pre-assigned permutation sub-streams (one per bin index) so results do
# not depend on scheduling; the two conditional checkers share the same
# streams, which makes the separation/sufficiency role exchange an exact
# identity on the same inputs
_STREAM_GENERIC = 0xFA00
_STREAM_INDEPENDENCE = 0xFA01
_STREAM_BIN_BASE = 0xFB00


@dataclass(frozen=True)
class Axiom:
    kind: str

    def __post_init__(self):
        if self.kind not in AXIOM_KINDS:
            raise ValueError(f"unknown axiom kind {self.kind!r}")


@dataclass(frozen=True)
class TestConfig:
    """Knobs for the statistical checkers.

    alpha and the permutation budget follow the usual trade-off; the
    permutation RNG is keyed by `seed` only, independent of the seeds
    that generated the data.  n_levels bounds the quantile
    discretization of the test statistic; rank_transform runs the test
    on copula scale (invariant under monotone re-parameterizations of
    prices); residualize toggles the within-bin detrending.
    """

    alpha: float = 0.01
    n_permutations: int = 999
    n_bins_y: int = 20
    seed: int = 0
    rank_transform: bool = True
    n_levels: int = 64
    residualize: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ConfigError(f"alpha must be in (0, 0.5), got {self.alpha}")
        if self.n_permutations < 99:
            raise ConfigError("n_permutations must be >= 99")
        if self.n_bins_y < 5:
            raise ConfigError("n_bins_y must be >= 5")
        if self.n_levels < 4:
            raise ConfigError("n_levels must be >= 4")


@dataclass(frozen=True)
class FairnessVerdict:
    """Per-axiom outcome; exactly one of p_value / analytic_criterion
    drives the verdict, recorded in `source`."""

    axiom: Axiom
    statistic: float
    p_value: Optional[float]
    analytic_criterion: Optional[float]
    verdict: str
    alpha: float
    n_used: int
    seed: int
    source: str = "statistical"

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom.kind,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "analytic_criterion": self.analytic_criterion,
            "verdict": self.verdict,
            "alpha": self.alpha,
            "n_used": self.n_used,
            "seed": self.seed,
            "source": self.source,
        }


def _verdict_from_p(p: float, alpha: float, n_used: int) -> str:
    if p < alpha:
        return VIOLATED
    return HOLDS if n_used >= POWER_GUARD_N else INCONCLUSIVE


def _copula_ranks(x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    return sps.rankdata(x) / (n + 1.0)


def _as_columns(*cols):
    arrays = [np.asarray(c, dtype=np.float64).ravel() for c in cols]
    n = arrays[0].shape[0]
    if any(a.shape[0] != n for a in arrays):
        raise LengthMismatch("input vectors have unequal lengths")
    return arrays


# ---------------------------------------------------------------------------
# discretized distance correlation with a fixed-margins permutation null
# ---------------------------------------------------------------------------

def _quantile_level_ids(x: np.ndarray, n_levels: int):
    probs = np.linspace(0.0, 1.0, n_levels + 1)[1:-1]
    edges = np.unique(np.quantile(x, probs))
    return np.searchsorted(edges, x, side="right"), edges.shape[0] + 1


def _level_table(a, b, n_levels, copula_positions):
    """Contingency table of quantile levels plus centered distance parts.

    Returns (N, At, Bt, dvar_a, dvar_b).  Level positions are copula
    midranks when copula_positions is set, otherwise within-level means
    of the raw values.
    """
    ga, na = _quantile_level_ids(a, n_levels)
    gb, nb = _quantile_level_ids(b, n_levels)
    N = np.zeros((na, nb))
    np.add.at(N, (ga, gb), 1.0)
    n = a.shape[0]
    pa = N.sum(axis=1) / n
    pb = N.sum(axis=0) / n
    if copula_positions:
        va = np.cumsum(pa) - pa / 2.0
        vb = np.cumsum(pb) - pb / 2.0
    else:
        va = np.bincount(ga, weights=a, minlength=na) / np.maximum(N.sum(axis=1), 1.0)
        vb = np.bincount(gb, weights=b, minlength=nb) / np.maximum(N.sum(axis=0), 1.0)
    At = _centered_level_distances(va, pa)
    Bt = _centered_level_distances(vb, pb)
    dvar_a = float(pa @ (At * At) @ pa)
    dvar_b = float(pb @ (Bt * Bt) @ pb)
    return N, At, Bt, dvar_a, dvar_b


def _centered_level_distances(values, probs):
    D = np.abs(values[:, None] - values[None, :])
    r = D @ probs
    return D - r[:, None] - r[None, :] + probs @ D @ probs


def _table_dcov(N, At, Bt, n):
    return float(np.vdot(N, At @ N @ Bt)) / n**2


def _dcor_from_parts(dcov2, dvar_a, dvar_b) -> float:
    if dvar_a <= 0.0 or dvar_b <= 0.0:
        return 0.0
    return math.sqrt(max(dcov2, 0.0) / math.sqrt(dvar_a * dvar_b))


def _null_dcov_draws(N, At, Bt, n, n_draws, rng):
    rows = N.sum(axis=1).astype(np.int64)
    cols = N.sum(axis=0).astype(np.int64)
    tables = sps.random_table(rows, cols).rvs(size=n_draws, random_state=rng)
    tables = tables.reshape(n_draws, rows.shape[0], cols.shape[0])
    inner = np.matmul(np.matmul(At, tables), Bt)
    return np.einsum("bij,bij->b", tables, inner) / n**2


def _table_permutation_test(a, b, n_levels, n_permutations, rng, copula_positions):
    """(dcor, exact p, mid p) for the discretized permutation test."""
    N, At, Bt, dva, dvb = _level_table(a, b, n_levels, copula_positions)
    n = a.shape[0]
    if dva <= 0.0 or dvb <= 0.0:
        # a constant side is independent of anything
        return 0.0, 1.0, 1.0
    s_obs = _table_dcov(N, At, Bt, n)
    null = _null_dcov_draws(N, At, Bt, n, n_permutations, rng)
    greater = int(np.sum(null > s_obs))
    ties = int(np.sum(null == s_obs))
    p_exact = (1 + greater + ties) / (n_permutations + 1)
    p_mid = (greater + 0.5 * (ties + 1)) / (n_permutations + 1)
    return _dcor_from_parts(s_obs, dva, dvb), p_exact, p_mid


# ---------------------------------------------------------------------------
# public statistic / combination primitives
# ---------------------------------------------------------------------------

def distance_correlation(a, b) -> float:
    """Empirical distance correlation of two 1-d samples, in [0, 1].

    The plain V-statistic with double centering, evaluated exactly in
    row chunks so no n x n matrix is materialized.
    """
    a, b = _as_columns(a, b)
    n = a.shape[0]
    if n < 4:
        raise LengthMismatch("need at least 4 observations")
    row_a = _abs_row_means(a)
    row_b = _abs_row_means(b)
    mu_a = float(row_a.mean())
    mu_b = float(row_b.mean())
    s_ab = s_aa = s_bb = 0.0
    chunk = max(1, (1 << 22) // n)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        A = (np.abs(a[lo:hi, None] - a[None, :])
             - row_a[lo:hi, None] - row_a[None, :] + mu_a)
        B = (np.abs(b[lo:hi, None] - b[None, :])
             - row_b[lo:hi, None] - row_b[None, :] + mu_b)
        s_ab += float(np.vdot(A, B))
        s_aa += float(np.vdot(A, A))
        s_bb += float(np.vdot(B, B))
    return _dcor_from_parts(s_ab / n**2, s_aa / n**2, s_bb / n**2)


def _abs_row_means(x: np.ndarray) -> np.ndarray:
    """Row means of the pairwise |x_i - x_j| matrix, via sorting."""
    n = x.shape[0]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    csum = np.cumsum(xs)
    ranks = np.arange(1, n + 1)
    sums_sorted = xs * (2 * ranks - n) - 2 * csum + csum[-1]
    out = np.empty(n)
    out[order] = sums_sorted / n
    return out


def permutation_pvalue(statistic_fn: Callable, a, b, n_permutations: int,
                       seed: int) -> float:
    """p = (1 + #{permuted statistic >= observed}) / (n_permutations + 1).

    Permutations are applied to b only; deterministic in seed.
    """
    if n_permutations < 99:
        raise ConfigError("n_permutations must be >= 99")
    a, b = _as_columns(a, b)
    observed = statistic_fn(a, b)
    rng = generator(seed, _STREAM_GENERIC)
    exceed = 0
    for _ in range(n_permutations):
        exceed += statistic_fn(a, b[rng.permutation(b.shape[0])]) >= observed
    return (1 + exceed) / (n_permutations + 1)


def combine_pvalues_fisher(pvals) -> float:
    """Fisher's method: -2 sum(log p) against chi-square with 2k df."""
    p = np.asarray(pvals, dtype=np.float64).ravel()
    if p.size == 0:
        raise OutOfRange("need at least one p-value")
    if np.any(p <= 0.0) or np.any(p > 1.0):
        raise OutOfRange("p-values must lie in (0, 1]")
    stat = -2.0 * float(np.sum(np.log(p)))
    return float(sps.chi2.sf(stat, 2 * p.size))


# ---------------------------------------------------------------------------
# axiom checkers
# ---------------------------------------------------------------------------

def check_independence(prices, d, cfg: TestConfig) -> FairnessVerdict:
    """Statistical parity: price independent of the protected coordinate."""
    prices, d = _as_columns(prices, d)
    n = prices.shape[0]
    if n < 100:
        raise TooFewSamples(f"need >= 100 observations, got {n}")
    if cfg.rank_transform:
        a, b = _copula_ranks(prices), _copula_ranks(d)
    else:
        a, b = prices, d
    levels = max(4, min(cfg.n_levels, n // 16))
    rng = generator(cfg.seed, _STREAM_INDEPENDENCE)
    dcor, p_exact, _ = _table_permutation_test(
        a, b, levels, cfg.n_permutations, rng, cfg.rank_transform)
    return FairnessVerdict(
        axiom=Axiom(INDEPENDENCE), statistic=dcor, p_value=p_exact,
        analytic_criterion=None,
        verdict=_verdict_from_p(p_exact, cfg.alpha, n),
        alpha=cfg.alpha, n_used=n, seed=cfg.seed)


def check_separation(prices, d, y, cfg: TestConfig) -> FairnessVerdict:
    """Equalized odds: price independent of D conditionally on Y."""
    return _conditional_check(a=prices, b=d, given=y, cfg=cfg, axiom=SEPARATION)


def check_sufficiency(y, d, prices, cfg: TestConfig) -> FairnessVerdict:
    """Predictive parity: Y independent of D conditionally on the price.

    Identical machinery to check_separation with the roles of the
    response and the price exchanged.
    """
    return _conditional_check(a=y, b=d, given=prices, cfg=cfg, axiom=SUFFICIENCY)


def _residualize(v: np.ndarray, g: np.ndarray) -> np.ndarray:
    gc = g - g.mean()
    den = float(gc @ gc)
    if den <= 0.0:
        return v
    return v - (float(v @ gc) / den) * gc


def _conditional_check(a, b, given, cfg: TestConfig, axiom: str) -> FairnessVerdict:
    a, b, given = _as_columns(a, b, given)
    n = a.shape[0]
    if n < 100 * cfg.n_bins_y:
        raise TooFewSamples(
            f"need >= {100 * cfg.n_bins_y} observations for {cfg.n_bins_y} bins, got {n}")
    if cfg.rank_transform:
        a = normal_ppf(_copula_ranks(a))
        b = normal_ppf(_copula_ranks(b))
        given = normal_ppf(_copula_ranks(given))
    bin_ids, n_bins = _quantile_level_ids(given, cfg.n_bins_y)
    # ties can leave quantile bins with no points at all; those are a
    # degenerate-edge artifact and collapse away, while nonempty bins
    # below the minimum count are a genuine data problem
    occupied = np.unique(bin_ids)
    bin_ids = np.searchsorted(occupied, bin_ids)
    n_bins = occupied.shape[0]
    counts = np.bincount(bin_ids, minlength=n_bins)
    if counts.min() < MIN_BIN_COUNT:
        raise EmptyBin(
            f"a conditioning bin holds {counts.min()} < {MIN_BIN_COUNT} points")
    mid_ps = np.empty(n_bins)
    for k in range(n_bins):
        sel = bin_ids == k
        ak, bk, gk = a[sel], b[sel], given[sel]
        if cfg.residualize:
            ak = _residualize(ak, gk)
            bk = _residualize(bk, gk)
        levels = max(2, min(cfg.n_levels // 2, int(counts[k]) // 16))
        rng = generator(cfg.seed, _STREAM_BIN_BASE + k)
        _, _, p_mid = _table_permutation_test(
            ak, bk, levels, cfg.n_permutations, rng, cfg.rank_transform)
        mid_ps[k] = p_mid
    stat = -2.0 * float(np.sum(np.log(mid_ps)))
    p_comb = float(sps.chi2.sf(stat, 2 * n_bins))
    return FairnessVerdict(
        axiom=Axiom(axiom), statistic=stat, p_value=p_comb,
        analytic_criterion=None,
        verdict=_verdict_from_p(p_comb, cfg.alpha, n),
        alpha=cfg.alpha, n_used=n, seed=cfg.seed)
