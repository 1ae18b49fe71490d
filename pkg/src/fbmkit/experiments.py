"""Monte Carlo experiments on the scale-ladder law and its bound pipeline.

Four families:

* ``lambda_r`` — the intermediate lower-bound constant
  ((1-r)^H - (1-(1-r)^{2H})^{1/2}) / sqrt(H), which climbs to 1/sqrt(H) as
  r -> 0 (and along r^k ladders).
* ``lil_statistic`` — samples the one-sided moving-average process at
  geometric times r^i through an exact two-block decomposition
  Y = Ytilde + Yprime (recent window / deep past, built from the same
  Gaussian vector) and tracks the running minimum of
  Y_{r^i} / ((log i)^{1/2} r^{H i}) down a ladder of depths.
* ``a_n_probability`` — estimates the probability that at least p*n of the
  ladder observables (G_i) exceed alpha * H^{-1/2} (log i)_+^{1/2},
  via exact covariance sampling, with Wilson intervals, over a doubling
  ladder of n; a second antithetic eigendecomposition estimator provides an
  independent cross-check.
* ``product_tail_bound`` / ``n_threshold`` / ``union_bound_ledger`` — the
  explicit bound chain for the surrogate independent vector, the event-family
  comparison threshold, and the assembled union-bound bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from .almostdiag import phi_functions
from .context import HurstContext
from .errors import AccuracyError, ValidationError
from .gamma import (
    GAMMA_QUAD,
    GammaConfig,
    decay_bound_check,
    gamma_cov_matrix,
    reg_bound_constants,
)
from .gaussian import CovMatrix
from .quadrature import QuadratureSpec, graded_breaks, integrate_checked
from .reports import ExperimentReport, wilson_interval
from .rng import parallel_map, spawn_streams
from .thick import ThickSet

__all__ = [
    "LIL_BAND_OFFSETS",
    "LilConfig",
    "ArbitrageConfig",
    "lambda_r",
    "lil_block_cov",
    "sample_lil_blocks",
    "lil_statistic",
    "a_n_probability",
    "a_n_probability_dual",
    "max_feasible_epsilon",
    "product_tail_chain",
    "product_tail_bound",
    "n_threshold",
    "union_bound_ledger",
]

# Acceptance band for the LIL running-minimum median, as offsets from the
# limit constant -1/sqrt(H): [limit - 0.35, limit + 0.6].
LIL_BAND_OFFSETS = (-0.35, 0.6)

_CHUNK = 200_000


def lambda_r(ctx: HurstContext, r: float) -> float:
    """((1-r)^H - (1-(1-r)^{2H})^{1/2}) / sqrt(H); may be negative (vacuous)."""
    if not (0.0 < r < 1.0):
        raise ValidationError(f"r must lie in (0, 1), got {r}")
    h = ctx.hurst
    one_minus = (1.0 - r) ** h
    return (one_minus - math.sqrt(1.0 - one_minus * one_minus)) / math.sqrt(h)


# ---------------------------------------------------------------------------
# Scale-ladder law of the iterated logarithm statistic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LilConfig:
    """Running-minimum experiment: context, ratio, depth, index set, sampling."""

    ctx: HurstContext
    r: float
    i_max: int
    n_paths: int
    seed: int
    thick_set: ThickSet | None = None
    quad: QuadratureSpec = GAMMA_QUAD

    def __post_init__(self) -> None:
        if not (0.0 < self.r < 1.0):
            raise ValidationError(f"r must lie in (0, 1), got {self.r}")
        if self.i_max < 2:
            raise ValidationError(f"i_max must be >= 2, got {self.i_max}")
        if self.r**self.i_max < 1.0e-300:
            raise ValidationError(
                f"scale r^{self.i_max} underflows for r={self.r}"
            )
        if self.n_paths < 1:
            raise ValidationError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.thick_set is not None and len(self.thick_set) < self.i_max + 1:
            raise ValidationError(
                "thick_set prefix must cover indices up to i_max"
            )


def _window_cov_integral(ctx: HurstContext, r: float, d: int, quad) -> float:
    """Cov(recent-window block at depth a, deep-past block at depth b), a-b=d>=1.

    Normalized form: integral over u in (r, 1) of (1-u)^eta (r^{-d} - u)^eta.
    """
    eta = ctx.eta
    big = r**-d

    def f(u):
        return (1.0 - u) ** eta * (big - u) ** eta

    breaks = 1.0 - graded_breaks(
        0.0, 1.0 - r, toward="left", ratio=quad.grading_ratio, levels=quad.grading_levels
    )[::-1]
    return integrate_checked(f, breaks, quad, scale=big**eta)


def _past_cov_integral(ctx: HurstContext, r: float, d: int, quad) -> float:
    """Cov(deep-past blocks at lag d >= 0), normalized form over v in (0, r)."""
    eta = ctx.eta
    big = r**-d

    def f(v):
        return (big - v) ** eta * (1.0 - v) ** eta

    breaks = graded_breaks(
        0.0, r, toward="right", ratio=quad.grading_ratio, levels=quad.grading_levels
    )
    return integrate_checked(f, breaks, quad, scale=max(big**eta, 1.0))


def lil_block_cov(cfg: LilConfig) -> np.ndarray:
    """Exact covariance of the 2(i_max+1) normalized window/past blocks.

    Ordering: [T_0..T_m-1, P_0..P_m-1] with T_i the recent-window piece of
    Y_{r^i}/r^{Hi} (integration over (r^{i+1}, r^i)) and P_i the deep-past
    piece (over (0, r^{i+1})).  The T_i are i.i.d. with variance
    (1-r)^{2H}/(2H); T/P and P/P covariances are Toeplitz in the depth lag,
    so only O(i_max) one-dimensional integrals are evaluated.
    """
    h, r = cfg.ctx.hurst, cfg.r
    m = cfg.i_max + 1
    var_t = (1.0 - r) ** (2.0 * h) / (2.0 * h)
    tp = {d: _window_cov_integral(cfg.ctx, r, d, cfg.quad) for d in range(1, m)}
    pp = {d: _past_cov_integral(cfg.ctx, r, d, cfg.quad) for d in range(m)}
    cov = np.zeros((2 * m, 2 * m))
    for a in range(m):
        cov[a, a] = var_t
        for b in range(m):
            if a - b >= 1:
                cov[a, m + b] = cov[m + b, a] = r ** (h * (a - b)) * tp[a - b]
            cov[m + a, m + b] = r ** (h * abs(a - b)) * pp[abs(a - b)]
    return cov


def sample_lil_blocks(
    cfg: LilConfig, rng: np.random.Generator, n_paths: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (window, past) block arrays, each (n_paths, i_max + 1).

    The normalized process value is exactly c1 * (window + past) — the two
    pieces come from one joint Gaussian vector, never sampled separately.
    """
    n = cfg.n_paths if n_paths is None else n_paths
    m = cfg.i_max + 1
    cov = CovMatrix(lil_block_cov(cfg))
    z = cov.sample(rng, n)
    return z[:, :m], z[:, m:]


def lil_statistic(cfg: LilConfig, *, threads: int = 1) -> ExperimentReport:
    """Distribution of the running minimum of Y_{r^i}/((log i)^{1/2} r^{Hi}).

    Indices i in (thick set) ∩ [2, i_max] (the normalizer vanishes at
    i <= 1); the report carries the median at each depth of a halving ladder
    i_max, i_max/2, i_max/4 (>= 2), its order-statistic confidence interval,
    the acceptance band around the limit constant -1/sqrt(H), and the
    fraction of paths falling below the band.
    """
    h = cfg.ctx.hurst
    streams = spawn_streams(cfg.seed, 1)
    tilde, prime = sample_lil_blocks(cfg, streams[0])
    y_norm = cfg.ctx.c1 * (tilde + prime)

    all_idx = np.arange(2, cfg.i_max + 1)
    if cfg.thick_set is not None:
        all_idx = all_idx[[i in cfg.thick_set for i in all_idx]]
    if all_idx.size == 0:
        raise ValidationError("index set ∩ [2, i_max] is empty")

    stat = y_norm[:, all_idx] / np.sqrt(np.log(all_idx))[None, :]

    caps = []
    cap = cfg.i_max
    while cap >= 2 and len(caps) < 3:
        caps.append(cap)
        cap //= 2
    caps = sorted(caps)

    limit = -1.0 / math.sqrt(h)
    band = (limit + LIL_BAND_OFFSETS[0], limit + LIL_BAND_OFFSETS[1])
    report = ExperimentReport(
        kind="lil_statistic",
        config={
            "hurst": h,
            "r": cfg.r,
            "i_max": cfg.i_max,
            "n_paths": cfg.n_paths,
            "limit_constant": limit,
            "band_low": band[0],
            "band_high": band[1],
            "thick_set": "all" if cfg.thick_set is None else cfg.thick_set.description,
        },
        seed=cfg.seed,
    )

    medians = []
    for cap in caps:
        sel = all_idx <= cap
        if not sel.any():
            raise ValidationError(f"index set ∩ [2, {cap}] is empty")
        mins = stat[:, sel].min(axis=1)
        med = float(np.median(mins))
        lo, hi = _median_ci(mins)
        report.add(f"median_min_imax_{cap}", med, lo, hi, cfg.n_paths)
        below = int((mins < band[0]).sum())
        wlo, whi = wilson_interval(below, cfg.n_paths)
        report.add(f"frac_below_band_imax_{cap}", below / cfg.n_paths, wlo, whi,
                   cfg.n_paths)
        medians.append(med)

    report.trends["i_max_ladder"] = [int(c) for c in caps]
    report.trends["median_min"] = medians
    report.trends["median_in_band"] = [bool(band[0] <= m <= band[1]) for m in medians]
    report.trends["median_decreasing"] = [
        bool(medians[k + 1] < medians[k]) for k in range(len(medians) - 1)
    ]
    return report


def _median_ci(values: np.ndarray, conf_z: float = 1.96) -> tuple[float, float]:
    """Order-statistic (binomial) confidence interval for the median."""
    srt = np.sort(values)
    n = srt.size
    half = conf_z * math.sqrt(n) / 2.0
    lo = int(np.clip(math.floor(n / 2.0 - half), 0, n - 1))
    hi = int(np.clip(math.ceil(n / 2.0 + half), 0, n - 1))
    return float(srt[lo]), float(srt[hi])


# ---------------------------------------------------------------------------
# Excess-count event probabilities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArbitrageConfig:
    """Excess-count event family: thresholds alpha, count fraction p, depth n."""

    ctx: HurstContext
    r: float
    alpha: float
    p: float
    n: int
    n_paths: int
    seed: int
    alpha_prime: float | None = None
    p_prime: float | None = None
    r_tilde: float | None = None
    quad: QuadratureSpec = GAMMA_QUAD

    def __post_init__(self) -> None:
        if not (0.0 < self.r < 1.0):
            raise ValidationError(f"r must lie in (0, 1), got {self.r}")
        # alpha = 0 is admitted deliberately: it degrades the event to a
        # median-type condition used as the estimator's negative control.
        if not (0.0 <= self.alpha < 1.0):
            raise ValidationError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not (0.0 < self.p < 1.0):
            raise ValidationError(f"p must lie in (0, 1), got {self.p}")
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if self.n_paths < 1:
            raise ValidationError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.alpha_prime is not None and not (0.0 < self.alpha_prime < self.alpha):
            raise ValidationError(
                f"need 0 < alpha_prime < alpha, got {self.alpha_prime} vs {self.alpha}"
            )
        if self.p_prime is not None and not (0.0 < self.p_prime < self.p):
            raise ValidationError(
                f"need 0 < p_prime < p, got {self.p_prime} vs {self.p}"
            )
        if self.r_tilde is not None and not (0.0 < self.r_tilde < self.r):
            raise ValidationError(
                f"need 0 < r_tilde < r, got {self.r_tilde} vs {self.r}"
            )

    def thresholds(self, n: int | None = None) -> np.ndarray:
        """alpha * H^{-1/2} * (log i)_+^{1/2} for i in [0, n)."""
        n = self.n if n is None else n
        i = np.arange(n, dtype=float)
        logs = np.maximum(np.log(np.maximum(i, 1.0)), 0.0)
        return self.alpha / math.sqrt(self.ctx.hurst) * np.sqrt(logs)

    def required_count(self, n: int | None = None) -> int:
        """Smallest admissible exceedance count: ceil(p * n)."""
        n = self.n if n is None else n
        return max(1, math.ceil(self.p * n - 1.0e-12))


def _doubling_ladder(n: int) -> list[int]:
    ladder = {1, n}
    k = 2
    while k <= n:
        ladder.add(k)
        k *= 2
    return sorted(ladder)


def a_n_probability(cfg: ArbitrageConfig, *, threads: int = 1) -> ExperimentReport:
    """Wilson-interval estimates of the excess-count probability P(A_n).

    Samples the ladder vector (G_0..G_{n-1}) exactly from its covariance
    (quadrature + Cholesky) and evaluates the event on every prefix in a
    doubling ladder of depths from the same draws, reporting
    log P-hat / n and its trend.  Zero hits at some depth leave only the
    Wilson upper bound meaningful (value 0, ci_low 0).
    """
    if cfg.n > 64:
        raise ValidationError(
            f"n = {cfg.n} out of the Monte Carlo regime (n <= 64)"
        )
    cov = gamma_cov_matrix(GammaConfig(cfg.ctx, cfg.r, n=cfg.n, quad=cfg.quad),
                           cfg.n, threads=threads)
    thr = cfg.thresholds()
    ladder = _doubling_ladder(cfg.n)
    needs = {m: cfg.required_count(m) for m in ladder}

    n_chunks = max(1, math.ceil(cfg.n_paths / _CHUNK))
    sizes = [min(_CHUNK, cfg.n_paths - k * _CHUNK) for k in range(n_chunks)]
    streams = spawn_streams(cfg.seed, n_chunks)

    def run_chunk(k: int) -> np.ndarray:
        z = cov.sample(streams[k], sizes[k])
        exceed = np.cumsum(z >= thr[None, :], axis=1)
        return np.asarray(
            [(exceed[:, m - 1] >= needs[m]).sum() for m in ladder], dtype=np.int64
        )

    per_chunk = parallel_map(run_chunk, range(n_chunks), threads=threads)
    hits = np.sum(np.stack(per_chunk, axis=0), axis=0)

    report = ExperimentReport(
        kind="a_n_probability",
        config={
            "hurst": cfg.ctx.hurst,
            "r": cfg.r,
            "alpha": cfg.alpha,
            "p": cfg.p,
            "n": cfg.n,
            "n_paths": cfg.n_paths,
        },
        seed=cfg.seed,
    )
    log_p_over_n = []
    for m, h in zip(ladder, hits.tolist()):
        lo, hi = wilson_interval(h, cfg.n_paths)
        report.add(f"p_an_n_{m}", h / cfg.n_paths, lo, hi, cfg.n_paths)
        log_p_over_n.append(math.log(h / cfg.n_paths) / m if h > 0 else None)
    report.trends["n_ladder"] = ladder
    report.trends["hits"] = hits.tolist()
    report.trends["log_p_over_n"] = log_p_over_n
    # n in {1, 2} is dominated by the zero-threshold indices; the decay-rate
    # trend is meaningful from n = 4 up
    rate_pairs = [
        (log_p_over_n[k], log_p_over_n[k + 1])
        for k in range(len(ladder) - 1)
        if ladder[k] >= 4
    ]
    report.trends["rate_strictly_decreasing"] = [
        None if (a is None or b is None) else bool(b < a) for a, b in rate_pairs
    ]
    return report


def a_n_probability_dual(cfg: ArbitrageConfig) -> ExperimentReport:
    """Antithetic eigendecomposition estimator of P(A_n) (cross-check route).

    Uses a symmetric matrix square root instead of Cholesky and evaluates the
    event on +/- pairs of the same normals; the confidence interval is the
    normal-approximation interval on pair-averaged indicators.
    """
    if cfg.n > 16:
        raise ValidationError("dual estimator is intended for small n (<= 16)")
    cov = gamma_cov_matrix(GammaConfig(cfg.ctx, cfg.r, n=cfg.n, quad=cfg.quad), cfg.n)
    vals, vecs = np.linalg.eigh(cov.matrix)
    vals = np.maximum(vals, 0.0)
    root = vecs @ np.diag(np.sqrt(vals)) @ vecs.T
    thr = cfg.thresholds()
    need = cfg.required_count()

    n_pairs = cfg.n_paths
    rng = spawn_streams(cfg.seed, 1)[0]
    means = np.empty(n_pairs)
    done = 0
    while done < n_pairs:
        m = min(_CHUNK, n_pairs - done)
        normals = rng.standard_normal((m, cfg.n))
        z = normals @ root.T
        up = ((z >= thr[None, :]).sum(axis=1) >= need).astype(float)
        dn = (((-z) >= thr[None, :]).sum(axis=1) >= need).astype(float)
        means[done:done + m] = 0.5 * (up + dn)
        done += m
    phat = float(means.mean())
    se = float(means.std(ddof=1) / math.sqrt(n_pairs)) if n_pairs > 1 else 0.0
    report = ExperimentReport(
        kind="a_n_probability_dual",
        config={
            "hurst": cfg.ctx.hurst,
            "r": cfg.r,
            "alpha": cfg.alpha,
            "p": cfg.p,
            "n": cfg.n,
            "n_paths": cfg.n_paths,
        },
        seed=cfg.seed,
    )
    report.add(f"p_an_n_{cfg.n}", phat, max(0.0, phat - 1.96 * se),
               min(1.0, phat + 1.96 * se), 2 * n_pairs)
    return report


# ---------------------------------------------------------------------------
# Bound pipeline: surrogate product chain, comparison threshold, union ledger
# ---------------------------------------------------------------------------


def max_feasible_epsilon(*, tol: float = 1.0e-12) -> float:
    """Largest epsilon with all almost-diagonal constants finite (bisection)."""
    lo, hi = 0.0, 0.25
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if phi_functions(mid).all_finite():
            lo = mid
        else:
            hi = mid
    return lo


def product_tail_chain(cfg: ArbitrageConfig, index_set) -> dict:
    """Every link of the surrogate-vector tail chain, in log space.

    The surrogate vector has i.i.d. centered Gaussian coordinates with
    variance phi_k * sigma^2; the chain is

        log P(all i in I: coordinate_i >= threshold_i)
          = sum_i log SF(threshold_i / (sqrt(phi_k) sigma))     (exact)
         <= sum_{i in I} -C_l^2 (log i)_+ / 2                   (Gaussian tail)
         <= -C_l^2/2 * log((|I| - 1)!)                          (i_j >= j)
         <= -C_l^2/2 * log((ceil(p n) - 1)!)                    (|I| >= ceil(pn))

    with C_l = alpha H^{-1/2} / (sqrt(phi_k) sigma).
    """
    idx = sorted(set(int(i) for i in index_set))
    if not idx:
        raise ValidationError("index set must be nonempty")
    if idx[0] < 0 or idx[-1] >= cfg.n:
        raise ValidationError(f"index set must lie in [0, {cfg.n})")
    need = cfg.required_count()
    if len(idx) < need:
        raise ValidationError(
            f"index set has {len(idx)} elements; chain requires >= ceil(p n) = {need}"
        )
    profile = decay_bound_check(
        GammaConfig(cfg.ctx, cfg.r, n=cfg.n, quad=cfg.quad), max(cfg.n - 1, 1)
    )
    eps = profile.epsilon
    phis = phi_functions(eps)
    if not phis.all_finite() or not math.isfinite(phis.phi_k):
        raise ValidationError(
            f"phi_k is infinite at epsilon = {eps:.6g} (H = {cfg.ctx.hurst}, "
            f"r = {cfg.r}); the chain requires epsilon < "
            f"{max_feasible_epsilon():.6g} — decrease r"
        )
    sigma = math.sqrt(profile.sigma2)
    sd_surrogate = math.sqrt(phis.phi_k) * sigma
    c_l = cfg.alpha / math.sqrt(cfg.ctx.hurst) / sd_surrogate

    logs_plus = np.maximum(np.log(np.maximum(np.asarray(idx, dtype=float), 1.0)), 0.0)
    thresholds = cfg.alpha / math.sqrt(cfg.ctx.hurst) * np.sqrt(logs_plus)
    log_exact = float(stats.norm.logsf(thresholds / sd_surrogate).sum())
    log_tail = float(-(c_l * c_l) / 2.0 * logs_plus.sum())
    log_sorted = -(c_l * c_l) / 2.0 * math.lgamma(len(idx))
    log_final = -(c_l * c_l) / 2.0 * math.lgamma(need)
    return {
        "epsilon": eps,
        "sigma": sigma,
        "phi_k": phis.phi_k,
        "c_l": c_l,
        "log_exact_product": log_exact,
        "log_tail_product": log_tail,
        "log_sorted_bound": log_sorted,
        "log_final_bound": log_final,
    }


def product_tail_bound(cfg: ArbitrageConfig, index_set) -> float:
    """((ceil(p n) - 1)_+!)^{-C_l^2/2}, with every chain link asserted.

    Raises AccuracyError if any of the analytic inequalities fails
    numerically (they are exact mathematics; failure means a defect).
    """
    chain = product_tail_chain(cfg, index_set)
    links = [
        ("exact product vs per-factor tail bound",
         chain["log_exact_product"], chain["log_tail_product"]),
        ("per-factor tail vs sorted-index bound",
         chain["log_tail_product"], chain["log_sorted_bound"]),
        ("sorted-index vs factorial bound",
         chain["log_sorted_bound"], chain["log_final_bound"]),
    ]
    for name, smaller, larger in links:
        slack = 1.0e-9 * max(1.0, abs(smaller), abs(larger))
        if smaller > larger + slack:
            raise AccuracyError(
                f"tail chain link broken ({name}): {smaller} > {larger}",
                estimate=smaller - larger,
                budget=slack,
            )
    return math.exp(chain["log_final_bound"])


def n_threshold(
    hurst: float, alpha: float, alpha_prime: float, p: float, p_prime: float
) -> int:
    """ceil((e^{H/(alpha - alpha')^2} + 1) / (p - p')) — event-family comparison depth."""
    if not (0.0 < hurst < 1.0):
        raise ValidationError(f"hurst must lie in (0, 1), got {hurst}")
    if not (0.0 < alpha_prime < alpha < 1.0):
        raise ValidationError(
            f"need 0 < alpha_prime < alpha < 1, got {alpha_prime}, {alpha}"
        )
    if not (0.0 < p_prime < p < 1.0):
        raise ValidationError(f"need 0 < p_prime < p < 1, got {p_prime}, {p}")
    gap = alpha - alpha_prime
    return math.ceil((math.exp(hurst / (gap * gap)) + 1.0) / (p - p_prime))


def union_bound_ledger(cfg: ArbitrageConfig, p_an_prime) -> ExperimentReport:
    """Assemble ceil(r_tilde^{-n}) * (P(A'_n) + remainder_n) per depth.

    ``p_an_prime`` maps each depth n to an estimate/bound of the primed-event
    probability.  The remainder is the n-term union bound
    n * C_b * exp(-C_a (r/r_tilde)^{(2H∧1) n}) with the constants of
    ``reg_gamhat_bound``; the multiplier ceil(r_tilde^{-n}) is computed in
    exact integer arithmetic.  The report flags the crossover depth where the
    remainder starts to fall.
    """
    if cfg.r_tilde is None:
        raise ValidationError("union_bound_ledger requires r_tilde in the config")
    items = sorted((int(n), float(v)) for n, v in dict(p_an_prime).items())
    if not items:
        raise ValidationError("p_an_prime must be a nonempty mapping n -> value")
    for n, value in items:
        if n < 1:
            raise ValidationError(f"depths must be >= 1, got {n}")
        if not (0.0 <= value <= 1.0):
            raise ValidationError(f"P(A'_{n}) = {value} outside [0, 1]")

    c_a, c_b = reg_bound_constants(GammaConfig(cfg.ctx, cfg.r, quad=cfg.quad))
    kappa = min(2.0 * cfg.ctx.hurst, 1.0)
    ratio = cfg.r / cfg.r_tilde
    frac = Fraction(cfg.r_tilde)

    report = ExperimentReport(
        kind="union_bound_ledger",
        config={
            "hurst": cfg.ctx.hurst,
            "r": cfg.r,
            "r_tilde": cfg.r_tilde,
            "alpha": cfg.alpha,
            "p": cfg.p,
            "c_a": c_a,
            "c_b": c_b,
        },
        seed=cfg.seed,
    )
    depths, multipliers, remainders, assembled = [], [], [], []
    for n, value in items:
        mult = -(-frac.denominator**n // frac.numerator**n)  # ceil(r_tilde^-n)
        rem = n * c_b * math.exp(-c_a * ratio ** (kappa * n))
        try:
            total = float(mult) * (value + rem)
        except OverflowError:
            total = math.inf
        depths.append(n)
        multipliers.append(int(mult))
        remainders.append(rem)
        assembled.append(total)
    report.trends["n"] = depths
    report.trends["multiplier"] = multipliers
    report.trends["p_an_prime"] = [v for _, v in items]
    report.trends["remainder"] = remainders
    report.trends["assembled"] = assembled
    crossover = None
    for k in range(1, len(remainders)):
        if remainders[k] < remainders[k - 1]:
            crossover = depths[k]
            break
    report.trends["remainder_crossover_n"] = [crossover]
    return report
