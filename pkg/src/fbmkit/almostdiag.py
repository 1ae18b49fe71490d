"""Determinant and inverse-entry bounds for nearly diagonal matrices.

Setting: a real n x n matrix ``A`` with unit diagonal whose off-diagonal
entries decay geometrically, ``|a_ij| <= eps^|i-j|``.  Writing
``H := I - A`` (zero diagonal, same decay), the bounds are

    det A >= exp(-n * phi_g(eps) * eps^2),
    |b_ij|      <= 2^(|i-j|-1) * (phi_h(eps) * eps)^|i-j|    (i != j),
    |b_ii - 1|  <= 2 * phi_i(eps) * eps^2,

where ``B = A^(-1) = ((b_ij))`` and each ``phi_*`` is a "quasi-one" factor:
finite on an explicit radius, >= 1, and tending to 1 as eps -> 0.

All the series behind the phi factors have closed forms (geometric series,
central-binomial series and their derivatives); the closed forms are
implemented directly so the checks are sharp.  Outside its convergence
radius each factor is +inf.

Entry bounds for powers of ``H`` come from a walk-counting argument: any
contribution to ``(H^k)_ij`` is a k-step walk on Z from i to j with nonzero
steps, weighted by eps^(total step length).  A walk with total length n is
coded injectively by a word of n symbols over {p, P, m, M}: each step of
size d > 0 becomes (d-1) letters 'p' then one terminal 'P' (and 'm'/'M' for
negative steps).  Counting admissible words yields

    #{k-step walks 0 -> z, total length n}
        <= [2 | n - z] * C(n, (n-|z|)/2) * C(n-1, k-1),

and summing over n = |z| + 2m gives the truncated-series entry bound
``hk_entry_bound``.  ``valid_tuple_count`` computes the walk count exactly
(big-integer dynamic programming) so the coding bound can be verified
exhaustively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rng import parallel_map

__all__ = [
    "PhiFunctions",
    "phi_functions",
    "phi_n_of",
    "MatrixBoundsReport",
    "matrix_bounds_check",
    "random_hypothesis_matrix",
    "adversarial_matrices",
    "matrix_batch_check",
    "BatchReport",
    "hk_entry_bound",
    "valid_tuple_count",
    "tuple_count_bound",
    "word_code",
    "word_decode",
]

_INF = float("inf")


@dataclass(frozen=True)
class PhiFunctions:
    """Quasi-one correction factors at a given eps (entries may be +inf)."""

    eps: float
    phi_m: float
    phi_g: float
    phi_n: float
    phi_h: float
    phi_i: float
    phi_j: float
    phi_k: float

    def all_finite(self) -> bool:
        vals = (self.phi_m, self.phi_g, self.phi_n, self.phi_h, self.phi_i, self.phi_j, self.phi_k)
        return all(math.isfinite(v) for v in vals)


def phi_n_of(x: float) -> float:
    """exp(2x) + 4 e x / (1 - 4 e x)  for 4 e x < 1, else +inf.

    Closed form of 1 + sum_{m>=1} ((2x)^m + (4 e x)^m * m^m e^(-m) ...) --
    concretely it upper-bounds sum_{m>=0} C(z + 2m, m) x^m uniformly via
    (value)^z for every z >= 1, using (z + 2m)^m <= (2z)^m + (4m)^m and
    m^m / m! <= e^m.
    """
    if x < 0.0:
        raise ValidationError(f"phi_n argument must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    t = 4.0 * math.e * x
    if t >= 1.0:
        return _INF
    return math.exp(2.0 * x) + t / (1.0 - t)


def _phi_m(eps: float) -> float:
    # 1 + (2 eps^2)^(-1) * sum_{m>=2} (2m-1) (2 eps)^(2m)
    #   = 1 + 8 eps^2 (3 - 4 eps^2) / (1 - 4 eps^2)^2,  radius eps < 1/2.
    if eps >= 0.5:
        return _INF
    e2 = eps * eps
    return 1.0 + 8.0 * e2 * (3.0 - 4.0 * e2) / (1.0 - 4.0 * e2) ** 2


def _phi_g(eps: float, phi_m: float) -> float:
    # phi_m + eps^(-2) * sum_{k>=3} y^k / k,  y = 2 eps / (1 - eps) < 1
    # (i.e. eps < 1/3);  sum_{k>=3} y^k / k = -log(1-y) - y - y^2/2.
    if eps >= 1.0 / 3.0 or not math.isfinite(phi_m):
        return _INF
    y = 2.0 * eps / (1.0 - eps)
    return phi_m + (-math.log1p(-y) - y - y * y / 2.0) / (eps * eps)


def _phi_i(eps: float, phi_m: float) -> float:
    # The diagonal analogue of the off-diagonal series: the k = 1 walk term
    # vanishes (zero diagonal of H) and the k = 2 term is the phi_m piece;
    # the k >= 3 terms sum exactly to
    #     sum_{m>=2} C(2m, m) (2^(2m-1) - 2m) eps^(2m)
    #   = (1/2) [ (1-16 eps^2)^(-1/2) - 1 - 8 eps^2 ]
    #     - 4 eps^2 [ (1-4 eps^2)^(-3/2) - 1 ],
    # using sum C(2m,m) x^m = (1-4x)^(-1/2) and
    # sum C(2m,m) m x^m = 2x (1-4x)^(-3/2).  Radius eps < 1/4.
    if eps >= 0.25 or not math.isfinite(phi_m):
        return _INF
    e2 = eps * eps
    head = 0.5 * ((1.0 - 16.0 * e2) ** (-0.5) - 1.0 - 8.0 * e2)
    deriv = 4.0 * e2 * ((1.0 - 4.0 * e2) ** (-1.5) - 1.0)
    return phi_m + (head - deriv) / (2.0 * e2)


def phi_functions(eps: float) -> PhiFunctions:
    """All quasi-one factors at ``eps`` (entries +inf outside their radius).

    Radii: phi_m needs eps < 1/2; phi_g needs eps < 1/3; phi_h = phi_n(4 eps^2)
    needs 16 e eps^2 < 1; phi_i needs eps < 1/4; phi_k additionally needs
    2 phi_h eps < 1 and 1 - 2 phi_i eps^2 - 2 phi_h eps / (1 - 2 phi_h eps) > 0.
    """
    eps = float(eps)
    if eps <= 0.0:
        raise ValidationError(f"eps must be positive, got {eps}")
    phi_m = _phi_m(eps)
    phi_g = _phi_g(eps, phi_m)
    phi_n = phi_n_of(4.0 * eps * eps)
    phi_h = phi_n
    phi_i = _phi_i(eps, phi_m)
    phi_j = math.exp(phi_g * eps * eps) if math.isfinite(phi_g) else _INF
    phi_k = _INF
    if math.isfinite(phi_h) and math.isfinite(phi_i):
        t = 2.0 * phi_h * eps
        if t < 1.0:
            denom = 1.0 - 2.0 * phi_i * eps * eps - t / (1.0 - t)
            if denom > 0.0:
                phi_k = 1.0 / denom
    return PhiFunctions(
        eps=eps, phi_m=phi_m, phi_g=phi_g, phi_n=phi_n,
        phi_h=phi_h, phi_i=phi_i, phi_j=phi_j, phi_k=phi_k,
    )


# ---------------------------------------------------------------------------
# Matrix bound verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatrixBoundsReport:
    """Outcome of checking one matrix against the three bounds."""

    n: int
    eps: float
    det_value: float
    det_bound: float
    det_margin: float
    offdiag_margin: float
    diag_margin: float
    norm1_h: float
    norm1_bound: float
    det_ok: bool
    inverse_ok: bool
    slack: float

    def all_ok(self) -> bool:
        return self.det_ok and self.inverse_ok


def _validate_hypothesis(matrix: np.ndarray, eps: float) -> np.ndarray:
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    idx = np.arange(n)
    bad_diag = np.abs(a[idx, idx] - 1.0) > 1.0e-12
    if np.any(bad_diag):
        offenders = [(int(i), float(a[i, i])) for i in idx[bad_diag][:5]]
        raise ValidationError(f"diagonal entries must equal 1; offenders (i, a_ii): {offenders}")
    lag = np.abs(idx[:, None] - idx[None, :])
    limit = eps ** lag.astype(float)
    over = np.abs(a) > limit * (1.0 + 1.0e-12)
    np.fill_diagonal(over, False)
    if np.any(over):
        where = np.argwhere(over)[:5]
        offenders = [
            (int(i), int(j), float(a[i, j]), float(limit[i, j])) for i, j in where
        ]
        raise ValidationError(
            f"entries exceed eps^|i-j| envelope; offenders (i, j, a_ij, limit): {offenders}"
        )
    return a


def matrix_bounds_check(matrix: np.ndarray, eps: float, *, slack: float = 1.0e-9) -> MatrixBoundsReport:
    """Verify the determinant and inverse-entry bounds on one matrix.

    The matrix must have unit diagonal and satisfy |a_ij| <= eps^|i-j|
    (checked, offending entries reported).  The inequalities are exact
    mathematical claims; ``slack`` only absorbs floating-point roundoff.
    """
    eps = float(eps)
    if eps <= 0.0:
        raise ValidationError(f"eps must be positive, got {eps}")
    a = _validate_hypothesis(matrix, eps)
    n = a.shape[0]
    phis = phi_functions(eps)
    if not (math.isfinite(phis.phi_g) and math.isfinite(phis.phi_h) and math.isfinite(phis.phi_i)):
        raise ValidationError(
            f"phi factors are infinite at eps={eps}; bounds require eps < 1/4 "
            "and 16*e*eps^2 < 1"
        )

    sign, logdet = np.linalg.slogdet(a)
    det_value = float(sign * np.exp(logdet))
    det_bound = float(np.exp(-n * phis.phi_g * eps * eps))
    det_margin = det_value - det_bound

    b = np.linalg.inv(a)
    idx = np.arange(n)
    lag = np.abs(idx[:, None] - idx[None, :]).astype(float)
    off_bound = 0.5 * (2.0 * phis.phi_h * eps) ** lag
    off_gap = off_bound - np.abs(b)
    np.fill_diagonal(off_gap, np.inf)
    offdiag_margin = float(off_gap.min()) if n > 1 else float("inf")
    diag_margin = float((2.0 * phis.phi_i * eps * eps - np.abs(np.diag(b) - 1.0)).min())

    h = np.eye(n) - a
    norm1_h = float(np.abs(h).sum(axis=0).max())
    norm1_bound = 2.0 * eps / (1.0 - eps) if eps < 1.0 else float("inf")

    return MatrixBoundsReport(
        n=n,
        eps=eps,
        det_value=det_value,
        det_bound=det_bound,
        det_margin=det_margin,
        offdiag_margin=offdiag_margin,
        diag_margin=diag_margin,
        norm1_h=norm1_h,
        norm1_bound=norm1_bound,
        det_ok=bool(det_margin >= -slack),
        inverse_ok=bool(offdiag_margin >= -slack and diag_margin >= -slack),
        slack=slack,
    )


def random_hypothesis_matrix(n: int, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-diagonal matrix with a_ij uniform in [-eps^|i-j|, eps^|i-j|]."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    idx = np.arange(n)
    limit = float(eps) ** np.abs(idx[:, None] - idx[None, :]).astype(float)
    a = rng.uniform(-1.0, 1.0, size=(n, n)) * limit
    np.fill_diagonal(a, 1.0)
    return a


def adversarial_matrices(n: int, eps: float) -> list[np.ndarray]:
    """Three extreme instances saturating |a_ij| = eps^|i-j| exactly.

    All-positive entries, alternating sign by lag, and alternating sign by
    index parity; each has unit diagonal.
    """
    idx = np.arange(n)
    lag = np.abs(idx[:, None] - idx[None, :]).astype(float)
    env = float(eps) ** lag
    signs_lag = (-1.0) ** lag
    signs_par = (-1.0) ** (idx[:, None] + idx[None, :]).astype(float)
    out = []
    for s in (np.ones_like(env), signs_lag, signs_par):
        a = env * s
        np.fill_diagonal(a, 1.0)
        out.append(a)
    return out


@dataclass(frozen=True)
class BatchReport:
    """Aggregate of matrix_bounds_check over a batch of instances."""

    n: int
    eps: float
    checked: int
    violations: int
    min_det_margin: float
    min_offdiag_margin: float
    min_diag_margin: float
    max_norm1_h: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "eps": self.eps,
            "checked": self.checked,
            "violations": self.violations,
            "min_det_margin": self.min_det_margin,
            "min_offdiag_margin": self.min_offdiag_margin,
            "min_diag_margin": self.min_diag_margin,
            "max_norm1_h": self.max_norm1_h,
        }


def matrix_batch_check(
    n: int,
    eps: float,
    trials: int,
    rng: np.random.Generator,
    *,
    include_adversarial: bool = True,
    slack: float = 1.0e-9,
    threads: int = 1,
) -> BatchReport:
    """Check ``trials`` random instances (plus adversarial ones) at (n, eps).

    Matrices are generated sequentially from ``rng`` so results do not depend
    on the thread count; the pure checks then run in parallel.
    """
    if trials < 0:
        raise ValidationError(f"trials must be >= 0, got {trials}")
    mats = [random_hypothesis_matrix(n, eps, rng) for _ in range(trials)]
    if include_adversarial:
        mats.extend(adversarial_matrices(n, eps))
    reports = parallel_map(lambda m: matrix_bounds_check(m, eps, slack=slack), mats, threads=threads)
    violations = sum(0 if r.all_ok() else 1 for r in reports)
    return BatchReport(
        n=n,
        eps=eps,
        checked=len(reports),
        violations=violations,
        min_det_margin=min(r.det_margin for r in reports),
        min_offdiag_margin=min(r.offdiag_margin for r in reports),
        min_diag_margin=min(r.diag_margin for r in reports),
        max_norm1_h=max(r.norm1_h for r in reports),
    )


# ---------------------------------------------------------------------------
# Walk counting and the coding bound
# ---------------------------------------------------------------------------


def hk_entry_bound(z: int, k: int, eps: float, m_max: int = 60) -> float:
    """Truncated series bound on |(H^k)_ij| for |i - j| = |z|.

    sum_{m=0}^{m_max} C(|z|+2m, m) * C(|z|+2m-1, k-1) * eps^(|z|+2m);
    terms with |z| + 2m < 1 vanish (a k >= 1 step walk has length >= 1).
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if m_max < 0:
        raise ValidationError(f"m_max must be >= 0, got {m_max}")
    eps = float(eps)
    if eps <= 0.0:
        raise ValidationError(f"eps must be positive, got {eps}")
    az = abs(int(z))
    total = 0.0
    for m in range(m_max + 1):
        length = az + 2 * m
        if length < 1 or k > length:
            continue
        total += math.comb(length, m) * math.comb(length - 1, k - 1) * eps**length
    return total


def valid_tuple_count(z: int, k: int, n: int) -> int:
    """Exact number of k-step walks on Z from 0 to z with total |step| sum n.

    Steps are nonzero integers; counted exactly with big-integer dynamic
    programming over (position, spent-length) states.
    """
    z, k, n = int(z), int(k), int(n)
    if n < 0 or k < 0:
        raise ValidationError(f"need n >= 0 and k >= 0, got n={n}, k={k}")
    if n > 64 or k > 32:
        raise ValidationError(f"sizes too large for exact enumeration: k={k}, n={n}")
    if k == 0:
        return 1 if (z == 0 and n == 0) else 0
    states: dict[tuple[int, int], int] = {(0, 0): 1}
    for _ in range(k):
        nxt: dict[tuple[int, int], int] = {}
        for (pos, spent), cnt in states.items():
            room = n - spent
            for size in range(1, room + 1):
                for step in (size, -size):
                    key = (pos + step, spent + size)
                    nxt[key] = nxt.get(key, 0) + cnt
        states = nxt
    return states.get((z, n), 0)


def tuple_count_bound(z: int, k: int, n: int) -> int:
    """Coding bound [2 | n-z] * C(n, (n-|z|)/2) * C(n-1, k-1) on the walk count."""
    z, k, n = int(z), int(k), int(n)
    if n < 1 or k < 1:
        raise ValidationError(f"bound defined for n >= 1 and k >= 1, got n={n}, k={k}")
    az = abs(z)
    if az > n or (n - az) % 2 != 0:
        return 0
    return math.comb(n, (n - az) // 2) * math.comb(n - 1, k - 1)


def word_code(walk) -> str:
    """Injective coding of a walk (s_0=0, s_1, ..., s_k) as a word over pPmM.

    Each step of size d writes |d|-1 plain letters ('p' for up, 'm' for down)
    followed by one terminal letter ('P' / 'M'); word length equals the total
    step length.
    """
    walk = [int(v) for v in walk]
    if len(walk) < 2:
        raise ValidationError("walk must have at least one step")
    if walk[0] != 0:
        raise ValidationError(f"walk must start at 0, got {walk[0]}")
    out: list[str] = []
    for prev, cur in zip(walk[:-1], walk[1:]):
        d = cur - prev
        if d == 0:
            raise ValidationError(f"zero step at position {prev} is not allowed")
        plain, term = ("p", "P") if d > 0 else ("m", "M")
        out.append(plain * (abs(d) - 1) + term)
    return "".join(out)


def word_decode(word: str, start: int = 0) -> tuple[int, ...]:
    """Inverse of word_code: rebuild the walk, validating word structure."""
    walk = [int(start)]
    run = 0
    run_sign = 0
    for ch in word:
        if ch not in "pPmM":
            raise ValidationError(f"invalid symbol {ch!r}; expected one of p, P, m, M")
        sign = 1 if ch in "pP" else -1
        if run and sign != run_sign:
            raise ValidationError("sign change inside a step run")
        run += 1
        run_sign = sign
        if ch in "PM":
            walk.append(walk[-1] + sign * run)
            run = 0
            run_sign = 0
    if run:
        raise ValidationError("word ends inside a step (missing terminal symbol)")
    return tuple(walk)
