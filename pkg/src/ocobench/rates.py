"""Minimax rate catalog, optimal diagonal preconditioners, and small-d
brute-force saddle verification.

The central quantity is the support value

    S = sup { <theta, g> : theta in Theta, g in QHull(unit gamma-ball) },

whose n-normalized form S / sqrt(n) upper bounds the minimax risk, with
matching lower bounds (explicit constants where available). The optimal
diagonal preconditioner lambda* attains S / sqrt(n) in the quadratic
relaxation

    (1 / 2n) inf_{lam > 0} [ sup_theta sum_j lam_j theta_j^2
                             + n sup_g sum_j g_j^2 / lam_j ],

which ``saddle_bruteforce`` evaluates directly on a grid for d <= 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    INF,
    NormDescriptor,
    SetDescriptor,
    _inv,
    _pnorm,
    _theta_params,
    conjugate_exponent,
    dual_attainment,
    qhull,
    resolve_dimension,
    support_value,
)

#: sum_{j >= 1} 1 / j^2; the l2 mass of harmonic weights beta_j = j
ZETA_2 = math.pi ** 2 / 6.0

_LOG3 = math.log(3.0)


@dataclass(frozen=True)
class RateBound:
    """Two-sided minimax rate. When ``constants_included`` is False the
    lower/upper pair states the rate shape with unit constants only."""

    lower: float
    upper: float
    regime: str
    constants_included: bool

    def __post_init__(self):
        if not (self.lower <= self.upper * (1.0 + 1e-12)):
            raise ValueError("lower bound exceeds upper bound")


def _is_unweighted_lp_ball(s: SetDescriptor) -> bool:
    return s.kind == "lp_ball"


def _is_unweighted_lp(norm: NormDescriptor) -> bool:
    return norm.kind == "lp"


def _exp_close(x: float, y: float) -> bool:
    if x == INF or y == INF:
        return x == y
    return abs(x - y) <= 1e-9 * max(1.0, abs(x), abs(y))


def minimax_rate(s: SetDescriptor, norm: NormDescriptor, d: int,
                 n: int) -> RateBound:
    """Two-sided minimax risk rate for stochastic first-order optimization
    over the set ``s`` with gamma-bounded subgradients, horizon ``n``.

    Dispatch, first match wins:

    1. unit-constant dual pairs: unweighted l_p ball, p in [1, 2), against
       the conjugate-exponent gradient norm; logarithmic regime for
       p <= 1 + 1/log(2d), power regime otherwise.
    2. unweighted l_p ball with p >= 2 against any unweighted l_r: the
       exponent-matched rate min(1, d^{1/2-1/p} d^{max(0, 1/2-1/r)} / sqrt(n))
       (unit constants).
    3. quadratically convex set against a quadratically convex norm
       (r >= 2): exact support-value bounds with explicit constants,
       lower = S / (8 sqrt(log 3) sqrt(n)), upper = S / sqrt(n).
    4. quadratically convex set against r in [1, 2): the quadratic-hull
       bounds, lower = S / (16 sqrt(n)) (valid for n >= 2 d), upper =
       S / sqrt(n), with S computed through the hull.

    Raises ValueError for combinations outside the catalog.
    """
    if d < 1 or n < 1:
        raise ValueError("d and n must be >= 1")
    d = int(d)
    n = int(n)

    if _is_unweighted_lp_ball(s) and _is_unweighted_lp(norm) and s.exponent < 2.0:
        p, rho = s.exponent, s.radius
        if _exp_close(norm.exponent, conjugate_exponent(p)):
            log2d = math.log(2.0 * d)
            if p <= 1.0 + 1.0 / log2d:
                rate = rho * min(1.0, math.sqrt(log2d / n))
                return RateBound(rate, rate, "dual_pair_log", False)
            rate = rho * min(1.0, math.sqrt(1.0 / (n * (p - 1.0))))
            return RateBound(rate, rate, "dual_pair_power", False)

    if _is_unweighted_lp_ball(s) and _is_unweighted_lp(norm) and s.exponent >= 2.0:
        p, rho = s.exponent, s.radius
        r = norm.exponent
        expo = (0.5 - _inv(p)) + max(0.0, 0.5 - _inv(r))
        rate = rho * min(1.0, d ** expo / math.sqrt(n))
        regime = "sparse_gradients" if r < 2.0 else "dense_gradients"
        return RateBound(rate, rate, regime, False)

    set_qc = (s.kind == "box") or (s.exponent is not None and s.exponent >= 2.0)
    if not set_qc:
        raise ValueError(
            "unsupported descriptor combination; for non-quadratically-convex "
            "sets outside the dual-pair catalog use ksparse_lower and "
            "hull_upper_rate for one-sided bounds"
        )
    S = support_value(s, norm, d)
    upper = S / math.sqrt(n)
    if norm.exponent >= 2.0:
        lower = S / (8.0 * math.sqrt(_LOG3) * math.sqrt(n))
        return RateBound(lower, upper, "qc_qc", True)
    regime = "qc_qhull"
    if n < 2 * d:
        regime += " (lower constant valid for n >= 2d)"
    return RateBound(S / (16.0 * math.sqrt(n)), upper, regime, True)


def hull_upper_rate(s: SetDescriptor, norm: NormDescriptor, d: int, n: int) -> float:
    """One-sided upper rate S / sqrt(n) through the quadratic hull; valid for
    every catalog set, quadratically convex or not."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return support_value(s, norm, d) / math.sqrt(n)


def ksparse_lower(s: SetDescriptor, norm: NormDescriptor, d: int, n: int,
                  k: int) -> float:
    """Sparse-subfamily lower rate for non-quadratically-convex sets:

        (1 / (8 sqrt(n log 3))) (1 - k / (n log 3))_+
            * sup { ||theta / gamma(e.)||_2 : theta in Theta, k-sparse }.

    The k-sparse sup has a closed form: with Theta in canonical form
    {||omega (.) theta||_pi <= rho} and c_j = 1 / (omega_j gamma(e_j)), it is
    rho ||top-k(c)||_t for 1/t = 1 - 1/pi - 1/2 when pi >= 2, and
    rho max_j c_j (1-sparse attainment) when pi < 2.
    """
    d = resolve_dimension(s, norm, d=d)
    if not (1 <= k <= d):
        raise ValueError("k must lie in [1, d]")
    if n < 1:
        raise ValueError("n must be >= 1")
    omega, pi, rho = _theta_params(s, d)
    gamma_e = norm.unit_vector_values(d)
    c = 1.0 / (omega * gamma_e)
    inv_t = 1.0 - _inv(pi) - 0.5
    if inv_t <= 0.0:
        sup_k = rho * float(np.max(c))
    else:
        top = np.sort(c)[::-1][:k]
        sup_k = rho * _pnorm(top, 1.0 / inv_t)
    slack = max(0.0, 1.0 - k / (n * _LOG3))
    return sup_k * slack / (8.0 * math.sqrt(n * _LOG3))


# ---------------------------------------------------------------------------
# optimal diagonal preconditioner
# ---------------------------------------------------------------------------

def optimal_lambda(s: SetDescriptor, norm: NormDescriptor, n: int,
                   d: int | None = None) -> np.ndarray:
    """The diagonal weights lambda* attaining the quadratic relaxation value
    S / sqrt(n): lambda*_j = sqrt(n) |g*_j| / |theta*_j| at the support-value
    saddle point (theta*, g*).

    Coordinates the saddle point leaves at zero are frozen and reported as
    +inf (their step size is zero). Requires a quadratically convex set.
    """
    d = resolve_dimension(s, norm, d=d)
    if n < 1:
        raise ValueError("n must be >= 1")
    omega, pi, rho = _theta_params(s, d)
    if pi < 2.0:
        raise ValueError("optimal_lambda requires a quadratically convex set")
    hull = qhull(norm)
    beta = hull.unit_vector_values(d)
    sexp = hull.exponent
    c = 1.0 / (omega * beta)
    if pi == INF:
        y = np.ones(d)
    else:
        inv_t = 1.0 - _inv(sexp) - _inv(pi)
        if inv_t <= 0.0:
            # pi = s = 2: mass spreads over the tied extreme coordinates
            tied = c >= np.max(c) * (1.0 - 1e-12)
            y = np.where(tied, 1.0 / math.sqrt(int(np.sum(tied))), 0.0)
        else:
            t = 1.0 / inv_t
            w = c ** t
            y = (w / np.sum(w)) ** _inv(pi)
    theta_star = rho * y / omega
    g_star = dual_attainment(beta, sexp, theta_star)
    lam = np.full(d, np.inf)
    active = np.abs(theta_star) > 0.0
    lam[active] = math.sqrt(n) * np.abs(g_star[active]) / np.abs(theta_star[active])
    return lam


def diag_bound_value(s: SetDescriptor, norm: NormDescriptor, lam, n: int,
                     d: int | None = None) -> float:
    """The quadratic-relaxation objective at a given diagonal lambda:

        (1 / 2n) [ sup_theta sum_j lam_j theta_j^2
                   + n sup_g sum_j g_j^2 / lam_j ],

    both sups in closed form (the gradient ball taken through its quadratic
    hull). Coordinates with lam_j = +inf are treated as frozen: theta_j = 0
    on the sup side, g_j contributing nothing on the other.
    """
    d = resolve_dimension(s, norm, d=d)
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (d,):
        raise ValueError(f"lam must have shape ({d},)")
    if np.any(lam <= 0.0) or np.any(np.isnan(lam)):
        raise ValueError("lam must be strictly positive (inf allowed)")
    omega, pi, rho = _theta_params(s, d)
    if pi < 2.0:
        raise ValueError("diag_bound_value requires a quadratically convex set")
    hull = qhull(norm)
    beta = hull.unit_vector_values(d)
    sexp = hull.exponent
    mask = np.isfinite(lam)
    if not np.any(mask):
        raise ValueError("all coordinates frozen")
    # sup_theta sum lam theta^2 = rho^2 || (lam / omega^2)|_active ||_{(pi/2)*}
    a_vec = lam[mask] / omega[mask] ** 2
    A = rho ** 2 * _pnorm(a_vec, conjugate_exponent(pi / 2.0 if pi != INF else INF))
    b_vec = 1.0 / (lam[mask] * beta[mask] ** 2)
    B = n * _pnorm(b_vec, conjugate_exponent(sexp / 2.0 if sexp != INF else INF))
    return (A + B) / (2.0 * n)


# ---------------------------------------------------------------------------
# brute-force saddle bracket (d <= 3)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SaddleBracket:
    """Grid estimates of the quadratic relaxation, rate normalized.

    ``inf_sup``: grid value of (1/2n) inf_lam [sup_theta + n sup_g] (an
    outer minimization over a refined lambda lattice). ``sup_inf``: grid
    value of sup_{theta, g} sum_j |theta_j g_j| / sqrt(n), using the exact
    inner infimum over lambda. For quadratically convex pairs the two agree
    with the support-value rate up to grid resolution.
    """

    inf_sup: float
    sup_inf: float


def _axis_extents(omega: np.ndarray, rho: float) -> np.ndarray:
    # per-coordinate maximum |theta_j| inside the canonical set
    return rho / omega


def _grid_points(extents: np.ndarray, res: float) -> np.ndarray:
    axes = [np.linspace(-e, e, 2 * int(math.ceil(1.0 / res)) + 1) for e in extents]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _member_mask(pts: np.ndarray, omega: np.ndarray, pi: float, rho: float,
                 lo: float = 0.0) -> np.ndarray:
    scaled = np.abs(pts) * omega
    if pi == INF:
        vals = np.max(scaled, axis=1)
    else:
        vals = np.sum(scaled ** pi, axis=1) ** (1.0 / pi)
    keep = vals <= rho * (1.0 + 1e-12)
    if lo > 0.0:
        keep &= vals >= rho * lo
    return keep


def saddle_bruteforce(s: SetDescriptor, norm: NormDescriptor, n: int,
                      grid_resolution: float = 0.05,
                      d: int | None = None) -> SaddleBracket:
    """Verify the quadratic relaxation numerically for d <= 3.

    Grids theta over the set and g over the quadratic hull of the unit
    gamma-ball at relative spacing ``grid_resolution``, then (a) minimizes
    sup_theta + n sup_g over a refined log-lattice of diagonal lambda, and
    (b) maximizes the exact inner infimum over boundary-shell pairs. Both
    are returned rate normalized (divided by 2n, resp. sqrt(n)).
    """
    d = resolve_dimension(s, norm, d=d)
    if d > 3:
        raise ValueError("saddle_bruteforce supports d <= 3 only")
    if not (0.001 <= grid_resolution <= 0.5):
        raise ValueError("grid_resolution must lie in [0.001, 0.5]")
    if n < 1:
        raise ValueError("n must be >= 1")
    omega, pi, rho = _theta_params(s, d)
    if pi < 2.0:
        raise ValueError("saddle_bruteforce requires a quadratically convex set")
    hull = qhull(norm)
    beta = hull.unit_vector_values(d)
    sexp = hull.exponent

    tpts = _grid_points(_axis_extents(omega, rho), grid_resolution)
    tpts = tpts[_member_mask(tpts, omega, pi, rho)]
    gpts = _grid_points(1.0 / beta, grid_resolution)
    gpts = gpts[_member_mask(gpts, beta, sexp, 1.0)]

    T2 = tpts ** 2
    G2 = gpts ** 2

    # outer minimization over lambda: coordinatewise log-lattice, refined
    centers = np.log10(math.sqrt(n) * omega / (rho * beta))
    span = 4.0
    k_axis = 33 if d <= 2 else 13
    best_lam, best_val = None, math.inf
    for _ in range(3):
        axes = [np.logspace(c - span, c + span, k_axis) for c in centers]
        mesh = np.meshgrid(*axes, indexing="ij")
        lams = np.stack([m.ravel() for m in mesh], axis=1)
        for start in range(0, lams.shape[0], 256):
            chunk = lams[start:start + 256]
            A = np.max(T2 @ chunk.T, axis=0)
            B = n * np.max(G2 @ (1.0 / chunk).T, axis=0)
            vals = A + B
            idx = int(np.argmin(vals))
            if vals[idx] < best_val:
                best_val = float(vals[idx])
                best_lam = chunk[idx]
        centers = np.log10(best_lam)
        span = 2.0 * span / (k_axis - 1)  # zoom to one lattice cell
    inf_sup = best_val / (2.0 * n)

    # exact inner infimum on boundary shells: extreme points suffice because
    # sum_j |theta_j g_j| is convex in each argument
    shell = 1.0 - 2.0 * grid_resolution
    tb = np.abs(tpts[_member_mask(tpts, omega, pi, rho, lo=shell)])
    gb = np.abs(gpts[_member_mask(gpts, beta, sexp, 1.0, lo=shell)])
    best = 0.0
    for start in range(0, tb.shape[0], 1024):
        M = tb[start:start + 1024] @ gb.T
        best = max(best, float(np.max(M)))
    sup_inf = best / math.sqrt(n)
    return SaddleBracket(inf_sup=inf_sup, sup_inf=sup_inf)


# ---------------------------------------------------------------------------
# packing and information helpers
# ---------------------------------------------------------------------------

def gv_packing(d: int, seed: int = 0) -> np.ndarray:
    """A set of sign vectors with pairwise l1 distance >= d/2 and size at
    least ceil(e^{d/8}).

    For d <= 16 the greedy scan is exhaustive in lexicographic order (bit j
    of the integer index gives coordinate j), hence deterministic; larger d
    uses seeded random candidates with up to 10 seed retries before raising
    RuntimeError. Keep criterion: l1 distance 2 * Hamming >= d/2, i.e.
    dot(u, v) <= d/2.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    target = int(math.ceil(math.exp(d / 8.0)))
    half = d / 2.0
    if d <= 16:
        cand = ((np.arange(2 ** d, dtype=np.int64)[:, None]
                 >> np.arange(d, dtype=np.int64)) & 1) * 2.0 - 1.0
        kept = _greedy_keep(cand, half, limit=None)
        return kept
    for attempt in range(10):
        rng = np.random.Generator(np.random.Philox(key=seed + attempt))
        kept = np.empty((0, d))
        for _ in range(200):
            cand = rng.integers(0, 2, size=(1024, d)).astype(np.float64) * 2.0 - 1.0
            kept = np.vstack([kept, _greedy_keep(cand, half, limit=target,
                                                 against=kept)])
            if kept.shape[0] >= target:
                return kept[:max(target, kept.shape[0])]
        # fall through: retry with the next seed
    raise RuntimeError(f"gv_packing failed to reach size {target} at d = {d}")


def _greedy_keep(cand: np.ndarray, half: float, limit: int | None,
                 against: np.ndarray | None = None) -> np.ndarray:
    d = cand.shape[1]
    buf = np.empty((256, d))
    m = 0
    if against is not None and against.shape[0]:
        base = against
    else:
        base = None
    for row in cand:
        ok = True
        if base is not None and np.max(base @ row) > half:
            ok = False
        if ok and m and np.max(buf[:m] @ row) > half:
            ok = False
        if ok:
            if m == buf.shape[0]:
                buf = np.vstack([buf, np.empty_like(buf)])
            buf[m] = row
            m += 1
            if limit is not None and base is not None \
                    and m + base.shape[0] >= limit:
                break
    return buf[:m].copy()


def separation_and_kl(p: float, d: int, delta: float,
                      hamming_distance: int) -> tuple[float, float]:
    """Optimization-distance and divergence ingredients for sign packings
    under the single-coordinate sampling design.

    Returns (sep, kl):

    * sep = 2 (delta / d) (d^{1/p*} - (d - h)^{1/p*}), the optimality-gap
      separation between two l_p-ball problems whose sign vectors differ in
      h coordinates (for p = 1, p* = inf, the convention x^{1/inf} = 1 for
      x > 0 and 0 for x = 0 applies).
    * kl = delta log((1 + delta) / (1 - delta)), the divergence between the
      two sign-bias laws of one observed coordinate; the design samples
      coordinate j with probability 1/d, so n observations accumulate
      (n / d) kl per differing coordinate. kl <= 3 delta^2 on [0, 1/2].
    """
    if not (1.0 <= p <= 2.0):
        raise ValueError("p must lie in [1, 2]")
    if not (0 <= hamming_distance <= d):
        raise ValueError("hamming_distance must lie in [0, d]")
    if not (0.0 <= delta <= 0.5):
        raise ValueError("delta must lie in [0, 1/2]")
    pstar = conjugate_exponent(p)

    def frac_power(x: float) -> float:
        if pstar == INF:
            return 1.0 if x > 0 else 0.0
        return x ** (1.0 / pstar)

    sep = 2.0 * (delta / d) * (frac_power(float(d))
                               - frac_power(float(d - hamming_distance)))
    kl = 0.0 if delta == 0.0 else delta * math.log((1.0 + delta) / (1.0 - delta))
    return sep, kl
