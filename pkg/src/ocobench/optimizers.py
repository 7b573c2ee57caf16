"""First-order online optimizers with play-then-observe accounting.

Algorithms
----------
* ``OGD(alpha)``: projected online gradient descent, fixed step.
* ``DiagScaled(lam)``: gradient descent preconditioned by diag(lam)^{-1}
  (unit step absorbed into lam).
* ``FullEuclidean(A, alpha)``: descent preconditioned by a full SPD matrix.
* ``PNormMD(a, alpha)``: unconstrained mirror descent under the p-norm
  potential, a in (1, 2].
* ``DualAveraging(mirror_map, alpha, schedule)``: lazy mirror descent; with a
  fixed map and constant alpha its unconstrained trajectory coincides with
  mirror descent exactly, which the tests exploit as a trajectory oracle.
* ``AdaGradDiag(eta, eps)``: per-coordinate adaptive steps.

Accounting: at step i the optimizer plays its current iterate theta_i, pays
<g_i, theta_i>, and only then updates. Regret after n steps against a fixed
comparator theta is sum_i <g_i, theta_i - theta>.

Projection support is limited to the cases where Euclidean projection is
exact for the algorithm's implicit metric: box clipping for the diagonal
methods (OGD, DiagScaled, AdaGradDiag) and l2-ball rescaling for OGD. Other
combinations raise ValueError at construction.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import mirror_maps as maps
from ._backend import kernels
from .geometry import (
    INF,
    NormDescriptor,
    SetDescriptor,
    _pnorm,
    as_vector,
    best_in_hindsight,
    conjugate_exponent,
    resolve_dimension,
)

_BOX_OK = ("OGD", "DiagScaled", "AdaGradDiag")
_L2_OK = ("OGD",)


def _check_projection(name: str, projection: SetDescriptor | None):
    if projection is None:
        return
    if projection.kind == "box" and name in _BOX_OK:
        return
    if projection.kind == "lp_ball" and projection.exponent == 2.0 and name in _L2_OK:
        return
    raise ValueError(
        f"{name} does not support projection onto {projection.kind}; "
        "only exact-metric projections are allowed"
    )


def _proj_args(projection: SetDescriptor | None):
    # (proj_kind, proj_radius, proj_a) in kernel encoding
    if projection is None:
        return 0, 0.0, None
    if projection.kind == "box":
        return 2, 0.0, projection.half_widths
    return 1, projection.radius, None


def _project_py(theta: np.ndarray, projection: SetDescriptor | None) -> np.ndarray:
    if projection is None:
        return theta
    if projection.kind == "box":
        a = projection.half_widths
        return np.minimum(np.maximum(theta, -a), a)
    nrm = float(np.sqrt(np.dot(theta, theta)))
    if nrm > projection.radius:
        return theta * (projection.radius / nrm)
    return theta


@dataclass(frozen=True, eq=False, kw_only=True)
class AlgorithmSpec(ABC):
    """Shared fields: start point (defaults to 0) and optional projection set."""

    theta0: np.ndarray | None = None
    projection: SetDescriptor | None = None

    def __post_init__(self):
        if self.theta0 is not None:
            object.__setattr__(self, "theta0", as_vector(self.theta0, name="theta0"))
        _check_projection(type(self).__name__, self.projection)
        self._validate()

    def _validate(self):
        pass

    @abstractmethod
    def _update(self, state: "OptimizerState", g: np.ndarray) -> tuple:
        """Return (theta_new, sq_sum_new) given the observed gradient."""

    def start_point(self, d: int) -> np.ndarray:
        if self.theta0 is None:
            return np.zeros(d)
        theta0 = as_vector(self.theta0, d, name="theta0")
        if self.projection is not None and not self.projection.contains(theta0):
            raise ValueError("theta0 lies outside the projection set")
        return theta0.copy()


@dataclass(frozen=True, eq=False)
class OGD(AlgorithmSpec):
    """theta <- P(theta - alpha g)."""

    alpha: float = 1.0

    def _validate(self):
        if not (self.alpha > 0.0):
            raise ValueError("alpha must be positive")

    def _update(self, state, g):
        return _project_py(state.theta - self.alpha * g, self.projection), state.sq_sum


@dataclass(frozen=True, eq=False)
class DiagScaled(AlgorithmSpec):
    """theta <- P(theta - g / lam), diagonally preconditioned unit-step descent.

    A lam entry of +inf freezes that coordinate at theta0 (zero step), which
    is how optimal preconditioners handle coordinates outside the active set.
    """

    lam: np.ndarray

    def _validate(self):
        lam = np.atleast_1d(np.asarray(self.lam, dtype=np.float64))
        if lam.ndim != 1 or lam.size < 1:
            raise ValueError("lam must be a 1-d vector")
        if np.any(np.isnan(lam)) or np.any(lam <= 0.0):
            raise ValueError("lam entries must be positive (+inf allowed)")
        object.__setattr__(self, "lam", lam)

    def _update(self, state, g):
        return _project_py(state.theta - g / self.lam, self.projection), state.sq_sum


@dataclass(frozen=True, eq=False)
class FullEuclidean(AlgorithmSpec):
    """theta <- theta - alpha A^{-1} g for a fixed SPD matrix A."""

    A: np.ndarray
    alpha: float = 1.0

    def _validate(self):
        if not (self.alpha > 0.0):
            raise ValueError("alpha must be positive")
        object.__setattr__(self, "_map", maps.FullEuclidean(self.A))
        object.__setattr__(self, "A", self._map.A)

    def _update(self, state, g):
        return state.theta - self.alpha * (self._map.A_inv @ g), state.sq_sum


@dataclass(frozen=True, eq=False)
class PNormMD(AlgorithmSpec):
    """Unconstrained mirror descent under the p-norm potential."""

    a: float
    alpha: float = 1.0

    def _validate(self):
        if not (self.alpha > 0.0):
            raise ValueError("alpha must be positive")
        object.__setattr__(self, "_map", maps.PNorm(self.a))

    def _update(self, state, g):
        z = self._map.grad_h(state.theta) - self.alpha * g
        return self._map.grad_h_star(z), state.sq_sum


@dataclass(frozen=True, eq=False)
class DualAveraging(AlgorithmSpec):
    """theta after k gradients: grad h*(grad h(theta0) - alpha_k sum_{l<=k} g_l).

    ``schedule(k)`` maps the number of observed gradients to alpha_k; when
    None the constant ``alpha`` is used throughout.
    """

    mirror_map: maps.MirrorMap
    alpha: float = 1.0
    schedule: Callable[[int], float] | None = None

    def _validate(self):
        if not isinstance(self.mirror_map, maps.MirrorMap):
            raise ValueError("mirror_map must be a MirrorMap instance")
        if not (self.alpha > 0.0):
            raise ValueError("alpha must be positive")

    def alpha_at(self, k: int) -> float:
        if self.schedule is None:
            return self.alpha
        val = float(self.schedule(k))
        if not (val > 0.0 and math.isfinite(val)):
            raise ValueError(f"schedule({k}) must be a positive finite step")
        return val

    def _update(self, state, g):
        z0 = self.mirror_map.grad_h(state.theta0_resolved)
        grad_sum = state.grad_sum + g
        theta = self.mirror_map.grad_h_star(z0 - self.alpha_at(state.k + 1) * grad_sum)
        return theta, state.sq_sum


@dataclass(frozen=True, eq=False)
class AdaGradDiag(AlgorithmSpec):
    """S += g^2; theta_j <- P(theta_j - eta g_j / (eps + sqrt(S_j))).

    The default eta = sqrt(2) is calibrated to a box of l-infinity diameter 2
    (eta = D_inf / sqrt(2)), for which the guarantee is
    regret <= 2 sqrt(2) sum_j ||g_{:,j}||_2 (see ``adagrad_bound``).
    """

    eta: float = math.sqrt(2.0)
    eps: float = 1e-12

    def _validate(self):
        if not (self.eta > 0.0):
            raise ValueError("eta must be positive")
        if not (self.eps > 0.0):
            raise ValueError("eps must be positive")

    def _update(self, state, g):
        sq = state.sq_sum + g * g
        theta = state.theta - self.eta * g / (self.eps + np.sqrt(sq))
        return _project_py(theta, self.projection), sq


# ---------------------------------------------------------------------------
# state and stepping
# ---------------------------------------------------------------------------

@dataclass
class OptimizerState:
    """Mutable per-run state: current iterate, gradient sum, squared sums,
    and the number of gradients observed so far."""

    spec: AlgorithmSpec
    theta: np.ndarray
    grad_sum: np.ndarray
    sq_sum: np.ndarray
    k: int = 0
    theta0_resolved: np.ndarray | None = None

    def copy(self) -> "OptimizerState":
        return OptimizerState(self.spec, self.theta.copy(), self.grad_sum.copy(),
                              self.sq_sum.copy(), self.k, self.theta0_resolved)


def init_state(spec: AlgorithmSpec, d: int) -> OptimizerState:
    theta0 = spec.start_point(d)
    return OptimizerState(spec, theta0.copy(), np.zeros(d), np.zeros(d), 0, theta0)


def step(state: OptimizerState, g) -> OptimizerState:
    """One play-then-observe transition; returns a fresh state."""
    g = as_vector(g, state.theta.shape[0], name="g")
    theta, sq = state.spec._update(state, g)
    return OptimizerState(state.spec, np.asarray(theta, dtype=np.float64),
                          state.grad_sum + g, sq, state.k + 1, state.theta0_resolved)


# ---------------------------------------------------------------------------
# whole-sequence runs (kernel backed)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunResult:
    """Trajectory summary: per-step losses and checkpointed iterate sums."""

    dots: np.ndarray          # <g_i, theta_i> for the played iterates
    theta_sums: np.ndarray    # (m, d) partial sums of played iterates
    theta_final: np.ndarray
    checkpoints: np.ndarray   # 1-based step counts, aligned with theta_sums

    def averages(self) -> np.ndarray:
        """Averaged iterates bar(theta)_k = theta_sums[k] / checkpoints[k]."""
        return self.theta_sums / self.checkpoints[:, None].astype(np.float64)


def _checkpoint_array(checkpoints, n: int) -> np.ndarray:
    if checkpoints is None:
        return np.empty(0, dtype=np.int64)
    ck = np.asarray(checkpoints, dtype=np.int64)
    if ck.ndim != 1:
        raise ValueError("checkpoints must be 1-d")
    if ck.size and (np.any(ck < 1) or np.any(ck > n) or np.any(np.diff(ck) <= 0)):
        raise ValueError("checkpoints must be strictly increasing within [1, n]")
    return ck


def run(spec: AlgorithmSpec, G, checkpoints=None) -> RunResult:
    """Run a full gradient sequence through the configured algorithm.

    Deterministic: identical inputs give bit-identical trajectories. The hot
    loops dispatch to the active kernel backend; DualAveraging uses a closed
    form in terms of gradient prefix sums.
    """
    G = np.ascontiguousarray(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] < 1:
        raise ValueError("G must be a nonempty (n, d) array")
    if not np.all(np.isfinite(G)):
        raise ValueError("G must be finite")
    n, d = G.shape
    ck = _checkpoint_array(checkpoints, n)
    theta0 = spec.start_point(d)
    pk, pr, pa = _proj_args(spec.projection)

    if isinstance(spec, OGD):
        scale = np.full(d, float(spec.alpha))
        dots, sums, final = kernels.run_diag(G, theta0, scale, pk, pr, pa, ck)
    elif isinstance(spec, DiagScaled):
        lam = spec.lam if spec.lam.shape[0] != 1 else np.full(d, spec.lam[0])
        if lam.shape[0] != d:
            raise ValueError(f"lam has length {lam.shape[0]}, expected {d}")
        scale = 1.0 / lam  # 1/inf = 0 freezes the coordinate
        dots, sums, final = kernels.run_diag(G, theta0, scale, pk, pr, pa, ck)
    elif isinstance(spec, FullEuclidean):
        M = spec.alpha * spec._map.A_inv
        dots, sums, final = kernels.run_full(G, theta0, M, pk, pr, pa, ck)
    elif isinstance(spec, AdaGradDiag):
        dots, sums, final = kernels.run_adagrad(G, theta0, spec.eta, spec.eps,
                                                pk, pr, pa, ck)
    elif isinstance(spec, PNormMD):
        dots, sums, final = kernels.run_pnorm_md(G, theta0, spec._map.a,
                                                 spec.alpha, ck)
    elif isinstance(spec, DualAveraging):
        dots, sums, final = _run_dual_averaging(spec, G, theta0, ck)
    else:
        raise TypeError(f"unknown algorithm spec {type(spec).__name__}")
    return RunResult(dots, sums, final, ck)


def _grad_h_star_rows(mirror_map: maps.MirrorMap, Z: np.ndarray) -> np.ndarray:
    if isinstance(mirror_map, maps.Euclidean):
        return Z / mirror_map.lam
    if isinstance(mirror_map, maps.FullEuclidean):
        return Z @ mirror_map.A_inv
    if isinstance(mirror_map, maps.PNorm):
        astar = mirror_map.a_star
        mag = np.abs(Z)
        u = np.sum(mag ** astar, axis=1) ** (1.0 / astar)
        safe = np.where(u > 0.0, u, 1.0)
        out = (mirror_map.a - 1.0) * np.sign(Z) * mag ** (astar - 1.0)
        out *= (safe ** (2.0 - astar))[:, None]
        out[u == 0.0] = 0.0
        return out
    return np.stack([mirror_map.grad_h_star(z) for z in Z])


def _run_dual_averaging(spec: DualAveraging, G, theta0, ck):
    n, d = G.shape
    z0 = spec.mirror_map.grad_h(theta0)
    prefix = np.cumsum(G, axis=0)
    prev = np.vstack([np.zeros(d), prefix[:-1]])
    alphas = np.empty(n)
    alphas[0] = 0.0  # multiplies an empty prefix sum
    if spec.schedule is None:
        alphas[1:] = spec.alpha
    else:
        for i in range(1, n):
            alphas[i] = spec.alpha_at(i)
    thetas = _grad_h_star_rows(spec.mirror_map, z0 - alphas[:, None] * prev)
    dots = np.einsum("ij,ij->i", G, thetas)
    if ck.size:
        sums = np.cumsum(thetas, axis=0)[ck - 1]
    else:
        sums = np.empty((0, d))
    final = spec.mirror_map.grad_h_star(z0 - spec.alpha_at(n) * prefix[-1])
    return dots, sums, final


# ---------------------------------------------------------------------------
# regret and analytic certificates
# ---------------------------------------------------------------------------

def regret_curve(spec: AlgorithmSpec, G, comparator: SetDescriptor) -> np.ndarray:
    """Cumulative regret per step against the full-sequence best comparator.

    Entry j is sum_{i<=j} <g_i, theta_i - theta*> where theta* minimizes
    <sum_i g_i, theta> over the comparator set for the *whole* sequence.
    """
    result = run(spec, G)
    G = np.asarray(G, dtype=np.float64)
    theta_star, _ = best_in_hindsight(comparator, G.sum(axis=0))
    return np.cumsum(result.dots) - np.cumsum(G @ theta_star)


def final_regret(spec: AlgorithmSpec, G, comparator: SetDescriptor) -> float:
    return float(regret_curve(spec, G, comparator)[-1])


def _dual_sq_rows(mirror_map: maps.MirrorMap, G: np.ndarray) -> np.ndarray:
    if isinstance(mirror_map, maps.Euclidean):
        return np.sum(G * G / mirror_map.lam, axis=1)
    if isinstance(mirror_map, maps.FullEuclidean):
        return np.einsum("ij,ij->i", G @ mirror_map.A_inv, G)
    if isinstance(mirror_map, maps.PNorm):
        astar = mirror_map.a_star
        return np.sum(np.abs(G) ** astar, axis=1) ** (2.0 / astar)
    return np.array([mirror_map.dual_sq(g) for g in G])


def md_regret_bound(mirror_map: maps.MirrorMap, alpha: float, theta, theta0,
                    gradients) -> float:
    """The mirror descent / dual averaging certificate

        B_h(theta, theta0) / alpha + (alpha / 2) sum_i ||g_i||_*^2

    against the comparator ``theta``, valid for unconstrained iterates.
    """
    if not (alpha > 0.0):
        raise ValueError("alpha must be positive")
    G = np.atleast_2d(np.asarray(gradients, dtype=np.float64))
    breg = mirror_map.bregman(theta, theta0)
    return float(breg / alpha + 0.5 * alpha * np.sum(_dual_sq_rows(mirror_map, G)))


def adagrad_bound(gradients) -> float:
    """2 sqrt(2) sum_j sqrt(sum_i g_{i,j}^2): the data-dependent certificate
    for AdaGradDiag (eta = sqrt(2)) on a box of l-infinity diameter 2."""
    G = np.atleast_2d(np.asarray(gradients, dtype=np.float64))
    return float(2.0 * math.sqrt(2.0) * np.sum(np.sqrt(np.sum(G * G, axis=0))))


def _sup_scaled_norm(c: np.ndarray, ball_exp: float, eval_exp: float) -> float:
    # sup { ||c (.) y||_b : ||y||_q <= 1 } = ||c||_t with 1/t = max(0, 1/b - 1/q)
    inv_b = 0.0 if eval_exp == INF else 1.0 / eval_exp
    inv_q = 0.0 if ball_exp == INF else 1.0 / ball_exp
    inv_t = inv_b - inv_q
    if inv_t <= 0.0:
        return float(np.max(c))
    return _pnorm(c, 1.0 / inv_t)


def sup_set_norm(s: SetDescriptor, b: float, d: int | None = None) -> float:
    """sup of ||theta||_b over the set (catalog closed forms)."""
    d = resolve_dimension(s, d=d)
    if s.kind == "box":
        return _pnorm(s.half_widths, b)
    if s.kind == "lp_ball":
        return s.radius * _sup_scaled_norm(np.ones(d), s.exponent, b)
    return s.radius * _sup_scaled_norm(1.0 / s.weights, s.exponent, b)


def sup_ball_norm(norm: NormDescriptor, b: float, d: int | None = None) -> float:
    """sup of ||g||_b over the unit gamma-ball (catalog closed forms)."""
    d = resolve_dimension(norm, d=d)
    if norm.kind == "lp":
        return _sup_scaled_norm(np.ones(d), norm.exponent, b)
    return _sup_scaled_norm(1.0 / norm.weights, norm.exponent, b)


def pnorm_default_stepsize(s: SetDescriptor, norm: NormDescriptor, a: float,
                           n: int, theta0=None, d: int | None = None) -> float:
    """Horizon-tuned step for PNormMD:

        alpha = sup_{theta in Theta} ||theta - theta0||_a
                / (sqrt(n) sup_{gamma(g) <= 1} ||g||_{a*}),

    with the numerator bounded by sup ||theta||_a + ||theta0||_a.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (1.0 < a <= 2.0):
        raise ValueError("a must lie in (1, 2]")
    d = resolve_dimension(s, norm, d=d)
    num = sup_set_norm(s, a, d)
    if theta0 is not None:
        num += _pnorm(as_vector(theta0, d, name="theta0"), a)
    den = math.sqrt(n) * sup_ball_norm(norm, conjugate_exponent(a), d)
    if den == 0.0:
        raise ValueError("degenerate gradient ball")
    return num / den


def pnorm_regret_bound(s: SetDescriptor, norm: NormDescriptor, a: float,
                       n: int, d: int | None = None) -> float:
    """Cumulative regret guarantee for PNormMD at the default step size:

        sup ||theta||_a * sup ||g||_{a*} * sqrt(n / (a - 1)).
    """
    d = resolve_dimension(s, norm, d=d)
    return (sup_set_norm(s, a, d) * sup_ball_norm(norm, conjugate_exponent(a), d)
            * math.sqrt(n / (a - 1.0)))
