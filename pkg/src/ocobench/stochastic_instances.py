"""Stochastic linear/absolute-loss instances with seeded sample streams and
closed-form population gaps.

Kinds
-----
* ``sparse_coord``: X = sigma v_j e_j with a uniformly random coordinate j
  and sign bias P(sigma = +1) = (1 + delta)/2; loss F(theta, x) = <theta, x>.
  Population objective f(theta) = (delta / d) <theta, v>.
* ``dense_sign``: X in {-1, +1}^d with independent coordinates biased toward
  v; loss eta <theta, x>, population objective eta delta <theta, v>.
* ``rect_abs``: X = sigma v_j e_j, coordinate j drawn from ``p_weights`` and
  sign biased with per-coordinate delta_j; loss
  (1 / gamma(e_j)) |theta_j - a_j x_j| on the sampled coordinate. The
  population minimum over a box containing a (.) v is
  sum_j (p_j a_j / gamma(e_j)) (1 - delta_j).
* ``one_dim``: X = +-v on the line, loss |theta - x|, population gap
  delta (1 - theta v) on [-1, 1].

Sampling is counter based: the pair (seed, i) fully determines the i-th
sample, with no state carried between steps, so any subsequence can be
regenerated independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    NormDescriptor,
    SetDescriptor,
    as_vector,
    best_in_hindsight,
    box,
    lp_ball,
    lp_norm,
)

_FEAS_TOL = 1e-12


def _sign_plus(x):
    return np.where(np.asarray(x) >= 0.0, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class StochasticInstance:
    """Immutable description of a sampled optimization problem.

    Every realizable subgradient g satisfies gamma(g) <= 1 (checked at
    construction), and delta entries lie in [0, 1/2].
    """

    kind: str
    v: np.ndarray
    delta: np.ndarray          # scalar kinds store a length-1 array
    gamma: NormDescriptor
    comparator_set: SetDescriptor
    p_weights: np.ndarray | None = None
    a: np.ndarray | None = None
    eta: float | None = None

    def __post_init__(self):
        v = as_vector(self.v, name="v")
        if not np.all(np.abs(v) == 1.0):
            raise ValueError("v must be a sign vector (+-1 entries)")
        object.__setattr__(self, "v", v)
        delta = as_vector(self.delta, name="delta")
        if np.any(delta < 0.0) or np.any(delta > 0.5):
            raise ValueError("delta must lie in [0, 1/2]")
        object.__setattr__(self, "delta", delta)
        d = v.shape[0]
        gamma_e = self.gamma.unit_vector_values(d)
        object.__setattr__(self, "_gamma_e", gamma_e)
        if self.kind == "sparse_coord":
            if np.max(gamma_e) > 1.0 + _FEAS_TOL:
                raise ValueError("gamma(e_j) must be <= 1 for sparse_coord")
        elif self.kind == "dense_sign":
            if self.eta is None or not (self.eta > 0.0):
                raise ValueError("dense_sign requires eta > 0")
            if self.eta * self.gamma.value(np.ones(d)) > 1.0 + 1e-9:
                raise ValueError("eta gamma(1) must be <= 1 for dense_sign")
        elif self.kind == "rect_abs":
            if self.a is None or self.p_weights is None:
                raise ValueError("rect_abs requires a and p_weights")
            a = as_vector(self.a, d, name="a")
            if np.any(a <= 0.0):
                raise ValueError("a must be strictly positive")
            p = as_vector(self.p_weights, d, name="p_weights")
            if np.any(p < 0.0) or abs(float(np.sum(p)) - 1.0) > 1e-9:
                raise ValueError("p_weights must be a probability vector")
            if delta.shape[0] != d:
                raise ValueError("rect_abs requires a per-coordinate delta")
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "p_weights", p)
            object.__setattr__(self, "_cdf", np.cumsum(p))
            if not self.comparator_set.contains(a * v):
                raise ValueError("comparator set must contain a (.) v")
        elif self.kind == "one_dim":
            if d != 1:
                raise ValueError("one_dim is one dimensional")
        else:
            raise ValueError(f"unknown instance kind {self.kind!r}")

    @property
    def d(self) -> int:
        return int(self.v.shape[0])


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def sparse_coord(v, delta: float, gamma: NormDescriptor | None = None,
                 comparator_set: SetDescriptor | None = None) -> StochasticInstance:
    """Biased single-coordinate linear instance; defaults to an l2 setup."""
    v = as_vector(v, name="v")
    if gamma is None:
        gamma = lp_norm(2.0)
    if comparator_set is None:
        comparator_set = lp_ball(2.0, 1.0)
    return StochasticInstance("sparse_coord", v, np.array([float(delta)]),
                              gamma, comparator_set)


def dense_sign(v, delta: float, gamma: NormDescriptor | None = None,
               comparator_set: SetDescriptor | None = None,
               eta: float | None = None) -> StochasticInstance:
    """Biased dense sign instance; eta defaults to 1 / gamma(1), making every
    subgradient exactly unit gamma-norm."""
    v = as_vector(v, name="v")
    d = v.shape[0]
    if gamma is None:
        gamma = lp_norm(2.0)
    if comparator_set is None:
        comparator_set = lp_ball(2.0, 1.0)
    if eta is None:
        eta = 1.0 / gamma.value(np.ones(d))
    return StochasticInstance("dense_sign", v, np.array([float(delta)]),
                              gamma, comparator_set, eta=float(eta))


def rect_abs(v, delta, a, gamma: NormDescriptor | None = None,
             p_weights=None,
             comparator_set: SetDescriptor | None = None) -> StochasticInstance:
    """Per-coordinate absolute-loss instance on a hyperrectangle.

    ``p_weights`` defaults to p_j proportional to (a_j / gamma(e_j))^2, the
    allocation that equalizes the coordinates' contributions at the
    calibrated bias levels.
    """
    v = as_vector(v, name="v")
    a = as_vector(a, v.shape[0], name="a")
    if gamma is None:
        gamma = lp_norm(2.0)
    if comparator_set is None:
        comparator_set = box(a)
    if p_weights is None:
        gamma_e = gamma.unit_vector_values(v.shape[0])
        w = (a / gamma_e) ** 2
        p_weights = w / np.sum(w)
    delta = as_vector(delta, name="delta")
    if delta.shape[0] == 1 and v.shape[0] > 1:
        delta = np.full(v.shape[0], float(delta[0]))
    return StochasticInstance("rect_abs", v, delta, gamma, comparator_set,
                              p_weights=as_vector(p_weights, name="p_weights"), a=a)


def one_dim(delta: float, v: float = 1.0) -> StochasticInstance:
    """Scalar absolute-loss instance on [-1, 1]."""
    return StochasticInstance("one_dim", np.array([float(v)]),
                              np.array([float(delta)]), lp_norm(2.0),
                              box(np.ones(1)))


def calibrated_delta(p_weights, n: int) -> np.ndarray:
    """Bias levels delta_j = min(1/2, 1 / (2 sqrt(n p_j log 3))) that balance
    estimation error against detectability at horizon n."""
    p = as_vector(p_weights, name="p_weights")
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.full(p.shape[0], 0.5)
    pos = p > 0.0
    out[pos] = np.minimum(0.5, 1.0 / (2.0 * np.sqrt(n * p[pos] * math.log(3.0))))
    return out


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _stream(seed: int, i: int) -> np.random.Generator:
    # one disposable stream per (seed, i); the index sits in the high counter
    # word so per-draw increments can never collide across indices
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, i]))


def sample(instance: StochasticInstance, seed: int, i: int) -> np.ndarray:
    """The i-th sample of the stream; a pure function of (seed, i)."""
    gen = _stream(seed, i)
    d = instance.d
    v = instance.v
    if instance.kind == "sparse_coord":
        u = gen.random(2)
        j = min(int(u[0] * d), d - 1)
        sign = 1.0 if u[1] < 0.5 * (1.0 + instance.delta[0]) else -1.0
        x = np.zeros(d)
        x[j] = sign * v[j]
        return x
    if instance.kind == "dense_sign":
        u = gen.random(d)
        return np.where(u < 0.5 * (1.0 + instance.delta[0]), v, -v)
    if instance.kind == "rect_abs":
        u = gen.random(2)
        j = min(int(np.searchsorted(instance._cdf, u[0], side="right")), d - 1)
        sign = 1.0 if u[1] < 0.5 * (1.0 + instance.delta[j]) else -1.0
        x = np.zeros(d)
        x[j] = sign * v[j]
        return x
    u = gen.random(1)
    sign = 1.0 if u[0] < 0.5 * (1.0 + instance.delta[0]) else -1.0
    return np.array([sign * v[0]])


def sample_sequence(instance: StochasticInstance, seed: int, n: int) -> np.ndarray:
    """Samples 0..n-1 stacked into an (n, d) array; row i equals
    ``sample(instance, seed, i)`` exactly."""
    if n < 0:
        raise ValueError("n must be >= 0")
    out = np.empty((n, instance.d))
    for i in range(n):
        out[i] = sample(instance, seed, i)
    return out


def subgradient(instance: StochasticInstance, theta, x) -> np.ndarray:
    """A subgradient of the sampled loss at theta, sign(0) taken as +1."""
    theta = as_vector(theta, instance.d, name="theta")
    x = as_vector(x, instance.d, name="x")
    if instance.kind == "sparse_coord":
        return x.copy()
    if instance.kind == "dense_sign":
        return instance.eta * x
    if instance.kind == "rect_abs":
        j = int(np.argmax(np.abs(x)))
        g = np.zeros(instance.d)
        g[j] = float(_sign_plus(theta[j] - instance.a[j] * x[j])) / instance._gamma_e[j]
        return g
    return np.array([float(_sign_plus(theta[0] - x[0]))])


def gradient_sequence(instance: StochasticInstance, seed: int, n: int) -> np.ndarray:
    """Pre-drawn subgradients for the linear kinds, whose subgradient does
    not depend on theta. Raises for rect_abs/one_dim."""
    if instance.kind == "sparse_coord":
        return sample_sequence(instance, seed, n)
    if instance.kind == "dense_sign":
        return instance.eta * sample_sequence(instance, seed, n)
    raise ValueError(f"{instance.kind} subgradients depend on theta")


# ---------------------------------------------------------------------------
# population quantities
# ---------------------------------------------------------------------------

def _population_rows(instance: StochasticInstance, thetas: np.ndarray) -> np.ndarray:
    v, delta = instance.v, instance.delta
    if instance.kind == "sparse_coord":
        return (delta[0] / instance.d) * (thetas @ v)
    if instance.kind == "dense_sign":
        return instance.eta * delta[0] * (thetas @ v)
    if instance.kind == "rect_abs":
        av = instance.a * v
        w = instance.p_weights / instance._gamma_e
        plus = 0.5 * (1.0 + delta) * np.abs(thetas - av)
        minus = 0.5 * (1.0 - delta) * np.abs(thetas + av)
        return (plus + minus) @ w
    return (0.5 * (1.0 + delta[0]) * np.abs(thetas[:, 0] - v[0])
            + 0.5 * (1.0 - delta[0]) * np.abs(thetas[:, 0] + v[0]))


def population_value(instance: StochasticInstance, theta) -> float:
    """f(theta) = E F(theta, X), exactly."""
    theta = as_vector(theta, instance.d, name="theta")
    return float(_population_rows(instance, theta[None, :])[0])


def population_min(instance: StochasticInstance) -> float:
    """min of f over the comparator set, exactly."""
    if instance.kind == "sparse_coord":
        mean = (instance.delta[0] / instance.d) * instance.v
        return best_in_hindsight(instance.comparator_set, mean)[1]
    if instance.kind == "dense_sign":
        mean = instance.eta * instance.delta[0] * instance.v
        return best_in_hindsight(instance.comparator_set, mean)[1]
    if instance.kind == "rect_abs":
        w = instance.p_weights * instance.a / instance._gamma_e
        return float(np.dot(w, 1.0 - instance.delta))
    return 1.0 - float(instance.delta[0])


def population_gap(instance: StochasticInstance, theta) -> float:
    """Optimality gap f(theta) - min f >= 0."""
    return population_value(instance, theta) - population_min(instance)


def population_gap_rows(instance: StochasticInstance, thetas) -> np.ndarray:
    """Vectorized gaps for a stack of iterates (rows)."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    return _population_rows(instance, thetas) - population_min(instance)


def assouad_constants(instance: StochasticInstance) -> np.ndarray:
    """Per-coordinate separation constants tau_j = p_j a_j delta_j / gamma(e_j)
    for rect_abs: every theta in the box has

        population_gap(theta) >= sum_j tau_j 1{sign(theta_j) != v_j},

    and at a vertex theta = a (.) s the gap equals 2 sum_{j: s_j != v_j} tau_j.
    """
    if instance.kind != "rect_abs":
        raise ValueError("assouad_constants applies to rect_abs instances")
    return instance.p_weights * instance.a * instance.delta / instance._gamma_e
