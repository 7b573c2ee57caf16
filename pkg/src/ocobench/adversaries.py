"""Hard gradient sequences for preconditioned online algorithms, with
certified regret lower bounds.

The constructions follow a two-phase pattern: a cancellation phase feeding
the algorithm +-u (the direction a diagonal/full preconditioner damps the
least) and an imbalance phase feeding +-v with a small surplus delta of +v
(the direction whose updates are too timid). Both u and v have unit gradient
norm, so the sequences stay inside the advertised gradient ball.

``lp_hard_instance`` targets DiagScaled(lam) with gradients bounded in l_q
(q conjugate to the comparator exponent p); ``wlp_hard_instance`` targets
OGD(alpha) with gradients bounded in the weighted l_1 norm gamma(g) =
sum_j beta_j |g_j| against a unit-box comparator. ``rotate`` turns a
diagonal hard instance into one for the rotated preconditioner.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import mirror_maps as maps
from .geometry import (
    INF,
    NormDescriptor,
    SetDescriptor,
    as_vector,
    box,
    conjugate_exponent,
    lp_ball,
    lp_norm,
    norm_to_config,
    set_to_config,
    weighted_lr_norm,
)

#: additive slack allowed when checking certificates against measured regret
CERTIFICATE_SLACK = 2.0


@dataclass(frozen=True, eq=False)
class AdversarialInstance:
    """A fixed gradient sequence plus its certificate.

    ``certified_lower_bound`` is a number the measured regret of the targeted
    algorithm on ``gradients`` (against ``comparator_set``) provably exceeds,
    up to ``CERTIFICATE_SLACK`` for horizons n >= 16.
    """

    gradients: np.ndarray
    comparator_set: SetDescriptor
    gradient_norm: NormDescriptor
    certified_lower_bound: float
    delta: float
    meta: dict

    @property
    def n(self) -> int:
        return int(self.gradients.shape[0])

    @property
    def d(self) -> int:
        return int(self.gradients.shape[1])


def extremal_uv(c, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Extremal directions of x' diag(c) x over the unit l_q ball, q >= 2.

    Returns (u, v): u maximizes over the ball, v minimizes over the sphere.
    Writing tau_j = |x_j|^q, the objective is sum_j c_j tau_j^{2/q}, concave
    on the simplex for q > 2, so u has full support with
    |u_j| = c_j^{1/(q-2)} / (sum_k c_k^{q/(q-2)})^{1/q} (computed in log space
    for stability as q -> 2); for q = 2 it is the best coordinate axis. The
    minimum of a concave function sits at a simplex vertex, so v is the worst
    coordinate axis. Ties break to the lowest index.
    """
    c = as_vector(c, name="c")
    if np.any(c <= 0.0):
        raise ValueError("c must be strictly positive")
    if not (q >= 2.0):
        raise ValueError("q must be >= 2")
    d = c.shape[0]
    v = np.zeros(d)
    v[int(np.argmin(c))] = 1.0
    if q == 2.0:
        u = np.zeros(d)
        u[int(np.argmax(c))] = 1.0
    elif q == INF:
        u = np.ones(d)
    else:
        logc = np.log(c) / (q - 2.0)
        m = np.max(logc)
        log_norm = m + math.log(np.sum(np.exp(q * (logc - m)))) / q
        u = np.exp(logc - log_norm)
    return u, v


def _schedule(u: np.ndarray, v: np.ndarray, n: int, delta: float) -> np.ndarray:
    # blocks: n/4 of +u, n/4 of -u, floor((n/4)(1+delta)) of +v, rest -v
    n4 = n // 4
    c_pos = int(math.floor(n4 * (1.0 + delta)))
    c_neg = n - 2 * n4 - c_pos
    rows = ([u] * n4) + ([-u] * n4) + ([v] * c_pos) + ([-v] * c_neg)
    return np.array(rows)


def _check_horizon(n: int):
    if n < 4:
        raise ValueError("n must be >= 4")
    if n % 4 != 0:
        raise ValueError("n must be divisible by 4 (block schedule)")


def lp_hard_instance(lam, p: float, d: int, n: int) -> AdversarialInstance:
    """Hard sequence for DiagScaled(lam) with l_q-bounded gradients.

    The comparator set is the unit l_p ball, p in [1, 2]; gradients satisfy
    ||g||_q <= 1 for q = p*. The certificate is

        (1/2) min(n/2, sqrt(2 n) d^{1/2 - 1/q})        when lam == 1, and
        (n/4) (u' A^{-1} u + delta ||v||_q)            for general diagonal A,

    with delta = min(1, 2 ||v||_q / (n v' A^{-1} v)).
    """
    _check_horizon(n)
    if not (1.0 <= p <= 2.0):
        raise ValueError("p must lie in [1, 2]")
    lam = np.broadcast_to(np.asarray(lam, dtype=np.float64), (d,)).copy()
    if np.any(lam <= 0.0) or not np.all(np.isfinite(lam)):
        raise ValueError("lam must be strictly positive and finite")
    q = conjugate_exponent(p)
    c = 1.0 / lam
    u, v = extremal_uv(c, q)
    u_gain = float(np.dot(c * u, u))
    v_gain = float(np.dot(c * v, v))
    delta = min(1.0, 2.0 / (n * v_gain))  # ||v||_q = 1
    G = _schedule(u, v, n, delta)
    if np.allclose(lam, 1.0):
        exponent = 0.5 if q == INF else 0.5 - 1.0 / q
        certified = 0.5 * min(n / 2.0, math.sqrt(2.0 * n) * d ** exponent)
    else:
        certified = (n / 4.0) * (u_gain + delta * 1.0)
    meta = {
        "kind": "lp",
        "p": p,
        "lam": lam.tolist(),
        "u_gain": u_gain,
        "v_gain": v_gain,
        "heuristic": False,
    }
    return AdversarialInstance(
        gradients=G,
        comparator_set=lp_ball(p, 1.0),
        gradient_norm=lp_norm(q),
        certified_lower_bound=float(certified),
        delta=float(delta),
        meta=meta,
    )


def wlp_hard_instance(beta, alpha: float, d: int, n: int) -> AdversarialInstance:
    """Hard sequence for OGD(alpha) under weighted-l1 gradient constraints.

    Gradients satisfy sum_j beta_j |g_j| <= 1; the comparator is the unit
    box. u = e_k / beta_k for the smallest weight, v = 1 / ||beta||_1 in
    every coordinate; delta = min(1, 2 ||beta||_1 / (n alpha)). Certificate:

        (1/2) min( d n / (2 ||beta||_1), sqrt(2 d n) / min_j beta_j ).
    """
    _check_horizon(n)
    beta = as_vector(beta, d, name="beta")
    if np.any(beta <= 0.0):
        raise ValueError("beta must be strictly positive")
    if not (alpha > 0.0):
        raise ValueError("alpha must be positive")
    b1 = float(np.sum(beta))
    k = int(np.argmin(beta))
    u = np.zeros(d)
    u[k] = 1.0 / beta[k]
    v = np.full(d, 1.0 / b1)
    # delta = min(1, 2 ||v||_1 / (n alpha ||v||_2^2)) with ||v||_1 = d / b1
    delta = min(1.0, 2.0 * b1 / (n * alpha))
    G = _schedule(u, v, n, delta)
    certified = 0.5 * min(d * n / (2.0 * b1), math.sqrt(2.0 * d * n) / float(beta[k]))
    meta = {
        "kind": "wlp",
        "beta": beta.tolist(),
        "alpha": alpha,
        "heuristic": False,
    }
    return AdversarialInstance(
        gradients=G,
        comparator_set=box(np.ones(d)),
        gradient_norm=weighted_lr_norm(1.0, beta),
        certified_lower_bound=float(certified),
        delta=float(delta),
        meta=meta,
    )


def rotate(instance: AdversarialInstance, U) -> AdversarialInstance:
    """Conjugate an instance by an orthogonal matrix: g_i -> U g_i.

    The rotated sequence is hard for the rotated preconditioner
    (theta <- theta - U Lam^{-1} U' g); its measured regret against the
    rotated comparator set U Theta equals the original measured regret, so
    the certificate carries over unchanged. The descriptor fields keep the
    axis-aligned originals and the rotation is recorded in ``meta``.
    """
    U = np.asarray(U, dtype=np.float64)
    d = instance.d
    if U.shape != (d, d):
        raise ValueError(f"U must be {d} x {d}")
    if np.max(np.abs(U.T @ U - np.eye(d))) > 1e-10:
        raise ValueError("U must be orthogonal (U'U = I within 1e-10)")
    meta = dict(instance.meta)
    meta["rotated"] = True
    meta["rotation"] = U.tolist()
    return AdversarialInstance(
        gradients=instance.gradients @ U.T,
        comparator_set=instance.comparator_set,
        gradient_norm=instance.gradient_norm,
        certified_lower_bound=instance.certified_lower_bound,
        delta=instance.delta,
        meta=meta,
    )


def lp_hard_instance_full(A, p: float, n: int, restarts: int = 32,
                          seed: int = 0) -> AdversarialInstance:
    """Best-effort hard sequence for FullEuclidean(A, 1) with non-diagonal A.

    The extremal directions are found by projected gradient ascent/descent on
    x' A^{-1} x over the l_q ball/sphere with ``restarts`` random starts, so
    the result carries no closed-form guarantee: the certificate reported is
    the *measured* regret of FullEuclidean(A, 1) on the emitted sequence, and
    ``meta["heuristic"]`` is True.
    """
    from .optimizers import FullEuclidean, final_regret

    _check_horizon(n)
    if not (1.0 <= p <= 2.0):
        raise ValueError("p must lie in [1, 2]")
    mm = maps.FullEuclidean(A)
    d = mm.A.shape[0]
    q = conjugate_exponent(p)
    C = mm.A_inv
    u = _ascend_quadratic(C, q, restarts, seed, maximize=True)
    v = _ascend_quadratic(C, q, restarts, seed + 1, maximize=False)
    v_gain = float(v @ C @ v)
    vq = _lq(v, q)
    delta = min(1.0, 2.0 * vq / (n * v_gain))
    G = _schedule(u, v, n, delta)
    comparator = lp_ball(p, 1.0)
    measured = final_regret(FullEuclidean(mm.A, 1.0), G, comparator)
    meta = {
        "kind": "lp_full",
        "p": p,
        "A": mm.A.tolist(),
        "heuristic": True,
        "restarts": restarts,
    }
    return AdversarialInstance(
        gradients=G,
        comparator_set=comparator,
        gradient_norm=lp_norm(q),
        certified_lower_bound=float(measured),
        delta=float(delta),
        meta=meta,
    )


def _lq(x: np.ndarray, q: float) -> float:
    if q == INF:
        return float(np.max(np.abs(x)))
    return float(np.sum(np.abs(x) ** q) ** (1.0 / q))


def _q_ball_retract(x: np.ndarray, q: float, to_sphere: bool) -> np.ndarray:
    nrm = _lq(x, q)
    if nrm == 0.0:
        out = np.zeros_like(x)
        out[0] = 1.0
        return out
    if to_sphere or nrm > 1.0:
        return x / nrm
    return x


def _ascend_quadratic(C: np.ndarray, q: float, restarts: int, seed: int,
                      maximize: bool, iters: int = 400) -> np.ndarray:
    """Projected gradient search for extremal x' C x over the l_q ball/sphere."""
    d = C.shape[0]
    # crude spectral scale for the step size
    scale = float(np.max(np.sum(np.abs(C), axis=1)))
    step = 0.5 / scale if scale > 0 else 0.5
    rng = np.random.Generator(np.random.Philox(key=seed))
    best_x, best_val = None, None
    sign = 1.0 if maximize else -1.0
    for _ in range(restarts):
        x = rng.standard_normal(d)
        x = _q_ball_retract(x, q, to_sphere=not maximize)
        for _ in range(iters):
            x = x + sign * step * 2.0 * (C @ x)
            x = _q_ball_retract(x, q, to_sphere=not maximize)
        val = float(x @ C @ x)
        if best_val is None or (maximize and val > best_val) \
                or (not maximize and val < best_val):
            best_x, best_val = x, val
    return best_x


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def write_instance_csv(instance: AdversarialInstance, path: str):
    """Write the gradient rows as CSV plus a JSON sidecar at ``path + '.json'``.

    Header is ``step,g_1,...,g_d``; floats use 17 significant digits so a
    round trip is value exact. The sidecar records the certificate, delta,
    the shape parameter (p or beta), and the comparator set.
    """
    G = instance.gradients
    n, d = G.shape
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step"] + [f"g_{j + 1}" for j in range(d)])
        for i in range(n):
            writer.writerow([i + 1] + [f"{x:.17g}" for x in G[i]])
    if instance.meta.get("kind") == "wlp":
        p_or_beta = instance.meta["beta"]
    else:
        p_or_beta = instance.meta.get("p")
    sidecar = {
        "bound": instance.certified_lower_bound,
        "delta": instance.delta,
        "p_or_beta": p_or_beta,
        "set": set_to_config(instance.comparator_set),
        "gradient_norm": norm_to_config(instance.gradient_norm),
        "meta": instance.meta,
    }
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)


def read_gradients_csv(path: str) -> np.ndarray:
    """Read back a gradient CSV written by ``write_instance_csv``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "step":
            raise ValueError("expected header starting with 'step'")
        rows = [[float(x) for x in row[1:]] for row in reader]
    return np.array(rows)
