"""Pure numpy implementations of the trajectory kernels.

Reference semantics for the compiled extension in ``_kernels.pyx``: same
signatures, same play-then-observe accounting, same projection conventions.
Selected automatically when the extension is unavailable or when the
environment variable ``OCOBENCH_PURE=1`` is set.

Shared contract
---------------
* ``G`` is the (n, d) float64 array of observed subgradients.
* ``dots[i] = <g_i, theta_i>`` where ``theta_i`` is the iterate in force
  *before* observing ``g_i`` (the played point).
* ``ckpts`` is a strictly increasing int64 array of 1-based step counts;
  row k of ``theta_sums`` holds sum_{i < ckpts[k]} theta_i, so averaged
  iterates are ``theta_sums[k] / ckpts[k]``.
* ``proj_kind``: 0 = none, 1 = Euclidean ball of radius ``proj_radius``,
  2 = box clip to [-proj_a, proj_a].
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _project(theta: np.ndarray, proj_kind: int, proj_radius: float,
             proj_a: np.ndarray | None) -> np.ndarray:
    if proj_kind == 1:
        nrm = float(np.sqrt(np.dot(theta, theta)))
        if nrm > proj_radius:
            theta = theta * (proj_radius / nrm)
    elif proj_kind == 2:
        theta = np.minimum(np.maximum(theta, -proj_a), proj_a)
    return theta


def _alloc(n: int, d: int, ckpts: np.ndarray):
    dots = np.empty(n)
    sums = np.empty((ckpts.shape[0], d))
    return dots, sums


def run_diag(G, theta0, scale, proj_kind, proj_radius, proj_a, ckpts):
    """theta <- P(theta - scale (.) g), fixed per-coordinate step sizes."""
    G = np.ascontiguousarray(G, dtype=np.float64)
    n, d = G.shape
    theta = np.array(theta0, dtype=np.float64)
    running = np.zeros(d)
    dots, sums = _alloc(n, d, ckpts)
    k = 0
    for i in range(n):
        g = G[i]
        dots[i] = float(np.dot(g, theta))
        running += theta
        if k < ckpts.shape[0] and ckpts[k] == i + 1:
            sums[k] = running
            k += 1
        theta = _project(theta - scale * g, proj_kind, proj_radius, proj_a)
    return dots, sums, theta


def run_full(G, theta0, M, proj_kind, proj_radius, proj_a, ckpts):
    """theta <- P(theta - M g) for a fixed matrix M (alpha times A inverse)."""
    G = np.ascontiguousarray(G, dtype=np.float64)
    n, d = G.shape
    theta = np.array(theta0, dtype=np.float64)
    running = np.zeros(d)
    dots, sums = _alloc(n, d, ckpts)
    k = 0
    for i in range(n):
        g = G[i]
        dots[i] = float(np.dot(g, theta))
        running += theta
        if k < ckpts.shape[0] and ckpts[k] == i + 1:
            sums[k] = running
            k += 1
        theta = _project(theta - M @ g, proj_kind, proj_radius, proj_a)
    return dots, sums, theta


def run_adagrad(G, theta0, eta, eps, proj_kind, proj_radius, proj_a, ckpts):
    """Diagonal adaptive steps: S += g^2, theta_j -= eta g_j / (eps + sqrt(S_j))."""
    G = np.ascontiguousarray(G, dtype=np.float64)
    n, d = G.shape
    theta = np.array(theta0, dtype=np.float64)
    S = np.zeros(d)
    running = np.zeros(d)
    dots, sums = _alloc(n, d, ckpts)
    k = 0
    for i in range(n):
        g = G[i]
        dots[i] = float(np.dot(g, theta))
        running += theta
        if k < ckpts.shape[0] and ckpts[k] == i + 1:
            sums[k] = running
            k += 1
        S += g * g
        theta = _project(theta - eta * g / (eps + np.sqrt(S)),
                         proj_kind, proj_radius, proj_a)
    return dots, sums, theta


def run_pnorm_md(G, theta0, a, alpha, ckpts):
    """Unconstrained mirror descent under the p-norm potential, a in (1, 2].

    Dual update z = grad_h(theta) - alpha g followed by theta = grad_h_star(z).
    """
    G = np.ascontiguousarray(G, dtype=np.float64)
    n, d = G.shape
    theta = np.array(theta0, dtype=np.float64)
    astar = a / (a - 1.0)
    running = np.zeros(d)
    dots, sums = _alloc(n, d, ckpts)
    k = 0
    for i in range(n):
        g = G[i]
        dots[i] = float(np.dot(g, theta))
        running += theta
        if k < ckpts.shape[0] and ckpts[k] == i + 1:
            sums[k] = running
            k += 1
        mag = np.abs(theta)
        if mag.max() == 0.0:
            z = -alpha * g
        else:
            u = np.sum(mag ** a) ** (1.0 / a)
            z = np.sign(theta) * mag ** (a - 1.0) * u ** (2.0 - a) / (a - 1.0)
            z -= alpha * g
        zmag = np.abs(z)
        if zmag.max() == 0.0:
            theta = np.zeros(d)
        else:
            uz = np.sum(zmag ** astar) ** (1.0 / astar)
            theta = (a - 1.0) * np.sign(z) * zmag ** (astar - 1.0) * uz ** (2.0 - astar)
    return dots, sums, theta
