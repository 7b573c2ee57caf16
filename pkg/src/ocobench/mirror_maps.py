"""Mirror maps: strongly convex potentials h with gradients, conjugate
gradients, and Bregman divergences.

Three families are provided.

* ``Euclidean(lam)``: h(theta) = (1/2) sum_j lam_j theta_j^2, the diagonal
  quadratic. Its conjugate gradient is coordinate-wise division by lam.
* ``FullEuclidean(A)``: h(theta) = (1/2) theta' A theta for symmetric
  positive definite A. A is factorized once at construction.
* ``PNorm(a)``: h(theta) = ||theta||_a^2 / (2 (a - 1)) for a in (1, 2],
  which is 1-strongly convex with respect to ||.||_a. Its gradient at 0 is 0.

Each map also knows its natural squared dual norm ``dual_sq``: the quantity
that multiplies step sizes in regret bounds (z' A^{-1} z for quadratics,
||z||_{a*}^2 for PNorm).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .geometry import as_vector, conjugate_exponent


class MirrorMap(ABC):
    """Interface shared by all mirror maps."""

    @abstractmethod
    def h(self, theta) -> float:
        """Potential value h(theta)."""

    @abstractmethod
    def grad_h(self, theta) -> np.ndarray:
        """Gradient of h (the primal-to-dual map)."""

    @abstractmethod
    def grad_h_star(self, z) -> np.ndarray:
        """Gradient of the Fenchel conjugate h* (the dual-to-primal map).

        Inverse of ``grad_h``: grad_h_star(grad_h(theta)) == theta.
        """

    @abstractmethod
    def dual_sq(self, z) -> float:
        """Squared dual norm ||z||_*^2 paired with h's strong convexity."""

    def bregman(self, x, y) -> float:
        """Bregman divergence B_h(x, y) = h(x) - h(y) - <grad h(y), x - y>.

        Nonnegative for convex h; the generic implementation may return a
        value as low as -1e-12 from rounding.
        """
        x = as_vector(x)
        y = as_vector(y, x.shape[0], name="y")
        return float(self.h(x) - self.h(y) - np.dot(self.grad_h(y), x - y))


@dataclass(frozen=True, eq=False)
class Euclidean(MirrorMap):
    """Diagonal quadratic potential with positive weights ``lam``."""

    lam: np.ndarray

    def __post_init__(self):
        lam = as_vector(self.lam, name="lam")
        if np.any(lam <= 0.0):
            raise ValueError("lam must be strictly positive")
        object.__setattr__(self, "lam", lam)

    def h(self, theta) -> float:
        theta = as_vector(theta, self.lam.shape[0])
        return 0.5 * float(np.dot(self.lam * theta, theta))

    def grad_h(self, theta) -> np.ndarray:
        return self.lam * as_vector(theta, self.lam.shape[0])

    def grad_h_star(self, z) -> np.ndarray:
        return as_vector(z, self.lam.shape[0], name="z") / self.lam

    def dual_sq(self, z) -> float:
        z = as_vector(z, self.lam.shape[0], name="z")
        return float(np.dot(z / self.lam, z))

    def bregman(self, x, y) -> float:
        x = as_vector(x, self.lam.shape[0])
        y = as_vector(y, self.lam.shape[0], name="y")
        diff = x - y
        return 0.5 * float(np.dot(self.lam * diff, diff))


@dataclass(frozen=True, eq=False)
class FullEuclidean(MirrorMap):
    """Quadratic potential (1/2) theta' A theta, A symmetric positive definite.

    The Cholesky factor is computed at construction; a matrix that is not
    SPD (within symmetry tolerance 1e-10) raises ValueError immediately.
    """

    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be a square matrix")
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-10 * max(1.0, np.abs(A).max())):
            raise ValueError("A must be symmetric")
        A = 0.5 * (A + A.T)
        try:
            chol = np.linalg.cholesky(A)
        except np.linalg.LinAlgError as exc:
            raise ValueError("A must be positive definite") from exc
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "_chol", chol)
        ident = np.eye(A.shape[0])
        inv = np.linalg.solve(A, ident)
        object.__setattr__(self, "A_inv", 0.5 * (inv + inv.T))

    def h(self, theta) -> float:
        theta = as_vector(theta, self.A.shape[0])
        return 0.5 * float(theta @ self.A @ theta)

    def grad_h(self, theta) -> np.ndarray:
        return self.A @ as_vector(theta, self.A.shape[0])

    def grad_h_star(self, z) -> np.ndarray:
        return self.A_inv @ as_vector(z, self.A.shape[0], name="z")

    def dual_sq(self, z) -> float:
        z = as_vector(z, self.A.shape[0], name="z")
        return float(z @ self.A_inv @ z)

    def bregman(self, x, y) -> float:
        x = as_vector(x, self.A.shape[0])
        y = as_vector(y, self.A.shape[0], name="y")
        diff = x - y
        return 0.5 * float(diff @ self.A @ diff)


@dataclass(frozen=True, eq=False)
class PNorm(MirrorMap):
    """Potential ||theta||_a^2 / (2 (a - 1)) for a in (1, 2].

    Gradients
    ---------
    With u = ||theta||_a and a* = a / (a - 1),

        grad h(theta)_j = sign(theta_j) |theta_j|^{a-1} u^{2-a} / (a - 1),
        grad h*(z)_j    = (a - 1) sign(z_j) |z_j|^{a*-1} ||z||_{a*}^{2-a*},

    and the two maps are mutually inverse. Both send 0 to 0 by convention.
    """

    a: float

    def __post_init__(self):
        if not (1.0 < self.a <= 2.0):
            raise ValueError("PNorm exponent a must lie in (1, 2]")
        object.__setattr__(self, "a", float(self.a))

    @property
    def a_star(self) -> float:
        return conjugate_exponent(self.a)

    def h(self, theta) -> float:
        theta = as_vector(theta)
        u = np.sum(np.abs(theta) ** self.a) ** (1.0 / self.a)
        return float(u * u) / (2.0 * (self.a - 1.0))

    def grad_h(self, theta) -> np.ndarray:
        theta = as_vector(theta)
        if not np.any(theta):
            return np.zeros_like(theta)
        mag = np.abs(theta)
        u = np.sum(mag ** self.a) ** (1.0 / self.a)
        return np.sign(theta) * mag ** (self.a - 1.0) * u ** (2.0 - self.a) / (self.a - 1.0)

    def grad_h_star(self, z) -> np.ndarray:
        z = as_vector(z, name="z")
        if not np.any(z):
            return np.zeros_like(z)
        astar = self.a_star
        mag = np.abs(z)
        u = np.sum(mag ** astar) ** (1.0 / astar)
        return (self.a - 1.0) * np.sign(z) * mag ** (astar - 1.0) * u ** (2.0 - astar)

    def dual_sq(self, z) -> float:
        z = as_vector(z, name="z")
        astar = self.a_star
        if not np.any(z):
            return 0.0
        return float(np.sum(np.abs(z) ** astar) ** (2.0 / astar))


def grad_h(mirror_map: MirrorMap, theta) -> np.ndarray:
    return mirror_map.grad_h(theta)


def grad_h_star(mirror_map: MirrorMap, z) -> np.ndarray:
    return mirror_map.grad_h_star(z)


def bregman(mirror_map: MirrorMap, x, y) -> float:
    return mirror_map.bregman(x, y)
