"""Norm and constraint-set descriptors with exact dual/support calculus.

Everything here is a pure function of immutable descriptors: norms gamma
(plain l_p or weighted l_r), constraint sets Theta (l_p balls, weighted l_r
balls, axis-aligned boxes), their dual norms, quadratic hulls, support values
sup {theta' g : theta in Theta, g in QHull(unit gamma-ball)}, and
best-in-hindsight comparators for linear losses.

Infinite exponents are represented by the module constant ``INF`` (IEEE inf)
and are always branch-guarded: no code path ever evaluates ``x ** INF``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INF = float("inf")

#: relative tolerance for set membership tests
MEMBERSHIP_RTOL = 1e-12


def conjugate_exponent(p: float) -> float:
    """Return p* with 1/p + 1/p* = 1; conjugate of 1 is INF and vice versa."""
    if not p >= 1.0:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    if p == 1.0:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def _inv(p: float) -> float:
    # 1/p with the INF branch made explicit
    return 0.0 if p == INF else 1.0 / p


def as_vector(x, d: int | None = None, name: str = "x") -> np.ndarray:
    """Validate a finite 1-d float64 vector (scalars become length-1 vectors).

    Raises:
        ValueError: on non-finite entries or a dimension mismatch.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite entries (no NaN/Inf)")
    if d is not None and arr.shape[0] != d:
        raise ValueError(f"{name} has dimension {arr.shape[0]}, expected {d}")
    return arr


def _pnorm(x: np.ndarray, p: float) -> float:
    # branch-guarded l_p norm, p in [1, INF]
    if p == INF:
        return float(np.max(np.abs(x))) if x.size else 0.0
    if p == 1.0:
        return float(np.sum(np.abs(x)))
    if p == 2.0:
        return float(np.sqrt(np.dot(x, x)))
    mag = np.abs(x)
    top = float(np.max(mag)) if x.size else 0.0
    if top == 0.0 or not np.isfinite(top):
        return top
    # factor out the max so large p cannot underflow the powers
    return top * float(np.sum((mag / top) ** p) ** (1.0 / p))


def _sign_plus(x: np.ndarray) -> np.ndarray:
    # sign with the deterministic convention sign(0) := +1
    return np.where(x >= 0.0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormDescriptor:
    """A gradient/parameter norm gamma.

    kind "lp" is gamma(x) = ||x||_p; kind "weighted_lr" is
    gamma(x) = ||beta (.) x||_r with strictly positive weights beta.
    """

    kind: str
    exponent: float
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("lp", "weighted_lr"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if not (self.exponent >= 1.0):
            raise ValueError("norm exponent must be >= 1 (INF permitted)")
        if self.kind == "weighted_lr":
            if self.weights is None:
                raise ValueError("weighted_lr norm requires weights")
            w = as_vector(self.weights, name="weights")
            if np.any(w <= 0.0):
                raise ValueError("weights must be strictly positive")
            object.__setattr__(self, "weights", w)
        elif self.weights is not None:
            raise ValueError("lp norm takes no weights")

    @property
    def dimension(self) -> int | None:
        return None if self.weights is None else int(self.weights.shape[0])

    def value(self, x) -> float:
        """gamma(x)."""
        x = as_vector(x, self.dimension)
        if self.kind == "weighted_lr":
            return _pnorm(self.weights * x, self.exponent)
        return _pnorm(x, self.exponent)

    def dual_value(self, x) -> float:
        """gamma*(x) = sup {<z, x> : gamma(z) <= 1}."""
        x = as_vector(x, self.dimension)
        if self.kind == "weighted_lr":
            return _pnorm(x / self.weights, conjugate_exponent(self.exponent))
        return _pnorm(x, conjugate_exponent(self.exponent))

    def unit_vector_values(self, d: int) -> np.ndarray:
        """The vector (gamma(e_1), ..., gamma(e_d))."""
        if self.kind == "weighted_lr":
            return as_vector(self.weights, d).copy()
        return np.ones(d)


def lp_norm(p: float) -> NormDescriptor:
    return NormDescriptor("lp", float(p))


def weighted_lr_norm(r: float, weights) -> NormDescriptor:
    return NormDescriptor("weighted_lr", float(r), as_vector(weights, name="weights"))


@dataclass(frozen=True, eq=False)
class SetDescriptor:
    """A constraint set Theta.

    kind "lp_ball": {theta : ||theta||_p <= radius};
    kind "weighted_lr_ball": {theta : ||w (.) theta||_r <= radius};
    kind "box": the hyperrectangle prod_j [-a_j, a_j] (half_widths a).
    """

    kind: str
    exponent: float | None = None
    weights: np.ndarray | None = None
    radius: float = 1.0
    half_widths: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "lp_ball":
            if self.exponent is None or not (self.exponent >= 1.0):
                raise ValueError("lp_ball needs exponent >= 1")
            if self.weights is not None or self.half_widths is not None:
                raise ValueError("lp_ball takes neither weights nor half_widths")
        elif self.kind == "weighted_lr_ball":
            if self.exponent is None or not (self.exponent >= 1.0):
                raise ValueError("weighted_lr_ball needs exponent >= 1")
            if self.weights is None:
                raise ValueError("weighted_lr_ball requires weights")
            w = as_vector(self.weights, name="weights")
            if np.any(w <= 0.0):
                raise ValueError("weights must be strictly positive")
            object.__setattr__(self, "weights", w)
        elif self.kind == "box":
            if self.half_widths is None:
                raise ValueError("box requires half_widths")
            a = as_vector(self.half_widths, name="half_widths")
            if np.any(a <= 0.0):
                raise ValueError("half_widths must be strictly positive")
            object.__setattr__(self, "half_widths", a)
            if self.exponent is not None or self.weights is not None:
                raise ValueError("box takes only half_widths")
        else:
            raise ValueError(f"unknown set kind {self.kind!r}")
        if self.kind != "box" and not (self.radius > 0.0):
            raise ValueError("radius must be positive")

    @property
    def dimension(self) -> int | None:
        if self.kind == "box":
            return int(self.half_widths.shape[0])
        if self.kind == "weighted_lr_ball":
            return int(self.weights.shape[0])
        return None

    def contains(self, x, rtol: float = MEMBERSHIP_RTOL) -> bool:
        """Membership test, consistent with the defining inequality."""
        x = as_vector(x, self.dimension)
        if self.kind == "box":
            return bool(np.all(np.abs(x) <= self.half_widths * (1.0 + rtol)))
        if self.kind == "weighted_lr_ball":
            val = _pnorm(self.weights * x, self.exponent)
        else:
            val = _pnorm(x, self.exponent)
        return val <= self.radius * (1.0 + rtol)


def lp_ball(p: float, radius: float = 1.0) -> SetDescriptor:
    return SetDescriptor("lp_ball", exponent=float(p), radius=float(radius))


def weighted_lr_ball(r: float, weights, radius: float = 1.0) -> SetDescriptor:
    return SetDescriptor(
        "weighted_lr_ball",
        exponent=float(r),
        weights=as_vector(weights, name="weights"),
        radius=float(radius),
    )


def box(half_widths) -> SetDescriptor:
    return SetDescriptor("box", half_widths=as_vector(half_widths, name="half_widths"))


def resolve_dimension(*objs, d: int | None = None) -> int:
    """Reconcile the dimension implied by descriptors/vectors with ``d``."""
    found = None if d is None else int(d)
    for obj in objs:
        if obj is None:
            continue
        dim = obj.dimension if hasattr(obj, "dimension") else len(obj)
        if dim is None:
            continue
        if found is None:
            found = int(dim)
        elif found != int(dim):
            raise ValueError(f"dimension mismatch: {found} vs {dim}")
    if found is None:
        raise ValueError("dimension is not determined; pass d explicitly")
    return found


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def dual_norm(norm: NormDescriptor, x) -> float:
    """gamma*(x): for l_p this is ||x||_{p*}; for ||beta (.) g||_r it is
    ||x / beta||_{r*}."""
    return norm.dual_value(x)


def qhull(norm: NormDescriptor) -> NormDescriptor:
    """The norm whose unit ball is the quadratic hull of the input's.

    For exponent r <= 2 (weighted or not) this is the same-weights l_2 norm;
    for r >= 2 the ball is already quadratically convex and the input is
    returned unchanged.
    """
    if norm.exponent >= 2.0:
        return norm
    if norm.kind == "weighted_lr":
        return weighted_lr_norm(2.0, norm.weights)
    return lp_norm(2.0)


def _theta_params(s: SetDescriptor, d: int) -> tuple[np.ndarray, float, float]:
    # canonical form Theta = {||omega (.) theta||_pi <= rho}
    if s.kind == "box":
        return 1.0 / s.half_widths, INF, 1.0
    if s.kind == "lp_ball":
        return np.ones(d), s.exponent, s.radius
    return s.weights, s.exponent, s.radius


def support_value(s: SetDescriptor, norm: NormDescriptor, d: int | None = None) -> float:
    """sup over theta in Theta, g in QHull(unit gamma-ball) of theta' g.

    Closed form: writing Theta = {||omega (.) theta||_pi <= rho} and the hull
    ball as {||beta (.) g||_s <= 1} (s = max(r, 2)), three-factor Holder gives

        sup = rho * ||c||_t,   c_j = 1 / (omega_j beta_j),  1/t = 1 - 1/s - 1/pi,

    attained at y_j ~ c_j^{t/pi}, z_j ~ c_j^{t/s}. For unweighted pairs with
    pi < 2 the exponent 1/t is clamped at 0 (sup = rho * d^{max(0, 1-1/s-1/pi)}).
    Weighted combinations with a non-quadratically-convex Theta are rejected.

    Raises:
        ValueError: unsupported descriptor combination.
    """
    d = resolve_dimension(s, norm, d=d)
    omega, pi, rho = _theta_params(s, d)
    hull = qhull(norm)
    beta = hull.unit_vector_values(d)
    sexp = hull.exponent
    weighted = np.any(omega != 1.0) or np.any(beta != 1.0)
    inv_t = 1.0 - _inv(sexp) - _inv(pi)
    if pi < 2.0:
        if weighted:
            raise ValueError(
                "unsupported descriptor combination: weighted support over a "
                "non-quadratically-convex set"
            )
        return rho * float(d) ** max(0.0, inv_t)
    c = 1.0 / (omega * beta)
    if inv_t <= 0.0:
        # pi = s = 2: the bilinear sup is the largest diagonal gain
        return rho * float(np.max(c))
    return rho * _pnorm(c, 1.0 / inv_t)


def best_in_hindsight(s: SetDescriptor, G) -> tuple[np.ndarray, float]:
    """Minimizer and value of inf {<G, theta> : theta in Theta}.

    For an l_p ball of radius rho the value is -rho ||G||_{p*}; for Box(a) it
    is -sum_j a_j |G_j| with theta*_j = -a_j sign(G_j); for a weighted ball
    the substitution y = w (.) theta reduces to the l_p case. G = 0 returns
    (0, 0.0). Vertex selections follow the sign(0) := +1 convention, with
    ties broken by lowest coordinate index.
    """
    G = as_vector(G, s.dimension, name="G")
    d = G.shape[0]
    if not np.any(G):
        return np.zeros(d), 0.0
    if s.kind == "box":
        a = s.half_widths
        theta = -a * _sign_plus(G)
        return theta, float(np.dot(G, theta))
    if s.kind == "weighted_lr_ball":
        y, _ = best_in_hindsight(lp_ball(s.exponent, s.radius), G / s.weights)
        theta = y / s.weights
        return theta, float(np.dot(G, theta))
    p, rho = s.exponent, s.radius
    pstar = conjugate_exponent(p)
    if p == 1.0:
        j = int(np.argmax(np.abs(G)))  # lowest index on ties
        theta = np.zeros(d)
        theta[j] = -rho * np.sign(G[j])
        return theta, float(np.dot(G, theta))
    if p == INF:
        theta = -rho * _sign_plus(G)
        return theta, float(np.dot(G, theta))
    mag = np.abs(G) ** (pstar - 1.0)
    theta = -rho * np.sign(G) * mag / _pnorm(G, pstar) ** (pstar - 1.0)
    return theta, float(np.dot(G, theta))


# ---------------------------------------------------------------------------
# config-dict serialization (shared by CLI configs and JSON sidecars)
# ---------------------------------------------------------------------------

def _exp_to_json(p: float):
    return "inf" if p == INF else p


def _exp_from_json(p) -> float:
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity"):
            return INF
        raise ValueError(f"bad exponent {p!r}")
    return float(p)


def set_to_config(s: SetDescriptor) -> dict:
    """Plain-dict form of a set descriptor, JSON ready."""
    if s.kind == "box":
        return {"kind": "box", "a": s.half_widths.tolist()}
    out = {"kind": s.kind, "radius": s.radius}
    key = "p" if s.kind == "lp_ball" else "r"
    out[key] = _exp_to_json(s.exponent)
    if s.weights is not None:
        out["weights"] = s.weights.tolist()
    return out


def set_from_config(cfg: dict) -> SetDescriptor:
    """Inverse of ``set_to_config``; raises ValueError naming the bad field."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ValueError("set config must be a dict with a 'kind' field")
    kind = cfg["kind"]
    if kind == "box":
        if "a" not in cfg:
            raise ValueError("box set config needs field 'a' (half widths)")
        return box(cfg["a"])
    radius = float(cfg.get("radius", 1.0))
    if kind == "lp_ball":
        if "p" not in cfg:
            raise ValueError("lp_ball set config needs field 'p'")
        return lp_ball(_exp_from_json(cfg["p"]), radius)
    if kind == "weighted_lr_ball":
        if "r" not in cfg or "weights" not in cfg:
            raise ValueError("weighted_lr_ball set config needs 'r' and 'weights'")
        return weighted_lr_ball(_exp_from_json(cfg["r"]), cfg["weights"], radius)
    raise ValueError(f"unknown set kind {kind!r}")


def norm_to_config(norm: NormDescriptor) -> dict:
    """Plain-dict form of a norm descriptor, JSON ready."""
    if norm.kind == "lp":
        return {"kind": "lp", "p": _exp_to_json(norm.exponent)}
    return {"kind": "weighted_lr", "r": _exp_to_json(norm.exponent),
            "weights": norm.weights.tolist()}


def norm_from_config(cfg: dict) -> NormDescriptor:
    """Inverse of ``norm_to_config``; raises ValueError naming the bad field."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ValueError("norm config must be a dict with a 'kind' field")
    kind = cfg["kind"]
    if kind == "lp":
        if "p" not in cfg:
            raise ValueError("lp norm config needs field 'p'")
        return lp_norm(_exp_from_json(cfg["p"]))
    if kind == "weighted_lr":
        if "r" not in cfg or "weights" not in cfg:
            raise ValueError("weighted_lr norm config needs 'r' and 'weights'")
        return weighted_lr_norm(_exp_from_json(cfg["r"]), cfg["weights"])
    raise ValueError(f"unknown norm kind {kind!r}")


def dual_attainment(beta: np.ndarray, sexp: float, theta: np.ndarray) -> np.ndarray:
    """A maximizer of <theta, g> over {g : ||beta (.) g||_s <= 1}.

    Coordinates with theta_j = 0 get g_j = 0. Used by the optimal
    preconditioner calculus; exact for s in [1, INF].
    """
    theta = np.asarray(theta, dtype=np.float64)
    z = np.abs(theta) / beta
    if not np.any(z):
        return np.zeros_like(theta)
    if sexp == INF:
        g = np.sign(theta) / beta
        g[theta == 0.0] = 0.0
        return g
    sstar = conjugate_exponent(sexp)
    if sstar == INF:
        # s = 1: put all mass on the best coordinate (lowest index on ties)
        j = int(np.argmax(z))
        g = np.zeros_like(theta)
        g[j] = np.sign(theta[j]) / beta[j]
        return g
    nz = _pnorm(z, sstar)
    return np.sign(theta) * z ** (sstar - 1.0) / (beta * nz ** (sstar - 1.0))
