"""Experiment orchestration: config parsing, single runs, (d, n) sweeps,
exponent fitting, and CSV/JSON emission.

A single JSON document drives everything. Shape:

    {
      "seed": 0,
      "d": 16,                  // or a list for sweeps
      "n": 1024,                // or a list for sweeps
      "repetitions": 1,
      "workers": 1,
      "instance": { "type": "adversarial" | "stochastic", ... },
      "optimizer": { "algorithm": "ogd" | "diag_scaled" | "full_euclidean"
                     | "pnorm_md" | "dual_averaging" | "adagrad_diag", ... },
      "comparator": { set descriptor }   // optional override
    }

Descriptors use the geometry config dicts ({"kind": "lp_ball", "p": 2,
"radius": 1} and friends). Adversarial instances are deterministic, so the
seed only feeds stochastic sampling; repetition r of a cell uses stream
seed + r. Vector-valued fields accept shorthands that scale with d inside
sweeps: "ones", "alternating" (signs), "harmonic" (beta_j = j), or a scalar
to broadcast. Step sizes accept {"scale": c, "power": rho} meaning
alpha = c * n^rho.

All CSV output is RFC 4180 with a header row and floats at 17 significant
digits; identical (config, seed) pairs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import adversaries, optimizers, rates, stochastic_instances as stoch
from .geometry import (
    SetDescriptor,
    box,
    lp_ball,
    lp_norm,
    norm_from_config,
    set_from_config,
)
from .mirror_maps import Euclidean, FullEuclidean, PNorm


class ConfigError(ValueError):
    """Config validation failure; the message names the offending field."""


def _cfg_get(cfg: dict, key: str, where: str, required: bool = True, default=None):
    if key not in cfg:
        if required:
            raise ConfigError(f"{where}.{key}: missing required field")
        return default
    return cfg[key]


def _as_int(value, where: str, minimum: int = 1) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"{where}: expected an integer >= {minimum}, got {value!r}")
    return value


def _int_list(value, where: str) -> list[int]:
    vals = value if isinstance(value, list) else [value]
    if not vals:
        raise ConfigError(f"{where}: list must be nonempty")
    return [_as_int(v, where) for v in vals]


def _vector_field(value, d: int, where: str) -> np.ndarray:
    """Resolve a config vector: list, scalar broadcast, or a named family."""
    if isinstance(value, str):
        if value == "ones":
            return np.ones(d)
        if value == "alternating":
            return np.where(np.arange(d) % 2 == 0, 1.0, -1.0)
        if value == "harmonic":
            return np.arange(1, d + 1, dtype=np.float64)
        raise ConfigError(f"{where}: unknown vector shorthand {value!r}")
    if isinstance(value, (int, float)):
        return np.full(d, float(value))
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != d:
        raise ConfigError(f"{where}: expected a length-{d} vector")
    return arr


def _step_size(value, n: int, where: str) -> float:
    if isinstance(value, dict):
        scale = float(value.get("scale", 1.0))
        power = float(value.get("power", 0.0))
        return scale * float(n) ** power
    if isinstance(value, (int, float)) and float(value) > 0.0:
        return float(value)
    raise ConfigError(f"{where}: expected a positive number or "
                      "{'scale': c, 'power': rho}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description (one cell or a whole sweep)."""

    seed: int
    d_list: list[int]
    n_list: list[int]
    repetitions: int
    workers: int
    instance_cfg: dict
    optimizer_cfg: dict
    comparator_cfg: dict | None
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def is_sweep(self) -> bool:
        return len(self.d_list) > 1 or len(self.n_list) > 1 or self.repetitions > 1


def parse_config(cfg: dict) -> ExperimentConfig:
    """Validate the config document; errors carry field-level locations."""
    if not isinstance(cfg, dict):
        raise ConfigError("config: expected a JSON object")
    seed = _cfg_get(cfg, "seed", "config")
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("config.seed: expected a nonnegative integer")
    d_list = _int_list(_cfg_get(cfg, "d", "config"), "config.d")
    n_list = _int_list(_cfg_get(cfg, "n", "config"), "config.n")
    reps = _as_int(cfg.get("repetitions", 1), "config.repetitions")
    workers = _as_int(cfg.get("workers", 1), "config.workers")
    instance_cfg = _cfg_get(cfg, "instance", "config")
    if not isinstance(instance_cfg, dict):
        raise ConfigError("config.instance: expected an object")
    if instance_cfg.get("type") not in ("adversarial", "stochastic"):
        raise ConfigError(
            "config.instance.type: expected 'adversarial' or 'stochastic'")
    optimizer_cfg = _cfg_get(cfg, "optimizer", "config")
    if not isinstance(optimizer_cfg, dict):
        raise ConfigError("config.optimizer: expected an object")
    if "algorithm" not in optimizer_cfg:
        raise ConfigError("config.optimizer.algorithm: missing required field")
    comparator_cfg = cfg.get("comparator")
    if comparator_cfg is not None and not isinstance(comparator_cfg, dict):
        raise ConfigError("config.comparator: expected an object")
    # validate one cell eagerly so bad descriptors fail before any run
    _build_instance(instance_cfg, d_list[0], n_list[0], seed)
    return ExperimentConfig(seed, d_list, n_list, reps, workers,
                            instance_cfg, optimizer_cfg, comparator_cfg, cfg)


# ---------------------------------------------------------------------------
# instance / optimizer construction
# ---------------------------------------------------------------------------

def _build_instance(icfg: dict, d: int, n: int, seed: int):
    where = "config.instance"
    itype = icfg["type"]
    kind = _cfg_get(icfg, "kind", where)
    if itype == "adversarial":
        if kind == "lp":
            p = float(_cfg_get(icfg, "p", where))
            lam = icfg.get("lam", 1.0)
            lam_vec = _vector_field(lam, d, where + ".lam")
            try:
                return adversaries.lp_hard_instance(lam_vec, p, d, n)
            except ValueError as exc:
                raise ConfigError(f"{where}: {exc}") from exc
        if kind == "wlp":
            beta = _vector_field(_cfg_get(icfg, "beta", where), d, where + ".beta")
            alpha = float(icfg.get("alpha", 1.0))
            try:
                return adversaries.wlp_hard_instance(beta, alpha, d, n)
            except ValueError as exc:
                raise ConfigError(f"{where}: {exc}") from exc
        raise ConfigError(f"{where}.kind: unknown adversarial kind {kind!r}")
    gamma = norm_from_config(icfg["gamma"]) if "gamma" in icfg else None
    comparator = (set_from_config(icfg["comparator"])
                  if "comparator" in icfg else None)
    try:
        if kind == "sparse_coord":
            v = _vector_field(icfg.get("v", "ones"), d, where + ".v")
            return stoch.sparse_coord(v, float(_cfg_get(icfg, "delta", where)),
                                      gamma, comparator)
        if kind == "dense_sign":
            v = _vector_field(icfg.get("v", "ones"), d, where + ".v")
            eta = icfg.get("eta")
            return stoch.dense_sign(v, float(_cfg_get(icfg, "delta", where)),
                                    gamma, comparator,
                                    None if eta is None else float(eta))
        if kind == "rect_abs":
            v = _vector_field(icfg.get("v", "ones"), d, where + ".v")
            a = _vector_field(icfg.get("a", 1.0), d, where + ".a")
            delta = _vector_field(_cfg_get(icfg, "delta", where), d,
                                  where + ".delta")
            pw = icfg.get("p_weights")
            pw_vec = None if pw is None else _vector_field(pw, d, where + ".p_weights")
            return stoch.rect_abs(v, delta, a, gamma, pw_vec, comparator)
        if kind == "one_dim":
            if d != 1:
                raise ConfigError("config.d: one_dim instances require d = 1")
            return stoch.one_dim(float(_cfg_get(icfg, "delta", where)),
                                 float(icfg.get("v", 1.0)))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.kind: unknown stochastic kind {kind!r}")


def _build_mirror_map(mcfg, d: int, where: str):
    if not isinstance(mcfg, dict) or "kind" not in mcfg:
        raise ConfigError(f"{where}: expected a mirror map object with 'kind'")
    kind = mcfg["kind"]
    try:
        if kind == "euclidean":
            return Euclidean(_vector_field(mcfg.get("lam", 1.0), d,
                                           where + ".lam"))
        if kind == "full_euclidean":
            return FullEuclidean(np.asarray(mcfg["A"], dtype=np.float64))
        if kind == "pnorm":
            return PNorm(float(mcfg["a"]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.kind: unknown mirror map kind {kind!r}")


def _build_optimizer(ocfg: dict, instance, d: int, n: int):
    where = "config.optimizer"
    algo = ocfg["algorithm"]
    theta0 = None
    if "theta0" in ocfg:
        theta0 = _vector_field(ocfg["theta0"], d, where + ".theta0")
    projection = None
    if ocfg.get("projection") is not None:
        try:
            projection = set_from_config(ocfg["projection"])
        except ValueError as exc:
            raise ConfigError(f"{where}.projection: {exc}") from exc
    common = {"theta0": theta0, "projection": projection}
    try:
        if algo == "ogd":
            alpha = _step_size(_cfg_get(ocfg, "alpha", where), n, where + ".alpha")
            return optimizers.OGD(alpha, **common)
        if algo == "diag_scaled":
            lam = _vector_field(_cfg_get(ocfg, "lam", where), d, where + ".lam")
            return optimizers.DiagScaled(lam, **common)
        if algo == "full_euclidean":
            A = np.asarray(_cfg_get(ocfg, "A", where), dtype=np.float64)
            alpha = _step_size(ocfg.get("alpha", 1.0), n, where + ".alpha")
            return optimizers.FullEuclidean(A, alpha, **common)
        if algo == "pnorm_md":
            a = ocfg.get("a", "auto")
            if a == "auto":
                a = 1.0 + 1.0 / math.log(2.0 * d)
            alpha = ocfg.get("alpha", "auto")
            if alpha == "auto":
                alpha = optimizers.pnorm_default_stepsize(
                    _instance_set(instance), _instance_norm(instance),
                    float(a), n, d=d)
            else:
                alpha = _step_size(alpha, n, where + ".alpha")
            return optimizers.PNormMD(float(a), alpha, **common)
        if algo == "dual_averaging":
            mm = _build_mirror_map(_cfg_get(ocfg, "mirror_map", where), d,
                                   where + ".mirror_map")
            alpha = _step_size(_cfg_get(ocfg, "alpha", where), n, where + ".alpha")
            return optimizers.DualAveraging(mm, alpha, **common)
        if algo == "adagrad_diag":
            eta = float(ocfg.get("eta", math.sqrt(2.0)))
            eps = float(ocfg.get("eps", 1e-12))
            return optimizers.AdaGradDiag(eta, eps, **common)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.algorithm: unknown algorithm {algo!r}")


def _instance_set(instance) -> SetDescriptor:
    return instance.comparator_set


def _instance_norm(instance):
    if isinstance(instance, adversaries.AdversarialInstance):
        return instance.gradient_norm
    return instance.gamma


# ---------------------------------------------------------------------------
# single runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegretTrace:
    """Per-step metric curve plus attached analytic certificates.

    ``values[i]`` is the cumulative regret through step i + 1 for
    adversarial runs, or the optimality gap of the averaged iterate
    bar(theta)_{i+1} for stochastic runs. ``bounds`` maps certificate names
    (certified_lower, md_upper, adagrad_upper, rate_lower, rate_upper)
    to numbers.
    """

    kind: str
    steps: np.ndarray
    values: np.ndarray
    bounds: dict
    final_metric: float
    meta: dict


def run_experiment(config: ExperimentConfig | dict, d: int | None = None,
                   n: int | None = None, rep: int = 0) -> RegretTrace:
    """Execute one experiment cell deterministically.

    For sweep configs, ``d``/``n`` select the cell (defaults: first entry of
    each list); ``rep`` shifts the sampling stream by seed + rep.
    """
    if isinstance(config, dict):
        config = parse_config(config)
    d = config.d_list[0] if d is None else d
    n = config.n_list[0] if n is None else n
    instance = _build_instance(config.instance_cfg, d, n, config.seed)
    spec = _build_optimizer(config.optimizer_cfg, instance, d, n)
    if isinstance(instance, adversaries.AdversarialInstance):
        return _run_adversarial(config, instance, spec, d, n, rep)
    return _run_stochastic(config, instance, spec, d, n, rep)


def _comparator(config: ExperimentConfig, instance) -> SetDescriptor:
    if config.comparator_cfg is not None:
        try:
            return set_from_config(config.comparator_cfg)
        except ValueError as exc:
            raise ConfigError(f"config.comparator: {exc}") from exc
    return instance.comparator_set


def _md_bound_pieces(spec, theta_star, theta0, G):
    """(name, value) for the pathwise upper certificate of this algorithm."""
    if isinstance(spec, optimizers.OGD):
        mm, alpha = Euclidean(np.ones(G.shape[1])), spec.alpha
    elif isinstance(spec, optimizers.DiagScaled):
        if not np.all(np.isfinite(spec.lam)):
            return None  # frozen coordinates have no finite quadratic map
        mm, alpha = Euclidean(spec.lam), 1.0
    elif isinstance(spec, optimizers.FullEuclidean):
        mm, alpha = spec._map, spec.alpha
    elif isinstance(spec, optimizers.PNormMD):
        mm, alpha = spec._map, spec.alpha
    elif isinstance(spec, optimizers.DualAveraging) and spec.schedule is None:
        mm, alpha = spec.mirror_map, spec.alpha
    elif isinstance(spec, optimizers.AdaGradDiag):
        return ("adagrad_upper", optimizers.adagrad_bound(G))
    else:
        return None
    return ("md_upper",
            optimizers.md_regret_bound(mm, alpha, theta_star, theta0, G))


def _run_adversarial(config, instance, spec, d, n, rep) -> RegretTrace:
    comparator = _comparator(config, instance)
    G = instance.gradients
    values = optimizers.regret_curve(spec, G, comparator)
    theta_star, _ = optimizers.best_in_hindsight(comparator, G.sum(axis=0))
    bounds = {"certified_lower": instance.certified_lower_bound}
    piece = _md_bound_pieces(spec, theta_star, spec.start_point(d), G)
    if piece is not None:
        bounds[piece[0]] = piece[1]
    meta = {"d": d, "n": n, "rep": rep, "seed": config.seed,
            "instance_kind": instance.meta.get("kind"),
            "algorithm": config.optimizer_cfg["algorithm"]}
    return RegretTrace("adversarial", np.arange(1, n + 1), values, bounds,
                       float(values[-1]), meta)


def _run_stochastic(config, instance, spec, d, n, rep) -> RegretTrace:
    seed = config.seed + rep
    checkpoints = np.arange(1, n + 1)
    if instance.kind in ("sparse_coord", "dense_sign"):
        G = stoch.gradient_sequence(instance, seed, n)
        result = optimizers.run(spec, G, checkpoints)
        sums = result.theta_sums
    else:
        state = optimizers.init_state(spec, d)
        sums = np.empty((n, d))
        running = np.zeros(d)
        for i in range(n):
            x = stoch.sample(instance, seed, i)
            g = stoch.subgradient(instance, state.theta, x)
            running += state.theta
            sums[i] = running
            state = optimizers.step(state, g)
    averages = sums / checkpoints[:, None].astype(np.float64)
    values = stoch.population_gap_rows(instance, averages)
    bounds = {}
    try:
        rb = rates.minimax_rate(instance.comparator_set, instance.gamma, d, n)
        bounds["rate_lower"] = rb.lower
        bounds["rate_upper"] = rb.upper
    except ValueError:
        pass
    meta = {"d": d, "n": n, "rep": rep, "seed": config.seed,
            "instance_kind": instance.kind,
            "algorithm": config.optimizer_cfg["algorithm"]}
    return RegretTrace("stochastic", checkpoints, values, bounds,
                       float(values[-1]), meta)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def sweep(config: ExperimentConfig | dict) -> list[dict]:
    """Run every (d, n, rep) cell; returns rows sorted by that key.

    Cells execute on up to ``config.workers`` threads (the trajectory
    kernels drop the GIL); each cell derives its own sampling stream, so the
    result is independent of scheduling order.
    """
    if isinstance(config, dict):
        config = parse_config(config)
    cells = [(d, n, r) for d in config.d_list for n in config.n_list
             for r in range(config.repetitions)]

    def one(cell):
        d, n, r = cell
        trace = run_experiment(config, d, n, r)
        row = {"d": d, "n": n, "rep": r, "final_metric": trace.final_metric}
        row.update(trace.bounds)
        return row

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(one, cells))
    else:
        rows = [one(c) for c in cells]
    rows.sort(key=lambda r: (r["d"], r["n"], r["rep"]))
    return rows


def median_by_cell(rows: list[dict]) -> list[dict]:
    """Collapse repetitions to the median final_metric per (d, n)."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        groups.setdefault((row["d"], row["n"]), []).append(row["final_metric"])
    return [{"d": d, "n": n, "final_metric": float(np.median(vals))}
            for (d, n), vals in sorted(groups.items())]


def fit_exponent(points) -> tuple[float, float, float]:
    """Least-squares fit of log y on log x: returns (slope, intercept, r2).

    ``points`` is an iterable of (x, y) pairs, at least 3, all positive.
    A constant y is a perfect slope-0 fit (r2 = 1).
    """
    pts = np.asarray(list(points), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 (x, y) pairs")
    if np.any(pts <= 0.0):
        raise ValueError("x and y must be strictly positive")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(slope), float(intercept), r2


# ---------------------------------------------------------------------------
# file output
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_trace_csv(trace: RegretTrace, path: str):
    """Write step,value rows plus a JSON sidecar with bounds and metadata."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "value"])
        for s, v in zip(trace.steps, trace.values):
            writer.writerow([int(s), _fmt(float(v))])
    sidecar = {"kind": trace.kind, "final_metric": trace.final_metric,
               "bounds": trace.bounds, "meta": trace.meta}
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def write_table_csv(rows: list[dict], path: str):
    """Write sweep rows with a stable column order: d, n, rep, final_metric,
    then any bound columns in sorted name order (blank where absent)."""
    extra = sorted({k for row in rows for k in row}
                   - {"d", "n", "rep", "final_metric"})
    header = ["d", "n", "rep", "final_metric"] + extra
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            out = [row["d"], row["n"], row["rep"], _fmt(row["final_metric"])]
            out += [_fmt(row[k]) if k in row else "" for k in extra]
            writer.writerow(out)


def read_table_csv(path: str) -> list[dict]:
    """Read back a sweep table; numeric fields are parsed, blanks dropped."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            row = {}
            for k, v in rec.items():
                if v == "" or v is None:
                    continue
                row[k] = int(v) if k in ("d", "n", "rep", "step") else float(v)
            rows.append(row)
    return rows


def plot_csv(in_path: str, out_path: str):
    """Render an SVG line chart from a trace or sweep CSV.

    Trace files (step,value) plot the metric curve; sweep tables plot median
    final_metric against n, one line per d, on log-log axes.
    """
    import matplotlib
    matplotlib.use("SVG")
    import matplotlib.pyplot as plt

    with open(in_path, newline="") as fh:
        header = next(csv.reader(fh))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if header[:2] == ["step", "value"]:
        rows = read_table_csv(in_path)
        ax.plot([r["step"] for r in rows], [r["value"] for r in rows],
                lw=1.2, color="tab:blue")
        ax.set_xlabel("step")
        ax.set_ylabel("value")
    elif header[:3] == ["d", "n", "rep"]:
        med = median_by_cell(read_table_csv(in_path))
        for dval in sorted({r["d"] for r in med}):
            pts = [(r["n"], r["final_metric"]) for r in med if r["d"] == dval]
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker="o", ms=3, lw=1.2, label=f"d = {dval}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("median final metric")
        ax.legend(fontsize=8)
    else:
        raise ValueError(f"unrecognized CSV header: {header}")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
