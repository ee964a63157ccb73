"""Higher-order mean-field inference with cycle pattern potentials.

Each triangle carries a pattern potential: a low cost for the three valid
label patterns (join/join/join, join/cut/cut, cut/cut/cut) and ``gamma_max``
for the invalid one (exactly one cut). The update is a Jacobi sweep: every
edge is recomputed from the previous iteration's marginals.

Cooling sharpens the neighbor marginals inside the clique terms with
:func:`phi` (exponent ``k``), or sharpens the softmax with a temperature
``t``. Both are advanced by a fixed increment when the number of violated
relaxed triangles falls below ``threshold_a``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ._backend import kernels
from .cycles import CycleStats, TriangleSet, count_invalid, enumerate_triangles, round_marginals
from .graph import EPS, EdgeGraph

log = logging.getLogger(__name__)

SCHEDULES = ("none", "adaptive_phi", "softmax_linear", "softmax_adaptive")
T_FLOOR = 0.05


def phi(q, k: float):
    """Cooling function: ``1 - (1-q)**k`` for q >= 0.5, else ``q**k``."""
    q = np.asarray(q, dtype=np.float64)
    out = np.where(q >= 0.5, 1.0 - (1.0 - q) ** k, q ** k)
    return float(out) if out.ndim == 0 else out


def unary_potential(p, label: int):
    """Negative log-probability of ``label`` (1 = cut) under cut probability p."""
    p = np.clip(np.asarray(p, dtype=np.float64), EPS, 1.0 - EPS)
    if label == 1:
        out = -np.log(p)
    elif label == 0:
        out = -np.log(np.clip(1.0 - p, EPS, 1.0 - EPS))
    else:
        raise ValueError("label must be 0 or 1")
    return float(out) if out.ndim == 0 else out


def softmax_with_temperature(exponents, t: float = 1.0) -> np.ndarray:
    """Softmax of ``exponents / t`` along the last axis, max-subtracted."""
    if t <= 0:
        raise ValueError("temperature must be positive")
    x = np.asarray(exponents, dtype=np.float64) / t
    x = x - x.max(axis=-1, keepdims=True)
    e = np.exp(x)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class PotentialParams:
    gamma_valid: tuple[float, float, float] = (0.0, 0.0, 0.0)  # jjj, jcc, ccc
    gamma_max: float = 10.0
    unary_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "gamma_valid", tuple(float(g) for g in self.gamma_valid))
        if len(self.gamma_valid) != 3:
            raise ValueError("gamma_valid needs three entries")
        if self.gamma_max < max(self.gamma_valid):
            warnings.warn("gamma_max is below a valid-pattern cost", RuntimeWarning, stacklevel=3)

    def as_dict(self) -> dict[str, float]:
        jjj, jcc, ccc = self.gamma_valid
        return {
            "gamma_jjj": jjj,
            "gamma_jcc": jcc,
            "gamma_ccc": ccc,
            "gamma_max": float(self.gamma_max),
            "unary_weight": float(self.unary_weight),
        }

    @classmethod
    def from_dict(cls, d) -> PotentialParams:
        return cls(
            (float(d["gamma_jjj"]), float(d["gamma_jcc"]), float(d["gamma_ccc"])),
            float(d["gamma_max"]),
            float(d.get("unary_weight", 1.0)),
        )

    def to_text(self) -> str:
        return "".join(f"{key} = {value!r}\n" for key, value in self.as_dict().items())

    @classmethod
    def from_text(cls, text: str) -> PotentialParams:
        d = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            d[key.strip()] = value.strip()
        missing = {"gamma_jjj", "gamma_jcc", "gamma_ccc", "gamma_max"} - d.keys()
        if missing:
            raise ValueError(f"missing keys: {', '.join(sorted(missing))}")
        return cls.from_dict(d)


@dataclass(frozen=True)
class CoolingState:
    """Cooling exponent ``k`` and softmax temperature ``t``.

    Both are stored as step counts so that repeated increments are exact:
    ``k = k_init + k_steps * increment``.
    """

    schedule: str = "none"
    increment: float = 0.05
    threshold_a: float = 100
    k_init: float = 1.0
    t_init: float = 1.0
    k_steps: int = 0
    t_steps: int = 0

    def __post_init__(self):
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}; expected one of {SCHEDULES}")
        if self.increment <= 0:
            raise ValueError("increment must be positive")
        if self.k_init < 1:
            raise ValueError("k must be >= 1")
        if not 0 < self.t_init <= 1:
            raise ValueError("t must lie in (0, 1]")

    @property
    def k(self) -> float:
        return self.k_init + self.k_steps * self.increment

    @property
    def t(self) -> float:
        return max(T_FLOOR, self.t_init - self.t_steps * self.increment)

    def advance(self, n_invalid: float) -> CoolingState:
        """Apply one schedule update given the current violated-cycle count."""
        below = n_invalid < self.threshold_a
        if self.schedule == "adaptive_phi" and below:
            return replace(self, k_steps=self.k_steps + 1)
        if self.schedule == "softmax_linear" or (self.schedule == "softmax_adaptive" and below):
            return replace(self, t_steps=self.t_steps + 1)
        return self

    def as_dict(self) -> dict:
        return {
            "schedule": self.schedule,
            "increment": self.increment,
            "threshold_a": self.threshold_a,
            "k_init": self.k_init,
            "t_init": self.t_init,
        }


@dataclass(frozen=True)
class MeanFieldConfig:
    iterations: int = 20
    cooling: CoolingState = field(default_factory=CoolingState)
    schedule_granularity: str = "per_iteration"
    rounding_threshold: float = 0.5
    num_threads: int = 1

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.schedule_granularity not in ("per_iteration", "per_epoch"):
            raise ValueError("schedule_granularity must be 'per_iteration' or 'per_epoch'")


@dataclass(frozen=True)
class TrajectoryRecord:
    iteration: int
    stats: CycleStats
    k: float
    t: float
    objective_linear: float
    objective_cubic: float

    def as_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            **self.stats.as_dict(),
            "k": self.k,
            "t": self.t,
            "objective_linear": self.objective_linear,
            "objective_cubic": self.objective_cubic,
        }


Trajectory = list[TrajectoryRecord]


def unary_energies(graph: EdgeGraph, params: PotentialParams) -> tuple[np.ndarray, np.ndarray]:
    w = params.unary_weight
    return w * unary_potential(graph.probs, 0), w * unary_potential(graph.probs, 1)


def meanfield_step(
    marginals,
    graph: EdgeGraph,
    triangles: TriangleSet,
    params: PotentialParams,
    cooling: CoolingState,
    num_threads: int = 1,
    _unaries=None,
) -> np.ndarray:
    """One Jacobi mean-field update of the cut marginals.

    ``phi`` with the current ``k`` is applied to neighbor marginals only;
    the softmax divides by the current temperature ``t``.
    """
    q = np.asarray(marginals, dtype=np.float64)
    if len(q) != graph.num_edges or triangles.num_edges != graph.num_edges:
        raise ValueError("marginals, graph and triangles disagree on the number of edges")
    k = cooling.k if cooling.schedule == "adaptive_phi" else 1.0
    t = cooling.t if cooling.schedule in ("softmax_linear", "softmax_adaptive") else 1.0
    if k == 1.0:
        c1, c0 = q.copy(), 1.0 - q
    else:
        c1, c0 = phi(q, k), phi(1.0 - q, k)
    jjj, jcc, ccc = params.gamma_valid
    term0, term1 = kernels.clique_terms(
        np.ascontiguousarray(c0), np.ascontiguousarray(c1),
        triangles.edges, triangles.inc_edge, triangles.inc_tri, triangles.inc_slot,
        float(jjj), float(jcc), float(ccc), float(params.gamma_max), int(num_threads),
    )
    u0, u1 = _unaries if _unaries is not None else unary_energies(graph, params)
    exponents = np.stack([-(u0 + term0), -(u1 + term1)], axis=1)
    if not np.all(np.isfinite(exponents)):
        raise FloatingPointError("potential overflow")
    return softmax_with_temperature(exponents, t)[:, 1]


def _objectives(graph, triangles, labeling, gamma):
    lin = float(np.dot(graph.costs, labeling))
    if len(triangles) == 0:
        return lin, lin
    cuts = labeling[triangles.edges].sum(axis=1)
    return lin, lin + gamma * float(np.count_nonzero(cuts == 1))


def _record(i, q, graph, triangles, params, cooling, threshold) -> TrajectoryRecord:
    stats = count_invalid(q, triangles, threshold)
    lin, cub = _objectives(graph, triangles, round_marginals(q, threshold), params.gamma_max)
    return TrajectoryRecord(i, stats, cooling.k, cooling.t, lin, cub)


def run_meanfield(
    graph: EdgeGraph,
    initial,
    triangles: TriangleSet,
    params: PotentialParams,
    config: MeanFieldConfig,
) -> tuple[np.ndarray, Trajectory]:
    """Iterate :func:`meanfield_step` and apply the cooling schedule.

    With per-iteration granularity the schedule is advanced after every
    step from the relaxed violated-triangle count of the new marginals;
    with per-epoch granularity the cooling state is left to the caller.
    The trajectory holds the initial state plus one record per iteration,
    each carrying the ``k``/``t`` in force after that iteration's update.
    """
    q = np.asarray(initial, dtype=np.float64).copy()
    cooling = config.cooling
    thr = config.rounding_threshold
    unaries = unary_energies(graph, params)
    trajectory = [_record(0, q, graph, triangles, params, cooling, thr)]
    for it in range(1, config.iterations + 1):
        q = meanfield_step(q, graph, triangles, params, cooling, config.num_threads, unaries)
        rec = _record(it, q, graph, triangles, params, cooling, thr)
        if config.schedule_granularity == "per_iteration":
            cooling = cooling.advance(rec.stats.invalid_relaxed)
            rec = replace(rec, k=cooling.k, t=cooling.t)
        trajectory.append(rec)
        log.debug("iteration %d: %d relaxed / %d rounded invalid, k=%.2f t=%.2f",
                  it, rec.stats.invalid_relaxed, rec.stats.invalid_rounded, rec.k, rec.t)
    return q, trajectory


# -- cost fitting --------------------------------------------------------

@dataclass(frozen=True)
class FitOptions:
    iterations: int = 10
    step: float = 1.0
    h: float = 1e-3
    min_step: float = 1e-6
    fit_unary_weight: bool = False


def binary_cross_entropy(q, truth) -> float:
    q = np.clip(np.asarray(q, dtype=np.float64), EPS, 1.0 - EPS)
    y = np.asarray(truth, dtype=np.float64)
    return float(-np.mean(y * np.log(q) + (1.0 - y) * np.log1p(-q)))


def _params_vector(params: PotentialParams, fit_unary: bool) -> np.ndarray:
    v = [*params.gamma_valid, params.gamma_max]
    if fit_unary:
        v.append(params.unary_weight)
    return np.array(v, dtype=np.float64)


def _params_from_vector(v, base: PotentialParams, fit_unary: bool) -> PotentialParams:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return PotentialParams(
            tuple(v[:3]), float(v[3]), float(v[4]) if fit_unary else base.unary_weight
        )


def fit_costs(
    instances: Sequence[tuple[EdgeGraph, np.ndarray, np.ndarray]],
    config: MeanFieldConfig,
    options: FitOptions = FitOptions(),
    initial: PotentialParams = PotentialParams(),
    history: list | None = None,
) -> PotentialParams:
    """Fit the pattern costs by finite-difference descent on the mean BCE.

    Each instance is ``(graph, initial marginals, ground-truth labeling)``.
    Central differences with perturbation ``options.h`` estimate the
    gradient; a step is kept only if it lowers the loss, otherwise the step
    size is halved. Returns the best parameters seen. If ``history`` is a
    list, the accepted losses are appended to it (starting with the initial
    loss).

    With ``per_epoch`` granularity the cooling state advances once per
    fitting iteration using the mean relaxed violation count over instances,
    and the loss is re-measured under the new state.
    """
    if not instances:
        raise ValueError("no instances to fit")
    prepared = [(g, np.asarray(q0, dtype=np.float64), np.asarray(y), enumerate_triangles(g)) for g, q0, y in instances]
    per_epoch = config.schedule_granularity == "per_epoch"
    cooling = config.cooling
    fit_unary = options.fit_unary_weight

    def evaluate(v, cooling):
        p = _params_from_vector(v, initial, fit_unary)
        cfg = replace(config, cooling=cooling)
        losses, invalid = [], []
        for g, q0, y, tris in prepared:
            q, traj = run_meanfield(g, q0, tris, p, cfg)
            losses.append(binary_cross_entropy(q, y))
            invalid.append(traj[-1].stats.invalid_relaxed)
        return float(np.mean(losses)), float(np.mean(invalid))

    x = _params_vector(initial, fit_unary)
    loss, n_inv = evaluate(x, cooling)
    if history is not None:
        history.append(loss)
    step = options.step
    for it in range(options.iterations):
        grad = np.zeros_like(x)
        for i in range(len(x)):
            d = np.zeros_like(x)
            d[i] = options.h
            grad[i] = (evaluate(x + d, cooling)[0] - evaluate(x - d, cooling)[0]) / (2 * options.h)
        norm = float(np.linalg.norm(grad))
        if norm == 0.0 or not math.isfinite(norm):
            break
        while step >= options.min_step:
            cand = x - step * grad / norm
            cand_loss, cand_inv = evaluate(cand, cooling)
            if cand_loss < loss:
                x, loss, n_inv = cand, cand_loss, cand_inv
                if history is not None:
                    history.append(loss)
                break
            step /= 2
        else:
            break
        if per_epoch:
            advanced = cooling.advance(n_inv)
            if advanced != cooling:
                # new cooling changes the objective; rebaseline before the next step
                cooling = advanced
                loss, n_inv = evaluate(x, cooling)
        log.info("fit iteration %d: loss %.6f step %.3g", it, loss, step)
    return _params_from_vector(x, initial, fit_unary)


__all__ = [
    "SCHEDULES",
    "CoolingState",
    "FitOptions",
    "MeanFieldConfig",
    "PotentialParams",
    "Trajectory",
    "TrajectoryRecord",
    "binary_cross_entropy",
    "fit_costs",
    "meanfield_step",
    "phi",
    "run_meanfield",
    "softmax_with_temperature",
    "unary_potential",
]
