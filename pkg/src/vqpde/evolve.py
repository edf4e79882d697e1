"""Outer hybrid loop: per step, freeze history, minimize the residual cost
over (lam, lam0), commit the winner, read the field back out.

History is kept as the committed readout fields (real grid samples), so each
step's cost sees exactly what the previous optimization produced.  The
candidate scale admits a closed-form optimum at fixed angles (the cost is an
exact quadratic in lam0), which is applied before and after each inner
optimization; it can only lower the cost.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field as dfield

import numpy as np

from .ansatz import AnsatzSpec, VariationalState, prepare
from .costlib import CostFunction, DSW, JointCost, Source, build_cost
from .opexpr import OpExpr
from .optim import CMAES, GradientDescent, minimize
from .statevec import RegisterLayout, SimulationError

IMAG_LEAK_TOL = 1e-6


class EvolutionError(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionConfig:
    tau: float
    n_steps: int
    optimizer: object
    restarts: int = 1
    mode: str = "exact"
    shots: int | None = None
    seed: int = 0
    restart_sigma: float = 0.1

    def __post_init__(self):
        if self.tau <= 0:
            raise EvolutionError("time step must be positive")
        if self.n_steps < 0:
            raise EvolutionError("step count must be nonnegative")
        if self.restarts < 1:
            raise EvolutionError("at least one start is required")
        if self.mode not in ("exact", "shots"):
            raise EvolutionError(f"unknown mode {self.mode!r}")
        if self.mode == "shots" and (self.shots is None or self.shots < 1):
            raise EvolutionError("shot mode needs a positive shot count")


@dataclass(frozen=True)
class StepRecord:
    t: float
    fields: dict  # component name -> real grid samples
    cost: float
    lam: np.ndarray | None
    lam0: float | None
    grad_norm: float
    n_evals: int
    imag_leak: float


@dataclass
class Trajectory:
    layout: RegisterLayout
    records: list = dfield(default_factory=list)

    def __len__(self):
        return len(self.records)

    def fields(self, component: str = "u") -> list:
        return [r.fields[component] for r in self.records]

    def costs(self) -> list:
        return [r.cost for r in self.records]


def readout(vstate: VariationalState, layout: RegisterLayout | None = None):
    """Scaled real part of the prepared amplitudes, plus the relative
    imaginary leakage diagnostic."""
    amps = vstate.lam0 * prepare(vstate.spec, vstate.lam).amplitudes
    norm = max(np.linalg.norm(amps), 1e-300)
    leak = float(np.linalg.norm(np.imag(amps)) / norm)
    return np.real(amps), leak


def _apply_best_scale(cost, x: np.ndarray) -> np.ndarray:
    """Closed-form lam0 update at fixed angles (exact quadratic minimum)."""
    x = np.array(x, dtype=float)
    if isinstance(cost, JointCost):
        k = 0
        for p in cost.parts:
            lam = x[k:k + p.n_params - 1]
            x[k + p.n_params - 1] = p.best_scale(lam)
            k += p.n_params
    else:
        x[-1] = cost.best_scale(x[:-1])
    return x


def step(problem, history, warm, cfg: EvolutionConfig,
         layout: RegisterLayout, rng: np.random.Generator):
    """Minimize the frozen-history cost from the warm start plus perturbed
    restarts; returns (best parameter vector, diagnostics dict)."""
    spec = warm[0].spec if isinstance(warm, (tuple, list)) else warm.spec
    cost = build_cost(problem, history, layout, cfg.tau, spec)

    if isinstance(warm, (tuple, list)):
        x0 = np.concatenate([np.append(w.lam, w.lam0) for w in warm])
    else:
        x0 = np.append(warm.lam, warm.lam0)
    x0 = _apply_best_scale(cost, x0)

    if cfg.mode == "shots":
        eval_rng = np.random.default_rng(rng.integers(2 ** 63))

        def objective(x):
            if isinstance(cost, JointCost):
                return sum(
                    p.evaluate_terms(lam, lam0, shots=cfg.shots, rng=eval_rng)
                    for p, (lam, lam0) in zip(cost.parts, cost.split(x)))
            return cost.evaluate_terms(x[:-1], x[-1], shots=cfg.shots,
                                       rng=eval_rng)
    else:
        objective = cost.evaluate_vec

    starts = [x0]
    for _ in range(cfg.restarts - 1):
        starts.append(x0 + rng.normal(scale=cfg.restart_sigma, size=x0.size))

    best_x, best_f, n_evals = None, np.inf, 0
    for s in starts:
        trace = minimize(objective, s, cfg.optimizer, grad=cost.grad_vec)
        n_evals += trace.n_evals
        cand = _apply_best_scale(cost, trace.x_best)
        f = cost.evaluate_vec(cand)
        if not np.isfinite(f):
            raise EvolutionError("optimizer diverged to a non-finite cost")
        if f < best_f:
            best_x, best_f = cand, f
    grad_norm = float(np.linalg.norm(cost.grad_vec(best_x)))
    return best_x, {"cost": best_f, "grad_norm": grad_norm, "n_evals": n_evals}


def fit_field(spec: AnsatzSpec, layout: RegisterLayout, field,
              rng: np.random.Generator) -> VariationalState:
    """Variational encoding of a classical field: minimize
    ||lam0 Psi(lam) - field||^2 (a residual cost with identity operator),
    global search then gradient polish.  Zero angles are a stationary saddle
    whenever the field has no overlap with the reference state, hence the
    randomized start."""
    field = np.asarray(field, dtype=float)
    if np.linalg.norm(field) == 0.0:
        return VariationalState(spec, np.zeros(spec.parameter_count), 0.0)
    cost = CostFunction("encode", layout, spec, OpExpr.identity(),
                        (Source(OpExpr.identity(), field, "f"),), {})
    x0 = rng.normal(scale=0.1, size=spec.parameter_count + 1)
    x0[-1] = float(np.linalg.norm(field))
    search = minimize(cost.evaluate_vec, x0,
                      CMAES(sigma0=0.3, max_iters=400, f_tol=1e-18,
                            seed=int(rng.integers(2 ** 31))))
    polish = minimize(cost.evaluate_vec, search.x_best,
                      GradientDescent(eta=0.2, max_iters=300,
                                      grad_tol=1e-12, f_tol=1e-22),
                      grad=cost.grad_vec)
    x = _apply_best_scale(cost, polish.x_best)
    return VariationalState(spec, x[:-1], x[-1])


def _initial_vstates(problem, initial, spec, layout, rng):
    if isinstance(problem, DSW):
        if len(initial) != 2:
            raise EvolutionError("the coupled system needs (u, v) initial data")
        return tuple(fit_field(spec, layout, f, rng) for f in initial)
    return fit_field(spec, layout, initial[-1], rng)


def run(problem, initial_fields, cfg: EvolutionConfig, layout: RegisterLayout,
        spec: AnsatzSpec) -> Trajectory:
    """Full trajectory: n_steps hybrid updates from the given initial data.

    ``initial_fields`` is a list of real grid arrays: one field for
    first-order equations (a second level is synthesized as a from-rest start
    for the second-order ones when absent) or the (u, v) pair for the coupled
    system.  Deterministic for a fixed config seed.
    """
    rng = np.random.default_rng(cfg.seed)
    initial = [np.asarray(f, dtype=float) for f in initial_fields]
    if any(f.size != layout.dim for f in initial):
        raise SimulationError("initial field does not match the grid")

    traj = Trajectory(layout)
    joint = isinstance(problem, DSW)
    if joint:
        history = [initial[0], initial[1]]
        traj.records.append(StepRecord(
            0.0, {"u": initial[0].copy(), "v": initial[1].copy()},
            0.0, None, None, 0.0, 0, 0.0))
        warm = _initial_vstates(problem, initial, spec, layout, rng)
    else:
        if problem.history_depth == 2 and len(initial) == 1:
            initial = [initial[0].copy(), initial[0]]  # start from rest
        history = list(initial)
        traj.records.append(StepRecord(
            0.0, {"u": history[-1].copy()}, 0.0, None, None, 0.0, 0, 0.0))
        warm = _initial_vstates(problem, initial, spec, layout, rng)

    for k in range(cfg.n_steps):
        t = (k + 1) * cfg.tau
        try:
            x, info = step(problem, history[-problem.history_depth:],
                           warm, cfg, layout, rng)
        except EvolutionError:
            break  # partial trajectory returned
        if joint:
            nv = spec.parameter_count + 1
            vs_u = VariationalState(spec, x[:nv - 1], x[nv - 1])
            vs_v = VariationalState(spec, x[nv:-1], x[-1])
            fu, leak_u = readout(vs_u)
            fv, leak_v = readout(vs_v)
            history = [fu, fv]
            warm = (vs_u, vs_v)
            traj.records.append(StepRecord(
                t, {"u": fu, "v": fv}, info["cost"], x[:nv - 1].copy(),
                float(x[nv - 1]), info["grad_norm"], info["n_evals"],
                max(leak_u, leak_v)))
        else:
            vs = VariationalState(spec, x[:-1], x[-1])
            f, leak = readout(vs)
            history.append(f)
            warm = vs
            traj.records.append(StepRecord(
                t, {"u": f}, info["cost"], x[:-1].copy(), float(x[-1]),
                info["grad_norm"], info["n_evals"], leak))
    return traj


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def trajectory_rows(traj: Trajectory) -> list:
    """Flat CSV payload: one row per (step, component, grid point)."""
    coords = _grid_columns(traj.layout)
    labels = traj.layout.axis_labels()
    rows = []
    for rec in traj.records:
        for comp in sorted(rec.fields):
            f = rec.fields[comp]
            for i in range(traj.layout.dim):
                row = [f"{rec.t:.17g}", comp, str(i)]
                row += [f"{coords[ax][i]:.17g}" for ax in labels]
                row += [f"{f[i]:.17g}", f"{rec.cost:.17g}",
                        f"{rec.grad_norm:.17g}"]
                rows.append(row)
    return rows


def _grid_columns(layout: RegisterLayout) -> dict:
    from .costlib import grid_coordinates
    return grid_coordinates(layout)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    labels = traj.layout.axis_labels()
    header = ["t", "component", "index", *labels, "value", "cost", "grad_norm"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(trajectory_rows(traj))


def fields_to_trajectory(fields, layout: RegisterLayout, tau: float,
                         component: str = "u") -> Trajectory:
    """Wrap a plain field sequence (e.g. the classical reference) in the same
    trajectory shape for shared serialization."""
    traj = Trajectory(layout)
    for k, f in enumerate(fields):
        traj.records.append(StepRecord(
            k * tau, {component: np.asarray(f, dtype=float)},
            0.0, None, None, 0.0, 0, 0.0))
    return traj
