"""Classical optimizers with a uniform minimize() interface.

All stochastic methods draw from a seeded numpy Generator so runs are
bit-reproducible.  Traces record the best-so-far value per iteration,
starting from the initial point, and are therefore non-increasing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

F_TOL_DEFAULT = 1e-10
GRAD_TOL_DEFAULT = 1e-8


class OptimizationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradientDescent:
    eta: float = 0.1
    max_iters: int = 200
    grad_tol: float = GRAD_TOL_DEFAULT
    # absolute stop target, meaningful for objectives bounded below by zero
    f_tol: float | None = None


@dataclass(frozen=True)
class SPSA:
    a: float = 0.2
    c: float = 0.1
    alpha: float = 0.602
    gamma: float = 0.101
    stability: float = 10.0
    max_iters: int = 500
    seed: int = 0


@dataclass(frozen=True)
class NelderMead:
    scale: float = 0.5
    max_iters: int = 1000
    f_tol: float = F_TOL_DEFAULT


@dataclass(frozen=True)
class CMAES:
    sigma0: float = 0.5
    popsize: int | None = None
    max_iters: int = 500
    # absolute stop target, meaningful for objectives bounded below by zero
    f_tol: float | None = None
    seed: int = 0


@dataclass(frozen=True)
class ParticleSwarm:
    particles: int = 20
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5
    max_iters: int = 300
    seed: int = 0


@dataclass(frozen=True)
class DifferentialEvolution:
    population: int = 20
    f: float = 0.7
    cr: float = 0.9
    max_iters: int = 300
    seed: int = 0


@dataclass
class OptimizationTrace:
    best_values: list = field(default_factory=list)
    n_evals: int = 0
    x_best: np.ndarray | None = None
    f_best: float = np.inf
    converged: bool = False

    def record(self, x, f) -> None:
        if f < self.f_best:
            self.f_best = float(f)
            self.x_best = np.array(x, dtype=float)
        self.best_values.append(self.f_best)


def _counted(objective, trace: OptimizationTrace):
    def f(x):
        trace.n_evals += 1
        val = float(objective(np.asarray(x, dtype=float)))
        return val
    return f


# ---------------------------------------------------------------------------
# Gradients
# ---------------------------------------------------------------------------

def finite_diff_grad(objective, x, h: float = 1e-5) -> np.ndarray:
    """Central differences per coordinate (testing oracle)."""
    if h <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (objective(x + e) - objective(x - e)) / (2 * h)
    return g


def parameter_shift_grad(cost, lam, lam0: float) -> np.ndarray:
    """Exact gradient of a quadratic-in-state cost via angle shifts.

    ``cost`` must expose ``shift_split_eval(lam) -> (q, l)`` with the cost
    equal to lam0^2 q - 2 lam0 l + const.  The quadratic block obeys the
    standard +/- pi/2 shift rule with denominator 2; the state-linear block
    picks up denominator 2*sqrt(2) because the state (not a sandwiched
    expectation) is shifted.  The scale derivative is analytic.
    """
    lam = np.asarray(lam, dtype=float)
    grad = np.zeros(lam.size + 1)
    for i in range(lam.size):
        e = np.zeros_like(lam)
        e[i] = np.pi / 2
        qp, lp = cost.shift_split_eval(lam + e)
        qm, lm = cost.shift_split_eval(lam - e)
        dq = (qp - qm) / 2.0
        dl = (lp - lm) / (2.0 * sqrt(2.0))
        grad[i] = lam0 * lam0 * dq - 2.0 * lam0 * dl
    q, l = cost.shift_split_eval(lam)
    grad[-1] = 2.0 * lam0 * q - 2.0 * l
    return grad


# ---------------------------------------------------------------------------
# Methods
# ---------------------------------------------------------------------------

def _gradient_descent(f, x0, cfg: GradientDescent, grad, trace):
    x = np.array(x0, dtype=float)
    fx = f(x)
    trace.record(x, fx)
    eta = cfg.eta
    for _ in range(cfg.max_iters):
        g = np.asarray(grad(x), dtype=float)
        gn = np.linalg.norm(g)
        if gn <= cfg.grad_tol:
            trace.converged = True
            break
        # backtracking: shrink the step until the value decreases
        moved = False
        while eta > 1e-14:
            cand = x - eta * g
            fc = f(cand)
            if fc < fx:
                x, fx = cand, fc
                eta = min(eta * 1.3, cfg.eta * 100)
                moved = True
                break
            eta *= 0.5
        trace.record(x, fx)
        if not moved:
            break
        if cfg.f_tol is not None and fx <= cfg.f_tol:
            trace.converged = True
            break
    return trace


def _spsa(f, x0, cfg: SPSA, trace):
    rng = np.random.default_rng(cfg.seed)
    x = np.array(x0, dtype=float)
    fx = f(x)
    trace.record(x, fx)
    for k in range(cfg.max_iters):
        ak = cfg.a / (k + 1 + cfg.stability) ** cfg.alpha
        ck = cfg.c / (k + 1) ** cfg.gamma
        delta = rng.integers(0, 2, size=x.size) * 2.0 - 1.0
        gk = (f(x + ck * delta) - f(x - ck * delta)) / (2 * ck) / delta
        x = x - ak * gk
        fx = f(x)
        trace.record(x, fx)
    return trace


def _nelder_mead(f, x0, cfg: NelderMead, trace):
    x0 = np.array(x0, dtype=float)
    n = x0.size
    simplex = [x0]
    for i in range(n):
        v = x0.copy()
        v[i] += cfg.scale if v[i] == 0 else 0.1 * cfg.scale * (1 + abs(v[i]))
        simplex.append(v)
    values = [f(v) for v in simplex]
    trace.record(simplex[int(np.argmin(values))], min(values))
    for _ in range(cfg.max_iters):
        order = np.argsort(values)
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        if values[-1] - values[0] < cfg.f_tol:
            trace.converged = True
            break
        centroid = np.mean(simplex[:-1], axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = f(xr)
        if values[0] <= fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        elif fr < values[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        else:
            xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    values[i] = f(simplex[i])
        trace.record(simplex[int(np.argmin(values))], min(values))
    return trace


def _cmaes(f, x0, cfg: CMAES, trace):
    """Covariance matrix adaptation with cumulative step-size control."""
    rng = np.random.default_rng(cfg.seed)
    x0 = np.array(x0, dtype=float)
    n = x0.size
    lam = cfg.popsize or 4 + int(3 * np.log(n))
    mu = lam // 2
    w = np.log(lam / 2 + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mueff = 1.0 / np.sum(w ** 2)
    cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
    cs = (mueff + 2) / (n + mueff + 5)
    c1 = 2 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, sqrt((mueff - 1) / (n + 1)) - 1) + cs
    chi_n = sqrt(n) * (1 - 1.0 / (4 * n) + 1.0 / (21 * n * n))

    mean = x0.copy()
    sigma = cfg.sigma0
    pc = np.zeros(n)
    ps = np.zeros(n)
    cov = np.eye(n)
    trace.record(mean, f(mean))
    for g in range(cfg.max_iters):
        vals, diag = np.linalg.eigh(cov)
        vals = np.maximum(vals, 1e-20)
        sqrt_c = diag @ np.diag(np.sqrt(vals)) @ diag.T
        inv_sqrt_c = diag @ np.diag(1.0 / np.sqrt(vals)) @ diag.T
        z = rng.standard_normal((lam, n))
        xs = mean + sigma * z @ sqrt_c.T
        fs = np.array([f(xi) for xi in xs])
        order = np.argsort(fs)
        trace.record(xs[order[0]], fs[order[0]])
        if cfg.f_tol is not None and fs[order[0]] <= cfg.f_tol:
            trace.converged = True
            break
        old_mean = mean
        sel = xs[order[:mu]]
        mean = w @ sel
        y = (mean - old_mean) / sigma
        ps = (1 - cs) * ps + sqrt(cs * (2 - cs) * mueff) * inv_sqrt_c @ y
        hsig = (np.linalg.norm(ps)
                / sqrt(1 - (1 - cs) ** (2 * (g + 1))) / chi_n) < 1.4 + 2 / (n + 1)
        pc = (1 - cc) * pc + hsig * sqrt(cc * (2 - cc) * mueff) * y
        artmp = (sel - old_mean) / sigma
        cov = ((1 - c1 - cmu) * cov
               + c1 * (np.outer(pc, pc) + (not hsig) * cc * (2 - cc) * cov)
               + cmu * artmp.T @ np.diag(w) @ artmp)
        cov = (cov + cov.T) / 2
        sigma *= np.exp((cs / damps) * (np.linalg.norm(ps) / chi_n - 1))
        if sigma < 1e-16:
            trace.converged = True
            break
    return trace


def _particle_swarm(f, x0, cfg: ParticleSwarm, trace):
    rng = np.random.default_rng(cfg.seed)
    x0 = np.array(x0, dtype=float)
    n = x0.size
    pos = x0 + rng.normal(scale=1.0, size=(cfg.particles, n))
    pos[0] = x0
    vel = np.zeros_like(pos)
    pvals = np.array([f(p) for p in pos])
    pbest = pos.copy()
    gi = int(np.argmin(pvals))
    trace.record(pbest[gi], pvals[gi])
    gbest, gval = pbest[gi].copy(), pvals[gi]
    for _ in range(cfg.max_iters):
        r1 = rng.random((cfg.particles, n))
        r2 = rng.random((cfg.particles, n))
        vel = (cfg.inertia * vel
               + cfg.cognitive * r1 * (pbest - pos)
               + cfg.social * r2 * (gbest - pos))
        pos = pos + vel
        vals = np.array([f(p) for p in pos])
        better = vals < pvals
        pbest[better] = pos[better]
        pvals[better] = vals[better]
        gi = int(np.argmin(pvals))
        if pvals[gi] < gval:
            gbest, gval = pbest[gi].copy(), pvals[gi]
        trace.record(gbest, gval)
    return trace


def _differential_evolution(f, x0, cfg: DifferentialEvolution, trace):
    rng = np.random.default_rng(cfg.seed)
    x0 = np.array(x0, dtype=float)
    n = x0.size
    np_ = max(cfg.population, 4)
    pop = x0 + rng.normal(scale=1.0, size=(np_, n))
    pop[0] = x0
    vals = np.array([f(p) for p in pop])
    bi = int(np.argmin(vals))
    trace.record(pop[bi], vals[bi])
    for _ in range(cfg.max_iters):
        for i in range(np_):
            idx = [j for j in range(np_) if j != i]
            a, b, c = rng.choice(idx, size=3, replace=False)
            mutant = pop[a] + cfg.f * (pop[b] - pop[c])
            cross = rng.random(n) < cfg.cr
            cross[rng.integers(n)] = True
            trial = np.where(cross, mutant, pop[i])
            ft = f(trial)
            if ft <= vals[i]:
                pop[i], vals[i] = trial, ft
        bi = int(np.argmin(vals))
        trace.record(pop[bi], vals[bi])
    return trace


_DISPATCH = {
    GradientDescent: _gradient_descent,
    SPSA: _spsa,
    NelderMead: _nelder_mead,
    CMAES: _cmaes,
    ParticleSwarm: _particle_swarm,
    DifferentialEvolution: _differential_evolution,
}


def minimize(objective, x0, config, grad=None) -> OptimizationTrace:
    """Run the configured method; stochastic methods are seeded and
    reproducible.  ``grad`` is used by gradient descent only (finite
    differences are substituted when absent)."""
    trace = OptimizationTrace()
    f = _counted(objective, trace)
    x0 = np.asarray(x0, dtype=float)
    f0 = float(objective(x0))
    if not np.isfinite(f0):
        raise OptimizationError("objective is not finite at the start point")
    kind = type(config)
    if kind is GradientDescent:
        g = grad if grad is not None else (lambda x: finite_diff_grad(objective, x))
        return _gradient_descent(f, x0, config, g, trace)
    if kind not in _DISPATCH:
        raise OptimizationError(f"unknown optimizer config {config!r}")
    return _DISPATCH[kind](f, x0, config, trace)
