"""Per-time-step cost functions for the supported PDEs.

Every cost has the same shape: the candidate next-step field c = lam0*|Psi(lam)>
must match the image of the frozen history under one explicit-Euler update,

    C(lam, lam0) = || M c - b ||^2,

where M collects any implicit (candidate-side) terms and b is assembled by
applying operator expressions to the frozen history fields.  Expanding the
norm gives

    C = lam0^2 <Psi|M'M|Psi> - 2 lam0 Re<b|M|Psi> + <b|b>,

a term list of expectation values with classical coefficients.  M contains
only shift atoms for every equation here, so the quadratic block is fully
unitary and shot-estimable; nonlinear frozen-field factors live in b.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dfield
from math import pi, sqrt

import numpy as np

from .ansatz import AnsatzSpec, prepare
from .opexpr import (
    OpExpr,
    OpTerm,
    adjoint,
    apply_expr,
    apply_term,
    diag,
    expand_product,
    grad_op,
    laplacian_op,
    shift,
)
from .statevec import (
    QuantumState,
    RegisterLayout,
    SimulationError,
    hadamard_test,
    inner,
)

_IDENT = OpExpr.identity()


class ProblemError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Problem definitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NavierStokes:
    """Velocity-component update.  ``pressure`` is None (pressure-free,
    advection-free relaxation), ("uniform", g) for a constant gradient, or
    ("field", samples) for an explicit pressure field."""

    nu: float
    rho: float = 1.0
    pressure: tuple | None = None
    component: str = "x"
    other_velocities: dict | None = None

    def __post_init__(self):
        if not (np.isfinite(self.nu) and self.nu > 0):
            raise ProblemError("viscosity must be positive and finite")
        if not (np.isfinite(self.rho) and self.rho > 0):
            raise ProblemError("density must be positive and finite")

    name = "navier-stokes"
    history_depth = 1


@dataclass(frozen=True)
class PointParticle:
    m: float
    v_mu: float
    v_nu: float
    position: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        speed = max(abs(self.v_mu), abs(self.v_nu))
        if speed >= self.c:
            raise ProblemError("particle speed must stay below c")

    def samples(self, layout: RegisterLayout, axis: str) -> np.ndarray:
        xs = _coordinates(layout)[axis]
        delta = layout.spacing(axis)
        out = np.zeros(layout.dim)
        speed = max(abs(self.v_mu), abs(self.v_nu))
        gamma = 1.0 / sqrt(1.0 - (speed / self.c) ** 2)
        idx = int(np.argmin(np.abs(xs - self.position)))
        out[idx] = self.m * gamma * self.v_mu * self.v_nu / delta
        return out


@dataclass(frozen=True)
class EquilibriumFluid:
    rho_e: float
    p: float
    u_mu: float
    u_nu: float
    eta: float = 1.0  # flat-metric component for the (mu, nu) slot
    c: float = 1.0

    def samples(self, layout: RegisterLayout, axis: str) -> np.ndarray:
        val = (self.rho_e + self.p / self.c ** 2) * self.u_mu * self.u_nu \
            + self.p * self.eta
        return np.full(layout.dim, val)


@dataclass(frozen=True)
class Electromagnetic:
    f_mu: np.ndarray | float
    f_nu: np.ndarray | float
    f_squared: np.ndarray | float = 0.0
    eta: float = 1.0
    mu0: float = 1.0

    def samples(self, layout: RegisterLayout, axis: str) -> np.ndarray:
        t = (np.asarray(self.f_mu, dtype=float) * np.asarray(self.f_nu, dtype=float)
             - 0.25 * self.eta * np.asarray(self.f_squared, dtype=float))
        return np.broadcast_to(t, (layout.dim,)).astype(float)


@dataclass(frozen=True)
class Einstein:
    """Single evolved metric component sourced by a classical stress-energy
    field; the candidate is constrained through a shifted copy of itself."""

    tensor: object
    G: float = 1.0
    c: float = 1.0
    indices: tuple = (0, 0)
    axes: tuple = ("x", "x")  # derivative axes (i, n)

    def __post_init__(self):
        if any(i not in range(4) for i in self.indices):
            raise ProblemError("component indices must lie in 0..3")

    name = "einstein"
    history_depth = 1


@dataclass(frozen=True)
class Maxwell:
    """One field-component update of the source-free curl equations.
    ``component`` is the updated axis index (i in the cyclic triple i,j,k)
    and ``which`` selects the magnetic or electric update."""

    component: str = "z"
    which: str = "B"
    mu0: float = 1.0
    eps0: float = 1.0
    ext_fields: dict | None = None  # e.g. {"E_y": samples} for the B update

    def __post_init__(self):
        if self.which not in ("B", "E"):
            raise ProblemError("update selector must be 'B' or 'E'")
        if self.component not in ("x", "y", "z"):
            raise ProblemError("component must be one of x, y, z")

    name = "maxwell"
    history_depth = 1


@dataclass(frozen=True)
class Boussinesq:
    alpha: float
    beta: float

    name = "boussinesq"
    history_depth = 2


@dataclass(frozen=True)
class LinTsien:
    name = "lin-tsien"
    history_depth = 1


@dataclass(frozen=True)
class CamassaHolm:
    kappa: float = 1.0

    name = "camassa-holm"
    history_depth = 2


@dataclass(frozen=True)
class DSW:
    # the two "history" entries are the current (u, v) pair
    name = "dsw"
    history_depth = 2


@dataclass(frozen=True)
class HunterSaxton:
    name = "hunter-saxton"
    history_depth = 1


def _coordinates(layout: RegisterLayout) -> dict:
    """Per-axis coordinate arrays over the flattened grid."""
    shape = layout.grid_shape()
    out = {}
    for pos, (label, _, delta) in enumerate(layout.axes):
        idx = np.arange(shape[pos]) * delta
        # first axis occupies the lowest qubits, i.e. the fastest index
        full = np.ones(shape[::-1])
        full = full * idx.reshape(
            [shape[pos] if a == len(shape) - 1 - pos else 1
             for a in range(len(shape))]
        )
        out[label] = full.reshape(-1)
    return out


def grid_coordinates(layout: RegisterLayout) -> dict:
    return _coordinates(layout)


# ---------------------------------------------------------------------------
# Cost function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Source:
    """One additive contribution expr(field) to the Euler image b."""

    expr: OpExpr
    samples: np.ndarray
    tag: str


@dataclass(frozen=True)
class CostFunction:
    """Frozen-history residual ||M c - b||^2 over candidates c = lam0 Psi(lam)."""

    name: str
    layout: RegisterLayout
    spec: AnsatzSpec
    m_op: OpExpr
    sources: tuple
    bindings: dict
    b_vector: np.ndarray = dfield(init=False)
    offset: float = dfield(init=False)

    def __post_init__(self):
        b = np.zeros(self.layout.dim, dtype=complex)
        for s in self.sources:
            st = QuantumState(np.asarray(s.samples, dtype=complex),
                              self.layout.total_qubits)
            b += apply_expr(s.expr, st, self.layout, self.bindings).amplitudes
        b = np.real_if_close(b, tol=1e6)
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "b_vector", b)
        object.__setattr__(self, "offset", float(np.real(np.vdot(b, b))))

    # -- candidate-side pieces ----------------------------------------------

    @property
    def n_params(self) -> int:
        return self.spec.parameter_count + 1

    def _psi(self, lam) -> QuantumState:
        return prepare(self.spec, lam)

    def shift_split_eval(self, lam) -> tuple:
        """(q, l) with C = lam0^2 q - 2 lam0 l + offset."""
        psi = self._psi(lam)
        mpsi = apply_expr(self.m_op, psi, self.layout, self.bindings)
        q = float(np.real(np.vdot(mpsi.amplitudes, mpsi.amplitudes)))
        l = float(np.real(np.vdot(self.b_vector, mpsi.amplitudes)))
        return q, l

    def evaluate(self, lam, lam0: float) -> float:
        q, l = self.shift_split_eval(lam)
        return lam0 * lam0 * q - 2.0 * lam0 * l + self.offset

    def best_scale(self, lam) -> float:
        """Scale minimizing the quadratic at fixed angles."""
        q, l = self.shift_split_eval(lam)
        return l / q if q > 1e-300 else 0.0

    def evaluate_vec(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return self.evaluate(x[:-1], x[-1])

    def grad_vec(self, x) -> np.ndarray:
        from .optim import parameter_shift_grad
        x = np.asarray(x, dtype=float)
        return parameter_shift_grad(self, x[:-1], x[-1])

    def residual_vector(self, lam, lam0: float) -> np.ndarray:
        """Direct M c - b (the independent evaluation path)."""
        psi = self._psi(lam)
        c = QuantumState(lam0 * psi.amplitudes, psi.n_qubits)
        mc = apply_expr(self.m_op, c, self.layout, self.bindings)
        return mc.amplitudes - self.b_vector

    def evaluate_direct(self, lam, lam0: float) -> float:
        r = self.residual_vector(lam, lam0)
        return float(np.real(np.vdot(r, r)))

    # -- term list ----------------------------------------------------------

    def term_list(self) -> tuple:
        """(coeff, bra tag, unit-coefficient OpTerm, ket tag) entries.

        offset + sum over entries of lam0^p Re(coeff <bra|T|ket>) with
        p = number of 'psi' tags reproduces evaluate().  Source states are
        normalized; their norms are folded into the coefficients.
        """
        entries = []
        quad = expand_product([adjoint(self.m_op), self.m_op])
        for t in quad.terms:
            entries.append((complex(t.coeff), "psi", OpTerm(1.0, t.atoms), "psi"))
        for si, s in enumerate(self.sources):
            norm = float(np.linalg.norm(s.samples))
            if norm == 0.0:
                continue
            cross = expand_product([adjoint(s.expr), self.m_op])
            for t in cross.terms:
                entries.append((
                    -2.0 * norm * complex(t.coeff),
                    f"src{si}:{s.tag}",
                    OpTerm(1.0, t.atoms),
                    "psi",
                ))
        return tuple(entries)

    def _tagged_state(self, tag: str, psi: QuantumState) -> QuantumState:
        if tag == "psi":
            return psi
        si = int(tag.split(":")[0][3:])
        samples = np.asarray(self.sources[si].samples, dtype=float)
        return QuantumState.from_amplitudes(samples / np.linalg.norm(samples))

    def evaluate_terms(self, lam, lam0: float, shots: int | None = None,
                       rng: np.random.Generator | None = None) -> float:
        """Term-by-term evaluation; in shot mode every fully unitary term is
        estimated by the ancilla test and nonlinear terms are contracted
        exactly."""
        psi = self._psi(lam)
        total = self.offset
        for coeff, bra_tag, term, ket_tag in self.term_list():
            bra = self._tagged_state(bra_tag, psi)
            ket = self._tagged_state(ket_tag, psi)
            power = (bra_tag == "psi") + (ket_tag == "psi")
            unitary = term.is_unitary_product()
            use_shots = shots if unitary else None

            def op(state, _term=term):
                return apply_term(_term, state, self.layout, self.bindings)

            re_v = im_v = 0.0
            if abs(coeff.real) > 0.0:
                re_v = hadamard_test(bra, ket, op, "real", use_shots, rng,
                                     op_is_unitary=unitary).value
            if abs(coeff.imag) > 0.0:
                im_v = hadamard_test(bra, ket, op, "imag", use_shots, rng,
                                     op_is_unitary=unitary).value
            total += lam0 ** power * (coeff.real * re_v - coeff.imag * im_v)
        return float(total)

    def serialize_terms(self) -> str:
        lines = [f"offset {self.offset:+.12g}"]
        for coeff, bra, term, ket in self.term_list():
            cs = f"({coeff.real:+.12g}{coeff.imag:+.12g}j)"
            lines.append(f"{cs} * <{bra}| {term.label()} |{ket}>")
        return "\n".join(lines)


@dataclass(frozen=True)
class JointCost:
    """Sum of component costs optimized over the concatenated vector
    (lam_1, lam0_1, lam_2, lam0_2, ...), equal weights."""

    name: str
    parts: tuple

    @property
    def n_params(self) -> int:
        return sum(p.n_params for p in self.parts)

    def split(self, x) -> list:
        x = np.asarray(x, dtype=float)
        out, k = [], 0
        for p in self.parts:
            out.append((x[k:k + p.n_params - 1], float(x[k + p.n_params - 1])))
            k += p.n_params
        return out

    def evaluate_vec(self, x) -> float:
        return sum(p.evaluate(lam, lam0)
                   for p, (lam, lam0) in zip(self.parts, self.split(x)))

    def evaluate_direct_vec(self, x) -> float:
        return sum(p.evaluate_direct(lam, lam0)
                   for p, (lam, lam0) in zip(self.parts, self.split(x)))

    def grad_vec(self, x) -> np.ndarray:
        from .optim import parameter_shift_grad
        return np.concatenate([
            parameter_shift_grad(p, lam, lam0)
            for p, (lam, lam0) in zip(self.parts, self.split(x))
        ])


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _history_fields(history, layout: RegisterLayout) -> list:
    out = []
    for h in history:
        if hasattr(h, "field"):
            f = h.field()
        else:
            f = np.asarray(h, dtype=float)
        if f.size != layout.dim:
            raise ProblemError("history field does not match the grid")
        out.append(f)
    return out


def build_q_operator(problem: NavierStokes, frozen, layout: RegisterLayout,
                     tau: float) -> tuple:
    """Literal update generator (h/tau)(1 - Diag(f) grad_x - Diag(v) grad_y
    + nu lap_x + nu lap_y) with Diag atoms bound to the frozen field; axes
    missing from the layout drop their terms.  Returns (expr, bindings)."""
    frozen = np.asarray(frozen, dtype=float)
    h = layout.axes[0][2]
    expr = OpExpr.identity()
    bindings = {}
    comp = problem.component
    if layout.has_axis(comp):
        bindings["q_self"] = frozen
        expr = expr - OpExpr((OpTerm(1.0, (diag("q_self"),)),)) \
            * grad_op(comp, layout.spacing(comp))
    others = problem.other_velocities or {}
    for ax, vel in others.items():
        if not layout.has_axis(ax):
            continue
        key = f"q_vel_{ax}"
        bindings[key] = np.asarray(vel, dtype=float)
        expr = expr - OpExpr((OpTerm(1.0, (diag(key),)),)) \
            * grad_op(ax, layout.spacing(ax))
    for ax in layout.axis_labels():
        expr = expr + laplacian_op(ax, layout.spacing(ax)).scale(problem.nu)
    return expr.scale(h / tau), bindings


def _diag_expr(key: str) -> OpExpr:
    return OpExpr((OpTerm(1.0, (diag(key),)),))


def _build_navier_stokes(problem: NavierStokes, fields, layout, tau, spec):
    u = fields[-1]
    bindings = {}
    rhs = _IDENT  # acting on u
    couette = problem.pressure is None
    if not couette and layout.has_axis(problem.component):
        bindings["adv_self"] = u
        rhs = rhs - (_diag_expr("adv_self")
                     * grad_op(problem.component,
                               layout.spacing(problem.component))).scale(tau)
    others = {} if couette else (problem.other_velocities or {})
    for ax, vel in others.items():
        if not layout.has_axis(ax):
            continue
        key = f"adv_{ax}"
        bindings[key] = np.asarray(vel, dtype=float)
        rhs = rhs - (_diag_expr(key) * grad_op(ax, layout.spacing(ax))).scale(tau)
    for ax in layout.axis_labels():
        rhs = rhs + laplacian_op(ax, layout.spacing(ax)).scale(problem.nu * tau)
    sources = [Source(rhs, u, "u")]
    if problem.pressure is not None:
        kind, val = problem.pressure
        if kind == "uniform":
            sources.append(Source(
                OpExpr.identity(-tau / problem.rho),
                float(val) * np.ones(layout.dim), "pgrad"))
        elif kind == "field":
            sources.append(Source(
                grad_op(problem.component,
                        layout.spacing(problem.component)).scale(-tau / problem.rho),
                np.asarray(val, dtype=float), "p"))
        else:
            raise ProblemError(f"unknown pressure model {kind!r}")
    m_op = _IDENT
    return CostFunction(problem.name, layout, spec, m_op, tuple(sources), bindings)


def _build_einstein(problem: Einstein, fields, layout, tau, spec):
    g = fields[-1]
    ax_i, ax_n = problem.axes
    for ax in (ax_i, ax_n):
        if not layout.has_axis(ax):
            raise ProblemError(f"derivative axis {ax!r} missing from the grid")
    m_op = OpExpr.single(shift(ax_i))
    k = 8.0 * pi * problem.G * layout.spacing(ax_i) * layout.spacing(ax_n) \
        / problem.c ** 4
    t_field = problem.tensor.samples(layout, ax_i)
    sources = (
        Source(OpExpr.single(shift(ax_i)), g, "g"),
        Source(OpExpr.identity(k), t_field, "T"),
    )
    return CostFunction(problem.name, layout, spec, m_op, sources, {})


_CYCLIC = {"x": ("y", "z"), "y": ("z", "x"), "z": ("x", "y")}


def _build_maxwell(problem: Maxwell, fields, layout, tau, spec):
    f = fields[-1]
    i = problem.component
    j, k = _CYCLIC[i]
    ext = problem.ext_fields or {}
    other = "E" if problem.which == "B" else "B"
    # dB_i/dt = -(curl E)_i ; dE_i/dt = +(curl B)_i / (mu0 eps0)
    sign = -tau if problem.which == "B" else tau / (problem.mu0 * problem.eps0)
    sources = [Source(_IDENT, f, problem.which.lower())]
    for d_ax, comp_ax, s in ((j, k, 1.0), (k, j, -1.0)):
        key = f"{other}_{comp_ax}"
        if key not in ext or not layout.has_axis(d_ax):
            continue
        sources.append(Source(
            grad_op(d_ax, layout.spacing(d_ax)).scale(sign * s),
            np.asarray(ext[key], dtype=float), key))
    return CostFunction(problem.name, layout, spec, _IDENT, tuple(sources), {})


def _lap_full(layout: RegisterLayout) -> OpExpr:
    expr = OpExpr.zero()
    for ax in layout.axis_labels():
        expr = expr + laplacian_op(ax, layout.spacing(ax))
    return expr


def _build_boussinesq(problem: Boussinesq, fields, layout, tau, spec):
    if len(fields) < 2:
        raise ProblemError("second-order time stepping needs two history levels")
    u, u_prev = fields[-1], fields[-2]
    ax = layout.axes[0][0]
    dx = layout.spacing(ax)
    lap = laplacian_op(ax, dx)
    gr = grad_op(ax, dx)
    m_op = _IDENT - lap.scale(problem.beta)
    bindings = {"bq_u": u}
    expr_u = m_op.scale(2.0) + lap.scale(tau * tau) \
        + (gr * _diag_expr("bq_u") * gr).scale(2.0 * problem.alpha * tau * tau)
    expr_prev = m_op.scale(-1.0)
    sources = (Source(expr_u, u, "u"), Source(expr_prev, u_prev, "u_prev"))
    return CostFunction(problem.name, layout, spec, m_op, sources, bindings)


def _build_lin_tsien(problem: LinTsien, fields, layout, tau, spec):
    u = fields[-1]
    if not (layout.has_axis("x") and layout.has_axis("y")):
        raise ProblemError("this equation needs x and y axes")
    gx = grad_op("x", layout.spacing("x"))
    lx = laplacian_op("x", layout.spacing("x"))
    ly = laplacian_op("y", layout.spacing("y"))
    gradu = np.real(apply_expr(
        gx, QuantumState.from_amplitudes(u.astype(complex)), layout, {}
    ).amplitudes)
    bindings = {"lt_ux": gradu}
    expr_u = gx + (ly - _diag_expr("lt_ux") * lx).scale(0.5 * tau)
    return CostFunction(problem.name, layout, spec, gx,
                        (Source(expr_u, u, "u"),), bindings)


def _build_camassa_holm(problem: CamassaHolm, fields, layout, tau, spec):
    if len(fields) < 2:
        raise ProblemError("the mixed-derivative term needs two history levels")
    u, u_prev = fields[-1], fields[-2]
    ax = layout.axes[0][0]
    dx = layout.spacing(ax)
    gr = grad_op(ax, dx)
    lap = laplacian_op(ax, dx)
    m_op = _IDENT - lap.scale(0.5)
    st = QuantumState.from_amplitudes(u.astype(complex))
    ux = np.real(apply_expr(gr, st, layout, {}).amplitudes)
    bindings = {
        "ch_ux": ux,
        "ch_u": u,
        "ch_lin": 3.0 * u + 2.0 * problem.kappa,
    }
    expr_u = _IDENT + (
        (_diag_expr("ch_ux") * lap).scale(2.0)
        + _diag_expr("ch_u") * gr * lap
        - _diag_expr("ch_lin") * gr
    ).scale(tau)
    expr_prev = lap.scale(-0.5)
    sources = (Source(expr_u, u, "u"), Source(expr_prev, u_prev, "u_prev"))
    return CostFunction(problem.name, layout, spec, m_op, sources, bindings)


def _build_dsw(problem: DSW, fields, layout, tau, spec):
    """Coupled pair: fields = [u, v] at the current step."""
    if len(fields) < 2:
        raise ProblemError("the coupled system needs both current fields")
    u, v = fields[-2], fields[-1]
    ax = layout.axes[0][0]
    dx = layout.spacing(ax)
    gr = grad_op(ax, dx)
    lap = laplacian_op(ax, dx)
    u_bind = {"dsw_v": v}
    expr_uu = _IDENT
    expr_uv = (_diag_expr("dsw_v") * gr).scale(-3.0 * tau)
    cost_u = CostFunction(problem.name + "-u", layout, spec, _IDENT,
                          (Source(expr_uu, u, "u"), Source(expr_uv, v, "v")),
                          u_bind)
    v_bind = {"dsw_u": u}
    m_v = _IDENT - (gr * lap).scale(2.0 * tau)
    expr_vv = _IDENT + (_diag_expr("dsw_u") * gr).scale(2.0 * tau)
    expr_vu = gr.scale(tau)
    cost_v = CostFunction(problem.name + "-v", layout, spec, m_v,
                          (Source(expr_vv, v, "v"), Source(expr_vu, u, "u")),
                          v_bind)
    return JointCost(problem.name, (cost_u, cost_v))


def _build_hunter_saxton(problem: HunterSaxton, fields, layout, tau, spec):
    u = fields[-1]
    ax = layout.axes[0][0]
    dx = layout.spacing(ax)
    gr = grad_op(ax, dx)
    st = QuantumState.from_amplitudes(u.astype(complex))
    ux = np.real(apply_expr(gr, st, layout, {}).amplitudes)
    bindings = {"hs_ux": ux, "hs_u": u}
    expr_u = gr + (
        _diag_expr("hs_ux").scale(0.5) * gr - gr * _diag_expr("hs_u") * gr
    ).scale(tau)
    return CostFunction(problem.name, layout, spec, gr,
                        (Source(expr_u, u, "u"),), bindings)


_BUILDERS = {
    NavierStokes: _build_navier_stokes,
    Einstein: _build_einstein,
    Maxwell: _build_maxwell,
    Boussinesq: _build_boussinesq,
    LinTsien: _build_lin_tsien,
    CamassaHolm: _build_camassa_holm,
    DSW: _build_dsw,
    HunterSaxton: _build_hunter_saxton,
}


def build_cost(problem, history, layout: RegisterLayout, tau: float,
               spec: AnsatzSpec):
    """Assemble the per-step cost from frozen history fields.

    ``history`` holds field arrays (or objects exposing .field()) ordered
    oldest to newest; depth must match the equation's time order.  For the
    coupled system the two entries are the current (u, v) pair and the result
    optimizes both candidates jointly.
    """
    if tau <= 0:
        raise ProblemError("time step must be positive")
    if type(problem) not in _BUILDERS:
        raise ProblemError(f"unsupported problem {problem!r}")
    fields = _history_fields(history, layout)
    if len(fields) < problem.history_depth:
        raise ProblemError(
            f"{problem.name} needs {problem.history_depth} history levels, "
            f"got {len(fields)}"
        )
    if 2 ** spec.n_qubits != layout.dim:
        raise ProblemError("ansatz size does not match the grid")
    return _BUILDERS[type(problem)](problem, fields, layout, tau, spec)


def evaluate_cost(cost, lam, lam0: float, mode: str = "exact",
                  shots: int | None = None,
                  rng: np.random.Generator | None = None) -> float:
    """Uniform front door: exact closed evaluation or per-term estimation."""
    if mode == "exact":
        return cost.evaluate(lam, lam0)
    if mode == "terms":
        return cost.evaluate_terms(lam, lam0)
    if mode == "shots":
        if shots is None or shots < 1:
            raise SimulationError("shot mode needs a positive shot count")
        return cost.evaluate_terms(lam, lam0, shots=shots, rng=rng)
    raise SimulationError(f"unknown evaluation mode {mode!r}")


def cost_term_list(cost) -> tuple:
    if isinstance(cost, JointCost):
        return tuple((p.name, p.term_list()) for p in cost.parts)
    return cost.term_list()
