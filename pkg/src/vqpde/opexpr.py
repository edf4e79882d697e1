"""Symbolic algebra over shift/diagonal operator atoms.

An expression is a sum of scalar-weighted ordered products of atoms
(identity, cyclic shift per axis, its adjoint, and diagonal multiplication by
a named classical field).  Discrete derivative operators, residuals, and the
expanded cost superpositions are all values of this algebra; applying an
expression to a state resolves shift atoms against a register layout and
diagonal atoms against a field-binding table.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .statevec import (
    QuantumState,
    RegisterLayout,
    SimulationError,
    apply_diagonal,
    apply_shift,
)


@dataclass(frozen=True)
class OpAtom:
    """One factor: 'shift'/'shiftdag' carry an axis, 'diag' a field name."""

    kind: str  # shift | shiftdag | diag
    axis: str | None = None
    field: str | None = None

    def __post_init__(self):
        if self.kind in ("shift", "shiftdag"):
            if not self.axis:
                raise ValueError(f"{self.kind} atom needs an axis label")
        elif self.kind == "diag":
            if not self.field:
                raise ValueError("diag atom needs a field name")
        else:
            raise ValueError(f"unknown atom kind {self.kind!r}")

    def adjoint(self) -> "OpAtom":
        if self.kind == "shift":
            return OpAtom("shiftdag", axis=self.axis)
        if self.kind == "shiftdag":
            return OpAtom("shift", axis=self.axis)
        return self  # diagonal atoms hold real fields

    def is_unitary(self) -> bool:
        return self.kind != "diag"

    def label(self) -> str:
        if self.kind == "shift":
            return f"A[{self.axis}]"
        if self.kind == "shiftdag":
            return f"Adag[{self.axis}]"
        return f"D[{self.field}]"

    def _sort_key(self):
        return (self.axis, self.kind)


def shift(axis: str) -> OpAtom:
    return OpAtom("shift", axis=axis)


def shiftdag(axis: str) -> OpAtom:
    return OpAtom("shiftdag", axis=axis)


def diag(field: str) -> OpAtom:
    return OpAtom("diag", field=field)


def _commutes(a: OpAtom, b: OpAtom) -> bool:
    # Only shift-type atoms on different axes are reordered; diagonal atoms
    # and same-axis shifts keep their written order.
    return a.is_unitary() and b.is_unitary() and a.axis != b.axis


def _canonical_atoms(atoms) -> tuple:
    """Stable reordering using only adjacent swaps of commuting atoms."""
    atoms = list(atoms)
    changed = True
    while changed:
        changed = False
        for i in range(len(atoms) - 1):
            a, b = atoms[i], atoms[i + 1]
            if _commutes(a, b) and a._sort_key() > b._sort_key():
                atoms[i], atoms[i + 1] = b, a
                changed = True
    return tuple(atoms)


@dataclass(frozen=True)
class OpTerm:
    """coeff * (ordered product of atoms); empty product is the identity."""

    coeff: complex
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not np.isfinite(self.coeff):
            raise ValueError("term coefficient must be finite")

    def is_unitary_product(self) -> bool:
        return all(a.is_unitary() for a in self.atoms)

    def label(self) -> str:
        return "*".join(a.label() for a in self.atoms) if self.atoms else "1"

    def key(self) -> tuple:
        return tuple((a.kind, a.axis, a.field) for a in self.atoms)


@dataclass(frozen=True)
class OpExpr:
    """Canonical sum of terms: like atom sequences merged, zeros dropped."""

    terms: tuple = ()

    def __post_init__(self):
        merged: dict = {}
        order: list = []
        for t in self.terms:
            atoms = _canonical_atoms(t.atoms)
            k = tuple((a.kind, a.axis, a.field) for a in atoms)
            if k in merged:
                merged[k] = (merged[k][0] + complex(t.coeff), atoms)
            else:
                merged[k] = (complex(t.coeff), atoms)
                order.append(k)
        out = [
            OpTerm(c, atoms)
            for k in sorted(order)
            for c, atoms in [merged[k]]
            if abs(c) > 0.0
        ]
        object.__setattr__(self, "terms", tuple(out))

    # -- construction helpers ------------------------------------------------

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "OpExpr":
        return cls((OpTerm(coeff),))

    @classmethod
    def zero(cls) -> "OpExpr":
        return cls(())

    @classmethod
    def single(cls, atom: OpAtom, coeff: complex = 1.0) -> "OpExpr":
        return cls((OpTerm(coeff, (atom,)),))

    def __add__(self, other: "OpExpr") -> "OpExpr":
        return OpExpr(self.terms + other.terms)

    def __sub__(self, other: "OpExpr") -> "OpExpr":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "OpExpr":
        return OpExpr(tuple(OpTerm(t.coeff * c, t.atoms) for t in self.terms))

    def __mul__(self, other: "OpExpr") -> "OpExpr":
        return expand_product([self, other])

    def serialize(self) -> str:
        """Deterministic plain-text term list for golden-file comparison."""
        lines = []
        for t in self.terms:
            c = t.coeff
            if abs(c.imag) < 1e-300:
                cs = f"{c.real:+.12g}"
            else:
                cs = f"({c.real:+.12g}{c.imag:+.12g}j)"
            lines.append(f"{cs} * {t.label()}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Discrete derivative builders
# ---------------------------------------------------------------------------

def grad_op(axis: str, delta: float) -> OpExpr:
    """Forward difference (1/delta)(A - 1)."""
    if delta <= 0:
        raise ValueError("grid spacing must be positive")
    return OpExpr((
        OpTerm(1.0 / delta, (shift(axis),)),
        OpTerm(-1.0 / delta),
    ))


def laplacian_op(axis: str, delta: float) -> OpExpr:
    """Symmetric second difference (1/delta^2)(Adag - 2 + A)."""
    if delta <= 0:
        raise ValueError("grid spacing must be positive")
    d2 = delta * delta
    return OpExpr((
        OpTerm(1.0 / d2, (shiftdag(axis),)),
        OpTerm(-2.0 / d2),
        OpTerm(1.0 / d2, (shift(axis),)),
    ))


def expand_product(factors) -> OpExpr:
    """Distribute a product of sums into a canonical sum of terms."""
    factors = list(factors)
    if not factors:
        raise ValueError("empty factor list")
    out = []
    for combo in product(*(f.terms for f in factors)):
        coeff = 1.0 + 0.0j
        atoms: list = []
        for t in combo:
            coeff *= t.coeff
            atoms.extend(t.atoms)
        out.append(OpTerm(coeff, tuple(atoms)))
    return OpExpr(tuple(out))


def adjoint(expr: OpExpr) -> OpExpr:
    return OpExpr(tuple(
        OpTerm(np.conj(t.coeff), tuple(a.adjoint() for a in reversed(t.atoms)))
        for t in expr.terms
    ))


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def _apply_atom(atom: OpAtom, state: QuantumState, layout: RegisterLayout,
                bindings) -> QuantumState:
    if atom.kind == "shift":
        return apply_shift(state, layout, atom.axis, "forward")
    if atom.kind == "shiftdag":
        return apply_shift(state, layout, atom.axis, "backward")
    if bindings is None or atom.field not in bindings:
        raise SimulationError(f"unresolved field reference {atom.field!r}")
    return apply_diagonal(state, np.asarray(bindings[atom.field], dtype=float))


def apply_term(term: OpTerm, state: QuantumState, layout: RegisterLayout,
               bindings=None) -> QuantumState:
    out = state
    for atom in reversed(term.atoms):  # rightmost atom acts first
        out = _apply_atom(atom, out, layout, bindings)
    return QuantumState(term.coeff * out.amplitudes, out.n_qubits)


def apply_expr(expr: OpExpr, state: QuantumState, layout: RegisterLayout,
               bindings=None) -> QuantumState:
    acc = np.zeros_like(state.amplitudes)
    for term in expr.terms:
        acc = acc + apply_term(term, state, layout, bindings).amplitudes
    return QuantumState(acc, state.n_qubits)


def dense_matrix(expr: OpExpr, layout: RegisterLayout, bindings=None) -> np.ndarray:
    """Column-by-column dense construction (testing and small solves)."""
    dim = layout.dim
    mat = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[j] = 1.0
        col = apply_expr(expr, QuantumState(e, layout.total_qubits), layout, bindings)
        mat[:, j] = col.amplitudes
    return mat
