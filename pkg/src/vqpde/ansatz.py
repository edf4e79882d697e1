"""Parametrized state preparation: layered rotations with entanglers.

The family is an optional leading Fourier block followed by ``layers``
repetitions of single-qubit rotations (a fixed subset of {Y, Z} axes) and an
entangling pattern of CNOTs.  A prepared state together with a real scale
``lambda0`` represents the physical field lambda0 * amplitudes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevec import (
    Gate,
    QuantumState,
    RegisterLayout,
    SimulationError,
    apply_gate,
    inner,
    qft,
)

_ENTANGLERS = ("chain", "ring", "none")
_ROTATIONS = ("Y", "Z")


@dataclass(frozen=True)
class AnsatzSpec:
    """Shape of the preparation circuit; parameter layout is
    lambda[layer][rotation-axis][qubit], flattened in that order."""

    n_qubits: int
    layers: int = 1
    entangler: str = "chain"
    qft_block: bool = False
    rotation_axes: tuple = ("Y",)

    def __post_init__(self):
        object.__setattr__(self, "rotation_axes", tuple(self.rotation_axes))
        if self.n_qubits < 1:
            raise SimulationError("ansatz needs at least one qubit")
        if self.layers < 1:
            raise SimulationError("ansatz needs at least one layer")
        if self.entangler not in _ENTANGLERS:
            raise SimulationError(f"unknown entangler {self.entangler!r}")
        if not self.rotation_axes or any(a not in _ROTATIONS
                                         for a in self.rotation_axes):
            raise SimulationError(
                f"rotation axes must be a nonempty subset of {_ROTATIONS}"
            )

    @property
    def parameter_count(self) -> int:
        return self.layers * self.n_qubits * len(self.rotation_axes)


@dataclass(frozen=True)
class VariationalState:
    """(ansatz parameters, scale) pair; the field is lam0 * prepare(spec, lam)."""

    spec: AnsatzSpec
    lam: np.ndarray
    lam0: float

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (self.spec.parameter_count,):
            raise SimulationError(
                f"expected {self.spec.parameter_count} parameters, got {lam.size}"
            )
        if not np.isfinite(self.lam0):
            raise SimulationError("scale must be finite")
        lam = lam.copy()
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "lam0", float(self.lam0))

    def state(self) -> QuantumState:
        return prepare(self.spec, self.lam)

    def field(self) -> np.ndarray:
        return self.lam0 * np.real(self.state().amplitudes)


def _entangle(state: QuantumState, spec: AnsatzSpec) -> QuantumState:
    n = spec.n_qubits
    if spec.entangler == "none" or n == 1:
        return state
    for q in range(n - 1):
        state = apply_gate(state, Gate("CNOT"), (q, q + 1))
    if spec.entangler == "ring" and n > 2:
        state = apply_gate(state, Gate("CNOT"), (n - 1, 0))
    return state


def prepare(spec: AnsatzSpec, lam) -> QuantumState:
    """Deterministic normalized state for the given parameters."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (spec.parameter_count,):
        raise SimulationError(
            f"expected {spec.parameter_count} parameters, got {lam.size}"
        )
    state = QuantumState.zero(spec.n_qubits)
    if spec.qft_block:
        layout = RegisterLayout((("q", spec.n_qubits, 1.0),))
        state = qft(state, layout, "q")
    k = 0
    for _ in range(spec.layers):
        for axis in spec.rotation_axes:
            kind = "RY" if axis == "Y" else "RZ"
            for q in range(spec.n_qubits):
                state = apply_gate(state, Gate(kind, lam[k]), (q,))
                k += 1
        state = _entangle(state, spec)
    return state


def amplitude_encode(samples) -> tuple:
    """Exact encoding of a real field: (normalized state, norm as scale)."""
    samples = np.asarray(samples, dtype=float)
    scale = float(np.linalg.norm(samples))
    if scale == 0.0:
        raise SimulationError("cannot encode an identically zero field")
    return QuantumState.from_amplitudes(samples / scale), scale


def fit_ansatz(spec: AnsatzSpec, target: QuantumState, optimizer,
               x0=None) -> tuple:
    """Maximize |<target|Psi(lam)>|; returns (best lam, achieved overlap)."""
    from .optim import minimize  # deferred: optim imports nothing from here

    if 2 ** spec.n_qubits != target.amplitudes.size:
        raise SimulationError("ansatz and target dimensions differ")

    def objective(lam):
        ov = inner(target, prepare(spec, lam))
        return -abs(ov) ** 2

    if x0 is None:
        x0 = np.zeros(spec.parameter_count)
    trace = minimize(objective, x0, optimizer)
    overlap = float(np.sqrt(max(-trace.f_best, 0.0)))
    return np.asarray(trace.x_best), overlap
