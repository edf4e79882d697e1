"""Dense statevector simulator: gates, cyclic shifts, QFT, expectation estimation.

Conventions
-----------
Little-endian qubit order: basis index ``j`` has qubit 0 as its least
significant bit.  A register layout partitions the qubits into contiguous
axis registers (first axis occupies the lowest qubits); basis index ``j`` of
an axis register encodes grid point ``x_j = j * delta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, sin, sqrt

import numpy as np

_SQRT2_INV = 1.0 / sqrt(2.0)

NORM_TOL = 1e-12


class SimulationError(ValueError):
    """Raised for invalid gate targets, axis labels, or dimension mismatches."""


@dataclass(frozen=True)
class QuantumState:
    """Immutable vector of 2^n complex amplitudes."""

    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size != 2 ** self.n_qubits:
            raise SimulationError(
                f"amplitude vector of length {amps.size} does not match "
                f"{self.n_qubits} qubits"
            )
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amps) -> "QuantumState":
        amps = np.asarray(amps, dtype=complex)
        n = int(round(np.log2(amps.size)))
        return cls(amps, n)

    @classmethod
    def zero(cls, n_qubits: int) -> "QuantumState":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered axis registers: (label, qubit count, grid spacing)."""

    axes: tuple  # of (label: str, n_qubits: int, delta: float)

    def __post_init__(self):
        axes = tuple((str(l), int(n), float(d)) for l, n, d in self.axes)
        seen = set()
        for label, n, d in axes:
            if n <= 0:
                raise SimulationError(f"axis {label!r} has no qubits")
            if d <= 0:
                raise SimulationError(f"axis {label!r} has nonpositive spacing")
            if label in seen:
                raise SimulationError(f"duplicate axis label {label!r}")
            seen.add(label)
        object.__setattr__(self, "axes", axes)

    @property
    def total_qubits(self) -> int:
        return sum(n for _, n, _ in self.axes)

    @property
    def dim(self) -> int:
        return 2 ** self.total_qubits

    def axis_labels(self) -> tuple:
        return tuple(label for label, _, _ in self.axes)

    def has_axis(self, label: str) -> bool:
        return any(l == label for l, _, _ in self.axes)

    def axis_info(self, label: str):
        """Return (qubit offset, n_qubits, delta) for an axis."""
        offset = 0
        for l, n, d in self.axes:
            if l == label:
                return offset, n, d
            offset += n
        raise SimulationError(f"unknown axis {label!r}")

    def spacing(self, label: str) -> float:
        return self.axis_info(label)[2]

    def axis_points(self, label: str) -> int:
        return 2 ** self.axis_info(label)[1]

    def grid_shape(self) -> tuple:
        """Points per axis, in axis order."""
        return tuple(2 ** n for _, n, _ in self.axes)


def layout_1d(n_qubits: int, delta: float, label: str = "x") -> RegisterLayout:
    return RegisterLayout(((label, n_qubits, delta),))


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    """Tagged gate: kind plus optional rotation/phase angle."""

    kind: str
    theta: float = 0.0

    _ONE_QUBIT = frozenset({"H", "RX", "RY", "RZ", "X", "Z"})
    _TWO_QUBIT = frozenset({"CNOT", "CPHASE", "SWAP"})

    def __post_init__(self):
        if self.kind not in self._ONE_QUBIT | self._TWO_QUBIT:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        if not np.isfinite(self.theta):
            raise SimulationError("gate angle must be finite")

    @property
    def n_targets(self) -> int:
        return 1 if self.kind in self._ONE_QUBIT else 2

    def matrix(self) -> np.ndarray:
        k, t = self.kind, self.theta
        if k == "H":
            return np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV
        if k == "X":
            return np.array([[0, 1], [1, 0]], dtype=complex)
        if k == "Z":
            return np.array([[1, 0], [0, -1]], dtype=complex)
        if k == "RX":
            c, s = cos(t / 2), sin(t / 2)
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
        if k == "RY":
            c, s = cos(t / 2), sin(t / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        if k == "RZ":
            return np.array(
                [[np.exp(-1j * t / 2), 0], [0, np.exp(1j * t / 2)]], dtype=complex
            )
        raise SimulationError(f"no single-qubit matrix for {k!r}")


def apply_gate(state: QuantumState, gate: Gate, targets) -> QuantumState:
    """Apply a gate to the given qubit indices; returns a fresh state."""
    targets = tuple(int(q) for q in targets)
    n = state.n_qubits
    if len(set(targets)) != len(targets):
        raise SimulationError(f"duplicate targets {targets}")
    if any(q < 0 or q >= n for q in targets):
        raise SimulationError(f"target out of range for {n} qubits: {targets}")
    if len(targets) != gate.n_targets:
        raise SimulationError(
            f"gate {gate.kind} expects {gate.n_targets} targets, got {len(targets)}"
        )

    psi = state.amplitudes.reshape([2] * n)  # tensor axis i holds qubit n-1-i
    if gate.n_targets == 1:
        (q,) = targets
        ax = n - 1 - q
        psi = np.moveaxis(psi, ax, -1)
        psi = psi @ gate.matrix().T
        psi = np.moveaxis(psi, -1, ax)
        return QuantumState(psi.reshape(-1), n)

    control, target = targets
    ac, at = n - 1 - control, n - 1 - target
    new = psi.copy()
    if gate.kind == "CNOT":
        sel1 = [slice(None)] * n
        sel1[ac] = 1
        sub = new[tuple(sel1)]
        new[tuple(sel1)] = np.flip(sub, axis=at if at < ac else at - 1)
    elif gate.kind == "CPHASE":
        sel = [slice(None)] * n
        sel[ac] = 1
        sel[at] = 1
        new[tuple(sel)] = new[tuple(sel)] * np.exp(1j * gate.theta)
    elif gate.kind == "SWAP":
        new = np.swapaxes(psi, ac, at)
    return QuantumState(new.reshape(-1), n)


# ---------------------------------------------------------------------------
# Axis-register operations
# ---------------------------------------------------------------------------

def _axis_view(state: QuantumState, layout: RegisterLayout, axis: str):
    """Reshape amplitudes to (high, axis_dim, low) around the axis register."""
    if layout.total_qubits != state.n_qubits:
        raise SimulationError("layout does not match state size")
    offset, n_ax, _ = layout.axis_info(axis)
    low = 2 ** offset
    dim = 2 ** n_ax
    high = state.amplitudes.size // (low * dim)
    return state.amplitudes.reshape(high, dim, low)


def apply_shift(state: QuantumState, layout: RegisterLayout, axis: str,
                direction: str = "forward") -> QuantumState:
    """Cyclic modular increment of an axis register.

    ``forward`` maps grid index j to (j+1) mod N; ``backward`` is the inverse.
    """
    if direction not in ("forward", "backward"):
        raise SimulationError(f"unknown shift direction {direction!r}")
    view = _axis_view(state, layout, axis)
    # A|j> = |j+1 mod N>: the amplitude at output index j+1 comes from index j.
    k = 1 if direction == "forward" else -1
    return QuantumState(np.roll(view, k, axis=1).reshape(-1), state.n_qubits)


def apply_diagonal(state: QuantumState, values) -> QuantumState:
    """Amplitude-wise product with a classical field (generally non-unitary)."""
    values = np.asarray(values)
    if values.shape != state.amplitudes.shape:
        raise SimulationError(
            f"diagonal of length {values.size} does not match state of "
            f"dimension {state.amplitudes.size}"
        )
    return QuantumState(values * state.amplitudes, state.n_qubits)


def inner(bra: QuantumState, ket: QuantumState) -> complex:
    """<bra|ket> = sum_i conj(bra_i) ket_i."""
    if bra.n_qubits != ket.n_qubits:
        raise SimulationError("inner product of states with different dimensions")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


_DFT_CACHE: dict = {}


def _dft_matrix(dim: int) -> np.ndarray:
    if dim not in _DFT_CACHE:
        j = np.arange(dim)
        _DFT_CACHE[dim] = np.exp(2j * np.pi * np.outer(j, j) / dim) / sqrt(dim)
    return _DFT_CACHE[dim]


def qft(state: QuantumState, layout: RegisterLayout, axis: str,
        inverse: bool = False) -> QuantumState:
    """Discrete-Fourier unitary on one axis register."""
    view = _axis_view(state, layout, axis)
    f = _dft_matrix(view.shape[1])
    if inverse:
        f = f.conj().T
    out = np.einsum("jk,hkl->hjl", f, view)
    return QuantumState(out.reshape(-1), state.n_qubits)


# ---------------------------------------------------------------------------
# Hadamard-test expectation estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float


def hadamard_test(bra: QuantumState, ket: QuantumState, op_apply,
                  part: str = "real", shots: int | None = None,
                  rng: np.random.Generator | None = None,
                  op_is_unitary: bool = True) -> Estimate:
    """Estimate Re or Im <bra|op|ket>.

    Exact mode (``shots=None``) contracts the statevector directly.  Shot mode
    simulates the ancilla measurement record of the two-state Hadamard test:
    the ancilla X (or Y) expectation equals the requested part, and each shot
    is a +/-1 Bernoulli draw, so the estimator is unbiased with standard
    error <= 1/sqrt(shots) for normalized states and unitary ops.
    """
    if part not in ("real", "imag"):
        raise SimulationError(f"unknown part {part!r}")
    applied = op_apply(ket)
    val = inner(bra, applied)
    exact = val.real if part == "real" else val.imag
    if shots is None:
        return Estimate(float(exact), 0.0)
    if not op_is_unitary:
        raise SimulationError("shot-mode estimation requires a unitary op")
    if rng is None:
        rng = np.random.default_rng()
    p = min(max((1.0 + exact) / 2.0, 0.0), 1.0)
    ones = rng.binomial(shots, p)
    est = 2.0 * ones / shots - 1.0
    stderr = sqrt(max(p * (1.0 - p), 1e-300) * 4.0 / shots)
    return Estimate(float(est), float(stderr))
