"""Sparse state-vector simulation over named registers.

A basis label is an ``int`` over the total width ``W``; global qubit ``q``
lives at bit weight ``2**(W-1-q)`` so the printed label reads left to right
in register order.

Protocol runs are described as a list of *stages*. A stage maps a
:class:`Node` (state plus classical record) to weighted children.
:func:`branch_enumerate` walks the tree depth first and sums exact
acceptance; :func:`monte_carlo` samples one child per stage instead.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, InvalidInput, ResourceError
from .paulisym import PauliOp

PRUNE = 1e-12
DENSE_MAX_QUBITS = 22
UNITARY_TOL = 1e-10
CAP_ENV = "QIOP_BRANCH_CAP"
DEFAULT_CAP = 5_000_000

H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
X_GATE = np.array([[0, 1], [1, 0]], dtype=complex)
Z_GATE = np.array([[1, 0], [0, -1]], dtype=complex)
S_GATE = np.array([[1, 0], [0, 1j]], dtype=complex)
CNOT_GATE = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


class RegisterLayout:
    """Ordered named registers. Width-0 registers are allowed and hold nothing."""

    def __init__(self, regs: Sequence[tuple[str, int]]):
        names = [r[0] for r in regs]
        if len(set(names)) != len(names):
            raise InvalidInput(f"duplicate register names in {names}")
        self.regs: tuple[tuple[str, int], ...] = tuple((str(n), int(w)) for n, w in regs)
        self.offsets: dict[str, int] = {}
        off = 0
        for name, w in self.regs:
            if w < 0:
                raise InvalidInput(f"negative width for {name}")
            self.offsets[name] = off
            off += w
        self.width = off
        self._widths = dict(self.regs)

    def __repr__(self) -> str:
        return f"RegisterLayout({list(self.regs)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, RegisterLayout) and self.regs == other.regs

    def __hash__(self) -> int:
        return hash(self.regs)

    def width_of(self, name: str) -> int:
        return self._widths[name]

    def qubits(self, name: str) -> list[int]:
        off = self.offsets[name]
        return list(range(off, off + self._widths[name]))

    def shift(self, name: str) -> int:
        """Bit shift of the register's least significant qubit inside a label."""
        return self.width - self.offsets[name] - self._widths[name]

    def mask(self, name: str) -> int:
        return ((1 << self._widths[name]) - 1) << self.shift(name)

    def get(self, key: int, name: str) -> int:
        return (key >> self.shift(name)) & ((1 << self._widths[name]) - 1)

    def put(self, key: int, name: str, value: int) -> int:
        return (key & ~self.mask(name)) | (value << self.shift(name))

    def label(self, key: int) -> str:
        return format(key, f"0{self.width}b") if self.width else ""

    def to_json(self) -> list:
        return [[n, w] for n, w in self.regs]


class SparseState:
    """Map from basis label to amplitude. Treat as a value: operations return new states."""

    __slots__ = ("layout", "amps")

    def __init__(self, layout: RegisterLayout, amps: Mapping[int, complex] | None = None):
        self.layout = layout
        self.amps: dict[int, complex] = dict(amps) if amps is not None else {0: 1.0 + 0j}

    @property
    def width(self) -> int:
        return self.layout.width

    def copy(self) -> "SparseState":
        return SparseState(self.layout, self.amps)

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amps.values()))

    def normalized(self) -> "SparseState":
        nrm = math.sqrt(self.norm2())
        if nrm == 0:
            raise InvalidInput("cannot normalize the zero vector")
        return SparseState(self.layout, {k: a / nrm for k, a in self.amps.items()})

    def pruned(self) -> "SparseState":
        return SparseState(self.layout, {k: a for k, a in self.amps.items() if abs(a) >= PRUNE})

    def scaled(self, c: complex) -> "SparseState":
        return SparseState(self.layout, {k: a * c for k, a in self.amps.items()})

    def __add__(self, other: "SparseState") -> "SparseState":
        if other.layout != self.layout:
            raise DimensionError("layouts differ")
        out = dict(self.amps)
        for k, a in other.amps.items():
            out[k] = out.get(k, 0) + a
        return SparseState(self.layout, out).pruned()

    def __sub__(self, other: "SparseState") -> "SparseState":
        return self + other.scaled(-1)

    def inner(self, other: "SparseState") -> complex:
        """``<self|other>``."""
        small, big = (self.amps, other.amps) if len(self.amps) <= len(other.amps) else (other.amps, self.amps)
        tot = 0j
        for k in small:
            if k in big:
                tot += self.amps[k].conjugate() * other.amps[k]
        return tot

    def to_dense(self) -> np.ndarray:
        if self.width > DENSE_MAX_QUBITS:
            raise ResourceError(f"dense backend limited to {DENSE_MAX_QUBITS} qubits")
        v = np.zeros(1 << self.width, dtype=complex)
        for k, a in self.amps.items():
            v[k] = a
        return v

    @classmethod
    def from_dense(cls, layout: RegisterLayout, vec: np.ndarray) -> "SparseState":
        vec = np.asarray(vec, dtype=complex).ravel()
        if vec.shape[0] != 1 << layout.width:
            raise DimensionError("vector length does not match layout width")
        idx = np.nonzero(np.abs(vec) >= PRUNE)[0]
        return cls(layout, {int(i): complex(vec[i]) for i in idx})

    def register_value_probs(self, name: str) -> dict[int, float]:
        out: dict[int, float] = {}
        for k, a in self.amps.items():
            v = self.layout.get(k, name)
            out[v] = out.get(v, 0.0) + abs(a) ** 2
        return out

    def to_json(self) -> dict:
        return {
            "layout": self.layout.to_json(),
            "amplitudes": [{"basis": self.layout.label(k), "re": float(a.real), "im": float(a.imag)}
                           for k, a in sorted(self.amps.items())],
        }

    def __repr__(self) -> str:
        items = ", ".join(f"{self.layout.label(k)}: {a:.4g}" for k, a in sorted(self.amps.items())[:8])
        more = "" if len(self.amps) <= 8 else ", ..."
        return f"SparseState({{{items}{more}}})"


def init_state(layout: RegisterLayout) -> SparseState:
    return SparseState(layout, {0: 1.0 + 0j})


def basis_state(layout: RegisterLayout, values: Mapping[str, int]) -> SparseState:
    key = 0
    for name, v in values.items():
        key = layout.put(key, name, v)
    return SparseState(layout, {key: 1.0 + 0j})


def product_state(layout: RegisterLayout, name: str, vec: np.ndarray, base: SparseState | None = None) -> SparseState:
    """Place the dense vector ``vec`` in register ``name``; the rest comes from ``base`` (default all zero)."""
    vec = np.asarray(vec, dtype=complex).ravel()
    if vec.shape[0] != 1 << layout.width_of(name):
        raise DimensionError("vector does not match register width")
    base = base if base is not None else init_state(layout)
    out: dict[int, complex] = {}
    for k, a in base.amps.items():
        for v in np.nonzero(np.abs(vec) >= PRUNE)[0]:
            nk = layout.put(k, name, int(v))
            out[nk] = out.get(nk, 0) + a * vec[v]
    return SparseState(layout, out).pruned()


def _check_targets(state: SparseState, targets: Sequence[int]):
    if len(set(targets)) != len(targets):
        raise DimensionError("repeated target qubit")
    for q in targets:
        if not 0 <= q < state.width:
            raise DimensionError(f"qubit {q} outside width {state.width}")


def _scatter_offsets(shifts: Sequence[int]) -> list[int]:
    t = len(shifts)
    return [sum(((i >> (t - 1 - j)) & 1) << shifts[j] for j in range(t)) for i in range(1 << t)]


def apply_unitary(state: SparseState, U: np.ndarray, targets: Sequence[int], check: bool = True) -> SparseState:
    """Apply ``U`` to ``targets`` (first target is the most significant index of ``U``)."""
    return apply_matrix(state, U, targets, check_unitary=check)


def apply_matrix(state: SparseState, U: np.ndarray, targets: Sequence[int], check_unitary: bool = False) -> SparseState:
    U = np.asarray(U, dtype=complex)
    t = len(targets)
    if U.shape != (1 << t, 1 << t):
        raise DimensionError(f"matrix of shape {U.shape} on {t} targets")
    _check_targets(state, targets)
    if check_unitary and np.max(np.abs(U.conj().T @ U - np.eye(1 << t))) > UNITARY_TOL:
        raise InvalidInput("matrix is not unitary")
    if not state.amps:
        return state.copy()
    W = state.width
    shifts = [W - 1 - q for q in targets]
    tmask = sum(1 << s for s in shifts)
    offs = _scatter_offsets(shifts)
    index: dict[int, int] = {}
    rows: list[int] = []
    cols: list[int] = []
    vals: list[complex] = []
    for key, amp in state.amps.items():
        rest = key & ~tmask
        g = index.get(rest)
        if g is None:
            g = index[rest] = len(index)
        idx = 0
        for s in shifts:
            idx = (idx << 1) | ((key >> s) & 1)
        rows.append(g)
        cols.append(idx)
        vals.append(amp)
    block = np.zeros((len(index), 1 << t), dtype=complex)
    np.add.at(block, (np.array(rows), np.array(cols)), np.array(vals))
    out_block = block @ U.T
    rests = list(index.keys())
    out: dict[int, complex] = {}
    nz_r, nz_c = np.nonzero(np.abs(out_block) >= PRUNE)
    for g, i in zip(nz_r.tolist(), nz_c.tolist()):
        out[rests[g] | offs[i]] = complex(out_block[g, i])
    return SparseState(state.layout, out)


def apply_classical(state: SparseState, f: Callable[[int], int], phase: Callable[[int], complex] | None = None) -> SparseState:
    """Permute basis labels by ``f`` and multiply by ``phase(old_label)`` if given."""
    out: dict[int, complex] = {}
    for k, a in state.amps.items():
        nk = f(k)
        if nk in out:
            raise InvalidInput("classical map is not injective on the state's support")
        out[nk] = a * phase(k) if phase is not None else a
    return SparseState(state.layout, out)


def apply_phase(state: SparseState, phase: Callable[[int], complex]) -> SparseState:
    out = {}
    for k, a in state.amps.items():
        v = a * phase(k)
        if abs(v) >= PRUNE:
            out[k] = v
    return SparseState(state.layout, out)


def apply_pauli(state: SparseState, P: PauliOp, qubits: Sequence[int]) -> SparseState:
    """Apply ``i^e X(x)Z(z)`` with operator qubit ``j`` acting on global qubit ``qubits[j]``."""
    if len(qubits) != P.n:
        raise DimensionError("qubit list does not match Pauli size")
    _check_targets(state, qubits)
    W = state.width
    xm = zm = 0
    for j, q in enumerate(qubits):
        bit = 1 << (W - 1 - q)
        if (P.x >> (P.n - 1 - j)) & 1:
            xm |= bit
        if (P.z >> (P.n - 1 - j)) & 1:
            zm |= bit
    ph = (1, 1j, -1, -1j)[P.e]
    out = {}
    for k, a in state.amps.items():
        s = -1 if (k & zm).bit_count() & 1 else 1
        out[k ^ xm] = a * ph * s
    return SparseState(state.layout, out)


def apply_op_on_subspace(state: SparseState, op: Callable[[SparseState], SparseState],
                         selector: Callable[[int], bool]) -> SparseState:
    """Apply the linear map ``op`` to the component with ``selector(label)`` true."""
    sel = SparseState(state.layout, {k: a for k, a in state.amps.items() if selector(k)})
    rest = SparseState(state.layout, {k: a for k, a in state.amps.items() if not selector(k)})
    if not sel.amps:
        return state.copy()
    return op(sel) + rest


def controlled_apply(state: SparseState, U: np.ndarray | Callable[[SparseState], SparseState],
                     control: Sequence[int], value: int, targets: Sequence[int] | None = None) -> SparseState:
    """Apply ``U`` where the control qubits read ``value``; identity elsewhere."""
    c = len(control)
    if not 0 <= value < (1 << c):
        raise DimensionError(f"control value {value} needs more than {c} qubits")
    _check_targets(state, control)
    W = state.width
    shifts = [W - 1 - q for q in control]

    def reads(k: int) -> bool:
        v = 0
        for s in shifts:
            v = (v << 1) | ((k >> s) & 1)
        return v == value

    if callable(U):
        op = U
    else:
        if targets is None:
            raise InvalidInput("dense controlled unitary needs targets")
        if set(targets) & set(control):
            raise DimensionError("targets overlap control")
        op = lambda s: apply_unitary(s, U, targets)  # noqa: E731
    return apply_op_on_subspace(state, op, reads)


# ---------------------------------------------------------------------------
# Observables


class Observable:
    """Projector decomposition ``sum_label value(label) * P_label``.

    ``branches`` returns the unnormalized components ``P_label |psi>`` in
    ascending label order, omitting components of zero norm. Binary labels
    0/1 stand for eigenvalues +1/-1.
    """

    def branches(self, state: SparseState) -> list[tuple[int, SparseState]]:
        raise NotImplementedError

    def value(self, label: int) -> float:
        return -1.0 if label == 1 else 1.0

    def apply(self, state: SparseState) -> SparseState:
        """Apply the ±1 observable as a unitary."""
        out = None
        for label, comp in self.branches(state):
            comp = comp.scaled(self.value(label))
            out = comp if out is None else out + comp
        return out if out is not None else SparseState(state.layout, {})


class PauliObservable(Observable):
    def __init__(self, pauli: PauliOp, qubits: Sequence[int]):
        if not pauli.is_hermitian():
            raise InvalidInput("observable Pauli must be Hermitian")
        self.pauli = pauli
        self.qubits = list(qubits)

    def branches(self, state):
        moved = apply_pauli(state, self.pauli, self.qubits)
        plus = (state + moved).scaled(0.5)
        minus = (state - moved).scaled(0.5)
        return [(lab, comp) for lab, comp in ((0, plus), (1, minus)) if comp.norm2() > PRUNE ** 2]

    def apply(self, state):
        return apply_pauli(state, self.pauli, self.qubits)


class ProjectorObservable(Observable):
    """Dense projectors on a qubit subset, each tagged with an integer label."""

    def __init__(self, parts: Sequence[tuple[int, np.ndarray]], qubits: Sequence[int],
                 values: Mapping[int, float] | None = None):
        self.parts = [(int(lab), np.asarray(P, dtype=complex)) for lab, P in parts]
        self.qubits = list(qubits)
        dim = 1 << len(self.qubits)
        total = sum(P for _, P in self.parts)
        if np.max(np.abs(total - np.eye(dim))) > 1e-9:
            raise InvalidInput("projectors do not sum to identity")
        for i, (_, P) in enumerate(self.parts):
            if np.max(np.abs(P @ P - P)) > 1e-9 or np.max(np.abs(P - P.conj().T)) > 1e-9:
                raise InvalidInput("part is not an orthogonal projector")
        self._values = dict(values) if values else None

    def value(self, label):
        return self._values[label] if self._values else super().value(label)

    def branches(self, state):
        out = []
        for lab, P in sorted(self.parts, key=lambda t: t[0]):
            comp = apply_matrix(state, P, self.qubits)
            if comp.norm2() > PRUNE ** 2:
                out.append((lab, comp))
        return out

    @classmethod
    def from_hermitian(cls, O: np.ndarray, qubits: Sequence[int]) -> "ProjectorObservable":
        """Eigen-decompose a Hermitian ``O`` with eigenvalues ±1 into labels 0 (+1) and 1 (-1)."""
        w, v = np.linalg.eigh(O)
        if np.max(np.abs(np.abs(w) - 1)) > 1e-8:
            raise InvalidInput("observable eigenvalues must be ±1")
        parts = []
        for lab, sign in ((0, 1), (1, -1)):
            cols = v[:, np.isclose(w, sign, atol=1e-8)]
            parts.append((lab, cols @ cols.conj().T))
        return cls(parts, qubits)


class DiagonalObservable(Observable):
    """Outcome is a classical function of the basis label."""

    def __init__(self, fn: Callable[[int], int]):
        self.fn = fn

    def branches(self, state):
        groups: dict[int, dict[int, complex]] = {}
        for k, a in state.amps.items():
            groups.setdefault(self.fn(k), {})[k] = a
        return [(lab, SparseState(state.layout, groups[lab])) for lab in sorted(groups)]

    def apply(self, state):
        return apply_phase(state, lambda k: -1 if self.fn(k) & 1 else 1)


def computational(qubits: Sequence[int], width: int) -> DiagonalObservable:
    shifts = [width - 1 - q for q in qubits]

    def fn(k: int) -> int:
        v = 0
        for s in shifts:
            v = (v << 1) | ((k >> s) & 1)
        return v

    return DiagonalObservable(fn)


def measure(state: SparseState, O: Observable) -> list[tuple[int, float, SparseState]]:
    """All outcomes with probability, collapsed and renormalized, in ascending label order."""
    out = []
    for lab, comp in O.branches(state):
        p = comp.norm2()
        if p > PRUNE ** 2:
            out.append((lab, p, comp.scaled(1 / math.sqrt(p))))
    return out


def outcome_probs(state: SparseState, O: Observable) -> dict[int, float]:
    return {lab: comp.norm2() for lab, comp in O.branches(state)}


def purified_measure(state: SparseState, O: Observable, result: Sequence[int]) -> SparseState:
    """``sum_i P_i ⊗ X(label_i)`` with the label written into the ``result`` qubits."""
    r = len(result)
    _check_targets(state, result)
    W = state.width
    shifts = [W - 1 - q for q in result]
    out = None
    for lab, comp in O.branches(state):
        if lab >> r:
            raise DimensionError(f"outcome label {lab} does not fit {r} result qubits")
        xm = 0
        for j, s in enumerate(shifts):
            if (lab >> (r - 1 - j)) & 1:
                xm |= 1 << s
        moved = SparseState(state.layout, {k ^ xm: a for k, a in comp.amps.items()})
        out = moved if out is None else out + moved
    return out if out is not None else SparseState(state.layout, {})


# ---------------------------------------------------------------------------
# EPR pairs


def make_epr(state: SparseState, qa: Sequence[int], qb: Sequence[int]) -> SparseState:
    """Entangle ``qa[i]`` with ``qb[i]`` into ``|phi+>``; both must start in ``|0>``."""
    if len(qa) != len(qb):
        raise DimensionError("EPR halves need equal widths")
    for a, b in zip(qa, qb):
        state = apply_unitary(state, H_GATE, [a])
        state = apply_unitary(state, CNOT_GATE, [a, b])
    return state


def measure_epr_basis(state: SparseState, qa: int, qb: int, reset: bool = False
                      ) -> list[tuple[tuple[int, int], float, SparseState]]:
    """Project ``(qa, qb)`` onto ``E_{s0 s1} = (Z^{s0} X^{s1} ⊗ I)|phi+>``.

    Returns every outcome ``((s0, s1), prob, collapsed)``. With ``reset`` the
    measured pair is left in ``|00>`` instead of ``E_{s0 s1}``, which keeps the
    sparse support small when nobody touches the pair again.
    """
    rot = apply_unitary(apply_unitary(state, CNOT_GATE, [qa, qb]), H_GATE, [qa])
    out = []
    for lab, p, post in measure(rot, computational([qa, qb], state.width)):
        s0, s1 = lab >> 1, lab & 1
        if reset:
            W = state.width
            clear = ~((1 << (W - 1 - qa)) | (1 << (W - 1 - qb)))
            post = SparseState(post.layout, {k & clear: a for k, a in post.amps.items()})
        else:
            post = apply_unitary(apply_unitary(post, H_GATE, [qa]), CNOT_GATE, [qa, qb])
        out.append(((s0, s1), p, post))
    return out


# ---------------------------------------------------------------------------
# Branch enumeration


@dataclass
class Node:
    state: Any
    record: dict = field(default_factory=dict)

    def with_(self, state: Any = None, **updates) -> "Node":
        rec = dict(self.record)
        rec.update(updates)
        return Node(self.state if state is None else state, rec)


Stage = Callable[[Node], Iterable[tuple[float, Node]]]


def branch_cap() -> int:
    return int(os.environ.get(CAP_ENV, DEFAULT_CAP))


@dataclass
class EnumResult:
    acceptance: float
    branches: int
    mode: str = "exact"
    stderr: float = 0.0


def branch_enumerate(stages: Sequence[Stage], accept: Callable[[Node], float], init: Node,
                     cap: int | None = None) -> EnumResult:
    """Exact acceptance: sum over leaves of path probability times ``accept(leaf)``."""
    cap = branch_cap() if cap is None else cap
    leaves = 0
    total = 0.0

    def walk(i: int, node: Node, p: float):
        nonlocal leaves, total
        if i == len(stages):
            leaves += 1
            if leaves > cap:
                raise ResourceError(f"branch cap {cap} exceeded (set {CAP_ENV} to raise it)")
            total += p * float(accept(node))
            return
        for q, child in stages[i](node):
            if q > 0:
                walk(i + 1, child, p * q)

    walk(0, init, 1.0)
    return EnumResult(total, leaves)


def monte_carlo(stages: Sequence[Stage], accept: Callable[[Node], float], init: Node,
                trials: int, rng: np.random.Generator) -> EnumResult:
    """Sample ``trials`` root-to-leaf paths; ``accept`` may return a probability."""
    vals = np.empty(trials)
    for t in range(trials):
        node = init
        for stage in stages:
            kids = [(q, c) for q, c in stage(node) if q > 0]
            ps = np.array([q for q, _ in kids])
            node = kids[int(rng.choice(len(kids), p=ps / ps.sum()))][1]
        vals[t] = float(accept(node))
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return EnumResult(float(vals.mean()), trials, "mc", se)


def draw(name: str, values: Sequence[Any], probs: Sequence[float] | None = None) -> Stage:
    """Classical random draw recorded under ``name`` (uniform unless ``probs`` given)."""
    values = list(values)
    ps = [1.0 / len(values)] * len(values) if probs is None else list(probs)

    def stage(node: Node):
        for v, p in zip(values, ps):
            yield p, node.with_(**{name: v})

    return stage


def act(fn: Callable[[Node], Node]) -> Stage:
    """Deterministic step."""

    def stage(node: Node):
        yield 1.0, fn(node)

    return stage


def measure_stage(name: str, observable: Callable[[Node], Observable | None]) -> Stage:
    """Measure ``observable(node)`` on ``node.state``; ``None`` skips and records nothing."""

    def stage(node: Node):
        O = observable(node)
        if O is None:
            yield 1.0, node
            return
        for lab, p, post in measure(node.state, O):
            yield p, node.with_(state=post, **{name: lab})

    return stage
