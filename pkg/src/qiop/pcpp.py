"""Constant-query PCP of proximity for circuit satisfiability.

The proof for a circuit with ``v`` wires is a pair of Hadamard-code oracles:
``fA`` over ``F_2^v`` encoding the wire assignment ``z`` and ``fB`` over
``F_2^{v*v}`` encoding ``z ⊗ z``. One verifier run performs five tests, each
with its own randomness:

* BLR linearity on ``fA`` and on ``fB``;
* tensor consistency ``fA(r1) fA(r2) == fB(r1 ⊗ r2)``;
* a random GF(2) combination of the gate constraints;
* input consistency between one position of ``y`` and ``fA``.

All reads other than BLR go through self-correction, so a run makes exactly
:data:`QUERIES_PER_RUN` oracle queries regardless of circuit size.

The implicit input ``y`` is either the raw input bits (``"plain"``) or the
Hadamard encoding of the input bits (``"hadamard"``); in the latter case
position ``j`` of ``y`` is compared with ``fA`` at ``j`` placed on the input
wires.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidInput, ResourceError, UnsatisfiableError
from .f2core import BitVec, gf2_rank, parity, tensor
from .hadcode import (HadamardCode, as_oracle, blr_acceptance, self_correct_flip_probs, word_bits,
                      bits_word)

ARITY = {"AND": 2, "XOR": 2, "NOT": 1, "CONST0": 0, "CONST1": 0}
QUERIES_PER_RUN = 3 + 3 + 6 + 4 + 3
TEST_NAMES = ("blr_A", "blr_B", "tensor", "gates", "input")
ENCODINGS = ("plain", "hadamard")
TABLE_MAX_WIRES = 4
# Smallest single-run rejection seen over the toy cheat corpus at relative
# input distance >= 0.25 (both encodings); re-measured by the test suite.
MEASURED_REJECTION = 0.25
MEASURED_AT_DELTA = 0.25
MATERIALIZE_MAX_BITS = 1 << 16


# ---------------------------------------------------------------------------
# Circuits


@dataclass(frozen=True)
class Gate:
    op: str
    args: tuple[int, ...] = ()

    def __post_init__(self):
        if self.op not in ARITY:
            raise InvalidInput(f"unknown gate {self.op!r}")
        object.__setattr__(self, "args", tuple(int(a) for a in self.args))
        if len(self.args) != ARITY[self.op]:
            raise InvalidInput(f"{self.op} takes {ARITY[self.op]} operands")


@dataclass(frozen=True)
class Constraint:
    """``<lin, z> + <quad, z ⊗ z> + const == 0`` over the packed wire assignment."""

    lin: int
    quad: int
    const: int

    def value(self, z: int, zz: int) -> int:
        return parity(self.lin & z) ^ parity(self.quad & zz) ^ self.const


@dataclass(frozen=True)
class BooleanCircuit:
    """Wires ``0..inputs-1`` are inputs; gate ``g`` drives wire ``inputs + g``."""

    inputs: int
    gates: tuple[Gate, ...]
    output: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g, gate in enumerate(self.gates):
            for a in gate.args:
                if not 0 <= a < self.inputs + g:
                    raise InvalidInput(f"gate {g} reads wire {a} that is not yet defined")
        if not 0 <= self.output < self.v:
            raise InvalidInput("output wire out of range")

    @property
    def v(self) -> int:
        return self.inputs + len(self.gates)

    def wires(self, y: Sequence[int] | BitVec) -> list[int]:
        bits = list(y.bits) if isinstance(y, BitVec) else [int(b) for b in y]
        if len(bits) != self.inputs:
            raise DimensionError(f"circuit takes {self.inputs} inputs, got {len(bits)}")
        w = bits[:]
        for gate in self.gates:
            a = [w[i] for i in gate.args]
            w.append({"AND": lambda: a[0] & a[1], "XOR": lambda: a[0] ^ a[1], "NOT": lambda: 1 - a[0],
                      "CONST0": lambda: 0, "CONST1": lambda: 1}[gate.op]())
        return w

    def __call__(self, y) -> int:
        return self.wires(y)[self.output]

    def pack(self, wires: Sequence[int]) -> int:
        z = 0
        for b in wires:
            z = (z << 1) | b
        return z

    def _bit(self, i: int) -> int:
        return 1 << (self.v - 1 - i)

    def _qbit(self, i: int, j: int) -> int:
        v = self.v
        return 1 << (v * v - 1 - (i * v + j))

    def constraints(self) -> list[Constraint]:
        out = []
        for g, gate in enumerate(self.gates):
            o = self.inputs + g
            lin, quad, const = self._bit(o), 0, 0
            if gate.op == "XOR":
                for a in gate.args:
                    lin ^= self._bit(a)
            elif gate.op == "NOT":
                lin ^= self._bit(gate.args[0])
                const = 1
            elif gate.op == "AND":
                quad = self._qbit(*gate.args)
            elif gate.op == "CONST1":
                const = 1
            out.append(Constraint(lin, quad, const))
        out.append(Constraint(self._bit(self.output), 0, 1))
        return out

    def satisfying_inputs(self) -> list[int]:
        if self.inputs > 16:
            raise ResourceError("input enumeration limited to 16 bits")
        return [y for y in range(1 << self.inputs) if self(BitVec(self.inputs, y).bits)]

    def to_json(self) -> dict:
        return {"inputs": self.inputs, "gates": [{"op": g.op, "args": list(g.args)} for g in self.gates],
                "output": self.output}

    @classmethod
    def from_json(cls, obj: dict) -> "BooleanCircuit":
        return cls(int(obj["inputs"]), tuple(Gate(g["op"], tuple(g.get("args", ()))) for g in obj["gates"]),
                   int(obj["output"]))


class CircuitBuilder:
    """Incremental construction; every method returns the new wire index."""

    def __init__(self, inputs: int):
        self.inputs = inputs
        self.gates: list[Gate] = []

    def _add(self, op: str, *args: int) -> int:
        self.gates.append(Gate(op, args))
        return self.inputs + len(self.gates) - 1

    def AND(self, a: int, b: int) -> int:
        return self._add("AND", a, b)

    def XOR(self, a: int, b: int) -> int:
        return self._add("XOR", a, b)

    def NOT(self, a: int) -> int:
        return self._add("NOT", a)

    def const(self, bit: int) -> int:
        return self._add("CONST1" if bit else "CONST0")

    def OR(self, a: int, b: int) -> int:
        return self.NOT(self.AND(self.NOT(a), self.NOT(b)))

    def xor_all(self, wires: Sequence[int], empty: int = 0) -> int:
        if not wires:
            return self.const(empty)
        acc = wires[0]
        for w in wires[1:]:
            acc = self.XOR(acc, w)
        return acc

    def or_all(self, wires: Sequence[int]) -> int:
        if not wires:
            return self.const(0)
        acc = wires[0]
        for w in wires[1:]:
            acc = self.OR(acc, w)
        return acc

    def build(self, output: int) -> BooleanCircuit:
        return BooleanCircuit(self.inputs, tuple(self.gates), output)


# ---------------------------------------------------------------------------
# Proof oracles


class LinearOracle:
    """Exact Hadamard codeword: position ``pos`` holds ``<pos, coeff>``."""

    def __init__(self, width: int, coeff: int):
        self.width = width
        self.coeff = coeff
        self.size = 1 << width

    def query(self, pos: int) -> int:
        return parity(pos & self.coeff)


class BitsOracle:
    """Materialized table (``bits[pos]``)."""

    def __init__(self, bits: np.ndarray):
        self.bits = np.asarray(bits, dtype=np.uint8)
        self.size = self.bits.shape[0]
        self.width = self.size.bit_length() - 1

    def query(self, pos: int) -> int:
        return int(self.bits[pos])


def materialize(oracle) -> np.ndarray:
    size = oracle.size
    if size > MATERIALIZE_MAX_BITS:
        raise ResourceError(f"oracle of size {size} exceeds the materialization cap")
    if isinstance(oracle, BitsOracle):
        return oracle.bits
    if isinstance(oracle, LinearOracle):
        pos = np.arange(size, dtype=np.int64)
        return (np.bitwise_count(pos & oracle.coeff) & 1).astype(np.uint8)
    return np.array([oracle.query(p) for p in range(size)], dtype=np.uint8)


@dataclass
class PcppProof:
    v: int
    fA: object
    fB: object
    note: str = "honest"
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.fA.size != 1 << self.v or self.fB.size != 1 << (self.v * self.v):
            raise DimensionError("proof oracle sizes do not match the wire count")


@dataclass(frozen=True)
class PcppParams:
    repetitions: int = 12
    delta: float = 0.25
    soundness: float = 0.5

    def __post_init__(self):
        if self.repetitions < 1:
            raise InvalidInput("repetitions must be positive")
        if not (0 < self.delta < 1 and 0 < self.soundness < 1):
            raise InvalidInput("delta and soundness must lie in (0, 1)")


def _input_word(C: BooleanCircuit, y, encoding: str) -> BitVec:
    if encoding not in ENCODINGS:
        raise InvalidInput(f"unknown input encoding {encoding!r}")
    if isinstance(y, BitVec):
        word = y
    else:
        word = BitVec.from_bits(list(y))
    want = C.inputs if encoding == "plain" else 1 << C.inputs
    if word.n != want:
        raise DimensionError(f"implicit input has length {word.n}, expected {want}")
    return word


def input_bits(C: BooleanCircuit, y: BitVec, encoding: str) -> BitVec:
    """The input assignment the implicit input stands for (nearest codeword when encoded)."""
    y = _input_word(C, y, encoding)
    if encoding == "plain":
        return y
    return HadamardCode(C.inputs).decode(y)


def prove(C: BooleanCircuit, y, encoding: str = "plain") -> PcppProof:
    """Honest proof for ``C`` on the implicit input ``y``."""
    y = _input_word(C, y, encoding)
    s = input_bits(C, y, encoding)
    if encoding == "hadamard" and HadamardCode(C.inputs).encode(s) != y:
        raise UnsatisfiableError("implicit input is not a codeword")
    wires = C.wires(s.bits)
    if wires[C.output] != 1:
        raise UnsatisfiableError("circuit rejects the input")
    return assignment_proof(C, C.pack(wires))


def assignment_proof(C: BooleanCircuit, z: int, zb: int | None = None, note: str = "honest") -> PcppProof:
    """Proof made of exact codewords of ``z`` and of ``zb ⊗ zb`` (``zb`` defaults to ``z``)."""
    v = C.v
    zb = z if zb is None else zb
    return PcppProof(v, LinearOracle(v, z), LinearOracle(v * v, tensor(zb, zb, v)), note)


# ---------------------------------------------------------------------------
# Verifier


def _rand_bits(rng: np.random.Generator, nbits: int) -> int:
    if nbits == 0:
        return 0
    raw = int.from_bytes(rng.bytes((nbits + 7) // 8), "big")
    return raw & ((1 << nbits) - 1)


def _rand_below(rng: np.random.Generator, n: int) -> int:
    return int(rng.integers(n))


def sample_randomness(C: BooleanCircuit, y_len: int, rng: np.random.Generator) -> dict:
    v, vv = C.v, C.v * C.v
    m = len(C.constraints())
    return {
        "blr_A": [_rand_bits(rng, v), _rand_bits(rng, v)],
        "blr_B": [_rand_bits(rng, vv), _rand_bits(rng, vv)],
        "tensor": [_rand_bits(rng, v), _rand_bits(rng, v), _rand_bits(rng, v), _rand_bits(rng, v),
                   _rand_bits(rng, vv)],
        "gates": [_rand_bits(rng, m), _rand_bits(rng, v), _rand_bits(rng, vv)],
        "input": [_rand_below(rng, y_len), _rand_bits(rng, v)],
    }


def embed_position(C: BooleanCircuit, p: int, encoding: str) -> int:
    """``fA`` position whose inner product with ``z`` equals the expected ``y_p``."""
    if encoding == "plain":
        return 1 << (C.v - 1 - p)
    return p << (C.v - C.inputs)


def combine(constraints: Sequence[Constraint], lam: int) -> Constraint:
    m = len(constraints)
    lin = quad = const = 0
    for i, c in enumerate(constraints):
        if (lam >> (m - 1 - i)) & 1:
            lin ^= c.lin
            quad ^= c.quad
            const ^= c.const
    return Constraint(lin, quad, const)


@dataclass
class Transcript:
    queries: list = field(default_factory=list)
    randomness: list = field(default_factory=list)
    verdict: bool = True
    tests: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"queries": [list(q) for q in self.queries], "randomness": self.randomness,
                "verdict": "accept" if self.verdict else "reject"}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, default=str)


def run_once(C: BooleanCircuit, y, proof: PcppProof, rnd: dict, encoding: str = "plain",
             log: list | None = None) -> dict[str, bool]:
    """One verifier run with explicit randomness; returns the outcome of every test."""
    log = [] if log is None else log
    y = as_oracle(y if not isinstance(y, (list, tuple)) else BitVec.from_bits(y))
    if proof.v != C.v:
        raise DimensionError("proof built for a different wire count")

    def q(name, oracle, pos):
        b = oracle.query(pos)
        log.append((name, int(pos), int(b)))
        return b

    A, B = proof.fA, proof.fB

    def sc(name, oracle, pos, x):
        return q(name, oracle, x) ^ q(name, oracle, x ^ pos)

    out = {}
    x, y2 = rnd["blr_A"]
    out["blr_A"] = (q("fA", A, x) ^ q("fA", A, y2)) == q("fA", A, x ^ y2)
    x, y2 = rnd["blr_B"]
    out["blr_B"] = (q("fB", B, x) ^ q("fB", B, y2)) == q("fB", B, x ^ y2)
    r1, r2, s1, s2, s3 = rnd["tensor"]
    a1, a2 = sc("fA", A, r1, s1), sc("fA", A, r2, s2)
    out["tensor"] = (a1 & a2) == sc("fB", B, tensor(r1, r2, C.v), s3)
    lam, s4, s5 = rnd["gates"]
    comb = combine(C.constraints(), lam)
    out["gates"] = (sc("fA", A, comb.lin, s4) ^ sc("fB", B, comb.quad, s5) ^ comb.const) == 0
    p, s6 = rnd["input"]
    out["input"] = q("y", y, p) == sc("fA", A, embed_position(C, p, encoding), s6)
    return out


def verify(C: BooleanCircuit, y, proof: PcppProof, rng: np.random.Generator, repetitions: int = 1,
           encoding: str = "plain") -> Transcript:
    """Run the verifier ``repetitions`` times with fresh randomness; accept iff every test passes."""
    y_or = as_oracle(y if not isinstance(y, (list, tuple)) else BitVec.from_bits(y))
    tr = Transcript()
    for _ in range(repetitions):
        rnd = sample_randomness(C, y_or.size, rng)
        res = run_once(C, y_or, proof, rnd, encoding, tr.queries)
        tr.randomness.append(rnd)
        tr.tests.append(res)
        tr.verdict = tr.verdict and all(res.values())
    return tr


def reference_verify(C: BooleanCircuit, y, proof: PcppProof, encoding: str = "plain") -> bool:
    """Read everything: decode ``fA`` and check it is a satisfying assignment matching ``y``."""
    a = materialize(proof.fA)
    z = HadamardCode(C.v).decode(bits_word(a)).val
    wires = [(z >> (C.v - 1 - i)) & 1 for i in range(C.v)]
    zz = tensor(z, z, C.v)
    if any(c.value(z, zz) for c in C.constraints()):
        return False
    return BitVec.from_bits(wires[:C.inputs]) == input_bits(C, _input_word(C, _word_of(y), encoding), encoding)


def _word_of(y) -> BitVec:
    if isinstance(y, BitVec):
        return y
    if isinstance(y, (list, tuple)):
        return BitVec.from_bits(y)
    return bits_word(materialize(y))


# ---------------------------------------------------------------------------
# Exact acceptance


@dataclass
class Acceptance:
    """Per-test pass probabilities of one run; ``total`` is their product."""

    tests: dict
    route: str

    @property
    def total(self) -> float:
        return float(np.prod(list(self.tests.values())))

    def repeated(self, t: int) -> float:
        return self.total ** t


def _bilinear_pass(rank: int) -> float:
    return (1 + 2.0 ** (-rank)) / 2


def _matrix_rows(M: int, v: int) -> list[int]:
    mask = (1 << v) - 1
    return [(M >> (v * (v - 1 - i))) & mask for i in range(v)]


def acceptance_linear(C: BooleanCircuit, y, proof: PcppProof, encoding: str = "plain") -> Acceptance:
    """Closed form for proofs whose oracles are both exact codewords.

    Tensor test: passes iff ``r1^T (zA zA^T + M) r2 == 0``, probability
    ``(1 + 2^-rank)/2``. Gate test: 1 if every constraint evaluates to zero,
    else exactly 1/2. Input test: agreement of ``y`` with the encoding of
    ``zA``'s input wires.
    """
    if not (isinstance(proof.fA, LinearOracle) and isinstance(proof.fB, LinearOracle)):
        raise InvalidInput("closed form needs linear oracles")
    y = _input_word(C, _word_of(y), encoding)
    v = C.v
    zA, M = proof.fA.coeff, proof.fB.coeff
    D = tensor(zA, zA, v) ^ M
    t = {"blr_A": 1.0, "blr_B": 1.0, "tensor": _bilinear_pass(gf2_rank(_matrix_rows(D, v)))}
    vals = [parity(c.lin & zA) ^ parity(c.quad & M) ^ c.const for c in C.constraints()]
    t["gates"] = 1.0 if not any(vals) else 0.5
    z_in = zA >> (v - C.inputs)
    if encoding == "plain":
        agree = C.inputs - (y.val ^ z_in).bit_count()
        t["input"] = agree / C.inputs
    else:
        n = 1 << C.inputs
        cw = HadamardCode(C.inputs).encode(BitVec(C.inputs, z_in))
        t["input"] = (n - (y ^ cw).popcount()) / n
    return Acceptance(t, "linear")


def acceptance_tables(C: BooleanCircuit, y, proof: PcppProof, encoding: str = "plain") -> Acceptance:
    """Exact pass probabilities from materialized oracle tables, for small wire counts.

    Every self-corrected read at a fixed point ``u`` is an independent coin
    that shows 1 with probability ``Pr_x[f(x) != f(x ^ u)]``; the tests'
    remaining randomness is enumerated outright.
    """
    v = C.v
    if v > TABLE_MAX_WIRES:
        raise ResourceError(f"table route limited to {TABLE_MAX_WIRES} wires")
    y = _input_word(C, _word_of(y), encoding)
    key = (C, "tables")
    if proof.cache.get("key") != key:
        proof.cache.clear()
        proof.cache["key"] = key
        proof.cache["val"] = _proof_tables(C, proof)
    t, qa = proof.cache["val"]
    t = dict(t)

    ybits = word_bits(y)
    inp = 0.0
    for p in range(y.n):
        pa = qa[embed_position(C, p, encoding)]
        inp += pa if ybits[p] else 1 - pa
    t["input"] = inp / y.n
    return Acceptance(t, "tables")


def _proof_tables(C: BooleanCircuit, proof: PcppProof) -> tuple[dict, np.ndarray]:
    """Pass probabilities of the four tests that do not read ``y``, plus the ``fA`` flip table."""
    v = C.v
    a = materialize(proof.fA)
    b = materialize(proof.fB)
    qa = self_correct_flip_probs(bits_word(a))
    qb = self_correct_flip_probs(bits_word(b))
    t = {"blr_A": blr_acceptance(bits_word(a)), "blr_B": blr_acceptance(bits_word(b))}

    r = np.arange(1 << v)
    tot = 0.0
    for r1 in range(1 << v):
        idx = np.zeros_like(r)
        for i in range(v):
            if (r1 >> i) & 1:
                idx = idx | (r << (i * v))
        p1, p2, p3 = qa[r1], qa[r], qb[idx]
        prod1 = p1 * p2
        tot += float(np.sum(prod1 * p3 + (1 - prod1) * (1 - p3)))
    t["tensor"] = tot / (1 << (2 * v))

    cons = C.constraints()
    m = len(cons)
    g = 0.0
    for lam in range(1 << m):
        c = combine(cons, lam)
        pa, pb = qa[c.lin], qb[c.quad]
        odd = pa * (1 - pb) + pb * (1 - pa)
        g += odd if c.const == 1 else 1 - odd
    t["gates"] = g / (1 << m)
    return t, qa


def acceptance(C: BooleanCircuit, y, proof: PcppProof, encoding: str = "plain") -> Acceptance:
    """Exact single-run acceptance; closed form when possible, tables otherwise."""
    if isinstance(proof.fA, LinearOracle) and isinstance(proof.fB, LinearOracle):
        return acceptance_linear(C, y, proof, encoding)
    return acceptance_tables(C, y, proof, encoding)


def repetitions_for(eps: float, rejection: float) -> int:
    """Smallest ``t`` with ``(1 - rejection)^t <= eps``."""
    if not 0 < rejection <= 1 or not 0 < eps < 1:
        raise InvalidInput("need 0 < rejection <= 1 and 0 < eps < 1")
    if rejection == 1:
        return 1
    return max(1, math.ceil(math.log(eps) / math.log(1 - rejection) - 1e-12))


# ---------------------------------------------------------------------------
# Instances and adversaries


def random_circuit(rng: np.random.Generator, inputs: int, n_gates: int) -> BooleanCircuit:
    b = CircuitBuilder(inputs)
    last = inputs - 1
    for g in range(n_gates):
        op = ("AND", "XOR", "NOT")[int(rng.integers(3))]
        hi = inputs + g
        if op == "NOT":
            last = b.NOT(int(rng.integers(hi)))
        else:
            last = b._add(op, int(rng.integers(hi)), int(rng.integers(hi)))
    return b.build(last)


def toy_circuits(max_wires: int = TABLE_MAX_WIRES) -> list[BooleanCircuit]:
    """Every small circuit used for exhaustive checks, up to ``max_wires`` wires."""
    out = []
    for ins in range(1, max_wires + 1):
        for n_g in range(0, max_wires - ins + 1):
            for ops in _gate_choices(ins, n_g):
                C = BooleanCircuit(ins, ops, ins + n_g - 1)
                if C.inputs + len(C.gates) <= max_wires:
                    out.append(C)
    return out


def _gate_choices(ins: int, n_g: int):
    if n_g == 0:
        yield ()
        return
    for prev in _gate_choices(ins, n_g - 1):
        hi = ins + n_g - 1
        for a in range(hi):
            yield prev + (Gate("NOT", (a,)),)
            for b in range(a + 1, hi):
                yield prev + (Gate("AND", (a, b)),)
                yield prev + (Gate("XOR", (a, b)),)


def _random_table(rng: np.random.Generator, width: int) -> BitsOracle:
    return BitsOracle(rng.integers(0, 2, size=1 << width, dtype=np.uint8))


def _corrupt(oracle, rng: np.random.Generator, frac: float) -> BitsOracle:
    bits = materialize(oracle).copy()
    n = bits.shape[0]
    flips = rng.choice(n, size=max(1, int(round(frac * n))), replace=False)
    bits[flips] ^= 1
    return BitsOracle(bits)


def cheat_corpus(C: BooleanCircuit, rng: np.random.Generator, size: int = 100,
                 tables: bool = True) -> list[PcppProof]:
    """Structured and random proofs a dishonest prover might send for ``C``.

    Families: honest proofs for satisfying inputs, codewords of arbitrary wire
    assignments, mismatched ``fB``, random ``fB`` codewords and (when
    ``tables``) random or corrupted tables. The list is deterministic in
    ``rng`` and padded by random codeword pairs up to ``size``.
    """
    v, vv = C.v, C.v * C.v
    out: list[PcppProof] = []
    for s in C.satisfying_inputs() if C.inputs <= 12 else []:
        out.append(prove(C, BitVec(C.inputs, s)))
        out[-1].note = "honest_for_other_input"
    for z in range(1 << v) if v <= 6 else rng.integers(0, 1 << v, size=64):
        out.append(assignment_proof(C, int(z), note="codeword_assignment"))
    out.append(PcppProof(v, LinearOracle(v, 0), LinearOracle(vv, 0), "zero"))
    while len(out) < size:
        kind = int(rng.integers(4 if tables else 2))
        z = _rand_bits(rng, v)
        if kind == 0:
            out.append(assignment_proof(C, z, _rand_bits(rng, v), note="mismatched_square"))
        elif kind == 1:
            out.append(PcppProof(v, LinearOracle(v, z), LinearOracle(vv, _rand_bits(rng, vv)), "random_square"))
        elif kind == 2:
            out.append(PcppProof(v, _random_table(rng, v), _random_table(rng, vv), "random_tables"))
        else:
            base = out[int(rng.integers(len(out)))]
            frac = float(rng.uniform(0.02, 0.3))
            out.append(PcppProof(v, _corrupt(base.fA, rng, frac), _corrupt(base.fB, rng, frac), "corrupted"))
    return out[:size] if len(out) > size else out


def relative_distance_to_language(C: BooleanCircuit, y: BitVec, encoding: str = "plain") -> float:
    """Relative Hamming distance from ``y`` to the nearest accepted implicit input."""
    sat = C.satisfying_inputs()
    if not sat:
        return 1.0
    if encoding == "plain":
        return min((y.val ^ s).bit_count() for s in sat) / C.inputs
    code = HadamardCode(C.inputs)
    return min((y ^ code.encode(BitVec(C.inputs, s))).popcount() for s in sat) / code.n
