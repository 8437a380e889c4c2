"""Experiment harness: ``qiop run spec.json`` and ``qiop selftest``.

Spec JSON fields (all but ``protocol`` optional):

``protocol``  one of :data:`PROTOCOLS`
``instance``  path to an instance JSON (relative to the spec file), ``"toy:<i>"``, or an inline instance
``N``, ``epsilon``  copies and IOC error for ``amplify``/``epr``/``sqiop``
``prover``    a name (``"honest"`` or a cheat name) or an adversary object ``{family, params, seed}``
``mode``      ``exact`` or ``mc``; ``trials`` and ``seed`` drive ``mc``
``out``       report path; a CSV summary is written next to it

In ``mc`` mode trials are split into fixed seeded chunks that ``--workers``
threads share, so the estimate is the same for any worker count.

Protocol-specific keys are listed in :data:`SPEC_KEYS`. Reports are JSON
with sorted keys, so a rerun with the same spec and seed is byte-identical;
wall time is only added with ``--timing``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import click
import jsonschema
import numpy as np

from . import energy_tests as et
from . import qiop_epr as epr
from . import qubit_tests as qt
from .cliffham import CliffordHamiltonian, amplification_bounds, mu_distribution, toy_instances
from .errors import QiopError, ResourceError
from .f2core import BitVec
from .hadcode import HadamardCode, blr_acceptance, blr_test, self_correct_error
from .ioc import DEFAULT_EPS, ioc_acceptance, ioc_commit, ioc_queries, ioc_respond, ioc_verify
from .pcpp import QUERIES_PER_RUN, BooleanCircuit, acceptance, cheat_corpus, prove, toy_circuits, verify
from .stability import ApproxRep, corpus_link, gh_isometry, rep_residual, spearman

PROTOCOLS = ("amplify", "code", "pcpp", "ioc", "sqt", "mqt", "epr", "sqiop", "stability")
MODES = ("exact", "mc")
COMMON_KEYS = {"protocol", "instance", "prover", "mode", "trials", "seed", "out"}
SPEC_KEYS = {
    "amplify": {"N", "a", "b"},
    "code": {"k", "message", "corrupt"},
    "pcpp": {"circuit", "input", "cheat"},
    "ioc": {"circuit", "input", "epsilon"},
    "sqt": set(),
    "mqt": {"k", "N", "distribution"},
    "epr": {"N", "epsilon"},
    "sqiop": {"N", "epsilon"},
    "stability": {"k"},
}


class SpecError(click.UsageError):
    pass


# ---------------------------------------------------------------------------
# Spec loading


def load_spec(path: Path, overrides: dict) -> dict:
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}")
    if not isinstance(spec, dict):
        raise SpecError("spec must be a JSON object")
    spec.update({k: v for k, v in overrides.items() if v is not None})
    spec.setdefault("mode", "exact")
    spec.setdefault("seed", 0)
    spec.setdefault("trials", 1000)
    spec.setdefault("prover", "honest")
    proto = spec.get("protocol")
    if proto not in PROTOCOLS:
        raise SpecError(f"protocol must be one of {', '.join(PROTOCOLS)}")
    unknown = set(spec) - COMMON_KEYS - SPEC_KEYS[proto]
    if unknown:
        raise SpecError(f"unknown spec keys for {proto}: {', '.join(sorted(unknown))}")
    if spec["mode"] not in MODES:
        raise SpecError("mode must be exact or mc")
    for key in ("seed", "trials"):
        if isinstance(spec[key], bool) or not isinstance(spec[key], int):
            raise SpecError(f"{key} must be an integer")
    if spec["mode"] == "mc" and int(spec["trials"]) < 1:
        raise SpecError("mc mode needs trials >= 1")
    spec["_base"] = str(path.parent)
    return spec


def _toy(ref: str, items: list, what: str):
    try:
        return items[int(ref[4:])]
    except (ValueError, IndexError):
        raise SpecError(f"{what} {ref!r}: expected toy:<0..{len(items) - 1}>")


def _inline(cls, obj: dict, what: str):
    try:
        return cls.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed {what}: {exc!r}")


def load_instance(spec: dict) -> CliffordHamiltonian:
    ref = spec.get("instance")
    if ref is None:
        raise SpecError(f"protocol {spec['protocol']} needs an instance")
    if isinstance(ref, dict):
        return _inline(CliffordHamiltonian, ref, "instance")
    if isinstance(ref, str) and ref.startswith("toy:"):
        return _toy(ref, toy_instances(), "instance")
    p = Path(spec["_base"]) / ref
    if not p.exists():
        raise SpecError(f"instance file {p} does not exist")
    return _inline(CliffordHamiltonian, json.loads(p.read_text()), "instance")


def load_circuit(spec: dict) -> BooleanCircuit:
    ref = spec.get("circuit", "toy:0")
    if isinstance(ref, dict):
        return _inline(BooleanCircuit, ref, "circuit")
    if isinstance(ref, str) and ref.startswith("toy:"):
        return _toy(ref, toy_circuits(), "circuit")
    p = Path(spec["_base"]) / ref
    if not p.exists():
        raise SpecError(f"circuit file {p} does not exist")
    return _inline(BooleanCircuit, json.loads(p.read_text()), "circuit")


def prover_name(spec: dict) -> str:
    pr = spec["prover"]
    return pr if isinstance(pr, str) else pr.get("family", pr.get("name", "honest"))


def rng_of(spec: dict) -> np.random.Generator:
    return np.random.default_rng(int(spec["seed"]))


# ---------------------------------------------------------------------------
# Monte Carlo fan-out
#
# Trials are cut into MC_CHUNKS fixed chunks, each with its own child seed, so
# the pooled estimate does not depend on how many workers ran them.

MC_CHUNKS = 8


@dataclass
class Chunk:
    n: int
    mean: float
    stderr: float = 0.0
    counts: Counter = field(default_factory=Counter)

    @classmethod
    def of(cls, vals, counts=None) -> "Chunk":
        v = np.asarray(vals, dtype=float)
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        return cls(len(v), float(v.mean()), se, Counter(counts or {}))


def pool(chunks: list[Chunk]) -> Chunk:
    """Exact pooled mean and ddof=1 standard error from per-chunk summaries."""
    n = sum(c.n for c in chunks)
    m = sum(c.n * c.mean for c in chunks) / n
    ss = sum((c.n - 1) * c.n * c.stderr ** 2 + c.n * (c.mean - m) ** 2 for c in chunks)
    se = math.sqrt(ss / (n - 1) / n) if n > 1 else 0.0
    return Chunk(n, m, se, sum((c.counts for c in chunks), Counter()))


def fan_out(sample, trials: int, seed: int, workers: int = 1, stream: int = 0) -> Chunk:
    """Run ``sample(n, rng) -> Chunk`` over the fixed chunks, ``workers`` at a time."""
    sizes = [trials // MC_CHUNKS + (i < trials % MC_CHUNKS) for i in range(MC_CHUNKS)]
    seqs = np.random.SeedSequence([int(seed), stream]).spawn(MC_CHUNKS)
    jobs = [(n, np.random.default_rng(sq)) for n, sq in zip(sizes, seqs) if n]
    if workers <= 1:
        return pool([sample(n, r) for n, r in jobs])
    with ThreadPoolExecutor(workers) as ex:
        return pool(list(ex.map(lambda j: sample(*j), jobs)))


def mc(spec: dict, sample, stream: int = 0) -> Chunk:
    return fan_out(sample, int(spec["trials"]), int(spec["seed"]), int(spec.get("_workers", 1)), stream)


def from_enum(res) -> Chunk:
    return Chunk(res.branches, res.acceptance, res.stderr)


def _mc_fields(c: Chunk) -> dict:
    return {"acceptance": c.mean, "stderr": c.stderr, "trials": c.n}


# ---------------------------------------------------------------------------
# Protocol runners; each returns a report dict


def run_amplify(spec: dict) -> dict:
    H = load_instance(spec)
    Ns = spec.get("N", [1, 3, 5])
    Ns = [Ns] if isinstance(Ns, int) else Ns
    a, b = float(spec.get("a", 0.25)), float(spec.get("b", 0.45))
    rows = {str(N): amplification_bounds(H.spectrum, N, a, b) for N in Ns}
    return {"spectrum": H.spectrum.tolist(), "bounds": rows}


def run_code(spec: dict) -> dict:
    k = int(spec.get("k", 3))
    code = HadamardCode(k)
    z = int(spec.get("message", 0))
    w = code.encode(BitVec(k, z))
    for pos in spec.get("corrupt", []):
        w = w ^ BitVec.unit(w.n, int(pos))
    n = 1 << k
    sc = max(self_correct_error(w, p, bin(p & z).count("1") & 1) for p in range(n))
    out = {"word": str(w), "self_correction_error_max": sc, "queries": {"blr": 3, "self_correct": 2}}
    if spec["mode"] == "exact":
        out["blr_acceptance"] = blr_acceptance(w)
    else:
        c = mc(spec, lambda t, rng: Chunk.of([blr_test(w, (int(rng.integers(0, n)), int(rng.integers(0, n))))
                                              for _ in range(t)]))
        out.update(blr_acceptance=c.mean, stderr=c.stderr)
    out["branches"] = n * n
    return out


def run_pcpp(spec: dict) -> dict:
    C = load_circuit(spec)
    if "input" in spec:
        y = BitVec.from_str(spec["input"])
    else:
        sat = C.satisfying_inputs()
        y = BitVec(C.inputs, sat[0] if sat else 0)
    if "cheat" in spec:
        proofs = cheat_corpus(C, rng_of(spec))
        proof = proofs[int(spec["cheat"]) % len(proofs)]
    else:
        proof = prove(C, y)
    out = {"circuit": C.to_json(), "input": str(y), "proof": proof.note, "queries": QUERIES_PER_RUN}
    if spec["mode"] == "exact":
        acc = acceptance(C, y, proof)
        out.update(acceptance=acc.total, tests=acc.tests, route=acc.route)
    else:
        out.update(_mc_fields(mc(spec, lambda t, rng: Chunk.of([verify(C, y, proof, rng).verdict
                                                                for _ in range(t)]))))
    return out


def run_ioc(spec: dict) -> dict:
    C = load_circuit(spec)
    eps = float(spec.get("epsilon", DEFAULT_EPS))
    s = BitVec.from_str(spec["input"]) if "input" in spec else BitVec(C.inputs, 0)
    m = ioc_commit(s)
    r, w = ioc_respond(s, C)
    out = {"circuit": C.to_json(), "input": str(s), "claim": r, "queries": ioc_queries(eps)}
    if spec["mode"] == "exact":
        out["acceptance"] = ioc_acceptance(C, eps, m, r, w)
    else:
        def sample(t, rng):
            vs = [ioc_verify(C, eps, m, r, w, rng) for _ in range(t)]
            return Chunk.of([v.accepted for v in vs], {"binding_violations": sum(
                v.accepted and v.output != C(s) for v in vs)})
        c = mc(spec, sample)
        out.update(_mc_fields(c), binding_violations=c.counts["binding_violations"])
    return out


def _adversary_spec(spec: dict) -> dict:
    pr = spec["prover"]
    return {"family": pr} if isinstance(pr, str) else pr


def run_sqt(spec: dict) -> dict:
    prover = qt.sqt_adversary(_adversary_spec(spec))
    acc = {}
    stderr = {}
    for i, t in enumerate(qt.SQT_TESTS):
        if spec["mode"] == "exact":
            acc[t] = qt.sqt_run(prover, t)
        else:
            c = mc(spec, lambda n, rng: from_enum(qt.sqt_mc(prover, t, n, rng)), i)
            acc[t], stderr[t] = c.mean, c.stderr
    out = {"acceptance": acc, "weighted": sum(qt.SQT_WEIGHTS[t] * acc[t] for t in acc),
           "residuals": {"anticommute": qt.sqt_residual(prover)}}
    if stderr:
        out["stderr"] = stderr
    return out


def _mqt_dists(spec: dict, k: int) -> dict:
    which = spec.get("distribution", "mu")
    if which == "uniform":
        return {"uniform": qt.uniform_pairs(k)}
    H = load_instance(spec)
    N = int(spec.get("N", 1))
    if N * H.n != k:
        raise SpecError("mqt needs N * n == k")
    return {"mu1": mu_distribution(H, N, "mu1"), "mu2": mu_distribution(H, N, "mu2")}


def run_mqt(spec: dict) -> dict:
    k = int(spec.get("k", 1))
    prover = qt.mqt_adversary(_adversary_spec(spec), k)
    acc, err, res, branches = {}, {}, {}, 0
    for dname, D in _mqt_dists(spec, k).items():
        for kind in qt.CHECK_KINDS:
            key = f"{kind}/{dname}"
            if spec["mode"] == "exact":
                r = qt.mqt_run(prover, kind, D)
                acc[key] = r.acceptance
                branches += r.branches
            else:
                c = mc(spec, lambda n, rng: from_enum(qt.mqt_run(prover, kind, D, "mc", n, rng)), len(acc))
                acc[key], err[key] = c.mean, c.stderr
        res[dname] = qt.mqt_residual(prover, D)
    out = {"acceptance": acc, "residuals": res, "branches": branches}
    if err:
        out["stderr"] = err
    return out


def _epr_prover(spec: dict, H) -> epr.EprProver:
    name = prover_name(spec)
    if name == "honest":
        return epr.EprProver()
    for p in epr.cheat_library(H):
        if p.name == name:
            return p
    raise SpecError(f"unknown epr prover {name!r}")


def run_epr(spec: dict) -> dict:
    H = load_instance(spec)
    cfg = epr.EprConfig(H, int(spec.get("N", 1)), float(spec.get("epsilon", DEFAULT_EPS)))
    prover = _epr_prover(spec, H)
    run = epr.epr_run(cfg, prover, rng_of(spec))
    out = {"formula_value": epr.honest_value(H, cfg.N, prover.witness(cfg)), "queries": run.queries}
    if spec["mode"] == "exact":
        r = epr.epr_exact(cfg, prover)
        out.update(acceptance=r.acceptance, branches=r.branches)
    else:
        out.update(_mc_fields(mc(spec, lambda n, rng: from_enum(epr.epr_mc(cfg, prover, n, rng)))))
    return out


def _sqiop_prover(spec: dict, cfg) -> et.EnergyProver:
    name = prover_name(spec)
    if name == "honest":
        return et.energy_honest_prover(cfg.H, cfg.N, eps=cfg.eps)
    for p in et.cheat_corpus(cfg):
        if p.name == name:
            return p
    raise SpecError(f"unknown sqiop prover {name!r}")


def run_sqiop(spec: dict) -> dict:
    H = load_instance(spec)
    cfg = et.SqiopConfig(H, int(spec.get("N", 1)), float(spec.get("epsilon", DEFAULT_EPS)))
    prover = _sqiop_prover(spec, cfg)
    phi = np.linalg.eigh(H.matrix())[1][:, 0]
    out = {"formula_value": et.honest_sqiop_value(H, cfg.N, phi), "queries": et.query_table(prover)}
    if spec["mode"] == "exact":
        res = et.full_sqiop(prover)
        out.update(acceptance=res.acceptance, branches=res.branches, qubit_parts=res.qubit_parts)
    else:
        def sample(t, rng):
            runs = [et.sqiop_run(prover, rng) for _ in range(t)]
            return Chunk.of([v.accept for v in runs], Counter(v.branch for v in runs))
        c = mc(spec, sample)
        out.update(_mc_fields(c), branch_counts={b: c.counts[b] for b in et.BRANCHES})
    return out


def run_stability(spec: dict) -> dict:
    k = int(spec.get("k", 1))
    pr = spec["prover"]
    if pr == "corpus":
        rows = corpus_link(k)
        x = [r["anticommute"] for r in rows]
        y = [r["gh"] for r in rows]
        return {"rows": rows, "spearman": spearman(x, y)}
    prover = qt.mqt_adversary(_adversary_spec(spec), k)
    rep = ApproxRep.from_prover(prover)
    V = gh_isometry(rep)
    D = qt.uniform_pairs(k)
    return {"residuals": {"anticommute": qt.mqt_residual(prover, D), "gh": rep_residual(rep, V, D)},
            "isometry_defect": float(np.max(np.abs(V.conj().T @ V - np.eye(rep.d))))}


RUNNERS = {"amplify": run_amplify, "code": run_code, "pcpp": run_pcpp, "ioc": run_ioc, "sqt": run_sqt,
           "mqt": run_mqt, "epr": run_epr, "sqiop": run_sqiop, "stability": run_stability}


# ---------------------------------------------------------------------------
# Reports

RESULT_FIELDS = {
    "amplify": ["spectrum", "bounds"],
    "code": ["blr_acceptance", "self_correction_error_max", "queries", "branches"],
    "pcpp": ["acceptance", "queries"],
    "ioc": ["acceptance", "queries"],
    "sqt": ["acceptance", "residuals"],
    "mqt": ["acceptance", "residuals", "branches"],
    "epr": ["acceptance", "formula_value", "queries"],
    "sqiop": ["acceptance", "formula_value", "queries"],
    "stability": [],
}
MC_STDERR = ["code", "pcpp", "ioc", "sqt", "mqt", "epr", "sqiop"]

REPORT_SCHEMA = {
    "type": "object",
    "required": ["protocol", "spec", "mode", "seed", "prover", "result"],
    "properties": {
        "protocol": {"enum": list(PROTOCOLS)},
        "spec": {"type": "object"},
        "mode": {"enum": list(MODES)},
        "seed": {"type": "integer"},
        "prover": {"type": "string"},
        "result": {"type": "object", "minProperties": 1},
        "wall_time": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
    "allOf": [{"if": {"properties": {"protocol": {"const": p}}},
               "then": {"properties": {"result": {"required": req}}}}
              for p, req in RESULT_FIELDS.items()] + [
        {"if": {"properties": {"mode": {"const": "mc"}, "protocol": {"enum": MC_STDERR}}},
         "then": {"properties": {"result": {"required": ["stderr"]}}}}],
}


def validate_report(report: dict) -> None:
    """Check the report against :data:`REPORT_SCHEMA`; raises ``ValueError`` on a mismatch."""
    try:
        jsonschema.validate(report, REPORT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValueError(f"report does not match the schema: {exc.message}") from exc


def run_spec(spec: dict, timing: bool = False) -> dict:
    t0 = time.perf_counter()
    body = RUNNERS[spec["protocol"]](spec)
    clean = {k: v for k, v in spec.items() if not k.startswith("_") and k != "out"}
    report = {"protocol": spec["protocol"], "spec": clean, "mode": spec["mode"], "seed": spec["seed"],
              "prover": prover_name(spec), "result": body}
    if timing:
        report["wall_time"] = time.perf_counter() - t0
    report = _jsonable(report)
    validate_report(report)
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def flatten(obj, prefix: str = "") -> list[tuple[str, object]]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj, key=str):
            out += flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list) and all(not isinstance(v, (dict, list)) for v in obj):
        return [(prefix, " ".join(str(v) for v in obj))]
    if isinstance(obj, list):
        out = []
        for i, v in enumerate(obj):
            out += flatten(v, f"{prefix}.{i}")
        return out
    return [(prefix, obj)]


def csv_summary(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["protocol", "key", "value"])
    for key, val in flatten(_jsonable(report["result"])):
        w.writerow([report["protocol"], key, val])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Self-test


def selftest_checks() -> list[tuple[str, bool, str]]:
    """Fast invariants spanning every module; each entry is ``(name, ok, detail)``."""
    out = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # report, do not abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))

    def amplify():
        H = toy_instances()[2]
        b = amplification_bounds(H.spectrum, 3, 0.25, 0.45)
        return b["tight"] and b.get("yes", True), f"value={b['value']:.6f}"

    def code():
        w = HadamardCode(3).encode(BitVec(3, 5))
        return blr_acceptance(w) == 1.0, "codeword accepted"

    def pcpp():
        C = toy_circuits()[5]
        ys = C.satisfying_inputs()
        y = BitVec(C.inputs, ys[0] if ys else 0)
        acc = acceptance(C, y, prove(C, y)).total if ys else 1.0
        return acc == 1.0, f"acceptance={acc}"

    def ioc():
        C = toy_circuits()[7]
        s = BitVec(C.inputs, 1 % (1 << C.inputs))
        r, w = ioc_respond(s, C)
        acc = ioc_acceptance(C, DEFAULT_EPS, ioc_commit(s), r, w)
        return acc == 1.0, f"acceptance={acc}"

    def sqt():
        pr = qt.sqt_honest_prover()
        accs = [qt.sqt_run(pr, t) for t in qt.SQT_TESTS]
        return min(accs) > 1 - 1e-12 and qt.sqt_residual(pr) <= 1e-9, f"min={min(accs):.12f}"

    def mqt():
        H = toy_instances()[2]
        acc = qt.mqt_acceptance(qt.mqt_honest_prover(1), *et.SqiopConfig(H, 1).mu)["total"]
        return abs(acc - 1) <= 1e-10, f"total={acc:.12f}"

    def epr_check():
        H = toy_instances()[2]
        cfg = epr.EprConfig(H, 1)
        got = epr.epr_exact(cfg).acceptance
        want = epr.honest_value(H, 1, epr.top_state(H))
        return abs(got - want) <= 1e-8, f"{got:.10f} vs {want:.10f}"

    def sqiop():
        H = toy_instances()[2]
        pr = et.energy_honest_prover(H, 1)
        got = et.full_sqiop(pr).acceptance
        want = et.honest_sqiop_value(H, 1, np.linalg.eigh(H.matrix())[1][:, 0])
        return abs(got - want) <= 1e-10, f"{got:.10f} vs {want:.10f}"

    def measp2e():
        H = toy_instances()[3]
        d = float(np.max(np.abs(et.measp2e_lhs(H, 1) - et.measp2e_rhs(H, 1))))
        return d <= 1e-10, f"max diff {d:.1e}"

    def stability():
        rep = ApproxRep.canonical(2)
        r = rep_residual(rep, gh_isometry(rep))
        return r <= 1e-7, f"residual={r:.1e}"

    for name, fn in [("amplify", amplify), ("code", code), ("pcpp", pcpp), ("ioc", ioc), ("sqt", sqt),
                     ("mqt", mqt), ("epr", epr_check), ("sqiop", sqiop), ("measp2e", measp2e),
                     ("stability", stability)]:
        check(name, fn)
    return out


# ---------------------------------------------------------------------------
# Click entry points


@click.group()
def main():
    """Run qIOP experiments and invariant checks."""


@main.command()
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--mode", type=click.Choice(MODES), default=None, help="Override the mode in the spec file.")
@click.option("--seed", type=int, default=None, help="Override the seed in the spec file.")
@click.option("--trials", type=int, default=None, help="Override the Monte Carlo trials in the spec file.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Report path; a .csv summary is written alongside.")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
              help="Threads for Monte Carlo chunks; results do not depend on this.")
@click.option("--timing", is_flag=True, help="Add wall time to the report (breaks byte-identical reruns).")
def run(spec_path, mode, seed, trials, out, workers, timing):
    """Run one experiment spec (branch cap from the QIOP_BRANCH_CAP environment variable)."""
    spec = load_spec(spec_path, {"mode": mode, "seed": seed, "trials": trials})
    spec["_workers"] = workers
    try:
        report = run_spec(spec, timing)
    except ResourceError as exc:
        raise click.ClickException(f"resource cap: {exc}")
    except QiopError as exc:
        raise click.ClickException(str(exc))
    text = dumps_report(report)
    target = out or (Path(spec["_base"]) / spec["out"] if spec.get("out") else None)
    if target is None:
        click.echo(text, nl=False)
        return
    target.write_text(text)
    target.with_suffix(".csv").write_text(csv_summary(report))
    click.echo(f"wrote {target} and {target.with_suffix('.csv')}")


def default_tests_dir() -> Path | None:
    p = Path(__file__).resolve().parents[2] / "tests"
    return p if p.is_dir() else None


@main.command()
@click.option("--full", is_flag=True, help="Also run the pytest suite (property tests and acceptance criteria).")
@click.option("--tests", "tests_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None,
              help="Test directory for --full (defaults to the source checkout's tests/).")
def selftest(full, tests_dir):
    """Run the fast invariant suite; exit status 1 on any failure."""
    results = selftest_checks()
    for name, ok, detail in results:
        click.echo(f"{'PASS' if ok else 'FAIL'}  {name:<10} {detail}")
    failed = not all(ok for _, ok, _ in results)
    if full:
        tests_dir = tests_dir or default_tests_dir()
        if tests_dir is None:
            raise click.UsageError("no tests/ directory found; pass --tests")
        code = subprocess.call([sys.executable, "-m", "pytest", "-q", str(tests_dir)])
        click.echo(f"{'PASS' if code == 0 else 'FAIL'}  pytest     exit {code}")
        failed = failed or code != 0
    if failed:
        sys.exit(1)


if __name__ == "__main__":
    main()
