"""Theorem verification: logic-side verdicts against homomorphism counts over a
restricted class, single pairs and whole sweeps."""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from config.settings import DEFAULT_WITNESS_CAP, SWEEP_WORKERS
from modules.enumeration import (
    ALL,
    PEBBLE_HEIGHT,
    SYNC_TREE,
    TREEDEPTH,
    TREEWIDTH,
    ClassSpec,
    enumerate_structures,
)
from modules.equivalence import equiv_counting, kWL_refine, modal_equiv
from modules.exceptions import MalformedInputError, PreconditionError
from modules.graphs import is_simple_graph
from modules.homcount import hom_count, pointed_hom_count, strong_emb_count
from modules.structures import (
    PointedStructure,
    RelStructure,
    Signature,
    enumerate_quotient_objects,
    functor_H,
    functor_J,
    iso_check,
)

logger = logging.getLogger(__name__)

THEOREMS = ("lovasz", "grohe", "dvorak", "ckn", "modal")

AGREE_EQUIVALENT = "agree-equivalent"
AGREE_DISTINGUISHED = "agree-distinguished"
EXHAUSTED = "exhausted"
FAILURE = "failure"
OUTCOMES = (AGREE_EQUIVALENT, AGREE_DISTINGUISHED, EXHAUSTED, FAILURE)

Subject = Union[RelStructure, PointedStructure]


@dataclass
class Witness:
    name: str
    counts: Tuple[int, int]

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "counts": list(self.counts)}


@dataclass
class VerificationReport:
    theorem: str
    a: str
    b: str
    logic: bool
    agree: bool
    witness: Optional[Witness]
    exhausted_at: int
    scanned: int
    timing: float = 0.0

    @property
    def outcome(self) -> str:
        if self.logic:
            return FAILURE if self.witness else AGREE_EQUIVALENT
        return AGREE_DISTINGUISHED if self.witness else EXHAUSTED

    @property
    def exhausted(self) -> bool:
        return self.outcome == EXHAUSTED

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        data = {
            "a": self.a,
            "b": self.b,
            "logic": self.logic,
            "agree": self.agree,
            "witness": self.witness.to_dict() if self.witness else None,
            "exhausted": self.exhausted,
            "outcome": self.outcome,
        }
        if include_timing:
            data["timing"] = round(self.timing, 6)
        return data


@dataclass
class SweepReport:
    theorem: str
    params: Dict[str, Any]
    universe: str
    witness_cap: int
    pairs: List[VerificationReport] = field(default_factory=list)
    timing: float = 0.0

    @property
    def summary(self) -> Dict[str, int]:
        counts = {outcome: 0 for outcome in OUTCOMES}
        for report in self.pairs:
            counts[report.outcome] += 1
        counts["pairs"] = len(self.pairs)
        return counts

    @property
    def failures(self) -> int:
        return self.summary[FAILURE]

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        data = {
            "theorem": self.theorem,
            "params": dict(sorted(self.params.items())),
            "universe": self.universe,
            "witness_cap": self.witness_cap,
            "pairs": [p.to_dict(include_timing) for p in self.pairs],
            "summary": self.summary,
        }
        if include_timing:
            data["timing"] = round(self.timing, 6)
        return data

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2)


def _param(params: Dict[str, Any], name: str) -> int:
    value = params.get(name)
    if not isinstance(value, int) or value < 1:
        raise PreconditionError(f"Parameter {name} must be a positive integer, got {value!r}")
    return value


def _signature_of(subject: Subject) -> Signature:
    return subject.structure.signature if isinstance(subject, PointedStructure) else subject.signature


def witness_class(theorem: str, params: Dict[str, Any], witness_cap: int, signature: Signature,
                  graphs: bool) -> ClassSpec:
    """The class whose homomorphism counts characterize the theorem's logic."""
    if theorem == "lovasz":
        return ClassSpec(ALL, witness_cap, signature, graphs=graphs)
    if theorem == "grohe":
        return ClassSpec(TREEDEPTH, witness_cap, signature, n=_param(params, "n"), graphs=graphs)
    if theorem == "dvorak":
        return ClassSpec(TREEWIDTH, witness_cap, signature, width=_param(params, "k") - 1, graphs=graphs)
    if theorem == "ckn":
        return ClassSpec(PEBBLE_HEIGHT, witness_cap, signature, k=_param(params, "k"), n=_param(params, "n"),
                         graphs=graphs)
    if theorem == "modal":
        return ClassSpec(SYNC_TREE, witness_cap, signature, k=_param(params, "k"))
    raise MalformedInputError(f"Unknown theorem {theorem}; expected one of {THEOREMS}")


def logic_verdict(theorem: str, A: Subject, B: Subject, params: Dict[str, Any]) -> bool:
    if theorem == "lovasz":
        return iso_check(A, B) is not None
    if theorem == "grohe":
        return equiv_counting(A, B, depth=_param(params, "n"))
    if theorem == "dvorak":
        return equiv_counting(A, B, width=_param(params, "k"))
    if theorem == "ckn":
        return equiv_counting(A, B, depth=_param(params, "n"), width=_param(params, "k"))
    if theorem == "modal":
        if not isinstance(A, PointedStructure) or not isinstance(B, PointedStructure):
            raise PreconditionError("The modal theorem compares pointed structures")
        return modal_equiv(A, B, _param(params, "k"))
    raise MalformedInputError(f"Unknown theorem {theorem}; expected one of {THEOREMS}")


def _counter(theorem: str) -> Callable[[Subject, Subject], int]:
    return pointed_hom_count if theorem == "modal" else hom_count


def count_vector(theorem: str, sources: Sequence[Subject], target: Subject) -> Tuple[int, ...]:
    count = _counter(theorem)
    return tuple(count(C, target) for C in sources)


def _build_report(theorem: str, A: Subject, B: Subject, logic: bool, sources: Sequence[Subject],
                  vector_a: Sequence[int], vector_b: Sequence[int], witness_cap: int,
                  started: float) -> VerificationReport:
    witness = None
    for C, x, y in zip(sources, vector_a, vector_b):
        if x != y:
            witness = Witness(C.name, (x, y))
            break
    report = VerificationReport(theorem, A.name, B.name, logic, witness is None, witness,
                                witness_cap, len(sources), time.perf_counter() - started)
    if report.outcome == FAILURE:
        logger.error(f"{theorem}: {A.name} and {B.name} are logically equivalent but {witness.name} "
                     f"separates them with counts {witness.counts}")
    return report


def verify_theorem(theorem: str, A: Subject, B: Subject, params: Dict[str, Any],
                   witness_cap: int = DEFAULT_WITNESS_CAP,
                   witness_spec: Optional[ClassSpec] = None) -> VerificationReport:
    """Compare the logic verdict for (A, B) with hom counts from the theorem's class.

    The scan stops at the first source whose counts differ, which is the
    smallest such source in enumeration order.
    """
    started = time.perf_counter()
    logic = logic_verdict(theorem, A, B, params)
    graphs = theorem != "modal" and is_simple_graph(A) and is_simple_graph(B)
    spec = witness_spec or witness_class(theorem, params, witness_cap, _signature_of(A), graphs)
    count = _counter(theorem)
    scanned: List[Subject] = []
    vector_a: List[int] = []
    vector_b: List[int] = []
    for C in enumerate_structures(spec):
        scanned.append(C)
        vector_a.append(count(C, A))
        vector_b.append(count(C, B))
        if vector_a[-1] != vector_b[-1]:
            break
    return _build_report(theorem, A, B, logic, scanned, vector_a, vector_b, witness_cap, started)


def _vector_job(job: Tuple[str, Tuple[Subject, ...], Subject]) -> Tuple[int, ...]:
    theorem, sources, target = job
    return count_vector(theorem, sources, target)


def _logic_job(job: Tuple[str, Subject, Subject, Dict[str, Any]]) -> bool:
    theorem, A, B, params = job
    return logic_verdict(theorem, A, B, params)


def _pool_map(fn, jobs: List, workers: int) -> List:
    """Ordered map, in a process pool when more than one worker is asked for."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, jobs))


def sweep(theorem: str, universe: ClassSpec, params: Dict[str, Any],
          witness_cap: int = DEFAULT_WITNESS_CAP, workers: int = SWEEP_WORKERS,
          witness_spec: Optional[ClassSpec] = None) -> SweepReport:
    """verify_theorem over every unordered pair of the universe.

    Hom-count vectors over the witness class are computed once per
    structure; results are merged in pair order whatever the pool does.
    """
    started = time.perf_counter()
    subjects = list(enumerate_structures(universe))
    graphs = theorem != "modal" and all(is_simple_graph(s) for s in subjects)
    if witness_spec is None:
        signature = _signature_of(subjects[0]) if subjects else universe.signature
        witness_spec = witness_class(theorem, params, witness_cap, signature, graphs)
    sources = tuple(enumerate_structures(witness_spec))
    logger.info(f"Sweep {theorem}: {len(subjects)} structures, {len(sources)} witness candidates")

    vectors = _pool_map(_vector_job, [(theorem, sources, S) for S in subjects], workers)
    pairs = list(combinations(range(len(subjects)), 2))
    verdicts = _pool_map(_logic_job, [(theorem, subjects[i], subjects[j], params) for i, j in pairs], workers)

    report = SweepReport(theorem, dict(params), universe.label(), witness_cap)
    for (i, j), logic in zip(pairs, verdicts):
        pair_start = time.perf_counter()
        report.pairs.append(_build_report(theorem, subjects[i], subjects[j], logic, sources,
                                          vectors[i], vectors[j], witness_cap, pair_start))
    report.timing = time.perf_counter() - started
    logger.info(f"Sweep {theorem} done: {report.summary}")
    return report


@dataclass
class ConsistencyReport:
    """Outcome of an identity checked over many instances."""

    check: str
    instances: int = 0
    mismatches: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check_wl_consistency(max_size: int = 4, dims: Iterable[int] = (1, 2),
                         graphs: Optional[Sequence[RelStructure]] = None) -> ConsistencyReport:
    """k-WL agrees with the width k+1 counting game, unbounded depth, on all pairs."""
    graphs = list(graphs) if graphs is not None else list(enumerate_structures(ClassSpec(ALL, max_size)))
    report = ConsistencyReport("wl-vs-game")
    for k in dims:
        for A, B in combinations(graphs, 2):
            report.instances += 1
            wl = kWL_refine(A, B, k)[2]
            game = equiv_counting(A, B, width=k + 1)
            if wl != game:
                report.mismatches.append(f"k={k} {A.name}/{B.name}: wl={wl} game={game}")
    logger.info(f"WL consistency: {report.instances} pairs, {len(report.mismatches)} mismatches")
    return report


def factorization_holds(C: RelStructure, A: RelStructure) -> bool:
    """hom(C, A) equals the sum of strong embeddings of all quotient objects of C into A."""
    total = sum(strong_emb_count(q.codomain, A) for q in enumerate_quotient_objects(C))
    return total == hom_count(C, A)


def adjunction_holds(D: RelStructure, A: RelStructure) -> bool:
    """hom(D, J(A)) = hom(H(D), A) over the equality-extended signature."""
    return hom_count(D, functor_J(A)) == hom_count(functor_H(D)[0], A)


def check_factorization(max_source: int = 3, max_target: int = 3,
                        signature: Optional[Signature] = None) -> ConsistencyReport:
    spec_kwargs = {"graphs": False} if signature is None else {"signature": signature, "graphs": False}
    sources = list(enumerate_structures(ClassSpec(ALL, max_source, **spec_kwargs)))
    targets = list(enumerate_structures(ClassSpec(ALL, max_target, **spec_kwargs)))
    report = ConsistencyReport("factorization")
    for C in sources:
        for A in targets:
            report.instances += 1
            if not factorization_holds(C, A):
                report.mismatches.append(f"{C.name} -> {A.name}")
    return report


def check_adjunction(max_size: int = 2, signature: Optional[Signature] = None) -> ConsistencyReport:
    base = ClassSpec(ALL, max_size, graphs=False) if signature is None else \
        ClassSpec(ALL, max_size, signature, graphs=False)
    extended = ClassSpec(ALL, max_size, base.signature.extended(), graphs=False)
    targets = list(enumerate_structures(base))
    report = ConsistencyReport("adjunction")
    for D in enumerate_structures(extended):
        for A in targets:
            report.instances += 1
            if not adjunction_holds(D, A):
                report.mismatches.append(f"{D.name} / {A.name}")
    return report
