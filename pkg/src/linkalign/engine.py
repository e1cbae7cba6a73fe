"""Link-traversal execution: frontier scheduling, alignment hookup, reporting.

The loop dereferences seed documents, inserts their triples alongside
aligned copies, discovers rule-set documents through the dedicated
location predicate, and follows the traversal policy over aligned triples
until the frontier drains, the document budget is spent, or the timeout
fires.  Evaluation runs once over the final aligned snapshot.
"""

from __future__ import annotations

import heapq
import threading
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from .alignment import (
    REASON_MALFORMED,
    SEMMAP_NS,
    SEMMAP_RULE_SET_LOCATION,
    AlignmentRule,
    MalformedRuleSet,
    Rejection,
    RuleRegistry,
    parse_rule_set,
    realign_subweb,
)
from .sources import FetchError, SourceLayer
from .sparql.ast import Query, TriplePattern, Variable
from .sparql.evaluate import EvaluationView, evaluate
from .sparql.results import ResultTable
from .store import TripleStore
from .terms import (
    OWL_NS,
    RDF_NS,
    RDFS_NS,
    XSD_NS,
    Document,
    Iri,
    SourcedTriple,
    defragment,
    is_absolute_iri,
)

POLICY_FOLLOW_ALL = "follow-all"
POLICY_MATCH_DRIVEN = "match-driven"
POLICIES = (POLICY_FOLLOW_ALL, POLICY_MATCH_DRIVEN)

CAUSE_FRONTIER_EXHAUSTED = "frontier-exhausted"
CAUSE_MAX_DOCUMENTS = "max-documents"
CAUSE_TIMEOUT = "timeout"

# Vocabulary namespaces are never dereferenced; rule-set locations are
# followed through the dedicated predicate hook instead of the policy.
DEFAULT_SKIP_LIST = frozenset({RDF_NS, RDFS_NS, OWL_NS, XSD_NS, SEMMAP_NS})

CLASS_RULE_SET = 0
CLASS_DATA = 1

EventCallback = Callable[[str, dict], None]


@dataclass(frozen=True)
class TraversalConfig:
    seeds: tuple[str, ...]
    policy: str = POLICY_FOLLOW_ALL
    max_documents: int = 1000
    timeout_ms: int = 180_000
    deterministic: bool = False
    alignment_enabled: bool = True
    namespace_skip_list: frozenset[str] = DEFAULT_SKIP_LIST
    workers: int = 4
    issuer_rules: tuple[AlignmentRule, ...] = ()

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ValueError("traversal needs at least one seed IRI")
        for seed in self.seeds:
            if not is_absolute_iri(seed):
                raise ValueError(f"seed must be an absolute IRI: {seed!r}")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown traversal policy: {self.policy!r}")
        if self.max_documents < 1:
            raise ValueError("max_documents must be at least 1")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @property
    def effective_workers(self) -> int:
        return 1 if self.deterministic else self.workers


class Frontier:
    """Pending IRIs in two priority classes with enqueue-once semantics.

    Rule-set entries dequeue before data entries; deterministic mode takes
    the lexicographically smallest IRI within a class, otherwise FIFO.
    """

    def __init__(self, deterministic: bool = False):
        self._deterministic = deterministic
        self._heaps: tuple[list[str], list[str]] = ([], [])
        self._queues: tuple[deque[str], deque[str]] = (deque(), deque())
        self._enqueued: set[str] = set()
        self.fetched: set[str] = set()

    def push(self, iri: str, klass: int) -> bool:
        if iri in self._enqueued or iri in self.fetched:
            return False
        self._enqueued.add(iri)
        if self._deterministic:
            heapq.heappush(self._heaps[klass], iri)
        else:
            self._queues[klass].append(iri)
        return True

    def __len__(self) -> int:
        if self._deterministic:
            return len(self._heaps[0]) + len(self._heaps[1])
        return len(self._queues[0]) + len(self._queues[1])

    def pop(self) -> Optional[tuple[int, str]]:
        for klass in (CLASS_RULE_SET, CLASS_DATA):
            if self._deterministic:
                if self._heaps[klass]:
                    return klass, heapq.heappop(self._heaps[klass])
            elif self._queues[klass]:
                return klass, self._queues[klass].popleft()
        return None

    def mark_fetched(self, iri: str) -> None:
        self.fetched.add(iri)


def _unifies(pattern: TriplePattern, t: SourcedTriple) -> bool:
    bindings: dict[str, object] = {}
    for pattern_term, value in (
        (pattern.subject, t.subject),
        (pattern.predicate, t.predicate),
        (pattern.object, t.object),
    ):
        if isinstance(pattern_term, Variable):
            if bindings.setdefault(pattern_term.name, value) != value:
                return False
        elif pattern_term != value:
            return False
    return True


def policy_candidates(
    new_aligned: Iterable[SourcedTriple],
    cfg: TraversalConfig,
    query: Query,
    fetched: frozenset[str] | set[str] = frozenset(),
) -> set[str]:
    """Dereference candidates the policy draws from freshly aligned triples."""
    patterns = None
    if cfg.policy == POLICY_MATCH_DRIVEN:
        patterns = query.pattern.triple_patterns()
    out: set[str] = set()
    for t in new_aligned:
        if patterns is not None and not any(_unifies(p, t) for p in patterns):
            continue
        # Rule-set locations are reached through the dedicated predicate
        # hook, never through the policy.
        positions = (
            (t.subject,)
            if t.predicate == SEMMAP_RULE_SET_LOCATION
            else (t.subject, t.object)
        )
        for term in positions:
            if not isinstance(term, Iri):
                continue
            # Skip-list prefixes may end in '#'; test before defragmenting.
            if any(term.value.startswith(p) for p in cfg.namespace_skip_list):
                continue
            doc = defragment(term.value)
            if doc not in fetched:
                out.add(doc)
    return out


def snapshot_for_evaluation(store: TripleStore) -> EvaluationView:
    """Read view of exactly the aligned triples inserted so far."""
    return EvaluationView(store.snapshot().aligned_triples())


@dataclass
class FetchRecord:
    iri: str
    triple_count: int
    fetch_duration_ms: float

    def to_json_dict(self, zero_durations: bool = False) -> dict:
        return {
            "iri": self.iri,
            "tripleCount": self.triple_count,
            "fetchDurationMs": 0 if zero_durations else int(round(self.fetch_duration_ms)),
        }


@dataclass
class FetchFailure:
    iri: str
    kind: str
    detail: str

    def to_json_dict(self) -> dict:
        return {"iri": self.iri, "kind": self.kind, "detail": self.detail}


@dataclass
class RuleSetRecord:
    location: str
    subweb_prefixes: tuple[str, ...]
    accepted_rule_count: int

    def to_json_dict(self) -> dict:
        return {
            "location": self.location,
            "subwebPrefixes": list(self.subweb_prefixes),
            "acceptedRuleCount": self.accepted_rule_count,
        }


@dataclass
class ExecutionReport:
    results: ResultTable
    documents_fetched: list[FetchRecord]
    rule_sets_discovered: list[RuleSetRecord]
    rules_rejected: list[Rejection]
    fetch_errors: list[FetchFailure]
    total_duration_ms: float
    termination_cause: str

    def to_json_dict(self, zero_durations: bool = False) -> dict:
        return {
            "results": self.results.to_json_dict(),
            "documentsFetched": [r.to_json_dict(zero_durations) for r in self.documents_fetched],
            "ruleSetsDiscovered": [r.to_json_dict() for r in self.rule_sets_discovered],
            "rulesRejected": [{"item": r.item, "reason": r.reason} for r in self.rules_rejected],
            "fetchErrors": [e.to_json_dict() for e in self.fetch_errors],
            "totalDurationMs": 0 if zero_durations else int(round(self.total_duration_ms)),
            "terminationCause": self.termination_cause,
        }


class _Execution:
    def __init__(
        self,
        query: Query,
        cfg: TraversalConfig,
        src: SourceLayer,
        events: Optional[EventCallback],
    ):
        self.query = query
        self.cfg = cfg
        self.src = src
        self.events = events
        self.store = TripleStore()
        self.registry = RuleRegistry()
        self.frontier = Frontier(cfg.deterministic)
        self.lock = threading.Lock()
        self.documents_fetched: list[FetchRecord] = []
        self.rule_sets_discovered: list[RuleSetRecord] = []
        self.rules_rejected: list[Rejection] = []
        self.fetch_errors: list[FetchFailure] = []
        self._start = time.monotonic()

    def _elapsed_ms(self) -> float:
        return (time.monotonic() - self._start) * 1000.0

    def _emit(self, kind: str, payload: dict) -> None:
        if self.events is not None:
            self.events(kind, payload)

    # -- link chasing ------------------------------------------------------

    def _chase_links(
        self, rule_scan: list[SourcedTriple], aligned_for_policy: list[SourcedTriple]
    ) -> None:
        if self.cfg.alignment_enabled:
            for t in rule_scan:
                if t.predicate == SEMMAP_RULE_SET_LOCATION and isinstance(t.object, Iri):
                    self.frontier.push(defragment(t.object.value), CLASS_RULE_SET)
        candidates = policy_candidates(
            aligned_for_policy, self.cfg, self.query, self.frontier.fetched
        )
        for iri in sorted(candidates):
            self.frontier.push(iri, CLASS_DATA)

    # -- document handling -------------------------------------------------

    def _handle_rule_set(self, doc: Document) -> None:
        try:
            rs = parse_rule_set(doc)
        except MalformedRuleSet as exc:
            rejection = Rejection(item=doc.iri, reason=REASON_MALFORMED)
            self.rules_rejected.append(rejection)
            self._emit(
                "ruleRejected",
                {"item": doc.iri, "reason": REASON_MALFORMED, "detail": str(exc)},
            )
            return
        outcome = self.registry.register_rule_set(rs)
        for rejection in outcome.rejected_rules:
            self.rules_rejected.append(rejection)
            self._emit("ruleRejected", {"item": rejection.item, "reason": rejection.reason})
        if not outcome.accepted:
            return
        record = RuleSetRecord(
            location=rs.location,
            subweb_prefixes=tuple(sorted(rs.subweb.prefixes)),
            accepted_rule_count=len(outcome.accepted_rules),
        )
        self.rule_sets_discovered.append(record)
        self._emit("ruleSetDiscovered", record.to_json_dict())
        changed = realign_subweb(self.registry, self.store, rs.subweb)
        self._emit("realigned", {"subweb": rs.subweb.id, "changedCount": len(changed)})
        self._chase_links(changed, changed)

    def _handle_data(self, doc: Document) -> None:
        new_originals = self.store.insert_all(doc.triples)
        if self.cfg.alignment_enabled:
            aligned = [self.registry.align_triple(t)[0] for t in new_originals]
        else:
            aligned = [replace(t, aligned=True) for t in new_originals]
        new_aligned = self.store.insert_all(aligned)
        self._chase_links(new_originals + new_aligned, new_aligned)

    def _fetch_and_process(self, klass: int, iri: str) -> None:
        started = time.monotonic()
        try:
            doc = self.src.fetch(iri)
        except FetchError as exc:
            with self.lock:
                self.frontier.mark_fetched(iri)
                self.fetch_errors.append(FetchFailure(iri=iri, kind=exc.kind, detail=exc.detail))
            return
        duration_ms = (time.monotonic() - started) * 1000.0
        with self.lock:
            self.frontier.mark_fetched(iri)
            if doc.iri != iri:
                self.frontier.mark_fetched(doc.iri)
            record = FetchRecord(
                iri=iri, triple_count=len(doc.triples), fetch_duration_ms=duration_ms
            )
            self.documents_fetched.append(record)
            self._emit("documentFetched", record.to_json_dict())
            if klass == CLASS_RULE_SET:
                self._handle_rule_set(doc)
            else:
                self._handle_data(doc)

    # -- traversal loops ----------------------------------------------------

    def _run_sequential(self) -> str:
        while True:
            if self._elapsed_ms() > self.cfg.timeout_ms:
                return CAUSE_TIMEOUT
            if len(self.frontier) == 0:
                return CAUSE_FRONTIER_EXHAUSTED
            if len(self.frontier.fetched) >= self.cfg.max_documents:
                return CAUSE_MAX_DOCUMENTS
            item = self.frontier.pop()
            assert item is not None
            self._fetch_and_process(*item)

    def _run_threaded(self) -> str:
        cond = threading.Condition(self.lock)
        in_flight = 0
        cause: Optional[str] = None

        def worker() -> None:
            nonlocal in_flight, cause
            while True:
                with cond:
                    item = None
                    while item is None:
                        if cause is not None:
                            return
                        if self._elapsed_ms() > self.cfg.timeout_ms:
                            cause = CAUSE_TIMEOUT
                            cond.notify_all()
                            return
                        if len(self.frontier) == 0:
                            if in_flight == 0:
                                cause = CAUSE_FRONTIER_EXHAUSTED
                                cond.notify_all()
                                return
                            cond.wait(0.01)
                            continue
                        if len(self.frontier.fetched) + in_flight >= self.cfg.max_documents:
                            if in_flight == 0:
                                cause = CAUSE_MAX_DOCUMENTS
                                cond.notify_all()
                                return
                            cond.wait(0.01)
                            continue
                        item = self.frontier.pop()
                    in_flight += 1
                try:
                    self._fetch_and_process(*item)
                finally:
                    with cond:
                        in_flight -= 1
                        cond.notify_all()

        threads = [
            threading.Thread(target=worker, name=f"fetch-{i}", daemon=True)
            for i in range(self.cfg.effective_workers)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert cause is not None
        return cause

    def run(self) -> ExecutionReport:
        if self.cfg.alignment_enabled and self.cfg.issuer_rules:
            outcome = self.registry.register_issuer_rules(self.cfg.issuer_rules)
            for rejection in outcome.rejected_rules:
                self.rules_rejected.append(rejection)
                self._emit(
                    "ruleRejected", {"item": rejection.item, "reason": rejection.reason}
                )
        for seed in self.cfg.seeds:
            self.frontier.push(defragment(seed), CLASS_DATA)
        if self.cfg.effective_workers == 1:
            cause = self._run_sequential()
        else:
            cause = self._run_threaded()
        table = evaluate(self.query, snapshot_for_evaluation(self.store))
        self._emit("resultTable", table.to_json_dict())
        return ExecutionReport(
            results=table,
            documents_fetched=self.documents_fetched,
            rule_sets_discovered=self.rule_sets_discovered,
            rules_rejected=self.rules_rejected,
            fetch_errors=self.fetch_errors,
            total_duration_ms=self._elapsed_ms(),
            termination_cause=cause,
        )


def execute(
    query: Query,
    cfg: TraversalConfig,
    src: SourceLayer,
    events: Optional[EventCallback] = None,
) -> ExecutionReport:
    """Run one link-traversal query execution and return its report."""
    return _Execution(query, cfg, src, events).run()
