"""Subweb-scoped schema alignment: rule sets, admission policy, rewriting.

Rule sets are published as Turtle documents using the semmap vocabulary.
Each document declares one subweb (a set of IRI prefixes controlled by a
data provider) and a list of mappings between vocabulary terms.  Accepted
rules form, per scope and term category, a directed rewrite graph in which
every node has at most one outgoing edge and no cycles exist; aligning a
triple walks each rewritable position to its fixpoint.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .store import TripleStore
from .terms import RDF_TYPE, Document, Iri, Literal, SourcedTriple, Term, is_absolute_iri

SEMMAP_NS = "https://example.org/semmap#"

RDF_TYPE_IRI = Iri(RDF_TYPE)

SEMMAP_SUBWEB = Iri(SEMMAP_NS + "Subweb")
SEMMAP_MAPPING = Iri(SEMMAP_NS + "Mapping")
SEMMAP_IRI_PREFIX = Iri(SEMMAP_NS + "iriPrefix")
SEMMAP_SUBJECT_ID = Iri(SEMMAP_NS + "subjectId")
SEMMAP_OBJECT_ID = Iri(SEMMAP_NS + "objectId")
SEMMAP_MAPPING_RELATION = Iri(SEMMAP_NS + "mappingRelation")
SEMMAP_SCOPE = Iri(SEMMAP_NS + "scope")
SEMMAP_RULE_SET_LOCATION = Iri(SEMMAP_NS + "ruleSetLocation")

PREDICATE_EQUIVALENCE = "predicate-equivalence"
PREDICATE_SPECIALIZATION = "predicate-specialization"
CLASS_EQUIVALENCE = "class-equivalence"
CLASS_SPECIALIZATION = "class-specialization"
ENTITY_IDENTITY = "entity-identity"

RELATION_KINDS = (
    PREDICATE_EQUIVALENCE,
    PREDICATE_SPECIALIZATION,
    CLASS_EQUIVALENCE,
    CLASS_SPECIALIZATION,
    ENTITY_IDENTITY,
)

RELATION_IRIS = {
    SEMMAP_NS + "equivalentProperty": PREDICATE_EQUIVALENCE,
    SEMMAP_NS + "specializesProperty": PREDICATE_SPECIALIZATION,
    SEMMAP_NS + "equivalentClass": CLASS_EQUIVALENCE,
    SEMMAP_NS + "specializesClass": CLASS_SPECIALIZATION,
    SEMMAP_NS + "sameEntity": ENTITY_IDENTITY,
}

CATEGORY_PREDICATE = "predicate"
CATEGORY_CLASS = "class"
CATEGORY_ENTITY = "entity"

CATEGORY_BY_RELATION = {
    PREDICATE_EQUIVALENCE: CATEGORY_PREDICATE,
    PREDICATE_SPECIALIZATION: CATEGORY_PREDICATE,
    CLASS_EQUIVALENCE: CATEGORY_CLASS,
    CLASS_SPECIALIZATION: CATEGORY_CLASS,
    ENTITY_IDENTITY: CATEGORY_ENTITY,
}

# Scope marker for rules supplied by the query issuer rather than discovered.
# Not an absolute IRI, so it can never collide with a subweb id.
ISSUER_SCOPE = "issuer"

REASON_OVERLAP = "overlap"
REASON_CYCLE = "cycle"
REASON_MALFORMED = "malformed"


class MalformedRuleSet(ValueError):
    """A rule-set document violates the semmap vocabulary contract."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class Subweb:
    """A provider-controlled region of the web, given by IRI prefixes."""

    id: str
    prefixes: frozenset[str]

    def __post_init__(self) -> None:
        if not self.prefixes:
            raise ValueError("subweb needs at least one prefix")
        for prefix in self.prefixes:
            if not prefix or not is_absolute_iri(prefix):
                raise ValueError(f"subweb prefix must be an absolute IRI: {prefix!r}")

    def contains(self, doc: str) -> bool:
        return any(doc.startswith(prefix) for prefix in self.prefixes)


def subweb_contains(w: Subweb, doc: str) -> bool:
    """True when some prefix of ``w`` is a string prefix of ``doc``."""
    return w.contains(doc)


def subwebs_overlap(a: Subweb, b: Subweb) -> bool:
    """True when any prefix pair is in a string-prefix relation, either way."""
    return any(
        pa.startswith(pb) or pb.startswith(pa) for pa in a.prefixes for pb in b.prefixes
    )


@dataclass(frozen=True)
class AlignmentRule:
    """One directional rewrite sourceTerm -> targetTerm within a scope."""

    source_term: str
    relation: str
    target_term: str
    scope: str
    origin_document: str
    ordinal: int

    def __post_init__(self) -> None:
        if self.relation not in CATEGORY_BY_RELATION:
            raise ValueError(f"unknown relation kind: {self.relation!r}")
        if self.source_term == self.target_term:
            raise ValueError("rule source and target terms must differ")

    @property
    def category(self) -> str:
        return CATEGORY_BY_RELATION[self.relation]

    def describe(self) -> str:
        return f"{self.source_term} -> {self.target_term} ({self.relation})"


@dataclass(frozen=True)
class RuleSet:
    """A parsed rule-set document: one subweb plus its ordered rules."""

    location: str
    subweb: Subweb
    rules: tuple[AlignmentRule, ...]


@dataclass(frozen=True)
class Rejection:
    """A rejected subweb or rule, with the policy reason."""

    item: str
    reason: str


@dataclass(frozen=True)
class RegistrationOutcome:
    accepted: bool
    reason: Optional[str]
    accepted_rules: tuple[AlignmentRule, ...] = ()
    rejected_rules: tuple[Rejection, ...] = ()


def _mapping_order(doc: Document) -> list[Iri]:
    """Mapping resources in first-appearance order as a triple subject."""
    seen: set[str] = set()
    typed = {
        t.subject.value
        for t in doc.triples
        if isinstance(t.subject, Iri)
        and t.predicate == RDF_TYPE_IRI
        and t.object == SEMMAP_MAPPING
    }
    ordered: list[Iri] = []
    for t in doc.triples:
        if isinstance(t.subject, Iri) and t.subject.value in typed:
            if t.subject.value not in seen:
                seen.add(t.subject.value)
                ordered.append(t.subject)
    return ordered


def parse_rule_set(doc: Document) -> RuleSet:
    """Extract the one subweb and its mappings from a rule-set document."""
    by_subject: dict[Term, list[SourcedTriple]] = {}
    for t in doc.triples:
        by_subject.setdefault(t.subject, []).append(t)

    subweb_nodes = [
        t.subject
        for t in doc.triples
        if t.predicate == RDF_TYPE_IRI and t.object == SEMMAP_SUBWEB
    ]
    if not subweb_nodes:
        raise MalformedRuleSet("no semmap:Subweb declaration")
    if len(subweb_nodes) > 1:
        raise MalformedRuleSet("more than one semmap:Subweb declaration")
    subweb_node = subweb_nodes[0]
    if not isinstance(subweb_node, Iri):
        raise MalformedRuleSet("subweb resource must be an IRI")

    prefixes: list[str] = []
    for t in by_subject.get(subweb_node, ()):
        if t.predicate != SEMMAP_IRI_PREFIX:
            continue
        if not isinstance(t.object, Literal):
            raise MalformedRuleSet("semmap:iriPrefix must be a string literal")
        if not is_absolute_iri(t.object.lexical):
            raise MalformedRuleSet(f"relative subweb prefix: {t.object.lexical!r}")
        prefixes.append(t.object.lexical)
    if not prefixes:
        raise MalformedRuleSet("subweb declares no semmap:iriPrefix")
    subweb = Subweb(id=subweb_node.value, prefixes=frozenset(prefixes))

    def iri_slot(subject: Term, predicate: Iri, name: str) -> Iri:
        values = [t.object for t in by_subject.get(subject, ()) if t.predicate == predicate]
        if len(values) != 1:
            raise MalformedRuleSet(f"mapping needs exactly one {name}")
        if not isinstance(values[0], Iri):
            raise MalformedRuleSet(f"mapping {name} must be an IRI")
        return values[0]

    rules: list[AlignmentRule] = []
    for ordinal, node in enumerate(_mapping_order(doc)):
        subject_id = iri_slot(node, SEMMAP_SUBJECT_ID, "semmap:subjectId")
        object_id = iri_slot(node, SEMMAP_OBJECT_ID, "semmap:objectId")
        relation_iri = iri_slot(node, SEMMAP_MAPPING_RELATION, "semmap:mappingRelation")
        scope_iri = iri_slot(node, SEMMAP_SCOPE, "semmap:scope")
        if scope_iri != subweb_node:
            raise MalformedRuleSet("mapping scope must reference the declared subweb")
        relation = RELATION_IRIS.get(relation_iri.value)
        if relation is None:
            raise MalformedRuleSet(f"unknown mapping relation: {relation_iri.value}")
        if subject_id == object_id:
            raise MalformedRuleSet("mapping subjectId equals objectId")
        rules.append(
            AlignmentRule(
                source_term=subject_id.value,
                relation=relation,
                target_term=object_id.value,
                scope=subweb.id,
                origin_document=doc.iri,
                ordinal=ordinal,
            )
        )
    return RuleSet(location=doc.iri, subweb=subweb, rules=tuple(rules))


def issuer_rules_from_json(data: object) -> list[AlignmentRule]:
    """Build issuer-scoped rules from a JSON array of {subject, relation, object}.

    ``data`` may be the JSON text or the already-parsed list.  The relation
    slot accepts either a relation kind name or its semmap IRI.
    """
    if isinstance(data, (str, bytes)):
        data = json.loads(data)
    if not isinstance(data, list):
        raise ValueError("issuer rules must be a JSON array")
    rules: list[AlignmentRule] = []
    for ordinal, entry in enumerate(data):
        if not isinstance(entry, dict):
            raise ValueError(f"issuer rule {ordinal} is not an object")
        try:
            subject = entry["subject"]
            relation = entry["relation"]
            obj = entry["object"]
        except KeyError as exc:
            raise ValueError(f"issuer rule {ordinal} misses key {exc.args[0]!r}") from None
        if not all(isinstance(v, str) for v in (subject, relation, obj)):
            raise ValueError(f"issuer rule {ordinal} slots must be strings")
        kind = RELATION_IRIS.get(relation, relation)
        if kind not in CATEGORY_BY_RELATION:
            raise ValueError(f"issuer rule {ordinal} has unknown relation {relation!r}")
        if not is_absolute_iri(subject) or not is_absolute_iri(obj):
            raise ValueError(f"issuer rule {ordinal} terms must be absolute IRIs")
        if subject == obj:
            raise ValueError(f"issuer rule {ordinal} maps a term to itself")
        rules.append(
            AlignmentRule(
                source_term=subject,
                relation=kind,
                target_term=obj,
                scope=ISSUER_SCOPE,
                origin_document=ISSUER_SCOPE,
                ordinal=ordinal,
            )
        )
    return rules


class RuleRegistry:
    """Accepted subwebs and rules, plus the record of rejected entries.

    Rules are indexed by (scope, category, sourceTerm); within the combined
    graph of any single scope plus issuer rules each sourceTerm has at most
    one outgoing edge and no directed cycle exists.  Registration is
    serialized; alignment reads are lock-free against a live registry
    because admission only ever adds entries that keep the invariants.
    """

    def __init__(self) -> None:
        self._subwebs: dict[str, Subweb] = {}
        self._rules: dict[tuple[str, str, str], AlignmentRule] = {}
        self.rejected: list[Rejection] = []
        self._lock = threading.Lock()

    # -- read side -------------------------------------------------------

    def accepted_subwebs(self) -> tuple[Subweb, ...]:
        return tuple(self._subwebs.values())

    def subweb_for(self, doc: str) -> Optional[Subweb]:
        # Non-overlap makes membership unique.
        for subweb in self._subwebs.values():
            if subweb.contains(doc):
                return subweb
        return None

    def rule_count(self) -> int:
        return len(self._rules)

    def accepted_rules(self) -> tuple[AlignmentRule, ...]:
        return tuple(self._rules.values())

    def _edge(self, scope: Optional[str], category: str, term: str) -> Optional[AlignmentRule]:
        if scope is not None:
            rule = self._rules.get((scope, category, term))
            if rule is not None:
                return rule
        return self._rules.get((ISSUER_SCOPE, category, term))

    def _walk_hits(self, scope: Optional[str], category: str, start: str, needle: str) -> bool:
        """True when ``needle`` is reachable from ``start`` in the combined graph."""
        cur = start
        for _ in range(len(self._rules) + 1):
            if cur == needle:
                return True
            rule = self._edge(scope, category, cur)
            if rule is None:
                return False
            cur = rule.target_term
        raise RuntimeError("rewrite graph invariant violated: unbounded walk")

    def _creates_cycle(self, rule: AlignmentRule) -> bool:
        if rule.scope == ISSUER_SCOPE:
            scopes: list[Optional[str]] = [None, *self._subwebs.keys()]
        else:
            scopes = [rule.scope]
        return any(
            self._walk_hits(scope, rule.category, rule.target_term, rule.source_term)
            for scope in scopes
        )

    def _is_duplicate(self, rule: AlignmentRule) -> bool:
        key_scopes = {rule.scope, ISSUER_SCOPE}
        if rule.scope == ISSUER_SCOPE:
            key_scopes.update(self._subwebs.keys())
        return any(
            (scope, rule.category, rule.source_term) in self._rules for scope in key_scopes
        )

    # -- write side ------------------------------------------------------

    def register_rule_set(self, rs: RuleSet) -> RegistrationOutcome:
        with self._lock:
            for other in self._subwebs.values():
                if subwebs_overlap(rs.subweb, other):
                    rejection = Rejection(item=rs.location, reason=REASON_OVERLAP)
                    self.rejected.append(rejection)
                    return RegistrationOutcome(
                        accepted=False, reason=REASON_OVERLAP, rejected_rules=(rejection,)
                    )
            self._subwebs[rs.subweb.id] = rs.subweb
            accepted, rejected = self._admit(rs.rules)
            return RegistrationOutcome(
                accepted=True,
                reason=None,
                accepted_rules=tuple(accepted),
                rejected_rules=tuple(rejected),
            )

    def register_issuer_rules(
        self, rules: Iterable[AlignmentRule]
    ) -> RegistrationOutcome:
        rules = tuple(rules)
        for rule in rules:
            if rule.scope != ISSUER_SCOPE:
                raise ValueError("issuer registration requires issuer-scoped rules")
        with self._lock:
            accepted, rejected = self._admit(rules)
            return RegistrationOutcome(
                accepted=True,
                reason=None,
                accepted_rules=tuple(accepted),
                rejected_rules=tuple(rejected),
            )

    def _admit(
        self, rules: Iterable[AlignmentRule]
    ) -> tuple[list[AlignmentRule], list[Rejection]]:
        accepted: list[AlignmentRule] = []
        rejected: list[Rejection] = []
        for rule in rules:
            if self._is_duplicate(rule):
                rejection = Rejection(item=rule.describe(), reason=REASON_MALFORMED)
            elif self._creates_cycle(rule):
                rejection = Rejection(item=rule.describe(), reason=REASON_CYCLE)
            else:
                self._rules[(rule.scope, rule.category, rule.source_term)] = rule
                accepted.append(rule)
                continue
            self.rejected.append(rejection)
            rejected.append(rejection)
        return accepted, rejected

    # -- alignment -------------------------------------------------------

    def align_triple(self, t: SourcedTriple) -> tuple[SourcedTriple, tuple[AlignmentRule, ...]]:
        """Rewrite one original triple to its aligned fixpoint.

        Positions: the predicate by predicate-category rules; the object of
        an rdf:type triple by class-category rules; subject and object IRIs
        otherwise by entity-identity rules.  Literals and blank nodes are
        never rewritten.  The trace lists distinct rules in first-application
        order; a rule firing on both subject and object appears once.
        """
        if t.aligned:
            raise ValueError("align_triple expects an original (aligned=false) triple")
        subweb = self.subweb_for(t.source)
        scope = subweb.id if subweb is not None else None
        trace: list[AlignmentRule] = []

        def rewrite(term: Term, category: str) -> Term:
            if not isinstance(term, Iri):
                return term
            cur = term.value
            for _ in range(len(self._rules) + 1):
                rule = self._edge(scope, category, cur)
                if rule is None:
                    return Iri(cur) if cur != term.value else term
                if rule not in trace:
                    trace.append(rule)
                cur = rule.target_term
            raise RuntimeError("rewrite graph invariant violated: unbounded walk")

        predicate = rewrite(t.predicate, CATEGORY_PREDICATE)
        subject = rewrite(t.subject, CATEGORY_ENTITY)
        object_category = CATEGORY_CLASS if predicate == RDF_TYPE_IRI else CATEGORY_ENTITY
        obj = rewrite(t.object, object_category)
        aligned = SourcedTriple(
            subject=subject,
            predicate=predicate,
            object=obj,
            source=t.source,
            aligned=True,
        )
        return aligned, tuple(trace)


def realign_subweb(reg: RuleRegistry, store: TripleStore, w: Subweb) -> list[SourcedTriple]:
    """Recompute aligned forms for every original sourced inside ``w``.

    Returns the aligned triples that were not present before, so callers
    can both count the change and chase links in the new forms.
    """
    changed: list[SourcedTriple] = []
    for source in store.sources():
        if not w.contains(source):
            continue
        originals = store.match(source=source, aligned=False)
        new_aligned = [reg.align_triple(t)[0] for t in originals]
        changed.extend(store.replace_aligned_for_source(source, new_aligned))
    return changed
