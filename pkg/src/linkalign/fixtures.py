"""Deterministic decentralized social-network fixtures plus ground truth.

A fixture is a set of pod documents (profile card, posts, likes) under
``http://pods.ex/u{i}/``.  The base configuration writes every pod in the
canonical vocabulary; the heterogeneous configuration switches a fraction
of pods to a variant vocabulary (V1: https scheme swap, V2: renamed terms
and https tag IRIs, assigned round-robin) and gives each variant pod a
rule-set document linked from its card.  Ground truth comes from a
centralized oracle that merges every data document and applies all rules
globally, bypassing the engine entirely.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path
from typing import Optional
from urllib.parse import quote

from .alignment import SEMMAP_NS
from .sparql.ast import Query
from .sparql.evaluate import EvaluationView, evaluate
from .sparql.parser import parse_query
from .sparql.results import ResultTable, table_from_json_dict
from .terms import OWL_NS, RDF_NS, RDFS_NS, XSD_NS, Iri, Term
from .turtle import parse_turtle

POD_PREFIX = "http://pods.ex/"

SCHEMA = "http://schema.org/"
VOCAB = "http://vocab.ex/"
VOCAB2 = "http://vocab2.ex/"
TAGS = "http://tags.ex/"
FORUMS = "http://forums.ex/"

P_NAME = SCHEMA + "name"
P_KNOWS = SCHEMA + "knows"
P_LIKES = SCHEMA + "likes"
P_AUTHOR = VOCAB + "author"
P_COMMENT = VOCAB + "comment"
P_FORUM = VOCAB + "forum"
P_TAG = VOCAB + "tag"
P_POSTS_INDEX = VOCAB + "postsIndex"
P_LIKES_INDEX = VOCAB + "likesIndex"
C_POST = VOCAB + "Post"

CANONICAL_PREDICATES = (
    P_NAME,
    P_KNOWS,
    P_LIKES,
    P_AUTHOR,
    P_COMMENT,
    P_FORUM,
    P_TAG,
    P_POSTS_INDEX,
    P_LIKES_INDEX,
)

V2_PREDICATES = {
    P_AUTHOR: VOCAB2 + "creator",
    P_COMMENT: VOCAB2 + "reply",
    P_FORUM: VOCAB2 + "inForum",
    P_TAG: VOCAB2 + "topic",
    P_POSTS_INDEX: VOCAB2 + "postsFeed",
    P_LIKES_INDEX: VOCAB2 + "likesFeed",
}
V2_POST_CLASS = VOCAB2 + "Posting"

FORUM_COUNT = 4

CONFIGURATION_BASE = "base"
CONFIGURATION_HETEROGENEOUS = "heterogeneous"

# Namespaces that must never be dereferenced when traversing this fixture;
# merged into the engine's default skip list by callers.
FIXTURE_SKIP_PREFIXES = (
    SCHEMA,
    "https://schema.org/",
    VOCAB,
    "https://vocab.ex/",
    VOCAB2,
    TAGS,
    "https://tags.ex/",
    FORUMS,
)

QUERY_MESSAGES_OF_LIKED = "Messages of liked users"
QUERY_FORUMS_POSTED = "Forums a user posted"
QUERY_USER_INFORMATION = "User information"
QUERY_POSTS_OF_USER = "Posts of a user"
QUERY_TAG_DISTRIBUTION = "Tag distribution"

QUERY_NAMES = (
    QUERY_MESSAGES_OF_LIKED,
    QUERY_FORUMS_POSTED,
    QUERY_USER_INFORMATION,
    QUERY_POSTS_OF_USER,
    QUERY_TAG_DISTRIBUTION,
)

_BODY_WORDS = (
    "sunrise",
    "harbor",
    "puzzle",
    "meadow",
    "circuit",
    "lantern",
    "voyage",
    "ember",
    "signal",
    "ripple",
)


def _https_form(iri: str) -> str:
    assert iri.startswith("http://")
    return "https://" + iri[len("http://"):]


@dataclass(frozen=True)
class FixtureConfig:
    pod_count: int = 8
    posts_per_pod: int = 20
    likes_per_pod: int = 10
    tag_vocabulary_size: int = 12
    variant_fraction: float = 0.5
    random_seed: int = 7
    configuration: str = CONFIGURATION_HETEROGENEOUS

    def __post_init__(self) -> None:
        if self.pod_count < 1:
            raise ValueError("pod_count must be positive")
        if self.posts_per_pod < 1 or self.likes_per_pod < 0:
            raise ValueError("invalid post or like count")
        if self.tag_vocabulary_size < 1:
            raise ValueError("tag_vocabulary_size must be positive")
        if not 0.0 <= self.variant_fraction <= 1.0:
            raise ValueError("variant_fraction must be within [0, 1]")
        if self.configuration not in (CONFIGURATION_BASE, CONFIGURATION_HETEROGENEOUS):
            raise ValueError(f"unknown configuration: {self.configuration!r}")
        if self.configuration == CONFIGURATION_BASE and self.variant_fraction != 0.0:
            object.__setattr__(self, "variant_fraction", 0.0)

    def to_json_dict(self) -> dict:
        return {
            "podCount": self.pod_count,
            "postsPerPod": self.posts_per_pod,
            "likesPerPod": self.likes_per_pod,
            "tagVocabularySize": self.tag_vocabulary_size,
            "variantFraction": self.variant_fraction,
            "randomSeed": self.random_seed,
            "configuration": self.configuration,
        }

    @staticmethod
    def from_json_dict(data: dict) -> "FixtureConfig":
        return FixtureConfig(
            pod_count=data["podCount"],
            posts_per_pod=data["postsPerPod"],
            likes_per_pod=data["likesPerPod"],
            tag_vocabulary_size=data["tagVocabularySize"],
            variant_fraction=data["variantFraction"],
            random_seed=data["randomSeed"],
            configuration=data["configuration"],
        )


@dataclass
class FixtureSet:
    config: FixtureConfig
    documents: dict[str, str]
    seeds: dict[str, tuple[str, ...]]
    queries: dict[str, str]
    oracle_results: dict[str, dict[str, dict]]
    skip_prefixes: tuple[str, ...]
    rule_document_iris: frozenset[str]
    base_prefix: str = POD_PREFIX

    def data_document_iris(self) -> list[str]:
        return [iri for iri in self.documents if iri not in self.rule_document_iris]

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "basePrefix": self.base_prefix,
            "documents": dict(self.documents),
            "seeds": {name: list(seeds) for name, seeds in self.seeds.items()},
            "queries": dict(self.queries),
            "oracleResults": self.oracle_results,
            "skipPrefixes": list(self.skip_prefixes),
            "ruleDocuments": sorted(self.rule_document_iris),
        }

    @staticmethod
    def from_json_dict(data: dict) -> "FixtureSet":
        return FixtureSet(
            config=FixtureConfig.from_json_dict(data["config"]),
            documents=dict(data["documents"]),
            seeds={name: tuple(seeds) for name, seeds in data["seeds"].items()},
            queries=dict(data["queries"]),
            oracle_results=data["oracleResults"],
            skip_prefixes=tuple(data["skipPrefixes"]),
            rule_document_iris=frozenset(data["ruleDocuments"]),
            base_prefix=data["basePrefix"],
        )


class _PodPlan:
    """Everything about one pod needed to write its documents."""

    def __init__(self, index: int, variant: Optional[str]):
        self.index = index
        self.variant = variant  # None, "V1", or "V2"
        self.knows: list[int] = []
        self.posts: list[dict] = []
        self.likes: list[tuple[int, int]] = []

    @property
    def prefix(self) -> str:
        return f"{POD_PREFIX}u{self.index}/"

    @property
    def card(self) -> str:
        return f"{self.prefix}card"

    @property
    def me(self) -> str:
        return f"{self.card}#me"

    @property
    def posts_doc(self) -> str:
        return f"{self.prefix}posts"

    @property
    def likes_doc(self) -> str:
        return f"{self.prefix}likes"

    @property
    def rules_doc(self) -> str:
        return f"{self.prefix}rules"

    def predicate(self, canonical: str) -> str:
        if self.variant == "V1":
            return _https_form(canonical)
        if self.variant == "V2":
            return V2_PREDICATES.get(canonical, canonical)
        return canonical

    def post_class(self) -> str:
        if self.variant == "V1":
            return _https_form(C_POST)
        if self.variant == "V2":
            return V2_POST_CLASS
        return C_POST

    def tag_iri(self, tag: str) -> str:
        if self.variant == "V2":
            return _https_form(tag)
        return tag


def _variant_indices(cfg: FixtureConfig, rng: random.Random) -> list[int]:
    n = cfg.pod_count
    count = int(cfg.variant_fraction * n + 0.5)
    if count <= 0:
        return []
    if count >= n:
        return list(range(n))
    # Pod 0 stays canonical and pod 1 is always variant, so the canonical
    # queries have a stable seed pod on each side of the mismatch.
    chosen = {1}
    pool = [i for i in range(2, n)]
    chosen.update(rng.sample(pool, count - 1))
    return sorted(chosen)


def _make_plans(cfg: FixtureConfig, rng: random.Random) -> list[_PodPlan]:
    n = cfg.pod_count
    variants = _variant_indices(cfg, rng)
    kinds = {pod: ("V1" if pos % 2 == 0 else "V2") for pos, pod in enumerate(variants)}
    plans = [_PodPlan(i, kinds.get(i)) for i in range(n)]
    tags = [f"{TAGS}t{k}" for k in range(cfg.tag_vocabulary_size)]

    for plan in plans:
        i = plan.index
        knows = {(i + 1) % n}
        if n > 3:
            knows.add((i + 3) % n)
        extras = rng.randrange(2)
        if extras and n > 2:
            knows.add(rng.randrange(n))
        knows.discard(i)
        plan.knows = sorted(knows)
        for j in range(cfg.posts_per_pod):
            tag_count = 1 + rng.randrange(3)
            plan.posts.append(
                {
                    "id": f"{plan.posts_doc}#p{j}",
                    "forum": f"{FORUMS}f{rng.randrange(FORUM_COUNT)}",
                    "tags": sorted(rng.sample(tags, min(tag_count, len(tags)))),
                    "body": f"{rng.choice(_BODY_WORDS)} note {i}-{j}",
                }
            )
        if n > 1 and cfg.likes_per_pod:
            space = [
                (other, j)
                for other in range(n)
                if other != i
                for j in range(cfg.posts_per_pod)
            ]
            plan.likes = sorted(rng.sample(space, min(cfg.likes_per_pod, len(space))))
    return plans


def _card_text(plan: _PodPlan, plans: list[_PodPlan]) -> str:
    lines = [f"<{plan.me}> <{plan.predicate(P_NAME)}> \"User {plan.index}\" ."]
    for other in plan.knows:
        lines.append(f"<{plan.me}> <{plan.predicate(P_KNOWS)}> <{plans[other].me}> .")
    lines.append(f"<{plan.me}> <{plan.predicate(P_POSTS_INDEX)}> <{plan.posts_doc}> .")
    lines.append(f"<{plan.me}> <{plan.predicate(P_LIKES_INDEX)}> <{plan.likes_doc}> .")
    if plan.variant is not None:
        lines.append(f"<{plan.me}> <{SEMMAP_NS}ruleSetLocation> <{plan.rules_doc}> .")
    return "\n".join(lines) + "\n"


def _posts_text(plan: _PodPlan) -> str:
    lines = []
    for post in plan.posts:
        pid = post["id"]
        lines.append(
            f"<{pid}> a <{plan.post_class()}> ;\n"
            f"    <{plan.predicate(P_AUTHOR)}> <{plan.me}> ;\n"
            f"    <{plan.predicate(P_COMMENT)}> \"{post['body']}\" ;\n"
            f"    <{plan.predicate(P_FORUM)}> <{post['forum']}> ."
        )
        for tag in post["tags"]:
            lines.append(f"<{pid}> <{plan.predicate(P_TAG)}> <{plan.tag_iri(tag)}> .")
    return "\n".join(lines) + "\n"


def _likes_text(plan: _PodPlan, plans: list[_PodPlan]) -> str:
    lines = []
    for other, j in plan.likes:
        target = f"{plans[other].posts_doc}#p{j}"
        lines.append(f"<{plan.me}> <{plan.predicate(P_LIKES)}> <{target}> .")
    return "\n".join(lines) + "\n" if lines else "\n"


def _rules_text(plan: _PodPlan, cfg: FixtureConfig) -> str:
    subweb = f"{plan.rules_doc}#subweb"
    lines = [
        f"@prefix semmap: <{SEMMAP_NS}> .",
        "",
        f"<{subweb}> a semmap:Subweb ;",
        f"    semmap:iriPrefix \"{plan.prefix}\" .",
    ]
    mappings: list[tuple[str, str, str]] = []
    if plan.variant == "V1":
        for predicate in CANONICAL_PREDICATES:
            mappings.append((_https_form(predicate), "equivalentProperty", predicate))
        mappings.append((_https_form(C_POST), "equivalentClass", C_POST))
    else:
        for canonical, renamed in V2_PREDICATES.items():
            mappings.append((renamed, "equivalentProperty", canonical))
        mappings.append((V2_POST_CLASS, "equivalentClass", C_POST))
        for k in range(cfg.tag_vocabulary_size):
            tag = f"{TAGS}t{k}"
            mappings.append((_https_form(tag), "sameEntity", tag))
    for ordinal, (source, relation, target) in enumerate(mappings):
        lines.extend(
            [
                "",
                f"<{plan.rules_doc}#m{ordinal}> a semmap:Mapping ;",
                f"    semmap:subjectId <{source}> ;",
                f"    semmap:mappingRelation semmap:{relation} ;",
                f"    semmap:objectId <{target}> ;",
                f"    semmap:scope <{subweb}> .",
            ]
        )
    return "\n".join(lines) + "\n"


def canonical_queries() -> dict[str, str]:
    """The five named queries, written purely in canonical vocabulary."""
    u0 = f"{POD_PREFIX}u0/card#me"
    u1 = f"{POD_PREFIX}u1/card#me"
    return {
        QUERY_MESSAGES_OF_LIKED: (
            f"PREFIX s: <{SCHEMA}>\n"
            f"PREFIX v: <{VOCAB}>\n"
            "SELECT ?message WHERE {\n"
            f"  <{u0}> s:likes ?post .\n"
            "  ?post v:author ?user .\n"
            "  ?item v:author ?user .\n"
            "  ?item v:comment ?message .\n"
            "}"
        ),
        QUERY_FORUMS_POSTED: (
            f"PREFIX v: <{VOCAB}>\n"
            "SELECT DISTINCT ?forum WHERE {\n"
            f"  ?post v:author <{u1}> .\n"
            "  ?post v:forum ?forum .\n"
            "}"
        ),
        QUERY_USER_INFORMATION: (
            f"PREFIX s: <{SCHEMA}>\n"
            "SELECT ?friend ?name WHERE {\n"
            f"  <{u0}> s:knows ?friend .\n"
            "  ?friend s:name ?name .\n"
            "}"
        ),
        QUERY_POSTS_OF_USER: (
            f"PREFIX v: <{VOCAB}>\n"
            "SELECT ?post ?content WHERE {\n"
            f"  ?post v:author <{u1}> .\n"
            "  ?post v:comment ?content .\n"
            "}"
        ),
        QUERY_TAG_DISTRIBUTION: (
            f"PREFIX v: <{VOCAB}>\n"
            "SELECT ?tag (COUNT(?post) AS ?posts) WHERE {\n"
            "  ?post v:tag ?tag .\n"
            "} GROUP BY ?tag"
        ),
    }


def _query_seeds(plans: list[_PodPlan]) -> dict[str, tuple[str, ...]]:
    u0 = plans[0].card
    u1 = plans[1].card if len(plans) > 1 else plans[0].card
    return {
        QUERY_MESSAGES_OF_LIKED: (u0,),
        QUERY_FORUMS_POSTED: (u1,),
        QUERY_USER_INFORMATION: (u0,),
        QUERY_POSTS_OF_USER: (u1,),
        QUERY_TAG_DISTRIBUTION: (u0,),
    }


def generate(cfg: FixtureConfig) -> FixtureSet:
    """Build the fixture deterministically from its configuration."""
    rng = random.Random(cfg.random_seed)
    plans = _make_plans(cfg, rng)
    documents: dict[str, str] = {}
    rule_docs: set[str] = set()
    for plan in plans:
        documents[plan.card] = _card_text(plan, plans)
        documents[plan.posts_doc] = _posts_text(plan)
        documents[plan.likes_doc] = _likes_text(plan, plans)
        if plan.variant is not None:
            documents[plan.rules_doc] = _rules_text(plan, cfg)
            rule_docs.add(plan.rules_doc)

    queries = canonical_queries()
    for text in queries.values():
        parse_query(text)

    fx = FixtureSet(
        config=cfg,
        documents=documents,
        seeds=_query_seeds(plans),
        queries=queries,
        oracle_results={},
        skip_prefixes=FIXTURE_SKIP_PREFIXES,
        rule_document_iris=frozenset(rule_docs),
    )
    fx.oracle_results = {
        name: {
            mode: centralized_oracle(fx, name, mode).to_json_dict()
            for mode in ("on", "off")
        }
        for name in queries
    }
    return fx


# -- centralized oracle ----------------------------------------------------


def _global_rewrite_maps(fx: FixtureSet) -> dict[str, dict[str, str]]:
    """Source-to-target maps per category from every rule document.

    Scoping is ignored on purpose: generated subwebs never overlap and the
    same mapping repeated by several pods is consistent, so global
    application matches scoped application on this fixture family.
    """
    from .alignment import parse_rule_set

    maps: dict[str, dict[str, str]] = {"predicate": {}, "class": {}, "entity": {}}
    for iri in sorted(fx.rule_document_iris):
        doc = parse_turtle(fx.documents[iri], iri)
        rs = parse_rule_set(doc)
        for rule in rs.rules:
            existing = maps[rule.category].setdefault(rule.source_term, rule.target_term)
            if existing != rule.target_term:
                raise ValueError(
                    f"conflicting global rules for {rule.source_term}: "
                    f"{existing} vs {rule.target_term}"
                )
    return maps


def _rewrite_term(term: Term, mapping: dict[str, str]) -> Term:
    if not isinstance(term, Iri):
        return term
    value = term.value
    seen = 0
    while value in mapping:
        value = mapping[value]
        seen += 1
        if seen > len(mapping):
            raise ValueError("cyclic global rewrite map")
    return Iri(value) if value != term.value else term


def centralized_oracle(fx: FixtureSet, query: Query | str, alignment: str) -> ResultTable:
    """Ground truth: merge every data document, optionally apply all rules
    globally to fixpoint, and evaluate the query centrally."""
    if alignment not in ("on", "off"):
        raise ValueError("alignment must be 'on' or 'off'")
    if isinstance(query, str):
        query = parse_query(fx.queries[query])
    triples = []
    for iri in fx.data_document_iris():
        triples.extend(parse_turtle(fx.documents[iri], iri).triples)
    if alignment == "on":
        maps = _global_rewrite_maps(fx)
        rdf_type = Iri(RDF_NS + "type")
        rewritten = []
        for t in triples:
            predicate = _rewrite_term(t.predicate, maps["predicate"])
            subject = _rewrite_term(t.subject, maps["entity"])
            if predicate == rdf_type:
                obj = _rewrite_term(t.object, maps["class"])
            else:
                obj = _rewrite_term(t.object, maps["entity"])
            rewritten.append((subject, predicate, obj))
        view = EvaluationView(rewritten)
    else:
        view = EvaluationView(triples)
    return evaluate(query, view)


def oracle_table(fx: FixtureSet, name: str, alignment: str) -> ResultTable:
    """Embedded oracle result, deserialized."""
    return table_from_json_dict(fx.oracle_results[name][alignment])


# -- export / import / rebase -----------------------------------------------


def export_directory(fx: FixtureSet, out_dir: str | Path) -> Path:
    """Write the fixture as a Directory-backend tree plus a JSON bundle."""
    out = Path(out_dir)
    docs_dir = out / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)
    for iri, text in fx.documents.items():
        assert iri.startswith(fx.base_prefix)
        name = quote(iri[len(fx.base_prefix):], safe="") + ".ttl"
        (docs_dir / name).write_text(text, encoding="utf-8")
    manifest = {fx.base_prefix: "docs"}
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out / "fixture.json").write_text(
        json.dumps(fx.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return out


def load_fixture(path: str | Path, recompute_oracles: bool = False) -> FixtureSet:
    """Load a fixture bundle from a directory or a JSON file."""
    p = Path(path)
    if p.is_dir():
        p = p / "fixture.json"
    with open(p, encoding="utf-8") as fh:
        fx = FixtureSet.from_json_dict(json.load(fh))
    if recompute_oracles:
        fx.oracle_results = {
            name: {
                mode: centralized_oracle(fx, name, mode).to_json_dict()
                for mode in ("on", "off")
            }
            for name in fx.queries
        }
    return fx


def rebase(fx: FixtureSet, new_prefix: str) -> FixtureSet:
    """Rewrite every pod IRI onto a new prefix (for HTTP self-hosting)."""
    if not new_prefix.endswith("/"):
        raise ValueError("rebase prefix must end with '/'")
    payload = json.dumps(fx.to_json_dict())
    payload = payload.replace(fx.base_prefix, new_prefix)
    return FixtureSet.from_json_dict(json.loads(payload))
