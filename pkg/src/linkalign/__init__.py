"""linkalign: link-traversal SPARQL querying with online schema alignment.

Dereferences documents across a decentralized pod network, discovers
vocabulary-alignment rule sets during traversal, scopes them to provider
subwebs, and evaluates queries over the aligned view of everything fetched.
"""

from .alignment import (
    AlignmentRule,
    MalformedRuleSet,
    RuleRegistry,
    RuleSet,
    Subweb,
    issuer_rules_from_json,
    parse_rule_set,
    realign_subweb,
)
from .engine import ExecutionReport, Frontier, TraversalConfig, execute, policy_candidates
from .fixtures import FixtureConfig, FixtureSet, canonical_queries, centralized_oracle, generate
from .ntriples import serialize_ntriples
from .sources import (
    CachedSource,
    DirectorySource,
    FetchError,
    HttpSource,
    InMemorySource,
    with_cache,
)
from .sparql import EvaluationView, Query, evaluate, parse_query
from .store import TripleStore
from .terms import BlankNode, Document, Iri, Literal, SourcedTriple, Term
from .turtle import ParseError, UnsupportedFeature, parse_turtle

__version__ = "0.1.0"

__all__ = [
    "AlignmentRule",
    "BlankNode",
    "CachedSource",
    "DirectorySource",
    "Document",
    "EvaluationView",
    "ExecutionReport",
    "FetchError",
    "FixtureConfig",
    "FixtureSet",
    "Frontier",
    "HttpSource",
    "InMemorySource",
    "Iri",
    "Literal",
    "MalformedRuleSet",
    "ParseError",
    "Query",
    "RuleRegistry",
    "RuleSet",
    "SourcedTriple",
    "Subweb",
    "Term",
    "TraversalConfig",
    "TripleStore",
    "UnsupportedFeature",
    "canonical_queries",
    "centralized_oracle",
    "evaluate",
    "execute",
    "generate",
    "issuer_rules_from_json",
    "parse_query",
    "parse_rule_set",
    "parse_turtle",
    "policy_candidates",
    "realign_subweb",
    "serialize_ntriples",
    "with_cache",
    "__version__",
]
