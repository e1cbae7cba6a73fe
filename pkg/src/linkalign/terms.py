"""RDF terms, sourced triples, and the canonical term ordering.

Everything above this layer (parsing, storage, alignment, query evaluation)
works with the three term kinds defined here. Terms are immutable and
hashable so they can be used as dictionary keys and set members throughout.

IRIs are compared as plain strings after base resolution; there is no
scheme or case normalization, so ``http://`` and ``https://`` forms of the
same vocabulary are distinct terms.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from urllib.parse import urlsplit

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

RDF_TYPE = RDF_NS + "type"
RDF_LANG_STRING = RDF_NS + "langString"
XSD_STRING = XSD_NS + "string"
XSD_INTEGER = XSD_NS + "integer"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_BOOLEAN = XSD_NS + "boolean"


class Term:
    """Base class for Iri, BlankNode and Literal."""

    __slots__ = ()


@dataclass(frozen=True)
class Iri(Term):
    value: str


@dataclass(frozen=True)
class BlankNode(Term):
    label: str


@dataclass(frozen=True)
class Literal(Term):
    lexical: str
    datatype: str = XSD_STRING
    language: str | None = None

    def __post_init__(self):
        if self.language is not None and self.datatype != RDF_LANG_STRING:
            raise ValueError("language tag requires the language-string datatype")
        if self.datatype == RDF_LANG_STRING and not self.language:
            raise ValueError("language-string literal requires a language tag")


def lang_literal(lexical: str, tag: str) -> Literal:
    return Literal(lexical, RDF_LANG_STRING, tag)


def term_key(t: Term) -> tuple:
    """Total ordering key: kind rank first, then fields lexicographically."""
    if isinstance(t, Iri):
        return (0, t.value)
    if isinstance(t, BlankNode):
        return (1, t.label)
    if isinstance(t, Literal):
        return (2, t.lexical, t.datatype, t.language or "")
    raise TypeError(f"not a term: {t!r}")


@dataclass(frozen=True)
class SourcedTriple:
    """A triple tagged with the document it came from.

    ``aligned`` distinguishes the rewritten copy of a triple from the
    original as fetched; the two coexist in one store.
    """

    subject: Term
    predicate: Term
    object: Term
    source: str
    aligned: bool = False

    def spo(self) -> tuple[Term, Term, Term]:
        return (self.subject, self.predicate, self.object)


def triple_key(t: SourcedTriple) -> tuple:
    return (
        term_key(t.subject),
        term_key(t.predicate),
        term_key(t.object),
        t.source,
        t.aligned,
    )


@dataclass
class Document:
    """A parsed document: its IRI plus the triples it expressed.

    All contained triples carry the document's own IRI as source.
    """

    iri: str
    triples: list[SourcedTriple] = field(default_factory=list)


def defragment(iri: str) -> str:
    """Document identity is the fragmentless IRI."""
    return iri.split("#", 1)[0]


def is_absolute_iri(iri: str) -> bool:
    try:
        return urlsplit(iri).scheme != ""
    except ValueError:
        return False


def scoped_blank_label(label: str, source: str) -> str:
    """Prefix a blank node label with a digest of its source document IRI.

    Keeps blank nodes from different documents distinct once they land in a
    shared store. The result is still a valid blank node label.
    """
    digest = hashlib.sha1(source.encode("utf-8")).hexdigest()[:8]
    return f"{digest}.{label}"
