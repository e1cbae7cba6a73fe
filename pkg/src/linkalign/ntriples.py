"""N-Triples serialization in canonical order.

Output is one line per distinct (subject, predicate, object), sorted by the
canonical term ordering, with LF line endings. Byte-exact across runs, which
is what the determinism tests diff against.
"""

from __future__ import annotations

from typing import Iterable

from .terms import (
    RDF_LANG_STRING,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    SourcedTriple,
    Term,
    term_key,
)

_LITERAL_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape_literal(text: str) -> str:
    out = []
    for ch in text:
        if ch in _LITERAL_ESCAPES:
            out.append(_LITERAL_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _escape_iri(value: str) -> str:
    out = []
    for ch in value:
        if ch in '<>"{}|^`\\' or ord(ch) <= 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def term_to_ntriples(t: Term) -> str:
    if isinstance(t, Iri):
        return f"<{_escape_iri(t.value)}>"
    if isinstance(t, BlankNode):
        return f"_:{t.label}"
    if isinstance(t, Literal):
        body = f'"{_escape_literal(t.lexical)}"'
        if t.datatype == RDF_LANG_STRING:
            return f"{body}@{t.language}"
        if t.datatype == XSD_STRING:
            return body
        return f"{body}^^<{_escape_iri(t.datatype)}>"
    raise TypeError(f"not a term: {t!r}")


def serialize_ntriples(triples: Iterable[SourcedTriple]) -> str:
    distinct = {t.spo() for t in triples}
    ordered = sorted(distinct, key=lambda spo: tuple(term_key(x) for x in spo))
    lines = [
        f"{term_to_ntriples(s)} {term_to_ntriples(p)} {term_to_ntriples(o)} .\n"
        for s, p, o in ordered
    ]
    return "".join(lines)
