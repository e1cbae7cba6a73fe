"""Result tables and their SPARQL-JSON / CSV serializations.

Rows are partial maps from variable name to term; a variable missing from a
row is an unbound binding (possible under UNION). Both serializations order
rows canonically so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field

from ..terms import (
    RDF_LANG_STRING,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    Term,
    term_key,
)


def row_key(row: dict[str, Term], variables: tuple[str, ...]) -> tuple:
    # Unbound sorts before any bound term.
    return tuple(
        (0,) if variables[i] not in row else (1, *term_key(row[variables[i]]))
        for i in range(len(variables))
    )


def term_to_json(t: Term) -> dict:
    if isinstance(t, Iri):
        return {"type": "uri", "value": t.value}
    if isinstance(t, BlankNode):
        return {"type": "bnode", "value": t.label}
    if isinstance(t, Literal):
        out: dict = {"type": "literal", "value": t.lexical}
        if t.datatype == RDF_LANG_STRING:
            out["xml:lang"] = t.language
        elif t.datatype != XSD_STRING:
            out["datatype"] = t.datatype
        return out
    raise TypeError(f"not a term: {t!r}")


def term_to_text(t: Term) -> str:
    if isinstance(t, Iri):
        return t.value
    if isinstance(t, BlankNode):
        return f"_:{t.label}"
    if isinstance(t, Literal):
        return t.lexical
    raise TypeError(f"not a term: {t!r}")


@dataclass
class ResultTable:
    variables: tuple[str, ...]
    rows: list[dict[str, Term]] = field(default_factory=list)

    def sorted_rows(self) -> list[dict[str, Term]]:
        return sorted(self.rows, key=lambda r: row_key(r, self.variables))

    def as_counter(self) -> Counter:
        return Counter(frozenset(r.items()) for r in self.rows)

    def same_multiset(self, other: "ResultTable") -> bool:
        return self.as_counter() == other.as_counter()

    def is_strict_submultiset(self, other: "ResultTable") -> bool:
        mine, theirs = self.as_counter(), other.as_counter()
        if len(self.rows) >= len(other.rows):
            return False
        return all(theirs[k] >= n for k, n in mine.items())

    def to_json_dict(self) -> dict:
        bindings = [
            {name: term_to_json(row[name]) for name in self.variables if name in row}
            for row in self.sorted_rows()
        ]
        return {
            "head": {"vars": list(self.variables)},
            "results": {"bindings": bindings},
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.variables)
        for row in self.sorted_rows():
            writer.writerow(
                [term_to_text(row[v]) if v in row else "" for v in self.variables]
            )
        return buf.getvalue()


def table_from_json_dict(data: dict) -> ResultTable:
    """Inverse of to_json_dict, used when loading stored oracle tables."""
    variables = tuple(data["head"]["vars"])
    rows = []
    for binding in data["results"]["bindings"]:
        row: dict[str, Term] = {}
        for name, cell in binding.items():
            kind, value = cell["type"], cell["value"]
            if kind == "uri":
                row[name] = Iri(value)
            elif kind == "bnode":
                row[name] = BlankNode(value)
            elif kind == "literal":
                if "xml:lang" in cell:
                    row[name] = Literal(value, RDF_LANG_STRING, cell["xml:lang"])
                else:
                    row[name] = Literal(value, cell.get("datatype", XSD_STRING))
            else:
                raise ValueError(f"unknown term type {kind!r}")
        rows.append(row)
    return ResultTable(variables, rows)
