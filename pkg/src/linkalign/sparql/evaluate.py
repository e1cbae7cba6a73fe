"""Query evaluation over an immutable view of aligned triples.

The view is treated as a set of (subject, predicate, object) triples: the
same statement asserted by several documents counts once, as in an RDF
merge. Join results keep multiset semantics.

BGPs are evaluated as left-deep hash joins, ordered by ascending candidate
count per pattern (ties broken by pattern position). The join itself runs
in the `_kernel` backend over integer-encoded rows. FILTER drops rows whose
variable is unbound, mirroring SPARQL's error-eliminates-row behavior.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .. import _kernel
from ..terms import SourcedTriple, Term, XSD_INTEGER, Literal
from .ast import BGP, Filtered, GroupPattern, Query, TriplePattern, Union, Variable
from .results import ResultTable, row_key

Spo = tuple[Term, Term, Term]


class EvaluationView:
    """Deduplicated, indexed set of (s, p, o) triples."""

    def __init__(self, triples: Iterable[SourcedTriple | Spo]):
        spo_set: set[Spo] = set()
        for t in triples:
            spo_set.add(t.spo() if isinstance(t, SourcedTriple) else t)
        self._triples = list(spo_set)
        self._by_s: dict[Term, list[Spo]] = {}
        self._by_p: dict[Term, list[Spo]] = {}
        self._by_o: dict[Term, list[Spo]] = {}
        for spo in self._triples:
            self._by_s.setdefault(spo[0], []).append(spo)
            self._by_p.setdefault(spo[1], []).append(spo)
            self._by_o.setdefault(spo[2], []).append(spo)

    def __len__(self) -> int:
        return len(self._triples)

    def triples(self) -> list[Spo]:
        return self._triples

    def match(
        self, s: Term | None = None, p: Term | None = None, o: Term | None = None
    ) -> list[Spo]:
        best: list[Spo] | None = None
        for index, key in ((self._by_s, s), (self._by_p, p), (self._by_o, o)):
            if key is None:
                continue
            ids = index.get(key, [])
            if best is None or len(ids) < len(best):
                best = ids
        if best is None:
            best = self._triples
        return [
            spo
            for spo in best
            if (s is None or spo[0] == s)
            and (p is None or spo[1] == p)
            and (o is None or spo[2] == o)
        ]


class _Interner:
    def __init__(self):
        self._ids: dict[Term, int] = {}
        self._terms: list[Term] = []

    def intern(self, t: Term) -> int:
        idx = self._ids.get(t)
        if idx is None:
            idx = len(self._terms)
            self._ids[t] = idx
            self._terms.append(t)
        return idx

    def term(self, idx: int) -> Term:
        return self._terms[idx]


class _Relation:
    """Binding rows encoded as an int64 matrix, one column per variable."""

    def __init__(self, columns: tuple[str, ...], rows: np.ndarray):
        self.columns = columns
        self.rows = rows

    @classmethod
    def from_lists(cls, columns: tuple[str, ...], rows: list[tuple[int, ...]]):
        arr = np.array(rows, dtype=np.int64).reshape(len(rows), len(columns))
        return cls(columns, arr)


def _pattern_relation(
    pattern: TriplePattern, view: EvaluationView, interner: _Interner, join
) -> _Relation:
    bound = [
        None if isinstance(t, Variable) else t
        for t in (pattern.subject, pattern.predicate, pattern.object)
    ]
    candidates = view.match(*bound)

    positions: dict[str, list[int]] = {}
    for i, t in enumerate((pattern.subject, pattern.predicate, pattern.object)):
        if isinstance(t, Variable):
            positions.setdefault(t.name, []).append(i)
    columns = tuple(positions)

    rows: list[tuple[int, ...]] = []
    for spo in candidates:
        ok = True
        values = []
        for name in columns:
            pos = positions[name]
            first = spo[pos[0]]
            if any(spo[p] != first for p in pos[1:]):
                ok = False
                break
            values.append(interner.intern(first))
        if ok:
            rows.append(tuple(values))
    return _Relation.from_lists(columns, rows)


def _join(left: _Relation, right: _Relation, join) -> _Relation:
    shared = [c for c in right.columns if c in left.columns]
    left_keys = tuple(left.columns.index(c) for c in shared)
    right_keys = tuple(right.columns.index(c) for c in shared)
    carry = tuple(i for i, c in enumerate(right.columns) if c not in left.columns)
    out = join(left.rows, right.rows, left_keys, right_keys, carry)
    columns = left.columns + tuple(right.columns[i] for i in carry)
    return _Relation(columns, out)


def _eval_bgp(bgp: BGP, view: EvaluationView, interner: _Interner, join) -> list[dict[str, Term]]:
    if not bgp.patterns:
        return [{}]
    relations = [_pattern_relation(p, view, interner, join) for p in bgp.patterns]
    order = sorted(range(len(relations)), key=lambda i: (relations[i].rows.shape[0], i))
    acc = relations[order[0]]
    for i in order[1:]:
        acc = _join(acc, relations[i], join)
        if acc.rows.shape[0] == 0:
            break
    return [
        {name: interner.term(int(row[j])) for j, name in enumerate(acc.columns)}
        for row in acc.rows
    ]


def _eval_group(
    group: GroupPattern, view: EvaluationView, interner: _Interner, join
) -> list[dict[str, Term]]:
    if isinstance(group, BGP):
        return _eval_bgp(group, view, interner, join)
    if isinstance(group, Union):
        return _eval_group(group.left, view, interner, join) + _eval_group(
            group.right, view, interner, join
        )
    if isinstance(group, Filtered):
        rows = _eval_group(group.inner, view, interner, join)
        if group.operator == "=":
            return [r for r in rows if group.variable in r and r[group.variable] == group.value]
        return [r for r in rows if group.variable in r and r[group.variable] != group.value]
    raise TypeError(f"unknown group pattern {group!r}")


def _group_and_count(rows: list[dict[str, Term]], query: Query) -> list[dict[str, Term]]:
    groups: dict[tuple, tuple[Term | None, int]] = {}
    for row in rows:
        key_term = row.get(query.group_by)
        key = ("unbound",) if key_term is None else ("bound", key_term)
        prev = groups.get(key, (key_term, 0))
        bump = 1 if query.count_variable in row else 0
        groups[key] = (key_term, prev[1] + bump)
    out = []
    for key_term, count in groups.values():
        row: dict[str, Term] = {}
        if key_term is not None:
            row[query.group_by] = key_term
        row[query.count_alias] = Literal(str(count), XSD_INTEGER)
        out.append(row)
    return out


def evaluate(query: Query, view: EvaluationView, kernel_backend: str | None = None) -> ResultTable:
    """Evaluate a parsed query; rows come back canonically sorted."""
    _, join = _kernel.get_backend(kernel_backend)
    interner = _Interner()
    rows = _eval_group(query.pattern, view, interner, join)

    if query.group_by is not None:
        rows = _group_and_count(rows, query)
    else:
        rows = [
            {name: row[name] for name in query.projection if name in row}
            for row in rows
        ]

    if query.distinct:
        seen = set()
        deduped = []
        for row in rows:
            key = frozenset(row.items())
            if key not in seen:
                seen.add(key)
                deduped.append(row)
        rows = deduped

    rows.sort(key=lambda r: row_key(r, query.projection))
    if query.limit is not None:
        rows = rows[: query.limit]
    return ResultTable(query.projection, rows)
