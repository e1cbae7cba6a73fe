"""Indexed store of sourced triples with snapshot reads.

The store is append-oriented: `insert` never removes anything and size is
monotone within an execution. The one exception is `replace_aligned_for_source`,
used when newly discovered rules make previously computed aligned copies
stale; it retires the stale aligned tuples and adds the recomputed ones.

Rows are versioned so readers get stable snapshots while writers keep
appending: a row is visible at version v if it was born at or before v and
had not been retired by v. Writers never block readers.
"""

from __future__ import annotations

import threading
from typing import Iterable, Sequence

from .terms import (
    BlankNode,
    Iri,
    SourcedTriple,
    Term,
    scoped_blank_label,
    triple_key,
)


def _scope_label(label: str, source: str) -> str:
    scoped = scoped_blank_label(label, source)
    # Idempotent: aligned copies of stored triples are already scoped.
    prefix = scoped[: scoped.index(".") + 1]
    if label.startswith(prefix):
        return label
    return scoped


def _scope_blanks(t: SourcedTriple) -> SourcedTriple:
    s, o = t.subject, t.object
    changed = False
    if isinstance(s, BlankNode):
        s = BlankNode(_scope_label(s.label, t.source))
        changed = True
    if isinstance(o, BlankNode):
        o = BlankNode(_scope_label(o.label, t.source))
        changed = True
    if not changed:
        return t
    return SourcedTriple(s, t.predicate, o, t.source, t.aligned)


class TripleStore:
    def __init__(self):
        self._rows: list[SourcedTriple] = []
        self._born: list[int] = []
        self._died: list[int | None] = []
        # Latest row index per identity tuple, live or not.
        self._latest: dict[SourcedTriple, int] = {}
        self._by_subject: dict[Term, list[int]] = {}
        self._by_predicate: dict[Term, list[int]] = {}
        self._by_object: dict[Term, list[int]] = {}
        self._by_source: dict[str, list[int]] = {}
        self._version = 0
        self._lock = threading.Lock()

    # -- writes ---------------------------------------------------------

    def insert(self, t: SourcedTriple) -> bool:
        """Add a triple; returns True iff it was not already present.

        Blank node labels are rescoped with a digest of the source IRI so
        labels from different documents cannot collide.
        """
        return self._insert_scoped(_scope_blanks(t))

    def insert_all(self, triples: Iterable[SourcedTriple]) -> list[SourcedTriple]:
        """Insert many; returns the (rescoped) triples that were new."""
        added = []
        for t in triples:
            scoped = _scope_blanks(t)
            if self._insert_scoped(scoped):
                added.append(scoped)
        return added

    def _insert_scoped(self, t: SourcedTriple) -> bool:
        with self._lock:
            idx = self._latest.get(t)
            if idx is not None and self._died[idx] is None:
                return False
            self._version += 1
            self._append_row(t, self._version)
            return True

    def replace_aligned_for_source(
        self, source: str, new_aligned: Iterable[SourcedTriple]
    ) -> list[SourcedTriple]:
        """Swap the aligned tuples of one source for a recomputed set.

        Returns the aligned triples that were not present before the swap,
        i.e. the ones that actually changed.
        """
        new_rows = [_scope_blanks(t) for t in new_aligned]
        for t in new_rows:
            if not t.aligned or t.source != source:
                raise ValueError("replacement rows must be aligned and from the source")
        with self._lock:
            self._version += 1
            v = self._version
            old_alive: dict[SourcedTriple, int] = {}
            for idx in self._by_source.get(source, []):
                row = self._rows[idx]
                if row.aligned and self._died[idx] is None:
                    old_alive[row] = idx
            new_set = set(new_rows)
            for row, idx in old_alive.items():
                if row not in new_set:
                    self._died[idx] = v
            changed = []
            for t in new_rows:
                if t not in old_alive:
                    idx = self._latest.get(t)
                    if idx is None or self._died[idx] is not None:
                        self._append_row(t, v)
                    changed.append(t)
            return changed

    def _append_row(self, t: SourcedTriple, version: int):
        idx = len(self._rows)
        self._rows.append(t)
        self._born.append(version)
        self._died.append(None)
        self._latest[t] = idx
        self._by_subject.setdefault(t.subject, []).append(idx)
        self._by_predicate.setdefault(t.predicate, []).append(idx)
        self._by_object.setdefault(t.object, []).append(idx)
        self._by_source.setdefault(t.source, []).append(idx)

    # -- reads ------------------------------------------------------------

    def _visible(self, idx: int, version: int) -> bool:
        if self._born[idx] > version:
            return False
        died = self._died[idx]
        return died is None or died > version

    def _candidates(
        self,
        subject: Term | None,
        predicate: Term | None,
        obj: Term | None,
        source: str | None,
    ) -> Sequence[int]:
        best: Sequence[int] | None = None
        for index, key in (
            (self._by_subject, subject),
            (self._by_predicate, predicate),
            (self._by_object, obj),
            (self._by_source, source),
        ):
            if key is None:
                continue
            ids = index.get(key, [])
            if best is None or len(ids) < len(best):
                best = ids
        if best is None:
            best = range(len(self._rows))
        return best

    def match(
        self,
        subject: Term | None = None,
        predicate: Term | None = None,
        obj: Term | None = None,
        source: str | None = None,
        aligned: bool | None = None,
        _version: int | None = None,
    ) -> list[SourcedTriple]:
        """All visible triples matching the bound components, in insertion order."""
        version = self._version if _version is None else _version
        out = []
        for idx in self._candidates(subject, predicate, obj, source):
            if not self._visible(idx, version):
                continue
            t = self._rows[idx]
            if subject is not None and t.subject != subject:
                continue
            if predicate is not None and t.predicate != predicate:
                continue
            if obj is not None and t.object != obj:
                continue
            if source is not None and t.source != source:
                continue
            if aligned is not None and t.aligned != aligned:
                continue
            out.append(t)
        return out

    def sources(self) -> list[str]:
        return list(self._by_source.keys())

    def size(self) -> int:
        return sum(1 for i in range(len(self._rows)) if self._visible(i, self._version))

    def snapshot(self) -> "StoreSnapshot":
        with self._lock:
            return StoreSnapshot(self, self._version)


class StoreSnapshot:
    """Stable view of everything visible when the snapshot was taken."""

    def __init__(self, store: TripleStore, version: int):
        self._store = store
        self._version = version

    def match(
        self,
        subject: Term | None = None,
        predicate: Term | None = None,
        obj: Term | None = None,
        source: str | None = None,
        aligned: bool | None = None,
    ) -> list[SourcedTriple]:
        return self._store.match(
            subject, predicate, obj, source, aligned, _version=self._version
        )

    def aligned_triples(self) -> list[SourcedTriple]:
        return self.match(aligned=True)

    def all_triples(self) -> list[SourcedTriple]:
        return self.match()


def canonical_rows(triples: Iterable[SourcedTriple]) -> list[SourcedTriple]:
    return sorted(triples, key=triple_key)
