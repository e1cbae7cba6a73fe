"""Query AST for the supported SPARQL fragment."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union as TyUnion

from ..terms import Term


@dataclass(frozen=True)
class Variable:
    name: str  # without the leading '?'


PatternTerm = TyUnion[Term, Variable]


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def variables(self) -> set[str]:
        return {
            t.name
            for t in (self.subject, self.predicate, self.object)
            if isinstance(t, Variable)
        }


class GroupPattern:
    """Base for BGP | Union | Filtered."""

    __slots__ = ()

    def variables(self) -> set[str]:
        raise NotImplementedError

    def triple_patterns(self) -> list[TriplePattern]:
        raise NotImplementedError


@dataclass(frozen=True)
class BGP(GroupPattern):
    patterns: tuple[TriplePattern, ...]

    def variables(self) -> set[str]:
        out: set[str] = set()
        for p in self.patterns:
            out |= p.variables()
        return out

    def triple_patterns(self) -> list[TriplePattern]:
        return list(self.patterns)


@dataclass(frozen=True)
class Union(GroupPattern):
    left: GroupPattern
    right: GroupPattern

    def variables(self) -> set[str]:
        return self.left.variables() | self.right.variables()

    def triple_patterns(self) -> list[TriplePattern]:
        return self.left.triple_patterns() + self.right.triple_patterns()


@dataclass(frozen=True)
class Filtered(GroupPattern):
    inner: GroupPattern
    variable: str
    operator: str  # '=' or '!='
    value: Term

    def variables(self) -> set[str]:
        return self.inner.variables()

    def triple_patterns(self) -> list[TriplePattern]:
        return self.inner.triple_patterns()


@dataclass(frozen=True)
class Query:
    projection: tuple[str, ...]  # output column names, in order
    pattern: GroupPattern
    distinct: bool = False
    group_by: str | None = None
    count_variable: str | None = None  # variable inside COUNT(...)
    count_alias: str | None = None  # projected name of the count
    limit: int | None = None

    def validate(self):
        pattern_vars = self.pattern.variables()
        for name in self.projection:
            if name == self.count_alias:
                continue
            if name not in pattern_vars:
                raise ValueError(f"projected variable ?{name} not in pattern")
        if self.group_by is not None:
            expected = (self.group_by, self.count_alias)
            if self.count_alias is None or tuple(self.projection) != expected:
                raise ValueError(
                    "grouped query must project exactly the group variable "
                    "and one COUNT alias"
                )
