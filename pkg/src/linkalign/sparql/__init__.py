"""SPARQL fragment: SELECT with BGPs, UNION, equality FILTERs, DISTINCT,
GROUP BY + COUNT, and LIMIT."""

from .ast import BGP, Filtered, GroupPattern, Query, TriplePattern, Union, Variable
from .parser import QueryParseError, UnsupportedQueryFeature, parse_query
from .evaluate import EvaluationView, evaluate
from .results import ResultTable

__all__ = [
    "BGP",
    "EvaluationView",
    "Filtered",
    "GroupPattern",
    "Query",
    "QueryParseError",
    "ResultTable",
    "TriplePattern",
    "Union",
    "UnsupportedQueryFeature",
    "Variable",
    "evaluate",
    "parse_query",
]
