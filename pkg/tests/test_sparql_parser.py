import pytest

from linkalign.sparql import (
    BGP,
    Filtered,
    QueryParseError,
    TriplePattern,
    Union,
    UnsupportedQueryFeature,
    Variable,
    parse_query,
)
from linkalign.terms import RDF_TYPE, Iri, Literal, XSD_INTEGER


def test_simple_bgp():
    q = parse_query("SELECT ?s WHERE { ?s <http://a/p> <http://a/o> . }")
    assert q.projection == ("s",)
    assert q.pattern == BGP(
        (TriplePattern(Variable("s"), Iri("http://a/p"), Iri("http://a/o")),)
    )
    assert not q.distinct
    assert q.limit is None
    assert q.group_by is None


def test_prefixes_and_a_keyword():
    q = parse_query(
        """
        PREFIX ex: <http://ex.org/>
        SELECT ?x WHERE { ?x a ex:Thing . }
        """
    )
    (p,) = q.pattern.patterns
    assert p.predicate == Iri(RDF_TYPE)
    assert p.object == Iri("http://ex.org/Thing")


def test_semicolon_and_comma_lists():
    q = parse_query(
        """
        SELECT ?n ?f WHERE {
          ?u <http://a/name> ?n ;
             <http://a/knows> ?f , <http://a/karin> .
        }
        """
    )
    assert len(q.pattern.patterns) == 3
    assert q.projection == ("n", "f")


def test_distinct_flag():
    q = parse_query("SELECT DISTINCT ?s WHERE { ?s <http://a/p> ?o . }")
    assert q.distinct


def test_limit():
    q = parse_query("SELECT ?s WHERE { ?s <http://a/p> ?o . } LIMIT 5")
    assert q.limit == 5


def test_union_of_two_groups():
    q = parse_query(
        """
        SELECT ?o WHERE {
          { ?s <http://a/p> ?o . } UNION { ?s <http://a/q> ?o . }
        }
        """
    )
    assert isinstance(q.pattern, Union)
    assert isinstance(q.pattern.left, BGP)
    assert isinstance(q.pattern.right, BGP)
    assert {p.predicate.value for p in q.pattern.triple_patterns()} == {
        "http://a/p",
        "http://a/q",
    }


def test_filter_equality_and_inequality():
    q = parse_query(
        """
        SELECT ?s WHERE {
          ?s <http://a/p> ?o .
          FILTER(?o = "x")
        }
        """
    )
    assert isinstance(q.pattern, Filtered)
    assert q.pattern.variable == "o"
    assert q.pattern.operator == "="
    assert q.pattern.value == Literal("x")

    q2 = parse_query(
        "SELECT ?s WHERE { ?s <http://a/p> ?o . FILTER(?o != 3) }"
    )
    assert q2.pattern.operator == "!="
    assert q2.pattern.value == Literal("3", XSD_INTEGER)


def test_group_by_with_count():
    q = parse_query(
        """
        SELECT ?tag (COUNT(?post) AS ?uses) WHERE {
          ?post <http://a/tag> ?tag .
        } GROUP BY ?tag
        """
    )
    assert q.projection == ("tag", "uses")
    assert q.group_by == "tag"
    assert q.count_variable == "post"
    assert q.count_alias == "uses"


def test_unsupported_keywords_raise_dedicated_error():
    for text in (
        "SELECT ?s WHERE { ?s <http://a/p> ?o . OPTIONAL { ?s <http://a/q> ?x . } }",
        "SELECT ?s WHERE { ?s <http://a/p> ?o . } ORDER BY ?s",
        "ASK { ?s <http://a/p> ?o . }",
        "SELECT ?s WHERE { ?s <http://a/p> ?o . MINUS { ?s <http://a/q> ?o . } }",
    ):
        with pytest.raises(UnsupportedQueryFeature):
            parse_query(text)


def test_parse_error_reports_offset():
    with pytest.raises(QueryParseError) as info:
        parse_query("SELECT ?s WHERE { ?s <http://a/p> }")
    assert not isinstance(info.value, UnsupportedQueryFeature)
    assert info.value.position >= 0
    assert "offset" in str(info.value)


def test_unknown_prefix_is_an_error():
    with pytest.raises(QueryParseError):
        parse_query("SELECT ?s WHERE { ?s nope:p ?o . }")


def test_truncated_queries_error_instead_of_hanging():
    for text in (
        "SELECT ?s WHERE { broken",
        "SELECT ?s WHERE { ?s <http://a/p> 5",
        "SELECT",
        "SELECT ?s WHERE { ?s a ex",
    ):
        with pytest.raises(QueryParseError):
            parse_query(text)


def test_projected_variable_must_occur_in_pattern():
    with pytest.raises(QueryParseError):
        parse_query("SELECT ?ghost WHERE { ?s <http://a/p> ?o . }")


def test_variable_predicates_are_allowed():
    q = parse_query("SELECT ?p WHERE { <http://a/s> ?p ?o . }")
    (pat,) = q.pattern.patterns
    assert pat.predicate == Variable("p")


def test_repeated_variable_in_one_pattern():
    q = parse_query("SELECT ?x WHERE { ?x <http://a/p> ?x . }")
    (pat,) = q.pattern.patterns
    assert pat.subject == pat.object == Variable("x")
