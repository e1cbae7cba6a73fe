import pytest

from linkalign.terms import (
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
)
from linkalign.turtle import ParseError, UnsupportedFeature, parse_turtle

BASE = "http://pods.ex/u0/card"


def spo_set(doc):
    return {t.spo() for t in doc.triples}


def test_single_statement():
    doc = parse_turtle("<http://a/s> <http://a/p> <http://a/o> .", BASE)
    assert spo_set(doc) == {(Iri("http://a/s"), Iri("http://a/p"), Iri("http://a/o"))}
    assert all(t.source == BASE for t in doc.triples)
    assert not any(t.aligned for t in doc.triples)


def test_prefix_directives_both_forms():
    text = """
    @prefix ex: <http://ex.org/> .
    PREFIX ox: <http://ox.org/>
    ex:s ox:p ex:o .
    """
    doc = parse_turtle(text, BASE)
    assert spo_set(doc) == {(Iri("http://ex.org/s"), Iri("http://ox.org/p"), Iri("http://ex.org/o"))}


def test_base_directive_and_relative_iris():
    text = """
    @base <http://moved.ex/root/> .
    <child> <#prop> <../up> .
    """
    doc = parse_turtle(text, BASE)
    assert spo_set(doc) == {
        (
            Iri("http://moved.ex/root/child"),
            Iri("http://moved.ex/root/#prop"),
            Iri("http://moved.ex/up"),
        )
    }


def test_relative_iris_resolve_against_document_base():
    doc = parse_turtle("<#me> <#knows> <#you> .", "http://pods.ex/u3/card")
    assert spo_set(doc) == {
        (
            Iri("http://pods.ex/u3/card#me"),
            Iri("http://pods.ex/u3/card#knows"),
            Iri("http://pods.ex/u3/card#you"),
        )
    }


def test_a_keyword_and_predicate_object_lists():
    text = """
    @prefix ex: <http://ex.org/> .
    ex:s a ex:T ;
         ex:p ex:o1 , ex:o2 .
    """
    doc = parse_turtle(text, BASE)
    assert spo_set(doc) == {
        (Iri("http://ex.org/s"), Iri(RDF_TYPE), Iri("http://ex.org/T")),
        (Iri("http://ex.org/s"), Iri("http://ex.org/p"), Iri("http://ex.org/o1")),
        (Iri("http://ex.org/s"), Iri("http://ex.org/p"), Iri("http://ex.org/o2")),
    }


def test_labeled_blank_nodes_keep_labels():
    doc = parse_turtle("_:x <http://a/p> _:y .", BASE)
    assert spo_set(doc) == {(BlankNode("x"), Iri("http://a/p"), BlankNode("y"))}


def test_anonymous_blank_node_with_properties():
    text = "<http://a/s> <http://a/p> [ <http://a/q> <http://a/o> ] ."
    doc = parse_turtle(text, BASE)
    triples = doc.triples
    assert len(triples) == 2
    inner = [t for t in triples if t.subject != Iri("http://a/s")]
    outer = [t for t in triples if t.subject == Iri("http://a/s")]
    assert len(inner) == len(outer) == 1
    assert isinstance(outer[0].object, BlankNode)
    assert inner[0].subject == outer[0].object
    assert inner[0].object == Iri("http://a/o")


def test_string_literals_with_escapes():
    text = r'<http://a/s> <http://a/p> "line\nbreak \"quoted\" back\\slash é" .'
    doc = parse_turtle(text, BASE)
    (t,) = doc.triples
    assert t.object == Literal('line\nbreak "quoted" back\\slash é')


def test_language_tags_and_datatypes():
    text = """
    @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
    <http://a/s> <http://a/p> "bonjour"@fr .
    <http://a/s> <http://a/q> "42"^^xsd:integer .
    """
    doc = parse_turtle(text, BASE)
    objects = {t.object for t in doc.triples}
    assert Literal("42", XSD_INTEGER) in objects
    tagged = next(o for o in objects if isinstance(o, Literal) and o.language)
    assert tagged.lexical == "bonjour"
    assert tagged.language == "fr"


def test_numeric_and_boolean_shorthand():
    text = """
    <http://a/s> <http://a/int> 42 .
    <http://a/s> <http://a/neg> -7 .
    <http://a/s> <http://a/dec> 3.5 .
    <http://a/s> <http://a/yes> true .
    <http://a/s> <http://a/no> false .
    """
    doc = parse_turtle(text, BASE)
    objects = {t.predicate.value.rsplit("/", 1)[1]: t.object for t in doc.triples}
    assert objects["int"] == Literal("42", XSD_INTEGER)
    assert objects["neg"] == Literal("-7", XSD_INTEGER)
    assert objects["dec"] == Literal("3.5", XSD_DECIMAL)
    assert objects["yes"] == Literal("true", XSD_BOOLEAN)
    assert objects["no"] == Literal("false", XSD_BOOLEAN)


def test_comments_are_ignored():
    text = """
    # leading comment
    <http://a/s> <http://a/p> <http://a/o> . # trailing comment
    """
    doc = parse_turtle(text, BASE)
    assert len(doc.triples) == 1


def test_parse_error_carries_line_and_column():
    text = "<http://a/s> <http://a/p>\n  %broken ."
    with pytest.raises(ParseError) as info:
        parse_turtle(text, BASE)
    assert info.value.line == 2
    assert info.value.column >= 1
    assert not isinstance(info.value, UnsupportedFeature)


def test_missing_final_dot_is_an_error():
    with pytest.raises(ParseError):
        parse_turtle("<http://a/s> <http://a/p> <http://a/o>", BASE)


def test_unknown_prefix_is_an_error():
    with pytest.raises(ParseError):
        parse_turtle("nope:s <http://a/p> <http://a/o> .", BASE)


def test_collections_are_unsupported():
    with pytest.raises(UnsupportedFeature):
        parse_turtle("<http://a/s> <http://a/p> (1 2 3) .", BASE)


def test_triple_quoted_strings_are_unsupported():
    with pytest.raises(UnsupportedFeature):
        parse_turtle('<http://a/s> <http://a/p> """long""" .', BASE)


def test_base_must_be_absolute():
    with pytest.raises(ValueError):
        parse_turtle("<http://a/s> <http://a/p> <http://a/o> .", "relative/base")


def test_truncated_documents_error_instead_of_hanging():
    for text in (
        "<http://a/s> <http://a/p> ex",
        "<http://a/s> <http://a/p> _:b",
        "<http://a/s> <http://a/p> 5",
        "<http://a/s> <http://a/p> -",
        '<http://a/s> <http://a/p> "open',
    ):
        with pytest.raises(ParseError):
            parse_turtle(text, BASE)


def test_plain_string_defaults_to_xsd_string():
    doc = parse_turtle('<http://a/s> <http://a/p> "plain" .', BASE)
    (t,) = doc.triples
    assert t.object == Literal("plain", XSD_STRING)
