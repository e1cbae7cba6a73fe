import random

from linkalign.ntriples import serialize_ntriples, term_to_ntriples
from linkalign.terms import (
    XSD_INTEGER,
    BlankNode,
    Iri,
    Literal,
    SourcedTriple,
    lang_literal,
)
from linkalign.turtle import parse_turtle

SRC = "http://pods.ex/u0/card"


def st(s, p, o):
    return SourcedTriple(s, p, o, SRC)


def test_term_rendering():
    assert term_to_ntriples(Iri("http://a/x")) == "<http://a/x>"
    assert term_to_ntriples(BlankNode("b0")) == "_:b0"
    assert term_to_ntriples(Literal("plain")) == '"plain"'
    assert term_to_ntriples(Literal("5", XSD_INTEGER)) == f'"5"^^<{XSD_INTEGER}>'
    assert term_to_ntriples(lang_literal("hej", "sv")) == '"hej"@sv'


def test_literal_escapes():
    assert term_to_ntriples(Literal('a"b')) == '"a\\"b"'
    assert term_to_ntriples(Literal("a\nb\tc\\d")) == '"a\\nb\\tc\\\\d"'
    assert term_to_ntriples(Literal("bell\x07")) == '"bell\\u0007"'


def test_iri_escapes_control_and_delimiters():
    assert term_to_ntriples(Iri("http://a/sp ace")) == "<http://a/sp\\u0020ace>"
    assert term_to_ntriples(Iri("http://a/<x>")) == "<http://a/\\u003Cx\\u003E>"


def test_output_is_sorted_and_distinct():
    a = st(Iri("http://a/1"), Iri("http://a/p"), Iri("http://a/o"))
    b = st(Iri("http://a/2"), Iri("http://a/p"), Iri("http://a/o"))
    dup = SourcedTriple(a.subject, a.predicate, a.object, "http://other/doc", aligned=True)
    text = serialize_ntriples([b, a, dup])
    assert text == (
        "<http://a/1> <http://a/p> <http://a/o> .\n"
        "<http://a/2> <http://a/p> <http://a/o> .\n"
    )


def test_serialization_is_order_insensitive():
    rng = random.Random(3)
    triples = [
        st(Iri(f"http://a/{rng.randrange(20)}"), Iri("http://a/p"), Literal(str(i % 7)))
        for i in range(50)
    ]
    shuffled = triples[:]
    rng.shuffle(shuffled)
    assert serialize_ntriples(triples) == serialize_ntriples(shuffled)


def test_ntriples_output_reparses_as_turtle():
    triples = [
        st(Iri("http://a/s"), Iri("http://a/p"), Literal('tricky "line"\nnext')),
        st(BlankNode("x"), Iri("http://a/q"), lang_literal("hi", "en")),
        st(Iri("http://a/s"), Iri("http://a/r"), Literal("9", XSD_INTEGER)),
    ]
    text = serialize_ntriples(triples)
    doc = parse_turtle(text, SRC)
    assert {t.spo() for t in doc.triples} == {t.spo() for t in triples}
