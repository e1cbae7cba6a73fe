"""Parser for the supported SPARQL fragment.

Grammar, roughly:

    PREFIX*  SELECT [DISTINCT] (?var | (COUNT(?var) AS ?alias))+
    WHERE { patterns }  [GROUP BY ?var]  [LIMIT n]

where a pattern group is either a triples block (with `;` / `,` lists, the
`a` keyword, and FILTER(?v = const) / FILTER(?v != const) clauses) or a
chain of braced groups joined by UNION. Known SPARQL keywords outside the
fragment (OPTIONAL, property paths via ORDER*, subqueries, ...) raise
UnsupportedQueryFeature; other violations raise QueryParseError.
"""

from __future__ import annotations

from ..terms import (
    RDF_TYPE,
    XSD_BOOLEAN,
    Iri,
    Literal,
    Term,
    is_absolute_iri,
    lang_literal,
)
from .ast import BGP, Filtered, GroupPattern, Query, TriplePattern, Union, Variable

_UNSUPPORTED_KEYWORDS = {
    "OPTIONAL",
    "MINUS",
    "GRAPH",
    "SERVICE",
    "BIND",
    "VALUES",
    "ORDER",
    "OFFSET",
    "HAVING",
    "ASK",
    "CONSTRUCT",
    "DESCRIBE",
    "EXISTS",
    "NOT",
    "SUM",
    "AVG",
    "MIN",
    "MAX",
    "REGEX",
}

_KEYWORDS = {
    "SELECT",
    "DISTINCT",
    "WHERE",
    "COUNT",
    "AS",
    "GROUP",
    "BY",
    "LIMIT",
    "UNION",
    "FILTER",
    "PREFIX",
    "BASE",
} | _UNSUPPORTED_KEYWORDS


class QueryParseError(Exception):
    def __init__(self, position: int, message: str):
        self.position = position
        self.message = message
        super().__init__(f"at offset {position}: {message}")


class UnsupportedQueryFeature(QueryParseError):
    """Query uses SPARQL outside the supported fragment."""


# Token kinds
VAR = "var"
IRIREF = "iriref"
PNAME = "pname"
STRING = "string"
LANGTAG = "langtag"
NUMBER = "number"
KEYWORD = "keyword"
A_KW = "a"
PUNCT = "punct"  # value one of { } ( ) . ; , = != ^^
EOF = "eof"

_STRING_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: int | None = None):
        raise QueryParseError(self.pos if pos is None else pos, message)

    def _peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.text[i] if i < len(self.text) else ""

    def tokens(self):
        while True:
            tok = self.next_token()
            yield tok
            if tok[0] == EOF:
                return

    def next_token(self):
        # returns (kind, value, position)
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == "#":
                while self.pos < len(text) and text[self.pos] != "\n":
                    self.pos += 1
            else:
                break
        start = self.pos
        if self.pos >= len(text):
            return (EOF, None, start)
        ch = text[self.pos]
        if ch == "?" or ch == "$":
            self.pos += 1
            name = self._scan_name()
            if not name:
                self.error("empty variable name", start)
            return (VAR, name, start)
        if ch == "<":
            return (IRIREF, self._scan_iriref(), start)
        if ch in "\"'":
            return (STRING, self._scan_string(), start)
        if ch == "@":
            self.pos += 1
            tag = self._scan_langtag()
            return (LANGTAG, tag, start)
        if ch == "!":
            if self._peek(1) == "=":
                self.pos += 2
                return (PUNCT, "!=", start)
            self.error("expected '!='", start)
        if ch == "^":
            if self._peek(1) == "^":
                self.pos += 2
                return (PUNCT, "^^", start)
            self.error("expected '^^'", start)
        if ch in "{}().;,=":
            if ch == "." and self._peek(1).isdigit():
                return (NUMBER, self._scan_number(), start)
            self.pos += 1
            return (PUNCT, ch, start)
        if ch.isdigit() or (ch in "+-" and (self._peek(1).isdigit() or self._peek(1) == ".")):
            return (NUMBER, self._scan_number(), start)
        if ch.isalpha() or ch == "_":
            return self._scan_word(start)
        self.error(f"unexpected character {ch!r}", start)

    def _scan_name(self) -> str:
        out = []
        while self._peek().isalnum() or self._peek() == "_":
            out.append(self.text[self.pos])
            self.pos += 1
        return "".join(out)

    def _scan_iriref(self) -> str:
        start = self.pos
        self.pos += 1
        out = []
        while True:
            ch = self._peek()
            if ch == "":
                self.error("unterminated IRI", start)
            if ch == ">":
                self.pos += 1
                return "".join(out)
            if ch in '<"{}|^`\\' or ord(ch) <= 0x20:
                self.error(f"character {ch!r} not allowed in IRI", self.pos)
            out.append(ch)
            self.pos += 1

    def _scan_string(self) -> str:
        quote = self._peek()
        start = self.pos
        self.pos += 1
        out = []
        while True:
            ch = self._peek()
            if ch == "" or ch in "\r\n":
                self.error("unterminated string", start)
            if ch == quote:
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                self.pos += 1
                esc = self._peek()
                if esc not in _STRING_ESCAPES:
                    self.error(f"invalid string escape '\\{esc}'", self.pos)
                out.append(_STRING_ESCAPES[esc])
                self.pos += 1
            else:
                out.append(ch)
                self.pos += 1

    def _scan_langtag(self) -> str:
        out = []
        while self._peek().isalnum() or self._peek() == "-":
            out.append(self.text[self.pos])
            self.pos += 1
        tag = "".join(out)
        if not tag:
            self.error("empty language tag")
        return tag

    def _scan_number(self) -> tuple[str, str]:
        from ..terms import XSD_DECIMAL, XSD_INTEGER

        out = []
        # _peek() is "" at end of input, which `in` would treat as a member.
        if self._peek() and self._peek() in "+-":
            out.append(self.text[self.pos])
            self.pos += 1
        while self._peek().isdigit():
            out.append(self.text[self.pos])
            self.pos += 1
        datatype = XSD_INTEGER
        if self._peek() == "." and self._peek(1).isdigit():
            out.append(self.text[self.pos])
            self.pos += 1
            while self._peek().isdigit():
                out.append(self.text[self.pos])
                self.pos += 1
            datatype = XSD_DECIMAL
        if not any(c.isdigit() for c in out):
            self.error("malformed number")
        return ("".join(out), datatype)

    def _scan_word(self, start: int):
        out = []
        while self._peek().isalnum() or (self._peek() and self._peek() in "_-"):
            out.append(self.text[self.pos])
            self.pos += 1
        word = "".join(out)
        if self._peek() == ":":
            self.pos += 1
            local = self._scan_local()
            return (PNAME, (word, local), start)
        if word == "a":
            return (A_KW, None, start)
        if word in ("true", "false"):
            return (STRING + "_bool", word, start)  # folded into literal by parser
        upper = word.upper()
        if upper in _KEYWORDS:
            return (KEYWORD, upper, start)
        self.error(f"unexpected token {word!r}", start)

    def _scan_local(self) -> str:
        out = []
        while True:
            ch = self._peek()
            if ch.isalnum() or (ch and ch in "_-%"):
                out.append(ch)
                self.pos += 1
            elif ch == "." and (
                self._peek(1).isalnum() or (self._peek(1) and self._peek(1) in "_-%.")
            ):
                out.append(ch)
                self.pos += 1
            else:
                return "".join(out)


class _Parser:
    def __init__(self, text: str):
        self.lexer = _Lexer(text)
        self.prefixes: dict[str, str] = {}
        self.tok = self.lexer.next_token()

    def _advance(self):
        self.tok = self.lexer.next_token()

    def _fail(self, message: str):
        raise QueryParseError(self.tok[2], message)

    def _unsupported(self, message: str):
        raise UnsupportedQueryFeature(self.tok[2], message)

    def _expect_punct(self, value: str):
        if self.tok[0] != PUNCT or self.tok[1] != value:
            self._fail(f"expected {value!r}")
        self._advance()

    def _expect_keyword(self, word: str):
        if self.tok[0] != KEYWORD or self.tok[1] != word:
            self._fail(f"expected {word}")
        self._advance()

    def _at_keyword(self, word: str) -> bool:
        return self.tok[0] == KEYWORD and self.tok[1] == word

    def _check_unsupported(self):
        if self.tok[0] == KEYWORD and self.tok[1] in _UNSUPPORTED_KEYWORDS:
            self._unsupported(f"{self.tok[1]} is outside the supported fragment")

    # -- entry ----------------------------------------------------------

    def parse(self) -> Query:
        while self._at_keyword("PREFIX") or self._at_keyword("BASE"):
            if self._at_keyword("BASE"):
                self._unsupported("BASE is not supported; use absolute IRIs")
            self._advance()
            if self.tok[0] != PNAME or self.tok[1][1] != "":
                self._fail("expected prefix declaration like 'p:'")
            prefix = self.tok[1][0]
            self._advance()
            if self.tok[0] != IRIREF:
                self._fail("expected IRI in prefix declaration")
            iri = self.tok[1]
            if not is_absolute_iri(iri):
                self._fail(f"prefix IRI must be absolute: {iri!r}")
            self.prefixes[prefix] = iri
            self._advance()

        self._check_unsupported()
        self._expect_keyword("SELECT")
        distinct = False
        if self._at_keyword("DISTINCT"):
            distinct = True
            self._advance()

        projection: list[str] = []
        count_variable: str | None = None
        count_alias: str | None = None
        while True:
            if self.tok[0] == VAR:
                projection.append(self.tok[1])
                self._advance()
            elif self.tok[0] == PUNCT and self.tok[1] == "(":
                if count_alias is not None:
                    self._unsupported("at most one aggregate is supported")
                self._advance()
                self._expect_keyword("COUNT")
                self._expect_punct("(")
                if self.tok[0] != VAR:
                    self._unsupported("COUNT over anything but a variable")
                count_variable = self.tok[1]
                self._advance()
                self._expect_punct(")")
                self._expect_keyword("AS")
                if self.tok[0] != VAR:
                    self._fail("expected alias variable after AS")
                count_alias = self.tok[1]
                projection.append(count_alias)
                self._advance()
                self._expect_punct(")")
            else:
                break
        if not projection:
            self._fail("SELECT needs at least one variable")

        if self._at_keyword("WHERE"):
            self._advance()
        pattern = self._group()

        group_by: str | None = None
        if self._at_keyword("GROUP"):
            self._advance()
            self._expect_keyword("BY")
            if self.tok[0] != VAR:
                self._fail("expected variable after GROUP BY")
            group_by = self.tok[1]
            self._advance()

        limit: int | None = None
        if self._at_keyword("LIMIT"):
            self._advance()
            if self.tok[0] != NUMBER or self.tok[1][1].endswith("decimal"):
                self._fail("expected integer after LIMIT")
            limit = int(self.tok[1][0])
            if limit <= 0:
                self._fail("LIMIT must be positive")
            self._advance()

        self._check_unsupported()
        if self.tok[0] != EOF:
            self._fail(f"unexpected trailing input")

        if count_alias is not None and group_by is None:
            self._unsupported("COUNT requires GROUP BY in this fragment")
        query = Query(
            projection=tuple(projection),
            pattern=pattern,
            distinct=distinct,
            group_by=group_by,
            count_variable=count_variable,
            count_alias=count_alias,
            limit=limit,
        )
        try:
            query.validate()
        except ValueError as exc:
            raise QueryParseError(self.tok[2], str(exc)) from exc
        return query

    # -- groups ----------------------------------------------------------

    def _group(self) -> GroupPattern:
        self._expect_punct("{")
        filters: list[tuple[str, str, Term]] = []
        pattern: GroupPattern

        if self.tok[0] == PUNCT and self.tok[1] == "{":
            pattern = self._group()
            while self._at_keyword("UNION"):
                self._advance()
                pattern = Union(pattern, self._group())
            while self._at_keyword("FILTER"):
                filters.append(self._filter())
            if not (self.tok[0] == PUNCT and self.tok[1] == "}"):
                self._check_unsupported()
                self._unsupported("mixing UNION groups with triple patterns")
        else:
            patterns: list[TriplePattern] = []
            while True:
                if self.tok[0] == PUNCT and self.tok[1] == "}":
                    break
                if self._at_keyword("FILTER"):
                    filters.append(self._filter())
                    continue
                if self._at_keyword("UNION"):
                    self._unsupported("mixing UNION groups with triple patterns")
                self._check_unsupported()
                self._triples_block(patterns)
            pattern = BGP(tuple(patterns))

        self._expect_punct("}")
        for variable, op, value in filters:
            pattern = Filtered(pattern, variable, op, value)
        return pattern

    def _filter(self) -> tuple[str, str, Term]:
        self._advance()  # FILTER
        self._expect_punct("(")
        if self.tok[0] != VAR:
            self._unsupported("FILTER must compare a variable with a constant")
        variable = self.tok[1]
        self._advance()
        if self.tok[0] != PUNCT or self.tok[1] not in ("=", "!="):
            self._unsupported("only = and != comparisons are supported")
        op = self.tok[1]
        self._advance()
        value = self._term()
        if isinstance(value, Variable):
            self._unsupported("FILTER must compare a variable with a constant")
        self._expect_punct(")")
        if self.tok[0] == PUNCT and self.tok[1] == ".":
            self._advance()
        return (variable, op, value)

    def _triples_block(self, out: list[TriplePattern]):
        subject = self._term()
        while True:
            predicate = self._verb()
            while True:
                obj = self._term()
                out.append(TriplePattern(subject, predicate, obj))
                if self.tok[0] == PUNCT and self.tok[1] == ",":
                    self._advance()
                    continue
                break
            if self.tok[0] == PUNCT and self.tok[1] == ";":
                self._advance()
                if self.tok[0] == PUNCT and self.tok[1] in (".", "}"):
                    break
                continue
            break
        if self.tok[0] == PUNCT and self.tok[1] == ".":
            self._advance()

    def _verb(self):
        if self.tok[0] == A_KW:
            self._advance()
            return Iri(RDF_TYPE)
        term = self._term()
        if isinstance(term, Literal):
            self._fail("predicate must be an IRI or variable")
        return term

    def _term(self):
        kind, value = self.tok[0], self.tok[1]
        if kind == VAR:
            self._advance()
            return Variable(value)
        if kind == IRIREF:
            if not is_absolute_iri(value):
                self._fail(f"IRI must be absolute: {value!r}")
            self._advance()
            return Iri(value)
        if kind == PNAME:
            prefix, local = value
            if prefix not in self.prefixes:
                self._fail(f"undeclared prefix {prefix!r}")
            self._advance()
            return Iri(self.prefixes[prefix] + local)
        if kind == STRING:
            self._advance()
            if self.tok[0] == LANGTAG:
                tag = self.tok[1]
                self._advance()
                return lang_literal(value, tag)
            if self.tok[0] == PUNCT and self.tok[1] == "^^":
                self._advance()
                dtype = self._term()
                if not isinstance(dtype, Iri):
                    self._fail("expected datatype IRI after '^^'")
                return Literal(value, dtype.value)
            return Literal(value)
        if kind == NUMBER:
            lexical, datatype = value
            self._advance()
            return Literal(lexical, datatype)
        if kind == STRING + "_bool":
            self._advance()
            return Literal(value, XSD_BOOLEAN)
        self._check_unsupported()
        self._fail(f"expected a term, found {kind!r}")


def parse_query(text: str) -> Query:
    return _Parser(text).parse()
