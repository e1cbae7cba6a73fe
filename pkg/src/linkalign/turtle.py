"""Turtle subset parser.

Covers what pod fixtures and rule documents actually use: @prefix/@base
directives (both @-form and SPARQL-form), the `a` keyword, predicate lists
(`;`), object lists (`,`), labeled and anonymous blank nodes, short string
literals with language tags or datatype annotations, and
integer/decimal/boolean shorthand. Comments run from `#` to end of line.

Deliberately not covered: RDF collections `( )` and triple-quoted strings,
both rejected with UnsupportedFeature; everything else outside the grammar
raises ParseError with a line and column.
"""

from __future__ import annotations

from urllib.parse import urljoin

from .terms import (
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    BlankNode,
    Document,
    Iri,
    Literal,
    SourcedTriple,
    Term,
    is_absolute_iri,
    lang_literal,
)


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class UnsupportedFeature(ParseError):
    """Grammar feature outside the supported subset."""


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

# Token kinds. Values are strings except where noted in _Lexer.
IRIREF = "iriref"
PNAME = "pname"  # value: (prefix, local)
BLANK = "blank"  # value: label
STRING = "string"  # value: decoded text
LANGTAG = "langtag"
NUMBER = "number"  # value: (lexical, datatype IRI)
BOOLEAN = "boolean"
A_KW = "a"
PREFIX_AT = "@prefix"
BASE_AT = "@base"
PREFIX_KW = "PREFIX"
BASE_KW = "BASE"
DOT = "."
SEMI = ";"
COMMA = ","
LBRACK = "["
RBRACK = "]"
HATHAT = "^^"
EOF = "eof"

_LOCAL_EXTRA = "_-%:"


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str, line: int | None = None, col: int | None = None):
        raise ParseError(line or self.line, col or self.col, message)

    def unsupported(self, message: str):
        raise UnsupportedFeature(self.line, self.col, message)

    def _peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.text[i] if i < len(self.text) else ""

    def _advance(self, n: int = 1) -> str:
        out = self.text[self.pos : self.pos + n]
        for ch in out:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n
        return out

    def _skip_ws_and_comments(self):
        while self.pos < len(self.text):
            ch = self._peek()
            if ch in " \t\r\n":
                self._advance()
            elif ch == "#":
                while self.pos < len(self.text) and self._peek() != "\n":
                    self._advance()
            else:
                return

    def next_token(self) -> tuple[str, object, int, int]:
        self._skip_ws_and_comments()
        line, col = self.line, self.col
        ch = self._peek()
        if ch == "":
            return (EOF, None, line, col)
        if ch == "<":
            return (IRIREF, self._scan_iriref(), line, col)
        if ch in "\"'":
            return (STRING, self._scan_string(), line, col)
        if ch == "(":
            self.unsupported("RDF collections are not supported")
        if ch == ")":
            self.error("unexpected ')'")
        if ch == "[":
            self._advance()
            return (LBRACK, None, line, col)
        if ch == "]":
            self._advance()
            return (RBRACK, None, line, col)
        if ch == ";":
            self._advance()
            return (SEMI, None, line, col)
        if ch == ",":
            self._advance()
            return (COMMA, None, line, col)
        if ch == ".":
            # Could open a decimal like `.5`; a bare dot ends a statement.
            if self._peek(1).isdigit():
                return (NUMBER, self._scan_number(), line, col)
            self._advance()
            return (DOT, None, line, col)
        if ch == "^":
            if self._peek(1) == "^":
                self._advance(2)
                return (HATHAT, None, line, col)
            self.error("expected '^^'")
        if ch == "@":
            return self._scan_at(line, col)
        if ch == "_":
            if self._peek(1) != ":":
                self.error("expected '_:' blank node label")
            return (BLANK, self._scan_blank_label(), line, col)
        if ch.isdigit() or (ch in "+-" and (self._peek(1).isdigit() or self._peek(1) == ".")):
            return (NUMBER, self._scan_number(), line, col)
        if ch.isalpha():
            return self._scan_word(line, col)
        self.error(f"unexpected character {ch!r}")

    def _scan_iriref(self) -> str:
        line, col = self.line, self.col
        self._advance()  # '<'
        out: list[str] = []
        while True:
            ch = self._peek()
            if ch == "":
                self.error("unterminated IRI", line, col)
            if ch == ">":
                self._advance()
                return "".join(out)
            if ch == "\\":
                self._advance()
                esc = self._peek()
                if esc in "uU":
                    out.append(self._scan_unicode_escape())
                else:
                    self.error(f"invalid IRI escape '\\{esc}'")
            elif ch in '<"{}|^`' or ord(ch) <= 0x20:
                self.error(f"character {ch!r} not allowed in IRI")
            else:
                out.append(self._advance())

    def _scan_unicode_escape(self) -> str:
        kind = self._advance()  # 'u' or 'U'
        width = 4 if kind == "u" else 8
        digits = ""
        for _ in range(width):
            d = self._peek()
            if d == "" or d not in "0123456789abcdefABCDEF":
                self.error(f"invalid \\{kind} escape")
            digits += self._advance()
        return chr(int(digits, 16))

    def _scan_string(self) -> str:
        quote = self._peek()
        line, col = self.line, self.col
        if self.text[self.pos : self.pos + 3] == quote * 3:
            self.unsupported("triple-quoted strings are not supported")
        self._advance()
        out: list[str] = []
        while True:
            ch = self._peek()
            if ch == "" or ch in "\r\n":
                self.error("unterminated string", line, col)
            if ch == quote:
                self._advance()
                return "".join(out)
            if ch == "\\":
                self._advance()
                esc = self._peek()
                if esc in _STRING_ESCAPES:
                    self._advance()
                    out.append(_STRING_ESCAPES[esc])
                elif esc in "uU":
                    out.append(self._scan_unicode_escape())
                else:
                    self.error(f"invalid string escape '\\{esc}'")
            else:
                out.append(self._advance())

    def _scan_blank_label(self) -> str:
        self._advance(2)  # '_:'
        first = self._peek()
        if not (first.isalnum() or first == "_"):
            self.error("invalid blank node label")
        label = [self._advance()]
        while True:
            ch = self._peek()
            # _peek() is "" at end of input; bare `in` would accept it.
            if ch.isalnum() or (ch and ch in "_-"):
                label.append(self._advance())
            elif ch == "." and (
                self._peek(1).isalnum() or (self._peek(1) and self._peek(1) in "_-.")
            ):
                label.append(self._advance())
            else:
                return "".join(label)

    def _scan_number(self) -> tuple[str, str]:
        lex = []
        if self._peek() and self._peek() in "+-":
            lex.append(self._advance())
        while self._peek().isdigit():
            lex.append(self._advance())
        datatype = XSD_INTEGER
        if self._peek() == "." and self._peek(1).isdigit():
            lex.append(self._advance())
            while self._peek().isdigit():
                lex.append(self._advance())
            datatype = XSD_DECIMAL
        if self._peek() and self._peek() in "eE":
            self.error("double literals with exponents are not supported")
        if not any(c.isdigit() for c in lex):
            self.error("malformed number")
        return ("".join(lex), datatype)

    def _scan_at(self, line: int, col: int):
        self._advance()  # '@'
        word = self._scan_bare_word()
        if word == "prefix":
            return (PREFIX_AT, None, line, col)
        if word == "base":
            return (BASE_AT, None, line, col)
        # Language tag: letters, then optional -alnum groups.
        if not word or not all(c.isalpha() for c in word.split("-")[0]):
            self.error("malformed language tag", line, col)
        tag = word
        while self._peek() == "-":
            self._advance()
            part = self._scan_bare_word()
            if not part or not all(c.isalnum() for c in part):
                self.error("malformed language tag", line, col)
            tag += "-" + part
        return (LANGTAG, tag, line, col)

    def _scan_bare_word(self) -> str:
        out = []
        while self._peek().isalnum() or self._peek() == "-":
            out.append(self._advance())
        return "".join(out)

    def _scan_word(self, line: int, col: int):
        # A prefixed name, the `a` keyword, a boolean, or a SPARQL directive.
        out = []
        while True:
            ch = self._peek()
            if ch.isalnum() or (ch and ch in "_-"):
                out.append(self._advance())
            elif ch == "." and (
                self._peek(1).isalnum() or (self._peek(1) and self._peek(1) in "_-.")
            ):
                out.append(self._advance())
            else:
                break
        word = "".join(out)
        if self._peek() == ":":
            self._advance()
            return (PNAME, (word, self._scan_local()), line, col)
        if word == "a":
            return (A_KW, None, line, col)
        if word in ("true", "false"):
            return (BOOLEAN, word, line, col)
        if word.upper() == "PREFIX":
            return (PREFIX_KW, None, line, col)
        if word.upper() == "BASE":
            return (BASE_KW, None, line, col)
        self.error(f"unexpected token {word!r}", line, col)

    def _scan_local(self) -> str:
        # PN_LOCAL subset: alnum plus _-%: with interior dots.
        out: list[str] = []
        while True:
            ch = self._peek()
            if ch.isalnum() or (ch and ch in _LOCAL_EXTRA):
                out.append(self._advance())
            elif ch == "." and (
                self._peek(1).isalnum()
                or (self._peek(1) and self._peek(1) in _LOCAL_EXTRA)
                or self._peek(1) == "."
            ):
                out.append(self._advance())
            else:
                return "".join(out)


class _Parser:
    def __init__(self, text: str, base: str):
        self.lexer = _Lexer(text)
        self.base = base
        self.doc_iri = base
        self.prefixes: dict[str, str] = {}
        self.triples: list[SourcedTriple] = []
        self._blank_counter = 0
        self.tok = self.lexer.next_token()

    # -- token plumbing ------------------------------------------------

    def _advance(self):
        self.tok = self.lexer.next_token()

    def _expect(self, kind: str):
        if self.tok[0] != kind:
            self._fail(f"expected {kind!r}, found {self._describe()}")
        value = self.tok[1]
        self._advance()
        return value

    def _describe(self) -> str:
        kind, value = self.tok[0], self.tok[1]
        if kind == EOF:
            return "end of input"
        return f"{kind!r}" if value is None else f"{kind} {value!r}"

    def _fail(self, message: str):
        raise ParseError(self.tok[2], self.tok[3], message)

    # -- IRI handling --------------------------------------------------

    def _resolve(self, ref: str) -> Iri:
        resolved = ref if is_absolute_iri(ref) else urljoin(self.base, ref)
        if not is_absolute_iri(resolved):
            self._fail(f"cannot resolve relative IRI {ref!r}")
        return Iri(resolved)

    def _expand_pname(self, prefix: str, local: str) -> Iri:
        if prefix not in self.prefixes:
            self._fail(f"undeclared prefix {prefix!r}")
        return Iri(self.prefixes[prefix] + local)

    def _fresh_blank(self) -> BlankNode:
        self._blank_counter += 1
        return BlankNode(f"genid{self._blank_counter}")

    # -- grammar -------------------------------------------------------

    def parse(self) -> Document:
        while self.tok[0] != EOF:
            kind = self.tok[0]
            if kind == PREFIX_AT:
                self._advance()
                self._directive_prefix(require_dot=True)
            elif kind == BASE_AT:
                self._advance()
                self._directive_base(require_dot=True)
            elif kind == PREFIX_KW:
                self._advance()
                self._directive_prefix(require_dot=False)
            elif kind == BASE_KW:
                self._advance()
                self._directive_base(require_dot=False)
            else:
                self._triples_statement()
        return Document(self.doc_iri, self.triples)

    def _directive_prefix(self, require_dot: bool):
        if self.tok[0] != PNAME:
            self._fail("expected prefix declaration like 'p:'")
        prefix, local = self.tok[1]
        if local != "":
            self._fail("prefix declaration must end with ':'")
        self._advance()
        iri = self._resolve(self._expect(IRIREF))
        self.prefixes[prefix] = iri.value
        if require_dot:
            self._expect(DOT)

    def _directive_base(self, require_dot: bool):
        self.base = self._resolve(self._expect(IRIREF)).value
        if require_dot:
            self._expect(DOT)

    def _triples_statement(self):
        kind = self.tok[0]
        if kind == LBRACK:
            subject = self._blank_property_list()
            # A bare property list may stand alone as a statement.
            if self.tok[0] != DOT:
                self._predicate_object_list(subject)
        else:
            subject = self._subject()
            self._predicate_object_list(subject)
        self._expect(DOT)

    def _subject(self) -> Term:
        kind, value = self.tok[0], self.tok[1]
        if kind == IRIREF:
            self._advance()
            return self._resolve(value)
        if kind == PNAME:
            self._advance()
            return self._expand_pname(*value)
        if kind == BLANK:
            self._advance()
            return BlankNode(value)
        self._fail(f"expected subject, found {self._describe()}")

    def _verb(self) -> Iri:
        kind, value = self.tok[0], self.tok[1]
        if kind == A_KW:
            self._advance()
            return Iri(RDF_TYPE)
        if kind == IRIREF:
            self._advance()
            return self._resolve(value)
        if kind == PNAME:
            self._advance()
            return self._expand_pname(*value)
        self._fail(f"expected predicate IRI, found {self._describe()}")

    def _predicate_object_list(self, subject: Term):
        while True:
            predicate = self._verb()
            self._object_list(subject, predicate)
            if self.tok[0] != SEMI:
                return
            while self.tok[0] == SEMI:
                self._advance()
            # Trailing ';' before '.' or ']' is legal Turtle.
            if self.tok[0] in (DOT, RBRACK):
                return

    def _object_list(self, subject: Term, predicate: Iri):
        while True:
            obj = self._object()
            self.triples.append(
                SourcedTriple(subject, predicate, obj, source=self.doc_iri)
            )
            if self.tok[0] != COMMA:
                return
            self._advance()

    def _object(self) -> Term:
        kind, value = self.tok[0], self.tok[1]
        if kind == IRIREF:
            self._advance()
            return self._resolve(value)
        if kind == PNAME:
            self._advance()
            return self._expand_pname(*value)
        if kind == BLANK:
            self._advance()
            return BlankNode(value)
        if kind == LBRACK:
            return self._blank_property_list()
        if kind == STRING:
            return self._string_literal()
        if kind == NUMBER:
            lexical, datatype = value
            self._advance()
            return Literal(lexical, datatype)
        if kind == BOOLEAN:
            self._advance()
            return Literal(value, XSD_BOOLEAN)
        self._fail(f"expected object, found {self._describe()}")

    def _blank_property_list(self) -> BlankNode:
        self._expect(LBRACK)
        node = self._fresh_blank()
        if self.tok[0] != RBRACK:
            self._predicate_object_list(node)
        self._expect(RBRACK)
        return node

    def _string_literal(self) -> Literal:
        text = self._expect(STRING)
        if self.tok[0] == LANGTAG:
            tag = self.tok[1]
            self._advance()
            return lang_literal(text, tag)
        if self.tok[0] == HATHAT:
            self._advance()
            kind, value = self.tok[0], self.tok[1]
            if kind == IRIREF:
                self._advance()
                return Literal(text, self._resolve(value).value)
            if kind == PNAME:
                self._advance()
                return Literal(text, self._expand_pname(*value).value)
            self._fail("expected datatype IRI after '^^'")
        return Literal(text)


def parse_turtle(text: str, base: str) -> Document:
    """Parse Turtle text into a Document whose triples carry ``base`` as source."""
    if not is_absolute_iri(base):
        raise ValueError(f"document base must be an absolute IRI, got {base!r}")
    return _Parser(text, base).parse()
