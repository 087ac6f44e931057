"""Tokenizer and parser for the dot subset emitted by egypt.

egypt turns GCC RTL dumps into one ``.eg`` file per C source file. Each file
is a tiny Graphviz-like document::

    digraph callgraph {
        "main" -> "do_work" [style=solid];
        "main" -> "handler" [style=dotted];
        "orphan";
    }

Only this subset is understood: quoted identifiers, ``->`` edges with an
optional trailing ``[style=solid];`` / ``[style=dotted];`` annotation, and
node-only declarations. Subgraphs, other attributes and undirected graphs are
rejected.

Identifiers are C function names. Underscores are scanned as individual
tokens (so ``__kmalloc`` arrives as ``_``, ``_``, ``kmalloc``) and the parser
glues the pieces back together; this also covers interior underscores as in
``do_fork``, which the scanner splits into ``do``, ``_``, ``fork``.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

KEYWORDS = frozenset({"digraph", "callgraph", "style", "solid", "dotted"})
PUNCTUATION = frozenset("{};[]=->_")

STYLE_SOLID = "solid"
STYLE_DOTTED = "dotted"
STYLE_UNSPECIFIED = "unspecified"
STYLES = (STYLE_SOLID, STYLE_DOTTED, STYLE_UNSPECIFIED)

_WORD_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*|[0-9]+")
_NAME_RE = re.compile(r"_*[A-Za-z0-9][A-Za-z0-9_]*\Z")


class EgSyntaxError(ValueError):
    """Lexical or syntactic error in an .eg document, with its position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class MissingStyleWarning(UserWarning):
    """An edge without the usual trailing [style=...]; annotation."""


@dataclass(frozen=True)
class Token:
    kind: str  # "keyword" | "punctuation" | "identifier" | "quote"
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class RawEdge:
    """One caller -> callee fact, tagged with the file it was parsed from."""

    source: str
    dest: str
    style: str
    file: str


def tokenize(text: str) -> list[Token]:
    """Split an .eg document into tokens, each carrying line/column.

    Raises EgSyntaxError on the first character outside the accepted
    alphabet (letters, digits, underscore, the dot punctuation, quotes and
    whitespace).
    """
    tokens: list[Token] = []
    line = 1
    col = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            col += 1
            i += 1
            continue
        if ch == '"':
            tokens.append(Token("quote", '"', line, col))
            col += 1
            i += 1
            continue
        if ch in PUNCTUATION:
            tokens.append(Token("punctuation", ch, line, col))
            col += 1
            i += 1
            continue
        m = _WORD_RE.match(text, i)
        if m:
            word = m.group()
            kind = "keyword" if word in KEYWORDS else "identifier"
            tokens.append(Token(kind, word, line, col))
            col += len(word)
            i = m.end()
            continue
        raise EgSyntaxError(f"unrecognized character {ch!r}", line, col)
    return tokens


class _Parser:
    """Recursive-descent parser over a token list.

    Grammar, with `id` generalized to any quoted run of identifier and
    underscore tokens containing at least one identifier::

        graph       := 'digraph' 'callgraph' '{' graph_descr '}'
        graph_descr := id ';' graph_descr
                     | id '-' '>' id style_descr? graph_descr
                     | style_descr graph_descr
                     | ε
        style_descr := '[' 'style' '=' ('solid' | 'dotted') ']' ';'
        id          := '"' ('_' | ident)+ '"'
    """

    def __init__(self, tokens: list[Token], file: str):
        self.tokens = tokens
        self.file = file
        self.pos = 0

    def peek(self) -> Token | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def fail(self, message: str) -> EgSyntaxError:
        tok = self.peek()
        if tok is None:
            if self.tokens:
                last = self.tokens[-1]
                return EgSyntaxError(
                    f"unexpected end of input: {message}",
                    last.line,
                    last.column + len(last.text),
                )
            return EgSyntaxError(f"unexpected end of input: {message}", 1, 1)
        return EgSyntaxError(message, tok.line, tok.column)

    def expect(self, text: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            raise self.fail(what or f"expected {text!r}")
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text

    def parse(self) -> list[RawEdge]:
        self.expect("digraph", "expected 'digraph'")
        self.expect("callgraph", "expected 'callgraph'")
        self.expect("{", "expected '{'")
        edges = self.graph_descr()
        self.expect("}", "expected '}'")
        if self.peek() is not None:
            raise self.fail("trailing input after '}'")
        return edges

    def graph_descr(self) -> list[RawEdge]:
        edges: list[RawEdge] = []
        while True:
            tok = self.peek()
            if tok is None or tok.text == "}":
                return edges
            if tok.text == "[":
                self.style_descr()
                continue
            source_tok = tok
            source = self.identifier()
            if self.at(";"):
                self.pos += 1  # node-only declaration
                continue
            if self.at("-"):
                self.pos += 1
                self.expect(">", "expected '>' after '-'")
                dest = self.identifier()
                if self.at("["):
                    style = self.style_descr()
                else:
                    style = STYLE_UNSPECIFIED
                    warnings.warn(
                        f"{self.file}:{source_tok.line}: edge {source} -> {dest}"
                        " has no style annotation",
                        MissingStyleWarning,
                        stacklevel=4,
                    )
                edges.append(RawEdge(source, dest, style, self.file))
                continue
            raise self.fail("expected ';' or '-' '>' after identifier")

    def identifier(self) -> str:
        self.expect('"', "expected '\"'")
        parts: list[str] = []
        has_word = False
        while True:
            tok = self.peek()
            if tok is None:
                raise self.fail("unterminated identifier")
            if tok.text == '"':
                break
            if tok.text == "_":
                parts.append("_")
            elif tok.kind in ("identifier", "keyword"):
                parts.append(tok.text)
                has_word = True
            else:
                raise self.fail("expected identifier characters or '\"'")
            self.pos += 1
        if not has_word:
            raise self.fail("identifier needs at least one letter or digit")
        self.expect('"')
        return "".join(parts)

    def style_descr(self) -> str:
        self.expect("[", "expected '['")
        self.expect("style", "expected 'style'")
        self.expect("=", "expected '='")
        tok = self.peek()
        if tok is None or tok.text not in (STYLE_SOLID, STYLE_DOTTED):
            raise self.fail("expected 'solid' or 'dotted'")
        self.pos += 1
        self.expect("]", "expected ']'")
        self.expect(";", "expected ';' after ']'")
        return tok.text


def parse_eg(tokens: list[Token], file: str) -> list[RawEdge]:
    """Parse a tokenized .eg document into edges, in document order.

    `file` is stamped on every edge; it is not derived from the content.
    Node-only declarations and stray style annotations parse but yield no
    edges. Raises EgSyntaxError at the first offending token.
    """
    return _Parser(tokens, file).parse()


def parse_text(text: str, file: str) -> list[RawEdge]:
    """Tokenize and parse in one step."""
    return parse_eg(tokenize(text), file)


def format_eg(edges: list[RawEdge]) -> str:
    """Print edges back in the concrete .eg syntax.

    parse_text(format_eg(edges), file) reproduces the edge list exactly
    (names, order, styles). Style-less edges are printed without an
    annotation and round-trip as `unspecified`.
    """
    lines = ["digraph callgraph {"]
    for e in edges:
        if e.style == STYLE_UNSPECIFIED:
            lines.append(f'    "{e.source}" -> "{e.dest}"')
        else:
            lines.append(f'    "{e.source}" -> "{e.dest}" [style={e.style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def valid_name(name: str) -> bool:
    """True for names an .eg identifier can denote."""
    return bool(_NAME_RE.match(name))
