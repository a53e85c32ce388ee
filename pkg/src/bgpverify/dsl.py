"""Parser for the small infix predicate language used in spec files.

Grammar:

    expr   := term (("or" | "implies") term)*        (left associative)
    term   := factor ("and" factor)*
    factor := "not" factor | "(" expr ")" | atom
    atom   := "true" | "false"
            | "community" A:B
            | "prefix in" CIDR ["ge" n] ["le" n]
            | "localpref" cmp n | "med" cmp n
            | "ghost" name
            | "aspath matches" "<quoted regex>"
    cmp    := "==" | "!=" | "<=" | ">=" | "<" | ">"
"""

from __future__ import annotations

import re
from typing import Iterable, Optional

from . import model
from .dfa import RegexError, parse_regex
from .errors import ConfigError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<cidr>\d+\.\d+\.\d+\.\d+/\d+)
  | (?P<community>\d+:\d+)
  | (?P<number>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"]*")
  | (?P<op>==|!=|<=|>=|<|>)
  | (?P<lparen>\()
  | (?P<rparen>\))
    """,
    re.VERBOSE,
)

KEYWORDS = {
    "true", "false", "not", "and", "or", "implies",
    "community", "prefix", "in", "ge", "le", "localpref", "med",
    "ghost", "aspath", "matches",
}


def _tokenize(text: str, where: Optional[str]) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ConfigError(
                f"unexpected character {text[pos]!r} in predicate at offset {pos}", where
            )
        pos = m.end()
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), m.start()))
    return tokens


class _Parser:
    def __init__(self, text: str, ghost_names: Iterable[str], where: Optional[str]):
        self.text = text
        self.ghosts = set(ghost_names)
        self.where = where
        self.tokens = _tokenize(text, where)
        self.pos = 0

    def error(self, msg: str) -> ConfigError:
        if self.pos < len(self.tokens):
            _, value, off = self.tokens[self.pos]
            return ConfigError(f"{msg} near {value!r} (offset {off})", self.where)
        return ConfigError(f"{msg} at end of predicate {self.text!r}", self.where)

    def peek(self) -> Optional[tuple[str, str]]:
        if self.pos < len(self.tokens):
            kind, value, _ = self.tokens[self.pos]
            return kind, value
        return None

    def take(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of predicate")
        self.pos += 1
        return tok

    def expect_word(self, word: str):
        tok = self.take()
        if tok != ("ident", word):
            raise ConfigError(f"expected {word!r} in predicate {self.text!r}", self.where)

    def at_word(self, word: str) -> bool:
        return self.peek() == ("ident", word)

    def parse(self) -> model.PredicateExpr:
        node = self.expr()
        if self.pos != len(self.tokens):
            raise self.error("trailing tokens")
        return node

    def expr(self) -> model.PredicateExpr:
        node = self.term()
        while self.at_word("or") or self.at_word("implies"):
            _, word = self.take()
            rhs = self.term()
            node = model.OrPred(node, rhs) if word == "or" else model.ImpliesPred(node, rhs)
        return node

    def term(self) -> model.PredicateExpr:
        node = self.factor()
        while self.at_word("and"):
            self.take()
            node = model.AndPred(node, self.factor())
        return node

    def factor(self) -> model.PredicateExpr:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of predicate")
        if tok == ("ident", "not"):
            self.take()
            return model.NotPred(self.factor())
        if tok[0] == "lparen":
            self.take()
            node = self.expr()
            if self.peek() is None or self.peek()[0] != "rparen":
                raise self.error("expected ')'")
            self.take()
            return node
        return self.atom()

    def atom(self) -> model.PredicateExpr:
        kind, value = self.take()
        if kind != "ident":
            raise self.error(f"expected an atom, got {value!r}")
        if value == "true":
            return model.TRUE
        if value == "false":
            return model.FALSE
        if value == "community":
            k, v = self.take()
            if k != "community":
                raise self.error("expected A:B community literal")
            return model.CommunityPred(model.Community.parse(v))
        if value == "prefix":
            self.expect_word("in")
            k, v = self.take()
            if k != "cidr":
                raise self.error("expected CIDR after 'prefix in'")
            try:
                prefix = model.Prefix.parse(v)
            except ValueError as exc:
                raise ConfigError(str(exc), self.where)
            ge = le = None
            if self.at_word("ge"):
                self.take()
                k, n = self.take()
                if k != "number":
                    raise self.error("expected number after 'ge'")
                ge = int(n)
            if self.at_word("le"):
                self.take()
                k, n = self.take()
                if k != "number":
                    raise self.error("expected number after 'le'")
                le = int(n)
            try:
                entry = model.PrefixListEntry(prefix, ge, le)
            except ValueError as exc:
                raise ConfigError(str(exc), self.where)
            return model.PrefixPred(entry)
        if value in ("localpref", "med"):
            k, op = self.take()
            if k != "op":
                raise self.error(f"expected comparison operator after {value!r}")
            k, n = self.take()
            if k != "number":
                raise self.error("expected number in comparison")
            cls = model.LocalPrefPred if value == "localpref" else model.MedPred
            return cls(op, int(n))
        if value == "ghost":
            k, name = self.take()
            if k != "ident":
                raise self.error("expected ghost name")
            if name in KEYWORDS:
                raise self.error(f"ghost name {name!r} collides with a keyword")
            if name not in self.ghosts:
                raise ConfigError(f"undeclared ghost {name!r} in predicate", self.where)
            return model.GhostPred(name)
        if value == "aspath":
            self.expect_word("matches")
            k, s = self.take()
            if k != "string":
                raise self.error("expected quoted regex after 'aspath matches'")
            regex = s[1:-1]
            try:
                parse_regex(regex)
            except RegexError as exc:
                raise ConfigError(f"bad AS-path regex: {exc}", self.where)
            return model.AsPathPred(regex)
        raise self.error(f"unknown atom {value!r}")


def parse_predicate(
    text: str, ghost_names: Iterable[str] = (), where: Optional[str] = None
) -> model.PredicateExpr:
    return _Parser(text, ghost_names, where).parse()
