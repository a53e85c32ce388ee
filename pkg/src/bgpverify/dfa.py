"""Deterministic finite automata over AS-path symbol alphabets.

Symbols are dense indexes 0..n-1; the caller maps tracked ASNs to indexes and
reserves the last index for OTHER (any untracked ASN).  Path regexes use ASN
literals as tokens, '.' for any symbol, the usual * + ? | ( ) operators, and
mandatory ^...$ anchors.

All public constructors return canonical automata: complete, minimized, and
numbered breadth-first from the start state (always state 0), so two DFAs
accept the same language iff they are structurally equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Iterable, Iterator, Mapping, Optional, Sequence


class RegexError(ValueError):
    """Malformed AS-path regular expression."""


# ---------------------------------------------------------------------------
# Regex parsing


def tokenize_regex(text: str) -> list[object]:
    tokens: list[object] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(int(text[i:j]))
            i = j
        elif ch in "^$()*+?|.":
            tokens.append(ch)
            i += 1
        else:
            raise RegexError(f"unexpected character {ch!r} at offset {i} in regex {text!r}")
    return tokens


def regex_literals(text: str) -> set[int]:
    return {t for t in tokenize_regex(text) if isinstance(t, int)}


# AST nodes: ("eps",), ("lit", asn), ("any",), ("cat", a, b), ("alt", a, b),
# ("star", a), ("plus", a), ("opt", a)


def parse_regex(text: str) -> tuple:
    tokens = tokenize_regex(text)
    if not tokens or tokens[0] != "^" or tokens[-1] != "$":
        raise RegexError(f"regex must be anchored with ^ and $: {text!r}")
    body = tokens[1:-1]
    if "^" in body or "$" in body:
        raise RegexError(f"anchors only allowed at the ends: {text!r}")

    pos = 0

    def peek():
        return body[pos] if pos < len(body) else None

    def parse_alt() -> tuple:
        node = parse_cat()
        nonlocal pos
        while peek() == "|":
            pos += 1
            node = ("alt", node, parse_cat())
        return node

    def parse_cat() -> tuple:
        parts = []
        while peek() is not None and peek() not in ("|", ")"):
            parts.append(parse_repeat())
        if not parts:
            return ("eps",)
        node = parts[0]
        for p in parts[1:]:
            node = ("cat", node, p)
        return node

    def parse_repeat() -> tuple:
        node = parse_atom()
        nonlocal pos
        while peek() in ("*", "+", "?"):
            op = body[pos]
            pos += 1
            node = ({"*": "star", "+": "plus", "?": "opt"}[op], node)
        return node

    def parse_atom() -> tuple:
        nonlocal pos
        t = peek()
        if t == "(":
            pos += 1
            node = parse_alt()
            if peek() != ")":
                raise RegexError(f"unbalanced parentheses in regex {text!r}")
            pos += 1
            return node
        if t == ".":
            pos += 1
            return ("any",)
        if isinstance(t, int):
            pos += 1
            return ("lit", t)
        raise RegexError(f"unexpected token {t!r} in regex {text!r}")

    node = parse_alt()
    if pos != len(body):
        raise RegexError(f"trailing tokens in regex {text!r}")
    return node


# ---------------------------------------------------------------------------
# Canonical Moore-machine minimization (shared by Dfa and the symbolic engine)


def canonical_moore(
    transitions: Sequence[Sequence[int]],
    labels: Sequence[Hashable],
    start: int = 0,
) -> tuple[tuple[tuple[int, ...], ...], tuple[Hashable, ...]]:
    """Minimize a complete deterministic machine with state outputs.

    Returns (transitions, labels) with states renumbered breadth-first from
    the start state (new start = 0).  The result is the unique minimal
    machine for the word->label function, so equality of the returned pair
    is equality of behavior.
    """
    n_sym = len(transitions[0]) if transitions else 0

    # Reachable restriction.
    order = [start]
    seen = {start}
    for s in order:
        for t in transitions[s]:
            if t not in seen:
                seen.add(t)
                order.append(t)
    # Partition refinement: initial blocks by label.
    block = {s: labels[s] for s in order}
    while True:
        ids: dict = {}
        sig = {}
        for s in order:
            key = (block[s],) + tuple(block[transitions[s][a]] for a in range(n_sym))
            sig[s] = ids.setdefault(key, len(ids))
        stable = len(ids) == len(set(block.values()))
        block = sig
        if stable:
            break
    # Canonical renumber: BFS over blocks from the start block.
    rep: dict = {}
    for s in order:
        rep.setdefault(block[s], s)
    number: dict = {block[start]: 0}
    bfs = [start]
    new_trans: list[list[int]] = []
    new_labels: list[Hashable] = []
    i = 0
    while i < len(bfs):
        s = bfs[i]
        i += 1
        row = []
        for a in range(n_sym):
            t = transitions[s][a]
            b = block[t]
            if b not in number:
                number[b] = len(number)
                bfs.append(rep[b])
            row.append(number[b])
        new_trans.append(row)
        new_labels.append(labels[s])
    return tuple(tuple(r) for r in new_trans), tuple(new_labels)


# ---------------------------------------------------------------------------
# DFA


@dataclass(frozen=True)
class Dfa:
    """Complete, minimized, canonically numbered DFA; start state is 0."""

    n_symbols: int
    transitions: tuple[tuple[int, ...], ...]
    accepting: frozenset[int]

    @classmethod
    def _canonical(
        cls, n_symbols: int, transitions: Sequence[Sequence[int]], accepting: Iterable[int]
    ) -> "Dfa":
        acc = set(accepting)
        labels = [s in acc for s in range(len(transitions))]
        trans, labels = canonical_moore(transitions, labels)
        return cls(
            n_symbols,
            trans,
            frozenset(s for s, keep in enumerate(labels) if keep),
        )

    @property
    def n_states(self) -> int:
        return len(self.transitions)

    def accepts(self, word: Sequence[int]) -> bool:
        s = 0
        for a in word:
            s = self.transitions[s][a]
        return s in self.accepting

    def is_empty(self) -> bool:
        return not self.accepting

    def is_universal(self) -> bool:
        return self == universal(self.n_symbols)

    def complement(self) -> "Dfa":
        acc = frozenset(range(self.n_states)) - self.accepting
        return Dfa._canonical(self.n_symbols, self.transitions, acc)

    def _product(self, other: "Dfa", keep) -> "Dfa":
        assert self.n_symbols == other.n_symbols
        states = {(0, 0): 0}
        queue = [(0, 0)]
        trans: list[list[int]] = []
        acc = set()
        i = 0
        while i < len(queue):
            sa, sb = queue[i]
            if keep(sa in self.accepting, sb in other.accepting):
                acc.add(i)
            row = []
            for a in range(self.n_symbols):
                nxt = (self.transitions[sa][a], other.transitions[sb][a])
                if nxt not in states:
                    states[nxt] = len(queue)
                    queue.append(nxt)
                row.append(states[nxt])
            trans.append(row)
            i += 1
        return Dfa._canonical(self.n_symbols, trans, acc)

    def intersect(self, other: "Dfa") -> "Dfa":
        return self._product(other, lambda x, y: x and y)

    def union(self, other: "Dfa") -> "Dfa":
        return self._product(other, lambda x, y: x or y)

    def prepend(self, symbol: int) -> "Dfa":
        """Language { symbol . w | w in L(self) }."""
        shift = 2  # states shift to make room for new start (0) and dead (1)
        trans = [[t + shift for t in row] for row in self.transitions]
        dead = [1] * self.n_symbols
        start_row = [1] * self.n_symbols
        start_row[symbol] = shift  # old start
        all_trans = [start_row, dead] + trans
        acc = {s + shift for s in self.accepting}
        return Dfa._canonical(self.n_symbols, all_trans, acc)

    def shortest_member(self) -> Optional[tuple[int, ...]]:
        """Shortest accepted word; ties broken lexicographically by symbol index."""
        if self.is_empty():
            return None
        parent: dict[int, tuple[int, int]] = {}
        seen = {0}
        queue = [0]
        i = 0
        while i < len(queue):
            s = queue[i]
            i += 1
            if s in self.accepting:
                word: list[int] = []
                while s in parent:
                    s, a = parent[s]
                    word.append(a)
                return tuple(reversed(word))
            for a in range(self.n_symbols):
                t = self.transitions[s][a]
                if t not in seen:
                    seen.add(t)
                    parent[t] = (s, a)
                    queue.append(t)
        return None

    def enumerate_words(self, max_len: int) -> Iterator[tuple[int, ...]]:
        """All accepted words of length <= max_len, in length-then-lex order."""
        layer: list[tuple[tuple[int, ...], int]] = [((), 0)]
        for _ in range(max_len + 1):
            nxt = []
            for word, s in layer:
                if s in self.accepting:
                    yield word
                for a in range(self.n_symbols):
                    nxt.append((word + (a,), self.transitions[s][a]))
            layer = nxt


@lru_cache(maxsize=None)
def universal(n_symbols: int) -> Dfa:
    return Dfa(n_symbols, ((0,) * n_symbols,), frozenset({0}))


@lru_cache(maxsize=None)
def empty(n_symbols: int) -> Dfa:
    return Dfa(n_symbols, ((0,) * n_symbols,), frozenset())


def singleton(word: Sequence[int], n_symbols: int) -> Dfa:
    """DFA accepting exactly the one given word."""
    n = len(word)
    dead = n + 1
    trans = []
    for i in range(n):
        row = [dead] * n_symbols
        row[word[i]] = i + 1
        trans.append(row)
    trans.append([dead] * n_symbols)  # state n: accepting
    trans.append([dead] * n_symbols)  # dead
    return Dfa._canonical(n_symbols, trans, {n})


@lru_cache(maxsize=None)
def length_at_most(k: int, n_symbols: int) -> Dfa:
    dead = k + 1
    trans = [[min(i + 1, dead)] * n_symbols for i in range(k + 1)]
    trans.append([dead] * n_symbols)
    return Dfa._canonical(n_symbols, trans, set(range(k + 1)))


@lru_cache(maxsize=None)
def length_greater(k: int, n_symbols: int) -> Dfa:
    return length_at_most(k, n_symbols).complement()


def nfa_to_dfa(ast: tuple, n_symbols: int, literal_index: Mapping[int, int]) -> Dfa:
    """Thompson construction + subset construction for a parsed regex."""
    eps: list[set[int]] = []
    on_sym: list[dict[int, set[int]]] = []

    def new_state() -> int:
        eps.append(set())
        on_sym.append({})
        return len(eps) - 1

    def build(node) -> tuple[int, int]:
        kind = node[0]
        if kind == "eps":
            s = new_state()
            t = new_state()
            eps[s].add(t)
            return s, t
        if kind == "lit":
            asn = node[1]
            if asn not in literal_index:
                raise RegexError(f"ASN {asn} not in the tracked alphabet")
            s = new_state()
            t = new_state()
            on_sym[s].setdefault(literal_index[asn], set()).add(t)
            return s, t
        if kind == "any":
            s = new_state()
            t = new_state()
            for a in range(n_symbols):
                on_sym[s].setdefault(a, set()).add(t)
            return s, t
        if kind == "cat":
            s1, t1 = build(node[1])
            s2, t2 = build(node[2])
            eps[t1].add(s2)
            return s1, t2
        if kind == "alt":
            s1, t1 = build(node[1])
            s2, t2 = build(node[2])
            s = new_state()
            t = new_state()
            eps[s].update({s1, s2})
            eps[t1].add(t)
            eps[t2].add(t)
            return s, t
        if kind in ("star", "plus", "opt"):
            s1, t1 = build(node[1])
            s = new_state()
            t = new_state()
            eps[s].add(s1)
            eps[t1].add(t)
            if kind in ("star", "opt"):
                eps[s].add(t)
            if kind in ("star", "plus"):
                eps[t1].add(s1)
            return s, t
        raise AssertionError(node)

    start, final = build(ast)

    def closure(states: frozenset[int]) -> frozenset[int]:
        stack = list(states)
        out = set(states)
        while stack:
            s = stack.pop()
            for t in eps[s]:
                if t not in out:
                    out.add(t)
                    stack.append(t)
        return frozenset(out)

    init = closure(frozenset({start}))
    subset_id = {init: 0}
    queue = [init]
    trans: list[list[int]] = []
    acc = set()
    i = 0
    while i < len(queue):
        cur = queue[i]
        if final in cur:
            acc.add(i)
        row = []
        for a in range(n_symbols):
            nxt = closure(frozenset(t for s in cur for t in on_sym[s].get(a, ())))
            if nxt not in subset_id:
                subset_id[nxt] = len(queue)
                queue.append(nxt)
            row.append(subset_id[nxt])
        trans.append(row)
        i += 1
    return Dfa._canonical(n_symbols, trans, acc)


def compile_regex(text: str, literal_index: Mapping[int, int], n_symbols: int) -> Dfa:
    return nfa_to_dfa(parse_regex(text), n_symbols, literal_index)


# ---------------------------------------------------------------------------
# Concrete matching helper for the model layer.
#
# A token regex can only distinguish its own ASN literals, so compiling it
# over (its literals + OTHER) and abstracting the path the same way gives
# exactly the same verdict as any larger alphabet would.


@lru_cache(maxsize=None)
def _compiled_for_own_literals(text: str) -> tuple[Dfa, tuple[int, ...]]:
    lits = tuple(sorted(regex_literals(text)))
    index = {asn: i for i, asn in enumerate(lits)}
    dfa = compile_regex(text, index, len(lits) + 1)
    return dfa, lits


def regex_matches_path(text: str, as_path: Sequence[int]) -> bool:
    dfa, lits = _compiled_for_own_literals(text)
    other = len(lits)
    index = {asn: i for i, asn in enumerate(lits)}
    word = tuple(index.get(a, other) for a in as_path)
    return dfa.accepts(word)
