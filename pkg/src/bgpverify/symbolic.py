"""Symbolic route sets and the predicate-transformer semantics of route maps.

A route set couples a boolean layer over fixed-width attribute bits with a
regular layer over the AS-path alphabet.  Internally each set is a complete
deterministic automaton over the path alphabet whose states carry decision
diagrams: a route belongs to the set iff its attribute bits satisfy the
diagram at the state its abstracted path reaches.  After minimization and
breadth-first numbering this form is canonical, so two sets denote the same
routes iff they compare equal; the classic (diagram x automaton) product is
the one-state special case and is exposed via projections.

Attribute bits (in diagram variable order): prefix address (32), prefix
length (6), local-pref (32), MED (32), next-hop (32), one bit per tracked
community, one OTHER-community bit, one bit per ghost.  A fixed validity
constraint keeps length <= 32 and address bits below the prefix length zero,
so extracted witnesses always decode to well-formed routes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from . import bdd as _bdd
from . import dfa as _dfa
from . import model
from .bdd import FALSE, BddManager
from .config import Universe
from .dfa import Dfa, canonical_moore
from .errors import SpecificationError
from .model import Community, Edge, GhostSpec, PredicateExpr, Prefix, Route, RouteMap, Term


def _int_bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


class Encoding:
    """Bit layout and shared managers for one loaded network."""

    def __init__(self, universe: Universe):
        self.universe = universe
        self.addr_bits = list(range(0, 32))
        self.len_bits = list(range(32, 38))
        self.lp_bits = list(range(38, 70))
        self.med_bits = list(range(70, 102))
        self.nh_bits = list(range(102, 134))
        base = 134
        self.comm_bit = {c: base + i for i, c in enumerate(universe.communities)}
        self.other_bit = base + len(universe.communities)
        gbase = self.other_bit + 1
        self.ghost_bit = {g: gbase + i for i, g in enumerate(universe.ghost_names)}
        self.n_bits = gbase + len(universe.ghost_names)
        self.mgr = BddManager(self.n_bits)

        self.n_symbols = len(universe.asns) + 1  # tracked ASNs + OTHER
        self.other_symbol = len(universe.asns)
        self._symbol_index = {a: i for i, a in enumerate(universe.asns)}

        self.valid = self._build_valid()
        self.fresh_asn = self._fresh_asn()
        self.fresh_community = self._fresh_community()
        self._term_cache: dict[Term, tuple] = {}
        self._term_set_cache: dict[Term, "SymbolicRouteSet"] = {}
        self._pred_cache: dict[PredicateExpr, "SymbolicRouteSet"] = {}
        self._regex_cache: dict[str, Dfa] = {}

    def _build_valid(self) -> int:
        cubes = []
        for length in range(33):
            assign = {b: bool(v) for b, v in zip(self.len_bits, _int_bits(length, 6))}
            for bit in self.addr_bits[length:]:
                assign[bit] = False
            cubes.append(self.mgr.cube(assign))
        return self.mgr.or_all(cubes)

    def _fresh_asn(self) -> int:
        tracked = set(self.universe.asns)
        n = 1
        while n in tracked:
            n += 1
        return n

    def _fresh_community(self) -> Community:
        tracked = set(self.universe.communities)
        hi = 0
        while True:
            for lo in range(model.U16_MAX + 1):
                c = Community(hi, lo)
                if c not in tracked:
                    return c
            hi += 1

    # -- path alphabet -------------------------------------------------------

    def symbol_index(self, asn: int) -> int:
        return self._symbol_index.get(asn, self.other_symbol)

    def tracked_symbol(self, asn: int) -> int:
        try:
            return self._symbol_index[asn]
        except KeyError:
            raise SpecificationError(f"ASN {asn} is outside the tracked universe")

    def abstract_path(self, as_path: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.symbol_index(a) for a in as_path)

    def compile_regex(self, regex: str) -> Dfa:
        d = self._regex_cache.get(regex)
        if d is None:
            d = _dfa.compile_regex(regex, self._symbol_index, self.n_symbols)
            self._regex_cache[regex] = d
        return d

    # -- attribute projection / decoding --------------------------------------

    def project(self, r: Route) -> tuple[int, ...]:
        bits = [0] * self.n_bits
        for b, v in zip(self.addr_bits, _int_bits(r.prefix.address, 32)):
            bits[b] = v
        for b, v in zip(self.len_bits, _int_bits(r.prefix.length, 6)):
            bits[b] = v
        for b, v in zip(self.lp_bits, _int_bits(r.local_pref, 32)):
            bits[b] = v
        for b, v in zip(self.med_bits, _int_bits(r.med, 32)):
            bits[b] = v
        for b, v in zip(self.nh_bits, _int_bits(r.next_hop, 32)):
            bits[b] = v
        for c in r.communities:
            bit = self.comm_bit.get(c)
            if bit is None:
                bits[self.other_bit] = 1
            else:
                bits[bit] = 1
        for g, bit in self.ghost_bit.items():
            bits[bit] = 1 if r.ghost(g) else 0
        return tuple(bits)

    def _field_value(self, vector: Sequence[int], positions: Sequence[int]) -> int:
        v = 0
        for b in positions:
            v = (v << 1) | vector[b]
        return v

    def decode(self, vector: Sequence[int], word: Sequence[int]) -> "Witness":
        comms = {c for c, bit in self.comm_bit.items() if vector[bit]}
        other_used = bool(vector[self.other_bit])
        if other_used:
            comms.add(self.fresh_community)
        ghosts = {g: bool(vector[bit]) for g, bit in self.ghost_bit.items()}
        as_path = tuple(
            self.universe.asns[s] if s < self.other_symbol else self.fresh_asn for s in word
        )
        route = Route(
            prefix=Prefix(
                self._field_value(vector, self.addr_bits),
                self._field_value(vector, self.len_bits),
            ),
            as_path=as_path,
            next_hop=self._field_value(vector, self.nh_bits),
            local_pref=self._field_value(vector, self.lp_bits),
            med=self._field_value(vector, self.med_bits),
            communities=frozenset(comms),
            ghosts=ghosts,
        )
        return Witness(
            route=route,
            other_community=self.fresh_community if other_used else None,
            other_path_positions=tuple(
                i for i, s in enumerate(word) if s == self.other_symbol
            ),
        )

    # -- attribute atoms -------------------------------------------------------

    def prefix_entry_bdd(self, entry: model.PrefixListEntry) -> int:
        lo, hi = entry.bounds()
        mgr = self.mgr
        plen = entry.prefix.length
        addr = mgr.cube(
            {
                b: bool(v)
                for b, v in zip(self.addr_bits[:plen], _int_bits(entry.prefix.address, 32)[:plen])
            }
        )
        length = mgr.apply_and(
            mgr.ge_const(self.len_bits, lo), mgr.le_const(self.len_bits, hi)
        )
        return mgr.apply_and(addr, length)

    def community_bdd(self, c: Community) -> int:
        bit = self.comm_bit.get(c)
        if bit is None:
            raise SpecificationError(f"community {c} is outside the tracked universe")
        return self.mgr.literal(bit)

    def ghost_bdd(self, name: str) -> int:
        bit = self.ghost_bit.get(name)
        if bit is None:
            raise SpecificationError(f"ghost {name!r} is outside the tracked universe")
        return self.mgr.literal(bit)


@dataclass(frozen=True)
class Witness:
    """Concrete member of a nonempty route set.

    Untracked communities appear as one deterministic stand-in community
    (rendered as the literal "OTHER"); OTHER path symbols are rendered as a
    fresh ASN outside the universe.
    """

    route: Route
    other_community: Optional[Community] = None
    other_path_positions: tuple[int, ...] = ()

    def to_doc(self) -> dict:
        comms = sorted(self.route.communities)
        rendered = [
            "OTHER" if c == self.other_community else str(c) for c in comms
        ]
        return {
            "prefix": str(self.route.prefix),
            "as_path": list(self.route.as_path),
            "next_hop": model.format_ipv4(self.route.next_hop),
            "local_pref": self.route.local_pref,
            "med": self.route.med,
            "communities": rendered,
            "ghosts": dict(self.route.ghosts),
        }

    def __str__(self) -> str:
        doc = self.to_doc()
        comms = ",".join(doc["communities"]) or "-"
        ghosts = ",".join(f"{g}={'T' if v else 'F'}" for g, v in sorted(doc["ghosts"].items())) or "-"
        path = " ".join(str(a) for a in doc["as_path"]) or "(empty)"
        return (
            f"{doc['prefix']} path=[{path}] nh={doc['next_hop']} "
            f"lp={doc['local_pref']} med={doc['med']} comm={{{comms}}} ghosts={{{ghosts}}}"
        )


class SymbolicRouteSet:
    """Canonical set of routes; see the module docstring for the encoding."""

    __slots__ = ("enc", "trans", "labels", "_hash")

    def __init__(self, enc: Encoding, trans, labels):
        self.enc = enc
        self.trans = trans
        self.labels = labels
        self._hash = hash((trans, labels))

    @classmethod
    def _make(cls, enc: Encoding, trans, labels) -> "SymbolicRouteSet":
        t, l = canonical_moore(trans, labels)
        return cls(enc, t, l)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def full(cls, enc: Encoding) -> "SymbolicRouteSet":
        return cls._make(enc, ((0,) * enc.n_symbols,), (enc.valid,))

    @classmethod
    def empty(cls, enc: Encoding) -> "SymbolicRouteSet":
        return cls._make(enc, ((0,) * enc.n_symbols,), (FALSE,))

    @classmethod
    def from_attr(cls, enc: Encoding, attr: int) -> "SymbolicRouteSet":
        return cls._make(
            enc, ((0,) * enc.n_symbols,), (enc.mgr.apply_and(attr, enc.valid),)
        )

    @classmethod
    def from_path_dfa(cls, enc: Encoding, d: Dfa) -> "SymbolicRouteSet":
        assert d.n_symbols == enc.n_symbols
        labels = tuple(enc.valid if s in d.accepting else FALSE for s in range(d.n_states))
        return cls._make(enc, d.transitions, labels)

    @classmethod
    def from_product(cls, enc: Encoding, attr: int, d: Dfa) -> "SymbolicRouteSet":
        attr = enc.mgr.apply_and(attr, enc.valid)
        labels = tuple(attr if s in d.accepting else FALSE for s in range(d.n_states))
        return cls._make(enc, d.transitions, labels)

    @classmethod
    def from_routes(cls, enc: Encoding, routes: Iterable[Route]) -> "SymbolicRouteSet":
        by_word: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for r in routes:
            by_word.setdefault(enc.abstract_path(r.as_path), []).append(enc.project(r))
        if not by_word:
            return cls.empty(enc)
        # Word trie with a dead sink; labels at word ends.
        nodes: dict[tuple[int, ...], int] = {(): 0}
        for word in by_word:
            for i in range(1, len(word) + 1):
                nodes.setdefault(word[:i], len(nodes))
        dead = len(nodes)
        trans = [[dead] * enc.n_symbols for _ in range(dead + 1)]
        labels = [FALSE] * (dead + 1)
        for prefix, sid in nodes.items():
            for sym in range(enc.n_symbols):
                nxt = prefix + (sym,)
                if nxt in nodes:
                    trans[sid][sym] = nodes[nxt]
        for word, vectors in by_word.items():
            labels[nodes[word]] = enc.mgr.from_vectors(vectors)
        return cls._make(enc, trans, labels)

    # -- equality -------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, SymbolicRouteSet):
            return NotImplemented
        return self.enc is other.enc and self.trans == other.trans and self.labels == other.labels

    def __hash__(self):
        return self._hash

    # -- basic queries ---------------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.labels)

    def is_empty(self) -> bool:
        return all(l == FALSE for l in self.labels)

    def is_full(self) -> bool:
        return self == SymbolicRouteSet.full(self.enc)

    def contains_route(self, r: Route) -> bool:
        s = 0
        for sym in self.enc.abstract_path(r.as_path):
            s = self.trans[s][sym]
        return self.enc.mgr.eval(self.labels[s], self.enc.project(r))

    def attr_projection(self) -> int:
        return self.enc.mgr.or_all(self.labels)

    def path_projection(self) -> Dfa:
        acc = {s for s, l in enumerate(self.labels) if l != FALSE}
        return Dfa._canonical(self.enc.n_symbols, self.trans, acc)

    def stats(self) -> dict:
        return {
            "dfa_states": self.n_states,
            "bdd_nodes": self.enc.mgr.count_nodes(self.labels),
        }

    # -- set algebra -----------------------------------------------------------

    def _product(self, other: "SymbolicRouteSet", fn) -> "SymbolicRouteSet":
        assert self.enc is other.enc
        n_sym = self.enc.n_symbols
        states = {(0, 0): 0}
        queue = [(0, 0)]
        trans: list[list[int]] = []
        labels: list[int] = []
        i = 0
        while i < len(queue):
            sa, sb = queue[i]
            labels.append(fn(self.labels[sa], other.labels[sb]))
            row = []
            for a in range(n_sym):
                nxt = (self.trans[sa][a], other.trans[sb][a])
                if nxt not in states:
                    states[nxt] = len(queue)
                    queue.append(nxt)
                row.append(states[nxt])
            trans.append(row)
            i += 1
        return SymbolicRouteSet._make(self.enc, trans, labels)

    def intersect(self, other: "SymbolicRouteSet") -> "SymbolicRouteSet":
        return self._product(other, self.enc.mgr.apply_and)

    def union(self, other: "SymbolicRouteSet") -> "SymbolicRouteSet":
        return self._product(other, self.enc.mgr.apply_or)

    def difference(self, other: "SymbolicRouteSet") -> "SymbolicRouteSet":
        return self._product(other, self.enc.mgr.apply_diff)

    def complement(self) -> "SymbolicRouteSet":
        mgr = self.enc.mgr
        valid = self.enc.valid
        return SymbolicRouteSet._make(
            self.enc, self.trans, tuple(mgr.apply_diff(valid, l) for l in self.labels)
        )

    def subset_of(self, other: "SymbolicRouteSet") -> bool:
        """Early-exit product check: empty(self \\ other)."""
        assert self.enc is other.enc
        mgr = self.enc.mgr
        seen = {(0, 0)}
        stack = [(0, 0)]
        while stack:
            sa, sb = stack.pop()
            if mgr.apply_diff(self.labels[sa], other.labels[sb]) != FALSE:
                return False
            for a in range(self.enc.n_symbols):
                nxt = (self.trans[sa][a], other.trans[sb][a])
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return True

    # -- transformations ---------------------------------------------------------

    def transform_labels(self, fn) -> "SymbolicRouteSet":
        return SymbolicRouteSet._make(self.enc, self.trans, tuple(fn(l) for l in self.labels))

    def apply_write(self, writes: Mapping[int, bool]) -> "SymbolicRouteSet":
        if not writes:
            return self
        mgr = self.enc.mgr
        return self.transform_labels(lambda l: mgr.set_bits(l, writes))

    def prepend(self, symbol: int) -> "SymbolicRouteSet":
        """Left-concatenate one path symbol onto every member."""
        shift = 2
        n_sym = self.enc.n_symbols
        trans = [[t + shift for t in row] for row in self.trans]
        start_row = [1] * n_sym
        start_row[symbol] = shift
        all_trans = [start_row, [1] * n_sym] + trans
        labels = (FALSE, FALSE) + self.labels
        return SymbolicRouteSet._make(self.enc, all_trans, labels)

    def truncate_paths(self, max_len: int) -> "SymbolicRouteSet":
        return self.intersect(
            SymbolicRouteSet.from_path_dfa(self.enc, _dfa.length_at_most(max_len, self.enc.n_symbols))
        )

    def long_paths(self, min_len_exclusive: int) -> "SymbolicRouteSet":
        return self.intersect(
            SymbolicRouteSet.from_path_dfa(
                self.enc, _dfa.length_greater(min_len_exclusive, self.enc.n_symbols)
            )
        )

    # -- witnesses -----------------------------------------------------------------

    def witness(self) -> Witness:
        """Deterministic member: lexicographically least attribute bits, then
        shortest (then lexicographically least) accepted path."""
        mgr = self.enc.mgr
        best: Optional[tuple[int, ...]] = None
        for l in set(self.labels):
            v = mgr.sat_min(l)
            if v is not None and (best is None or v < best):
                best = v
        if best is None:
            raise SpecificationError("witness requested from an empty route set")
        targets = {s for s, l in enumerate(self.labels) if mgr.eval(l, best)}
        word = self._shortest_word_to(targets)
        assert word is not None
        return self.enc.decode(best, word)

    def _shortest_word_to(self, targets: set[int]) -> Optional[tuple[int, ...]]:
        parent: dict[int, tuple[int, int]] = {}
        seen = {0}
        queue = [0]
        i = 0
        while i < len(queue):
            s = queue[i]
            i += 1
            if s in targets:
                word: list[int] = []
                while s in parent:
                    s, a = parent[s]
                    word.append(a)
                return tuple(reversed(word))
            for a in range(self.enc.n_symbols):
                t = self.trans[s][a]
                if t not in seen:
                    seen.add(t)
                    parent[t] = (s, a)
                    queue.append(t)
        return None


# ---------------------------------------------------------------------------
# Set-valued predicates (used for fixpoint-derived invariants)


@dataclass(frozen=True)
class SetPredicate(PredicateExpr):
    """A predicate given directly as a symbolic route set."""

    routes: SymbolicRouteSet

    def evaluate(self, r: Route) -> bool:
        return self.routes.contains_route(r)

    def to_dsl(self) -> str:
        st = self.routes.stats()
        return f"<route-set states={st['dfa_states']} nodes={st['bdd_nodes']}>"


# ---------------------------------------------------------------------------
# Predicate encoding


def encode_predicate(p: PredicateExpr, enc: Encoding) -> SymbolicRouteSet:
    cached = enc._pred_cache.get(p)
    if cached is not None:
        return cached
    mgr = enc.mgr
    if isinstance(p, SetPredicate):
        assert p.routes.enc is enc, "set predicate from a different encoding"
        out = p.routes
    elif isinstance(p, model.BoolConst):
        out = SymbolicRouteSet.full(enc) if p.value else SymbolicRouteSet.empty(enc)
    elif isinstance(p, model.CommunityPred):
        out = SymbolicRouteSet.from_attr(enc, enc.community_bdd(p.community))
    elif isinstance(p, model.PrefixPred):
        out = SymbolicRouteSet.from_attr(enc, enc.prefix_entry_bdd(p.entry))
    elif isinstance(p, model.LocalPrefPred):
        out = SymbolicRouteSet.from_attr(enc, mgr.cmp_const(p.op, enc.lp_bits, p.value))
    elif isinstance(p, model.MedPred):
        out = SymbolicRouteSet.from_attr(enc, mgr.cmp_const(p.op, enc.med_bits, p.value))
    elif isinstance(p, model.GhostPred):
        out = SymbolicRouteSet.from_attr(enc, enc.ghost_bdd(p.name))
    elif isinstance(p, model.AsPathPred):
        out = SymbolicRouteSet.from_path_dfa(enc, enc.compile_regex(p.regex))
    elif isinstance(p, model.NotPred):
        out = encode_predicate(p.operand, enc).complement()
    elif isinstance(p, model.AndPred):
        out = encode_predicate(p.left, enc).intersect(encode_predicate(p.right, enc))
    elif isinstance(p, model.OrPred):
        out = encode_predicate(p.left, enc).union(encode_predicate(p.right, enc))
    elif isinstance(p, model.ImpliesPred):
        out = encode_predicate(p.left, enc).complement().union(encode_predicate(p.right, enc))
    else:
        raise SpecificationError(f"cannot encode predicate {p!r}")
    enc._pred_cache[p] = out
    return out


# ---------------------------------------------------------------------------
# Route-map transfer


def _term_parts(enc: Encoding, term: Term) -> tuple[int, Optional[Dfa], bool]:
    """(attribute-clause conjunction, path-clause DFA or None, has path clauses)."""
    cached = enc._term_cache.get(term)
    if cached is not None:
        return cached
    mgr = enc.mgr
    attr = _bdd.TRUE
    path: Optional[Dfa] = None
    for c in term.matches:
        if isinstance(c, model.MatchPrefix):
            attr = mgr.apply_and(attr, mgr.or_all(enc.prefix_entry_bdd(e) for e in c.entries))
        elif isinstance(c, model.MatchCommunity):
            b = enc.community_bdd(c.community)
            attr = mgr.apply_and(attr, b if c.present else mgr.apply_not(b))
        elif isinstance(c, model.MatchLocalPref):
            attr = mgr.apply_and(attr, mgr.cmp_const(c.op, enc.lp_bits, c.value))
        elif isinstance(c, model.MatchMed):
            attr = mgr.apply_and(attr, mgr.cmp_const(c.op, enc.med_bits, c.value))
        elif isinstance(c, model.MatchAsPath):
            d = enc.compile_regex(c.regex)
            path = d if path is None else path.intersect(d)
        else:
            raise SpecificationError(f"unknown match clause {c!r}")
    out = (attr, path, path is not None)
    enc._term_cache[term] = out
    return out


def term_match_set(enc: Encoding, term: Term) -> SymbolicRouteSet:
    cached = enc._term_set_cache.get(term)
    if cached is None:
        attr, path, _ = _term_parts(enc, term)
        d = path if path is not None else _dfa.universal(enc.n_symbols)
        cached = SymbolicRouteSet.from_product(enc, attr, d)
        enc._term_set_cache[term] = cached
    return cached


def _action_effects(enc: Encoding, term: Term) -> tuple[dict[int, bool], tuple[int, ...]]:
    """Constant bit writes plus prepended path symbols, in application order."""
    writes: dict[int, bool] = {}
    prepends: list[int] = []
    for a in term.sets:
        if isinstance(a, model.AddCommunity):
            writes[enc.comm_bit[a.community]] = True
        elif isinstance(a, model.DeleteCommunity):
            writes[enc.comm_bit[a.community]] = False
        elif isinstance(a, model.DeleteAllCommunities):
            for bit in enc.comm_bit.values():
                writes[bit] = False
            writes[enc.other_bit] = False
        elif isinstance(a, model.SetLocalPref):
            writes.update(zip(enc.lp_bits, map(bool, _int_bits(a.value, 32))))
        elif isinstance(a, model.SetMed):
            writes.update(zip(enc.med_bits, map(bool, _int_bits(a.value, 32))))
        elif isinstance(a, model.SetNextHop):
            writes.update(zip(enc.nh_bits, map(bool, _int_bits(a.value, 32))))
        elif isinstance(a, model.PrependAsn):
            prepends.append(enc.tracked_symbol(a.asn))
        else:
            raise SpecificationError(f"unknown set action {a!r}")
    return writes, tuple(prepends)


def _ghost_writes(enc: Encoding, ghosts: GhostSpec, e: Edge, direction: str) -> dict[int, bool]:
    writes: dict[int, bool] = {}
    for name in ghosts.declarations:
        eff = ghosts.effect(e, direction, name)
        if eff is model.Effect.SET_TRUE:
            writes[enc.ghost_bit[name]] = True
        elif eff is model.Effect.SET_FALSE:
            writes[enc.ghost_bit[name]] = False
    return writes


@dataclass(frozen=True)
class TransferPart:
    """One first-match partition slice of a transfer, kept for localization."""

    term_index: int
    pre: SymbolicRouteSet
    post: SymbolicRouteSet
    writes: dict[int, bool]
    strip_prefix: tuple[int, ...]  # symbols an image path starts with, outermost first


@dataclass(frozen=True)
class TransferResult:
    result: SymbolicRouteSet
    parts: tuple[TransferPart, ...]


def transfer_route_map(
    m: RouteMap,
    e: Edge,
    direction: str,
    ghosts: GhostSpec,
    s: SymbolicRouteSet,
) -> TransferResult:
    """Exact image of ``s`` through the map followed by the edge's ghost effects.

    Rejected routes simply drop out of the image.
    """
    enc = s.enc
    gwrites = _ghost_writes(enc, ghosts, e, direction)
    remaining = s
    parts: list[TransferPart] = []
    result = SymbolicRouteSet.empty(enc)
    for idx, term in enumerate(m.terms):
        if remaining.is_empty():
            break
        mset = term_match_set(enc, term)
        hit = remaining.intersect(mset)
        remaining = remaining.difference(mset)
        if hit.is_empty() or term.action == model.DENY:
            continue
        writes, prepends = _action_effects(enc, term)
        all_writes = dict(writes)
        all_writes.update(gwrites)
        img = hit.apply_write(all_writes)
        for sym in prepends:
            img = img.prepend(sym)
        parts.append(
            TransferPart(
                term_index=idx,
                pre=hit,
                post=img,
                writes=all_writes,
                strip_prefix=tuple(reversed(prepends)),
            )
        )
        result = result.union(img)
    return TransferResult(result=result, parts=tuple(parts))


def preimage_witness(part: TransferPart, post: Witness) -> Witness:
    """Deterministic pre-image of a post-route under one transfer slice."""
    enc = part.pre.enc
    mgr = enc.mgr
    post_word = enc.abstract_path(post.route.as_path)
    k = len(part.strip_prefix)
    assert post_word[:k] == part.strip_prefix, "post witness does not carry the prepend prefix"
    pre_word = post_word[k:]
    state = 0
    for sym in pre_word:
        state = part.pre.trans[state][sym]
    label = part.pre.labels[state]
    post_vec = enc.project(post.route)
    passthrough = {
        bit: bool(post_vec[bit]) for bit in range(enc.n_bits) if bit not in part.writes
    }
    constrained = mgr.apply_and(label, mgr.cube(passthrough))
    vec = mgr.sat_min(constrained)
    assert vec is not None, "post witness has no pre-image in its transfer slice"
    return enc.decode(vec, pre_word)


# ---------------------------------------------------------------------------
# Attribute-only overflow transfer (used by the fixpoint oracle for routes
# whose paths exceed the tracked length bound; path matches are unknown there,
# so terms with path clauses contribute both match and fall-through branches).


def transfer_attrs_overflow(
    m: RouteMap,
    e: Edge,
    direction: str,
    ghosts: GhostSpec,
    attrs: int,
    enc: Encoding,
) -> int:
    mgr = enc.mgr
    gwrites = _ghost_writes(enc, ghosts, e, direction)
    fall = attrs
    out = FALSE
    for term in m.terms:
        if fall == FALSE:
            break
        attr_match, _, has_path = _term_parts(enc, term)
        hit = mgr.apply_and(fall, attr_match)
        if not has_path:
            fall = mgr.apply_diff(fall, attr_match)
        if term.action == model.DENY or hit == FALSE:
            continue
        writes, _ = _action_effects(enc, term)
        all_writes = dict(writes)
        all_writes.update(gwrites)
        out = mgr.apply_or(out, mgr.set_bits(hit, all_writes))
    return out
