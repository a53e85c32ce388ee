"""Reduced ordered binary decision diagrams, one manager per bit layout.

Nodes are integers indexing parallel arrays; 0 and 1 are the terminals.
The manager hash-conses nodes, so structural equality of node ids is
semantic equality of functions.  Construction is guarded by a lock on
unique-table misses, which keeps concurrent use linearizable; the operation
caches are idempotent so races there are harmless.
"""

from __future__ import annotations

import threading
from typing import Iterable, Iterator, Mapping, Optional, Sequence

FALSE = 0
TRUE = 1


class BddManager:
    def __init__(self, n_vars: int):
        self.n_vars = n_vars
        leaf = n_vars  # sentinel level below every variable
        self._var = [leaf, leaf]
        self._lo = [0, 1]
        self._hi = [0, 1]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._and_cache: dict[tuple[int, int], int] = {}
        self._or_cache: dict[tuple[int, int], int] = {}
        self._not_cache: dict[int, int] = {}
        self._lock = threading.Lock()

    # -- construction -------------------------------------------------------

    def _node(self, var: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (var, lo, hi)
        n = self._unique.get(key)
        if n is None:
            with self._lock:
                n = self._unique.get(key)
                if n is None:
                    n = len(self._var)
                    self._var.append(var)
                    self._lo.append(lo)
                    self._hi.append(hi)
                    self._unique[key] = n
        return n

    def literal(self, var: int, value: bool = True) -> int:
        return self._node(var, FALSE, TRUE) if value else self._node(var, TRUE, FALSE)

    def cube(self, assignment: Mapping[int, bool]) -> int:
        r = TRUE
        for var, val in sorted(assignment.items(), reverse=True):
            r = self._node(var, FALSE, r) if val else self._node(var, r, FALSE)
        return r

    def from_vectors(self, vectors: Sequence[Sequence[int]]) -> int:
        """OR of full-assignment cubes, built as a shared trie."""
        if not vectors:
            return FALSE

        def build(pos: int, vecs: list) -> int:
            if pos == self.n_vars:
                return TRUE
            zeros = [v for v in vecs if not v[pos]]
            ones = [v for v in vecs if v[pos]]
            lo = build(pos + 1, zeros) if zeros else FALSE
            hi = build(pos + 1, ones) if ones else FALSE
            return self._node(pos, lo, hi)

        return build(0, list(dict.fromkeys(tuple(v) for v in vectors)))

    # -- boolean operations --------------------------------------------------

    def apply_and(self, a: int, b: int) -> int:
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE or a == b:
            return a
        key = (a, b) if a < b else (b, a)
        r = self._and_cache.get(key)
        if r is None:
            va, vb = self._var[a], self._var[b]
            v = min(va, vb)
            a0, a1 = (self._lo[a], self._hi[a]) if va == v else (a, a)
            b0, b1 = (self._lo[b], self._hi[b]) if vb == v else (b, b)
            r = self._node(v, self.apply_and(a0, b0), self.apply_and(a1, b1))
            self._and_cache[key] = r
        return r

    def apply_or(self, a: int, b: int) -> int:
        if a == TRUE or b == TRUE:
            return TRUE
        if a == FALSE:
            return b
        if b == FALSE or a == b:
            return a
        key = (a, b) if a < b else (b, a)
        r = self._or_cache.get(key)
        if r is None:
            va, vb = self._var[a], self._var[b]
            v = min(va, vb)
            a0, a1 = (self._lo[a], self._hi[a]) if va == v else (a, a)
            b0, b1 = (self._lo[b], self._hi[b]) if vb == v else (b, b)
            r = self._node(v, self.apply_or(a0, b0), self.apply_or(a1, b1))
            self._or_cache[key] = r
        return r

    def apply_not(self, a: int) -> int:
        if a == FALSE:
            return TRUE
        if a == TRUE:
            return FALSE
        r = self._not_cache.get(a)
        if r is None:
            r = self._node(self._var[a], self.apply_not(self._lo[a]), self.apply_not(self._hi[a]))
            self._not_cache[a] = r
        return r

    def apply_diff(self, a: int, b: int) -> int:
        return self.apply_and(a, self.apply_not(b))

    def apply_implies(self, a: int, b: int) -> int:
        return self.apply_or(self.apply_not(a), b)

    def or_all(self, nodes: Iterable[int]) -> int:
        r = FALSE
        for n in nodes:
            r = self.apply_or(r, n)
        return r

    def and_all(self, nodes: Iterable[int]) -> int:
        r = TRUE
        for n in nodes:
            r = self.apply_and(r, n)
        return r

    # -- quantification and substitution -------------------------------------

    def exists(self, a: int, variables: Sequence[int]) -> int:
        vset = frozenset(variables)
        if not vset or a <= TRUE:
            return a
        memo: dict[int, int] = {}

        def rec(n: int) -> int:
            if n <= TRUE:
                return n
            r = memo.get(n)
            if r is not None:
                return r
            v = self._var[n]
            lo, hi = rec(self._lo[n]), rec(self._hi[n])
            r = self.apply_or(lo, hi) if v in vset else self._node(v, lo, hi)
            memo[n] = r
            return r

        return rec(a)

    def set_bits(self, a: int, writes: Mapping[int, bool]) -> int:
        """Image of overwriting the given variables with constants."""
        if not writes:
            return a
        return self.apply_and(self.exists(a, list(writes)), self.cube(writes))

    # -- evaluation / witnesses ----------------------------------------------

    def eval(self, a: int, vector: Sequence[int]) -> bool:
        n = a
        while n > TRUE:
            n = self._hi[n] if vector[self._var[n]] else self._lo[n]
        return n == TRUE

    def sat_min(self, a: int) -> Optional[tuple[int, ...]]:
        """Lexicographically least satisfying assignment (0 preferred), or None."""
        if a == FALSE:
            return None
        bits = [0] * self.n_vars
        n = a
        while n > TRUE:
            if self._lo[n] != FALSE:
                n = self._lo[n]
            else:
                bits[self._var[n]] = 1
                n = self._hi[n]
        return tuple(bits)

    def iter_sats(self, a: int, limit: Optional[int] = None) -> Iterator[tuple[int, ...]]:
        """All satisfying full assignments; raises if more than ``limit``."""
        count = 0

        def rec(n: int, pos: int, prefix: list[int]) -> Iterator[tuple[int, ...]]:
            nonlocal count
            if n == FALSE:
                return
            var = self._var[n] if n > TRUE else self.n_vars
            if pos < var:
                for b in (0, 1):
                    yield from rec(n, pos + 1, prefix + [b])
                return
            if n == TRUE:
                count += 1
                if limit is not None and count > limit:
                    raise RuntimeError("iter_sats limit exceeded")
                yield tuple(prefix)
                return
            yield from rec(self._lo[n], pos + 1, prefix + [0])
            yield from rec(self._hi[n], pos + 1, prefix + [1])

        yield from rec(a, 0, [])

    def sat_count(self, a: int) -> int:
        """Number of satisfying full assignments over all n_vars variables."""
        memo: dict[int, int] = {FALSE: 0, TRUE: 1}
        var = self._var

        def rec(n: int) -> int:
            r = memo.get(n)
            if r is None:
                lo, hi = self._lo[n], self._hi[n]
                r = (rec(lo) << (var[lo] - var[n] - 1)) + (rec(hi) << (var[hi] - var[n] - 1))
                memo[n] = r
            return r

        return rec(a) << var[a]

    def count_nodes(self, roots: Iterable[int]) -> int:
        seen: set[int] = set()
        stack = [r for r in roots if r > TRUE]
        while stack:
            n = stack.pop()
            if n in seen or n <= TRUE:
                continue
            seen.add(n)
            stack.append(self._lo[n])
            stack.append(self._hi[n])
        return len(seen)

    # -- comparator circuits (unsigned, MSB-first variable lists) ------------

    def eq_const(self, variables: Sequence[int], value: int) -> int:
        width = len(variables)
        return self.cube({v: bool((value >> (width - 1 - i)) & 1) for i, v in enumerate(variables)})

    def le_const(self, variables: Sequence[int], value: int) -> int:
        r = TRUE
        width = len(variables)
        for i in range(width - 1, -1, -1):
            v = variables[i]
            bit = (value >> (width - 1 - i)) & 1
            r = self._node(v, TRUE, r) if bit else self._node(v, r, FALSE)
        return r

    def ge_const(self, variables: Sequence[int], value: int) -> int:
        r = TRUE
        width = len(variables)
        for i in range(width - 1, -1, -1):
            v = variables[i]
            bit = (value >> (width - 1 - i)) & 1
            r = self._node(v, FALSE, r) if bit else self._node(v, r, TRUE)
        return r

    def cmp_const(self, op: str, variables: Sequence[int], value: int) -> int:
        if op == "==":
            return self.eq_const(variables, value)
        if op == "!=":
            return self.apply_not(self.eq_const(variables, value))
        if op == "<=":
            return self.le_const(variables, value)
        if op == ">=":
            return self.ge_const(variables, value)
        if op == "<":
            return self.apply_not(self.ge_const(variables, value))
        if op == ">":
            return self.apply_not(self.le_const(variables, value))
        raise ValueError(f"unknown comparison operator {op!r}")
