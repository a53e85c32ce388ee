import itertools
import re

import pytest

from bgpverify import dfa
from bgpverify.dfa import Dfa, RegexError, compile_regex, regex_matches_path


def abc_index():
    # three-symbol alphabet: 65001 -> 0, 65002 -> 1, OTHER -> 2
    return {65001: 0, 65002: 1}


def compile3(regex):
    return compile_regex(regex, abc_index(), 3)


def words_upto(n_symbols, max_len):
    for length in range(max_len + 1):
        yield from itertools.product(range(n_symbols), repeat=length)


def re_oracle(token_regex):
    """Translate a token regex to a Python re over single characters."""
    mapping = {"65001": "a", "65002": "b"}
    out = []
    for tok in dfa.tokenize_regex(token_regex):
        if isinstance(tok, int):
            out.append(mapping[str(tok)])
        elif tok in "^$":
            pass
        else:
            out.append(tok)
    return re.compile("".join(out) + "$")


CHARS = "abc"


@pytest.mark.parametrize(
    "regex",
    ["^65001$", "^65001 .*$", "^.* 65002$", "^(65001|65002)+$", "^. .$", "^$", "^65001? 65002*$"],
)
def test_regex_to_dfa_against_re_module(regex):
    d = compile3(regex)
    oracle = re_oracle(regex)
    for word in words_upto(3, 4):
        text = "".join(CHARS[s] for s in word)
        assert d.accepts(word) == bool(oracle.match(text)), (regex, word)


def test_singleton_dfa():
    d = compile3("^65001$")
    assert d.accepts((0,))
    assert not d.accepts(())
    assert not d.accepts((0, 0))
    assert not d.accepts((1,))


def test_mandatory_anchors_and_parse_errors():
    with pytest.raises(RegexError):
        compile3("65001")
    with pytest.raises(RegexError):
        compile3("^65001")
    with pytest.raises(RegexError):
        compile3("^(65001$")
    with pytest.raises(RegexError):
        compile3("^65001 ^ $")
    with pytest.raises(RegexError):
        compile3("^x$")


def test_intersection_derived_example():
    # enumerate all strings to length 3 over the 3-symbol alphabet and
    # compare against the two constraints applied independently
    a = compile3("^65001 .*$")
    b = compile3("^.* 65002$")
    both = a.intersect(b)
    expected = {w for w in words_upto(3, 3) if a.accepts(w) and b.accepts(w)}
    got = {w for w in words_upto(3, 3) if both.accepts(w)}
    assert got == expected
    assert both.accepts((0, 1))  # [65001, 65002]


def test_prepend_language():
    universal = dfa.universal(3)
    p = universal.prepend(0)
    assert p.accepts((0,))
    assert p.accepts((0, 2, 1))
    assert not p.accepts(())
    assert not p.accepts((1, 0))
    # by definition: prepend(a, L) = { a.w | w in L }
    base = compile3("^65002$")
    pre = base.prepend(0)
    for w in words_upto(3, 3):
        assert pre.accepts(w) == (len(w) >= 1 and w[0] == 0 and base.accepts(w[1:]))


def test_canonicity_same_language_same_structure():
    a = compile3("^(65001|65002) .*$")
    b = compile3("^65001 .*$").union(compile3("^65002 .*$"))
    assert a == b
    c = compile3("^. .*$").intersect(compile3("^(65001|65002) .*$"))
    assert c == a


def test_complement_and_emptiness():
    d = compile3("^.*$")
    assert d.is_universal()
    assert d.complement().is_empty()
    e = compile3("^65001$").intersect(compile3("^65002$"))
    assert e.is_empty()


def test_shortest_member_lexicographic():
    d = compile3("^(65002|65001) .*$")
    # shortest accepted words have length 1; symbol 0 (65001) is least
    assert d.shortest_member() == (0,)
    assert dfa.empty(3).shortest_member() is None
    assert dfa.universal(3).shortest_member() == ()


def test_length_machines():
    le2 = dfa.length_at_most(2, 3)
    gt2 = dfa.length_greater(2, 3)
    for w in words_upto(3, 4):
        assert le2.accepts(w) == (len(w) <= 2)
        assert gt2.accepts(w) == (len(w) > 2)


def test_enumerate_words_order():
    d = compile3("^65001 .*$")
    words = list(d.enumerate_words(2))
    assert words == [(0,), (0, 0), (0, 1), (0, 2)]


def test_concrete_path_matching_alphabet_independence():
    # matching is stable no matter what other ASNs exist in the network
    assert regex_matches_path("^65001 .*$", (65001, 123456))
    assert not regex_matches_path("^65001 .*$", (123456, 65001))
    assert regex_matches_path("^.* 65002$", (7, 8, 65002))
    assert regex_matches_path("^$", ())
    assert not regex_matches_path("^$", (65001,))
