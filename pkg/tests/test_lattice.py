import random

import numpy as np
import pytest

from conftest import diagrams_upto
from greechie.diagram import Diagram, cycle, parse_diagram, petersen
from greechie.lattice import (
    ATOM,
    COATOM,
    MIDDLE,
    Lattice,
    LatticeError,
    degree_invariant,
    distributivity_witness,
    node_name,
    paste,
    verify_lattice,
)
from test_diagram import relabel_random


@pytest.mark.parametrize(
    "text, n",
    [("123.", 8), ("123,345.", 12), ("123,345,567.", 16), ("12,34.", 6), ("12.", 4), ("1234,4567.", 28)],
)
def test_node_counts(text, n):
    assert paste(parse_diagram(text)).n == n


def test_decagon_node_counts():
    assert paste(cycle(10)).n == 42
    assert paste(cycle(10, block_size=4)).n == 122


def test_node_count_law_on_generated():
    for d in diagrams_upto(8):
        assert paste(d).n == 2 + 2 * d.alpha


def test_node_count_law_with_mixed_blocks():
    d = parse_diagram("1234,456,78.")
    l = paste(d)
    # two bounds, 8 atoms, 6 coatoms (atoms 7 and 8 complement each other), 6 middles
    assert l.n == 2 + 8 + 6 + 6
    assert verify_lattice(l).ok


def test_stats():
    assert paste(parse_diagram("123,345,567.")).stats == (7, 3, 16)


def test_kinds_and_ortho_pairs():
    l = paste(parse_diagram("1234."))
    kinds = [k[0] for k in l.kinds]
    assert kinds.count(ATOM) == 4 and kinds.count(COATOM) == 4 and kinds.count(MIDDLE) == 6
    for x in range(l.n):
        k = l.kinds[x]
        if k[0] == MIDDLE:
            other = l.kinds[l.ortho[x]]
            assert other[0] == MIDDLE and set(other[2]) | set(k[2]) == {0, 1, 2, 3}


def test_mo2_complements_are_atoms():
    l = paste(parse_diagram("12,34."))
    a, b, c, d = 1, 2, 3, 4
    assert l.ortho[a] == b and l.ortho[c] == d
    assert l.meet[a, c] == l.zero and l.join[a, c] == l.one


def test_names():
    l = paste(parse_diagram("123,345."))
    assert node_name(l, 0) == "0" and node_name(l, l.n - 1) == "1"
    assert [node_name(l, 1 + i) for i in range(5)] == list("abcde")
    assert l.kinds[6] == (COATOM, 0) and node_name(l, 6) == "f"
    mo2 = paste(parse_diagram("12,34."))
    assert [node_name(mo2, x) for x in range(6)] == ["0", "a", "b", "c", "d", "1"]
    big = paste(cycle(15))
    assert node_name(big, 53) == "N52"
    assert len(set(big.names)) == big.n


@pytest.mark.parametrize("d", [parse_diagram("123."), cycle(5), petersen(), cycle(6, block_size=4), parse_diagram("12,34.")])
def test_verify_passes(d):
    r = verify_lattice(paste(d))
    assert r.ok, r


def test_verify_reports_missing_bound():
    # 0 < p, q < r, s < 1: p and q have two minimal upper bounds
    leq = np.eye(6, dtype=bool)
    leq[0, :] = True
    leq[:, 5] = True
    for x in (1, 2):
        for y in (3, 4):
            leq[x, y] = True
    ortho = np.array([5, 4, 3, 2, 1, 0])
    dummy = np.zeros((6, 6), dtype=np.int64)
    l = Lattice(6, leq, dummy, dummy, ortho, list("0pqrs1"))
    r = verify_lattice(l)
    assert not r.ok
    assert r.failed == "join_exists"
    assert set(r.counterexample) == {1, 2}


def test_verify_detects_bad_ortho():
    l = paste(parse_diagram("123,345."))
    broken = Lattice(l.n, l.leq, l.join, l.meet, np.arange(l.n), l.names)
    r = verify_lattice(broken)
    assert not r.ok and r.failed == "ortho_antitone"


def test_verify_detects_non_orthomodular():
    # benzene ring O6: 0 < a < b' < 1, 0 < b < a' < 1
    leq = np.eye(6, dtype=bool)
    leq[0, :] = True
    leq[:, 5] = True
    a, b, a_, b_ = 1, 2, 3, 4
    leq[a, b_] = leq[b, a_] = True
    ortho = np.array([5, a_, b_, a, b, 0])
    from greechie.lattice import least_bounds

    join, _ = least_bounds(leq, True)
    meet, _ = least_bounds(leq, False)
    r = verify_lattice(Lattice(6, leq, join, meet, ortho, list("0ab341")))
    assert not r.ok and r.failed == "orthomodular"


def test_paste_rejects_bad_input():
    with pytest.raises(LatticeError):
        paste(parse_diagram("12345."))
    with pytest.raises(LatticeError) as e:
        paste(parse_diagram("123,345,567,781."))
    assert e.value.witness is not None
    with pytest.raises(LatticeError):
        paste(Diagram(4, ((0, 1), (1, 2, 3))))
    with pytest.raises(LatticeError):
        paste(Diagram(1, ((0,),)))


def test_de_morgan_and_orthomodular_on_generated():
    for d in diagrams_upto(6):
        l = paste(d)
        O = l.ortho
        assert np.array_equal(O[l.join], l.meet[O[:, None], O[None, :]])
        assert verify_lattice(l).ok


def test_mo2_not_distributive():
    l = paste(parse_diagram("12,34."))
    w = distributivity_witness(l)
    assert w is not None
    x, y, z = w
    assert l.meet[x, l.join[y, z]] != l.join[l.meet[x, y], l.meet[x, z]]
    assert distributivity_witness(paste(parse_diagram("123."))) is None


def test_paste_equivariant():
    rng = random.Random(5)
    for d in diagrams_upto(6):
        t = relabel_random(d, rng)
        assert degree_invariant(paste(d)) == degree_invariant(paste(t))


def test_compound_tables_cached():
    l = paste(parse_diagram("123,345."))
    assert l.table("impl1") is l.table("impl1")
    # a ->1 1 = 1 for every a
    assert (l.table("impl1")[:, l.one] == l.one).all()


def test_dump_lists_every_node():
    l = paste(parse_diagram("12,34."))
    text = l.dump()
    assert text.splitlines()[0] == "nodes 6: 0 a b c d 1"
    assert "a' = b" in text
