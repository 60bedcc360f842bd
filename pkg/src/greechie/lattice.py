"""Pasting a Greechie diagram into its finite orthomodular lattice.

Each block contributes the Boolean algebra of its atom subsets; shared atoms,
0, 1 and each atom's orthocomplement are identified across blocks.  Nodes are
numbered ``0`` (bottom), then atoms in diagram order, coatoms in atom order,
the two-atom "middle" elements of 4-atom blocks, and finally ``1`` (top).
The order is stored as a dense boolean matrix; join, meet and orthocomplement
as dense node tables.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .diagram import Diagram, validate

ZERO = "zero"
ONE = "one"
ATOM = "atom"
COATOM = "coatom"
MIDDLE = "middle"

MAX_BLOCK = 4
_LETTERS = string.ascii_lowercase + string.ascii_uppercase


class LatticeError(ValueError):
    """Pasting failed; ``witness`` names the offending nodes or blocks."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def node_label(k: int) -> str:
    """Display name of the k-th non-bound node: a..z, A..Z, then N52, N53, ..."""
    if k < len(_LETTERS):
        return _LETTERS[k]
    return f"N{k}"


@dataclass
class Lattice:
    n: int
    leq: np.ndarray  # leq[x, y] iff x <= y
    join: np.ndarray
    meet: np.ndarray
    ortho: np.ndarray
    names: list
    kinds: list = field(default_factory=list)
    alpha: int = 0
    beta: int = 0
    _tables: dict = field(default_factory=dict, repr=False)

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return self.n - 1

    @property
    def stats(self) -> tuple:
        return self.alpha, self.beta, self.n

    def table(self, op: str) -> np.ndarray:
        """Dense n x n table for a binary operation, built on first use."""
        t = self._tables.get(op)
        if t is None:
            t = _compound_table(self, op)
            self._tables[op] = t
        return t

    def dump(self) -> str:
        lines = [f"nodes {self.n}: " + " ".join(self.names)]
        for x in range(self.n):
            ups = [self.names[y] for y in range(self.n) if self.leq[x, y] and y != x]
            lines.append(f"{self.names[x]}' = {self.names[self.ortho[x]]}; {self.names[x]} < " + " ".join(ups))
        return "\n".join(lines)


def node_name(l: Lattice, node: int) -> str:
    return l.names[node]


def _compound_table(l: Lattice, op: str) -> np.ndarray:
    J, M, O = l.join, l.meet, l.ortho
    if op == "join":
        return J
    if op == "meet":
        return M
    a = np.arange(l.n)[:, None]
    b = np.arange(l.n)[None, :]
    a_, b_ = O[a], O[b]
    if op == "impl0":  # a' v b
        return J[a_, b]
    if op == "impl1":  # a' v (a ^ b)
        return J[a_, M[a, b]]
    if op == "impl2":  # b v (a' ^ b')
        return J[b, M[a_, b_]]
    if op == "impl3":  # (a' ^ b) v (a' ^ b') v (a ^ (a' v b))
        return J[J[M[a_, b], M[a_, b_]], M[a, J[a_, b]]]
    if op == "impl4":  # (a ^ b) v (a' ^ b) v ((a' v b) ^ b')
        return J[J[M[a, b], M[a_, b]], M[J[a_, b], b_]]
    if op == "impl5":  # (a ^ b) v (a' ^ b) v (a' ^ b')
        return J[J[M[a, b], M[a_, b]], M[a_, b_]]
    if op == "biimp":  # (a ^ b) v (a' ^ b')
        return J[M[a, b], M[a_, b_]]
    raise KeyError(op)


def _transitive_closure(leq: np.ndarray) -> np.ndarray:
    r = leq.copy()
    while True:
        nxt = (r.astype(np.int32) @ r.astype(np.int32)) > 0
        nxt |= r
        if np.array_equal(nxt, r):
            return r
        r = nxt


def least_bounds(leq: np.ndarray, upper: bool = True):
    """Least upper (or greatest lower) bound table from an order matrix.

    Returns (table, missing) where ``missing`` is the first (x, y) without a
    unique bound, or None.  The least element of the bound set U is the member
    whose own up-set is all of U.
    """
    rel = leq if upper else leq.T
    n = rel.shape[0]
    upcount = rel.sum(axis=1)
    table = np.full((n, n), -1, dtype=np.int64)
    missing = None
    for x in range(n):
        U = rel[x][None, :] & rel  # U[y, w]: w is a common bound of x and y
        size = U.sum(axis=1)
        score = np.where(U, upcount[None, :], -1)
        cand = score.argmax(axis=1)
        ok = (size > 0) & (upcount[cand] == size)
        table[x] = np.where(ok, cand, -1)
        if missing is None and not ok.all():
            missing = (x, int(np.flatnonzero(~ok)[0]))
    return table, missing


def paste(d: Diagram) -> Lattice:
    """Build the orthomodular lattice of a Greechie diagram (blocks of 2-4 atoms)."""
    for i, b in enumerate(d.blocks):
        if not 2 <= len(b) <= MAX_BLOCK:
            raise LatticeError(f"block {i} has {len(b)} atoms; supported sizes are 2..{MAX_BLOCK}", i)
    report = validate(d, require_lattice=True)
    if not report.ok:
        bad = report.failures()[0]
        raise LatticeError(f"diagram fails condition {bad}", report.witnesses.get(bad))

    alpha = d.atom_count
    inc = d.atom_blocks()
    for i, b in enumerate(d.blocks):
        if len(b) == 2 and any(len(inc[a]) > 1 for a in b):
            raise LatticeError(f"2-atom block {i} shares an atom with another block", i)
    kinds = [(ZERO,)]
    kinds += [(ATOM, a) for a in range(alpha)]
    atom_node = {a: 1 + a for a in range(alpha)}
    coatom_node = {}
    for a in range(alpha):
        if any(len(d.blocks[i]) >= 3 for i in inc[a]):
            coatom_node[a] = len(kinds)
            kinds.append((COATOM, a))
    middle_node = {}
    for i, b in enumerate(d.blocks):
        if len(b) == 4:
            for s in itertools.combinations(b, 2):
                middle_node[(i, s)] = len(kinds)
                kinds.append((MIDDLE, i, s))
    kinds.append((ONE,))
    n = len(kinds)
    top = n - 1

    leq = np.eye(n, dtype=bool)
    leq[0, :] = True
    leq[:, top] = True
    for b in d.blocks:
        for x, y in itertools.permutations(b, 2):
            if y in coatom_node:
                leq[atom_node[x], coatom_node[y]] = True
    for (i, s), v in middle_node.items():
        b = d.blocks[i]
        rest = [a for a in b if a not in s]
        for a in s:
            leq[atom_node[a], v] = True
        for a in rest:
            leq[v, coatom_node[a]] = True
    leq = _transitive_closure(leq)
    both = leq & leq.T
    np.fill_diagonal(both, False)
    if both.any():
        x, y = map(int, np.argwhere(both)[0])
        raise LatticeError("order is not antisymmetric", (x, y))

    ortho = np.arange(n)
    ortho[0], ortho[top] = top, 0
    for a in range(alpha):
        if a in coatom_node:
            ortho[atom_node[a]] = coatom_node[a]
            ortho[coatom_node[a]] = atom_node[a]
        else:
            (i,) = inc[a]
            (other,) = [x for x in d.blocks[i] if x != a]
            ortho[atom_node[a]] = atom_node[other]
    for (i, s), v in middle_node.items():
        comp = tuple(a for a in d.blocks[i] if a not in s)
        ortho[v] = middle_node[(i, comp)]

    join, missing = least_bounds(leq, upper=True)
    if missing is not None:
        raise LatticeError("no unique least upper bound", missing)
    meet, missing = least_bounds(leq, upper=False)
    if missing is not None:
        raise LatticeError("no unique greatest lower bound", missing)

    names = ["0"] + [node_label(k) for k in range(n - 2)] + ["1"]
    return Lattice(n, leq, join, meet, ortho, names, kinds, alpha, d.beta)


@dataclass
class LatticeReport:
    checks: dict
    counterexample: Optional[tuple] = None
    failed: Optional[str] = None

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def verify_lattice(l: Lattice) -> LatticeReport:
    """Check order axioms, bounds, orthocomplement laws and orthomodularity.

    Stops at the first failing check and records a counterexample.
    """
    n = l.n
    L = np.asarray(l.leq, dtype=bool)
    J = np.asarray(l.join)
    M = np.asarray(l.meet)
    O = np.asarray(l.ortho)
    checks = {}
    report = LatticeReport(checks)

    def fail(name, where):
        checks[name] = False
        report.failed = name
        report.counterexample = tuple(int(v) for v in where)
        return report

    idx = np.arange(n)
    if not L[idx, idx].all():
        return fail("reflexive", (int(np.flatnonzero(~L[idx, idx])[0]),))
    checks["reflexive"] = True
    anti = L & L.T
    anti[idx, idx] = False
    if anti.any():
        return fail("antisymmetric", np.argwhere(anti)[0])
    checks["antisymmetric"] = True
    closure = (L.astype(np.int32) @ L.astype(np.int32)) > 0
    if (closure & ~L).any():
        return fail("transitive", np.argwhere(closure & ~L)[0])
    checks["transitive"] = True

    for name, tab, upper in (("join", J, True), ("meet", M, False)):
        ref, missing = least_bounds(L, upper)
        if missing is not None:
            return fail(f"{name}_exists", missing)
        bad = ref != tab
        if bad.any():
            return fail(f"{name}_table", np.argwhere(bad)[0])
        checks[f"{name}_exists"] = True
        checks[f"{name}_table"] = True

    bottom = np.flatnonzero(L.all(axis=1))
    topn = np.flatnonzero(L.all(axis=0))
    if len(bottom) != 1 or len(topn) != 1:
        return fail("bounded", ())
    checks["bounded"] = True
    z, t = int(bottom[0]), int(topn[0])
    if (O[O] != idx).any():
        return fail("ortho_involution", (int(np.flatnonzero(O[O] != idx)[0]),))
    checks["ortho_involution"] = True
    xs, ys = np.nonzero(L)
    anti_ok = L[O[ys], O[xs]]
    if not anti_ok.all():
        k = int(np.flatnonzero(~anti_ok)[0])
        return fail("ortho_antitone", (xs[k], ys[k]))
    checks["ortho_antitone"] = True
    if (M[idx, O] != z).any():
        return fail("ortho_meet_zero", (int(np.flatnonzero(M[idx, O] != z)[0]),))
    if (J[idx, O] != t).any():
        return fail("ortho_join_one", (int(np.flatnonzero(J[idx, O] != t)[0]),))
    checks["ortho_meet_zero"] = True
    checks["ortho_join_one"] = True
    # a <= b  implies  a v (a' ^ b) = b
    om = J[xs, M[O[xs], ys]] == ys
    if not om.all():
        k = int(np.flatnonzero(~om)[0])
        return fail("orthomodular", (xs[k], ys[k]))
    checks["orthomodular"] = True
    return report


def distributivity_witness(l: Lattice) -> Optional[tuple]:
    """First (x, y, z) with x ^ (y v z) != (x ^ y) v (x ^ z), or None."""
    J, M = l.join, l.meet
    n = l.n
    for x in range(n):
        lhs = M[x][J]  # lhs[y, z] = x ^ (y v z)
        rhs = J[M[x][:, None], M[x][None, :]]
        bad = lhs != rhs
        if bad.any():
            y, z = np.argwhere(bad)[0]
            return x, int(y), int(z)
    return None


def degree_invariant(l: Lattice) -> tuple:
    """Relabelling-invariant summary: node count and sorted (down, up) degrees."""
    down = l.leq.sum(axis=0)
    up = l.leq.sum(axis=1)
    return l.n, tuple(sorted(zip(down.tolist(), up.tolist())))
