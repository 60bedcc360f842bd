"""Greechie diagrams: atoms, blocks, validity, loops, feet and the text format.

A diagram is stored as an atom count plus an ordered tuple of blocks, each
block a strictly increasing tuple of atom indices.  The text format writes one
diagram per line, blocks separated by commas and terminated by a period, using
the 61-symbol alphabet ``1-9A-Za-z`` for atoms::

    123,345,567.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

ALPHABET = "123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"
_SYMBOL_INDEX = {c: i for i, c in enumerate(ALPHABET)}


class DiagramError(ValueError):
    """Raised when a diagram violates the structural invariants."""


class DiagramParseError(DiagramError):
    """Raised for malformed diagram text; ``pos`` is the 0-based column."""

    def __init__(self, message: str, pos: int, line: str = ""):
        super().__init__(f"{message} at column {pos + 1}")
        self.pos = pos
        self.line = line


class UnknownSymbolError(DiagramParseError):
    pass


class EmptyBlockError(DiagramParseError):
    pass


class MissingTerminatorError(DiagramParseError):
    pass


class DuplicateAtomError(DiagramParseError):
    pass


class LoopPreconditionError(DiagramError):
    """Two blocks share more than one atom, so loop order is ill-posed."""


@dataclass(frozen=True)
class Diagram:
    atom_count: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if self.atom_count < 0:
            raise DiagramError("negative atom count")
        seen = set()
        for i, b in enumerate(blocks):
            if any(not 0 <= a < self.atom_count for a in b):
                raise DiagramError(f"block {i} has an atom outside [0, {self.atom_count})")
            if any(b[k] >= b[k + 1] for k in range(len(b) - 1)):
                raise DiagramError(f"block {i} is not strictly increasing")
            key = frozenset(b)
            if key in seen:
                raise DiagramError(f"block {i} repeats an earlier block")
            seen.add(key)

    @classmethod
    def trusted(cls, atom_count: int, blocks: tuple) -> "Diagram":
        """Construct without validation; for callers that build valid blocks."""
        d = object.__new__(cls)
        object.__setattr__(d, "atom_count", atom_count)
        object.__setattr__(d, "blocks", blocks)
        return d

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], atom_count: Optional[int] = None) -> "Diagram":
        """Build a diagram from arbitrary atom ids; blocks are sorted internally."""
        bs = tuple(tuple(sorted(b)) for b in blocks)
        if atom_count is None:
            atom_count = 1 + max((a for b in bs for a in b), default=-1)
        return cls(atom_count, bs)

    @property
    def alpha(self) -> int:
        return self.atom_count

    @property
    def beta(self) -> int:
        return len(self.blocks)

    def ranks(self) -> list:
        r = [0] * self.atom_count
        for b in self.blocks:
            for a in b:
                r[a] += 1
        return r

    def atom_blocks(self) -> list:
        """For each atom, the indices of the blocks containing it."""
        inc = [[] for _ in range(self.atom_count)]
        for i, b in enumerate(self.blocks):
            for a in b:
                inc[a].append(i)
        return inc

    def relabel(self, perm: Sequence[int]) -> "Diagram":
        """Apply the atom map ``a -> perm[a]``; block order is preserved."""
        return Diagram(self.atom_count, tuple(tuple(sorted(perm[a] for a in b)) for b in self.blocks))

    def add_block(self, block: Iterable[int]) -> "Diagram":
        b = tuple(sorted(block))
        n = max(self.atom_count, b[-1] + 1 if b else 0)
        return Diagram(n, self.blocks + (b,))

    def remove_block(self, index: int) -> "Diagram":
        """D - e: drop the block and any atoms left in no block, renumbering the rest."""
        rest = self.blocks[:index] + self.blocks[index + 1:]
        used = sorted({a for b in rest for a in b})
        renum = {a: i for i, a in enumerate(used)}
        return Diagram(len(used), tuple(tuple(renum[a] for a in b) for b in rest))

    def __str__(self) -> str:
        return format_diagram(self)


@dataclass
class DiagramStats:
    alpha: int
    beta: int
    rank_histogram: dict
    connected: bool
    feet: list = field(default_factory=list)


@dataclass
class ValidityReport:
    """Per-condition outcome of the Greechie conditions plus the lattice condition.

    ``checks`` maps a condition name to True/False; ``witnesses`` holds the
    first offending atoms/blocks for each failing condition.
    """

    checks: dict
    witnesses: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list:
        return [k for k, v in self.checks.items() if not v]


CONDITIONS = (
    "atoms_covered",
    "blocks_min_size",
    "intersecting_blocks_min_size",
    "pairwise_intersection",
    "no_loop_3",
)


def validate(d: Diagram, require_lattice: bool = True) -> ValidityReport:
    checks = {}
    wit = {}
    ranks = d.ranks()

    uncovered = [a for a, r in enumerate(ranks) if r == 0]
    checks["atoms_covered"] = d.beta > 0 and not uncovered
    if not checks["atoms_covered"]:
        wit["atoms_covered"] = uncovered[:1] if uncovered else "no blocks"

    small = [i for i, b in enumerate(d.blocks) if len(b) < 2]
    checks["blocks_min_size"] = not (d.atom_count >= 2 and small)
    if not checks["blocks_min_size"]:
        wit["blocks_min_size"] = small[0]

    pair_fail = None
    narrow = None
    for i, j in itertools.combinations(range(d.beta), 2):
        common = set(d.blocks[i]) & set(d.blocks[j])
        if not common:
            continue
        if narrow is None and (len(d.blocks[i]) < 3 or len(d.blocks[j]) < 3):
            narrow = (i, j)
        if pair_fail is None and len(common) > 1:
            pair_fail = (i, j, tuple(sorted(common)))
    checks["intersecting_blocks_min_size"] = narrow is None
    if narrow is not None:
        wit["intersecting_blocks_min_size"] = narrow
    checks["pairwise_intersection"] = pair_fail is None
    if pair_fail is not None:
        wit["pairwise_intersection"] = pair_fail

    if pair_fail is None:
        loop3 = find_loop(d, 3)
        checks["no_loop_3"] = loop3 is None
        if loop3 is not None:
            wit["no_loop_3"] = loop3
        if require_lattice:
            loop4 = find_loop(d, 4)
            checks["no_loop_4"] = loop4 is None
            if loop4 is not None:
                wit["no_loop_4"] = loop4
    else:
        # loop order is ill-posed once two blocks share two atoms
        checks["no_loop_3"] = False
        wit["no_loop_3"] = "undefined: blocks share more than one atom"
        if require_lattice:
            checks["no_loop_4"] = False
            wit["no_loop_4"] = wit["no_loop_3"]
    return ValidityReport(checks, wit)


def is_greechie(d: Diagram, require_lattice: bool = True) -> bool:
    return validate(d, require_lattice).ok


def _check_loop_precondition(d: Diagram) -> None:
    inc = d.atom_blocks()
    shared = {}
    for a, bs in enumerate(inc):
        for i, j in itertools.combinations(bs, 2):
            if (i, j) in shared:
                raise LoopPreconditionError(f"blocks {i} and {j} share atoms {shared[(i, j)]} and {a}")
            shared[(i, j)] = a


def find_loop(d: Diagram, order: int) -> Optional[tuple]:
    """Return one loop of exactly ``order`` blocks as (blocks, atoms), or None.

    ``blocks`` is the cyclic block sequence and ``atoms[i]`` lies in
    ``blocks[i]`` and ``blocks[i+1]``.  Only minimal representatives are
    searched: the loop starts at its smallest block index.
    """
    _check_loop_precondition(d)
    inc = d.atom_blocks()
    nb = d.beta
    # neighbors[b] = list of (atom, other block)
    neighbors = [[] for _ in range(nb)]
    for a, bs in enumerate(inc):
        for i in bs:
            for j in bs:
                if i != j:
                    neighbors[i].append((a, j))

    def dfs(path, atoms):
        cur = path[-1]
        if len(path) == order:
            for a, j in neighbors[cur]:
                if j == path[0] and a not in atoms:
                    return path, atoms + [a]
            return None
        for a, j in neighbors[cur]:
            if j > path[0] and j not in path and a not in atoms:
                found = dfs(path + [j], atoms + [a])
                if found:
                    return found
        return None

    for start in range(nb):
        found = dfs([start], [])
        if found:
            return tuple(found[0]), tuple(found[1])
    return None


def smallest_loop_order(d: Diagram, cap: int) -> Optional[int]:
    for n in range(2, cap + 1):
        if find_loop(d, n) is not None:
            return n
    return None


def is_connected(d: Diagram) -> bool:
    if d.atom_count == 0:
        return False
    if d.beta == 0:
        return d.atom_count == 1
    inc = d.atom_blocks()
    if any(not bs for bs in inc):
        return False
    seen = {0}
    queue = deque([0])
    while queue:
        b = queue.popleft()
        for a in d.blocks[b]:
            for j in inc[a]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
    return len(seen) == d.beta


def feet(d: Diagram) -> list:
    ranks = d.ranks()
    return [i for i, b in enumerate(d.blocks) if sum(1 for a in b if ranks[a] >= 2) == 1]


def stats(d: Diagram) -> DiagramStats:
    hist = {}
    for r in d.ranks():
        hist[r] = hist.get(r, 0) + 1
    return DiagramStats(d.alpha, d.beta, hist, is_connected(d), feet(d))


def atom_distances(d: Diagram, cap: int = 4) -> list:
    """Atom-graph distances (atoms adjacent when they share a block), capped at ``cap``."""
    inc = d.atom_blocks()
    n = d.atom_count
    dist = [[cap] * n for _ in range(n)]
    for s in range(n):
        row = dist[s]
        row[s] = 0
        frontier = [s]
        depth = 0
        while frontier and depth + 1 < cap:
            depth += 1
            nxt = []
            for a in frontier:
                for bi in inc[a]:
                    for c in d.blocks[bi]:
                        if row[c] > depth:
                            row[c] = depth
                            nxt.append(c)
            frontier = nxt
    return dist


def _iso_search(d1: Diagram, d2: Diagram, count_all: bool) -> int:
    """Backtracking atom bijection search; returns number of isomorphisms found
    (stopping at 1 unless ``count_all``)."""
    if d1.atom_count != d2.atom_count or d1.beta != d2.beta:
        return 0
    if sorted(len(b) for b in d1.blocks) != sorted(len(b) for b in d2.blocks):
        return 0
    r1, r2 = d1.ranks(), d2.ranks()
    if sorted(r1) != sorted(r2):
        return 0
    n = d1.atom_count
    inc1 = d1.atom_blocks()
    blocks2 = {frozenset(b) for b in d2.blocks}
    # sub-blocks of d2: every subset of a block, for partial-image pruning
    partial2 = set()
    for b in d2.blocks:
        for k in range(1, len(b) + 1):
            for s in itertools.combinations(b, k):
                partial2.add(frozenset(s))

    # order atoms so that each is adjacent to an earlier one where possible
    order = []
    placed = set()
    for start in sorted(range(n), key=lambda a: -r1[a]):
        if start in placed:
            continue
        queue = deque([start])
        placed.add(start)
        while queue:
            a = queue.popleft()
            order.append(a)
            for bi in inc1[a]:
                for c in d1.blocks[bi]:
                    if c not in placed:
                        placed.add(c)
                        queue.append(c)

    mapping = [-1] * n
    used = [False] * n
    count = 0

    def consistent(a):
        for bi in inc1[a]:
            img = [mapping[c] for c in d1.blocks[bi] if mapping[c] >= 0]
            fs = frozenset(img)
            if len(img) == len(d1.blocks[bi]):
                if fs not in blocks2:
                    return False
            elif fs not in partial2:
                return False
        return True

    def rec(k):
        nonlocal count
        if k == n:
            count += 1
            return not count_all
        a = order[k]
        for t in range(n):
            if used[t] or r2[t] != r1[a]:
                continue
            mapping[a] = t
            used[t] = True
            if consistent(a) and rec(k + 1):
                return True
            used[t] = False
            mapping[a] = -1
        return False

    rec(0)
    return count


def are_isomorphic(d1: Diagram, d2: Diagram) -> bool:
    return _iso_search(d1, d2, count_all=False) > 0


def count_automorphisms(d: Diagram) -> int:
    """Brute-force |Aut(D)|; intended for small diagrams."""
    return _iso_search(d, d, count_all=True)


# -- text format -------------------------------------------------------------


def parse_diagram(line: str) -> Diagram:
    """Parse one diagram line such as ``123,345.``.

    Atoms are numbered in order of first appearance.
    """
    text = line.rstrip("\r\n")
    ids = {}
    blocks = []
    cur = []
    pos = 0
    n = len(text)
    while pos < n and text[pos] in " \t":
        pos += 1
    while True:
        if pos >= n:
            raise MissingTerminatorError("missing '.' terminator", pos, text)
        c = text[pos]
        if c in ",.":
            if not cur:
                raise EmptyBlockError("empty block", pos, text)
            blocks.append(cur)
            cur = []
            pos += 1
            if c == ".":
                break
            continue
        if c not in _SYMBOL_INDEX:
            raise UnknownSymbolError(f"unknown atom symbol {c!r}", pos, text)
        if c not in ids:
            ids[c] = len(ids)
        a = ids[c]
        if a in cur:
            raise DuplicateAtomError(f"atom {c!r} repeated in block", pos, text)
        cur.append(a)
        pos += 1
    if text[pos:].strip():
        raise DiagramParseError("trailing characters after '.'", pos, text)
    return Diagram(len(ids), tuple(tuple(sorted(b)) for b in blocks))


def format_diagram(d: Diagram) -> str:
    if d.atom_count > len(ALPHABET):
        raise DiagramError(f"text format supports at most {len(ALPHABET)} atoms")
    return ",".join("".join(ALPHABET[a] for a in b) for b in d.blocks) + "."


def iter_diagram_lines(lines: Iterable[str]) -> Iterator[tuple]:
    """Yield (line number, stripped text) for non-blank, non-comment lines."""
    for no, raw in enumerate(lines, 1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        yield no, s


def read_diagrams(path) -> list:
    with open(path) as fh:
        return [parse_diagram(s) for _, s in iter_diagram_lines(fh)]


def write_diagrams(diagrams: Iterable[Diagram], fh) -> int:
    n = 0
    for d in diagrams:
        fh.write(format_diagram(d) + "\n")
        n += 1
    return n


# -- named constructions used across tests and docs --------------------------


def cycle(n: int, block_size: int = 3) -> Diagram:
    """An n-gon: n blocks, consecutive blocks sharing one corner atom."""
    blocks = []
    extra = block_size - 2
    nxt = n
    for i in range(n):
        b = [i, (i + 1) % n] + list(range(nxt, nxt + extra))
        nxt += extra
        blocks.append(b)
    return Diagram.from_blocks(blocks, nxt)


def chain(n: int) -> Diagram:
    """n 3-atom blocks in a row, each sharing an end atom with the next."""
    return Diagram.from_blocks([(2 * i, 2 * i + 1, 2 * i + 2) for i in range(n)])


def star(n: int) -> Diagram:
    """n 3-atom blocks through one common atom."""
    return Diagram.from_blocks([(0, 2 * i + 1, 2 * i + 2) for i in range(n)])


def petersen() -> Diagram:
    """Blocks are the Petersen graph's vertices, atoms its 15 edges."""
    edges = [(i, (i + 1) % 5) for i in range(5)]
    edges += [(i, i + 5) for i in range(5)]
    edges += [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    blocks = [[k for k, e in enumerate(edges) if v in e] for v in range(10)]
    return Diagram.from_blocks(blocks, 15)


def add_foot(d: Diagram, atom: int) -> Diagram:
    """Attach a new 3-atom block at ``atom`` using two fresh atoms."""
    n = d.atom_count
    return d.add_block((atom, n, n + 1))
