"""Isomorph-free generation of connected Greechie-3-L diagrams.

Generation follows canonical construction paths: from the single-block seed,
each accepted diagram is extended by one representative of every
Aut-equivalence class of new 3-atom blocks, and a child ``D+e`` is accepted
only if ``e`` belongs to the block orbit ``m(D+e)``.

``m(D)`` is the Aut(D)-orbit of the removable block that is least under the
key (not-a-foot, -rank sum, -second-neighbourhood rank sum, refined colour,
canonical label).  The first four components are isomorphism invariants that settle most
decisions without a canonical labelling; the canonical label breaks the
remaining ties.  Preferring feet makes every non-foot extension of a diagram
with feet fail the parent test, which is pruned before the test is run.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .canon import AutGroup, canonicalize, refined_block_colours, subset_orbit_reps
from .diagram import Diagram, atom_distances, feet, is_connected, validate


BLOCK_SIZE = 3
SPLIT_DEPTH = 6


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GenerationConfig:
    beta: int
    max_atoms: Optional[int] = None
    foot_free_only: bool = False
    part: Optional[tuple] = None  # (r, k): keep residue class r of k

    def __post_init__(self):
        if not isinstance(self.beta, int) or self.beta < 1:
            raise GenerationError("beta must be a positive integer")
        if self.max_atoms is not None and self.max_atoms < 0:
            raise GenerationError("max_atoms must be non-negative")
        if self.part is not None:
            r, k = self.part
            if k < 1 or not 0 <= r < k:
                raise GenerationError("part must satisfy 0 <= r < k")

    @property
    def split_depth(self) -> int:
        return min(SPLIT_DEPTH, self.beta)


@dataclass
class CountTable:
    cells: dict = field(default_factory=dict)  # (alpha, beta) -> [total, foot_free]

    def add(self, d: Diagram, foot_free: bool) -> None:
        cell = self.cells.setdefault((d.alpha, d.beta), [0, 0])
        cell[0] += 1
        if foot_free:
            cell[1] += 1

    def get(self, alpha: int, beta: int) -> tuple:
        return tuple(self.cells.get((alpha, beta), (0, 0)))

    def totals(self, beta: int) -> tuple:
        t = f = 0
        for (a, b), (x, y) in self.cells.items():
            if b == beta:
                t += x
                f += y
        return t, f

    def betas(self) -> list:
        return sorted({b for _, b in self.cells})

    def alphas(self) -> list:
        return sorted({a for a, _ in self.cells})


# -- parent function ---------------------------------------------------------


def _ranks(d: Diagram) -> list:
    r = [0] * d.atom_count
    for b in d.blocks:
        for a in b:
            r[a] += 1
    return r


def _removable(d: Diagram, inc: list, ranks: list, bi: int) -> bool:
    """True if D - block stays connected."""
    shared = [a for a in d.blocks[bi] if ranks[a] >= 2]
    if len(shared) <= 1:
        return True
    seen_atoms = {shared[0]}
    seen_blocks = {bi}
    queue = deque([shared[0]])
    targets = set(shared[1:])
    blocks = d.blocks
    while queue:
        a = queue.popleft()
        for j in inc[a]:
            if j in seen_blocks:
                continue
            seen_blocks.add(j)
            for c in blocks[j]:
                if c not in seen_atoms:
                    if c in targets:
                        targets.discard(c)
                        if not targets:
                            return True
                    seen_atoms.add(c)
                    queue.append(c)
    return False


def _second_key(d: Diagram, inc: list, s1: list, bi: int) -> int:
    return sum(s1[j] for a in d.blocks[bi] for j in inc[a])


def _min_invariant_blocks(d: Diagram, target: Optional[int] = None):
    """Removable blocks minimising the invariant part of the parent key.

    With ``target`` given, returns None as soon as ``target`` is known not to
    be in the minimising set (a cheap rejection).
    """
    ranks = _ranks(d)
    blocks = d.blocks
    inc = None
    s1 = [ranks[a] + ranks[b] + ranks[c] for a, b, c in blocks] if all(
        len(b) == 3 for b in blocks) else [sum(ranks[a] for a in b) for b in blocks]
    nonfoot = [0 if sum(1 for a in b if ranks[a] >= 2) == 1 else 1 for b in blocks]
    k1 = [(nonfoot[i], -s1[i]) for i in range(len(blocks))]
    order = sorted(range(len(blocks)), key=k1.__getitem__)
    if target is not None:
        tk = k1[target]
        if k1[order[0]] < tk:
            if tk[0] == 0 or k1[order[0]][0] == 0:
                # a foot beats target; feet are always removable
                return None
            inc = d.atom_blocks()
            for i in order:
                if k1[i] >= tk:
                    break
                if _removable(d, inc, ranks, i):
                    return None
        best = tk
    else:
        inc = d.atom_blocks()
        best = None
        for i in order:
            if nonfoot[i] == 0 or _removable(d, inc, ranks, i):
                best = k1[i]
                break
        if best is None:
            raise GenerationError("diagram has no removable block")
    tied = [i for i in order if k1[i] == best]
    if len(tied) > 1 and best[0] == 1:
        if inc is None:
            inc = d.atom_blocks()
        tied = [i for i in tied if i == target or _removable(d, inc, ranks, i)]
    if len(tied) > 1:
        if inc is None:
            inc = d.atom_blocks()
        k2 = {i: _second_key(d, inc, s1, i) for i in tied}
        top = max(k2.values())
        if target is not None and k2[target] != top:
            return None
        tied = [i for i in tied if k2[i] == top]
    if len(tied) > 1:
        colours = refined_block_colours(d)
        low = min(colours[i] for i in tied)
        if target is not None and colours[target] != low:
            return None
        tied = [i for i in tied if colours[i] == low]
    return tied


def m(d: Diagram, canon: Optional[tuple] = None) -> list:
    """The block orbit m(D): indices of blocks in the parent-defining orbit."""
    if d.beta < 2:
        raise GenerationError("m() is defined only for diagrams with at least two blocks")
    tied = _min_invariant_blocks(d)
    if canon is None:
        canon = canonicalize(d)
    form, group = canon
    chosen = min(tied, key=lambda i: form.block_labels[i])
    for orbit in group.block_orbits(d.beta):
        if chosen in orbit:
            return orbit
    raise AssertionError("block missing from its own orbit")


def _accepts(child: Diagram, e: int):
    """Parent test for the new block ``e``.

    Returns (accepted, canon) where canon is the (form, group) pair if it had
    to be computed, else None.
    """
    tied = _min_invariant_blocks(child, e)
    if tied is None:
        return False, None
    if len(tied) == 1:
        return True, None
    canon = canonicalize(child)
    form, group = canon
    chosen = min(tied, key=lambda i: form.block_labels[i])
    if chosen == e:
        return True, canon
    for orbit in group.block_orbits(child.beta):
        if e in orbit:
            return chosen in orbit, canon
    return False, canon


# -- extensions --------------------------------------------------------------


def irreducible_seeds(cfg: GenerationConfig) -> list:
    if cfg.max_atoms is not None and cfg.max_atoms < BLOCK_SIZE:
        return []
    return [Diagram(BLOCK_SIZE, (tuple(range(BLOCK_SIZE)),))]


def _subset_candidates(d: Diagram, dist: list, max_new: int, feet_free_atoms: Optional[list]):
    """Atom subsets S that can be the old part of a new block.

    ``max_new`` limits fresh atoms (atom cap).  ``feet_free_atoms`` (one list
    of rank-1 atoms per foot) restricts |S| >= 2 to subsets that turn every
    foot into a non-foot; None disables pruning.
    """
    n = d.atom_count
    out = []
    if max_new >= 2:
        out.extend((a,) for a in range(n))
    if feet_free_atoms is not None and len(feet_free_atoms) > 3:
        return out

    def hits_all_feet(s):
        if feet_free_atoms is None:
            return True
        return all(any(a in fa for a in s) for fa in feet_free_atoms)

    far = [[b for b in range(a + 1, n) if dist[a][b] >= 4] for a in range(n)]
    pairs = [(a, b) for a in range(n) for b in far[a]]
    if max_new >= 1:
        out.extend(p for p in pairs if hits_all_feet(p))
    for a, b in pairs:
        for c in far[a]:
            if c > b and dist[b][c] >= 4 and hits_all_feet((a, b, c)):
                out.append((a, b, c))
    return out


def _feet_free_atoms(d: Diagram, ranks: list) -> list:
    return [[a for a in d.blocks[i] if ranks[a] == 1] for i in feet(d)]


def _raw_extensions(d: Diagram, group: Optional[AutGroup], cfg: GenerationConfig, prune: bool = True):
    """Yield (child, new block index) for one representative per extension class."""
    n = d.atom_count
    max_new = BLOCK_SIZE if cfg.max_atoms is None else cfg.max_atoms - n
    if max_new < 0:
        return
    dist = atom_distances(d, 4)
    ranks = _ranks(d)
    ffa = _feet_free_atoms(d, ranks) if prune and d.beta >= 2 else None
    subs = _subset_candidates(d, dist, min(max_new, BLOCK_SIZE - 1), ffa)
    if group is not None and group.generators:
        subs = subset_orbit_reps(group, subs)
    for s in subs:
        fresh = tuple(range(n, n + BLOCK_SIZE - len(s)))
        child = Diagram.trusted(n + len(fresh), d.blocks + (s + fresh,))
        yield child, d.beta


def extensions(d: Diagram, cfg: GenerationConfig, group: Optional[AutGroup] = None) -> list:
    """All inequivalent valid one-block extensions of ``d`` (no parent test)."""
    if group is None:
        group = canonicalize(d)[1]
    return [c for c, _ in _raw_extensions(d, group, cfg, prune=False)]


# -- scan --------------------------------------------------------------------


class Scanner:
    """Depth-first canonical-construction-path search.

    ``visitor(d)`` is called for each accepted diagram with exactly
    ``cfg.beta`` blocks; with ``visit_all`` it is called for every accepted
    diagram of every size along the way.
    """

    def __init__(self, cfg: GenerationConfig, visitor: Optional[Callable] = None, visit_all: bool = False):
        self.cfg = cfg
        self.visitor = visitor
        self.visit_all = visit_all
        self.split_counter = 0
        self.accepted = 0
        self.tested = 0
        self.canon_calls = 0

    def walk(self, d: Diagram, canon: Optional[tuple] = None) -> Iterator[Diagram]:
        """Yield accepted diagrams of the scan rooted at ``d`` in depth-first order."""
        cfg = self.cfg
        self.accepted += 1
        if d.beta == cfg.split_depth and cfg.part is not None:
            r, k = cfg.part
            mine = self.split_counter % k == r
            self.split_counter += 1
            if not mine:
                return
        if d.beta == cfg.beta:
            yield d
            return
        if self.visit_all:
            yield d
        if canon is None:
            canon = canonicalize(d)
            self.canon_calls += 1
        group = canon[1]
        for child, e in _raw_extensions(d, group, cfg):
            self.tested += 1
            ok, child_canon = _accepts(child, e)
            if child_canon is not None:
                self.canon_calls += 1
            if ok:
                yield from self.walk(child, child_canon)

    def scan(self, d: Diagram) -> None:
        foot_free_only = self.cfg.foot_free_only
        visitor = self.visitor
        for x in self.walk(d):
            if foot_free_only and feet(x):
                continue
            visitor(x)


def scan(d: Diagram, cfg: GenerationConfig, visitor: Callable) -> None:
    Scanner(cfg, visitor).scan(d)


def generate(cfg: GenerationConfig) -> Iterator[Diagram]:
    """Yield one diagram per isomorphism class (connected Greechie-3-L, beta blocks)."""
    for seed in irreducible_seeds(cfg):
        scanner = Scanner(cfg)
        for d in scanner.walk(seed):
            if cfg.foot_free_only and feet(d):
                continue
            yield d


def count_table(max_beta: int, max_atoms: Optional[int] = None, part: Optional[tuple] = None) -> CountTable:
    """Per-(alpha, beta) totals and foot-free counts for every beta <= max_beta."""
    table = CountTable()
    cfg = GenerationConfig(max_beta, max_atoms=max_atoms, part=part)
    if part is not None:
        # node counts below the split depth would repeat in every part
        for b in range(1, max_beta + 1):
            sub = GenerationConfig(b, max_atoms=max_atoms, part=part)
            for d in generate(sub):
                table.add(d, not feet(d))
        return table

    def visit(d):
        table.add(d, not feet(d))

    for seed in irreducible_seeds(cfg):
        Scanner(cfg, visit, visit_all=True).scan(seed)
    return table


# -- oracle ------------------------------------------------------------------


def naive_generate(beta: int, max_atoms: Optional[int] = None) -> list:
    """All connected Greechie-3-L diagrams with ``beta`` blocks, by adding blocks
    every possible way and de-duplicating on canonical form.  Small beta only."""
    if beta > 6:
        raise GenerationError("naive generation refuses beta > 6")
    if beta < 1:
        raise GenerationError("beta must be positive")
    if max_atoms is not None and max_atoms < BLOCK_SIZE:
        return []
    level = {canonicalize(Diagram(3, ((0, 1, 2),)))[0].data: Diagram(3, ((0, 1, 2),))}
    for _ in range(beta - 1):
        nxt = {}
        for d in level.values():
            n = d.atom_count
            for k in range(1, BLOCK_SIZE + 1):
                fresh_count = BLOCK_SIZE - k
                if max_atoms is not None and n + fresh_count > max_atoms:
                    continue
                for s in itertools.combinations(range(n), k):
                    child = Diagram.trusted(n + fresh_count, d.blocks + (s + tuple(range(n, n + fresh_count)),))
                    # validity straight from the loop conditions, not the generator's distance test
                    if not validate(child, require_lattice=True).ok:
                        continue
                    key = canonicalize(child)[0].data
                    nxt.setdefault(key, child)
        level = nxt
    return list(level.values())


def is_generated_member(d: Diagram) -> bool:
    """Membership test for the generated class (connected, 3-atom blocks, no 3/4-loops)."""
    return all(len(b) == BLOCK_SIZE for b in d.blocks) and is_connected(d) and validate(d, True).ok
