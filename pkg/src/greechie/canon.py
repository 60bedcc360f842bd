"""Canonical labelling and automorphism groups of diagrams.

Works on the coloured incidence graph (atoms first, then blocks) with
equitable refinement, individualization of the first largest non-singleton
cell, automorphism pruning and trace-based pruning.  The canonical leaf is the
one with the least (trace sequence, certificate) pair; the certificate is the
sorted block list of the relabelled diagram.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .diagram import Diagram


@dataclass(frozen=True)
class CanonicalForm:
    data: bytes
    atom_labels: tuple  # original atom -> canonical atom label
    block_labels: tuple  # original block index -> canonical block label

    def diagram(self) -> Diagram:
        """The canonically relabelled diagram, blocks in canonical order."""
        return _decode(self.data)


@dataclass(frozen=True)
class AutGroup:
    alpha: int
    generators: tuple  # atom permutations
    block_generators: tuple  # induced block permutations, same order
    order: int

    def block_orbits(self, beta: int) -> list:
        return _orbits(self.block_generators, beta)


def _encode(cert: tuple, alpha: int) -> bytes:
    out = [alpha & 0xFF, alpha >> 8, len(cert)]
    for b in cert:
        out.append(len(b))
        out.extend(b)
    return bytes(out)


def _decode(data: bytes) -> Diagram:
    alpha = data[0] | (data[1] << 8)
    beta = data[2]
    pos = 3
    blocks = []
    for _ in range(beta):
        k = data[pos]
        blocks.append(tuple(data[pos + 1:pos + 1 + k]))
        pos += 1 + k
    return Diagram(alpha, tuple(blocks))


class _UF:
    __slots__ = ("p",)

    def __init__(self, n):
        self.p = list(range(n))

    def find(self, x):
        p = self.p
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, x, y):
        x, y = self.find(x), self.find(y)
        if x != y:
            if x < y:
                self.p[y] = x
            else:
                self.p[x] = y


def _orbits(gens: Iterable[Sequence[int]], n: int) -> list:
    uf = _UF(n)
    for g in gens:
        for x in range(n):
            uf.union(x, g[x])
    groups = {}
    for x in range(n):
        groups.setdefault(uf.find(x), []).append(x)
    return sorted(groups.values())


def atom_orbits(g: AutGroup, alpha: int = None) -> list:
    return _orbits(g.generators, g.alpha if alpha is None else alpha)


def subset_orbit_reps(g: AutGroup, subsets: Iterable[Iterable[int]], canonical: Sequence[int] = None) -> list:
    """One representative per Aut-orbit of the given atom subsets.

    The representative is the lexicographically least member under
    ``canonical`` (an atom -> rank map; identity when omitted).  Orbits are
    taken within the supplied family, which must be closed under the group.
    """
    subs = [tuple(sorted(s)) for s in subsets]
    if not g.generators:
        reps = list(dict.fromkeys(subs))
        return reps
    index = {s: i for i, s in enumerate(subs)}
    uf = _UF(len(subs))
    for gen in g.generators:
        for i, s in enumerate(subs):
            img = tuple(sorted(gen[a] for a in s))
            j = index.get(img)
            if j is not None:
                uf.union(i, j)
    if canonical is None:
        key = tuple
    else:
        key = lambda s: tuple(sorted(canonical[a] for a in s))  # noqa: E731
    best = {}
    for i, s in enumerate(subs):
        r = uf.find(i)
        if r not in best or key(s) < key(best[r]):
            best[r] = s
    return [best[r] for r in sorted(best, key=lambda r: key(best[r]))]


class _Search:
    """One canonical-labelling search over a reduced, coloured incidence graph.

    Vertices are the ``core`` atoms (rank >= 2) followed by the blocks; a
    block's colour is its number of rank-1 atoms, which are left out of the
    graph because any permutation of them within a block is an automorphism.
    """

    def __init__(self, core: int, blocks: Sequence[tuple], pend: Sequence[int]):
        self.core = core
        self.blocks = blocks
        self.pend = pend
        self.n = core + len(blocks)
        adj = [[] for _ in range(self.n)]
        for i, b in enumerate(blocks):
            v = core + i
            for a in b:
                adj[a].append(v)
                adj[v].append(a)
        self.adj = adj
        self.gens = []
        self.first_path = None
        self.first_traces = None
        self.first_cert = None
        self.first_col = None
        self.best_traces = None
        self.best_cert = None
        self.best_col = None
        self.best_path = None

    def initial(self):
        core = self.core
        col = [0] * self.n
        starts = {}
        pos = core
        for p in sorted(set(self.pend)):
            starts[p] = pos
            pos += sum(1 for q in self.pend if q == p)
        for i, p in enumerate(self.pend):
            col[core + i] = starts[p]
        return col

    def refine(self, col):
        """Refine to the coarsest equitable partition below ``col``.

        Colours are cell start positions, so cell order is preserved.  Returns
        the new colouring and a trace that is invariant under relabelling.
        """
        adj = self.adj
        n = self.n
        verts = range(n)
        ncells = len(set(col))
        trace = []
        while True:
            get = col.__getitem__
            sigs = [(col[v], sorted(map(get, nb))) for v, nb in enumerate(adj)]
            order = sorted(verts, key=sigs.__getitem__)
            new = [0] * n
            prev = None
            start = 0
            distinct = 0
            for pos, v in enumerate(order):
                s = sigs[v]
                if s != prev:
                    prev = s
                    start = pos
                    distinct += 1
                new[v] = start
            if distinct == ncells:
                return col, tuple(trace)
            trace.append(distinct)
            trace.append(hash(tuple(tuple(sigs[v][1]) for v in order)))
            col = new
            ncells = distinct

    def target_cell(self, col):
        sizes = {}
        for c in col:
            sizes[c] = sizes.get(c, 0) + 1
        best = None
        for c in sorted(sizes):
            if sizes[c] > 1 and (best is None or sizes[c] > sizes[best]):
                best = c
        if best is None:
            return None
        return [v for v in range(self.n) if col[v] == best]

    def certificate(self, col):
        core = self.core
        cert = [None] * len(self.blocks)
        for i, b in enumerate(self.blocks):
            cert[col[core + i] - core] = (self.pend[i], tuple(sorted([col[a] for a in b])))
        return tuple(cert)

    def automorphism(self, col_a, col_b):
        """Permutation mapping the leaf ``col_a`` onto ``col_b`` (both discrete)."""
        inv_b = [0] * self.n
        for v, c in enumerate(col_b):
            inv_b[c] = v
        return tuple(inv_b[c] for c in col_a)

    def fixing_orbits(self, path):
        uf = _UF(self.n)
        n = self.n
        for g in self.gens:
            if all(g[v] == v for v in path):
                for x in range(n):
                    if g[x] != x:
                        uf.union(x, g[x])
        return uf

    def run(self):
        col, tr = self.refine(self.initial())
        self._node(col, [], [tr], True, 0)
        return self

    def _node(self, col, path, traces, eq_first, best_cmp):
        """DFS over the search tree.

        ``best_cmp`` is -1 when this node's traces already beat the best leaf,
        0 while equal to them and 1 when worse.  Returns the level to jump
        back to, or None.
        """
        level = len(path)
        cell = self.target_cell(col)
        if cell is None:
            return self._leaf(col, path, traces, eq_first, best_cmp)
        explored = []
        uf = None
        ngens = -1
        for v in cell:
            if explored:
                if len(self.gens) != ngens:
                    uf = self.fixing_orbits(path)
                    ngens = len(self.gens)
                rv = uf.find(v)
                if any(uf.find(w) == rv for w in explored):
                    continue
            explored.append(v)
            c = col[v]
            child = [c + 1 if x == c else x for x in col]
            child[v] = c
            child, tr = self.refine(child)
            k = level + 1
            if self.first_traces is None:
                c_eq_first = True
                c_best = 0
            else:
                c_eq_first = eq_first and k < len(self.first_traces) and self.first_traces[k] == tr
                c_best = best_cmp
                if c_best == 0:
                    bt = self.best_traces[k] if k < len(self.best_traces) else ()
                    if tr < bt:
                        c_best = -1
                    elif tr > bt:
                        c_best = 1
                if c_best == 1 and not c_eq_first:
                    continue
            jump = self._node(child, path + [v], traces + [tr], c_eq_first, c_best)
            if jump is not None and jump < level:
                return jump
        return None

    def _leaf(self, col, path, traces, eq_first, best_cmp):
        cert = self.certificate(col)
        if self.first_traces is None:
            self.first_traces = self.best_traces = traces
            self.first_cert = self.best_cert = cert
            self.first_col = self.best_col = col
            self.first_path = self.best_path = path
            return None
        if cert == self.first_cert:
            self.gens.append(self.automorphism(self.first_col, col))
            return _common_prefix(path, self.first_path)
        if best_cmp == 0 and cert == self.best_cert:
            self.gens.append(self.automorphism(self.best_col, col))
            return _common_prefix(path, self.best_path)
        if best_cmp == -1 or (best_cmp == 0 and cert < self.best_cert):
            self.best_traces = traces
            self.best_cert = cert
            self.best_col = col
            self.best_path = path
        return None

    def group_order(self):
        order = 1
        path = self.first_path
        for k in range(len(path)):
            uf = self.fixing_orbits(path[:k])
            r = uf.find(path[k])
            order *= sum(1 for x in range(self.n) if uf.find(x) == r)
        return order


def _common_prefix(a, b):
    k = 0
    for x, y in zip(a, b):
        if x != y:
            break
        k += 1
    return k


def _reduce(d: Diagram):
    """Split atoms into core (rank >= 2) and per-block pendant lists."""
    ranks = d.ranks()
    core_ids = {}
    for a in range(d.atom_count):
        if ranks[a] >= 2:
            core_ids[a] = len(core_ids)
    blocks = []
    pendants = []
    for b in d.blocks:
        blocks.append(tuple(core_ids[a] for a in b if a in core_ids))
        pendants.append([a for a in b if a not in core_ids])
    return core_ids, blocks, pendants


def refined_block_colours(d: Diagram) -> list:
    """Isomorphism-invariant colour per block from equitable refinement."""
    core_ids, blocks, pendants = _reduce(d)
    s = _Search(len(core_ids), blocks, [len(p) for p in pendants])
    col, _ = s.refine(s.initial())
    core = len(core_ids)
    return [col[core + i] for i in range(d.beta)]


def canonicalize(d: Diagram) -> tuple:
    """Return (CanonicalForm, AutGroup) for a diagram."""
    alpha = d.atom_count
    beta = d.beta
    core_ids, blocks, pendants = _reduce(d)
    core = len(core_ids)
    s = _Search(core, blocks, [len(p) for p in pendants]).run()
    col = s.best_col

    block_labels = tuple(col[core + i] - core for i in range(beta))
    atom_labels = [0] * alpha
    for a, c in core_ids.items():
        atom_labels[a] = col[c]
    by_label = sorted(range(beta), key=block_labels.__getitem__)
    nxt = core
    for i in by_label:
        for a in pendants[i]:
            atom_labels[a] = nxt
            nxt += 1
    canon_blocks = [None] * beta
    for i, b in enumerate(d.blocks):
        canon_blocks[block_labels[i]] = tuple(sorted(atom_labels[a] for a in b))
    form = CanonicalForm(_encode(tuple(canon_blocks), alpha), tuple(atom_labels), block_labels)

    # lift reduced automorphisms to atoms and add pendant permutations
    core_atoms = [None] * core
    for a, c in core_ids.items():
        core_atoms[c] = a
    gens = []
    bgens = []
    for g in s.gens:
        perm = list(range(alpha))
        for c in range(core):
            perm[core_atoms[c]] = core_atoms[g[c]]
        bperm = [g[core + i] - core for i in range(beta)]
        for i in range(beta):
            for x, y in zip(pendants[i], pendants[bperm[i]]):
                perm[x] = y
        gens.append(tuple(perm))
        bgens.append(tuple(bperm))
    pend_order = 1
    ident_b = tuple(range(beta))
    for p in pendants:
        for k in range(1, len(p)):
            perm = list(range(alpha))
            perm[p[k - 1]], perm[p[k]] = p[k], p[k - 1]
            gens.append(tuple(perm))
            bgens.append(ident_b)
            pend_order *= k + 1
    group = AutGroup(alpha, tuple(gens), tuple(bgens), s.group_order() * pend_order)
    return form, group


def canonical_form(d: Diagram) -> bytes:
    return canonicalize(d)[0].data


def canonical_diagram(d: Diagram) -> Diagram:
    return canonicalize(d)[0].diagram()
