"""Check lattice equations and inferences against pasted lattices.

An inference is compiled into nested Python loops, one per variable in
first-occurrence order.  Every subterm is computed once, at the outermost
loop where all its variables are bound, and each hypothesis is tested there
too, so a failing hypothesis skips all deeper loops.  The last few loops are
replaced by numpy broadcasting over dense operation tables; counters are
still reported as if every loop ran in Python up to the first failure.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .diagram import Diagram, DiagramError, iter_diagram_lines, parse_diagram
from .eqparser import (
    EQ,
    JOIN,
    MEET,
    Bin,
    Comp,
    Const,
    Inference,
    Relation,
    Term,
    Var,
    format_relation,
    variables,
)
from .lattice import Lattice, LatticeError, paste

PASSED = "Passed"
FAILED = "Failed"

# Upper bound on elements per numpy block in the innermost loops.
VECTOR_LIMIT = 4096
NAIVE_LIMIT = 1 << 24


class UnboundVariableError(KeyError):
    pass


@dataclass
class CheckResult:
    verdict: str
    assignment: Optional[dict] = None
    text: str = ""
    evaluations: int = 0
    early_exits: int = 0

    @property
    def passed(self) -> bool:
        return self.verdict == PASSED


# ---------------------------------------------------------------- evaluation

def _expand(l: Lattice, op: str, x, y):
    """Binary operation through its definition in join, meet and ortho."""
    J, M, O = l.join, l.meet, l.ortho
    if op == JOIN:
        return J[x, y]
    if op == MEET:
        return M[x, y]
    x_, y_ = O[x], O[y]
    if op == "impl0":
        return J[x_, y]
    if op == "impl1":
        return J[x_, M[x, y]]
    if op == "impl2":
        return J[y, M[x_, y_]]
    if op == "impl3":
        return J[J[M[x_, y], M[x_, y_]], M[x, J[x_, y]]]
    if op == "impl4":
        return J[J[M[x, y], M[x_, y]], M[J[x_, y], y_]]
    if op == "impl5":
        return J[J[M[x, y], M[x_, y]], M[x_, y_]]
    if op == "biimp":
        return J[M[x, y], M[x_, y_]]
    raise KeyError(op)


def eval_term(l: Lattice, t: Term, asg: dict, expand: bool = False):
    """Node of ``t`` under ``asg``.  Assignment values may be ints or numpy
    index arrays; with ``expand`` compound operators bypass cached tables."""
    if isinstance(t, Var):
        try:
            return asg[t.name]
        except KeyError:
            raise UnboundVariableError(t.name) from None
    if isinstance(t, Const):
        return l.one if t.value else l.zero
    if isinstance(t, Comp):
        return l.ortho[eval_term(l, t.arg, asg, expand)]
    x = eval_term(l, t.left, asg, expand)
    y = eval_term(l, t.right, asg, expand)
    if expand:
        return _expand(l, t.op, x, y)
    return l.table(t.op)[x, y]


def eval_relation(l: Lattice, r: Relation, asg: dict, expand: bool = False):
    x = eval_term(l, r.lhs, asg, expand)
    y = eval_term(l, r.rhs, asg, expand)
    if r.rel == EQ:
        return x == y
    return l.leq[x, y]


def holds(l: Lattice, inf: Inference, asg: dict) -> bool:
    """Direct evaluation of one assignment: hypotheses imply conclusion."""
    for negated, rel in inf.hypotheses:
        if bool(eval_relation(l, rel, asg, expand=True)) == negated:
            return True
    return bool(eval_relation(l, inf.conclusion, asg, expand=True))


# ---------------------------------------------------------------- compile

@dataclass
class _Plan:
    inf: Inference
    vars: list
    vec_depth: int
    source: str
    fn: object = field(repr=False, default=None)


class _Emitter:
    """Interns subterms and assigns each one a name and a loop level."""

    def __init__(self, order: dict, vec_from: int):
        self.order = order
        self.vec_from = vec_from
        self.ids: dict = {}
        self.levels: dict = {}
        self.by_level: dict = {}

    def level(self, t: Term) -> int:
        return self.levels[self.intern(t)]

    def intern(self, t: Term) -> str:
        name = self.ids.get(t)
        if name is not None:
            return name
        if isinstance(t, Var):
            lv = self.order[t.name]
            name = f"x{lv}"
            self.ids[t] = name
            self.levels[name] = lv
            return name
        if isinstance(t, Const):
            kids, lv = [], -1
        elif isinstance(t, Comp):
            kids = [self.intern(t.arg)]
            lv = self.levels[kids[0]]
        else:
            kids = [self.intern(t.left), self.intern(t.right)]
            lv = max(self.levels[k] for k in kids)
        name = f"t{len(self.ids)}"
        self.ids[t] = name
        self.levels[name] = lv
        vec = lv >= self.vec_from
        if isinstance(t, Const):
            expr = "ONE" if t.value else "0"
        elif isinstance(t, Comp):
            expr = f"On[{kids[0]}]" if vec else f"O[{kids[0]}]"
        else:
            tab = _table_name(t.op)
            expr = f"{tab}n[{kids[0]}, {kids[1]}]" if vec else f"{tab}[{kids[0]}][{kids[1]}]"
        self.by_level.setdefault(lv, []).append(f"{name} = {expr}")
        return name

    def relation(self, r: Relation) -> tuple:
        a, b = self.intern(r.lhs), self.intern(r.rhs)
        lv = max(self.levels[a], self.levels[b])
        vec = lv >= self.vec_from
        if r.rel == EQ:
            expr = f"({a} == {b})"
        else:
            expr = f"LQn[{a}, {b}]" if vec else f"LQ[{a}][{b}]"
        return lv, expr


def _table_name(op: str) -> str:
    return "T_" + op


def _prefix_shape(k: int, vd: int) -> str:
    # k leading loop dimensions, the rest collapsed to length 1
    return "(" + "N, " * k + "1, " * (vd - k) + ")"


def _vector_depth(n: int, v: int) -> int:
    if v == 0:
        return 0
    d = 1
    while d < v and n ** (d + 1) <= VECTOR_LIMIT:
        d += 1
    return d


def compile_inference(inf: Inference, n: int) -> _Plan:
    """Generate the loop program for lattices with ``n`` nodes."""
    vs = variables(inf)
    v = len(vs)
    vd = _vector_depth(n, v)
    p = v - vd
    em = _Emitter({name: i for i, name in enumerate(vs)}, p)
    hyps: dict = {}
    for negated, rel in inf.hypotheses:
        lv, expr = em.relation(rel)
        vec = lv >= p
        if negated:
            expr = f"~{expr}" if vec else f"(not {expr})"
        hyps.setdefault(lv, []).append(expr)
    _, concl = em.relation(inf.conclusion)

    params = ", ".join(["N", "ONE", "V", "O", "On", "LQ", "LQn"] + _table_params(inf))
    out = [f"def run({params}):"]
    out.append("    evals = 0")
    out.append("    exits = 0")
    ind = "    "
    for line in em.by_level.get(-1, []):
        out.append(ind + line)
    if -1 in hyps:
        out.append(ind + f"if not ({' and '.join(hyps[-1])}):")
        out.append(ind + "    return None, 0, 1")
    for lv in range(p):
        out.append(ind + f"for x{lv} in range(N):")
        ind += "    "
        for line in em.by_level.get(lv, []):
            out.append(ind + line)
        if lv in hyps:
            out.append(ind + f"if not ({' and '.join(hyps[lv])}):")
            out.append(ind + "    exits += 1")
            out.append(ind + "    continue")
    prefix = ", ".join(f"x{i}" for i in range(p))
    if vd == 0:
        out.append(ind + "evals += 1")
        out.append(ind + f"if not {concl}:")
        out.append(ind + "    return (), evals, exits")
        out.append("    return None, evals, exits")
    else:
        for j in range(vd):
            out.append(ind + f"x{p + j} = V[{j}]")
        alive = "True"
        exit_terms = []
        for lv in range(p, v):
            for line in em.by_level.get(lv, []):
                out.append(ind + line)
            if lv in hyps:
                h = " & ".join(f"({e})" for e in hyps[lv])
                out.append(ind + f"h{lv} = {h}")
                out.append(ind + f"e{lv} = {alive} & ~h{lv}")
                out.append(ind + f"a{lv} = {alive} & h{lv}")
                exit_terms.append(lv)
                alive = f"a{lv}"
        shape = "(" + "N, " * vd + ")"
        out.append(ind + f"alive = np.broadcast_to({alive}, {shape})")
        out.append(ind + f"fail = alive & ~np.broadcast_to({concl}, {shape})")
        out.append(ind + "if fail.any():")
        out.append(ind + "    idx = int(np.argmax(fail.ravel()))")
        out.append(ind + "    evals += int(np.count_nonzero(alive.ravel()[:idx + 1]))")
        for lv in exit_terms:
            k = lv - p + 1
            out.append(
                ind + f"    exits += int(np.count_nonzero("
                f"np.broadcast_to(e{lv}, {_prefix_shape(k, vd)}).ravel()[:idx // N ** {vd - k} + 1]))"
            )
        out.append(ind + f"    return ({prefix}{', ' if p else ''}*np.unravel_index(idx, {shape}),), evals, exits")
        out.append(ind + "evals += int(np.count_nonzero(alive))")
        for lv in exit_terms:
            k = lv - p + 1
            out.append(ind + f"exits += int(np.count_nonzero(np.broadcast_to(e{lv}, {_prefix_shape(k, vd)})))")
        out.append("    return None, evals, exits")
    source = "\n".join(out) + "\n"
    scope = {"np": np}
    exec(compile(source, "<inference>", "exec"), scope)
    return _Plan(inf, vs, vd, source, scope["run"])


def _ops(inf: Inference) -> list:
    ops = set()

    def walk(t):
        if isinstance(t, Bin):
            ops.add(t.op)
            walk(t.left)
            walk(t.right)
        elif isinstance(t, Comp):
            walk(t.arg)

    for _, rel in inf.hypotheses:
        walk(rel.lhs)
        walk(rel.rhs)
    walk(inf.conclusion.lhs)
    walk(inf.conclusion.rhs)
    return sorted(ops)


def _table_params(inf: Inference) -> list:
    return [_table_name(op) + sfx for op in _ops(inf) for sfx in ("", "n")]


def _tables(l: Lattice, inf: Inference) -> dict:
    tabs = {
        "O": l.ortho.tolist(),
        "On": l.ortho,
        "LQ": l.leq.tolist(),
        "LQn": l.leq,
    }
    for op in _ops(inf):
        t = l.table(op)
        tabs[_table_name(op)] = t.tolist()
        tabs[_table_name(op) + "n"] = t
    return tabs


_PLAN_CACHE: dict = {}


def _plan(inf: Inference, n: int) -> _Plan:
    vd = _vector_depth(n, len(variables(inf)))
    key = (inf, vd)
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        plan = _PLAN_CACHE[key] = compile_inference(inf, n)
    return plan


def _instantiate(l: Lattice, inf: Inference, asg: dict) -> str:
    return format_relation(inf.conclusion, {k: l.names[v] for k, v in asg.items()})


def check(l: Lattice, inf: Inference) -> CheckResult:
    """First failing assignment in loop order, or Passed."""
    plan = _plan(inf, l.n)
    vd = plan.vec_depth
    V = [np.arange(l.n).reshape((1,) * j + (l.n,) + (1,) * (vd - 1 - j)) for j in range(vd)]
    hit, evals, exits = plan.fn(l.n, l.one, V, **_tables(l, inf))
    if hit is None:
        return CheckResult(PASSED, evaluations=evals, early_exits=exits)
    asg = {name: int(node) for name, node in zip(plan.vars, hit)}
    return CheckResult(FAILED, asg, _instantiate(l, inf, asg), evals, exits)


def naive_check(l: Lattice, inf: Inference) -> CheckResult:
    """Evaluate every assignment by broadcasting, with no early exits."""
    vs = variables(inf)
    v = len(vs)
    n = l.n
    if n ** v > NAIVE_LIMIT:
        raise ValueError(f"{n}^{v} assignments exceed the naive checker limit")
    grids = np.indices((n,) * v) if v else []
    asg = {name: grids[i] for i, name in enumerate(vs)}
    ok = np.ones((n,) * v, dtype=bool)
    for negated, rel in inf.hypotheses:
        r = np.asarray(eval_relation(l, rel, asg, expand=True), dtype=bool)
        ok &= ~r if negated else r
    concl = np.asarray(eval_relation(l, inf.conclusion, asg, expand=True), dtype=bool)
    fail = np.broadcast_to(ok & ~concl, (n,) * v)
    total = n ** v
    if not fail.any():
        return CheckResult(PASSED, evaluations=total)
    idx = int(np.argmax(fail.ravel()))
    hit = np.unravel_index(idx, (n,) * v) if v else ()
    a = {name: int(node) for name, node in zip(vs, hit)}
    return CheckResult(FAILED, a, _instantiate(l, inf, a), total)


# ---------------------------------------------------------------- batches

def _stats(l: Lattice) -> str:
    return f"({l.alpha}/{l.beta}/{l.n})"


def check_one(k: int, item: Union[Diagram, str], inf: Inference, lineno: Optional[int] = None) -> tuple:
    """(transcript line, input ok, CheckResult or None) for the k-th entry."""
    where = f" line {lineno}" if lineno is not None else ""
    try:
        d = parse_diagram(item) if isinstance(item, str) else item
        l = paste(d)
    except (DiagramError, LatticeError) as e:
        return f"ERROR #{k}{where}: {e}", False, None
    r = check(l, inf)
    if r.passed:
        return f"Passed #{k} {_stats(l)}", True, r
    return f"FAILED #{k} {_stats(l)} at {r.text}", True, r


def _check_star(args):
    return check_one(*args)


def check_batch(entries: Iterable, inf: Inference, jobs: int = 1) -> list:
    """Header line plus one (line, ok, result) triple per entry, in input order.

    ``entries`` may be text lines of a diagram file (blank and '#' lines are
    skipped) or Diagram objects.  Output order is input order.
    """
    items = []
    texts = []
    for e in entries:
        if isinstance(e, Diagram):
            items.append((e, None))
        else:
            texts.append(e)
    if texts:
        items.extend((s, no) for no, s in iter_diagram_lines(texts))
    header = f"The input file has {len(items)} lattices."
    tasks = [(k, item, inf, no) for k, (item, no) in enumerate(items, 1)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, os.cpu_count() or 1)) as ex:
            results = list(ex.map(_check_star, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [check_one(*t) for t in tasks]
    return [header, *results]


def check_file(entries: Iterable, inf: Inference, jobs: int = 1) -> tuple:
    """Transcript lines and a flag that is False if any entry was unreadable."""
    header, *results = check_batch(entries, inf, jobs)
    return [header] + [r[0] for r in results], all(r[1] for r in results)
