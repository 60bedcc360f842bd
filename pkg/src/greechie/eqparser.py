"""Lattice equations and inferences: AST, parser, formatter and named laws.

Grammar (whitespace is ignored)::

    inference := [hyp ("&" hyp)* "=>"] relation
    hyp       := ["~"] relation | ["~"] "(" relation ")"
    relation  := side ("=" | "<") side          "<" reads as "less or equal"
    side      := term [binop term]
    term      := primary "'"*
    primary   := letter | "0" | "1" | "(" term binop term ")" | "(" term ")"
    binop     := "v" | "^" | "->0" ... "->5" | "=="

Binary terms must be parenthesized, except for a single operator at the top
of a relation side.  ``v`` is the join operator and cannot be a variable.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Optional, Union

JOIN = "join"
MEET = "meet"
BIIMP = "biimp"
IMPLS = tuple(f"impl{i}" for i in range(6))
BINARY_OPS = (JOIN, MEET, *IMPLS, BIIMP)

OP_TEXT = {JOIN: "v", MEET: "^", BIIMP: "==", **{f"impl{i}": f"->{i}" for i in range(6)}}

EQ = "="
LEQ = "<"

VARIABLE_LETTERS = "".join(c for c in string.ascii_lowercase if c != "v")


class EquationError(ValueError):
    pass


class EquationParseError(EquationError):
    def __init__(self, message: str, pos: int, src: str = ""):
        super().__init__(f"{message} at column {pos + 1}")
        self.pos = pos
        self.src = src


class UnbalancedParenError(EquationParseError):
    pass


class UnknownTokenError(EquationParseError):
    pass


class MissingRelationError(EquationParseError):
    pass


class BadVariableError(EquationParseError):
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: int  # 0 or 1


@dataclass(frozen=True)
class Comp:
    arg: "Term"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Term"
    right: "Term"


Term = Union[Var, Const, Comp, Bin]


@dataclass(frozen=True)
class Relation:
    lhs: Term
    rhs: Term
    rel: str = EQ


@dataclass(frozen=True)
class Inference:
    hypotheses: tuple  # of (negated, Relation)
    conclusion: Relation


# ---------------------------------------------------------------- tokens

@dataclass(frozen=True)
class _Tok:
    kind: str  # var, const, op, rel, lp, rp, prime, amp, not, implies, end
    value: object
    pos: int


def _tokenize(src: str) -> list:
    toks = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
        elif c == "(":
            toks.append(_Tok("lp", c, i))
            i += 1
        elif c == ")":
            toks.append(_Tok("rp", c, i))
            i += 1
        elif c == "'":
            toks.append(_Tok("prime", c, i))
            i += 1
        elif c == "&":
            toks.append(_Tok("amp", c, i))
            i += 1
        elif c == "~":
            toks.append(_Tok("not", c, i))
            i += 1
        elif c == "v":
            toks.append(_Tok("op", JOIN, i))
            i += 1
        elif c == "^":
            toks.append(_Tok("op", MEET, i))
            i += 1
        elif c == "-":
            if src.startswith("->", i) and i + 2 < n and src[i + 2] in "012345":
                toks.append(_Tok("op", f"impl{src[i + 2]}", i))
                i += 3
            else:
                raise UnknownTokenError("expected '->' followed by a digit 0-5", i, src)
        elif c == "=":
            if src.startswith("==", i):
                toks.append(_Tok("op", BIIMP, i))
                i += 2
            elif src.startswith("=>", i):
                toks.append(_Tok("implies", "=>", i))
                i += 2
            else:
                toks.append(_Tok("rel", EQ, i))
                i += 1
        elif c == "<":
            toks.append(_Tok("rel", LEQ, i))
            i += 1
        elif c in "01":
            toks.append(_Tok("const", int(c), i))
            i += 1
        elif c in string.ascii_lowercase:
            toks.append(_Tok("var", c, i))
            i += 1
        elif c.isalpha():
            raise BadVariableError(f"variable {c!r} is not a lowercase letter a-z", i, src)
        else:
            raise UnknownTokenError(f"unknown character {c!r}", i, src)
    toks.append(_Tok("end", None, n))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, cls, msg, tok=None):
        tok = tok or self.peek()
        return cls(msg, tok.pos, self.src)

    def primary(self) -> Term:
        t = self.take()
        if t.kind == "var":
            return Var(t.value)
        if t.kind == "const":
            return Const(t.value)
        if t.kind == "lp":
            left = self.term()
            op = self.take()
            if op.kind == "rp":
                return left  # redundant grouping, "(a)"
            if op.kind == "end":
                raise self.error(UnbalancedParenError, "missing ')'", op)
            if op.kind != "op":
                raise self.error(UnknownTokenError, f"expected a binary operator, found {op.value!r}", op)
            right = self.term()
            close = self.take()
            if close.kind != "rp":
                raise self.error(UnbalancedParenError, "missing ')'", close)
            return Bin(op.value, left, right)
        if t.kind == "rp":
            raise self.error(UnbalancedParenError, "unexpected ')'", t)
        if t.kind == "end":
            raise self.error(MissingRelationError, "unexpected end of input", t)
        if t.kind == "op" and t.value == JOIN:
            raise self.error(BadVariableError, "'v' is the join operator and cannot be a variable", t)
        raise self.error(UnknownTokenError, f"unexpected {t.value!r}", t)

    def term(self) -> Term:
        t = self.primary()
        while self.peek().kind == "prime":
            self.take()
            t = Comp(t)
        return t

    def side(self) -> Term:
        t = self.term()
        if self.peek().kind == "op":
            op = self.take().value
            t = Bin(op, t, self.term())
        return t

    def relation(self) -> Relation:
        lhs = self.side()
        tok = self.take()
        if tok.kind != "rel":
            if tok.kind == "rp":
                raise self.error(UnbalancedParenError, "unexpected ')'", tok)
            raise self.error(MissingRelationError, "expected '=' or '<'", tok)
        return Relation(lhs, self.side(), tok.value)

    def hypothesis_relation(self) -> Relation:
        if self.peek().kind == "lp":
            mark = self.i
            try:
                self.take()
                rel = self.relation()
                if self.peek().kind == "rp":
                    self.take()
                    return rel
            except EquationParseError:
                pass
            self.i = mark
        return self.relation()

    def inference(self) -> Inference:
        hyps = []
        while True:
            negated = False
            if self.peek().kind == "not":
                self.take()
                negated = True
            rel = self.hypothesis_relation()
            tok = self.peek()
            if tok.kind == "amp":
                self.take()
                hyps.append((negated, rel))
                continue
            if tok.kind == "implies":
                self.take()
                hyps.append((negated, rel))
                break
            if negated:
                raise self.error(MissingRelationError, "a negated relation must be followed by '&' or '=>'")
            if tok.kind == "end":
                if hyps:
                    raise self.error(MissingRelationError, "expected '=>' before the conclusion")
                return Inference((), rel)
            if tok.kind == "rp":
                raise self.error(UnbalancedParenError, "unexpected ')'")
            raise self.error(UnknownTokenError, f"unexpected {tok.value!r}")
        concl = self.relation()
        tok = self.peek()
        if tok.kind != "end":
            cls = UnbalancedParenError if tok.kind == "rp" else UnknownTokenError
            raise self.error(cls, f"trailing input {tok.value!r}")
        return Inference(tuple(hyps), concl)


def parse_inference(src: str) -> Inference:
    """Parse an equation or an inference with hypotheses."""
    return _Parser(src).inference()


def parse_term(src: str) -> Term:
    p = _Parser(src)
    t = p.side()
    tok = p.peek()
    if tok.kind != "end":
        cls = UnbalancedParenError if tok.kind == "rp" else UnknownTokenError
        raise p.error(cls, f"trailing input {tok.value!r}")
    return t


# ---------------------------------------------------------------- output

def format_term(t: Term, names: Optional[dict] = None) -> str:
    if isinstance(t, Var):
        return names[t.name] if names else t.name
    if isinstance(t, Const):
        return str(t.value)
    if isinstance(t, Comp):
        return format_term(t.arg, names) + "'"
    return f"({format_term(t.left, names)}{OP_TEXT[t.op]}{format_term(t.right, names)})"


def format_relation(r: Relation, names: Optional[dict] = None) -> str:
    return f"{format_term(r.lhs, names)}{r.rel}{format_term(r.rhs, names)}"


def format_inference(inf: Inference, names: Optional[dict] = None) -> str:
    parts = []
    for negated, rel in inf.hypotheses:
        text = format_relation(rel, names)
        parts.append(f"~({text})" if negated else text)
    concl = format_relation(inf.conclusion, names)
    if not parts:
        return concl
    return " & ".join(parts) + " => " + concl


def _term_vars(t: Term, out: list, seen: set) -> None:
    if isinstance(t, Var):
        if t.name not in seen:
            seen.add(t.name)
            out.append(t.name)
    elif isinstance(t, Comp):
        _term_vars(t.arg, out, seen)
    elif isinstance(t, Bin):
        _term_vars(t.left, out, seen)
        _term_vars(t.right, out, seen)


def term_variables(t: Term) -> list:
    out: list = []
    _term_vars(t, out, set())
    return out


def variables(inf: Inference) -> list:
    """Distinct variables by first occurrence, hypotheses before the conclusion."""
    out: list = []
    seen: set = set()
    for _, rel in inf.hypotheses:
        _term_vars(rel.lhs, out, seen)
        _term_vars(rel.rhs, out, seen)
    _term_vars(inf.conclusion.lhs, out, seen)
    _term_vars(inf.conclusion.rhs, out, seen)
    return out


# ---------------------------------------------------------------- named laws

def _v(i: int) -> Var:
    return Var(VARIABLE_LETTERS[i])


def _i1(x: Term, y: Term) -> Term:
    return Bin("impl1", x, y)


def _meet_chain(terms) -> Term:
    acc = terms[0]
    for t in terms[1:]:
        acc = Bin(MEET, acc, t)
    return acc


def _godowski_cycle(n: int) -> list:
    xs = [_v(i) for i in range(n)]
    return [_i1(xs[i], xs[(i + 1) % n]) for i in range(n)]


def godowski(n: int) -> Inference:
    """(a->1 b) ^ (b->1 c) ^ ... ^ (x_n ->1 a) <= a ->1 x_n."""
    links = _godowski_cycle(n)
    return Inference((), Relation(_meet_chain(links), _i1(_v(0), _v(n - 1)), LEQ))


def godowski_staged(n: int) -> Inference:
    """The Godowski law with redundant negated hypotheses that grow one
    variable at a time from the tail of the cycle, so the checker can skip
    whole loops early."""
    links = _godowski_cycle(n)
    rhs = _i1(_v(0), _v(n - 1))
    hyps = []
    for k in range(1, n - 1):
        hyps.append((True, Relation(_meet_chain(links[n - k:]), rhs, LEQ)))
    return Inference(tuple(hyps), Relation(_meet_chain(links), rhs, LEQ))


def _equiv(x: Term, y: Term, k: int, xs: list) -> Term:
    c = xs[2]
    if k == 3:
        return Bin(
            JOIN,
            Bin(MEET, _i1(x, c), _i1(y, c)),
            Bin(MEET, _i1(Comp(x), c), _i1(Comp(y), c)),
        )
    ak = xs[k - 1]
    return Bin(
        JOIN,
        _equiv(x, y, k - 1, xs),
        Bin(MEET, _equiv(x, ak, k - 1, xs), _equiv(y, ak, k - 1, xs)),
    )


def noa(n: int) -> Inference:
    """(a1 ->1 a3) ^ (a1 ==(n) a2) <= a2 ->1 a3 with the generalized
    equivalence expanded into joins, meets and ->1."""
    xs = [_v(i) for i in range(n)]
    lhs = Bin(MEET, _i1(xs[0], xs[2]), _equiv(xs[0], xs[1], n, xs))
    return Inference((), Relation(lhs, _i1(xs[1], xs[2]), LEQ))


def _orth(x: str, y: str) -> tuple:
    return (False, Relation(Var(x), Comp(Var(y)), LEQ))


def oa6() -> Inference:
    concl = parse_inference(
        "(((avb)^(cvd))^(evf))<(bv(a^(cv(((avc)^(bvd))^(((ave)^(bvf))v((cve)^(dvf)))))))"
    ).conclusion
    return Inference((_orth("a", "b"), _orth("c", "d"), _orth("e", "f")), concl)


_FIXED = {
    "modular": "(av(b^(avc)))=((avb)^(avc))",
    "distributive": "(a^(bvc))=((a^b)v(a^c))",
    "orthomodular": "(av(a'^(avb)))=(avb)",
}

BUILTIN_NAMES = ("modular", "distributive", "orthomodular", "godowski", "godowski_hyp", "oa6", "noa")


def builtin(name: str, n: Optional[int] = None) -> Inference:
    """Named law.  ``godowski``/``godowski_hyp`` need n >= 3, ``noa`` n >= 4."""
    if name in _FIXED or name == "oa6":
        if n is not None:
            raise EquationError(f"law {name!r} takes no size parameter")
        return oa6() if name == "oa6" else parse_inference(_FIXED[name])
    limit = len(VARIABLE_LETTERS)
    if name in ("godowski", "godowski_hyp"):
        if n is None or not 3 <= n <= limit:
            raise EquationError(f"{name} needs 3 <= n <= {limit}, got {n}")
        return godowski(n) if name == "godowski" else godowski_staged(n)
    if name == "noa":
        if n is None or not 4 <= n <= limit:
            raise EquationError(f"noa needs 4 <= n <= {limit}, got {n}")
        return noa(n)
    raise EquationError(f"unknown law {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def parse_law_spec(spec: str) -> Inference:
    """``name`` or ``name:N`` as accepted on the command line."""
    name, _, arg = spec.partition(":")
    if not arg:
        return builtin(name)
    try:
        n = int(arg)
    except ValueError:
        raise EquationError(f"bad size {arg!r} in law {spec!r}") from None
    return builtin(name, n)
