"""Parsers and pretty-printers for session types, source programs and MiniML.

Printers emit text that parses back to the same tree (runtime-only literals
such as end-points and locations print in angle brackets and do not parse).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from sessrc import miniml as T
from sessrc import session_types as ST
from sessrc import source as S


class ParseError(Exception):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        super().__init__(f"{line}:{col}: expected {expected}, found {found or 'end of input'}")
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found


@dataclass(frozen=True)
class Token:
    kind: str  # int | ident | sym | eof
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<comment>--[^\n]*)"
    r"|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>->|-o|:=|==|[()\[\],;=|!?.*+:])"
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(line, pos - line_start + 1, "a token", repr(text[pos]))
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    keywords: frozenset = frozenset()

    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "ident") and t.text in texts

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected: str):
        t = self.tok
        raise ParseError(t.line, t.col, expected, t.text)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.next()

    def ident(self, allow_wildcard: bool = True) -> str:
        t = self.tok
        if t.kind != "ident" or t.text in self.keywords:
            self.fail("an identifier")
        if t.text == "_" and not allow_wildcard:
            self.fail("a variable (the wildcard _ cannot be referenced)")
        self.i += 1
        return t.text

    def at_ident(self) -> bool:
        t = self.tok
        return t.kind == "ident" and t.text not in self.keywords

    def finish(self, value):
        if self.tok.kind != "eof":
            self.fail("end of input")
        return value

    # -- types ---------------------------------------------------------------

    def ty(self) -> ST.Ty:
        left = self.ty_tensor()
        if self.at("-o"):
            self.next()
            return ST.Lolli(left, self.ty())
        return left

    def ty_tensor(self) -> ST.Ty:
        left = self.ty_atom()
        if self.at("*"):
            self.next()
            return ST.Tensor(left, self.ty_tensor())
        return left

    def ty_atom(self) -> ST.Ty:
        if self.at("Int"):
            self.next()
            return ST.INT
        if self.at("Unit"):
            self.next()
            return ST.UNIT
        if self.at("end"):
            self.next()
            return ST.END
        if self.at("!", "?"):
            mark = self.next().text
            payload = self.ty_atom()
            self.expect(".")
            cont = self.session()
            return ST.SendTy(payload, cont) if mark == "!" else ST.RecvTy(payload, cont)
        if self.at("("):
            self.next()
            t = self.ty()
            self.expect(")")
            return t
        self.fail("a type")

    def session(self) -> ST.SessionTy:
        t = self.tok
        s = self.ty_atom()
        if not isinstance(s, ST.SessionTy):
            raise ParseError(t.line, t.col, "a session type", t.text)
        return s


# ---------------------------------------------------------------------------
# source language


class SrcParser(_Parser):
    keywords = frozenset({"let", "in", "fun", "fork", "newch", "send", "recv", "end", "Int", "Unit"})

    def parse(self) -> S.SrcExpr:
        return self.finish(self.expr())

    def expr(self) -> S.SrcExpr:
        if self.at("let"):
            self.next()
            if self.at("("):
                self.next()
                x = self.ident()
                self.expect(",")
                y = self.ident()
                self.expect(")")
                self.expect("=")
                bound = self.expr()
                self.expect("in")
                return S.LetPair(x, y, bound, self.expr())
            x = self.ident()
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            return S.App(S.Lam(x, self.expr()), bound)
        if self.at("fun"):
            self.next()
            params = [self.param()]
            while not self.at("->"):
                params.append(self.param())
            self.next()
            body = self.expr()
            for x, ann in reversed(params):
                body = S.Lam(x, body, ann)
            return body
        if self.at("fork"):
            self.next()
            child = self.app()
            self.expect(";")
            return S.seq_fork(child, self.expr())
        return self.app()

    def param(self):
        if self.at("("):
            self.next()
            x = self.ident()
            self.expect(":")
            t = self.ty()
            self.expect(")")
            return x, t
        return self.ident(), None

    def app(self) -> S.SrcExpr:
        if self.at("send"):
            self.next()
            c = self.atom()
            e = S.Send(c, self.atom())
        elif self.at("recv"):
            self.next()
            e = S.Recv(self.atom())
        else:
            e = self.atom()
        while self.starts_atom():
            e = S.App(e, self.atom())
        return e

    def starts_atom(self) -> bool:
        t = self.tok
        return t.kind == "int" or self.at_ident() or self.at("(", "newch")

    def atom(self) -> S.SrcExpr:
        t = self.tok
        if t.kind == "int":
            self.next()
            return S.IntLit(int(t.text))
        if self.at("newch"):
            self.next()
            if self.at("["):
                self.next()
                s = self.session()
                self.expect("]")
                return S.NewCh(s)
            return S.NewCh()
        if self.at("("):
            self.next()
            if self.at(")"):
                self.next()
                return S.UNIT
            a = self.expr()
            if self.at(","):
                self.next()
                b = self.expr()
                self.expect(")")
                return S.Pair(a, b)
            self.expect(")")
            return a
        if self.at_ident():
            return S.Var(self.ident(allow_wildcard=False))
        self.fail("an expression")


def parse_src(text: str) -> S.SrcExpr:
    return SrcParser(text).parse()


def parse_type(text: str) -> ST.Ty:
    p = _Parser(text)
    return p.finish(p.ty())


# ---------------------------------------------------------------------------
# MiniML


_UNARY_HEADS = {
    "ref": T.Alloc, "fai": T.Fai, "fst": T.Fst, "snd": T.Snd,
    "inl": T.Inl, "inr": T.Inr, "some": T.SomeOf,
}


class TgtParser(_Parser):
    keywords = frozenset({
        "let", "in", "fun", "rec", "fork", "if", "then", "else", "match", "with", "none",
        "some", "case", "of", "inl", "inr", "true", "false", "ref", "fai", "swap", "fst",
        "snd", "end",
    })

    def parse(self) -> T.TgtExpr:
        return self.finish(self.expr())

    def expr(self) -> T.TgtExpr:
        if self.at("let"):
            self.next()
            if self.at("("):
                self.next()
                x = self.ident()
                self.expect(",")
                y = self.ident()
                self.expect(")")
                self.expect("=")
                bound = self.expr()
                self.expect("in")
                return T.LetPair(x, y, bound, self.expr())
            x = self.ident()
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            return T.Let(x, bound, self.expr())
        if self.at("fun"):
            self.next()
            params = self.params()
            body = self.expr()
            for x in reversed(params):
                body = T.Lam(x, body)
            return body
        if self.at("rec"):
            self.next()
            f = self.ident()
            params = self.params()
            body = self.expr()
            for x in reversed(params[1:]):
                body = T.Lam(x, body)
            return T.Rec(f, params[0], body)
        if self.at("if"):
            self.next()
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            return T.If(c, a, self.expr())
        if self.at("match"):
            self.next()
            scrut = self.expr()
            self.expect("with")
            if self.at("|"):
                self.next()
                self.expect("none")
            else:
                self.expect("none")
            self.expect("->")
            if_none = self.expr()
            self.expect("|")
            self.expect("some")
            x = self.ident()
            self.expect("->")
            if_some = self.expr()
            if self.at("end"):
                self.next()
            return T.MatchOpt(scrut, if_none, x, if_some)
        if self.at("case"):
            self.next()
            scrut = self.expr()
            self.expect("of")
            if self.at("|"):
                self.next()
            self.expect("inl")
            xl = self.ident()
            self.expect("->")
            el = self.expr()
            self.expect("|")
            self.expect("inr")
            xr = self.ident()
            self.expect("->")
            return T.Case(scrut, xl, el, xr, self.expr())
        first = self.assign()
        if self.at(";"):
            self.next()
            return T.Seq(first, self.expr())
        return first

    def params(self) -> list[str]:
        params = [self.ident()]
        while not self.at("->"):
            params.append(self.ident())
        self.next()
        return params

    def assign(self) -> T.TgtExpr:
        left = self.cmp()
        if self.at(":="):
            self.next()
            return T.Store(left, self.cmp())
        return left

    def cmp(self) -> T.TgtExpr:
        left = self.add()
        if self.at("=="):
            self.next()
            return T.BinOp("==", left, self.add())
        return left

    def add(self) -> T.TgtExpr:
        left = self.pre()
        while self.at("+"):
            self.next()
            left = T.BinOp("+", left, self.pre())
        return left

    def pre(self) -> T.TgtExpr:
        if self.at("fork"):
            self.next()
            return T.Fork(self.app())
        return self.app()

    def app(self) -> T.TgtExpr:
        t = self.tok
        if t.kind == "ident" and t.text in _UNARY_HEADS:
            self.next()
            e = _UNARY_HEADS[t.text](self.atom())
        elif self.at("swap"):
            self.next()
            a = self.atom()
            e = T.Swap(a, self.atom())
        else:
            e = self.atom()
        while self.starts_atom():
            e = T.App(e, self.atom())
        return e

    def starts_atom(self) -> bool:
        t = self.tok
        return t.kind == "int" or self.at_ident() or self.at("(", "!", "true", "false", "none")

    def atom(self) -> T.TgtExpr:
        t = self.tok
        if t.kind == "int":
            self.next()
            return T.IntLit(int(t.text))
        if self.at("true", "false"):
            self.next()
            return T.BoolLit(t.text == "true")
        if self.at("none"):
            self.next()
            return T.NoneLit()
        if self.at("!"):
            self.next()
            return T.Load(self.atom())
        if self.at("("):
            self.next()
            if self.at(")"):
                self.next()
                return T.UNIT
            a = self.expr()
            if self.at(","):
                self.next()
                b = self.expr()
                self.expect(")")
                return T.Pair(a, b)
            self.expect(")")
            return a
        if self.at_ident():
            return T.Var(self.ident(allow_wildcard=False))
        self.fail("an expression")


def parse_tgt(text: str) -> T.TgtExpr:
    return TgtParser(text).parse()


# ---------------------------------------------------------------------------
# printers


def _paren(s: str, own: int, need: int) -> str:
    return f"({s})" if own < need else s


def show_type(t: ST.Ty, need: int = 0) -> str:
    match t:
        case ST.IntTy():
            return "Int"
        case ST.UnitTy():
            return "Unit"
        case ST.End():
            return "end"
        case ST.SendTy(p, k):
            return f"!{show_type(p, 2)}.{show_type(k, 2)}"
        case ST.RecvTy(p, k):
            return f"?{show_type(p, 2)}.{show_type(k, 2)}"
        case ST.Tensor(a, b):
            return _paren(f"{show_type(a, 2)} * {show_type(b, 1)}", 1, need)
        case ST.Lolli(a, b):
            return _paren(f"{show_type(a, 1)} -o {show_type(b, 0)}", 0, need)
    raise TypeError(f"not a type: {t!r}")


def show_src(e: S.SrcExpr, need: int = 0) -> str:
    s, own = _src(e)
    return _paren(s, own, need)


def _src(e):
    match e:
        case S.Var(x):
            return x, 6
        case S.IntLit(n):
            return str(n), 6
        case S.UnitLit():
            return "()", 6
        case S.Endpoint(c, side):
            return f"<{c}:{side.value}>", 6
        case S.NewCh(None):
            return "newch", 6
        case S.NewCh(ann):
            return f"newch[{show_type(ann)}]", 6
        case S.Pair(a, b):
            return f"({show_src(a)}, {show_src(b)})", 6
        case S.App(S.Lam(S.WILDCARD, body, None), S.Fork(child)):
            return f"fork {show_src(child, 5)}; {show_src(body)}", 0
        case S.App(S.Lam(x, body, None), bound):
            return f"let {x} = {show_src(bound)} in {show_src(body)}", 0
        case S.App(f, a):
            return f"{show_src(f, 5)} {show_src(a, 6)}", 5
        case S.Lam(x, body, None):
            return f"fun {x} -> {show_src(body)}", 0
        case S.Lam(x, body, ann):
            return f"fun ({x} : {show_type(ann)}) -> {show_src(body)}", 0
        case S.LetPair(x, y, bound, body):
            return f"let ({x}, {y}) = {show_src(bound)} in {show_src(body)}", 0
        case S.Fork(child):
            # only reachable for terms built outside the parser
            return f"<fork {show_src(child)}>", 6
        case S.Send(c, p):
            return f"send {show_src(c, 6)} {show_src(p, 6)}", 5
        case S.Recv(c):
            return f"recv {show_src(c, 6)}", 5
    raise TypeError(f"not a source expression: {e!r}")


_UNARY_NAMES = {cls: kw for kw, cls in _UNARY_HEADS.items()}


def show_tgt(e: T.TgtExpr, need: int = 0) -> str:
    s, own = _tgt(e)
    return _paren(s, own, need)


def _tgt(e):
    match e:
        case T.Var(x):
            return x, 6
        case T.IntLit(n):
            return str(n), 6
        case T.BoolLit(b):
            return ("true" if b else "false"), 6
        case T.UnitLit():
            return "()", 6
        case T.NoneLit():
            return "none", 6
        case T.Loc(l):
            return f"<loc {l}>", 6
        case T.Load(a):
            return f"!{show_tgt(a, 6)}", 6
        case T.Pair(a, b):
            return f"({show_tgt(a)}, {show_tgt(b)})", 6
        case T.App(f, a):
            return f"{show_tgt(f, 5)} {show_tgt(a, 6)}", 5
        case T.Swap(a, b):
            return f"swap {show_tgt(a, 6)} {show_tgt(b, 6)}", 5
        case T.Fork(c):
            return f"fork {show_tgt(c, 5)}", 4
        case T.BinOp("+", a, b):
            return f"{show_tgt(a, 3)} + {show_tgt(b, 4)}", 3
        case T.BinOp("==", a, b):
            return f"{show_tgt(a, 3)} == {show_tgt(b, 3)}", 2
        case T.Store(a, b):
            return f"{show_tgt(a, 2)} := {show_tgt(b, 2)}", 1
        case T.Seq(a, b):
            return f"{show_tgt(a, 1)}; {show_tgt(b)}", 0
        case T.Let(x, a, b):
            return f"let {x} = {show_tgt(a)} in {show_tgt(b)}", 0
        case T.LetPair(x, y, a, b):
            return f"let ({x}, {y}) = {show_tgt(a)} in {show_tgt(b)}", 0
        case T.Lam(x, b):
            return f"fun {x} -> {show_tgt(b)}", 0
        case T.Rec(f, x, b):
            return f"rec {f} {x} -> {show_tgt(b)}", 0
        case T.If(c, a, b):
            return f"if {show_tgt(c)} then {show_tgt(a)} else {show_tgt(b)}", 0
        case T.MatchOpt(s, n, x, sm):
            return f"match {show_tgt(s)} with none -> {show_tgt(n, 1)} | some {x} -> {show_tgt(sm)}", 0
        case T.Case(s, xl, el, xr, er):
            return f"case {show_tgt(s)} of inl {xl} -> {show_tgt(el, 1)} | inr {xr} -> {show_tgt(er)}", 0
    cls = type(e)
    if cls in _UNARY_NAMES:
        return f"{_UNARY_NAMES[cls]} {show_tgt(e.e, 6)}", 5
    raise TypeError(f"not a MiniML expression: {e!r}")


def show_src_config(cfg: S.SrcConfig) -> str:
    threads = " || ".join(show_src(t) for t in cfg.threads)
    chans = ", ".join(
        f"{c} -> ([{', '.join(show_src(v) for v in lr)}], [{', '.join(show_src(v) for v in rl)}])"
        for c, (lr, rl) in sorted(cfg.state.items())
    )
    return f"[{threads}] {{{chans}}}"


def show_tgt_config(cfg: T.TgtConfig) -> str:
    threads = " || ".join(show_tgt(t) for t in cfg.threads)
    heap = ", ".join(f"{l} -> {show_tgt(v)}" for l, v in sorted(cfg.heap.items()))
    return f"[{threads}] {{{heap}}}"
