"""Concrete syntax: tokenizer, recursive-descent parser and pretty-printer.

Types::

    forall a:K . T     rec a:K . T          (binders extend as far right as possible)
    T -> T   T -o T                         (right associative, -o is linear)
    T ; T                                   (right associative, binds tighter than ->)
    !T  ?T  +{l: T, ...}  &{l: T, ...}
    Skip Close Wait Int Bool Unit String a (T)

Kinds are ``S`` (linear session), ``*S``, ``T`` (unrestricted functional) and
``1T``.  Lowercase identifiers are type variables.  Uppercase identifiers are
instantiation variables and are only accepted when ``allow_instvars`` is set.

Expressions::

    \\x:T -> e    \\x -> e    /\\a:K => e    h a1 ... an    e1 + e2    @T

A program is a list of ``name : T`` signatures and ``name x y = e``
definitions; a declaration starts with an identifier in column 1.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .types import (
    BASES, CLOSE, EXTERNAL, IN, INTERNAL, KIND_S, KIND_SU, KIND_T, KIND_TL, LIN,
    OUT, UN, WAIT, Abs, App, Arrow, Base, Choice, End, Forall, InstVar, Kind,
    Lit, Message, Rec, Seq, Skip, TAbs, TypeArg, TypeVar, Type, Var,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


# --------------------------------------------------------------------------
# Tokens

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>--[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>[0-9]+)
  | (?P<ident>%?[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>/\\|->|-o(?![A-Za-z0-9_'])|=>|==|!=|<=|>=|&&|\|\||\(\)|[\\@:;.,!?+&{}()=<>*/\-])
""", re.VERBOSE)

TYPE_KEYWORDS = {"forall", "rec", "Skip", "Close", "Wait"} | set(BASES)
EXPR_KEYWORDS = {"True", "False"}
KEYWORDS = TYPE_KEYWORDS | EXPR_KEYWORDS

# binary operators, loosest first
BINOPS = [("||",), ("&&",), ("==", "!=", "<", ">", "<=", ">="), ("+", "-"), ("*", "/")]
OP_PREC = {op: i for i, group in enumerate(BINOPS) for op in group}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    n = len(src)
    while pos < n:
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        end = m.end()
        newlines = src.count("\n", pos, end)
        if newlines:
            line += newlines
            line_start = src.rfind("\n", pos, end) + 1
        pos = end
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# Program


@dataclass
class Decl:
    name: str
    signature: Type
    body: object
    loc: tuple = (0, 0)
    def_loc: tuple = (0, 0)
    params: tuple = field(default=())


@dataclass
class Program:
    decls: list

    def names(self) -> list:
        return [d.name for d in self.decls]

    def get(self, name: str) -> Decl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)


# --------------------------------------------------------------------------
# Parser


class Parser:
    def __init__(self, src: str, allow_instvars: bool = False):
        self.toks = tokenize(src)
        self.i = 0
        self.allow_instvars = allow_instvars
        # tokens in column 1 start a new declaration when parsing programs
        self.layout = False

    # -- helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at_boundary(self) -> bool:
        t = self.tok
        return t.kind == "eof" or (self.layout and t.col == 1 and self.i > self._decl_start)

    def check(self, text: str) -> bool:
        return not self.at_boundary() and self.tok.kind in ("sym", "ident") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.check(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.check(text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def error(self, message: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{message}, found {found}", t.line, t.col)

    def ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if self.at_boundary() or t.kind != "ident" or t.text in KEYWORDS:
            self.error(f"expected {what}")
        if t.text.startswith("%"):
            raise ParseError(f"identifier {t.text!r} uses the reserved '%' prefix", t.line, t.col)
        self.i += 1
        return t

    # -- kinds
    def kind(self, default: Kind) -> Kind:
        if not self.accept(":"):
            return default
        mult = None
        if self.accept("*"):
            mult = UN
        elif self.tok.kind == "int" and self.tok.text == "1":
            self.i += 1
            mult = LIN
        t = self.tok
        if t.kind != "ident" or t.text not in ("S", "T"):
            self.error("expected kind S, *S, T or 1T")
        self.i += 1
        if t.text == "S":
            return KIND_SU if mult == UN else KIND_S
        return KIND_TL if mult == LIN else KIND_T

    # -- types
    def type(self) -> Type:
        if self.check("forall") or self.check("rec"):
            return self.binder_type()
        return self.arrow_type()

    def binder_type(self) -> Type:
        is_rec = self.tok.text == "rec"
        self.i += 1
        name = self.ident("type variable").text
        k = self.kind(KIND_S if is_rec else KIND_T)
        self.expect(".")
        body = self.type()
        return Rec(name, k, body) if is_rec else Forall(name, k, body)

    def arrow_type(self) -> Type:
        lhs = self.seq_type()
        if self.accept("->"):
            return Arrow(UN, lhs, self.type())
        if self.accept("-o"):
            return Arrow(LIN, lhs, self.type())
        return lhs

    def seq_type(self) -> Type:
        lhs = self.prefix_type()
        if self.accept(";"):
            if self.check("forall") or self.check("rec"):
                return Seq(lhs, self.binder_type())
            return Seq(lhs, self.seq_type())
        return lhs

    def prefix_type(self) -> Type:
        if self.accept("!"):
            return Message(OUT, self.prefix_type())
        if self.accept("?"):
            return Message(IN, self.prefix_type())
        if self.check("+") or self.check("&"):
            view = INTERNAL if self.tok.text == "+" else EXTERNAL
            self.i += 1
            self.expect("{")
            branches = []
            while True:
                lbl = self.tok
                if lbl.kind != "ident" or self.at_boundary():
                    self.error("expected choice label")
                self.i += 1
                self.expect(":")
                branches.append((lbl.text, self.type()))
                if not self.accept(","):
                    break
            self.expect("}")
            labels = [l for l, _ in branches]
            if len(set(labels)) != len(labels):
                raise ParseError("duplicate choice label", lbl.line, lbl.col)
            return Choice(view, tuple(branches))
        return self.atom_type()

    def atom_type(self) -> Type:
        t = self.tok
        if self.at_boundary():
            self.error("expected a type")
        if self.accept("("):
            inner = self.type()
            self.expect(")")
            return inner
        if t.kind == "sym" and t.text == "()":
            self.i += 1
            return Base("Unit")
        if t.kind != "ident":
            self.error("expected a type")
        text = t.text
        if text.startswith("%"):
            raise ParseError(f"identifier {text!r} uses the reserved '%' prefix", t.line, t.col)
        self.i += 1
        if text == "Skip":
            return Skip()
        if text in (CLOSE, WAIT):
            return End(text)
        if text in BASES:
            return Base(text)
        if text in ("forall", "rec") or text in EXPR_KEYWORDS:
            self.i -= 1
            self.error("expected a type")
        if text[0].isupper():
            if not self.allow_instvars:
                raise ParseError(
                    f"instantiation variable {text!r} is not allowed in source "
                    "(type variables are lowercase)", t.line, t.col)
            return InstVar(text)
        return TypeVar(text)

    # -- expressions
    def expr(self):
        t = self.tok
        if self.accept("\\"):
            name = self.ident("parameter name").text
            annot = None
            if self.accept(":"):
                annot = self.seq_level_type()
            self.expect("->")
            return Abs(name, annot, self.expr(), (t.line, t.col))
        if self.accept("/\\"):
            name = self.ident("type variable").text
            k = self.kind(KIND_T)
            self.expect("=>")
            return TAbs(name, k, self.expr(), (t.line, t.col))
        return self.binop(0)

    def seq_level_type(self) -> Type:
        if self.check("forall") or self.check("rec"):
            self.error("parenthesize binder types in lambda annotations")
        return self.seq_type()

    def binop(self, level: int):
        if level == len(BINOPS):
            return self.application()
        lhs = self.binop(level + 1)
        while not self.at_boundary() and self.tok.kind == "sym" and self.tok.text in BINOPS[level]:
            op = self.tok
            self.i += 1
            rhs = self.binop(level + 1)
            lhs = App(Var(op.text, (op.line, op.col)), (lhs, rhs), (op.line, op.col))
        return lhs

    def starts_atom(self) -> bool:
        if self.at_boundary():
            return False
        t = self.tok
        if t.kind in ("int", "string"):
            return True
        if t.kind == "ident":
            return t.text not in TYPE_KEYWORDS
        return t.text in ("(", "()", "@")

    def application(self):
        start = self.tok
        head = self.atom_expr()
        args = []
        while self.starts_atom():
            if self.accept("@"):
                args.append(TypeArg(self.prefix_type()))
            else:
                args.append(self.atom_expr())
        loc = (start.line, start.col)
        if isinstance(head, TypeArg):
            raise ParseError("type argument without a function", start.line, start.col)
        if isinstance(head, Lit):
            if args:
                raise ParseError("literal cannot be applied", start.line, start.col)
            return head
        if isinstance(head, App):
            if not args:
                return head
            return App(head.head, head.args + tuple(args), head.loc)
        # head is an abstraction
        if not args:
            return head
        return App(head, tuple(args), loc)

    def atom_expr(self):
        t = self.tok
        loc = (t.line, t.col)
        if self.check("@"):
            self.error("unexpected type argument")
        if t.kind == "int":
            self.i += 1
            return Lit(int(t.text), "Int", loc)
        if t.kind == "string":
            self.i += 1
            return Lit(json.loads(t.text), "String", loc)
        if t.kind == "sym" and t.text == "()":
            self.i += 1
            return Lit(None, "Unit", loc)
        if t.kind == "ident" and t.text in EXPR_KEYWORDS:
            self.i += 1
            return Lit(t.text == "True", "Bool", loc)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        name = self.ident("expression")
        return App(Var(name.text, loc), (), loc)

    # -- programs
    def program(self) -> Program:
        self.layout = True
        sigs: dict = {}
        defs: dict = {}
        order: list = []
        while self.tok.kind != "eof":
            self._decl_start = self.i
            t = self.tok
            if t.col != 1:
                self.error("declaration must start in column 1")
            name = self.ident("declaration name")
            if self.accept(":"):
                if name.text in sigs:
                    raise ParseError(f"duplicate signature for {name.text!r}", t.line, t.col)
                sigs[name.text] = (self.type(), (t.line, t.col))
                order.append(name.text)
            else:
                params = []
                while not self.check("="):
                    p = self.ident("parameter or '='")
                    params.append((p.text, (p.line, p.col)))
                self.expect("=")
                if name.text in defs:
                    raise ParseError(f"duplicate definition of {name.text!r}", t.line, t.col)
                body = self.expr()
                for p, ploc in reversed(params):
                    body = Abs(p, None, body, ploc)
                defs[name.text] = (body, (t.line, t.col), tuple(p for p, _ in params))
            if not self.at_boundary():
                self.error("unexpected token")
        decls = []
        for name in order:
            if name not in defs:
                line, col = sigs[name][1]
                raise ParseError(f"signature for {name!r} lacks a definition", line, col)
        for name, (_, (line, col), _) in defs.items():
            if name not in sigs:
                raise ParseError(f"definition of {name!r} lacks a signature", line, col)
        for name in order:
            sig, loc = sigs[name]
            body, dloc, params = defs[name]
            decls.append(Decl(name, sig, body, loc, dloc, params))
        return Program(decls)

    _decl_start = -1

    def finish(self):
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")


def parse_type(src: str, allow_instvars: bool = False) -> Type:
    p = Parser(src, allow_instvars)
    t = p.type()
    p.finish()
    return t


def parse_expr(src: str) -> object:
    p = Parser(src)
    e = p.expr()
    p.finish()
    return e


def parse_program(src: str) -> Program:
    return Parser(src).program()


# --------------------------------------------------------------------------
# Printer

# position levels
_TYPE, _SEQ, _PREFIX = 0, 1, 2


def print_type(t: Type) -> str:
    return _show(t, _TYPE, True)


def _show(t: Type, level: int, tail: bool) -> str:
    if isinstance(t, (Rec, Forall)):
        kw = "rec" if isinstance(t, Rec) else "forall"
        ok = level <= _SEQ and tail
        body = _show(t.body, _TYPE, tail if ok else True)
        s = f"{kw} {t.var}:{t.kind} . {body}"
        return s if ok else f"({s})"
    if isinstance(t, Arrow):
        ok = level == _TYPE
        op = "->" if t.mult == UN else "-o"
        s = f"{_show(t.dom, _SEQ, False)} {op} {_show(t.cod, _TYPE, tail if ok else True)}"
        return s if ok else f"({s})"
    if isinstance(t, Seq):
        ok = level <= _SEQ
        s = f"{_show(t.lhs, _PREFIX, False)} ; {_show(t.rhs, _SEQ, tail if ok else True)}"
        return s if ok else f"({s})"
    if isinstance(t, Message):
        return t.pol + _show(t.payload, _PREFIX, False)
    if isinstance(t, Choice):
        inner = ", ".join(f"{lbl}: {_show(b, _TYPE, True)}" for lbl, b in t.branches)
        return f"{t.view}{{{inner}}}"
    if isinstance(t, Skip):
        return "Skip"
    if isinstance(t, End):
        return t.which
    if isinstance(t, Base):
        return t.which
    if isinstance(t, (TypeVar, InstVar)):
        return t.name
    raise TypeError(f"not a type: {t!r}")


def print_expr(e) -> str:
    return _pexpr(e, 0)


def _is_infix(e) -> bool:
    return (isinstance(e, App) and isinstance(e.head, Var) and e.head.name in OP_PREC
            and len(e.args) == 2 and not any(isinstance(a, TypeArg) for a in e.args))


# expression contexts
_E_TOP, _E_OPERAND, _E_ARG = 0, 1, 2


def _pexpr(e, ctx: int, prec: int = -1) -> str:
    if isinstance(e, Abs):
        annot = f":{_show(e.annot, _SEQ, False)}" if e.annot is not None else ""
        s = f"\\{e.param}{annot} -> {_pexpr(e.body, _E_TOP)}"
        return s if ctx == _E_TOP else f"({s})"
    if isinstance(e, TAbs):
        s = f"/\\{e.var}:{e.kind} => {_pexpr(e.body, _E_TOP)}"
        return s if ctx == _E_TOP else f"({s})"
    if isinstance(e, Lit):
        return _plit(e)
    if isinstance(e, App):
        if _is_infix(e):
            p = OP_PREC[e.head.name]
            lhs = _pexpr(e.args[0], _E_OPERAND, p)
            rhs = _pexpr(e.args[1], _E_OPERAND, p + 1)
            s = f"{lhs} {e.head.name} {rhs}"
            if ctx == _E_ARG or (ctx == _E_OPERAND and p < prec):
                return f"({s})"
            return s
        if isinstance(e.head, Var):
            if e.head.name in OP_PREC:
                raise ValueError(f"operator {e.head.name} needs exactly two value arguments")
            head = e.head.name
        else:
            head = _pexpr(e.head, _E_ARG)
        if not e.args:
            return head
        parts = [head]
        for a in e.args:
            if isinstance(a, TypeArg):
                parts.append("@" + _show(a.type, _PREFIX, False))
            else:
                parts.append(_pexpr(a, _E_ARG))
        s = " ".join(parts)
        return s if ctx != _E_ARG else f"({s})"
    raise TypeError(f"not an expression: {e!r}")


def _plit(e: Lit) -> str:
    if e.base == "Int":
        return str(e.value)
    if e.base == "Bool":
        return "True" if e.value else "False"
    if e.base == "Unit":
        return "()"
    return json.dumps(e.value)


def print_decl(d: Decl) -> str:
    body = d.body
    params = []
    # re-sugar leading unannotated parameters
    for _ in d.params:
        if isinstance(body, Abs) and body.annot is None:
            params.append(body.param)
            body = body.body
        else:
            break
    lhs = " ".join([d.name] + params)
    return f"{d.name} : {print_type(d.signature)}\n{lhs} = {print_expr(body)}"


def print_program(p: Program) -> str:
    return "\n\n".join(print_decl(d) for d in p.decls) + ("\n" if p.decls else "")
