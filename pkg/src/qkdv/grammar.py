"""Text forms of generators, polynomials, series and operators.

Grammar (whitespace-insensitive, juxtaposition multiplies)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/')? unary)*
    unary   := '-' unary | power
    power   := atom ('^' '-'? INT)?
    atom    := INT | 'q' | 'z' | 'D' | GEN '[' '-'? INT ']' | GEN '(' 'z' ')' | '(' expr ')'
    GEN     := prefix component, e.g. t1, lam2, u1, v3

``t1[-3]`` is a mode generator, ``t1(z)`` the series sum_m t1[m] z^(-m)
over the ring's window.  Products are operator products, so ``D t1(z)``
equals ``t1(zq) D``; division is by nonzero constants only.
"""

from __future__ import annotations

import re

from .coeffs import X as QVAR, field
from .modering import PREFIX_FAMILY, GeneratorId, Poly, Ring, format_poly
from .opalg import PseudoDiffOp, op_mul

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z]+)(\d*)|(\S))")


class ParseError(ValueError):
    pass


def _tokenize(text):
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError("cannot read %r" % text[pos:])
        num, word, comp, sym = m.groups()
        if num is not None:
            out.append(("int", int(num)))
        elif word is not None:
            out.append(("word", word, int(comp) if comp else None))
        else:
            out.append(("sym", sym))
        pos = m.end()
    return out


def parse_generator(text) -> GeneratorId:
    m = re.fullmatch(r"\s*([a-z]+)(\d+)\[\s*(-?\d+)\s*\]\s*", text)
    if not m or m.group(1) not in PREFIX_FAMILY:
        raise ParseError("not a generator: %r" % text)
    return GeneratorId(PREFIX_FAMILY[m.group(1)], int(m.group(2)), int(m.group(3)))


class _Parser:
    def __init__(self, text, ring: Ring):
        self.toks = _tokenize(text)
        self.i = 0
        self.ring = ring
        self.zero = ring.zero()

    # -- token helpers ------------------------------------------------------
    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def is_sym(self, s):
        t = self.peek()
        return t is not None and t[0] == "sym" and t[1] == s

    def take_sym(self, s):
        if not self.is_sym(s):
            raise ParseError("expected %r at token %d" % (s, self.i))
        self.i += 1

    def take_int(self):
        neg = False
        if self.is_sym("-"):
            self.i += 1
            neg = True
        t = self.peek()
        if t is None or t[0] != "int":
            raise ParseError("expected an integer at token %d" % self.i)
        self.i += 1
        return -t[1] if neg else t[1]

    # -- values ------------------------------------------------------------------
    def scalar(self, c):
        return PseudoDiffOp({0: self.ring.const(c)}, self.zero)

    def poly(self, p):
        return PseudoDiffOp({0: p}, self.zero)

    def constant_of(self, v):
        if set(v.c) - {0}:
            return None
        p = v.c.get(0, self.zero)
        if set(p.t) - {self.ring.BASE}:
            return None
        return p.t.get(self.ring.BASE, field().zero)

    # -- grammar -----------------------------------------------------------------
    def parse(self):
        v = self.expr()
        if self.peek() is not None:
            raise ParseError("unexpected trailing input at token %d" % self.i)
        return v

    def expr(self):
        v = self.term()
        while self.is_sym("+") or self.is_sym("-"):
            neg = self.is_sym("-")
            self.i += 1
            w = self.term()
            v = v - w if neg else v + w
        return v

    def _starts_atom(self):
        t = self.peek()
        return t is not None and (t[0] in ("int", "word") or (t[0] == "sym" and t[1] == "("))

    def term(self):
        v = self.unary()
        while True:
            if self.is_sym("*"):
                self.i += 1
                v = op_mul(v, self.unary())
            elif self.is_sym("/"):
                self.i += 1
                d = self.constant_of(self.unary())
                if not d:
                    raise ParseError("division by a non-constant or zero")
                v = op_mul(v, self.scalar(field().one / d))
            elif self._starts_atom():
                v = op_mul(v, self.power())
            else:
                return v

    def unary(self):
        if self.is_sym("-"):
            self.i += 1
            return -self.unary()
        return self.power()

    def power(self):
        kind, val = self.atom()
        exp = 1
        if self.is_sym("^"):
            self.i += 1
            exp = self.take_int()
        R = self.ring
        if kind == "gen":
            if exp < 0 and not R.is_unit[R.index[val]]:
                raise ParseError("negative power of the non-unit generator %s" % (val,))
            return self.poly(R.gen(val.family, val.component, val.mode, exp))
        if kind == "z":
            return self.poly(R.zpow(exp))
        if kind == "D":
            return PseudoDiffOp({exp: R.one()}, self.zero)
        if kind == "q":
            return self.scalar(field().coerce(QVAR ** exp) if exp >= 0 else field().one / field().coerce(QVAR ** -exp))
        if exp < 0:
            c = self.constant_of(val)
            if not c:
                raise ParseError("negative power of a non-constant")
            return self.scalar((field().one / c) ** -exp)
        out = self.scalar(1)
        for _ in range(exp):
            out = op_mul(out, val)
        return out

    def atom(self):
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input")
        if t[0] == "int":
            self.i += 1
            return "val", self.scalar(t[1])
        if t[0] == "sym":
            if t[1] == "(":
                self.i += 1
                v = self.expr()
                self.take_sym(")")
                return "val", v
            raise ParseError("unexpected %r" % t[1])
        _, word, comp = t
        self.i += 1
        if comp is None:
            if word in ("q", "z", "D"):
                return word, None
            raise ParseError("unknown symbol %r" % word)
        fam = PREFIX_FAMILY.get(word)
        if fam is None:
            raise ParseError("unknown generator prefix %r" % word)
        if self.is_sym("["):
            self.i += 1
            m = self.take_int()
            self.take_sym("]")
            g = GeneratorId(fam, comp, m)
            if g not in self.ring.index:
                raise ParseError("generator %s is not in the ring" % (g,))
            return "gen", g
        if self.is_sym("("):
            self.i += 1
            w = self.peek()
            if not (w and w[0] == "word" and w[1] == "z" and w[2] is None):
                raise ParseError("series must be written as %s%d(z)" % (word, comp))
            self.i += 1
            self.take_sym(")")
            if fam not in self.ring.families or comp > self.ring.families[fam]:
                raise ParseError("series %s%d(z) is not in the ring" % (word, comp))
            return "val", self.poly(self.ring.series(fam, comp))
        raise ParseError("generator %s%d needs [mode] or (z)" % (word, comp))


def parse_operator(text, ring: Ring) -> PseudoDiffOp:
    return _Parser(text, ring).parse()


def parse_poly(text, ring: Ring) -> Poly:
    v = parse_operator(text, ring)
    if set(v.c) - {0}:
        raise ParseError("expected a polynomial, found powers of D")
    return v.c.get(0, ring.zero())


def serialize_poly(p: Poly) -> str:
    return format_poly(p)


def _series_name(p: Poly):
    R = p.ring
    for fam, n in R.families.items():
        for comp in range(1, n + 1):
            s = R.series(fam, comp)
            if p == s:
                return "", "%s%d(z)" % (_prefix(fam), comp)
            if p == -s:
                return "-", "%s%d(z)" % (_prefix(fam), comp)
    return None


def _prefix(fam):
    from .modering import FAMILY_PREFIX
    return FAMILY_PREFIX[fam]


def serialize_operator(op: PseudoDiffOp) -> str:
    """Coefficients on the left of powers of D, highest power first."""
    if not op.c:
        return "0"
    parts = []
    for e in op.exponents():
        c = op.c[e]
        dpart = "" if e == 0 else ("D" if e == 1 else "D^%d" % e)
        named = _series_name(c)
        if named is not None:
            sign, body = named
        else:
            body = format_poly(c)
            sign = ""
            if body.startswith("-") and " " not in body:
                sign, body = "-", body[1:]
            if body == "1" and dpart:
                body = ""
            elif " " in body or ("*" in body and dpart) or "/" in body:
                body = "(%s)" % body
        text = " ".join(x for x in (body, dpart) if x) or "1"
        parts.append((sign, text))
    out = ("-" if parts[0][0] else "") + parts[0][1]
    for sign, text in parts[1:]:
        out += (" - " if sign else " + ") + text
    return out
