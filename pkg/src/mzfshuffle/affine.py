"""Integer-coefficient affine expressions over named symbols.

These are the exponents and binomial arguments of symbolic terms, e.g.
``s2+t+k`` or ``-k``.  A complex constant is allowed.
"""
from __future__ import annotations

import re
from typing import Mapping, Union

import numpy as np

Number = Union[int, float, complex]

_TOKEN = re.compile(r"\s*([+-]?)\s*(\d+\s*\*\s*)?(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?j?|\.\d+j?|[A-Za-z_][A-Za-z_0-9]*)")


_INDEX_RANK = {"k": 0, "j": 1, "l": 2, "i": 3, "m": 4, "n": 5}


def _sym_key(name: str):
    # parameters before summation indices, then numeric suffix (s2 < s10)
    m = re.match(r"([A-Za-z_]+)(\d*)$", name)
    if not m:
        return (2, name, 0)
    head, num = m.group(1), int(m.group(2) or 0)
    if head in _INDEX_RANK:
        return (1, str(_INDEX_RANK[head]), num)
    return (0, head, num)


class AffineExpr:
    __slots__ = ("constant", "terms")

    def __init__(self, constant: Number = 0, terms: Mapping[str, int] | None = None):
        c = complex(constant)
        self.constant = c
        self.terms = {k: int(v) for k, v in sorted((terms or {}).items(), key=lambda kv: _sym_key(kv[0])) if v != 0}

    # construction helpers
    @classmethod
    def sym(cls, name: str, coeff: int = 1) -> "AffineExpr":
        return cls(0, {name: coeff})

    @classmethod
    def const(cls, value: Number) -> "AffineExpr":
        return cls(value)

    @classmethod
    def coerce(cls, x) -> "AffineExpr":
        if isinstance(x, AffineExpr):
            return x
        if isinstance(x, str):
            return cls.parse(x)
        return cls(x)

    @classmethod
    def parse(cls, text: str) -> "AffineExpr":
        """Parse forms like ``s2+t+k-1``, ``-k``, ``2*s1-j+0.5``."""
        text = text.strip().replace("−", "-")
        if not text:
            raise ValueError("empty expression")
        pos = 0
        const = 0j
        terms: dict[str, int] = {}
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse affine expression {text!r}")
            if pos > 0 and not m.group(1):
                raise ValueError(f"missing sign between atoms in {text!r}")
            sign = -1 if m.group(1) == "-" else 1
            mult = int(m.group(2).replace("*", "").strip()) if m.group(2) else 1
            atom = m.group(3)
            if re.match(r"[A-Za-z_]", atom):
                terms[atom] = terms.get(atom, 0) + sign * mult
            else:
                const += sign * mult * complex(atom)
            pos = m.end()
            if pos < len(text) and text[pos] not in "+- ":
                raise ValueError(f"cannot parse affine expression {text!r}")
        return cls(const, terms)

    # arithmetic
    def __add__(self, other) -> "AffineExpr":
        o = AffineExpr.coerce(other)
        t = dict(self.terms)
        for k, v in o.terms.items():
            t[k] = t.get(k, 0) + v
        return AffineExpr(self.constant + o.constant, t)

    __radd__ = __add__

    def __neg__(self) -> "AffineExpr":
        return AffineExpr(-self.constant, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> "AffineExpr":
        return self + (-AffineExpr.coerce(other))

    def __rsub__(self, other) -> "AffineExpr":
        return AffineExpr.coerce(other) - self

    def __mul__(self, n: int) -> "AffineExpr":
        if not isinstance(n, (int, np.integer)):
            raise TypeError("affine expressions only scale by integers")
        return AffineExpr(self.constant * n, {k: v * n for k, v in self.terms.items()})

    __rmul__ = __mul__

    # predicates
    def is_zero(self) -> bool:
        return self.constant == 0 and not self.terms

    def is_constant(self) -> bool:
        return not self.terms

    def symbols(self) -> set[str]:
        return set(self.terms)

    def coeff(self, name: str) -> int:
        return self.terms.get(name, 0)

    def is_negated_symbol(self, names=None) -> str | None:
        """Return the symbol if this is exactly -(symbol)."""
        if self.constant == 0 and len(self.terms) == 1:
            (k, v), = self.terms.items()
            if v == -1 and (names is None or k in names):
                return k
        return None

    def substitute(self, mapping: Mapping[str, "AffineExpr | Number"]) -> "AffineExpr":
        out = AffineExpr(self.constant)
        for k, v in self.terms.items():
            if k in mapping:
                out = out + AffineExpr.coerce(mapping[k]) * v
            else:
                out = out + AffineExpr.sym(k, v)
        return out

    def evaluate(self, bindings: Mapping[str, object]):
        """Complex value (or numpy array if any binding is an array)."""
        val = self.constant
        for k, v in self.terms.items():
            if k not in bindings:
                raise KeyError(f"unbound symbol {k!r}")
            val = val + v * bindings[k]
        return val

    # identity
    def key(self):
        return (self.constant.real, self.constant.imag, tuple(self.terms.items()))

    def __eq__(self, other) -> bool:
        if isinstance(other, AffineExpr):
            return self.constant == other.constant and self.terms == other.terms
        if isinstance(other, (int, float, complex)):
            return not self.terms and self.constant == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.key())

    # serialization
    def to_json(self) -> dict:
        c = self.constant
        const = _num_json(c)
        return {"const": const, "terms": dict(self.terms)}

    @classmethod
    def from_json(cls, d) -> "AffineExpr":
        if isinstance(d, (int, float)):
            return cls(d)
        if isinstance(d, str):
            return cls.parse(d)
        c = d.get("const", 0)
        if isinstance(c, list):
            c = complex(c[0], c[1])
        return cls(c, d.get("terms", {}))

    def __str__(self) -> str:
        parts = []
        for k, v in self.terms.items():
            if v == 1:
                parts.append(f"+{k}")
            elif v == -1:
                parts.append(f"-{k}")
            else:
                parts.append(f"{v:+d}*{k}")
        c = self.constant
        if c != 0 or not parts:
            parts.append(_num_str(c, signed=bool(parts)))
        s = "".join(parts)
        return s[1:] if s.startswith("+") else s

    def __repr__(self) -> str:
        return f"AffineExpr({str(self)!r})"


def _num_json(c: complex):
    if c.imag == 0:
        r = c.real
        return int(r) if float(r).is_integer() else r
    return [c.real, c.imag]


def _real_str(r: float) -> str:
    return str(int(r)) if float(r).is_integer() else repr(float(r))


def _num_str(c: complex, signed: bool) -> str:
    if c.imag == 0:
        s = _real_str(c.real)
    else:
        im = f"{_real_str(c.imag)}j"
        s = im if c.real == 0 else f"{_real_str(c.real)}{'' if im.startswith('-') else '+'}{im}"
    if signed and not s.startswith("-"):
        s = "+" + s
    return s


A = AffineExpr
