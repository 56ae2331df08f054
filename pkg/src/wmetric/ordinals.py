"""Ordinal notations: Cantor normal form below omega^omega, plus a symbolic omega_1.

A CNF term is a finite sum ``w^e1*c1 + ... + w^ek*ck`` with natural exponents
``e1 > ... > ek`` and positive natural coefficients.  The symbolic notation
``OMEGA1`` compares above every CNF term and cannot be enumerated below;
arithmetic that would need to look underneath it raises ``SymbolicOrdinalError``.
"""

from __future__ import annotations

import re
from functools import total_ordering
from typing import Iterator, Union


class SymbolicOrdinalError(ValueError):
    """An operation would have to enumerate below the symbolic omega_1."""


class OrdinalSyntaxError(ValueError):
    pass


IntoOrdinal = Union["Ordinal", int]


@total_ordering
class Ordinal:
    __slots__ = ("terms", "symbolic", "_hash")

    def __init__(self, terms=(), symbolic: bool = False):
        terms = tuple((int(e), int(c)) for e, c in terms)
        if symbolic and terms:
            raise ValueError("the symbolic ordinal carries no CNF terms")
        for (e, c) in terms:
            if e < 0 or c <= 0:
                raise ValueError(f"bad CNF term w^{e}*{c}")
        for (e1, _), (e2, _) in zip(terms, terms[1:]):
            if e1 <= e2:
                raise ValueError("CNF exponents must be strictly decreasing")
        self.terms = terms
        self.symbolic = symbolic
        self._hash = hash((terms, symbolic))

    # construction ---------------------------------------------------------

    @classmethod
    def coerce(cls, value: IntoOrdinal) -> Ordinal:
        if isinstance(value, Ordinal):
            return value
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"cannot interpret {value!r} as an ordinal")
        if value < 0:
            raise ValueError("ordinals are nonnegative")
        return cls(((0, value),)) if value else ZERO

    @classmethod
    def omega_power(cls, e: int, c: int = 1) -> Ordinal:
        return cls(((e, c),)) if c else ZERO

    @classmethod
    def parse(cls, text: str) -> Ordinal:
        """Parse ``w^2+w*3+5``-style text; ``omega-1``/``Omega``/``w1`` give OMEGA1."""
        s = text.strip().replace(" ", "").replace("omega", "w").replace("ω", "w")
        if s in ("w-1", "W", "w1", "w_1", "Ω"):
            return OMEGA1
        if not s:
            raise OrdinalSyntaxError("empty ordinal notation")
        acc = ZERO
        for part in s.split("+"):
            m = re.fullmatch(r"(?:w(?:\^(\d+))?(?:\*(\d+))?|(\d+))", part)
            if not m:
                raise OrdinalSyntaxError(f"cannot parse ordinal term {part!r} in {text!r}")
            if m.group(3) is not None:
                term = cls.coerce(int(m.group(3)))
            else:
                e = int(m.group(1)) if m.group(1) is not None else 1
                c = int(m.group(2)) if m.group(2) is not None else 1
                term = cls.omega_power(e, c)
            acc = acc + term
        return acc

    # predicates -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms and not self.symbolic

    @property
    def is_finite(self) -> bool:
        return not self.symbolic and (not self.terms or self.terms[0][0] == 0)

    @property
    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0] == 0

    @property
    def is_limit(self) -> bool:
        return self.symbolic or (bool(self.terms) and self.terms[-1][0] > 0)

    def __int__(self) -> int:
        if not self.is_finite:
            raise ValueError(f"{self} is not finite")
        return self.terms[0][1] if self.terms else 0

    def __index__(self) -> int:
        return int(self)

    def cofinality(self) -> str:
        """``'0'``, ``'1'`` (successor), ``'omega'`` or ``'uncountable'``."""
        if self.symbolic:
            return "uncountable"
        if self.is_zero:
            return "0"
        return "1" if self.is_successor else "omega"

    # order ----------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and not isinstance(other, bool):
            other = Ordinal.coerce(other) if other >= 0 else None
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.symbolic == other.symbolic and self.terms == other.terms

    def __lt__(self, other) -> bool:
        other = Ordinal.coerce(other)
        if self.symbolic or other.symbolic:
            return other.symbolic and not self.symbolic
        for (e1, c1), (e2, c2) in zip(self.terms, other.terms):
            if e1 != e2:
                return e1 < e2
            if c1 != c2:
                return c1 < c2
        return len(self.terms) < len(other.terms)

    def __hash__(self) -> int:
        if self.is_finite:
            return hash(int(self))
        return self._hash

    # arithmetic -----------------------------------------------------------

    def __add__(self, other: IntoOrdinal) -> Ordinal:
        other = Ordinal.coerce(other)
        if other.is_zero:
            return self
        if other.symbolic:
            return OMEGA1
        if self.symbolic:
            raise SymbolicOrdinalError("no notation for omega_1 + beta")
        lead_e, lead_c = other.terms[0]
        kept = [t for t in self.terms if t[0] > lead_e]
        same = [c for e, c in self.terms if e == lead_e]
        head = (lead_e, lead_c + (same[0] if same else 0))
        return Ordinal(kept + [head] + list(other.terms[1:]))

    def __radd__(self, other: int) -> Ordinal:
        return Ordinal.coerce(other) + self

    def times(self, n: int) -> Ordinal:
        """Right multiplication by a natural number, ``self * n``."""
        if n < 0:
            raise ValueError("negative multiplier")
        if n == 0 or self.is_zero:
            return ZERO
        if self.symbolic:
            return self
        (e, c), rest = self.terms[0], self.terms[1:]
        return Ordinal(((e, c * n),) + rest)

    def natural_sum(self, other: IntoOrdinal) -> Ordinal:
        other = Ordinal.coerce(other)
        if self.symbolic or other.symbolic:
            return OMEGA1
        coef: dict[int, int] = {}
        for e, c in self.terms + other.terms:
            coef[e] = coef.get(e, 0) + c
        return Ordinal(sorted(coef.items(), reverse=True))

    def successor(self) -> Ordinal:
        return self + 1

    def predecessor(self) -> Ordinal:
        if not self.is_successor:
            raise ValueError(f"{self} has no predecessor")
        e, c = self.terms[-1]
        rest = self.terms[:-1] + (((0, c - 1),) if c > 1 else ())
        return Ordinal(rest)

    def fundamental(self, n: int) -> Ordinal:
        """The n-th entry of the canonical omega-sequence cofinal in a countable limit."""
        if self.symbolic:
            raise SymbolicOrdinalError("omega_1 has no countable cofinal sequence")
        if not self.is_limit:
            raise ValueError(f"{self} is not a limit ordinal")
        e, c = self.terms[-1]
        base = Ordinal(self.terms[:-1] + (((e, c - 1),) if c > 1 else ()))
        return base + Ordinal.omega_power(e - 1, n)

    def below(self) -> Iterator[Ordinal]:
        """Enumerate every ordinal below a finite notation (omega for infinite ones is refused)."""
        if not self.is_finite:
            raise SymbolicOrdinalError(f"refusing to enumerate below {self}")
        return (Ordinal.coerce(k) for k in range(int(self)))

    # display --------------------------------------------------------------

    def __str__(self) -> str:
        if self.symbolic:
            return "omega-1"
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            if e == 0:
                parts.append(str(c))
            else:
                w = "w" if e == 1 else f"w^{e}"
                parts.append(w if c == 1 else f"{w}*{c}")
        return "+".join(parts)

    def __repr__(self) -> str:
        return f"Ordinal({str(self)!r})"


ZERO = Ordinal()
ONE = Ordinal(((0, 1),))
OMEGA = Ordinal(((1, 1),))
OMEGA1 = Ordinal(symbolic=True)


def ordinal(value) -> Ordinal:
    """Coerce an int, an Ordinal, or CNF text."""
    if isinstance(value, str):
        return Ordinal.parse(value)
    return Ordinal.coerce(value)
