"""Distance monoids and their Dedekind-MacNeille completion.

Three kinds of instance are supported:

* ``FiniteChain`` -- an explicit finite chain with an addition table; every
  property is computed by exhaustion.
* ``ExtendedRationals`` -- nonnegative exact rationals plus an absorbing top.
* ``ReversedOrdinals(h)`` -- ordinal notations ``beta <= h`` read in reverse:
  a larger notation is a smaller distance, ``h`` is the zero distance and
  addition is the ordinal minimum.

Values are plain hashable Python objects (element names, ``Fraction``/``TOP``,
``Ordinal``); the instance interprets them.  Infinite meets are only ever
resolved through instance hooks (declared limits of described streams).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

from .ordinals import OMEGA, OMEGA1, Ordinal, SymbolicOrdinalError, ordinal

Value = Any


class MalformedTable(ValueError):
    pass


class NotContinuousAtZero(ValueError):
    pass


class MixedInstances(ValueError):
    pass


class NotAnEmbedding(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class UndecidableComparison(ValueError):
    """Two stream cuts without declared meets cannot be compared exactly."""


class MonoidSyntaxError(ValueError):
    def __init__(self, message: str, lineno: int | None = None, line: str | None = None):
        loc = f"line {lineno}: " if lineno is not None else ""
        tail = f"\n    {line.strip()}" if line is not None else ""
        super().__init__(f"{loc}{message}{tail}")
        self.lineno = lineno
        self.line = line


@dataclass(frozen=True)
class LawReport:
    """Outcome of an exhaustive (or sampled) law check."""

    ok: bool
    law: str | None = None
    witness: tuple | None = None
    detail: str = ""
    checked: int = 0

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return f"all laws pass ({self.checked} instances checked)"
        return f"fail({self.law}, witness {self.witness}): {self.detail}"


def _fail(law, witness, detail, checked) -> LawReport:
    return LawReport(False, law, tuple(witness), detail, checked)


@dataclass(frozen=True)
class Coinit:
    kind: str  # "finite" | "omega" | "uncountable"
    n: int | None = None

    @property
    def infinite(self) -> bool:
        return self.kind != "finite"

    def __str__(self) -> str:
        if self.kind == "finite":
            return f"Finite({self.n})"
        return "Omega" if self.kind == "omega" else "SymbolicUncountable"


COINIT_OMEGA = Coinit("omega")
COINIT_UNCOUNTABLE = Coinit("uncountable")


class _Top:
    """The absorbing top of the extended rationals."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TOP"

    def __str__(self) -> str:
        return "top"

    def __reduce__(self):
        return (_Top, ())


TOP = _Top()


class DistanceMonoid:
    """Common interface; subclasses interpret their own values."""

    kind: str = "abstract"
    zero: Value
    complete: bool = True

    # order ---------------------------------------------------------------
    def le(self, a: Value, b: Value) -> bool:
        raise NotImplementedError

    def lt(self, a: Value, b: Value) -> bool:
        return self.le(a, b) and not self.le(b, a)

    def eq(self, a: Value, b: Value) -> bool:
        return self.le(a, b) and self.le(b, a)

    def is_zero(self, a: Value) -> bool:
        return self.eq(a, self.zero)

    @property
    def top(self) -> Value:
        raise NotImplementedError

    def meet(self, values: Iterable[Value]) -> Value:
        """Meet of a finite family; the empty meet is the top."""
        best = None
        for v in values:
            if best is None or self.lt(v, best):
                best = v
        return self.top if best is None else best

    def join(self, values: Iterable[Value]) -> Value:
        best = self.zero
        for v in values:
            if self.lt(best, v):
                best = v
        return best

    # algebra -------------------------------------------------------------
    def add(self, a: Value, b: Value) -> Value:
        raise NotImplementedError

    def times(self, n: int, a: Value) -> Value:
        acc = self.zero
        for _ in range(n):
            acc = self.add(acc, a)
        return acc

    def contains(self, a: Value) -> bool:
        raise NotImplementedError

    # hooks used by the initial-sequence machinery -------------------------
    def halve(self, a: Value) -> Value:
        """Canonical choice of a nonzero h(a) with 2*h(a) <= a."""
        raise NotContinuousAtZero(f"{self.kind} instance has no halving hook")

    def base_sequence(self, j: int) -> Value:
        """A canonical coinitial omega-sequence of nonzero values."""
        raise NotContinuousAtZero(f"{self.kind} instance has no coinitial sequence")

    def sample(self) -> list[Value]:
        """A finite sample of values used for sampled law checks."""
        raise NotImplementedError

    # text -----------------------------------------------------------------
    def format(self, a: Value) -> str:
        return str(a)

    def parse_value(self, text: str) -> Value:
        raise NotImplementedError

    def completion(self) -> DistanceMonoid:
        """The Dedekind-MacNeille completion; all shipped instances present themselves."""
        return self


class FiniteChain(DistanceMonoid):
    """A finite chain ``e0 < e1 < ... < en`` with an explicit addition table.

    Only the shape of the table is validated here.  The monoid laws are
    checked by :func:`check_monoid_axioms`; operations that need a lawful
    instance call :meth:`require_lawful`.
    """

    kind = "finite"

    def __init__(self, elems: Sequence[str], table: Mapping[tuple[str, str], str]):
        elems = tuple(str(e) for e in elems)
        if not elems:
            raise MalformedTable("a chain needs at least one element")
        if len(set(elems)) != len(elems):
            dup = next(e for e in elems if elems.count(e) > 1)
            raise MalformedTable(f"duplicate element name {dup!r}")
        names = set(elems)
        for a in elems:
            for b in elems:
                if (a, b) not in table:
                    raise MalformedTable(f"table has no entry for {a}+{b}")
                if table[a, b] not in names:
                    raise MalformedTable(f"{a}+{b} = {table[a, b]!r} is not an element")
        extra = set(table) - {(a, b) for a in elems for b in elems}
        if extra:
            raise MalformedTable(f"table entry for unknown pair {sorted(extra)[0]}")
        self.elems = elems
        self.table = {(a, b): table[a, b] for a in elems for b in elems}
        self._index = {e: i for i, e in enumerate(elems)}
        self.zero = elems[0]
        self._lawful: LawReport | None = None

    def __repr__(self) -> str:
        return f"FiniteChain({list(self.elems)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteChain) and self.elems == other.elems and self.table == other.table

    def __hash__(self) -> int:
        return hash(self.elems)

    def index(self, a: str) -> int:
        return self._index[a]

    def le(self, a, b) -> bool:
        return self._index[a] <= self._index[b]

    def lt(self, a, b) -> bool:
        return self._index[a] < self._index[b]

    def eq(self, a, b) -> bool:
        return a == b

    @property
    def top(self):
        return self.elems[-1]

    def add(self, a, b):
        return self.table[a, b]

    def contains(self, a) -> bool:
        return a in self._index

    def nonzero(self) -> tuple[str, ...]:
        return self.elems[1:]

    def sample(self) -> list:
        return list(self.elems)

    def parse_value(self, text: str):
        if text not in self._index:
            raise ValueError(f"unknown element {text!r}")
        return text

    def with_entry(self, a: str, b: str, value: str) -> FiniteChain:
        """A copy with one table entry replaced (used for mutation testing)."""
        table = dict(self.table)
        table[a, b] = value
        return FiniteChain(self.elems, table)

    def require_lawful(self) -> None:
        if self._lawful is None:
            self._lawful = check_monoid_axioms(self)
        if not self._lawful:
            raise MalformedTable(f"not a distance monoid: {self._lawful}")


def clamped_chain(k: int, top: str = "top") -> FiniteChain:
    """The chain ``0 < 1 < ... < k < top`` with addition truncated at ``top``."""
    elems = [str(i) for i in range(k + 1)] + [top]
    table = {}
    for a in elems:
        for b in elems:
            if top in (a, b) or int(a) + int(b) > k:
                table[a, b] = top
            else:
                table[a, b] = str(int(a) + int(b))
    return FiniteChain(elems, table)


def trivial_monoid() -> FiniteChain:
    return FiniteChain(["0"], {("0", "0"): "0"})


class ExtendedRationals(DistanceMonoid):
    """Nonnegative rationals with an absorbing top.

    The instance stands in for its completion: the meets the library needs
    (of nice initial sequences, of finite distance sets, of described
    descending streams) are declared rather than computed.  With
    ``dyadic=True`` the carrier is restricted to dyadic rationals.
    """

    kind = "rational"
    zero = Fraction(0)

    def __init__(self, dyadic: bool = False):
        self.dyadic = dyadic
        self.complete = not dyadic

    def __repr__(self) -> str:
        return "ExtendedRationals(dyadic=True)" if self.dyadic else "ExtendedRationals()"

    def __eq__(self, other) -> bool:
        return isinstance(other, ExtendedRationals) and self.dyadic == other.dyadic

    def __hash__(self) -> int:
        return hash(("rational", self.dyadic))

    declared_continuous = True

    def le(self, a, b) -> bool:
        if b is TOP:
            return True
        if a is TOP:
            return False
        return a <= b

    def lt(self, a, b) -> bool:
        if a is TOP:
            return False
        if b is TOP:
            return True
        return a < b

    def eq(self, a, b) -> bool:
        return a == b

    @property
    def top(self):
        return TOP

    def add(self, a, b):
        if a is TOP or b is TOP:
            return TOP
        return a + b

    def times(self, n: int, a):
        if n == 0:
            return self.zero
        return TOP if a is TOP else a * n

    def contains(self, a) -> bool:
        if a is TOP:
            return True
        if not isinstance(a, (Fraction, int)) or isinstance(a, bool) or a < 0:
            return False
        if self.dyadic:
            d = Fraction(a).denominator
            return d & (d - 1) == 0
        return True

    def halve(self, a):
        if a is TOP:
            return Fraction(1)
        if a == 0:
            raise ValueError("cannot halve zero")
        return Fraction(a) / 2

    def base_sequence(self, j: int):
        return Fraction(1, 2 ** j)

    def sample(self) -> list:
        return [Fraction(0), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2),
                Fraction(1), Fraction(3, 2), Fraction(2), TOP]

    def format(self, a) -> str:
        return "top" if a is TOP else str(a)

    def parse_value(self, text: str):
        t = text.strip()
        if t in ("top", "⊤", "inf"):
            return TOP
        v = Fraction(t)
        if v < 0 or not self.contains(v):
            raise ValueError(f"{text!r} is not a value of {self!r}")
        return v


class ReversedOrdinals(DistanceMonoid):
    """Ordinal notations ``beta <= height`` ordered in reverse.

    The distance named by notation ``beta`` shrinks as ``beta`` grows, the
    zero distance is ``height`` itself, the top distance is notation 0 and
    ``a + b`` is the reversed-order join, i.e. the smaller notation.
    """

    kind = "revordinal"

    def __init__(self, height):
        self.height = ordinal(height)
        if self.height.is_zero:
            raise ValueError("height must be positive")
        self.zero = self.height

    def __repr__(self) -> str:
        return f"ReversedOrdinals({str(self.height)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ReversedOrdinals) and self.height == other.height

    def __hash__(self) -> int:
        return hash(("revordinal", self.height))

    @property
    def declared_continuous(self) -> bool:
        return self.height.is_limit

    def le(self, a, b) -> bool:
        return a >= b

    def lt(self, a, b) -> bool:
        return a > b

    def eq(self, a, b) -> bool:
        return a == b

    @property
    def top(self):
        return Ordinal.coerce(0)

    def add(self, a, b):
        return a if a <= b else b

    def times(self, n: int, a):
        return self.zero if n == 0 else a

    def contains(self, a) -> bool:
        return isinstance(a, Ordinal) and a <= self.height

    def halve(self, a):
        if a == self.height:
            raise ValueError("cannot halve zero")
        nxt = a.successor()
        if nxt == self.height:
            raise NotContinuousAtZero(f"{a} is the least nonzero distance")
        return nxt

    def base_sequence(self, j: int):
        h = self.height
        if h.symbolic:
            return Ordinal.coerce(j + 1)
        if not h.is_limit:
            raise NotContinuousAtZero(f"height {h} is a successor")
        return h.fundamental(j + 1)

    def sample(self) -> list:
        h = self.height
        pts = {Ordinal.coerce(k) for k in range(4)} | {h}
        if not h.is_finite:
            for k in range(3):
                try:
                    pts.add(h.fundamental(k))
                    pts.add(h.fundamental(k) + 1)
                except (SymbolicOrdinalError, ValueError):
                    pass
            if h.symbolic:
                pts |= {OMEGA, OMEGA + 1, OMEGA.times(2)}
        return sorted((p for p in pts if p <= h), reverse=True)

    def parse_value(self, text: str):
        v = ordinal(text)
        if not v <= self.height:
            raise ValueError(f"{text!r} exceeds height {self.height}")
        return v


# ---------------------------------------------------------------------------
# Law checking, continuity, coinitiality
# ---------------------------------------------------------------------------


def check_monoid_axioms(instance: DistanceMonoid, sample: Sequence[Value] | None = None) -> LawReport:
    """Check the distance-monoid laws, in a fixed order, reporting the first violation.

    Order: identity, minimality of 0, monotonicity (witness ``(a, b, c)``
    with ``a <= b``), commutativity, associativity, meet-distributivity.

    Finite chains are checked exhaustively.  For infinite instances the
    laws are checked over ``sample`` (default: ``instance.sample()``).
    Meet-distributivity ranges over the suffix sets of the (sampled) chain,
    including the empty suffix whose meet is the top: in a finite chain
    every meet is the meet of a suffix.
    """
    m = instance
    elems = list(sample) if sample is not None else m.sample()
    elems.sort(key=_sort_key(m))
    n = 0
    zero = m.zero
    if not any(m.eq(e, zero) for e in elems):
        elems.insert(0, zero)

    for a in elems:
        n += 1
        if not m.eq(m.add(zero, a), a) or not m.eq(m.add(a, zero), a):
            return _fail("identity", (a,), f"0+{_f(m, a)} = {_f(m, m.add(zero, a))}, "
                         f"{_f(m, a)}+0 = {_f(m, m.add(a, zero))}", n)
        if not m.le(zero, a):
            return _fail("order", (a,), f"0 is not below {_f(m, a)}", n)

    for a, b in itertools.product(elems, repeat=2):
        if not m.le(a, b):
            continue
        for c in elems:
            n += 1
            if not m.le(m.add(c, a), m.add(c, b)):
                return _fail("monotonicity", (a, b, c),
                             f"{_f(m, a)} <= {_f(m, b)} but {_f(m, c)}+{_f(m, a)} = {_f(m, m.add(c, a))} "
                             f"> {_f(m, c)}+{_f(m, b)} = {_f(m, m.add(c, b))}", n)
            if not m.le(m.add(a, c), m.add(b, c)):
                return _fail("monotonicity", (a, b, c),
                             f"{_f(m, a)} <= {_f(m, b)} but {_f(m, a)}+{_f(m, c)} = {_f(m, m.add(a, c))} "
                             f"> {_f(m, b)}+{_f(m, c)} = {_f(m, m.add(b, c))}", n)

    for a, b in itertools.product(elems, repeat=2):
        n += 1
        if not m.eq(m.add(a, b), m.add(b, a)):
            return _fail("commutativity", (a, b),
                         f"{_f(m, a)}+{_f(m, b)} = {_f(m, m.add(a, b))} but "
                         f"{_f(m, b)}+{_f(m, a)} = {_f(m, m.add(b, a))}", n)

    for a, b, c in itertools.product(elems, repeat=3):
        n += 1
        left, right = m.add(m.add(a, b), c), m.add(a, m.add(b, c))
        if not m.eq(left, right):
            return _fail("associativity", (a, b, c),
                         f"({_f(m, a)}+{_f(m, b)})+{_f(m, c)} = {_f(m, left)} but "
                         f"{_f(m, a)}+({_f(m, b)}+{_f(m, c)}) = {_f(m, right)}", n)

    suffixes = [elems[k:] for k in range(len(elems) + 1)]
    for b in elems:
        for suffix in suffixes:
            n += 1
            left = m.add(b, m.meet(suffix))
            right = m.meet(m.add(a, b) for a in suffix)
            if not m.eq(left, right):
                label = _f(m, suffix[0]) if suffix else "{}"
                return _fail("meet-distributivity", (b, suffix[0] if suffix else None),
                             f"{_f(m, b)} + meet(A) = {_f(m, left)} but meet(a+{_f(m, b)}) = "
                             f"{_f(m, right)} for A = suffix from {label}", n)
    return LawReport(True, checked=n)


def _f(m: DistanceMonoid, v) -> str:
    return m.format(v)


def _sort_key(m: DistanceMonoid):
    from functools import cmp_to_key

    return cmp_to_key(lambda a, b: -1 if m.lt(a, b) else (1 if m.lt(b, a) else 0))


def is_continuous_at_zero(instance: DistanceMonoid) -> bool:
    """Whether the meet of all sums of two nonzero values is 0.

    Finite chains compute the minimum over nonzero pairs.  A chain with no
    nonzero element is reported as not continuous: it admits no nonempty
    domain for a Cauchy sequence.  Other instances return their declared flag.
    """
    if isinstance(instance, FiniteChain):
        instance.require_lawful()
        nz = instance.nonzero()
        if not nz:
            return False
        least = instance.meet(instance.add(a, b) for a in nz for b in nz)
        return instance.is_zero(least)
    return bool(instance.declared_continuous)


def coinitiality(instance: DistanceMonoid) -> Coinit:
    if isinstance(instance, FiniteChain):
        instance.require_lawful()
        result = Coinit("finite", 1 if instance.nonzero() else 0)
    elif isinstance(instance, ExtendedRationals):
        result = COINIT_OMEGA
    elif isinstance(instance, ReversedOrdinals):
        cf = instance.height.cofinality()
        result = {"omega": COINIT_OMEGA, "uncountable": COINIT_UNCOUNTABLE}.get(cf) or Coinit("finite", 1)
    else:
        raise TypeError(f"unknown instance {instance!r}")
    if is_continuous_at_zero(instance):
        # a continuous instance has infinite regular coinitiality
        assert result.infinite, (instance, result)
    return result


# ---------------------------------------------------------------------------
# Initial sequences
# ---------------------------------------------------------------------------


class InitialSequence:
    """A strictly order-reversing map from indices ``i < length`` into nonzero values.

    Indices are ints for countable lengths up to omega, and ``Ordinal``
    notations otherwise.  Entries are produced lazily and cached.
    """

    def __init__(self, monoid: DistanceMonoid, length, entry: Callable[[Any], Value], factor: int):
        self.monoid = monoid
        self.length = ordinal(length)
        self._entry = entry
        self.factor = factor
        self._cache: dict = {}

    def __repr__(self) -> str:
        return f"InitialSequence({self.monoid!r}, length={self.length}, factor={self.factor})"

    def __call__(self, i) -> Value:
        if not ordinal(i) < self.length:
            raise IndexError(f"index {i} is not below {self.length}")
        key = int(i) if ordinal(i).is_finite else ordinal(i)
        if key not in self._cache:
            self._cache[key] = self._entry(key)
        return self._cache[key]

    def __len__(self) -> int:
        if not self.length.is_finite:
            raise TypeError("infinite initial sequence has no len()")
        return int(self.length)

    def __iter__(self):
        if self.length.is_finite:
            return (self(i) for i in range(int(self.length)))
        return (self(i) for i in itertools.count())

    def prefix(self, n: int) -> tuple:
        return tuple(self(i) for i in range(n))

    def check(self, n: int, factor: int | None = None) -> LawReport:
        """Positivity, strict decrease and ``factor*a(k+1) <= a(k)`` on the first n entries."""
        m = self.monoid
        factor = self.factor if factor is None else factor
        n = min(n, int(self.length)) if self.length.is_finite else n
        for k in range(n):
            if m.is_zero(self(k)):
                return _fail("positivity", (k,), f"entry {k} is zero", k)
            if k + 1 < n:
                a, b = self(k), self(k + 1)
                if not m.lt(b, a):
                    return _fail("strictly-decreasing", (k,), f"entry {k + 1} is not below entry {k}", k)
                if not m.le(m.times(factor, b), a):
                    return _fail("niceness", (k,), f"{factor}*entry({k + 1}) exceeds entry({k})", k)
        return LawReport(True, checked=n)

    def index_below(self, a: Value, limit: int = 4096) -> int:
        """Least index whose entry is <= a (coinitiality spot check)."""
        for i in range(limit):
            if self.length.is_finite and i >= int(self.length):
                break
            if self.monoid.le(self(i), a):
                return i
        raise LookupError(f"no entry below {self.monoid.format(a)} within {limit} indices")


def nice_initial_sequence(instance: DistanceMonoid, factor: int = 4, length=OMEGA) -> InitialSequence:
    """A nice initial sequence with ``factor * a(k+1) <= a(k)``.

    For countable coinitiality: ``a(0)`` is the first entry of the
    instance's canonical coinitial sequence ``b``; ``a(k+1)`` is the first
    later ``b(j)`` lying below ``h^m(a(k))``, where ``h`` is the canonical
    halving hook iterated until ``factor * h^m(a(k)) <= a(k)``.

    For the symbolic uncountable instance the iteration has the closed form
    ``a(i) = distance at notation 1+i``: halving is the successor notation
    and ``n*a = a``, so every step picks the very next notation, and limit
    stages take meets.
    """
    if factor < 1:
        raise ValueError("factor must be positive")
    if not is_continuous_at_zero(instance):
        raise NotContinuousAtZero(f"{instance!r} is not continuous at 0: no initial sequence exists")
    length = ordinal(length)
    desc = coinitiality(instance)
    if desc.kind == "omega" and not length <= OMEGA:
        raise ValueError(f"length {length} exceeds the coinitiality omega of {instance!r}")
    if desc.kind == "uncountable":
        if not length <= OMEGA1:
            raise ValueError(f"length {length} exceeds omega-1")
        return InitialSequence(instance, length, lambda i: Ordinal.coerce(1) + ordinal(i), factor)

    m = instance
    picks: list[tuple[int, Value]] = []

    def target(a):
        h = a
        for _ in range(4096):
            h = m.halve(h)
            if m.le(m.times(factor, h), a):
                return h
        raise NotContinuousAtZero("halving hook failed to reach the niceness bound")

    def entry(k: int):
        while len(picks) <= k:
            if not picks:
                picks.append((0, m.base_sequence(0)))
                continue
            j, a = picks[-1]
            bound = target(a)
            for j2 in range(j + 1, j + 1 + 100_000):
                b = m.base_sequence(j2)
                if m.le(b, bound):
                    picks.append((j2, b))
                    break
            else:
                raise NotContinuousAtZero("base sequence does not descend below the halving target")
        return picks[k][1]

    return InitialSequence(m, length, entry, factor)


# ---------------------------------------------------------------------------
# Dedekind-MacNeille completion
# ---------------------------------------------------------------------------


class Cut:
    """An element of the completion: the meet of a set of base values.

    Either a finite generator set (exactly decidable) or a descending
    stream ``n -> bound(n)`` with an optional declared meet.  A stream
    without a declared meet may have no meet in the base instance; such a
    cut is still comparable against base values semi-decidably via
    :meth:`exceeded_by`.
    """

    __slots__ = ("monoid", "generators", "stream", "declared_meet")

    def __init__(self, monoid: DistanceMonoid, generators=None, stream=None, declared_meet=None):
        if (generators is None) == (stream is None):
            raise ValueError("a cut has either generators or a stream")
        self.monoid = monoid
        self.generators = None if generators is None else tuple(generators)
        # approximants are pure, so repeated comparisons reuse them
        self.stream = None if stream is None else functools.lru_cache(maxsize=None)(stream)
        self.declared_meet = declared_meet
        if self.generators is not None:
            bad = [g for g in self.generators if not monoid.contains(g)]
            if bad:
                raise ValueError(f"{bad[0]!r} is not a value of {monoid!r}")

    @classmethod
    def principal(cls, monoid: DistanceMonoid, a: Value) -> Cut:
        return cls(monoid, generators=(a,))

    @classmethod
    def of(cls, monoid: DistanceMonoid, generators: Iterable[Value]) -> Cut:
        return cls(monoid, generators=tuple(generators))

    @classmethod
    def from_stream(cls, monoid: DistanceMonoid, stream: Callable[[int], Value], meet=None) -> Cut:
        return cls(monoid, stream=stream, declared_meet=meet)

    @property
    def is_finite(self) -> bool:
        return self.generators is not None

    @property
    def resolved(self) -> bool:
        return self.is_finite or self.declared_meet is not None

    def meet_value(self) -> Value:
        if self.is_finite:
            return self.monoid.meet(self.generators)
        if self.declared_meet is None:
            raise UndecidableComparison("stream cut has no declared meet")
        return self.declared_meet

    def bound(self, n: int) -> Value:
        """The n-th upper approximant (constant for finite cuts)."""
        if self.is_finite:
            return self.monoid.meet(self.generators)
        return self.stream(n)

    def exceeded_by(self, q: Value, depth: int = 64) -> bool:
        """Whether ``q`` lies strictly above the cut.

        Exact when the cut is resolved; otherwise witnessed by some
        approximant ``bound(n) < q`` with ``n < depth``.
        """
        m = self.monoid
        if self.resolved:
            return m.lt(self.meet_value(), q)
        return any(m.lt(self.stream(n), q) for n in range(depth))

    def le(self, other: Cut) -> bool:
        _same(self, other)
        return self.monoid.le(self.meet_value(), other.meet_value())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cut):
            return NotImplemented
        if self.monoid != other.monoid:
            return False
        if self.resolved and other.resolved:
            return self.monoid.eq(self.meet_value(), other.meet_value())
        return self is other

    def __hash__(self) -> int:
        return hash(self.meet_value()) if self.resolved else id(self)

    def __repr__(self) -> str:
        if self.is_finite:
            return f"Cut({[self.monoid.format(g) for g in self.generators]})"
        meet = "?" if self.declared_meet is None else self.monoid.format(self.declared_meet)
        return f"Cut(stream, meet={meet})"


def _same(a: Cut, b: Cut) -> None:
    if a.monoid != b.monoid:
        raise MixedInstances(f"{a.monoid!r} vs {b.monoid!r}")


def completion_add(a: Cut, b: Cut) -> Cut:
    """Addition in the completion: the meet of all ``a' + b'`` with ``a' >= a``, ``b' >= b``.

    Finite cuts add generator-wise; stream cuts add approximant-wise, and
    the declared meets add when both are present (addition distributes over
    meets).
    """
    _same(a, b)
    m = a.monoid
    if a.is_finite and b.is_finite:
        return Cut.of(m, {m.add(x, y) for x in a.generators for y in b.generators})
    meet = None
    if a.resolved and b.resolved:
        meet = m.add(a.meet_value(), b.meet_value())
    return Cut.from_stream(m, lambda n: m.add(a.bound(n), b.bound(n)), meet=meet)


def embed_into_complete(base: DistanceMonoid, target: DistanceMonoid, i,
                        sample: Sequence[Value] | None = None) -> Callable[[Cut], Cut]:
    """Extend an embedding ``i: base -> target`` to the completion of ``base``.

    ``i`` (a mapping or a callable) is verified on a finite sample to fix 0,
    be strictly order preserving and preserve addition.  The extension
    sends a cut to the cut of the images of its generators, i.e. to the
    meet of those images in the complete target.
    """
    if not target.complete:
        raise NotAnEmbedding(f"target {target!r} is not declared complete")
    fn = i.__getitem__ if isinstance(i, Mapping) else i
    pts = list(sample) if sample is not None else base.sample()
    if not target.eq(fn(base.zero), target.zero):
        raise NotAnEmbedding("0 is not sent to 0", (base.zero,))
    for a, b in itertools.product(pts, repeat=2):
        if base.lt(a, b) and not target.lt(fn(a), fn(b)):
            raise NotAnEmbedding(f"order not preserved at {base.format(a)} < {base.format(b)}", (a, b))
        s = base.add(a, b)
        if not target.eq(fn(s), target.add(fn(a), fn(b))):
            raise NotAnEmbedding(
                f"i({base.format(a)}+{base.format(b)}) = {target.format(fn(s))} but "
                f"i({base.format(a)})+i({base.format(b)}) = {target.format(target.add(fn(a), fn(b)))}",
                (a, b))

    def j(cut: Cut) -> Cut:
        if cut.monoid != base:
            raise MixedInstances(f"cut over {cut.monoid!r}, expected {base!r}")
        if cut.is_finite:
            return Cut.of(target, (fn(g) for g in cut.generators))
        meet = fn(cut.declared_meet) if cut.declared_meet is not None else None
        return Cut.from_stream(target, lambda n: fn(cut.bound(n)), meet=meet)

    return j


# ---------------------------------------------------------------------------
# Description files
# ---------------------------------------------------------------------------


def parse_monoid(text: str) -> DistanceMonoid:
    """Parse a monoid description.

    ::

        monoid finite
        elems 0 1 2 top
        0: 0 1 2 top
        1: 1 2 top top
        ...

    ``monoid rational`` (optionally ``monoid rational dyadic``) and
    ``monoid revordinal`` followed by ``height w^2+w*3+5`` are the other
    forms.  ``#`` starts a comment.
    """
    lines = [(k + 1, raw, raw.split("#", 1)[0].strip()) for k, raw in enumerate(text.splitlines())]
    lines = [(k, raw, s) for k, raw, s in lines if s]
    if not lines:
        raise MonoidSyntaxError("empty monoid description")
    k, raw, head = lines[0]
    words = head.split()
    if words[0] != "monoid" or len(words) < 2:
        raise MonoidSyntaxError("expected header 'monoid finite|rational|revordinal'", k, raw)
    kind, rest = words[1], lines[1:]
    if kind == "rational":
        if rest:
            raise MonoidSyntaxError("unexpected content after rational header", rest[0][0], rest[0][1])
        return ExtendedRationals(dyadic=words[2:] == ["dyadic"])
    if kind == "revordinal":
        if len(rest) != 1 or not rest[0][2].startswith("height "):
            where = rest[0] if rest else (k, raw)
            raise MonoidSyntaxError("expected a single 'height <ordinal>' line", where[0], where[1])
        try:
            return ReversedOrdinals(ordinal(rest[0][2][len("height "):]))
        except ValueError as exc:
            raise MonoidSyntaxError(str(exc), rest[0][0], rest[0][1]) from None
    if kind != "finite":
        raise MonoidSyntaxError(f"unknown monoid kind {kind!r}", k, raw)
    if not rest or not rest[0][2].startswith("elems"):
        where = rest[0] if rest else (k, raw)
        raise MonoidSyntaxError("expected 'elems e0 e1 ...'", where[0], where[1])
    ek, eraw, eline = rest[0]
    elems = eline.split()[1:]
    if len(set(elems)) != len(elems):
        raise MonoidSyntaxError("duplicate element name", ek, eraw)
    rows = rest[1:]
    if len(rows) != len(elems):
        where = rows[-1] if rows else rest[0]
        raise MonoidSyntaxError(f"expected {len(elems)} table rows, found {len(rows)}", where[0], where[1])
    table = {}
    seen = set()
    for (rk, rraw, row), default in zip(rows, elems):
        label, sep, body = row.partition(":")
        name, entries = (label.strip(), body.split()) if sep else (default, row.split())
        if name not in elems or name in seen:
            raise MonoidSyntaxError(f"bad or repeated row label {name!r}", rk, rraw)
        seen.add(name)
        if len(entries) != len(elems):
            raise MonoidSyntaxError(f"row {name} has {len(entries)} entries, expected {len(elems)}", rk, rraw)
        for b, v in zip(elems, entries):
            if v not in elems:
                raise MonoidSyntaxError(f"{v!r} is not an element", rk, rraw)
            table[name, b] = v
    return FiniteChain(elems, table)


def format_monoid(instance: DistanceMonoid) -> str:
    if isinstance(instance, FiniteChain):
        out = ["monoid finite", "elems " + " ".join(instance.elems)]
        for a in instance.elems:
            out.append(f"{a}: " + " ".join(instance.table[a, b] for b in instance.elems))
        return "\n".join(out) + "\n"
    if isinstance(instance, ExtendedRationals):
        return "monoid rational dyadic\n" if instance.dyadic else "monoid rational\n"
    if isinstance(instance, ReversedOrdinals):
        return f"monoid revordinal\nheight {instance.height}\n"
    raise TypeError(f"cannot serialize {instance!r}")


def shipped_instances() -> dict[str, DistanceMonoid]:
    """The four reference instances."""
    return {
        "chain4": clamped_chain(2),
        "trivial": trivial_monoid(),
        "rational": ExtendedRationals(),
        "revordinal-omega": ReversedOrdinals(OMEGA),
    }
