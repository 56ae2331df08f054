"""W-metric spaces, Cauchy sequences and the Cauchy completion.

Distances need not be symmetric: the identity law only asks that
``d(x, y)`` and ``d(y, x)`` both vanish exactly when ``x == y``.

Cauchy sequences are always stored on the range of an initial sequence
(index ``i`` stands for the distance ``alpha(i)``).  The distance between two
sequences is a sup-inf over infinite index sets, so :func:`seq_distance`
returns an interval that collapses whenever the structure of the sequences
pins the value down: both sequences have stabilised, both have limits the
presentation can resolve, or one is a restriction of the other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

from .monoid import (
    DistanceMonoid,
    InitialSequence,
    LawReport,
    MonoidSyntaxError,
    is_continuous_at_zero,
    parse_monoid,
    shipped_instances,
)

Point = Any


class MalformedMatrix(ValueError):
    pass


class DifferentSpaces(ValueError):
    pass


class NotNonExpanding(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class SpaceSyntaxError(MonoidSyntaxError):
    pass


# verdict statuses
EQUIV, DISTINCT, UNKNOWN = "equiv", "distinct", "unknown"
YES, NO = "yes", "no"
DENSE, NOT_DENSE = "dense", "not-dense"


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Any = None
    detail: str = ""

    def __str__(self) -> str:
        w = f" {self.witness}" if self.witness is not None else ""
        return f"{self.status}{w}"


class WSpace:
    """Base class.  ``complete`` is True, False, or None (not determined)."""

    kind = "abstract"
    is_finite = False

    def __init__(self, monoid: DistanceMonoid, complete: bool | None = None):
        self.monoid = monoid
        self.complete = complete

    def d(self, x: Point, y: Point):
        raise NotImplementedError

    def points(self) -> Iterator[Point]:
        raise NotImplementedError

    def contains(self, x: Point) -> bool:
        raise NotImplementedError

    def is_base(self, x: Point) -> bool:
        return True

    def resolve(self, seq: CauchySequence) -> Point | None:
        """The limit of ``seq`` when the presentation can name it."""
        return None

    def resolve_branch(self, chain: Sequence[Point]) -> Point | None:
        """A limit point through which a surviving search branch continues."""
        return None

    def representative(self, x: Point, alpha: InitialSequence) -> CauchySequence | None:
        """A Cauchy sequence of base points converging to ``x``."""
        if self.is_base(x):
            return constant(self, alpha, x)
        return None


class FiniteSpace(WSpace):
    kind = "finite"
    is_finite = True

    def __init__(self, monoid: DistanceMonoid, points: Sequence[Point], matrix, complete: bool | None = None):
        super().__init__(monoid, complete)
        pts = tuple(points)
        if len(set(pts)) != len(pts):
            raise MalformedMatrix("duplicate point names")
        if not pts:
            raise MalformedMatrix("a space needs at least one point")
        table = {}
        if isinstance(matrix, Mapping):
            for x in pts:
                for y in pts:
                    if (x, y) not in matrix:
                        raise MalformedMatrix(f"no distance given for ({x}, {y})")
                    table[x, y] = matrix[x, y]
        else:
            rows = [list(r) for r in matrix]
            if len(rows) != len(pts) or any(len(r) != len(pts) for r in rows):
                raise MalformedMatrix(f"expected a {len(pts)}x{len(pts)} matrix")
            for x, row in zip(pts, rows):
                for y, v in zip(pts, row):
                    table[x, y] = v
        for (x, y), v in table.items():
            if not monoid.contains(v):
                raise MalformedMatrix(f"d({x}, {y}) = {v!r} is not a value of {monoid!r}")
        self._points = pts
        self.matrix = table

    def __repr__(self) -> str:
        return f"FiniteSpace({list(self._points)}, over={self.monoid!r})"

    def d(self, x, y):
        return self.matrix[x, y]

    def points(self):
        return iter(self._points)

    @property
    def point_list(self) -> tuple:
        return self._points

    def contains(self, x) -> bool:
        return x in self._points

    def with_monoid(self, monoid: DistanceMonoid, complete: bool | None = None) -> FiniteSpace:
        return FiniteSpace(monoid, self._points, self.matrix, complete=complete)

    def realized_nonzero(self) -> list:
        m = self.monoid
        return [v for v in self.matrix.values() if not m.is_zero(v)]


class LazySpace(WSpace):
    """A space given by a point enumerator and a distance oracle.

    ``resolver`` names limits of Cauchy sequences, ``branch_resolver``
    continues a finite search branch to a limit point, ``completer`` builds
    the Cauchy completion and ``representer`` supplies a base-point sequence
    converging to a limit point.
    """

    kind = "lazy"

    def __init__(self, monoid, distance: Callable, enumerate: Callable[[], Iterable], contains: Callable,
                 *, is_base: Callable | None = None, resolver=None, branch_resolver=None,
                 completer=None, representer=None, complete: bool | None = None, name: str = "lazy"):
        super().__init__(monoid, complete)
        self._distance = distance
        self._enumerate = enumerate
        self._contains = contains
        self._is_base = is_base
        self._resolver = resolver
        self._branch_resolver = branch_resolver
        self.completer = completer
        self._representer = representer
        self.name = name

    def __repr__(self) -> str:
        return f"LazySpace({self.name}, complete={self.complete})"

    def d(self, x, y):
        return self._distance(x, y)

    def points(self):
        return iter(self._enumerate())

    def contains(self, x) -> bool:
        return self._contains(x)

    def is_base(self, x) -> bool:
        return True if self._is_base is None else self._is_base(x)

    def resolve(self, seq):
        return None if self._resolver is None else self._resolver(seq)

    def resolve_branch(self, chain):
        return None if self._branch_resolver is None else self._branch_resolver(chain)

    def representative(self, x, alpha):
        if self.is_base(x):
            return constant(self, alpha, x)
        return None if self._representer is None else self._representer(x, alpha)

    def head(self, n: int) -> list:
        return list(itertools.islice(self.points(), n))


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------


def check_space_axioms(space: WSpace, sample: Sequence[Point] | None = None) -> LawReport:
    """Identity law and triangle inequality, exhaustively on finite spaces.

    Lazy spaces are checked over ``sample`` (default: the first 24 points).
    """
    m = space.monoid
    if sample is not None:
        pts = list(sample)
    elif space.is_finite:
        pts = list(space.points())
    else:
        pts = list(itertools.islice(space.points(), 24))
    n = 0
    for x in pts:
        n += 1
        if not m.is_zero(space.d(x, x)):
            return LawReport(False, "identity", (x, x), f"d({x}, {x}) = {m.format(space.d(x, x))} != 0", n)
    for x, y in itertools.combinations(pts, 2):
        n += 1
        if m.is_zero(space.d(x, y)) and m.is_zero(space.d(y, x)):
            return LawReport(False, "identity", (x, y), f"d({x}, {y}) = d({y}, {x}) = 0 for distinct points", n)
    for x, y, z in itertools.product(pts, repeat=3):
        n += 1
        lhs, rhs = space.d(x, z), m.add(space.d(x, y), space.d(y, z))
        if not m.le(lhs, rhs):
            return LawReport(False, "triangle", (x, y, z),
                             f"d({x}, {z}) = {m.format(lhs)} > d({x}, {y}) + d({y}, {z}) = {m.format(rhs)}", n)
    return LawReport(True, checked=n)


# ---------------------------------------------------------------------------
# Cauchy sequences
# ---------------------------------------------------------------------------


class CauchySequence:
    """``i -> point``, standing for the map ``alpha(i) -> point``.

    ``stable_from`` (when known) is an index from which the sequence is
    constant.  Restrictions remember the sequence they came from, so that
    equivalence with a restriction is recognised structurally.
    """

    def __init__(self, space: WSpace, alpha: InitialSequence, terms: Callable[[int], Point] | Sequence[Point],
                 *, stable_from: int | None = None, _root=None, _index=None):
        self.space = space
        self.alpha = alpha
        if callable(terms):
            self._terms = terms
        else:
            seq = tuple(terms)
            if alpha.length.is_finite and len(seq) < int(alpha.length):
                raise ValueError("fewer terms than indices")
            self._terms = seq.__getitem__
        self.stable_from = stable_from
        self._root = self if _root is None else _root
        self._index = _index or (lambda i: i)
        self._cache: dict[int, Point] = {}

    def __repr__(self) -> str:
        return f"CauchySequence(first={self.prefix(3)!r}, stable_from={self.stable_from})"

    def __call__(self, i: int) -> Point:
        if i not in self._cache:
            if self.alpha.length.is_finite and i >= int(self.alpha.length):
                raise IndexError(f"index {i} beyond the sequence")
            self._cache[i] = self._terms(i)
        return self._cache[i]

    def prefix(self, n: int) -> tuple:
        if self.alpha.length.is_finite:
            n = min(n, int(self.alpha.length))
        return tuple(self(i) for i in range(n))

    def indices(self, stage: int) -> range:
        top = stage + 1
        if self.alpha.length.is_finite:
            top = min(top, int(self.alpha.length))
        return range(top)

    def check(self, n: int) -> LawReport:
        """The Cauchy bound ``d(p(i), p(j)) <= alpha(i) + alpha(j)`` for ``i, j < n``."""
        m, sp = self.space.monoid, self.space
        idx = self.indices(n - 1)
        for i, j in itertools.product(idx, repeat=2):
            bound = m.add(self.alpha(i), self.alpha(j))
            if not m.le(sp.d(self(i), self(j)), bound):
                return LawReport(False, "cauchy", (i, j),
                                 f"d(p({i}), p({j})) = {m.format(sp.d(self(i), self(j)))} > {m.format(bound)}")
        return LawReport(True, checked=len(idx) ** 2)

    def resolved(self, stage: int) -> Point | None:
        """A point this sequence provably converges to, using indices up to ``stage``."""
        if self.stable_from is not None and self.stable_from <= stage:
            return self(self.stable_from)
        return self.space.resolve(self)

    def restrict(self, sub: Callable[[int], int], length=None) -> CauchySequence:
        """Restriction to the sub-initial-sequence ``k -> alpha(sub(k))`` (``sub`` increasing)."""
        a = self.alpha
        length = a.length if length is None else length
        alpha2 = InitialSequence(a.monoid, length, lambda k: a(sub(k)), a.factor)
        stable = None
        if self.stable_from is not None:
            stable = next(k for k in itertools.count() if sub(k) >= self.stable_from)
        parent_index = self._index
        return CauchySequence(self.space, alpha2, lambda k: self(sub(k)), stable_from=stable,
                              _root=self._root, _index=lambda k: parent_index(sub(k)))

    def map(self, f: Callable[[Point], Point], space: WSpace | None = None) -> CauchySequence:
        """``f`` composed with this sequence (Cauchy again when ``f`` is non-expanding)."""
        return CauchySequence(space or self.space, self.alpha, lambda i: f(self(i)), stable_from=self.stable_from)

    def same_family(self, other: CauchySequence) -> bool:
        return self._root is other._root


def constant(space: WSpace, alpha: InitialSequence, x: Point) -> CauchySequence:
    """The constant sequence with value x."""
    return CauchySequence(space, alpha, lambda i: x, stable_from=0)


def eventually_constant(space: WSpace, alpha: InitialSequence, prefix: Sequence[Point], tail: Point) -> CauchySequence:
    prefix = tuple(prefix)
    return CauchySequence(space, alpha, lambda i: prefix[i] if i < len(prefix) else tail, stable_from=len(prefix))


@dataclass(frozen=True)
class SeqDistanceBound:
    lower: Any
    upper: Any
    stage: int
    exact: bool = False


def seq_distance(p: CauchySequence, q: CauchySequence, stage: int) -> SeqDistanceBound:
    """Bounds on ``sup_k inf_{i, j >= k} d(p(i), q(j))`` from indices up to ``stage``.

    The upper bound ``min d(p(i), q(j)) + alpha(i) + alpha(j)`` over sampled
    pairs is always sound.  The interval collapses to the exact value when
    both sequences resolve to points (distance between the limits), or when
    one is a restriction of the other (distance 0).
    """
    if p.space is not q.space:
        raise DifferentSpaces("sequences live in different spaces")
    sp, m = p.space, p.space.monoid
    if p.same_family(q):
        return SeqDistanceBound(m.zero, m.zero, stage, exact=True)
    x, y = p.resolved(stage), q.resolved(stage)
    if x is not None and y is not None:
        v = sp.d(x, y)
        return SeqDistanceBound(v, v, stage, exact=True)
    upper = m.meet(
        m.add(m.add(sp.d(p(i), q(j)), p.alpha(i)), q.alpha(j))
        for i in p.indices(stage) for j in q.indices(stage)
    )
    return SeqDistanceBound(m.zero, upper, stage)


def seq_equiv(p: CauchySequence, q: CauchySequence, stage: int) -> Verdict:
    m = p.space.monoid
    pq, qp = seq_distance(p, q, stage), seq_distance(q, p, stage)
    if m.is_zero(pq.upper) and m.is_zero(qp.upper):
        return Verdict(EQUIV)
    if not m.is_zero(pq.lower):
        return Verdict(DISTINCT, ("p->q", m.format(pq.lower)), f"d(p, q) >= {m.format(pq.lower)}")
    if not m.is_zero(qp.lower):
        return Verdict(DISTINCT, ("q->p", m.format(qp.lower)), f"d(q, p) >= {m.format(qp.lower)}")
    return Verdict(UNKNOWN)


def converges_to(p: CauchySequence, x: Point, stage: int) -> Verdict:
    """Convergence read as ``p`` being equivalent to the constant sequence at ``x``.

    A violation of the necessary condition ``d(x, p(i)) <= alpha(i)`` (and
    its mirror) at some ``i <= stage`` refutes convergence outright.
    """
    sp, m = p.space, p.space.monoid
    for i in p.indices(stage):
        a = p.alpha(i)
        if not m.le(sp.d(x, p(i)), a) or not m.le(sp.d(p(i), x), a):
            return Verdict(NO, i, f"p({i}) is farther than alpha({i}) from the candidate limit")
    v = seq_equiv(p, constant(sp, p.alpha, x), stage)
    return Verdict({EQUIV: YES, DISTINCT: NO, UNKNOWN: UNKNOWN}[v.status], v.witness, v.detail)


# ---------------------------------------------------------------------------
# Completion, extension, density
# ---------------------------------------------------------------------------


def cauchy_completion(space: WSpace) -> WSpace:
    """The Cauchy completion, with base points kept as they are.

    Over a monoid that is not continuous at 0 there are no Cauchy sequences:
    the result is the same point set over the completed monoid.  A finite
    space over a continuous monoid is already complete (every Cauchy sequence
    is eventually constant because realized distances form a finite set).
    Lazy spaces defer to their presentation's completer.
    """
    m = space.monoid
    if not is_continuous_at_zero(m):
        if isinstance(space, FiniteSpace):
            return space.with_monoid(m.completion(), complete=True)
        return _relabel_complete(space, m.completion())
    if isinstance(space, FiniteSpace):
        return space.with_monoid(m, complete=True)
    if space.complete:
        return space
    completer = getattr(space, "completer", None)
    if completer is None:
        raise TypeError(f"{space!r} has no completion presentation")
    done = completer()
    done.complete = True
    return done


def _relabel_complete(space: LazySpace, monoid) -> LazySpace:
    return LazySpace(monoid, space.d, space.points, space.contains, is_base=space.is_base,
                     resolver=space.resolve, branch_resolver=space.resolve_branch, completer=None,
                     representer=getattr(space, "_representer", None), complete=True, name=space.name)


def extend_nonexpanding(f, completed: WSpace, sample: Sequence[Point] | None = None,
                        alpha: InitialSequence | None = None) -> Callable[[Point], Point]:
    """Extend a non-expanding map on base points to all points of a completed space.

    ``f`` is verified non-expanding on base pairs (all of them on a finite
    space, else ``sample``).  A limit point is sent to the limit of ``f``
    composed with a representative sequence, as named by the presentation.
    """
    fn = f.__getitem__ if isinstance(f, Mapping) else f
    m = completed.monoid
    if sample is not None:
        pts = list(sample)
    elif completed.is_finite:
        pts = list(completed.points())
    else:
        pts = list(itertools.islice(completed.points(), 24))
    for x, y in itertools.product(pts, repeat=2):
        if not m.le(completed.d(fn(x), fn(y)), completed.d(x, y)):
            raise NotNonExpanding(
                f"d(f({x}), f({y})) = {m.format(completed.d(fn(x), fn(y)))} > d({x}, {y}) = "
                f"{m.format(completed.d(x, y))}", (x, y))

    def extended(x):
        if completed.is_base(x):
            return fn(x)
        if alpha is None:
            raise ValueError("an initial sequence is needed to extend to limit points")
        rep = completed.representative(x, alpha)
        if rep is None:
            raise LookupError(f"no representative sequence for {x!r}")
        image = completed.resolve(rep.map(fn))
        if image is None:
            raise LookupError(f"the presentation cannot name the limit of f along {x!r}")
        return image

    return extended


def check_dense(d_set, space: WSpace, stage: int, probes: Sequence[Point] = (),
                alpha: InitialSequence | None = None, sample: int = 32) -> Verdict:
    """Whether ``d_set`` is dense, exactly on finite spaces and up to ``stage`` otherwise.

    On a finite space off-diagonal distances are bounded away from 0, so
    the only dense subset is the whole point set.  On a lazy space every
    sampled point (the first ``sample`` enumerated plus ``probes``) must be
    approached by a representative sequence running through ``d_set`` and
    converging at ``stage``.
    """
    member = d_set if callable(d_set) else (lambda x, s=frozenset(d_set): x in s)
    if space.is_finite:
        missing = [x for x in space.points() if not member(x)]
        if missing:
            return Verdict(NOT_DENSE, missing[0], f"{missing[0]} is at positive distance from the rest")
        return Verdict(DENSE)
    pts = list(itertools.islice(space.points(), sample)) + list(probes)
    undecided = None
    for x in pts:
        if member(x):
            continue
        rep = space.representative(x, alpha) if alpha is not None else None
        if rep is None:
            undecided = x
            continue
        if not all(member(rep(i)) for i in rep.indices(stage)):
            undecided = x
            continue
        v = converges_to(rep, x, stage)
        if v.status == NO:
            return Verdict(NOT_DENSE, x, v.detail)
        if v.status != YES:
            undecided = x
    if undecided is not None:
        return Verdict(UNKNOWN, undecided)
    return Verdict(DENSE, None, f"checked {len(pts)} points at stage {stage}")


# ---------------------------------------------------------------------------
# Description files
# ---------------------------------------------------------------------------


def _resolve_monoid(ref: str, base_dir: Path | None) -> tuple[DistanceMonoid, str]:
    if ref.startswith("builtin:"):
        name = ref[len("builtin:"):]
        inst = shipped_instances()
        if name not in inst:
            raise KeyError(f"unknown builtin monoid {name!r}")
        return inst[name], ref
    path = Path(ref) if base_dir is None else Path(base_dir) / ref
    return parse_monoid(path.read_text()), ref


def parse_space(text: str, base_dir: Path | str | None = None) -> FiniteSpace:
    """Parse a space description.

    ::

        space chain4.mon finite
        points x y z
        x: 0 1 2
        y: 2 0 1
        z: 2 1 0

    The monoid reference is a path relative to ``base_dir`` or
    ``builtin:<name>`` for a shipped instance.  Lazy spaces are built in code.
    """
    lines = [(k + 1, raw, raw.split("#", 1)[0].strip()) for k, raw in enumerate(text.splitlines())]
    lines = [t for t in lines if t[2]]
    if not lines:
        raise SpaceSyntaxError("empty space description")
    k, raw, head = lines[0]
    words = head.split()
    if len(words) != 3 or words[0] != "space":
        raise SpaceSyntaxError("expected header 'space <monoid-file> finite|lazy'", k, raw)
    if words[2] == "lazy":
        raise SpaceSyntaxError("lazy spaces are constructed in code (see the tree command)", k, raw)
    if words[2] != "finite":
        raise SpaceSyntaxError(f"unknown space kind {words[2]!r}", k, raw)
    try:
        monoid, _ = _resolve_monoid(words[1], Path(base_dir) if base_dir is not None else None)
    except (OSError, KeyError) as exc:
        raise SpaceSyntaxError(f"cannot load monoid {words[1]!r}: {exc}", k, raw) from None
    if len(lines) < 2 or not lines[1][2].startswith("points"):
        where = lines[1] if len(lines) > 1 else lines[0]
        raise SpaceSyntaxError("expected 'points p0 p1 ...'", where[0], where[1])
    pk, praw, pline = lines[1]
    pts = pline.split()[1:]
    if len(set(pts)) != len(pts) or not pts:
        raise SpaceSyntaxError("points must be distinct and nonempty", pk, praw)
    rows = lines[2:]
    if len(rows) != len(pts):
        where = rows[-1] if rows else lines[1]
        raise SpaceSyntaxError(f"expected {len(pts)} matrix rows, found {len(rows)}", where[0], where[1])
    matrix = {}
    seen = set()
    for (rk, rraw, row), default in zip(rows, pts):
        label, sep, body = row.partition(":")
        name, entries = (label.strip(), body.split()) if sep else (default, row.split())
        if name not in pts or name in seen:
            raise SpaceSyntaxError(f"bad or repeated row label {name!r}", rk, rraw)
        seen.add(name)
        if len(entries) != len(pts):
            raise SpaceSyntaxError(f"row {name} has {len(entries)} entries, expected {len(pts)}", rk, rraw)
        for y, lit in zip(pts, entries):
            try:
                matrix[name, y] = monoid.parse_value(lit)
            except ValueError as exc:
                raise SpaceSyntaxError(str(exc), rk, rraw) from None
    space = FiniteSpace(monoid, pts, matrix)
    space.monoid_ref = words[1]
    return space


def format_space(space: FiniteSpace, monoid_ref: str | None = None) -> str:
    ref = monoid_ref or getattr(space, "monoid_ref", None)
    if ref is None:
        raise ValueError("a monoid reference is needed to serialize a space")
    m = space.monoid
    pts = space.point_list
    out = [f"space {ref} finite", "points " + " ".join(map(str, pts))]
    for x in pts:
        out.append(f"{x}: " + " ".join(m.format(space.d(x, y)) for y in pts))
    return "\n".join(out) + "\n"


def parse_map(text: str, space: FiniteSpace) -> dict:
    """Parse ``p -> q`` lines into a total map on the space's points."""
    f = {}
    for k, raw in enumerate(text.splitlines(), start=1):
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        src, arrow, dst = s.partition("->")
        src, dst = src.strip(), dst.strip()
        if not arrow or not src or not dst:
            raise SpaceSyntaxError("expected 'p -> q'", k, raw)
        if not space.contains(src) or not space.contains(dst):
            raise SpaceSyntaxError(f"unknown point in {s!r}", k, raw)
        if src in f:
            raise SpaceSyntaxError(f"point {src} mapped twice", k, raw)
        f[src] = dst
    missing = [x for x in space.points() if x not in f]
    if missing:
        raise SpaceSyntaxError(f"map is not total: no image for {missing[0]}")
    return f


def format_map(f: Mapping, space: FiniteSpace) -> str:
    return "".join(f"{x} -> {f[x]}\n" for x in space.points())
