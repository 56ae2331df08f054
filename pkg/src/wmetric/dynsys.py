"""Dynamical systems on W-metric spaces and a certified fixed-point search.

The search walks the approximation tree of a system: finite sequences
``x_0, ..., x_{n-1}`` of dense points with

* ``d(x_i, x_j) <= alpha(i) + alpha(j)`` for all ``i, j < n``, and
* ``d(x_i, g(x_i)) <= alpha(i)`` and ``d(g(x_i), x_i) <= alpha(i)``.

This tree has an infinite branch exactly when the map has a fixed point
(for coinitiality omega), so an empty level over an exhausted dense set
certifies that no fixed point exists.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence, Union

from .monoid import InitialSequence, LawReport, coinitiality, nice_initial_sequence
from .wspace import CauchySequence, WSpace

Point = Any


class WrongCoinitiality(ValueError):
    pass


class BudgetTooSmall(ValueError):
    pass


class InvalidChain(ValueError):
    def __init__(self, message: str, witness: tuple):
        super().__init__(message)
        self.witness = witness


class DynSystem:
    """A space with a self-map and an enumeration of a dense set closed under it.

    ``dense`` is a sequence (finite dense set) or a zero-argument callable
    returning a fresh iterator (possibly infinite).  By default the dense
    set of a finite space is its point list.
    """

    def __init__(self, space: WSpace, f: Callable[[Point], Point] | Mapping, dense=None,
                 alpha: InitialSequence | None = None, factor: int = 4, name: str = "system"):
        self.space = space
        self._f = f.__getitem__ if isinstance(f, Mapping) else f
        if dense is None:
            if not space.is_finite:
                raise ValueError("a lazy space needs an explicit dense enumeration")
            dense = list(space.points())
        self._dense = dense
        self.alpha = alpha if alpha is not None else nice_initial_sequence(space.monoid, factor)
        if self.alpha.factor < 4:
            raise ValueError("the search needs a nice initial sequence with factor >= 4")
        self.name = name

    def __repr__(self) -> str:
        return f"DynSystem({self.name}, {self.space!r})"

    def __call__(self, x: Point) -> Point:
        return self._f(x)

    @property
    def monoid(self):
        return self.space.monoid

    @property
    def dense_is_finite(self) -> bool:
        return not callable(self._dense)

    def dense(self) -> Iterator[Point]:
        return iter(self._dense) if not callable(self._dense) else iter(self._dense())

    def dense_head(self, n: int) -> tuple[list, bool]:
        """The first ``n`` dense points, and whether the enumeration ended within them."""
        head = list(itertools.islice(self.dense(), n + 1))
        return head[:n], len(head) <= n


def check_nonexpanding(system: DynSystem, sample: Iterable[tuple[Point, Point]] | None = None) -> LawReport:
    """``d(f(x), f(y)) <= d(x, y)`` on all pairs of a finite space, else on ``sample``."""
    sp, m = system.space, system.monoid
    if sample is None:
        if not sp.is_finite:
            raise ValueError("pass sample pairs for a lazy space")
        pts = list(sp.points())
        sample = itertools.product(pts, repeat=2)
    n = 0
    for x, y in sample:
        n += 1
        fx, fy = system(x), system(y)
        if not m.le(sp.d(fx, fy), sp.d(x, y)):
            return LawReport(False, "non-expanding", (x, y),
                             f"d(f({x}), f({y})) = {m.format(sp.d(fx, fy))} > d({x}, {y}) = {m.format(sp.d(x, y))}", n)
    return LawReport(True, checked=n)


@dataclass(frozen=True)
class ApproxChainNode:
    entries: tuple

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        return "<" + ", ".join(map(str, self.entries)) + ">"


@dataclass(frozen=True)
class FixedPointFound:
    witness: Any
    residual: Any
    kind: str = field(default="found", init=False)

    def __str__(self) -> str:
        return f"FixedPointFound({self.witness}, residual {self.residual})"


@dataclass(frozen=True)
class CertifiedNoFixedPoint:
    empty_depth: int
    kind: str = field(default="certified", init=False)

    def __str__(self) -> str:
        return f"CertifiedNoFixedPoint at depth {self.empty_depth}"


@dataclass(frozen=True)
class BudgetExhausted:
    best: ApproxChainNode | None
    depth: int
    kind: str = field(default="exhausted", init=False)

    def __str__(self) -> str:
        return f"BudgetExhausted at depth {self.depth} (best node {self.best})"


SearchOutcome = Union[FixedPointFound, CertifiedNoFixedPoint, BudgetExhausted]


def _fits(system: DynSystem, entries: Sequence[Point], x: Point) -> bool:
    """Whether ``entries + (x,)`` is a node, given that ``entries`` already is one."""
    sp, m, a = system.space, system.monoid, system.alpha
    n = len(entries)
    an = a(n)
    gx = system(x)
    if not m.le(sp.d(x, gx), an) or not m.le(sp.d(gx, x), an):
        return False
    for i, y in enumerate(entries):
        bound = m.add(a(i), an)
        if not m.le(sp.d(y, x), bound) or not m.le(sp.d(x, y), bound):
            return False
    return True


class _OutOfVisits(Exception):
    pass


def _walk(system: DynSystem, points: Sequence[Point], depth: int,
          visits: list | None = None) -> Iterator[ApproxChainNode]:
    """Depth-first, lexicographic in the order of ``points``.

    ``visits`` is a one-element countdown of candidate tests; running out
    raises ``_OutOfVisits``.
    """
    stack: list[Point] = []

    def rec():
        if len(stack) == depth:
            yield ApproxChainNode(tuple(stack))
            return
        for x in points:
            if visits is not None:
                visits[0] -= 1
                if visits[0] < 0:
                    raise _OutOfVisits
            if _fits(system, stack, x):
                stack.append(x)
                yield from rec()
                stack.pop()

    yield from rec()


def level_nodes(system: DynSystem, depth: int, width_budget: int) -> list[ApproxChainNode]:
    """All nodes of length ``depth`` over the first ``width_budget`` dense points."""
    if width_budget < 1:
        raise BudgetTooSmall("width budget must be positive")
    points, _ = system.dense_head(width_budget)
    return list(_walk(system, points, depth))


def first_node(system: DynSystem, depth: int, points: Sequence[Point],
               visits: list | None = None) -> ApproxChainNode | None:
    return next(_walk(system, points, depth, visits), None)


def decide_fixed_point(system: DynSystem, depth_budget: int = 8, width_budget: int = 64,
                       visit_budget: int | None = 50_000):
    """Iterative deepening over the approximation tree.

    * An empty level with the dense set exhausted within the width budget
      gives ``CertifiedNoFixedPoint``.
    * On a finite space, once ``alpha(n-1)`` drops below the least nonzero
      realized distance, the last entry of any level-``n`` node is fixed
      exactly: ``FixedPointFound(x, 0)``.
    * On a lazy space a node surviving to ``depth_budget`` is handed to the
      presentation; if it names a limit point through the branch the result
      is ``FixedPointFound(limit, alpha(depth_budget))``.
    * Anything else is ``BudgetExhausted``, including running out of
      ``visit_budget`` candidate tests.
    """
    m = system.monoid
    if coinitiality(m).kind != "omega":
        raise WrongCoinitiality(f"the search needs coinitiality omega, got {coinitiality(m)}")
    if width_budget < 1:
        raise BudgetTooSmall("width budget must be positive")
    points, exhausted = system.dense_head(width_budget)
    sp = system.space
    finite = sp.is_finite and exhausted
    least = None
    if finite:
        nz = sp.realized_nonzero()
        least = m.meet(nz) if nz else None
    best = None
    visits = None if visit_budget is None else [visit_budget]
    for n in range(1, depth_budget + 1):
        try:
            node = first_node(system, n, points, visits)
        except _OutOfVisits:
            return BudgetExhausted(best, n - 1)
        if node is None:
            if exhausted:
                return CertifiedNoFixedPoint(n)
            return BudgetExhausted(best, n - 1)
        best = node
        if finite and (least is None or m.lt(system.alpha(n - 1), least)):
            return FixedPointFound(node.entries[-1], m.zero)
    if best is not None and not sp.is_finite:
        limit = sp.resolve_branch(best.entries)
        if limit is not None:
            return FixedPointFound(limit, system.alpha(depth_budget))
    return BudgetExhausted(best, depth_budget)


def branch_to_limit(chain: Sequence[Point] | Callable[[int], Point], system: DynSystem,
                    stable_from: int | None = None, check_depth: int = 16) -> CauchySequence:
    """Package a branch ``x_0, x_1, ...`` of the approximation tree as ``alpha(i) -> x_i``.

    A list is read as a finite prefix continued by its last entry; a
    callable is an infinite branch, validated on its first ``check_depth``
    entries.  Raises ``InvalidChain`` at the first violated bound.
    """
    if callable(chain):
        entries = [chain(i) for i in range(check_depth)]
        terms = chain
    else:
        entries = list(chain)
        if not entries:
            raise InvalidChain("empty chain", ())
        last = len(entries) - 1
        terms = lambda i: entries[min(i, last)]
        if stable_from is None:
            stable_from = last
            while stable_from > 0 and entries[stable_from - 1] == entries[last]:
                stable_from -= 1
    sp, m, a = system.space, system.monoid, system.alpha
    for j, y in enumerate(entries):
        for i in range(j):
            x = entries[i]
            bound = m.add(a(i), a(j))
            if not m.le(sp.d(x, y), bound) or not m.le(sp.d(y, x), bound):
                raise InvalidChain(f"pairwise bound fails at ({i}, {j})", (i, j))
        gy = system(y)
        if not m.le(sp.d(y, gy), a(j)) or not m.le(sp.d(gy, y), a(j)):
            raise InvalidChain(f"approximate fixed-point bound fails at {j}", (j,))
    return CauchySequence(sp, a, terms, stable_from=stable_from)
