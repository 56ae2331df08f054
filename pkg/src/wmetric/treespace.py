"""Trees of ordinal height, their paths, and the tree metric ``d(x, y) = alpha(join(x, y))``.

Two families of trees are provided:

* :class:`BinaryTree` -- bit strings of height omega, optionally with
  dead ends (nodes with no children) to model defective, non-pruned trees.
* :class:`SKappaTree` -- nodes ``(a, g)`` where ``g`` is a finite increasing
  ledger of ordinals with ``g(0) = 0`` and ``g(n) < a <= g(n+1)``.  It is
  pruned for every height, and any full path would read off an
  omega-sequence cofinal in the height, so for the symbolic height omega-1
  there is none.

Paths are lazy maps from levels to nodes.  Two paths of an omega-height
tree are compared exactly when both are eventually periodic bit paths and
otherwise by comparing their nodes at level :data:`HORIZON`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd
from typing import Any, Callable, Iterable, Iterator, NamedTuple, Sequence

from .dynsys import BudgetExhausted, BudgetTooSmall, DynSystem, _OutOfVisits, first_node
from .monoid import (
    ExtendedRationals,
    InitialSequence,
    LawReport,
    ReversedOrdinals,
    nice_initial_sequence,
)
from .ordinals import OMEGA, ZERO, Ordinal, ordinal
from .wspace import CauchySequence, LazySpace

HORIZON = 256


class DifferentTrees(ValueError):
    pass


class Stuck(ValueError):
    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


class NotCofinal(ValueError):
    pass


class HeightMismatch(ValueError):
    pass


class InvalidNode(ValueError):
    pass


class IncoherentPrefix(ValueError):
    pass


# ---------------------------------------------------------------------------
# Trees
# ---------------------------------------------------------------------------


class KappaTree:
    """Interface: ``root``, ``level``, ``restrict``, ``le``, ``children``, ``contains``."""

    height: Ordinal
    root: Any

    def level(self, x) -> Ordinal | int:
        raise NotImplementedError

    def restrict(self, x, i):
        raise NotImplementedError

    def le(self, x, y) -> bool:
        raise NotImplementedError

    def children(self, x) -> Iterator:
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def enumerate(self) -> Iterator:
        """A fixed enumeration of nodes (the dense set of the tree metric)."""
        raise NotImplementedError

    def join(self, x, y):
        raise NotImplementedError

    def first_child(self, x):
        child = next(iter(self.children(x)), None)
        if child is None:
            raise Stuck(f"node {self.format(x)} has no children", x)
        return child

    def extend_to(self, x, level):
        """Some node above ``x`` at ``level``, preferring earlier children (finite gaps only)."""
        target = int(level)
        start = int(self.level(x))
        if target < start:
            raise ValueError("target level is below the node")

        def dfs(y):
            if int(self.level(y)) == target:
                return y
            for c in self.children(y):
                found = dfs(c)
                if found is not None:
                    return found
            return None

        found = dfs(x)
        if found is None:
            raise Stuck(f"node {self.format(x)} does not extend to level {level}", x)
        return found

    def format(self, x) -> str:
        return str(x)


class BinaryTree(KappaTree):
    """Finite bit strings; nodes in ``dead_ends`` have no children."""

    kind = "binary"

    def __init__(self, dead_ends: Iterable[str] = ()):
        self.height = OMEGA
        self.root = ""
        self.dead_ends = frozenset(dead_ends)
        for s in self.dead_ends:
            if set(s) - {"0", "1"}:
                raise InvalidNode(f"{s!r} is not a bit string")

    def __repr__(self) -> str:
        return f"BinaryTree(dead_ends={sorted(self.dead_ends)})" if self.dead_ends else "BinaryTree()"

    def contains(self, x) -> bool:
        if not isinstance(x, str) or set(x) - {"0", "1"}:
            return False
        return not any(x[:k] in self.dead_ends for k in range(len(x)))

    def level(self, x) -> int:
        return len(x)

    def restrict(self, x, i):
        i = int(i)
        if i > len(x):
            raise ValueError(f"level {i} is above node {x!r}")
        return x[:i]

    def le(self, x, y) -> bool:
        return y.startswith(x)

    def children(self, x):
        if x in self.dead_ends:
            return iter(())
        return iter((x + "0", x + "1"))

    def join(self, x, y):
        if x == y:
            return self.height
        n = 0
        for a, b in zip(x, y):
            if a != b:
                break
            n += 1
        return n

    def enumerate(self):
        for n in itertools.count():
            any_alive = False
            for bits in itertools.product("01", repeat=n):
                s = "".join(bits)
                if self.contains(s):
                    any_alive = True
                    yield s
            if not any_alive:
                return

    def format(self, x) -> str:
        return x if x else "<root>"


class SNode(NamedTuple):
    a: Ordinal
    g: tuple

    def __str__(self) -> str:
        return f"({self.a}, [{', '.join(map(str, self.g))}])"


class SKappaTree(KappaTree):
    """The ledger tree: ``(a, g)`` with ``g`` increasing, ``g(0) = 0`` and ``g(n) < a <= g(n+1)``.

    ``(a0, g0) <= (a1, g1)`` when ``g0`` is an initial segment of ``g1`` and
    ``a0 <= a1``; the level of ``(a, g)`` is ``a``.
    """

    kind = "s-kappa"

    def __init__(self, height):
        self.height = ordinal(height)
        if not self.height.is_limit:
            raise ValueError("the ledger tree needs a limit height")
        self.root = SNode(ZERO, (ZERO,))

    def __repr__(self) -> str:
        return f"SKappaTree({self.height})"

    def node(self, a, g: Sequence) -> SNode:
        """Build a node from ints, notations or text, raising ``InvalidNode`` when malformed."""
        x = SNode(ordinal(a), tuple(ordinal(v) for v in g))
        problem = self._problem(x)
        if problem:
            raise InvalidNode(f"{x}: {problem}")
        return x

    def _problem(self, x) -> str | None:
        if not isinstance(x, SNode):
            return "not a ledger node"
        a, g = x
        if a == 0:
            return None if g == (ZERO,) else "the only node at level 0 is the root"
        if len(g) < 2:
            return "ledger must have at least two entries"
        if g[0] != 0:
            return "ledger must start at 0"
        if any(not u < v for u, v in zip(g, g[1:])):
            return "ledger must be strictly increasing"
        if not g[-1] < self.height:
            return f"ledger entry {g[-1]} is not below the height {self.height}"
        if not (g[-2] < a <= g[-1]):
            return f"need g(n) < a <= g(n+1), got {g[-2]} < {a} <= {g[-1]}"
        return None

    def contains(self, x) -> bool:
        return self._problem(x) is None

    def level(self, x):
        return x.a

    def restrict(self, x, i):
        i = ordinal(i)
        a, g = x
        if a < i:
            raise ValueError(f"level {i} is above node {x}")
        if i == a:
            return x
        if i == 0:
            return self.root
        m = max(k for k, v in enumerate(g) if v < i)
        return SNode(i, g[: m + 2])

    def le(self, x, y) -> bool:
        return y.g[: len(x.g)] == x.g and x.a <= y.a

    def children(self, x):
        a, g = x
        nxt = a + 1
        if not nxt < self.height:
            return
        if nxt <= g[-1]:
            yield SNode(nxt, g)
            return
        c = nxt
        while c < self.height:
            yield SNode(nxt, g + (c,))
            c = c + 1

    def extend_to(self, x, level):
        """``(b, g)`` when ``b <= g(last)``, else append ``b`` itself to the ledger."""
        b = ordinal(level)
        if b < x.a:
            raise ValueError("target level is below the node")
        if not b < self.height:
            raise Stuck(f"level {b} is not below the height {self.height}", x)
        if b == x.a:
            return x
        return SNode(b, x.g) if b <= x.g[-1] else SNode(b, x.g + (b,))

    def join(self, x, y):
        if x == y:
            return self.height
        c = 0
        for u, v in zip(x.g, y.g):
            if u != v:
                break
            c += 1
        return min(x.a, y.a, x.g[c - 1])

    def enumerate(self):
        """Nodes whose entries are finite, by largest entry, then ledger length, ledger, level."""
        yield self.root
        for s in itertools.count(1):
            if not Ordinal.coerce(s) < self.height:
                return
            for size in range(0, s):
                for mid in itertools.combinations(range(1, s), size):
                    g = (ZERO,) + tuple(Ordinal.coerce(v) for v in mid) + (Ordinal.coerce(s),)
                    for a in range(int(g[-2]) + 1, s + 1):
                        yield SNode(Ordinal.coerce(a), g)

    def format(self, x) -> str:
        return str(x)


def build_s_kappa(height) -> SKappaTree:
    return SKappaTree(height)


def join_nodes(a, b, tree: KappaTree):
    """Level of the meet of two nodes or paths; ``tree.height`` when they coincide."""
    for x in (a, b):
        if isinstance(x, Path):
            if x.tree is not tree:
                raise DifferentTrees("path belongs to another tree")
        elif not tree.contains(x):
            raise DifferentTrees(f"{x!r} is not a node of {tree!r}")
    if isinstance(a, Path) or isinstance(b, Path):
        if not isinstance(a, Path):
            a, b = b, a
        if isinstance(b, Path):
            if a == b:
                return tree.height
            return tree.join(a(HORIZON), b(HORIZON))
        lev = tree.level(b)
        here = a(lev)
        return lev if here == b else tree.join(here, b)
    return tree.join(a, b)


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


class Path:
    """A lazy coherent choice of one node per level.

    ``periodic = (prefix, cycle)`` marks an eventually periodic bit path of a
    binary tree; such paths compare exactly with each other.
    """

    def __init__(self, tree: KappaTree, at: Callable[[Any], Any], periodic: tuple[str, str] | None = None,
                 label: str | None = None):
        self.tree = tree
        self._at = at
        self.periodic = periodic
        self.label = label
        self._cache: dict = {}

    @classmethod
    def binary(cls, tree: BinaryTree, prefix: str, cycle: str) -> Path:
        if not cycle:
            raise ValueError("cycle must be nonempty")

        def at(j):
            j = int(j)
            reps = max(0, -(-(j - len(prefix)) // len(cycle)))
            return (prefix + cycle * reps)[:j]

        label = f"{prefix}({cycle})*"
        return cls(tree, at, periodic=(prefix, cycle), label=label)

    def __call__(self, level):
        key = int(level) if ordinal(level).is_finite else ordinal(level)
        if key not in self._cache:
            node = self._at(key)
            if not self.tree.contains(node):
                raise Stuck(f"path leaves the tree at level {level}", node)
            self._cache[key] = node
        return self._cache[key]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Path):
            return NotImplemented
        if self is other:
            return True
        if self.tree is not other.tree:
            return False
        if self.periodic and other.periodic:
            (p1, c1), (p2, c2) = self.periodic, other.periodic
            n = max(len(p1), len(p2)) + len(c1) * len(c2) // gcd(len(c1), len(c2))
            return self(n) == other(n)
        return self(HORIZON) == other(HORIZON)

    def __hash__(self) -> int:
        return hash(self(32))

    def __repr__(self) -> str:
        return f"Path({self})"

    def __str__(self) -> str:
        if self.label:
            return self.label
        return f"{self.tree.format(self(8))}..."

    def prefix(self, levels: Iterable) -> PathPrefix:
        return PathPrefix(self.tree, tuple(self(b) for b in levels))


@dataclass(frozen=True)
class PathPrefix:
    """Nodes of a path at finitely many levels."""

    tree: KappaTree
    nodes: tuple

    def check(self) -> LawReport:
        """Levels strictly increase and each node lies below the next."""
        t = self.tree
        for k, (x, y) in enumerate(zip(self.nodes, self.nodes[1:])):
            if not t.level(x) < t.level(y) or not t.le(x, y):
                return LawReport(False, "coherence", (x, y), f"{t.format(x)} is not below {t.format(y)}", k)
        for k, x in enumerate(self.nodes):
            if not t.contains(x):
                return LawReport(False, "membership", (x,), f"{t.format(x)} is not a node", k)
        return LawReport(True, checked=len(self.nodes))


def leftmost_path(tree: BinaryTree) -> Path:
    if tree.dead_ends:
        return continue_path(tree, tree.root)
    return Path.binary(tree, "", "0")


def continue_path(tree: KappaTree, x) -> Path:
    """The path through ``x`` that keeps taking first children (omega-height trees)."""
    if isinstance(tree, BinaryTree) and not tree.dead_ends:
        return Path.binary(tree, x, "0")
    base = int(tree.level(x))
    memo = {base: x}

    def at(j):
        j = int(j)
        if j <= base:
            return tree.restrict(x, j)
        top = max(k for k in memo if k <= j)
        y = memo[top]
        for k in range(top + 1, j + 1):
            y = tree.first_child(y)
            memo[k] = y
        return y

    return Path(tree, at, label=f"{tree.format(x)} then first children")


# ---------------------------------------------------------------------------
# Pruning and paths from cofinal sequences
# ---------------------------------------------------------------------------


def pruned_check(tree: KappaTree, samples: Iterable[tuple[Any, Any]]) -> LawReport:
    """For each ``(a, beta)`` with ``lev(a) < beta < height``, find ``b >= a`` at level ``beta``."""
    n = 0
    for a, beta in samples:
        beta = ordinal(beta)
        if not (ordinal(tree.level(a)) < beta < tree.height):
            continue
        n += 1
        try:
            b = tree.extend_to(a, beta)
        except Stuck:
            return LawReport(False, "pruned", (a, beta), f"{tree.format(a)} has no extension to level {beta}", n)
        if not (tree.contains(b) and tree.le(a, b) and ordinal(tree.level(b)) == beta):
            return LawReport(False, "pruned", (a, beta), f"bad extension {tree.format(b)}", n)
    return LawReport(True, checked=n)


def find_path_cf_omega(tree: KappaTree, gamma: Callable[[int], Any], declared_sup=None,
                       probes: int = 8, search: int = 4096) -> Path:
    """A path built along a cofinal omega-sequence of levels ``gamma``.

    ``x_0`` lies at level ``gamma(0)`` and ``x_{n+1}`` extends ``x_n`` to
    level ``gamma(n+1)``; the path at level ``z`` is ``x_m`` restricted to
    ``z`` for the first ``m`` with ``gamma(m) >= z``.  The claim that
    ``gamma`` is cofinal is spot-checked against the height's fundamental
    sequence.
    """
    h = tree.height
    if h.symbolic:
        raise NotCofinal("no omega-sequence of notations is cofinal in omega-1")
    if not h.is_limit:
        raise NotCofinal(f"height {h} has cofinality {h.cofinality()}, not omega")
    if declared_sup is not None and ordinal(declared_sup) != h:
        raise NotCofinal(f"declared supremum {declared_sup} differs from the height {h}")
    g = lambda n: ordinal(gamma(n))
    for n in range(min(search, probes * 8)):
        if not g(n) < h:
            raise NotCofinal(f"gamma({n}) = {g(n)} is not below the height")
        if n and not g(n - 1) < g(n):
            raise NotCofinal(f"gamma is not increasing at {n}")
    for k in range(probes):
        target = h.fundamental(k)
        if not any(target <= g(n) for n in range(search)):
            raise NotCofinal(f"no gamma(n) reaches {target} within {search} terms")

    xs: list = []

    def anchor(m):
        while len(xs) <= m:
            prev = xs[-1] if xs else tree.root
            xs.append(tree.extend_to(prev, g(len(xs))))
        return xs[m]

    def at(z):
        z = ordinal(z)
        for m in range(search):
            if z <= g(m):
                return tree.restrict(anchor(m), z)
        raise Stuck(f"level {z} not reached within {search} terms")

    return Path(tree, at, label="path along gamma")


def extract_cofinal(prefix: PathPrefix | Sequence[SNode], tree: SKappaTree | None = None) -> tuple:
    """The union of the ledgers along a coherent prefix, as a tuple ``q(0), q(1), ...``."""
    if isinstance(prefix, PathPrefix):
        tree, nodes = prefix.tree, prefix.nodes
    else:
        nodes = tuple(prefix)
    if tree is None:
        raise ValueError("a tree is needed for a bare node list")
    nodes = sorted(nodes, key=lambda x: x.a)
    for x in nodes:
        if not tree.contains(x):
            raise IncoherentPrefix(f"{x} is not a node")
    for x, y in zip(nodes, nodes[1:]):
        if not tree.le(x, y):
            raise IncoherentPrefix(f"{x} and {y} are incomparable")
    q: dict[int, Ordinal] = {}
    for x in nodes:
        for n, v in enumerate(x.g):
            if q.setdefault(n, v) != v:
                raise IncoherentPrefix(f"ledgers disagree at {n}")
    out = tuple(q[n] for n in range(len(q)))
    assert all(u < v for u, v in zip(out, out[1:])), out
    return out


# ---------------------------------------------------------------------------
# The tree metric and level-advancing dynamics
# ---------------------------------------------------------------------------


def default_alpha(tree: KappaTree, factor: int = 4) -> InitialSequence:
    """``4^-n`` over the rationals for omega-height trees, reversed notations otherwise."""
    if tree.height == OMEGA:
        return nice_initial_sequence(ExtendedRationals(), factor)
    monoid = ReversedOrdinals(tree.height)
    return nice_initial_sequence(monoid, factor, length=tree.height if tree.height.symbolic else OMEGA)


def tree_metric(tree: KappaTree, alpha: InitialSequence | None = None, include_paths: bool = False) -> LazySpace:
    """The space of nodes (and paths) with ``d(x, y) = alpha(join(x, y))`` off the diagonal."""
    alpha = alpha if alpha is not None else default_alpha(tree)
    if alpha.length != tree.height:
        raise HeightMismatch(f"initial sequence of length {alpha.length} on a tree of height {tree.height}")
    m = alpha.monoid
    paths = include_paths and tree.height == OMEGA

    def distance(x, y):
        if x is y or x == y:
            return m.zero
        return alpha(join_nodes(x, y, tree))

    def contains(x):
        if isinstance(x, Path):
            return paths and x.tree is tree
        return tree.contains(x)

    def resolver(seq: CauchySequence):
        return limit_path(seq, tree, alpha)

    def branch_resolver(chain):
        return continue_path(tree, chain[-1]) if chain else None

    def representer(x, a):
        return CauchySequence(space, a, lambda i: x(_level_for(a, i, alpha)))

    space = LazySpace(
        m, distance, tree.enumerate, contains,
        is_base=lambda x: not isinstance(x, Path),
        resolver=resolver if paths else None,
        branch_resolver=branch_resolver if paths else None,
        completer=(lambda: tree_metric(tree, alpha, include_paths=True)) if tree.height == OMEGA else None,
        representer=representer if paths else None,
        complete=True if paths or tree.height.symbolic else None,
        name=f"T_alpha({tree!r}{', with paths' if paths else ''})",
    )
    space.tree = tree
    space.alpha = alpha
    return space


def _level_for(a: InitialSequence, i: int, alpha: InitialSequence) -> int:
    """Least tree level whose distance is within ``a(i)``."""
    m = alpha.monoid
    for j in itertools.count():
        if m.le(alpha(j), a(i)):
            return j


def limit_path(seq: CauchySequence, tree: KappaTree, alpha: InitialSequence | None = None,
               search: int = 4096) -> Path:
    """The limit ``x(j) = p(k)`` restricted to ``j``, for the first ``k`` with ``p``'s bound below ``alpha(j+2)``.

    With ``p`` indexed by ``alpha`` itself this is ``x(j) = p(j+2)`` restricted to ``j``.
    """
    alpha = alpha if alpha is not None else seq.alpha
    m = alpha.monoid

    def at(j):
        j = int(j)
        target = alpha(j + 2)
        for k in range(search):
            if m.le(seq.alpha(k), target):
                y = seq(k)
                if isinstance(y, Path):
                    return y(j)
                if int(tree.level(y)) < j:
                    raise Stuck(f"sequence term at {k} sits below level {j}: no path limit", y)
                return tree.restrict(y, j)
        raise Stuck(f"no index reaches alpha({j + 2}) within {search} terms")

    return Path(tree, at, label="limit of a branch sequence")


def level_advance_map(tree: KappaTree) -> Callable:
    """First child on nodes, identity on paths."""

    def f(x):
        if isinstance(x, Path):
            return x
        return tree.first_child(x)

    return f


def level_advance_system(tree: KappaTree, alpha: InitialSequence | None = None, factor: int = 4) -> DynSystem:
    """The level-advancing map on the tree metric with paths; the tree nodes are the dense set."""
    alpha = alpha if alpha is not None else default_alpha(tree, factor)
    space = tree_metric(tree, alpha, include_paths=True)
    return DynSystem(space, level_advance_map(tree), dense=tree.enumerate, alpha=alpha,
                     name=f"level-advance on {tree!r}")


def explore_fixed_point(system: DynSystem, depth_budget: int = 8, width_budget: int = 64,
                        visit_budget: int = 20_000) -> BudgetExhausted:
    """Bounded approximation-tree exploration for systems outside coinitiality omega.

    Levels are grown exactly as in the certified search, but no verdict is
    sound here: surviving branches name no limit point and an empty level
    over a truncated dense set certifies nothing.  The result is always
    ``BudgetExhausted`` with the deepest node reached.
    """
    if width_budget < 1:
        raise BudgetTooSmall("width budget must be positive")
    points, _ = system.dense_head(width_budget)
    best, reached = None, 0
    visits = [visit_budget]
    for n in range(1, depth_budget + 1):
        try:
            node = first_node(system, n, points, visits)
        except _OutOfVisits:
            break
        if node is None:
            break
        best, reached = node, n
    return BudgetExhausted(best, reached)
