"""Acceptance criteria 1-8, each with its tolerance and wall-clock limit.

Every criterion prints one ``criterion N: PASS|FAIL`` line to the terminal.
Run directly with ``python tests/test_acceptance.py`` for just those lines.
"""

from __future__ import annotations

import functools
import itertools
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path as FilePath

import pytest

sys.path.insert(0, str(FilePath(__file__).resolve().parent))

from wmetric.dynsys import (  # noqa: E402
    BudgetExhausted,
    CertifiedNoFixedPoint,
    DynSystem,
    FixedPointFound,
    decide_fixed_point,
)
from wmetric.monoid import (  # noqa: E402
    Cut,
    ExtendedRationals,
    FiniteChain,
    ReversedOrdinals,
    check_monoid_axioms,
    clamped_chain,
    completion_add,
    is_continuous_at_zero,
    nice_initial_sequence,
    shipped_instances,
    trivial_monoid,
)
from wmetric.ordinals import OMEGA, OMEGA1, Ordinal, ordinal  # noqa: E402
from wmetric.treespace import (  # noqa: E402
    BinaryTree,
    NotCofinal,
    Path,
    build_s_kappa,
    explore_fixed_point,
    extract_cofinal,
    find_path_cf_omega,
    leftmost_path,
    level_advance_map,
    level_advance_system,
    limit_path,
    pruned_check,
    tree_metric,
)
from wmetric.wspace import (  # noqa: E402
    CauchySequence,
    FiniteSpace,
    cauchy_completion,
    converges_to,
    eventually_constant,
    parse_space,
    seq_distance,
)

from oracles import binary_distance, chain_table, fixed_points, random_quasi_metric, violates  # noqa: E402
from conftest import ACCEPTANCE_LINES  # noqa: E402
from test_monoid import MUTATIONS  # noqa: E402

Q = ExtendedRationals()
ALPHA = nice_initial_sequence(Q, 4)
CORPUS = FilePath(__file__).resolve().parent.parent / "corpus"


def _emit(n: int, ok: bool, seconds: float, limit: float, note: str = "") -> None:
    verdict = "PASS" if ok and seconds < limit else "FAIL"
    line = f"criterion {n}: {verdict} ({seconds:.2f}s, limit {limit:g}s){' ' + note if note else ''}"
    if __name__ == "__main__":
        print(line, flush=True)
    else:
        ACCEPTANCE_LINES.append(line)


def _run(n: int, limit: float, body) -> None:
    start = time.perf_counter()
    ok, note = False, ""
    try:
        note = body() or ""
        ok = True
    except AssertionError as exc:
        note = f"assertion: {exc}"
        raise
    finally:
        elapsed = time.perf_counter() - start
        _emit(n, ok, elapsed, limit, note)
    assert elapsed < limit, f"criterion {n} took {elapsed:.2f}s"


# 1 ----------------------------------------------------------------------------

def _criterion_1():
    for name, m in shipped_instances().items():
        assert check_monoid_axioms(m).ok, name
    assert len(MUTATIONS) >= 10
    elems, table = chain_table(2)
    for (a, b, v), expected in MUTATIONS.items():
        report = check_monoid_axioms(clamped_chain(2).with_entry(a, b, v))
        assert not report.ok and (report.law, report.witness) == expected
        mutated = dict(table)
        mutated[a, b] = v
        assert violates(report.law, report.witness, elems, mutated)
    return f"{len(shipped_instances())} instances, {len(MUTATIONS)} mutations"


def test_criterion_1_monoid_laws():
    _run(1, 1.0, _criterion_1)


# 2 ----------------------------------------------------------------------------

def _criterion_2():
    chains = [clamped_chain(k) for k in range(1, 7)] + [shipped_instances()["chain4"]]
    chains.append(FiniteChain(["0", "top"], {("0", "0"): "0", ("0", "top"): "top",
                                             ("top", "0"): "top", ("top", "top"): "top"}))
    for c in chains:
        assert not is_continuous_at_zero(c)
    assert not is_continuous_at_zero(trivial_monoid())
    assert is_continuous_at_zero(Q)
    assert is_continuous_at_zero(ReversedOrdinals(OMEGA))
    for m in (Q, ReversedOrdinals(OMEGA)):
        alpha = nice_initial_sequence(m, 4, 65)
        for k in range(64):
            assert m.le(m.times(4, alpha(k + 1)), alpha(k)), (m, k)
            assert m.lt(m.zero, alpha(k + 1))
    return f"{len(chains)} chains, 64 indices"


def test_criterion_2_continuity():
    _run(2, 1.0, _criterion_2)


# 3 ----------------------------------------------------------------------------

GRID = [Fraction(k, 12) for k in range(100)]
DEPTH = 16


def _sqrt_stream(x: Fraction):
    @functools.lru_cache(maxsize=None)
    def bound(n: int) -> Fraction:
        scale = 10 ** n
        return Fraction(math.isqrt(x.numerator * x.denominator * scale * scale) + 1,
                        x.denominator * scale)
    return bound


def _above_sqrt(q: Fraction, x: Fraction) -> bool:
    return q >= 0 and q * q > x


def _above_sum(q: Fraction, x: Fraction, y: Fraction, shift: Fraction = Fraction(0)) -> bool:
    """Exactly decide q > sqrt(x) + sqrt(y) + shift."""
    q -= shift
    if not _above_sqrt(q, x):
        return False
    lhs = q * q + x - y
    return lhs > 0 and lhs * lhs > 4 * q * q * x


def _random_stream_cut(rng: random.Random):
    """Returns (cut, x) with the cut equal to sqrt(x)."""
    kind = rng.randrange(3)
    if kind == 0:
        x = Fraction(rng.randrange(0, 400), rng.randrange(1, 100))
        x = min(x, Fraction(4))
        return Cut.from_stream(Q, _sqrt_stream(x)), x
    r = Fraction(rng.randrange(0, 200), rng.randrange(1, 100))
    r = min(r, Fraction(2))
    stream = (lambda n, r=r: r + Fraction(1, 2 ** n))
    meet = r if kind == 1 else None
    return Cut.from_stream(Q, stream, meet=meet), r * r


def _rational_cut(rng: random.Random):
    r = Fraction(rng.randrange(0, 40), rng.randrange(1, 20))
    return Cut.from_stream(Q, lambda n, r=r: r + Fraction(1, 3 ** n)), r


def _grid_set(cut: Cut) -> tuple[bool, ...]:
    return tuple(cut.exceeded_by(q, DEPTH) for q in GRID)


def _criterion_3():
    for name, m in shipped_instances().items():
        if not isinstance(m, FiniteChain):
            continue
        cuts = [Cut.principal(m, a) for a in m.elems]
        zero = Cut.principal(m, m.zero)
        for a, b, c in itertools.product(cuts, repeat=3):
            assert completion_add(a, b) == completion_add(b, a)
            assert completion_add(completion_add(a, b), c) == completion_add(a, completion_add(b, c))
            if a.le(b):
                assert completion_add(a, c).le(completion_add(b, c))
        for a in cuts:
            assert completion_add(zero, a) == a
    rng = random.Random(2024)
    zero = Cut.principal(Q, Fraction(0))
    pairs = 0
    for _ in range(100):
        (a, xa), (b, xb) = _random_stream_cut(rng), _random_stream_cut(rng)
        ab, ba = completion_add(a, b), completion_add(b, a)
        exact = tuple(_above_sum(q, xa, xb) for q in GRID)
        assert _grid_set(ab) == exact == _grid_set(ba), (xa, xb)
        assert _grid_set(completion_add(zero, a)) == _grid_set(a) == tuple(_above_sqrt(q, xa) for q in GRID)
        c, r = _rational_cut(rng)
        left = completion_add(completion_add(a, b), c)
        right = completion_add(a, completion_add(b, c))
        exact3 = tuple(_above_sum(q, xa, xb, r) for q in GRID)
        assert _grid_set(left) == exact3 == _grid_set(right), (xa, xb, r)
        # monotone: a <= b implies a + c <= b + c, i.e. everything above b + c is above a + c
        lo, hi = (a, b) if xa <= xb else (b, a)
        above_lo = _grid_set(completion_add(lo, c))
        above_hi = _grid_set(completion_add(hi, c))
        assert all(x or not y for x, y in zip(above_lo, above_hi))
        pairs += 1
    return f"{pairs} random stream-cut pairs on {len(GRID)} grid points"


def test_criterion_3_completion_laws():
    _run(3, 5.0, _criterion_3)


# 4 ----------------------------------------------------------------------------

def _criterion_4():
    rng = random.Random(4)
    checked = 0
    for _ in range(200):
        n = rng.randrange(1, 7)
        space = FiniteSpace(Q, list(range(n)), random_quasi_metric(rng, n))
        seqs = []
        for _ in range(3):
            prefix = [rng.randrange(n) for _ in range(rng.randrange(5))]
            seqs.append(eventually_constant(space, ALPHA, prefix, rng.randrange(n)))
        stage = max(s.stable_from for s in seqs)
        d = {}
        for i, j in itertools.permutations(range(3), 2):
            b = seq_distance(seqs[i], seqs[j], stage)
            assert b.exact
            d[i, j] = b.upper
        for i, j, k in itertools.permutations(range(3)):
            assert Q.le(d[i, k], Q.add(d[i, j], d[j, k])), (i, j, k, d)
            checked += 1
    return f"{checked} triangle instances"


def test_criterion_4_sequence_triangle():
    _run(4, 10.0, _criterion_4)


# 5 ----------------------------------------------------------------------------

def _criterion_5():
    rng = random.Random(5)
    found = certified = 0
    for _ in range(200):
        n = rng.randrange(1, 9)
        f = [rng.randrange(n) for _ in range(n)]
        space = FiniteSpace(Q, list(range(n)), random_quasi_metric(rng, n, f))
        out = decide_fixed_point(DynSystem(space, dict(enumerate(f))), 16, 8)
        assert not isinstance(out, BudgetExhausted)
        fixed = fixed_points(f)
        if fixed:
            assert isinstance(out, FixedPointFound) and out.witness in fixed
            found += 1
        else:
            assert isinstance(out, CertifiedNoFixedPoint)
            certified += 1
    return f"{found} found, {certified} certified"


def test_criterion_5_fixed_point_oracle():
    _run(5, 30.0, _criterion_5)


# 6 ----------------------------------------------------------------------------

def _bits(rng: random.Random, n: int) -> str:
    return "".join(rng.choice("01") for _ in range(n))


def _tree_point(rng: random.Random, tree: BinaryTree):
    if rng.random() < 0.25:
        return Path.binary(tree, _bits(rng, rng.randrange(6)), _bits(rng, rng.randrange(1, 4)))
    return _bits(rng, rng.randrange(10))


def _criterion_6():
    tree = BinaryTree()
    space = tree_metric(tree, ALPHA, include_paths=True)
    rng = random.Random(6)
    for _ in range(1000):
        x, y, z = (_tree_point(rng, tree) for _ in range(3))
        assert Q.le(space.d(x, z), max(space.d(x, y), space.d(y, z)))
    f = level_advance_map(tree)
    for _ in range(1000):
        x, y = _tree_point(rng, tree), _tree_point(rng, tree)
        assert Q.le(space.d(f(x), f(y)), space.d(x, y))
        if isinstance(x, str) and isinstance(y, str):
            assert space.d(x, y) == binary_distance(x, y)
    system = level_advance_system(tree)
    out = decide_fixed_point(system, 8, 256)
    assert isinstance(out, FixedPointFound)
    assert out.witness == leftmost_path(tree) and out.residual == Fraction(1, 4 ** 8)
    for _ in range(5):
        branch = _bits(rng, 512)
        noise = [_bits(rng, rng.randrange(4)) for _ in range(512)]
        p = CauchySequence(space, ALPHA, lambda i, b=branch, z=noise: b[:i] + z[i])
        x = Path(tree, lambda j, p=p: p(j + 2)[:j])
        assert x == limit_path(p, tree, ALPHA)
        for stage in range(16):
            assert converges_to(p, x, stage).status == "yes", stage
    return "1000 triples, 1000 pairs, depth 8 width 256"


def test_criterion_6_binary_tree():
    _run(6, 10.0, _criterion_6)


# 7 ----------------------------------------------------------------------------

def _random_ordinal(rng: random.Random, max_exp: int = 3) -> Ordinal:
    terms = {}
    for _ in range(rng.randrange(1, 3)):
        terms[rng.randrange(max_exp)] = rng.randrange(1, 4)
    return Ordinal(sorted(terms.items(), reverse=True))


def _random_s_node(rng: random.Random, tree):
    ledger = [ordinal(0)]
    for _ in range(rng.randrange(5)):
        ledger.append(ledger[-1] + _random_ordinal(rng))
    if len(ledger) == 1:
        return tree.root
    a = ledger[-1] if rng.random() < 0.5 else ledger[-2] + 1
    return tree.node(a, ledger)


def _criterion_7():
    tree = build_s_kappa(OMEGA1)
    rng = random.Random(7)
    samples = []
    for _ in range(100):
        node = _random_s_node(rng, tree)
        samples.append((node, node.a + _random_ordinal(rng, 4)))
    assert pruned_check(tree, samples).ok
    for _ in range(100):
        node = tree.root
        prefix = [node]
        for _ in range(rng.randrange(1, 12)):
            kids = list(itertools.islice(tree.children(node), 4))
            node = rng.choice(kids)
            prefix.append(node)
        ledger = extract_cofinal(prefix, tree)
        assert all(a < b for a, b in zip(ledger, ledger[1:])), ledger
    proposals = [lambda n: n, lambda n: OMEGA.times(n), lambda n: ordinal("w^2").times(n),
                 lambda n: Ordinal([(n, 1)]), lambda n: ordinal("w^3"), lambda n: OMEGA.times(n + 1) + 7]
    for gamma in proposals:
        with pytest.raises(NotCofinal):
            find_path_cf_omega(tree, gamma)
    omega_tree = build_s_kappa(OMEGA)
    p = find_path_cf_omega(omega_tree, lambda n: n)
    assert p.prefix(list(range(64))).check().ok
    sq_tree = build_s_kappa(ordinal("w^2"))
    q = find_path_cf_omega(sq_tree, lambda n: OMEGA.times(n))
    levels = [OMEGA.times(k) + j for k in range(8) for j in range(8)]
    assert q.prefix(levels).check().ok
    system = level_advance_system(tree)
    for depth in range(1, 9):
        out = explore_fixed_point(system, depth, 512)
        assert not isinstance(out, (FixedPointFound, CertifiedNoFixedPoint))
    return f"{len(samples)} pruned samples, {len(proposals)} refused proposals"


def test_criterion_7_s_kappa():
    _run(7, 30.0, _criterion_7)


# 8 ----------------------------------------------------------------------------

def _criterion_8():
    spaces = [parse_space(f.read_text(), base_dir=CORPUS) for f in sorted(CORPUS.glob("*.spc"))]
    rng = random.Random(8)
    spaces += [FiniteSpace(Q, list(range(n)), random_quasi_metric(rng, n))
               for n in (rng.randrange(1, 7) for _ in range(20))]
    for s in spaces:
        once = cauchy_completion(s)
        twice = cauchy_completion(once)
        assert once.point_list == twice.point_list
        assert once.matrix == twice.matrix
    tree = BinaryTree()
    once = cauchy_completion(tree_metric(tree, ALPHA))
    twice = cauchy_completion(once)
    assert once.head(63) == twice.head(63)
    sample = [_tree_point(rng, tree) for _ in range(60)]
    for x, y in itertools.product(sample, repeat=2):
        assert once.d(x, y) == twice.d(x, y)
        assert twice.contains(x) == once.contains(x)
    return f"{len(spaces)} finite spaces and the binary tree"


def test_criterion_8_completion_idempotent():
    _run(8, 5.0, _criterion_8)


if __name__ == "__main__":
    failures = 0
    for fn in (test_criterion_1_monoid_laws, test_criterion_2_continuity, test_criterion_3_completion_laws,
               test_criterion_4_sequence_triangle, test_criterion_5_fixed_point_oracle,
               test_criterion_6_binary_tree, test_criterion_7_s_kappa, test_criterion_8_completion_idempotent):
        try:
            fn()
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
