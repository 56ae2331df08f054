from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmetric.monoid import TOP, ExtendedRationals, clamped_chain, nice_initial_sequence
from wmetric.treespace import BinaryTree, Path, tree_metric
from wmetric.wspace import (
    DENSE,
    DISTINCT,
    EQUIV,
    NO,
    NOT_DENSE,
    YES,
    CauchySequence,
    DifferentSpaces,
    FiniteSpace,
    MalformedMatrix,
    NotNonExpanding,
    SpaceSyntaxError,
    cauchy_completion,
    check_dense,
    check_space_axioms,
    constant,
    converges_to,
    eventually_constant,
    extend_nonexpanding,
    format_map,
    format_space,
    parse_map,
    parse_space,
    seq_distance,
    seq_equiv,
)

from oracles import random_quasi_metric, seq_distance_window

Q = ExtendedRationals()
ALPHA = nice_initial_sequence(Q, 4)
F = Fraction


def rational_space(matrix, names=None):
    names = names or [f"p{i}" for i in range(len(matrix))]
    return FiniteSpace(Q, names, matrix)


def test_asymmetric_space_passes():
    c = clamped_chain(2)
    s = FiniteSpace(c, "xyz", [["0", "1", "2"], ["2", "0", "1"], ["2", "1", "0"]])
    assert check_space_axioms(s).ok


def test_chain_example_with_top_fails_triangle():
    c = clamped_chain(2)
    s = FiniteSpace(c, "xyz", [["0", "1", "top"], ["2", "0", "1"], ["top", "1", "0"]])
    r = check_space_axioms(s)
    assert (r.law, r.witness) == ("triangle", ("x", "y", "z"))


def test_singleton_and_rational_triangle_failure():
    assert check_space_axioms(rational_space([[0]])).ok
    s = FiniteSpace(Q, "xyz", [[0, 1, TOP], [1, 0, 1], [TOP, 1, 0]])
    r = check_space_axioms(s)
    assert (r.law, r.witness) == ("triangle", ("x", "y", "z"))


def test_identity_law_failure():
    s = FiniteSpace(Q, "xy", [[0, 0], [0, 0]])
    assert check_space_axioms(s).law == "identity"
    one_sided = FiniteSpace(Q, "xy", [[0, 0], [1, 0]])
    assert check_space_axioms(one_sided).ok


def test_malformed_matrix():
    with pytest.raises(MalformedMatrix):
        FiniteSpace(Q, "xy", [[0, 1]])
    with pytest.raises(MalformedMatrix):
        FiniteSpace(Q, "xy", [[0, -1], [1, 0]])


def test_constant_sequences_embed_isometrically():
    rng = random.Random(3)
    for _ in range(20):
        n = rng.randrange(1, 5)
        s = rational_space(random_quasi_metric(rng, n))
        pts = list(s.points())
        for x, y in itertools.product(pts, repeat=2):
            b = seq_distance(constant(s, ALPHA, x), constant(s, ALPHA, y), 0)
            assert b.exact and b.lower == b.upper == s.d(x, y)


def test_self_distance_and_restriction():
    s = rational_space([[0, 1], [1, 0]])
    p = eventually_constant(s, ALPHA, ["p0", "p1", "p0"], "p1")
    assert seq_distance(p, p, 0).upper == 0
    sub = p.restrict(lambda k: 2 * k)
    assert seq_equiv(p, sub, 0).status == EQUIV
    assert sub.stable_from == 2


def test_distinct_points():
    s = rational_space([[0, 1], [2, 0]])
    v = seq_equiv(constant(s, ALPHA, "p0"), constant(s, ALPHA, "p1"), 0)
    assert v.status == DISTINCT


def test_upper_bound_is_sound_before_stabilisation():
    s = rational_space([[0, F(1, 2)], [F(1, 2), 0]])
    p = eventually_constant(s, ALPHA, ["p0"] * 5, "p1")
    q = constant(s, ALPHA, "p1")
    early = seq_distance(p, q, 2)
    assert not early.exact and early.lower == 0 and early.upper >= 0
    late = seq_distance(p, q, 5)
    assert late.exact and late.upper == 0
    assert early.upper >= late.upper


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_collapsed_distance_matches_window_oracle(seed):
    rng = random.Random(seed)
    n = rng.randrange(1, 5)
    s = rational_space(random_quasi_metric(rng, n))
    pts = list(s.points())
    seqs = []
    for _ in range(2):
        k = rng.randrange(4)
        prefix = [rng.choice(pts) for _ in range(k)]
        seqs.append((prefix, rng.choice(pts)))
    p, q = (eventually_constant(s, ALPHA, pre, tail) for pre, tail in seqs)
    stage = 4
    b = seq_distance(p, q, stage)
    plist = [p(i) for i in range(12)]
    qlist = [q(i) for i in range(12)]
    assert b.exact and b.upper == seq_distance_window(s.d, plist, qlist, 12)


def test_different_spaces_rejected():
    a = rational_space([[0]])
    b = rational_space([[0]])
    with pytest.raises(DifferentSpaces):
        seq_distance(constant(a, ALPHA, "p0"), constant(b, ALPHA, "p0"), 0)


def test_convergence():
    s = rational_space([[0, 1], [1, 0]])
    assert converges_to(constant(s, ALPHA, "p0"), "p0", 0).status == YES
    p = eventually_constant(s, ALPHA, ["p1"], "p0")
    assert converges_to(p, "p0", 3).status == YES
    far = eventually_constant(s, ALPHA, ["p1"] * 3, "p0")
    assert converges_to(far, "p0", 3).status == NO


def test_cauchy_check():
    s = rational_space([[0, 1], [1, 0]])
    bad = CauchySequence(s, ALPHA, lambda i: "p0" if i % 2 else "p1")
    r = bad.check(4)
    assert not r.ok and r.law == "cauchy"
    assert eventually_constant(s, ALPHA, ["p1"], "p0").check(6).ok


def test_finite_completion_is_flagged_complete():
    s = rational_space([[0, 1], [1, 0]])
    done = cauchy_completion(s)
    assert done.complete and done.point_list == s.point_list
    again = cauchy_completion(done)
    assert again.matrix == done.matrix


def test_completion_over_noncontinuous_chain():
    c = clamped_chain(2)
    s = FiniteSpace(c, "pq", [["0", "1"], ["1", "0"]])
    done = cauchy_completion(s)
    assert done.complete and done.monoid == c and done.matrix == s.matrix


def test_binary_tree_completion_adds_paths():
    tree = BinaryTree()
    base = tree_metric(tree, ALPHA)
    assert base.complete is None and not base.contains(Path.binary(tree, "", "0"))
    done = cauchy_completion(base)
    assert done.complete and done.contains(Path.binary(tree, "", "0"))
    assert done.head(7) == base.head(7)
    assert cauchy_completion(done) is done


def test_extend_nonexpanding():
    s = rational_space([[0, 1, 1], [1, 0, 1], [1, 1, 0]], names=list("xyz"))
    ident = extend_nonexpanding(lambda x: x, s)
    assert [ident(x) for x in "xyz"] == list("xyz")
    const = extend_nonexpanding(lambda x: "x", s)
    assert {const(x) for x in "xyz"} == {"x"}
    line = rational_space([[0, 1, 3], [1, 0, 2], [3, 2, 0]], names=list("xyz"))
    with pytest.raises(NotNonExpanding) as err:
        extend_nonexpanding({"x": "y", "y": "z", "z": "z"}, line)
    assert err.value.witness == ("x", "y")


def test_extension_on_tree_paths_is_identity_for_level_advance():
    tree = BinaryTree()
    done = cauchy_completion(tree_metric(tree, ALPHA))
    sample = list(itertools.islice(tree.enumerate(), 15))
    g = extend_nonexpanding(lambda s: s + "0", done, sample=sample, alpha=ALPHA)
    for prefix, cycle in (("", "0"), ("1", "01"), ("0110", "1")):
        p = Path.binary(tree, prefix, cycle)
        assert g(p) == p


def test_check_dense():
    s = rational_space([[0, 1], [1, 0]])
    assert check_dense({"p0", "p1"}, s, 3).status == DENSE
    v = check_dense({"p0"}, s, 3)
    assert v.status == NOT_DENSE and v.witness == "p1"
    tree = BinaryTree()
    done = cauchy_completion(tree_metric(tree, ALPHA))
    probes = [Path.binary(tree, "", "0"), Path.binary(tree, "10", "110")]
    assert check_dense(tree.contains, done, 8, probes=probes, alpha=ALPHA).status == DENSE


def test_space_file_roundtrip(tmp_path):
    (tmp_path / "q.mon").write_text("monoid rational\n")
    text = "space q.mon finite\npoints x y\nx: 0 1/2\ny: 3 0\n"
    s = parse_space(text, base_dir=tmp_path)
    assert s.d("x", "y") == F(1, 2) and s.d("y", "x") == 3
    again = parse_space(format_space(s), base_dir=tmp_path)
    assert again.matrix == s.matrix
    f = parse_map("x -> y\ny -> y\n", s)
    assert parse_map(format_map(f, s), s) == f


def test_space_file_errors(tmp_path):
    (tmp_path / "q.mon").write_text("monoid rational\n")
    with pytest.raises(SpaceSyntaxError) as err:
        parse_space("space q.mon finite\npoints x y\nx: 0 1\ny: -1 0\n", base_dir=tmp_path)
    assert err.value.lineno == 4
    with pytest.raises(SpaceSyntaxError):
        parse_space("space q.mon lazy\n", base_dir=tmp_path)
    with pytest.raises(SpaceSyntaxError):
        parse_space("space missing.mon finite\npoints x\nx: 0\n", base_dir=tmp_path)
    s = parse_space("space builtin:rational finite\npoints x\nx: 0\n")
    with pytest.raises(SpaceSyntaxError):
        parse_map("x -> z\n", s)
    with pytest.raises(SpaceSyntaxError):
        parse_map("\n", s)
