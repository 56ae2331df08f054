"""Command-line driver.

Exit codes: 0 success or witness, 1 certified negative, 2 inconclusive,
3 input error.  Reports are plain ``key: value`` text and depend only on
the inputs and budgets.
"""

from __future__ import annotations

import argparse
import hashlib
import random
import sys
from pathlib import Path as FilePath
from typing import Sequence

from . import dynsys, monoid, treespace, wspace
from .ordinals import OMEGA, OrdinalSyntaxError, ordinal

OK, NEGATIVE, INCONCLUSIVE, INPUT_ERROR = 0, 1, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"usage error: {message}")


class Report:
    def __init__(self, argv: Sequence[str]):
        self.lines = [f"command: {' '.join(argv)}"]

    def add(self, key: str, value) -> None:
        self.lines.append(f"{key}: {value}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _digest(path: FilePath) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def _read(path: str, report: Report) -> tuple[FilePath, str]:
    p = FilePath(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    report.add(f"input {p.name}", f"sha256:{_digest(p)}")
    return p, text


def _load_monoid(path: str, report: Report) -> monoid.DistanceMonoid:
    p, text = _read(path, report)
    try:
        return monoid.parse_monoid(text)
    except monoid.MonoidSyntaxError as exc:
        raise InputError(f"{p}: {exc}") from None
    except monoid.MalformedTable as exc:
        raise InputError(f"{p}: {exc}") from None


def _load_space(path: str, report: Report) -> wspace.FiniteSpace:
    p, text = _read(path, report)
    try:
        space = wspace.parse_space(text, base_dir=p.parent)
    except (monoid.MonoidSyntaxError, wspace.MalformedMatrix) as exc:
        raise InputError(f"{p}: {exc}") from None
    m = space.monoid
    if isinstance(m, monoid.FiniteChain):
        try:
            m.require_lawful()
        except monoid.MalformedTable as exc:
            raise InputError(f"{p}: monoid {space.monoid_ref}: {exc}") from None
    return space


def _load_map(path: str, space: wspace.FiniteSpace, report: Report) -> dict:
    p, text = _read(path, report)
    try:
        return wspace.parse_map(text, space)
    except monoid.MonoidSyntaxError as exc:
        raise InputError(f"{p}: {exc}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_check_monoid(args, report: Report) -> int:
    m = _load_monoid(args.file, report)
    report.add("instance", repr(m))
    laws = monoid.check_monoid_axioms(m)
    report.add("laws", str(laws))
    if not laws:
        return NEGATIVE
    report.add("continuous-at-0", "yes" if monoid.is_continuous_at_zero(m) else "no")
    report.add("coinitiality", monoid.coinitiality(m))
    if monoid.is_continuous_at_zero(m):
        alpha = monoid.nice_initial_sequence(m, args.alpha_factor)
        report.add(f"nice-sequence(factor {args.alpha_factor})",
                   ", ".join(m.format(v) for v in alpha.prefix(min(args.sample, 8))))
    return OK


def cmd_check_space(args, report: Report) -> int:
    space = _load_space(args.file, report)
    report.add("points", " ".join(space.point_list))
    result = wspace.check_space_axioms(space)
    report.add("axioms", str(result).replace("all laws pass", "identity and triangle pass"))
    return OK if result else NEGATIVE


def cmd_check_map(args, report: Report) -> int:
    space = _load_space(args.space, report)
    f = _load_map(args.map, space, report)
    system = _system(space, f, args.alpha_factor)
    result = dynsys.check_nonexpanding(system)
    report.add("non-expanding", str(result).replace("all laws pass", "pass"))
    return OK if result else NEGATIVE


def cmd_complete(args, report: Report) -> int:
    space = _load_space(args.space, report)
    dense = args.dense.split(",") if args.dense else None
    if dense:
        unknown = [x for x in dense if not space.contains(x)]
        if unknown:
            raise InputError(f"--dense names unknown point {unknown[0]}")
    done = wspace.cauchy_completion(space)
    report.add("continuous-at-0", "yes" if monoid.is_continuous_at_zero(space.monoid) else "no")
    report.add("completion", "same points, flagged complete")
    report.add("monoid", repr(done.monoid))
    for x in done.point_list:
        report.add(f"row {x}", " ".join(done.monoid.format(done.d(x, y)) for y in done.point_list))
    if dense is None:
        return OK
    verdict = wspace.check_dense(dense, space, args.depth)
    report.add("dense", str(verdict))
    return {wspace.DENSE: OK, wspace.NOT_DENSE: NEGATIVE}.get(verdict.status, INCONCLUSIVE)


def _system(space, f, factor):
    try:
        return dynsys.DynSystem(space, f, factor=factor)
    except monoid.NotContinuousAtZero as exc:
        raise InputError(f"no initial sequence: {exc}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_fixpoint(args, report: Report) -> int:
    space = _load_space(args.space, report)
    f = _load_map(args.map, space, report)
    report.add("budgets", f"alpha-factor {args.alpha_factor}, depth {args.depth}, width {args.width}")
    system = _system(space, f, args.alpha_factor)
    ne = dynsys.check_nonexpanding(system)
    if not ne:
        raise InputError(f"map is not non-expanding: {ne}")
    try:
        outcome = dynsys.decide_fixed_point(system, args.depth, args.width)
    except (dynsys.WrongCoinitiality, dynsys.BudgetTooSmall) as exc:
        raise InputError(str(exc)) from None
    report.add("outcome", str(outcome))
    if isinstance(outcome, dynsys.FixedPointFound):
        report.add("witness", outcome.witness)
        return OK
    if isinstance(outcome, dynsys.CertifiedNoFixedPoint):
        report.add("certificate", f"level {outcome.empty_depth} of the approximation tree is empty")
        return NEGATIVE
    return INCONCLUSIVE


def cmd_tree(args, report: Report) -> int:
    if args.action != "demo":
        raise InputError(f"unknown tree action {args.action!r}")
    try:
        height = ordinal(args.height)
    except (OrdinalSyntaxError, ValueError) as exc:
        raise InputError(str(exc)) from None
    report.add("budgets", f"alpha-factor {args.alpha_factor}, depth {args.depth}, width {args.width}, "
                          f"sample {args.sample}, seed {args.seed}")
    if args.alpha_factor < 4:
        raise InputError("--alpha-factor must be at least 4")
    rng = random.Random(args.seed)
    if args.kind == "binary":
        if height != OMEGA:
            raise InputError("the binary tree has height w")
        return _demo_binary(args, report, rng)
    if not height.is_limit:
        raise InputError("the ledger tree needs a limit height")
    return _demo_s_kappa(args, height, report, rng)


def _demo_binary(args, report: Report, rng: random.Random) -> int:
    tree = treespace.BinaryTree()
    alpha = monoid.nice_initial_sequence(monoid.ExtendedRationals(), args.alpha_factor)
    report.add("tree", f"binary, height {tree.height}")
    report.add("alpha", ", ".join(str(v) for v in alpha.prefix(4)) + ", ...")
    samples = []
    for _ in range(args.sample):
        n = rng.randrange(12)
        node = "".join(rng.choice("01") for _ in range(n))
        samples.append((node, n + 1 + rng.randrange(8)))
    report.add("pruned-check", str(treespace.pruned_check(tree, samples)).replace("all laws pass", "pass"))
    path = treespace.find_path_cf_omega(tree, lambda n: n)
    report.add("path", f"along levels 0, 1, 2, ...: {path(args.depth)}...")
    system = treespace.level_advance_system(tree, alpha)
    outcome = dynsys.decide_fixed_point(system, args.depth, args.width)
    report.add("fixed-point", str(outcome))
    return {"found": OK, "certified": NEGATIVE}.get(outcome.kind, INCONCLUSIVE)


def _demo_s_kappa(args, height, report: Report, rng: random.Random) -> int:
    tree = treespace.build_s_kappa(height)
    report.add("tree", f"ledger tree, height {height}")
    samples = []
    for _ in range(args.sample):
        node = _random_s_node(tree, rng)
        samples.append((node, node.a + _random_level(rng, height) + 1))
    report.add("pruned-check", str(treespace.pruned_check(tree, samples)).replace("all laws pass", "pass"))
    try:
        gamma = lambda n: height.fundamental(n)
        path = treespace.find_path_cf_omega(tree, gamma)
    except treespace.NotCofinal as exc:
        report.add("path", f"refused: {exc}")
        prefix = _greedy_prefix(tree, args.depth)
        ledger = treespace.extract_cofinal(prefix, tree)
        report.add("prefix", " < ".join(map(str, prefix)))
        report.add("ledger", ", ".join(map(str, ledger)))
        report.add("obstruction", "a full path would make the ledger an omega-sequence cofinal in the height, "
                                  "whose cofinality is uncountable")
        alpha = treespace.default_alpha(tree, args.alpha_factor)
        system = treespace.level_advance_system(tree, alpha)
        outcome = treespace.explore_fixed_point(system, args.depth, args.width)
        report.add("fixed-point", f"{outcome} (bounded exploration, coinitiality uncountable)")
        return INCONCLUSIVE
    nodes = path.prefix(height.fundamental(n) for n in range(args.depth))
    report.add("path", " < ".join(map(str, nodes.nodes)))
    report.add("ledger", ", ".join(map(str, treespace.extract_cofinal(nodes))))
    if height == OMEGA:
        system = treespace.level_advance_system(tree, factor=args.alpha_factor)
        outcome = dynsys.decide_fixed_point(system, args.depth, args.width)
        report.add("fixed-point", str(outcome))
        return {"found": OK, "certified": NEGATIVE}.get(outcome.kind, INCONCLUSIVE)
    report.add("fixed-point", f"not run: an omega-indexed initial sequence does not index height {height}")
    return OK


def _random_level(rng: random.Random, height):
    from .ordinals import Ordinal

    if height.is_finite:
        return Ordinal.coerce(rng.randrange(int(height)))
    top = 3 if height.symbolic else max(1, height.terms[0][0])
    level = Ordinal.coerce(0)
    for e in range(top, -1, -1):
        c = rng.randrange(4)
        if c:
            level = level + Ordinal.omega_power(e, c)
    return level if level < height else Ordinal.coerce(rng.randrange(1, 50))


def _random_s_node(tree: treespace.SKappaTree, rng: random.Random):
    node = tree.root
    for _ in range(rng.randrange(5)):
        target = node.a + _random_level(rng, tree.height) + 1
        if not target < tree.height:
            break
        node = tree.extend_to(node, target)
    return node


def _greedy_prefix(tree: treespace.SKappaTree, depth: int) -> list:
    nodes = [tree.root]
    for _ in range(depth - 1):
        nodes.append(tree.first_child(nodes[-1]))
    return nodes


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wmetric", description="Generalized metric spaces: law checks, completions, fixed points.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--alpha-factor", type=int, default=4)
        p.add_argument("--depth", type=int, default=8)
        p.add_argument("--width", type=int, default=64)
        p.add_argument("--sample", type=int, default=32)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("check-monoid")
    p.add_argument("file")
    common(p)
    p = sub.add_parser("check-space")
    p.add_argument("file")
    common(p)
    p = sub.add_parser("check-map")
    p.add_argument("--space", required=True)
    p.add_argument("--map", required=True)
    common(p)
    p = sub.add_parser("complete")
    p.add_argument("--space", required=True)
    p.add_argument("--dense", help="comma-separated points to test for density")
    common(p)
    p = sub.add_parser("fixpoint")
    p.add_argument("--space", required=True)
    p.add_argument("--map", required=True)
    common(p)
    p = sub.add_parser("tree")
    p.add_argument("action", choices=["demo"])
    p.add_argument("--kind", choices=["binary", "s-kappa"], default="binary")
    p.add_argument("--height", default="w")
    common(p)
    return parser


COMMANDS = {
    "check-monoid": cmd_check_monoid,
    "check-space": cmd_check_space,
    "check-map": cmd_check_map,
    "complete": cmd_complete,
    "fixpoint": cmd_fixpoint,
    "tree": cmd_tree,
}


def run(argv: Sequence[str], out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    argv = list(argv)
    report = Report(argv)
    try:
        args = build_parser().parse_args(argv)
        for flag in ("alpha_factor", "depth", "width", "sample", "seed"):
            if getattr(args, flag) < 0:
                raise InputError(f"--{flag.replace('_', '-')} must be a natural number")
        code = COMMANDS[args.command](args, report)
    except InputError as exc:
        err.write(f"error: {exc}\n")
        return INPUT_ERROR
    report.add("exit", code)
    out.write(report.text())
    return code


def main() -> None:
    raise SystemExit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
