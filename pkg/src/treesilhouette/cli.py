"""Command-line interface: ``treesilhouette <subcommand> ...``.

Exit status is 0 on success (and on a passing experiment), 1 when an
experiment fails its checks, 2 on usage, format or file errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import SilhouetteError
from .experiments import REGISTRY, ExperimentConfig, run_experiment
from .growth import random_bst, random_dst
from .limits import (
    mgf_eta_inf,
    sample_eta_inf,
    sample_findim_limit,
    sample_quicksort_limit,
    sample_rho_V,
    sample_zeta,
)
from .rng import RngStream
from .silhouette import eta_of, functionals, plfunction_csv, silhouette_csv, silhouette_of
from .tree import emit_tree, parse_tree

log = logging.getLogger("treesilhouette")


class UsageError(Exception):
    pass


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _read_tree(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"--tree: cannot read {path}: {exc.strerror}") from exc
    try:
        return parse_tree(text)
    except SilhouetteError as exc:
        raise UsageError(f"--tree: {path}: {exc}") from exc


def _csv(header: list, columns: list) -> str:
    rows = [",".join(header)]
    for row in zip(*columns):
        rows.append(",".join(repr(float(v)) for v in row))
    return "\n".join(rows) + "\n"


# -- subcommands -------------------------------------------------------------


def cmd_gen_tree(args) -> int:
    if args.n < 0:
        raise UsageError("--n: must be nonnegative")
    build = random_bst if args.model == "bst" else random_dst
    tree = build(args.n, RngStream(args.seed)).final
    _write(emit_tree(tree), args.out)
    return 0


def cmd_silhouette(args) -> int:
    _write(silhouette_csv(silhouette_of(_read_tree(args.tree))), args.out)
    return 0


def cmd_eta(args) -> int:
    eta = eta_of(_read_tree(args.tree))
    print(f"{eta} = {float(eta)!r}")
    return 0


def cmd_integrated(args) -> int:
    f = functionals(_read_tree(args.tree))
    _write(plfunction_csv(f.Ynorm if args.normalized else f.Y), args.out)
    return 0


def cmd_sample(args) -> int:
    if args.replicates < 1:
        raise UsageError("--replicates: must be positive")
    rng = RngStream(args.seed)
    R, k = args.replicates, args.k
    if args.which == "zeta":
        text = _csv(["zeta"], [sample_zeta(rng, R)])
    elif args.which == "eta-inf":
        text = _csv(["eta_inf"], [sample_eta_inf(rng, args.levels, R)])
    elif args.which == "rho":
        rho, _ = sample_rho_V(k, rng, R)
        text = _csv([f"rho_{j}" for j in range(1, rho.shape[1] + 1)], list(rho.T))
    elif args.which == "findim":
        lim = sample_findim_limit(k, rng, args.levels, R)
        header = [f"delta_{j}" for j in range(1, lim.delta.shape[1] + 1)] + ["eta_centered"]
        text = _csv(header, list(lim.delta.T) + [lim.eta_centered_limit])
    else:
        if R < 2:
            raise UsageError("--replicates: quicksort population needs at least 2")
        text = _csv(["quicksort"], [sample_quicksort_limit(rng, args.levels, R)])
    _write(text, args.out)
    return 0


def cmd_mgf(args) -> int:
    print(repr(mgf_eta_inf(args.t, args.levels)))
    return 0


def cmd_experiment(args) -> int:
    if args.config is None:
        config = ExperimentConfig.from_dict({}, args.name)
    else:
        try:
            config = ExperimentConfig.load(args.config, args.name)
        except OSError as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc.strerror}") from exc
    report = run_experiment(config)
    out = args.out or config.output
    _write(report.to_json(), out)
    if args.pools:
        report.dump_pools(args.pools)
    log.info("%s: %s", config.name, "pass" if report.passed else "FAIL")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treesilhouette",
                                description="Silhouettes of random binary trees and their limits.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    g = sub.add_parser("gen-tree", help="grow a random BST or DST and write it as treetext")
    g.add_argument("--model", choices=["bst", "dst"], required=True)
    g.add_argument("--n", type=int, required=True, help="number of nodes")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", help="output file (default: stdout)")
    g.set_defaults(func=cmd_gen_tree)

    s = sub.add_parser("silhouette", help="write the silhouette step function as CSV")
    s.add_argument("--tree", required=True, help="treetext input file")
    s.add_argument("--out", help="output file (default: stdout)")
    s.set_defaults(func=cmd_silhouette)

    e = sub.add_parser("eta", help="print the discounted external path length")
    e.add_argument("--tree", required=True, help="treetext input file")
    e.set_defaults(func=cmd_eta)

    i = sub.add_parser("integrated", help="write the integrated silhouette as CSV")
    i.add_argument("--tree", required=True, help="treetext input file")
    i.add_argument("--normalized", action="store_true", help="tie the endpoints to zero")
    i.add_argument("--out", help="output file (default: stdout)")
    i.set_defaults(func=cmd_integrated)

    m = sub.add_parser("sample", help="draw samples of a limit object as CSV")
    m.add_argument("--which", choices=["zeta", "eta-inf", "rho", "findim", "quicksort"], required=True)
    m.add_argument("--k", type=int, default=1, help="depth for rho and findim (default 1)")
    m.add_argument("--levels", type=int, default=20,
                   help="series truncation, or iterations for quicksort (default 20)")
    m.add_argument("--replicates", type=int, default=1000)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--out", help="output file (default: stdout)")
    m.set_defaults(func=cmd_sample)

    f = sub.add_parser("mgf", help="print the moment generating function of the limit law")
    f.add_argument("--t", type=float, required=True)
    f.add_argument("--levels", type=int, default=40, help="product truncation (default 40)")
    f.set_defaults(func=cmd_mgf)

    x = sub.add_parser("experiment", help="run a registered experiment and write its JSON report")
    x.add_argument("--name", choices=sorted(REGISTRY), required=True)
    x.add_argument("--config", help="JSON config (default: the experiment's defaults)")
    x.add_argument("--out", help="report file (default: config output, else stdout)")
    x.add_argument("--pools", help="directory for raw sample pools as CSV")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"treesilhouette {args.command}: {exc}", file=sys.stderr)
        return 2
    except (SilhouetteError, ValueError) as exc:
        print(f"treesilhouette {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"treesilhouette {args.command}: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
