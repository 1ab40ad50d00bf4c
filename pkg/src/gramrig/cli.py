"""Command-line front end.

Exit codes: 0 completable / success, 1 flexible or not unique, 2 usage
error, 3 numerical or consistency error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import io as gio
from .exceptions import (
    GramrigError,
    InconsistentKnowledgeError,
    NoRealConfigurationError,
    NotUniqueError,
    ShapeError,
)
from .global_ import build_criterion, complete_gram, factor_data, global_test
from .local import jacobian, local_test
from .model import (
    ProblemShape,
    Scenario,
    born_data,
    extract_knowledge,
    random_configuration,
    random_quantum_model,
    scenario_mask,
)
from .oracle import fd_jacobian, reference_criterion, linear_uniqueness_oracle, perturbation_search
from .rank import svd_rank
from .sweep import emit, run_sweep

log = logging.getLogger("gramrig")

EXIT_OK, EXIT_FLEXIBLE, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

SCENARIOS = [s.value for s in Scenario] + ["pure+proj-known", "pure+proj-unknown"]

SPECIAL_CAVEAT = (
    "note: for non-generic (e.g. exactly projective) configurations a passing "
    "test is sufficient but not necessary for local completability"
)


class UsageError(Exception):
    pass


def _add_shape_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--d", type=int, help="Hilbert space dimension (D = d**2)")
    g.add_argument("--D", type=int, help="ambient dimension for non-quantum problems")
    p.add_argument("--W", type=int, help="number of states")
    p.add_argument("--V", type=int, help="number of measurements")
    p.add_argument("--K", type=int, help="outcomes per measurement (default d, or 1)")
    p.add_argument("--scenario", choices=SCENARIOS, default=None)
    p.add_argument("--mask-file", help="JSON mask (1-based indices)")


def _add_test_args(p: argparse.ArgumentParser) -> None:
    _add_shape_args(p)
    p.add_argument("--backend", choices=["svd", "gf", "consensus"], default="svd")
    p.add_argument("--tol", type=float, default=1e-9, help="relative SVD rank tolerance")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="print the verdict as JSON")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="gramrig", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file with default flag values")
    parser.add_argument("--log-level", default=os.environ.get("GRAMRIG_LOG", "WARNING"))
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("local-test", help="generic local completability")
    _add_test_args(p)
    p.add_argument("--exact-special", action="store_true",
                   help="the configuration of interest is non-generic; print the sufficiency caveat")
    subs["local-test"] = p

    p = sub.add_parser("global-test", help="generic global completability")
    _add_test_args(p)
    subs["global-test"] = p

    p = sub.add_parser("reconstruct", help="recover the unique Gram matrix")
    p.add_argument("--data-file", required=True, help="CSV of the W x VK data matrix")
    p.add_argument("--knowledge-file", required=True, help="JSON knowledge (mask + values)")
    p.add_argument("--out", required=True, help="CSV output path for G")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--json", action="store_true")
    subs["reconstruct"] = p

    p = sub.add_parser("sweep", help="phase diagram over (W, V)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--scenario", choices=[s for s in SCENARIOS if s != "custom"], required=True)
    p.add_argument("--test", choices=["local", "global"], default="local")
    p.add_argument("--wmin", type=int, default=1)
    p.add_argument("--wmax", type=int)
    p.add_argument("--vmin", type=int, default=1)
    p.add_argument("--vmax", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--backend", choices=["svd", "gf", "consensus"], default="svd")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-runtime", action="store_true", help="record 0 ms for byte-stable output")
    p.add_argument("--out-prefix", required=True)
    subs["sweep"] = p

    p = sub.add_parser("oracle", help="independent cross-checks on one random instance")
    _add_shape_args(p)
    p.add_argument("--check", choices=["jacobian", "criterion", "uniqueness", "perturb"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=20)
    subs["oracle"] = p

    p = sub.add_parser("gen-model", help="sample a quantum model and write its files")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--W", type=int, required=True)
    p.add_argument("--V", type=int, required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--projective", action="store_true")
    p.add_argument("--degeneracies", type=int, nargs="+")
    p.add_argument("--scenario", choices=SCENARIOS, default="pure")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    subs["gen-model"] = p
    return parser, subs


def parse_args(argv) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            config = gio.read_json(args.config)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        # flags on the command line win over the config file
        known = {a.dest for a in subs[args.command]._actions}
        subs[args.command].set_defaults(**{k.replace("-", "_"): v for k, v in config.items()
                                           if k.replace("-", "_") in known})
        args = parser.parse_args(argv)
    return args


def _resolve_problem(args) -> tuple[ProblemShape, object]:
    if args.mask_file:
        mask = gio.load_mask(args.mask_file)
        shape = mask.shape
        for name in ("W", "V", "K"):
            val = getattr(args, name)
            if val is not None and val != getattr(shape, name):
                raise UsageError(f"--{name}={val} disagrees with the mask file ({getattr(shape, name)})")
        if args.d is not None and args.d**2 != shape.D or args.D is not None and args.D != shape.D:
            raise UsageError("dimension flag disagrees with the mask file")
        return shape, mask
    if args.W is None or args.V is None:
        raise UsageError("--W and --V are required without --mask-file")
    if args.d is not None:
        shape = ProblemShape.quantum(args.d, args.W, args.V, args.K)
    elif args.D is not None:
        shape = ProblemShape(D=args.D, W=args.W, V=args.V, K=args.K or 1)
    else:
        raise UsageError("one of --d or --D is required")
    if args.scenario is None or args.scenario == "custom":
        raise UsageError("--scenario (pure, proj-known, proj-unknown) or --mask-file is required")
    return shape, scenario_mask(shape, args.scenario)


def _emit(obj: dict, as_json: bool, line: str) -> None:
    if as_json:
        print(json.dumps(obj, indent=2))
    else:
        print(line)


def cmd_test(args, kind: str) -> int:
    shape, mask = _resolve_problem(args)
    test = local_test if kind == "local" else global_test
    verdict = test(shape, mask, trials=args.trials, backend=args.backend, seed=args.seed, rel_tol=args.tol)
    obj = verdict.to_dict()
    obj.update({"D": shape.D, "W": shape.W, "V": shape.V, "K": shape.K, "seed": args.seed})
    word = "completable" if verdict.completable else "flexible"
    _emit(obj, args.json, f"{kind}: {word} (rank {verdict.rank_report.computed_rank} / target {verdict.target})")
    rep = verdict.rank_report
    if rep.disagreement:
        print(f"warning: svd rank {rep.other_rank} disagrees with exact rank {rep.computed_rank}",
              file=sys.stderr)
    if kind == "local" and getattr(args, "exact_special", False):
        print(SPECIAL_CAVEAT, file=sys.stderr)
    return EXIT_OK if verdict.completable else EXIT_FLEXIBLE


def cmd_reconstruct(args) -> int:
    data = gio.read_matrix_csv(args.data_file)
    knowledge = gio.load_knowledge(args.knowledge_file)
    if data.shape != (knowledge.mask.shape.W, knowledge.mask.shape.VK):
        raise UsageError(f"data matrix {data.shape} does not match the knowledge shape")
    G = complete_gram(data, knowledge, rel_tol=args.tol)
    gio.write_matrix_csv(G, args.out)
    _emit({"unique": True, "out": args.out, "N": G.shape[0]}, args.json,
          f"reconstructed {G.shape[0]}x{G.shape[0]} Gram matrix -> {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    D = args.d**2
    W_range = range(args.wmin, (args.wmax or 3 * D) + 1)
    V_range = range(args.vmin, (args.vmax or 3 * D) + 1)
    if len(W_range) == 0 or len(V_range) == 0:
        raise UsageError("empty W or V range")
    dg = run_sweep(args.d, args.scenario, args.test, W_range, V_range, K=args.k, backend=args.backend,
                   trials=args.trials, seed=args.seed, parallelism=args.jobs,
                   record_runtime=not args.no_runtime)
    for fmt in ("csv", "json", "svg"):
        emit(dg, fmt, f"{args.out_prefix}.{fmt}")
    n = sum(c.verdict == "completable" for c in dg.grid)
    print(f"{len(dg.grid)} cells, {n} completable -> {args.out_prefix}.{{csv,json,svg}}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    shape, mask = _resolve_problem(args)
    rng = np.random.default_rng(args.seed)
    P = random_configuration(shape, rng)
    report: dict = {"check": args.check}
    if args.check == "jacobian":
        Ja, Jf = jacobian(P, mask), fd_jacobian(P, mask)
        err = float(np.max(np.abs(Ja - Jf)) / max(1.0, np.max(np.abs(Ja)))) if Ja.size else 0.0
        report.update(max_rel_error=err)
        ok = err <= 1e-6
    else:
        fact = factor_data(P.data(), shape.D)
        if args.check == "criterion":
            r_data = svd_rank(build_criterion(fact, mask).entries).computed_rank
            r_ref = svd_rank(reference_criterion(fact, mask).entries).computed_rank
            report.update(rank_data_form=r_data, rank_factor_form=r_ref)
            ok = r_ref == r_data
        elif args.check == "uniqueness":
            unique = linear_uniqueness_oracle(fact, mask, seed=args.seed)
            verdict = global_test(shape, mask, seed=args.seed)
            report.update(oracle_unique=unique, global_completable=verdict.completable)
            ok = unique == verdict.completable
        else:
            res = perturbation_search(P, extract_knowledge(P, mask), restarts=args.restarts, seed=args.seed)
            verdict = local_test(shape, mask, seed=args.seed)
            report.update(res.to_dict(), local_completable=verdict.completable)
            ok = res.found_nontrivial_deformation != verdict.completable
    report["agree"] = ok
    print(json.dumps(report, indent=2))
    return EXIT_OK if ok else EXIT_FLEXIBLE


def cmd_gen_model(args) -> int:
    model = random_quantum_model(args.d, args.W, args.V, args.K, degeneracies=args.degeneracies,
                                 projective=args.projective, seed=args.seed)
    P = model.configuration()
    data = born_data(model).entries
    mask = scenario_mask(P.shape, args.scenario)
    gio.write_json(gio.configuration_to_dict(P), f"{args.out_prefix}.config.json")
    gio.write_matrix_csv(data, f"{args.out_prefix}.data.csv")
    gio.write_json(gio.knowledge_to_dict(extract_knowledge(P, mask)), f"{args.out_prefix}.knowledge.json")
    print(f"wrote {args.out_prefix}.config.json, .data.csv, .knowledge.json")
    return EXIT_OK


def dispatch(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=str(args.log_level).upper(), format="%(levelname)s %(name)s: %(message)s")
    log.debug("arguments: %s", vars(args))
    try:
        if args.command in ("local-test", "global-test"):
            return cmd_test(args, args.command.split("-")[0])
        if args.command == "reconstruct":
            return cmd_reconstruct(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "oracle":
            return cmd_oracle(args)
        return cmd_gen_model(args)
    except (UsageError, ShapeError) as exc:
        print(f"gramrig: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotUniqueError as exc:
        print(f"gramrig: {exc}", file=sys.stderr)
        return EXIT_FLEXIBLE
    except (InconsistentKnowledgeError, NoRealConfigurationError, GramrigError) as exc:
        print(f"gramrig: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"gramrig: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
