"""Command-line entry point wiring all modules into reproducible runs.

Every artifact-producing subcommand writes its resolved configuration
(``<prefix>.config.txt``, flat ``key = value`` lines) next to its outputs,
and any run can be replayed from such a file via ``--config`` (explicit
flags override file values).  All randomness flows from ``--seed``:
learning curves use partition seeds ``seed, seed+1, ...`` and perturbation
replicates derive their generators from ``(seed, replicate_index)``.
Output files are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import dataset as ds_mod
from . import evaluation as ev
from . import interpreter as interp
from . import learner as ln
from . import perturbation as pb
from . import theory as th
from .errors import TgciError

SUBCOMMANDS = ("parse", "validate", "redescribe", "train", "eval", "curve",
               "loo", "perturb", "sweep", "fragment", "theory-score")


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_config(args, outdir: Path, prefix: str):
    skip = {"config", "func"}
    lines = []
    for key in sorted(vars(args)):
        if key in skip:
            continue
        value = getattr(args, key)
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    _atomic_write(outdir / f"{prefix}.config.txt", "\n".join(lines) + "\n")


def _load_config_defaults(parser: argparse.ArgumentParser, path: str) -> dict:
    """Parse a flat key = value file into typed defaults for the parser."""
    actions = {a.dest: a for a in parser._actions}
    defaults = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise TgciError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key == "subcommand" or key not in actions:
            continue
        action = actions[key]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            defaults[key] = action.type(value)
        else:
            defaults[key] = value
    return defaults


def _read_theory(path: str) -> th.Theory:
    return th.parse_theory(Path(path).read_text())


def _read_dataset(path: str, fmt: str) -> ds_mod.Dataset:
    text = Path(path).read_text()
    if fmt == "auto":
        first = next((line for line in text.splitlines() if line.strip()), "")
        fmt = "sequence" if len(first.split(",")) == 3 else "tabular"
    if fmt == "sequence":
        return ds_mod.load_sequence_format(text)
    return ds_mod.load_tabular(text)


def _options_from(args) -> interp.InterpreterOptions:
    return interp.InterpreterOptions(
        kind=interp.BOOLEAN if getattr(args, "kind", "partial-match") == "boolean"
        else interp.PARTIAL_MATCH,
        not_emits_feature=getattr(args, "not_emits_feature", False),
        include_original_features=getattr(args, "include_original", False),
        top_feature_included=not getattr(args, "no_top_feature", False),
    )


def _params_from(args) -> ln.LearnerParams:
    return ln.LearnerParams(
        min_leaf=getattr(args, "min_leaf", 2),
        pruning_confidence=getattr(args, "pruning_confidence", 0.25),
        use_gain_ratio=not getattr(args, "no_gain_ratio", False),
        seed=getattr(args, "seed", 0),
    )


def _parse_sizes(spec: str) -> list[int]:
    """'8:80:8' (inclusive range) or '8,16,24' or a single size."""
    if ":" in spec:
        parts = [int(p) for p in spec.split(":")]
        if len(parts) != 3:
            raise TgciError(f"bad --sizes {spec!r}: want start:stop:step")
        start, stop, step = parts
        if step <= 0:
            raise TgciError("--sizes step must be positive")
        return list(range(start, stop + 1, step))
    return [int(p) for p in spec.split(",") if p.strip()]


def _jobs_default() -> int:
    try:
        return max(1, int(os.environ.get("TGCI_JOBS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# Subcommand handlers
# --------------------------------------------------------------------------


def _cmd_parse(args) -> int:
    theory = _read_theory(args.theory)
    print(f"parsed {len(theory.concepts)} concept(s): {', '.join(theory.concept_names)}")
    print(f"internal (AND/OR/NOT) nodes: "
          f"{sum(1 for r in theory.roots for n in r.iter_nodes() if n.is_internal)}")
    for name, root in theory.concepts:
        leaves = sum(1 for n in root.iter_nodes() if n.kind == th.LEAF)
        print(f"  concept {name}: {leaves} leaf conditions")
    if args.render:
        print(th.render_theory(theory), end="")
    return 0


def _cmd_validate(args) -> int:
    theory = _read_theory(args.theory)
    dataset = _read_dataset(args.data, args.format)
    findings = th.validate(theory, dataset.schema)
    if not findings:
        print("theory is consistent with the dataset schema")
        return 0
    print(f"{len(findings)} finding(s):")
    for f in findings:
        print(f"  {f}")
    return 1


def _cmd_fragment(args) -> int:
    theory = _read_theory(args.theory)
    sub = th.fragment(theory, args.head)
    text = th.render_theory(sub)
    if args.out_file:
        _atomic_write(Path(args.out_file), text)
        print(f"wrote {args.out_file}")
    else:
        print(text, end="")
    return 0


def _cmd_redescribe(args) -> int:
    theory = _read_theory(args.theory)
    dataset = _read_dataset(args.data, args.format)
    options = _options_from(args)
    cschema, examples = interp.redescribe(dataset, theory, options)
    outdir = Path(args.out)
    _atomic_write(outdir / "redescribed.csv", interp.redescribed_to_csv(cschema, examples))
    _write_config(args, outdir, "redescribe")
    print(f"wrote {outdir / 'redescribed.csv'} "
          f"({len(examples)} examples x {len(cschema)} features)")
    return 0


def _cmd_train(args) -> int:
    dataset = _read_dataset(args.data, args.format)
    params = _params_from(args)
    if args.theory:
        theory = _read_theory(args.theory)
        options = _options_from(args)
        cschema, examples = interp.redescribe(dataset, theory, options)
        table = ln.table_from_redescription(cschema, examples)
    else:
        table = ln.table_from_dataset(dataset)
    tree = ln.train(table, params)
    outdir = Path(args.out)
    _atomic_write(outdir / "tree.txt", ln.render_tree(tree))
    _atomic_write(outdir / "tree.json", ln.tree_to_json(tree) + "\n")
    _write_config(args, outdir, "train")
    print(f"trained tree with {tree.n_nodes} nodes; wrote {outdir / 'tree.txt'} "
          f"and {outdir / 'tree.json'}")
    return 0


def _cmd_eval(args) -> int:
    dataset = _read_dataset(args.data, args.format)
    theory = _read_theory(args.theory) if args.theory else None
    points, report = ev.learning_curve(
        dataset, theory, args.method, [args.train], args.test, args.partitions,
        seeds=args.seed, learner_params=_params_from(args),
        interpreter_options=_options_from(args), jobs=args.jobs)
    outdir = Path(args.out)
    _atomic_write(outdir / "eval.csv", ev.report_to_csv(report))
    _atomic_write(outdir / "eval.json", ev.report_to_json(report) + "\n")
    _write_config(args, outdir, "eval")
    p = points[0]
    print(f"{args.method}: train={args.train} test={args.test} "
          f"partitions={args.partitions} mean accuracy {p.mean_accuracy:.4f} "
          f"(95% CI +/- {p.ci_half_width:.4f})")
    return 0


def _cmd_curve(args) -> int:
    dataset = _read_dataset(args.data, args.format)
    theory = _read_theory(args.theory) if args.theory else None
    sizes = _parse_sizes(args.sizes)
    points, report = ev.learning_curve(
        dataset, theory, args.method, sizes, args.test, args.partitions,
        seeds=args.seed, learner_params=_params_from(args),
        interpreter_options=_options_from(args), jobs=args.jobs)
    outdir = Path(args.out)
    _atomic_write(outdir / "curve.csv", ev.curve_to_csv(points))
    _atomic_write(outdir / "report.csv", ev.report_to_csv(report))
    _atomic_write(outdir / "report.json", ev.report_to_json(report) + "\n")
    _write_config(args, outdir, "curve")
    for p in points:
        print(f"size {p.train_size:4d}: {p.mean_accuracy:.4f} +/- {p.ci_half_width:.4f}")
    print(f"wrote {outdir / 'curve.csv'}")
    return 0


def _cmd_loo(args) -> int:
    dataset = _read_dataset(args.data, args.format)
    theory = _read_theory(args.theory) if args.theory else None
    acc = ev.leave_one_out(dataset, theory, args.method,
                           learner_params=_params_from(args),
                           interpreter_options=_options_from(args))
    if args.out:
        outdir = Path(args.out)
        doc = {"method": args.method, "n": len(dataset), "accuracy": acc}
        _atomic_write(outdir / "loo.json", json.dumps(doc, indent=2) + "\n")
        _write_config(args, outdir, "loo")
    print(f"leave-one-out accuracy ({args.method}, n={len(dataset)}): {acc:.4f}")
    return 0


def _cmd_theory_score(args) -> int:
    theory = _read_theory(args.theory)
    dataset = _read_dataset(args.data, args.format)
    result = ev.theory_only_classify(theory, dataset)
    print(f"theory-only accuracy: {result.accuracy:.4f} "
          f"({sum(1 for v in result.verdicts if v.predicted == v.actual)}/{len(dataset)} correct)")
    print(f"exact matches: {result.exact_match_count}")
    return 0


def _cmd_perturb(args) -> int:
    theory = _read_theory(args.theory)
    dataset = _read_dataset(args.data, args.format)
    spec = pb.ProximitySpec(args.direction, args.rate, seed=args.seed,
                            replicate_index=args.replicate)
    perturbed = pb.perturb(dataset, theory, spec)
    outdir = Path(args.out)
    try:
        text = ds_mod.to_sequence_text(perturbed)
        name = "perturbed.data"
    except TgciError:
        text = ds_mod.to_tabular_text(perturbed)
        name = "perturbed.csv"
    _atomic_write(outdir / name, text)
    _write_config(args, outdir, "perturb")
    print(f"wrote {outdir / name} (direction={args.direction}, rate={args.rate})")
    return 0


def _cmd_sweep(args) -> int:
    theory = _read_theory(args.theory)
    dataset = _read_dataset(args.data, args.format)
    specs = []
    for rate in args.fewer_matches:
        specs.append(pb.ProximitySpec(pb.FEWER_MATCHES, rate, seed=args.seed))
    for rate in args.fewer_mismatches:
        specs.append(pb.ProximitySpec(pb.FEWER_MISMATCHES, rate, seed=args.seed))
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    points = pb.proximity_sweep(dataset, theory, specs, args.replicates, methods,
                                learner_params=_params_from(args),
                                interpreter_options=_options_from(args),
                                jobs=args.jobs)
    outdir = Path(args.out)
    _atomic_write(outdir / "sweep.csv", pb.sweep_to_csv(points))
    _write_config(args, outdir, "sweep")
    print("note: the fewer-matches (x<0) and fewer-mismatches (x>0) scales "
          "may not be directly comparable")
    for p in points:
        print(f"x={p.proximity_x:+7.1f} {p.method:>14s}: {p.mean_accuracy:.4f} "
              f"+/- {p.ci_half_width:.4f} (n={p.n_replicates})")
    print(f"wrote {outdir / 'sweep.csv'}")
    return 0


# --------------------------------------------------------------------------
# Parser construction
# --------------------------------------------------------------------------


def _rate_list(spec: str) -> list[float]:
    return [float(p) for p in spec.split(",") if p.strip()]


def _add_common_io(p, theory_required=True, needs_data=True):
    p.add_argument("--config", help="flat key = value config file; flags override it")
    if theory_required:
        p.add_argument("--theory", required=False, help="theory DSL file")
    if needs_data:
        p.add_argument("--data", required=False, help="dataset file")
        p.add_argument("--format", choices=("auto", "sequence", "tabular"), default="auto",
                       help="dataset format (default: auto-detect)")


def _add_interp_flags(p):
    p.add_argument("--kind", choices=("partial-match", "boolean"), default="partial-match",
                   help="interpreter kind for redescription (default: partial-match)")
    p.add_argument("--not-emits-feature", action="store_true",
                   help="NOT nodes contribute their own feature")
    p.add_argument("--include-original", action="store_true",
                   help="append the original nominal features")
    p.add_argument("--no-top-feature", action="store_true",
                   help="drop each concept root's own feature")


def _add_learner_flags(p):
    p.add_argument("--min-leaf", type=int, default=2, help="minimum examples per side of a split (default 2)")
    p.add_argument("--pruning-confidence", type=float, default=0.25,
                   help="error-based pruning confidence in (0,1]; 1 disables (default 0.25)")
    p.add_argument("--no-gain-ratio", action="store_true",
                   help="use plain information gain instead of gain ratio")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tgci",
        description="Theory-guided constructive induction: redescribe examples "
                    "with partial-match features from a domain theory and learn "
                    "decision trees over them.")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")

    p = sub.add_parser("parse", help="parse a theory file and print its structure")
    _add_common_io(p, needs_data=False)
    p.add_argument("--render", action="store_true",
                   help="print the canonical DSL rendering (default: off)")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("validate", help="check a theory against a dataset schema")
    _add_common_io(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("fragment", help="extract a named subtree as a new theory")
    _add_common_io(p, needs_data=False)
    p.add_argument("--head", required=True, help="clause head or node path to extract")
    p.add_argument("--out-file", help="write the fragment here instead of stdout")
    p.set_defaults(func=_cmd_fragment)

    p = sub.add_parser("redescribe", help="emit the redescribed dataset as CSV")
    _add_common_io(p)
    _add_interp_flags(p)
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.set_defaults(func=_cmd_redescribe)

    p = sub.add_parser("train", help="train a decision tree (redescribed if --theory given)")
    _add_common_io(p)
    _add_interp_flags(p)
    _add_learner_flags(p)
    p.add_argument("--seed", type=int, default=0, help="recorded RNG seed (default 0)")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="train/test evaluation at one training size")
    _add_common_io(p)
    _add_interp_flags(p)
    _add_learner_flags(p)
    p.add_argument("--method", choices=ev.METHODS, default="tgci")
    p.add_argument("--train", type=int, required=True, help="training set size")
    p.add_argument("--test", type=int, required=True, help="test set size")
    p.add_argument("--partitions", type=int, default=1, help="number of random partitions (default 1)")
    p.add_argument("--seed", type=int, default=0, help="base partition seed (default 0)")
    p.add_argument("--jobs", type=int, default=_jobs_default(),
                   help="parallel workers (default $TGCI_JOBS or 1)")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("curve", help="learning curve over nested training subsets")
    _add_common_io(p)
    _add_interp_flags(p)
    _add_learner_flags(p)
    p.add_argument("--method", choices=ev.METHODS, default="tgci")
    p.add_argument("--sizes", required=True,
                   help="training sizes: start:stop:step (inclusive) or comma list")
    p.add_argument("--test", type=int, required=True, help="test set size")
    p.add_argument("--partitions", type=int, default=50,
                   help="number of random partitions (default 50)")
    p.add_argument("--seed", type=int, default=0, help="base partition seed (default 0)")
    p.add_argument("--jobs", type=int, default=_jobs_default(),
                   help="parallel workers (default $TGCI_JOBS or 1)")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("loo", help="leave-one-out accuracy of one method")
    _add_common_io(p)
    _add_interp_flags(p)
    _add_learner_flags(p)
    p.add_argument("--method", choices=ev.METHODS, default="tgci")
    p.add_argument("--seed", type=int, default=0, help="recorded RNG seed (default 0)")
    p.add_argument("--out", help="optional output directory for loo.json")
    p.set_defaults(func=_cmd_loo)

    p = sub.add_parser("theory-score", help="theory-only baseline accuracy and exact matches")
    _add_common_io(p)
    p.set_defaults(func=_cmd_theory_score)

    p = sub.add_parser("perturb", help="write a perturbed copy of the dataset")
    _add_common_io(p)
    p.add_argument("--direction", choices=pb.DIRECTIONS, required=True)
    p.add_argument("--rate", type=float, required=True, help="perturbation rate in [0,1]")
    p.add_argument("--seed", type=int, default=0, help="perturbation seed (default 0)")
    p.add_argument("--replicate", type=int, default=0, help="replicate index (default 0)")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("sweep", help="theory-proximity sweep (leave-one-out per level)")
    _add_common_io(p)
    _add_interp_flags(p)
    _add_learner_flags(p)
    p.add_argument("--fewer-matches", type=_rate_list, default=[],
                   help="comma list of fewer-matches rates, e.g. 0.1,0.3,0.6,0.9")
    p.add_argument("--fewer-mismatches", type=_rate_list, default=[],
                   help="comma list of fewer-mismatches rates, e.g. 0.3,0.6,0.9")
    p.add_argument("--replicates", type=int, default=10,
                   help="perturbed datasets per level (default 10)")
    p.add_argument("--methods", default="plain,tgci",
                   help="comma list of methods (default plain,tgci)")
    p.add_argument("--seed", type=int, default=0, help="perturbation seed (default 0)")
    p.add_argument("--jobs", type=int, default=_jobs_default(),
                   help="parallel workers (default $TGCI_JOBS or 1)")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, _ = parser.parse_known_args(argv)
    if getattr(args, "subcommand", None) is None:
        parser.print_help()
        return 2
    if getattr(args, "config", None):
        subparser = next(
            a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
        ).choices[args.subcommand]
        try:
            subparser.set_defaults(**_load_config_defaults(subparser, args.config))
        except (OSError, TgciError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    args = parser.parse_args(argv)
    needs_theory = args.subcommand in ("parse", "validate", "fragment", "theory-score",
                                       "perturb", "sweep", "redescribe")
    if needs_theory and not getattr(args, "theory", None):
        print(f"error: {args.subcommand} requires --theory", file=sys.stderr)
        return 2
    needs_data = args.subcommand not in ("parse", "fragment") and not getattr(args, "data", None)
    if needs_data:
        print(f"error: {args.subcommand} requires --data", file=sys.stderr)
        return 2
    if args.subcommand in ("eval", "curve", "loo") and args.method != "plain" \
            and not getattr(args, "theory", None):
        print(f"error: method {args.method!r} requires --theory", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except TgciError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
