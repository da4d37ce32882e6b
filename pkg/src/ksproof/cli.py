"""Command-line front end.

Exit codes:
  0 = success, and for claim-bearing commands the claim holds
  1 = verification or claim failure
  2 = usage, input or parse error
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, TextIO

import numpy as np

from . import __version__
from .ksset import (
    Context,
    KSParseError,
    KSSet,
    KSSetError,
    PreconditionError,
    bundled_path,
    count_colorings,
    find_coloring,
    load_ksset,
    parity_certificate,
    verify,
)
from .nchv import TABLE_QUESTION_RAYS, table_iii
from .quantum import (
    DensityMatrix,
    NonOrthogonalContextError,
    State,
    StateVector,
    discriminate,
    parse_state,
    sample_many,
    test_distribution,
)
from .twoqubit import (
    ContextClass,
    LabelParseError,
    YesNoQuestion,
    class_counts,
    classify_set,
    load_labels,
    load_table2_labels,
    translate_set,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


# -- structured documents --------------------------------------------------------


def emit(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def parse(text: str) -> dict[str, Any]:
    return json.loads(text)


def ksset_document(
    ks: KSSet,
    *,
    coloring: bool = False,
    count: bool = False,
    strong: bool = False,
    parity: bool = False,
) -> dict[str, Any]:
    """Shared report for verify/color/parity. Fields not computed are null."""
    rep = verify(ks)
    doc: dict[str, Any] = {
        "dim": ks.dim,
        "ray_count": len(ks.rays),
        "context_count": len(ks.contexts),
        "ok": rep.ok,
        "occurrences": dict(rep.occurrences),
        "offenses": [
            {"context": s.name, "status": s.status, "pair": list(s.pair) if s.pair else None}
            for s in rep.offenses
        ],
        "colorable": None,
        "coloring": None,
        "coloring_count": None,
        "parity_certificate": None,
    }
    if not rep.ok:
        return doc
    if coloring:
        found = find_coloring(ks, strong_orthogonality=strong)
        doc["colorable"] = found is not None
        doc["coloring"] = found
    if count:
        doc["coloring_count"] = count_colorings(ks, strong_orthogonality=strong)
    if parity:
        cert = parity_certificate(ks)
        doc["parity_certificate"] = (
            None if cert is None else {"context_count": cert.context_count, "occurrences": dict(cert.occurrences)}
        )
    return doc


def _state_doc(state: State) -> Any:
    if isinstance(state, StateVector):
        return {"kind": "pure", "amplitudes": [[z.real, z.imag] for z in state.amplitudes.tolist()]}
    return {"kind": "mixed", "matrix": [[[z.real, z.imag] for z in row] for row in state.matrix.tolist()]}


# -- text rendering ----------------------------------------------------------------


def _verify_text(doc: dict[str, Any]) -> str:
    n_ctx = doc["context_count"]
    ok_ctx = n_ctx - len(doc["offenses"])
    occ = set(doc["occurrences"].values())
    occ_s = f"occurrences all {occ.pop()}" if len(occ) == 1 else f"occurrences {min(occ)}..{max(occ)}" if occ else "no rays"
    lines = [f"{ok_ctx}/{n_ctx} contexts ok, {doc['ray_count']} rays, {occ_s}"]
    for off in doc["offenses"]:
        if off["pair"]:
            lines.append(f"context {off['context']}: {off['status']} ({off['pair'][0]}, {off['pair'][1]})")
        else:
            lines.append(f"context {off['context']}: {off['status']}")
    return "\n".join(lines)


def _color_text(doc: dict[str, Any]) -> str:
    if not doc["ok"]:
        return _verify_text(doc)
    if doc["colorable"]:
        yes = [n for n, v in doc["coloring"].items() if v]
        first = "coloring found: yes = " + ", ".join(yes)
    else:
        first = "no coloring exists (search)"
    cert = doc["parity_certificate"]
    first += "; parity certificate found" if cert else "; no parity certificate"
    lines = [first]
    if doc["coloring_count"] is not None:
        lines.append(f"colorings: {doc['coloring_count']}")
    return "\n".join(lines)


def _parity_text(doc: dict[str, Any]) -> str:
    if not doc["ok"]:
        return _verify_text(doc)
    cert = doc["parity_certificate"]
    if cert is None:
        occ = doc["occurrences"]
        odd = [n for n, k in occ.items() if k % 2]
        why = f"odd occurrence for {', '.join(odd)}" if odd else "even number of contexts"
        return f"no parity certificate ({why})"
    counts = set(cert["occurrences"].values())
    return (
        f"parity certificate: {cert['context_count']} contexts (odd), "
        f"every ray occurs an even number of times ({', '.join(map(str, sorted(counts)))})"
    )


_YESNO = {True: "yes", False: "no"}


def _table_text(doc: dict[str, Any]) -> str:
    heads = ["z1", "x1", "z2", "x2"] + doc["product_columns"] + doc["question_columns"]
    widths = [max(len(h), 3) for h in heads]
    out = ["  ".join(h.ljust(w) for h, w in zip(heads, widths))]
    for st, pr, an in zip(doc["states"], doc["products"], doc["answers"]):
        cells = list(st["pattern"]) + ["+" if v > 0 else "-" for v in pr] + an
        out.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    return "\n".join(out)


# -- commands ------------------------------------------------------------------------


def _load_set(path: str) -> KSSet:
    p = Path(path)
    if not p.exists() and bundled_path(p.name).exists() and p.parent == Path("."):
        p = bundled_path(p.name)
    try:
        return load_ksset(p)
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except (KSParseError, KSSetError) as e:
        raise UsageError(f"{path}: {e}") from None


def _load_labels(path: str | None) -> dict[str, YesNoQuestion]:
    if path is None:
        return load_table2_labels()
    p = Path(path)
    if not p.exists() and bundled_path(p.name).exists() and p.parent == Path("."):
        p = bundled_path(p.name)
    try:
        return load_labels(p)
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except LabelParseError as e:
        raise UsageError(f"{path}: {e}") from None


def _state(args: argparse.Namespace) -> State:
    if getattr(args, "density", None):
        try:
            rows = [
                [complex(*map(float, cell.split(","))) for cell in line.split()]
                for line in Path(args.density).read_text().splitlines()
                if line.strip() and not line.lstrip().startswith("#")
            ]
            return DensityMatrix(np.array(rows))
        except FileNotFoundError:
            raise UsageError(f"{args.density}: no such file") from None
        except (ValueError, TypeError) as e:
            raise UsageError(f"{args.density}: {e}") from None
    try:
        return parse_state(args.state)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_verify(args: argparse.Namespace) -> tuple[int, dict[str, Any], str]:
    doc = ksset_document(_load_set(args.file))
    return (EXIT_OK if doc["ok"] else EXIT_FAIL), doc, _verify_text(doc)


def cmd_color(args: argparse.Namespace) -> tuple[int, dict[str, Any], str]:
    doc = ksset_document(
        _load_set(args.file), coloring=True, count=args.count, strong=args.strong_orthogonality, parity=True
    )
    code = EXIT_OK if doc["ok"] and doc["colorable"] is False else EXIT_FAIL
    return code, doc, _color_text(doc)


def cmd_parity(args: argparse.Namespace) -> tuple[int, dict[str, Any], str]:
    doc = ksset_document(_load_set(args.file), parity=True)
    code = EXIT_OK if doc["ok"] and doc["parity_certificate"] is not None else EXIT_FAIL
    return code, doc, _parity_text(doc)


def cmd_translate(args: argparse.Namespace) -> tuple[int, dict[str, Any], str]:
    ks = _load_set(args.file)
    labels = _load_labels(args.labels)
    try:
        rep = translate_set(ks, labels)
    except ValueError as e:
        raise UsageError(str(e)) from None
    doc = {
        "ok": rep.ok,
        "matches": [
            {
                "ray": m.name,
                "label": m.label,
                "stored": str(m.stored),
                "derived": None if m.derived is None else str(m.derived),
                "ok": m.ok,
                "error": m.error,
            }
            for m in rep.matches
        ],
    }
    good = sum(m.ok for m in rep.matches)
    lines = [f"{good}/{len(rep.matches)} labels reproduce their rays"]
    for m in rep.mismatches:
        got = m.error if m.derived is None else f"gives {m.derived}"
        lines.append(f"mismatch {m.name}: {m.label} {got}, stored {m.stored}")
    return (EXIT_OK if rep.ok else EXIT_FAIL), doc, "\n".join(lines)


def cmd_classify(args: argparse.Namespace) -> tuple[int, dict[str, Any], str]:
    ks = _load_set(args.file)
    labels = _load_labels(args.labels)
    try:
        classes = classify_set(ks, labels)
    except KeyError as e:
        raise UsageError(e.args[0]) from None
    counts = class_counts(classes)
    doc = {
        "classes": {k: v.value for k, v in classes.items()},
        "counts": {c.value: counts.get(c, 0) for c in ContextClass},
    }
    lines = [f"{k}: {v.value}" for k, v in classes.items()]
    lines.append(", ".join(f"{n} {k}" for k, n in doc["counts"].items()))
    return EXIT_OK, doc, "\n".join(lines)


def cmd_nchv_table(args: argparse.Namespace) -> tuple[int, dict[str, Any], str]:
    labels = load_table2_labels()
    rows = table_iii(labels)
    doc = {
        "states": [{"pattern": r.pattern, "representative": str(r.representative)} for r in rows],
        "product_columns": ["z1z2", "x1x2", "z1x2", "x1z2"],
        "products": [list(r.products) for r in rows],
        "question_columns": [_table_question_name(labels[n]) for n in TABLE_QUESTION_RAYS],
        "answers": [[_YESNO[a] for a in r.answers] for r in rows],
    }
    return EXIT_OK, doc, _table_text(doc)


def _table_question_name(q: YesNoQuestion) -> str:
    # e.g. "zz+xx-"
    return "".join(str(o).lower() for o in q.observables())


def cmd_predict(args: argparse.Namespace) -> tuple[int, dict[str, Any], str]:
    ks = _load_set(args.file)
    ctx = _context(ks, args.context)
    state = _state(args)
    try:
        dist = test_distribution(state, ctx, ks)
    except NonOrthogonalContextError as e:
        doc = {"context": ctx.name, "error": str(e)}
        return EXIT_FAIL, doc, str(e)
    doc = {
        "context": ctx.name,
        "state": _state_doc(state),
        "members": list(dist.members),
        "probabilities": list(dist.probabilities),
        "total": dist.total(),
    }
    lines = [f"{m}: {p:.12f}" for m, p in zip(dist.members, dist.probabilities)]
    lines.append(f"total: {dist.total():.12f}")
    return EXIT_OK, doc, "\n".join(lines)


def cmd_sample(args: argparse.Namespace) -> tuple[int, dict[str, Any], str]:
    ks = _load_set(args.file)
    ctx = _context(ks, args.context)
    state = _state(args)
    try:
        dist = test_distribution(state, ctx, ks)
        outcomes = sample_many(state, ctx, ks, args.trials, np.random.default_rng(args.seed))
    except NonOrthogonalContextError as e:
        return EXIT_FAIL, {"context": ctx.name, "error": str(e)}, str(e)
    counts = np.bincount(outcomes, minlength=len(ctx.members))
    doc = {
        "context": ctx.name,
        "seed": args.seed,
        "trials": args.trials,
        "state": _state_doc(state),
        "members": list(ctx.members),
        "probabilities": list(dist.probabilities),
        "counts": {m: int(c) for m, c in zip(ctx.members, counts)},
        "yes_count_histogram": {"1": args.trials},
    }
    lines = [f"seed {args.seed}, {args.trials} runs of {ctx.name}, one yes per run"]
    lines += [f"{m}: {int(c)} (p = {p:.6f})" for m, c, p in zip(ctx.members, counts, dist.probabilities)]
    return EXIT_OK, doc, "\n".join(lines)


def cmd_discriminate(args: argparse.Namespace) -> tuple[int, dict[str, Any], str]:
    ks = _load_set(args.ks) if args.ks else None
    labels = _load_labels(args.labels) if args.labels else None
    state = _state(args)
    try:
        rep = discriminate(args.trials, state, weights=args.weights, seed=args.seed, ks=ks, labels=labels, context=args.context)
    except KeyError as e:
        raise UsageError(f"unknown context {e.args[0]}") from None
    except NonOrthogonalContextError as e:
        return EXIT_FAIL, {"context": args.context, "error": str(e)}, str(e)
    except ValueError as e:
        raise UsageError(str(e)) from None
    doc = {
        "context": rep.context,
        "trials": rep.trials,
        "seed": rep.seed,
        "state": _state_doc(state),
        "weights": list(rep.weights),
        "qm": {"yes_count_histogram": {str(k): v for k, v in rep.qm_histogram.items()}},
        "nchv": {"yes_count_histogram": {str(k): v for k, v in rep.nchv_histogram.items()}},
        "separated_runs": rep.separated_runs,
        "ok": rep.ok,
    }
    if rep.trials == 1:
        qm_text = f"QM yes-count {int(rep.qm_yes_counts[0])}"
        hv_text = f"NCHV yes-count {int(rep.nchv_yes_counts[0])}"
    else:
        qm_text = "QM yes-counts " + _hist_text(rep.qm_histogram)
        hv_text = "NCHV yes-counts " + _hist_text(rep.nchv_histogram)
    verdict = "every run separates QM from NCHV" if rep.ok else "separation FAILED"
    text = f"{rep.trials} run(s) of {rep.context}, seed {rep.seed}\n{qm_text}\n{hv_text}\n{verdict}"
    return (EXIT_OK if rep.ok else EXIT_FAIL), doc, text


def _hist_text(h: dict[int, int]) -> str:
    return ", ".join(f"{k}: {v}" for k, v in h.items())


def _context(ks: KSSet, name: str) -> Context:
    try:
        return ks.context(name)
    except KeyError:
        raise UsageError(f"unknown context {name}") from None


# -- argument parsing ------------------------------------------------------------------


def _add_state_args(p: argparse.ArgumentParser, default: str | None = None) -> None:
    g = p.add_mutually_exclusive_group(required=default is None)
    g.add_argument("--state", default=default, help="preset (singlet, z00, phi+) or four 're,im' pairs")
    g.add_argument("--density", metavar="FILE", help="density matrix file: 4 lines of 4 're,im' entries")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "structured"), default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="ksproof", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("text", "structured"), default="text")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[fmt], help="check contexts are orthogonal bases")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("color", parents=[fmt], help="search for a yes/no coloring")
    p.add_argument("file")
    p.add_argument("--strong-orthogonality", action="store_true", help="also forbid two orthogonal yes rays")
    p.add_argument("--count", action="store_true", help="count all colorings")
    p.set_defaults(func=cmd_color)

    p = sub.add_parser("parity", parents=[fmt], help="look for a parity certificate")
    p.add_argument("file")
    p.set_defaults(func=cmd_parity)

    for name, func, helptext in (
        ("translate", cmd_translate, "compare rays with their two-qubit labels"),
        ("classify", cmd_classify, "classify contexts by question type"),
    ):
        p = sub.add_parser(name, parents=[fmt], help=helptext)
        p.add_argument("file")
        p.add_argument("labels")
        p.set_defaults(func=func)

    p = sub.add_parser("nchv-table", parents=[fmt], help="hidden-variable values for the ninth test")
    p.set_defaults(func=cmd_nchv_table)

    p = sub.add_parser("predict", parents=[fmt], help="Born-rule outcome probabilities for a context")
    p.add_argument("file")
    p.add_argument("--context", required=True)
    _add_state_args(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sample", parents=[fmt], help="seeded runs of a context measurement")
    p.add_argument("file")
    p.add_argument("--context", required=True)
    _add_state_args(p)
    p.add_argument("--trials", type=_positive_int, default=1)
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("discriminate", parents=[fmt], help="QM vs NCHV yes counts on the all-entangled test")
    _add_state_args(p, default="singlet")
    p.add_argument("--trials", type=_positive_int, default=1)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--weights", type=float, nargs=16, metavar="W", help="16 hidden-state weights (default uniform)")
    p.add_argument("--context", default="c9")
    p.add_argument("--ks", metavar="FILE", help="KS set file (default: bundled table1.ks)")
    p.add_argument("--labels", metavar="FILE", help="label file (default: bundled table2.labels)")
    p.set_defaults(func=cmd_discriminate)
    return parser


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _seed(s: str) -> int:
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def run(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        old_out, old_err = sys.stdout, sys.stderr
        sys.stdout, sys.stderr = stdout, stderr
        try:
            args = parser.parse_args(argv)
        finally:
            sys.stdout, sys.stderr = old_out, old_err
    except SystemExit as e:
        return int(e.code or 0)

    try:
        code, doc, text = args.func(args)
    except UsageError as e:
        print(f"ksproof: error: {e}", file=stderr)
        return EXIT_USAGE
    except PreconditionError as e:
        print(f"ksproof: {e}", file=stderr)
        return EXIT_FAIL

    doc = {"command": args.command, **doc}
    if args.format == "structured":
        stdout.write(emit(doc))
    else:
        stdout.write(text + "\n")
    return code


def main() -> None:
    sys.exit(run())
