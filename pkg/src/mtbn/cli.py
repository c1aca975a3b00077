"""Command line front end.

Instance references look like VAR@T for stamped instances and plain VAR for
unstamped ones; bindings append =value.  Exit status is 0 on success, 1 when
the model fails validation or the requested computation cannot be carried
out, and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .deploy import deploy_model
from .errors import MtbnError
from .exact import DEFAULT_CAP, exact_query, export_bn
from .model import (parse_model_file, serialize_model, validate_model)
from .patterns import apply_intervention
from .sample import (forward_simulate, likelihood_weighting_query,
                     logic_sampling_query)
from .structure import check_well_defined, structure_count


def _binding(text: str) -> tuple[str, str]:
    ref, sep, value = text.partition("=")
    if not sep or not ref or not value:
        raise argparse.ArgumentTypeError(
            f"expected REF=value (e.g. G@3=high), got {text!r}")
    return ref, value


def _evidence_dict(chunks) -> dict[str, str]:
    out: dict[str, str] = {}
    for chunk in chunks or []:
        for part in chunk.split(","):
            part = part.strip()
            if not part:
                continue
            ref, value = _binding(part)
            out[ref] = value
    return out


def _emit(payload, pretty_lines, args, path=None) -> None:
    if getattr(args, "json", False):
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = "\n".join(pretty_lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_valid(path: str):
    m = parse_model_file(path)
    diags = validate_model(m)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        for d in errors:
            print(str(d), file=sys.stderr)
        raise MtbnError(f"model fails validation with {len(errors)} error(s)")
    return m


def cmd_validate(args) -> int:
    m = parse_model_file(args.model)
    diags = validate_model(m, certify=not args.no_certify)
    errors = [d for d in diags if d.severity == "error"]
    payload = {"valid": not errors,
               "diagnostics": [{"code": d.code, "severity": d.severity,
                                "message": d.message, "subject": d.subject}
                               for d in diags]}
    lines = [str(d) for d in diags]
    lines.append("valid" if not errors else "invalid")
    _emit(payload, lines, args)
    return 0 if not errors else 1


def cmd_check(args) -> int:
    m = parse_model_file(args.model)
    g = deploy_model(m)
    report = check_well_defined(m, g)
    payload = {
        "certified": report.certified,
        "structures": structure_count(g),
        "cyclic_families": [
            {"config": [[n, v] for n, v in fam.config],
             "witness": list(fam.witness) if fam.witness else None}
            for fam in report.cyclic_families],
        "diagnostics": [{"code": d.code, "severity": d.severity,
                         "message": d.message, "subject": d.subject}
                        for d in report.diagnostics],
    }
    lines = [f"structures: {structure_count(g)}", str(report)]
    _emit(payload, lines, args)
    return 0 if report.certified else 1


def cmd_deploy(args) -> int:
    m = parse_model_file(args.model)
    g = deploy_model(m)
    payload = {
        "instances": [{"name": inst.name, "variable": inst.var,
                       "stamp": inst.stamp, "kind": inst.kind,
                       "domain": list(g.domain(inst))}
                      for inst in g.instances],
        "edges": [{"parent": e.parent.name, "child": e.child.name,
                   "mechanism": e.mechanism_label, "lag": e.lag_value}
                  for e in g.edges],
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {len(payload['instances'])} instances, "
              f"{len(payload['edges'])} candidate edges to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _run_query(m, args) -> int:
    ref, value = args.target
    evidence = _evidence_dict(args.evidence)
    if args.method == "exact":
        p = exact_query(m, (ref, value), evidence, cap=args.cap)
        payload = {"method": "exact", "target": f"{ref}={value}",
                   "evidence": evidence, "p": p}
        lines = [f"p({ref}={value}"
                 + (f" | {', '.join(f'{k}={v}' for k, v in evidence.items())}"
                    if evidence else "") + f") = {p:.6g}"]
        _emit(payload, lines, args)
        return 0
    fn = logic_sampling_query if args.method == "ls" else likelihood_weighting_query
    run = fn(m, (ref, value), evidence, n=args.n, seed=args.seed,
             workers=args.workers)
    payload = {"method": run.method, "target": f"{ref}={value}",
               "evidence": evidence, "p": run.estimate, "n": run.n,
               "seed": run.seed, "workers": run.workers, "backend": run.backend,
               "distribution": {str(k): v for k, v in run.distribution.items()}}
    if run.accepted is not None:
        payload["accepted"] = run.accepted
    if run.weight_sum is not None:
        payload["weight_sum"] = run.weight_sum
    detail = (f"accepted {run.accepted}/{run.n}" if run.accepted is not None
              else f"n {run.n}")
    lines = [f"p({ref}={value}"
             + (f" | {', '.join(f'{k}={v}' for k, v in evidence.items())}"
                if evidence else "")
             + f") ~= {run.estimate:.6g}   ({run.method}, {detail}, "
             f"seed {run.seed}, {run.backend})"]
    _emit(payload, lines, args)
    return 0


def cmd_query(args) -> int:
    m = _load_valid(args.model)
    return _run_query(m, args)


def cmd_simulate(args) -> int:
    m = _load_valid(args.model)
    res = forward_simulate(m, n=args.n, seed=args.seed, workers=args.workers)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for rec in res.records():
            out.write(json.dumps(rec) + "\n")
    finally:
        if args.out:
            out.close()
            print(f"wrote {res.n} cases to {args.out} (seed {res.seed}, "
                  f"{res.backend})")
    return 0


def cmd_export_bn(args) -> int:
    m = _load_valid(args.model)
    bn = export_bn(m)
    text = json.dumps(bn.to_dict(), indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {len(bn.nodes)} nodes to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_intervene(args) -> int:
    m = _load_valid(args.model)
    bindings = dict(args.do)
    m2 = apply_intervention(m, bindings)
    if args.target is not None:
        return _run_query(m2, args)
    text = serialize_model(m2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote intervened model to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _add_query_flags(p: argparse.ArgumentParser, target_required: bool) -> None:
    p.add_argument("--target", type=_binding, required=target_required,
                   help="query target, REF=value")
    p.add_argument("--evidence", action="append", metavar="REF=value[,REF=value...]",
                   help="observed values; repeatable or comma separated")
    p.add_argument("--method", choices=("exact", "ls", "lw"), default="exact")
    p.add_argument("--n", type=int, default=100000,
                   help="sample count for ls/lw (default 100000)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("MTBN_WORKERS", "1")))
    p.add_argument("--cap", type=int, default=DEFAULT_CAP,
                   help="assignment cap for exact enumeration")
    p.add_argument("--json", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtbn",
        description="Author, validate, deploy and query modifiable temporal "
                    "belief networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and fully validate a model file")
    p.add_argument("model")
    p.add_argument("--no-certify", action="store_true",
                   help="skip structure certification")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("check", help="certify that cyclic structures carry zero mass")
    p.add_argument("model")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("deploy", help="print the deployed instances and candidate edges")
    p.add_argument("model")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_deploy)

    p = sub.add_parser("query", help="compute p(target | evidence)")
    p.add_argument("model")
    _add_query_flags(p, target_required=True)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("simulate", help="draw forward samples as JSON lines")
    p.add_argument("model")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("MTBN_WORKERS", "1")))
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("export-bn", help="export the equivalent Bayesian network")
    p.add_argument("model")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_export_bn)

    p = sub.add_parser("intervene",
                       help="fix variables by intervention, then query or save")
    p.add_argument("model")
    p.add_argument("--do", type=_binding, action="append", required=True,
                   metavar="VAR=value", help="intervention binding; repeatable")
    p.add_argument("-o", "--out")
    _add_query_flags(p, target_required=False)
    p.set_defaults(fn=cmd_intervene)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except MtbnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
