"""Command-line front end: enumeration dumps, evaluation, domain queries,
Monte Carlo sampling, and the cross-check battery.

Identical invocations produce byte-identical output: keys have a fixed
order, floats print with 17 significant digits, and all randomness is
seeded explicitly.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import jsonio
from .config import DEFAULT, Limits, load_limits
from .domain import (
    ChargeVector,
    ExponentAssignment,
    beta_threshold,
    check_omega,
    omega_constraints,
    pair_keys,
    pair_label,
    parse_pair_label,
    pole_hyperplanes,
)
from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    PoleError,
    SaturationError,
    SizeLimitError,
    UnsupportedRhoError,
)
from .evaluate import (
    closed_form_n2,
    closed_form_n3,
    expectation,
    low_temp_limit,
    mehta_partition,
    z_full,
    z_reduced,
    z_restricted,
)
from .filtrations import (
    all_filtrations,
    enumerate_filtrations,
    orbit_representatives,
    orbit_weight,
)
from .oracle import (
    exact_truncated_integral,
    max_depth_within_budget,
    monte_carlo_integral,
)
from .partitions import enumerate_partitions
from .rho import RhoSpec
from .verify import run_battery


def _parse_number(text: str):
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return complex(text)
    except ValueError as exc:
        raise DomainError(f"cannot parse number {text!r}") from exc


def _parse_exponents(raw: str | None, n: int, notices: list[str]) -> dict:
    keys = pair_keys(n)
    mapping = {}
    if raw:
        if raw.startswith("@"):
            with open(raw[1:], "r", encoding="utf-8") as fh:
                mapping.update(jsonio.exponents_from_json(json.load(fh)))
        else:
            for chunk in raw.split(","):
                chunk = chunk.strip()
                if not chunk:
                    continue
                if "=" not in chunk:
                    raise DomainError(
                        f"exponent entries look like s_12=1, got {chunk!r}; "
                        f"expected keys: {', '.join(pair_label(*k) for k in keys)}"
                    )
                key, value = chunk.split("=", 1)
                mapping[parse_pair_label(key.strip())] = _parse_number(value)
    unknown = sorted(set(mapping) - set(keys))
    if unknown:
        raise DomainError(
            f"keys {[pair_label(*k) for k in unknown]} do not belong to n={n}; "
            f"expected: {', '.join(pair_label(*k) for k in keys)}"
        )
    for key in keys:
        if key not in mapping:
            notices.append(f"{pair_label(*key)} defaulted to 0")
            mapping[key] = Fraction(0)
    return mapping


def _parse_charges(raw: str) -> list:
    return [_parse_number(chunk) for chunk in raw.split(",") if chunk.strip()]


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(jsonio.dumps(payload))
        return
    # CSV: '# key=value' header comments, then flattened key,value rows.
    lines = [f"# command={payload['command']}"]
    for key, value in payload.get("params", {}).items():
        lines.append(f"# {key}={json.dumps(value, sort_keys=True) if isinstance(value, (dict, list)) else value}")
    for notice in payload.get("notices", []):
        lines.append(f"# notice: {notice}")
    lines.append("key,value")

    def flatten(prefix: str, node):
        if isinstance(node, dict):
            for k, v in node.items():
                flatten(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(node, (list, tuple)):
            for idx, v in enumerate(node):
                flatten(f"{prefix}[{idx}]", v)
        else:
            rendered = (
                jsonio.format_float(node) if isinstance(node, float) else str(node)
            )
            lines.append(f"{prefix},{rendered}")

    flatten("", payload.get("result"))
    sys.stdout.write("\n".join(lines) + "\n")


def _limits(args) -> Limits:
    return load_limits(args.config) if args.config else DEFAULT


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--config", help="key=value file overriding bounds")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padicgas",
        description=(
            "Exact evaluation of log-Coulomb gas integrals over nonarchimedean "
            "local fields, with enumeration, domain queries, and verification."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="dump partitions, filtrations, or orbits")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kind", choices=("filtrations", "partitions", "orbits"),
                   default="filtrations")
    p.add_argument("--reduced", action="store_true")
    _add_common(p)

    p = sub.add_parser("stats", help="per-filtration statistics")
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--reduced", action="store_true")
    p.add_argument("--weights", action="store_true", help="include orbit sizes")
    p.add_argument("--from-json", dest="from_json",
                   help="read filtrations from a JSON file instead of enumerating")
    _add_common(p)

    p = sub.add_parser("evaluate", help="evaluate the integral or a specialization")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", default="0")
    p.add_argument("--b", default="0")
    p.add_argument("--s", help='inline "s_12=1,..." or @file.json')
    p.add_argument("--charges", help='comma list; uses s_ij = beta * q_i * q_j')
    p.add_argument("--beta", default="1")
    p.add_argument("--rho", default="ball:0")
    p.add_argument("--mode", default="z",
                   choices=("z", "z-reduced", "restricted", "mehta", "expectation",
                            "lowtemp", "closed-n2", "closed-n3"))
    p.add_argument("--override", action="store_true",
                   help="evaluate the formula outside the convergence region")
    p.add_argument("--orbit-weights", action="store_true")
    p.add_argument("--precision", type=int, default=53)
    _add_common(p)

    p = sub.add_parser("domain", help="membership, constraints, thresholds, poles")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", default="0")
    p.add_argument("--b", default="0")
    p.add_argument("--s", help='inline "s_12=1,..." or @file.json')
    p.add_argument("--charges")
    p.add_argument("--report", default="membership",
                   choices=("membership", "constraints", "threshold", "poles"))
    p.add_argument("--reduced", action="store_true")
    p.add_argument("--rho", default="ball:0")
    _add_common(p)

    p = sub.add_parser("verify", help="run the cross-check battery")
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--q", default="2,3")
    p.add_argument("--seed", type=int, default=20240801)
    p.add_argument("--trials", type=int, default=5)
    _add_common(p)

    p = sub.add_parser("sample", help="oracle integration over digit matrices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", default="0")
    p.add_argument("--b", default="0")
    p.add_argument("--s", help='inline "s_12=1,..." or @file.json')
    p.add_argument("--depth", type=int)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=20240801)
    p.add_argument("--exact", action="store_true",
                   help="enumerate every matrix instead of sampling")
    p.add_argument("--precision", type=int, default=53)
    _add_common(p)

    return parser


def _assignment(args, n: int, notices: list[str]) -> tuple[ExponentAssignment, dict]:
    a = _parse_number(args.a)
    b = _parse_number(args.b)
    if getattr(args, "charges", None):
        cv = ChargeVector.build(_parse_charges(args.charges), _parse_number(args.beta))
        if cv.n != n:
            raise DimensionError(f"{cv.n} charges given for n={n}")
        e = cv.exponents(a=a, b=b)
        echo = {"charges": [jsonio.number_to_json(c) for c in cv.charges],
                "beta": jsonio.number_to_json(cv.beta)}
        return e, echo
    s = _parse_exponents(getattr(args, "s", None), n, notices)
    e = ExponentAssignment.build(n, s, a, b)
    return e, {"s": jsonio.exponents_to_json(e.s)}


def _cmd_enumerate(args) -> dict:
    limits = _limits(args)
    if args.kind == "partitions":
        items = [jsonio.partition_to_json(p) for p in enumerate_partitions(args.n, limits)]
    elif args.kind == "orbits":
        items = [
            {"representative": jsonio.filtration_to_json(spl), "weight": w}
            for spl, w in orbit_representatives(args.n, args.reduced, limits)
        ]
    else:
        items = [
            jsonio.filtration_to_json(spl)
            for spl in enumerate_filtrations(args.n, limits, reduced_only=args.reduced)
        ]
    return {"count": len(items), "items": items}


def _cmd_stats(args) -> dict:
    limits = _limits(args)
    if args.from_json:
        with open(args.from_json, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if data and isinstance(data[0][0][0], int):  # a single filtration
            data = [data]
        spls = [jsonio.filtration_from_json(d) for d in data]
    else:
        if args.n is None:
            raise DomainError("stats needs --n or --from-json")
        spls = [
            spl for spl in all_filtrations(args.n, limits)
            if not args.reduced or spl.is_reduced()
        ]
    items = []
    for spl in spls:
        entry = {
            "chain": jsonio.filtration_to_json(spl),
            "length": spl.length,
            "reduced": spl.is_reduced(),
            "multiplicity": spl.multiplicity(args.q),
            "branches": [
                {
                    "block": list(b),
                    "depth": spl.branch_depth(b),
                    "degree": spl.branch_degree(b),
                }
                for b in spl.branches()
            ],
        }
        if args.weights:
            entry["weight"] = orbit_weight(spl, limits)
        items.append(entry)
    return {"count": len(items), "items": items}


def _cmd_evaluate(args, notices: list[str]) -> tuple[dict, dict]:
    limits = _limits(args)
    rho = RhoSpec.parse(args.rho)
    mode = args.mode
    if mode in ("mehta", "expectation", "lowtemp"):
        if not args.charges:
            raise DomainError(f"mode {mode} needs --charges")
        cv = ChargeVector.build(_parse_charges(args.charges), _parse_number(args.beta))
        echo = {"charges": [jsonio.number_to_json(c) for c in cv.charges],
                "beta": jsonio.number_to_json(cv.beta)}
        a, b = _parse_number(args.a), _parse_number(args.b)
        if mode == "mehta":
            scalar = mehta_partition(args.n, args.q, cv, rho,
                                     use_orbit_weights=args.orbit_weights,
                                     precision=args.precision, limits=limits)
            return {"value": scalar.to_json()}, echo
        if mode == "expectation":
            scalar = expectation(args.n, args.q, cv, a, b, rho,
                                 precision=args.precision, limits=limits)
            return {"value": scalar.to_json()}, echo
        result = low_temp_limit(args.n, args.q, cv, a, b, rho,
                                precision=args.precision, limits=limits)
        return {
            "value": result.value.to_json(),
            "min_interaction": jsonio.number_to_json(result.min_interaction),
        }, echo
    if mode == "closed-n2" and args.n != 2:
        raise DomainError("mode closed-n2 needs --n 2")
    if mode == "closed-n3" and args.n != 3:
        raise DomainError("mode closed-n3 needs --n 3")
    e, echo = _assignment(args, args.n, notices)
    if mode == "z":
        scalar = z_full(args.q, e, rho, override=args.override,
                        precision=args.precision, limits=limits)
    elif mode == "z-reduced":
        scalar = z_reduced(args.q, e, rho, precision=args.precision, limits=limits)
    elif mode == "restricted":
        scalar = z_restricted(args.q, e, precision=args.precision, limits=limits)
    elif mode == "closed-n2":
        scalar = closed_form_n2(args.q, e.a, e.b, e.value(1, 2), rho,
                                precision=args.precision, limits=limits)
    else:
        scalar = closed_form_n3(args.q, e.a, e.b, e.value(1, 2), e.value(1, 3),
                                e.value(2, 3), rho,
                                precision=args.precision, limits=limits)
    return {"value": scalar.to_json()}, echo


def _cmd_domain(args, notices: list[str]) -> tuple[dict, dict]:
    limits = _limits(args)
    if args.report == "threshold":
        if not args.charges:
            raise DomainError("threshold reports need --charges")
        cv = ChargeVector.build(_parse_charges(args.charges))
        value = beta_threshold(args.n, args.q, cv, _parse_number(args.a),
                               _parse_number(args.b), args.reduced, limits)
        return {"threshold": jsonio.number_to_json(value)}, {
            "charges": [jsonio.number_to_json(c) for c in cv.charges]
        }
    if args.report == "constraints":
        forms = {form for _, _, _, form in omega_constraints(args.n, args.q, limits)}
        ordered = sorted(forms, key=lambda f: f.describe())
        return {
            "count": len(ordered),
            "forms": [f.to_json(period_log_q=False) for f in ordered],
        }, {}
    if args.report == "poles":
        rho = RhoSpec.parse(args.rho)
        spls = [spl for spl in all_filtrations(args.n, limits)
                if not args.reduced or spl.is_reduced()]
        families = []
        for spl in spls:
            for fam in pole_hyperplanes(spl, args.q, _parse_number(args.a),
                                        _parse_number(args.b), args.reduced, rho):
                families.append(fam.to_json())
        unique = {json.dumps(f, sort_keys=True): f for f in families}
        return {"count": len(unique), "families": [unique[k] for k in sorted(unique)]}, {}
    e, echo = _assignment(args, args.n, notices)
    member, witness = check_omega(args.q, e, limits)
    result = {"member": member}
    if witness is not None:
        result["witness"] = {
            "kind": witness.kind,
            "form": witness.form.to_json(period_log_q=False),
            "level": witness.level,
            "chain": None if witness.spl is None else jsonio.filtration_to_json(witness.spl),
        }
    return result, echo


def _cmd_sample(args, notices: list[str]) -> tuple[dict, dict]:
    limits = _limits(args)
    depth = args.depth
    if depth is None:
        depth = max_depth_within_budget(args.n, args.q, limits) if args.exact else 16
        notices.append(f"depth defaulted to {depth}")
    e, echo = _assignment(args, args.n, notices)
    if args.exact:
        result = exact_truncated_integral(args.n, args.q, e.a, e.b, e, depth,
                                          limits, args.precision)
        return result.to_json(), echo
    result = monte_carlo_integral(args.n, args.q, e.a, e.b, e, depth,
                                  args.samples, args.seed, limits)
    return result.to_json(), echo


def _cmd_verify(args) -> tuple[dict, bool]:
    limits = _limits(args)
    qs = [int(chunk) for chunk in str(args.q).split(",") if chunk.strip()]
    checks = run_battery(args.n_max, qs, args.seed, args.trials, limits)
    ok = all(c["pass"] for c in checks)
    for check in checks:
        status = "PASS" if check["pass"] else "FAIL"
        sys.stderr.write(f"[{status}] {check['name']}: {check['detail']}\n")
    return {"pass": ok, "checks": checks}, ok


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    notices: list[str] = []
    try:
        if args.command == "enumerate":
            params = {"n": args.n, "kind": args.kind, "reduced": args.reduced}
            result = _cmd_enumerate(args)
        elif args.command == "stats":
            params = {"n": args.n, "q": args.q, "reduced": args.reduced,
                      "weights": args.weights, "from_json": args.from_json}
            result = _cmd_stats(args)
        elif args.command == "evaluate":
            params = {"n": args.n, "q": args.q, "a": args.a, "b": args.b,
                      "rho": args.rho, "mode": args.mode,
                      "override": args.override, "precision": args.precision}
            result, echo = _cmd_evaluate(args, notices)
            params.update(echo)
        elif args.command == "domain":
            params = {"n": args.n, "q": args.q, "a": args.a, "b": args.b,
                      "report": args.report, "reduced": args.reduced}
            result, echo = _cmd_domain(args, notices)
            params.update(echo)
        elif args.command == "sample":
            params = {"n": args.n, "q": args.q, "a": args.a, "b": args.b,
                      "samples": args.samples, "seed": args.seed,
                      "exact": args.exact}
            result, echo = _cmd_sample(args, notices)
            params.update(echo)
        elif args.command == "verify":
            params = {"n_max": args.n_max, "q": args.q, "seed": args.seed,
                      "trials": args.trials}
            result, ok = _cmd_verify(args)
        else:  # pragma: no cover
            parser.error(f"unknown command {args.command}")
    except SizeLimitError as exc:
        _emit({"command": args.command, "error": str(exc)}, args.format)
        return 3
    except ConvergenceError as exc:
        payload = {"command": args.command, "error": str(exc)}
        if exc.witness is not None:
            payload["witness"] = exc.witness.describe()
        _emit(payload, args.format)
        return 2
    except (DomainError, DimensionError, PoleError, UnsupportedRhoError,
            SaturationError) as exc:
        _emit({"command": args.command, "error": str(exc)}, args.format)
        return 2
    payload = {"command": args.command, "params": params}
    if notices:
        payload["notices"] = notices
    payload["result"] = result
    _emit(payload, args.format)
    if args.command == "verify" and not result["pass"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
