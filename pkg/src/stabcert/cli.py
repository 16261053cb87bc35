"""Command-line front end: problem files in, certificate files out.

Exit codes: 0 verdict true, 3 verdict false or undecided, 1 input error,
2 internal invariant failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from .avi import AviProblem, check_generalized_critical_face
from .errors import InvariantError, StabcertError
from .geometry import Cone, PolyhedronH
from .geometry.linalg import RMatrix, RVector, fmt, fmt_mat, fmt_vec, matrix, vector
from .lcp import (
    check_lipschitz_domain,
    classify,
    domain_cone,
    is_q0,
    modulus,
    solve_lcp,
)
from .oracle import SamplingPlan, brute_solutions, lipschitz_evidence, sample_isc

EXIT_TRUE, EXIT_INPUT, EXIT_INVARIANT, EXIT_FALSE = 0, 1, 2, 3
COMMANDS = ("solve", "classify", "domain", "check-lcp", "check-avi", "modulus", "oracle", "fixtures")


class InputError(Exception):
    pass


def _schema() -> dict:
    text = resources.files("stabcert").joinpath("schema/problem.schema.json").read_text()
    return json.loads(text)


@dataclass
class ProblemFile:
    kind: str
    m: RMatrix
    c: PolyhedronH | None = None
    q_set: PolyhedronH | str | None = None
    q_bar: RVector | None = None
    x_bar: RVector | None = None
    q: RVector | None = None
    x: RVector | None = None
    options: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.m)

    @classmethod
    def parse(cls, data) -> ProblemFile:
        try:
            jsonschema.validate(data, _schema())
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise InputError(f"schema violation at {path}: {exc.message}") from None
        try:
            m = matrix(data["m"])
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad matrix: {exc}") from None
        n = len(m)
        if n == 0 or any(len(r) != n for r in m):
            raise InputError("m must be a nonempty square matrix")
        out = cls(kind=data["kind"], m=m, options=dict(data.get("options", {})))
        for name in ("q_bar", "x_bar", "q", "x"):
            if name in data:
                v = vector(data[name])
                if len(v) != n:
                    raise InputError(f"{name} has length {len(v)}, expected {n}")
                setattr(out, name, v)
        for name in ("c", "q_set"):
            if name not in data:
                continue
            if data[name] == "domain":
                out.q_set = "domain"
                continue
            try:
                setattr(out, name, PolyhedronH.from_json(data[name], n))
            except (ValueError, ZeroDivisionError) as exc:
                raise InputError(f"bad {name}: {exc}") from None
        if out.q_set == "domain" and out.c is not None:
            raise InputError("q_set 'domain' selects the LCP path; an explicit c cannot be combined with it")
        return out

    def to_json(self) -> dict:
        data = {"kind": self.kind, "m": fmt_mat(self.m)}
        if self.c is not None:
            data["c"] = self.c.to_json()
        if self.q_set is not None:
            data["q_set"] = self.q_set if isinstance(self.q_set, str) else self.q_set.to_json()
        for name in ("q_bar", "x_bar", "q", "x"):
            v = getattr(self, name)
            if v is not None:
                data[name] = fmt_vec(v)
        if self.options:
            data["options"] = self.options
        return data

    def require(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise InputError(f"missing field(s): {', '.join(missing)}")

    def plan(self) -> SamplingPlan:
        o = self.options.get("oracle", {})
        kw = {}
        for key in ("radius", "window_radius"):
            if key in o:
                kw[key] = Fraction(o[key]) if isinstance(o[key], int) else Fraction(o[key].replace(" ", ""))
        if "pair_count" in o:
            kw["pair_count"] = o["pair_count"]
        kw["seed"] = o.get("seed", self.options.get("seed", 0))
        return SamplingPlan(**kw)


def _float(x: float):
    return "inf" if math.isinf(x) else round(x, 12)


def _cone_json(c: Cone) -> dict:
    return {"rays": [fmt_vec(r) for r in c.rays], "lines": [fmt_vec(l) for l in c.lines],
            "ineqs": [fmt_vec(a) for a in c.ineqs], "eqs": [fmt_vec(a) for a in c.eqs]}


def _q0_json(r) -> dict:
    return {"status": r.status.value, "witness": None if r.witness is None else fmt_vec(r.witness)}


def _is_orthant(c: PolyhedronH | None, n: int) -> bool:
    return c is None or (c.is_homogeneous() and c.to_cone() == Cone.orthant(n))


# commands; each returns (verdict, result, summary)


def cmd_solve(p: ProblemFile, args):
    q = p.q if p.q is not None else p.q_bar
    if q is None:
        raise InputError("missing field: q")
    sols = solve_lcp(p.m, q)
    lines = [f"S({', '.join(fmt(v) for v in q)}) has {len(sols.pieces)} piece(s)"]
    for piece in sols.pieces:
        v = piece.v
        desc = "; ".join("(" + ", ".join(fmt_vec(x)) + ")" for x in v.vertices)
        if v.rays or v.lines:
            desc += f" + {len(v.rays)} ray(s), {len(v.lines)} line(s)"
        lines.append("  " + desc)
    return not sols.is_empty(), {"solutions": sols.to_json()}, lines


def cmd_classify(p: ProblemFile, args):
    q = p.q if p.q is not None else p.q_bar
    x = p.x if p.x is not None else p.x_bar
    if q is None or x is None:
        raise InputError("missing field(s): q and x")
    combo = classify(p.m, q, x)
    return True, {"combination": combo.to_json()}, [f"combination (I1, I2, I3) = {combo}"]


def cmd_domain(p: ProblemFile, args):
    cone = domain_cone(p.m)
    q0 = is_q0(p.m, p.options.get("q0_samples", 10_000), p.options.get("seed", 0))
    lines = [f"dom S generated by {len(cone.rays)} ray(s) and {len(cone.lines)} line(s)",
             f"Q0 check: {q0.status.value}"]
    return q0.accepted, {"domain": _cone_json(cone), "q0": _q0_json(q0)}, lines


def _lcp_check(p: ProblemFile, args, with_modulus: bool = True):
    p.require("q_bar", "x_bar")
    if not _is_orthant(p.c, p.n):
        raise InputError("the domain path needs C = nonnegative orthant")
    seed = p.options.get("seed", 0)
    cert = check_lipschitz_domain(p.m, p.q_bar, p.x_bar,
                                  q0_samples=p.options.get("q0_samples", 10_000), seed=seed)
    result = {
        "path": "lcp",
        "verdict": cert.verdict,
        "necessity": "sufficient_and_necessary",
        "combination": cert.combination.to_json(),
        "q0": _q0_json(cert.q0),
        "trace": [{"combination": c.to_json(), "branches": [b.to_json() for b in res]}
                  for c, res in cert.combination_trace],
        "witness": None if cert.witness is None else fmt_vec(cert.witness),
    }
    lines = [f"combination (I1, I2, I3) = {cert.combination}",
             f"Lipschitz-like relative to dom S: {str(cert.verdict).lower()}"]
    if cert.witness is not None:
        lines.append(f"witness u* = ({', '.join(fmt_vec(cert.witness))})")
    if with_modulus:
        est, sups = modulus(p.m, p.q_bar, p.x_bar, starts=p.options.get("starts", 64),
                            tol=p.options.get("tol", 1e-6), seed=seed, certificate=cert)
        result["modulus"] = {"estimate": _float(est), "per_combination": [s.to_json() for s in sups]}
        lines.append(f"modulus estimate: {_float(est)}")
    return cert.verdict, result, lines


def cmd_check_lcp(p: ProblemFile, args):
    if p.q_set not in (None, "domain"):
        raise InputError("check-lcp works relative to dom S; use check-avi for an explicit q_set")
    return _lcp_check(p, args)


def _is_domain(p: ProblemFile) -> bool:
    # an explicit q_set equal to dom S of a Q0 LCP makes the condition necessary as well
    if not _is_orthant(p.c, p.n) or not p.q_set.is_homogeneous():
        return False
    if p.q_set.to_cone() != domain_cone(p.m):
        return False
    return is_q0(p.m, p.options.get("q0_samples", 10_000), p.options.get("seed", 0)).accepted


def cmd_check_avi(p: ProblemFile, args):
    if p.q_set == "domain":
        return _lcp_check(p, args)
    p.require("q_bar", "x_bar", "q_set")
    c = p.c if p.c is not None else PolyhedronH.orthant(p.n)
    is_domain = _is_domain(p)
    v = check_generalized_critical_face(AviProblem(p.m, c, p.q_set, q_is_domain=is_domain), p.q_bar, p.x_bar)
    verdict = v.lipschitz_like
    result = {
        "path": "avi",
        "verdict": verdict,
        "cq_holds": v.cq_holds,
        "condition_holds": v.condition_holds,
        "necessity": v.necessity.value,
        "graph_regular": v.graph_regular,
        "q_set_is_domain": is_domain,
        "pairs_checked": v.pairs_checked,
        "cq_witness": None if v.cq_witness is None else fmt_vec(v.cq_witness),
        "witness": None if v.witness_ray is None else fmt_vec(v.witness_ray),
        "failing_pair": None if v.failing_pair is None else {
            "f1": _cone_json(v.failing_pair.f1), "f2": _cone_json(v.failing_pair.f2)},
    }
    word = {True: "true", False: "false", None: "undecided"}[verdict]
    lines = [f"face pairs checked: {v.pairs_checked}",
             f"constraint qualification: {str(v.cq_holds).lower()}",
             f"critical face condition: {str(v.condition_holds).lower()} ({v.necessity.value})",
             f"Lipschitz-like relative to q_set: {word}"]
    return verdict is True, result, lines


def cmd_modulus(p: ProblemFile, args):
    p.require("q_bar", "x_bar")
    seed = p.options.get("seed", 0)
    est, sups = modulus(p.m, p.q_bar, p.x_bar, starts=p.options.get("starts", 64),
                        tol=p.options.get("tol", 1e-6), seed=seed,
                        q0_samples=p.options.get("q0_samples", 10_000))
    result = {"estimate": _float(est), "per_combination": [s.to_json() for s in sups]}
    return not math.isinf(est), result, [f"modulus estimate: {_float(est)}"]


def _region(p: ProblemFile):
    if not _is_orthant(p.c, p.n):
        raise InputError("the oracle handles LCPs only (C = nonnegative orthant)")
    if p.q_set in (None, "domain"):
        return domain_cone(p.m)
    return p.q_set


def _oracle_block(p: ProblemFile) -> dict:
    plan = p.plan()
    region = _region(p)
    ev = lipschitz_evidence(p.m, region, p.q_bar, p.x_bar, plan)
    return {
        "plan": {"radius": fmt(plan.radius), "window_radius": fmt(plan.window_radius),
                 "pair_count": plan.pair_count, "seed": plan.seed, "levels": plan.levels},
        "profile": [_float(k) for k in ev.profile],
        "kappa_hat": _float(ev.kappa_hat),
        "classification": "divergent" if ev.divergent else "stable",
        "violation": None if ev.violation is None else [None if v is None else fmt_vec(v) for v in ev.violation],
        "isc": sample_isc(p.m, region, p.q_bar, p.x_bar, plan),
        "brute_matches_solver": brute_solutions(p.m, p.q_bar) == solve_lcp(p.m, p.q_bar),
    }


def cmd_oracle(p: ProblemFile, args):
    p.require("q_bar", "x_bar")
    block = _oracle_block(p)
    lines = [f"kappa profile: {block['profile']}", f"classification: {block['classification']}",
             f"isc: {str(block['isc']).lower()}"]
    return block["classification"] == "stable", {"oracle": block}, lines


HANDLERS = {
    "solve": cmd_solve,
    "classify": cmd_classify,
    "domain": cmd_domain,
    "check-lcp": cmd_check_lcp,
    "check-avi": cmd_check_avi,
    "modulus": cmd_modulus,
    "oracle": cmd_oracle,
}


def fixture_names() -> list[str]:
    root = resources.files("stabcert").joinpath("fixtures")
    return sorted(f.name for f in root.iterdir() if f.name.endswith(".json"))


def read_fixture(name: str) -> dict:
    return json.loads(resources.files("stabcert").joinpath("fixtures", name).read_text())


def cmd_fixtures(args) -> int:
    names = fixture_names()
    if args.list:
        print("\n".join(names))
        return EXIT_TRUE
    out = Path(args.dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in names:
        (out / name).write_text(json.dumps(read_fixture(name), indent=2) + "\n")
    if not args.quiet:
        print(f"wrote {len(names)} fixture(s) to {out}")
    return EXIT_TRUE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stabcert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"stabcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS[:-1]:
        sp = sub.add_parser(name)
        sp.add_argument("problem", help="problem file (JSON), or - for standard input")
        sp.add_argument("--out", default="-", help="certificate file; - writes it to standard output")
        sp.add_argument("--starts", type=int, help="modulus multi-start count")
        sp.add_argument("--tol", type=float, help="modulus tolerance")
        sp.add_argument("--seed", type=int, help="seed for sampling and starts")
        sp.add_argument("--q0-samples", type=int, dest="q0_samples", help="samples for the Q0 check")
        sp.add_argument("--oracle", action="store_true", help="add the sampling cross-check block")
        sp.add_argument("--no-timing", action="store_true", help="omit the timing field")
        sp.add_argument("--quiet", action="store_true", help="suppress the human-readable summary")
    sp = sub.add_parser("fixtures", help="write the shipped fixtures to a directory")
    sp.add_argument("--dir", default="fixtures")
    sp.add_argument("--list", action="store_true")
    sp.add_argument("--quiet", action="store_true")
    return parser


def _load(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from None


def certificate(command: str, p: ProblemFile, verdict, result: dict, seconds: float | None) -> dict:
    cert = {"tool": {"name": "stabcert", "version": __version__}, "command": command,
            "input": p.to_json(), "verdict": verdict, "result": result}
    if seconds is not None:
        cert["timing"] = {"seconds": round(seconds, 3)}
    return cert


def _emit(cert: dict, lines: list[str], args):
    text = json.dumps(cert, sort_keys=True, indent=2) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
        summary = sys.stderr
    else:
        Path(args.out).write_text(text)
        summary = sys.stdout
    if not args.quiet:
        for line in lines:
            print(line, file=summary)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "fixtures":
        return cmd_fixtures(args)
    try:
        p = ProblemFile.parse(_load(args.problem))
        for key in ("starts", "tol", "seed", "q0_samples"):
            if getattr(args, key) is not None:
                p.options[key] = getattr(args, key)
        t0 = time.perf_counter()
        verdict, result, lines = HANDLERS[args.command](p, args)
        if args.oracle and args.command in ("check-lcp", "check-avi", "modulus"):
            result["oracle"] = _oracle_block(p)
            lines.append(f"oracle: {result['oracle']['classification']}, isc {str(result['oracle']['isc']).lower()}")
        seconds = None if args.no_timing else time.perf_counter() - t0
    except InvariantError as exc:
        print(f"error: InvariantError: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (InputError, StabcertError, ValueError) as exc:
        name = type(exc).__name__
        print(f"error: {name}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(certificate(args.command, p, verdict, result, seconds), lines, args)
    return EXIT_TRUE if verdict is True else EXIT_FALSE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
