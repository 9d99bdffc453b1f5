"""Command-line front end.

Subcommands
    knapsack   count nonnegative solutions of w . x = a0
    count      count solutions of a system file (JSON matrix/rhs)
    ehrhart    dilation series of {x >= 0 : A x = b} as a rational function
    magic      dilation series for the n x n magic-square conditions
    ct         raw constant-term extraction from a term description file
    resume     continue a checkpointed run

Every run writes a deterministic plain-text result file (header with tool
version, config hash and variable table, then value and diagnostics) and
mirrors it to stdout.  Wall-clock times are printed to stdout only, so that
result files from a fresh run and an interrupted+resumed run are
byte-identical.

Exit codes: 0 ok, 1 oracle mismatch or unexpected failure, 2 bad input,
3 unresolved collision, 4 direction search exhausted, 5 prime clash,
6 oracle refusal (instance too large to verify), 7 checkpoint/resume
mismatch.
"""

import argparse
import json
import os
import sys
import time

from . import __version__
from .algebra import (
    CT,
    FREE,
    SLACK,
    ExactRing,
    InputError,
    PrimeField,
    VariableTable,
    exps_from_dict,
    poly_str,
)
from .bruteforce import OracleRefusal, brute_count, dp_knapsack
from .checkpoint import (
    TOOL_NAME,
    CheckpointError,
    CheckpointPause,
    config_hash,
    config_payload,
    run_checkpointed,
    system_from_payload,
)
from .elimination import DEFAULT_PRIMES, LambdaExhaustion, PrimeClash
from .engine import CollisionError, Stats, TermSum, add_slack, ct_all, make_term
from .problems import (
    DiophantineSystem,
    format_series,
    knapsack_system,
    magic_square_system,
    run_pipeline,
    series_coeffs,
    system_from_json,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_COLLISION = 3
EXIT_LAMBDA = 4
EXIT_PRIME = 5
EXIT_ORACLE = 6
EXIT_RESUME = 7

ROLES = {"free": FREE, "slack": SLACK, "ct": CT}
ROLE_NAMES = {FREE: "free", SLACK: "slack", CT: "ct"}


def _weights(text):
    try:
        ws = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("weights must be comma-separated integers")
    if not ws:
        raise argparse.ArgumentTypeError("at least one weight is required")
    return ws


def _add_common(sp, checkpointable=True):
    sp.add_argument("--mod", action="append", type=int, default=[], metavar="P",
                    help="work modulo the odd prime P (repeatable)")
    sp.add_argument("--crt", action="store_true",
                    help="reconstruct the integer from the moduli (default primes if no --mod)")
    sp.add_argument("--seed", type=int, default=0, help="seed for direction search")
    sp.add_argument("--order", choices=["given", "sparse-first"], default="given",
                    help="elimination order for the extraction variables")
    sp.add_argument("--slack", choices=["eager", "delayed"], default="eager",
                    help="add slack variables up front, or only after a collision")
    sp.add_argument("--oracle-check", action="store_true",
                    help="verify the result against brute-force enumeration")
    sp.add_argument("--assume-bounded", action="store_true",
                    help="skip the solution-set boundedness certificate")
    sp.add_argument("--output", metavar="PATH", help="result file path")
    if checkpointable:
        sp.add_argument("--checkpoint-dir", metavar="DIR",
                        help="directory for resumable on-disk state")
        sp.add_argument("--chunk-size", type=int, default=1000, metavar="K",
                        help="terms per checkpoint chunk (default 1000)")
        sp.add_argument("--max-units", type=int, default=None, metavar="N",
                        help="pause after N completed work units (testing)")


def build_parser():
    p = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="exact lattice-point counting via constant-term extraction",
    )
    p.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("knapsack", help="count solutions of w . x = a0 over x >= 0")
    sp.add_argument("--a0", type=int, required=True, help="right-hand side")
    sp.add_argument("--weights", type=_weights, required=True,
                    help="comma-separated positive weights, e.g. 1,5,14")
    _add_common(sp)

    sp = sub.add_parser("count", help="count solutions of a system file")
    sp.add_argument("--input", required=True, help="JSON file with matrix and rhs")
    _add_common(sp)

    sp = sub.add_parser("ehrhart", help="dilation series of a system file")
    sp.add_argument("--input", required=True, help="JSON file with matrix and rhs")
    sp.add_argument("--coeffs", type=int, default=None, metavar="K",
                    help="also print series coefficients up to degree K")
    _add_common(sp)

    sp = sub.add_parser("magic", help="dilation series for n x n magic squares")
    sp.add_argument("--n", type=int, required=True, help="grid size")
    sp.add_argument("--coeffs", type=int, default=None, metavar="K",
                    help="also print series coefficients up to degree K")
    _add_common(sp)

    sp = sub.add_parser("ct", help="raw constant-term extraction from a term file")
    sp.add_argument("--input", required=True, help="JSON term description")
    sp.add_argument("--mod", action="append", type=int, default=[], metavar="P",
                    help="work modulo the odd prime P (at most one for raw runs)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--order", choices=["given", "sparse-first"], default="given")
    sp.add_argument("--slack", choices=["eager", "delayed"], default="eager")
    sp.add_argument("--output", metavar="PATH", help="result file path")

    sp = sub.add_parser("resume", help="continue a checkpointed run")
    sp.add_argument("--checkpoint-dir", required=True, metavar="DIR")
    sp.add_argument("--input", default=None,
                    help="original problem file; refused if it no longer matches")
    sp.add_argument("--mod", action="append", type=int, default=[], metavar="P")
    sp.add_argument("--crt", action="store_true")
    sp.add_argument("--coeffs", type=int, default=None, metavar="K")
    sp.add_argument("--oracle-check", action="store_true")
    sp.add_argument("--assume-bounded", action="store_true")
    sp.add_argument("--output", metavar="PATH")
    sp.add_argument("--max-units", type=int, default=None, metavar="N")

    return p


# ---------------------------------------------------------------------------
# result rendering


def _variables_line(table):
    groups = {FREE: [], SLACK: [], CT: []}
    for vid, name in table.ordered():
        groups[vid[0]].append(name)
    parts = []
    for rank in (FREE, SLACK, CT):
        names = ",".join(groups[rank]) if groups[rank] else "-"
        parts.append(f"{ROLE_NAMES[rank]}={names}")
    return "variables: " + "; ".join(parts)


def _lambda_line(lam):
    items = sorted(lam.items(), key=lambda kv: (len(kv[0]), kv[0]))
    return "lambda: " + ",".join(f"{k}={v}" for k, v in items)


def render_result(out, chash, cfg, coeff_list=None):
    """Deterministic plain-text result block (no wall times)."""
    lines = [
        f"tool: {TOOL_NAME} {__version__}",
        f"config: {chash}",
        f"task: {out.task}",
    ]
    if out.table is not None:
        lines.append(_variables_line(out.table))
    lines.append(f"order: {cfg['order']}")
    lines.append(f"slack-mode: {cfg['slack']}")
    lines.append(f"seed: {cfg['seed']}")
    moduli = cfg.get("moduli") or ()
    lines.append("moduli: " + (",".join(str(p) for p in moduli) if moduli else "none"))
    lines.append("crt: " + ("yes" if cfg.get("crt") else "no"))
    if out.lam:
        lines.append(_lambda_line(out.lam))
    lines.append("exact: " + ("yes" if out.exact else "no"))

    if out.task == "count":
        if out.residues:
            for p in sorted(out.residues):
                lines.append(f"residue[{p}]: {out.residues[p]}")
        if out.value is not None:
            lines.append(f"value: {out.value}")
    else:
        if out.num is not None:
            lines.append("numerator: " + ",".join(str(c) for c in out.num))
            lines.append("denominator: " + ",".join(str(c) for c in out.den))
            if out.den_factors:
                lines.append(
                    "denominator-factors: "
                    + " * ".join(
                        f"(1-q^{k})^{e}" if e > 1 else f"(1-q^{k})"
                        for k, e in sorted(out.den_factors.items())
                    )
                )
            lines.append("series: " + format_series(out.num, out.den, out.den_factors))
        if out.series_residues:
            den_counts = None
            for p in sorted(out.series_residues):
                body = out.series_residues[p]
                den_counts = body["den_counts"]
                num = ",".join(f"{d}:{c}" for d, c in sorted(body["num"].items()))
                lines.append(f"residue-numerator[{p}]: {num}")
            if den_counts:
                lines.append(
                    "residue-denominator: "
                    + " * ".join(
                        f"(1-q^{k})^{e}" if e > 1 else f"(1-q^{k})"
                        for k, e in sorted(den_counts.items())
                    )
                )
    if out.confidence is not None:
        lines.append("crt-confidence: %.6e" % float(out.confidence))
    if coeff_list is not None:
        lines.append("coefficients: " + ",".join(str(c) for c in coeff_list))

    st = out.stats
    if st is not None:
        lines.append(f"raw-terms: {st.raw_terms}")
        lines.append(f"collected-terms: {st.collected_terms}")
        lines.append(f"euclid-nodes: {st.euclid_nodes}")
        lines.append(f"collisions: {st.collisions}")
        lines.append(f"restarts: {st.restarts}")
        lines.append(f"ct-s-calls: {st.ct_s_calls}")
        lines.append(f"summand-max: {st.summand_max}")
        lines.append("summand-bound-ok: " + ("yes" if st.summand_bound_ok else "NO"))
    return "\n".join(lines) + "\n"


def _write_result(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _result_path(args):
    if getattr(args, "output", None):
        return args.output
    ckdir = getattr(args, "checkpoint_dir", None)
    if ckdir:
        return os.path.join(ckdir, "result.txt")
    return "ct-result.txt"


# ---------------------------------------------------------------------------
# oracle checks


def _oracle_check_count(system, out):
    if len(system.matrix) == 1:
        want = dp_knapsack(system.rhs[0], system.matrix[0])
    else:
        want = brute_count(system.matrix, system.rhs)
    if out.value is not None:
        ok = out.value == want
        got = out.value
    else:
        ok = all(want % p == r for p, r in out.residues.items())
        got = out.residues
    return ok, want, got


def _oracle_check_series(system, out, kcheck):
    if out.num is None:
        raise OracleRefusal(
            "series oracle check needs an exact or CRT-reconstructed series"
        )
    got = series_coeffs(out.num, out.den, kcheck + 1)
    want = [brute_count(system.matrix, [k * b for b in system.rhs]) for k in range(kcheck + 1)]
    return got == want, want, got


def _run_oracle(system, task, out, kcheck):
    if task == "count":
        ok, want, got = _oracle_check_count(system, out)
    else:
        ok, want, got = _oracle_check_series(system, out, kcheck)
    if ok:
        print(f"# oracle-check: ok ({want})")
        return EXIT_OK
    print(f"# oracle-check: MISMATCH (brute force {want}, pipeline {got})", file=sys.stderr)
    return EXIT_FAIL


# ---------------------------------------------------------------------------
# pipeline commands


def _moduli_of(args):
    moduli = tuple(args.mod)
    if args.crt and not moduli:
        moduli = DEFAULT_PRIMES
    if len(set(moduli)) != len(moduli):
        raise InputError("moduli must be pairwise distinct")
    return moduli


def run_task(system, task, args, coeffs=None):
    moduli = _moduli_of(args)
    ckdir = getattr(args, "checkpoint_dir", None)
    t0 = time.time()
    if ckdir:
        out, chash = run_checkpointed(
            system,
            task,
            ckdir,
            moduli=moduli,
            crt=args.crt,
            order=args.order,
            slack_mode=args.slack,
            seed=args.seed,
            chunk_size=args.chunk_size,
            assume_bounded=args.assume_bounded,
            max_units=args.max_units,
            log=lambda msg: print(f"# {msg}", file=sys.stderr),
        )
    else:
        payload = config_payload(task, system, args.seed, args.order, args.slack, 1000)
        chash = config_hash(payload)
        out = run_pipeline(
            system,
            task,
            moduli=moduli,
            crt=args.crt,
            order=args.order,
            slack_mode=args.slack,
            seed=args.seed,
            assume_bounded=args.assume_bounded,
        )
    wall = time.time() - t0

    coeff_list = None
    if task == "series" and coeffs is not None and out.num is not None:
        coeff_list = series_coeffs(out.num, out.den, coeffs + 1)

    cfg = {
        "order": args.order,
        "slack": args.slack,
        "seed": args.seed,
        "moduli": moduli,
        "crt": args.crt,
    }
    text = render_result(out, chash, cfg, coeff_list)
    path = _result_path(args)
    _write_result(path, text)
    print(out.value_str())
    sys.stdout.write(text)
    print(f"# wall-time: {wall:.3f} s")
    print(f"# result-file: {path}")

    if args.oracle_check:
        kcheck = coeffs if coeffs is not None else 4
        return _run_oracle(system, task, out, kcheck)
    return EXIT_OK


def cmd_knapsack(args):
    return run_task(knapsack_system(args.a0, args.weights), "count", args)


def cmd_count(args):
    with open(args.input) as fh:
        system = system_from_json(fh.read())
    return run_task(system, "count", args)


def cmd_ehrhart(args):
    with open(args.input) as fh:
        system = system_from_json(fh.read())
    return run_task(system, "series", args, coeffs=args.coeffs)


def cmd_magic(args):
    return run_task(magic_square_system(args.n), "series", args, coeffs=args.coeffs)


def cmd_resume(args):
    meta_path = os.path.join(args.checkpoint_dir, "meta.json")
    if not os.path.exists(meta_path):
        raise CheckpointError(f"no checkpoint at {args.checkpoint_dir}")
    with open(meta_path) as fh:
        meta = json.load(fh)
    cfg = meta["config"]
    system = system_from_payload(cfg)
    if args.input is not None:
        with open(args.input) as fh:
            other = system_from_json(fh.read())
        payload = config_payload(
            cfg["task"], other, cfg["seed"], cfg["order"], cfg["slack"], cfg["chunk_size"]
        )
        if config_hash(payload) != meta["config_hash"]:
            raise CheckpointError("input file does not match the checkpoint")

    ns = argparse.Namespace(
        mod=args.mod,
        crt=args.crt,
        seed=cfg["seed"],
        order=cfg["order"],
        slack=cfg["slack"],
        checkpoint_dir=args.checkpoint_dir,
        chunk_size=cfg["chunk_size"],
        max_units=args.max_units,
        assume_bounded=args.assume_bounded,
        oracle_check=args.oracle_check,
        output=args.output,
    )
    return run_task(system, cfg["task"], ns, coeffs=args.coeffs)


# ---------------------------------------------------------------------------
# raw constant-term command


def load_raw_term(text):
    """Parse the raw term format.

    {"variables": [["y", "free"], ["x", "ct"]],
     "numerator": [[1, {"x": 2}], [-1, {}]],      # optional, default 1
     "denominator": [{"x": 1, "y": 1}, {"x": -1, "y": 3}]}
    """
    try:
        obj = json.loads(text)
        table = VariableTable()
        for name, role in obj["variables"]:
            if role not in ROLES:
                raise InputError(f"unknown variable role {role!r}")
            table.add(name, ROLES[role])
        num = {}
        for coeff, mono in obj.get("numerator", [[1, {}]]):
            e = exps_from_dict({table.vid_of(nm): int(k) for nm, k in mono.items()})
            num[e] = num.get(e, 0) + int(coeff)
        den = []
        for mono in obj["denominator"]:
            den.append(exps_from_dict({table.vid_of(nm): int(k) for nm, k in mono.items()}))
    except InputError:
        raise
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"bad term file: {exc}") from None
    return table, num, den


def _term_str(table, t, ring):
    num = poly_str(table, t.num, ring)
    if not t.den:
        return num
    den = " ".join(
        "(1 - " + "*".join(
            f"{table.name_of(v)}^{k}" if k != 1 else table.name_of(v) for v, k in f
        ) + ")"
        for f in t.den
    )
    return f"({num}) / {den}"


def cmd_ct(args):
    if len(args.mod) > 1:
        raise InputError("raw constant-term runs take at most one modulus")
    with open(args.input) as fh:
        table, num, den = load_raw_term(fh.read())
    ring = PrimeField(args.mod[0]) if args.mod else ExactRing()
    num_r = {e: ring.from_int(c) for e, c in num.items() if c}
    t = make_term(ring, num_r, den)
    ts = TermSum(table, ring, [t] if t is not None else [])
    if args.slack == "eager":
        ts = add_slack(ts)
    stats = Stats()
    t0 = time.time()
    done = ct_all(ts, order=args.order, delayed=(args.slack == "delayed"), stats=stats)
    wall = time.time() - t0

    lines = [
        f"tool: {TOOL_NAME} {__version__}",
        "task: ct",
        _variables_line(table),
        f"order: {args.order}",
        f"slack-mode: {args.slack}",
        f"seed: {args.seed}",
        "moduli: " + (str(args.mod[0]) if args.mod else "none"),
        f"terms: {len(done.terms)}",
    ]
    for i, term in enumerate(done.terms):
        lines.append(f"term[{i}]: {_term_str(table, term, ring)}")
    lines.append(f"raw-terms: {stats.raw_terms}")
    lines.append(f"collected-terms: {stats.collected_terms}")
    lines.append(f"euclid-nodes: {stats.euclid_nodes}")
    lines.append(f"collisions: {stats.collisions}")
    lines.append(f"restarts: {stats.restarts}")
    text = "\n".join(lines) + "\n"

    path = args.output or "ct-result.txt"
    _write_result(path, text)
    sys.stdout.write(text)
    print(f"# wall-time: {wall:.3f} s")
    print(f"# result-file: {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------


COMMANDS = {
    "knapsack": cmd_knapsack,
    "count": cmd_count,
    "ehrhart": cmd_ehrhart,
    "magic": cmd_magic,
    "ct": cmd_ct,
    "resume": cmd_resume,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CheckpointPause as exc:
        print(f"# paused: {exc}", file=sys.stderr)
        return EXIT_OK
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CollisionError as exc:
        print(f"error: unresolved collision: {exc}", file=sys.stderr)
        return EXIT_COLLISION
    except LambdaExhaustion as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LAMBDA
    except PrimeClash as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRIME
    except OracleRefusal as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESUME
    except ArithmeticError as exc:
        print(
            f"error: {exc} (a non-integer total usually means the solution "
            "set is unbounded)",
            file=sys.stderr,
        )
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
