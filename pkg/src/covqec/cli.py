"""Command-line front end: compute QFI values and bounds, measure codes,
sweep parameter grids to CSV, and run the verification suite.

Channel shorthand grammar: ``name:dim:p`` (erasure, depolarizing, dephasing)
or ``rotated-dephasing:2:p:phi``; anything else is read as a JSON file.
Hamiltonian shorthand: ``sz`` (dimension inferred from the channel) or
``sz:d``; anything else is read as a JSON file.

Exit codes: 0 success / finite value, 3 infinite QFI, 1 input error,
2 sweep invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import metadata

import numpy as np

from . import acceptance, bounds, codes, recovery
from .channels import (Channel, Hamiltonian, channel_from_file, compose,
                       depolarizing, erasure, hamiltonian_from_file,
                       rotated_dephasing)

DEFAULT_SEED = 0xC0DEC0DE

CSV_COLUMNS = ("n", "m", "p", "bound_l1", "eps_choi", "eps_upper", "ratio")


def _version() -> str:
    try:
        return metadata.version("covqec")
    except metadata.PackageNotFoundError:
        return "0.0.0"


def parse_channel(spec: str) -> Channel:
    parts = spec.split(":")
    if parts[0] == "erasure" and len(parts) == 3:
        return erasure(int(parts[1]), float(parts[2]))
    if parts[0] == "depolarizing" and len(parts) == 3:
        return depolarizing(int(parts[1]), float(parts[2]))
    if parts[0] == "dephasing" and len(parts) == 3:
        if int(parts[1]) != 2:
            raise ValueError("dephasing shorthand is qubit-only")
        return rotated_dephasing(float(parts[2]), 0.0)
    if parts[0] == "rotated-dephasing" and len(parts) == 4:
        if int(parts[1]) != 2:
            raise ValueError("rotated-dephasing shorthand is qubit-only")
        return rotated_dephasing(float(parts[2]), float(parts[3]))
    if len(parts) > 1 and parts[0] in ("erasure", "depolarizing", "dephasing",
                                       "rotated-dephasing"):
        raise ValueError(f"malformed channel shorthand {spec!r}")
    return channel_from_file(spec)


def _sz_like(d: int) -> Hamiltonian:
    m = np.zeros((d, d), dtype=complex)
    m[0, 0], m[1, 1] = 1.0, -1.0
    return Hamiltonian(m)


def parse_hamiltonian(spec: str, default_dim: int | None = None) -> Hamiltonian:
    if spec == "sz":
        if default_dim is None:
            raise ValueError("ham 'sz' needs a dimension: use sz:d")
        return _sz_like(default_dim)
    if spec.startswith("sz:"):
        return _sz_like(int(spec.split(":")[1]))
    return hamiltonian_from_file(spec)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


# ---------------------------------------------------------------- subcommands

def cmd_qfi(args) -> int:
    from . import qfi
    ch = parse_channel(args.channel)
    h = parse_hamiltonian(args.ham, ch.d_in)
    if args.kind == "sld-reg":
        value = qfi.sld_qfi_channel_regularized(ch, h)
    else:
        value = qfi.rld_qfi_channel(ch, h)
    _emit(value.to_json())
    return 0 if value.is_finite else 3


def cmd_bound(args) -> int:
    if args.theorem is not None:
        ch = parse_channel(args.channel)
        h = parse_hamiltonian(args.ham, ch.d_in)
        if args.theorem == 1:
            if args.dhl is None:
                raise ValueError("--theorem 1 needs --dhl")
            _emit(bounds.theorem1_bound(ch, h, args.dhl).to_json())
        else:
            if args.hl is None:
                raise ValueError("--theorem 2 needs --hl (logical Hamiltonian)")
            h_l = parse_hamiltonian(args.hl)
            worst, choi = bounds.theorem2_bounds(ch, h, h_l)
            _emit({"worst": worst.to_json(), "choi": choi.to_json()})
        return 0
    if args.single_error is not None:
        if args.q != "uniform":
            raise ValueError("only --q uniform is supported")
        if args.n is None or args.dhl is None or args.dh is None:
            raise ValueError("--single-error needs --n, --dhl and --dh")
        flavor = {"erasure": "erasure",
                  "depolarizing": "depolarizing-qubit"}[args.single_error]
        site = Hamiltonian(np.diag([args.dh / 2, -args.dh / 2]))
        dummy = erasure(2, 1.0) if flavor == "erasure" else depolarizing(2, 1.0)
        errors = [(1.0 / args.n, dummy)] * args.n
        _emit(bounds.single_error_bound(errors, [site] * args.n, args.dhl,
                                        flavor=flavor).to_json())
        return 0
    if args.eastin_knill:
        if args.n is None or args.dims is None or args.dl is None:
            raise ValueError("--eastin-knill needs --n, --dims and --dl")
        dims = [int(x) for x in args.dims.split(",")]
        if len(dims) != args.n:
            raise ValueError("--dims length must equal --n")
        _emit(bounds.eastin_knill_bound(args.n, dims, args.dl).to_json())
        return 0
    raise ValueError("choose one of --theorem, --single-error, --eastin-knill")


def _thermo_lower_bound(n: int, m: int, noise: str) -> bounds.BoundReport:
    """Single-error lower bound matching the one-site-lost noise model."""
    flavor = "erasure" if noise == "erasure" else "depolarizing-qubit"
    site = Hamiltonian(np.diag([1.0, -1.0]))
    dummy = erasure(2, 1.0) if flavor == "erasure" else depolarizing(2, 1.0)
    errors = [(1.0 / n, dummy)] * n
    return bounds.single_error_bound(errors, [site] * n, 2.0 * m, flavor=flavor)


def cmd_code(args) -> int:
    tc = codes.thermo_code(args.n, args.m)
    estimate = recovery.measure_code(tc, args.noise, seed=args.seed)
    report = _thermo_lower_bound(args.n, args.m, args.noise)
    _emit({
        "code": tc.to_json(),
        "noise": args.noise,
        "estimate": estimate.to_json(),
        "bounds": {"single-error": report.to_json()},
    })
    return 0


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _sweep_point(family: str, n: int, m: int, p: float, seed: int):
    """One grid point -> (row dict or None, skip reason or None)."""
    if family in ("thermo-erasure", "thermo-depolarizing"):
        try:
            tc = codes.thermo_code(n, m)
        except ValueError as exc:
            return None, f"skip n={n} m={m}: {exc}"
        if family == "thermo-erasure":
            lower = bounds.ell1(m ** 2 / (4.0 * n ** 2))
            eps = tc.effective_erasure_rate()
        else:
            lower = bounds.ell1(3.0 * m ** 2 / (8.0 * n ** 2))
            eps = recovery.thermo_depolarizing_infidelity(n, m)
        return {"n": n, "m": m, "p": 1.0 / n, "bound_l1": lower,
                "eps_choi": eps, "eps_upper": eps,
                "ratio": eps / lower}, None
    # bound-grid: trivial qubit code under erasure:2:p
    ch = erasure(2, p)
    report = bounds.theorem1_bound(ch, _sz_like(2), 2.0)
    rec, eps_choi = recovery.optimal_choi_recovery(ch)
    worst = recovery.worst_case_infidelity(compose(rec, ch), seed=seed)
    return {"n": 1, "m": 0, "p": p, "bound_l1": report.epsilon_lower,
            "eps_choi": eps_choi, "eps_upper": max(worst, eps_choi),
            "ratio": eps_choi / report.epsilon_lower
            if report.epsilon_lower > 0 else math.inf}, None


def _parse_range(text: str | None, cast) -> list:
    if not text:
        return []
    return [cast(x) for x in text.split(",")]


def cmd_sweep(args) -> int:
    ns = _parse_range(args.n, int)
    ms = _parse_range(args.m, int)
    ps = _parse_range(args.p, float)
    if args.family == "bound-grid":
        grid = [(1, 0, p) for p in sorted(ps)]
    else:
        grid = [(n, m, 0.0) for n in sorted(ns) for m in sorted(ms)]
    if not grid:
        raise ValueError("empty sweep grid: provide --p (bound-grid) or --n/--m")

    def work(point):
        n, m, p = point
        return _sweep_point(args.family, n, m, p, args.seed)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(work, grid))

    lines = [f"# seed={args.seed}, version={_version()}", ",".join(CSV_COLUMNS)]
    for point, (row, reason) in zip(grid, results):
        if row is None:
            print(reason, file=sys.stderr)
            continue
        if not (row["bound_l1"] <= row["eps_choi"] + 1e-9
                and row["eps_choi"] <= row["eps_upper"] + 1e-9):
            print(f"sweep aborted: bound ordering violated at {point}: {row}",
                  file=sys.stderr)
            return 2
        lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    results = acceptance.run_criteria(args.filter)
    if not results:
        print(f"no criteria match filter {args.filter!r}", file=sys.stderr)
        return 1
    failed = 0
    for res in results:
        if args.perturb:
            res = acceptance.CriterionResult(
                res.number, res.name, res.tags, False, res.measured,
                res.expected + " [perturbed]", res.tolerance)
        print(res.line())
        if not res.passed:
            failed += 1
    print(f"{len(results) - failed}/{len(results)} criteria passed")
    return 0 if failed == 0 else 1


# ---------------------------------------------------------------- entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # input errors exit with status 1
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="covqec",
                     description="Channel QFI and covariant-code infidelity bounds")
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("qfi", help="channel QFI of a Hamiltonian family")
    q.add_argument("--channel", required=True)
    q.add_argument("--ham", required=True)
    q.add_argument("--kind", choices=("sld-reg", "rld"), default="sld-reg")
    q.set_defaults(func=cmd_qfi)

    b = sub.add_parser("bound", help="infidelity lower bounds")
    b.add_argument("--theorem", type=int, choices=(1, 2))
    b.add_argument("--channel")
    b.add_argument("--ham", default="sz")
    b.add_argument("--hl", help="logical Hamiltonian (sz:d or JSON file)")
    b.add_argument("--dhl", type=float, help="logical Hamiltonian spread")
    b.add_argument("--single-error", choices=("erasure", "depolarizing"))
    b.add_argument("--n", type=int)
    b.add_argument("--q", default="uniform")
    b.add_argument("--dh", type=float, help="per-site Hamiltonian spread")
    b.add_argument("--eastin-knill", action="store_true")
    b.add_argument("--dims", help="comma-separated site dimensions")
    b.add_argument("--dl", type=int, help="logical dimension")
    b.set_defaults(func=cmd_bound)

    c = sub.add_parser("code", help="measure a thermodynamic code against bounds")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--noise", choices=("erasure", "depolarizing"), required=True)
    c.add_argument("--seed", type=int, default=DEFAULT_SEED)
    c.set_defaults(func=cmd_code)

    s = sub.add_parser("sweep", help="parameter sweep to CSV")
    s.add_argument("--family", required=True,
                   choices=("thermo-erasure", "thermo-depolarizing", "bound-grid"))
    s.add_argument("--n", help="comma-separated n values")
    s.add_argument("--m", help="comma-separated m values")
    s.add_argument("--p", help="comma-separated p values (bound-grid)")
    s.add_argument("--out", help="output CSV path (default stdout)")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the verification suite")
    v.add_argument("--filter", help="run only criteria whose name or tags match")
    v.add_argument("--perturb", action="store_true",
                   help="force-fail every criterion (exit-path testing)")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0  # downstream consumer (e.g. head) closed the pipe
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"covqec: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
