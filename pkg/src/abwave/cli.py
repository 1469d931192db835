"""Command-line entry point: ``abwave {kernel,modesum,propagate,verify,specfun-table}``.

Exit codes: 0 success, 2 verification failure, 1 usage or runtime error.
Options can also come from ``--config FILE`` (flat ``key=value`` lines,
keys spelled like the long options); explicit flags take precedence.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = ["main", "run", "build_parser", "read_config"]


class UsageError(Exception):
    """Bad command line or configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def read_config(path: str) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


def _num(x) -> str:
    """Shortest round-trip representation of a float (integers stay integers)."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _range(spec: str) -> np.ndarray:
    a, b, n = spec.split(":")
    return np.linspace(float(a), float(b), int(n))


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, int(args.threads))
    env = os.environ.get("ABWAVE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _flux(args):
    from .spectrum import FluxField

    if getattr(args, "flux_file", None):
        vals = np.loadtxt(args.flux_file, ndmin=1)
        return FluxField.tabulated(vals)
    return FluxField.constant(args.alpha)


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_report(path, report):
    if path:
        with open(path, "w") as fh:
            json.dump(report, fh, indent=1, sort_keys=True, default=str)
            fh.write("\n")


def _w(args) -> complex:
    return complex(args.w_re, args.w_im)


# --------------------------------------------------------------------------
# subcommands

def _points(args):
    if args.grid:
        parts = args.grid.split(",")
        if len(parts) != 4:
            raise UsageError("--grid needs four ranges r1,theta1,r2,theta2 (a:b:n each)")
        axes = [_range(p) for p in parts]
        mesh = np.meshgrid(*axes, indexing="ij")
        return [tuple(float(m.flat[i]) for m in mesh) for i in range(mesh[0].size)]
    for name in ("r1", "theta1", "r2", "theta2"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required without --grid")
    return [(args.r1, args.theta1, args.r2, args.theta2)]


def cmd_kernel(args) -> int:
    from .kernel import BoundaryError, KernelPoint, kernel_fwt, kernel_sine

    A = _flux(args)
    pts = _points(args)

    def one(pt):
        r1, th1, r2, th2 = pt
        p = KernelPoint(args.t, r1, th1, r2, th2)
        try:
            if args.mode == "sine":
                dec = kernel_sine(args.t, p, A, args.quad_tol)
            else:
                dec = kernel_fwt(_w(args), p, A, args.quad_tol)
        except BoundaryError:
            return (args.t, r1, th1, r2, th2, "boundary", math.nan, math.nan, math.nan, math.nan)
        return (args.t, r1, th1, r2, th2, dec.region, dec.g_part.real, dec.g_part.imag,
                dec.d_part.real, dec.d_part.imag)

    with ThreadPoolExecutor(_threads(args)) as ex:
        rows = list(ex.map(one, pts))
    rows.sort(key=lambda r: r[:5])
    lines = ["t,r1,theta1,r2,theta2,region,G_re,G_im,D_re,D_im"]
    for r in rows:
        lines.append(",".join([*(_num(x) for x in r[:5]), r[5], *(_num(x) for x in r[6:])]))
    _write_text(args.out, "\n".join(lines) + "\n")
    _write_report(args.report, {"config": _config_echo(args), "points": len(rows)})
    return 0


def _symbol(args):
    from .modesum import fwt_symbol, heat_symbol, sine_symbol

    if args.mode == "sine":
        return sine_symbol(args.t)
    if args.mode == "heat":
        return heat_symbol(args.tau)
    if args.w_im != 0:
        raise UsageError("the mode-sum oracle supports real w only (--w-im 0)")
    return fwt_symbol(args.w_re, args.t)


def cmd_modesum(args) -> int:
    from .kernel import KernelPoint
    from .modesum import kernel_modesum

    A = _flux(args)
    F = _symbol(args)
    eps = tuple(float(x) for x in args.eps_ladder.split(",")) if args.eps_ladder else None
    p = KernelPoint(args.t, args.r1, args.theta1, args.r2, args.theta2)
    t0 = time.perf_counter()
    res = kernel_modesum(F, p, A, k_max=args.k_max, tol=args.tol, summation=args.summation,
                         k_cap=args.k_cap, eps_list=eps, threads=_threads(args))
    lines = ["k,nu_k,K_re,K_im,tail_estimate"]
    for k, nu, val, spread in res.modes:
        lines.append(",".join(_num(x) for x in (k, nu, val.real, val.imag, spread)))
    _write_text(args.out, "\n".join(lines) + "\n")
    report = {"config": _config_echo(args), "value": [res.value.real, res.value.imag],
              "tail_estimate": res.tail_estimate, "k_max": res.k_max, "summation": res.summation,
              "runtime_s": time.perf_counter() - t0}
    _write_report(args.report, report)
    if not args.out or args.out == "-":
        return 0
    print(f"K = {res.value.real!r} {res.value.imag:+}i  (k_max {res.k_max}, tail {res.tail_estimate:.2e})")
    return 0


def cmd_propagate(args) -> int:
    from .propagate import PropagationRequest, apply_propagator, lp_norm
    from .spectrum import read_polar_field, write_polar_field

    A = _flux(args)
    f = read_polar_field(args.input)
    w = _w(args) if args.kind == "fwt" else None
    req = PropagationRequest(args.kind, args.t, A, f, args.path, w, args.k_max)
    t0 = time.perf_counter()
    u = apply_propagator(req, args.quad_tol)
    dt = time.perf_counter() - t0
    if args.out:
        write_polar_field(args.out, u)
    norms = {f"L{p}": {"input": lp_norm(f, p), "output": lp_norm(u, p)} for p in (1, 2, 4)}
    norms["Linf"] = {"input": lp_norm(f, math.inf), "output": lp_norm(u, math.inf)}
    _write_report(args.report, {"config": _config_echo(args), "norms": norms,
                                "runtime_s": dt, "quad_tol": args.quad_tol, "modes": req.modes})
    return 0


def cmd_verify(args) -> int:
    from .verify import run_suite

    kw = {}
    if args.suite == "pointwise":
        kw = {"n": args.points, "seed": args.seed}
    t0 = time.perf_counter()
    rep = run_suite(args.suite, **kw)
    rep["config"] = _config_echo(args)
    rep["runtime_s"] = time.perf_counter() - t0
    _write_report(args.report, rep)
    status = "pass" if rep["pass"] else "FAIL"
    print(f"{args.suite}: {status} (max_residual {rep['max_residual']:.3e})")
    return 0 if rep["pass"] else 2


def cmd_specfun_table(args) -> int:
    from .specfun import bessel_j_complex_order, bessel_remainder_W

    s = _range(args.s)
    lines = ["order_re,order_im,s,J_re,J_im,W_re,W_im"]
    for ore in (float(x) for x in args.order_re.split(",")):
        for oim in (float(x) for x in args.order_im.split(",")):
            kappa = complex(ore, oim)
            J = np.asarray(bessel_j_complex_order(kappa, np.maximum(s, 1e-300)))
            W = np.asarray(bessel_remainder_W(kappa, s)) if ore > 0 else np.full(s.shape, math.nan)
            for i, x in enumerate(s):
                lines.append(",".join(_num(v) for v in (ore, oim, x, J[i].real, J[i].imag,
                                                        W[i].real, W[i].imag)))
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


# --------------------------------------------------------------------------
# parser

def _add_common(p):
    p.add_argument("--config", help="key=value file; explicit flags override it")
    p.add_argument("--threads", type=int, help="worker threads (default: $ABWAVE_THREADS or CPU count)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="JSON report path")


def _add_flux(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--alpha", type=float, default=0.5, help="constant Aharonov-Bohm flux")
    g.add_argument("--flux-file", help="samples of alpha(theta) on a uniform [0, 2 pi] grid")


def _add_point(p, grid=True):
    p.add_argument("--t", type=float, required=True)
    for name in ("r1", "theta1", "r2", "theta2"):
        p.add_argument(f"--{name}", type=float)
    if grid:
        p.add_argument("--grid", help="r1,theta1,r2,theta2 ranges, each a:b:n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abwave", description="Wave propagator kernels with an Aharonov-Bohm potential.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("kernel", help="closed-form kernel values (CSV)")
    _add_common(p)
    p.add_argument("--mode", choices=("fwt", "sine"), required=True)
    p.add_argument("--w-re", type=float, default=0.5)
    p.add_argument("--w-im", type=float, default=0.0)
    _add_flux(p)
    _add_point(p)
    p.add_argument("--quad-tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("modesum", help="mode-sum oracle kernel with per-mode diagnostics (CSV)")
    _add_common(p)
    p.add_argument("--mode", choices=("fwt", "sine", "heat"), required=True)
    p.add_argument("--w-re", type=float, default=0.5)
    p.add_argument("--w-im", type=float, default=0.0)
    p.add_argument("--tau", type=float, default=0.5)
    _add_flux(p)
    _add_point(p, grid=False)
    p.add_argument("--k-max", type=int, default=60)
    p.add_argument("--k-cap", type=int, default=480)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--summation", choices=("auto", "plain", "filtered"), default="auto")
    p.add_argument("--eps-ladder", help="comma-separated damping parameters")
    p.add_argument("--out")
    p.set_defaults(func=cmd_modesum)

    p = sub.add_parser("propagate", help="apply a propagator to a polar field")
    _add_common(p)
    p.add_argument("--kind", choices=("sine", "fwt"), required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--w-re", type=float, default=0.5)
    p.add_argument("--w-im", type=float, default=0.0)
    _add_flux(p)
    p.add_argument("--input", required=True, help="field CSV (r,theta,re,im) with JSON sidecar")
    p.add_argument("--path", choices=("kernel", "modesum"), default="kernel")
    p.add_argument("--k-max", type=int)
    p.add_argument("--quad-tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("verify", help="run a verification suite")
    _add_common(p)
    p.add_argument("--suite", required=True,
                   choices=("decomposition", "mikhlin", "decay", "holder", "pointwise", "schur",
                            "macdonald", "identity"))
    p.add_argument("--points", type=int, default=10_000, help="samples per regime (pointwise)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("specfun-table", help="tabulate J_kappa(s) and W_kappa(s) (CSV)")
    _add_common(p)
    p.add_argument("--order-re", default="0.5", help="comma-separated Re kappa values")
    p.add_argument("--order-im", default="0", help="comma-separated Im kappa values")
    p.add_argument("--s", default="0.5:20:40", help="s range a:b:n")
    p.add_argument("--out")
    p.set_defaults(func=cmd_specfun_table)
    return parser


def _config_path(argv):
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def _parse(argv):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    path = _config_path(argv)
    if path:
        cfg = read_config(path)
        choices = parser._subparsers._group_actions[0].choices
        names = [a for a in argv if a in choices]
        if not names:
            raise UsageError("abwave: error: --config needs a subcommand")
        sub = choices[names[0]]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        # config values act as defaults; explicit flags still win
        for a in sub._actions:
            if a.dest in cfg:
                a.required = False
        sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def run(argv=None) -> int:
    """Run the CLI; returns the exit code."""
    try:
        args = _parse(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"abwave: error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # numeric or I/O failure
        print(f"abwave: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
