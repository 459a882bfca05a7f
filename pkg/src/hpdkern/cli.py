"""Command-line front end.

Every subcommand is seeded and file-based; identical argv plus identical
--seed produce byte-identical output.  Exit codes: 0 success, 1 domain
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import sys

import numpy as np

from . import mmd as mmd_mod
from . import transform as tr
from .errors import HpdKernError
from .hpd_core import load_matrix, load_samples
from .kernels import (
    bench_gram,
    bench_to_csv,
    gram,
    parse_kernel,
    psd_check,
)
from .spherical import monte_carlo_spherical, spherical_function


def _parse_grid(spec: str) -> tr.QuadratureGrid:
    """Parse "T=12,P=64" or "T=12,P=64,rule=gauss-legendre"."""
    kw = {}
    for item in spec.split(","):
        k, _, v = item.partition("=")
        kw[k.strip().lower()] = v.strip()
    return tr.QuadratureGrid(
        rule=kw.get("rule", "trapezoid"),
        half_width=float(kw.get("t", 12.0)),
        points=int(kw.get("p", 64)),
    )


def _parse_radial(spec: str, n: int) -> tr.RadialFunction:
    head, _, tail = spec.partition(":")
    params = {}
    for item in tail.split(","):
        if item:
            k, _, v = item.partition("=")
            params[k.strip()] = float(v)
    head = head.strip().lower()
    if head == "gaussian":
        return tr.gaussian_radial(params.get("sigma", 1.0))
    if head == "betaprime":
        return tr.beta_prime_radial(params["alpha"], n,
                                    include_gamma=bool(params.get("gamma", 0)))
    if head == "heat":
        kappa = params["kappa"]
        return tr.RadialFunction(
            name=spec,
            fn=lambda rho: np.apply_along_axis(
                lambda r: tr.heat_kernel_radial_spectrum(kappa, r), -1,
                np.atleast_2d(rho)).reshape(np.asarray(rho).shape[:-1]),
        )
    raise ValueError(f"unknown radial function {head!r}")


def _parse_density(spec: str, n: int) -> tr.SpectralDensity:
    head, _, tail = spec.partition(":")
    params = {}
    for item in tail.split(","):
        if item:
            k, _, v = item.partition("=")
            params[k.strip()] = float(v)
    head = head.strip().lower()
    if head == "heat":
        return tr.gaussian_density(params["kappa"], n)
    raise ValueError(f"unknown spectral density {head!r}")


def _load_points(path) -> list[np.ndarray]:
    with open(path) as fh:
        return [np.asarray(p, dtype=float) for p in json.load(fh)]


def _emit(args, payload, csv_text: str | None = None) -> None:
    """Write the payload as JSON or CSV to --output or stdout."""
    if args.format == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _complex_list(text: str) -> list[complex]:
    return [complex(v.strip().replace(" ", "")) for v in text.split(",")]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_kernel_eval(args) -> None:
    k = parse_kernel(args.kernel)
    x = load_matrix(args.x)
    y = load_matrix(args.y)
    val = k(x, y)
    _emit(args, {"kernel": k.name, "value": val}, csv_text=f"value\n{val!r}\n")


def _cmd_kernel_gram(args) -> None:
    k = parse_kernel(args.kernel)
    samples = load_samples(args.samples)
    gm = gram(k, samples)
    payload = gm.to_json_obj()
    if args.psd_check:
        rep = psd_check(gm)
        payload["psd"] = {"min_eig": rep.min_eig, "is_psd": rep.is_psd}
    buf = io.StringIO()
    w = csv.writer(buf)
    for row in gm.entries:
        w.writerow([repr(float(v)) for v in row])
    _emit(args, payload, csv_text=buf.getvalue())


def _cmd_kernel_bench(args) -> None:
    k = parse_kernel(args.kernel)
    dims = [int(v) for v in args.dims.split(",")]
    rows = bench_gram(k, dims, m=args.m, repeats=args.repeats,
                      seed=args.seed, threads=str(args.threads or "default"))
    payload = [{"N": r.n, "mean_s": r.mean_s, "std_s": r.std_s,
                "threads": r.threads} for r in rows]
    _emit(args, payload, csv_text=bench_to_csv(rows))


def _cmd_kernel_plot_betaprime(args) -> None:
    """Value grid of the Beta-prime radial over real 2x2 SPD points, tr < 2."""
    steps = args.steps
    alpha = args.alpha
    rows = []
    axis = [(i + 0.5) * 2.0 / steps for i in range(steps)]
    off_axis = [-1.0 + (i + 0.5) * 2.0 / steps for i in range(steps)]
    for a in axis:
        for c in axis:
            if a + c >= 2.0:
                continue
            for b in off_axis:
                if a * c - b * b <= 1e-9:
                    continue
                x = np.array([[a, b], [b, c]])
                rho = np.linalg.eigvalsh(x)
                val = float(np.prod((rho / (1.0 + rho) ** 2) ** alpha))
                rows.append((a, b, c, val))
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["x11", "x12", "x22", "value"])
    for r in rows:
        w.writerow([repr(v) for v in r])
    payload = [{"x11": r[0], "x12": r[1], "x22": r[2], "value": r[3]}
               for r in rows]
    _emit(args, payload, csv_text=buf.getvalue())


def _cmd_spherical_eval(args) -> None:
    lam = np.asarray(_complex_list(args.lam), dtype=complex)
    rho = np.asarray(_float_list(args.spectrum), dtype=float)
    val = spherical_function(lam, rho)
    payload = {"real": val.real, "imag": val.imag}
    _emit(args, payload, csv_text=f"real,imag\n{val.real!r},{val.imag!r}\n")


def _cmd_spherical_mc(args) -> None:
    lam = np.asarray(_complex_list(args.lam), dtype=complex)
    x = load_matrix(args.x)
    mean, stderr = monte_carlo_spherical(lam, x, samples=args.samples,
                                         seed=args.seed)
    payload = {"real": mean.real, "imag": mean.imag, "stderr": stderr}
    _emit(args, payload,
          csv_text=f"real,imag,stderr\n{mean.real!r},{mean.imag!r},{stderr!r}\n")


def _cmd_transform(args) -> None:
    grid = _parse_grid(args.grid)
    points = _load_points(args.points)
    if not points:
        raise HpdKernError("empty point list")
    n = len(points[0])
    out = []
    if args.direction == "forward":
        f = _parse_radial(args.function, n)
        for t in points:
            v = tr.forward_transform(f, t, grid)
            out.append({"point": list(map(float, t)),
                        "real": v.real, "imag": v.imag})
    else:
        g = _parse_density(args.function, n)
        for rho in points:
            v = tr.inverse_transform(g, rho, grid)
            out.append({"point": list(map(float, rho)), "real": v, "imag": 0.0})
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow([f"p{i+1}" for i in range(n)] + ["real", "imag"])
    for row in out:
        w.writerow([repr(v) for v in row["point"]]
                   + [repr(row["real"]), repr(row["imag"])])
    _emit(args, out, csv_text=buf.getvalue())


def _cmd_godement(args) -> None:
    t_grid = _load_points(args.tgrid)
    n = len(t_grid[0]) if t_grid else 0
    f = _parse_radial(args.function, n)
    grid = _parse_grid(args.grid)
    rep = tr.godement_check(f, t_grid, grid)
    payload = {"verdict": rep.verdict, "min_value": rep.min_value,
               "argmin": list(map(float, rep.argmin))}
    _emit(args, payload,
          csv_text=f"verdict,min_value\n{rep.verdict},{rep.min_value!r}\n")


def _cmd_mmd_test(args) -> None:
    k = parse_kernel(args.kernel)
    xs = load_samples(args.x)
    ys = load_samples(args.y)
    if args.method == "linear":
        res = mmd_mod.mmd_linear(k, xs, ys, level=args.level)
    else:
        res = mmd_mod.permutation_test(k, xs, ys, level=args.level,
                                       seed=args.seed)
    payload = res.to_obj()
    _emit(args, payload,
          csv_text="statistic,threshold,reject\n"
                   f"{res.statistic!r},{res.threshold!r},{res.reject}\n")


def _cmd_mmd_experiment(args) -> None:
    cfg = mmd_mod.ExperimentConfig.from_json(args.config)
    rows = mmd_mod.two_sample_experiment(cfg)
    payload = [{"r": r.r, "rejections": r.rejections, "trials": r.trials,
                "rate": r.rate} for r in rows]
    _emit(args, payload, csv_text=mmd_mod.experiment_to_csv(rows))


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    # The same flags live on the root parser (with real defaults) and on
    # every leaf (defaulting to SUPPRESS so they never mask the root values);
    # this lets users put them before or after the subcommand.
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int,
                   **({"default": d} if suppress else {"default": 0}))
    p.add_argument("--threads", type=int, default=d,
                   help="cap BLAS worker threads")
    p.add_argument("--output", default=d, help="output file (default stdout)")
    p.add_argument("--format", choices=["csv", "json"],
                   **({"default": d} if suppress else {"default": "json"}))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hpdkern",
                                description="Invariant kernels on HPD matrices")
    _add_globals(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    kern = sub.add_parser("kernel", help="kernel evaluation and benchmarks")
    ksub = kern.add_subparsers(dest="subcommand", required=True)
    ke = ksub.add_parser("eval", parents=[common])
    ke.add_argument("--kernel", required=True)
    ke.add_argument("--x", required=True)
    ke.add_argument("--y", required=True)
    ke.set_defaults(func=_cmd_kernel_eval)
    kg = ksub.add_parser("gram", parents=[common])
    kg.add_argument("--kernel", required=True)
    kg.add_argument("--samples", required=True)
    kg.add_argument("--psd-check", action="store_true")
    kg.set_defaults(func=_cmd_kernel_gram)
    kb = ksub.add_parser("bench", parents=[common])
    kb.add_argument("--kernel", required=True)
    kb.add_argument("--dims", default="5,20,50")
    kb.add_argument("--m", type=int, default=100)
    kb.add_argument("--repeats", type=int, default=3)
    kb.set_defaults(func=_cmd_kernel_bench)
    kp = ksub.add_parser("plot-betaprime", parents=[common])
    kp.add_argument("--alpha", type=float, default=2.0)
    kp.add_argument("--steps", type=int, default=20)
    kp.set_defaults(func=_cmd_kernel_plot_betaprime)

    sph = sub.add_parser("spherical", help="spherical function evaluation")
    ssub = sph.add_subparsers(dest="subcommand", required=True)
    se = ssub.add_parser("eval", parents=[common])
    se.add_argument("--lambda", dest="lam", required=True,
                    help="comma-separated complex values, e.g. '1j,2j'")
    se.add_argument("--spectrum", required=True,
                    help="comma-separated positive reals")
    se.set_defaults(func=_cmd_spherical_eval)
    sm = ssub.add_parser("mc", parents=[common])
    sm.add_argument("--lambda", dest="lam", required=True)
    sm.add_argument("--x", required=True)
    sm.add_argument("--samples", type=int, default=100000)
    sm.set_defaults(func=_cmd_spherical_mc)

    trf = sub.add_parser("transform", help="spherical transforms by quadrature")
    tsub = trf.add_subparsers(dest="direction", required=True)
    for d in ("forward", "inverse"):
        tp = tsub.add_parser(d, parents=[common])
        tp.add_argument("--function", required=True)
        tp.add_argument("--points", required=True,
                        help="JSON file with a list of vectors")
        tp.add_argument("--grid", default="T=12,P=64")
        tp.set_defaults(func=_cmd_transform, direction=d)

    god = sub.add_parser("godement", help="positivity scan of the transform")
    gsub = god.add_subparsers(dest="subcommand", required=True)
    gc = gsub.add_parser("check", parents=[common])
    gc.add_argument("--function", required=True)
    gc.add_argument("--tgrid", required=True)
    gc.add_argument("--grid", default="T=12,P=64")
    gc.set_defaults(func=_cmd_godement)

    mm = sub.add_parser("mmd", help="two-sample testing")
    msub = mm.add_subparsers(dest="subcommand", required=True)
    mt = msub.add_parser("test", parents=[common])
    mt.add_argument("--kernel", required=True)
    mt.add_argument("--x", required=True)
    mt.add_argument("--y", required=True)
    mt.add_argument("--method", choices=["linear", "quadratic"],
                    default="linear")
    mt.add_argument("--level", type=float, default=0.05)
    mt.set_defaults(func=_cmd_mmd_test)
    me = msub.add_parser("experiment", parents=[common])
    me.add_argument("--config", required=True)
    me.set_defaults(func=_cmd_mmd_experiment)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    ctx = contextlib.nullcontext()
    if args.threads is not None:
        import threadpoolctl
        ctx = threadpoolctl.threadpool_limits(limits=args.threads)
    try:
        with ctx:
            args.func(args)
    except HpdKernError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
