"""Command-line front end.

Subcommands: spectrum, eigenfunction, spy, build-ck, potential, evolve,
verify, bench.  A plain-text key=value config file can seed any command's
flags (--config); explicit flags win.  Report commands render a matplotlib
figure next to the delimited output unless --no-plot is given.

Exit codes: 0 success, 1 I/O error, 2 precondition violation,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import coupling
from . import io as io_mod
from . import plots
from . import potential as potential_mod
from . import qubits
from . import verify as verify_mod
from . import wigner
from .dyadic import MAX_LEVEL_ENV, max_level
from .errors import ConsistencyError, DomainError

SUBCOMMANDS = ("spectrum", "eigenfunction", "spy", "build-ck", "potential",
               "evolve", "verify", "bench")


# ---------------------------------------------------------------------------
# Config file handling: key=value lines become flags placed BEFORE the
# user's own flags, so explicitly given flags always win.
# ---------------------------------------------------------------------------

def _config_tokens(path: str) -> list[str]:
    tokens = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "config":
                raise DomainError("config files may not nest 'config'")
            tokens.append(f"--{key}={value}")
        else:
            tokens.append(f"--{line}")
    return tokens


def _inject_config(argv: list[str]) -> list[str]:
    cmd_pos = next((i for i, a in enumerate(argv) if a in SUBCOMMANDS), None)
    if cmd_pos is None:
        return argv
    config_path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif arg.startswith("--config="):
            config_path = arg.split("=", 1)[1]
    if config_path is None:
        return argv
    tokens = _config_tokens(config_path)
    return argv[:cmd_pos + 1] + tokens + argv[cmd_pos + 1:]


def _sign(text: str) -> int:
    if text in ("+", "+1"):
        return +1
    if text in ("-", "-1"):
        return -1
    raise argparse.ArgumentTypeError(f"sign must be one of +, -, +1, -1; got {text!r}")


def _out_path(args, default: str) -> Path:
    path = Path(args.out) if args.out else Path(default)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _maybe_plot(args) -> bool:
    return not args.no_plot


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def spectrum_rows(n_max: int) -> list[tuple[int, int, int, float]]:
    """All (n, k, s, E) labels for scales up to n_max; n_max = 0 yields the
    single zero eigenvalue of the scale-0 block."""
    if not 0 <= n_max <= 20:
        raise DomainError(f"n-max must be in [0, 20], got {n_max}")
    if n_max == 0:
        return [(0, 0, +1, 0.0)]
    rows = []
    for n in range(1, n_max + 1):
        for k in range(1 << (n - 1)):
            for s in (+1, -1):
                rows.append((n, k, s, s * (2 * k + 1) * 0.5**n))
    return rows


def cmd_spectrum(args) -> int:
    rows = spectrum_rows(args.n_max)
    out = _out_path(args, "spectrum.csv")
    if args.format == "csv":
        io_mod.write_spectrum_csv(out, rows)
    elif args.format == "json":
        payload = [{"n": n, "k": k, "s": "+" if s > 0 else "-", "E": e}
                   for n, k, s, e in rows]
        out.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        raise DomainError(f"spectrum supports csv or json, not {args.format}")
    print(f"wrote {out} ({len(rows)} rows)")
    if _maybe_plot(args):
        png = out.with_suffix(".png")
        plots.save_spectrum(png, rows)
        print(f"wrote {png}")
    return 0


def cmd_eigenfunction(args) -> int:
    idx = coupling.EigenIndex(args.n, args.k, args.s)
    fn = coupling.eigenfunction(idx, args.level)
    residual = coupling.eigen_relation_residual(idx, args.level)
    out = _out_path(args, "eigenfunction.csv")
    if args.format == "csv":
        io_mod.write_eigenfunction_csv(out, fn)
    elif args.format == "json":
        payload = {"n": idx.n, "k": idx.k, "s": idx.s, "E": idx.eigenvalue,
                   "level": args.level, "values": fn.values.tolist()}
        out.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        raise DomainError(f"eigenfunction supports csv or json, not {args.format}")
    print(f"wrote {out} ({fn.n_cells} rows)")
    print(f"eigenvalue E = {idx.eigenvalue:+.10g}, "
          f"eigen-check residual {residual:.3e}")
    if _maybe_plot(args):
        png = out.with_suffix(".png")
        plots.save_function(png, fn,
                            f"eigenfunction n={idx.n} k={idx.k} "
                            f"s={'+' if idx.s > 0 else '-'} (E={idx.eigenvalue:+g})")
        print(f"wrote {png}")
    return 0


def haar_block_pattern(k_qubits: int) -> tuple[list[int], list[int]]:
    """Nonzero positions of the block representation at level K: the constant
    mode plus every digit-flip entry of each detail scale."""
    rows, cols = [0], [0]
    for n in range(1, k_qubits):
        base = 1 << n
        for i in range(1 << n):
            for j in range(1, n + 1):
                rows.append(base + i)
                cols.append(base + (i ^ (1 << (n - j))))
    return rows, cols


def cmd_spy(args) -> int:
    if args.basis == "qubit":
        op = qubits.build_ck(args.k_qubits, 1.0)
        rows, cols = op.rows.tolist(), op.cols.tolist()
    else:
        if args.k_qubits > max_level():
            raise DomainError(f"K exceeds the level cap {max_level()}")
        rows, cols = haar_block_pattern(args.k_qubits)
    out = _out_path(args, f"spy_{args.basis}.csv")
    io_mod.write_spy_csv(out, rows, cols)
    print(f"K = {args.k_qubits} ({args.basis} basis): nnz = {len(rows)}")
    print(f"wrote {out}")
    if _maybe_plot(args):
        png = out.with_suffix(".png")
        plots.save_spy(png, rows, cols, 1 << args.k_qubits,
                       f"nonzero pattern, K={args.k_qubits}, {args.basis} basis")
        print(f"wrote {png}")
    return 0


def cmd_build_ck(args) -> int:
    op = qubits.build_ck(args.k_qubits, args.lam)
    if args.format == "mm":
        out = _out_path(args, "ck.mtx")
        io_mod.write_matrix_market(out, op)
    elif args.format == "csv":
        out = _out_path(args, "ck.csv")
        lines = ["row,col,value"]
        lines += [f"{r},{c},{v:.17g}"
                  for r, c, v in zip(op.rows, op.cols, op.vals)]
        out.write_text("\n".join(lines) + "\n")
    else:
        raise DomainError(f"build-ck supports mm or csv, not {args.format}")
    print(f"K = {args.k_qubits}, lambda = {args.lam:g}: "
          f"dim = {op.dim}, nnz = {op.nnz}")
    print(f"wrote {out}")
    return 0


def cmd_potential(args) -> int:
    level = args.level if args.level is not None else args.k_qubits
    spec = potential_mod.PotentialSpec(args.omega, args.k_qubits)
    fn = potential_mod.rademacher_partial_sum(spec, level)
    line = args.omega * (fn.midpoints() - 0.5)
    sup_dev = float(np.max(np.abs(fn.values - line)))

    out = _out_path(args, "potential.csv")
    io_mod.write_function_csv(out, fn)
    table = out.with_name(out.stem + "_coeffs" + out.suffix)
    io_mod.write_coefficient_table_csv(
        table, [(k, potential_mod.potential_haar_coefficient(k, args.omega))
                for k in range(args.k_qubits)])
    print(f"K = {args.k_qubits}, omega = {args.omega:g}, level = {level}")
    print(f"sup deviation from the midpoint-sampled line: {sup_dev:.3e} "
          f"(bound {args.omega * 0.5**(args.k_qubits + 1):.3e})")
    print(f"wrote {out}")
    print(f"wrote {table}")
    if _maybe_plot(args):
        png = out.with_suffix(".png")
        plots.save_function(png, fn,
                            f"partial-sum potential, K={args.k_qubits}, "
                            f"omega={args.omega:g}", ylabel="V(x)")
        print(f"wrote {png}")
    return 0


def _resolve_energy(args) -> float:
    has_idx = args.n is not None or args.k is not None or args.s is not None
    if args.energy is not None and has_idx:
        raise DomainError("give either --E or the index triple --n/--k/--s, not both")
    if args.energy is not None:
        return args.energy
    if args.n is None or args.k is None or args.s is None:
        raise DomainError("an eigenvalue is required: --E or all of --n/--k/--s")
    return coupling.EigenIndex(args.n, args.k, args.s).eigenvalue


def cmd_evolve(args) -> int:
    energy = _resolve_energy(args)
    out_dir = Path(args.out) if args.out else Path("evolve_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.frames < 1:
        raise DomainError(f"frames must be >= 1, got {args.frames}")
    if args.format not in ("csv", "bin"):
        raise DomainError(f"evolve supports csv or bin frames, not {args.format}")

    f0 = wigner.coherent_wigner(args.q0, args.p0, args.sigma,
                                q_min=args.qmin, q_max=args.qmax,
                                p_min=args.pmin, p_max=args.pmax,
                                nq=args.nq, n_p=args.n_p)
    times = np.linspace(0.0, args.t, args.frames + 1)
    lam_e = args.lam * energy

    frames = []
    if args.method in ("closed", "both"):
        for ti in times:
            frames.append(wigner.evolve_closed_form(
                f0, wigner.EvolutionParams(args.lam, energy, float(ti)),
                interp=args.interp))
    else:
        state = f0
        frames.append(state)
        for t_prev, t_next in zip(times[:-1], times[1:]):
            seg = wigner.EvolutionParams(args.lam, energy, float(t_next - t_prev))
            state = wigner.evolve_numeric(state, seg, args.dt, interp=args.interp)
            frames.append(state)

    centroids = np.array([frame.centroid() for frame in frames])
    fitted = wigner.fit_circle(centroids[:, 0], centroids[:, 1]) \
        if len(frames) >= 3 else (math.nan, math.nan, math.nan)

    for i, (ti, frame) in enumerate(zip(times, frames)):
        if args.format == "csv":
            io_mod.write_wigner_csv(out_dir / f"frame_{i:04d}.csv", frame)
        else:
            io_mod.write_wigner_bin(out_dir / f"frame_{i:04d}.bin", frame,
                                    t=float(ti))

    lines = ["t,centroid_q,centroid_p"]
    lines += [f"{t:.17g},{c[0]:.17g},{c[1]:.17g}"
              for t, c in zip(times, centroids)]
    (out_dir / "centroids.csv").write_text("\n".join(lines) + "\n")

    summary = {
        "lambda": args.lam, "E": energy, "lambda_E": lam_e,
        "t": args.t, "frames": args.frames, "method": args.method,
        "interp": args.interp, "dt": args.dt if args.method != "closed" else None,
        "expected_center": [-lam_e, 0.0],
        "fitted_center": [fitted[0], fitted[1]], "fitted_radius": fitted[2],
        "grid": {"q_min": args.qmin, "q_max": args.qmax,
                 "p_min": args.pmin, "p_max": args.pmax,
                 "nq": args.nq, "np": args.n_p},
    }
    if args.method == "both":
        closed_final = frames[-1]
        state = f0
        for t_prev, t_next in zip(times[:-1], times[1:]):
            seg = wigner.EvolutionParams(args.lam, energy, float(t_next - t_prev))
            state = wigner.evolve_numeric(state, seg, args.dt, interp=args.interp)
        gap = closed_final.with_values(state.values - closed_final.values).l2_norm()
        summary["closed_vs_numeric_l2"] = gap
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

    print(f"E = {energy:+.10g}, rotation center ({-lam_e:+.6g}, 0)")
    print(f"fitted centroid-circle center ({fitted[0]:+.6g}, {fitted[1]:+.6g})")
    print(f"wrote {args.frames + 1} frames + centroids.csv + summary.json "
          f"to {out_dir}/")
    if _maybe_plot(args):
        plots.save_wigner_frame(out_dir / "frame_final.png", frames[-1],
                                f"t = {args.t:g}, E = {energy:+g}")
        plots.save_centroids(out_dir / "centroids.png", centroids,
                             (-lam_e, 0.0), fitted[:2])
        print(f"wrote {out_dir}/frame_final.png and {out_dir}/centroids.png")
    return 0


def cmd_verify(args) -> int:
    results = verify_mod.run_all(fault=args.inject_fault,
                                 include_timing=not args.quick)
    width = max(len(r.name) for r in results)
    failures = []
    for result in results:
        status = "pass" if result.passed else "FAIL"
        print(f"[{status}] {result.name:<{width}}  {result.detail}")
        if not result.passed:
            failures.append(result.name)
    for note in verify_mod.NOTES:
        print(note)
    if failures:
        print(f"VERIFY FAILED ({len(failures)}/{len(results)}): "
              + ", ".join(failures))
        return 3
    print(f"VERIFY OK ({len(results)} checks)")
    return 0


def cmd_bench(args) -> int:
    if args.level_min < 1 or args.level_max < args.level_min:
        raise DomainError("need 1 <= L-min <= L-max")
    if args.level_max > max_level():
        raise DomainError(f"L-max exceeds the level cap {max_level()} "
                          f"(override with {MAX_LEVEL_ENV})")
    rows = bench_mod.run_bench(range(args.level_min, args.level_max + 1),
                               repeats=args.repeats)
    out = _out_path(args, "bench.csv")
    lines = ["L,N,grid_seconds,fast_seconds,dense_seconds,"
             "coupling_nnz_per_dim,block_nnz_per_dim"]
    for row in rows:
        dense = "" if row["dense_seconds"] is None else f"{row['dense_seconds']:.6e}"
        lines.append(f"{row['L']},{row['N']},{row['grid_seconds']:.6e},"
                     f"{row['fast_seconds']:.6e},{dense},"
                     f"{row['coupling_nnz_per_dim']},"
                     f"{row['block_nnz_per_dim']:.6f}")
    out.write_text("\n".join(lines) + "\n")
    for row in rows:
        dense = ("dense skipped (L > 12)" if row["dense_seconds"] is None
                 else f"dense {row['dense_seconds']:.3e} s")
        print(f"L={row['L']:>2}  grid {row['grid_seconds']:.3e} s  "
              f"fast {row['fast_seconds']:.3e} s  {dense}")
    print(f"wrote {out}")
    if _maybe_plot(args):
        png = out.with_suffix(".png")
        plots.save_bench(png, rows)
        print(f"wrote {png}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractal-qmm",
        description="Self-similar qubit-array coupling operator: spectra, "
                    "eigenfunctions, sparse exports, potential sums, and "
                    "phase-space evolution.",
        epilog=f"The {MAX_LEVEL_ENV} environment variable overrides the "
               f"global level cap (default 24).")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE",
                        help="key=value file seeding this command's flags "
                             "(explicit flags win)")
    common.add_argument("--out", metavar="PATH", help="output file or directory")
    common.add_argument("--no-plot", action="store_true",
                        help="skip the companion figure")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common],
                       help="closed-form eigenvalue table (n, k, s, E)")
    p.add_argument("--n-max", type=int, default=4, help="largest scale (<= 20)")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("eigenfunction", parents=[common],
                       help="sample a Walsh-type eigenfunction on the grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--s", type=_sign, required=True, help="+ or -")
    p.add_argument("--L", dest="level", type=int, default=8)
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.set_defaults(func=cmd_eigenfunction)

    p = sub.add_parser("spy", parents=[common],
                       help="nonzero pattern of the coupling matrix")
    p.add_argument("--K", dest="k_qubits", type=int, required=True)
    p.add_argument("--basis", default="qubit", choices=["qubit", "haar"])
    p.set_defaults(func=cmd_spy)

    p = sub.add_parser("build-ck", parents=[common],
                       help="export the sparse qubit coupling matrix")
    p.add_argument("--K", dest="k_qubits", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--format", default="mm", choices=["mm", "csv"])
    p.set_defaults(func=cmd_build_ck)

    p = sub.add_parser("potential", parents=[common],
                       help="square-wave partial sum of the linear potential")
    p.add_argument("--K", dest="k_qubits", type=int, required=True,
                   help="truncation depth")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--L", dest="level", type=int, default=None,
                   help="sampling level (default K)")
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("evolve", parents=[common],
                       help="rotate a Gaussian in the phase plane, "
                            "conditioned on an array eigenvalue")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--E", dest="energy", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--s", type=_sign, default=None)
    p.add_argument("--q0", type=float, default=0.0)
    p.add_argument("--p0", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=2.0**-0.5)
    p.add_argument("--qmin", type=float, default=-4.0)
    p.add_argument("--qmax", type=float, default=4.0)
    p.add_argument("--pmin", type=float, default=-4.0)
    p.add_argument("--pmax", type=float, default=4.0)
    p.add_argument("--nq", type=int, default=256)
    p.add_argument("--np", dest="n_p", type=int, default=256)
    p.add_argument("--t", type=float, default=2.0 * math.pi)
    p.add_argument("--dt", type=float, default=1e-2,
                   help="step for the numeric method")
    p.add_argument("--frames", type=int, default=16)
    p.add_argument("--method", default="closed",
                   choices=["closed", "numeric", "both"])
    p.add_argument("--interp", default="linear", choices=["linear", "cubic"])
    p.add_argument("--format", default="csv", choices=["csv", "bin"])
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("verify", parents=[common],
                       help="run the cross-module consistency suite")
    p.add_argument("--quick", action="store_true",
                   help="skip the wall-time scaling check")
    p.add_argument("--inject-fault", default=None, choices=verify_mod.FAULTS,
                   help="deliberately break a check (testing hook)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common],
                       help="time the operator application paths")
    p.add_argument("--L-min", dest="level_min", type=int, default=8)
    p.add_argument("--L-max", dest="level_max", type=int, default=14)
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _inject_config(argv)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConsistencyError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
