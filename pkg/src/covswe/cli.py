"""Command-line driver: run scenarios, reproduce result tables, build meshes.

Subcommands:

* ``run``   — one simulation: writes CSV (and VTK in 2D) plus an error report
              when the scenario has an exact solution; ``--report`` also
              renders a matplotlib figure next to the delimited output.
* ``table`` — reproduce a named result table (wb1d, wb2d, noise1d, ell2d,
              conv, cartesian-equiv); prints a human-readable table and
              writes a machine CSV.
* ``mesh``  — generate a polygonal mesh and save it to a file.
* ``list``  — print the scenario catalog.

A flat ``key = value`` config file can replace flags (flags win on conflict).
Independent table rows run concurrently; ``COVSWE_THREADS`` caps the worker
count (0 or unset = one worker per row, up to the CPU count).
"""

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import CovsweError, ParseError
from .mesh import (Mesh1D, build_1d, build_quad_grid, build_voronoi,
                   load_mesh, save_mesh)
from .metrics_io import FMT, write_csv_1d, write_csv_2d, write_vtk_2d
from .scenarios import catalog, exact_rest_errors, get_scenario
from .solver import (SchemeConfig, cartesian_equivalence_errors, run)

SCHEME_NAMES = {"standard": "standard", "wb": "wb_rest",
                "wb-general": "wb_general"}
METRIC_NAMES = ("cartesian", "spherical", "elliptical")
TABLE_TARGETS = ("wb1d", "wb2d", "noise1d", "ell2d", "conv",
                 "cartesian-equiv")

# run/config options: name -> (type, default). store-true flags use bool.
_RUN_KEYS = {
    "scenario": (str, None), "metric": (str, None), "n": (int, None),
    "mesh_file": (str, None), "scheme": (str, "wb"), "limiter": (str, None),
    "cfl": (float, None), "t_end": (float, 1.0), "seed": (int, None),
    "noise_amp": (float, None), "out": (str, "."), "output_every": (int, 0),
    "exact_b_grad": (bool, False), "report": (bool, False),
}


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _worker_count(n_jobs: int) -> int:
    cap = int(os.environ.get("COVSWE_THREADS", "0") or "0")
    if cap <= 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_jobs))


def _read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file (#-comments and blank lines ok)."""
    values = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError("expected 'key = value'", line=lineno)
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            val = val.strip()
            if key not in _RUN_KEYS:
                raise ParseError(f"unknown config key {key!r}", line=lineno)
            typ = _RUN_KEYS[key][0]
            try:
                values[key] = (val.lower() in ("1", "true", "yes")
                               if typ is bool else typ(val))
            except ValueError:
                raise ParseError(f"bad value for {key!r}: {val!r}",
                                 line=lineno)
    return values


def _merge_options(args) -> dict:
    """defaults <- config file <- explicit flags."""
    opts = {k: d for k, (_, d) in _RUN_KEYS.items()}
    if args.config:
        opts.update(_read_config(args.config))
    for key in _RUN_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covswe",
        description="Well-balanced shallow-water solver on curved manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation")
    p_run.add_argument("--config", help="flat key = value config file")
    p_run.add_argument("--scenario", help="scenario name (see `covswe list`)")
    p_run.add_argument("--metric", choices=METRIC_NAMES)
    p_run.add_argument("--n", type=int,
                       help="cells per direction (uniform grid)")
    p_run.add_argument("--mesh-file", dest="mesh_file",
                       help="polygonal mesh file (2D only)")
    p_run.add_argument("--scheme", choices=sorted(SCHEME_NAMES))
    p_run.add_argument("--limiter", choices=("barth", "minmod", "none"))
    p_run.add_argument("--cfl", type=float)
    p_run.add_argument("--t-end", dest="t_end", type=float)
    p_run.add_argument("--seed", type=int, help="bathymetry noise seed")
    p_run.add_argument("--noise-amp", dest="noise_amp", type=float)
    p_run.add_argument("--out", help="output directory (default .)")
    p_run.add_argument("--output-every", dest="output_every", type=int,
                       help="write a snapshot every K steps (0 = final only)")
    p_run.add_argument("--exact-b-grad", dest="exact_b_grad",
                       action="store_const", const=True,
                       help="use the analytic bathymetry gradient")
    p_run.add_argument("--report", action="store_const", const=True,
                       help="render a figure next to the delimited output")

    p_tab = sub.add_parser("table", help="reproduce a named result table")
    p_tab.add_argument("target", choices=TABLE_TARGETS)
    p_tab.add_argument("--out", default=".", help="directory for the CSV")

    p_mesh = sub.add_parser("mesh", help="generate and save a mesh")
    p_mesh.add_argument("--kind", choices=("quad", "voronoi"), default="quad")
    p_mesh.add_argument("--bounds", default="-1,1,-1,1",
                        help="x_lo,x_hi,y_lo,y_hi")
    p_mesh.add_argument("--nx", type=int, default=20)
    p_mesh.add_argument("--ny", type=int, default=20)
    p_mesh.add_argument("--seeds", type=int, default=400,
                        help="seed count (voronoi)")
    p_mesh.add_argument("--lloyd-iters", dest="lloyd_iters", type=int,
                        default=50)
    p_mesh.add_argument("--seed", type=int, default=0)
    p_mesh.add_argument("--out", required=True, help="output mesh file")

    sub.add_parser("list", help="print the scenario catalog")
    return parser


# --------------------------------------------------------------------------
# run


def _make_mesh(scenario, opts):
    if scenario.dimension == 1:
        if opts["n"] is None:
            raise CovsweError("run: --n is required for 1D scenarios")
        return build_1d(scenario.bounds[0], scenario.bounds[1], opts["n"])
    if opts["mesh_file"]:
        return load_mesh(opts["mesh_file"])
    if opts["n"] is None:
        raise CovsweError("run: --n or --mesh-file is required in 2D")
    return build_quad_grid(scenario.bounds, opts["n"], opts["n"])


def _make_config(scenario, opts) -> SchemeConfig:
    scheme = SCHEME_NAMES[opts["scheme"]]
    equilibrium = None
    if scheme == "wb_general":
        if scenario.exact is not None:
            equilibrium = scenario.exact
        elif scenario.dimension == 1:
            def equilibrium(xi, t):
                return scenario.initial_eta(xi) - scenario.bathymetry(xi), 0.0
        else:
            def equilibrium(x1, x2, t):
                h = scenario.initial_eta(x1, x2) - scenario.bathymetry(x1, x2)
                return h, 0.0, 0.0
    return SchemeConfig(scheme=scheme, cfl=opts["cfl"], t_end=opts["t_end"],
                        limiter=opts["limiter"],
                        exact_bathymetry_gradient=opts["exact_b_grad"],
                        equilibrium=equilibrium)


def _write_snapshot(out_dir, scenario, mesh, state):
    stem = os.path.join(out_dir, f"{scenario.name}_{state.step:06d}")
    if scenario.dimension == 1:
        write_csv_1d(stem + ".csv", mesh, state.averages, scenario.axis)
    else:
        write_csv_2d(stem + ".csv", mesh, state.averages)
        write_vtk_2d(stem + ".vtk", mesh, state.averages, scenario.metric)
    return stem


def _render_profile(stem, scenario, mesh, state):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    q = state.averages
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if scenario.dimension == 1:
        x = mesh.centers
        ax.plot(x, q[:, 0] + q[:, 3], label="free surface $\\eta$")
        ax.plot(x, q[:, 3], label="bathymetry $b$")
        ax.set_xlabel("$\\xi$")
    else:
        pts = mesh.centroids
        tpc = ax.tripcolor(pts[:, 0], pts[:, 1], q[:, 0] + q[:, 3])
        fig.colorbar(tpc, ax=ax, label="free surface $\\eta$")
        ax.set_xlabel("$x^1$")
        ax.set_ylabel("$x^2$")
    ax.set_title(f"{scenario.name}  t = {state.t:g}")
    if scenario.dimension == 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(stem + ".png", dpi=150)
    plt.close(fig)


def _cmd_run(args) -> int:
    opts = _merge_options(args)
    if not opts["scenario"]:
        return _usage_error("run: --scenario is required")
    try:
        scenario = get_scenario(opts["scenario"], metric=opts["metric"],
                                noise_amp=opts["noise_amp"],
                                noise_seed=opts["seed"])
    except KeyError as exc:
        return _usage_error(str(exc.args[0]))

    out_dir = opts["out"]
    os.makedirs(out_dir, exist_ok=True)
    mesh = _make_mesh(scenario, opts)
    config = _make_config(scenario, opts)

    def snapshot(state):
        stem = _write_snapshot(out_dir, scenario, mesh, state)
        if opts["report"]:
            _render_profile(stem, scenario, mesh, state)

    final = run(scenario, mesh, config, callbacks=(snapshot,),
                output_every=opts["output_every"])
    print(f"{scenario.name}: t = {final.t:g} after {final.step} steps")

    if scenario.exact is not None:
        errs = exact_rest_errors(mesh, final.averages, scenario, t=final.t)
        labels = ("L2_h", "L2_u1", "L2_u2")
        report_path = os.path.join(out_dir, f"{scenario.name}_report.csv")
        with open(report_path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["variable", "l2_error"])
            for lab, err in zip(labels, errs):
                writer.writerow([lab, FMT % err])
        for lab, err in zip(labels, errs):
            print(f"  {lab} = {err:.6e}")
    return 0


# --------------------------------------------------------------------------
# table


def _rest_row(name, metric, mesh_builder, t_end, label):
    scenario = get_scenario(name, metric=metric)
    mesh = mesh_builder(scenario)
    state = run(scenario, mesh, SchemeConfig(scheme="wb_rest", t_end=t_end))
    errs = exact_rest_errors(mesh, state.averages, scenario, t=t_end)
    return [label, errs[0], errs[1], errs[2]]


def _parallel_rows(jobs):
    with ThreadPoolExecutor(max_workers=_worker_count(len(jobs))) as pool:
        return list(pool.map(lambda j: j(), jobs))


def _table_wb1d():
    def build(scenario):
        n = int(round((scenario.bounds[1] - scenario.bounds[0]) / 0.05))
        return build_1d(scenario.bounds[0], scenario.bounds[1], n)
    jobs = [lambda m=m: _rest_row("wr_bump_1d", m, build, 100.0, m)
            for m in METRIC_NAMES]
    return ["metric", "L2_h", "L2_u1", "L2_u2"], _parallel_rows(jobs)


def _table_wb2d():
    def build(scenario):
        return build_quad_grid(scenario.bounds, 56, 56)
    jobs = [lambda m=m: _rest_row("wr_bump_2d", m, build, 10.0, m)
            for m in METRIC_NAMES]
    return ["metric", "L2_h", "L2_u1", "L2_u2"], _parallel_rows(jobs)


def _table_noise1d():
    def build(scenario):
        n = int(round((scenario.bounds[1] - scenario.bounds[0]) / 1e-2))
        return build_1d(scenario.bounds[0], scenario.bounds[1], n)
    names = ("noisy_linear_1d_cart", "noisy_sine_1d_sph")
    jobs = [lambda nm=nm: _rest_row(nm, None, build, 100.0, nm)
            for nm in names]
    return ["scenario", "L2_h", "L2_u1", "L2_u2"], _parallel_rows(jobs)


def _table_ell2d():
    def build(scenario):
        return build_quad_grid(scenario.bounds, 35, 35)
    rows = [_rest_row("wr_ellbat_2d", None, build, 10.0, "elliptical")]
    return ["metric", "L2_h", "L2_u1", "L2_u2"], rows


def _conv_row(n):
    scenario = get_scenario("steady_conv_1d")
    mesh = build_1d(scenario.bounds[0], scenario.bounds[1], n)
    state = run(scenario, mesh,
                SchemeConfig(scheme="wb_rest", t_end=3.0, limiter="minmod"))
    errs = exact_rest_errors(mesh, state.averages, scenario, t=state.t)
    return mesh.dx, errs[0], errs[1]


def _table_conv():
    ns = (50, 100, 200, 300, 400)
    raw = _parallel_rows([lambda n=n: _conv_row(n) for n in ns])
    rows = []
    for i, (dx, eh, eu) in enumerate(raw):
        oh = ou = float("nan")
        if i:
            dx0, eh0, eu0 = raw[i - 1]
            oh = math.log(eh0 / eh) / math.log(dx0 / dx)
            ou = math.log(eu0 / eu) / math.log(dx0 / dx)
        rows.append([dx, eh, oh, eu, ou])
    return ["dx", "L2_h", "order_h", "L2_u", "order_u"], rows


def _table_cartesian_equiv():
    res = cartesian_equivalence_errors(200, 0.1)
    rows = [[res["max_dh"], res["max_dm"], res["l2_h"], res["steps"]]]
    return ["max_dh", "max_dm", "l2_h", "steps"], rows


_TABLES = {
    "wb1d": _table_wb1d, "wb2d": _table_wb2d, "noise1d": _table_noise1d,
    "ell2d": _table_ell2d, "conv": _table_conv,
    "cartesian-equiv": _table_cartesian_equiv,
}


def _format_cell(val):
    if isinstance(val, float):
        return "-" if math.isnan(val) else f"{val:.4e}"
    return str(val)


def _cmd_table(args) -> int:
    headers, rows = _TABLES[args.target]()
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"table_{args.target}.csv")
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(headers)
        for row in rows:
            writer.writerow([FMT % v if isinstance(v, float) else v
                             for v in row])

    text = [[_format_cell(v) for v in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in text))
              for i, h in enumerate(headers)]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    for row in text:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    print(f"wrote {csv_path}")
    return 0


# --------------------------------------------------------------------------
# mesh / list


def _cmd_mesh(args) -> int:
    parts = [float(p) for p in args.bounds.split(",")]
    if len(parts) != 4:
        return _usage_error("mesh: --bounds needs x_lo,x_hi,y_lo,y_hi")
    bounds = ((parts[0], parts[1]), (parts[2], parts[3]))
    if args.kind == "quad":
        mesh = build_quad_grid(bounds, args.nx, args.ny)
    else:
        mesh = build_voronoi(bounds, args.seeds,
                             lloyd_iters=args.lloyd_iters, seed=args.seed)
    save_mesh(mesh, args.out)
    print(f"wrote {args.out}: {mesh.n_cells} cells, d_N = {mesh.d_n:.4e}")
    return 0


def _cmd_list(_args) -> int:
    scenarios = catalog()
    width = max(len(name) for name in scenarios)
    for name in sorted(scenarios):
        sc = scenarios[name]
        print(f"{name.ljust(width)}  [{sc.dimension}D, {sc.metric.kind}]"
              f"  {sc.description}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "table": _cmd_table,
               "mesh": _cmd_mesh, "list": _cmd_list}[args.command]
    try:
        return handler(args)
    except ParseError as exc:
        return _usage_error(str(exc))
    except CovsweError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        return _usage_error(str(exc.args[0]))


if __name__ == "__main__":
    sys.exit(main())
