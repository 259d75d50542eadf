"""Command-line interface.

Subcommands map one-to-one onto the library modules:

* ``jfunc``      angle-sum values J_{n,k}(beta), beta possibly "inf"
* ``formulas``   closed forms (face-intensity | volume | intrinsic | f-vector | limits)
* ``tables``     reference tables of volumes (1) and f-vectors (2) as CSV
* ``limits``     high-dimensional limit values
* ``section``    the beta model equivalent to a planar section
* ``simulate``   marked point samples as JSON
* ``render``     SVG of a stored 2D diagram (or simulate-and-render)
* ``mc``         Monte-Carlo verification (verify-volume | verify-section |
                 verify-gaussian | limits), driven by a JSON config

Stochastic subcommands are reproducible from (config, seed); whenever an
``--out`` path is given, the resolved configuration is written next to it as
``<out>.config.json``.  Failures print a machine-readable JSON object on
stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import formulas, jfunc, montecarlo, serialize
from .laguerre import build_diagram
from .models import SectionSpec, model_from_dict, model_to_dict, sectional_model
from .pointprocess import default_window, make_rng, sample_model
from .render import RenderStyle, render_svg

__all__ = ["main", "dispatch"]


class CliError(Exception):
    def __init__(self, message, kind="usage"):
        super().__init__(message)
        self.kind = kind


def _default_threads() -> int:
    return int(os.environ.get("SECTVORO_THREADS", "1"))


def _emit(doc, out_path, resolved_config=None):
    text = serialize.dump_json(doc)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
        if resolved_config is not None:
            serialize.dump_json(resolved_config, out_path + ".config.json")
    else:
        print(text)


def _parse_beta(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _cmd_jfunc(args):
    cfg = jfunc.QuadratureConfig(rel_tol=args.rel_tol) if args.rel_tol else None
    res = jfunc.j_value_info(args.n, args.k, _parse_beta(args.beta), cfg)
    _emit({"n": args.n, "k": args.k, "beta": args.beta, "value": res.value,
           "error_estimate": res.error_estimate, "im_residual": res.im_residual},
          args.out)
    return 0


def _cmd_formulas(args):
    d, l, j, k, rho = args.d, args.l, args.j, args.k, args.rho
    which = args.which
    out: dict = {"which": which, "rho": rho}
    used = {}
    if which == "face-intensity":
        out.update(d=d, l=l, j=j, value=formulas.face_intensity(d, l, j, rho))
        used[f"J_{l+1},{l-j+1}"] = jfunc.j_value(l + 1, l - j + 1, (d - l - 1) / 2.0)
    elif which == "volume":
        out.update(d=d, l=l, value=formulas.expected_cell_volume(d, l, rho))
        used[f"J_{l+1},1"] = jfunc.j_value(l + 1, 1, (d - l - 1) / 2.0)
    elif which == "intrinsic":
        out.update(d=d, l=l, k=k, j=j,
                   value=formulas.expected_intrinsic_volume(d, l, k, j, rho))
    elif which == "f-vector":
        out.update(d=d, l=l, k=k, j=j, value=formulas.expected_f_vector(d, l, k, j))
    elif which == "limits":
        out.update(l=l, kappa=args.kappa, lam=args.lam)
        if args.lam is not None:
            out["value"] = formulas.gaussian_cell_volume(l, args.lam)
        elif j is not None:
            out["value"] = formulas.limit_face_intensity(l, j, args.kappa)
        else:
            out["value"] = formulas.limit_cell_volume(l, args.kappa)
    out["components"] = {"j_values_used": used}
    out["error_estimate"] = 1e-10
    _emit(out, args.out)
    return 0


def _cmd_tables(args):
    rows = formulas.table1_rows(args.rho) if args.which == 1 else formulas.table2_rows()
    cols = list(rows[0].keys())
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c])
                              for c in cols))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_limits(args):
    doc = {
        "l": args.l,
        "kappa": args.kappa,
        "limit_cell_volume": formulas.limit_cell_volume(args.l, args.kappa),
        "limit_face_intensities": {
            str(j): formulas.limit_face_intensity(args.l, j, args.kappa)
            for j in range(args.l + 1)
        },
    }
    _emit(doc, args.out)
    return 0


def _cmd_section(args):
    spec = SectionSpec(ambient_d=args.d, section_l=args.l, rho=args.rho)
    model = sectional_model(spec)
    _emit({"ambient_d": args.d, "section_l": args.l, "rho": args.rho,
           "model": model_to_dict(model)}, args.out)
    return 0


def _window_from_args(model, args):
    if args.radius and args.height_cap:
        from .pointprocess import SimulationWindow

        return SimulationWindow(r_obs=args.radius, r_margin=args.margin or 2.0,
                                t_cap=args.height_cap, seed=args.seed)
    win = default_window(model, r_obs=args.radius or 8.0, seed=args.seed)
    return win


def _cmd_simulate(args):
    model = model_from_dict(json.loads(args.model))
    window = _window_from_args(model, args)
    pts = sample_model(model, window, make_rng(window.seed))
    doc = serialize.points_to_dict(pts, model=model, window=window)
    cfg = {"model": model_to_dict(model), "window": serialize.window_to_dict(window)}
    _emit(doc, args.out, resolved_config=cfg)
    return 0


def _cmd_render(args):
    style = RenderStyle(color_mode=args.color_mode, viewport=args.viewport)
    if args.points:
        pts, model, window = serialize.points_from_dict(serialize.load_json(args.points))
        if window is None:
            raise CliError("points file lacks window metadata", kind="validation")
        diag = build_diagram(pts, window)
    elif args.model:
        model = model_from_dict(json.loads(args.model))
        window = _window_from_args(model, args)
        pts = sample_model(model, window, make_rng(window.seed))
        diag = build_diagram(pts, window)
    else:
        raise CliError("render needs --points or --model", kind="usage")
    svg = render_svg(diag, style)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(svg)
    else:
        sys.stdout.write(svg)
    return 0


def _load_run_config(path) -> dict:
    cfg = serialize.load_json(path)
    if not isinstance(cfg, dict):
        raise CliError("run config must be a JSON object", kind="validation")
    return cfg


def _cmd_mc(args):
    cfg = _load_run_config(args.config)
    seed = int(cfg.get("seed", 0))
    threads = int(cfg.get("threads", args.threads))
    window = serialize.window_from_dict(cfg["window"]) if "window" in cfg else None

    if args.task == "verify-volume":
        spec = _spec_from_cfg(cfg)
        sample, reports = montecarlo.estimate_typical_cell(
            spec, window=window, min_cells=int(cfg.get("min_cells", 2000)),
            seed=seed, threads=threads,
            validation_runs=int(cfg.get("validation_runs", 0)))
    elif args.task == "verify-section":
        spec = SectionSpec(ambient_d=int(cfg["d"]), section_l=int(cfg["l"]),
                           rho=float(cfg.get("rho", 1.0)))
        reports = montecarlo.verify_sectional_law(
            spec, window=window, n_cells=int(cfg.get("n_cells", 5000)), seed=seed,
            threads=threads, negative_control=bool(cfg.get("negative_control", False)))
    elif args.task == "verify-gaussian":
        reports = montecarlo.verify_gaussian_section(
            lam=float(cfg["lambda"]), l=int(cfg["l"]), l_ambient=int(cfg["l_ambient"]),
            window=window, n_cells=int(cfg.get("n_cells", 3000)), seed=seed,
            threads=threads)
    elif args.task == "limits":
        diag = montecarlo.convergence_diagnostics(
            l=int(cfg.get("l", 2)), kappa=float(cfg.get("kappa", 1.0)),
            d_list=cfg.get("d_list", [100, 1000, 10000]))
        if cfg.get("ks_d"):
            rep = montecarlo.verify_gaussian_limit(
                l=int(cfg.get("l", 2)), d=int(cfg["ks_d"]),
                n_cells=int(cfg.get("n_cells", 2000)), seed=seed, threads=threads)
            diag["ks_report"] = serialize.report_to_dict(rep)
        _emit(diag, args.out, resolved_config=cfg)
        return 0
    else:  # pragma: no cover
        raise CliError(f"unknown mc task {args.task!r}")

    doc = {"reports": [serialize.report_to_dict(r) for r in reports]}
    _emit(doc, args.out, resolved_config=cfg)
    if args.out and args.csv:
        serialize.reports_to_csv(reports, args.csv)
    return 0 if all(r.passed for r in reports) else 3


def _spec_from_cfg(cfg: dict):
    if "section" in cfg:
        s = cfg["section"]
        return SectionSpec(ambient_d=int(s["d"]), section_l=int(s["l"]),
                           rho=float(s.get("rho", 1.0)))
    return model_from_dict(cfg["model"])


def dispatch(argv) -> int:
    parser = argparse.ArgumentParser(
        prog="sectvoro",
        description="Sectional Poisson-Voronoi / beta-Voronoi tessellation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jfunc", help="angle-sum value J_{n,k}(beta)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--beta", type=str, required=True, help="number or 'inf'")
    p.add_argument("--rel-tol", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_jfunc)

    p = sub.add_parser("formulas", help="closed-form characteristics")
    p.add_argument("which", choices=["face-intensity", "volume", "intrinsic",
                                     "f-vector", "limits"])
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--j", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_formulas)

    p = sub.add_parser("tables", help="reference tables as CSV")
    p.add_argument("--which", type=int, choices=[1, 2], required=True)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_tables)

    p = sub.add_parser("limits", help="high-dimensional limit values")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_limits)

    p = sub.add_parser("section", help="beta model of a planar section")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_section)

    p = sub.add_parser("simulate", help="sample marked points")
    p.add_argument("--model", required=True, help="model JSON, e.g. "
                   '\'{"model":"beta","d":2,"beta":5,"gamma":1}\'')
    p.add_argument("--radius", type=float, default=None, help="observation radius")
    p.add_argument("--margin", type=float, default=None)
    p.add_argument("--height-cap", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("render", help="render a 2D diagram as SVG")
    p.add_argument("--points", default=None, help="points JSON file")
    p.add_argument("--model", default=None, help="model JSON (simulate first)")
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--margin", type=float, default=None)
    p.add_argument("--height-cap", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--color-mode", choices=["uniform", "by-height"], default="uniform")
    p.add_argument("--viewport", type=float, default=10.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("mc", help="Monte-Carlo verification runs")
    p.add_argument("task", choices=["verify-volume", "verify-section",
                                    "verify-gaussian", "limits"])
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(func=_cmd_mc)

    args = parser.parse_args(argv)
    return args.func(args)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return dispatch(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except CliError as e:
        print(json.dumps({"error": {"kind": e.kind, "message": str(e)}}),
              file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, RuntimeError) as e:
        print(json.dumps({"error": {"kind": type(e).__name__, "message": str(e)}}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
