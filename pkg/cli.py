import argparse
import json
import logging
import os
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

from compiler.compile import compile_ball_cover, compile_convex, compile_union
from compiler.gates import GateParams, margin_params
from compiler.least_squares import fit_accuracy_outside_bands, get_target, list_targets, ls_initializer_1d
from dataset_utils.datasets import Dataset
from errors import CliUsageError, InvalidInputError, TropInitError
from experiments.config import CASES, config_to_dict, load_experiment_config
from experiments.rendering import DecisionMap, render_decision_map
from experiments.runner import run_experiment
from geometry.box import Box
from geometry.covers import BallCover
from geometry.facets import ConvexComponent, ball_polytope, polygon_facets
from metrics import evaluate
from model.network_spec import FORMAT_VERSION, NetworkSpec
from model.sigmoid_mlp import bce_loss, forward
from model.training import EarlyStopConfig, TrainConfig, train
from tropical.curve import duality_report, rasterize_curve, tropical_curve
from tropical.polynomial import TropicalPolynomial, random_polynomial, trop_eval
from tropical.subdivision import dual_subdivision

log = logging.getLogger("tropinit")


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of printing usage and exiting with status 2."""
    def error(self, message):
        raise CliUsageError(message)


# -----------------------
# -        io           -
# -----------------------
def _input(path: str) -> str:
    if not os.path.isfile(path):
        raise InvalidInputError(f"input file {path} does not exist")
    return path


def _output(path: Optional[str]) -> Optional[str]:
    if path is None:
        return None
    parent = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(parent, exist_ok=True)
    except OSError as e:
        raise InvalidInputError(f"cannot create output directory {parent}: {e}") from e
    return path


def _read_json(path: str):
    with open(_input(path)) as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"{path} is not valid JSON: {e}") from e


def _emit(payload: dict, out: Optional[str] = None) -> None:
    payload = dict({"format_version": FORMAT_VERSION}, **payload)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out is None:
        print(text)
    else:
        with open(out, "w") as f:
            f.write(text + "\n")


def _window(values: List[float], dim: int = 2) -> Box:
    return Box.square(values[0], values[1], dim)


def load_component(data: dict) -> ConvexComponent:
    """A component given by polygon vertices, by facets (u, h) or by a ball (center, radius, m)."""
    if "vertices" in data:
        return polygon_facets(data["vertices"])
    if "u" in data:
        return ConvexComponent.from_dict(data)
    if "center" in data:
        return ball_polytope(data["center"], float(data["radius"]), int(data["m"]), seed=int(data.get("seed", 0)))
    raise InvalidInputError("a component needs 'vertices', facets 'u'/'h' or a ball 'center'/'radius'/'m'")


def _gate_params(args, max_facets: int, components: int) -> GateParams:
    defaults = margin_params(max_facets, components, kappa=args.kappa)
    return GateParams(kappa=defaults.kappa,
                      lam=args.lam if args.lam is not None else defaults.lam,
                      eta=args.eta if args.eta is not None else defaults.eta,
                      delta=args.delta if args.delta is not None else defaults.delta)


# -----------------------
# -        trop         -
# -----------------------
def cmd_trop(args) -> int:
    if args.verb == "duality-check" and args.random is not None:
        rng = np.random.default_rng(args.seed)
        polys = [random_polynomial(rng) for _ in range(args.random)]
    else:
        if args.input is None:
            raise CliUsageError(f"trop {args.verb} needs --in")
        polys = [TropicalPolynomial.from_dict(_read_json(args.input))]
    poly = polys[0]

    if args.verb == "eval":
        if args.x is None:
            raise CliUsageError("trop eval needs --x")
        _emit({"value": trop_eval(poly, args.x)})
    elif args.verb == "curve":
        curve = tropical_curve(poly)
        _emit({"vertices": curve.vertices.tolist(),
               "edges": [{"monomials": [e.i, e.j], "point": list(e.point), "direction": list(e.direction),
                          "t_min": e.t_min if np.isfinite(e.t_min) else None,
                          "t_max": e.t_max if np.isfinite(e.t_max) else None} for e in curve.edges]})
    elif args.verb == "dual":
        sub = dual_subdivision(poly)
        if args.ppm is not None:
            raster = rasterize_curve(poly, _window(args.window), args.grid)
            DecisionMap(np.where(raster, 0.0, 1.0), _window(args.window)).write_ppm(_output(args.ppm))
        if args.edges_csv is not None:
            edges = pd.DataFrame([[e, a[0], a[1], b[0], b[1]] for e, (a, b) in enumerate(sub.edges)],
                                 columns=["segment", "x0", "y0", "x1", "y1"])
            edges.to_csv(_output(args.edges_csv), index=False)
        _emit({"cells": [c.tolist() for c in sub.cells], "support": sub.support.tolist(),
               "interior_edges": sub.interior_edge_count, "boundary_edges": sub.boundary_edge_count,
               "used_points": sub.used_point_count, "degenerate": sub.degenerate})
    else:
        reports = [duality_report(p, _window(args.window), args.grid) for p in polys]
        mismatches = sum(not r.matches for r in reports)
        _emit({"checked": len(reports), "mismatches": mismatches,
               "reports": [r.to_dict() for r in reports] if len(reports) == 1 else []})
    return 0


# -----------------------
# -       compile       -
# -----------------------
def cmd_compile(args) -> int:
    if args.kind == "ls1d":
        return _compile_ls1d(args)
    if args.input is None:
        raise CliUsageError(f"compile {args.kind} needs --in")
    data = _read_json(args.input)

    if args.kind == "convex":
        if args.kappa is None:
            raise CliUsageError("compile convex needs --kappa")
        spec = compile_convex(load_component(data), args.kappa)
    elif args.kind == "union":
        comps = [load_component(c) for c in data.get("components", [])]
        if not comps:
            raise InvalidInputError("union input has no 'components'")
        if args.kappa is None:
            raise CliUsageError("compile union needs --kappa")
        params = _gate_params(args, max(len(c) for c in comps), len(comps))
        spec = compile_union(comps, params, head_scale=args.head_scale, enforce_bounds=not args.no_enforce)
    else:
        if args.eps_poly is None:
            raise CliUsageError("compile cover needs --eps-poly")
        cover = BallCover.from_dict(data)
        params = None
        if any(v is not None for v in (args.kappa, args.lam, args.eta, args.delta)):
            params = _gate_params(args, args.sides or 3, len(cover))
        spec = compile_ball_cover(cover, args.eps_poly, params, sides=args.sides, head_scale=args.head_scale,
                                  enforce_bounds=not args.no_enforce)
    spec.save(_output(args.out))
    return 0


def _compile_ls1d(args) -> int:
    if args.target is not None:
        target = get_target(args.target)
        xs = np.linspace(target.domain[0], target.domain[1], args.n)
        ys = target(xs)
        centers = args.centers or list(target.centers)
        k = args.k or target.k
    elif args.data is not None:
        df = pd.read_csv(_input(args.data))
        if not {"x", "y"} <= set(df.columns):
            raise InvalidInputError("ls1d data needs columns x,y")
        xs, ys = df["x"].to_numpy(), df["y"].to_numpy()
        if not args.centers or args.k is None:
            raise CliUsageError("ls1d on custom data needs --centers and --k")
        target, centers, k = None, args.centers, args.k
    else:
        raise CliUsageError(f"compile ls1d needs --target ({', '.join(list_targets())}) or --data")

    alpha, spec = ls_initializer_1d(xs, ys, centers, k)
    spec.save(_output(args.out))
    payload = {"alpha": alpha.tolist()}
    if target is not None:
        accuracy, evaluated = fit_accuracy_outside_bands(spec, target, xs)
        payload.update({"target": target.name, "accuracy": accuracy, "evaluated": evaluated})
    _emit(payload)
    return 0


# -----------------------
# -    train / eval     -
# -----------------------
def cmd_train(args) -> int:
    spec = NetworkSpec.load(_input(args.spec))
    data = Dataset.from_csv(_input(args.data))
    early = EarlyStopConfig(args.patience, args.min_delta) if args.patience is not None else None
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch, learning_rate=args.lr, seed=args.seed,
                      early_stop=early)
    out, curve_path = _output(args.out), _output(args.curve)
    trained, curve = train(spec, data, cfg)
    trained.save(out)
    if curve_path is not None:
        curve.to_csv(curve_path)
    return 0


def cmd_eval(args) -> int:
    spec = NetworkSpec.load(_input(args.spec))
    labeled = "y" in pd.read_csv(_input(args.data), nrows=0).columns
    data = Dataset.from_csv(args.data)
    logits, probs = map(np.atleast_1d, forward(spec, data.x))
    if args.out is not None:
        pd.DataFrame({"logit": logits, "prob": probs, "decision": (probs >= args.tau).astype(int)}) \
            .to_csv(_output(args.out), index=False)
    payload = {"n": len(data)}
    if labeled:
        payload["metrics"] = evaluate(probs, data.y, args.tau, bce=float(bce_loss(probs, data.y))).to_dict()
    _emit(payload)
    return 0


def cmd_render(args) -> int:
    spec = NetworkSpec.load(_input(args.spec))
    dmap = render_decision_map(spec, _window(args.window), args.grid, args.tau)
    if args.ppm is not None:
        dmap.write_ppm(_output(args.ppm))
    if args.contour is not None:
        dmap.write_contour_csv(_output(args.contour))
    return 0


def cmd_experiment(args) -> int:
    cfg = load_experiment_config(args.config, case=args.case, seed=args.seed)
    outdir = args.outdir
    os.makedirs(outdir, exist_ok=True)
    result = run_experiment(cfg, outdir)
    print(result.summary().to_string(index=False))
    return 0


COMMANDS = {"trop": cmd_trop, "compile": cmd_compile, "train": cmd_train, "eval": cmd_eval,
            "render": cmd_render, "experiment": cmd_experiment}


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--print-config", action="store_true", help="dump the parsed flags as JSON and exit")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = ArgumentParser(prog="tropinit", description="Compile geometric regions into sigmoidal networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    trop = sub.add_parser("trop", parents=[common], help="tropical polynomials")
    trop.add_argument("verb", choices=["eval", "curve", "dual", "duality-check"])
    trop.add_argument("--in", dest="input")
    trop.add_argument("--x", type=float, nargs="+")
    trop.add_argument("--window", type=float, nargs=2, default=[-5.0, 5.0])
    trop.add_argument("--grid", type=int, default=256)
    trop.add_argument("--ppm")
    trop.add_argument("--edges-csv")
    trop.add_argument("--random", type=int, help="check this many random polynomials")
    trop.add_argument("--seed", type=int, default=0)

    comp = sub.add_parser("compile", parents=[common], help="compile regions into networks")
    comp.add_argument("kind", choices=["convex", "union", "cover", "ls1d"])
    comp.add_argument("--in", dest="input")
    comp.add_argument("--out", required=True)
    comp.add_argument("--kappa", type=float)
    comp.add_argument("--lambda", dest="lam", type=float)
    comp.add_argument("--eta", type=float)
    comp.add_argument("--delta", type=float)
    comp.add_argument("--eps-poly", type=float)
    comp.add_argument("--sides", type=int)
    comp.add_argument("--head-scale", type=float)
    comp.add_argument("--no-enforce", action="store_true", help="warn instead of failing on tolerance bounds")
    comp.add_argument("--target", choices=list_targets())
    comp.add_argument("--data")
    comp.add_argument("--centers", type=float, nargs="+")
    comp.add_argument("--k", type=float)
    comp.add_argument("--n", type=int, default=2000)

    tr = sub.add_parser("train", parents=[common], help="train a network with BCE + Adam")
    tr.add_argument("--spec", required=True)
    tr.add_argument("--data", required=True)
    tr.add_argument("--epochs", type=int, default=80)
    tr.add_argument("--batch", type=int, default=512)
    tr.add_argument("--lr", type=float, default=3e-3)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--patience", type=int)
    tr.add_argument("--min-delta", type=float, default=1e-4)
    tr.add_argument("--out", required=True)
    tr.add_argument("--curve")

    ev = sub.add_parser("eval", parents=[common], help="evaluate a network on labeled points")
    ev.add_argument("--spec", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--tau", type=float, default=0.5)
    ev.add_argument("--out")

    rd = sub.add_parser("render", parents=[common], help="decision map and contour of a planar network")
    rd.add_argument("--spec", required=True)
    rd.add_argument("--window", type=float, nargs=2, default=[-2.0, 2.0])
    rd.add_argument("--grid", type=int, default=200)
    rd.add_argument("--tau", type=float, default=0.5)
    rd.add_argument("--ppm")
    rd.add_argument("--contour")

    ex = sub.add_parser("experiment", parents=[common], help="run the initialization experiments")
    ex.add_argument("--case", choices=list(CASES))
    ex.add_argument("--config")
    ex.add_argument("--seed", type=int)
    ex.add_argument("--outdir", default="results")
    return parser


def _print_config(args) -> None:
    flags = {k: v for k, v in vars(args).items() if k not in ("print_config", "verbose")}
    if args.command == "experiment":
        flags["experiment"] = config_to_dict(load_experiment_config(args.config, case=args.case, seed=args.seed))
    _emit({"flags": flags})


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except TropInitError as e:
        print(f"ERROR {e.code}: {e}", file=sys.stderr)
        return e.exit_status

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.print_config:
            _print_config(args)
            return 0
        return COMMANDS[args.command](args)
    except TropInitError as e:
        print(f"ERROR {e.code}: {e}", file=sys.stderr)
        return e.exit_status
    except OSError as e:
        print(f"ERROR {InvalidInputError.code}: {e}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
