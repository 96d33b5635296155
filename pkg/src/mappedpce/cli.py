"""Batch command-line front end.

Subcommands: study (order sweep + rate fit to CSV), project (build and
save a surrogate), eval (evaluate a saved surrogate at points), sobol
(sensitivity CSV from a saved surrogate), export-grid (node CSV for
external solvers).  Configs are JSON; every float is printed with 17
significant digits so reruns with the same config and seed are
byte-identical.  Exit codes: 0 ok, 1 usage or bad input, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .conformal import MultivariateMap, identity_map, map_from_spec, sausage9
from .density import JointDensity, density_from_spec
from .exceptions import ConfigError, MappedPceError, NumericalError, ProjectionError
from .models import (
    RLCModel,
    interaction_toy_model,
    runge_model,
    runge_product_model,
    tabulated_from_csv,
)
from .pce import PCBasis, load_surrogate, project, save_surrogate
from .quadrature import FLOAT_FMT, export_nodes_csv, mapped_rule, tensor_rule
from .stats import write_moments_csv, write_sobol_csv
from .study import DEFAULT_RATE_WINDOW, DEFAULT_REFERENCE_NODES, run_study

_CONFIG_FIELDS = {
    "model",
    "densities",
    "maps",
    "orders",
    "order",
    "cv_samples",
    "seed",
    "rate_window",
    "reference_nodes",
    "quad_nodes",
}

_MODEL_NAMES = ("rlc", "runge", "toy", "tabulated")


class _TabulatedRequest:
    def __init__(self, path, dimension):
        self.path = path
        self.dimension = dimension


def _load_config(path):
    if path is None:
        raise ConfigError("a --config file is required for this subcommand")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    for key in doc:
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"unknown config field {key!r}")
    return doc


def _parse_orders(value):
    """Accept 'a:b' (inclusive range), 'p1,p2,...', or a JSON list."""
    if isinstance(value, str):
        if ":" in value:
            lo, _, hi = value.partition(":")
            try:
                lo, hi = int(lo), int(hi)
            except ValueError as exc:
                raise ConfigError(f"orders: bad range {value!r}") from exc
            if hi < lo:
                raise ConfigError(f"orders: empty range {value!r}")
            return list(range(lo, hi + 1))
        try:
            return [int(tok) for tok in value.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"orders: bad list {value!r}") from exc
    if isinstance(value, bool):
        raise ConfigError(f"orders: expected integers, got {value!r}")
    if isinstance(value, int):
        return [value]
    if isinstance(value, (list, tuple)):
        try:
            return [int(v) for v in value]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"orders: bad list {value!r}") from exc
    raise ConfigError(f"orders: expected 'a:b', a comma list, or a JSON list, got {value!r}")


def _model_request(cfg):
    spec = cfg.get("model")
    if spec is None:
        raise ConfigError("model: required")
    if isinstance(spec, str):
        spec = {"name": spec}
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError("model: expected a name or an object with a 'name' field")
    name = spec["name"]
    params = {k: v for k, v in spec.items() if k != "name"}
    if name == "rlc":
        allowed = {"omega", "u_e", "C", "R", "L0", "dL"}
        for k in params:
            if k not in allowed:
                raise ConfigError(f"model: unknown rlc field {k!r}")
        try:
            return RLCModel(**{k: float(v) for k, v in params.items()}).model()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model: bad rlc parameters: {exc}") from exc
    if name == "runge":
        a = params.pop("a", 6.25)
        dim = params.pop("dimension", 1)
        if params:
            raise ConfigError(f"model: unknown runge field {sorted(params)[0]!r}")
        try:
            a, dim = float(a), int(dim)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model: bad runge parameters: {exc}") from exc
        return runge_model(a) if dim == 1 else runge_product_model(a, dim)
    if name == "toy":
        if params:
            raise ConfigError(f"model: unknown toy field {sorted(params)[0]!r}")
        return interaction_toy_model()
    if name == "tabulated":
        path = params.pop("path", None)
        dim = params.pop("dimension", None)
        if params:
            raise ConfigError(f"model: unknown tabulated field {sorted(params)[0]!r}")
        if path is None or dim is None:
            raise ConfigError("model: tabulated needs 'path' and 'dimension' fields")
        return _TabulatedRequest(str(path), int(dim))
    raise ConfigError(f"model: unknown name {name!r}, expected one of {_MODEL_NAMES}")


def _density_from_config(cfg, dimension):
    spec = cfg.get("densities")
    if spec is None:
        spec = [{"kind": "uniform"}] * dimension
    if isinstance(spec, dict):
        spec = [spec]
    if not isinstance(spec, list):
        raise ConfigError("densities: expected a list of density objects")
    try:
        factors = [density_from_spec(s) for s in spec]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"densities: {exc}") from exc
    if len(factors) != dimension:
        raise ConfigError(
            f"densities: got {len(factors)} entries for a {dimension}-dimensional model"
        )
    return JointDensity(factors)


def _maps_from_config(cfg):
    entries = cfg.get("maps")
    if entries is None:
        entries = [{"map": "identity"}, {"map": "sausage9"}]
    if isinstance(entries, (str, dict)):
        entries = [entries]
    if not isinstance(entries, list):
        raise ConfigError("maps: expected a list of map entries")
    maps = {}
    for entry in entries:
        if isinstance(entry, str):
            spec, name = entry, entry
        elif isinstance(entry, dict) and "map" in entry:
            spec = entry["map"]
            name = entry.get("name") or (spec if isinstance(spec, str) else "oddpoly")
        else:
            raise ConfigError(f"maps: entry {entry!r} needs a 'map' field")
        try:
            built = map_from_spec(spec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"maps: {exc}") from exc
        if name in maps:
            raise ConfigError(f"maps: duplicate map name {name!r}")
        maps[name] = built
    return maps


def _select_map(maps, name):
    if name is None:
        return next(iter(maps.items()))
    if name in maps:
        return name, maps[name]
    if name == "identity":
        return name, identity_map()
    if name == "sausage9":
        return name, sausage9()
    raise ConfigError(f"--map: unknown map {name!r}, configured: {sorted(maps)}")


def _resolve_model(request, density, mapping, quad_nodes, context):
    if not isinstance(request, _TabulatedRequest):
        return request
    if quad_nodes is None:
        raise ConfigError(f"quad_nodes: required for tabulated models in {context}")
    rules = [mapped_rule(f, m, quad_nodes) for f, m in zip(density.factors, mapping.maps)]
    return tabulated_from_csv(request.path, tensor_rule(rules))


def _int_field(cfg, args, name, default):
    value = getattr(args, name.replace("-", "_"), None)
    if value is None:
        value = cfg.get(name, default)
    if value is None:
        return None
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected an integer, got {value!r}") from exc


def _rate_window(cfg):
    window = cfg.get("rate_window", list(DEFAULT_RATE_WINDOW))
    if (
        not isinstance(window, (list, tuple))
        or len(window) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in window)
    ):
        raise ConfigError(f"rate_window: expected [low, high], got {window!r}")
    return int(window[0]), int(window[1])


def _write_study_csv(result, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["order", "map", "e_cv", "mean_err", "std_err", "model_evals", "empirical_rate"]
        )
        for row in result.rows:
            writer.writerow(
                [
                    row.order,
                    row.map_name,
                    FLOAT_FMT % row.e_cv,
                    FLOAT_FMT % row.mean_err,
                    FLOAT_FMT % row.std_err,
                    row.model_evals,
                    FLOAT_FMT % result.rates[row.map_name],
                ]
            )


def _write_plot_data(result, path):
    names = result.map_names()
    orders = sorted({r.order for r in result.rows})
    curve = {(r.map_name, r.order): r.e_cv for r in result.rows}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["order"] + [f"e_cv_{n}" for n in names])
        for p in orders:
            writer.writerow(
                [p] + [FLOAT_FMT % curve.get((n, p), float("nan")) for n in names]
            )


def _cmd_study(args):
    cfg = _load_config(args.config)
    request = _model_request(cfg)
    dimension = request.dimension
    density = _density_from_config(cfg, dimension)
    maps = _maps_from_config(cfg)
    if args.map is not None:
        name, mapping = _select_map(maps, args.map)
        maps = {name: mapping}

    orders = _parse_orders(args.orders if args.orders is not None else cfg.get("orders", "1:20"))
    seed = _int_field(cfg, args, "seed", 0)
    cv_samples = _int_field(cfg, args, "cv_samples", 1000)
    quad_nodes = _int_field(cfg, args, "quad_nodes", None)
    reference_nodes = _int_field(cfg, args, "reference_nodes", DEFAULT_REFERENCE_NODES)
    window = _rate_window(cfg)

    if isinstance(request, _TabulatedRequest):
        if len(maps) != 1:
            raise ConfigError("maps: tabulated studies need exactly one map")
        if quad_nodes is None:
            raise ConfigError("quad_nodes: required for tabulated studies")
        if quad_nodes < max(orders) + 1:
            raise ConfigError(
                f"quad_nodes: {quad_nodes} nodes cannot project order {max(orders)}"
            )
    mapping = MultivariateMap([next(iter(maps.values()))] * dimension)
    model = _resolve_model(request, density, mapping, quad_nodes, "study")

    result = run_study(
        model,
        density,
        maps=maps,
        orders=orders,
        cv_samples=cv_samples,
        seed=seed,
        reference_nodes=reference_nodes,
        rate_window=window,
        quad_nodes=quad_nodes,
    )
    _write_study_csv(result, args.out)
    if args.plot_data:
        _write_plot_data(result, args.plot_data)
    return 0


def _single_order(cfg, args):
    if args.orders is not None:
        orders = _parse_orders(args.orders)
    elif "order" in cfg:
        orders = _parse_orders(cfg["order"])
    elif "orders" in cfg:
        orders = _parse_orders(cfg["orders"])
    else:
        raise ConfigError("order: required (one polynomial order)")
    if len(orders) != 1:
        raise ConfigError(f"order: expected exactly one order, got {orders}")
    return orders[0]


def _cmd_project(args):
    cfg = _load_config(args.config)
    request = _model_request(cfg)
    density = _density_from_config(cfg, request.dimension)
    name, map_1d = _select_map(_maps_from_config(cfg), args.map)
    mapping = MultivariateMap([map_1d] * request.dimension)
    order = _single_order(cfg, args)
    quad_nodes = _int_field(cfg, args, "quad_nodes", None)
    model = _resolve_model(request, density, mapping, quad_nodes, "project")
    basis = PCBasis(density, order, mapping)
    surrogate = project(model, basis, quad_nodes)
    surrogate.metadata["map"] = name
    save_surrogate(surrogate, args.out)
    return 0


def _read_points(stream, dimension):
    points = []
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = [t for t in line.replace(",", " ").split() if t]
        try:
            row = [float(t) for t in tokens]
        except ValueError:
            if lineno == 1:
                continue
            raise ConfigError(f"points line {lineno}: not numeric: {line!r}") from None
        if len(row) != dimension:
            raise ConfigError(
                f"points line {lineno}: expected {dimension} coordinates, got {len(row)}"
            )
        points.append(row)
    if not points:
        raise ConfigError("no input points given")
    return np.asarray(points, dtype=np.float64)


def _cmd_eval(args):
    surrogate = load_surrogate(args.surrogate)
    if args.points:
        with open(args.points) as fh:
            points = _read_points(fh, surrogate.dimension)
    else:
        points = _read_points(sys.stdin, surrogate.dimension)
    values = surrogate.evaluate(points)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(
            [f"y{d + 1}" for d in range(surrogate.dimension)] + ["value_real", "value_imag"]
        )
        for point, value in zip(points, values):
            writer.writerow(
                [FLOAT_FMT % c for c in point]
                + [FLOAT_FMT % value.real, FLOAT_FMT % value.imag]
            )
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_sobol(args):
    surrogate = load_surrogate(args.surrogate)
    write_sobol_csv(surrogate, args.out)
    if args.moments:
        write_moments_csv(surrogate, args.moments)
    return 0


def _cmd_export_grid(args):
    cfg = _load_config(args.config)
    request = _model_request(cfg) if "model" in cfg else None
    if request is not None:
        dimension = request.dimension
    elif isinstance(cfg.get("densities"), list):
        dimension = len(cfg["densities"])
    else:
        raise ConfigError("densities: a list is required to size the grid")
    density = _density_from_config(cfg, dimension)
    _, map_1d = _select_map(_maps_from_config(cfg), args.map)
    quad_nodes = _int_field(cfg, args, "quad_nodes", None)
    if quad_nodes is None:
        raise ConfigError("quad_nodes: required for export-grid")
    rules = [mapped_rule(f, map_1d, quad_nodes) for f in density.factors]
    export_nodes_csv(tensor_rule(rules), args.out)
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 for usage errors; this front end
    reserves 2 for numerical failures, so usage errors exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _build_parser():
    parser = _Parser(prog="mappedpce", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="JSON config file")
        p.add_argument("--map", help="use only this named map")
        p.add_argument("--quad-nodes", type=int, help="quadrature nodes per dimension")

    p = sub.add_parser("study", help="run the order sweep and write the study CSV")
    common(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, help="validation sampling seed")
    p.add_argument("--orders", help="orders as 'a:b' or 'p1,p2,...'")
    p.add_argument("--cv-samples", type=int, help="validation sample count")
    p.add_argument("--plot-data", help="also write per-curve x/y columns to this CSV")
    p.set_defaults(func=_cmd_study)

    p = sub.add_parser("project", help="build a surrogate and save it as JSON")
    common(p)
    p.add_argument("--out", required=True, help="output surrogate path")
    p.add_argument("--orders", help="the (single) polynomial order")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("eval", help="evaluate a saved surrogate at points")
    p.add_argument("--surrogate", required=True, help="surrogate JSON path")
    p.add_argument("--points", help="CSV/whitespace point file (default: stdin)")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sobol", help="write sensitivity indices of a saved surrogate")
    p.add_argument("--surrogate", required=True, help="surrogate JSON path")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--moments", help="also write a moments CSV here")
    p.set_defaults(func=_cmd_sobol)

    p = sub.add_parser("export-grid", help="write the tensor quadrature grid as CSV")
    common(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_export_grid)

    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NumericalError, ProjectionError) as exc:
        print(f"mappedpce: numerical error: {exc}", file=sys.stderr)
        return 2
    except (MappedPceError, ValueError, OSError) as exc:
        print(f"mappedpce: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
