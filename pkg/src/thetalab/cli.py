"""Command-line entry point.

Every subcommand takes its parameters either as flags or from a JSON file
given with ``--config`` (the keys are the flag names with underscores), not
both.  Output is JSON by default, or CSV with ``--format csv``; both carry
the schema version, the resolved configuration, the seed and the package
version.  Nothing time- or machine-dependent is written, so equal
configurations give byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 budget exceeded (partial
results are written), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .covergraph import (
    classify_amenability,
    expansion_exact,
    folner_profile,
    graph_family,
    schreier_from_hom,
    cayley_graph,
)
from .fuchsian import DEFAULT_WORD_CAP, BudgetExceeded, load_group, systole_upper_bound
from .qdiff import (
    QuadraticDifferential,
    QuadratureGrid,
    estimate_theta_norm,
    theta_ratio,
    unfold,
)
from .torusmodel import (
    Scenario,
    affine_coeffs,
    contraction_estimate,
    teich_distance,
)
from .moebius import linear_dilatation

SCHEMA_VERSION = "1"

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# -- value parsers -------------------------------------------------------------

def parse_complex(text) -> complex:
    """'re,im' (or a [re, im] pair from JSON) to a complex number."""
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise ConfigError(f"complex value needs two entries, got {text!r}")
        return complex(float(text[0]), float(text[1]))
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ConfigError(f"complex value must be 're,im', got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def parse_json(text):
    if isinstance(text, (dict, list)):
        return text
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON {text!r}: {exc}") from None


def parse_opt_int(text):
    if text is None or text == "auto":
        return None
    return int(text)


# name -> (parser, default, help)
COMMON_GROUP = {
    "group": (str, None, "preset name, preset:<name>, or group-spec JSON file"),
}
GRID = {
    "grid": (int, 512, "quadrature cells per direction (radial and angular)"),
    "rho": (float, 1.0 - 1e-4, "outer radius of the uniform rings"),
    "cap": (int, DEFAULT_WORD_CAP, "maximum number of group words"),
}
GRAPH = {
    "family": (str, None, "line, tree, cayley or schreier"),
    "degree": (int, 3, "tree degree"),
    "rank": (int, 2, "free group rank for cayley graphs"),
    "hom": (parse_json, None, 'schreier hom spec, e.g. {"images": [[1], [0]]}, optional "modulus"'),
}

SCHEMAS = {
    "theta-ratio": {
        **COMMON_GROUP,
        "phi": (str, "1", "polynomial: 1, z, z^k, or a comma list of coefficients"),
        "N": (parse_opt_int, None, "word length; omitted means the shell stopping rule"),
        **GRID,
    },
    "theta-norm-estimate": {
        **COMMON_GROUP,
        "max_degree": (int, 6, "largest monomial degree of the witness"),
        "budget": (int, 200, "number of random restarts"),
        "N": (parse_opt_int, None, "word length; omitted means the shell stopping rule"),
        **GRID,
    },
    "unfold-check": {
        **COMMON_GROUP,
        "phi": (str, "1", "polynomial differential"),
        "N": (parse_opt_int, None, "word length; omitted means the shell stopping rule"),
        **GRID,
    },
    "systole": {
        **COMMON_GROUP,
        "N": (int, 3, "maximum word length searched"),
        "cap": (int, DEFAULT_WORD_CAP, "maximum number of group words"),
    },
    "expansion": {
        **GRAPH,
        "ball_radius": (int, 3, "search inside this ball about the root"),
        "max_subset_size": (int, 8, "largest subset searched"),
        "cap": (int, 5_000_000, "maximum number of subsets"),
    },
    "folner": {
        **GRAPH,
        "radius": (int, 8, "largest ball radius"),
        "window": (parse_opt_int, None, "tail length used by the amenability fit"),
    },
    "schreier": {
        "hom": (parse_json, None, 'hom spec {"images": [...], "modulus": n} or "trivial"'),
        "rank": (int, 2, "rank for the trivial subgroup"),
        "radius": (int, 8, "Folner profile radius"),
        "window": (parse_opt_int, None, "tail length used by the amenability fit"),
    },
    "torus-distance": {
        "tau1": (parse_complex, None, "first point as re,im"),
        "tau2": (parse_complex, None, "second point as re,im"),
    },
    "iterate": {
        "maps": (parse_json, None, 'JSON list of {"kind": ..., "params": {...}}'),
        "y0": (parse_complex, complex(0, 1), "starting point as re,im"),
        "max_n": (int, 10_000, "iteration budget"),
        "tol": (float, 1e-6, "convergence threshold on step distance"),
        "pinch_threshold": (float, 1e3, "Im tau above which the orbit counts as pinching"),
    },
}

REQUIRED = {
    "theta-ratio": ("group",), "theta-norm-estimate": ("group",), "unfold-check": ("group",),
    "systole": ("group",), "expansion": ("family",), "folner": ("family",), "schreier": ("hom",),
    "torus-distance": ("tau1", "tau2"), "iterate": ("maps",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thetalab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with the parameters (excludes parameter flags)")
        p.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
        p.add_argument("--threads", type=int, default=None, help="cap on worker threads")
        p.add_argument("--output", "-o", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        for key, (_, _, help_text) in schema.items():
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, dest=key, default=argparse.SUPPRESS, help=help_text)
    return parser


def resolve_config(command: str, ns: argparse.Namespace) -> tuple:
    """(params, seed) from flags or the config file, with defaults filled in."""
    schema = SCHEMAS[command]
    given = {k: getattr(ns, k) for k in schema if hasattr(ns, k)}
    seed = ns.seed
    if ns.config:
        if given:
            raise ConfigError(f"--config excludes parameter flags; got {sorted(given)}")
        try:
            with open(ns.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "seed" in raw:
            if seed is not None:
                raise ConfigError("seed given both in --config and as a flag")
            seed = raw.pop("seed")
        unknown = sorted(set(raw) - set(schema))
        if unknown:
            raise ConfigError(f"unknown keys for {command}: {unknown}; allowed: {sorted(schema)}")
        given = raw
    params = {}
    for key, (parse, default, _) in schema.items():
        if key in given and given[key] is not None:
            try:
                params[key] = parse(given[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
        else:
            params[key] = default
    missing = [k for k in REQUIRED[command] if params.get(k) is None]
    if missing:
        raise ConfigError(f"{command} requires {missing}")
    return params, int(seed if seed is not None else 0)


# -- JSON encoding ----------------------------------------------------------------

def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(to_jsonable(v) for v in x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


# -- subcommands ------------------------------------------------------------------
# each returns (result dict, csv header, csv rows)

def _grid(p) -> QuadratureGrid:
    if p["grid"] < 2:
        raise ConfigError("grid must be >= 2")
    return QuadratureGrid(p["grid"], p["grid"], p["rho"])


def _group(p):
    try:
        return load_group(p["group"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _phi(p) -> QuadraticDifferential:
    try:
        return QuadraticDifferential.parse(p["phi"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_theta_ratio(p, seed):
    G, phi, grid = _group(p), _phi(p), _grid(p)
    if phi.is_zero():
        raise ConfigError("phi = 0: ratio undefined")
    r = theta_ratio(G, phi, p["N"], grid, p["cap"])
    res = r.as_dict()
    header = ["N", "ratio", "error_quadrature", "error_truncation"]
    return res, header, [[r.N, r.ratio, r.error_quadrature, r.error_truncation]]


def _systole_or_none(G):
    if G.rank == 0:
        return None
    try:
        return systole_upper_bound(G, 3)
    except ValueError:
        return None


def cmd_theta_norm_estimate(p, seed):
    G, grid = _group(p), _grid(p)
    if p["budget"] < 1:
        raise ConfigError("budget must be positive")
    e = estimate_theta_norm(G, p["max_degree"], p["budget"], p["N"], grid, seed, p["cap"])
    res = e.as_dict()
    res["systole_upper_bound"] = _systole_or_none(G)
    header = ["L_hat", "ratio", "error_quadrature", "error_truncation", "N"]
    return res, header, [[res["systole_upper_bound"], e.lower_bound, e.error_quadrature,
                          e.error_truncation, e.N]]


def cmd_unfold_check(p, seed):
    G, phi, grid = _group(p), _phi(p), _grid(p)
    u = unfold(G, phi, p["N"], grid, p["cap"])
    masses = u.unfolded_masses
    l1 = u.l1.value
    monotone = all(b >= a for a, b in zip(masses, masses[1:]))
    res = {
        "N": u.N,
        "stop_reason": u.stop_reason,
        "shell_masses": u.shell_masses,
        "unfolded_masses": masses,
        "unfolded_mass": u.unfolded_mass,
        "unfolded_error": u.unfolded_error,
        "quotient_norms": u.quotient_norms,
        "disk_norm": l1,
        "error_quadrature": u.l1.error + abs(math.fsum(u.shell_masses) - math.fsum(u.shell_masses_coarse)),
        "error_truncation": u.shell_masses[-1] / l1 if u.N > 0 else 0.0,
        "fraction_of_disk_norm": u.unfolded_mass / l1,
        "monotone": monotone,
    }
    header = ["N", "shell_mass", "unfolded_mass", "quotient_norm"]
    rows = zip(u.shell_masses, masses, u.quotient_norms)
    return res, header, [[n, s, m, q] for n, (s, m, q) in enumerate(rows)]


def cmd_systole(p, seed):
    G = _group(p)
    L = systole_upper_bound(G, p["N"], p["cap"])
    res = {"systole_upper_bound": L, "N": p["N"], "note": "upper bound for the shortest geodesic length"}
    return res, ["N", "systole_upper_bound"], [[p["N"], L]]


def _graph(p):
    try:
        return graph_family(p["family"], p["degree"], p["rank"], p["hom"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def cmd_expansion(p, seed):
    G = _graph(p)
    r = expansion_exact(G, p["ball_radius"], p["max_subset_size"], p["cap"])
    res = {
        "ratio": r.ratio, "ratio_float": float(r.ratio), "witness": sorted(r.witness),
        "witness_size": len(r.witness), "subsets_searched": r.subsets_searched,
        "metadata": r.metadata, "graph": G.name, "note": "upper bound for the expansion constant",
    }
    header = ["ratio", "ratio_float", "witness_size", "subsets_searched"]
    return res, header, [[str(r.ratio), float(r.ratio), len(r.witness), r.subsets_searched]]


def _profile_result(G, radius, window):
    prof = folner_profile(G, radius)
    verdict = classify_amenability(prof, window) if len(prof) >= 4 else None
    res = {
        "graph": G.name,
        "ball_sizes": prof.ball_sizes,
        "boundary_sizes": prof.boundary_sizes,
        "ratios": prof.ratios,
        "amenability": verdict.as_dict() if verdict else None,
        "graph_metadata": dict(G.metadata),
    }
    return res, ["n", "ball", "boundary", "ratio"], [list(r) for r in prof.rows()]


def cmd_folner(p, seed):
    return _profile_result(_graph(p), p["radius"], p["window"])


def cmd_schreier(p, seed):
    hom = p["hom"]
    try:
        if hom == "trivial" or (isinstance(hom, dict) and hom.get("subgroup") == "trivial"):
            G = cayley_graph(p["rank"])
        else:
            G = schreier_from_hom(hom["images"], hom.get("modulus"))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"bad hom spec: {exc}") from None
    return _profile_result(G, p["radius"], p["window"])


def cmd_torus_distance(p, seed):
    t1, t2 = p["tau1"], p["tau2"]
    if t1.imag <= 0 or t2.imag <= 0:
        raise ConfigError("points must lie in the upper half-plane")
    s = affine_coeffs(t1, t2)
    d = teich_distance(t1, t2)
    res = {"distance": d, "dilatation": linear_dilatation(s), "a": s.a, "b": s.b,
           "convention": "d = log K"}
    return res, ["distance", "dilatation"], [[d, res["dilatation"]]]


def cmd_iterate(p, seed):
    try:
        sc = Scenario.from_dict({k: p[k] for k in ("maps", "max_n", "tol", "pinch_threshold")}
                                | {"y0": [p["y0"].real, p["y0"].imag]})
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario: {exc}") from None
    tr = sc.run()
    res = tr.as_dict()
    try:
        res["contraction_estimate"] = contraction_estimate(tr).as_dict()
    except ValueError as exc:
        res["contraction_estimate"] = None
        res["contraction_note"] = str(exc)
    rows = [list(r) for r in tr.rows()]
    return res, ["n", "re", "im", "step_distance"], rows


COMMANDS = {
    "theta-ratio": cmd_theta_ratio,
    "theta-norm-estimate": cmd_theta_norm_estimate,
    "unfold-check": cmd_unfold_check,
    "systole": cmd_systole,
    "expansion": cmd_expansion,
    "folner": cmd_folner,
    "schreier": cmd_schreier,
    "torus-distance": cmd_torus_distance,
    "iterate": cmd_iterate,
}


# -- output -----------------------------------------------------------------------

def render(command, params, seed, status, result, header, rows, fmt) -> str:
    prov = {"schema_version": SCHEMA_VERSION, "command": command, "version": __version__,
            "seed": seed, "config": params, "status": status}
    if fmt == "json":
        doc = to_jsonable({**prov, "result": result})
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key in ("schema_version", "command", "version", "seed", "status"):
        buf.write(f"# {key}: {prov[key]}\n")
    buf.write("# config: " + json.dumps(to_jsonable(params), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else ("" if x is None else x) for x in row])
    return buf.getvalue()


def _write(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    command = ns.command
    try:
        params, seed = resolve_config(command, ns)
    except ConfigError as exc:
        print(f"thetalab {command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if ns.threads is not None:
        if ns.threads < 1:
            print(f"thetalab {command}: config error: --threads must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        import numba
        numba.set_num_threads(min(ns.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        result, header, rows = COMMANDS[command](params, seed)
        status = "ok"
        code = EXIT_OK
    except ConfigError as exc:
        print(f"thetalab {command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        partial = exc.partial
        if hasattr(partial, "__dict__"):
            partial = {k: v for k, v in vars(partial).items()}
        result = {"partial": True, "message": str(exc), "partial_count": exc.partial_count,
                  "partial_result": partial}
        header, rows = ["partial_count"], [[exc.partial_count]]
        status, code = "budget-exceeded", EXIT_BUDGET
        print(f"thetalab {command}: {exc}", file=sys.stderr)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"thetalab {command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write(render(command, params, seed, status, result, header, rows, ns.format), ns.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
