"""Command-line front end: generate test operators, coarsen them, run the
multilevel solver, and brute-force tiny instances for CI cross-checks.

One run per process. Options come from flags, optionally backed by a JSON
config file (flags win). Every emitted artifact embeds the resolved options,
so a run is reproducible from its own output. Exit codes: 0 success, 2 usage
or bad parameters, 3 failed feasibility or internal check, 4 stalled
coarsening.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from pathlib import Path

from . import __version__
from .amgr import build_hierarchy, second_pass
from .annealing import AnnealConfig, sa_coarsen
from .errors import CoarseningStalledError, InfeasibleSplittingError
from .metrics import solve_report
from .partition import (
    brute_force_optimal_f,
    by_hand_fd,
    by_hand_fe,
    geometric_blocks,
    global_subdomain,
    greedy_coarsen,
    lloyd_aggregate,
    load_splitting,
    save_splitting,
)
from .problems import (
    AnisotropyParams,
    assemble_p1,
    gen_anisotropic,
    gen_convection_diffusion,
    gen_fd_laplacian_1d,
    gen_fd_laplacian_5pt,
    gen_fe_bilinear_9pt,
    gen_identity,
    load_mesh,
)
from .sparse import dominance_check, read_matrix_market, write_matrix_market

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CHECK = 3
EXIT_STALLED = 4


class UsageError(ValueError):
    """Bad or mutually inconsistent options; maps to exit code 2."""


_PI_RE = re.compile(
    r"(?i)^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?|\.\d+))?\s*$"
)


def parse_angle(text) -> float:
    """Angle in radians from a float literal or a pi expression such as
    'pi', 'pi/3', '2pi', '-pi/4', '0.5*pi/2'."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text)
    m = _PI_RE.match(s)
    if m:
        coef_txt = m.group(1) or ""
        if coef_txt in ("", "+"):
            coef = 1.0
        elif coef_txt == "-":
            coef = -1.0
        else:
            coef = float(coef_txt)
        div = float(m.group(2)) if m.group(2) else 1.0
        if div == 0.0:
            raise UsageError("angle denominator is zero")
        return coef * math.pi / div
    try:
        return float(s)
    except ValueError:
        raise UsageError(
            f"cannot parse angle {text!r}; use radians or a form like pi/3"
        ) from None


def parse_subdomains(text):
    """Decode a subdomain spec: 'global', 'geometric:RxC', or 'lloyd:SIZE'."""
    t = str(text).strip().lower()
    if t == "global":
        return ("global",)
    kind, sep, arg = t.partition(":")
    if sep:
        if kind == "geometric":
            parts = arg.split("x")
            if len(parts) == 2 and all(p.isdigit() for p in parts):
                r, c = int(parts[0]), int(parts[1])
                if r >= 1 and c >= 1:
                    return ("geometric", r, c)
        elif kind == "lloyd" and arg.isdigit() and int(arg) >= 1:
            return ("lloyd", int(arg))
    raise UsageError(
        f"bad subdomain spec {text!r}; use global, geometric:RxC, or lloyd:SIZE"
    )


_GRID_PROBLEMS = ("fd5", "fe9", "aniso-fd", "aniso-fe", "convdiff")
_PROBLEMS = _GRID_PROBLEMS + ("lap1d", "identity")
_BY_HAND = {
    "fd5": by_hand_fd,
    "aniso-fd": by_hand_fd,
    "fe9": by_hand_fe,
    "aniso-fe": by_hand_fe,
}

_COMMON_SPEC = {
    "strict": (bool, False),
    "threads": (int, 1),
}
_SOURCE_SPEC = {
    "problem": (str, None),
    "n": (int, None),
    "delta": (float, 1.0),
    "angle": (parse_angle, 0.0),
    "eps": (float, None),
    "bx": (float, None),
    "by": (float, None),
    "matrix": (str, None),
    "mesh": (str, None),
}
_COARSEN_SPEC = {
    "theta": (float, 0.56),
    "method": (str, "greedy"),
    "steps_per_dof": (int, 3000),
    "steps_per_dof_per_sweep": (int, 1),
    "subdomains": (str, "global"),
    "seed": (int, 0),
    "t_initial": (float, 1.0),
    "t_final_fraction": (float, 0.1),
    "exchange_mode": (str, "multiplicative"),
    "x": (int, 1),
    "y": (int, 0),
}
_SPECS = {
    "generate": {**_SOURCE_SPEC, "out": (str, None)},
    "coarsen": {
        **_SOURCE_SPEC,
        **_COARSEN_SPEC,
        "out": (str, "splitting.json"),
        "trace": (str, None),
    },
    "solve": {
        **_SOURCE_SPEC,
        **_COARSEN_SPEC,
        "splitting": (str, None),
        "levels": (int, 2),
        "cycle": (str, "V"),
        "nu": (int, 1),
        "second_pass": (bool, False),
        "strength": (float, None),
        "interpolation": (str, "amgr"),
        "coarse_cap": (int, 16),
        "lloyd_avg": (int, 36),
        "dff": (str, "per-row"),
        "k": (int, 800),
        "rho_seed": (int, 0),
        "report": (str, "report.json"),
    },
    "oracle": {**_SOURCE_SPEC, "theta": (float, 0.56), "out": (str, None)},
}
_CHOICES = {
    "problem": set(_PROBLEMS),
    "method": {"greedy", "sa", "by-hand"},
    "exchange_mode": {"multiplicative", "additive"},
    "cycle": {"V", "W"},
    "interpolation": {"amgr", "classical"},
    "dff": {"per-row", "uniform"},
}

# "generate" omits --matrix (reading a matrix file just to rewrite it is not
# a generation step); the option table is filtered accordingly.
del _SPECS["generate"]["matrix"]


def _add_common_flags(p):
    p.add_argument("--config", help="JSON file of option values; flags override it")
    p.add_argument(
        "--strict",
        action="store_true",
        default=None,
        help="CI mode: randomized runs must pass their seeds explicitly",
    )
    p.add_argument(
        "--threads",
        type=int,
        help="worker thread budget (default 1; kernels currently run single-threaded)",
    )


def _add_source_flags(p, with_files=True):
    p.add_argument(
        "--problem",
        help="generator: fd5, fe9, aniso-fd, aniso-fe, convdiff, lap1d, identity",
    )
    p.add_argument(
        "--n",
        type=int,
        help="grid side for 2D generators; point count for lap1d and identity",
    )
    p.add_argument("--delta", type=float, help="anisotropy strength in (0, 1]")
    p.add_argument(
        "--angle",
        type=parse_angle,
        help="anisotropy rotation in radians, or a pi expression like pi/3",
    )
    p.add_argument("--eps", type=float, help="convdiff diffusion coefficient")
    p.add_argument("--bx", type=float, help="convdiff convection x-component")
    p.add_argument("--by", type=float, help="convdiff convection y-component")
    if with_files:
        p.add_argument("--matrix", help="read the operator from a Matrix Market file")
        p.add_argument("--mesh", help="assemble a P1 operator from a mesh file")


def _add_coarsener_flags(p):
    p.add_argument("--theta", type=float, help="dominance threshold (default 0.56)")
    p.add_argument(
        "--method", help="coarsener: greedy (default), sa, or by-hand"
    )
    p.add_argument("--steps-per-dof", type=int, help="total annealing steps per DoF")
    p.add_argument(
        "--steps-per-dof-per-sweep",
        type=int,
        help="steps per DoF spent on a subdomain per sweep visit (default 1)",
    )
    p.add_argument(
        "--subdomains",
        help="decomposition: global (default), geometric:RxC, or lloyd:SIZE",
    )
    p.add_argument("--seed", type=int, help="annealing / aggregation seed (default 0)")
    p.add_argument("--t-initial", type=float, help="initial temperature (default 1.0)")
    p.add_argument(
        "--t-final-fraction",
        type=float,
        help="final temperature as a fraction of initial (default 0.1)",
    )
    p.add_argument(
        "--exchange-mode", help="subdomain label exchange: multiplicative or additive"
    )
    p.add_argument("--x", type=int, help="fitness weight of |F| (default 1)")
    p.add_argument(
        "--y", type=int, help="fitness weight of the dominance margin term (default 0)"
    )


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="amganneal",
        description="Annealed coarse/fine splittings and reduction-based multigrid.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    g = sub.add_parser("generate", help="write a test operator as Matrix Market")
    _add_common_flags(g)
    _add_source_flags(g, with_files=False)
    g.add_argument("--mesh", help="assemble a P1 operator from a mesh file")
    g.add_argument("--out", help="output path (default <problem>_<n>.mtx)")

    c = sub.add_parser("coarsen", help="compute a C/F splitting and save it")
    _add_common_flags(c)
    _add_source_flags(c)
    _add_coarsener_flags(c)
    c.add_argument("--out", help="splitting JSON path (default splitting.json)")
    c.add_argument("--trace", help="write the annealing best-|F| trace as CSV")

    s = sub.add_parser("solve", help="build a hierarchy and measure convergence")
    _add_common_flags(s)
    _add_source_flags(s)
    _add_coarsener_flags(s)
    s.add_argument("--splitting", help="precomputed level-0 splitting JSON")
    s.add_argument("--levels", type=int, help="hierarchy levels (default 2)")
    s.add_argument("--cycle", help="cycle type: V (default) or W")
    s.add_argument("--nu", type=int, help="pre/post F-relaxation count (default 1)")
    s.add_argument(
        "--second-pass",
        action="store_true",
        default=None,
        help="augment each splitting so strong F-F pairs share a strong C-neighbor",
    )
    s.add_argument(
        "--strength", type=float, help="strength threshold theta_s for --second-pass"
    )
    s.add_argument(
        "--interpolation", help="interpolation operator: amgr (default) or classical"
    )
    s.add_argument(
        "--coarse-cap",
        type=int,
        help="direct-solve size; stop coarsening at or below it (default 16)",
    )
    s.add_argument(
        "--lloyd-avg",
        type=int,
        help="average aggregate size for coarse-level SA decompositions (default 36)",
    )
    s.add_argument(
        "--dff", help="D_FF scaling: per-row (default) or uniform (global theta)"
    )
    s.add_argument("--k", type=int, help="cycles measured (default 800)")
    s.add_argument(
        "--rho-seed", type=int, help="start-vector seed for the measurement (default 0)"
    )
    s.add_argument("--report", help="report JSON path (default report.json)")

    o = sub.add_parser("oracle", help="brute-force the optimal |F| on tiny inputs")
    _add_common_flags(o)
    _add_source_flags(o)
    o.add_argument("--theta", type=float, help="dominance threshold (default 0.56)")
    o.add_argument("--out", help="optional JSON result path")

    return parser


def _coerce_config(name, value, coerce):
    try:
        if coerce is bool:
            if not isinstance(value, bool):
                raise ValueError("expected true or false")
            return value
        if isinstance(value, bool):
            raise ValueError("expected a value, got a boolean")
        if coerce is int:
            if not isinstance(value, int):
                raise ValueError("expected an integer")
            return value
        if coerce is float:
            if not isinstance(value, (int, float)):
                raise ValueError("expected a number")
            return float(value)
        if coerce is str:
            if not isinstance(value, str):
                raise ValueError("expected a string")
            return value
        return coerce(value)
    except ValueError as exc:
        raise UsageError(f"config key {name!r}: {exc}") from None


def _resolve(args):
    """Merge flags over the config file over defaults.

    Returns (opts, explicit) where explicit holds the names the user supplied
    through either channel; --strict seed enforcement keys off it.
    """
    spec = dict(_COMMON_SPEC, **_SPECS[args.command])
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise UsageError(f"{args.config}: config must be a JSON object")
        cfg = {str(k).replace("-", "_"): v for k, v in raw.items()}
        unknown = sorted(set(cfg) - set(spec))
        if unknown:
            raise UsageError(
                f"{args.config}: unknown keys for '{args.command}': "
                + ", ".join(unknown)
            )
    opts, explicit = {}, set()
    for name, (coerce, default) in spec.items():
        flag_value = getattr(args, name)
        if flag_value is not None:
            opts[name] = flag_value
            explicit.add(name)
        elif name in cfg and cfg[name] is not None:
            opts[name] = _coerce_config(name, cfg[name], coerce)
            explicit.add(name)
        else:
            opts[name] = default
    if "cycle" in opts:
        opts["cycle"] = str(opts["cycle"]).upper()
    for name, allowed in _CHOICES.items():
        if name in opts and opts[name] is not None and opts[name] not in allowed:
            raise UsageError(
                f"{name} must be one of {', '.join(sorted(allowed))}; got {opts[name]!r}"
            )
    if opts["threads"] < 1:
        raise UsageError("--threads must be >= 1")
    return opts, explicit


def _require_explicit_seeds(opts, explicit, names):
    if not opts["strict"]:
        return
    missing = [f"--{n.replace('_', '-')}" for n in names if n not in explicit]
    if missing:
        raise UsageError(
            "--strict requires " + " and ".join(missing) + " for randomized runs"
        )


def _forbid(opts, explicit, names, why):
    given = [f"--{n.replace('_', '-')}" for n in names if n in explicit]
    if given:
        raise UsageError(f"{', '.join(given)} {why}")


def build_problem(opts, explicit):
    """Materialize the operator named by the source options.

    Returns (A, source_info, grid_n) with grid_n set only for N x N grid
    generators (geometric subdomains and by-hand splittings need it).
    """
    chosen = [k for k in ("problem", "matrix", "mesh") if opts.get(k)]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --problem, --matrix, --mesh")
    source = chosen[0]
    if source == "matrix":
        _forbid(opts, explicit, ("n", "delta", "angle", "eps", "bx", "by"),
                "do not apply to --matrix input")
        a = read_matrix_market(opts["matrix"])
        if a.n_rows != a.n_cols:
            raise UsageError(f"{opts['matrix']}: operator must be square")
        return a, {"matrix": opts["matrix"]}, None
    if source == "mesh":
        _forbid(opts, explicit, ("n", "eps", "bx", "by"), "do not apply to --mesh input")
        params = AnisotropyParams(opts["delta"], opts["angle"])
        a = assemble_p1(load_mesh(opts["mesh"]), params)
        info = {"mesh": opts["mesh"], "delta": opts["delta"], "angle": opts["angle"]}
        return a, info, None

    problem, n = opts["problem"], opts["n"]
    if n is None:
        raise UsageError("--problem requires --n")
    info = {"problem": problem, "n": n}
    if problem in ("aniso-fd", "aniso-fe"):
        _forbid(opts, explicit, ("eps", "bx", "by"), "apply to convdiff only")
        params = AnisotropyParams(opts["delta"], opts["angle"])
        scheme = "FD" if problem == "aniso-fd" else "FE"
        info.update(delta=opts["delta"], angle=opts["angle"])
        return gen_anisotropic(n, params, scheme=scheme), info, n
    if problem == "convdiff":
        _forbid(opts, explicit, ("delta", "angle"), "apply to anisotropic problems only")
        missing = [f"--{k}" for k in ("eps", "bx", "by") if opts[k] is None]
        if missing:
            raise UsageError(f"convdiff requires {', '.join(missing)}")
        info.update(eps=opts["eps"], bx=opts["bx"], by=opts["by"])
        return gen_convection_diffusion(n, opts["eps"], (opts["bx"], opts["by"])), info, n
    _forbid(opts, explicit, ("delta", "angle", "eps", "bx", "by"),
            f"do not apply to --problem {problem}")
    if problem == "fd5":
        return gen_fd_laplacian_5pt(n), info, n
    if problem == "fe9":
        return gen_fe_bilinear_9pt(n), info, n
    if problem == "lap1d":
        return gen_fd_laplacian_1d(n), info, None
    return gen_identity(n), info, None


def _make_decomposition(opts, a, grid_n):
    spec = parse_subdomains(opts["subdomains"])
    if spec[0] == "global":
        return global_subdomain(a, opts["theta"])
    if spec[0] == "geometric":
        if grid_n is None:
            raise UsageError("geometric subdomains require an N x N grid generator")
        return geometric_blocks(grid_n, (spec[1], spec[2]), a, opts["theta"])
    return lloyd_aggregate(a, spec[1], seed=opts["seed"], prepin_theta=opts["theta"])


def _uses_rng(opts):
    return opts["method"] == "sa" or opts["subdomains"].startswith("lloyd")


def _anneal_config(opts):
    return AnnealConfig(
        theta=opts["theta"],
        total_steps_per_dof=opts["steps_per_dof"],
        steps_per_dof_per_sweep=opts["steps_per_dof_per_sweep"],
        t_initial=opts["t_initial"],
        t_final_fraction=opts["t_final_fraction"],
        x=opts["x"],
        y=opts["y"],
        seed=opts["seed"],
        exchange_mode=opts["exchange_mode"],
    )


def _check_theta(opts):
    if not opts["theta"] > 0.5:
        raise UsageError(f"theta must exceed 1/2, got {opts['theta']}")


def _run_record(command, opts, source_info):
    # Output destinations do not influence artifact content, so they stay out
    # of the record; identical runs then emit byte-identical files anywhere.
    options = {k: opts[k] for k in sorted(opts) if k not in ("out", "trace", "report")}
    return {"command": command, "options": options, "source": source_info}


def _level0_splitting(opts, explicit, a, grid_n):
    """Run the configured coarsener on the finest level; returns
    (splitting, trace-or-None)."""
    method = opts["method"]
    if method == "greedy":
        return greedy_coarsen(a, opts["theta"]), None
    if method == "by-hand":
        problem = opts.get("problem")
        if problem not in _BY_HAND:
            raise UsageError(
                "by-hand splittings exist for fd5, aniso-fd, fe9, aniso-fe only"
            )
        return _BY_HAND[problem](grid_n), None
    decomp = _make_decomposition(opts, a, grid_n)
    return sa_coarsen(a, decomp, _anneal_config(opts))


def _write_json(path, payload):
    with open(str(path), "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def cmd_generate(opts, explicit):
    a, info, _ = build_problem(opts, explicit)
    out = opts["out"]
    if out is None:
        if "problem" in info:
            out = f"{info['problem']}_{info['n']}.mtx"
        else:
            out = Path(opts["mesh"]).with_suffix(".mtx").name
    write_matrix_market(a, out)
    print(f"n = {a.n_rows}, nnz = {a.nnz}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_coarsen(opts, explicit):
    _check_theta(opts)
    _require_explicit_seeds(opts, explicit, ["seed"] if _uses_rng(opts) else [])
    if opts["trace"] is not None and opts["method"] != "sa":
        raise UsageError("--trace requires --method sa")
    a, info, grid_n = build_problem(opts, explicit)
    splitting, trace = _level0_splitting(opts, explicit, a, grid_n)

    n, n_f = splitting.n, splitting.n_f
    feasible = dominance_check(a, splitting, opts["theta"])
    print(f"|F|/|Omega| = {n_f}/{n} = {n_f / n:.4f}")
    print(f"feasibility check: {'PASS' if feasible else 'FAIL'}")
    if not feasible:
        raise InfeasibleSplittingError(
            f"{opts['method']} output violates the dominance check at "
            f"theta = {opts['theta']}; nothing written"
        )
    seed = opts["seed"] if _uses_rng(opts) else None
    save_splitting(
        splitting,
        opts["out"],
        theta=opts["theta"],
        method=opts["method"],
        seed=seed,
        provenance=_run_record("coarsen", opts, info),
    )
    print(f"wrote {opts['out']}")
    if opts["trace"] is not None:
        with open(opts["trace"], "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "temperature", "best_f", "sweep"])
            writer.writerows(trace)
        print(f"wrote {opts['trace']}")
    return EXIT_OK


def cmd_solve(opts, explicit):
    _check_theta(opts)
    seeds = ["rho_seed"] + (["seed"] if _uses_rng(opts) else [])
    _require_explicit_seeds(opts, explicit, seeds)
    if opts["levels"] < 2:
        raise UsageError("--levels must be >= 2")
    if opts["nu"] < 0:
        raise UsageError("--nu must be >= 0")
    if opts["k"] < 1:
        raise UsageError("--k must be >= 1")
    if opts["coarse_cap"] < 0:
        raise UsageError("--coarse-cap must be >= 0")
    if opts["lloyd_avg"] < 1:
        raise UsageError("--lloyd-avg must be >= 1")
    if opts["second_pass"] and opts["strength"] is None:
        raise UsageError("--second-pass requires --strength")
    if not opts["second_pass"] and opts["strength"] is not None:
        raise UsageError("--strength requires --second-pass")
    if opts["method"] == "by-hand" and opts["levels"] != 2:
        raise UsageError("by-hand splittings support --levels 2 only")

    a, info, grid_n = build_problem(opts, explicit)
    if opts["splitting"] is not None:
        level0, meta = load_splitting(opts["splitting"])
        if meta["n"] != a.n_rows:
            raise UsageError(
                f"{opts['splitting']}: splitting is for n = {meta['n']}, "
                f"operator has n = {a.n_rows}"
            )
        if not dominance_check(a, level0, opts["theta"]):
            raise InfeasibleSplittingError(
                f"{opts['splitting']} fails the dominance check at "
                f"theta = {opts['theta']}"
            )
    else:
        level0, _ = _level0_splitting(opts, explicit, a, grid_n)

    augmented = None
    if opts["second_pass"]:
        n_c_before = level0.n_c
        level0 = second_pass(a, level0, opts["strength"])
        augmented = {
            "theta_s": opts["strength"],
            "n_c_before": n_c_before,
            "n_c_after": level0.n_c,
        }

    coarsener = "greedy" if opts["method"] in ("greedy", "by-hand") else _anneal_config(opts)
    hierarchy = build_hierarchy(
        a,
        coarsener,
        opts["levels"],
        opts["theta"],
        symmetric=a.is_symmetric(),
        second_pass_theta=opts["strength"] if opts["second_pass"] else None,
        interpolation=opts["interpolation"],
        cycle_type=opts["cycle"],
        nu=opts["nu"],
        coarse_cap=opts["coarse_cap"],
        lloyd_avg_size=opts["lloyd_avg"],
        level0_splitting=level0,
        per_row_dff=opts["dff"] == "per-row",
    )
    report = solve_report(hierarchy, k=opts["k"], seed=opts["rho_seed"])
    payload = {
        "format_version": 1,
        "run": _run_record("solve", opts, info),
        "report": report.to_dict(),
        "hierarchy": hierarchy.describe(),
    }
    if augmented is not None:
        payload["second_pass"] = augmented
    _write_json(opts["report"], payload)
    print(
        f"rho = {report.rho:.4f}, c_grid = {report.c_grid:.4f}, "
        f"c_op = {report.c_op:.4f}, f_ratio = {report.f_ratio:.4f} "
        f"(k = {report.k_used})"
    )
    if report.diverged:
        print("warning: cycle iteration diverged; rho exceeds 1", file=sys.stderr)
    print(f"wrote {opts['report']}")
    return EXIT_OK


def cmd_oracle(opts, explicit):
    _check_theta(opts)
    a, info, _ = build_problem(opts, explicit)
    if a.n_rows > 24:
        raise UsageError(
            f"n = {a.n_rows} exceeds the exhaustive-search cap of 24"
        )
    result = brute_force_optimal_f(a, opts["theta"])
    f_indices = sorted(int(i) for i in result.best_f)
    print(f"optimal |F| = {result.best_size} of {a.n_rows}")
    print(f"F = {f_indices}")
    print(f"feasible subsets = {result.feasible_count}")
    if opts["out"] is not None:
        _write_json(
            opts["out"],
            {
                "format_version": 1,
                "run": _run_record("oracle", opts, info),
                "n": a.n_rows,
                "theta": opts["theta"],
                "best_f_size": result.best_size,
                "f_indices": f_indices,
                "feasible_count": result.feasible_count,
            },
        )
        print(f"wrote {opts['out']}")
    return EXIT_OK


_COMMANDS = {
    "generate": cmd_generate,
    "coarsen": cmd_coarsen,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        opts, explicit = _resolve(args)
        return _COMMANDS[args.command](opts, explicit)
    except InfeasibleSplittingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except CoarseningStalledError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STALLED
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
