"""Command line front end: one subcommand per pipeline stage.

Reports are reproducible by construction.  Every report embeds the fully
resolved configuration and the package version; ``sebalab rerun --config
<report>`` re-executes the embedded configuration and reproduces the report
byte for byte (thread count and output destination are deliberately not part
of the configuration — they cannot change the bytes).

Tabular commands (sieve, spectrum, moments, tail, symmetry) default to CSV
with the config echoed on ``#`` comment lines; nested reports (epstein,
exponents) default to JSON.  Floats are printed with ``repr`` so every value
round-trips through text exactly.

Exit codes: 0 success, 1 computation failure (root finding, continuation),
2 validation failure (bad flags or ranges, unwritable output path).
"""

import argparse
import io
import json
import math
import os
import sys
import tempfile

from . import __version__
from .arithmetic import CapacityError, build_table
from .epstein import (LogDomainError, PoleError, RectangularForm,
                      epstein_continued, epstein_direct, ground_exponents,
                      symmetry_check)
from .multifractal import (FilterConfig, fractal_estimates, mean_tail,
                           moment_profile)
from .spectrum import CouplingConfig, CutoffPolicy, solve_range

_CONFIG_PREFIX = "# config: "


def _q_grid(text):
    try:
        vals = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad q grid {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty q grid")
    return vals


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_output(p, default_format):
    p.add_argument("--out", default=None, metavar="PATH",
                   help="output file (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"),
                   default=default_format)


def _add_coupling(p):
    p.add_argument("--mode", choices=("weak", "strong"), default="weak")
    p.add_argument("--theta", type=float, default=0.0,
                   help="weak-coupling right-hand side")
    p.add_argument("--beta-c", type=float, default=1.0)
    p.add_argument("--beta-b", type=float, default=0.0)
    p.add_argument("--multiplier", type=float, default=10.0,
                   help="weak truncation multiplier (>= 10)")
    p.add_argument("--min-span", type=float, default=1.0e4)
    p.add_argument("--root-tol", type=float, default=1.0e-9)
    p.add_argument("--table-max", type=int, default=None,
                   help="sieve size (default: large enough for the cutoff)")
    p.add_argument("--threads", type=int, default=None,
                   help="solver threads (default: SEBALAB_THREADS or 1)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sebalab",
        description="Arithmetic point-scatterer laboratory on the square "
                    "torus: sieve, spectra, moment profiles, exponent "
                    "estimates, lattice zeta functions.")
    parser.add_argument("--version", action="version",
                        version=f"sebalab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", help="two-squares arithmetic table")
    p.add_argument("--x-max", type=int, required=True)
    _add_output(p, "csv")

    p = sub.add_parser("spectrum", help="secular roots on [x_min, x_max]")
    p.add_argument("--x-min", type=int, required=True)
    p.add_argument("--x-max", type=int, required=True)
    _add_coupling(p)
    _add_output(p, "csv")

    p = sub.add_parser("moments", help="zeta moment profiles along a window")
    p.add_argument("--x-min", type=int, required=True)
    p.add_argument("--x-max", type=int, required=True)
    _add_coupling(p)
    p.add_argument("--q-grid", type=_q_grid, default=(1.0, 1.5, 2.0))
    p.add_argument("--limit", type=int, default=32,
                   help="max records profiled (evenly strided)")
    p.add_argument("--rel-tol", type=float, default=1.0e-3,
                   help="certified relative tail budget per zeta value "
                        "(q near 1/2 needs a much larger --table-max)")
    _add_output(p, "csv")

    p = sub.add_parser("exponents",
                       help="fractal-exponent estimator chain (nested report)")
    p.add_argument("--x-min", type=int, required=True)
    p.add_argument("--x-max", type=int, required=True)
    _add_coupling(p)
    p.add_argument("--q-grid", type=_q_grid, default=(1.25, 1.5, 2.0))
    p.add_argument("--normalization", choices=("multifractal", "simple"),
                   default="multifractal")
    p.add_argument("--normal-eps", type=float, default=0.25)
    p.add_argument("--delta-eps", type=float, default=0.25)
    p.add_argument("--alpha", type=float, default=None,
                   help="pin the gap exponent instead of estimating it")
    p.add_argument("--rel-tol", type=float, default=1.0e-6)
    _add_output(p, "json")

    p = sub.add_parser("tail", help="windowed mean of annulus tail sums")
    p.add_argument("--t", type=float, required=True, metavar="T",
                   help="window centre scale (averages over [T, 2T])")
    p.add_argument("--g-exponent", type=float, default=0.3,
                   help="inner radius G = T**g")
    p.add_argument("--q-grid", type=_q_grid, default=(1.0, 1.5, 2.0))
    p.add_argument("--table-max", type=int, default=None,
                   help="sieve size (default: 3T, the minimum)")
    _add_output(p, "csv")

    p = sub.add_parser("epstein", help="lattice zeta value at one point")
    p.add_argument("--a", type=float, required=True,
                   help="aspect parameter of the form m^2/a + a n^2")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--tol", type=float, default=1.0e-10,
                   help="certified error budget for the direct route")
    p.add_argument("--dps", type=int, default=25,
                   help="working precision for the continued route")
    _add_output(p, "json")

    p = sub.add_parser("symmetry",
                       help="ground-state exponents and the q <-> 1/2-q law")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--q-grid", type=_q_grid,
                   default=(0.05, 0.25, 0.35, 0.45, 0.75, 1.25))
    p.add_argument("--dps", type=int, default=25)
    _add_output(p, "csv")

    p = sub.add_parser("rerun", help="re-execute a report's embedded config")
    p.add_argument("--config", required=True, metavar="PATH",
                   help="previous report (csv or json) or bare config json")
    p.add_argument("--out", default=None, metavar="PATH")
    p.add_argument("--threads", type=int, default=None)

    return parser


# persisted per command: everything that can change the report bytes
_PERSIST = {
    "sieve": ("x_max",),
    "spectrum": ("x_min", "x_max", "table_max", "mode", "theta", "beta_c",
                 "beta_b", "multiplier", "min_span", "root_tol"),
    "moments": ("x_min", "x_max", "table_max", "mode", "theta", "beta_c",
                "beta_b", "multiplier", "min_span", "root_tol", "q_grid",
                "limit", "rel_tol"),
    "exponents": ("x_min", "x_max", "table_max", "mode", "theta", "beta_c",
                  "beta_b", "multiplier", "min_span", "root_tol", "q_grid",
                  "normalization", "normal_eps", "delta_eps", "alpha",
                  "rel_tol"),
    "tail": ("t", "g_exponent", "q_grid", "table_max"),
    "epstein": ("a", "s", "tol", "dps"),
    "symmetry": ("a", "q_grid", "dps"),
}


def resolve_config(args):
    """Freeze a Namespace into the dict every report will embed."""
    cfg = {"command": args.command, "format": args.format}
    for key in _PERSIST[args.command]:
        val = getattr(args, key)
        cfg[key] = list(val) if isinstance(val, tuple) else val
    if cfg.get("table_max") is None and "table_max" in cfg:
        cfg["table_max"] = _default_table_max(cfg)
    return cfg


def _default_table_max(cfg):
    if cfg["command"] == "tail":
        return int(math.ceil(3.0 * cfg["t"]))
    if cfg["mode"] == "weak":
        # the truncation bound at the largest root must fit in the table
        return int(math.ceil(max(cfg["multiplier"] * cfg["x_max"],
                                 cfg["x_max"] + cfg["min_span"])))
    return cfg["x_max"] + 2 * int(math.sqrt(cfg["x_max"])) + 8


# ---------------------------------------------------------------------------
# handlers: config dict in, (columns, rows) or nested dict out
# ---------------------------------------------------------------------------

def _coupling_from(cfg):
    return CouplingConfig(
        mode=cfg["mode"], theta=cfg["theta"], beta_c=cfg["beta_c"],
        beta_b=cfg["beta_b"], root_tol=cfg["root_tol"],
        cutoff=CutoffPolicy(multiplier=cfg["multiplier"],
                            min_span=cfg["min_span"]))


def _solve_window(cfg, threads):
    table = build_table(cfg["table_max"])
    spec = solve_range(cfg["x_min"], cfg["x_max"], table,
                       _coupling_from(cfg), threads=threads)
    return table, spec


def _run_sieve(cfg, threads):
    table = build_table(cfg["x_max"])
    rows = [(int(n), int(table.r2[n]), int(table.omega1[n]))
            for n in table.representable]
    return ("n", "r2", "omega1"), rows


def _run_spectrum(cfg, threads):
    _, spec = _solve_window(cfg, threads)
    columns = ("j", "n_left", "n_right", "lambda", "gap_left", "gap_right",
               "delta", "n_tilde")
    return columns, list(spec.rows())


def _run_moments(cfg, threads):
    table, spec = _solve_window(cfg, threads)
    qs = tuple(cfg["q_grid"])
    if cfg["limit"] < 1:
        raise ValueError("limit must be >= 1")
    stride = max(1, len(spec) // cfg["limit"])
    columns = ["lambda", "delta", "n_tilde"]
    for q in qs:
        columns += [f"m[{q:g}]", f"M[{q:g}]", f"H[{q:g}]", f"tail[{q:g}]"]
    rows = []
    for k in list(range(0, len(spec), stride))[:cfg["limit"]]:
        prof = moment_profile(float(spec.lam[k]), float(spec.delta[k]),
                              int(round(float(spec.n_tilde[k]))), qs, table,
                              rel_tol=cfg["rel_tol"])
        row = [prof.lam, prof.delta, prof.n_tilde]
        for q in qs:
            row += [prof.m_q[q], prof.moment_ratio(q), prof.H_q[q],
                    prof.tail_bound[q]]
        rows.append(tuple(row))
    return tuple(columns), rows


def _run_tail(cfg, threads):
    table = build_table(cfg["table_max"])
    t = cfg["t"]
    g = t ** cfg["g_exponent"]
    rows = []
    for q in cfg["q_grid"]:
        got = mean_tail(t, g, q, table)
        pred = 2.0 * math.pi / (2.0 * q - 1.0) * g ** (1.0 - 2.0 * q)
        rows.append((t, g, q, got.value, got.remainder_bound, pred,
                     got.value / pred))
    return ("T", "G", "q", "mean_tail", "remainder_bound",
            "prediction", "ratio"), rows


def _run_symmetry(cfg, threads):
    form = RectangularForm(a=cfg["a"])
    rows = []
    for q in cfg["q_grid"]:
        try:
            d_star, big_d = ground_exponents(form, q, dps=cfg["dps"])
        except LogDomainError:
            d_star, big_d = math.nan, math.nan
        try:
            resid = symmetry_check(form, q, dps=cfg["dps"])
        except PoleError:
            resid = math.nan     # q = 1 or a reflection onto a pole
        rows.append((cfg["a"], q, d_star, big_d, resid))
    return ("a", "q", "d_star", "D_star", "residual_symmetry"), rows


def _run_epstein(cfg, threads):
    form = RectangularForm(a=cfg["a"])
    s = cfg["s"]
    if s > 1.0:
        got = epstein_direct(form, s, tol=cfg["tol"])
    else:
        got = epstein_continued(form, s, dps=cfg["dps"])
    return {"a": cfg["a"], "s": s, "value": got.value,
            "certified_error": got.certified_error, "method": got.method}


def _run_exponents(cfg, threads):
    table, spec = _solve_window(cfg, threads)
    filters = FilterConfig(normal_eps=cfg["normal_eps"],
                           delta_eps=cfg["delta_eps"], alpha=cfg["alpha"])
    rep = fractal_estimates(spec, table, tuple(cfg["q_grid"]),
                            (cfg["x_min"], cfg["x_max"]), filters=filters,
                            normalization=cfg["normalization"],
                            rel_tol=cfg["rel_tol"])

    def by_q(d):
        return {f"{q:g}": d[q] for q in rep.q_grid}

    return {
        "window": list(rep.window),
        "normalization": rep.normalization,
        "n_records": rep.n_records,
        "block_edges": list(rep.block_edges),
        "block_counts": list(rep.block_counts),
        "q_grid": list(rep.q_grid),
        "alpha_hat": rep.alpha_hat,
        "c_hat": rep.c_hat,
        "G": by_q(rep.G),
        "N": by_q(rep.N),
        "d_hat": by_q(rep.d_hat),
        "D_hat": by_q(rep.D_hat),
        "D_hat_alt": by_q(rep.D_hat_alt),
        "d_theory": by_q(rep.d_theory),
        "D_theory": by_q(rep.D_theory),
        "q_admissible": None if rep.q_admissible is None
        else list(rep.q_admissible),
        "theory_applicable": rep.theory_applicable,
    }


_TABULAR = {"sieve": _run_sieve, "spectrum": _run_spectrum,
            "moments": _run_moments, "tail": _run_tail,
            "symmetry": _run_symmetry}
_NESTED = {"epstein": _run_epstein, "exponents": _run_exponents}


# ---------------------------------------------------------------------------
# rendering and delivery
# ---------------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sanitize(obj):
    """NaN and infinities have no JSON spelling; map them to null."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def render(cfg, payload):
    """Serialize a handler result under the echoed config."""
    config_line = json.dumps(cfg, sort_keys=True)
    if isinstance(payload, dict):     # nested report
        if cfg["format"] == "csv":
            raise ValueError(
                f"{cfg['command']} produces a nested report; use json")
        doc = {"version": __version__, "config": cfg,
               "report": _sanitize(payload)}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    columns, rows = payload
    if cfg["format"] == "json":
        doc = {"version": __version__, "config": cfg,
               "columns": list(columns),
               "rows": [_sanitize(list(r)) for r in rows]}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    out = io.StringIO()
    out.write(f"# sebalab {__version__}\n")
    out.write(_CONFIG_PREFIX + config_line + "\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def execute(cfg, threads=None):
    cmd = cfg.get("command")
    if cmd in _TABULAR:
        return render(cfg, _TABULAR[cmd](cfg, threads))
    if cmd in _NESTED:
        return render(cfg, _NESTED[cmd](cfg, threads))
    raise ValueError(f"unknown command in config: {cmd!r}")


def _check_writable(path):
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(parent):
        raise ValueError(f"output directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise ValueError(f"output directory not writable: {parent}")


def _deliver(text, path):
    """Write whole-file-or-nothing: temp file in place, then rename."""
    if path is None:
        sys.stdout.write(text)
        return
    parent = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".sebalab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def load_config(path):
    """Pull the embedded config back out of a csv or json report."""
    with open(path) as handle:
        head = handle.read(1)
        handle.seek(0)
        if head == "#":
            for line in handle:
                if line.startswith(_CONFIG_PREFIX):
                    return json.loads(line[len(_CONFIG_PREFIX):])
            raise ValueError(f"no config line in {path}")
        doc = json.load(handle)
    if isinstance(doc, dict) and "config" in doc:
        return doc["config"]
    if isinstance(doc, dict) and "command" in doc:
        return doc
    raise ValueError(f"{path} carries no recognizable config")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            cfg = load_config(args.config)
        else:
            cfg = resolve_config(args)
        _check_writable(args.out)
        text = execute(cfg, threads=getattr(args, "threads", None))
        _deliver(text, args.out)
    except (ValueError, CapacityError) as err:
        print(f"sebalab: {err}", file=sys.stderr)
        return 2
    except RuntimeError as err:
        print(f"sebalab: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"sebalab: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
