"""Command-line front end: ``bellsim <command> [options]``.

Commands write plot-ready CSV or JSON.  Angles are degrees on the command
line and in outputs, floats are printed with 9 significant digits, and files
are written atomically (temp file + rename).

Exit codes: 0 success, 1 usage/config error, 2 numeric/domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import bellopt, countsim, qcore, sourcemodel, tomography

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2

BETA_NOTE = "beta columns hold the CHSH Bell value, not the arm-2 analyzer angle"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return f"{float(x):.9g}"


def _json_num(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return float(f"{float(x):.9g}")


def worker_count() -> int:
    raw = os.environ.get("BELLSIM_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        raise UsageError(f"BELLSIM_THREADS must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------------------
# output


def write_text(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def table_text(columns, rows, fmt_name: str, comments=(), meta=None) -> str:
    if fmt_name == "json":
        payload = dict(meta or {})
        payload["columns"] = list(columns)
        payload["rows"] = [{c: _json_num(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_csv(path_or_text) -> tuple[list[str], list[list[str]]]:
    """Parse a CSV written by this tool, skipping ``#`` comment lines."""
    text = path_or_text
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text):
        text = Path(path_or_text).read_text()
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# commands


def _p_grid(args) -> np.ndarray:
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    if args.steps == 1:
        grid = np.array([args.p_min])
    else:
        if args.p_max <= args.p_min:
            raise UsageError("--p-max must exceed --p-min")
        grid = np.linspace(args.p_min, args.p_max, args.steps)
    if np.any(grid < 0) or np.any(grid > 1):
        raise UsageError("p grid must lie within [0, 1]")
    return grid


def cmd_bell_max(args) -> int:
    grid = _p_grid(args)
    noise = args.noise
    threshold = bellopt.violation_threshold(noise, w=args.w)
    rows = []
    for p in grid:
        state = qcore.noisy_state(noise, p, args.w)
        if noise == "colored":
            res = bellopt.maximize_restricted(p)
        else:
            res = bellopt.maximize_state_restricted(state)
        rows.append((
            p, res.value, res.abs_value,
            math.degrees(res.settings.theta), math.degrees(res.settings.phi),
            bellopt.horodecki_bound(state), threshold, res.violation,
        ))
    columns = ("p", "beta_max", "abs_beta_max", "theta_deg", "phi_deg", "horodecki_bound", "threshold", "violation")
    meta = {"noise": noise, "w": args.w if noise == "mixed" else None, "note": BETA_NOTE}
    comments = [BETA_NOTE, f"noise={noise}" + (f" w={fmt(args.w)}" if noise == "mixed" else "")]
    write_text(table_text(columns, rows, args.format, comments, meta), args.out)
    return EXIT_OK


def _load_params(args) -> sourcemodel.SourceParams:
    if not args.config:
        raise UsageError("--config is required for this command")
    return sourcemodel.load_source_params(args.config)


def _taus(args) -> np.ndarray:
    if args.taus:
        try:
            return np.array([float(t) for t in args.taus.split(",") if t.strip()])
        except ValueError:
            raise UsageError(f"--taus must be a comma-separated list of numbers, got {args.taus!r}") from None
    if args.tau_steps < 1:
        raise UsageError("--tau-steps must be at least 1")
    if args.tau_min is None or args.tau_max is None:
        raise UsageError("give --taus or both --tau-min and --tau-max")
    return np.linspace(args.tau_min, args.tau_max, args.tau_steps)


def _fixed_settings(args):
    if args.theta_deg is None and args.phi_deg is None:
        return None
    if args.theta_deg is None or args.phi_deg is None:
        raise UsageError("--theta-deg and --phi-deg must be given together")
    return bellopt.ChshSettings.restricted(math.radians(args.theta_deg), math.radians(args.phi_deg))


def _shots(args):
    return None if args.exact else args.shots


def cmd_delay_sweep(args) -> int:
    params = _load_params(args)
    taus = _taus(args)
    fixed = _fixed_settings(args)
    records = countsim.experiment_sweep(
        params, taus, shots=_shots(args), seed=args.seed, optimize=fixed is None,
        settings=fixed, colored_weight=args.w, workers=worker_count(),
    )
    columns = countsim.SweepRecord.FIELDS
    rows = [r.as_row() for r in records]
    meta = {"source": params.to_dict(), "kappa": params.kappa, "note": BETA_NOTE}
    write_text(table_text(columns, rows, args.format, [BETA_NOTE], meta), args.out)
    return EXIT_OK


def cmd_surface(args) -> int:
    if not 0.0 <= args.p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {args.p}")
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    grid_deg = -90.0 + 180.0 * np.arange(args.steps) / args.steps
    grid = np.radians(grid_deg)
    values = bellopt.beta_surface(args.p, grid, grid)
    if args.format == "json":
        payload = {
            "p": _json_num(args.p),
            "note": BETA_NOTE,
            "orientation": "rows = theta_deg, columns = phi_deg",
            "theta_deg": [_json_num(v) for v in grid_deg],
            "phi_deg": [_json_num(v) for v in grid_deg],
            "beta": [[_json_num(v) for v in row] for row in values],
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# {BETA_NOTE}; p={fmt(args.p)}; rows = theta_deg, columns = phi_deg\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta_deg/phi_deg"] + [fmt(v) for v in grid_deg])
        for th, row in zip(grid_deg, values):
            w.writerow([fmt(th)] + [fmt(v) for v in row])
        text = buf.getvalue()
    write_text(text, args.out)
    return EXIT_OK


def _state_from_args(args):
    if (args.p is None) == (args.tau is None):
        raise UsageError("give exactly one of --p or --tau")
    if args.tau is not None:
        p = sourcemodel.p_of_tau(args.tau, _load_params(args))
    else:
        p = args.p
    return p, qcore.noisy_state("mixed" if args.w < 1.0 else "colored", p, args.w)


def cmd_simulate(args) -> int:
    p, state = _state_from_args(args)
    settings = _fixed_settings(args) or bellopt.maximize_restricted(p).settings
    m = countsim.run_chsh(state, settings, _shots(args), args.seed)
    names = ("A0B0", "A0B1", "A1B0", "A1B1")
    rows = []
    for name, (a, b, sign), rec, est in zip(names, settings.pairs(), m.records, m.correlations):
        rows.append((name, math.degrees(a), math.degrees(b), int(sign), *rec.counts, est.e_hat, est.std_err, rec.seed))
    rows.append(("beta", None, None, None, None, None, None, None, m.beta, m.std_err, args.seed))
    columns = ("term", "a_deg", "b_deg", "sign", "n_pp", "n_pm", "n_mp", "n_mm", "e_hat", "std_err", "seed")
    meta = {
        "p": p, "w": args.w, "theta_deg": math.degrees(settings.theta), "phi_deg": math.degrees(settings.phi),
        "beta": m.beta, "abs_beta": m.abs_beta, "beta_stderr": m.std_err,
        "exact": m.exact, "shots": None if m.exact else args.shots, "note": BETA_NOTE,
    }
    meta = {k: (_json_num(v) if not isinstance(v, str) else v) for k, v in meta.items()}
    comments = [BETA_NOTE, f"p={fmt(p)} beta={fmt(m.beta)} abs_beta={fmt(m.abs_beta)} stderr={fmt(m.std_err)}"]
    write_text(table_text(columns, rows, args.format, comments, meta), args.out)
    return EXIT_OK


def cmd_tomo(args) -> int:
    p, state = _state_from_args(args)
    result = tomography.reconstruct(state, _shots(args), args.seed)
    payload = {k: _json_num(v) if not isinstance(v, dict) else v for k, v in result.to_dict().items()}
    payload["p_model"] = _json_num(p)
    write_text(json.dumps(payload, indent=2) + "\n", args.out)

    coeffs_out = args.coeffs_out
    if coeffs_out is None and args.out not in (None, "-"):
        out = Path(args.out)
        coeffs_out = str(out.with_name(out.stem + ".coeffs.csv"))
    if coeffs_out:
        coeffs = tomography.pauli_coefficients(result.rho_hat)
        rows = [(k[0], k[1], v) for k, v in coeffs.items()]
        write_text(table_text(("sigma_1", "sigma_2", "c"), rows, "csv"), coeffs_out)

    print(
        f"p={fmt(p)} fidelity={fmt(result.fidelity_to_reference)} purity={fmt(result.purity)} "
        f"fitted_p={fmt(result.fitted_p)} min_eig_raw={fmt(result.min_eig_raw)}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    params = _load_params(args)
    lines = [f"{k} = {fmt(v)}" for k, v in params.to_dict().items()]
    lines.append(f"kappa (resolved) = {fmt(params.kappa)}")
    lines.append(f"window half-width |D_G L|/2 (fs) = {fmt(params.half_window)}")
    write_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=d(None), help="source parameter file (INI, [source] section)")
    parser.add_argument("--seed", type=int, default=d(0), help="master RNG seed")
    parser.add_argument("--out", default=d(None), help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=d("csv"))
    parser.add_argument("--exact", action="store_true", default=d(False), help="infinite-shot mode, no sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bellsim", description="CHSH experiments on colored-noise two-photon states.")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bell-max", help="maximum CHSH value versus p")
    _common(p, suppress=True)
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--noise", choices=("colored", "white", "mixed"), default="colored")
    p.add_argument("--white", dest="noise", action="store_const", const="white", help="shorthand for --noise white")
    p.add_argument("--w", type=float, default=0.96, help="colored weight for --noise mixed")
    p.set_defaults(func=cmd_bell_max)

    p = sub.add_parser("delay-sweep", help="simulated CHSH measurements along a delay grid")
    _common(p, suppress=True)
    p.add_argument("--taus", help="comma-separated delays in fs")
    p.add_argument("--tau-min", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--tau-steps", type=int, default=11)
    p.add_argument("--shots", type=int, default=100_000, help="coincidences per setting")
    p.add_argument("--theta-deg", type=float)
    p.add_argument("--phi-deg", type=float)
    p.add_argument("--w", type=float, default=1.0, help="colored weight of the measured state")
    p.set_defaults(func=cmd_delay_sweep)

    p = sub.add_parser("surface", help="closed-form beta(theta, phi) grid")
    _common(p, suppress=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--steps", type=int, default=90, help="grid points per axis over [-90, 90) deg")
    p.set_defaults(func=cmd_surface)

    for name, func, default_shots, help_ in (
        ("simulate", cmd_simulate, 100_000, "one simulated CHSH run"),
        ("tomo", cmd_tomo, 10_000, "state tomography of a simulated state"),
    ):
        p = sub.add_parser(name, help=help_)
        _common(p, suppress=True)
        p.add_argument("--p", type=float)
        p.add_argument("--tau", type=float, help="delay in fs (needs --config)")
        p.add_argument("--shots", type=int, default=default_shots)
        p.add_argument("--w", type=float, default=1.0, help="colored weight of the state")
        if name == "simulate":
            p.add_argument("--theta-deg", type=float)
            p.add_argument("--phi-deg", type=float)
        else:
            p.add_argument("--coeffs-out", help="Pauli coefficient CSV (default: next to --out)")
        p.set_defaults(func=func)

    p = sub.add_parser("validate", help="parse a source config and echo resolved parameters")
    _common(p, suppress=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "shots", 1) is not None and getattr(args, "shots", 1) <= 0:
            raise UsageError("--shots must be positive")
        return args.func(args)
    except (UsageError, sourcemodel.ConfigError) as exc:
        print(f"bellsim {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(f"bellsim {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
