"""Command-line interface: ``solve``, ``apply``, ``verify``, ``convergence`` and ``eigs``.

Settings come from flags or a YAML/JSON config file (``--config``); flags
override the file. All results are computed before anything is written, so a
failed run leaves no partial outputs.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .catalog import parse_K, parse_modes, parse_rhs
from .coeff_ops import frac_laplacian_eigenvalue
from .disk_basis import CoeffVec, index_grids, norm_sq_grid, sobolev_norm
from .errors import ConfigError, FracDiskError, NotSPDError, PreconditionError, SolveError
from .solver import (CLOSED_FORM, SolveConfig, WellPosednessWarning, _gram, apply_operator, evaluate_solution, solve,
                     trial_positions)
from .tables import coeff_table_text, csv_text, fmt, json_text
from .verify import run_suite

log = logging.getLogger("fracdisk")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_SOLVE = 0, 1, 2, 3

# key -> (type, default)
SETTINGS = {
    "alpha": (float, 1.5),
    "L": (int, 8),
    "N": (int, 8),
    "K": (str, "identity"),
    "f": (str, "mode:0,0,+1"),
    "u": (str, None),
    "seed": (int, 0),
    "tol": (float, 1e-10),
    "out": (str, "fracdisk_out"),
    "strict": (bool, False),
    "suite": (str, "all"),
    "Ns": (str, "4,8,16,32"),
    "ref_N": (int, None),
    "halo": (int, 2),
    "grid_r": (int, 11),
    "grid_phi": (int, 16),
    "quad_extra": (int, 0),
}


def load_config(path) -> dict:
    """Read a YAML/JSON mapping of settings, with line numbers in parse errors."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"{path}: parse error at {where}: {exc.problem}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping of settings")
    return data


def _coerce(key, value):
    typ, _ = SETTINGS[key]
    if value is None:
        return None
    if typ is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"field {key!r}: expected true/false, got {value!r}")
    if typ is int and isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"field {key!r}: expected an integer, got {value!r}")
    if typ is str and isinstance(value, (list, tuple)) and key == "Ns":
        value = ",".join(str(v) for v in value)
    try:
        return typ(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field {key!r}: expected {typ.__name__}, got {value!r}") from None


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and explicit flags (in increasing precedence)."""
    settings = {k: d for k, (_, d) in SETTINGS.items()}
    if args.config:
        for key, value in load_config(args.config).items():
            if key not in SETTINGS:
                raise ConfigError(f"{args.config}: unknown field {key!r}")
            settings[key] = _coerce(key, value)
    for key in SETTINGS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = _coerce(key, value)
    if not 1.0 < settings["alpha"] < 2.0:
        raise ConfigError(f"field 'alpha': must lie in (1, 2), got {settings['alpha']}")
    for key in ("L", "N"):
        if settings[key] < 0:
            raise ConfigError(f"field {key!r}: must be non-negative")
    return settings


def _meta(command, s, K=None):
    return {
        "command": command,
        "alpha": s["alpha"],
        "L": s["L"],
        "N": s["N"],
        "K": K if K is not None else s["K"],
        "seed": s["seed"],
        "version": __version__,
    }


def _solve_report_dict(rep):
    return {
        "residual": rep.residual,
        "infsup_measured": rep.infsup,
        "c2_theoretical": rep.c2_theory,
        "lambda_min": rep.lambda_min,
        "lambda_max": rep.lambda_max,
        "wellposed": rep.wellposed,
        "apriori": rep.apriori,
        "s_est": rep.s_est,
        "mode": rep.mode,
        "dimension": rep.dimension,
        "solution_norm_H1": sobolev_norm(rep.solution, 1.0),
    }


def _field_csv(u: CoeffVec, s, meta):
    r = np.linspace(0.0, 1.0, s["grid_r"])
    phi = 2.0 * np.pi * np.arange(s["grid_phi"]) / s["grid_phi"]
    rr, pp = np.meshgrid(r, phi, indexing="ij")
    vals = evaluate_solution(u, rr, pp)
    rows = zip(rr.ravel(), pp.ravel(), (rr * np.cos(pp)).ravel(), (rr * np.sin(pp)).ravel(), vals.ravel())
    return csv_text(["r", "phi", "x", "y", "value"], rows, meta)


def _solve_once(s, K, rhs, L, N, tol=None):
    cfg = SolveConfig(s["alpha"], L, N, K, rhs, tol=s["tol"] if tol is None else tol, strict=s["strict"],
                      quad_extra=s["quad_extra"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", WellPosednessWarning)
        rep = solve(cfg)
    for w in caught:
        log.warning("%s", w.message)
    return rep


def cmd_solve(s) -> tuple[dict, int]:
    K = parse_K(s["K"])
    rhs = parse_rhs(s["f"], s["alpha"])
    rep = _solve_once(s, K, rhs, s["L"], s["N"])
    meta = _meta("solve", s)
    report = {"meta": meta, "f": s["f"], "result": _solve_report_dict(rep), "timing": {"wall_time_s": rep.wall_time}}
    files = {
        "coeffs.csv": coeff_table_text(rep.solution, meta),
        "report.json": json_text(report),
        "field.csv": _field_csv(rep.solution, s, meta),
    }
    return files, EXIT_OK


def cmd_apply(s) -> tuple[dict, int]:
    if not s["u"]:
        raise ConfigError("field 'u': apply needs a solution given as 'l,n,mu:amp;...'")
    K = parse_K(s["K"])
    u = parse_modes(s["u"], s["alpha"], s["L"], s["N"])
    f = apply_operator(u, s["alpha"], K, halo=s["halo"], quad_extra=s["quad_extra"])
    meta = _meta("apply", s)
    report = {"meta": meta, "u": s["u"], "halo": s["halo"], "f_norm_L2": float(np.sqrt(f.l2_norm_sq()))}
    return {"coeffs.csv": coeff_table_text(f, meta), "report.json": json_text(report)}, EXIT_OK


def cmd_verify(s) -> tuple[dict, int]:
    results = run_suite(s["alpha"], s["suite"], seed=s["seed"])
    meta = _meta("verify", s, K="identity")
    meta["suite"] = s["suite"]
    rows = [(r.name, fmt(r.alpha), r.measured, r.bound, r.margin,
             "exploratory" if r.passed is None else str(r.passed).lower()) for r in results]
    files = {
        "verify_summary.csv": csv_text(["check", "alpha", "measured", "bound", "margin", "pass"], rows, meta),
        "report.json": json_text({"meta": meta, "checks": [r.to_dict() for r in results]}),
    }
    failed = [r.name for r in results if r.passed is False]
    for r in results:
        status = "exploratory" if r.passed is None else ("PASS" if r.passed else "FAIL")
        log.info("%-26s %-11s measured=%.6g bound=%.6g", r.name, status, r.measured, r.bound)
    return files, (EXIT_CHECK_FAILED if failed else EXIT_OK)


def _parse_Ns(text):
    try:
        Ns = sorted({int(v) for v in str(text).split(",") if v.strip()})
    except ValueError:
        raise ConfigError(f"field 'Ns': expected comma-separated integers, got {text!r}") from None
    if not Ns or Ns[0] < 1:
        raise ConfigError("field 'Ns': need positive truncations")
    return Ns


def _pad_diff_norm(a: CoeffVec, b: CoeffVec) -> float:
    L, N = max(a.L, b.L), max(a.N, b.N)
    return sobolev_norm(a.with_truncation(L, N) - b.with_truncation(L, N), 1.0)


def cmd_convergence(s) -> tuple[dict, int]:
    K = parse_K(s["K"])
    Ns = _parse_Ns(s["Ns"])
    meta = _meta("convergence", s)
    meta["L"] = meta["N"] = Ns[-1]
    meta["Ns"] = ",".join(map(str, Ns))
    if s["u"]:
        truth = parse_modes(s["u"], s["alpha"])
        rhs = apply_operator(truth, s["alpha"], K, halo=s["halo"], quad_extra=s["quad_extra"])
        reference, source = truth, "manufactured"
    else:
        rhs = parse_rhs(s["f"], s["alpha"])
        ref_N = s["ref_N"] or (2 * Ns[-1] if K.constant else Ns[-1])
        reference = _solve_once(s, K, rhs, ref_N, ref_N).solution
        source = f"self-convergence against N={ref_N}"
    rows, prev = [], None
    for n in Ns:
        sol = _solve_once(s, K, rhs, n, n).solution
        err = _pad_diff_norm(sol, reference)
        slope = float("nan")
        if prev is not None and prev[1] > 0 and err > 0:
            slope = -np.log(err / prev[1]) / np.log(n / prev[0])
        rows.append((n, err, slope))
        prev = (n, err)
    meta["reference"] = source.replace(" ", "_")
    table = csv_text(["N", "error", "slope"], rows, meta)
    report = {"meta": meta, "rows": [{"N": n, "error": e, "slope": sl} for n, e, sl in rows], "reference": source}
    return {"convergence.csv": table, "report.json": json_text(report)}, EXIT_OK


def cmd_eigs(s) -> tuple[dict, int]:
    alpha, L, N = s["alpha"], s["L"], s["N"]
    l, n, _ = index_grids(L, N)
    lam = frac_laplacian_eigenvalue(l[0], n[0], alpha)
    K = parse_K("identity")
    B = _gram(alpha, L, N, K, CLOSED_FORM, 0).diagonal()
    pos = trial_positions(L, N)
    measured = np.zeros(2 * (L + 1) * (N + 1))
    measured[pos] = B / norm_sq_grid(alpha / 2.0, L, N).reshape(-1)[pos]
    measured = measured.reshape(2, L + 1, N + 1)[0]
    rows = [(li, ni, lam[li, ni], measured[li, ni]) for li in range(L + 1) for ni in range(N + 1)]
    meta = _meta("eigs", s, K="identity")
    return {"eigs.csv": csv_text(["l", "n", "lambda", "lambda_weak_form"], rows, meta)}, EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "apply": cmd_apply,
    "verify": cmd_verify,
    "convergence": cmd_convergence,
    "eigs": cmd_eigs,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracdisk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fracdisk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON file with settings; flags override it")
    common.add_argument("--alpha", type=float, help="fractional order in (1, 2)")
    common.add_argument("--L", type=int, help="highest harmonic degree")
    common.add_argument("--N", type=int, help="highest radial degree")
    common.add_argument("--K", help="diffusivity selector (identity, diag:k1,k2, rotated:k1,k2,theta, radial:eps, angular:eps)")
    common.add_argument("--seed", type=int, help="random seed recorded in all outputs")
    common.add_argument("--tol", type=float, help="relative residual tolerance of the linear solve")
    common.add_argument("--out", help="output directory")
    common.add_argument("--strict", action="store_const", const=True, help="fail when the contrast condition is violated")
    common.add_argument("--quad-extra", dest="quad_extra", type=int, help="extra quadrature nodes for variable K")
    common.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("solve", parents=[common], help="solve for a catalog right-hand side")
    p.add_argument("--f", help="right-hand side selector (mode:l,n,mu[,amp], poly:i,j, gauss:c, absx, const:c)")
    p.add_argument("--grid-r", dest="grid_r", type=int, help="radial samples in field.csv")
    p.add_argument("--grid-phi", dest="grid_phi", type=int, help="angular samples in field.csv")

    p = sub.add_parser("apply", parents=[common], help="apply the forward operator to a finite expansion")
    p.add_argument("--u", help="solution modes 'l,n,mu:amp;...'")
    p.add_argument("--halo", type=int, help="extra rows/columns of the image truncation")

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("--suite", choices=["constants", "operators", "solver", "exploratory", "all"])

    p = sub.add_parser("convergence", parents=[common], help="error against truncation")
    p.add_argument("--f", help="right-hand side selector")
    p.add_argument("--u", help="manufactured solution modes 'l,n,mu:amp;...' (overrides --f)")
    p.add_argument("--Ns", help="comma-separated truncations, default 4,8,16,32")
    p.add_argument("--ref-N", dest="ref_N", type=int, help="reference truncation for self-convergence")
    p.add_argument("--halo", type=int)

    sub.add_parser("eigs", parents=[common], help="tabulate pseudo-eigenvalues")
    return parser


def write_outputs(out_dir, files: dict):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose or args.command == "verify" else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        settings = resolve_settings(args)
        files, code = COMMANDS[args.command](settings)
    except (ConfigError, PreconditionError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (SolveError, NotSPDError) as exc:
        extra = f" (condition estimate {exc.condition:.3g})" if getattr(exc, "condition", None) else ""
        log.error("%s%s", exc, extra)
        return EXIT_SOLVE
    except FracDiskError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    write_outputs(settings["out"], files)
    for name in files:
        print(Path(settings["out"]) / name)
    return code


if __name__ == "__main__":
    sys.exit(main())
