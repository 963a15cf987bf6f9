"""Command-line front end: combine, simulate, select-space, diagnose.

Exit codes: 0 success, 1 solver failure (itemized on stderr), 2 input or
usage errors.  A --config file of key=value lines supplies defaults that
explicit flags override.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .conformal import ols_group_trainer, select_space
from .diagnostics import (check_sparsity_conditions, check_uniqueness,
                          diagnostics_report)
from .errors import PanelError, WeightscapeError
from .io import read_loo_csv, read_panel_csv, solution_to_json
from .methods import (CrossValidation, Eigenvector, Performance, parse_method)
from .panel import ForecastPanel
from .simulation import (BETA_PROFILES, DEFAULT_BETA_PROFILE,
                         DEFAULT_BETA_SCALE, beta_profile, build_candidate_sets,
                         combos_for_methods, emit_tables, run_grid)
from .spaces import WeightSpace
from . import estimators

_COMPAT = {
    "reg": ("A", "Aprime", "B", "C", "D", "E"),
    "ma": ("A", "B", "C", "D", "E"),
    "kl": ("A", "B", "C", "D", "E"),
    "cv": ("A", "B", "C", "D", "E"),
    "pf:saic": ("D",),
    "pf:sbic": ("D",),
    "pf:bg": ("D",),
    "eig": ("E",),
}


def _parse_list(raw: str) -> list[str]:
    return [tok.strip() for tok in raw.split(",") if tok.strip()]


def _parse_spaces(raw: str) -> list[WeightSpace]:
    return [WeightSpace.parse(tok) for tok in _parse_list(raw)]


def _safe_name(token: str) -> str:
    return token.replace(":", "-")


def _fit_one(token: str, space: WeightSpace, panel: ForecastPanel):
    method = parse_method(token)
    if isinstance(method, CrossValidation):
        return estimators.fit_cv(panel, space)
    if isinstance(method, Eigenvector):
        return estimators.fit_eigenvector(panel)
    if isinstance(method, Performance):
        return estimators.fit_performance(panel, method)
    if token in ("ma", "kl"):
        inputs = estimators.mallows_inputs(panel)
        return estimators.fit_generalized_mallows(panel, inputs, space)
    return estimators.fit_regression(panel, space)


def _method_space_pairs(methods: list[str], spaces: list[WeightSpace],
                        err) -> list[tuple[str, WeightSpace]]:
    pairs = []
    skipped = []
    for token in methods:
        if token not in _COMPAT:
            raise PanelError(f"unknown method token {token!r}")
        for space in spaces:
            if space.value in _COMPAT[token]:
                pairs.append((token, space))
            else:
                skipped.append(f"{token}/{space.value}")
    if skipped:
        print(f"note: skipping incompatible pairs: {', '.join(skipped)}",
              file=err)
    if not pairs:
        raise PanelError("no compatible (method, space) pairs requested")
    return pairs


def _load_panel(args) -> ForecastPanel:
    panel = read_panel_csv(args.input, getattr(args, "metadata", None))
    if getattr(args, "loo", None):
        panel = read_loo_csv(args.loo, panel)
    return panel


def cmd_combine(args) -> int:
    out, err = sys.stdout, sys.stderr
    panel = _load_panel(args)
    spaces = _parse_spaces(args.spaces)
    methods = _parse_list(args.methods)
    pairs = _method_space_pairs(methods, spaces, err)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    failures = []
    for token, space in pairs:
        try:
            sol = _fit_one(token, space, panel)
            report = diagnostics_report(sol, panel, max_lag=args.max_lag)
        except WeightscapeError as exc:
            failures.append((token, space, str(exc)))
            continue
        path = out_dir / f"{_safe_name(token)}_{space.value}.json"
        path.write_text(solution_to_json(sol, report) + "\n", encoding="utf-8")
        print(f"wrote {path}", file=out)
    if failures:
        for token, space, msg in failures:
            print(f"failed: {token}/{space.value}: {msg}", file=err)
        return 1
    return 0


def cmd_diagnose(args) -> int:
    out, err = sys.stdout, sys.stderr
    panel = _load_panel(args)
    spaces = _parse_spaces(args.spaces)
    methods = _parse_list(args.methods)
    pairs = _method_space_pairs(methods, spaces, err)
    rows = []
    failures = []
    for token, space in pairs:
        method = parse_method(token)
        entry: dict = {"method": token, "space": space.value}
        try:
            uniq = check_uniqueness(method, space, panel)
            entry["uniqueness"] = uniq.to_dict()
            if space in (WeightSpace.C, WeightSpace.D):
                sol = _fit_one(token, space, panel)
                entry["sparsity"] = check_sparsity_conditions(
                    sol, panel, method).to_dict()
        except WeightscapeError as exc:
            failures.append((token, space, str(exc)))
            entry["error"] = str(exc)
        rows.append(entry)
        uniq_txt = entry.get("uniqueness", {})
        holds = uniq_txt.get("holds")
        lam = uniq_txt.get("lambda_min_scaled")
        msg = f"{token}/{space.value}: unique={holds}"
        if lam is not None:
            msg += f" lambda_min_scaled={lam:.6e}"
        if uniq_txt.get("multiplicity") is not None:
            msg += f" multiplicity={uniq_txt['multiplicity']}"
        if "sparsity" in entry:
            msg += (f" sparsity={entry['sparsity']['measured_pct']:.2f}%"
                    f" forced={entry['sparsity']['sparsity_forced']}")
        print(msg, file=out)
    payload = json.dumps({"panel": str(args.input), "reports": rows},
                         sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        print(f"wrote {args.out}", file=out)
    if failures:
        for token, space, msg in failures:
            print(f"failed: {token}/{space.value}: {msg}", file=err)
        return 1
    return 0


def cmd_select_space(args) -> int:
    out, err = sys.stdout, sys.stderr
    import csv

    path = Path(args.input)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if "y" not in header:
            raise PanelError(f"{path}: no 'y' column in header")
        y_col = header.index("y")
        rows = [[float(c) for c in row] for row in reader if row]
    data = np.asarray(rows, dtype=float)
    y = data[:, y_col]
    X = np.delete(data, y_col, axis=1)
    spaces = _parse_spaces(args.spaces)
    groups = build_candidate_sets(args.candidate_set, X.shape[1])
    trainer = ols_group_trainer(groups)
    result = select_space(X, y, trainer, spaces, alpha=args.alpha, seed=args.seed)
    payload = json.dumps(result.to_dict(), sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        print(f"wrote {args.out}", file=out)
    else:
        print(payload, file=out)
    return 0


def cmd_simulate(args) -> int:
    out, err = sys.stdout, sys.stderr
    cases = [int(v) for v in _parse_list(args.cases)]
    csets = [int(v) for v in _parse_list(args.sets)]
    if args.beta_profile.startswith("custom-file:"):
        beta = np.loadtxt(args.beta_profile.split(":", 1)[1], dtype=float).reshape(-1)
        if beta.size != args.d:
            raise PanelError(f"custom beta has length {beta.size}, expected d={args.d}")
    else:
        beta = beta_profile(args.beta_profile, args.d, args.beta_scale)
    combos = combos_for_methods(_parse_list(args.methods))
    results = run_grid(cases, csets, n_train=args.t, n_test=args.t_test,
                       d=args.d, beta=beta, seed=args.seed,
                       replications=args.reps, combos=combos)
    paths = emit_tables(results, args.out_dir, fmt=args.format)
    for p in paths:
        print(f"wrote {p}", file=out)
    failures = [f"case {c} set {s}: {line}"
                for (c, s), res in results.items() for line in res.failures()]
    if failures:
        for line in failures:
            print(f"failed: {line}", file=err)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weightscape",
        description="Forecast combination under explicit weight constraints")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", default=None,
                        help="key=value file supplying option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    combine = sub.add_parser("combine", help="estimate weights on a panel CSV")
    combine.add_argument("--input", required=True, help="panel CSV (y,f1..fS)")
    combine.add_argument("--metadata", default=None,
                         help="JSON sidecar with q and labels")
    combine.add_argument("--loo", default=None,
                         help="leave-one-out forecasts CSV (needed for cv)")
    combine.add_argument("--methods", default="reg",
                         help="comma list: reg,ma,kl,cv,pf:saic,pf:sbic,pf:bg,eig")
    combine.add_argument("--spaces", default="A,Aprime,B,C,D,E",
                         help="comma list of weight spaces")
    combine.add_argument("--out", required=True, help="output directory")
    combine.add_argument("--max-lag", type=int, default=None,
                         help="autocorrelation lags in diagnostics")
    combine.set_defaults(func=cmd_combine)

    diagnose = sub.add_parser("diagnose",
                              help="uniqueness and sparsity-condition reports")
    diagnose.add_argument("--input", required=True)
    diagnose.add_argument("--metadata", default=None)
    diagnose.add_argument("--loo", default=None)
    diagnose.add_argument("--methods", default="reg")
    diagnose.add_argument("--spaces", default="A,B,C,D,E")
    diagnose.add_argument("--out", default=None, help="JSON report path")
    diagnose.set_defaults(func=cmd_diagnose)

    select = sub.add_parser("select-space",
                            help="conformal selection of a weight space")
    select.add_argument("--input", required=True,
                        help="CSV with a 'y' column; the rest are regressors")
    select.add_argument("--alpha", type=float, default=0.1)
    select.add_argument("--seed", type=int, default=0)
    select.add_argument("--spaces", default="A,B,C,D,E")
    select.add_argument("--candidate-set", type=int, default=1,
                        help="candidate grouping pattern (1..4)")
    select.add_argument("--out", default=None, help="JSON result path")
    select.set_defaults(func=cmd_select_space)

    simulate = sub.add_parser("simulate", help="run the Monte Carlo grid")
    simulate.add_argument("--cases", default="1,2,3,4")
    simulate.add_argument("--sets", default="1,2,3,4")
    simulate.add_argument("--t", type=int, default=2000)
    simulate.add_argument("--t-test", type=int, default=1000)
    simulate.add_argument("--d", type=int, default=42)
    simulate.add_argument("--reps", type=int, default=20)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--beta-profile", default=DEFAULT_BETA_PROFILE,
                          help=f"{'|'.join(BETA_PROFILES)}|custom-file:PATH")
    simulate.add_argument("--beta-scale", type=float, default=DEFAULT_BETA_SCALE)
    simulate.add_argument("--methods", default="reg,ma,pf:saic,pf:sbic,eig")
    simulate.add_argument("--out-dir", required=True)
    simulate.add_argument("--format", default="csv", choices=("csv", "markdown"))
    simulate.set_defaults(func=cmd_simulate)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold --config key=value pairs in as defaults (flags still win)."""
    path = None
    i = None
    for j, tok in enumerate(argv):
        if tok == "--config":
            if j + 1 >= len(argv):
                parser.error("--config needs a path")
            i, path = j, Path(argv[j + 1])
            tail = argv[j + 2:]
            head = argv[:j]
            break
        if tok.startswith("--config="):
            i, path = j, Path(tok.split("=", 1)[1])
            tail = argv[j + 1:]
            head = argv[:j]
            break
    if path is None:
        return argv
    if not path.exists():
        parser.error(f"config file {path} does not exist")
    given = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
    extra: list[str] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            parser.error(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        flag = f"--{key.replace('_', '-')}"
        if flag in given:
            continue  # explicit flag wins
        extra.extend([flag, value])
    # config-derived options go right after the subcommand
    return head + tail + extra


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except PanelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WeightscapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
