"""Command-line interface.

Three subcommands:

* ``simulate``   - write a CSV sample from one of the built-in generators
* ``attribute``  - read a CSV, attribute dependence on labels, predictions,
                   or residuals among the feature columns
* ``reproduce``  - run a named end-to-end experiment scenario

Exit codes: 0 success, 2 malformed configuration, 3 data validation failure,
4 numeric failure, 5 scenario checks failed (report still written). Errors
are emitted as a single JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .attribution import (
    AttributionRequest,
    ShapleyMethod,
    adl,
    adp,
    adr,
    bootstrap,
    compare,
    normalize,
)
from .errors import ConfigError, DepshapError
from .measures import CharacteristicSpec, Measure
from .reports import (
    new_report,
    read_numeric_csv,
    write_records_csv,
    write_report_json,
    write_sample_csv,
)
from .scenarios import SCENARIOS, run_scenario
from .simulate import gen_drift, gen_interaction, gen_quadratic, gen_xor

EXIT_CHECK_FAILED = 5

_METHOD_ALIASES = {"exact": "exact", "mc": "monte_carlo", "block": "block"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depshap",
        description="Shapley decompositions of non-linear dependence measures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write a CSV sample from a built-in generator")
    sim.add_argument("--dgp", required=True, choices=["quadratic", "xor", "drift", "interaction"])
    sim.add_argument("--n", type=int, required=True, help="number of rows")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--t", type=int, default=0, help="drift time index (drift only)")
    sim.add_argument(
        "--coeffs", default="0,2,4,6,8",
        help="comma-separated squared-term coefficients (quadratic only)",
    )
    sim.add_argument(
        "--full-width", action=argparse.BooleanOptionalAction, default=True,
        help="include the 46 low-signal drift features (drift only)",
    )
    sim.add_argument("--output-dir", default=".", help="directory for the CSV")

    att = sub.add_parser("attribute", help="attribute dependence among CSV feature columns")
    att.add_argument("--input", required=True, help="input CSV path")
    att.add_argument("--output-dir", default=".", help="directory for report and CSV output")
    att.add_argument("--label-col", default=None)
    att.add_argument("--pred-col", default=None)
    att.add_argument(
        "--target", default="labels", choices=["labels", "predictions", "residuals"],
        help="which target to attribute dependence on",
    )
    att.add_argument("--measure", default="dc", choices=[m.value for m in Measure])
    att.add_argument("--method", default="exact", choices=sorted(_METHOD_ALIASES))
    att.add_argument("--permutations", type=int, default=2000, help="Monte Carlo sample size")
    att.add_argument("--seed", type=int, default=0)
    att.add_argument("--bootstrap-resamples", type=int, default=0)
    att.add_argument("--resample-size", type=int, default=None)
    att.add_argument("--features", default=None, help="comma list restricting the player universe")
    att.add_argument(
        "--blocks", default=None,
        help="semicolon-separated comma lists of feature names (block method)",
    )
    att.add_argument("--normalize", action="store_true", help="also report values rescaled to sum 1")
    att.add_argument(
        "--delta", type=float, default=None,
        help="flag features whose label/prediction attributions differ by at least this",
    )
    att.add_argument("--hsic-bandwidth", type=float, default=None)
    att.add_argument("--aidc-ridge", type=float, default=0.0)

    rep = sub.add_parser("reproduce", help="run a named experiment scenario")
    rep.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--output-dir", default=".")

    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise ConfigError(f"--n must be positive, got {args.n}")
    if args.dgp == "quadratic":
        try:
            coefficients = tuple(float(c) for c in args.coeffs.split(","))
        except ValueError:
            raise ConfigError(f"--coeffs is not a comma list of numbers: {args.coeffs!r}") from None
        sample = gen_quadratic(args.n, coefficients, seed=args.seed)
        stem = f"quadratic_n{args.n}_seed{args.seed}"
    elif args.dgp == "xor":
        sample = gen_xor(args.n, seed=args.seed)
        stem = f"xor_n{args.n}_seed{args.seed}"
    elif args.dgp == "drift":
        if args.t < 0:
            raise ConfigError(f"--t must be nonnegative, got {args.t}")
        sample = gen_drift(args.n, t=args.t, seed=args.seed, full_width=args.full_width)
        stem = f"drift_n{args.n}_t{args.t}_seed{args.seed}"
    else:
        sample = gen_interaction(args.n, seed=args.seed)
        stem = f"interaction_n{args.n}_seed{args.seed}"
    path = Path(args.output_dir) / f"{stem}.csv"
    write_sample_csv(path, sample.x, sample.y)
    print(path)
    return 0


def _parse_blocks(text: str | None) -> tuple[tuple[str, ...], ...] | None:
    if text is None:
        return None
    groups = []
    for group in text.split(";"):
        names = tuple(name.strip() for name in group.split(",") if name.strip())
        if names:
            groups.append(names)
    if not groups:
        raise ConfigError(f"--blocks did not parse to any feature groups: {text!r}")
    return tuple(groups)


def _cmd_attribute(args: argparse.Namespace) -> int:
    needs_label = args.target in ("labels", "residuals")
    needs_pred = args.target in ("predictions", "residuals")
    if needs_label and args.label_col is None:
        raise ConfigError(f"--target {args.target} requires --label-col")
    if needs_pred and args.pred_col is None:
        raise ConfigError(f"--target {args.target} requires --pred-col")
    if args.delta is not None and (args.label_col is None or args.pred_col is None):
        raise ConfigError("--delta compares label and prediction attributions; both columns required")
    input_path = Path(args.input).resolve()
    out_dir = Path(args.output_dir)
    report_path = out_dir / "attribute_report.json"
    csv_path = out_dir / "attributions.csv"
    if input_path in (report_path.resolve(), csv_path.resolve()):
        raise ConfigError("output paths must be distinct from the input path")

    features, labels, predictions = read_numeric_csv(args.input, args.label_col, args.pred_col)
    spec = CharacteristicSpec(
        Measure(args.measure),
        hsic_bandwidth=args.hsic_bandwidth,
        aidc_ridge=args.aidc_ridge,
    )
    method = ShapleyMethod(
        kind=_METHOD_ALIASES[args.method],
        permutations=args.permutations,
        seed=args.seed,
        blocks=_parse_blocks(args.blocks),
    )
    scope = None
    if args.features:
        scope = tuple(name.strip() for name in args.features.split(",") if name.strip())
    request = AttributionRequest(
        features, labels=labels, predictions=predictions,
        spec=spec, method=method, feature_scope=scope,
    )
    run = {"labels": adl, "predictions": adp, "residuals": adr}[args.target]
    decomposition = run(request)
    records = decomposition.as_records()

    boot_info = None
    if args.bootstrap_resamples > 0:
        summary = bootstrap(
            request, args.target, args.bootstrap_resamples,
            resample_size=args.resample_size, seed=args.seed,
        )
        for record, banded in zip(records, summary.as_records()):
            record["lower"] = banded["lower"]
            record["upper"] = banded["upper"]
        boot_info = {
            "resamples": summary.resamples,
            "resample_size": summary.resample_size,
            "seed": summary.seed,
            "mode": summary.mode,
        }

    if args.normalize:
        scaled = normalize(decomposition)
        for record, value in zip(records, scaled):
            record["normalized_value"] = float(value)

    comparison = None
    if args.delta is not None:
        diff = compare(adp(request), adl(request), args.delta)
        comparison = {
            "delta": diff.delta,
            "diffs": {name: float(v) for name, v in zip(diff.feature_names, diff.diffs)},
            "flagged": list(diff.flagged_features),
        }

    report = new_report(
        "attribute",
        input=str(input_path),
        target_kind=args.target,
        measure=args.measure,
        method={
            "kind": method.kind,
            "permutations": method.permutations if method.kind == "monte_carlo" else None,
            "seed": method.seed,
            "blocks": [list(b) for b in method.blocks] if method.blocks else None,
        },
        feature_scope=list(scope) if scope else None,
        evaluations_used=decomposition.evaluations_used,
        marginal_terms=decomposition.marginal_terms,
        bootstrap=boot_info,
        comparison=comparison,
        features=records,
    )
    write_report_json(report_path, report)
    columns = ["name", "value"]
    for optional in ("standard_error", "lower", "upper", "normalized_value"):
        if any(optional in record for record in records):
            columns.append(optional)
    write_records_csv(csv_path, records, columns)
    print(report_path)
    print(csv_path)
    return 0


def _cmd_reproduce(args: argparse.Namespace) -> int:
    result = run_scenario(args.scenario, seed=args.seed, out_dir=args.output_dir)
    for check in result.checks:
        status = "pass" if check.passed else "FAIL"
        print(f"[{status}] {result.scenario}: {check.name} ({check.detail})")
    print(Path(args.output_dir) / f"{result.scenario}_report.json")
    return 0 if result.passed else EXIT_CHECK_FAILED


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "attribute":
            return _cmd_attribute(args)
        return _cmd_reproduce(args)
    except DepshapError as exc:
        line = json.dumps(
            {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        )
        print(line, file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
