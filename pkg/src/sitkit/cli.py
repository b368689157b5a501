"""Command-line front end: ``sitkit {power,mde,samplesize,compare,simulate}``.

Exit codes: 0 success, 2 invalid input, 3 a simulation diagnostic failed.

Table output prints one header line and one value line with a fixed column
order per command (floats to 6 significant digits); ``--format json`` prints
the same fields at full precision.

    power       theta sigma_total nu power [power_target meets_target]
    mde         mde sigma_total nu power_at_mde
    samplesize  n_control n_exposed n_total power_at_plan mde_at_plan
    compare     delta_R delta_S theta_R theta_S margin verdict
                [delta bound_min_n special_case_min_n]
    simulate    design scenario replicates rejection_rate ci_low ci_high mean_d_bar
                mean_d1 mean_d2, then one line per diagnostic
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from . import compare as cmp
from .power import PlanningGroup, min_detectable_effect, min_sample_equal, min_sample_ratio, power, welch_df
from .config import ConfigError, RunSettings, load_config, parse_design, parse_population, parse_run, parse_scenario, parse_test
from .model import Sided, TestConfig, to_dict
from .sim.runner import estimate_power, write_report

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DIAGNOSTIC = 3


class InputError(Exception):
    pass


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    if value is None:
        return "-"
    return str(value)


def _emit(record: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(record, indent=2) + "\n")
        return
    cells = [_fmt(v) for v in record.values()]
    widths = [max(len(k), len(c)) for k, c in zip(record, cells)]
    out.write("  ".join(k.ljust(w) for k, w in zip(record, widths)).rstrip() + "\n")
    out.write("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip() + "\n")


def _group(text: str) -> tuple[int, float, float]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected n:variance[:weight], got {text!r}")
    try:
        n = int(parts[0])
        variance = float(parts[1])
        weight = float(parts[2]) if len(parts) == 3 else 1.0
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n:variance[:weight], got {text!r}") from None
    return n, variance, weight


def _ratio(text: str) -> tuple[float, float]:
    parts = text.split(":")
    try:
        k1, k2 = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected k1:k2, got {text!r}") from None
    return k1, k2


def _test_config(args) -> TestConfig:
    target = args.power_target if args.power_target is not None else 0.8
    try:
        return TestConfig(args.alpha, target, Sided(args.sided))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _planning_groups(specs) -> list[PlanningGroup]:
    if not specs:
        raise InputError("at least one --group n:variance[:weight] is required")
    try:
        return [PlanningGroup(f"g{i}", v, n=n, weight=w) for i, (n, v, w) in enumerate(specs)]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _plan_stats(groups) -> tuple[float, float]:
    variances = [g.weighted_variance for g in groups]
    sizes = [g.n for g in groups]
    total = math.fsum(v / n for v, n in zip(variances, sizes))
    return math.sqrt(total), welch_df(variances, sizes)


def cmd_power(args) -> int:
    if not args.theta > 0:
        raise InputError(f"--theta must be positive, got {args.theta}")
    config = _test_config(args)
    groups = _planning_groups(args.group)
    value = power(args.theta, config, groups)
    se, nu = _plan_stats(groups)
    record = {"theta": args.theta, "sigma_total": se, "nu": nu, "power": value}
    if args.power_target is not None:
        record["power_target"] = args.power_target
        record["meets_target"] = value >= args.power_target
    _emit(record, args.format)
    return EXIT_OK


def cmd_mde(args) -> int:
    config = _test_config(args)
    groups = _planning_groups(args.group)
    mde = min_detectable_effect(config, groups)
    se, nu = _plan_stats(groups)
    check = power(mde, config, groups) if mde > 0 else 1.0
    _emit({"mde": mde, "sigma_total": se, "nu": nu, "power_at_mde": check}, args.format)
    return EXIT_OK


def cmd_samplesize(args) -> int:
    if not args.theta > 0:
        raise InputError(f"--theta must be positive, got {args.theta}")
    config = _test_config(args)
    control = list(args.variance or [])
    exposed = list(args.exposed_variance or [])
    if not control and not exposed:
        raise InputError("at least one --variance is required")
    if any(not v >= 0 for v in control + exposed):
        raise InputError("variances must be nonnegative")
    if args.ratio is None:
        n = min_sample_equal(args.theta, config, control + exposed)
        n_control = n_exposed = n
    else:
        k1, k2 = args.ratio
        if not (k1 > 0 and k2 > 0):
            raise InputError("--ratio coefficients must be positive")
        n_control, n_exposed = min_sample_ratio(args.theta, config, control, exposed, k1, k2)
    groups = [PlanningGroup(f"c{i}", v, n=n_control) for i, v in enumerate(control)]
    groups += [PlanningGroup(f"e{i}", v, n=n_exposed) for i, v in enumerate(exposed)]
    record = {
        "n_control": n_control,
        "n_exposed": n_exposed,
        "n_total": n_control * len(control) + n_exposed * len(exposed),
        "power_at_plan": power(args.theta, config, groups),
        "mde_at_plan": min_detectable_effect(config, groups),
    }
    _emit(record, args.format)
    return EXIT_OK


def _test_overrides(args) -> dict:
    return {"alpha": args.alpha, "power_target": args.power_target, "sided": args.sided}


def cmd_compare(args) -> int:
    data = load_config(args.config)
    pop = parse_population(data)
    config = parse_test(data, _test_overrides(args))
    report = cmp.compare_designs(pop, config)
    record = to_dict(report)
    record.pop("sit_superior")
    record["verdict"] = "superior" if report.sit_superior else "not superior"
    if args.bound:
        p = pop.params
        delta = args.delta if args.delta is not None else (p.mu_I2 - p.mu_B2) - (p.mu_I1 - p.mu_B1)
        record["delta"] = delta
        try:
            record["bound_min_n"] = cmp.conversion_bound_min_n(delta, config)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        if pop.n_o == 0 and pop.n1 == pop.n2 and delta > 0:
            variances = tuple(p.variance(k) for k in ("I1", "B1", "I2", "B2"))
            record["special_case_min_n"] = cmp.special_case_min_n(
                p.mu_I1, p.mu_B1, p.mu_I2, p.mu_B2, variances, config
            )
    _emit(record, args.format)
    return EXIT_OK


def cmd_simulate(args) -> int:
    data = load_config(args.config)
    pop = parse_population(data)
    config = parse_test(data, _test_overrides(args))
    mode = parse_design(data)
    scenario = parse_scenario(data)
    run: RunSettings = parse_run(
        data,
        {
            "replicates": args.replicates,
            "seed": args.seed,
            "output_dir": args.output_dir,
            "format": args.format,
            "workers": args.workers,
        },
    )
    try:
        scenario.check_design(mode)
    except ValueError as exc:
        raise ConfigError("scenario.kind", str(exc)) from None
    if run.replicates < 100:
        raise ConfigError("run.replicates", "need at least 100 replicates")
    report = estimate_power(pop, mode, scenario, config, run.replicates, run.seed, workers=run.workers)
    json_path, csv_path = write_report(report, run.output_dir)
    if run.format == "json":
        sys.stdout.write(report.to_json() + "\n")
    else:
        _emit(
            {
                "design": report.design,
                "scenario": report.scenario,
                "replicates": report.replicates,
                "rejection_rate": report.rejection_rate,
                "ci_low": report.rejection_ci[0],
                "ci_high": report.rejection_ci[1],
                "mean_d_bar": report.mean_d_bar,
                "mean_d1": report.mean_d1,
                "mean_d2": report.mean_d2,
            },
            "table",
        )
        for d in report.diagnostics:
            print(f"diagnostic {d.name}: alarm_rate={_fmt(d.statistic)} p={_fmt(d.p_value)} {d.status.value}")
        print(f"wrote {json_path} and {csv_path}")
    return EXIT_DIAGNOSTIC if report.failed else EXIT_OK


def _add_test_flags(p: argparse.ArgumentParser, defaults: bool = True) -> None:
    p.add_argument("--alpha", type=float, default=0.05 if defaults else None, help="significance level")
    p.add_argument("--power-target", type=float, default=None, help="minimum power pi_min (default 0.8)")
    p.add_argument(
        "--sided",
        choices=[s.value for s in Sided],
        default=Sided.ONE_SIDED_GREATER.value if defaults else None,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sitkit",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("power", help="power of a plan against effect theta")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--group", type=_group, action="append", metavar="N:VAR[:W]")
    _add_test_flags(p)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("mde", help="minimum detectable effect of a plan")
    p.add_argument("--group", type=_group, action="append", metavar="N:VAR[:W]")
    _add_test_flags(p)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_mde)

    p = sub.add_parser("samplesize", help="minimum group size to detect theta")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--variance", type=float, action="append", help="control-group variance (all groups without --ratio)")
    p.add_argument("--exposed-variance", type=float, action="append", help="exposed-group variance")
    p.add_argument("--ratio", type=_ratio, metavar="K1:K2", help="exposed size = (K2/K1) x control size")
    _add_test_flags(p)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_samplesize)

    p = sub.add_parser("compare", help="analytic SIT vs restricted-population test comparison")
    p.add_argument("config", help="JSON config with population and test sections")
    p.add_argument("--bound", action="store_true", help="also print the worst-case conversion-rate bound on n")
    p.add_argument("--delta", type=float, help="incrementality difference for --bound (default: from the sets)")
    _add_test_flags(p, defaults=False)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="Monte Carlo power and diagnostics")
    p.add_argument("config", help="JSON config (population, test, design, scenario, run)")
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int, help=f"master seed (default {RunSettings.seed})")
    p.add_argument("--output-dir")
    p.add_argument("--workers", type=int)
    _add_test_flags(p, defaults=False)
    p.add_argument("--format", choices=("table", "json"))
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
