"""Command-line front end.

Subcommands: ``calibrate``, ``clear``, ``simulate``, ``inject``, ``sweep``.
Exit codes: 0 on success, 2 for configuration/usage errors, 3 when a
numerical routine fails to converge or a target is infeasible.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import calibration as cal
from .clearing import ClearingError, ClearingParams, clear_fictitious_default, clear_picard
from .harness import (SWEEP_AXES, SIMULATE_CSV_HEADER, ConfigError,
                      ExperimentConfig, config_from_dict, run_sweep,
                      rows_to_csv, rows_to_json)
from .network import (FinancialNetwork, build_monopoly_network,
                      build_split_network, relative_liabilities)
from .risk import expected_shortfall, loss_distribution
from .shocks import sample_scenarios

_USAGE_EXIT = 2
_NUMERIC_EXIT = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="JSON experiment config; explicit flags override it")
    parser.add_argument("--seed", type=int, default=None,
                        help="scenario-set seed (default 1337)")
    parser.add_argument("--scenarios", type=int, default=None,
                        help="number of shock scenarios (default 10000)")
    parser.add_argument("--out", metavar="PATH", default=None,
                        help="write output here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv", "text"),
                        default=None, help="output format")


def _add_shock_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mean-drop", type=float, default=None,
                        help="average fractional asset drop (default 0.27)")
    parser.add_argument("--correlation", type=float, default=None,
                        help="cross-bank shock correlation (default 0.25)")
    parser.add_argument("--concentration", type=float, default=None,
                        help="beta concentration a+b (default 10)")
    parser.add_argument("--bankruptcy-cost", type=float, default=None,
                        help="recovery haircut on a defaulted bank (default 0.10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gringotts",
        description="Wizarding-economy bank network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="derive the economy's size and rates")
    _add_common(p)

    p = sub.add_parser("clear", help="clear one scenario of the network")
    _add_common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--network", metavar="PATH",
                       help="network JSON file")
    group.add_argument("--system", choices=("monopoly", "split"),
                       help="use a built-in calibrated network")
    p.add_argument("--multipliers", metavar="PATH", default=None,
                   help="JSON list of per-bank asset multipliers (default all 1)")
    p.add_argument("--bankruptcy-cost", type=float, default=None,
                   help="sets both recovery factors to 1 - cost")
    p.add_argument("--alpha", type=float, default=None,
                   help="recovery factor on external assets")
    p.add_argument("--beta", type=float, default=None,
                   help="recovery factor on interbank receipts")
    p.add_argument("--method", choices=("fd", "picard"), default="fd",
                   help="fd: direct default-set solve; picard: iteration")
    p.add_argument("--max-iterations", type=int, default=None,
                   help="iteration cap for --method picard")

    p = sub.add_parser("simulate", help="sample shocks and report loss tails")
    _add_common(p)
    _add_shock_flags(p)
    p.add_argument("--system", choices=("monopoly", "split", "both"),
                   default=None)
    p.add_argument("--dump-multipliers", metavar="PATH", default=None,
                   help="also write the sampled multipliers as CSV")

    p = sub.add_parser("inject", help="minimal capital injection for a tail target")
    _add_common(p)
    _add_shock_flags(p)
    p.add_argument("--system", choices=("monopoly", "split", "both"),
                   default=None)
    p.add_argument("--network", metavar="PATH", default=None,
                   help="inject into a custom network instead of a built-in")
    p.add_argument("--level", type=float, default=0.05,
                   help="tail fraction for expected shortfall (default 0.05)")
    p.add_argument("--threshold", type=float, default=None,
                   help="tail-loss cap in galleons (default GDP/100)")

    p = sub.add_parser("sweep", help="sweep one axis, solving every level")
    _add_common(p)
    _add_shock_flags(p)
    p.add_argument("--system", choices=("monopoly", "split", "both"),
                   default=None)
    p.add_argument("--axis", choices=SWEEP_AXES, default=None)
    p.add_argument("--from", dest="sweep_from", type=float, default=None)
    p.add_argument("--to", dest="sweep_to", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--levels", type=float, nargs="+", default=None,
                   help="tail fractions to solve (default 0.01 0.05 0.10)")
    return parser


def _load_config(args) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config: must be a JSON object")
    overrides = {
        "seed": getattr(args, "seed", None),
        "scenarios": getattr(args, "scenarios", None),
        "mean_drop": getattr(args, "mean_drop", None),
        "correlation": getattr(args, "correlation", None),
        "concentration": getattr(args, "concentration", None),
        "bankruptcy_cost": getattr(args, "bankruptcy_cost", None),
        "system": getattr(args, "system", None),
        "levels": getattr(args, "levels", None),
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if getattr(args, "axis", None) is not None or "sweep" in data:
        sweep = dict(data.get("sweep") or {})
        if getattr(args, "axis", None) is not None:
            sweep["axis"] = args.axis
        if getattr(args, "sweep_from", None) is not None:
            sweep["from"] = args.sweep_from
        if getattr(args, "sweep_to", None) is not None:
            sweep["to"] = args.sweep_to
        if getattr(args, "steps", None) is not None:
            sweep["steps"] = args.steps
        data["sweep"] = sweep
    return config_from_dict(data)


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_calibrate(args) -> int:
    config = _load_config(args)
    calib = cal.derive_gdp(config.calibration)
    rates = cal.DEFAULT_RATES
    payload = {
        "education_budget_galleons": calib.education_budget_galleons,
        "gdp_galleons": calib.gdp_galleons,
        "gdp_per_capita_galleons": calib.gdp_per_capita_galleons,
        "loss_threshold_galleons": calib.loss_threshold_galleons,
        "total_bank_assets_galleons": calib.total_bank_assets_galleons,
        "rates": {
            "official_gbp_per_galleon": rates.official_gbp_per_galleon,
            "ppp_usd_per_galleon": rates.ppp_usd_per_galleon,
            "ppp_gbp_per_galleon": rates.ppp_gbp_per_galleon,
        },
        "gdp_official_gbp": cal.convert(calib.gdp_galleons, "official-GBP"),
        "gdp_ppp_usd": cal.convert(calib.gdp_galleons, "ppp-USD"),
        "gdp_ppp_gbp": cal.convert(calib.gdp_galleons, "ppp-GBP"),
    }
    fmt = args.format or "json"
    if fmt == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = []
        for key, value in payload.items():
            if isinstance(value, dict):
                lines.extend(f"{key}.{k} = {v!r}" for k, v in value.items())
            else:
                lines.append(f"{key} = {value!r}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def _resolve_clear_params(args) -> ClearingParams:
    kwargs = {}
    if args.max_iterations is not None:
        kwargs["max_iterations"] = args.max_iterations
    if args.bankruptcy_cost is not None:
        if args.alpha is not None or args.beta is not None:
            raise ConfigError(
                "--bankruptcy-cost cannot be combined with --alpha/--beta")
        return ClearingParams.from_bankruptcy_cost(args.bankruptcy_cost, **kwargs)
    if args.alpha is not None:
        kwargs["alpha"] = args.alpha
    if args.beta is not None:
        kwargs["beta"] = args.beta
    return ClearingParams(**kwargs)


def _cmd_clear(args) -> int:
    config = _load_config(args)
    if args.network:
        net = FinancialNetwork.load(args.network)
    else:
        calib = cal.derive_gdp(config.calibration)
        builder = (build_monopoly_network if args.system == "monopoly"
                   else build_split_network)
        net = builder(calib)
    if args.multipliers:
        with open(args.multipliers, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        mult = np.asarray(raw, dtype=np.float64)
        if mult.shape != (net.n_banks,):
            raise ConfigError(
                f"--multipliers: expected {net.n_banks} values, "
                f"got shape {mult.shape}")
        if np.any(mult < 0.0) or np.any(mult > 1.0) or not np.all(np.isfinite(mult)):
            raise ConfigError("--multipliers: values must lie in [0, 1]")
    else:
        mult = np.ones(net.n_banks)
    params = _resolve_clear_params(args)
    shocked = net.external_assets * mult
    solver = clear_picard if args.method == "picard" else clear_fictitious_default
    outcome = solver(net, shocked, params, central_bank_loss=config.central_bank_loss)
    obligations, _ = relative_liabilities(net)
    payload = {
        "bank_names": list(net.bank_names),
        "payments": [float(x) for x in outcome.payments],
        "obligations": [float(x) for x in obligations],
        "defaults": [bool(x) for x in outcome.defaults],
        "equities": [float(x) for x in outcome.equities],
        "societal_loss": float(outcome.societal_loss),
        "iterations": int(outcome.iterations),
        "method": args.method,
        "alpha": params.alpha,
        "beta": params.beta,
    }
    fmt = args.format or "json"
    if fmt == "csv":
        lines = ["bank,payment,obligation,defaulted,equity"]
        for i, name in enumerate(net.bank_names):
            lines.append(f"{name},{payload['payments'][i]!r},"
                         f"{payload['obligations'][i]!r},"
                         f"{int(payload['defaults'][i])},"
                         f"{payload['equities'][i]!r}")
        text = "\n".join(lines) + "\n"
    elif fmt == "text":
        lines = [f"societal_loss = {payload['societal_loss']!r}"]
        for i, name in enumerate(net.bank_names):
            flag = "DEFAULT" if payload["defaults"][i] else "ok"
            lines.append(f"{name}: pays {payload['payments'][i]!r} "
                         f"of {payload['obligations'][i]!r} [{flag}]")
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, indent=2) + "\n"
    _emit(text, args.out)
    return 0


def _simulate_systems(config: ExperimentConfig):
    calib = cal.derive_gdp(config.calibration)
    split_net = build_split_network(calib)
    scen = sample_scenarios(config.shock_model(), split_net.n_banks,
                            config.scenarios, config.seed)
    params = config.clearing_params()
    losses = {}
    for system in config.systems():
        if system == "monopoly":
            net = build_monopoly_network(calib)
            losses[system] = loss_distribution(
                net, scen, params, base_assets=split_net.external_assets,
                central_bank_loss=config.central_bank_loss)
        else:
            losses[system] = loss_distribution(
                split_net, scen, params,
                central_bank_loss=config.central_bank_loss)
    return calib, scen, losses


def _cmd_simulate(args) -> int:
    config = _load_config(args)
    calib, scen, losses = _simulate_systems(config)
    if args.dump_multipliers:
        with open(args.dump_multipliers, "w", encoding="utf-8") as fh:
            scen.write_csv(fh)
    fmt = args.format or "json"
    if fmt == "csv":
        lines = [SIMULATE_CSV_HEADER]
        for system in sorted(losses):
            lines.extend(f"{system},{s},{loss!r}"
                         for s, loss in enumerate(losses[system].tolist()))
        text = "\n".join(lines) + "\n"
    else:
        payload = {
            "gdp": calib.gdp_galleons,
            "loss_threshold": calib.loss_threshold_galleons,
            "config": config.to_dict(),
            "systems": {},
        }
        for system, vec in losses.items():
            payload["systems"][system] = {
                "mean_loss": float(np.mean(vec)),
                "max_loss": float(np.max(vec)),
                "tail": [{"level": q,
                          "expected_shortfall": float(expected_shortfall(vec, q))}
                         for q in sorted(config.levels)],
            }
        text = json.dumps(payload, indent=2) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_inject(args) -> int:
    config = _load_config(args)
    calib = cal.derive_gdp(config.calibration)
    if not 0.0 < args.level < 1.0:
        raise ConfigError("--level: must lie in (0, 1)")
    threshold = (calib.loss_threshold_galleons if args.threshold is None
                 else args.threshold)
    if args.network:
        from .risk import InjectionCriterion, minimal_injection
        net = FinancialNetwork.load(args.network)
        scen = sample_scenarios(config.shock_model(), net.n_banks,
                                config.scenarios, config.seed)
        criterion = InjectionCriterion(level=args.level, threshold=threshold)
        res = minimal_injection(
            net, scen, config.clearing_params(), criterion,
            injection_shock_exempt=config.injection_shock_exempt,
            central_bank_loss=config.central_bank_loss)
        results = {"custom": res}
        names = {"custom": list(net.bank_names)}
    else:
        results = {}
        names = {}
        split_net = build_split_network(calib)
        scen = sample_scenarios(config.shock_model(), split_net.n_banks,
                                config.scenarios, config.seed)
        from .risk import InjectionCriterion, minimal_injection, minimal_injection_scalar
        criterion = InjectionCriterion(level=args.level, threshold=threshold)
        params = config.clearing_params()
        common = dict(injection_shock_exempt=config.injection_shock_exempt,
                      central_bank_loss=config.central_bank_loss)
        for system in config.systems():
            if system == "monopoly":
                net = build_monopoly_network(calib)
                results[system] = minimal_injection_scalar(
                    net, scen, params, criterion,
                    base_assets=split_net.external_assets, **common)
                names[system] = list(net.bank_names)
            else:
                results[system] = minimal_injection(
                    split_net, scen, params, criterion, **common)
                names[system] = list(split_net.bank_names)
    fmt = args.format or "json"
    if fmt == "csv":
        lines = ["system,level,bank,injection,total,achieved_tail_loss"]
        for system in sorted(results):
            res = results[system]
            for i, bank in enumerate(names[system]):
                lines.append(f"{system},{args.level!r},{bank},"
                             f"{float(res.allocation[i])!r},{res.total!r},"
                             f"{res.achieved_tail_loss!r}")
        text = "\n".join(lines) + "\n"
    else:
        payload = {
            "level": args.level,
            "threshold": threshold,
            "config": config.to_dict(),
            "results": {system: dict(res.to_dict(), bank_names=names[system])
                        for system, res in results.items()},
        }
        if "monopoly" in results and "split" in results:
            payload["difference"] = (results["split"].total
                                     - results["monopoly"].total)
        text = json.dumps(payload, indent=2) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    if config.sweep is None:
        config = config_from_dict(dict(config.to_dict(),
                                       sweep={"axis": "bankruptcy-cost"}))
    rows = run_sweep(config)
    fmt = args.format or "csv"
    if fmt == "json":
        text = rows_to_json(config, rows)
    else:
        text = rows_to_csv(rows)
    _emit(text, args.out)
    return 0


_COMMANDS = {
    "calibrate": _cmd_calibrate,
    "clear": _cmd_clear,
    "simulate": _cmd_simulate,
    "inject": _cmd_inject,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ClearingError as err:
        print(f"error: {err}", file=sys.stderr)
        return _NUMERIC_EXIT
    except (ConfigError, ValueError, TypeError, KeyError,
            json.JSONDecodeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return _USAGE_EXIT
    except RuntimeError as err:
        print(f"error: {err}", file=sys.stderr)
        return _NUMERIC_EXIT


if __name__ == "__main__":
    sys.exit(main())
