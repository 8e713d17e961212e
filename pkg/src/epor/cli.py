"""Batch front end: calibrate, price, hedge, shock, oracle-check.

Exit codes: 0 ok, 2 input error, 3 calibration non-convergence,
4 optimiser non-convergence (the best strategy found is still written).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import calibration as cal
from . import hedging as H
from .config import ConfigError, PRESETS, load_config
from .curve import CurveError, bootstrap, flat_quotes, read_quotes_csv
from .greeks import BP
from .housing import HousingModel
from .hullwhite import HullWhiteParams
from .instruments import AmortizingSwapSpec, read_schedule_csv
from .oracle import mc_price
from .parallel import set_threads
from .relocation import IntensityParams, expected_density, write_density_csv
from .valuation import make_grid, price, to_bps, valuate, write_valuation

EXIT_OK, EXIT_INPUT, EXIT_CALIBRATION, EXIT_OPTIMISER = 0, 2, 3, 4
HEDGE_KINDS = ("global", "fxr_mim", "fxr_opm", "opr_mim", "eigen")


class InputError(Exception):
    pass


def _clean(obj):
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if not np.isfinite(v) else float(f"{v:.12g}")
    return obj


def write_json(obj, path) -> None:
    with Path(path).open("w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---- builders -------------------------------------------------------------

def build_curve(cfg):
    c = cfg["curve"]
    quotes = read_quotes_csv(c["quotes_csv"]) if c["quotes_csv"] else \
        flat_quotes(c["rate"], c["ends"], c["frequency"])
    return bootstrap(quotes)


def build_params(cfg, curve=None):
    return HullWhiteParams(cfg["hw"]["a"], cfg["hw"]["sigma"], curve or build_curve(cfg))


def build_spec(cfg, fixed_rate=None):
    s = cfg["swap"]
    k = s["fixed_rate"] if fixed_rate is None else fixed_rate
    if s["schedule_csv"]:
        return read_schedule_csv(s["schedule_csv"], k)
    return AmortizingSwapSpec.build(s["kind"], s["end_years"], s["frequency"], k, s["initial_notional"])


def build_model(cfg):
    h = cfg["hm"]
    return HousingModel(h["kind"], h["distribution"], h["mean"], h["variance"], h["ou"]["alpha"],
                        h["ou"]["eta"], h["trend"], h["h0"], 0.0, h["t_star"])


def build_intensity(cfg):
    r = cfg["reloc"]
    return IntensityParams((r["beta0"], r["beta1"], r["beta2"]), r["dt_ref"], r["mapping"])


def build_grid(cfg, spec):
    return make_grid(0.0, cfg["hm"]["t_star"], cfg["reloc"]["grid_step"], spec.payment_dates)


def build_context(cfg, with_scenarios=True):
    params = build_params(cfg)
    spec = build_spec(cfg)
    ip = build_intensity(cfg)
    grid = build_grid(cfg, spec)
    dens = expected_density(ip, build_model(cfg), grid, cfg["hm"]["paths"], cfg["hm"]["seed"])
    hc = cfg["hedge"]
    return H.EporContext(params, spec, dens, bump=hc["bump_bp"] * BP, gamma_bump=hc["gamma_bump_bp"] * BP,
                         scenarios=dens.scenarios if with_scenarios else None, intensity_params=ip)


# ---- subcommands ----------------------------------------------------------

def cmd_calibrate(cfg, args, out: Path) -> int:
    c = cfg["calibration"]
    if args.data:
        obs = cal.read_observations_csv(args.data)
        source = str(args.data)
    else:
        obs = cal.synth_generate(build_intensity(cfg), build_model(cfg), c["months"], c["borrowers"],
                                 c["seed"], start=c["start"])
        cal.write_observations_csv(obs, out / "observations.csv")
        source = "synthetic"
    report = {"source": source, "n_observations": len(obs), "seed": c["seed"] if not args.data else None}
    dists = {}
    for kind in ("normal", "lognormal", "shifted_exponential"):
        try:
            f = cal.moment_fit(obs, kind)
            dists[kind] = {"mean": f.mean, "variance": f.variance, "params": list(f.params)}
        except cal.CalibrationError as exc:
            dists[kind] = {"error": str(exc)}
    report["distribution"] = dists
    try:
        ou = cal.ou_mle(obs)
        report["ou"] = {"alpha": ou.alpha, "eta": ou.eta, "theta": ou.theta, "rho": ou.rho,
                        "weakly_identified": ou.weakly_identified}
    except cal.CalibrationError as exc:
        # reported, not fatal: the intensity fit does not depend on it
        report["ou"] = {"error": str(exc)}
    fit = cal.logistic_intensity_fit(obs, weighting=c["weighting"])
    report["logistic"] = {
        "beta_annual": fit.beta_annual, "std_err_annual": fit.std_err(),
        "conf_int_95": fit.conf_int(), "beta_monthly": fit.beta_monthly,
        "iterations": fit.iterations, "grad_norm": fit.grad_norm, "weighting": fit.weighting,
        "loglik_path": fit.loglik_path,
    }
    write_json(report, out / "calibration.json")
    b = fit.beta_annual
    print(f"beta* = ({b[0]:.4f}, {b[1]:.4f}, {b[2]:.4f}) after {fit.iterations} iterations")
    return EXIT_OK


def cmd_price(cfg, args, out: Path) -> int:
    params = build_params(cfg)
    spec = build_spec(cfg)
    ip = build_intensity(cfg)
    model = build_model(cfg)
    grid = build_grid(cfg, spec)
    n, seed = cfg["hm"]["paths"], cfg["hm"]["seed"]
    val = valuate(params, spec, model, ip, grid, n, seed)
    write_valuation(val, out)
    write_density_csv(expected_density(ip, model, grid, n, seed, keep_scenarios=False), out / "density.csv")
    rep = val.report()
    print("  ".join(f"{k}={v:.6f}" for k, v in rep.items()))
    if cfg["epor"]["sweep"]:
        with (out / "sweep.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["K", "value_bps", "baseline_bps", "adjustment_bps", "ci10_bps", "ci90_bps"])
            for k in cfg["epor"]["strikes"]:
                r = valuate(params, spec.with_rate(k), model, ip, grid, n, seed).report()
                w.writerow([f"{k:.10g}"] + [f"{r[c]:.12g}" for c in
                                            ("value_bps", "baseline_bps", "adjustment_bps", "ci10_bps", "ci90_bps")])
    return EXIT_OK


def build_strategy(ctx, cfg, kind):
    hc = cfg["hedge"]
    J, k = hc["J"], hc["k"]
    if kind == "fxr_mim":
        return H.hedge_fxr(ctx, J, "midpoint", k)
    if kind == "fxr_opm":
        return H.hedge_fxr(ctx, J, "optimal", k)
    if kind == "opr_mim":
        return H.hedge_opr(ctx, J, k, hc["k_vol"], hc["restarts"], seed=hc["restart_seed"])
    if kind == "global":
        b = H.equal_bounds(ctx, J)
        return H.hedge_global(ctx, 0.5 * (b[1:] + b[:-1]), k, b)
    if kind == "eigen":
        base = build_strategy(ctx, cfg, hc["base"])
        strat = H.hedge_eigen(ctx, base, J, k, hc["k_eig"], hc["alpha_opt"], hc["k_vol"])
        strat.converged = base.converged
        return strat
    raise InputError(f"unknown hedge kind {kind!r}; choose from {HEDGE_KINDS}")


def _write_greeks(ctx, strat, path):
    _, dv, gv = ctx.total_greeks()
    _, ds, gs = ctx.instruments(strat.maturities)
    dh = strat.weights @ ds
    gh = np.tensordot(strat.weights, gs, axes=1)
    if strat.swap_weights is not None:
        sd, sg = H._swap_greeks(ctx)
        dh = dh + strat.swap_weights @ sd
        gh = gh + np.tensordot(strat.swap_weights, sg, axes=1)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series", "i", "j", "value"])
        for name, d, g in (("epor", dv, gv), ("hedge", dh, gh), ("mismatch", dh - dv, gh - gv)):
            for i, v in enumerate(d):
                w.writerow([f"{name}_delta", i, "", f"{v:.12g}"])
            for i in range(g.shape[0]):
                for j in range(g.shape[1]):
                    w.writerow([f"{name}_gamma", i, j, f"{g[i, j]:.12g}"])


def cmd_hedge(cfg, args, out: Path) -> int:
    kind = args.kind or cfg["hedge"]["kind"]
    if kind not in HEDGE_KINDS:
        raise InputError(f"unknown hedge kind {kind!r}; choose from {HEDGE_KINDS}")
    ctx = build_context(cfg, with_scenarios=kind == "eigen")
    strat = build_strategy(ctx, cfg, kind)
    strat.write_csv(out / f"strategy_{kind}.csv")
    strat.write_swaps_csv(out / f"strategy_{kind}_swaps.csv", ctx.params.curve)
    _write_greeks(ctx, strat, out / f"greeks_{kind}.csv")
    v = ctx.value()
    diag = {k: val for k, val in strat.diagnostics.items() if k not in ("delta_residual", "gamma_residual")}
    write_json({"kind": kind, "J": len(strat.weights), "value_bps": ctx.bps(v), "cost_bps": ctx.bps(strat.cost),
                "cost_over_value": strat.cost / v, "objective": strat.objective, "converged": strat.converged,
                "maturities": strat.maturities, "bounds": strat.bounds, "weights": strat.weights,
                "diagnostics": diag}, out / f"hedge_{kind}.json")
    print(f"{kind}: V={ctx.bps(v):.4f}bp cost={ctx.bps(strat.cost):.4f}bp ({strat.cost / v - 1:+.2%})")
    if not strat.converged:
        print("optimiser did not converge; best strategy written", file=sys.stderr)
        return EXIT_OPTIMISER
    return EXIT_OK


def cmd_shock(cfg, args, out: Path) -> int:
    path = Path(args.strategy)
    if not path.is_file():
        raise InputError(f"strategy file {path} not found")
    swaps = path.with_name(path.stem + "_swaps.csv")
    strat = H.read_strategy_csv(path, swaps)
    ctx = build_context(cfg)
    grid = H.shock_grid(ctx.n_quotes, cfg["shock"]["grid"], cfg["shock"]["single_sizes"])
    rep = H.shock_analysis(strat, ctx, grid, cfg["report"]["alpha_es"])
    rep.write_csv(out / f"shock_{path.stem}.csv")
    top = np.argsort(-rep.mean_abs(), kind="stable")[:2]
    for i in top:
        print(f"shock {grid[i]}: ES={rep.es_1pct[i] / rep.notional * 1e4:.4f}bp P[loss]={rep.prob_loss[i]:.3f}")
    return EXIT_OK


def cmd_oracle(cfg, args, out: Path) -> int:
    params = build_params(cfg)
    spec = build_spec(cfg)
    ip = build_intensity(cfg)
    model = build_model(cfg)
    o = cfg["oracle"]
    strikes = np.asarray(o["strikes"], dtype=float)
    res = mc_price(params, spec, model, ip, o["paths"], o["seed"], strikes, o["grid_step"])
    grid = build_grid(cfg, spec)
    dens = expected_density(ip, model, grid, cfg["hm"]["paths"], cfg["hm"]["seed"], keep_scenarios=False)
    with (out / "oracle.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["K", "price_bps", "se_bps", "n_paths", "quadrature_bps", "z"])
        for (k, p, s, n) in res.rows():
            q = float(to_bps(price(params, spec, dens, k), spec))
            z = (q - p) / s if s > 0 else 0.0
            w.writerow([f"{k:.10g}", f"{p:.12g}", f"{s:.12g}", n, f"{q:.12g}", f"{z:.6f}"])
            print(f"K={k:.4f}: MC {p:.4f} +- {s:.4f}bp, quadrature {q:.4f}bp, z={z:+.2f}")
    return EXIT_OK


COMMANDS = {"calibrate": cmd_calibrate, "price": cmd_price, "hedge": cmd_hedge, "shock": cmd_shock,
            "oracle-check": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config overriding the preset")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--seed", type=int, help="seed for scenarios, oracle paths and synthetic data")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default="out", help="output directory")
    p = argparse.ArgumentParser(prog="epor", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("calibrate", parents=[common], help="fit housing and intensity parameters")
    c.add_argument("--data", help="CSV month,h_frac,p_frac[,exposures]; synthetic data when omitted")
    sub.add_parser("price", parents=[common], help="value, baseline, adjustment and quantile band")
    h = sub.add_parser("hedge", parents=[common], help="build a hedge strategy")
    h.add_argument("--kind", choices=HEDGE_KINDS)
    s = sub.add_parser("shock", parents=[common], help="shock report for a saved strategy")
    s.add_argument("--strategy", required=True, help="strategy CSV written by `hedge`")
    sub.add_parser("oracle-check", parents=[common], help="Monte Carlo price against the quadrature")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise InputError("--threads must be positive")
        set_threads(args.threads)
        cfg = load_config(args.preset, args.config, args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, args, out)
    except (InputError, ConfigError, cal.ObservationError, CurveError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except cal.CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (KeyError, TypeError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
