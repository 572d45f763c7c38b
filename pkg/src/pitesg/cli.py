"""Command-line front end: ``pit-esg <command> ... --out DIR``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import logging
import math
import os
import sys


from . import __version__, backtest, evalstats, toy
from .config import ConfigError, RunConfig
from .generators import NAMES, load_generator, make_generator, week_conditions
from .marketdata import load_panel, read_panel_csv, slice_before
from .scenarios import RNG_ALGORITHM, ScenarioSet

log = logging.getLogger("pitesg")

EVAL_HORIZONS = (20, 65, 130, 260)


class UsageError(Exception):
    pass


# -- helpers ----------------------------------------------------------------------


def _date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="INI file with model sections")
    p.add_argument("--seed", type=int, default=0, help="root seed for every random draw")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_data(p: argparse.ArgumentParser) -> None:
    p.add_argument("--panel", help="aligned panel CSV written by 'ingest'")
    p.add_argument("--spx", help="S&P500 close CSV (date,close)")
    p.add_argument("--vix", help="VIX close CSV (date,close)")
    p.add_argument("--date-column", default="date")
    p.add_argument("--level-column", default="close")


def _panel(args):
    if args.panel:
        return read_panel_csv(args.panel)
    if args.spx and args.vix:
        return load_panel(args.spx, args.vix, args.date_column, args.level_column)
    raise UsageError("give --panel, or both --spx and --vix")


def _monday_on_or_after(d: dt.date) -> dt.date:
    return d + dt.timedelta(days=(7 - d.weekday()) % 7)


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config)
    for sec in ("optim", "rbm", "cvae", "strategy", "toy_mixture", "toy_garch"):
        cfg.set(sec, "seed", args.seed)
    return cfg


def _override(cfg: RunConfig, section: str, key: str, value) -> None:
    if value is not None:
        cfg.set(section, key, value)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _finish(args, cfg: RunConfig, files: list[str]) -> None:
    cfg_path = os.path.join(args.out, "config.ini")
    cfg.write(cfg_path)
    files = sorted(set(files) | {cfg_path})
    flags = {k: (v.isoformat() if isinstance(v, dt.date) else v) for k, v in sorted(vars(args).items())
             if k not in ("func", "out", "verbose", "command")}
    manifest = {
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "rng": RNG_ALGORITHM,
        "flags": flags,
        "files": {os.path.relpath(f, args.out): _sha256(f) for f in files},
    }
    with open(os.path.join(args.out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _header(args, **extra) -> str:
    parts = {"command": args.command, "seed": args.seed, "rng": RNG_ALGORITHM, **extra}
    return "# " + " ".join(f"{k}={parts[k]}" for k in sorted(parts))


# -- commands ---------------------------------------------------------------------


def cmd_ingest(args, cfg):
    panel = _panel(args)
    path = os.path.join(args.out, "panel.csv")
    panel.to_csv(path)
    log.info("panel %s .. %s, %d rows, %d backfilled", panel.dates[0], panel.dates[-1], len(panel),
             int(panel.backfilled.sum()))
    return [path]


def cmd_toy(args, cfg):
    if args.kind == "mixture":
        c = cfg["toy_mixture"]
        for key, val in (("rbm_epochs", args.rbm_epochs), ("vae_epochs", args.vae_epochs),
                         ("n_samples", args.samples), ("repetitions", args.repetitions)):
            _override(cfg, "toy_mixture", key, val)
        c = cfg["toy_mixture"]
        res = toy.run_mixture(c)
        return toy.write_toy(res, args.out, _header(args, kind="mixture"))
    for key, val in (("omega", args.omega), ("alpha", args.alpha), ("beta", args.beta),
                     ("n_steps", args.steps), ("n_series", args.series),
                     ("rbm_epochs", args.rbm_epochs), ("cvae_epochs", args.vae_epochs),
                     ("rbm_gibbs_steps", args.gibbs_steps)):
        _override(cfg, "toy_garch", key, val)
    c = cfg["toy_garch"]
    res = toy.run_garch(c, cfg["optim"])
    files = toy.write_toy(res, args.out, _header(args, kind="garch"))
    if res.fitted is not None:
        path = os.path.join(args.out, "garch_fit.json")
        with open(path, "w") as fh:
            json.dump(res.fitted.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        files.append(path)
    return files


def _apply_model_flags(args, cfg):
    if args.model == "rbm":
        _override(cfg, "rbm", "epochs", args.epochs)
        _override(cfg, "rbm", "learning_rate", args.learning_rate)
    elif args.model == "cvae":
        _override(cfg, "cvae", "epochs", args.epochs)
        _override(cfg, "cvae", "learning_rate", args.learning_rate)
    elif args.model == "garch":
        _override(cfg, "optim", "restarts", args.restarts)


def _factory(name: str, cfg: RunConfig):
    def build(seed: int):
        if name == "garch":
            s = cfg.garch_settings()
            from dataclasses import replace

            return make_generator(name, garch=replace(s, optim=replace(s.optim, seed=seed)))
        if name == "rbm":
            s = cfg.rbm_settings()
            from dataclasses import replace

            return make_generator(name, rbm=replace(s, cd=replace(s.cd, seed=seed)))
        if name == "cvae":
            from dataclasses import replace

            return make_generator(name, cvae=replace(cfg.cvae_settings(), seed=seed))
        return make_generator(name)
    return build


def cmd_train(args, cfg):
    _apply_model_flags(args, cfg)
    panel = _panel(args)
    train = slice_before(panel, args.cutoff) if args.cutoff else panel
    gen = _factory(args.model, cfg)(args.seed)
    gen.fit(train)
    ckpt = os.path.join(args.out, "checkpoint.json")
    gen.save(ckpt)
    log_path = os.path.join(args.out, "training_log.csv")
    if args.model == "garch":
        gen.result.write_trace(log_path)
    elif args.model in ("cvae", "rbm"):
        gen.log.to_csv(log_path)
    else:
        with open(log_path, "w") as fh:
            fh.write("pool_size,first_date,last_date\n")
            fh.write(f"{len(gen.model)},{train.dates[0].isoformat()},{train.dates[-1].isoformat()}\n")
    return [ckpt, log_path]


def _forecast(gen, panel, start: dt.date, horizon: int, paths: int, seed: int) -> ScenarioSet:
    history = slice_before(panel, start)
    conds = None
    if gen.name in ("rbm", "cvae"):
        conds, _ = week_conditions(panel, start, math.ceil(horizon / 5))
    scen = gen.forecast(history, horizon, paths, seed, conds)
    scen.meta["start"] = start.isoformat()
    return scen


def cmd_generate(args, cfg):
    panel = _panel(args)
    gen = load_generator(args.checkpoint)
    start = _monday_on_or_after(args.start)
    if gen.training_end is not None and gen.training_end >= start:
        log.warning("checkpoint was trained on data up to %s, on or after the start %s", gen.training_end, start)
    scen = _forecast(gen, panel, start, args.horizon, args.paths, args.seed)
    path = os.path.join(args.out, "scenarios.csv")
    scen.to_csv(path)
    return [path]


def cmd_eval(args, cfg):
    panel = _panel(args)
    start = _monday_on_or_after(args.start)
    k0 = panel.index_before(start)
    files = []
    if args.scenarios:
        scen_all = ScenarioSet.from_csv(args.scenarios)
        horizons = args.horizon or [scen_all.horizon]
        gen = None
    else:
        if not args.checkpoint:
            raise UsageError("give --scenarios or --checkpoint")
        gen = load_generator(args.checkpoint)
        horizons = args.horizon or list(EVAL_HORIZONS)
    for h in horizons:
        if k0 + h > len(panel):
            raise ValueError(f"horizon {h} from {start} runs past the end of the data ({panel.dates[-1]})")
        realized = panel.spx_log_return[k0:k0 + h]
        if gen is None:
            if h > scen_all.horizon:
                raise ValueError(f"horizon {h} exceeds the scenario horizon {scen_all.horizon}")
            scen = ScenarioSet(scen_all.returns[:, :h], scen_all.condition_vix, scen_all.generator, scen_all.seed)
        else:
            scen = _forecast(gen, panel, start, h, args.paths, args.seed)
        rep = evalstats.scenario_report(scen, realized, args.quantiles)
        rep.header.update({"horizon": h, "start": start.isoformat()})
        sub = os.path.join(args.out, f"h{h}")
        files += evalstats.write_report(rep, sub)
        if gen is not None:
            p = os.path.join(sub, "scenarios.csv")
            scen.to_csv(p)
            files.append(p)
    return files


def cmd_backtest(args, cfg):
    _apply_model_flags(args, cfg)
    for key, val in (("backtest_weeks", args.weeks), ("n_paths", args.paths)):
        _override(cfg, "strategy", key, val)
    panel = _panel(args)
    strat = cfg["strategy"]
    n_crisis = args.starts // 2
    plan = backtest.build_start_plan(panel, strat, n_crisis, args.starts - n_crisis, seed=args.seed)
    log.info("backtesting %s on %d start dates", args.model, len(plan.dates))
    report = backtest.run_backtest(_factory(args.model, cfg), panel, plan, strat)
    files = report.write(args.out)
    return files


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pit-esg", description="Point-in-time scenario generators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="align and backfill S&P500/VIX closes")
    _add_common(p)
    _add_data(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("toy", help="synthetic validation protocols")
    p.add_argument("kind", choices=("mixture", "garch"))
    _add_common(p)
    p.add_argument("--omega", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--steps", type=int, help="length of the synthetic GARCH series")
    p.add_argument("--series", type=int, help="number of generated GARCH-toy series")
    p.add_argument("--samples", type=int, help="mixture sample size")
    p.add_argument("--repetitions", type=int, help="mixture sampling repetitions")
    p.add_argument("--rbm-epochs", type=int)
    p.add_argument("--vae-epochs", type=int)
    p.add_argument("--gibbs-steps", type=int)
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("train", help="fit one generator and write its checkpoint")
    p.add_argument("model", choices=NAMES)
    _add_common(p)
    _add_data(p)
    p.add_argument("--cutoff", type=_date, help="train on dates strictly before this day")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--restarts", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="sample paths from a checkpoint")
    _add_common(p)
    _add_data(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--start", type=_date, required=True, help="first simulated week (snapped to Monday)")
    p.add_argument("--paths", type=int, default=500)
    p.add_argument("--horizon", type=int, default=65)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="statistics of generated paths against realized returns")
    _add_common(p)
    _add_data(p)
    p.add_argument("--checkpoint")
    p.add_argument("--scenarios")
    p.add_argument("--start", type=_date, required=True)
    p.add_argument("--horizon", type=int, action="append", help="repeatable; default 20, 65, 130, 260")
    p.add_argument("--paths", type=int, default=500)
    p.add_argument("--quantiles", type=int, default=100)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("backtest", help="stop-loss strategy over random start dates")
    p.add_argument("--model", choices=NAMES, required=True)
    _add_common(p)
    _add_data(p)
    p.add_argument("--starts", type=int, default=200)
    p.add_argument("--weeks", type=int)
    p.add_argument("--paths", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--restarts", type=int)
    p.set_defaults(func=cmd_backtest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        os.makedirs(args.out, exist_ok=True)
        files = args.func(args, cfg)
        _finish(args, cfg, files)
    except (UsageError, ConfigError) as exc:
        parser.print_usage(sys.stderr)
        print(f"pit-esg: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - surface any runtime failure as exit 1
        log.debug("failure", exc_info=True)
        print(f"pit-esg: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
