"""Command line: ``robust-shrink {transform,run,table2,figure}``.

Exit codes: 0 success, 2 I/O error, 3 diagnostics warning (outputs still
written), 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass
from typing import Optional

from . import dataset, mcmc, posterior_eb, report

EXIT_OK, EXIT_IO, EXIT_DIAG, EXIT_USAGE = 0, 2, 3, 64
MODELS = ["mle", "mean", "1", "2", "3", "4", "5", "6", "7"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    data: Optional[str] = None
    seed: int = 0
    chains: int = 4
    iters: int = 50_000
    burnin: int = 10_000
    out: str = "out"
    prior_center: str = "empirical"
    b: float = 4.0
    model5_scale: str = "sigma2"

    def mcmc_config(self) -> mcmc.McmcConfig:
        return mcmc.McmcConfig(n_chains=self.chains, n_iter=self.iters, n_burnin=self.burnin,
                               seed=self.seed)

    def for_model(self, model: str) -> dict:
        """The subset of settings that affects ``model``'s output."""
        doc = {"model": model, "data": self.data, "prior_center": self.prior_center}
        if model in ("4", "5", "6", "7"):
            doc.update(seed=self.seed, chains=self.chains, iters=self.iters, burnin=self.burnin)
        if model in ("6", "7"):
            doc["b"] = self.b
        if model == "5":
            doc["model5_scale"] = self.model5_scale
        return doc


def _players(cfg: RunConfig):
    if cfg.data is None:
        return dataset.load_canonical()
    if not os.path.exists(cfg.data):
        raise FileNotFoundError(f"data file not found: {cfg.data}")
    return dataset.load_players(cfg.data)


def _center(value: str):
    if value == "empirical":
        return value
    try:
        v = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("--prior-center takes 'empirical' or an average in [0, 1]")
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError("--prior-center average must be in [0, 1]")
    return value


def compute_model(model: str, cfg: RunConfig, players, workers: int = 1):
    """Returns ``(ModelResult, trace or None)``."""
    center = None if cfg.prior_center == "empirical" else float(cfg.prior_center)
    if model in ("mle", "mean"):
        return posterior_eb.predict_baseline(model, players), None
    mid = int(model)
    if mid in (1, 2, 3):
        return posterior_eb.predict_eb_model(mid, players, center=center), None
    if center is not None:
        raise UsageError("--prior-center applies to the empirical-Bayes models only")
    trace, res = mcmc.run_full_bayes(mid, players, cfg.mcmc_config(), b=cfg.b,
                                     model5_scale=cfg.model5_scale, workers=workers)
    return res, trace


def _model_dir(cfg: RunConfig, model: str) -> str:
    return os.path.join(cfg.out, f"model_{model}")


def run_and_write(model: str, cfg: RunConfig, players, workers: int = 1):
    res, trace = compute_model(model, cfg, players, workers)
    res.config = {**res.config, "run": cfg.for_model(model)}
    d = _model_dir(cfg, model)
    report.write_atomic(os.path.join(d, "result.json"), res.to_json() + "\n")
    report.write_atomic(os.path.join(d, "config.json"),
                        json.dumps(cfg.for_model(model), indent=2, sort_keys=True) + "\n")
    if trace is not None:
        tmp = os.path.join(d, ".trace.csv.tmp")
        mcmc.persist_trace(trace, tmp)
        os.replace(tmp, os.path.join(d, "trace.csv"))
    return res


def load_or_run(model: str, cfg: RunConfig, players, workers: int = 1):
    path = os.path.join(_model_dir(cfg, model), "result.json")
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            res = posterior_eb.ModelResult.from_json(fh.read())
        if res.config.get("run") == cfg.for_model(model):
            return res
    return run_and_write(model, cfg, players, workers)


def _echo_config(cfg: RunConfig, name: str = "config.json"):
    report.write_atomic(os.path.join(cfg.out, name), json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n")


def cmd_transform(cfg: RunConfig, stream=None) -> int:
    players = _players(cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["player", "y45", "x"])
    xs = dataset.observed_scores(players)
    for p, x in zip(players, xs):
        w.writerow([p.name, p.y45, repr(float(x))])
    (stream or sys.stdout).write(buf.getvalue())
    return EXIT_OK


def cmd_run(model: str, cfg: RunConfig, workers: int = 1) -> int:
    if model not in MODELS:
        raise UsageError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    res = run_and_write(model, cfg, _players(cfg), workers)
    print(f"model {model}: MSE x1e3 = {res.mse * 1e3:.3f}; "
          f"{res.players[0]} = {res.estimates[0]:.3f}")
    if not res.reliable:
        print(f"warning: split-R-hat above {mcmc.RHAT_LIMIT}; result flagged unreliable", file=sys.stderr)
        return EXIT_DIAG
    return EXIT_OK


def cmd_table2(cfg: RunConfig, workers: int = 1) -> int:
    players = _players(cfg)
    results = {m: load_or_run(m, cfg, players, workers) for m in MODELS}
    eb = {m: results[m] for m in MODELS[:5]}
    fb = {m: results[m] for m in MODELS[5:]}
    table = report.build_table2(players, eb, fb)
    report.write_atomic(os.path.join(cfg.out, "table2.csv"), table.to_csv())
    report.write_atomic(os.path.join(cfg.out, "table2.json"), table.to_json() + "\n")
    _echo_config(cfg)
    print(table.formatted())
    return EXIT_OK if all(r.reliable for r in results.values()) else EXIT_DIAG


def cmd_figure(fig_id: int, cfg: RunConfig, workers: int = 1) -> int:
    if fig_id not in (1, 2, 3, 4, 5):
        raise UsageError(f"figure id must be 1..5, got {fig_id}")
    players = _players(cfg)
    if fig_id == 1:
        fig = report.figure1()
    elif fig_id == 2:
        fig = report.figure2(report.baseball_hyperparams(players))
    elif fig_id == 3:
        fig = report.figure3(players)
    elif fig_id == 4:
        fig = report.figure4()
    else:
        fig = report.figure5(players, {m: load_or_run(m, cfg, players, workers) for m in ("1", "3", "4", "7")})
    path = os.path.join(cfg.out, f"fig{fig_id}.csv")
    report.write_atomic(path, fig.to_csv())
    _echo_config(cfg)
    for name, xs in fig.omitted.items():
        print(f"fig{fig_id}: {name} omitted at {xs} (pole)", file=sys.stderr)
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--data", help="player CSV (default: bundled 1970 table)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--chains", type=int, default=4)
    common.add_argument("--iters", type=int, default=50_000)
    common.add_argument("--burnin", type=int, default=10_000)
    common.add_argument("--out", default=None, help="output directory (env ROBUST_SHRINK_OUT, else ./out)")
    common.add_argument("--prior-center", type=_center, default="empirical",
                        help="'empirical' or a fixed batting average such as 0.248")
    common.add_argument("--b", type=float, default=4.0, help="ScBeta2 scale for models 6/7")
    common.add_argument("--model5-scale", choices=["sigma", "sigma2"], default="sigma2",
                        help="parameter carrying Model 5's ScBeta2(1,1,1) prior")
    common.add_argument("--workers", type=int, default=1, help="processes for parallel chains")

    p = _Parser(prog="robust-shrink", description="Robust Bayesian shrinkage for the 1970 batting data")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("transform", parents=[common], help="print transformed scores")
    r = sub.add_parser("run", parents=[common], help="run one model")
    r.add_argument("model", help="mle | mean | 1..7")
    sub.add_parser("table2", parents=[common], help="all models + Table 2")
    f = sub.add_parser("figure", parents=[common], help="data series for a figure")
    f.add_argument("id", type=int)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(
            data=args.data, seed=args.seed, chains=args.chains, iters=args.iters, burnin=args.burnin,
            out=args.out or os.environ.get("ROBUST_SHRINK_OUT") or "out",
            prior_center=args.prior_center, b=args.b, model5_scale=args.model5_scale,
        )
        try:
            cfg.mcmc_config()
        except ValueError as exc:
            raise UsageError(str(exc))
        if args.b <= 0:
            raise UsageError("--b must be positive")
        if args.command == "transform":
            return cmd_transform(cfg)
        if args.command == "run":
            return cmd_run(args.model, cfg, args.workers)
        if args.command == "table2":
            return cmd_table2(cfg, args.workers)
        return cmd_figure(args.id, cfg, args.workers)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, dataset.DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
