"""Command-line experiment runner.

Every command writes its outputs into ``--out`` together with a
``manifest.txt`` (one ``key=value`` per line) that is enough to replay the
run.  Log verbosity follows the ``PCHNET_LOG`` environment variable.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import itertools
import logging
import os
import platform
import sys
from pathlib import Path

import networkx
import numpy as np
import scipy
import yaml

from . import __version__
from .config import Experiment, load_experiment
from .milp import build_milp
from .network import build_network
from .placement import PlacementProblem, PlacementResult, double_greedy, omega_sweep, solve_exact
from .simulator import ConfigError, SimConfig, communication_costs, deadlock_config, run

log = logging.getLogger("pchnet")

EXACT_LIMIT = 20
ABLATION_HEADER = [
    "factor", "value", "path_kind", "k", "scheduler", "seeds", "tsr_mean", "tsr_std",
    "throughput_mean", "deadlock_events_mean",
]  # fmt: skip


class CommandError(RuntimeError):
    pass


def _write(out: Path, name: str, text: str, written: list[str]) -> None:
    (out / name).write_text(text)
    written.append(name)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _g(v) -> str:
    return f"{float(v):.10g}"


def write_manifest(out: Path, command: str, exp: Experiment, written: list[str]) -> None:
    lines = {
        "command": command,
        "config_hash": exp.config_hash(),
        "seed": exp.sim.seed,
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "networkx": networkx.__version__,
        "pyyaml": yaml.__version__,
        "outputs": ",".join(written),
    }
    (out / "manifest.txt").write_text("".join(f"{k}={v}\n" for k, v in lines.items()))
    (out / "config.resolved.yaml").write_text(yaml.safe_dump(exp.resolved(), sort_keys=True))


# ---- commands ----------------------------------------------------------------


def cmd_place(exp: Experiment, out: Path) -> list[str]:
    cfg = exp.sim
    net = build_network(cfg.network)
    problem = PlacementProblem.from_network(net, cfg.omega, cfg.uniform_delta)
    solver = exp.extra["solver"]
    if solver not in ("exact", "greedy", "both"):
        raise CommandError(f"unknown solver {solver!r}")
    written: list[str] = []
    parts = []
    results = {}
    if solver in ("exact", "both"):
        if problem.n_candidates > EXACT_LIMIT:
            raise CommandError(f"exact solver limited to {EXACT_LIMIT} candidates")
        results["exact"] = solve_exact(problem)
    if solver in ("greedy", "both"):
        plan = double_greedy(problem, np.random.default_rng(cfg.seed))
        results["greedy"] = PlacementResult.evaluate(problem, plan)
    for name, res in results.items():
        cc = communication_costs(net, problem, res.plan, res.assignment, (), cfg.hop_latency)
        parts.append(f"[{name}]\n{res.report(problem)}")
        parts.append(f"sync_messages_per_epoch {cc.sync_messages}\nmanagement_hops_per_epoch {_g(cc.management_hops)}\n")
    if len(results) == 2:
        parts.append(f"greedy_over_exact_cost_ratio {_g(results['greedy'].balance / results['exact'].balance)}\n")
    _write(out, "placement.txt", "\n".join(parts), written)

    omegas = exp.extra.get("omegas") or []
    if omegas:
        sweep_solver = "exact" if problem.n_candidates <= EXACT_LIMIT and solver != "greedy" else "greedy"
        rows = omega_sweep(problem, omegas, sweep_solver, cfg.seed)
        table = [
            [_g(r["omega"]), r["hubs"], _g(r["management_cost"]), _g(r["synchronization_cost"]), _g(r["balance_cost"])]
            for r in rows
        ]
        header = ["omega", "hubs", "management_cost", "synchronization_cost", "balance_cost"]
        _write(out, "omega_sweep.csv", _csv(table, header), written)
    return written


def cmd_simulate(exp: Experiment, out: Path) -> list[str]:
    res = run(exp.sim)
    written: list[str] = []
    head = f"routing {exp.sim.routing}\nhubs {' '.join(map(str, res.hubs))}\n"
    _write(out, "summary.txt", head + res.metrics.summary(), written)
    _write(out, "throughput.csv", res.throughput_csv(), written)
    if exp.sim.trace:
        _write(out, "trace.csv", res.trace_csv(), written)
    return written


def _ablation_cells(grid: dict) -> list[tuple[str, str, dict]]:
    kinds, ks, scheds = grid.get("path_kind") or [], grid.get("k") or [], grid.get("scheduler") or []
    if not (kinds and ks and scheds) or not grid.get("seeds"):
        raise CommandError("ablation grid is empty")
    if grid.get("mode", "axes") == "full":
        return [
            ("cell", f"{p}/{k}/{s}", dict(path_kind=p, k=k, scheduler=s))
            for p, k, s in itertools.product(kinds, ks, scheds)
        ]
    base = dict(path_kind=kinds[0], k=max(ks), scheduler=scheds[0])
    cells = [("path_kind", p, {**base, "path_kind": p}) for p in kinds]
    cells += [("k", k, {**base, "k": k}) for k in ks]
    cells += [("scheduler", s, {**base, "scheduler": s}) for s in scheds]
    return cells


def ablation_rows(sim: SimConfig, grid: dict) -> list[list]:
    cache: dict[tuple, tuple] = {}
    rows = []
    for factor, value, cell in _ablation_cells(grid):
        key = (cell["path_kind"], cell["k"], cell["scheduler"])
        if key not in cache:
            tsr, thr, dl = [], [], []
            for seed in grid["seeds"]:
                cfg = dataclasses.replace(sim, seed=seed, network=dataclasses.replace(sim.network, seed=seed), **cell)
                m = run(cfg).metrics
                tsr.append(m.tsr)
                thr.append(m.normalized_throughput)
                dl.append(m.deadlock_events)
                log.info("ablate %s seed=%s tsr=%.4f", key, seed, m.tsr)
            cache[key] = (np.mean(tsr), np.std(tsr), np.mean(thr), np.mean(dl))
        t_mean, t_std, thr_mean, dl_mean = cache[key]
        rows.append([factor, value, *key, len(grid["seeds"]), _g(t_mean), _g(t_std), _g(thr_mean), _g(dl_mean)])
    return rows


def cmd_ablate(exp: Experiment, out: Path) -> list[str]:
    written: list[str] = []
    rows = ablation_rows(exp.sim, exp.extra["ablate"])
    _write(out, "ablation.csv", _csv(rows, ABLATION_HEADER), written)
    return written


def cmd_deadlock_demo(exp: Experiment, out: Path) -> list[str]:
    written: list[str] = []
    duration = exp.sim.duration
    lines = []
    pairs = [(0, 1), (1, 0)]
    for routing in ("shortest", "splicer"):
        res = run(deadlock_config(routing, duration=duration, seed=exp.sim.seed))
        _write(out, f"{routing}_summary.txt", res.metrics.summary(), written)
        _write(out, f"{routing}_throughput.csv", res.throughput_csv(), written)
        late = min(15.0, duration)
        lines.append(f"{routing}_ab_throughput {_g(res.throughput_between(pairs, 0, duration))}")
        if duration > late:
            lines.append(f"{routing}_ab_throughput_after_15s {_g(res.throughput_between(pairs, late, duration))}")
        lines.append(f"{routing}_deadlock_events {res.metrics.deadlock_events}")
    _write(out, "comparison.txt", "\n".join(lines) + "\n", written)
    return written


def cmd_export_milp(exp: Experiment, out: Path) -> list[str]:
    cfg = exp.sim
    net = build_network(cfg.network)
    problem = PlacementProblem.from_network(net, cfg.omega, cfg.uniform_delta)
    written: list[str] = []
    _write(out, "placement.lp", build_milp(problem).to_lp(), written)
    return written


COMMANDS = {
    "place": cmd_place,
    "simulate": cmd_simulate,
    "ablate": cmd_ablate,
    "deadlock-demo": cmd_deadlock_demo,
    "export-milp": cmd_export_milp,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pchnet", description="Payment channel hub placement and routing experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="YAML experiment file")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("PCHNET_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s"
    )
    args = build_parser().parse_args(argv)
    try:
        exp = load_experiment(args.config, args.overrides, args.seed)
        args.out.mkdir(parents=True, exist_ok=True)
        written = COMMANDS[args.command](exp, args.out)
        write_manifest(args.out, args.command, exp, written)
    except (ConfigError, CommandError, ValueError, OSError) as exc:
        print(f"pchnet {args.command}: error: {exc}", file=sys.stderr)
        return 2
    for name in written:
        print(args.out / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
