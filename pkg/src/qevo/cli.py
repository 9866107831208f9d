"""Command-line entry point: ``qevo <subcommand> [options]``.

Every subcommand runs ``--runs`` independent seeded runs (run ``i`` uses seed
``seed + i``) and writes, under ``--out``:

* ``runs/run_<i>.csv``: the per-generation history of run ``i``;
* ``history.csv``: all runs stacked, with a leading ``run`` column;
* ``aggregate.csv``: ``generation,min,mean,max`` of the tracked metric across
  runs (a run that stopped early keeps its last value);
* ``summary.txt``: one line per run, also echoed to stdout.

Options may also come from a flat ``key=value`` file given with ``--config``;
flags on the command line win.  ``QEVO_SEED`` supplies the seed when neither
sets it.  Exit codes: 0 success, 1 runtime error, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import opga, qga
from .circga import codon, design, teleport
from .qiga import cga, knapsack, qiga


class ConfigError(ValueError):
    """Bad option values; reported as a usage error."""


# ---- option tables ---------------------------------------------------------
# (flag, type, help, extra argparse kwargs)

_COMMON = [
    ("--seed", int, "base seed; run i uses seed + i (fallback: $QEVO_SEED, then 0)", {}),
    ("--runs", int, "number of independent runs (default 1)", {}),
    ("--out", str, "output directory (default: ./qevo-out/<subcommand>)", {}),
]

_CIRCUIT = [
    ("--pop", int, "population size", {}),
    ("--generations", int, "maximum generations", {}),
    ("--codons", int, "chromosome length in codons", {}),
    ("--pc", float, "crossover probability", {}),
    ("--pm", float, "per-letter mutation probability (default 1/length)", {}),
    ("--resample-every", int, "generations between fresh (p, q) test inputs", {}),
    ("--elitism", int, "best chromosomes copied unchanged", {}),
    ("--target-gates", int, "stop once a correct circuit this small is found", {}),
]

OPTIONS: dict[str, list] = {
    "learn-op": [
        ("--set", str, "built-in learning set", {"choices": sorted(opga.LEARNING_SETS)}),
        ("--set-file", str, "learning set file ('n m' then m rows of 2n reals)", {}),
        ("--preset", str, "parameter preset", {"choices": sorted(opga.PRESETS)}),
        ("--pop", int, "population size", {}),
        ("--generations", int, "generations", {}),
        ("--pc", float, "crossover probability", {}),
        ("--pm", float, "mutation probability", {}),
        ("--ps", float, "selection pressure (fraction of the sorted population bred from)", {}),
        ("--elite", int, "elite count", {}),
        ("--nm", int, "entries perturbed per mutation", {}),
    ],
    "evolve-circuit": _CIRCUIT,
    "optimize-circuit": _CIRCUIT + [
        ("--initial", str, "seed chromosome as a dotted codon string", {}),
    ],
    "design-circuit": [
        ("--target", str, "desired transformation", {"choices": ["bell"]}),
        ("--pop", int, "population size", {}),
        ("--generations", int, "generations", {}),
        ("--max-gates", int, "longest circuit", {}),
        ("--pc", float, "crossover probability", {}),
        ("--pm", float, "per-bit mutation probability", {}),
        ("--elitism", int, "best circuits copied unchanged", {}),
    ],
    "qiga-knapsack": [
        ("--items", int, "number of items m for generated instances", {}),
        ("--instance", str, "instance file ('m C' then m lines 'w p')", {}),
        ("--instance-seed", int, "seed for the generated instance (default: the run seed)", {}),
        ("--pop", int, "number of qubit individuals", {}),
        ("--generations", int, "generations", {}),
        ("--observe-rule", str, "observation rule", {"choices": ["sample", "argmax"]}),
        ("--repair", str, "repair heuristic", {"choices": [knapsack.RANDOM, knapsack.GREEDY]}),
        ("--delta", float, "rotation angle step", {}),
    ],
    "cga-knapsack": [
        ("--variant", str, "penalty, repair or decoder variant", {"choices": list(cga.VARIANTS)}),
        ("--items", int, "number of items m for generated instances", {}),
        ("--instance", str, "instance file ('m C' then m lines 'w p')", {}),
        ("--instance-seed", int, "seed for the generated instance (default: the run seed)", {}),
        ("--pop", int, "population size", {}),
        ("--generations", int, "generations", {}),
        ("--pc", float, "crossover probability", {}),
        ("--pm", float, "per-gene mutation probability", {}),
    ],
    "qga-demo": [
        ("--search-bits", int, "individual register width n (N = 2^n)", {}),
        ("--landscape", str, "'hamming' or 'table:<file>' with N fitness values", {}),
        ("--individuals", int, "number of register pairs M", {}),
        ("--generations", int, "generations", {}),
        ("--theta", float, "mutation rotation angle in radians", {}),
        ("--selection", float, "fraction of individuals kept by selection", {}),
    ],
}


def _dest(flag: str) -> str:
    return flag.lstrip("-").replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qevo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="flat key=value file; flags override it")
        for flag, typ, help_, extra in _COMMON + opts:
            p.add_argument(flag, type=typ, default=None, help=help_, **extra)
    return parser


# ---- configuration ---------------------------------------------------------

@dataclass
class ExperimentConfig:
    command: str
    params: dict[str, Any]  # engine options after merging file and flags
    engine: Any  # validated engine parameters, built before any run starts
    seed: int
    runs: int
    out: Path


def read_config_file(path) -> dict[str, str]:
    values = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_config(argv: list[str], environ=os.environ) -> ExperimentConfig:
    """Parse, merge and validate; raises ``SystemExit(2)`` on argparse errors."""
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        raise SystemExit(2)
    args = parser.parse_args(argv)
    opts = {_dest(f): (t, extra) for f, t, _, extra in _COMMON + OPTIONS[args.command]}
    merged: dict[str, Any] = {}
    if args.config:
        try:
            file_values = read_config_file(args.config)
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}") from None
        for key, raw in file_values.items():
            if key not in opts:
                raise ConfigError(f"unknown key {key!r} in {args.config}")
            typ, extra = opts[key]
            try:
                merged[key] = typ(raw)
            except ValueError:
                raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from None
            if "choices" in extra and merged[key] not in extra["choices"]:
                raise ConfigError(f"{key}: {raw!r} is not one of {extra['choices']}")
    for key in opts:
        value = getattr(args, key)
        if value is not None:
            merged[key] = value

    seed = merged.pop("seed", None)
    if seed is None:
        env = environ.get("QEVO_SEED")
        try:
            seed = int(env) if env else 0
        except ValueError:
            raise ConfigError(f"QEVO_SEED must be an integer, got {env!r}") from None
    runs = merged.pop("runs", None) or 1
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    out = Path(merged.pop("out", None) or Path("qevo-out") / args.command)
    try:
        engine = ENGINES[args.command][0](merged)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return ExperimentConfig(args.command, merged, engine, seed, runs, out)


def _pick(params: dict, **mapping) -> dict:
    """Rename present option keys to engine field names."""
    return {field_: params[key] for key, field_ in mapping.items() if params.get(key) is not None}


# ---- engines ---------------------------------------------------------------

@dataclass
class RunRecord:
    run: int
    seed: int
    columns: list[str]
    rows: list[tuple]
    metric: str  # column aggregated across runs
    summary: str


def _learn_setup(p):
    if p.get("set") and p.get("set_file"):
        raise ConfigError("give either set or set_file, not both")
    S = opga.LearningSet.load(p["set_file"]) if p.get("set_file") else \
        opga.LEARNING_SETS[p.get("set", "quant02n")]()
    base = opga.PRESETS[p["preset"]] if p.get("preset") else opga.GAParams()
    fields = _pick(p, pop="population_size", generations="generations", pc="crossover_prob",
                   pm="mutation_prob", ps="selection_pressure", elite="elite_count",
                   nm="mutation_number")
    return S, opga.GAParams(**{**base.__dict__, **fields})


def _learn_run(setup, seed):
    S, params = setup
    res = opga.run_learning_ga(S, params, seed)
    rows = [(t + 1, float(e), float(np.exp(-e))) for t, e in enumerate(res.history)]
    best = " ".join(repr(float(v)) for v in res.best.reshape(-1))
    return (["generation", "best_error", "best_fitness"], rows, "best_error",
            f"best_error={res.best_error!r} matrix=[{best}]")


def _circuit_params(p, **defaults):
    fields = _pick(p, pop="population_size", generations="max_generations", codons="num_codons",
                   pc="crossover_prob", pm="mutation_prob", resample_every="resample_every",
                   elitism="elitism", target_gates="target_gates")
    return teleport.CircuitGAParams(**{**defaults, **fields})


def _evolve_setup(p):
    return _circuit_params(p), None


def _optimize_setup(p):
    initial = codon.parse(p.get("initial", codon.REFERENCE_11_GATE))
    params = _circuit_params(p, num_codons=len(initial) // 3, target_gates=8)
    if len(initial) != params.length:
        raise ConfigError(f"initial chromosome has {len(initial) // 3} codons, "
                          f"num_codons is {params.num_codons}")
    return params, initial


def _circuit_run(setup, seed):
    params, initial = setup
    res = teleport.run_circuit_ga(params, seed, initial)
    rows = [(g, float(f), int(n)) for g, f, n in res.history]
    try:
        gates = codon.decode(res.best).describe()
    except codon.InvalidChromosome as e:
        gates = f"invalid ({e})"
    return (["generation", "best_fitness", "best_gate_count"], rows, "best_fitness",
            f"best_fitness={res.best_fitness!r} gates={res.best_gate_count} correct={res.correct} "
            f"chromosome={res.best_string} circuit={gates}")


def _design_setup(p):
    fields = _pick(p, pop="population_size", generations="generations", max_gates="max_gates",
                   pc="crossover_prob", pm="mutation_prob", elitism="elitism")
    return design.bell_cases(), design.DesignGAParams(**fields)


def _design_run(setup, seed):
    cases, params = setup
    res = design.run_design_ga(cases, params, seed)
    rows = [(g, float(e)) for g, e in enumerate(res.history)]
    circ = "; ".join(g.describe(cases[0][0].num_qubits) for g in res.best)
    return (["generation", "best_error"], rows, "best_error",
            f"best_error={res.best_error!r} circuit=[{circ}]")


def _instance_setup(p):
    if p.get("instance") and (p.get("items") is not None or p.get("instance_seed") is not None):
        raise ConfigError("instance excludes items and instance_seed")
    if p.get("instance"):
        inst = knapsack.KnapsackInstance.load(p["instance"])
        return lambda seed: inst
    m = p.get("items", 100)
    if m < 1:
        raise ConfigError("items must be >= 1")
    fixed = p.get("instance_seed")
    return lambda seed: knapsack.generate_instance(m, fixed if fixed is not None else seed)


def _qiga_setup(p):
    pop, gens = p.get("pop", 10), p.get("generations", 500)
    if pop < 1:
        raise ConfigError("population_size must be >= 1")
    if gens < 0:
        raise ConfigError("generations must be >= 0")
    kw = dict(pop_size=pop, max_gen=gens, observe_mode=p.get("observe_rule", "sample"),
              repair_mode=p.get("repair", knapsack.GREEDY), delta=p.get("delta", qiga.DELTA_THETA))
    return _instance_setup(p), kw


def _qiga_run(setup, seed):
    make, kw = setup
    inst = make(seed)
    res = qiga.run_qiga(inst, seed=seed, **kw)
    return _knapsack_record(res.history, res.best, res.best_profit, inst)


def _knapsack_record(history, best, best_profit, inst, extra=""):
    rows = [(t + 1, float(v)) for t, v in enumerate(history)]
    items = "".join(str(int(b)) for b in best)
    return (["generation", "best_profit"], rows, "best_profit",
            f"best_profit={best_profit!r} weight={float(knapsack.weight(best, inst))!r} "
            f"capacity={inst.capacity!r}{extra} items={items}")


def _cga_setup(p):
    fields = _pick(p, pop="population_size", generations="generations", pc="crossover_prob",
                   pm="mutation_prob")
    return _instance_setup(p), p.get("variant", "rep2"), cga.CGAParams(**fields)


def _cga_run(setup, seed):
    make, variant, params = setup
    inst = make(seed)
    res = cga.run_cga(inst, variant, seed, params)
    return _knapsack_record(res.history, res.best, res.best_profit, inst, f" variant={variant}")


def _qga_setup(p):
    land = p.get("landscape", "hamming")
    if land == "hamming":
        n = p.get("search_bits", 6)
        if not 1 <= n <= 12:
            raise ConfigError("search_bits must lie in 1..12")
        f = qga.hamming_landscape(n)
    elif land.startswith("table:"):
        try:
            f = np.array([float(t) for t in Path(land[6:]).read_text().split()])
        except (OSError, ValueError) as e:
            raise ConfigError(f"landscape: cannot read fitness table: {e}") from None
        if p.get("search_bits") is not None and 2 ** p["search_bits"] != f.size:
            raise ConfigError(f"landscape table has {f.size} values, search_bits needs "
                              f"{2 ** p['search_bits']}")
        qga.search_bits(f.size)
    else:
        raise ConfigError("landscape must be 'hamming' or 'table:<file>'")
    M, gens = p.get("individuals", 8), p.get("generations", 30)
    frac, theta = p.get("selection", 0.5), p.get("theta", qga.DEFAULT_THETA)
    if M < 1:
        raise ConfigError("individuals must be >= 1")
    if gens < 0:
        raise ConfigError("generations must be >= 0")
    if not 0 < frac <= 1:
        raise ConfigError("selection_fraction must lie in (0, 1]")
    return f, M, gens, frac, theta


def _qga_run(setup, seed):
    f, M, gens, frac, theta = setup
    res = qga.run_qga(qga.QGAPopulation.uniform(M, f.size, f), gens, frac, seed, theta)
    rows = [(g, float(b), float(s)) for g, b, s in res.history]
    ce = ""
    if np.unique(f).size > 1:
        x, y = qga.product_state_counterexample(f.size, f, rng=seed).pair
        ce = f" product_state_violation=(x={x}, observed={y!r}, f(x)={float(f[x])!r})"
    return (["generation", "best_fitness", "mean_support_size"], rows, "best_fitness",
            f"best_fitness={res.best_fitness!r} best_x={res.best_x} optimum={float(f.max())!r}{ce}")


ENGINES: dict[str, tuple[Callable, Callable]] = {
    "learn-op": (_learn_setup, _learn_run),
    "evolve-circuit": (_evolve_setup, _circuit_run),
    "optimize-circuit": (_optimize_setup, _circuit_run),
    "design-circuit": (_design_setup, _design_run),
    "qiga-knapsack": (_qiga_setup, _qiga_run),
    "cga-knapsack": (_cga_setup, _cga_run),
    "qga-demo": (_qga_setup, _qga_run),
}


# ---- running and output ----------------------------------------------------

def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def aggregate(records: list[RunRecord]) -> list[tuple]:
    """Per-generation min/mean/max of each run's metric column."""
    k = records[0].columns.index(records[0].metric)
    longest = max(records, key=lambda r: len(r.rows))
    series = []
    for r in records:
        vals = [row[k] for row in r.rows]
        if not vals:
            return []
        series.append(vals + [vals[-1]] * (len(longest.rows) - len(vals)))
    A = np.array(series, dtype=float)
    return [(row[0], float(lo), float(mu), float(hi))
            for row, lo, mu, hi in zip(longest.rows, A.min(0), A.mean(0), A.max(0))]


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([_fmt(v) for v in row] for row in rows)


def run_experiment(cfg: ExperimentConfig, echo=print) -> list[RunRecord]:
    """Run every seed, then write all files in one pass."""
    run_fn = ENGINES[cfg.command][1]
    records = []
    for i in range(cfg.runs):
        seed = cfg.seed + i
        columns, rows, metric, summary = run_fn(cfg.engine, seed)
        rec = RunRecord(i, seed, columns, rows, metric, f"run={i} seed={seed} {summary}")
        records.append(rec)
        echo(rec.summary)
    (cfg.out / "runs").mkdir(parents=True, exist_ok=True)
    for r in records:
        _write_csv(cfg.out / "runs" / f"run_{r.run:03d}.csv", r.columns, r.rows)
    _write_csv(cfg.out / "history.csv", ["run"] + records[0].columns,
               [(r.run, *row) for r in records for row in r.rows])
    _write_csv(cfg.out / "aggregate.csv", ["generation", "min", "mean", "max"], aggregate(records))
    (cfg.out / "summary.txt").write_text("".join(r.summary + "\n" for r in records))
    return records


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except ConfigError as e:
        print(f"qevo: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"qevo: runtime error: {e}", file=sys.stderr)
        return 1
    try:
        run_experiment(cfg)
    except (OSError, ValueError, RuntimeError) as e:
        print(f"qevo: runtime error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
