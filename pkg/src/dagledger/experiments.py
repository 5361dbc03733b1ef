"""Seeded multi-trial parameter sweeps and their file outputs.

Three sweep families match the headline experiments:

- fairness-grid: two miners, an aggregate background miner m0 against an
  atomic miner m1, sweeping (k, q0, q1, h1) and recording m1's
  block-reward surplus per grid cell;
- efficiency-q: n equal atomic miners sharing one information parameter
  q, sweeping (k, q) and recording throughput metrics;
- efficiency-n: n miners with h = q = 1/n, sweeping (k, n).

Every (point, trial) pair gets its own generator seeded from
(master seed, point fingerprint, trial index), so aggregates are
byte-identical no matter how many workers run the sweep or in what
order points finish.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .dag import ScoreParams
from .engine import AGGREGATE, ATOMIC, ConfigError, MinerSpec, SimParams, run
from .metrics import trial_metrics
from .rng import point_key, trial_seed

FAIRNESS_HEADER = "k,q0,q1,h1,T,trials,eta,lambda,alpha,mean_surplus,std_surplus,mean_share"
EFFICIENCY_HEADER = (
    "k,n,q,T,trials,eta,lambda,alpha,mean_pow_efficiency,std_pow_efficiency,"
    "mean_orphan_rate,std_orphan_rate,mean_lag,std_lag"
)

EXPERIMENTS = ("fairness-grid", "efficiency-q", "efficiency-n", "single-run")

DEFAULT_Q1 = [round(i * 0.05, 10) for i in range(21)]          # 0 .. 1
DEFAULT_H1 = [round(i * 0.025, 10) for i in range(1, 21)]      # 0.025 .. 0.5
DEFAULT_Q0 = [0.005, 0.05, 0.2]
DEFAULT_K_FAIRNESS = [1, 2, 3]
DEFAULT_K_EFFICIENCY = [1, 2, 3, math.inf]
DEFAULT_Q_SWEEP = [0.01, 0.05, 0.1, 0.2, 0.4, 0.8, 1.0]
DEFAULT_N_SWEEP = list(range(1, 21))


@dataclass
class ExperimentConfig:
    experiment: str
    trials: int = 50
    master_seed: int = 0
    turns: int = None           # None: 50 for fairness/single-run, 100 for efficiency
    eta: int = 6
    lam: int = None             # None copies eta; JSON key "lambda" also accepted
    gamma: float = 2.0
    alpha: float = 0.5
    k_values: list = None
    q0_values: list = None
    q1_values: list = None
    h1_values: list = None
    q_values: list = None
    n_values: list = None
    n_miners: int = 4           # efficiency-q
    m0_kind: str = AGGREGATE    # fairness background miner; must stay aggregate
    k: float = 1                # single-run
    miners: list = None         # single-run: [{"hash":h,"info":q,"kind":...}, ...]
    workers: int = None         # None: all available cores
    out: str = None
    format: str = "csv"
    dump_trials: bool = False
    pgm: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}"
            )
        if self.turns is None:
            self.turns = 100 if self.experiment.startswith("efficiency") else 50
        if self.lam is None:
            self.lam = self.eta
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.format not in ("csv", "json", "both"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.k_values is None:
            self.k_values = (
                list(DEFAULT_K_EFFICIENCY)
                if self.experiment.startswith("efficiency")
                else list(DEFAULT_K_FAIRNESS)
            )
        if self.q0_values is None:
            self.q0_values = list(DEFAULT_Q0)
        if self.q1_values is None:
            self.q1_values = list(DEFAULT_Q1)
        if self.h1_values is None:
            self.h1_values = list(DEFAULT_H1)
        if self.q_values is None:
            self.q_values = list(DEFAULT_Q_SWEEP)
        if self.n_values is None:
            self.n_values = list(DEFAULT_N_SWEEP)
        for name in ("k_values", "q0_values", "q1_values", "h1_values", "q_values", "n_values"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")

    def resolved_workers(self):
        if self.workers is not None:
            if self.workers < 1:
                raise ConfigError("workers must be >= 1")
            return self.workers
        return os.cpu_count() or 1


_CONFIG_ALIASES = {"lambda": "lam", "seed": "master_seed", "T": "turns"}


def config_from_mapping(doc: dict) -> ExperimentConfig:
    fields = {f for f in ExperimentConfig.__dataclass_fields__}
    kwargs = {}
    for key, value in doc.items():
        name = _CONFIG_ALIASES.get(key, key)
        if name not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        if name == "k_values" or name == "k":
            value = _parse_k_json(value) if name == "k" else [_parse_k_json(v) for v in value]
        kwargs[name] = value
    if "experiment" not in kwargs:
        raise ConfigError("config needs an 'experiment' field")
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise OSError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return config_from_mapping(doc)


def _parse_k_json(v):
    if v == "inf" or v == math.inf:
        return math.inf
    if isinstance(v, (int, float)) and not isinstance(v, bool) and v == int(v) and v >= 1:
        return int(v)
    raise ConfigError(f"k must be a positive integer or \"inf\", got {v!r}")


@dataclass
class AggregateRecord:
    point: dict                  # ordered label fields for this grid cell
    mean: dict
    std: dict
    trials: int
    trial_values: dict = None


def canonical_point(params: SimParams) -> str:
    """Stable textual fingerprint of a parameter point (excludes seed)."""
    miners = ";".join(f"{m.hash!r},{m.info!r},{m.kind}" for m in params.miners)
    k = "inf" if params.k == math.inf else str(int(params.k))
    return (
        f"k={k}|eta={params.eta}|lam={params.lam}|gamma={params.gamma!r}"
        f"|alpha={params.score.alpha!r}|T={params.horizon}|miners=[{miners}]"
    )


def run_trials(point: SimParams, trials: int, master_seed: int,
               label: dict = None, keep_trials: bool = False) -> AggregateRecord:
    """Average `trials` independent runs of one parameter point."""
    key = point_key(canonical_point(point))
    series = {"pow_efficiency": [], "orphan_rate": [], "lag": []}
    for i in range(len(point.miners)):
        series[f"share_{i}"] = []
        series[f"surplus_{i}"] = []
    for index in range(trials):
        params = replace(point, seed=trial_seed(master_seed, key, index))
        m = trial_metrics(run(params))
        series["pow_efficiency"].append(m.pow_efficiency)
        series["orphan_rate"].append(m.orphan_rate)
        series["lag"].append(float(m.lag))
        for i, (s, sp) in enumerate(zip(m.shares, m.surplus)):
            series[f"share_{i}"].append(s)
            series[f"surplus_{i}"].append(sp)
    return AggregateRecord(
        point=dict(label or {}),
        mean={name: _mean(vals) for name, vals in series.items()},
        std={name: _sample_std(vals) for name, vals in series.items()},
        trials=trials,
        trial_values=series if keep_trials else None,
    )


def _mean(xs):
    return sum(xs) / len(xs)


def _sample_std(xs):
    if len(xs) < 2:
        return 0.0
    m = _mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def _run_trials_task(task):
    point, trials, master_seed, label, keep = task
    return run_trials(point, trials, master_seed, label, keep)


def _execute(tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [_run_trials_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(_run_trials_task, tasks))


def _base_point_label(config, turns):
    return {
        "T": turns,
        "trials": config.trials,
        "eta": config.eta,
        "lambda": config.lam,
        "alpha": config.alpha,
    }


def fairness_grid(config: ExperimentConfig):
    """One record per (k, q0, h1, q1) cell of the two-miner surplus grid."""
    if config.m0_kind != AGGREGATE:
        raise ConfigError("the fairness background miner m0 must be non-atomic-aggregate")
    for k in config.k_values:
        if k == math.inf:
            raise ConfigError("fairness grid is restricted to finite k")
    for h1 in config.h1_values:
        if not 0.0 < h1 < 1.0:
            raise ConfigError(f"h1 must lie strictly inside (0, 1), got {h1}")
    tasks = []
    for k in config.k_values:
        for q0 in config.q0_values:
            for h1 in config.h1_values:
                for q1 in config.q1_values:
                    point = SimParams(
                        miners=(
                            MinerSpec(0, 1.0 - h1, q0, AGGREGATE),
                            MinerSpec(1, h1, q1),
                        ),
                        k=k,
                        eta=config.eta,
                        lam=config.lam,
                        gamma=config.gamma,
                        score=ScoreParams(config.alpha),
                        horizon=config.turns,
                    )
                    label = {"k": k, "q0": q0, "q1": q1, "h1": h1}
                    label.update(_base_point_label(config, config.turns))
                    tasks.append(
                        (point, config.trials, config.master_seed, label, config.dump_trials)
                    )
    return _execute(tasks, config.resolved_workers())


def _equal_miner_point(config, k, n, q):
    return SimParams(
        miners=tuple(MinerSpec(i, 1.0 / n, q) for i in range(n)),
        k=k,
        eta=config.eta,
        lam=config.lam,
        gamma=config.gamma,
        score=ScoreParams(config.alpha),
        horizon=config.turns,
    )


def efficiency_sweep_q(config: ExperimentConfig):
    """One record per (k, q): n equal atomic miners all sharing q."""
    n = config.n_miners
    if n < 1:
        raise ConfigError("n_miners must be >= 1")
    tasks = []
    for k in config.k_values:
        for q in config.q_values:
            label = {"k": k, "n": n, "q": q}
            label.update(_base_point_label(config, config.turns))
            tasks.append(
                (
                    _equal_miner_point(config, k, n, q),
                    config.trials,
                    config.master_seed,
                    label,
                    config.dump_trials,
                )
            )
    return _execute(tasks, config.resolved_workers())


def efficiency_sweep_n(config: ExperimentConfig):
    """One record per (k, n) with h = q = 1/n."""
    tasks = []
    for k in config.k_values:
        for n in config.n_values:
            label = {"k": k, "n": n, "q": 1.0 / n}
            label.update(_base_point_label(config, config.turns))
            tasks.append(
                (
                    _equal_miner_point(config, k, n, 1.0 / n),
                    config.trials,
                    config.master_seed,
                    label,
                    config.dump_trials,
                )
            )
    return _execute(tasks, config.resolved_workers())


def single_run(config: ExperimentConfig):
    """One simulation (seeded directly by master_seed); returns the final
    state and its metrics."""
    if config.miners:
        miners = tuple(
            MinerSpec(i, float(m["hash"]), float(m["info"]), m.get("kind", ATOMIC))
            for i, m in enumerate(config.miners)
        )
    else:
        n = config.n_miners
        miners = tuple(MinerSpec(i, 1.0 / n, 1.0) for i in range(n))
    params = SimParams(
        miners=miners,
        k=config.k,
        eta=config.eta,
        lam=config.lam,
        gamma=config.gamma,
        score=ScoreParams(config.alpha),
        horizon=config.turns,
        seed=config.master_seed,
    )
    state = run(params)
    return state, trial_metrics(state)


# ---- serialization ----


def _fmt_value(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fmt_k(k):
    return "inf" if k == math.inf else str(int(k))


def _record_row(record, experiment):
    point = record.point
    if experiment == "fairness-grid":
        keys = ("q0", "q1", "h1", "T", "trials", "eta", "lambda", "alpha")
        stats = (
            record.mean["surplus_1"],
            record.std["surplus_1"],
            record.mean["share_1"],
        )
    else:
        keys = ("n", "q", "T", "trials", "eta", "lambda", "alpha")
        stats = (
            record.mean["pow_efficiency"],
            record.std["pow_efficiency"],
            record.mean["orphan_rate"],
            record.std["orphan_rate"],
            record.mean["lag"],
            record.std["lag"],
        )
    cells = [_fmt_k(point["k"])]
    cells += [_fmt_value(point[k]) for k in keys]
    cells += [_fmt_value(v) for v in stats]
    return ",".join(cells)


def records_to_csv(records, experiment) -> str:
    header = FAIRNESS_HEADER if experiment == "fairness-grid" else EFFICIENCY_HEADER
    lines = [header]
    lines += [_record_row(r, experiment) for r in records]
    return "\n".join(lines) + "\n"


def _record_json_obj(record, experiment):
    header = FAIRNESS_HEADER if experiment == "fairness-grid" else EFFICIENCY_HEADER
    cells = _record_row(record, experiment).split(",")
    obj = {}
    for name, cell in zip(header.split(","), cells):
        if name == "k":
            obj[name] = cell if cell == "inf" else int(cell)
        elif name in ("T", "trials", "eta", "lambda", "n"):
            obj[name] = int(cell)
        else:
            obj[name] = float(cell)
    if record.trial_values is not None:
        obj["trial_values"] = record.trial_values
    return obj


def records_to_json(records, experiment, config) -> str:
    doc = {
        "experiment": experiment,
        "metadata": {
            "trials": config.trials,
            "master_seed": config.master_seed,
            "turns": config.turns,
            "eta": config.eta,
            "lambda": config.lam,
            "gamma": config.gamma,
            "alpha": config.alpha,
            "note": "eta and lambda default to 6 when an experiment leaves them unstated",
        },
        "records": [_record_json_obj(r, experiment) for r in records],
    }
    return json.dumps(doc, indent=2) + "\n"


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e}") from e


def _write_bytes(path, blob):
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e}") from e


def _split_stem(out_path):
    stem, ext = os.path.splitext(out_path)
    if ext in (".csv", ".json"):
        return stem
    return out_path


def emit(records, config: ExperimentConfig, out_path=None):
    """Write sweep records as CSV/JSON (and optional PGM grids);
    returns the list of paths written."""
    if not records:
        raise ValueError("no records to write")
    experiment = config.experiment
    stem = _split_stem(out_path or config.out or experiment)
    written = []
    if config.format in ("csv", "both"):
        path = stem + ".csv"
        _write_text(path, records_to_csv(records, experiment))
        written.append(path)
    if config.format in ("json", "both"):
        path = stem + ".json"
        _write_text(path, records_to_json(records, experiment, config))
        written.append(path)
    if config.pgm and experiment == "fairness-grid":
        written += emit_pgm(records, config, stem)
    return written


def surplus_to_gray(value):
    """Surplus clamped to [-0.5, 0.5], mapped linearly onto 0..255."""
    v = min(0.5, max(-0.5, value))
    return int(round((v + 0.5) * 255.0))


def emit_pgm(records, config, stem):
    """One binary graymap per (k, q0): rows h1 ascending, cols q1
    ascending, pixel = mean surplus of m1."""
    cell = {}
    for r in records:
        p = r.point
        cell[(p["k"], p["q0"], p["h1"], p["q1"])] = r.mean["surplus_1"]
    h1s = sorted(set(p for _, _, p, _ in cell))
    q1s = sorted(set(p for _, _, _, p in cell))
    written = []
    for k in sorted(set(p for p, _, _, _ in cell)):
        for q0 in sorted(set(p for _, p, _, _ in cell)):
            rows = bytearray()
            for h1 in h1s:
                for q1 in q1s:
                    rows.append(surplus_to_gray(cell[(k, q0, h1, q1)]))
            header = f"P5\n{len(q1s)} {len(h1s)}\n255\n".encode("ascii")
            path = f"{stem}_k{_fmt_k(k)}_q0{q0}.pgm"
            _write_bytes(path, header + bytes(rows))
            written.append(path)
    return written


def _tx_id_json(tid):
    return [tid.turn, tid.serial, tid.kind]


def trace_document(state) -> dict:
    """Full final-state dump for external verification of the valid
    sub-DAG and included-transaction extraction."""
    blocks = []
    for b in sorted(state.global_block_dag().blocks.values(), key=lambda blk: blk.id):
        blocks.append(
            {
                "id": b.id,
                "owner": b.owner,
                "pointers": sorted(b.pointers),
                "txs": [_tx_id_json(t) for t in sorted(b.carried_txs)],
            }
        )
    transactions = []
    txg = state.global_tx_graph()
    for tid in sorted(txg.txs):
        tx = txg.txs[tid]
        transactions.append(
            {
                "id": _tx_id_json(tid),
                "deps": [_tx_id_json(d) for d in sorted(tx.dependencies)],
                "turn": tid.turn,
            }
        )
    return {"blocks": blocks, "transactions": transactions}


def emit_trace(state, path):
    _write_text(path, json.dumps(trace_document(state), indent=2) + "\n")
    return path
