"""Seeded Monte Carlo experiments.

Every trial is an independent task whose random stream comes from
``subseed(base_seed, experiment, trial)``. The seed deliberately ignores the
grid cell, so all cells of one experiment share common random numbers; this
makes comparisons across cells (for example recovery rate as a function of
``a``) far less noisy. Results do not depend on the worker count or the
order in which trials run, because aggregation always works on records
sorted by ``(cell, trial)``.

Experiments
-----------
``variance``
    Operator norm of Erdos-Renyi adjacency matrices, per-cell sample variance.
``tail``
    Exceedance frequencies of ``|Z - mean Z| >= t sqrt(p)`` for ``Z = ||A||_op``.
``phase``
    Exact recovery of two-block SBMs with ``rho_n = log n / n``.
``bound_ratio``
    Entrywise error of the leading Erdos-Renyi eigenvector against the
    binary-matrix bound.
``btsbm``
    Layer-wise recovery of hierarchical sign splitting on binary-tree models.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bounds as _bounds
from . import clustering as _cl
from . import models as _models
from ._io import write_rows
from .errors import InputError
from .linalg import eigvalsh, extreme_eigenpairs
from .metrics import Alignment, d2inf, d2inf_to_target
from .rng import subseed

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "ExperimentResult",
    "TrialRecord",
    "run_bound_ratio",
    "run_btsbm",
    "run_experiment",
    "run_phase",
    "run_tail",
    "run_variance",
    "subseed",
]

RECORD_HEADER = ("experiment", "cell", "trial", "seed", "metric", "value")
SUMMARY_HEADER = ("experiment", "cell", "metric", "value")


# ---------------------------------------------------------------------------
# records and configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialRecord:
    """Measurements of one trial. ``values`` keys are metric names."""

    experiment: str
    cell: str
    trial: int
    seed: int
    params: dict[str, Any]
    values: dict[str, float]


@dataclass
class ExperimentConfig:
    """Experiment kind, parameter grid and run settings.

    Each grid entry is a dict of model parameters and defines one cell.
    ``options`` holds experiment-wide settings (``t_grid`` for ``tail``,
    ``delta`` and ``alpha`` for ``bound_ratio``, ...).
    """

    kind: str
    grid: list[dict[str, Any]]
    trials: int
    base_seed: int = 0
    out: str | None = None
    constants: dict[str, float] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)
    workers: int | None = None

    def validate(self) -> None:
        if self.kind not in EXPERIMENTS:
            raise InputError(f"unknown experiment {self.kind!r}; expected one of {sorted(EXPERIMENTS)}")
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        if not self.grid:
            raise InputError("the parameter grid is empty")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[TrialRecord]
    summary: dict[str, dict[str, float]]

    def record_rows(self):
        for rec in self.records:
            for metric, value in rec.values.items():
                yield (rec.experiment, rec.cell, rec.trial, rec.seed, metric, value)

    def summary_rows(self):
        for cell, metrics in self.summary.items():
            for metric, value in metrics.items():
                yield (self.config.kind, cell, metric, value)

    def write(self, path: str | os.PathLike) -> tuple[Path, Path]:
        """Write the per-trial CSV to ``path`` and the summary next to it."""
        path = Path(path)
        summary_path = path.with_name(path.stem + "_summary" + (path.suffix or ".csv"))
        with open(path, "w", newline="") as fh:
            write_rows(fh, RECORD_HEADER, self.record_rows())
        with open(summary_path, "w", newline="") as fh:
            write_rows(fh, SUMMARY_HEADER, self.summary_rows())
        return path, summary_path


def cell_id(params: dict[str, Any]) -> str:
    """Stable text key for a grid cell, e.g. ``n=800;p=0.1``."""
    def show(v):
        if isinstance(v, (tuple, list)):
            return "/".join(show(x) for x in v)
        if isinstance(v, float):
            return repr(v)
        return str(v)
    return ";".join(f"{k}={show(params[k])}" for k in params)


# ---------------------------------------------------------------------------
# per-trial kernels
# ---------------------------------------------------------------------------


def _trial_opnorm(params, seed, options):
    A = _models.sample(_models.ModelSpec.er(params["n"], params["p"]), seed)
    return {"opnorm": float(np.max(np.abs(eigvalsh(A))))}


def _trial_phase(params, seed, options):
    n = int(params["n"])
    rho = math.log(n) / n
    spec = _models.ModelSpec.four_parameter(2, n // 2, params["a"], params["b"], rho)
    A = _models.sample(spec, seed)
    res = _cl.spectral_cluster(A, 2, params.get("operator", "adjacency"), seed=seed,
                               truth=spec.labels())
    return {"exact": float(res.exact), "rate": res.misclustering_rate}


def _er_bound_inputs(n, p, delta, alpha, constants):
    """Bound ingredients of ``E A = p (J - I)`` in closed form."""
    spectrum = np.concatenate([[(n - 1) * p], np.full(n - 1, -p)])
    return _bounds.BoundInputs(
        eigvals_star=spectrum, s=0, r=1, n=n, pstar=p, pbar_star=p * (n - 1) / n,
        pbar=p, delta=delta, alpha=alpha, mnorm_Ustar=1.0 / math.sqrt(n),
        mnorm_Ubar_star=1.0, mnorm_Astar=p * math.sqrt(n - 1), maxnorm_Astar=p,
        psd=False, constants=constants)


def _trial_bound_ratio(params, seed, options):
    n, p = int(params["n"]), float(params["p"])
    A = _models.sample(_models.ModelSpec.er(n, p), seed)
    win = extreme_eigenpairs(A, 1, "descending-value")
    ustar = np.full((n, 1), 1.0 / math.sqrt(n))
    lam_star = (n - 1) * p
    a = Alignment("exact-r1")
    dist = d2inf(win.vectors, ustar, a)
    surrogate = d2inf_to_target(win.vectors, A @ ustar / lam_star, ustar, a)
    constants = _bounds.Constants().override(**options.get("constants", {}))
    rep = _bounds.binary_bound_adjacency(
        _er_bound_inputs(n, p, options.get("delta", 0.05), options.get("alpha", 0.5), constants))
    return {
        "d2inf": dist,
        "sqrt_n_d2inf": math.sqrt(n) * dist,
        "d2inf_surrogate": surrogate,
        "np": n * p,
        "bound": rep.bound_d2inf,
        "bound_typical": rep.terms["corollary_typical_d2inf"],
        "ratio": dist / rep.bound_d2inf,
        "condition": float(rep.condition_A4_satisfied),
    }


def _trial_btsbm(params, seed, options):
    d, m = int(params["d"]), int(params["m"])
    a = tuple(float(x) for x in params["a"])
    n = m * 2**d
    rho = math.log(n) / n
    probs = tuple(rho * x for x in a)
    spec = _models.ModelSpec.btsbm(d, m, probs)
    _, truth = _models.btsbm_build(d, m, probs)
    A = _models.sample(spec, seed)
    tree = _cl.hcd_sign(A, stop="K", K=2**d)
    out = {}
    for layer, (exact, rate) in _cl.mega_accuracy(tree, truth).items():
        out[f"exact_layer_{layer}"] = float(exact)
        out[f"rate_layer_{layer}"] = rate
    out["full_tree"] = float(all(out[f"exact_layer_{l}"] for l in range(1, d + 2)))
    return out


# ---------------------------------------------------------------------------
# per-cell summaries
# ---------------------------------------------------------------------------


def _mean_and_se(x: np.ndarray) -> tuple[float, float]:
    if x.size < 2:
        return float(x.mean()), float("nan")
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _summary_variance(params, recs, options):
    z = np.array([r.values["opnorm"] for r in recs])
    var = float(z.var(ddof=1)) if z.size > 1 else 0.0
    p = float(params["p"])
    return {"mean_opnorm": float(z.mean()), "var_opnorm": var,
            "var_over_p": var / p if p > 0 else float("nan"), "trials": float(z.size)}


def _summary_tail(params, recs, options):
    z = np.array([r.values["opnorm"] for r in recs])
    p = float(params["p"])
    dev = np.abs(z - z.mean())
    t_grid = [float(t) for t in options.get("t_grid", (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0))]
    out = {"trials": float(z.size)}
    ts, logs = [], []
    for t in t_grid:
        freq = float(np.mean(dev >= t * math.sqrt(p)))
        out[f"freq_t={t!r}"] = freq
        if freq > 0 and t > 0:
            ts.append(t * t)
            logs.append(math.log(freq))
    if len(ts) >= 2:
        slope, intercept = np.polyfit(ts, logs, 1)
        out["slope_logfreq_vs_t2"] = float(slope)
        out["intercept"] = float(intercept)
    return out


def _summary_rate(key):
    def summarize(params, recs, options):
        x = np.array([r.values[key] for r in recs])
        mean, se = _mean_and_se(x)
        rates = np.array([r.values["rate"] for r in recs])
        return {"recovery_rate": mean, "recovery_se": se,
                "mean_misclustering": float(rates.mean()), "trials": float(x.size)}
    return summarize


def _summary_bound_ratio(params, recs, options):
    keys = ("d2inf", "sqrt_n_d2inf", "d2inf_surrogate", "ratio")
    out = {}
    for k in keys:
        x = np.array([r.values[k] for r in recs])
        out[f"mean_{k}"], out[f"se_{k}"] = _mean_and_se(x)
    ratios = np.array([r.values["ratio"] for r in recs])
    out["bound"] = recs[0].values["bound"]
    out["bound_typical"] = recs[0].values["bound_typical"]
    out["np"] = recs[0].values["np"]
    out["frac_ratio_le_1"] = float(np.mean(ratios <= 1.0))
    out["condition"] = recs[0].values["condition"]
    out["trials"] = float(ratios.size)
    return out


def _summary_btsbm(params, recs, options):
    d = int(params["d"])
    out = {}
    for layer in range(1, d + 2):
        x = np.array([r.values[f"exact_layer_{layer}"] for r in recs])
        out[f"rate_layer_{layer}"], out[f"se_layer_{layer}"] = _mean_and_se(x)
    out["full_tree_rate"] = float(np.mean([r.values["full_tree"] for r in recs]))
    flags = _bounds.partial_recovery_condition(params["a"])
    for layer, ok in flags.layers.items():
        out[f"condition_layer_{layer}"] = float(ok)
    out["leaves_impossible"] = float(flags.leaves_impossible)
    out["trials"] = float(len(recs))
    return out


EXPERIMENTS: dict[str, tuple[Callable, Callable]] = {
    "variance": (_trial_opnorm, _summary_variance),
    "tail": (_trial_opnorm, _summary_tail),
    "phase": (_trial_phase, _summary_rate("exact")),
    "bound_ratio": (_trial_bound_ratio, _summary_bound_ratio),
    "btsbm": (_trial_btsbm, _summary_btsbm),
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _run_task(task) -> TrialRecord:
    kind, cell, params, trial, seed, options = task
    values = EXPERIMENTS[kind][0](params, seed, options)
    return TrialRecord(experiment=kind, cell=cell, trial=trial, seed=seed,
                       params=params, values=values)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every trial of every cell, then aggregate per cell.

    ``config.workers`` processes are used (default: ``os.cpu_count()``);
    one worker runs everything in-process.
    """
    config.validate()
    options = dict(config.options)
    if config.constants:
        options["constants"] = dict(config.constants)
    tasks = []
    cells = []
    for params in config.grid:
        cell = cell_id(params)
        cells.append((cell, params))
        for trial in range(config.trials):
            seed = subseed(config.base_seed, config.kind, trial)
            tasks.append((config.kind, cell, params, trial, seed, options))

    workers = config.workers or os.cpu_count() or 1
    if workers <= 1 or len(tasks) == 1:
        records = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))

    order = {cell: i for i, (cell, _) in enumerate(cells)}
    records.sort(key=lambda r: (order[r.cell], r.trial))
    summarize = EXPERIMENTS[config.kind][1]
    summary = {}
    for cell, params in cells:
        recs = [r for r in records if r.cell == cell]
        summary[cell] = summarize(params, recs, options)
    result = ExperimentResult(config=config, records=records, summary=summary)
    if config.out:
        result.write(config.out)
    return result


# ---------------------------------------------------------------------------
# convenience wrappers
# ---------------------------------------------------------------------------


def run_variance(n: int, p_grid, trials: int, base_seed: int = 0, **kw) -> ExperimentResult:
    """Operator-norm variance of ER(n, p) for each ``p`` in ``p_grid``."""
    for p in p_grid:
        if not 0 <= p <= 0.5:
            raise InputError("p must lie in [0, 1/2]")
    grid = [{"n": int(n), "p": float(p)} for p in p_grid]
    return run_experiment(ExperimentConfig("variance", grid, trials, base_seed, **kw))


def run_tail(n: int, p: float, trials: int, t_grid=(0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
             base_seed: int = 0, **kw) -> ExperimentResult:
    """Exceedance frequencies of ``|Z - mean Z| >= t sqrt(p)`` for ``Z = ||A||_op``."""
    options = dict(kw.pop("options", {}), t_grid=tuple(float(t) for t in t_grid))
    grid = [{"n": int(n), "p": float(p)}]
    return run_experiment(ExperimentConfig("tail", grid, trials, base_seed, options=options, **kw))


def run_phase(n: int, ab_grid, trials: int, operator: str = "adjacency", base_seed: int = 0,
              **kw) -> ExperimentResult:
    """Exact-recovery rate of spectral clustering on two-block SBMs, ``rho_n = log n / n``."""
    grid = []
    for a, b in ab_grid:
        if not a > b > 0:
            raise InputError("need a > b > 0")
        grid.append({"n": int(n), "a": float(a), "b": float(b), "operator": operator})
    return run_experiment(ExperimentConfig("phase", grid, trials, base_seed, **kw))


def run_bound_ratio(n_grid, trials: int, c: float = 10.0, delta: float = 0.05,
                    alpha: float = 0.5, base_seed: int = 0, **kw) -> ExperimentResult:
    """Leading-eigenvector error of ER(n, c log n / n) against the binary-matrix bound."""
    options = dict(kw.pop("options", {}), delta=delta, alpha=alpha)
    grid = [{"n": int(n), "p": c * math.log(n) / n} for n in n_grid]
    return run_experiment(ExperimentConfig("bound_ratio", grid, trials, base_seed,
                                           options=options, **kw))


def run_btsbm(d: int, m: int, a_grid, trials: int, base_seed: int = 0, **kw) -> ExperimentResult:
    """Layer-wise recovery of hierarchical sign splitting, ``p_j = a_j log n / n``."""
    grid = []
    for a in a_grid:
        a = tuple(float(x) for x in a)
        _bounds.partial_recovery_condition(a)
        grid.append({"d": int(d), "m": int(m), "a": a})
    return run_experiment(ExperimentConfig("btsbm", grid, trials, base_seed, **kw))


def log_log_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    slope, _ = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(slope)
