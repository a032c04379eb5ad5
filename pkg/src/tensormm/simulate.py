"""Monte Carlo sweeps over (p, alpha, sigma_max) with CSV export.

A sweep draws one core tensor from ``(seed, 0)`` and keeps it fixed; every
trial redraws memberships and noise from its own stream
``(seed, 1, cell, trial)``, so results do not depend on execution order or
the number of worker processes.
"""

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .evaluation import align_memberships, sintheta_report
from .exceptions import TensorMMError
from .hooi import HooiOptions
from .linalg import tensor_kappa
from .model import NoiseSpec, make_rng, sample_core, sample_mixed_model, sample_noise
from .spa import estimate_all

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "cell", "trial", "status", "seed",
    "p1", "p2", "p3", "r1", "r2", "r3",
    "sigma_max", "alpha", "delta",
    "l2inf_1", "l2inf_2", "l2inf_3", "l2inf_max",
    "l1_1", "l1_2", "l1_3",
    "sintheta_1", "sintheta_2", "sintheta_3",
    "iterations", "wall_ms", "error",
)
_FLOAT_COLUMNS = {
    "sigma_max", "alpha", "delta", "l2inf_1", "l2inf_2", "l2inf_3", "l2inf_max",
    "l1_1", "l1_2", "l1_3", "sintheta_1", "sintheta_2", "sintheta_3", "wall_ms",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep grid and estimation settings.

    The defaults describe the standard sigma sweep: Delta = 10,
    r = (3, 3, 3), alpha = 1, 10 trials per cell, sigma_max = 1, 6, ..., 96
    and p = 100, 150, ..., 500.
    """

    p: tuple = tuple(range(100, 501, 50))
    ranks: tuple = (3, 3, 3)
    delta: float = 10.0
    sigma_max: tuple = tuple(range(1, 97, 5))
    alpha: tuple = (1.0,)
    trials: int = 10
    seed: int = 0
    t_max: int = 100
    tol: float = 1e-9
    auto_iters: bool = False
    concentration: float = 1.0
    n_jobs: int = 1
    record_time: bool = False

    def __post_init__(self):
        if not self.p or not self.sigma_max or not self.alpha:
            raise ValueError("p, sigma_max and alpha grids must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.ranks) != 3:
            raise ValueError("ranks must have three entries")

    def cells(self):
        """Grid cells in output order: p outermost, then alpha, then sigma_max."""
        return [(int(p), float(a), float(s))
                for p in self.p for a in self.alpha for s in self.sigma_max]


# --------------------------------------------------------------------------
# config files: "key = value" lines, lists comma separated, '#' comments

_LIST_KEYS = {"p": int, "ranks": int, "sigma_max": float, "alpha": float}
_SCALAR_KEYS = {"delta": float, "trials": int, "seed": int, "t_max": int, "tol": float,
                "concentration": float, "n_jobs": int}
_BOOL_KEYS = {"auto_iters", "record_time"}


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_list(text, cast):
    items = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" in tok:
            # start:stop:step, inclusive of stop
            start, stop, step = (float(x) for x in tok.split(":"))
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            items.extend(cast(start + i * step) for i in range(n))
        else:
            items.append(cast(float(tok)) if cast is int else cast(tok))
    return tuple(items)


def parse_config(text):
    """Build an :class:`ExperimentConfig` from ``key = value`` text.

    List values are comma separated; ``a:b:s`` expands to ``a, a+s, ..., b``.
    """
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key in _LIST_KEYS:
                kwargs[key] = _parse_list(value, _LIST_KEYS[key])
            elif key in _SCALAR_KEYS:
                cast = _SCALAR_KEYS[key]
                kwargs[key] = cast(float(value)) if cast is int else cast(value)
            elif key in _BOOL_KEYS:
                kwargs[key] = _parse_bool(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return ExperimentConfig(**kwargs)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(config):
    """Inverse of :func:`parse_config`."""
    lines = []
    for f in fields(config):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# running

def run_trial(config, core, cell, trial):
    """One simulation trial; returns a record dict (status ``ok`` or ``failed``)."""
    p, alpha, sigma = config.cells()[cell]
    dims = (p, p, p)
    rec = dict.fromkeys(CSV_COLUMNS, None)
    rec.update(cell=cell, trial=trial, seed=config.seed,
               p1=p, p2=p, p3=p, r1=config.ranks[0], r2=config.ranks[1], r3=config.ranks[2],
               sigma_max=sigma, alpha=alpha, delta=config.delta)

    rng = make_rng(config.seed, 1, cell, trial)
    start = time.perf_counter()
    try:
        model = sample_mixed_model(dims, config.ranks, config.delta, rng, core=core,
                                   concentration=config.concentration)
        noise = sample_noise(dims, NoiseSpec(sigma, alpha), rng)
        if config.auto_iters:
            snr = config.delta / sigma if sigma > 0 else math.inf
            opts = HooiOptions(tol=config.tol, auto_iters=True, snr=snr,
                               kappa=tensor_kappa(core, config.ranks))
        else:
            opts = HooiOptions(t_max=config.t_max, tol=config.tol)
        est = estimate_all(model.tensor + noise, config.ranks, opts)
        l2 = []
        for k in range(3):
            res = align_memberships(est.pis[k], model.memberships[k])
            rec[f"l2inf_{k + 1}"] = res.l2inf_error
            rec[f"l1_{k + 1}"] = res.avg_l1_error
            l2.append(res.l2inf_error)
        rec["l2inf_max"] = max(l2)
        for k, s in enumerate(sintheta_report(est.factors, model.factors)):
            rec[f"sintheta_{k + 1}"] = float(s)
        rec["iterations"] = est.factors.iterations_run
        rec["status"] = "ok"
    except (TensorMMError, np.linalg.LinAlgError) as exc:
        rec["status"] = "failed"
        rec["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    if config.record_time:
        rec["wall_ms"] = 1000.0 * (time.perf_counter() - start)
    return rec


def _run_task(args):
    return run_trial(*args)


def run_sweep(config, progress=None):
    """Run every (cell, trial) and return records sorted by (cell, trial)."""
    core = sample_core(config.ranks, config.delta, make_rng(config.seed, 0))
    tasks = [(config, core, cell, trial)
             for cell in range(len(config.cells())) for trial in range(config.trials)]
    if config.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=config.n_jobs) as pool:
            records = list(pool.map(_run_task, tasks))
    else:
        records = []
        for task in tasks:
            records.append(_run_task(task))
            if progress is not None:
                progress(len(records), len(tasks))
    return sorted(records, key=lambda rec: (rec["cell"], rec["trial"]))


# --------------------------------------------------------------------------
# CSV

def _fmt(col, value):
    if value is None:
        return ""
    if col in _FLOAT_COLUMNS:
        return f"{float(value):.17g}"
    return str(value)


def records_to_csv(records):
    """Serialize records: header row, LF line endings, reals with 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([_fmt(col, rec.get(col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(path, records):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))


def read_csv(path):
    """Load records written by :func:`write_csv`, converting numeric fields."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rec = {}
            for col in CSV_COLUMNS:
                val = row.get(col, "")
                if val == "":
                    rec[col] = None
                elif col in _FLOAT_COLUMNS:
                    rec[col] = float(val)
                elif col in ("status", "error"):
                    rec[col] = val
                else:
                    rec[col] = int(val)
            out.append(rec)
    return out


# --------------------------------------------------------------------------
# summaries used for the scaling checks

def cell_means(records, metric="l2inf_max"):
    """Mean of ``metric`` over successful trials, keyed by (p, alpha, sigma_max).

    Returns ``{key: (mean, n_ok, n_failed)}``.
    """
    acc = {}
    for rec in records:
        key = (rec["p1"], rec["alpha"], rec["sigma_max"])
        vals, failed = acc.setdefault(key, ([], [0]))
        if rec["status"] == "ok":
            vals.append(rec[metric])
        else:
            failed[0] += 1
    return {key: (float(np.mean(vals)) if vals else math.nan, len(vals), failed[0])
            for key, (vals, failed) in acc.items()}


def mean_relative_error(records, p, alpha, metric="l2inf_max"):
    """Average over sigma_max of (cell mean error) / sigma_max at fixed p and alpha."""
    means = cell_means(records, metric)
    ratios = [m / s for (pp, a, s), (m, n, _) in means.items()
              if pp == p and a == alpha and s > 0 and n > 0]
    return float(np.mean(ratios))


def linear_fit(x, y):
    """Least-squares line ``y = a + b x``; returns ``(a, b, r_squared)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    b, a = np.polyfit(x, y, 1)
    resid = y - (a + b * x)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), float(r2)
