"""Monte Carlo experiment harness: spec files, trial orchestration, result tables.

Every experiment sweeps one dB grid and runs ``trials`` independent channel
realizations per sweep point.  Trial t of sweep point i (and target group g,
for the multicast experiments that overlay several SINR targets) draws from
the substream SeedSequence(seed, spawn_key=(i, g, t)); results are therefore
bit-identical no matter how trials are chunked across worker processes.

SINR statistics are converted to dB per trial and averaged in the dB domain
(the usual convention for link metrics plotted on a log scale); power
fractions and bit-error rates are averaged in natural units.  BER series
pool bits across trials with a binomial standard error.
"""

from __future__ import annotations

import multiprocessing
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .artnoise import build_noise_covariance, effective_channel
from .duality import joint_design
from .eve import build_eve_context, eve_ber_trial, eve_max_sinr
from .model import ScenarioConfig, TrialRecord, broadcast_sinr, generate_channels
from .multicast import multicast_design, multicast_sinr
from .zf import zf_design

__all__ = [
    "SpecError",
    "ExperimentSpec",
    "ResultRow",
    "ResultTable",
    "EXPERIMENTS",
    "parse_spec_file",
    "validate_spec",
    "run_experiment",
    "db_to_linear",
    "linear_to_db",
]


def db_to_linear(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


class SpecError(ValueError):
    """Malformed or inconsistent experiment specification."""


@dataclass
class ExperimentSpec:
    """Parsed experiment description (see the ``specs/`` directory for examples)."""

    experiment: str
    n_tx: int = 4
    n_rx: int = 2
    n_eve: int = 4
    k_users: int = 3
    trials: int = 5000
    seed: int = 1
    noise_var_rx: float = 1.0
    noise_var_eve: float = 1.0
    p_db_grid: np.ndarray | None = None
    s_db_grid: np.ndarray | None = None
    p_db: float | None = None
    s_db: float | None = None
    s_db_list: np.ndarray | None = None
    n_symbols: int = 10


@dataclass
class ResultRow:
    sweep_db: float
    series: str
    mean: float
    stderr: float
    n_trials: int
    n_infeasible: int
    n_bits: int | None = None


@dataclass
class ResultTable:
    experiment: str
    rows: list
    metadata: dict = field(default_factory=dict)

    def _has_bits(self):
        return any(r.n_bits is not None for r in self.rows)

    def to_csv(self):
        cols = ["sweep_db", "series", "mean", "stderr", "n_trials", "n_infeasible"]
        if self._has_bits():
            cols.append("n_bits")
        lines = [",".join(cols)]
        for r in self.rows:
            vals = [repr(float(r.sweep_db)), r.series, repr(float(r.mean)),
                    repr(float(r.stderr)), str(r.n_trials), str(r.n_infeasible)]
            if self._has_bits():
                vals.append("" if r.n_bits is None else str(r.n_bits))
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"

    def to_json(self):
        import json

        rows = []
        for r in self.rows:
            d = {"sweep_db": float(r.sweep_db), "series": r.series,
                 "mean": float(r.mean), "stderr": float(r.stderr),
                 "n_trials": r.n_trials, "n_infeasible": r.n_infeasible}
            if r.n_bits is not None:
                d["n_bits"] = r.n_bits
            rows.append(d)
        return json.dumps({"experiment": self.experiment,
                           "metadata": self.metadata, "rows": rows}, indent=2) + "\n"

    def series(self, name):
        """(sweep_db, mean) arrays for one series, in sweep order."""
        picked = [(r.sweep_db, r.mean) for r in self.rows if r.series == name]
        arr = np.array(sorted(picked))
        if arr.size == 0:
            raise KeyError(f"no series named {name!r}")
        return arr[:, 0], arr[:, 1]


# --------------------------------------------------------------------------
# per-trial simulation functions
# --------------------------------------------------------------------------


def _jam_fraction(sol):
    return 1.0 - min(sol.info_fraction, 1.0)


def _an_for(chans, sol, cfg):
    eff = effective_channel(chans, sol)
    jam_power = _jam_fraction(sol) * cfg.total_power
    return build_noise_covariance(eff, jam_power)


def _trial_power_fraction_broadcast(cfg, spec, seedseq, suffix=""):
    rng = np.random.default_rng(seedseq)
    chans = generate_channels(cfg, rng)
    zf = zf_design(chans, cfg)
    joint = joint_design(chans, cfg)
    stats = {
        "zf_info": float(min(zf.info_fraction, 1.0)),
        "zf_jam": _jam_fraction(zf),
        "zf_user1": float(zf.power_fractions[0]),
        "joint_info": float(min(joint.info_fraction, 1.0)),
        "joint_jam": _jam_fraction(joint),
    }
    infeasible = {
        "zf_info": not zf.feasible, "zf_jam": not zf.feasible,
        "zf_user1": not zf.feasible,
        "joint_info": not joint.feasible, "joint_jam": not joint.feasible,
    }
    return {"stats": stats, "infeasible": infeasible}


def _broadcast_record(chans, sol, cfg, errors=0, bits=0):
    nc = _an_for(chans, sol, cfg)
    ctx = build_eve_context(chans, sol, nc, cfg)
    users = np.array([broadcast_sinr(chans, sol, cfg, k)
                      for k in range(cfg.n_users)])
    eve = np.array([eve_max_sinr(ctx, k)[1] for k in range(ctx.n_streams)])
    return TrialRecord(
        achieved_sinr_users=users,
        eve_sinr_per_stream=eve,
        info_fraction=min(sol.info_fraction, 1.0),
        jam_fraction=_jam_fraction(sol),
        feasible=sol.feasible,
        eve_bit_errors=errors,
        bits_total=bits,
    )


def _trial_sinr_broadcast(cfg, spec, seedseq, suffix=""):
    rng = np.random.default_rng(seedseq)
    chans = generate_channels(cfg, rng)
    stats, infeasible = {}, {}
    for tag, sol in (("zf", zf_design(chans, cfg)),
                     ("joint", joint_design(chans, cfg))):
        rec = _broadcast_record(chans, sol, cfg)
        stats[f"{tag}_user1_sinr_db"] = float(linear_to_db(rec.achieved_sinr_users[0]))
        stats[f"{tag}_eve_sinr_db"] = float(np.mean(linear_to_db(rec.eve_sinr_per_stream)))
        infeasible[f"{tag}_user1_sinr_db"] = not rec.feasible
        infeasible[f"{tag}_eve_sinr_db"] = not rec.feasible
    return {"stats": stats, "infeasible": infeasible}


def _trial_ber_ml(cfg, spec, seedseq, suffix=""):
    rng = np.random.default_rng(seedseq)
    chans = generate_channels(cfg, rng)
    zf = zf_design(chans, cfg)
    eff = effective_channel(chans, zf)
    nc_on = build_noise_covariance(eff, _jam_fraction(zf) * cfg.total_power)
    nc_off = build_noise_covariance(eff, 0.0)
    # Both arms replay the same symbol/noise stream; only the jamming differs.
    arm_seed = seedseq.spawn(1)[0]
    err_on, bits = eve_ber_trial(chans, zf, nc_on, cfg, spec.n_symbols,
                                 np.random.default_rng(arm_seed))
    err_off, _ = eve_ber_trial(chans, zf, nc_off, cfg, spec.n_symbols,
                               np.random.default_rng(arm_seed))
    rec = _broadcast_record(chans, zf, cfg, errors=err_on, bits=bits)
    counts = {"eve_ber_an": (err_on, bits), "eve_ber_no_an": (err_off, bits)}
    infeasible = {"eve_ber_an": not rec.feasible, "eve_ber_no_an": not rec.feasible}
    return {"counts": counts, "infeasible": infeasible}


def _trial_power_fraction_multicast(cfg, spec, seedseq, suffix=""):
    rng = np.random.default_rng(seedseq)
    chans = generate_channels(cfg, rng)
    sol = multicast_design(chans, cfg, rng)
    stats = {
        f"mc_info{suffix}": float(min(sol.info_fraction, 1.0)),
        f"mc_jam{suffix}": _jam_fraction(sol),
    }
    infeasible = {name: not sol.feasible for name in stats}
    return {"stats": stats, "infeasible": infeasible}


def _trial_sinr_multicast(cfg, spec, seedseq, suffix=""):
    rng = np.random.default_rng(seedseq)
    chans = generate_channels(cfg, rng)
    sol = multicast_design(chans, cfg, rng)
    nc = _an_for(chans, sol, cfg)
    ctx = build_eve_context(chans, sol, nc, cfg)
    rec = TrialRecord(
        achieved_sinr_users=np.array([multicast_sinr(chans, sol, cfg, k)
                                      for k in range(cfg.n_users)]),
        eve_sinr_per_stream=np.array([eve_max_sinr(ctx, 0)[1]]),
        info_fraction=min(sol.info_fraction, 1.0),
        jam_fraction=_jam_fraction(sol),
        feasible=sol.feasible,
    )
    stats = {
        f"mc_user_sinr_db{suffix}":
            float(np.mean(linear_to_db(rec.achieved_sinr_users))),
        f"mc_eve_sinr_db{suffix}":
            float(linear_to_db(rec.eve_sinr_per_stream[0])),
    }
    infeasible = {name: not rec.feasible for name in stats}
    return {"stats": stats, "infeasible": infeasible}


# --------------------------------------------------------------------------
# experiment registry
# --------------------------------------------------------------------------


@dataclass
class _ExperimentDef:
    name: str
    description: str
    sweep: str  # "p" or "s"
    trial: callable
    multi_target: bool = False
    uses_symbols: bool = False


EXPERIMENTS = {
    "power_fraction_broadcast": _ExperimentDef(
        "power_fraction_broadcast",
        "information/jamming power split vs transmit power, ZF and joint designs",
        "p", _trial_power_fraction_broadcast),
    "sinr_broadcast": _ExperimentDef(
        "sinr_broadcast",
        "user-1 and eavesdropper SINR vs transmit power, ZF and joint designs",
        "p", _trial_sinr_broadcast),
    "ber_ml": _ExperimentDef(
        "ber_ml",
        "eavesdropper joint-ML BER vs target SINR, with and without jamming",
        "s", _trial_ber_ml, uses_symbols=True),
    "power_fraction_multicast": _ExperimentDef(
        "power_fraction_multicast",
        "information/jamming power split vs transmit power, multicast design",
        "p", _trial_power_fraction_multicast, multi_target=True),
    "sinr_multicast": _ExperimentDef(
        "sinr_multicast",
        "user and eavesdropper SINR vs transmit power, multicast design",
        "p", _trial_sinr_multicast, multi_target=True),
}


# --------------------------------------------------------------------------
# spec files
# --------------------------------------------------------------------------

_INT_KEYS = {"n_tx", "n_rx", "n_eve", "k_users", "trials", "seed", "n_symbols"}
_FLOAT_KEYS = {"noise_var_rx", "noise_var_eve", "p_db", "s_db"}
_GRID_KEYS = {"p_db_grid", "s_db_grid", "s_db_list"}


def parse_spec_file(path):
    """Read a flat ``key = value`` spec file into an ExperimentSpec."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SpecError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key in values:
                raise SpecError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = val

    spec = ExperimentSpec(experiment=values.pop("experiment", ""))
    for key, val in values.items():
        try:
            if key in _INT_KEYS:
                setattr(spec, key, int(val))
            elif key in _FLOAT_KEYS:
                setattr(spec, key, float(val))
            elif key in _GRID_KEYS:
                setattr(spec, key, np.array([float(v) for v in val.split(",")]))
            else:
                raise SpecError(f"{path}: unknown key {key!r}")
        except ValueError as exc:
            raise SpecError(f"{path}: bad value for {key!r}: {exc}") from exc
    problems = validate_spec(spec)
    if problems:
        raise SpecError(f"{path}: " + "; ".join(problems))
    return spec


def validate_spec(spec):
    """Return a list of problems (empty when the spec is runnable)."""
    problems = []
    if spec.experiment not in EXPERIMENTS:
        problems.append(
            f"unknown experiment {spec.experiment!r}; known: "
            + ", ".join(sorted(EXPERIMENTS)))
        return problems
    exp = EXPERIMENTS[spec.experiment]
    if spec.k_users >= spec.n_tx:
        problems.append(
            f"k_users={spec.k_users} must be < n_tx={spec.n_tx} "
            "(nullspace jamming requires K < N_t)")
    if spec.trials < 1:
        problems.append("trials must be >= 1")
    grid = spec.p_db_grid if exp.sweep == "p" else spec.s_db_grid
    grid_name = "p_db_grid" if exp.sweep == "p" else "s_db_grid"
    if grid is None or len(grid) == 0:
        problems.append(f"{grid_name} is required and must be nonempty")
    elif np.any(np.diff(grid) <= 0):
        problems.append(f"{grid_name} must be strictly increasing")
    if exp.sweep == "s" and spec.p_db is None:
        problems.append("p_db (fixed transmit power) is required")
    if exp.sweep == "p" and not exp.multi_target and spec.s_db is None:
        problems.append("s_db (common SINR target) is required")
    if exp.multi_target and spec.s_db_list is None and spec.s_db is None:
        problems.append("s_db_list (or s_db) is required")
    if exp.uses_symbols and spec.n_symbols < 1:
        problems.append("n_symbols must be >= 1")
    if spec.noise_var_rx <= 0 or spec.noise_var_eve <= 0:
        problems.append("noise variances must be positive")
    return problems


def _target_groups(spec):
    exp = EXPERIMENTS[spec.experiment]
    if not exp.multi_target:
        return [(spec.s_db, "")]
    s_list = spec.s_db_list if spec.s_db_list is not None else np.array([spec.s_db])
    return [(float(s), f"_s{s:g}") for s in s_list]


def _config_for(spec, sweep_db, s_db):
    p_db = sweep_db if EXPERIMENTS[spec.experiment].sweep == "p" else spec.p_db
    target_db = s_db if EXPERIMENTS[spec.experiment].sweep == "p" else sweep_db
    return ScenarioConfig(
        n_tx=spec.n_tx, n_rx=spec.n_rx, n_eve=spec.n_eve, n_users=spec.k_users,
        total_power=float(db_to_linear(p_db)),
        sinr_targets=np.full(spec.k_users, float(db_to_linear(target_db))),
        noise_var_rx=spec.noise_var_rx, noise_var_eve=spec.noise_var_eve,
        trials=spec.trials, seed=spec.seed,
    )


# --------------------------------------------------------------------------
# execution
# --------------------------------------------------------------------------


def _run_chunk(args):
    """Worker entry: run trials [lo, hi) of one (sweep point, target group)."""
    spec, sweep_idx, group_idx, lo, hi = args
    exp = EXPERIMENTS[spec.experiment]
    grid = spec.p_db_grid if exp.sweep == "p" else spec.s_db_grid
    sweep_db = float(grid[sweep_idx])
    s_db, suffix = _target_groups(spec)[group_idx]
    cfg = _config_for(spec, sweep_db, s_db)
    out = []
    for trial_idx in range(lo, hi):
        seedseq = np.random.SeedSequence(
            spec.seed, spawn_key=(sweep_idx, group_idx, trial_idx))
        try:
            rec = exp.trial(cfg, spec, seedseq, suffix=suffix)
        except Exception as exc:  # noqa: BLE001 - counted and reported
            rec = {"error": f"trial {trial_idx}: {type(exc).__name__}: {exc}"}
        out.append((trial_idx, rec))
    return sweep_idx, group_idx, out


def _aggregate(records, sweep_db):
    """Fold per-trial records of one sweep point into result rows."""
    rows = []
    failures = [r["error"] for _, r in records if "error" in r]
    good = [r for _, r in sorted(records) if "error" not in r]
    stat_series = {}
    count_series = {}
    infeasible = {}
    for rec in good:
        for name, val in rec.get("stats", {}).items():
            stat_series.setdefault(name, []).append(val)
        for name, pair in rec.get("counts", {}).items():
            count_series.setdefault(name, []).append(pair)
        for name, flag in rec.get("infeasible", {}).items():
            infeasible[name] = infeasible.get(name, 0) + int(flag)
    for name in sorted(stat_series):
        vals = np.array(stat_series[name])
        stderr = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        rows.append(ResultRow(sweep_db, name, float(vals.mean()), stderr,
                              len(vals), infeasible.get(name, 0)))
    for name in sorted(count_series):
        pairs = np.array(count_series[name], dtype=float)
        errors, bits = pairs[:, 0].sum(), pairs[:, 1].sum()
        rate = errors / bits
        stderr = float(np.sqrt(rate * (1.0 - rate) / bits))
        rows.append(ResultRow(sweep_db, name, float(rate), stderr,
                              len(pairs), infeasible.get(name, 0), int(bits)))
    return rows, failures


def run_experiment(spec, trials=None, seed=None, workers=1):
    """Run every sweep point of an experiment and return the ResultTable.

    ``trials`` and ``seed`` override the spec values.  Results do not depend
    on ``workers``; trials are keyed by (seed, sweep index, group, trial
    index) and aggregated in trial order.
    """
    problems = validate_spec(spec)
    if problems:
        raise SpecError("; ".join(problems))
    if trials is not None or seed is not None:
        spec = replace(spec,
                       trials=spec.trials if trials is None else int(trials),
                       seed=spec.seed if seed is None else int(seed))
    exp = EXPERIMENTS[spec.experiment]
    grid = spec.p_db_grid if exp.sweep == "p" else spec.s_db_grid
    groups = _target_groups(spec)

    chunk = max(1, min(64, spec.trials // max(1, workers)))
    tasks = []
    for sweep_idx in range(len(grid)):
        for group_idx in range(len(groups)):
            for lo in range(0, spec.trials, chunk):
                tasks.append((spec, sweep_idx, group_idx,
                              lo, min(lo + chunk, spec.trials)))

    buckets = {}
    if workers <= 1:
        results = map(_run_chunk, tasks)
    else:
        pool = multiprocessing.get_context("fork").Pool(workers)
        try:
            results = pool.map(_run_chunk, tasks)
        finally:
            pool.close()
            pool.join()
    for sweep_idx, group_idx, recs in results:
        buckets.setdefault((sweep_idx, group_idx), []).extend(recs)

    rows, all_failures = [], []
    for sweep_idx in range(len(grid)):
        point_rows = []
        for group_idx in range(len(groups)):
            recs = buckets.get((sweep_idx, group_idx), [])
            agg, failures = _aggregate(recs, float(grid[sweep_idx]))
            point_rows.extend(agg)
            all_failures.extend(failures)
        rows.extend(sorted(point_rows, key=lambda r: r.series))
    if all_failures:
        print(f"warning: {len(all_failures)} trial(s) failed and were excluded:",
              file=sys.stderr)
        for msg in all_failures[:10]:
            print(f"  {msg}", file=sys.stderr)
    return ResultTable(
        experiment=spec.experiment,
        rows=rows,
        metadata={"seed": spec.seed, "trials": spec.trials,
                  "n_failed": len(all_failures)},
    )
