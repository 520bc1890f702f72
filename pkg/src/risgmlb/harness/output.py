"""CSV outputs, plotting scripts and run metadata.

CSV files are the stored results; floats are written with ``repr`` so they
parse back to the identical float64. Plot scripts only read the CSVs.

Schemas:

* ``snr_sweep.csv``: snr_db,algorithm,mean_rate,std_rate,n_scenarios
* ``ris_sweep.csv``: n_ris,algorithm,mean_rate,std_rate,n_scenarios
* ``*_runs.csv``: <axis>,algorithm,scenario_seed,sum_rate
* ``*_flops.csv``: <axis>,algorithm,mean_flops
* ``epoch_trace.csv``: n_ris,epoch,mean_rate,smoothed_rate,reference_rate
* ``epoch_trace_summary.csv``: n_ris,reference_algorithm,reference_rate,crossing_epoch,smoothed_crossing_epoch
* ``cost_compare.csv``: n_ris,algorithm,mean_flops,normalized_cost,n_scenarios
* ``gradient_check.csv``: scenario_seed,state_index,rel_err_w,rel_err_theta

Wall-clock figures are not reproducible, so they go to ``timing.json`` and only
when ``record_time`` is set.
"""

import csv
import json
from pathlib import Path

from risgmlb import __version__
from risgmlb.channel import RNG_ALGORITHM
from risgmlb.errors import ConfigError

SWEEP_FIELDS = ("algorithm", "mean_rate", "std_rate", "n_scenarios")
RUN_FIELDS = ("algorithm", "scenario_seed", "sum_rate")
TRACE_FIELDS = ("n_ris", "epoch", "mean_rate", "smoothed_rate", "reference_rate")
TRACE_SUMMARY_FIELDS = ("n_ris", "reference_algorithm", "reference_rate", "crossing_epoch",
                        "smoothed_crossing_epoch")
COST_FIELDS = ("n_ris", "algorithm", "mean_flops", "normalized_cost", "n_scenarios")
GRADCHECK_FIELDS = ("scenario_seed", "state_index", "rel_err_w", "rel_err_theta")


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


_PLOT_TEMPLATE = '''"""Render {csv} (generated; the CSV is the source of truth)."""
import csv
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("{csv}")))
curves = defaultdict(list)
for row in rows:
    curves[row["{group}"]].append((float(row["{x}"]), float(row["{y}"])))
fig, ax = plt.subplots()
for label, points in curves.items():
    points.sort()
    ax.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=label)
ax.set_xlabel("{xlabel}")
ax.set_ylabel("{ylabel}")
{extra}ax.legend()
ax.grid(True)
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "{name}.svg")
'''


def _plot_script(out, name, csv_name, x, y, group, xlabel, ylabel, extra=""):
    (out / f"plot_{name}.py").write_text(
        _PLOT_TEMPLATE.format(csv=csv_name, x=x, y=y, group=group, xlabel=xlabel,
                              ylabel=ylabel, name=name, extra=extra),
        encoding="utf-8")


def write_run_files(out, cfg, command, extra=None):
    from risgmlb.harness.config import dump_config

    dump_config(cfg, out / "config.resolved.yaml")
    meta = {
        "command": command,
        "package_version": __version__,
        "rng": RNG_ALGORITHM,
        "scenario_seeds": cfg.scenario_seeds(),
    }
    meta.update(extra or {})
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")


def _write_timing(out, payload):
    (out / "timing.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")


def _emit_sweep(results, out, cfg):
    axis = results[0].axis
    name = "snr_sweep" if axis == "snr_db" else "ris_sweep"
    rows, runs, timing = [], [], []
    for result in results:
        for algo, st in result.stats.items():
            rows.append((result.value, algo, st.mean_rate, st.std_rate, st.n_scenarios))
            runs.extend((result.value, algo, seed, rate)
                        for seed, rate in zip(st.seeds, st.rates))
            timing.append({axis: result.value, "algorithm": algo, "mean_wall_s": st.mean_wall})
    write_csv(out / f"{name}.csv", (axis,) + SWEEP_FIELDS, rows)
    flops_rows = [(result.value, algo, st.mean_flops)
                  for result in results for algo, st in result.stats.items()]
    write_csv(out / f"{name}_flops.csv", (axis, "algorithm", "mean_flops"), flops_rows)
    write_csv(out / f"{name}_runs.csv", (axis,) + RUN_FIELDS, runs)
    xlabel = "SNR (dB)" if axis == "snr_db" else "RIS elements N"
    _plot_script(out, name, f"{name}.csv", axis, "mean_rate", "algorithm", xlabel,
                 "sum rate (bit/s/Hz)")
    if cfg is not None and cfg.record_time:
        _write_timing(out, timing)
    return {"axis": axis}


def _emit_trace(result, out, cfg):
    rows, summary = [], []
    for curve in result.curves:
        for epoch, (m, s) in enumerate(zip(curve.mean_rate, curve.smoothed_rate), start=1):
            rows.append((curve.n_ris, epoch, float(m), float(s), curve.reference))
        summary.append((curve.n_ris, result.reference_algorithm, curve.reference,
                        curve.crossing_epoch, curve.smoothed_crossing_epoch))
    write_csv(out / "epoch_trace.csv", TRACE_FIELDS, rows)
    write_csv(out / "epoch_trace_summary.csv", TRACE_SUMMARY_FIELDS, summary)
    _plot_script(out, "epoch_trace", "epoch_trace.csv", "epoch", "smoothed_rate", "n_ris",
                 "epoch", "sum rate (bit/s/Hz)",
                 extra="for row in {r['n_ris']: r for r in rows}.values():\n"
                       "    ax.axhline(float(row['reference_rate']), linestyle='--')\n")
    return {"crossing_ratio": result.crossing_ratio,
            "reference_algorithm": result.reference_algorithm}


def _emit_cost(table, out, cfg):
    write_csv(out / "cost_compare.csv", COST_FIELDS,
              [(r.n_ris, r.algorithm, r.mean_flops, r.normalized_cost, r.n_scenarios)
               for r in table.rows])
    _plot_script(out, "cost_compare", "cost_compare.csv", "n_ris", "normalized_cost",
                 "algorithm", "RIS elements N", "relative flop cost",
                 extra="ax.set_yscale('log')\n")
    if cfg is not None and cfg.record_time:
        _write_timing(out, [{"n_ris": r.n_ris, "algorithm": r.algorithm,
                             "mean_wall_s": r.mean_wall, "normalized_wall": r.normalized_wall}
                            for r in table.rows])
    return {"cost_normalization": table.normalization}


def _emit_gradcheck(rows, out, cfg):
    write_csv(out / "gradient_check.csv", GRADCHECK_FIELDS,
              [(r.scenario_seed, r.state_index, r.rel_err_w, r.rel_err_theta) for r in rows])
    return {"max_rel_err_w": max(r.rel_err_w for r in rows),
            "max_rel_err_theta": max(r.rel_err_theta for r in rows)}


def emit_plot_data(results, output_dir, cfg=None, command=None):
    """Write the CSVs and plotting script for one result set, plus run metadata."""
    from risgmlb.harness.runners import CostTable, EpochTraceResult, SweepResult

    if results is None or (isinstance(results, list) and not results):
        raise ConfigError("no results to write")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(results, EpochTraceResult):
        extra = _emit_trace(results, out, cfg)
    elif isinstance(results, CostTable):
        extra = _emit_cost(results, out, cfg)
    elif isinstance(results[0], SweepResult):
        extra = _emit_sweep(results, out, cfg)
    else:
        extra = _emit_gradcheck(results, out, cfg)
    if cfg is not None:
        write_run_files(out, cfg, command, extra)
    return out


def read_sweep_csv(path):
    """Parse a sweep CSV back into {(axis value, algorithm): (mean, std, n)}."""
    parsed = {}
    for row in read_csv(path):
        axis = "snr_db" if "snr_db" in row else "n_ris"
        value = float(row[axis]) if axis == "snr_db" else int(row[axis])
        parsed[(value, row["algorithm"])] = (float(row["mean_rate"]), float(row["std_rate"]),
                                             int(row["n_scenarios"]))
    return parsed
