"""Batch command-line interface: single sessions, cohort experiments, serving.

``simulate`` runs one session and writes its log; ``experiment`` runs the
paired cohort, writes the per-session metrics CSV, the pairwise statistics
report and plot-ready time-series extracts; ``serve`` starts the interactive
session service. Output defaults to $RINGDRIVE_OUT or the working directory.
"""

from __future__ import annotations

import csv
import json
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

import click
import numpy as np

from .config import load_config
from .log import SessionLog
from .metrics import jam_not_dissipated
from .pedals import Condition
from .scenario import run_cohort, run_session
from .stats import mcnemar, paired_t

#: Columns of the metrics CSV, in order. Bump the schema comment when this
#: changes.
CSV_SCHEMA = "ringdrive-metrics v1"
CSV_COLUMNS = (
    "participant",
    "condition",
    "seed",
    "world_seed",
    "ego_speed_std",
    "platoon_speed_std",
    "braking_instances",
    "jam_lifetime",
    "jam_not_dissipated",
    "throughput",
    "min_gap_after_failure",
    "collision",
)

#: Metrics compared with paired t-tests across conditions.
CONTINUOUS_METRICS = (
    "ego_speed_std",
    "platoon_speed_std",
    "braking_instances",
    "jam_lifetime",
    "throughput",
)


def _out_dir(out: str | None) -> Path:
    if out is not None:
        return Path(out)
    return Path(os.environ.get("RINGDRIVE_OUT", "."))


@click.group()
def main() -> None:
    """Ring-road shared-control traffic simulator."""


@main.command()
@click.option("--condition", type=click.Choice([c.value for c in Condition]), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Output directory (default: $RINGDRIVE_OUT or cwd).")
@click.option("--dt", type=float, default=None, help="Override integration step (s).")
@click.option("--duration", type=float, default=None, help="Override session duration (s).")
def simulate(condition, seed, config_path, out, dt, duration):
    """Run one session and write its log plus a metric summary line."""
    from .metrics import session_metrics

    overrides = {"condition": Condition(condition), "seed": seed}
    if dt is not None:
        overrides["dt"] = dt
    if duration is not None:
        overrides["duration"] = duration
        overrides["failure_time"] = duration
    try:
        cfg = load_config(config_path, **overrides)
    except (ValueError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc))

    log = run_session(cfg)
    out_dir = _out_dir(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = out_dir / f"session_{condition}_{seed}"
    npz_path, meta_path = log.save(stem)
    m = session_metrics(log)
    click.echo(
        f"{condition} seed={seed}: ego_speed_std={m.ego_speed_std:.3f} "
        f"platoon_speed_std={m.platoon_speed_std:.3f} braking={m.braking_instances} "
        f"jam_lifetime={m.jam_lifetime:.1f} throughput={m.throughput:.2f} "
        f"min_gap={'-' if m.min_gap_after_failure is None else f'{m.min_gap_after_failure:.2f}'} "
        f"collision={m.collision}"
    )
    click.echo(f"wrote {npz_path} and {meta_path}")


def _write_metrics_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {CSV_SCHEMA}\n")
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for r in rows:
            r = dict(r)
            r["jam_not_dissipated"] = int(jam_not_dissipated(r["jam_lifetime"]))
            r["collision"] = int(r["collision"])
            mg = r["min_gap_after_failure"]
            r["min_gap_after_failure"] = "" if mg is None else mg
            writer.writerow({k: r[k] for k in CSV_COLUMNS})


def _stats_report(rows: list[dict], conditions: list[str]) -> dict:
    by = {c: sorted((r for r in rows if r["condition"] == c), key=lambda r: r["participant"])
          for c in conditions}
    pairs = [
        (a, b) for i, a in enumerate(conditions) for b in conditions[i + 1:]
    ]
    comparisons = []
    for metric in CONTINUOUS_METRICS:
        for a, b in pairs:
            x = np.array([r[metric] for r in by[a]], dtype=float)
            y = np.array([r[metric] for r in by[b]], dtype=float)
            keep = ~(np.isnan(x) | np.isnan(y))
            if keep.sum() < 2:
                continue
            res = paired_t(x[keep], y[keep])
            comparisons.append({
                "metric": metric, "pair": f"{a}_vs_{b}", "test": res.test,
                "statistic": res.statistic, "df": res.df, "p_value": res.p_value,
                "n": int(keep.sum()), "degenerate": res.degenerate,
            })
    # Haptic-vs-automated min gap, where both sides saw a failure.
    if "haptic" in by and "automated" in by:
        x = np.array([r["min_gap_after_failure"] for r in by["haptic"]], dtype=float)
        y = np.array([r["min_gap_after_failure"] for r in by["automated"]], dtype=float)
        keep = ~(np.isnan(x) | np.isnan(y))
        if keep.sum() >= 2:
            res = paired_t(x[keep], y[keep])
            comparisons.append({
                "metric": "min_gap_after_failure", "pair": "haptic_vs_automated",
                "test": res.test, "statistic": res.statistic, "df": res.df,
                "p_value": res.p_value, "n": int(keep.sum()), "degenerate": res.degenerate,
            })
    mcnemars = []
    for a, b in pairs:
        flags_a = [jam_not_dissipated(r["jam_lifetime"]) for r in by[a]]
        flags_b = [jam_not_dissipated(r["jam_lifetime"]) for r in by[b]]
        disc_b = sum(1 for fa, fb in zip(flags_a, flags_b) if fa and not fb)
        disc_c = sum(1 for fa, fb in zip(flags_a, flags_b) if fb and not fa)
        entry = {"metric": "jam_not_dissipated", "pair": f"{a}_vs_{b}",
                 "b": disc_b, "c": disc_c}
        if disc_b + disc_c > 0:
            res = mcnemar(disc_b, disc_c)
            entry.update(statistic=res.statistic, df=res.df, p_value=res.p_value)
        else:
            entry.update(statistic=None, df=None, p_value=None, note="no discordant pairs")
        mcnemars.append(entry)
    if "haptic" in by and "automated" in by:
        ca = [bool(r["collision"]) for r in by["haptic"]]
        cb = [bool(r["collision"]) for r in by["automated"]]
        disc_b = sum(1 for fa, fb in zip(ca, cb) if fa and not fb)
        disc_c = sum(1 for fa, fb in zip(ca, cb) if fb and not fa)
        entry = {"metric": "collision", "pair": "haptic_vs_automated", "b": disc_b, "c": disc_c}
        if disc_b + disc_c > 0:
            res = mcnemar(disc_b, disc_c)
            entry.update(statistic=res.statistic, df=res.df, p_value=res.p_value)
        else:
            entry.update(statistic=None, df=None, p_value=None, note="no discordant pairs")
        mcnemars.append(entry)
    return {"version": 1, "paired_t": comparisons, "mcnemar": mcnemars}


@main.command()
@click.option("--n", "n_participants", type=int, default=24, show_default=True)
@click.option("--conditions", default="manual,haptic,automated", show_default=True)
@click.option("--base-seed", type=int, default=1, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--workers", type=int, default=1, show_default=True,
              help="Worker processes; results merge deterministically.")
@click.option("--extract-participant", type=int, default=0, show_default=True,
              help="Participant whose time series are extracted for plotting.")
@click.option("--extract-hz", type=float, default=20.0, show_default=True)
def experiment(n_participants, conditions, base_seed, config_path, out, workers,
               extract_participant, extract_hz):
    """Run the paired cohort; write metrics CSV, stats JSON and extracts."""
    try:
        cond_list = [Condition(c.strip()) for c in conditions.split(",") if c.strip()]
        if not cond_list:
            raise ValueError("no conditions given")
        base = load_config(config_path)
    except (ValueError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc))

    out_dir = _out_dir(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix="ringdrive-", dir=out_dir))
    try:
        stride = max(1, int(round(1.0 / (extract_hz * base.dt))))

        extracts: dict[str, Path] = {}

        def consume(participant: int, condition: Condition, log: SessionLog) -> None:
            if participant != extract_participant:
                return
            path = tmp / f"timeseries_{condition.value}_p{participant}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t", "ego_gap", "ego_speed", "vcmd",
                                 "accel_pedal", "brake_pedal", "accel_stiffness"])
                for k in range(0, log.n_steps, stride):
                    vcmd = log.vcmd[k]
                    writer.writerow([
                        f"{log.time[k]:.2f}", f"{log.ego_gap[k]:.4f}",
                        f"{log.speeds[k, 0]:.4f}",
                        "" if math.isnan(vcmd) else f"{vcmd:.4f}",
                        f"{log.accel_position[k]:.4f}", f"{log.brake_position[k]:.4f}",
                        f"{log.accel_stiffness[k]:.2f}",
                    ])
            extracts[condition.value] = path

        rows = run_cohort(
            n_participants, cond_list, base_seed,
            base_config=base, workers=workers, log_consumer=consume,
        )
        _write_metrics_csv(tmp / "metrics.csv", rows)
        report = _stats_report(rows, [c.value for c in cond_list])
        (tmp / "stats.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")

        for name in os.listdir(tmp):
            os.replace(tmp / name, out_dir / name)
    except Exception:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    shutil.rmtree(tmp, ignore_errors=True)
    click.echo(f"wrote {out_dir / 'metrics.csv'} and {out_dir / 'stats.json'} "
               f"({len(rows)} sessions)")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8700, show_default=True)
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Static files served over HTTP alongside the socket.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
def serve(host, port, ui_dir, config_path):
    """Serve interactive sessions over a websocket (plus the browser UI)."""
    import asyncio

    from .service import serve_forever

    try:
        base = load_config(config_path)
    except (ValueError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"session service on ws://{host}:{port} (Ctrl-C stops)")
    try:
        asyncio.run(serve_forever(host, port, base_config=base, ui_dir=ui_dir))
    except KeyboardInterrupt:
        click.echo("stopped")


if __name__ == "__main__":
    sys.exit(main())
