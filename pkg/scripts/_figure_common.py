"""Shared sweep and plotting helpers for the figure scripts."""

import argparse
import math
from pathlib import Path

import numpy as np

from ppm_jscc.bounds import best_bound_beta, db_to_linear
from ppm_jscc.experiment import ExperimentConfig, GridSearch, Scheme, default_output_dir, emit_report, run_point
from ppm_jscc.separation import optimize_quantizer
from ppm_jscc.signal import SourceModel


def parse_args(description, default_grid):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--enr-db", type=float, nargs="+", default=default_grid)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", type=Path, default=None)
    args = p.parse_args()
    args.out_dir = args.out_dir or default_output_dir()
    return args


def sdr_sweep(analog: Scheme, separation: Scheme, args, stem: str) -> Path:
    """Optimised analog PPM against the separation baseline, as SDR vs ENR."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    common = dict(enr_grid_db=args.enr_db, trials=args.trials, master_seed=args.seed, workers=args.workers)
    a_cfg = ExperimentConfig(analog, beta_policy=GridSearch(), **common)
    s_cfg = ExperimentConfig(separation, **common)
    analog_rows, sep_rows = [], []
    for i, db in enumerate(args.enr_db):
        analog_rows.append(run_point(a_cfg, i))
        sep_rows.append(run_point(s_cfg, i))
        print(f"{db:5.1f} dB  analog SDR {analog_rows[-1].sdr_db:7.2f} (beta {analog_rows[-1].beta:.4g})"
              f"  separation SDR {sep_rows[-1].sdr_db:7.2f} (M {int(sep_rows[-1].beta)})", flush=True)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    emit_report(analog_rows, args.out_dir / f"{stem}_analog.csv")
    emit_report(sep_rows, args.out_dir / f"{stem}_separation.csv")

    source = analog.source
    var = SourceModel(source).variance
    fine = np.linspace(min(args.enr_db), max(args.enr_db), 60)
    bound_sdr = [10 * math.log10(var / best_bound_beta(source, float(db_to_linear(d)))[1]) for d in fine]
    sep_pred = [10 * math.log10(var / optimize_quantizer(float(db_to_linear(d)), source)[1]) for d in args.enr_db]

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.plot(fine, 2 * 10 * np.log10(np.e) * db_to_linear(fine), ":", color="k", label="separation limit")
    ax.plot(fine, bound_sdr, "-", label="analog PPM, bound optimised over beta")
    ax.plot(args.enr_db, [r.sdr_db for r in analog_rows], "o", label="analog PPM (MC, beta searched)")
    ax.plot(args.enr_db, [r.sdr_db for r in sep_rows], "s", label="quantiser + digital PPM (MC)")
    ax.plot(args.enr_db, sep_pred, "--", label="quantiser + digital PPM (exact)")
    ax.set_xlabel("ENR [dB]")
    ax.set_ylabel("SDR [dB]")
    ax.set_ylim(0, max(max(bound_sdr), max(r.sdr_db for r in analog_rows)) * 1.15)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = args.out_dir / f"{stem}.svg"
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path
