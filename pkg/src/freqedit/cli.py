"""Command-line front door: run, ablate, and verify subcommands.

Outputs are deterministic functions of the config: CSV metrics with
fixed 12-significant-digit formatting, optional per-turn PNG dumps, and
a dependency-free SVG polyline plot of the metric curves.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from itertools import product
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .editsim import TurnRecord, run_session, variant_name
from .grids import save_png

CSV_HEADER = "turn,psnr_db,ssim,l1,hf_ratio_vs_x1,hf_ratio_vs_prev"


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.12g}"


def _csv_lines(records: list[TurnRecord]) -> list[str]:
    lines = [CSV_HEADER]
    for r in records:
        m, p = r.vs_original, r.vs_previous
        lines.append(",".join([
            str(r.turn), _fmt(m.psnr_db), _fmt(m.ssim), _fmt(m.l1),
            _fmt(m.hf_ratio), _fmt(p.hf_ratio),
        ]))
    return lines


def write_metrics_csv(path: Path, records: list[TurnRecord]) -> None:
    path.write_text("\n".join(_csv_lines(records)) + "\n", encoding="utf-8", newline="\n")


def write_svg_plot(path: Path, records: list[TurnRecord]) -> None:
    """Polyline chart of hf ratio and SSIM vs the original image, per turn."""
    width, height, margin = 480, 320, 40
    turns = [r.turn for r in records]
    series = {
        "hf_ratio_vs_x1": ([r.vs_original.hf_ratio for r in records], "#d62728"),
        "ssim_vs_x1": ([r.vs_original.ssim for r in records], "#1f77b4"),
    }
    tmax = max(turns)
    ymax = max(1.0, max(max(v) for v, _ in series.values()))

    def sx(t):
        return margin + (width - 2 * margin) * (t - 1) / max(tmax - 1, 1)

    def sy(v):
        return height - margin - (height - 2 * margin) * v / ymax

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
    ]
    y_label = 14
    for name, (vals, color) in series.items():
        pts = " ".join(f"{sx(t):.2f},{sy(v):.2f}" for t, v in zip(turns, vals))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{margin + 4}" y="{y_label}" fill="{color}" font-size="12">{name}</text>')
        y_label += 14
    parts.append(f'<text x="{width // 2}" y="{height - 8}" font-size="12">turn</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8", newline="\n")


def _emit(cfg: RunConfig, out_dir: Path, records: list[TurnRecord], prefix: str = "") -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.emit.csv:
        write_metrics_csv(out_dir / f"{prefix}metrics.csv", records)
    if cfg.emit.png_per_turn:
        for r in records:
            save_png(out_dir / f"{prefix}turn_{r.turn}.png", r.image)
    if cfg.emit.svg_plot:
        write_svg_plot(out_dir / f"{prefix}plot.svg", records)


def cmd_run(cfg: RunConfig, out_dir: Path) -> int:
    try:
        records = run_session(cfg.session())
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(cfg, out_dir, records)
    return 0


def cmd_ablate(cfg: RunConfig, out_dir: Path, jobs: int = 1) -> int:
    from .editsim import _variant_config  # same toggle semantics as ablation_grid

    base_session = cfg.session()
    variants = [
        (variant_name(*flags),
         replace(base_session, mode="freqedit",
                 cfg=_variant_config(cfg.freqedit, *flags)))
        for flags in product((True, False), repeat=3)
    ]
    try:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(lambda v: run_session(v[1]), variants))
        else:
            results = [run_session(s) for _, s in variants]
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = ["variant,final_turn,final_hf_ratio_vs_x1,final_psnr_db,final_ssim"]
    for (name, _), records in zip(variants, results):
        _emit(cfg, out_dir, records, prefix=f"{name}_")
        last = records[-1]
        summary.append(",".join([
            name, str(last.turn), _fmt(last.vs_original.hf_ratio),
            _fmt(last.vs_original.psnr_db), _fmt(last.vs_original.ssim),
        ]))
    (out_dir / "summary.csv").write_text("\n".join(summary) + "\n", encoding="utf-8", newline="\n")
    return 0


def cmd_verify() -> int:
    from .verify import run_all

    failures = run_all()
    if failures:
        print(f"{failures} criterion(s) failed")
        return 1
    print("all criteria passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freqedit",
                                     description="Multi-turn editing simulation lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p_run = sub.add_parser("run", help="run one editing session and emit metrics")
    add_common(p_run)
    p_ablate = sub.add_parser("ablate", help="run the 2^3 component-toggle grid")
    add_common(p_ablate)
    p_ablate.add_argument("--jobs", type=int, default=1, help="parallel session workers")
    sub.add_parser("verify", help="run the acceptance suite")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify()
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    out_dir = args.out or (Path(cfg.out_dir) if cfg.out_dir else Path("out"))
    if args.command == "run":
        return cmd_run(cfg, out_dir)
    return cmd_ablate(cfg, out_dir, jobs=args.jobs)


if __name__ == "__main__":
    sys.exit(main())
