"""Render figures from sweep result tables.

Kept apart from the sweep itself, which only emits data: `report` consumes a
result CSV and writes PNG figures plus a short text summary next to it.
"""

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .harness import latency_reduction, read_rows_csv

_STYLE = {
    "pasar": {"color": "tab:red", "marker": "o"},
    "harq-i": {"color": "tab:gray", "marker": "s"},
    "harq-cc": {"color": "tab:blue", "marker": "^"},
    "harq-ir": {"color": "tab:green", "marker": "v"},
}


def _group(rows, keys):
    grouped = defaultdict(list)
    for row in rows:
        grouped[tuple(getattr(row, k) for k in keys)].append(row)
    return grouped


def _latency_figure(rows, packet_bits, prune_rate, out_dir):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for (scheme,), srows in sorted(_group(rows, ("scheme",)).items()):
        srows = sorted(srows, key=lambda r: r.snr_db)
        ax.plot([r.snr_db for r in srows], [r.mean_t_total for r in srows],
                label=scheme, **_STYLE.get(scheme, {}))
    ax.set_xlabel("average SNR (dB)")
    ax.set_ylabel("mean transmission slots")
    ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    ax.set_title(f"{packet_bits} info bits/packet, prune rate {prune_rate:g}")
    path = out_dir / f"latency_vs_snr_bits{packet_bits}_prune{prune_rate:g}.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def _reduction_figure(rows, packet_bits, out_dir):
    schemes = {r.scheme for r in rows}
    if "pasar" not in schemes or len({r.prune_rate for r in rows}) < 2:
        return None
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    snrs = sorted({r.snr_db for r in rows})
    plotted = False
    for baseline in sorted(schemes - {"pasar"}):
        for snr in snrs:
            sub = [r for r in rows if r.snr_db == snr and r.packet_bits == packet_bits]
            pasar_rows = [r for r in sub if r.scheme == "pasar"]
            base_rows = [r for r in sub if r.scheme == baseline]
            if not pasar_rows or not base_rows:
                continue
            entries = sorted(latency_reduction(pasar_rows, base_rows),
                             key=lambda e: e["prune_rate"])
            ax.plot([e["prune_rate"] for e in entries],
                    [e["reduction_pct"] for e in entries],
                    marker="o", label=f"vs {baseline}, {snr:g} dB")
            plotted = True
    if not plotted:
        plt.close(fig)
        return None
    ax.set_xlabel("prune rate")
    ax.set_ylabel("latency reduction (%)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title(f"Reduction vs uniform baselines, {packet_bits} bits/packet")
    path = out_dir / f"reduction_vs_prune_bits{packet_bits}.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def render_report(rows_or_csv, out_dir) -> list:
    """Write latency and reduction figures plus summary.txt; returns the paths."""
    if isinstance(rows_or_csv, (str, Path)):
        rows = read_rows_csv(rows_or_csv)
    else:
        rows = list(rows_or_csv)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for (packet_bits, prune_rate), group in sorted(
            _group(rows, ("packet_bits", "prune_rate")).items()):
        written.append(_latency_figure(group, packet_bits, prune_rate, out_dir))
    for packet_bits in sorted({r.packet_bits for r in rows}):
        fig = _reduction_figure([r for r in rows if r.packet_bits == packet_bits],
                                packet_bits, out_dir)
        if fig:
            written.append(fig)

    summary = out_dir / "summary.txt"
    with open(summary, "w") as fh:
        fh.write(f"{'scheme':8s} {'snr_db':>7s} {'bits':>5s} {'prune':>6s} "
                 f"{'mean_t':>10s} {'fail':>6s}\n")
        for r in sorted(rows, key=lambda r: (r.packet_bits, r.prune_rate,
                                             r.snr_db, r.scheme)):
            fh.write(f"{r.scheme:8s} {r.snr_db:7.1f} {r.packet_bits:5d} "
                     f"{r.prune_rate:6.2f} {r.mean_t_total:10.1f} "
                     f"{r.failure_rate:6.3f}\n")
    written.append(summary)
    return written
