"""Figures summarizing a batch run, rendered to PNG next to the CSV.

Only batch mode draws; single-instance analysis stays text-only.  All three
figures read the typed per-instance rows that also feed the CSV, so the
pictures and the table always describe the same numbers.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)


def _num(row: dict, key: str) -> float | None:
    v = row.get(key)
    if v is None or v == "":
        return None
    return float(v)


def render_batch_figures(rows: list[dict], out_dir: str | Path) -> list[Path]:
    """Write the bound-tightness figures for a finished batch; returns paths.

    Figures with no applicable data are skipped, so asymmetric-only or
    table-only suites do not produce empty axes.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    # 1. stabilization cost against the grand tour cost, with the one-third
    #    reference line and the spanning-tree bound where available
    pts = [(r, _num(r, "c_grand"), _num(r, "cos")) for r in rows]
    pts = [(r, g, c) for r, g, c in pts if g is not None and c is not None]
    if pts:
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        xs = [g for _, g, _ in pts]
        ax.scatter(xs, [c for _, _, c in pts], s=18, label="cost of stability")
        mst_pts = [(g, b) for r, g, _ in pts
                   if (b := _num(r, "bound_mst")) is not None]
        if mst_pts:
            ax.scatter([g for g, _ in mst_pts], [b for _, b in mst_pts],
                       s=18, marker="x", label="spanning-tree bound")
        lim = [0.0, max(xs) * 1.05]
        ax.plot(lim, [v / 3.0 for v in lim], ls="--", lw=1, color="gray",
                label="one third of grand cost")
        ax.plot(lim, [v / 2.0 for v in lim], ls=":", lw=1, color="gray",
                label="half of grand cost")
        ax.set_xlabel("grand coalition cost")
        ax.set_ylabel("subsidy")
        ax.set_title("Stabilization cost and bounds vs grand cost")
        ax.legend(fontsize=8)
        fig.tight_layout()
        p = out_dir / "cos_bounds.png"
        fig.savefig(p, dpi=120)
        plt.close(fig)
        written.append(p)

    # 2. semicore stabilization cost against its two constructive bounds
    pairs = []
    for r in rows:
        c = _num(r, "coss")
        if c is None:
            continue
        for key, label in (("bound_max_marginal", "max marginal"),
                           ("bound_avg_ir", "average round trip")):
            b = _num(r, key)
            if b is not None:
                pairs.append((c, b, label))
    if pairs:
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        for label, marker in (("max marginal", "o"), ("average round trip", "x")):
            sel = [(c, b) for c, b, lab in pairs if lab == label]
            if sel:
                ax.scatter([c for c, _ in sel], [b for _, b in sel],
                           s=18, marker=marker, label=label)
        top = max(max(c for c, _, _ in pairs), max(b for _, b, _ in pairs))
        ax.plot([0, top], [0, top], ls="--", lw=1, color="gray", label="equality")
        ax.set_xlabel("exact semicore stabilization cost")
        ax.set_ylabel("bound value")
        ax.set_title("Semicore bounds vs exact value")
        ax.legend(fontsize=8)
        fig.tight_layout()
        p = out_dir / "coss_bounds.png"
        fig.savefig(p, dpi=120)
        plt.close(fig)
        written.append(p)

    # 3. ratio of the two semicore quantities against player count; the
    #    curve n/(n-1) is the predicted exact relation
    rat = []
    for r in rows:
        c, s = _num(r, "coss"), _num(r, "sOeS")
        if c is not None and s is not None and s > 1e-12:
            rat.append((int(r["n"]), c / s))
    if rat:
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        ax.scatter([n for n, _ in rat], [v for _, v in rat], s=18,
                   label="observed ratio")
        ns = sorted({n for n, _ in rat})
        ax.plot(ns, [n / (n - 1.0) for n in ns], ls="--", lw=1, color="gray",
                label="n/(n-1)")
        ax.set_xlabel("players")
        ax.set_ylabel("ratio of semicore subsidy to slack")
        ax.set_title("Semicore subsidy/slack ratio by player count")
        ax.legend(fontsize=8)
        fig.tight_layout()
        p = out_dir / "coss_soes_ratio.png"
        fig.savefig(p, dpi=120)
        plt.close(fig)
        written.append(p)

    return written
