"""Figure builders over the simulator's trajectory/summary/compare CSVs.

Rendering is a pure function of file content: per-run trajectories as
thin pale lines with a thicker dark ensemble mean, the contact-outcome
transition with seeded ±0.025 horizontal jitter, and the architecture
comparison. No statistics are computed beyond means and fractions of
columns already present.
"""

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

ATTRIBUTES = ("x", "c", "s", "a", "b")
ATTR_COLORS = {
    "x": "tab:blue",
    "c": "tab:orange",
    "s": "maroon",
    "a": "tab:red",
    "b": "tab:red",
}
JITTER = 0.025
JITTER_SEED = 1234  # fixed so scatters are reproducible


class MissingColumnError(ValueError):
    def __init__(self, column, path):
        self.column = column
        super().__init__(f"missing column {column!r} in {path}")


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def require_columns(rows, columns, path):
    present = rows[0].keys() if rows else ()
    for column in columns:
        if column not in present:
            raise MissingColumnError(column, path)


def _select_p(rows, p, path):
    values = sorted({float(r["p"]) for r in rows})
    if p is None:
        if len(values) != 1:
            raise ValueError(f"{path} holds p values {values}; pass an explicit p")
        return rows, values[0]
    chosen = [r for r in rows if abs(float(r["p"]) - p) < 1e-9]
    if not chosen:
        raise ValueError(f"p={p} not present in {path} (has {values})")
    return chosen, p


def plot_trajectories(traj_csv, out, p=None):
    """Five panels (x c s a b) vs generation: one pale line per run plus the mean."""
    rows = read_rows(traj_csv)
    require_columns(rows, ("run", "p", "generation") + ATTRIBUTES, traj_csv)
    rows, p = _select_p(rows, p, traj_csv)
    runs = sorted({int(r["run"]) for r in rows})
    generations = sorted({int(r["generation"]) for r in rows})

    fig, axes = plt.subplots(1, 5, figsize=(15, 2.8), sharex=True)
    for ax, attr in zip(axes, ATTRIBUTES):
        color = ATTR_COLORS[attr]
        series = {}
        for r in rows:
            if r[attr] == "":
                continue  # stability is undefined at generation 0
            series.setdefault(int(r["run"]), []).append(
                (int(r["generation"]), float(r[attr])))
        for run in runs:
            pts = sorted(series.get(run, []))
            ax.plot([g for g, _ in pts], [v for _, v in pts],
                    color=color, alpha=0.25, lw=0.8)
        mean_pts = []
        for g in generations:
            vals = [v for run in runs for gg, v in series.get(run, []) if gg == g]
            if vals:
                mean_pts.append((g, float(np.mean(vals))))
        ax.plot([g for g, _ in mean_pts], [v for _, v in mean_pts],
                color=color, lw=2.4)
        ax.set_title(attr)
        ax.set_xlabel("generations")
        ax.set_ylim(-0.1, 1.1)
    fig.suptitle(f"p = {p:g}")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    return fig


def transition_points(summary_rows, traj_rows):
    """Scatter/mean data for the transition figure.

    Measured points are per-run final a values at each simulated p; the
    mirrored region reuses the final b values, plotted at 1 - p, since
    the two parent languages are interchangeable.
    """
    finals = {}
    for r in traj_rows:
        if int(r["generation"]) == 0:
            finals.setdefault(float(r["p"]), []).append(
                (float(r["final_a"]), float(r["final_b"])))
    measured_p, measured_a, mirrored_p, mirrored_b = [], [], [], []
    for p in sorted(finals):
        for a, b in finals[p]:
            measured_p.append(p)
            measured_a.append(a)
            if p > 0.5:
                mirrored_p.append(round(1.0 - p, 10))
                mirrored_b.append(b)
    mean_x, mean_y = [], []
    for row in summary_rows:
        p = float(row["p"])
        if p > 0.5:
            mean_x.append(round(1.0 - p, 10))
            mean_y.append(float(row["mean_b"]))
    for row in summary_rows:
        mean_x.append(float(row["p"]))
        mean_y.append(float(row["mean_a"]))
    order = np.argsort(mean_x)
    return {
        "measured_p": np.array(measured_p),
        "measured_a": np.array(measured_a),
        "mirrored_p": np.array(mirrored_p),
        "mirrored_b": np.array(mirrored_b),
        "mean_x": np.array(mean_x)[order],
        "mean_y": np.array(mean_y)[order],
    }


def plot_transition(summary_csv, traj_csv, out):
    """Panel A: fraction of runs with a>0.9 / b>0.9 vs p. Panel B: final a
    per run with jitter, mirrored to p<0.5 through the b values."""
    summary_rows = read_rows(summary_csv)
    require_columns(summary_rows, ("p", "frac_a_gt_0.9", "frac_b_gt_0.9",
                                   "mean_a", "mean_b"), summary_csv)
    traj_rows = read_rows(traj_csv)
    require_columns(traj_rows, ("p", "generation", "final_a", "final_b"), traj_csv)

    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(9, 3.4))
    ps = [float(r["p"]) for r in summary_rows]
    ax_a.plot(ps, [float(r["frac_a_gt_0.9"]) for r in summary_rows],
              marker="o", color="tab:red", label="a > 0.9")
    ax_a.plot(ps, [float(r["frac_b_gt_0.9"]) for r in summary_rows],
              marker="s", color="tab:red", alpha=0.5, label="b > 0.9")
    ax_a.set_xlabel("p")
    ax_a.set_ylabel("fraction of runs")
    ax_a.set_ylim(-0.05, 1.05)
    ax_a.legend()
    ax_a.set_title("A")

    pts = transition_points(summary_rows, traj_rows)
    rng = np.random.default_rng(JITTER_SEED)
    jitter_m = rng.uniform(-JITTER, JITTER, pts["measured_p"].size)
    jitter_r = rng.uniform(-JITTER, JITTER, pts["mirrored_p"].size)
    ax_b.scatter(pts["measured_p"] + jitter_m, pts["measured_a"],
                 s=8, color="black", alpha=0.6)
    ax_b.scatter(pts["mirrored_p"] + jitter_r, pts["mirrored_b"],
                 s=8, color="black", alpha=0.6)
    ax_b.plot(pts["mean_x"], pts["mean_y"], color="tab:red", lw=2.0)
    ax_b.set_xlabel("p")
    ax_b.set_ylabel("a")
    ax_b.set_title("B")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    return fig


def plot_compare(merged_csv, out):
    """Mean final a vs p, one curve per architecture label."""
    rows = read_rows(merged_csv)
    require_columns(rows, ("arch", "p", "run", "final_a"), merged_csv)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    labels = sorted({r["arch"] for r in rows})
    for label in labels:
        grouped = {}
        for r in rows:
            if r["arch"] == label:
                grouped.setdefault(float(r["p"]), []).append(float(r["final_a"]))
        ps = sorted(grouped)
        ax.plot(ps, [float(np.mean(grouped[p])) for p in ps], marker="o", label=label)
    ax.set_xlabel("p")
    ax.set_ylabel("mean final a")
    ax.set_ylim(-0.05, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    return fig
