"""Minimal SVG line plots of trajectory columns."""

import io


def svg_plot(series, xlabel="t (fs)", ylabel="", title=""):
    """Render ``{label: (x, y)}`` as an SVG string."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, (x, y) in series.items():
        ax.plot(x, y, label=label, lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    buf = io.StringIO()
    # fixed hash salt and no date keep the output reproducible
    with matplotlib.rc_context({"svg.hashsalt": "excitonium"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def trajectory_svg(traj, pairs=(), title=""):
    t = traj.t()
    series = {"E": (t, traj.E()), "W": (t, traj.W()), "trace": (t, traj.trace())}
    for i, j in pairs:
        series[f"C_{i}{j}"] = (t, traj.concurrence(i, j))
    return svg_plot(series, title=title or traj.solver)


def comparison_svg(trajs, title="global entanglement"):
    return svg_plot({name: (tr.t(), tr.E()) for name, tr in trajs.items()},
                    ylabel="E (nats)", title=title)
