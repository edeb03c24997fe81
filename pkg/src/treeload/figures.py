"""Optional rendering of report tables to image files.

Imported lazily by the CLI when ``--figure`` is given, so matplotlib never
loads on the plain CSV path.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# kinds whose natural display is log-log / semilog
_LOGLOG = {"joint", "marginal-n", "marginal-q", "ccdf-n", "ccdf-q",
           "load-pmf", "load-ccdf", "cond-mean-n", "load-mean"}
_SEMILOGX = {"cond-mean-q"}


def render_table(columns, rows, kind: str, path: str) -> None:
    """Render a two-or-more column table to ``path``.

    The first column is the support; an ``empirical`` column is drawn as
    points and an ``analytic`` one as a line, mirroring the usual
    simulation-versus-theory overlay.  Other kinds fall back to a single
    curve of column 2 against column 1.
    """
    if not rows:
        raise ValueError("nothing to plot")
    cols = {name: [row[i] for row in rows] for i, name in enumerate(columns)}
    names = list(columns)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))

    if kind == "joint" and {"n", "q", "p"} <= set(names) and \
            "empirical" not in names:
        # analytic joint table: one curve per distinct q (cuts in n)
        by_q = {}
        for n, q, p in zip(cols["n"], cols["q"], cols["p"]):
            by_q.setdefault(q, ([], []))
            by_q[q][0].append(n)
            by_q[q][1].append(p)
        shown = 0
        for q in sorted(by_q):
            xs, ys = by_q[q]
            if len(xs) < 3:
                continue
            ax.plot(xs, ys, lw=1.0, label=f"q={q}")
            shown += 1
            if shown >= 8:
                break
        ax.set_xlabel(names[0])
        ax.set_ylabel("p")
    else:
        x = cols[names[0]] if "lambda" not in names else cols["lambda"]
        xlabel = names[0] if "lambda" not in names else "lambda"
        if "empirical" in names and "analytic" in names:
            ax.plot(x, cols["analytic"], "-", lw=1.2, label="analytic")
            ax.plot(x, cols["empirical"], "o", ms=3.0, mfc="none",
                    label="simulation")
            ax.set_ylabel(kind)
        else:
            ycol = names[1] if names[0] != "lambda" else names[-1]
            ax.plot(x, cols[ycol], "-", lw=1.2)
            ax.set_ylabel(ycol)
        ax.set_xlabel(xlabel)

    positive = all(v > 0 for v in cols[names[0]] if v is not None) if \
        isinstance(cols[names[0]][0], (int, float)) else False
    if kind in _LOGLOG and positive:
        ax.set_xscale("log")
        ax.set_yscale("log")
    elif kind in _SEMILOGX and positive:
        ax.set_xscale("log")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
