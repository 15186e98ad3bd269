"""Figures for the command line report.  Everything renders off-screen to a
file; nothing here is needed by the library itself."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

LEAF = "#d9ead3"
INNER = "#fce5cd"


def _layout(node, depth=0, pos=None, leaves=None):
    # leaves get consecutive x slots, inner nodes sit above their children
    if pos is None:
        pos, leaves = {}, [0]
    if not node.children:
        pos[id(node)] = (leaves[0], -depth)
        leaves[0] += 1
        return pos
    xs = []
    for child in node.children.values():
        _layout(child, depth + 1, pos, leaves)
        xs.append(pos[id(child)][0])
    pos[id(node)] = ((min(xs) + max(xs)) / 2.0, -depth)
    return pos


def _label(node, own=None):
    head = node.split if node.split is not None else "leaf"
    if own:
        head += "\n{" + ", ".join(own) + "}"
    return head


def plot_split_tree(root, path, title=None, trace=None):
    """Draw a split-configuration tree.

    ``trace`` is an optional solver DecompositionNode with the same shape;
    its own-variable sets are shown under each split.
    """
    pos = _layout(root)
    owns = {}
    if trace is not None:
        for n, t in zip(root.walk(), trace.walk()):
            owns[id(n)] = t.order
    width = max(x for x, _ in pos.values()) + 1
    depth = -min(y for _, y in pos.values()) + 1
    fig, ax = plt.subplots(figsize=(max(4.0, 2.2 * width), max(2.5, 1.6 * depth)))
    for node in root.walk():
        x0, y0 = pos[id(node)]
        for state, child in node.children.items():
            x1, y1 = pos[id(child)]
            ax.plot([x0, x1], [y0, y1], color="0.4", lw=1, zorder=1)
            ax.text((x0 + x1) / 2, (y0 + y1) / 2, state, fontsize=8, ha="center", va="center",
                    bbox=dict(boxstyle="round,pad=0.15", fc="white", ec="none"), zorder=2)
    for node in root.walk():
        x, y = pos[id(node)]
        ax.text(x, y, _label(node, owns.get(id(node))), ha="center", va="center", fontsize=8,
                bbox=dict(boxstyle="round,pad=0.3", fc=LEAF if node.exhaustive else INNER, ec="0.3"),
                zorder=3)
    ax.set_xlim(-0.7, width - 0.3)
    ax.set_ylim(-depth + 0.5, 0.5)
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_oracle_summary(scenarios, product, meu_solver, meu_oracle, path, title=None):
    """Scenario count against the full state space product, and the two
    MEU values side by side."""
    fig, (a, b) = plt.subplots(1, 2, figsize=(7.5, 3))
    a.bar(["scenarios", "state space"], [scenarios, product], color=["#6fa8dc", "0.7"])
    a.set_yscale("log")
    a.set_title("tree size", fontsize=9)
    for i, v in enumerate([scenarios, product]):
        a.text(i, v, str(v), ha="center", va="bottom", fontsize=8)
    b.bar(["solver", "oracle"], [meu_solver, meu_oracle], color=["#93c47d", "#e06666"])
    b.set_title(f"MEU (diff {abs(meu_solver - meu_oracle):.1e})", fontsize=9)
    for ax in (a, b):
        ax.spines[["top", "right"]].set_visible(False)
        ax.tick_params(labelsize=8)
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
