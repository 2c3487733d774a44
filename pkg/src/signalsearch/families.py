"""Factories for the tree instances used throughout tests and experiments."""

from __future__ import annotations

import numpy as np

from .tree import RootedTree


def two_arc(length_a: float, length_b: float) -> RootedTree:
    """Root "O" with two leaf arcs "A" and "B" of the given lengths."""
    return RootedTree("O", [("O", "A", length_a), ("O", "B", length_b)])


def perfect_binary_tree(n: int, total_length: float = 1.0) -> RootedTree:
    """Perfect binary tree of height `n` with equal arcs summing to `total_length`.

    The tree has 2**n leaves and 2**(n+1) - 2 arcs, so every arc has length
    total_length / (2**(n+1) - 2) and every leaf sits at constant depth
    n * total_length / (2**(n+1) - 2).  Nodes are named by their root path
    as bit strings ("0", "1", "00", ...); the root is "O".
    """
    if n < 1:
        raise ValueError(f"height must be >= 1, got {n}")
    if total_length <= 0:
        raise ValueError(f"total length must be positive, got {total_length}")
    arc = total_length / (2 ** (n + 1) - 2)
    edges = []
    frontier = [""]
    for _ in range(n):
        next_frontier = []
        for path in frontier:
            for bit in "01":
                child = path + bit
                parent = path if path else "O"
                edges.append((parent, child, arc))
                next_frontier.append(child)
        frontier = next_frontier
    return RootedTree("O", edges)


def random_tree(
    rng: np.random.Generator,
    max_leaves: int = 4,
    length_range: tuple[float, float] = (0.1, 10.0),
    root_arc_probability: float = 0.25,
) -> RootedTree:
    """Draw a random binary tree with 1..max_leaves leaves.

    Arc lengths are uniform in `length_range`.  Topology is drawn by
    recursive uniform splits of the leaf count, so all shapes occur.  With
    `root_arc_probability` the root hangs by a single stem arc above the
    first branch, exercising the degree-one root case.  The output is
    already in binary form.
    """
    lo, hi = length_range
    if not 0 < lo <= hi:
        raise ValueError(f"invalid length range {length_range}")
    n_leaves = int(rng.integers(1, max_leaves + 1))
    edges: list[tuple[str, str, float]] = []
    counts = {"leaf": 0, "node": 0}

    def draw_len() -> float:
        return float(rng.uniform(lo, hi))

    def grow(parent: str, leaves_here: int) -> None:
        if leaves_here == 1:
            counts["leaf"] += 1
            edges.append((parent, f"L{counts['leaf']:02d}", draw_len()))
            return
        counts["node"] += 1
        node = f"N{counts['node']:02d}"
        edges.append((parent, node, draw_len()))
        split = int(rng.integers(1, leaves_here))
        grow(node, split)
        grow(node, leaves_here - split)

    if n_leaves == 1:
        edges.append(("O", "L01", draw_len()))
    elif rng.random() < root_arc_probability:
        grow("O", n_leaves)
    else:
        split = int(rng.integers(1, n_leaves))
        grow("O", split)
        grow("O", n_leaves - split)
    tree = RootedTree("O", edges)
    assert tree.is_binary
    return tree
