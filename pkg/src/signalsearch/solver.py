"""Exact solution of the noisy-signal search game on a binary rooted tree.

The game: a hider picks a leaf, a searcher walks a depth-first route from
the root at unit speed, and on each first arrival at a branch node receives
a signal naming the branch that holds the hider.  The signal is correct
with known probability p in (1/2, 1]; the payoff (to the hider) is the
capture time.

The solution is a single bottom-up sweep.  Writing q = 1 - p, and at a
branch node letting branch i have length mu_i, mean depth D_i, and value
V_i (with the *favored* branch 1 chosen so that D_1 >= D_2):

* hider mass splits between the branches as  p*mu_1 : q*mu_2,
* mean depth aggregates as  D = (p mu_1 D_1 + q mu_2 D_2)/(p mu_1 + q mu_2),
* subtree value is  V = 2 q mu + (p - q) D,
* the searcher enters the favored branch first, ignoring the signal, with
  the favoring bias  beta = (p - q)(D_1 - D_2) / (2 (p mu_1 + q mu_2)),
  and otherwise follows the signal.

A pass-through arc of length l above a subtree adds l to each of mu, D, V.
Leaves are the base case with mu = D = V = 0.  At p -> 1/2 the hider mass
reverts to the classic no-signal equal-branch-density split and V -> mu; at
p = 1 the value drops to the mean depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .evaluator import BranchChoice, SearcherPolicy
from .tree import RootedTree


@dataclass(frozen=True)
class SignalAccuracy:
    """Probability p in (1/2, 1] that a branch signal points the right way."""

    p: float

    def __post_init__(self) -> None:
        p = float(self.p)
        if not 0.5 < p <= 1.0:
            raise ValueError(f"signal accuracy must lie in (1/2, 1], got {p!r}")
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        """Probability the signal points the wrong way."""
        return 1.0 - self.p


@dataclass(frozen=True)
class NodeSolution:
    """Solution of the subtree game rooted at one node.

    `mu`, `mean_depth`, and `value` describe the game started at this node;
    `favored_child` and `beta` are present only for branch nodes.
    """

    mu: float
    mean_depth: float
    value: float
    favored_child: str | None = None
    beta: float | None = None


@dataclass(frozen=True)
class Solution:
    """Full solution: per-node annotations plus the optimal hider law."""

    tree: RootedTree
    accuracy: SignalAccuracy
    nodes: Mapping[str, NodeSolution]
    lambda_bar: Mapping[str, float] = field(repr=False)

    @property
    def value(self) -> float:
        return self.nodes[self.tree.root].value

    @property
    def mean_depth(self) -> float:
        return self.nodes[self.tree.root].mean_depth

    @property
    def total_length(self) -> float:
        return self.nodes[self.tree.root].mu

    def policy(self) -> SearcherPolicy:
        """The optimal searcher policy: favored child and bias per branch node."""
        return SearcherPolicy(
            {
                node: BranchChoice(sol.favored_child, sol.beta)
                for node, sol in self.nodes.items()
                if sol.favored_child is not None
            }
        )


def _require_binary(tree: RootedTree) -> None:
    for node in tree.nodes:
        k = len(tree.children(node))
        if node == tree.root:
            if k > 2:
                raise ValueError(
                    f"tree is not normalized: root {node!r} has {k} children"
                )
        elif k not in (0, 2):
            raise ValueError(f"tree is not normalized: node {node!r} has {k} children")


def _branch_stats(
    tree: RootedTree, nodes: dict[str, NodeSolution], parent: str, child: str
) -> tuple[float, float, float]:
    """(mu, D, V) of the branch consisting of the arc to `child` plus its subtree."""
    arc = tree.arc_length(child)
    sub = nodes[child]
    return arc + sub.mu, arc + sub.mean_depth, arc + sub.value


def solve(tree: RootedTree, acc: SignalAccuracy) -> Solution:
    """Solve the game exactly on a binary tree.

    Raises ValueError if the tree is not in binary form (see
    :func:`signalsearch.tree.normalize`) or if a branch node has two
    zero-length branches, which cannot occur for trees built from
    positive-length arcs.
    """
    _require_binary(tree)
    p, q = acc.p, acc.q

    nodes: dict[str, NodeSolution] = {}
    for node in tree.postorder():
        children = tree.children(node)
        if not children:
            nodes[node] = NodeSolution(0.0, 0.0, 0.0)
        elif len(children) == 1:
            mu, d, v = _branch_stats(tree, nodes, node, children[0])
            nodes[node] = NodeSolution(mu, d, v)
        else:
            first = _branch_stats(tree, nodes, node, children[0])
            second = _branch_stats(tree, nodes, node, children[1])
            # Favored branch: the larger mean depth; ties go to the earlier
            # child, where the bias is zero and the choice payoff-irrelevant.
            if second[1] > first[1]:
                favored, other = children[1], children[0]
                (mu1, d1, _), (mu2, d2, _) = second, first
            else:
                favored, other = children[0], children[1]
                (mu1, d1, _), (mu2, d2, _) = first, second
            weight = p * mu1 + q * mu2
            if weight <= 0.0:
                raise ValueError(
                    f"branch node {node!r} has two zero-length branches"
                )
            mu = mu1 + mu2
            d = (p * mu1 * d1 + q * mu2 * d2) / weight
            v = 2.0 * q * mu + (p - q) * d
            beta = (p - q) * (d1 - d2) / (2.0 * weight)
            nodes[node] = NodeSolution(mu, d, v, favored, beta)

    # Hider mass flows down, splitting p*mu1 : q*mu2 at each branch node.
    lambda_bar: dict[str, float] = {}
    mass = {tree.root: 1.0}
    for node in tree.nodes:
        m = mass[node]
        children = tree.children(node)
        if not children:
            lambda_bar[node] = m
        elif len(children) == 1:
            mass[children[0]] = m
        else:
            sol = nodes[node]
            favored = sol.favored_child
            other = children[1] if favored == children[0] else children[0]
            mu1 = _branch_stats(tree, nodes, node, favored)[0]
            mu2 = _branch_stats(tree, nodes, node, other)[0]
            weight = p * mu1 + q * mu2
            mass[favored] = m * p * mu1 / weight
            mass[other] = m * q * mu2 / weight
    return Solution(tree, acc, nodes, {leaf: lambda_bar[leaf] for leaf in tree.leaves})


@dataclass(frozen=True)
class PenultimateSolution:
    """Closed form for a branch node whose branches are two leaf arcs."""

    beta: float
    x_star: float
    value: float


def penultimate_solution(
    long: float, short: float, acc: SignalAccuracy
) -> PenultimateSolution:
    """Closed-form solution for two leaf arcs of lengths `long` >= `short`.

    beta   = (p - q)(long - short) / (2 (p long + q short))
    x_star = p long / (p long + q short)   (hider mass on the long arc)
    value  = 2 q (long + short) + (p - q)(p long^2 + q short^2)/(p long + q short)

    Equal lengths give beta = 0 and x_star = p.
    """
    if short <= 0 or long <= 0:
        raise ValueError(f"arc lengths must be positive, got {long}, {short}")
    if short > long:
        raise ValueError(f"short arc {short} exceeds long arc {long}")
    p, q = acc.p, acc.q
    weight = p * long + q * short
    beta = (p - q) * (long - short) / (2.0 * weight)
    x_star = p * long / weight
    value = 2.0 * q * (long + short) + (p - q) * (p * long**2 + q * short**2) / weight
    return PenultimateSolution(beta, x_star, value)


def constant_depth_value(
    tree: RootedTree, acc: SignalAccuracy, tol: float = 1e-9
) -> float:
    """Value 2*q*mu + (p-q)*r for a tree whose leaves all sit at depth r."""
    depths = [tree.depth(leaf) for leaf in tree.leaves]
    r = depths[0]
    for leaf, d in zip(tree.leaves, depths):
        if abs(d - r) > tol:
            raise ValueError(
                f"tree does not have constant depth: leaf {leaf!r} at {d}, "
                f"expected {r}"
            )
    return 2.0 * acc.q * tree.total_length + (acc.p - acc.q) * r


def ebd_distribution(tree: RootedTree) -> dict[str, float]:
    """Classic no-signal hider optimum: equal branch density.

    At every branch node the hiding mass splits in proportion to the branch
    lengths.  This is the p -> 1/2 limit of the signal-aware distribution.
    """
    _require_binary(tree)
    mass = {tree.root: 1.0}
    out: dict[str, float] = {}
    for node in tree.nodes:
        m = mass[node]
        children = tree.children(node)
        if not children:
            out[node] = m
        elif len(children) == 1:
            mass[children[0]] = m
        else:
            a, b = children
            mu_a = tree.arc_length(a) + tree.subtree_length(a)
            mu_b = tree.arc_length(b) + tree.subtree_length(b)
            mass[a] = m * mu_a / (mu_a + mu_b)
            mass[b] = m * mu_b / (mu_a + mu_b)
    return {leaf: out[leaf] for leaf in tree.leaves}
