"""Exact expected capture times for arbitrary searcher policies.

A searcher policy assigns every branch node a favored child and a bias
beta: with probability beta the searcher enters the favored branch first
without consulting the signal, otherwise she follows the signal.  For a
hider at leaf v the searcher enters the wrong branch first at an on-path
branch node j with probability

    w(j) = (1 - beta) q          if v lies in j's favored branch,
    w(j) = beta + (1 - beta) q   otherwise,

wasting exactly twice the off-branch length before resuming, so

    E[T | v] = d(root, v) + sum over on-path branch nodes of w(j) * 2 * mu_off(j).

Branch nodes off the root-to-v path contribute nothing: both of their
branches are swept in full either way.  This closed form is O(depth) per
leaf and is cross-checked against stochastic play-outs and the brute-force
strategy enumeration elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .tree import RootedTree

if TYPE_CHECKING:
    from .solver import SignalAccuracy, Solution


@dataclass(frozen=True)
class BranchChoice:
    """Per-branch-node searcher behavior: favored child and bias in [0, 1]."""

    favored_child: str
    beta: float


@dataclass(frozen=True)
class SearcherPolicy:
    """A favored-child/bias assignment for every branch node of a tree.

    Policies produced by the solver always have beta <= 1/2, but any beta
    in [0, 1] is accepted here so that suboptimal play can be evaluated.
    """

    choices: Mapping[str, BranchChoice]

    def for_node(self, node: str) -> BranchChoice:
        return self.choices[node]

    def validate(self, tree: RootedTree) -> None:
        """Check the policy covers exactly the branch nodes of `tree`."""
        branch_nodes = set(tree.branch_nodes)
        covered = set(self.choices)
        missing = branch_nodes - covered
        if missing:
            raise ValueError(
                f"policy is incomplete: no choice for branch node(s) "
                f"{sorted(missing)}"
            )
        extra = covered - branch_nodes
        if extra:
            raise ValueError(f"policy names non-branch node(s) {sorted(extra)}")
        for node, choice in self.choices.items():
            if choice.favored_child not in tree.children(node):
                raise ValueError(
                    f"favored child {choice.favored_child!r} is not a child "
                    f"of {node!r}"
                )
            if not 0.0 <= choice.beta <= 1.0:
                raise ValueError(
                    f"beta at {node!r} must lie in [0, 1], got {choice.beta}"
                )

    def replace(self, node: str, choice: BranchChoice) -> "SearcherPolicy":
        """Copy of this policy with the choice at one node swapped out."""
        updated = dict(self.choices)
        updated[node] = choice
        return SearcherPolicy(updated)


def _off_branch_length(tree: RootedTree, node: str, entered: str) -> float:
    (other,) = (c for c in tree.children(node) if c != entered)
    return tree.arc_length(other) + tree.subtree_length(other)


def expected_capture_time(
    tree: RootedTree,
    policy: SearcherPolicy,
    leaf: str,
    acc: "SignalAccuracy",
) -> float:
    """Exact expected time to reach `leaf` under `policy`."""
    if not tree.is_leaf(leaf):
        raise ValueError(f"hider location {leaf!r} is not a leaf")
    policy.validate(tree)
    q = acc.q
    path = tree.path_from_root(leaf)
    total = tree.depth(leaf)
    for node, entered in zip(path, path[1:]):
        if len(tree.children(node)) != 2:
            continue
        choice = policy.for_node(node)
        if entered == choice.favored_child:
            wrong_first = (1.0 - choice.beta) * q
        else:
            wrong_first = choice.beta + (1.0 - choice.beta) * q
        total += wrong_first * 2.0 * _off_branch_length(tree, node, entered)
    return total


@dataclass(frozen=True)
class BestResponse:
    leaf: str
    time: float


def hider_best_response(
    tree: RootedTree, policy: SearcherPolicy, acc: "SignalAccuracy"
) -> BestResponse:
    """The leaf maximizing expected capture time; exact ties go to the
    lexicographically first leaf."""
    best_leaf, best_time = None, -np.inf
    for leaf in tree.leaves:
        t = expected_capture_time(tree, policy, leaf, acc)
        if t > best_time:
            best_leaf, best_time = leaf, t
    return BestResponse(best_leaf, best_time)


def hider_expected_time(
    tree: RootedTree,
    policy: SearcherPolicy,
    lam: Mapping[str, float],
    acc: "SignalAccuracy",
    tol: float = 1e-9,
) -> float:
    """Expected capture time when the hider draws a leaf from `lam`."""
    unknown = set(lam) - set(tree.leaves)
    if unknown:
        raise ValueError(f"distribution names non-leaf entries {sorted(unknown)}")
    if any(w < 0 for w in lam.values()):
        raise ValueError("distribution has negative mass")
    total_mass = sum(lam.values())
    if abs(total_mass - 1.0) > tol:
        raise ValueError(f"distribution sums to {total_mass!r}, not 1")
    return sum(
        w * expected_capture_time(tree, policy, leaf, acc)
        for leaf, w in lam.items()
        if w > 0.0
    )


NODE_MATRIX_COLUMNS = ("[1,1]", "[2,2]", "follow", "opposite")


@dataclass(frozen=True)
class NodeMatrix:
    """2x4 payoff matrix of the one-node game between branch 1 and branch 2.

    Rows: hide (optimally) in branch 1 / branch 2.  Columns: the four pure
    signal-contingent rules -- always enter branch 1, always branch 2,
    follow the signal, oppose the signal.  Entries are expected capture
    times given branch lengths mu_i and continuation values V_i.
    """

    matrix: np.ndarray
    columns: tuple[str, ...] = NODE_MATRIX_COLUMNS

    def column(self, label: str) -> np.ndarray:
        return self.matrix[:, self.columns.index(label)]


def node_matrix(
    mu1: float, mu2: float, v1: float, v2: float, acc: "SignalAccuracy"
) -> NodeMatrix:
    """Build the one-node 2x4 payoff matrix.

    Entering the wrong branch first wastes twice its length; under
    "follow" that happens with probability q, under "opposite" with
    probability p.
    """
    if mu1 < 0 or mu2 < 0:
        raise ValueError("branch lengths must be nonnegative")
    if v1 < 0 or v2 < 0:
        raise ValueError("branch values must be nonnegative")
    p, q = acc.p, acc.q
    matrix = np.array(
        [
            [v1, 2 * mu2 + v1, q * 2 * mu2 + v1, p * 2 * mu2 + v1],
            [2 * mu1 + v2, v2, q * 2 * mu1 + v2, p * 2 * mu1 + v2],
        ]
    )
    return NodeMatrix(matrix)


@dataclass(frozen=True)
class IndifferenceReport:
    """Outcome of checking hider indifference under the solved policy."""

    passed: bool
    value: float
    capture_times: Mapping[str, float]
    max_time_error: float
    max_mass_ratio_error: float
    violations: tuple[str, ...]


def verify_indifference(
    tree: RootedTree,
    solution: "Solution",
    acc: "SignalAccuracy",
    tol: float = 1e-9,
) -> IndifferenceReport:
    """Check that the solved policy equalizes every leaf's capture time.

    Under the optimal policy every leaf's exact expected capture time must
    equal the game value, and at every branch node the optimal hider mass
    ratio must equal p*mu1 / (p*mu1 + q*mu2).  Returns a report listing any
    violations by name rather than raising.
    """
    policy = solution.policy()
    value = solution.value
    violations: list[str] = []

    times: dict[str, float] = {}
    max_time_err = 0.0
    for leaf in tree.leaves:
        t = expected_capture_time(tree, policy, leaf, acc)
        times[leaf] = t
        err = abs(t - value)
        max_time_err = max(max_time_err, err)
        if err > tol:
            violations.append(
                f"leaf {leaf!r}: capture time {t!r} differs from value "
                f"{value!r} by {err:.3e}"
            )

    # Mass below each node, for the branch-ratio check.
    below: dict[str, float] = {}
    for node in tree.postorder():
        children = tree.children(node)
        if not children:
            below[node] = solution.lambda_bar[node]
        else:
            below[node] = sum(below[c] for c in children)

    p, q = acc.p, acc.q
    max_ratio_err = 0.0
    for node in tree.branch_nodes:
        sol = solution.nodes[node]
        favored = sol.favored_child
        (other,) = (c for c in tree.children(node) if c != favored)
        mu1 = tree.arc_length(favored) + tree.subtree_length(favored)
        mu2 = tree.arc_length(other) + tree.subtree_length(other)
        x_star = p * mu1 / (p * mu1 + q * mu2)
        if below[node] <= 1e-15:
            continue  # off-support subtree (possible only at p = 1)
        ratio = below[favored] / below[node]
        err = abs(ratio - x_star)
        max_ratio_err = max(max_ratio_err, err)
        if err > tol:
            violations.append(
                f"branch node {node!r}: hider mass ratio {ratio!r} differs "
                f"from p*mu1/(p*mu1+q*mu2) = {x_star!r} by {err:.3e}"
            )

    return IndifferenceReport(
        passed=not violations,
        value=value,
        capture_times=times,
        max_time_error=max_time_err,
        max_mass_ratio_error=max_ratio_err,
        violations=tuple(violations),
    )
