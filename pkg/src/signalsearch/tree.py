"""Rooted metric trees: parsing, validation, binarization, and queries.

A tree is a connected acyclic network whose arcs carry positive lengths
(travel time at unit speed) with one node designated as the root, the
searcher's starting point.  The game machinery downstream works on
*binary* trees, so :func:`normalize` rewrites any tree into binary form:
nodes with more than two children are split into a cascade of binary
branch nodes joined by zero-length arcs, and pass-through nodes (exactly
one child, other than the root) are contracted away.  Leaf identities,
leaf depths, and total length are preserved exactly.

Trees are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence


class TreeError(ValueError):
    """Raised for malformed tree files or invalid tree structure."""


# Arc records are (parent, child, length, inserted); `inserted` marks the
# zero-length arcs created by binarization.
_Arc = tuple[str, str, float, bool]


@dataclass(frozen=True)
class NodeView:
    """Read-only snapshot of one node's position in the tree."""

    node: str
    parent: str | None
    children: tuple[str, ...]
    is_leaf: bool
    depth: float


class RootedTree:
    """Immutable rooted metric tree.

    Construction validates connectivity, acyclicity, and arc lengths, then
    orients every arc away from the root.  Children are kept in
    lexicographic name order, which fixes the deterministic child order
    used for tie-breaking and strategy indexing everywhere downstream.
    """

    def __init__(self, root: str, edges: Iterable[Sequence]) -> None:
        """Build a tree from a root name and (u, v, length[, inserted]) arcs.

        The orientation of each input pair is informational only; arcs are
        re-oriented along the path structure implied by the root.
        """
        arcs: dict[frozenset[str], tuple[float, bool]] = {}
        adjacency: dict[str, list[str]] = {}
        for edge in edges:
            if len(edge) == 3:
                u, v, length = edge
                inserted = False
            else:
                u, v, length, inserted = edge
            u, v = str(u), str(v)
            length = float(length)
            if u == v:
                raise TreeError(f"arc {u!r}-{v!r} is a self-loop")
            key = frozenset((u, v))
            if key in arcs:
                raise TreeError(f"duplicate arc {u!r}-{v!r}")
            if length <= 0.0 and not inserted:
                raise TreeError(
                    f"arc {u!r}-{v!r} has non-positive length {length!r}"
                )
            if length < 0.0:
                raise TreeError(f"arc {u!r}-{v!r} has negative length {length!r}")
            arcs[key] = (length, bool(inserted))
            adjacency.setdefault(u, []).append(v)
            adjacency.setdefault(v, []).append(u)

        root = str(root)
        nodes = set(adjacency) or {root}
        if root not in nodes:
            raise TreeError(f"root {root!r} is not an endpoint of any arc")
        if len(arcs) > len(nodes) - 1:
            raise TreeError("arc set contains a cycle")

        # Orient away from the root; detect unreachable nodes.
        parent: dict[str, str | None] = {root: None}
        children: dict[str, tuple[str, ...]] = {}
        depth: dict[str, float] = {root: 0.0}
        order: list[str] = [root]
        stack = [root]
        while stack:
            node = stack.pop()
            kids = sorted(n for n in adjacency.get(node, ()) if n != parent[node])
            children[node] = tuple(kids)
            for kid in kids:
                parent[kid] = node
                length, _ = arcs[frozenset((node, kid))]
                depth[kid] = depth[node] + length
                order.append(kid)
                stack.append(kid)
        unreachable = nodes - set(order)
        if unreachable:
            missing = ", ".join(repr(n) for n in sorted(unreachable)[:5])
            raise TreeError(f"tree is disconnected: cannot reach {missing} from root")

        self._root = root
        self._parent = parent
        self._children = children
        self._depth = depth
        self._preorder = tuple(order)
        self._arc_up: dict[str, float] = {}
        self._arc_inserted: dict[str, bool] = {}
        for node in order[1:]:
            length, inserted = arcs[frozenset((node, parent[node]))]
            self._arc_up[node] = length
            self._arc_inserted[node] = inserted

        # Subtree lengths in one post-order pass.
        self._subtree_len: dict[str, float] = {}
        for node in reversed(order):
            self._subtree_len[node] = sum(
                self._arc_up[c] + self._subtree_len[c] for c in children[node]
            )
        self._leaves = tuple(sorted(n for n in order if not children[n]))

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    @property
    def root(self) -> str:
        return self._root

    @property
    def nodes(self) -> tuple[str, ...]:
        """All node names in preorder from the root."""
        return self._preorder

    @property
    def leaves(self) -> tuple[str, ...]:
        """Leaf names in lexicographic order."""
        return self._leaves

    @property
    def branch_nodes(self) -> tuple[str, ...]:
        """Nodes with exactly two children, in lexicographic order."""
        return tuple(sorted(n for n, c in self._children.items() if len(c) == 2))

    @property
    def total_length(self) -> float:
        """Sum of all arc lengths (the tree length mu)."""
        return self._subtree_len[self._root]

    @property
    def is_binary(self) -> bool:
        """True if every non-root node has 0 or 2 children and the root 1 or 2."""
        for node in self._preorder:
            k = len(self._children[node])
            if node == self._root:
                if k > 2:
                    return False
            elif k not in (0, 2):
                return False
        return True

    def _require(self, node: str) -> None:
        if node not in self._children:
            raise TreeError(f"unknown node {node!r}")

    def children(self, node: str) -> tuple[str, ...]:
        self._require(node)
        return self._children[node]

    def parent(self, node: str) -> str | None:
        self._require(node)
        return self._parent[node]

    def is_leaf(self, node: str) -> bool:
        self._require(node)
        return not self._children[node]

    def depth(self, node: str) -> float:
        """Distance from the root to `node`."""
        self._require(node)
        return self._depth[node]

    def arc_length(self, child: str) -> float:
        """Length of the arc joining `child` to its parent."""
        self._require(child)
        if child == self._root:
            raise TreeError(f"root {child!r} has no parent arc")
        return self._arc_up[child]

    def arc_inserted(self, child: str) -> bool:
        """True if the arc above `child` was inserted by binarization."""
        self._require(child)
        if child == self._root:
            raise TreeError(f"root {child!r} has no parent arc")
        return self._arc_inserted[child]

    def subtree_length(self, node: str) -> float:
        """Sum of arc lengths strictly below `node`."""
        self._require(node)
        return self._subtree_len[node]

    def view(self, node: str) -> NodeView:
        self._require(node)
        return NodeView(
            node=node,
            parent=self._parent[node],
            children=self._children[node],
            is_leaf=not self._children[node],
            depth=self._depth[node],
        )

    def path_from_root(self, node: str) -> tuple[str, ...]:
        """Nodes on the root-to-`node` path, root first, `node` last."""
        self._require(node)
        path = [node]
        while (up := self._parent[path[-1]]) is not None:
            path.append(up)
        return tuple(reversed(path))

    def postorder(self) -> Iterator[str]:
        return reversed(self._preorder)

    def arcs(self) -> tuple[_Arc, ...]:
        """All arcs as (parent, child, length, inserted), sorted by child."""
        return tuple(
            (self._parent[c], c, self._arc_up[c], self._arc_inserted[c])
            for c in sorted(self._arc_up)
        )

    # ------------------------------------------------------------------
    # Identity and serialization
    # ------------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RootedTree):
            return NotImplemented
        return self._root == other._root and self.arcs() == other.arcs()

    def __hash__(self) -> int:
        return hash((self._root, self.arcs()))

    def __repr__(self) -> str:
        return (
            f"RootedTree(root={self._root!r}, nodes={len(self._preorder)}, "
            f"leaves={len(self._leaves)}, length={self.total_length:g})"
        )

    def to_json(self) -> str:
        """Serialize in the tree-file format (inserted arcs excluded)."""
        edges = [[p, c, length] for p, c, length, ins in self.arcs() if not ins]
        return json.dumps({"root": self._root, "edges": edges})

    def content_hash(self) -> str:
        """Short stable hash of the tree structure, lengths included."""
        payload = repr((self._root, self.arcs())).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def parse_tree(text: str) -> RootedTree:
    """Parse a tree file: {"root": str, "edges": [[u, v, length], ...]}.

    Node names are preserved as given and no normalization is applied.
    Raises :class:`TreeError` with a diagnostic naming the offending
    element for malformed syntax, duplicate arcs, disconnected or cyclic
    graphs, an unknown root, or a non-positive arc length.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeError(f"malformed tree file: {exc}") from exc
    if not isinstance(doc, dict):
        raise TreeError("tree file must be a JSON object")
    if "root" not in doc:
        raise TreeError('tree file is missing the "root" key')
    if "edges" not in doc:
        raise TreeError('tree file is missing the "edges" key')
    root = doc["root"]
    if not isinstance(root, str):
        raise TreeError(f'"root" must be a string, got {root!r}')
    edges = doc["edges"]
    if not isinstance(edges, list):
        raise TreeError('"edges" must be an array')
    cleaned = []
    for i, edge in enumerate(edges):
        if (
            not isinstance(edge, list)
            or len(edge) != 3
            or not isinstance(edge[0], str)
            or not isinstance(edge[1], str)
            or isinstance(edge[2], bool)
            or not isinstance(edge[2], (int, float))
        ):
            raise TreeError(
                f"edge #{i} must be [parent, child, length], got {edge!r}"
            )
        cleaned.append((edge[0], edge[1], float(edge[2])))
    return RootedTree(root, cleaned)


def _fresh_name(base: str, used: set[str]) -> str:
    name = base
    while name in used:
        name += "+"
    used.add(name)
    return name


def normalize(tree: RootedTree) -> RootedTree:
    """Return the binary form of `tree`.

    Nodes with more than two children are split into a left-fold cascade of
    binary nodes (children taken in lexicographic order) joined by
    zero-length arcs; non-root nodes with exactly one child are contracted
    by adding their two arc lengths.  Leaves, leaf depths, and total length
    are unchanged.  The result of normalizing an already-binary tree equals
    the input, so the operation is idempotent.
    """
    original = set(tree.nodes)
    used = set(original)
    arcs: list[_Arc] = []

    def descend(node: str, length: float, inserted: bool) -> tuple[str, float, bool]:
        # Contract pass-through chains below `node` into a single arc.
        while len(tree.children(node)) == 1:
            (child,) = tree.children(node)
            inserted = inserted and tree.arc_inserted(child)
            length += tree.arc_length(child)
            node = child
        return node, length, inserted and length == 0.0

    def attach(parent: str, target: str, length: float, inserted: bool) -> None:
        arcs.append((parent, target, length, inserted))
        if target in original:
            pending.append(target)

    root = tree.root
    pending: list[str] = []
    if len(tree.children(root)) == 1:
        # The root keeps its single arc, but chains below it still contract.
        (child,) = tree.children(root)
        attach(root, *descend(child, tree.arc_length(child), tree.arc_inserted(child)))
    else:
        pending.append(root)

    while pending:
        node = pending.pop()
        branches = [
            descend(child, tree.arc_length(child), tree.arc_inserted(child))
            for child in tree.children(node)
        ]
        branches.sort(key=lambda b: b[0])
        # Left-fold k > 2 children into a chain of binary nodes.
        counter = 1
        while len(branches) > 2:
            (a, la, ia), (b, lb, ib) = branches[0], branches[1]
            joint = _fresh_name(f"{node}+{counter}", used)
            counter += 1
            attach(joint, a, la, ia)
            attach(joint, b, lb, ib)
            branches[:2] = [(joint, 0.0, True)]
        for target, length, inserted in branches:
            attach(node, target, length, inserted)
    return RootedTree(root, arcs)


def subtree_length(tree: RootedTree, node: str) -> float:
    """Sum of arc lengths strictly below `node` (zero for a leaf)."""
    return tree.subtree_length(node)


def leaf_depths(tree: RootedTree) -> dict[str, float]:
    """Distance from the root to every leaf, keyed by leaf name."""
    return {leaf: tree.depth(leaf) for leaf in tree.leaves}
