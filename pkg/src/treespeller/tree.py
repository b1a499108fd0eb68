"""Finite cuts of the infinite prefix tree: grow, prune, greedy selection.

A finite query tree partitions the space of all complete strings into leaf
regions: plain leafs (a whole subtree), stop leafs (exactly one complete
string), wildcard leafs (a union of merged sibling subtrees), and the
go-back leaf (everything not prefixed by the current root).  The greedy
selector approximates the cut whose minimum-mass leaf is as large as
possible, subject to a leaf budget L.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .alphabet import STOP, Alphabet

INTERNAL = "internal"
PLAIN = "plain"
WILDCARD = "wildcard"
GOBACK = "goback"
STOP_LEAF = "stop"

LEAF_KINDS = (PLAIN, WILDCARD, GOBACK, STOP_LEAF)


class TreeNode:
    __slots__ = ("prefix", "kind", "mass", "children", "covered", "parent")

    def __init__(self, prefix: str, kind: str, mass: float, covered: tuple[str, ...] = ()):
        self.prefix = prefix
        self.kind = kind
        self.mass = mass
        self.children: list[TreeNode] = []
        # for wildcard leafs: the sibling prefixes this node stands in for
        self.covered = covered if covered else ((prefix,) if kind != GOBACK else ())
        self.parent: TreeNode | None = None

    @property
    def is_leaf(self) -> bool:
        return self.kind != INTERNAL

    @property
    def sort_key(self) -> str:
        return min(self.covered) if self.covered else self.prefix

    def __repr__(self) -> str:
        return f"TreeNode({self.prefix!r}, {self.kind}, {self.mass:.4g})"


class FiniteQueryTree:
    """A cut rooted at `root_prefix`, plus the go-back leaf when the root
    is nonempty."""

    def __init__(self, root: TreeNode, root_prefix: str, goback: TreeNode | None):
        if (goback is not None) != (root_prefix != ""):
            raise ValueError("go-back leaf exists iff the root prefix is nonempty")
        self.root = root
        self.root_prefix = root_prefix
        self.goback = goback

    @property
    def leafs(self) -> list[TreeNode]:
        """Clockwise order: go-back first, then depth-first alphabetical."""
        out: list[TreeNode] = []
        if self.goback is not None:
            out.append(self.goback)

        def walk(node: TreeNode):
            if node.is_leaf:
                out.append(node)
            else:
                for child in node.children:
                    walk(child)

        walk(self.root)
        return out

    @property
    def leaf_count(self) -> int:
        return len(self.leafs)

    def map_string(self, s: str) -> TreeNode:
        """F: the unique leaf whose region contains complete string `s`."""
        if self.root_prefix and not s.startswith(self.root_prefix):
            return self.goback
        node = self.root
        while not node.is_leaf:
            target = node.prefix + s[len(node.prefix)]
            node = self._child_for(node, target)
        return node

    def map_prefix(self, p: str) -> TreeNode | None:
        """The leaf whose region contains every string prefixed by `p`, if
        one exists (None when `p` spans multiple leaf regions)."""
        if self.root_prefix and not p.startswith(self.root_prefix):
            return self.goback
        node = self.root
        while not node.is_leaf:
            if len(p) <= len(node.prefix):
                return None
            target = node.prefix + p[len(node.prefix)]
            node = self._child_for(node, target)
        return node

    @staticmethod
    def _child_for(node: TreeNode, target: str) -> TreeNode:
        for child in node.children:
            if child.kind == WILDCARD:
                if target in child.covered:
                    return child
            elif child.prefix == target:
                return child
        raise LookupError(f"no child of {node.prefix!r} covers {target!r}")


def grow(
    tree: FiniteQueryTree,
    leaf: TreeNode,
    next_char_dist: np.ndarray,
    alphabet: Alphabet,
) -> FiniteQueryTree:
    """Expand a plain leaf into one child per alphabet symbol.

    Children split the leaf's mass by the supplied next-character
    distribution; the ``.`` child is a stop leaf and can never be grown.
    """
    if leaf.kind != PLAIN:
        raise ValueError(f"only plain leafs may be grown, got {leaf.kind}")
    leaf.kind = INTERNAL
    leaf.covered = ()
    for i, c in enumerate(alphabet):
        kind = STOP_LEAF if c == STOP else PLAIN
        child = TreeNode(leaf.prefix + c, kind, leaf.mass * float(next_char_dist[i]))
        child.parent = leaf
        leaf.children.append(child)
    leaf.children.sort(key=lambda n: n.sort_key)
    return tree


def prune(tree: FiniteQueryTree, s1: TreeNode, s2: TreeNode) -> FiniteQueryTree:
    """Merge two sibling leafs into one wildcard leaf.

    When the merge leaves the parent with a single leaf child, that child
    covers the parent's entire subtree, so the parent collapses back into
    a plain leaf (the exact inverse of ``grow``).  This keeps deep chains
    prunable all the way down to the leaf budget.
    """
    if s1.kind == GOBACK or s2.kind == GOBACK:
        raise ValueError("the go-back leaf may not be pruned")
    if s1.parent is None or s1.parent is not s2.parent:
        raise ValueError("prune requires two siblings")
    if not (s1.is_leaf and s2.is_leaf):
        raise ValueError("prune requires two leafs")
    covered = tuple(sorted(set(s1.covered) | set(s2.covered)))
    merged = TreeNode(min(covered), WILDCARD, s1.mass + s2.mass, covered)
    parent = s1.parent
    merged.parent = parent
    parent.children = [c for c in parent.children if c is not s1 and c is not s2]
    parent.children.append(merged)
    parent.children.sort(key=lambda n: n.sort_key)
    if len(parent.children) == 1:
        parent.kind = PLAIN
        parent.mass = merged.mass
        parent.children = []
        parent.covered = (parent.prefix,)
    return tree


def select_tree(
    posterior_next_char: Callable[[str], np.ndarray],
    root_prefix: str,
    root_mass: float,
    L: int,
    alphabet: Alphabet,
    max_depth: int | None = None,
    max_grows: int = 100_000,
) -> FiniteQueryTree:
    """Greedy cut selection under a leaf budget.

    Phase 1 grows any plain leaf whose mass exceeds 1/L (largest first);
    phase 2 repeatedly merges the minimum-mass leaf with its minimum-mass
    sibling until at most L leafs remain.  All masses are global posterior
    beliefs, so they sum to 1 across the tree including the go-back leaf.
    """
    if L < 2:
        raise ValueError(f"leaf budget must be >= 2, got {L}")
    root = TreeNode(root_prefix, PLAIN, root_mass)
    goback = None
    if root_prefix:
        goback = TreeNode(root_prefix, GOBACK, max(0.0, 1.0 - root_mass))
    tree = FiniteQueryTree(root, root_prefix, goback)

    threshold = 1.0 / L
    grows = 0
    while True:
        candidates = [
            n
            for n in tree.leafs
            if n.kind == PLAIN
            and n.mass > threshold
            and (max_depth is None or len(n.prefix) - len(root_prefix) < max_depth)
        ]
        if not candidates:
            break
        node = min(candidates, key=lambda n: (-n.mass, n.prefix))
        grow(tree, node, posterior_next_char(node.prefix), alphabet)
        grows += 1
        if grows > max_grows:
            raise RuntimeError("grow phase failed to terminate")

    while tree.leaf_count > L:
        candidates = sorted(
            (n for n in tree.leafs if n.kind != GOBACK),
            key=lambda n: (n.mass, n.sort_key),
        )
        merged = False
        for s1 in candidates:
            if s1.parent is None:
                continue
            sibs = [c for c in s1.parent.children if c is not s1 and c.is_leaf]
            if not sibs:
                continue
            s2 = min(sibs, key=lambda n: (n.mass, n.sort_key))
            prune(tree, s1, s2)
            merged = True
            break
        if not merged:
            break  # no prunable pair; leave the tree over budget
    return tree


def advance_root(
    belief: Callable[[str], float],
    alphabet: Alphabet,
    alpha: float,
) -> str:
    """Longest prefix whose belief is at least `alpha`.

    The empty prefix has belief 1, so the result always exists.  Complete
    strings are never returned as roots (a decision handles those).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    prefix = ""
    while True:
        best_char, best_belief = None, alpha
        for c in alphabet:
            if c == STOP:
                continue
            b = belief(prefix + c)
            if b > best_belief or (b == best_belief and best_char is None):
                best_char, best_belief = c, b
        if best_char is None:
            return prefix
        prefix += best_char


def leaf_records(
    tree: FiniteQueryTree,
    assignment: np.ndarray | None = None,
    angles: np.ndarray | None = None,
    prev_tree: FiniteQueryTree | None = None,
) -> list[dict]:
    """Wire serialization of the leaf set, in clockwise order.

    `parent_leaf_prev` is the prefix of the previous query's leaf whose
    region contained this leaf (the animation origin), when unambiguous.
    """
    records = []
    for i, leaf in enumerate(tree.leafs):
        prev_prefix = None
        if prev_tree is not None:
            origin = prev_tree.map_prefix(leaf.prefix) if leaf.kind != GOBACK else None
            if origin is not None:
                prev_prefix = origin.prefix
        records.append(
            {
                "prefix": leaf.prefix,
                "kind": leaf.kind,
                "mass": float(leaf.mass),
                "covered": list(leaf.covered),
                "symbol": int(assignment[i]) if assignment is not None else None,
                "angle": float(angles[int(assignment[i])]) if angles is not None and assignment is not None else None,
                "parent_leaf_prev": prev_prefix,
            }
        )
    return records
