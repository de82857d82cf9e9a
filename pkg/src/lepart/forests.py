"""Rooted spanning forests, the partitions they induce, and text formats."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROOT = -1


@dataclass(frozen=True)
class RootedForest:
    """Parent assignment over vertices 0..n-1; parent[v] == -1 marks a root.

    Parent pointers must be acyclic and every vertex must reach a root.
    The number of roots equals the number of trees.
    """

    parent: tuple

    @property
    def n_vertices(self) -> int:
        return len(self.parent)

    def roots(self) -> tuple:
        return tuple(v for v, p in enumerate(self.parent) if p == ROOT)

    @property
    def n_trees(self) -> int:
        return sum(1 for p in self.parent if p == ROOT)

    def root_of(self) -> np.ndarray:
        """Tree root of every vertex, following parent pointers."""
        n = self.n_vertices
        parent = self.parent
        for v, p in enumerate(parent):
            if p != ROOT and not 0 <= p < n:
                raise ValueError(f"parent {p} of vertex {v} is out of range")
        root = np.full(n, -1, dtype=np.int64)
        for v in range(n):
            chain = []
            u = v
            while root[u] < 0 and parent[u] != ROOT:
                chain.append(u)
                u = parent[u]
                if len(chain) > n:
                    raise ValueError("parent pointers contain a cycle")
            r = root[u] if root[u] >= 0 else u
            root[v] = r
            for c in chain:
                root[c] = r
        return root

    def validate(self, weights: np.ndarray | None = None) -> None:
        """Check acyclicity, root reachability, and edge existence."""
        self.root_of()
        if weights is not None:
            for v, p in enumerate(self.parent):
                if p != ROOT and weights[v, p] <= 0.0:
                    raise ValueError(f"forest edge ({v},{p}) has no weight")


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty vertex blocks covering 0..n-1.

    Blocks are ordered by their smallest vertex and block_id[v] is the
    index of the block containing v, so equal partitions compare equal.
    """

    block_id: tuple
    blocks: tuple

    @property
    def n_vertices(self) -> int:
        return len(self.block_id)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def block_sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Build the canonical partition from any per-vertex labeling."""
        labels = list(labels)
        order = {}
        members: list[list[int]] = []
        for v, lab in enumerate(labels):
            ix = order.get(lab)
            if ix is None:
                ix = len(members)
                order[lab] = ix
                members.append([])
            members[ix].append(v)
        block_id = tuple(order[lab] for lab in labels)
        blocks = tuple(tuple(b) for b in members)
        return cls(block_id=block_id, blocks=blocks)


def forest_to_partition(forest: RootedForest) -> Partition:
    """Blocks are the vertex sets of the forest's trees."""
    return Partition.from_labels(forest.root_of().tolist())


def forest_to_text(forest: RootedForest) -> str:
    """One line per vertex: "v parent", parent -1 for roots."""
    return "".join(f"{v} {p}\n" for v, p in enumerate(forest.parent))


def forest_from_text(text: str) -> RootedForest:
    entries = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        v_s, p_s = line.split()
        entries[int(v_s)] = int(p_s)
    n = len(entries)
    if sorted(entries) != list(range(n)):
        raise ValueError("forest text must cover vertices 0..n-1 exactly once")
    forest = RootedForest(parent=tuple(entries[v] for v in range(n)))
    forest.root_of()
    return forest


def partition_to_text(partition: Partition) -> str:
    """One line per vertex: "v block_id"."""
    return "".join(f"{v} {b}\n" for v, b in enumerate(partition.block_id))
