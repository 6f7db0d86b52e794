"""Root-aligned rendering of route trees.

Given a root atom for the target, every step's product is written rooted at
the atom its parent step chose for it, and precursors are ordered by where
their mapped atoms land in the product text. Precursor roots propagate the
same way, so the whole linearized route reads from a single viewpoint.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from .errors import MissingRootError
from .routes import RouteNode, RouteTree
from .smiles import canonical_ranks, corresponding_atom, write_rooted


@dataclass(frozen=True)
class AlignedStep:
    """One rendered reaction. Parallel tuples are in emission order:
    anchor_positions[i] is the first product-text position taken by a mapped
    atom of precursor i (inf when nothing maps), inherited_roots[i] the atom
    index the precursor was rooted at."""

    product_text: str
    precursor_texts: tuple[str, ...]
    anchor_positions: tuple[float, ...]
    inherited_roots: tuple[int, ...]


@dataclass(frozen=True)
class AlignedSequence:
    steps: tuple[AlignedStep, ...]
    target_root: int
    root_map: dict[int, int]


def default_root(molecule) -> int:
    """Fallback root for molecules with no mapped atoms: the canonical
    rank-0 atom, the same one canonical keys start from."""
    return canonical_ranks(molecule).index(0)


def align_route(tree: RouteTree, target_root: int) -> AlignedSequence:
    """Render every reaction of the tree from the viewpoint fixed by rooting
    the target at atom index `target_root`."""
    root_map: dict[int, int] = {tree.root.node_id: target_root}
    steps_by_node: dict[int, AlignedStep] = {}
    aligned_children: dict[int, tuple[RouteNode, ...]] = {}

    def visit(node: RouteNode) -> None:
        if node.is_leaf:
            return
        if node.node_id not in root_map:
            raise MissingRootError(f"no root assigned to tree node {node.node_id}")
        reaction = node.reaction
        product = reaction.product
        product_root = root_map[node.node_id]
        if node.molecule is not product:
            product_root = corresponding_atom(node.molecule, product_root, product)
        product_text, atom_order = write_rooted(product, product_root)
        position_of = {atom: pos for pos, atom in enumerate(atom_order)}

        entries: list[tuple[float, int, str, int, RouteNode]] = []
        for i, child in enumerate(node.children):
            precursor = reaction.precursors[i]
            mapping = reaction.map_for_precursor(i)
            if mapping:
                anchor = float("inf")
                child_root = -1
                for atom_index in sorted(mapping):
                    pos = position_of[mapping[atom_index]]
                    if pos < anchor:
                        anchor = float(pos)
                        child_root = atom_index
            else:
                anchor = float("inf")
                child_root = default_root(precursor)
            root_map[child.node_id] = child_root
            text, _ = write_rooted(precursor, child_root)
            entries.append((anchor, i, text, child_root, child))

        entries.sort(key=lambda e: (e[0], e[1]))
        steps_by_node[node.node_id] = AlignedStep(
            product_text=product_text,
            precursor_texts=tuple(e[2] for e in entries),
            anchor_positions=tuple(e[0] for e in entries),
            inherited_roots=tuple(e[3] for e in entries),
        )
        aligned_children[node.node_id] = tuple(e[4] for e in entries)
        for child in node.children:
            visit(child)

    visit(tree.root)

    # Emit main-chain-first over the aligned child order.
    steps: list[AlignedStep] = []
    if not tree.root.is_leaf:
        queue: deque[RouteNode] = deque([tree.root])
        while queue:
            node = queue.popleft()
            while node is not None and not node.is_leaf:
                steps.append(steps_by_node[node.node_id])
                non_leaf = [c for c in aligned_children[node.node_id] if not c.is_leaf]
                queue.extend(non_leaf[1:])
                node = non_leaf[0] if non_leaf else None
    return AlignedSequence(tuple(steps), target_root, root_map)


def augment_roots(tree: RouteTree, n: int, seed: int) -> list[AlignedSequence]:
    """Render the route from n distinct random heavy-atom roots of the target
    (fewer when the target is smaller). n=1 gives a single seeded choice."""
    if n < 1:
        raise ValueError("n must be at least 1")
    heavy = tree.root.molecule.heavy_atom_indices()
    rng = random.Random(seed)
    roots = rng.sample(heavy, min(n, len(heavy)))
    return [align_route(tree, root) for root in roots]


def render_sequence(sequence: AlignedSequence) -> str:
    """One reaction per line: product, '>>', '.'-joined precursors."""
    return "\n".join(
        f"{step.product_text}>>{'.'.join(step.precursor_texts)}"
        for step in sequence.steps
    )


def parse_sequence(text: str) -> list[tuple[str, list[str]]]:
    """Inverse of render_sequence at the text level: (product, precursors)
    per non-empty line. Raises ValueError on lines without '>>' or with
    empty components."""
    out: list[tuple[str, list[str]]] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if ">>" not in line:
            raise ValueError(f"line {line_number}: missing '>>'")
        product, _, rhs = line.partition(">>")
        parts = rhs.split(".")
        if not product or not rhs or any(not part for part in parts):
            raise ValueError(f"line {line_number}: empty component")
        out.append((product, parts))
    return out
