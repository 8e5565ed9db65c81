"""Heavy-atom molecular graphs and a restricted SMILES codec.

The graph model is deliberately small: atoms are C, N, O or F, bonds carry
integer orders 1-3, hydrogens are implicit (each atom's leftover valence).
The SMILES subset covers what is needed to read small organic datasets and
to print results: bare uppercase atoms, ``-``/``=``/``#`` bonds,
parenthesized branches and single-digit ring closures. Aromatic notation,
charges, isotopes and multi-fragment input are rejected with typed errors
so ingestion can skip them.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import (
    InvalidGraph,
    RingLabelsExhausted,
    SmilesSyntaxError,
    UnclosedRing,
    UnsupportedFeature,
    ValenceExceeded,
)

MAX_VALENCE = {"C": 4, "N": 3, "O": 2, "F": 1}

BOND_SYMBOL = {1: "", 2: "=", 3: "#"}
_SYMBOL_ORDER = {"-": 1, "=": 2, "#": 3}

# Characters that are meaningful in full SMILES but outside our subset:
# aromatic / two-letter elements (any lowercase), other elements (other
# uppercase), brackets, charges, fragments, stereo marks, % ring labels.
_KNOWN_UNSUPPORTED = (
    set("abcdefghijklmnopqrstuvwxyz")
    | (set("ABCDEFGHIJKLMNOPQRSTUVWXYZ") - set(MAX_VALENCE))
    | set("[]+%.\\/@:*$~")
)


@dataclass(frozen=True)
class MolecularGraph:
    """Connected heavy-atom graph with element labels and bond orders.

    ``bonds`` holds ``(a, b, order)`` triples with ``a < b``. Validity
    (element set, valence limits, connectedness, no duplicate pairs) is
    enforced at construction, so every instance in circulation is a real
    molecule.
    """

    atoms: tuple[str, ...] = ()
    bonds: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        n = len(self.atoms)
        for el in self.atoms:
            if el not in MAX_VALENCE:
                raise InvalidGraph(f"unknown element {el!r}")
        seen = set()
        load = [0] * n
        for a, b, order in self.bonds:
            if not (0 <= a < n and 0 <= b < n):
                raise InvalidGraph(f"bond ({a},{b}) references missing atom")
            if a == b:
                raise InvalidGraph(f"self-bond at atom {a}")
            if a > b:
                raise InvalidGraph(f"bond pair ({a},{b}) not ordered")
            if (a, b) in seen:
                raise InvalidGraph(f"duplicate bond ({a},{b})")
            if order not in (1, 2, 3):
                raise InvalidGraph(f"bond order {order} out of range")
            seen.add((a, b))
            load[a] += order
            load[b] += order
        for i, el in enumerate(self.atoms):
            if load[i] > MAX_VALENCE[el]:
                raise InvalidGraph(
                    f"atom {i} ({el}) carries bond order {load[i]} > {MAX_VALENCE[el]}"
                )
        if n > 1 and not self._connected():
            raise InvalidGraph("graph is not connected")

    def _connected(self):
        adj = self.adjacency()
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v, _ in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == len(self.atoms)

    def adjacency(self):
        """Neighbor lists ``[(neighbor, order), ...]`` sorted by index."""
        adj = [[] for _ in self.atoms]
        for a, b, order in self.bonds:
            adj[a].append((b, order))
            adj[b].append((a, order))
        for lst in adj:
            lst.sort()
        return adj

    def bonded_order_sum(self, i):
        return sum(order for a, b, order in self.bonds if i in (a, b))


@dataclass(frozen=True)
class CanonicalKey:
    """Isomorphism-invariant identity string for a molecular graph."""

    text: str


def parse_smiles(text: str) -> MolecularGraph:
    """Parse a SMILES string from the supported subset.

    Raises a typed :class:`~moldream.errors.MoleculeError` subclass on any
    malformed or unsupported input; never crashes on arbitrary strings.
    """
    atoms: list[str] = []
    remaining: list[int] = []
    bonds: list[tuple[int, int, int]] = []
    bond_pairs: set[tuple[int, int]] = set()

    anchor = None  # atom awaiting the next chain bond
    pending = None  # explicit bond order for the next atom or ring digit
    branch_stack: list[int] = []
    open_rings: dict[str, tuple[int, int | None]] = {}

    def add_bond(a, b, order):
        if a == b:
            raise SmilesSyntaxError("ring bond from an atom to itself")
        pair = (min(a, b), max(a, b))
        if pair in bond_pairs:
            raise SmilesSyntaxError(f"duplicate bond between atoms {pair}")
        if remaining[a] < order or remaining[b] < order:
            raise ValenceExceeded(
                f"bond of order {order} between atoms {pair} exceeds valence"
            )
        bond_pairs.add(pair)
        bonds.append((pair[0], pair[1], order))
        remaining[a] -= order
        remaining[b] -= order

    for ch in text:
        if ch in MAX_VALENCE:
            idx = len(atoms)
            atoms.append(ch)
            remaining.append(MAX_VALENCE[ch])
            if anchor is not None:
                add_bond(anchor, idx, pending if pending is not None else 1)
            elif pending is not None:
                raise SmilesSyntaxError("bond symbol before the first atom")
            pending = None
            anchor = idx
        elif ch in _SYMBOL_ORDER:
            if pending is not None:
                raise SmilesSyntaxError("two bond symbols in a row")
            if anchor is None:
                raise SmilesSyntaxError("bond symbol before the first atom")
            pending = _SYMBOL_ORDER[ch]
        elif ch == "(":
            if anchor is None:
                raise SmilesSyntaxError("branch opened before any atom")
            if pending is not None:
                raise SmilesSyntaxError("bond symbol before '('")
            branch_stack.append(anchor)
        elif ch == ")":
            if not branch_stack:
                raise SmilesSyntaxError("unbalanced ')'")
            if pending is not None:
                raise SmilesSyntaxError("dangling bond symbol before ')'")
            anchor = branch_stack.pop()
        elif ch in "123456789":
            if anchor is None:
                raise SmilesSyntaxError("ring digit before any atom")
            if ch in open_rings:
                other, opened_order = open_rings.pop(ch)
                if opened_order is not None and pending is not None and opened_order != pending:
                    raise SmilesSyntaxError(
                        f"conflicting bond orders on ring closure {ch}"
                    )
                order = pending if pending is not None else opened_order
                add_bond(other, anchor, order if order is not None else 1)
            else:
                open_rings[ch] = (anchor, pending)
            pending = None
        elif ch in _KNOWN_UNSUPPORTED:
            raise UnsupportedFeature(f"unsupported SMILES feature {ch!r}")
        else:
            raise SmilesSyntaxError(f"unrecognized character {ch!r}")

    if pending is not None:
        raise SmilesSyntaxError("dangling bond symbol at end of input")
    if branch_stack:
        raise SmilesSyntaxError("unbalanced '('")
    if open_rings:
        labels = ",".join(sorted(open_rings))
        raise UnclosedRing(f"ring label(s) {labels} never closed")
    return MolecularGraph(tuple(atoms), tuple(bonds))


def _spanning_tree(g: MolecularGraph):
    """Depth-first tree from atom 0, neighbors in ascending index order.

    Returns per-atom tree children ``(child, order)`` and the non-tree
    (ring) edges, each recorded once at its deeper endpoint.
    """
    adj = g.adjacency()
    parent = {0: None}
    children = [[] for _ in g.atoms]
    ring_close = [[] for _ in g.atoms]  # at deeper endpoint: (ancestor, order)
    ring_open = [[] for _ in g.atoms]  # at shallow endpoint: (descendant, order)
    seen_ring = set()
    visited = {0}
    stack = [(0, iter(adj[0]))]
    while stack:
        u, it = stack[-1]
        for v, order in it:
            if v not in visited:
                visited.add(v)
                parent[v] = u
                children[u].append((v, order))
                stack.append((v, iter(adj[v])))
                break
            if v != parent[u]:
                pair = (min(u, v), max(u, v))
                if pair not in seen_ring:
                    seen_ring.add(pair)
                    ring_close[u].append((v, order))
                    ring_open[v].append((u, order))
        else:
            stack.pop()
    return children, ring_close, ring_open


def write_smiles(g: MolecularGraph) -> str:
    """Render a graph to SMILES; the output re-parses to an isomorphic graph."""
    if not g.atoms:
        return ""
    children, ring_close, ring_open = _spanning_tree(g)

    free_digits = list(range(9, 0, -1))  # pop() yields 1 first
    digit_of: dict[tuple[int, int], int] = {}
    out: list[str] = []
    # Work items: ("atom", idx, incoming bond order) and literal text.
    work: list[tuple] = [("atom", 0, 1)]
    while work:
        item = work.pop()
        if item[0] == "text":
            out.append(item[1])
            continue
        _, u, order_in = item
        out.append(BOND_SYMBOL[order_in])
        out.append(g.atoms[u])
        # Close rings opened at an ancestor, then open new ones.
        for v, order in sorted(ring_close[u]):
            pair = (min(u, v), max(u, v))
            digit = digit_of.pop(pair)
            free_digits.append(digit)
            out.append(BOND_SYMBOL[order] + str(digit))
        for v, order in sorted(ring_open[u]):
            pair = (min(u, v), max(u, v))
            if not free_digits:
                raise RingLabelsExhausted("more than nine concurrently open rings")
            digit = free_digits.pop()
            digit_of[pair] = digit
            out.append(BOND_SYMBOL[order] + str(digit))
        kids = children[u]
        # Push in reverse so the first child is emitted first; every child
        # except the last is wrapped in parentheses.
        for pos in range(len(kids) - 1, -1, -1):
            v, order = kids[pos]
            last = pos == len(kids) - 1
            if not last:
                work.append(("text", ")"))
            work.append(("atom", v, order))
            if not last:
                work.append(("text", "("))
    return "".join(out)


def _refine(colors, adj):
    """Iterative neighborhood refinement to a stable partition."""
    n = len(colors)
    while True:
        signatures = [
            (colors[i], tuple(sorted((order, colors[j]) for j, order in adj[i])))
            for i in range(n)
        ]
        ranked = {sig: rank for rank, sig in enumerate(sorted(set(signatures)))}
        new_colors = [ranked[signatures[i]] for i in range(n)]
        if new_colors == colors:
            return colors
        colors = new_colors


def _discrete_orders(colors, adj):
    """Yield atom orderings from individualization-refinement search."""
    colors = _refine(colors, adj)
    n = len(colors)
    by_color: dict[int, list[int]] = {}
    for i, c in enumerate(colors):
        by_color.setdefault(c, []).append(i)
    tied = [c for c, members in sorted(by_color.items()) if len(members) > 1]
    if not tied:
        order = sorted(range(n), key=lambda i: colors[i])
        yield order
        return
    target = by_color[tied[0]]
    for atom in target:
        branched = list(colors)
        branched[atom] = n  # fresh color, distinct from all rank values
        yield from _discrete_orders(branched, adj)


def canonical_form(g: MolecularGraph) -> MolecularGraph:
    """Canonically relabeled copy of ``g`` (identical for isomorphic graphs)."""
    n = len(g.atoms)
    if n == 0:
        return g
    adj = g.adjacency()
    element_rank = {el: r for r, el in enumerate(sorted(set(g.atoms)))}
    colors = [element_rank[el] for el in g.atoms]
    best = None
    for order in _discrete_orders(colors, adj):
        position = [0] * n
        for pos, atom in enumerate(order):
            position[atom] = pos
        atoms = tuple(g.atoms[atom] for atom in order)
        bonds = tuple(
            sorted(
                (min(position[a], position[b]), max(position[a], position[b]), o)
                for a, b, o in g.bonds
            )
        )
        cert = (atoms, bonds)
        if best is None or cert < best:
            best = cert
    return MolecularGraph(best[0], best[1])


def canonical_key(g: MolecularGraph) -> CanonicalKey:
    """Identity key: equal for two graphs iff they are isomorphic."""
    return CanonicalKey(write_smiles(canonical_form(g)))


def implicit_hydrogens(g: MolecularGraph) -> int:
    """Total hydrogen count needed to fill every atom's leftover valence."""
    bonded = [0] * len(g.atoms)
    for a, b, order in g.bonds:
        bonded[a] += order
        bonded[b] += order
    return sum(MAX_VALENCE[el] - bonded[i] for i, el in enumerate(g.atoms))


def composition(g: MolecularGraph) -> dict[str, int]:
    """Element counts including implicit hydrogens; zero counts omitted."""
    counts: dict[str, int] = {}
    for el in g.atoms:
        counts[el] = counts.get(el, 0) + 1
    h = implicit_hydrogens(g)
    if h:
        counts["H"] = h
    return counts
