"""Robust token grammar for molecular graphs.

A fixed 12-token alphabet with valence-constrained derivation: every token
sequence decodes to some valid graph, so a network can emit arbitrary rows
of one-hot logits and still describe a molecule. The encoder walks a DFS
spanning tree and is the exact inverse up to graph isomorphism.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import TooLong, Unencodable, UnknownToken
from .graph import MAX_VALENCE, MolecularGraph, _spanning_tree

ALPHABET = (
    "[PAD]",
    "[C]", "[=C]", "[#C]",
    "[N]", "[=N]", "[#N]",
    "[O]", "[=O]", "[F]",
    "[Branch1]",
    "[Ring1]",
)
ALPHABET_SIZE = len(ALPHABET)
ALPHABET_INDEX = {tok: i for i, tok in enumerate(ALPHABET)}

DEFAULT_L_MAX = 20

_BOND_PREFIX = {1: "", 2: "=", 3: "#"}
# token -> (element, intrinsic bond order), for atom tokens only
_ATOM_TOKENS = {
    f"[{prefix}{el}]": (el, order)
    for el in ("C", "N", "O")
    for order, prefix in _BOND_PREFIX.items()
}
_ATOM_TOKENS["[F]"] = ("F", 1)


def _index_of(token: str) -> int:
    try:
        return ALPHABET_INDEX[token]
    except KeyError:
        raise UnknownToken(f"token {token!r} is not in the alphabet") from None


class _Derivation:
    """Mutable graph state shared across branch recursion levels."""

    def __init__(self):
        self.atoms: list[str] = []
        self.bonds: list[tuple[int, int, int]] = []
        self.pairs: set[tuple[int, int]] = set()
        self.remaining: list[int] = []

    def add_atom(self, element: str) -> int:
        self.atoms.append(element)
        self.remaining.append(MAX_VALENCE[element])
        return len(self.atoms) - 1

    def add_bond(self, a: int, b: int, order: int) -> None:
        pair = (min(a, b), max(a, b))
        self.bonds.append((*pair, order))
        self.pairs.add(pair)
        self.remaining[a] -= order
        self.remaining[b] -= order


def _derive(tokens: list[str], root: int | None, state: _Derivation) -> None:
    """Consume one derivation level; ``root`` anchors the first bond."""
    current = root
    i = 0
    while i < len(tokens):
        token = tokens[i]
        i += 1
        if token == "[PAD]":
            return
        if token in _ATOM_TOKENS:
            element, order = _ATOM_TOKENS[token]
            if current is None:
                current = state.add_atom(element)
                continue
            if state.remaining[current] == 0:
                return
            effective = min(order, state.remaining[current], MAX_VALENCE[element])
            new = state.add_atom(element)
            state.add_bond(current, new, effective)
            current = new
        elif token == "[Branch1]":
            if i >= len(tokens):
                return
            length = _index_of(tokens[i]) + 1
            i += 1
            body = tokens[i : i + length]
            i += len(body)
            if current is not None and state.remaining[current] >= 2:
                _derive(body, current, state)
        elif token == "[Ring1]":
            if i >= len(tokens):
                return
            target = None if current is None else current - (_index_of(tokens[i]) + 1)
            i += 1
            if (
                target is not None
                and target >= 0
                and (target, current) not in state.pairs
                and state.remaining[target] >= 1
                and state.remaining[current] >= 1
            ):
                state.add_bond(target, current, 1)
        else:
            _index_of(token)  # raises UnknownToken


def decode(tokens) -> MolecularGraph:
    """Derive a valid graph from any token sequence; total by construction."""
    state = _Derivation()
    _derive(list(tokens), None, state)
    return MolecularGraph(tuple(state.atoms), tuple(sorted(state.bonds)))


def encode(g: MolecularGraph, l_max: int | None = DEFAULT_L_MAX) -> list[str]:
    """Emit tokens whose decode is isomorphic to ``g``.

    Pass ``l_max=None`` to lift the length limit.
    """
    if not g.atoms:
        return []
    children, ring_close, _ = _spanning_tree(g)
    position: dict[int, int] = {}

    def emit(u: int, order_in: int) -> list[str]:
        position[u] = len(position)
        out = [f"[{_BOND_PREFIX[order_in]}{g.atoms[u]}]"]
        for v, order in sorted(ring_close[u]):
            if order != 1:
                raise Unencodable("ring-closing bond with order above 1")
            span_index = position[u] - position[v] - 1
            if span_index >= ALPHABET_SIZE:
                raise Unencodable("ring spans more atoms than an index token can say")
            out.append("[Ring1]")
            out.append(ALPHABET[span_index])
        kids = children[u]
        for pos, (v, order) in enumerate(kids):
            sub = emit(v, order)
            if pos < len(kids) - 1:
                if len(sub) - 1 >= ALPHABET_SIZE:
                    raise Unencodable("branch longer than an index token can say")
                out.append("[Branch1]")
                out.append(ALPHABET[len(sub) - 1])
            out.extend(sub)
        return out

    tokens = emit(0, 1)
    if l_max is not None and len(tokens) > l_max:
        raise TooLong(f"{len(tokens)} tokens exceed the limit of {l_max}")
    return tokens


def to_onehot(tokens, l_max: int) -> np.ndarray:
    """One-hot matrix of shape (l_max, alphabet size); short input pads."""
    tokens = list(tokens)
    if len(tokens) > l_max:
        raise TooLong(f"{len(tokens)} tokens exceed the limit of {l_max}")
    m = np.zeros((l_max, ALPHABET_SIZE), dtype=np.float64)
    for row, token in enumerate(tokens):
        m[row, _index_of(token)] = 1.0
    m[len(tokens):, 0] = 1.0
    return m


def from_onehot_argmax(m) -> list[str]:
    """Row-wise argmax back to tokens; ties go to the lowest index.

    Trailing pad rows are trimmed so exact one-hot matrices invert.
    """
    m = np.asarray(m)
    tokens = [ALPHABET[j] for j in m.argmax(axis=1)]
    while tokens and tokens[-1] == "[PAD]":
        tokens.pop()
    return tokens


def tokens_to_text(tokens) -> str:
    tokens = list(tokens)
    for token in tokens:
        _index_of(token)
    return "".join(tokens)


def tokens_from_text(text: str) -> list[str]:
    """Split concatenated bracketed tokens, e.g. ``[C][=O]``."""
    tokens = []
    rest = text
    while rest:
        if not rest.startswith("["):
            raise UnknownToken(f"expected '[' at {rest[:10]!r}")
        end = rest.find("]")
        if end < 0:
            raise UnknownToken(f"unterminated token at {rest[:10]!r}")
        token = rest[: end + 1]
        _index_of(token)
        tokens.append(token)
        rest = rest[end + 1 :]
    return tokens


class SelfiesVectorizer(TransformerMixin, BaseEstimator):
    """Flatten graphs to fixed-width one-hot rows for an estimator.

    transform maps each graph to a row of length ``l_max * 12``;
    inverse_transform maps rows back to graphs via row-wise argmax.
    """

    def __init__(self, l_max: int = DEFAULT_L_MAX):
        self.l_max = l_max

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        rows = [to_onehot(encode(g, self.l_max), self.l_max).ravel() for g in X]
        return np.vstack(rows) if rows else np.empty((0, self.l_max * ALPHABET_SIZE))

    def inverse_transform(self, X) -> list[MolecularGraph]:
        X = np.asarray(X)
        mats = X.reshape(len(X), self.l_max, ALPHABET_SIZE)
        return [decode(from_onehot_argmax(m)) for m in mats]
