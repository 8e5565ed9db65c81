"""Ground-truth labels: an additive per-atom property surrogate.

The shipped coefficients are configuration, not measured data. They are
chosen so carbon raises the value and the heteroatoms lower it, which keeps
qualitative structure-property probes (nitrogen lowers the label) true by
construction.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, EmptyInput, FileUnreadable, MissingLabel
from .graph import MolecularGraph, canonical_key, implicit_hydrogens, parse_smiles
from .kvfile import parse_float, read_kv

ELEMENTS = ("C", "N", "O", "F")


@dataclass(frozen=True)
class PropertyTable:
    """Per-element, per-hydrogen, and per-multiple-bond contributions."""

    elements: dict[str, float]
    hydrogen: float
    bond2: float
    bond3: float

    def __post_init__(self):
        for el in ELEMENTS:
            if el not in self.elements:
                raise ConfigError(f"table is missing element {el!r}")
        extra = set(self.elements) - set(ELEMENTS)
        if extra:
            raise ConfigError(f"table has unknown elements {sorted(extra)}")
        values = [*self.elements.values(), self.hydrogen, self.bond2, self.bond3]
        if not all(math.isfinite(v) for v in values):
            raise ConfigError("table contributions must be finite")

    @classmethod
    def from_file(cls, path) -> "PropertyTable":
        pairs = read_kv(path)
        known = set(ELEMENTS) | {"H", "bond2", "bond3"}
        unknown = set(pairs) - known
        if unknown:
            raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
        missing = known - set(pairs)
        if missing:
            raise ConfigError(f"{path}: missing keys {sorted(missing)}")
        values = {k: parse_float(k, v) for k, v in pairs.items()}
        return cls(
            elements={el: values[el] for el in ELEMENTS},
            hydrogen=values["H"],
            bond2=values["bond2"],
            bond3=values["bond3"],
        )


DEFAULT_TABLE = PropertyTable(
    elements={"C": 0.20, "N": -0.70, "O": -0.40, "F": -0.20},
    hydrogen=0.10,
    bond2=-0.05,
    bond3=-0.10,
)


def surrogate_logp(g: MolecularGraph, table: PropertyTable = DEFAULT_TABLE) -> float:
    total = sum(table.elements[el] for el in g.atoms)
    total += implicit_hydrogens(g) * table.hydrogen
    for _, _, order in g.bonds:
        if order == 2:
            total += table.bond2
        elif order == 3:
            total += table.bond3
    return total


@dataclass(frozen=True)
class Stats:
    mean: float
    std: float
    min: float
    max: float
    count: int


def dataset_stats(values) -> Stats:
    values = [float(v) for v in values]
    if not values:
        raise EmptyInput("no values to summarize")
    return Stats(
        mean=statistics.fmean(values),
        std=statistics.pstdev(values),
        min=min(values),
        max=max(values),
        count=len(values),
    )


class TableOracle:
    """Labels molecules with the additive surrogate."""

    def __init__(self, table: PropertyTable = DEFAULT_TABLE):
        self.table = table

    def label(self, g: MolecularGraph) -> float:
        return surrogate_logp(g, self.table)

    def labels(self, graphs) -> list[float]:
        return [self.label(g) for g in graphs]


class ExternalLabelOracle:
    """Labels molecules from a file of known values, keyed by identity.

    Lookups go through the canonical key, so any spelling of a listed
    molecule resolves. Unknown molecules raise MissingLabel.
    """

    def __init__(self, by_key: dict[str, float]):
        self.by_key = dict(by_key)

    @classmethod
    def from_file(cls, path) -> "ExternalLabelOracle":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise FileUnreadable(f"cannot read {path}: {exc}") from exc
        by_key: dict[str, float] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ConfigError(f"{path}:{lineno}: expected SMILES<TAB>value")
            smiles, _, value = line.partition("\t")
            key = canonical_key(parse_smiles(smiles.strip())).text
            if key in by_key:
                raise ConfigError(f"{path}:{lineno}: duplicate label for {smiles!r}")
            by_key[key] = parse_float(smiles, value.strip())
        return cls(by_key)

    def label(self, g: MolecularGraph) -> float:
        key = canonical_key(g).text
        try:
            return self.by_key[key]
        except KeyError:
            raise MissingLabel(f"no label for molecule {key!r}") from None

    def labels(self, graphs) -> list[float]:
        return [self.label(g) for g in graphs]
