"""Dataset loading, attribute schemas and taxonomy trees."""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional


class ConfigError(ValueError):
    """Malformed schema, taxonomy or constraint configuration."""


class DataError(ValueError):
    """Malformed data file. Messages carry file/row/column positions."""


NUMERIC = "numeric"
CATEGORICAL = "categorical"
ROLES = ("qi", "sensitive", "ignore")


class TaxonomyNode:
    __slots__ = ("label", "children", "parent", "leaf_range")

    def __init__(self, label: str, children=()):
        self.label = label
        self.children = list(children)
        self.parent = None
        self.leaf_range = (0, 0)  # half open leaf positions, set by TaxonomyTree

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def __repr__(self):
        return f"TaxonomyNode({self.label!r})"


class TaxonomyTree:
    """Generalization hierarchy over categorical values.

    Leaf positions are assigned left to right, so every subtree covers a
    contiguous half open range of positions. Internal nodes with a single
    child are rejected: they would make subtree ranges ambiguous.
    """

    def __init__(self, root: TaxonomyNode):
        self.root = root
        self.by_label: dict[str, TaxonomyNode] = {}
        self.leaves: list[TaxonomyNode] = []
        self._index(root)
        if not self.leaves:
            raise ConfigError("taxonomy has no leaves")

    def _index(self, node: TaxonomyNode):
        if node.label in self.by_label:
            raise ConfigError(f"duplicate taxonomy label {node.label!r}")
        self.by_label[node.label] = node
        if node.is_leaf:
            pos = len(self.leaves)
            node.leaf_range = (pos, pos + 1)
            self.leaves.append(node)
        else:
            if len(node.children) < 2:
                raise ConfigError(
                    f"taxonomy node {node.label!r} has a single child")
            for child in node.children:
                child.parent = node
                self._index(child)
            node.leaf_range = (node.children[0].leaf_range[0],
                               node.children[-1].leaf_range[1])

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    def node(self, label: str) -> TaxonomyNode:
        try:
            return self.by_label[label]
        except KeyError:
            raise ConfigError(f"unknown taxonomy label {label!r}") from None

    def leaf_position(self, label: str) -> int:
        node = self.node(label)
        if not node.is_leaf:
            raise ConfigError(f"{label!r} is not a leaf value")
        return node.leaf_range[0]

    def internal_nodes_bfs(self) -> list[TaxonomyNode]:
        """Internal nodes level by level, left to right within a level."""
        out, queue = [], [self.root]
        while queue:
            node = queue.pop(0)
            if not node.is_leaf:
                out.append(node)
                queue.extend(node.children)
        return out

    def range_node(self, rng) -> Optional[TaxonomyNode]:
        # unique because single-child nodes are rejected
        return self._range_index().get(tuple(rng))

    def _range_index(self):
        idx = getattr(self, "_ranges", None)
        if idx is None:
            idx = {n.leaf_range: n for n in self.by_label.values()}
            self._ranges = idx
        return idx


def taxonomy_from_dict(spec) -> TaxonomyTree:
    def build(d):
        if not isinstance(d, dict) or "label" not in d:
            raise ConfigError("taxonomy nodes need a 'label' key")
        children = [build(c) for c in d.get("children", [])]
        return TaxonomyNode(str(d["label"]), children)

    return TaxonomyTree(build(spec))


def flat_taxonomy(name: str, values) -> TaxonomyTree:
    """One-level hierarchy: a root covering the given values."""
    if len(values) != len(set(values)):
        raise ConfigError(f"attribute {name}: duplicate values")
    return taxonomy_from_dict(
        {"label": f"<{name}>", "children": [{"label": str(v)} for v in values]})


@dataclass(frozen=True, eq=False)
class AttributeSchema:
    name: str
    kind: str
    role: str
    domain: Optional[tuple] = None            # numeric: (lo, hi)
    taxonomy: Optional[TaxonomyTree] = None   # categorical
    split_spec: Optional[dict] = None

    @property
    def is_numeric(self) -> bool:
        return self.kind == NUMERIC


def load_config(source) -> tuple:
    """Parse a config document into a tuple of AttributeSchema.

    `source` may be a path, an open file or an already parsed dict. The
    document holds an `attributes` list plus optional shared `taxonomies`;
    a categorical attribute may instead inline its values via `values`.
    """
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            doc = json.load(fh)
    elif isinstance(source, dict):
        doc = source
    else:
        doc = json.load(source)

    attrs_spec = doc.get("attributes")
    if not isinstance(attrs_spec, list) or not attrs_spec:
        raise ConfigError("config needs a nonempty 'attributes' list")

    taxonomies = {name: taxonomy_from_dict(spec)
                  for name, spec in (doc.get("taxonomies") or {}).items()}

    schema = []
    seen = set()
    for a in attrs_spec:
        if not isinstance(a, dict):
            raise ConfigError("attribute entries must be objects")
        name = a.get("name")
        if not name:
            raise ConfigError("attribute without a name")
        if name in seen:
            raise ConfigError(f"duplicate attribute {name!r}")
        seen.add(name)
        kind = a.get("kind")
        if kind not in (NUMERIC, CATEGORICAL):
            raise ConfigError(f"attribute {name!r}: kind must be "
                              f"'numeric' or 'categorical', got {kind!r}")
        role = a.get("role", "qi")
        if role not in ROLES:
            raise ConfigError(f"attribute {name!r}: unknown role {role!r}")

        if kind == NUMERIC:
            dom = a.get("domain")
            if (not isinstance(dom, (list, tuple)) or len(dom) != 2):
                raise ConfigError(
                    f"attribute {name!r}: numeric domain must be [lo, hi]")
            lo, hi = float(dom[0]), float(dom[1])
            if not lo < hi:
                raise ConfigError(f"attribute {name!r}: empty domain")
            schema.append(AttributeSchema(name, kind, role, domain=(lo, hi),
                                          split_spec=a.get("splits")))
        else:
            if "values" in a:
                tax = flat_taxonomy(name, a["values"])
            elif "taxonomy" in a:
                try:
                    tax = taxonomies[a["taxonomy"]]
                except KeyError:
                    raise ConfigError(f"attribute {name!r}: taxonomy "
                                      f"{a['taxonomy']!r} not defined") from None
            else:
                raise ConfigError(f"attribute {name!r}: categorical attributes "
                                  "need 'taxonomy' or 'values'")
            schema.append(AttributeSchema(name, kind, role, taxonomy=tax,
                                          split_spec=a.get("splits")))
    return tuple(schema)


class Dataset:
    """A table of rows aligned with an attribute schema."""

    def __init__(self, schema, rows):
        self.schema = tuple(schema)
        self.rows = list(rows)
        self._col_index = {a.name: i for i, a in enumerate(self.schema)}

    def __len__(self):
        return len(self.rows)

    def attr_index(self, name: str) -> int:
        try:
            return self._col_index[name]
        except KeyError:
            raise ConfigError(f"unknown attribute {name!r}") from None

    def column(self, name: str) -> list:
        i = self.attr_index(name)
        return [r[i] for r in self.rows]


def load_dataset(path, schema) -> Dataset:
    """Read a CSV whose header matches the schema names exactly."""
    names = [a.name for a in schema]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [h.strip() for h in header] != names:
            raise DataError(f"{path}: header {header!r} does not match "
                            f"schema attributes {names!r}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != len(schema):
                raise DataError(f"{path}:{lineno}: expected {len(schema)} "
                                f"fields, got {len(raw)}")
            row = []
            for col, (attr, text) in enumerate(zip(schema, raw), start=1):
                text = text.strip()
                if text == "":
                    raise DataError(f"{path}:{lineno}: column {col} "
                                    f"({attr.name}): missing value")
                if attr.is_numeric:
                    try:
                        v = float(text)
                    except ValueError:
                        raise DataError(
                            f"{path}:{lineno}: column {col} ({attr.name}): "
                            f"not a number: {text!r}") from None
                    lo, hi = attr.domain
                    if not lo <= v <= hi:
                        raise DataError(
                            f"{path}:{lineno}: column {col} ({attr.name}): "
                            f"{v} outside domain [{lo}, {hi}]")
                else:
                    node = attr.taxonomy.by_label.get(text)
                    if node is None or not node.is_leaf:
                        raise DataError(
                            f"{path}:{lineno}: column {col} ({attr.name}): "
                            f"unknown value {text!r}")
                    v = text
                row.append(v)
            rows.append(tuple(row))
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(schema, rows)


def sample_dataset(dataset: Dataset, n: int, seed: int = 0) -> Dataset:
    """Seeded uniform subsample without replacement."""
    if n >= len(dataset.rows):
        return dataset
    rng = random.Random(seed)
    rows = list(dataset.rows)
    rng.shuffle(rows)
    return Dataset(dataset.schema, rows[:n])
