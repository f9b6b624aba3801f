"""Information loss metrics and count-query estimation.

All metrics are sums of per-block terms, which keeps incremental cost
maintenance during search trivial: replacing one block by its children
changes the total by the difference of their terms.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .dataset import ConfigError


class Metric:
    """Base: cost(blocks) = sum of block_cost. `floor_cost` is the
    per-cell term used when bounding from below on finest cells."""

    name = "?"

    def block_cost(self, block):
        raise NotImplementedError

    def cost(self, blocks) -> float:
        return sum(self.block_cost(b) for b in blocks)

    def floor_cost(self, count, volume, labels):
        raise NotImplementedError


@dataclass(frozen=True)
class Discernibility(Metric):
    """Sum of squared block sizes. `k` is the smallest admissible block
    size; cells below it are charged k per tuple in lower bounds."""

    k: int = 1
    name = "dm"

    def block_cost(self, block):
        n = block.count
        return n * n

    def floor_cost(self, count, volume, labels):
        return count * count if count >= self.k else self.k * count


class ClassificationError(Metric):
    """Per block: tuples not in the block's majority class."""

    name = "cm"

    def __init__(self, labels):
        self.labels = list(labels)

    def block_cost(self, block):
        if not block.rows:
            return 0
        counts = Counter(self.labels[r] for r in block.rows)
        return block.count - max(counts.values())

    def floor_cost(self, count, volume, labels):
        if not labels:
            return 0
        return count - max(Counter(labels).values())


class VolumeMetric(Metric):
    """Each tuple pays its block's normalized volume in units of
    `unit_volume`. The default unit is the volume of the smallest cell
    the split set can produce, which makes N a universal lower bound."""

    name = "vm"

    def __init__(self, space, unit_volume=None):
        self.space = space
        self._lengths = []
        for attr in space.qi_schema:
            if attr.is_numeric:
                lo, hi = attr.domain
                self._lengths.append(hi - lo)
            else:
                self._lengths.append(float(attr.taxonomy.n_leaves))
        if unit_volume is None:
            unit_volume = self._min_cell_volume()
        if unit_volume <= 0:
            raise ConfigError("unit volume must be positive")
        self.unit_volume = unit_volume

    def _min_cell_volume(self):
        unit = 1.0
        for qi_pos, attr_idx in enumerate(self.space.qi):
            attr = self.space.dataset.schema[attr_idx]
            lo, hi = self.space.root_block.extent[qi_pos]
            planes = sorted(s.plane for s in
                            self.space.splits.by_attr.get(attr_idx, ()))
            edges = [lo] + planes + [hi]
            gaps = [b - a for a, b in zip(edges, edges[1:])]
            unit *= min(gaps) / self._lengths[qi_pos]
        return unit

    def volume(self, extent) -> float:
        v = 1.0
        for (lo, hi), ln in zip(extent, self._lengths):
            v *= (hi - lo) / ln
        return v

    def block_cost(self, block):
        return block.count * self.volume(block.extent) / self.unit_volume

    def floor_cost(self, count, volume, labels):
        return count * volume / self.unit_volume


def make_metric(name, space, k=1, class_attr=None, unit_volume=None) -> Metric:
    if name == "dm":
        return Discernibility(k=k)
    if name == "cm":
        if class_attr is None:
            for a in space.dataset.schema:
                if a.role == "sensitive":
                    class_attr = a.name
                    break
        if class_attr is None:
            raise ConfigError("cm needs a class attribute "
                              "(a sensitive attribute or class_attr=)")
        return ClassificationError(space.dataset.column(class_attr))
    if name == "vm":
        return VolumeMetric(space, unit_volume)
    raise ConfigError(f"unknown metric {name!r}")


def theoretical_bound(metric: Metric, space) -> float:
    """Instance-wide lower bound on the metric over all partitions."""
    n = len(space.dataset)
    if metric.name == "dm":
        return metric.k * n
    if metric.name == "cm":
        return 0
    if metric.name == "vm":
        return float(n)
    raise ConfigError(f"unknown metric {metric.name!r}")


# ---- count queries ----

def parse_query(space, spec: dict) -> dict:
    """Resolve a {attr: range-or-label} mapping to per-position ranges.

    Numeric attributes take [lo, hi] pairs; categorical attributes take a
    taxonomy label (any node: its whole leaf range is queried).
    """
    out = {}
    by_name = {space.dataset.schema[i].name: (qi_pos, i)
               for qi_pos, i in enumerate(space.qi)}
    for name, rng in spec.items():
        if name not in by_name:
            raise ConfigError(f"query on non-QI attribute {name!r}")
        qi_pos, attr_idx = by_name[name]
        attr = space.dataset.schema[attr_idx]
        if attr.is_numeric:
            if not (isinstance(rng, (list, tuple)) and len(rng) == 2):
                raise ConfigError(f"query range for {name!r} must be [lo, hi]")
            a, b = float(rng[0]), float(rng[1])
            if a > b:
                raise ConfigError(f"query range for {name!r} is empty")
            out[qi_pos] = (a, b)
        else:
            node = attr.taxonomy.node(str(rng))
            out[qi_pos] = node.leaf_range
    return out


@dataclass(frozen=True)
class CountedBlock:
    """Extent plus count, enough for estimation; lets reports run on
    partitions reloaded from disk without the raw rows."""
    extent: tuple
    count: int


def count_estimate(space, blocks, query: dict) -> float:
    """Estimated number of tuples matching the query, assuming tuples are
    uniform inside each block. Blocks fully inside contribute exactly."""
    total = 0.0
    for b in blocks:
        if b.count == 0:
            continue
        frac = 1.0
        for qi_pos, (qa, qb) in query.items():
            lo, hi = b.extent[qi_pos]
            inter = min(hi, qb) - max(lo, qa)
            if inter <= 0:
                frac = 0.0
                break
            frac *= min(1.0, inter / (hi - lo))
        total += b.count * frac
    return total


def true_count(space, query: dict) -> int:
    """Exact matches in the data. Numeric ranges are left-open except at
    the domain minimum, mirroring how splits assign boundary values."""
    n = 0
    qi_attrs = space.qi
    for row_idx in range(len(space.dataset)):
        ok = True
        for qi_pos, (qa, qb) in query.items():
            v = space.columns[qi_attrs[qi_pos]][row_idx]
            attr = space.dataset.schema[qi_attrs[qi_pos]]
            if attr.is_numeric:
                dom_lo = attr.domain[0]
                lo_ok = v >= qa if qa <= dom_lo else v > qa
                if not (lo_ok and v <= qb):
                    ok = False
                    break
            else:
                if not qa <= v < qb:
                    ok = False
                    break
        if ok:
            n += 1
    return n


def query_error_report(space, blocks, queries) -> dict:
    """Per-query estimates vs. exact counts.

    Relative error uses max(true, 1) in the denominator so empty answers
    stay finite.
    """
    rows = []
    for i, spec in enumerate(queries):
        q = parse_query(space, spec)
        est = count_estimate(space, blocks, q)
        true = true_count(space, q)
        rel = abs(est - true) / max(true, 1)
        rows.append({"query": i, "estimate": est, "true": true,
                     "abs_error": abs(est - true), "rel_error": rel})
    rels = [r["rel_error"] for r in rows]
    summary = {
        "queries": len(rows),
        "mean_rel_error": sum(rels) / len(rels) if rels else 0.0,
        "max_rel_error": max(rels) if rels else 0.0,
    }
    return {"rows": rows, "summary": summary}
