"""Lower bounds on the cost of all partitions reachable from a tree.

Only leaves that are still splittable (those after the most recent move
head in pre-order) can be refined; every other leaf pays its exact cost. A
refinable leaf is charged the cost of cutting it into the finest cells
the split set allows, with the per-cell floor supplied by the metric.
For the squared-size metric a cell below the minimum admissible size k
is charged k per tuple, since any feasible solution must merge it into a
block of at least k tuples.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right

from .partition import Leaf


class BoundContext:
    """Memoizes finest-refinement costs per block extent."""

    def __init__(self, space, metric):
        self.space = space
        self.metric = metric
        self._memo: dict = {}
        self._planes = {}
        for attr_idx in space.qi:
            self._planes[attr_idx] = sorted(
                s.plane for s in space.splits.by_attr.get(attr_idx, ()))
        self._needs_labels = hasattr(metric, "labels")
        self._needs_volume = metric.name == "vm"

    def min_cost(self, block) -> float:
        hit = self._memo.get(block.extent)
        if hit is not None:
            return hit
        value = self._compute(block)
        self._memo[block.extent] = value
        return value

    def _compute(self, block) -> float:
        space = self.space
        attrs = []
        for qi_pos, attr_idx in enumerate(space.qi):
            lo, hi = block.extent[qi_pos]
            planes = [p for p in self._planes[attr_idx] if lo < p < hi]
            numeric = space.dataset.schema[attr_idx].is_numeric
            attrs.append((qi_pos, attr_idx, planes, numeric, lo, hi))

        cells: dict = {}
        for r in block.rows:
            key = []
            for qi_pos, attr_idx, planes, numeric, _, _ in attrs:
                v = space.columns[attr_idx][r]
                # boundary values go tree-left for numeric cuts and to the
                # upper range for categorical ones
                if numeric:
                    key.append(bisect_left(planes, v))
                else:
                    key.append(bisect_right(planes, v))
            cells.setdefault(tuple(key), []).append(r)

        metric = self.metric
        total = 0.0
        for key, rows in cells.items():
            volume = 0.0
            if self._needs_volume:
                extent = []
                for (qi_pos, _, planes, _, lo, hi), idx in zip(attrs, key):
                    a = planes[idx - 1] if idx > 0 else lo
                    b = planes[idx] if idx < len(planes) else hi
                    extent.append((a, b))
                volume = metric.volume(tuple(extent))
            labels = None
            if self._needs_labels:
                labels = [metric.labels[r] for r in rows]
            total += metric.floor_cost(len(rows), volume, labels)
        return total


def lower_bound(tree, ctx: BoundContext, cost_of=None) -> float:
    """Lower bound over the partitions reachable from `tree`.

    `cost_of` maps a block to its exact metric cost; defaults to the
    context's metric.
    """
    if cost_of is None:
        cost_of = ctx.metric.block_cost
    refinable = {path for path, _ in tree.splittable_leaves()}
    total = 0.0
    for path, node in tree.pre_order():
        if not isinstance(node, Leaf):
            continue
        if path in refinable:
            total += ctx.min_cost(node.block)
        else:
            total += cost_of(node.block)
    return total
