import math
import random

import pytest

from anonsearch.dataset import Dataset, load_config
from anonsearch.enumeration import enumerate_trees
from anonsearch.partition import Block, Internal, Leaf, Space
from anonsearch.splits import generate_splits


def build_space(cfg, rows) -> Space:
    schema = load_config(cfg)
    ds = Dataset(schema, rows)
    return Space(ds, generate_splits(schema, ds.rows))


@pytest.fixture
def grid_space():
    """Two numeric attributes, 3 + 2 cuts, a handful of points."""
    cfg = {"attributes": [
        {"name": "x", "kind": "numeric", "role": "qi", "domain": [0, 4],
         "splits": {"type": "explicit", "values": [1, 2, 3]}},
        {"name": "y", "kind": "numeric", "role": "qi", "domain": [0, 3],
         "splits": {"type": "explicit", "values": [1, 2]}},
    ]}
    rows = [(0.5, 0.5), (1.5, 1.5), (2.5, 0.5), (3.5, 2.5), (2.5, 2.5),
            (0.5, 2.5)]
    return build_space(cfg, rows)


@pytest.fixture
def tax_space():
    """Two-level taxonomy plus one numeric attribute and a sensitive one."""
    cfg = {"attributes": [
        {"name": "w", "kind": "categorical", "role": "qi", "taxonomy": "w",
         "splits": {"type": "taxonomy"}},
        {"name": "x", "kind": "numeric", "role": "qi", "domain": [0, 2],
         "splits": {"type": "explicit", "values": [0.7, 1.4]}},
        {"name": "s", "kind": "categorical", "role": "sensitive",
         "values": ["a", "b", "c"]},
    ], "taxonomies": {"w": {"label": "any", "children": [
        {"label": "pub", "children": [{"label": "fed"}, {"label": "sta"}]},
        {"label": "priv", "children": [{"label": "inc"}, {"label": "self"}]},
    ]}}}
    rows = [("fed", 0.5, "a"), ("inc", 1.5, "b"), ("sta", 1.2, "c"),
            ("self", 0.1, "a"), ("fed", 1.9, "b")]
    return build_space(cfg, rows)


# ---- random instances ----

def random_instance(rng: random.Random, total_splits=None, rows_range=(4, 12),
                    cat=True) -> Space:
    total = total_splits if total_splits is not None else rng.randint(2, 5)
    n_attrs = rng.randint(2, 3)
    attrs = []
    taxos = {}
    remaining = total
    for i in range(n_attrs):
        last = i == n_attrs - 1
        take = remaining if last else rng.randint(0, remaining)
        remaining -= take
        name = f"a{i}"
        if cat and take in (2, 3) and rng.random() < 0.4:
            if take == 3 and rng.random() < 0.5:
                tax = {"label": f"{name}:any", "children": [
                    {"label": f"{name}:g0", "children": [
                        {"label": f"{name}:v0"}, {"label": f"{name}:v1"}]},
                    {"label": f"{name}:g1", "children": [
                        {"label": f"{name}:v2"}, {"label": f"{name}:v3"}]},
                ]}
                leaves = [f"{name}:v{j}" for j in range(4)]
            else:
                leaves = [f"{name}:v{j}" for j in range(take + 1)]
                tax = {"label": f"{name}:any",
                       "children": [{"label": v} for v in leaves]}
            taxos[name] = tax
            attrs.append({"name": name, "kind": "categorical", "role": "qi",
                          "taxonomy": name, "splits": {"type": "taxonomy"},
                          "_leaves": leaves})
        else:
            cuts = sorted(rng.sample(range(1, 10), take))
            attrs.append({"name": name, "kind": "numeric", "role": "qi",
                          "domain": [0, 10],
                          "splits": {"type": "explicit", "values": cuts}})
    attrs.append({"name": "s", "kind": "categorical", "role": "sensitive",
                  "values": ["u", "v", "w"]})
    leaves_of = {a["name"]: a.pop("_leaves", None) for a in attrs}
    cfg = {"attributes": attrs, "taxonomies": taxos}
    n = rng.randint(*rows_range)
    rows = []
    for _ in range(n):
        row = []
        for a in attrs:
            if a["role"] == "sensitive":
                row.append(rng.choice("uvw"))
            elif a["kind"] == "numeric":
                row.append(rng.uniform(*a["domain"]))
            else:
                row.append(rng.choice(leaves_of[a["name"]]))
        rows.append(tuple(row))
    return build_space(cfg, rows)


def random_tree(space: Space, rng: random.Random, max_moves=None):
    """A random tree reached by legal moves (hence canonical)."""
    from anonsearch.partition import legal_moves
    tree = space.root_tree()
    steps = rng.randint(0, max_moves if max_moves is not None else 6)
    for _ in range(steps):
        moves = legal_moves(tree)
        if not moves:
            break
        path, move = rng.choice(moves)
        tree = tree.apply_move(path, move)
    return tree


def random_loose_tree(space: Space, rng: random.Random, max_moves=6):
    """A random tree grown without the ancestor-id rule; may be
    non-canonical."""
    tree = space.root_tree()
    for _ in range(rng.randint(0, max_moves)):
        options = []
        for path, leaf in tree.splittable_leaves():
            for move in space.available_moves(leaf.block):
                options.append((path, move))
        if not options:
            break
        path, move = rng.choice(options)
        tree = tree.apply_move(path, move)
    return tree


# ---- independent oracles ----

def geometric_is_cut(node, s, pending=None) -> bool:
    """Plane-geometry definition of a full cut: the plane passes strictly
    through the node's extent but through no settled leaf's extent."""
    lo, hi = node.block.extent[s.qi_pos]
    if not lo < s.plane < hi:
        return False
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Leaf):
            if n is pending:
                continue
            a, b = n.block.extent[s.qi_pos]
            if a < s.plane < b:
                return False
        else:
            stack.append(n.left)
            stack.append(n.right)
    return True


def rebuild_canonical(space: Space, blocks):
    """Reconstruct the canonical tree of a partition from its blocks by
    always cutting with the smallest-id applicable move that every block
    respects. A numeric plane is a move by itself; the sibling boundaries
    of one taxonomy node form a single move laid out in id order. Written
    independently of the library's normalization."""

    def union(bs):
        ext = tuple((min(b.extent[q][0] for b in bs),
                     max(b.extent[q][1] for b in bs))
                    for q in range(len(bs[0].extent)))
        rows = tuple(sorted(r for b in bs for r in b.rows))
        return Block(ext, rows)

    def respected(bs, qi_pos, plane):
        return all(not (b.extent[qi_pos][0] < plane < b.extent[qi_pos][1])
                   for b in bs)

    def tax_boundaries(attr, lo, hi):
        stack = [attr.taxonomy.root]
        while stack:
            n = stack.pop()
            if n.leaf_range == (lo, hi) and n.children:
                return [c.leaf_range[0] for c in n.children[1:]]
            stack.extend(n.children)
        return None

    def applicable_moves(ub, bs):
        out = []
        for qi_pos, attr_idx in enumerate(space.qi):
            attr = space.dataset.schema[attr_idx]
            lo, hi = ub.extent[qi_pos]
            here = space.splits.by_attr.get(attr_idx, ())
            if attr.is_numeric:
                for s in here:
                    if lo < s.plane < hi and respected(bs, qi_pos, s.plane):
                        out.append([s])
                continue
            planes = tax_boundaries(attr, lo, hi)
            if not planes:
                continue
            matched = [s for s in here if s.plane in planes]
            if len(matched) != len(planes):
                continue
            if all(respected(bs, qi_pos, p) for p in planes):
                out.append(sorted(matched, key=lambda s: s.id))
        return out

    def rec(bs):
        if len(bs) == 1:
            return Leaf(bs[0])
        ub = union(bs)
        moves = applicable_moves(ub, bs)
        assert moves, "partition admits no applicable move"
        unit = min(moves, key=lambda u: u[0].id)

        def chain(b, i, group):
            if i == len(unit):
                return rec(group)
            s = unit[i]
            if s.numeric:
                left = [x for x in group if x.extent[s.qi_pos][1] <= s.plane]
                rest = [x for x in group if x.extent[s.qi_pos][0] >= s.plane]
            else:
                left = [x for x in group if x.extent[s.qi_pos][0] >= s.plane]
                rest = [x for x in group if x.extent[s.qi_pos][1] <= s.plane]
            assert len(left) + len(rest) == len(group)
            return Internal(s, b, rec(left), chain(union(rest), i + 1, rest))

        return chain(ub, 0, bs)

    return rec(list(blocks))


def brute_best(space: Space, metric, cons) -> float:
    """Exhaustive minimum over all reachable feasible partitions."""
    best = math.inf
    for t in enumerate_trees(space):
        blocks = t.leaf_blocks()
        if cons.feasible(blocks):
            best = min(best, metric.cost(blocks))
    return best


def finest_cells(space: Space, block) -> list:
    """Cells left when no move applies anywhere, computed by repeatedly
    applying the first available move. Order-independent result."""
    out = []
    stack = [block]
    while stack:
        b = stack.pop()
        moves = space.available_moves(b)
        if not moves:
            out.append(b)
        else:
            stack.extend(space.move_blocks(b, moves[0]))
    return out


def oracle_min_cost(space: Space, block, metric, k=1) -> float:
    """Finest-cell bound computed on the recursive decomposition."""
    total = 0.0
    for cell in finest_cells(space, block):
        m = cell.count
        if m == 0:
            continue
        if metric.name == "dm":
            total += m * m if m >= k else k * m
        elif metric.name == "cm":
            from collections import Counter
            counts = Counter(metric.labels[r] for r in cell.rows)
            total += m - max(counts.values())
        else:
            total += m * metric.volume(cell.extent) / metric.unit_volume
    return total
