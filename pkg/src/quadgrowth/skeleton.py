"""Sampling and assembly of hulls via the layer/block/skeleton decomposition.

A skeleton is a reversed forest with levels 0..R+1: level R+1 holds the
boundary cycle's edges (one vertex per edge, cyclic order), level 0 the
single root-extension vertex, and a vertex of outdegree l carries a block,
i.e. a quadrangulation with simple boundary of length 2(l+1) whose l+1
degree-two boundary corners are its interfaces: the root corner faces the
parent, the others face the children in planar order.

Assembly reverses the decomposition with three dart surgeries:
  * interface glue: cut the two half-square wedges (parent bottom corner and
    child root corner) and splice the exposed triangles into one full square;
  * ring sew: consecutive blocks of one level share a side edge, realized by
    deleting one block's "opposite edge" (the edge opposite the root in its
    root square) and re-pairing it with the neighbour's;
  * root fold: the level-0 extension vertex folds its parent's wedge into a
    square with two corners identified, creating the length-one root cycle
    and the root edge.

Interior realization is catalog-limited: block interiors beyond the oracle's
enumerable range stay size-only and are listed in the truncation report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import chain, genfun, oracle
from .maps import MapError, RotationMap

Q = Fraction

DEFAULT_N_TABLE = 40
DEFAULT_N_CAP = 4
DEFAULT_OUTDEG_CAP = 3


# ---------------------------------------------------------------------------
# skeleton forest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SkeletonForest:
    """Levels 0..R+1 of vertex ids; level 0 is the extension vertex."""

    R: int
    levels: tuple[tuple[int, ...], ...]
    outdeg: tuple[int, ...]
    parent: tuple[int, ...]  # -1 for top-level vertices
    children: tuple[tuple[int, ...], ...]
    rotation: int  # uniform rotation applied to the top level

    @property
    def level_sizes(self) -> tuple[int, ...]:
        return tuple(len(lv) for lv in self.levels)

    def validate(self) -> None:
        if len(self.levels) != self.R + 2:
            raise ValueError("a radius-R skeleton has levels 0..R+1")
        if len(self.levels[0]) != 1:
            raise ValueError("level 0 must hold exactly the extension vertex")
        for r in range(self.R + 1):
            if len(self.levels[r]) != sum(self.outdeg[v] for v in self.levels[r + 1]):
                raise ValueError(f"level {r} size != sum of outdegrees above")


def _h_kernel(k: int, steps_left: int, l_max: int):
    """Unnormalized h-transform weights [t^l] phi^k * [t] phi_{steps_left-1}^l
    for l = 0..l_max; the normalizer is [t] phi_{steps_left}^k."""
    pows = chain._phi_powers(l_max, k)
    total = Q(0)
    weights = []
    for l in range(l_max + 1):
        w = pows[k][l] * genfun.coeff_t_phi_pow(Q(steps_left - 1), l)
        weights.append(w)
        total += w
    return weights, total


def _sample_h_step(k: int, steps_left: int, rng: np.random.Generator) -> int:
    """One inward step of the size chain, conditioned to hit 1 at the end."""
    norm = chain.xi_transition(k, 1, steps_left)
    if norm == 0:
        raise RuntimeError(f"state {k} cannot reach 1 in {steps_left} steps")
    u = rng.random()
    acc = 0.0
    l_max = 8
    while True:
        weights, total = _h_kernel(k, steps_left, l_max)
        acc = 0.0
        for l, w in enumerate(weights):
            acc += float(w / norm)
            if u < acc:
                return l
        if float(total / norm) > 1 - 1e-12 and l_max > 4 * k + 64:
            # numerically exhausted; take the largest tabulated state
            return l_max
        l_max *= 2


def sample_skeleton(
    R: int,
    rng: np.random.Generator,
    outdeg_cap: int | None = None,
    m_tail: Fraction = chain.TAIL_DEFAULT,
) -> SkeletonForest:
    """Sample a radius-R skeleton.

    The boundary size m comes from the extended-root law; inner level sizes
    follow the h-transform of the branching step (conditioned to reach state
    1 at level 0), and each level's total splits into per-vertex outdegrees
    by sequential conditioning.  ``outdeg_cap`` switches on the
    catalog-limited mode: the same chain conditioned on every outdegree
    staying within the cap.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    m = chain.gamma_dist_auto(R, m_tail).sample(rng)
    sizes = [m]
    for step in range(1, R + 2):
        steps_left = R + 2 - step
        k = sizes[-1]
        if steps_left == 1:
            sizes.append(1)
        else:
            sizes.append(_sample_h_step(k, steps_left, rng))
    sizes = sizes[::-1]  # sizes[r] = |level r|, r = 0..R+1
    if sizes[0] != 1:
        raise AssertionError("conditioned chain failed to end at 1")

    # allocate vertex ids level by level, bottom up
    levels = []
    vid = 0
    for r in range(R + 2):
        levels.append(tuple(range(vid, vid + sizes[r])))
        vid += sizes[r]
    n = vid
    outdeg = [0] * n
    parent = [-1] * n
    children: list[tuple[int, ...]] = [()] * n
    for r in range(R + 1, 0, -1):
        k = sizes[r]
        l_total = sizes[r - 1]
        split = chain.conditional_split(k, l_total, rng, outdeg_cap=outdeg_cap)
        pos = 0
        for v, deg in zip(levels[r], split):
            outdeg[v] = deg
            kids = levels[r - 1][pos : pos + deg]
            children[v] = tuple(kids)
            for c in kids:
                parent[c] = v
            pos += deg
    rotation = int(rng.integers(m))
    forest = SkeletonForest(
        R=R,
        levels=tuple(levels),
        outdeg=tuple(outdeg),
        parent=tuple(parent),
        children=tuple(children),
        rotation=rotation,
    )
    forest.validate()
    return forest


# ---------------------------------------------------------------------------
# blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    """One block: lower-edge count l, interior face count n of the associated
    boundary quadrangulation (None if only the size class is known), and the
    optional realization."""

    l: int
    n: int | None
    interior: RotationMap | None = None


@lru_cache(maxsize=None)
def block_size_table(l: int, n_table: int = DEFAULT_N_TABLE) -> tuple[tuple[Fraction, ...], Fraction]:
    """Boltzmann masses P{n} = C(n, l+1) x0^n / [y^{l+1}]A(y) for n <= n_table,
    plus the exact truncated tail (the normalization is exact, so the tail is
    one minus an exact partial sum)."""
    m = l + 1
    norm = genfun.expansion_coeffs(m).A[m]
    U = genfun.U_series(n_table, m)
    masses = []
    partial = Q(0)
    for n in range(n_table + 1):
        p = U.coeff(n, m) * genfun.X0**n / norm
        masses.append(p)
        partial += p
    return tuple(masses), 1 - partial


def sample_block_size(
    l: int,
    rng: np.random.Generator,
    n_table: int = DEFAULT_N_TABLE,
    n_cap: int | None = None,
) -> int | None:
    """Draw the interior size of a block with l lower edges.

    Returns None when the draw lands in the truncated tail (n > n_table);
    the caller records it as size-only.  With ``n_cap`` the law is
    conditioned on n <= n_cap (catalog-limited mode)."""
    masses, tail = block_size_table(l, n_table)
    if n_cap is not None:
        sub = masses[: n_cap + 1]
        total = sum(sub)
        if total == 0:
            raise ValueError(f"no block with l={l} fits under n_cap={n_cap}")
        u = rng.random() * float(total)
        acc = 0.0
        for n, p in enumerate(sub):
            acc += float(p)
            if u < acc:
                return n
        return n_cap
    u = rng.random()
    acc = 0.0
    for n, p in enumerate(masses):
        acc += float(p)
        if u < acc:
            return n
    return None


def realize_block(l: int, n: int | None, n_cap: int = DEFAULT_N_CAP,
                  rng: np.random.Generator | None = None) -> Block:
    """Attach a uniformly random interior from the oracle catalog when the
    size fits; otherwise a size-only block."""
    if n is None or n > n_cap:
        return Block(l=l, n=n, interior=None)
    cat = oracle.enumerate_boundary_quadrangulations(n, l + 1)
    if cat.count == 0:
        raise ValueError(f"no boundary quadrangulation with n={n}, m={l + 1}")
    idx = 0 if rng is None or cat.count == 1 else int(rng.integers(cat.count))
    return Block(l=l, n=n, interior=cat.entries[idx])


def block_to_quadrangulation(b: Block) -> RotationMap:
    """The boundary quadrangulation associated to a realized block."""
    if b.interior is None:
        raise ValueError("size-only block has no realization")
    return b.interior


def quadrangulation_to_block(q: RotationMap) -> Block:
    """Inverse of block_to_quadrangulation: read l and n off the map."""
    boundary = _boundary_walk_static(q)
    n = len(q.faces()) - 1
    return Block(l=len(boundary) // 2 - 1, n=n, interior=q)


def _boundary_walk_static(q: RotationMap) -> list[int]:
    phi = lambda d: q.sigma[q.alpha[d]]
    walk = [q.root]
    d = phi(q.root)
    while d != q.root:
        walk.append(d)
        d = phi(d)
    return walk


# ---------------------------------------------------------------------------
# hull assembly
# ---------------------------------------------------------------------------


class AssemblyError(RuntimeError):
    pass


class _Surgeon:
    """Mutable rotation system with the three gluing surgeries."""

    def __init__(self):
        self.sigma: dict[int, int] = {}
        self.spred: dict[int, int] = {}
        self.alpha: dict[int, int] = {}

    def add_map(self, m: RotationMap, offset: int) -> None:
        for d in range(m.n_darts):
            self.sigma[offset + d] = offset + m.sigma[d]
            self.spred[offset + m.sigma[d]] = offset + d
            self.alpha[offset + d] = offset + m.alpha[d]

    def succ(self, d: int) -> int:
        return self.sigma[d]

    def pred(self, d: int) -> int:
        return self.spred[d]

    def _set(self, a: int, b: int) -> None:
        self.sigma[a] = b
        self.spred[b] = a

    def delete_cycle(self, d: int) -> None:
        cyc = [d]
        x = self.sigma[d]
        while x != d:
            cyc.append(x)
            x = self.sigma[x]
        for x in cyc:
            del self.sigma[x]
            del self.spred[x]
            self.alpha.pop(x, None)

    def remove_dart(self, d: int) -> None:
        """Delete one dart, closing its rotation gap."""
        p, n = self.spred[d], self.sigma[d]
        if p != d:
            self._set(p, n)
        del self.sigma[d]
        self.spred.pop(d, None)
        self.alpha.pop(d, None)

    def cut_wedge(self, walk_prev: int, wedge_dart: int) -> tuple[int, int]:
        """Remove a degree-two boundary corner and its two edges.

        ``wedge_dart`` is the boundary dart whose tail is the corner and
        ``walk_prev`` the boundary dart entering it.  Returns the corner's
        q-dart (the opposite corner of the corner's square, pointing into it)
        computed before any deletion."""
        rm_into = self.alpha[wedge_dart]      # at the far boundary vertex
        q_dart = self.alpha[self.spred[rm_into]]
        self.delete_cycle(wedge_dart)         # the corner's two darts
        self.remove_dart(walk_prev)
        self.remove_dart(rm_into)
        return q_dart

    def insert_after(self, x: int, d: int) -> None:
        self._set(d, self.sigma[x])
        self._set(x, d)

    def merge_vertices(self, x: int, y: int) -> bool:
        """Merge the vertices of darts x and y by swapping their successors;
        no-op (False) when they already share a vertex."""
        if x == y:
            return False
        d = self.sigma[x]
        while d != x:
            if d == y:
                return False
            d = self.sigma[d]
        sx, sy = self.sigma[x], self.sigma[y]
        self._set(x, sy)
        self._set(y, sx)
        return True

    def to_map(self, root: int) -> tuple[RotationMap, dict[int, int]]:
        darts = sorted(self.sigma)
        index = {d: i for i, d in enumerate(darts)}
        sigma = tuple(index[self.sigma[d]] for d in darts)
        alpha = tuple(index[self.alpha[d]] for d in darts)
        return RotationMap(sigma, alpha, index[root]), index


def _boundary_data(m: RotationMap, offset: int, surgeon: _Surgeon) -> dict:
    """Boundary walk and anchor darts of one block's map, in global ids."""
    walk = [offset + d for d in _boundary_walk_static(m)]
    return {"walk": walk, "l": len(walk) // 2 - 1, "u1_dart": surgeon.alpha[walk[0]]}


# seam conventions, pinned by the assembly invariant tests: each vertex merge
# may splice at the anchor dart or at its rotation predecessor
CHILD_ORDER_REVERSED = False
IFACE_SHIFT = (1, 1)   # (parent q-dart shift, child q-dart shift)
RING_SHIFT = (0, 1)    # (u1-side shift, far-side shift)
FOLD_ANCHOR_RIGHT = False
FOLD_SHIFT = 0


def assemble_hull(forest: SkeletonForest, blocks: dict[int, Block]):
    """Glue realized blocks along the skeleton.

    Surgery per parent-child interface: cut the parent's bottom corner wedge
    and the child's root wedge, then identify the two squares' interior
    corners (the triangles left by the cuts join into one quadrilateral).
    The extension child folds its parent's wedge into the root square
    instead.  Finally each level's blocks close into a ring by identifying
    consecutive side corners; the top ring forms the hull boundary.

    Returns (map, level_groups, boundary_dart): level_groups[r] lists the
    vertex indices of the level-r cycle of the extended hull (merged
    interface corners for 1 <= r <= R, the root for r = 0, the boundary
    corners between consecutive top blocks for r = R + 1).
    """
    surgeon = _Surgeon()
    bdata: dict[int, dict] = {}
    orig_sigma: dict[int, int] = {}
    offset = 0
    for r in range(1, forest.R + 2):
        for v in forest.levels[r]:
            b = blocks.get(v)
            if b is None or b.interior is None:
                raise AssemblyError(f"vertex {v} has no realized block")
            surgeon.add_map(b.interior, offset)
            for d in range(b.interior.n_darts):
                orig_sigma[offset + d] = offset + b.interior.sigma[d]
            bdata[v] = _boundary_data(b.interior, offset, surgeon)
            if bdata[v]["l"] != forest.outdeg[v]:
                raise AssemblyError(
                    f"vertex {v}: block boundary {2 * (bdata[v]['l'] + 1)} "
                    f"does not match outdegree {forest.outdeg[v]}"
                )
            offset += b.interior.n_darts

    def chase(d: int) -> int:
        # first surviving dart at or after d in its block's original rotation
        start = d
        while d not in surgeon.sigma:
            d = orig_sigma[d]
            if d == start:
                raise AssemblyError("vertex vanished entirely")
        return d

    level_rep_darts: dict[int, list[int]] = {r: [] for r in range(forest.R + 2)}
    root_dart = None
    z_darts = None
    # interface glues and the root fold, top level downward
    for r in range(forest.R + 1, 0, -1):
        for v in forest.levels[r]:
            walk = bdata[v]["walk"]
            kids = forest.children[v]
            if CHILD_ORDER_REVERSED:
                kids = tuple(reversed(kids))
            for j, c in enumerate(kids, start=1):
                q_parent = surgeon.cut_wedge(walk[2 * j - 1], walk[2 * j])
                if c == forest.levels[0][0]:
                    z0, z1 = offset, offset + 1
                    offset += 2
                    # anchor in the cut sector: the survivor after the removed
                    # left boundary dart (or before the right one)
                    src_dart = walk[2 * j] if FOLD_ANCHOR_RIGHT else walk[2 * j - 1]
                    anchor = chase(src_dart)
                    if FOLD_SHIFT:
                        anchor = surgeon.spred[anchor]
                    surgeon.insert_after(anchor, z0)
                    surgeon.sigma[z1] = z1
                    surgeon.spred[z1] = z1
                    surgeon.alpha[z0] = z1
                    surgeon.alpha[z1] = z0
                    root_dart = z0
                    z_darts = (z0, z1)
                    level_rep_darts[0].append(z0)
                    continue
                cwalk = bdata[c]["walk"]
                q_child = surgeon.cut_wedge(cwalk[-1], cwalk[0])
                x = surgeon.spred[q_parent] if IFACE_SHIFT[0] else q_parent
                y = surgeon.spred[q_child] if IFACE_SHIFT[1] else q_child
                if not surgeon.merge_vertices(x, y):
                    raise AssemblyError("interface corners already identified")
                level_rep_darts[r - 1].append(q_parent)
    if root_dart is None:
        raise AssemblyError("no extension vertex found at level 0")
    # ring closures, every level; the top ring forms the hull boundary
    for r in range(1, forest.R + 2):
        ring = list(forest.levels[r])
        if r == forest.R + 1 and forest.rotation:
            rot = forest.rotation % len(ring)
            ring = ring[rot:] + ring[:rot]
        k = len(ring)
        for i in range(k):
            a, b = ring[i], ring[(i + 1) % k]
            if k == 1 and forest.outdeg[a] == 0:
                raise AssemblyError("singleton ring with no wedge to self-close")
            x = chase(bdata[a]["u1_dart"])
            y = chase(bdata[b]["walk"][-1])
            if RING_SHIFT[0]:
                x = surgeon.spred[x]
            if RING_SHIFT[1]:
                y = surgeon.spred[y]
            surgeon.merge_vertices(x, y)
            if r == forest.R + 1:
                level_rep_darts[forest.R + 1].append(chase(x))
    top0 = forest.levels[forest.R + 1][0]
    boundary_dart = bdata[top0]["walk"][0]
    hull_map, index = surgeon.to_map(root_dart)
    vof = hull_map.vertex_of()
    level_groups = {
        r: sorted({vof[index[chase(d)]] for d in reps})
        for r, reps in level_rep_darts.items()
    }
    return hull_map, level_groups, index[boundary_dart]


# ---------------------------------------------------------------------------
# hull sampling
# ---------------------------------------------------------------------------


@dataclass
class HullSample:
    R: int
    seed: int
    gamma_sizes: tuple[int, ...]  # |level r| for r = 0..R+1
    forest: SkeletonForest
    blocks: dict[int, Block]
    map: RotationMap | None
    level_groups: dict[int, list[int]] | None
    boundary_dart: int | None
    truncated: tuple[int, ...]  # vertex ids whose interiors are size-only

    def to_json(self) -> str:
        obj = {
            "R": self.R,
            "seed": self.seed,
            "gamma_sizes": list(self.gamma_sizes),
            "outdeg": list(self.forest.outdeg),
            "levels": [list(lv) for lv in self.forest.levels],
            "rotation": self.forest.rotation,
            "blocks": {
                str(v): {"l": b.l, "n": b.n, "realized": b.interior is not None}
                for v, b in self.blocks.items()
            },
            "truncated": list(self.truncated),
            "map": json.loads(self.map.to_json()) if self.map is not None else None,
        }
        return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def sample_hull(
    R: int,
    seed: int,
    realize_interiors: bool = False,
    n_table: int = DEFAULT_N_TABLE,
    n_cap: int = DEFAULT_N_CAP,
    outdeg_cap: int = DEFAULT_OUTDEG_CAP,
) -> HullSample:
    """Sample a radius-R hull.

    Without realization the skeleton and block sizes follow the exact laws
    (oversized interiors are recorded size-only).  With realization the whole
    sample is conditioned on the catalog-limited event (outdegrees and block
    sizes within the enumerable range) and every interior is attached, so the
    assembled map exists."""
    rng = np.random.default_rng(seed)
    forest = sample_skeleton(R, rng, outdeg_cap=outdeg_cap if realize_interiors else None)
    blocks: dict[int, Block] = {}
    truncated = []
    for r in range(1, forest.R + 2):
        for v in forest.levels[r]:
            l = forest.outdeg[v]
            n = sample_block_size(l, rng, n_table, n_cap=n_cap if realize_interiors else None)
            if realize_interiors:
                blocks[v] = realize_block(l, n, n_cap=n_cap, rng=rng)
            else:
                blocks[v] = Block(l=l, n=n, interior=None)
            if blocks[v].n is None or (realize_interiors and blocks[v].interior is None):
                truncated.append(v)
    hull_map = level_groups = boundary_dart = None
    if realize_interiors:
        hull_map, level_groups, boundary_dart = assemble_hull(forest, blocks)
    return HullSample(
        R=R,
        seed=seed,
        gamma_sizes=forest.level_sizes,
        forest=forest,
        blocks=blocks,
        map=hull_map,
        level_groups=level_groups,
        boundary_dart=boundary_dart,
        truncated=tuple(truncated),
    )


# ---------------------------------------------------------------------------
# serialization (maps)
# ---------------------------------------------------------------------------


def serialize(m: RotationMap) -> str:
    return m.to_json()


def deserialize(text: str) -> RotationMap:
    return RotationMap.from_json(text)


def check_hull_invariants(hull: HullSample) -> list[str]:
    """Structural checks on an assembled hull; returns failure descriptions."""
    fails = []
    m = hull.map
    if m is None:
        return ["hull has no assembled map"]
    if m.genus() != 0:
        fails.append(f"genus {m.genus()} != 0")
    if not m.is_bipartite():
        fails.append("not bipartite")
    phi_faces = m.faces()
    vof = m.vertex_of()
    bdart = hull.boundary_dart
    bface = next(f for f in phi_faces if bdart in f)
    m_top = len(hull.forest.levels[hull.R + 1])
    if len(bface) != 2 * m_top:
        fails.append(f"boundary face length {len(bface)} != {2 * m_top}")
    for f in phi_faces:
        if f is not bface and len(f) != 4:
            fails.append(f"face of degree {len(f)}")
            break
    # boundary simple + alternating degree two
    bverts = [vof[d] for d in bface]
    if len(set(bverts)) != len(bverts):
        fails.append("boundary not simple")
    degs = {}
    for v, cyc in enumerate(m.vertices()):
        degs[v] = len(cyc)
    par = [degs[v] == 2 for v in bverts]
    if not (all(par[0::2]) and not any(par[1::2])) and not (
        all(par[1::2]) and not any(par[0::2])
    ):
        fails.append("boundary degrees do not alternate 2 / >2")
    dist = m.distances()
    for r, group in hull.level_groups.items():
        for v in group:
            if dist[v] != r:
                fails.append(f"level {r} vertex at distance {dist[v]}")
                break
    return fails
