"""Brute-force ground truth: exhaustive enumeration of small maps and trees.

The enumerator fixes the face permutation (N quadrilateral cycles, plus one
boundary cycle for maps with boundary) and searches over the edge involution
alpha, so "all faces are squares" holds by construction and only genus,
connectivity and the boundary conditions are filtered.  Untouched quads are
entered canonically (lowest index, rotation 0), which kills the relabeling
stabilizer exactly once per rooted map; a canonical-form uniqueness assert
backs that argument at runtime.

Boundary maps follow the convention their generating function imposes: the
distinguished 2m-gon has all vertices distinct, the root dart sits on it
with root vertex of degree exactly two, degrees strictly alternate (the root
class has degree 2, the other class degree >= 3), and boundary edges never
pair with each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .maps import RotationMap

Q = Fraction


class OracleCostError(ValueError):
    """Enumeration request beyond desk scale; carries a cost estimate."""

    def __init__(self, what: str, estimate: float):
        self.estimate = estimate
        super().__init__(
            f"{what}: refusing exhaustive enumeration, estimated >= {estimate:.2e} search nodes"
        )


@dataclass(frozen=True)
class Catalog:
    key: tuple
    entries: tuple[RotationMap, ...]

    @property
    def count(self) -> int:
        return len(self.entries)


MAX_QUAD_FACES = 4
MAX_BOUNDARY_DARTS = 28  # 4N + 2m


def _enumerate_alpha(n_quads: int, boundary: int) -> list[tuple[int, ...]]:
    """All edge involutions for the fixed face permutation, one per rooted map.

    Darts 0..boundary-1 form the boundary face cycle (empty for sphere maps);
    quad q occupies darts boundary+4q .. boundary+4q+3.  Returns completed
    alphas passing genus-0, connectivity and (if boundary) the simple-boundary
    degree conditions.
    """
    D = boundary + 4 * n_quads
    # fixed face permutation
    phi = [0] * D
    for j in range(boundary):
        phi[j] = (j + 1) % boundary
    for qd in range(n_quads):
        base = boundary + 4 * qd
        for i in range(4):
            phi[base + i] = base + (i + 1) % 4
    v_target = (n_quads + boundary // 2 + 1) if boundary else (n_quads + 2)

    alpha = [-1] * D
    snext = [-1] * D  # partial sigma = phi o alpha
    sprev = [-1] * D
    # union-find over darts for connectivity, seeded by face cycles
    parent = list(range(D))
    unmatched_in = [0] * D

    def find(x):
        # no path compression: unions are rolled back on backtrack
        while parent[x] != x:
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            unmatched_in[rb] += unmatched_in[ra]
        return rb

    for j in range(boundary):
        union(j, 0)
    for qd in range(n_quads):
        base = boundary + 4 * qd
        for i in range(1, 4):
            union(base + i, base)

    results: list[tuple[int, ...]] = []
    state = {"closed": 0, "frags": D, "unmatched": D, "touched": 0}
    for d in range(D):
        unmatched_in[find(d)] += 0
    # recompute unmatched counts per component root
    comp_unmatched: dict[int, int] = {}
    for d in range(D):
        r = find(d)
        comp_unmatched[r] = comp_unmatched.get(r, 0) + 1

    # fragment tracking via path endpoints: end_of[x] is the other endpoint of
    # the maximal sigma-path through x, maintained only at endpoints
    end_of = list(range(D))

    def link(a, b):
        """Add the sigma edge a -> b; returns an undo record.  Kind 'cycle'
        means a vertex closed."""
        snext[a] = b
        sprev[b] = a
        ea, eb = end_of[a], end_of[b]
        if ea == b:  # closes a cycle
            state["closed"] += 1
            state["frags"] -= 1
            return ("cycle", a, b)
        # join two paths: new endpoints are ea (head side) and eb
        end_of[ea], end_of[eb] = eb, ea
        state["frags"] -= 1
        return ("path", a, b, ea, eb)

    def unlink(rec):
        if rec[0] == "cycle":
            state["closed"] -= 1
            state["frags"] += 1
        else:
            _, a, b, ea, eb = rec
            end_of[ea], end_of[a] = a, ea
            end_of[eb], end_of[b] = b, eb
            state["frags"] += 1

    def cycle_darts(a):
        """Darts of the closed cycle through a (only valid right after close)."""
        out = [a]
        d = snext[a]
        while d != a:
            out.append(d)
            d = snext[d]
        return out

    def vertex_ok_on_close(a) -> bool:
        """Boundary degree conditions, checked when a sigma-cycle closes."""
        if not boundary:
            return True
        cyc = cycle_darts(a)
        bdarts = [d for d in cyc if d < boundary]
        if not bdarts:
            return True
        if len(bdarts) > 1:
            return False  # simplicity: two boundary corners on one vertex
        j = bdarts[0]
        # vertex of dart j is the tail of boundary dart j: root class = even j
        if j % 2 == 0:
            return len(cyc) == 2
        return len(cyc) >= 3

    def match(d, e, touch=None):
        """Assign alpha pair (d, e); returns undo record or None if pruned."""
        alpha[d] = e
        alpha[e] = d
        state["unmatched"] -= 2
        recs = []
        ok = True
        for x, y in ((e, phi[d]), (d, phi[e])):  # sigma[x] = phi[alpha[x]]
            rec = link(x, y)
            recs.append(rec)
            if rec[0] == "cycle" and not vertex_ok_on_close(x):
                ok = False
                break
        # Euler prune: closed must stay <= v_target, and closed + frags >= v_target
        if ok and (state["closed"] > v_target or state["closed"] + state["frags"] < v_target):
            ok = False
        # connectivity prune
        ra, rb = find(d), find(e)
        merged = None
        if ok:
            if ra != rb:
                ua, ub = comp_unmatched[ra], comp_unmatched[rb]
                parent[ra] = rb
                comp_unmatched[rb] = ua + ub - 2
                merged = (ra, rb, ua, ub)
            else:
                comp_unmatched[ra] -= 2
                merged = (ra,)
            root = find(d)
            if comp_unmatched[root] == 0 and state["unmatched"] > 0:
                ok = False
        undo = (d, e, recs, merged, None)
        if not ok:
            unmatch(undo)
            return None
        return (d, e, recs, merged, touch)

    def unmatch(undo):
        d, e, recs, merged, touch = undo
        if merged is not None:
            if len(merged) == 4:
                ra, rb, ua, ub = merged
                parent[ra] = ra
                comp_unmatched[ra], comp_unmatched[rb] = ua, ub
            else:
                comp_unmatched[merged[0]] += 2
        for rec in reversed(recs):
            unlink(rec)
        alpha[d] = alpha[e] = -1
        state["unmatched"] += 2
        if touch is not None:
            state["touched"] -= 1

    def first_unmatched():
        for d in range(D):
            if alpha[d] == -1:
                return d
        return -1

    def recurse():
        d = first_unmatched()
        if d == -1:
            if state["closed"] == v_target:
                results.append(tuple(alpha))
            return
        # candidates: unmatched darts in touched territory
        limit = boundary + 4 * state["touched"]
        for e in range(d + 1, limit):
            if alpha[e] != -1:
                continue
            if boundary and d < boundary and e < boundary:
                continue  # boundary edges never pair together
            undo = match(d, e, touch=None)
            if undo is not None:
                recurse()
                unmatch(undo)
        # canonical entry into the least untouched quad
        if state["touched"] < n_quads:
            e = boundary + 4 * state["touched"]
            state["touched"] += 1
            undo = match(d, e, touch=True)
            if undo is not None:
                recurse()
                unmatch(undo)
            else:
                state["touched"] -= 1

    # the root dart (dart 0) must be in touched territory from the start
    if n_quads == 0 and boundary == 0:
        return []
    if boundary == 0:
        state["touched"] = 1  # quad 0 holds the root dart
    recurse()
    return results


def _build_map(alpha: tuple[int, ...], boundary: int) -> RotationMap:
    D = len(alpha)
    n_quads = (D - boundary) // 4
    phi = [0] * D
    for j in range(boundary):
        phi[j] = (j + 1) % boundary
    for q in range(n_quads):
        base = boundary + 4 * q
        for i in range(4):
            phi[base + i] = base + (i + 1) % 4
    sigma = tuple(phi[alpha[d]] for d in range(D))
    return RotationMap(sigma, tuple(alpha), 0)


@lru_cache(maxsize=None)
def enumerate_quadrangulations(N: int) -> Catalog:
    """All rooted quadrangulations with N faces, as canonical rotation maps."""
    if N < 0:
        raise ValueError("N must be non-negative")
    if N == 0:
        return Catalog(key=(0,), entries=(RotationMap((), (), 0),))
    if N > MAX_QUAD_FACES:
        raise OracleCostError(f"quadrangulations with N={N}", 3.0 ** (4 * N))
    alphas = _enumerate_alpha(N, 0)
    entries = []
    seen = set()
    for a in alphas:
        m = _build_map(a, 0).canonical()
        k = (m.sigma, m.alpha)
        if k in seen:
            raise AssertionError("canonical-entry enumeration produced a duplicate")
        seen.add(k)
        entries.append(m)
    entries.sort(key=lambda m: (m.sigma, m.alpha))
    return Catalog(key=(N,), entries=tuple(entries))


@lru_cache(maxsize=None)
def enumerate_boundary_quadrangulations(N: int, m: int) -> Catalog:
    """Rooted quadrangulations, N faces, simple boundary 2m, root on the
    boundary at a degree-two vertex."""
    if N < 0 or m < 1:
        raise ValueError("need N >= 0 and m >= 1")
    if 4 * N + 2 * m > MAX_BOUNDARY_DARTS:
        raise OracleCostError(
            f"boundary quadrangulations (N={N}, m={m})", 3.0 ** (4 * N + 2 * m)
        )
    alphas = _enumerate_alpha(N, 2 * m)
    entries = []
    seen = set()
    for a in alphas:
        mp = _build_map(a, 2 * m).canonical()
        k = (mp.sigma, mp.alpha)
        if k in seen:
            raise AssertionError("canonical-entry enumeration produced a duplicate")
        seen.add(k)
        entries.append(mp)
    entries.sort(key=lambda mm: (mm.sigma, mm.alpha))
    return Catalog(key=(N, m), entries=tuple(entries))


# ---------------------------------------------------------------------------
# well-labeled trees
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _plane_trees(n_edges: int) -> tuple:
    """All plane trees with n edges, as nested tuples of children subtrees."""
    if n_edges == 0:
        return ((),)
    out = []
    for k in range(1, n_edges + 1):  # edges in the first child's subtree + 1
        for first in _plane_trees(k - 1):
            for rest in _plane_trees(n_edges - k):
                out.append((first,) + rest)
    return tuple(out)


def enumerate_well_labeled_trees(n: int) -> dict:
    """Counts of well-labeled trees with n edges under both conventions.

    root1: root labeled 1; min1: minimum label exactly 1, root free.  Labels
    are positive integers differing by at most one across edges.  The variant
    whose ratio to the quadrangulation count is constant in n is the one the
    bijection supports; calibration happens in the tests.
    """
    if n < 0 or n > 9:
        raise OracleCostError(f"well-labeled trees with n={n}", 4.0**n * 3.0**n)
    if n == 0:
        return {"n": 0, "root1": 1, "min1": 1, "trees": 1}
    max_label = n + 1
    root1 = 0
    min1 = 0
    trees = 0
    for shape in _plane_trees(n):
        trees += 1
        root1 += _count_any(shape, 1, max_label)
        min1 += _count_min1(shape, max_label)
    return {"n": n, "root1": root1, "min1": min1, "trees": trees}


@lru_cache(maxsize=None)
def _count_any(shape: tuple, label: int, max_label: int) -> int:
    total = 1
    for child in shape:
        acc = 0
        for lab in (label - 1, label, label + 1):
            if 1 <= lab <= max_label:
                acc += _count_any(child, lab, max_label)
        total *= acc
    return total


@lru_cache(maxsize=None)
def _count_no1(shape: tuple, label: int, max_label: int) -> int:
    if label == 1:
        return 0
    total = 1
    for child in shape:
        acc = 0
        for lab in (label - 1, label, label + 1):
            if 2 <= lab <= max_label:
                acc += _count_no1(child, lab, max_label)
        total *= acc
    return total


def _count_min1(shape: tuple, max_label: int) -> int:
    total = 0
    for r in range(1, max_label + 1):
        total += _count_any(shape, r, max_label) - _count_no1(shape, r, max_label)
    return total
