"""Rooted combinatorial maps as rotation systems on darts.

A map is a pair of permutations on darts 0..2E-1: ``sigma`` (next dart
counterclockwise around its vertex) and ``alpha`` (opposite dart, a
fixed-point-free involution), plus a root dart.  Faces are the cycles of
sigma o alpha; genus comes out of Euler's formula.  Rooted maps are rigid, so
equality of canonical (BFS-relabeled) forms is plain tuple comparison.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field


class MapError(ValueError):
    pass


@dataclass(frozen=True)
class RotationMap:
    sigma: tuple[int, ...]
    alpha: tuple[int, ...]
    root: int = 0

    def __post_init__(self):
        n = len(self.sigma)
        if len(self.alpha) != n:
            raise MapError("sigma and alpha must act on the same darts")
        if n == 0:
            return  # the vertex map
        if sorted(self.sigma) != list(range(n)):
            raise MapError("sigma is not a permutation")
        for d, e in enumerate(self.alpha):
            if not 0 <= e < n or e == d or self.alpha[e] != d:
                raise MapError("alpha is not a fixed-point-free involution")
        if not 0 <= self.root < n:
            raise MapError("root dart out of range")
        if not self.is_connected():
            raise MapError("map is not connected: (sigma, alpha) not transitive")

    # -- structure ---------------------------------------------------------

    @property
    def n_darts(self) -> int:
        return len(self.sigma)

    @property
    def n_edges(self) -> int:
        return len(self.sigma) // 2

    def _cycles(self, perm: tuple[int, ...]) -> list[tuple[int, ...]]:
        seen = [False] * len(perm)
        out = []
        for start in range(len(perm)):
            if seen[start]:
                continue
            cyc = []
            d = start
            while not seen[d]:
                seen[d] = True
                cyc.append(d)
                d = perm[d]
            out.append(tuple(cyc))
        return out

    def vertices(self) -> list[tuple[int, ...]]:
        if not self.sigma:
            return []
        return self._cycles(self.sigma)

    def faces(self) -> list[tuple[int, ...]]:
        if not self.sigma:
            return []
        phi = tuple(self.sigma[self.alpha[d]] for d in range(self.n_darts))
        return self._cycles(phi)

    @property
    def n_vertices(self) -> int:
        return 1 if not self.sigma else len(self.vertices())

    def genus(self) -> int:
        if not self.sigma:
            return 0
        v = len(self.vertices())
        f = len(self.faces())
        e = self.n_edges
        chi = v - e + f
        if chi % 2:
            raise MapError("odd Euler characteristic")
        return (2 - chi) // 2

    def is_connected(self) -> bool:
        n = len(self.sigma)
        if n == 0:
            return True
        seen = [False] * n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            d = stack.pop()
            for e in (self.sigma[d], self.alpha[d]):
                if not seen[e]:
                    seen[e] = True
                    count += 1
                    stack.append(e)
        return count == n

    def vertex_of(self) -> list[int]:
        """dart -> vertex index, vertices numbered by their minimal dart."""
        out = [-1] * self.n_darts
        for i, cyc in enumerate(self.vertices()):
            for d in cyc:
                out[d] = i
        return out

    def distances(self) -> list[int]:
        """BFS distance from the root vertex, per vertex (vertices() order)."""
        if not self.sigma:
            return [0]
        verts = self.vertices()
        vof = self.vertex_of()
        dist = [-1] * len(verts)
        start = vof[self.root]
        dist[start] = 0
        qq = deque([start])
        while qq:
            v = qq.popleft()
            for d in verts[v]:
                w = vof[self.alpha[d]]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    qq.append(w)
        return dist

    def is_bipartite(self) -> bool:
        """Distance parity two-colors the vertices iff no odd cycle exists."""
        verts = self.vertices()
        vof = self.vertex_of()
        dist = self.distances()
        for v, cyc in enumerate(verts):
            for d in cyc:
                if (dist[v] - dist[vof[self.alpha[d]]]) % 2 == 0:
                    return False
        return True

    # -- canonical form ------------------------------------------------------

    def canonical(self) -> "RotationMap":
        """Relabel darts in BFS-from-root first-visit order.

        Rooted maps have no nontrivial automorphisms, so isomorphic rooted
        maps produce identical canonical forms.
        """
        if not self.sigma:
            return self
        n = self.n_darts
        label = [-1] * n
        nxt = 0
        queue = deque([self.root])
        while queue:
            d0 = queue.popleft()
            if label[d0] >= 0:
                continue
            d = d0
            cyc = []
            while label[d] < 0:
                label[d] = nxt
                nxt += 1
                cyc.append(d)
                d = self.sigma[d]
            for d in cyc:
                if label[self.alpha[d]] < 0:
                    queue.append(self.alpha[d])
        if nxt != n:
            raise MapError("canonical labeling did not reach every dart")
        sigma = [0] * n
        alpha = [0] * n
        for d in range(n):
            sigma[label[d]] = label[self.sigma[d]]
            alpha[label[d]] = label[self.alpha[d]]
        return RotationMap(tuple(sigma), tuple(alpha), 0)

    def key(self) -> tuple:
        c = self.canonical()
        return (c.sigma, c.alpha)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> str:
        """One-line JSON: darts count, 1-based sigma/alpha, root, and per-vertex
        BFS distances in vertices() order."""
        return json.dumps(
            {
                "darts": self.n_darts,
                "sigma": [d + 1 for d in self.sigma],
                "alpha": [d + 1 for d in self.alpha],
                "root": self.root + 1 if self.sigma else 0,
                "labels": {"dist": self.distances()},
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "RotationMap":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise MapError(f"malformed JSON: {e}") from None
        n = obj["darts"]
        sigma = tuple(d - 1 for d in obj["sigma"])
        alpha = tuple(d - 1 for d in obj["alpha"])
        if len(sigma) != n or len(alpha) != n:
            raise MapError(f"dart count {n} does not match permutation length")
        for idx, e in enumerate(alpha):
            if e == idx:
                raise MapError(f"alpha has a fixed point at dart {idx + 1}")
        m = cls(sigma, alpha, obj["root"] - 1 if n else 0)
        return m


def quad_face_check(m: RotationMap, boundary_face_of_dart: int | None = None) -> bool:
    """All faces quadrilateral, except the face containing the given dart."""
    for f in m.faces():
        if boundary_face_of_dart is not None and boundary_face_of_dart in f:
            continue
        if len(f) != 4:
            return False
    return True
