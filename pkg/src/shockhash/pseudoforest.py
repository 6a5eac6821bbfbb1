"""Pseudoforest detection and 1-orientation extraction.

n keys and a seed induce a multigraph on the n table cells: one edge per
key, connecting its two candidate cells. The cuckoo table can be filled
completely iff every component has exactly as many edges as nodes (a
non-tree pseudotree, since we always insert n edges over n nodes). This
module decides that incrementally with a union-find structure and, on
success, extracts a per-key choice of hash function whose induced map is
a bijection onto the cells.
"""

from .errors import ContractViolationError, InvalidParameterError


class UnionFindPF:
    """Disjoint-set forest with a per-root tree/pseudotree label.

    Path compression plus union by size; a component that would exceed one
    cycle rejects the edge and poisons the structure until reset().
    """

    def __init__(self, n: int):
        if n <= 0:
            raise InvalidParameterError("n must be positive")
        self.n = n
        self.parent = list(range(n))
        self.size = [1] * n
        self.pseudo = [False] * n
        self.components = n
        self.poisoned = False

    def reset(self) -> None:
        for i in range(self.n):
            self.parent[i] = i
            self.size[i] = 1
            self.pseudo[i] = False
        self.components = self.n
        self.poisoned = False

    def find(self, x: int) -> int:
        if not 0 <= x < self.n:
            raise InvalidParameterError(f"node {x} out of range")
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def is_pseudotree(self, x: int) -> bool:
        """Label of the component containing x (False: still a tree)."""
        return self.pseudo[self.find(x)]

    def try_insert_edge(self, u: int, v: int) -> bool:
        """Add edge {u, v}; False and poisoned if some component would
        hold more edges than nodes."""
        if self.poisoned:
            raise ContractViolationError("union-find is poisoned; reset() first")
        ru = self.find(u)
        rv = self.find(v)
        if ru == rv:
            if self.pseudo[ru]:
                self.poisoned = True
                return False
            self.pseudo[ru] = True
            return True
        if self.pseudo[ru] and self.pseudo[rv]:
            self.poisoned = True
            return False
        if self.size[ru] < self.size[rv]:
            ru, rv = rv, ru
        self.parent[rv] = ru
        self.size[ru] += self.size[rv]
        self.pseudo[ru] = self.pseudo[ru] or self.pseudo[rv]
        self.components -= 1
        return True


def _check_edges(edges, n):
    if len(edges) != n:
        raise InvalidParameterError(f"expected exactly {n} edges, got {len(edges)}")
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidParameterError(f"edge ({u}, {v}) out of range for n={n}")


def is_pseudoforest(edges, n: int) -> bool:
    """True iff the n-edge multigraph on n nodes is a (maximal) pseudoforest."""
    _check_edges(edges, n)
    uf = UnionFindPF(n)
    for u, v in edges:
        if not uf.try_insert_edge(u, v):
            return False
    return True


def count_orientations(edges, n: int) -> int:
    """2^(number of components) if pseudoforest, else 0.

    Deliberately independent of the union-find path: plain DFS component
    scan with per-component edge counting, for oracle use.
    """
    _check_edges(edges, n)
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    comps = 0
    for start in range(n):
        if seen[start]:
            continue
        comps += 1
        stack = [start]
        seen[start] = True
        nodes = 0
        degree_sum = 0
        while stack:
            u = stack.pop()
            nodes += 1
            degree_sum += len(adj[u])
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        # Self-loops contribute 2 to their node's adjacency list.
        if degree_sum != 2 * nodes:
            return 0
    return 1 << comps


class Orientation:
    """Per-key choice bits whose induced key-to-cell map is a bijection."""

    def __init__(self, choice):
        self.choice = choice

    def __iter__(self):
        return iter(self.choice)

    def __getitem__(self, i):
        return self.choice[i]

    def __len__(self):
        return len(self.choice)


def orient(edges, n: int) -> Orientation:
    """Extract a canonical valid 1-orientation of a pseudoforest.

    Peels degree-1 nodes (their key is assigned to that cell), then walks
    each remaining cycle starting from its lowest-index key, which is
    assigned to its first candidate cell.
    """
    _check_edges(edges, n)
    if not is_pseudoforest(edges, n):
        raise ContractViolationError("orient() requires a pseudoforest")
    adj = [[] for _ in range(n)]
    deg = [0] * n
    for k, (u, v) in enumerate(edges):
        adj[u].append(k)
        adj[v].append(k)
        deg[u] += 1
        deg[v] += 1
    choice = [0] * n
    alive = [True] * n
    filled = [False] * n
    stack = [u for u in range(n) if deg[u] == 1]
    while stack:
        u = stack.pop()
        if deg[u] != 1:
            continue
        k = next(k for k in adj[u] if alive[k])
        eu, ev = edges[k]
        choice[k] = 0 if eu == u else 1
        alive[k] = False
        filled[u] = True
        deg[eu] -= 1
        deg[ev] -= 1
        other = ev if eu == u else eu
        if deg[other] == 1:
            stack.append(other)
    # Remaining alive edges form node-disjoint cycles (incl. self-loops).
    for k0 in range(n):
        if not alive[k0]:
            continue
        u0, v0 = edges[k0]
        choice[k0] = 0
        alive[k0] = False
        filled[u0] = True
        node = v0
        while node != u0:
            k = next(k for k in adj[node] if alive[k])
            eu, ev = edges[k]
            choice[k] = 0 if eu == node else 1
            alive[k] = False
            filled[node] = True
            node = ev if eu == node else eu
    assert all(filled), "orientation did not cover every cell"
    return Orientation(choice)
