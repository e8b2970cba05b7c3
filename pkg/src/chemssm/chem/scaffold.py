"""Murcko scaffolds and canonical, atom-order-invariant scaffold keys.

The scaffold of a molecule is the subgraph of all ring systems plus the
linker atoms and bonds on paths between rings; terminal side-chain atoms are
pruned iteratively. Acyclic molecules map to the empty sentinel key "".

The key is a canonical serialization of that subgraph: atoms are first
ranked by iterative neighborhood refinement (element, aromaticity, charge,
H count, degree, incident bond codes), then the graph is written by a
depth-first traversal that resolves residual rank ties by exhaustively
taking the lexicographically smallest serialization. Permuting the atom
order of the input therefore never changes the key. Chirality and isotopes
never reach this module (the parser drops them).
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Bond, MoleculeGraph, parse_molecule

EMPTY_SCAFFOLD = ""

# Guard against pathological highly-symmetric graphs where exhaustive
# tie-breaking could blow up; far beyond anything drug-like.
_MAX_TIE_EXPANSIONS = 200_000


class CanonicalizationLimit(RuntimeError):
    """The tie-breaking search exceeded its expansion budget."""


@dataclass(frozen=True)
class ScaffoldKey:
    key: str
    is_acyclic: bool

    def __post_init__(self):
        assert self.is_acyclic == (self.key == EMPTY_SCAFFOLD)


def murcko_scaffold(mol: MoleculeGraph) -> ScaffoldKey:
    """Canonical key of the molecule's ring-and-linker framework."""
    keep = _scaffold_atoms(mol)
    if not keep:
        return ScaffoldKey(EMPTY_SCAFFOLD, True)
    remap = {old: new for new, old in enumerate(sorted(keep))}
    atoms = [mol.atoms[old] for old in sorted(keep)]
    bonds = [
        Bond(remap[b.a], remap[b.b], b.order, b.aromatic)
        for b in mol.bonds
        if b.a in keep and b.b in keep
    ]
    return ScaffoldKey(canonical_key(MoleculeGraph(atoms, bonds)), False)


def scaffold_key_for_smiles(smiles: str) -> ScaffoldKey:
    return murcko_scaffold(parse_molecule(smiles))


def _scaffold_atoms(mol: MoleculeGraph) -> set[int]:
    """Indices surviving iterative removal of terminal (degree <= 1) atoms."""
    degree = [0] * mol.n_atoms
    adj: list[list[int]] = [[] for _ in range(mol.n_atoms)]
    for b in mol.bonds:
        degree[b.a] += 1
        degree[b.b] += 1
        adj[b.a].append(b.b)
        adj[b.b].append(b.a)
    alive = [True] * mol.n_atoms
    frontier = [i for i in range(mol.n_atoms) if degree[i] <= 1]
    while frontier:
        nxt: list[int] = []
        for i in frontier:
            if not alive[i]:
                continue
            alive[i] = False
            for j in adj[i]:
                if alive[j]:
                    degree[j] -= 1
                    if degree[j] <= 1:
                        nxt.append(j)
        frontier = nxt
    return {i for i in range(mol.n_atoms) if alive[i]}


def canonical_key(subgraph: MoleculeGraph) -> str:
    """Serialize a (possibly multi-component) graph up to isomorphism.

    Components are canonicalized independently; their strings are sorted and
    joined with '.'. An empty graph yields the empty sentinel.
    """
    if subgraph.n_atoms == 0:
        return EMPTY_SCAFFOLD
    components = _components(subgraph)
    keys = [_canonical_component(subgraph, comp) for comp in components]
    return ".".join(sorted(keys))


def _components(mol: MoleculeGraph) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(mol.n_atoms)]
    for b in mol.bonds:
        adj[b.a].append(b.b)
        adj[b.b].append(b.a)
    seen = [False] * mol.n_atoms
    out: list[list[int]] = []
    for start in range(mol.n_atoms):
        if seen[start]:
            continue
        comp = []
        stack = [start]
        seen[start] = True
        while stack:
            node = stack.pop()
            comp.append(node)
            for nxt in adj[node]:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
        out.append(comp)
    return out


_BOND_CODE = {(1, True): ":", (1, False): "", (2, False): "=", (3, False): "#"}


def _bond_code(bond: Bond) -> str:
    return _BOND_CODE.get((bond.order, bond.aromatic), f"?{bond.order}")


def _atom_code(mol: MoleculeGraph, idx: int) -> str:
    atom = mol.atoms[idx]
    text = atom.element.lower() if atom.aromatic else atom.element
    if atom.charge:
        text += f"{atom.charge:+d}"
    if atom.h_count is not None:
        text += f"H{atom.h_count}"
    return text


def _refine(
    nodes: list[int], adj: dict[int, list[tuple[int, str]]], seed: dict[int, int]
) -> dict[int, int]:
    """Iterate neighborhood signatures to a stable color partition."""
    colors = dict(seed)
    while True:
        signatures = {
            i: (colors[i], tuple(sorted((code, colors[j]) for j, code in adj[i])))
            for i in nodes
        }
        ranking = {sig: rank for rank, sig in enumerate(sorted(set(signatures.values())))}
        new_colors = {i: ranking[signatures[i]] for i in nodes}
        if len(set(new_colors.values())) == len(set(colors.values())):
            return new_colors
        colors = new_colors


def _initial_colors(
    mol: MoleculeGraph, nodes: list[int], adj: dict[int, list[tuple[int, str]]]
) -> dict[int, int]:
    invariants = {
        i: (_atom_code(mol, i), len(adj[i]), tuple(sorted(code for _, code in adj[i])))
        for i in nodes
    }
    ranking = {inv: rank for rank, inv in enumerate(sorted(set(invariants.values())))}
    return {i: ranking[invariants[i]] for i in nodes}


class _Serializer:
    """Minimal-string DFS writer for one connected component.

    Atoms are emitted as their codes, ring-closure back edges as "&k" with k
    the visit index of the earlier endpoint, branches in parentheses with the
    last child inline. Children are ordered by (color, bond code); residual
    ties are broken by trying every candidate next child and keeping the
    lexicographically smallest completion.
    """

    def __init__(self, mol, adj, colors, budget):
        self.mol = mol
        self.adj = adj
        self.colors = colors
        self.budget = budget
        self.visit_index: dict[int, int] = {}
        self.tree_edges: set[frozenset[int]] = set()

    def run(self, root: int) -> str:
        return self._descend(root, "")

    def _snapshot(self):
        return dict(self.visit_index), set(self.tree_edges)

    def _restore(self, state) -> None:
        self.visit_index = dict(state[0])
        self.tree_edges = set(state[1])

    def _descend(self, node: int, via: str) -> str:
        if self.budget[0] <= 0:
            raise CanonicalizationLimit("canonical serialization budget exhausted")
        self.budget[0] -= 1
        self.visit_index[node] = len(self.visit_index)
        parts = [via + _atom_code(self.mol, node)]
        closures = sorted(
            (self.visit_index[j], code)
            for j, code in self.adj[node]
            if j in self.visit_index
            and j != node
            and frozenset((node, j)) not in self.tree_edges
        )
        parts.extend(f"{code}&{idx}" for idx, code in closures)
        parts.append(self._emit_children(node))
        return "".join(parts)

    def _emit_children(self, node: int) -> str:
        avail = sorted(
            (self.colors[j], code, j)
            for j, code in self.adj[node]
            if j not in self.visit_index
        )
        if not avail:
            return ""
        head = (avail[0][0], avail[0][1])
        tied = [c for c in avail if (c[0], c[1]) == head]
        if len(tied) == 1:
            return self._emit_one(node, tied[0])
        best: str | None = None
        best_state = None
        for choice in tied:
            before = self._snapshot()
            candidate = self._emit_one(node, choice)
            after = self._snapshot()
            self._restore(before)
            if best is None or candidate < best:
                best, best_state = candidate, after
        self._restore(best_state)
        return best

    def _emit_one(self, node: int, choice) -> str:
        _, code, child = choice
        self.tree_edges.add(frozenset((node, child)))
        sub = self._descend(child, code)
        rest = self._emit_children(node)
        return (f"({sub})" if rest else sub) + rest


def _canonical_component(mol: MoleculeGraph, nodes: list[int]) -> str:
    adj: dict[int, list[tuple[int, str]]] = {i: [] for i in nodes}
    node_set = set(nodes)
    for b in mol.bonds:
        if b.a in node_set and b.b in node_set:
            code = _bond_code(b)
            adj[b.a].append((b.b, code))
            adj[b.b].append((b.a, code))
    base = _refine(nodes, adj, _initial_colors(mol, nodes, adj))

    # Only atoms whose code matches the smallest can begin the minimal string.
    min_code = min(_atom_code(mol, i) for i in nodes)
    roots = [i for i in nodes if _atom_code(mol, i) == min_code]

    budget = [_MAX_TIE_EXPANSIONS]
    best: str | None = None
    for root in roots:
        # Individualize the root and re-refine: distance-to-root information
        # enters the colors, which collapses most symmetry before the DFS.
        seed = dict(base)
        seed[root] = -1
        colors = _refine(nodes, adj, seed)
        candidate = _Serializer(mol, adj, colors, budget).run(root)
        if best is None or candidate < best:
            best = candidate
    assert best is not None
    return best
