"""SMILES to molecular graph: atoms, bonds, ring membership.

Aromaticity is taken verbatim from the source string (lowercase atoms,
':' bonds, default bonds between two aromatic atoms); there is no
perception pass. Chirality markers are parsed and discarded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .tokenizer import (
    _BRACKET_RE,
    AROMATIC_ATOMS,
    SmilesSyntaxError,
    TokenKind,
    lex,
)


class SmilesSemanticError(ValueError):
    """Structurally impossible SMILES: self-bonds, duplicate ring bonds, rootless branches."""


_BOND_ORDER = {"-": 1, "=": 2, "#": 3, ":": 1, "/": 1, "\\": 1}


@dataclass(frozen=True)
class Atom:
    element: str
    aromatic: bool
    charge: int = 0
    h_count: int | None = None
    bracket: bool = False


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: int
    aromatic: bool


@dataclass
class MoleculeGraph:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)
    # Number of ring-closure digit pairs consumed while parsing; 0 for graphs
    # assembled directly.
    closure_count: int = 0

    def __post_init__(self):
        seen: set[tuple[int, int]] = set()
        n = len(self.atoms)
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise SmilesSemanticError(f"bond endpoint out of range: {bond}")
            if bond.a == bond.b:
                raise SmilesSemanticError(f"self-bond on atom {bond.a}")
            key = (min(bond.a, bond.b), max(bond.a, bond.b))
            if key in seen:
                raise SmilesSemanticError(f"duplicate bond between atoms {key}")
            seen.add(key)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def neighbors(self) -> list[list[tuple[int, Bond]]]:
        """Adjacency list: for each atom, (neighbor index, bond) pairs."""
        adj: list[list[tuple[int, Bond]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            adj[bond.a].append((bond.b, bond))
            adj[bond.b].append((bond.a, bond))
        return adj

    def ring_bond_flags(self) -> list[bool]:
        """Per-bond flag: True iff the bond lies on a cycle (is not a bridge)."""
        adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for idx, bond in enumerate(self.bonds):
            adj[bond.a].append((bond.b, idx))
            adj[bond.b].append((bond.a, idx))
        n = len(self.atoms)
        disc = [-1] * n
        low = [0] * n
        is_bridge = [False] * len(self.bonds)
        counter = 0
        for root in range(n):
            if disc[root] != -1:
                continue
            # Iterative Tarjan bridge finding; (atom, parent edge, neighbor cursor).
            stack = [(root, -1, 0)]
            disc[root] = low[root] = counter
            counter += 1
            while stack:
                node, parent_edge, cursor = stack.pop()
                if cursor < len(adj[node]):
                    stack.append((node, parent_edge, cursor + 1))
                    nxt, edge = adj[node][cursor]
                    if edge == parent_edge:
                        continue
                    if disc[nxt] == -1:
                        disc[nxt] = low[nxt] = counter
                        counter += 1
                        stack.append((nxt, edge, 0))
                    else:
                        low[node] = min(low[node], disc[nxt])
                elif parent_edge != -1:
                    bond = self.bonds[parent_edge]
                    parent = bond.a if bond.b == node else bond.b
                    low[parent] = min(low[parent], low[node])
                    if low[node] > disc[parent]:
                        is_bridge[parent_edge] = True
        return [not b for b in is_bridge]

    def ring_membership(self) -> list[bool]:
        """Per-atom flag: True iff the atom sits on at least one cycle."""
        in_ring = [False] * len(self.atoms)
        for bond, on_ring in zip(self.bonds, self.ring_bond_flags()):
            if on_ring:
                in_ring[bond.a] = True
                in_ring[bond.b] = True
        return in_ring


def _parse_bracket(text: str, offset: int) -> Atom:
    match = _BRACKET_RE.match(text)
    if match is None:  # lex() already validated; defensive
        raise SmilesSyntaxError(f"malformed bracket atom {text!r}", offset)
    element = match.group("element")
    aromatic = element in AROMATIC_ATOMS
    hcount = match.group("hcount")
    h = 0
    if hcount is not None:
        h = int(hcount[1:]) if len(hcount) > 1 else 1
    charge_text = match.group("charge") or ""
    if charge_text.strip("+") == "" and charge_text:
        charge = len(charge_text)  # "+", "++", ...
    elif charge_text.strip("-") == "" and charge_text:
        charge = -len(charge_text)
    elif charge_text:
        charge = int(charge_text)  # "+2", "-1", ...
    else:
        charge = 0
    return Atom(element.capitalize(), aromatic, charge, h, bracket=True)


def parse_molecule(smiles: str) -> MoleculeGraph:
    """Parse a SMILES string into a MoleculeGraph.

    Ring-closure digits may be recycled after they close. A bond symbol given
    on either side of a closure pair applies to the ring bond; conflicting
    symbols are an error.
    """
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    # digit -> (atom index, bond symbol or None, source offset)
    open_rings: dict[str, tuple[int, str | None, int]] = {}
    branch_stack: list[int | None] = []
    anchor: int | None = None
    pending_bond: str | None = None
    pending_offset = 0
    closure_count = 0

    def attach(new_idx: int) -> None:
        nonlocal pending_bond
        if anchor is not None:
            bonds.append(_make_bond(atoms, anchor, new_idx, pending_bond))
        elif pending_bond is not None:
            raise SmilesSyntaxError("bond symbol with no preceding atom", pending_offset)
        pending_bond = None

    for kind, text, offset in lex(smiles):
        if kind in (TokenKind.ATOM, TokenKind.BRACKET_ATOM):
            if kind is TokenKind.ATOM:
                aromatic = text in AROMATIC_ATOMS
                atom = Atom(text.capitalize(), aromatic)
            else:
                atom = _parse_bracket(text, offset)
            atoms.append(atom)
            idx = len(atoms) - 1
            attach(idx)
            anchor = idx
        elif kind is TokenKind.BOND:
            if pending_bond is not None:
                raise SmilesSyntaxError(f"two bond symbols in a row at {text!r}", offset)
            pending_bond = text
            pending_offset = offset
        elif kind is TokenKind.RING_BOND:
            if anchor is None:
                raise SmilesSemanticError(f"ring digit {text!r} before any atom")
            if text in open_rings:
                other, other_bond, _ = open_rings.pop(text)
                symbol = _resolve_closure_bond(pending_bond, other_bond, text)
                if other == anchor:
                    raise SmilesSemanticError(f"ring digit {text!r} closes onto its own atom")
                bonds.append(_make_bond(atoms, other, anchor, symbol))
                closure_count += 1
                pending_bond = None
            else:
                open_rings[text] = (anchor, pending_bond, offset)
                pending_bond = None
        elif kind is TokenKind.BRANCH_OPEN:
            if anchor is None:
                raise SmilesSemanticError("branch '(' with no root atom")
            if pending_bond is not None:
                raise SmilesSyntaxError("bond symbol before '('", pending_offset)
            branch_stack.append(anchor)
        elif kind is TokenKind.BRANCH_CLOSE:
            if pending_bond is not None:
                raise SmilesSyntaxError("dangling bond symbol before ')'", pending_offset)
            anchor = branch_stack.pop()
        elif kind is TokenKind.DOT:
            if pending_bond is not None:
                raise SmilesSyntaxError("bond symbol before '.'", pending_offset)
            anchor = None

    if pending_bond is not None:
        raise SmilesSyntaxError("dangling bond symbol at end of string", pending_offset)

    graph = MoleculeGraph(atoms, bonds, closure_count)
    return graph


def _resolve_closure_bond(here: str | None, there: str | None, digit: str) -> str | None:
    if here is not None and there is not None and here != there:
        raise SmilesSemanticError(
            f"conflicting bond symbols {there!r} and {here!r} on ring digit {digit!r}"
        )
    return here if here is not None else there


def _make_bond(atoms: list[Atom], a: int, b: int, symbol: str | None) -> Bond:
    if symbol is None:
        aromatic = atoms[a].aromatic and atoms[b].aromatic
        return Bond(a, b, 1, aromatic)
    return Bond(a, b, _BOND_ORDER[symbol], symbol == ":")
