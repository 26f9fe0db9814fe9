"""Exotic coloured trees: data model, canonical form, parsing and symmetries.

A tree is stored in canonical preorder. Vertex 0 is the root (pseudo-colour
``o``); every other vertex is an ``a`` (alpha) or ``b`` (beta) vertex. Beta
vertices come in pairs sharing a pairing id; ids are renumbered by first
appearance in the canonical preorder, so two trees are isomorphic exactly
when their canonical strings coincide.

Canonical form. Children of a vertex are grouped into *units*: a cherry (two
beta leaves paired with each other) or a single child subtree. Units are
sorted by a pair-blind invariant, which fixes the skeleton of the string.
What remains is choosing, among interchangeable units carrying pairs that
leave their subtree, the order that minimises the sequence of pairing ids;
that part is a branch-and-bound search. Subtrees without outgoing pairs are
canonicalised once and treated as atoms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from math import factorial
from typing import Sequence

import networkx as nx

from .errors import DegenerateTreeError, TreeStructureError, TreeSyntaxError


class Colour(str, Enum):
    ROOT = "o"
    ALPHA = "a"
    BETA = "b"


# ---------------------------------------------------------------------------
# canonicalisation helpers (operate on raw, unordered structures)


class _Raw:
    """Unordered tree with arbitrary vertex numbering and raw pairing ids."""

    def __init__(self, colours: Sequence[Colour], parents: Sequence[int], pairs: Sequence[int]):
        if not (len(colours) == len(parents) == len(pairs)):
            raise TreeStructureError(message="colours, parents and pairs must have equal length")
        self.n = len(colours)
        self.colours = [Colour(c) for c in colours]
        self.parents = list(parents)
        self.pairs = list(pairs)
        roots = [v for v, p in enumerate(parents) if p < 0]
        if len(roots) != 1:
            raise TreeStructureError(message=f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        if self.colours[self.root] is not Colour.ROOT:
            raise TreeStructureError(message="the root must carry the root colour")
        self.children: list[list[int]] = [[] for _ in range(self.n)]
        for v, p in enumerate(parents):
            if p >= 0:
                if p >= self.n:
                    raise TreeStructureError(message=f"vertex {v} has unknown parent {p}")
                self.children[p].append(v)
        self._validate()

    def _validate(self) -> None:
        members: dict[int, list[int]] = {}
        for v in range(self.n):
            c = self.colours[v]
            pid = self.pairs[v]
            if c is Colour.BETA:
                if pid <= 0:
                    raise TreeStructureError(message=f"beta vertex {v} has no pairing id")
                members.setdefault(pid, []).append(v)
            elif pid:
                raise TreeStructureError(message=f"pairing id {pid} on a non-beta vertex")
            if c is Colour.ROOT and v != self.root:
                raise TreeStructureError(message="root colour on a non-root vertex")
        for pid, vs in members.items():
            if len(vs) != 2:
                raise TreeStructureError(message=f"pairing id {pid} used {len(vs)} times, expected 2")

        # Preorder + Euler-tour intervals; also detects cycles/unreachable vertices.
        self.tin = [-1] * self.n
        self.tout = [-1] * self.n
        clock = 0
        stack: list[tuple[int, int]] = [(self.root, 0)]
        while stack:
            v, state = stack.pop()
            if state == 0:
                if self.tin[v] >= 0:
                    raise TreeStructureError(message="parent map is not a tree")
                self.tin[v] = clock
                clock += 1
                stack.append((v, 1))
                for c in reversed(self.children[v]):
                    stack.append((c, 0))
            else:
                self.tout[v] = clock
        if clock != self.n:
            raise TreeStructureError(message="parent map is not connected to the root")

        self.partner = [-1] * self.n
        for vs in members.values():
            a, b = vs
            self.partner[a] = b
            self.partner[b] = a
            if self.is_ancestor(a, b) or self.is_ancestor(b, a):
                raise DegenerateTreeError(message="paired beta-vertices lie on a common root path")
        self._check_merged_acyclic(members)

    def _check_merged_acyclic(self, members: dict[int, list[int]]) -> None:
        rep = list(range(self.n))
        for a, b in members.values():
            rep[b] = a
        g = nx.DiGraph()
        g.add_nodes_from({rep[v] for v in range(self.n) if v != self.root})
        for v, p in enumerate(self.parents):
            if p >= 0 and p != self.root:
                g.add_edge(rep[v], rep[p])
        if not nx.is_directed_acyclic_graph(g):
            raise DegenerateTreeError(message="merging paired beta-vertices closes a directed cycle")

    def is_ancestor(self, a: int, b: int) -> bool:
        """True if a is a (non-strict) ancestor of b."""

        return self.tin[a] <= self.tin[b] < self.tout[a]

    # -- invariants ---------------------------------------------------------

    def analyse(self) -> None:
        self.ports = [0] * self.n
        for v in range(self.n):
            if self.colours[v] is Colour.BETA:
                w = self.partner[v]
                # Every ancestor x of v that does not contain w gets a port.
                x = v
                while x >= 0 and not self.is_ancestor(x, w):
                    self.ports[x] += 1
                    x = self.parents[x]

        self.units: list[list[tuple[int, ...]]] = [[] for _ in range(self.n)]
        self.code: list[tuple] = [()] * self.n
        self.unit_key: dict[tuple[int, ...], tuple] = {}
        for v in sorted(range(self.n), key=lambda x: -self.tin[x]):
            kids = self.children[v]
            kidset = set(kids)
            used: set[int] = set()
            units: list[tuple[int, ...]] = []
            for c in kids:
                if c in used:
                    continue
                p = self.partner[c]
                if (
                    self.colours[c] is Colour.BETA
                    and not self.children[c]
                    and p in kidset
                    and not self.children[p]
                ):
                    units.append((c, p))
                    used.update((c, p))
                    self.unit_key[(c, p)] = (("b", ()), 1, 0)
                else:
                    units.append((c,))
                    used.add(c)
                    self.unit_key[(c,)] = (self.code[c], 0, self.ports[c])
            units.sort(key=lambda u: self.unit_key[u])
            self.units[v] = units
            self.code[v] = (self.colours[v].value, tuple(self.unit_key[u] for u in units))

        self._atoms: dict[int, tuple[list[int], list[int]]] = {}

    # -- canonical search ---------------------------------------------------

    def _groups(self, v: int) -> list[tuple[bool, list[tuple[int, ...]]]]:
        """Tie groups of units under v, each flagged as branching or not."""

        out: list[tuple[bool, list[tuple[int, ...]]]] = []
        for key, members in itertools.groupby(self.units[v], key=lambda u: self.unit_key[u]):
            ms = list(members)
            ported = key[2] > 0
            if not ported and len(ms) > 1 and key[1] == 0:
                ms.sort(key=lambda u: self.atom(u[0])[1])
            out.append((ported and len(ms) > 1, ms))
        return out

    def atom(self, v: int) -> tuple[list[int], list[int]]:
        """Canonical (vertex order, relative ids) of a subtree without outgoing pairs."""

        hit = self._atoms.get(v)
        if hit is None:
            hit = self._minimise(v)
            self._atoms[v] = hit
        return hit

    def _minimise(self, top: int) -> tuple[list[int], list[int]]:
        best_ids: list[int] | None = None
        best_order: list[int] = []

        def beaten(ids: list[int]) -> bool:
            return best_ids is not None and ids > best_ids[: len(ids)]

        # Agenda items: ("v", vertex) | ("u", unit) | ("g", units)
        def emit_vertex(v: int, agenda: list, order: list[int], ids: list[int], idmap: dict[int, int], counter: int) -> None:
            order = order + [v]
            if self.colours[v] is Colour.BETA:
                pid = self.pairs[v]
                if pid in idmap:
                    val = idmap[pid]
                else:
                    counter += 1
                    val = counter
                    idmap = {**idmap, pid: val}
                ids = ids + [val]
                if beaten(ids):
                    return
            front: list = []
            for branching, members in self._groups(v):
                if branching:
                    front.append(("g", tuple(members)))
                else:
                    front.extend(("u", u) for u in members)
            step(front + agenda, order, ids, idmap, counter)

        def emit_unit(u: tuple[int, ...], agenda: list, order: list[int], ids: list[int], idmap: dict[int, int], counter: int) -> None:
            c = u[0]
            if len(u) == 2 or (self.ports[c] == 0 and self._has_beta(c)):
                # Closed structure: emit its precomputed canonical segment.
                if len(u) == 2:
                    seg_order, seg_ids = list(u), [1, 1]
                else:
                    seg_order, seg_ids = self.atom(c)
                ids = ids + [counter + r for r in seg_ids]
                if beaten(ids):
                    return
                step(agenda, order + seg_order, ids, idmap, counter + max(seg_ids))
                return
            emit_vertex(c, agenda, order, ids, idmap, counter)

        def step(agenda: list, order: list[int], ids: list[int], idmap: dict[int, int], counter: int) -> None:
            nonlocal best_ids, best_order
            if not agenda:
                if best_ids is None or ids < best_ids:
                    best_ids = ids
                    best_order = order
                return
            head, rest = agenda[0], agenda[1:]
            kind = head[0]
            if kind == "v":
                emit_vertex(head[1], rest, order, ids, idmap, counter)
            elif kind == "u":
                emit_unit(head[1], rest, order, ids, idmap, counter)
            else:
                members = head[1]
                for i, u in enumerate(members):
                    remaining = members[:i] + members[i + 1 :]
                    tail = [("g", remaining)] if len(remaining) > 1 else [("u", r) for r in remaining]
                    emit_unit(u, tail + rest, order, ids, idmap, counter)

        step([("v", top)], [], [], {}, 0)
        assert best_ids is not None
        return best_order, best_ids

    def _has_beta(self, v: int) -> bool:
        return any(self.colours[x] is Colour.BETA for x in range(self.n) if self.is_ancestor(v, x))


def _canonical_parts(raw: _Raw) -> tuple[tuple[Colour, ...], tuple[int, ...], tuple[int, ...]]:
    raw.analyse()
    order, ids = raw.atom(raw.root)
    index = {v: i for i, v in enumerate(order)}
    colours = tuple(raw.colours[v] for v in order)
    parents = tuple(-1 if raw.parents[v] < 0 else index[raw.parents[v]] for v in order)
    pairs: list[int] = []
    it = iter(ids)
    for v in order:
        pairs.append(next(it) if raw.colours[v] is Colour.BETA else 0)
    return colours, parents, tuple(pairs)


# ---------------------------------------------------------------------------
# public types


@dataclass(frozen=True)
class TreeGradings:
    vertex_count: int
    alpha_count: int
    beta_count: int
    exotic_order: int
    edge_count: int
    fertility: tuple[int, ...]


@dataclass(frozen=True)
class MergedPoset:
    """Non-root vertices with each beta pair identified into one element.

    ``covers`` holds (lower, upper) element indices: a child lies strictly
    below its parent.
    """

    elements: tuple[tuple[int, ...], ...]
    covers: frozenset[tuple[int, int]]

    @property
    def size(self) -> int:
        return len(self.elements)

    def lower_covers(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(lo for lo, up in self.covers if up == i))

    def upper_covers(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(up for lo, up in self.covers if lo == i))


@dataclass(frozen=True, eq=False)
class ExoticTree:
    """Canonical exotic coloured tree (immutable; compare/hash by canonical key)."""

    colours: tuple[Colour, ...]
    parents: tuple[int, ...]
    pairs: tuple[int, ...]

    @classmethod
    def build(
        cls,
        colours: Sequence[Colour],
        parents: Sequence[int],
        pairs: Sequence[int],
    ) -> "ExoticTree":
        """Validate an arbitrarily numbered tree and return its canonical form."""

        raw = _Raw(colours, parents, pairs)
        c, p, q = _canonical_parts(raw)
        return cls(colours=c, parents=p, pairs=q)

    @classmethod
    def root_only(cls) -> "ExoticTree":
        return cls(colours=(Colour.ROOT,), parents=(-1,), pairs=(0,))

    # -- identity -----------------------------------------------------------

    @cached_property
    def text(self) -> str:
        def fmt(v: int) -> str:
            c = self.colours[v]
            head = f"b#{self.pairs[v]}" if c is Colour.BETA else c.value
            kids = self.children[v]
            if not kids:
                return head
            return head + "(" + ",".join(fmt(k) for k in kids) + ")"

        return fmt(0)

    @property
    def key(self) -> bytes:
        return self.text.encode("utf-8")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExoticTree):
            return NotImplemented
        return self.text == other.text

    def __hash__(self) -> int:
        return hash(self.text)

    def __lt__(self, other: "ExoticTree") -> bool:
        return (len(self.colours), self.text) < (len(other.colours), other.text)

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"ExoticTree({self.text!r})"

    # -- structure ----------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.colours)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.colours]
        for v, p in enumerate(self.parents):
            if p >= 0:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def partners(self) -> tuple[int, ...]:
        seen: dict[int, int] = {}
        out = [-1] * self.size
        for v, pid in enumerate(self.pairs):
            if pid:
                if pid in seen:
                    out[v] = seen[pid]
                    out[seen[pid]] = v
                else:
                    seen[pid] = v
        return tuple(out)

    def fertility(self, v: int) -> int:
        return len(self.children[v])

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]

    @property
    def pair_count(self) -> int:
        return max(self.pairs, default=0)

    @property
    def alpha_count(self) -> int:
        return sum(1 for c in self.colours if c is Colour.ALPHA)

    @property
    def beta_count(self) -> int:
        return sum(1 for c in self.colours if c is Colour.BETA)

    @property
    def exotic_order(self) -> int:
        return self.alpha_count + self.beta_count // 2 + 1

    @property
    def edge_count(self) -> int:
        return self.exotic_order - 1

    @property
    def is_beta_free(self) -> bool:
        return self.beta_count == 0

    def pair_members(self) -> list[tuple[int, int]]:
        """(v, w) with v < w for each pairing, in pairing-id order."""

        out: dict[int, list[int]] = {}
        for v, pid in enumerate(self.pairs):
            if pid:
                out.setdefault(pid, []).append(v)
        return [(vs[0], vs[1]) for _, vs in sorted(out.items())]

    # -- editing (always returns canonical trees) --------------------------

    def raw_parts(self) -> tuple[list[Colour], list[int], list[int]]:
        return list(self.colours), list(self.parents), list(self.pairs)

    def with_alpha_leaf(self, v: int) -> "ExoticTree":
        colours, parents, pairs = self.raw_parts()
        colours.append(Colour.ALPHA)
        parents.append(v)
        pairs.append(0)
        return ExoticTree.build(colours, parents, pairs)

    def with_beta_pair(self, v: int, w: int) -> "ExoticTree":
        colours, parents, pairs = self.raw_parts()
        pid = self.pair_count + 1
        colours.extend((Colour.BETA, Colour.BETA))
        parents.extend((v, w))
        pairs.extend((pid, pid))
        return ExoticTree.build(colours, parents, pairs)

    def without(self, removed: set[int], *, regraft_to_root: bool = False) -> "ExoticTree":
        """Drop `removed` vertices.

        Orphaned children are re-attached to the root when `regraft_to_root`
        is set; otherwise removed vertices must be leaves.
        """

        keep = [v for v in range(self.size) if v not in removed]
        index = {v: i for i, v in enumerate(keep)}
        colours: list[Colour] = []
        parents: list[int] = []
        pairs: list[int] = []
        for v in keep:
            p = self.parents[v]
            if p in removed:
                if not regraft_to_root:
                    raise TreeStructureError(message=f"cannot remove non-leaf vertex {p}")
                p = 0
            colours.append(self.colours[v])
            parents.append(-1 if p < 0 else index[p])
            pairs.append(self.pairs[v])
        return ExoticTree.build(colours, parents, pairs)


# ---------------------------------------------------------------------------
# grammar


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.colours: list[Colour] = []
        self.parents: list[int] = []
        self.pairs: list[int] = []

    def error(self, rule: str, message: str) -> TreeSyntaxError:
        return TreeSyntaxError(text=self.text, position=self.pos, rule=rule, message=message)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str, rule: str) -> None:
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise self.error(rule, f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def parse(self) -> None:
        if self.peek() != "o":
            raise self.error("tree", "a tree must start with the root 'o'")
        self.pos += 1
        self.add(Colour.ROOT, -1, 0)
        self.children(0)
        if self.peek():
            raise self.error("tree", f"unexpected trailing input {self.peek()!r}")

    def add(self, colour: Colour, parent: int, pid: int) -> int:
        self.colours.append(colour)
        self.parents.append(parent)
        self.pairs.append(pid)
        return len(self.colours) - 1

    def children(self, parent: int) -> None:
        if self.peek() != "(":
            return
        self.pos += 1
        self.node(parent)
        while self.peek() == ",":
            self.pos += 1
            self.node(parent)
        self.expect(")", "children")

    def node(self, parent: int) -> None:
        ch = self.peek()
        if ch == "a":
            self.pos += 1
            v = self.add(Colour.ALPHA, parent, 0)
        elif ch == "b":
            self.pos += 1
            self.expect("#", "node")
            v = self.add(Colour.BETA, parent, self.integer())
        else:
            found = ch or "end of input"
            raise self.error("node", f"expected 'a' or 'b#INT', found {found!r}")
        if self.peek() == "#":
            raise self.error("node", "pairing ids are only allowed on 'b' nodes")
        self.children(v)

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and "0" <= self.text[self.pos] <= "9":
            self.pos += 1
        if start == self.pos:
            raise self.error("INT", "expected a pairing id")
        value = int(self.text[start : self.pos])
        if value < 1:
            self.pos = start
            raise self.error("INT", "pairing ids must be >= 1")
        return value


def parse_tree(text: str) -> ExoticTree:
    """Parse the tree grammar into a canonical ExoticTree."""

    p = _Parser(text)
    p.parse()
    return ExoticTree.build(p.colours, p.parents, p.pairs)


def format_tree(t: ExoticTree) -> str:
    return t.text


def canonical_key(t: ExoticTree) -> bytes:
    return t.key


def gradings(t: ExoticTree) -> TreeGradings:
    return TreeGradings(
        vertex_count=t.size,
        alpha_count=t.alpha_count,
        beta_count=t.beta_count,
        exotic_order=t.exotic_order,
        edge_count=t.edge_count,
        fertility=tuple(t.fertility(v) for v in range(t.size)),
    )


def merged_poset(t: ExoticTree) -> MergedPoset:
    element_of: dict[int, int] = {}
    elements: list[tuple[int, ...]] = []
    for v in range(1, t.size):
        if v in element_of:
            continue
        w = t.partners[v]
        members = (v,) if w < 0 else tuple(sorted((v, w)))
        for m in members:
            element_of[m] = len(elements)
        elements.append(members)

    covers: set[tuple[int, int]] = set()
    for v in range(1, t.size):
        p = t.parents[v]
        if p > 0:
            covers.add((element_of[v], element_of[p]))

    g = nx.DiGraph()
    g.add_nodes_from(range(len(elements)))
    g.add_edges_from(covers)
    assert nx.is_directed_acyclic_graph(g), "merging paired vertices produced a cycle"
    return MergedPoset(elements=tuple(elements), covers=frozenset(covers))


# ---------------------------------------------------------------------------
# automorphisms


class _Symmetry:
    """Backtracking count of colour- and pairing-preserving automorphisms."""

    def __init__(self, t: ExoticTree):
        self.t = t
        self.raw = _Raw(t.colours, t.parents, t.pairs)
        self.raw.analyse()
        self._unit_aut: dict[int, int] = {}

    def closed_key(self, u: tuple[int, ...]) -> tuple:
        raw = self.raw
        if len(u) == 2:
            return ("cherry",)
        _, ids = raw.atom(u[0])
        return (raw.code[u[0]], tuple(ids))

    def unit_automorphisms(self, u: tuple[int, ...]) -> int:
        if len(u) == 2:
            return 2
        c = u[0]
        hit = self._unit_aut.get(c)
        if hit is None:
            hit = self.count([(c, c)], {c: c})
            self._unit_aut[c] = hit
        return hit

    def split(self, v: int) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
        closed: list[tuple[int, ...]] = []
        ported: list[tuple[int, ...]] = []
        for u in self.raw.units[v]:
            if len(u) == 2 or self.raw.ports[u[0]] == 0:
                closed.append(u)
            else:
                ported.append(u)
        return closed, ported

    def closed_factor(self, v: int, w: int) -> int:
        cv, _ = self.split(v)
        cw, _ = self.split(w)
        kv: dict[tuple, list[tuple[int, ...]]] = {}
        kw: dict[tuple, int] = {}
        for u in cv:
            kv.setdefault(self.closed_key(u), []).append(u)
        for u in cw:
            k = self.closed_key(u)
            kw[k] = kw.get(k, 0) + 1
        if {k: len(us) for k, us in kv.items()} != kw:
            return 0
        out = 1
        for us in kv.values():
            out *= factorial(len(us)) * self.unit_automorphisms(us[0]) ** len(us)
        return out

    def count(self, pending: list[tuple[int, int]], phi: dict[int, int]) -> int:
        if not pending:
            return 1
        (v, w), rest = pending[0], pending[1:]
        factor = self.closed_factor(v, w)
        if factor == 0:
            return 0
        raw = self.raw
        _, pv = self.split(v)
        _, pw = self.split(w)
        gv = [(k, [u[0] for u in g]) for k, g in itertools.groupby(pv, key=lambda u: raw.unit_key[u])]
        gw = [(k, [u[0] for u in g]) for k, g in itertools.groupby(pw, key=lambda u: raw.unit_key[u])]
        if [(k, len(m)) for k, m in gv] != [(k, len(m)) for k, m in gw]:
            return 0

        total = 0
        sources = [c for _, m in gv for c in m]
        for choice in itertools.product(*(itertools.permutations(m) for _, m in gw)):
            targets = [d for perm in choice for d in perm]
            ext = dict(phi)
            ok = True
            for c, d in zip(sources, targets):
                ext[c] = d
            for c, d in zip(sources, targets):
                pc = raw.partner[c]
                if pc >= 0 and pc in ext and ext[pc] != raw.partner[d]:
                    ok = False
                    break
            if ok:
                total += self.count(rest + list(zip(sources, targets)), ext)
        return total * factor


def automorphism_count(t: ExoticTree) -> int:
    """|Aut| of the tree as a colour- and pairing-preserving rooted tree."""

    return _Symmetry(t).count([(0, 0)], {0: 0})
