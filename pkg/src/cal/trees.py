"""Interaction trees: binary trees with a distribution at every inner node and a
hypothesis on every edge, plus exact validation of the shattering conditions.

A node is addressed by its path from the root, a tuple of 0/1 choices. A tree
of depth ``d`` has inner nodes for every path of length ``0..d-1``. Node ``v``
carries a pool index ``dist`` and the edge functions ``f0`` (edge to ``v+(0,)``)
and ``f1`` (edge to ``v+(1,)``). Relaxed trees only need ``f1`` on the last
layer; elsewhere it is ignored.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .core import Distribution, HypothesisClass, build_hypothesis_class, mask_of, to_fraction
from .errors import InputError, MalformedTreeError

Path = tuple[int, ...]


@dataclass(frozen=True)
class Plain:
    eps: Fraction

    def __post_init__(self):
        object.__setattr__(self, "eps", to_fraction(self.eps))


@dataclass(frozen=True)
class StrictEta:
    eps: Fraction
    eta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "eps", to_fraction(self.eps))
        object.__setattr__(self, "eta", to_fraction(self.eta))
        if not 0 < self.eta <= self.eps / 3:
            raise InputError("StrictEta needs 0 < eta <= eps/3")


@dataclass(frozen=True)
class Relaxed:
    eps: Fraction

    def __post_init__(self):
        object.__setattr__(self, "eps", to_fraction(self.eps))


@dataclass(frozen=True)
class Region:
    """Region-restricted trees; ``regions`` maps each inner-node path to a point set."""

    eps: Fraction
    regions: dict = field(hash=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "eps", to_fraction(self.eps))
        object.__setattr__(
            self,
            "regions",
            {tuple(k): (v if isinstance(v, int) else mask_of(v)) for k, v in self.regions.items()},
        )


TreeKind = Plain | StrictEta | Relaxed | Region


@dataclass(frozen=True)
class TreeNode:
    dist: int
    f0: int
    f1: int | None


@dataclass(frozen=True)
class InteractionTree:
    depth: int
    functions: HypothesisClass
    pool: tuple[Distribution, ...]
    nodes: dict = field(hash=False)

    def paths(self):
        for length in range(self.depth):
            yield from itertools.product((0, 1), repeat=length)

    def node(self, path: Path) -> TreeNode:
        return self.nodes[tuple(path)]

    def edge_function(self, path: Path, side: int) -> int | None:
        node = self.nodes[path]
        return node.f1 if side else node.f0

    def leaf_functions(self) -> list[int]:
        """Functions on the edges leaving the last layer of inner nodes."""
        if self.depth == 0:
            return []
        out = set()
        for path in itertools.product((0, 1), repeat=self.depth - 1):
            node = self.nodes[path]
            out.add(node.f0)
            if node.f1 is not None:
                out.add(node.f1)
        return sorted(out)

    def as_relaxed(self) -> InteractionTree:
        """Keep ``f0`` everywhere and ``f1`` on the last layer only."""
        nodes = {}
        for path, node in self.nodes.items():
            last = len(path) == self.depth - 1
            nodes[path] = TreeNode(node.dist, node.f0, node.f1 if last else None)
        return InteractionTree(self.depth, self.functions, self.pool, nodes)

    def to_json(self) -> dict:
        out_nodes = []
        for path in self.paths():
            node = self.nodes[path]
            out_nodes.append(
                {
                    "path": "".join(map(str, path)),
                    "mu": [str(v) for v in self.pool[node.dist].mass],
                    "f0": node.f0,
                    "f1": node.f1,
                }
            )
        return {
            "depth": self.depth,
            "functions": [list(r) for r in self.functions.labels],
            "nodes": out_nodes,
        }

    @classmethod
    def from_json(cls, obj: dict) -> InteractionTree:
        """Parse a certificate. Structural problems raise ``MalformedTreeError``."""
        try:
            depth = int(obj["depth"])
            rows = obj["functions"]
            raw_nodes = obj["nodes"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedTreeError(f"certificate is missing fields: {exc}") from exc
        try:
            F = build_hypothesis_class(rows)
        except InputError as exc:
            raise MalformedTreeError(str(exc)) from exc
        if F.m != len(rows):
            raise MalformedTreeError("certificate function matrix has duplicate rows")
        pool: list[Distribution] = []
        index: dict = {}
        nodes = {}
        for item in raw_nodes:
            try:
                path = tuple(int(c) for c in item["path"])
                mass = tuple(to_fraction(v) for v in item["mu"])
                f0 = item["f0"]
                f1 = item.get("f1")
            except (KeyError, TypeError, ValueError, InputError) as exc:
                raise MalformedTreeError(f"bad node entry: {exc}") from exc
            if path in nodes:
                raise MalformedTreeError(f"duplicate node {item['path']!r}")
            if mass not in index:
                try:
                    mu = Distribution(mass)
                except InputError as exc:
                    raise MalformedTreeError(f"node {item['path']!r}: {exc}") from exc
                index[mass] = len(pool)
                pool.append(mu)
            nodes[path] = TreeNode(index[mass], f0, f1)
        return cls(depth, F, tuple(pool), nodes)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


def _check_well_formed(tree: InteractionTree, kind) -> None:
    if not isinstance(tree.depth, int) or tree.depth < 0:
        raise MalformedTreeError("depth must be a nonnegative integer")
    F = tree.functions
    expected = set(tree.paths())
    got = set(tree.nodes)
    if expected != got:
        raise MalformedTreeError(
            f"node set does not form a full binary tree of depth {tree.depth} "
            f"(missing {len(expected - got)}, extra {len(got - expected)})"
        )
    for mu in tree.pool:
        if len(mu.mass) != F.n:
            raise MalformedTreeError("node distribution has the wrong number of points")
        if any(v < 0 for v in mu.mass) or sum(mu.mass) != 1:
            raise MalformedTreeError("node distribution is not a probability vector")
    relaxed = isinstance(kind, Relaxed)
    for path, node in tree.nodes.items():
        if not 0 <= node.dist < len(tree.pool):
            raise MalformedTreeError(f"node {path} points outside the distribution pool")
        needs_f1 = not relaxed or len(path) == tree.depth - 1
        for f in (node.f0, node.f1) if needs_f1 else (node.f0,):
            if not isinstance(f, int) or isinstance(f, bool) or not 0 <= f < F.m:
                raise MalformedTreeError(f"node {path} has an invalid function index {f!r}")
    if isinstance(kind, Region):
        for path in expected:
            if path not in kind.regions:
                raise MalformedTreeError(f"region missing for node {path}")


def validate_tree_certificate(tree: InteractionTree, kind) -> bool:
    """Exact check of every shattering condition for the given tree kind."""
    _check_well_formed(tree, kind)
    if isinstance(kind, Relaxed):
        return _validate_relaxed(tree, kind.eps)
    F = tree.functions
    eps = kind.eps
    close = kind.eta if isinstance(kind, StrictEta) else eps / 3
    everything = (1 << F.n) - 1
    regions = kind.regions if isinstance(kind, Region) else {}
    for path, node in tree.nodes.items():
        mu = tree.pool[node.dist]
        B = regions.get(path, everything)
        if mu.of(F.disagreement_mask(node.f0, node.f1) & B) < eps:
            return False
        for i in range(len(path)):
            w = path[:i]
            wn = tree.nodes[w]
            g = wn.f1 if path[i] else wn.f0
            mu_w = tree.pool[wn.dist]
            B_w = regions.get(w, everything)
            for f in (node.f0, node.f1):
                if mu_w.of(F.disagreement_mask(f, g) & B_w) > close:
                    return False
    return True


def descendant_functions(tree: InteractionTree, path: Path, side: int) -> set[int]:
    """Functions in the ``side`` subtree of a relaxed tree node, its own edge included."""
    d = tree.depth
    if len(path) == d - 1:
        return {tree.nodes[path].f1 if side else tree.nodes[path].f0}
    out = {tree.nodes[path].f0} if side == 0 else set()
    root = path + (side,)
    for length in range(d - len(root)):
        for tail in itertools.product((0, 1), repeat=length):
            w = root + tail
            out.add(tree.nodes[w].f0)
            if len(w) == d - 1:
                out.add(tree.nodes[w].f1)
    return out


def _validate_relaxed(tree: InteractionTree, eps: Fraction) -> bool:
    F = tree.functions
    for path, node in tree.nodes.items():
        mu = tree.pool[node.dist]
        for f in descendant_functions(tree, path, 1):
            if mu.of(F.disagreement_mask(node.f0, f)) < 2 * eps / 3:
                return False
        for f in descendant_functions(tree, path, 0):
            if mu.of(F.disagreement_mask(node.f0, f)) > eps / 3:
                return False
    return True
