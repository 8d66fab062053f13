"""Exact-overlap blocks, overlap families and the closed forms built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from itertools import product
from typing import Sequence

from .errors import ContractError, ResourceBudgetError, UnsupportedStructureError
from .ifs import (
    AffineContraction,
    AffineSystem,
    Interval,
    compose,
    contains,
    cylinder_interval,
    image,
)
from .measures import BernoulliWeights
from .overlap import DEFAULT_NODE_BUDGET

DEFAULT_GROUP_THRESHOLD = 0.10


@dataclass(frozen=True)
class BlockStructure:
    """Partition of the alphabet into groups of identical maps."""

    blocks: tuple[tuple[int, ...], ...]
    osc_between_blocks: bool
    m: int

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def block_of(self, symbol: int) -> tuple[int, ...]:
        for b in self.blocks:
            if symbol in b:
                return b
        raise ContractError(f"symbol {symbol} not in alphabet")


def _require_exact(system):
    if not system.exact:
        raise ContractError("structure detection needs an exact-mode system")


def _group_identical(param, maps: Sequence[AffineContraction]) -> list[list[int]]:
    groups: dict = {}
    for i, f in enumerate(maps):
        groups.setdefault((f.ratio, f.offset), []).append(i)
    return list(groups.values())


def _interiors_disjoint(param, a: Interval, b: Interval) -> bool:
    lo = a.lo if param.compare(a.lo, b.lo) >= 0 else b.lo
    hi = a.hi if param.compare(a.hi, b.hi) <= 0 else b.hi
    return param.compare(lo, hi) >= 0


def detect_blocks(system: AffineSystem) -> BlockStructure:
    """Group identical maps and test the block representatives for overlaps.

    Blocks are listed in order of first appearance.  Representatives count
    as non-overlapping when their hull images have disjoint interiors.
    """
    _require_exact(system)
    param = system.param
    groups = _group_identical(param, system.maps)
    imgs = [image(param, system.maps[g[0]], system.hull) for g in groups]
    osc = all(
        _interiors_disjoint(param, imgs[i], imgs[j])
        for i in range(len(imgs))
        for j in range(i + 1, len(imgs))
    )
    return BlockStructure(tuple(tuple(g) for g in groups), osc, system.m)


def block_overlap_number(bs: BlockStructure) -> float:
    """``exp(sum_B |B| log |B| / m)`` for a block system without overlaps between blocks."""
    if not bs.osc_between_blocks:
        raise UnsupportedStructureError(
            "blocks overlap each other; use the estimator or the family bounds"
        )
    return math.exp(math.fsum(s * math.log(s) for s in bs.sizes) / bs.m)


def level_system(system: AffineSystem, p: int, budget: int = DEFAULT_NODE_BUDGET) -> AffineSystem:
    """The ``p``-iterated system whose maps are all depth-``p`` compositions."""
    if system.m**p > budget:
        raise ResourceBudgetError(system.m**p, budget, f"level-{p} system")
    return AffineSystem([compose(system, w) for w in system.words(p)], system.param)


def level_block_overlap_number(system: AffineSystem, p: int) -> float:
    """Overlap number from the blocks of the ``p``-iterated system.

    ``o(S)`` equals ``o(S^p) ** (1/p)`` since depth-``np`` words of ``S`` are
    depth-``n`` words of ``S^p``.
    """
    bs = detect_blocks(level_system(system, p))
    return block_overlap_number(bs) ** (1.0 / p)


@dataclass(frozen=True)
class FiberWeights:
    weights: tuple[float, ...]
    folding_entropy: float

    @property
    def overlap_number(self) -> float:
        return math.exp(self.folding_entropy)


def fiber_weights_block(bs: BlockStructure, weights: BernoulliWeights, symbol: int) -> FiberWeights:
    """Conditional weights on the preimages of a point covered via ``symbol``.

    Within a block of identical maps the ratio limits are all 1, so the
    conditional weight of preimage ``i`` is ``p_i / sum_{j in block} p_j``.
    The folding entropy is the block-mass-weighted entropy of these vectors.
    """
    if not bs.osc_between_blocks:
        raise UnsupportedStructureError("fiber weights need non-overlapping blocks")
    if weights.m != bs.m:
        raise ContractError("weights and block structure have different alphabet sizes")
    block = bs.block_of(symbol)
    mass = math.fsum(weights.p[i] for i in block)
    fiber = tuple(weights.p[i] / mass if i in block else 0.0 for i in range(bs.m))
    terms = []
    for b in bs.blocks:
        bm = math.fsum(weights.p[i] for i in b)
        h = -math.fsum((weights.p[i] / bm) * math.log(weights.p[i] / bm) for i in b)
        terms.append(bm * h)
    return FiberWeights(fiber, math.fsum(terms))


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapFamily:
    """Depth-``p`` words whose cylinders share a common sub-cylinder.

    ``witnesses[i]`` is a length-``k`` extension of ``members[i]`` whose
    cylinder lies inside the intersection of all member cylinders.
    """

    p: int
    members: tuple[tuple[int, ...], ...]
    witnesses: tuple[tuple[int, ...], ...]
    k: int
    intersection: Interval | None = None

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def exact(self) -> bool:
        return self.k == 0

    def contribution(self, m: int) -> float:
        N = self.size
        return N * math.log(N) / m ** (self.p + self.k)


def _maximal_cliques(param, cyls: list[Interval]) -> list[list[int]]:
    """Maximal sets of closed intervals sharing a common point (sweep line)."""
    events = [(c.lo, 0, i) for i, c in enumerate(cyls)] + [(c.hi, 1, i) for i, c in enumerate(cyls)]

    def cmp(a, b):
        return param.compare(a[0], b[0]) or (a[1] - b[1]) or (a[2] - b[2])

    events.sort(key=cmp_to_key(cmp))
    active: list[int] = []
    out = []
    last_was_start = False
    for _, kind, i in events:
        if kind == 0:
            active.append(i)
            last_was_start = True
        else:
            if last_was_start:
                out.append(sorted(active))
            active.remove(i)
            last_was_start = False
    return out


def _common(param, cyls):
    lo = cyls[0].lo
    hi = cyls[0].hi
    for c in cyls[1:]:
        if param.compare(c.lo, lo) > 0:
            lo = c.lo
        if param.compare(c.hi, hi) < 0:
            hi = c.hi
    return Interval(lo, hi)


def _substantial(param, cyls, threshold) -> bool:
    common = _common(param, cyls)
    shortest = min((c.length() for c in cyls), key=cmp_to_key(param.compare))
    need = shortest * param.const(Fraction(str(threshold)))
    length = common.length()
    return param.compare(length, need) >= 0 and param.compare(length, param.zero()) > 0


def _prune_to_substantial(param, members, cyls, threshold):
    members = list(members)
    while len(members) >= 2 and not _substantial(param, [cyls[i] for i in members], threshold):
        best = None
        for drop in members:
            rest = [i for i in members if i != drop]
            length = _common(param, [cyls[i] for i in rest]).length()
            if best is None or param.compare(length, best[0]) > 0:
                best = (length, drop)
        members.remove(best[1])
    return members


def _witness(system, word, target: Interval, k_max: int):
    param = system.param
    for k in range(1, k_max + 1):
        for ext in product(range(system.m), repeat=k):
            if contains(param, target, cylinder_interval(system, word + ext)):
                return ext
    return None


def search_overlap_families(
    system: AffineSystem,
    p: int,
    k_max: int = 2,
    threshold: float = DEFAULT_GROUP_THRESHOLD,
    budget: int = DEFAULT_NODE_BUDGET,
) -> list[OverlapFamily]:
    """Exact families (identical depth-``p`` maps, ``k = 0``) followed by
    partial families found by extension search up to ``k_max``."""
    _require_exact(system)
    if p < 1 or k_max < 0:
        raise ContractError("need p >= 1 and k_max >= 0")
    m = system.m
    if m**p * max(1, m**k_max) > budget:
        raise ResourceBudgetError(m**p * m**k_max, budget, "overlap family search")
    param = system.param
    words = list(system.words(p))
    maps = [compose(system, w) for w in words]
    families = []
    for g in _group_identical(param, maps):
        if len(g) >= 2:
            members = tuple(words[i] for i in g)
            cyl = image(param, maps[g[0]], system.hull)
            families.append(OverlapFamily(p, members, tuple(() for _ in g), 0, cyl))

    # partial families: one representative per distinct map
    reps = [g[0] for g in _group_identical(param, maps)]
    cyls = [image(param, maps[i], system.hull) for i in reps]
    seen = set()
    for clique in _maximal_cliques(param, cyls):
        chosen = _prune_to_substantial(param, clique, cyls, threshold)
        # every word whose map is a chosen representative joins the family
        while len(chosen) >= 2:
            common = _common(param, [cyls[i] for i in chosen])
            member_words = [words[reps[i]] for i in chosen]
            exts = [_witness(system, w, common, k_max) for w in member_words]
            failed = [i for i, e in zip(chosen, exts) if e is None]
            if failed:
                chosen = [i for i in chosen if i not in failed]
                continue
            key = tuple(chosen)
            if key in seen:
                break
            seen.add(key)
            k = max(len(e) for e in exts)
            full_members, full_wits = [], []
            rep_set = set(reps[i] for i in chosen)
            for g in _group_identical(param, maps):
                if g[0] in rep_set:
                    ext = exts[[reps[i] for i in chosen].index(g[0])]
                    ext = ext + (0,) * (k - len(ext))
                    for j in g:
                        full_members.append(words[j])
                        full_wits.append(ext)
            order = sorted(range(len(full_members)), key=lambda t: full_members[t])
            families.append(
                OverlapFamily(
                    p,
                    tuple(full_members[t] for t in order),
                    tuple(full_wits[t] for t in order),
                    k,
                    common,
                )
            )
            break
    return families


def verify_family(system: AffineSystem, fam: OverlapFamily) -> bool:
    """Check every witness cylinder lies in the intersection of all member cylinders."""
    param = system.param
    common = _common(param, [cylinder_interval(system, w) for w in fam.members])
    return all(
        contains(param, common, cylinder_interval(system, w + e))
        for w, e in zip(fam.members, fam.witnesses)
    )


def select_disjoint_families(families: Sequence[OverlapFamily], m: int) -> list[OverlapFamily]:
    """Greedy choice of word-disjoint families, largest contribution first."""
    ranked = sorted(families, key=lambda f: (-f.contribution(m), f.k, f.members))
    used: set = set()
    chosen = []
    for f in ranked:
        if f.size < 2 or used.intersection(f.members):
            continue
        chosen.append(f)
        used.update(f.members)
    return chosen


def _family_exponent(families, m, p):
    if not families:
        return 0.0, p or 1
    ps = {f.p for f in families}
    if p is not None and ps != {p}:
        raise ContractError("all families must have tuple length p")
    if len(ps) > 1:
        raise ContractError("families of different tuple lengths cannot be combined")
    chosen = select_disjoint_families(families, m)
    return math.fsum(f.contribution(m) for f in chosen), ps.pop()


def level_family_bound(families: Sequence[OverlapFamily], m: int, p: int | None = None) -> float:
    """Lower bound for ``o(S^p)``: ``exp(sum_j N_j log N_j / m^(p + k_j))``."""
    total, _ = _family_exponent(families, m, p)
    return math.exp(total)


def family_lower_bounds(families: Sequence[OverlapFamily], m: int, p: int | None = None) -> float:
    """Lower bound for ``o(S)`` from word-disjoint families at level ``p``.

    The families bound the overlap number of the ``p``-iterated system, and
    ``o(S) = o(S^p) ** (1/p)``, so the exponent is divided by ``p``.
    """
    total, p = _family_exponent(families, m, p)
    return math.exp(total / p)
