"""Subset families behind scalar sign-sum atoms, and their lattice structure.

For positive scalar weights w_1..w_n and a target x, the family collects
every index set A whose weights minus the complement's weights equal x.
Atom probabilities are exactly family size over 2^n, and for targets x > 0
with weights at most 1 the family is an antichain whose pairwise
intersections have at least ceil(x) elements, which is what makes the
counting bound on its size bite.

Members are bitmasks (bit i set means index i+1 is in the set); the JSON
form spells each member as a sorted 1-based element list.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Sequence

from .bounds import milner_bound
from .engine import FULL_LAW_CAP, CapExceeded
from .rational import RationalLike, rat

FAMILY_CAP = FULL_LAW_CAP


class MilnerHypothesisError(ValueError):
    """The family fails a hypothesis of the intersecting-antichain bound.

    Distinct from a bound violation: a hypothesis failure means the bound
    does not apply, not that it is broken.
    """


@dataclass(frozen=True)
class SubsetFamily:
    """A set family over ground set {1..n}, stored as sorted bitmasks."""

    n: int
    members: tuple[int, ...]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"ground set size must be >= 0, got {self.n}")
        members = tuple(sorted(set(self.members)))
        object.__setattr__(self, "members", members)
        for mask in members:
            if mask < 0 or mask >= (1 << self.n):
                raise ValueError(f"mask {mask} outside ground set of size {self.n}")

    def __len__(self) -> int:
        return len(self.members)

    def elements(self, mask: int) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.n) if mask >> i & 1)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "members": [list(self.elements(mask)) for mask in self.members],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SubsetFamily":
        masks = []
        for elems in obj["members"]:
            mask = 0
            for e in elems:
                if e < 1 or e > obj["n"]:
                    raise ValueError(f"element {e} outside ground set")
                mask |= 1 << (e - 1)
            masks.append(mask)
        return cls(n=obj["n"], members=tuple(masks))


def build_family(
    weights: Sequence[RationalLike], x: RationalLike, *, cap: int = FAMILY_CAP
) -> SubsetFamily:
    """All index sets whose weight sum minus the complement's equals x.

    Weights must be strictly positive rationals. The defining condition
    is equivalent to 2 * sum(A) = x + total, checked exactly on integers
    after clearing denominators; a parity mismatch there means the family
    is empty.
    """
    ws = [rat(w) for w in weights]
    if not ws:
        raise ValueError("at least one weight required")
    for w in ws:
        if w <= 0:
            raise ValueError(f"weights must be strictly positive, got {w}")
    n = len(ws)
    if n > cap:
        raise CapExceeded("family ground-set", cap, n)
    target = rat(x)
    scale = lcm(*[w.denominator for w in ws], target.denominator)
    iw = [(w * scale).numerator for w in ws]
    need = (target * scale).numerator + sum(iw)
    # sums[mask] enumerates subset sums with bit i of mask selecting iw[i]
    sums = [0]
    for w in iw:
        sums += [s + w for s in sums]
    if need % 2 != 0:
        return SubsetFamily(n=n, members=())
    half = need // 2
    return SubsetFamily(
        n=n, members=tuple(mask for mask, s in enumerate(sums) if s == half)
    )


def is_antichain(family: SubsetFamily) -> bool:
    """True when no member strictly contains another."""
    by_size: dict[int, list[int]] = {}
    for mask in family.members:
        by_size.setdefault(mask.bit_count(), []).append(mask)
    sizes = sorted(by_size)
    for i, small in enumerate(sizes):
        for big in sizes[i + 1 :]:
            for a in by_size[small]:
                for b in by_size[big]:
                    if a & b == a:
                        return False
    return True


def is_k_intersecting(family: SubsetFamily, k: int) -> bool:
    """True when every pair of members, (A, A) included, shares >= k elements.

    Including the diagonal pair forces every member to have at least k
    elements, matching the hypothesis under which the size bound holds.
    """
    if k < 0:
        raise ValueError(f"intersection level must be >= 0, got {k}")
    if k == 0:
        return True
    members = family.members
    if any(mask.bit_count() < k for mask in members):
        return False
    for i, a in enumerate(members):
        for b in members[i + 1 :]:
            if (a & b).bit_count() < k:
                return False
    return True


def verify_milner(family: SubsetFamily, k: int) -> bool:
    """Check the k-intersecting antichain size bound on a family.

    Raises MilnerHypothesisError when the family is not an antichain or
    not k-intersecting, so a hypothesis failure can never be confused
    with a violation of the bound itself. Returns whether the size bound
    holds (it always should; False would be a major find).
    """
    if not is_antichain(family):
        raise MilnerHypothesisError("family is not an antichain")
    if not is_k_intersecting(family, k):
        raise MilnerHypothesisError(f"family is not {k}-intersecting")
    if not family.members:
        return True
    return len(family) <= milner_bound(family.n, k)
