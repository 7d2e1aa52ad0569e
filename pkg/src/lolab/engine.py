"""Exact laws of weighted sums of random signs and of progression uniforms.

Two sum models share a convolution core:

* sign sums: S = sum_i eps_i v_i with eps_i independent uniform on {-1, +1}
  and rational weight vectors v_i;
* progression-uniform sums: S = sum_i U_i v_i with U_i independent uniform
  on the m symmetric support points {-m+1, -m+3, ..., m-1}.

Laws are finite exact objects (atom -> Fraction). Internally weights are
scaled by the least common denominator so convolution runs on integer
tuples; results are divided back out, so there is no rounding at any step.
Enumeration sizes are guarded by explicit caps that raise `CapExceeded`
rather than silently degrading.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm
from typing import Iterable, Sequence

from .rational import RationalLike, Vec, make_vec, norm_sq, rat_str, vec_strs

# Default enumeration limits. Full laws cost O(2^n) work in the worst case,
# single-atom queries via half-sum tables cost O(2^(n/2)), and the
# progression law is capped by its intermediate atom count.
FULL_LAW_CAP = 24
ATOM_QUERY_CAP = 40
AP_ATOM_CAP = 1 << 24


class CapExceeded(Exception):
    """A request went past one of the enumeration caps.

    Carries which cap bit so callers (and the CLI exit path) can name it.
    """

    def __init__(self, cap_name: str, limit: int, requested: int):
        super().__init__(
            f"{cap_name} cap is {limit}, request needs {requested}"
        )
        self.cap_name = cap_name
        self.limit = limit
        self.requested = requested


@dataclass(frozen=True)
class WeightConfig:
    """An ordered tuple of rational weight vectors for one sum.

    Invariants checked at construction: every weight has length `dim`;
    weights are non-zero unless `allow_zero`; and unless `l2_unit_ball`
    is disabled, every weight satisfies norm_sq(w) <= 1 exactly. The
    escape hatch exists for searches constrained in a non-Euclidean
    norm, whose ball is not contained in the Euclidean one; those
    callers validate weights in their own norm.
    """

    dim: int
    weights: tuple[Vec, ...]
    allow_zero: bool = False
    l2_unit_ball: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        weights = tuple(make_vec(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if not weights:
            raise ValueError("a config needs at least one weight")
        for w in weights:
            if len(w) != self.dim:
                raise ValueError(
                    f"weight {w} has length {len(w)}, expected dim {self.dim}"
                )
            q = norm_sq(w)
            if self.l2_unit_ball and q > 1:
                raise ValueError(f"weight {w} has squared norm {q} > 1")
            if not self.allow_zero and q == 0:
                raise ValueError("zero weight in a config with allow_zero=False")

    @property
    def n(self) -> int:
        return len(self.weights)

    @classmethod
    def from_scalars(
        cls, values: Iterable[RationalLike], **kwargs
    ) -> "WeightConfig":
        return cls(dim=1, weights=tuple((v,) for v in values), **kwargs)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "allow_zero": self.allow_zero,
            "l2_unit_ball": self.l2_unit_ball,
            "weights": [vec_strs(w) for w in self.weights],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "WeightConfig":
        return cls(
            dim=obj["dim"],
            weights=tuple(make_vec(w) for w in obj["weights"]),
            allow_zero=obj.get("allow_zero", False),
            l2_unit_ball=obj.get("l2_unit_ball", True),
        )


@dataclass(frozen=True)
class APUniformSpec:
    """Uniform law on the m symmetric progression points with gap 2."""

    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"support size must be >= 2, got {self.m}")

    def support(self) -> tuple[int, ...]:
        return tuple(range(-self.m + 1, self.m, 2))


@dataclass
class AtomDistribution:
    """A finite exact law: every atom maps to a positive Fraction."""

    atoms: dict[Vec, Fraction]
    n: int
    dim: int

    def probability(self, x) -> Fraction:
        return self.atoms.get(make_vec(x), Fraction(0))

    def sorted_atoms(self) -> list[tuple[Vec, Fraction]]:
        return sorted(self.atoms.items())

    def max_probability(self) -> tuple[Vec, Fraction]:
        """The most likely atom; ties go to the lexicographically least."""
        best_x, best_p = None, Fraction(-1)
        for x, p in self.sorted_atoms():
            if p > best_p:
                best_x, best_p = x, p
        return best_x, best_p

    def check(self) -> None:
        """Assert the law is a symmetric probability distribution."""
        total = sum(self.atoms.values(), Fraction(0))
        if total != 1:
            raise AssertionError(f"law sums to {total}, not 1")
        for x, p in self.atoms.items():
            if p <= 0:
                raise AssertionError(f"non-positive mass {p} at {x}")
            neg = tuple(-c for c in x)
            if self.atoms.get(neg) != p:
                raise AssertionError(f"law not symmetric at {x}")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dim": self.dim,
            "atoms": [
                {"x": vec_strs(x), "probability": rat_str(p)}
                for x, p in self.sorted_atoms()
            ],
        }


def _denominator_lcm(vectors: Sequence[Vec], extra: Vec = ()) -> int:
    scale = 1
    for v in vectors:
        for c in v:
            scale = lcm(scale, c.denominator)
    for c in extra:
        scale = lcm(scale, c.denominator)
    return scale


def _scaled(vectors: Sequence[Vec], scale: int) -> list[tuple[int, ...]]:
    return [tuple((c * scale).numerator for c in v) for v in vectors]


def _signed_sums(scaled: Sequence[tuple[int, ...]], dim: int) -> dict:
    """Counts of sum_i eps_i w_i over all sign vectors, on integer points."""
    acc = {(0,) * dim: 1}
    for w in scaled:
        nxt: dict = {}
        for pt, mult in acc.items():
            up = tuple(a + b for a, b in zip(pt, w))
            dn = tuple(a - b for a, b in zip(pt, w))
            nxt[up] = nxt.get(up, 0) + mult
            nxt[dn] = nxt.get(dn, 0) + mult
        acc = nxt
    return acc


def full_distribution(cfg: WeightConfig, *, cap: int = FULL_LAW_CAP) -> AtomDistribution:
    """Exact law of the sign sum over all 2^n sign vectors."""
    if cfg.n > cap:
        raise CapExceeded("full-law summand", cap, cfg.n)
    scale = _denominator_lcm(cfg.weights)
    counts = _signed_sums(_scaled(cfg.weights, scale), cfg.dim)
    denom = 2 ** cfg.n
    atoms = {
        tuple(Fraction(a, scale) for a in pt): Fraction(mult, denom)
        for pt, mult in counts.items()
    }
    return AtomDistribution(atoms=atoms, n=cfg.n, dim=cfg.dim)


def atom_probability(cfg: WeightConfig, x, *, cap: int = ATOM_QUERY_CAP) -> Fraction:
    """P(sign sum = x) by meeting half-sum tables in the middle.

    Splits the weights into the first ceil(n/2) and the rest, enumerates
    each half's signed sums once, and joins on the complement, so a single
    atom query costs O(2^(n/2)) instead of O(2^n).
    """
    x = make_vec(x)
    if len(x) != cfg.dim:
        raise ValueError(f"target has length {len(x)}, expected dim {cfg.dim}")
    if cfg.n > cap:
        raise CapExceeded("atom-query summand", cap, cfg.n)
    scale = _denominator_lcm(cfg.weights, extra=x)
    scaled = _scaled(cfg.weights, scale)
    target = tuple((c * scale).numerator for c in x)
    cut = (cfg.n + 1) // 2
    front = _signed_sums(scaled[:cut], cfg.dim)
    back = _signed_sums(scaled[cut:], cfg.dim)
    if len(back) < len(front):
        front, back = back, front
    hits = 0
    for pt, mult in front.items():
        rest = tuple(t - a for t, a in zip(target, pt))
        hits += mult * back.get(rest, 0)
    return Fraction(hits, 2 ** cfg.n)


def rademacher_atom(n: int, j: int) -> Fraction:
    """P(R_n = j) for the plain sum R_n of n independent signs.

    Zero off the support or at the wrong parity. n = 0 is allowed and
    gives the point mass at 0, which keeps downstream bounds valid at
    their smallest cases.
    """
    if n < 0:
        raise ValueError(f"summand count must be >= 0, got {n}")
    if abs(j) > n or (n + j) % 2 != 0:
        return Fraction(0)
    return Fraction(comb(n, (n + j) // 2), 2 ** n)


def ap_uniform_sum_distribution(
    spec: APUniformSpec, cfg: WeightConfig, *, atom_cap: int = AP_ATOM_CAP
) -> AtomDistribution:
    """Exact law of sum_i U_i v_i with U_i uniform on spec.support().

    Convolves atom-by-atom in a hash map, so the cost tracks the number of
    distinct intermediate atoms rather than m^n; that count is capped.
    """
    support = spec.support()
    scale = _denominator_lcm(cfg.weights)
    scaled = _scaled(cfg.weights, scale)
    acc = {(0,) * cfg.dim: 1}
    for w in scaled:
        nxt: dict = {}
        for pt, mult in acc.items():
            for u in support:
                key = tuple(a + u * b for a, b in zip(pt, w))
                nxt[key] = nxt.get(key, 0) + mult
        if len(nxt) > atom_cap:
            raise CapExceeded("progression-law atom", atom_cap, len(nxt))
        acc = nxt
    denom = spec.m ** cfg.n
    atoms = {
        tuple(Fraction(a, scale) for a in pt): Fraction(mult, denom)
        for pt, mult in acc.items()
    }
    return AtomDistribution(atoms=atoms, n=cfg.n, dim=cfg.dim)
