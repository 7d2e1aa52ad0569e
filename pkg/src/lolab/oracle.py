"""Randomized verification campaigns against exact laws.

A campaign draws seeded grid configurations, computes each one's exact law,
and compares every relevant atom against the applicable closed-form bound.
Reports capture violations (there should never be any), exact-equality rows
(extremal witnesses worth keeping as regression fixtures), and counters,
and serialize deterministically: same generator in, same bytes out.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from ._parallel import parallel_map
from .bounds import (
    TheoremTag,
    erdos_kleitman_bound,
    nonuniform_bound,
    zero_odd_bound,
    zero_weights_extremal,
    zero_weights_sup,
)
from .engine import (
    ATOM_QUERY_CAP,
    FULL_LAW_CAP,
    CapExceeded,
    WeightConfig,
    atom_probability,
    full_distribution,
)
from .rational import Vec, is_zero, make_vec, norm_sq, rat_str, vec_strs

# Campaign checks that run per-config against the full law. The
# zero-weights supremum has its own sampling entry point because it
# quantifies over n rather than over configs at fixed n.
CAMPAIGN_CHECKS = (
    TheoremTag.ERDOS_KLEITMAN,
    TheoremTag.NON_UNIFORM,
    TheoremTag.ZERO_ODD,
)


def derived_seed(seed: int, index: int) -> int:
    """Deterministic child seed, arithmetic only, stable across versions."""
    return (seed * 1_000_003 + index) % (1 << 63)


@dataclass(frozen=True)
class ConfigGenerator:
    """Seeded stream of grid weight configurations.

    Each coordinate is drawn uniformly from {-D..D}/D with D the grid
    denominator; a draw is rejected and retried while its squared norm
    exceeds 1 or it is zero without allow_zero. Same fields, same configs.
    """

    n: int
    d: int
    seed: int
    grid_denominator: int = 16
    allow_zero: bool = False
    count: int = 100

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"summand count must be >= 1, got {self.n}")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.grid_denominator < 1:
            raise ValueError(
                f"grid denominator must be >= 1, got {self.grid_denominator}"
            )
        if self.count < 0:
            raise ValueError(f"config count must be >= 0, got {self.count}")

    def configs(self) -> list[WeightConfig]:
        rng = random.Random(self.seed)
        return [self._draw(rng) for _ in range(self.count)]

    def _draw(self, rng: random.Random) -> WeightConfig:
        grid = self.grid_denominator
        weights = []
        for _ in range(self.n):
            while True:
                w = tuple(
                    Fraction(rng.randint(-grid, grid), grid) for _ in range(self.d)
                )
                q = norm_sq(w)
                if q > 1:
                    continue
                if q == 0 and not self.allow_zero:
                    continue
                weights.append(w)
                break
        return WeightConfig(
            dim=self.d, weights=tuple(weights), allow_zero=self.allow_zero
        )

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "seed": self.seed,
            "grid_denominator": self.grid_denominator,
            "allow_zero": self.allow_zero,
            "count": self.count,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConfigGenerator":
        return cls(**obj)


@dataclass(frozen=True)
class CheckRow:
    """One exact comparison: P(sum = x) against the applicable bound."""

    config_index: int
    theorem: TheoremTag
    x: Vec
    k: int
    lhs: Fraction
    rhs: Fraction

    @property
    def equality(self) -> bool:
        return self.lhs == self.rhs

    @property
    def violation(self) -> bool:
        return self.lhs > self.rhs


@dataclass(frozen=True)
class ViolationRecord:
    """A bound exceeded, with everything needed to reproduce the check."""

    config: WeightConfig
    x: Vec
    lhs: Fraction
    rhs: Fraction
    theorem: TheoremTag

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "x": vec_strs(self.x),
            "lhs": rat_str(self.lhs),
            "rhs": rat_str(self.rhs),
            "theorem": self.theorem.value,
        }


@dataclass(frozen=True)
class EqualityRecord:
    """A bound attained exactly; kept as a regression fixture."""

    config_index: int
    theorem: TheoremTag
    x: Vec
    value: Fraction

    def to_json(self) -> dict:
        return {
            "config_index": self.config_index,
            "theorem": self.theorem.value,
            "x": vec_strs(self.x),
            "value": rat_str(self.value),
        }


def _require_nonzero_weights(cfg: WeightConfig, what: str) -> None:
    if any(is_zero(w) for w in cfg.weights):
        raise ValueError(f"{what} requires non-zero weights")


def _config_rows(
    cfg: WeightConfig, config_index: int, checks: Sequence[TheoremTag], cap: int
) -> list[CheckRow]:
    dist = full_distribution(cfg, cap=cap)
    rows: list[CheckRow] = []
    for check in checks:
        if check is TheoremTag.NON_UNIFORM:
            for x, p in dist.sorted_atoms():
                if is_zero(x):
                    continue
                report = nonuniform_bound(cfg.n, norm_sq(x))
                rows.append(
                    CheckRow(config_index, check, x, report.k, p, report.bound)
                )
        elif check is TheoremTag.ERDOS_KLEITMAN:
            x, p = dist.max_probability()
            rows.append(
                CheckRow(config_index, check, x, 0, p, erdos_kleitman_bound(cfg.n))
            )
        elif check is TheoremTag.ZERO_ODD:
            origin = (Fraction(0),) * cfg.dim
            rows.append(
                CheckRow(
                    config_index,
                    check,
                    origin,
                    0,
                    dist.probability(origin),
                    zero_odd_bound(cfg.n),
                )
            )
        else:
            raise ValueError(f"{check.value} is not a per-config campaign check")
    return rows


def _violations(cfg: WeightConfig, rows: Iterable[CheckRow]) -> list[ViolationRecord]:
    return [
        ViolationRecord(cfg, row.x, row.lhs, row.rhs, row.theorem)
        for row in rows
        if row.violation
    ]


def verify_uniform_bound(
    cfg: WeightConfig, *, cap: int = FULL_LAW_CAP
) -> list[ViolationRecord]:
    """Check every atom against the uniform central binomial bound."""
    _require_nonzero_weights(cfg, "the uniform bound")
    return _violations(cfg, _config_rows(cfg, 0, [TheoremTag.ERDOS_KLEITMAN], cap))


def verify_nonuniform_bound(
    cfg: WeightConfig, *, cap: int = FULL_LAW_CAP
) -> list[ViolationRecord]:
    """Check every non-zero atom against the distance-aware bound."""
    _require_nonzero_weights(cfg, "the distance-aware bound")
    return _violations(cfg, _config_rows(cfg, 0, [TheoremTag.NON_UNIFORM], cap))


def verify_zero_odd(
    cfg: WeightConfig, *, cap: int = FULL_LAW_CAP
) -> list[ViolationRecord]:
    """Check P(sum = 0) against the odd-summand zero bound."""
    _require_nonzero_weights(cfg, "the odd-summand zero bound")
    if cfg.n % 2 == 0:
        raise ValueError(f"odd-summand check needs odd n, got {cfg.n}")
    return _violations(cfg, _config_rows(cfg, 0, [TheoremTag.ZERO_ODD], cap))


def verify_zero_weights_sup(
    x, n_max: int, gen: ConfigGenerator, *, cap: int = ATOM_QUERY_CAP
) -> list[ViolationRecord]:
    """Sample zero-allowed configs of every size up to n_max against the sup.

    Also certifies that the aligned extremal configuration attains the
    supremum exactly; that is an engine identity, so a failure raises
    instead of being reported as data.
    """
    x = make_vec(x)
    if is_zero(x):
        raise ValueError("the zero-weights supremum needs a non-zero target")
    if not gen.allow_zero:
        raise ValueError("generator must allow zero weights for this check")
    if gen.d != len(x):
        raise ValueError(f"generator dim {gen.d} does not match target dim {len(x)}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if n_max > cap:
        raise CapExceeded("atom-query summand", cap, n_max)
    sup = zero_weights_sup(norm_sq(x))
    extremal = zero_weights_extremal(x)
    attained = atom_probability(extremal, x, cap=max(cap, extremal.n))
    if attained != sup:
        raise AssertionError(
            f"extremal attainment failed: {attained} != {sup} at {x}"
        )

    def check_size(n: int) -> list[ViolationRecord]:
        sub = replace(gen, n=n, seed=derived_seed(gen.seed, n))
        found = []
        for cfg in sub.configs():
            lhs = atom_probability(cfg, x, cap=cap)
            if lhs > sup:
                found.append(
                    ViolationRecord(cfg, x, lhs, sup, TheoremTag.ZERO_WEIGHTS_SUP)
                )
        return found

    results = parallel_map(check_size, list(range(1, n_max + 1)))
    return [record for sub in results for record in sub]


@dataclass
class CampaignReport:
    """Everything a campaign produced, serializable to stable bytes."""

    generator: ConfigGenerator
    checks: tuple[TheoremTag, ...]
    extra_configs: int
    configs_checked: int
    atoms_checked: int
    equalities: tuple[EqualityRecord, ...]
    violations: tuple[ViolationRecord, ...]

    def summary(self) -> str:
        checks = "+".join(tag.value for tag in self.checks)
        return (
            f"{checks}: {self.configs_checked} configs, "
            f"{self.atoms_checked} atoms checked, "
            f"{len(self.equalities)} equalities, "
            f"{len(self.violations)} violations"
        )

    def to_json(self) -> dict:
        return {
            "generator": self.generator.to_json(),
            "checks": [tag.value for tag in self.checks],
            "extra_configs": self.extra_configs,
            "configs_checked": self.configs_checked,
            "atoms_checked": self.atoms_checked,
            "equalities": [record.to_json() for record in self.equalities],
            "violations": [record.to_json() for record in self.violations],
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def run_campaign(
    gen: ConfigGenerator,
    checks: Iterable[TheoremTag],
    *,
    cap: int = FULL_LAW_CAP,
    extra_configs: Sequence[WeightConfig] = (),
    csv_path: Optional[str] = None,
) -> CampaignReport:
    """Run the per-config checks over a generator's configs.

    `extra_configs` are checked first (indices 0..len-1) so extremal
    witnesses can be pinned into a campaign. When `csv_path` is given,
    every comparison row lands there as (n, d, k, lhs, rhs, equality)
    for plotting; the report itself keeps only equalities and violations.
    """
    checks = tuple(checks)
    if not checks:
        raise ValueError("at least one check required")
    for check in checks:
        if check not in CAMPAIGN_CHECKS:
            raise ValueError(f"{check.value} is not a per-config campaign check")
    if TheoremTag.ZERO_ODD in checks and gen.n % 2 == 0:
        raise ValueError(f"odd-summand check needs odd n, generator has n = {gen.n}")
    configs = list(extra_configs) + gen.configs()
    for cfg in configs:
        _require_nonzero_weights(cfg, "a campaign")
        if TheoremTag.ZERO_ODD in checks and cfg.n % 2 == 0:
            raise ValueError("odd-summand check needs odd n in every config")

    def check_one(item: tuple[int, WeightConfig]) -> list[CheckRow]:
        index, cfg = item
        return _config_rows(cfg, index, checks, cap)

    all_rows = parallel_map(check_one, list(enumerate(configs)))

    atoms = 0
    equalities: list[EqualityRecord] = []
    violations: list[ViolationRecord] = []
    writer = None
    handle = None
    if csv_path is not None:
        handle = open(csv_path, "w", newline="")
        writer = csv.writer(handle)
        writer.writerow(["n", "d", "k", "lhs", "rhs", "equality"])
    try:
        for (index, cfg), rows in zip(enumerate(configs), all_rows):
            for row in rows:
                atoms += 1
                if writer is not None:
                    writer.writerow(
                        [
                            cfg.n,
                            cfg.dim,
                            row.k,
                            rat_str(row.lhs),
                            rat_str(row.rhs),
                            str(row.equality).lower(),
                        ]
                    )
                if row.equality:
                    equalities.append(
                        EqualityRecord(index, row.theorem, row.x, row.lhs)
                    )
                elif row.violation:
                    violations.append(
                        ViolationRecord(cfg, row.x, row.lhs, row.rhs, row.theorem)
                    )
    finally:
        if handle is not None:
            handle.close()
    return CampaignReport(
        generator=gen,
        checks=checks,
        extra_configs=len(extra_configs),
        configs_checked=len(configs),
        atoms_checked=atoms,
        equalities=tuple(equalities),
        violations=tuple(violations),
    )
