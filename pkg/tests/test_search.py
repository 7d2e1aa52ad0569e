"""Counterexample search: norms, margins, certification, annealing."""

from __future__ import annotations

import json
from fractions import Fraction
from random import Random

import pytest

from lolab import (
    AnnealSettings,
    ConfigGenerator,
    CounterexampleCertificate,
    NormSpec,
    Refutation,
    SearchProblem,
    WeightConfig,
    anneal,
    ap_two_point_margins,
    append_ledger,
    certify,
    margin_rows,
    sign_sum_margins,
    violation_margin,
)

F = Fraction


def l2_problem(**kwargs) -> SearchProblem:
    base = dict(conjecture=2, n=4, d=1, budget=0, seed=0)
    base.update(kwargs)
    return SearchProblem(**base)


class TestNormSpec:
    def test_labels(self):
        assert NormSpec("L2").label() == "L2"
        spec = NormSpec("WeightedDiagonalL2", diag=(F(1, 2), F(2)))
        assert spec.label() == "WeightedDiagonalL2[1/2,2/1]"

    def test_ceil_values(self):
        v = (F(1), F(1))
        assert NormSpec("L1").ceil_value(v) == 2
        assert NormSpec("L2").ceil_value(v) == 2
        assert NormSpec("Linf").ceil_value(v) == 1
        assert NormSpec("WeightedDiagonalL2", diag=(F(4), F(4))).ceil_value(v) == 3

    def test_exact_boundary(self):
        # Squared comparisons must not round 3/5,4/5 away from norm 1.
        v = (F(3, 5), F(4, 5))
        assert NormSpec("L2").ceil_value(v) == 1
        assert NormSpec("L2").leq_one(v)
        assert not NormSpec("L2").leq_one((F(3, 5), F(4, 5), F(1, 1000)))

    def test_unit_balls(self):
        v = (F(1), F(1))
        assert NormSpec("Linf").leq_one(v)
        assert not NormSpec("L2").leq_one(v)
        assert not NormSpec("L1").leq_one(v)

    def test_validation(self):
        with pytest.raises(ValueError):
            NormSpec("L3")
        with pytest.raises(ValueError):
            NormSpec("L2", diag=(F(1),))
        with pytest.raises(ValueError):
            NormSpec("WeightedDiagonalL2")
        with pytest.raises(ValueError):
            NormSpec("WeightedDiagonalL2", diag=(F(0),))

    def test_json_round_trip(self):
        for spec in (
            NormSpec("L1"),
            NormSpec("Linf"),
            NormSpec("WeightedDiagonalL2", diag=(F(1, 3), F(5))),
        ):
            blob = json.loads(json.dumps(spec.to_json()))
            assert NormSpec.from_json(blob) == spec

    def test_axioms_on_seeded_pairs(self):
        # Triangle inequality and absolute homogeneity, checked exactly.
        rng = Random(260817)
        specs = [
            NormSpec("L1"),
            NormSpec("L2"),
            NormSpec("Linf"),
            NormSpec("WeightedDiagonalL2", diag=(F(1, 2), F(3))),
        ]
        for _ in range(250):
            u = tuple(F(rng.randint(-24, 24), 8) for _ in range(2))
            v = tuple(F(rng.randint(-24, 24), 8) for _ in range(2))
            c = F(rng.randint(-12, 12), 4)
            for spec in specs:
                assert spec.triangle_holds(u, v)
                assert spec.scaling_holds(u, c)


class TestSearchProblem:
    def test_two_point_support_is_rejected(self):
        with pytest.raises(ValueError, match="m >= 3"):
            SearchProblem(conjecture=1, n=4, d=1, budget=10, seed=0, m=2)

    def test_progression_cell_fixes_the_norm(self):
        with pytest.raises(ValueError):
            SearchProblem(
                conjecture=1, n=4, d=1, budget=10, seed=0, m=3,
                norm=NormSpec("L1"),
            )

    def test_norm_cell_takes_no_m(self):
        with pytest.raises(ValueError):
            SearchProblem(conjecture=2, n=4, d=1, budget=10, seed=0, m=3)

    def test_default_norms(self):
        problem = l2_problem()
        assert problem.target_norm() == NormSpec("L2")
        assert problem.weight_norm() == NormSpec("L2")

    def test_constraint_norm_is_independent(self):
        problem = l2_problem(constraint_norm=NormSpec("Linf"))
        assert problem.target_norm() == NormSpec("L2")
        assert problem.weight_norm() == NormSpec("Linf")
        cell = problem.cell()
        assert cell["norm"] == "L2"
        assert cell["constraint_norm"] == "Linf"

    def test_diagonal_norm_pins_the_dimension(self):
        diag = NormSpec("WeightedDiagonalL2", diag=(F(1, 2), F(2)))
        with pytest.raises(ValueError, match="dimension is d = 3"):
            l2_problem(d=3, norm=diag)
        problem = l2_problem(d=2, norm=diag)
        assert problem.dimensions() == (2,)
        assert l2_problem(d=3).dimensions() == (1, 2, 3)

    def test_json_round_trip(self):
        problems = [
            l2_problem(n=6, d=2, budget=100, seed=5, norm=NormSpec("L1")),
            SearchProblem(conjecture=1, n=3, d=1, budget=7, seed=2, m=4),
        ]
        for problem in problems:
            blob = json.loads(json.dumps(problem.to_json()))
            assert SearchProblem.from_json(blob) == problem


class TestMargins:
    def test_unit_triple_touches_the_bound(self):
        cfg = WeightConfig.from_scalars(["1", "1", "1"])
        x, margin = violation_margin(l2_problem(n=3), cfg)
        assert (x, margin) == ((F(1),), F(0))

    def test_box_norm_diagonal(self):
        problem = l2_problem(
            n=1, d=2, norm=NormSpec("Linf"), constraint_norm=NormSpec("Linf")
        )
        cfg = WeightConfig(dim=2, weights=((F(1), F(1)),), l2_unit_ball=False)
        x, margin = violation_margin(problem, cfg)
        assert x == (F(1), F(1))
        assert margin == 0

    def test_zero_bound_rows_are_excluded(self):
        problem = SearchProblem(conjecture=1, n=1, d=1, budget=0, seed=0, m=3)
        cfg = WeightConfig.from_scalars(["1/2"])
        rows = margin_rows(problem, cfg)
        assert rows and all(row.rhs_zero for row in rows)
        assert violation_margin(problem, cfg) == (None, None)

    def test_rows_never_exceed_bound_in_clean_cell(self):
        problem = l2_problem(n=5)
        for cfg in ConfigGenerator(n=5, d=1, seed=31, count=25).configs():
            for row in margin_rows(problem, cfg):
                if not row.rhs_zero:
                    assert row.margin <= 0

    def test_ball_constraint_enforced(self):
        problem = l2_problem(n=1, d=2)
        cfg = WeightConfig(dim=2, weights=((F(1), F(1)),), l2_unit_ball=False)
        with pytest.raises(ValueError):
            margin_rows(problem, cfg)


class TestTwoPointReduction:
    def test_known_pair(self):
        cfg = WeightConfig.from_scalars(["1/4", "1/4"])
        assert ap_two_point_margins(cfg) == sign_sum_margins(cfg)

    def test_random_configs(self):
        for cfg in ConfigGenerator(n=4, d=2, seed=41, count=25).configs():
            assert ap_two_point_margins(cfg) == sign_sum_margins(cfg)


class TestCertify:
    def test_mixed_norm_certificate(self):
        problem = l2_problem(n=3, d=2, constraint_norm=NormSpec("Linf"))
        cfg = WeightConfig(
            dim=2, weights=((F(1), F(1)),) * 3, l2_unit_ball=False
        )
        outcome = certify(problem, cfg, (F(1), F(1)))
        assert isinstance(outcome, CounterexampleCertificate)
        assert outcome.lhs == F(3, 8)
        assert outcome.rhs == F(1, 8)
        assert outcome.margin == F(1, 4)

    def test_certificate_json_round_trip(self):
        problem = l2_problem(n=3, d=2, constraint_norm=NormSpec("Linf"))
        cfg = WeightConfig(
            dim=2, weights=((F(1), F(1)),) * 3, l2_unit_ball=False
        )
        cert = certify(problem, cfg, (F(1), F(1)))
        blob = json.loads(json.dumps(cert.to_json()))
        assert blob["certificate"] is True
        assert CounterexampleCertificate.from_json(blob) == cert

    def test_touching_the_bound_refutes(self):
        cfg = WeightConfig.from_scalars(["1", "1", "1"])
        outcome = certify(l2_problem(n=3), cfg, (F(1),), float_score=0.25)
        assert isinstance(outcome, Refutation)
        assert outcome.margin == 0
        assert outcome.float_score == 0.25
        assert not outcome.rhs_zero

    def test_zero_bound_refutes_without_certifying(self):
        # Odd m puts the unit progression sum on even integers, so the
        # stated bound at odd k is 0; a positive lhs there is flagged,
        # never certified.
        problem = SearchProblem(conjecture=1, n=1, d=1, budget=0, seed=0, m=3)
        cfg = WeightConfig.from_scalars(["1/2"])
        outcome = certify(problem, cfg, (F(1),))
        assert isinstance(outcome, Refutation)
        assert outcome.rhs_zero
        assert outcome.lhs == F(1, 3)
        assert outcome.rhs == 0

    def test_progression_cell(self):
        problem = SearchProblem(conjecture=1, n=2, d=1, budget=0, seed=0, m=3)
        cfg = WeightConfig.from_scalars(["1", "1"])
        outcome = certify(problem, cfg, (F(2),))
        assert isinstance(outcome, Refutation)
        assert outcome.lhs == F(2, 9)
        assert outcome.rhs == F(2, 9)


class TestAnnealSettings:
    def test_defaults_are_valid(self):
        assert AnnealSettings().chains == 4

    def test_rejects_unknown_keys(self):
        with pytest.raises(ValueError, match="unknown anneal settings"):
            AnnealSettings.from_json({"chains": 2, "temperature": 1.0})

    def test_from_file(self, tmp_path):
        path = tmp_path / "settings.json"
        path.write_text(json.dumps({"chains": 2, "cooling_iters": 50}))
        settings = AnnealSettings.from_file(str(path))
        assert settings.chains == 2
        assert settings.cooling_iters == 50

    def test_validation(self):
        with pytest.raises(ValueError):
            AnnealSettings(chains=0)
        with pytest.raises(ValueError):
            AnnealSettings(t_start=0.01, t_end=0.1)
        with pytest.raises(ValueError):
            AnnealSettings(stagnation_fraction=0)


FAST = AnnealSettings(chains=2, cooling_iters=50, structured_n_max=6)


class TestAnneal:
    def test_byte_identical_reruns(self):
        problem = l2_problem(n=5, d=2, budget=120, seed=11)
        a = anneal(problem, FAST).to_json_str()
        b = anneal(problem, FAST).to_json_str()
        assert a == b

    def test_clean_cell_certifies_nothing(self):
        problem = l2_problem(n=5, d=2, budget=150, seed=11)
        result = anneal(problem, FAST)
        assert result.certificates == []
        assert result.best_margin is not None and result.best_margin <= 0
        assert result.anneal_evaluations == 150
        assert result.structured_evaluations > 0
        assert result.discrepancies == []
        assert "no violation found" in result.summary()

    def test_structured_sweep_certifies_box_constraint_cell(self):
        problem = l2_problem(
            n=6, d=2, budget=50, seed=3, constraint_norm=NormSpec("Linf")
        )
        result = anneal(problem, FAST)
        assert result.certificates
        cert = result.certificates[0]
        assert cert.margin >= F(1, 4)
        assert "VIOLATION CERTIFIED" in result.summary()

    def test_progression_cell_runs(self):
        problem = SearchProblem(
            conjecture=1, n=4, d=1, budget=80, seed=7, m=3
        )
        result = anneal(problem, FAST)
        assert result.certificates == []
        assert result.anneal_evaluations == 80

    def test_candidates_ranked_by_margin(self):
        problem = l2_problem(n=5, d=1, budget=100, seed=2)
        result = anneal(problem, FAST)
        margins = [
            cand.margin for cand in result.candidates if cand.margin is not None
        ]
        assert margins == sorted(margins, reverse=True)

    def test_checkpoint_resume_extends_budget(self, tmp_path):
        ckpt = tmp_path / "state.json"
        problem = l2_problem(n=4, d=1, budget=60, seed=19)
        anneal(problem, FAST, checkpoint_path=str(ckpt))
        resumed = anneal(
            l2_problem(n=4, d=1, budget=100, seed=19), resume=str(ckpt)
        )
        assert resumed.anneal_evaluations == 100
        assert resumed.structured_evaluations == 0
        assert resumed.settings == FAST

    def test_resume_rejects_other_cell(self, tmp_path):
        ckpt = tmp_path / "state.json"
        anneal(l2_problem(n=4, d=1, budget=40, seed=19), FAST,
               checkpoint_path=str(ckpt))
        with pytest.raises(ValueError, match="different problem"):
            anneal(l2_problem(n=4, d=1, budget=80, seed=20), resume=str(ckpt))

    def test_resume_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "not_a_checkpoint.json"
        path.write_text(json.dumps({"format": "something-else"}))
        with pytest.raises(ValueError, match="not an anneal checkpoint"):
            anneal(l2_problem(budget=10), resume=str(path))

    def test_ledger_appends_one_line_per_run(self, tmp_path):
        ledger = tmp_path / "runs.jsonl"
        problem = l2_problem(n=4, d=1, budget=30, seed=5)
        result = anneal(problem, FAST, ledger_path=str(ledger))
        append_ledger(result, str(ledger))
        lines = ledger.read_text().splitlines()
        assert len(lines) == 2
        entry = json.loads(lines[0])
        assert entry["kind"] == "anneal"
        assert entry["cell"] == {"conjecture": 2, "n": 4, "d": 1,
                                 "norm": "L2", "constraint_norm": "L2"}
        assert entry["seed"] == 5
        assert entry["evaluations"] == 30 + result.structured_evaluations
        assert entry["certificates"] == 0
