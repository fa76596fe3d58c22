import json

import jsonschema
import numpy as np
import pytest

from prefelicit.model import WeightVector, aggregate
from prefelicit.oracle import best_scalarized, enumerate_feasible, knapsack_optimum_dp
from prefelicit.problems import (
    INSTANCE_JSON_SCHEMA,
    generate_allocation,
    generate_knapsack,
    instance_from_json,
    instance_to_json,
    is_feasible,
    load_instance,
    optimize_scalarized,
    save_instance,
)


class TestGenerateKnapsack:
    def test_paper_shape_capacity_range(self):
        inst = generate_knapsack(5, 100, 42)
        assert inst.capacity == int(inst.item_weights.sum() // 2)
        assert 50 <= inst.capacity <= 1000
        assert inst.utilities.min() >= 0.0
        assert inst.utilities.max() <= 1.0 / 100

    def test_single_item_boundary(self):
        inst = generate_knapsack(2, 1, 0)
        assert 0.0 <= inst.utilities[0, 0] <= 1.0
        assert inst.capacity >= 1

    def test_deterministic(self):
        a, b = generate_knapsack(3, 20, 9), generate_knapsack(3, 20, 9)
        np.testing.assert_array_equal(a.item_weights, b.item_weights)
        np.testing.assert_array_equal(a.utilities, b.utilities)
        assert a.capacity == b.capacity

    def test_weight_range(self):
        inst = generate_knapsack(2, 200, 1)
        assert inst.item_weights.min() >= 1
        assert inst.item_weights.max() <= 20

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            generate_knapsack(1, 10, 0)


class TestGenerateAllocation:
    def test_paper_shape(self):
        inst = generate_allocation(5, 50, 5, 15, 42)
        assert inst.costs.shape == (5, 50, 5)

    def test_normalization_identity(self):
        inst = generate_allocation(4, 10, 3, 5, 7)
        np.testing.assert_allclose(inst.costs.sum(axis=(1, 2)), np.ones(4), atol=1e-12)

    def test_tight_feasibility_boundary(self):
        inst = generate_allocation(2, 6, 3, 2, 0)  # m == b*r exactly
        assert inst.m == inst.bound * inst.r

    def test_infeasible_shape_rejected(self):
        with pytest.raises(ValueError):
            generate_allocation(2, 7, 3, 2, 0)

    def test_deterministic(self):
        a, b = generate_allocation(3, 8, 2, 5, 3), generate_allocation(3, 8, 2, 5, 3)
        np.testing.assert_array_equal(a.costs, b.costs)


class TestFeasibility:
    def test_empty_knapsack_feasible(self):
        inst = generate_knapsack(3, 6, 0)
        assert is_feasible(inst, np.zeros(6, dtype=int))

    def test_overfull_knapsack_infeasible(self):
        inst = generate_knapsack(3, 6, 0)
        assert not is_feasible(inst, np.ones(6, dtype=int))

    def test_allocation_valid_assignment(self):
        inst = generate_allocation(2, 4, 2, 3, 0)
        x = np.zeros((4, 2), dtype=int)
        x[:3, 0] = 1
        x[3, 1] = 1
        assert is_feasible(inst, x.ravel())

    def test_allocation_capacity_violation(self):
        inst = generate_allocation(2, 4, 2, 3, 0)
        x = np.zeros((4, 2), dtype=int)
        x[:, 0] = 1  # 4 agents on a bound-3 resource
        assert not is_feasible(inst, x.ravel())

    def test_allocation_unassigned_agent(self):
        inst = generate_allocation(2, 4, 2, 3, 0)
        assert not is_feasible(inst, np.zeros(8, dtype=int))

    def test_shape_mismatch(self):
        inst = generate_knapsack(3, 6, 0)
        with pytest.raises(ValueError):
            is_feasible(inst, np.zeros(5, dtype=int))


class TestOptimizeScalarized:
    def test_matches_dp_on_basis_weights(self, any_backend):
        inst = generate_knapsack(3, 15, 21)
        for k in range(3):
            w = WeightVector.basis(3, k)
            milp_sol = optimize_scalarized(inst, w, any_backend)
            dp_sol = knapsack_optimum_dp(inst, w)
            assert aggregate(w, milp_sol) == pytest.approx(aggregate(w, dp_sol), abs=1e-8)

    def test_matches_dp_on_interior_weights(self, highs):
        rng = np.random.default_rng(2)
        for seed in range(4):
            inst = generate_knapsack(3, 18, 70 + seed)
            w = WeightVector.from_raw(rng.uniform(0.05, 1, 3))
            milp_sol = optimize_scalarized(inst, w, highs)
            dp_sol = knapsack_optimum_dp(inst, w)
            assert aggregate(w, milp_sol) == pytest.approx(aggregate(w, dp_sol), abs=1e-8)

    def test_allocation_matches_enumeration(self, any_backend):
        inst = generate_allocation(3, 6, 2, 4, 5)
        rng = np.random.default_rng(0)
        for _ in range(3):
            w = WeightVector.from_raw(rng.uniform(0, 1, 3))
            milp_sol = optimize_scalarized(inst, w, any_backend)
            brute = best_scalarized(inst, w)
            assert aggregate(w, milp_sol) == pytest.approx(aggregate(w, brute), abs=1e-8)
            assert aggregate(w, milp_sol) > 0.0  # every agent must be assigned

    def test_loose_capacity_takes_everything(self, highs):
        inst = generate_knapsack(2, 6, 3)
        loose = type(inst)(
            n=inst.n, p=inst.p, utilities=inst.utilities,
            item_weights=inst.item_weights, capacity=int(inst.item_weights.sum()),
        )
        sol = optimize_scalarized(loose, WeightVector.uniform(2), highs)
        np.testing.assert_array_equal(sol.decision, np.ones(6, dtype=np.int8))

    def test_dominates_random_feasible(self, highs):
        inst = generate_knapsack(3, 12, 8)
        w = WeightVector(np.array([0.3, 0.3, 0.4]))
        opt_value = aggregate(w, optimize_scalarized(inst, w, highs))
        rng = np.random.default_rng(1)
        count = 0
        while count < 1000:
            decision = (rng.random(12) < 0.4).astype(int)
            if not inst.is_feasible(decision):
                continue
            count += 1
            assert opt_value >= aggregate(w, inst.solution(decision)) - 1e-7

    def test_allocation_minimizes(self, highs):
        inst = generate_allocation(2, 5, 2, 3, 2)
        w = WeightVector.uniform(2)
        opt_value = aggregate(w, optimize_scalarized(inst, w, highs))
        for sol in enumerate_feasible(inst):
            assert opt_value <= aggregate(w, sol) + 1e-7


class TestJsonRoundTrip:
    def test_knapsack_lossless(self, tmp_path):
        inst = generate_knapsack(3, 10, 123)
        path = tmp_path / "inst.json"
        save_instance(inst, str(path))
        loaded = load_instance(str(path))
        np.testing.assert_array_equal(loaded.utilities, inst.utilities)
        np.testing.assert_array_equal(loaded.item_weights, inst.item_weights)
        assert loaded.capacity == inst.capacity and loaded.seed == inst.seed

    def test_allocation_lossless(self):
        inst = generate_allocation(3, 7, 2, 4, 77)
        loaded = instance_from_json(instance_to_json(inst))
        np.testing.assert_array_equal(loaded.costs, inst.costs)
        assert (loaded.m, loaded.r, loaded.bound) == (7, 2, 4)

    def test_schema_validates_generated_files(self):
        for inst in (generate_knapsack(2, 4, 0), generate_allocation(2, 4, 2, 3, 0)):
            jsonschema.validate(json.loads(instance_to_json(inst)), INSTANCE_JSON_SCHEMA)

    def test_criteria_names_round_trip(self):
        base = generate_knapsack(2, 4, 0)
        named = type(base)(
            n=base.n, p=base.p, utilities=base.utilities,
            item_weights=base.item_weights, capacity=base.capacity,
            criteria_names=("profit", "durability"),
        )
        data = json.loads(instance_to_json(named))
        jsonschema.validate(data, INSTANCE_JSON_SCHEMA)
        assert instance_from_json(instance_to_json(named)).criteria_names == (
            "profit", "durability",
        )

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            instance_from_json('{"kind": "tsp"}')
