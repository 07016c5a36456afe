import numpy as np
import pytest

from conftest import make_fix_c, random_instance, random_tour
from tatsp.mip import (MissingValueError, build_model, check_assignment, expected_row_count,
                       tour_assignment, write_lp)
from tatsp.model import CapabilityError, Instance, tour_cost
from tatsp.oracle import brute_force_optimum


def test_fix_b_counts(fix_b):
    m = build_model(fix_b)
    assert (m.count("x_"), m.count("u_"), m.count("y_"), m.count("z_")) == (12, 4, 1, 132)
    assert m.family_counts() == {"4a": 4, "4b": 4, "4c": 9, "4d": 1, "4e": 1, "4f": 1, "4g": 1,
                                 "4h": 1, "4i": 132}
    assert len(m.constraints) == expected_row_count(fix_b)


def test_zero_relations_is_plain_mtz(fix_a):
    fams = build_model(fix_a).family_counts()
    assert set(fams) == {"4a", "4b", "4c", "4d", "4i"}


def test_last_trigger_row_count():
    rng = np.random.default_rng(51)
    for _ in range(10):
        inst = random_instance(rng, 5, relation_count=int(rng.integers(0, 60)))
        expected = sum(len(rs) * (len(rs) - 1) for rs in inst.relations_by_target)
        assert build_model(inst).family_counts().get("4j", 0) == expected
    assert build_model(make_fix_c()).family_counts()["4j"] == 2


def test_capacity_guard(fix_b):
    with pytest.raises(CapabilityError, match="needs 154 constraints"):
        build_model(fix_b, max_constraints=100)


def test_lp_text(fix_b):
    text = write_lp(build_model(fix_b))
    assert text == write_lp(build_model(fix_b))
    obj = text.split("Subject To")[0]
    assert "- 4 y_r0" in obj
    assert " mtz_1_2:" in text and " flow_out_0:" in text and " last_trigger" not in text
    for name in ("x_0_1", "u_3", "z_a0_a11"):
        assert name in text
    assert " 0 <= u_1 <= 3\n" in text
    assert text.rstrip().endswith("End")


def test_lp_reparse_counts(fix_a, fix_b, tmp_path):
    highspy = pytest.importorskip("highspy")
    for inst in (fix_a, fix_b):
        model = build_model(inst)
        path = tmp_path / "m.lp"
        path.write_text(write_lp(model))
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.readModel(str(path))
        lp = h.getLp()
        assert (lp.num_col_, lp.num_row_) == (len(model.variables), len(model.constraints))


def test_lp_optimum_matches_brute_force(tmp_path):
    highspy = pytest.importorskip("highspy")
    rng = np.random.default_rng(52)
    for _ in range(3):
        inst = random_instance(rng, 5, relation_count=12, integer=True)
        path = tmp_path / "m.lp"
        path.write_text(write_lp(build_model(inst)))
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.readModel(str(path))
        h.run()
        obj = h.getInfo().objective_function_value
        assert obj == pytest.approx(brute_force_optimum(inst).best_cost, abs=1e-6)


class TestAssignment:
    def test_fix_b_examples(self, fix_b):
        v = tour_assignment(fix_b, (0, 1, 2, 3))
        assert [v[f"u_{i}"] for i in range(4)] == [0, 1, 2, 3]
        assert v["y_r0"] == 1.0
        assert tour_assignment(fix_b, (0, 2, 3, 1))["y_r0"] == 0.0

    def test_fix_c_last_trigger(self, fix_c):
        v = tour_assignment(fix_c, (0, 1, 2, 3))
        assert (v["y_r0"], v["y_r1"]) == (0.0, 1.0)

    def test_feasible_with_matching_objective(self, fix_b, fix_c):
        for inst, tour in ((fix_b, (0, 1, 2, 3)), (fix_b, (0, 3, 1, 2)), (fix_c, (0, 1, 2, 3))):
            rep = check_assignment(build_model(inst), tour_assignment(inst, tour))
            assert rep.feasible, rep.violated
            assert rep.objective == pytest.approx(tour_cost(inst, tour), abs=1e-6)

    def test_random_agreement(self):
        rng = np.random.default_rng(53)
        for _ in range(40):
            inst = random_instance(rng, int(rng.integers(3, 7)), density=0.8)
            tour = random_tour(rng, inst)
            rep = check_assignment(build_model(inst), tour_assignment(inst, tour))
            assert rep.feasible, rep.violated
            assert rep.objective == pytest.approx(tour_cost(inst, tour), abs=1e-6)


class TestMutations:
    def test_two_arcs_leaving_depot(self, fix_b):
        v = tour_assignment(fix_b, (0, 1, 2, 3))
        v["x_0_2"] = 1.0
        rep = check_assignment(build_model(fix_b), v)
        assert not rep.feasible and "4a" in rep.violated_families
        assert ("flow_out_0", "4a") in rep.violated

    def test_trigger_after_target(self, fix_b):
        idx = fix_b.arc_index
        inst = Instance.build(4, [(a.tail, a.head, a.cost) for a in fix_b.arcs],
                              [(idx[3, 1], idx[2, 3], 1.0)])
        v = tour_assignment(inst, (0, 2, 3, 1))
        assert v["y_r0"] == 0.0
        v["y_r0"] = 1.0
        rep = check_assignment(build_model(inst), v)
        assert rep.violated_families == {"4g"}

    def test_earlier_trigger_claimed(self, fix_c):
        v = tour_assignment(fix_c, (0, 1, 2, 3))
        v["y_r0"], v["y_r1"] = 1.0, 0.0
        rep = check_assignment(build_model(fix_c), v)
        assert rep.violated_families == {"4j"}

    def test_bounds_and_missing(self, fix_b):
        model = build_model(fix_b)
        v = tour_assignment(fix_b, (0, 1, 2, 3))
        v["u_2"] = 2.5
        assert "bounds" in check_assignment(model, v).violated_families
        del v["z_a0_a1"]
        with pytest.raises(MissingValueError):
            check_assignment(model, v)
