import pytest

from flexrsa.milp import (
    FlowVar,
    SelectVar,
    build_model,
    model_statistics,
)
from flexrsa.model import InputError, RestorationInstance
from flexrsa.trimming import compute_useful_triples


def trimmed(inst, mode="feasibility"):
    return build_model(inst, compute_useful_triples(inst), "trimmed", mode)


class TestVariableSets:
    def test_t1_trimmed_has_eight_flow_vars(self, t1):
        model = trimmed(t1)
        assert model_statistics(model).variables == 8
        assert {v.link for v in model.flow_variables()} == {1, 2}

    def test_t1_base_has_twelve(self, t1):
        model = build_model(t1, None, "base")
        assert model_statistics(model).variables == 12  # 1 demand x 3 links x 2 colors x 2 dirs

    def test_t3_trimmed_has_four(self, t3):
        model = trimmed(t3)
        assert model_statistics(model).variables == 4

    def test_empty_demand_set(self, t1):
        inst = RestorationInstance(t1.network, ())
        model = trimmed(inst)
        stats = model_statistics(model)
        assert stats.variables == 0
        assert stats.constraints == 0

    def test_base_fixes_occupied_colors(self, t2):
        model = build_model(t2, None, "base")
        # color 1 on link 2 is occupied: both directions fixed to zero
        assert FlowVar(2, 2, True, 1) in model.fixed_zero
        assert FlowVar(2, 2, False, 1) in model.fixed_zero
        assert FlowVar(2, 1, True, 1) not in model.fixed_zero

    def test_variable_count_ordering(self, small_corpus):
        for seed, inst in small_corpus[:15]:
            triples = compute_useful_triples(inst)
            n_base = len(build_model(inst, None, "base").variables)
            n_notrim = len(build_model(inst, None, "notrim").variables)
            n_trim = len(build_model(inst, triples, "trimmed").variables)
            assert n_trim <= n_notrim <= n_base, f"seed {seed}"

    def test_maxsubset_adds_exactly_one_selector_per_demand(self, t3):
        feas = trimmed(t3)
        maxs = trimmed(t3, "maxsubset")
        assert len(maxs.variables) == len(feas.variables) + len(t3.demands)
        assert len(maxs.select_variables()) == 2


class TestConstraints:
    def test_unicolor_absent_for_useless_link(self, t1):
        model = trimmed(t1)
        tags = [c.tag for c in model.constraints]
        assert "uni_l1_c1" in tags
        assert not any(t.startswith("uni_l3") for t in tags)

    def test_flow_conservation_only_at_inner_nodes(self, t1):
        model = trimmed(t1)
        flows = [c for c in model.constraints if c.family == "flow"]
        # only node index 1 (node 2) is inner; colors 1 and 2
        assert len(flows) == 2
        assert all("_n1" in c.tag for c in flows)

    def test_source_constraints_shape(self, t1):
        model = trimmed(t1)
        src = {c.tag: c for c in model.constraints if c.family == "srcout"}
        con = src["srcout_d1"]
        assert con.relation == "="
        assert con.rhs == 1
        assert set(con.coeffs) == {FlowVar(1, 1, True, 1), FlowVar(1, 1, True, 2)}

    def test_reach_constraint_coefficients(self, t1):
        model = trimmed(t1)
        (reach,) = [c for c in model.constraints if c.family == "reach"]
        assert reach.relation == "<="
        assert reach.rhs == 2.0  # reach 2 x width 1
        assert all(coeff == 1.0 for coeff in reach.coeffs.values())

    def test_contiguity_families_for_width_two(self, t4):
        model = trimmed(t4)
        fams = {c.family for c in model.constraints}
        assert {"ctgA", "ctgB", "ctgC"} <= fams
        ctg_c = [c for c in model.constraints if c.family == "ctgC"]
        # color 4 is useful but never a first color: x4 <= x3 on both directions of both links
        assert len(ctg_c) == 4
        for con in ctg_c:
            assert con.relation == ">="
            assert sorted(con.coeffs.values()) == [-1, 1]

    def test_contiguity_skipped_for_width_one(self, t1):
        model = trimmed(t1)
        assert not any(c.family.startswith("ctg") for c in model.constraints)

    def test_base_contiguity_only_window_and_bottom(self, t4):
        model = build_model(t4, None, "base")
        fams = {c.family for c in model.constraints}
        assert "ctgC" not in fams
        ctg_b = [c for c in model.constraints if c.family == "ctgB"]
        assert ctg_b and all(c.tag.endswith("_c1") for c in ctg_b)
        # window rows exist up to the top of the spectrum
        assert any(c.tag.endswith("_c4") for c in model.constraints if c.family == "ctgA")

    def test_no_empty_rows_except_unroutable_source(self, t1_low_reach):
        model = trimmed(t1_low_reach)
        empties = [c for c in model.constraints if not c.coeffs]
        assert [c.tag for c in empties] == ["srcout_d1"]
        assert empties[0].rhs == 1


class TestModes:
    def test_maxsubset_rejects_non_reroutable(self, t1_low_reach):
        triples = compute_useful_triples(t1_low_reach)
        with pytest.raises(InputError, match=r"\[1\]"):
            build_model(t1_low_reach, triples, "trimmed", "maxsubset")

    def test_maxsubset_objective_uses_big_m(self, t3):
        model = trimmed(t3, "maxsubset")
        # |U| = 2 undirected triples, so M = 3
        assert model.meta["big_m"] == 3
        assert model.objective[SelectVar(1)] == -3
        assert model.objective[FlowVar(1, 1, True, 1)] == 1

    def test_maxsubset_source_rows_reference_selector(self, t3):
        model = trimmed(t3, "maxsubset")
        src = [c for c in model.constraints if c.family == "srcout"]
        for con in src:
            assert con.rhs == 0
            sel = [k for k in con.coeffs if isinstance(k, SelectVar)]
            assert len(sel) == 1
            assert con.coeffs[sel[0]] == -1  # width 1

    def test_trimmed_requires_triples(self, t1):
        with pytest.raises(InputError):
            build_model(t1, None, "trimmed")

    def test_unknown_variant_and_mode(self, t1):
        with pytest.raises(InputError):
            build_model(t1, None, "fancy")
        with pytest.raises(InputError):
            build_model(t1, None, "base", "decision")


class TestStatistics:
    def test_by_family_counts(self, t4):
        stats = model_statistics(trimmed(t4))
        assert stats.by_family["uni"] == 8  # 2 links x 4 colors
        assert stats.by_family["srcout"] == 1
        assert stats.flow_variables == stats.variables
        assert stats.fixed_zero == 0

    def test_base_fixed_accounting(self, t2):
        stats = model_statistics(build_model(t2, None, "base"))
        assert stats.fixed_zero == 2  # (link 2, color 1) in both directions
