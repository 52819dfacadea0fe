import pytest

from flexrsa.io import instance_to_dict, load_instance
from flexrsa.model import Link, OpticalNetwork, paths_intersect
from flexrsa.testgen import (
    MODULATION_REACH_KM,
    GenerationError,
    builtin_topology_path,
    generate_loaded_network,
    make_scenario,
)


def load_topology(name):
    return load_instance(builtin_topology_path(name)).network


from tests_support import small_ring as small_topology


class TestModulationReaches:
    def test_values(self):
        assert MODULATION_REACH_KM == {
            "bpsk": 5000.0,
            "qpsk": 2500.0,
            "8qam": 1250.0,
        }


class TestLoading:
    def test_deterministic(self):
        topo = small_topology()
        a = generate_loaded_network(topo, 600.0, (2, 1), seed=5)
        b = generate_loaded_network(topo, 600.0, (2, 1), seed=5)
        assert instance_to_dict(
            type("I", (), {"network": a.network, "demands": ()})()
        ) == instance_to_dict(type("I", (), {"network": b.network, "demands": ()})())
        assert [pd.demand for pd in a.provisioned] == [pd.demand for pd in b.provisioned]
        assert a.log == b.log

    def test_single_link_routes_nothing(self):
        # no link-disjoint recovery exists, so not a single demand is admitted
        net = OpticalNetwork([1, 2], [Link(1, 1, 2, 50.0)], {1: [1, 2]}, 2)
        loaded = generate_loaded_network(net, 1000.0, (1,), seed=1)
        assert loaded.provisioned == ()
        assert loaded.network.available[1] == frozenset({1, 2})

    def test_rejects_partially_occupied_topology(self):
        net = OpticalNetwork([1, 2], [Link(1, 1, 2, 50.0)], {1: [1]}, 2)
        with pytest.raises(GenerationError, match="pristine"):
            generate_loaded_network(net, 1000.0, (1,), seed=1)

    def test_mains_pairwise_clean_and_widths_follow_schedule(self):
        topo = small_topology(slot_count=8)
        loaded = generate_loaded_network(topo, 600.0, (4, 2, 1), seed=3)
        assert loaded.provisioned
        widths = [pd.demand.width for pd in loaded.provisioned]
        assert set(widths) <= {1, 2, 4}
        # schedule order: all width-1 first, then 4s, then 2s, then 1s
        phases = []
        for w in widths:
            if not phases or phases[-1] != w:
                phases.append(w)
        allowed = [4, 2, 1]
        it = iter(allowed)
        for phase in phases:
            for expected in it:
                if phase == expected:
                    break
            else:
                pytest.fail(f"width phases {phases} do not follow {allowed}")
        mains = [pd.main for pd in loaded.provisioned]
        for i, a in enumerate(mains):
            for b in mains[i + 1 :]:
                assert not paths_intersect(a, b)

    def test_network_availability_reflects_mains_only(self):
        topo = small_topology(slot_count=8)
        loaded = generate_loaded_network(topo, 600.0, (1,), seed=2)
        for pd in loaded.provisioned:
            for link_id in pd.main.link_ids():
                free = loaded.network.available[link_id]
                assert not set(pd.main.colors()) & free
        # recovery reservations were removed: their slots are free unless a
        # main also took them
        main_occ = {}
        for pd in loaded.provisioned:
            for link_id in pd.main.link_ids():
                main_occ.setdefault(link_id, set()).update(pd.main.colors())
        for pd in loaded.provisioned:
            for link_id in pd.recovery.link_ids():
                for c in pd.recovery.colors():
                    if c not in main_occ.get(link_id, set()):
                        assert c in loaded.network.available[link_id]


class TestScenarios:
    def make_loaded(self):
        return generate_loaded_network(
            small_topology(slot_count=8), 600.0, (2, 1), seed=11
        )

    def test_first_kind_shape(self):
        loaded = self.make_loaded()
        eligible = loaded.eligible_links()
        assert eligible
        scenario = make_scenario(loaded, eligible[0], "first")
        inst = scenario.instance
        broken_ids = {d.id for d in inst.demands}
        assert broken_ids == {
            pd.demand.id
            for pd in loaded.provisioned
            if eligible[0] in pd.main.link_ids()
        }
        assert eligible[0] not in {l.id for l in inst.network.links}
        # freed slots: broken demands' occupations are available again
        for pd in loaded.provisioned:
            if pd.demand.id in broken_ids:
                for link_id in pd.main.link_ids():
                    if link_id == eligible[0]:
                        continue
                    assert set(pd.main.colors()) <= inst.network.available[link_id]

    def test_first_kind_recovery_witness_is_valid(self):
        from flexrsa.extract import verify_solution

        loaded = self.make_loaded()
        broken = loaded.eligible_links()[0]
        scenario = make_scenario(loaded, broken, "first")
        witness = {
            pd.demand.id: pd.recovery
            for pd in loaded.provisioned
            if broken in pd.main.link_ids()
        }
        assert verify_solution(witness, scenario.instance).ok

    def test_ineligible_link_lists_eligible(self):
        loaded = self.make_loaded()
        ineligible = [
            l.id for l in loaded.topology.links if l.id not in loaded.eligible_links()
        ]
        if not ineligible:
            pytest.skip("every link is eligible for this seed")
        with pytest.raises(GenerationError, match="eligible links"):
            make_scenario(loaded, ineligible[0], "first")

    def test_second_kind(self):
        loaded = self.make_loaded()
        eligible = loaded.eligible_links()
        if len(eligible) < 2:
            pytest.skip("need two eligible links")
        scenario = make_scenario(loaded, eligible[1], "second", first_break=eligible[0])
        assert scenario.kind == "second"
        assert scenario.first_break == eligible[0]
        dropped = {l.id for l in scenario.instance.network.links}
        assert eligible[0] not in dropped
        assert eligible[1] not in dropped
        assert scenario.replacement_policy in ("first_fit", "recorded_recovery")
        assert scenario.manifest["broken_demands"] == sorted(
            d.id for d in scenario.instance.demands
        )

    def test_same_break_twice_rejected(self):
        loaded = self.make_loaded()
        eligible = loaded.eligible_links()
        with pytest.raises(GenerationError, match="differ"):
            make_scenario(loaded, eligible[0], "second", first_break=eligible[0])


class TestBuiltinTopologies:
    def test_ring14_shape(self):
        net = load_topology("ring14")
        assert len(net.nodes) == 14
        assert len(net.links) == 21
        assert net.slot_count == 80
        assert all(len(net.available[l.id]) == 80 for l in net.links)

    def test_grid12_shape(self):
        net = load_topology("grid12")
        assert len(net.nodes) == 12
        assert len(net.links) == 17

    def test_unknown_name(self):
        with pytest.raises(GenerationError):
            builtin_topology_path("nsfnet")


class TestFirstKindFeasibility:
    def test_small_topology_scenarios_feasible_by_oracle(self):
        from flexrsa.oracle import OracleGuard, oracle_solve

        for seed in range(4):
            loaded = generate_loaded_network(
                small_topology(slot_count=4), 600.0, (2, 1), seed=seed
            )
            for broken in loaded.eligible_links()[:2]:
                scenario = make_scenario(loaded, broken, "first")
                out = oracle_solve(
                    scenario.instance, guard=OracleGuard(max_nodes=5, max_colors=4)
                )
                assert out.feasible, f"seed {seed} break {broken}"
