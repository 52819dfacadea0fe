import random

import pytest

from flexrsa.model import Demand, Link, OpticalNetwork, RestorationInstance


def make_network(nodes, links, available, slot_count):
    return OpticalNetwork(nodes, links, available, slot_count)


@pytest.fixture
def t1():
    """Triangle: route around the long edge; reach forbids the direct one."""
    links = [
        Link(1, 1, 2, 1.0),
        Link(2, 2, 3, 1.0),
        Link(3, 1, 3, 3.0),
    ]
    net = make_network([1, 2, 3], links, {1: [1, 2], 2: [1, 2], 3: [1, 2]}, 2)
    return RestorationInstance(net, (Demand(1, 1, 3, 1, 2.0),))


@pytest.fixture
def t2():
    """Two-hop path with color 1 occupied on the second link."""
    links = [Link(1, 1, 2, 1.0), Link(2, 2, 3, 1.0)]
    net = make_network([1, 2, 3], links, {1: [1, 2, 3], 2: [2, 3]}, 3)
    return RestorationInstance(net, (Demand(2, 1, 3, 2, 5.0),))


@pytest.fixture
def t3():
    """Two demands fighting over a single slot."""
    links = [Link(1, 1, 2, 1.0)]
    net = make_network([1, 2], links, {1: [1]}, 1)
    return RestorationInstance(
        net, (Demand(1, 1, 2, 1, 10.0), Demand(2, 1, 2, 1, 10.0))
    )


@pytest.fixture
def t4():
    """Free 4-slot spectrum; width-2 demand exercises the contiguity tail."""
    links = [Link(1, 1, 2, 1.0), Link(2, 2, 3, 1.0)]
    net = make_network([1, 2, 3], links, {1: [1, 2, 3, 4], 2: [1, 2, 3, 4]}, 4)
    return RestorationInstance(net, (Demand(4, 1, 3, 2, 5.0),))


@pytest.fixture
def t1_low_reach(t1):
    """T1 with the reach lowered below the shortest route."""
    return RestorationInstance(t1.network, (Demand(1, 1, 3, 1, 1.5),))


def corpus_instances(count=200, base_seed=1000):
    from flexrsa.oracle import random_instance

    out = []
    for i in range(count):
        rng = random.Random(base_seed + i)
        out.append((base_seed + i, random_instance(rng)))
    return out


@pytest.fixture(scope="session")
def small_corpus():
    return corpus_instances(count=40)
