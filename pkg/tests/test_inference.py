"""Tests for variable elimination and the enumeration oracle."""

import unittest

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from plannet.analysis import fragment_network, fragment_ratio
from plannet.errors import InconsistentEvidenceError, InferenceError, NetworkTooLargeError
from plannet.inference import (
    Enumeration,
    InferenceEngine,
    VariableElimination,
    elimination_order,
    enumerate_marginals,
    enumerate_posterior,
    marginals,
    posterior,
)
from plannet.network import BayesNet, EntityType, Node
from plannet.session import build_network

from strategies import scenarios


def kind(name):
    return EntityType(entity="x", type=name)


def chain():
    """a -> b -> c"""
    return BayesNet.from_nodes(
        [
            Node.root(0, kind("a"), 0.3),
            Node.with_table(1, kind("b"), [0], [0.2, 0.7]),
            Node.with_table(2, kind("c"), [1], [0.1, 0.6]),
        ]
    )


def diagnosis():
    """disease -> symptom, P(d)=0.01, P(s|d)=0.9, P(s|-d)=0.1"""
    return BayesNet.from_nodes(
        [Node.root(0, kind("disease"), 0.01), Node.with_table(1, kind("symptom"), [0], [0.1, 0.9])],
        {1: True},
    )


ENGINES = (VariableElimination(), Enumeration())


class TestEliminationOrder(unittest.TestCase):

    def test_chain(self):
        self.assertEqual(elimination_order(chain(), [2], []), [0, 1])

    def test_evidence_is_not_eliminated(self):
        self.assertEqual(elimination_order(chain(), [2], [1]), [0])

    def test_single_node(self):
        net = BayesNet.from_nodes([Node.root(0, kind("a"), 0.5)])
        self.assertEqual(elimination_order(net, [0], []), [])

    def test_ties_go_to_smallest_id(self):
        net = BayesNet.from_nodes([Node.root(i, kind(f"r{i}"), 0.5) for i in range(4)])
        self.assertEqual(elimination_order(net, [3], []), [0, 1, 2])

    def test_query_and_evidence_clash(self):
        with self.assertRaises(InferenceError):
            elimination_order(chain(), [1], [1])

    def test_unknown_ids(self):
        with self.assertRaises(InferenceError):
            elimination_order(chain(), [9], [])


class TestPosterior(unittest.TestCase):

    def test_root_prior(self):
        for engine in ENGINES:
            self.assertAlmostEqual(engine.posterior(chain(), {}, 0), 0.3, delta=1e-12)

    def test_chain_marginal(self):
        # P(b) = 0.3*0.7 + 0.7*0.2 = 0.35; P(c) = 0.35*0.6 + 0.65*0.1
        for engine in ENGINES:
            self.assertAlmostEqual(engine.posterior(chain(), {}, 2), 0.275, delta=1e-12)

    def test_diagnosis(self):
        net = diagnosis()
        self.assertAlmostEqual(posterior(net, None, 0), 1 / 12, delta=1e-12)
        self.assertAlmostEqual(enumerate_posterior(net, None, 0), 1 / 12, delta=1e-12)
        self.assertAlmostEqual(posterior(net, {}, 0), 0.01, delta=1e-12)

    def test_independent_roots(self):
        net = BayesNet.from_nodes([Node.root(0, kind("a"), 0.3), Node.root(1, kind("b"), 0.8)])
        self.assertAlmostEqual(posterior(net, {1: False}, 0), 0.3, delta=1e-12)
        self.assertAlmostEqual(posterior(net, {1: True}, 0), 0.3, delta=1e-12)

    def test_separated_evidence(self):
        nodes = [
            Node.root(0, kind("a"), 0.3),
            Node.with_table(1, kind("b"), [0], [0.2, 0.7]),
            Node.root(2, kind("c"), 0.4),
            Node.with_table(3, kind("d"), [2], [0.5, 0.9]),
        ]
        net = BayesNet.from_nodes(nodes)
        for engine in ENGINES:
            p = engine.posterior(net, {3: True}, 1)
            self.assertAlmostEqual(p, 0.35, delta=1e-12)

    def test_explaining_away(self):
        # a -> c <- b with c = a or b
        nodes = [
            Node.root(0, kind("a"), 0.1),
            Node.root(1, kind("b"), 0.1),
            Node.with_table(2, kind("c"), [0, 1], [0.0, 1.0, 1.0, 1.0]),
        ]
        net = BayesNet.from_nodes(nodes)
        given_c = posterior(net, {2: True}, 0)
        given_both = posterior(net, {2: True, 1: True}, 0)
        self.assertAlmostEqual(given_c, 0.1 / 0.19, delta=1e-12)
        self.assertAlmostEqual(given_both, 0.1, delta=1e-12)

    def test_fragment_matches_closed_form(self):
        for p_e, p_r, p_k in ((1e-5, 1e-5, 1e-6), (0.3, 0.2, 0.1), (0.0, 0.5, 0.5)):
            net, ids = fragment_network(p_e, p_r, p_k)
            for engine in ENGINES:
                ratio = engine.posterior(net, {ids["r"]: True}, ids["k"]) / p_k
                self.assertAlmostEqual(ratio, fragment_ratio(p_e, p_r, p_k), delta=1e-9 * ratio)

    def test_inconsistent_evidence(self):
        nodes = [Node.root(0, kind("a"), 0.0), Node.with_table(1, kind("b"), [0], [0.2, 0.7])]
        net = BayesNet.from_nodes(nodes)
        for engine in ENGINES:
            with self.assertRaises(InconsistentEvidenceError):
                engine.posterior(net, {0: True}, 1)

    def test_query_in_evidence(self):
        net = diagnosis()
        for engine in ENGINES:
            self.assertEqual(engine.posterior(net, None, 1), 1.0)
            self.assertEqual(engine.posterior(net, {1: False}, 1), 0.0)

    def test_query_in_impossible_evidence(self):
        net = BayesNet.from_nodes([Node.root(0, kind("a"), 0.0)])
        for engine in ENGINES:
            with self.assertRaises(InconsistentEvidenceError):
                engine.posterior(net, {0: True}, 0)

    def test_unknown_query(self):
        for engine in ENGINES:
            with self.assertRaises(InferenceError):
                engine.posterior(chain(), {}, 7)

    def test_unknown_evidence(self):
        with self.assertRaises(InferenceError):
            posterior(chain(), {7: True}, 0)

    def test_base_engine_is_abstract(self):
        with self.assertRaises(NotImplementedError):
            InferenceEngine().posterior(chain(), {}, 0)


class TestMarginals(unittest.TestCase):

    def test_marginals_match_posteriors(self):
        net = chain()
        expected = {i: posterior(net, {2: True}, i) for i in range(3)}
        self.assertEqual(marginals(net, {2: True}, range(3)), expected)
        got = enumerate_marginals(net, {2: True}, range(3))
        for i in range(3):
            self.assertAlmostEqual(got[i], expected[i], delta=1e-12)

    def test_empty_queries(self):
        self.assertEqual(enumerate_marginals(chain(), {}, []), {})

    def test_enumeration_unknown_query(self):
        with self.assertRaises(InferenceError):
            enumerate_marginals(chain(), {}, [0, 9])


class TestExplicitOrder(unittest.TestCase):

    def test_order_must_be_a_permutation(self):
        with self.assertRaises(InferenceError):
            VariableElimination(order=[0]).posterior(chain(), {}, 2)

    def test_full_order(self):
        p = VariableElimination(order=[1, 0]).posterior(chain(), {}, 2)
        self.assertAlmostEqual(p, 0.275, delta=1e-12)

    @settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(scenarios(max_nodes=14), st.randoms(use_true_random=False))
    def test_random_orders_agree(self, scenario, rnd):
        net = build_network(*scenario)
        hidden = [n.id for n in net.nodes if n.id not in net.evidence]
        if not hidden:
            return
        query = rnd.choice(hidden)
        order = [i for i in hidden if i != query]
        rnd.shuffle(order)
        expected = posterior(net, net.evidence, query)
        got = VariableElimination(order=order).posterior(net, net.evidence, query)
        self.assertAlmostEqual(got, expected, delta=1e-9)


class TestEnumeration(unittest.TestCase):

    def test_cap(self):
        net = BayesNet.from_nodes([Node.root(i, kind(f"r{i}"), 0.5) for i in range(26)])
        with self.assertRaises(NetworkTooLargeError):
            Enumeration().posterior(net, {}, 0)
        # elimination has no cap
        self.assertAlmostEqual(posterior(net, {}, 0), 0.5, delta=1e-12)

    def test_custom_cap(self):
        with self.assertRaises(NetworkTooLargeError):
            Enumeration(max_nodes=2).posterior(chain(), {}, 0)

    def test_joint_sums_to_one(self):
        self.assertAlmostEqual(float(Enumeration().joint(chain()).sum()), 1.0, delta=1e-12)

    @settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(scenarios(max_nodes=16))
    def test_elimination_matches_enumeration(self, scenario):
        net = build_network(*scenario)
        ids = [n.id for n in net.nodes]
        exact = marginals(net, net.evidence, ids)
        oracle = enumerate_marginals(net, net.evidence, ids)
        for i in ids:
            self.assertAlmostEqual(exact[i], oracle[i], delta=1e-9)


if __name__ == "__main__":
    unittest.main()
