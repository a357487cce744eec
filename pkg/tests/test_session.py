"""Tests for incremental network construction."""

import unittest

import networkx as nx
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from plannet.config import Config, preset
from plannet.errors import ConfigError, NetworkError
from plannet.inference import enumerate_marginals, marginals, posterior
from plannet.library import Story, load_library, load_story
from plannet.network import EntityType, Equality, Mention, PlanInstance, SlotExclusivity, SlotType, Word
from plannet.session import build_network, new_session

from strategies import fixture, scenarios


CROWDED = """
(library
  (type kill :prior 1e-4)
  (type rope :prior 1e-5)
  (word "kill" :sense kill :p 0.9)
  (word "rope" :sense rope :p 0.9)
  (plan hang :specializes kill :p 1e-3 (slot rope-of rope)))
"""


def structure(net):
    """Labels, parent labels and evidence, independent of node ids."""
    label = {node.id: node.label for node in net.nodes}
    return {
        node.label: (sorted(label[p] for p in node.parents), net.evidence.get(node.id))
        for node in net.nodes
    }


class TestSession(unittest.TestCase):

    def setUp(self):
        self.lib = load_library(fixture("hang.lib"))
        self.life = preset("life").config
        self.story = preset("story").config

    def test_kill_token(self):
        session = new_session(self.lib, self.life)
        created = session.assert_token("kill", "k1")
        self.assertEqual(created, {0, 1, 2, 3})
        net = session.network()
        kinds = sorted(type(n.kind).__name__ for n in net.nodes)
        self.assertEqual(kinds, ["EntityType", "PlanInstance", "SlotType", "Word"])
        self.assertEqual(net.find("(rope (rope-of k1))").parents, (net.find("(hang k1)").id,))

    def test_rope_token_adds_three(self):
        session = new_session(self.lib, self.life)
        session.assert_token("kill", "k1")
        created = session.assert_token("rope", "r2")
        self.assertEqual(len(created), 3)
        net = session.network()
        self.assertEqual(len(net), 7)
        equality = net.find("(= (rope-of k1) r2)")
        rope = net.find("(rope r2)")
        self.assertEqual(set(rope.parents), {equality.id, net.find("(rope (rope-of k1))").id})
        self.assertEqual(equality.parents, ())

    def test_rope_alone(self):
        net = build_network(self.lib, Story(), self.life)
        self.assertEqual(len(net), 0)
        session = new_session(self.lib, self.life)
        session.assert_token("rope", "r2")
        net = session.network()
        self.assertEqual(len(net), 2)
        self.assertEqual(net.of_kind(Equality), [])

    def test_mention_mode_adds_two(self):
        story = load_story(fixture("rope.story"), self.lib)
        self.assertEqual(len(build_network(self.lib, story, self.life)), 7)
        net = build_network(self.lib, story, self.story)
        self.assertEqual(len(net), 9)
        mention = net.find("(mention r2)")
        self.assertEqual(mention.parents, (net.find("(= (rope-of k1) r2)").id,))
        self.assertIn(mention.id, net.find('(word "rope" r2)').parents)
        self.assertEqual(net.find("(mention k1)").parents, ())

    def test_evidence_is_the_words(self):
        net = build_network(self.lib, load_story(fixture("rope.story"), self.lib), self.life)
        words = {n.id for n in net.of_kind(Word)}
        self.assertEqual(net.evidence, {i: True for i in words})

    def test_word_keeps_story_position(self):
        net = build_network(self.lib, load_story(fixture("rope.story"), self.lib), self.life)
        self.assertEqual(net.find('(word "rope" r2)').kind.index, 1)

    def test_reassert_is_noop(self):
        session = new_session(self.lib, self.life)
        session.assert_token("kill", "k1")
        session.assert_token("rope", "r2")
        before = session.network()
        self.assertEqual(session.assert_token("rope", "r2"), set())
        self.assertEqual(session.quiesce(), set())
        after = session.network()
        self.assertEqual(structure(before), structure(after))
        self.assertEqual(len(before), len(after))

    def test_unknown_word(self):
        session = new_session(self.lib, self.life)
        with self.assertRaises(NetworkError):
            session.assert_token("knife", "x1")
        self.assertEqual(len(session), 0)

    def test_duplicate_entity(self):
        session = new_session(self.lib, self.life)
        session.assert_token("kill", "k1")
        with self.assertRaises(NetworkError):
            session.assert_token("rope", "k1")

    def test_too_many_candidates(self):
        lib = load_library(CROWDED)
        session = new_session(lib, Config(max_equality_candidates=2))
        session.assert_token("kill", "k1")
        session.assert_token("rope", "r2")
        session.assert_token("rope", "r3")
        size = len(session)
        with self.assertRaises(NetworkError) as ctx:
            session.assert_token("rope", "r4")
        self.assertIn("(rope-of k1)", str(ctx.exception))
        self.assertEqual(len(session), size)
        self.assertEqual(len(session.tokens), 3)
        self.assertEqual(len(session.network()), size)

    def test_exclusivity_for_two_candidates(self):
        session = new_session(self.lib, self.life)
        for word, entity in (("kill", "k1"), ("rope", "r2"), ("rope", "r3")):
            session.assert_token(word, entity)
        net = session.network()
        unique = net.find("(unique (rope-of k1))")
        self.assertEqual(len(unique.parents), 2)
        self.assertTrue(net.evidence[unique.id])

    def test_late_trigger_links_existing_entities(self):
        session = new_session(self.lib, self.life)
        session.assert_token("rope", "r1")
        session.assert_token("kill", "k2")
        net = session.network()
        self.assertEqual(len(net.of_kind(Equality)), 1)
        self.assertEqual(net.of_kind(Equality)[0].label, "(= (rope-of k2) r1)")

    def test_no_self_equality(self):
        lib = load_library(
            """(library (type a :prior 0.01) (type b :prior 0.01)
                 (word "ab" :sense a :p 0.5) (word "ab" :sense b :p 0.5)
                 (plan p :specializes a :p 0.1 (slot s b)))"""
        )
        net = build_network(lib, Story.model_validate({"tokens": [{"word": "ab", "entity": "x"}]}), Config())
        self.assertEqual(net.of_kind(Equality), [])

    def test_two_senses(self):
        lib = load_library(
            """(library (type a :prior 0.01) (type b :prior 0.01)
                 (word "ab" :sense a :p 0.5) (word "ab" :sense b :p 0.5))"""
        )
        session = new_session(lib, Config())
        session.assert_token("ab", "x")
        net = session.network()
        self.assertEqual(len(net.of_kind(EntityType)), 2)
        self.assertEqual(len(net.find('(word "ab" x)').parents), 2)

    def test_mapping_config(self):
        session = new_session(self.lib, {"equality_prior": 0.1})
        self.assertEqual(session.config.equality_prior, 0.1)

    def test_lift_bound(self):
        with self.assertRaises(ConfigError):
            new_session(self.lib, {"mention_enabled": True, "mention_base": 0.01, "mention_lift": 200})

    def test_leak_must_be_below_p_word(self):
        with self.assertRaises(ConfigError):
            new_session(self.lib, Config(word_leak=0.9))

    def test_acyclic(self):
        net = build_network(self.lib, load_story(fixture("rope.story"), self.lib), self.story)
        self.assertTrue(nx.is_directed_acyclic_graph(net.graph()))

    def test_zero_equality_prior_decouples_rope(self):
        kill = load_story(fixture("kill.story"), self.lib)
        rope = load_story(fixture("rope.story"), self.lib)
        cfg = Config(equality_prior=0.0)
        alone = build_network(self.lib, kill, cfg)
        both = build_network(self.lib, rope, cfg)
        p_alone = posterior(alone, alone.evidence, alone.find("(hang k1)").id)
        p_both = posterior(both, both.evidence, both.find("(hang k1)").id)
        self.assertAlmostEqual(p_alone, p_both, delta=1e-12)


RIVALS = """
(library
  (type kill :prior 1e-4)
  (type rope :prior 1e-5)
  (type gun :prior 1e-5)
  (word "kill" :sense kill :p 0.9)
  (word "rope" :sense rope :p 0.9)
  (word "gun" :sense gun :p 0.9)
  (plan shoot :specializes kill :p 0.01 (slot instrument gun))
  (plan hang :specializes kill :p 1e-3 (slot instrument rope)))
"""


def story_of(*pairs):
    return Story.model_validate({"tokens": [{"word": w, "entity": e} for w, e in pairs]})


class TestRivalPlans(unittest.TestCase):
    """hang and shoot both specialize kill and are not exclusive."""

    def setUp(self):
        self.lib = load_library(RIVALS)
        self.cfg = preset("life").config

    def plans(self, *pairs):
        net = build_network(self.lib, story_of(*pairs), self.cfg)
        return {
            name: posterior(net, net.evidence, net.find(f"({name} k1)").id) for name in ("hang", "shoot")
        }

    def test_structure(self):
        net = build_network(self.lib, story_of(("kill", "k1"), ("rope", "r2"), ("gun", "g3")), self.cfg)
        kill = net.find("(kill k1)").id
        hang, shoot = net.find("(hang k1)"), net.find("(shoot k1)")
        self.assertEqual(hang.parents, (kill,))
        self.assertEqual(shoot.parents, (kill,))
        self.assertEqual(net.of_kind(SlotExclusivity), [])
        filled = {(n.kind.term.schema_name, n.kind.entity) for n in net.of_kind(Equality)}
        self.assertEqual(filled, {("hang", "r2"), ("shoot", "g3")})
        self.assertTrue(nx.is_directed_acyclic_graph(net.graph()))

    def test_rope_raises_hang_only(self):
        alone = self.plans(("kill", "k1"))
        rope = self.plans(("kill", "k1"), ("rope", "r2"))
        self.assertGreater(rope["hang"], 1.5 * alone["hang"])
        # no competition: the rope does not explain shoot away
        self.assertAlmostEqual(rope["shoot"], alone["shoot"], delta=1e-4 * alone["shoot"])

    def test_both_instruments_raise_both_plans(self):
        alone = self.plans(("kill", "k1"))
        both = self.plans(("kill", "k1"), ("rope", "r2"), ("gun", "g3"))
        self.assertGreater(both["hang"], 1.5 * alone["hang"])
        self.assertGreater(both["shoot"], 1.5 * alone["shoot"])

    def test_engines_agree(self):
        net = build_network(self.lib, story_of(("kill", "k1"), ("rope", "r2"), ("gun", "g3")), self.cfg)
        ids = [n.id for n in net.of_kind(PlanInstance, Equality)]
        exact = marginals(net, net.evidence, ids)
        oracle = enumerate_marginals(net, net.evidence, ids)
        for i in ids:
            self.assertAlmostEqual(exact[i], oracle[i], delta=1e-9)


class TestOrderIndependence(unittest.TestCase):

    @settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(scenarios(max_nodes=18), st.randoms(use_true_random=False))
    def test_permuted_stories(self, scenario, rnd):
        lib, story, cfg = scenario
        tokens = list(story.tokens)
        rnd.shuffle(tokens)
        shuffled = Story(tokens=tuple(tokens))

        a = build_network(lib, story, cfg)
        b = build_network(lib, shuffled, cfg)
        self.assertEqual(len(a), len(b))

        label = lambda net: {n.id: n.label for n in net.nodes}
        la, lb = label(a), label(b)
        parents_a = {n.label: sorted(la[p] for p in n.parents) for n in a.nodes}
        parents_b = {n.label: sorted(lb[p] for p in n.parents) for n in b.nodes}
        self.assertEqual(parents_a, parents_b)
        self.assertEqual(
            {la[i]: v for i, v in a.evidence.items()}, {lb[i]: v for i, v in b.evidence.items()}
        )

        for node in a.of_kind(PlanInstance, Equality):
            pa = posterior(a, a.evidence, node.id)
            pb = posterior(b, b.evidence, b.find(node.label).id)
            self.assertAlmostEqual(pa, pb, delta=1e-12)

    @settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(scenarios(max_nodes=18))
    def test_quiesce_adds_nothing(self, scenario):
        lib, story, cfg = scenario
        session = new_session(lib, cfg)
        for token in story.tokens:
            session.assert_token(token.word, token.entity)
        size = len(session)
        self.assertEqual(session.quiesce(), set())
        self.assertEqual(len(session), size)

    @settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(scenarios(max_nodes=18))
    def test_kinds_are_well_formed(self, scenario):
        lib, story, cfg = scenario
        net = build_network(lib, story, cfg)
        self.assertTrue(nx.is_directed_acyclic_graph(net.graph()))
        for node in net.of_kind(Equality):
            self.assertNotEqual(node.kind.term.entity, node.kind.entity)
        for node in net.of_kind(SlotExclusivity):
            self.assertGreaterEqual(len(node.parents), 2)
        self.assertEqual(bool(net.of_kind(Mention)), cfg.mention_enabled and len(story) > 0)
        for node in net.of_kind(SlotType):
            self.assertEqual(len(node.parents), 1)


if __name__ == "__main__":
    unittest.main()
