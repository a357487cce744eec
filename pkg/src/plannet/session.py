"""Incremental network construction by forward-chaining rules.

Each asserted token pushes facts onto an agenda; rules fire on the facts
until the agenda is empty:

    token  -> a type node per sense plus the mention and word nodes
    typed  -> plan hypotheses and their slot types,
              equalities with slots already waiting for this type
    slot   -> equalities with entities already of this type
    equal  -> slot exclusivity, mention parents

All rules only ever add missing nodes or parents, so re-running them over
existing facts creates nothing.
"""

import copy
import logging
from collections import deque
from typing import Dict, List, Mapping, Set, Tuple, Union

from .config import Config
from .errors import ConfigError, NetworkError
from .library import PlanLibrary, Story, Token, triggers_for_type
from .network import (
    BayesNet,
    EntityType,
    Equality,
    Mention,
    Node,
    PlanInstance,
    SlotExclusivity,
    SlotTerm,
    SlotType,
    Word,
    identity,
    synth_cpt,
)


logger = logging.getLogger(__name__)


class Session:
    """Single-writer construction state for one story.

    Example:
        session = new_session(lib, preset("life").config)
        session.assert_token("kill", "k1")
        session.assert_token("rope", "r2")
        net = session.network()
    """

    def __init__(self, lib: PlanLibrary, config: Config):
        self.lib = lib
        self.config = config
        self.tokens: List[Token] = []
        self._kinds: Dict[int, object] = {}
        self._parents: Dict[int, List[int]] = {}
        self._index: Dict[tuple, int] = {}
        self._evidence: Dict[int, bool] = {}
        self._agenda: deque = deque()
        self._created: Set[int] = set()

    def __len__(self):
        return len(self._kinds)

    # -- node bookkeeping ---------------------------------------------------

    def _lookup(self, kind):
        return self._index.get(identity(kind))

    def _ensure(self, kind, parents=()) -> Tuple[int, bool]:
        """Return (id, created) for kind, creating it with parents if absent."""
        node_id = self._lookup(kind)
        if node_id is not None:
            return node_id, False
        node_id = len(self._kinds)
        self._kinds[node_id] = kind
        self._parents[node_id] = list(parents)
        self._index[identity(kind)] = node_id
        self._created.add(node_id)
        logger.debug("created node %s %s", node_id, kind.label)
        return node_id, True

    def _add_parent(self, node_id: int, parent: int):
        if parent not in self._parents[node_id]:
            self._parents[node_id].append(parent)

    def _nodes_of(self, cls) -> List[Tuple[int, object]]:
        return [(i, kind) for i, kind in sorted(self._kinds.items()) if isinstance(kind, cls)]

    def _equalities_for(self, term: SlotTerm) -> List[int]:
        return [i for i, kind in self._nodes_of(Equality) if kind.term == term]

    # -- rules --------------------------------------------------------------

    def _on_token(self, token: Token, index: int):
        senses = self.lib.senses(token.word)
        sense_ids = []
        for entry in senses:
            node_id, created = self._ensure(EntityType(entity=token.entity, type=entry.sense))
            sense_ids.append(node_id)
            if created:
                self._agenda.append(("typed", token.entity, entry.sense))

        parents = list(sense_ids)
        if self.config.mention_enabled:
            mention_id, _ = self._ensure(Mention(entity=token.entity))
            parents.append(mention_id)

        word_id, _ = self._ensure(Word(word=token.word, entity=token.entity, index=index), parents)
        self._evidence[word_id] = True

    def _on_typed(self, entity: str, type_name: str):
        type_id = self._lookup(EntityType(entity=entity, type=type_name))

        for schema in triggers_for_type(self.lib, type_name):
            plan_id, _ = self._ensure(PlanInstance(entity=entity, schema_name=schema.name), [type_id])
            for slot in schema.slots:
                term = SlotTerm(
                    entity=entity,
                    schema_name=schema.name,
                    slot=slot.name,
                    function=self.lib.slot_function(schema.name, slot.name),
                )
                _, created = self._ensure(SlotType(term=term, type=slot.restriction), [plan_id])
                if created:
                    self._agenda.append(("slot", term, slot.restriction))

        for _, kind in self._nodes_of(SlotType):
            if kind.type == type_name and kind.term.entity != entity:
                self._link(kind.term, entity, type_name)

    def _on_slot(self, term: SlotTerm, type_name: str):
        for _, kind in self._nodes_of(EntityType):
            if kind.type == type_name and kind.entity != term.entity:
                self._link(term, kind.entity, type_name)

    def _link(self, term: SlotTerm, entity: str, type_name: str):
        """Hypothesize that entity fills term."""
        kind = Equality(term=term, entity=entity)
        if self._lookup(kind) is not None:
            return
        if len(self._equalities_for(term)) >= self.config.max_equality_candidates:
            raise NetworkError(
                f"slot term {term.label} exceeds {self.config.max_equality_candidates} equality candidates"
            )
        equality_id, _ = self._ensure(kind)
        slot_type_id = self._lookup(SlotType(term=term, type=type_name))
        entity_type_id = self._lookup(EntityType(entity=entity, type=type_name))
        self._add_parent(entity_type_id, equality_id)
        self._add_parent(entity_type_id, slot_type_id)
        self._agenda.append(("equal", term, entity))

    def _on_equal(self, term: SlotTerm, entity: str):
        equalities = self._equalities_for(term)
        if len(equalities) >= 2:
            unique_id, _ = self._ensure(SlotExclusivity(term=term))
            for equality_id in equalities:
                self._add_parent(unique_id, equality_id)
            self._evidence[unique_id] = True

        if self.config.mention_enabled:
            mention_id = self._lookup(Mention(entity=entity))
            self._add_parent(mention_id, self._lookup(Equality(term=term, entity=entity)))

    def _run(self):
        handlers = {
            "token": self._on_token,
            "typed": self._on_typed,
            "slot": self._on_slot,
            "equal": self._on_equal,
        }
        fired = 0
        while self._agenda:
            fact, *args = self._agenda.popleft()
            handlers[fact](*args)
            fired += 1
        logger.debug("agenda quiescent after %s firings, %s nodes", fired, len(self._kinds))

    # -- public API ---------------------------------------------------------

    def assert_token(self, word: str, entity: str) -> Set[int]:
        """Add one observed token and run the rules to quiescence.

        Re-asserting an identical token is a no-op.

        Returns:
            ids of the nodes created.

        Raises:
            NetworkError: on an unknown word, an entity already introduced by
                a different token, or too many equality candidates for one
                slot term. The session is left unchanged.
        """
        token = Token(word=word, entity=entity)
        if token in self.tokens:
            return set()
        if not self.lib.has_word(word):
            raise NetworkError(f'unknown word "{word}"')
        if any(t.entity == entity for t in self.tokens):
            raise NetworkError(f"duplicate entity id {entity}")

        saved = copy.deepcopy((self._kinds, self._parents, self._index, self._evidence))
        self._created = set()
        self._agenda.append(("token", token, len(self.tokens)))
        try:
            self._run()
        except Exception:
            self._kinds, self._parents, self._index, self._evidence = saved
            self._agenda.clear()
            raise
        self.tokens.append(token)
        return set(self._created)

    def quiesce(self) -> Set[int]:
        """Re-fire every rule over every existing fact; returns created ids."""
        self._created = set()
        for index, token in enumerate(self.tokens):
            self._agenda.append(("token", token, index))
        for _, kind in self._nodes_of(EntityType):
            self._agenda.append(("typed", kind.entity, kind.type))
        for _, kind in self._nodes_of(SlotType):
            self._agenda.append(("slot", kind.term, kind.type))
        for _, kind in self._nodes_of(Equality):
            self._agenda.append(("equal", kind.term, kind.entity))
        self._run()
        return set(self._created)

    def network(self) -> BayesNet:
        """Synthesize CPTs and freeze the network built so far."""
        if self._agenda:
            raise NetworkError("agenda is not quiescent")
        nodes = []
        for node_id, kind in sorted(self._kinds.items()):
            parents = tuple(self._parents[node_id])
            draft = Node(id=node_id, kind=kind, parents=parents)
            cpt = synth_cpt(draft, [self._kinds[p] for p in parents], self.lib, self.config)
            nodes.append(draft.model_copy(update={"cpt": cpt}))
        return BayesNet.from_nodes(nodes, dict(self._evidence))


def new_session(lib: PlanLibrary, cfg: Union[Config, Mapping]) -> Session:
    """Start an empty construction session.

    Raises:
        ConfigError: if cfg is invalid, or the word leak is not below every
            word probability in the lexicon.
    """
    if not isinstance(cfg, Config):
        cfg = Config.build(**dict(cfg))
    floor = lib.min_p_word()
    if floor is not None and not cfg.word_leak < floor:
        raise ConfigError(f"word_leak {cfg.word_leak:g} must be below the smallest p_word {floor:g}")
    return Session(lib, cfg)


def build_network(lib: PlanLibrary, story: Story, cfg: Union[Config, Mapping]) -> BayesNet:
    """Assert every story token in order and return the finished network."""
    session = new_session(lib, cfg)
    for token in story.tokens:
        session.assert_token(token.word, token.entity)
    return session.network()
