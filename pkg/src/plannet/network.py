"""Bayesian network model: node kinds, CPT synthesis and DOT export.

Node kinds follow the plan-recognition reading of a story:

    (kill k1)               EntityType   entity k1 is a killing
    (hang k1)               PlanInstance k1 is a hanging, a way of killing
    (rope (rope-of k1))     SlotType     whatever fills rope-of is a rope
    (= (rope-of k1) r2)     Equality     r2 is that rope
    (word "rope" r2)        Word         the word used for r2 (evidence)
    (mention r2)            Mention      the author chose to mention r2
    (unique (rope-of k1))   SlotExclusivity  one filler per slot term (evidence)
"""

import itertools
import logging
from typing import Annotated, Dict, Iterable, List, Literal, Optional, Sequence, Tuple, Union

import graphviz
import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import Config
from .errors import NetworkError
from .factor import Factor
from .library import PlanLibrary


logger = logging.getLogger(__name__)

ROW_TOLERANCE = 1e-12


class SlotTerm(BaseModel):
    """An unevaluated slot application such as (rope-of k1).

    The plan instance is identified by (entity, schema); ``function`` is the
    printed slot function name.
    """

    model_config = ConfigDict(frozen=True)

    entity: str
    schema_name: str
    slot: str
    function: str

    @property
    def label(self) -> str:
        return f"({self.function} {self.entity})"


class EntityType(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["entity-type"] = "entity-type"
    entity: str
    type: str

    @property
    def label(self) -> str:
        return f"({self.type} {self.entity})"


class PlanInstance(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["plan-instance"] = "plan-instance"
    entity: str
    schema_name: str

    @property
    def label(self) -> str:
        return f"({self.schema_name} {self.entity})"


class SlotType(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["slot-type"] = "slot-type"
    term: SlotTerm
    type: str

    @property
    def label(self) -> str:
        return f"({self.type} {self.term.label})"


class Equality(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["equality"] = "equality"
    term: SlotTerm
    entity: str

    @property
    def label(self) -> str:
        return f"(= {self.term.label} {self.entity})"


class Word(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["word"] = "word"
    word: str
    entity: str
    index: int = Field(default=0, ge=0)

    @property
    def label(self) -> str:
        return f'(word "{self.word}" {self.entity})'


class Mention(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["mention"] = "mention"
    entity: str

    @property
    def label(self) -> str:
        return f"(mention {self.entity})"


class SlotExclusivity(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["slot-exclusivity"] = "slot-exclusivity"
    term: SlotTerm

    @property
    def label(self) -> str:
        return f"(unique {self.term.label})"


NodeKind = Annotated[
    Union[EntityType, PlanInstance, SlotType, Equality, Word, Mention, SlotExclusivity],
    Field(discriminator="kind"),
]


def identity(kind) -> tuple:
    """Key identifying a node independently of creation order.

    Word nodes are keyed by entity, not by token position.
    """
    if isinstance(kind, Word):
        return ("word", kind.entity)
    return (kind.kind, kind.label)


class Node(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    id: int = Field(ge=0)
    kind: NodeKind
    parents: Tuple[int, ...] = ()
    cpt: Optional[Factor] = None

    @property
    def label(self) -> str:
        return self.kind.label

    @classmethod
    def root(cls, id: int, kind, prior: float) -> "Node":
        """A parentless node with P(true) = prior."""
        return cls(id=id, kind=kind, cpt=Factor((id,), [1.0 - prior, prior]))

    @classmethod
    def with_table(cls, id: int, kind, parents: Sequence[int], p_true: Sequence[float]) -> "Node":
        """A node whose CPT gives P(true) per parent assignment, row-major."""
        parents = tuple(parents)
        p_true = np.asarray(p_true, dtype=np.float64)
        values = np.stack([1.0 - p_true, p_true], axis=-1)
        return cls(id=id, kind=kind, parents=parents, cpt=Factor(parents + (id,), values))


class BayesNet(BaseModel):
    """A finalized network; nodes sorted by id."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nodes: Tuple[Node, ...] = ()
    evidence: Dict[int, bool] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self):
        ids = [node.id for node in self.nodes]
        if ids != sorted(set(ids)):
            raise ValueError("node ids must be unique and sorted")
        known = set(ids)
        for node in self.nodes:
            if node.cpt is None:
                raise ValueError(f"node {node.id} {node.label} has no CPT")
            if node.cpt.scope != node.parents + (node.id,):
                raise ValueError(f"CPT scope of node {node.id} must be its parents then itself")
            missing = set(node.parents) - known
            if missing:
                raise ValueError(f"node {node.id} has unknown parents {sorted(missing)}")
            rows = node.cpt.row_sums()
            if np.any(np.abs(rows - 1.0) > ROW_TOLERANCE):
                raise ValueError(f"CPT rows of node {node.id} {node.label} do not sum to 1")
        bad = set(self.evidence) - known
        if bad:
            raise ValueError(f"evidence on unknown nodes {sorted(bad)}")
        if not nx.is_directed_acyclic_graph(self.graph()):
            raise ValueError("network has a directed cycle")
        return self

    @classmethod
    def from_nodes(cls, nodes: Iterable[Node], evidence: Optional[Dict[int, bool]] = None) -> "BayesNet":
        """Validate hand-built nodes into a network.

        Raises:
            NetworkError: on cycles, bad CPTs or dangling references.
        """
        try:
            return cls(nodes=tuple(sorted(nodes, key=lambda n: n.id)), evidence=dict(evidence or {}))
        except ValueError as e:
            raise NetworkError(str(e)) from None

    def __len__(self):
        return len(self.nodes)

    def node(self, node_id: int) -> Node:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(f"no node {node_id}")

    def graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(node.id for node in self.nodes)
        graph.add_edges_from((p, node.id) for node in self.nodes for p in node.parents)
        return graph

    def factors(self) -> List[Factor]:
        return [node.cpt for node in self.nodes]

    def of_kind(self, *kinds: type) -> List[Node]:
        return [node for node in self.nodes if isinstance(node.kind, kinds)]

    def labels(self) -> Dict[str, int]:
        return {node.label: node.id for node in self.nodes}

    def find(self, label: str) -> Node:
        """Node with the given label.

        Raises:
            NetworkError: listing the available labels when none match.
        """
        for node in self.nodes:
            if node.label == label:
                return node
        available = ", ".join(sorted(self.labels()))
        raise NetworkError(f"no node labelled {label}; available: {available}")


def _p_word(lib: PlanLibrary, word: str, sense: str) -> float:
    for entry in lib.senses(word):
        if entry.sense == sense:
            return entry.p_word
    raise NetworkError(f'word "{word}" has no sense {sense}')


def _row_rule(kind, parent_kinds: Sequence, lib: PlanLibrary, cfg: Config):
    """Return a function mapping a parent assignment to P(true)."""
    if isinstance(kind, EntityType):
        prior = lib.types[kind.type].prior
        pairs = []
        for i, parent in enumerate(parent_kinds):
            if isinstance(parent, Equality):
                partner = [
                    j
                    for j, other in enumerate(parent_kinds)
                    if isinstance(other, SlotType) and other.term == parent.term
                ]
                if len(partner) != 1:
                    raise NetworkError(f"{parent.label} has no paired slot type under {kind.label}")
                pairs.append((i, partner[0]))

        def entity_type(row):
            filled = [k for e, k in pairs if row[e]]
            if not filled:
                return prior
            if len(filled) == 1:
                return float(row[filled[0]])
            return float(any(row[k] for k in filled))

        return entity_type

    if isinstance(kind, PlanInstance):
        p = lib.schemas[kind.schema_name].p_given_parent
        return lambda row: p if row[0] else 0.0

    if isinstance(kind, SlotType):
        prior = lib.types[kind.type].prior
        return lambda row: 1.0 if row[0] else prior

    if isinstance(kind, Equality):
        return lambda row: cfg.equality_prior

    if isinstance(kind, Word):
        senses = []
        mention = None
        for i, parent in enumerate(parent_kinds):
            if isinstance(parent, Mention):
                mention = i
            else:
                senses.append((i, _p_word(lib, kind.word, parent.type)))

        def word(row):
            if mention is not None and not row[mention]:
                return cfg.word_leak
            used = [p for i, p in senses if row[i]]
            return max(used) if used else cfg.word_leak

        return word

    if isinstance(kind, Mention):
        lifted = cfg.mention_base * cfg.mention_lift
        return lambda row: lifted if any(row) else cfg.mention_base

    if isinstance(kind, SlotExclusivity):
        return lambda row: 1.0 if sum(row) <= 1 else 0.0

    raise NetworkError(f"no CPT rule for {kind!r}")


def synth_cpt(node: Node, parent_kinds: Sequence, lib: PlanLibrary, cfg: Config) -> Factor:
    """Build the CPT of node from its kind and its parents' kinds.

    The returned factor has scope ``node.parents + (node.id,)``.
    """
    if len(parent_kinds) != len(node.parents):
        raise NetworkError(f"{node.label}: {len(node.parents)} parents but {len(parent_kinds)} kinds")
    rule = _row_rule(node.kind, parent_kinds, lib, cfg)
    p_true = [rule(row) for row in itertools.product((0, 1), repeat=len(node.parents))]
    p_true = np.asarray(p_true, dtype=np.float64)
    values = np.stack([1.0 - p_true, p_true], axis=-1)
    return Factor(node.parents + (node.id,), values)


def to_dot(net: BayesNet) -> str:
    """Render the network as a DOT digraph, nodes in id order.

    Evidence nodes get a double border.
    """
    dot = graphviz.Digraph("g")
    for node in net.nodes:
        attrs = {"label": node.label}
        if isinstance(node.kind, Word):
            attrs["shape"] = "box"
        if node.id in net.evidence:
            attrs["peripheries"] = "2"
        dot.node(f"n{node.id}", **attrs)
    for node in net.nodes:
        for parent in node.parents:
            # ids are plain n<id>, no quoting needed
            dot.body.append(f"\tn{parent} -> n{node.id};\n")
    return dot.source
