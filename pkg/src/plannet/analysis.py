"""Quantitative behaviour of the recognizer.

Covers the closed-form equality-fragment ratio, sweeps of the equality
prior E (the "knob"), the mention lift, recognition reports and the
elimination-vs-enumeration cross-check.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from parse import parse
from pydantic import BaseModel, ConfigDict, Field

from .config import Config
from .errors import ConfigError, GridSpecError, InferenceError, NetworkError, NetworkTooLargeError
from .inference import Enumeration, InferenceEngine, VariableElimination
from .inference.enumeration import MAX_NODES
from .library import PlanLibrary, Story
from .network import (
    BayesNet,
    EntityType,
    Equality,
    Mention,
    Node,
    PlanInstance,
    SlotTerm,
    SlotType,
)
from .session import build_network


logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-9


# -- the three-node equality fragment ---------------------------------------


def _check_probability(name: str, value: float):
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value}")


def fragment_ratio(p_e: float, p_r: float, p_k: float) -> float:
    """P(k|r) / P(k) for the fragment e -> r <- k.

    e is the equality hypothesis with prior p_e, k the slot-type node with
    prior p_k, r the observed entity's type with P(r|e,k)=1, P(r|e,-k)=0 and
    P(r|-e,.)=p_r; e and k are independent a priori.

    Raises:
        InferenceError: if P(r) is zero.
    """
    for name, value in (("p_e", p_e), ("p_r", p_r), ("p_k", p_k)):
        _check_probability(name, value)
    denominator = p_e * p_k + (1.0 - p_e) * p_r
    if denominator <= 0.0:
        raise InferenceError("P(r) is zero: the fragment ratio is undefined")
    return (p_e + (1.0 - p_e) * p_r) / denominator


def fragment_network(p_e: float, p_r: float, p_k: float) -> Tuple[BayesNet, Dict[str, int]]:
    """The literal fragment as a network; returns (net, {"e","k","r"} ids)."""
    term = SlotTerm(entity="k1", schema_name="hang", slot="rope-of", function="rope-of")
    nodes = [
        Node.root(0, Equality(term=term, entity="r2"), p_e),
        Node.root(1, SlotType(term=term, type="rope"), p_k),
        # parents (e, k), rows 00 01 10 11
        Node.with_table(2, EntityType(entity="r2", type="rope"), [0, 1], [p_r, p_r, 0.0, 1.0]),
    ]
    return BayesNet.from_nodes(nodes), {"e": 0, "k": 1, "r": 2}


def fragment_ratio_by_inference(
    p_e: float, p_r: float, p_k: float, engine: Optional[InferenceEngine] = None
) -> float:
    """fragment_ratio computed by exact inference on fragment_network."""
    if p_k <= 0.0:
        raise InferenceError("P(k) is zero: the fragment ratio is undefined")
    engine = engine or VariableElimination()
    net, ids = fragment_network(p_e, p_r, p_k)
    return engine.posterior(net, {ids["r"]: True}, ids["k"]) / p_k


# -- mention lift ---------------------------------------------------------


def mention_fragment_network(cfg: Config) -> Tuple[BayesNet, Dict[str, int]]:
    """Isolated Equality -> Mention pair; returns (net, {"equality","mention"} ids)."""
    term = SlotTerm(entity="k1", schema_name="hang", slot="rope-of", function="rope-of")
    nodes = [
        Node.root(0, Equality(term=term, entity="r2"), cfg.equality_prior),
        Node.with_table(
            1,
            Mention(entity="r2"),
            [0],
            [cfg.mention_base, cfg.mention_base * cfg.mention_lift],
        ),
    ]
    return BayesNet.from_nodes(nodes), {"equality": 0, "mention": 1}


def lift_on(
    net: BayesNet, equality: int, mention: int, engine: Optional[InferenceEngine] = None
) -> float:
    """P(eq | evidence, mention) / P(eq | evidence), over all of the network's evidence."""
    engine = engine or VariableElimination()
    evidence = dict(net.evidence)
    base = engine.posterior(net, evidence, equality)
    if base <= 0.0:
        raise InferenceError(f"{net.node(equality).label} has zero probability")
    lifted = engine.posterior(net, {**evidence, mention: True}, equality)
    return lifted / base


def isolated_mention_lift(cfg: Config, engine: Optional[InferenceEngine] = None) -> float:
    """P(eq | mention) / P(eq) on the two-node fragment."""
    net, ids = mention_fragment_network(cfg)
    return lift_on(net, ids["equality"], ids["mention"], engine=engine)


def mention_lifts(
    lib: PlanLibrary, story: Story, cfg: Config, entity: str, engine: Optional[InferenceEngine] = None
) -> Dict[str, float]:
    """Mention lift of every equality hypothesis naming entity, by label.

    The entity's word stays observed. Its use already makes the mention
    likely, so on a story the lift falls well short of the isolated
    k/(1 + E(k-1)) and depends on the rest of the evidence.

    Raises:
        ConfigError: if mention is disabled.
        NetworkError: if the entity is unknown or fills no hypothesized slot.
    """
    if not cfg.mention_enabled:
        raise ConfigError("mention lift needs a config with mention enabled")
    if entity not in {token.entity for token in story.tokens}:
        raise NetworkError(f"unknown entity {entity}")
    net = build_network(lib, story, cfg)
    equalities = [n for n in net.of_kind(Equality) if n.kind.entity == entity]
    if not equalities:
        raise NetworkError(f"entity {entity} has no equality hypotheses")
    mention = next(n.id for n in net.of_kind(Mention) if n.kind.entity == entity)
    lifts = {node.label: lift_on(net, node.id, mention, engine=engine) for node in equalities}
    logger.debug("mention lifts for %s: %s", entity, lifts)
    return lifts


def mention_lift(
    lib: PlanLibrary, story: Story, cfg: Config, entity: str, engine: Optional[InferenceEngine] = None
) -> float:
    """Largest mention lift over the entity's equality hypotheses."""
    return max(mention_lifts(lib, story, cfg, entity, engine).values())


# -- sweeping the equality prior ------------------------------------------


class SweepRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    equality_prior: float
    query: str
    posterior: float = Field(ge=0.0, le=1.0)


def grid_from_spec(spec: str) -> List[float]:
    """Expand ``start:stop:steps:log|lin`` into grid values.

    Raises:
        GridSpecError: on malformed specs, non-positive log bounds or
            values outside [0, 1].
    """
    fields = parse("{start:g}:{stop:g}:{steps:d}:{scale:w}", spec.strip())
    if fields is None:
        raise GridSpecError(f"bad grid spec {spec!r}; expected start:stop:steps:log|lin")
    start, stop, steps, scale = fields["start"], fields["stop"], fields["steps"], fields["scale"]
    if steps < 1:
        raise GridSpecError(f"grid needs at least one step, got {steps}")
    if not (0.0 <= start <= stop <= 1.0):
        raise GridSpecError(f"grid bounds must satisfy 0 <= start <= stop <= 1, got {start}, {stop}")
    if steps > 1 and start == stop:
        raise GridSpecError("a grid with several steps needs start < stop")
    if scale == "lin":
        values = np.linspace(start, stop, steps)
    elif scale == "log":
        if start <= 0.0:
            raise GridSpecError("a log grid needs start > 0")
        values = np.geomspace(start, stop, steps)
    else:
        raise GridSpecError(f"unknown grid scale {scale!r}; use log or lin")
    return [float(v) for v in values]


def _plan_query(net: BayesNet, label: str) -> Node:
    plans = net.of_kind(PlanInstance)
    for node in plans:
        if node.label == label:
            return node
    available = ", ".join(sorted(node.label for node in plans)) or "none"
    raise NetworkError(f"query {label} matches no plan hypothesis; available: {available}")


def sweep_equality_prior(
    lib: PlanLibrary,
    story: Story,
    cfg: Config,
    grid: Sequence[float],
    query: str,
    workers: int = 1,
    engine: Optional[InferenceEngine] = None,
) -> List[SweepRow]:
    """Posterior of a plan hypothesis at each equality prior in grid.

    Every grid point rebuilds the network with that E. Points may be
    evaluated on a thread pool; rows always come back in grid order.

    Raises:
        ConfigError: if grid values are outside [0, 1] or not strictly increasing.
        NetworkError: if query names no PlanInstance node.
    """
    grid = [float(e) for e in grid]
    if any(not 0.0 <= e <= 1.0 for e in grid):
        raise ConfigError("equality prior grid values must lie in [0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("equality prior grid must be strictly increasing")
    engine = engine or VariableElimination()

    # fail fast on a bad label; structure does not depend on E
    _plan_query(build_network(lib, story, cfg), query)

    def point(e: float) -> SweepRow:
        net = build_network(lib, story, cfg.override(equality_prior=e))
        p = engine.posterior(net, net.evidence, _plan_query(net, query).id)
        logger.debug("E=%g %s=%g", e, query, p)
        return SweepRow(equality_prior=e, query=query, posterior=p)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(point, grid))
    return [point(e) for e in grid]


def loglog_slope(rows: Sequence[SweepRow]) -> float:
    """Least-squares slope of log(posterior) against log(E)."""
    xs = [math.log(r.equality_prior) for r in rows]
    ys = [math.log(r.posterior) for r in rows]
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


# -- reports --------------------------------------------------------------


class ReportRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    kind: str
    posterior: float = Field(ge=0.0, le=1.0)


class RecognitionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: str
    config: Config
    rows: Tuple[ReportRow, ...]


REPORTED = (PlanInstance, Equality)
REPORTED_ALL = (PlanInstance, Equality, EntityType, SlotType, Mention)


def recognize(
    lib: PlanLibrary,
    story: Story,
    cfg: Config,
    mode: str = "life",
    include_all: bool = False,
    engine: Optional[InferenceEngine] = None,
) -> RecognitionReport:
    """Posteriors of the plan and equality hypotheses, sorted by label."""
    engine = engine or VariableElimination()
    net = build_network(lib, story, cfg)
    nodes = net.of_kind(*(REPORTED_ALL if include_all else REPORTED))
    posteriors = engine.marginals(net, net.evidence, [n.id for n in nodes])
    rows = sorted(
        (ReportRow(label=n.label, kind=n.kind.kind, posterior=posteriors[n.id]) for n in nodes),
        key=lambda row: row.label,
    )
    for row in rows:
        if row.posterior in (0.0, 1.0):
            logger.warning("%s has posterior exactly %g", row.label, row.posterior)
    return RecognitionReport(mode=mode, config=cfg, rows=tuple(rows))


class OracleRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    elimination: float
    enumeration: float

    @property
    def difference(self) -> float:
        return abs(self.elimination - self.enumeration)


def oracle_table(net: BayesNet) -> List[OracleRow]:
    """Elimination vs enumeration for every plan and equality node."""
    if len(net) > MAX_NODES:
        raise NetworkTooLargeError(
            f"network has {len(net)} nodes; the enumeration oracle is capped at {MAX_NODES}"
        )
    nodes = sorted(net.of_kind(*REPORTED), key=lambda n: n.label)
    ids = [n.id for n in nodes]
    elimination = VariableElimination().marginals(net, net.evidence, ids)
    enumeration = Enumeration().marginals(net, net.evidence, ids)
    return [
        OracleRow(label=n.label, elimination=elimination[n.id], enumeration=enumeration[n.id])
        for n in nodes
    ]


def oracle_agrees(rows: Sequence[OracleRow], tolerance: float = ORACLE_TOLERANCE) -> bool:
    return all(row.difference <= tolerance for row in rows)
