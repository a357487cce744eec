"""Plan library and story data model, plus the file loaders.

A library declares types with base rates, the words that can denote them,
and plan schemas: ways of doing a more general action, with typed slots.

Example:
    lib = load_library('''
        (library
          (type kill :prior 1e-4)
          (type rope :prior 1e-5)
          (word "kill" :sense kill :p 0.9)
          (word "rope" :sense rope :p 0.9)
          (plan hang :specializes kill :p 1e-3 (slot rope-of rope)))
    ''')
    story = load_story('(story (token "kill" k1) (token "rope" r2))', lib)
"""

import logging
from typing import Dict, Optional, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import LibraryError
from .sexpr import Number, SExpr, SList, String, Symbol, parse_sexpr


logger = logging.getLogger(__name__)


class TypeDef(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    prior: float = Field(gt=0.0, lt=1.0)


class LexEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    word: str
    sense: str
    p_word: float = Field(gt=0.0, le=1.0)


class SlotDef(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    restriction: str


class PlanSchema(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    specializes: str
    p_given_parent: float = Field(gt=0.0, lt=1.0)
    slots: Tuple[SlotDef, ...] = ()

    @model_validator(mode="after")
    def _unique_slots(self):
        names = [slot.name for slot in self.slots]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate slot name in plan {self.name}")
        return self

    def slot(self, name: str) -> SlotDef:
        for slot in self.slots:
            if slot.name == name:
                return slot
        raise KeyError(f"plan {self.name} has no slot {name}")


class PlanLibrary(BaseModel):
    """Types, lexicon and plan schemas. Immutable once built."""

    model_config = ConfigDict(frozen=True)

    types: Dict[str, TypeDef] = Field(default_factory=dict)
    lexicon: Tuple[LexEntry, ...] = ()
    schemas: Dict[str, PlanSchema] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _resolve(self):
        for name, typedef in self.types.items():
            if name != typedef.name:
                raise ValueError(f"type key {name} does not match {typedef.name}")

        seen = set()
        for entry in self.lexicon:
            if entry.sense not in self.types:
                raise ValueError(f'word "{entry.word}" names unknown sense {entry.sense}')
            if (entry.word, entry.sense) in seen:
                raise ValueError(f'duplicate word "{entry.word}" with sense {entry.sense}')
            seen.add((entry.word, entry.sense))

        for name, schema in self.schemas.items():
            if name != schema.name:
                raise ValueError(f"plan key {name} does not match {schema.name}")
            if name in self.types:
                raise ValueError(f"plan {name} collides with a type of the same name")
            if schema.specializes not in self.types:
                raise ValueError(f"plan {name} specializes unknown type {schema.specializes}")
            for slot in schema.slots:
                if slot.restriction not in self.types:
                    raise ValueError(
                        f"slot {slot.name} of plan {name} restricted to unknown type {slot.restriction}"
                    )

        cycle = self.dependency_cycle()
        if cycle:
            raise ValueError("cyclic type dependency: " + " -> ".join(cycle))
        return self

    def dependency_cycle(self) -> Optional[Tuple[str, ...]]:
        """Return a cycle in the specialized-type -> slot-type graph, if any.

        A cycle would let a plan hypothesis explain its own trigger, which
        makes the constructed network cyclic.
        """
        graph = nx.DiGraph()
        for schema in self.schemas.values():
            for slot in schema.slots:
                graph.add_edge(schema.specializes, slot.restriction)
        try:
            edges = nx.find_cycle(graph)
        except nx.NetworkXNoCycle:
            return None
        return tuple(u for u, _ in edges) + (edges[0][0],)

    def senses(self, word: str) -> Tuple[LexEntry, ...]:
        """Lexicon entries for word, sorted by sense."""
        return tuple(sorted((e for e in self.lexicon if e.word == word), key=lambda e: e.sense))

    def has_word(self, word: str) -> bool:
        return any(entry.word == word for entry in self.lexicon)

    def min_p_word(self) -> Optional[float]:
        if not self.lexicon:
            return None
        return min(entry.p_word for entry in self.lexicon)

    def slot_function(self, schema: str, slot: str) -> str:
        """Printed name of a slot function.

        Slot names shared by several schemas are qualified with the schema
        name so that slot-term labels stay unique.
        """
        owners = [s for s in self.schemas.values() if any(d.name == slot for d in s.slots)]
        if len(owners) > 1:
            return f"{schema}.{slot}"
        return slot


class Token(BaseModel):
    model_config = ConfigDict(frozen=True)

    word: str
    entity: str


class Story(BaseModel):
    """Ordered observation tokens; each token introduces one fresh entity."""

    model_config = ConfigDict(frozen=True)

    tokens: Tuple[Token, ...] = ()

    @model_validator(mode="after")
    def _fresh_entities(self):
        seen = set()
        for token in self.tokens:
            if token.entity in seen:
                raise ValueError(f"duplicate entity id {token.entity}")
            seen.add(token.entity)
        return self

    def __len__(self):
        return len(self.tokens)


def _require(lib: PlanLibrary, t: str):
    if t not in lib.types:
        raise KeyError(f"unknown type: {t}")


def triggers_for_type(lib: PlanLibrary, t: str) -> Tuple[PlanSchema, ...]:
    """Schemas that specialize type t, sorted by name.

    Raises:
        KeyError: if t is not a declared type.
    """
    _require(lib, t)
    return tuple(
        schema for _, schema in sorted(lib.schemas.items()) if schema.specializes == t
    )


def slots_accepting(lib: PlanLibrary, t: str) -> Tuple[Tuple[PlanSchema, SlotDef], ...]:
    """(schema, slot) pairs whose restriction is t, sorted by schema then slot.

    Raises:
        KeyError: if t is not a declared type.
    """
    _require(lib, t)
    pairs = []
    for _, schema in sorted(lib.schemas.items()):
        for slot in sorted(schema.slots, key=lambda d: d.name):
            if slot.restriction == t:
                pairs.append((schema, slot))
    return tuple(pairs)


# -- loaders ----------------------------------------------------------------


def _fail(message: str, form: SExpr):
    raise LibraryError(message, form.line, form.column)


def _name(form: SExpr, what: str) -> str:
    if not isinstance(form, Symbol) or form.name.startswith(":"):
        _fail(f"expected {what} name", form)
    return form.name


def _keywords(form: SList, start: int, expected: Tuple[str, ...]) -> Tuple[dict, int]:
    """Read `:key value` pairs from form[start:], in the declared order."""
    values = {}
    i = start
    for key in expected:
        if i + 1 >= len(form) or not isinstance(form[i], Symbol) or form[i].name != key:
            _fail(f"({form.head} ...) expects {key} <value>", form[i] if i < len(form) else form)
        values[key] = form[i + 1]
        i += 2
    return values, i


def _probability(form: SExpr, what: str) -> float:
    if not isinstance(form, Number):
        _fail(f"{what} must be a number", form)
    return float(form.value)


def _model(factory, form: SExpr, **fields):
    """Build a pydantic model, reporting failures at the form position."""
    try:
        return factory(**fields)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'value'}: {err['msg']}" for err in e.errors()
        )
        _fail(f"invalid {form.head}: {details}", form)


def _parse(text: str, head: str) -> SList:
    tree = parse_sexpr(text)
    if not isinstance(tree, SList) or tree.head != head:
        raise LibraryError(f"expected a ({head} ...) form", tree.line, tree.column)
    return tree


def _load_slot(form: SExpr, types: Dict[str, TypeDef]) -> SlotDef:
    if not isinstance(form, SList) or form.head != "slot" or len(form) != 3:
        _fail("expected (slot NAME TYPE)", form)
    restriction = _name(form[2], "type")
    if restriction not in types:
        _fail(f"slot {_name(form[1], 'slot')} restricted to unknown type {restriction}", form)
    return SlotDef(name=_name(form[1], "slot"), restriction=restriction)


def load_library(text: str) -> PlanLibrary:
    """Parse and validate a ``(library ...)`` form.

    Raises:
        SexprSyntaxError: if the text is not a well-formed s-expression.
        LibraryError: on unknown references, duplicates, out-of-range
            probabilities or a cyclic type dependency.
    """
    tree = _parse(text, "library")
    types: Dict[str, TypeDef] = {}
    lexicon = []
    schemas: Dict[str, PlanSchema] = {}
    words_seen = set()

    # types first, so declarations may appear in any order
    for form in tree.items[1:]:
        if not isinstance(form, SList):
            _fail("expected a declaration form", form)
        if form.head == "type":
            if len(form) != 4:
                _fail("expected (type NAME :prior NUMBER)", form)
            name = _name(form[1], "type")
            if name in types:
                _fail(f"duplicate type {name}", form)
            values, _ = _keywords(form, 2, (":prior",))
            types[name] = _model(TypeDef, form, name=name, prior=_probability(values[":prior"], "prior"))

    for form in tree.items[1:]:
        if form.head == "type":
            continue
        if form.head == "word":
            if len(form) != 6 or not isinstance(form[1], String):
                _fail('expected (word "STRING" :sense NAME :p NUMBER)', form)
            values, _ = _keywords(form, 2, (":sense", ":p"))
            sense = _name(values[":sense"], "sense")
            if sense not in types:
                _fail(f'word "{form[1].value}" names unknown sense {sense}', form)
            if (form[1].value, sense) in words_seen:
                _fail(f'duplicate word "{form[1].value}" with sense {sense}', form)
            words_seen.add((form[1].value, sense))
            lexicon.append(
                _model(LexEntry, form, word=form[1].value, sense=sense, p_word=_probability(values[":p"], "p"))
            )
        elif form.head == "plan":
            if len(form) < 6:
                _fail("expected (plan NAME :specializes NAME :p NUMBER slot*)", form)
            name = _name(form[1], "plan")
            if name in schemas:
                _fail(f"duplicate plan {name}", form)
            if name in types:
                _fail(f"plan {name} collides with a type of the same name", form)
            values, i = _keywords(form, 2, (":specializes", ":p"))
            parent = _name(values[":specializes"], "type")
            if parent not in types:
                _fail(f"plan {name} specializes unknown type {parent}", form)
            slots = [_load_slot(slot_form, types) for slot_form in form.items[i:]]
            if len({slot.name for slot in slots}) != len(slots):
                _fail(f"duplicate slot name in plan {name}", form)
            schemas[name] = _model(
                PlanSchema,
                form,
                name=name,
                specializes=parent,
                p_given_parent=_probability(values[":p"], "p"),
                slots=tuple(slots),
            )
        else:
            _fail(f"unknown declaration {form.head}", form)

    try:
        lib = PlanLibrary(types=types, lexicon=tuple(lexicon), schemas=schemas)
    except ValidationError as e:
        raise LibraryError(e.errors()[0]["msg"], tree.line, tree.column)

    logger.debug(
        "loaded library: %s types, %s words, %s plans", len(types), len(lexicon), len(schemas)
    )
    return lib


def load_story(text: str, lib: PlanLibrary) -> Story:
    """Parse a ``(story (token "word" id) ...)`` form against lib.

    Raises:
        SexprSyntaxError: if the text is not a well-formed s-expression.
        LibraryError: on unknown words or a duplicate entity id.
    """
    tree = _parse(text, "story")
    tokens = []
    entities = set()
    for form in tree.items[1:]:
        if (
            not isinstance(form, SList)
            or form.head != "token"
            or len(form) != 3
            or not isinstance(form[1], String)
        ):
            _fail('expected (token "WORD" ENTITY)', form)
        word = form[1].value
        entity = _name(form[2], "entity")
        if not lib.has_word(word):
            _fail(f'unknown word "{word}"', form)
        if entity in entities:
            _fail(f"duplicate entity id {entity}", form)
        entities.add(entity)
        tokens.append(Token(word=word, entity=entity))

    logger.debug("loaded story of %s tokens", len(tokens))
    return Story(tokens=tuple(tokens))
