"""Symbol alphabet and the landmark records that anchor grounding.

A landmark couples a formula symbol with the language used to talk about it
and the PDDL label it stands for. The file format is plain structured text:
records separated by blank lines, `field: value` lines inside a record,
aliases separated by pipes, `#` comments ignored.

Symbols fall into three classes, inferred from what they bind to: location
symbols bind robot-position fluents, condition symbols bind other fluents,
action symbols bind bare action-schema names.
"""

from __future__ import annotations

from dataclasses import dataclass


class LandmarkError(ValueError):
    pass


@dataclass(frozen=True)
class Landmark:
    identifier: str
    description: str
    aliases: tuple[str, ...] = ()
    binds: str = ""

    def __post_init__(self):
        if not self.identifier.strip():
            raise LandmarkError("landmark without identifier")
        if not self.description.strip():
            raise LandmarkError(f"landmark {self.identifier} without description")

    @property
    def surface_texts(self) -> tuple[str, ...]:
        """Everything this landmark can be referred to as."""
        plain = self.identifier.replace("_", " ")
        return (self.description, plain) + self.aliases


def parse_landmarks(text: str) -> tuple[Landmark, ...]:
    landmarks: list[Landmark] = []
    fields: dict[str, str] = {}

    def flush():
        if not fields:
            return
        landmarks.append(Landmark(
            identifier=fields.get("identifier", ""),
            description=fields.get("description", ""),
            aliases=tuple(
                a.strip() for a in fields.get("aliases", "").split("|") if a.strip()
            ),
            binds=fields.get("binds", ""),
        ))
        fields.clear()

    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            flush()
            continue
        if ":" not in line:
            raise LandmarkError(f"malformed landmark line: {raw!r}")
        key, _, value = line.partition(":")
        key = key.strip()
        if key in fields:
            raise LandmarkError(f"duplicate field {key!r} in one record")
        fields[key] = value.strip()
    flush()

    seen = set()
    for lm in landmarks:
        if lm.identifier in seen:
            raise LandmarkError(f"duplicate landmark {lm.identifier}")
        seen.add(lm.identifier)
    return tuple(landmarks)


def _is_location(lm: Landmark) -> bool:
    return lm.binds.startswith("(robot-at ")


def _is_action(lm: Landmark) -> bool:
    return bool(lm.binds) and not lm.binds.startswith("(")


@dataclass(frozen=True)
class SymbolAlphabet:
    """The symbols formulas may mention, split by what they describe."""

    locations: tuple[str, ...]
    conditions: tuple[str, ...]
    actions: tuple[str, ...]
    landmarks: tuple[Landmark, ...] = ()

    def __post_init__(self):
        classes = [set(self.locations), set(self.conditions), set(self.actions)]
        total = sum(len(c) for c in classes)
        if len(set().union(*classes)) != total:
            raise LandmarkError("symbol classes overlap")

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.locations + self.conditions + self.actions

    @property
    def location_names(self) -> tuple[str, ...]:
        """Underlying location objects, read off the position bindings."""
        names = []
        for lm in self.landmarks:
            if _is_location(lm):
                names.append(lm.binds.strip("()").split()[1])
        return tuple(names)

    def landmark(self, identifier: str) -> Landmark:
        for lm in self.landmarks:
            if lm.identifier == identifier:
                return lm
        raise KeyError(identifier)


def build_alphabet(landmarks: tuple[Landmark, ...]) -> SymbolAlphabet:
    locations, conditions, actions = [], [], []
    for lm in landmarks:
        if _is_location(lm):
            locations.append(lm.identifier)
        elif _is_action(lm):
            actions.append(lm.identifier)
        else:
            conditions.append(lm.identifier)
    return SymbolAlphabet(
        locations=tuple(locations),
        conditions=tuple(conditions),
        actions=tuple(actions),
        landmarks=landmarks,
    )
