"""Activity pattern templates.

Each pattern is a parametric temporal formula over placeholder symbols.
`instantiate` substitutes concrete symbols for the placeholders and parses
the result, so every template stays a single formatted string that reads
like the formula it produces.

The first four patterns speak about reaching places (the navigation
family); the rest constrain how arbitrary events may interleave.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..ltlf import Formula, parse

NAV_FAMILY = ("visit", "sequenced_visit", "ordered_visit", "strict_ordered_visit")


@dataclass(frozen=True)
class PatternSpec:
    """A named formula template with `arity` placeholder slots."""

    name: str
    arity: int
    template: str
    gloss: str

    def instantiate(self, symbols: tuple[str, ...]) -> Formula:
        if len(symbols) != self.arity:
            raise ValueError(
                f"pattern {self.name} takes {self.arity} symbols, got {len(symbols)}"
            )
        return parse(self.template.format(*symbols))


PATTERNS: dict[str, PatternSpec] = {
    spec.name: spec
    for spec in (
        PatternSpec(
            name="visit",
            arity=1,
            template="F {0}",
            gloss="eventually reach the target",
        ),
        PatternSpec(
            name="sequenced_visit",
            arity=2,
            template="F ({0} & F {1})",
            gloss="reach the first target, then the second",
        ),
        PatternSpec(
            name="ordered_visit",
            arity=2,
            template="(!{1} U {0}) & F {1}",
            gloss="reach both targets, never the second before the first",
        ),
        PatternSpec(
            name="strict_ordered_visit",
            arity=2,
            template="(!{0} & !{1}) U ({0} & X ((!{0} & !{1}) U {1}))",
            gloss="reach the targets in order, each exactly once on the way",
        ),
        PatternSpec(
            name="global_avoidance",
            arity=1,
            template="G !{0}",
            gloss="the event never happens",
        ),
        PatternSpec(
            name="bound_delay",
            arity=2,
            template="G ({1} <-> X {0})",
            gloss="the trigger happens exactly one step before the event",
        ),
        PatternSpec(
            name="delayed_reaction",
            arity=2,
            template="G ({0} -> F {1})",
            gloss="every trigger is eventually answered",
        ),
        PatternSpec(
            name="prompt_reaction",
            arity=2,
            template="G ({0} -> X {1})",
            gloss="every trigger is answered at the next step",
        ),
        PatternSpec(
            name="wait",
            arity=2,
            template="{0} U {1}",
            gloss="hold the first condition until the second arrives",
        ),
        PatternSpec(
            name="past_avoidance",
            arity=2,
            template="(!{0} U {1}) | G !{0}",
            gloss="the event stays forbidden until the release",
        ),
        PatternSpec(
            name="future_avoidance",
            arity=2,
            template="G ({0} -> WX (G !{1}))",
            gloss="once the trigger happens the event is forbidden afterwards",
        ),
    )
}


def instantiate(name: str, symbols: tuple[str, ...]) -> Formula:
    if name not in PATTERNS:
        raise KeyError(f"unknown pattern {name!r}")
    return PATTERNS[name].instantiate(symbols)
