"""Emit parseable PDDL text for domains and problems."""

from __future__ import annotations

from .model import ActionSchema, FondDomain, FondProblem, Literal


def _literal(lit: Literal) -> str:
    return str(lit)


def _typed_block(pairs) -> str:
    return " ".join(f"{name} - {ty}" for name, ty in pairs)


def _conjunction(literals) -> str:
    if not literals:
        return "(and)"
    if len(literals) == 1:
        return _literal(literals[0])
    return "(and " + " ".join(_literal(l) for l in literals) + ")"


def _requirements(domain: FondDomain) -> list[str]:
    reqs = [":strips"]
    if domain.types:
        reqs.append(":typing")
    lits = [l for a in domain.actions for l in a.precondition]
    if any(l.negated for l in lits):
        reqs.append(":negative-preconditions")
    if any(l.predicate == "=" for l in lits):
        reqs.append(":equality")
    if any(len(a.outcomes) > 1 for a in domain.actions):
        reqs.append(":non-deterministic")
    return reqs


def _action(a: ActionSchema) -> str:
    lines = [f"  (:action {a.name}"]
    lines.append(f"   :parameters ({_typed_block(a.parameters)})")
    lines.append(f"   :precondition {_conjunction(a.precondition)}")
    if len(a.outcomes) == 1:
        effect = _conjunction(a.outcomes[0])
    else:
        effect = "(oneof " + " ".join(_conjunction(o) for o in a.outcomes) + ")"
    lines.append(f"   :effect {effect})")
    return "\n".join(lines)


def write_domain(domain: FondDomain) -> str:
    parts = [f"(define (domain {domain.name})"]
    parts.append(f"  (:requirements {' '.join(_requirements(domain))})")
    if domain.types:
        parts.append(f"  (:types {_typed_block(domain.types)})")
    preds = " ".join(
        f"({p.name}{''.join(f' {v} - {t}' for v, t in p.parameters)})"
        for p in domain.predicates
    )
    parts.append(f"  (:predicates {preds})")
    parts.extend(_action(a) for a in domain.actions)
    return "\n".join(parts) + ")\n"


def write_problem(problem: FondProblem) -> str:
    parts = [f"(define (problem {problem.name})"]
    parts.append(f"  (:domain {problem.domain_name})")
    if problem.objects:
        parts.append(f"  (:objects {_typed_block(problem.objects)})")
    init = " ".join(_literal(l) for l in problem.init)
    parts.append(f"  (:init {init})")
    if problem.goal is not None:
        parts.append(f"  (:goal {_conjunction(problem.goal)})")
    return "\n".join(parts) + ")\n"
