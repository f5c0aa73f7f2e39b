"""Parser for the supported FOND subset of PDDL.

Supported requirements: :strips :typing :non-deterministic, plus
:negative-preconditions and :equality. `oneof` may appear only as the
top-level effect form; directly nested `oneof`s are flattened. Conditional,
quantified, disjunctive, and numeric constructs are rejected by name.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ActionSchema, FondDomain, FondProblem, Literal, Predicate, ROOT_TYPE,
)

_SUPPORTED_REQUIREMENTS = {
    ":strips", ":typing", ":non-deterministic",
    ":negative-preconditions", ":equality",
}


class PddlSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class _Symbol:
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class _Node:
    items: tuple
    line: int
    column: int

    def head(self) -> str:
        if self.items and isinstance(self.items[0], _Symbol):
            return self.items[0].text.lower()
        return ""


def _tokenize(text: str):
    line, col = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            col += 1
            i += 1
            continue
        if c in "()":
            yield c, line, col
            col += 1
            i += 1
            continue
        start = i
        start_col = col
        while i < len(text) and not text[i].isspace() and text[i] not in "();":
            i += 1
            col += 1
        yield text[start:i], line, start_col
    yield "", line, col  # end marker


def _parse_sexpr(text: str) -> _Node:
    tokens = list(_tokenize(text))
    pos = 0

    def parse_one():
        nonlocal pos
        tok, line, col = tokens[pos]
        if tok == "":
            raise PddlSyntaxError("unexpected end of input", line, col)
        if tok == ")":
            raise PddlSyntaxError("unexpected ')'", line, col)
        if tok == "(":
            pos += 1
            items = []
            while True:
                t, l, c = tokens[pos]
                if t == "":
                    raise PddlSyntaxError("missing ')'", l, c)
                if t == ")":
                    pos += 1
                    return _Node(tuple(items), line, col)
                items.append(parse_one())
        pos += 1
        return _Symbol(tok, line, col)

    node = parse_one()
    tok, line, col = tokens[pos]
    if tok != "":
        raise PddlSyntaxError(f"trailing content {tok!r}", line, col)
    if not isinstance(node, _Node):
        raise PddlSyntaxError("expected a parenthesized form", node.line, node.column)
    return node


def _expect_symbol(item, what: str) -> _Symbol:
    if not isinstance(item, _Symbol):
        raise PddlSyntaxError(f"expected {what}", item.line, item.column)
    return item


def _typed_list(items, what: str) -> list[tuple[str, str]]:
    """Parse `a b - t c d - u e` into (name, type) pairs; untyped means object."""
    out: list[tuple[str, str]] = []
    pending: list[_Symbol] = []
    i = 0
    while i < len(items):
        sym = _expect_symbol(items[i], what)
        if sym.text == "-":
            if not pending:
                raise PddlSyntaxError("dangling '-' in typed list", sym.line, sym.column)
            if i + 1 >= len(items):
                raise PddlSyntaxError("missing type after '-'", sym.line, sym.column)
            ty = _expect_symbol(items[i + 1], "type name")
            out.extend((p.text.lower(), ty.text.lower()) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(sym)
        i += 1
    out.extend((p.text.lower(), ROOT_TYPE) for p in pending)
    return out


def _parse_literal(node, *, allow_negation: bool) -> Literal:
    if not isinstance(node, _Node) or not node.items:
        raise PddlSyntaxError(
            "expected a predicate application",
            getattr(node, "line", 0), getattr(node, "column", 0),
        )
    head = node.head()
    if head == "not":
        if not allow_negation:
            raise PddlSyntaxError("negation not allowed here", node.line, node.column)
        if len(node.items) != 2:
            raise PddlSyntaxError("'not' takes one argument", node.line, node.column)
        inner = _parse_literal(node.items[1], allow_negation=False)
        return Literal(inner.predicate, inner.args, negated=True)
    parts = [_expect_symbol(it, "predicate or argument") for it in node.items]
    return Literal(parts[0].text.lower(), tuple(p.text.lower() for p in parts[1:]))


_REJECTED_EFFECT_HEADS = {
    "when": "conditional effects",
    "forall": "quantified effects",
    "exists": "quantified conditions",
    "increase": "numeric fluents",
    "decrease": "numeric fluents",
    "assign": "numeric fluents",
}


def _conjunction(node, *, context: str) -> tuple[Literal, ...]:
    if isinstance(node, _Node) and node.head() in _REJECTED_EFFECT_HEADS:
        raise PddlSyntaxError(
            f"unsupported feature: {_REJECTED_EFFECT_HEADS[node.head()]}",
            node.line, node.column,
        )
    if isinstance(node, _Node) and node.head() == "or":
        raise PddlSyntaxError(
            "unsupported feature: disjunctive conditions", node.line, node.column
        )
    if isinstance(node, _Node) and node.head() == "oneof":
        raise PddlSyntaxError(
            f"unsupported feature: oneof nested in {context}", node.line, node.column
        )
    if isinstance(node, _Node) and node.head() == "and":
        out = []
        for child in node.items[1:]:
            out.extend(_conjunction(child, context=context))
        return tuple(out)
    if isinstance(node, _Node) and not node.items:
        return ()
    return (_parse_literal(node, allow_negation=True),)


def _parse_effect(node) -> tuple[tuple[Literal, ...], ...]:
    if isinstance(node, _Node) and node.head() == "oneof":
        outcomes: list[tuple[Literal, ...]] = []
        for child in node.items[1:]:
            if isinstance(child, _Node) and child.head() == "oneof":
                outcomes.extend(_parse_effect(child))  # flatten directly nested
            else:
                outcomes.append(_conjunction(child, context="an outcome"))
        if not outcomes:
            raise PddlSyntaxError("'oneof' needs at least one outcome", node.line, node.column)
        return tuple(outcomes)
    return (_conjunction(node, context="an effect"),)


def parse_domain(text: str) -> FondDomain:
    root = _parse_sexpr(text)
    if root.head() != "define":
        raise PddlSyntaxError("expected (define (domain ...) ...)", root.line, root.column)
    name = None
    types: list[tuple[str, str]] = []
    predicates: list[Predicate] = []
    actions: list[ActionSchema] = []
    for section in root.items[1:]:
        if not isinstance(section, _Node):
            raise PddlSyntaxError("expected a section", section.line, section.column)
        head = section.head()
        if head == "domain":
            name = _expect_symbol(section.items[1], "domain name").text.lower()
        elif head == ":requirements":
            for req in section.items[1:]:
                r = _expect_symbol(req, "requirement").text.lower()
                if r not in _SUPPORTED_REQUIREMENTS:
                    raise PddlSyntaxError(
                        f"unsupported feature: requirement {r}", req.line, req.column
                    )
        elif head == ":types":
            types = _typed_list(list(section.items[1:]), "type name")
        elif head == ":predicates":
            for p in section.items[1:]:
                if not isinstance(p, _Node) or not p.items:
                    raise PddlSyntaxError("bad predicate declaration", section.line, section.column)
                pname = _expect_symbol(p.items[0], "predicate name").text.lower()
                params = _typed_list(list(p.items[1:]), "parameter")
                predicates.append(Predicate(pname, tuple(params)))
        elif head == ":action":
            actions.append(_parse_action(section))
        elif head in (":constants", ":functions", ":derived"):
            raise PddlSyntaxError(
                f"unsupported feature: {head} section", section.line, section.column
            )
        else:
            raise PddlSyntaxError(f"unknown section {head!r}", section.line, section.column)
    if name is None:
        raise PddlSyntaxError("missing (domain NAME)", root.line, root.column)
    domain = FondDomain(name, tuple(types), tuple(predicates), tuple(actions))
    _check_domain(domain)
    return domain


def _parse_action(section: _Node) -> ActionSchema:
    name = _expect_symbol(section.items[1], "action name").text.lower()
    fields = {}
    i = 2
    while i < len(section.items):
        key = _expect_symbol(section.items[i], "action keyword").text.lower()
        if key not in (":parameters", ":precondition", ":effect"):
            raise PddlSyntaxError(
                f"unknown action keyword {key!r}",
                section.items[i].line, section.items[i].column,
            )
        if i + 1 >= len(section.items):
            raise PddlSyntaxError(f"missing value for {key}", section.line, section.column)
        fields[key] = section.items[i + 1]
        i += 2
    params_node = fields.get(":parameters")
    if params_node is None:
        params: list[tuple[str, str]] = []
    else:
        if not isinstance(params_node, _Node):
            raise PddlSyntaxError(
                "parameters must be a parenthesized list",
                params_node.line, params_node.column,
            )
        params = _typed_list(list(params_node.items), "parameter")
        for var, _ in params:
            if not var.startswith("?"):
                raise PddlSyntaxError(
                    f"parameter {var!r} must start with '?'",
                    params_node.line, params_node.column,
                )
    pre = fields.get(":precondition")
    precondition = () if pre is None else _conjunction(pre, context="a precondition")
    eff = fields.get(":effect")
    outcomes = ((),) if eff is None else _parse_effect(eff)
    return ActionSchema(name, tuple(params), precondition, outcomes)


def _check_domain(domain: FondDomain):
    declared_types = domain.type_names()
    declared = {x for x, _ in domain.types}
    for _, parent in domain.types:
        if parent != ROOT_TYPE and parent not in declared:
            raise PddlSyntaxError(f"undeclared parent type {parent!r}", 0, 0)
    seen_preds = set()
    for p in domain.predicates:
        if p.name in seen_preds:
            raise PddlSyntaxError(f"duplicate predicate {p.name!r}", 0, 0)
        seen_preds.add(p.name)
        for _, ty in p.parameters:
            if ty not in declared_types:
                raise PddlSyntaxError(f"undeclared type {ty!r} in predicate {p.name}", 0, 0)
    by_name = {p.name: p for p in domain.predicates}
    seen_actions = set()
    for a in domain.actions:
        if a.name in seen_actions:
            raise PddlSyntaxError(f"duplicate action {a.name!r}", 0, 0)
        seen_actions.add(a.name)
        param_vars = {v for v, _ in a.parameters}
        for _, ty in a.parameters:
            if ty not in declared_types:
                raise PddlSyntaxError(f"undeclared type {ty!r} in action {a.name}", 0, 0)
        for lit in a.precondition:
            _check_literal(lit, by_name, param_vars, a.name, allow_equality=True)
        for outcome in a.outcomes:
            for lit in outcome:
                _check_literal(lit, by_name, param_vars, a.name, allow_equality=False)


def _check_literal(lit: Literal, predicates, param_vars, action: str, allow_equality: bool):
    if lit.predicate == "=":
        if not allow_equality:
            raise PddlSyntaxError(f"'=' cannot appear in effects of {action}", 0, 0)
        if len(lit.args) != 2:
            raise PddlSyntaxError(f"'=' takes two arguments in {action}", 0, 0)
    else:
        p = predicates.get(lit.predicate)
        if p is None:
            raise PddlSyntaxError(
                f"undeclared predicate {lit.predicate!r} in action {action}", 0, 0
            )
        if len(lit.args) != p.arity:
            raise PddlSyntaxError(
                f"predicate {lit.predicate!r} takes {p.arity} arguments, "
                f"got {len(lit.args)} in action {action}", 0, 0
            )
    for arg in lit.args:
        if arg.startswith("?") and arg not in param_vars:
            raise PddlSyntaxError(f"unbound variable {arg!r} in action {action}", 0, 0)


def parse_problem(text: str, domain: FondDomain) -> FondProblem:
    root = _parse_sexpr(text)
    if root.head() != "define":
        raise PddlSyntaxError("expected (define (problem ...) ...)", root.line, root.column)
    name = None
    domain_name = None
    objects: list[tuple[str, str]] = []
    init: list[Literal] = []
    goal: tuple[Literal, ...] | None = None
    for section in root.items[1:]:
        if not isinstance(section, _Node):
            raise PddlSyntaxError("expected a section", section.line, section.column)
        head = section.head()
        if head == "problem":
            name = _expect_symbol(section.items[1], "problem name").text.lower()
        elif head == ":domain":
            domain_name = _expect_symbol(section.items[1], "domain name").text.lower()
        elif head == ":objects":
            objects = _typed_list(list(section.items[1:]), "object")
        elif head == ":init":
            for atom in section.items[1:]:
                lit = _parse_literal(atom, allow_negation=False)
                init.append(lit)
        elif head == ":goal":
            goal = _conjunction(section.items[1], context="a goal")
        else:
            raise PddlSyntaxError(f"unknown section {head!r}", section.line, section.column)
    if name is None:
        raise PddlSyntaxError("missing (problem NAME)", root.line, root.column)
    if domain_name != domain.name:
        raise PddlSyntaxError(
            f"problem is for domain {domain_name!r}, not {domain.name!r}", 0, 0
        )
    problem = FondProblem(name, domain_name, tuple(objects), tuple(init), goal)
    _check_problem(problem, domain)
    return problem


def _check_problem(problem: FondProblem, domain: FondDomain):
    declared_types = domain.type_names()
    for obj, ty in problem.objects:
        if ty not in declared_types:
            raise PddlSyntaxError(f"undeclared type {ty!r} for object {obj!r}", 0, 0)
    obj_types = dict(problem.objects)
    by_name = {p.name: p for p in domain.predicates}

    def check_ground(lit: Literal, where: str):
        p = by_name.get(lit.predicate)
        if lit.predicate == "=":
            if len(lit.args) != 2:
                raise PddlSyntaxError(f"'=' takes two arguments in {where}", 0, 0)
            return
        if p is None:
            raise PddlSyntaxError(f"undeclared predicate {lit.predicate!r} in {where}", 0, 0)
        if len(lit.args) != p.arity:
            raise PddlSyntaxError(
                f"predicate {lit.predicate!r} arity mismatch in {where}", 0, 0
            )
        for arg, (_, ty) in zip(lit.args, p.parameters):
            if arg.startswith("?"):
                raise PddlSyntaxError(f"variable {arg!r} in {where} must be ground", 0, 0)
            if arg not in obj_types:
                raise PddlSyntaxError(f"undeclared object {arg!r} in {where}", 0, 0)
            if not domain.is_subtype(obj_types[arg], ty):
                raise PddlSyntaxError(
                    f"object {arg!r} of type {obj_types[arg]!r} where {ty!r} "
                    f"expected in {where}", 0, 0
                )

    for lit in problem.init:
        check_ground(lit, "init")
    for lit in problem.goal or ():
        check_ground(lit, "goal")
