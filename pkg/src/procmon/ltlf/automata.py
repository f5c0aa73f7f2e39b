"""Compilation of finite-trace formulas into complete deterministic automata.

Construction: states are formulas under single-step progression. Consuming an
interpretation rewrites the pending formula into the obligation on the rest of
the trace; a state is accepting when its obligation is discharged by the trace
ending there. "The rest of the trace is non-empty" is expressible inside the
language itself as `F true` (false on an empty remainder, true otherwise),
which lets progression stay closed over the plain formula syntax.

Termination: every obligation appearing in a progressed formula is a temporal
subformula of the original (plus `F true`), and states are canonicalized as
boolean functions over that finite obligation set, so the state space is
finite. A configurable cap guards against practical blow-up.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .semantics import Trace
from .syntax import (
    And, Atom, Eventually, FalseConst, Formula, Globally, Iff, Implies,
    Next, Not, Or, TrueConst, Until, WeakNext, pretty, FALSE, TRUE,
)

NONEMPTY = Eventually(TRUE)

_MAX_TABLE_VARS = 14


class DfaTooLarge(RuntimeError):
    """State cap exceeded while determinizing a formula."""


@dataclass(frozen=True)
class Dfa:
    """Complete DFA over propositional interpretations of `alphabet`.

    `edges` holds symbolic transitions (state, guard, successor); for every
    state the guards are pairwise disjoint and jointly exhaustive. A trace is
    accepted when the state reached after consuming its last interpretation
    is in `accepting`.
    """

    alphabet: tuple[str, ...]
    n_states: int
    initial: int
    accepting: frozenset[int]
    edges: tuple[tuple[int, Formula, int], ...]

    def step(self, state: int, interp: frozenset[str]) -> int:
        for src, guard, dst in self.edges:
            if src == state and eval_prop(guard, interp):
                return dst
        raise RuntimeError(f"no transition from state {state} on {sorted(interp)}")

    def outgoing(self, state: int) -> list[tuple[Formula, int]]:
        return [(g, dst) for src, g, dst in self.edges if src == state]


def eval_prop(guard: Formula, interp: frozenset[str]) -> bool:
    """Evaluate a propositional (temporal-operator-free) formula."""
    if isinstance(guard, Atom):
        return guard.name in interp
    if isinstance(guard, TrueConst):
        return True
    if isinstance(guard, FalseConst):
        return False
    if isinstance(guard, Not):
        return not eval_prop(guard.arg, interp)
    if isinstance(guard, And):
        return eval_prop(guard.left, interp) and eval_prop(guard.right, interp)
    if isinstance(guard, Or):
        return eval_prop(guard.left, interp) or eval_prop(guard.right, interp)
    if isinstance(guard, Implies):
        return not eval_prop(guard.left, interp) or eval_prop(guard.right, interp)
    if isinstance(guard, Iff):
        return eval_prop(guard.left, interp) == eval_prop(guard.right, interp)
    raise TypeError(f"not a propositional formula: {pretty(guard)}")


# --- constant-folding constructors used by progression ---

def _mk_not(f: Formula) -> Formula:
    if isinstance(f, TrueConst):
        return FALSE
    if isinstance(f, FalseConst):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def _mk_and(a: Formula, b: Formula) -> Formula:
    if isinstance(a, FalseConst) or isinstance(b, FalseConst):
        return FALSE
    if isinstance(a, TrueConst):
        return b
    if isinstance(b, TrueConst):
        return a
    if a == b:
        return a
    return And(a, b)


def _mk_or(a: Formula, b: Formula) -> Formula:
    if isinstance(a, TrueConst) or isinstance(b, TrueConst):
        return TRUE
    if isinstance(a, FalseConst):
        return b
    if isinstance(b, FalseConst):
        return a
    if a == b:
        return a
    return Or(a, b)


def _mk_implies(a: Formula, b: Formula) -> Formula:
    return _mk_or(_mk_not(a), b)


def _mk_iff(a: Formula, b: Formula) -> Formula:
    if isinstance(a, TrueConst):
        return b
    if isinstance(b, TrueConst):
        return a
    if isinstance(a, FalseConst):
        return _mk_not(b)
    if isinstance(b, FalseConst):
        return _mk_not(a)
    if a == b:
        return TRUE
    return Iff(a, b)


def progress(f: Formula, interp: frozenset[str]) -> Formula:
    """Obligation left on the remaining (possibly empty) trace after `interp`."""
    if isinstance(f, Atom):
        return TRUE if f.name in interp else FALSE
    if isinstance(f, (TrueConst, FalseConst)):
        return f
    if isinstance(f, Not):
        return _mk_not(progress(f.arg, interp))
    if isinstance(f, And):
        return _mk_and(progress(f.left, interp), progress(f.right, interp))
    if isinstance(f, Or):
        return _mk_or(progress(f.left, interp), progress(f.right, interp))
    if isinstance(f, Implies):
        return _mk_implies(progress(f.left, interp), progress(f.right, interp))
    if isinstance(f, Iff):
        return _mk_iff(progress(f.left, interp), progress(f.right, interp))
    if isinstance(f, Next):
        return _mk_and(NONEMPTY, f.arg)
    if isinstance(f, WeakNext):
        return _mk_or(_mk_not(NONEMPTY), f.arg)
    if isinstance(f, Eventually):
        return _mk_or(progress(f.arg, interp), _mk_and(NONEMPTY, f))
    if isinstance(f, Globally):
        return _mk_and(progress(f.arg, interp), _mk_or(_mk_not(NONEMPTY), f))
    if isinstance(f, Until):
        rest = _mk_and(progress(f.left, interp), _mk_and(NONEMPTY, f))
        return _mk_or(progress(f.right, interp), rest)
    raise TypeError(f"unknown formula node {type(f).__name__}")


def accepts_empty(f: Formula) -> bool:
    """Whether the obligation f is discharged when the trace ends here."""
    if isinstance(f, Atom):
        return False
    if isinstance(f, TrueConst):
        return True
    if isinstance(f, FalseConst):
        return False
    if isinstance(f, Not):
        return not accepts_empty(f.arg)
    if isinstance(f, And):
        return accepts_empty(f.left) and accepts_empty(f.right)
    if isinstance(f, Or):
        return accepts_empty(f.left) or accepts_empty(f.right)
    if isinstance(f, Implies):
        return not accepts_empty(f.left) or accepts_empty(f.right)
    if isinstance(f, Iff):
        return accepts_empty(f.left) == accepts_empty(f.right)
    if isinstance(f, (Next, Eventually, Until)):
        return False
    if isinstance(f, (WeakNext, Globally)):
        return True
    raise TypeError(f"unknown formula node {type(f).__name__}")


# --- canonicalization of progressed formulas ---

def _obligation_vars(f: Formula, out: dict[str, Formula]):
    """Collect maximal atom- or temporal-rooted subformulas, keyed by print form."""
    if isinstance(f, (Atom, Next, WeakNext, Until, Eventually, Globally)):
        out.setdefault(pretty(f), f)
        return
    if isinstance(f, (TrueConst, FalseConst)):
        return
    if isinstance(f, Not):
        _obligation_vars(f.arg, out)
        return
    _obligation_vars(f.left, out)
    _obligation_vars(f.right, out)


def _eval_skeleton(f: Formula, assign: dict[str, bool]) -> bool:
    if isinstance(f, (Atom, Next, WeakNext, Until, Eventually, Globally)):
        return assign[pretty(f)]
    if isinstance(f, TrueConst):
        return True
    if isinstance(f, FalseConst):
        return False
    if isinstance(f, Not):
        return not _eval_skeleton(f.arg, assign)
    if isinstance(f, And):
        return _eval_skeleton(f.left, assign) and _eval_skeleton(f.right, assign)
    if isinstance(f, Or):
        return _eval_skeleton(f.left, assign) or _eval_skeleton(f.right, assign)
    if isinstance(f, Implies):
        return not _eval_skeleton(f.left, assign) or _eval_skeleton(f.right, assign)
    if isinstance(f, Iff):
        return _eval_skeleton(f.left, assign) == _eval_skeleton(f.right, assign)
    raise TypeError(f"unknown formula node {type(f).__name__}")


def _merge_cubes(cubes: list[dict[int, bool]]) -> list[dict[int, bool]]:
    # greedy single-literal merging; not minimal, just keeps guards readable
    changed = True
    while changed:
        changed = False
        for i, j in itertools.combinations(range(len(cubes)), 2):
            a, b = cubes[i], cubes[j]
            if a is None or b is None or set(a) != set(b):
                continue
            diff = [k for k in a if a[k] != b[k]]
            if len(diff) == 1:
                merged = {k: v for k, v in a.items() if k != diff[0]}
                cubes[i] = merged
                cubes[j] = None
                changed = True
        cubes = [c for c in cubes if c is not None]
    # drop cubes subsumed by a more general one
    kept = []
    for c in cubes:
        if not any(o is not c and o.items() <= c.items() for o in cubes):
            kept.append(c)
    return kept


def _dnf_from_table(variables: list[Formula], table: int) -> Formula:
    n = len(variables)
    if table == 0:
        return FALSE
    if table == (1 << (1 << n)) - 1:
        return TRUE
    cubes = [
        {i: bool(m >> i & 1) for i in range(n)}
        for m in range(1 << n)
        if table >> m & 1
    ]
    cubes = _merge_cubes(cubes)
    out = FALSE
    for cube in cubes:
        term = TRUE
        for i in sorted(cube):
            lit = variables[i] if cube[i] else Not(variables[i])
            term = _mk_and(term, lit)
        out = _mk_or(out, term)
    return out


def canonicalize(f: Formula) -> tuple[object, Formula]:
    """Canonical key and small representative for a progressed formula.

    The representative is logically equivalent to f; formulas sharing a key
    are logically equivalent as boolean functions over their obligations.
    """
    varmap: dict[str, Formula] = {}
    _obligation_vars(f, varmap)
    names = sorted(varmap)
    if len(names) > _MAX_TABLE_VARS:
        # too many obligations for a truth table; syntactic key still sound
        return ("syn", pretty(f)), f
    table = 0
    for m in range(1 << len(names)):
        assign = {name: bool(m >> i & 1) for i, name in enumerate(names)}
        if _eval_skeleton(f, assign):
            table |= 1 << m
    # drop variables the function does not depend on
    i = 0
    while i < len(names):
        half = 1 << i
        relevant = False
        for m in range(1 << len(names)):
            if not m >> i & 1 and (table >> m & 1) != (table >> (m | half) & 1):
                relevant = True
                break
        if relevant:
            i += 1
            continue
        packed = 0
        slot = 0
        for m in range(1 << len(names)):
            if not m >> i & 1:
                if table >> m & 1:
                    packed |= 1 << slot
                slot += 1
        table = packed
        del names[i]
    variables = [varmap[name] for name in names]
    rep = _dnf_from_table(variables, table)
    return ("tab", tuple(names), table), rep


def to_dfa(
    f: Formula,
    alphabet=None,
    max_states: int = 10_000,
    minimize: bool = False,
) -> Dfa:
    """Build the complete DFA recognizing exactly the traces satisfying f.

    `alphabet` may widen the automaton's alphabet beyond the formula's atoms
    (guards simply ignore the extra atoms). Raises DfaTooLarge past the cap.
    """
    from .syntax import atoms as _atoms

    own = sorted(_atoms(f))
    full = sorted(set(own) | set(alphabet or ()))
    if not set(own) <= set(full):
        raise ValueError("alphabet must cover the formula's atoms")

    interps = [
        frozenset(a for i, a in enumerate(own) if bits >> i & 1)
        for bits in range(1 << len(own))
    ]

    key0, rep0 = canonicalize(f)
    ids: dict[object, int] = {key0: 0}
    reps: list[Formula] = [rep0]
    edges: list[tuple[int, Formula, int]] = []
    frontier = [0]
    while frontier:
        state = frontier.pop()
        targets: dict[int, list[frozenset[str]]] = {}
        for interp in interps:
            key, rep = canonicalize(progress(reps[state], interp))
            dst = ids.get(key)
            if dst is None:
                dst = len(reps)
                if dst >= max_states:
                    raise DfaTooLarge(f"more than {max_states} automaton states")
                ids[key] = dst
                reps.append(rep)
                frontier.append(dst)
            targets.setdefault(dst, []).append(interp)
        for dst, group in sorted(targets.items()):
            edges.append((state, _guard_for(own, group), dst))

    dfa = Dfa(
        alphabet=tuple(full),
        n_states=len(reps),
        initial=0,
        accepting=frozenset(i for i, rep in enumerate(reps) if accepts_empty(rep)),
        edges=tuple(edges),
    )
    return minimize_dfa(dfa) if minimize else dfa


def _guard_for(own: list[str], interps: list[frozenset[str]]) -> Formula:
    if len(interps) == (1 << len(own)):
        return TRUE
    cubes = [{i: (a in interp) for i, a in enumerate(own)} for interp in interps]
    cubes = _merge_cubes(cubes)
    out = FALSE
    for cube in cubes:
        term = TRUE
        for i in sorted(cube):
            lit = Atom(own[i]) if cube[i] else Not(Atom(own[i]))
            term = _mk_and(term, lit)
        out = _mk_or(out, term)
    return out


def dnf_cubes(guard: Formula) -> list[dict[str, bool]]:
    """Satisfying assignments of a propositional formula, merged into cubes.

    Each cube maps an atom name to a required polarity; atoms absent from a
    cube are unconstrained. The cubes jointly cover exactly the models of
    `guard`. An empty cube list means unsatisfiable; [{}] means valid.
    """
    names = sorted(_guard_atom_names(guard))
    sat = []
    for bits in range(1 << len(names)):
        interp = frozenset(a for i, a in enumerate(names) if bits >> i & 1)
        if eval_prop(guard, interp):
            sat.append({i: bool(bits >> i & 1) for i in range(len(names))})
    if len(sat) == 1 << len(names):
        return [{}]
    merged = _merge_cubes(sat)
    return [{names[i]: v for i, v in cube.items()} for cube in merged]


def dfa_accepts(d: Dfa, t: Trace) -> bool:
    """Run t through d; accept iff the final state is accepting."""
    extra = t.alphabet - set(d.alphabet)
    seen = frozenset().union(*t.steps)
    if extra & seen:
        raise ValueError(f"trace atoms {sorted(extra & seen)} outside automaton alphabet")
    state = d.initial
    for step in t.steps:
        state = d.step(state, step)
    return state in d.accepting


def minimize_dfa(d: Dfa) -> Dfa:
    """Moore partition refinement; preserves the accepted language."""
    guard_atoms = sorted({a for _, g, _ in d.edges for a in _guard_atom_names(g)})
    interps = [
        frozenset(a for i, a in enumerate(guard_atoms) if bits >> i & 1)
        for bits in range(1 << len(guard_atoms))
    ]
    block = [0 if s in d.accepting else 1 for s in range(d.n_states)]
    while True:
        signature = {}
        new_block = []
        for s in range(d.n_states):
            sig = (block[s], tuple(block[d.step(s, i)] for i in interps))
            if sig not in signature:
                signature[sig] = len(signature)
            new_block.append(signature[sig])
        if new_block == block:
            break
        block = new_block
    n = len(set(block))
    if n == d.n_states:
        return d
    edges: list[tuple[int, Formula, int]] = []
    done = set()
    for s in range(d.n_states):
        b = block[s]
        if b in done:
            continue
        done.add(b)
        targets: dict[int, list[frozenset[str]]] = {}
        for interp in interps:
            targets.setdefault(block[d.step(s, interp)], []).append(interp)
        for dst, group in sorted(targets.items()):
            edges.append((b, _guard_for(guard_atoms, group), dst))
    return Dfa(
        alphabet=d.alphabet,
        n_states=n,
        initial=block[d.initial],
        accepting=frozenset(block[s] for s in d.accepting),
        edges=tuple(edges),
    )


def _guard_atom_names(g: Formula) -> frozenset[str]:
    from .syntax import atoms as _atoms

    return _atoms(g)


def dfa_equivalent(d1: Dfa, d2: Dfa) -> bool:
    """Language equality over non-empty traces, by product exploration."""
    atoms_ = sorted(
        {a for _, g, _ in d1.edges for a in _guard_atom_names(g)}
        | {a for _, g, _ in d2.edges for a in _guard_atom_names(g)}
    )
    interps = [
        frozenset(a for i, a in enumerate(atoms_) if bits >> i & 1)
        for bits in range(1 << len(atoms_))
    ]
    start = (d1.initial, d2.initial)
    seen = {start}
    frontier = [start]
    while frontier:
        s1, s2 = frontier.pop()
        for interp in interps:
            t1, t2 = d1.step(s1, interp), d2.step(s2, interp)
            if (t1 in d1.accepting) != (t2 in d2.accepting):
                return False
            if (t1, t2) not in seen:
                seen.add((t1, t2))
                frontier.append((t1, t2))
    return True


def format_dfa(d: Dfa) -> str:
    """Human-readable listing: one line per (state, guard, target) edge."""
    lines = [
        f"dfa over {{{', '.join(d.alphabet)}}}",
        f"initial q{d.initial}; accepting {{{', '.join('q' + str(s) for s in sorted(d.accepting))}}}",
    ]
    for src, guard, dst in d.edges:
        lines.append(f"  q{src} --[{pretty(guard)}]--> q{dst}")
    return "\n".join(lines)
