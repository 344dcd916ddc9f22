"""Action-language semantics: closure, states, one-step and multi-step transition.

States are total truth assignments over the theory's fluent universe that are
closed under the static laws. A single-head law forces its head whenever its
body holds; a multi-head law demands exactly one head. The one-step relation
treats an assignment s' as a successor of s under action a exactly when s'
equals a branch closure of e(a,s) together with the literals s and s' agree on
(the usual inertia fixpoint, extended with the exactly-one branching).

Everything is computed over bitmasks internally. The compiled engine is cached
on the theory object, so repeated queries against one theory share the atom
table and per-(action, state) successor memo.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Mapping

from .errors import EngineError, UniverseTooLarge
from .model import Action, CpsTheory, Fluent, Literal, StaticLaw, consistent

_ENGINE_ATTR = "_concernkit_engine"


# ---------------------------------------------------------------------------
# Law compilation and branching closure over (true-mask, false-mask) pairs

def _index_atoms(atoms: Iterable[Fluent]) -> dict[Fluent, int]:
    return {f: i for i, f in enumerate(atoms)}


def _mask_literals(literals: Iterable[Literal], index: Mapping[Fluent, int]) -> tuple[int, int]:
    t = f = 0
    for l in literals:
        try:
            bit = 1 << index[l.fluent]
        except KeyError:
            raise EngineError("UNKNOWN_ATOM", f"literal {l.render()} is outside the fluent universe")
        if l.value:
            t |= bit
        else:
            f |= bit
    return t, f


def _compile_laws(laws: Iterable[StaticLaw], index: Mapping[Fluent, int]):
    """Split laws into single-head and disjunctive compiled forms."""
    single: list[tuple[int, int, int, bool]] = []   # body_t, body_f, head_bit, head_sign
    disj: list[tuple[int, int, tuple[tuple[int, bool], ...]]] = []
    for law in laws:
        bt, bf = _mask_literals(law.body, index)
        heads = tuple((1 << index[l.fluent], l.value) for l in law.heads)
        if len(heads) == 1:
            bit, sign = heads[0]
            single.append((bt, bf, bit, sign))
        else:
            disj.append((bt, bf, heads))
    return single, disj


def _close(single, disj, t: int, f: int, acc: list[tuple[int, int]]) -> None:
    """Collect every branch closure of the assignment (t, f) into acc.

    A dead branch (contradiction, or a triggered multi-head law with no viable
    head) contributes nothing.
    """
    changed = True
    while changed:
        changed = False
        for bt, bf, bit, sign in single:
            if (bt & t) == bt and (bf & f) == bf:
                if sign:
                    if bit & f:
                        return
                    if not (bit & t):
                        t |= bit
                        changed = True
                else:
                    if bit & t:
                        return
                    if not (bit & f):
                        f |= bit
                        changed = True

    for bt, bf, heads in disj:
        if (bt & t) != bt or (bf & f) != bf:
            continue
        holds = [(bit & (t if sign else f)) != 0 for bit, sign in heads]
        fails = [(bit & (f if sign else t)) != 0 for bit, sign in heads]
        n_holds = sum(holds)
        if n_holds > 1:
            return  # exactly-one violated beyond repair
        if n_holds == 1 and all(fails[i] for i in range(len(heads)) if not holds[i]):
            continue  # already resolved
        viable = [i for i in range(len(heads)) if not fails[i] and (n_holds == 0 or holds[i])]
        for i in viable:
            t2, f2 = t, f
            ok = True
            for j, (bit, sign) in enumerate(heads):
                want_true = sign if j == i else not sign
                if want_true:
                    if bit & f2:
                        ok = False
                        break
                    t2 |= bit
                else:
                    if bit & t2:
                        ok = False
                        break
                    f2 |= bit
            if ok:
                _close(single, disj, t2, f2, acc)
        return  # subsequent laws are handled inside the recursion

    acc.append((t, f))


def _closed_under(single, disj, t: int, f: int) -> bool:
    """True iff the total assignment (t, f) satisfies every law."""
    for bt, bf, bit, sign in single:
        if (bt & t) == bt and (bf & f) == bf:
            if not (bit & (t if sign else f)):
                return False
    for bt, bf, heads in disj:
        if (bt & t) == bt and (bf & f) == bf:
            if sum(1 for bit, sign in heads if bit & (t if sign else f)) != 1:
                return False
    return True


# ---------------------------------------------------------------------------
# Public closure over literal sets (no system required)

def closure(u: Iterable[Literal], laws: Iterable[StaticLaw]) -> tuple[frozenset[Literal], ...]:
    """All branch closures of the literal set ``u`` under ``laws``.

    Returns the distinct least closed consistent supersets, one per viable
    selection of heads for the triggered multi-head laws; empty when no
    consistent closure exists. With no laws the closure is ``{u}`` itself.
    """
    u = tuple(u)
    laws = tuple(laws)
    if not consistent(u):
        return ()
    atoms = sorted(
        {l.fluent for l in u}
        | {l.fluent for law in laws for l in law.heads + law.body},
        key=Fluent.render,
    )
    index = _index_atoms(atoms)
    single, disj = _compile_laws(laws, index)
    t, f = _mask_literals(u, index)
    acc: list[tuple[int, int]] = []
    _close(single, disj, t, f, acc)
    out: list[frozenset[Literal]] = []
    seen: set[tuple[int, int]] = set()
    for ct, cf in acc:
        if (ct, cf) in seen:
            continue
        seen.add((ct, cf))
        lits = frozenset(
            Literal(atom, bool(ct & (1 << i)))
            for i, atom in enumerate(atoms)
            if (ct | cf) & (1 << i)
        )
        out.append(lits)
    return tuple(out)


# ---------------------------------------------------------------------------
# Compiled engine and states

class _CompiledAction:
    __slots__ = ("spec", "exec_sets", "causes", "success")

    def __init__(self, spec: Action, index: Mapping[Fluent, int]):
        self.spec = spec
        self.exec_sets = tuple(_mask_literals(cs, index) for cs in spec.executable_if)
        self.causes = tuple(
            (1 << index[e.literal.fluent], e.literal.value, *_mask_literals(e.conditions, index))
            for e in spec.causes
        )
        self.success = tuple(
            (r.p, *_mask_literals(r.conditions, index)) for r in spec.success_with
        )


class _Engine:
    def __init__(self, theory: CpsTheory):
        self.theory = theory
        self.atoms: tuple[Fluent, ...] = theory.fluents()
        self.n = len(self.atoms)
        self.full = (1 << self.n) - 1
        self.index = _index_atoms(self.atoms)
        self.atoms_key = hash(self.atoms)
        self.single, self.disj = _compile_laws(theory.system.statics, self.index)

        # Which atoms can a law drive to true / to false? Multi-head laws can
        # push a head atom either way (chosen vs not chosen).
        at = af = 0
        for _, _, bit, sign in self.single:
            if sign:
                at |= bit
            else:
                af |= bit
        for _, _, heads in self.disj:
            for bit, _ in heads:
                at |= bit
                af |= bit
        self.assert_true = at
        self.assert_false = af

        self.actions = {a.id: _CompiledAction(a, self.index) for a in theory.system.actions}
        self.step_cache: dict[tuple[str, int], tuple["State", ...]] = {}

    def action(self, action_id: str) -> _CompiledAction:
        try:
            return self.actions[action_id]
        except KeyError:
            raise EngineError("UNKNOWN_ACTION", f"no action named {action_id!r}")


def engine(theory: CpsTheory) -> _Engine:
    eng = getattr(theory, _ENGINE_ATTR, None)
    if eng is None:
        eng = _Engine(theory)
        object.__setattr__(theory, _ENGINE_ATTR, eng)
    return eng


class State:
    """A total, law-closed truth assignment, identified by a bit vector.

    Bit i corresponds to the i-th fluent in sorted-name order. States sort and
    compare by that vector (False before True, first fluent most significant),
    which is the canonical order used for every set-valued result.
    """

    __slots__ = ("_engine", "bits", "_key")

    def __init__(self, eng: _Engine, bits: int):
        self._engine = eng
        self.bits = bits
        self._key = None

    def truth(self, fluent: Fluent) -> bool:
        try:
            return bool(self.bits & (1 << self._engine.index[fluent]))
        except KeyError:
            raise EngineError("UNKNOWN_ATOM", f"atom {fluent.render()} is outside the fluent universe")

    def holds(self, literal: Literal) -> bool:
        return self.truth(literal.fluent) == literal.value

    def as_dict(self) -> dict[Fluent, bool]:
        return {f: bool(self.bits & (1 << i)) for i, f in enumerate(self._engine.atoms)}

    def true_atoms(self) -> tuple[Fluent, ...]:
        return tuple(f for i, f in enumerate(self._engine.atoms) if self.bits & (1 << i))

    def false_atoms(self) -> tuple[Fluent, ...]:
        return tuple(f for i, f in enumerate(self._engine.atoms) if not self.bits & (1 << i))

    def key(self) -> tuple[int, ...]:
        if self._key is None:
            self._key = tuple((self.bits >> i) & 1 for i in range(self._engine.n))
        return self._key

    def __eq__(self, other) -> bool:
        if not isinstance(other, State):
            return NotImplemented
        if self._engine is other._engine:
            return self.bits == other.bits
        return self.bits == other.bits and self._engine.atoms == other._engine.atoms

    def __hash__(self) -> int:
        return hash((self._engine.atoms_key, self.bits))

    def __repr__(self) -> str:
        true = ", ".join(f.render() for f in self.true_atoms())
        return f"State({{{true}}})"


def state_of(theory: CpsTheory, assignment: Mapping[Fluent, bool], check: bool = True) -> State:
    """Build a State from a total assignment. ``check=False`` skips the
    closed-under-laws validation (used by metrics tests on raw assignments)."""
    eng = engine(theory)
    bits = 0
    for f, v in assignment.items():
        if f not in eng.index:
            raise EngineError("UNKNOWN_ATOM", f"atom {f.render()} is outside the fluent universe")
        if v:
            bits |= 1 << eng.index[f]
    if len(assignment) != eng.n:
        missing = [f.render() for f in eng.atoms if f not in assignment]
        raise EngineError("INITIAL_INCOMPLETE", f"assignment leaves atoms unassigned: {missing}")
    if check and not _closed_under(eng.single, eng.disj, bits, ~bits & eng.full):
        raise EngineError("INVALID_STATE", "assignment violates the static laws")
    return State(eng, bits)


def initial_state(theory: CpsTheory) -> State:
    return state_of(theory, theory.initial)


def is_state(theory: CpsTheory, assignment: Mapping[Fluent, bool] | State) -> bool:
    """True iff the total assignment is closed under the theory's static laws."""
    eng = engine(theory)
    if isinstance(assignment, State):
        bits = assignment.bits
    else:
        if set(assignment) != set(eng.atoms):
            return False
        bits = 0
        for f, v in assignment.items():
            if v:
                bits |= 1 << eng.index[f]
    return _closed_under(eng.single, eng.disj, bits, ~bits & eng.full)


def executable_in(theory: CpsTheory, action_id: str, s: State) -> bool:
    """Some executability condition set holds in s; no sets at all means
    executable everywhere."""
    act = engine(theory).action(action_id)
    if not act.exec_sets:
        return True
    t, f = s.bits, ~s.bits & engine(theory).full
    return any((ct & t) == ct and (cf & f) == cf for ct, cf in act.exec_sets)


def direct_effects(theory: CpsTheory, action_id: str, s: State) -> frozenset[Literal]:
    """e(a, s): effect literals whose conditions hold in s."""
    eng = engine(theory)
    act = eng.action(action_id)
    t, f = s.bits, ~s.bits & eng.full
    out = []
    for bit, sign, ct, cf in act.causes:
        if (ct & t) == ct and (cf & f) == cf:
            out.append(Literal(eng.atoms[bit.bit_length() - 1], sign))
    return frozenset(out)


def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def step(theory: CpsTheory, action_id: str, s: State) -> tuple[State, ...]:
    """All successor states of s under the action, in canonical order.

    Empty when the action is not executable or its direct effects contradict
    each other or no fixpoint exists.

    Candidates are enumerated by flip set: every atom that changes truth value
    in a successor must get its new literal either from a direct effect or
    from a law head (multi-head laws can assert a head atom either way), so it
    suffices to try each subset of the law-flippable atoms on top of the
    effect flips and keep the candidates whose branch closure reproduces
    exactly that flip set as a total assignment.
    """
    eng = engine(theory)
    cached = eng.step_cache.get((action_id, s.bits))
    if cached is not None:
        return cached
    act = eng.action(action_id)

    result: tuple[State, ...]
    if not executable_in(theory, action_id, s):
        result = ()
    else:
        t, f = s.bits, ~s.bits & eng.full
        e_t = e_f = 0
        for bit, sign, ct, cf in act.causes:
            if (ct & t) == ct and (cf & f) == cf:
                if sign:
                    e_t |= bit
                else:
                    e_f |= bit
        if e_t & e_f:
            result = ()
        else:
            e_atoms = e_t | e_f
            effect_flips = (e_t & f) | (e_f & t)
            flippable = ((eng.assert_true & f) | (eng.assert_false & t)) & ~e_atoms
            found: dict[int, State] = {}
            for extra in _submasks(flippable):
                target_flips = effect_flips | extra
                inert = eng.full & ~e_atoms & ~extra
                u_t = e_t | (t & inert)
                u_f = e_f | (f & inert)
                acc: list[tuple[int, int]] = []
                _close(eng.single, eng.disj, u_t, u_f, acc)
                for ct_, cf_ in acc:
                    if (ct_ | cf_) != eng.full:
                        continue
                    if ((ct_ & f) | (cf_ & t)) != target_flips:
                        continue
                    found.setdefault(ct_, State(eng, ct_))
            result = tuple(sorted(found.values(), key=State.key))

    eng.step_cache[(action_id, s.bits)] = result
    return result


def run(theory: CpsTheory, plan: Iterable[str], s: State) -> tuple[State, ...]:
    """Multi-step transition. Empty plan yields {s}; if any intermediate state
    has no successor for the next action, the whole result collapses to ∅."""
    frontier: dict[int, State] = {s.bits: s}
    for action_id in plan:
        nxt: dict[int, State] = {}
        for u in frontier.values():
            succs = step(theory, action_id, u)
            if not succs:
                return ()
            for v in succs:
                nxt[v.bits] = v
        frontier = nxt
    return tuple(sorted(frontier.values(), key=State.key))


def enumerate_states(theory: CpsTheory, limit: int | None = None, bound: int = 24) -> Iterator[State]:
    """Yield every valid state in canonical order.

    Raises UNIVERSE_TOO_LARGE when the fluent universe exceeds ``bound`` atoms
    or when more than ``limit`` states would be produced.
    """
    eng = engine(theory)
    if eng.n > bound:
        raise UniverseTooLarge(f"{eng.n} fluents exceeds the enumeration bound {bound}")

    # Laws become checkable once every atom they mention is assigned; doing the
    # check at that depth prunes the assignment tree early.
    def max_atom(bits_list: list[int]) -> int:
        hi = -1
        for m in bits_list:
            if m:
                hi = max(hi, m.bit_length() - 1)
        return hi

    by_depth: list[list[tuple]] = [[] for _ in range(eng.n)]
    for law in eng.single:
        bt, bf, bit, _ = law
        d = max_atom([bt, bf, bit])
        if d >= 0:
            by_depth[d].append(("s", law))
    for law in eng.disj:
        bt, bf, heads = law
        d = max_atom([bt, bf] + [b for b, _ in heads])
        if d >= 0:
            by_depth[d].append(("d", law))
    produced = 0

    def rec(depth: int, t: int, f: int) -> Iterator[State]:
        nonlocal produced
        if depth == eng.n:
            produced += 1
            if limit is not None and produced > limit:
                raise UniverseTooLarge(f"state enumeration exceeded the limit of {limit}")
            yield State(eng, t)
            return
        bit = 1 << depth
        for value in (False, True):
            t2, f2 = (t | bit, f) if value else (t, f | bit)
            ok = True
            for kind, law in by_depth[depth]:
                if kind == "s":
                    bt, bf, hbit, sign = law
                    if (bt & t2) == bt and (bf & f2) == bf and not (hbit & (t2 if sign else f2)):
                        ok = False
                        break
                else:
                    bt, bf, heads = law
                    if (bt & t2) == bt and (bf & f2) == bf:
                        if sum(1 for hbit, sign in heads if hbit & (t2 if sign else f2)) != 1:
                            ok = False
                            break
            if ok:
                yield from rec(depth + 1, t2, f2)

    if eng.n == 0:
        if _closed_under(eng.single, eng.disj, 0, 0):
            yield State(eng, 0)
        return
    yield from rec(0, 0, 0)
