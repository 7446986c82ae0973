"""Linear temporal logic: parsing, negation normal form, translation of a
formula to a Büchi automaton, and lasso-word membership.

The translation is the classic on-the-fly tableau: nodes carry the set of
obligations for the current position and for the next one, eventuality
subformulas induce one acceptance set each, and a counter product turns the
generalized acceptance into a single accepting set.  No attempt is made to
minimize the automaton; inputs here are small.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .errors import InputError

_CMP_OPS = ("<=", ">=", "==", "!=", "<", ">")


# --- formulas ---------------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    kind: str
    children: tuple["Formula", ...] = ()
    # atom payload: plain/dotted name, or (var, op, int) comparison
    atom: tuple | str | None = None

    @cached_property
    def key(self) -> str:
        return str(self)

    def __str__(self):
        k = self.kind
        if k == "ap":
            if isinstance(self.atom, tuple):
                var, op, val = self.atom
                return f"{var} {op} {val}"
            return self.atom
        if k in ("true", "false"):
            return k
        a = self.children
        if k == "not":
            return f"!({a[0]})"
        if k in ("next", "finally", "globally"):
            sym = {"next": "X", "finally": "F", "globally": "G"}[k]
            return f"{sym} ({a[0]})"
        sym = {"and": "&&", "or": "||", "until": "U", "release": "R"}[k]
        return f"({a[0]}) {sym} ({a[1]})"


TRUE = Formula("true")
FALSE = Formula("false")


def ap(name: str) -> Formula:
    return Formula("ap", atom=name)


def data_ap(var: str, op: str, value: int) -> Formula:
    return Formula("ap", atom=(var, op, value))


def neg(f: Formula) -> Formula:
    return Formula("not", (f,))


def conj(a: Formula, b: Formula) -> Formula:
    return Formula("and", (a, b))


def disj(a: Formula, b: Formula) -> Formula:
    return Formula("or", (a, b))


def until(a: Formula, b: Formula) -> Formula:
    return Formula("until", (a, b))


def release(a: Formula, b: Formula) -> Formula:
    return Formula("release", (a, b))


def nxt(f: Formula) -> Formula:
    return Formula("next", (f,))


def eventually(f: Formula) -> Formula:
    return Formula("finally", (f,))


def always(f: Formula) -> Formula:
    return Formula("globally", (f,))


def atoms_of(f: Formula) -> set:
    if f.kind == "ap":
        return {f.atom}
    out = set()
    for c in f.children:
        out |= atoms_of(c)
    return out


# --- parser -----------------------------------------------------------------

_KEYWORDS = {"U", "R", "G", "F", "X", "and", "or", "true", "false"}


class _Tok:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_."):
                j += 1
            word = text[i:j]
            toks.append(_Tok("kw" if word in _KEYWORDS else "id", word, i))
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("int", text[i:j], i))
            i = j
            continue
        for op in ("&&", "||", "->", *_CMP_OPS):
            if text.startswith(op, i):
                toks.append(_Tok("op", op, i))
                i += len(op)
                break
        else:
            if ch in "!()":
                toks.append(_Tok("op", ch, i))
                i += 1
            else:
                raise InputError(f"unexpected character {ch!r} at column {i}",
                                 kind="ltl-syntax", pos=(1, i))
    toks.append(_Tok("end", "", n))
    return toks


class _Parser:
    """Precedence (tightest first): !, X, G, F; U, R; &&; ||; -> (right)."""

    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.take()
        if t.text != text:
            raise InputError(f"expected {text!r} at column {t.pos}",
                             kind="ltl-syntax", pos=(1, t.pos))

    def parse(self):
        f = self.implies()
        t = self.peek()
        if t.kind != "end":
            raise InputError(f"unexpected {t.text!r} at column {t.pos}",
                             kind="ltl-syntax", pos=(1, t.pos))
        return f

    def implies(self):
        left = self.disj()
        if self.peek().text == "->":
            self.take()
            right = self.implies()
            return disj(neg(left), right)
        return left

    def disj(self):
        f = self.conj()
        while self.peek().text in ("||", "or"):
            self.take()
            f = disj(f, self.conj())
        return f

    def conj(self):
        f = self.binary_temporal()
        while self.peek().text in ("&&", "and"):
            self.take()
            f = conj(f, self.binary_temporal())
        return f

    def binary_temporal(self):
        left = self.unary()
        t = self.peek()
        if t.text in ("U", "R"):
            self.take()
            right = self.binary_temporal()
            return until(left, right) if t.text == "U" else release(left, right)
        return left

    def unary(self):
        t = self.peek()
        if t.text == "!":
            self.take()
            return neg(self.unary())
        if t.text in ("X", "G", "F"):
            self.take()
            sub = self.unary()
            return {"X": nxt, "G": always, "F": eventually}[t.text](sub)
        return self.atom()

    def atom(self):
        t = self.take()
        if t.text == "(":
            f = self.implies()
            self.expect(")")
            return f
        if t.text == "true":
            return TRUE
        if t.text == "false":
            return FALSE
        if t.kind == "id":
            nt = self.peek()
            if nt.kind == "op" and nt.text in _CMP_OPS:
                if "." in t.text:
                    raise InputError(
                        f"comparison on dotted name {t.text!r} at column {t.pos}",
                        kind="ltl-syntax", pos=(1, t.pos))
                op = self.take().text
                val = self.take()
                sign = 1
                if val.text == "-":
                    sign, val = -1, self.take()
                if val.kind != "int":
                    raise InputError(f"expected integer at column {val.pos}",
                                     kind="ltl-syntax", pos=(1, val.pos))
                return data_ap(t.text, op, sign * int(val.text))
            return ap(t.text)
        raise InputError(f"unexpected {t.text!r} at column {t.pos}",
                         kind="ltl-syntax", pos=(1, t.pos))


def parse_ltl(text: str) -> Formula:
    return _Parser(text).parse()


# --- negation normal form ---------------------------------------------------


def to_nnf(f: Formula) -> Formula:
    """Push negations to the atoms; rewrite F/G into U/R."""
    return _nnf(f, False)


def _nnf(f: Formula, negated: bool) -> Formula:
    k = f.kind
    if k == "true":
        return FALSE if negated else TRUE
    if k == "false":
        return TRUE if negated else FALSE
    if k == "ap":
        return neg(f) if negated else f
    if k == "not":
        return _nnf(f.children[0], not negated)
    if k == "and":
        a, b = (_nnf(c, negated) for c in f.children)
        return disj(a, b) if negated else conj(a, b)
    if k == "or":
        a, b = (_nnf(c, negated) for c in f.children)
        return conj(a, b) if negated else disj(a, b)
    if k == "next":
        return nxt(_nnf(f.children[0], negated))
    if k == "until":
        a, b = (_nnf(c, negated) for c in f.children)
        return release(a, b) if negated else until(a, b)
    if k == "release":
        a, b = (_nnf(c, negated) for c in f.children)
        return until(a, b) if negated else release(a, b)
    if k == "finally":
        sub = _nnf(f.children[0], negated)
        return release(FALSE, sub) if negated else until(TRUE, sub)
    if k == "globally":
        sub = _nnf(f.children[0], negated)
        return until(TRUE, sub) if negated else release(FALSE, sub)
    raise ValueError(f"unknown formula kind {k}")


# --- Büchi automata ---------------------------------------------------------


@dataclass(frozen=True)
class Transition:
    src: int
    pos: frozenset
    negs: frozenset
    dst: int

    def enabled(self, letter: frozenset) -> bool:
        return self.pos <= letter and not (self.negs & letter)


@dataclass
class BuchiAutomaton:
    n_states: int
    initial: int
    transitions: list[Transition]
    accepting: frozenset
    atoms: frozenset = field(default_factory=frozenset)

    def outgoing(self, q: int) -> list[Transition]:
        return self._out[q]

    @cached_property
    def _out(self):
        table = [[] for _ in range(self.n_states)]
        for t in self.transitions:
            table[t.src].append(t)
        return table

    def dump(self) -> str:
        lines = [f"states: {self.n_states}",
                 f"initial: {self.initial}",
                 "accepting: " + " ".join(str(q) for q in sorted(self.accepting))]
        for t in self.transitions:
            lits = [_atom_str(a) for a in sorted(t.pos, key=_atom_str)]
            lits += ["!" + _atom_str(a) for a in sorted(t.negs, key=_atom_str)]
            label = ",".join(lits) if lits else "true"
            lines.append(f"{t.src} -- {label} -> {t.dst}")
        return "\n".join(lines)


def _atom_str(a) -> str:
    if isinstance(a, tuple):
        return f"{a[0]}{a[1]}{a[2]}"
    return a


class _Node:
    __slots__ = ("incoming", "new", "old", "nxt", "seq")

    def __init__(self, incoming, new, old, nxt):
        self.incoming = set(incoming)
        self.new = set(new)
        self.old = set(old)
        self.nxt = set(nxt)
        self.seq = None


def _expand(node: _Node, done: list[_Node]) -> None:
    if not node.new:
        for other in done:
            if other.old == node.old and other.nxt == node.nxt:
                other.incoming |= node.incoming
                return
        node.seq = len(done) + 1  # 0 is reserved for the initial state
        done.append(node)
        _expand(_Node({node.seq}, node.nxt, set(), set()), done)
        return
    f = min(node.new, key=lambda g: g.key)
    node.new.discard(f)
    k = f.kind
    if k == "false" or (k == "not" and f.children[0] in node.old) \
            or (k == "ap" and neg(f) in node.old):
        return
    if k == "true":
        node.old.add(f)  # recorded so an until fulfilled by "true" counts
        _expand(node, done)
        return
    if k in ("ap", "not"):
        node.old.add(f)
        _expand(node, done)
        return
    if k == "and":
        node.old.add(f)
        node.new |= set(f.children) - node.old
        _expand(node, done)
        return
    if k == "next":
        node.old.add(f)
        node.nxt.add(f.children[0])
        _expand(node, done)
        return
    a, b = f.children
    left = _Node(node.incoming, set(node.new), set(node.old) | {f},
                 set(node.nxt))
    right = _Node(node.incoming, set(node.new), set(node.old) | {f},
                  set(node.nxt))
    if k == "or":
        left.new |= {a} - left.old
        right.new |= {b} - right.old
    elif k == "until":
        left.new |= {a} - left.old
        left.nxt.add(f)
        right.new |= {b} - right.old
    elif k == "release":
        left.new |= {b} - left.old
        left.nxt.add(f)
        right.new |= {a, b} - right.old
    else:
        raise ValueError(f"formula not in normal form: {f}")
    _expand(left, done)
    _expand(right, done)


def to_buchi(f: Formula) -> BuchiAutomaton:
    """Tableau translation of a negation-normal-form formula, degeneralized
    to a single accepting set with the usual counter product."""
    root = _Node({0}, {f}, set(), set())
    nodes: list[_Node] = []
    _expand(root, nodes)

    untils = sorted(
        {g for nd in nodes for g in nd.old if g.kind == "until"},
        key=lambda g: g.key)
    acc_sets = [
        frozenset(nd.seq for nd in nodes
                  if g not in nd.old or g.children[1] in nd.old)
        for g in untils
    ]

    raw_edges = []  # (src, pos, negs, dst) over tableau states
    for nd in nodes:
        pos = frozenset(g.atom for g in nd.old if g.kind == "ap")
        negs = frozenset(g.children[0].atom for g in nd.old if g.kind == "not")
        for src in sorted(nd.incoming):
            raw_edges.append((src, pos, negs, nd.seq))

    m = len(acc_sets)
    if m == 0:
        trans = [Transition(s, p, ng, d) for s, p, ng, d in raw_edges]
        aut = BuchiAutomaton(len(nodes) + 1, 0, trans,
                             frozenset(range(len(nodes) + 1)),
                             frozenset(atoms_of(f)))
        return _prune(aut)

    out_by_src: dict[int, list] = {}
    for e in raw_edges:
        out_by_src.setdefault(e[0], []).append(e)

    def copy_after(q: int, c: int) -> int:
        return c + 1 if c < m and q in acc_sets[c] else c

    # states are (tableau state, counter) pairs; counter m is the accepting
    # flash and immediately restarts at 0
    index: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []

    def state_id(q: int, c: int) -> int:
        key = (q, c)
        if key not in index:
            index[key] = len(order)
            order.append(key)
        return index[key]

    trans = []
    start = state_id(0, 0)
    k = 0
    while k < len(order):
        q, c = order[k]
        k += 1
        base = 0 if c == m else c
        for (_, pos, negs, dst) in out_by_src.get(q, []):
            nc = copy_after(dst, base)
            trans.append(Transition(index[(q, c)], pos, negs, state_id(dst, nc)))
    accepting = frozenset(i for (q, c), i in index.items() if c == m)
    aut = BuchiAutomaton(len(order), start, trans, accepting,
                         frozenset(atoms_of(f)))
    return _prune(aut)


def _prune(aut: BuchiAutomaton) -> BuchiAutomaton:
    """Drop states unreachable from the initial state; renumber densely."""
    seen = {aut.initial}
    frontier = [aut.initial]
    while frontier:
        q = frontier.pop()
        for t in aut.outgoing(q):
            if t.dst not in seen:
                seen.add(t.dst)
                frontier.append(t.dst)
    remap = {q: i for i, q in enumerate(sorted(seen))}
    trans = [Transition(remap[t.src], t.pos, t.negs, remap[t.dst])
             for t in aut.transitions if t.src in seen and t.dst in seen]
    acc = frozenset(remap[q] for q in aut.accepting if q in seen)
    return BuchiAutomaton(len(seen), remap[aut.initial], trans, acc, aut.atoms)


def lasso_accepts(aut: BuchiAutomaton, prefix, period) -> bool:
    """Does the automaton accept the word prefix . period^omega?

    Letters are sets of atoms.  The product with the lasso positions is
    explored and an accepting product state is searched for on a cycle.
    """
    if not period:
        raise ValueError("period must be non-empty")
    letters = [frozenset(a) for a in list(prefix) + list(period)]
    total = len(letters)
    loop = len(prefix)

    def nxt_pos(i):
        return i + 1 if i + 1 < total else loop

    start = (0, aut.initial)
    adj: dict[tuple, list[tuple]] = {}
    stack = [start]
    seen = {start}
    while stack:
        i, q = stack.pop()
        succs = []
        for t in aut.outgoing(q):
            if t.enabled(letters[i]):
                nx = (nxt_pos(i), t.dst)
                succs.append(nx)
                if nx not in seen:
                    seen.add(nx)
                    stack.append(nx)
        adj[(i, q)] = succs

    def reaches_itself(node) -> bool:
        work = list(adj[node])
        visited = set()
        while work:
            cur = work.pop()
            if cur == node:
                return True
            if cur in visited:
                continue
            visited.add(cur)
            work.extend(adj[cur])
        return False

    for node in seen:
        if node[1] in aut.accepting and reaches_itself(node):
            return True
    return False
