"""Model ingestion and preparation.

The input format is a structured text file describing a network of timed
components with handshake channels and bounded integer variables:

    param p = 2..5
    clock x y
    var   w : 0..2 = 0
    chan  go
    component Train {
      location Safe { invariant true; label safe }
      location Appr { invariant x <= p }
      init Safe
      edge Safe -> Appr { guard x >= 1; sync go!; reset x; update w := w + 1 }
    }

Guards are conjunctions (&&) of clock constraints with at most one real
clock per atom (the literal ``0`` names the zero clock in differences) and
of comparisons of a data variable against an integer.  This module turns a
network into a single product automaton with data folded into locations,
builds the product with a Büchi automaton, and applies the transformation
that forces at least one time unit between accepting visits so that every
accepting run is non-Zeno.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import InputError
from .ltl import BuchiAutomaton
from .params import AffineExpr, ParamBox, StrictBound, bound
from .pdbm import Atom

_DATA_OPS = ("<=", ">=", "==", "!=", "<", ">")


# --- network description ------------------------------------------------


@dataclass(frozen=True)
class DataAtom:
    var: str
    op: str
    value: int

    def holds(self, vals: Mapping[str, int]) -> bool:
        x = vals[self.var]
        return {
            "<": x < self.value, "<=": x <= self.value,
            ">": x > self.value, ">=": x >= self.value,
            "==": x == self.value, "!=": x != self.value,
        }[self.op]

    def __str__(self):
        return f"{self.var} {self.op} {self.value}"


@dataclass
class CompEdge:
    src: str
    dst: str
    clock_atoms: tuple[Atom, ...]
    data_atoms: tuple[DataAtom, ...]
    sync: tuple[str, str] | None  # (channel, "!" or "?")
    resets: tuple[str, ...]
    updates: tuple[tuple[str, AffineExpr], ...]
    guard_text: str


@dataclass
class CompLocation:
    name: str
    inv_atoms: tuple[Atom, ...]
    inv_text: str
    labels: tuple[str, ...]


@dataclass
class Component:
    name: str
    locations: dict[str, CompLocation]
    init: str
    edges: list[CompEdge]


@dataclass
class Network:
    params: dict[str, tuple[int, int]]
    clocks: list[str]
    channels: list[str]
    variables: dict[str, tuple[int, int, int]]  # lo, hi, init
    components: list[Component]

    def box(self, overrides: Mapping[str, tuple[int, int]] | None = None) -> ParamBox:
        bounds = dict(self.params)
        for p, rng in (overrides or {}).items():
            if p not in bounds:
                raise InputError(f"override for unknown parameter {p}",
                                 kind="unknown-param")
            bounds[p] = rng
        return ParamBox.of(bounds)

    def clock_index(self, name: str) -> int:
        return self.clocks.index(name) + 1


# --- tokenizer ------------------------------------------------------------

_PUNCT = ("&&", "->", ":=", "..", "<=", ">=", "==", "!=",
          "{", "}", ";", ":", "=", "<", ">", "!", "?", "-", "+", "*", ",")


def _tokenize(text: str):
    toks = []
    line = 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("id", text[i:j], line))
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", text[i:j], line))
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(("punct", p, line))
                i += len(p)
                break
        else:
            raise InputError(f"line {line}: unexpected character {ch!r}",
                             kind="model-syntax", pos=(line, i))
    toks.append(("end", "", line))
    return toks


class _ModelParser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.net = Network({}, [], [], {}, [])

    # token helpers -------------------------------------------------------
    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def err(self, msg, kind="model-syntax"):
        line = self.peek()[2]
        return InputError(f"line {line}: {msg}", kind=kind, pos=(line, 0))

    def expect(self, text):
        t = self.take()
        if t[1] != text:
            raise InputError(f"line {t[2]}: expected {text!r}, found {t[1]!r}",
                             kind="model-syntax", pos=(t[2], 0))

    def ident(self, what="identifier"):
        t = self.take()
        if t[0] != "id":
            raise InputError(f"line {t[2]}: expected {what}, found {t[1]!r}",
                             kind="model-syntax", pos=(t[2], 0))
        return t[1]

    def integer(self):
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        t = self.take()
        if t[0] != "int":
            raise InputError(f"line {t[2]}: expected integer, found {t[1]!r}",
                             kind="model-syntax", pos=(t[2], 0))
        return sign * int(t[1])

    # grammar -------------------------------------------------------------
    def parse(self) -> Network:
        while True:
            t = self.peek()
            if t[0] == "end":
                break
            word = t[1]
            if word == "param":
                self.take()
                name = self.ident("parameter name")
                self.expect("=")
                lo = self.integer()
                self.expect("..")
                hi = self.integer()
                if name in self.net.params:
                    raise self.err(f"duplicate parameter {name}")
                self.net.params[name] = (lo, hi)
            elif word == "clock":
                line = self.take()[2]
                while self.peek()[0] == "id" and self.peek()[2] == line:
                    self.net.clocks.append(self.ident())
            elif word == "chan":
                line = self.take()[2]
                while self.peek()[0] == "id" and self.peek()[2] == line:
                    self.net.channels.append(self.ident())
            elif word == "var":
                self.take()
                name = self.ident("variable name")
                if self.peek()[1] != ":":
                    raise self.err(
                        f"data variable {name} needs a finite range",
                        kind="unbounded-variable")
                self.expect(":")
                lo = self.integer()
                self.expect("..")
                hi = self.integer()
                self.expect("=")
                init = self.integer()
                if not lo <= init <= hi:
                    raise self.err(f"initial value of {name} outside range")
                self.net.variables[name] = (lo, hi, init)
            elif word == "component":
                self.take()
                self.component()
            else:
                raise self.err(f"unexpected {word!r}")
        if not self.net.components:
            raise self.err("model has no components")
        return self.net

    def component(self):
        name = self.ident("component name")
        comp = Component(name, {}, "", [])
        self.expect("{")
        while self.peek()[1] != "}":
            word = self.take()[1]
            if word == "location":
                loc = self.location(comp)
                comp.locations[loc.name] = loc
            elif word == "init":
                comp.init = self.ident("location name")
            elif word == "edge":
                comp.edges.append(self.edge(comp))
            else:
                raise self.err(f"unexpected {word!r} in component")
        self.expect("}")
        if comp.init not in comp.locations:
            raise self.err(f"unknown init location {comp.init!r} in {name}",
                           kind="unknown-location")
        for e in comp.edges:
            for loc in (e.src, e.dst):
                if loc not in comp.locations:
                    raise self.err(f"unknown location {loc!r} in {name}",
                                   kind="unknown-location")
        self.net.components.append(comp)

    def location(self, comp) -> CompLocation:
        name = self.ident("location name")
        inv_atoms: tuple[Atom, ...] = ()
        inv_text = "true"
        labels: list[str] = []
        if self.peek()[1] == "{":
            self.take()
            while self.peek()[1] != "}":
                word = self.take()[1]
                if word == "invariant":
                    clock_atoms, data_atoms, inv_text = self.guard()
                    if data_atoms:
                        raise self.err("invariants must be clock constraints",
                                       kind="data-invariant")
                    inv_atoms = clock_atoms
                elif word == "label":
                    line = self.toks[self.i - 1][2]
                    while self.peek()[0] == "id" and self.peek()[2] == line:
                        labels.append(self.ident())
                else:
                    raise self.err(f"unexpected {word!r} in location")
                if self.peek()[1] == ";":
                    self.take()
            self.expect("}")
        return CompLocation(name, inv_atoms, inv_text, tuple(labels))

    def edge(self, comp) -> CompEdge:
        src = self.ident("location name")
        self.expect("->")
        dst = self.ident("location name")
        clock_atoms: tuple[Atom, ...] = ()
        data_atoms: tuple[DataAtom, ...] = ()
        guard_text = "true"
        sync = None
        resets: list[str] = []
        updates: list[tuple[str, AffineExpr]] = []
        self.expect("{")
        while self.peek()[1] != "}":
            word = self.take()[1]
            if word == "guard":
                clock_atoms, data_atoms, guard_text = self.guard()
            elif word == "sync":
                chan = self.ident("channel name")
                if chan not in self.net.channels:
                    raise self.err(f"unknown channel {chan!r}",
                                   kind="unknown-channel")
                tag = self.take()[1]
                if tag not in ("!", "?"):
                    raise self.err("sync needs ! or ?")
                sync = (chan, tag)
            elif word == "reset":
                line = self.toks[self.i - 1][2]
                while self.peek()[0] == "id" and self.peek()[2] == line:
                    clk = self.ident()
                    if clk not in self.net.clocks:
                        raise self.err(f"unknown clock {clk!r}",
                                       kind="unknown-clock")
                    resets.append(clk)
            elif word == "update":
                while True:
                    var = self.ident("variable name")
                    if var not in self.net.variables:
                        raise self.err(f"unknown variable {var!r}",
                                       kind="unknown-variable")
                    self.expect(":=")
                    updates.append((var, self.data_expr()))
                    if self.peek()[1] == ",":
                        self.take()
                    else:
                        break
            else:
                raise self.err(f"unexpected {word!r} in edge")
            if self.peek()[1] == ";":
                self.take()
        self.expect("}")
        return CompEdge(src, dst, clock_atoms, data_atoms, sync,
                        tuple(resets), tuple(updates),
                        guard_text)

    # guards and expressions ----------------------------------------------
    def guard(self):
        """Conjunction of atoms; returns (clock atoms, data atoms, text)."""
        if self.peek()[1] == "true":
            self.take()
            return (), (), "true"
        clock_atoms: list[Atom] = []
        data_atoms: list[DataAtom] = []
        texts: list[str] = []
        while True:
            self.atom(clock_atoms, data_atoms, texts)
            if self.peek()[1] == "&&":
                self.take()
            else:
                break
        return tuple(clock_atoms), tuple(data_atoms), " && ".join(texts)

    def _clock_operand(self) -> int | None:
        """Clock index for an id/0 token, or None if not a clock."""
        t = self.peek()
        if t[0] == "int" and t[1] == "0":
            self.take()
            return 0
        if t[0] == "id" and t[1] in self.net.clocks:
            self.take()
            return self.net.clock_index(t[1])
        return None

    def atom(self, clock_atoms, data_atoms, texts):
        t = self.peek()
        ci = self._clock_operand()
        if ci is not None:
            cj = 0
            if self.peek()[1] == "-":
                self.take()
                cj = self._clock_operand()
                if cj is None:
                    raise self.err("clock difference needs a clock or 0 on "
                                   "the right", kind="non-simple-guard")
            if ci != 0 and cj != 0:
                raise self.err(
                    "guards may constrain at most one real clock per atom",
                    kind="non-simple-guard")
            op = self.take()[1]
            if op not in ("<", "<=", ">", ">=", "=="):
                raise self.err(f"bad comparison {op!r} in clock constraint")
            e = self.param_expr()
            texts.append(f"{_cname(self, ci)}{' - ' + _cname(self, cj) if cj else ''}"
                         f" {op} {e}")
            for a in _clock_atom(ci, cj, op, e):
                clock_atoms.append(a)
            return
        if t[0] == "id":
            name = self.take()[1]
            if name in self.net.variables:
                op = self.take()[1]
                if op not in _DATA_OPS:
                    raise self.err(f"bad comparison {op!r} on variable {name}")
                val = self.integer()
                data_atoms.append(DataAtom(name, op, val))
                texts.append(f"{name} {op} {val}")
                return
            if name in self.net.params:
                raise self.err(
                    f"guard left side must be a clock or variable, got "
                    f"parameter {name!r}", kind="model-syntax")
            raise self.err(f"unknown clock {name!r}", kind="unknown-clock")
        raise self.err(f"unexpected {t[1]!r} in guard")

    def param_expr(self) -> AffineExpr:
        """Affine expression over parameters: INT, k*p, p, joined by +/-;
        a leading minus is allowed."""
        total = AffineExpr()
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        while True:
            t = self.take()
            if t[0] == "int":
                k = int(t[1])
                if self.peek()[1] == "*":
                    self.take()
                    p = self.ident("parameter name")
                    if p not in self.net.params:
                        raise self.err(f"unknown parameter {p!r}",
                                       kind="unknown-param")
                    total = total + AffineExpr.var(p, sign * k)
                else:
                    total = total + sign * k
            elif t[0] == "id":
                if t[1] not in self.net.params:
                    raise self.err(f"unknown parameter {t[1]!r}",
                                   kind="unknown-param")
                total = total + AffineExpr.var(t[1], sign)
            else:
                raise InputError(f"line {t[2]}: expected expression term",
                                 kind="model-syntax", pos=(t[2], 0))
            nxt = self.peek()[1]
            if nxt == "+":
                self.take()
                sign = 1
            elif nxt == "-":
                self.take()
                sign = -1
            else:
                return total

    def data_expr(self) -> AffineExpr:
        """Affine expression over data variables (updates)."""
        total = AffineExpr()
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        while True:
            t = self.take()
            if t[0] == "int":
                total = total + sign * int(t[1])
            elif t[0] == "id":
                if t[1] not in self.net.variables:
                    raise self.err(f"unknown variable {t[1]!r}",
                                   kind="unknown-variable")
                total = total + AffineExpr.var(t[1], sign)
            else:
                raise InputError(f"line {t[2]}: expected expression term",
                                 kind="model-syntax", pos=(t[2], 0))
            nxt = self.peek()[1]
            if nxt == "+":
                self.take()
                sign = 1
            elif nxt == "-":
                self.take()
                sign = -1
            else:
                return total


def _cname(parser, idx):
    return "0" if idx == 0 else parser.net.clocks[idx - 1]


def _clock_atom(i: int, j: int, op: str, e: AffineExpr) -> list[Atom]:
    """Normalize a comparison into difference-bound atoms."""
    if op == "<":
        return [(i, j, StrictBound(e, True))]
    if op == "<=":
        return [(i, j, StrictBound(e, False))]
    if op == ">":
        return [(j, i, StrictBound(-e, True))]
    if op == ">=":
        return [(j, i, StrictBound(-e, False))]
    return [(i, j, StrictBound(e, False)), (j, i, StrictBound(-e, False))]


def parse_model(text: str) -> Network:
    return _ModelParser(text).parse()


def load_model(path) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())


def dump_model(net: Network) -> str:
    """Canonical text form; parse(dump(parse(s))) is stable."""
    lines = []
    for p, (lo, hi) in net.params.items():
        lines.append(f"param {p} = {lo}..{hi}")
    if net.clocks:
        lines.append("clock " + " ".join(net.clocks))
    for v, (lo, hi, init) in net.variables.items():
        lines.append(f"var {v} : {lo}..{hi} = {init}")
    if net.channels:
        lines.append("chan " + " ".join(net.channels))
    for comp in net.components:
        lines.append(f"component {comp.name} {{")
        for loc in comp.locations.values():
            parts = [f"invariant {loc.inv_text}"]
            if loc.labels:
                parts.append("label " + " ".join(loc.labels))
            lines.append(f"  location {loc.name} {{ " + "; ".join(parts) + " }")
        lines.append(f"  init {comp.init}")
        for e in comp.edges:
            parts = [f"guard {e.guard_text}"]
            if e.sync:
                parts.append(f"sync {e.sync[0]}{e.sync[1]}")
            if e.resets:
                parts.append("reset " + " ".join(e.resets))
            if e.updates:
                ups = ", ".join(f"{v} := {ex}" for v, ex in e.updates)
                parts.append(f"update {ups}")
            lines.append(f"  edge {e.src} -> {e.dst} {{ " + "; ".join(parts) + " }")
        lines.append("}")
    return "\n".join(lines) + "\n"


# --- composition -----------------------------------------------------------


@dataclass
class PEdge:
    atoms: tuple[Atom, ...]
    resets: tuple[int, ...]
    target: int
    tag: str


@dataclass
class PLoc:
    name: str
    inv: tuple[Atom, ...]
    edges: list[PEdge] = field(default_factory=list)
    accepting: bool = False


@dataclass
class Pta:
    clock_names: list[str]  # index 0 is the zero clock
    locations: list[PLoc]
    initial: int

    @property
    def n_clocks(self) -> int:
        return len(self.clock_names) - 1


class Ptba(Pta):
    """Product automaton with accepting locations."""


class Labelling:
    """Atomic propositions per composed location: component-location names,
    declared labels, and data comparisons on the location's variable
    valuation."""

    def __init__(self, aps: list[frozenset], varvals: list[dict]):
        self.aps = aps
        self.varvals = varvals

    def holds(self, loc: int, atom) -> bool:
        if isinstance(atom, tuple):
            var, op, value = atom
            if var not in self.varvals[loc]:
                raise InputError(f"unknown variable {var!r} in property",
                                 kind="unknown-variable")
            return DataAtom(var, op, value).holds(self.varvals[loc])
        return atom in self.aps[loc]


def compose(net: Network) -> tuple[Pta, Labelling]:
    """Product of the components with data variables folded into locations:
    interleaving for plain edges, pairwise handshake for matching !/? pairs
    (guards conjoined, resets united, sender updates applied first)."""
    varnames = list(net.variables)
    locidx = [
        {name: k for k, name in enumerate(c.locations)} for c in net.components
    ]
    locnames = [list(c.locations) for c in net.components]

    init_state = (
        tuple(locidx[ci][c.init] for ci, c in enumerate(net.components)),
        tuple(net.variables[v][2] for v in varnames),
    )
    index: dict[tuple, int] = {init_state: 0}
    order = [init_state]
    locations: list[PLoc] = []
    aps: list[frozenset] = []
    varvals: list[dict] = []

    def state_id(st) -> int:
        if st not in index:
            index[st] = len(order)
            order.append(st)
        return index[st]

    def apply_updates(vals: dict, edge: CompEdge, tag: str) -> dict:
        out = dict(vals)
        for var, expr in edge.updates:
            nv = expr.eval(out)
            lo, hi, _ = net.variables[var]
            if not lo <= nv <= hi:
                raise InputError(
                    f"update {var} := {expr} leaves range {lo}..{hi} on {tag}",
                    kind="update-out-of-range")
            out[var] = nv
        return out

    k = 0
    while k < len(order):
        locs, vals = order[k]
        valmap = dict(zip(varnames, vals))
        name = "|".join(
            f"{c.name}.{locnames[ci][locs[ci]]}"
            for ci, c in enumerate(net.components))
        if varnames:
            name += "|" + ",".join(f"{v}={valmap[v]}" for v in varnames)
        inv: list[Atom] = []
        ap_set = set()
        for ci, c in enumerate(net.components):
            loc = c.locations[locnames[ci][locs[ci]]]
            inv.extend(loc.inv_atoms)
            ap_set.add(f"{c.name}.{loc.name}")
            ap_set.update(loc.labels)
        ploc = PLoc(name, tuple(inv))
        locations.append(ploc)
        aps.append(frozenset(ap_set))
        varvals.append(valmap)

        # interleaved edges
        for ci, c in enumerate(net.components):
            src_name = locnames[ci][locs[ci]]
            for e in c.edges:
                if e.src != src_name or e.sync is not None:
                    continue
                if not all(d.holds(valmap) for d in e.data_atoms):
                    continue
                tag = f"{c.name}:{e.src}->{e.dst}"
                nv = apply_updates(valmap, e, tag)
                nlocs = list(locs)
                nlocs[ci] = locidx[ci][e.dst]
                tgt = state_id((tuple(nlocs), tuple(nv[v] for v in varnames)))
                ploc.edges.append(PEdge(
                    e.clock_atoms,
                    tuple(sorted(net.clock_index(r) for r in e.resets)),
                    tgt, tag))
        # handshake edges
        for ci, c in enumerate(net.components):
            src_i = locnames[ci][locs[ci]]
            for e1 in c.edges:
                if e1.src != src_i or not e1.sync or e1.sync[1] != "!":
                    continue
                for cj, d in enumerate(net.components):
                    if cj == ci:
                        continue
                    src_j = locnames[cj][locs[cj]]
                    for e2 in d.edges:
                        if (e2.src != src_j or not e2.sync
                                or e2.sync != (e1.sync[0], "?")):
                            continue
                        if not all(a.holds(valmap)
                                   for a in e1.data_atoms + e2.data_atoms):
                            continue
                        tag = (f"{c.name}:{e1.src}->{e1.dst} ~{e1.sync[0]}~ "
                               f"{d.name}:{e2.src}->{e2.dst}")
                        nv = apply_updates(valmap, e1, tag)
                        nv = apply_updates(nv, e2, tag)
                        nlocs = list(locs)
                        nlocs[ci] = locidx[ci][e1.dst]
                        nlocs[cj] = locidx[cj][e2.dst]
                        tgt = state_id(
                            (tuple(nlocs), tuple(nv[v] for v in varnames)))
                        resets = {net.clock_index(r)
                                  for r in e1.resets + e2.resets}
                        ploc.edges.append(PEdge(
                            e1.clock_atoms + e2.clock_atoms,
                            tuple(sorted(resets)), tgt, tag))
        k += 1

    pta = Pta(["0"] + list(net.clocks), locations, 0)
    return pta, Labelling(aps, varvals)


# --- product with a Büchi automaton ----------------------------------------


def product(pta: Pta, lab: Labelling, aut: BuchiAutomaton) -> Ptba:
    """Synchronous product: an automaton edge fires on the label of the
    source location, so a run's location trace spells the word the
    automaton reads.  Accepting locations are those whose automaton state
    is accepting."""
    init = (pta.initial, aut.initial)
    index: dict[tuple[int, int], int] = {init: 0}
    order = [init]
    locations: list[PLoc] = []

    def state_id(st):
        if st not in index:
            index[st] = len(order)
            order.append(st)
        return index[st]

    k = 0
    while k < len(order):
        l, q = order[k]
        base = pta.locations[l]
        ploc = PLoc(f"{base.name}#q{q}", base.inv,
                    accepting=q in aut.accepting)
        locations.append(ploc)
        enabled = [t for t in aut.outgoing(q)
                   if all(lab.holds(l, a) for a in t.pos)
                   and not any(lab.holds(l, a) for a in t.negs)]
        for e in base.edges:
            for t in enabled:
                tgt = state_id((e.target, t.dst))
                ploc.edges.append(PEdge(e.atoms, e.resets, tgt, e.tag))
        k += 1

    out = Ptba(pta.clock_names, locations, 0)
    return out


# --- non-Zeno transformation ------------------------------------------------


def make_nonzeno(a: Ptba) -> Ptba:
    """Force at least one time unit between consecutive accepting visits.

    Locations are duplicated into two phases.  Phase-0 copies are never
    accepting; an edge into an accepting location may switch to phase 1
    when a fresh clock is at least 1, resetting it; from phase 1 the next
    edge drops back to phase 0.  Every accepting run of the result is
    non-Zeno, and every non-Zeno accepting run of the input survives by
    switching phase only at visits spaced one time unit apart.
    """
    z = len(a.clock_names)
    names = a.clock_names + ["_nz"]
    gate: Atom = (0, z, bound(-1))  # fresh clock >= 1

    init = (a.initial, 0)
    index: dict[tuple[int, int], int] = {init: 0}
    order = [init]
    locations: list[PLoc] = []

    def state_id(st):
        if st not in index:
            index[st] = len(order)
            order.append(st)
        return index[st]

    k = 0
    while k < len(order):
        l, ph = order[k]
        base = a.locations[l]
        ploc = PLoc(f"{base.name}~{ph}", base.inv,
                    accepting=base.accepting and ph == 1)
        locations.append(ploc)
        for e in base.edges:
            tgt0 = state_id((e.target, 0))
            ploc.edges.append(PEdge(e.atoms, e.resets, tgt0, e.tag))
            if ph == 0 and a.locations[e.target].accepting:
                tgt1 = state_id((e.target, 1))
                ploc.edges.append(PEdge(
                    e.atoms + (gate,), tuple(sorted(set(e.resets) | {z})),
                    tgt1, e.tag + "+gap"))
        k += 1

    return Ptba(names, locations, 0)


# --- clock maxima for extrapolation ------------------------------------------


def clock_bounds(a: Ptba, box: ParamBox) -> list[int]:
    """Largest constant each clock is effectively compared with, over the
    whole box.

    Every atom contributes to both of its clocks, and both the expression
    and its negation are considered: a lower-bound guard stores the negated
    threshold, so only the pair covers the magnitudes that matter.  The
    zero clock stays at 0.
    """
    n = len(a.clock_names)
    maxima = [0] * n
    atoms: list[Atom] = []
    for loc in a.locations:
        atoms.extend(loc.inv)
        for e in loc.edges:
            atoms.extend(e.atoms)
    for i, j, b in atoms:
        if b.is_inf:
            continue
        cand = max(b.expr.max_bound(box), (-b.expr).max_bound(box))
        for c in (i, j):
            if c != 0:
                maxima[c] = max(maxima[c], cand)
    return maxima


def dump_product(a: Ptba) -> str:
    lines = [f"clocks: {' '.join(a.clock_names[1:])}",
             f"initial: {a.locations[a.initial].name}"]
    for loc in a.locations:
        mark = " (accepting)" if loc.accepting else ""
        lines.append(f"location {loc.name}{mark}")
        for i, j, b in loc.inv:
            op = "<" if b.strict else "<="
            lines.append(f"  invariant {a.clock_names[i]} - {a.clock_names[j]}"
                         f" {op} {b.expr}")
        for e in loc.edges:
            gs = []
            for i, j, b in e.atoms:
                op = "<" if b.strict else "<="
                gs.append(f"{a.clock_names[i]} - {a.clock_names[j]} {op} {b.expr}")
            rs = " reset " + ",".join(a.clock_names[r] for r in e.resets) \
                if e.resets else ""
            lines.append(f"  -> {a.locations[e.target].name}"
                         f" [{' && '.join(gs) if gs else 'true'}]{rs}"
                         f"  ({e.tag})")
    return "\n".join(lines)
