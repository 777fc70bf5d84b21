"""Answer set grammars: CFG productions annotated with child-scoped logic rules.

The annotation language is the fragment needed for counting constraints:

* facts ``size(0).``
* definite rules with affine integer heads ``size(X+1) :- size(X)@2.``
* integrity constraints ``:- size(X)@1, not size(X)@2.``
* comparisons between bound variables ``X < Y``, ``X != Y+1``

``p(..)@k`` looks the atom up in the completed model of child ``k``
(1-based). Children are always evaluated before their parent, so negation on
child atoms is stratified; negation on the node's own atoms is only allowed
inside constraints, which are checked after the node's fixpoint.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .earley import DEFAULT_FOREST_CAP, iter_trees
from .errors import AmbiguityCapExceeded, AnnotationError, EvaluationError
from .grammar import Grammar, ParseTree, build_grammar, head_runs, read_source

GroundAtom = tuple[str, tuple[int, ...]]

MAX_NODE_ATOMS = 10_000


@dataclass(frozen=True)
class Term:
    """``var + offset``, or the constant ``offset`` when ``var`` is None."""

    var: str | None
    offset: int = 0

    def value(self, binding: dict[str, int]) -> int:
        return self.offset if self.var is None else binding[self.var] + self.offset

    def __str__(self) -> str:
        if self.var is None:
            return str(self.offset)
        if self.offset == 0:
            return self.var
        return f"{self.var}{'+' if self.offset > 0 else '-'}{abs(self.offset)}"


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()
    child: int | None = None

    def __str__(self) -> str:
        s = self.predicate
        if self.args:
            s += "(" + ",".join(map(str, self.args)) + ")"
        if self.child is not None:
            s += f"@{self.child}"
        return s

    @property
    def variables(self) -> set[str]:
        return {t.var for t in self.args if t.var is not None}


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def __str__(self) -> str:
        return ("not " if self.negated else "") + str(self.atom)

    @property
    def variables(self) -> set[str]:
        return self.atom.variables


_COMPARE = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


@dataclass(frozen=True)
class Comparison:
    left: Term
    op: str
    right: Term

    def holds(self, binding: dict[str, int]) -> bool:
        return _COMPARE[self.op](self.left.value(binding), self.right.value(binding))

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"

    @property
    def variables(self) -> set[str]:
        return {t.var for t in (self.left, self.right) if t.var is not None}


BodyElement = Literal | Comparison


@dataclass(frozen=True)
class AnnotationRule:
    kind: str  # "fact" | "rule" | "constraint"
    head: Atom | None
    body: tuple[BodyElement, ...] = ()

    def __str__(self) -> str:
        body = ", ".join(map(str, self.body))
        if self.kind == "fact":
            return f"{self.head}."
        if self.kind == "constraint":
            return f":- {body}."
        return f"{self.head} :- {body}."

    @property
    def cost(self) -> int:
        return len(self.body) + (self.head is not None)

    def children(self) -> set[int]:
        return {e.atom.child for e in self.body
                if isinstance(e, Literal) and e.atom.child is not None}

    def is_child_scoped(self) -> bool:
        return all(isinstance(e, Comparison) or e.atom.child is not None for e in self.body)


def check_rule(rule: AnnotationRule, arity: int) -> None:
    """Well-formedness against a production body of length ``arity``."""
    if rule.kind == "fact" and (rule.body or rule.head is None):
        raise AnnotationError(f"fact must have a head and no body: {rule}")
    if rule.kind == "rule" and (not rule.body or rule.head is None):
        raise AnnotationError(f"rule needs a head and a body: {rule}")
    if rule.kind == "constraint" and (not rule.body or rule.head is not None):
        raise AnnotationError(f"constraint needs a body and no head: {rule}")
    if rule.head is not None and rule.head.child is not None:
        raise AnnotationError(f"rule head cannot carry a child reference: {rule}")
    positive: set[str] = set()
    for e in rule.body:
        if isinstance(e, Literal):
            if e.atom.child is not None and not 1 <= e.atom.child <= arity:
                raise AnnotationError(
                    f"child reference @{e.atom.child} out of range 1..{arity}: {rule}")
            if not e.negated:
                positive |= e.atom.variables
            elif e.atom.child is None and rule.kind != "constraint":
                raise AnnotationError(f"negation on the node's own atoms: {rule}")
    needed: set[str] = set()
    if rule.head is not None:
        needed |= rule.head.variables
    for e in rule.body:
        if isinstance(e, Comparison) or e.negated:
            needed |= e.variables
    unsafe = needed - positive
    if unsafe:
        raise AnnotationError(f"unsafe variable(s) {sorted(unsafe)} in: {rule}")


# --------------------------------------------------------------------------
# Block parsing

_RULE_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<if>:-)
  | (?P<cmp><=|>=|!=|<|>|=)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_']*)
  | (?P<name>[a-z][A-Za-z0-9_']*)
  | (?P<punct>[(),.@+\-])
""", re.VERBOSE)


class _RuleParser:
    def __init__(self, text: str, line: int = 1, column: int = 1):
        self.toks: list[tuple[str, str, int, int]] = []
        pos = 0
        while pos < len(text):
            m = _RULE_TOKEN.match(text, pos)
            ln = line + text.count("\n", 0, pos)
            nl = text.rfind("\n", 0, pos)
            col = (column + pos) if nl < 0 else pos - nl
            if m is None:
                raise AnnotationError(f"unexpected character {text[pos]!r} in annotation",
                                      ln, col)
            if m.lastgroup not in ("ws", "comment"):
                kind = m.lastgroup if m.lastgroup != "punct" else m.group()
                self.toks.append((kind, m.group(), ln, col))
            pos = m.end()
        self.i = 0
        self.end = (line + text.count("\n"), column)

    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else ("eof", "", *self.end)

    def take(self, kind: str | None = None):
        tok = self.peek()
        if kind is not None and tok[0] != kind:
            raise AnnotationError(f"expected {kind!r}, found {tok[1] or 'end of block'!r}",
                                  tok[2], tok[3])
        self.i += 1
        return tok

    def rules(self) -> list[tuple[AnnotationRule, int, int]]:
        out = []
        while self.peek()[0] != "eof":
            _, _, ln, col = self.peek()
            out.append((self.rule(), ln, col))
        return out

    def rule(self) -> AnnotationRule:
        if self.peek()[0] == "if":
            self.take()
            body = self.body()
            self.take(".")
            return AnnotationRule("constraint", None, tuple(body))
        head = self.atom()
        if self.peek()[0] == ".":
            self.take()
            return AnnotationRule("fact", head)
        self.take("if")
        body = self.body()
        self.take(".")
        return AnnotationRule("rule", head, tuple(body))

    def body(self) -> list[BodyElement]:
        elems = [self.element()]
        while self.peek()[0] == ",":
            self.take()
            elems.append(self.element())
        return elems

    def element(self) -> BodyElement:
        kind, value = self.peek()[:2]
        if kind == "name" and value == "not":
            self.take()
            return Literal(self.atom(), negated=True)
        if kind == "name":
            return Literal(self.atom())
        left = self.term()
        op = self.take("cmp")[1]
        return Comparison(left, op, self.term())

    def atom(self) -> Atom:
        name = self.take("name")[1]
        args: list[Term] = []
        if self.peek()[0] == "(":
            self.take()
            args.append(self.term())
            while self.peek()[0] == ",":
                self.take()
                args.append(self.term())
            self.take(")")
        child = None
        if self.peek()[0] == "@":
            self.take()
            child = int(self.take("int")[1])
        return Atom(name, tuple(args), child)

    def term(self) -> Term:
        kind, value, ln, col = self.peek()
        sign = 1
        if kind == "-":
            self.take()
            sign = -1
            kind, value, ln, col = self.peek()
        if kind == "int":
            self.take()
            return Term(None, sign * int(value))
        if kind == "var" and sign == 1:
            self.take()
            offset = 0
            if self.peek()[0] in ("+", "-") and self.peek(1)[0] == "int":
                s = 1 if self.take()[0] == "+" else -1
                offset = s * int(self.take("int")[1])
            return Term(value, offset)
        raise AnnotationError(f"expected a term, found {value or 'end of block'!r}", ln, col)


def parse_rules(text: str, arity: int | None = None, line: int = 1,
                column: int = 1) -> list[AnnotationRule]:
    rules = []
    for rule, ln, col in _RuleParser(text, line, column).rules():
        if arity is not None:
            try:
                check_rule(rule, arity)
            except AnnotationError as exc:
                raise AnnotationError(str(exc), ln, col) from None
        rules.append(rule)
    return rules


# --------------------------------------------------------------------------
# Annotated grammars

@dataclass(frozen=True)
class AnnotatedGrammar:
    grammar: Grammar
    annotations: tuple[tuple[AnnotationRule, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "annotations", tuple(tuple(a) for a in self.annotations))
        if len(self.annotations) != len(self.grammar.productions):
            raise AnnotationError("one annotation list per production required")
        arities: dict[str, int] = {}
        for prod, rules in zip(self.grammar.productions, self.annotations):
            for rule in rules:
                check_rule(rule, len(prod.body))
                atoms = [e.atom for e in rule.body if isinstance(e, Literal)]
                if rule.head is not None:
                    atoms.append(rule.head)
                for a in atoms:
                    if arities.setdefault(a.predicate, len(a.args)) != len(a.args):
                        raise AnnotationError(
                            f"predicate {a.predicate} used with different arities")

    @classmethod
    def unannotated(cls, g: Grammar) -> AnnotatedGrammar:
        return cls(g, tuple(() for _ in g.productions))

    def extend(self, extra: dict[int, Sequence[AnnotationRule]]) -> AnnotatedGrammar:
        """Copy with ``extra`` rules appended to the given productions."""
        anns = [list(a) for a in self.annotations]
        for idx, rules in extra.items():
            anns[idx].extend(rules)
        return AnnotatedGrammar(self.grammar, tuple(tuple(a) for a in anns))

    def to_text(self) -> str:
        g = self.grammar
        lines: list[str] = []
        for head, run in head_runs(g):
            parts = []
            for idx in run:
                alt = " ".join(map(str, g.productions[idx].body))
                rules = self.annotations[idx]
                if rules:
                    inner = "\n".join(f"    {r}" for r in rules)
                    alt = (alt + " " if alt else "") + "{\n" + inner + "\n}"
                parts.append(alt)
            lines.append(f"{head} -> " + " | ".join(parts))
        return "\n".join(line.rstrip() for line in lines) + "\n"


def parse_asg(text: str) -> AnnotatedGrammar:
    alts = read_source(text)
    g = build_grammar(alts)
    annotations = []
    for alt in alts:
        if alt.block is None:
            annotations.append(())
        else:
            annotations.append(tuple(parse_rules(
                alt.block.value, len(alt.body), alt.block.line, alt.block.column)))
    return AnnotatedGrammar(g, tuple(annotations))


# --------------------------------------------------------------------------
# Evaluation

@dataclass(frozen=True)
class NodeModel:
    atoms: frozenset[GroundAtom]
    violated: bool = False


EMPTY_MODEL = NodeModel(frozenset())


def _index(atoms: Iterable[GroundAtom]) -> dict[str, list[tuple[int, ...]]]:
    idx: dict[str, list[tuple[int, ...]]] = {}
    for pred, args in atoms:
        idx.setdefault(pred, []).append(args)
    return idx


def _match(args: tuple[Term, ...], values: tuple[int, ...],
           binding: dict[str, int]) -> dict[str, int] | None:
    if len(args) != len(values):
        raise EvaluationError("atom arity mismatch")
    out = binding
    for term, v in zip(args, values):
        if term.var is None:
            if term.offset != v:
                return None
        elif term.var in out:
            if out[term.var] + term.offset != v:
                return None
        else:
            if out is binding:
                out = dict(binding)
            out[term.var] = v - term.offset
    return out


def _ground(atom: Atom, binding: dict[str, int]) -> GroundAtom:
    return atom.predicate, tuple(t.value(binding) for t in atom.args)


def _bindings(body: Sequence[BodyElement], children: Sequence, local,
              delta=None, pivot: int = -1) -> Iterator[dict]:
    """Variable bindings satisfying ``body``; ``children[k-1]`` / ``local`` are indexes.

    With ``delta``, the ``pivot``-th positive literal matches only atoms in it.
    """
    positives = [e for e in body if isinstance(e, Literal) and not e.negated]
    checks = [e for e in body if not (isinstance(e, Literal) and not e.negated)]

    def source(atom: Atom, k: int = -1):
        if k == pivot and delta is not None:
            return delta
        return local if atom.child is None else children[atom.child - 1]

    def walk(k: int, binding: dict[str, int]) -> Iterator[dict]:
        if k == len(positives):
            for e in checks:
                if isinstance(e, Comparison):
                    if not e.holds(binding):
                        return
                else:
                    pred, args = _ground(e.atom, binding)
                    if args in source(e.atom).get(pred, ()):
                        return
            yield binding
            return
        atom = positives[k].atom
        for values in source(atom, k).get(atom.predicate, ()):
            b = _match(atom.args, values, binding)
            if b is not None:
                yield from walk(k + 1, b)

    yield from walk(0, {})


def node_atoms(rules: Sequence[AnnotationRule],
               children: Sequence[frozenset[GroundAtom]]) -> frozenset[GroundAtom]:
    """Least fixpoint of the production's facts and rules (semi-naive)."""
    child_idx = [_index(c) for c in children]
    atoms: set[GroundAtom] = set()
    local: dict[str, list[tuple[int, ...]]] = {}
    productive = [r for r in rules if r.kind != "constraint"]
    # positions of node-local positive literals, per rule
    pivots = [[k for k, e in enumerate(
        [e for e in r.body if isinstance(e, Literal) and not e.negated])
        if e.atom.child is None] for r in productive]

    def derive(jobs) -> list[GroundAtom]:
        fresh = []
        for rule, kw in jobs:
            for b in list(_bindings(rule.body, child_idx, local, **kw)):
                a = _ground(rule.head, b)
                if a not in atoms:
                    atoms.add(a)
                    fresh.append(a)
        return fresh

    delta = derive((r, {}) for r in productive)
    while delta:
        if len(atoms) > MAX_NODE_ATOMS:
            raise EvaluationError("node model does not converge (unbounded recursion)")
        for a in delta:
            local.setdefault(a[0], []).append(a[1])
        didx = _index(delta)
        delta = derive((r, {"delta": didx, "pivot": k})
                       for r, ks in zip(productive, pivots) for k in ks)
    return frozenset(atoms)


def constraint_fires(rule: AnnotationRule, atoms: frozenset[GroundAtom],
                     children: Sequence[frozenset[GroundAtom]]) -> bool:
    child_idx = [_index(c) for c in children]
    return next(_bindings(rule.body, child_idx, _index(atoms)), None) is not None


def evaluate_node(rules: Sequence[AnnotationRule],
                  children: Sequence[frozenset[GroundAtom]]) -> NodeModel:
    """Model of one node given its children's atom sets (violation local to the node)."""
    atoms = node_atoms(rules, children)
    violated = any(constraint_fires(r, atoms, children)
                   for r in rules if r.kind == "constraint")
    return NodeModel(atoms, violated)


def evaluate_tree(asg: AnnotatedGrammar, tree: ParseTree) -> NodeModel:
    prod = asg.grammar.productions[tree.node]
    if len(tree.children) != len(prod.body):
        raise EvaluationError(f"node arity {len(tree.children)} does not match {prod}")
    child_models = [EMPTY_MODEL if isinstance(c, str) else evaluate_tree(asg, c)
                    for c in tree.children]
    model = evaluate_node(asg.annotations[tree.node], [m.atoms for m in child_models])
    if any(m.violated for m in child_models):
        return NodeModel(model.atoms, True)
    return model


def member(asg: AnnotatedGrammar, w: str, cap: int = DEFAULT_FOREST_CAP) -> bool:
    """``w`` is in the ASG language iff some parse tree is not violated."""
    n = 0
    for tree in iter_trees(asg.grammar, w):
        if n == cap:
            raise AmbiguityCapExceeded(
                f"{cap} parse trees of {w!r} checked without a satisfying one")
        n += 1
        if not evaluate_tree(asg, tree).violated:
            return True
    return False
