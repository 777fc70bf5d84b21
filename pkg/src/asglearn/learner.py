"""Learning counting constraints over a CFG from labeled strings.

The hypothesis space has two parts. Scaffolding rules measure list lengths
(``size(X+1) :- size(X)@2.`` and ``size(0).``) and are always present at no
cost; they only add atoms. Candidates are integrity constraints over those
measurements, and a hypothesis is a set of candidates.

Since candidates are constraints, a string is in ``G : H`` iff one of its
parse trees has no node where a constraint of ``H`` fires. ``learn``
evaluates every example tree once, records which candidates fire in it, and
then searches subsets by cost against those records.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .asg import (AnnotatedGrammar, AnnotationRule, Atom, Comparison, Literal, Term,
                  constraint_fires, evaluate_node, member)
from .earley import DEFAULT_FOREST_CAP, iter_trees
from .errors import AmbiguityCapExceeded, Unsatisfiable
from .grammar import Grammar, ParseTree
from .oracle import ExampleSet

X, Y = Term("X"), Term("Y")


@dataclass(frozen=True)
class TemplateConfig:
    predicate: str = "size"
    equality: bool = True
    nonempty: bool = True
    inequality: bool = False


@dataclass(frozen=True)
class CandidateAnnotation:
    id: int
    production: int
    rules: tuple[AnnotationRule, ...]
    family: str
    positions: tuple[int, ...]

    @property
    def cost(self) -> int:
        return sum(len(r.body) for r in self.rules)

    def __str__(self) -> str:
        return " ".join(map(str, self.rules))


@dataclass(frozen=True)
class HypothesisSpace:
    grammar: Grammar
    scaffolding: AnnotatedGrammar
    candidates: tuple[CandidateAnnotation, ...]

    def induced(self, selected: Sequence[int]) -> AnnotatedGrammar:
        extra: dict[int, list[AnnotationRule]] = {}
        for cid in sorted(selected):
            cand = self.candidates[cid]
            extra.setdefault(cand.production, []).extend(cand.rules)
        return self.scaffolding.extend(extra)

    def cost(self, selected: Sequence[int]) -> int:
        return sum(self.candidates[c].cost for c in selected)


@dataclass(frozen=True)
class Hypothesis:
    selected: tuple[int, ...]
    asg: AnnotatedGrammar
    cost: int
    space: HypothesisSpace = field(repr=False, compare=False)

    def describe(self) -> list[str]:
        g = self.space.grammar
        return [f"[{c}] {g.productions[self.space.candidates[c].production]} "
                f"{{ {self.space.candidates[c]} }}" for c in self.selected]


def _counted(g: Grammar) -> set[str]:
    """Nonterminals with a right-recursive ``A -> "t" A`` production."""
    out = set()
    for p in g.productions:
        if (len(p.body) == 2 and p.body[0].terminal and not p.body[1].terminal
                and p.body[1].name == p.head):
            out.add(p.head)
    return out


def generate_space(g: Grammar, templates: TemplateConfig = TemplateConfig(),
                   base: AnnotatedGrammar | None = None) -> HypothesisSpace:
    pred = templates.predicate
    counted = _counted(g)
    scaffold: dict[int, list[AnnotationRule]] = {}
    for idx, p in enumerate(g.productions):
        if p.head not in counted:
            continue
        body = p.body
        if len(body) == 2 and body[0].terminal and body[1].name == p.head:
            scaffold[idx] = [AnnotationRule(
                "rule", Atom(pred, (Term("X", 1),)), (Literal(Atom(pred, (X,), 2)),))]
        elif not body:
            scaffold[idx] = [AnnotationRule("fact", Atom(pred, (Term(None, 0),)))]
        elif len(body) == 1 and body[0].terminal:
            scaffold[idx] = [AnnotationRule("fact", Atom(pred, (Term(None, 1),)))]
    scaffolding = (base or AnnotatedGrammar.unannotated(g)).extend(scaffold)

    candidates: list[CandidateAnnotation] = []

    def add(idx: int, family: str, positions: tuple[int, ...], *body):
        rule = AnnotationRule("constraint", None, tuple(body))
        candidates.append(CandidateAnnotation(len(candidates), idx, (rule,), family, positions))

    for idx, p in enumerate(g.productions):
        slots = [k + 1 for k, s in enumerate(p.body) if not s.terminal and s.name in counted]
        pairs = [(i, j) for n, j in enumerate(slots) for i in slots[:n]]
        if templates.equality:
            for i, j in pairs:
                for a, b in ((i, j), (j, i)):
                    add(idx, "equal", (a, b), Literal(Atom(pred, (X,), a)),
                        Literal(Atom(pred, (X,), b), negated=True))
        if templates.nonempty and p.head not in counted:
            for i in slots:
                add(idx, "nonempty", (i,), Literal(Atom(pred, (Term(None, 0),), i)))
        if templates.inequality:
            for i, j in pairs:
                for a, b in ((i, j), (j, i)):
                    add(idx, "less", (a, b), Literal(Atom(pred, (X,), a)),
                        Literal(Atom(pred, (Y,), b)), Comparison(X, "<", Y))
    return HypothesisSpace(g, scaffolding, tuple(candidates))


# --------------------------------------------------------------------------
# Coverage through the ASG engine

@dataclass(frozen=True)
class CoverageReport:
    accepted: dict[str, bool]
    rejected: dict[str, bool]
    unknown: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(self.accepted.values()) and all(self.rejected.values())

    @property
    def covered(self) -> int:
        return sum(self.accepted.values()) + sum(self.rejected.values())


def covers(h: Hypothesis | AnnotatedGrammar, e: ExampleSet,
           cap: int = DEFAULT_FOREST_CAP) -> CoverageReport:
    """Check both coverage conditions with :func:`asglearn.asg.member`.

    A forest-cap overflow counts against the hypothesis on either side.
    """
    asg = h.asg if isinstance(h, Hypothesis) else h
    unknown = []

    def verdict(w: str) -> bool | None:
        try:
            return member(asg, w, cap)
        except AmbiguityCapExceeded:
            unknown.append(w)
            return None

    accepted = {w: verdict(w) is True for w in e.positives}
    rejected = {w: verdict(w) is False for w in e.negatives}
    return CoverageReport(accepted, rejected, tuple(unknown))


# --------------------------------------------------------------------------
# Search

@dataclass(frozen=True)
class Evidence:
    """Per-tree sets of candidates that fire, for one example string."""

    text: str
    signatures: tuple[frozenset[int], ...]
    truncated: bool


def _tree_signature(space: HypothesisSpace, tree: ParseTree,
                    by_prod: dict[int, list[CandidateAnnotation]]):
    """(scaffold-violated, fired candidate ids, node atoms)."""
    asg = space.scaffolding
    kids = [(False, frozenset(), frozenset()) if isinstance(c, str)
            else _tree_signature(space, c, by_prod) for c in tree.children]
    child_atoms = [k[2] for k in kids]
    model = evaluate_node(asg.annotations[tree.node], child_atoms)
    fired = set().union(*(k[1] for k in kids)) if kids else set()
    for cand in by_prod.get(tree.node, ()):
        if any(constraint_fires(r, model.atoms, child_atoms) for r in cand.rules):
            fired.add(cand.id)
    violated = model.violated or any(k[0] for k in kids)
    return violated, frozenset(fired), model.atoms


def evidence(space: HypothesisSpace, w: str, cap: int = DEFAULT_FOREST_CAP) -> Evidence:
    by_prod: dict[int, list[CandidateAnnotation]] = {}
    for cand in space.candidates:
        by_prod.setdefault(cand.production, []).append(cand)
    sigs: list[frozenset[int]] = []
    truncated = False
    for n, tree in enumerate(iter_trees(space.grammar, w)):
        if n == cap:
            truncated = True
            break
        violated, fired, _ = _tree_signature(space, tree, by_prod)
        if not violated:
            sigs.append(fired)
    return Evidence(w, tuple(dict.fromkeys(sigs)), truncated)


def accepts_under(ev: Evidence, selected: frozenset[int]) -> bool:
    return any(not (sig & selected) for sig in ev.signatures)


def rejects_under(ev: Evidence, selected: frozenset[int]) -> bool:
    return not ev.truncated and all(sig & selected for sig in ev.signatures)


def _subsets(ids: Sequence[int], costs: dict[int, int], budget: int,
             prune) -> Iterator[tuple[int, ...]]:
    """Subsets of ``ids`` costing exactly ``budget``, in lexicographic id order."""

    def walk(start: int, chosen: tuple[int, ...], left: int):
        if left == 0:
            yield chosen
            return
        for n in range(start, len(ids)):
            c = ids[n]
            if costs[c] <= left:
                nxt = chosen + (c,)
                if prune(nxt):
                    continue
                yield from walk(n + 1, nxt, left - costs[c])

    yield from walk(0, (), budget)


@dataclass
class SearchStats:
    excluded: tuple[int, ...] = ()
    subsets_checked: int = 0


def learn(space: HypothesisSpace, examples: ExampleSet, cap: int = DEFAULT_FOREST_CAP,
          verify: bool = True, stats: SearchStats | None = None) -> Hypothesis:
    """Minimal-cost covering hypothesis; ties go to the lexicographically smallest ids."""
    pos = [evidence(space, w, cap) for w in examples.positives]
    neg = [evidence(space, w, cap) for w in examples.negatives]
    stats = stats if stats is not None else SearchStats()
    everything = frozenset(c.id for c in space.candidates)

    hopeless = [ev.text for ev in pos if not ev.signatures]
    if hopeless:
        raise Unsatisfiable(
            f"positive examples outside the grammar (or rejected by its base "
            f"annotations): {hopeless[:5]}", closest=(), covered=0, total=len(examples))

    # a candidate firing in every tree of some positive can never be selected
    excluded = {c for c in everything
                if any(all(c in sig for sig in ev.signatures) for ev in pos)}
    stats.excluded = tuple(sorted(excluded))
    ids = [c.id for c in space.candidates if c.id not in excluded]
    costs = {c.id: c.cost for c in space.candidates}

    def fails_positive(sel: tuple[int, ...]) -> bool:
        s = frozenset(sel)
        return not all(accepts_under(ev, s) for ev in pos)

    best: tuple[int, tuple[int, ...]] = (-1, ())
    for budget in range(sum(costs[c] for c in ids) + 1):
        for sel in _subsets(ids, costs, budget, fails_positive):
            stats.subsets_checked += 1
            s = frozenset(sel)
            covered_neg = sum(rejects_under(ev, s) for ev in neg)
            if covered_neg == len(neg):
                hyp = Hypothesis(sel, space.induced(sel), budget, space)
                if verify:
                    report = covers(hyp, examples, cap)
                    assert report.passed, f"search/engine disagreement on {sel}"
                return hyp
            if covered_neg > best[0]:
                best = (covered_neg, sel)
    covered = len(pos) + max(best[0], 0)
    raise Unsatisfiable(
        f"no subset of the {len(space.candidates)} candidates covers the examples; "
        f"best subset {best[1]} covers {covered}/{len(examples)}",
        closest=best[1], covered=covered, total=len(examples))


def hypothesis_from(space: HypothesisSpace, selected: Sequence[int]) -> Hypothesis:
    sel = tuple(sorted(selected))
    return Hypothesis(sel, space.induced(sel), space.cost(sel), space)


# --------------------------------------------------------------------------
# ILASP-style export

def to_ilasp(space: HypothesisSpace, examples: ExampleSet) -> str:
    """Learning task as text: scaffolded grammar, weighted candidate rules, examples.

    Candidate rules read ``cost ~ rule @production``; examples are quoted
    strings prefixed with ``+`` or ``-``.
    """
    lines = ["% grammar with measurement rules", space.scaffolding.to_text().rstrip(), "",
             "% hypothesis space"]
    for cand in space.candidates:
        for rule in cand.rules:
            lines.append(f"{cand.cost} ~ {rule} @{cand.production + 1}")
    lines.append("")
    lines.append("% examples")
    lines.extend(f'+ "{w}"' for w in examples.positives)
    lines.extend(f'- "{w}"' for w in examples.negatives)
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Diagnostics

@dataclass(frozen=True)
class CoverageGap:
    """A candidate the examples neither require nor forbid, though it changes the language."""

    candidate: int
    witness: str  # accepted by the hypothesis, rejected once the candidate is added


def coverage_gaps(h: Hypothesis, examples: ExampleSet, lmax: int = 12,
                  cap: int = DEFAULT_FOREST_CAP) -> list[CoverageGap]:
    """Candidates whose addition keeps every example covered but alters ``L(G:H)``.

    A nonempty result means the negative examples lack a violation class: the
    learned grammar is the cheapest one consistent with the data, and the
    data cannot tell it apart from the stricter alternatives.
    """
    from .equivalence import equivalence_check

    space = h.space
    pos = [evidence(space, w, cap) for w in examples.positives]
    neg = [evidence(space, w, cap) for w in examples.negatives]
    gaps = []
    for cand in space.candidates:
        if cand.id in h.selected:
            continue
        sel = frozenset(h.selected) | {cand.id}
        if not (all(accepts_under(ev, sel) for ev in pos)
                and all(rejects_under(ev, sel) for ev in neg)):
            continue
        diff = equivalence_check(h.asg, space.induced(sorted(sel)), lmax, limit=1)
        if not diff.equivalent:
            gaps.append(CoverageGap(cand.id, diff.counterexamples[0]))
    return gaps
