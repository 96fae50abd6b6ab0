"""
Formula
=======

Parse model formulas into ordered term lists and expose the containment order used to partition a model

  .. autosummary::
     :toctree: modules/formula

     Term
     TermList
     parse_formula
     render
     contains
     partition_for_target

"""

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

from lark import Lark, Transformer, v_args
from lark.exceptions import (
    UnexpectedCharacters,
    UnexpectedEOF,
    UnexpectedInput,
    VisitError,
)

from ..internal.utilities import _echo

INTERCEPT_LABEL = "(1)"

formula_grammar = r"""
    start: NAME "~" sum

    ?sum: product
        | "-" product            -> negate
        | sum "+" product        -> add
        | sum "-" product        -> remove

    ?product: interaction
        | product "*" interaction -> cross

    ?interaction: atom
        | interaction ":" atom   -> interact

    ?atom: NAME                  -> factor
         | INT                   -> constant
         | "(" sum ")"

    NAME: /[A-Za-z_.][A-Za-z0-9_.]*/
    INT: /[0-9]+/

    %import common.WS
    %ignore WS
"""

_parser = Lark(formula_grammar, parser="lalr", propagate_positions=True)


class FormulaError(ValueError):
    """A formula could not be parsed.  `offset` is a byte offset into the UTF-8 encoded formula."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at byte {offset}")


@dataclass(frozen=True, eq=False)
class Term:
    """
    A model effect named by the set of factors it crosses.
    The empty set is the intercept, written "(1)".

    Equality ignores the order of the factors: `Term(("A", "B")) == Term(("B", "A"))`.
    """

    factors: Tuple[str, ...] = ()

    def __post_init__(self):
        factors = tuple(self.factors)
        object.__setattr__(self, "factors", factors)
        for f in factors:
            if not isinstance(f, str) or f == "":
                raise ValueError(f"Factor names must be non-empty strings, got {f!r}")
        if len(set(factors)) < len(factors):
            raise ValueError(f"Duplicate factor in term '{':'.join(factors)}'")

    @classmethod
    def from_label(cls, label: str) -> "Term":
        if label.strip() in (INTERCEPT_LABEL, "1", ""):
            return cls(())
        return cls(tuple(p.strip() for p in label.split(":")))

    @property
    def key(self) -> frozenset:
        return frozenset(self.factors)

    @property
    def is_intercept(self) -> bool:
        return len(self.factors) == 0

    @property
    def label(self) -> str:
        if self.is_intercept:
            return INTERCEPT_LABEL
        return ":".join(self.factors)

    def __eq__(self, other):
        if not isinstance(other, Term):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __len__(self):
        return len(self.factors)

    def __str__(self):
        return self.label

    def __repr__(self):
        return f"Term({self.label})"


INTERCEPT = Term(())


def contains(inner: Term, outer: Term) -> bool:
    """
    Containment order on terms: True iff the factors of `inner` are a strict subset of those of `outer`.

    The intercept is contained in every other term; no term contains itself.

    Examples
    --------
    >>> contains(Term(("A",)), Term(("A", "B")))
    True
    >>> contains(Term(("A",)), Term(("A",)))
    False
    """
    return inner.key < outer.key


@dataclass(frozen=True)
class TermList:
    """
    An ordered list of model terms and the name of the response.

    Terms must be unique, and a term may not come before any term it contains.
    Lists that are missing some contained terms (such as an interaction without its main effects) are allowed
    and reported by `hierarchical`.
    """

    terms: Tuple[Term, ...]
    response: str

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        if len(set(terms)) < len(terms):
            raise ValueError("A model may not list the same term twice")
        for idx, term in enumerate(terms):
            later = [t for t in terms[idx + 1 :] if contains(t, term)]
            if len(later) > 0:
                raise ValueError(
                    f"Term '{term.label}' must come after the terms it contains: "
                    f"{', '.join(t.label for t in later)}"
                )

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, idx):
        return self.terms[idx]

    def __contains__(self, term):
        return term in self.terms

    def index(self, term: Term) -> int:
        return self.terms.index(term)

    def get(self, term: Union[str, Term]) -> Term:
        """Look up a term of this model by label ("A:B") or Term, returning the model's own copy"""
        if isinstance(term, str):
            term = Term.from_label(term)
        if term not in self.terms:
            raise ValueError(f"Term '{term.label}' is not in the model")
        return self.terms[self.terms.index(term)]

    @property
    def has_intercept(self) -> bool:
        return INTERCEPT in self.terms

    @property
    def labels(self) -> List[str]:
        return [t.label for t in self.terms]

    @property
    def factors(self) -> List[str]:
        """Factor names in order of first appearance"""
        result = []
        for t in self.terms:
            for f in t.factors:
                if f not in result:
                    result.append(f)
        return result

    def missing_contained(self) -> List[Tuple[Term, List[Term]]]:
        """For each term, the contained terms that are absent from the model"""
        present = set(self.terms)
        result = []
        for t in self.terms:
            contained = [
                Term(c) for r in range(len(t)) for c in combinations(t.factors, r)
            ]
            missing = [c for c in contained if c not in present]
            if len(missing) > 0:
                result.append((t, missing))
        return result

    @property
    def hierarchical(self) -> bool:
        return len(self.missing_contained()) == 0


class TermPartition(NamedTuple):
    not_containing: List[Term]
    target: Term
    containing: List[Term]


def partition_for_target(model: TermList, target: Union[str, Term]) -> TermPartition:
    """
    Split a model around a target term.

    Every other term goes to `containing` if it contains the target, and to `not_containing` otherwise.
    Both lists keep model order.

    Examples
    --------
    >>> model = parse_formula("y ~ A*B")
    >>> partition_for_target(model, "A")
    TermPartition(not_containing=[Term((1)), Term(B)], target=Term(A), containing=[Term(A:B)])
    """
    target = model.get(target)
    not_containing = []
    containing = []
    for term in model:
        if term == target:
            continue
        if contains(target, term):
            containing.append(term)
        else:
            not_containing.append(term)
    return TermPartition(not_containing, target, containing)


@dataclass
class _Expansion:
    """Intermediate value while expanding a formula: terms in order of first appearance"""

    terms: List[Term]
    # None: not mentioned, True: "+ 1", False: "- 1" or "0"
    intercept: Optional[bool] = None


def _merge(first: List[Term], second: Iterable[Term]) -> List[Term]:
    result = list(first)
    for t in second:
        if t not in result:
            result.append(t)
    return result


@v_args(inline=True)
class _FormulaExpander(Transformer):
    def __init__(self, text: str):
        super().__init__()
        self.text = text

    def start(self, response, expansion):
        return str(response), expansion

    def factor(self, name):
        return _Expansion([Term((str(name),))])

    def constant(self, token):
        if str(token) == "1":
            return _Expansion([], intercept=True)
        elif str(token) == "0":
            return _Expansion([], intercept=False)
        raise FormulaError(
            f"only 0 and 1 may appear as numbers, found '{token}'",
            _byte_offset(self.text, token.start_pos),
        )

    def add(self, left, right):
        intercept = right.intercept if right.intercept is not None else left.intercept
        return _Expansion(_merge(left.terms, right.terms), intercept)

    def remove(self, left, right):
        terms = [t for t in left.terms if t not in right.terms]
        intercept = left.intercept
        if right.intercept is True:
            intercept = False
        elif right.intercept is False:
            intercept = True
        return _Expansion(terms, intercept)

    def negate(self, operand):
        return self.remove(_Expansion([]), operand)

    @v_args(meta=True, inline=False)
    def interact(self, meta, children):
        left, right = children
        if left.intercept is False or right.intercept is False:
            raise FormulaError(
                "0 cannot be part of an interaction",
                _byte_offset(self.text, meta.start_pos),
            )
        left_terms = left.terms + ([INTERCEPT] if left.intercept else [])
        right_terms = right.terms + ([INTERCEPT] if right.intercept else [])
        # A term interacted with itself is an error only when written directly (A:A); inside expansions
        # such as A*(A:B) shared factors merge, so A:(A:B) is A:B
        literal = len(left_terms) == 1 and len(right_terms) == 1
        terms = []
        intercept = None
        for lt in left_terms:
            for rt in right_terms:
                if literal and not lt.is_intercept and lt == rt:
                    raise FormulaError(
                        f"factor '{lt.factors[0]}' appears twice in the interaction "
                        f"'{lt.label}:{rt.label}'",
                        _byte_offset(self.text, meta.start_pos),
                    )
                combined = Term(lt.factors + tuple(f for f in rt.factors if f not in lt.key))
                if combined.is_intercept:
                    intercept = True
                elif combined not in terms:
                    terms.append(combined)
        return _Expansion(terms, intercept)

    @v_args(meta=True, inline=False)
    def cross(self, meta, children):
        left, right = children
        both = self.add(left, right)
        return self.add(both, self.interact(meta, children))


def _byte_offset(text: str, char_pos: Optional[int]) -> int:
    if char_pos is None or char_pos < 0:
        char_pos = len(text)
    return len(text[:char_pos].encode("utf-8"))


def _describe_parse_error(text: str, e: UnexpectedInput) -> FormulaError:
    pos = getattr(e, "pos_in_stream", None)
    token = getattr(e, "token", None)
    at_end = token is not None and token.type == "$END"
    if isinstance(e, UnexpectedEOF) or at_end or pos is None or pos < 0 or pos >= len(text):
        return FormulaError("unexpected end of formula", _byte_offset(text, len(text)))
    if isinstance(e, UnexpectedCharacters):
        return FormulaError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
    return FormulaError(f"unexpected '{token}'", _byte_offset(text, pos))


def parse_formula(text: str) -> TermList:
    """
    Parse a model formula into an ordered, deduplicated TermList.

    Parameters
    ----------
    text: str
        A formula such as "y ~ A*B".  Supported operators are `+` (union), `:` (interaction),
        `*` (crossing, A*B is A + B + A:B), `-` (removal), `1` (intercept) and `0` or `-1` (no intercept).
        Parentheses group sub-expressions.

    Returns
    -------
    TermList
        Terms ordered by number of factors, then by first appearance.  The intercept is included unless removed.

    Raises
    ------
    FormulaError
        For syntax errors (with the byte offset of the problem), a factor repeated within one term,
        or an empty right-hand side.

    Examples
    --------
    >>> parse_formula("y ~ A*B").labels
    ['(1)', 'A', 'B', 'A:B']
    >>> parse_formula("y ~ A:B - 1").labels
    ['A:B']
    """
    tilde = text.find("~")
    if tilde >= 0 and text[tilde + 1 :].strip() == "":
        raise FormulaError("empty right-hand side", _byte_offset(text, tilde + 1))
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as e:
        raise _describe_parse_error(text, e) from None
    try:
        response, expansion = _FormulaExpander(text).transform(tree)
    except VisitError as e:
        raise e.orig_exc from None

    terms = list(expansion.terms)
    if expansion.intercept is not False:
        terms.insert(0, INTERCEPT)
    if len(terms) == 0:
        raise FormulaError("empty right-hand side", _byte_offset(text, len(text)))
    order = {t: idx for idx, t in enumerate(terms)}
    terms = sorted(terms, key=lambda t: (len(t), order[t]))

    model = TermList(tuple(terms), response)
    for term, missing in model.missing_contained():
        _echo(
            f"WARNING: '{term.label}' is in the model without "
            f"{', '.join(m.label for m in missing)} (non-hierarchical formula)",
            fg="yellow",
        )
    return model


def render(model: TermList) -> str:
    """
    Canonical text form of a model, which parses back to the same TermList.

    Examples
    --------
    >>> render(parse_formula("y ~ A*B"))
    'y ~ A + B + A:B'
    >>> render(parse_formula("y ~ A:B + 0"))
    'y ~ A:B - 1'
    """
    labels = [t.label for t in model if not t.is_intercept]
    if len(labels) == 0:
        return f"{model.response} ~ 1"
    rhs = " + ".join(labels)
    if not model.has_intercept:
        rhs += " - 1"
    return f"{model.response} ~ {rhs}"
