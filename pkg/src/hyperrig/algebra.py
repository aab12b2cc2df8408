"""Commutative coefficient algebras over presented discrete vertex sets.

A vertex set is presented by classes with a count each (a positive integer
or OMEGA); an atom is one copy inside a class.  Functions on the vertex set
that the toolkit manipulates are finite formal sums of class-constant parts
and single-atom point masses, which is enough to express both the ideal
generators delta_class and the copy-level inner products delta_atom that
show up in the Toeplitz relations.  Ideals are tracked at class
granularity, which keeps OMEGA-classes finitely representable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional

from .errors import DomainError, MalformedInputError
from .scalars import OMEGA, QI, Count, QI_ONE, is_finite


class Atom(NamedTuple):
    cls: str
    index: int


@dataclass(frozen=True)
class AtomSet:
    classes: tuple  # tuple[tuple[str, Count], ...]

    @staticmethod
    def of(classes: Iterable) -> "AtomSet":
        items = tuple((name, count) for name, count in classes)
        names = [name for name, _ in items]
        if len(set(names)) != len(names):
            raise MalformedInputError(f"duplicate class names in {names}")
        for name, count in items:
            if not (count is OMEGA or (isinstance(count, int) and count >= 1)):
                raise MalformedInputError(f"class {name} has non-positive count {count!r}")
        return AtomSet(items)

    @property
    def names(self) -> tuple:
        return tuple(name for name, _ in self.classes)

    def count_of(self, cls: str) -> Count:
        for name, count in self.classes:
            if name == cls:
                return count
        raise DomainError(f"unknown class {cls!r}")

    def check_atom(self, atom: Atom) -> Atom:
        count = self.count_of(atom.cls)
        if atom.index < 0 or (is_finite(count) and atom.index >= count):
            raise DomainError(f"atom {atom} outside class of count {count}")
        return atom


@dataclass(frozen=True)
class IdealSpec:
    parent: AtomSet
    support: frozenset

    @staticmethod
    def of(parent: AtomSet, support: Iterable[str]) -> "IdealSpec":
        supp = frozenset(support)
        unknown = supp - set(parent.names)
        if unknown:
            raise MalformedInputError(f"ideal support {sorted(unknown)} outside the algebra")
        return IdealSpec(parent, supp)

    def contains_class(self, cls: str) -> bool:
        return cls in self.support


def ideal_complement(i: IdealSpec) -> IdealSpec:
    return IdealSpec(i.parent, frozenset(i.parent.names) - i.support)


def ideal_intersect(a: IdealSpec, b: IdealSpec) -> IdealSpec:
    if a.parent != b.parent:
        raise DomainError("ideal_intersect: ideals live over different algebras")
    return IdealSpec(a.parent, a.support & b.support)


@dataclass(frozen=True)
class EvaluationRep:
    """Finite direct sum of evaluation representations, one per listed atom."""

    parent: AtomSet
    atoms: tuple  # tuple[Atom, ...]

    @staticmethod
    def of(parent: AtomSet, atoms: Iterable[Atom]) -> "EvaluationRep":
        listed = tuple(Atom(*a) for a in atoms)
        if len(set(listed)) != len(listed):
            raise MalformedInputError(f"repeated atoms in evaluation list {listed}")
        for a in listed:
            parent.check_atom(a)
        return EvaluationRep(parent, listed)

    @property
    def dimension(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class CoefFn:
    """Exact function on the vertex set: class-constant part + point masses.

    Closed under +, *, and conjugation, so evaluation homomorphisms can be
    property-tested without ever leaving exact arithmetic.
    """

    class_part: tuple = ()  # tuple[(str, QI)], sorted, nonzero values
    point_part: tuple = ()  # tuple[(Atom, QI)], sorted, nonzero values

    @staticmethod
    def of(class_part: Mapping[str, QI] = {}, point_part: Mapping[Atom, QI] = {}) -> "CoefFn":
        cp = tuple(sorted((k, v) for k, v in class_part.items() if not v.is_zero()))
        pp = tuple(sorted(((Atom(*k), v) for k, v in point_part.items() if not v.is_zero())))
        return CoefFn(cp, pp)

    @staticmethod
    def delta_class(cls: str, value: QI = QI_ONE) -> "CoefFn":
        return CoefFn.of({cls: value})

    @staticmethod
    def delta_atom(atom: Atom, value: QI = QI_ONE) -> "CoefFn":
        return CoefFn.of({}, {atom: value})

    @staticmethod
    def zero() -> "CoefFn":
        return CoefFn()

    def is_zero(self) -> bool:
        return not self.class_part and not self.point_part

    def _cp(self) -> dict:
        return dict(self.class_part)

    def _pp(self) -> dict:
        return dict(self.point_part)

    def value_at(self, atom: Atom) -> QI:
        v = dict(self.class_part).get(atom.cls, QI())
        return v + dict(self.point_part).get(Atom(*atom), QI())

    def support_classes(self) -> frozenset:
        classes = {cls for cls, _ in self.class_part}
        classes |= {a.cls for a, _ in self.point_part}
        return frozenset(classes)

    def __add__(self, other: "CoefFn") -> "CoefFn":
        cp = self._cp()
        for k, v in other.class_part:
            cp[k] = cp.get(k, QI()) + v
        pp = self._pp()
        for k, v in other.point_part:
            pp[k] = pp.get(k, QI()) + v
        return CoefFn.of(cp, pp)

    def __sub__(self, other: "CoefFn") -> "CoefFn":
        return self + other.scale(QI() - QI_ONE)

    def scale(self, z: QI) -> "CoefFn":
        return CoefFn.of({k: z * v for k, v in self.class_part},
                         {k: z * v for k, v in self.point_part})

    def __mul__(self, other: "CoefFn") -> "CoefFn":
        # (c + p)(c' + p') pointwise; the point support stays finite
        cp: dict = {}
        for k, v in self.class_part:
            for k2, v2 in other.class_part:
                if k == k2:
                    cp[k] = cp.get(k, QI()) + v * v2
        pp: dict = {}
        sc, oc = dict(self.class_part), dict(other.class_part)
        for a, v in self.point_part:
            pp[a] = pp.get(a, QI()) + v * oc.get(a.cls, QI())
        for a, v in other.point_part:
            pp[a] = pp.get(a, QI()) + v * sc.get(a.cls, QI())
        sp = dict(self.point_part)
        for a, v in other.point_part:
            if a in sp:
                pp[a] = pp.get(a, QI()) + sp[a] * v
        return CoefFn.of(cp, pp)

    def conj(self) -> "CoefFn":
        return CoefFn.of({k: v.conj() for k, v in self.class_part},
                         {k: v.conj() for k, v in self.point_part})

    def supported_in(self, ideal: IdealSpec) -> bool:
        return self.support_classes() <= ideal.support


def evaluate(rep: EvaluationRep, f: CoefFn) -> list:
    """Diagonal of the evaluation of f in rep, as a list of QI entries."""
    for atom, _ in f.point_part:
        rep.parent.check_atom(atom)
    for cls, _ in f.class_part:
        rep.parent.count_of(cls)
    return [f.value_at(a) for a in rep.atoms]
