"""Finitely presented graph correspondences over discrete coefficient algebras.

A correspondence is presented by edge classes: each class has a source
class, a range class and a multiplicity, and expands copy-wise as a
complete bipartite block, one edge per (source copy, range copy,
multiplicity index) triple.  The module inner product is the graph Gram
    <F, H>(v) = sum over edges e sourced at v of conj(F(e)) H(e),
so distinct edge copies are orthonormal relative to their source atom, and
the left action is multiplication by f(range(e)).

Everything a verdict depends on is computed at class granularity (which
keeps OMEGA-classes finite data), while witness vectors, tensor bases and
theta decompositions expand the finitely many relevant copies explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Optional

from .algebra import Atom, AtomSet, CoefFn, EvaluationRep, IdealSpec, ideal_complement, ideal_intersect
from .errors import DomainError, InternalInconsistencyError, MalformedInputError, SymbolicOnlyError
from .scalars import OMEGA, QI, QI_ONE, Count, count_mul, count_sum, is_finite


class EdgeClass(NamedTuple):
    name: str
    src: str
    dst: str
    mult: Count


class EdgeCopy(NamedTuple):
    cls: str
    src_i: int
    dst_i: int
    k: int


@dataclass(frozen=True)
class Correspondence:
    algebra: AtomSet
    generators: tuple  # tuple[EdgeClass, ...]

    @staticmethod
    def of(algebra: AtomSet, generators: Iterable[EdgeClass]) -> "Correspondence":
        gens = tuple(EdgeClass(*g) for g in generators)
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise MalformedInputError(f"duplicate edge class names in {names}")
        for g in gens:
            algebra.count_of(g.src)
            algebra.count_of(g.dst)
            if not (g.mult is OMEGA or (isinstance(g.mult, int) and g.mult >= 1)):
                raise MalformedInputError(f"edge class {g.name} has bad multiplicity {g.mult!r}")
        return Correspondence(algebra, gens)

    def edge(self, name: str) -> EdgeClass:
        for g in self.generators:
            if g.name == name:
                return g
        raise DomainError(f"unknown edge class {name!r}")

    def check_copy(self, e: EdgeCopy) -> EdgeCopy:
        g = self.edge(e.cls)
        self.algebra.check_atom(Atom(g.src, e.src_i))
        self.algebra.check_atom(Atom(g.dst, e.dst_i))
        if e.k < 0 or (is_finite(g.mult) and e.k >= g.mult):
            raise DomainError(f"copy {e} outside multiplicity {g.mult}")
        return e

    def source_atom(self, e: EdgeCopy) -> Atom:
        return Atom(self.edge(e.cls).src, e.src_i)

    def range_atom(self, e: EdgeCopy) -> Atom:
        return Atom(self.edge(e.cls).dst, e.dst_i)

    def in_degree(self, cls: str) -> Count:
        """Total incoming multiplicity of one copy of cls."""
        return count_sum(
            count_mul(self.algebra.count_of(g.src), g.mult)
            for g in self.generators if g.dst == cls)

    def edges_from_atom(self, atom: Atom) -> list:
        """All edge copies sourced at the given atom, in canonical order.

        Raises SymbolicOnlyError when some class gives an infinite fiber;
        callers that only need a symbolic verdict never ask for this.
        """
        out = []
        for g in self.generators:
            if g.src != atom.cls:
                continue
            dst_count = self.algebra.count_of(g.dst)
            if not is_finite(dst_count) or not is_finite(g.mult):
                raise SymbolicOnlyError(
                    f"edge class {g.name} has an infinite fiber over {atom.cls}: "
                    "explicit bases unavailable, symbolic verdict only")
            for j in range(dst_count):
                for k in range(g.mult):
                    out.append(EdgeCopy(g.name, atom.index, j, k))
        return out


@dataclass(frozen=True)
class Submodule:
    parent: Correspondence
    span: frozenset  # edge class names

    @staticmethod
    def of(parent: Correspondence, span: Iterable[str]) -> "Submodule":
        names = frozenset(span)
        known = {g.name for g in parent.generators}
        if not names <= known:
            raise MalformedInputError(f"submodule span {sorted(names - known)} outside generators")
        return Submodule(parent, names)

    def is_full(self) -> bool:
        return self.span == {g.name for g in self.parent.generators}


# -- module vectors -----------------------------------------------------------

@dataclass(frozen=True)
class ModuleVector:
    """Finite QI-combination of explicit edge copies."""

    parent: Correspondence
    coeffs: tuple  # tuple[(EdgeCopy, QI)], sorted, nonzero

    @staticmethod
    def of(parent: Correspondence, coeffs: Mapping[EdgeCopy, QI]) -> "ModuleVector":
        items = []
        for e, z in coeffs.items():
            if not z.is_zero():
                items.append((parent.check_copy(EdgeCopy(*e)), z))
        return ModuleVector(parent, tuple(sorted(items)))

    @staticmethod
    def single(parent: Correspondence, e: EdgeCopy) -> "ModuleVector":
        return ModuleVector.of(parent, {e: QI_ONE})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        acc = dict(self.coeffs)
        for e, z in other.coeffs:
            acc[e] = acc.get(e, QI()) + z
        return ModuleVector.of(self.parent, acc)

    def scale(self, z: QI) -> "ModuleVector":
        return ModuleVector.of(self.parent, {e: z * v for e, v in self.coeffs})

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        return self + other.scale(QI() - QI_ONE)


def inner(x: ModuleVector, y: ModuleVector) -> CoefFn:
    """<x, y> as an exact function on the vertex set (conjugate-linear in x).

    Distinct copies have disjoint supports, so only matching copies
    contribute, each a point mass at its source atom.
    """
    c = x.parent
    ycoeffs = dict(y.coeffs)
    pp: dict = {}
    for e, zx in x.coeffs:
        zy = ycoeffs.get(e)
        if zy is not None:
            a = c.source_atom(e)
            pp[a] = pp.get(a, QI()) + zx.conj() * zy
    return CoefFn.of({}, pp)


def left_mul(f: CoefFn, x: ModuleVector) -> ModuleVector:
    """phi(f) x: scales each copy by f at its range atom."""
    c = x.parent
    return ModuleVector.of(c, {e: f.value_at(c.range_atom(e)) * z for e, z in x.coeffs})


def right_mul(x: ModuleVector, f: CoefFn) -> ModuleVector:
    """x . f: scales each copy by f at its source atom."""
    c = x.parent
    return ModuleVector.of(c, {e: z * f.value_at(c.source_atom(e)) for e, z in x.coeffs})


# -- ideal pipeline -----------------------------------------------------------

def kernel_of_left_action(c: Correspondence) -> IdealSpec:
    """Classes on which every left multiplication vanishes: the vertex
    classes that no edge class ranges in."""
    ranged = {g.dst for g in c.generators}
    return IdealSpec.of(c.algebra, set(c.algebra.names) - ranged)


def compacts_preimage(c: Correspondence) -> IdealSpec:
    """Classes whose copies have finite total incoming multiplicity, so the
    left action there decomposes into finitely many rank-one operators."""
    return IdealSpec.of(
        c.algebra, {name for name in c.algebra.names if is_finite(c.in_degree(name))})


def katsura_ideal(c: Correspondence) -> IdealSpec:
    return ideal_intersect(ideal_complement(kernel_of_left_action(c)), compacts_preimage(c))


def ideal_act_submodule(c: Correspondence, j: IdealSpec) -> Submodule:
    """The submodule phi(j) X: spanned by the edge classes ranging in j."""
    if j.parent != c.algebra:
        raise DomainError("ideal belongs to a different algebra")
    return Submodule.of(c, {g.name for g in c.generators if g.dst in j.support})


def is_nondegenerate(c: Correspondence) -> bool:
    return ideal_act_submodule(c, katsura_ideal(c)).is_full()


def orthogonal_complement(s: Submodule) -> Submodule:
    c = s.parent
    comp = Submodule.of(c, {g.name for g in c.generators} - s.span)
    for a in s.span:
        for b in comp.span:
            pa = ModuleVector.single(c, EdgeCopy(a, 0, 0, 0))
            pb = ModuleVector.single(c, EdgeCopy(b, 0, 0, 0))
            if not inner(pa, pb).is_zero():
                raise InternalInconsistencyError(
                    f"edge classes {a} and {b} are not orthogonal")
    return comp


# -- tensor vectors -----------------------------------------------------------

class TensorKey(NamedTuple):
    path: tuple  # tuple[EdgeCopy, ...], leftmost factor first
    atom: Atom


@dataclass(frozen=True)
class TensorVector:
    """Element of the n-fold tensor power against an evaluation space,
    stored as a combination of composable elementary tensors."""

    parent: Correspondence
    level: int
    terms: tuple  # tuple[(TensorKey, QI)], sorted, nonzero

    @staticmethod
    def of(parent: Correspondence, level: int, terms: Mapping[TensorKey, QI]) -> "TensorVector":
        keep = {}
        for key, z in terms.items():
            key = TensorKey(tuple(EdgeCopy(*e) for e in key.path), Atom(*key.atom))
            if len(key.path) != level:
                raise MalformedInputError(f"term {key} has length != level {level}")
            if z.is_zero():
                continue
            if _composable(parent, key):
                keep[key] = z
        return TensorVector(parent, level, tuple(sorted(keep.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "TensorVector") -> "TensorVector":
        if self.level != other.level:
            raise DomainError("adding tensor vectors of different levels")
        acc = dict(self.terms)
        for k, z in other.terms:
            acc[k] = acc.get(k, QI()) + z
        return TensorVector.of(self.parent, self.level, acc)

    def scale(self, z: QI) -> "TensorVector":
        return TensorVector.of(self.parent, self.level, {k: z * v for k, v in self.terms})


def _composable(c: Correspondence, key: TensorKey) -> bool:
    prev_src = None
    for e in key.path:
        c.check_copy(e)
        if prev_src is not None and c.range_atom(e) != prev_src:
            return False
        prev_src = c.source_atom(e)
    if key.path:
        return c.source_atom(key.path[-1]) == key.atom
    return True


def leading_atom(c: Correspondence, key: TensorKey) -> Atom:
    """The atom a level-(n+1) factor must be sourced at to compose."""
    return c.range_atom(key.path[0]) if key.path else key.atom


def pairing(u: TensorVector, v: TensorVector) -> QI:
    """<u, v> in the interior tensor product: composable elementary tensors
    form an orthonormal family, by iterating
    <x (x) h, y (x) h'> = <h, sigma(<x, y>) h'>."""
    if u.level != v.level:
        raise DomainError("pairing of tensor vectors of different levels")
    vd = dict(v.terms)
    out = QI()
    for k, zu in u.terms:
        zv = vd.get(k)
        if zv is not None:
            out = out + zu.conj() * zv
    return out


def pair_by_gram_identity(c: Correspondence, k1: TensorKey, k2: TensorKey) -> QI:
    """<k1, k2> unwound one factor at a time, never assuming elementary
    tensors are orthonormal: <e (x) u, f (x) w> = <u, phi(<e, f>) w>, and
    phi(g) scales w by g at its leading atom.  Handles non-composable keys
    (they pair to zero) and keys of equal length only."""
    if len(k1.path) != len(k2.path):
        raise DomainError("pairing keys of different levels")
    if not k1.path:
        return QI_ONE if k1.atom == k2.atom else QI()
    g = inner(ModuleVector.single(c, k1.path[0]), ModuleVector.single(c, k2.path[0]))
    low1 = TensorKey(k1.path[1:], k1.atom)
    low2 = TensorKey(k2.path[1:], k2.atom)
    return g.value_at(leading_atom(c, low2)) * pair_by_gram_identity(c, low1, low2)


def gram_matrix(c: Correspondence, keys: list) -> list:
    """Gram matrix of tensor keys via the identity-unwinding pairing."""
    return [[pair_by_gram_identity(c, a, b) for b in keys] for a in keys]


def norm_sq(u: TensorVector) -> Fraction:
    p = pairing(u, u)
    if p.im != 0:
        raise InternalInconsistencyError("norm squared has an imaginary part")
    return p.re


# -- interior tensor bases ----------------------------------------------------

def interior_tensor(s: Submodule, sigma: EvaluationRep) -> list:
    """Ordered basis keys of s (x)_sigma H: one elementary tensor e (x) h
    for every edge copy e in the span sourced at a sigma-atom."""
    c = s.parent
    if sigma.parent != c.algebra:
        raise DomainError("evaluation representation over a different algebra")
    basis = []
    for atom in sigma.atoms:
        for e in c.edges_from_atom(atom):
            if e.cls in s.span:
                basis.append(TensorKey((e,), atom))
    return basis


def level_basis(c: Correspondence, sigma: EvaluationRep, level: int) -> list:
    """Ordered basis keys of the level-fold tensor power against sigma."""
    if level == 0:
        return [TensorKey((), a) for a in sigma.atoms]
    prev = level_basis(c, sigma, level - 1)
    out = []
    for key in prev:
        for e in c.edges_from_atom(leading_atom(c, key)):
            out.append(TensorKey((e,) + key.path, key.atom))
    return out


class ReducedSpace(NamedTuple):
    """X^{(n-1)} (x)_sigma H repackaged as an evaluation-like space: one
    slot per basis path, evaluated at the range atom of its leading factor
    (atoms may repeat across slots)."""

    basis: tuple  # tuple[TensorKey, ...]
    atoms: tuple  # tuple[Atom, ...], aligned with basis


def tensor_power_reduction(c: Correspondence, n: int, sigma: EvaluationRep) -> ReducedSpace:
    if n < 1:
        raise DomainError("tensor power must be >= 1")
    basis = level_basis(c, sigma, n - 1)
    atoms = tuple(leading_atom(c, k) for k in basis)
    reduced = ReducedSpace(tuple(basis), atoms)
    # dimension identity: X (x) K enumerated fiberwise over K must match the
    # direct level-n enumeration
    via_k = sum(len(c.edges_from_atom(a)) for a in atoms)
    direct = len(level_basis(c, sigma, n))
    if via_k != direct:
        raise InternalInconsistencyError(
            f"tensor power dimension mismatch: {via_k} != {direct}")
    return reduced


# -- sigma-degeneracy witness -------------------------------------------------

class SigmaWitness(NamedTuple):
    rep: EvaluationRep
    vector: TensorVector
    edge_class: str


def sigma_degeneracy_witness(c: Correspondence) -> Optional[SigmaWitness]:
    """For a degenerate instance: an evaluation sigma and a unit vector in
    X (x)_sigma H exactly orthogonal to phi(J) X (x)_sigma H.

    The vector is a single copy of the first edge class outside phi(J)X,
    and sigma evaluates at copy 0 of its source class; nonvanishing and
    orthogonality are checked through the interior-tensor Gram identity.
    """
    j_span = ideal_act_submodule(c, katsura_ideal(c)).span
    outside = [g for g in c.generators if g.name not in j_span]
    if not outside:
        return None
    g = outside[0]
    atom = Atom(g.src, 0)
    sigma = EvaluationRep.of(c.algebra, [atom])
    copy = EdgeCopy(g.name, 0, 0, 0)
    vec = TensorVector.of(c, 1, {TensorKey((copy,), atom): QI_ONE})
    if norm_sq(vec) != 1:
        raise InternalInconsistencyError("witness vector does not have unit norm")
    sigma_val = evaluate_inner_at(c, copy, copy, atom)
    if sigma_val != QI_ONE:
        raise InternalInconsistencyError("Gram identity disagrees on the witness")
    for name in sorted(j_span):
        rep_copy = EdgeCopy(name, 0, 0, 0)
        cross_key = TensorKey((rep_copy,), atom)
        by_identity = pair_by_gram_identity(c, cross_key, TensorKey((copy,), atom))
        cross = TensorVector.of(c, 1, {cross_key: QI_ONE})
        if not by_identity.is_zero() or not pairing(cross, vec).is_zero():
            raise InternalInconsistencyError(
                f"witness vector is not orthogonal to class {name}")
    return SigmaWitness(sigma, vec, g.name)


def evaluate_inner_at(c: Correspondence, x: EdgeCopy, y: EdgeCopy, atom: Atom) -> QI:
    """<h, sigma(<x, y>) h> for the evaluation at atom: the Gram identity's
    right-hand side for singleton tensors."""
    f = inner(ModuleVector.single(c, x), ModuleVector.single(c, y))
    return f.value_at(atom)


# -- compact operators --------------------------------------------------------

@dataclass(frozen=True)
class ThetaTerm:
    """Rank-one module operator z -> x <y, z>."""

    x: ModuleVector
    y: ModuleVector

    def apply(self, z: ModuleVector) -> ModuleVector:
        return right_mul(self.x, inner(self.y, z))


def theta(x: ModuleVector, y: ModuleVector) -> ThetaTerm:
    if x.parent != y.parent:
        raise DomainError("theta of vectors over different correspondences")
    return ThetaTerm(x, y)


def left_action_as_compacts(c: Correspondence, f: CoefFn) -> list:
    """Finite list of theta terms with sum phi(f), verified on representative
    copies of every generator class.

    Requires f to be an actual algebra element supported inside the compact
    preimage: class-constant parts only over finite classes that lie in the
    ideal, point masses over atoms of classes in the ideal.
    """
    fin = compacts_preimage(c)
    if not f.supported_in(fin):
        raise DomainError(
            f"function supported on {sorted(f.support_classes() - fin.support)} "
            "outside the compact preimage")
    point_masses: dict = {}
    for cls, z in f.class_part:
        n = c.algebra.count_of(cls)
        if not is_finite(n):
            raise DomainError(
                f"class-constant value on infinite class {cls} is not an algebra element")
        for j in range(n):
            a = Atom(cls, j)
            point_masses[a] = point_masses.get(a, QI()) + z
    for a, z in f.point_part:
        a = Atom(*a)
        point_masses[a] = point_masses.get(a, QI()) + z

    terms = []
    for a in sorted(point_masses):
        z = point_masses[a]
        if z.is_zero():
            continue
        for g in c.generators:
            if g.dst != a.cls:
                continue
            src_count = c.algebra.count_of(g.src)
            # finite because a.cls lies in the compact preimage
            assert is_finite(src_count) and is_finite(g.mult)
            for i in range(src_count):
                for k in range(g.mult):
                    e = EdgeCopy(g.name, i, a.index, k)
                    terms.append(theta(ModuleVector.single(c, e).scale(z),
                                       ModuleVector.single(c, e)))

    _verify_theta_sum(c, f, terms)
    return terms


def _verify_theta_sum(c: Correspondence, f: CoefFn, terms: list) -> None:
    probes = set()
    for t in terms:
        for e, _ in t.y.coeffs:
            probes.add(e)
    for g in c.generators:
        probes.add(EdgeCopy(g.name, 0, 0, 0))
    for e in sorted(probes):
        z = ModuleVector.single(c, e)
        total = ModuleVector.of(c, {})
        for t in terms:
            total = total + t.apply(z)
        if total != left_mul(f, z):
            raise InternalInconsistencyError(
                f"theta decomposition disagrees with the left action on {e}")
