"""Truncated Fock representation and the non-maximality witness pipeline.

The Fock space over an evaluation representation sigma is graded by path
length; level n has the composable paths of length n ending in a sigma
atom as an orthonormal basis.  Truncating at level N keeps everything a
finite exact matrix problem: the creation operators annihilate the top
level, and every relation check excludes the top level, a documented
truncation boundary rather than an approximation.

All operators are stored column-sparse over basis keys, all scalars are
Gaussian rationals, and every residual is a max squared modulus that must
come out exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .algebra import Atom, CoefFn, EvaluationRep, IdealSpec
from .correspondence import (
    Correspondence, EdgeCopy, ModuleVector, TensorKey, gram_matrix, inner,
    katsura_ideal, leading_atom, left_action_as_compacts, left_mul,
    sigma_degeneracy_witness,
)
from .errors import (
    BudgetExceededError, DomainError, InternalInconsistencyError,
    WitnessRefusedError,
)
from .scalars import QI, QI_ONE


@dataclass(frozen=True, eq=False)
class TruncatedFock:
    parent: Correspondence
    sigma: EvaluationRep
    n_levels: int  # N; bases cover levels 0..N inclusive
    bases: tuple   # tuple[tuple[TensorKey, ...]]
    index: dict    # TensorKey -> level

    def level_dim(self, n: int) -> int:
        return len(self.bases[n])

    def all_keys(self) -> list:
        return [k for level in self.bases for k in level]

    def gram(self, level: int) -> list:
        """Gram matrix of one level via the identity-unwinding pairing
        (the basis is orthonormal, so this must come out the identity)."""
        return gram_matrix(self.parent, list(self.bases[level]))


def build_fock(c: Correspondence, sigma: EvaluationRep, n_levels: int = 3,
               basis_budget: int = 10_000) -> TruncatedFock:
    """Enumerate the path bases of levels 0..n_levels.

    Raises SymbolicOnlyError on an infinite fiber along the way and
    BudgetExceededError when the total dimension passes the budget.
    """
    if n_levels < 1:
        raise DomainError("truncation level must be at least 1")
    if sigma.parent != c.algebra:
        raise DomainError("evaluation representation over a different algebra")
    bases = [tuple(TensorKey((), a) for a in sigma.atoms)]
    total = len(bases[0])
    for _ in range(n_levels):
        nxt = []
        for key in bases[-1]:
            for e in c.edges_from_atom(leading_atom(c, key)):
                nxt.append(TensorKey((e,) + key.path, key.atom))
        total += len(nxt)
        if total > basis_budget:
            raise BudgetExceededError(
                f"Fock basis needs more than {basis_budget} vectors "
                f"({total} and counting at level {len(bases)})")
        bases.append(tuple(nxt))
    index = {k: n for n, level in enumerate(bases) for k in level}
    return TruncatedFock(c, sigma, n_levels, tuple(bases), index)


# -- graded operators ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GradedOperator:
    """Column-sparse operator between Fock levels: cols maps a basis key at
    level n to its image, a vector supported at level n + degree.  A key
    without a column is sent to zero."""

    fock: TruncatedFock
    degree: int
    cols: dict  # TensorKey -> {TensorKey: QI}

    def col(self, key: TensorKey) -> dict:
        return self.cols.get(key, {})

    def apply(self, vec: dict) -> dict:
        out: dict = {}
        for k, z in vec.items():
            for kk, w in self.col(k).items():
                out[kk] = out.get(kk, QI()) + z * w
        return {k: v for k, v in out.items() if not v.is_zero()}

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        if self.fock is not other.fock or self.degree != other.degree:
            raise DomainError("adding operators of different shapes")
        cols = {k: dict(v) for k, v in self.cols.items()}
        for k, c in other.cols.items():
            tgt = cols.setdefault(k, {})
            for kk, z in c.items():
                tgt[kk] = tgt.get(kk, QI()) + z
        return GradedOperator(self.fock, self.degree, _drop_zeros(cols))

    def scale(self, z: QI) -> "GradedOperator":
        cols = {k: {kk: z * w for kk, w in c.items()} for k, c in self.cols.items()}
        return GradedOperator(self.fock, self.degree, _drop_zeros(cols))

    def compose(self, other: "GradedOperator") -> "GradedOperator":
        """self after other."""
        if self.fock is not other.fock:
            raise DomainError("composing operators over different Fock spaces")
        cols: dict = {}
        for j, through in other.cols.items():
            out: dict = {}
            for k, z in through.items():
                for i, w in self.col(k).items():
                    out[i] = out.get(i, QI()) + w * z
            out = {i: v for i, v in out.items() if not v.is_zero()}
            if out:
                cols[j] = out
        return GradedOperator(self.fock, self.degree + other.degree, cols)

    def adjoint(self) -> "GradedOperator":
        cols: dict = {}
        for j, c in self.cols.items():
            for i, z in c.items():
                cols.setdefault(i, {})[j] = z.conj()
        return GradedOperator(self.fock, -self.degree, cols)


def _drop_zeros(cols: dict) -> dict:
    out = {}
    for k, c in cols.items():
        kept = {kk: z for kk, z in c.items() if not z.is_zero()}
        if kept:
            out[k] = kept
    return out


def zero_operator(fock: TruncatedFock, degree: int) -> GradedOperator:
    return GradedOperator(fock, degree, {})


def operator_residual(a: GradedOperator, b: GradedOperator,
                      source_keys: Optional[Iterable] = None) -> Fraction:
    """Max squared modulus of any matrix entry of a - b, over the given
    source columns (default: everywhere)."""
    if a.degree != b.degree:
        raise DomainError("comparing operators of different degrees")
    keys = set(a.cols) | set(b.cols) if source_keys is None else source_keys
    worst = Fraction(0)
    for k in keys:
        ca, cb = a.col(k), b.col(k)
        for kk in set(ca) | set(cb):
            worst = max(worst, (ca.get(kk, QI()) - cb.get(kk, QI())).abs2())
    return worst


def restrict_to_subspace(op: GradedOperator, keys: Iterable) -> GradedOperator:
    """Compression P op P onto the span of the given basis keys."""
    keyset = set(keys)
    cols = {k: {kk: z for kk, z in c.items() if kk in keyset}
            for k, c in op.cols.items() if k in keyset}
    return GradedOperator(op.fock, op.degree, _drop_zeros(cols))


# -- the representation --------------------------------------------------------

def rho0(fock: TruncatedFock, f: CoefFn) -> GradedOperator:
    """Diagonal action: multiply each basis key by f at its leading atom
    (level 0: at its vacuum atom)."""
    c = fock.parent
    cols = {}
    for key in fock.all_keys():
        z = f.value_at(leading_atom(c, key))
        if not z.is_zero():
            cols[key] = {key: z}
    return GradedOperator(fock, 0, cols)


def t0(fock: TruncatedFock, x: ModuleVector) -> GradedOperator:
    """Creation: tensor x on the left; the top level is annihilated."""
    c = fock.parent
    if x.parent != c:
        raise DomainError("vector over a different correspondence")
    cols: dict = {}
    for n in range(fock.n_levels):
        for key in fock.bases[n]:
            lead = leading_atom(c, key)
            col: dict = {}
            for e, z in x.coeffs:
                if c.source_atom(e) == lead:
                    nk = TensorKey((e,) + key.path, key.atom)
                    if nk not in fock.index:
                        raise InternalInconsistencyError(
                            f"creation left the enumerated basis at {nk}")
                    col[nk] = col.get(nk, QI()) + z
            col = {kk: z for kk, z in col.items() if not z.is_zero()}
            if col:
                cols[key] = col
    return GradedOperator(fock, 1, cols)


def psi_t(fock: TruncatedFock, terms: Iterable) -> GradedOperator:
    """Image of a finite rank-one decomposition: sum of t(x) t(y)*."""
    out = zero_operator(fock, 0)
    for term in terms:
        out = out + t0(fock, term.x).compose(t0(fock, term.y).adjoint())
    return out


# -- relation checks -----------------------------------------------------------

@dataclass(frozen=True)
class IsometryReport:
    """Max squared-modulus deviations of the two defining relations,
    checked on levels 0..N-1 (the top level sits past the truncation
    boundary for the adjoint relation)."""

    multiplication: Fraction  # rho(f) t(x) vs t(phi(f) x)
    toeplitz: Fraction        # t(x)* t(x') vs rho(<x, x'>)

    @property
    def max_residual(self) -> Fraction:
        return max(self.multiplication, self.toeplitz)


def generator_functions(fock: TruncatedFock) -> list:
    """Class indicators, point masses at every leading atom, and one
    non-unimodular multiple per class (gauge-style corruptions of t are
    invisible to indicator functions alone)."""
    c = fock.parent
    fns = [CoefFn.delta_class(nm) for nm in c.algebra.names]
    leads = sorted({leading_atom(c, k) for k in fock.all_keys()})
    fns += [CoefFn.delta_atom(a) for a in leads]
    fns += [CoefFn.delta_class(nm, QI(Fraction(1, 2), Fraction(1, 2)))
            for nm in c.algebra.names]
    return fns


def generator_vectors(fock: TruncatedFock) -> list:
    """One singleton per edge copy that can appear as a first tensor factor,
    plus a representative copy of every class."""
    c = fock.parent
    copies = {k.path[0] for k in fock.all_keys() if k.path}
    copies |= {EdgeCopy(g.name, 0, 0, 0) for g in c.generators}
    return [ModuleVector.single(c, e) for e in sorted(copies)]


def verify_isometric_rep(fock: TruncatedFock,
                         rho_of: Optional[Callable] = None,
                         t_of: Optional[Callable] = None,
                         fns: Optional[list] = None,
                         vecs: Optional[list] = None) -> IsometryReport:
    """Check both defining relations exactly on generator pairs.

    rho_of / t_of default to the honest truncated operators; passing
    corrupted builders turns this into a negative control.
    """
    if rho_of is None:
        rho_of = lambda f: rho0(fock, f)
    if t_of is None:
        t_of = lambda x: t0(fock, x)
    if fns is None:
        fns = generator_functions(fock)
    if vecs is None:
        vecs = generator_vectors(fock)
    src = [k for n in range(fock.n_levels) for k in fock.bases[n]]

    # the same vectors recur across the whole function grid
    t_memo = {}

    def t_at(x):
        op = t_memo.get(x)
        if op is None:
            op = t_memo[x] = t_of(x)
        return op

    mult = Fraction(0)
    for f in fns:
        rf = rho_of(f)
        for x in vecs:
            lhs = rf.compose(t_at(x))
            rhs = t_at(left_mul(f, x))
            mult = max(mult, operator_residual(lhs, rhs, src))

    toep = Fraction(0)
    ts = [(x, t_at(x)) for x in vecs]
    for x, tx in ts:
        txa = tx.adjoint()
        for y, ty in ts:
            lhs = txa.compose(ty)
            rhs = rho_of(inner(x, y))
            toep = max(toep, operator_residual(lhs, rhs, src))
    return IsometryReport(mult, toep)


# -- the witness subspace -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WitnessSubspace:
    """Basis-key span per level.  m0 is the level-1 seed for subspaces built
    by build_witness_subspace; the full space (used as a negative control
    for covariance) carries m0 = ideal = None."""

    levels: tuple  # tuple[tuple[TensorKey, ...]] per level 0..N
    m0: Optional[tuple]
    ideal: Optional[IdealSpec]

    def key_set(self) -> set:
        return {k for level in self.levels for k in level}


def full_subspace(fock: TruncatedFock) -> WitnessSubspace:
    return WitnessSubspace(tuple(fock.bases), None, None)


def build_witness_subspace(fock: TruncatedFock, j: IdealSpec) -> WitnessSubspace:
    """The counterexample subspace: M0 is the orthogonal complement of the
    ideal-reached submodule inside level 1, and M stacks M0 under repeated
    creation.  Verifies the second description of M as the orbit of
    0 + M0 + 0 + ... under the generated operator algebra."""
    c = fock.parent
    if j.parent != c.algebra:
        raise DomainError("ideal over a different algebra")
    m0 = tuple(k for k in fock.bases[1]
               if c.range_atom(k.path[0]).cls not in j.support)
    if not m0:
        raise WitnessRefusedError(
            "the ideal-reached submodule already covers level 1 over this "
            "evaluation; no degeneracy subspace exists")
    levels = [()]
    for n in range(1, fock.n_levels + 1):
        levels.append(tuple(
            k for k in fock.bases[n]
            if c.range_atom(k.path[-1]).cls not in j.support))

    # second description: the span of all creation words applied to M0
    # (diagonal multiplications never leave a key span, so words reduce to
    # pure creation prefixes)
    orbit = {1: set(m0)}
    for n in range(1, fock.n_levels):
        nxt = set()
        for key in orbit.get(n, ()):
            for e in c.edges_from_atom(leading_atom(c, key)):
                nxt.add(TensorKey((e,) + key.path, key.atom))
        orbit[n + 1] = nxt
    for n in range(fock.n_levels + 1):
        if set(levels[n]) != orbit.get(n, set()):
            raise InternalInconsistencyError(
                f"witness subspace disagrees with its orbit description at level {n}")
    return WitnessSubspace(tuple(levels), m0, j)


def ideal_generator_functions(fock: TruncatedFock, j: IdealSpec) -> list:
    """Exact generators of the ideal as far as the enumerated bases see it:
    class indicators over finite classes, point masses over infinite ones."""
    c = fock.parent
    fns = []
    for cls in sorted(j.support):
        cnt = c.algebra.count_of(cls)
        if isinstance(cnt, int):
            fns.append(CoefFn.delta_class(cls))
        else:
            idx = {0}
            for k in fock.all_keys():
                a = leading_atom(c, k)
                if a.cls == cls:
                    idx.add(a.index)
            fns += [CoefFn.delta_atom(Atom(cls, i)) for i in sorted(idx)]
    return fns


def verify_eq_use(fock: TruncatedFock, m0: tuple, j: IdealSpec) -> tuple:
    """Two exact facts the construction rests on: the ideal annihilates M0,
    and the coefficient algebra acts on M0 with full range (each basis key
    is recovered by the point mass at its own leading atom)."""
    c = fock.parent
    eq1 = Fraction(0)
    for f in ideal_generator_functions(fock, j):
        op = rho0(fock, f)
        for k in m0:
            for z in op.col(k).values():
                eq1 = max(eq1, z.abs2())
    eq2 = Fraction(0)
    for k in m0:
        op = rho0(fock, CoefFn.delta_atom(leading_atom(c, k)))
        got = op.col(k).get(k, QI())
        eq2 = max(eq2, (got - QI_ONE).abs2())
    return eq1, eq2


def complement_of_creation(fock: TruncatedFock, m: WitnessSubspace) -> tuple:
    """Basis keys of M minus the creation image t(X)M, per level."""
    c = fock.parent
    reached = set()
    for n in range(fock.n_levels):
        for key in m.levels[n]:
            for e in c.edges_from_atom(leading_atom(c, key)):
                reached.add(TensorKey((e,) + key.path, key.atom))
    return tuple(tuple(k for k in level if k not in reached)
                 for level in m.levels)


def check_cuntz_pimsner(fock: TruncatedFock, m: WitnessSubspace,
                        j: IdealSpec) -> Fraction:
    """Covariance residual of the restriction to m: on the complement of
    the creation image, the compact-operator route must reproduce the
    diagonal action of the ideal exactly.

    For a witness subspace the complement is asserted to be M0 sitting at
    level 1 alone; for the full space the complement is the vacuum level,
    where plain Fock famously fails covariance (expect a positive residual:
    that negative control validates the check itself).
    """
    comp = complement_of_creation(fock, m)
    if m.m0 is not None:
        expected = tuple(
            m.m0 if n == 1 else () for n in range(fock.n_levels + 1))
        if comp != expected:
            raise InternalInconsistencyError(
                "creation complement of the witness subspace is not M0")
    comp_keys = [k for level in comp for k in level]
    resid = Fraction(0)
    for f in ideal_generator_functions(fock, j):
        lhs = psi_t(fock, left_action_as_compacts(fock.parent, f))
        rhs = rho0(fock, f)
        resid = max(resid, operator_residual(lhs, rhs, comp_keys))
    return resid


@dataclass(frozen=True, eq=False)
class WitnessCertificate:
    """Everything a verifier needs to re-check the counterexample: the
    subspace bases, its level-1 Gram, the four exact residuals, and the
    non-reducing vector data.  All residuals must be exactly zero and the
    projection norm exactly positive."""

    sigma: EvaluationRep
    n_levels: int
    m0: tuple
    m_levels: tuple
    m0_gram: tuple        # tuple[tuple[QI]]
    residual_invariance: Fraction
    residual_eq_use1: Fraction
    residual_eq_use2: Fraction
    residual_covariance: Fraction
    non_reducing: tuple   # (vacuum TensorKey, EdgeCopy, Fraction norm squared)


def check_reducing(fock: TruncatedFock, m: WitnessSubspace) -> WitnessCertificate:
    """Certify that m is invariant but not reducing: the generated algebra
    maps m into itself exactly, while some creation operator pushes a
    vacuum vector (a member of the complement of m) into m with exactly
    positive projection norm."""
    if m.ideal is None or m.m0 is None:
        raise DomainError("subspace was not built as a witness subspace")
    c = fock.parent
    if m.levels[0]:
        raise InternalInconsistencyError("witness subspace meets the vacuum level")
    mset = m.key_set()

    inv = Fraction(0)
    ops = [rho0(fock, f) for f in generator_functions(fock)]
    ops += [t0(fock, x) for x in generator_vectors(fock)]
    for op in ops:
        for k in mset:
            for kk, z in op.col(k).items():
                if kk not in mset:
                    inv = max(inv, z.abs2())

    eq1, eq2 = verify_eq_use(fock, m.m0, m.ideal)
    cov = check_cuntz_pimsner(fock, m, m.ideal)

    non_reducing = None
    for h in fock.bases[0]:
        for e in c.edges_from_atom(h.atom):
            col = t0(fock, ModuleVector.single(c, e)).col(h)
            norm = sum((z.abs2() for kk, z in col.items() if kk in mset),
                       Fraction(0))
            if norm > 0:
                non_reducing = (h, e, norm)
                break
        if non_reducing:
            break
    if non_reducing is None:
        raise InternalInconsistencyError(
            "no vacuum vector escapes into the witness subspace; this "
            "contradicts the construction on a degenerate instance")

    return WitnessCertificate(
        fock.sigma, fock.n_levels, m.m0, m.levels,
        tuple(tuple(row) for row in gram_matrix(c, list(m.m0))),
        inv, eq1, eq2, cov, non_reducing)


def witness_pipeline(c: Correspondence, n_levels: int = 3,
                     basis_budget: int = 10_000):
    """End to end: pick the degenerate evaluation, build the truncated Fock
    space, check the representation relations, build M, certify.

    Returns (fock, subspace, certificate).  Raises WitnessRefusedError on a
    non-degenerate instance, SymbolicOnlyError / BudgetExceededError when
    the bases cannot be enumerated, InternalInconsistencyError if any exact
    check that the construction guarantees fails.
    """
    w = sigma_degeneracy_witness(c)
    if w is None:
        raise WitnessRefusedError(
            "instance is not degenerate; there is no counterexample to build")
    fock = build_fock(c, w.rep, n_levels, basis_budget)
    report = verify_isometric_rep(fock)
    if report.max_residual != 0:
        raise InternalInconsistencyError(
            f"truncated representation violates its defining relations: {report}")
    m = build_witness_subspace(fock, katsura_ideal(c))
    cert = check_reducing(fock, m)
    return fock, m, cert
