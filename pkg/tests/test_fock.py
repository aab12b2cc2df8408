"""Truncated Fock spaces, relation checks, the witness pipeline."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hyperrig.algebra import Atom, AtomSet, CoefFn, EvaluationRep, IdealSpec
from hyperrig.correspondence import (
    Correspondence, EdgeClass, EdgeCopy, ModuleVector, TensorKey, inner,
    katsura_ideal, left_action_as_compacts, sigma_degeneracy_witness, theta,
)
from hyperrig.errors import (
    BudgetExceededError, DomainError, SymbolicOnlyError, WitnessRefusedError,
)
from hyperrig.fock import (
    build_fock, build_witness_subspace, check_cuntz_pimsner,
    complement_of_creation, full_subspace, operator_residual, psi_t,
    restrict_to_subspace, rho0, t0, verify_eq_use, verify_isometric_rep,
    witness_pipeline,
)
from hyperrig.scalars import QI, QI_ONE

from instances import (
    arrow_graph, loop_graph, omega_star, random_discrete_graph, star_plus_arm,
    tower,
)


def sigma_at(c, cls, idx=0):
    return EvaluationRep.of(c.algebra, [Atom(cls, idx)])


def two_loops():
    return Correspondence.of(
        AtomSet.of([("v", 1)]),
        [EdgeClass("e", "v", "v", 1), EdgeClass("f", "v", "v", 1)])


# -- basis enumeration ----------------------------------------------------------

def test_build_fock_dimensions():
    sa = star_plus_arm()
    fock = build_fock(sa, sigma_at(sa, "W"), 3)
    assert [fock.level_dim(n) for n in range(4)] == [1, 1, 0, 0]

    lo = loop_graph()
    fock = build_fock(lo, sigma_at(lo, "v"), 3)
    assert [fock.level_dim(n) for n in range(4)] == [1, 1, 1, 1]

    a = arrow_graph()
    fock = build_fock(a, sigma_at(a, "v"), 2)
    assert [fock.level_dim(n) for n in range(3)] == [1, 0, 0]


def test_build_fock_guards():
    tl = two_loops()
    with pytest.raises(BudgetExceededError):
        build_fock(tl, sigma_at(tl, "v"), 3, basis_budget=10)
    with pytest.raises(DomainError):
        build_fock(tl, sigma_at(tl, "v"), 0)


def test_build_fock_symbolic_only():
    from hyperrig.scalars import OMEGA
    c = Correspondence.of(AtomSet.of([("V", 1), ("W", OMEGA)]),
                          [EdgeClass("E", "V", "W", 1)])
    with pytest.raises(SymbolicOnlyError):
        build_fock(c, sigma_at(c, "V"), 2)


def test_level_gram_is_identity():
    lo = loop_graph()
    fock = build_fock(lo, sigma_at(lo, "v"), 3)
    for n in range(4):
        g = fock.gram(n)
        for i in range(len(g)):
            for j in range(len(g)):
                assert g[i][j] == (QI_ONE if i == j else QI())


# -- representation relations ----------------------------------------------------

def test_isometric_rep_corpus():
    for c, cls in ((loop_graph(), "v"), (star_plus_arm(), "W"),
                   (omega_star(), "W"), (tower(), "W")):
        fock = build_fock(c, sigma_at(c, cls), 3)
        report = verify_isometric_rep(fock)
        assert report.multiplication == 0
        assert report.toeplitz == 0


def test_corrupted_t_detected():
    lo = loop_graph()
    fock = build_fock(lo, sigma_at(lo, "v"), 3)

    doubled = lambda x: t0(fock, x).scale(QI(Fraction(2)))
    report = verify_isometric_rep(fock, t_of=doubled)
    assert report.toeplitz > 0

    # a sign flip on one generator's operator is invisible to indicator
    # functions (it is a gauge move) but a scaled function catches it
    flipped_edge = ModuleVector.single(lo, EdgeCopy("e", 0, 0, 0))

    def sign_flip(x):
        op = t0(fock, x)
        return op.scale(QI(Fraction(-1))) if x == flipped_edge else op

    report = verify_isometric_rep(fock, t_of=sign_flip)
    assert report.multiplication > 0


def test_truncation_boundary_excluded():
    # the adjoint relation genuinely fails at the top level; the check
    # stops below it, so the honest operators still report zero
    lo = loop_graph()
    fock = build_fock(lo, sigma_at(lo, "v"), 2)
    e = ModuleVector.single(lo, EdgeCopy("e", 0, 0, 0))
    top = fock.bases[2][0]
    lhs = t0(fock, e).adjoint().compose(t0(fock, e))
    rhs = rho0(fock, inner(e, e))
    assert operator_residual(lhs, rhs, [top]) > 0
    assert verify_isometric_rep(fock).max_residual == 0


# -- psi_t -----------------------------------------------------------------------

def test_psi_t_examples():
    sa = star_plus_arm()
    fock = build_fock(sa, sigma_at(sa, "W"), 3)
    f_copy = ModuleVector.single(sa, EdgeCopy("F", 0, 0, 0))
    lhs = psi_t(fock, [theta(f_copy, f_copy)])
    rhs = t0(fock, f_copy).compose(t0(fock, f_copy).adjoint())
    assert operator_residual(lhs, rhs) == 0

    assert psi_t(fock, []).cols == {}

    lo = loop_graph()
    fock = build_fock(lo, sigma_at(lo, "v"), 3)
    e = ModuleVector.single(lo, EdgeCopy("e", 0, 0, 0))
    lvl1 = fock.bases[1][0]
    out = psi_t(fock, [theta(e, e)]).apply({lvl1: QI_ONE})
    assert out == {lvl1: QI_ONE}


def test_psi_t_decomposition_independence():
    tl = two_loops()
    fock = build_fock(tl, sigma_at(tl, "v"), 2, basis_budget=100)
    e = ModuleVector.single(tl, EdgeCopy("e", 0, 0, 0))
    f = ModuleVector.single(tl, EdgeCopy("f", 0, 0, 0))
    plain = left_action_as_compacts(tl, CoefFn.delta_class("v"))
    half = QI(Fraction(1, 2))
    u, w = e + f, e - f
    rotated = [theta(u.scale(half), u), theta(w.scale(half), w)]
    assert operator_residual(psi_t(fock, plain), psi_t(fock, rotated)) == 0


# -- witness subspace -------------------------------------------------------------

def test_witness_subspace_star_plus_arm():
    sa = star_plus_arm()
    fock = build_fock(sa, sigma_at(sa, "W"), 3)
    m = build_witness_subspace(fock, katsura_ideal(sa))
    e_key = TensorKey((EdgeCopy("E", 0, 0, 0),), Atom("W", 0))
    assert m.m0 == (e_key,)
    assert m.levels == ((), (e_key,), (), ())


def test_witness_subspace_omega_star():
    om = omega_star()
    fock = build_fock(om, sigma_at(om, "W"), 3)
    m = build_witness_subspace(fock, katsura_ideal(om))
    assert m.m0 == fock.bases[1]


def test_witness_subspace_refused_on_nondegenerate():
    lo = loop_graph()
    fock = build_fock(lo, sigma_at(lo, "v"), 3)
    with pytest.raises(WitnessRefusedError):
        build_witness_subspace(fock, katsura_ideal(lo))


def test_eq_use():
    sa = star_plus_arm()
    fock = build_fock(sa, sigma_at(sa, "W"), 3)
    m = build_witness_subspace(fock, katsura_ideal(sa))
    eq1, eq2 = verify_eq_use(fock, m.m0, katsura_ideal(sa))
    assert eq1 == 0 and eq2 == 0
    # misuse: the ideal generated by the infinitely-received class does not
    # annihilate M0, and the residual says so
    wrong = IdealSpec.of(sa.algebra, {"V"})
    eq1, eq2 = verify_eq_use(fock, m.m0, wrong)
    assert eq1 == 1 and eq2 == 0


def test_cuntz_pimsner_on_witness_and_control():
    sa = star_plus_arm()
    fock = build_fock(sa, sigma_at(sa, "W"), 3)
    m = build_witness_subspace(fock, katsura_ideal(sa))
    assert check_cuntz_pimsner(fock, m, katsura_ideal(sa)) == 0

    om = omega_star()
    fock_om = build_fock(om, sigma_at(om, "W"), 3)
    m_om = build_witness_subspace(fock_om, katsura_ideal(om))
    assert check_cuntz_pimsner(fock_om, m_om, katsura_ideal(om)) == 0

    # the plain Fock representation is not covariant: on the vacuum the
    # compact route gives 0 while the diagonal action gives 1
    lo = loop_graph()
    fock_lo = build_fock(lo, sigma_at(lo, "v"), 3)
    resid = check_cuntz_pimsner(fock_lo, full_subspace(fock_lo), katsura_ideal(lo))
    assert resid == 1


def test_complement_of_creation_full_space():
    lo = loop_graph()
    fock = build_fock(lo, sigma_at(lo, "v"), 3)
    comp = complement_of_creation(fock, full_subspace(fock))
    assert comp[0] == fock.bases[0]
    assert all(not level for level in comp[1:])


# -- certificates ------------------------------------------------------------------

def degenerate_corpus():
    return [star_plus_arm(), omega_star(), tower()]


def test_full_pipeline_on_degenerate_corpus():
    for c in degenerate_corpus():
        fock, m, cert = witness_pipeline(c, 3)
        assert cert.residual_invariance == 0
        assert cert.residual_eq_use1 == 0
        assert cert.residual_eq_use2 == 0
        assert cert.residual_covariance == 0
        h, x, norm = cert.non_reducing
        assert norm > 0
        assert h in fock.bases[0]
        assert cert.m0_gram == tuple(
            tuple(QI_ONE if i == j else QI() for j in range(len(cert.m0)))
            for i in range(len(cert.m0)))


def test_pipeline_details_star_plus_arm():
    sa = star_plus_arm()
    fock, m, cert = witness_pipeline(sa, 3)
    assert cert.sigma.atoms == (Atom("W", 0),)
    h, x, norm = cert.non_reducing
    assert h == TensorKey((), Atom("W", 0))
    assert x == EdgeCopy("E", 0, 0, 0)
    assert norm == 1


def test_pipeline_refuses_hyperrigid():
    with pytest.raises(WitnessRefusedError):
        witness_pipeline(loop_graph())
    with pytest.raises(WitnessRefusedError):
        witness_pipeline(arrow_graph())


def test_restriction_lemma_on_witness_subspaces():
    for c in degenerate_corpus():
        fock, m, _ = witness_pipeline(c, 3)
        keys = m.key_set()
        report = verify_isometric_rep(
            fock,
            rho_of=lambda f: restrict_to_subspace(rho0(fock, f), keys),
            t_of=lambda x: restrict_to_subspace(t0(fock, x), keys))
        assert report.max_residual == 0


# -- random relation checks --------------------------------------------------------

@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_toeplitz_relation_random_vectors(seed):
    rng = random.Random(seed)
    g = random_discrete_graph(rng, max_classes=3, max_edges=3, all_finite=True)
    from hyperrig.graphs import build_correspondence
    c = build_correspondence(g)
    sigma = EvaluationRep.of(c.algebra, [Atom(nm, 0) for nm in c.algebra.names])
    fock = build_fock(c, sigma, 2, basis_budget=2000)

    def rand_vec():
        coeffs = {}
        for _ in range(rng.randint(0, 3)):
            if not c.generators:
                break
            g_ = rng.choice(c.generators)
            e = EdgeCopy(g_.name, rng.randrange(c.algebra.count_of(g_.src)),
                         rng.randrange(c.algebra.count_of(g_.dst)),
                         rng.randrange(g_.mult))
            coeffs[e] = QI(Fraction(rng.randint(-2, 2)),
                           Fraction(rng.randint(-2, 2), 2))
        return ModuleVector.of(c, coeffs)

    src = [k for n in range(fock.n_levels) for k in fock.bases[n]]
    for _ in range(4):
        x, y = rand_vec(), rand_vec()
        lhs = t0(fock, x).adjoint().compose(t0(fock, y))
        rhs = rho0(fock, inner(x, y))
        assert operator_residual(lhs, rhs, src) == 0


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_pipeline_on_random_degenerate_graphs(seed):
    rng = random.Random(seed)
    g = random_discrete_graph(rng, max_classes=4, max_edges=6)
    from hyperrig.graphs import build_correspondence
    c = build_correspondence(g)
    if sigma_degeneracy_witness(c) is None:
        return
    try:
        fock, m, cert = witness_pipeline(c, 3, basis_budget=4000)
    except (SymbolicOnlyError, BudgetExceededError):
        return
    assert cert.residual_invariance == 0
    assert cert.residual_eq_use1 == 0
    assert cert.residual_eq_use2 == 0
    assert cert.residual_covariance == 0
    assert cert.non_reducing[2] > 0
