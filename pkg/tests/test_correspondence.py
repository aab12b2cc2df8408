"""Correspondence layer: ideals, witnesses, tensors, compact decompositions.

Derived expected values are frozen here and checked against independent
oracles (explicit copy enumeration, direct left-action probing) before the
implementation under test is consulted.
"""

import pytest
from hypothesis import given, settings, strategies as st

from hyperrig.algebra import Atom, AtomSet, CoefFn, EvaluationRep
from hyperrig.correspondence import (
    Correspondence, EdgeClass, EdgeCopy, ModuleVector, Submodule, TensorKey,
    TensorVector, compacts_preimage, gram_matrix, ideal_act_submodule, inner,
    interior_tensor, is_nondegenerate, katsura_ideal, kernel_of_left_action,
    left_action_as_compacts, left_mul, level_basis, norm_sq,
    orthogonal_complement, pair_by_gram_identity, pairing, right_mul,
    sigma_degeneracy_witness, tensor_power_reduction, theta,
)
from hyperrig.errors import DomainError, MalformedInputError, SymbolicOnlyError
from hyperrig.scalars import OMEGA, QI, QI_ONE, is_finite

from instances import arrow_graph, loop_graph, omega_star, star_plus_arm, tower


# -- independent oracles -------------------------------------------------------

def probe_copies(c):
    return [ModuleVector.single(c, EdgeCopy(g.name, 0, 0, 0)) for g in c.generators]


def oracle_kernel(c):
    """Classes killed by the left action: probe every generator copy."""
    dead = set()
    for v in c.algebra.names:
        f = CoefFn.delta_class(v)
        if all(left_mul(f, x).is_zero() for x in probe_copies(c)):
            dead.add(v)
    return dead


def oracle_fin(c):
    """Classes whose single copy receives finitely many explicit edges,
    found by brute-force enumeration rather than count arithmetic."""
    out = set()
    for v in c.algebra.names:
        incoming = [g for g in c.generators if g.dst == v]
        if any(not is_finite(c.algebra.count_of(g.src)) or not is_finite(g.mult)
               for g in incoming):
            continue
        explicit = [(g.name, i, k)
                    for g in incoming
                    for i in range(c.algebra.count_of(g.src))
                    for k in range(g.mult)]
        assert len(explicit) == c.in_degree(v)
        out.add(v)
    return out


def oracle_katsura(c):
    return (set(c.algebra.names) - oracle_kernel(c)) & oracle_fin(c)


# -- ideal pipeline on the corpus ----------------------------------------------

def test_kernel_examples():
    assert oracle_kernel(loop_graph()) == set()
    assert oracle_kernel(arrow_graph()) == {"u"}
    assert oracle_kernel(omega_star()) == {"W"}
    assert kernel_of_left_action(loop_graph()).support == frozenset()
    assert kernel_of_left_action(arrow_graph()).support == {"u"}
    assert kernel_of_left_action(omega_star()).support == {"W"}
    assert kernel_of_left_action(star_plus_arm()).support == {"W", "Z"}


def test_compacts_preimage_examples():
    assert oracle_fin(loop_graph()) == {"v"}
    assert oracle_fin(omega_star()) == {"W"}
    assert oracle_fin(star_plus_arm()) == {"W", "U", "Z"}
    assert compacts_preimage(loop_graph()).support == {"v"}
    assert compacts_preimage(omega_star()).support == {"W"}
    assert compacts_preimage(star_plus_arm()).support == {"W", "U", "Z"}
    assert compacts_preimage(tower()).support == {"W", "U"}


def test_katsura_examples():
    assert oracle_katsura(loop_graph()) == {"v"}
    assert oracle_katsura(omega_star()) == set()
    assert oracle_katsura(star_plus_arm()) == {"U"}
    assert katsura_ideal(loop_graph()).support == {"v"}
    assert katsura_ideal(omega_star()).support == frozenset()
    assert katsura_ideal(star_plus_arm()).support == {"U"}
    assert katsura_ideal(tower()).support == {"U"}


def test_ideal_act_submodule_examples():
    lo = loop_graph()
    assert ideal_act_submodule(lo, katsura_ideal(lo)).span == {"e"}
    sa = star_plus_arm()
    assert ideal_act_submodule(sa, katsura_ideal(sa)).span == {"F"}
    om = omega_star()
    assert ideal_act_submodule(om, katsura_ideal(om)).span == frozenset()


def test_ideal_act_submodule_rejects_foreign_ideal():
    from hyperrig.algebra import IdealSpec
    other = AtomSet.of([("x", 1)])
    with pytest.raises(DomainError):
        ideal_act_submodule(loop_graph(), IdealSpec.of(other, {"x"}))


def test_is_nondegenerate_examples():
    assert is_nondegenerate(loop_graph()) is True
    assert is_nondegenerate(arrow_graph()) is True
    assert is_nondegenerate(star_plus_arm()) is False
    assert is_nondegenerate(omega_star()) is False
    assert is_nondegenerate(tower()) is False


def test_orthogonal_complement_examples():
    sa = star_plus_arm()
    assert orthogonal_complement(Submodule.of(sa, {"F"})).span == {"E"}
    lo = loop_graph()
    assert orthogonal_complement(Submodule.of(lo, {"e"})).span == frozenset()
    assert orthogonal_complement(Submodule.of(sa, set())).span == {"E", "F"}


# -- module vector arithmetic ----------------------------------------------------

def test_inner_is_point_supported():
    c = star_plus_arm()
    e0 = ModuleVector.single(c, EdgeCopy("E", 0, 0, 0))
    e1 = ModuleVector.single(c, EdgeCopy("E", 1, 0, 0))
    f = ModuleVector.single(c, EdgeCopy("F", 0, 0, 0))
    assert inner(e0, e0).value_at(Atom("W", 0)) == QI_ONE
    assert inner(e0, e0).value_at(Atom("W", 1)) == QI()
    assert inner(e0, e1).is_zero()
    assert inner(e0, f).is_zero()


def test_left_and_right_actions():
    c = arrow_graph()
    x = ModuleVector.single(c, EdgeCopy("e", 0, 0, 0))
    assert left_mul(CoefFn.delta_class("v"), x) == x
    assert left_mul(CoefFn.delta_class("u"), x).is_zero()
    assert right_mul(x, CoefFn.delta_class("u")) == x
    assert right_mul(x, CoefFn.delta_class("v")).is_zero()


def test_copy_bounds_checked():
    c = loop_graph()
    with pytest.raises(DomainError):
        ModuleVector.single(c, EdgeCopy("e", 0, 1, 0))
    with pytest.raises(DomainError):
        ModuleVector.single(c, EdgeCopy("e", 0, 0, 5))
    with pytest.raises(DomainError):
        ModuleVector.single(c, EdgeCopy("nope", 0, 0, 0))


def test_duplicate_edge_names_rejected():
    with pytest.raises(MalformedInputError):
        Correspondence.of(AtomSet.of([("v", 1)]),
                          [EdgeClass("e", "v", "v", 1), EdgeClass("e", "v", "v", 2)])
    with pytest.raises(MalformedInputError):
        Correspondence.of(AtomSet.of([("v", 1)]), [EdgeClass("e", "v", "v", 0)])


# -- sigma witnesses -------------------------------------------------------------

def test_witness_absent_on_nondegenerate():
    assert sigma_degeneracy_witness(loop_graph()) is None
    assert sigma_degeneracy_witness(arrow_graph()) is None


def test_witness_omega_star():
    w = sigma_degeneracy_witness(omega_star())
    assert w is not None
    assert w.rep.atoms == (Atom("W", 0),)
    assert w.edge_class == "E"
    assert norm_sq(w.vector) == 1


def test_witness_star_plus_arm():
    c = star_plus_arm()
    w = sigma_degeneracy_witness(c)
    assert w.rep.atoms == (Atom("W", 0),)
    assert w.edge_class == "E"
    # the arm edge pairs to zero against the witness, by direct Gram evaluation
    cross = pair_by_gram_identity(
        c, TensorKey((EdgeCopy("F", 0, 0, 0),), Atom("W", 0)),
        TensorKey((EdgeCopy("E", 0, 0, 0),), Atom("W", 0)))
    assert cross == QI()


# -- interior tensor bases --------------------------------------------------------

def test_interior_tensor_omega_star():
    c = omega_star()
    sigma = EvaluationRep.of(c.algebra, [Atom("W", 0)])
    basis = interior_tensor(Submodule.of(c, {"E"}), sigma)
    assert basis == [TensorKey((EdgeCopy("E", 0, 0, 0),), Atom("W", 0))]


def test_interior_tensor_empty_cases():
    sa = star_plus_arm()
    sigma = EvaluationRep.of(sa.algebra, [Atom("W", 0)])
    assert interior_tensor(ideal_act_submodule(sa, katsura_ideal(sa)), sigma) == []
    # the would-be tensor F (x) 1 is the zero vector: its norm evaluates to 0
    key = TensorKey((EdgeCopy("F", 0, 0, 0),), Atom("W", 0))
    assert pair_by_gram_identity(sa, key, key) == QI()

    a = arrow_graph()
    sig_v = EvaluationRep.of(a.algebra, [Atom("v", 0)])
    assert interior_tensor(Submodule.of(a, {"e"}), sig_v) == []


def test_interior_tensor_infinite_fiber_is_symbolic_only():
    c = Correspondence.of(AtomSet.of([("V", 1), ("W", OMEGA)]),
                          [EdgeClass("E", "V", "W", 1)])
    sigma = EvaluationRep.of(c.algebra, [Atom("V", 0)])
    with pytest.raises(SymbolicOnlyError):
        interior_tensor(Submodule.of(c, {"E"}), sigma)
    c2 = Correspondence.of(AtomSet.of([("V", 1)]),
                           [EdgeClass("E", "V", "V", OMEGA)])
    sigma2 = EvaluationRep.of(c2.algebra, [Atom("V", 0)])
    with pytest.raises(SymbolicOnlyError):
        interior_tensor(Submodule.of(c2, {"E"}), sigma2)


def test_tensor_power_reduction_examples():
    sa = star_plus_arm()
    sigma = EvaluationRep.of(sa.algebra, [Atom("W", 0)])
    k1 = tensor_power_reduction(sa, 1, sigma)
    assert k1.basis == (TensorKey((), Atom("W", 0)),)
    assert k1.atoms == (Atom("W", 0),)

    k2 = tensor_power_reduction(sa, 2, sigma)
    assert k2.basis == (TensorKey((EdgeCopy("E", 0, 0, 0),), Atom("W", 0)),)
    assert k2.atoms == (Atom("V", 0),)
    assert level_basis(sa, sigma, 2) == []  # X (x) K is zero

    lo = loop_graph()
    sig_v = EvaluationRep.of(lo.algebra, [Atom("v", 0)])
    k3 = tensor_power_reduction(lo, 3, sig_v)
    assert len(k3.basis) == 1
    assert k3.basis[0].path == (EdgeCopy("e", 0, 0, 0), EdgeCopy("e", 0, 0, 0))
    assert len(level_basis(lo, sig_v, 3)) == 1

    with pytest.raises(DomainError):
        tensor_power_reduction(lo, 0, sig_v)


# -- compact decompositions -------------------------------------------------------

def test_theta_decomposition_star_plus_arm():
    c = star_plus_arm()
    terms = left_action_as_compacts(c, CoefFn.delta_class("U"))
    assert len(terms) == 1
    f_copy = ModuleVector.single(c, EdgeCopy("F", 0, 0, 0))
    e_copy = ModuleVector.single(c, EdgeCopy("E", 0, 0, 0))
    assert terms[0].apply(e_copy).is_zero()
    assert terms[0].apply(f_copy) == f_copy


def test_theta_decomposition_loop_and_zero():
    lo = loop_graph()
    terms = left_action_as_compacts(lo, CoefFn.delta_class("v"))
    assert len(terms) == 1
    e = ModuleVector.single(lo, EdgeCopy("e", 0, 0, 0))
    assert terms[0].apply(e) == e
    assert left_action_as_compacts(lo, CoefFn.of()) == []


def test_theta_rejects_outside_compacts():
    om = omega_star()
    with pytest.raises(DomainError):
        left_action_as_compacts(om, CoefFn.delta_class("V"))
    # W lies in the compact preimage, but a class-constant value over an
    # infinite class is not an algebra element
    with pytest.raises(DomainError):
        left_action_as_compacts(om, CoefFn.delta_class("W"))
    # a point mass on one W copy is fine and decomposes to nothing (no edge
    # ranges at W)
    assert left_action_as_compacts(om, CoefFn.delta_atom(Atom("W", 3))) == []


def test_theta_point_mass_on_range():
    c = tower()
    terms = left_action_as_compacts(c, CoefFn.delta_atom(Atom("U", 0)))
    assert len(terms) == 1
    f_copy = ModuleVector.single(c, EdgeCopy("F", 0, 0, 0))
    assert terms[0].apply(f_copy) == f_copy


def test_theta_parent_mismatch():
    with pytest.raises(DomainError):
        theta(ModuleVector.single(loop_graph(), EdgeCopy("e", 0, 0, 0)),
              ModuleVector.single(arrow_graph(), EdgeCopy("e", 0, 0, 0)))


# -- strategies -------------------------------------------------------------------

small_fraction = st.fractions(min_value=-3, max_value=3, max_denominator=4)
small_qi = st.builds(QI, small_fraction, small_fraction)


@st.composite
def graphs(draw, max_classes=4, max_edges=5, allow_omega=False):
    n = draw(st.integers(1, max_classes))
    names = [f"C{i}" for i in range(n)]
    count_st = st.integers(1, 3)
    if allow_omega:
        count_st = st.one_of(count_st, st.just(OMEGA))
    atoms = AtomSet.of([(nm, draw(count_st)) for nm in names])
    mult_st = st.integers(1, 2)
    if allow_omega:
        mult_st = st.one_of(mult_st, st.just(OMEGA))
    gens = [EdgeClass(f"E{j}", draw(st.sampled_from(names)),
                      draw(st.sampled_from(names)), draw(mult_st))
            for j in range(draw(st.integers(0, max_edges)))]
    return Correspondence.of(atoms, gens)


@st.composite
def graph_with_vectors(draw):
    c = draw(graphs())
    if not c.generators:
        return c, ModuleVector.of(c, {}), ModuleVector.of(c, {})

    def vec():
        coeffs = {}
        for _ in range(draw(st.integers(0, 3))):
            g = draw(st.sampled_from(list(c.generators)))
            e = EdgeCopy(g.name,
                         draw(st.integers(0, c.algebra.count_of(g.src) - 1)),
                         draw(st.integers(0, c.algebra.count_of(g.dst) - 1)),
                         draw(st.integers(0, g.mult - 1)))
            coeffs[e] = draw(small_qi)
        return ModuleVector.of(c, coeffs)

    return c, vec(), vec()


def random_coeffn(draw, c):
    cp = {nm: draw(small_qi) for nm in c.algebra.names
          if draw(st.booleans())}
    pp = {}
    for nm in c.algebra.names:
        cnt = c.algebra.count_of(nm)
        if is_finite(cnt) and draw(st.booleans()):
            pp[Atom(nm, draw(st.integers(0, cnt - 1)))] = draw(small_qi)
    return CoefFn.of(cp, pp)


@st.composite
def graph_vectors_and_fn(draw):
    c, x, y = draw(graph_with_vectors())
    return c, x, y, random_coeffn(draw, c)


# -- properties -------------------------------------------------------------------

@given(graph_with_vectors())
@settings(max_examples=120, deadline=None)
def test_gram_positivity(data):
    c, x, _ = data
    g = inner(x, x)
    for a, v in g.point_part:
        assert v.im == 0 and v.re >= 0
    assert g.is_zero() == x.is_zero()


@given(graph_vectors_and_fn())
@settings(max_examples=120, deadline=None)
def test_bimodule_axioms(data):
    c, x, y, f = data
    assert inner(left_mul(f, x), y) == inner(x, left_mul(f.conj(), y))
    assert inner(x, right_mul(y, f)) == inner(x, y) * f


@given(graphs())
@settings(max_examples=100, deadline=None)
def test_finite_graphs_are_nondegenerate(c):
    assert is_nondegenerate(c) is True
    assert sigma_degeneracy_witness(c) is None


@given(graphs(allow_omega=True))
@settings(max_examples=150, deadline=None)
def test_witness_exists_iff_degenerate(c):
    w = sigma_degeneracy_witness(c)
    assert (w is None) == is_nondegenerate(c)
    if w is not None:
        assert norm_sq(w.vector) > 0
        assert w.edge_class not in ideal_act_submodule(c, katsura_ideal(c)).span


@given(graphs(allow_omega=True))
@settings(max_examples=100, deadline=None)
def test_ideal_oracles_agree(c):
    assert kernel_of_left_action(c).support == oracle_kernel(c)
    assert compacts_preimage(c).support == oracle_fin(c)
    assert katsura_ideal(c).support == oracle_katsura(c)


@given(graphs(max_classes=3, max_edges=4), st.integers(0, 2))
@settings(max_examples=60, deadline=None)
def test_gram_identity_two_ways(c, level):
    # evaluate sigma at copy 0 of every class
    sigma = EvaluationRep.of(c.algebra, [Atom(nm, 0) for nm in c.algebra.names])
    keys = level_basis(c, sigma, level)[:12]
    g = gram_matrix(c, keys)
    for i, a in enumerate(keys):
        for j, b in enumerate(keys):
            direct = pairing(TensorVector.of(c, level, {a: QI_ONE}),
                             TensorVector.of(c, level, {b: QI_ONE}))
            assert g[i][j] == direct
            assert g[i][j] == (QI_ONE if i == j else QI())


@given(graphs(max_classes=3, max_edges=3), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_tensor_power_dimension_identity(c, n):
    sigma = EvaluationRep.of(c.algebra, [Atom(nm, 0) for nm in c.algebra.names])
    k = tensor_power_reduction(c, n, sigma)
    assert len(k.basis) == len(k.atoms)
    assert len(k.basis) == len(level_basis(c, sigma, n - 1))


@given(graphs(max_classes=3, max_edges=4))
@settings(max_examples=80, deadline=None)
def test_theta_decomposition_matches_left_action(c):
    fin = compacts_preimage(c)
    for nm in sorted(fin.support):
        f = CoefFn.delta_class(nm)
        terms = left_action_as_compacts(c, f)
        for g in c.generators:
            z = ModuleVector.single(c, EdgeCopy(g.name, 0, 0, 0))
            total = ModuleVector.of(c, {})
            for t in terms:
                total = total + t.apply(z)
            assert total == left_mul(f, z)
