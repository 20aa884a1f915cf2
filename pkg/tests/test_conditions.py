import numpy as np
import pytest

from ifslab import (
    GridFunction,
    IfsSystem,
    build_paper_example,
    chain_stretch_bound,
    corollary_check,
    depth_k_check,
    distortion_audit,
    irreducibility_probe,
    local_stretch,
    main_theorem_check,
    single_branch_check,
    spectral_radius,
)
from ifslab.system import SystemDefinitionError


@pytest.fixture(scope="module")
def example_spectral(example_spec):
    return spectral_radius(example_spec.system, n_max=120, grid_n=2048)


@pytest.fixture(scope="module")
def isometry_spectral(isometry_system):
    return spectral_radius(isometry_system, n_max=40, grid_n=512)


class TestLocalStretch:
    def test_example_closed_forms(self, example_spec):
        system = example_spec.system
        xs = np.linspace(0, 1, 257)
        g1 = local_stretch(system, (1,), method="closed-form", grid_n=257)
        g2 = local_stretch(system, (2,), method="closed-form", grid_n=257)
        assert np.allclose(g1.values, 1 - xs / 2, rtol=0, atol=1e-15)
        assert np.allclose(g2.values, (1 + xs) / 2, rtol=0, atol=1e-15)
        assert g1.certified_upper and g2.certified_upper

    def test_sampled_matches_closed_form(self, example_spec):
        # acceptance tolerance: 1e-3 uniformly on the grid
        system = example_spec.system
        for j, closed in ((1, lambda x: 1 - x / 2), (2, lambda x: (1 + x) / 2)):
            est = local_stretch(system, (j,), method="sampled", grid_n=1025)
            assert np.abs(est.values - closed(est.xs)).max() <= 1e-3
            assert not est.certified_upper

    def test_identity_stretch_is_one(self, isometry_system):
        est = local_stretch(isometry_system, (1,), method="sampled", grid_n=257)
        assert np.all(est.values == 1.0)

    def test_sampled_is_lower_bound_of_true(self, example_spec):
        # sampled difference quotients never exceed the closed form
        system = example_spec.system
        for j, closed in ((1, lambda x: 1 - x / 2), (2, lambda x: (1 + x) / 2)):
            est = local_stretch(system, (j,), method="sampled", grid_n=513)
            assert np.all(est.values <= closed(est.xs) + 1e-12)

    def test_closed_form_requires_expressions(self):
        system = IfsSystem((0, 1), ["x/2"], ["1"])
        with pytest.raises(ValueError):
            local_stretch(system, (1,), method="closed-form")

    def test_empty_word_rejected(self, example_spec):
        with pytest.raises(ValueError):
            local_stretch(example_spec.system, ())


class TestChainBound:
    def test_single_letter_equals_closed_form(self, example_spec):
        system = example_spec.system
        xs = np.linspace(0, 1, 129)
        bound = chain_stretch_bound(system, (1,), xs)
        assert np.allclose(bound, 1 - xs / 2, rtol=0, atol=1e-15)

    def test_linear_maps_chain_exact(self, constant_system):
        # for linear maps the chain bound is the exact product of slopes
        xs = np.linspace(0, 1, 65)
        for word, expected in (((1, 2), 0.25), ((1, 1, 2), 0.125)):
            bound = chain_stretch_bound(constant_system, word, xs)
            assert np.allclose(bound, expected, rtol=0, atol=1e-15)

    def test_sampled_word_below_chain_bound(self, example_spec):
        # soundness ordering: sampled gamma_J <= chain bound at every grid x
        system = example_spec.system
        for word in ((1, 2), (2, 1), (1, 1), (2, 2), (1, 2, 1)):
            sampled = local_stretch(system, word, method="sampled", grid_n=257)
            bound = chain_stretch_bound(system, word, sampled.xs)
            assert np.all(sampled.values <= bound + 1e-9)


class TestMainTheorem:
    def test_example_local_holds(self, example_spec, example_spectral):
        rep = main_theorem_check(example_spec.system, example_spectral,
                                 grid_n=2049)
        assert rep.verdict == "HOLDS"
        assert rep.lhs == pytest.approx(0.81, abs=5e-3)
        assert rep.margin > 0.1
        assert rep.certified

    def test_example_global_variant_fails(self, example_spec, example_spectral):
        rep = main_theorem_check(example_spec.system, example_spectral,
                                 grid_n=2049, variant="global")
        assert rep.verdict == "FAILS"
        assert rep.lhs == pytest.approx(1.0 + example_spec.delta, abs=1e-3)

    def test_contractive_ifs_holds(self, constant_system):
        est = spectral_radius(constant_system, n_max=20, grid_n=256)
        rep = main_theorem_check(constant_system, est, grid_n=257)
        assert rep.verdict == "HOLDS"
        # s = 0.8 * 0.5 exactly for constant weights and slope-1/2 maps
        assert rep.lhs == pytest.approx(0.4, abs=1e-12)

    def test_isometries_not_holds(self, isometry_system, isometry_spectral):
        rep = main_theorem_check(isometry_system, isometry_spectral, grid_n=257)
        assert rep.verdict != "HOLDS"

    def test_verdict_margin_invariants(self, example_spec, example_spectral,
                                       isometry_system, isometry_spectral):
        reports = [
            main_theorem_check(example_spec.system, example_spectral),
            main_theorem_check(example_spec.system, example_spectral,
                               variant="global"),
            main_theorem_check(isometry_system, isometry_spectral),
        ]
        for rep in reports:
            if rep.verdict == "HOLDS":
                assert rep.margin > rep.width
            elif rep.verdict == "FAILS":
                assert rep.margin <= -rep.width


class TestCorollary:
    def test_example_holds_with_margin(self, example_spec):
        rep = corollary_check(example_spec.system, grid_n=2049)
        assert rep.verdict == "HOLDS"
        assert rep.comparator == pytest.approx(1.0, abs=1e-12)
        assert rep.margin > 0.1

    def test_isometries_equality_fails(self, isometry_system):
        rep = corollary_check(isometry_system, grid_n=257)
        assert rep.verdict == "FAILS"
        assert rep.lhs == 1.0
        assert rep.comparator == 1.0

    def test_two_linear_contractions(self):
        system = IfsSystem((0, 1), ["x/2", "(x + 1)/2"], ["0.5", "0.5"],
                           stretches=["0.5", "0.5"])
        rep = corollary_check(system, grid_n=257)
        assert rep.verdict == "HOLDS"
        assert rep.lhs == pytest.approx(0.5, abs=1e-12)

    def test_corollary_implies_main(self, example_spec, example_spectral):
        # whenever the spectral bracket sits above min sum p_j
        cor = corollary_check(example_spec.system, grid_n=513)
        main = main_theorem_check(example_spec.system, example_spectral,
                                  grid_n=513)
        if cor.verdict == "HOLDS" and example_spectral.bracket[0] >= cor.comparator:
            assert main.verdict == "HOLDS"


class TestDepthK:
    def test_k1_identical_to_main(self, example_spec, example_spectral):
        main = main_theorem_check(example_spec.system, example_spectral,
                                  grid_n=513)
        k1 = depth_k_check(example_spec.system, 1, example_spectral, grid_n=513)
        assert k1.lhs == main.lhs

    def test_example_k2_holds(self, example_spec, example_spectral):
        rep1 = depth_k_check(example_spec.system, 1, example_spectral, grid_n=513)
        rep2 = depth_k_check(example_spec.system, 2, example_spectral, grid_n=513)
        assert rep2.verdict == "HOLDS"
        assert rep2.lhs <= rep1.lhs ** 2 + 1e-9

    def test_k2_oracle_word_enumeration(self, example_spec, example_spectral):
        # oracle: direct enumeration of the four words on the grid
        from ifslab import weight_product
        system = example_spec.system
        xs = np.linspace(0, 1, 513)
        total = np.zeros_like(xs)
        for word in ((1, 1), (1, 2), (2, 1), (2, 2)):
            prod = np.ones_like(xs)
            cur = xs
            for j in reversed(word):
                prod = prod * np.asarray(system.stretches[j - 1](cur))
                cur = system.maps[j - 1](cur)
            total += weight_product(system, word, xs) * prod
        rep = depth_k_check(system, 2, example_spectral, grid_n=513)
        assert rep.lhs == pytest.approx(total.max(), rel=1e-12)

    def test_isometries_never_hold(self, isometry_system, isometry_spectral):
        for k in (1, 2, 3):
            rep = depth_k_check(isometry_system, k, isometry_spectral,
                                grid_n=257)
            assert rep.verdict != "HOLDS"
            assert rep.lhs == pytest.approx(1.0, abs=1e-12)

    def test_word_budget_enforced(self, example_spec, example_spectral):
        with pytest.raises(ValueError):
            depth_k_check(example_spec.system, 20, example_spectral,
                          word_budget=1000)


class TestSingleBranch:
    def test_example_three_quarters(self, example_spec):
        # min(1 - x/2, (1+x)/2) peaks at x = 1/2 where both equal 3/4
        rep = single_branch_check(example_spec.system, grid_n=2049)
        assert rep.verdict == "HOLDS"
        assert rep.lhs == pytest.approx(0.75, abs=1e-3)

    def test_identity_plus_contraction(self):
        system = IfsSystem((0, 1), ["x", "x/3"], ["0.5", "0.5"],
                           stretches=["1", "1/3"])
        rep = single_branch_check(system, grid_n=257)
        assert rep.verdict == "HOLDS"
        assert rep.lhs == pytest.approx(1 / 3, abs=1e-12)

    def test_two_isometries_fail(self, isometry_system):
        rep = single_branch_check(isometry_system, grid_n=257)
        assert rep.verdict == "FAILS"
        assert rep.lhs == 1.0


class TestDistortion:
    def test_same_point_ratio_one(self, example_spec):
        rep = distortion_audit(example_spec.system, (1, 2, 1), 0.3, 0.3, 0.9)
        assert rep.premise_ok
        assert rep.ratio == 1.0
        assert rep.holds

    def test_constant_potentials_ratio_one(self, constant_system):
        rep = distortion_audit(constant_system, (1, 2, 2, 1), 0.2, 0.7, 0.9)
        assert rep.premise_ok
        assert rep.ratio == pytest.approx(1.0, rel=1e-12)
        assert rep.log_modulus_sum == 0.0
        assert rep.holds

    def test_example_contracting_word(self, example_spec):
        # repeated first branch contracts toward 0; close points shadow
        word = (1,) * 6
        rep = distortion_audit(example_spec.system, word, 0.10, 0.1001, 0.9)
        assert rep.premise_ok
        assert rep.holds
        assert rep.ratio <= rep.bound

    def test_premise_violation_reported(self, isometry_system):
        # isometries never contract: distant points violate the premise
        rep = distortion_audit(isometry_system, (1, 1, 1, 1), 0.0, 1.0, 0.5)
        assert not rep.premise_ok
        assert np.isnan(rep.ratio)

    def test_invalid_theta(self, constant_system):
        with pytest.raises(ValueError):
            distortion_audit(constant_system, (1,), 0.1, 0.2, 1.0)


class TestIrreducibility:
    def test_positive_function_immediate(self, example_spec):
        f = GridFunction.constant(0, 1, 257, 1.0)
        probe = irreducibility_probe(example_spec.system, f, 0.5, 10)
        assert probe.found and probe.n == 1

    def test_bump_reached_by_orbit(self, binary_system):
        xs = np.linspace(0, 1, 513)
        bump = np.maximum(0.0, 1 - np.abs(xs - 0.9) / 0.03)
        f = GridFunction(0, 1, bump)
        probe = irreducibility_probe(binary_system, f, 0.0, 20)
        assert probe.found
        # oracle: first n with a dyadic k/2^n inside the bump support
        oracle_n = None
        for n in range(1, 20):
            if np.any(np.abs(np.arange(2 ** n) / 2 ** n - 0.9) < 0.03):
                oracle_n = n
                break
        assert probe.n == oracle_n

    def test_fixed_point_never_reaches(self):
        system = IfsSystem((0, 1), ["x/2"], ["1"])
        xs = np.linspace(0, 1, 513)
        bump = np.maximum(0.0, 1 - np.abs(xs - 0.9) / 0.05)
        f = GridFunction(0, 1, bump)
        probe = irreducibility_probe(system, f, 0.0, 30)
        assert not probe.found

    def test_rejects_negative_or_zero_f(self, binary_system):
        with pytest.raises(ValueError):
            irreducibility_probe(binary_system, GridFunction(0, 1, -np.ones(17)),
                                 0.0, 5)
        with pytest.raises(ValueError):
            irreducibility_probe(binary_system, GridFunction(0, 1, np.zeros(17)),
                                 0.0, 5)


class TestBuildExample:
    def test_default_delta(self, example_spec):
        # min(p1, 1-p1) = 1 - p1, minimized at x = 1 where p1 = 0.6
        assert example_spec.delta == pytest.approx(0.08, abs=1e-12)

    def test_tent_values(self, example_spec):
        g = example_spec.tent
        d = example_spec.delta
        assert g(0.5) == pytest.approx(d, abs=1e-15)
        assert g(0.0) == 0.0
        assert g(1.0) == 0.0
        assert g(0.5 - d) == 0.0
        assert g(0.5 + d) == 0.0
        assert g(0.5 - d / 2) == pytest.approx(d / 2, abs=1e-15)

    def test_weight_sum_range(self, example_spec):
        xs = np.linspace(0, 1, 4097)
        total = example_spec.p1(xs) + example_spec.p2(xs)
        assert total.min() >= 1.0 - 1e-12
        assert total.max() <= 1.0 + example_spec.delta + 1e-12

    def test_quarter_inequalities_validated(self, example_spec):
        xs = np.linspace(0, 1, 4097)
        g = example_spec.tent(xs)
        assert np.all(g - example_spec.p1(xs) / 4 < 0)
        assert np.all(g - example_spec.p2(xs) / 4 < 0)

    def test_p1_out_of_range_rejected(self):
        with pytest.raises(SystemDefinitionError):
            build_paper_example("1.5 + x", grid_n=256)
        with pytest.raises(SystemDefinitionError):
            build_paper_example("x", grid_n=256)  # hits 0 at the left edge

    def test_other_admissible_p1(self):
        # the construction must work for any Dini p1 inside (0, 1)
        spec = build_paper_example("0.3 + x/3", grid_n=512)
        assert spec.delta == pytest.approx(0.2 * 0.3, abs=1e-12)
        est = spectral_radius(spec.system, n_max=60, grid_n=512)
        rep = main_theorem_check(spec.system, est, grid_n=513)
        assert rep.verdict == "HOLDS"
