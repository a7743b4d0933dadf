import numpy as np
import pytest

from vilenkin.group import GeneratorSequence, WALSH, decompose
from vilenkin.martingale import (
    AtomViolationError,
    MartingaleSpec,
    build_counterexample,
    closed_partial_sum,
    counterexample_atom,
    default_alphas,
    phi_value,
    random_atom,
    select_gap_subsequence,
    spectral_profile,
    tail_certificate_terms,
    validate_atom,
)
from vilenkin.norms import hardy_norm, modulus_hp
from vilenkin.transform import (
    character_values,
    constant,
    dirichlet_closed,
    forward,
    grid_function,
    partial_sum,
)

TRIADIC = GeneratorSequence.parse("3^")
ALTERNATING = GeneratorSequence.parse("2,3^")


class TestValidateAtom:
    def test_two_level_atom_valid(self):
        # M_N^(1/p) (1_{I_{N+1}(0)} - (1/m_N) 1_{I_N(0)}) style function
        m, rank, resolution, p = WALSH, 2, 5, 0.5
        vals = np.zeros(m.size(resolution))
        in_parent = (np.arange(m.size(resolution)) % m.base(rank)) == 0
        in_child = (np.arange(m.size(resolution)) % m.base(rank + 1)) == 0
        vals[in_parent] = -m.base(rank) ** (1 / p) / m.radix(rank)
        vals[in_child] += m.base(rank) ** (1 / p)
        atom = validate_atom(grid_function(m, resolution, vals), p, rank)
        assert atom.support_rank == rank

    def test_constant_rejected_for_mean(self):
        with pytest.raises(AtomViolationError) as err:
            validate_atom(constant(WALSH, 4), 0.5, 0)
        assert "mean" in err.value.failures

    def test_sup_bound_violation_named(self):
        vals = np.zeros(16)
        vals[0], vals[8] = 100.0, -100.0  # mean zero on I_3(0), way over M_3^2
        with pytest.raises(AtomViolationError) as err:
            validate_atom(grid_function(WALSH, 4, vals), 0.5, 3)
        assert err.value.failures == ["bound"]

    def test_support_violation_named(self):
        vals = np.ones(16) * 1e-3
        vals[0], vals[8] = 1.0, -1.0
        with pytest.raises(AtomViolationError) as err:
            validate_atom(grid_function(WALSH, 4, vals), 0.5, 3)
        assert "support" in err.value.failures

    def test_p_out_of_range(self):
        with pytest.raises(ValueError):
            validate_atom(constant(WALSH, 3), 1.5, 0)

    def test_random_atom_respects_base_point(self):
        rng = np.random.default_rng(0)
        atom = random_atom(WALSH, 0.5, 2, 5, rng, base_index=3)
        mask = (np.arange(32) % 4) == 3
        assert np.all(atom.values.values[~mask] == 0)
        assert np.abs(atom.values.values[mask]).max() > 0


class TestCounterexampleAtom:
    def test_walsh_p_half_values(self):
        # |alpha| = 1, p = 1/2: +2 on I_2, -2 on I_1 \ I_2, 0 off I_1
        atom = counterexample_atom(WALSH, 3, 0.5, 4)
        vals = atom.values.values.real
        grid = np.arange(16)
        assert np.abs(vals[grid % 4 == 0] - 2.0).max() < 1e-9
        assert np.abs(vals[(grid % 2 == 0) & (grid % 4 != 0)] + 2.0).max() < 1e-9
        assert np.abs(vals[grid % 2 == 1]).max() < 1e-9

    @pytest.mark.parametrize("m", [WALSH, TRIADIC, ALTERNATING], ids=lambda m: m.format())
    @pytest.mark.parametrize("p", [0.5, 2 / 3, 1.0])
    def test_validator_passes_for_every_k(self, m, p):
        for alpha_top in (1, 2, 3):
            alpha = m.base(alpha_top) + 1
            atom = counterexample_atom(m, alpha, p, 5)
            assert atom.support_rank == alpha_top

    def test_mean_zero_over_support(self):
        atom = counterexample_atom(TRIADIC, 4, 0.5, 4)
        vals = atom.values.values
        mask = (np.arange(81) % 3) == 0  # I_1
        assert abs(vals[mask].mean()) < 1e-12

    def test_piecewise_magnitudes(self):
        # (M^{1/p-1}/lambda)(M_{|a|+1} - M_{|a|}) inside, M_{|a|} scale outside
        m, p = TRIADIC, 2 / 3
        atom = counterexample_atom(m, m.base(2) + 1, p, 4).values.values.real
        scale = m.base(2) ** (1 / p - 1) / m.max_radix
        grid = np.arange(81)
        inner = grid % m.base(3) == 0
        ring = (grid % m.base(2) == 0) & ~inner
        assert np.abs(atom[inner] - scale * (m.base(3) - m.base(2))).max() < 1e-9
        assert np.abs(atom[ring] + scale * m.base(2)).max() < 1e-9

    def test_resolution_too_small(self):
        with pytest.raises(ValueError):
            counterexample_atom(WALSH, 2**5 + 1, 0.5, 5)


class TestBuildCounterexample:
    def test_coefficient_table_matches_transform(self):
        spec = build_counterexample(WALSH, 0.5, default_alphas(WALSH, 10), resolution=10)
        profile = spectral_profile(spec)
        fft = forward(spec.realized).coeffs
        assert np.abs(profile - fft).max() < 1e-9

    def test_block_levels(self):
        spec = build_counterexample(WALSH, 0.5, [3, 5], rule="explicit", lambdas=[1.0, 2.0], resolution=6)
        profile = spectral_profile(spec)
        # level on block k is lambda_k M_{|a_k|}^{1/p-1} / lambda
        assert np.allclose(profile[2:4], 1.0 * 2 / 2)
        assert np.allclose(profile[4:8], 2.0 * 4 / 2)
        assert np.abs(profile[[0, 1]]).max() == 0
        assert np.abs(profile[8:]).max() == 0

    def test_single_atom_spec(self):
        spec = build_counterexample(WALSH, 0.5, [3], rule="explicit", lambdas=[1.0], resolution=5)
        atom = counterexample_atom(WALSH, 3, 0.5, 5)
        assert np.abs(spec.realized.values - atom.values.values).max() < 1e-12
        assert np.isfinite(hardy_norm(spec.realized, 0.5))

    def test_gap_rule_budget_converges(self):
        spec = build_counterexample(WALSH, 0.5, default_alphas(WALSH, 12), rule="unit_kernel", resolution=12)
        terms = [abs(l) ** spec.p for l in spec.lambdas]
        assert all(b < a for a, b in zip(terms, terms[1:]))
        assert spec.coefficient_budget < 4.0

    def test_gap_filter_keeps_doubling_family(self):
        alphas = default_alphas(WALSH, 12)
        assert select_gap_subsequence(WALSH, alphas, 0.5) == alphas

    def test_gap_filter_rejects_flat_family(self):
        flat = [WALSH.base(k) + WALSH.base(k - 1) for k in range(2, 8)]
        with pytest.raises(ValueError):
            build_counterexample(WALSH, 0.5, flat, rule="unit_kernel", resolution=9)

    def test_tail_certificate_rejects_flat_terms(self):
        flat = [WALSH.base(k) + WALSH.base(k - 1) for k in range(2, 8)]
        terms = tail_certificate_terms(WALSH, flat, 0.5, None)
        assert max(terms) / min(terms) == pytest.approx(1.0)
        with pytest.raises(ValueError) as err:
            build_counterexample(WALSH, 0.5, flat, rule="balanced", resolution=9)
        assert "certificate" in str(err.value)

    def test_explicit_needs_matching_lambdas(self):
        with pytest.raises(ValueError):
            build_counterexample(WALSH, 0.5, [3, 5], rule="explicit", lambdas=[1.0], resolution=6)

    def test_non_increasing_alphas_rejected(self):
        with pytest.raises(ValueError):
            build_counterexample(WALSH, 0.5, [5, 3], resolution=6)
        with pytest.raises(ValueError):
            build_counterexample(WALSH, 0.5, [3, 4], resolution=6)  # same top block

    def test_atomic_budget_constant(self):
        # ||f||_{H_p}^p <= sum |lambda_k|^p (atom Hardy norms are <= 1)
        for rule in ("balanced", "unit_kernel"):
            spec = build_counterexample(WALSH, 0.5, default_alphas(WALSH, 10), rule=rule, resolution=10)
            assert hardy_norm(spec.realized, 0.5) ** 0.5 <= spec.coefficient_budget + 1e-9

    def test_json_round_trip(self):
        spec = build_counterexample(
            ALTERNATING, 2 / 3, default_alphas(ALTERNATING, 8), resolution=8
        )
        clone = MartingaleSpec.from_json(spec.to_json())
        assert clone.alphas == spec.alphas
        assert np.allclose(clone.lambdas, spec.lambdas)
        assert np.abs(clone.realized.values - spec.realized.values).max() < 1e-12


class TestClosedPartialSum:
    @pytest.mark.parametrize("m", [WALSH, ALTERNATING], ids=lambda m: m.format())
    def test_matches_spectral_truncation_everywhere(self, m):
        resolution = 8
        spec = build_counterexample(m, 0.5, default_alphas(m, resolution), resolution=resolution)
        bases = m.scaled_bases(resolution)
        tops = [decompose(a, m).top for a in spec.alphas]
        probe = {0, 1, spec.realized.size}
        for a, top in zip(spec.alphas, tops):
            probe.update({bases[top], bases[top] + 1, bases[top + 1], a})
        rng = np.random.default_rng(3)
        probe.update(int(j) for j in rng.integers(1, spec.realized.size, size=12))
        for j in sorted(probe):
            closed = closed_partial_sum(spec, j)
            spectral = partial_sum(spec.realized, j)
            assert np.abs(closed.values - spectral.values).max() < 1e-9, j

    def test_block_start_drops_kernel_term(self):
        spec = build_counterexample(WALSH, 0.5, [3, 5], rule="explicit", lambdas=[1.0, 1.0], resolution=6)
        at_block = closed_partial_sum(spec, 4).values  # j = M_{|alpha_1|}
        coarse = partial_sum(spec.realized, 4).values
        assert np.abs(at_block - coarse).max() < 1e-9

    def test_two_term_decomposition_at_alpha(self):
        # S_{a_k} f = S_{M_{|a_k|}} f + lambda_k M^{1/p-1} psi_{M_{|a_k|}} D_{a_k - M} / lambda
        m, p, resolution = WALSH, 0.5, 9
        spec = build_counterexample(m, p, default_alphas(m, resolution), resolution=resolution)
        k = 2
        a = spec.alphas[k]
        top = decompose(a, m).top
        m_top = m.base(top)
        term1 = partial_sum(spec.realized, m_top).values
        scale = spec.lambdas[k] * m_top ** (1 / p - 1) / m.max_radix
        term2 = scale * character_values(m, m_top, resolution) * dirichlet_closed(
            m, a - m_top, resolution
        ).values
        assert np.abs(closed_partial_sum(spec, a).values - (term1 + term2)).max() < 1e-9

    def test_floor_ingredient_on_bottom_coset(self):
        # |D_{a_k - M_{|a_k|}}| >= M_<a_k> on I_<a_k> \ I_<a_k>+1
        for m in (WALSH, TRIADIC):
            spec = build_counterexample(m, 0.5, default_alphas(m, 8), resolution=8)
            grid = np.arange(m.size(8))
            for a in spec.alphas:
                idx = decompose(a, m)
                shifted = np.abs(dirichlet_closed(m, a - m.base(idx.top), 8).values)
                shell = ((grid % m.base(idx.bottom)) == 0) & ((grid % m.base(idx.bottom + 1)) != 0)
                assert shifted[shell].min() >= m.base(idx.bottom) - 1e-9


class TestModulusDecay:
    @pytest.mark.parametrize("rule", ["balanced", "unit_kernel"])
    def test_tail_bound_every_truncation(self, rule):
        # omega(1/M_n, f)^p <= sum_{|a_k| >= n} |lambda_k|^p, constant 1
        m, p, resolution = WALSH, 0.5, 10
        spec = build_counterexample(m, p, default_alphas(m, resolution), rule=rule, resolution=resolution)
        tops = [decompose(a, m).top for a in spec.alphas]
        for n in range(resolution + 1):
            tail = sum(abs(l) ** p for l, top in zip(spec.lambdas, tops) if top >= n)
            omega = modulus_hp(spec.realized, n, p)
            if tail == 0:
                assert omega < 1e-9
            else:
                assert omega**p <= tail + 1e-9


class TestPhi:
    def test_constant(self):
        assert phi_value(("constant", 2.5), 7, WALSH) == 2.5
        assert phi_value(None, 7, WALSH) == 1.0

    def test_log_and_power(self):
        n = WALSH.base(4) + 1
        assert phi_value(("log",), n, WALSH) == pytest.approx(1 + np.log(16))
        assert phi_value(("power", 0.5), n, WALSH) == pytest.approx(4.0)

    def test_unknown_tag(self):
        with pytest.raises(ValueError):
            phi_value(("mystery",), 3, WALSH)
