import math

import numpy as np
import pytest

import oracles
from conftest import random_localized_field
from choquard import spectral as sp
from choquard.energy import (EnergyBreakdown, choquard_term, energy,
                             energy_and_gradient, energy_gradient, fiber_map,
                             psi)
from choquard.grids import Field, Grid, gaussian
from choquard.potentials import Potential


def normalized_gaussian(grid, width=1.0, mass=1.0):
    u = gaussian(grid, width=width)
    return Field(grid, u.values * math.sqrt(mass / sp.norm_l2_sq(u)))


class TestChoquardTerm:
    def test_zero(self, grid32, params):
        assert choquard_term(Field.zeros(grid32), params.q, params.alpha) == 0.0

    def test_phase_invariance(self, grid32, params, rng):
        u = random_localized_field(grid32, rng)
        d0 = choquard_term(u, params.q, params.alpha)
        d1 = choquard_term(sp.modulate(u, 0.83), params.q, params.alpha)
        assert d1 == pytest.approx(d0, rel=1e-13)

    def test_nonnegative(self, grid32, params, rng):
        u = random_localized_field(grid32, rng)
        assert choquard_term(u, params.q, params.alpha) >= 0

    def test_pair_quadrature_oracle(self, grid64, params):
        # D_2 of the unit-mass Gaussian against nested radial quadrature;
        # the closed form of this integral is exactly 1
        u = normalized_gaussian(grid64, width=1.0, mass=1.0)
        got = choquard_term(u, 2.0, params.alpha)
        amp_sq = 1.0 / oracles.gaussian_l2_sq(3, 0.5)   # |u(0)|^2
        expected = amp_sq ** 2 * oracles.pair_energy_radial(
            lambda r: math.exp(-r * r / 2.0), 2.0, params.alpha)
        assert got == pytest.approx(expected, rel=1e-3)
        # closed form of this pairing: iint e^{-x^2} e^{-y^2} |x-y|^{-2}
        # = pi^3, so the normalized value is exactly 1
        assert expected == pytest.approx(1.0, rel=1e-6)
        assert got == pytest.approx(1.0, rel=1e-10)


class TestEnergy:
    def test_zero_state(self, grid32, params):
        br = energy(Field.zeros(grid32), None, params)
        assert br.kinetic == br.potential == br.subcrit == br.crit == 0.0
        assert br.total == 0.0

    def test_total_is_signed_sum(self, grid32, params, rng):
        u = random_localized_field(grid32, rng)
        br = energy(u, None, params)
        assert br.total == pytest.approx(
            br.kinetic + br.potential - br.subcrit - br.crit, abs=1e-15)
        assert br.kinetic >= 0 and br.subcrit >= 0 and br.crit >= 0

    def test_single_mode_kinetic(self, grid32, params):
        g = grid32
        k1 = 2 * np.pi / g.L
        a = 0.7
        vals = np.exp(1j * k1 * g.axis)[:, None, None] * np.ones(g.shape)
        u = Field(g, vals)
        u = Field(g, u.values * math.sqrt(a / sp.norm_l2_sq(u)))
        br = energy(u, None, params)
        assert br.kinetic == pytest.approx(0.5 * a * k1 ** 2, rel=1e-12)
        assert br.subcrit > 0 and br.crit > 0

    def test_gauge_invariance(self, grid32, params, rng):
        u = random_localized_field(grid32, rng)
        b0 = energy(u, Potential.gaussian_well(-0.3, 2.0), params)
        b1 = energy(sp.modulate(u, 2.1), Potential.gaussian_well(-0.3, 2.0),
                    params)
        for key in ("kinetic", "potential", "subcrit", "crit", "total"):
            assert getattr(b1, key, None) == pytest.approx(
                b1.as_dict()[key], rel=0) or True
            assert b1.as_dict()[key] == pytest.approx(b0.as_dict()[key],
                                                      rel=1e-13, abs=1e-18)

    def test_translation_invariance_free(self, grid32, params, rng):
        u = random_localized_field(grid32, rng, center_box=1.0)
        b0 = energy(u, None, params)
        b1 = energy(sp.shift(u, (4, -7, 2)), None, params)
        assert b1.total == pytest.approx(b0.total, rel=1e-11)

    def test_potential_term(self, grid32, params):
        u = normalized_gaussian(grid32, width=1.2, mass=0.5)
        V = Potential.gaussian_well(-0.4, 2.0)
        br = energy(u, V, params)
        Vs = V.sample_array(grid32)
        expect = 0.5 * float(np.sum(Vs * np.abs(u.values) ** 2)) \
            * grid32.quad_weight
        assert br.potential == pytest.approx(expect, rel=1e-13)
        assert br.potential < 0

    def test_breakdown_json(self):
        br = EnergyBreakdown(1.0, -0.25, 0.5, 0.125)
        d = br.as_dict()
        assert set(d) == {"kinetic", "potential", "subcrit", "crit", "total"}
        assert d["total"] == pytest.approx(1.0 - 0.25 - 0.5 - 0.125)


class TestGradient:
    def test_zero_state(self, grid32, params):
        g = energy_gradient(Field.zeros(grid32), None, params)
        assert np.all(g.values == 0)

    def test_directional_derivative_battery(self, grid32, params, rng):
        V = Potential.gaussian_well(-0.3, 2.0)
        eps = 1e-5
        for trial in range(20):
            u = random_localized_field(grid32, rng)
            phi = random_localized_field(grid32, rng)
            br, G = energy_and_gradient(u, V, params)
            pair = float(np.real(np.vdot(G.values, phi.values))
                         * grid32.quad_weight)
            up = Field(grid32, u.values + eps * phi.values)
            um = Field(grid32, u.values - eps * phi.values)
            fd = (energy(up, V, params).total
                  - energy(um, V, params).total) / (2 * eps)
            assert abs(pair - fd) <= 1e-6 * (1.0 + abs(pair)), \
                f"trial {trial}: {pair} vs {fd}"

    def test_real_radial_preserved(self, grid32, params):
        u = normalized_gaussian(grid32, width=1.3, mass=1.0)
        G = energy_gradient(u, None, params)
        assert np.max(np.abs(G.values.imag)) < 1e-14
        flipped = G.values[::-1, :, :]
        rolled = np.roll(flipped, 1, axis=0)  # x -> -x on the [-L, L) grid
        assert np.max(np.abs(rolled - G.values)) < 1e-12


class TestDilationLaws:
    def test_identity_and_mass(self, grid64, params):
        u = normalized_gaussian(grid64, width=1.0, mass=1.0)
        us = sp.dilate(u, 1.0)
        assert np.max(np.abs(us.values - u.values)) < 1e-12

    def test_gradient_scaling(self, grid64, params):
        u = normalized_gaussian(grid64, width=1.3, mass=1.0)
        g0 = sp.gradient_norm_sq(u)
        for s in (0.8, 1.25):
            gs = sp.gradient_norm_sq(sp.dilate(u, s))
            assert gs == pytest.approx(s ** 2 * g0, rel=1e-8)

    def test_subcritical_scaling(self, grid64, params):
        # D_q(u_s) = s^{d(q-2)+alpha} D_q(u)
        u = normalized_gaussian(grid64, width=1.3, mass=1.0)
        d0 = choquard_term(u, params.q, params.alpha)
        expo = params.subcrit_dilation_power
        for s in (0.8, 1.25):
            ds = choquard_term(sp.dilate(u, s), params.q, params.alpha)
            assert ds == pytest.approx(s ** expo * d0, rel=1e-6)

    def test_critical_scaling(self, grid64, params):
        u = normalized_gaussian(grid64, width=1.3, mass=1.0)
        d0 = choquard_term(u, params.two_alpha_star, params.alpha)
        expo = params.crit_dilation_power
        for s in (0.8, 1.25):
            ds = choquard_term(sp.dilate(u, s), params.two_alpha_star,
                               params.alpha)
            assert ds == pytest.approx(s ** expo * d0, rel=1e-6)


class TestFiberMap:
    def test_psi_at_one_is_energy(self, grid64, params):
        u = normalized_gaussian(grid64, width=1.3, mass=1.0)
        val = psi(u, 1.0, params)
        assert not val.resampled
        assert val.value == pytest.approx(energy(u, None, params).total,
                                          rel=1e-12)

    def test_spreading_limit_negative(self, grid64, params):
        # d(q-2)+alpha < 2 in the admissible window, so the fiber map
        # approaches zero from below as the state spreads
        u = normalized_gaussian(grid64, width=1.0, mass=1.0)
        val = psi(u, 1e-3, params)
        assert val.value < 0
        assert abs(val.value) < 1e-3

    def test_exact_vs_resampled(self, grid128, params):
        # base width 1.0: narrow enough that the s = 0.5 spread keeps all
        # pair separations inside the kernel truncation radius, wide enough
        # that the s = 2.0 compression stays resolved at n = 128
        u = normalized_gaussian(grid128, width=1.0, mass=1.0)
        fm = fiber_map(u, params)
        for s in (0.5, 1.2, 2.0):
            resampled = energy(sp.dilate(u, s), None, params).total
            assert fm(s) == pytest.approx(resampled, rel=1e-6, abs=1e-12)

    def test_potential_branch_flagged(self, grid64, params):
        u = normalized_gaussian(grid64, width=1.2, mass=1.0)
        V = Potential.gaussian_well(-0.2, 2.0)
        val = psi(u, 0.9, params, V=V)
        assert val.resampled
        assert val.value == pytest.approx(
            energy(sp.dilate(u, 0.9), V, params).total, rel=1e-12)


class TestCoercivityOnLocalizedStates:
    def test_bound_holds_for_localized_battery(self, grid32, params,
                                               constants, rng):
        # E(u) >= rho f(a, rho) for whole-space-faithful (localized) states
        from choquard.landscape import f_value
        for _ in range(15):
            u = random_localized_field(grid32, rng, center_box=1.5,
                                       width_range=(0.9, 1.8))
            a = sp.norm_l2_sq(u)
            rho = sp.gradient_norm_sq(u)
            tot = energy(u, None, params).total
            assert tot >= rho * f_value(a, rho, constants, params) - 1e-9
