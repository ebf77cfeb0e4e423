"""
Тесты для модуля fourier.py
"""

import numpy as np
import pytest

from src.config_loader import MeasureConfig
from src.fourier import (
    AtomMeasure,
    FourierAtom,
    MeasureError,
    RadialDensityMeasure,
    UnsupportedOperationError,
    atom_measure,
    gaussian_measure,
    hard_instance,
    measure_from_config,
    scaled_cosine_measure,
)


class TestAtomMeasure:
    """Тесты мер из атомов."""

    def test_atom_validation(self):
        """Вес положителен, фаза в [−π, π]."""
        with pytest.raises(MeasureError):
            FourierAtom([1.0], 0.0)
        with pytest.raises(MeasureError):
            FourierAtom([1.0], 1.0, 4.0)

    def test_norms(self):
        """C^α = Σ w‖ξ‖^α."""
        measure = atom_measure([[[3.0, 4.0], 0.5, 0.0], [[0.0, 1.0], 0.25, 1.0]])
        assert measure.dim == 2
        assert measure.c0 == pytest.approx(0.75)
        assert measure.c_alpha(1.0) == pytest.approx(0.5 * 5.0 + 0.25)

    def test_target(self):
        """f(x) = Σ w cos(⟨ξ, x⟩ + θ)."""
        measure = atom_measure([[[2.0], 1.0, 0.5]])
        x = np.linspace(-1.0, 1.0, 11)
        assert np.allclose(measure.target_eval(x), np.cos(2.0 * x + 0.5))
        assert measure.target_eval(0.0) == pytest.approx(np.cos(0.5))

    def test_mixed_dimensions(self):
        """Атомы разных размерностей отклоняются."""
        with pytest.raises(MeasureError, match="разные размерности"):
            AtomMeasure([FourierAtom([1.0], 1.0), FourierAtom([1.0, 0.0], 1.0)])

    def test_malformed_entry(self):
        """Некорректная запись атома."""
        with pytest.raises(MeasureError, match="Атом #0"):
            atom_measure([[1.0]])

    def test_sampling_uses_weights(self):
        """Частоты выбираются пропорционально весам."""
        measure = atom_measure([[[1.0], 3.0, 0.0], [[2.0], 1.0, 0.0]])
        xi, theta = measure.sample_nu_batch(40_000, np.random.default_rng(0))
        share = np.mean(xi[:, 0] == 1.0)
        assert share == pytest.approx(0.75, abs=0.01)
        assert np.all(theta == 0.0)

    def test_shortest_period(self):
        """Период по наибольшей частоте."""
        assert scaled_cosine_measure(4.0, 0.5).shortest_period() == pytest.approx(np.pi / 2)
        assert atom_measure([[[0.0], 1.0, 0.0]]).shortest_period() == np.inf


class TestHardInstance:
    """Тесты трудного примера."""

    @pytest.mark.parametrize("smoothness,radius,oscillations", [(1.0, 1.0, 4), (2.0, 0.5, 16), (4.0, 3.0, 64)])
    def test_norm_identities(self, smoothness, radius, oscillations):
        """C⁰ = ω^{−a}, C^{1/K} = ½r^{−1/K}ω^{1/K−a}, комбинация норм в [½, 3/2]."""
        measure = hard_instance(smoothness, radius, oscillations)
        omega = 2 * np.pi * oscillations
        alpha = 1 / (2 * smoothness)

        assert measure.c0 == pytest.approx(omega ** -alpha, rel=1e-12)
        assert measure.c_alpha(1 / smoothness) == pytest.approx(
            0.5 * radius ** (-1 / smoothness) * omega ** (1 / smoothness - alpha), rel=1e-12)
        assert 0.5 <= measure.norm_combo(smoothness, radius) <= 1.5

    def test_target(self):
        """f(x) = (1 + cos(ωx/r)) / (2ω^a)."""
        measure = hard_instance(2.0, 1.0, 3)
        omega = 6 * np.pi
        x = np.linspace(-1.0, 1.0, 101)
        assert np.allclose(measure.target_eval(x), (1 + np.cos(omega * x)) / (2 * omega ** 0.25))

    def test_invalid(self):
        """Некорректные параметры."""
        with pytest.raises(MeasureError):
            hard_instance(2.0, 1.0, 0)


class TestGaussian:
    """Тесты гауссианы."""

    @pytest.mark.parametrize("dim", [1, 2, 8, 32])
    def test_closed_form_matches_integral(self, dim):
        """Аналитический момент χ совпадает с радиальным интегралом."""
        measure = gaussian_measure(dim)
        assert measure.integral_c_alpha(0.0) == pytest.approx(1.0, rel=1e-8)
        for alpha in (0.25, 0.5, 1.0):
            assert measure.c_alpha(alpha) == pytest.approx(measure.integral_c_alpha(alpha), rel=1e-8)

    def test_target(self):
        """f(x) = exp(−‖x‖²/2)."""
        measure = gaussian_measure(3)
        points = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
        assert np.allclose(measure.target_eval(points), [1.0, np.exp(-1.5)])

    def test_sampler_agrees_with_integrator(self):
        """z-оценка выборочного момента в пределах 4."""
        z = gaussian_measure(2).cross_check(np.random.default_rng(1), 200_000, 0.5)
        assert abs(z) <= 4.0

    def test_no_closed_form_target(self):
        """Без замкнутой формы вычисление цели не поддерживается."""
        measure = RadialDensityMeasure(
            dim=1, family='custom',
            log_radial_weight=lambda rho: -rho,
            radius_sampler=lambda rng, n: rng.exponential(size=n),
        )
        with pytest.raises(UnsupportedOperationError):
            measure.target_eval(0.0)
        assert measure.c_alpha(1.0) == pytest.approx(1.0, rel=1e-8)


class TestMeasureFromConfig:
    """Тесты создания меры из конфигурации."""

    def test_kinds(self):
        """Каждый вид меры строится по секции [measure]."""
        assert isinstance(measure_from_config(MeasureConfig(kind='hard_instance')), AtomMeasure)
        assert measure_from_config(MeasureConfig(kind='gaussian', dim=4)).dim == 4
        cosine = measure_from_config(MeasureConfig(kind='scaled_cosine', frequency=9.0, exponent=0.5))
        assert cosine.c0 == pytest.approx(1 / 3)
        atoms = measure_from_config(MeasureConfig(kind='atoms', atoms=[[[1.0], 2.0, 0.0]]))
        assert atoms.c0 == pytest.approx(2.0)

    def test_unknown_kind(self):
        """Неизвестный вид меры."""
        with pytest.raises(MeasureError):
            measure_from_config(MeasureConfig(kind='laplace'))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
