"""
Тесты для модуля waveform.py
"""

import numpy as np
import pytest

from src.piecewise import crossing_number, from_network_1d
from src.relu_net import evaluate_batch, unit_count
from src.waveform import (
    CompositionPreconditionError,
    TriangleParams,
    WaveformError,
    check_composition,
    composed_params,
    triangle_eval,
    waveform_chain_net,
    waveform_eval,
    waveform_layer,
    waveform_net,
    waveform_pwl,
)


class TestTriangle:
    """Тесты треугольной функции."""

    def test_shape(self):
        """Подъем, пик αβ и спуск."""
        assert triangle_eval(0.5, 1.0, 2.0) == pytest.approx(1.0)
        assert triangle_eval(1.0, 1.0, 2.0) == pytest.approx(2.0)
        assert triangle_eval(1.5, 1.0, 2.0) == pytest.approx(1.0)
        assert triangle_eval(2.5, 1.0, 2.0) == 0.0
        assert triangle_eval(-0.1, 1.0, 2.0) == 0.0

    def test_invalid_params(self):
        """α, β > 0 и целое k ≥ 1."""
        with pytest.raises(WaveformError):
            TriangleParams(0.0, 1.0, 1)
        with pytest.raises(WaveformError):
            TriangleParams(1.0, 1.0, 0)
        with pytest.raises(WaveformError):
            TriangleParams(1.0, 1.0, 1.5)


class TestWaveform:
    """Тесты треугольной волны и ее слоя."""

    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_layer_matches_definition(self, k):
        """Слой из 4k+1 нейронов совпадает с суммой сдвигов на всей прямой."""
        params = TriangleParams(0.7, 1.3, k)
        net = waveform_net(params)
        t = np.linspace(-2 * k * 0.7 - 3.0, 2 * k * 0.7 + 3.0, 5001)
        expected = sum(triangle_eval(t - 2 * 0.7 * m, 0.7, 1.3) for m in range(-k, k))

        assert unit_count(net) == 4 * k + 1
        assert np.allclose(evaluate_batch(net, t), expected, atol=1e-12)
        assert np.allclose(waveform_eval(t, params), expected, atol=1e-12)

    def test_zero_outside_support(self):
        """Вне [−2kα, 2kα] волна равна нулю."""
        params = TriangleParams(0.5, 2.0, 3)
        lo, hi = params.support
        assert waveform_eval(lo - 0.01, params) == 0.0
        assert waveform_eval(hi + 10.0, params) == 0.0

    def test_readout_signs(self):
        """c_0 = c_4k = β, остальные чередуют ±2β."""
        _, readout = waveform_layer(TriangleParams(1.0, 0.5, 1))
        assert np.allclose(readout, [0.5, -1.0, 1.0, -1.0, 0.5])

    def test_analytic_pwl(self):
        """Аналитическое представление совпадает с построенным по сети."""
        params = TriangleParams(0.25, 4.0, 2)
        analytic = waveform_pwl(params)
        derived = from_network_1d(waveform_net(params))
        assert np.allclose(analytic.breakpoints, derived.breakpoints)
        assert np.allclose(analytic.values, derived.values)


class TestComposition:
    """Тесты композиции волн."""

    def test_composed_params(self):
        """T_l ∘ T_k = T_{2kl}(·; a/β, bβ)."""
        inner = TriangleParams(1.0, 3.0, 2)
        outer = TriangleParams(0.5, 2.0, 3)
        result = composed_params(inner, outer)
        assert result.k == 12
        assert result.alpha == pytest.approx(0.5 / 3.0)
        assert result.beta == pytest.approx(6.0)

    def test_precondition(self):
        """αβ ≠ 2al отклоняется."""
        with pytest.raises(CompositionPreconditionError):
            composed_params(TriangleParams(1.0, 1.0, 1), TriangleParams(1.0, 1.0, 1))

    def test_check_composition_random(self):
        """Композиция на сетке для случайных параметров."""
        rng = np.random.default_rng(3)
        for _ in range(20):
            k, l = int(rng.integers(1, 6)), int(rng.integers(1, 6))
            alpha, beta = rng.uniform(0.1, 2.0), rng.uniform(0.1, 3.0)
            inner = TriangleParams(alpha, beta, k)
            outer = TriangleParams(alpha * beta / (2 * l), rng.uniform(0.1, 3.0), l)
            assert check_composition(inner, outer)

    def test_chain_net(self):
        """Сеть из двух слоев вычисляет композицию волн."""
        inner = TriangleParams(1.0, 2.0, 1)
        outer = TriangleParams(1.0, 1.0, 1)
        net = waveform_chain_net([inner, outer])
        t = np.linspace(-4.0, 4.0, 2001)
        expected = waveform_eval(waveform_eval(t, inner), outer)
        assert net.depth == 2
        assert np.allclose(evaluate_batch(net, t), expected, atol=1e-12)


class TestSymmetry:
    """Тесты симметрий волны и числа пересечений."""

    @pytest.mark.parametrize("k", [1, 3, 4])
    def test_reflection(self, k):
        """T_k четна: носитель [−2kα, 2kα] симметричен относительно нуля."""
        params = TriangleParams(0.6, 1.7, k)
        t = np.random.default_rng(k).uniform(-2 * k * 0.6 - 1.0, 2 * k * 0.6 + 1.0, 500)
        assert np.allclose(waveform_eval(-t, params), waveform_eval(t, params), atol=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_translation(self, k):
        """На [2mα, 2(m+1)α] волна равна T(t − 2mα) для m = −k…k−1."""
        alpha, beta = 0.45, 2.2
        params = TriangleParams(alpha, beta, k)
        for m in range(-k, k):
            t = np.linspace(2 * m * alpha, 2 * (m + 1) * alpha, 101)
            expected = triangle_eval(t - 2 * m * alpha, alpha, beta)
            assert np.allclose(waveform_eval(t, params), expected, atol=1e-12)

    @pytest.mark.parametrize("k,expected", [(1, 5), (3, 13), (7, 29)])
    def test_crossing_number(self, k, expected):
        """Cr(T_k) = 4k + 1 на уровне 1/2 при αβ = 1."""
        params = TriangleParams(0.8, 1.0 / 0.8, k)
        assert crossing_number(waveform_pwl(params), 0.5) == expected
        assert crossing_number(from_network_1d(waveform_net(params)), 0.5) == expected

    @pytest.mark.parametrize("factor", [0.1, 1.0, 7.0])
    def test_crossing_number_scale_invariant(self, factor):
        """Cr(c·T_k) на уровне c/2 не зависит от c > 0."""
        pwl = waveform_pwl(TriangleParams(1.0, 1.0, 3))
        assert crossing_number(pwl.scaled(factor), factor / 2.0) == 13


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
