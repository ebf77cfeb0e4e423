"""
Тесты для модуля synthesizer.py
"""

from dataclasses import replace

import numpy as np
import pytest

from src.config_loader import SynthesisConfig
from src.fourier import gaussian_measure, hard_instance, scaled_cosine_measure
from src.relu_net import evaluate_batch, unit_count
from src.synthesizer import (
    SynthesisError,
    Synthesizer,
    LossMeasure,
    check_alpha_chain,
    check_chain_composition,
    choose_sample_count,
    constant_net,
    cosine_subnet,
    create_synthesizer,
    deep_cosine_net,
    embedded_smoothness,
    estimate_loss,
    measure_loss,
    plan_deep_cosine,
    shallow_cosine_net,
    subnet_expectation,
    subnet_unit_count,
    theorem1_bounds,
    zero_net,
)


def synthesis_config(**overrides) -> SynthesisConfig:
    params = dict(depth=1, budget=2000, radius=1.0, smoothness=1.0, retries=3, seed=1, loss_samples=2000)
    params.update(overrides)
    return SynthesisConfig(**params)


class TestDeepCosinePlan:
    """Тесты параметров глубокой подсети."""

    @pytest.mark.parametrize("depth", [2, 3, 4])
    def test_unit_bound_and_chain(self, depth):
        """Число нейронов не превышает (8/π+2D−2)(r‖ξ‖)^{1/D}+5D+27, цепочка α согласована."""
        rng = np.random.default_rng(depth)
        for norm in np.exp(rng.uniform(0.0, np.log(1e4), 30)):
            plan = plan_deep_cosine(float(norm), 1.0, depth)
            assert plan.unit_count <= plan.unit_bound()
            assert plan.coverage_holds()
            assert check_alpha_chain(plan)

    @pytest.mark.parametrize("norm,depth", [(50.0, 2), (400.0, 2), (1000.0, 3)])
    def test_chain_composition(self, norm, depth):
        """Композиция цепочки волн равна T_k(·; α, β)."""
        assert check_chain_composition(plan_deep_cosine(norm, 1.0, depth))

    @pytest.mark.parametrize("index,factor", [(1, 1.01), (0, 0.5), (2, 2.0)])
    def test_broken_alpha_chain_detected(self, index, factor):
        """Искаженное α_i нарушает условие α_i·γ = 2·α_{i+1}·l_tri."""
        plan = plan_deep_cosine(1000.0, 1.0, 4)
        alphas = list(plan.alphas)
        alphas[index] *= factor
        assert check_alpha_chain(plan)
        assert not check_alpha_chain(replace(plan, alphas=tuple(alphas)))

    def test_unit_bound_exceeded_is_reported(self, mocker):
        """Превышение оценки числа нейронов помечается в плане и логируется."""
        from_logger = mocker.patch('src.synthesizer.Fourier2ReluLogger.from_logger')
        mocker.patch('src.synthesizer.DeepCosinePlan.unit_bound', return_value=0.0)

        plan = plan_deep_cosine(100.0, 1.0, 2)

        assert not plan.within_unit_bound
        warning = from_logger.return_value.log_warning
        warning.assert_called_once()
        assert "оценку числа нейронов" in warning.call_args[0][0]

    def test_unit_bound_respected_is_silent(self, mocker):
        """Без превышения предупреждения нет."""
        from_logger = mocker.patch('src.synthesizer.Fourier2ReluLogger.from_logger')
        plan = plan_deep_cosine(100.0, 1.0, 2)
        assert plan.within_unit_bound
        from_logger.assert_not_called()

    def test_zero_frequency_rejected(self):
        """Нулевая частота не имеет плана."""
        with pytest.raises(SynthesisError):
            plan_deep_cosine(0.0, 1.0, 2)


class TestSubnets:
    """Тесты косинусных подсетей."""

    def test_shallow_unit_count(self):
        """16n + 16 нейронов при n = ⌈‖ξ‖r/2π⌉."""
        net = shallow_cosine_net([20.0], 0.0, 0.3, 1.0)
        assert unit_count(net) == 16 * 4 + 16
        assert subnet_unit_count(20.0, 1.0, 1) == unit_count(net)

    def test_deep_depth_and_count(self):
        """Глубина D и число нейронов по плану."""
        net = deep_cosine_net([300.0], 0.2, 0.6, 1.0, 3, validate=True)
        assert net.depth == 3
        assert unit_count(net) == plan_deep_cosine(300.0, 1.0, 3).unit_count

    def test_deep_requires_depth_two(self):
        """D = 1 не является глубокой подсетью."""
        with pytest.raises(SynthesisError):
            deep_cosine_net([3.0], 0.0, 0.5, 1.0, 1)

    @pytest.mark.parametrize("norm,depth", [(7.0, 1), (100.0, 2), (1000.0, 3)])
    def test_unbiased_on_interval(self, norm, depth):
        """∫₀¹ подсети по s совпадает с cos(‖ξ‖x + θ) на [−r, r]."""
        theta = np.pi / 3
        grid = np.linspace(-1.0, 1.0, 201)
        expectation = subnet_expectation([norm], theta, 1.0, depth, grid)
        assert np.max(np.abs(expectation - np.cos(norm * grid + theta))) <= 1e-7

    def test_unbiased_multidimensional(self):
        """Подсеть по направлению ξ/‖ξ‖ для d = 2."""
        xi = np.array([30.0, 40.0])
        points = np.random.default_rng(0).uniform(-0.7, 0.7, size=(50, 2))
        expectation = subnet_expectation(xi, 0.1, 1.0, 2, points)
        assert np.max(np.abs(expectation - np.cos(points @ xi + 0.1))) <= 1e-7

    @pytest.mark.parametrize("depth", [1, 2, 4])
    def test_constant_subnet(self, depth):
        """При ξ = 0 подсеть равна cos θ и содержит D нейронов."""
        net = cosine_subnet([0.0], 2.5, 0.4, 1.0, depth)
        values = evaluate_batch(net, np.linspace(-3.0, 3.0, 7))
        assert np.allclose(values, np.cos(2.5))
        assert unit_count(net) == depth
        assert subnet_unit_count(0.0, 1.0, depth) == depth
        assert net == constant_net(2.5, depth)

    def test_zero_net(self):
        """Нулевая сеть: по нейрону на слой."""
        net = zero_net(3, input_dim=2)
        assert unit_count(net) == 3
        assert np.all(evaluate_batch(net, np.ones((4, 2))) == 0.0)


class TestBounds:
    """Тесты верхних оценок и выбора m."""

    def test_depth_one_display(self):
        """D = 1: (6π⁴C⁰C^{1/K}r^{1/K} + 8π⁴(C⁰)²)/N₀^{1/K}."""
        bounds = theorem1_bounds(1, 2.0, 100, 1.0, 0.5, 2.0)
        expected = (6 * np.pi ** 4 * 1.0 + 8 * np.pi ** 4 * 0.25) / 10.0
        assert bounds.display == pytest.approx(expected)

    @pytest.mark.parametrize("depth,smoothness", [(2, 2.0), (2, 4.0), (3, 3.0)])
    def test_simplified_dominates(self, depth, smoothness):
        """Упрощенная форма с A₀ не меньше исходной."""
        bounds = theorem1_bounds(depth, smoothness, 1024, 1.0, 0.3, 5.0)
        assert bounds.display <= bounds.simplified
        assert bounds.implied_constant <= bounds.a0 * depth ** (-depth / smoothness) * (1 + 1e-12)

    def test_embedded_smoothness(self):
        """При D > K используется K := D."""
        assert embedded_smoothness(2.0, 3) == 3.0
        assert embedded_smoothness(4.0, 2) == 4.0

    def test_sample_count_formula(self):
        """m = ⌊N₀^{D/K}/D₀⌋ для трудного примера."""
        measure = hard_instance(2.0, 1.0, 16)
        config = synthesis_config(depth=2, budget=4000, smoothness=2.0)
        count = choose_sample_count(measure, config)

        ratio = measure.c_alpha(0.5) / measure.c0
        d0 = 2 * ((8 / np.pi + 2) * ratio + 37)
        assert count.d0 == pytest.approx(d0)
        assert count.samples == max(1, int(np.floor(4000 / d0)))
        assert count.may_fallback is False

    def test_sample_count_override_and_fallback(self):
        """Явное m из конфигурации и признак малого бюджета."""
        measure = scaled_cosine_measure(5.0, 0.5)
        assert choose_sample_count(measure, synthesis_config(samples=7)).samples == 7
        tiny = choose_sample_count(measure, synthesis_config(budget=4))
        assert tiny.samples == 1
        assert tiny.may_fallback is True


class TestLoss:
    """Тесты измерения потери."""

    def test_zero_network_loss_exact(self):
        """Потеря нулевой сети равна среднему f² на [−r, r]."""
        measure = scaled_cosine_measure(5.0, 0.5)
        loss = measure_loss(zero_net(1), measure, LossMeasure(1.0))
        assert loss == pytest.approx((0.5 + np.sin(10.0) / 20.0) / 5.0, rel=1e-10)

    def test_monte_carlo_loss(self):
        """При d > 1 потеря оценивается Монте-Карло со стандартной ошибкой."""
        measure = gaussian_measure(2)
        estimate = estimate_loss(zero_net(1, input_dim=2), measure, LossMeasure(1.0, 5000, 3))
        assert estimate.stderr > 0
        assert 0.0 < estimate.value < 1.0

    def test_dimension_mismatch(self):
        """Размерность сети должна совпадать с мерой."""
        with pytest.raises(SynthesisError):
            measure_loss(zero_net(1), gaussian_measure(2), LossMeasure(1.0))


class TestSynthesizer:
    """Тесты синтеза сети."""

    def test_budget_and_bound(self):
        """Сеть укладывается в бюджет, потеря не выше оценки."""
        measure = scaled_cosine_measure(5.0, 0.5)
        net, report = Synthesizer(synthesis_config()).synthesize(measure)

        assert report.fallback is False
        assert report.accepted_count == 3
        assert unit_count(net) == report.unit_count <= 2000
        assert 0.0 <= report.loss <= report.bound
        assert report.bound <= report.simplified_bound or report.depth == 1
        assert report.to_dict()['m'] == report.samples

    def test_deterministic_for_seed(self):
        """Одно зерно дает одинаковые сети при любом числе потоков."""
        measure = scaled_cosine_measure(5.0, 0.5)
        first, report1 = Synthesizer(synthesis_config(seed=42)).synthesize(measure)
        second, report2 = Synthesizer(synthesis_config(seed=42, workers=3)).synthesize(measure)
        assert first == second
        assert report1.loss == report2.loss

    def test_fallback_to_zero_network(self):
        """Если все попытки превышают бюджет, возвращается нулевая сеть."""
        measure = scaled_cosine_measure(5.0, 0.5)
        net, report = create_synthesizer(synthesis_config(budget=4)).synthesize(measure)

        assert report.fallback is True
        assert report.accepted_count == 0
        assert np.all(evaluate_batch(net, np.linspace(-1, 1, 5)) == 0.0)
        assert report.loss == pytest.approx((0.5 + np.sin(10.0) / 20.0) / 5.0, rel=1e-10)

    def test_deep_synthesis(self):
        """Синтез глубины 2 для трудного примера."""
        measure = hard_instance(2.0, 1.0, 4)
        net, report = Synthesizer(synthesis_config(depth=2, smoothness=2.0, budget=3000)).synthesize(measure)
        assert net.depth == 2
        assert report.unit_count <= 3000
        assert np.isfinite(report.loss)
        assert report.loss <= report.bound

    def test_multidimensional_synthesis(self):
        """Синтез для гауссианы в d = 2."""
        measure = gaussian_measure(2)
        net, report = Synthesizer(synthesis_config(budget=1000)).synthesize(measure)
        assert net.input_dim == 2
        assert report.loss_stderr > 0
        assert report.loss <= report.bound


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
