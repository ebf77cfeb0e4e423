"""
Модуль синтеза ReLU-сетей по мере Фурье.

Для каждой выборки (ξ_j, S_j) ~ ν_f × Unif[0, 1] строится подсеть, несмещенно
оценивающая cos(⟨ξ_j, x⟩ + θ_j): однослойная (Γ^cos_n) при D = 1 или
глубокая (цепочка треугольных волн + Γ^cos_n) при D > 1. Подсети
объединяются с коэффициентами C_f⁰/m; попытки, превысившие бюджет N₀,
отбрасываются, из остальных берется лучшая по измеренной потере.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    from .config_loader import SynthesisConfig
    from .fourier import FourierMeasure
    from .logger import Fourier2ReluLogger
    from .piecewise import from_network_1d, l2_loss_vs_target
    from .quadrature import segment_nodes
    from .relu_net import LayerSpec, ReluNetwork, compose_scalar_layers, evaluate_batch, parallel_merge, unit_count
    from .sinusoid import expectation_edges, gamma_cos_layer, gamma_cos_layer_params
    from .waveform import TriangleParams, waveform_eval, waveform_layer
except ImportError:
    from config_loader import SynthesisConfig
    from fourier import FourierMeasure
    from logger import Fourier2ReluLogger
    from piecewise import from_network_1d, l2_loss_vs_target
    from quadrature import segment_nodes
    from relu_net import LayerSpec, ReluNetwork, compose_scalar_layers, evaluate_batch, parallel_merge, unit_count
    from sinusoid import expectation_edges, gamma_cos_layer, gamma_cos_layer_params
    from waveform import TriangleParams, waveform_eval, waveform_layer


MAX_COVERAGE_INCREMENTS = 3
CHAIN_TOLERANCE = 1e-12


class SynthesisError(Exception):
    """Исключение для ошибок синтеза."""
    pass


class CoverageError(SynthesisError):
    """Цепочка треугольных волн не покрывает нужный отрезок."""
    pass


@dataclass(frozen=True)
class DeepCosinePlan:
    """
    Параметры глубокой косинусной подсети для частоты ‖ξ‖.

    Слои 1…D−1 вычисляют T_{l_tri}(·; α_i, γ), слой D - Γ^cos_n(·; s, ω).
    Композиция цепочки равна T_k(·; α, β) с k = 2^{D−2}·l_tri^{D−1}.
    """
    norm: float
    radius: float
    depth: int
    omega: float
    n: int
    beta: float
    gamma: float
    l_tri: int
    alphas: Tuple[float, ...]
    increments: int = 0

    @property
    def alpha(self) -> float:
        return (2 * self.n + 1) * np.pi / self.norm

    @property
    def k(self) -> int:
        if self.depth == 1:
            return 0
        return 2 ** (self.depth - 2) * self.l_tri ** (self.depth - 1)

    @property
    def chain(self) -> List[TriangleParams]:
        return [TriangleParams(alpha, self.gamma, self.l_tri) for alpha in self.alphas]

    @property
    def composed(self) -> TriangleParams:
        return TriangleParams(self.alpha, self.beta, self.k)

    @property
    def unit_count(self) -> int:
        return (self.depth - 1) * (4 * self.l_tri + 1) + 16 * self.n + 16

    def coverage_holds(self) -> bool:
        """k ≥ ⌈(r + π/‖ξ‖)/(2α)⌉."""
        if self.depth == 1:
            return True
        required = int(np.ceil((self.radius + np.pi / self.norm) / (2.0 * self.alpha)))
        return self.k >= required

    def unit_bound(self) -> float:
        """(8/π + 2D − 2)(r‖ξ‖)^{1/D} + 5D + 27."""
        return (8.0 / np.pi + 2 * self.depth - 2) * (self.radius * self.norm) ** (1.0 / self.depth) \
            + 5 * self.depth + 27

    @property
    def within_unit_bound(self) -> bool:
        """Число нейронов не превышает (8/π + 2D − 2)(r‖ξ‖)^{1/D} + 5D + 27."""
        return self.unit_count <= self.unit_bound()


def _alpha_chain(norm: float, n: int, l_tri: int, gamma: float, depth: int) -> Tuple[float, ...]:
    alpha_1 = (2 * l_tri) ** (depth - 2) * (2 * n + 1) * np.pi / norm
    return tuple(alpha_1 * (gamma / (2 * l_tri)) ** i for i in range(depth - 1))


def plan_deep_cosine(norm: float, radius: float, depth: int) -> DeepCosinePlan:
    """
    Вычисляет параметры подсети: ω = ‖ξ‖^{1/D}, n = ⌈(‖ξ‖r)^{1/D}/2π⌉,
    β = ‖ξ‖^{1−1/D}, l_tri = ⌈(r‖ξ‖)^{1/D}/2⌉, γ = ‖ξ‖^{1/D}.

    При нарушении условия покрытия l_tri увеличивается (не более 3 раз).
    Если после увеличений число нейронов превысило оценку, пишется предупреждение,
    а план помечается within_unit_bound = False.

    Raises:
        CoverageError: Если условие покрытия не выполнено после всех увеличений
    """
    if not norm > 0:
        raise SynthesisError(f"Частота должна быть ненулевой: {norm}")
    if depth < 1:
        raise SynthesisError(f"Глубина должна быть >= 1: {depth}")
    root = (norm * radius) ** (1.0 / depth)
    gamma = norm ** (1.0 / depth)
    n = int(np.ceil(root / (2.0 * np.pi)))
    l_tri = max(1, int(np.ceil(root / 2.0)))

    for increments in range(MAX_COVERAGE_INCREMENTS + 1):
        plan = DeepCosinePlan(
            norm=norm, radius=radius, depth=depth, omega=gamma, n=n,
            beta=norm ** (1.0 - 1.0 / depth), gamma=gamma, l_tri=l_tri + increments,
            alphas=_alpha_chain(norm, n, l_tri + increments, gamma, depth) if depth > 1 else (),
            increments=increments,
        )
        if plan.coverage_holds():
            if not plan.within_unit_bound:
                Fourier2ReluLogger.from_logger().log_warning(
                    f"Подсеть превышает оценку числа нейронов: ‖ξ‖={norm}, D={depth}, "
                    f"увеличений l_tri {increments}, {plan.unit_count} > {plan.unit_bound():.1f}"
                )
            return plan

    raise CoverageError(
        f"Условие покрытия не выполнено: ‖ξ‖={norm}, r={radius}, D={depth}, "
        f"l_tri={plan.l_tri}, k={plan.k}, α={plan.alpha}"
    )


def check_alpha_chain(plan: DeepCosinePlan) -> bool:
    """Проверяет условие композиции α_i·γ = 2·α_{i+1}·l_tri на каждом стыке."""
    for current, following in zip(plan.alphas, plan.alphas[1:]):
        lhs = current * plan.gamma
        rhs = 2.0 * following * plan.l_tri
        if abs(lhs - rhs) > CHAIN_TOLERANCE * max(abs(lhs), abs(rhs)):
            return False
    if plan.alphas:
        first = (2 * plan.l_tri) ** (plan.depth - 2) * plan.alpha
        if abs(plan.alphas[0] - first) > CHAIN_TOLERANCE * first:
            return False
    return True


def check_chain_composition(plan: DeepCosinePlan, points: int = 2001) -> bool:
    """Сравнивает композицию цепочки с T_k(·; α, β) на сетке, покрывающей носитель."""
    if plan.depth == 1:
        return True
    target = plan.composed
    lo, hi = target.support
    grid = np.linspace(lo - 1.0, hi + 1.0, points)
    values = grid
    for params in plan.chain:
        values = waveform_eval(values, params)
    expected = waveform_eval(grid, target)
    return bool(np.max(np.abs(values - expected)) <= 1e-9 * (1.0 + target.peak))


def _unit_direction(xi: Sequence[float]) -> Tuple[np.ndarray, float]:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return xi, float(np.linalg.norm(xi))


def shallow_cosine_net(xi: Sequence[float], theta: float, s: float, radius: float) -> ReluNetwork:
    """
    Однослойная подсеть Γ^cos_n(⟨ξ, x⟩/‖ξ‖ + θ/‖ξ‖; s, ‖ξ‖) с n = ⌈‖ξ‖r/2π⌉.

    При ξ = 0 возвращает однонейронную константу cos θ.
    """
    xi, norm = _unit_direction(xi)
    if norm == 0:
        return constant_net(theta, 1, xi.size)
    plan = plan_deep_cosine(norm, radius, 1)
    block = gamma_cos_layer(s, plan.omega, plan.n)
    return compose_scalar_layers(xi / norm, theta / norm, [block])


def deep_cosine_net(xi: Sequence[float], theta: float, s: float, radius: float, depth: int,
                    validate: bool = False) -> ReluNetwork:
    """
    Глубокая подсеть: первые D−1 слоев - треугольные волны, слой D - Γ^cos_n.

    Args:
        xi: Частота (ненулевая)
        theta: Фаза
        s: Значение случайного сдвига S
        radius: Радиус шара r
        depth: Глубина D >= 2
        validate: Проверить цепочку α и композицию волн на сетке

    Raises:
        SynthesisError: Если ξ = 0, D < 2 или проверка не пройдена
    """
    xi, norm = _unit_direction(xi)
    if norm == 0:
        raise SynthesisError("Глубокая подсеть требует ξ ≠ 0")
    if depth < 2:
        raise SynthesisError(f"Глубокая подсеть требует D >= 2, получено {depth}")
    plan = plan_deep_cosine(norm, radius, depth)
    if validate:
        if not check_alpha_chain(plan):
            raise SynthesisError(f"Нарушено условие композиции в цепочке α: {plan.alphas}")
        if not check_chain_composition(plan):
            raise SynthesisError(f"Композиция волн не совпала с T_k (k={plan.k})")

    blocks = [waveform_layer(params) for params in plan.chain]
    blocks.append(gamma_cos_layer(s, plan.omega, plan.n))
    return compose_scalar_layers(xi / norm, theta / norm, blocks)


def cosine_subnet(xi: Sequence[float], theta: float, s: float, radius: float, depth: int) -> ReluNetwork:
    """Подсеть нужной глубины для одной выборки (ξ, θ, s)."""
    xi_arr, norm = _unit_direction(xi)
    if norm == 0:
        return constant_net(theta, depth, xi_arr.size)
    if depth == 1:
        return shallow_cosine_net(xi_arr, theta, s, radius)
    return deep_cosine_net(xi_arr, theta, s, radius, depth)


def subnet_unit_count(norm: float, radius: float, depth: int) -> int:
    """Число нейронов подсети без ее построения."""
    if norm == 0:
        return depth
    return plan_deep_cosine(norm, radius, depth).unit_count


def constant_net(theta: float, depth: int, input_dim: int = 1) -> ReluNetwork:
    """
    Константа cos θ: нейрон ReLU(0·x + 1) = 1 в каждом из D слоев, выход cos θ.
    """
    first = LayerSpec(np.zeros((1, input_dim)), np.array([-1.0]))
    carry = [LayerSpec(np.ones((1, 1)), np.zeros(1)) for _ in range(depth - 1)]
    return ReluNetwork(input_dim=input_dim, layers=(first, *carry), readout=np.array([np.cos(theta)]))


def zero_net(depth: int, input_dim: int = 1) -> ReluNetwork:
    """Сеть, тождественно равная нулю: по одному нейрону на слой, нулевой выход."""
    first = LayerSpec(np.zeros((1, input_dim)), np.zeros(1))
    rest = [LayerSpec(np.zeros((1, 1)), np.zeros(1)) for _ in range(depth - 1)]
    return ReluNetwork(input_dim=input_dim, layers=(first, *rest), readout=np.zeros(1))


def subnet_expectation(xi: Sequence[float], theta: float, radius: float, depth: int,
                       points: np.ndarray) -> np.ndarray:
    """
    Интеграл по s ∈ [0, 1] от выхода подсети в каждой из точек.

    Первые D−1 слоев и веса последнего берутся из построенной сети. От s зависят
    только пороги и выходные коэффициенты последнего слоя, поэтому для каждой
    точки интеграл делится по s-изломам и считается Гауссом-Лежандром.
    """
    xi_arr, norm = _unit_direction(xi)
    points = np.asarray(points, dtype=float)
    if points.ndim == 1 and xi_arr.size == 1:
        points = points[:, None]
    if norm == 0:
        return evaluate_batch(constant_net(theta, depth, xi_arr.size), points)

    plan = plan_deep_cosine(norm, radius, depth)
    reference = cosine_subnet(xi_arr, theta, 0.5, radius, depth)
    last = reference.layers[-1]
    hidden = points
    for layer in reference.layers[:-1]:
        hidden = layer.forward(hidden)
    inputs = hidden @ last.weights.T

    base_thresholds, _ = gamma_cos_layer_params(0.5, plan.omega, plan.n)
    shift = last.thresholds - base_thresholds[0]

    result = np.empty(points.shape[0])
    for index, row in enumerate(inputs):
        edges = expectation_edges(row[0] - shift[0], plan.omega, plan.n)
        nodes, weights = segment_nodes(edges)
        thresholds, readout = gamma_cos_layer_params(nodes.ravel(), plan.omega, plan.n)
        values = np.sum(readout * np.maximum(row[None, :] - (thresholds + shift[None, :]), 0.0), axis=1)
        result[index] = np.sum(np.sum(values.reshape(nodes.shape) * weights, axis=1))
    return result


@dataclass(frozen=True)
class UpperBounds:
    """Верхние оценки потери из доказательства теоремы о синтезе."""
    display: float
    simplified: float
    a0: float
    implied_constant: float


def theorem1_bounds(depth: int, smoothness: float, budget: int, radius: float,
                    c0: float, c_smooth: float) -> UpperBounds:
    """
    Оценки потери для бюджета N₀.

    D = 1: (6π⁴C⁰C^{1/K}r^{1/K} + 8π⁴(C⁰)²)/N₀^{1/K}.
    D > 1: 3π⁴(2D+1)^{D/K}/(4N₀^{D/K})·r^{1/K}C^{1/K}C⁰ + 3π⁴(5D+27)^{D/K}/(4N₀^{D/K})·(C⁰)².
    Упрощенная форма: A₀·N₀^{−D/K}·(r^{1/K}C^{1/K}C⁰ + (C⁰)²) с
    A₀ = (3π⁴/4)·max((2D+1)^{D/K}, (5D+27)^{D/K}).
    """
    rate = depth / smoothness
    mixed = radius ** (1.0 / smoothness) * c_smooth * c0
    combo = mixed + c0 ** 2
    pi4 = np.pi ** 4
    if depth == 1:
        display = (6.0 * pi4 * mixed + 8.0 * pi4 * c0 ** 2) / budget ** (1.0 / smoothness)
    else:
        display = 0.75 * pi4 / budget ** rate * ((2 * depth + 1) ** rate * mixed + (5 * depth + 27) ** rate * c0 ** 2)
    a0 = 0.75 * pi4 * max((2 * depth + 1) ** rate, (5 * depth + 27) ** rate)
    simplified = a0 * combo / budget ** rate
    implied = display / (combo * (depth / budget) ** rate) if combo > 0 else float('nan')
    return UpperBounds(display=float(display), simplified=float(simplified), a0=float(a0),
                       implied_constant=float(implied))


def embedded_smoothness(smoothness: float, depth: int) -> float:
    """
    Показатель K, с которым допустим синтез глубины D.

    Класс 𝒢_K вложен в 𝒢_D при D > K (C^{1/D} + C⁰ ≤ 2(C^{1/K} + C⁰)), поэтому
    при D > K расчет ведется с K := D.
    """
    return float(max(smoothness, depth))


@dataclass(frozen=True)
class SampleCount:
    """Число выборок m и константа D₀ из оценки числа нейронов."""
    samples: int
    d0: float
    may_fallback: bool


def choose_sample_count(measure: FourierMeasure, config: SynthesisConfig) -> SampleCount:
    """
    m = max(1, ⌊N₀^{D/K}/D₀⌋), D₀ = 2[(8/π + 2D − 2)^{D/K} r^{1/K} C^{1/K}/C⁰ + (5D + 27)^{D/K}].

    При D = 1 формула совпадает с 2[(8r/π)^{1/K}C^{1/K}/C⁰ + 32^{1/K}].
    Если N₀^{D/K} < D₀, выставляется признак возможного перехода к нулевой сети.
    """
    depth, smoothness = config.depth, config.smoothness
    rate = depth / smoothness
    c0 = measure.c0
    c_smooth = measure.c_alpha(1.0 / smoothness)
    d0 = 2.0 * ((8.0 / np.pi + 2 * depth - 2) ** rate * config.radius ** (1.0 / smoothness) * c_smooth / c0
                + (5 * depth + 27) ** rate)
    scaled_budget = config.budget ** rate
    if config.samples is not None:
        samples = config.samples
    else:
        samples = max(1, int(np.floor(scaled_budget / d0)))
    return SampleCount(samples=samples, d0=float(d0), may_fallback=bool(scaled_budget < d0))


@dataclass(frozen=True)
class LossMeasure:
    """
    Мера μ для потери: равномерная на [−r, r] (d = 1, точно) или на шаре B_d(r) (Монте-Карло).
    """
    radius: float
    samples: int = 20000
    seed: int = 0


@dataclass(frozen=True)
class LossEstimate:
    value: float
    stderr: float = 0.0


def _uniform_ball(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * (radius * rng.random(count) ** (1.0 / dim))[:, None]


def estimate_loss(net: ReluNetwork, measure: FourierMeasure, mu: LossMeasure) -> LossEstimate:
    """∫(f − f̂)² dμ: точно через кусочно-линейную форму при d = 1, Монте-Карло при d > 1."""
    if measure.dim != net.input_dim:
        raise SynthesisError(f"Размерность сети ({net.input_dim}) не совпадает с мерой ({measure.dim})")
    if measure.dim == 1:
        pwl = from_network_1d(net)
        return LossEstimate(l2_loss_vs_target(pwl, measure.target_eval, mu.radius, measure.shortest_period()))

    rng = np.random.default_rng(mu.seed)
    points = _uniform_ball(rng, mu.samples, measure.dim, mu.radius)
    errors = (np.asarray(measure.target_eval(points)) - evaluate_batch(net, points)) ** 2
    return LossEstimate(float(np.mean(errors)), float(np.std(errors, ddof=1) / np.sqrt(mu.samples)))


def measure_loss(net: ReluNetwork, measure: FourierMeasure, mu: LossMeasure) -> float:
    """Значение потери без стандартной ошибки."""
    return estimate_loss(net, measure, mu).value


@dataclass
class AttemptRecord:
    """Результат одной попытки синтеза."""
    index: int
    unit_count: int
    accepted: bool
    loss: Optional[float] = None
    stderr: float = 0.0


@dataclass
class SynthesisReport:
    """Отчет о синтезе сети."""
    seed: int
    depth: int
    smoothness: float
    budget: int
    samples: int
    d0: float
    unit_count: int = 0
    loss: float = float('nan')
    loss_stderr: float = 0.0
    bound: float = float('nan')
    simplified_bound: float = float('nan')
    fallback: bool = False
    attempts: List[AttemptRecord] = field(default_factory=list)
    duration_seconds: Optional[float] = None

    @property
    def accepted_count(self) -> int:
        return sum(1 for attempt in self.attempts if attempt.accepted)

    def to_dict(self) -> Dict:
        """Преобразует отчет в словарь для JSON-записи."""
        return {
            'seed': self.seed,
            'depth': self.depth,
            'K': self.smoothness,
            'budget': self.budget,
            'm': self.samples,
            'd0': self.d0,
            'unit_count': self.unit_count,
            'loss': self.loss,
            'loss_stderr': self.loss_stderr,
            'bound': self.bound,
            'simplified_bound': self.simplified_bound,
            'fallback': self.fallback,
            'attempts': [
                {'index': a.index, 'unit_count': a.unit_count, 'accepted': a.accepted, 'loss': a.loss}
                for a in self.attempts
            ],
            'accepted_attempts': self.accepted_count,
        }


class Synthesizer:
    """Синтез сети по мере Фурье с повторными попытками и контролем бюджета."""

    def __init__(self, config: SynthesisConfig, logger: Optional[Fourier2ReluLogger] = None):
        """
        Инициализация синтезатора.

        Args:
            config: Параметры синтеза
            logger: Логгер (по умолчанию - логгер fourier2relu без настройки обработчиков)
        """
        self.config = config
        self.logger = logger or Fourier2ReluLogger.from_logger()
        self.loss_measure = LossMeasure(config.radius, config.loss_samples, config.seed)

    def _attempt(self, index: int, seed: np.random.SeedSequence, measure: FourierMeasure,
                 samples: int) -> Tuple[AttemptRecord, Optional[ReluNetwork]]:
        rng = np.random.default_rng(seed)
        xis, thetas = measure.sample_nu_batch(samples, rng)
        shifts = rng.random(samples)
        norms = np.linalg.norm(xis, axis=1)

        units = sum(subnet_unit_count(norm, self.config.radius, self.config.depth) for norm in norms)
        if units > self.config.budget:
            return AttemptRecord(index, int(units), False), None

        subnets = [cosine_subnet(xi, theta, s, self.config.radius, self.config.depth)
                   for xi, theta, s in zip(xis, thetas, shifts)]
        net = parallel_merge(subnets, np.full(samples, measure.c0 / samples))
        estimate = estimate_loss(net, measure, self.loss_measure)
        return AttemptRecord(index, unit_count(net), True, estimate.value, estimate.stderr), net

    def synthesize(self, measure: FourierMeasure) -> Tuple[ReluNetwork, SynthesisReport]:
        """
        Синтезирует сеть для меры.

        Returns:
            Tuple[ReluNetwork, SynthesisReport]: Лучшая принятая сеть (или нулевая) и отчет
        """
        config = self.config
        start = time.perf_counter()
        count = choose_sample_count(measure, config)
        self.logger.log_synthesis_start(count.samples, config.depth, config.budget, config.retries)
        if count.may_fallback:
            self.logger.log_warning(f"N₀^(D/K) меньше D₀ = {count.d0:.3f}, возможен переход к нулевой сети")

        seeds = np.random.SeedSequence(config.seed).spawn(config.retries)
        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                outcomes = list(pool.map(
                    lambda item: self._attempt(item[0], item[1], measure, count.samples),
                    enumerate(seeds, start=1),
                ))
        else:
            outcomes = [self._attempt(i, seed, measure, count.samples) for i, seed in enumerate(seeds, start=1)]

        report = SynthesisReport(seed=config.seed, depth=config.depth, smoothness=config.smoothness,
                                 budget=config.budget, samples=count.samples, d0=count.d0)
        best: Optional[ReluNetwork] = None
        for record, net in outcomes:
            report.attempts.append(record)
            self.logger.log_attempt(record.index, record.unit_count, record.accepted, record.loss)
            if record.accepted and (best is None or record.loss < report.loss):
                best = net
                report.loss, report.loss_stderr = record.loss, record.stderr

        if best is None:
            best = zero_net(config.depth, measure.dim)
            report.fallback = True
            estimate = estimate_loss(best, measure, self.loss_measure)
            report.loss, report.loss_stderr = estimate.value, estimate.stderr
        report.unit_count = unit_count(best)

        bounds = theorem1_bounds(config.depth, config.smoothness, config.budget, config.radius,
                                 measure.c0, measure.c_alpha(1.0 / config.smoothness))
        report.bound, report.simplified_bound = bounds.display, bounds.simplified
        report.duration_seconds = time.perf_counter() - start

        self.logger.log_synthesis_end(report.unit_count, report.loss, report.fallback)
        return best, report


def create_synthesizer(config: SynthesisConfig, logger: Optional[Fourier2ReluLogger] = None) -> Synthesizer:
    """Фабричная функция для создания синтезатора."""
    return Synthesizer(config, logger)


def synthesize(measure: FourierMeasure, config: SynthesisConfig,
               logger: Optional[Fourier2ReluLogger] = None) -> Tuple[ReluNetwork, SynthesisReport]:
    """Удобная функция: синтез сети с параметрами из config."""
    return Synthesizer(config, logger).synthesize(measure)
