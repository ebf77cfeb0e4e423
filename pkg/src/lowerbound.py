"""
Нижние оценки потери на трудном примере через число пересечений.

Если сеть пересекает уровень 1/(2ω^a) меньше 2L раз, то на отрезках без
пересечений она не успевает за колебаниями цели, и потеря ограничена снизу.
Число пересечений сети глубины D с N₀ нейронами не превосходит 2(2N₀/D)^D.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np

try:
    from .fourier import FourierMeasure, hard_instance
    from .logger import Fourier2ReluLogger
    from .piecewise import crossing_number, from_network_1d, l2_loss_vs_target, telgarsky_bound
    from .relu_net import LayerSpec, ReluNetwork, compose_scalar_layers, save_network, unit_count
except ImportError:
    from fourier import FourierMeasure, hard_instance
    from logger import Fourier2ReluLogger
    from piecewise import crossing_number, from_network_1d, l2_loss_vs_target, telgarsky_bound
    from relu_net import LayerSpec, ReluNetwork, compose_scalar_layers, save_network, unit_count


LOSS_TOLERANCE = 1e-10
FLOOR_TOLERANCE = 1e-6
ADVERSARIAL_PIECES = 20


class LowerBoundError(Exception):
    """Исключение для ошибок проверки нижних оценок."""
    pass


@dataclass(frozen=True)
class Theorem2Floor:
    """Нижняя граница для бюджета N₀: из итоговой цепочки и без лишнего множителя π."""
    stated: float
    rigorous: float
    b0: float


@dataclass
class LowerBoundReport:
    """Результат проверки нижней оценки для одной сети."""
    crossing: int
    L: int
    alpha: float
    measured_loss: float
    lemma5_floor: float
    theorem2_floor: float
    satisfied: Tuple[bool, bool]
    theorem2_rigorous: float = 0.0
    unit_count: int = 0
    depth: int = 0
    theorem2_applicable: bool = False

    def to_dict(self) -> dict:
        return {
            'crossing': self.crossing,
            'L': self.L,
            'alpha': self.alpha,
            'measured_loss': self.measured_loss,
            'lemma5_floor': self.lemma5_floor,
            'theorem2_floor': self.theorem2_floor,
            'theorem2_rigorous': self.theorem2_rigorous,
            'satisfied': list(self.satisfied),
            'unit_count': self.unit_count,
            'depth': self.depth,
            'theorem2_applicable': self.theorem2_applicable,
        }


def lemma5_floor(crossing: int, oscillations: int, alpha: float) -> float:
    """
    (π/16)·(2L − Cr)/ω^{2a+1} при Cr < 2L и 0 иначе (ω = 2πL).
    """
    if oscillations < 1:
        raise LowerBoundError(f"L должно быть >= 1: {oscillations}")
    if crossing >= 2 * oscillations:
        return 0.0
    omega = 2.0 * np.pi * oscillations
    return float(np.pi / 16.0 * (2 * oscillations - crossing) / omega ** (2.0 * alpha + 1.0))


def theorem2_floor(budget: int, depth: int, smoothness: float, radius: float,
                   measure: FourierMeasure) -> Theorem2Floor:
    """
    Граница πD^{D/K}/(32(6π)^{1/K}(2N₀)^{D/K}) и соответствующая константа B₀.

    Из леммы о пересечениях строго следует только 1/(32ω^{2a}), поэтому
    rigorous - та же граница без множителя π.
    """
    rate = depth / smoothness
    stated = np.pi * depth ** rate / (32.0 * (6.0 * np.pi) ** (1.0 / smoothness) * (2.0 * budget) ** rate)
    combo = measure.norm_combo(smoothness, radius)
    b0 = stated / (combo * (depth / budget) ** rate)
    return Theorem2Floor(stated=float(stated), rigorous=float(stated / np.pi), b0=float(b0))


def theorem2_regime(oscillations: int, budget: int, depth: int) -> bool:
    """
    Попадает ли L в режим итоговой цепочки: 2(2N₀/D)^D ≤ L ≤ 3(2N₀/D)^D.
    """
    base = (2.0 * budget / depth) ** depth
    return bool(telgarsky_bound(budget, depth) <= oscillations <= 3.0 * base)


def hard_instance_target(smoothness: float, radius: float,
                         oscillations: int) -> Tuple[Callable[[np.ndarray], np.ndarray], float]:
    """Векторизованная цель трудного примера и ее кратчайший период."""
    measure = hard_instance(smoothness, radius, oscillations)
    return measure.target_eval, measure.shortest_period()


def verify_lemma5(net: ReluNetwork, smoothness: float, radius: float, oscillations: int) -> LowerBoundReport:
    """
    Считает Cr(ω^a f̂) (как Cr(f̂) на уровне 1/(2ω^a)), точную потерю и обе границы.

    Raises:
        LowerBoundError: Если сеть не одномерна
    """
    if net.input_dim != 1:
        raise LowerBoundError("Нижняя оценка проверяется только для сетей с одним входом")
    measure = hard_instance(smoothness, radius, oscillations)
    alpha = 1.0 / (2.0 * smoothness)
    omega = 2.0 * np.pi * oscillations

    pwl = from_network_1d(net)
    crossing = crossing_number(pwl, 1.0 / (2.0 * omega ** alpha))
    loss = l2_loss_vs_target(pwl, measure.target_eval, radius, measure.shortest_period())
    floor = lemma5_floor(crossing, oscillations, alpha)

    units = unit_count(net)
    second = theorem2_floor(units, net.depth, smoothness, radius, measure)
    applicable = theorem2_regime(oscillations, units, net.depth)
    satisfied = (
        bool(loss >= floor - LOSS_TOLERANCE),
        bool(not applicable or loss >= second.rigorous * (1.0 - FLOOR_TOLERANCE)),
    )
    return LowerBoundReport(
        crossing=crossing, L=oscillations, alpha=alpha, measured_loss=loss,
        lemma5_floor=floor, theorem2_floor=second.stated, theorem2_rigorous=second.rigorous,
        satisfied=satisfied,
        unit_count=units, depth=net.depth, theorem2_applicable=applicable,
    )


def sawtooth_layer(pieces: int) -> Tuple[LayerSpec, np.ndarray]:
    """
    Зигзаг из pieces отрезков, отображающий [0, 1] на [0, 1] и постоянный вне [0, 1].

    Реализуется pieces+1 нейронами: наклоны ±pieces чередуются и гасятся в t = 1.
    """
    if pieces < 1:
        raise LowerBoundError(f"Число отрезков должно быть >= 1: {pieces}")
    i = np.arange(pieces + 1)
    readout = 2.0 * pieces * np.where(i % 2 == 0, 1.0, -1.0)
    readout[0] = pieces
    readout[-1] = pieces * (-1.0) ** pieces
    return LayerSpec(np.ones((pieces + 1, 1)), i / pieces), readout


def sawtooth_net(depth: int, pieces: int = ADVERSARIAL_PIECES) -> ReluNetwork:
    """Композиция depth зигзагов: pieces^D монотонных кусков, pieces^D + 1 интервалов на уровне 1/2."""
    return compose_scalar_layers([1.0], 0.0, [sawtooth_layer(pieces) for _ in range(depth)])


def random_net(rng: np.random.Generator, units: int, depth: int) -> ReluNetwork:
    """
    Случайная сеть с одним входом: units нейронов в depth слоях,
    веса, пороги и выход из распределения Стьюдента с 2 степенями свободы.
    """
    if units < depth:
        raise LowerBoundError(f"Нейронов ({units}) меньше, чем слоев ({depth})")
    widths = 1 + rng.multinomial(units - depth, np.full(depth, 1.0 / depth))
    layers = []
    previous = 1
    for width in widths:
        layers.append(LayerSpec(rng.standard_t(2, size=(width, previous)), rng.standard_t(2, size=width)))
        previous = width
    return ReluNetwork(input_dim=1, layers=tuple(layers), readout=rng.standard_t(2, size=previous))


@dataclass
class CrossingSweepReport:
    """Итоги проверки оценки числа пересечений."""
    depth: int
    units: int
    trials: int
    max_ratio: float = 0.0
    adversarial_ratio: float = 0.0
    violations: List[Path] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            'depth': self.depth,
            'units': self.units,
            'trials': self.trials,
            'max_ratio': self.max_ratio,
            'adversarial_ratio': self.adversarial_ratio,
            'violations': [str(path) for path in self.violations],
        }


def crossing_ratio(net: ReluNetwork, level: float = 0.5) -> float:
    """Отношение числа пересечений к оценке 2(2N₀/D)^D для этой сети."""
    crossing = crossing_number(from_network_1d(net), level)
    return crossing / telgarsky_bound(unit_count(net), net.depth)


def crossing_bound_sweep(depth: int, units: int, trials: int, rng: np.random.Generator,
                         counterexample_dir: Optional[Path] = None,
                         logger: Optional[Fourier2ReluLogger] = None,
                         pieces: int = ADVERSARIAL_PIECES) -> CrossingSweepReport:
    """
    Проверяет Cr ≤ 2(2N₀/D)^D на trials случайных сетях и на зигзаг-композиции.

    Сети, нарушившие оценку, записываются в counterexample_dir.
    """
    if trials < 1:
        raise LowerBoundError(f"Число испытаний должно быть >= 1: {trials}")
    logger = logger or Fourier2ReluLogger.from_logger()
    report = CrossingSweepReport(depth=depth, units=units, trials=trials)

    def record(net: ReluNetwork, name: str) -> float:
        ratio = crossing_ratio(net)
        if ratio > 1.0:
            path = None
            if counterexample_dir is not None:
                path = save_network(net, Path(counterexample_dir) / f"{name}.json")
                logger.log_file_operation('write', path)
            report.violations.append(path or Path(name))
            logger.log_check_result('lowerbound', 'crossing-bound', False, f"{name}: отношение {ratio:.3f}")
        return ratio

    for index in range(trials):
        ratio = record(random_net(rng, units, depth), f"random_D{depth}_N{units}_{index}")
        report.max_ratio = max(report.max_ratio, ratio)

    adversarial = sawtooth_net(depth, pieces)
    report.adversarial_ratio = record(adversarial, f"sawtooth_D{depth}_P{pieces}")
    report.max_ratio = max(report.max_ratio, report.adversarial_ratio)
    return report
