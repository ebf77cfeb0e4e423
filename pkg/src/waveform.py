"""
Треугольная функция T(t; α, β), треугольная волна T_k и ее реализация одним ReLU-слоем.

Композиция волн умножает частоту: T_l(T_k(t; α, β); a, b) = T_{2kl}(t; a/β, bβ)
при условии αβ = 2al. На этом строятся глубокие косинусные подсети.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

try:
    from .piecewise import PiecewiseLinear
    from .relu_net import LayerSpec, ReluNetwork, compose_scalar_layers
except ImportError:
    from piecewise import PiecewiseLinear
    from relu_net import LayerSpec, ReluNetwork, compose_scalar_layers


COMPOSITION_GRID_POINTS = 10_000
PRECONDITION_TOLERANCE = 1e-12


class WaveformError(ValueError):
    """Исключение для некорректных параметров волны."""
    pass


class CompositionPreconditionError(WaveformError):
    """Нарушено условие αβ = 2al для композиции волн."""
    pass


@dataclass(frozen=True)
class TriangleParams:
    """Параметры волны T_k(·; α, β): полупериод α, наклон β, число пар пиков k."""
    alpha: float
    beta: float
    k: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise WaveformError(f"alpha должно быть положительным: {self.alpha}")
        if not self.beta > 0:
            raise WaveformError(f"beta должно быть положительным: {self.beta}")
        if int(self.k) != self.k or self.k < 1:
            raise WaveformError(f"k должно быть целым >= 1: {self.k}")

    @property
    def peak(self) -> float:
        return self.alpha * self.beta

    @property
    def support(self) -> Tuple[float, float]:
        half = 2.0 * self.k * self.alpha
        return -half, half


def _scalar_or_array(values: np.ndarray, t):
    return float(values) if np.ndim(t) == 0 else values


def triangle_eval(t, alpha: float, beta: float):
    """T(t; α, β): βt на [0, α], 2αβ − βt на (α, 2α], 0 вне [0, 2α]."""
    t_arr = np.asarray(t, dtype=float)
    rising = (t_arr >= 0) & (t_arr <= alpha)
    falling = (t_arr > alpha) & (t_arr <= 2 * alpha)
    values = np.where(rising, beta * t_arr, np.where(falling, 2 * alpha * beta - beta * t_arr, 0.0))
    return _scalar_or_array(values, t)


def waveform_eval(t, params: TriangleParams):
    """
    T_k(t; α, β) = Σ_{m=-k}^{k-1} T(t − 2αm; α, β).

    Треугольники не перекрываются, поэтому в каждой точке вычисляется ровно
    один сдвиг (с номером ⌊t/2α⌋).
    """
    t_arr = np.asarray(t, dtype=float)
    alpha, beta, k = params.alpha, params.beta, params.k
    m = np.floor(t_arr / (2 * alpha))
    inside = (m >= -k) & (m <= k - 1)
    local = np.where(inside, t_arr - 2 * alpha * m, -1.0)
    values = np.asarray(triangle_eval(local, alpha, beta))
    return _scalar_or_array(values, t)


def waveform_breakpoints(params: TriangleParams) -> np.ndarray:
    """Точки излома −2kα + jα, j = 0…4k."""
    return -2 * params.k * params.alpha + params.alpha * np.arange(4 * params.k + 1)


def waveform_layer(params: TriangleParams) -> Tuple[LayerSpec, np.ndarray]:
    """
    Реализует T_k одним слоем из 4k+1 нейронов.

    T_k(t) = Σ_j c_j ReLU(t − b_j) с c_0 = c_4k = β и c_j = 2β(−1)^j
    для остальных j; накопленный наклон чередует +β и −β и замыкается в 0.

    Returns:
        Tuple[LayerSpec, np.ndarray]: Слой с одним входом и его выходной вектор
    """
    thresholds = waveform_breakpoints(params)
    j = np.arange(4 * params.k + 1)
    readout = 2.0 * params.beta * np.where(j % 2 == 0, 1.0, -1.0)
    readout[0] = readout[-1] = params.beta
    weights = np.ones((thresholds.size, 1))
    return LayerSpec(weights, thresholds), readout


def waveform_net(params: TriangleParams) -> ReluNetwork:
    """Однослойная сеть, вычисляющая T_k."""
    layer, readout = waveform_layer(params)
    return ReluNetwork(input_dim=1, layers=(layer,), readout=readout)


def waveform_pwl(params: TriangleParams) -> PiecewiseLinear:
    """Аналитическое кусочно-линейное представление T_k (нули в долинах, αβ в пиках)."""
    breakpoints = waveform_breakpoints(params)
    values = np.where(np.arange(breakpoints.size) % 2 == 1, params.peak, 0.0)
    return PiecewiseLinear(breakpoints, values, 0.0, 0.0)


def composed_params(inner: TriangleParams, outer: TriangleParams) -> TriangleParams:
    """
    Параметры волны, получаемой композицией outer ∘ inner.

    Raises:
        CompositionPreconditionError: Если αβ ≠ 2al
    """
    lhs = inner.alpha * inner.beta
    rhs = 2.0 * outer.alpha * outer.k
    if abs(lhs - rhs) > PRECONDITION_TOLERANCE * max(abs(lhs), abs(rhs)):
        raise CompositionPreconditionError(
            f"Нарушено условие αβ = 2al: αβ={lhs!r}, 2al={rhs!r}"
        )
    return TriangleParams(outer.alpha / inner.beta, outer.beta * inner.beta, 2 * inner.k * outer.k)


def check_composition(kp: TriangleParams, lp: TriangleParams,
                      points: int = COMPOSITION_GRID_POINTS) -> bool:
    """
    Проверяет T_l(T_k(t)) = T_{2kl}(t; a/β, bβ) на сетке [−2kα−1, 2kα+1].

    Raises:
        CompositionPreconditionError: Если αβ ≠ 2al
    """
    target = composed_params(kp, lp)
    lo, hi = kp.support
    grid = np.linspace(lo - 1.0, hi + 1.0, points)
    composed = waveform_eval(waveform_eval(grid, kp), lp)
    expected = waveform_eval(grid, target)
    tolerance = 1e-9 * (1.0 + kp.peak * lp.beta)
    return bool(np.max(np.abs(composed - expected)) <= tolerance)


def waveform_chain_net(chain: Sequence[TriangleParams],
                       direction: Sequence[float] = (1.0,),
                       offset: float = 0.0) -> ReluNetwork:
    """
    Сеть глубины len(chain), вычисляющая T_{l_D} ∘ … ∘ T_{l_1}(⟨direction, x⟩ + offset).

    Выход каждого слоя сворачивается в веса следующего.
    """
    blocks = [waveform_layer(params) for params in chain]
    return compose_scalar_layers(direction, offset, blocks)
