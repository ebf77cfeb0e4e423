"""
Случайные ReLU-оценки синусоид R₄, Γ^sin и Γ^cos_n.

При S ~ Unif[0, 1] оценка Γ^cos_n(t; S, ω) несмещена для cos(ωt) на окне
[−π/ω − 2πn/ω, 2πn/ω + π/ω] и ограничена по модулю π²/4. Здесь же
реализован квадратурный оракул математического ожидания по S.

Математическое ожидание Γ^sin(t; S, ω) равно sin(ωt) на [0, 2π/ω] и 0 вне
этого отрезка. Сама функция R₄(t; S) обращается в 0 вне [0, π/ω].
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

try:
    from .quadrature import integrate_segments
    from .relu_net import LayerSpec, ReluNetwork
except ImportError:
    from quadrature import integrate_segments
    from relu_net import LayerSpec, ReluNetwork


GAMMA_COS_BOUND = np.pi ** 2 / 4
UNITS_PER_SUMMAND = 8
SUMMAND_SIGNS = np.array([1.0, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0])


class SinusoidError(ValueError):
    """Исключение для некорректных параметров оценки."""
    pass


@dataclass(frozen=True)
class SinusoidEstimatorParams:
    """Параметры оценки Γ^cos_n: частота ω, число повторенных периодов n, случайный сдвиг s."""
    omega: float
    n: int
    s: float

    def __post_init__(self):
        if not self.omega > 0:
            raise SinusoidError(f"omega должно быть положительным: {self.omega}")
        if int(self.n) != self.n or self.n < 0:
            raise SinusoidError(f"n должно быть неотрицательным целым: {self.n}")
        if not 0.0 <= self.s <= 1.0:
            raise SinusoidError(f"s должно лежать в [0, 1]: {self.s}")

    @property
    def unit_count(self) -> int:
        return 16 * self.n + 16


def _relu(x):
    return np.maximum(x, 0.0)


def _shape(values, *inputs):
    return float(values) if all(np.ndim(v) == 0 for v in inputs) else values


def r4_eval(t, s, omega: float):
    """R₄(t; s) = ReLU(t) + ReLU(t − π/ω) − ReLU(t − πs/ω) − ReLU(t − π(1−s)/ω)."""
    t_arr = np.asarray(t, dtype=float)
    s_arr = np.asarray(s, dtype=float)
    h = np.pi / omega
    values = _relu(t_arr) + _relu(t_arr - h) - _relu(t_arr - h * s_arr) - _relu(t_arr - h * (1.0 - s_arr))
    return _shape(values, t, s)


def gamma_sin_eval(t, s, omega: float):
    """Γ^sin(t; s, ω) = (πω/2)·sin(πs)·[R₄(t; s) − R₄(t − π/ω; s)]."""
    t_arr = np.asarray(t, dtype=float)
    s_arr = np.asarray(s, dtype=float)
    amplitude = 0.5 * np.pi * omega * np.sin(np.pi * s_arr)
    values = amplitude * (r4_eval(t_arr, s_arr, omega) - r4_eval(t_arr - np.pi / omega, s_arr, omega))
    return _shape(values, t, s)


def summand_shifts(omega: float, n: int) -> np.ndarray:
    """Сдвиги c_i = 2πi/ω − π/(2ω) для i = −n−1…n."""
    i = np.arange(-n - 1, n + 1)
    return 2.0 * np.pi * i / omega - np.pi / (2.0 * omega)


def gamma_cos_eval(t, s, omega: float, n: int):
    """Γ^cos_n(t; s, ω) = Σ_{i=−n−1}^{n} Γ^sin(t − 2πi/ω + π/(2ω); s, ω)."""
    t_arr = np.asarray(t, dtype=float)
    s_arr = np.asarray(s, dtype=float)
    total = np.zeros(np.broadcast(t_arr, s_arr).shape)
    for shift in summand_shifts(omega, n):
        total = total + gamma_sin_eval(t_arr - shift, s_arr, omega)
    return _shape(total, t, s)


def gamma_cos_layer_params(s, omega: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Пороги и выходные коэффициенты слоя Γ^cos_n для набора значений s.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Массивы формы (len(s), 16n+16)
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))[:, None]
    h = np.pi / omega
    zero = np.zeros_like(s)
    offsets = np.hstack([zero, zero + h, h * s, h * (1.0 - s),
                         zero + h, zero + 2.0 * h, h + h * s, h + h * (1.0 - s)])
    amplitude = 0.5 * np.pi * omega * np.sin(np.pi * s)

    shifts = summand_shifts(omega, n)
    thresholds = (shifts[None, :, None] + offsets[:, None, :]).reshape(s.shape[0], -1)
    readout = np.tile(amplitude * SUMMAND_SIGNS[None, :], (1, 2 * n + 2))
    return thresholds, readout


def gamma_cos_layer(s: float, omega: float, n: int) -> Tuple[LayerSpec, np.ndarray]:
    """
    Реализует Γ^cos_n(·; s, ω) одним слоем из 16n+16 нейронов.

    Каждое слагаемое Γ^sin дает 8 нейронов: четыре излома R₄ и четыре излома
    сдвинутой на π/ω копии. Общие нейроны соседних слагаемых не объединяются.

    Returns:
        Tuple[LayerSpec, np.ndarray]: Слой с одним входом и его выходной вектор
    """
    params = SinusoidEstimatorParams(omega, n, s)
    thresholds, readout = gamma_cos_layer_params(s, omega, n)
    weights = np.ones((params.unit_count, 1))
    return LayerSpec(weights, thresholds[0]), readout[0]


def gamma_cos_net(s: float, omega: float, n: int) -> ReluNetwork:
    """Однослойная сеть, вычисляющая Γ^cos_n."""
    layer, readout = gamma_cos_layer(s, omega, n)
    return ReluNetwork(input_dim=1, layers=(layer,), readout=readout)


def validity_window(omega: float, n: int) -> Tuple[float, float]:
    """Окно несмещенности [−π/ω − 2πn/ω, 2πn/ω + π/ω]."""
    half = 2.0 * np.pi * n / omega + np.pi / omega
    return -half, half


def s_breakpoints(u, omega: float) -> np.ndarray:
    """
    Изломы по s функции Γ^sin(u; s, ω) при фиксированных аргументах u.

    Для v ∈ {u, u − π/ω} излом возникает при πs/ω = v и при π(1−s)/ω = v.
    Возвращаются только точки внутри (0, 1).
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.concatenate([u, u - np.pi / omega])
    ratio = omega * v / np.pi
    points = np.concatenate([ratio, 1.0 - ratio])
    return np.unique(points[(points > 0.0) & (points < 1.0)])


def expectation_edges(t: float, omega: float, n: int) -> np.ndarray:
    """Разбиение [0, 1] по всем s-изломам слагаемых Γ^cos_n в точке t."""
    inner = s_breakpoints(t - summand_shifts(omega, n), omega)
    return np.unique(np.concatenate([[0.0], inner, [1.0]]))


def expectation_oracle(t: float, omega: float, n: int) -> float:
    """
    Вычисляет ∫₀¹ Γ^cos_n(t; s, ω) ds.

    Интеграл делится во всех изломах по s, на каждом куске применяется правило
    Гаусса-Лежандра порядка 10, поэтому изломы не портят точность.
    """
    edges = expectation_edges(t, omega, n)
    return integrate_segments(lambda s: gamma_cos_eval(t, s, omega, n), edges)


def monte_carlo_expectation(t: float, omega: float, n: int, draws: int,
                            seed: int, chunks: int = 8) -> Tuple[float, float]:
    """
    Оценка E Γ^cos_n(t; S, ω) методом Монте-Карло.

    Выборка делится на блоки с независимыми потоками, порожденными от seed;
    блоки складываются в фиксированном порядке.

    Returns:
        Tuple[float, float]: Среднее и его стандартная ошибка
    """
    streams = np.random.SeedSequence(seed).spawn(chunks)
    sizes = np.full(chunks, draws // chunks)
    sizes[: draws % chunks] += 1
    total = total_sq = 0.0
    for stream, size in zip(streams, sizes):
        samples = gamma_cos_eval(t, np.random.default_rng(stream).random(size), omega, n)
        total += float(np.sum(samples))
        total_sq += float(np.sum(samples ** 2))
    mean = total / draws
    variance = max(total_sq / draws - mean ** 2, 0.0)
    return mean, float(np.sqrt(variance / draws))
