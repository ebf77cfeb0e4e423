"""
Модель целевых функций через меры Фурье.

Цель задается как f(x) = C_f⁰ · E_{ξ∼ν_f} cos(⟨ξ, x⟩ + θ(ξ)). Поддерживаются
два вида мер: конечный список атомов (ξ, вес, фаза) и радиальная плотность
с постоянной фазой (гауссиана). Веса атомов хранятся уже нормированными,
так что C_f⁰ равно сумме весов.
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gammaln

try:
    from .config_loader import MeasureConfig
    from .logger import get_logger
except ImportError:
    from config_loader import MeasureConfig
    from logger import get_logger


GAUSSIAN_PERIOD = 2.0 * np.pi


class MeasureError(ValueError):
    """Исключение для некорректных мер Фурье."""
    pass


class UnsupportedOperationError(MeasureError):
    """Операция не поддерживается для данного вида меры."""
    pass


@dataclass(frozen=True, eq=False)
class FourierAtom:
    """Атом меры: частота ξ, нормированный вес и фаза θ ∈ [−π, π]."""
    xi: np.ndarray
    weight: float
    phase: float = 0.0

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float, ndmin=1)
        xi.setflags(write=False)
        if xi.ndim != 1:
            raise MeasureError("Частота атома должна быть вектором")
        if not self.weight > 0:
            raise MeasureError(f"Вес атома должен быть положительным: {self.weight}")
        if not -np.pi <= self.phase <= np.pi:
            raise MeasureError(f"Фаза атома должна лежать в [-π, π]: {self.phase}")
        object.__setattr__(self, 'xi', xi)
        object.__setattr__(self, 'weight', float(self.weight))
        object.__setattr__(self, 'phase', float(self.phase))


class FourierMeasure:
    """Общий интерфейс мер Фурье."""

    dim: int

    def c_alpha(self, alpha: float) -> float:
        raise NotImplementedError

    def target_eval(self, x):
        raise NotImplementedError

    def sample_nu_batch(self, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def shortest_period(self) -> float:
        raise NotImplementedError

    def sample_nu(self, rng: np.random.Generator) -> Tuple[np.ndarray, float]:
        """Одна выборка (ξ, θ) из ν_f."""
        xi, theta = self.sample_nu_batch(1, rng)
        return xi[0], float(theta[0])

    @property
    def c0(self) -> float:
        return self.c_alpha(0.0)

    def norm_combo(self, smoothness: float, radius: float) -> float:
        """r^{1/K}·C_f^{1/K}·C_f⁰ + (C_f⁰)²."""
        c0 = self.c0
        return radius ** (1.0 / smoothness) * self.c_alpha(1.0 / smoothness) * c0 + c0 ** 2

    def _points(self, x) -> Tuple[np.ndarray, bool]:
        points = np.asarray(x, dtype=float)
        single = points.ndim <= 1 and (self.dim > 1 or points.ndim == 0)
        if self.dim == 1 and points.ndim <= 1:
            points = points.reshape(-1, 1)
        else:
            points = np.atleast_2d(points)
        if points.shape[1] != self.dim:
            raise MeasureError(f"Ожидались точки размерности {self.dim}, получено {points.shape}")
        return points, single


class AtomMeasure(FourierMeasure):
    """Мера из конечного числа атомов."""

    def __init__(self, atoms: Sequence[FourierAtom]):
        atoms = list(atoms)
        if not atoms:
            raise MeasureError("Список атомов пуст")
        dims = {atom.xi.shape[0] for atom in atoms}
        if len(dims) != 1:
            raise MeasureError(f"Атомы имеют разные размерности: {sorted(dims)}")
        self.atoms = tuple(atoms)
        self.dim = dims.pop()
        self.frequencies = np.array([atom.xi for atom in atoms])
        self.weights = np.array([atom.weight for atom in atoms])
        self.phases = np.array([atom.phase for atom in atoms])
        self.frequencies.setflags(write=False)
        self.weights.setflags(write=False)
        self.phases.setflags(write=False)

    def c_alpha(self, alpha: float) -> float:
        """C_f^α = Σ weight_i·‖ξ_i‖^α (при α = 0 просто сумма весов)."""
        if alpha < 0:
            raise MeasureError(f"Показатель α должен быть неотрицательным: {alpha}")
        if alpha == 0:
            return float(np.sum(self.weights))
        norms = np.linalg.norm(self.frequencies, axis=1)
        return float(np.sum(self.weights * norms ** alpha))

    def target_eval(self, x):
        """f(x) = Σ weight_i·cos(⟨ξ_i, x⟩ + θ_i)."""
        points, single = self._points(x)
        values = np.cos(points @ self.frequencies.T + self.phases) @ self.weights
        return float(values[0]) if single else values

    def sample_nu_batch(self, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        index = rng.choice(len(self.atoms), size=count, p=self.weights / np.sum(self.weights))
        return self.frequencies[index].copy(), self.phases[index].copy()

    def shortest_period(self) -> float:
        largest = float(np.max(np.linalg.norm(self.frequencies, axis=1)))
        return 2.0 * np.pi / largest if largest > 0 else np.inf


@dataclass(frozen=True, eq=False)
class RadialDensityMeasure(FourierMeasure):
    """
    Радиальная плотность |F(ξ)| = F(‖ξ‖) с постоянной фазой.

    Args:
        dim: Размерность d
        family: Имя семейства (для отчетов)
        log_radial_weight: log от (2π)^{-d}·|S^{d-1}|·ρ^{d-1}·F(ρ)
        radius_sampler: Выборка радиусов ‖ξ‖ под ν_f
        phase: Постоянная фаза θ
        closed_form_c_alpha: Аналитическое C_f^α (если известно)
        closed_form_target: Аналитическое f(x) (если известно)
        period: Характерный период для квадратурного разбиения
    """
    dim: int
    family: str
    log_radial_weight: Callable[[float], float]
    radius_sampler: Callable[[np.random.Generator, int], np.ndarray]
    phase: float = 0.0
    closed_form_c_alpha: Optional[Callable[[float], float]] = None
    closed_form_target: Optional[Callable[[np.ndarray], np.ndarray]] = None
    period: float = GAUSSIAN_PERIOD

    def integral_c_alpha(self, alpha: float) -> float:
        """
        C_f^α через адаптивное радиальное интегрирование.

        Returns:
            float: Значение нормы или inf, если интеграл расходится
        """
        def integrand(rho: float) -> float:
            if rho <= 0:
                return 0.0
            return float(np.exp(self.log_radial_weight(rho) + alpha * np.log(rho)))

        value, error = integrate.quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
        if not np.isfinite(value) or error > 1e-6 * abs(value):
            get_logger().warning(
                f"⚠️ Радиальный интеграл C^{alpha} для '{self.family}' не сошелся: {value} ± {error}"
            )
            return float('inf')
        return float(value)

    def c_alpha(self, alpha: float) -> float:
        if alpha < 0:
            raise MeasureError(f"Показатель α должен быть неотрицательным: {alpha}")
        if self.closed_form_c_alpha is not None:
            return float(self.closed_form_c_alpha(alpha))
        return self.integral_c_alpha(alpha)

    def target_eval(self, x):
        if self.closed_form_target is None:
            raise UnsupportedOperationError(
                f"Для плотности '{self.family}' нет замкнутой формы целевой функции"
            )
        points, single = self._points(x)
        values = np.asarray(self.closed_form_target(points), dtype=float)
        return float(values[0]) if single else values

    def sample_nu_batch(self, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """Радиус из радиального закона, направление равномерно на сфере."""
        radii = np.asarray(self.radius_sampler(rng, count), dtype=float)
        directions = rng.standard_normal((count, self.dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        return radii[:, None] * directions, np.full(count, self.phase)

    def shortest_period(self) -> float:
        return self.period

    def cross_check(self, rng: np.random.Generator, samples: int, alpha: float) -> float:
        """
        Согласованность выборки и интегратора: z-оценка отклонения
        эмпирического среднего ‖ξ‖^α от C_f^α / C_f⁰.
        """
        xi, _ = self.sample_nu_batch(samples, rng)
        moments = np.linalg.norm(xi, axis=1) ** alpha
        expected = self.integral_c_alpha(alpha) / self.integral_c_alpha(0.0)
        stderr = np.std(moments, ddof=1) / np.sqrt(samples)
        return float((np.mean(moments) - expected) / stderr)


def gaussian_measure(dim: int) -> RadialDensityMeasure:
    """
    Мера гауссианы f(x) = exp(−‖x‖²/2), F(ξ) = (2π)^{d/2}·exp(−‖ξ‖²/2).

    ν_f - стандартное нормальное распределение, поэтому C_f⁰ = 1, а C_f^α
    равно моменту χ-распределения: 2^{α/2}·Γ((d+α)/2)/Γ(d/2).
    """
    if dim < 1:
        raise MeasureError(f"Размерность должна быть >= 1: {dim}")
    log_norm = (1.0 - dim / 2.0) * np.log(2.0) - gammaln(dim / 2.0)

    def log_radial_weight(rho: float) -> float:
        return log_norm + (dim - 1) * np.log(rho) - 0.5 * rho * rho

    def chi_moment(alpha: float) -> float:
        return float(np.exp(0.5 * alpha * np.log(2.0) + gammaln((dim + alpha) / 2.0) - gammaln(dim / 2.0)))

    def radius_sampler(rng: np.random.Generator, count: int) -> np.ndarray:
        return np.sqrt(rng.chisquare(dim, size=count))

    def target(points: np.ndarray) -> np.ndarray:
        return np.exp(-0.5 * np.sum(points * points, axis=1))

    return RadialDensityMeasure(
        dim=dim,
        family='gaussian',
        log_radial_weight=log_radial_weight,
        radius_sampler=radius_sampler,
        closed_form_c_alpha=chi_moment,
        closed_form_target=target,
    )


def hard_instance(smoothness: float, radius: float, oscillations: int) -> AtomMeasure:
    """
    Трудный пример f(x) = (1 + cos(ωx/r)) / (2ω^a), ω = 2πL, a = 1/(2K).

    Три атома с весами 1/(2ω^a) в нуле и 1/(4ω^a) в ±ω/r; C_f⁰ = ω^{−a}.
    """
    if smoothness < 1 or radius <= 0 or oscillations < 1:
        raise MeasureError(
            f"Некорректные параметры трудного примера: K={smoothness}, r={radius}, L={oscillations}"
        )
    omega = 2.0 * np.pi * oscillations
    scale = omega ** (-1.0 / (2.0 * smoothness))
    frequency = omega / radius
    return AtomMeasure([
        FourierAtom([0.0], scale / 2.0, 0.0),
        FourierAtom([frequency], scale / 4.0, 0.0),
        FourierAtom([-frequency], scale / 4.0, 0.0),
    ])


def scaled_cosine_measure(frequency: float, exponent: float) -> AtomMeasure:
    """Мера функции cos(n·x)/n^a: атомы ±n с весами 1/(2n^a)."""
    if frequency <= 0:
        raise MeasureError(f"Частота должна быть положительной: {frequency}")
    weight = 0.5 * frequency ** (-exponent)
    return AtomMeasure([FourierAtom([frequency], weight), FourierAtom([-frequency], weight)])


def atom_measure(atoms: Sequence[Sequence]) -> AtomMeasure:
    """
    Строит меру из списка троек (xi, weight, phase).

    Raises:
        MeasureError: Если запись атома некорректна
    """
    parsed: List[FourierAtom] = []
    for index, entry in enumerate(atoms):
        if not isinstance(entry, (list, tuple)) or len(entry) not in (2, 3):
            raise MeasureError(f"Атом #{index} должен иметь вид [xi, weight, phase]: {entry!r}")
        xi, weight = entry[0], entry[1]
        phase = entry[2] if len(entry) == 3 else 0.0
        try:
            parsed.append(FourierAtom(np.atleast_1d(np.asarray(xi, dtype=float)), float(weight), float(phase)))
        except MeasureError:
            raise
        except (TypeError, ValueError) as e:
            raise MeasureError(f"Атом #{index} содержит нечисловые значения: {e}")
    return AtomMeasure(parsed)


def measure_from_config(config: MeasureConfig) -> FourierMeasure:
    """Создает меру по секции [measure] конфигурации."""
    if config.kind == 'hard_instance':
        return hard_instance(config.smoothness, config.radius, config.oscillations)
    if config.kind == 'gaussian':
        return gaussian_measure(config.dim)
    if config.kind == 'scaled_cosine':
        return scaled_cosine_measure(config.frequency, config.exponent)
    if config.kind == 'atoms':
        return atom_measure(config.atoms)
    raise MeasureError(f"Неизвестный вид меры: {config.kind}")
