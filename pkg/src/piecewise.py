"""
Точное кусочно-линейное представление выхода одномерной ReLU-сети.

Поддерживает вычисление числа пересечений уровня (crossing number),
квадратичную потерю относительно гладкой цели по квадратурам Гаусса-Лежандра
и выгрузку точек излома в CSV.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

try:
    from .quadrature import integrate_segments, refine_edges
    from .relu_net import ReluNetwork
except ImportError:
    from quadrature import integrate_segments, refine_edges
    from relu_net import ReluNetwork


SLOPE_TOLERANCE = 1e-12
KNOT_TOLERANCE = 1e-13
SEGMENTS_PER_PERIOD = 10


class PiecewiseError(Exception):
    """Исключение для ошибок кусочно-линейного анализа."""
    pass


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    """
    Непрерывная кусочно-линейная функция на ℝ.

    Задается точками излома x₁<…<x_m, значениями в них и наклонами хвостов.
    Без точек излома функция линейна: base_value + left_slope·t.
    """
    breakpoints: np.ndarray
    values: np.ndarray
    left_slope: float
    right_slope: float
    base_value: float = 0.0

    def __post_init__(self):
        breakpoints = np.array(self.breakpoints, dtype=float, ndmin=1)
        values = np.array(self.values, dtype=float, ndmin=1)
        if breakpoints.shape != values.shape or breakpoints.ndim != 1:
            raise PiecewiseError("Число значений не совпадает с числом точек излома")
        if not (np.all(np.isfinite(breakpoints)) and np.all(np.isfinite(values))):
            raise PiecewiseError("Точки излома и значения должны быть конечными")
        if np.any(np.diff(breakpoints) <= 0):
            raise PiecewiseError("Точки излома должны строго возрастать")
        if breakpoints.size == 0 and self.left_slope != self.right_slope:
            raise PiecewiseError("Функция без изломов не может менять наклон")
        breakpoints.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, 'breakpoints', breakpoints)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'left_slope', float(self.left_slope))
        object.__setattr__(self, 'right_slope', float(self.right_slope))
        object.__setattr__(self, 'base_value', float(self.base_value))

    @classmethod
    def canonical(cls, breakpoints: np.ndarray, values: np.ndarray,
                  left_slope: float, right_slope: float) -> 'PiecewiseLinear':
        """Строит каноническую форму: без совпадающих точек и без изломов с равными наклонами."""
        x = np.asarray(breakpoints, dtype=float)
        v = np.asarray(values, dtype=float)[:, None]
        x, v = _merge_close(x, v)
        x, v = _drop_collinear(x, v, np.array([left_slope]), np.array([right_slope]), keep_one=False)
        if x.size == 0:
            base = float(values[0] - left_slope * breakpoints[0]) if len(breakpoints) else 0.0
            return cls(x, v[:, 0], left_slope, left_slope, base)
        return cls(x, v[:, 0], left_slope, right_slope)

    @classmethod
    def constant(cls, value: float) -> 'PiecewiseLinear':
        return cls(np.empty(0), np.empty(0), 0.0, 0.0, value)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        x, v = self.breakpoints, self.values
        if x.size == 0:
            result = self.base_value + self.left_slope * t
        else:
            result = np.interp(t, x, v)
            result = np.where(t < x[0], v[0] + self.left_slope * (t - x[0]), result)
            result = np.where(t > x[-1], v[-1] + self.right_slope * (t - x[-1]), result)
        return float(result) if result.ndim == 0 else result

    def scaled(self, factor: float) -> 'PiecewiseLinear':
        return PiecewiseLinear(self.breakpoints, self.values * factor, self.left_slope * factor,
                               self.right_slope * factor, self.base_value * factor)

    @staticmethod
    def combine(pieces: Sequence['PiecewiseLinear'],
                coeffs: Optional[Sequence[float]] = None) -> 'PiecewiseLinear':
        """Линейная комбинация Σ c_j·p_j на объединении точек излома."""
        pieces = list(pieces)
        if coeffs is None:
            coeffs = np.ones(len(pieces))
        if not pieces:
            return PiecewiseLinear.constant(0.0)
        knots = np.unique(np.concatenate([p.breakpoints for p in pieces]))
        left = float(sum(c * p.left_slope for c, p in zip(coeffs, pieces)))
        right = float(sum(c * p.right_slope for c, p in zip(coeffs, pieces)))
        if knots.size == 0:
            base = float(sum(c * p.base_value for c, p in zip(coeffs, pieces)))
            return PiecewiseLinear(knots, knots, left, right, base)
        values = np.sum([c * p(knots) for c, p in zip(coeffs, pieces)], axis=0)
        return PiecewiseLinear.canonical(knots, values, left, right)


def _merge_close(x: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if x.size < 2:
        return x, values
    keep = np.concatenate([[True], np.diff(x) > KNOT_TOLERANCE * np.maximum(1.0, np.abs(x[1:]))])
    return x[keep], values[keep]


def _drop_collinear(x: np.ndarray, values: np.ndarray, left: np.ndarray, right: np.ndarray,
                    keep_one: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Удаляет узлы, в которых ни один столбец не меняет наклон."""
    if x.size == 0:
        return x, values
    inner = np.diff(values, axis=0) / np.diff(x)[:, None]
    slopes = np.vstack([left[None, :], inner, right[None, :]])
    before, after = slopes[:-1], slopes[1:]
    scale = np.maximum(1.0, np.maximum(np.abs(before), np.abs(after)))
    redundant = np.all(np.abs(after - before) <= SLOPE_TOLERANCE * scale, axis=1)
    if keep_one and np.all(redundant):
        redundant[0] = False
    return x[~redundant], values[~redundant]


def _interp_columns(x: np.ndarray, values: np.ndarray, left: np.ndarray, right: np.ndarray,
                    query: np.ndarray) -> np.ndarray:
    """Вычисляет набор кусочно-линейных столбцов с общими узлами в точках query."""
    out = np.empty((query.size, values.shape[1]))
    below = query < x[0]
    above = query > x[-1]
    inside = ~(below | above)
    out[below] = values[0] + (query[below] - x[0])[:, None] * left
    out[above] = values[-1] + (query[above] - x[-1])[:, None] * right
    if x.size == 1:
        out[inside] = values[0]
    else:
        q = query[inside]
        i = np.clip(np.searchsorted(x, q, side='right') - 1, 0, x.size - 2)
        w = ((q - x[i]) / (x[i + 1] - x[i]))[:, None]
        out[inside] = values[i] * (1.0 - w) + values[i + 1] * w
    return out


def _zero_crossings(x: np.ndarray, z: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Точки, где хотя бы одна предактивация меняет знак."""
    found = []
    if x.size > 1:
        za, zb = z[:-1], z[1:]
        seg, col = np.nonzero(za * zb < 0)
        if seg.size:
            fa, fb = za[seg, col], zb[seg, col]
            found.append(x[seg] + (x[seg + 1] - x[seg]) * fa / (fa - fb))
    with np.errstate(divide='ignore', invalid='ignore'):
        shift_left = z[0] / left
        shift_right = z[-1] / right
    mask = (left != 0) & (shift_left > 0)
    found.append(x[0] - shift_left[mask])
    mask = (right != 0) & (shift_right < 0)
    found.append(x[-1] - shift_right[mask])
    return np.concatenate(found)


def _propagate(layers: List[Tuple[np.ndarray, np.ndarray]], readout: np.ndarray,
               first_layer_input: bool) -> PiecewiseLinear:
    """Проталкивает общий набор узлов через слои одной связной компоненты сети."""
    x = np.array([0.0])
    if first_layer_input:
        h = np.zeros((1, 1))
        left = right = np.ones(1)
    else:
        h = np.zeros((1, 0))
        left = right = np.zeros(0)

    for weights, thresholds in layers:
        z = h @ weights.T - thresholds
        z_left = left @ weights.T
        z_right = right @ weights.T

        extra = _zero_crossings(x, z, z_left, z_right)
        if extra.size:
            limit = x.size + (x.size + 1) * weights.shape[0]
            knots = np.unique(np.concatenate([x, extra]))
            if knots.size > limit:
                raise PiecewiseError(
                    f"Число узлов ({knots.size}) превысило оценку {limit} при проталкивании слоя"
                )
            z = _interp_columns(x, z, z_left, z_right, knots)
            x = knots

        h = np.maximum(z, 0.0)
        left = np.minimum(z_left, 0.0)
        right = np.maximum(z_right, 0.0)
        x, h = _merge_close(x, h)
        x, h = _drop_collinear(x, h, left, right)

    return PiecewiseLinear.canonical(x, h @ readout, float(left @ readout), float(right @ readout))


def from_network_1d(net: ReluNetwork) -> PiecewiseLinear:
    """
    Строит точное кусочно-линейное представление выхода сети с одним входом.

    Сеть разбивается на связные компоненты графа ненулевых весов; каждая
    компонента проталкивается отдельно, результаты суммируются. Для блочно-
    диагональных сетей это не дает узлам разных блоков смешиваться.

    Raises:
        PiecewiseError: Если размерность входа сети не равна 1
    """
    if net.input_dim != 1:
        raise PiecewiseError(f"Ожидалась сеть с одним входом, получено input_dim={net.input_dim}")

    widths = [layer.width for layer in net.layers]
    offsets = np.concatenate([[0], np.cumsum(widths)])
    rows, cols = [], []
    for i in range(1, net.depth):
        r, c = np.nonzero(net.layers[i].weights)
        rows.append(offsets[i] + r)
        cols.append(offsets[i - 1] + c)
    total = int(offsets[-1])
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=int)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=int)
    graph = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(total, total))
    count, labels = connected_components(graph, directed=False)

    last = labels[offsets[-2]:offsets[-1]]
    pieces = []
    for label in np.unique(last):
        members = [np.nonzero(labels[offsets[i]:offsets[i + 1]] == label)[0] for i in range(net.depth)]
        start = next(i for i, idx in enumerate(members) if idx.size)
        layers = []
        for i in range(start, net.depth):
            layer = net.layers[i]
            if i == 0:
                weights = layer.weights[members[i]]
            elif i == start:
                weights = np.zeros((members[i].size, 0))
            else:
                weights = layer.weights[np.ix_(members[i], members[i - 1])]
            layers.append((weights, layer.thresholds[members[i]]))
        pieces.append(_propagate(layers, net.readout[members[-1]], start == 0))

    return PiecewiseLinear.combine(pieces)


def _open_interval_pattern(a: float, b: float, level: float) -> List[bool]:
    """Значения индикатора ≥ level на открытом линейном участке с пределами a, b на концах."""
    if a >= level and b >= level:
        return [True]
    if a < level and b < level:
        return [False]
    if a < level:
        return [False] if b == level else [False, True]
    return [False] if a == level else [True, False]


def crossing_number(pwl: PiecewiseLinear, level: float) -> int:
    """
    Число максимальных интервалов, на которых индикатор 𝟙(pwl ≥ level) постоянен.

    Участок, лежащий ровно на уровне, относится к стороне "≥".
    """
    x, v = pwl.breakpoints, pwl.values
    if x.size == 0:
        return 1 if pwl.left_slope == 0 else 2

    def tail_limit(slope: float, edge: float, sign: float) -> float:
        if slope == 0:
            return edge
        return np.inf if slope * sign > 0 else -np.inf

    pattern = _open_interval_pattern(tail_limit(pwl.left_slope, v[0], -1.0), v[0], level)
    for i in range(x.size):
        pattern.append(bool(v[i] >= level))
        if i + 1 < x.size:
            pattern.extend(_open_interval_pattern(v[i], v[i + 1], level))
    pattern.extend(_open_interval_pattern(v[-1], tail_limit(pwl.right_slope, v[-1], 1.0), level))

    flags = np.array(pattern)
    return 1 + int(np.count_nonzero(flags[1:] != flags[:-1]))


def l2_loss_vs_target(pwl: PiecewiseLinear,
                      target: Callable[[np.ndarray], np.ndarray],
                      radius: float,
                      min_period: float = np.inf) -> float:
    """
    Вычисляет (1/2r)∫₋ᵣʳ (target − pwl)² dx.

    Интервал делится в точках излома, затем каждый кусок дробится так, чтобы его
    длина не превышала десятой доли кратчайшего периода цели.

    Args:
        pwl: Кусочно-линейная функция
        target: Векторизованная гладкая цель
        radius: Полуширина интервала r
        min_period: Кратчайший период колебаний цели (inf для неколеблющихся целей)

    Raises:
        PiecewiseError: Если radius <= 0
    """
    if not radius > 0:
        raise PiecewiseError(f"Радиус должен быть положительным, получено {radius}")
    inner = pwl.breakpoints[(pwl.breakpoints > -radius) & (pwl.breakpoints < radius)]
    edges = np.concatenate([[-radius], inner, [radius]])
    edges = refine_edges(edges, min_period / SEGMENTS_PER_PERIOD)

    def squared_error(t: np.ndarray) -> np.ndarray:
        return (np.asarray(target(t), dtype=float) - pwl(t)) ** 2

    return integrate_segments(squared_error, edges) / (2.0 * radius)


def telgarsky_bound(units: int, depth: int) -> float:
    """Верхняя оценка числа пересечений 2(2N₀/D)^D для сети глубины D с N₀ нейронами."""
    return 2.0 * (2.0 * units / depth) ** depth


def dump_pwl_csv(pwl: PiecewiseLinear, path: Union[str, Path]) -> Path:
    """Записывает точки излома в CSV со столбцами x, value."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle)
            writer.writerow(['x', 'value'])
            for x, value in zip(pwl.breakpoints, pwl.values):
                writer.writerow([repr(float(x)), repr(float(value))])
    except OSError as e:
        raise PiecewiseError(f"Ошибка записи файла {path}: {e}")
    return path
