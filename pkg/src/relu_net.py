"""
Модель данных полносвязных ReLU-сетей.

Сеть задается как f̂(x) = ⟨a, f_D ∘ … ∘ f_1(x)⟩, где каждый слой
f_i(x) = Σ_j ReLU(⟨x, W_ij⟩ - T_ij) e_j. Сдвига на выходе нет, константы
реализуются самими ReLU-нейронами.

Модуль отвечает за вычисление выхода, подсчет нейронов, параллельное
объединение подсетей и сериализацию в JSON-формат.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np


FORMAT_VERSION = 1


class NetworkError(Exception):
    """Базовое исключение для ошибок сетей."""
    pass


class DimensionMismatchError(NetworkError):
    """Исключение для несогласованных размерностей."""
    pass


class NetworkFormatError(NetworkError):
    """Исключение для ошибок разбора файла сети (с позицией)."""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, position: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        self.position = position
        where = ''
        if line is not None:
            where = f" (строка {line}, столбец {column}, позиция {position})"
        super().__init__(f"{message}{where}")


def _frozen(values, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float, ndmin=ndim)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LayerSpec:
    """Слой из n_i нейронов: матрица весов (n_i × d_i) и вектор порогов длины n_i."""
    weights: np.ndarray
    thresholds: np.ndarray

    def __post_init__(self):
        weights = _frozen(self.weights, 2)
        thresholds = _frozen(self.thresholds, 1)
        if weights.ndim != 2 or thresholds.ndim != 1:
            raise DimensionMismatchError("Веса слоя должны быть матрицей, пороги - вектором")
        if weights.shape[0] != thresholds.shape[0]:
            raise DimensionMismatchError(
                f"Число строк весов ({weights.shape[0]}) не совпадает с числом порогов ({thresholds.shape[0]})"
            )
        if weights.shape[0] == 0:
            raise DimensionMismatchError("Слой должен содержать хотя бы один нейрон")
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'thresholds', thresholds)

    @property
    def width(self) -> int:
        return int(self.weights.shape[0])

    @property
    def input_width(self) -> int:
        return int(self.weights.shape[1])

    def forward(self, h: np.ndarray) -> np.ndarray:
        """Применяет слой к пакету входов формы (число точек × d_i)."""
        return np.maximum(h @ self.weights.T - self.thresholds, 0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LayerSpec):
            return NotImplemented
        return (np.array_equal(self.weights, other.weights)
                and np.array_equal(self.thresholds, other.thresholds))


@dataclass(frozen=True, eq=False)
class ReluNetwork:
    """ReLU-сеть глубины D с входом размерности d и выходным вектором a."""
    input_dim: int
    layers: Tuple[LayerSpec, ...]
    readout: np.ndarray

    def __post_init__(self):
        layers = tuple(self.layers)
        readout = _frozen(self.readout, 1)
        if self.input_dim < 1:
            raise DimensionMismatchError("Размерность входа должна быть положительной")
        if not layers:
            raise DimensionMismatchError("Сеть должна содержать хотя бы один слой")

        width = self.input_dim
        for index, layer in enumerate(layers, start=1):
            if layer.input_width != width:
                raise DimensionMismatchError(
                    f"Слой {index}: ожидалось {width} входов, получено {layer.input_width}"
                )
            width = layer.width
        if readout.shape != (width,):
            raise DimensionMismatchError(
                f"Длина выходного вектора ({readout.shape[0]}) не совпадает с шириной последнего слоя ({width})"
            )
        object.__setattr__(self, 'layers', layers)
        object.__setattr__(self, 'readout', readout)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def hidden(self, points: np.ndarray) -> np.ndarray:
        """Выход последнего слоя для пакета точек."""
        h = points
        for layer in self.layers:
            h = layer.forward(h)
        return h

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReluNetwork):
            return NotImplemented
        return (self.input_dim == other.input_dim
                and self.layers == other.layers
                and np.array_equal(self.readout, other.readout))


def evaluate(net: ReluNetwork, x: Union[float, Sequence[float], np.ndarray]) -> float:
    """
    Вычисляет выход сети в одной точке.

    Raises:
        DimensionMismatchError: Если длина x не совпадает с input_dim
    """
    point = np.atleast_1d(np.asarray(x, dtype=float))
    if point.shape != (net.input_dim,):
        raise DimensionMismatchError(
            f"Ожидалась точка размерности {net.input_dim}, получено {point.shape}"
        )
    return float(net.hidden(point[None, :])[0] @ net.readout)


def evaluate_batch(net: ReluNetwork, points: np.ndarray) -> np.ndarray:
    """
    Вычисляет выход сети на пакете точек.

    Для одномерной сети допускается плоский массив значений t.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1 and net.input_dim == 1:
        points = points[:, None]
    if points.ndim != 2 or points.shape[1] != net.input_dim:
        raise DimensionMismatchError(
            f"Ожидался массив (n, {net.input_dim}), получено {points.shape}"
        )
    return net.hidden(points) @ net.readout


def unit_count(net: ReluNetwork) -> int:
    """Число ReLU-нейронов N = Σ n_i."""
    return sum(layer.width for layer in net.layers)


def single_layer_net(layer: LayerSpec, readout: np.ndarray) -> ReluNetwork:
    """Сеть из одного слоя."""
    return ReluNetwork(input_dim=layer.input_width, layers=(layer,), readout=readout)


def compose_scalar_layers(direction: Sequence[float],
                          offset: float,
                          blocks: Sequence[Tuple[LayerSpec, np.ndarray]]) -> ReluNetwork:
    """
    Собирает сеть из цепочки скалярных блоков t ↦ Σ_j c_j ReLU(w_j t - b_j).

    Вход первого блока - аффинная проекция t = ⟨direction, x⟩ + offset; выход блока
    i (через его выходной вектор) подается на вход блока i+1. Выходной вектор
    внутреннего блока сворачивается в матрицу весов следующего слоя.

    Args:
        direction: Вектор проекции входа (длина d)
        offset: Сдвиг проекции
        blocks: Пары (слой с одним входом, выходной вектор блока)
    """
    direction = np.asarray(direction, dtype=float)
    layers: List[LayerSpec] = []
    previous: Optional[np.ndarray] = None

    for layer, block_readout in blocks:
        if layer.input_width != 1:
            raise DimensionMismatchError("Скалярный блок должен иметь ровно один вход")
        column = layer.weights[:, 0]
        if previous is None:
            weights = np.outer(column, direction)
            thresholds = layer.thresholds - column * offset
        else:
            weights = np.outer(column, previous)
            thresholds = layer.thresholds
        layers.append(LayerSpec(weights, thresholds))
        previous = np.asarray(block_readout, dtype=float)

    if previous is None:
        raise DimensionMismatchError("Цепочка блоков пуста")
    return ReluNetwork(input_dim=direction.shape[0], layers=tuple(layers), readout=previous)


def parallel_merge(subnets: Sequence[ReluNetwork], coeffs: Sequence[float]) -> ReluNetwork:
    """
    Объединяет подсети одинаковой глубины блочно-диагональной укладкой слоев.

    evaluate(merged, x) = Σ_j coeffs_j · evaluate(subnet_j, x).

    Raises:
        DimensionMismatchError: Если глубины или размерности входа различаются
    """
    subnets = list(subnets)
    coeffs = np.asarray(coeffs, dtype=float)
    if not subnets:
        raise DimensionMismatchError("Список подсетей пуст")
    if coeffs.shape != (len(subnets),):
        raise DimensionMismatchError(
            f"Число коэффициентов ({coeffs.size}) не совпадает с числом подсетей ({len(subnets)})"
        )
    input_dim = subnets[0].input_dim
    depth = subnets[0].depth
    for net in subnets:
        if net.input_dim != input_dim:
            raise DimensionMismatchError("Подсети должны иметь одинаковую размерность входа")
        if net.depth != depth:
            raise DimensionMismatchError(
                f"Подсети должны иметь одинаковую глубину ({depth} != {net.depth})"
            )

    layers: List[LayerSpec] = []
    for i in range(depth):
        blocks = [net.layers[i] for net in subnets]
        thresholds = np.concatenate([block.thresholds for block in blocks])
        if i == 0:
            weights = np.vstack([block.weights for block in blocks])
        else:
            rows = sum(block.width for block in blocks)
            cols = sum(block.input_width for block in blocks)
            weights = np.zeros((rows, cols))
            r = c = 0
            for block in blocks:
                weights[r:r + block.width, c:c + block.input_width] = block.weights
                r += block.width
                c += block.input_width
        layers.append(LayerSpec(weights, thresholds))

    readout = np.concatenate([coef * net.readout for coef, net in zip(coeffs, subnets)])
    return ReluNetwork(input_dim=input_dim, layers=tuple(layers), readout=readout)


def serialize(net: ReluNetwork) -> bytes:
    """Сериализует сеть в JSON (числа в полной точности, с версией формата)."""
    document = {
        'format': 'fourier2relu-network',
        'format_version': FORMAT_VERSION,
        'input_dim': net.input_dim,
        'depth': net.depth,
        'widths': [layer.width for layer in net.layers],
        'layers': [
            {
                'rows': layer.width,
                'cols': layer.input_width,
                'weights': layer.weights.tolist(),
                'thresholds': layer.thresholds.tolist(),
            }
            for layer in net.layers
        ],
        'readout': net.readout.tolist(),
    }
    return json.dumps(document, indent=1).encode('utf-8')


def _require_field(document: dict, key: str, where: str):
    if key not in document:
        raise NetworkFormatError(f"Отсутствует поле '{where}{key}'")
    return document[key]


def deserialize(data: bytes) -> ReluNetwork:
    """
    Восстанавливает сеть из байтов, созданных serialize().

    Raises:
        NetworkFormatError: Если данные повреждены или не соответствуют формату
    """
    try:
        document = json.loads(data.decode('utf-8') if isinstance(data, bytes) else data)
    except json.JSONDecodeError as e:
        raise NetworkFormatError(f"Некорректный JSON: {e.msg}", e.lineno, e.colno, e.pos)
    except UnicodeDecodeError as e:
        raise NetworkFormatError(f"Некорректная кодировка: {e.reason}", position=e.start)

    if not isinstance(document, dict):
        raise NetworkFormatError("Корень документа должен быть объектом")
    version = _require_field(document, 'format_version', '')
    if version != FORMAT_VERSION:
        raise NetworkFormatError(f"Неподдерживаемая версия формата: {version}")

    input_dim = _require_field(document, 'input_dim', '')
    raw_layers = _require_field(document, 'layers', '')
    if not isinstance(raw_layers, list):
        raise NetworkFormatError("Поле 'layers' должно быть массивом")

    layers = []
    for index, raw in enumerate(raw_layers):
        where = f"layers[{index}]."
        if not isinstance(raw, dict):
            raise NetworkFormatError(f"Элемент '{where[:-1]}' должен быть объектом")
        try:
            weights = np.asarray(_require_field(raw, 'weights', where), dtype=float)
            thresholds = np.asarray(_require_field(raw, 'thresholds', where), dtype=float)
        except (TypeError, ValueError) as e:
            raise NetworkFormatError(f"Слой {index}: нечисловые параметры ({e})")
        rows = _require_field(raw, 'rows', where)
        cols = _require_field(raw, 'cols', where)
        if weights.shape != (rows, cols):
            raise NetworkFormatError(
                f"Поле '{where}weights' имеет форму {weights.shape}, объявлено ({rows}, {cols})"
            )
        try:
            layers.append(LayerSpec(weights, thresholds))
        except (DimensionMismatchError, TypeError, ValueError) as e:
            raise NetworkFormatError(f"Слой {index}: {e}")

    readout = _require_field(document, 'readout', '')
    try:
        return ReluNetwork(input_dim=int(input_dim), layers=tuple(layers), readout=readout)
    except (DimensionMismatchError, ValueError, TypeError) as e:
        raise NetworkFormatError(f"Несогласованная сеть: {e}")


def save_network(net: ReluNetwork, path: Union[str, Path]) -> Path:
    """Записывает сеть в файл."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(serialize(net))
    except OSError as e:
        raise NetworkError(f"Ошибка записи файла сети {path}: {e}")
    return path


def load_network(path: Union[str, Path]) -> ReluNetwork:
    """
    Читает сеть из файла.

    Raises:
        NetworkError: Ошибка чтения файла
        NetworkFormatError: Файл поврежден (в сообщении указан путь)
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise NetworkError(f"Ошибка чтения файла сети {path}: {e}")
    try:
        return deserialize(data)
    except NetworkFormatError as e:
        raise NetworkFormatError(f"{path}: {e.message}", e.line, e.column, e.position)
