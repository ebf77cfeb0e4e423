"""
Квадратуры Гаусса-Лежандра фиксированного порядка на наборе отрезков.

Используются оракулами математических ожиданий по S и точным вычислением
квадратичной потери кусочно-линейных сетей.
"""

from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.special import roots_legendre


GAUSS_LEGENDRE_ORDER = 10


@lru_cache(maxsize=8)
def legendre_nodes(order: int = GAUSS_LEGENDRE_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Узлы и веса правила Гаусса-Лежандра на [-1, 1]."""
    nodes, weights = roots_legendre(order)
    return np.asarray(nodes, dtype=float), np.asarray(weights, dtype=float)


def segment_nodes(edges: np.ndarray, order: int = GAUSS_LEGENDRE_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """
    Переносит правило на каждый отрезок [edges[i], edges[i+1]].

    Returns:
        Tuple[np.ndarray, np.ndarray]: Узлы и веса формы (число отрезков, order)
    """
    edges = np.asarray(edges, dtype=float)
    nodes, weights = legendre_nodes(order)
    left = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    return left + half * (nodes[None, :] + 1.0), half * weights[None, :]


def integrate_segments(func: Callable[[np.ndarray], np.ndarray],
                       edges: np.ndarray,
                       order: int = GAUSS_LEGENDRE_ORDER) -> float:
    """
    Интегрирует векторизованную функцию по объединению отрезков.

    Вклады отрезков суммируются np.sum (попарное суммирование), поэтому результат
    не зависит от порядка вычисления узлов.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return 0.0
    x, w = segment_nodes(edges, order)
    values = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    return float(np.sum(np.sum(values * w, axis=1)))


def refine_edges(edges: np.ndarray, max_length: float) -> np.ndarray:
    """Дробит отрезки так, чтобы длина каждого не превышала max_length."""
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2 or not np.isfinite(max_length) or max_length <= 0:
        return edges
    pieces = [edges[:1]]
    for a, b in zip(edges[:-1], edges[1:]):
        count = max(1, int(np.ceil((b - a) / max_length)))
        pieces.append(np.linspace(a, b, count + 1)[1:])
    return np.concatenate(pieces)
