"""
fourier2relu

Компиляция функций, заданных мерой Фурье, в глубокие ReLU-сети
и проверка скоростей аппроксимации и нижних оценок.
"""

__version__ = "1.0.0"
__author__ = "fourier2relu Team"
__description__ = "Compiles Fourier-represented functions into deep ReLU networks and checks their rates"
