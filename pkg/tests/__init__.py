"""
Тесты для fourier2relu
"""
