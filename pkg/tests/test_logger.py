"""
Тесты для модуля logger.py
"""

import pytest
import tempfile
import os
import logging
from pathlib import Path
from unittest.mock import patch

from src.logger import (
    Fourier2ReluLogger,
    setup_logger,
    get_logger,
    ColoredFormatter
)
from src.config_loader import LoggingConfig


class TestColoredFormatter:
    """Тесты для ColoredFormatter."""

    def test_colored_formatter(self):
        """Тест цветного форматтера."""
        formatter = ColoredFormatter(
            fmt='%(asctime)s [%(levelname)s] %(name)s: %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        record = logging.LogRecord(
            name='test',
            level=logging.INFO,
            pathname='',
            lineno=0,
            msg='Test message',
            args=(),
            exc_info=None
        )

        formatted = formatter.format(record)

        assert '\x1b[32m' in formatted  # зеленый для INFO
        assert '\x1b[0m' in formatted
        assert 'Test message' in formatted
        assert 'INFO' in formatted


class TestFourier2ReluLogger:
    """Тесты для Fourier2ReluLogger."""

    @pytest.fixture
    def temp_log_config(self):
        """Создает временную конфигурацию логирования."""
        with tempfile.NamedTemporaryFile(mode='w', suffix='.log', delete=False) as f:
            temp_log_file = f.name

        config = LoggingConfig(
            level='DEBUG',
            log_file=Path(temp_log_file),
            max_log_size=1,
            backup_count=3
        )

        yield config

        logger = logging.getLogger('fourier2relu')
        for handler in logger.handlers[:]:
            handler.close()
            logger.removeHandler(handler)

        try:
            os.unlink(temp_log_file)
        except (FileNotFoundError, PermissionError):
            pass

    def test_logger_initialization(self, temp_log_config):
        """Тест инициализации логгера."""
        logger = Fourier2ReluLogger(temp_log_config)
        assert logger.logger is not None
        assert logger.logger.name == 'fourier2relu'
        assert logger.logger.level == logging.DEBUG

    def test_logger_handlers(self, temp_log_config):
        """Тест обработчиков логгера."""
        logger = Fourier2ReluLogger(temp_log_config)
        handler_types = [type(h).__name__ for h in logger.logger.handlers]

        assert len(handler_types) == 2
        assert 'RotatingFileHandler' in handler_types
        assert 'StreamHandler' in handler_types

    def test_from_logger_keeps_handlers(self, temp_log_config):
        """from_logger не перенастраивает обработчики."""
        configured = Fourier2ReluLogger(temp_log_config)
        wrapped = Fourier2ReluLogger.from_logger()

        assert wrapped.logger is configured.logger
        assert len(wrapped.logger.handlers) == 2

    def test_log_synthesis_start(self, temp_log_config):
        """Тест логирования начала синтеза."""
        logger = Fourier2ReluLogger(temp_log_config)

        with patch.object(logger.logger, 'info') as mock_info:
            logger.log_synthesis_start(12, 2, 4096, 8)

            assert mock_info.call_count == 3
            calls = [call[0][0] for call in mock_info.call_args_list]
            assert any("🚀 Начало синтеза сети" in call for call in calls)
            assert any("Выборок на попытку: 12" in call for call in calls)
            assert any("Бюджет нейронов: 4096" in call for call in calls)

    def test_log_attempt(self, temp_log_config):
        """Тест логирования принятой и отклоненной попыток."""
        logger = Fourier2ReluLogger(temp_log_config)

        with patch.object(logger.logger, 'info') as mock_info:
            logger.log_attempt(0, 100, True, 0.25)
            logger.log_attempt(1, 5000, False, None)

            calls = [call[0][0] for call in mock_info.call_args_list]
            assert "✅ Попытка #0" in calls[0]
            assert "2.500000e-01" in calls[0]
            assert "⛔ Попытка #1" in calls[1]

    def test_log_synthesis_end_fallback(self, temp_log_config):
        """Тест предупреждения о нулевой сети."""
        logger = Fourier2ReluLogger(temp_log_config)

        with patch.object(logger.logger, 'warning') as mock_warning:
            logger.log_synthesis_end(2, 0.5, True)
            mock_warning.assert_called_once()
            assert "нулевая сеть" in mock_warning.call_args[0][0]

    def test_log_slope(self, temp_log_config):
        """Тест логирования наклона."""
        logger = Fourier2ReluLogger(temp_log_config)

        with patch.object(logger.logger, 'info') as mock_info:
            logger.log_slope(2, -0.98, -1.0)
            logger.log_slope(1, None, -0.5)

            calls = [call[0][0] for call in mock_info.call_args_list]
            assert "📐 D=2: наклон -0.980 (ожидается -1.000)" in calls[0]
            assert "не оценивался" in calls[1]

    def test_log_check_result(self, temp_log_config):
        """Тест логирования результатов проверок."""
        logger = Fourier2ReluLogger(temp_log_config)

        with patch.object(logger.logger, 'info') as mock_info, \
                patch.object(logger.logger, 'error') as mock_error:
            logger.log_check_result('waveform', 'composition', True, 'k=1')
            logger.log_check_result('lowerbound', 'crossing-bound', False, 'D=2')

            assert "✅ waveform/composition: пройдено k=1" in mock_info.call_args[0][0]
            assert "❌ lowerbound/crossing-bound: НЕ пройдено D=2" in mock_error.call_args[0][0]

    def test_log_config_loaded(self, temp_log_config):
        """Тест логирования загрузки конфигурации."""
        logger = Fourier2ReluLogger(temp_log_config)

        with patch.object(logger.logger, 'info') as mock_info:
            logger.log_config_loaded("config/settings.ini")

            mock_info.assert_called_once()
            assert "⚙️ Конфигурация загружена из config/settings.ini" in mock_info.call_args[0][0]

    def test_log_file_operation(self, temp_log_config):
        """Тест логирования операций с файлами."""
        logger = Fourier2ReluLogger(temp_log_config)

        with patch.object(logger.logger, 'info') as mock_info:
            logger.log_file_operation("write", Path("results/net.json"), False)

            call_args = mock_info.call_args[0][0]
            assert "❌ WRITE:" in call_args
            assert "net.json" in call_args

    def test_log_warning(self, temp_log_config):
        """Тест логирования предупреждения."""
        logger = Fourier2ReluLogger(temp_log_config)

        with patch.object(logger.logger, 'warning') as mock_warning:
            logger.log_warning("Интеграл не сошелся")

            mock_warning.assert_called_once()
            assert "⚠️ Интеграл не сошелся" in mock_warning.call_args[0][0]

    def test_log_critical_error(self, temp_log_config):
        """Тест логирования критической ошибки."""
        logger = Fourier2ReluLogger(temp_log_config)

        with patch.object(logger.logger, 'critical') as mock_critical:
            logger.log_critical_error("Ошибка выполнения", RuntimeError("System failure"))

            call_args = mock_critical.call_args[0][0]
            assert "💥 Ошибка выполнения:" in call_args
            assert "System failure" in call_args

    def test_get_logger(self, temp_log_config):
        """Тест получения логгера."""
        logger = Fourier2ReluLogger(temp_log_config)
        returned_logger = logger.get_logger()

        assert returned_logger is logger.logger
        assert returned_logger.name == 'fourier2relu'


class TestSetupLogger:
    """Тесты для функции setup_logger."""

    def test_setup_logger(self, tmp_path):
        """Тест настройки логгера."""
        config = LoggingConfig(
            level='INFO',
            log_file=tmp_path / 'test.log',
            max_log_size=1,
            backup_count=3
        )

        logger = setup_logger(config)

        assert logger.name == 'fourier2relu'
        assert logger.level == logging.INFO
        for handler in logger.handlers[:]:
            handler.close()
            logger.removeHandler(handler)


class TestGetLogger:
    """Тесты для функции get_logger."""

    def test_get_logger_default_name(self):
        """Тест получения логгера с именем по умолчанию."""
        assert get_logger().name == 'fourier2relu'

    def test_get_logger_custom_name(self):
        """Тест получения логгера с пользовательским именем."""
        assert get_logger('custom_logger').name == 'custom_logger'


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
