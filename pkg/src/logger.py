"""
Модуль для настройки и управления логированием приложения.

Обеспечивает централизованную настройку логирования с ротацией файлов,
цветным выводом в консоль (colorlog) и доменными сообщениями о синтезе
сетей, развертках и проверках.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Optional

import colorlog

try:
    from .config_loader import LoggingConfig
except ImportError:
    from config_loader import LoggingConfig


LOGGER_NAME = 'fourier2relu'
LOG_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class ColoredFormatter(colorlog.ColoredFormatter):
    """Форматтер с цветным уровнем логирования для консоли."""

    LOG_COLORS = {
        'DEBUG': 'cyan',
        'INFO': 'green',
        'WARNING': 'yellow',
        'ERROR': 'red',
        'CRITICAL': 'purple',
    }

    def __init__(self, fmt: str = LOG_FORMAT, datefmt: str = DATE_FORMAT):
        super().__init__(
            fmt=fmt.replace('%(levelname)s', '%(log_color)s%(levelname)s%(reset)s'),
            datefmt=datefmt,
            log_colors=self.LOG_COLORS,
        )


class Fourier2ReluLogger:
    """Класс для управления логированием приложения fourier2relu."""

    def __init__(self, config: Optional[LoggingConfig], logger: Optional[logging.Logger] = None):
        """
        Инициализация логгера.

        Args:
            config: Конфигурация логирования (None - использовать готовый логгер)
            logger: Уже настроенный логгер, обработчики которого не трогаются
        """
        self.config = config
        self.logger: Optional[logging.Logger] = logger
        if logger is None:
            self._setup_logger()

    @classmethod
    def from_logger(cls, logger: Optional[logging.Logger] = None) -> 'Fourier2ReluLogger':
        """Оборачивает существующий логгер без настройки обработчиков (для библиотечного кода)."""
        return cls(None, logger or logging.getLogger(LOGGER_NAME))

    def _setup_logger(self) -> None:
        """Настраивает логгер с файловым и консольным выводом."""
        level = getattr(logging, self.config.level.upper())

        self.logger = logging.getLogger(LOGGER_NAME)
        self.logger.setLevel(level)
        self.logger.handlers.clear()

        log_file_path = Path(self.config.log_file)
        log_file_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.handlers.RotatingFileHandler(
            filename=log_file_path,
            maxBytes=self.config.max_log_size * 1024 * 1024,
            backupCount=self.config.backup_count,
            encoding='utf-8'
        )
        file_handler.setFormatter(logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT))
        file_handler.setLevel(level)

        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setFormatter(ColoredFormatter())
        console_handler.setLevel(level)

        self.logger.addHandler(file_handler)
        self.logger.addHandler(console_handler)

        # Предотвращаем дублирование сообщений
        self.logger.propagate = False

    def get_logger(self) -> logging.Logger:
        """
        Возвращает настроенный логгер.

        Returns:
            logging.Logger: Настроенный логгер
        """
        if self.logger is None:
            raise RuntimeError("Логгер не инициализирован")
        return self.logger

    def log_synthesis_start(self, samples: int, depth: int, budget: int, retries: int) -> None:
        """
        Логирует начало синтеза сети.

        Args:
            samples: Число выборок (ξ_j, S_j) на попытку
            depth: Глубина D
            budget: Бюджет нейронов N₀
            retries: Число попыток M
        """
        self.logger.info("🚀 Начало синтеза сети")
        self.logger.info(f"📊 Выборок на попытку: {samples}, глубина: {depth}")
        self.logger.info(f"📦 Бюджет нейронов: {budget}, попыток: {retries}")

    def log_attempt(self, index: int, unit_count: int, accepted: bool, loss: Optional[float]) -> None:
        """Логирует результат одной попытки синтеза."""
        if accepted:
            self.logger.info(f"✅ Попытка #{index}: {unit_count} нейронов, потеря {loss:.6e}")
        else:
            self.logger.info(f"⛔ Попытка #{index}: {unit_count} нейронов превышают бюджет")

    def log_synthesis_end(self, unit_count: int, loss: float, fallback: bool) -> None:
        """Логирует завершение синтеза."""
        if fallback:
            self.logger.warning("⚠️ Ни одна попытка не уложилась в бюджет, используется нулевая сеть")
        self.logger.info(f"✅ Синтез завершен: {unit_count} нейронов, потеря {loss:.6e}")

    def log_sweep_point(self, depth: int, budget: int, unit_count: int, loss: float) -> None:
        """Логирует точку развертки."""
        self.logger.info(f"📈 D={depth}, N₀={budget}: {unit_count} нейронов, потеря {loss:.6e}")

    def log_slope(self, depth: int, slope: Optional[float], expected: float) -> None:
        """Логирует подобранный наклон log-log."""
        if slope is None:
            self.logger.info(f"📐 D={depth}: наклон не оценивался")
        else:
            self.logger.info(f"📐 D={depth}: наклон {slope:.3f} (ожидается {expected:.3f})")

    def log_check_result(self, module: str, invariant: str, passed: bool, details: str = '') -> None:
        """
        Логирует результат проверки инварианта.

        Args:
            module: Модуль, к которому относится проверка
            invariant: Идентификатор инварианта
            passed: Пройдена ли проверка
            details: Подробности (входные данные, отклонения)
        """
        if passed:
            self.logger.info(f"✅ {module}/{invariant}: пройдено {details}".rstrip())
        else:
            self.logger.error(f"❌ {module}/{invariant}: НЕ пройдено {details}".rstrip())

    def log_config_loaded(self, config_path: str) -> None:
        """Логирует успешную загрузку конфигурации."""
        self.logger.info(f"⚙️ Конфигурация загружена из {config_path}")

    def log_file_operation(self, operation: str, file_path: Path, success: bool = True) -> None:
        """
        Логирует операцию с файлом.

        Args:
            operation: Тип операции (read, write)
            file_path: Путь к файлу
            success: Успешность операции
        """
        status = "✅" if success else "❌"
        self.logger.info(f"{status} {operation.upper()}: {file_path}")

    def log_system_info(self, info: str) -> None:
        """Логирует системную информацию."""
        self.logger.info(f"ℹ️ {info}")

    def log_warning(self, message: str) -> None:
        """Логирует предупреждение."""
        self.logger.warning(f"⚠️ {message}")

    def log_critical_error(self, message: str, error: Exception = None) -> None:
        """
        Логирует критическую ошибку.

        Args:
            message: Сообщение об ошибке
            error: Исключение (опционально)
        """
        if error:
            self.logger.critical(f"💥 {message}: {error}")
        else:
            self.logger.critical(f"💥 {message}")


def setup_logger(config: LoggingConfig) -> logging.Logger:
    """
    Удобная функция для быстрой настройки логгера.

    Args:
        config: Конфигурация логирования

    Returns:
        logging.Logger: Настроенный логгер
    """
    return Fourier2ReluLogger(config).get_logger()


def get_logger(name: str = LOGGER_NAME) -> logging.Logger:
    """
    Получает логгер по имени.

    Args:
        name: Имя логгера

    Returns:
        logging.Logger: Логгер
    """
    return logging.getLogger(name)
