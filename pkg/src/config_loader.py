"""
Модуль для загрузки и валидации конфигурации эксперимента.

Обеспечивает централизованную загрузку параметров из config/settings.ini
с валидацией и удобным доступом к настройкам синтеза, развертки и проверок.
"""

import configparser
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence


COMMANDS = ('synthesize', 'sweep', 'verify-upper', 'verify-lower', 'oracle-suite')
MEASURE_KINDS = ('hard_instance', 'gaussian', 'scaled_cosine', 'atoms')


class ConfigError(ValueError):
    """Исключение для ошибок конфигурации (код возврата 2)."""
    pass


@dataclass
class MeasureConfig:
    """Конфигурация целевой функции (меры Фурье)."""
    kind: str
    smoothness: float = 2.0
    radius: float = 1.0
    oscillations: int = 64
    dim: int = 1
    frequency: float = 1.0
    exponent: float = 0.5
    atoms: list = field(default_factory=list)


@dataclass
class SynthesisConfig:
    """Параметры синтеза сети: глубина D, бюджет N₀, радиус r, гладкость K."""
    depth: int
    budget: int
    radius: float
    smoothness: float
    samples: Optional[int] = None
    retries: int = 8
    seed: int = 0
    loss_samples: int = 20000
    workers: int = 1


@dataclass
class SweepConfig:
    """Параметры развертки по глубинам и бюджетам."""
    depths: List[int]
    budgets: List[int]


@dataclass
class VerifyConfig:
    """Параметры наборов проверок."""
    crossing_trials: int = 500
    lemma5_networks: int = 100
    grid_points: int = 2001
    seed: int = 7


@dataclass
class OutputConfig:
    """Пути к выходным файлам."""
    csv: Optional[Path] = None
    network: Optional[Path] = None
    report: Optional[Path] = None
    pwl: Optional[Path] = None
    counterexamples: Path = Path('results/counterexamples')
    timing: bool = False


@dataclass
class LoggingConfig:
    """Конфигурация логирования."""
    level: str
    log_file: Path
    max_log_size: int
    backup_count: int


@dataclass
class ExperimentConfig:
    """Основная конфигурация эксперимента."""
    command: str
    measure: MeasureConfig
    synthesis: SynthesisConfig
    sweep: SweepConfig
    verify: VerifyConfig
    output: OutputConfig
    logging: LoggingConfig


def _parse_int_list(raw: str, name: str) -> List[int]:
    """Разбирает список целых чисел через запятую."""
    try:
        return [int(item) for item in raw.replace(' ', '').split(',') if item]
    except ValueError:
        raise ConfigError(f"Поле '{name}' должно быть списком целых чисел: {raw!r}")


def _optional_path(parser: configparser.ConfigParser, section: str, key: str) -> Optional[Path]:
    value = parser.get(section, key, fallback='').strip()
    return Path(value) if value else None


class ConfigLoader:
    """Класс для загрузки и валидации конфигурации."""

    def __init__(self, config_path: str = "config/settings.ini"):
        """
        Инициализация загрузчика конфигурации.

        Args:
            config_path: Путь к файлу конфигурации
        """
        self.config_path = Path(config_path)
        self._config: Optional[ExperimentConfig] = None

    def load_config(self, command: str = 'synthesize') -> ExperimentConfig:
        """
        Загружает конфигурацию из файла.

        Args:
            command: Команда CLI, для которой загружается конфигурация

        Returns:
            ExperimentConfig: Объект конфигурации

        Raises:
            FileNotFoundError: Если файл конфигурации не найден
            ConfigError: Если конфигурация некорректна
        """
        if not self.config_path.exists():
            raise FileNotFoundError(f"Файл конфигурации не найден: {self.config_path}")

        config_parser = configparser.ConfigParser(inline_comment_prefixes=(';', '#'))
        config_parser.read(self.config_path, encoding='utf-8')

        try:
            self._config = ExperimentConfig(
                command=command,
                measure=self._load_measure_config(config_parser),
                synthesis=self._load_synthesis_config(config_parser),
                sweep=self._load_sweep_config(config_parser),
                verify=self._load_verify_config(config_parser),
                output=self._load_output_config(config_parser),
                logging=self._load_logging_config(config_parser),
            )
        except ConfigError:
            raise
        except (ValueError, configparser.Error) as e:
            raise ConfigError(f"Ошибка загрузки конфигурации: {e}")

        validate_config(self._config)
        return self._config

    def _require(self, parser: configparser.ConfigParser, section: str) -> None:
        if not parser.has_section(section):
            raise ConfigError(f"Секция '{section}' не найдена в конфигурации")

    def _load_measure_config(self, parser: configparser.ConfigParser) -> MeasureConfig:
        """Загружает описание меры Фурье."""
        section = 'measure'
        self._require(parser, section)

        raw_atoms = parser.get(section, 'atoms', fallback='[]')
        try:
            atoms = json.loads(raw_atoms)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Поле 'measure.atoms' не является JSON-массивом: {e}")

        return MeasureConfig(
            kind=parser.get(section, 'kind', fallback='hard_instance'),
            smoothness=parser.getfloat(section, 'smoothness', fallback=2.0),
            radius=parser.getfloat(section, 'radius', fallback=1.0),
            oscillations=parser.getint(section, 'oscillations', fallback=64),
            dim=parser.getint(section, 'dim', fallback=1),
            frequency=parser.getfloat(section, 'frequency', fallback=1.0),
            exponent=parser.getfloat(section, 'exponent', fallback=0.5),
            atoms=atoms,
        )

    def _load_synthesis_config(self, parser: configparser.ConfigParser) -> SynthesisConfig:
        """Загружает параметры синтеза."""
        section = 'synthesis'
        self._require(parser, section)

        samples_raw = parser.get(section, 'samples', fallback='auto').strip().lower()
        try:
            samples = None if samples_raw == 'auto' else int(samples_raw)
        except ValueError:
            raise ConfigError(f"Поле 'synthesis.samples' должно быть 'auto' или целым: {samples_raw!r}")

        return SynthesisConfig(
            depth=parser.getint(section, 'depth', fallback=1),
            budget=parser.getint(section, 'budget', fallback=1024),
            radius=parser.getfloat(section, 'radius', fallback=1.0),
            smoothness=parser.getfloat(section, 'smoothness', fallback=1.0),
            samples=samples,
            retries=parser.getint(section, 'retries', fallback=8),
            seed=parser.getint(section, 'seed', fallback=0),
            loss_samples=parser.getint(section, 'loss_samples', fallback=20000),
            workers=parser.getint(section, 'workers', fallback=1),
        )

    def _load_sweep_config(self, parser: configparser.ConfigParser) -> SweepConfig:
        """Загружает параметры развертки."""
        section = 'sweep'
        if not parser.has_section(section):
            return SweepConfig(depths=[1], budgets=[64])
        return SweepConfig(
            depths=_parse_int_list(parser.get(section, 'depths', fallback='1'), 'sweep.depths'),
            budgets=_parse_int_list(parser.get(section, 'budgets', fallback='64'), 'sweep.budgets'),
        )

    def _load_verify_config(self, parser: configparser.ConfigParser) -> VerifyConfig:
        """Загружает параметры проверок."""
        section = 'verify'
        if not parser.has_section(section):
            return VerifyConfig()
        return VerifyConfig(
            crossing_trials=parser.getint(section, 'crossing_trials', fallback=500),
            lemma5_networks=parser.getint(section, 'lemma5_networks', fallback=100),
            grid_points=parser.getint(section, 'grid_points', fallback=2001),
            seed=parser.getint(section, 'seed', fallback=7),
        )

    def _load_output_config(self, parser: configparser.ConfigParser) -> OutputConfig:
        """Загружает пути к выходным файлам."""
        section = 'output'
        if not parser.has_section(section):
            return OutputConfig()
        return OutputConfig(
            csv=_optional_path(parser, section, 'csv'),
            network=_optional_path(parser, section, 'network'),
            report=_optional_path(parser, section, 'report'),
            pwl=_optional_path(parser, section, 'pwl'),
            counterexamples=Path(parser.get(section, 'counterexamples', fallback='results/counterexamples')),
            timing=parser.getboolean(section, 'timing', fallback=False),
        )

    def _load_logging_config(self, parser: configparser.ConfigParser) -> LoggingConfig:
        """Загружает конфигурацию логирования."""
        section = 'logging'
        self._require(parser, section)

        return LoggingConfig(
            level=parser.get(section, 'level', fallback='INFO'),
            log_file=Path(parser.get(section, 'log_file', fallback='logs/fourier2relu.log')),
            max_log_size=parser.getint(section, 'max_log_size', fallback=10),
            backup_count=parser.getint(section, 'backup_count', fallback=5)
        )

    def get_config(self) -> ExperimentConfig:
        """
        Возвращает загруженную конфигурацию.

        Raises:
            ConfigError: Если конфигурация не загружена
        """
        if self._config is None:
            raise ConfigError("Конфигурация не загружена. Вызовите load_config() сначала.")
        return self._config

    def reload_config(self) -> ExperimentConfig:
        """Перезагружает конфигурацию из файла."""
        command = self._config.command if self._config else 'synthesize'
        self._config = None
        return self.load_config(command)


def validate_synthesis_config(synthesis: SynthesisConfig) -> None:
    """Валидирует параметры синтеза (предусловия теоремы о верхней оценке)."""
    if synthesis.depth < 1:
        raise ConfigError("Поле 'synthesis.depth' должно быть >= 1")
    if synthesis.smoothness < 1:
        raise ConfigError("Поле 'synthesis.smoothness' (K) должно быть >= 1")
    if synthesis.depth > synthesis.smoothness:
        raise ConfigError(
            f"Поле 'synthesis.depth' ({synthesis.depth}) не может превышать K ({synthesis.smoothness})"
        )
    if synthesis.budget < 2:
        raise ConfigError("Поле 'synthesis.budget' должно быть >= 2")
    if synthesis.budget < synthesis.depth:
        raise ConfigError("Поле 'synthesis.budget' должно быть не меньше глубины")
    if synthesis.radius <= 0:
        raise ConfigError("Поле 'synthesis.radius' должно быть > 0")
    if synthesis.retries < 1:
        raise ConfigError("Поле 'synthesis.retries' должно быть >= 1")
    if synthesis.samples is not None and synthesis.samples < 1:
        raise ConfigError("Поле 'synthesis.samples' должно быть 'auto' или > 0")
    if synthesis.loss_samples < 2:
        raise ConfigError("Поле 'synthesis.loss_samples' должно быть >= 2")
    if synthesis.workers < 1:
        raise ConfigError("Поле 'synthesis.workers' должно быть >= 1")


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _validate_atoms(atoms: list) -> None:
    """Проверяет записи [ξ, вес, фаза] до построения меры."""
    dims = set()
    for index, entry in enumerate(atoms):
        where = f"Атом #{index} в 'measure.atoms'"
        if not isinstance(entry, list) or len(entry) not in (2, 3):
            raise ConfigError(f"{where} должен иметь вид [ξ, вес, фаза]")
        xi = entry[0] if isinstance(entry[0], list) else [entry[0]]
        weight = entry[1]
        phase = entry[2] if len(entry) == 3 else 0.0
        if not xi or not all(_is_number(v) for v in xi):
            raise ConfigError(f"{where}: частота должна быть непустым списком чисел")
        if not _is_number(weight) or weight <= 0:
            raise ConfigError(f"{where}: вес должен быть положительным числом, получено {weight!r}")
        if not _is_number(phase) or abs(phase) > math.pi:
            raise ConfigError(f"{where}: фаза должна лежать в [-π, π], получено {phase!r}")
        dims.add(len(xi))
    if len(dims) > 1:
        raise ConfigError(f"Поле 'measure.atoms' содержит атомы разных размерностей: {sorted(dims)}")


def validate_config(config: ExperimentConfig) -> None:
    """Валидирует загруженную конфигурацию целиком."""
    if config.command not in COMMANDS:
        raise ConfigError(f"Неизвестная команда: {config.command}")

    if config.measure.kind not in MEASURE_KINDS:
        raise ConfigError(f"Поле 'measure.kind' некорректно: {config.measure.kind}")
    if config.measure.kind == 'atoms':
        if not config.measure.atoms:
            raise ConfigError("Поле 'measure.atoms' не может быть пустым для kind = atoms")
        _validate_atoms(config.measure.atoms)
    if config.measure.dim < 1:
        raise ConfigError("Поле 'measure.dim' должно быть >= 1")

    validate_synthesis_config(config.synthesis)

    if config.measure.kind == 'hard_instance':
        # оценки считаются по [synthesis], граница снизу по [measure]
        if config.measure.smoothness != config.synthesis.smoothness:
            raise ConfigError(
                f"Поля 'measure.smoothness' ({config.measure.smoothness}) и "
                f"'synthesis.smoothness' ({config.synthesis.smoothness}) должны совпадать")
        if config.measure.radius != config.synthesis.radius:
            raise ConfigError(
                f"Поля 'measure.radius' ({config.measure.radius}) и "
                f"'synthesis.radius' ({config.synthesis.radius}) должны совпадать")

    budgets = config.sweep.budgets
    if not budgets:
        raise ConfigError("Поле 'sweep.budgets' не может быть пустым")
    if any(b < 2 for b in budgets):
        raise ConfigError("Все значения 'sweep.budgets' должны быть >= 2")
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ConfigError("Поле 'sweep.budgets' должно строго возрастать")
    if not config.sweep.depths:
        raise ConfigError("Поле 'sweep.depths' не может быть пустым")
    for depth in config.sweep.depths:
        if depth < 1 or depth > config.synthesis.smoothness:
            raise ConfigError(f"Глубина {depth} в 'sweep.depths' должна лежать в [1, K]")
        if depth > budgets[0]:
            raise ConfigError(f"Глубина {depth} в 'sweep.depths' превышает минимальный бюджет")

    if config.verify.crossing_trials < 1:
        raise ConfigError("Поле 'verify.crossing_trials' должно быть >= 1")
    if config.verify.grid_points < 2:
        raise ConfigError("Поле 'verify.grid_points' должно быть >= 2")

    valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
    if config.logging.level.upper() not in valid_levels:
        raise ConfigError(f"Некорректный уровень логирования: {config.logging.level}")


def apply_overrides(config: ExperimentConfig,
                    budgets: Optional[Sequence[int]] = None,
                    depths: Optional[Sequence[int]] = None,
                    seed: Optional[int] = None,
                    out: Optional[str] = None) -> ExperimentConfig:
    """
    Применяет флаги командной строки поверх конфигурации (флаги имеют приоритет).

    Для команды synthesize используется первое значение списков бюджетов и глубин.

    Returns:
        ExperimentConfig: Новый объект конфигурации (исходный не изменяется)
    """
    synthesis = config.synthesis
    sweep = config.sweep
    output = config.output

    if budgets:
        synthesis = replace(synthesis, budget=int(budgets[0]))
        sweep = replace(sweep, budgets=[int(b) for b in budgets])
    if depths:
        synthesis = replace(synthesis, depth=int(depths[0]))
        sweep = replace(sweep, depths=[int(d) for d in depths])
    if seed is not None:
        synthesis = replace(synthesis, seed=int(seed))
    if out:
        target = Path(out)
        if config.command == 'sweep':
            output = replace(output, csv=target)
        else:
            output = replace(output, report=target)

    updated = replace(config, synthesis=synthesis, sweep=sweep, output=output)
    validate_config(updated)
    return updated


def load_config(config_path: str = "config/settings.ini", command: str = 'synthesize') -> ExperimentConfig:
    """
    Удобная функция для быстрой загрузки конфигурации.

    Args:
        config_path: Путь к файлу конфигурации
        command: Команда CLI

    Returns:
        ExperimentConfig: Объект конфигурации
    """
    loader = ConfigLoader(config_path)
    return loader.load_config(command)
