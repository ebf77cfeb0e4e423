"""
Главный модуль CLI интерфейса fourier2relu.

Предоставляет команды синтеза сети, развертки по бюджетам и наборов
проверок верхних и нижних оценок.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from rich.console import Console
from rich.table import Table

try:
    from .config_loader import ConfigError, ExperimentConfig, apply_overrides, load_config
    from .fourier import MeasureError
    from .harness import ExperimentError, ExperimentRunner, VerifyReport, emit_csv, write_json
    from .logger import Fourier2ReluLogger
    from .lowerbound import LowerBoundError
    from .piecewise import PiecewiseError, dump_pwl_csv, from_network_1d
    from .relu_net import NetworkError, save_network
    from .sinusoid import SinusoidError
    from .synthesizer import SynthesisError
    from .waveform import WaveformError
except ImportError:
    from config_loader import ConfigError, ExperimentConfig, apply_overrides, load_config
    from fourier import MeasureError
    from harness import ExperimentError, ExperimentRunner, VerifyReport, emit_csv, write_json
    from logger import Fourier2ReluLogger
    from lowerbound import LowerBoundError
    from piecewise import PiecewiseError, dump_pwl_csv, from_network_1d
    from relu_net import NetworkError, save_network
    from sinusoid import SinusoidError
    from synthesizer import SynthesisError
    from waveform import WaveformError


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2

RUNTIME_ERRORS = (ExperimentError, NetworkError, PiecewiseError, SynthesisError,
                  MeasureError, WaveformError, SinusoidError, LowerBoundError, OSError)


class Fourier2ReluCLI:
    """Класс для обработки команд CLI."""

    def __init__(self, console: Optional[Console] = None):
        self.config: Optional[ExperimentConfig] = None
        self.logger: Optional[Fourier2ReluLogger] = None
        self.runner: Optional[ExperimentRunner] = None
        self.console = console or Console()

    def setup(self, args) -> int:
        """
        Загружает конфигурацию, применяет флаги и создает драйвер.

        Returns:
            int: 0 при успехе, 2 при ошибке конфигурации
        """
        try:
            config = load_config(args.config, args.command)
            config = apply_overrides(config, budgets=args.budget, depths=args.depth,
                                     seed=args.seed, out=args.out)
        except (ConfigError, FileNotFoundError) as e:
            self.console.print(f"❌ Ошибка конфигурации: {e}")
            return EXIT_CONFIG_ERROR

        if args.workers:
            config = replace(config, synthesis=replace(config.synthesis, workers=args.workers))
        if args.timing:
            config = replace(config, output=replace(config.output, timing=True))
        if args.verbose:
            config = replace(config, logging=replace(config.logging, level='DEBUG'))

        self.config = config
        self.logger = Fourier2ReluLogger(config.logging)
        self.logger.log_config_loaded(args.config)
        self.runner = ExperimentRunner(config, self.logger)
        return EXIT_OK

    def cmd_synthesize(self, args) -> int:
        """
        Синтез одной сети и запись ее отчета.

        Returns:
            int: Код возврата (0 - успех, 1 - ошибка)
        """
        net, report = self.runner.run_synthesize()

        table = Table(title="Синтез сети")
        table.add_column("Параметр")
        table.add_column("Значение", justify="right")
        for key, value in report.to_dict().items():
            table.add_row(key, f"{value:.6e}" if isinstance(value, float) else str(value))
        self.console.print(table)

        network_path = args.save_net or self.config.output.network
        if network_path:
            path = save_network(net, network_path)
            self.logger.log_file_operation('write', path)
        if self.config.output.report:
            path = write_json(report.to_dict(), self.config.output.report)
            self.logger.log_file_operation('write', path)

        pwl_path = args.dump_pwl or self.config.output.pwl
        if pwl_path:
            if net.input_dim != 1:
                self.console.print("⚠️ Изломы записываются только для сетей с одним входом")
            else:
                path = dump_pwl_csv(from_network_1d(net), pwl_path)
                self.logger.log_file_operation('write', path)
        return EXIT_OK

    def cmd_sweep(self, args) -> int:
        """
        Развертка по глубинам и бюджетам с записью CSV.

        Returns:
            int: Код возврата (0 - успех, 1 - ошибка)
        """
        result = self.runner.run_sweep()

        table = Table(title="Развертка")
        for column in ("D", "N₀", "нейронов", "потеря", "верхняя граница", "нижняя граница"):
            table.add_column(column, justify="right")
        for record in result.records:
            table.add_row(str(record.depth), str(record.N0), str(record.unit_count),
                          f"{record.loss:.4e}", f"{record.upper_bound:.4e}", f"{record.lower_floor:.4e}")
        self.console.print(table)

        for depth, slope in result.slopes.items():
            expected = -depth / self.config.synthesis.smoothness
            shown = "пропущен" if slope is None else f"{slope:.3f}"
            self.console.print(f"📈 D={depth}: наклон {shown} (ожидается {expected:.3f})")

        csv_path = self.config.output.csv
        if csv_path:
            path = emit_csv(result.records, csv_path, timing=self.config.output.timing)
            self.logger.log_file_operation('write', path)
            meta = write_json(result.metadata(), Path(csv_path).with_suffix('.json'))
            self.logger.log_file_operation('write', meta)
        return EXIT_OK

    def _run_suite(self, suite: str, load_net: Optional[Path] = None) -> int:
        report = self.runner.run_verify(suite, load_net)
        self._print_verify(suite, report)
        if self.config.output.report:
            path = write_json(report.to_dict(), self.config.output.report)
            self.logger.log_file_operation('write', path)
        return EXIT_OK if report.passed else EXIT_FAILURE

    def _print_verify(self, suite: str, report: VerifyReport) -> None:
        table = Table(title=f"Проверки: {suite}")
        table.add_column("Модуль")
        table.add_column("Инвариант")
        table.add_column("Итог")
        table.add_column("Входные данные")
        for check in report.checks:
            table.add_row(check.module, check.invariant, "✅" if check.passed else "❌", check.details)
        self.console.print(table)
        if report.passed:
            self.console.print(f"✅ Все проверки пройдены ({len(report.checks)})")
        else:
            self.console.print(f"❌ Нарушено проверок: {len(report.failures)} из {len(report.checks)}")

    def cmd_verify_upper(self, args) -> int:
        """Набор проверок верхней оценки."""
        return self._run_suite('verify-upper')

    def cmd_verify_lower(self, args) -> int:
        """Набор проверок нижней оценки; --load-net добавляет внешнюю сеть."""
        return self._run_suite('verify-lower', args.load_net)

    def cmd_oracle_suite(self, args) -> int:
        """Сверка с независимыми оракулами."""
        return self._run_suite('oracle-suite')


def create_parser() -> argparse.ArgumentParser:
    """
    Создает парсер аргументов командной строки.

    Returns:
        argparse.ArgumentParser: Настроенный парсер
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default='config/settings.ini',
                        help='Путь к файлу конфигурации (по умолчанию: config/settings.ini)')
    common.add_argument('--verbose', '-v', action='store_true', help='Подробный вывод')
    common.add_argument('--budget', type=int, action='append',
                        help='Бюджет нейронов N₀ (можно повторять)')
    common.add_argument('--depth', type=int, action='append', help='Глубина D (можно повторять)')
    common.add_argument('--seed', type=int, help='Зерно генератора случайных чисел')
    common.add_argument('--out', help='Путь к выходному файлу (CSV для sweep, отчет для остальных)')
    common.add_argument('--workers', type=int, help='Число потоков')
    common.add_argument('--timing', action='store_true', help='Добавить в CSV столбец wall_time')

    parser = argparse.ArgumentParser(
        prog='fourier2relu',
        description="Компиляция функций, заданных рядом Фурье, в глубокие ReLU-сети",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Примеры использования:

  # Синтез сети по конфигурации
  python src/main.py synthesize --config config/settings.ini --save-net net.json

  # Развертка по бюджетам
  python src/main.py sweep --budget 64 --budget 256 --budget 1024 --out results/sweep.csv

  # Проверки
  python src/main.py verify-upper
  python src/main.py verify-lower --load-net net.json
  python src/main.py oracle-suite
        """
    )
    subparsers = parser.add_subparsers(dest='command', help='Доступные команды')

    synth_parser = subparsers.add_parser('synthesize', parents=[common], help='Синтез одной сети')
    synth_parser.add_argument('--save-net', type=Path, help='Куда сохранить сеть')
    synth_parser.add_argument('--dump-pwl', type=Path, help='CSV с изломами одномерной сети')

    subparsers.add_parser('sweep', parents=[common], help='Развертка по бюджетам и глубинам')
    subparsers.add_parser('verify-upper', parents=[common], help='Проверки верхней оценки')
    lower_parser = subparsers.add_parser('verify-lower', parents=[common], help='Проверки нижней оценки')
    lower_parser.add_argument('--load-net', type=Path, help='Проверить сеть из файла')
    subparsers.add_parser('oracle-suite', parents=[common], help='Сверка с оракулами')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Главная функция CLI."""
    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_FAILURE

    cli = Fourier2ReluCLI()
    status = cli.setup(args)
    if status != EXIT_OK:
        return status

    commands = {
        'synthesize': cli.cmd_synthesize,
        'sweep': cli.cmd_sweep,
        'verify-upper': cli.cmd_verify_upper,
        'verify-lower': cli.cmd_verify_lower,
        'oracle-suite': cli.cmd_oracle_suite,
    }
    try:
        return commands[args.command](args)
    except KeyboardInterrupt:
        cli.console.print("\n⚠️ Операция прервана пользователем")
        return EXIT_FAILURE
    except RUNTIME_ERRORS as e:
        cli.logger.log_critical_error("Ошибка выполнения команды", e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
