"""
Тесты для модуля main.py
"""

import json
from pathlib import Path
from unittest.mock import Mock, patch

import pytest

from src.config_loader import ConfigError
from src.fourier import MeasureError
from src.harness import load_csv
from src.lowerbound import LowerBoundError
from src.main import EXIT_CONFIG_ERROR, EXIT_FAILURE, EXIT_OK, Fourier2ReluCLI, create_parser, main
from src.relu_net import load_network
from src.sinusoid import SinusoidError
from src.waveform import WaveformError


CONFIG_TEMPLATE = """[measure]
kind = hard_instance
smoothness = 2
radius = 1.0
oscillations = 4

[synthesis]
depth = 1
budget = 200
radius = 1.0
smoothness = {smoothness}
retries = 2
seed = 3
loss_samples = 2000

[sweep]
depths = 1
budgets = 100, 200

[verify]
crossing_trials = 3
lemma5_networks = 4
grid_points = 101
seed = 1

[output]
csv =
network =
report =
counterexamples = {root}/counterexamples

[logging]
level = INFO
log_file = {root}/logs/test.log
max_log_size = 1
backup_count = 1
"""


@pytest.fixture
def config_file(tmp_path) -> Path:
    path = tmp_path / 'settings.ini'
    path.write_text(CONFIG_TEMPLATE.format(root=tmp_path.as_posix(), smoothness=2), encoding='utf-8')
    return path


class TestCreateParser:
    """Тесты парсера аргументов."""

    def test_commands(self):
        """Все подкоманды разбираются."""
        parser = create_parser()
        for command in ('synthesize', 'sweep', 'verify-upper', 'verify-lower', 'oracle-suite'):
            assert parser.parse_args([command]).command == command

    def test_repeatable_flags(self):
        """--budget и --depth можно повторять."""
        args = create_parser().parse_args(['sweep', '--budget', '64', '--budget', '128', '--depth', '2', '--timing'])
        assert args.budget == [64, 128]
        assert args.depth == [2]
        assert args.timing is True
        assert args.config == 'config/settings.ini'

    def test_command_specific_flags(self):
        """--save-net и --dump-pwl у synthesize, --load-net у verify-lower."""
        parser = create_parser()
        args = parser.parse_args(['synthesize', '--save-net', 'net.json', '--dump-pwl', 'pwl.csv'])
        assert args.save_net == Path('net.json')
        assert args.dump_pwl == Path('pwl.csv')
        assert parser.parse_args(['verify-lower', '--load-net', 'x.json']).load_net == Path('x.json')
        with pytest.raises(SystemExit):
            parser.parse_args(['sweep', '--load-net', 'x.json'])


class TestSetup:
    """Тесты инициализации CLI."""

    def test_missing_config(self, tmp_path):
        """Отсутствующий файл конфигурации - код 2."""
        assert main(['synthesize', '--config', str(tmp_path / 'missing.ini')]) == EXIT_CONFIG_ERROR

    def test_invalid_config(self, tmp_path):
        """D > K - код 2."""
        path = tmp_path / 'bad.ini'
        path.write_text(CONFIG_TEMPLATE.format(root=tmp_path.as_posix(), smoothness=2), encoding='utf-8')
        assert main(['synthesize', '--config', str(path), '--depth', '3']) == EXIT_CONFIG_ERROR

    def test_invalid_atoms(self, tmp_path):
        """Отрицательный вес атома - код 2 без трассировки."""
        path = tmp_path / 'atoms.ini'
        text = CONFIG_TEMPLATE.format(root=tmp_path.as_posix(), smoothness=2)
        text = text.replace("kind = hard_instance", "kind = atoms\natoms = [[[1.0], -2.0, 0.0]]")
        path.write_text(text, encoding='utf-8')
        assert main(['synthesize', '--config', str(path)]) == EXIT_CONFIG_ERROR

    def test_mismatched_smoothness(self, tmp_path):
        """Разные K в [measure] и [synthesis] - код 2."""
        path = tmp_path / 'mismatch.ini'
        text = CONFIG_TEMPLATE.format(root=tmp_path.as_posix(), smoothness=3)
        path.write_text(text, encoding='utf-8')
        assert main(['sweep', '--config', str(path)]) == EXIT_CONFIG_ERROR

    @patch('src.main.load_config')
    def test_config_error_from_loader(self, mock_load_config):
        """ConfigError при загрузке перехватывается."""
        mock_load_config.side_effect = ConfigError("Секция 'measure' не найдена в конфигурации")
        cli = Fourier2ReluCLI(console=Mock())
        args = create_parser().parse_args(['sweep'])

        assert cli.setup(args) == EXIT_CONFIG_ERROR
        assert cli.runner is None
        cli.console.print.assert_called_once()

    def test_flags_applied(self, config_file):
        """Флаги имеют приоритет над файлом."""
        cli = Fourier2ReluCLI(console=Mock())
        args = create_parser().parse_args(['sweep', '--config', str(config_file), '--budget', '50',
                                           '--budget', '70', '--seed', '9', '--workers', '2', '--timing'])
        assert cli.setup(args) == EXIT_OK
        assert cli.config.sweep.budgets == [50, 70]
        assert cli.config.synthesis.seed == 9
        assert cli.config.synthesis.workers == 2
        assert cli.config.output.timing is True

    def test_no_command(self):
        """Без команды выводится справка, код 1."""
        assert main([]) == EXIT_FAILURE


class TestCommands:
    """Тесты команд."""

    def test_synthesize_writes_files(self, config_file, tmp_path):
        """synthesize сохраняет сеть, изломы и отчет."""
        net_path = tmp_path / 'out' / 'net.json'
        pwl_path = tmp_path / 'out' / 'pwl.csv'
        report_path = tmp_path / 'out' / 'report.json'
        status = main(['synthesize', '--config', str(config_file), '--save-net', str(net_path),
                       '--dump-pwl', str(pwl_path), '--out', str(report_path)])

        assert status == EXIT_OK
        net = load_network(net_path)
        report = json.loads(report_path.read_text(encoding='utf-8'))
        assert report['unit_count'] <= 200
        assert net.depth == 1
        assert pwl_path.read_text(encoding='utf-8').startswith('x,value')

    def test_sweep_writes_csv_and_metadata(self, config_file, tmp_path):
        """sweep записывает CSV и JSON с метаданными рядом."""
        csv_path = tmp_path / 'sweep.csv'
        assert main(['sweep', '--config', str(config_file), '--out', str(csv_path)]) == EXIT_OK

        records = load_csv(csv_path)
        assert [r.N0 for r in records] == [100, 200]
        meta = json.loads(csv_path.with_suffix('.json').read_text(encoding='utf-8'))
        assert meta['fit_budgets'] == {'1': [200]}

    def test_verify_lower_with_corrupted_network(self, config_file, tmp_path):
        """Поврежденный файл сети - код 1, путь попадает в отчет."""
        broken = tmp_path / 'broken.json'
        broken.write_text('not a network', encoding='utf-8')
        report_path = tmp_path / 'lower.json'
        status = main(['verify-lower', '--config', str(config_file), '--load-net', str(broken),
                       '--out', str(report_path)])

        assert status == EXIT_FAILURE
        report = json.loads(report_path.read_text(encoding='utf-8'))
        assert report['passed'] is False
        assert any(str(broken) in check['details'] for check in report['checks'] if not check['passed'])

    def test_runtime_error_returns_failure(self, config_file):
        """Ошибка выполнения команды - код 1."""
        with patch('src.main.ExperimentRunner.run_synthesize', side_effect=OSError("disk full")):
            assert main(['synthesize', '--config', str(config_file)]) == EXIT_FAILURE

    @pytest.mark.parametrize("error", [
        MeasureError("мера"), WaveformError("форма"), SinusoidError("синусоида"), LowerBoundError("граница"),
    ])
    def test_domain_errors_return_failure(self, config_file, error):
        """Ошибки предметных модулей перехватываются, код 1."""
        with patch('src.main.ExperimentRunner.run_synthesize', side_effect=error):
            assert main(['synthesize', '--config', str(config_file)]) == EXIT_FAILURE


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
