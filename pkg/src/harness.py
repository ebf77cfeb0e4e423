"""
Драйвер экспериментов: развертки по бюджетам, наборы проверок и запись результатов.

Развертка синтезирует сеть для каждой пары (D, N₀), измеряет потерю и
подбирает наклон log(loss) от log(N₀) по верхней половине бюджетов.
Наборы проверок прогоняют инварианты всех модулей и возвращают список
результатов с модулем, идентификатором инварианта и входными данными.
"""

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

try:
    from .config_loader import ExperimentConfig
    from .fourier import FourierMeasure, gaussian_measure, hard_instance, measure_from_config, scaled_cosine_measure
    from .logger import Fourier2ReluLogger
    from .lowerbound import crossing_bound_sweep, random_net, verify_lemma5
    from .piecewise import from_network_1d
    from .relu_net import NetworkError, ReluNetwork, evaluate_batch, load_network
    from .sinusoid import (GAMMA_COS_BOUND, expectation_oracle, gamma_cos_eval, gamma_cos_layer,
                           monte_carlo_expectation, validity_window)
    from .synthesizer import (Synthesizer, SynthesisReport, check_alpha_chain, deep_cosine_net, embedded_smoothness,
                              plan_deep_cosine, shallow_cosine_net, subnet_expectation, zero_net)
    from .waveform import TriangleParams, check_composition, waveform_layer
except ImportError:
    from config_loader import ExperimentConfig
    from fourier import FourierMeasure, gaussian_measure, hard_instance, measure_from_config, scaled_cosine_measure
    from logger import Fourier2ReluLogger
    from lowerbound import crossing_bound_sweep, random_net, verify_lemma5
    from piecewise import from_network_1d
    from relu_net import NetworkError, ReluNetwork, evaluate_batch, load_network
    from sinusoid import (GAMMA_COS_BOUND, expectation_oracle, gamma_cos_eval, gamma_cos_layer,
                          monte_carlo_expectation, validity_window)
    from synthesizer import (Synthesizer, SynthesisReport, check_alpha_chain, deep_cosine_net, embedded_smoothness,
                             plan_deep_cosine, shallow_cosine_net, subnet_expectation, zero_net)
    from waveform import TriangleParams, check_composition, waveform_layer


CSV_COLUMNS = ['depth', 'K', 'N0', 'unit_count', 'loss', 'upper_bound', 'lower_floor', 'seed']
TIMING_COLUMN = 'wall_time'
SLOPE_SKIP_LOSS = 1e-10


class ExperimentError(Exception):
    """Исключение для ошибок экспериментов и записи результатов."""
    pass


@dataclass
class SweepRecord:
    """Одна точка развертки."""
    depth: int
    K: float
    N0: int
    unit_count: int
    loss: float
    upper_bound: float
    lower_floor: float
    seed: int
    wall_time: float = 0.0


@dataclass
class SweepResult:
    """Точки развертки и подобранные наклоны по глубинам."""
    records: List[SweepRecord]
    slopes: Dict[int, Optional[float]]
    fit_budgets: Dict[int, List[int]]

    def metadata(self) -> dict:
        return {
            'fit_window': 'top half of budgets',
            'slopes': {str(d): s for d, s in self.slopes.items()},
            'expected_slopes': {str(r.depth): -r.depth / r.K for r in self.records},
            'fit_budgets': {str(d): b for d, b in self.fit_budgets.items()},
        }


@dataclass
class CheckResult:
    """Результат проверки одного инварианта."""
    module: str
    invariant: str
    passed: bool
    details: str = ''


@dataclass
class VerifyReport:
    """Сводка прогона наборов проверок."""
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def to_dict(self) -> dict:
        return {
            'passed': self.passed,
            'checks': [check.__dict__ for check in self.checks],
        }


def fit_slope(budgets: Sequence[int], losses: Sequence[float]) -> Optional[float]:
    """
    Наклон МНК log(loss) от log(N₀) по верхней половине бюджетов.

    Returns:
        Optional[float]: Наклон или None, если точек меньше двух или потери пренебрежимо малы
    """
    budgets = np.asarray(budgets, dtype=float)
    losses = np.asarray(losses, dtype=float)
    order = np.argsort(budgets)
    budgets, losses = budgets[order], losses[order]
    top = slice(len(budgets) // 2, None)
    budgets, losses = budgets[top], losses[top]
    if budgets.size < 2 or np.any(losses <= SLOPE_SKIP_LOSS):
        return None
    slope, _ = np.polyfit(np.log(budgets), np.log(losses), 1)
    return float(slope)


def emit_csv(records: Sequence[SweepRecord], path: Path, timing: bool = False) -> Path:
    """
    Записывает точки развертки в CSV (заголовок, затем по строке на точку).

    Raises:
        ExperimentError: Ошибка записи (с путем к файлу)
    """
    path = Path(path)
    columns = CSV_COLUMNS + ([TIMING_COLUMN] if timing else [])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(columns)
            for record in records:
                writer.writerow([_format_cell(getattr(record, column)) for column in columns])
    except OSError as e:
        raise ExperimentError(f"Ошибка записи CSV {path}: {e}")
    return path


def _format_cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def load_csv(path: Path) -> List[SweepRecord]:
    """
    Читает CSV, записанный emit_csv.

    Raises:
        ExperimentError: Ошибка чтения или разбора (с путем к файлу)
    """
    path = Path(path)
    try:
        with open(path, newline='', encoding='utf-8') as handle:
            rows = list(csv.DictReader(handle))
    except OSError as e:
        raise ExperimentError(f"Ошибка чтения CSV {path}: {e}")
    try:
        return [
            SweepRecord(
                depth=int(row['depth']), K=float(row['K']), N0=int(row['N0']),
                unit_count=int(row['unit_count']), loss=float(row['loss']),
                upper_bound=float(row['upper_bound']), lower_floor=float(row['lower_floor']),
                seed=int(row['seed']), wall_time=float(row.get(TIMING_COLUMN) or 0.0),
            )
            for row in rows
        ]
    except (KeyError, ValueError) as e:
        raise ExperimentError(f"Некорректный CSV {path}: {e}")


def write_json(document: dict, path: Path) -> Path:
    """Записывает JSON-отчет."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(document, indent=2, ensure_ascii=False), encoding='utf-8')
    except OSError as e:
        raise ExperimentError(f"Ошибка записи отчета {path}: {e}")
    return path


class ExperimentRunner:
    """Запуск синтеза, разверток и проверок по конфигурации эксперимента."""

    def __init__(self, config: ExperimentConfig, logger: Optional[Fourier2ReluLogger] = None):
        """
        Инициализация драйвера.

        Args:
            config: Конфигурация эксперимента
            logger: Логгер для записи операций
        """
        self.config = config
        self.logger = logger or Fourier2ReluLogger.from_logger()
        self.suites: Dict[str, List[Tuple[str, Callable[[VerifyReport], None]]]] = {
            'verify-upper': [
                ('composition', self._check_composition),
                ('unit-counts', self._check_unit_counts),
                ('deep-cosine', self._check_deep_cosine),
                ('norm-identities', self._check_norm_identities),
                ('gaussian-scaling', self._check_gaussian_scaling),
                ('class-embedding', self._check_class_embedding),
            ],
            'verify-lower': [
                ('crossing-bound', self._check_crossing_bound),
                ('lemma5', self._check_lemma5),
            ],
            'oracle-suite': [
                ('sinusoid-oracle', self._check_sinusoid_oracle),
                ('monte-carlo', self._check_monte_carlo),
                ('pwl-consistency', self._check_pwl_consistency),
                ('measure-sampling', self._check_measure_sampling),
            ],
        }

    def measure(self) -> FourierMeasure:
        return measure_from_config(self.config.measure)

    def _lower_floor(self, net: ReluNetwork) -> float:
        measure_config = self.config.measure
        if measure_config.kind != 'hard_instance' or net.input_dim != 1:
            return float('nan')
        report = verify_lemma5(net, measure_config.smoothness, measure_config.radius,
                               measure_config.oscillations)
        return report.lemma5_floor

    def run_synthesize(self) -> Tuple[ReluNetwork, SynthesisReport]:
        """Синтез одной сети по секции [synthesis]."""
        return Synthesizer(self.config.synthesis, self.logger).synthesize(self.measure())

    def _sweep_point(self, measure: FourierMeasure, depth: int, budget: int, workers: int) -> SweepRecord:
        seed = int(np.random.SeedSequence([self.config.synthesis.seed, depth, budget]).generate_state(1)[0])
        synthesis = replace(self.config.synthesis, depth=depth, budget=budget, seed=seed, workers=workers)
        start = time.perf_counter()
        net, report = Synthesizer(synthesis, self.logger).synthesize(measure)
        record = SweepRecord(
            depth=depth, K=synthesis.smoothness, N0=budget, unit_count=report.unit_count,
            loss=report.loss, upper_bound=report.bound, lower_floor=self._lower_floor(net),
            seed=seed, wall_time=time.perf_counter() - start,
        )
        self.logger.log_sweep_point(depth, budget, record.unit_count, record.loss)
        return record

    def run_sweep(self) -> SweepResult:
        """
        Синтез для каждой пары (D, N₀) и подбор наклонов.

        Точки считаются в пуле потоков и сортируются по (D, N₀), поэтому
        результат не зависит от порядка выполнения.
        """
        measure = self.measure()
        points = [(d, b) for d in self.config.sweep.depths for b in self.config.sweep.budgets]
        workers = self.config.synthesis.workers

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(lambda p: self._sweep_point(measure, p[0], p[1], 1), points))
        else:
            records = [self._sweep_point(measure, d, b, 1) for d, b in points]
        records.sort(key=lambda r: (r.depth, r.N0))

        slopes: Dict[int, Optional[float]] = {}
        fit_budgets: Dict[int, List[int]] = {}
        for depth in self.config.sweep.depths:
            selected = [r for r in records if r.depth == depth]
            budgets = [r.N0 for r in selected]
            slopes[depth] = fit_slope(budgets, [r.loss for r in selected])
            fit_budgets[depth] = budgets[len(budgets) // 2:]
            self.logger.log_slope(depth, slopes[depth], -depth / self.config.synthesis.smoothness)
        return SweepResult(records=records, slopes=slopes, fit_budgets=fit_budgets)

    def run_verify(self, suite: str, load_net: Optional[Path] = None) -> VerifyReport:
        """
        Прогоняет набор проверок.

        Args:
            suite: verify-upper, verify-lower или oracle-suite
            load_net: Внешний файл сети для проверки нижней оценки

        Raises:
            ExperimentError: Если набор неизвестен
        """
        if suite not in self.suites:
            raise ExperimentError(f"Неизвестный набор проверок: {suite}")
        report = VerifyReport()
        for name, check in self.suites[suite]:
            self.logger.log_system_info(f"Набор {suite}: {name}")
            check(report)
        if load_net is not None:
            self._check_loaded_network(report, Path(load_net))
        return report

    def _record(self, report: VerifyReport, module: str, invariant: str, passed: bool, details: str = '') -> None:
        report.checks.append(CheckResult(module, invariant, bool(passed), details))
        self.logger.log_check_result(module, invariant, bool(passed), details)

    def _rng(self, *salt: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.config.verify.seed, *salt]))

    def _check_composition(self, report: VerifyReport) -> None:
        rng = self._rng(1)
        for _ in range(20):
            k, l = int(rng.integers(1, 6)), int(rng.integers(1, 6))
            alpha, beta = rng.uniform(0.1, 2.0), rng.uniform(0.1, 3.0)
            a = alpha * beta / (2 * l)
            inner = TriangleParams(alpha, beta, k)
            outer = TriangleParams(a, rng.uniform(0.1, 3.0), l)
            self._record(report, 'waveform', 'composition', check_composition(inner, outer),
                         f"k={k}, l={l}, α={alpha:.4f}, β={beta:.4f}")

    def _check_unit_counts(self, report: VerifyReport) -> None:
        waveform_ok = all(waveform_layer(TriangleParams(1.0, 1.0, k))[0].width == 4 * k + 1 for k in range(1, 21))
        self._record(report, 'waveform', 'unit-count', waveform_ok, "4k+1, k=1…20")
        gamma_ok = all(gamma_cos_layer(0.3, 2.0, n)[0].width == 16 * n + 16 for n in range(11))
        self._record(report, 'sinusoid', 'unit-count', gamma_ok, "16n+16, n=0…10")

        rng = self._rng(2)
        worst = 0.0
        for norm in np.exp(rng.uniform(0.0, np.log(1e4), 100)):
            for depth in (2, 3):
                plan = plan_deep_cosine(float(norm), 1.0, depth)
                worst = max(worst, plan.unit_count / plan.unit_bound())
        self._record(report, 'synthesizer', 'unit-bound', worst <= 1.0, f"max отношение {worst:.4f}")

    def _check_deep_cosine(self, report: VerifyReport) -> None:
        radius = self.config.synthesis.radius
        grid = np.linspace(-radius, radius, self.config.verify.grid_points)
        theta = np.pi / 3
        for depth in (2, 3):
            for norm in (1e2, 1e3, 1e4):
                plan = plan_deep_cosine(norm, radius, depth)
                chain_ok = check_alpha_chain(plan)
                self._record(report, 'synthesizer', 'alpha-chain', chain_ok, f"D={depth}, ‖ξ‖={norm:g}")
                expectation = subnet_expectation([norm], theta, radius, depth, grid)
                error = float(np.max(np.abs(expectation - np.cos(norm * grid + theta))))
                self._record(report, 'synthesizer', 'unbiasedness', error <= 1e-7,
                             f"D={depth}, ‖ξ‖={norm:g}, отклонение {error:.2e}")

    def _check_norm_identities(self, report: VerifyReport) -> None:
        for smoothness in (1.0, 2.0, 4.0):
            for radius in (0.5, 1.0, 3.0):
                for oscillations in (1, 8, 64):
                    measure = hard_instance(smoothness, radius, oscillations)
                    omega = 2 * np.pi * oscillations
                    alpha = 1 / (2 * smoothness)
                    c0_ok = np.isclose(measure.c0, omega ** -alpha, rtol=1e-12, atol=0)
                    ck = 0.5 * radius ** (-1 / smoothness) * omega ** (1 / smoothness - alpha)
                    ck_ok = np.isclose(measure.c_alpha(1 / smoothness), ck, rtol=1e-12, atol=0)
                    combo = measure.norm_combo(smoothness, radius)
                    self._record(report, 'fourier', 'norm-identities', c0_ok and ck_ok and 0.5 <= combo <= 1.5,
                                 f"K={smoothness:g}, r={radius:g}, L={oscillations}, комбинация {combo:.6f}")

    def _check_gaussian_scaling(self, report: VerifyReport) -> None:
        for dim in (1, 2, 4, 8, 16, 32):
            measure = gaussian_measure(dim)
            for smoothness in (1.0, 2.0, 4.0):
                closed = measure.c_alpha(1 / smoothness)
                integral = measure.integral_c_alpha(1 / smoothness)
                oracle_ok = np.isclose(closed, integral, rtol=1e-8, atol=0)
                ratio = measure.c0 * (closed + measure.c0) / (dim ** (1 / (2 * smoothness)) + 1)
                self._record(report, 'fourier', 'gaussian-scaling', oracle_ok and 0.5 <= ratio <= 2.0,
                             f"d={dim}, K={smoothness:g}, отношение {ratio:.4f}")

    def _check_class_embedding(self, report: VerifyReport) -> None:
        measures = [hard_instance(1.0, 1.0, 8), gaussian_measure(4), scaled_cosine_measure(9.0, 0.5)]
        for measure in measures:
            for depth in (2, 3):
                lifted = embedded_smoothness(1.0, depth)
                lhs = measure.c_alpha(1.0 / lifted) + measure.c0
                rhs = 2.0 * (measure.c_alpha(1.0) + measure.c0)
                self._record(report, 'fourier', 'class-embedding', lhs <= rhs * (1 + 1e-12),
                             f"d={measure.dim}, D={depth}, {lhs:.6f} <= {rhs:.6f}")

    def _check_crossing_bound(self, report: VerifyReport) -> None:
        trials = self.config.verify.crossing_trials
        rng = self._rng(3)
        settings = [(1, 4), (2, 12), (3, 18)]
        for position, (depth, units) in enumerate(settings):
            count = trials // len(settings) + (1 if position < trials % len(settings) else 0)
            sweep = crossing_bound_sweep(depth, units, max(count, 1), rng,
                                         self.config.output.counterexamples, self.logger)
            self._record(report, 'lowerbound', 'crossing-bound', sweep.passed,
                         f"D={depth}, N₀={units}, max отношение {sweep.max_ratio:.4f}")
            self._record(report, 'lowerbound', 'adversarial-ratio', sweep.adversarial_ratio >= 0.05,
                         f"D={depth}, отношение зигзага {sweep.adversarial_ratio:.4f}")

    def _lemma5_network(self, index: int, rng: np.random.Generator, smoothness: float, radius: float,
                        oscillations: int) -> ReluNetwork:
        frequency = 2 * np.pi * oscillations / radius
        kind = index % 4
        if kind == 0:
            return zero_net(1 + index % 2)
        if kind == 1:
            return shallow_cosine_net([frequency * rng.uniform(0.5, 1.5)], 0.0, rng.random(), radius)
        if kind == 2:
            return deep_cosine_net([frequency * rng.uniform(0.5, 1.5)], 0.0, rng.random(), radius, 2)
        return random_net(rng, int(rng.integers(2, 24)), int(rng.integers(1, 4)))

    def _check_lemma5(self, report: VerifyReport) -> None:
        rng = self._rng(4)
        failed = []
        total = self.config.verify.lemma5_networks
        for index in range(total):
            oscillations = (2, 8, 32)[index % 3]
            smoothness = (1.0, 2.0, 4.0)[(index // 3) % 3]
            net = self._lemma5_network(index, rng, smoothness, 1.0, oscillations)
            result = verify_lemma5(net, smoothness, 1.0, oscillations)
            if not all(result.satisfied):
                failed.append(f"#{index} (L={oscillations}, K={smoothness:g}, Cr={result.crossing})")
        self._record(report, 'lowerbound', 'lemma5-floor', not failed,
                     f"{total} сетей" + (f", нарушения: {', '.join(failed)}" if failed else ''))

    def _check_loaded_network(self, report: VerifyReport, path: Path) -> None:
        measure_config = self.config.measure
        try:
            net = load_network(path)
            self.logger.log_file_operation('read', path)
        except NetworkError as e:
            self.logger.log_file_operation('read', path, success=False)
            self._record(report, 'relu_net', 'deserialize', False, str(e))
            return
        if net.input_dim != 1:
            self._record(report, 'lowerbound', 'loaded-network', False,
                         f"{path}: ожидалась сеть с одним входом")
            return
        result = verify_lemma5(net, measure_config.smoothness, measure_config.radius, measure_config.oscillations)
        self._record(report, 'lowerbound', 'loaded-network', all(result.satisfied),
                     f"{path}: Cr={result.crossing}, потеря {result.measured_loss:.6e}, "
                     f"граница {result.lemma5_floor:.6e}")

    def _check_sinusoid_oracle(self, report: VerifyReport) -> None:
        for omega, n in ((1.0, 0), (5.0, 2), (40.0, 7)):
            lo, hi = validity_window(omega, n)
            grid = np.linspace(lo, hi, self.config.verify.grid_points)
            values = np.array([expectation_oracle(t, omega, n) for t in grid])
            error = float(np.max(np.abs(values - np.cos(omega * grid))))
            self._record(report, 'sinusoid', 'unbiasedness', error <= 1e-8,
                         f"ω={omega:g}, n={n}, отклонение {error:.2e}")

        rng = self._rng(5)
        t = rng.uniform(-50.0, 50.0, 100_000)
        s = rng.random(100_000)
        peak = float(np.max(np.abs(gamma_cos_eval(t, s, 5.0, 3))))
        self._record(report, 'sinusoid', 'bound', peak <= GAMMA_COS_BOUND + 1e-12, f"max |Γ| = {peak:.6f}")

    def _check_monte_carlo(self, report: VerifyReport) -> None:
        for omega, n, t in ((1.0, 0, 0.4), (5.0, 2, -1.1), (40.0, 7, 0.55)):
            mean, stderr = monte_carlo_expectation(t, omega, n, 1_000_000, self.config.verify.seed)
            deviation = abs(mean - np.cos(omega * t))
            self._record(report, 'sinusoid', 'monte-carlo', deviation <= 4 * stderr,
                         f"ω={omega:g}, t={t}, отклонение {deviation:.2e}, σ={stderr:.2e}")

    def _check_pwl_consistency(self, report: VerifyReport) -> None:
        rng = self._rng(6)
        worst = 0.0
        for _ in range(20):
            depth = int(rng.integers(1, 4))
            net = random_net(rng, int(rng.integers(depth, 200)), depth)
            pwl = from_network_1d(net)
            points = rng.uniform(-20.0, 20.0, 10_000)
            exact = evaluate_batch(net, points)
            values = pwl(points)
            error = np.max(np.abs(exact - values) / (1.0 + np.abs(values)))
            worst = max(worst, float(error))
        self._record(report, 'piecewise', 'network-agreement', worst <= 1e-9, f"max отклонение {worst:.2e}")

    def _check_measure_sampling(self, report: VerifyReport) -> None:
        rng = self._rng(7)
        measure = hard_instance(2.0, 1.0, 8)
        xi, _ = measure.sample_nu_batch(100_000, rng)
        observed = np.array([np.sum(xi[:, 0] == f) for f in measure.frequencies[:, 0]])
        expected = 100_000 * measure.weights / np.sum(measure.weights)
        p_value = float(stats.chisquare(observed, expected).pvalue)
        self._record(report, 'fourier', 'sampling-marginal', p_value > 0.001, f"p = {p_value:.4f}")

        z = gaussian_measure(3).cross_check(rng, 1_000_000, 0.5)
        self._record(report, 'fourier', 'sampler-integrator', abs(z) <= 4.0, f"z = {z:.3f}")

        grid = np.linspace(-3.0, 3.0, 2001)
        bound_ok = bool(np.all(np.abs(measure.target_eval(grid)) <= measure.c0 * (1 + 1e-12)))
        self._record(report, 'fourier', 'target-bound', bound_ok, "|f| ≤ C⁰")


def create_runner(config: ExperimentConfig, logger: Optional[Fourier2ReluLogger] = None) -> ExperimentRunner:
    """Фабричная функция для создания драйвера экспериментов."""
    return ExperimentRunner(config, logger)
