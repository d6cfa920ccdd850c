"""Monte Carlo harness: the dispersion table, rate studies and summaries.

Every replication draws from its own stream keyed by
``(master_seed, named_stream_id(experiment, scenario, rep))``, so results do
not depend on the thread count or on the order replications finish.  Within a
replication the error path is drawn first and the predictors second; all
statistics of that replication reuse the same errors.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .empproc import EmpSupResult, estimate_theta, ks_sup, l_sup, scale_from_theta
from .lrd import Backend, LrdSpec, gaussian_family, generate_path, make_spec
from .regress import bandwidth_default, fit_ls, fit_ls_known_intercept, nw_fit
from .streams import RngStream, StreamKey, make_stream, named_stream_id
from .sums import RateStudyResult, reduction_diag, sigma_n1_exact

__all__ = [
    "TABLE1_STATISTICS",
    "RATE_STATISTICS",
    "X_LAWS",
    "ExperimentConfig",
    "RateStudyConfig",
    "McSummary",
    "Table1Result",
    "summarize",
    "draw_design",
    "map_reps",
    "replication_statistics",
    "run_table1",
    "run_rate_study",
    "expected_slope",
    "run_reduction_study",
]

log = logging.getLogger(__name__)

TABLE1_STATISTICS = ("Kn", "Ln", "KnHat", "LnHat", "KnHatKnownB0", "LnHatKnownB0")
RATE_STATISTICS = TABLE1_STATISTICS + ("KnHatNW",)
X_LAWS = ("uniform_sym", "uniform01", "normal")

_STANDARD = gaussian_family(1.0)


def draw_design(x_law: str, n: int, stream: RngStream) -> np.ndarray:
    """Predictors: ``uniform_sym`` is U(-1, 1), ``uniform01`` is U(0, 1)."""
    if x_law == "uniform_sym":
        return stream.uniform(-1.0, 1.0, n)
    if x_law == "uniform01":
        return stream.uniform(0.0, 1.0, n)
    if x_law == "normal":
        return stream.standard_normal(n)
    raise ValueError(f"unknown predictor law {x_law!r}; choose from {X_LAWS}")


def map_reps(fn: Callable[[int], object], reps: int, threads: int = 1) -> list:
    """``[fn(0), .., fn(reps-1)]``, optionally on a thread pool; order is preserved."""
    if threads <= 1:
        return [fn(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps)))


@dataclass(frozen=True)
class McSummary:
    statistic: str
    scenario: str
    q1: float
    q3: float
    sd: float
    mean: float
    reps: int

    def row(self, **extra) -> dict:
        d = asdict(self)
        d.update(extra)
        return d


def summarize(values, statistic: str = "", scenario: str = "") -> McSummary:
    """Quartiles (linear interpolation at position ``1 + (n-1) p``), sd (divisor n-1), mean."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        raise ValueError("need at least two values to summarize")
    q1, q3 = np.quantile(v, [0.25, 0.75], method="linear")
    return McSummary(statistic, scenario, float(q1), float(q3), float(np.std(v, ddof=1)),
                     float(np.mean(v)), len(v))


@dataclass(frozen=True)
class Model:
    beta0: float = 1.0
    beta1: float = 4.0
    x_law: str = "uniform_sym"


def replication_statistics(eps, x, model: Model, statistics: Sequence[str],
                           nw_bandwidth: Optional[float] = None,
                           kernel: str = "epanechnikov") -> dict:
    """Sup statistics of one replication.

    Returns ``{name: (EmpSupResult, theta_hat)}`` where ``theta_hat`` is the
    estimated variance for the ``L`` statistics and ``None`` otherwise.
    """
    out: dict[str, tuple[EmpSupResult, Optional[float]]] = {}
    wanted = set(statistics)
    y = model.beta0 + model.beta1 * x + eps

    def both(tag, sample):
        if "Kn" + tag in wanted:
            out["Kn" + tag] = (ks_sup(sample, _STANDARD), None)
        if "Ln" + tag in wanted:
            theta = estimate_theta(sample)
            out["Ln" + tag] = (l_sup(sample, scale_from_theta(theta)), theta)

    both("", eps)
    if wanted & {"KnHat", "LnHat"}:
        both("Hat", fit_ls(x, y).residuals)
    if wanted & {"KnHatKnownB0", "LnHatKnownB0"}:
        both("HatKnownB0", fit_ls_known_intercept(x, y, model.beta0).residuals)
    if "KnHatNW" in wanted:
        b = nw_bandwidth if nw_bandwidth is not None else bandwidth_default(len(x))
        fit = nw_fit(x, y, b, kernel)
        out["KnHatNW"] = (ks_sup(fit.usable_residuals, _STANDARD), None)
    missing = wanted - set(out)
    if missing:
        raise ValueError(f"unknown statistics: {sorted(missing)}")
    return out


def _check_statistics(statistics, allowed):
    bad = [s for s in statistics if s not in allowed]
    if bad:
        raise ValueError(f"unknown statistics {bad}; choose from {list(allowed)}")


def _check_alphas(alphas):
    for a in alphas:
        if not 0.0 < a < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {a}")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 100
    reps: int = 1000
    alphas: tuple = (0.2, 0.4, 0.6, 0.8)
    include_iid: bool = True
    backend: str = "fgn"
    beta0: float = 1.0
    beta1: float = 4.0
    x_law: str = "uniform_sym"
    statistics: tuple = TABLE1_STATISTICS
    master_seed: int = 0
    threads: int = 1
    truncation_m: Optional[int] = None

    def __post_init__(self):
        if self.reps < 2:
            raise ValueError("reps must be >= 2")
        if self.n < 3:
            raise ValueError("n must be >= 3")
        _check_alphas(self.alphas)
        Backend(self.backend)
        if self.x_law not in X_LAWS:
            raise ValueError(f"unknown predictor law {self.x_law!r}")
        _check_statistics(self.statistics, TABLE1_STATISTICS)
        if not self.include_iid and not self.alphas:
            raise ValueError("no scenarios: give alphas or include the i.i.d. case")

    @property
    def model(self) -> Model:
        return Model(self.beta0, self.beta1, self.x_law)

    def scenarios(self) -> list[tuple[str, LrdSpec]]:
        out = []
        if self.include_iid:
            out.append(("iid", LrdSpec(alpha=None, backend=Backend.IID)))
        for a in self.alphas:
            out.append((f"alpha={a:g}", make_spec(a, self.backend, n=self.n, truncation_m=self.truncation_m)))
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alphas"] = list(self.alphas)
        d["statistics"] = list(self.statistics)
        return d


@dataclass
class Table1Result:
    config: ExperimentConfig
    summaries: list = field(default_factory=list)
    # (scenario, statistic) -> per-rep arrays "sup_value", "argmax_x", "theta_hat"
    raw: dict = field(default_factory=dict)
    backends: dict = field(default_factory=dict)

    def summary(self, scenario: str, statistic: str) -> McSummary:
        for s in self.summaries:
            if s.scenario == scenario and s.statistic == statistic:
                return s
        raise KeyError((scenario, statistic))

    def rows(self) -> list[dict]:
        c = self.config
        return [s.row(n=c.n, seed=c.master_seed, backend=self.backends[s.scenario])
                for s in self.summaries]

    def raw_rows(self) -> list[dict]:
        rows = []
        for (scenario, statistic), arrays in self.raw.items():
            alpha = arrays["alpha"]
            for rep in range(len(arrays["sup_value"])):
                theta = arrays["theta_hat"][rep]
                rows.append({
                    "rep": rep, "statistic": statistic, "scenario": scenario,
                    "sup_value": arrays["sup_value"][rep], "argmax_x": arrays["argmax_x"][rep],
                    "theta_hat": None if np.isnan(theta) else theta,
                    "n": self.config.n, "alpha": alpha, "backend": self.backends[scenario],
                })
        return rows


def _collect(results: list[dict], statistics) -> dict:
    arrays = {}
    for name in statistics:
        sup = np.array([r[name][0].sup_value for r in results])
        arg = np.array([r[name][0].argmax_x for r in results])
        theta = np.array([np.nan if r[name][1] is None else r[name][1] for r in results])
        arrays[name] = {"sup_value": sup, "argmax_x": arg, "theta_hat": theta}
    return arrays


def run_table1(config: ExperimentConfig) -> Table1Result:
    """Quartiles and sd of each sup statistic, per error scenario."""
    result = Table1Result(config)
    model = config.model
    for scenario, spec in config.scenarios():
        log.info("table1: scenario %s (%s), %d reps", scenario, spec.backend.value, config.reps)

        def one(rep, scenario=scenario, spec=spec):
            stream = make_stream(StreamKey(config.master_seed, named_stream_id("table1", scenario, rep)))
            eps = generate_path(spec, config.n, stream).values
            x = draw_design(config.x_law, config.n, stream)
            return replication_statistics(eps, x, model, config.statistics)

        per_rep = map_reps(one, config.reps, config.threads)
        result.backends[scenario] = spec.backend.value
        for name, arrays in _collect(per_rep, config.statistics).items():
            arrays["alpha"] = spec.alpha
            result.raw[(scenario, name)] = arrays
            result.summaries.append(summarize(arrays["sup_value"], name, scenario))
    return result


@dataclass(frozen=True)
class RateStudyConfig:
    alpha: float = 0.3
    n_grid: tuple = (512, 1024, 2048, 4096, 8192)
    reps: int = 200
    statistics: tuple = ("Kn", "KnHat")
    backend: str = "ma"
    beta0: float = 1.0
    beta1: float = 4.0
    x_law: str = "uniform_sym"
    master_seed: int = 0
    threads: int = 1
    bandwidth_const: float = 1.0
    kernel: str = "epanechnikov"

    def __post_init__(self):
        _check_alphas([self.alpha])
        if self.reps < 2:
            raise ValueError("reps must be >= 2")
        if len(self.n_grid) < 3:
            raise ValueError("rate studies need at least 3 grid points")
        if len(set(self.n_grid)) != len(self.n_grid) or min(self.n_grid) < 3:
            raise ValueError("grid points must be distinct and >= 3")
        _check_statistics(self.statistics, RATE_STATISTICS)
        Backend(self.backend)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_grid"] = list(self.n_grid)
        d["statistics"] = list(self.statistics)
        return d


def run_rate_study(config: RateStudyConfig) -> dict[str, RateStudyResult]:
    """Dispersion (sd over reps) of each ``n``-normalized sup, and its log-log slope."""
    model = Model(config.beta0, config.beta1, config.x_law)
    disp = {name: [] for name in config.statistics}
    for n in config.n_grid:
        n = int(n)
        spec = make_spec(config.alpha, config.backend, n=n)
        b = bandwidth_default(n, config.bandwidth_const)
        log.info("rates: alpha=%g n=%d", config.alpha, n)

        def one(rep, n=n, spec=spec, b=b):
            key = named_stream_id("rates", f"{config.alpha:g}", n, rep)
            stream = make_stream(StreamKey(config.master_seed, key))
            eps = generate_path(spec, n, stream).values
            x = draw_design(config.x_law, n, stream)
            stats = replication_statistics(eps, x, model, config.statistics, b, config.kernel)
            return {k: v[0].sup_value for k, v in stats.items()}

        per_rep = map_reps(one, config.reps, config.threads)
        for name in config.statistics:
            disp[name].append(float(np.std([r[name] for r in per_rep], ddof=1)))
    return {
        name: RateStudyResult.from_grid(name, config.n_grid, disp[name], reps=config.reps,
                                        alpha=config.alpha, backend=config.backend,
                                        seed=config.master_seed)
        for name in config.statistics
    }


def expected_slope(statistic: str, alpha: float) -> float:
    """Theoretical log-log slope of the dispersion of the ``n``-normalized sup.

    Error-based and known-intercept statistics scale like ``sigma_{n,1}/n``;
    residual statistics with an estimated intercept like
    ``max(sigma_{n,2}, sqrt(n))/n``.
    """
    if statistic in ("Kn", "Ln", "KnHatKnownB0", "LnHatKnownB0"):
        return -alpha / 2.0
    if statistic in ("KnHat", "LnHat", "KnHatNW"):
        return -alpha if alpha < 0.5 else -0.5
    raise ValueError(f"unknown statistic {statistic!r}")


def run_reduction_study(alpha: float, n_grid: Sequence[int], reps: int, master_seed: int = 0,
                        p: int = 1, threads: int = 1) -> dict[int, np.ndarray]:
    """Per-rep values of ``sup|S_{n,p}| / sigma_{n,1}`` for each ``n`` (MA errors)."""
    _check_alphas([alpha])
    out = {}
    for n in n_grid:
        n = int(n)
        spec = make_spec(alpha, "ma", n=n)
        sigma = sigma_n1_exact(spec, n)

        def one(rep, n=n, spec=spec):
            stream = make_stream(StreamKey(master_seed, named_stream_id("reduction", f"{alpha:g}", n, rep)))
            path = generate_path(spec, n, stream)
            return reduction_diag(path, _STANDARD, p) / sigma

        out[n] = np.asarray(map_reps(one, reps, threads))
    return out
