"""Cross-engine runs and their JSON-serialisable reports."""

import datetime as _dt
import itertools
import math
import os
from dataclasses import asdict, dataclass, field

from . import kernels
from .closed_forms import catalogue, exact_value
from .correlation import mu1_open
from .montecarlo import (
    BLOCK_SIZE,
    estimate_correlated_product,
    estimate_tour,
)
from .quadrature import (
    DEFAULT_RHO_GRID,
    QuadratureConfig,
    SeriesParams,
    mu22_quadrature,
    mu23_at_rho,
    mu23_extrapolated,
    nu23_quadrature,
    nu33_quadrature,
)
from .special import gaussian_step_mean
from .tours import Topology, TourSpec

__all__ = [
    "EngineResult",
    "Agreement",
    "RunReport",
    "RunConfig",
    "verify",
    "verify_targets",
    "estimate",
    "mu23_sweep",
    "agreement",
    "timestamp",
]

SIGMA = 3.0


@dataclass
class RunConfig:
    samples: int = 10**6
    seed: int = 0
    tol: float = 1e-8
    k_max: int = 80
    term_tol: float = 1e-15
    rho_grid: tuple = DEFAULT_RHO_GRID
    workers: int = 1

    def quad(self):
        return QuadratureConfig(tol=self.tol, workers=self.workers)

    def snapshot(self):
        """Everything that determines the numbers; worker count excluded."""
        return {
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
            "k_max": self.k_max,
            "term_tol": self.term_tol,
            "rho_grid": list(self.rho_grid),
            "quadrature": self.quad().snapshot(),
            "mc_block_size": BLOCK_SIZE,
            "backend": kernels.BACKEND,
        }


@dataclass
class EngineResult:
    engine: str
    value: float
    error: float
    details: dict = field(default_factory=dict)


@dataclass
class Agreement:
    engines: list
    difference: float
    combined_error: float
    agree: bool


@dataclass
class RunReport:
    quantity: str
    spec: dict
    engines: list
    agreements: list
    timestamp: str
    config: dict
    notes: list = field(default_factory=list)
    sweep: list = field(default_factory=list)

    @property
    def ok(self):
        return all(a.agree for a in self.agreements)

    def to_dict(self):
        d = asdict(self)
        d["ok"] = self.ok
        return d

    @classmethod
    def from_dict(cls, data):
        data = {k: v for k, v in data.items() if k != "ok"}
        data["engines"] = [EngineResult(**e) for e in data["engines"]]
        data["agreements"] = [Agreement(**a) for a in data["agreements"]]
        return cls(**data)


def timestamp():
    """UTC time, pinned by ``SOURCE_DATE_EPOCH`` when set for reproducible output."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (
        _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc)
        if epoch
        else _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0)
    )
    return when.isoformat()


def agreement(r1, r2, tol):
    """Pairwise check: ``|v1 - v2| < 3 * combined error``.

    The combined error is ``sqrt(e1^2 + e2^2)``, floored at ``tol * scale``
    so that two exact engines compare at the configured tolerance.
    """
    diff = abs(r1.value - r2.value)
    scale = max(abs(r1.value), abs(r2.value), 1.0)
    combined = max(math.hypot(r1.error, r2.error), tol * scale)
    return Agreement([r1.engine, r2.engine], diff, combined, bool(diff < SIGMA * combined))


def _pairwise(results, tol):
    return [agreement(a, b, tol) for a, b in itertools.combinations(results, 2)]


def _quadrature_engine(spec, cfg):
    if spec == TourSpec(2, 2):
        return mu22_quadrature(cfg.quad())
    if spec == TourSpec(2, 3, Topology.CLOSED):
        return nu23_quadrature(cfg.quad())
    if spec == TourSpec(3, 3, Topology.CLOSED):
        return nu33_quadrature(cfg.quad())
    return None


def _engines(spec, cfg, include_mc=True):
    out = []
    entry = exact_value(spec)
    if entry is not None:
        out.append(
            EngineResult(
                "closed_form",
                entry.value,
                0.0,
                {"expression": entry.expression, "provenance": entry.provenance},
            )
        )
    if spec.n == 1 and not spec.closed:
        out.append(EngineResult("special_functions", gaussian_step_mean(spec.d), 0.0))
    if spec.d == 1 and not spec.closed and 2 <= spec.n <= 4:
        out.append(EngineResult("correlation_engine", mu1_open(spec.n), 0.0))
    quad = _quadrature_engine(spec, cfg)
    if quad is not None:
        out.append(EngineResult("quadrature", quad.value, quad.error, quad.to_dict()))
    if spec == TourSpec(2, 3):
        ext = mu23_extrapolated(
            cfg.rho_grid, SeriesParams(cfg.rho_grid[0], cfg.k_max, cfg.term_tol), cfg.quad()
        )
        err = ext.uncertainty + max(ext.f_errors)
        out.append(EngineResult("series_extrapolation", ext.value, err, ext.to_dict()))
        if include_mc:
            est = estimate_correlated_product(-0.5, cfg.samples, cfg.seed, cfg.workers)
            out.append(EngineResult("monte_carlo_correlated", est.value, est.stderr, est.to_dict()))
    if include_mc:
        est = estimate_tour(spec, cfg.samples, cfg.seed, cfg.workers)
        out.append(EngineResult("monte_carlo", est.value, est.stderr, est.to_dict()))
    return out


def verify(spec, cfg=RunConfig()):
    """Run every engine that applies to ``spec`` and cross-check them."""
    results = _engines(spec, cfg)
    notes = []
    if len(results) == 1:
        notes.append("single engine: no independent value to compare against")
    for r in results:
        notes.extend(f"{r.engine}: {w}" for w in r.details.get("warnings", []))
    return RunReport(
        quantity=spec.symbol,
        spec=spec.to_dict(),
        engines=results,
        agreements=_pairwise(results, cfg.tol),
        timestamp=timestamp(),
        config=cfg.snapshot(),
        notes=notes,
    )


def verify_targets():
    """Everything ``verify all`` covers: the catalogue plus the integral-defined values."""
    specs = [e.spec for e in catalogue()]
    specs += [
        TourSpec(2, 3, Topology.OPEN),
        TourSpec(2, 3, Topology.CLOSED),
        TourSpec(3, 3, Topology.CLOSED),
    ]
    return specs


def estimate(spec, cfg=RunConfig()):
    """Best available value: exact, else quadrature, else Monte Carlo."""
    results = _engines(spec, cfg, include_mc=False)
    if results:
        best = results[0]
    else:
        est = estimate_tour(spec, cfg.samples, cfg.seed, cfg.workers)
        best = EngineResult("monte_carlo", est.value, est.stderr, est.to_dict())
    notes = [f"{best.engine}: {w}" for w in best.details.get("warnings", [])]
    return RunReport(
        quantity=spec.symbol,
        spec=spec.to_dict(),
        engines=[best],
        agreements=[],
        timestamp=timestamp(),
        config=cfg.snapshot(),
        notes=notes,
    )


def mu23_sweep(cfg=RunConfig()):
    """F(rho) from the series and from correlated Monte Carlo along the grid.

    Also extrapolates the series values to rho = -1/2 and compares that
    with a direct Monte Carlo estimate at rho = -1/2.
    """
    grid = [float(r) for r in cfg.rho_grid]
    qcfg = cfg.quad()
    sweep = []
    agreements = []
    for rho in grid:
        q = mu23_at_rho(SeriesParams(rho, cfg.k_max, cfg.term_tol), qcfg)
        m = estimate_correlated_product(rho, cfg.samples, cfg.seed, cfg.workers)
        sweep.append(
            {"rho": rho, "series": q.value, "series_error": q.error, "mc": m.value, "mc_stderr": m.stderr}
        )
        agreements.append(
            agreement(
                EngineResult(f"series@{rho}", q.value, q.error),
                EngineResult(f"mc@{rho}", m.value, m.stderr),
                cfg.tol,
            )
        )
    ext = mu23_extrapolated(grid, SeriesParams(grid[0], cfg.k_max, cfg.term_tol), qcfg)
    ext_err = ext.uncertainty + max(ext.f_errors)
    direct = estimate_correlated_product(-0.5, cfg.samples, cfg.seed, cfg.workers)
    engines = [
        EngineResult("series_extrapolation", ext.value, ext_err, ext.to_dict()),
        EngineResult("monte_carlo_correlated", direct.value, direct.stderr, direct.to_dict()),
    ]
    notes = []
    if ext.degenerate:
        notes.append("degenerate fit: one grid point, extrapolation uncertainty is infinite")
    else:
        agreements.append(agreement(engines[0], engines[1], cfg.tol))
    report = RunReport(
        quantity="mu[2,3]",
        spec=TourSpec(2, 3).to_dict(),
        engines=engines,
        agreements=agreements,
        timestamp=timestamp(),
        config=cfg.snapshot(),
        notes=notes,
        sweep=sweep,
    )
    return report

