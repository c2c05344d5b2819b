"""Seeded Monte Carlo estimates of tour products.

Random streams
--------------
Samples are cut into blocks of ``BLOCK_SIZE``. Block ``b`` of a run draws
from its own Philox4x64 stream, keyed by ``(seed, crc32(tag))`` with the
256-bit counter started at ``(0, 0, b, 0)``. ``tag`` names the quantity,
e.g. ``"tour:2:4:open"``. Gaussian variates come from numpy's
``Generator.standard_normal`` (ziggurat) on that stream.

Reduction
---------
Each block is summarised by its count, mean and central moments 2..4.
Summaries are merged by a pairwise tree in block order. So the result
depends only on ``(seed, samples, quantity)``, never on how many worker
threads ran the blocks.
"""

import enum
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, InvalidCovarianceError
from .tours import TourSpec

__all__ = [
    "BLOCK_SIZE",
    "LOG_SPACE_THRESHOLD",
    "Method",
    "Estimate",
    "default_workers",
    "estimate_tour",
    "estimate_correlated_product",
    "estimate_sign_expectation",
]

BLOCK_SIZE = 1 << 16
# products over more than this many coordinates (n * d) are summed in logs
LOG_SPACE_THRESHOLD = 256
KURTOSIS_WARNING = 50.0
_EIG_FLOOR = 1e-10


class Method(str, enum.Enum):
    DIRECT_TOUR = "DirectTour"
    CORRELATED_STEPS = "CorrelatedSteps"
    SIGN_EXPECTATION = "SignExpectation"


@dataclass
class Estimate:
    quantity: str
    value: float
    stderr: float
    samples: int
    seed: int
    method: Method
    kurtosis: float
    warnings: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def interval(self, k=3.0):
        return self.value - k * self.stderr, self.value + k * self.stderr

    def to_dict(self):
        d = asdict(self)
        d["method"] = self.method.value
        return d

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["method"] = Method(data["method"])
        return cls(**data)


def default_workers():
    """Thread count from ``TOURPROD_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("TOURPROD_THREADS", "1")))
    except ValueError:
        return 1


# -- streams ------------------------------------------------------------------


def _check_seed(seed):
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed < 2**64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def block_generator(seed, tag, block):
    key = np.array([seed, zlib.crc32(tag.encode("utf-8"))], dtype=np.uint64)
    counter = np.array([0, 0, block, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


# -- moment summaries -----------------------------------------------------------


@dataclass(frozen=True)
class _Moments:
    n: int
    mean: float
    m2: float
    m3: float
    m4: float

    @classmethod
    def of(cls, values):
        mean = float(np.mean(values))
        dev = values - mean
        sq = dev * dev
        return cls(
            values.size,
            mean,
            float(np.sum(sq)),
            float(np.sum(sq * dev)),
            float(np.sum(sq * sq)),
        )

    def merge(self, o):
        na, nb = self.n, o.n
        n = na + nb
        delta = o.mean - self.mean
        d_n = delta / n
        mean = self.mean + d_n * nb
        m2 = self.m2 + o.m2 + delta * d_n * na * nb
        m3 = (
            self.m3
            + o.m3
            + delta * d_n * d_n * na * nb * (na - nb)
            + 3.0 * d_n * (na * o.m2 - nb * self.m2)
        )
        m4 = (
            self.m4
            + o.m4
            + delta * d_n * d_n * d_n * na * nb * (na * na - na * nb + nb * nb)
            + 6.0 * d_n * d_n * (na * na * o.m2 + nb * nb * self.m2)
            + 4.0 * d_n * (na * o.m3 - nb * self.m3)
        )
        return _Moments(n, mean, m2, m3, m4)


def _tree_merge(parts):
    while len(parts) > 1:
        nxt = [parts[i].merge(parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def _run(samples, seed, tag, draw, workers):
    """Summarise ``draw(generator, size) -> values`` over all blocks."""
    if isinstance(samples, bool) or int(samples) != samples or samples < 2:
        raise DomainError(f"need at least 2 samples, got {samples!r}")
    samples = int(samples)
    nblocks = -(-samples // BLOCK_SIZE)

    def one(b):
        size = min(BLOCK_SIZE, samples - b * BLOCK_SIZE)
        return _Moments.of(draw(block_generator(seed, tag, b), size))

    workers = workers or default_workers()
    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(one, range(nblocks)))
    else:
        parts = [one(b) for b in range(nblocks)]
    return _tree_merge(parts)


def _finish(quantity, mom, seed, method, scale=1.0, extra=None):
    var = mom.m2 / (mom.n - 1)
    stderr = math.sqrt(var / mom.n)
    kurt = mom.n * mom.m4 / (mom.m2 * mom.m2) if mom.m2 > 0 else 0.0
    warnings = []
    if kurt > KURTOSIS_WARNING:
        warnings.append(
            f"sample kurtosis {kurt:.1f} exceeds {KURTOSIS_WARNING:g}; "
            "3-sigma intervals are approximate"
        )
    value, stderr = mom.mean * scale, stderr * scale
    if not math.isfinite(value):
        warnings.append("estimate overflows double precision")
    return Estimate(
        quantity=quantity,
        value=value,
        stderr=stderr,
        samples=mom.n,
        seed=seed,
        method=method,
        kurtosis=kurt,
        warnings=warnings,
        extra=dict(extra or {}),
    )


# -- estimators -------------------------------------------------------------------


def estimate_tour(spec, samples=10**6, seed=0, workers=None):
    """Estimate mu[d,n] or nu[d,n] by simulating whole tours."""
    if not isinstance(spec, TourSpec):
        raise DomainError(f"expected a TourSpec, got {spec!r}")
    seed = _check_seed(seed)
    tag = f"tour:{spec.d}:{spec.n}:{spec.topology.value}"
    shape = (spec.n_points, spec.d)
    log_space = spec.n * spec.d > LOG_SPACE_THRESHOLD
    # rescale by the typical product size (2d)^(n/2) so the mean stays finite
    shift = 0.5 * spec.n * math.log(2.0 * spec.d) if log_space else 0.0

    def draw(gen, size):
        pts = gen.standard_normal((size,) + shape)
        if log_space:
            return np.exp(kernels.tour_log_products(pts, spec.closed) - shift)
        return kernels.tour_products(pts, spec.closed)

    mom = _run(samples, seed, tag, draw, workers)
    extra = {"spec": spec.to_dict(), "log_space": log_space}
    scale = math.exp(shift) if log_space else 1.0
    return _finish(spec.symbol, mom, seed, Method.DIRECT_TOUR, scale, extra)


def step_factor(rho):
    """Real factor L with ``L L^T = Psi(rho) / 2``, via symmetric eigendecomposition.

    The real and imaginary parts of the three complex steps are independent
    with covariance ``Psi / 2``. Eigenvalues below 1e-10 are zeroed, so the
    factor exists for singular positive semidefinite ``Psi``.
    """
    psi = 4.0 * np.array([[1.0, rho, 0.0], [rho, 1.0, rho], [0.0, rho, 1.0]])
    lam, vec = np.linalg.eigh(0.5 * psi)
    if lam.min() < -_EIG_FLOOR:
        raise InvalidCovarianceError(
            f"Psi({rho}) has negative eigenvalue {2.0 * lam.min():.3g}"
        )
    lam = np.where(lam < _EIG_FLOOR, 0.0, lam)
    return vec * np.sqrt(lam)[None, :]


def estimate_correlated_product(rho, samples=10**6, seed=0, workers=None):
    """Estimate F(rho) = E|z1||z2||z3| for complex steps with covariance Psi(rho).

    At rho = -1/2 this is a direct estimate of mu[2,3].
    """
    rho = float(rho)
    seed = _check_seed(seed)
    factor = step_factor(rho)

    def draw(gen, size):
        normals = gen.standard_normal((size, 2, 3))
        prod = np.ones(size)
        for i in range(3):
            re = factor[i, 0] * normals[:, 0, 0]
            im = factor[i, 0] * normals[:, 1, 0]
            for j in (1, 2):
                re = re + factor[i, j] * normals[:, 0, j]
                im = im + factor[i, j] * normals[:, 1, j]
            prod = prod * np.sqrt(re * re + im * im)
        return prod

    mom = _run(samples, seed, f"corr:{rho!r}", draw, workers)
    return _finish(f"F({rho!r})", mom, seed, Method.CORRELATED_STEPS, extra={"rho": rho})


def estimate_sign_expectation(samples=10**6, seed=0, orthant=False, workers=None):
    """Estimate gamma = E[sgn] of the product of four consecutive steps on the line.

    ``sgn(0)`` counts as +1. With ``orthant=True``, estimate the probability
    that all four steps are positive instead.
    """
    seed = _check_seed(seed)

    def draw(gen, size):
        diffs = np.diff(gen.standard_normal((size, 5)), axis=1)
        if orthant:
            return np.all(diffs > 0.0, axis=1).astype(np.float64)
        return np.prod(np.where(diffs >= 0.0, 1.0, -1.0), axis=1)

    tag = "orthant" if orthant else "sign"
    mom = _run(samples, seed, tag, draw, workers)
    return _finish(tag if orthant else "gamma", mom, seed, Method.SIGN_EXPECTATION)
