"""Monte Carlo experiments on rescaled encodings of large random plane trees.

Paths are rescaled so that, for trees in the Brownian regime, every
encoding targets the same standard excursion ``e``:

* height   ``(sigma/2) H(x(n-1)) / sqrt(n)``
* contour  ``(sigma/2) C(2x(n-1)) / sqrt(n)``
* Lukasiewicz ``S(xn) / (sigma sqrt(n))``

The reference sample for ``e`` comes from uniform Dyck paths, generated by a
separate code path from the tree samplers.

Replicas draw from ``SeedSequence([seed, stream])`` children, where
``stream`` is a stable hash of the experiment cell (family, size, role), so
a report is a pure function of its config.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats as sps

from . import __version__
from .degseq import DegreeSequence, stats, validate
from .sampler import (
    OffspringDistribution,
    make_rng,
    sample_gw_conditioned,
    sample_uniform,
)
from .tree_core import CONTOUR, HEIGHT, LUKASIEWICZ, LatticePath, PlaneTree, degree_sequence, lukasiewicz

DEFAULT_GRID = 2**10 + 1
FAMILIES = ("binary", "geometric-like", "unary-ternary", "empirical-gw", "poisson")


# -- rescaling ---------------------------------------------------------------

@dataclass(frozen=True)
class RescaledPath:
    grid: np.ndarray
    values: np.ndarray
    kind: str
    n: int
    sigma: float | None
    factor: float


def tree_size_of(path: LatticePath) -> int:
    if path.kind == HEIGHT:
        return len(path.values)
    if path.kind == CONTOUR:
        return path.span // 2 + 1
    if path.kind == LUKASIEWICZ:
        return path.span
    raise ValueError(f"unknown path kind {path.kind!r}")


def _shape_factor(kind: str, sigma: float | None) -> float:
    if sigma is None:
        return 1.0
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return 1 / sigma if kind == LUKASIEWICZ else sigma / 2


def rescale(path: LatticePath, sigma: float | None = None, grid_points: int = DEFAULT_GRID) -> RescaledPath:
    """Evaluate the rescaled path on ``grid_points`` equispaced points of [0, 1].

    Time ``x`` maps to ``x * span`` (``span`` = n-1, 2(n-1), n for height,
    contour, Lukasiewicz), with linear interpolation between integer times.
    Without ``sigma`` only the ``1/sqrt(n)`` space factor is applied.
    """
    if len(path.values) == 0:
        raise ValueError("cannot rescale an empty path")
    if grid_points < 2:
        raise ValueError("grid needs at least two points")
    n = tree_size_of(path)
    factor = _shape_factor(path.kind, sigma) / math.sqrt(n)
    grid = np.linspace(0.0, 1.0, grid_points)
    vals = np.asarray(path.values, dtype=float)
    if path.span == 0:
        out = np.full(grid_points, vals[0])
    else:
        out = np.interp(grid * path.span, np.arange(path.span + 1), vals)
    return RescaledPath(grid, out * factor, path.kind, n, sigma, factor)


def sigma_of(s: DegreeSequence) -> float:
    return math.sqrt(float(stats(s).sigma2))


def sup_discrepancy(t: PlaneTree, sigma2) -> float:
    """``sup_x |S(xn) - (sigma2/2) H(x(n-1))| / sqrt(n)``.

    Both paths are piecewise linear in ``x`` with knots at ``k/n`` and
    ``k/(n-1)``; the supremum is attained at one of these knots.
    """
    n = len(t)
    if n < 2:
        raise ValueError("sup discrepancy needs at least two nodes")
    S = lukasiewicz(t).values.astype(float)
    H = t.depths.astype(float)
    xs = np.union1d(np.arange(n + 1) / n, np.arange(n) / (n - 1))
    s_vals = np.interp(xs * n, np.arange(n + 1), S)
    h_vals = np.interp(xs * (n - 1), np.arange(n), H)
    return float(np.max(np.abs(s_vals - float(sigma2) / 2 * h_vals)) / math.sqrt(n))


# -- functionals ---------------------------------------------------------------

@dataclass
class FunctionalSample:
    name: str
    values: list[float]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def _parse_functional(name: str) -> tuple[str, float | None]:
    if name.startswith("value@"):
        x = float(name.split("@", 1)[1])
        if not 0 <= x <= 1:
            raise ValueError(f"functional {name}: x must lie in [0, 1]")
        return "value", x
    if name in ("max", "area", "endpoint"):
        return name, None
    raise ValueError(f"unknown functional {name!r} (use max, area, endpoint, value@x)")


def path_functionals(values: np.ndarray, span: int, factor: float, names: Sequence[str]) -> dict[str, float]:
    """Functionals of ``x -> factor * values(x * span)`` over [0, 1], computed on the knots."""
    vals = np.asarray(values, dtype=float)
    out = {}
    for name in names:
        kind, x = _parse_functional(name)
        if kind == "max":
            out[name] = factor * float(vals.max())
        elif kind == "endpoint":
            out[name] = factor * float(vals[-1])
        elif kind == "area":
            area = 0.0 if span == 0 else float((vals[:-1] + vals[1:]).sum()) / (2 * span)
            out[name] = factor * area
        else:
            out[name] = factor * float(np.interp(x * span, np.arange(len(vals)), vals))
    return out


def height_functionals(t: PlaneTree, sigma: float, names: Sequence[str]) -> dict[str, float]:
    """Functionals of the normalised height process ``(sigma/2) H(x(n-1))/sqrt(n)``."""
    n = len(t)
    return path_functionals(t.depths, n - 1, sigma / (2 * math.sqrt(n)), names)


# -- degree-sequence families -------------------------------------------------

def family_sequence(name: str, n: int, seed=None) -> DegreeSequence:
    """A tree degree sequence of (about) ``n`` nodes from a named recipe.

    binary          n_0 = k+1, n_2 = k with k = (n-1)//2
    unary-ternary   n_0 = 2k+1, n_1 = k, n_3 = k with k = (n-1)//4
    geometric-like  n_i = round(n 2^{-i-1}) for i >= 2; n_1 then n_0 fixed
                    by the tree identities; if that leaves n_1 < 0 or
                    n_0 < 1, the largest degree present loses a node, repeat
    empirical-gw    degree sequence of a geometric(1/2) GW tree conditioned
                    on n nodes (needs ``seed``)
    poisson         n i.i.d. Poisson(1) degrees, redrawn until they sum to
                    n - 1 (needs ``seed``)
    """
    if n < 1:
        raise ValueError("family size must be >= 1")
    if name == "binary":
        k = (n - 1) // 2
        return validate([k + 1, 0, k])
    if name == "unary-ternary":
        k = (n - 1) // 4
        return validate([2 * k + 1, k, 0, k])
    if name == "geometric-like":
        high = {}
        i = 2
        while True:
            c = round(n * 2.0 ** (-i - 1))
            if c == 0:
                break
            high[i] = c
            i += 1
        while True:
            n1 = (n - 1) - sum(d * c for d, c in high.items())
            n0 = n - sum(high.values()) - n1
            if n1 >= 0 and n0 >= 1:
                break
            top = max(high)
            high[top] -= 1
            if not high[top]:
                del high[top]
        counts = [n0, n1] + [high.get(d, 0) for d in range(2, max(high, default=1) + 1)]
        return validate(counts)
    if name == "empirical-gw":
        return degree_sequence(sample_gw_conditioned(OffspringDistribution.geometric(), n, _need(seed, name)))
    if name == "poisson":
        rng = make_rng(_need(seed, name))
        while True:
            degs = rng.poisson(1.0, size=n)
            if degs.sum() == n - 1:
                return validate(np.bincount(degs).tolist())
    raise ValueError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")


def _need(seed, name):
    if seed is None:
        raise ValueError(f"family {name!r} is random and needs a seed")
    return seed


def _stream(seed: int, *tags) -> np.random.SeedSequence:
    key = zlib.crc32("/".join(map(str, tags)).encode())
    return np.random.SeedSequence([int(seed), key])


def cell_seeds(seed: int, replicas: int, *tags) -> list[np.random.SeedSequence]:
    return _stream(seed, *tags).spawn(replicas)


# -- replica drivers ---------------------------------------------------------------

def parallel_map(fn: Callable, tasks: list, threads: int = 1) -> list:
    """Ordered map; ``threads > 1`` fans out to worker processes."""
    if threads <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


def _family_tree(family: str, n: int, seq: np.random.SeedSequence) -> tuple[PlaneTree, DegreeSequence]:
    fam_seq, tree_seq = seq.spawn(2)
    s = family_sequence(family, n, np.random.Generator(np.random.PCG64(fam_seq)))
    return sample_uniform(s, np.random.Generator(np.random.PCG64(tree_seq))), s


def _height_task(args) -> dict[str, float]:
    family, n, seq, names = args
    t, s = _family_tree(family, n, seq)
    out = height_functionals(t, sigma_of(s), names)
    out["_delta_over_sqrt_n"] = s.max_degree / math.sqrt(len(t))
    out["_sigma2"] = float(stats(s).sigma2)
    return out


def _discrepancy_task(args) -> float:
    family, n, seq = args
    t, s = _family_tree(family, n, seq)
    return sup_discrepancy(t, stats(s).sigma2)


def height_samples(family: str, n: int, replicas: int, seed: int, names: Sequence[str],
                   threads: int = 1) -> dict[str, FunctionalSample]:
    """Normalised height functionals of ``replicas`` uniform trees from ``family``."""
    seeds = cell_seeds(seed, replicas, "height", family, n)
    rows = parallel_map(_height_task, [(family, n, q, tuple(names)) for q in seeds], threads)
    keys = list(names) + ["_delta_over_sqrt_n", "_sigma2"]
    return {k: FunctionalSample(k, [r[k] for r in rows]) for k in keys}


def discrepancy_samples(family: str, n: int, replicas: int, seed: int, threads: int = 1) -> FunctionalSample:
    seeds = cell_seeds(seed, replicas, "discrepancy", family, n)
    return FunctionalSample("sup_discrepancy", parallel_map(_discrepancy_task, [(family, n, q) for q in seeds], threads))


# -- Brownian excursion reference ---------------------------------------------

def uniform_dyck_path(m: int, rng: np.random.Generator) -> np.ndarray:
    """Heights of a uniform Dyck path with ``2m`` steps.

    Shuffle ``m`` up-steps and ``m+1`` down-steps, rotate to start after the
    first minimum (exactly one rotation stays non-negative), and drop the
    final down-step.
    """
    steps = np.ones(2 * m + 1, dtype=np.int64)
    steps[m:] = -1
    rng.shuffle(steps)
    walk = np.cumsum(steps)
    j = int(np.argmin(walk)) + 1
    steps = np.concatenate((steps[j:], steps[:j]))
    return np.concatenate(([0], np.cumsum(steps[:-1])))


def _dyck_task(args) -> dict[str, float]:
    m, seq, names = args
    path = uniform_dyck_path(m, np.random.Generator(np.random.PCG64(seq)))
    return path_functionals(path, 2 * m, 1 / math.sqrt(2 * m), names)


def excursion_reference(m: int, replicas: int, seed: int,
                        names: Sequence[str] = ("max", "area", "value@0.25", "value@0.5", "value@0.75"),
                        threads: int = 1) -> dict[str, FunctionalSample]:
    """Functionals of ``C(2mx)/sqrt(2m)`` for uniform Dyck paths ``C`` of length ``2m``."""
    if m < 1:
        raise ValueError("Dyck reference needs m >= 1")
    seeds = cell_seeds(seed, replicas, "dyck", m)
    rows = parallel_map(_dyck_task, [(m, q, tuple(names)) for q in seeds], threads)
    return {k: FunctionalSample(k, [r[k] for r in rows]) for k in names}


# -- two-sample test -----------------------------------------------------------

MIN_KS_POINTS = 20


@dataclass
class KSResult:
    statistic: float
    p_value: float
    n_a: int
    n_b: int
    inconclusive: bool


def ks_two_sample(a, b) -> KSResult:
    """Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value."""
    xa = np.asarray(a.values if isinstance(a, FunctionalSample) else a, dtype=float)
    xb = np.asarray(b.values if isinstance(b, FunctionalSample) else b, dtype=float)
    if not len(xa) or not len(xb):
        raise ValueError("both samples must be non-empty")
    res = sps.ks_2samp(xa, xb, method="asymp")
    small = min(len(xa), len(xb)) < MIN_KS_POINTS
    return KSResult(float(res.statistic), float(res.pvalue), len(xa), len(xb), small)


# -- experiments ---------------------------------------------------------------

def summarize(values: Iterable[float]) -> dict[str, float]:
    arr = np.sort(np.asarray(list(values), dtype=float))
    if not len(arr):
        return {"count": 0}
    return {
        "count": int(len(arr)),
        "mean": float(arr.mean()),
        "median": float(np.median(arr)),
        "q10": float(np.quantile(arr, 0.1)),
        "q90": float(np.quantile(arr, 0.9)),
        "min": float(arr[0]),
        "max": float(arr[-1]),
    }


@dataclass
class ExperimentConfig:
    kind: str  # discrepancy | excursion | universality | gw-hypothesis
    families: list[str] = field(default_factory=lambda: ["binary"])
    sizes: list[int] = field(default_factory=lambda: [1000])
    replicas: int = 100
    seed: int = 0
    functionals: list[str] = field(default_factory=lambda: ["max", "value@0.5"])
    ks_threshold: float = 0.05
    offspring: dict | None = None
    threads: int = 1

    def __post_init__(self):
        if self.kind not in ("discrepancy", "excursion", "universality", "gw-hypothesis"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if list(self.sizes) != sorted(set(self.sizes)) or not self.sizes:
            raise ValueError("sizes must be a non-empty strictly increasing list")
        for f in self.families:
            if f not in FAMILIES:
                raise ValueError(f"unknown family {f!r}; choose from {', '.join(FAMILIES)}")
        for name in self.functionals:
            _parse_functional(name)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**known)


def discrepancy_decay(families: Sequence[str], sizes: Sequence[int], replicas: int, seed: int,
                      threads: int = 1) -> dict:
    """Median sup-discrepancy per family and size, with strict-decay flags."""
    out = {}
    for fam in families:
        rows = {}
        for n in sizes:
            rows[str(n)] = summarize(discrepancy_samples(fam, n, replicas, seed, threads).values)
        medians = [rows[str(n)]["median"] for n in sizes]
        out[fam] = {
            "per_size": rows,
            "medians": medians,
            "strictly_decreasing": all(a > b for a, b in zip(medians, medians[1:])),
            "last_over_first": medians[-1] / medians[0] if medians[0] else float("nan"),
        }
    return out


def universality_experiment(families: Sequence[str], n: int, replicas: int, seed: int,
                            functionals: Sequence[str] = ("max", "value@0.5"),
                            ks_threshold: float = 0.05, threads: int = 1) -> dict:
    """Compare normalised height functionals of two families at size ``n``."""
    if len(families) != 2:
        raise ValueError("universality compares exactly two families")
    samples = {f: height_samples(f, n, replicas, seed, functionals, threads) for f in families}
    flags = {}
    for f in families:
        worst = max(samples[f]["_delta_over_sqrt_n"].values)
        flags[f] = {
            "max_delta_over_sqrt_n": worst,
            "hypothesis_violation": worst >= 1.0,
            "sigma2": summarize(samples[f]["_sigma2"].values),
        }
    a, b = families
    ks = {}
    for name in functionals:
        r = ks_two_sample(samples[a][name], samples[b][name])
        ks[name] = asdict(r) | {"passed": r.statistic < ks_threshold and not r.inconclusive}
    return {
        "families": list(families),
        "n": n,
        "replicas": replicas,
        "hypotheses": flags,
        "summaries": {f: {k: summarize(samples[f][k].values) for k in functionals} for f in families},
        "ks": ks,
        "passed": all(v["passed"] for v in ks.values()),
        "_samples": samples,
    }


def excursion_experiment(family: str, n: int, m: int, replicas: int, seed: int,
                        functionals: Sequence[str] = ("max",), ks_threshold: float = 0.05,
                        threads: int = 1) -> dict:
    """Normalised height functionals of a family against the Dyck-path reference."""
    trees = height_samples(family, n, replicas, seed, functionals, threads)
    ref = excursion_reference(m, replicas, seed, functionals, threads)
    ks = {}
    for name in functionals:
        r = ks_two_sample(trees[name], ref[name])
        ks[name] = asdict(r) | {"passed": r.statistic < ks_threshold and not r.inconclusive}
    return {
        "family": family,
        "n": n,
        "dyck_m": m,
        "replicas": replicas,
        "summaries": {
            "trees": {k: summarize(trees[k].values) for k in functionals},
            "dyck": {k: summarize(ref[k].values) for k in functionals},
        },
        "ks": ks,
        "passed": all(v["passed"] for v in ks.values()),
        "_samples": {"trees": trees, "dyck": ref},
    }


def _gw_task(args) -> dict[str, float]:
    mu_json, n, seq = args
    mu = OffspringDistribution.from_json(mu_json)
    t = sample_gw_conditioned(mu, n, np.random.Generator(np.random.PCG64(seq)))
    s = degree_sequence(t)
    out = {f"mu_err_{i}": abs(s[i] / n - mu.pmf(i)) for i in range(6)}
    out["sigma2_err"] = abs(float(stats(s).sigma2) - mu.variance)
    out["delta_over_sqrt_n"] = s.max_degree / math.sqrt(n)
    return out


def gw_hypothesis_check(mu: OffspringDistribution, sizes: Sequence[int], replicas: int, seed: int,
                        threads: int = 1) -> dict:
    """Medians of ``|mu_hat_i - mu_i|``, ``|sigma_hat^2 - sigma_mu^2|`` and ``Delta_hat/sqrt(n)``."""
    mu.check_critical()
    per = {}
    for n in sizes:
        seeds = cell_seeds(seed, replicas, "gw", n)
        rows = parallel_map(_gw_task, [(mu.to_json(), n, q) for q in seeds], threads)
        per[str(n)] = {k: float(np.median([r[k] for r in rows])) for k in rows[0]}
    first, last = per[str(sizes[0])], per[str(sizes[-1])]
    return {
        "offspring": mu.to_json(),
        "sigma2_mu": mu.variance,
        "sizes": list(sizes),
        "replicas": replicas,
        "medians": per,
        "sigma2_err_decreases": last["sigma2_err"] < first["sigma2_err"],
        "delta_decreases": last["delta_over_sqrt_n"] < first["delta_over_sqrt_n"],
    }


def run_experiment(config: ExperimentConfig) -> dict:
    """Run one configured experiment and return a JSON-ready report."""
    c = config
    if c.kind == "discrepancy":
        result = discrepancy_decay(c.families, c.sizes, c.replicas, c.seed, c.threads)
    elif c.kind == "excursion":
        n = c.sizes[-1]
        result = excursion_experiment(c.families[0], n, n, c.replicas, c.seed, c.functionals,
                                     c.ks_threshold, c.threads)
    elif c.kind == "universality":
        result = universality_experiment(c.families, c.sizes[-1], c.replicas, c.seed, c.functionals,
                                         c.ks_threshold, c.threads)
    else:
        mu = OffspringDistribution.from_json(c.offspring or {"family": "geometric", "param": 0.5})
        result = gw_hypothesis_check(mu, c.sizes, c.replicas, c.seed, c.threads)
    samples = result.pop("_samples", None)
    report = {"config": asdict(c), "version": __version__, "result": _jsonable(result)}
    if samples is not None:
        report["_samples"] = samples
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, FunctionalSample):
        return {"name": obj.name, "values": obj.values}
    return obj
