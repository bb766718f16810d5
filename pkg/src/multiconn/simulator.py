"""Monte-Carlo engine: deploy BSs and users, associate, fail links, allocate bandwidth."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import pointprocess as pp
from .analytic import NetworkParams
from .failures import FailureKind, FailureModel, los_blockage_prob

SCHEMA_VERSION = 1
DESK_REGION = pp.Region(500.0, 500.0)
FULL_REGION = pp.Region(1500.0, 1500.0)
CDF_POINTS = 1000


@dataclass(frozen=True)
class SimConfig:
    params: NetworkParams = NetworkParams()
    region: pp.Region = DESK_REGION
    failure: Optional[FailureModel] = None
    reallocation: bool = False
    replications: int = 1
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.replications, bool) or int(self.replications) != self.replications \
                or self.replications < 1:
            raise ValueError(f"replications must be an integer >= 1, got {self.replications!r}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
        object.__setattr__(self, "replications", int(self.replications))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        d = {
            "params": asdict(self.params),
            "region": {"width": self.region.width, "height": self.region.height,
                       "boundary": self.region.boundary.value},
            "failure": None,
            "reallocation": self.reallocation,
            "replications": self.replications,
            "seed": self.seed,
        }
        if self.failure is not None:
            d["failure"] = {"kind": self.failure.kind.value, "value": self.failure.value,
                            "blockage_constant": self.failure.blockage_constant}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        f = d.get("failure")
        return cls(
            params=NetworkParams(**d["params"]),
            region=pp.Region(d["region"]["width"], d["region"]["height"], d["region"]["boundary"]),
            failure=None if f is None else FailureModel(f["kind"], f["value"], f["blockage_constant"]),
            reallocation=bool(d["reallocation"]),
            replications=d["replications"],
            seed=d["seed"],
        )


@dataclass
class Realization:
    params: NetworkParams
    region: pp.Region
    bss: pp.PointSet
    users: pp.PointSet
    assoc: pp.Association


@dataclass
class CapacityReport:
    per_user_capacity: np.ndarray
    outage_fraction: float
    mean_capacity: float
    jain_index: float
    cdf_samples: np.ndarray  # (m, 2): capacity, quantile
    metadata: dict
    replication: np.ndarray = field(repr=False, default=None)
    n_links_surviving: np.ndarray = field(repr=False, default=None)
    degree_histogram: np.ndarray = field(repr=False, default=None)

    def to_json(self, path=None) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "metadata": self.metadata,
            "outage_fraction": self.outage_fraction,
            "mean_capacity": self.mean_capacity,
            "jain_index": self.jain_index,
            "cdf_samples": self.cdf_samples.tolist(),
            "degree_histogram": self.degree_histogram.tolist(),
            "per_user_capacity": self.per_user_capacity.tolist(),
        }
        text = json.dumps(doc)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replication", "user_id", "n_links_surviving", "capacity_bps"])
            user_id = 0
            prev = None
            for rep, n, cap in zip(self.replication, self.n_links_surviving, self.per_user_capacity):
                if rep != prev:
                    user_id, prev = 0, rep
                w.writerow([int(rep), user_id, int(n), repr(float(cap))])
                user_id += 1


# -- building blocks --------------------------------------------------------

def child_seeds(seed, n):
    """n independent child SeedSequences derived from ``seed``.

    Unlike ``SeedSequence.spawn`` this is stateless: asking twice for the
    children of the same parent gives the same streams.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (i,), pool_size=ss.pool_size)
            for i in range(n)]


def realize(params: NetworkParams, region: pp.Region, seed, use_numba=None) -> Realization:
    s_bs, s_u = child_seeds(seed, 2)
    bss = pp.sample_ppp(params.lambda_bs, region, s_bs)
    users = pp.sample_ppp(params.lambda_u, region, s_u)
    assoc = pp.k_nearest(users, bss, params.k, region, use_numba=use_numba)
    return Realization(params, region, bss, users, assoc)


def apply_failure(real: Realization, failure: Optional[FailureModel], seed) -> np.ndarray:
    """Boolean (n_users, k) mask of surviving links."""
    assoc = real.assoc
    shape = assoc.bs_index.shape
    if failure is None:
        return np.ones(shape, dtype=bool)
    rng = pp.make_rng(seed)
    kind = failure.kind
    if kind is FailureKind.RANDOM:
        return rng.random(shape) >= failure.value
    if kind is FailureKind.OVERLOAD:
        d = assoc.degree.astype(float)
        with np.errstate(divide="ignore"):
            keep = np.where(d > 0, d ** -failure.value, 1.0)
        bs_alive = rng.random(assoc.n_bs) < keep
        return bs_alive[assoc.bs_index]
    if kind is FailureKind.DISTANCE:
        return assoc.distance <= failure.value
    blocked = los_blockage_prob(assoc.distance, failure.value, failure.blockage_constant)
    return rng.random(shape) >= blocked


def allocate_bandwidth(real: Realization, alive: np.ndarray, reallocation: bool) -> np.ndarray:
    """Bandwidth (Hz) of each link; dead links get 0.

    Each BS owns W_tot/lambda_bs and splits it equally over its pre-failure
    links, or over its surviving links when re-allocating.
    """
    assoc = real.assoc
    w_bs = real.params.w_bs
    if reallocation:
        share = np.bincount(assoc.bs_index[alive], minlength=assoc.n_bs)
    else:
        share = assoc.degree
    with np.errstate(divide="ignore"):
        per_bs = np.where(share > 0, w_bs / np.maximum(share, 1), 0.0)
    return np.where(alive, per_bs[assoc.bs_index], 0.0)


def link_snr(distance, params: NetworkParams):
    """c r^-alpha, held at c inside 1 m."""
    return params.c * np.maximum(distance, 1.0) ** -params.alpha


def jain_index(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0 or np.any(x < 0):
        raise ValueError("jain index needs a non-empty list of non-negative values")
    top = x.max()
    if top == 0.0:
        raise ValueError("jain index undefined for all-zero capacities")
    x = x / top  # scale-free; avoids under/overflow in x^2
    s2 = math.fsum(x * x)
    s = math.fsum(x)
    return s * s / (x.size * s2)


def _cdf_points(x):
    xs = np.sort(x)
    n = len(xs)
    if n == 0:
        return np.empty((0, 2))
    q = np.arange(1, n + 1) / n
    if n > CDF_POINTS:
        pick = np.unique(np.linspace(0, n - 1, CDF_POINTS).round().astype(int))
        xs, q = xs[pick], q[pick]
    return np.column_stack([xs, q])


def user_capacities(real: Realization, failure, reallocation, seed):
    """Per-user capacity (bit/s) and surviving link counts for one realization."""
    alive = apply_failure(real, failure, seed)
    bw = allocate_bandwidth(real, alive, reallocation)
    cap = bw * np.log2(1.0 + link_snr(real.assoc.distance, real.params))
    return cap.sum(axis=1), alive.sum(axis=1)


def run(cfg: SimConfig, use_numba=None) -> CapacityReport:
    caps, links, reps, degs = [], [], [], []
    for rep, child in enumerate(child_seeds(cfg.seed, cfg.replications)):
        s_net, s_fail = child_seeds(child, 2)
        real = realize(cfg.params, cfg.region, s_net, use_numba=use_numba)
        c, n = user_capacities(real, cfg.failure, cfg.reallocation, s_fail)
        caps.append(c)
        links.append(n)
        reps.append(np.full(len(c), rep, dtype=np.int64))
        degs.append(np.bincount(real.assoc.degree))
    cap = np.concatenate(caps)
    n_links = np.concatenate(links)
    hist = np.zeros(max(len(d) for d in degs), dtype=np.int64)
    for d in degs:
        hist[:len(d)] += d
    if cap.size == 0:
        raise ValueError("no users were sampled; enlarge the region or lambda_u")
    return CapacityReport(
        per_user_capacity=cap,
        outage_fraction=float(np.mean(n_links == 0)),
        mean_capacity=math.fsum(cap) / cap.size,
        jain_index=jain_index(cap) if np.any(cap > 0) else float("nan"),
        cdf_samples=_cdf_points(cap),
        metadata=cfg.to_dict(),
        replication=np.concatenate(reps),
        n_links_surviving=n_links,
        degree_histogram=hist,
    )


def sweep_mean_capacity(params: NetworkParams, region: pp.Region, failures, k_values,
                        reallocation: bool = False, replications: int = 1, seed: int = 0,
                        use_numba=None):
    """Mean user capacity and outage fraction on a grid of (k, failure model).

    Every replication draws one deployment and reuses it for all k and all
    failure points (common random numbers), so differences across the grid
    are far less noisy than independent runs would be.
    Returns two arrays of shape (len(k_values), len(failures)) and the
    number of users the averages run over.
    """
    failures = list(failures)
    k_values = list(k_values)
    total = np.zeros((len(k_values), len(failures)))
    out = np.zeros_like(total)
    n_users = 0
    for child in child_seeds(seed, replications):
        s_net, s_fail = child_seeds(child, 2)
        fail_seeds = child_seeds(s_fail, len(k_values) * len(failures))
        for a, k in enumerate(k_values):
            real = realize(params.replace(k=k), region, s_net, use_numba=use_numba)
            for b, fm in enumerate(failures):
                cap, links = user_capacities(real, fm, reallocation, fail_seeds[a * len(failures) + b])
                total[a, b] += math.fsum(cap)
                out[a, b] += np.count_nonzero(links == 0)
        n_users += real.users.count
    if n_users == 0:
        raise ValueError("no users were sampled")
    return total / n_users, out / n_users, n_users
