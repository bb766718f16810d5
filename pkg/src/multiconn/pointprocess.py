"""Homogeneous Poisson point processes on a rectangle and k-nearest association."""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from . import kernels


class Boundary(str, enum.Enum):
    PLAIN = "plain"
    TORUS = "torus"


@dataclass(frozen=True)
class Region:
    width: float
    height: float
    boundary: Boundary = Boundary.PLAIN

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"region needs positive width and height, got {self.width} x {self.height}")
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def torus(self) -> bool:
        return self.boundary is Boundary.TORUS


@dataclass
class PointSet:
    coords: np.ndarray  # shape (n, 2), metres

    @property
    def count(self) -> int:
        return len(self.coords)

    @property
    def x(self) -> np.ndarray:
        return self.coords[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.coords[:, 1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "x", "y"])
            for i, (x, y) in enumerate(self.coords):
                writer.writerow([i, repr(float(x)), repr(float(y))])

    @classmethod
    def from_csv(cls, path) -> "PointSet":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["id"]))
        coords = np.array([[float(r["x"]), float(r["y"])] for r in rows], dtype=float)
        return cls(coords.reshape(-1, 2))


@dataclass
class Association:
    """Each user's k nearest BSs, nearest first, plus per-BS degrees."""

    bs_index: np.ndarray  # (n_users, k) int64
    distance: np.ndarray  # (n_users, k) metres
    degree: np.ndarray  # (n_bs,) int64

    @property
    def k(self) -> int:
        return self.bs_index.shape[1]

    @property
    def n_users(self) -> int:
        return self.bs_index.shape[0]

    @property
    def n_bs(self) -> int:
        return len(self.degree)


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator from an int, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def sample_ppp(intensity: float, region: Region, seed) -> PointSet:
    """Homogeneous PPP: Poisson(intensity * area) points, i.i.d. uniform."""
    if not intensity > 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    if not region.area > 0:
        raise ValueError("zero-area region")
    rng = make_rng(seed)
    n = rng.poisson(intensity * region.area)
    coords = np.column_stack([rng.uniform(0.0, region.width, n),
                              rng.uniform(0.0, region.height, n)])
    return PointSet(coords)


def k_nearest(users: PointSet, bss: PointSet, k: int, region: Region,
              method: str = "grid", use_numba=None) -> Association:
    """Exact k nearest BSs of every user under the region metric."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if bss.count < k:
        raise ValueError(f"need at least k={k} base stations, got {bss.count} "
                         f"(short by {k - bss.count})")
    ux, uy = np.ascontiguousarray(users.x), np.ascontiguousarray(users.y)
    bx, by = np.ascontiguousarray(bss.x), np.ascontiguousarray(bss.y)
    if method == "grid":
        idx, d2 = kernels.knn_grid(ux, uy, bx, by, k, region.width, region.height,
                                   region.torus, use_numba=use_numba)
    elif method == "brute":
        idx, d2 = kernels.knn_brute(ux, uy, bx, by, k, region.width, region.height, region.torus)
    else:
        raise ValueError(f"unknown k-NN method {method!r}")
    degree = np.bincount(idx.ravel(), minlength=bss.count).astype(np.int64)
    return Association(idx, np.sqrt(d2), degree)


def empirical_distance_cdf(assoc: Association, j: int):
    """Empirical CDF of the distance to the j-th nearest BS: (sorted r, F(r))."""
    if not 1 <= j <= assoc.k:
        raise ValueError(f"rank j={j} outside 1..{assoc.k}")
    r = np.sort(assoc.distance[:, j - 1])
    return r, np.arange(1, len(r) + 1) / len(r)
