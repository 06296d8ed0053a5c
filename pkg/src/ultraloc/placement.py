"""Evolutionary search for beacon placements that minimize average VDOP.

Individuals are sets of four beacon positions drawn from a lattice over
the ceiling and the top half of the walls. Fitness is the drone-domain
average VDOP, with a large constant penalty whenever the average HDOP
exceeds its tolerance so infeasible individuals always rank behind
feasible ones. Selection keeps the best 40 of 50, adjacent parents are
crossed per coordinate, and the worst 20 of the resulting 70 are culled.
The whole search restarts from a fresh population when the final best
individual misses either tolerance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .channel import ROOM_DIMS, BeaconLayout
from .dop import DroneDomain, dop_average
from .errors import DomainDegeneracyError, InfeasibleDomainError

BEACON_GRID = 0.25
MIN_SEPARATION = 0.5
POPULATION = 50
PARENTS = 40
ITERATIONS = 100
MAX_RESTARTS = 10
HDOP_PENALTY = 1e6

_counter = itertools.count()


@dataclass(frozen=True)
class BeaconDomain:
    """Admissible beacon positions: ceiling plus the top half of each wall."""

    room_dims: tuple[float, float, float] = ROOM_DIMS
    grid_resolution: float = BEACON_GRID

    def __post_init__(self):
        if self.grid_resolution <= 0:
            raise ValueError("grid resolution must be positive")
        if any(d <= 0 for d in self.room_dims):
            raise ValueError("room dimensions must be positive")

    def candidates(self) -> np.ndarray:
        """Deduplicated lattice points on the ceiling and upper wall halves."""
        w, d, h = self.room_dims
        res = self.grid_resolution
        xs = _grid(0.0, w, res)
        ys = _grid(0.0, d, res)
        zs_wall = _grid(h / 2.0, h, res)
        seen: dict[tuple[float, float, float], None] = {}
        for x in xs:
            for y in ys:
                seen[(round(x, 9), round(y, 9), round(h, 9))] = None
        for z in zs_wall:
            for y in ys:
                seen[(0.0, round(y, 9), round(z, 9))] = None
                seen[(round(w, 9), round(y, 9), round(z, 9))] = None
            for x in xs:
                seen[(round(x, 9), 0.0, round(z, 9))] = None
                seen[(round(x, 9), round(d, 9), round(z, 9))] = None
        return np.array(list(seen.keys()), dtype=float)

    def on_ceiling(self, points: np.ndarray) -> np.ndarray:
        return np.isclose(np.atleast_2d(points)[:, 2], self.room_dims[2])


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


@dataclass
class Individual:
    """Candidate placement of four beacons with cached fitness terms."""

    beacons: np.ndarray
    fitness: float = math.inf
    hdop_avg: float = math.nan
    vdop_avg: float = math.nan
    order: int = field(default_factory=lambda: next(_counter))

    def sort_key(self) -> tuple[float, int]:
        return (self.fitness, self.order)


@dataclass(frozen=True)
class PlacementProblem:
    """Inputs of one placement search."""

    drone_domain: DroneDomain = field(default_factory=DroneDomain)
    beacon_domain: BeaconDomain = field(default_factory=BeaconDomain)
    hdop_tolerance: float = 2.0
    vdop_tolerance: float = 2.0
    population: int = POPULATION
    parents: int = PARENTS
    iterations: int = ITERATIONS
    rng_seed: int = 0
    min_separation: float = MIN_SEPARATION
    max_restarts: int = MAX_RESTARTS
    mutation_rate: float = 0.0

    def __post_init__(self):
        if self.hdop_tolerance <= 0 or self.vdop_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.parents > self.population:
            raise ValueError("cannot select more parents than the population holds")
        if self.parents % 2 != 0:
            raise ValueError("parents must pair up, so their count must be even")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")

    @property
    def offspring(self) -> int:
        return self.parents // 2


@dataclass(frozen=True)
class PlacementResult:
    layout: BeaconLayout
    vdop_avg: float
    hdop_avg: float
    history: list[float]
    iterations: int
    restarts: int
    feasible: bool


def _separated(points: np.ndarray, min_sep: float) -> bool:
    for i in range(points.shape[0]):
        for j in range(i + 1, points.shape[0]):
            if np.linalg.norm(points[i] - points[j]) < min_sep:
                return False
    return True


def _draw_separated(
    pool: np.ndarray, rng: np.random.Generator, min_sep: float, max_tries: int = 200
) -> np.ndarray:
    """Pick 4 mutually separated points from a candidate pool."""
    if pool.shape[0] < 4:
        raise InfeasibleDomainError("fewer than 4 candidate positions in group")
    for _ in range(max_tries):
        idx = rng.choice(pool.shape[0], size=4, replace=False)
        pts = pool[idx]
        if _separated(pts, min_sep):
            return pts
    raise InfeasibleDomainError(
        f"could not find 4 candidates separated by {min_sep} m in {max_tries} draws"
    )


def seed_population(
    problem: PlacementProblem, rng: np.random.Generator | None = None
) -> list[Individual]:
    """Generate the initial population, stratified to escape local minima.

    Deterministic quotas split the population into all-ceiling, all-wall,
    and mixed groups so the search starts spread over the beacon domain.
    """
    if rng is None:
        rng = np.random.default_rng(problem.rng_seed)
    candidates = problem.beacon_domain.candidates()
    ceiling_mask = problem.beacon_domain.on_ceiling(candidates)
    ceiling = candidates[ceiling_mask]
    wall = candidates[~ceiling_mask]

    p = problem.population
    n_ceiling = (p + 2) // 3
    n_wall = (p + 1) // 3
    n_mixed = p - n_ceiling - n_wall

    population: list[Individual] = []
    for _ in range(n_ceiling):
        population.append(Individual(beacons=_draw_separated(ceiling, rng, problem.min_separation)))
    for _ in range(n_wall):
        population.append(Individual(beacons=_draw_separated(wall, rng, problem.min_separation)))
    for _ in range(n_mixed):
        for _ in range(200):
            pts = _draw_separated(candidates, rng, problem.min_separation)
            on_ceil = problem.beacon_domain.on_ceiling(pts)
            if 0 < on_ceil.sum() < 4:
                break
        population.append(Individual(beacons=pts))
    return population


def fitness(individual: Individual, problem: PlacementProblem) -> float:
    """Domain-averaged VDOP, penalized when average HDOP breaks tolerance.

    Caches hdop_avg/vdop_avg on the individual. A degenerate layout gets
    an infinite sentinel; that covers both DOP degeneracy over the drone
    domain and coplanar beacon sets, which the downstream linearized
    trilateration cannot use even when their DOP is finite.
    """
    diffs = individual.beacons[-1] - individual.beacons[:-1]
    if np.linalg.matrix_rank(diffs, tol=1e-9) < 3:
        individual.fitness = math.inf
        return individual.fitness
    try:
        layout = BeaconLayout(positions=individual.beacons)
        hdop_avg, vdop_avg = dop_average(layout, problem.drone_domain)
    except (DomainDegeneracyError, ValueError):
        individual.fitness = math.inf
        return individual.fitness
    individual.hdop_avg = hdop_avg
    individual.vdop_avg = vdop_avg
    individual.fitness = vdop_avg + (HDOP_PENALTY if hdop_avg > problem.hdop_tolerance else 0.0)
    return individual.fitness


def crossover(
    parent_a: Individual,
    parent_b: Individual,
    problem: PlacementProblem,
    rng: np.random.Generator,
    tree: cKDTree | None = None,
    candidates: np.ndarray | None = None,
) -> Individual:
    """Mix two placements coordinate-by-coordinate into a child.

    Beacon k of the child takes each of x, y, z independently from either
    parent's beacon k with probability 1/2, then snaps to the nearest
    lattice candidate (coordinate mixing can leave the wall/ceiling
    planes). Redraws up to 20 times to honor the separation constraint
    and falls back to a copy of parent_a.
    """
    if candidates is None:
        candidates = problem.beacon_domain.candidates()
    if tree is None:
        tree = cKDTree(candidates)
    for _ in range(20):
        mask = rng.integers(0, 2, size=(4, 3)).astype(bool)
        mixed = np.where(mask, parent_a.beacons, parent_b.beacons)
        if problem.mutation_rate > 0.0:
            mixed = _mutate(mixed, problem, rng)
        _, nearest = tree.query(mixed)
        child_pts = candidates[nearest]
        if _separated(child_pts, problem.min_separation):
            return Individual(beacons=child_pts)
    return Individual(beacons=parent_a.beacons.copy())


def _mutate(points: np.ndarray, problem: PlacementProblem, rng: np.random.Generator) -> np.ndarray:
    """Optional per-coordinate redraw within the room extent."""
    w, d, h = problem.beacon_domain.room_dims
    hi = np.array([w, d, h])
    out = points.copy()
    for k in range(out.shape[0]):
        for c in range(3):
            if rng.random() < problem.mutation_rate:
                out[k, c] = rng.uniform(0.0, hi[c])
    return out


def optimize(problem: PlacementProblem, observer=None) -> PlacementResult:
    """Run the full placement search, restarting until tolerances are met.

    Each run: seed a stratified population, then for the configured
    iteration count sort by fitness, cross the best 40 pairwise into 20
    offspring, and cull the worst 20 of the pooled 70. If the run's best
    individual misses either tolerance the search restarts with a fresh
    seeded population, up to max_restarts times; the best layout found
    anywhere is then returned flagged infeasible.

    observer, if given, is called as observer(run_idx, iteration,
    population) after every cull, for instrumentation.
    """
    candidates = problem.beacon_domain.candidates()
    tree = cKDTree(candidates)

    best_overall: Individual | None = None
    best_history: list[float] = []
    for run_idx in range(problem.max_restarts + 1):
        rng = np.random.default_rng([problem.rng_seed, run_idx])
        population = seed_population(problem, rng)
        for ind in population:
            fitness(ind, problem)
        history: list[float] = []
        for iteration in range(problem.iterations):
            population.sort(key=Individual.sort_key)
            parents = population[: problem.parents]
            offspring = []
            for i in range(0, problem.parents, 2):
                child = crossover(parents[i], parents[i + 1], problem, rng, tree, candidates)
                fitness(child, problem)
                offspring.append(child)
            pool = population + offspring
            pool.sort(key=Individual.sort_key)
            population = pool[: problem.population]
            history.append(population[0].fitness)
            if observer is not None:
                observer(run_idx, iteration, population)

        population.sort(key=Individual.sort_key)
        best = population[0]
        if best_overall is None or best.fitness < best_overall.fitness:
            best_overall = best
            best_history = history
        if (
            math.isfinite(best.fitness)
            and best.vdop_avg <= problem.vdop_tolerance
            and best.hdop_avg <= problem.hdop_tolerance
        ):
            return PlacementResult(
                layout=BeaconLayout(positions=best.beacons),
                vdop_avg=best.vdop_avg,
                hdop_avg=best.hdop_avg,
                history=history,
                iterations=len(history),
                restarts=run_idx,
                feasible=True,
            )

    assert best_overall is not None
    return PlacementResult(
        layout=BeaconLayout(positions=best_overall.beacons),
        vdop_avg=best_overall.vdop_avg,
        hdop_avg=best_overall.hdop_avg,
        history=best_history,
        iterations=len(best_history),
        restarts=problem.max_restarts,
        feasible=False,
    )
