"""Brute-force verification of the transport equivalences.

Two small-instance solvers drive the checks:

* :func:`solve_constrained` enumerates every permutation pushing the
  degraded support exactly onto the clean support and minimizes the
  average displacement.  Its optimum is the Wasserstein-1 distance
  between the two supports.
* :func:`solve_relaxed` enumerates every map from the degraded support
  into a finite candidate codomain and minimizes average displacement
  plus ``lam`` times the Wasserstein-1 distance between the pushforward
  and the clean support.

For ``lam > 1`` the two argmin sets must coincide and the relaxed
minimum must equal W1 between the supports; :func:`verify_theorem1`
checks exactly that.  :func:`check_proposition2` is an independent
Monte-Carlo check that, for distribution-matched reconstructions
independent of the noise, distance-to-clean and distance-to-noisy
rank candidates identically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from otdenoise.errors import EnumerationBudgetError
from otdenoise.measures import CostSpec, EmpiricalMeasure
from otdenoise.solvers import kantorovich_lp

VALUE_TOL = 1e-9
MAX_INSTANCE_SIZE = 6
DEFAULT_MAP_BUDGET = 50_000


@dataclass(frozen=True)
class RelaxedInstance:
    """A small discrete instance of the relaxed objective.

    ``source`` holds the degraded points, ``target`` the clean points;
    both are uniform with the same size n <= 6.  ``codomain`` is the
    finite set of candidate output points maps may choose from and must
    contain every target point so the constrained optimum is attainable.
    """

    source: EmpiricalMeasure
    target: EmpiricalMeasure
    lam: float
    codomain: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "codomain",
                           np.atleast_2d(np.asarray(self.codomain, dtype=np.float64)))
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.source.n != self.target.n:
            raise ValueError("source and target must have equal size")
        if self.source.n > MAX_INSTANCE_SIZE:
            raise ValueError(f"instance size {self.source.n} > {MAX_INSTANCE_SIZE}")
        if not (self.source.is_uniform() and self.target.is_uniform()):
            raise ValueError("source and target must be uniform")
        if self.codomain.shape[1] != self.source.dim:
            raise ValueError("codomain dimension mismatch")
        if _locate_rows(self.target.points, self.codomain) is None:
            raise ValueError("codomain must contain every target point")

    @property
    def n(self) -> int:
        return self.source.n


@dataclass(frozen=True)
class TheoremVerdict:
    """Outcome of one equivalence check.

    ``holds`` is true iff the relaxed minimum equals W1 between the
    supports within tolerance and the two argmin sets are identical.
    Argmin sets are frozensets of codomain-index tuples, one index per
    source point.
    """

    relaxed_min: float
    w1_xy: float
    relaxed_argmin_set: frozenset
    constrained_argmin_set: frozenset
    holds: bool


def _locate_rows(rows: np.ndarray, table: np.ndarray):
    """Index of each row of ``rows`` in ``table`` (exact match), else None."""
    idx = np.empty(len(rows), dtype=np.intp)
    for i, r in enumerate(rows):
        hits = np.flatnonzero(np.all(table == r, axis=1))
        if len(hits) == 0:
            return None
        idx[i] = hits[0]
    return idx


def make_codomain(source: EmpiricalMeasure, target: EmpiricalMeasure) -> np.ndarray:
    """Candidate output points: target support, source support, midpoints.

    Target points come first (they make the constrained optimum
    attainable); source points let maps keep their input; index-matched
    midpoints stress-test that no in-between point wins.  Exact
    duplicates are dropped, keeping first occurrence.
    """
    mids = 0.5 * (source.points + target.points)
    stacked = np.vstack([target.points, source.points, mids])
    seen = {}
    for row in stacked:
        seen.setdefault(row.tobytes(), row)
    return np.array(list(seen.values()))


def random_instance(rng: np.random.Generator, n: int, d: int,
                    lam: float) -> RelaxedInstance:
    """Uniform random instance with standard-normal supports."""
    source = EmpiricalMeasure.uniform(rng.normal(size=(n, d)))
    target = EmpiricalMeasure.uniform(rng.normal(size=(n, d)))
    return RelaxedInstance(source, target, lam, make_codomain(source, target))


def solve_constrained(inst: RelaxedInstance) -> tuple[float, frozenset]:
    """Minimum average displacement over maps pushing source onto target.

    Enumerates all permutations of the target points and returns the
    optimal value together with every optimal map, canonicalized as a
    tuple of codomain indices per source point.
    """
    n = inst.n
    d = np.linalg.norm(
        inst.source.points[:, None, :] - inst.target.points[None, :, :], axis=2)
    t2c = _locate_rows(inst.target.points, inst.codomain)
    best = np.inf
    argmins = set()
    for perm in itertools.permutations(range(n)):
        val = d[np.arange(n), perm].mean()
        if val < best - VALUE_TOL:
            best = val
            argmins = {perm}
        elif val <= best + VALUE_TOL:
            argmins.add(perm)
            best = min(best, val)
    maps = frozenset(tuple(int(t2c[j]) for j in perm) for perm in argmins)
    return float(best), maps


def solve_relaxed(inst: RelaxedInstance,
                  budget: int = DEFAULT_MAP_BUDGET) -> tuple[float, frozenset]:
    """Global minimum of the relaxed objective over all codomain maps.

    Exhaustively enumerates the ``K^n`` maps from source points into the
    codomain.  The penalty term is the Wasserstein-1 distance between
    the uniform pushforward of a map and the target support; on these
    uniform equal-count instances it reduces to an optimal assignment of
    the image multiset, enumerated exactly (and cached per multiset,
    since it does not depend on which source point produced which image
    point).
    """
    n, k = inst.n, len(inst.codomain)
    n_maps = k ** n
    if n_maps > budget:
        raise EnumerationBudgetError(n_maps, budget)
    d_fid = np.linalg.norm(
        inst.source.points[:, None, :] - inst.codomain[None, :, :], axis=2)
    d_tc = np.linalg.norm(
        inst.target.points[:, None, :] - inst.codomain[None, :, :], axis=2)

    maps = np.stack(np.meshgrid(*([np.arange(k)] * n), indexing="ij"),
                    axis=-1).reshape(n_maps, n)
    fid = np.zeros(n_maps)
    for i in range(n):
        fid += d_fid[i, maps[:, i]]
    fid /= n

    multisets, inverse = np.unique(np.sort(maps, axis=1), axis=0,
                                   return_inverse=True)
    perms = np.array(list(itertools.permutations(range(n))))
    w1 = np.full(len(multisets), np.inf)
    for perm in perms:
        cost = np.zeros(len(multisets))
        for j in range(n):
            cost += d_tc[j, multisets[:, perm[j]]]
        np.minimum(w1, cost / n, out=w1)

    obj = fid + inst.lam * w1[inverse]
    best = float(obj.min())
    sel = np.flatnonzero(obj <= best + VALUE_TOL)
    return best, frozenset(tuple(int(v) for v in maps[s]) for s in sel)


def verify_theorem1(inst: RelaxedInstance,
                    budget: int = DEFAULT_MAP_BUDGET) -> TheoremVerdict:
    """Check that the relaxed and constrained problems agree.

    For ``lam > 1`` the verdict must hold on every valid instance: the
    relaxed minimum equals the Wasserstein-1 distance between the clean
    and degraded supports, and the relaxed argmin set equals the
    constrained one.  Instances with ``lam <= 1`` are accepted and
    simply report whether the equivalence happens to hold.
    """
    relaxed_min, relaxed_set = solve_relaxed(inst, budget=budget)
    _, constrained_set = solve_constrained(inst)
    _, w1_xy = kantorovich_lp(inst.target, inst.source, CostSpec(beta=1.0))
    holds = (abs(relaxed_min - w1_xy) <= VALUE_TOL
             and relaxed_set == constrained_set)
    return TheoremVerdict(relaxed_min, w1_xy, relaxed_set, constrained_set, holds)


@dataclass(frozen=True)
class Prop2Report:
    """Monte-Carlo comparison of distance-to-clean vs distance-to-noisy.

    Candidates are rotations ``cos(t) X + sin(t) X'`` of the clean
    signal with an independent copy, so every candidate matches the
    clean distribution and is independent of the noise.  Both squared
    distances should equal a constant minus twice the candidate-clean
    correlation; the ``gap_*`` fields measure the residuals of those
    identities and must vanish within Monte-Carlo error.
    ``xhat_noise_corr`` is recorded for reference only.
    """

    mix_cosines: tuple
    obj_to_clean: tuple
    obj_to_noisy: tuple
    gap_clean: tuple
    gap_noisy: tuple
    gap_clean_se: tuple
    gap_noisy_se: tuple
    spearman: float
    xhat_noise_corr: tuple

    @property
    def ranks_agree(self) -> bool:
        return self.spearman == 1.0


def _spearman(u: np.ndarray, v: np.ndarray) -> float:
    """Spearman rank correlation; exactly 1.0 when rankings coincide."""
    ru = np.argsort(np.argsort(u)).astype(np.float64)
    rv = np.argsort(np.argsort(v)).astype(np.float64)
    n = len(u)
    d2 = float(np.sum((ru - rv) ** 2))
    return 1.0 - 6.0 * d2 / (n * (n * n - 1))


def check_proposition2(sigma_noise: float, dim: int = 4,
                       n_samples: int = 100_000, seed: int = 0,
                       n_candidates: int = 5) -> Prop2Report:
    if sigma_noise <= 0:
        raise ValueError(f"sigma_noise must be positive, got {sigma_noise}")
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n_samples, dim))
    x_prime = rng.normal(size=(n_samples, dim))
    noise = sigma_noise * rng.normal(size=(n_samples, dim))
    y = x + noise

    thetas = np.linspace(0.0, np.pi / 2, n_candidates)
    obj_c, obj_n, gap_c, gap_n, se_c, se_n, corrs = [], [], [], [], [], [], []
    for t in thetas:
        xhat = np.cos(t) * x + np.sin(t) * x_prime
        sq = lambda v: np.einsum("ij,ij->i", v, v)
        to_clean = sq(xhat - x)
        to_noisy = sq(xhat - y)
        # residuals of const - 2 E(xhat . x); zero iff the candidate matches
        # the clean distribution (second moment) and ignores the noise
        g_c = sq(xhat) - sq(x)
        g_n = (sq(xhat) - sq(x)
               + 2 * np.einsum("ij,ij->i", x, noise)
               - 2 * np.einsum("ij,ij->i", xhat, noise))
        obj_c.append(float(to_clean.mean()))
        obj_n.append(float(to_noisy.mean()))
        gap_c.append(float(g_c.mean()))
        gap_n.append(float(g_n.mean()))
        se_c.append(float(g_c.std(ddof=1) / np.sqrt(n_samples)))
        se_n.append(float(g_n.std(ddof=1) / np.sqrt(n_samples)))
        corrs.append(float(
            np.mean(np.einsum("ij,ij->i", xhat, noise))
            / np.sqrt(np.mean(sq(xhat)) * np.mean(sq(noise)))))

    rho = _spearman(np.array(obj_c), np.array(obj_n))
    return Prop2Report(
        mix_cosines=tuple(np.cos(thetas)),
        obj_to_clean=tuple(obj_c),
        obj_to_noisy=tuple(obj_n),
        gap_clean=tuple(gap_c),
        gap_noisy=tuple(gap_n),
        gap_clean_se=tuple(se_c),
        gap_noisy_se=tuple(se_n),
        spearman=rho,
        xhat_noise_corr=tuple(corrs),
    )
