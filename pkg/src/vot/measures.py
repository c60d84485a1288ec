"""Data model for multi-species discrete measures and cost tensors.

Implements:
  * SupportSet / VectorMeasure: n nonnegative weight vectors over a finite
    labelled support, with admissibility validation (total mass 1, or the
    relaxed equal-mass mode used for distance computations).
  * CostTensor / MetricSpec: an n x n family of M x N cost matrices with
    +inf allowed as a "forbidden transformation" sentinel, plus the
    exponent p carried alongside for p-transportation distances.
  * build_kappa_cost: the constant-transformation-surcharge family
    (diagonal blocks equal a base cost, off-diagonal blocks base + kappa).
  * Cost models for the three problem-file cost kinds (explicit blocks,
    q-norm plus kappa, epsilon-discrete) that can be evaluated on points
    and materialized into tensors.
  * JSON loading/saving of problem, measure, metric and support files.

All types are immutable after construction and safe to share across
threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    MassMismatchError,
    MeasureValidationError,
    ProblemFormatError,
    VotError,
)

#: absolute tolerance on total mass, per admissibility validation
MASS_TOL = 1e-9

_INF = float("inf")


# ---------------------------------------------------------------------------
# supports
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Point:
    """One support atom: an opaque label plus optional real coordinates."""

    label: str
    coords: tuple[float, ...] | None = None


class SupportSet:
    """Finite ordered support, M >= 1 points with unique labels.

    Coordinate vectors, when present, must share one dimension; they feed
    the built-in cost generators and are otherwise ignored.
    """

    __slots__ = ("points", "_index")

    def __init__(self, points: Iterable[Point | str]):
        pts = tuple(p if isinstance(p, Point) else Point(str(p)) for p in points)
        if not pts:
            raise DimensionMismatchError("a support set needs at least one point")
        labels = [p.label for p in pts]
        if len(set(labels)) != len(labels):
            dup = next(l for l in labels if labels.count(l) > 1)
            raise MeasureValidationError(f"duplicate support label {dup!r}")
        dims = {len(p.coords) for p in pts if p.coords is not None}
        if len(dims) > 1:
            raise DimensionMismatchError(
                f"support coordinates have mixed dimensions {sorted(dims)}"
            )
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_index", {p.label: k for k, p in enumerate(pts)})

    points: tuple[Point, ...]

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.points)

    def index_of(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"label {label!r} not in support") from None

    def coords_array(self) -> np.ndarray:
        """(M, dim) coordinate matrix; raises if any point lacks coords."""
        missing = [p.label for p in self.points if p.coords is None]
        if missing:
            raise ProblemFormatError(
                f"points {missing} have no coordinates (required by this cost kind)"
            )
        return np.array([p.coords for p in self.points], dtype=float)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        return isinstance(other, SupportSet) and self.points == other.points

    def __hash__(self) -> int:
        return hash(self.points)

    def __repr__(self) -> str:
        return f"SupportSet({list(self.labels)!r})"


def union_support(supports: Sequence[SupportSet]) -> SupportSet:
    """Union by label, keeping first-seen order and coords."""
    seen: dict[str, Point] = {}
    for sup in supports:
        for p in sup.points:
            if p.label not in seen:
                seen[p.label] = p
    return SupportSet(seen.values())


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------
class VectorMeasure:
    """n-species nonnegative weights over a finite support.

    Construction checks shapes only; admissibility (nonnegativity and
    normalization) is the job of :func:`validate_measure`, so invalid
    weight matrices can still be represented and diagnosed.

    Parameters
    ----------
    support : SupportSet
    weights : (n, M) array-like of mass per (species, atom)
    """

    __slots__ = ("support", "weights")

    def __init__(self, support: SupportSet, weights):
        w = np.array(weights, dtype=float)
        if w.ndim == 1:
            w = w[None, :]
        if w.ndim != 2:
            raise DimensionMismatchError(f"weights must be 2-d, got shape {w.shape}")
        if w.shape[1] != support.size:
            raise DimensionMismatchError(
                f"weights have {w.shape[1]} atoms but support has {support.size}"
            )
        w.setflags(write=False)
        self.support = support
        self.weights = w

    @property
    def species(self) -> int:
        return self.weights.shape[0]

    @property
    def size(self) -> int:
        return self.weights.shape[1]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def species_masses(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def normalized(self) -> "VectorMeasure":
        total = self.total_mass
        if total <= 0:
            raise MeasureValidationError("cannot normalize a zero-mass measure")
        return VectorMeasure(self.support, self.weights / total)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VectorMeasure)
            and self.support == other.support
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.support, self.weights.tobytes()))

    def __repr__(self) -> str:
        return f"VectorMeasure(n={self.species}, M={self.size}, mass={self.total_mass:.6g})"


@dataclass(frozen=True)
class MeasureViolation:
    kind: str  # "negative_weight" | "total_mass"
    species: int | None = None
    atom: int | None = None
    amount: float = 0.0
    message: str = ""

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class MeasureVerdict:
    ok: bool
    violations: tuple[MeasureViolation, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_measure(
    m: VectorMeasure, *, unit_mass: bool = True, tol: float = MASS_TOL
) -> MeasureVerdict:
    """Check admissibility; returns a verdict, never raises.

    Reports every negative weight as ``negative weight at species i, atom a``
    (1-based in messages) and, when ``unit_mass``, a deviation of the total
    mass from 1 beyond ``tol``.  Zero species rows are allowed.
    """
    bad: list[MeasureViolation] = []
    neg = np.argwhere(m.weights < 0)
    for i, a in neg:
        bad.append(
            MeasureViolation(
                "negative_weight",
                species=int(i),
                atom=int(a),
                amount=float(m.weights[i, a]),
                message=f"negative weight at species {i + 1}, atom {a + 1}",
            )
        )
    if unit_mass:
        total = m.total_mass
        if abs(total - 1.0) > tol:
            bad.append(
                MeasureViolation(
                    "total_mass",
                    amount=total,
                    message=f"total mass {total:g} ≠ 1",
                )
            )
    return MeasureVerdict(ok=not bad, violations=tuple(bad))


def require_matching_mass(mu: VectorMeasure, nu: VectorMeasure, tol: float = MASS_TOL):
    """Raise MassMismatchError unless the two totals agree within tol."""
    if abs(mu.total_mass - nu.total_mass) > tol * max(1.0, abs(mu.total_mass)):
        raise MassMismatchError(
            f"total masses differ: {mu.total_mass!r} vs {nu.total_mass!r}"
        )


# ---------------------------------------------------------------------------
# costs
# ---------------------------------------------------------------------------
class CostTensor:
    """n x n family of M x N cost matrices, +inf allowed, NaN and -inf not.

    Parameters
    ----------
    blocks : (n, n, M, N) array-like; blocks[i][j] prices moving species-i
        mass at a source atom into species-j mass at a target atom.
    symmetric : True when the family is transpose-symmetric on a shared
        support (c_ij(x, y) == c_ji(y, x)).
    metric_family : True when every block is finite, nonnegative, and the
        diagonal blocks vanish on identically-labelled point pairs.
    """

    __slots__ = ("blocks", "symmetric", "metric_family", "source_support", "target_support")

    def __init__(
        self,
        blocks,
        *,
        symmetric: bool = False,
        metric_family: bool = False,
        source_support: SupportSet | None = None,
        target_support: SupportSet | None = None,
    ):
        b = np.array(blocks, dtype=float)
        if b.ndim != 4 or b.shape[0] != b.shape[1]:
            raise DimensionMismatchError(
                f"cost blocks must form an (n, n, M, N) grid, got shape {b.shape}"
            )
        if np.isnan(b).any():
            i, j, a, k = map(int, np.argwhere(np.isnan(b))[0])
            raise VotError(f"NaN cost entry in block ({i + 1},{j + 1}) at ({a + 1},{k + 1})")
        if np.isneginf(b).any():
            raise VotError("cost entries must not be -inf")
        if source_support is not None and source_support.size != b.shape[2]:
            raise DimensionMismatchError(
                f"source support size {source_support.size} != cost rows {b.shape[2]}"
            )
        if target_support is not None and target_support.size != b.shape[3]:
            raise DimensionMismatchError(
                f"target support size {target_support.size} != cost cols {b.shape[3]}"
            )
        if metric_family:
            if not np.isfinite(b).all():
                raise VotError("metric_family costs must be finite")
            if (b < 0).any():
                raise VotError("metric_family costs must be nonnegative")
            for a, k in _matched_pairs(source_support, target_support, b.shape[2], b.shape[3]):
                d = np.abs(b[np.arange(b.shape[0]), np.arange(b.shape[0]), a, k])
                if (d > 1e-12).any():
                    raise VotError(
                        f"metric_family requires zero diagonal cost at matched point pair ({a + 1},{k + 1})"
                    )
        b.setflags(write=False)
        self.blocks = b
        self.symmetric = bool(symmetric)
        self.metric_family = bool(metric_family)
        self.source_support = source_support
        self.target_support = target_support

    @property
    def species(self) -> int:
        return self.blocks.shape[0]

    @property
    def source_size(self) -> int:
        return self.blocks.shape[2]

    @property
    def target_size(self) -> int:
        return self.blocks.shape[3]

    def block(self, i: int, j: int) -> np.ndarray:
        return self.blocks[i, j]

    def powered(self, p: float) -> "CostTensor":
        """Entrywise p-th power (used to turn distances into LP costs)."""
        if p == 1.0:
            return self
        return CostTensor(
            self.blocks**p,
            symmetric=self.symmetric,
            metric_family=self.metric_family,
            source_support=self.source_support,
            target_support=self.target_support,
        )


def _matched_pairs(src, tgt, m, n):
    if src is not None and tgt is not None:
        for a, p in enumerate(src.points):
            try:
                yield a, tgt.index_of(p.label)
            except KeyError:
                continue
    elif src is None and tgt is None and m == n:
        # anonymous square tensors: matched pairs are the diagonal
        yield from ((a, a) for a in range(m))


@dataclass(frozen=True)
class MetricSpec:
    """A distance family together with the transport exponent p >= 1."""

    costs: CostTensor
    p: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.p, (int, float)) and math.isfinite(self.p) and self.p >= 1):
            raise VotError(f"exponent p must be a finite real >= 1, got {self.p!r}")

    @property
    def species(self) -> int:
        return self.costs.species

    def lp_costs(self) -> CostTensor:
        """Costs raised to the p-th power, the LP objective for W_p."""
        return self.costs.powered(float(self.p))


def as_metric_spec(cost: "CostTensor | MetricSpec", p: float | None = None) -> MetricSpec:
    if isinstance(cost, MetricSpec):
        return cost if p is None else MetricSpec(cost.costs, p)
    return MetricSpec(cost, 1.0 if p is None else p)


def build_kappa_cost(
    base,
    kappa: float,
    n: int,
    *,
    source_support: SupportSet | None = None,
    target_support: SupportSet | None = None,
) -> CostTensor:
    """Constant-surcharge family: c_ii = base, c_ij = base + kappa (i != j).

    The symmetric flag is set iff the base matrix is symmetric and the two
    supports coincide (both given and equal, or both omitted with a square
    base).
    """
    b = np.array(base, dtype=float)
    if b.ndim != 2:
        raise DimensionMismatchError(f"base cost must be a matrix, got shape {b.shape}")
    if np.isnan(b).any():
        raise VotError("base cost contains NaN")
    if not (isinstance(kappa, (int, float)) and not math.isnan(kappa)):
        raise VotError(f"kappa must be a real number, got {kappa!r}")
    if n < 1:
        raise VotError("species count must be >= 1")
    blocks = np.empty((n, n) + b.shape, dtype=float)
    for i in range(n):
        for j in range(n):
            blocks[i, j] = b if i == j else b + kappa
    same_space = (
        source_support is not None
        and target_support is not None
        and source_support.labels == target_support.labels
    ) or (source_support is None and target_support is None and b.shape[0] == b.shape[1])
    sym = bool(same_space and b.shape[0] == b.shape[1] and np.array_equal(b, b.T))
    metric = bool(
        sym
        and kappa >= 0
        and np.isfinite(b).all()
        and (b >= 0).all()
        and (np.abs(np.diag(b)) <= 1e-12).all()
    )
    return CostTensor(
        blocks,
        symmetric=sym,
        metric_family=metric,
        source_support=source_support,
        target_support=target_support,
    )


# ---------------------------------------------------------------------------
# cost models (problem-file cost kinds, evaluable on points)
# ---------------------------------------------------------------------------
class CostModel:
    """A cost family that can price any labelled point pair.

    Subclasses implement :meth:`value`; tensors over concrete supports are
    assembled from it.
    """

    species: int

    def value(self, i: int, j: int, x: Point, y: Point) -> float:
        raise NotImplementedError

    def tensor(self, src: SupportSet, tgt: SupportSet) -> CostTensor:
        n = self.species
        blocks = np.empty((n, n, src.size, tgt.size), dtype=float)
        for i in range(n):
            for j in range(n):
                for a, x in enumerate(src.points):
                    for b, y in enumerate(tgt.points):
                        blocks[i, j, a, b] = self.value(i, j, x, y)
        return CostTensor(
            blocks,
            symmetric=src.labels == tgt.labels and self._symmetric_on_shared(),
            metric_family=self._is_metric_family(),
            source_support=src,
            target_support=tgt,
        )

    def spec(self, src: SupportSet, tgt: SupportSet, p: float = 1.0) -> MetricSpec:
        return MetricSpec(self.tensor(src, tgt), p)

    def square_spec(self, supports: Sequence[SupportSet], p: float = 1.0) -> MetricSpec:
        """Tensor over the union support, source == target (for audits)."""
        u = union_support(supports)
        return MetricSpec(self.tensor(u, u), p)

    def _symmetric_on_shared(self) -> bool:
        return True

    def _is_metric_family(self) -> bool:
        return False


@dataclass(frozen=True)
class LpNormPlusKappa(CostModel):
    """d_ii = q-norm of the coordinate difference, d_ij = d + kappa off it."""

    species: int
    kappa: float
    q: float = 2.0

    def value(self, i, j, x, y):
        if x.coords is None or y.coords is None:
            raise ProblemFormatError(
                f"cost kind lp_norm_plus_kappa needs coordinates on every point "
                f"(missing on {x.label!r} or {y.label!r})"
            )
        diff = np.abs(np.asarray(x.coords) - np.asarray(y.coords))
        if self.q == _INF:
            d = float(diff.max()) if diff.size else 0.0
        else:
            d = float((diff**self.q).sum() ** (1.0 / self.q))
        return d + (self.kappa if i != j else 0.0)

    def _is_metric_family(self) -> bool:
        return self.kappa >= 0 and self.q >= 1


@dataclass(frozen=True)
class DiscreteEpsilon(CostModel):
    """Every block is the epsilon-discrete distance: eps if x != y, else 0.

    The distance is compared by point label.
    """

    species: int
    epsilon: float

    def value(self, i, j, x, y):
        return 0.0 if x.label == y.label else self.epsilon

    def _is_metric_family(self) -> bool:
        return self.epsilon >= 0


class ExplicitCost(CostModel):
    """Label-indexed explicit blocks over one declared square support."""

    def __init__(self, species: int, support: SupportSet, blocks):
        b = np.array(blocks, dtype=float)
        expect = (species, species, support.size, support.size)
        if b.shape != expect:
            raise DimensionMismatchError(
                f"explicit metric blocks have shape {b.shape}, expected {expect}"
            )
        self.species = species
        self.support = support
        self.blocks = b

    def value(self, i, j, x, y):
        try:
            a = self.support.index_of(x.label)
            b = self.support.index_of(y.label)
        except KeyError as e:
            raise ProblemFormatError(
                f"point not covered by the explicit metric support: {e.args[0]}"
            ) from None
        return float(self.blocks[i, j, a, b])

    def _symmetric_on_shared(self) -> bool:
        return all(
            np.array_equal(self.blocks[i, j], self.blocks[j, i].T)
            for i in range(self.species)
            for j in range(self.species)
        )

    def _is_metric_family(self) -> bool:
        b = self.blocks
        if not (np.isfinite(b).all() and (b >= 0).all()):
            return False
        diag = b[np.arange(self.species), np.arange(self.species)]
        return bool((np.abs(diag[:, np.arange(b.shape[2]), np.arange(b.shape[3])]) <= 1e-12).all())


# ---------------------------------------------------------------------------
# JSON input/output
# ---------------------------------------------------------------------------
def _read_json(src) -> dict:
    if isinstance(src, (str, Path)):
        text = Path(src).read_text(encoding="utf-8")
        name = str(src)
    elif isinstance(src, bytes):
        text, name = src.decode("utf-8"), "<bytes>"
    elif hasattr(src, "read"):
        raw = src.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        name = getattr(src, "name", "<stream>")
    else:
        raise ProblemFormatError(f"cannot read problem from {type(src).__name__}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemFormatError(
            f"{name}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ProblemFormatError(f"{name}: top-level JSON value must be an object")
    return data


def _need(data: dict, key: str, where: str):
    if key not in data:
        raise ProblemFormatError(f"missing field {where}.{key}" if where else f"missing field {key}")
    return data[key]


def _parse_points(raw, where: str) -> SupportSet:
    if not isinstance(raw, list) or not raw:
        raise ProblemFormatError(f"{where} must be a non-empty list of point records")
    pts = []
    for k, rec in enumerate(raw):
        if isinstance(rec, dict):
            label = rec.get("label")
            if not isinstance(label, str):
                raise ProblemFormatError(f"{where}[{k}].label must be a string")
            coords = rec.get("coords")
            if coords is not None:
                if not isinstance(coords, list) or not all(
                    isinstance(c, (int, float)) for c in coords
                ):
                    raise ProblemFormatError(f"{where}[{k}].coords must be a list of reals")
                coords = tuple(float(c) for c in coords)
            pts.append(Point(label, coords))
        elif isinstance(rec, str):
            pts.append(Point(rec))
        else:
            raise ProblemFormatError(f"{where}[{k}] must be an object or a string label")
    try:
        return SupportSet(pts)
    except VotError as e:
        raise ProblemFormatError(f"{where}: {e}") from None


def _parse_cost_entry(v, where: str) -> float:
    if v == "inf":
        return _INF
    if isinstance(v, (int, float)):
        return float(v)
    raise ProblemFormatError(f'{where}: cost entries must be numbers or "inf", got {v!r}')


def _parse_measure_block(raw, species: int, where: str) -> VectorMeasure:
    support = _parse_points(_need(raw, "points", where), f"{where}.points")
    weights = _need(raw, "weights", where)
    if not isinstance(weights, list):
        raise ProblemFormatError(f"{where}.weights must be a matrix")
    w = []
    for i, row in enumerate(weights):
        if not isinstance(row, list) or not all(isinstance(x, (int, float)) for x in row):
            raise ProblemFormatError(f"{where}.weights[{i}] must be a list of reals")
        w.append([float(x) for x in row])
    arr = np.array(w, dtype=float) if w else np.zeros((0, support.size))
    if arr.ndim != 2 or arr.shape[0] != species:
        raise DimensionMismatchError(
            f"{where}.weights has {arr.shape[0] if arr.ndim == 2 else '?'} species rows, "
            f"expected {species}"
        )
    if arr.shape[1] != support.size:
        raise DimensionMismatchError(
            f"{where}.weights has {arr.shape[1]} atoms but {where}.points lists {support.size}"
        )
    return VectorMeasure(support, arr)


def _parse_cost_model(raw, species: int, where: str):
    """Returns either a CostModel or, for kind=explicit in problem files,
    the raw (n, n, M, N) block array."""
    kind = _need(raw, "kind", where)
    if kind == "explicit":
        blocks = _need(raw, "blocks", where)
        try:
            arr = np.array(
                [
                    [
                        [[_parse_cost_entry(v, f"{where}.blocks[{i}][{j}]") for v in row] for row in blk]
                        for j, blk in enumerate(rowblocks)
                    ]
                    for i, rowblocks in enumerate(blocks)
                ],
                dtype=float,
            )
        except ProblemFormatError:
            raise
        except (TypeError, ValueError):
            raise ProblemFormatError(
                f"{where}.blocks must be an n x n grid of equally-shaped M x N matrices"
            ) from None
        if arr.ndim != 4 or arr.shape[:2] != (species, species):
            raise DimensionMismatchError(
                f"{where}.blocks has grid shape {arr.shape[:2]}, expected ({species}, {species})"
            )
        return arr
    if kind == "lp_norm_plus_kappa":
        kappa = _need(raw, "kappa", where)
        q = raw.get("q", 2.0)
        if not isinstance(kappa, (int, float)) or not isinstance(q, (int, float)):
            raise ProblemFormatError(f"{where}: kappa and q must be reals")
        return LpNormPlusKappa(species, float(kappa), float(q))
    if kind == "discrete_epsilon":
        eps = _need(raw, "epsilon", where)
        if not isinstance(eps, (int, float)):
            raise ProblemFormatError(f"{where}.epsilon must be a real")
        return DiscreteEpsilon(species, float(eps))
    raise ProblemFormatError(f"{where}.kind must be one of explicit | lp_norm_plus_kappa | discrete_epsilon")


def _explicit_blocks_mismatch(arr: np.ndarray, mu: VectorMeasure, nu: VectorMeasure):
    n = arr.shape[0]
    for i in range(n):
        for j in range(n):
            blk = arr[i, j]
            if blk.shape != (mu.size, nu.size):
                raise DimensionMismatchError(
                    f"cost block ({i + 1},{j + 1}) has shape {blk.shape}, "
                    f"expected ({mu.size}, {nu.size})"
                )


def load_problem(src, *, mass_tol: float = MASS_TOL):
    """Load a problem file: (source measure, target measure, cost).

    The cost is a CostTensor, or a MetricSpec when the file carries an
    explicit "p".  Normalization to unit total mass is applied only when
    the file requests it; negative weights are always rejected, and the
    two totals must agree within ``mass_tol``.
    """
    data = _read_json(src)
    species = _need(data, "species", "")
    if not isinstance(species, int) or species < 1:
        raise ProblemFormatError("species must be a positive integer")
    mu = _parse_measure_block(_need(data, "source", ""), species, "source")
    nu = _parse_measure_block(_need(data, "target", ""), species, "target")
    normalize = data.get("normalize", False)
    if not isinstance(normalize, bool):
        raise ProblemFormatError("normalize must be a boolean")
    if normalize:
        mu, nu = mu.normalized(), nu.normalized()
    for name, m in (("source", mu), ("target", nu)):
        verdict = validate_measure(m, unit_mass=False)
        if not verdict.ok:
            raise MeasureValidationError(f"{name}: " + "; ".join(map(str, verdict.violations)))
    require_matching_mass(mu, nu, tol=mass_tol)

    model = _parse_cost_model(_need(data, "cost", ""), species, "cost")
    if isinstance(model, np.ndarray):
        _explicit_blocks_mismatch(model, mu, nu)
        sym = (
            mu.support.labels == nu.support.labels
            and all(
                np.array_equal(model[i, j], model[j, i].T)
                for i in range(species)
                for j in range(species)
            )
        )
        cost = CostTensor(
            model,
            symmetric=sym,
            source_support=mu.support,
            target_support=nu.support,
        )
    else:
        cost = model.tensor(mu.support, nu.support)

    if "p" in data:
        p = data["p"]
        if not isinstance(p, (int, float)):
            raise ProblemFormatError("p must be a real number")
        return mu, nu, MetricSpec(cost, float(p))
    return mu, nu, cost


def _points_json(support: SupportSet) -> list:
    out = []
    for p in support.points:
        rec: dict = {"label": p.label}
        if p.coords is not None:
            rec["coords"] = list(p.coords)
        out.append(rec)
    return out


def _jsonable_costs(blocks: np.ndarray):
    def enc(v: float):
        return "inf" if v == _INF else v

    return [
        [
            [[enc(float(v)) for v in row] for row in blocks[i, j]]
            for j in range(blocks.shape[1])
        ]
        for i in range(blocks.shape[0])
    ]


def save_problem(dst, mu: VectorMeasure, nu: VectorMeasure, cost, *, normalize: bool = False):
    """Write a problem file with explicit cost blocks.

    Weights and finite cost entries round-trip bit-exactly through
    ``load_problem`` (floats are serialized via repr).
    """
    spec = cost if isinstance(cost, MetricSpec) else None
    tensor = spec.costs if spec is not None else cost
    doc = {
        "species": mu.species,
        "source": {"points": _points_json(mu.support), "weights": mu.weights.tolist()},
        "target": {"points": _points_json(nu.support), "weights": nu.weights.tolist()},
        "cost": {"kind": "explicit", "blocks": _jsonable_costs(tensor.blocks)},
        "normalize": normalize,
    }
    if spec is not None:
        doc["p"] = spec.p
    text = json.dumps(doc, indent=2)
    if isinstance(dst, (str, Path)):
        Path(dst).write_text(text, encoding="utf-8")
    else:
        dst.write(text)


def load_measure(src, *, mass_tol: float = MASS_TOL) -> VectorMeasure:
    """Load a standalone measure file {species, points, weights, normalize?}."""
    data = _read_json(src)
    species = _need(data, "species", "")
    if not isinstance(species, int) or species < 1:
        raise ProblemFormatError("species must be a positive integer")
    m = _parse_measure_block(data, species, "measure")
    if data.get("normalize", False):
        m = m.normalized()
    verdict = validate_measure(m, unit_mass=False, tol=mass_tol)
    if not verdict.ok:
        raise MeasureValidationError("; ".join(map(str, verdict.violations)))
    return m


def load_metric(src) -> tuple[CostModel, float]:
    """Load a metric file; returns (cost model, default exponent p)."""
    data = _read_json(src)
    species = _need(data, "species", "")
    if not isinstance(species, int) or species < 1:
        raise ProblemFormatError("species must be a positive integer")
    p = data.get("p", 1.0)
    if not isinstance(p, (int, float)):
        raise ProblemFormatError("p must be a real number")
    raw = dict(data)
    raw.setdefault("kind", "explicit")
    if raw["kind"] == "explicit":
        support = _parse_points(_need(data, "points", ""), "points")
        blocks = _parse_cost_model({"kind": "explicit", "blocks": _need(data, "blocks", "")},
                                   species, "")
        model: CostModel = ExplicitCost(species, support, blocks)
    else:
        parsed = _parse_cost_model(raw, species, "")
        assert isinstance(parsed, CostModel)
        model = parsed
    return model, float(p)


def load_supports(src) -> list[SupportSet]:
    """Load a supports file: {"supports": [[points...], ...]} or {"points": [...]}."""
    data = _read_json(src)
    if "supports" in data:
        raw = data["supports"]
        if not isinstance(raw, list) or not raw:
            raise ProblemFormatError("supports must be a non-empty list of point lists")
        if len(raw) > 3:
            raise ProblemFormatError("at most three support sets may be supplied")
        return [_parse_points(r, f"supports[{k}]") for k, r in enumerate(raw)]
    if "points" in data:
        return [_parse_points(data["points"], "points")]
    raise ProblemFormatError('supports file needs a "supports" or "points" field')
