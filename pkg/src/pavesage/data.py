"""Section-year schema, CSV I/O, feature assembly, and a synthetic generator.

The record layout mirrors an agency pavement-management inventory: each
section carries route/marker identity, five years (2014-2018) of twelve
condition indicators, traffic loading, treatment history, and categorical
attributes. The synthetic generator plants a spatially correlated latent
deterioration-rate factor so that the value of neighbor information is a
controllable, measurable property of the data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ConfigError, DataError, SchemaError, VocabularyError
from .graph import RoadGraph, build_graph


@dataclass(frozen=True)
class IndicatorDef:
    name: str
    lo: float
    hi: float | None  # None = unbounded above
    worsens_upward: bool


INDICATORS: tuple[IndicatorDef, ...] = (
    IndicatorDef("shallow_rutting", 0.0, 100.0, True),
    IndicatorDef("deep_rutting", 0.0, 100.0, True),
    IndicatorDef("patching", 0.0, 100.0, True),
    IndicatorDef("failures", 0.0, None, True),
    IndicatorDef("block_cracking", 0.0, 100.0, True),
    IndicatorDef("alligator_cracking", 0.0, 100.0, True),
    IndicatorDef("longitudinal_cracking", 0.0, None, True),
    IndicatorDef("transverse_cracking", 0.0, None, True),
    IndicatorDef("iri", 0.0, None, True),
    IndicatorDef("ride_score", 0.0, 5.0, False),
    IndicatorDef("distress_score", 0.0, 100.0, False),
    IndicatorDef("condition_score", 0.0, 100.0, False),
)
INDICATOR_NAMES = tuple(d.name for d in INDICATORS)
INDICATOR_BY_NAME = {d.name: d for d in INDICATORS}

HISTORY_YEARS = (2014, 2015, 2016, 2017)
TARGET_YEAR = 2018
ALL_YEARS = HISTORY_YEARS + (TARGET_YEAR,)

CLIMATE_ZONES = ("west", "east", "north", "south", "central")
PAVEMENT_TYPES = (4, 5, 6, 9, 10)
FUNCTIONAL_CLASSES = (
    "IH", "US", "UA", "SH", "SA", "SL", "SS", "BF", "BI", "BS",
    "BU", "FM", "FS", "RM", "RR", "RE", "RP", "PR", "CR",
)

TREATMENT_LEVELS = ("pm", "lr", "mr", "hr")
TREATMENTS: dict[str, str] = {
    # preventive maintenance
    "cape_seal": "pm",
    "fog_seal": "pm",
    "micro_surfacing": "pm",
    "seal_coat": "pm",
    "thin_overlay": "pm",
    "ultra_thin_friction_course": "pm",
    # light rehabilitation
    "base_repair_and_seal": "lr",
    "cold_in_place_recycling": "lr",
    "hot_in_place_recycling": "lr",
    "mill_and_inlay": "lr",
    "overlay_2_to_3_inch": "lr",
    # medium rehabilitation
    "base_repair_spot_seal_edge_repair_and_overlay": "mr",
    "level_up_and_overlay": "mr",
    "mill_and_overlay": "mr",
    "mill_stabilize_base_and_seal": "mr",
    "overlay_3_to_5_inch": "mr",
    # heavy rehabilitation
    "full_depth_reclamation": "hr",
    "mill_cement_stabilize_base_and_overlay": "hr",
    "reconstruction": "hr",
    "thick_overlay_over_5_inch": "hr",
}


@dataclass
class SectionRecord:
    """One pavement section with its five-year condition history."""

    section_id: str
    route_id: str
    begin_marker: str
    end_marker: str
    condition: dict[str, dict[int, float | None]]
    traffic: float | None
    time_since_treatment: float | None
    treatments: frozenset[str]
    climate_zone: str
    pavement_type: int
    functional_class: str


ID_COLUMNS = ("section_id", "route_id", "begin_marker", "end_marker")
TAIL_COLUMNS = (
    "traffic",
    "time_since_treatment",
    "treatment_history",
    "climate_zone",
    "pavement_type",
    "functional_class",
)


def csv_columns() -> tuple[str, ...]:
    """The documented CSV header, in order."""
    condition = tuple(
        f"{name}_{year}" for name in INDICATOR_NAMES for year in ALL_YEARS
    )
    return ID_COLUMNS + condition + TAIL_COLUMNS


@dataclass
class LoadReport:
    n_rows: int = 0
    n_loaded: int = 0
    issues: list[tuple[int, str]] = field(default_factory=list)

    @property
    def n_dropped(self) -> int:
        return self.n_rows - self.n_loaded


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, records: list[SectionRecord]) -> None:
    """Writes records in the documented schema (UTF-8, '.' decimals, empty=missing)."""
    cols = csv_columns()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for r in records:
            row = [r.section_id, r.route_id, r.begin_marker, r.end_marker]
            for name in INDICATOR_NAMES:
                for year in ALL_YEARS:
                    row.append(_fmt(r.condition.get(name, {}).get(year)))
            row.append(_fmt(r.traffic))
            row.append(_fmt(r.time_since_treatment))
            row.append("|".join(sorted(r.treatments)))
            row.append(r.climate_zone)
            row.append(str(r.pavement_type))
            row.append(r.functional_class)
            writer.writerow(row)


def _parse_optional_float(cell: str, col: str, lo: float, hi: float | None):
    if cell == "":
        return None
    try:
        v = float(cell)
    except ValueError:
        raise ValueError(f"{col}: cannot parse {cell!r} as a number")
    if not math.isfinite(v):
        raise ValueError(f"{col}: non-finite value {cell!r}")
    if v < lo or (hi is not None and v > hi):
        hi_txt = "inf" if hi is None else _fmt(hi)
        raise ValueError(f"{col}: value {cell} outside allowed range [{_fmt(lo)}, {hi_txt}]")
    return v


def _parse_row(row: dict[str, str]) -> SectionRecord:
    for col in ID_COLUMNS:
        if not row[col].strip():
            raise ValueError(f"{col}: mandatory identifier is empty")
    condition: dict[str, dict[int, float | None]] = {}
    for d in INDICATORS:
        per_year: dict[int, float | None] = {}
        for year in ALL_YEARS:
            col = f"{d.name}_{year}"
            per_year[year] = _parse_optional_float(row[col], col, d.lo, d.hi)
        condition[d.name] = per_year
    traffic = _parse_optional_float(row["traffic"], "traffic", 0.0, None)
    tst = _parse_optional_float(
        row["time_since_treatment"], "time_since_treatment", 0.0, None
    )
    raw_treat = row["treatment_history"].strip()
    treatments = frozenset(t for t in raw_treat.split("|") if t) if raw_treat else frozenset()
    for t in treatments:
        if t not in TREATMENTS:
            raise ValueError(f"treatment_history: unknown treatment {t!r}")
    climate = row["climate_zone"].strip()
    if climate not in CLIMATE_ZONES:
        raise ValueError(f"climate_zone: unknown label {climate!r}")
    try:
        ptype = int(row["pavement_type"])
    except ValueError:
        raise ValueError(f"pavement_type: cannot parse {row['pavement_type']!r}")
    if ptype not in PAVEMENT_TYPES:
        raise ValueError(f"pavement_type: unknown code {ptype}")
    fclass = row["functional_class"].strip()
    if fclass not in FUNCTIONAL_CLASSES:
        raise ValueError(f"functional_class: unknown label {fclass!r}")
    return SectionRecord(
        section_id=row["section_id"].strip(),
        route_id=row["route_id"].strip(),
        begin_marker=row["begin_marker"].strip(),
        end_marker=row["end_marker"].strip(),
        condition=condition,
        traffic=traffic,
        time_since_treatment=tst,
        treatments=treatments,
        climate_zone=climate,
        pavement_type=ptype,
        functional_class=fclass,
    )


def load_csv(path) -> tuple[list[SectionRecord], LoadReport]:
    """Loads and validates records; invalid rows are dropped and reported."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected a CSV header")
        missing = [c for c in csv_columns() if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing mandatory columns {missing}")
        records: list[SectionRecord] = []
        report = LoadReport()
        for row in reader:
            report.n_rows += 1
            try:
                records.append(_parse_row(row))
                report.n_loaded += 1
            except ValueError as exc:
                report.issues.append((reader.line_num, str(exc)))
    return records, report


# ---------------------------------------------------------------------------
# Feature assembly


@dataclass(frozen=True)
class FeatureSpec:
    """Fixed, ordered feature layout for one target indicator.

    Columns, in order: indicator history (12 indicators x 4 years, numeric),
    traffic, time since treatment, treatment dummies (levels by default, or
    one per individual treatment), then one-hot climate, pavement type, and
    functional class. The numeric prefix is median-imputed and standardized
    with train-split statistics; dummy columns stay 0/1.
    """

    target_indicator: str
    target_year: int = TARGET_YEAR
    history_years: tuple[int, ...] = HISTORY_YEARS
    per_treatment_dummies: bool = False

    def __post_init__(self):
        if self.target_indicator not in INDICATOR_BY_NAME:
            raise VocabularyError(f"unknown indicator {self.target_indicator!r}")

    @property
    def numeric_columns(self) -> tuple[str, ...]:
        history = tuple(
            f"{name}_{year}"
            for name in INDICATOR_NAMES
            for year in self.history_years
        )
        return history + ("traffic", "time_since_treatment")

    @property
    def dummy_columns(self) -> tuple[str, ...]:
        if self.per_treatment_dummies:
            treat = tuple(f"treat_{t}" for t in sorted(TREATMENTS))
        else:
            treat = tuple(f"treat_{lvl}" for lvl in TREATMENT_LEVELS)
        climate = tuple(f"climate_{z}" for z in CLIMATE_ZONES)
        ptype = tuple(f"ptype_{p}" for p in PAVEMENT_TYPES)
        fclass = tuple(f"fclass_{f}" for f in FUNCTIONAL_CLASSES)
        return treat + climate + ptype + fclass

    @property
    def column_names(self) -> tuple[str, ...]:
        return self.numeric_columns + self.dummy_columns

    @property
    def n_features(self) -> int:
        return len(self.column_names)


@dataclass(frozen=True)
class NumericStats:
    """Imputation and standardization statistics over the numeric prefix."""

    medians: np.ndarray
    means: np.ndarray
    stds: np.ndarray


@dataclass
class Dataset:
    """Immutable bundle of graph, features, and target for one indicator."""

    graph: RoadGraph
    x: np.ndarray
    y: np.ndarray
    feature_spec: FeatureSpec
    x_raw: np.ndarray
    numeric_stats: NumericStats
    train_mask: np.ndarray | None = None

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes


def _raw_features(records: list[SectionRecord], spec: FeatureSpec) -> np.ndarray:
    n = len(records)
    n_num = len(spec.numeric_columns)
    x = np.zeros((n, spec.n_features), dtype=np.float64)
    for i, r in enumerate(records):
        col = 0
        for name in INDICATOR_NAMES:
            for year in spec.history_years:
                v = r.condition.get(name, {}).get(year)
                x[i, col] = np.nan if v is None else v
                col += 1
        x[i, col] = np.nan if r.traffic is None else r.traffic
        x[i, col + 1] = np.nan if r.time_since_treatment is None else r.time_since_treatment
        col += 2
        assert col == n_num
        if spec.per_treatment_dummies:
            for t in sorted(TREATMENTS):
                x[i, col] = 1.0 if t in r.treatments else 0.0
                col += 1
        else:
            levels = {TREATMENTS[t] for t in r.treatments}
            for lvl in TREATMENT_LEVELS:
                x[i, col] = 1.0 if lvl in levels else 0.0
                col += 1
        if r.climate_zone not in CLIMATE_ZONES:
            raise VocabularyError(f"unknown climate zone {r.climate_zone!r}")
        x[i, col + CLIMATE_ZONES.index(r.climate_zone)] = 1.0
        col += len(CLIMATE_ZONES)
        if r.pavement_type not in PAVEMENT_TYPES:
            raise VocabularyError(f"unknown pavement type {r.pavement_type!r}")
        x[i, col + PAVEMENT_TYPES.index(r.pavement_type)] = 1.0
        col += len(PAVEMENT_TYPES)
        if r.functional_class not in FUNCTIONAL_CLASSES:
            raise VocabularyError(f"unknown functional class {r.functional_class!r}")
        x[i, col + FUNCTIONAL_CLASSES.index(r.functional_class)] = 1.0
    return x


def numeric_stats_from_rows(x_raw: np.ndarray, rows: np.ndarray, n_numeric: int) -> NumericStats:
    """Median/mean/std of the numeric prefix computed from the given rows only."""
    block = x_raw[rows][:, :n_numeric]
    medians = np.zeros(n_numeric)
    for j in range(n_numeric):
        col = block[:, j]
        finite = col[np.isfinite(col)]
        medians[j] = float(np.median(finite)) if finite.size else 0.0
    imputed = np.where(np.isfinite(block), block, medians[None, :])
    return NumericStats(
        medians=medians,
        means=imputed.mean(axis=0),
        stds=imputed.std(axis=0),
    )


def _apply_stats(x_raw: np.ndarray, stats: NumericStats, n_numeric: int) -> np.ndarray:
    x = x_raw.copy()
    num = x[:, :n_numeric]
    num = np.where(np.isfinite(num), num, stats.medians[None, :])
    safe = np.where(stats.stds > 0.0, stats.stds, 1.0)
    num = (num - stats.means[None, :]) / safe[None, :]
    num[:, stats.stds == 0.0] = 0.0  # zero-variance columns pin to 0
    x[:, :n_numeric] = num
    return x


def assemble_features(records: list[SectionRecord], spec: FeatureSpec) -> Dataset:
    """Builds the graph, feature matrix, and target vector for one indicator.

    Without a split, standardization statistics come from all rows; split()
    recomputes them from the train rows only.
    """
    if not records:
        raise DataError("assemble_features: no records")
    graph = build_graph(records)
    x_raw = _raw_features(records, spec)
    y = np.empty(len(records), dtype=np.float64)
    for i, r in enumerate(records):
        v = r.condition.get(spec.target_indicator, {}).get(spec.target_year)
        if v is None:
            raise DataError(
                f"section {r.section_id!r} lacks a {spec.target_indicator} "
                f"value for {spec.target_year}"
            )
        y[i] = v
    n_num = len(spec.numeric_columns)
    stats = numeric_stats_from_rows(x_raw, np.arange(len(records)), n_num)
    return Dataset(
        graph=graph,
        x=_apply_stats(x_raw, stats, n_num),
        y=y,
        feature_spec=spec,
        x_raw=x_raw,
        numeric_stats=stats,
    )


def split(dataset: Dataset, test_fraction: float = 0.2, rng_seed: int = 0) -> Dataset:
    """Uniform node-level train/test split; train-only statistics are re-applied."""
    n = dataset.n_nodes
    if n < 5:
        raise ConfigError(f"split needs at least 5 nodes, got {n}")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n_test = int(round(n * test_fraction))
    if n_test < 1 or n_test >= n:
        raise ConfigError(
            f"degenerate split: {n_test} test nodes out of {n}"
        )
    rng = np.random.default_rng(rng_seed)
    test_rows = rng.permutation(n)[:n_test]
    mask = np.ones(n, dtype=bool)
    mask[test_rows] = False
    n_num = len(dataset.feature_spec.numeric_columns)
    stats = numeric_stats_from_rows(dataset.x_raw, np.flatnonzero(mask), n_num)
    return replace(
        dataset,
        x=_apply_stats(dataset.x_raw, stats, n_num),
        numeric_stats=stats,
        train_mask=mask,
    )


# ---------------------------------------------------------------------------
# Synthetic data with a planted, spatially correlated deterioration rate


SMOOTHING_ROUNDS = 3
LATENT_RATE_GAIN = 0.5  # latent factor's multiplier on the deterioration rate
RATE_PROCESS_NOISE = 0.8  # std of the per-year rate innovation, shared across indicators
SHARED_NOISE_WEIGHT = 0.85  # fraction of obs noise shared across indicators
MIN_RATE_FACTOR = 0.0  # yearly increments are clipped here: drift stays monotone


@dataclass(frozen=True)
class IndicatorDynamics:
    base: float
    base_spread: float
    drift: float
    noise: float


DYNAMICS: dict[str, IndicatorDynamics] = {
    "shallow_rutting": IndicatorDynamics(10.0, 3.0, 1.3, 2.2),
    "deep_rutting": IndicatorDynamics(2.5, 1.0, 0.45, 0.8),
    "patching": IndicatorDynamics(5.0, 2.0, 0.8, 1.5),
    "failures": IndicatorDynamics(2.0, 1.0, 0.5, 0.9),
    "block_cracking": IndicatorDynamics(4.0, 1.5, 0.7, 1.3),
    "alligator_cracking": IndicatorDynamics(6.0, 2.0, 1.1, 1.9),
    "longitudinal_cracking": IndicatorDynamics(130.0, 45.0, 26.0, 48.0),
    "transverse_cracking": IndicatorDynamics(5.0, 2.0, 0.9, 1.7),
    "iri": IndicatorDynamics(95.0, 22.0, 9.0, 15.0),
    "ride_score": IndicatorDynamics(4.0, 0.35, 0.14, 0.24),
    "distress_score": IndicatorDynamics(86.0, 7.0, 4.4, 7.5),
    "condition_score": IndicatorDynamics(84.0, 8.0, 4.8, 8.0),
}


@dataclass
class SyntheticTruth:
    """Generator internals kept aside for diagnostics, never used as features."""

    latent: np.ndarray
    rates: dict[str, np.ndarray]
    drifts: dict[str, float]
    spatial_strength: float
    rng_seed: int


def _neighbor_mean(graph: RoadGraph, values: np.ndarray) -> np.ndarray:
    """Mean over neighbors; isolated nodes keep their own value."""
    sums = np.zeros(graph.n_nodes)
    segs = np.repeat(np.arange(graph.n_nodes), graph.degrees)
    np.add.at(sums, segs, values[graph.neighbor_ids])
    deg = graph.degrees
    out = values.copy()
    np.divide(sums, deg, out=out, where=deg > 0)
    return out


def neighbor_correlation(graph: RoadGraph, values: np.ndarray) -> float:
    """Pearson correlation of values across all adjacent node pairs."""
    src = np.repeat(np.arange(graph.n_nodes), graph.degrees)
    dst = graph.neighbor_ids
    if src.size < 2:
        raise ConfigError("graph has no edges; neighbor correlation undefined")
    a, b = values[src], values[dst]
    denom = a.std() * b.std()
    if denom == 0.0:
        return 0.0
    return float(((a - a.mean()) * (b - b.mean())).mean() / denom)


def smoothed_latent(graph: RoadGraph, rho: float, rng: np.random.Generator) -> np.ndarray:
    """White noise mixed with the neighbor mean `SMOOTHING_ROUNDS` times, re-standardized."""
    g = rng.standard_normal(graph.n_nodes)
    for _ in range(SMOOTHING_ROUNDS):
        g = (1.0 - rho) * g + rho * _neighbor_mean(graph, g)
    sd = g.std()
    return (g - g.mean()) / (sd if sd > 0 else 1.0)


def _route_sizes(n_nodes: int, n_routes: int) -> list[int]:
    base, extra = divmod(n_nodes, n_routes)
    return [base + (1 if i < extra else 0) for i in range(n_routes)]


def generate_synthetic(
    n_nodes: int,
    n_routes: int,
    spatial_strength: float,
    rng_seed: int,
) -> tuple[list[SectionRecord], SyntheticTruth]:
    """Synthetic inventory on marker chains with a planted spatial signal.

    Sections form one marker chain per route (path graphs under build_graph).
    A latent per-node deterioration factor is white noise smoothed by graph-
    neighbor averaging with mixing weight `spatial_strength`; it multiplies
    each indicator's monotone drift. Observation noise has a component shared
    across indicators within a node-year (one measurement pass per section),
    so pooling a neighborhood is genuinely more informative than pooling a
    single section's own indicators. Values are clamped to indicator ranges.
    """
    if n_routes < 1 or n_nodes < n_routes:
        raise ConfigError(f"need n_nodes >= n_routes >= 1, got {n_nodes}/{n_routes}")
    if not 0.0 <= spatial_strength <= 1.0:
        raise ConfigError(f"spatial_strength must be in [0, 1], got {spatial_strength}")
    rng = np.random.default_rng(rng_seed)

    records: list[SectionRecord] = []
    for r_i, size in enumerate(_route_sizes(n_nodes, n_routes)):
        fclass = FUNCTIONAL_CLASSES[rng.choice(len(FUNCTIONAL_CLASSES), p=_FCLASS_PRIOR)]
        climate = CLIMATE_ZONES[rng.choice(len(CLIMATE_ZONES), p=_CLIMATE_PRIOR)]
        route_id = f"{fclass}{r_i + 1:04d}"
        route_traffic = float(np.exp(rng.normal(5.8, 0.9)))
        for pos in range(size):
            ptype = PAVEMENT_TYPES[rng.choice(len(PAVEMENT_TYPES), p=_PTYPE_PRIOR)]
            treated = rng.random() > 0.45
            if treated:
                k = 1 + int(rng.random() < 0.3)
                names = sorted(TREATMENTS)
                treatments = frozenset(
                    names[i] for i in rng.choice(len(names), size=k, replace=False)
                )
                tst = float(rng.integers(0, 11))
            else:
                treatments = frozenset()
                tst = None
            records.append(
                SectionRecord(
                    section_id=f"{route_id}-{pos:04d}",
                    route_id=route_id,
                    begin_marker=str(pos),
                    end_marker=str(pos + 1),
                    condition={},
                    traffic=round(route_traffic * float(np.exp(rng.normal(0.0, 0.15))), 3),
                    time_since_treatment=tst,
                    treatments=treatments,
                    climate_zone=climate,
                    pavement_type=ptype,
                    functional_class=fclass,
                )
            )

    graph = build_graph(records)
    latent = smoothed_latent(graph, spatial_strength, rng)

    # One deterioration process per section: each year the section worsens by
    # (1 + gain*latent + innovation), in units of the indicator's drift. The
    # innovation is one draw per section-year, shared by all indicators, so a
    # section's own short history pins the latent factor down only weakly;
    # neighbors (correlated latent, independent innovations) genuinely help.
    innovations = RATE_PROCESS_NOISE * rng.standard_normal((n_nodes, len(ALL_YEARS) - 1))
    increments = np.maximum(
        MIN_RATE_FACTOR, 1.0 + LATENT_RATE_GAIN * latent[:, None] + innovations
    )
    cumulative = np.concatenate(
        [np.zeros((n_nodes, 1)), np.cumsum(increments, axis=1)], axis=1
    )

    # One measurement pass per section-year: its error is shared by all
    # indicators observed in that pass.
    shared_noise = rng.standard_normal((n_nodes, len(ALL_YEARS)))

    rates: dict[str, np.ndarray] = {}
    for d in INDICATORS:
        dyn = DYNAMICS[d.name]
        base = dyn.base + dyn.base_spread * rng.standard_normal(n_nodes)
        rates[d.name] = dyn.drift * (1.0 + LATENT_RATE_GAIN * latent)
        own_noise = rng.standard_normal((n_nodes, len(ALL_YEARS)))
        noise = dyn.noise * (
            SHARED_NOISE_WEIGHT * shared_noise
            + math.sqrt(1.0 - SHARED_NOISE_WEIGHT**2) * own_noise
        )
        sign = 1.0 if d.worsens_upward else -1.0
        for t, year in enumerate(ALL_YEARS):
            values = base + sign * dyn.drift * cumulative[:, t] + noise[:, t]
            np.clip(values, d.lo, d.hi if d.hi is not None else np.inf, out=values)
            for i, rec in enumerate(records):
                rec.condition.setdefault(d.name, {})[year] = float(values[i])

    truth = SyntheticTruth(
        latent=latent,
        rates=rates,
        drifts={d.name: DYNAMICS[d.name].drift for d in INDICATORS},
        spatial_strength=spatial_strength,
        rng_seed=rng_seed,
    )
    return records, truth


_CLIMATE_PRIOR = np.array([0.20, 0.25, 0.15, 0.15, 0.25])
_PTYPE_PRIOR = np.array([0.15, 0.30, 0.25, 0.15, 0.15])
# FM/SH/US/IH dominate; the long tail shares the remainder.
_FCLASS_PRIOR = np.full(len(FUNCTIONAL_CLASSES), 0.3 / (len(FUNCTIONAL_CLASSES) - 4))
_FCLASS_PRIOR[FUNCTIONAL_CLASSES.index("FM")] = 0.25
_FCLASS_PRIOR[FUNCTIONAL_CLASSES.index("SH")] = 0.20
_FCLASS_PRIOR[FUNCTIONAL_CLASSES.index("US")] = 0.15
_FCLASS_PRIOR[FUNCTIONAL_CLASSES.index("IH")] = 0.10


def write_truth_csv(path, records: list[SectionRecord], truth: SyntheticTruth) -> None:
    """Ground-truth sidecar: per-section latent factor and deterioration rates."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["section_id", "latent"] + [f"rate_{name}" for name in INDICATOR_NAMES]
        )
        for i, r in enumerate(records):
            writer.writerow(
                [r.section_id, repr(float(truth.latent[i]))]
                + [repr(float(truth.rates[name][i])) for name in INDICATOR_NAMES]
            )
