import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from functools import lru_cache
from pathlib import Path

import pandas as pd

from graph_core import EdgeListReport, Graph, ParameterError, PosencError, largest_connected_component, random_regular, read_edge_list
from harness import CSV_COLUMNS, METRIC_COLUMNS, SweepConfig

logger = logging.getLogger(__name__)

DATA_PATH = Path(__file__).parent / "data"
SETTINGS_FILE = DATA_PATH / "settings.json"
SWEEPS_PATH = DATA_PATH / "sweeps"

# settings key -> SweepConfig field; singular spellings are accepted too
SETTING_KEYS = {
    "n_list": "n_list", "n": "n_list",
    "k_list": "k_list", "k": "k_list",
    "m_list": "m_list", "m": "m_list",
    "eta_list": "eta_list", "eta": "eta_list",
    "trials": "trials",
    "anchor_resamples": "anchor_resamples", "resamples": "anchor_resamples",
    "r": "r",
    "quantizer": "quantizer",
    "scaled": "scaled",
    "features": "features", "feature": "features",
    "anchor_strategies": "anchor_strategies", "anchor_strategy": "anchor_strategies",
    "seed": "seed",
    "error_threshold": "error_threshold", "threshold": "error_threshold",
    "timing": "timing",
    "jobs": "jobs",
    "m_eta_pairs": "m_eta_pairs", "pairs": "m_eta_pairs",
}
LIST_FIELDS = {"n_list", "k_list", "m_list", "eta_list", "features", "anchor_strategies"}
INT_FIELDS = {"trials", "anchor_resamples", "r", "seed", "jobs"}
BOOL_FIELDS = {"scaled", "timing"}


class DataFileError(PosencError):
    pass


# ----------------------------------------------------------------------------
# Edge lists
# ----------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _read_edge_file(path: str, mtime_key: float) -> tuple[Graph, EdgeListReport]:
    # mtime_key invalidates the cache when the file changes on disk
    with open(path, "r", encoding="utf-8") as f:
        return read_edge_list(f)


def load_edge_list(path: str | Path, lcc: bool = True) -> tuple[Graph, EdgeListReport]:
    path = Path(path)
    g, report = _read_edge_file(str(path), path.stat().st_mtime)
    if report.duplicates_dropped or report.self_loops_dropped:
        logger.warning(
            "%s: dropped %d duplicate edges and %d self-loops",
            path.name,
            report.duplicates_dropped,
            report.self_loops_dropped,
        )
    logger.info("%s: %d vertices, %d edges", path.name, g.n, g.edge_count)
    return (largest_connected_component(g) if lcc else g), report


def parse_regular(text: str) -> tuple[int, int]:
    try:
        n_text, r_text = text.split(",")
        return int(n_text), int(r_text)
    except ValueError as exc:
        raise ParameterError(f"--regular expects N,R, got {text!r}") from exc


def resolve_graph(graph_path: str | None, regular: str | None, seed: int, lcc: bool = True) -> Graph:
    """Exactly one graph source: an edge-list file or a sampled r-regular graph."""
    if (graph_path is None) == (regular is None):
        raise ParameterError("give exactly one of --graph PATH or --regular N,R")
    if graph_path is not None:
        g, _ = load_edge_list(graph_path, lcc=lcc)
        return g
    n, r = parse_regular(regular)
    return random_regular(n, r, seed)


# ----------------------------------------------------------------------------
# Sweep settings
# ----------------------------------------------------------------------------


def _parse_key_values(text: str) -> dict:
    settings = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"settings line {line_no}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        settings[key] = [v.strip() for v in value.strip("[]").split(",") if v.strip()]
    return settings


def _read_settings_file(path: Path) -> dict:
    text = path.read_text(encoding="utf-8").strip()
    if not text:
        raise ParameterError(f"settings file {path} is empty")
    try:
        if path.suffix == ".json":
            return json.loads(text)
        if path.suffix == ".toml":
            return tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ParameterError(f"settings file {path} is invalid: {exc}") from exc
    return _parse_key_values(text)


def _coerce(name: str, value):
    try:
        if name == "m_eta_pairs":
            # [[m, eta], ...] in JSON/TOML, "m:eta" items in key = value files
            items = [item.split(":") if isinstance(item, str) else item for item in (value if isinstance(value, list) else [value])]
            return [(int(m), str(eta).strip()) for m, eta in items]
        if name in LIST_FIELDS:
            items = value if isinstance(value, list) else [value]
            if name in ("n_list", "k_list", "m_list"):
                return [int(v) for v in items]
            return [str(v) for v in items]
        if isinstance(value, list):
            if len(value) != 1:
                raise ValueError("expected a single value")
            value = value[0]
        if name in INT_FIELDS:
            return int(value)
        if name in BOOL_FIELDS:
            return value if isinstance(value, bool) else str(value).strip().lower() in ("1", "true", "yes")
        if name == "error_threshold":
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"setting {name!r} has invalid value {value!r}") from exc


def load_default_settings() -> dict:
    if SETTINGS_FILE.exists():
        return json.loads(SETTINGS_FILE.read_text(encoding="utf-8"))
    return {
        "n_list": [500],
        "k_list": [1, 2, 3, 4, 6, 8],
        "m_list": [0, 1, 2, 5],
        "eta_list": ["0.9", "0.7", "0.5", "0.3", "0.1"],
        "trials": 5,
        "anchor_resamples": 1,
        "r": 3,
        "quantizer": "absolute",
        "scaled": True,
        "features": ["full"],
        "anchor_strategies": ["random"],
        "seed": 0,
        "error_threshold": 0.1,
    }


def preset_path(name: str) -> Path:
    path = SWEEPS_PATH / f"{name}.json"
    if not path.exists():
        known = sorted(p.stem for p in SWEEPS_PATH.glob("*.json"))
        raise ParameterError(f"unknown sweep preset {name!r}; known presets: {known}")
    return path


def load_sweep_settings(path: str | Path | None = None, overrides: dict | None = None) -> SweepConfig:
    """Defaults from data/settings.json, then the file at `path`, then explicit overrides."""
    merged = {}
    sources = [load_default_settings()]
    if path is not None:
        sources.append(_read_settings_file(Path(path)))
    sources.append(overrides or {})
    for source in sources:
        for key, value in source.items():
            if value is None or key.startswith("_"):
                continue
            if key not in SETTING_KEYS:
                raise ParameterError(f"unknown setting {key!r}")
            name = SETTING_KEYS[key]
            merged[name] = _coerce(name, value)
    return SweepConfig(**merged)


# ----------------------------------------------------------------------------
# Sweep CSVs
# ----------------------------------------------------------------------------


def load_sweep_csv(path: str | Path) -> pd.DataFrame:
    """Reads a trial CSV back; 'n/a' cells become NaN and eta stays a string."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError as exc:
        raise DataFileError(f"{path}: empty CSV") from exc
    except pd.errors.ParserError as exc:
        raise DataFileError(f"{path}: malformed CSV ({exc})") from exc
    if list(frame.columns) != CSV_COLUMNS:
        raise DataFileError(f"{path}: unexpected columns {list(frame.columns)}")
    if frame.empty:
        raise DataFileError(f"{path}: no data rows")

    for col in ["n", "r", "k", "m", "trial", "resample", "seed", "wall_time_ms"] + METRIC_COLUMNS:
        frame[col] = pd.to_numeric(frame[col], errors="coerce")
    if frame[["n", "k", "m"]].isna().any().any():
        raise DataFileError(f"{path}: non-numeric n/k/m values")
    return frame
