"""Run configuration: presets, JSON loading and validation.

Two presets ship with the engine. `paper` is the full-scale search
setup (5x20 grid, levels-back 3, 10..60 active nodes, lambda 4, rates
0.1/0.2 doubling late, 1000 generations); `desk` is a minutes-scale
analog (3x8 grid, 3..15 active, 30 generations) used by the test suite.
All randomness in a run flows from the single top-level seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .data import DataConfig, desk_data, paper_scale_data
from .errors import ConfigError
from .evolution import EvolutionConfig
from .functions import ABLATION_PRESETS, CatalogConfig
from .genome import GridConfig

DEFAULT_DESK_SEED = 7


def paper_grid() -> GridConfig:
    return GridConfig(rows=5, cols=20, levels_back=3, active_min=10, active_max=60)


def desk_grid() -> GridConfig:
    return GridConfig(rows=3, cols=8, levels_back=3, active_min=3, active_max=15)


@dataclass
class RunConfig:
    preset: str
    seed: int
    grid: GridConfig
    evolution: EvolutionConfig
    catalog: CatalogConfig
    catalog_preset: str
    data: DataConfig
    output_dir: str
    checkpoint_every: int = 10
    cache: bool = True
    external: Optional[str] = None

    def __post_init__(self):
        if self.checkpoint_every < 1:
            raise ConfigError("checkpoint_every must be >= 1")

    def to_json(self) -> dict:
        return {
            "preset": self.preset,
            "seed": self.seed,
            "grid": self.grid.to_json(),
            "evolution": self.evolution.to_json(),
            "catalog": {"preset": self.catalog_preset, "functions": self.catalog.names()},
            "data": self.data.to_json(),
            "output_dir": self.output_dir,
            "checkpoint_every": self.checkpoint_every,
            "cache": self.cache,
            "external": self.external,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        return cls(
            preset=data["preset"],
            seed=data["seed"],
            grid=GridConfig.from_json(data["grid"]),
            evolution=EvolutionConfig.from_json(data["evolution"]),
            catalog=CatalogConfig.from_names(data["catalog"]["functions"]),
            catalog_preset=data["catalog"]["preset"],
            data=DataConfig.from_json(data["data"]),
            output_dir=data["output_dir"],
            checkpoint_every=data["checkpoint_every"],
            cache=data["cache"],
            external=data.get("external"),
        )


def make_preset(name: str, seed: Optional[int] = None, output_dir: str = "runs/out") -> RunConfig:
    if name == "paper":
        seed = 0 if seed is None else seed
        return RunConfig(
            preset="paper",
            seed=seed,
            grid=paper_grid(),
            evolution=EvolutionConfig(seed=seed),
            catalog=CatalogConfig(),
            catalog_preset="full",
            data=paper_scale_data(seed=seed),
            output_dir=output_dir,
        )
    if name == "desk":
        seed = DEFAULT_DESK_SEED if seed is None else seed
        return RunConfig(
            preset="desk",
            seed=seed,
            grid=desk_grid(),
            evolution=EvolutionConfig(max_generation=30, seed=seed),
            catalog=CatalogConfig(),
            catalog_preset="full",
            data=desk_data(seed=seed),
            output_dir=output_dir,
        )
    raise ConfigError(f"unknown preset {name!r}; choose 'paper' or 'desk'")


def _merge_section(name: str, base: dict, override: dict) -> dict:
    unknown = set(override) - set(base)
    if unknown:
        raise ConfigError(f"{name}: unknown field(s) {sorted(unknown)}")
    return {**base, **override}


def load_run_config(
    path: Optional[str] = None,
    preset: Optional[str] = None,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
    external: Optional[str] = None,
    catalog_preset: Optional[str] = None,
) -> RunConfig:
    """Assemble a run config from preset defaults, a JSON file and overrides.

    Precedence (lowest to highest): preset defaults, config file
    sections, explicit arguments. Unknown fields raise ConfigError with
    the offending field names.
    """
    raw: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")

    allowed = {
        "preset", "seed", "grid", "evolution", "catalog", "data",
        "output_dir", "checkpoint_every", "cache", "external",
    }
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")

    preset_name = preset or raw.get("preset", "desk")
    base = make_preset(preset_name, seed=None, output_dir=output_dir or raw.get("output_dir", "runs/out"))

    seed_forced = seed is not None
    run_seed = seed if seed_forced else raw.get("seed", base.seed)

    grid_json = _merge_section("grid", base.grid.to_json(), raw.get("grid", {}))
    try:
        grid = GridConfig.from_json(grid_json)
    except TypeError as exc:
        raise ConfigError(f"grid: {exc}") from exc

    evo_json = _merge_section("evolution", base.evolution.to_json(), raw.get("evolution", {}))
    if seed_forced or "seed" not in raw.get("evolution", {}):
        evo_json["seed"] = run_seed
    evolution = EvolutionConfig.from_json(evo_json)

    data_json = _merge_section("data", base.data.to_json(), raw.get("data", {}))
    if seed_forced or "seed" not in raw.get("data", {}):
        data_json["seed"] = run_seed
    data = DataConfig.from_json(data_json)

    cat_raw = raw.get("catalog", {})
    cat_name = catalog_preset or cat_raw.get("preset")
    if cat_name is not None:
        if cat_name not in ABLATION_PRESETS:
            raise ConfigError(
                f"catalog: unknown preset {cat_name!r}; choose from {sorted(ABLATION_PRESETS)}"
            )
        catalog = CatalogConfig.preset(cat_name)
    elif "functions" in cat_raw:
        catalog = CatalogConfig.from_names(cat_raw["functions"])
        cat_name = "custom"
    else:
        catalog, cat_name = base.catalog, base.catalog_preset

    return RunConfig(
        preset=preset_name,
        seed=run_seed,
        grid=grid,
        evolution=evolution,
        catalog=catalog,
        catalog_preset=cat_name,
        data=data,
        output_dir=output_dir or raw.get("output_dir", base.output_dir),
        checkpoint_every=raw.get("checkpoint_every", base.checkpoint_every),
        cache=raw.get("cache", base.cache),
        external=external if external is not None else raw.get("external"),
    )
