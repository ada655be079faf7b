"""Experiment catalog and runner."""

import time
from typing import Any, Optional, Union

from pydantic import ValidationError

from core.config import get_settings
from core.errors import ConfigInvalidError, FieldUnsupportedError, LabError, UnknownExperimentError
from core.gf import field_from_order
from core.logger import logger
from experiments.catalog import Catalog, RunContext
from experiments.counting import catalog as counting_catalog
from experiments.decomposition import catalog as decomposition_catalog
from experiments.sharpness import catalog as sharpness_catalog
from experiments.spectral import catalog as spectral_catalog
from models import ExperimentConfig, ExperimentReport

catalog = Catalog()

catalog.include(spectral_catalog)
catalog.include(counting_catalog)
catalog.include(decomposition_catalog)
catalog.include(sharpness_catalog)


def merge_config(*layers: Optional[dict[str, Any]]) -> ExperimentConfig:
    """
    Merge config layers, later layers winning; None values are skipped.

    The "sets" and "parameters" maps merge key by key.

    Raises
    ------
    ConfigInvalidError
        The merged document does not validate
    """
    merged: dict[str, Any] = {}
    for layer in layers:
        for key, value in (layer or {}).items():
            if value is None:
                continue
            if key in ("sets", "parameters") and isinstance(value, dict):
                merged[key] = {**merged.get(key, {}), **value}
            else:
                merged[key] = value
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigInvalidError(f"Invalid experiment config: {e}") from e


def run_experiment(name: str, config: Union[ExperimentConfig, dict, None] = None) -> ExperimentReport:
    """
    Run one catalog experiment.

    Parameters
    ----------
    name : str
        Catalog name
    config : ExperimentConfig or dict, optional
        Flags and config-file values already merged

    Returns
    -------
    ExperimentReport
        The report with runtime_ms filled in

    Raises
    ------
    UnknownExperimentError
        name is not in the catalog
    ConfigInvalidError
        config does not validate
    FieldUnsupportedError
        q is malformed or outside the experiment's range
    """
    if name not in catalog:
        raise UnknownExperimentError(f"Unknown experiment {name!r}")
    entry = catalog[name]
    name = entry.name
    if not isinstance(config, ExperimentConfig):
        config = merge_config(config)

    order = config.q or entry.default_q
    try:
        field = field_from_order(order)
    except LabError as e:
        raise FieldUnsupportedError(f"Field {order!r} is not supported: {e}") from e
    if entry.max_q is not None and field.q > entry.max_q:
        raise FieldUnsupportedError(f"{name} needs q <= {entry.max_q}, got q = {field.q}")

    settings = get_settings()
    defaults = settings.experiment_defaults.get(name, {})
    seed = settings.lab_seed if config.seed is None else config.seed
    context = RunContext(entry, config, field, defaults, seed)

    logger.info(f"Running {name} over F_{field.q} ({config.variant.value}), seed {seed}")
    start = time.perf_counter()
    report = entry.run(context)
    report.runtime_ms = (time.perf_counter() - start) * 1000
    status = "passed" if report.passed else "FAILED"
    logger.info(f"{name} {status} in {report.runtime_ms:.0f} ms")
    return report
