"""Experiment registry and the per-run context handed to each experiment."""

from typing import Any, Callable, NamedTuple, Optional

import numpy as np

from core import mat2
from core.constructions import random_subset
from core.digraph import DigraphOracle, second_eigenvalue
from core.logger import logger
from core.setalg import MatSet
from core.utils import load_set_source
from models import BoundEntry, ExperimentConfig, ExperimentReport, FieldSpec, SpectralResult

SEED_STRIDE = 1_000_003


class Experiment(NamedTuple):
    """
    A catalog entry.

    Attributes
    ----------
    name : str
        Command name
    cites : str
        The statement the experiment checks
    run : Callable
        Pipeline taking a RunContext and returning a report
    default_q : str
        Field used when no --q is given
    max_q : Optional[int]
        Largest supported field order
    aliases : tuple[str, ...]
        Other names resolving to this entry
    """

    name: str
    cites: str
    run: Callable[["RunContext"], ExperimentReport]
    default_q: str = "2"
    max_q: Optional[int] = None
    aliases: tuple[str, ...] = ()

    @property
    def summary(self) -> str:
        doc = (self.run.__doc__ or "").strip()
        return doc.splitlines()[0] if doc else ""


class Catalog:
    """Collects experiments the way a router collects endpoints."""

    def __init__(self):
        self.experiments: dict[str, Experiment] = {}
        self.aliases: dict[str, str] = {}

    def experiment(
        self,
        name: str,
        cites: str,
        default_q: str = "2",
        max_q: Optional[int] = None,
        aliases: tuple[str, ...] = (),
    ):
        def decorator(func):
            self.experiments[name] = Experiment(name, cites, func, default_q, max_q, aliases)
            for alias in aliases:
                self.aliases[alias] = name
            return func

        return decorator

    def include(self, other: "Catalog") -> None:
        for name, entry in other.experiments.items():
            if name in self or any(alias in self for alias in entry.aliases):
                raise ValueError(f"Experiment {name} registered twice")
            self.experiments[name] = entry
            for alias in entry.aliases:
                self.aliases[alias] = name

    def resolve(self, name: str) -> str:
        """Canonical name of an entry or one of its aliases."""
        return self.aliases.get(name, name)

    def __contains__(self, name: str) -> bool:
        return self.resolve(name) in self.experiments

    def __getitem__(self, name: str) -> Experiment:
        return self.experiments[self.resolve(name)]

    def names(self) -> list[str]:
        return list(self.experiments)


class RunContext:
    """
    Effective parameters of one run.

    Lookups follow the precedence explicit config > configured defaults
    for the experiment > the fallback given at the call site.
    """

    def __init__(
        self,
        entry: Experiment,
        config: ExperimentConfig,
        field: FieldSpec,
        defaults: dict[str, Any],
        seed: int,
    ):
        self.entry = entry
        self.config = config
        self.field = field
        self.defaults = defaults
        self.seed = seed
        self.used: dict[str, Any] = {}
        self.seeds: list[int] = []
        self._spectra: dict[Any, SpectralResult] = {}

    @property
    def q(self) -> int:
        return self.field.q

    def _lookup(self, name: str, explicit, fallback):
        value = explicit if explicit is not None else self.defaults.get(name, fallback)
        self.used[name] = value
        return value

    def trials(self, fallback: int) -> int:
        return int(self._lookup("trials", self.config.trials, fallback))

    def size(self, fallback: int) -> int:
        return int(self._lookup("size", self.config.size, fallback))

    def param(self, name: str, fallback: Any = None) -> Any:
        return self._lookup(name, self.config.parameters.get(name), fallback)

    def trial_seed(self, trial: int) -> int:
        seed = self.seed * SEED_STRIDE + trial
        self.seeds.append(seed)
        return seed

    def rng(self, seed: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(seed))

    def has_set(self, role: str) -> bool:
        return role in self.config.sets

    def load_set(self, role: str, fallback: Optional[str] = None) -> MatSet:
        source = self.config.sets.get(role, fallback)
        if source is None:
            raise KeyError(role)
        self.used[f"set_{role}"] = source
        return load_set_source(source, self.field)

    def random_set(self, size: int, seed: int, invertible: bool = False) -> MatSet:
        """Seeded random set, clipped to the size of the universe."""
        universe = mat2.gl2_indices(self.field).size if invertible else self.q**4
        if size > universe:
            logger.warning(f"Set size {size} exceeds {universe} at q={self.q}; using {universe}")
            size = universe
        return random_subset(self.field, size, seed=seed, invertible=invertible)

    def oracle(self, variant=None) -> DigraphOracle:
        return DigraphOracle(self.field, variant or self.config.variant)

    def spectrum(self, oracle: Optional[DigraphOracle] = None) -> SpectralResult:
        oracle = oracle or self.oracle()
        if oracle not in self._spectra:
            self._spectra[oracle] = second_eigenvalue(oracle)
        return self._spectra[oracle]

    def bound(self, value: float, constant: float = 1.0) -> BoundEntry:
        return BoundEntry(value=float(value), constant=constant, cites=self.entry.cites)

    def report(
        self,
        measured: dict[str, Any],
        bounds: Optional[dict[str, BoundEntry]] = None,
        ratios: Optional[dict[str, float]] = None,
        pass_flags: Optional[dict[str, bool]] = None,
        rows: Optional[list[dict[str, Any]]] = None,
    ) -> ExperimentReport:
        return ExperimentReport(
            experiment=self.entry.name,
            q=self.q,
            seeds=self.seeds or [self.seed],
            parameters={
                "variant": self.config.variant.value,
                "field": self.field.label(),
                **self.used,
            },
            measured=measured,
            bounds=bounds or {},
            ratios=ratios or {},
            pass_flags={k: bool(v) for k, v in (pass_flags or {}).items()},
            rows=rows or [],
        )


def ratio(measured: float, bound: float) -> float:
    """measured / bound, inf for a vanishing bound."""
    if bound == 0:
        return 0.0 if measured == 0 else float("inf")
    return float(measured) / float(bound)
