"""Core data models for the matrix-ring sum-product lab."""

from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class FieldSpec(BaseModel):
    """
    The finite field F_q, q = p^k.

    Attributes
    ----------
    p : int
        Prime characteristic
    k : int
        Extension degree
    q : int
        Field order p^k
    modulus : tuple[int, ...]
        Coefficients of the monic irreducible modulus, highest degree first.
        Empty for prime fields.
    """

    model_config = ConfigDict(frozen=True)

    p: int
    k: int = 1
    q: int
    modulus: tuple[int, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def fill_order(cls, data: Any) -> Any:
        if isinstance(data, dict) and "q" not in data and "p" in data:
            data = {**data, "q": data["p"] ** data.get("k", 1)}
        return data

    def label(self) -> str:
        """Short "p^k" label used in file headers and reports."""
        return f"{self.p}^{self.k}"


class Op(str, Enum):
    """Group operation of a representation function."""

    ADD = "add"
    MUL = "mul"


class Variant(str, Enum):
    """Which side the tail vertex's first coordinate multiplies on."""

    LEFT = "left"  # ab + ef = c + d
    RIGHT = "right"  # ba + ef = c + d


class Direction(str, Enum):
    """Neighbourhood direction."""

    OUT = "out"
    IN = "in"


class CompatibilityTag(str, Enum):
    """Row-factor compatibility of a rank-one block with a right-hand side."""

    SAME_FACTOR = "SameFactor"
    INCOMPATIBLE = "Incompatible"


class CaseTag(str, Enum):
    """Case of the common-neighbour analysis for a vertex pair."""

    DIAGONAL = "Diagonal"
    RANK0_MISMATCH = "Rank0Mismatch"
    CASE21 = "Case21"
    CASE22A = "Case22a"
    CASE22B = "Case22b"
    CASE23 = "Case23"
    CASE3 = "Case3"
    MIXED = "Mixed"  # right-product pairs with a three-dimensional image


class Branch(str, Enum):
    """Which representation function certifies the extracted subset."""

    DX_INV = "DXinv"
    XINV_D = "XinvD"


class PairClass(BaseModel):
    """
    Classification of a vertex pair.

    Attributes
    ----------
    tag : CaseTag
        Case of the analysis
    predicted_common_out : int
        Predicted number of common out-neighbours
    rank_t : int
        Rank of the block (a - a', e - e')
    rank_c : int
        Rank of c - c'
    """

    tag: CaseTag
    predicted_common_out: int
    rank_t: int
    rank_c: int


class EigenvalueCount(BaseModel):
    """One distinct Gram eigenvalue and its multiplicity."""

    value: int
    multiplicity: int


class SpectralResult(BaseModel):
    """
    Exact second eigenvalue of the sum-product digraph.

    Attributes
    ----------
    q : int
        Field order
    variant : Variant
        Product variant
    mu : float
        Second largest eigenvalue modulus of the adjacency operator
    mu_squared : int
        Largest Gram eigenvalue off the principal character
    constant_c : float
        mu / q^6.5
    trivial_eigenvalue : int
        Gram eigenvalue at the principal character, d^2
    gram_spectrum_summary : list[EigenvalueCount]
        Distinct Gram eigenvalues, largest first
    method : str
        How the spectrum was obtained
    """

    q: int
    variant: Variant
    mu: float
    mu_squared: int
    constant_c: float
    trivial_eigenvalue: int
    gram_spectrum_summary: list[EigenvalueCount] = Field(default_factory=list)
    method: str = "character-transform"

    def top_eigenvalues(self, count: int = 3) -> list[int]:
        return [entry.value for entry in self.gram_spectrum_summary[:count]]


class MixingResult(BaseModel):
    """Edge count between two vertex sets against the mixing bound."""

    e_bc: int
    expected: float
    deviation: float
    bound: float
    holds: bool


class CountCheck(BaseModel):
    """Exact solution count against its main term and spectral error term."""

    count: int
    main_term: float
    deviation: float
    bound: float
    holds: bool


class IterationRecord(BaseModel):
    """
    One extraction step of the decomposition.

    Attributes
    ----------
    i : int
        Step number, starting at 1
    s_size : int
        |S_i|
    e_times_s : int
        E_x(S_i)
    tau : float
        Dyadic level of r_{XX} on D
    kappa : float
        Lower bound of the certifying representation function
    branch : Branch
        Which representation function certifies X_*
    d_size : int
        |D|
    x_star_size : int
        |X_*| = |V_i|
    e_plus_x_star : int
        E_+(V_i)
    """

    i: int
    s_size: int
    e_times_s: int
    tau: float
    kappa: float
    branch: Branch
    d_size: int
    x_star_size: int
    e_plus_x_star: int


class TraceSummary(BaseModel):
    """Final record of a decomposition."""

    b_size: int
    c_size: int
    e_plus_b: int
    e_times_b: int
    e_plus_c: int
    e_times_c: int
    m_used: float
    iterations: int
    ratios: dict[str, float] = Field(default_factory=dict)


class ConstructionKind(str, Enum):
    """Named set constructions."""

    LOWER_TRIANGULAR = "LowerTriangular"
    X23_RESTRICTED = "X23Restricted"
    SUBSPACE_AB = "SubspaceAB"
    SUBFIELD_C = "SubfieldC"
    DET_SUBGROUP = "DetSubgroup"
    SINGULAR = "Singular"
    RANDOM_GL2 = "RandomGL2"
    RANDOM_M2 = "RandomM2"
    FULL_M2 = "FullM2"
    FULL_GL2 = "FullGL2"


class ConstructionSpec(BaseModel):
    """
    A construction request.

    Attributes
    ----------
    kind : ConstructionKind
        Which construction
    parameters : dict
        Kind-specific parameters (X, subgroup, size, seed)
    """

    kind: ConstructionKind
    parameters: dict[str, Any] = Field(default_factory=dict)


class BoundEntry(BaseModel):
    """A bound expression evaluated at the measured sizes."""

    value: float
    constant: float = 1.0
    cites: str


class ExperimentConfig(BaseModel):
    """
    Parameters of one experiment run after precedence merging.

    Attributes
    ----------
    q : Optional[str]
        Field order, "p^k" or "q"; the experiment default when unset
    sets : dict[str, str]
        Set sources by role ("a" .. "f"): a file path,
        "construction:<kind>[:params]" or "random:<size>:<seed>"
    trials : Optional[int]
        Number of random trials
    size : Optional[int]
        Size of randomly generated sets
    variant : Variant
        Product variant of the digraph
    seed : Optional[int]
        Master seed; LAB_SEED when unset
    parameters : dict
        Experiment-specific extras
    """

    model_config = ConfigDict(extra="forbid")

    q: Optional[str] = None
    sets: dict[str, str] = Field(default_factory=dict)
    trials: Optional[int] = None
    size: Optional[int] = None
    variant: Variant = Variant.LEFT
    seed: Optional[int] = None
    parameters: dict[str, Any] = Field(default_factory=dict)


class ExperimentReport(BaseModel):
    """
    Structured result of one experiment.

    Attributes
    ----------
    experiment : str
        Catalog name
    q : int
        Field order
    seeds : list[int]
        Seeds used
    parameters : dict
        Effective parameters
    measured : dict
        Exact measured quantities
    bounds : dict[str, BoundEntry]
        Bound values with their constants and citations
    ratios : dict[str, float]
        measured / bound
    pass_flags : dict[str, bool]
        Exact (non-asymptotic) assertions only
    rows : list[dict]
        Per-trial table
    runtime_ms : float
        Wall time of the run
    """

    experiment: str
    q: int
    seeds: list[int] = Field(default_factory=list)
    parameters: dict[str, Any] = Field(default_factory=dict)
    measured: dict[str, Any] = Field(default_factory=dict)
    bounds: dict[str, BoundEntry] = Field(default_factory=dict)
    ratios: dict[str, float] = Field(default_factory=dict)
    pass_flags: dict[str, bool] = Field(default_factory=dict)
    rows: list[dict[str, Any]] = Field(default_factory=list)
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.pass_flags.values())
