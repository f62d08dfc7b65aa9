"""
State management for the wave-packet scattering simulator
Declarative models shared by the solvers and the LangGraph pipeline
"""
from typing import List, Dict, Any, Optional, Annotated, Literal, Tuple, Callable
import numpy as np
from typing_extensions import TypedDict
from langgraph.graph.message import add_messages
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Grid1D(BaseModel):
    """Uniform grid on [x_min, x_max] with n_points nodes"""
    model_config = ConfigDict(frozen=True)

    x_min: float
    x_max: float
    n_points: int

    @model_validator(mode="after")
    def _check_extent(self) -> "Grid1D":
        if self.n_points < 3:
            raise ValueError(f"n_points must be at least 3, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        return self

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def nodes(self) -> np.ndarray:
        # linspace pins both endpoints exactly
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def contains(self, x: float) -> bool:
        return self.x_min <= x <= self.x_max

    def index_of(self, x: float) -> int:
        """Index of the node nearest to x (clipped to the grid)"""
        j = int(round((x - self.x_min) / self.dx))
        return min(max(j, 0), self.n_points - 1)


class ComplexField1D(BaseModel):
    """Complex wave-function samples on a Grid1D"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grid: Grid1D
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex(cls, v: Any) -> np.ndarray:
        return np.array(v, dtype=np.complex128)

    @model_validator(mode="after")
    def _check_length(self) -> "ComplexField1D":
        if self.values.shape != (self.grid.n_points,):
            raise ValueError(
                f"values has shape {self.values.shape}, grid has {self.grid.n_points} nodes"
            )
        return self

    def with_values(self, values: np.ndarray) -> "ComplexField1D":
        return ComplexField1D(grid=self.grid, values=values)


class EvolutionParams(BaseModel):
    """Mass, time step and horizon of a time evolution (natural units)"""
    mass: float = Field(20.0, gt=0)
    dt: float = Field(..., gt=0)
    t_final: float = Field(200.0, ge=0)
    boundary: Literal["hard_wall"] = "hard_wall"


class PacketSpec(BaseModel):
    """Initial wave packet: shape, wavenumber q = m v, center and width"""
    shape: Literal["gaussian", "square", "lorentzian", "exponential"] = "gaussian"
    q: float = 1.0
    x0: float = -10.0
    y0: float = 0.0
    width: float = Field(0.5, gt=0)  # Δ for gaussian, half-width d for square


class PotentialSpec(BaseModel):
    """Attractive well; depth is stored positive and applied with a minus sign"""
    shape: Literal["gaussian", "square", "lorentzian"] = "gaussian"
    depth: float = Field(1.0, ge=0)
    width: float = Field(1.0, gt=0)  # w for gaussian/lorentzian, half-width a for square


class EnergyReading(BaseModel):
    """<psi|H|psi>; normalized is False when the state norm is off by more than 1e-6"""
    value: float
    normalized: bool


class Observer(BaseModel):
    """Sampling hook called by the time loops

    Scalar observers feed ObservableSeries channels, the others feed records
    (snapshots, per-l norm tables, profiles).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    measure: Callable[[Any], Any]
    every: Optional[float] = None
    times: List[float] = Field(default_factory=list)
    t_min: float = 0.0
    scalar: bool = True


class ObservableSeries(BaseModel):
    """Time-stamped diagnostics collected during an evolution"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    channels: Dict[str, List[Tuple[float, float]]] = Field(default_factory=dict)
    records: Dict[str, List[Tuple[float, Any]]] = Field(default_factory=dict)

    def record(self, name: str, t: float, value: Any, scalar: bool = True) -> None:
        if scalar:
            self.channels.setdefault(name, []).append((float(t), float(value)))
        else:
            self.records.setdefault(name, []).append((float(t), value))

    def times(self, name: str) -> np.ndarray:
        return np.array([t for t, _ in self.channels.get(name, [])])

    def values(self, name: str) -> np.ndarray:
        return np.array([v for _, v in self.channels.get(name, [])])


class PartialWaveSet(BaseModel):
    """Radial waves psi_l(r) = sqrt(r) phi_l(r) for l in [-l_max, l_max]

    Row i of values holds l = i - l_max. Node 0 of the radial grid sits at r = 0
    and is pinned to zero.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    radial_grid: Grid1D
    l_max: int = Field(ge=0)
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex(cls, v: Any) -> np.ndarray:
        return np.array(v, dtype=np.complex128)

    @model_validator(mode="after")
    def _check_shape(self) -> "PartialWaveSet":
        expected = (2 * self.l_max + 1, self.radial_grid.n_points)
        if self.values.shape != expected:
            raise ValueError(f"values has shape {self.values.shape}, expected {expected}")
        return self

    @property
    def ls(self) -> np.ndarray:
        return np.arange(-self.l_max, self.l_max + 1)

    def wave(self, l: int) -> ComplexField1D:
        if abs(l) > self.l_max:
            raise KeyError(f"l={l} outside [-{self.l_max}, {self.l_max}]")
        return ComplexField1D(grid=self.radial_grid, values=self.values[l + self.l_max])

    @property
    def waves(self) -> Dict[int, ComplexField1D]:
        return {int(l): self.wave(int(l)) for l in self.ls}


class AngularProfile(BaseModel):
    """|Psi| (or |Phi|) versus distance at a fixed angle and time

    angle is None for one-dimensional profiles, whose coordinate is x.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    time: float
    angle: Optional[float] = None
    coordinate: np.ndarray
    amplitude: np.ndarray
    field: Optional[np.ndarray] = None
    quantity: Literal["psi", "phi"] = "psi"

    @field_validator("coordinate", "amplitude", mode="before")
    @classmethod
    def _as_real(cls, v: Any) -> np.ndarray:
        return np.array(v, dtype=float)

    @field_validator("field", mode="before")
    @classmethod
    def _as_complex(cls, v: Any) -> Optional[np.ndarray]:
        return None if v is None else np.array(v, dtype=np.complex128)

    @model_validator(mode="after")
    def _check_samples(self) -> "AngularProfile":
        if self.coordinate.shape != self.amplitude.shape:
            raise ValueError("coordinate and amplitude must have the same length")
        if np.any(np.diff(self.coordinate) <= 0):
            raise ValueError("profile coordinate must be strictly increasing")
        if np.any(self.amplitude < 0):
            raise ValueError("profile amplitude must be non-negative")
        return self


# 1D snapshots and 2D angular cuts share one record type
ProfileRecord = AngularProfile


class PeakTrain(BaseModel):
    """Local maxima of a profile inside a region"""
    positions: List[float]
    heights: List[float]
    mean_spacing: float
    spacing_cv: float = Field(ge=0, le=1)

    @property
    def count(self) -> int:
        return len(self.positions)


class EnvelopeFit(BaseModel):
    """C(x) = amplitude * exp(-decay_rate |x|) * sin^2(k x + phase)"""
    decay_rate: float
    k: float
    amplitude: float
    phase: float = 0.0
    residual: float


class PowerLawFit(BaseModel):
    """|psi(0)|(t) = prefactor / t**exponent"""
    exponent: float
    prefactor: float
    fit_window: Tuple[float, float]
    residual: float
    n_samples: int


class ExponentialFit(BaseModel):
    """|psi(0)|(t) = prefactor * exp(-rate t)"""
    rate: float
    prefactor: float
    fit_window: Tuple[float, float]
    residual: float


class TrainSpeed(BaseModel):
    speed: float
    centroid_start: float
    centroid_end: float
    envelope_speed: Optional[float] = None
    trains_matched: bool = True


class InteriorWavenumber(BaseModel):
    k_prime: float
    n_wavelengths: int
    implied_k_squared: Optional[float] = None
    crossings: int


class BoundState(BaseModel):
    kappa: float
    energy: float
    parity: Literal["even", "odd"]


class SquareWellStates(BaseModel):
    """Square well of depth V0 and half-width a with its bound-state ladder"""
    depth: float = Field(ge=0)
    half_width: float = Field(gt=0)
    mass: float = Field(gt=0)
    bound_states: List[BoundState] = Field(default_factory=list)


class ContourSpec(BaseModel):
    """Momentum contour: real axis out to +-p_max, lifted to detour_height on |Re p| < detour_half_width"""
    p_max: float = Field(gt=0)
    n_nodes: int = Field(4096, ge=16)
    detour_height: float = Field(gt=0)
    detour_half_width: float = Field(0.25, gt=0)


class ProfileRequest(BaseModel):
    angle: float
    time: float = Field(ge=0)


class SweepSpec(BaseModel):
    """One configuration key run over several values"""
    key: Literal["q", "y0", "x0", "width", "mass", "depth"]
    values: List[float] = Field(min_length=1)


class EvolutionSettings(BaseModel):
    """[evolution] section; unset grid fields fall back to the documented defaults"""
    mass: float = Field(20.0, gt=0)
    t_final: float = Field(200.0, ge=0)
    dt: Optional[float] = Field(None, gt=0)
    dx: Optional[float] = Field(None, gt=0)
    x_min: Optional[float] = None
    x_max: Optional[float] = None
    r_max: Optional[float] = Field(None, gt=0)
    l_max: int = Field(50, ge=0)
    boundary: Literal["hard_wall"] = "hard_wall"


class OutputSettings(BaseModel):
    snapshots: List[float] = Field(default_factory=list)
    profiles: List[ProfileRequest] = Field(default_factory=list)
    observables: List[Literal["norm", "energy", "center_amplitude", "per_l_norm", "reflected_fraction"]] = Field(
        default_factory=lambda: ["norm", "energy"]
    )
    observe_every: float = Field(5.0, gt=0)
    profile_field: Literal["psi", "phi"] = "psi"
    output_dir: str = "output"


class AnalysisSettings(BaseModel):
    prominence: float = Field(0.05, gt=0, lt=1)
    region_min: Optional[float] = None
    region_max: Optional[float] = None
    fit_t_min: Optional[float] = None
    fit_t_max: Optional[float] = None
    check_lmax: bool = False
    delta_l: int = Field(10, ge=0)


class OracleSettings(BaseModel):
    p_max: Optional[float] = Field(None, gt=0)
    n_nodes: int = Field(4096, ge=16)
    detour_height: Optional[float] = Field(None, gt=0)


class RunConfig(BaseModel):
    """Fully validated run configuration"""
    mode: Literal["run1d", "run2d", "oracle", "analyze", "compare"]
    packet: PacketSpec = Field(default_factory=PacketSpec)
    potential: PotentialSpec = Field(default_factory=PotentialSpec)
    evolution: EvolutionSettings = Field(default_factory=EvolutionSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    analysis: AnalysisSettings = Field(default_factory=AnalysisSettings)
    oracle: OracleSettings = Field(default_factory=OracleSettings)
    sweep: Optional[SweepSpec] = None
    seed_label: str = ""
    tier: Literal["default", "long"] = "default"

    @property
    def snapshot_times(self) -> List[float]:
        """Configured snapshots, or the quarter ladder up to t_final"""
        if self.output.snapshots:
            return sorted(self.output.snapshots)
        t = self.evolution.t_final
        if t == 0:
            return [0.0]
        return [t / 4, t / 2, 3 * t / 4, t]


class GateResult(BaseModel):
    value: float
    threshold: float
    passed: bool


class RunManifest(BaseModel):
    """Reproducibility ledger written last by every completed run"""
    config_text: str
    code_version: str
    grid: Dict[str, Any] = Field(default_factory=dict)
    wall_clock_seconds: float = 0.0
    norm_drift: Optional[float] = None
    gates: Dict[str, GateResult] = Field(default_factory=dict)
    files: Dict[str, str] = Field(default_factory=dict)
    log: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(gate.passed for gate in self.gates.values())


class SimulationState(TypedDict, total=False):
    """Main state for the simulation pipeline"""
    # Input
    config: RunConfig
    config_text: str
    output_dir: str

    # Messages for run log
    messages: Annotated[List[Dict[str, Any]], add_messages]

    # Simulation phase
    profiles: List[Tuple[str, AngularProfile]]  # (variant label, profile)
    series: Dict[str, ObservableSeries]
    grid_info: Dict[str, Any]
    simulation_status: str  # "pending", "completed", "failed"

    # Analysis phase
    fit_rows: List[Tuple[str, float, float]]
    gates: Dict[str, GateResult]
    analysis_status: str

    # Output phase
    files: Dict[str, str]  # relative path -> sha256
    manifest: Optional[RunManifest]
    started_at: float

    # Overall workflow status
    workflow_status: str  # "initialized", "simulating", "analyzing", "completed", "failed"
    error_kind: Optional[str]  # "config", "numeric"
    error_message: Optional[str]
