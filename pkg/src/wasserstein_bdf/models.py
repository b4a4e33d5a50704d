"""Data models for the Wasserstein BDF solver."""

from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# tolerance on t_end / tau being a whole number of steps
STEP_RTOL = 1e-9


def _as_float_array(value) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(value, dtype=float))


class ArrayModel(BaseModel):
    """Base model for values carrying numpy arrays."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class EulerianSamples(ArrayModel):
    """Density samples u_j on nodes x_j of [0, 1]."""

    x_nodes: np.ndarray = Field(..., description="Nodes x_0 = 0 < ... < x_N = 1")
    u_values: np.ndarray = Field(..., description="Density samples at the nodes")

    @field_validator("x_nodes", "u_values", mode="before")
    @classmethod
    def coerce_array(cls, v):
        return _as_float_array(v)

    @model_validator(mode="after")
    def validate_nodes(self) -> "EulerianSamples":
        """Check matching lengths and strictly increasing nodes."""
        if self.x_nodes.ndim != 1 or self.x_nodes.shape != self.u_values.shape:
            raise ValueError("x_nodes and u_values must be 1-d arrays of equal length")
        if self.x_nodes.size < 3:
            raise ValueError("at least two cells are required")
        if np.any(np.diff(self.x_nodes) <= 0):
            raise ValueError("x_nodes must be strictly increasing")
        return self

    @property
    def n_cells(self) -> int:
        return self.x_nodes.size - 1

    @classmethod
    def uniform(cls, u_values) -> "EulerianSamples":
        """Samples on the uniform grid x_j = j/N."""
        u = _as_float_array(u_values)
        return cls(x_nodes=np.linspace(0.0, 1.0, u.size), u_values=u)


class LagrangianGrid(ArrayModel):
    """Partition 0 = ω_0 < ω_1 < ... < ω_N = M of the mass interval.

    Cells are indexed 0..N-1 in code; cell c spans [ω_c, ω_{c+1}].
    """

    omega: np.ndarray = Field(..., description="Mass labels ω_0..ω_N")

    @field_validator("omega", mode="before")
    @classmethod
    def coerce_array(cls, v):
        return _as_float_array(v)

    @field_validator("omega")
    @classmethod
    def validate_omega(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 1 or v.size < 3:
            raise ValueError("a grid needs at least two cells")
        if v[0] != 0.0:
            raise ValueError("omega must start at 0")
        if np.any(np.diff(v) <= 0):
            raise ValueError("omega must be strictly increasing")
        return v

    @property
    def n_cells(self) -> int:
        return self.omega.size - 1

    @property
    def total_mass(self) -> float:
        return float(self.omega[-1])

    @property
    def delta(self) -> np.ndarray:
        """Cell widths δ, delta[c] = ω_{c+1} - ω_c."""
        return np.diff(self.omega)

    @property
    def Delta(self) -> np.ndarray:
        """Half support widths of the hats, Delta[i] belongs to node ω_{i+1}."""
        d = self.delta
        return 0.5 * (d + np.roll(d, -1))

    @property
    def sigma(self) -> np.ndarray:
        """Centroids (ω_{i+2} + ω_{i+1} + ω_i)/3 of the hat supports, with wrap."""
        w = self.omega
        n = self.n_cells
        ext = np.concatenate([w, [w[-1] + w[1]]])
        return (ext[2 : n + 2] + ext[1 : n + 1] + ext[0:n]) / 3.0

    @property
    def dofs(self) -> np.ndarray:
        """Per-cell global indices of (left hat, right hat, bump), shape (N, 3)."""
        n = self.n_cells
        c = np.arange(n)
        return np.stack([(c - 1) % n, c, n + c], axis=1)

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        """Whether ω_{N-i} = M - ω_i holds within rtol·M."""
        m = self.total_mass
        return bool(np.all(np.abs(self.omega[::-1] - (m - self.omega)) <= rtol * m))


class WeightVector(ArrayModel):
    """Weights of g = Σ g_j φ_j: N nodal values and N bump amplitudes."""

    lin: np.ndarray = Field(..., description="Nodal values g(ω_1)..g(ω_N)")
    quad: np.ndarray = Field(..., description="Bump amplitudes, quad[c] on cell c")

    @field_validator("lin", "quad", mode="before")
    @classmethod
    def coerce_array(cls, v):
        return _as_float_array(v)

    @model_validator(mode="after")
    def validate_lengths(self) -> "WeightVector":
        if self.lin.ndim != 1 or self.lin.shape != self.quad.shape:
            raise ValueError("lin and quad must be 1-d arrays of equal length")
        return self

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.lin, self.quad])

    @classmethod
    def from_array(cls, values) -> "WeightVector":
        arr = _as_float_array(values)
        if arr.ndim != 1 or arr.size % 2:
            raise ValueError("weight array must be 1-d with even length")
        n = arr.size // 2
        return cls(lin=arr[:n], quad=arr[n:])


class TrajectorySet(ArrayModel):
    """Eulerian positions of material particles with fixed mass labels."""

    labels: np.ndarray = Field(..., description="Mass labels ω_p in (0, M)")
    times: np.ndarray = Field(..., description="Sample times t_n")
    positions: np.ndarray = Field(..., description="x_p(t_n), shape (steps, P)")

    @field_validator("labels", "times", "positions", mode="before")
    @classmethod
    def coerce_array(cls, v):
        return _as_float_array(v)

    @model_validator(mode="after")
    def validate_shape(self) -> "TrajectorySet":
        if self.positions.shape != (self.times.size, self.labels.size):
            raise ValueError("positions must have shape (len(times), len(labels))")
        return self

    def is_monotone(self, atol: float = 1e-12) -> bool:
        """Whether positions are weakly ordered by label at every step."""
        order = np.argsort(self.labels)
        return bool(np.all(np.diff(self.positions[:, order], axis=1) >= -atol))


class WassersteinMatrix(ArrayModel):
    """Symmetric 2N×2N matrix [[A, Bᵀ], [B, C]] of the squared distance form."""

    entries: np.ndarray = Field(..., description="Dense matrix entries")

    @field_validator("entries", mode="before")
    @classmethod
    def coerce_array(cls, v):
        return _as_float_array(v)

    @field_validator("entries")
    @classmethod
    def validate_entries(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2:
            raise ValueError("entries must be a square matrix of even dimension")
        scale = max(float(np.max(np.abs(v))), 1e-300)
        if np.max(np.abs(v - v.T)) > 1e-14 * scale:
            raise ValueError("entries must be symmetric")
        return v

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cells(self) -> int:
        return self.dim // 2

    @property
    def A(self) -> np.ndarray:
        n = self.n_cells
        return self.entries[:n, :n]

    @property
    def B(self) -> np.ndarray:
        n = self.n_cells
        return self.entries[n:, :n]

    @property
    def C(self) -> np.ndarray:
        n = self.n_cells
        return self.entries[n:, n:]


class BdfScheme(BaseModel):
    """Coefficients a_0..a_k of a k-step backward differentiation formula."""

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., description="Number of steps")
    a: List[float] = Field(..., description="Coefficients a_0..a_k")

    @model_validator(mode="after")
    def validate_consistency(self) -> "BdfScheme":
        """Σ a_i = 0, Σ i·a_i = 1 and a_k > 0."""
        if len(self.a) != self.k + 1:
            raise ValueError("a must hold k + 1 coefficients")
        if abs(sum(self.a)) > 1e-15:
            raise ValueError("coefficients must sum to zero")
        if abs(sum(i * ai for i, ai in enumerate(self.a)) - 1.0) > 1e-15:
            raise ValueError("coefficients must satisfy Σ i·a_i = 1")
        if self.a[-1] <= 0:
            raise ValueError("leading coefficient must be positive")
        return self

    @property
    def leading(self) -> float:
        return self.a[-1]


class FlowState(ArrayModel):
    """Time-stepping state: the last k weight vectors, oldest first."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=False)

    step: int = Field(0, description="Step index n")
    time: float = Field(0.0, description="Time t = nτ")
    history: List[np.ndarray] = Field(..., description="Recent weight arrays")
    multiplier: float = Field(0.0, description="Mass multiplier λ of the last solve")

    @property
    def current(self) -> np.ndarray:
        return self.history[-1]

    def push(self, g: np.ndarray, k: int) -> None:
        """Append a new state and keep the newest k entries."""
        self.history = (list(self.history) + [g])[-k:]


class KktSystem(ArrayModel):
    """Saddle-point system [[H, c], [cᵀ, 0]] (δg, δλ) = -G."""

    matrix: np.ndarray = Field(..., description="Symmetric (2N+1)×(2N+1) matrix")
    rhs: np.ndarray = Field(..., description="Negative KKT residual -G")

    @model_validator(mode="after")
    def validate_shape(self) -> "KktSystem":
        n = self.rhs.size
        if self.matrix.shape != (n, n) or n % 2 == 0:
            raise ValueError("matrix must be (2N+1)×(2N+1) matching rhs")
        return self

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.rhs))


class NewtonReport(BaseModel):
    """Outcome of one constrained Newton solve."""

    iterations: int = Field(..., description="Newton iterations performed")
    residual_norm: float = Field(
        ..., description="Final ℓ² norm of the KKT residual"
    )
    update_norm: float = Field(..., description="Final relative ℓ∞ update in g")
    converged: bool = Field(..., description="Both norms below tolerance")


class DiagnosticsRecord(BaseModel):
    """Observables of one accepted time step."""

    step: int
    time: float
    entropy_rel: float = Field(..., description="S_N[g] - S_N[g_∞]")
    gnorm_sq_rel: float = Field(..., description="Squared G-norm of the shifted pair")
    var_u: float = Field(..., description="Discrete standard deviation of u")
    var_g: float = Field(..., description="Discrete standard deviation of g")
    mass_error: float = Field(..., description="mass(g) - 1")
    newton_iterations: int = 0
    residual_norm: float = 0.0
    min_g: float = Field(..., description="Smallest value of g over checkpoints")


class DecayFit(BaseModel):
    """Least-squares exponential fit of a decaying series."""

    t_start: float
    t_end: float
    rate: float = Field(..., description="Fitted rate λ̂, positive for decay")
    residual: float = Field(..., description="RMS residual of log(value)")
    difference_quotient: float = Field(
        ..., description="Difference-quotient rate at the window midpoint"
    )
    n_points: int


class FlowStep(ArrayModel):
    """One accepted state yielded by a running flow."""

    step: int
    time: float
    g: np.ndarray = Field(..., description="Weight array of the accepted state")
    multiplier: float = 0.0
    report: Optional[NewtonReport] = None
    record: DiagnosticsRecord


class RunConfig(BaseModel):
    """Configuration of one flow run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(..., lt=0, description="Exponent α < 0")
    n_cells: int = Field(100, ge=4, description="Number of cells N")
    tau: float = Field(1e-5, gt=0, description="Time step τ")
    t_end: float = Field(..., gt=0, description="End time T")
    scheme: Literal["euler", "bdf2"] = Field("bdf2", description="Time scheme")
    newton_tol: float = Field(1e-8, gt=0, description="Newton tolerance")
    newton_max_iter: int = Field(50, ge=1, description="Newton iteration budget")
    initial: str = Field("cos2", description="Preset name or two-column file")
    snapshot_every: int = Field(0, ge=0, description="Snapshot cadence, 0 = ends only")
    particles: int = Field(0, ge=0, description="Number of traced particles")
    assembler: Literal["quadrature", "closed_form"] = Field(
        "quadrature", description="Assembly route for M_w"
    )
    fit_t_start: Optional[float] = Field(None, description="Fit window start")
    fit_t_end: Optional[float] = Field(None, description="Fit window end")
    saturation_floor: Optional[float] = Field(
        None, gt=0, description="Saturation level, default 1e3·newton_tol"
    )
    output_dir: str = Field("out", description="Artifact directory")
    dump_matrix: bool = Field(False, description="Write M_w as text")

    @model_validator(mode="after")
    def validate_times(self) -> "RunConfig":
        if self.t_end <= self.tau:
            raise ValueError("t_end must exceed tau")
        steps = self.t_end / self.tau
        if abs(steps - round(steps)) > STEP_RTOL * steps:
            raise ValueError(
                f"t_end={self.t_end} is not a whole number of steps of tau={self.tau}"
            )
        if (
            self.fit_t_start is not None
            and self.fit_t_end is not None
            and self.fit_t_end <= self.fit_t_start
        ):
            raise ValueError("fit_t_end must exceed fit_t_start")
        return self

    @property
    def order(self) -> int:
        return 1 if self.scheme == "euler" else 2

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.tau))

    @property
    def floor(self) -> float:
        if self.saturation_floor is not None:
            return self.saturation_floor
        return 1e3 * self.newton_tol


class RunSummary(BaseModel):
    """Summary written after a run."""

    status: Literal["ok", "failed"]
    message: Optional[str] = None
    steps: int
    t_final: float
    total_mass: float
    fits: Dict[str, Optional[DecayFit]] = Field(default_factory=dict)
    theoretical_rate: Optional[float] = None
    max_newton_iterations: int = 0
    max_mass_error: float = 0.0
    config: RunConfig
