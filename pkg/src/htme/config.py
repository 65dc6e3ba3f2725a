"""Validated scenario configurations (JSON schema via pydantic; unknown keys are rejected)."""

from __future__ import annotations

import math
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

GeneratorKind = Literal["lindblad", "linearized", "htme", "arh", "double_commutator"]
SpectralMode = Literal["quantum", "symmetrized", "redfield_weighted"]

# Spectral modes each builder accepts.
ALLOWED_MODES = {
    "lindblad": ("quantum", "redfield_weighted"),
    "linearized": ("quantum",),
    "htme": ("symmetrized",),
    "arh": ("symmetrized",),
    "double_commutator": ("quantum", "symmetrized", "redfield_weighted"),
}
DEFAULT_MODE = {
    "lindblad": "quantum",
    "linearized": "quantum",
    "htme": "symmetrized",
    "arh": "symmetrized",
    "double_commutator": "symmetrized",
}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TlsConfig(_Strict):
    omega0: float = Field(1.0, gt=0)
    beta_T: float = Field(0.01, ge=0)
    gamma0: float = Field(1.0, gt=0)
    t_max: Optional[float] = Field(None, gt=0)
    n_steps: int = Field(200, ge=2)
    bloch: tuple[float, float, float] = (0.0, 0.0, 1.0)
    high_t_branch: Literal["emission", "stimulated"] = "stimulated"

    @field_validator("bloch")
    @classmethod
    def _bloch_in_ball(cls, v):
        if math.fsum(c * c for c in v) > 1 + 1e-12:
            raise ValueError("Bloch vector must have length <= 1")
        return v

    @model_validator(mode="after")
    def _finite_occupation(self):
        if self.beta_T * self.omega0 == 0:
            raise ValueError("beta_T * omega0 must be positive for the bosonic bath")
        return self


class SingletTripletConfig(_Strict):
    omega0: float = Field(1.0, gt=0)
    beta_T: float = Field(0.01, ge=0)
    tau: float = Field(1e-3, gt=0)
    omega_rms: float = Field(math.sqrt(500.0), gt=0)
    kappa: float = Field(0.9, ge=-1, le=1)
    t_max: Optional[float] = Field(None, gt=0)
    n_steps: int = Field(200, ge=2)
    c_S0: float = math.sqrt(3) / 2
    c_D0: float = 0.0
    c_Z0: float = 0.0
    lorentzian_argument: Literal["scaled", "fixed"] = "scaled"
    positive_correction: bool = True

    @property
    def narrowing(self) -> bool:
        return self.omega0 * self.tau <= 1e-2


class LowTConfig(_Strict):
    omega0: float = Field(1.0, gt=0)
    beta_T: float = Field(50.0, gt=0)
    gamma0: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _low_temperature(self):
        if self.beta_T * self.omega0 < 20:
            raise ValueError("the low-temperature scenario needs beta_T * omega0 >= 20")
        return self


class SpectralSpec(_Strict):
    kind: Literal["bosonic_radiative", "lorentzian_classical", "tabulated"]
    scale: float = Field(1.0, gt=0)
    high_t_branch: Literal["emission", "stimulated"] = "emission"
    tau: float = Field(1.0, gt=0)
    omega_rms: float = Field(1.0, gt=0)
    kappa: Optional[list[list[float]]] = None
    table: Optional[dict] = None
    table_path: Optional[str] = None


Matrix = list[list[Union[float, tuple[float, float]]]]


class CustomConfig(_Strict):
    h_s: Matrix
    couplings: list[Matrix]
    spectral: SpectralSpec
    beta_T: float = Field(ge=0)
    rho0: Matrix
    t_max: float = Field(gt=0)
    n_steps: int = Field(100, ge=2)
    freq_tol: float = Field(1e-8, gt=0)
    observables: Optional[dict[str, Matrix]] = None


class OutputSpec(_Strict):
    trajectory_path: str = "trajectory.csv"
    summary_path: str = "summary.json"


PARAMS = {"tls": TlsConfig, "singlet_triplet": SingletTripletConfig, "lowT": LowTConfig, "custom": CustomConfig}


class ScenarioConfig(_Strict):
    scenario: Literal["tls", "singlet_triplet", "lowT", "custom"]
    generator: GeneratorKind = "lindblad"
    spectral_mode: Optional[SpectralMode] = None
    params: dict = Field(default_factory=dict)
    output: OutputSpec = OutputSpec()

    @model_validator(mode="after")
    def _combination(self):
        mode = self.mode
        if mode not in ALLOWED_MODES[self.generator]:
            raise ValueError(
                f"generator {self.generator!r} does not accept spectral_mode {mode!r}; "
                f"allowed: {ALLOWED_MODES[self.generator]}"
            )
        if self.scenario == "singlet_triplet" and self.generator not in ("htme", "arh"):
            raise ValueError("the singlet_triplet scenario supports generators 'htme' and 'arh'")
        if self.scenario == "lowT" and self.generator != "lindblad":
            raise ValueError("the lowT scenario compares against the full 'lindblad' generator")
        PARAMS[self.scenario].model_validate(self.params)
        return self

    @property
    def mode(self) -> str:
        return self.spectral_mode or DEFAULT_MODE[self.generator]

    @property
    def physical(self):
        return PARAMS[self.scenario].model_validate(self.params)
