"""Run configuration: YAML files validated into pydantic models.

Every model forbids unknown keys.  ``resolve`` returns the fully
materialised configuration (all defaults filled in) that is stored in the
run manifest; feeding it back through ``load_config`` yields the same
object.
"""
from __future__ import annotations

from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ProfileConfig(_Strict):
    kind: Literal["straight", "circle", "poschl_teller", "sukumar", "ellipse", "tabulated"]
    nu: Optional[float] = None
    alpha: Optional[float] = None
    eta: Optional[List[float]] = None
    radius: Optional[float] = None
    eccentricity: Optional[float] = None
    perimeter: Optional[float] = None
    file: Optional[str] = Field(None, description="CSV with columns q1,kappa")
    mask: List[float] = Field(default_factory=list)
    torsion: float = 0.0

    @model_validator(mode="after")
    def _needs(self):
        need = {"circle": ["radius"], "poschl_teller": ["nu", "alpha"], "sukumar": ["eta"],
                "ellipse": ["eccentricity", "perimeter"], "tabulated": ["file"]}.get(self.kind, [])
        missing = [k for k in need if getattr(self, k) is None]
        if missing:
            raise ValueError(f"profile kind {self.kind!r} needs {', '.join(missing)}")
        return self

    def build(self):
        from .geometry import CurvatureProfile

        if self.kind == "straight":
            p = CurvatureProfile.straight()
        elif self.kind == "circle":
            p = CurvatureProfile.circle(self.radius)
        elif self.kind == "poschl_teller":
            p = CurvatureProfile.poschl_teller(self.nu, self.alpha)
        elif self.kind == "sukumar":
            p = CurvatureProfile.sukumar(self.eta)
        elif self.kind == "ellipse":
            p = CurvatureProfile.ellipse_from(self.eccentricity, self.perimeter)
        else:
            from .io import read_csv

            header, data = read_csv(self.file)
            if header[:2] != ["q1", "kappa"]:
                raise ConfigError(f"{self.file}: expected columns q1,kappa")
            p = CurvatureProfile.tabulated(data[:, 0], data[:, 1])
        if self.mask:
            p = p.with_mask(tuple(self.mask))
        if self.torsion:
            p = p.with_torsion(self.torsion)
        return p

    def default_extent(self) -> float:
        """Half-width of an open grid that reaches the flat tails."""
        if self.kind == "poschl_teller":
            return 40.0 / self.alpha
        if self.kind == "sukumar":
            return 40.0 / min(self.eta)
        return 50.0


class DesignSection(_Strict):
    q1_min: Optional[float] = None
    q1_max: Optional[float] = None
    step: float = Field(1e-3, gt=0)
    lift_torsion: Optional[float] = None
    sigma0: float = Field(1.0, gt=0)
    validity_threshold: float = Field(0.1, gt=0)


class KGrid(_Strict):
    n: int = Field(64, ge=1)
    min: float = Field(0.02, gt=0)
    max: float = Field(2.0, gt=0)

    @model_validator(mode="after")
    def _order(self):
        if self.max < self.min:
            raise ValueError("k.max must be >= k.min")
        return self


class ScatterSection(_Strict):
    potential_file: Optional[str] = Field(None, description="CSV with columns q1,v")
    half_width: Optional[float] = Field(None, gt=0)
    dq: float = Field(0.05, gt=0)
    k: KGrid = KGrid()
    analytic_overlay: bool = True
    spectrum: bool = True
    wavefunctions: bool = False


class TransverseConfig(_Strict):
    kind: Literal["harmonic", "gaussian_well"] = "harmonic"
    omega: float = Field(1.0, gt=0)
    depth: float = Field(12.0, gt=0)
    width: float = Field(1.0, gt=0)

    def build(self):
        from .dynamics.waveguide2d import GaussianWell, Harmonic

        if self.kind == "harmonic":
            return Harmonic(self.omega)
        return GaussianWell(self.depth, self.width)


class PropagateSection(_Strict):
    mode: Literal["1d", "2d"] = "2d"
    fwhm: float = Field(235.0, gt=0)
    k0: float = 1.0 / 32.0
    launch_q1: Optional[float] = None
    dt: float = Field(0.05, gt=0)
    t_max: float = Field(40000.0, gt=0)
    snapshot_interval: float = Field(1920.0, gt=0)
    check_budget: bool = True
    # 2D only
    grid: Tuple[int, int] = (2048, 128)
    y_span: float = Field(40.0, gt=0)
    transverse: TransverseConfig = TransverseConfig()
    precision: Literal["single", "double"] = "double"
    bin_width: float = Field(1.0, gt=0)
    # 1D only
    dq: float = Field(0.5, gt=0)


class CarpetSection(_Strict):
    shape: Literal["ring", "ellipse"] = "ring"
    eccentricity: float = Field(0.9, ge=0, lt=1)
    perimeter: float = Field(150.0, gt=0)
    compensate: bool = False
    n: int = Field(256, ge=16)
    fwhm: Optional[float] = Field(None, gt=0)
    center: Optional[float] = None
    revivals: float = Field(2.0, gt=0)
    n_frames: int = Field(241, ge=2)
    dt: float = Field(0.05, gt=0)
    window: Tuple[float, float] = (0.9, 1.1)


class CompensateSection(_Strict):
    eccentricity: float = Field(0.9, ge=0, lt=1)
    perimeter: float = Field(150.0, gt=0)
    n: int = Field(256, ge=16)
    dtau: float = Field(0.5, gt=0)
    # energy converges quadratically in the state error: 1e-16 per step keeps
    # the density error near 1e-4
    tol: float = Field(1e-16, gt=0)
    max_steps: int = Field(2_000_000, ge=1)


class _Root(_Strict):
    version: int = SCHEMA_VERSION
    seed: int = 0

    @model_validator(mode="after")
    def _version(self):
        if self.version != SCHEMA_VERSION:
            raise ValueError(f"unsupported config version {self.version} (expected {SCHEMA_VERSION})")
        return self


class DesignConfig(_Root):
    profile: ProfileConfig
    design: DesignSection = DesignSection()


class ScatterConfig(_Root):
    profile: Optional[ProfileConfig] = None
    scatter: ScatterSection = ScatterSection()

    @model_validator(mode="after")
    def _source(self):
        if (self.profile is None) == (self.scatter.potential_file is None):
            raise ValueError("give exactly one of profile or scatter.potential_file")
        return self


class PropagateConfig(_Root):
    profile: ProfileConfig
    propagate: PropagateSection = PropagateSection()

    @model_validator(mode="after")
    def _supported(self):
        if self.propagate.mode == "2d" and self.profile.kind != "poschl_teller":
            raise ValueError("2d propagation supports the poschl_teller bent guide only")
        return self


class CarpetConfig(_Root):
    carpet: CarpetSection = CarpetSection()


class CompensateConfig(_Root):
    compensate: CompensateSection = CompensateSection()


MODELS = {
    "design": DesignConfig,
    "scatter": ScatterConfig,
    "spectrum": ScatterConfig,
    "propagate": PropagateConfig,
    "carpet": CarpetConfig,
    "compensate": CompensateConfig,
}

AnyConfig = Union[DesignConfig, ScatterConfig, PropagateConfig, CarpetConfig, CompensateConfig]


def _line_of(text: str, loc) -> Optional[int]:
    """1-based line of the YAML node at key path ``loc`` (best effort)."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                if k.value == str(key):
                    line = k.start_mark.line + 1
                    node = v
                    break
            else:
                return line
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            return line
    return line


def parse_config(command: str, text: str, source: str = "<config>") -> AnyConfig:
    if command not in MODELS:
        raise ConfigError(f"unknown command {command!r}")
    try:
        data = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    try:
        return MODELS[command].model_validate(data)
    except ValidationError as exc:
        msgs = []
        for err in exc.errors():
            loc = tuple(err["loc"])
            line = _line_of(text, loc)
            where = ".".join(str(p) for p in loc) or "<root>"
            at = f" (line {line})" if line else ""
            msgs.append(f"{source}: {where}{at}: {err['msg']}")
        raise ConfigError("\n".join(msgs)) from exc


def load_config(command: str, path) -> AnyConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config(command, text, str(path))


def resolve(cfg: AnyConfig) -> dict:
    """Fully materialised, JSON/YAML-serialisable configuration."""
    return cfg.model_dump(mode="json")

