"""JSON scenario configuration (one file = one scenario) and result schemas."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError

from .errors import ConfigError, DeconvError
from .estimator import GridSpec
from .spectral import CharacteristicModel, Scenario, SobolevSpec


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ScaleParams(_Strict):
    scale: PositiveFloat = 1.0


class GammaParams(_Strict):
    scale: PositiveFloat = 1.0
    order: PositiveFloat = 1.0


class ExpPowerParams(_Strict):
    scale: PositiveFloat = 1.0
    exponent: float = Field(1.0, gt=0, le=2)


class NoParams(_Strict):
    pass


class GaussianModel(_Strict):
    family: Literal["gaussian"]
    params: ScaleParams = ScaleParams()


class LaplaceModel(_Strict):
    family: Literal["laplace"]
    params: ScaleParams = ScaleParams()


class SymmetricGammaModel(_Strict):
    family: Literal["symmetric_gamma"]
    params: GammaParams = GammaParams()


class ExpPowerModel(_Strict):
    family: Literal["exp_power"]
    params: ExpPowerParams = ExpPowerParams()


class HyperbolicSecantModel(_Strict):
    family: Literal["hyperbolic_secant"]
    params: ScaleParams = ScaleParams()


class IdentityModel(_Strict):
    family: Literal["identity"]
    params: NoParams = NoParams()


ModelConfig = Annotated[
    Union[GaussianModel, LaplaceModel, SymmetricGammaModel, ExpPowerModel,
          HyperbolicSecantModel, IdentityModel],
    Field(discriminator="family"),
]


class SobolevConfig(_Strict):
    k: PositiveFloat
    B: PositiveFloat


class GridConfig(_Strict):
    x_min: float = -12.0
    x_max: float = 12.0
    x_points: int = Field(1024, ge=16)
    s_max: PositiveFloat = 100.0
    s_points: int = Field(256, ge=64)


class ScenarioConfig(_Strict):
    n: PositiveInt
    sigma: PositiveFloat
    x_model: ModelConfig
    xi_model: ModelConfig
    g_model: ModelConfig
    sobolev: SobolevConfig
    grid: GridConfig = GridConfig()
    seed: int | None = Field(None, ge=0, lt=2**64)
    reps: int = Field(100, ge=2)
    # rate-study extensions
    n_list: list[PositiveInt] | None = Field(None, min_length=3)
    sigma_mode: Literal["fixed", "threshold"] = "fixed"

    def scenario(self, n: int | None = None) -> Scenario:
        def model(m) -> CharacteristicModel:
            return CharacteristicModel.from_params(m.family, m.params.model_dump())

        return Scenario(n=self.n if n is None else n, sigma=self.sigma,
                        x_model=model(self.x_model), xi_model=model(self.xi_model),
                        g_model=model(self.g_model),
                        sobolev=SobolevSpec(self.sobolev.k, self.sobolev.B))

    def grid_spec(self) -> GridSpec:
        return GridSpec(**self.grid.model_dump())


def _describe(err: ValidationError) -> tuple[str, list[dict]]:
    items = [{"field": ".".join(str(p) for p in e["loc"]) or "<root>", "error": e["msg"]}
             for e in err.errors()]
    first = items[0]
    return f"{first['field']}: {first['error']}", items


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    """Validate a JSON document; errors carry the offending field or line."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                          source=source, line=exc.lineno, column=exc.colno) from exc
    try:
        cfg = ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        msg, items = _describe(exc)
        raise ConfigError(msg, source=source, errors=items) from exc
    try:
        cfg.scenario()
        cfg.grid_spec()
    except DeconvError as exc:
        raise ConfigError(exc.message, source=source, **exc.context) from exc
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from exc
    return parse_config(text, str(path))


def config_from_scenario(scenario: Scenario, **extra) -> ScenarioConfig:
    def model(m: CharacteristicModel) -> dict:
        return {"family": m.family.value, "params": m.params()}

    return ScenarioConfig.model_validate({
        "n": scenario.n, "sigma": scenario.sigma, "x_model": model(scenario.x_model),
        "xi_model": model(scenario.xi_model), "g_model": model(scenario.g_model),
        "sobolev": {"k": scenario.sobolev.k, "B": scenario.sobolev.B}, **extra})


# ---------------------------------------------------------------------------
# result documents emitted by the CLI
# ---------------------------------------------------------------------------

class ClassifyResult(_Strict):
    case: Literal["I", "II", "III", "IV", "V", "VI", "VII", "VIII"]
    rho_finite: bool
    reason: str


class BandwidthResult(_Strict):
    case: Literal["I", "II", "III", "IV", "V", "VI", "VII", "VIII"]
    branch: Literal["AboveThreshold", "BelowThreshold"]
    threshold: float
    h_opt: float
    predicted_delta: float | None
    trace: str


class RateFitResult(_Strict):
    slope: float
    intercept: float
    r_squared: float = Field(ge=0, le=1)
    points: list[tuple[float, float]] = Field(min_length=3)


class LaplaceCheckRow(_Strict):
    h: float
    log_table: float
    log_laplace: float
    table: float | None
    laplace: float | None
    ratio: float | None
    log_ratio: float
    branch: str


class LaplaceCheckResult(_Strict):
    case: str
    sigma: float
    rows: list[LaplaceCheckRow]


class ErrorResult(_Strict):
    code: str
    message: str
    context: dict


SCHEMAS = {
    "scenario_config": ScenarioConfig,
    "classify_result": ClassifyResult,
    "bandwidth_result": BandwidthResult,
    "rate_fit": RateFitResult,
    "laplace_check_result": LaplaceCheckResult,
    "error": ErrorResult,
}


def write_schemas(directory: str | Path) -> list[Path]:
    out = []
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, model in SCHEMAS.items():
        path = directory / f"{name}.schema.json"
        path.write_text(json.dumps(model.model_json_schema(), indent=2, sort_keys=True) + "\n")
        out.append(path)
    return out
