"""
Scenario configurations: YAML files checked by a marshmallow schema,
then turned into typed pydantic settings.
"""
from typing import List, Literal, Optional, Tuple
import os

import yaml
from marshmallow import RAISE, Schema, fields, validate
from pydantic import BaseModel, ConfigDict, Field, ValidationError, \
    model_validator

from identsuite.constants.const_tables import get_constant
from identsuite.models.control.control_law import (
    DriveChain,
    LoopTuning,
    PdGains,
    tune_gains,
)
from identsuite.models.estimators.didim import DidimOptions
from identsuite.models.estimators.output_error import OutputErrorOptions
from identsuite.models.scara.scara_dynamics import (
    BaseParameters,
    SmoothSignConfig,
    effective_inertia,
)
from identsuite.models.signal.signal_processing import (
    DecimationSpec,
    FilterSpec,
)
from identsuite.models.simulation.closed_loop_sim import (
    TRANSIENT_TIME_CONSTANTS,
    NoiseConfig,
    SimConfig,
)
from identsuite.models.simulation.reference_trajectory import (
    ReferenceTrajectory,
    quintic_reference,
)
from identsuite.util.app_logger import app_logs
from identsuite.util.exceptions import ConfigInvalid
from identsuite.util.schema_utilities import schema_verification

Method = Literal["idim", "didim", "oe"]
METHODS = ("idim", "didim", "oe")

# One 32 s cycle of q1 = 0.3 t + 0.6 sin(pi t / 8) and
# q2 = 0.25 t + 0.45 cos(pi t / 8), sampled every 4 s. Both joints keep
# turning forward so the friction torques never reverse.
DEFAULT_WAYPOINTS = (
    (0.0, 0.45), (1.8, 1.0), (2.4, 1.55), (3.0, 3.0), (4.8, 4.45),
    (6.6, 5.0), (7.2, 5.55), (7.8, 7.0), (9.6, 8.45),
)
DEFAULT_VELOCITIES = (
    (0.53561945, 0.25), (0.3, 0.07328541), (0.06438055, 0.25),
    (0.3, 0.42671459), (0.53561945, 0.25), (0.3, 0.07328541),
    (0.06438055, 0.25), (0.3, 0.42671459), (0.53561945, 0.25),
)
DEFAULT_ACCELERATIONS = (
    (0.0, -0.06939566), (-0.09252754, 0.0), (0.0, 0.06939566),
    (0.09252754, 0.0), (0.0, -0.06939566), (-0.09252754, 0.0),
    (0.0, 0.06939566), (0.09252754, 0.0), (0.0, -0.06939566),
)
DEFAULT_SEGMENT_DURATIONS = (4.0,) * 8


# Marshmallow schema of the scenario file (structure and value types)

def _pair(**kwargs) -> fields.List:
    return fields.List(fields.Float(), validate=validate.Length(equal=2),
                       **kwargs)


class ParametersSchema(Schema):
    class Meta:
        unknown = RAISE
    zz1r = fields.Float()
    fv1 = fields.Float()
    fc1 = fields.Float()
    zz2r = fields.Float()
    lmx2 = fields.Float()
    lmy2 = fields.Float()
    fv2 = fields.Float()
    fc2 = fields.Float()


class TuningSchema(Schema):
    class Meta:
        unknown = RAISE
    omega_n = _pair()
    zeta = _pair()


class ChainSchema(Schema):
    class Meta:
        unknown = RAISE
    g_actual = _pair()
    g_apriori = _pair()


class TrajectorySchema(Schema):
    class Meta:
        unknown = RAISE
    waypoints = fields.List(_pair(), validate=validate.Length(min=2))
    segment_durations = fields.List(
        fields.Float(validate=validate.Range(min=0, min_inclusive=False)),
        validate=validate.Length(min=1))
    velocities = fields.List(_pair(), allow_none=True)
    accelerations = fields.List(_pair(), allow_none=True)
    cycles = fields.Integer(validate=validate.Range(min=1))


class SimSchema(Schema):
    class Meta:
        unknown = RAISE
    fm = fields.Float(validate=validate.Range(min=0, min_inclusive=False))
    rel_tol = fields.Float()
    abs_tol = fields.Float()
    initial_offset = _pair()
    downsample = fields.Integer(validate=validate.Range(min=1))


class NoiseSchema(Schema):
    class Meta:
        unknown = RAISE
    torque_sigma = _pair(allow_none=True)
    torque_sigma_ratio = fields.Float(validate=validate.Range(min=0))
    position_sigma = _pair()


class FilterSchema(Schema):
    class Meta:
        unknown = RAISE
    cutoff_hz = fields.Float()
    order = fields.Integer()
    forward_backward = fields.Boolean()


class DecimationSchema(Schema):
    class Meta:
        unknown = RAISE
    nd = fields.Integer(validate=validate.Range(min=1))
    cutoff_hz = fields.Float(allow_none=True)
    order = fields.Integer()


class IdimSchema(Schema):
    class Meta:
        unknown = RAISE
    filter = fields.Nested(FilterSchema, allow_none=True)
    decimation = fields.Nested(DecimationSchema, allow_none=True)
    solver = fields.String(validate=validate.OneOf(("ols", "wls")))
    edge_samples = fields.Integer(validate=validate.Range(min=0))


class DidimSchema(Schema):
    class Meta:
        unknown = RAISE
    tol1 = fields.Float()
    tol2 = fields.Float()
    max_iterations = fields.Integer(validate=validate.Range(min=1))
    init_mode = fields.String(validate=validate.OneOf(
        ("regular-ia", "regular-zz", "explicit", "idim")))
    initial_chi = fields.Nested(ParametersSchema, allow_none=True)
    solver = fields.String(validate=validate.OneOf(("ols", "wls")))
    residual_floor = fields.Float()
    strict = fields.Boolean()
    decimation = fields.Nested(DecimationSchema, allow_none=True)


class OutputErrorSchema(DidimSchema):
    rel_step = fields.Float()
    abs_step = fields.Float()
    max_halvings = fields.Integer(validate=validate.Range(min=0))


class ScenarioConfigSchema(Schema):
    """ Top level of a scenario file """
    class Meta:
        unknown = RAISE
    name = fields.String(required=True,
                         validate=validate.Regexp(r'^[A-Za-z0-9_.-]+$'))
    description = fields.String()
    seed = fields.Integer(allow_none=True)
    nominal_chi = fields.Nested(ParametersSchema)
    apriori_chi = fields.Nested(ParametersSchema, allow_none=True)
    actual_tuning = fields.Nested(TuningSchema)
    simulated_tuning = fields.Nested(TuningSchema)
    chain = fields.Nested(ChainSchema)
    ssign_epsilon = fields.Float()
    trajectory = fields.Nested(TrajectorySchema)
    sim = fields.Nested(SimSchema)
    noise = fields.Nested(NoiseSchema)
    methods = fields.List(fields.String(validate=validate.OneOf(METHODS)),
                          validate=validate.Length(min=1))
    idim = fields.Nested(IdimSchema)
    didim = fields.Nested(DidimSchema)
    oe = fields.Nested(OutputErrorSchema)
    output_dir = fields.String(allow_none=True)


# Typed settings

class TrajectorySpec(BaseModel):
    """ Quintic waypoint reference, replayed cycles times """
    model_config = ConfigDict(frozen=True)

    waypoints: List[Tuple[float, float]] = Field(
        default_factory=lambda: list(DEFAULT_WAYPOINTS))
    segment_durations: List[float] = Field(
        default_factory=lambda: list(DEFAULT_SEGMENT_DURATIONS))
    # Joint rates at the waypoints, zero when None
    velocities: Optional[List[Tuple[float, float]]] = Field(
        default_factory=lambda: list(DEFAULT_VELOCITIES))
    accelerations: Optional[List[Tuple[float, float]]] = Field(
        default_factory=lambda: list(DEFAULT_ACCELERATIONS))
    cycles: int = Field(default=1, ge=1)

    @model_validator(mode='before')
    @classmethod
    def rest_at_given_waypoints(cls, data):
        """ Waypoints given without rates are rest-to-rest """
        if isinstance(data, dict) and "waypoints" in data:
            data = {"velocities": None, "accelerations": None, **data}
        return data

    @model_validator(mode='after')
    def check_rates(self) -> 'TrajectorySpec':
        for label in ("velocities", "accelerations"):
            rates = getattr(self, label)
            if rates is not None and len(rates) != len(self.waypoints):
                raise ValueError(
                    f'{len(rates)} {label} for {len(self.waypoints)}'
                    ' waypoints')
        if len(self.segment_durations) != len(self.waypoints) - 1:
            raise ValueError(
                f'{len(self.waypoints)} waypoints need'
                f' {len(self.waypoints) - 1} segment durations')
        return self

    def build(self) -> ReferenceTrajectory:
        return quintic_reference(self.waypoints, self.segment_durations,
                                 self.cycles, self.velocities,
                                 self.accelerations)

    @property
    def duration(self) -> float:
        return sum(self.segment_durations) * self.cycles


class ActualSimConfig(SimConfig):
    """ Actual-robot simulation, sampled at fm then kept 1 in downsample """
    downsample: int = Field(default=1, ge=1)

    @property
    def measurement_fm(self) -> float:
        return self.fm / self.downsample


class IdimSettings(BaseModel):
    """ IDIM pipeline; filter None means raw differentiation """
    model_config = ConfigDict(frozen=True)

    filter: Optional[FilterSpec] = Field(default_factory=FilterSpec)
    decimation: Optional[DecimationSpec] = Field(
        default_factory=DecimationSpec)
    solver: Literal["ols", "wls"] = "wls"
    edge_samples: int = Field(default=0, ge=0)


class DidimSettings(DidimOptions):
    decimation: Optional[DecimationSpec] = None

    def options(self) -> DidimOptions:
        return DidimOptions(**self.model_dump(exclude={"decimation"}))


class ScenarioConfig(BaseModel):
    """
    A synthetic identification experiment: the actual robot and its
    controller, the excitation, the measurement chain and the methods run
    on the measurements.
    """
    model_config = ConfigDict(frozen=True)

    name: str
    description: str = ""
    seed: Optional[int] = None
    nominal_chi: BaseParameters = Field(
        default_factory=BaseParameters.nominal)
    # Parameters the actual controller was tuned with, nominal_chi if None
    apriori_chi: Optional[BaseParameters] = None
    actual_tuning: LoopTuning = Field(default_factory=LoopTuning)
    simulated_tuning: LoopTuning = Field(default_factory=LoopTuning)
    chain: DriveChain = Field(default_factory=DriveChain)
    ssign_epsilon: Optional[float] = Field(default=None, gt=0)
    trajectory: TrajectorySpec = Field(default_factory=TrajectorySpec)
    sim: ActualSimConfig = Field(default_factory=ActualSimConfig)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    methods: List[Method] = Field(default_factory=lambda: ["idim", "didim"])
    idim: IdimSettings = Field(default_factory=IdimSettings)
    didim: DidimSettings = Field(default_factory=DidimSettings)
    oe: OutputErrorOptions = Field(default_factory=lambda: OutputErrorOptions(
        init_mode="explicit",
        initial_chi=BaseParameters.from_array(
            0.8 * BaseParameters.nominal().to_array())))
    output_dir: Optional[str] = None

    @model_validator(mode='after')
    def check_consistency(self) -> 'ScenarioConfig':
        noisy = self.noise.torque_sigma_ratio > 0 or \
            any(self.noise.torque_sigma or ()) or \
            any(self.noise.position_sigma)
        if noisy and self.seed is None:
            raise ValueError('seed is mandatory for noise-bearing scenarios')
        fm = self.sim.measurement_fm
        if self.idim.filter is not None and \
                not self.idim.filter.cutoff_hz < fm / 2.0:
            raise ValueError(
                f'idim filter cutoff {self.idim.filter.cutoff_hz} Hz is not'
                f' below the Nyquist frequency {fm / 2.0} Hz')
        for label, spec in (("idim", self.idim.decimation),
                            ("didim", self.didim.decimation)):
            if spec is not None and spec.cutoff_hz is not None and \
                    not spec.cutoff_hz < fm / 2.0:
                raise ValueError(f'{label} decimation cutoff must be below'
                                 f' {fm / 2.0} Hz')
        transient = TRANSIENT_TIME_CONSTANTS / min(
            self.actual_tuning.omega_n_min,
            self.simulated_tuning.omega_n_min)
        if self.trajectory.duration <= transient:
            raise ValueError(
                f'trajectory of {self.trajectory.duration} s does not'
                f' outlast the {transient} s transient')
        if self.didim.init_mode == "idim" and "didim" in self.methods and \
                "idim" not in self.methods:
            raise ValueError('didim init_mode idim needs the idim method')
        return self

    @property
    def ssign(self) -> SmoothSignConfig:
        if self.ssign_epsilon is None:
            return SmoothSignConfig()
        return SmoothSignConfig(epsilon=self.ssign_epsilon)

    @property
    def apriori(self) -> BaseParameters:
        return self.apriori_chi or self.nominal_chi

    def actual_gains(self) -> PdGains:
        """ Gains of the actual controller, tuned with a priori values """
        return tune_gains(self.actual_tuning, effective_inertia(self.apriori),
                          self.chain.g_apriori)

    def noise_config(self) -> NoiseConfig:
        return self.noise.model_copy(update={"seed": self.seed or 0})

    def with_seed(self, seed: int) -> 'ScenarioConfig':
        return self.model_copy(update={"seed": seed})

    def derived(self, name: str, **changes) -> "ScenarioConfig":
        """ Validated copy with another name and some fields replaced """
        data = self.model_dump()
        data.update(changes, name=name)
        return validated_scenario(data)


def _drop_none(data):
    """ YAML nulls fall back to the defaults, except for nullable specs """
    return {key: value for key, value in data.items()
            if value is not None or key in ("filter", "decimation",
                                            "apriori_chi", "initial_chi",
                                            "torque_sigma", "seed",
                                            "output_dir", "velocities",
                                            "accelerations")}


def validated_scenario(data: dict) -> ScenarioConfig:
    """
    Raises:
        ConfigInvalid: consistency errors.
    """
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigInvalid(
            f'{get_constant("ERROR_MESSAGES", "CONFIG_SCHEMA")}: {err}',
            payload=err.errors(include_url=False)) from err


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    """
    Raises:
        ConfigInvalid: schema or consistency errors.
    """
    data = schema_verification(raw, ScenarioConfigSchema(), app_logs)
    return validated_scenario(_nested_drop_none(data))


def _nested_drop_none(data):
    if isinstance(data, dict):
        return {key: _nested_drop_none(value)
                for key, value in _drop_none(data).items()}
    return data


def load_scenario(path: str) -> ScenarioConfig:
    """
    Reads a YAML scenario file.

    Raises:
        ConfigInvalid: missing file, bad YAML or invalid content.
    """
    if not os.path.isfile(path):
        raise ConfigInvalid(
            f'{get_constant("ERROR_MESSAGES", "CONFIG_FILE")}: {path}')
    with open(path, encoding='utf-8') as yaml_file:
        try:
            raw = yaml.safe_load(yaml_file)
        except yaml.YAMLError as err:
            raise ConfigInvalid(f'{path}: {err}') from err
    if not isinstance(raw, dict):
        raise ConfigInvalid(f'{path}: a scenario file holds a mapping')
    return scenario_from_dict(raw)


def shipped_scenarios() -> List[str]:
    """ Paths of the scenario files shipped with the package """
    base = os.path.join(os.path.dirname(os.path.dirname(
        os.path.dirname(__file__))), 'scenarios')
    return sorted(os.path.join(base, name) for name in os.listdir(base)
                  if name.startswith('scenario_') and name.endswith('.yml'))

