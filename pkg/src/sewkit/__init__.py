"""Sewing, sphericalization, and geometric certification of finite metric spaces."""

__version__ = "0.1.0"

from .metric import (
    CollapseError,
    EpsilonGraph,
    FiniteMetricSpace,
    QuasiMetricTable,
    Subset,
    ValidationReport,
    ball,
    chain_metrize,
    components,
    default_epsilon,
    diam,
    epsilon_graph,
    epsilon_net,
    mesh,
    restrict,
    validate_metric,
)
from .generators import (
    GluingComponent,
    ScenarioBundle,
    carpet_net,
    carpet_with_disks,
    circle_net,
    disk_net,
    interval_net,
    snowflake,
)
from .sewing import (
    BAContractReport,
    CensusReport,
    Certificates,
    ComparabilityError,
    NearestSeamReport,
    SewnLayout,
    SewnSpace,
    component_census,
    nearest_seam_check,
    sew,
    verify_ba_contract,
    verify_flatness,
)
from .sphericalize import (
    SphericalizedSpace,
    check_angle_transfer,
    check_diam_transfer,
    sphericalize,
)
from .analysis import (
    DisconnectedGraphError,
    InsufficientScaleError,
    PropertyReport,
    SewnCertificate,
    ahlfors_dimension,
    angle,
    bounded_turning,
    certify_sewn,
    connectivity_threshold,
    doubling_constant,
    llc_check,
    porosity,
    relative_doubling,
    relative_porosity,
    uniform_perfectness,
)
from .maps import (
    DistortionProfile,
    PointMap,
    PowerLawEta,
    cross_ratio,
    qm_distortion,
    qs_distortion,
)
from .glue import (
    CompatibilityError,
    GlueCertificate,
    GluedMap,
    certify_glued_qm,
    glue_maps,
    identity_glued,
)
from .serialize import SchemaError

__all__ = [
    "BAContractReport",
    "CensusReport",
    "Certificates",
    "CollapseError",
    "ComparabilityError",
    "CompatibilityError",
    "DisconnectedGraphError",
    "DistortionProfile",
    "EpsilonGraph",
    "FiniteMetricSpace",
    "GlueCertificate",
    "GluedMap",
    "GluingComponent",
    "InsufficientScaleError",
    "NearestSeamReport",
    "PointMap",
    "PowerLawEta",
    "PropertyReport",
    "QuasiMetricTable",
    "ScenarioBundle",
    "SchemaError",
    "SewnCertificate",
    "SewnLayout",
    "SewnSpace",
    "SphericalizedSpace",
    "Subset",
    "ValidationReport",
    "ahlfors_dimension",
    "angle",
    "ball",
    "bounded_turning",
    "carpet_net",
    "carpet_with_disks",
    "certify_glued_qm",
    "certify_sewn",
    "chain_metrize",
    "circle_net",
    "component_census",
    "components",
    "connectivity_threshold",
    "cross_ratio",
    "default_epsilon",
    "diam",
    "disk_net",
    "doubling_constant",
    "epsilon_graph",
    "epsilon_net",
    "glue_maps",
    "identity_glued",
    "interval_net",
    "llc_check",
    "mesh",
    "nearest_seam_check",
    "porosity",
    "qm_distortion",
    "qs_distortion",
    "relative_doubling",
    "relative_porosity",
    "restrict",
    "sew",
    "snowflake",
    "sphericalize",
    "uniform_perfectness",
    "validate_metric",
    "check_angle_transfer",
    "check_diam_transfer",
    "verify_ba_contract",
    "verify_flatness",
    "__version__",
]
