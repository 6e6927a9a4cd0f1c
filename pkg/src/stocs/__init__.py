"""Contact-implicit trajectory optimization for quasi-static and
quasi-dynamic rigid-object manipulation in 2D and 3D."""

from .contact import (ContactForce, ContactFrame, ManipulatorContact, Wrench,
                      balance_residual, build_frame, net_wrench, tangent_basis)
from .geometry import (Configuration, SdfGrid, SurfaceCloud, closest_point,
                       cloud_distances, load_cloud, load_sdf, save_cloud,
                       save_sdf, signed_distance, transform_points)
from .mpcc import MpccConfig, MpccProblem, ResidualReport, VarLayout
from .oracle import ORACLES, IndexPoint, IndexSet, OracleConfig, mvo_update, \
    tamvo_update
from .result import (IterationStats, StocsResult, load_result, save_result,
                     stats_to_csv)
from .scenario import Scenario, ScenarioError, load_scenario
from .solver import StocsConfig, initialize_trajectory, solve
from .trace import emit_trace
from .verify import (VerificationReport, VerifyConfig,
                     static_feasibility_oracle, verify)

__version__ = "0.1.0"
