"""Exact simulator and Monte Carlo harness for weakly path-marked
interferometers: closed-form probabilities, discrimination measurements,
optical realizations, and a seeded verification betting game."""

from . import (discrimination, errors, interferometer, marker, optics, qcore,
               scenario, simulate, twopath)
from .discrimination import (exit_povm, mem2, min_error_success, ud2, ud3,
                             ud3_on_postselected)
from .errors import (CapacityError, ContractError, DegenerateFamilyError,
                     DomainError, ScenarioError, ShapeError,
                     SingularPostselectionError, WeakPathSimError, WiringError)
from .interferometer import (CheckpointMarkers, NetworkConfig, backward_state,
                             conditional_marker_state, detection_probability,
                             forward_state, marked_transfer, standard_unitaries,
                             verify_splits, weak_values)
from .marker import (MarkerFamily, build_family, joint_state, rho_fin,
                     subensemble)
from .optics import (OpticalSetup, build_setup, compile_setup, equivalence,
                     hwp, pair_source)
from .qcore import (DensityOperator, Povm, StateVector, UnitaryOperator,
                    apply_unitary, born, partial_trace, tensor_product)
from .scenario import Scenario, emit_report, parse_scenario, serialize_scenario
from .simulate import betting_game, build_trial_model, compare_to_analytic, run_trials
from .twopath import (TwoPathModel, detection_and_states, fringe_scan,
                      twopath_weak_values, whole_ensemble_tally)

__version__ = "0.1.0"
