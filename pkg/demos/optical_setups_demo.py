"""Compile the photon-pair measurement setups and check them against the
abstract measurements they realize.

Run: python demos/optical_setups_demo.py
"""

import numpy as np

from weakpathsim import build_family, equivalence, exit_povm, pair_source, ud2, ud3
from weakpathsim.discrimination import min_error_success
from weakpathsim.marker import joint_state
from weakpathsim.optics import (build_setup, compile_setup, prepared_joint_state,
                                SETUP_BUILDERS)
from weakpathsim.qcore import DensityOperator, born, projector
from weakpathsim.twopath import TwoPathModel

EPS = 0.04

print("Pair sources")
print("-" * 68)
two = pair_source("two-path-polarization", EPS)
print("two-path pair state (idler polarization x signal path):")
print(" ", np.round(two.state.amps.real, 4),
      " Schmidt:", np.round(two.schmidt_coefficients(), 4))
three = pair_source("three-path-entangled", EPS)
print("three-path pair state (matched idler/signal path qutrits):")
print(" ", np.round(three.state.amps.real, 4))
pushed = prepared_joint_state(three)
reference = joint_state(build_family(EPS), "checkpoints").amps
print("pushed through the preparation splitters, deviation from the",
      "checkpoint-stage state:", np.max(np.abs(pushed - reference)))

print()
print("Compiled measurement setups")
print("-" * 68)
abstract = {
    "polarization-ud": ud2(EPS).povm,
    "path-qutrit-ud": ud3(EPS).povm,
    "path-qutrit-exit": exit_povm(EPS).povm,
}
for name in SETUP_BUILDERS:
    compiled = compile_setup(build_setup(name, EPS))
    line = f"  {name:24s} outcomes {','.join(compiled.labels):10s}"
    if name in abstract:
        line += f" deviation from abstract: {equivalence(compiled, abstract[name]):.2e}"
    print(line)

print()
print("Minimum-error setups attain the optimal guessing rates")
print("-" * 68)
mem2 = compile_setup(build_setup("polarization-min-error", EPS))
model = TwoPathModel(EPS)
success2 = 0.5 * (born(DensityOperator(projector(model.psi_a)), mem2)["A"]
                  + born(DensityOperator(projector(model.psi_b)), mem2)["B"])
print(f"  two-path:   compiled {success2:.7f}   "
      f"closed form {min_error_success(EPS, 'two-path'):.7f}")
mem3 = compile_setup(build_setup("path-qutrit-min-error", EPS))
family = build_family(EPS)
success3 = sum(born(DensityOperator(projector(state)), mem3)[label]
               for label, state in (("A", family.psi_a), ("B", family.psi_b),
                                    ("C", family.psi_c))) / 3.0
print(f"  three-path: compiled {success3:.7f}   "
      f"closed form {min_error_success(EPS, 'three-path'):.7f}")
