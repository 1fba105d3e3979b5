"""Command-line entry point binding all modules into reproducible runs.

Subcommands: ``analyze`` (closed-form report), ``simulate`` (Monte Carlo
against the exact distribution), ``bet`` (the verification betting game),
``scan`` (CSV parameter sweeps), ``verify`` (factorization and measurement
identity suite) and ``optics`` (compile an optical setup and check it
against its abstract measurement).

Exit status: 0 on success, 1 when a check fails, 2 on usage or scenario
errors.  Flags override scenario-file values; ``WPS_SEED`` supplies the
default seed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import discrimination, interferometer, marker, optics, simulate, twopath
from .errors import ScenarioError, WeakPathSimError
from .interferometer import CheckpointMarkers
from .scenario import (MEASUREMENTS, CONDITIONS, SEED_ENV_VAR, SETUP_NAMES,
                       TOPOLOGIES, Scenario, emit_report, parse_scenario)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

CHECK_TOL = 1e-12
DEFAULT_EPSILON_GRID = (0.01, 0.04, 0.1)


# ---------------------------------------------------------------------------
# Analytic sources: every reported probability carries the closed form it
# comes from (or the generic evaluation rule when no simple form exists).
# ---------------------------------------------------------------------------

_GENERIC_SOURCE = "exact Born evaluation"


def _bob_sources(sc: Scenario) -> dict:
    verify_3 = sc.beam_splitters == {"BS1", "BS2"}
    verify_2 = sc.beam_splitters == {"BS2"}
    on_d = sc.condition == "detectorD"
    if sc.topology == "three-path" and sc.measurement == "ud":
        if on_d:
            return {"A": "3*eps/(1+6*eps)", "B": "3*eps/(1+6*eps)",
                    "C": "3*eps/(1+6*eps)", "0": "(1-3*eps)/(1+6*eps)"}
        if verify_3 and sc.condition == "unconditioned":
            return {"A": "eps", "B": "eps", "C": "eps", "0": "1-3*eps"}
    if sc.topology == "three-path" and sc.measurement == "exit-orthogonal" and on_d:
        return {"i": "0", "ii": "1/(1+6*eps)", "iii": "6*eps/(1+6*eps)"}
    if sc.topology == "two-path" and sc.measurement == "ud":
        if on_d or sc.condition == "exit-ii":
            return {"A": "1/2", "B": "1/2", "0": "0"}
        if sc.condition == "exit-i":
            return {"A": "eps/(2*(1-eps))", "B": "eps/(2*(1-eps))",
                    "0": "(1-2*eps)/(1-eps)"}
        if verify_2 and sc.condition == "unconditioned":
            return {"A": "eps", "B": "eps", "0": "1-2*eps"}
    return {}


def _alice_sources(sc: Scenario) -> dict:
    if sc.condition != "unconditioned":
        return {}
    if sc.topology == "three-path":
        if sc.beam_splitters == {"BS1", "BS2"}:
            return {"i": "1/3", "ii": "1/3", "iii": "1/3"}
        if sc.beam_splitters == {"BS1", "BS2", "BS3"} and not sc.blocked_paths:
            return {"i": "(2-3*eps)/3", "ii": "1/3", "iii": "eps"}
        if sc.beam_splitters == {"BS1", "BS2", "BS3", "BS4"} and not sc.blocked_paths:
            return {"i": "(2-3*eps)/3", "ii": "(2+3*eps)/9", "iii": "(1+6*eps)/9"}
    else:
        if sc.beam_splitters == {"BS2"}:
            return {"i": "1/2", "ii": "1/2"}
        if sc.beam_splitters == {"BS2", "BS3"}:
            return {"i": "(1+(1-2*eps)*cos(phase))/2",
                    "ii": "(1-(1-2*eps)*cos(phase))/2"}
    return {}


def _analyze_report(sc: Scenario) -> dict:
    model = simulate.build_trial_model(sc)
    values = []
    alice_sources = _alice_sources(sc)
    for outcome, p in model.alice_marginal().items():
        values.append({"name": f"p[exit={outcome}]", "value": p,
                       "source": alice_sources.get(outcome, _GENERIC_SOURCE)})
    if sc.measurement != "none":
        bob_sources = _bob_sources(sc)
        for outcome, p in model.bob_marginal().items():
            values.append({"name": f"p[outcome={outcome}]", "value": p,
                           "source": bob_sources.get(outcome, _GENERIC_SOURCE)})
    if sc.topology == "three-path":
        markers = CheckpointMarkers.symmetric(sc.epsilon)
        config = interferometer.NetworkConfig(
            beam_splitters=sc.beam_splitters,
            link_phases=(0.0, 0.0, sc.phase),
            blocked_paths=frozenset(sc.blocked_paths))
        p_detect = interferometer.detection_probability(markers, config)
        standard = (sc.beam_splitters == {"BS1", "BS2", "BS3", "BS4"}
                    and not sc.blocked_paths)
        values.append({"name": "p[detectorD]", "value": p_detect,
                       "source": "(1+6*eps)/9" if standard else "marked-network evolution"})
    else:
        conditional = twopath.detection_and_states(
            twopath.TwoPathModel(sc.epsilon, sc.phase))
        values.append({"name": "p[detectorD]", "value": conditional.p_detect,
                       "source": "(1-(1-2*eps)*cos(phase))/2"})
        scan = twopath.fringe_scan(sc.epsilon)
        values.append({"name": "visibility", "value": scan.visibility,
                       "source": "1-2*eps"})
    if sc.measurement == "min-error":
        values.append({"name": "p[guess-correct]",
                       "value": discrimination.min_error_success(sc.epsilon, sc.topology),
                       "source": ("(sqrt(1-2*eps)+2*sqrt(eps))^2/3"
                                  if sc.topology == "three-path"
                                  else "1/2+sqrt(eps*(1-eps))")})
    return {"command": "analyze", "scenario": sc.as_dict(), "values": values}


def _simulate_report(sc: Scenario) -> dict:
    stats = simulate.run_trials(sc)
    model = stats.model
    sections = {}
    all_passed = True
    for section, counts, analytic in (
            ("alice", stats.alice_counts(), model.alice_marginal()),
            ("bob", stats.bob_counts(), model.bob_marginal())):
        if section == "bob" and sc.measurement == "none":
            continue
        checks = simulate.compare_to_analytic(counts, stats.n, analytic)
        rows = []
        for outcome, check in checks.items():
            rows.append({"outcome": outcome, "count": check.observed,
                         "analytic": check.analytic, "z": check.z,
                         "exact": check.exact, "passed": check.passed})
            all_passed &= check.passed
        sections[section] = rows
    report = {"command": "simulate", "scenario": sc.as_dict(),
              "n": stats.n, "seed": stats.seed}
    report.update(sections)
    report["passed"] = bool(all_passed)
    return report


def _bet_report(sc: Scenario) -> dict:
    result = simulate.betting_game(sc)
    model = simulate.build_trial_model(sc)
    analytic_bet_rate = sum(
        cell.probability for cell in model.cells
        if cell.alice in model.challenge and cell.bob in model.predictions)
    zero_error_required = sc.measurement in ("ud", "exit-orthogonal")
    rate_check = simulate.compare_to_analytic(
        {"bet": result.n_bets}, result.n_trials, {"bet": analytic_bet_rate})["bet"]
    passed = rate_check.passed and (result.all_bets_won or not zero_error_required)
    return {
        "command": "bet", "scenario": sc.as_dict(),
        "n": result.n_trials, "seed": sc.resolved_seed(),
        "betRate": result.bet_rate, "analyticBetRate": analytic_bet_rate,
        "betRateZ": rate_check.z,
        "winRate": result.win_rate, "bets": result.n_bets, "wins": result.n_wins,
        "zeroErrorRequired": zero_error_required,
        "allBetsWon": result.all_bets_won,
        "passed": bool(passed),
    }


def _scan_report(sc: Scenario, param: str, points: int) -> dict:
    if points < 2:
        raise ScenarioError("scan needs at least 2 points")
    rows = []
    if sc.topology == "two-path":
        header = ["param", "value", "p_exit_i", "p_exit_ii", "visibility"]
        if param == "phase":
            scan = twopath.fringe_scan(sc.epsilon, points)
            for phase, p_ii in zip(scan.phases, scan.p_ii):
                rows.append(["phase", float(phase), 1.0 - float(p_ii), float(p_ii),
                             scan.visibility])
        elif param == "epsilon":
            for eps in np.linspace(0.0, 0.5, points):
                probs = twopath.exit_probabilities(twopath.TwoPathModel(float(eps), sc.phase))
                visibility = twopath.fringe_scan(float(eps)).visibility
                rows.append(["epsilon", float(eps), probs["i"], probs["ii"], visibility])
        else:
            raise ScenarioError(f"scan parameter must be phase or epsilon, got {param!r}")
    else:
        if param != "epsilon":
            raise ScenarioError("three-path scans sweep epsilon")
        header = ["param", "value", "p_exit_i", "p_exit_ii", "p_exit_iii", "p_detect"]
        for eps in np.linspace(0.0, 1.0 / 3.0, points):
            swept = sc.with_overrides(epsilon=float(eps), measurement="none",
                                      condition="unconditioned", mode="analytic")
            marginal = simulate.build_trial_model(swept).alice_marginal()
            p_detect = interferometer.detection_probability(
                CheckpointMarkers.symmetric(float(eps)))
            rows.append(["epsilon", float(eps), marginal["i"], marginal["ii"],
                         marginal["iii"], p_detect])
    return {"command": "scan", "scenario": sc.as_dict(), "param": param,
            "table": {"header": header, "rows": rows}}


def _verify_report(epsilon_grid) -> dict:
    checks = []

    def record(name, deviation, tol=CHECK_TOL):
        checks.append({"name": name, "maxDeviation": float(deviation),
                       "tolerance": tol, "passed": bool(deviation <= tol)})

    split_report = interferometer.verify_splits(
        markers=CheckpointMarkers.symmetric(0.04))
    for name, deviation in split_report.items():
        record(f"splits/{name}", deviation)

    table = {0: (0, 0, 1), 1: (0, 0, 1), 2: (-1, 1, 1), 3: (0, 0, 1), 4: (0, 0, 1)}
    worst = 0.0
    for split, expected in table.items():
        got = interferometer.weak_values(split).as_tuple()
        worst = max(worst, max(abs(g - e) for g, e in zip(got, expected)))
        worst = max(worst, abs(sum(got) - 1.0))
    record("weak-values/table", worst)

    for eps in epsilon_grid:
        family = marker.build_family(eps)
        gram = family.gram()
        expected = np.full((3, 3), 1.0 - 3.0 * eps) + 3.0 * eps * np.eye(3)
        record(f"family/gram[eps={eps:g}]", np.max(np.abs(gram - expected)))
        diff = family.psi_b - family.psi_a
        record(f"family/loop-norm[eps={eps:g}]",
               abs(np.vdot(diff, diff).real - 6.0 * eps))
        record(f"family/loop-orthogonal[eps={eps:g}]",
               abs(np.vdot(diff, family.psi_c)))
        for name, povm in (("ud3", discrimination.ud3(eps).povm),
                           ("exit", discrimination.exit_povm(eps).povm),
                           ("ud2", discrimination.ud2(min(eps, 0.5)).povm)):
            total = sum(povm.elements) - np.eye(povm.dim)
            record(f"povm/{name}-complete[eps={eps:g}]", np.max(np.abs(total)))
        markers = CheckpointMarkers.symmetric(eps)
        p_detect = interferometer.detection_probability(markers)
        record(f"detection/closed-form[eps={eps:g}]",
               abs(p_detect - (1.0 + 6.0 * eps) / 9.0))
    passed = all(check["passed"] for check in checks)
    return {"command": "verify",
            "epsilonGrid": [float(e) for e in epsilon_grid],
            "checks": checks, "passed": passed}


def _optics_report(name: str, epsilon: float) -> dict:
    setup = optics.build_setup(name, epsilon)
    compiled = optics.compile_setup(setup)
    checks = []

    def record(check_name, deviation, tol=CHECK_TOL):
        checks.append({"name": check_name, "maxDeviation": float(deviation),
                       "tolerance": tol, "passed": bool(deviation <= tol)})

    completeness = np.max(np.abs(sum(compiled.elements) - np.eye(compiled.dim)))
    record("povm-complete", completeness)

    if name == "polarization-ud":
        record("matches-abstract-ud",
               optics.equivalence(compiled, discrimination.ud2(epsilon).povm))
    elif name == "path-qutrit-ud":
        record("matches-abstract-ud",
               optics.equivalence(compiled, discrimination.ud3(epsilon).povm))
    elif name == "path-qutrit-exit":
        record("matches-abstract-exit",
               optics.equivalence(compiled, discrimination.exit_povm(epsilon).povm))
    elif name == "polarization-min-error":
        model = twopath.TwoPathModel(epsilon)
        success = 0.5 * sum(
            float(np.real(psi.conj() @ compiled.element(label) @ psi))
            for label, psi in (("A", model.psi_a), ("B", model.psi_b)))
        record("min-error-success",
               abs(success - discrimination.min_error_success(epsilon, "two-path")))
    elif name == "path-qutrit-min-error":
        family = marker.build_family(epsilon)
        states = {"A": family.psi_a, "B": family.psi_b, "C": family.psi_c}
        success = sum(
            float(np.real(psi.conj() @ compiled.element(label) @ psi))
            for label, psi in states.items()) / 3.0
        record("min-error-success",
               abs(success - discrimination.min_error_success(epsilon, "three-path")))
    passed = all(check["passed"] for check in checks)
    return {"command": "optics", "setup": name, "epsilon": float(epsilon),
            "outcomes": list(compiled.labels), "checks": checks, "passed": passed}


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------

def _add_scenario_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--scenario", help="scenario JSON file")
    parser.add_argument("--topology", choices=TOPOLOGIES)
    parser.add_argument("--epsilon", type=float, help="marking strength")
    parser.add_argument("--phase", type=float, help="interferometer phase (radians)")
    parser.add_argument("--measurement", choices=MEASUREMENTS)
    parser.add_argument("--condition", choices=CONDITIONS)
    parser.add_argument("--beam-splitters", dest="beam_splitters",
                        help="comma-separated, e.g. BS1,BS2")
    parser.add_argument("--blocked-paths", dest="blocked_paths",
                        help="comma-separated path labels, e.g. iii")
    parser.add_argument("--trials", type=int, help="Monte Carlo trial count")
    parser.add_argument("--seed", type=int,
                        help=f"RNG seed (default: ${SEED_ENV_VAR} or 0)")


def _add_output_flags(parser: argparse.ArgumentParser, default_format="json"):
    parser.add_argument("--format", choices=("json", "csv", "text"),
                        default=default_format)
    parser.add_argument("--out", help="write the report here instead of stdout")


def _scenario_from_args(args, mode: str) -> Scenario:
    overrides = {
        "topology": args.topology,
        "epsilon": args.epsilon,
        "phase": args.phase,
        "measurement": args.measurement,
        "condition": args.condition,
        "trials": args.trials,
        "seed": args.seed,
        "mode": mode,
    }
    if args.beam_splitters is not None:
        overrides["beam_splitters"] = frozenset(
            s for s in args.beam_splitters.split(",") if s)
    if args.blocked_paths is not None:
        overrides["blocked_paths"] = tuple(
            p for p in args.blocked_paths.split(",") if p)
    if args.scenario:
        try:
            with open(args.scenario, "r", encoding="utf-8") as handle:
                base = parse_scenario(handle.read())
        except OSError as err:
            raise ScenarioError(f"cannot read scenario file: {err}") from None
        return base.with_overrides(**overrides)
    if args.topology is None or args.epsilon is None:
        raise ScenarioError("either --scenario or both --topology and --epsilon are required")
    kwargs = {key: value for key, value in overrides.items() if value is not None}
    return Scenario(**kwargs)


def _write(report: dict, args) -> None:
    payload = emit_report(report, args.format)
    if args.out:
        with open(args.out, "wb") as handle:
            handle.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakpathsim",
        description="Exact and Monte Carlo analysis of weakly path-marked interferometers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="closed-form probabilities of a scenario")
    _add_scenario_flags(p_analyze)
    _add_output_flags(p_analyze)

    p_sim = sub.add_parser("simulate", help="Monte Carlo run checked against exact values")
    _add_scenario_flags(p_sim)
    _add_output_flags(p_sim)

    p_bet = sub.add_parser("bet", help="play the verification betting game")
    _add_scenario_flags(p_bet)
    _add_output_flags(p_bet)

    p_scan = sub.add_parser("scan", help="CSV sweep over a parameter")
    _add_scenario_flags(p_scan)
    p_scan.add_argument("--param", choices=("phase", "epsilon"), default="phase")
    p_scan.add_argument("--points", type=int, default=64)
    _add_output_flags(p_scan, default_format="csv")

    p_verify = sub.add_parser("verify", help="run the identity and POVM check suite")
    p_verify.add_argument("--epsilon-grid", dest="epsilon_grid",
                          help="comma-separated strengths "
                               f"(default {','.join(str(e) for e in DEFAULT_EPSILON_GRID)})")
    _add_output_flags(p_verify)

    p_optics = sub.add_parser("optics", help="compile a setup and check equivalence")
    p_optics.add_argument("--scenario", help="scenario JSON file naming an opticalSetup")
    p_optics.add_argument("--setup", choices=SETUP_NAMES)
    p_optics.add_argument("--epsilon", type=float)
    _add_output_flags(p_optics)

    return parser


def run_command(argv) -> int:
    """Execute one CLI invocation; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            report = _analyze_report(_scenario_from_args(args, "analytic"))
        elif args.command == "simulate":
            report = _simulate_report(_scenario_from_args(args, "montecarlo"))
        elif args.command == "bet":
            report = _bet_report(_scenario_from_args(args, "betting"))
        elif args.command == "scan":
            report = _scan_report(_scenario_from_args(args, "analytic"),
                                  args.param, args.points)
        elif args.command == "verify":
            grid = DEFAULT_EPSILON_GRID
            if args.epsilon_grid:
                grid = tuple(float(x) for x in args.epsilon_grid.split(","))
            report = _verify_report(grid)
        elif args.command == "optics":
            name, epsilon = args.setup, args.epsilon
            if args.scenario:
                try:
                    with open(args.scenario, "r", encoding="utf-8") as handle:
                        base = parse_scenario(handle.read())
                except OSError as err:
                    raise ScenarioError(f"cannot read scenario file: {err}") from None
                name = name or base.optical_setup
                epsilon = base.epsilon if epsilon is None else epsilon
            if name is None:
                raise ScenarioError(
                    "either --setup or a scenario file with opticalSetup is required")
            report = _optics_report(name, 0.04 if epsilon is None else epsilon)
        else:  # pragma: no cover - argparse enforces the choices
            raise ScenarioError(f"unknown command {args.command!r}")
    except WeakPathSimError as err:
        print(f"weakpathsim: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    _write(report, args)
    if report.get("passed", True):
        return EXIT_OK
    return EXIT_CHECK_FAILED


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
