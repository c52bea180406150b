"""Credible-contingency selection and scenario construction.

The worst single credible contingency is found by simulating both the
largest unit by live MW output and the largest by stored energy (they often
differ in a mixed fleet) and keeping whichever produces the deeper nadir.
"""

from __future__ import annotations

from dataclasses import replace

from .fleet import (
    GeneratorUnit,
    SimulationConfig,
    SimulationResult,
    SystemSnapshot,
)
from .simulation import ContingencyScenario, simulate

__all__ = [
    "ScenarioError",
    "largest_mw_unit",
    "largest_inertia_unit",
    "build_scenario",
    "worst_case",
]


class ScenarioError(ValueError):
    """A contingency scenario could not be constructed."""


def _online(snapshot: SystemSnapshot) -> list[GeneratorUnit]:
    units = [u for u in snapshot.units if u.online]
    if not units:
        raise ScenarioError("snapshot has no online units")
    return units


def largest_mw_unit(snapshot: SystemSnapshot) -> str:
    """Id of the online unit with the highest live output.

    Ties go to the larger stored energy, then the lexicographically
    smallest id, so selection is deterministic.
    """
    units = _online(snapshot)
    best = min(units, key=lambda u: (-u.output_mw, -u.kinetic_energy, u.id))
    return best.id


def largest_inertia_unit(snapshot: SystemSnapshot) -> str:
    """Id of the online unit with the highest stored energy.

    Ties go to the larger output, then the lexicographically smallest id.
    """
    units = _online(snapshot)
    best = min(units, key=lambda u: (-u.kinetic_energy, -u.output_mw, u.id))
    return best.id


def build_scenario(
    snapshot: SystemSnapshot,
    unit_id: str,
    stages: tuple[tuple[float, float], ...] = (),
    label: str | None = None,
) -> ContingencyScenario:
    """Scenario for tripping one online unit.

    The tripped machine is disconnected outright: its output becomes the
    power deficit and its stored energy, reserve and droop response leave
    the fleet. Optional stages add later MW changes for staged trips.
    """
    try:
        unit = snapshot.unit(unit_id)
    except KeyError as exc:
        raise ScenarioError(str(exc)) from exc
    if not unit.online:
        raise ScenarioError(f"unit {unit_id!r} is offline and cannot be tripped")
    remaining = tuple(u for u in snapshot.units if u.id != unit_id)
    base = replace(snapshot, units=remaining)
    return ContingencyScenario(
        base=base,
        delta_p_cont=-unit.output_mw,
        label=label or f"trip:{unit_id}",
        stages=stages,
    )


def worst_case(
    snapshot: SystemSnapshot,
    config: SimulationConfig,
    ke_load: float,
) -> SimulationResult:
    """Simulate both candidate trips and return the deeper-nadir result.

    The candidates (largest-MW and largest-inertia unit) are deduplicated
    when they are the same machine; the scenario label records which
    selection produced the returned result.
    """
    by_mw = largest_mw_unit(snapshot)
    by_ke = largest_inertia_unit(snapshot)
    if by_mw == by_ke:
        candidates = {by_mw: "largest-mw+largest-inertia"}
    else:
        candidates = {by_mw: "largest-mw", by_ke: "largest-inertia"}

    best: SimulationResult | None = None
    for unit_id, mode in candidates.items():
        scenario = build_scenario(snapshot, unit_id, label=f"trip:{unit_id}[{mode}]")
        result = simulate(scenario, config, ke_load)
        if best is None or result.nadir_hz < best.nadir_hz:
            best = result
    assert best is not None  # candidates is never empty
    return best
