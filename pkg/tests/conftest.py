"""Shared fleet builders for the test suite."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest

from rtfs import GeneratorUnit, SdrBlock, SystemSnapshot

TS = datetime(2026, 8, 10, 1, 0, 0, tzinfo=timezone.utc)


def make_unit(
    unit_id: str = "G1",
    rated_mw: float = 400.0,
    output_mw: float = 300.0,
    kinetic_energy: float = 2000.0,
    spinning_reserve_mw: float = 0.0,
    **kwargs,
) -> GeneratorUnit:
    return GeneratorUnit(
        id=unit_id,
        rated_mw=rated_mw,
        output_mw=output_mw,
        kinetic_energy=kinetic_energy,
        spinning_reserve_mw=spinning_reserve_mw,
        **kwargs,
    )


def make_droop_unit(
    unit_id: str,
    rated_mw: float,
    output_mw: float,
    kinetic_energy: float,
    spinning_reserve_mw: float,
    gain: float = 0.95,
    time_constant: float = 4.0,
    mdrr: float = 15.0,
    **kwargs,
) -> GeneratorUnit:
    return GeneratorUnit(
        id=unit_id,
        rated_mw=rated_mw,
        output_mw=output_mw,
        kinetic_energy=kinetic_energy,
        spinning_reserve_mw=spinning_reserve_mw,
        droop_enabled=True,
        gain=gain,
        time_constant=time_constant,
        mdrr=mdrr,
        **kwargs,
    )


def make_snapshot(
    units,
    system_load_mw: float = 1900.0,
    load_relief_factor: float = 2.0,
    sdr_blocks=(),
    **kwargs,
) -> SystemSnapshot:
    return SystemSnapshot(
        timestamp=kwargs.pop("timestamp", TS),
        units=tuple(units),
        sdr_blocks=tuple(sdr_blocks),
        system_load_mw=system_load_mw,
        load_relief_factor=load_relief_factor,
        **kwargs,
    )


def pfr_fleet_units() -> tuple[GeneratorUnit, ...]:
    """A five-unit mixed fleet with ample droop response.

    Aggregate online inertia is 11 500 MW.s and the largest unit carries
    244 MW, mirroring a realistic medium-sized islanded system.
    """
    return (
        make_droop_unit("GT1", 340.0, 244.0, 1600.0, 60.0, gain=0.95, time_constant=4.0, mdrr=20.0),
        make_droop_unit("CC1", 300.0, 210.0, 2400.0, 70.0, gain=1.00, time_constant=3.0, mdrr=15.0),
        make_droop_unit("CO1", 420.0, 230.0, 3300.0, 90.0, gain=0.90, time_constant=6.0, mdrr=25.0),
        make_droop_unit("CO2", 250.0, 150.0, 2100.0, 80.0, gain=1.05, time_constant=2.5, mdrr=12.0),
        make_droop_unit("GT2", 200.0, 120.0, 2100.0, 60.0, gain=0.85, time_constant=5.0, mdrr=10.0),
    )


@pytest.fixture
def pfr_snapshot() -> SystemSnapshot:
    return make_snapshot(pfr_fleet_units())


@pytest.fixture
def plain_snapshot() -> SystemSnapshot:
    """Single non-responding unit; good for pure swing-equation checks."""
    return make_snapshot(
        (make_unit("G1", rated_mw=800.0, output_mw=500.0, kinetic_energy=14016.0),),
        load_relief_factor=0.0,
    )


@pytest.fixture
def sdr_blocks() -> tuple[SdrBlock, ...]:
    return (
        SdrBlock(id="SDR1", amount_mw=50.0, trip_frequency=49.0, pickup_delay=0.0),
        SdrBlock(id="SDR2", amount_mw=30.0, trip_frequency=48.9, pickup_delay=0.2),
    )
