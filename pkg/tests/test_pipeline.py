"""Parsed documents through build_problem/optimize, covering every element."""

import pytest

from besched.errors import InputError
from besched.pipeline import build_problem, optimize
from besched.solver import SolveOptions
from besched.xmlio import parse_configuration, parse_situation

PLANT_CONFIG = """<BuildingConfiguration xmlns="http://www.fokus.fraunhofer.de/WaveSave"
    id="PlantScenario" powerUnit="kW" energyUnit="kWh" priceUnit="ct" energyPriceUnit="ct/kWh">
  <Usage id="usage" maxElectricPowerUse="32.0" maxHeatingPowerUse="32.0"
      maxCoolingPowerUse="0.0"/>
  <Grid id="grid" maxFeedInPower="5.0" maxSupplyPower="32.0"/>
  <PV id="pv" curtailable="true"/>
  <Battery id="battery" minEnergyLevel="0" maxEnergyLevel="4.0" lossPerHourFactor="0.0"
      maxChargingPower="2.0" maxDischargingPower="2.0" chargeEfficiency="0.95"
      dischargeEfficiency="0.95"/>
  <Converter id="boiler" inputCarrier="primary" outputCarrier="heat" efficiency="0.9"
      maxInputPower="10.0"/>
  <FcCHP id="plant" thermalEfficiency="0.5" electricEfficiency="0.3"
      maxThermalPower="2.0" minThermalPower="1.0" initThermalPower="0.5"
      startUpThermalPower="1.5" minOnTimeInHours="2" maxOnTimeInHours="10"
      minOffTimeInHours="2" initDurationInHours="1" startUpDurationInHours="2"
      shutDownDurationInHours="1" warmUpSupportingValues="1 2 2 3"
      standByElectricPower="0.1" warmUpElectricPower="0.2"
      coldStartElectricPower="0.3" addShutDownElectricPower="0.4"
      warmUpPrimaryPower="1.0" coldStartPrimaryPower="1.0"
      maxThermalPowerGradientPerHour="5.0" coldStartThresholdUnits="2"
      switchOnCost="1.0" warmUpCostPerUnit="0.2"/>
</BuildingConfiguration>
"""

PLANT_SITUATION = """<BuildingSituation xmlns="http://www.fokus.fraunhofer.de/WaveSave"
    id="PlantScenario" nbsOfTimeUnits="8" hoursPerTimeUnit="1.0">
  <Usage id="usage" maxInitialHeatingEnergy="0.0" maxInitialCoolingEnergy="0.0">
    <ElectricPowerUsage fileName="plant.csv" dataSetPath="/Elec"/>
    <HotWaterPowerUsage fileName="plant.csv" dataSetPath="/Water"/>
  </Usage>
  <Grid id="grid">
    <ElectricEnergyPrice fileName="plant.csv" dataSetPath="/Price"/>
    <ElectricEnergyRefund fileName="plant.csv" dataSetPath="/Refund"/>
  </Grid>
  <PV id="pv">
    <PredictedPowerOutput fileName="plant.csv" dataSetPath="/PV"/>
  </PV>
  <Battery id="battery" initialEnergyLevel="1.0"/>
  <Converter id="boiler">
    <PrimaryEnergyPrice fileName="plant.csv" dataSetPath="/Gas"/>
  </Converter>
  <FcCHP id="plant" isOnAtBegin="false" lastStartStopChangeTimeUnit="0"
      lastStartTimeUnit="0" lastWarmUpDurationUnits="1">
    <PrimaryEnergyPrice fileName="plant.csv" dataSetPath="/Gas"/>
  </FcCHP>
</BuildingSituation>
"""


def _plant_inputs(tmp_path):
    rows = ["Elec,Water,Price,Refund,PV,Gas"]
    for i in range(8):
        pv = 1.0 if 2 <= i <= 5 else 0.0
        rows.append(f"0.5,1.0,25.0,5.0,{pv},6.0")
    (tmp_path / "plant.csv").write_text("\n".join(rows) + "\n")
    config = parse_configuration(PLANT_CONFIG)
    situation = parse_situation(PLANT_SITUATION, config)
    return config, situation


def test_every_element_builds_and_registers_series(tmp_path):
    config, situation = _plant_inputs(tmp_path)
    problem = build_problem(config, situation, base_dir=tmp_path)
    names = [n for n, _ in problem.ledger.states]
    for expected in (
        "electricInputPower_usage", "thermalInputPower_usage",
        "electricOutputPower_grid", "electricOutputPower_pv",
        "electricEnergyLevel_battery", "thermalOutputPower_boiler",
        "primaryInputPower_boiler", "thermalOutputPower_plant",
        "on_plant", "warmUp_plant", "production_plant",
    ):
        assert expected in names, expected
    # balances exist for both active carriers
    tags = {c.tag for c in problem.model.constraints}
    assert "balance.electric.i=1" in tags and "balance.heat.i=8" in tags


def test_optimize_solves_and_balances_hold(tmp_path):
    config, situation = _plant_inputs(tmp_path)
    problem, solution, schedule = optimize(config, situation, base_dir=tmp_path,
                                           options=SolveOptions())
    assert solution.status == "optimal"
    assert schedule is not None
    values = solution.values
    for con in problem.model.constraints:
        if not con.tag.startswith("balance."):
            continue
        act = sum(c * values[problem.model.vars[vid].name]
                  for vid, c in con.terms.items())
        assert abs(act - con.rhs) <= 1e-6, con.tag
    assert len(schedule.series["on_plant"]) == 8


def test_nonzero_initial_heating_energy_rejected(tmp_path):
    config, situation = _plant_inputs(tmp_path)
    situation.by_id["usage"].attrs["maxInitialHeatingEnergy"] = 1.0
    with pytest.raises(InputError, match="maxInitialHeatingEnergy"):
        build_problem(config, situation, base_dir=tmp_path)


def test_component_without_situation_entry_rejected(tmp_path):
    config, situation = _plant_inputs(tmp_path)
    situation.components = [c for c in situation.components if c.id != "battery"]
    situation.__post_init__()
    with pytest.raises(InputError, match="battery"):
        build_problem(config, situation, base_dir=tmp_path)
