import json
from fractions import Fraction

import pytest

from qsha import energy_model as em
from qsha.errors import AssumptionRequired, ContractViolation, FormatError


def test_ratio_exact_for_each_source():
    # 1 TWh = 1e9 kWh
    for twh in (80, 110, 91):
        rep = em.compare(em.EnergyProfile.from_table(twh))
        assert rep["consumption_ratio"].value == Fraction(twh * 10 ** 9, 25)
    assert em.compare(em.EnergyProfile.from_table(80))["consumption_ratio"].value == 3_200_000_000


def test_per_miner():
    rep = em.compare(em.EnergyProfile.from_table(80))
    assert rep["per_miner_energy"].value == 80
    assert rep["per_miner_energy"].unit == "MWh/year"
    assert rep["per_miner_co2"].value == Fraction(267, 10 ** 6)


def test_every_figure_tagged():
    rep = em.compare(em.EnergyProfile.from_table(110))
    for f in rep.figures:
        assert f.source.startswith(("Table 3", "derived:", "miner count", "user assumption"))
    assert rep["quantum_co2"].value is None
    assert "267" in rep["classical_network_co2"].note


def test_zero_quantum_gives_infinite_ratio():
    p = em.EnergyProfile.from_table(80)
    p = em.EnergyProfile(p.classical_network_twh_per_year, p.classical_co2_tons_per_year,
                         em.Tagged(Fraction(0), "user assumption"), p.miner_count)
    fig = em.compare(p)["consumption_ratio"]
    assert fig.value is None and fig.note.startswith("infinite")
    assert " inf " in fig.render()


def test_unknown_source():
    with pytest.raises(ContractViolation):
        em.EnergyProfile.from_table(100)


def test_tagged_requires_source():
    with pytest.raises(ContractViolation):
        em.Tagged(Fraction(1), "")
    with pytest.raises(ContractViolation):
        em.Tagged(Fraction(-1), "x")


def test_attribution_needs_assumption():
    with pytest.raises(AssumptionRequired):
        em.attribute_mining_energy(10, em.EnergyProfile.from_table(80))
    c, q = em.attribute_mining_energy(1000, em.EnergyProfile.from_table(80, per_hash_joules=0.5))
    assert c.value == 500
    assert q.value == Fraction(500) / 3_200_000_000
    assert c.source.startswith("user assumption")


def test_load_profile():
    text = json.dumps({"classical_network_twh_per_year": {"value": 120, "source": "my estimate"},
                       "per_hash_joules": {"value": "0.1", "source": "user assumption"}})
    p = em.load_profile(text)
    assert p.classical_network_twh_per_year.value == 120
    assert p.quantum_kwh_per_year.value == 25
    assert em.compare(p)["consumption_ratio"].value == Fraction(120 * 10 ** 9, 25)


@pytest.mark.parametrize("text", [
    "nope", "[]", '{"miner_count": 5}', '{"miner_count": {"value": 5}}',
    '{"miner_count": {"value": -5, "source": "x"}}', '{"bogus": {"value": 1, "source": "x"}}',
])
def test_load_profile_errors(text):
    with pytest.raises(FormatError):
        em.load_profile(text)


def test_report_serializes():
    rep = em.compare(em.EnergyProfile.from_table(80))
    d = rep.to_dict()
    json.dumps(d)
    assert {f["name"] for f in d["figures"]} >= {"consumption_ratio", "per_miner_energy"}
    assert len(rep.render().splitlines()) == len(rep.figures)
