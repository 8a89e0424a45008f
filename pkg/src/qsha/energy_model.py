"""Classical-versus-quantum mining energy comparison with tagged figures.

Every number leaving this module is a :class:`Figure` carrying the source
it came from: a published table row, a user assumption, or a derivation
naming its inputs.  Ratios are computed on exact fractions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from qsha.errors import AssumptionRequired, ContractViolation, FormatError

WH_PER_TWH = 10 ** 12
WH_PER_KWH = 10 ** 3
WH_PER_MWH = 10 ** 6
J_PER_WH = 3600

USER_ASSUMPTION = "user assumption"

# Published network consumption estimates (TWh/year), keyed by value.
CLASSICAL_SOURCES = {
    80: "Table 3 [31] Digiconomist 2021",
    110: "Table 3 [32] Harvard Business Review 2021",
    91: "Table 3 [33] Bloomberg Green 2021",
}
CO2_SOURCE = "Table 3 [31] Digiconomist 2021"
QUANTUM_SOURCE = "Table 3 [35][36]"
MINER_SOURCE = "miner count [34] Markets Insider 2021"
CO2_NOTE = ("reproduced verbatim as 267 tons/year; implausibly small against the network "
            "consumption figure, possibly megatonnes")


@dataclass(frozen=True)
class Figure:
    name: str
    value: Optional[Fraction]
    unit: str
    source: str
    note: str = ""

    def as_float(self) -> Optional[float]:
        return None if self.value is None else float(self.value)

    def to_dict(self) -> dict:
        d = {"name": self.name, "value": self.as_float(), "unit": self.unit,
             "source": self.source}
        if self.note:
            d["note"] = self.note
        return d

    def render(self) -> str:
        if self.value is None:
            text = "inf" if self.note.startswith("infinite") else "N/A"
        else:
            text = f"{float(self.value):.6g}"
        line = f"{self.name:<34} {text:>14} {self.unit:<16} [{self.source}]"
        return line + (f"  ({self.note})" if self.note else "")


@dataclass(frozen=True)
class Tagged:
    value: Fraction
    source: str

    def __post_init__(self):
        if not self.source:
            raise ContractViolation("every profile value needs a source tag")
        if self.value < 0:
            raise ContractViolation("energy magnitudes must be non-negative")


def _tag(value, source) -> Tagged:
    return Tagged(Fraction(str(value)), source)


@dataclass(frozen=True)
class EnergyProfile:
    classical_network_twh_per_year: Tagged
    classical_co2_tons_per_year: Tagged
    quantum_kwh_per_year: Tagged
    miner_count: Tagged
    per_hash_joules: Optional[Tagged] = None

    @classmethod
    def from_table(cls, classical_source: int = 80,
                   per_hash_joules: Optional[float] = None) -> "EnergyProfile":
        if classical_source not in CLASSICAL_SOURCES:
            raise ContractViolation(
                f"classical source must be one of {sorted(CLASSICAL_SOURCES)}, got {classical_source}")
        return cls(
            _tag(classical_source, CLASSICAL_SOURCES[classical_source]),
            _tag(267, CO2_SOURCE),
            _tag(25, QUANTUM_SOURCE),
            _tag(1_000_000, MINER_SOURCE),
            None if per_hash_joules is None else _tag(per_hash_joules, USER_ASSUMPTION),
        )

    def to_dict(self) -> dict:
        out = {}
        for name in ("classical_network_twh_per_year", "classical_co2_tons_per_year",
                     "quantum_kwh_per_year", "miner_count", "per_hash_joules"):
            t = getattr(self, name)
            out[name] = None if t is None else {"value": float(t.value), "source": t.source}
        return out


_PROFILE_FIELDS = ("classical_network_twh_per_year", "classical_co2_tons_per_year",
                   "quantum_kwh_per_year", "miner_count")


def load_profile(text: str) -> EnergyProfile:
    """Parse a JSON profile; every field is ``{"value": x, "source": "..."}``.

    Fields that are omitted fall back to the published table values.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"profile is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError("profile must be a JSON object")
    base = EnergyProfile.from_table(80)
    values = {}
    for name in _PROFILE_FIELDS + ("per_hash_joules",):
        entry = data.get(name)
        if entry is None:
            values[name] = getattr(base, name)
            continue
        if not isinstance(entry, dict) or "value" not in entry or not entry.get("source"):
            raise FormatError(f"{name} needs explicit 'value' and 'source' fields")
        try:
            values[name] = _tag(entry["value"], str(entry["source"]))
        except (ValueError, ContractViolation) as exc:
            raise FormatError(f"{name}: {exc}") from exc
    unknown = set(data) - set(values)
    if unknown:
        raise FormatError(f"unknown profile fields: {sorted(unknown)}")
    return EnergyProfile(**values)


@dataclass
class ComparisonReport:
    figures: List[Figure] = field(default_factory=list)
    profile: Optional[EnergyProfile] = None

    def __getitem__(self, name: str) -> Figure:
        for f in self.figures:
            if f.name == name:
                return f
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"profile": self.profile.to_dict() if self.profile else None,
                "figures": [f.to_dict() for f in self.figures]}

    def render(self) -> str:
        return "\n".join(f.render() for f in self.figures)


def compare(profile: EnergyProfile) -> ComparisonReport:
    classical = profile.classical_network_twh_per_year
    quantum = profile.quantum_kwh_per_year
    miners = profile.miner_count
    co2 = profile.classical_co2_tons_per_year
    classical_wh = classical.value * WH_PER_TWH
    quantum_wh = quantum.value * WH_PER_KWH
    figures = [
        Figure("classical_network_energy", classical.value, "TWh/year", classical.source),
        Figure("quantum_machine_energy", quantum.value, "kWh/year", quantum.source),
        Figure("classical_network_co2", co2.value, "tons/year", co2.source, CO2_NOTE),
        Figure("quantum_co2", None, "tons/year", quantum.source, "not reported"),
        Figure("miner_count", miners.value, "miners", miners.source),
    ]
    derived = f"derived: {classical.source} / {quantum.source}"
    if quantum_wh == 0:
        figures.append(Figure("consumption_ratio", None, "classical/quantum", derived,
                              "infinite: quantum consumption is zero"))
    else:
        figures.append(Figure("consumption_ratio", classical_wh / quantum_wh,
                              "classical/quantum", derived))
    if miners.value == 0:
        raise ContractViolation("miner count must be positive")
    per_miner = f"derived: {classical.source} / {miners.source}"
    figures.append(Figure("per_miner_energy", classical_wh / miners.value / WH_PER_MWH,
                          "MWh/year", per_miner))
    figures.append(Figure("per_miner_co2", co2.value / miners.value, "tons/year",
                          f"derived: {co2.source} / {miners.source}", CO2_NOTE))
    return ComparisonReport(figures, profile)


def attribute_mining_energy(attempts: int, profile: EnergyProfile):
    """Energy of ``attempts`` hash evaluations on classical and quantum hardware.

    The classical figure needs a per-hash energy, which no published row
    provides; the quantum figure scales it by the profile's consumption ratio.
    Returns ``(classical_figure, quantum_figure)``.
    """
    if attempts < 0:
        raise ContractViolation("attempts must be non-negative")
    if profile.per_hash_joules is None:
        raise AssumptionRequired(
            "per-hash energy is not published; supply per_hash_joules as an explicit assumption")
    per_hash = profile.per_hash_joules
    classical_j = per_hash.value * attempts
    classical_wh = profile.classical_network_twh_per_year.value * WH_PER_TWH
    quantum_wh = profile.quantum_kwh_per_year.value * WH_PER_KWH
    if classical_wh == 0:
        raise ContractViolation("classical consumption must be positive to scale per-hash energy")
    quantum_j = classical_j * quantum_wh / classical_wh
    src_c = f"{per_hash.source} x attempts"
    src_q = (f"derived: {per_hash.source} x {profile.quantum_kwh_per_year.source}"
             f" / {profile.classical_network_twh_per_year.source}")
    note = "assumption: per-hash energy supplied by user"
    return (Figure("classical_mining_energy", classical_j, "J", src_c, note),
            Figure("quantum_mining_energy", quantum_j, "J", src_q, note))
