"""Scenario configuration: a strict, key-explicit JSON format.

Unknown keys fail fast so a typo never silently runs a different election.
Omitted keys fall back to documented defaults; the four shape fields
(voters, wardens, candidates, seed) must always be present.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .contract import ElectionTimeline
from .crypto import DEFAULT_GROUP, DEFAULT_TOKEN_BITS, TINY_GROUP, GroupParams, derive_seed
from .encoding import hex_to_int, int_to_hex
from .ledger import DEFAULT_GAS_PRICE_WEI, DEFAULT_GAS_TABLE

DEFAULT_TIMELINE = ElectionTimeline(
    candidacy_opens=1000,
    candidacy_closes=2000,
    distribution_opens=2000,
    distribution_closes=3000,
    casting_opens=4000,
    casting_closes=5000,
    tally_opens=6000,
)

DEFAULT_SECURITY_AMOUNT = 5 * 10**15
DEFAULT_REWARD = 2 * 10**15
DEFAULT_DEPOSIT_EXCESS = 1
DEFAULT_SAMPLE_MESSAGE = 2

ADVERSARY_STRATEGIES = ("token-guessing", "double-vote")

_KNOWN_KEYS = {
    "voters",
    "wardens",
    "candidates",
    "seed",
    "group",
    "timeline",
    "token_bits",
    "security_amount",
    "reward",
    "deposit_excess",
    "gas_table",
    "gas_price_wei",
    "key_check_rounds",
    "sample_message",
    "warden_behaviors",
    "adversaries",
}

_REQUIRED_KEYS = {"voters", "wardens", "candidates", "seed"}


class ConfigError(ValueError):
    """A scenario config that must not be run."""


@dataclass(frozen=True)
class AdversarySpec:
    strategy: str
    attempts: int


@dataclass(frozen=True)
class WardenBehavior:
    kind: str  # honest | abort | leak
    leak_time: Optional[int] = None


@dataclass
class ScenarioConfig:
    voters: int
    wardens: int
    candidates: int
    seed: int
    group: GroupParams = TINY_GROUP
    group_name: str = "tiny"
    timeline: ElectionTimeline = DEFAULT_TIMELINE
    token_bits: int = DEFAULT_TOKEN_BITS
    security_amount: int = DEFAULT_SECURITY_AMOUNT
    reward: int = DEFAULT_REWARD
    deposit_excess: int = DEFAULT_DEPOSIT_EXCESS
    gas_table: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_GAS_TABLE))
    gas_price_wei: int = DEFAULT_GAS_PRICE_WEI
    key_check_rounds: int = 1
    sample_message: int = DEFAULT_SAMPLE_MESSAGE
    warden_behaviors: List[WardenBehavior] = field(default_factory=list)
    adversaries: List[AdversarySpec] = field(default_factory=list)

    def validate(self) -> None:
        if self.voters < 0:
            raise ConfigError("voters must be non-negative")
        if self.wardens < 1:
            raise ConfigError("at least one warden is required")
        if self.candidates < 1:
            raise ConfigError("at least one candidate is required")
        try:
            self.group.validate()
            self.timeline.validate()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        # The contract only exists from the distribution close onward, and
        # deposits close when casting opens: the gap between them hosts the
        # whole warden setup phase.
        if self.timeline.distribution_closes >= self.timeline.casting_opens:
            raise ConfigError("timeline leaves no gap between deployment and casting")
        # Key submission happens strictly between casting close and the
        # tally opening, so that interval needs at least one interior tick.
        if self.timeline.tally_opens - self.timeline.casting_closes < 2:
            raise ConfigError("timeline leaves no room for decryption key submission")
        if self.candidates > self.group.p - 1:
            raise ConfigError("more candidates than the group can encode")
        if self.token_bits < 1:
            raise ConfigError("token_bits must be at least 1")
        if self.security_amount < 0 or self.reward < 0:
            raise ConfigError("security_amount and reward must be non-negative")
        if self.deposit_excess < 1:
            raise ConfigError("deposit_excess must be at least 1 wei")
        if self.gas_price_wei < 0:
            raise ConfigError("gas_price_wei must be non-negative")
        if self.key_check_rounds < 1:
            raise ConfigError("key_check_rounds must be at least 1")
        if not 1 <= self.sample_message <= self.group.p - 1:
            raise ConfigError("sample_message outside the group's message space")
        for method, charge in self.gas_table.items():
            if not isinstance(charge, int) or charge < 0:
                raise ConfigError(f"gas table entry {method} must be a non-negative int")
        if len(self.warden_behaviors) != self.wardens:
            raise ConfigError("warden_behaviors length must equal wardens")
        for behavior in self.warden_behaviors:
            if behavior.kind not in ("honest", "abort", "leak"):
                raise ConfigError(f"unknown warden behavior {behavior.kind!r}")
            if behavior.kind == "leak":
                tl = self.timeline
                if behavior.leak_time is None or not (
                    tl.casting_opens <= behavior.leak_time < tl.casting_closes
                ):
                    raise ConfigError("leak time must fall inside the casting window")
        for spec in self.adversaries:
            if spec.strategy not in ADVERSARY_STRATEGIES:
                raise ConfigError(f"unknown adversary strategy {spec.strategy!r}")
            if spec.attempts < 1:
                raise ConfigError("adversary attempts must be at least 1")

    # ------------------------------------------------------------------

    def key_check_messages(self) -> List[int]:
        """The plaintexts used to verify submitted decryption keys.

        The first is the configured sample message; the rest are derived
        from the seed so every run agrees on them.
        """
        messages = [self.sample_message]
        for i in range(1, self.key_check_rounds):
            messages.append(1 + derive_seed("key-check-message", self.seed, i) % (self.group.p - 1))
        return messages

    def to_dict(self) -> Dict[str, object]:
        return {
            "voters": self.voters,
            "wardens": self.wardens,
            "candidates": self.candidates,
            "seed": self.seed,
            "group": (
                self.group_name
                if self.group_name in ("tiny", "default")
                else {"p": int_to_hex(self.group.p), "g": int_to_hex(self.group.g)}
            ),
            "timeline": self.timeline.to_dict(),
            "token_bits": self.token_bits,
            "security_amount": self.security_amount,
            "reward": self.reward,
            "deposit_excess": self.deposit_excess,
            "gas_table": dict(self.gas_table),
            "gas_price_wei": self.gas_price_wei,
            "key_check_rounds": self.key_check_rounds,
            "sample_message": self.sample_message,
            "warden_behaviors": [
                b.kind if b.kind != "leak" else f"leak@{b.leak_time}"
                for b in self.warden_behaviors
            ],
            "adversaries": [
                {"strategy": a.strategy, "attempts": a.attempts} for a in self.adversaries
            ],
        }


def _parse_group(value) -> Tuple[GroupParams, str]:
    if value == "tiny":
        return TINY_GROUP, "tiny"
    if value == "default":
        return DEFAULT_GROUP, "default"
    if isinstance(value, dict):
        unknown = set(value) - {"p", "g"}
        if unknown:
            raise ConfigError(f"unknown group keys: {sorted(unknown)}")
        try:
            return GroupParams(p=hex_to_int(value["p"]), g=hex_to_int(value["g"])), "custom"
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad group parameters: {exc}") from None
    raise ConfigError(f"group must be 'tiny', 'default', or {{p, g}}, got {value!r}")


def _parse_behavior(text) -> WardenBehavior:
    if not isinstance(text, str):
        raise ConfigError(f"warden behavior must be a string, got {text!r}")
    if text in ("honest", "abort"):
        return WardenBehavior(kind=text)
    if text == "leak":
        return WardenBehavior(kind="leak", leak_time=None)
    if text.startswith("leak@"):
        try:
            return WardenBehavior(kind="leak", leak_time=int(text[5:]))
        except ValueError:
            raise ConfigError(f"bad leak time in {text!r}") from None
    raise ConfigError(f"unknown warden behavior {text!r}")


def parse_config(data: Dict[str, object]) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from parsed JSON."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = _REQUIRED_KEYS - data.keys()
    if missing:
        raise ConfigError(f"missing required config keys: {sorted(missing)}")

    for key in ("voters", "wardens", "candidates", "seed"):
        if not isinstance(data[key], int) or isinstance(data[key], bool):
            raise ConfigError(f"{key} must be an integer")

    group, group_name = _parse_group(data.get("group", "tiny"))

    timeline = DEFAULT_TIMELINE
    if "timeline" in data:
        try:
            timeline = ElectionTimeline.from_dict(data["timeline"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad timeline: {exc}") from None

    gas_table = dict(DEFAULT_GAS_TABLE)
    if "gas_table" in data:
        overrides = data["gas_table"]
        if not isinstance(overrides, dict):
            raise ConfigError("gas_table must be an object")
        unknown_methods = set(overrides) - set(DEFAULT_GAS_TABLE)
        if unknown_methods:
            raise ConfigError(f"gas_table names unknown methods: {sorted(unknown_methods)}")
        gas_table.update(overrides)

    behaviors_raw = data.get("warden_behaviors", ["honest"] * data["wardens"])
    if not isinstance(behaviors_raw, list):
        raise ConfigError("warden_behaviors must be a list")
    behaviors = [_parse_behavior(b) for b in behaviors_raw]
    midpoint = (timeline.casting_opens + timeline.casting_closes) // 2
    behaviors = [
        WardenBehavior(kind="leak", leak_time=midpoint)
        if b.kind == "leak" and b.leak_time is None
        else b
        for b in behaviors
    ]

    adversaries_raw = data.get("adversaries", [])
    if not isinstance(adversaries_raw, list):
        raise ConfigError("adversaries must be a list")
    adversaries = []
    for spec in adversaries_raw:
        if not isinstance(spec, dict) or set(spec) - {"strategy", "attempts"}:
            raise ConfigError(f"bad adversary spec: {spec!r}")
        if "strategy" not in spec:
            raise ConfigError("adversary spec needs a strategy")
        attempts = spec.get("attempts", 1)
        if not isinstance(attempts, int) or isinstance(attempts, bool):
            raise ConfigError("adversary attempts must be an integer")
        adversaries.append(AdversarySpec(strategy=spec["strategy"], attempts=attempts))

    config = ScenarioConfig(
        voters=data["voters"],
        wardens=data["wardens"],
        candidates=data["candidates"],
        seed=data["seed"],
        group=group,
        group_name=group_name,
        timeline=timeline,
        token_bits=data.get("token_bits", DEFAULT_TOKEN_BITS),
        security_amount=data.get("security_amount", DEFAULT_SECURITY_AMOUNT),
        reward=data.get("reward", DEFAULT_REWARD),
        deposit_excess=data.get("deposit_excess", DEFAULT_DEPOSIT_EXCESS),
        gas_table=gas_table,
        gas_price_wei=data.get("gas_price_wei", DEFAULT_GAS_PRICE_WEI),
        key_check_rounds=data.get("key_check_rounds", 1),
        sample_message=data.get("sample_message", DEFAULT_SAMPLE_MESSAGE),
        warden_behaviors=behaviors,
        adversaries=adversaries,
    )
    config.validate()
    return config


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(data)
