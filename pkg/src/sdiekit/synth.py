"""Seeded synthetic event-report generator.

Real shutdown-event corpora are proprietary, so tests and experiments run
on generated reports: each event class has sentence skeletons that embed a
shutdown-mode phrase and at least one keyword phrase from the class's
vocabulary category, while non-event reports are built from distractor
sentences that contain no vocabulary phrase at all (except, with
``noise_rate`` probability, one stray phrase to emulate look-alike
reports).  Raw texts are salted with the usual export format junk so the
cleaning stage has something to do.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, EventRecord, RAW_LABELS
from .patterns import PatternVocabulary, default_vocabulary

# Vocabulary category that supplies each event class's {pattern} phrases.
CLASS_CATEGORY = {
    "ISOL": "ISOL_FLOW",
    "FLOW": "ISOL_FLOW",
    "LOCA": "LOCA",
    "LOAC": "LOAC",
    "LOOP": "LOOP",
    "SFP": "SFP",
}

DEFAULT_TEMPLATES: dict[str, list[str]] = {
    "ISOL": [
        "While the plant was in {mode}, a spurious {pattern} occurred and operators entered the abnormal lineup procedure.",
        "During {mode} the crew observed {pattern} on train B and dispatched an operator to verify breaker positions.",
        "With the unit in {mode}, {pattern} was received and shutdown cooling was interrupted for about twenty minutes.",
        "In {mode}, an inadvertent {pattern} signal isolated the letdown path until the logic card was replaced.",
    ],
    "FLOW": [
        "In {mode} the operating crew identified {pattern} caused by debris fouling of the service water strainer.",
        "While in {mode}, {pattern} led to reduced heat removal flow until the standby train was placed in service.",
        "During {mode}, throttling errors produced {pattern} and the cooldown rate dropped below the procedural band.",
        "With the unit in {mode}, gas binding of the suction piping caused {pattern} before venting restored flow.",
    ],
    "LOCA": [
        "With the unit in {mode}, {pattern} occurred when the nozzle dam seal deflated during maintenance.",
        "During {mode} an unexpected {pattern} lowered the refueling pool inventory before operators secured the lineup.",
        "While in {mode}, {pattern} was identified after the letdown orifice lineup diverted inventory to the sump.",
        "In {mode}, a mispositioned drain path caused {pattern} and inventory makeup was started promptly.",
    ],
    "LOAC": [
        "During {mode}, {pattern} de-energized the shutdown cooling equipment bus until the diesel restored power.",
        "With the unit in {mode}, a fault on the station service transformer caused {pattern} on the train A supply.",
        "While in {mode}, breaker maintenance resulted in {pattern} and the swing charger carried the battery loads.",
        "In {mode} the electrical crew reported {pattern} after a relay miscoordination tripped the supply feeder.",
    ],
    "LOOP": [
        "While the plant was in {mode}, a grid disturbance caused {pattern} and all emergency generators started and loaded.",
        "In {mode} the switchyard breakers opened on a lightning strike, resulting in {pattern} for both units.",
        "During {mode}, {pattern} occurred when the startup transformer differential relay actuated on a bus fault.",
        "With the unit in {mode}, severe weather caused {pattern} and offsite sources were restored within an hour.",
    ],
    "SFP": [
        "While in {mode}, {pattern} was lost for two hours when its heat exchanger outlet valve drifted shut.",
        "During {mode} the crew secured {pattern} for pump seal replacement and monitored pool temperature.",
        "With the unit in {mode}, {pattern} capability degraded after the skimmer surge tank low alarm was missed.",
    ],
}

# Distractor sentences for non-event reports; each one must vectorize to the
# zero vector against the default vocabulary (a test enforces this).
DEFAULT_DISTRACTORS: list[str] = [
    "Routine quarterly surveillance of the fire protection system was completed with no deficiencies noted.",
    "The maintenance crew replaced a worn packing gland on the chemical addition tank during the day shift.",
    "Security completed the monthly badge audit and updated the visitor access roster accordingly.",
    "A minor oil sheen near the turbine lube reservoir was cleaned up and the housekeeping report was updated.",
    "Instrument technicians recalibrated the feedwater flow transmitter per the standing calibration schedule.",
    "The shift manager reviewed the night orders and noted no outstanding operator workarounds.",
    "Chemistry sampled the condensate storage tank and results remained within administrative limits.",
    "A contractor badge reader in the admin building required a firmware update and was returned to service.",
    "The simulator training session covered annunciator response procedures for the licensed crew.",
    "Warehouse staff completed the annual inventory of spare relay cards without discrepancies.",
    "The environmental team collected weekly groundwater samples from the protected area wells.",
    "Planners revised the work order backlog and rescheduled two low priority valve repacking jobs.",
    "Document control issued the updated revision of the emergency plan telephone directory.",
    "The radiation protection staff posted revised survey maps for the auxiliary building corridors.",
    "Operations logged a routine swap of the running condensate booster unit for scheduled maintenance.",
    "Engineering completed a design change package review for obsolete panel indicating lamps.",
]

# Stray phrases sprinkled into noisy non-event reports; all are real
# vocabulary sub-patterns, so a noisy report stops vectorizing to zero.
NOISE_PHRASES: list[str] = [
    "trip",
    "SDC",
    "isolation",
    "closed",
    "RHR",
    "actuation",
    "water level",
    "vital bus",
]

# Non-event reports that legitimately talk about the same systems: routine
# maintenance and surveillance work.  These carry mode and keyword phrases
# like a real event report does, which is what makes stage-1 false
# positives (and therefore a populated stage-2 non-event class) possible.
LOOKALIKE_TEMPLATES: list[str] = [
    "During {mode} the crew performed planned preventive maintenance on the {pattern} equipment with no functional impact.",
    "Surveillance testing of the {pattern} instrumentation was completed satisfactorily while the unit remained in {mode}.",
    "A work order was written to inspect the {pattern} relay wiring during the upcoming {mode} window.",
    "Training records for {pattern} system operators were updated while the plant stayed in {mode}.",
    "The planning group walked down the {pattern} lineup in {mode} to scope the refurbishment package.",
]

FORMAT_JUNK: list[str] = ["_0x00D_", "***", "\\n", "\n"]


@dataclass
class SyntheticSpec:
    counts: dict[str, int]
    noise_rate: float = 0.0
    lookalike_rate: float = 0.0  # share of non-events drawn from lookalike templates
    format_junk_rate: float = 0.25
    seed: int = 0
    templates: dict[str, list[str]] = field(default_factory=lambda: dict(DEFAULT_TEMPLATES))
    distractors: list[str] = field(default_factory=lambda: list(DEFAULT_DISTRACTORS))

    def __post_init__(self) -> None:
        for label, count in self.counts.items():
            if label not in RAW_LABELS:
                raise ValueError(f"unknown class in counts: {label!r}")
            if count < 0:
                raise ValueError(f"negative count for {label}")
        if not any(self.counts.values()):
            raise ValueError("at least one class count must be positive")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ValueError("noise_rate must be in [0, 1)")
        if not 0.0 <= self.lookalike_rate <= 1.0:
            raise ValueError("lookalike_rate must be in [0, 1]")

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticSpec":
        kwargs = {"counts": dict(doc["counts"])}
        for key in (
            "noise_rate",
            "lookalike_rate",
            "format_junk_rate",
            "seed",
            "templates",
            "distractors",
        ):
            if key in doc:
                kwargs[key] = doc[key]
        return cls(**kwargs)


def _inject_junk(text: str, rng: np.random.Generator, rate: float) -> str:
    if rng.random() >= rate:
        return text
    words = text.split(" ")
    junk = FORMAT_JUNK[rng.integers(len(FORMAT_JUNK))]
    pos = int(rng.integers(1, len(words))) if len(words) > 1 else 0
    words.insert(pos, junk)
    out = " ".join(words)
    if rng.random() < 0.5:
        out = out + "\n"
    return out


def _pick(rng: np.random.Generator, items: list[str]) -> str:
    return items[int(rng.integers(len(items)))]


def generate_synthetic(
    spec: SyntheticSpec, vocabulary: PatternVocabulary | None = None
) -> Corpus:
    """Deterministically build a labeled corpus from a synthetic spec."""
    vocab = vocabulary or default_vocabulary()
    mode_phrases = [s.phrase for p in vocab.patterns if p.category == "SD_MODE" for s in p.sub_patterns]
    category_phrases: dict[str, list[str]] = {}
    for p in vocab.patterns:
        category_phrases.setdefault(p.category, []).extend(s.phrase for s in p.sub_patterns)

    rng = np.random.default_rng(spec.seed)
    events: list[EventRecord] = []
    serial = 0
    for label in RAW_LABELS:
        count = spec.counts.get(label, 0)
        if count == 0:
            continue
        if label == "NON_SDIE":
            if not spec.distractors:
                raise ValueError("empty template pool for NON_SDIE")
            all_phrases = [s.phrase for p in vocab.patterns for s in p.sub_patterns]
            for _ in range(count):
                serial += 1
                if spec.lookalike_rate and rng.random() < spec.lookalike_rate:
                    skeleton = _pick(rng, LOOKALIKE_TEMPLATES)
                    text = skeleton.format(
                        mode=_pick(rng, mode_phrases), pattern=_pick(rng, all_phrases)
                    )
                else:
                    n_sentences = 1 + int(rng.integers(2))
                    sentences = [_pick(rng, spec.distractors) for _ in range(n_sentences)]
                    if spec.noise_rate and rng.random() < spec.noise_rate:
                        stray = _pick(rng, NOISE_PHRASES)
                        words = sentences[0].split(" ")
                        words.insert(int(rng.integers(1, len(words))), stray)
                        sentences[0] = " ".join(words)
                    text = " ".join(sentences)
                text = _inject_junk(text, rng, spec.format_junk_rate)
                events.append(
                    EventRecord.from_text(
                        id=f"SYN-{serial:06d}", text=text, label=label, source="synthetic"
                    )
                )
            continue

        pool = spec.templates.get(label)
        if not pool:
            raise ValueError(f"empty template pool for {label}")
        phrases = category_phrases[CLASS_CATEGORY[label]]
        for _ in range(count):
            serial += 1
            skeleton = _pick(rng, pool)
            text = skeleton.format(mode=_pick(rng, mode_phrases), pattern=_pick(rng, phrases))
            text = _inject_junk(text, rng, spec.format_junk_rate)
            events.append(
                EventRecord.from_text(
                    id=f"SYN-{serial:06d}", text=text, label=label, source="synthetic"
                )
            )
    return Corpus(events)
