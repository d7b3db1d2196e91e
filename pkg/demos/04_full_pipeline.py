#!/usr/bin/env python3
"""End-to-end run: synthetic corpus -> prescreen -> refined dataset ->
stage-2 cross-validation -> reports, all from one seeded config.

Run: python demos/04_full_pipeline.py
"""

import json
import tempfile
from pathlib import Path

from sdiekit.corpus import write_jsonl
from sdiekit.pipeline import PipelineConfig, run_pipeline
from sdiekit.synth import SyntheticSpec, generate_synthetic

workdir = Path(tempfile.mkdtemp(prefix="sdiekit-demo-"))
print(f"working in {workdir}\n")

spec = SyntheticSpec(
    counts={"ISOL": 15, "FLOW": 15, "LOCA": 8, "LOAC": 30, "LOOP": 25, "SFP": 6,
            "NON_SDIE": 1100},
    noise_rate=0.04,
    lookalike_rate=0.06,
    seed=9,
)
corpus_path = workdir / "corpus.jsonl"
corpus_path.write_text(write_jsonl(generate_synthetic(spec)), encoding="utf-8")

config = PipelineConfig.from_dict({
    "corpus": str(corpus_path),
    "output_dir": str(workdir / "run"),
    "seed": 9,
    "stage2": {"cv_folds": 3, "encoder": {"dim": 32, "buckets": 8192}},
})
result = run_pipeline(config)

print("run stats:")
print(json.dumps(result.stats, indent=2, sort_keys=True))
print("\nartifacts:")
for path in sorted(result.output_dir.iterdir()):
    print(f"  {path.name}  ({path.stat().st_size} bytes)")

print("\n" + (result.output_dir / "prescreen_report.txt").read_text())
print((result.output_dir / "stage2_report.txt").read_text())
