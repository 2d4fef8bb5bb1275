"""A reduced run of the small-sample comparison: the band-power feature MLP
against the tri-stream model trained on raw trials, same budget.

The full comparison (5 subjects, 5 seeds) lives in the acceptance suite;
this one uses 2 subjects and one seed and takes about a minute.

Run: python3 demos/small_sample.py
"""

from emofeat.pipeline.study import StudyConfig, run_study

result = run_study(StudyConfig(subjects=2, seeds=(0,)), log=print)
for key, value in result.summary().items():
    print(f"{key:>14}: {value:.3f}")
