"""Extract EEG, audio and vision feature vectors from synthetic inputs.

Run: python3 demos/features_tour.py
"""

import numpy as np

from emofeat import Rng, extract_audio_features, extract_eeg_features, extract_vision_features
from emofeat.eeg import BANDS, feature_index
from emofeat.pipeline.synth import EegSynthParams, subject_trials

# one synthetic subject; class k boosts the k-th band
trials = list(subject_trials("eeg", 0, 50, seed=7, eeg_params=EegSynthParams()))
feats = np.stack([extract_eeg_features(x) for _, x in trials])
labels = np.array([y for y, _ in trials])
print(f"EEG features: {feats.shape[1]} dims per trial")
for k, band in enumerate(BANDS):
    cols = [feature_index("power", c, k) for c in range(30)]
    mine = feats[labels == k][:, cols].mean()
    rest = feats[labels != k][:, cols].mean()
    print(f"  {band.name:>5} power: class {k} {mine:7.3f}  others {rest:7.3f}")

_, audio = next(subject_trials("audio", 0, 1, seed=3))
a = extract_audio_features(audio)
print(f"audio features: {a.size} dims; mean MFCC c0 {a[0]:.2f}, strongest chroma bin {np.argmax(a[80:92])}")

# a sequence whose embedding drifts linearly: the delta half recovers the step
step = Rng(0).normal(size=64)
frames = np.arange(25)[:, None] * step + Rng(1).normal(size=64)
v = extract_vision_features(frames)
print(f"vision features: {v.size} dims; delta half equals the drift step: {np.allclose(v[64:], step)}")
