"""Speech-rate reverse correlation, scissor manipulation and duration planning."""

import json

from . import _core
from ._core import (
    Error,
    apply_scissor,
    apply_transform,
    flatten_pitch,
    holm,
    pitch_shift,
    read_wav,
    sample_transform,
    scissor_grid,
    scissor_template,
    split_ipa,
    classify_word,
    study3,
    time_stretch,
    write_wav,
)

__all__ = [
    "Error",
    "ExperimentService",
    "apply_scissor",
    "apply_transform",
    "chi_square_2x2",
    "classify_word",
    "flatten_pitch",
    "generate_batch",
    "holm",
    "kernel",
    "pitch_shift",
    "plan",
    "read_wav",
    "sample_transform",
    "scissor_grid",
    "scissor_template",
    "split_ipa",
    "study3",
    "time_stretch",
    "wer_report",
    "wilcoxon",
    "write_wav",
]


def plan(text, strategy="proposed", base_rate=0.75, stretch=1.6, ramp_items=6):
    return json.loads(_core.plan(text, strategy, base_rate, stretch, ramp_items))


def generate_batch(base, n, out_dir, seed=1, window_ms=100.0, render=True):
    return json.loads(_core.generate_batch(str(base), n, str(out_dir), seed, window_ms, render))


def kernel(features, classes, dimension="stretch", class_a="A", class_b="B"):
    return json.loads(_core.kernel(features, classes, dimension, class_a, class_b))


def wilcoxon(differences):
    return json.loads(_core.wilcoxon(differences))


def chi_square_2x2(a, b, c, d, yates=False):
    return json.loads(_core.chi_square_2x2(a, b, c, d, yates))


def wer_report(trials, stimuli, pairs):
    return json.loads(_core.wer_report(str(trials), str(stimuli), str(pairs)))


class ExperimentService:
    """In-process experiment service; the same state machine the HTTP server exposes."""

    def __init__(self, data_dir):
        self._svc = _core.ExperimentService(str(data_dir))

    def add_experiment(self, config_path):
        self._svc.add_experiment(str(config_path))

    def create_session(self, experiment_id, participant_id):
        return json.loads(self._svc.create_session(experiment_id, participant_id))

    def next_trial(self, session_id):
        return json.loads(self._svc.next_trial(session_id))

    def submit_response(self, session_id, body):
        return json.loads(self._svc.submit_response(session_id, json.dumps(body)))

    def export_log(self, experiment_id):
        return self._svc.export_log(experiment_id)
