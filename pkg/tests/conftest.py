import os
import random
import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

SEED = int(os.environ.get("PTASYNTH_SEED", "20260808"))

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")

# model file -> properties: one safety G-form, one response form, one
# liveness F/U-form (some models carry extras)
CORPUS = {
    "gap.pta": ["G !inB", "G (inA -> F inB)", "true U inB"],
    "window.pta": ["G !work", "G (idle -> F work)", "F work"],
    "zeno.pta": ["G !inB", "G (inA -> F inB)", "F inB"],
    "counter.pta": ["G (inB -> c <= 0)", "G (inA -> F inB)", "true U c >= 2"],
    "handshake.pta": ["G !busy", "G (waiting -> F idle)", "F busy"],
    "branchy.pta": ["G !inB", "G (inA -> F inB)", "F inB"],
    "strict.pta": ["G !inB", "G (inA -> F inB)", "true U inB"],
    "staggered.pta": ["G !inB", "G (inA -> F inB)", "F inB"],
    "urgent.pta": ["G !inC", "G (inB -> F inC)", "F inC"],
    "traingate.pta": ["G !(Train1.Cross && Train2.Cross)",
                      "G (Train1.Appr -> F Train1.Cross)",
                      "F (Train1.Cross || Train2.Cross)"],
}


@pytest.fixture
def rng():
    return random.Random(SEED)


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def load_fixture(name: str):
    from ptasynth.model import load_model

    return load_model(fixture_path(name))
