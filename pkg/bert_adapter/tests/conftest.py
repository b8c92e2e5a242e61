import os
import subprocess
import sys
from pathlib import Path

import pytest

# serving and fine-tuning must never reach for the network in tests
os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

HERE = Path(__file__).parent
TRAIN_TSV = HERE / "data" / "training_30.tsv"
MAKE_TINY = HERE.parent / "scripts" / "make_tiny_base.py"


@pytest.fixture(scope="session")
def train_tsv() -> Path:
    return TRAIN_TSV


@pytest.fixture(scope="session")
def tiny_base(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("tiny_base")
    subprocess.run(
        [sys.executable, str(MAKE_TINY), "--out", str(out), "--train", str(TRAIN_TSV)],
        check=True,
        capture_output=True,
    )
    return out


@pytest.fixture(scope="session")
def trained_model(tiny_base, tmp_path_factory) -> Path:
    from bert_adapter.finetune import FinetuneConfig, finetune

    out = tmp_path_factory.mktemp("model")
    return finetune(
        TRAIN_TSV, out, FinetuneConfig(base=str(tiny_base), batch_size=4, epochs=6, seed=0)
    )
