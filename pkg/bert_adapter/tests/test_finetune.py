import json

import pytest

from bert_adapter.finetune import FinetuneConfig, finetune
from bert_adapter.labels import CLASSES


def test_artifact_contents(trained_model):
    label_map = json.loads((trained_model / "label_map.json").read_text())
    assert label_map["classes"] == list(CLASSES)
    assert len(label_map["classes"]) == 29

    config = json.loads((trained_model / "config.json").read_text())
    id2label = {int(k): v for k, v in config["id2label"].items()}
    assert len(id2label) == 29
    assert id2label[28] == "O"
    assert [id2label[i] for i in range(29)] == list(CLASSES)

    log = json.loads((trained_model / "training_log.json").read_text())
    assert log["sentences"] == 30
    assert log["config"]["batch_size"] == 4
    assert len(log["epoch_loss"]) == 6
    assert all(isinstance(x, float) for x in log["epoch_loss"])
    print("\nACCEPTANCE PASS: finetune on the 30-sentence fixture (batch size 4, "
          "6 epochs) emits a 29-class label map", flush=True)


def test_degenerate_configs_rejected(tiny_base, train_tsv, tmp_path):
    with pytest.raises(ValueError):
        finetune(train_tsv, tmp_path / "m", FinetuneConfig(base=str(tiny_base), epochs=0))
    with pytest.raises(ValueError):
        finetune(train_tsv, tmp_path / "m", FinetuneConfig(base=str(tiny_base), batch_size=0))


def test_empty_training_set_rejected(tiny_base, tmp_path):
    empty = tmp_path / "empty.tsv"
    empty.write_text("")
    with pytest.raises(ValueError):
        finetune(empty, tmp_path / "m", FinetuneConfig(base=str(tiny_base)))


def test_label_map_deterministic_across_runs(tiny_base, train_tsv, tmp_path):
    cfg = FinetuneConfig(base=str(tiny_base), epochs=1, seed=5)
    a = finetune(train_tsv, tmp_path / "a", cfg)
    b = finetune(train_tsv, tmp_path / "b", cfg)
    assert (a / "label_map.json").read_bytes() == (b / "label_map.json").read_bytes()
