from __future__ import annotations

import os
from pathlib import Path

import pytest

# A local 768-wide stub encoder stands in for the base model so the suite
# runs offline; any hub model name or local checkpoint works the same way
# through --model.


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> Path:
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    d = tmp_path_factory.mktemp("tiny-encoder")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab += list("abcdefghijklmnopqrstuvwxyz0123456789_-%/.")
    vocab += ["##" + c for c in "abcdefghijklmnopqrstuvwxyz0123456789_-%/."]
    (d / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=768,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=256,
        max_position_embeddings=64,
    )
    torch.manual_seed(1234)  # pinned weights stand in for a pinned revision
    model = BertModel(config)
    model.save_pretrained(d)
    BertTokenizer.from_pretrained(str(d)).save_pretrained(d)
    return d


@pytest.fixture
def nations_like_triples(tmp_path) -> Path:
    # small two-relation corpus in the shape of the country benchmarks
    heads = ["brazil", "burma", "china", "cuba", "egypt", "india", "usa", "ussr"]
    rels = ["exports3", "embassy", "treaties", "aidenemy"]
    lines = []
    for i, h in enumerate(heads):
        for j, r in enumerate(rels):
            t = heads[(i + j + 1) % len(heads)]
            lines.append(f"{h}\t{r}\t{t}")
    path = tmp_path / "train.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def real_nations_paths() -> list[Path] | None:
    roots = []
    env = os.environ.get("KGCSG_DATA")
    if env:
        roots.append(Path(env))
    roots.append(Path(__file__).resolve().parents[2] / "tests" / "data")
    for root in roots:
        d = root / "nations"
        if d.is_dir():
            paths = [d / f"{s}.txt" for s in ("train", "valid", "test")]
            found = [p for p in paths if p.is_file()]
            if found:
                return found
    return None
