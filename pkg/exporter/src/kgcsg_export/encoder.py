"""Batched transformer encoding of token strings into fixed vectors."""

from __future__ import annotations

import logging
from dataclasses import dataclass

log = logging.getLogger("kgcsg_export")


class ModelError(Exception):
    """Encoder could not be loaded or run (exit code 3)."""


@dataclass
class Encoder:
    tokenizer: object
    model: object
    hidden_size: int
    max_length: int


def load_encoder(model_name: str) -> Encoder:
    """Load tokenizer and model (local path or hub name), inference mode."""
    try:
        import torch
        from transformers import AutoModel, AutoTokenizer
    except ImportError as e:  # pragma: no cover - deps are declared
        raise ModelError(f"transformers/torch unavailable: {e}") from None
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_name)
        model = AutoModel.from_pretrained(model_name)
    except Exception as e:
        raise ModelError(f"cannot load encoder '{model_name}': {e}") from None
    model.eval()
    # single-threaded inference keeps repeated exports byte-stable
    torch.set_num_threads(1)
    hidden = int(model.config.hidden_size)
    max_length = int(getattr(model.config, "max_position_embeddings", 512))
    return Encoder(
        tokenizer=tokenizer, model=model, hidden_size=hidden, max_length=max_length
    )


def encode_texts(
    encoder: Encoder, texts: list[str], batch_size: int, pooling: str
) -> list[list[float]]:
    """One vector per input string: mean over final-layer states of real
    (attention-masked) positions, or the first ([CLS]) position."""
    if pooling not in ("mean", "cls"):
        raise ModelError(f"unknown pooling '{pooling}'")
    import torch

    vectors: list[list[float]] = []
    with torch.no_grad():
        for start in range(0, len(texts), batch_size):
            batch = texts[start : start + batch_size]
            enc = encoder.tokenizer(
                batch,
                return_tensors="pt",
                padding=True,
                truncation=True,
                max_length=encoder.max_length,
            )
            states = encoder.model(**enc).last_hidden_state
            if pooling == "cls":
                pooled = states[:, 0, :]
            else:
                mask = enc["attention_mask"].unsqueeze(-1).to(states.dtype)
                pooled = (states * mask).sum(dim=1) / mask.sum(dim=1)
            vectors.extend(row.tolist() for row in pooled)
            log.debug("encoded %d/%d tokens", min(start + batch_size, len(texts)), len(texts))
    return vectors
