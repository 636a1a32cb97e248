from __future__ import annotations

import sys
from pathlib import Path

import pytest

EMBEDDER_ROOT = Path(__file__).resolve().parents[1]
if str(EMBEDDER_ROOT) not in sys.path:
    sys.path.insert(0, str(EMBEDDER_ROOT))


@pytest.fixture(scope="session")
def tiny_model(tmp_path_factory) -> Path:
    """A local 768-dim random-weight encoder; no network involved."""
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    model_dir = tmp_path_factory.mktemp("model") / "tiny-encoder"
    model_dir.mkdir()
    vocab = [
        "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
        "the", "a", "hospital", "fake", "report", "russian",
        "attack", "was", "on", "grain", "export", ".",
    ]
    (model_dir / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=768,
        num_hidden_layers=1,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(0)
    BertModel(config).save_pretrained(model_dir)
    BertTokenizer(str(model_dir / "vocab.txt"), do_lower_case=True).save_pretrained(model_dir)
    return model_dir


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    """Print one PASS/FAIL line per embedder contract criterion."""
    module = sys.modules.get("test_embed")
    results = getattr(module, "CONTRACT_RESULTS", None)
    if not results:
        return
    terminalreporter.section("embedder contract")
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f" — {detail}"
        terminalreporter.write_line(line)
