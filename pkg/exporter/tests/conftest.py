import json
import socket
from pathlib import Path

import pytest

SENTENCES = [
    ("The ferry crosses the bay each morning.", "A ferry crosses the bay every morning.", 4.6),
    ("He plays chess on Sundays.", "He never touches board games.", 1.2),
    ("The recipe needs two eggs.", "Two eggs are required for the recipe.", 4.9),
    ("Snow covered the mountain pass.", "The stock market closed higher today.", 0.2),
    ("She sketched the old lighthouse.", "She drew the old lighthouse.", 4.4),
    ("The committee postponed the vote.", "The vote was delayed by the committee.", 4.7),
    ("A dog barked at the mail carrier.", "The cat ignored the mail carrier.", 2.1),
    ("Rain flooded the parking lot.", "The parking lot was flooded by rain.", 4.8),
    ("He tuned the violin before the concert.", "He repaired a bicycle tire.", 0.8),
    ("The bakery sells sourdough on Fridays.", "Sourdough is sold at the bakery on Fridays.", 4.9),
    ("Students lined up for the bus.", "The queue for the bus was full of students.", 4.2),
    ("The engine refused to start.", "The car would not start.", 3.9),
]


@pytest.fixture()
def benchmark_file(tmp_path) -> Path:
    path = tmp_path / "bench.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for i, (s1, s2, score) in enumerate(SENTENCES):
            fh.write(
                json.dumps(
                    {"id": f"local-{i:03d}", "sentence1": s1, "sentence2": s2, "score": score}
                )
                + "\n"
            )
    return path


def hub_reachable(timeout=3.0) -> bool:
    try:
        socket.getaddrinfo("huggingface.co", 443)
        return True
    except OSError:
        return False
