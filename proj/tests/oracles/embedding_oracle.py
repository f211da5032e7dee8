"""Trigram-hash embedding computed independently of the C++ code.

Prints cosine values that tests/unit/test_memory.cpp and test_action.cpp freeze.
"""
import math


def fnv1a32(data: bytes) -> int:
    h = 0x811C9DC5
    for b in data:
        h ^= b
        h = (h * 0x01000193) & 0xFFFFFFFF
    return h


def embed(text: str, dim: int = 64) -> list:
    raw = text.lower().encode()
    v = [0.0] * dim
    for i in range(len(raw) - 2):
        v[fnv1a32(raw[i:i + 3]) % dim] += 1.0
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v] if norm else v


def cosine(a, b) -> float:
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    if na == 0 or nb == 0:
        return 0.0
    return sum(x * y for x, y in zip(a, b)) / (na * nb)


PAIRS = [
    ("abcabc", "abc"),
    ("abcabc", "xyz"),
    ("the cat", "the cat sat"),
    ("the cat", "stock prices"),
]

CORPUS = [
    "The calculator evaluates arithmetic expressions.",
    "Paris is the capital of France.",
    "The capital city of Italy is Rome.",
]
QUERY = "capital of France"

if __name__ == "__main__":
    for a, b in PAIRS:
        print(f"cosine({a!r}, {b!r}) = {cosine(embed(a), embed(b)):.12f}")
    scores = [cosine(embed(QUERY), embed(p)) for p in CORPUS]
    for i, s in enumerate(scores):
        print(f"corpus[{i}] = {s:.12f}")
    order = sorted(range(len(CORPUS)), key=lambda i: (-scores[i], i))
    print("order =", order)
