"""Ranked recommendations, in process and over HTTP.

The end product is simple: given the tactics applied so far, return the
n most plausible next steps, best first.  This demo trains a small
model, queries it directly, then stands up the bundled HTTP service on
an ephemeral port and makes the same query as a JSON request.

Run top to bottom: python3 demos/05_recommend_and_serve.py
"""

import json
import threading
import urllib.request

from tacrec import (
    ModelConfig,
    SplitMix64,
    build_pairs,
    build_vocab,
    predict_topn,
    split_dataset,
    tf_train,
)
from tacrec.rng import mix64
from tacrec.service import create_server

# Same order-2 corpus recipe as demo 04, shrunk for a fast run.
TACTICS = [f"tac{i:02d}" for i in range(12)]


def next_tactic(a: str, b: str) -> str:
    key = TACTICS.index(a) * len(TACTICS) + TACTICS.index(b)
    return TACTICS[mix64(key ^ 0xD4) % len(TACTICS)]


rng = SplitMix64(1)
proofs = []
for _ in range(120):
    start = mix64(0x57A7 + rng.next_below(12))
    proof = [TACTICS[start % 12], TACTICS[(start >> 8) % 12]]
    for _ in range(6 + rng.next_below(6)):
        proof.append(next_tactic(proof[-2], proof[-1]))
    proofs.append(proof)

split = split_dataset(build_pairs(proofs, context_min=3, k=1), ratio=0.9, seed=2)
vocab = build_vocab(split.train)
config = ModelConfig(
    window=16, embed_dim=24, heads=2, layers=1, ffn_dim=48,
    dropout=0.1, batch=32, epochs=16, seed=5,
)
ckpt = tf_train(config, split.train, split.test, vocab)

# ---------------------------------------------------------------------------
# In-process recommendations
# ---------------------------------------------------------------------------
# predict_topn works identically for a checkpoint and an n-gram model;
# the checkpoint route additionally needs the vocabulary (and verifies it
# against the digest baked in at training time).

context = list(split.test[0].context)
print(f"context (last 3): ...{context[-3:]}")
print(f"true next tactic: {split.test[0].label[0]}")
rec = predict_topn(ckpt, context, n=5, vocab=vocab)
for i, (tactics, score) in enumerate(rec.items, start=1):
    print(f"  {i}. {tactics[0]:8s} {score:.4f}")

# ---------------------------------------------------------------------------
# The same query over HTTP
# ---------------------------------------------------------------------------
# create_server builds (but does not start) a threading HTTP server.
# Port 0 asks the OS for a free port -- handy for demos and tests.

httpd = create_server(ckpt, vocab, addr="127.0.0.1:0")
port = httpd.server_address[1]
thread = threading.Thread(target=httpd.serve_forever, daemon=True)
thread.start()
print(f"\nservice listening on 127.0.0.1:{port}")

try:
    body = json.dumps({"tactics": context, "n": 5, "k": 1}).encode()
    req = urllib.request.Request(
        f"http://127.0.0.1:{port}/api/recommend",
        data=body,
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(req) as resp:
        payload = json.loads(resp.read())
    print("POST /api/recommend ->")
    for item in payload["recommendations"]:
        print(f"  {item['tactics']}  {item['score']:.4f}")
    print(f"model digest: {payload['model_digest']}")

    # The health endpoint summarises what is loaded -- useful for probes.
    with urllib.request.urlopen(f"http://127.0.0.1:{port}/api/health") as resp:
        health = json.loads(resp.read())
    print(f"GET /api/health -> vocab_size={health['vocab_size']}")
finally:
    httpd.shutdown()
    thread.join()
    print("service stopped")

# Unknown tactics in the context do not fail the request: they map to the
# unknown marker and the response carries a warning naming them, so an
# editor integration can show suggestions and the caveat together.
