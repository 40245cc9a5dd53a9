"""Record a full session against the live service into a JSON fixture.

The browser client's tests replay this transcript through a stub fetch, so
they exercise the exact payloads the real service produces without needing a
Python process. Regenerate after any service schema change:

    python3 frontend/scripts/make_transcript.py > frontend/tests/fixtures/transcript.json
"""

import json
import sys

import numpy as np
from fastapi.testclient import TestClient

from prefstream.data_io import gen_sphere
from prefstream.model import random_unit_vector
from prefstream.service import app as app_module
from prefstream.service.app import app


def main() -> None:
    n, d, data_seed, seed = 60, 3, 31, 32
    body = {
        "dataset": {"synthetic": {"kind": "sphere", "n": n, "d": d, "data_seed": data_seed}},
        "config": {"pool_size": 12, "epsilon": 0.1, "seed": seed},
    }
    ds = gen_sphere(n, d, seed=data_seed)
    coords = {t.id: t.coords for t in ds.tuples}
    u = random_unit_vector(d, np.random.default_rng(33))

    app_module.reset_store()
    client = TestClient(app)
    sid = client.post("/sessions", json=body).json()["id"]
    initial_progress = client.get(f"/sessions/{sid}/progress").json()

    steps = []
    while True:
        query = client.get(f"/sessions/{sid}/query").json()
        if query["status"] == "done":
            break
        diff = float(
            np.dot(u, coords[query["first"]["id"]])
            - np.dot(u, coords[query["second"]["id"]])
        )
        outcome = "first" if diff >= 0 else "second"
        answer = client.post(
            f"/sessions/{sid}/answer", json={"outcome": outcome, "seq": query["seq"]}
        ).json()
        progress = client.get(f"/sessions/{sid}/progress").json()
        steps.append({"query": query, "outcome": outcome, "answer": answer, "progress_after": progress})

    result = client.get(f"/sessions/{sid}/result").json()
    app_module.reset_store()

    json.dump(
        {
            "create_request": body,
            "initial_progress": initial_progress,
            "steps": steps,
            "result": result,
        },
        sys.stdout,
        indent=1,
    )
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
