"""End-to-end check against a live server.

Everything else in this suite talks to the app in-process.  This file
boots a real uvicorn server on a loopback port and drives it through
the decomposition toolkit's HTTP client, which is the exact consumer
the service exists for.  The toolkit is a test-only dependency here;
the service itself never imports it.
"""

import socket
import threading
import time

import pytest

pytest.importorskip("surpdec", reason="decomposition toolkit not installed")

from surpdec.backend import HttpLm
from surpdec.experiment import ExperimentSpec, GeneratorSpec, run_experiment
from surpdec.types import Generator, PolicyParams, Stimulus


@pytest.fixture(scope="module")
def live_url(service_app):
    import uvicorn

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()

    config = uvicorn.Config(
        service_app, host="127.0.0.1", port=port, log_level="warning"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 20.0
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start within 20 s")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5.0)


def test_client_roundtrip_over_real_socket(live_url, model):
    lm = HttpLm(live_url)

    info = lm.healthz()
    assert info["model_id"] == "builtin:tiny"

    ctx = "the cat sat on the"
    single = lm.logprob(ctx, " mat")
    assert single < 0.0
    assert single == model.score(ctx, " mat")

    batch = lm.logprob_batch(ctx, [" mat", " dog", ""])
    assert batch[0] == single
    assert batch[2] == 0.0

    vec = lm.embed(ctx)
    assert len(vec) == model.hidden_size

    tokens = lm.topk(ctx, 5)
    assert len(tokens) == 5
    lps = [lp for _, lp in tokens]
    assert lps == sorted(lps, reverse=True)


def test_decomposition_identity_through_live_service(live_url):
    # A two-item experiment over the wire: the veridical surprisal must
    # split exactly into the shallow and deep parts regardless of what
    # the underlying model believes.
    lm = HttpLm(live_url)
    stimuli = (
        Stimulus(
            experiment_id="live",
            item_id="t1",
            condition="control",
            context="she poured the",
            continuation=" tea.",
            target=" tea.",
            is_control=True,
        ),
        Stimulus(
            experiment_id="live",
            item_id="t2",
            condition="swap",
            context="she poured the",
            continuation=" tae.",
            target=" tae.",
            is_control=False,
            control_item_id="t1",
        ),
    )
    spec = ExperimentSpec(
        name="live",
        stimuli=stimuli,
        generator=GeneratorSpec(kind=Generator.COUNTERPART),
        params=PolicyParams(depth_weight=1.0, semantic_scale=8.0),
    )
    report = run_experiment(spec, lm)
    assert not report.failures
    assert len(report.results) == 2
    for row in report.results:
        total = row.result.shallow + row.result.deep
        assert total == pytest.approx(row.result.veridical, abs=1e-9)
        assert row.result.shallow >= 0.0
