import socket
import threading
import time

import pytest
import uvicorn

from embedservice.app import create_app
from embedservice.registry import ModelRegistry

TEST_SPECS = {
    "hash-64": {"kind": "hash", "dim": 64},
    "hash-finance-256": {"kind": "hash", "dim": 256, "domain_terms": "finance"},
    "hash-finance-64": {"kind": "hash", "dim": 64, "domain_terms": "finance"},
}


@pytest.fixture(scope="session")
def registry():
    return ModelRegistry(TEST_SPECS, max_batch=64)


@pytest.fixture(scope="session")
def app(registry):
    return create_app(registry)


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="session")
def live_server(app):
    """The app served by a real uvicorn instance, for clients that need a URL."""
    port = _free_port()
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("uvicorn did not start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
