"""Run the sidecar: python -m embedservice --registry registry.json --port 8100"""

import argparse
from pathlib import Path

import uvicorn

from .app import create_app
from .registry import ModelRegistry

EXAMPLE_REGISTRY = Path(__file__).resolve().parents[2] / "registry.example.json"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="embedservice")
    parser.add_argument("--registry", default=str(EXAMPLE_REGISTRY),
                        help="JSON file mapping model names to encoder specs")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8100)
    args = parser.parse_args(argv)
    registry = ModelRegistry.from_file(args.registry)
    app = create_app(registry)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
