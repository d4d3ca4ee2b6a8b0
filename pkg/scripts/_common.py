"""Shared helpers for the experiment runners."""
import argparse
import json
from pathlib import Path

from dtb import io


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default="results", help="directory for JSON/CSV outputs")
    return p


def save(out_dir, name: str, payload: dict) -> Path:
    path = Path(out_dir) / f"{name}.json"
    io.atomic_write(path, json.dumps(payload, indent=2, default=float) + "\n")
    print(json.dumps(payload, indent=2, default=float))
    print(f"wrote {path}")
    return path
