import argparse
import json
from pathlib import Path


def parser(doc, out="results"):
    p = argparse.ArgumentParser(description=doc.splitlines()[0])
    p.add_argument("--out", default=out)
    p.add_argument("--resolution", type=int, default=256)
    return p


def save(args, name, payload):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out / name}")
