"""HTTP walkthrough: Mode 1 raw index ranges and Mode 2 dataset queries,
served from a temporary catalog on an ephemeral port."""

import json
import sys
import tempfile
import urllib.request
from pathlib import Path

import numpy as np

from tsds.server import Server, build_app

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import make_bin_dataset

root = Path(tempfile.mkdtemp(prefix="tsds-demo-"))
make_bin_dataset(root, "Obs_Demo_S-v0", n=500, seed=9, var_name="S")

app = build_app(root)
with Server(app, port=0) as server:
    base = f"http://127.0.0.1:{server.port}"
    print("serving", base)

    def get(path):
        with urllib.request.urlopen(base + path) as resp:
            return resp.read()

    # Mode 2: the catalog, dataset information, and a filtered CSV slice
    catalog = json.loads(get("/tsds/catalog.json"))
    print("\ndatasets:", [d["name"] for d in catalog["datasets"]])

    print("\n--- /tsds/Obs_Demo_S-v0.info ---")
    print(get("/tsds/Obs_Demo_S-v0.info").decode())

    print("--- /tsds/Obs_Demo_S-v0.csv?time>=10&time<20&binavg(5.0) ---")
    print(get("/tsds/Obs_Demo_S-v0.csv?time>=10&time<20&binavg(5.0)").decode())

    # Mode 1: raw little-endian doubles by element index, NaN-padded past EOF
    raw = get("/tsdb/Obs_Demo_S-v0.bin?[0:4]")
    print("--- /tsdb/Obs_Demo_S-v0.bin?[0:4] ---")
    print(np.frombuffer(raw, "<f8"))
    raw = get("/tsdb/Obs_Demo_S-v0.bin?[498:503]")
    print("\npast EOF at 500 values, [498:503] pads with NaN:")
    print(np.frombuffer(raw, "<f8"))
