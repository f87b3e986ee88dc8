"""Regenerates pure_area_expected.json: exp(T C) a with C = sum_ij A[i,j] B_j B_i."""
import json
import pathlib

import numpy as np
from scipy.linalg import expm

here = pathlib.Path(__file__).parent
cfg = json.loads((here / "pure_area.json").read_text())
A = np.array(cfg["driver"]["area"])
B = [np.array(m) for m in cfg["field"]["matrices"]]
C = sum(A[i, j] * B[j] @ B[i] for i in range(len(B)) for j in range(len(B)))
a = np.array(cfg["probes"][0])
final = expm(cfg["T"] * C) @ a
(here / "pure_area_expected.json").write_text(json.dumps({"final": final.tolist()}, indent=2) + "\n")
