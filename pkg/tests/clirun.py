"""Subprocess helpers shared by the CLI and acceptance tests."""

import os
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "src" / "fuzmet" / "fixtures"
DATA = Path(__file__).resolve().with_name("data")


def fx(name: str) -> str:
    return str(FIXTURES / f"{name}.json")


def run(*args, env=None, cwd=None) -> subprocess.CompletedProcess:
    full_env = {**os.environ, **(env or {})}
    if env is None:
        full_env.pop("FUZMET_FIXTURES", None)
    return subprocess.run([sys.executable, "-m", "fuzmet", *map(str, args)],
                          capture_output=True, text=True, env=full_env, cwd=cwd or ROOT)


# One invocation per command; used for determinism checks.
SUITE = [
    ("axioms", fx("stationary_ratio"), "--json"),
    ("axioms", str(DATA / "corrupt_stationary_ratio.json"), "--json"),
    ("classify", fx("reciprocal_product"), '{"kind":"interleave","a":"1","b":"n+1"}',
     "--mode", "pseudocauchy", "--json"),
    ("classify", fx("reciprocal_product"), '{"kind":"interleave","a":"1","b":"n+1"}',
     "--mode", "pseudocauchy", "--distinct", "--json"),
    ("classify", fx("stationary_ratio"), '{"kind":"formula","expr":"n"}', "--mode", "gcauchy", "--json"),
    ("classify", fx("stationary_ratio"), '{"kind":"formula","expr":"n"}', "--mode", "cauchy", "--json"),
    ("cluster", fx("stationary_ratio"), '{"kind":"formula","expr":"n"}', "--json"),
    ("refine", fx("ex27"), "--cover", fx("ex27_cover"), "--json"),
    ("equinormal", fx("ex27"), "--b", '{"kind":"formula","expr":"n"}',
     "--c", '{"kind":"formula","expr":"n+1/n","from":2}', "--size", "100", "--json"),
    ("net", fx("stationary_ratio"), "--sample", '{"kind":"formula","expr":"n"}',
     "--sample-size", "100", "--r", "0.5", "--t", "1", "--json"),
    ("oracle", fx("weak_g_example"), "--json"),
    ("examples", "--json"),
]
