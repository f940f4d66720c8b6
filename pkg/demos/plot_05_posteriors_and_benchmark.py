"""
Posteriors with error guarantees, checked against the oracle
============================================================

Run a small benchmark suite: random networks with unlikely evidence,
posterior queries estimated by the engine and compared with enumeration.
The same suite can be run from the command line with
``aisbn benchmark suite.json``.
"""

import json

from aisbn import infer_posteriors
from aisbn.benchmark import build_suite, run_suite, summarize
from aisbn.engine import EngineConfig

suite = {"seed": 3, "n_networks": 4, "n_nodes": [12, 14], "runs": 3, "n_queries": 3,
         "engine": {"epsilon_r": 0.05, "delta": 0.05, "query_warmup_stages": 3}}
cases = build_suite(suite)
result = run_suite(suite, cases)
summary = summarize(suite, result)
print(json.dumps({k: summary[k] for k in ("posterior_relative_error", "fraction_outside_posterior_bound",
                                          "posterior_bound", "mu_sigma_stage_ratio_at_least_1")}, indent=2))

# %%
# A single inference call on the first case.
case = cases[0]
run = infer_posteriors(case.net, case.evidence, [(q, s) for q, s, _ in case.queries],
                       EngineConfig(eps_r=0.05, delta=0.05), seed=0)
print(f"Pr(e) exact {case.p_evidence:.4e}, estimated {run.evidence_report.estimate:.4e}")
for r, (_, _, exact) in zip(run.results, case.queries):
    print(f"Pr({r.node}={r.state} | e): {r.posterior:.4f}  exact {exact:.4f}  "
          f"interval {r.bounds.lower:+.3f}..{r.bounds.upper:+.3f}")
