"""
Networks, joint probabilities and the exact oracle
==================================================

Build a small network by hand, check it, and compute event probabilities
and posteriors by brute-force enumeration.
"""

import numpy as np

from aisbn import BayesNet, NodeSpec, exact_event_probability, exact_posterior, joint_probability
from aisbn.formats import parse_network, serialize_network

# CPT rows follow the parent configurations, first parent slowest
net = BayesNet([
    NodeSpec("Cloudy", ("no", "yes"), (), [0.5, 0.5]),
    NodeSpec("Sprinkler", ("off", "on"), ("Cloudy",), [[0.5, 0.5], [0.9, 0.1]]),
    NodeSpec("Rain", ("no", "yes"), ("Cloudy",), [[0.8, 0.2], [0.2, 0.8]]),
    NodeSpec("WetGrass", ("dry", "wet"), ("Sprinkler", "Rain"),
             [[1.0, 0.0], [0.1, 0.9], [0.1, 0.9], [0.01, 0.99]]),
])
print(net, "topological order:", [net.nodes[i].id for i in net.topo_order])

# %%
# The joint of a total assignment is the product of one CPT entry per node.
s = {"Cloudy": "yes", "Sprinkler": "off", "Rain": "yes", "WetGrass": "wet"}
print("Pr(s) =", joint_probability(net, s), "=", 0.5 * 0.9 * 0.8 * 0.9)

# %%
# Pr(e) sums the joint over every completion of e.
e = {"WetGrass": "wet"}
pe = exact_event_probability(net, e)
print(f"Pr(WetGrass=wet) = {pe.probability:.4f} from {pe.terms_enumerated} completions")
print(f"Pr(Rain=yes | WetGrass=wet) = {exact_posterior(net, {'Rain': 'yes'}, e):.4f}")

# %%
# Networks round-trip through a JSON document.
text = serialize_network(net)
assert parse_network(text) == net
print(text[:200], "...")
