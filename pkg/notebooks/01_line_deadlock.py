# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Local deadlock on a three-node line
#
# A and B are connected only through C, and every channel side starts with
# 10 tokens.  A pays B at 1 token/s, B pays A at 2 token/s and C pays B at
# 2 token/s.  C only gets funds back toward B from A's traffic, so instant
# single-path routing drains C's side toward B and then stalls everything
# that needs it.

# %%
import numpy as np

from pchnet import deadlock_config, line_network, run
from pchnet.network import to_tokens

net = line_network(20.0)
for (a, b), ch in net.channels.items():
    print(f"channel {a}-{b}: {to_tokens(ch.funds[0])} / {to_tokens(ch.funds[1])}")

# %% [markdown]
# ## Instant shortest-path routing

# %%
base = run(deadlock_config("shortest", duration=60.0))
ab = [(0, 1), (1, 0)]
for start in range(0, 60, 10):
    print(f"{start:>2}-{start + 10:<2} s  A<->B {base.throughput_between(ab, start, start + 10):.2f} tok/s")
print("first deadlock event:", base.deadlocks[0])

# %% [markdown]
# The C->B side runs dry near t = 10 s (a net drain of 1 token/s against 10
# tokens).  After that no payment between A and B can cross C.

# %% [markdown]
# ## Price-controlled routing
#
# The imbalance price on C->B rises with the one-sided flow and throttles
# the C->B sender, which keeps the A<->B traffic alive.

# %%
ours = run(deadlock_config("splicer", duration=60.0))
for start in range(0, 60, 10):
    print(f"{start:>2}-{start + 10:<2} s  A<->B {ours.throughput_between(ab, start, start + 10):.2f} tok/s")
print("C->B delivered:", ours.throughput_between([(2, 1)], 0, 60) * 60, "tokens")
print(ours.metrics.summary())

# %%
times = np.array([t for t, _ in ours.rate_history])
cb = np.array([rates.get((2, 1), 0.0) for _, rates in ours.rate_history])
print("C->B allowed rate at 5, 20, 40, 60 s:", [round(float(cb[np.searchsorted(times, s) - 1]), 3) for s in (5, 20, 40, 60)])
