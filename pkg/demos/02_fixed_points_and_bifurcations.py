# %% [markdown]
# # Fixed points and their bifurcations
#
# Fixed points solve a scalar residual in ``x``; the flux follows as
# ``phi* = k1 x* / (1 + k2)``. Eigenvalues of the Jacobian classify each one.

# %%
from mrchialvo import MapParams, branch_track, find_fixed_points, ns_first_lyapunov, ns_self_consistent

base = MapParams(k0=0.01, k1=0.5, k2=0.5, k=-0.1, r=2.0)
for r in (2.0, 2.8, 3.0, 5.0):
    print(f"r = {r}")
    for fp in find_fixed_points(base.with_(r=r)):
        lam = ", ".join(f"{complex(l):.4f}" for l in fp.stability.eigenvalues)
        print(f"   x*={fp.x_star:.5f}  phi*={fp.phi_star:.5f}  {fp.stability.kind:8s} [{lam}]")

# %% [markdown]
# ## Following the upper root
# Tracking the largest root while ``r`` grows, the complex pair reaches the
# unit circle first (Neimark-Sacker); a real eigenvalue later passes -1.

# %%
branch = branch_track(base, "r", (2.0, 3.0), 201, 3.296)
for c in branch.crit_points:
    print(f"{c.kind} at r = {c.param_value:.6f}")

# %% [markdown]
# ## Direction of the invariant circle
# At the NS point the first Lyapunov coefficient ``theta`` is negative, so a
# small attracting closed curve appears on one side of the critical ``k``.

# %%
ns_r = next(c.param_value for c in branch.crit_points if c.kind == "NS")
q, fp, rep = ns_self_consistent(base.with_(r=ns_r), 3.577)
rep = ns_first_lyapunov(q, fp)
print(f"k' = {rep.k_prime:.9f}  theta = {rep.theta:.5f}  d|lambda|/dk = {rep.modulus_derivative:.5f}")
