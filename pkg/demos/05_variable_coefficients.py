"""A divergence-form PDE with polynomial coefficients.

The drift here is the gradient of the diffusion coefficient, so the
operator is div(a(x) grad u) + f(x) u: self-adjoint, with a(x) > 0 away
from the origin corner and a sign-indefinite reaction f.  Neither
stability nor instability is obvious by inspection; the finite-difference
oracle and the SOS certificate are checked against each other.
"""

from soslyap import (DegreeProfile, SimConfig, estimate_decay_rate,
                     simulate, solve_identities)
from soslyap.pde import ParabolicPde2D, default_bump_u0
from soslyap.poly import parse_polynomial as P

a = P("5*x1^2 - 15*x1*x2 + 13*x2^2")
model = ParabolicPde2D(a=a, c=a,
                       d=a.diff(1), e=a.diff(2),
                       f=P("-(17*x1^4 - 30*x2 - 25*x1^2 - 8*x2^3 - 50*x2^4)"))

result = simulate(model, default_bump_u0(),
                  SimConfig(n=128, dt=1e-4, t_final=1.0))
rate = estimate_decay_rate(result)
print("finite-difference decay rate: %.4f (gamma %.4f)" % (rate, 2 * rate))

profile = DegreeProfile.defaults(model, deg_s=4)
print("certifying with", profile, "...")
for gamma in (1.0, 2.0, 3.0):
    outcome = solve_identities(model, profile, gamma=gamma)
    print("gamma = %.1f: %s (margin %.2e)"
          % (gamma, outcome.status, outcome.margin))
