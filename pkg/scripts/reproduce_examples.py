"""Print the limits of the four-agent examples and the two identification runs."""

import numpy as np

from fjmids import fixtures
from fjmids.dynamics import limit_opinion, simulate
from fjmids.graph import classify_agents
from fjmids.identify import IdentificationProblem, solve
from fjmids.spectra import analyze_spectrum


def show(label, x, ref=None):
    line = f"{label:<28}" + " ".join(f"{v:8.3f}" for v in x)
    if ref is not None:
        line += f"   max dev {np.max(np.abs(np.asarray(x) - ref)):.4f}"
    print(line)


def main():
    np.set_printoptions(precision=4, suppress=True)
    cases = [
        ("C = I", fixtures.C_I2, "coupled", "independent"),
        ("C = C1", fixtures.C_POS, "coupled", "positive"),
        ("C = C2", fixtures.C_NEG, "coupled", "negative"),
        ("DeGroot, C = I", fixtures.C_I2, "degroot", "degroot_independent"),
        ("DeGroot, C = C1", fixtures.C_POS, "degroot", "degroot_positive"),
        ("DeGroot, C = C2", fixtures.C_NEG, "degroot", "degroot_negative"),
    ]
    for label, C, kind, key in cases:
        model = fixtures.four_agent(C, kind)
        rep = analyze_spectrum(model, classify_agents(model))
        x = limit_opinion(model)
        print(f"{label}: verdict {rep.verdict} ({rep.clause}), "
              f"simulate steps {len(simulate(model).states) - 1}")
        show("  limit", x, fixtures.REFERENCE[key])

    for mode in ("infinite", "finite"):
        doc = fixtures.identification_doc(mode)
        prob = IdentificationProblem(W=doc["W"], lam=doc["Lambda"], u=np.ravel(doc["u"]), m=2,
                                     observations=doc["observations"], mode=mode)
        res = solve(prob)
        print(f"identification ({mode}): C =\n{res.C}\n  residual {res.residual:.6f}, "
              f"{res.iterations} iterations, converged {res.converged}")
        model = fixtures.four_agent(res.C)
        if mode == "infinite":
            show("  refit limit", limit_opinion(model), fixtures.REFERENCE["steady_state_refit"])
        else:
            X = simulate(model, max_steps=3, conv_tol=1e-300).X[1:]
            for k, (row, ref) in enumerate(zip(X, fixtures.REFERENCE["trajectory_refit"]), 1):
                show(f"  refit x({k})", row, ref)


if __name__ == "__main__":
    main()
