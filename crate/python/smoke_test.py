"""Smoke test for the fracheat_py extension."""

import math

import fracheat_py as fh


def main():
    assert abs(fh.lambda_max(4, 1.0) - 1.0) < 1e-10
    lam = 0.5 * fh.lambda_max(3, 0.5)
    alpha = fh.upsilon_inv(lam, 3, 0.5)
    assert abs(fh.upsilon(alpha, 3, 0.5) - lam) < 1e-10

    bundle = fh.Problem(3, 0.5, 0.5, 2.0).exponents()
    assert bundle["fujita_F"] < bundle["fujita_F_tilde"] < bundle["p_plus"]

    middle = 0.5 * (bundle["fujita_F"] + bundle["p_plus"])
    problem = fh.Problem(3, 0.5, 0.5, middle)
    assert problem.regime() == "ConditionalGlobal"
    cert = problem.certificate()
    assert cert.interior_margin > 0 and cert.boundary_min_gap > 0
    again = fh.Certificate.from_json(cert.to_json())
    assert again.eps == cert.eps

    try:
        fh.Problem(3, 0.5, 1.5, 2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("a fraction above 1 must be rejected")

    lattice = fh.Lattice(1, 8.0, 32, 1.0, 4.0, 32)
    xs, ts = lattice.x_coords(), lattice.t_coords()
    values = [math.exp(-x * x - 2 * (t - 2) ** 2) if t > 0 else 0.0 for t in ts for x in xs]
    image = lattice.apply_hs(values, 0.5)
    assert len(image) == len(values)
    back = lattice.apply_js([v if ts[i // len(xs)] > 0 else 0.0 for i, v in enumerate(image)], 0.5)
    peak = max(values)
    assert max(abs(a - b) for a, b in zip(back, values)) < 0.05 * peak

    report = fh.solve('{"N": 3, "p": 1.13, "solver": {"max_iterations": 3}}')
    assert report["verdict"] in ("NormEscape", "ConvergedBelowCap", "Stalled")

    checks = fh.verify(["algebra_ab", "hardy"], samples=3)
    assert all(r["passed"] for r in checks)
    assert "ls_bound" in fh.check_ids()
    print("smoke test passed")


if __name__ == "__main__":
    main()
