"""Smoke test for the seqmeas extension module.

Build and install first, e.g. ``maturin build --release -m crates/py/Cargo.toml``
followed by ``pip install`` of the wheel, then run ``python smoke_test.py``.
"""

import math

import seqmeas

HALF = 0.5


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def test_closed_forms():
    close(seqmeas.var_sx_rho1(0.2), 0.25 * (1 - math.exp(-6.25)), 1e-15)
    close(seqmeas.var_sx_given_sz(HALF, HALF), 0.25 * math.tanh(1.0) ** 2, 1e-15)
    close(seqmeas.var_sz_given_sx(HALF, HALF, HALF), 0.1710068, 1e-7)


def test_two_stage_chain_matches_closed_form():
    stages = [("Sz", HALF), ("Sx", 1.0)]
    r = seqmeas.conditional_stats(stages, "plus", 2, [HALF])
    close(r["extracted_variance"], seqmeas.var_sx_given_sz(HALF, HALF), 1e-12)
    close(r["variance"], 1.0 + r["extracted_variance"], 1e-12)
    assert r["flag"] == "exact"


def test_matrix_inputs_equal_presets():
    sz = [[0.5, 0], [0, -0.5]]
    sx = [[0, 0.5], [0.5, 0]]
    rho = [[0.5, 0.5], [0.5, 0.5]]
    a = seqmeas.conditional_stats([(sz, HALF), (sx, HALF)], rho, 1, [0.3])
    b = seqmeas.conditional_stats([("Sz", HALF), ("Sx", HALF)], "plus", 1, [0.3])
    close(a["variance"], b["variance"], 1e-13)
    sy = [[0, -0.5j], [0.5j, 0]]
    c = seqmeas.conditional_stats([(sy, HALF)], "plus", 1, [])
    close(c["extracted_variance"], 0.25, 1e-12)


def test_density_normalized():
    stages = [("Sz", HALF), ("Sx", HALF), ("Sx", HALF), ("Sz", HALF)]
    h = 0.01
    xs = [-8 + h * i for i in range(1601)]
    pdf = seqmeas.conditional_density(stages, "plus", 2, [0.3, 0.1, -0.4], xs)
    close(sum(pdf) * h, 1.0, 1e-6)


def test_monte_carlo_agrees():
    stages = [("Sz", HALF), ("Sx", HALF)]
    exact = seqmeas.conditional_stats(stages, "plus", 1, [HALF])["variance"]
    mc = seqmeas.mc_conditional_variance(stages, "plus", 1, [HALF], samples=200_000, seed=3)
    assert mc["method"] == "rejection"
    assert abs(mc["estimate"] - exact) < 3 * mc["standard_error"], (mc, exact)
    again = seqmeas.mc_conditional_variance(stages, "plus", 1, [HALF], samples=200_000, seed=3)
    assert again == mc


def test_sampling_shape_and_determinism():
    rows = seqmeas.sample_chain([("Sz", HALF), ("Sx", HALF)], "plus", 1000, seed=9)
    assert len(rows) == 1000 and all(len(r) == 2 for r in rows)
    assert rows == seqmeas.sample_chain([("Sz", HALF), ("Sx", HALF)], "plus", 1000, seed=9)


def test_uncertainty_bound():
    r = seqmeas.mpur_check([1 / math.sqrt(2), 1 / math.sqrt(2)], "Sz", "Sx")
    assert r["satisfied"]
    close(r["lhs_sum"], 0.25, 1e-15)


def test_errors_raise_value_error():
    for call in (
        lambda: seqmeas.conditional_stats([("Sq", HALF)], "plus", 1, []),
        lambda: seqmeas.conditional_stats([("Sz", -1.0)], "plus", 1, []),
        lambda: seqmeas.conditional_stats([("Sz", HALF)], [[1, 0], [0, 1]], 1, []),
        lambda: seqmeas.conditional_stats([("Sz", HALF), ("Sx", HALF)], "plus", 3, [0.1]),
        lambda: seqmeas.validate("bogus"),
    ):
        try:
            call()
        except ValueError:
            continue
        raise AssertionError("expected ValueError")


def test_validate_suite():
    passed, report = seqmeas.validate("mpur", seed=1)
    assert passed, report
    assert report.count("[PASS] mpur:") == 3


def main():
    assert seqmeas.RNG_ALGORITHM.startswith("chacha20")
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_")]
    for name, fn in tests:
        fn()
        print(f"ok {name}")
    print(f"{len(tests)} smoke tests passed (seqmeas {seqmeas.__version__})")


if __name__ == "__main__":
    main()
