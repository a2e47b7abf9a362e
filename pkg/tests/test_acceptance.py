"""End-to-end acceptance checks.

Each test prints one ``[PASS]``/``[FAIL]`` line for its criterion, then
asserts it.  Runs are cached per module so the property suite reuses the
traces of the curve runs.  Slow: the rank-8 runs dominate.
"""
from math import sqrt

import numpy as np
import pytest

from roofcut.ccpa import OracleConfig, run, upper_bound_random_decomposition
from roofcut.dual import build_instance
from roofcut.measures import PI, TAU, pi_tangle, three_tangle
from roofcut.qlinalg import PureState, tensor
from roofcut.reference import (
    ghz,
    lambda_quartic,
    pi_ghz_w,
    polyval,
    quartic_coefficients,
    state_ghz_w,
    state_werner,
    tau_ghz_w,
    tau_werner,
    w_state,
)

from conftest import haar_state
from test_lp import brute_force_y, random_program
from test_measures import hyperdet

pytestmark = pytest.mark.slow

GRID = [round(0.1 * i, 1) for i in range(11)]
REDUCED = dict(eps=1e-3, max_iters=500, cfg=OracleConfig(num_starts=512))
UPPER_SAMPLES = 2000

_cache = {}


def cached(key, fn):
    if key not in _cache:
        _cache[key] = fn()
    return _cache[key]


def ghz_w_run(measure, p, eps=1e-3):
    return cached(("ghz_w", measure.name, p, eps),
                  lambda: run(build_instance(state_ghz_w(p), measure), eps=eps))


def werner_run(measure, p):
    return cached(("werner", measure.name, p),
                  lambda: run(build_instance(state_werner(p), measure), **REDUCED))


def report(capsys, name, failures, details):
    with capsys.disabled():
        print()
        for line in details:
            print(f"    {line}")
        print(f"[{'FAIL' if failures else 'PASS'}] {name}")
    assert not failures, f"{name}: " + "; ".join(failures)


def curve_check(capsys, name, measure, analytic):
    failures, details = [], []
    for p in GRID:
        res = ghz_w_run(measure, p)
        a = analytic(p)
        ok = a - 0.02 <= res.lower_bound <= a + 1e-3
        details.append(f"p={p:.1f} numeric={res.lower_bound:.6f} analytic={a:.6f} "
                       f"iters={res.iterations} {res.termination} {'ok' if ok else 'MISS'}")
        if not ok:
            failures.append(f"p={p}: {res.lower_bound:.6f} vs {a:.6f}")
    report(capsys, name, failures, details)


def test_criterion_1_ghz_w_tau_curve(capsys):
    curve_check(capsys, "1 GHZ/W tau curve within [analytic-0.02, analytic+1e-3]", TAU, tau_ghz_w)


def test_criterion_2_ghz_w_pi_curve(capsys):
    curve_check(capsys, "2 GHZ/W pi curve within [analytic-0.02, analytic+1e-3]", PI, pi_ghz_w)


def test_criterion_3_class_transition(capsys):
    lo = ghz_w_run(TAU, 0.61, eps=1e-4)
    hi = ghz_w_run(TAU, 0.65, eps=1e-4)
    failures = []
    if not lo.lower_bound < 1e-3:
        failures.append(f"tau(0.61) = {lo.lower_bound:.3e} not < 1e-3")
    if not hi.lower_bound > 5e-3:
        failures.append(f"tau(0.65) = {hi.lower_bound:.3e} not > 5e-3")
    details = [f"p=0.61 numeric={lo.lower_bound:.3e} iters={lo.iterations} {lo.termination}",
               f"p=0.65 numeric={hi.lower_bound:.3e} iters={hi.iterations} {hi.termination}"]
    report(capsys, "3 tau transition bracketed at eps=1e-4", failures, details)


def test_criterion_4_werner_tau(capsys):
    failures, details = [], []
    for p in (0.3, 0.5, 0.8):
        res = werner_run(TAU, p)
        a = tau_werner(p)
        ok = a - 0.05 <= res.lower_bound <= a + 1e-3
        details.append(f"p={p} numeric={res.lower_bound:.6f} analytic={a:.6f} "
                       f"iters={res.iterations} {res.termination} {'ok' if ok else 'MISS'}")
        if not ok:
            failures.append(f"p={p}: {res.lower_bound:.6f} vs {a:.6f}")
    report(capsys, "4 Werner tau within [analytic-0.05, analytic+1e-3]", failures, details)


def test_criterion_5_werner_pi_transition(capsys):
    lo, hi = werner_run(PI, 0.40), werner_run(PI, 0.48)
    failures = []
    if not lo.lower_bound < 1e-2:
        failures.append(f"pi(0.40) = {lo.lower_bound:.3e} not < 1e-2")
    if not hi.lower_bound > 1e-2:
        failures.append(f"pi(0.48) = {hi.lower_bound:.3e} not > 1e-2")
    details = [f"p=0.40 numeric={lo.lower_bound:.3e} iters={lo.iterations} {lo.termination}",
               f"p=0.48 numeric={hi.lower_bound:.3e} iters={hi.iterations} {hi.termination}"]
    report(capsys, "5 Werner pi transition between 0.40 and 0.48", failures, details)


# --- property suites ------------------------------------------------------


def test_criterion_6a_sandwich(capsys):
    failures, details = [], []
    for measure, analytic in ((TAU, tau_ghz_w), (PI, pi_ghz_w)):
        for p in GRID:
            lb = ghz_w_run(measure, p).lower_bound
            a = analytic(p)
            ub = upper_bound_random_decomposition(state_ghz_w(p), measure, UPPER_SAMPLES, seed=0)
            ok = lb <= a + 1e-6 and a <= ub + 1e-6
            if not ok:
                failures.append(f"{measure.name} p={p}: {lb:.6f} <= {a:.6f} <= {ub:.6f}")
            details.append(f"{measure.name} p={p:.1f} lower={lb:.6f} analytic={a:.6f} "
                           f"upper={ub:.6f} {'ok' if ok else 'MISS'}")
    report(capsys, "6a sandwich lower <= analytic <= upper on the GHZ/W grid", failures, details)


def test_criterion_6b_trace_monotonicity(capsys):
    failures = []
    runs = [res for _, _, res in _runs_with_states()]
    for i, res in enumerate(runs):
        ys = res.y_history
        if any(b > a + 1e-9 for a, b in zip(ys, ys[1:])):
            failures.append(f"run {i}: y increased")
        bounds = [v for _, v in res.incumbent_history]
        if any(b <= a for a, b in zip(bounds, bounds[1:])):
            failures.append(f"run {i}: incumbent bound not strictly increasing")
    report(capsys, "6b master y non-increasing and incumbents strictly increasing",
           failures, [f"{len(runs)} recorded traces"])


def test_criterion_6c_ball_and_box(capsys):
    failures = []
    checked = 0
    for rho, measure, res in _runs_with_states():
        inst = build_instance(rho, measure)
        if inst.rank == 1:
            continue
        checked += 1
        w = res.witness_coords
        if np.max(np.abs(w)) > inst.box_bound + 1e-9:
            failures.append(f"{measure.name} box violated: {np.max(np.abs(w)):.3e}")
        norm = np.max(np.abs(np.linalg.eigvalsh(res.witness_matrix)))
        if norm > inst.ball_bound + 1e-6:
            failures.append(f"{measure.name} ball violated: {norm:.3e} > {inst.ball_bound:.3e}")
    report(capsys, "6c final witnesses inside the box and the operator-norm ball",
           failures, [f"{checked} witnesses checked"])


def _runs_with_states():
    out = [(state_ghz_w(p), m, ghz_w_run(m, p)) for m in (TAU, PI) for p in GRID]
    out += [(state_werner(p), TAU, werner_run(TAU, p)) for p in (0.3, 0.5, 0.8)]
    out += [(state_werner(p), PI, werner_run(PI, p)) for p in (0.40, 0.48)]
    return out


def test_criterion_6d_witness_on_product_states(capsys):
    failures, details = [], []
    rng = np.random.default_rng(7)
    feas_tol = OracleConfig().feas_tol
    checked = 0
    for rho, measure, res in _runs_with_states():
        inst = build_instance(rho, measure)
        if inst.rank < 8 or not float(inst.c @ res.witness_coords) < -1e-6:
            continue  # random product states lie in the range only for full-rank states
        checked += 1
        worst = np.inf
        for _ in range(1000):
            v = tensor(*(haar_state(rng, 2) for _ in range(3)))
            worst = min(worst, float(np.vdot(v, res.witness_matrix @ v).real))
        details.append(f"{measure.name} witness <c,w>={inst.c @ res.witness_coords:.3e} "
                       f"min product expectation={worst:.3e}")
        if worst < -feas_tol:
            failures.append(f"{measure.name}: product expectation {worst:.3e}")
    details.append(f"{checked} witnesses with tr(rho X) < -1e-6")
    report(capsys, "6d witnesses nonnegative on 1000 random product states", failures, details)


def test_criterion_6e_measure_identities(capsys):
    failures = []
    checks = [("tau(GHZ)", three_tangle(ghz()), 1.0), ("tau(W)", three_tangle(w_state()), 0.0),
              ("pi(GHZ)", pi_tangle(ghz()), 1.0),
              ("pi(W)", pi_tangle(w_state()), 4 * (sqrt(5) - 1) / 9)]
    for name, got, want in checks:
        if abs(got - want) > 1e-10:
            failures.append(f"{name} = {got}")
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        v = haar_state(rng)
        a = v.reshape(2, 2, 2).transpose(2, 1, 0)
        worst = max(worst, abs(three_tangle(PureState((2, 2, 2), v)) - 4 * abs(hyperdet(a))))
    if worst > 1e-8:
        failures.append(f"hyperdeterminant mismatch {worst:.3e}")
    report(capsys, "6e measure identities and hyperdeterminant equivalence", failures,
           [f"max |tau - 4|Det|| over 1000 states = {worst:.2e}"])


def test_criterion_6f_lp_vertex_enumeration(capsys):
    from roofcut.lp import solve

    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        mp = random_program(rng)
        worst = max(worst, abs(solve(mp).y - brute_force_y(mp)))
    failures = [f"max deviation {worst:.3e}"] if worst > 1e-8 else []
    report(capsys, "6f LP matches vertex enumeration on 50 instances", failures,
           [f"max |y - y_brute| = {worst:.2e}"])


def test_criterion_6g_quartic(capsys):
    worst_res, worst_vieta = 0.0, 0.0
    for p in np.linspace(0.0, 1.0, 101):
        roots = lambda_quartic(float(p))
        coeffs = quartic_coefficients(float(p))
        worst_res = max(worst_res, max(abs(polyval(coeffs, z)) for z in roots))
        worst_vieta = max(worst_vieta, abs(np.sum(roots) - 1.0))
    failures = []
    if worst_res >= 1e-9:
        failures.append(f"root residual {worst_res:.3e}")
    if worst_vieta >= 1e-9:
        failures.append(f"Vieta sum off by {worst_vieta:.3e}")
    report(capsys, "6g quartic roots and Vieta sum on a 101-point grid", failures,
           [f"max residual {worst_res:.2e}, max |sum - 1| {worst_vieta:.2e}"])
