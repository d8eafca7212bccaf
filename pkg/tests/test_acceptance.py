"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (also collected into the
terminal summary) with the measured quantities and the wall-clock runtime
against its budget.  Sub-checks are all evaluated before the verdict so a
failing line says which part failed.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, SPEC_7_6, SPEC_617_713, SPEC_3_713
from dphav.detect import (
    bernoulli_map,
    correlation_formula,
    joint_detected_dist,
    rescaling_equivalence_check,
    thinning_matrix,
)
from dphav.exceptions import VanishingAcceptanceError
from dphav.fock import choose_cutoff, poisson_pmf
from dphav.nongauss import (
    covariance_of_conditional,
    delta_diagonal,
    delta_full,
    epsilon_bound,
)
from dphav.shotsim import RunConfig, fidelity, reconstruct_conditional, simulate_shots
from dphav.splitcond import (
    AcceptanceRule,
    PhaseDistribution,
    conditional_density_matrix,
    conditional_detected_dist,
    gaussian_approx,
    normal_density,
    peak_locations,
    phase_distribution,
    split,
)
from dphav.states import DphavSpec, PhotonDistribution, closedform_crosscheck, dphav_density_matrix

pytestmark = pytest.mark.acceptance

GRID_CELL = 2 * math.pi / 1024


class Verdict:
    def __init__(self, number, title, limit=None):
        self.number = number
        self.title = title
        self.limit = limit
        self.failures = []
        self.notes = []
        self.start = time.perf_counter()

    def check(self, ok, message):
        if not ok:
            self.failures.append(message)
        return ok

    def note(self, message):
        self.notes.append(message)

    def finish(self):
        elapsed = time.perf_counter() - self.start
        budget = "no budget" if self.limit is None else f"budget {self.limit:g} s"
        if self.limit is not None:
            self.check(elapsed < self.limit, f"runtime {elapsed:.2f} s over budget")
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures or self.notes)
        line = f"{status} criterion {self.number}: {self.title} [{elapsed:.2f} s, {budget}] {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert not self.failures, line


def pearson_with_se(x, y):
    """Sample Pearson coefficient and its asymptotic (delta-method) standard error.

    Valid for arbitrary finite fourth moments, not only Gaussian data.
    """
    dx, dy = x - x.mean(), y - y.mean()

    def mom(i, j):
        return float(np.mean(dx**i * dy**j))

    s20, s02, s11 = mom(2, 0), mom(0, 2), mom(1, 1)
    r = s11 / math.sqrt(s20 * s02)
    var = r * r / 4 * (mom(4, 0) / s20**2 + mom(0, 4) / s02**2 + 2 * mom(2, 2) / (s20 * s02)
                       + 4 * mom(2, 2) / s11**2 - 4 * mom(3, 1) / (s11 * s20)
                       - 4 * mom(1, 3) / (s11 * s02))
    return r, math.sqrt(var / x.size)


def eq_detected(amps, m1, eta=1.0):
    pd = phase_distribution(amps, AcceptanceRule.eq(m1), eta)
    return conditional_detected_dist(amps, pd, eta)


def test_criterion_01_swap_symmetry():
    v = Verdict(1, "swap symmetry of conditional detected statistics", 30)
    a = DphavSpec.from_intensities(3.0, 7.13)
    b = a.swapped()
    amps_a, amps_b = split(a), split(b)
    worst = 0.0
    for m1 in range(11):
        pa, pb = eq_detected(amps_a, m1), eq_detected(amps_b, m1)
        size = max(len(pa), len(pb))
        worst = max(worst, float(np.max(np.abs(pa.padded(size) - pb.padded(size)))))
    v.check(worst < 1e-12, f"analytic max-norm {worst:.3g} >= 1e-12")
    rec_a = simulate_shots(RunConfig(a, 1.0, 1_000_000, seed=101))
    rec_b = simulate_shots(RunConfig(b, 1.0, 1_000_000, seed=202))
    fids = []
    for m1 in range(11):
        rule = AcceptanceRule.eq(m1)
        fids.append(fidelity(reconstruct_conditional(rec_a, rule).distribution,
                             reconstruct_conditional(rec_b, rule).distribution))
    v.check(min(fids) > 0.999, f"min Monte-Carlo fidelity {min(fids):.6f} <= 0.999")
    v.note(f"analytic max-norm {worst:.2g}, min MC fidelity {min(fids):.6f}")
    v.finish()


def test_criterion_02_double_peak_threshold():
    v = Verdict(2, "double-peak threshold of p(phi; Eq(k))", 5)
    amps = split(SPEC_7_6)
    v.note(f"threshold {amps.max_intensity:.4f}")
    for k in (6, 10, 12):
        pd = phase_distribution(amps, AcceptanceRule.eq(k))
        found = pd.argmax()
        expected = peak_locations(amps, k)[-1]
        v.check(found > 0, f"k={k}: argmax at zero")
        v.check(abs(found - expected) <= GRID_CELL,
                f"k={k}: argmax {found:.5f} vs arccos {expected:.5f}")
        v.note(f"k={k} peak {found:.4f} (arccos {expected:.4f})")
    for k in (13, 20, 40):
        found = phase_distribution(amps, AcceptanceRule.eq(k)).argmax()
        v.check(found == 0.0, f"k={k}: argmax {found:.5f} != 0")
    v.finish()


def test_criterion_03_gaussian_limit():
    v = Verdict(3, "Gaussian limit of p(phi; Eq(k))", 5)
    amps = split(SPEC_7_6)
    distances = []
    for k in (26, 52, 104):
        pd = phase_distribution(amps, AcceptanceRule.eq(k))
        approx = normal_density(pd.grid, gaussian_approx(amps, k))
        distances.append(float(np.max(np.abs(pd.density - approx))))
    v.check(distances[0] > distances[1] > distances[2],
            f"distances not decreasing: {distances}")
    v.note("max-norm distances " + ", ".join(f"{d:.4g}" for d in distances))
    v.finish()


def test_criterion_04_displacement_invariance_of_delta():
    v = Verdict(4, "delta of the full state is independent of the displacement", 60)
    for alpha2, beta2 in ((0.0, 4.0), (3.0, 7.13), (7.0, 6.0)):
        spec = DphavSpec.from_intensities(alpha2, beta2)
        rho = dphav_density_matrix(spec)
        cov = covariance_of_conditional((spec.alpha, spec.beta), PhaseDistribution.uniform())
        full = delta_full(rho, cov).value
        diag = delta_diagonal(beta2).value
        v.check(abs(full - diag) < 1e-6, f"({alpha2}, {beta2}): |{full} - {diag}| >= 1e-6")
        v.note(f"({alpha2}, {beta2}) dim {rho.dim} diff {abs(full - diag):.2g}")
    v.finish()


def test_criterion_05_quasi_gaussian_conditioning():
    v = Verdict(5, "epsilon: Eq(0) near-Gaussian, interior maximum over Eq(m1)", 10)
    eta = 0.5
    amps = split(SPEC_617_713)
    eps_all = epsilon_bound(conditional_detected_dist(
        amps, phase_distribution(amps, AcceptanceRule.all(), eta), eta)).value
    eps = [epsilon_bound(eq_detected(amps, m1, eta)).value for m1 in range(13)]
    v.check(eps[0] < 0.1 * eps_all,
            f"eps(Eq(0))={eps[0]:.4f} not below 10% of eps(all)={eps_all:.4f}")
    interior = [m for m in range(1, 12)
                if eps[m] > eps[m - 1] and eps[m] > eps[m + 1] and eps[m] > eps_all]
    v.check(bool(interior), "no interior maximum of eps(Eq(m1)) above eps(all) over m1 0..12 "
            "(sequence " + " ".join(f"{e:.3f}" for e in eps) + ")")

    # phase-sensitive measure for comparison, reported only
    def delta(rule):
        pd = phase_distribution(amps, rule, eta)
        return delta_full(conditional_density_matrix(amps, pd),
                          covariance_of_conditional(amps, pd)).value

    deltas = [delta(AcceptanceRule.eq(m1)) for m1 in range(5)]
    v.note(f"eps(all)={eps_all:.4f}")
    print(f"  supplementary delta: all={delta(AcceptanceRule.all()):.4f} Eq(0..4)="
          + " ".join(f"{d:.4f}" for d in deltas))
    v.finish()


def test_criterion_06_correlation_curve():
    v = Verdict(6, "Pearson coefficient of the joint detected statistics", 60)
    specs = [(1.0, 1.0), (0.5, 4.0), (3.0, 7.13), (6.17, 7.13), (7.0, 6.0)]
    etas = (1.0, 0.7, 0.3)
    worst = 0.0
    worst_z = 0.0
    for i, (alpha2, beta2) in enumerate(specs):
        spec = DphavSpec.from_intensities(alpha2, beta2)
        for j, eta in enumerate(etas):
            exact = correlation_formula(eta * alpha2, eta * beta2)
            joint = joint_detected_dist(spec, eta).pearson()
            worst = max(worst, abs(joint - exact))
            rec = simulate_shots(RunConfig(spec, eta, 1_000_000, seed=1000 + 10 * i + j)).astype(float)
            r, se = pearson_with_se(rec[:, 0], rec[:, 1])
            z = abs(r - exact) / se
            worst_z = max(worst_z, z)
            v.check(z < 3, f"({alpha2}, {beta2}, eta={eta}): MC {r:.5f} vs {exact:.5f} ({z:.2f} SE)")
    v.check(worst < 1e-8, f"joint-distribution max error {worst:.3g} >= 1e-8")
    v.note(f"joint max error {worst:.2g}, worst MC deviation {worst_z:.2f} SE over 15 points")
    v.finish()


def test_criterion_07_detection_identities():
    v = Verdict(7, "detection-layer identities")
    worst_map = max(rescaling_equivalence_check(spec, eta)
                    for spec in (SPEC_7_6, SPEC_617_713, SPEC_3_713) for eta in (0.2, 0.5, 0.9))
    v.check(worst_map < 1e-10, f"Bernoulli map vs rescaling {worst_map:.3g} >= 1e-10")
    size = 60
    worst_comp = max(
        float(np.max(np.abs(thinning_matrix(size, e1) @ thinning_matrix(size, e2)
                            - thinning_matrix(size, e1 * e2))))
        for e1 in (0.3, 0.8) for e2 in (0.5, 0.95))
    v.check(worst_comp < 1e-12, f"composition law {worst_comp:.3g} >= 1e-12")
    worst_poisson = 0.0
    for mean in (0.5, 4.0, 13.0):
        k = np.arange(choose_cutoff(mean) + 1)
        dist = PhotonDistribution(poisson_pmf(k, mean))
        for eta in (0.1, 0.5, 0.77):
            thinned = bernoulli_map(dist, eta).probs
            exact = poisson_pmf(np.arange(thinned.size), eta * mean)
            worst_poisson = max(worst_poisson, float(np.max(np.abs(thinned - exact))))
    v.check(worst_poisson < 1e-12, f"Poisson thinning {worst_poisson:.3g} >= 1e-12")
    v.note(f"map {worst_map:.2g}, composition {worst_comp:.2g}, Poisson {worst_poisson:.2g}")
    v.finish()


def test_criterion_08_state_validity():
    v = Verdict(8, "conditional state validity suite")
    kinds = ("eq", "neq", "gt", "leq")
    bad_order = []
    worst = {"trace": 0.0, "eig": 0.0, "shot": 0.0, "delta": 0.0, "mixture": 0.0}
    for spec in (SPEC_617_713, SPEC_7_6, SPEC_3_713):
        amps = split(spec)
        n_max = choose_cutoff(amps.max_intensity)
        for kind in kinds:
            for m1 in range(8):
                pd = phase_distribution(amps, getattr(AcceptanceRule, kind)(m1))
                rho = conditional_density_matrix(amps, pd, n_max)
                cov = covariance_of_conditional(amps, pd)
                worst["trace"] = max(worst["trace"], abs(rho.trace() - 1.0))
                worst["eig"] = min(worst["eig"], float(rho.eigenvalues().min()))
                worst["shot"] = min(worst["shot"], cov.var_x - 0.5)
                worst["delta"] = min(worst["delta"], delta_full(rho, cov).value)
                if cov.var_y < cov.var_x:
                    bad_order.append(f"{kind}({m1})@({spec.alpha2:.3g},{spec.beta2:.3g})"
                                     f" var_x={cov.var_x:.4f}>var_y={cov.var_y:.4f}")
        # mixture identity over the whole Eq(k) family
        total = np.zeros((n_max + 1, n_max + 1))
        for k in range(n_max + 1):
            try:
                pd = phase_distribution(amps, AcceptanceRule.eq(k))
            except VanishingAcceptanceError:
                continue
            total += pd.norm_constant * conditional_density_matrix(amps, pd, n_max).elements.real
        whole = conditional_density_matrix(amps, phase_distribution(amps, AcceptanceRule.all()), n_max)
        worst["mixture"] = max(worst["mixture"], float(np.max(np.abs(total - whole.elements.real))))
    v.check(worst["trace"] <= 1e-10, f"trace error {worst['trace']:.3g}")
    v.check(worst["eig"] >= -1e-10, f"min eigenvalue {worst['eig']:.3g}")
    v.check(worst["shot"] >= -1e-12, f"var_x below shot noise by {-worst['shot']:.3g}")
    v.check(worst["delta"] >= -1e-9, f"min delta {worst['delta']:.3g}")
    v.check(worst["mixture"] <= 1e-9, f"mixture identity error {worst['mixture']:.3g}")
    v.check(not bad_order, f"var_y >= var_x violated in {len(bad_order)} of 96 states, e.g. "
            + ", ".join(bad_order[:3]))
    v.note(", ".join(f"{k} {val:.2g}" for k, val in worst.items()))
    v.finish()


def test_criterion_09_closed_form_crosscheck():
    v = Verdict(9, "closed form vs quadrature")
    result = closedform_crosscheck([(a, b) for a in (1.0, 7.0) for b in (1.0, 6.0)], range(26))
    if not result.agrees:
        # a documented discrepancy report is an accepted outcome
        print(result.report())
    v.check(result.agrees or bool(result.report()), "silent disagreement")
    v.note(result.report())
    v.finish()


def test_criterion_10_mean_monotonicity():
    v = Verdict(10, "conditional mean increases with m1")
    amps = split(SPEC_617_713)
    analytic = [eq_detected(amps, m1).mean() for m1 in range(13)]
    v.check(all(b > a for a, b in zip(analytic, analytic[1:])),
            "analytic means not increasing: " + " ".join(f"{m:.3f}" for m in analytic))
    records = simulate_shots(RunConfig(SPEC_617_713, 1.0, 1_000_000, seed=77))
    simulated = [reconstruct_conditional(records, AcceptanceRule.eq(m1)).mean for m1 in range(13)]
    v.check(all(b > a for a, b in zip(simulated, simulated[1:])),
            "simulated means not increasing: " + " ".join(f"{m:.3f}" for m in simulated))
    v.note("analytic " + " ".join(f"{m:.2f}" for m in analytic))
    v.finish()
