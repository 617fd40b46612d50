//! End-to-end acceptance checks. Each test covers one deliverable of the
//! library, prints a single pass/fail line with its worst deviation and
//! runtime, and enforces both the tolerance and a wall-clock budget.
//! Run with `--nocapture` to see the lines for passing tests too.

use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tanglesim::dynamics::{
    closed_forms_double_jc, closed_forms_jc_one_photon, closed_forms_jc_vacuum, double_jc_state,
    evolve_double_jc, evolve_jc_one_photon, evolve_jc_vacuum, scenario_hamiltonian, AmplitudeModel,
    AmplitudePair, BathSpec, DoubleJcKind, Propagator, Scenario,
};
use tanglesim::measures::{
    concurrence_pure_bipartition, residual_excess, residual_tangle, roof_concurrence_rank2,
};
use tanglesim::state::{partial_trace_pure, StateVector};
use tanglesim::verify::{run_suite, SuiteConfig};
use tanglesim::{detect_zero_intervals, esd_window_ab, esd_window_ad, herm_eig};

const TAU: f64 = std::f64::consts::TAU;

fn fig_amplitudes() -> (C64, C64) {
    (
        C64::new(1.0 / 10.0_f64.sqrt(), 0.0),
        C64::new(3.0 / 10.0_f64.sqrt(), 0.0),
    )
}

fn random_amplitudes(rng: &mut ChaCha8Rng) -> (C64, C64) {
    let w: f64 = rng.gen_range(0.02..0.98);
    let pa = C64::from_polar(1.0, rng.gen_range(0.0..TAU));
    let pb = C64::from_polar(1.0, rng.gen_range(0.0..TAU));
    (pa * w.sqrt(), pb * (1.0 - w).sqrt())
}

/// Prints the one-line verdict and enforces tolerance, budget, and any
/// extra structural conditions folded into `structure_ok`.
#[allow(clippy::too_many_arguments)]
fn verdict(
    n: u32,
    name: &str,
    worst: f64,
    tol: f64,
    started: Instant,
    budget: Duration,
    structure_ok: bool,
    extra: &str,
) {
    let elapsed = started.elapsed();
    let ok = worst <= tol && elapsed <= budget && structure_ok;
    let status = if ok { "PASS" } else { "FAIL" };
    println!(
        "criterion {n} ({name}): {status} (worst {worst:.3e} vs tol {tol:.1e}, {:.1} ms{}{extra})",
        elapsed.as_secs_f64() * 1e3,
        if extra.is_empty() { "" } else { "; " },
    );
    assert!(
        ok,
        "criterion {n} ({name}): worst {worst:.3e} vs tol {tol:.1e}, \
         elapsed {elapsed:?} of budget {budget:?}, structure_ok {structure_ok}"
    );
}

#[test]
fn criterion_1_window_endpoints() {
    let alpha = C64::new(0.429, 0.0);
    let beta = C64::new(0.905, 0.0);
    // warm call so the timed pass measures arithmetic, not first-touch cost
    esd_window_ab(alpha, beta).unwrap();

    let started = Instant::now();
    let ab = esd_window_ab(alpha, beta).unwrap().expect("AB window");
    let ad = esd_window_ad(alpha, beta).unwrap().expect("AD window");
    let worst = (ab.z_lo - 0.6886)
        .abs()
        .max((ad.z_lo - 0.5841).abs())
        .max((ad.z_hi - 0.8117).abs());
    let upper_ok = (ab.z_hi - 1.0).abs() < 1e-12;
    verdict(
        1,
        "window endpoints",
        worst,
        2e-3,
        started,
        Duration::from_millis(1),
        upper_ok,
        &format!(
            "AB from {:.4}, AD ({:.4}, {:.4})",
            ab.z_lo, ad.z_lo, ad.z_hi
        ),
    );
}

#[test]
fn criterion_2_vacuum_cell_identities() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let (alpha, beta) = random_amplitudes(&mut rng);
        let c0 = 2.0 * alpha.norm() * beta.norm();
        for k in 0..501 {
            let x = TAU * k as f64 / 500.0;
            let forms = closed_forms_jc_vacuum(x, alpha, beta).unwrap();
            let (ab, bc) = (forms.pair("AB").unwrap(), forms.pair("BC").unwrap());
            worst = worst.max((ab * ab + bc * bc - c0 * c0).abs());
            worst = worst.max(forms.residual.abs());
        }
        // the same identities from concurrences measured on the evolved state
        let x: f64 = rng.gen_range(0.0..TAU);
        let psi = evolve_jc_vacuum(x, alpha, beta, 1.0).unwrap();
        let tangle = residual_tangle(&psi, "A", ["B", "C"]).unwrap();
        worst = worst.max(tangle.residual.abs());
        let b_rest = concurrence_pure_bipartition(&psi, &["B"]).unwrap();
        let tangle_b = residual_tangle(&psi, "B", ["A", "C"]).unwrap();
        let sum_sq: f64 = tangle_b.pairs.iter().map(|(_, c)| c * c).sum();
        worst = worst.max((sum_sq - b_rest * b_rest).abs());
        worst = worst.max((b_rest - c0).abs());
    }
    verdict(
        2,
        "vacuum cell identities",
        worst,
        1e-9,
        started,
        Duration::from_secs(1),
        true,
        "",
    );
}

#[test]
fn criterion_3_psi_family_sum_rule() {
    let started = Instant::now();
    let bath = BathSpec::SingleMode { g: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (ra, rb) = random_amplitudes(&mut rng);
    let mut worst = 0.0_f64;
    for (alpha, beta) in [fig_amplitudes(), (ra, rb)] {
        for k in 0..501 {
            let z = k as f64 / 500.0;
            let pair = AmplitudePair::from_z(z, &bath).unwrap();
            let forms = closed_forms_double_jc(&pair, alpha, beta, DoubleJcKind::Psi).unwrap();
            let rest = forms.one_vs_rest("A(BCD)").unwrap();
            let sum_sq: f64 = ["AB", "AC", "AD"]
                .iter()
                .map(|k| forms.pair(k).unwrap().powi(2))
                .sum();
            worst = worst.max((rest * rest - sum_sq).abs());

            let psi = double_jc_state(&pair, alpha, beta, DoubleJcKind::Psi).unwrap();
            let rep = residual_excess(&psi, "A", ["B", "C", "D"]).unwrap();
            worst = worst.max(rep.residual.abs());
        }
    }
    verdict(
        3,
        "excitation-sharing sum rule",
        worst,
        1e-9,
        started,
        Duration::from_secs(5),
        true,
        "",
    );
}

#[test]
fn criterion_4_phi_family_decomposition() {
    let started = Instant::now();
    let bath = BathSpec::SingleMode { g: 1.0 };
    // exact-normalized counterpart of the 3-digit reference amplitudes, so
    // the state constructor's strict norm check stays meaningful
    let alpha_w = C64::new(0.429, 0.0);
    let beta_w = C64::new((1.0 - 0.429_f64.powi(2)).sqrt(), 0.0);
    let mut worst = 0.0_f64;
    let mut window_checked = 0usize;
    for (alpha, beta) in [fig_amplitudes(), (alpha_w, beta_w)] {
        let c0 = 2.0 * alpha.norm() * beta.norm();
        let window = tanglesim::simultaneous_window(alpha, beta).unwrap();
        for k in 0..501 {
            let z = k as f64 / 500.0;
            let pair = AmplitudePair::from_z(z, &bath).unwrap();
            let xi2 = pair.xi.norm_sqr();
            let forms = closed_forms_double_jc(&pair, alpha, beta, DoubleJcKind::Phi).unwrap();
            let (rest, ac) = (
                forms.one_vs_rest("A(BCD)").unwrap(),
                forms.pair("AC").unwrap(),
            );
            worst = worst.max((rest * rest - ac * ac - c0 * c0 * xi2).abs());
            worst = worst.max(-forms.residual);

            let psi = double_jc_state(&pair, alpha, beta, DoubleJcKind::Phi).unwrap();
            let rep = residual_excess(&psi, "A", ["B", "C", "D"]).unwrap();
            let m_ac = rep.pairs.iter().find(|(l, _)| l == "C").unwrap().1;
            let m_rest = rep.focus_rest;
            worst = worst.max((m_rest * m_rest - m_ac * m_ac - c0 * c0 * xi2).abs());
            worst = worst.max(-rep.residual);

            // inside the simultaneous death window the excess collapses to
            // the surviving source term
            if window.as_ref().is_some_and(|w| w.contains(z)) {
                worst = worst.max((forms.residual - c0 * c0 * xi2).abs());
                worst = worst.max((rep.residual - c0 * c0 * xi2).abs());
                window_checked += 1;
            }
        }
    }
    verdict(
        4,
        "one-against-rest decomposition",
        worst,
        1e-9,
        started,
        Duration::from_secs(5),
        window_checked > 50,
        &format!("{window_checked} in-window points"),
    );
}

#[test]
fn criterion_5_analytic_vs_numeric_fidelity() {
    let started = Instant::now();
    let g = 1.3;
    let bath = BathSpec::SingleMode { g };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for scenario in [
        Scenario::JcVacuum,
        Scenario::JcOnePhoton,
        Scenario::DoubleJcPsi,
        Scenario::DoubleJcPhi,
    ] {
        let (h, layout) = scenario_hamiltonian(scenario, g).unwrap();
        let cavity_dim = layout.dim_of("C").unwrap();
        let prop = Propagator::new(&h).unwrap();
        for _ in 0..100 {
            let (alpha, beta) = random_amplitudes(&mut rng);
            let t: f64 = rng.gen_range(0.0..8.0);
            let analytic = |tt: f64| -> StateVector {
                match scenario {
                    Scenario::JcVacuum => evolve_jc_vacuum(tt, alpha, beta, g),
                    Scenario::JcOnePhoton => evolve_jc_one_photon(tt, alpha, beta, g),
                    Scenario::DoubleJcPsi => {
                        evolve_double_jc(tt, alpha, beta, &bath, DoubleJcKind::Psi)
                    }
                    Scenario::DoubleJcPhi => {
                        evolve_double_jc(tt, alpha, beta, &bath, DoubleJcKind::Phi)
                    }
                }
                .unwrap()
                .promote("C", cavity_dim)
                .unwrap()
            };
            let reference = prop.apply(&analytic(0.0), t).unwrap();
            worst = worst.max(1.0 - analytic(t).overlap(&reference));
        }
    }
    verdict(
        5,
        "closed-form state fidelity",
        worst,
        1e-9,
        started,
        Duration::from_secs(10),
        true,
        "4 families x 100 random times",
    );
}

#[test]
fn criterion_6_death_windows_carry_tangle() {
    let started = Instant::now();
    let (alpha, beta) = fig_amplitudes();
    let curve = |x: f64| {
        closed_forms_jc_one_photon(x, alpha, beta)
            .unwrap()
            .pair("AB")
            .unwrap()
    };
    let samples: Vec<(f64, f64)> = (0..=500)
        .map(|k| {
            let x = TAU * k as f64 / 500.0;
            (x, curve(x))
        })
        .collect();
    let windows = detect_zero_intervals("AB", &samples, &curve, 1e-9).unwrap();

    // global floor of the closed-form tangle, and the peak inside each window
    let tau = |x: f64| closed_forms_jc_one_photon(x, alpha, beta).unwrap().residual;
    let mut min_tau = f64::INFINITY;
    for k in 0..=2000 {
        min_tau = min_tau.min(tau(TAU * k as f64 / 2000.0));
    }
    let mut min_peak = f64::INFINITY;
    let mut min_measured = f64::INFINITY;
    for w in &windows {
        let mut peak = 0.0_f64;
        for j in 0..=100 {
            peak = peak.max(tau(w.z_lo + w.width() * j as f64 / 100.0));
        }
        min_peak = min_peak.min(peak);
        // independent route: the tangle measured on the evolved state at the
        // window midpoint, pair concurrences taken through the roof search
        let mid = 0.5 * (w.z_lo + w.z_hi);
        let psi = evolve_jc_one_photon(mid, alpha, beta, 1.0).unwrap();
        let rep = residual_tangle(&psi, "A", ["B", "C"]).unwrap();
        min_measured = min_measured.min(rep.residual);
    }
    let worst = (-min_tau).max(0.0);
    let ok = !windows.is_empty() && min_peak >= 1e-3 && min_measured >= 1e-3;
    verdict(
        6,
        "death windows carry tangle",
        worst,
        1e-9,
        started,
        Duration::from_secs(5),
        ok,
        &format!(
            "{} window(s), smallest closed peak {:.2e}, measured midpoint floor {:.2e}",
            windows.len(),
            min_peak,
            min_measured
        ),
    );
}

/// The closed subtraction form for the one-photon atom-cavity pair is a
/// floor on the convex roof, with equality exactly where one superposition
/// branch factorizes (sin 2gt = 0 or sin 2*sqrt(2)*gt = 0): the pair lives
/// in 2x3, whose three pure-state minors occupy disjoint monomials and
/// cannot interfere. The criterion therefore checks the roof against the
/// floor and the eigendecomposition-average ceiling everywhere, demands
/// agreement at the factorizing times, and reports the strict gap openly.
#[test]
fn criterion_7_roof_bracket() {
    let started = Instant::now();
    let (alpha, beta) = fig_amplitudes();
    let mut worst = 0.0_f64;
    let mut gap = 0.0_f64;
    let mut factorizing = 0usize;
    for k in 0..25 {
        let x = TAU * k as f64 / 24.0;
        let closed = closed_forms_jc_one_photon(x, alpha, beta)
            .unwrap()
            .pair("AC")
            .unwrap();
        let psi = evolve_jc_one_photon(x, alpha, beta, 1.0).unwrap();
        let rho = partial_trace_pure(&psi, &["A", "C"]).unwrap();
        let roof = roof_concurrence_rank2(&rho, &["A"]).unwrap().value;

        let (vals, vecs) = herm_eig(rho.matrix()).unwrap();
        let dim = vals.len();
        let mut eig_avg = 0.0;
        for j in 0..dim {
            let w = vals[j].max(0.0);
            if w > 1e-12 {
                let col: Vec<C64> = (0..dim).map(|i| vecs[(i, j)]).collect();
                let branch = StateVector::normalized(rho.layout().clone(), col).unwrap();
                eig_avg += w * concurrence_pure_bipartition(&branch, &["A"]).unwrap();
            }
        }

        worst = worst.max(closed - roof).max(roof - eig_avg);
        let u = std::f64::consts::SQRT_2 * x;
        if (2.0 * x).sin().abs() < 1e-9 || (2.0 * u).sin().abs() < 1e-9 {
            worst = worst.max((roof - closed).abs());
            factorizing += 1;
        } else {
            gap = gap.max(roof - closed);
        }
    }
    verdict(
        7,
        "roof oracle bracket",
        worst,
        2e-3,
        started,
        Duration::from_secs(60),
        factorizing >= 5,
        &format!(
            "agreement at {factorizing} factorizing times; strict floor gap {gap:.2e} elsewhere"
        ),
    );
}

#[test]
fn criterion_8_markovian_comb_limit() {
    let started = Instant::now();
    let bath = BathSpec::Comb {
        modes: 201,
        g: 0.02,
        spacing: 0.02,
        center_detuning: 0.0,
    };
    let gamma = bath.golden_rule_rate().unwrap();
    let model = AmplitudeModel::new(&bath).unwrap();
    let recurrence = std::f64::consts::PI / 0.02;
    let mut worst = 0.0_f64;
    let mut t_max = 0.0_f64;
    for k in 0..=60 {
        let gt = 3.0 * k as f64 / 60.0;
        let t = gt / gamma;
        t_max = t_max.max(t);
        let expected = (-0.5 * gt).exp();
        let xi = model.amplitudes(t).unwrap().xi.norm();
        worst = worst.max((xi - expected).abs() / expected);
    }
    verdict(
        8,
        "structureless-continuum limit",
        worst,
        0.05,
        started,
        Duration::from_secs(10),
        t_max < recurrence,
        &format!(
            "201 modes, decay rate {gamma:.4}, probed to t {t_max:.0} of recurrence {recurrence:.0}"
        ),
    );
}

#[test]
fn criterion_9_property_suites() {
    let started = Instant::now();
    let config = SuiteConfig::default();
    let mut worst_ratio = 0.0_f64;
    let mut all_ok = true;
    let mut summary = String::new();
    for name in ["monogamy", "local-unitary", "partial-trace", "expm-group"] {
        let rep = run_suite(name, &config).unwrap();
        all_ok = all_ok && rep.passed;
        worst_ratio = worst_ratio.max(rep.worst / rep.tolerance);
        if !summary.is_empty() {
            summary.push_str(", ");
        }
        summary.push_str(&format!("{name} {:.1e}", rep.worst));
    }
    verdict(
        9,
        "randomized property suites",
        worst_ratio,
        1.0,
        started,
        Duration::from_secs(60),
        all_ok,
        &format!("1000 instances each: {summary}"),
    );
}
