//! Sudden-death windows of the double-cell families.
//!
//! For the phi family the fragile pair concurrences die on closed intervals
//! of z = |chi|: C_AB vanishes once z^2 >= |alpha/beta|, and C_AD vanishes
//! for z^2 between 1/2 -+ sqrt(1/4 - |alpha/beta|^2), which requires
//! |beta| >= 2 |alpha|. Everything here depends on the ratio |alpha/beta|
//! only, so slightly denormalized literal inputs are accepted.

use num_complex::Complex64 as C64;

use crate::dynamics::{closed_forms_double_jc, AmplitudePair, BathSpec, DoubleJcKind};
use crate::error::{Error, Result};

/// Refined endpoints closer than this are grid points merely touching zero,
/// not death intervals.
const MIN_WINDOW_WIDTH: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowKind {
    /// Endpoints from the closed-form death conditions.
    Analytic,
    /// Endpoints recovered from a sampled curve.
    Numeric,
}

/// A maximal interval on which a pair concurrence vanishes.
///
/// Analytic windows live on the z = |chi| axis and the `chi2` fields are the
/// transferred populations at the endpoints. Numeric windows carry whatever
/// coordinate the sampled curve used (a gt axis for the single-cell
/// families); the squared fields are then just squares of the endpoints.
#[derive(Clone, Debug)]
pub struct EsdWindow {
    pub pair: String,
    pub z_lo: f64,
    pub z_hi: f64,
    pub chi2_lo: f64,
    pub chi2_hi: f64,
    pub kind: WindowKind,
    /// Zero width, or a pair that never carries entanglement at all.
    pub degenerate: bool,
}

impl EsdWindow {
    fn on_axis(pair: &str, lo: f64, hi: f64, kind: WindowKind, degenerate: bool) -> Self {
        EsdWindow {
            pair: pair.to_string(),
            z_lo: lo,
            z_hi: hi,
            chi2_lo: lo * lo,
            chi2_hi: hi * hi,
            kind,
            degenerate,
        }
    }

    pub fn width(&self) -> f64 {
        self.z_hi - self.z_lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.z_lo <= x && x <= self.z_hi
    }
}

fn amplitude_moduli(alpha: C64, beta: C64) -> Result<(f64, f64)> {
    let (a, b) = (alpha.norm(), beta.norm());
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("alpha", "amplitudes must be finite"));
    }
    let n = a * a + b * b;
    if (n - 1.0).abs() > 5e-2 {
        return Err(Error::NotNormalized((n - 1.0).abs()));
    }
    Ok((a, b))
}

/// Death window of the atom-atom pair in the phi family:
/// `z in [sqrt(|alpha/beta|), 1]`, present whenever |alpha| <= |beta|.
pub fn esd_window_ab(alpha: C64, beta: C64) -> Result<Option<EsdWindow>> {
    let (a, b) = amplitude_moduli(alpha, beta)?;
    if a == 0.0 || b == 0.0 {
        // one branch is absent and the pair never entangles
        return Ok(Some(EsdWindow::on_axis(
            "AB",
            0.0,
            1.0,
            WindowKind::Analytic,
            true,
        )));
    }
    let r = a / b;
    if r > 1.0 {
        return Ok(None);
    }
    let lo = r.sqrt();
    Ok(Some(EsdWindow::on_axis(
        "AB",
        lo,
        1.0,
        WindowKind::Analytic,
        lo == 1.0,
    )))
}

/// Death window of the atom with the opposite bath in the phi family:
/// `z^2 in [1/2 - s, 1/2 + s]` with `s = sqrt(1/4 - |alpha/beta|^2)`,
/// present whenever |beta| >= 2 |alpha| and collapsing to a point at
/// equality.
pub fn esd_window_ad(alpha: C64, beta: C64) -> Result<Option<EsdWindow>> {
    let (a, b) = amplitude_moduli(alpha, beta)?;
    if a == 0.0 || b == 0.0 {
        return Ok(Some(EsdWindow::on_axis(
            "AD",
            0.0,
            1.0,
            WindowKind::Analytic,
            true,
        )));
    }
    let r = a / b;
    let disc = 0.25 - r * r;
    if disc < 0.0 {
        return Ok(None);
    }
    let s = disc.sqrt();
    Ok(Some(EsdWindow::on_axis(
        "AD",
        (0.5 - s).sqrt(),
        (0.5 + s).sqrt(),
        WindowKind::Analytic,
        s == 0.0,
    )))
}

/// Overlap of the AB and AD windows: the z range where both pairs are dead
/// at once. When both windows exist this is `[sqrt(|alpha/beta|), hi_AD]`.
pub fn simultaneous_window(alpha: C64, beta: C64) -> Result<Option<EsdWindow>> {
    let ab = esd_window_ab(alpha, beta)?;
    let ad = esd_window_ad(alpha, beta)?;
    match (ab, ad) {
        (Some(ab), Some(ad)) => {
            let lo = ab.z_lo.max(ad.z_lo);
            let hi = ab.z_hi.min(ad.z_hi);
            if lo > hi {
                return Ok(None);
            }
            Ok(Some(EsdWindow::on_axis(
                "AB+AD",
                lo,
                hi,
                WindowKind::Analytic,
                ab.degenerate || ad.degenerate || lo == hi,
            )))
        }
        _ => Ok(None),
    }
}

/// Find maximal intervals where a sampled nonnegative concurrence curve
/// sits at zero.
///
/// `samples` are `(x, value)` pairs on a strictly increasing grid; runs of
/// samples with `value <= tol` seed the windows and `f` (the underlying
/// curve, not the samples) is bisected to refine interior boundaries to
/// about 1e-6 in x. Concurrences clamp at zero, so a death region is an
/// exact zero set and the bisection tracks the boundary of `f(x) = 0`;
/// should a run contain no exact zeros at all (a curve hovering below
/// `tol`), the refinement degrades to the sampled run itself. Runs that
/// refine to less than 1e-6 in width are zeros the curve merely touches,
/// possibly flatly, not death intervals, and are dropped, as is any run
/// whose refined midpoint fails `f(mid) <= tol`.
pub fn detect_zero_intervals(
    pair: &str,
    samples: &[(f64, f64)],
    f: &dyn Fn(f64) -> f64,
    tol: f64,
) -> Result<Vec<EsdWindow>> {
    if samples.len() < 2 {
        return Err(Error::invalid("samples", "need at least two samples"));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::invalid(
                "samples",
                "grid must be strictly increasing",
            ));
        }
    }
    if samples.iter().any(|&(_, y)| y < -1e-9) {
        return Err(Error::invalid(
            "samples",
            "concurrence values must be nonnegative",
        ));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid("tol", "tolerance must be nonnegative"));
    }

    // bisect the boundary of { x : f(x) = 0 } inside [live, dead]
    let refine = |mut live: f64, mut dead: f64| -> f64 {
        for _ in 0..80 {
            let mid = 0.5 * (live + dead);
            if f(mid) <= 0.0 {
                dead = mid;
            } else {
                live = mid;
            }
            if (dead - live).abs() < 1e-14 * (1.0 + dead.abs()) {
                break;
            }
        }
        0.5 * (live + dead)
    };

    let n = samples.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if samples[i].1 > tol {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && samples[i + 1].1 <= tol {
            i += 1;
        }
        let end = i;
        let lo = if start == 0 {
            samples[0].0
        } else {
            refine(samples[start - 1].0, samples[start].0)
        };
        let hi = if end == n - 1 {
            samples[n - 1].0
        } else {
            refine(samples[end + 1].0, samples[end].0)
        };
        if hi - lo >= MIN_WINDOW_WIDTH && f(0.5 * (lo + hi)) <= tol {
            out.push(EsdWindow::on_axis(pair, lo, hi, WindowKind::Numeric, false));
        }
        i += 1;
    }
    Ok(out)
}

/// One row of an amplitude sweep: the windows at a given admixture and the
/// largest four-party excess along the z grid.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub ab: Option<EsdWindow>,
    pub ad: Option<EsdWindow>,
    pub simultaneous: Option<EsdWindow>,
    pub max_excess: f64,
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// The AB death threshold moves up as the protected branch grows
    /// (degenerate windows excluded).
    pub ab_lo_increasing: bool,
    /// The AD window shrinks as the ratio approaches 1/2
    /// (degenerate windows excluded).
    pub ad_width_decreasing: bool,
}

/// Scan normalized amplitude pairs `alpha in [0, 1]`, `beta = sqrt(1 -
/// alpha^2)`, and collect the phi-family windows plus simple monotonicity
/// facts about their endpoints. `max_excess` in each row is the largest
/// four-party excess over a 501-point z grid.
pub fn sweep(resolution: usize) -> Result<SweepTable> {
    if resolution < 2 {
        return Err(Error::invalid("resolution", "need at least two rows"));
    }
    let bath = BathSpec::SingleMode { g: 1.0 };
    let z_points = 501;
    // rows are independent; the pool assembles them back in index order, so
    // the table is identical for any worker count
    let indices: Vec<usize> = (0..resolution).collect();
    let rows = crate::parallel::parallel_map(&indices, |&k| -> Result<SweepRow> {
        let alpha = k as f64 / (resolution - 1) as f64;
        let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
        let (ca, cb) = (C64::new(alpha, 0.0), C64::new(beta, 0.0));
        let mut max_excess = 0.0_f64;
        for j in 0..z_points {
            let z = j as f64 / (z_points - 1) as f64;
            let pair = AmplitudePair::from_z(z, &bath)?;
            let forms = closed_forms_double_jc(&pair, ca, cb, DoubleJcKind::Phi)?;
            max_excess = max_excess.max(forms.residual);
        }
        Ok(SweepRow {
            alpha,
            beta,
            ab: esd_window_ab(ca, cb)?,
            ad: esd_window_ad(ca, cb)?,
            simultaneous: simultaneous_window(ca, cb)?,
            max_excess,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut ab_lo_increasing = true;
    let mut ad_width_decreasing = true;
    let mut prev_ab_lo: Option<f64> = None;
    let mut prev_ad_width: Option<f64> = None;
    for row in &rows {
        if let Some(ab) = row.ab.as_ref().filter(|w| !w.degenerate) {
            if let Some(prev) = prev_ab_lo {
                if ab.z_lo < prev {
                    ab_lo_increasing = false;
                }
            }
            prev_ab_lo = Some(ab.z_lo);
        }
        if let Some(ad) = row.ad.as_ref().filter(|w| !w.degenerate) {
            if let Some(prev) = prev_ad_width {
                if ad.width() > prev {
                    ad_width_decreasing = false;
                }
            }
            prev_ad_width = Some(ad.width());
        }
    }
    Ok(SweepTable {
        rows,
        ab_lo_increasing,
        ad_width_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ab_window_formula() {
        let (a, b) = (0.1_f64.sqrt(), 0.9_f64.sqrt());
        let w = esd_window_ab(c(a), c(b)).unwrap().unwrap();
        assert_abs_diff_eq!(w.z_lo, (a / b).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(w.z_hi, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.chi2_lo, a / b, epsilon = 1e-15);
        assert!(!w.degenerate);
        // no window once the fragile branch dominates
        assert!(esd_window_ab(c(0.8), c(0.6)).unwrap().is_none());
        // equal amplitudes: death only at the exact swap point
        let h = 0.5_f64.sqrt();
        let w = esd_window_ab(c(h), c(h)).unwrap().unwrap();
        assert_abs_diff_eq!(w.z_lo, 1.0, epsilon = 1e-12);
        assert!(w.degenerate);
    }

    #[test]
    fn ad_window_formula() {
        let (a, b) = (0.1_f64.sqrt(), 0.9_f64.sqrt());
        let w = esd_window_ad(c(a), c(b)).unwrap().unwrap();
        let r = a / b;
        let s = (0.25 - r * r).sqrt();
        assert_abs_diff_eq!(w.z_lo, (0.5 - s).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(w.z_hi, (0.5 + s).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(w.chi2_lo, 0.5 - s, epsilon = 1e-15);
        assert_abs_diff_eq!(w.chi2_hi, 0.5 + s, epsilon = 1e-15);
        // requires beta >= 2 alpha
        assert!(esd_window_ad(c(0.6), c(0.8)).unwrap().is_none());
        // collapses to a point at the threshold ratio
        let a5 = 1.0 / 5.0_f64.sqrt();
        let w = esd_window_ad(c(a5), c(2.0 * a5)).unwrap().unwrap();
        assert!(w.degenerate);
        assert_abs_diff_eq!(w.z_lo, 0.5_f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(w.width(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reference_endpoints_for_the_figure_amplitudes() {
        // rounded amplitude pair; the ratio is all that matters
        let (alpha, beta) = (c(0.429), c(0.905));
        let ab = esd_window_ab(alpha, beta).unwrap().unwrap();
        assert_abs_diff_eq!(ab.z_lo, 0.689, epsilon = 2e-3);
        let ad = esd_window_ad(alpha, beta).unwrap().unwrap();
        assert_abs_diff_eq!(ad.z_lo, 0.584, epsilon = 2e-3);
        assert_abs_diff_eq!(ad.z_hi, 0.812, epsilon = 2e-3);
        let both = simultaneous_window(alpha, beta).unwrap().unwrap();
        assert_abs_diff_eq!(both.z_lo, ab.z_lo, epsilon = 1e-15);
        assert_abs_diff_eq!(both.z_hi, ad.z_hi, epsilon = 1e-15);
    }

    #[test]
    fn simultaneous_window_is_the_interval_intersection() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            // sample beta > 2 alpha so every window exists
            let a: f64 = rng.gen_range(0.01..0.44);
            let b = (1.0 - a * a).sqrt();
            if b <= 2.0 * a {
                continue;
            }
            let ab = esd_window_ab(c(a), c(b)).unwrap().unwrap();
            let ad = esd_window_ad(c(a), c(b)).unwrap().unwrap();
            let both = simultaneous_window(c(a), c(b)).unwrap().unwrap();
            assert_abs_diff_eq!(both.z_lo, ab.z_lo.max(ad.z_lo), epsilon = 1e-12);
            assert_abs_diff_eq!(both.z_hi, ab.z_hi.min(ad.z_hi), epsilon = 1e-12);
        }
        // no overlap to report when the AD window is absent
        assert!(simultaneous_window(c(0.6), c(0.8)).unwrap().is_none());
    }

    #[test]
    fn degenerate_pairs_give_full_trivial_windows() {
        let w = esd_window_ab(c(0.0), c(1.0)).unwrap().unwrap();
        assert!(w.degenerate);
        assert_eq!((w.z_lo, w.z_hi), (0.0, 1.0));
        let w = esd_window_ad(c(0.0), c(1.0)).unwrap().unwrap();
        assert!(w.degenerate);
        let w = esd_window_ab(c(1.0), c(0.0)).unwrap().unwrap();
        assert!(w.degenerate);
    }

    #[test]
    fn rejects_wildly_denormalized_amplitudes() {
        assert!(esd_window_ab(c(1.0), c(1.0)).is_err());
        assert!(esd_window_ad(c(0.2), c(0.3)).is_err());
    }

    #[test]
    fn zero_interval_detection_on_a_synthetic_curve() {
        let f = |x: f64| (0.3 - x).max(0.0) + (x - 0.6).max(0.0);
        let samples: Vec<(f64, f64)> = (0..=1000)
            .map(|k| {
                let x = k as f64 / 1000.0;
                (x, f(x))
            })
            .collect();
        let got = detect_zero_intervals("AB", &samples, &f, 1e-12).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].kind, WindowKind::Numeric);
        assert_abs_diff_eq!(got[0].z_lo, 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(got[0].z_hi, 0.6, epsilon = 1e-6);
    }

    #[test]
    fn isolated_zeros_are_not_windows() {
        // |x - 0.5| touches zero exactly on a grid point
        let f = |x: f64| (x - 0.5).abs();
        let samples: Vec<(f64, f64)> = (0..=100)
            .map(|k| {
                let x = k as f64 / 100.0;
                (x, f(x))
            })
            .collect();
        let got = detect_zero_intervals("AB", &samples, &f, 1e-9).unwrap();
        assert!(got.is_empty(), "{got:?}");
        // identically positive curve: nothing to report
        let g = |_: f64| 0.25;
        let samples: Vec<(f64, f64)> = (0..=100).map(|k| (k as f64, 0.25)).collect();
        assert!(detect_zero_intervals("AB", &samples, &g, 1e-9)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn detection_validates_its_input() {
        let f = |_: f64| 1.0;
        let bad_grid = [(0.0, 1.0), (0.0, 1.0)];
        assert!(detect_zero_intervals("AB", &bad_grid, &f, 1e-9).is_err());
        let short = [(0.5, 1.0)];
        assert!(detect_zero_intervals("AB", &short, &f, 1e-9).is_err());
        let negative = [(0.0, 1.0), (1.0, -1e-3)];
        assert!(detect_zero_intervals("AB", &negative, &f, 1e-9).is_err());
    }

    #[test]
    fn numeric_windows_match_analytic_endpoints() {
        let (alpha, beta) = (c(0.1_f64.sqrt()), c(0.9_f64.sqrt()));
        let eval = |key: &'static str, z: f64| {
            let bath = BathSpec::SingleMode { g: 1.0 };
            let pair = AmplitudePair::from_z(z, &bath).unwrap();
            closed_forms_double_jc(&pair, alpha, beta, DoubleJcKind::Phi)
                .unwrap()
                .pair(key)
                .unwrap()
        };
        for (key, want) in [
            ("AB", esd_window_ab(alpha, beta).unwrap().unwrap()),
            ("AD", esd_window_ad(alpha, beta).unwrap().unwrap()),
        ] {
            let f = |z: f64| eval(key, z);
            let samples: Vec<(f64, f64)> = (0..=2000)
                .map(|k| {
                    let z = k as f64 / 2000.0;
                    (z, f(z))
                })
                .collect();
            let got = detect_zero_intervals(key, &samples, &f, 1e-9).unwrap();
            assert_eq!(got.len(), 1, "{key}: {got:?}");
            assert_abs_diff_eq!(got[0].z_lo, want.z_lo, epsilon = 1e-5);
            assert_abs_diff_eq!(got[0].z_hi, want.z_hi, epsilon = 1e-5);
        }
    }

    #[test]
    fn sweep_reports_monotone_endpoints() {
        let table = sweep(101).unwrap();
        assert_eq!(table.rows.len(), 101);
        assert!(table.ab_lo_increasing);
        assert!(table.ad_width_decreasing);
        for row in &table.rows {
            // AD windows exist exactly while beta >= 2 alpha (the alpha = 1
            // endpoint is the trivial flagged window)
            if row.alpha > 0.0 && row.beta > 0.0 {
                assert_eq!(
                    row.ad.is_some(),
                    row.beta >= 2.0 * row.alpha,
                    "alpha = {}",
                    row.alpha
                );
            }
            if let (Some(ab), Some(sim)) = (&row.ab, &row.simultaneous) {
                assert!(sim.z_lo >= ab.z_lo - 1e-15);
            }
            assert!(row.max_excess >= -1e-12);
        }
        // the alpha = 0 row keeps the full formula-limit AD window
        let first = &table.rows[0];
        let ad = first.ad.as_ref().unwrap();
        assert_eq!((ad.z_lo, ad.z_hi), (0.0, 1.0));
        assert!(first.ab.as_ref().unwrap().degenerate);
        assert!(sweep(1).is_err());
    }
}
