//! Entanglement measures: two-qubit concurrence, pure-state bipartition
//! concurrence, monogamy residuals, and a convex-roof optimizer for rank-2
//! mixed states with one non-qubit side.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, kron, pauli_y, psd_sqrt, CMatrix, C_ZERO};
use crate::state::{partial_trace_pure, DensityMatrix, StateVector, SubsystemLayout};

/// Square roots of the flip-spectrum eigenvalues, descending, plus the
/// concurrence they induce.
#[derive(Clone, Debug)]
pub struct WoottersSpectrum {
    pub roots: [f64; 4],
    pub concurrence: f64,
}

/// Two-qubit mixed-state concurrence.
///
/// The usual prescription diagonalizes rho * (Y rho^* Y) and takes square
/// roots of its eigenvalues. Done literally, a true zero eigenvalue computed
/// as ~1e-16 surfaces as a ~1e-8 root, which is fatal at the tolerances the
/// identities downstream are held to. Instead we form G = S Y S^T with
/// S = sqrt(rho): since S^* = S^T, the Hermitian product G G^dag equals
/// S (Y rho^* Y) S, whose spectrum matches rho * (Y rho^* Y). The wanted
/// roots are therefore the singular values of G, read off exactly from the
/// Hermitian embedding [[0, G], [G^dag, 0]].
pub fn concurrence_two_qubit(rho: &DensityMatrix) -> Result<WoottersSpectrum> {
    let dims = rho.layout().dims();
    if dims != [2, 2] {
        return Err(Error::Dimension(format!(
            "two-qubit concurrence needs a 2x2 layout, got {dims:?}"
        )));
    }
    let s = psd_sqrt(rho.matrix())?;
    let y = kron(&pauli_y(), &pauli_y());
    let g = s.mul(&y).mul(&s.transpose());

    let mut w = CMatrix::zeros(8, 8);
    for i in 0..4 {
        for j in 0..4 {
            w[(i, 4 + j)] = g[(i, j)];
            w[(4 + i, j)] = g[(j, i)].conj();
        }
    }
    let (vals, _) = herm_eig(&w)?;
    // spectrum is {+/- sigma_i}; the top four are the singular values
    let mut roots = [0.0_f64; 4];
    for k in 0..4 {
        roots[k] = vals[7 - k].max(0.0);
    }
    let concurrence = (roots[0] - roots[1] - roots[2] - roots[3]).max(0.0);
    Ok(WoottersSpectrum { roots, concurrence })
}

/// Concurrence of a pure state across the cut (side | rest),
/// sqrt(2 (1 - tr reduced^2)). For a qubit-sized side this equals
/// 2 sqrt(det reduced); for larger sides it is the I-concurrence.
///
/// Evaluated as a sum of squared 2x2 minors of the (side x rest) amplitude
/// matrix: by Cauchy-Binet, tr^2 - tr(reduced^2) = 2 sum |minor|^2, which
/// avoids the cancellation that makes the purity route lose half its digits
/// whenever the cut is nearly unentangled.
pub fn concurrence_pure_bipartition(state: &StateVector, side: &[&str]) -> Result<f64> {
    if side.len() >= state.layout().len() {
        return Err(Error::invalid(
            "side",
            "bipartition side must leave at least one subsystem on the other side",
        ));
    }
    let kept_labels = {
        // resolve to layout order so the offset tables line up
        let probe = partial_trace_pure(state, side)?;
        probe
            .layout()
            .labels()
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    let kept_refs: Vec<&str> = kept_labels.iter().map(String::as_str).collect();
    let mut keep_offsets = Vec::new();
    let mut trace_offsets = Vec::new();
    offsets_for(
        state.layout(),
        &kept_refs,
        &mut keep_offsets,
        &mut trace_offsets,
    )?;

    let psi = state.amplitudes();
    let at = |a: usize, e: usize| psi[keep_offsets[a] + trace_offsets[e]];
    let k = keep_offsets.len();
    let m = trace_offsets.len();
    let mut sum_minors = 0.0_f64;
    for a in 0..k {
        for b in a + 1..k {
            for e in 0..m {
                for f in e + 1..m {
                    sum_minors += (at(a, e) * at(b, f) - at(a, f) * at(b, e)).norm_sqr();
                }
            }
        }
    }
    let trace: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    Ok(2.0 * sum_minors.sqrt() / trace)
}

/// One focus subsystem against its partners: the bipartition concurrence,
/// every pairwise concurrence, and the residual
/// `focus_rest^2 - sum(pair^2)`.
#[derive(Clone, Debug)]
pub struct TangleReport {
    pub focus: String,
    pub focus_rest: f64,
    pub pairs: Vec<(String, f64)>,
    pub residual: f64,
}

fn monogamy_report(
    state: &StateVector,
    focus: &str,
    others: &[&str],
    roof_opts: &RoofOptions,
) -> Result<TangleReport> {
    let layout = state.layout();
    if others.len() + 1 != layout.len() {
        return Err(Error::invalid(
            "others",
            format!(
                "need the {} non-focus subsystems, got {}",
                layout.len() - 1,
                others.len()
            ),
        ));
    }
    let mut all: Vec<&str> = Vec::with_capacity(others.len() + 1);
    all.push(focus);
    all.extend_from_slice(others);
    for l in &all {
        layout.position(l)?;
        if all.iter().filter(|x| *x == l).count() > 1 {
            return Err(Error::DuplicateLabel(l.to_string()));
        }
    }
    if layout.dim_of(focus)? != 2 {
        return Err(Error::Dimension(format!(
            "focus `{focus}` must be a qubit, dim is {}",
            layout.dim_of(focus)?
        )));
    }

    let focus_rest = concurrence_pure_bipartition(state, &[focus])?;
    let mut pairs = Vec::with_capacity(others.len());
    let mut sum_sq = 0.0;
    for other in others {
        let pair = partial_trace_pure(state, &[focus, other])?;
        let c = if layout.dim_of(other)? == 2 {
            concurrence_two_qubit(&pair)?.concurrence
        } else {
            roof_concurrence_rank2_with(&pair, &[focus], roof_opts)?.value
        };
        sum_sq += c * c;
        pairs.push((other.to_string(), c));
    }
    Ok(TangleReport {
        focus: focus.to_string(),
        focus_rest,
        pairs,
        residual: focus_rest * focus_rest - sum_sq,
    })
}

/// Three-party residual tangle of a pure state. Pairs with a qubit partner
/// go through the closed-form concurrence; a qutrit (or larger) partner goes
/// through the rank-2 convex roof, which applies because tracing out the
/// remaining qubit leaves support of rank at most two.
pub fn residual_tangle(
    state: &StateVector,
    focus: &str,
    others: [&str; 2],
) -> Result<TangleReport> {
    monogamy_report(state, focus, &others, &RoofOptions::default())
}

pub fn residual_tangle_with(
    state: &StateVector,
    focus: &str,
    others: [&str; 2],
    roof_opts: &RoofOptions,
) -> Result<TangleReport> {
    monogamy_report(state, focus, &others, roof_opts)
}

/// Four-party analogue: `focus_rest^2 - sum of the three squared pair
/// concurrences`. All four subsystems must be qubits.
pub fn residual_excess(
    state: &StateVector,
    focus: &str,
    others: [&str; 3],
) -> Result<TangleReport> {
    for l in others.iter().chain([&focus]) {
        if state.layout().dim_of(l)? != 2 {
            return Err(Error::Dimension(format!(
                "four-party residual needs qubits, `{l}` has dim {}",
                state.layout().dim_of(l)?
            )));
        }
    }
    monogamy_report(state, focus, &others, &RoofOptions::default())
}

#[derive(Clone, Debug)]
pub struct RoofOptions {
    /// Points per angle in the initial scan (grid^3 evaluations).
    pub grid: usize,
    /// Extra random descent starts on top of the grid winner.
    pub restarts: usize,
    pub seed: u64,
    /// Descent terminates once the step size drops below this.
    pub step_tol: f64,
}

impl Default for RoofOptions {
    fn default() -> Self {
        RoofOptions {
            grid: 32,
            restarts: 0,
            seed: 0,
            step_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RoofResult {
    pub value: f64,
    /// Weights and normalized pure states realizing `value`.
    pub decomposition: Vec<(f64, StateVector)>,
}

const ROOF_RANK_TOL: f64 = 1e-8;

/// Convex-roof concurrence of a rank-2 density matrix across the cut
/// (side | rest), minimizing the average pure-state concurrence over all
/// two-element decompositions.
///
/// Any such decomposition comes from a 2x2 unitary mixing the weighted
/// eigenvectors of the support, so the search space is three angles:
///   w1 = cos(t) u1 + sin(t) e^{i p1} u2
///   w2 = -sin(t) e^{i p2} u1 + cos(t) e^{i (p1 + p2)} u2
/// A full grid scan (guaranteed to see the eigendecomposition at t = 0)
/// seeds a coordinate descent with shrinking steps.
pub fn roof_concurrence_rank2(rho: &DensityMatrix, side: &[&str]) -> Result<RoofResult> {
    roof_concurrence_rank2_with(rho, side, &RoofOptions::default())
}

pub fn roof_concurrence_rank2_with(
    rho: &DensityMatrix,
    side: &[&str],
    opts: &RoofOptions,
) -> Result<RoofResult> {
    let layout = rho.layout();
    if side.len() >= layout.len() {
        return Err(Error::invalid(
            "side",
            "bipartition side must leave at least one subsystem on the other side",
        ));
    }
    let (vals, vecs) = herm_eig(rho.matrix())?;
    let n = vals.len();
    let rank = vals.iter().filter(|&&l| l > ROOF_RANK_TOL).count();
    if rank > 2 {
        return Err(Error::RankTooHigh {
            found: rank,
            max: 2,
        });
    }

    let p1 = vals[n - 1].max(0.0);
    let p2 = if n >= 2 { vals[n - 2].max(0.0) } else { 0.0 };

    let column =
        |k: usize, w: f64| -> Vec<C64> { (0..n).map(|i| vecs[(i, k)] * w.sqrt()).collect() };

    if p2 <= 1e-12 {
        // pure within tolerance: the roof is the state's own concurrence
        let psi = StateVector::normalized(layout.clone(), column(n - 1, 1.0))?;
        let value = concurrence_pure_bipartition(&psi, side)?;
        return Ok(RoofResult {
            value,
            decomposition: vec![(1.0, psi)],
        });
    }

    let u1 = column(n - 1, p1);
    let u2 = column(n - 2, p2);
    let eval = RoofObjective::new(layout, side, u1, u2)?;

    let grid = opts.grid.max(32);
    let mut best = (f64::INFINITY, [0.0f64; 3]);
    for it in 0..grid {
        let theta = std::f64::consts::FRAC_PI_2 * it as f64 / grid as f64;
        for ip1 in 0..grid {
            let phi1 = std::f64::consts::TAU * ip1 as f64 / grid as f64;
            for ip2 in 0..grid {
                let phi2 = std::f64::consts::TAU * ip2 as f64 / grid as f64;
                let v = eval.average([theta, phi1, phi2]);
                if v < best.0 {
                    best = (v, [theta, phi1, phi2]);
                }
            }
        }
    }

    let steps0 = [
        std::f64::consts::FRAC_PI_2 / grid as f64,
        std::f64::consts::TAU / grid as f64,
        std::f64::consts::TAU / grid as f64,
    ];
    best = eval.descend(best.1, steps0, opts.step_tol).min_by_key(best);

    if opts.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.restarts {
            let start = [
                rng.gen_range(0.0..std::f64::consts::FRAC_PI_2),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
            ];
            best = eval.descend(start, steps0, opts.step_tol).min_by_key(best);
        }
    }

    let (w1, w2) = eval.vectors(best.1);
    let mut decomposition = Vec::new();
    for w in [w1, w2] {
        let weight: f64 = w.iter().map(|a| a.norm_sqr()).sum();
        if weight > 1e-12 {
            decomposition.push((weight, StateVector::normalized(layout.clone(), w)?));
        }
    }
    Ok(RoofResult {
        value: best.0,
        decomposition,
    })
}

trait MinByKey {
    fn min_by_key(self, other: Self) -> Self;
}

impl MinByKey for (f64, [f64; 3]) {
    fn min_by_key(self, other: Self) -> Self {
        if self.0 <= other.0 {
            self
        } else {
            other
        }
    }
}

/// Precomputed machinery for evaluating the average concurrence of a
/// two-element decomposition, allocation-free in the hot path.
struct RoofObjective {
    u1: Vec<C64>,
    u2: Vec<C64>,
    keep_offsets: Vec<usize>,
    trace_offsets: Vec<usize>,
}

impl RoofObjective {
    fn new(
        layout: &SubsystemLayout,
        side: &[&str],
        u1: Vec<C64>,
        u2: Vec<C64>,
    ) -> Result<RoofObjective> {
        // reuse the partial-trace bookkeeping via a scratch reduction
        let probe =
            StateVector::normalized(layout.clone(), vec![C64::new(1.0, 0.0); layout.total_dim()])?;
        let reduced = partial_trace_pure(&probe, side)?;
        let dk = reduced.matrix().rows();
        let dt = layout.total_dim() / dk;
        // recover the exact offset tables with the same ordering rules
        let kept: Vec<&str> = reduced.layout().labels().collect();
        let mut keep_offsets = Vec::with_capacity(dk);
        let mut trace_offsets = Vec::with_capacity(dt);
        offsets_for(layout, &kept, &mut keep_offsets, &mut trace_offsets)?;
        Ok(RoofObjective {
            u1,
            u2,
            keep_offsets,
            trace_offsets,
        })
    }

    fn vectors(&self, angles: [f64; 3]) -> (Vec<C64>, Vec<C64>) {
        let [theta, phi1, phi2] = angles;
        let (c, s) = (theta.cos(), theta.sin());
        let e1 = C64::new(0.0, phi1).exp();
        let e2 = C64::new(0.0, phi2).exp();
        let n = self.u1.len();
        let mut w1 = Vec::with_capacity(n);
        let mut w2 = Vec::with_capacity(n);
        for i in 0..n {
            w1.push(self.u1[i] * c + self.u2[i] * (e1 * s));
            w2.push(self.u1[i] * (-s * e2) + self.u2[i] * (c * e1 * e2));
        }
        (w1, w2)
    }

    /// Sum over the two branches of weight * concurrence, which for an
    /// unnormalized branch w reduces to sqrt(2 (|w|^4 - tr reduced(w)^2)).
    fn average(&self, angles: [f64; 3]) -> f64 {
        let (w1, w2) = self.vectors(angles);
        self.branch(&w1) + self.branch(&w2)
    }

    fn branch(&self, w: &[C64]) -> f64 {
        let dk = self.keep_offsets.len();
        let mut norm_sq = 0.0;
        let mut purity = 0.0;
        for a in 0..dk {
            for b in a..dk {
                let mut acc = C_ZERO;
                for &e in &self.trace_offsets {
                    acc += w[self.keep_offsets[a] + e] * w[self.keep_offsets[b] + e].conj();
                }
                if a == b {
                    norm_sq += acc.re;
                    purity += acc.norm_sqr();
                } else {
                    purity += 2.0 * acc.norm_sqr();
                }
            }
        }
        (2.0 * (norm_sq * norm_sq - purity).max(0.0)).sqrt()
    }

    fn descend(&self, start: [f64; 3], steps0: [f64; 3], tol: f64) -> (f64, [f64; 3]) {
        let mut x = start;
        let mut f = self.average(x);
        let mut steps = steps0;
        while steps[1] > tol {
            let mut improved = false;
            for k in 0..3 {
                loop {
                    let mut candidates = [x; 2];
                    candidates[0][k] += steps[k];
                    candidates[1][k] -= steps[k];
                    let mut moved = false;
                    for cand in candidates {
                        let v = self.average(cand);
                        if v < f - 1e-15 {
                            f = v;
                            x = cand;
                            moved = true;
                            improved = true;
                            break;
                        }
                    }
                    if !moved {
                        break;
                    }
                }
            }
            if !improved {
                for s in &mut steps {
                    *s *= 0.5;
                }
            }
        }
        (f, x)
    }
}

/// Offset tables in the same order `partial_trace_pure` uses: kept labels in
/// layout order produce the reduced row-major index, traced labels likewise.
fn offsets_for(
    layout: &SubsystemLayout,
    keep: &[&str],
    keep_offsets: &mut Vec<usize>,
    trace_offsets: &mut Vec<usize>,
) -> Result<()> {
    let dims = layout.dims();
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut kept_pos: Vec<usize> = Vec::new();
    for l in keep {
        kept_pos.push(layout.position(l)?);
    }
    kept_pos.sort_unstable();
    let traced_pos: Vec<usize> = (0..dims.len()).filter(|p| !kept_pos.contains(p)).collect();

    let expand = |positions: &[usize], out: &mut Vec<usize>| {
        out.clear();
        out.push(0);
        for &p in positions {
            let mut next = Vec::with_capacity(out.len() * dims[p]);
            for &base in out.iter() {
                for i in 0..dims[p] {
                    next.push(base + i * strides[p]);
                }
            }
            *out = next;
        }
    };
    expand(&kept_pos, keep_offsets);
    expand(&traced_pos, trace_offsets);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::density_from_pure;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_qubits() -> SubsystemLayout {
        SubsystemLayout::new(&[("A", 2), ("B", 2)]).unwrap()
    }

    fn random_state(layout: &SubsystemLayout, rng: &mut ChaCha8Rng) -> StateVector {
        let amps: Vec<C64> = (0..layout.total_dim())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        StateVector::normalized(layout.clone(), amps).unwrap()
    }

    #[test]
    fn bell_state_concurrence_is_one() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::new(
            two_qubits(),
            vec![c(inv, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(inv, 0.0)],
        )
        .unwrap();
        let spec = concurrence_two_qubit(&density_from_pure(&psi)).unwrap();
        assert_abs_diff_eq!(spec.concurrence, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.roots[0], 1.0, epsilon = 1e-12);
        for k in 1..4 {
            assert!(spec.roots[k] < 1e-12);
        }
    }

    #[test]
    fn product_state_concurrence_is_zero() {
        let psi = StateVector::new(
            two_qubits(),
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let spec = concurrence_two_qubit(&density_from_pure(&psi)).unwrap();
        assert!(spec.concurrence < 1e-12);
    }

    #[test]
    fn pure_states_match_the_determinant_form_tightly() {
        // the rank-deficient regime is where a naive eigenvalue route loses
        // half the working precision; demand essentially full agreement
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let layout = two_qubits();
        for _ in 0..50 {
            let psi = random_state(&layout, &mut rng);
            let mixed = concurrence_two_qubit(&density_from_pure(&psi))
                .unwrap()
                .concurrence;
            let a = psi.amplitudes();
            let pure = 2.0 * (a[0] * a[3] - a[1] * a[2]).norm();
            assert_abs_diff_eq!(mixed, pure, epsilon = 1e-12);
        }
    }

    #[test]
    fn werner_family_matches_closed_form() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let layout = two_qubits();
        let bell: Vec<C64> = vec![c(inv, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(inv, 0.0)];
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let m = CMatrix::from_fn(4, 4, |i, j| {
                let pure = bell[i] * bell[j].conj() * p;
                if i == j {
                    pure + (1.0 - p) * 0.25
                } else {
                    pure
                }
            });
            let rho = DensityMatrix::new(layout.clone(), m).unwrap();
            let got = concurrence_two_qubit(&rho).unwrap().concurrence;
            let want = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert_abs_diff_eq!(got, want, epsilon = 1e-11);
        }
    }

    #[test]
    fn x_states_match_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let layout = two_qubits();
        for _ in 0..60 {
            let mut d: Vec<f64> = (0..4).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = d.iter().sum();
            for x in &mut d {
                *x /= total;
            }
            let z14 = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let z23 = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let z14 = z14 / z14.norm() * (d[0] * d[3]).sqrt() * rng.gen_range(0.0..1.0);
            let z23 = z23 / z23.norm() * (d[1] * d[2]).sqrt() * rng.gen_range(0.0..1.0);
            let mut m = CMatrix::zeros(4, 4);
            for i in 0..4 {
                m[(i, i)] = c(d[i], 0.0);
            }
            m[(0, 3)] = z14;
            m[(3, 0)] = z14.conj();
            m[(1, 2)] = z23;
            m[(2, 1)] = z23.conj();
            let rho = DensityMatrix::new(layout.clone(), m).unwrap();
            let got = concurrence_two_qubit(&rho).unwrap().concurrence;
            let want = 2.0
                * (z23.norm() - (d[0] * d[3]).sqrt())
                    .max(z14.norm() - (d[1] * d[2]).sqrt())
                    .max(0.0);
            assert_abs_diff_eq!(got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn concurrence_is_local_unitary_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let layout = two_qubits();
        for _ in 0..25 {
            let psi = random_state(&layout, &mut rng);
            let rho = density_from_pure(&psi);
            // random local unitaries from Hermitian generators
            let ha = random_herm2(&mut rng);
            let hb = random_herm2(&mut rng);
            let ua = crate::linalg::expm(&ha, 1.0, 1.0).unwrap();
            let ub = crate::linalg::expm(&hb, 1.0, 1.0).unwrap();
            let u = kron(&ua, &ub);
            let rotated = u.mul(rho.matrix()).mul(&u.dagger());
            let rho2 = DensityMatrix::new(layout.clone(), rotated).unwrap();
            let c1 = concurrence_two_qubit(&rho).unwrap().concurrence;
            let c2 = concurrence_two_qubit(&rho2).unwrap().concurrence;
            assert_abs_diff_eq!(c1, c2, epsilon = 1e-10);
        }
    }

    fn random_herm2(rng: &mut ChaCha8Rng) -> CMatrix {
        let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        CMatrix::from_rows(vec![
            vec![c(rng.gen_range(-1.0..1.0), 0.0), z],
            vec![z.conj(), c(rng.gen_range(-1.0..1.0), 0.0)],
        ])
    }

    #[test]
    fn rejects_wrong_layout() {
        let layout = SubsystemLayout::new(&[("A", 2), ("C", 3)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = density_from_pure(&random_state(&layout, &mut rng));
        assert!(concurrence_two_qubit(&rho).is_err());
    }

    #[test]
    fn ghz_and_w_residuals() {
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 2), ("C", 2)]).unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut ghz = vec![c(0.0, 0.0); 8];
        ghz[0] = c(inv, 0.0);
        ghz[7] = c(inv, 0.0);
        let ghz = StateVector::new(layout.clone(), ghz).unwrap();
        let report = residual_tangle(&ghz, "A", ["B", "C"]).unwrap();
        assert_abs_diff_eq!(report.residual, 1.0, epsilon = 1e-10);
        for (_, cval) in &report.pairs {
            assert!(*cval < 1e-10);
        }

        let inv3 = 1.0 / 3.0_f64.sqrt();
        let mut w = vec![c(0.0, 0.0); 8];
        w[0b011] = c(inv3, 0.0); // A up (index 0 = up)
        w[0b101] = c(inv3, 0.0);
        w[0b110] = c(inv3, 0.0);
        let w = StateVector::new(layout, w).unwrap();
        let report = residual_tangle(&w, "A", ["B", "C"]).unwrap();
        assert_abs_diff_eq!(
            report.focus_rest * report.focus_rest,
            8.0 / 9.0,
            epsilon = 1e-10
        );
        for (_, cval) in &report.pairs {
            assert_abs_diff_eq!(*cval, 2.0 / 3.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(report.residual, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn residual_is_nonnegative_on_random_three_qubit_states() {
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 2), ("C", 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..40 {
            let psi = random_state(&layout, &mut rng);
            let report = residual_tangle(&psi, "A", ["B", "C"]).unwrap();
            assert!(report.residual >= -1e-9, "residual {}", report.residual);
        }
    }

    #[test]
    fn four_party_excess_on_ghz4() {
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 2), ("C", 2), ("D", 2)]).unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut ghz = vec![c(0.0, 0.0); 16];
        ghz[0] = c(inv, 0.0);
        ghz[15] = c(inv, 0.0);
        let ghz = StateVector::new(layout, ghz).unwrap();
        let report = residual_excess(&ghz, "A", ["B", "C", "D"]).unwrap();
        assert_abs_diff_eq!(report.residual, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn residual_rejects_bad_partitions() {
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 2), ("C", 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_state(&layout, &mut rng);
        assert!(residual_tangle(&psi, "A", ["B", "B"]).is_err());
        assert!(residual_tangle(&psi, "A", ["B", "X"]).is_err());
        assert!(residual_tangle(&psi, "A", ["A", "B"]).is_err());
    }

    #[test]
    fn roof_agrees_with_wootters_on_rank2_two_qubit_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let layout = two_qubits();
        let opts = RoofOptions {
            restarts: 2,
            seed: 9,
            ..RoofOptions::default()
        };
        for trial in 0..12 {
            let psi1 = random_state(&layout, &mut rng);
            let psi2 = random_state(&layout, &mut rng);
            let p: f64 = rng.gen_range(0.1..0.9);
            let m1 = density_from_pure(&psi1);
            let m2 = density_from_pure(&psi2);
            let mix = m1
                .matrix()
                .scale(c(p, 0.0))
                .add(&m2.matrix().scale(c(1.0 - p, 0.0)));
            let rho = DensityMatrix::new(layout.clone(), mix).unwrap();
            let exact = concurrence_two_qubit(&rho).unwrap().concurrence;
            let roof = roof_concurrence_rank2_with(&rho, &["A"], &opts).unwrap();
            assert!(
                (roof.value - exact).abs() < 2e-3,
                "trial {trial}: roof {} vs wootters {}",
                roof.value,
                exact
            );
            // roof never undercuts the true minimum
            assert!(roof.value > exact - 1e-9);
        }
    }

    #[test]
    fn roof_decomposition_reconstructs_the_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let layout = SubsystemLayout::new(&[("A", 2), ("C", 3)]).unwrap();
        let psi1 = random_state(&layout, &mut rng);
        let psi2 = random_state(&layout, &mut rng);
        let mix = density_from_pure(&psi1)
            .matrix()
            .scale(c(0.4, 0.0))
            .add(&density_from_pure(&psi2).matrix().scale(c(0.6, 0.0)));
        let rho = DensityMatrix::new(layout.clone(), mix).unwrap();
        let roof = roof_concurrence_rank2(&rho, &["A"]).unwrap();
        let mut rebuilt = CMatrix::zeros(6, 6);
        for (wgt, state) in &roof.decomposition {
            let a = state.amplitudes();
            for i in 0..6 {
                for j in 0..6 {
                    rebuilt[(i, j)] += a[i] * a[j].conj() * *wgt;
                }
            }
        }
        assert!(rebuilt.max_abs_diff(rho.matrix()) < 1e-9);
        // never exceeds the average concurrence of the eigendecomposition
        let (vals, vecs) = herm_eig(rho.matrix()).unwrap();
        let mut eig_avg = 0.0;
        for k in 0..6 {
            if vals[k] > 1e-12 {
                let col: Vec<C64> = (0..6).map(|i| vecs[(i, k)]).collect();
                let v = StateVector::normalized(layout.clone(), col).unwrap();
                eig_avg += vals[k] * concurrence_pure_bipartition(&v, &["A"]).unwrap();
            }
        }
        assert!(roof.value <= eig_avg + 1e-12);
    }

    #[test]
    fn roof_rejects_rank_three() {
        let layout = two_qubits();
        let m = CMatrix::from_fn(4, 4, |i, j| {
            if i == j && i < 3 {
                c(1.0 / 3.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let rho = DensityMatrix::new(layout, m).unwrap();
        assert!(matches!(
            roof_concurrence_rank2(&rho, &["A"]),
            Err(Error::RankTooHigh { found: 3, max: 2 })
        ));
    }

    #[test]
    fn roof_on_pure_state_equals_bipartition_concurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let layout = SubsystemLayout::new(&[("A", 2), ("C", 3)]).unwrap();
        let psi = random_state(&layout, &mut rng);
        let rho = density_from_pure(&psi);
        let roof = roof_concurrence_rank2(&rho, &["A"]).unwrap();
        let direct = concurrence_pure_bipartition(&psi, &["A"]).unwrap();
        assert_abs_diff_eq!(roof.value, direct, epsilon = 1e-10);
        assert_eq!(roof.decomposition.len(), 1);
    }
}
