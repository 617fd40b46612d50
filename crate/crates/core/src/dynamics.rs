//! Time evolution of one and two Jaynes-Cummings cells and the closed-form
//! concurrences their states carry.
//!
//! Conventions used throughout: atom index 0 is excited (up), index 1 is the
//! ground state; cavity levels count photons from 0. All couplings are on
//! resonance in the frame rotating at the atomic frequency, so the
//! interaction `g (raise * annihilate + lower * create)` is the whole
//! Hamiltonian and a decayed excitation picks up the phase -i.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{annihilation, expm, herm_eig, kron, CMatrix, C_ONE, C_ZERO};
use crate::state::{reorder_subsystems, StateVector, SubsystemLayout, NORM_TOL};

/// Environment seen by the atom of each cell.
#[derive(Clone, Debug, PartialEq)]
pub enum BathSpec {
    /// One lossless resonant cavity mode.
    SingleMode { g: f64 },
    /// Memoryless decay at rate `gamma` (the flat-continuum limit).
    Markovian { gamma: f64 },
    /// `modes` equally spaced discrete modes with flat coupling `g`,
    /// detunings centered on `center_detuning`.
    Comb {
        modes: usize,
        g: f64,
        spacing: f64,
        center_detuning: f64,
    },
}

impl BathSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BathSpec::SingleMode { g } => {
                if !(g > 0.0) || !g.is_finite() {
                    return Err(Error::invalid(
                        "g",
                        format!("coupling must be > 0, got {g}"),
                    ));
                }
            }
            BathSpec::Markovian { gamma } => {
                if !(gamma > 0.0) || !gamma.is_finite() {
                    return Err(Error::invalid(
                        "gamma",
                        format!("decay rate must be > 0, got {gamma}"),
                    ));
                }
            }
            BathSpec::Comb {
                modes,
                g,
                spacing,
                center_detuning,
            } => {
                if modes == 0 {
                    return Err(Error::invalid("modes", "need at least one mode"));
                }
                if !(g > 0.0) || !g.is_finite() {
                    return Err(Error::invalid(
                        "g",
                        format!("coupling must be > 0, got {g}"),
                    ));
                }
                if !(spacing > 0.0) || !spacing.is_finite() {
                    return Err(Error::invalid(
                        "spacing",
                        format!("mode spacing must be > 0, got {spacing}"),
                    ));
                }
                if !center_detuning.is_finite() {
                    return Err(Error::invalid("detuning", "must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Detunings of the comb modes, ascending.
    pub fn comb_detunings(&self) -> Result<Vec<f64>> {
        match *self {
            BathSpec::Comb {
                modes,
                spacing,
                center_detuning,
                ..
            } => Ok((0..modes)
                .map(|k| center_detuning + (k as f64 - (modes as f64 - 1.0) / 2.0) * spacing)
                .collect()),
            _ => Err(Error::invalid("bath", "not a comb bath")),
        }
    }

    /// Golden-rule decay rate of the equivalent flat continuum,
    /// `2 pi g^2 / spacing`. Only meaningful for a comb.
    pub fn golden_rule_rate(&self) -> Result<f64> {
        match *self {
            BathSpec::Comb { g, spacing, .. } => Ok(2.0 * std::f64::consts::PI * g * g / spacing),
            _ => Err(Error::invalid("bath", "not a comb bath")),
        }
    }

    /// The characteristic rate that makes grid values dimensionless:
    /// g for cavity-style baths, gamma for the Markovian one.
    pub fn rate_scale(&self) -> f64 {
        match *self {
            BathSpec::SingleMode { g } => g,
            BathSpec::Markovian { gamma } => gamma,
            BathSpec::Comb { g, .. } => g,
        }
    }
}

/// Excitation-survival amplitude `xi` and collective-decay amplitude `chi`
/// of a single cell, plus per-mode amplitudes where the bath resolves them.
#[derive(Clone, Debug)]
pub struct AmplitudePair {
    pub xi: C64,
    pub chi: C64,
    /// One entry per bath mode; empty for the Markovian bath and for pairs
    /// built directly from a z value.
    pub mode_amplitudes: Vec<C64>,
}

impl AmplitudePair {
    pub fn validate(&self) -> Result<()> {
        let total = self.xi.norm_sqr() + self.chi.norm_sqr();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized((total - 1.0).abs()));
        }
        if !self.mode_amplitudes.is_empty() {
            let modes: f64 = self.mode_amplitudes.iter().map(|a| a.norm_sqr()).sum();
            if (modes - self.chi.norm_sqr()).abs() > NORM_TOL {
                return Err(Error::invalid(
                    "mode_amplitudes",
                    format!(
                        "mode weights sum to {modes}, chi carries {}",
                        self.chi.norm_sqr()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Build a pair directly from the transferred population `z = |chi|`,
    /// using the bath's natural phase: a resolved mode (or comb) imprints
    /// -i on the decayed branch, the Markovian amplitude is real.
    pub fn from_z(z: f64, bath: &BathSpec) -> Result<AmplitudePair> {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::invalid("z", format!("need 0 <= z <= 1, got {z}")));
        }
        let xi = C64::new((1.0 - z * z).max(0.0).sqrt(), 0.0);
        let chi = match bath {
            BathSpec::Markovian { .. } => C64::new(z, 0.0),
            _ => C64::new(0.0, -z),
        };
        Ok(AmplitudePair {
            xi,
            chi,
            mode_amplitudes: Vec::new(),
        })
    }
}

/// Reusable amplitude evaluator. For the comb this diagonalizes the
/// one-excitation sector once; `amplitudes` afterwards is a spectral sum.
pub struct AmplitudeModel {
    kind: ModelKind,
}

enum ModelKind {
    SingleMode {
        g: f64,
    },
    Markovian {
        gamma: f64,
    },
    Comb {
        energies: Vec<f64>,
        /// eigenvector components: row 0 is the atom, rows 1.. the modes
        vectors: CMatrix,
    },
}

impl AmplitudeModel {
    pub fn new(bath: &BathSpec) -> Result<AmplitudeModel> {
        bath.validate()?;
        let kind = match *bath {
            BathSpec::SingleMode { g } => ModelKind::SingleMode { g },
            BathSpec::Markovian { gamma } => ModelKind::Markovian { gamma },
            BathSpec::Comb { modes, g, .. } => {
                let detunings = bath.comb_detunings()?;
                let n = modes + 1;
                let mut h = CMatrix::zeros(n, n);
                for (k, &delta) in detunings.iter().enumerate() {
                    h[(k + 1, k + 1)] = C64::new(delta, 0.0);
                    h[(0, k + 1)] = C64::new(g, 0.0);
                    h[(k + 1, 0)] = C64::new(g, 0.0);
                }
                let (energies, vectors) = herm_eig(&h)?;
                ModelKind::Comb { energies, vectors }
            }
        };
        Ok(AmplitudeModel { kind })
    }

    pub fn amplitudes(&self, t: f64) -> Result<AmplitudePair> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid("t", format!("need t >= 0, got {t}")));
        }
        let pair = match &self.kind {
            ModelKind::SingleMode { g } => {
                let (s, c) = (g * t).sin_cos();
                AmplitudePair {
                    xi: C64::new(c, 0.0),
                    chi: C64::new(0.0, -s),
                    mode_amplitudes: vec![C64::new(0.0, -s)],
                }
            }
            ModelKind::Markovian { gamma } => {
                let xi = (-0.5 * gamma * t).exp();
                AmplitudePair {
                    xi: C64::new(xi, 0.0),
                    chi: C64::new((1.0 - xi * xi).max(0.0).sqrt(), 0.0),
                    mode_amplitudes: Vec::new(),
                }
            }
            ModelKind::Comb { energies, vectors } => {
                let n = energies.len();
                let phases: Vec<C64> = energies
                    .iter()
                    .map(|&e| C64::new(0.0, -e * t).exp())
                    .collect();
                // xi = <atom| exp(-iHt) |atom>
                let mut xi = C_ZERO;
                for j in 0..n {
                    xi += vectors[(0, j)].norm_sqr() * phases[j];
                }
                // lambda_k = <mode k| exp(-iHt) |atom>
                let mut mode_amplitudes = Vec::with_capacity(n - 1);
                let mut decayed = 0.0;
                let mut coherent_sum = C_ZERO;
                for k in 1..n {
                    let mut lam = C_ZERO;
                    for j in 0..n {
                        lam += vectors[(k, j)] * vectors[(0, j)].conj() * phases[j];
                    }
                    decayed += lam.norm_sqr();
                    coherent_sum += lam;
                    mode_amplitudes.push(lam);
                }
                // chi is defined up to the gauge of the collective mode; tag
                // it with the phase of the summed amplitude so one resolved
                // mode reproduces the -i sin(gt) cavity convention exactly
                let magnitude = decayed.sqrt();
                let chi = if coherent_sum.norm() > 1e-12 {
                    coherent_sum / coherent_sum.norm() * magnitude
                } else {
                    C64::new(0.0, -magnitude)
                };
                AmplitudePair {
                    xi,
                    chi,
                    mode_amplitudes,
                }
            }
        };
        pair.validate()?;
        Ok(pair)
    }
}

/// Survival/decay amplitudes after evolving for time `t`.
pub fn amplitude_pair(t: f64, bath: &BathSpec) -> Result<AmplitudePair> {
    AmplitudeModel::new(bath)?.amplitudes(t)
}

fn check_pair_norm(alpha: C64, beta: C64) -> Result<()> {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized((n - 1.0).abs()));
    }
    Ok(())
}

/// Two atoms sharing a cavity prepared in the vacuum; only atom A couples.
/// Initial state `(beta |up down> + alpha |down up>) |0>`.
/// Layout: A (qubit), B (qubit), C (two cavity levels).
pub fn evolve_jc_vacuum(t: f64, alpha: C64, beta: C64, g: f64) -> Result<StateVector> {
    check_pair_norm(alpha, beta)?;
    let layout = SubsystemLayout::new(&[("A", 2), ("B", 2), ("C", 2)])?;
    let (s, c) = (g * t).sin_cos();
    let mut amps = vec![C_ZERO; 8];
    amps[0b010] = beta * c; // up down 0
    amps[0b100] = alpha; // down up 0
    amps[0b111] = beta * C64::new(0.0, -s); // down down 1
    StateVector::new(layout, amps)
}

/// Same cell with one photon already in the cavity, which opens the upward
/// channel `|down 1> -> |up 0>` alongside the sqrt(2)-enhanced decay
/// `|up 1> -> |down 2>`. Layout: A, B qubits, C three cavity levels.
pub fn evolve_jc_one_photon(t: f64, alpha: C64, beta: C64, g: f64) -> Result<StateVector> {
    check_pair_norm(alpha, beta)?;
    let layout = SubsystemLayout::new(&[("A", 2), ("B", 2), ("C", 3)])?;
    let x = g * t;
    let u = std::f64::consts::SQRT_2 * x;
    let mut amps = vec![C_ZERO; 12];
    amps[0] = alpha * C64::new(0.0, -x.sin()); // up up 0
    amps[0 * 6 + 1 * 3 + 1] = beta * u.cos(); // up down 1
    amps[1 * 6 + 0 * 3 + 1] = alpha * x.cos(); // down up 1
    amps[1 * 6 + 1 * 3 + 2] = beta * C64::new(0.0, -u.sin()); // down down 2
    StateVector::new(layout, amps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DoubleJcKind {
    /// `beta |gamma>_AC |down 0>_BD + alpha |down 0>_AC |gamma>_BD`
    Psi,
    /// `beta |gamma>_AC |gamma>_BD + alpha |down 0>_AC |down 0>_BD`
    Phi,
}

/// Four-partite state of two independent cells with shared amplitudes
/// `gamma = xi |up 0> + chi |down 1>`, returned in A, B, C, D label order
/// (atoms A, B; their respective baths C, D as effective qubits).
pub fn double_jc_state(
    pair: &AmplitudePair,
    alpha: C64,
    beta: C64,
    kind: DoubleJcKind,
) -> Result<StateVector> {
    check_pair_norm(alpha, beta)?;
    pair.validate()?;
    let gamma = [pair.xi, C_ZERO, C_ZERO, pair.chi]; // on (atom, bath)
    let down0 = [C_ZERO, C_ZERO, C_ONE, C_ZERO];
    let grouped_layout = SubsystemLayout::new(&[("A", 2), ("C", 2), ("B", 2), ("D", 2)])?;
    let mut amps = vec![C_ZERO; 16];
    let add = |amps: &mut Vec<C64>, w: C64, left: &[C64; 4], right: &[C64; 4]| {
        for i in 0..4 {
            if left[i] == C_ZERO {
                continue;
            }
            for j in 0..4 {
                amps[i * 4 + j] += w * left[i] * right[j];
            }
        }
    };
    match kind {
        DoubleJcKind::Psi => {
            add(&mut amps, beta, &gamma, &down0);
            add(&mut amps, alpha, &down0, &gamma);
        }
        DoubleJcKind::Phi => {
            add(&mut amps, beta, &gamma, &gamma);
            add(&mut amps, alpha, &down0, &down0);
        }
    }
    let grouped = StateVector::new(grouped_layout, amps)?;
    reorder_subsystems(&grouped, &["A", "B", "C", "D"])
}

/// Evolve the double-cell state to physical time `t` under `bath`.
pub fn evolve_double_jc(
    t: f64,
    alpha: C64,
    beta: C64,
    bath: &BathSpec,
    kind: DoubleJcKind,
) -> Result<StateVector> {
    let pair = amplitude_pair(t, bath)?;
    double_jc_state(&pair, alpha, beta, kind)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    JcVacuum,
    JcOnePhoton,
    DoubleJcPsi,
    DoubleJcPhi,
}

impl Scenario {
    pub fn is_double(self) -> bool {
        matches!(self, Scenario::DoubleJcPsi | Scenario::DoubleJcPhi)
    }

    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Scenario::JcVacuum | Scenario::JcOnePhoton => &["A", "B", "C"],
            _ => &["A", "B", "C", "D"],
        }
    }
}

/// How the grid values of a `ScenarioSpec` are interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    /// Dimensionless time: g t for cavity-style baths, gamma t for the
    /// Markovian bath.
    Time,
    /// Transferred population z = |chi| in [0, 1]; double-cell only.
    Excitation,
}

/// Full description of a run: which state family, its amplitudes, the bath,
/// and the grid to sample.
#[derive(Clone, Debug)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub alpha: C64,
    pub beta: C64,
    pub bath: BathSpec,
    pub grid: Vec<f64>,
    pub grid_kind: GridKind,
}

impl ScenarioSpec {
    pub fn new(
        scenario: Scenario,
        alpha: C64,
        beta: C64,
        bath: BathSpec,
        grid: Vec<f64>,
        grid_kind: GridKind,
    ) -> Result<ScenarioSpec> {
        check_pair_norm(alpha, beta)?;
        bath.validate()?;
        if !scenario.is_double() {
            if !matches!(bath, BathSpec::SingleMode { .. }) {
                return Err(Error::invalid(
                    "bath",
                    "single-cavity scenarios need a single-mode bath",
                ));
            }
            if grid_kind == GridKind::Excitation {
                return Err(Error::invalid(
                    "grid",
                    "excitation grids only apply to the double-cell scenarios",
                ));
            }
        }
        for &x in &grid {
            if !x.is_finite() {
                return Err(Error::invalid("grid", "grid values must be finite"));
            }
            match grid_kind {
                GridKind::Time => {
                    if x < 0.0 {
                        return Err(Error::invalid("grid", format!("negative time {x}")));
                    }
                }
                GridKind::Excitation => {
                    if !(0.0..=1.0).contains(&x) {
                        return Err(Error::invalid(
                            "grid",
                            format!("z value {x} outside [0, 1]"),
                        ));
                    }
                }
            }
        }
        Ok(ScenarioSpec {
            scenario,
            alpha,
            beta,
            bath,
            grid,
            grid_kind,
        })
    }

    /// Bind the scenario description to a prebuilt amplitude model so repeated evaluation
    /// does not re-diagonalize the bath.
    pub fn evaluator(&self) -> Result<ScenarioEvaluator> {
        let model = if self.scenario.is_double() && self.grid_kind == GridKind::Time {
            Some(AmplitudeModel::new(&self.bath)?)
        } else {
            None
        };
        Ok(ScenarioEvaluator {
            spec: self.clone(),
            model,
        })
    }
}

pub struct ScenarioEvaluator {
    spec: ScenarioSpec,
    model: Option<AmplitudeModel>,
}

impl ScenarioEvaluator {
    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    /// Amplitude pair at grid value `x` (double-cell scenarios only).
    pub fn amplitudes_at(&self, x: f64) -> Result<AmplitudePair> {
        match self.spec.grid_kind {
            GridKind::Excitation => AmplitudePair::from_z(x, &self.spec.bath),
            GridKind::Time => {
                let t = x / self.spec.bath.rate_scale();
                match &self.model {
                    Some(m) => m.amplitudes(t),
                    None => amplitude_pair(t, &self.spec.bath),
                }
            }
        }
    }

    pub fn state_at(&self, x: f64) -> Result<StateVector> {
        let spec = &self.spec;
        match spec.scenario {
            Scenario::JcVacuum => evolve_jc_vacuum(x, spec.alpha, spec.beta, 1.0),
            Scenario::JcOnePhoton => evolve_jc_one_photon(x, spec.alpha, spec.beta, 1.0),
            Scenario::DoubleJcPsi => double_jc_state(
                &self.amplitudes_at(x)?,
                spec.alpha,
                spec.beta,
                DoubleJcKind::Psi,
            ),
            Scenario::DoubleJcPhi => double_jc_state(
                &self.amplitudes_at(x)?,
                spec.alpha,
                spec.beta,
                DoubleJcKind::Phi,
            ),
        }
    }

    pub fn closed_forms_at(&self, x: f64) -> Result<ClosedForms> {
        let spec = &self.spec;
        match spec.scenario {
            Scenario::JcVacuum => closed_forms_jc_vacuum(x, spec.alpha, spec.beta),
            Scenario::JcOnePhoton => closed_forms_jc_one_photon(x, spec.alpha, spec.beta),
            Scenario::DoubleJcPsi => closed_forms_double_jc(
                &self.amplitudes_at(x)?,
                spec.alpha,
                spec.beta,
                DoubleJcKind::Psi,
            ),
            Scenario::DoubleJcPhi => closed_forms_double_jc(
                &self.amplitudes_at(x)?,
                spec.alpha,
                spec.beta,
                DoubleJcKind::Phi,
            ),
        }
    }
}

/// Closed-form concurrences of one scenario state at one grid point.
#[derive(Clone, Debug)]
pub struct ClosedForms {
    /// Pairwise concurrences, keyed like "AB".
    pub pairs: Vec<(&'static str, f64)>,
    /// One-against-rest bipartition concurrences, keyed like "A(BC)".
    pub one_vs_rest: Vec<(&'static str, f64)>,
    /// Residual of the focus-A monogamy relation: the three-party tangle
    /// for single-cavity scenarios, the four-party excess for double cells.
    pub residual: f64,
}

impl ClosedForms {
    pub fn pair(&self, key: &str) -> Option<f64> {
        self.pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    pub fn one_vs_rest(&self, key: &str) -> Option<f64> {
        self.one_vs_rest
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
    }
}

fn check_pair_norm_loose(alpha: C64, beta: C64) -> Result<()> {
    // closed forms are plain functions of |alpha|, |beta|; allow slightly
    // denormalized inputs (rounded literals) but catch real mistakes
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if (n - 1.0).abs() > 5e-2 {
        return Err(Error::NotNormalized((n - 1.0).abs()));
    }
    Ok(())
}

/// Vacuum-cavity cell at dimensionless time `x = g t`.
pub fn closed_forms_jc_vacuum(x: f64, alpha: C64, beta: C64) -> Result<ClosedForms> {
    check_pair_norm_loose(alpha, beta)?;
    let (a, b) = (alpha.norm(), beta.norm());
    let c0 = 2.0 * a * b;
    let (s, c) = x.sin_cos();
    let c_ab = c0 * c.abs();
    let c_ac = b * b * (2.0 * x).sin().abs();
    let c_bc = c0 * s.abs();
    let c_a_bc = 2.0 * (b * b * c * c * (a * a + b * b * s * s)).sqrt();
    let c_b_ac = c0;
    let residual = c_a_bc * c_a_bc - c_ab * c_ab - c_ac * c_ac;
    Ok(ClosedForms {
        pairs: vec![("AB", c_ab), ("AC", c_ac), ("BC", c_bc)],
        one_vs_rest: vec![("A(BC)", c_a_bc), ("B(AC)", c_b_ac)],
        residual,
    })
}

/// One-photon cell at dimensionless time `x = g t`.
pub fn closed_forms_jc_one_photon(x: f64, alpha: C64, beta: C64) -> Result<ClosedForms> {
    check_pair_norm_loose(alpha, beta)?;
    let (a, b) = (alpha.norm(), beta.norm());
    let c0 = 2.0 * a * b;
    let u = std::f64::consts::SQRT_2 * x;
    let c_ab = c0 * ((x.cos() * u.cos()).abs() - (x.sin() * u.sin()).abs()).max(0.0);
    let c_ac = (a * a * (2.0 * x).sin().abs() - b * b * (2.0 * u).sin().abs()).abs();
    let p_up = a * a * x.sin().powi(2) + b * b * u.cos().powi(2);
    let p_down = a * a * x.cos().powi(2) + b * b * u.sin().powi(2);
    let c_a_bc = 2.0 * (p_up * p_down).sqrt();
    let residual = c_a_bc * c_a_bc - c_ab * c_ab - c_ac * c_ac;
    Ok(ClosedForms {
        pairs: vec![("AB", c_ab), ("AC", c_ac)],
        one_vs_rest: vec![("A(BC)", c_a_bc)],
        residual,
    })
}

/// Double-cell concurrences from the shared amplitude pair.
pub fn closed_forms_double_jc(
    pair: &AmplitudePair,
    alpha: C64,
    beta: C64,
    kind: DoubleJcKind,
) -> Result<ClosedForms> {
    check_pair_norm_loose(alpha, beta)?;
    let (a, b) = (alpha.norm(), beta.norm());
    let c0 = 2.0 * a * b;
    let (xi, chi) = (pair.xi.norm(), pair.chi.norm());
    match kind {
        DoubleJcKind::Psi => {
            let c_ab = c0 * xi * xi;
            let c_ac = 2.0 * b * b * xi * chi;
            let c_ad = c0 * xi * chi;
            let c_bc = c0 * xi * chi;
            let c_bd = 2.0 * a * a * xi * chi;
            let c_cd = c0 * chi * chi;
            let c_a_rest = 2.0 * b * xi * (a * a + b * b * chi * chi).sqrt();
            let residual = c_a_rest * c_a_rest - c_ab * c_ab - c_ac * c_ac - c_ad * c_ad;
            Ok(ClosedForms {
                pairs: vec![
                    ("AB", c_ab),
                    ("AC", c_ac),
                    ("AD", c_ad),
                    ("BC", c_bc),
                    ("BD", c_bd),
                    ("CD", c_cd),
                ],
                one_vs_rest: vec![("A(BCD)", c_a_rest)],
                residual,
            })
        }
        DoubleJcKind::Phi => {
            let c_ab = 2.0 * b * xi * xi * (a - b * chi * chi).max(0.0);
            let c_ac = 2.0 * b * b * xi * chi;
            let c_ad = 2.0 * b * xi * chi * (a - b * xi * chi).max(0.0);
            let c_a_rest = 2.0 * b * xi * (b * b * chi * chi + a * a).sqrt();
            let residual = c_a_rest * c_a_rest - c_ab * c_ab - c_ac * c_ac - c_ad * c_ad;
            Ok(ClosedForms {
                pairs: vec![("AB", c_ab), ("AC", c_ac), ("AD", c_ad)],
                one_vs_rest: vec![("A(BCD)", c_a_rest)],
                residual,
            })
        }
    }
}

/// Hamiltonian of one atom plus its bath.
///
/// Single mode: the full atom x cavity coupling on `2 * cavity_truncation`
/// levels. Comb: the one-excitation sector, ordered as excited atom, the
/// modes in ascending detuning, then the decoupled ground state
/// (`cavity_truncation` is not meaningful there and must be 0 or 2).
pub fn build_hamiltonian(bath: &BathSpec, cavity_truncation: usize) -> Result<CMatrix> {
    bath.validate()?;
    match *bath {
        BathSpec::SingleMode { g } => {
            if cavity_truncation < 2 {
                return Err(Error::invalid(
                    "cavity_truncation",
                    "need at least two cavity levels",
                ));
            }
            let c = annihilation(cavity_truncation);
            let raise = CMatrix::from_rows(vec![vec![C_ZERO, C_ONE], vec![C_ZERO, C_ZERO]]);
            let term = kron(&raise, &c);
            Ok(term.add(&term.dagger()).scale(C64::new(g, 0.0)))
        }
        BathSpec::Markovian { .. } => Err(Error::invalid(
            "bath",
            "the Markovian bath is a rate model; it has no Hamiltonian",
        )),
        BathSpec::Comb { modes, g, .. } => {
            if cavity_truncation != 0 && cavity_truncation != 2 {
                return Err(Error::invalid(
                    "cavity_truncation",
                    "the comb sector fixes its own dimension",
                ));
            }
            let detunings = bath.comb_detunings()?;
            let n = modes + 2;
            let mut h = CMatrix::zeros(n, n);
            for (k, &delta) in detunings.iter().enumerate() {
                h[(k + 1, k + 1)] = C64::new(delta, 0.0);
                h[(0, k + 1)] = C64::new(g, 0.0);
                h[(k + 1, 0)] = C64::new(g, 0.0);
            }
            // last row/column: the ground state, energy 0, no coupling
            Ok(h)
        }
    }
}

/// Full Hamiltonian generating a scenario's evolution, with its layout.
/// The single-cavity scenarios couple atom A to cavity C with B spectating;
/// the double cells couple A to C and B to D. The cavity is truncated one
/// level above the analytic support so that leakage into the top level is
/// something the numeric evolution can disprove rather than assume.
pub fn scenario_hamiltonian(scenario: Scenario, g: f64) -> Result<(CMatrix, SubsystemLayout)> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::invalid(
            "g",
            format!("coupling must be > 0, got {g}"),
        ));
    }
    let raise = CMatrix::from_rows(vec![vec![C_ZERO, C_ONE], vec![C_ZERO, C_ZERO]]);
    match scenario {
        Scenario::JcVacuum | Scenario::JcOnePhoton => {
            let cavity_dim = if scenario == Scenario::JcVacuum { 3 } else { 4 };
            let layout = SubsystemLayout::new(&[("A", 2), ("B", 2), ("C", cavity_dim)])?;
            let c = annihilation(cavity_dim);
            let term = kron(&kron(&raise, &CMatrix::identity(2)), &c);
            Ok((term.add(&term.dagger()).scale(C64::new(g, 0.0)), layout))
        }
        Scenario::DoubleJcPsi | Scenario::DoubleJcPhi => {
            let layout = SubsystemLayout::new(&[("A", 2), ("B", 2), ("C", 2), ("D", 2)])?;
            let c = annihilation(2);
            let i2 = CMatrix::identity(2);
            // A couples to C, B couples to D, in A,B,C,D index order
            let ac = kron(&kron(&kron(&raise, &i2), &c), &i2);
            let bd = kron(&kron(&kron(&i2, &raise), &i2), &c);
            let h = ac
                .add(&ac.dagger())
                .add(&bd.add(&bd.dagger()))
                .scale(C64::new(g, 0.0));
            Ok((h, layout))
        }
    }
}

/// One Schroedinger step `exp(-i h t) psi` via full diagonalization.
pub fn evolve_numeric(h: &CMatrix, initial: &StateVector, t: f64) -> Result<StateVector> {
    if h.rows() != initial.amplitudes().len() {
        return Err(Error::Dimension(format!(
            "{}x{} Hamiltonian against a state of dim {}",
            h.rows(),
            h.cols(),
            initial.amplitudes().len()
        )));
    }
    let u = expm(h, t, 1.0)?;
    StateVector::new(initial.layout().clone(), u.matvec(initial.amplitudes()))
}

/// Cached eigendecomposition of a Hamiltonian for repeated propagation.
pub struct Propagator {
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Result<Propagator> {
        let (energies, vectors) = herm_eig(h)?;
        Ok(Propagator { energies, vectors })
    }

    pub fn apply(&self, initial: &StateVector, t: f64) -> Result<StateVector> {
        let n = self.energies.len();
        if initial.amplitudes().len() != n {
            return Err(Error::Dimension(format!(
                "propagator dim {} against state dim {}",
                n,
                initial.amplitudes().len()
            )));
        }
        // project on the eigenbasis, phase, project back
        let mut coeffs = vec![C_ZERO; n];
        for k in 0..n {
            let mut acc = C_ZERO;
            for i in 0..n {
                acc += self.vectors[(i, k)].conj() * initial.amplitudes()[i];
            }
            coeffs[k] = acc * C64::new(0.0, -self.energies[k] * t).exp();
        }
        let mut amps = vec![C_ZERO; n];
        for i in 0..n {
            let mut acc = C_ZERO;
            for k in 0..n {
                acc += self.vectors[(i, k)] * coeffs[k];
            }
            amps[i] = acc;
        }
        StateVector::new(initial.layout().clone(), amps)
    }
}
