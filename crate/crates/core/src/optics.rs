//! Photon-pair Mach-Zehnder interferometer.
//!
//! Photon `a` goes straight to detector D_a. Photon `b` enters a
//! Mach-Zehnder interferometer whose second port is mode `c`; after the
//! recombining splitter, mode `b` leads to D_b. A single pair lives in the
//! eight-dimensional space
//!
//! ```text
//! H_aH_b, H_aV_b, V_aH_b, V_aV_b, H_aH_c, H_aV_c, V_aH_c, V_aV_c
//! ```
//!
//! Both splitters transmit with amplitude 1/√2 and reflect with i/√2.
//!
//! Logical qubits are read off the polarizations with mode a: H→0, V→1 and the
//! interferometer photon: V→0, H→1. Under this relabeling the source pair
//! (|H_aV_b⟩ + |V_aH_b⟩)/√2 is the Bell state (|00⟩ + |11⟩)/√2, vertex A.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle;
use crate::error::{Error, Result};
use crate::evolution::{apply_unitary, segment_unitary, Axis, OneQubitUnitary, Qubit, Trajectory};
use crate::qstate::{SpinorPair, TwoQubitState};

/// Polarization index: H = 0, V = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    H = 0,
    V = 1,
}

/// Spatial mode of the interferometer photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    B = 0,
    C = 1,
}

/// Where a wave plate sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    A,
    B,
    C,
}

/// Index of `|P_a Q_mode⟩` in [`OpticalState`].
pub const fn basis_index(pol_a: Pol, mode: Mode, pol: Pol) -> usize {
    4 * mode as usize + 2 * pol_a as usize + pol as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalState {
    amps: [Complex64; 8],
}

impl OpticalState {
    pub fn new(amps: [Complex64; 8]) -> Result<Self> {
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > crate::qstate::INPUT_NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        let scale = norm_sq.sqrt().recip();
        Ok(Self {
            amps: amps.map(|z| z * scale),
        })
    }

    pub fn amps(&self) -> &[Complex64; 8] {
        &self.amps
    }

    pub fn amp(&self, pol_a: Pol, mode: Mode, pol: Pol) -> Complex64 {
        self.amps[basis_index(pol_a, mode, pol)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probability of coincidences D_a–D_b, summed over polarizations.
    pub fn p_mode_b(&self) -> f64 {
        self.amps[..4].iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probability of finding the interferometer photon in mode c.
    pub fn p_mode_c(&self) -> f64 {
        self.amps[4..].iter().map(|z| z.norm_sqr()).sum()
    }

    /// The component in one mode, read as a logical two-qubit vector
    /// (unnormalized) under the relabeling of the module docs.
    pub fn logical_branch(&self, mode: Mode) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (la, pa) in [(0, Pol::H), (1, Pol::V)] {
            for (lo, po) in [(0, Pol::V), (1, Pol::H)] {
                out[2 * la + lo] = self.amp(pa, mode, po);
            }
        }
        out
    }
}

/// (|H_aV_b⟩ + |V_aH_b⟩)/√2 with mode c empty.
pub fn source_state() -> OpticalState {
    let mut amps = [Complex64::new(0.0, 0.0); 8];
    amps[basis_index(Pol::H, Mode::B, Pol::V)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[basis_index(Pol::V, Mode::B, Pol::H)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    OpticalState { amps }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalElement {
    /// Splitter combining mode b with the empty mode c.
    Bs1,
    /// Recombining splitter in front of D_b.
    Bs2,
    /// e^{iφ} on every mode-b component.
    PhaseShift(f64),
    /// Polarization unitary in the physical H/V basis.
    Plate { arm: Arm, unitary: OneQubitUnitary },
}

fn beam_splitter(amps: &mut [Complex64; 8]) {
    let r = Complex64::new(0.0, FRAC_1_SQRT_2);
    let t = FRAC_1_SQRT_2;
    for k in 0..4 {
        let (b, c) = (amps[k], amps[4 + k]);
        amps[k] = b * t + c * r;
        amps[4 + k] = b * r + c * t;
    }
}

pub fn apply_element(state: &OpticalState, elem: &OpticalElement) -> OpticalState {
    let mut amps = state.amps;
    match elem {
        OpticalElement::Bs1 | OpticalElement::Bs2 => beam_splitter(&mut amps),
        OpticalElement::PhaseShift(phi) => {
            let w = Complex64::cis(*phi);
            amps[..4].iter_mut().for_each(|z| *z *= w);
        }
        OpticalElement::Plate { arm, unitary } => {
            let pairs: Vec<(usize, usize)> = match arm {
                Arm::A => [Mode::B, Mode::C]
                    .into_iter()
                    .flat_map(|m| {
                        [Pol::H, Pol::V].map(|p| {
                            (basis_index(Pol::H, m, p), basis_index(Pol::V, m, p))
                        })
                    })
                    .collect(),
                Arm::B | Arm::C => {
                    let m = if *arm == Arm::B { Mode::B } else { Mode::C };
                    [Pol::H, Pol::V]
                        .map(|pa| (basis_index(pa, m, Pol::H), basis_index(pa, m, Pol::V)))
                        .to_vec()
                }
            };
            for (h, v) in pairs {
                let [x, y] = unitary.apply([amps[h], amps[v]]);
                amps[h] = x;
                amps[v] = y;
            }
        }
    }
    OpticalState { amps }
}

/// Three-plate setting: dephasing ψ, a plate of dephasing δ at angle θ, then
/// dephasing −ψ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePlateTriple {
    pub psi: f64,
    pub theta: f64,
    pub delta: f64,
}

impl WavePlateTriple {
    /// θ ∈ [0, π/2], ψ ∈ (−π, π], δ ∈ [0, 2π).
    pub fn new(psi: f64, theta: f64, delta: f64) -> Result<Self> {
        if !(0.0..=PI / 2.0).contains(&theta) {
            return Err(Error::domain(format!("plate angle θ = {theta} outside [0, π/2]")));
        }
        if !(psi > -PI && psi <= PI) {
            return Err(Error::domain(format!("dephasing ψ = {psi} outside (−π, π]")));
        }
        if !(0.0..TAU).contains(&delta) {
            return Err(Error::domain(format!("dephasing δ = {delta} outside [0, 2π)")));
        }
        Ok(Self { psi, theta, delta })
    }

    /// Field direction (−sin 2θ cos ψ, sin 2θ sin ψ, cos 2θ).
    pub fn axis(&self) -> Axis {
        let s = (2.0 * self.theta).sin();
        Axis::from_direction([
            -s * self.psi.cos(),
            s * self.psi.sin(),
            (2.0 * self.theta).cos(),
        ])
        .expect("unit vector by construction")
    }
}

/// The rotation realized by a plate triple; δ plays the role of time.
pub fn waveplate_unitary(plates: &WavePlateTriple) -> OneQubitUnitary {
    segment_unitary(&plates.axis(), plates.delta)
}

/// Inverts [`waveplate_unitary`] for `U(axis, t)`, up to global phase.
///
/// `t` is reduced mod 4π; times in [2π, 4π) use `U(n, t) = U(−n, 4π − t)`. At
/// exactly t ≡ 2π the rotation is −I and δ = 0 is returned (global phase −1).
pub fn compile_plates(axis: &Axis, t: f64) -> Result<WavePlateTriple> {
    if !t.is_finite() {
        return Err(Error::domain("rotation time must be finite"));
    }
    let [nx, ny, nz] = axis.components();
    if ((nx * nx + ny * ny + nz * nz) - 1.0).abs() > 1e-12 {
        return Err(Error::domain("axis is not normalized"));
    }
    let mut t = t.rem_euclid(2.0 * TAU);
    let mut n = [nx, ny, nz];
    if t >= TAU {
        t = 2.0 * TAU - t;
        n = n.map(|x| -x);
    }
    if t >= TAU {
        t = 0.0;
    }
    let theta = n[2].clamp(-1.0, 1.0).acos() / 2.0;
    let psi = if (2.0 * theta).sin() > 1e-12 {
        angle::wrap(n[1].atan2(-n[0]))
    } else {
        0.0
    };
    WavePlateTriple::new(psi, theta, t)
}

/// Unitary of a qubit-2 rotation rewritten in the physical basis of the
/// interferometer photon.
fn logical_to_interferometer(u: &OneQubitUnitary) -> OneQubitUnitary {
    u.swap_conjugate()
}

fn check_source_start(traj: &Trajectory) -> Result<()> {
    if traj.initial.max_abs_diff(&SpinorPair::identity()) > crate::topology::CLOSURE_TOL {
        return Err(Error::domain(
            "optical trajectories must start at vertex A, the state of the source",
        ));
    }
    Ok(())
}

/// Logical plate sequence (application order) acting on qubit 2 alone with the
/// same effect on |A⟩ as the whole two-qubit trajectory.
///
/// Uses (M ⊗ Id)|A⟩ = (Id ⊗ Mᵀ)|A⟩: with M₁ and M₂ the time-ordered products on
/// each qubit, the trajectory equals Id ⊗ (M₂·M₁ᵀ) on |A⟩. M₁ᵀ applies the
/// transposed qubit-1 factors in reverse order.
pub fn fold_circuit_logical(traj: &Trajectory) -> Vec<OneQubitUnitary> {
    let mut plates: Vec<OneQubitUnitary> = traj
        .segments
        .iter()
        .rev()
        .filter(|s| s.qubit == Qubit::First)
        .map(|s| s.unitary().transpose())
        .collect();
    plates.extend(
        traj.segments
            .iter()
            .filter(|s| s.qubit == Qubit::Second)
            .map(|s| s.unitary()),
    );
    plates
}

/// Plates for the interferometer arm, in physical H/V basis and application
/// order.
pub fn fold_circuit_to_arm(traj: &Trajectory) -> Vec<OneQubitUnitary> {
    let logical = fold_circuit_logical(traj);
    debug_assert!({
        let folded = logical
            .iter()
            .fold(traj.initial_state(), |s, u| apply_unitary(&s, u, Qubit::Second));
        traj.initial != SpinorPair::identity() || folded.max_abs_diff(&traj.final_state()) < 1e-9
    });
    logical.iter().map(logical_to_interferometer).collect()
}

/// Product of a plate list in application order (later plates on the left).
pub fn compose_plates(plates: &[OneQubitUnitary]) -> OneQubitUnitary {
    plates
        .iter()
        .fold(OneQubitUnitary::identity(), |acc, u| u.mul(&acc))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Whole circuit compiled onto arm c via the transpose identity.
    #[default]
    Folded,
    /// Qubit-1 plates on arm a, qubit-2 plates on arm c.
    Literal,
    /// No plates.
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct ExperimentConfig {
    pub placement: Placement,
    pub trajectory: Option<Trajectory>,
    pub phi_values: Vec<f64>,
}

/// Evenly spaced φ grid in the `{"start", "stop", "steps"}` form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiRange {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl PhiRange {
    /// Both ends included.
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    pub fn full_period(steps: usize) -> Self {
        Self {
            start: 0.0,
            stop: TAU,
            steps,
        }
    }
}

#[derive(Deserialize)]
struct RawConfig {
    placement: Placement,
    #[serde(default)]
    trajectory: Option<Trajectory>,
    phi: PhiRange,
}

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        ExperimentConfig::new(raw.placement, raw.trajectory, raw.phi.values())
    }
}

impl ExperimentConfig {
    pub fn new(
        placement: Placement,
        trajectory: Option<Trajectory>,
        phi_values: Vec<f64>,
    ) -> Result<Self> {
        if phi_values.is_empty() {
            return Err(Error::domain("phi scan is empty"));
        }
        if phi_values.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("phi values must be finite"));
        }
        if placement != Placement::Reference {
            match &trajectory {
                None => return Err(Error::domain("this placement needs a trajectory")),
                Some(t) => check_source_start(t)?,
            }
        }
        Ok(Self {
            placement,
            trajectory,
            phi_values,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::domain(format!("invalid experiment JSON: {e}")))
    }

    /// Elements before and after the phase shifter, for this placement.
    fn optics(&self) -> Result<(Vec<OpticalElement>, Vec<OpticalElement>)> {
        let mut before = Vec::new();
        let mut arm_c = Vec::new();
        match (self.placement, &self.trajectory) {
            (Placement::Reference, _) => {}
            (Placement::Folded, Some(traj)) => {
                arm_c.extend(
                    fold_circuit_to_arm(traj)
                        .into_iter()
                        .map(|unitary| OpticalElement::Plate { arm: Arm::C, unitary }),
                );
            }
            (Placement::Literal, Some(traj)) => {
                for seg in &traj.segments {
                    let plates = compile_plates(&seg.axis, seg.duration())?;
                    let u = waveplate_unitary(&plates);
                    match seg.qubit {
                        Qubit::First => before.push(OpticalElement::Plate {
                            arm: Arm::A,
                            unitary: u,
                        }),
                        Qubit::Second => arm_c.push(OpticalElement::Plate {
                            arm: Arm::C,
                            unitary: logical_to_interferometer(&u),
                        }),
                    }
                }
            }
            (_, None) => return Err(Error::domain("this placement needs a trajectory")),
        }
        before.push(OpticalElement::Bs1);
        arm_c.push(OpticalElement::Bs2);
        Ok((before, arm_c))
    }

    /// |⟨b-branch|c-branch⟩| of the two logical MES meeting at BS2, computed
    /// from two-qubit states alone.
    pub fn interfering_overlap(&self) -> f64 {
        let Some(traj) = &self.trajectory else {
            return 1.0;
        };
        match self.placement {
            Placement::Reference => 1.0,
            Placement::Folded => traj.initial_state().inner(&traj.final_state()).norm(),
            Placement::Literal => {
                let b_branch = traj
                    .segments
                    .iter()
                    .filter(|s| s.qubit == Qubit::First)
                    .fold(traj.initial_state(), |s, seg| crate::evolution::apply_segment(&s, seg));
                b_branch.inner(&traj.final_state()).norm()
            }
        }
    }
}

/// Coincidence probabilities at one phase setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeRecord {
    pub phi: f64,
    /// D_a–D_b coincidences.
    pub p_ab: f64,
    /// Coincidences with the complementary port.
    pub p_ac: f64,
}

/// Propagates one pair through the configured interferometer for every φ.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<FringeRecord>> {
    let (before, after) = config.optics()?;
    let prepared = before
        .iter()
        .fold(source_state(), |s, e| apply_element(&s, e));
    Ok(config
        .phi_values
        .par_iter()
        .map(|&phi| {
            let out = std::iter::once(OpticalElement::PhaseShift(phi))
                .chain(after.iter().copied())
                .fold(prepared, |s, e| apply_element(&s, &e));
            FringeRecord {
                phi,
                p_ab: out.p_mode_b(),
                p_ac: out.p_mode_c(),
            }
        })
        .collect())
}

/// Least-squares fringe `P(φ) ≈ offset + amplitude·cos(φ − phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl FringeFit {
    pub fn eval(&self, phi: f64) -> f64 {
        self.offset + self.amplitude * (phi - self.phase).cos()
    }
}

fn check_scan(records: &[FringeRecord]) -> Result<()> {
    if records.len() < 8 {
        return Err(Error::domain(format!(
            "fringe scan has {} points, need at least 8",
            records.len()
        )));
    }
    let (lo, hi) = records
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.phi), hi.max(r.phi))
        });
    if hi - lo < TAU - 1e-9 {
        return Err(Error::domain("fringe scan does not cover a full period"));
    }
    Ok(())
}

/// Fits the first-harmonic fringe of D_a–D_b coincidences over a scan.
pub fn fit_fringe(records: &[FringeRecord]) -> Result<FringeFit> {
    check_scan(records)?;
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for r in records {
        let basis = Vector3::new(1.0, r.phi.cos(), r.phi.sin());
        normal += basis * basis.transpose();
        rhs += basis * r.p_ab;
    }
    let coef = normal
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::domain("fringe scan is degenerate"))?;
    Ok(FringeFit {
        offset: coef[0],
        amplitude: coef[1].hypot(coef[2]),
        phase: coef[2].atan2(coef[1]),
    })
}

/// Fringe visibility (P_max − P_min)/(P_max + P_min) of the fitted fringe.
///
/// Fitting recovers the extrema even when the grid misses them.
pub fn visibility(records: &[FringeRecord]) -> Result<f64> {
    let fit = fit_fringe(records)?;
    if fit.offset <= 0.0 {
        return Err(Error::domain("fringe offset vanishes"));
    }
    Ok((fit.amplitude / fit.offset).clamp(0.0, 1.0))
}

/// `{"visibility", "overlap_abs"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisibilityReport {
    pub visibility: f64,
    pub overlap_abs: f64,
}

pub fn visibility_report(
    config: &ExperimentConfig,
    records: &[FringeRecord],
) -> Result<VisibilityReport> {
    Ok(VisibilityReport {
        visibility: visibility(records)?,
        overlap_abs: config.interfering_overlap(),
    })
}

/// Logical two-qubit reading of the c-branch after the plates, normalized.
pub fn logical_state_of_mode(state: &OpticalState, mode: Mode) -> Option<TwoQubitState> {
    let v = state.logical_branch(mode);
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n < 1e-12 {
        return None;
    }
    TwoQubitState::new(v.map(|z| z / n)).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Segment;
    use crate::qstate::{Letter, VertexLabel};
    use crate::topology::{standard_circuit, CircuitKind};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn arb_axis() -> impl Strategy<Value = Axis> {
        prop::array::uniform3(-1.0f64..1.0)
            .prop_filter("non-degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|v| Axis::from_direction(v).unwrap())
    }

    fn arb_unitary() -> impl Strategy<Value = OneQubitUnitary> {
        (arb_axis(), -10.0f64..10.0, -PI..PI)
            .prop_map(|(a, t, g)| segment_unitary(&a, t).scale(Complex64::cis(g)))
    }

    fn reference(steps: usize) -> ExperimentConfig {
        ExperimentConfig::new(Placement::Reference, None, PhiRange::full_period(steps).values())
            .unwrap()
    }

    #[test]
    fn source_examples() {
        let s = source_state();
        let h = FRAC_1_SQRT_2;
        assert_eq!(s.amp(Pol::H, Mode::B, Pol::V), c(h, 0.0));
        assert_eq!(s.amp(Pol::V, Mode::B, Pol::H), c(h, 0.0));
        assert_eq!(s.amp(Pol::H, Mode::B, Pol::H), c(0.0, 0.0));
        assert_eq!(s.amp(Pol::V, Mode::B, Pol::V), c(0.0, 0.0));
        assert_eq!(s.p_mode_c(), 0.0);
        let logical = logical_state_of_mode(&s, Mode::B).unwrap();
        assert!(logical.max_abs_diff(&VertexLabel::plain(Letter::A).state()) < 1e-15);
    }

    #[test]
    fn first_splitter_gives_two_copies() {
        let s = apply_element(&source_state(), &OpticalElement::Bs1);
        assert!((s.amp(Pol::H, Mode::B, Pol::V) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((s.amp(Pol::H, Mode::C, Pol::V) - c(0.0, 0.5)).norm() < 1e-15);
        assert!((s.amp(Pol::V, Mode::B, Pol::H) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((s.amp(Pol::V, Mode::C, Pol::H) - c(0.0, 0.5)).norm() < 1e-15);
        assert!((s.norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn recombination_amplitudes() {
        let phi = 0.7;
        let s = [
            OpticalElement::Bs1,
            OpticalElement::PhaseShift(phi),
            OpticalElement::Bs2,
        ]
        .iter()
        .fold(source_state(), |s, e| apply_element(&s, e));
        let w = Complex64::cis(phi);
        let norm = 1.0 / (2.0 * std::f64::consts::SQRT_2);
        let b = (w - 1.0) * norm;
        let cc = c(0.0, 1.0) * (w + 1.0) * norm;
        assert!((s.amp(Pol::H, Mode::B, Pol::V) - b).norm() < 1e-15);
        assert!((s.amp(Pol::V, Mode::B, Pol::H) - b).norm() < 1e-15);
        assert!((s.amp(Pol::H, Mode::C, Pol::V) - cc).norm() < 1e-15);
        assert!((s.amp(Pol::V, Mode::C, Pol::H) - cc).norm() < 1e-15);
    }

    #[test]
    fn identity_plate_is_a_no_op() {
        let s = apply_element(&source_state(), &OpticalElement::Bs1);
        let t = apply_element(
            &s,
            &OpticalElement::Plate {
                arm: Arm::C,
                unitary: OneQubitUnitary::identity(),
            },
        );
        assert_eq!(s, t);
    }

    #[test]
    fn waveplate_examples() {
        let t = 1.1;
        let u = waveplate_unitary(&WavePlateTriple::new(0.0, 0.0, t).unwrap());
        let expect = OneQubitUnitary::from_rows([
            [Complex64::cis(-t / 2.0), c(0.0, 0.0)],
            [c(0.0, 0.0), Complex64::cis(t / 2.0)],
        ]);
        assert!(u.max_abs_diff(&expect) < 1e-15);

        // n = (−1, 0, 0), t = π: U = −i n·σ = i σ_x
        let u = waveplate_unitary(&WavePlateTriple::new(0.0, PI / 4.0, PI).unwrap());
        let expect = OneQubitUnitary::from_rows([[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]);
        assert!(u.max_abs_diff(&expect) < 1e-15);

        let u = waveplate_unitary(&WavePlateTriple::new(2.0, 0.0, 0.0).unwrap());
        assert!(u.max_abs_diff(&OneQubitUnitary::identity()) < 1e-15);

        assert!(WavePlateTriple::new(0.0, 2.0, 0.0).is_err());
        assert!(WavePlateTriple::new(-PI, 0.0, 0.0).is_err());
        assert!(WavePlateTriple::new(0.0, 0.0, TAU).is_err());
    }

    // Jones-matrix oracle: dephasing ψ on the second basis vector, a retarder δ
    // with its fast axis at −θ, dephasing −ψ.
    #[test]
    fn three_physical_plates_reproduce_the_formula() {
        let rot = |a: f64| {
            OneQubitUnitary::from_rows([[c(a.cos(), 0.0), c(-a.sin(), 0.0)], [c(a.sin(), 0.0), c(a.cos(), 0.0)]])
        };
        let dephase = |p: f64| OneQubitUnitary::from_rows([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::cis(p)]]);
        for &(psi, theta, delta) in &[(0.3, 0.2, 1.0), (-2.0, 1.3, 5.5), (PI, 0.7, 0.1), (1.0, 0.0, 2.0)] {
            let retarder = rot(-theta)
                .mul(&OneQubitUnitary::from_rows([
                    [Complex64::cis(-delta / 2.0), c(0.0, 0.0)],
                    [c(0.0, 0.0), Complex64::cis(delta / 2.0)],
                ]))
                .mul(&rot(theta));
            let stack = dephase(-psi).mul(&retarder).mul(&dephase(psi));
            let u = waveplate_unitary(&WavePlateTriple::new(psi, theta, delta).unwrap());
            assert!(stack.max_abs_diff(&u) < 1e-14);
        }
    }

    #[test]
    fn compile_examples() {
        let p = compile_plates(&Axis::z(), 1.3).unwrap();
        assert_eq!((p.psi, p.theta, p.delta), (0.0, 0.0, 1.3));

        let p = compile_plates(&Axis::new(-1.0, 0.0, 0.0).unwrap(), PI).unwrap();
        assert!(p.psi.abs() < 1e-15 && (p.theta - PI / 4.0).abs() < 1e-15 && (p.delta - PI).abs() < 1e-15);

        let r = (1.0f64 / 3.0).sqrt();
        let ab = Axis::new(-r, -r, -r).unwrap();
        let p = compile_plates(&ab, TAU / 3.0).unwrap();
        assert!(waveplate_unitary(&p).distance_up_to_phase(&segment_unitary(&ab, TAU / 3.0)) < 1e-12);

        // −z needs θ = π/2
        let p = compile_plates(&Axis::z().neg(), 0.4).unwrap();
        assert!((p.theta - PI / 2.0).abs() < 1e-15 && p.psi == 0.0);

        // long times fold back into [0, 2π) exactly
        let a = Axis::new(0.6, 0.0, 0.8).unwrap();
        for t in [7.0, 11.0, -3.0, 30.0] {
            let p = compile_plates(&a, t).unwrap();
            assert!((0.0..TAU).contains(&p.delta));
            assert!(waveplate_unitary(&p).max_abs_diff(&segment_unitary(&a, t)) < 1e-12);
        }
        let p = compile_plates(&a, TAU).unwrap();
        assert!(waveplate_unitary(&p).distance_up_to_phase(&segment_unitary(&a, TAU)) < 1e-12);
        assert!(compile_plates(&a, f64::NAN).is_err());
    }

    #[test]
    fn folded_composites() {
        let minus = compose_plates(&fold_circuit_to_arm(&standard_circuit(CircuitKind::Minus)));
        assert!(minus.max_abs_diff(&OneQubitUnitary::identity().scale(c(-1.0, 0.0))) < 1e-12);
        let plus = compose_plates(&fold_circuit_to_arm(&standard_circuit(CircuitKind::Plus)));
        assert!(plus.max_abs_diff(&OneQubitUnitary::identity()) < 1e-12);
        let empty = Trajectory::new(SpinorPair::identity(), vec![]);
        assert!(fold_circuit_to_arm(&empty).is_empty());
    }

    #[test]
    fn reference_fringes() {
        let cfg = ExperimentConfig::new(Placement::Reference, None, vec![0.0, PI / 2.0, PI]).unwrap();
        let recs = run_experiment(&cfg).unwrap();
        for (r, p) in recs.iter().zip([0.0, 0.5, 1.0]) {
            assert!((r.p_ab - p).abs() < 1e-12);
        }
        assert!((visibility(&run_experiment(&reference(16)).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn folded_minus_is_half_a_period_off() {
        let cfg = ExperimentConfig::new(
            Placement::Folded,
            Some(standard_circuit(CircuitKind::Minus)),
            vec![0.0, PI],
        )
        .unwrap();
        let recs = run_experiment(&cfg).unwrap();
        assert!((recs[0].p_ab - 1.0).abs() < 1e-12);
        assert!(recs[1].p_ab.abs() < 1e-12);
    }

    #[test]
    fn literal_layout_is_flat() {
        for kind in [CircuitKind::Plus, CircuitKind::Minus] {
            let cfg = ExperimentConfig::new(
                Placement::Literal,
                Some(standard_circuit(kind)),
                PhiRange::full_period(33).values(),
            )
            .unwrap();
            let recs = run_experiment(&cfg).unwrap();
            assert!(recs.iter().all(|r| (r.p_ab - 0.5).abs() < 1e-12));
            assert!(visibility(&recs).unwrap() < 1e-9);
            assert!(cfg.interfering_overlap() < 1e-12);
        }
    }

    #[test]
    fn open_path_visibility_is_the_overlap() {
        let r = (1.0f64 / 3.0).sqrt();
        let ab = Segment::new(Axis::new(-r, -r, -r).unwrap(), TAU / 3.0, Qubit::First).unwrap();
        let cfg = ExperimentConfig::new(
            Placement::Folded,
            Some(Trajectory::new(SpinorPair::identity(), vec![ab])),
            PhiRange::full_period(64).values(),
        )
        .unwrap();
        let v = visibility(&run_experiment(&cfg).unwrap()).unwrap();
        assert!((v - 0.5).abs() < 1e-9);
        assert!((cfg.interfering_overlap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn visibility_needs_a_full_scan() {
        let few = run_experiment(&reference(4)).unwrap();
        assert!(visibility(&few).is_err());
        let cfg = ExperimentConfig::new(
            Placement::Reference,
            None,
            PhiRange { start: 0.0, stop: PI, steps: 20 }.values(),
        )
        .unwrap();
        assert!(visibility(&run_experiment(&cfg).unwrap()).is_err());
    }

    #[test]
    fn config_validation_and_json() {
        assert!(ExperimentConfig::new(Placement::Reference, None, vec![]).is_err());
        assert!(ExperimentConfig::new(Placement::Reference, None, vec![f64::NAN]).is_err());
        assert!(ExperimentConfig::new(Placement::Folded, None, vec![0.0]).is_err());
        let off_source = Trajectory::new(VertexLabel::plain(Letter::G).pair(), vec![]);
        assert!(ExperimentConfig::new(Placement::Folded, Some(off_source), vec![0.0]).is_err());

        let cfg = ExperimentConfig::from_json(
            r#"{"placement":"reference","trajectory":null,"phi":{"start":0,"stop":6.283185307179586,"steps":5}}"#,
        )
        .unwrap();
        assert_eq!(cfg.phi_values.len(), 5);
        assert_eq!(cfg.placement, Placement::Reference);
        let text = serde_json::json!({
            "placement": "folded",
            "trajectory": standard_circuit(CircuitKind::Minus),
            "phi": {"start": 0.0, "stop": 1.0, "steps": 3},
        })
        .to_string();
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(cfg.trajectory.unwrap().segments.len(), 4);
        assert!(ExperimentConfig::from_json(r#"{"placement":"folded","trajectory":null,"phi":{"start":0,"stop":1,"steps":3}}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn transpose_identity(m in arb_unitary()) {
            let a = TwoQubitState::bell();
            let left = apply_unitary(&a, &m, Qubit::First);
            let right = apply_unitary(&a, &m.transpose(), Qubit::Second);
            prop_assert!(left.max_abs_diff(&right) < 1e-12);
        }

        #[test]
        fn plates_preserve_norm(
            elems in prop::collection::vec(
                prop_oneof![
                    Just(OpticalElement::Bs1),
                    Just(OpticalElement::Bs2),
                    (-10.0f64..10.0).prop_map(OpticalElement::PhaseShift),
                    (prop_oneof![Just(Arm::A), Just(Arm::B), Just(Arm::C)], arb_unitary())
                        .prop_map(|(arm, unitary)| OpticalElement::Plate { arm, unitary }),
                ],
                1..12,
            ),
        ) {
            let mut s = source_state();
            for e in &elems {
                s = apply_element(&s, e);
                prop_assert!((s.norm_sq() - 1.0).abs() < 1e-12);
            }
        }
    }
}
