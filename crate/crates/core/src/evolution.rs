//! Piecewise single-qubit evolution of two-qubit states.
//!
//! A segment evolves one qubit under `H = ½ n·σ` for a dimensionless time `t`
//! (units ħω = 1), i.e. by the SU(2) matrix
//!
//! ```text
//! U(n, t) = ⎛ cos(t/2) − i n_z sin(t/2)    −i n₋ sin(t/2)          ⎞
//!           ⎝ −i n₊ sin(t/2)               cos(t/2) + i n_z sin(t/2) ⎠ ,  n± = n_x ± i n_y.
//! ```
//!
//! Sampled traces carry the overlap with the initial state and the energy
//! expectation, from which the dynamical and Pancharatnam phases and the
//! orthogonal-space crossings are computed.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle;
use crate::error::{Error, Result};
use crate::qstate::{SpinorPair, TwoQubitState};

/// Tolerance on `|n|² = 1` for user-supplied axes.
pub const AXIS_NORM_TOL: f64 = 1e-6;

/// Overlap magnitude below which a Pancharatnam phase is undefined.
pub const ORTHOGONAL_TOL: f64 = 1e-9;

/// Sampled overlaps with `|Re| ≤ ZERO_OVERLAP_TOL` count as touching the
/// orthogonal space.
pub const ZERO_OVERLAP_TOL: f64 = 1e-12;

/// Time resolution of refined crossing events.
pub const CROSSING_TIME_TOL: f64 = 1e-12;

pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 1024;

/// Unit vector giving the orientation of the effective field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Axis([f64; 3]);

impl Axis {
    /// Accepts `(nx, ny, nz)` with `|n|² = 1` to within [`AXIS_NORM_TOL`].
    pub fn new(nx: f64, ny: f64, nz: f64) -> Result<Self> {
        let v = [nx, ny, nz];
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("axis components must be finite"));
        }
        let norm_sq: f64 = v.iter().map(|x| x * x).sum();
        if (norm_sq - 1.0).abs() > AXIS_NORM_TOL {
            return Err(Error::domain(format!(
                "axis ({nx}, {ny}, {nz}) is not normalized (|n|² = {norm_sq})"
            )));
        }
        // already unit to rounding: keep the given components so that
        // serialized axes read back bit-for-bit
        if (norm_sq - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Axis(v));
        }
        Ok(Self::normalized(v))
    }

    /// Normalizes an arbitrary direction; near-zero vectors are rejected.
    pub fn from_direction(v: [f64; 3]) -> Result<Self> {
        let norm_sq: f64 = v.iter().map(|x| x * x).sum();
        if !norm_sq.is_finite() || norm_sq < 1e-18 {
            return Err(Error::domain("axis direction is degenerate"));
        }
        Ok(Self::normalized(v))
    }

    fn normalized(v: [f64; 3]) -> Self {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        Axis(v.map(|x| x / n))
    }

    pub fn z() -> Self {
        Axis([0.0, 0.0, 1.0])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn nx(&self) -> f64 {
        self.0[0]
    }

    pub fn ny(&self) -> f64 {
        self.0[1]
    }

    pub fn nz(&self) -> f64 {
        self.0[2]
    }

    /// n₊ = n_x + i n_y.
    pub fn n_plus(&self) -> Complex64 {
        Complex64::new(self.0[0], self.0[1])
    }

    /// n₋ = n_x − i n_y.
    pub fn n_minus(&self) -> Complex64 {
        Complex64::new(self.0[0], -self.0[1])
    }

    pub fn neg(&self) -> Self {
        Axis(self.0.map(|x| -x))
    }
}

impl TryFrom<[f64; 3]> for Axis {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Axis::new(v[0], v[1], v[2])
    }
}

impl From<Axis> for [f64; 3] {
    fn from(a: Axis) -> Self {
        a.0
    }
}

/// 2×2 complex matrix, row-major. Everything built by this crate is in SU(2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneQubitUnitary {
    pub m: [[Complex64; 2]; 2],
}

impl OneQubitUnitary {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, one]],
        }
    }

    pub fn from_rows(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &OneQubitUnitary) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self { m }
    }

    pub fn transpose(&self) -> Self {
        let m = self.m;
        Self {
            m: [[m[0][0], m[1][0]], [m[0][1], m[1][1]]],
        }
    }

    pub fn adjoint(&self) -> Self {
        let m = self.m;
        Self {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            m: self.m.map(|row| row.map(|x| x * z)),
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `X · self · X`, i.e. the same operator with basis labels 0 ↔ 1 swapped.
    pub fn swap_conjugate(&self) -> Self {
        let m = self.m;
        Self {
            m: [[m[1][1], m[1][0]], [m[0][1], m[0][0]]],
        }
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &OneQubitUnitary) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }

    /// Spectral norm of the matrix.
    pub fn spectral_norm(&self) -> f64 {
        // largest eigenvalue of A†A
        let g = self.adjoint().mul(self);
        let tr = g.m[0][0].re + g.m[1][1].re;
        let det = g.det().re;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        ((tr + disc) / 2.0).max(0.0).sqrt()
    }

    /// Spectral-norm distance to `other` after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &OneQubitUnitary) -> f64 {
        // tr(self† other) = |tr| e^{iχ}; other ≈ e^{iχ} self
        let t = self.adjoint().mul(other);
        let tr = t.m[0][0] + t.m[1][1];
        let phase = if tr.norm() > 0.0 {
            tr / tr.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let aligned = self.scale(phase);
        let mut diff = *other;
        for i in 0..2 {
            for j in 0..2 {
                diff.m[i][j] -= aligned.m[i][j];
            }
        }
        diff.spectral_norm()
    }

    /// Checks `U†U = I` and the SU(2) pattern `u11 = u00*`, `u10 = −u01*`.
    pub fn is_su2(&self, tol: f64) -> bool {
        let m = self.m;
        self.adjoint().mul(self).max_abs_diff(&Self::identity()) <= tol
            && (m[1][1] - m[0][0].conj()).norm() <= tol
            && (m[1][0] + m[0][1].conj()).norm() <= tol
    }

    /// Expectation ⟨v|self|v⟩ for a (not necessarily normalized) 2-vector.
    fn expectation(&self, v: [Complex64; 2]) -> Complex64 {
        let w = self.apply(v);
        v[0].conj() * w[0] + v[1].conj() * w[1]
    }
}

/// The evolution operator `exp(−i t n·σ / 2)`.
pub fn segment_unitary(axis: &Axis, t: f64) -> OneQubitUnitary {
    let (s, c) = (t / 2.0).sin_cos();
    let i = Complex64::i();
    OneQubitUnitary {
        m: [
            [Complex64::new(c, -axis.nz() * s), -i * axis.n_minus() * s],
            [-i * axis.n_plus() * s, Complex64::new(c, axis.nz() * s)],
        ],
    }
}

/// `½ n·σ` as a 2×2 matrix.
fn hamiltonian(axis: &Axis) -> OneQubitUnitary {
    let [nx, ny, nz] = axis.components();
    OneQubitUnitary {
        m: [
            [Complex64::new(nz / 2.0, 0.0), Complex64::new(nx / 2.0, -ny / 2.0)],
            [Complex64::new(nx / 2.0, ny / 2.0), Complex64::new(-nz / 2.0, 0.0)],
        ],
    }
}

/// Which qubit a segment acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Qubit {
    First,
    Second,
}

impl TryFrom<u8> for Qubit {
    type Error = Error;

    fn try_from(q: u8) -> Result<Self> {
        match q {
            1 => Ok(Qubit::First),
            2 => Ok(Qubit::Second),
            other => Err(Error::domain(format!("qubit must be 1 or 2, got {other}"))),
        }
    }
}

impl From<Qubit> for u8 {
    fn from(q: Qubit) -> u8 {
        match q {
            Qubit::First => 1,
            Qubit::Second => 2,
        }
    }
}

/// Applies `U ⊗ Id` (qubit 1) or `Id ⊗ U` (qubit 2) to raw amplitudes.
fn apply_local(amps: &[Complex64; 4], u: &OneQubitUnitary, qubit: Qubit) -> [Complex64; 4] {
    match qubit {
        Qubit::First => {
            let [x0, x1] = u.apply([amps[0], amps[2]]);
            let [y0, y1] = u.apply([amps[1], amps[3]]);
            [x0, y0, x1, y1]
        }
        Qubit::Second => {
            let [x0, x1] = u.apply([amps[0], amps[1]]);
            let [y0, y1] = u.apply([amps[2], amps[3]]);
            [x0, x1, y0, y1]
        }
    }
}

/// Applies a one-qubit unitary to the chosen qubit.
pub fn apply_unitary(state: &TwoQubitState, u: &OneQubitUnitary, qubit: Qubit) -> TwoQubitState {
    TwoQubitState::from_unitary_image(apply_local(state.amps(), u, qubit))
}

/// ⟨ψ| (½ n·σ on `qubit`) |ψ⟩.
fn energy(state: &TwoQubitState, axis: &Axis, qubit: Qubit) -> f64 {
    let h = hamiltonian(axis);
    let a = state.amps();
    let e = match qubit {
        Qubit::First => h.expectation([a[0], a[2]]) + h.expectation([a[1], a[3]]),
        Qubit::Second => h.expectation([a[0], a[1]]) + h.expectation([a[2], a[3]]),
    };
    e.re
}

/// One rotation of the path: an axis held for `duration` on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSegment", into = "RawSegment")]
pub struct Segment {
    pub axis: Axis,
    duration: f64,
    pub qubit: Qubit,
}

#[derive(Serialize, Deserialize)]
struct RawSegment {
    axis: Axis,
    duration: f64,
    qubit: Qubit,
}

impl TryFrom<RawSegment> for Segment {
    type Error = Error;

    fn try_from(r: RawSegment) -> Result<Self> {
        Segment::new(r.axis, r.duration, r.qubit)
    }
}

impl From<Segment> for RawSegment {
    fn from(s: Segment) -> Self {
        RawSegment {
            axis: s.axis,
            duration: s.duration,
            qubit: s.qubit,
        }
    }
}

impl Segment {
    pub fn new(axis: Axis, duration: f64, qubit: Qubit) -> Result<Self> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::domain(format!(
                "segment duration must be finite and non-negative, got {duration}"
            )));
        }
        Ok(Self {
            axis,
            duration,
            qubit,
        })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn unitary(&self) -> OneQubitUnitary {
        segment_unitary(&self.axis, self.duration)
    }

    /// The segment undoing this one: same duration, reversed field.
    pub fn inverse(&self) -> Self {
        Self {
            axis: self.axis.neg(),
            ..*self
        }
    }

    /// Two consecutive halves of this segment.
    pub fn halves(&self) -> [Segment; 2] {
        let half = Self {
            duration: self.duration / 2.0,
            ..*self
        };
        [half, half]
    }
}

/// Applies one whole segment.
pub fn apply_segment(state: &TwoQubitState, seg: &Segment) -> TwoQubitState {
    apply_unitary(state, &seg.unitary(), seg.qubit)
}

/// A polygonal path in SO(3): a starting MES and the rotations applied to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: SpinorPair,
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn new(initial: SpinorPair, segments: Vec<Segment>) -> Self {
        Self { initial, segments }
    }

    pub fn initial_state(&self) -> TwoQubitState {
        self.initial.to_mes()
    }

    /// Final state from whole-segment unitaries.
    pub fn final_state(&self) -> TwoQubitState {
        self.segments
            .iter()
            .fold(self.initial_state(), |s, seg| apply_segment(&s, seg))
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// Same start, `more` appended.
    pub fn then(&self, more: impl IntoIterator<Item = Segment>) -> Self {
        let mut segments = self.segments.clone();
        segments.extend(more);
        Self {
            initial: self.initial,
            segments,
        }
    }

    /// Segments retracing this path backwards.
    pub fn inverse_segments(&self) -> Vec<Segment> {
        self.segments.iter().rev().map(Segment::inverse).collect()
    }

    /// Every segment split into two halves of the same axis and qubit.
    pub fn refined(&self) -> Self {
        Self {
            initial: self.initial,
            segments: self.segments.iter().flat_map(Segment::halves).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::domain(format!("invalid trajectory JSON: {e}")))
    }
}

/// Sampled evolution along a sequence of segments.
///
/// Sample 0 is the initial state at time 0. Each segment with positive
/// duration contributes `samples_per_segment` further samples,
/// the last one landing on the segment end. Zero-duration segments add none.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    times: Vec<f64>,
    states: Vec<TwoQubitState>,
    overlaps: Vec<Complex64>,
    energies: Vec<f64>,
    sample_segment: Vec<Option<usize>>,
    segments: Vec<Segment>,
    segment_starts: Vec<(f64, TwoQubitState)>,
}

impl EvolutionTrace {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[TwoQubitState] {
        &self.states
    }

    /// ⟨ψ(0)|ψ(t)⟩ at every sample.
    pub fn overlaps(&self) -> &[Complex64] {
        &self.overlaps
    }

    /// ⟨H(t)⟩ at every sample, with the Hamiltonian of the segment producing
    /// that sample (the first segment's for sample 0).
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Index of the segment that produced each sample.
    pub fn sample_segment(&self) -> &[Option<usize>] {
        &self.sample_segment
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial(&self) -> &TwoQubitState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &TwoQubitState {
        self.states.last().expect("trace holds the initial sample")
    }

    pub fn final_overlap(&self) -> Complex64 {
        *self.overlaps.last().expect("trace holds the initial sample")
    }

    /// Overlap of the initial state with the state at absolute time `t`
    /// inside segment `seg`, evaluated with the exact partial-time unitary.
    fn overlap_at(&self, seg: usize, t: f64) -> Complex64 {
        let (t0, start) = &self.segment_starts[seg];
        let s = &self.segments[seg];
        let u = segment_unitary(&s.axis, t - t0);
        self.states[0].inner(&apply_unitary(start, &u, s.qubit))
    }

    /// CSV with columns
    /// `time, re00, im00, re01, im01, re10, im10, re11, im11, overlap_re, overlap_im, energy`.
    pub fn to_csv(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from(
            "time,re00,im00,re01,im01,re10,im10,re11,im11,overlap_re,overlap_im,energy\n",
        );
        for i in 0..self.len() {
            let mut cols = vec![fmt(self.times[i])];
            for z in self.states[i].amps() {
                cols.push(fmt(z.re));
                cols.push(fmt(z.im));
            }
            cols.push(fmt(self.overlaps[i].re));
            cols.push(fmt(self.overlaps[i].im));
            cols.push(fmt(self.energies[i]));
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }
}

/// Samples the evolution of an arbitrary two-qubit state.
pub fn evolve_state(
    initial: TwoQubitState,
    segments: &[Segment],
    samples_per_segment: usize,
) -> Result<EvolutionTrace> {
    if samples_per_segment < 2 {
        return Err(Error::domain("samples_per_segment must be at least 2"));
    }
    if segments.is_empty() {
        return Err(Error::domain("trajectory has no segments"));
    }
    let capacity =
        1 + samples_per_segment * segments.iter().filter(|s| s.duration > 0.0).count();
    let mut trace = EvolutionTrace {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        overlaps: Vec::with_capacity(capacity),
        energies: Vec::with_capacity(capacity),
        sample_segment: Vec::with_capacity(capacity),
        segments: segments.to_vec(),
        segment_starts: Vec::with_capacity(segments.len()),
    };
    trace.times.push(0.0);
    trace.states.push(initial);
    trace.overlaps.push(initial.inner(&initial));
    trace
        .energies
        .push(energy(&initial, &segments[0].axis, segments[0].qubit));
    trace.sample_segment.push(None);

    let mut t0 = 0.0;
    let mut start = initial;
    for (idx, seg) in segments.iter().enumerate() {
        trace.segment_starts.push((t0, start));
        if seg.duration == 0.0 {
            continue;
        }
        let n = samples_per_segment as f64;
        for k in 1..=samples_per_segment {
            let tau = if k == samples_per_segment {
                seg.duration
            } else {
                seg.duration * k as f64 / n
            };
            let state = apply_unitary(&start, &segment_unitary(&seg.axis, tau), seg.qubit);
            trace.times.push(t0 + tau);
            trace.overlaps.push(initial.inner(&state));
            trace.energies.push(energy(&state, &seg.axis, seg.qubit));
            trace.states.push(state);
            trace.sample_segment.push(Some(idx));
        }
        t0 += seg.duration;
        start = *trace.states.last().unwrap();
    }
    Ok(trace)
}

/// Samples the evolution of a trajectory's initial MES along its segments.
pub fn evolve_path(traj: &Trajectory, samples_per_segment: usize) -> Result<EvolutionTrace> {
    evolve_state(traj.initial_state(), &traj.segments, samples_per_segment)
}

/// γ_d = −∫⟨H⟩dt by the trapezoidal rule.
///
/// Each interval is integrated with the Hamiltonian of the segment it belongs
/// to, so switching the field at a boundary does not leak into the neighbours.
/// The raw integral is returned, without wrapping.
pub fn dynamical_phase(trace: &EvolutionTrace) -> f64 {
    let mut integral = 0.0;
    for i in 1..trace.len() {
        let Some(seg_idx) = trace.sample_segment[i] else {
            continue;
        };
        let seg = &trace.segments[seg_idx];
        let left = energy(&trace.states[i - 1], &seg.axis, seg.qubit);
        let dt = trace.times[i] - trace.times[i - 1];
        integral += 0.5 * dt * (left + trace.energies[i]);
    }
    -integral
}

/// arg⟨reference|current⟩ in (−π, π].
pub fn pancharatnam_phase(reference: &TwoQubitState, current: &TwoQubitState) -> Result<f64> {
    let z = reference.inner(current);
    let magnitude = z.norm();
    if magnitude < ORTHOGONAL_TOL {
        return Err(Error::OrthogonalStates { magnitude });
    }
    Ok(angle::wrap(z.arg()))
}

/// Pancharatnam phase of every sample relative to the initial state; `None`
/// where the phase is undefined.
pub fn pancharatnam_series(trace: &EvolutionTrace) -> Vec<Option<f64>> {
    trace
        .states
        .iter()
        .map(|s| pancharatnam_phase(trace.initial(), s).ok())
        .collect()
}

/// Passages of the real overlap with the initial state through zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CrossingReport {
    /// Times where the overlap changes sign.
    pub crossings: Vec<f64>,
    /// Times where the overlap touches zero and returns to the same sign.
    pub tangential: Vec<f64>,
    /// `crossings.len() mod 2`.
    pub parity: u8,
}

#[derive(Clone, Copy, PartialEq)]
enum Sign {
    Neg,
    Zero,
    Pos,
}

fn sign_of(x: f64) -> Sign {
    if x.abs() <= ZERO_OVERLAP_TOL {
        Sign::Zero
    } else if x > 0.0 {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// Detects sign changes of `Re⟨ψ(0)|ψ(t)⟩` along a trace.
///
/// For traces started from a canonical MES the overlap is real. Sign changes
/// between two samples are refined by bisection on the exact partial-time
/// evolution. Samples lying on zero are grouped into runs; a run flanked by
/// opposite signs is a crossing, one flanked by equal signs (or ending the
/// trace) is a tangential contact and does not enter the parity.
pub fn crossing_events(trace: &EvolutionTrace) -> CrossingReport {
    let mut report = CrossingReport::default();
    let values: Vec<f64> = trace.overlaps.iter().map(|z| z.re).collect();
    let mut last_sign = sign_of(values[0]);
    // start index of the current run of zero samples
    let mut zero_run: Option<usize> = if last_sign == Sign::Zero { Some(0) } else { None };
    let mut sign_before_run = Sign::Zero;

    for i in 1..values.len() {
        let s = sign_of(values[i]);
        match (s, zero_run) {
            (Sign::Zero, None) => {
                zero_run = Some(i);
                sign_before_run = last_sign;
            }
            (Sign::Zero, Some(_)) => {}
            (_, Some(run_start)) => {
                let t = closest_to_zero(trace, &values, run_start, i);
                if sign_before_run != Sign::Zero && sign_before_run != s {
                    report.crossings.push(t);
                } else {
                    report.tangential.push(t);
                }
                zero_run = None;
            }
            (_, None) => {
                if s != last_sign {
                    let seg = trace.sample_segment[i].expect("only sample 0 lacks a segment");
                    report.crossings.push(refine_crossing(
                        trace,
                        seg,
                        trace.times[i - 1],
                        trace.times[i],
                        values[i - 1],
                    ));
                }
            }
        }
        if s != Sign::Zero {
            last_sign = s;
        }
    }
    if let Some(run_start) = zero_run {
        report
            .tangential
            .push(closest_to_zero(trace, &values, run_start, values.len()));
    }
    report.parity = (report.crossings.len() % 2) as u8;
    report
}

fn closest_to_zero(trace: &EvolutionTrace, values: &[f64], start: usize, end: usize) -> f64 {
    let best = (start..end)
        .min_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()))
        .unwrap_or(start);
    trace.times[best]
}

fn refine_crossing(trace: &EvolutionTrace, seg: usize, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_positive = f_lo > 0.0;
    for _ in 0..200 {
        if hi - lo <= CROSSING_TIME_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = trace.overlap_at(seg, mid).re;
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Decomposition of a cyclic phase, all angles in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseBreakdown {
    pub dynamical: f64,
    pub geometric: f64,
    pub total: f64,
}

/// Berry phase of a spin-½ loop as minus half the enclosed solid angle, for
/// the precession cone of polar angle θ: −π(1 − cos θ).
pub fn berry_phase_from_area(theta: f64) -> f64 {
    -0.5 * TAU * (1.0 - theta.cos())
}

/// One period of a single qubit `cos(θ/2)|0⟩ + sin(θ/2)|1⟩` precessing under
/// `H = σ_z/2`.
///
/// The qubit is carried as the first factor of a product state so the same trace
/// machinery applies. `steps` samples cover the period T = 2π.
pub fn precession_demo(theta: f64, steps: usize) -> Result<PhaseBreakdown> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::domain(format!("theta = {theta} outside [0, π]")));
    }
    if steps < 1000 {
        return Err(Error::domain(format!("steps = {steps} below 1000")));
    }
    let (s, c) = (theta / 2.0).sin_cos();
    let initial = TwoQubitState::from_real([c, 0.0, s, 0.0])?;
    let period = Segment::new(Axis::z(), TAU, Qubit::First)?;
    let trace = evolve_state(initial, &[period], steps)?;
    let dynamical = dynamical_phase(&trace);
    let total = trace.final_overlap().arg();
    Ok(PhaseBreakdown {
        dynamical: angle::wrap(dynamical),
        geometric: angle::wrap(total - dynamical),
        total: angle::wrap(total),
    })
}
