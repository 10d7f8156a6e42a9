//! Two-qubit pure states, the complex concurrence, and the spinor-pair
//! parameterization of maximally entangled states (MES).
//!
//! Every MES can be brought, by a global phase, into the form
//!
//! ```text
//! |Ψ(a, b)⟩ = (a|00⟩ + b|01⟩ − b*|10⟩ + a*|11⟩) / √2,   |a|² + |b|² = 1,
//! ```
//!
//! so the MES manifold is the 3-sphere of pairs `(a, b)` with antipodes
//! identified, i.e. SO(3). [`SpinorPair`] keeps the sign; it is the SU(2) lift.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the squared norm of user-supplied amplitudes.
pub const INPUT_NORM_TOL: f64 = 1e-9;

/// Tolerance on `|C| = 1` when a state is required to be maximally entangled.
pub const MES_TOL: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// ε = e^{iπ/4}/√2 = (1 + i)/2.
pub const EPSILON: Complex64 = Complex64::new(0.5, 0.5);

/// Serde adapter for complex numbers written as `[re, im]`.
pub(crate) mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

fn all_finite(amps: &[Complex64]) -> bool {
    amps.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Normalized state α|00⟩ + β|01⟩ + γ|10⟩ + δ|11⟩.
///
/// Amplitudes are stored in the order `|00⟩, |01⟩, |10⟩, |11⟩`; the first
/// index is qubit 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct TwoQubitState {
    amps: [Complex64; 4],
}

#[derive(Serialize, Deserialize)]
struct RawState {
    amps: [[f64; 2]; 4],
}

impl TryFrom<RawState> for TwoQubitState {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        TwoQubitState::new(raw.amps.map(|[re, im]| Complex64::new(re, im)))
    }
}

impl From<TwoQubitState> for RawState {
    fn from(s: TwoQubitState) -> Self {
        RawState {
            amps: s.amps.map(|z| [z.re, z.im]),
        }
    }
}

impl TwoQubitState {
    /// Validates and renormalizes four amplitudes.
    pub fn new(amps: [Complex64; 4]) -> Result<Self> {
        if !all_finite(&amps) {
            return Err(Error::domain("amplitudes must be finite"));
        }
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        let scale = norm_sq.sqrt().recip();
        Ok(Self {
            amps: amps.map(|z| z * scale),
        })
    }

    /// Real-amplitude convenience constructor.
    pub fn from_real(amps: [f64; 4]) -> Result<Self> {
        Self::new(amps.map(|x| Complex64::new(x, 0.0)))
    }

    /// Wraps amplitudes that are already normalized (e.g. the output of a unitary).
    pub(crate) fn from_unitary_image(amps: [Complex64; 4]) -> Self {
        debug_assert!((amps.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-9);
        Self { amps }
    }

    /// The Bell state (|00⟩ + |11⟩)/√2, vertex A.
    pub fn bell() -> Self {
        SpinorPair::identity().to_mes()
    }

    pub fn amps(&self) -> &[Complex64; 4] {
        &self.amps
    }

    pub fn amp(&self, idx: usize) -> Complex64 {
        self.amps[idx]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// ⟨self|other⟩ = Σ conj(self_i)·other_i.
    pub fn inner(&self, other: &TwoQubitState) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(x, y)| x.conj() * y)
            .sum()
    }

    /// Complex concurrence C = 2(αδ − βγ). Its modulus is the pure-state concurrence.
    pub fn concurrence(&self) -> Complex64 {
        let [a, b, c, d] = self.amps;
        2.0 * (a * d - b * c)
    }

    /// The state multiplied by e^{iφ}.
    pub fn with_phase(&self, phase: f64) -> Self {
        let w = Complex64::cis(phase);
        Self {
            amps: self.amps.map(|z| z * w),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            amps: self.amps.map(|z| -z),
        }
    }

    pub fn is_maximally_entangled(&self) -> bool {
        (self.concurrence().norm() - 1.0).abs() <= MES_TOL
    }

    /// Extracts the spinor pair of an MES together with the phase `μ` that puts
    /// `e^{iμ}·self` into canonical form.
    ///
    /// `μ = −arg(C)/2` with `arg(C)` taken in [−π, π), so `μ ∈ (−π/2, π/2]`.
    pub fn canonical_spinor(&self) -> Result<(SpinorPair, f64)> {
        let c = self.concurrence();
        let modulus = c.norm();
        if (modulus - 1.0).abs() > MES_TOL {
            return Err(Error::NotMaximallyEntangled {
                concurrence: modulus,
            });
        }
        let mut arg = c.arg();
        if arg >= std::f64::consts::PI {
            arg = -std::f64::consts::PI;
        }
        let mu = -arg / 2.0;
        let w = Complex64::cis(mu);
        let (a, b) = (self.amps[0] * w, self.amps[1] * w);
        let scale = (a.norm_sqr() + b.norm_sqr()).sqrt().recip();
        Ok((SpinorPair::from_unit(a * scale, b * scale), mu))
    }

    /// Largest componentwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &TwoQubitState) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// `make_two_qubit` under its operation name.
pub fn make_two_qubit(amps: [Complex64; 4]) -> Result<TwoQubitState> {
    TwoQubitState::new(amps)
}

/// A point `(a, b)` of the unit 3-sphere in ℂ².
///
/// `(a, b)` and `(−a, −b)` describe the same MES and the same rotation, but are
/// distinct values here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair")]
pub struct SpinorPair {
    #[serde(with = "complex_pair")]
    a: Complex64,
    #[serde(with = "complex_pair")]
    b: Complex64,
}

#[derive(Deserialize)]
struct RawPair {
    #[serde(with = "complex_pair")]
    a: Complex64,
    #[serde(with = "complex_pair")]
    b: Complex64,
}

impl TryFrom<RawPair> for SpinorPair {
    type Error = Error;

    fn try_from(raw: RawPair) -> Result<Self> {
        SpinorPair::new(raw.a, raw.b)
    }
}

impl SpinorPair {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if !all_finite(&[a, b]) {
            return Err(Error::domain("spinor components must be finite"));
        }
        let norm_sq = a.norm_sqr() + b.norm_sqr();
        if (norm_sq - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        // unit to rounding already: keep as given (exact JSON round trips)
        if (norm_sq - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Self { a, b });
        }
        let scale = norm_sq.sqrt().recip();
        Ok(Self {
            a: a * scale,
            b: b * scale,
        })
    }

    /// Crate-internal constructor for pairs known to be on the sphere
    /// (rows of SU(2) products).
    pub(crate) fn from_unit(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    /// The pair (1, 0).
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: ZERO,
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn neg(&self) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
        }
    }

    /// The MES (a, b, −b*, a*)/√2.
    pub fn to_mes(&self) -> TwoQubitState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        TwoQubitState::from_unitary_image([
            self.a * s,
            self.b * s,
            -self.b.conj() * s,
            self.a.conj() * s,
        ])
    }

    /// Largest componentwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &SpinorPair) -> f64 {
        (self.a - other.a).norm().max((self.b - other.b).norm())
    }
}

/// Letters of the eight unbarred hypercube vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

impl Letter {
    pub const ALL: [Letter; 8] = [
        Letter::A,
        Letter::B,
        Letter::C,
        Letter::D,
        Letter::E,
        Letter::F,
        Letter::G,
        Letter::H,
    ];

    fn as_char(self) -> char {
        match self {
            Letter::A => 'A',
            Letter::B => 'B',
            Letter::C => 'C',
            Letter::D => 'D',
            Letter::E => 'E',
            Letter::F => 'F',
            Letter::G => 'G',
            Letter::H => 'H',
        }
    }

    fn pair(self) -> SpinorPair {
        let e = EPSILON;
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let (a, b) = match self {
            Letter::A => (one, ZERO),
            Letter::B => (e, e),
            Letter::C => (e.conj(), e.conj()),
            Letter::D => (e, -e),
            Letter::E => (e.conj(), -e.conj()),
            Letter::F => (i, ZERO),
            Letter::G => (ZERO, one),
            Letter::H => (ZERO, i),
        };
        SpinorPair::from_unit(a, b)
    }
}

/// One of the sixteen hypercube vertices; a barred label is the antipode.
///
/// Serialized as `"A"`…`"H"` and `"Abar"`…`"Hbar"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct VertexLabel {
    pub letter: Letter,
    pub barred: bool,
}

impl VertexLabel {
    pub const fn plain(letter: Letter) -> Self {
        Self {
            letter,
            barred: false,
        }
    }

    pub const fn bar(letter: Letter) -> Self {
        Self {
            letter,
            barred: true,
        }
    }

    /// All sixteen labels, unbarred first.
    pub fn all() -> impl Iterator<Item = VertexLabel> {
        Letter::ALL
            .into_iter()
            .map(VertexLabel::plain)
            .chain(Letter::ALL.into_iter().map(VertexLabel::bar))
    }

    pub fn antipode(self) -> Self {
        Self {
            letter: self.letter,
            barred: !self.barred,
        }
    }

    pub fn vertex(self) -> HypercubeVertex {
        let pair = self.letter.pair();
        HypercubeVertex {
            label: self,
            pair: if self.barred { pair.neg() } else { pair },
        }
    }

    pub fn pair(self) -> SpinorPair {
        self.vertex().pair
    }

    pub fn state(self) -> TwoQubitState {
        self.pair().to_mes()
    }
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter.as_char())?;
        if self.barred {
            f.write_str("bar")?;
        }
        Ok(())
    }
}

impl FromStr for VertexLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownLabel(s.to_string());
        // precomposed macron letters
        match s {
            "Ā" => return Ok(VertexLabel::bar(Letter::A)),
            "Ē" => return Ok(VertexLabel::bar(Letter::E)),
            "Ḡ" => return Ok(VertexLabel::bar(Letter::G)),
            _ => {}
        }
        let (head, barred) = match s.strip_suffix("bar").or_else(|| s.strip_suffix('\u{0304}')) {
            Some(h) => (h, true),
            None => (s, false),
        };
        let mut chars = head.chars();
        let (Some(ch), None) = (chars.next(), chars.next()) else {
            return Err(unknown());
        };
        let letter = Letter::ALL
            .into_iter()
            .find(|l| l.as_char() == ch)
            .ok_or_else(unknown)?;
        Ok(VertexLabel { letter, barred })
    }
}

impl TryFrom<String> for VertexLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<VertexLabel> for String {
    fn from(l: VertexLabel) -> Self {
        l.to_string()
    }
}

/// A labelled point of the hypercube inscribed in S³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypercubeVertex {
    pub label: VertexLabel,
    pub pair: SpinorPair,
}

/// Looks a vertex up by its textual label (`"A"`, `"Dbar"`, `"Ā"`, ...).
pub fn hypercube_vertex(label: &str) -> Result<HypercubeVertex> {
    Ok(label.parse::<VertexLabel>()?.vertex())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn arb_pair() -> impl Strategy<Value = SpinorPair> {
        prop::array::uniform4(-1.0f64..1.0)
            .prop_filter("non-degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|v| {
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                SpinorPair::new(c(v[0] / n, v[1] / n), c(v[2] / n, v[3] / n)).unwrap()
            })
    }

    fn arb_state() -> impl Strategy<Value = TwoQubitState> {
        prop::array::uniform8(-1.0f64..1.0)
            .prop_filter("non-degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|v| {
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                TwoQubitState::new([
                    c(v[0] / n, v[1] / n),
                    c(v[2] / n, v[3] / n),
                    c(v[4] / n, v[5] / n),
                    c(v[6] / n, v[7] / n),
                ])
                .unwrap()
            })
    }

    #[test]
    fn construction_checks_norm() {
        assert!(TwoQubitState::from_real([FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).is_ok());
        assert!(TwoQubitState::from_real([1.0, 0.0, 0.0, 0.0]).is_ok());
        assert!(matches!(
            TwoQubitState::from_real([1.0, 1.0, 0.0, 0.0]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(TwoQubitState::from_real([f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn concurrence_examples() {
        let bell = TwoQubitState::from_real([FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        assert!((bell.concurrence() - c(1.0, 0.0)).norm() < 1e-12);
        let product = TwoQubitState::from_real([0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(product.concurrence().norm() < 1e-15);
        let singlet = TwoQubitState::from_real([0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]).unwrap();
        assert!((singlet.concurrence() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mes_from_spinor_examples() {
        let s = FRAC_1_SQRT_2;
        let a = SpinorPair::identity().to_mes();
        assert!(a.max_abs_diff(&TwoQubitState::from_real([s, 0.0, 0.0, s]).unwrap()) < 1e-15);

        let h = SpinorPair::new(c(0.0, 0.0), c(0.0, 1.0)).unwrap().to_mes();
        let expect = TwoQubitState::new([c(0.0, 0.0), c(0.0, s), c(0.0, s), c(0.0, 0.0)]).unwrap();
        assert!(h.max_abs_diff(&expect) < 1e-15);

        let abar = SpinorPair::identity().neg().to_mes();
        assert!(abar.max_abs_diff(&a.neg()) < 1e-15);
        assert!((abar.concurrence() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn canonical_spinor_examples() {
        let (pair, mu) = TwoQubitState::bell().canonical_spinor().unwrap();
        assert!(pair.max_abs_diff(&SpinorPair::identity()) < 1e-15);
        assert_eq!(mu, 0.0);

        let s = FRAC_1_SQRT_2;
        let triplet = TwoQubitState::from_real([0.0, s, s, 0.0]).unwrap();
        let (pair, mu) = triplet.canonical_spinor().unwrap();
        assert!((mu - PI / 2.0).abs() < 1e-15);
        assert!(pair.max_abs_diff(&SpinorPair::new(c(0.0, 0.0), c(0.0, 1.0)).unwrap()) < 1e-15);
        // e^{iμ}·state is exactly in canonical form
        assert!(pair.to_mes().max_abs_diff(&triplet.with_phase(mu)) < 1e-15);

        let product = TwoQubitState::from_real([0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            product.canonical_spinor(),
            Err(Error::NotMaximallyEntangled { .. })
        ));
    }

    #[test]
    fn vertex_overlaps() {
        let a = VertexLabel::plain(Letter::A).state();
        let f = VertexLabel::plain(Letter::F).state();
        let b = VertexLabel::plain(Letter::B).state();
        assert!(a.inner(&f).norm() < 1e-15);
        assert!((a.inner(&b) - c(0.5, 0.0)).norm() < 1e-15);
        for l in VertexLabel::all() {
            let s = l.state();
            assert!((s.inner(&s) - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn vertex_catalog() {
        let a = hypercube_vertex("A").unwrap();
        assert_eq!(a.pair, SpinorPair::identity());
        let d = hypercube_vertex("D").unwrap();
        assert_eq!(d.pair.a(), c(0.5, 0.5));
        assert_eq!(d.pair.b(), c(-0.5, -0.5));
        let abar = hypercube_vertex("Abar").unwrap();
        assert_eq!(abar.pair.a(), c(-1.0, 0.0));
        assert_eq!(hypercube_vertex("Ā").unwrap().label, abar.label);
        assert_eq!(hypercube_vertex("E\u{0304}").unwrap().label, VertexLabel::bar(Letter::E));
        assert!(matches!(hypercube_vertex("Z"), Err(Error::UnknownLabel(_))));
        assert!(matches!(hypercube_vertex("AB"), Err(Error::UnknownLabel(_))));
        for l in VertexLabel::all() {
            assert_eq!(l.antipode().pair(), l.pair().neg());
            assert_eq!(l.pair().neg().neg(), l.pair());
            assert_eq!(l.to_string().parse::<VertexLabel>().unwrap(), l);
        }
    }

    #[test]
    fn json_shapes() {
        let v = serde_json::to_value(TwoQubitState::bell()).unwrap();
        assert_eq!(v["amps"].as_array().unwrap().len(), 4);
        assert_eq!(v["amps"][1], serde_json::json!([0.0, 0.0]));
        let p: SpinorPair = serde_json::from_str(r#"{"a":[0,0],"b":[0,1]}"#).unwrap();
        assert_eq!(p.b(), c(0.0, 1.0));
        assert!(serde_json::from_str::<SpinorPair>(r#"{"a":[1,0],"b":[1,0]}"#).is_err());
        assert_eq!(
            serde_json::to_string(&VertexLabel::bar(Letter::H)).unwrap(),
            "\"Hbar\""
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn mes_overlaps_are_real(p in arb_pair(), q in arb_pair()) {
            let z = p.to_mes().inner(&q.to_mes());
            prop_assert!(z.im.abs() < 1e-12);
        }

        #[test]
        fn concurrence_bounded(s in arb_state()) {
            prop_assert!(s.concurrence().norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn canonicalization_recovers_pair_up_to_sign(p in arb_pair(), phase in -PI..PI) {
            let state = p.to_mes().with_phase(phase);
            let (q, mu) = state.canonical_spinor().unwrap();
            let d = q.max_abs_diff(&p).min(q.max_abs_diff(&p.neg()));
            prop_assert!(d < 1e-10);
            prop_assert!(mu > -PI / 2.0 && mu <= PI / 2.0);
            prop_assert!(q.to_mes().max_abs_diff(&state.with_phase(mu)) < 1e-10);
        }
    }
}
