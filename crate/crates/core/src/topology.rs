//! Closed paths in SO(3) and their Z₂ homotopy class.
//!
//! An MES `(a, b)` is the SU(2) matrix `Q = [[a, b], [−b*, a*]]`. A rotation of
//! qubit 1 multiplies `Q` on the left (`Q → U·Q`), a rotation of qubit 2 on
//! the right (`Q → Q·Uᵀ`). A path that closes in SO(3) ends at `±Q₀`; the sign
//! is its class: `+` for contractible loops, `−` for the others.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{Axis, OneQubitUnitary, Qubit, Segment, Trajectory};
use crate::qstate::SpinorPair;

/// Componentwise tolerance for deciding that a lift returns to ±initial.
pub const CLOSURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathClass {
    Plus,
    Minus,
}

impl PathClass {
    /// +1 for `Plus`, −1 for `Minus`.
    pub fn sign(self) -> i8 {
        match self {
            PathClass::Plus => 1,
            PathClass::Minus => -1,
        }
    }

    /// Class of the concatenated loop.
    pub fn compose(self, other: PathClass) -> PathClass {
        if self == other {
            PathClass::Plus
        } else {
            PathClass::Minus
        }
    }

    /// Crossing parity expected for this class.
    pub fn parity(self) -> u8 {
        match self {
            PathClass::Plus => 0,
            PathClass::Minus => 1,
        }
    }
}

impl fmt::Display for PathClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathClass::Plus => "plus",
            PathClass::Minus => "minus",
        })
    }
}

/// The two reference circuits through the hypercube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitKind {
    /// A → B → F → D → A
    Plus,
    /// A → B → F → Ē → Ā
    Minus,
}

impl FromStr for CircuitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(CircuitKind::Plus),
            "minus" => Ok(CircuitKind::Minus),
            other => Err(Error::domain(format!("unknown circuit {other:?}"))),
        }
    }
}

impl fmt::Display for CircuitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CircuitKind::Plus => "plus",
            CircuitKind::Minus => "minus",
        })
    }
}

/// Duration of every edge of the reference circuits.
pub const EDGE_TIME: f64 = TAU / 3.0;

fn edge(signs: [f64; 3], qubit: Qubit) -> Segment {
    let r = (1.0f64 / 3.0).sqrt();
    let axis = Axis::new(signs[0] * r, signs[1] * r, signs[2] * r).expect("unit axis");
    Segment::new(axis, EDGE_TIME, qubit).expect("positive duration")
}

/// The four operators of a reference circuit: two on qubit 1 (A → B → F), two
/// on qubit 2.
pub fn standard_schedule(kind: CircuitKind) -> Vec<Segment> {
    let mut segs = vec![
        edge([-1.0, -1.0, -1.0], Qubit::First),
        edge([1.0, -1.0, -1.0], Qubit::First),
    ];
    match kind {
        CircuitKind::Plus => {
            segs.push(edge([-1.0, -1.0, 1.0], Qubit::Second));
            segs.push(edge([-1.0, 1.0, 1.0], Qubit::Second));
        }
        CircuitKind::Minus => {
            segs.push(edge([1.0, -1.0, -1.0], Qubit::Second));
            segs.push(edge([1.0, 1.0, -1.0], Qubit::Second));
        }
    }
    segs
}

/// The reference circuit started from vertex A = (1, 0).
pub fn standard_circuit(kind: CircuitKind) -> Trajectory {
    Trajectory::new(SpinorPair::identity(), standard_schedule(kind))
}

/// The reference circuit's operators applied to another starting MES.
///
/// Left and right multiplications do not commute, so the class of a fixed
/// schedule depends on where it starts: the plus schedule started at H = (0, i)
/// ends at −H.
pub fn standard_schedule_from(kind: CircuitKind, initial: SpinorPair) -> Trajectory {
    Trajectory::new(initial, standard_schedule(kind))
}

fn su2_of(pair: &SpinorPair) -> OneQubitUnitary {
    let (a, b) = (pair.a(), pair.b());
    OneQubitUnitary::from_rows([[a, b], [-b.conj(), a.conj()]])
}

/// Transports the initial pair along the path in SU(2) without quotienting the
/// sign.
pub fn lift_endpoint(traj: &Trajectory) -> SpinorPair {
    let q = traj.segments.iter().fold(su2_of(&traj.initial), |q, seg| {
        let u = seg.unitary();
        match seg.qubit {
            Qubit::First => u.mul(&q),
            Qubit::Second => q.mul(&u.transpose()),
        }
    });
    SpinorPair::from_unit(q.m[0][0], q.m[0][1])
}

/// Whether the lift ends at `+initial` or `−initial`, if at either.
fn endpoint_sign(traj: &Trajectory) -> (SpinorPair, Option<PathClass>) {
    let end = lift_endpoint(traj);
    let class = if end.max_abs_diff(&traj.initial) <= CLOSURE_TOL {
        Some(PathClass::Plus)
    } else if end.max_abs_diff(&traj.initial.neg()) <= CLOSURE_TOL {
        Some(PathClass::Minus)
    } else {
        None
    };
    (end, class)
}

/// True iff the path returns to the initial SO(3) point.
pub fn is_closed_so3(traj: &Trajectory) -> bool {
    endpoint_sign(traj).1.is_some()
}

/// Homotopy class of a closed path.
pub fn classify(traj: &Trajectory) -> Result<PathClass> {
    endpoint_sign(traj).1.ok_or(Error::NotClosed)
}

/// Serializable summary `{"closed", "class", "lift_endpoint"}`; `class` is
/// `null` for open paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub closed: bool,
    pub class: Option<PathClass>,
    pub lift_endpoint: SpinorPair,
}

pub fn classification(traj: &Trajectory) -> Classification {
    let (lift_endpoint, class) = endpoint_sign(traj);
    Classification {
        closed: class.is_some(),
        class,
        lift_endpoint,
    }
}
