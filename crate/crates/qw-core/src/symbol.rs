//! Momentum-space analysis of the translation-invariant bulk walk.
//!
//! Conjugating U = SC0 by the Fourier transform gives the 2x2 symbol
//!
//! ```text
//! M(xi) = [[ a0 e^{i xi},  b0 e^{i xi}  ],
//!          [ c0 e^{-i xi}, d0 e^{-i xi} ]]
//! ```
//!
//! whose characteristic polynomial in lambda = e^{i theta} is the
//! dispersion function
//!
//! ```text
//! D(xi, theta) = lambda^2 - 2 lambda p e^{i g/2} cos(xi + al - g/2) + e^{i g}.
//! ```
//!
//! The essential spectrum is the closure of the eigenvalue curves: two arcs
//! of the unit circle with phases g/2 + [arccos p, pi - arccos p] and the
//! same shifted by pi. The four arc endpoints (the phases of
//! e^{i g/2}(+-p +- i q)) are thresholds: there the group velocity
//! vanishes. For p = 1 the arcs close up into the full circle (two
//! thresholds of multiplicity two); for p = 0 the spectrum collapses to the
//! two points +-i e^{i g/2} and the band machinery refuses to run.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{
    bulk_coin, eigenpair_residual, CoinField, Mat2, ModelParams, State, Window,
};

const TAU: f64 = 2.0 * PI;

/// Reduce a phase to [0, 2*pi).
pub fn reduce_phase(theta: f64) -> f64 {
    let r = theta % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Circular distance between two phases, in [0, pi].
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = reduce_phase(a - b);
    d.min(TAU - d)
}

/// Symbol matrix M(xi) of the bulk walk.
pub fn symbol_matrix(xi: f64, params: &ModelParams) -> Mat2 {
    let c0 = bulk_coin(params);
    let fw = Complex64::from_polar(1.0, xi);
    let bw = fw.conj();
    Mat2::new(c0.a * fw, c0.b * fw, c0.c * bw, c0.d * bw)
}

/// Dispersion function det(M(xi) - e^{i theta}) evaluated through the
/// closed form; zero exactly on the eigenvalue curves.
pub fn dispersion(xi: f64, theta: f64, params: &ModelParams) -> Complex64 {
    let lambda = Complex64::from_polar(1.0, theta);
    let w = xi + params.alpha - params.gamma / 2.0;
    let mid = Complex64::from_polar(1.0, params.gamma / 2.0) * (2.0 * params.p * w.cos());
    lambda * lambda - lambda * mid + Complex64::from_polar(1.0, params.gamma)
}

/// Closed arc of unit-circle phases from `lo` to `hi` counterclockwise;
/// both ends reduced to [0, 2*pi), so `hi < lo` means the arc wraps
/// through zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub lo: f64,
    pub hi: f64,
}

impl Arc {
    pub fn length(&self) -> f64 {
        if self.hi >= self.lo {
            self.hi - self.lo
        } else {
            self.hi - self.lo + TAU
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        let t = reduce_phase(theta);
        if self.hi >= self.lo {
            self.lo <= t && t <= self.hi
        } else {
            t >= self.lo || t <= self.hi
        }
    }

    /// Zero inside the arc, otherwise circular distance to the nearer end.
    pub fn distance(&self, theta: f64) -> f64 {
        if self.contains(theta) {
            0.0
        } else {
            phase_distance(theta, self.lo).min(phase_distance(theta, self.hi))
        }
    }
}

/// Arc endpoint where the group velocity vanishes. Multiplicity 2 marks
/// the p = 1 case where two endpoints coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub phase: f64,
    pub multiplicity: u32,
}

/// The essential spectrum of the bulk walk: two arcs and their endpoint
/// thresholds. `degenerate` flags the full-circle case p = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    pub arcs: [Arc; 2],
    pub thresholds: Vec<Threshold>,
    pub degenerate: bool,
}

impl BandStructure {
    pub fn contains(&self, theta: f64) -> bool {
        self.arcs.iter().any(|a| a.contains(theta))
    }

    /// Distance from a phase to the band (zero inside either arc).
    pub fn gap_distance(&self, theta: f64) -> f64 {
        self.arcs
            .iter()
            .map(|a| a.distance(theta))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from a phase to the nearest threshold.
    pub fn threshold_distance(&self, theta: f64) -> f64 {
        self.thresholds
            .iter()
            .map(|t| phase_distance(theta, t.phase))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn threshold_phases(&self) -> Vec<f64> {
        self.thresholds.iter().map(|t| t.phase).collect()
    }
}

/// Band arcs and thresholds for the given bulk parameters.
///
/// Arc endpoints and threshold phases come from one shared computation, so
/// they coincide bitwise. Errors with `UnsupportedParameter` at p = 0.
pub fn essential_band(params: &ModelParams) -> Result<BandStructure> {
    if params.p == 0.0 {
        return Err(Error::UnsupportedParameter(
            "p = 0 collapses the essential spectrum to two points; band arcs are undefined"
                .into(),
        ));
    }
    let half_gamma = params.gamma / 2.0;
    let a = params.p.acos(); // in [0, pi/2] for p in (0, 1]
    let e0 = reduce_phase(half_gamma + a);
    let e1 = reduce_phase(half_gamma + (PI - a));
    let e2 = reduce_phase(half_gamma + (PI + a));
    let e3 = reduce_phase(half_gamma + (TAU - a));
    let arcs = [Arc { lo: e0, hi: e1 }, Arc { lo: e2, hi: e3 }];
    let degenerate = params.p == 1.0;
    let thresholds = if degenerate {
        // a = 0: e0 == e3 and e1 == e2
        vec![
            Threshold {
                phase: e0,
                multiplicity: 2,
            },
            Threshold {
                phase: e1,
                multiplicity: 2,
            },
        ]
    } else {
        [e0, e1, e2, e3]
            .into_iter()
            .map(|phase| Threshold {
                phase,
                multiplicity: 1,
            })
            .collect()
    };
    Ok(BandStructure {
        arcs,
        thresholds,
        degenerate,
    })
}

/// Threshold phases alone; same arithmetic path as `essential_band`, so
/// the values equal the arc endpoints exactly.
pub fn thresholds(params: &ModelParams) -> Result<Vec<Threshold>> {
    essential_band(params).map(|b| b.thresholds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    /// Nonzero group velocity: the level set is locally a graph over theta.
    Regular,
    /// Vanishing xi-derivative of the dispersion (threshold phases).
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiPoint {
    pub xi: f64,
    pub kind: PointKind,
}

/// Solutions xi of D(xi, theta) = 0 for a fixed phase theta.
#[derive(Debug, Clone, PartialEq)]
pub struct FermiSet {
    pub theta: f64,
    pub points: Vec<FermiPoint>,
}

impl FermiSet {
    pub fn regular(&self) -> impl Iterator<Item = &FermiPoint> {
        self.points
            .iter()
            .filter(|p| p.kind == PointKind::Regular)
    }

    pub fn singular(&self) -> impl Iterator<Item = &FermiPoint> {
        self.points
            .iter()
            .filter(|p| p.kind == PointKind::Singular)
    }
}

/// Tolerance for deciding the borderline |cos(theta - g/2)| = p.
const THRESHOLD_EQ_TOL: f64 = 1e-12;

/// Level set of the dispersion at phase theta.
///
/// Solving D = 0 reduces to cos(xi + al - g/2) = cos(theta - g/2) / p:
/// two regular solutions strictly inside a band arc, one singular solution
/// at a threshold, nothing in a gap.
pub fn fermi_set(theta: f64, params: &ModelParams) -> Result<FermiSet> {
    if params.p == 0.0 {
        return Err(Error::UnsupportedParameter(
            "p = 0 makes the symbol independent of xi; the level set degenerates".into(),
        ));
    }
    let cth = (theta - params.gamma / 2.0).cos();
    let excess = cth.abs() - params.p;
    let to_xi = |w: f64| reduce_phase(w - params.alpha + params.gamma / 2.0);
    let mut points = Vec::new();
    if excess.abs() <= THRESHOLD_EQ_TOL {
        let w = if cth >= 0.0 { 0.0 } else { PI };
        points.push(FermiPoint {
            xi: to_xi(w),
            kind: PointKind::Singular,
        });
    } else if excess < 0.0 {
        let w = (cth / params.p).acos(); // in (0, pi)
        points.push(FermiPoint {
            xi: to_xi(w),
            kind: PointKind::Regular,
        });
        points.push(FermiPoint {
            xi: to_xi(-w),
            kind: PointKind::Regular,
        });
        points.sort_by(|a, b| a.xi.total_cmp(&b.xi));
    }
    Ok(FermiSet { theta, points })
}

/// Both eigenphase branches of the symbol at momentum xi with unit
/// eigenvectors, (theta_plus, v_plus) first.
///
/// The branch phases are g/2 +- arccos(p cos(xi + al - g/2)); eigenvector
/// phase convention: the first component is real nonnegative when it is
/// nonzero, otherwise the second is.
pub fn symbol_eigenpairs(xi: f64, params: &ModelParams) -> [(f64, [Complex64; 2]); 2] {
    let w = xi + params.alpha - params.gamma / 2.0;
    let c = (params.p * w.cos()).clamp(-1.0, 1.0);
    let phi = c.acos();
    let half_gamma = params.gamma / 2.0;
    let m = symbol_matrix(xi, params);
    let pair = |theta: f64| -> (f64, [Complex64; 2]) {
        let lambda = Complex64::from_polar(1.0, theta);
        (reduce_phase(theta), eigenvector_for(&m, lambda))
    };
    [pair(half_gamma + phi), pair(half_gamma - phi)]
}

/// Unit eigenvector of a 2x2 matrix for a (near-)eigenvalue lambda, with
/// the deterministic phase convention described on `symbol_eigenpairs`.
fn eigenvector_for(m: &Mat2, lambda: Complex64) -> [Complex64; 2] {
    // (m - lambda) v = 0; both rows give a candidate kernel direction
    let v1 = [m.b, lambda - m.a];
    let v2 = [lambda - m.d, m.c];
    let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
    let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
    let mut v = if n1 >= n2 { v1 } else { v2 };
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if norm < 1e-14 {
        // lambda * identity: any direction is an eigenvector
        return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    v = [v[0] / norm, v[1] / norm];
    let anchor = if v[0].norm() > 1e-12 { v[0] } else { v[1] };
    let phase = anchor / anchor.norm();
    [v[0] * phase.conj(), v[1] * phase.conj()]
}

/// Sharply truncated plane wave on `width` sites together with its branch
/// phase and the exact residual ||(U - e^{i theta}) psi||.
#[derive(Debug, Clone)]
pub struct QuasiMode {
    pub state: State,
    pub theta: f64,
    pub residual: f64,
}

/// Build the plus-branch plane wave e^{i x xi} v(xi) cut to a `width`-site
/// window around the origin and normalized. The residual decays like
/// width^{-1/2}: only the two cut edges fail the eigenvalue equation.
pub fn quasi_mode(xi: f64, width: usize, params: &ModelParams) -> Result<QuasiMode> {
    if width < 2 {
        return Err(Error::InvalidParameter {
            name: "width",
            reason: format!("need at least 2 sites, got {width}"),
        });
    }
    let [(theta, v), _] = symbol_eigenpairs(xi, params);
    let lo = -(width as i64) / 2;
    let window = Window::new(lo, lo + width as i64 - 1)?;
    let mut state = State::zero(window);
    for x in window.sites() {
        let phase = Complex64::from_polar(1.0, xi * x as f64);
        state.set(x, [v[0] * phase, v[1] * phase]).expect("in window");
    }
    let state = state.normalized().expect("plane wave has unit-norm spinors");
    let field = CoinField::constant(window.expanded(1), bulk_coin(params));
    let lambda = Complex64::from_polar(1.0, theta);
    let residual = eigenpair_residual(&state, &field, lambda)?;
    Ok(QuasiMode {
        state,
        theta,
        residual,
    })
}
