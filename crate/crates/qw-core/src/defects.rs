//! Embedded eigenfunctions pinned by reflection defects, and the verdict.
//!
//! A reflection pair at center y (anti-diagonal coin at y-1 and y) traps
//! the closed-form states
//!
//! ```text
//! psi_+-(x) = (1/sqrt 2) [ -+ i e^{i(b' - g'/2)} d(x+1) ; d(x) ]
//! ```
//!
//! with eigenvalues +- i e^{i g'/2}, regardless of the coins elsewhere:
//! only the two coins under the support enter U psi. Their phases sit in
//! the interior of the essential band whenever (g'+pi)/2 does, which is
//! what makes them detectable as embedded point spectrum.
//!
//! Detection runs in two independent ways: an SVD null-space search for
//! compactly supported kernels of U - lambda, and a stability check on
//! band-interior localized eigenvalues of truncations at two window sizes.

use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::lattice::{eigenpair_residual, CoinField, DefectSpec, ModelParams, State, Window};
use crate::spectra::{
    build_matrix, classify, eigendecompose, ClassifyTolerances, SpectralBoundary, SpectralLabel,
};
use crate::symbol::{essential_band, reduce_phase, BandStructure};

/// Singular values at or below this fraction of the leading one count as
/// null directions; genuine compact kernels here are exact analytically.
pub const KERNEL_RANK_TOL: f64 = 1e-10;

/// Branch of the trapped eigenpair: eigenvalue +- i e^{i g'/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectSign {
    Plus,
    Minus,
}

impl DefectSign {
    fn half_turn(self) -> f64 {
        match self {
            DefectSign::Plus => FRAC_PI_2,
            DefectSign::Minus => -FRAC_PI_2,
        }
    }
}

/// Eigenvalue of the trapped state: e^{i(g'/2 +- pi/2)}.
pub fn defect_eigenvalue(sign: DefectSign, gamma_prime: f64) -> Complex64 {
    Complex64::from_polar(1.0, gamma_prime / 2.0 + sign.half_turn())
}

/// Normalized superposition of trapped states over a defect collection.
#[derive(Debug, Clone)]
pub struct DefectEigenfunction {
    pub sign: DefectSign,
    pub beta_prime: f64,
    pub gamma_prime: f64,
    pub coefficients: Vec<Complex64>,
    pub state: State,
}

impl DefectEigenfunction {
    pub fn eigenvalue(&self) -> Complex64 {
        defect_eigenvalue(self.sign, self.gamma_prime)
    }
}

/// Build sum_j kappa_j T_{y_j} psi_sign, normalized.
///
/// Component 0 lands on {y_j - 1}, component 1 on {y_j}; translates at
/// distinct centers occupy disjoint (site, component) slots, so the norm
/// is just |kappa| and orthogonality between coefficient choices is exact.
pub fn build_defect_eigenfunction(
    defects: &DefectSpec,
    kappas: &[Complex64],
    sign: DefectSign,
) -> Result<DefectEigenfunction> {
    let centers = defects.centers();
    if centers.is_empty() {
        return Err(Error::InvalidParameter {
            name: "defects",
            reason: "no defect centers to build an eigenfunction on".into(),
        });
    }
    if kappas.len() != centers.len() {
        return Err(Error::InvalidParameter {
            name: "kappas",
            reason: format!(
                "{} coefficients for {} defect centers",
                kappas.len(),
                centers.len()
            ),
        });
    }
    if kappas.iter().all(|k| k.norm() == 0.0) {
        return Err(Error::AllZeroCoefficients);
    }
    let window = Window::new(centers[0] - 1, *centers.last().unwrap())?;
    let mut state = State::zero(window);
    let comp0_phase = defects.beta_prime - defects.gamma_prime / 2.0 - sign.half_turn();
    let comp0_unit = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, comp0_phase);
    let comp1_unit = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for (&y, &kappa) in centers.iter().zip(kappas.iter()) {
        state.add_at(y - 1, [kappa * comp0_unit, Complex64::new(0.0, 0.0)])?;
        state.add_at(y, [Complex64::new(0.0, 0.0), kappa * comp1_unit])?;
    }
    Ok(DefectEigenfunction {
        sign,
        beta_prime: defects.beta_prime,
        gamma_prime: defects.gamma_prime,
        coefficients: kappas.to_vec(),
        state: state.normalized()?,
    })
}

/// Residual ||U psi - lambda psi|| over the full lattice (padded step).
/// The field must cover the state's window; see `eigenpair_residual`.
pub fn verify_eigenpair(field: &CoinField, lambda: Complex64, state: &State) -> Result<f64> {
    eigenpair_residual(state, field, lambda)
}

/// Orthonormal basis of {psi : supp psi in `support`, (U - lambda) psi = 0}.
///
/// The restriction of U - lambda maps amplitudes on the N_s support sites
/// into component 0 on [lo-1, hi] and component 1 on [lo, hi+1] (every
/// other output slot is identically zero), a (2 N_s + 2) x (2 N_s) matrix
/// whose numerical null space (SVD, ratio `KERNEL_RANK_TOL`) is returned
/// as states on `support`. Empty when lambda is not an eigenvalue with an
/// eigenfunction confined to the window.
pub fn compact_kernel(
    field: &CoinField,
    lambda: Complex64,
    support: Window,
) -> Result<Vec<State>> {
    if !field.window().contains_window(&support.expanded(1)) {
        return Err(Error::WindowTooSmall {
            lo: field.window().lo(),
            hi: field.window().hi(),
            reason: format!(
                "kernel search needs a one-site coin margin around support {support}"
            ),
        });
    }
    let ns = support.len();
    let rows = 2 * (ns + 1);
    let cols = 2 * ns;
    // row layout: component 0 on [lo-1, hi] first, component 1 on [lo, hi+1]
    let row0 = |x: i64| (x - (support.lo() - 1)) as usize;
    let row1 = |x: i64| ns + 1 + (x - support.lo()) as usize;
    let mut m = Array2::from_elem((rows, cols), Complex64::new(0.0, 0.0));
    for (i, x) in support.sites().enumerate() {
        let coin = field.coin(x);
        let col0 = 2 * i;
        let col1 = 2 * i + 1;
        m[[row0(x - 1), col0]] += coin.a;
        m[[row0(x - 1), col1]] += coin.b;
        m[[row1(x + 1), col0]] += coin.c;
        m[[row1(x + 1), col1]] += coin.d;
        m[[row0(x), col0]] -= lambda;
        m[[row1(x), col1]] -= lambda;
    }
    let (_, sigma, vt) = m
        .svd(false, true)
        .map_err(|e| Error::ConvergenceFailure(format!("kernel SVD: {e}")))?;
    let vt = vt.expect("requested right singular vectors");
    let lead = sigma.iter().fold(0.0f64, |a, &s| a.max(s));
    let mut basis = Vec::new();
    for (k, &s) in sigma.iter().enumerate() {
        if s <= KERNEL_RANK_TOL * lead {
            // null vectors are conjugated rows of V^H, already orthonormal
            let amp: Vec<[Complex64; 2]> = (0..ns)
                .map(|i| [vt[[k, 2 * i]].conj(), vt[[k, 2 * i + 1]].conj()])
                .collect();
            basis.push(State::from_amplitudes(support, amp)?);
        }
    }
    Ok(basis)
}

/// Which detection route to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMethod {
    CompactKernel,
    SpectralLocalization,
}

impl DetectionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionMethod::CompactKernel => "compact_kernel",
            DetectionMethod::SpectralLocalization => "spectral_localization",
        }
    }
}

impl std::fmt::Display for DetectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters for `detect_edge_defects`. `model` carries the bulk coin
/// whose band structure the verdict is judged against.
#[derive(Debug, Clone)]
pub struct DetectConfig {
    pub model: ModelParams,
    pub method: DetectionMethod,
    /// Grid step (radians) for the blind band-interior scan.
    pub theta_step: f64,
    /// Guard radius around thresholds where no conclusion is drawn.
    pub threshold_exclusion: f64,
    /// Kernel-search support; defaults to the field window minus a margin.
    pub support: Option<Window>,
    /// Half-width L of the truncation pair (L, 2L) for the spectral route.
    pub half_width: i64,
    /// Two-window agreement tolerance on eigenvalues.
    pub stability_tol: f64,
    /// Known defect phase g', enabling the exact candidates +- i e^{i g'/2}.
    pub defect_phase: Option<f64>,
    pub classify: ClassifyTolerances,
}

impl DetectConfig {
    pub fn new(model: ModelParams, method: DetectionMethod) -> Self {
        DetectConfig {
            model,
            method,
            theta_step: 0.01,
            threshold_exclusion: 0.05,
            support: None,
            half_width: 60,
            stability_tol: 1e-6,
            defect_phase: None,
            classify: ClassifyTolerances::periodic(),
        }
    }
}

/// One confirmed embedded eigenvalue.
#[derive(Debug, Clone)]
pub struct DetectionEvidence {
    pub lambda: Complex64,
    pub kernel_dim: usize,
    /// Extent [x_lo, x_hi] of the associated eigenfunctions' support.
    pub support: (i64, i64),
}

/// Defect verdict with the eigenvalues that witness it.
#[derive(Debug, Clone)]
pub struct DetectionReport {
    pub verdict: bool,
    pub method: DetectionMethod,
    pub evidence: Vec<DetectionEvidence>,
    pub band: BandStructure,
    pub config: DetectConfig,
}

/// Decide whether the field hosts edge defects: presence of point spectrum
/// embedded in the band interior (away from thresholds) is the criterion.
pub fn detect_edge_defects(field: &CoinField, config: &DetectConfig) -> Result<DetectionReport> {
    let band = essential_band(&config.model)?;
    let evidence = match config.method {
        DetectionMethod::CompactKernel => kernel_evidence(field, config, &band)?,
        DetectionMethod::SpectralLocalization => localization_evidence(field, config, &band)?,
    };
    Ok(DetectionReport {
        verdict: !evidence.is_empty(),
        method: config.method,
        evidence,
        band,
        config: config.clone(),
    })
}

/// Candidate phases for the kernel scan: a uniform grid over the band
/// arcs plus the exact trapped-state phases when the defect phase is
/// known, every entry guarded away from thresholds by the exclusion
/// radius (the band theory draws no conclusion there) and candidates
/// outside the band dropped (no embedding to test).
pub fn scan_phases(band: &BandStructure, config: &DetectConfig) -> Vec<f64> {
    let mut phases: Vec<f64> = Vec::new();
    for arc in &band.arcs {
        let steps = (arc.length() / config.theta_step).floor() as usize;
        for k in 0..=steps {
            let theta = reduce_phase(arc.lo + k as f64 * config.theta_step);
            if band.threshold_distance(theta) > config.threshold_exclusion {
                phases.push(theta);
            }
        }
    }
    if let Some(gamma_prime) = config.defect_phase {
        for sign in [DefectSign::Plus, DefectSign::Minus] {
            let theta = reduce_phase(defect_eigenvalue(sign, gamma_prime).arg());
            if band.contains(theta)
                && band.threshold_distance(theta) > config.threshold_exclusion
            {
                phases.push(theta);
            }
        }
    }
    phases.sort_by(f64::total_cmp);
    phases.dedup();
    phases
}

fn kernel_evidence(
    field: &CoinField,
    config: &DetectConfig,
    band: &BandStructure,
) -> Result<Vec<DetectionEvidence>> {
    let support = match config.support {
        Some(w) => w,
        None => field.window().shrunk(1)?,
    };
    let phases = scan_phases(band, config);
    let mut evidence = Vec::new();
    for theta in phases {
        let lambda = Complex64::from_polar(1.0, theta);
        let basis = compact_kernel(field, lambda, support)?;
        if !basis.is_empty() {
            evidence.push(DetectionEvidence {
                lambda,
                kernel_dim: basis.len(),
                support: joint_support(&basis, 1e-12)
                    .unwrap_or((support.lo(), support.hi())),
            });
        }
    }
    Ok(evidence)
}

fn localization_evidence(
    field: &CoinField,
    config: &DetectConfig,
    band: &BandStructure,
) -> Result<Vec<DetectionEvidence>> {
    let l = config.half_width;
    let small = Window::new(-l, l)?;
    let large = Window::new(-2 * l, 2 * l)?;
    if !field.window().contains_window(&large) {
        return Err(Error::WindowTooSmall {
            lo: field.window().lo(),
            hi: field.window().hi(),
            reason: format!("two-window stability check needs the field to cover {large}"),
        });
    }
    let embedded = |w: Window| -> Result<Vec<(Complex64, State)>> {
        let op = build_matrix(field, w, SpectralBoundary::Periodic)?;
        let report = classify(eigendecompose(&op)?, band.clone(), config.classify);
        let mut out = Vec::new();
        for (pair, _) in report.with_label(SpectralLabel::BandLocalizedEmbedded) {
            let amp: Vec<[Complex64; 2]> = (0..w.len())
                .map(|i| [pair.vector[2 * i], pair.vector[2 * i + 1]])
                .collect();
            out.push((pair.lambda, State::from_amplitudes(w, amp)?));
        }
        Ok(out)
    };
    let at_small = embedded(small)?;
    let at_large = embedded(large)?;
    // keep only eigenvalues that survive the window doubling
    let stable: Vec<&(Complex64, State)> = at_small
        .iter()
        .filter(|(lambda, _)| {
            at_large
                .iter()
                .any(|(other, _)| (lambda - other).norm() <= config.stability_tol)
        })
        .collect();
    // cluster coincident eigenvalues into one evidence entry each
    let mut evidence: Vec<DetectionEvidence> = Vec::new();
    let mut members: Vec<Vec<&State>> = Vec::new();
    for (lambda, state) in stable {
        match evidence
            .iter()
            .position(|e| (e.lambda - lambda).norm() <= config.stability_tol)
        {
            Some(i) => {
                evidence[i].kernel_dim += 1;
                members[i].push(state);
            }
            None => {
                evidence.push(DetectionEvidence {
                    lambda: *lambda,
                    kernel_dim: 1,
                    support: (small.lo(), small.hi()),
                });
                members.push(vec![state]);
            }
        }
    }
    for (e, group) in evidence.iter_mut().zip(members.iter()) {
        if let Some(bounds) = joint_support_refs(group, 1e-8) {
            e.support = bounds;
        }
    }
    evidence.sort_by(|a, b| {
        reduce_phase(a.lambda.arg()).total_cmp(&reduce_phase(b.lambda.arg()))
    });
    Ok(evidence)
}

fn joint_support(states: &[State], tol: f64) -> Option<(i64, i64)> {
    joint_support_refs(&states.iter().collect::<Vec<_>>(), tol)
}

fn joint_support_refs(states: &[&State], tol: f64) -> Option<(i64, i64)> {
    let mut bounds: Option<(i64, i64)> = None;
    for s in states {
        if let Some((lo, hi)) = s.support_bounds(tol) {
            bounds = Some(match bounds {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            });
        }
    }
    bounds
}
