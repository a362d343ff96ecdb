//! States, coins, and one step of the walk.
//!
//! A state lives on a finite window [lo, hi] of Z and carries a C^2 spinor
//! per site. One walk step applies the site coin and then shifts: component
//! 0 of the coined spinor moves one site left, component 1 one site right,
//!
//! ```text
//! (U psi)(x) = [ a(x+1) psi0(x+1) + b(x+1) psi1(x+1),
//!                c(x-1) psi0(x-1) + d(x-1) psi1(x-1) ]
//! ```
//!
//! with [[a,b],[c,d]] the coin at the named site. Three boundary modes:
//! `Padded` grows the window by one site per step (the walk on all of Z,
//! restricted to where amplitude can live), `Periodic` wraps indices, and
//! `Truncate` drops amplitude leaving the window (a strict contraction).
//!
//! The bulk coin family is parametrized by p in [0,1] and three phases:
//!
//! ```text
//! C = e^{i g/2} [[ p e^{i(al - g/2)},  q e^{i(be - g/2)} ],
//!                [ -q e^{-i(be - g/2)}, p e^{-i(al - g/2)} ]],   q = sqrt(1 - p^2).
//! ```
//!
//! p = 0 degenerates to the anti-diagonal perfect reflection used as the
//! defect coin; p = 1 is diagonal and the walk decouples into two shifts.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Inclusive site range [lo, hi] on Z, at least two sites long.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    lo: i64,
    hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo + 1 {
            return Err(Error::WindowTooSmall {
                lo,
                hi,
                reason: "a window needs at least 2 sites".into(),
            });
        }
        Ok(Window { lo, hi })
    }

    /// Symmetric window [-half, half].
    pub fn centered(half: i64) -> Result<Self> {
        Window::new(-half, half)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false // by construction: len >= 2
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_window(&self, inner: &Window) -> bool {
        self.lo <= inner.lo && inner.hi <= self.hi
    }

    pub fn index_of(&self, x: i64) -> Option<usize> {
        self.contains(x).then(|| (x - self.lo) as usize)
    }

    pub fn site_at(&self, index: usize) -> i64 {
        self.lo + index as i64
    }

    /// Window grown by `margin` sites on each side.
    pub fn expanded(&self, margin: i64) -> Window {
        Window {
            lo: self.lo - margin,
            hi: self.hi + margin,
        }
    }

    /// Window shrunk by `margin` sites on each side.
    pub fn shrunk(&self, margin: i64) -> Result<Window> {
        Window::new(self.lo + margin, self.hi - margin)
    }

    pub fn translated(&self, y: i64) -> Window {
        Window {
            lo: self.lo + y,
            hi: self.hi + y,
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// 2x2 complex matrix, row-major [[a, b], [c, d]]. Used both for site
/// coins and for the momentum-space symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2::new(one, zero, zero, one)
    }

    pub fn apply(&self, s: [Complex64; 2]) -> [Complex64; 2] {
        [self.a * s[0] + self.b * s[1], self.c * s[0] + self.d * s[1]]
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Max absolute entry of M^H M - I; zero for exactly unitary M.
    pub fn unitarity_defect(&self) -> f64 {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let e00 = a.conj() * a + c.conj() * c - 1.0;
        let e01 = a.conj() * b + c.conj() * d;
        let e11 = b.conj() * b + d.conj() * d - 1.0;
        e00.norm().max(e01.norm()).max(e11.norm())
    }

    /// Max absolute entry of the difference (the sup entry norm used by the
    /// perturbation envelope).
    pub fn entry_distance(&self, other: &Mat2) -> f64 {
        (self.a - other.a)
            .norm()
            .max((self.b - other.b).norm())
            .max((self.c - other.c).norm())
            .max((self.d - other.d).norm())
    }
}

/// Bulk coin parameters: transmission amplitude p and three phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(p: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("must lie in [0, 1], got {p}"),
            });
        }
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(ModelParams {
            p,
            alpha,
            beta,
            gamma,
        })
    }

    /// p = 1/sqrt(2), all phases zero.
    pub fn hadamard() -> Self {
        ModelParams {
            p: std::f64::consts::FRAC_1_SQRT_2,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }

    /// Reflection amplitude q = sqrt(1 - p^2) >= 0.
    pub fn q(&self) -> f64 {
        (1.0 - self.p * self.p).max(0.0).sqrt()
    }
}

fn polar(r: f64, phi: f64) -> Complex64 {
    Complex64::from_polar(r, phi)
}

/// Unitary coin for the given parameters: entries
/// [[p e^{i al}, q e^{i be}], [-q e^{-i(be - g)}, p e^{-i(al - g)}]].
pub fn bulk_coin(params: &ModelParams) -> Mat2 {
    let q = params.q();
    Mat2::new(
        polar(params.p, params.alpha),
        polar(q, params.beta),
        -polar(q, -(params.beta - params.gamma)),
        polar(params.p, -(params.alpha - params.gamma)),
    )
}

/// Anti-diagonal perfect-reflection coin: the p = 0 member of the bulk
/// family at phases (beta', gamma').
pub fn reflection_coin(beta_prime: f64, gamma_prime: f64) -> Mat2 {
    let zero = Complex64::new(0.0, 0.0);
    Mat2::new(
        zero,
        polar(1.0, beta_prime),
        -polar(1.0, -(beta_prime - gamma_prime)),
        zero,
    )
}

/// Reflection-defect placement: each center y contributes the site pair
/// {y-1, y} to the defect set. Centers are kept sorted; duplicates are an
/// error, adjacent centers (overlapping pairs) are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectSpec {
    centers: Vec<i64>,
    pub beta_prime: f64,
    pub gamma_prime: f64,
}

impl DefectSpec {
    pub fn new(mut centers: Vec<i64>, beta_prime: f64, gamma_prime: f64) -> Result<Self> {
        centers.sort_unstable();
        if centers.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter {
                name: "centers",
                reason: "duplicate defect centers".into(),
            });
        }
        for (name, v) in [("beta_prime", beta_prime), ("gamma_prime", gamma_prime)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(DefectSpec {
            centers,
            beta_prime,
            gamma_prime,
        })
    }

    pub fn centers(&self) -> &[i64] {
        &self.centers
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Sorted union of {y-1, y} over all centers y.
    pub fn sites(&self) -> Vec<i64> {
        let mut s: Vec<i64> = self
            .centers
            .iter()
            .flat_map(|&y| [y - 1, y])
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Spatial decay profile for the bulk coin away from the defect region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbationSpec {
    /// Bulk coin everywhere.
    None,
    /// Site-dependent coin with parameter offsets bounded by
    /// amplitude * exp(-rate * sqrt(1 + x^2)); |top-left entry| is kept
    /// >= floor by clamping p.
    Exponential {
        amplitude: f64,
        rate: f64,
        floor: f64,
        seed: u64,
    },
}

impl PerturbationSpec {
    fn validate(&self) -> Result<()> {
        if let PerturbationSpec::Exponential {
            amplitude,
            rate,
            floor,
            ..
        } = *self
        {
            if !(amplitude > 0.0 && amplitude.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "amplitude",
                    reason: format!("must be > 0, got {amplitude}"),
                });
            }
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "rate",
                    reason: format!("must be > 0, got {rate}"),
                });
            }
            if !(floor > 0.0 && floor <= 1.0) {
                return Err(Error::InvalidParameter {
                    name: "floor",
                    reason: format!("must lie in (0, 1], got {floor}"),
                });
            }
        }
        Ok(())
    }
}

/// One coin per site of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinField {
    window: Window,
    coins: Vec<Mat2>,
}

impl CoinField {
    pub fn constant(window: Window, coin: Mat2) -> Self {
        CoinField {
            window,
            coins: vec![coin; window.len()],
        }
    }

    pub fn from_fn(window: Window, mut f: impl FnMut(i64) -> Mat2) -> Self {
        CoinField {
            window,
            coins: window.sites().map(&mut f).collect(),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Coin at site x. Panics outside the window; callers gate on windows.
    pub fn coin(&self, x: i64) -> Mat2 {
        match self.window.index_of(x) {
            Some(i) => self.coins[i],
            None => panic!("coin requested at {x} outside field window {}", self.window),
        }
    }

    /// Replace the coin on the listed sites (all must lie in the window).
    pub fn with_override(mut self, sites: &[i64], coin: Mat2) -> Result<Self> {
        for &x in sites {
            match self.window.index_of(x) {
                Some(i) => self.coins[i] = coin,
                None => {
                    return Err(Error::WindowMismatch {
                        reason: format!(
                            "override site {x} outside field window {}",
                            self.window
                        ),
                    })
                }
            }
        }
        Ok(self)
    }

    /// Max over sites of the entry distance to a reference coin.
    pub fn max_deviation_from(&self, reference: &Mat2) -> f64 {
        self.coins
            .iter()
            .map(|c| c.entry_distance(reference))
            .fold(0.0, f64::max)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-site RNG stream: the realized coin at x depends on (seed, x) only,
/// not on the window bounds, so enlarging the window keeps existing coins.
fn site_rng(seed: u64, x: i64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(x as u64)))
}

fn perturbed_coin(
    params: &ModelParams,
    amplitude: f64,
    rate: f64,
    floor: f64,
    seed: u64,
    x: i64,
) -> Result<Mat2> {
    let bound = amplitude * (-rate * (1.0 + (x as f64) * (x as f64)).sqrt()).exp();
    let scale = (bound / 4.0).min(1.0);
    let mut rng = site_rng(seed, x);
    let mut draw = || rng.gen_range(-1.0..=1.0) * scale;
    let (dp, dal, dbe, dga) = (draw(), draw(), draw(), draw());
    let site = ModelParams {
        p: (params.p + dp).clamp(floor, 1.0),
        alpha: params.alpha + dal,
        beta: params.beta + dbe,
        gamma: params.gamma + dga,
    };
    let coin = bulk_coin(&site);
    let deviation = coin.entry_distance(&bulk_coin(params));
    if deviation > bound {
        return Err(Error::EnvelopeViolation {
            site: x,
            deviation,
            bound,
        });
    }
    Ok(coin)
}

/// Assemble the position-dependent coin field: the (possibly perturbed)
/// bulk coin everywhere, overwritten by the reflection coin on the defect
/// site set. Every defect site must sit at least one site inside the
/// window so the decoupled eigenfunctions fit.
pub fn assemble_coin_field(
    params: &ModelParams,
    defects: Option<&DefectSpec>,
    perturbation: &PerturbationSpec,
    window: Window,
) -> Result<CoinField> {
    perturbation.validate()?;
    let mut coins = Vec::with_capacity(window.len());
    match *perturbation {
        PerturbationSpec::None => {
            let c = bulk_coin(params);
            coins.resize(window.len(), c);
        }
        PerturbationSpec::Exponential {
            amplitude,
            rate,
            floor,
            seed,
        } => {
            for x in window.sites() {
                coins.push(perturbed_coin(params, amplitude, rate, floor, seed, x)?);
            }
        }
    }
    let mut field = CoinField { window, coins };
    if let Some(d) = defects {
        let sites = d.sites();
        if let (Some(&min), Some(&max)) = (sites.first(), sites.last()) {
            if min < window.lo() + 1 || max > window.hi() - 1 {
                return Err(Error::WindowTooSmall {
                    lo: window.lo(),
                    hi: window.hi(),
                    reason: format!(
                        "defect sites [{min}, {max}] need a one-site margin inside the window"
                    ),
                });
            }
        }
        field = field.with_override(&sites, reflection_coin(d.beta_prime, d.gamma_prime))?;
    }
    Ok(field)
}

/// How a step treats amplitude at the window boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Output window grows by one site; nothing is lost.
    Padded,
    /// Indices wrap modulo the window length.
    Periodic,
    /// Amplitude leaving the window is dropped.
    Truncate,
}

/// Spinor field on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    window: Window,
    amp: Vec<[Complex64; 2]>,
}

impl State {
    pub fn zero(window: Window) -> Self {
        State {
            window,
            amp: vec![[Complex64::new(0.0, 0.0); 2]; window.len()],
        }
    }

    pub fn from_amplitudes(window: Window, amp: Vec<[Complex64; 2]>) -> Result<Self> {
        if amp.len() != window.len() {
            return Err(Error::WindowMismatch {
                reason: format!(
                    "{} amplitudes for window {} of {} sites",
                    amp.len(),
                    window,
                    window.len()
                ),
            });
        }
        if amp
            .iter()
            .any(|s| !(s[0].is_finite() && s[1].is_finite()))
        {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "non-finite amplitude".into(),
            });
        }
        Ok(State { window, amp })
    }

    /// Single-site spinor, window padded one site on each flank.
    pub fn point(x: i64, spinor: [Complex64; 2]) -> Self {
        let mut st = State::zero(Window { lo: x - 1, hi: x + 1 });
        st.amp[1] = spinor;
        st
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Spinor at x; zero outside the window.
    pub fn amplitude(&self, x: i64) -> [Complex64; 2] {
        match self.window.index_of(x) {
            Some(i) => self.amp[i],
            None => [Complex64::new(0.0, 0.0); 2],
        }
    }

    pub fn set(&mut self, x: i64, spinor: [Complex64; 2]) -> Result<()> {
        match self.window.index_of(x) {
            Some(i) => {
                self.amp[i] = spinor;
                Ok(())
            }
            None => Err(Error::WindowMismatch {
                reason: format!("site {x} outside state window {}", self.window),
            }),
        }
    }

    pub fn add_at(&mut self, x: i64, spinor: [Complex64; 2]) -> Result<()> {
        match self.window.index_of(x) {
            Some(i) => {
                self.amp[i][0] += spinor[0];
                self.amp[i][1] += spinor[1];
                Ok(())
            }
            None => Err(Error::WindowMismatch {
                reason: format!("site {x} outside state window {}", self.window),
            }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &[Complex64; 2])> {
        self.window.sites().zip(self.amp.iter())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp
            .iter()
            .map(|s| s[0].norm_sqr() + s[1].norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        for s in &mut self.amp {
            s[0] *= c;
            s[1] *= c;
        }
        self
    }

    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameter {
                name: "state",
                reason: "cannot normalize the zero state".into(),
            });
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Hermitian inner product <self, other> = sum conj(self) . other over
    /// the site overlap.
    pub fn inner(&self, other: &State) -> Complex64 {
        let lo = self.window.lo().max(other.window.lo());
        let hi = self.window.hi().min(other.window.hi());
        let mut acc = Complex64::new(0.0, 0.0);
        for x in lo..=hi {
            let a = self.amplitude(x);
            let b = other.amplitude(x);
            acc += a[0].conj() * b[0] + a[1].conj() * b[1];
        }
        acc
    }

    /// Copy into a larger window (error if any part would be cut off).
    pub fn embedded(&self, window: Window) -> Result<State> {
        if !window.contains_window(&self.window) {
            return Err(Error::WindowMismatch {
                reason: format!("cannot embed {} into {}", self.window, window),
            });
        }
        let mut out = State::zero(window);
        for (x, s) in self.iter() {
            out.set(x, *s).expect("embedding window verified");
        }
        Ok(out)
    }

    /// Pointwise difference on the union window.
    pub fn sub(&self, other: &State) -> State {
        let window = Window {
            lo: self.window.lo().min(other.window.lo()),
            hi: self.window.hi().max(other.window.hi()),
        };
        let mut out = State::zero(window);
        for x in window.sites() {
            let a = self.amplitude(x);
            let b = other.amplitude(x);
            out.set(x, [a[0] - b[0], a[1] - b[1]])
                .expect("union window covers both");
        }
        out
    }

    /// Lattice translation (T_y psi)(x) = psi(x - y); the window moves with
    /// the amplitudes, so this is exact for every y.
    pub fn translated(&self, y: i64) -> State {
        State {
            window: self.window.translated(y),
            amp: self.amp.clone(),
        }
    }

    /// Per-site probability mass |psi0|^2 + |psi1|^2.
    pub fn position_distribution(&self) -> BTreeMap<i64, f64> {
        self.iter()
            .map(|(x, s)| (x, s[0].norm_sqr() + s[1].norm_sqr()))
            .collect()
    }

    /// Smallest interval holding every site whose amplitude exceeds `tol`
    /// in either component.
    pub fn support_bounds(&self, tol: f64) -> Option<(i64, i64)> {
        let mut bounds = None;
        for (x, s) in self.iter() {
            if s[0].norm() > tol || s[1].norm() > tol {
                bounds = Some(match bounds {
                    None => (x, x),
                    Some((lo, _)) => (lo, x),
                });
            }
        }
        bounds
    }
}

/// One step of U = SC under the chosen boundary.
///
/// Padded/truncate need the field to cover the state window (the coin acts
/// where amplitude currently sits); periodic needs the windows equal.
pub fn step(state: &State, field: &CoinField, boundary: Boundary) -> Result<State> {
    match boundary {
        Boundary::Periodic => {
            if field.window() != state.window() {
                return Err(Error::WindowMismatch {
                    reason: format!(
                        "periodic step needs equal windows, state {} vs field {}",
                        state.window(),
                        field.window()
                    ),
                });
            }
        }
        Boundary::Padded | Boundary::Truncate => {
            if !field.window().contains_window(&state.window()) {
                return Err(Error::WindowMismatch {
                    reason: format!(
                        "field window {} does not cover state window {}",
                        field.window(),
                        state.window()
                    ),
                });
            }
        }
    }

    match boundary {
        Boundary::Padded => {
            let mut out = State::zero(state.window().expanded(1));
            for (x, s) in state.iter() {
                let phi = field.coin(x).apply(*s);
                out.amp[(x - 1 - out.window.lo()) as usize][0] = phi[0];
                out.amp[(x + 1 - out.window.lo()) as usize][1] = phi[1];
            }
            Ok(out)
        }
        Boundary::Truncate => {
            let mut out = State::zero(state.window());
            for (x, s) in state.iter() {
                let phi = field.coin(x).apply(*s);
                if let Some(i) = out.window.index_of(x - 1) {
                    out.amp[i][0] = phi[0];
                }
                if let Some(i) = out.window.index_of(x + 1) {
                    out.amp[i][1] = phi[1];
                }
            }
            Ok(out)
        }
        Boundary::Periodic => {
            let n = state.window().len();
            let mut out = State::zero(state.window());
            for (i, (x, s)) in state.iter().enumerate() {
                let phi = field.coin(x).apply(*s);
                out.amp[(i + n - 1) % n][0] = phi[0];
                out.amp[(i + 1) % n][1] = phi[1];
            }
            Ok(out)
        }
    }
}

/// Iterate `step` and return the whole trajectory, initial state included
/// (so the result has steps + 1 entries).
///
/// For the padded boundary the field must cover the initial window expanded
/// by `steps` sites: that is everywhere amplitude can reach.
pub fn evolve(
    state: &State,
    field: &CoinField,
    steps: usize,
    boundary: Boundary,
) -> Result<Vec<State>> {
    if boundary == Boundary::Padded {
        let reach = state.window().expanded(steps as i64);
        if !field.window().contains_window(&reach) {
            return Err(Error::WindowTooSmall {
                lo: field.window().lo(),
                hi: field.window().hi(),
                reason: format!(
                    "padded evolution for {steps} steps from {} needs field cover {}",
                    state.window(),
                    reach
                ),
            });
        }
    }
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(state.clone());
    for _ in 0..steps {
        let next = step(traj.last().expect("nonempty"), field, boundary)?;
        traj.push(next);
    }
    Ok(traj)
}

/// Residual ||U psi - lambda psi|| with U applied on the full lattice
/// (padded step). The field must cover the state window with a one-site
/// margin so the comparison window is fully coined.
pub fn eigenpair_residual(state: &State, field: &CoinField, lambda: Complex64) -> Result<f64> {
    if !field.window().contains_window(&state.window()) {
        return Err(Error::WindowTooSmall {
            lo: field.window().lo(),
            hi: field.window().hi(),
            reason: format!(
                "residual check needs the field to cover state window {}",
                state.window()
            ),
        });
    }
    let applied = step(state, field, Boundary::Padded)?;
    let target = state.embedded(applied.window())?.scaled(lambda);
    Ok(applied.sub(&target).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn approx(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn window_rejects_fewer_than_two_sites() {
        assert!(Window::new(0, 0).is_err());
        assert!(Window::new(3, 2).is_err());
        let w = Window::new(-2, 2).unwrap();
        assert_eq!(w.len(), 5);
        assert_eq!(w.index_of(-2), Some(0));
        assert_eq!(w.index_of(3), None);
    }

    #[test]
    fn hadamard_coin_entries() {
        let c = bulk_coin(&ModelParams::hadamard());
        let h = FRAC_1_SQRT_2;
        assert!(approx(c.a, z(h, 0.0), 1e-15));
        assert!(approx(c.b, z(h, 0.0), 1e-15));
        assert!(approx(c.c, z(-h, 0.0), 1e-15));
        assert!(approx(c.d, z(h, 0.0), 1e-15));
        assert!(c.unitarity_defect() <= 1e-15);
    }

    #[test]
    fn p_one_gives_identity_coin() {
        let c = bulk_coin(&ModelParams::new(1.0, 0.0, 0.0, 0.0).unwrap());
        assert!(c.entry_distance(&Mat2::identity()) <= 1e-15);
    }

    #[test]
    fn gamma_rotates_determinant() {
        let g = 1.2345;
        let c = bulk_coin(&ModelParams::new(0.3, 0.7, -0.2, g).unwrap());
        assert!(approx(c.det(), Complex64::from_polar(1.0, g), 1e-14));
        assert!(c.unitarity_defect() <= 1e-14);
    }

    #[test]
    fn reflection_coin_is_p_zero_coin() {
        let (bp, gp) = (0.4, -1.1);
        let r = reflection_coin(bp, gp);
        let c0 = bulk_coin(&ModelParams::new(0.0, 0.0, bp, gp).unwrap());
        assert_eq!(r.a, c0.a);
        assert_eq!(r.b, c0.b);
        assert_eq!(r.c, c0.c);
        assert_eq!(r.d, c0.d);
        // zero phases: [[0, 1], [-1, 0]]
        let anti = reflection_coin(0.0, 0.0);
        assert!(approx(anti.b, z(1.0, 0.0), 1e-15));
        assert!(approx(anti.c, z(-1.0, 0.0), 1e-15));
        assert_eq!(anti.a, z(0.0, 0.0));
        assert_eq!(anti.d, z(0.0, 0.0));
    }

    #[test]
    fn defect_spec_sites_and_duplicates() {
        let d = DefectSpec::new(vec![1, 0], 0.0, 0.0).unwrap();
        assert_eq!(d.centers(), &[0, 1]);
        assert_eq!(d.sites(), vec![-1, 0, 1]);
        assert!(DefectSpec::new(vec![2, 2], 0.0, 0.0).is_err());
        let far = DefectSpec::new(vec![-5, 3], 0.0, 0.0).unwrap();
        assert_eq!(far.sites(), vec![-6, -5, 2, 3]);
    }

    #[test]
    fn assemble_places_reflection_on_defect_sites() {
        let params = ModelParams::hadamard();
        let d = DefectSpec::new(vec![0, 1], 0.0, 0.0).unwrap();
        let w = Window::new(-5, 5).unwrap();
        let f =
            assemble_coin_field(&params, Some(&d), &PerturbationSpec::None, w).unwrap();
        let refl = reflection_coin(0.0, 0.0);
        let bulk = bulk_coin(&params);
        for x in w.sites() {
            let expect = if (-1..=1).contains(&x) { refl } else { bulk };
            assert!(f.coin(x).entry_distance(&expect) == 0.0, "site {x}");
        }
    }

    #[test]
    fn assemble_rejects_defect_on_window_edge() {
        let params = ModelParams::hadamard();
        let d = DefectSpec::new(vec![5], 0.0, 0.0).unwrap();
        let w = Window::new(-5, 5).unwrap();
        let err = assemble_coin_field(&params, Some(&d), &PerturbationSpec::None, w);
        assert!(matches!(err, Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn exponential_perturbation_respects_envelope_seed7() {
        let params = ModelParams::hadamard();
        let pert = PerturbationSpec::Exponential {
            amplitude: 0.1,
            rate: 1.0,
            floor: 1e-3,
            seed: 7,
        };
        let w = Window::new(-40, 40).unwrap();
        let f = assemble_coin_field(&params, None, &pert, w).unwrap();
        let c0 = bulk_coin(&params);
        for x in w.sites() {
            let bound = 0.1 * (-(1.0 + (x as f64).powi(2)).sqrt()).exp();
            let dev = f.coin(x).entry_distance(&c0);
            assert!(dev <= bound, "site {x}: {dev} > {bound}");
            assert!(f.coin(x).a.norm() >= 1e-3);
            assert!(f.coin(x).unitarity_defect() <= 1e-12);
        }
        // identical seed, identical field; different seed differs somewhere
        let f2 = assemble_coin_field(&params, None, &pert, w).unwrap();
        assert_eq!(f, f2);
        let other = assemble_coin_field(
            &params,
            None,
            &PerturbationSpec::Exponential {
                amplitude: 0.1,
                rate: 1.0,
                floor: 1e-3,
                seed: 8,
            },
            w,
        )
        .unwrap();
        assert!(f.coin(0).entry_distance(&other.coin(0)) > 0.0);
    }

    #[test]
    fn perturbation_is_window_independent() {
        let params = ModelParams::hadamard();
        let pert = PerturbationSpec::Exponential {
            amplitude: 0.05,
            rate: 1.0,
            floor: 1e-3,
            seed: 11,
        };
        let small =
            assemble_coin_field(&params, None, &pert, Window::new(-10, 10).unwrap()).unwrap();
        let large =
            assemble_coin_field(&params, None, &pert, Window::new(-30, 30).unwrap()).unwrap();
        for x in -10..=10 {
            assert_eq!(small.coin(x), large.coin(x), "site {x}");
        }
    }

    #[test]
    fn step_of_delta_spinor_splits_left_and_right() {
        let params = ModelParams::hadamard();
        let field = CoinField::constant(Window::new(-3, 3).unwrap(), bulk_coin(&params));
        let psi = State::point(0, [z(1.0, 0.0), z(0.0, 0.0)]);
        let out = step(&psi, &field, Boundary::Padded).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!(approx(out.amplitude(-1)[0], z(h, 0.0), 1e-15));
        assert!(approx(out.amplitude(1)[1], z(-h, 0.0), 1e-15));
        assert!(out.amplitude(-1)[1].norm() == 0.0);
        assert!(out.amplitude(1)[0].norm() == 0.0);
        assert!(out.amplitude(0)[0].norm() == 0.0 && out.amplitude(0)[1].norm() == 0.0);
        assert!((out.norm_sqr() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn identity_coin_walk_is_pure_shift() {
        let w = Window::new(-6, 6).unwrap();
        let field = CoinField::constant(w, Mat2::identity());
        let mut psi = State::zero(Window::new(-2, 2).unwrap());
        psi.set(0, [z(0.6, 0.0), z(0.0, 0.8)]).unwrap();
        let out = step(&psi, &field, Boundary::Padded).unwrap();
        assert_eq!(out.amplitude(-1)[0], z(0.6, 0.0));
        assert_eq!(out.amplitude(1)[1], z(0.0, 0.8));
    }

    #[test]
    fn padded_step_conserves_norm_over_many_steps() {
        let params = ModelParams::new(0.83, 0.3, -0.9, 1.7).unwrap();
        let field = CoinField::constant(
            Window::new(-110, 110).unwrap(),
            bulk_coin(&params),
        );
        let psi = State::point(0, [z(0.48, 0.2), z(-0.31, 0.79)])
            .normalized()
            .unwrap();
        let traj = evolve(&psi, &field, 100, Boundary::Padded).unwrap();
        assert_eq!(traj.len(), 101);
        for st in &traj {
            assert!((st.norm_sqr() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn periodic_step_is_unitary_truncate_contracts() {
        let params = ModelParams::hadamard();
        let w = Window::new(-8, 8).unwrap();
        let field = CoinField::constant(w, bulk_coin(&params));
        let mut psi = State::zero(w);
        psi.set(7, [z(0.3, 0.1), z(-0.5, 0.4)]).unwrap();
        psi.set(-8, [z(0.2, -0.6), z(0.1, 0.0)]).unwrap();
        let psi = psi.normalized().unwrap();
        let per = step(&psi, &field, Boundary::Periodic).unwrap();
        assert!((per.norm_sqr() - 1.0).abs() <= 1e-14);
        let tru = step(&psi, &field, Boundary::Truncate).unwrap();
        assert!(tru.norm_sqr() <= 1.0 + 1e-14);
        // mass actually leaves through both ends here
        assert!(tru.norm_sqr() < 1.0 - 1e-3);
    }

    #[test]
    fn boundary_window_preconditions() {
        let field = CoinField::constant(
            Window::new(-2, 2).unwrap(),
            bulk_coin(&ModelParams::hadamard()),
        );
        let wide = State::zero(Window::new(-4, 4).unwrap());
        assert!(matches!(
            step(&wide, &field, Boundary::Padded),
            Err(Error::WindowMismatch { .. })
        ));
        let narrow = State::zero(Window::new(-1, 1).unwrap());
        assert!(matches!(
            step(&narrow, &field, Boundary::Periodic),
            Err(Error::WindowMismatch { .. })
        ));
        assert!(matches!(
            evolve(&narrow, &field, 5, Boundary::Padded),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn evolve_zero_steps_returns_initial_state_only() {
        let field = CoinField::constant(
            Window::new(-2, 2).unwrap(),
            bulk_coin(&ModelParams::hadamard()),
        );
        let psi = State::point(0, [z(1.0, 0.0), z(0.0, 0.0)]);
        let traj = evolve(&psi, &field, 0, Boundary::Padded).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj[0], psi);
    }

    #[test]
    fn translation_is_exact_and_composes() {
        let psi = State::point(2, [z(0.1, 0.2), z(0.3, -0.4)]);
        let t = psi.translated(5).translated(-3);
        assert_eq!(t, psi.translated(2));
        assert_eq!(t.amplitude(4), psi.amplitude(2));
        assert!((t.norm_sqr() - psi.norm_sqr()).abs() == 0.0);
    }

    #[test]
    fn translation_commutes_with_constant_field_step() {
        let params = ModelParams::new(0.6, 0.1, 0.2, 0.3).unwrap();
        let field = CoinField::constant(Window::new(-30, 30).unwrap(), bulk_coin(&params));
        let psi = State::point(0, [z(0.7, 0.1), z(-0.2, 0.67)])
            .normalized()
            .unwrap();
        for y in [-5i64, -1, 0, 3, 5] {
            let a = step(&psi.translated(y), &field, Boundary::Padded).unwrap();
            let b = step(&psi, &field, Boundary::Padded).unwrap().translated(y);
            assert!(a.sub(&b).norm() <= 1e-15, "y = {y}");
        }
    }

    #[test]
    fn position_distribution_sums_to_norm() {
        let psi = State::point(0, [z(0.5, 0.5), z(-0.5, 0.5)]);
        let dist = psi.position_distribution();
        let total: f64 = dist.values().sum();
        assert!((total - psi.norm_sqr()).abs() <= 1e-12);
        assert!(dist.values().all(|&p| p >= 0.0));
        assert_eq!(dist[&0], 1.0);
        assert_eq!(dist[&1], 0.0);
    }

    #[test]
    fn uniform_defect_set_state_has_thirds_distribution() {
        let a = 1.0 / 6.0f64.sqrt();
        let mut psi = State::zero(Window::new(-2, 2).unwrap());
        for x in [-1, 0, 1] {
            psi.set(x, [z(a, 0.0), z(0.0, a)]).unwrap();
        }
        let dist = psi.position_distribution();
        for x in [-1, 0, 1] {
            assert!((dist[&x] - 1.0 / 3.0).abs() <= 1e-12);
        }
        assert!((psi.norm_sqr() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn eigenpair_residual_detects_non_eigenvector() {
        let params = ModelParams::hadamard();
        let field =
            CoinField::constant(Window::new(-4, 4).unwrap(), bulk_coin(&params));
        let psi = State::point(0, [z(1.0, 0.0), z(0.0, 0.0)]);
        let r = eigenpair_residual(&psi, &field, z(1.0, 0.0)).unwrap();
        // a split delta is far from any eigenvector
        assert!(r > 0.5);
    }
}
