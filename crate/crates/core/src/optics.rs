//! Jones calculus for the waveplate/PBS analyzer chains and construction of
//! the two-path parametric polarization state.
//!
//! Conventions: the half-wave plate carries the determinant -1 form
//! `[[cos 2t, sin 2t], [sin 2t, -cos 2t]]`; the quarter-wave plate retards
//! the slow axis by pi/2 as `R(t) diag(1, -i) R(-t)`, so a QWP at 45 degrees
//! maps H to `(H + iV)/sqrt(2)` up to a global phase.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::quantum::{BellKind, DensityMatrix, PolarizationVector, TwoQubitState};
use crate::scalar::{cis, cr, czero, Real, C};

/// Waveplate retardance class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaveplateKind {
    Half,
    Quarter,
}

/// A waveplate with its fast axis at `angle` radians from horizontal,
/// normalized to `[0, pi)`.
#[derive(Clone, Copy, Debug)]
pub struct WaveplateElement<T> {
    pub kind: WaveplateKind,
    angle: T,
}

impl<T: Real> WaveplateElement<T> {
    pub fn new(kind: WaveplateKind, angle: T) -> Self {
        let pi = T::PI();
        let mut a = angle % pi;
        if a < T::zero() {
            a += pi;
        }
        Self { kind, angle: a }
    }

    pub fn half(angle: T) -> Self {
        Self::new(WaveplateKind::Half, angle)
    }

    pub fn quarter(angle: T) -> Self {
        Self::new(WaveplateKind::Quarter, angle)
    }

    pub fn angle(&self) -> T {
        self.angle
    }
}

/// Jones matrix of a waveplate element; unitary to machine precision.
pub fn jones_matrix<T: Real>(elem: &WaveplateElement<T>) -> Mat2<T> {
    let t = elem.angle;
    let (c, s) = (t.cos(), t.sin());
    match elem.kind {
        WaveplateKind::Half => {
            let c2 = cr(c * c - s * s);
            let s2 = cr(T::of(2.0) * s * c);
            Mat2::new(c2, s2, s2, -c2)
        }
        WaveplateKind::Quarter => {
            let i = C::new(T::zero(), T::one());
            let cc = cr(c * c);
            let ss = cr(s * s);
            let sc = cr(s * c);
            let one_plus_i = cr(T::one()) + i;
            Mat2::new(cc - i * ss, one_plus_i * sc, one_plus_i * sc, ss - i * cc)
        }
    }
}

/// Which PBS output port the detector sits behind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbsPort {
    /// Transmitted port: accepts H.
    Transmit,
    /// Reflected port: accepts V.
    Reflect,
}

impl PbsPort {
    fn state<T: Real>(&self) -> PolarizationVector<T> {
        match self {
            PbsPort::Transmit => PolarizationVector::horizontal(),
            PbsPort::Reflect => PolarizationVector::vertical(),
        }
    }
}

/// Ordered waveplates (light traverses index 0 first) followed by a PBS port.
#[derive(Clone, Debug)]
pub struct AnalyzerChain<T> {
    elements: Vec<WaveplateElement<T>>,
    pub port: PbsPort,
}

impl<T: Real> AnalyzerChain<T> {
    /// At most two waveplates per arm (QWP then HWP in the hardware layout).
    pub fn new(elements: Vec<WaveplateElement<T>>, port: PbsPort) -> Result<Self> {
        if elements.len() > 2 {
            return Err(Error::Format {
                what: "analyzer chain",
                reason: format!("at most 2 waveplates per arm, got {}", elements.len()),
            });
        }
        Ok(Self { elements, port })
    }

    pub fn bare(port: PbsPort) -> Self {
        Self {
            elements: Vec::new(),
            port,
        }
    }

    pub fn hwp(angle: T, port: PbsPort) -> Self {
        Self {
            elements: vec![WaveplateElement::half(angle)],
            port,
        }
    }

    pub fn qwp_hwp(qwp_angle: T, hwp_angle: T, port: PbsPort) -> Self {
        Self {
            elements: vec![
                WaveplateElement::quarter(qwp_angle),
                WaveplateElement::half(hwp_angle),
            ],
            port,
        }
    }

    pub fn elements(&self) -> &[WaveplateElement<T>] {
        &self.elements
    }

    /// Combined Jones matrix of the chain (applied to the incoming state).
    pub fn transfer(&self) -> Mat2<T> {
        let mut u = Mat2::identity();
        for e in &self.elements {
            u = jones_matrix(e).mul(&u);
        }
        u
    }
}

/// Accepted polarization of an analyzer chain: the state `|a>` with detection
/// probability `|<a|psi>|^2` for input `|psi>`, i.e. the PBS port state
/// back-propagated through the adjoint of the chain.
pub fn analyzer_projector<T: Real>(chain: &AnalyzerChain<T>) -> PolarizationVector<T> {
    let u = chain.transfer();
    let back = u.adjoint().mul_vec(chain.port.state::<T>().amplitudes());
    PolarizationVector::new(back[0], back[1]).expect("unitary chain preserves norm")
}

/// Circular polarization label for the driving beams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Circular {
    Plus,
    Minus,
}

impl Circular {
    pub fn flipped(self) -> Self {
        match self {
            Circular::Plus => Circular::Minus,
            Circular::Minus => Circular::Plus,
        }
    }
}

/// Index into the canonical (HH, HV, VH, VV) basis of the linear product
/// state that the circular pair (Stokes, anti-Stokes) converts to:
/// `(+,-) -> HH`, `(-,+) -> VV`, `(+,+) -> HV`, `(-,-) -> VH`.
pub fn circular_pair_basis_index(stokes: Circular, anti_stokes: Circular) -> usize {
    match (stokes, anti_stokes) {
        (Circular::Plus, Circular::Minus) => 0,
        (Circular::Plus, Circular::Plus) => 1,
        (Circular::Minus, Circular::Minus) => 2,
        (Circular::Minus, Circular::Plus) => 3,
    }
}

/// Driving-beam polarizations, relative phase, and amplitude weights of the
/// two parametric paths.
#[derive(Clone, Copy, Debug)]
pub struct SfwmPathConfig<T> {
    pub pump_1: Circular,
    pub coupling_1: Circular,
    pub pump_2: Circular,
    pub coupling_2: Circular,
    /// Relative phase of path 2 (radians).
    pub phase: T,
    weights: (T, T),
}

impl<T: Real> SfwmPathConfig<T> {
    /// Equal-weight configuration.
    pub fn balanced(
        pump_1: Circular,
        coupling_1: Circular,
        pump_2: Circular,
        coupling_2: Circular,
        phase: T,
    ) -> Self {
        let s = T::of(std::f64::consts::FRAC_1_SQRT_2);
        Self {
            pump_1,
            coupling_1,
            pump_2,
            coupling_2,
            phase,
            weights: (s, s),
        }
    }

    /// Explicit path weights, normalized so `w1^2 + w2^2 = 1`.
    pub fn with_weights(mut self, w1: T, w2: T) -> Result<Self> {
        let norm = (w1 * w1 + w2 * w2).sqrt();
        if norm <= T::zero() || !norm.is_finite() || !self.phase.is_finite() {
            return Err(Error::ZeroNorm);
        }
        self.weights = (w1 / norm, w2 / norm);
        Ok(self)
    }

    /// The driving-beam assignment and locked phase that produce `kind`:
    /// opposite circulars per path for the Psi pair, matched circulars for
    /// the Phi pair; phase 0 for `+`, pi for `-`.
    pub fn bell(kind: BellKind) -> Self {
        let pi = T::PI();
        match kind {
            BellKind::PsiPlus => Self::balanced(
                Circular::Plus,
                Circular::Minus,
                Circular::Minus,
                Circular::Plus,
                T::zero(),
            ),
            BellKind::PsiMinus => Self::balanced(
                Circular::Plus,
                Circular::Minus,
                Circular::Minus,
                Circular::Plus,
                pi,
            ),
            BellKind::PhiPlus => Self::balanced(
                Circular::Plus,
                Circular::Plus,
                Circular::Minus,
                Circular::Minus,
                T::zero(),
            ),
            BellKind::PhiMinus => Self::balanced(
                Circular::Plus,
                Circular::Plus,
                Circular::Minus,
                Circular::Minus,
                pi,
            ),
        }
    }

    pub fn weights(&self) -> (T, T) {
        self.weights
    }

    /// Both paths emit into the same polarization product state: no
    /// interference, no entanglement.
    pub fn is_degenerate(&self) -> bool {
        circular_pair_basis_index(self.pump_1, self.coupling_1)
            == circular_pair_basis_index(self.pump_2, self.coupling_2)
    }

    fn path_indices(&self) -> (usize, usize) {
        (
            circular_pair_basis_index(self.pump_1, self.coupling_1),
            circular_pair_basis_index(self.pump_2, self.coupling_2),
        )
    }
}

/// Two-path output state plus a degeneracy flag.
#[derive(Clone, Copy, Debug)]
pub struct TwoPathState<T> {
    pub state: TwoQubitState<T>,
    /// True when both paths map to the same product state (no entanglement).
    pub degenerate: bool,
}

/// The superposition `w1 |path1> + w2 e^{i phase} |path2>` in the linear
/// basis. A degenerate configuration collapses to a product state and is
/// flagged rather than rejected.
pub fn two_path_state<T: Real>(cfg: &SfwmPathConfig<T>) -> TwoPathState<T> {
    let (i1, i2) = cfg.path_indices();
    let (w1, w2) = cfg.weights;
    let mut amps = [czero(); 4];
    amps[i1] += cr(w1);
    amps[i2] += cis(cfg.phase) * cr(w2);
    let state = TwoQubitState::new(amps).expect("normalized weights give nonzero state");
    TwoPathState {
        state,
        degenerate: cfg.is_degenerate(),
    }
}

/// Two-path state with its interference term scaled by `coherence` in
/// `[0, 1]`: `coherence = 1` reproduces the pure state, `coherence = 0` the
/// fully dephased classical mixture. This is how residual phase noise enters
/// the polarization sector.
pub fn dephased_two_path_density<T: Real>(
    cfg: &SfwmPathConfig<T>,
    coherence: T,
) -> DensityMatrix<T> {
    let (i1, i2) = cfg.path_indices();
    let (w1, w2) = cfg.weights;
    if i1 == i2 {
        let mut basis = [czero(); 4];
        basis[i1] = cr(T::one());
        let state = TwoQubitState::new(basis).expect("basis state");
        return DensityMatrix::from_pure(&state);
    }
    let mut m = crate::linalg::Mat4::zero();
    m.m[i1][i1] = cr(w1 * w1);
    m.m[i2][i2] = cr(w2 * w2);
    let off = cis(-cfg.phase) * cr(coherence * w1 * w2);
    m.m[i1][i2] = off;
    m.m[i2][i1] = off.conj();
    DensityMatrix::new(m).expect("dephased state is physical by construction")
}
