//! Two-qubit polarization linear algebra: pure states, density matrices,
//! projections, fidelity, and CHSH via the Horodecki criterion.
//!
//! Basis order is fixed crate-wide as (HH, HV, VH, VV). The circular basis
//! convention is `sigma+ = (H + iV)/sqrt(2)`.

use crate::error::{Error, Result};
use crate::linalg::{herm_eigen4, herm_eigenvalues4, kron2, sym_eigen, Mat2, Mat4};
use crate::scalar::{cr, czero, Real, C};

/// Canonical two-qubit basis labels, in storage order.
pub const BASIS_LABELS: [&str; 4] = ["HH", "HV", "VH", "VV"];

/// Unit-norm tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-12;
/// Elementwise Hermiticity tolerance for density matrices.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Physicality floor: smallest admissible eigenvalue for internally
/// produced density matrices. Ingested matrices are exempt but flagged.
pub const PHYSICALITY_TOL: f64 = -1e-9;

/// Single-photon polarization state: complex amplitudes on (H, V).
#[derive(Clone, Copy, Debug)]
pub struct PolarizationVector<T> {
    amps: [C<T>; 2],
}

impl<T: Real> PolarizationVector<T> {
    /// Normalizes the amplitudes; rejects the zero vector.
    pub fn new(h: C<T>, v: C<T>) -> Result<Self> {
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if norm <= T::zero() {
            return Err(Error::ZeroNorm);
        }
        let inv = cr(T::one() / norm);
        Ok(Self {
            amps: [h * inv, v * inv],
        })
    }

    pub fn horizontal() -> Self {
        Self {
            amps: [cr(T::one()), czero()],
        }
    }

    pub fn vertical() -> Self {
        Self {
            amps: [czero(), cr(T::one())],
        }
    }

    /// Linear polarization at `theta` radians from H.
    pub fn linear(theta: T) -> Self {
        Self {
            amps: [cr(theta.cos()), cr(theta.sin())],
        }
    }

    /// `sigma+ = (H + iV)/sqrt(2)`.
    pub fn sigma_plus() -> Self {
        let s = T::of(std::f64::consts::FRAC_1_SQRT_2);
        Self {
            amps: [cr(s), C::new(T::zero(), s)],
        }
    }

    /// `sigma- = (H - iV)/sqrt(2)`.
    pub fn sigma_minus() -> Self {
        let s = T::of(std::f64::consts::FRAC_1_SQRT_2);
        Self {
            amps: [cr(s), C::new(T::zero(), -s)],
        }
    }

    pub fn amplitudes(&self) -> [C<T>; 2] {
        self.amps
    }

    pub fn h(&self) -> C<T> {
        self.amps[0]
    }

    pub fn v(&self) -> C<T> {
        self.amps[1]
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &Self) -> C<T> {
        self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]
    }

    /// State orthogonal to this one (unique up to phase for qubits).
    pub fn orthogonal(&self) -> Self {
        Self {
            amps: [-self.amps[1].conj(), self.amps[0].conj()],
        }
    }
}

/// Pure two-qubit polarization state in (HH, HV, VH, VV) order.
#[derive(Clone, Copy, Debug)]
pub struct TwoQubitState<T> {
    amps: [C<T>; 4],
}

impl<T: Real> TwoQubitState<T> {
    /// Normalizes the amplitudes; rejects the zero vector.
    pub fn new(amps: [C<T>; 4]) -> Result<Self> {
        let norm = amps
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt();
        if norm <= T::zero() {
            return Err(Error::ZeroNorm);
        }
        let inv = cr(T::one() / norm);
        let mut out = amps;
        for a in out.iter_mut() {
            *a *= inv;
        }
        Ok(Self { amps: out })
    }

    /// Product state `|a>_s |b>_as`.
    pub fn product(a: &PolarizationVector<T>, b: &PolarizationVector<T>) -> Self {
        Self {
            amps: kron2(a.amplitudes(), b.amplitudes()),
        }
    }

    pub fn amplitudes(&self) -> [C<T>; 4] {
        self.amps
    }

    pub fn norm(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &Self) -> C<T> {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .fold(czero(), |acc, (a, b)| acc + a.conj() * *b)
    }

    /// `|<self|other>|`, the comparison that ignores global phase.
    pub fn overlap_magnitude(&self, other: &Self) -> T {
        self.overlap(other).norm()
    }

    /// Projection probability onto a product analyzer pair.
    pub fn projection_probability(
        &self,
        analyzer_s: &PolarizationVector<T>,
        analyzer_as: &PolarizationVector<T>,
    ) -> T {
        let a = kron2(analyzer_s.amplitudes(), analyzer_as.amplitudes());
        let amp = a
            .iter()
            .zip(self.amps.iter())
            .fold(czero(), |acc, (ai, si)| acc + ai.conj() * *si);
        amp.norm_sqr()
    }
}

/// The four maximally entangled Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellKind {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PsiPlus,
        BellKind::PsiMinus,
        BellKind::PhiPlus,
        BellKind::PhiMinus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BellKind::PsiPlus => "psi_plus",
            BellKind::PsiMinus => "psi_minus",
            BellKind::PhiPlus => "phi_plus",
            BellKind::PhiMinus => "phi_minus",
        }
    }
}

impl std::str::FromStr for BellKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "psi_plus" | "psi+" | "psiplus" => Ok(BellKind::PsiPlus),
            "psi_minus" | "psi-" | "psiminus" => Ok(BellKind::PsiMinus),
            "phi_plus" | "phi+" | "phiplus" => Ok(BellKind::PhiPlus),
            "phi_minus" | "phi-" | "phiminus" => Ok(BellKind::PhiMinus),
            other => Err(format!("unknown Bell state {other:?}")),
        }
    }
}

/// The Bell states in the linear basis, under the circular-to-linear map
/// `s+s- -> HH`, `s-s+ -> VV`, `s+s+ -> HV`, `s-s- -> VH`:
/// `Psi+- = (HH +- VV)/sqrt(2)`, `Phi+- = (HV +- VH)/sqrt(2)`.
pub fn bell_state<T: Real>(kind: BellKind) -> TwoQubitState<T> {
    let s = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let p = cr(s);
    let m = cr(-s);
    let z = czero();
    let amps = match kind {
        BellKind::PsiPlus => [p, z, z, p],
        BellKind::PsiMinus => [p, z, z, m],
        BellKind::PhiPlus => [z, p, p, z],
        BellKind::PhiMinus => [z, p, m, z],
    };
    TwoQubitState { amps }
}

/// 4x4 polarization density matrix in (HH, HV, VH, VV) order.
///
/// Matrices built internally must satisfy the Hermiticity, trace, and
/// physicality invariants; matrices ingested from external sources carry an
/// `ingested` flag and are validated but never repaired.
#[derive(Clone, Copy, Debug)]
pub struct DensityMatrix<T> {
    m: Mat4<T>,
    ingested: bool,
}

/// Validation scalars for a density matrix candidate.
#[derive(Clone, Copy, Debug)]
pub struct DensityDiagnostics<T> {
    pub hermiticity_residual: T,
    pub trace_residual: T,
    pub min_eigenvalue: T,
    pub purity: T,
}

impl<T: Real> DensityDiagnostics<T> {
    pub fn is_physical(&self) -> bool {
        self.hermiticity_residual.as_f64() <= HERMITICITY_TOL
            && self.trace_residual.as_f64() <= TRACE_TOL
            && self.min_eigenvalue.as_f64() >= PHYSICALITY_TOL
    }
}

/// Reports Hermiticity residual, trace residual, minimum eigenvalue, and
/// purity of an arbitrary 4x4 complex matrix. Never mutates its input; the
/// eigenvalue is computed on the symmetrized matrix.
pub fn validate_density<T: Real>(m: &Mat4<T>) -> DensityDiagnostics<T> {
    let herm = m.hermiticity_residual();
    let trace = m.trace();
    let trace_residual = ((trace.re - T::one()).powi(2) + trace.im.powi(2)).sqrt();
    let sym = m.symmetrized();
    let eigs = herm_eigenvalues4(&sym);
    let purity = m.mul(m).trace().re;
    DensityDiagnostics {
        hermiticity_residual: herm,
        trace_residual,
        min_eigenvalue: eigs[0],
        purity,
    }
}

impl<T: Real> DensityMatrix<T> {
    /// Validated constructor for internally produced matrices.
    pub fn new(m: Mat4<T>) -> Result<Self> {
        let d = validate_density(&m);
        if d.hermiticity_residual.as_f64() > HERMITICITY_TOL {
            return Err(Error::NonHermitian {
                residual: d.hermiticity_residual.as_f64(),
            });
        }
        if d.trace_residual.as_f64() > TRACE_TOL {
            return Err(Error::WrongTrace {
                trace: m.trace().re.as_f64(),
                residual: d.trace_residual.as_f64(),
            });
        }
        if d.min_eigenvalue.as_f64() < PHYSICALITY_TOL {
            return Err(Error::Unphysical {
                min_eigenvalue: d.min_eigenvalue.as_f64(),
            });
        }
        Ok(Self { m, ingested: false })
    }

    /// Ingest an external matrix without repair. Invariant violations are
    /// surfaced through [`validate_density`], not fixed.
    pub fn ingest(m: Mat4<T>) -> Self {
        Self { m, ingested: true }
    }

    pub fn from_pure(state: &TwoQubitState<T>) -> Self {
        Self {
            m: Mat4::outer(state.amplitudes()),
            ingested: false,
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            m: Mat4::identity().scale(cr(T::of(0.25))),
            ingested: false,
        }
    }

    pub fn matrix(&self) -> &Mat4<T> {
        &self.m
    }

    pub fn is_ingested(&self) -> bool {
        self.ingested
    }

    pub fn diagnostics(&self) -> DensityDiagnostics<T> {
        validate_density(&self.m)
    }

    pub fn purity(&self) -> T {
        self.m.mul(&self.m).trace().re
    }

    /// Convex mixture `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &Self, alpha: T) -> Self {
        let a = self.m.scale(cr(alpha));
        let b = other.m.scale(cr(T::one() - alpha));
        Self {
            m: a.add(&b),
            ingested: self.ingested || other.ingested,
        }
    }

    /// Projection probability onto a product analyzer pair,
    /// `Re <a_s a_as| rho |a_s a_as>`.
    pub fn projection_probability(
        &self,
        analyzer_s: &PolarizationVector<T>,
        analyzer_as: &PolarizationVector<T>,
    ) -> T {
        let a = kron2(analyzer_s.amplitudes(), analyzer_as.amplitudes());
        self.m.quadratic_form(a).re
    }

    /// Analysis-gate check: internal matrices must satisfy the strict
    /// invariants; ingested matrices are admitted with loose bounds so that
    /// printed (rounded) matrices remain analyzable.
    fn check_for_analysis(&self) -> Result<()> {
        let d = validate_density(&self.m);
        let (herm_tol, trace_tol) = if self.ingested {
            (0.1, 0.05)
        } else {
            (HERMITICITY_TOL, TRACE_TOL)
        };
        if d.hermiticity_residual.as_f64() > herm_tol {
            return Err(Error::NonHermitian {
                residual: d.hermiticity_residual.as_f64(),
            });
        }
        if d.trace_residual.as_f64() > trace_tol {
            return Err(Error::WrongTrace {
                trace: self.m.trace().re.as_f64(),
                residual: d.trace_residual.as_f64(),
            });
        }
        if !self.ingested && d.min_eigenvalue.as_f64() < PHYSICALITY_TOL {
            return Err(Error::Unphysical {
                min_eigenvalue: d.min_eigenvalue.as_f64(),
            });
        }
        Ok(())
    }

    /// Eigenvalues (ascending) of the symmetrized matrix.
    pub fn eigenvalues(&self) -> Vec<T> {
        herm_eigenvalues4(&self.m.symmetrized())
    }

    /// Full eigendecomposition of the symmetrized matrix.
    pub fn eigen(&self) -> (Vec<T>, Vec<[C<T>; 4]>) {
        herm_eigen4(&self.m.symmetrized())
    }

    /// Nearest physical state in the eigenbasis: symmetrize, clip negative
    /// eigenvalues to zero, renormalize the trace. Identity (up to rounding)
    /// for matrices that are already physical.
    pub fn physical_projection(&self) -> Self {
        let (vals, vecs) = self.eigen();
        let mut total = T::zero();
        let clipped: Vec<T> = vals
            .iter()
            .map(|&v| {
                let c = v.max(T::zero());
                total += c;
                c
            })
            .collect();
        let mut m = Mat4::zero();
        for (lam, v) in clipped.iter().zip(vecs.iter()) {
            if *lam > T::zero() {
                m = m.add(&Mat4::outer(*v).scale(cr(*lam / total)));
            }
        }
        Self { m, ingested: false }
    }
}

/// Pure state or density matrix, for code paths that accept both.
#[derive(Clone, Copy, Debug)]
pub enum PairState<T> {
    Pure(TwoQubitState<T>),
    Mixed(DensityMatrix<T>),
}

impl<T: Real> PairState<T> {
    pub fn projection_probability(
        &self,
        analyzer_s: &PolarizationVector<T>,
        analyzer_as: &PolarizationVector<T>,
    ) -> T {
        match self {
            PairState::Pure(s) => s.projection_probability(analyzer_s, analyzer_as),
            PairState::Mixed(r) => r.projection_probability(analyzer_s, analyzer_as),
        }
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        match self {
            PairState::Pure(s) => DensityMatrix::from_pure(s),
            PairState::Mixed(r) => *r,
        }
    }
}

/// Fidelity of a density matrix against a pure target, in both conventions.
#[derive(Clone, Copy, Debug)]
pub struct Fidelity<T> {
    /// `<psi| rho |psi>`.
    pub f_prob: T,
    /// `sqrt(max(f_prob, 0))`.
    pub f_sqrt: T,
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2` between two
/// density matrices, via the eigenbasis square root. Reduces to
/// `<psi|sigma|psi>` when `rho` is pure.
pub fn uhlmann_fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> T {
    let (vals, vecs) = rho.eigen();
    let mut sqrt_rho = Mat4::zero();
    for (lam, v) in vals.iter().zip(vecs.iter()) {
        if *lam > T::zero() {
            sqrt_rho = sqrt_rho.add(&Mat4::outer(*v).scale(cr(lam.sqrt())));
        }
    }
    let inner = sqrt_rho.mul(sigma.matrix()).mul(&sqrt_rho);
    let eigs = herm_eigenvalues4(&inner.symmetrized());
    let total = eigs
        .iter()
        .fold(T::zero(), |acc, &e| acc + e.max(T::zero()).sqrt());
    total * total
}

/// `<psi| rho |psi>` and its square root. Both conventions are reported
/// because published fidelities do not always state which one they use.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, target: &TwoQubitState<T>) -> Result<Fidelity<T>> {
    rho.check_for_analysis()?;
    let f_prob = rho.matrix().quadratic_form(target.amplitudes()).re;
    let f_sqrt = if f_prob > T::zero() {
        f_prob.sqrt()
    } else {
        T::zero()
    };
    Ok(Fidelity { f_prob, f_sqrt })
}

/// Unit vector on the Bloch sphere (x, y, z) describing a measurement
/// direction: the observable is `n . sigma` with eigenstates returned by
/// [`BlochVector::analyzer_pair`].
#[derive(Clone, Copy, Debug)]
pub struct BlochVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        let n = (x * x + y * y + z * z).sqrt();
        if n <= T::zero() {
            // Degenerate direction; callers only hit this for zero
            // correlation tensors where any setting is optimal.
            return Self {
                x: T::zero(),
                y: T::zero(),
                z: T::one(),
            };
        }
        Self {
            x: x / n,
            y: y / n,
            z: z / n,
        }
    }

    /// Polar and azimuthal angles (radians).
    pub fn angles(&self) -> (T, T) {
        (self.z.acos(), self.y.atan2(self.x))
    }

    /// The (+1, -1) eigenstates of `n . sigma` as polarization analyzers.
    pub fn analyzer_pair(&self) -> (PolarizationVector<T>, PolarizationVector<T>) {
        let one = T::one();
        let plus = if (self.z + one).as_f64() > 1e-12 {
            PolarizationVector::new(cr(one + self.z), C::new(self.x, self.y))
                .expect("nonzero eigenvector")
        } else {
            PolarizationVector::vertical()
        };
        let minus = plus.orthogonal();
        (plus, minus)
    }
}

/// The four measurement directions that realize the CHSH maximum.
#[derive(Clone, Copy, Debug)]
pub struct ChshSettings<T> {
    pub alice: [BlochVector<T>; 2],
    pub bob: [BlochVector<T>; 2],
}

/// Result of the CHSH maximization.
#[derive(Clone, Debug)]
pub struct ChshOutcome<T> {
    /// `s = 2 sqrt(m1 + m2)` from the two largest eigenvalues of `T^t T`.
    pub s: T,
    pub settings: ChshSettings<T>,
    /// Correlation tensor `T_ij = Tr(rho sigma_i x sigma_j)`.
    pub tensor: [[T; 3]; 3],
    /// True when an ingested unphysical matrix was projected onto the
    /// physical cone before the analysis.
    pub projected: bool,
}

fn pauli<T: Real>(axis: usize) -> Mat2<T> {
    let z = czero();
    let o = cr(T::one());
    match axis {
        0 => Mat2::new(z, o, o, z),
        1 => Mat2::new(
            z,
            C::new(T::zero(), -T::one()),
            C::new(T::zero(), T::one()),
            z,
        ),
        _ => Mat2::new(o, z, z, -o),
    }
}

fn kron_mat2<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat4<T> {
    let mut out = Mat4::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.m[2 * i + k][2 * j + l] = a.m[i][j] * b.m[k][l];
                }
            }
        }
    }
    out
}

/// Correlation tensor `T_ij = Tr(rho sigma_i x sigma_j)`, i = Stokes axis,
/// j = anti-Stokes axis, axes (x, y, z).
pub fn correlation_tensor<T: Real>(rho: &DensityMatrix<T>) -> [[T; 3]; 3] {
    let mut t = [[T::zero(); 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, tij) in row.iter_mut().enumerate() {
            let op = kron_mat2(&pauli::<T>(i), &pauli::<T>(j));
            *tij = rho.matrix().mul(&op).trace().re;
        }
    }
    t
}

/// Correlation function `E(a, b)` by direct projection onto the four
/// analyzer outcome combinations.
pub fn correlation<T: Real>(rho: &DensityMatrix<T>, a: &BlochVector<T>, b: &BlochVector<T>) -> T {
    let (ap, am) = a.analyzer_pair();
    let (bp, bm) = b.analyzer_pair();
    rho.projection_probability(&ap, &bp)
        - rho.projection_probability(&ap, &bm)
        - rho.projection_probability(&am, &bp)
        + rho.projection_probability(&am, &bm)
}

/// CHSH combination `E(a,b) + E(a,b') + E(a',b) - E(a',b')` evaluated by
/// direct correlation computation.
pub fn chsh_value<T: Real>(rho: &DensityMatrix<T>, settings: &ChshSettings<T>) -> T {
    let [a, ap] = &settings.alice;
    let [b, bp] = &settings.bob;
    correlation(rho, a, b) + correlation(rho, a, bp) + correlation(rho, ap, b)
        - correlation(rho, ap, bp)
}

fn mat_vec3<T: Real>(t: &[[T; 3]; 3], v: [T; 3]) -> [T; 3] {
    let mut out = [T::zero(); 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = t[i][0] * v[0] + t[i][1] * v[1] + t[i][2] * v[2];
    }
    out
}

/// Maximal CHSH value `s = 2 sqrt(m1 + m2)` (Horodecki criterion) together
/// with measurement settings that attain it.
///
/// Ingested matrices with flagged physicality violations are admitted but
/// projected onto the physical cone first: the criterion is only meaningful
/// for states, and negative eigenvalues inflate `s` past the Tsirelson
/// bound. The `projected` flag records when this happened.
pub fn chsh_max<T: Real>(rho: &DensityMatrix<T>) -> Result<ChshOutcome<T>> {
    rho.check_for_analysis()?;
    let diag = rho.diagnostics();
    let projected = diag.min_eigenvalue.as_f64() < PHYSICALITY_TOL
        || diag.hermiticity_residual.as_f64() > HERMITICITY_TOL;
    let working;
    let rho = if projected {
        working = rho.physical_projection();
        &working
    } else {
        rho
    };
    let t = correlation_tensor(rho);
    // M = T^t T, real symmetric 3x3.
    let mut m = vec![vec![T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = T::zero();
            for (trow_i, trow_j) in t.iter().map(|r| (r[i], r[j])) {
                acc += trow_i * trow_j;
            }
            m[i][j] = acc;
        }
    }
    let (vals, vecs) = sym_eigen(&m);
    let m1 = vals[2].max(T::zero());
    let m2 = vals[1].max(T::zero());
    let s = T::of(2.0) * (m1 + m2).sqrt();

    // Bob measures along the two top eigenvectors c, c' rotated by the
    // optimal mixing angle; Alice along the images T c, T c'.
    let c = [vecs[2][0], vecs[2][1], vecs[2][2]];
    let cp = [vecs[1][0], vecs[1][1], vecs[1][2]];
    let theta = if m1 > T::zero() {
        (m2.sqrt()).atan2(m1.sqrt())
    } else {
        T::zero()
    };
    let (ct, st) = (theta.cos(), theta.sin());
    let b = BlochVector::new(
        ct * c[0] + st * cp[0],
        ct * c[1] + st * cp[1],
        ct * c[2] + st * cp[2],
    );
    let bp = BlochVector::new(
        ct * c[0] - st * cp[0],
        ct * c[1] - st * cp[1],
        ct * c[2] - st * cp[2],
    );
    let tc = mat_vec3(&t, c);
    let tcp = mat_vec3(&t, cp);
    let a = BlochVector::new(tc[0], tc[1], tc[2]);
    let ap = BlochVector::new(tcp[0], tcp[1], tcp[2]);

    Ok(ChshOutcome {
        s,
        settings: ChshSettings {
            alice: [a, ap],
            bob: [b, bp],
        },
        tensor: t,
        projected,
    })
}

/// The textbook fixed CHSH settings: Alice along z and x, Bob along the
/// diagonals `(z +- x)/sqrt(2)`. Optimal for the ideal Bell states; reported
/// alongside the Horodecki optimum for states where the two differ.
pub fn canonical_chsh_settings<T: Real>() -> ChshSettings<T> {
    let s = T::of(std::f64::consts::FRAC_1_SQRT_2);
    ChshSettings {
        alice: [
            BlochVector::new(T::zero(), T::zero(), T::one()),
            BlochVector::new(T::one(), T::zero(), T::zero()),
        ],
        bob: [
            BlochVector::new(s, T::zero(), s),
            BlochVector::new(-s, T::zero(), s),
        ],
    }
}

/// CHSH value at the canonical fixed settings, on the same physical
/// projection rule as [`chsh_max`].
pub fn chsh_canonical<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    rho.check_for_analysis()?;
    let diag = rho.diagnostics();
    let working;
    let rho = if diag.min_eigenvalue.as_f64() < PHYSICALITY_TOL
        || diag.hermiticity_residual.as_f64() > HERMITICITY_TOL
    {
        working = rho.physical_projection();
        &working
    } else {
        rho
    };
    Ok(chsh_value(rho, &canonical_chsh_settings()).abs())
}
