//! Sixteen-projection two-qubit state tomography: forward count model,
//! linear inversion, and maximum-likelihood reconstruction over the
//! Cholesky-parameterized physical cone, plus the published reference
//! matrices as regression fixtures.

use crate::error::{Error, Result};
use crate::linalg::{cholesky4, herm_eigen4, kron2, solve_real, sym_eigen, Mat2, Mat4};
use crate::optics::{analyzer_projector, AnalyzerChain, PbsPort};
use crate::optimize::{minimize, MinimizeOptions};
use crate::quantum::{
    validate_density, BellKind, DensityDiagnostics, DensityMatrix, PolarizationVector,
    TwoQubitState,
};
use crate::scalar::{cr, czero, Real, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};

/// One product projection: analyzer chains on both arms.
#[derive(Clone, Debug)]
pub struct ProjectionSetting<T> {
    pub label: String,
    pub stokes: AnalyzerChain<T>,
    pub anti_stokes: AnalyzerChain<T>,
}

impl<T: Real> ProjectionSetting<T> {
    pub fn acceptance(&self) -> (PolarizationVector<T>, PolarizationVector<T>) {
        (
            analyzer_projector(&self.stokes),
            analyzer_projector(&self.anti_stokes),
        )
    }

    fn product_vector(&self) -> [C<T>; 4] {
        let (a, b) = self.acceptance();
        kron2(a.amplitudes(), b.amplitudes())
    }
}

/// Ordered, informationally complete list of projection settings.
#[derive(Clone, Debug)]
pub struct ProjectionSet<T> {
    settings: Vec<ProjectionSetting<T>>,
}

/// Single-qubit analyzer table: (QWP, HWP) angles on the transmit port for
/// the six cardinal polarizations under this crate's Jones conventions.
fn cardinal_chain<T: Real>(which: char) -> AnalyzerChain<T> {
    let pi = T::PI();
    let (q, h) = match which {
        'H' => (T::zero(), T::zero()),
        'V' => (T::zero(), pi / T::of(4.0)),
        'D' => (pi / T::of(4.0), pi / T::of(8.0)),
        'A' => (T::of(0.75) * pi, T::of(0.375) * pi),
        // R accepts (H - iV)/sqrt(2), L accepts (H + iV)/sqrt(2)
        'R' => (pi / T::of(4.0), T::zero()),
        'L' => (T::of(0.75) * pi, T::zero()),
        other => panic!("unknown cardinal polarization {other}"),
    };
    AnalyzerChain::qwp_hwp(q, h, PbsPort::Transmit)
}

impl<T: Real> ProjectionSet<T> {
    /// The canonical 16-setting table. The first four settings are the
    /// complete (H/V) x (H/V) population group.
    pub fn standard() -> Self {
        const LABELS: [&str; 16] = [
            "HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH", "DR", "DD", "RD", "HD", "VD", "VL",
            "HL", "RL",
        ];
        let settings = LABELS
            .iter()
            .map(|label| {
                let mut chars = label.chars();
                let s = chars.next().unwrap();
                let a = chars.next().unwrap();
                ProjectionSetting {
                    label: label.to_string(),
                    stokes: cardinal_chain(s),
                    anti_stokes: cardinal_chain(a),
                }
            })
            .collect();
        Self { settings }
    }

    /// Custom set; must span the 16-dimensional operator space.
    pub fn new(settings: Vec<ProjectionSetting<T>>) -> Result<Self> {
        let set = Self { settings };
        let rank = set.gram_rank();
        if rank < 16 {
            return Err(Error::RankDeficientProjections { rank });
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    pub fn settings(&self) -> &[ProjectionSetting<T>] {
        &self.settings
    }

    fn product_vectors(&self) -> Vec<[C<T>; 4]> {
        self.settings.iter().map(|s| s.product_vector()).collect()
    }

    /// Hilbert-Schmidt Gram matrix of the projectors,
    /// `G_ij = Tr(P_i P_j) = |<v_i|v_j>|^2`.
    pub fn gram(&self) -> Vec<Vec<T>> {
        let vecs = self.product_vectors();
        let n = vecs.len();
        let mut g = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut dot = czero();
                for (a, b) in vecs[i].iter().zip(vecs[j].iter()) {
                    dot += a.conj() * *b;
                }
                g[i][j] = dot.norm_sqr();
            }
        }
        g
    }

    pub fn gram_rank(&self) -> usize {
        let (vals, _) = sym_eigen(&self.gram());
        let max = vals.last().copied().unwrap_or(T::zero());
        vals.iter().filter(|v| **v > max * T::of(1e-9)).count()
    }

    /// Ratio of largest to smallest Gram eigenvalue.
    pub fn gram_condition(&self) -> T {
        let (vals, _) = sym_eigen(&self.gram());
        let max = *vals.last().expect("nonempty");
        let min = vals[0];
        if min <= T::zero() {
            T::infinity()
        } else {
            max / min
        }
    }
}

/// Measured coincidence counts for each setting of a [`ProjectionSet`].
#[derive(Clone, Debug)]
pub struct TomographyCounts<T> {
    pub counts: Vec<T>,
    /// Expected accidental (background) counts per setting, subtracted
    /// inside the forward model, never from the data.
    pub background: Vec<T>,
}

impl<T: Real> TomographyCounts<T> {
    pub fn new(counts: Vec<T>) -> Self {
        let n = counts.len();
        Self {
            counts,
            background: vec![T::zero(); n],
        }
    }

    pub fn with_background(mut self, background: Vec<T>) -> Self {
        self.background = background;
        self
    }
}

/// Expected counts `n_i = intensity * <P_i> + background_i`.
pub fn expected_counts<T: Real>(
    rho: &DensityMatrix<T>,
    set: &ProjectionSet<T>,
    intensity: T,
    background: &[T],
) -> Vec<T> {
    set.settings
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (a, b) = s.acceptance();
            let bg = background.get(i).copied().unwrap_or(T::zero());
            intensity * rho.projection_probability(&a, &b) + bg
        })
        .collect()
}

const PAULI_LABELS: usize = 4;

fn pauli_with_identity<T: Real>(k: usize) -> Mat2<T> {
    let z = czero();
    let o = cr(T::one());
    match k {
        0 => Mat2::new(o, z, z, o),
        1 => Mat2::new(z, o, o, z),
        2 => Mat2::new(
            z,
            C::new(T::zero(), -T::one()),
            C::new(T::zero(), T::one()),
            z,
        ),
        _ => Mat2::new(o, z, z, -o),
    }
}

fn operator_basis<T: Real>() -> Vec<Mat4<T>> {
    let mut ops = Vec::with_capacity(16);
    for mu in 0..PAULI_LABELS {
        for nu in 0..PAULI_LABELS {
            let a = pauli_with_identity::<T>(mu);
            let b = pauli_with_identity::<T>(nu);
            let mut m = Mat4::zero();
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            m.m[2 * i + k][2 * j + l] = a.m[i][j] * b.m[k][l];
                        }
                    }
                }
            }
            ops.push(m);
        }
    }
    ops
}

/// Linear inversion of background-corrected counts onto the Pauli operator
/// basis. The output is Hermitian with unit trace but may be unphysical
/// (negative eigenvalues); that is what motivates the MLE step.
pub fn linear_inversion<T: Real>(
    counts: &TomographyCounts<T>,
    set: &ProjectionSet<T>,
) -> Result<Mat4<T>> {
    if counts.counts.len() != set.len() {
        return Err(Error::Format {
            what: "tomography counts",
            reason: format!("{} counts for {} settings", counts.counts.len(), set.len()),
        });
    }
    // Intensity estimate from the complete population group (first four
    // settings of the standard set).
    let corrected: Vec<T> = counts
        .counts
        .iter()
        .zip(
            counts
                .background
                .iter()
                .chain(std::iter::repeat(&T::zero())),
        )
        .map(|(&n, &b)| n - b)
        .collect();
    let intensity = corrected.iter().take(4).fold(T::zero(), |a, &x| a + x);
    if intensity <= T::zero() {
        return Err(Error::Format {
            what: "tomography counts",
            reason: "population group sums to a non-positive intensity".into(),
        });
    }

    let basis = operator_basis::<T>();
    let vecs = set.product_vectors();
    let n = set.len();
    // Least-squares normal equations for p_i = (1/4) sum_k M_ik t_k.
    let mut design = vec![vec![T::zero(); 16]; n];
    for (i, v) in vecs.iter().enumerate() {
        for (k, b) in basis.iter().enumerate() {
            design[i][k] = b.quadratic_form(*v).re * T::of(0.25);
        }
    }
    let mut normal = vec![vec![T::zero(); 16]; 16];
    let mut rhs = vec![T::zero(); 16];
    for k in 0..16 {
        for l in 0..16 {
            let mut acc = T::zero();
            for row in design.iter() {
                acc += row[k] * row[l];
            }
            normal[k][l] = acc;
        }
        let mut acc = T::zero();
        for (row, &c) in design.iter().zip(corrected.iter()) {
            acc += row[k] * c / intensity;
        }
        rhs[k] = acc;
    }
    let t = solve_real(&mut normal, &mut rhs, "linear inversion")?;

    let mut rho = Mat4::zero();
    for (k, b) in operator_basis::<T>().iter().enumerate() {
        rho = rho.add(&b.scale(cr(t[k] * T::of(0.25))));
    }
    // Exact unit trace: rescale by the identity component.
    let tr = rho.trace().re;
    if tr.abs() <= T::of(1e-12) {
        return Err(Error::SingularSystem {
            context: "linear inversion trace",
        });
    }
    Ok(rho.scale(cr(T::one() / tr)))
}

/// Count statistics model for the likelihood.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LikelihoodModel {
    Poisson,
    Gaussian,
}

/// Maximum-likelihood configuration.
#[derive(Clone, Debug)]
pub struct MleConfig<T> {
    pub likelihood: LikelihoodModel,
    pub gradient_tolerance: T,
    pub step_tolerance: T,
    pub max_iterations: usize,
    /// Random restarts on top of the linear-inversion seed.
    pub restarts: usize,
    pub seed: u64,
}

impl<T: Real> Default for MleConfig<T> {
    fn default() -> Self {
        Self {
            likelihood: LikelihoodModel::Poisson,
            gradient_tolerance: T::of(1e-8),
            step_tolerance: T::of(1e-10),
            max_iterations: 4000,
            restarts: 2,
            seed: 0,
        }
    }
}

/// Physical reconstruction and its fit metadata.
#[derive(Clone, Debug)]
pub struct ReconstructionResult<T> {
    pub rho: DensityMatrix<T>,
    /// Fitted total intensity (trace of the unnormalized factor product).
    pub intensity: T,
    pub final_nll: T,
    /// Negative log-likelihood at the projected linear-inversion seed.
    pub seed_nll: T,
    pub iterations: usize,
    pub converged: bool,
    /// Optimal parameter vector, reusable as a warm start.
    pub params: Vec<T>,
}

// Lower-triangular index map: 4 real diagonal entries then (re, im) pairs.
const TRI_POSITIONS: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

fn factor_from_params<T: Real>(x: &[T]) -> Mat4<T> {
    let mut l = Mat4::zero();
    for d in 0..4 {
        l.m[d][d] = cr(x[d]);
    }
    for (k, &(r, c)) in TRI_POSITIONS.iter().enumerate() {
        l.m[r][c] = C::new(x[4 + 2 * k], x[5 + 2 * k]);
    }
    l
}

fn params_from_factor<T: Real>(l: &Mat4<T>) -> Vec<T> {
    let mut x = vec![T::zero(); 16];
    for d in 0..4 {
        x[d] = l.m[d][d].re;
    }
    for (k, &(r, c)) in TRI_POSITIONS.iter().enumerate() {
        x[4 + 2 * k] = l.m[r][c].re;
        x[5 + 2 * k] = l.m[r][c].im;
    }
    x
}

struct NllModel<'a, T> {
    vectors: &'a [[C<T>; 4]],
    counts: &'a [T],
    background: &'a [T],
    likelihood: LikelihoodModel,
}

impl<T: Real> NllModel<'_, T> {
    /// Expected counts for parameter vector `x`: `|L^dagger a_i|^2 + bg_i`.
    fn predicted(&self, l: &Mat4<T>, i: usize) -> (T, [C<T>; 4]) {
        let a = self.vectors[i];
        let mut v = [czero(); 4];
        // v = L^dagger a
        for (r, vr) in v.iter_mut().enumerate() {
            let mut acc = czero();
            for (m, am) in a.iter().enumerate() {
                acc += l.m[m][r].conj() * *am;
            }
            *vr = acc;
        }
        let n_hat = v.iter().fold(T::zero(), |s, z| s + z.norm_sqr()) + self.background[i];
        (n_hat, v)
    }

    fn value(&self, x: &[T]) -> T {
        let l = factor_from_params(x);
        let floor = T::of(1e-9);
        let mut nll = T::zero();
        for i in 0..self.counts.len() {
            let (n_hat, _) = self.predicted(&l, i);
            let m = n_hat.max(floor);
            nll += match self.likelihood {
                LikelihoodModel::Poisson => m - self.counts[i] * m.ln(),
                LikelihoodModel::Gaussian => {
                    let d = m - self.counts[i];
                    d * d / (T::of(2.0) * m)
                }
            };
        }
        nll
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        let l = factor_from_params(x);
        let floor = T::of(1e-9);
        let mut grad = vec![T::zero(); 16];
        for i in 0..self.counts.len() {
            let a = self.vectors[i];
            let (n_hat, v) = self.predicted(&l, i);
            let m = n_hat.max(floor);
            let dnll_dm = match self.likelihood {
                LikelihoodModel::Poisson => T::one() - self.counts[i] / m,
                LikelihoodModel::Gaussian => {
                    let n = self.counts[i];
                    (T::one() - (n * n) / (m * m)) * T::of(0.5)
                }
            };
            // d n_hat / d L[r][c] with v = L^dagger a:
            // d/dRe = 2 Re(conj(v[c]) a[r]),  d/dIm = 2 Im(conj(v[c]) a[r])
            for d in 0..4 {
                let w = v[d].conj() * a[d];
                grad[d] += dnll_dm * T::of(2.0) * w.re;
            }
            for (k, &(r, c)) in TRI_POSITIONS.iter().enumerate() {
                let w = v[c].conj() * a[r];
                grad[4 + 2 * k] += dnll_dm * T::of(2.0) * w.re;
                grad[5 + 2 * k] += dnll_dm * T::of(2.0) * w.im;
            }
        }
        grad
    }
}

/// Project a Hermitian matrix onto the physical cone (clip negative
/// eigenvalues, renormalize trace) and scale to `intensity`.
fn physical_seed<T: Real>(raw: &Mat4<T>, intensity: T) -> Mat4<T> {
    let (vals, vecs) = herm_eigen4(&raw.symmetrized());
    let floor = T::of(1e-6);
    let mut total = T::zero();
    let clipped: Vec<T> = vals
        .iter()
        .map(|&v| {
            let c = if v > floor { v } else { floor };
            total += c;
            c
        })
        .collect();
    let mut rho = Mat4::zero();
    for (lam, v) in clipped.iter().zip(vecs.iter()) {
        rho = rho.add(&Mat4::outer(*v).scale(cr(*lam / total)));
    }
    rho.scale(cr(intensity))
}

/// Maximum-likelihood reconstruction over `rho = L L^dagger / Tr(L L^dagger)`
/// with a lower-triangular complex factor (16 real parameters, intensity
/// absorbed in the trace). Multi-start: linear-inversion seed plus seeded
/// random restarts; the best final likelihood wins deterministically.
pub fn mle_reconstruct<T: Real>(
    counts: &TomographyCounts<T>,
    set: &ProjectionSet<T>,
    config: &MleConfig<T>,
) -> Result<ReconstructionResult<T>> {
    if counts.counts.len() != set.len() {
        return Err(Error::Format {
            what: "tomography counts",
            reason: format!("{} counts for {} settings", counts.counts.len(), set.len()),
        });
    }
    let vectors = set.product_vectors();
    let mut background = counts.background.clone();
    background.resize(counts.counts.len(), T::zero());
    let model = NllModel {
        vectors: &vectors,
        counts: &counts.counts,
        background: &background,
        likelihood: config.likelihood,
    };

    // Seed from linear inversion projected to the physical cone.
    let intensity_est = counts
        .counts
        .iter()
        .zip(background.iter())
        .take(4)
        .fold(T::zero(), |a, (&n, &b)| a + (n - b))
        .max(T::of(1.0));
    let seed_matrix = match linear_inversion(counts, set) {
        Ok(raw) => physical_seed(&raw, intensity_est),
        Err(_) => Mat4::identity().scale(cr(intensity_est * T::of(0.25))),
    };
    let seed_params = params_from_factor(&cholesky4(&seed_matrix));
    let seed_nll = model.value(&seed_params);

    let opts = MinimizeOptions {
        gradient_tolerance: config.gradient_tolerance,
        step_tolerance: config.step_tolerance,
        max_iterations: config.max_iterations,
    };

    let mut starts = vec![seed_params];
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let scale = (intensity_est / T::of(4.0)).sqrt();
    for _ in 0..config.restarts {
        let x: Vec<T> = (0..16)
            .map(|_| {
                let g: f64 = rng.sample(rand_distr::StandardNormal);
                scale * T::of(g * 0.5)
            })
            .collect();
        starts.push(x);
    }

    let mut best: Option<(crate::optimize::MinimizeResult<T>, usize)> = None;
    for (si, start) in starts.into_iter().enumerate() {
        let r = minimize(|x| model.value(x), |x| model.gradient(x), start, &opts);
        let better = match &best {
            None => true,
            Some((b, _)) => r.value < b.value,
        };
        if better {
            best = Some((r, si));
        }
    }
    let (result, _) = best.expect("at least one start");

    let l = factor_from_params(&result.x);
    let unnormalized = l.mul(&l.adjoint());
    let intensity = unnormalized.trace().re;
    if intensity <= T::zero() {
        return Err(Error::SingularSystem {
            context: "MLE factor collapsed to zero",
        });
    }
    let rho_m = unnormalized.scale(cr(T::one() / intensity));
    let rho = DensityMatrix::new(rho_m).map_err(|e| Error::Format {
        what: "MLE output",
        reason: format!("construction guarantee violated: {e}"),
    })?;
    Ok(ReconstructionResult {
        rho,
        intensity,
        final_nll: result.value,
        seed_nll,
        iterations: result.iterations,
        converged: result.converged,
        params: result.x,
    })
}

/// Draw a random physical density matrix (Cholesky factor with standard
/// normal entries, trace-normalized).
pub fn random_physical_density<T: Real>(rng: &mut ChaCha12Rng) -> DensityMatrix<T> {
    loop {
        let x: Vec<T> = (0..16)
            .map(|_| {
                let g: f64 = rng.sample(rand_distr::StandardNormal);
                T::of(g)
            })
            .collect();
        let l = factor_from_params(&x);
        let m = l.mul(&l.adjoint());
        let tr = m.trace().re;
        if tr > T::of(1e-6) {
            let rho = m.scale(cr(T::one() / tr));
            if let Ok(d) = DensityMatrix::new(rho) {
                return d;
            }
        }
    }
}

/// Parametric-bootstrap confidence summary.
#[derive(Clone, Debug)]
pub struct BootstrapSummary {
    pub resamples: usize,
    /// (2.5%, 50%, 97.5%) percentiles of the target-state fidelity.
    pub fidelity_prob: (f64, f64, f64),
    /// (2.5%, 50%, 97.5%) percentiles of the maximal CHSH value.
    pub chsh_s: (f64, f64, f64),
}

fn percentiles(mut v: Vec<f64>) -> (f64, f64, f64) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let pick = |q: f64| -> f64 {
        let idx = ((v.len() as f64 - 1.0) * q).round() as usize;
        v[idx]
    };
    (pick(0.025), pick(0.5), pick(0.975))
}

/// Resample Poisson counts from the fitted model and re-fit, warm-starting
/// from the fitted parameters, to get uncertainty intervals on fidelity and
/// the CHSH maximum.
pub fn bootstrap_uncertainty(
    result: &ReconstructionResult<f64>,
    counts: &TomographyCounts<f64>,
    set: &ProjectionSet<f64>,
    config: &MleConfig<f64>,
    target: &TwoQubitState<f64>,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    let mut background = counts.background.clone();
    background.resize(set.len(), 0.0);
    let fitted = expected_counts(&result.rho, set, result.intensity, &background);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut fids = Vec::with_capacity(resamples);
    let mut svals = Vec::with_capacity(resamples);
    let warm_config = MleConfig::<f64> {
        restarts: 0,
        max_iterations: config.max_iterations,
        ..config.clone()
    };
    for _ in 0..resamples {
        let resampled: Vec<f64> = fitted
            .iter()
            .map(|&m| {
                if m > 0.0 {
                    Poisson::new(m).expect("positive mean").sample(&mut rng)
                } else {
                    0.0
                }
            })
            .collect();
        let rcounts = TomographyCounts::new(resampled).with_background(background.clone());
        // Warm start straight from the fitted parameters.
        let vectors = set.product_vectors();
        let model = NllModel {
            vectors: &vectors,
            counts: &rcounts.counts,
            background: &rcounts.background,
            likelihood: warm_config.likelihood,
        };
        let opts = MinimizeOptions {
            gradient_tolerance: warm_config.gradient_tolerance,
            step_tolerance: warm_config.step_tolerance,
            max_iterations: warm_config.max_iterations,
        };
        let r = minimize(
            |x| model.value(x),
            |x| model.gradient(x),
            result.params.clone(),
            &opts,
        );
        let l = factor_from_params(&r.x);
        let un = l.mul(&l.adjoint());
        let tr = un.trace().re;
        if tr <= 0.0 {
            continue;
        }
        let rho = match DensityMatrix::new(un.scale(cr(1.0 / tr))) {
            Ok(r) => r,
            Err(_) => continue,
        };
        if let Ok(f) = crate::quantum::fidelity(&rho, target) {
            fids.push(f.f_prob);
        }
        if let Ok(c) = crate::quantum::chsh_max(&rho) {
            svals.push(c.s);
        }
    }
    if fids.is_empty() || svals.is_empty() {
        return Err(Error::Format {
            what: "bootstrap",
            reason: "all resamples failed".into(),
        });
    }
    Ok(BootstrapSummary {
        resamples,
        fidelity_prob: percentiles(fids),
        chsh_s: percentiles(svals),
    })
}

/// Poisson-sampled counts from the forward model, for synthetic tomography
/// acquisitions. Deterministic under the seed.
pub fn simulate_counts(
    rho: &DensityMatrix<f64>,
    set: &ProjectionSet<f64>,
    intensity: f64,
    background: &[f64],
    seed: u64,
) -> TomographyCounts<f64> {
    let clean = expected_counts(rho, set, intensity, background);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let counts: Vec<f64> = clean
        .iter()
        .map(|&m| {
            if m > 0.0 {
                Poisson::new(m).expect("positive mean").sample(&mut rng)
            } else {
                0.0
            }
        })
        .collect();
    let mut bg = background.to_vec();
    bg.resize(set.len(), 0.0);
    TomographyCounts::new(counts).with_background(bg)
}

/// Published reference density matrices, shipped in their printed basis
/// order and permuted to canonical order on load. Physicality violations
/// are flagged by the returned diagnostics, never repaired.
pub fn reference_density_matrix(kind: BellKind) -> (DensityMatrix<f64>, DensityDiagnostics<f64>) {
    let json = match kind {
        BellKind::PsiPlus => include_str!("../data/bell_fixture_psi_plus.json"),
        BellKind::PsiMinus => include_str!("../data/bell_fixture_psi_minus.json"),
        BellKind::PhiPlus => include_str!("../data/bell_fixture_phi_plus.json"),
        BellKind::PhiMinus => include_str!("../data/bell_fixture_phi_minus.json"),
    };
    let rho = crate::io::parse_density_matrix(json).expect("bundled fixture parses");
    let diag = validate_density(rho.matrix());
    (rho, diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bell_state, chsh_max, fidelity};

    fn standard() -> ProjectionSet<f64> {
        ProjectionSet::standard()
    }

    #[test]
    fn standard_set_has_16_informationally_complete_settings() {
        let set = standard();
        assert_eq!(set.len(), 16);
        assert_eq!(set.gram_rank(), 16);
        let cond = set.gram_condition();
        assert!(cond < 100.0, "Gram condition {cond}");
    }

    #[test]
    fn first_four_settings_sum_to_intensity() {
        let set = standard();
        let rho = DensityMatrix::from_pure(&bell_state::<f64>(BellKind::PhiPlus));
        let counts = expected_counts(&rho, &set, 1000.0, &[0.0; 16]);
        let pop: f64 = counts.iter().take(4).sum();
        assert!((pop - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn expected_counts_of_maximally_mixed_are_uniform() {
        let set = standard();
        let rho = DensityMatrix::<f64>::maximally_mixed();
        let counts = expected_counts(&rho, &set, 400.0, &[0.0; 16]);
        for c in counts {
            assert!((c - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn expected_counts_psi_plus_hh_setting() {
        let set = standard();
        let rho = DensityMatrix::from_pure(&bell_state::<f64>(BellKind::PsiPlus));
        let counts = expected_counts(&rho, &set, 1000.0, &[0.0; 16]);
        assert!((counts[0] - 500.0).abs() < 1e-9, "HH = {}", counts[0]);
    }

    #[test]
    fn zero_intensity_returns_background() {
        let set = standard();
        let rho = DensityMatrix::<f64>::maximally_mixed();
        let bg: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let counts = expected_counts(&rho, &set, 0.0, &bg);
        assert_eq!(counts, bg);
    }

    #[test]
    fn linear_inversion_recovers_noiseless_state() {
        let set = standard();
        for kind in BellKind::ALL {
            let rho = DensityMatrix::from_pure(&bell_state::<f64>(kind));
            let counts = TomographyCounts::new(expected_counts(&rho, &set, 1e6, &[0.0; 16]));
            let rec = linear_inversion(&counts, &set).unwrap();
            let mut worst = 0.0f64;
            for i in 0..4 {
                for j in 0..4 {
                    worst = worst.max((rec.m[i][j] - rho.matrix().m[i][j]).norm());
                }
            }
            assert!(worst < 1e-9, "{kind:?} residual {worst}");
        }
    }

    #[test]
    fn linear_inversion_noise_scaling() {
        let set = standard();
        let rho = DensityMatrix::from_pure(&bell_state::<f64>(BellKind::PsiPlus));
        let clean = expected_counts(&rho, &set, 1e6, &[0.0; 16]);
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let noisy: Vec<f64> = clean
            .iter()
            .map(|&m| Poisson::new(m.max(1e-9)).unwrap().sample(&mut rng))
            .collect();
        let rec = linear_inversion(&TomographyCounts::new(noisy), &set).unwrap();
        let mut frob = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                frob += (rec.m[i][j] - rho.matrix().m[i][j]).norm_sqr();
            }
        }
        let frob = frob.sqrt();
        // O(1e-3) at 1e6 counts per basis group
        assert!(frob < 8e-3, "Frobenius error {frob}");
        assert!(frob > 1e-5, "suspiciously exact: {frob}");
    }

    #[test]
    fn linear_inversion_flags_unphysical_fluctuations() {
        let set = standard();
        let rho = DensityMatrix::from_pure(&bell_state::<f64>(BellKind::PsiPlus));
        let mut counts = expected_counts(&rho, &set, 1000.0, &[0.0; 16]);
        // Push a coherence-sensitive setting past the physical bound.
        counts[9] *= 1.35; // DD
        counts[15] *= 0.6; // RL
        let rec = linear_inversion(&TomographyCounts::new(counts), &set).unwrap();
        let d = validate_density(&rec);
        assert!(
            d.min_eigenvalue < -1e-4,
            "expected negative eigenvalue, got {}",
            d.min_eigenvalue
        );
    }

    #[test]
    fn mle_round_trip_noiseless_bell_state() {
        let set = standard();
        let truth = bell_state::<f64>(BellKind::PsiPlus);
        let rho = DensityMatrix::from_pure(&truth);
        let counts = TomographyCounts::new(expected_counts(&rho, &set, 1e6, &[0.0; 16]));
        let rec = mle_reconstruct(&counts, &set, &MleConfig::default()).unwrap();
        let f = fidelity(&rec.rho, &truth).unwrap();
        assert!(f.f_prob >= 0.999, "fidelity {}", f.f_prob);
        assert!(rec.final_nll <= rec.seed_nll + 1e-9);
        assert!((rec.intensity - 1e6).abs() / 1e6 < 0.05);
    }

    #[test]
    fn mle_output_is_always_physical() {
        let set = standard();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for trial in 0..5 {
            // Arbitrary nonnegative counts, including pathological ones.
            let counts: Vec<f64> = (0..16)
                .map(|_| (rng.gen::<f64>() * 200.0).floor())
                .collect();
            let rec = mle_reconstruct(
                &TomographyCounts::new(counts),
                &set,
                &MleConfig {
                    seed: trial,
                    ..MleConfig::default()
                },
            )
            .unwrap();
            let d = rec.rho.diagnostics();
            assert!(d.is_physical(), "trial {trial}: {d:?}");
        }
    }

    #[test]
    fn mle_maximally_mixed_purity_with_sampling_noise() {
        let set = standard();
        let rho = DensityMatrix::<f64>::maximally_mixed();
        let clean = expected_counts(&rho, &set, 1e5, &[0.0; 16]);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let noisy: Vec<f64> = clean
            .iter()
            .map(|&m| Poisson::new(m).unwrap().sample(&mut rng))
            .collect();
        let rec =
            mle_reconstruct(&TomographyCounts::new(noisy), &set, &MleConfig::default()).unwrap();
        let purity = rec.rho.purity();
        assert!(
            (0.24..=0.27).contains(&purity),
            "purity {purity} outside the sampling band"
        );
    }

    #[test]
    fn mle_with_accidental_background_brackets_reference_fidelity() {
        // Poisson counts from a Bell state plus a flat accidental floor,
        // with the floor declared to the forward model.
        let set = standard();
        let truth = bell_state::<f64>(BellKind::PsiPlus);
        let rho = DensityMatrix::from_pure(&truth);
        let intensity = 2e4;
        let bg = vec![intensity * 0.015; 16];
        let clean = expected_counts(&rho, &set, intensity, &bg);
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let noisy: Vec<f64> = clean
            .iter()
            .map(|&m| Poisson::new(m).unwrap().sample(&mut rng))
            .collect();
        let counts = TomographyCounts::new(noisy).with_background(bg);
        let rec = mle_reconstruct(&counts, &set, &MleConfig::default()).unwrap();
        let f = fidelity(&rec.rho, &truth).unwrap();
        assert!(
            f.f_prob > 0.97,
            "declared background: fidelity {}",
            f.f_prob
        );

        // Same counts with the background NOT declared: fidelity drops into
        // the band seen in the reference experiment.
        let counts_blind = TomographyCounts::new(counts.counts.clone());
        let rec_blind = mle_reconstruct(&counts_blind, &set, &MleConfig::default()).unwrap();
        let f_blind = fidelity(&rec_blind.rho, &truth).unwrap();
        assert!(
            (0.88..=0.97).contains(&f_blind.f_prob),
            "undeclared background: fidelity {}",
            f_blind.f_prob
        );
    }

    #[test]
    fn mle_round_trip_random_states_improves_with_intensity() {
        let set = standard();
        let mut rng = ChaCha12Rng::seed_from_u64(100);
        let mut medians = Vec::new();
        for &intensity in &[1e3, 1e4, 1e6] {
            let mut infidelities = Vec::new();
            for _ in 0..8 {
                let truth = random_physical_density::<f64>(&mut rng);
                let clean = expected_counts(&truth, &set, intensity, &[0.0; 16]);
                let noisy: Vec<f64> = clean
                    .iter()
                    .map(|&m| Poisson::new(m.max(1e-9)).unwrap().sample(&mut rng))
                    .collect();
                let rec =
                    mle_reconstruct(&TomographyCounts::new(noisy), &set, &MleConfig::default())
                        .unwrap();
                // State-to-state comparison via Hilbert-Schmidt distance.
                let mut hs = 0.0f64;
                for i in 0..4 {
                    for j in 0..4 {
                        hs += (rec.rho.matrix().m[i][j] - truth.matrix().m[i][j]).norm_sqr();
                    }
                }
                infidelities.push(hs.sqrt());
            }
            infidelities.sort_by(|a, b| a.partial_cmp(b).unwrap());
            medians.push(infidelities[infidelities.len() / 2]);
        }
        assert!(
            medians[0] > medians[1] && medians[1] > medians[2],
            "medians {medians:?} not decreasing"
        );
    }

    #[test]
    fn mle_is_deterministic() {
        let set = standard();
        let rho = DensityMatrix::from_pure(&bell_state::<f64>(BellKind::PhiMinus));
        let counts = TomographyCounts::new(expected_counts(&rho, &set, 1e4, &[0.0; 16]));
        let a = mle_reconstruct(&counts, &set, &MleConfig::default()).unwrap();
        let b = mle_reconstruct(&counts, &set, &MleConfig::default()).unwrap();
        assert_eq!(a.final_nll.to_bits(), b.final_nll.to_bits());
        for (x, y) in a.params.iter().zip(b.params.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn gaussian_likelihood_also_reconstructs() {
        let set = standard();
        let truth = bell_state::<f64>(BellKind::PhiPlus);
        let rho = DensityMatrix::from_pure(&truth);
        let counts = TomographyCounts::new(expected_counts(&rho, &set, 1e5, &[0.0; 16]));
        let rec = mle_reconstruct(
            &counts,
            &set,
            &MleConfig {
                likelihood: LikelihoodModel::Gaussian,
                ..MleConfig::default()
            },
        )
        .unwrap();
        let f = fidelity(&rec.rho, &truth).unwrap();
        assert!(f.f_prob >= 0.999, "fidelity {}", f.f_prob);
    }

    #[test]
    fn custom_rank_deficient_set_is_rejected() {
        let set = standard();
        // 16 copies of the same setting: rank 1.
        let settings: Vec<_> = (0..16).map(|_| set.settings()[0].clone()).collect();
        assert!(matches!(
            ProjectionSet::new(settings),
            Err(Error::RankDeficientProjections { .. })
        ));
    }

    #[test]
    fn fixtures_load_with_expected_structure() {
        for kind in BellKind::ALL {
            let (rho, diag) = reference_density_matrix(kind);
            assert!(rho.is_ingested());
            // Printed rounding keeps traces within 0.03 of 1.
            assert!(
                diag.trace_residual < 0.03,
                "{kind:?} trace residual {}",
                diag.trace_residual
            );
        }
        // The Psi- fixture is openly unphysical (-0.041 diagonal entry).
        let (_, diag) = reference_density_matrix(BellKind::PsiMinus);
        assert!(diag.min_eigenvalue < -0.03);
        // The Phi+ fixture carries a printed Hermiticity typo.
        let (_, diag) = reference_density_matrix(BellKind::PhiPlus);
        assert!(diag.hermiticity_residual > 0.01);
    }

    #[test]
    fn fixture_psi_plus_fidelity_is_0811() {
        let (rho, _) = reference_density_matrix(BellKind::PsiPlus);
        let f = fidelity(&rho, &bell_state(BellKind::PsiPlus)).unwrap();
        // Hand evaluation of the quadratic form on the printed matrix:
        // (0.449 + 0.387)/2 + 0.393 = 0.811.
        assert!((f.f_prob - 0.811).abs() < 0.005, "f_prob {}", f.f_prob);
        assert!((f.f_sqrt - 0.811f64.sqrt()).abs() < 0.005);
    }

    #[test]
    fn fixture_phi_minus_corner_elements() {
        let (rho, _) = reference_density_matrix(BellKind::PhiMinus);
        let m = rho.matrix();
        // canonical corners of the Phi subspace: HV (1) and VH (2)
        assert!((m.m[1][1].re - 0.5).abs() < 1e-12);
        assert!((m.m[2][2].re - 0.409).abs() < 1e-12);
        assert!((m.m[1][2].re + 0.438).abs() < 1e-12);
    }

    #[test]
    fn fixture_dominant_subspace_matches_named_bell_state() {
        // Permutation sanity: the named Bell state must sit inside the
        // top-2 eigenvector subspace of its fixture,
        // <bell| P_top2 |bell> > 0.9. A wrong basis permutation collapses
        // this overlap.
        for kind in BellKind::ALL {
            let (rho, _) = reference_density_matrix(kind);
            let (_, vecs) = rho.eigen();
            let bell = bell_state::<f64>(kind).amplitudes();
            let mut overlap = 0.0f64;
            for v in vecs.iter().rev().take(2) {
                let dot = v
                    .iter()
                    .zip(bell.iter())
                    .fold(C::<f64>::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * *b);
                overlap += dot.norm_sqr();
            }
            assert!(overlap > 0.9, "{kind:?} overlap {overlap}");
        }
    }

    #[test]
    fn fixture_chsh_values_match_reference_band() {
        let expected = [
            (BellKind::PsiPlus, 2.23),
            (BellKind::PsiMinus, 2.19),
            (BellKind::PhiPlus, 2.3),
            (BellKind::PhiMinus, 2.39),
        ];
        for (kind, s_ref) in expected {
            let (rho, _) = reference_density_matrix(kind);
            let out = chsh_max(&rho).unwrap();
            assert!(out.s >= 2.0, "{kind:?}: s = {}", out.s);
            assert!(
                (out.s - s_ref).abs() <= 0.2,
                "{kind:?}: s = {} vs {}",
                out.s,
                s_ref
            );
        }
    }

    #[test]
    fn bootstrap_brackets_point_estimate() {
        let set = standard();
        let truth = bell_state::<f64>(BellKind::PsiPlus);
        let rho = DensityMatrix::from_pure(&truth);
        let clean = expected_counts(&rho, &set, 5e3, &[0.0; 16]);
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let noisy: Vec<f64> = clean
            .iter()
            .map(|&m| Poisson::new(m.max(1e-9)).unwrap().sample(&mut rng))
            .collect();
        let counts = TomographyCounts::new(noisy);
        let config = MleConfig::default();
        let rec = mle_reconstruct(&counts, &set, &config).unwrap();
        let f0 = fidelity(&rec.rho, &truth).unwrap().f_prob;
        let boot = bootstrap_uncertainty(&rec, &counts, &set, &config, &truth, 40, 5).unwrap();
        let (lo, med, hi) = boot.fidelity_prob;
        assert!(lo <= med && med <= hi);
        assert!(
            lo <= f0 + 0.02 && hi >= f0 - 0.02,
            "({lo}, {med}, {hi}) vs {f0}"
        );
        let (slo, _, shi) = boot.chsh_s;
        assert!(slo > 2.0 && shi <= 2.0 * 2.0f64.sqrt() + 1e-6);
    }
}
