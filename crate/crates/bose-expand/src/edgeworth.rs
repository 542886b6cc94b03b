//! Fluctuation expansion for symmetrized one-body observables: the
//! Gaussian width σ from the rotated excitation vector ν, the first
//! Edgeworth polynomial p₁(x) = α/(6σ³)·H₃(x/σ) with H₃(x) = x³ − 3x,
//! the i.i.d. baseline, and smoothed expectation/characteristic-function
//! predictions compared against the exact oracle.
//!
//! α has no closed form here; it is estimated, with an error bar, either
//! from the oracle third-cumulant curve or from the perturbative state
//! χ₀ + N^{-1/2}χ₁, and the two estimates must agree.

use crate::bogoliubov::BogoliubovMap;
use crate::error::{Error, Result};
use crate::fock::ExcitationBasis;
use crate::ladder::{annihilate, create, DecoratedMonomial, Monomial, SectorFactor};
use crate::model::CutoffModel;
use crate::util::{integrate, linear_fit, norm2};
use num_complex::Complex64;

/// Built-in one-body observables on mode space (real symmetric matrices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableKind {
    /// Multiplication by cos(2πx₁): hops one momentum unit, weight ½.
    Hopping,
    /// cos(2πx₁) + cos(4πx₁): hops one and two units, weight ½ each.
    HoppingTwo,
    /// Projector onto the condensate mode.
    CondensateProjector,
}

impl ObservableKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "hopping" => Ok(ObservableKind::Hopping),
            "hopping2" => Ok(ObservableKind::HoppingTwo),
            "condensate-projector" => Ok(ObservableKind::CondensateProjector),
            other => Err(Error::Config(format!("unknown observable \"{other}\""))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObservableKind::Hopping => "hopping",
            ObservableKind::HoppingTwo => "hopping2",
            ObservableKind::CondensateProjector => "condensate-projector",
        }
    }

    /// The matrix on mode space, truncated to the mode set.
    pub fn matrix(&self, modes: &crate::model::ModeSet) -> nalgebra::DMatrix<f64> {
        let m = modes.len();
        let mut b = nalgebra::DMatrix::<f64>::zeros(m, m);
        match self {
            ObservableKind::CondensateProjector => {
                b[(modes.zero_index(), modes.zero_index())] = 1.0;
            }
            ObservableKind::Hopping | ObservableKind::HoppingTwo => {
                let hops: &[i32] = match self {
                    ObservableKind::Hopping => &[1],
                    _ => &[1, 2],
                };
                for p in 0..m {
                    let n = modes.mode(p);
                    for &h in hops {
                        for sgn in [-1, 1] {
                            let t = [n[0] + sgn * h, n[1], n[2]];
                            if let Some(q) = modes.index_of(&t) {
                                b[(q, p)] += 0.5;
                            }
                        }
                    }
                }
            }
        }
        b
    }
}

/// One-body observable with its excitation vector w = qBφ and the rotated
/// vector ν, for the homogeneous condensate.
#[derive(Debug, Clone)]
pub struct FluctuationObservable {
    pub b: nalgebra::DMatrix<f64>,
    /// (qBφ)(p) over nonzero-mode positions.
    pub w: Vec<f64>,
    /// ν(p) = u_p w(p) − v_p w(−p) in this crate's sign convention.
    pub nu: Vec<f64>,
    pub sigma: f64,
}

/// `compute_nu_sigma` for a hermitian B on mode space.
pub fn compute_nu_sigma(
    b: &nalgebra::DMatrix<f64>,
    model: &CutoffModel,
    map: &BogoliubovMap,
) -> Result<FluctuationObservable> {
    let defect = (b - b.transpose()).abs().max();
    if defect > 1e-12 {
        return Err(Error::NonHermitian { defect });
    }
    let z = model.modes.zero_index();
    let w: Vec<f64> = map.mode_ids.iter().map(|&id| b[(id, z)]).collect();
    let nu: Vec<f64> = (0..w.len())
        .map(|p| map.u[p] * w[p] - map.v[p] * w[map.negation[p]])
        .collect();
    let sigma = norm2(&nu);
    Ok(FluctuationObservable {
        b: b.clone(),
        w,
        nu,
        sigma,
    })
}

/// `iid_baseline`: σ_iid = √(⟨φ,B²φ⟩ − ⟨φ,Bφ⟩²) for the condensate mode.
pub fn iid_baseline(b: &nalgebra::DMatrix<f64>, model: &CutoffModel) -> f64 {
    let z = model.modes.zero_index();
    let m = model.modes.len();
    let b2: f64 = (0..m).map(|p| b[(p, z)] * b[(p, z)]).sum();
    let b1 = b[(z, z)];
    (b2 - b1 * b1).max(0.0).sqrt()
}

/// Admissible test functions for smoothed expectations.
#[derive(Debug, Clone)]
pub enum TestFunction {
    /// g(x) = e^{-x²/2} cos(ωx)
    GaussCos { omega: f64 },
    /// g(x) = x^power · e^{-x²/2}, power ≤ 8
    WindowedMoment { power: u32 },
    /// User table with linear interpolation, zero outside; `decay` is the
    /// declared tail bound (must be finite and positive).
    Table {
        xs: Vec<f64>,
        ys: Vec<f64>,
        decay: f64,
    },
}

impl TestFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            TestFunction::GaussCos { omega } => {
                if !omega.is_finite() {
                    return Err(Error::BadTestFunction("ω must be finite".into()));
                }
            }
            TestFunction::WindowedMoment { power } => {
                if *power > 8 {
                    return Err(Error::BadTestFunction(
                        "windowed moments limited to power ≤ 8".into(),
                    ));
                }
            }
            TestFunction::Table { xs, ys, decay } => {
                if xs.len() != ys.len() || xs.len() < 2 {
                    return Err(Error::BadTestFunction("table needs ≥ 2 points".into()));
                }
                if !xs.windows(2).all(|w| w[1] > w[0]) {
                    return Err(Error::BadTestFunction("table x must increase".into()));
                }
                if !(decay.is_finite() && *decay > 0.0) {
                    return Err(Error::BadTestFunction("declared decay must be > 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::GaussCos { omega } => (-0.5 * x * x).exp() * (omega * x).cos(),
            TestFunction::WindowedMoment { power } => {
                x.powi(*power as i32) * (-0.5 * x * x).exp()
            }
            TestFunction::Table { xs, ys, .. } => {
                if x < xs[0] || x > *xs.last().unwrap() {
                    return 0.0;
                }
                let i = xs.partition_point(|&t| t < x).min(xs.len() - 1).max(1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let t = (x - x0) / (x1 - x0);
                ys[i - 1] * (1.0 - t) + ys[i] * t
            }
        }
    }
}

/// Edgeworth prediction data: σ and the estimated α.
#[derive(Debug, Clone, Copy)]
pub struct EdgeworthPrediction {
    pub sigma: f64,
    pub alpha: f64,
    pub alpha_error: f64,
    pub sigma_iid: f64,
}

pub fn hermite3(x: f64) -> f64 {
    x * x * x - 3.0 * x
}

/// p₁(x) = α/(6σ³) · H₃(x/σ).
pub fn p1(x: f64, sigma: f64, alpha: f64) -> f64 {
    alpha / (6.0 * sigma.powi(3)) * hermite3(x / sigma)
}

/// `predict_expectation`: Σ_{j≤order} N^{-j/2} ∫ g(x) p_j(x) 𝒩(0,σ²) dx.
pub fn predict_expectation(
    g: &TestFunction,
    pred: &EdgeworthPrediction,
    order: u32,
    n_particles: usize,
) -> Result<f64> {
    g.validate()?;
    if pred.sigma <= 0.0 {
        return Err(Error::DegenerateObservable);
    }
    let sigma = pred.sigma;
    let cut = 10.0 * sigma.max(1.0) + 10.0;
    let gauss = move |x: f64| {
        (-0.5 * x * x / (sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let order0 = integrate(&|x| g.eval(x) * gauss(x), -cut, cut, 1e-12);
    if order == 0 {
        return Ok(order0);
    }
    let alpha = pred.alpha;
    let order1 = integrate(
        &|x| g.eval(x) * p1(x, sigma, alpha) * gauss(x),
        -cut,
        cut,
        1e-12,
    );
    Ok(order0 + order1 / (n_particles as f64).sqrt())
}

/// `characteristic_prediction`: e^{-σ²k²/2}, plus the N^{-1/2} image of
/// the p₁ term at order ≥ 1.
pub fn characteristic_prediction(
    k: f64,
    pred: &EdgeworthPrediction,
    order: u32,
    n_particles: usize,
) -> Complex64 {
    let gauss = (-0.5 * pred.sigma * pred.sigma * k * k).exp();
    let mut out = Complex64::new(gauss, 0.0);
    if order >= 1 {
        let ik = Complex64::new(0.0, k);
        out += ik * ik * ik * (pred.alpha / 6.0) * gauss / (n_particles as f64).sqrt();
    }
    out
}

#[derive(Debug, Clone)]
pub struct AlphaEstimate {
    pub value: f64,
    pub error: f64,
    /// (N, √N·κ₃) points behind the fit.
    pub points: Vec<(f64, f64)>,
}

impl AlphaEstimate {
    pub fn agrees_with(&self, other: &AlphaEstimate) -> bool {
        (self.value - other.value).abs() <= self.error + other.error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaStrategy {
    OracleExtrapolation,
    Chi1Perturbative,
}

impl AlphaStrategy {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "oracle_extrapolation" => Ok(AlphaStrategy::OracleExtrapolation),
            "chi1_perturbative" => Ok(AlphaStrategy::Chi1Perturbative),
            other => Err(Error::Config(format!("unknown α strategy \"{other}\""))),
        }
    }
}

/// Fit y(N) = α + c/N + d/N² to the rescaled third cumulants; the error
/// bar combines the least-squares uncertainty of the intercept with a
/// window-stability probe (refit on the upper half, and on the linear
/// model, taking the worst drift).
pub fn fit_alpha(points: &[(f64, f64)]) -> Result<AlphaEstimate> {
    if points.len() < 4 {
        return Err(Error::Extrapolation(format!(
            "α fit needs ≥ 4 points, got {}",
            points.len()
        )));
    }
    // weighted-least-squares intercept for y = Σ_j c_j x^j, x = 1/N
    let poly_intercept = |pts: &[(f64, f64)], degree: usize| -> (f64, f64) {
        let k = degree + 1;
        let mut ata = nalgebra::DMatrix::<f64>::zeros(k, k);
        let mut aty = nalgebra::DVector::<f64>::zeros(k);
        for &(n, y) in pts {
            let x = 1.0 / n;
            let row: Vec<f64> = (0..k).map(|j| x.powi(j as i32)).collect();
            for a in 0..k {
                for b in 0..k {
                    ata[(a, b)] += row[a] * row[b];
                }
                aty[a] += row[a] * y;
            }
        }
        let inv = ata.clone().try_inverse().expect("fit system invertible");
        let coef = &inv * &aty;
        let ss: f64 = pts
            .iter()
            .map(|&(n, y)| {
                let x = 1.0 / n;
                let fit: f64 = (0..k).map(|j| coef[j] * x.powi(j as i32)).sum();
                (y - fit) * (y - fit)
            })
            .sum();
        let dof = (pts.len().max(k + 1) - k) as f64;
        let se = (ss / dof * inv[(0, 0)]).sqrt();
        (coef[0], se)
    };
    let degree = if points.len() >= 6 { 2 } else { 1 };
    let (value, se) = poly_intercept(points, degree);
    // stability probes: upper-half window, and the lower-degree model
    let half = &points[points.len() / 2..];
    let mut drift: f64 = 0.0;
    if half.len() >= 4 {
        let (ic, _) = poly_intercept(half, 1.min(degree));
        drift = drift.max((ic - value).abs());
    }
    if degree == 2 {
        let tail = &points[points.len().saturating_sub(5)..];
        let (ic, _) = poly_intercept(tail, 1);
        drift = drift.max(0.5 * (ic - value).abs());
    }
    let error = (2.0 * se).max(drift).max(1e-12 + 1e-6 * value.abs());
    if !value.is_finite() {
        return Err(Error::Extrapolation("α fit diverged".into()));
    }
    Ok(AlphaEstimate {
        value,
        error,
        points: points.to_vec(),
    })
}

/// Oracle strategy: exact κ₃[B_N] per N from the ground state.
pub fn estimate_alpha_oracle(
    template: &CutoffModel,
    b: &nalgebra::DMatrix<f64>,
    n_list: &[usize],
    sigma: f64,
    tol: f64,
    seed: u64,
    workers: usize,
) -> Result<AlphaEstimate> {
    if sigma <= 0.0 {
        return Err(Error::DegenerateObservable);
    }
    let pts = crate::util::parallel_map(n_list.len(), workers, |i| -> Result<(f64, f64)> {
        let n = n_list[i];
        let model = template.with_n(n)?;
        let basis = crate::fock::enumerate_basis(model.modes.len(), n)?;
        let h = crate::fock::assemble_hamiltonian(&model, &basis)?;
        let (_, psi) =
            crate::oracle::ground_state(&h, tol, crate::oracle::DEFAULT_GS_MAX_ITER, seed)?;
        let stats = crate::oracle::observable_statistics(&psi, b, &basis, n)?;
        Ok((n as f64, (n as f64).sqrt() * stats.kappa[2]))
    });
    let pts: Result<Vec<_>> = pts.into_iter().collect();
    fit_alpha(&pts?)
}

/// The conjugated observable dΓ(B) on the excitation space, with its exact
/// condensate factors, as sector-decorated monomials.
pub fn conjugated_one_body(
    b: &nalgebra::DMatrix<f64>,
    model: &CutoffModel,
) -> Vec<DecoratedMonomial> {
    let ids = model.modes.nonzero_indices();
    let z = model.modes.zero_index();
    let mut out = Vec::new();
    let b00 = b[(z, z)];
    if b00 != 0.0 {
        out.push(DecoratedMonomial {
            mono: Monomial::new(b00, vec![]),
            factor: SectorFactor::Condensate,
        });
    }
    for (pos, &id) in ids.iter().enumerate() {
        let w = b[(id, z)];
        if w != 0.0 {
            out.push(DecoratedMonomial {
                mono: Monomial::new(w, vec![create(pos)]),
                factor: SectorFactor::SqrtCondensate,
            });
            out.push(DecoratedMonomial {
                mono: Monomial::new(w, vec![annihilate(pos)]),
                factor: SectorFactor::SqrtCondensateOut,
            });
        }
        for (qos, &qid) in ids.iter().enumerate() {
            let bpq = b[(id, qid)];
            if bpq != 0.0 {
                out.push(DecoratedMonomial {
                    mono: Monomial::new(bpq, vec![create(pos), annihilate(qos)]),
                    factor: SectorFactor::One,
                });
            }
        }
    }
    out
}

/// Perturbative strategy: third central moment of the exactly-conjugated
/// observable in the state χ₀ + N^{-1/2}χ₁, over a wide N window. The
/// N-dependence of the observable is kept exact; only the state is
/// perturbative, so the fitted intercept isolates the χ₀/χ₁ cross term.
pub fn estimate_alpha_perturbative(
    template: &CutoffModel,
    b: &nalgebra::DMatrix<f64>,
    n_list: &[usize],
    sigma: f64,
) -> Result<AlphaEstimate> {
    if sigma <= 0.0 {
        return Err(Error::DegenerateObservable);
    }
    let hartree = crate::hartree::minimize_hartree_torus(template);
    let h0 = crate::bogoliubov::assemble_h0(template, &hartree)?;
    let map = crate::bogoliubov::diagonalize(&h0, template)?;
    let k_state = 12usize;
    let basis = ExcitationBasis::new(&template.modes, k_state + 3);
    let chi0 = crate::bogoliubov::chi0_state(&map, &basis, 1e-8)?;
    let h1 = crate::perturbation::assemble_h1(template);
    let chi1 = crate::perturbation::compute_chi1(&map, &h1, &template.modes)?;
    let chi1_lab = crate::perturbation::chi1_lab(&chi1, &map, &basis);
    let monos = conjugated_one_body(b, template);
    let mut pts = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let nf = n as f64;
        let mut state: Vec<f64> = chi0
            .coeffs
            .iter()
            .zip(&chi1_lab)
            .map(|(a, b)| a + b / nf.sqrt())
            .collect();
        let ns = norm2(&state);
        state.iter_mut().for_each(|x| *x /= ns);
        let apply = |x: &[f64]| crate::ladder::apply_decorated(&monos, &basis, x, n);
        let m1 = crate::util::dot(&state, &apply(&state));
        let shifted = |x: &[f64]| -> Vec<f64> {
            let mut y = apply(x);
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi -= m1 * xi;
            }
            y
        };
        let w1 = shifted(&state);
        let w2 = shifted(&w1);
        let mu3 = crate::util::dot(&w1, &w2);
        // √N · κ₃[B_N] = μ₃ / N
        pts.push((nf, mu3 / nf));
    }
    fit_alpha(&pts)
}

/// Default N window for the perturbative strategy (cheap: the basis is
/// N-independent).
pub const PERTURBATIVE_ALPHA_WINDOW: [usize; 6] = [48, 64, 96, 128, 192, 256];

/// `estimate_alpha` dispatch.
pub fn estimate_alpha(
    template: &CutoffModel,
    kind: ObservableKind,
    strategy: AlphaStrategy,
    n_list: &[usize],
    tol: f64,
    seed: u64,
    workers: usize,
) -> Result<AlphaEstimate> {
    let b = kind.matrix(&template.modes);
    let hartree = crate::hartree::minimize_hartree_torus(template);
    let h0 = crate::bogoliubov::assemble_h0(template, &hartree)?;
    let map = crate::bogoliubov::diagonalize(&h0, template)?;
    let obs = compute_nu_sigma(&b, template, &map)?;
    match strategy {
        AlphaStrategy::OracleExtrapolation => {
            estimate_alpha_oracle(template, &b, n_list, obs.sigma, tol, seed, workers)
        }
        AlphaStrategy::Chi1Perturbative => {
            estimate_alpha_perturbative(template, &b, &PERTURBATIVE_ALPHA_WINDOW, obs.sigma)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::{assemble_h0, diagonalize};
    use crate::hartree::minimize_hartree_torus;

    fn setup(cutoff: i32, vhat: f64) -> (CutoffModel, BogoliubovMap) {
        let model = CutoffModel::benchmark(cutoff, vhat, 12).unwrap();
        let hartree = minimize_hartree_torus(&model);
        let h0 = assemble_h0(&model, &hartree).unwrap();
        let map = diagonalize(&h0, &model).unwrap();
        (model, map)
    }

    #[test]
    fn degenerate_observables_have_zero_sigma() {
        let (model, map) = setup(1, 1.0);
        let identity = nalgebra::DMatrix::<f64>::identity(3, 3);
        let obs = compute_nu_sigma(&identity, &model, &map).unwrap();
        assert_eq!(obs.sigma, 0.0);
        let proj = ObservableKind::CondensateProjector.matrix(&model.modes);
        let obs2 = compute_nu_sigma(&proj, &model, &map).unwrap();
        assert_eq!(obs2.sigma, 0.0);
        assert!(iid_baseline(&identity, &model).abs() < 1e-15);
    }

    #[test]
    fn free_gas_sigma_equals_iid() {
        let modes = crate::model::build_mode_set(1, 2).unwrap();
        let model = CutoffModel::new(modes, crate::model::PairPotential::zero(1, 4), 12).unwrap();
        let hartree = minimize_hartree_torus(&model);
        let map = diagonalize(&assemble_h0(&model, &hartree).unwrap(), &model).unwrap();
        for kind in [ObservableKind::Hopping, ObservableKind::HoppingTwo] {
            let b = kind.matrix(&model.modes);
            let obs = compute_nu_sigma(&b, &model, &map).unwrap();
            let iid = iid_baseline(&b, &model);
            assert!(
                (obs.sigma - iid).abs() < 1e-14,
                "{}: σ {} vs iid {}",
                kind.name(),
                obs.sigma,
                iid
            );
        }
    }

    #[test]
    fn hopping_baseline_is_half() {
        let (model, _) = setup(1, 1.0);
        let b = ObservableKind::Hopping.matrix(&model.modes);
        let iid = iid_baseline(&b, &model);
        assert!((iid * iid - 0.5).abs() < 1e-14);
        // projector onto a nonzero mode sees no condensate weight
        let mut proj = nalgebra::DMatrix::<f64>::zeros(3, 3);
        proj[(2, 2)] = 1.0;
        assert_eq!(iid_baseline(&proj, &model), 0.0);
    }

    #[test]
    fn interacting_sigma_is_suppressed() {
        // repulsion anticorrelates ± pairs, damping density-type spread
        let (model, map) = setup(2, 1.0);
        let b = ObservableKind::HoppingTwo.matrix(&model.modes);
        let obs = compute_nu_sigma(&b, &model, &map).unwrap();
        let iid = iid_baseline(&b, &model);
        assert!(obs.sigma > 0.0 && obs.sigma < iid);
        // per-mode form: σ² = ¼ Σ_{hops} (u − v)² over the two ± modes
        let mut expect = 0.0;
        for p in 0..map.u.len() {
            if obs.w[p] != 0.0 {
                expect += (map.u[p] * obs.w[p] - map.v[p] * obs.w[map.negation[p]]).powi(2);
            }
        }
        assert!((obs.sigma * obs.sigma - expect).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral_closed_form() {
        let pred = EdgeworthPrediction {
            sigma: 1.3,
            alpha: 0.0,
            alpha_error: 0.0,
            sigma_iid: 0.0,
        };
        let g = TestFunction::GaussCos { omega: 0.0 };
        let v = predict_expectation(&g, &pred, 0, 10).unwrap();
        let expect = 1.0 / (1.0 + pred.sigma * pred.sigma).sqrt();
        assert!((v - expect).abs() < 1e-10);
    }

    #[test]
    fn even_g_orders_coincide_and_p1_integrates_to_zero() {
        let pred = EdgeworthPrediction {
            sigma: 0.9,
            alpha: 1.7,
            alpha_error: 0.0,
            sigma_iid: 0.0,
        };
        let g = TestFunction::GaussCos { omega: 2.0 };
        let v0 = predict_expectation(&g, &pred, 0, 12).unwrap();
        let v1 = predict_expectation(&g, &pred, 1, 12).unwrap();
        assert!((v0 - v1).abs() < 1e-10);
        // ∫ p₁ 𝒩 = 0: constant test function sees no order-1 shift
        let one = TestFunction::Table {
            xs: vec![-100.0, 100.0],
            ys: vec![1.0, 1.0],
            decay: 1.0,
        };
        let z0 = predict_expectation(&one, &pred, 0, 12).unwrap();
        let z1 = predict_expectation(&one, &pred, 1, 12).unwrap();
        assert!((z0 - 1.0).abs() < 1e-9);
        assert!((z1 - z0).abs() < 1e-10);
    }

    #[test]
    fn cubed_window_picks_up_alpha() {
        // moment identity ∫ H₃(x/σ) x³ 𝒩(0,σ²) dx = 6σ³: the pure cubic
        // moment's first correction is exactly α/√N
        let sigma = 1.1;
        let alpha = 0.8;
        let gauss = |x: f64| {
            (-0.5 * x * x / (sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        };
        let v = integrate(
            &|x: f64| x.powi(3) * p1(x, sigma, alpha) * gauss(x),
            -40.0,
            40.0,
            1e-12,
        );
        assert!((v - alpha).abs() < 1e-9, "moment identity {v}");
    }

    #[test]
    fn characteristic_prediction_limits() {
        let pred = EdgeworthPrediction {
            sigma: 1.0,
            alpha: 0.5,
            alpha_error: 0.0,
            sigma_iid: 0.0,
        };
        assert!((characteristic_prediction(0.0, &pred, 1, 10).re - 1.0).abs() < 1e-15);
        let degenerate = EdgeworthPrediction {
            sigma: 0.0,
            alpha: 0.0,
            alpha_error: 0.0,
            sigma_iid: 0.0,
        };
        for k in [0.3, 1.0, 4.0] {
            let c = characteristic_prediction(k, &degenerate, 1, 10);
            assert!((c.re - 1.0).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
        // order-1 term is purely imaginary at real k
        let c1 = characteristic_prediction(1.0, &pred, 1, 16);
        let c0 = characteristic_prediction(1.0, &pred, 0, 16);
        assert!((c1.re - c0.re).abs() < 1e-15);
        assert!(c1.im.abs() > 0.0);
    }

    #[test]
    fn inadmissible_test_functions_rejected() {
        assert!(TestFunction::WindowedMoment { power: 9 }.validate().is_err());
        assert!(TestFunction::Table {
            xs: vec![0.0],
            ys: vec![1.0],
            decay: 1.0
        }
        .validate()
        .is_err());
        assert!(TestFunction::Table {
            xs: vec![0.0, 1.0],
            ys: vec![1.0, 1.0],
            decay: 0.0
        }
        .validate()
        .is_err());
    }

    /// v = 0: the gas is an exact product state, √N·κ₃ is N-independent
    /// and equals ⟨φ, B̃³φ⟩ of the truncated one-body matrix (¾ for the
    /// two-harmonic observable at K = 2: six three-hop loops of weight ⅛).
    #[test]
    fn alpha_free_gas_matches_iid_cumulant() {
        let modes = crate::model::build_mode_set(1, 2).unwrap();
        let model = CutoffModel::new(modes, crate::model::PairPotential::zero(1, 4), 8).unwrap();
        let b = ObservableKind::HoppingTwo.matrix(&model.modes);
        let z = model.modes.zero_index();
        let b1 = b[(z, z)];
        let b2 = &b * &b;
        let b3 = &b2 * &b;
        let direct = b3[(z, z)] - 3.0 * b2[(z, z)] * b1 + 2.0 * b1 * b1 * b1;
        assert!((direct - 0.75).abs() < 1e-14);
        let est = estimate_alpha_oracle(&model, &b, &[6, 8, 10, 12], 1.0, 1e-11, 42, 2).unwrap();
        assert!(
            (est.value - direct).abs() <= est.error.max(1e-7),
            "oracle α {} vs direct {}",
            est.value,
            direct
        );
        let pert =
            estimate_alpha_perturbative(&model, &b, &[48, 64, 96, 128, 192, 256], 1.0).unwrap();
        assert!(
            (pert.value - direct).abs() <= pert.error.max(1e-7),
            "perturbative α {} vs direct {}",
            pert.value,
            direct
        );
    }

    /// An observable odd under p ↦ −p leaves all odd moments at zero.
    #[test]
    fn alpha_vanishes_for_odd_observable() {
        let model = CutoffModel::benchmark(2, 1.0, 8).unwrap();
        let m = model.modes.len();
        let mut b = nalgebra::DMatrix::<f64>::zeros(m, m);
        for p in 0..m {
            b[(p, p)] = model.modes.mode(p)[0] as f64;
        }
        let est = estimate_alpha_oracle(&model, &b, &[6, 8, 10, 12], 1.0, 1e-11, 42, 2).unwrap();
        assert!(est.value.abs() < 1e-8, "odd observable α {}", est.value);
    }
}
