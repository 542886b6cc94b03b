//! Quench dynamics: split-step condensate propagation, per-mode 2×2
//! Bogoliubov flows, the first-order excitation correction χ₁(t) through
//! the Duhamel integral on the truncated excitation space, and norm-error
//! measurement against exact Krylov evolution.
//!
//! Protocol: prepare the interacting ground state for the pre-quench
//! potential, evolve under the post-quench one. On the homogeneous torus
//! the condensate is stationary in the mean-field gauge, the quadratic
//! layer reduces to one 2×2 system per mode pair, and the exact N-body
//! evolution stays within oracle reach.

use crate::bogoliubov::{BogoliubovMap, QuadraticHamiltonian};
use crate::error::{Error, Result};
use crate::fock::ExcitationBasis;
use crate::model::CutoffModel;
use num_complex::Complex64;
use rustfft::FftPlanner;

type C64 = Complex64;

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn cnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Condensate trajectory on the torus mode set.
#[derive(Debug, Clone)]
pub struct CondensateTrajectory {
    pub times: Vec<f64>,
    /// Mode amplitudes at each recorded time.
    pub phis: Vec<Vec<C64>>,
    /// Gauge μ(t) = ⟨φ, (v∗|φ|²)φ⟩ (interaction mean field).
    pub mus: Vec<f64>,
    pub mass_drift: f64,
    pub energy_drift: f64,
}


/// `evolve_hartree`: Strang splitting — spectral kinetic half step,
/// pointwise nonlinear phase on an oversampled grid, kinetic half step —
/// with the result projected back to the mode set each step. Only d = 1
/// trajectories are propagated here (the quench benchmark is 1-d).
pub fn evolve_hartree(
    phi0: &[C64],
    model: &CutoffModel,
    t_final: f64,
    dt: f64,
    records: usize,
) -> Result<CondensateTrajectory> {
    if model.modes.dim != 1 {
        return Err(Error::Unsupported(
            "condensate propagation is implemented in d = 1".into(),
        ));
    }
    let norm0 = cnorm(phi0);
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized { norm: norm0 });
    }
    let m = model.modes.len();
    let kk = model.modes.cutoff;
    let grid = (4 * (2 * kk + 1) as usize).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(grid);
    let ifft = planner.plan_fft_inverse(grid);

    let steps = (t_final / dt).ceil().max(1.0) as usize;
    let dt = t_final / steps as f64;
    let record_every = (steps / records.max(1)).max(1);

    let bin_of = |n: i32| -> usize { ((n + grid as i32) % grid as i32) as usize };
    let freq_of = |bin: usize| -> i32 {
        if bin <= grid / 2 {
            bin as i32
        } else {
            bin as i32 - grid as i32
        }
    };
    // the state lives on the full spectral grid; the mode set provides the
    // initial data and the support of v̂
    let mut hat = vec![czero(); grid];
    for p in 0..m {
        hat[bin_of(model.modes.mode(p)[0])] += phi0[p];
    }
    let read_modes = |hat: &[C64]| -> Vec<C64> {
        (0..m).map(|p| hat[bin_of(model.modes.mode(p)[0])]).collect()
    };

    let w2pi = crate::model::TWO_PI * crate::model::TWO_PI;
    // conserved quantities of the grid field: total mass, and kinetic +
    // v̂-windowed interaction energy
    let grid_invariants = |hat: &[C64]| -> (f64, f64, f64) {
        let mass: f64 = hat.iter().map(|z| z.norm_sqr()).sum();
        let mut kin = 0.0;
        for (bin, h) in hat.iter().enumerate() {
            let n = freq_of(bin) as f64;
            kin += w2pi * n * n * h.norm_sqr();
        }
        let mut inter = 0.0;
        let mut mu = 0.0;
        for n in -(2 * kk)..=(2 * kk) {
            let v = model.potential.vhat(&[n, 0, 0]);
            if v == 0.0 {
                continue;
            }
            let mut rho = czero();
            for (bin, h) in hat.iter().enumerate() {
                if h.norm_sqr() == 0.0 {
                    continue;
                }
                let shifted = bin_of(freq_of(bin) + n);
                rho += h.conj() * hat[shifted];
            }
            inter += 0.5 * v * rho.norm_sqr();
            mu += v * rho.norm_sqr();
        }
        (mass, kin + inter, mu)
    };
    let (mass0, energy0, mu0) = grid_invariants(&hat);
    let mut times = vec![0.0];
    let mut phis = vec![phi0.to_vec()];
    let mut mus = vec![mu0];
    let mut mass_drift: f64 = 0.0;
    let mut energy_drift: f64 = 0.0;
    let half_kinetic = |hat: &mut [C64], dt: f64| {
        for (bin, h) in hat.iter_mut().enumerate() {
            let n = freq_of(bin) as f64;
            *h *= C64::new(0.0, -0.5 * w2pi * n * n * dt).exp();
        }
    };
    let r = 2 * kk;
    for step in 1..=steps {
        half_kinetic(&mut hat, dt);
        // nonlinear phase pointwise on the grid
        let mut field = hat.clone();
        ifft.process(&mut field); // x-samples (unnormalized inverse)
        let mut rho: Vec<C64> = field.iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect();
        fft.process(&mut rho);
        let scale = 1.0 / grid as f64;
        let mut w_modes = vec![czero(); grid];
        let mut mu = 0.0;
        for n in -r..=r {
            let v = model.potential.vhat(&[n, 0, 0]);
            if v != 0.0 {
                let rn = rho[bin_of(n)] * scale;
                w_modes[bin_of(n)] = rn * v;
                mu += v * rn.norm_sqr();
            }
        }
        ifft.process(&mut w_modes); // W at x-samples, real up to roundoff
        for (f, w) in field.iter_mut().zip(&w_modes) {
            *f *= C64::new(0.0, -(w.re - mu) * dt).exp();
        }
        fft.process(&mut field);
        for (h, f) in hat.iter_mut().zip(&field) {
            *h = f * scale;
        }
        half_kinetic(&mut hat, dt);

        if step % record_every == 0 || step == steps {
            let snapshot = read_modes(&hat);
            let (mass, energy, mu_now) = grid_invariants(&hat);
            mass_drift = mass_drift.max((mass - mass0).abs());
            energy_drift = energy_drift.max((energy - energy0).abs());
            times.push(step as f64 * dt);
            phis.push(snapshot);
            mus.push(mu_now);
        }
    }
    let span = t_final.max(1e-12);
    Ok(CondensateTrajectory {
        times,
        phis,
        mus,
        mass_drift: mass_drift / span,
        energy_drift: energy_drift / span,
    })
}

/// Per-mode 2×2 Bogoliubov flow: dw/dt = i·[[A', B'], [−B', −A']]·w from
/// w(0) = (u_p, v_p) of the pre-quench map, integrated with RK4. The
/// symplectic defect max |(|u|² − |v|²) − 1| is logged.
#[derive(Debug, Clone)]
pub struct ModePropagator {
    pub times: Vec<f64>,
    /// u[t][mode], v[t][mode].
    pub u: Vec<Vec<C64>>,
    pub v: Vec<Vec<C64>>,
    pub defect_max: f64,
}

impl ModePropagator {
    pub fn pair_amplitude(&self, t_idx: usize, mode: usize) -> C64 {
        -self.v[t_idx][mode] / self.u[t_idx][mode]
    }

    pub fn final_uv(&self) -> (&[C64], &[C64]) {
        (
            self.u.last().expect("recorded"),
            self.v.last().expect("recorded"),
        )
    }
}

pub fn evolve_bogoliubov(
    map0: &BogoliubovMap,
    post: &QuadraticHamiltonian,
    t_final: f64,
    dt: f64,
    records: usize,
) -> Result<ModePropagator> {
    let m = map0.u.len();
    let steps = (t_final / dt).ceil().max(1.0) as usize;
    let dt = t_final / steps as f64;
    let record_every = (steps / records.max(1)).max(1);
    // fundamental solution (f, s) from (1, 0); the moving-frame pair is
    // u(t) = u₀f + v₀s, v(t) = conj(v₀f + u₀s), which keeps the no-quench
    // squeezed state stationary up to the e^{iεt} quasiparticle phase
    let mut f: Vec<C64> = vec![C64::new(1.0, 0.0); m];
    let mut s: Vec<C64> = vec![czero(); m];
    let assemble = |f: &[C64], s: &[C64]| -> (Vec<C64>, Vec<C64>) {
        let u: Vec<C64> = (0..m).map(|p| map0.u[p] * f[p] + map0.v[p] * s[p]).collect();
        let v: Vec<C64> = (0..m)
            .map(|p| (map0.v[p] * f[p] + map0.u[p] * s[p]).conj())
            .collect();
        (u, v)
    };
    let (u0, v0) = assemble(&f, &s);
    let mut out = ModePropagator {
        times: vec![0.0],
        u: vec![u0],
        v: vec![v0],
        defect_max: 0.0,
    };
    let deriv = |a: f64, b: f64, w: (C64, C64)| -> (C64, C64) {
        let i = C64::new(0.0, 1.0);
        (i * (a * w.0 + b * w.1), i * (-b * w.0 - a * w.1))
    };
    for step in 1..=steps {
        for p in 0..m {
            let (a, b) = (post.a[p], post.b[p]);
            let w = (f[p], s[p]);
            let k1 = deriv(a, b, w);
            let w2 = (w.0 + 0.5 * dt * k1.0, w.1 + 0.5 * dt * k1.1);
            let k2 = deriv(a, b, w2);
            let w3 = (w.0 + 0.5 * dt * k2.0, w.1 + 0.5 * dt * k2.1);
            let k3 = deriv(a, b, w3);
            let w4 = (w.0 + dt * k3.0, w.1 + dt * k3.1);
            let k4 = deriv(a, b, w4);
            f[p] = w.0 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            s[p] = w.1 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        if step % record_every == 0 || step == steps {
            let (u, v) = assemble(&f, &s);
            let defect = (0..m)
                .map(|p| ((u[p].norm_sqr() - v[p].norm_sqr()) - 1.0).abs())
                .fold(0.0, f64::max);
            out.defect_max = out.defect_max.max(defect);
            out.times.push(step as f64 * dt);
            out.u.push(u);
            out.v.push(v);
        }
    }
    if out.defect_max > 1e-6 {
        return Err(Error::StepSize(format!(
            "symplectic defect {:.3e} above 1e-6; reduce dt",
            out.defect_max
        )));
    }
    Ok(out)
}

/// Closed-form propagator for a constant generator: G² = ε²·1 gives
/// e^{iGt} = cos(εt)·1 + i sin(εt)/ε·G (test oracle for the RK4 path).
pub fn propagate_pair_exact(a: f64, b: f64, w0: (C64, C64), t: f64) -> (C64, C64) {
    let eps = (a * a - b * b).sqrt();
    let (c, s) = ((eps * t).cos(), (eps * t).sin() / eps);
    let i = C64::new(0.0, 1.0);
    (
        c * w0.0 + i * s * (a * w0.0 + b * w0.1),
        c * w0.1 + i * s * (-b * w0.0 - a * w0.1),
    )
}

/// Truncated-excitation-space quench layer: exact e^{-iℍ₀'t} through the
/// dense eigendecomposition, and χ₁(t) through the closed Duhamel
/// divided-difference formula — both N-independent.
pub struct QuenchLayer {
    pub basis: ExcitationBasis,
    evals: Vec<f64>,
    evecs: nalgebra::DMatrix<f64>,
    /// H₁' rotated into the ℍ₀' eigenbasis.
    h1_tilde: nalgebra::DMatrix<f64>,
    y0: nalgebra::DVector<f64>,
    y1: nalgebra::DVector<f64>,
    pub e_h_post: f64,
}

impl QuenchLayer {
    pub fn new(pre: &CutoffModel, post: &CutoffModel, k_max: usize) -> Result<QuenchLayer> {
        if pre.modes != post.modes {
            return Err(Error::InvalidModel(
                "quench must preserve the mode set".into(),
            ));
        }
        let hartree_pre = crate::hartree::minimize_hartree_torus(pre);
        let h0_pre = crate::bogoliubov::assemble_h0(pre, &hartree_pre)?;
        let map_pre = crate::bogoliubov::diagonalize(&h0_pre, pre)?;
        let basis = ExcitationBasis::new(&pre.modes, k_max);
        let chi0 = crate::bogoliubov::chi0_state(&map_pre, &basis, 1e-8)?;
        let h1_pre = crate::perturbation::assemble_h1(pre);
        let chi1 = crate::perturbation::compute_chi1(&map_pre, &h1_pre, &pre.modes)?;
        let chi1_lab = crate::perturbation::chi1_lab(&chi1, &map_pre, &basis);

        let hartree_post = crate::hartree::minimize_hartree_torus(post);
        let h0_post = crate::bogoliubov::assemble_h0(post, &hartree_post)?;
        let h0_op = crate::bogoliubov::realize_h0(&h0_post, &basis);
        let h1_post = crate::perturbation::assemble_h1(post);
        let h1_op = crate::ladder::realize(&h1_post, &basis);

        let eig = nalgebra::SymmetricEigen::new(h0_op.to_dense());
        let evecs = eig.eigenvectors;
        let evals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let dim = basis.len();
        // H̃₁ = Qᵀ H₁ Q
        let mut h1q = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        let mut col = vec![0.0; dim];
        for c in 0..dim {
            for r in 0..dim {
                col[r] = evecs[(r, c)];
            }
            let y = h1_op.apply_vec(&col);
            for r in 0..dim {
                h1q[(r, c)] = y[r];
            }
        }
        let h1_tilde = evecs.transpose() * h1q;
        let y0 = evecs.transpose() * nalgebra::DVector::from_vec(chi0.coeffs.clone());
        let y1 = evecs.transpose() * nalgebra::DVector::from_vec(chi1_lab);
        Ok(QuenchLayer {
            basis,
            evals,
            evecs,
            h1_tilde,
            y0,
            y1,
            e_h_post: hartree_post.e_h,
        })
    }

    /// χ₀(t) = e^{-iℍ₀'t} χ₀(0).
    pub fn chi0_at(&self, t: f64) -> Vec<C64> {
        let dim = self.basis.len();
        let mut coeff = vec![czero(); dim];
        for a in 0..dim {
            coeff[a] = C64::new(0.0, -self.evals[a] * t).exp() * self.y0[a];
        }
        self.from_eigenbasis(&coeff)
    }

    /// χ₁(t) = e^{-iℍ₀'t} χ₁(0) − i ∫₀ᵗ e^{-iℍ₀'(t−s)} ℍ₁' χ₀(s) ds,
    /// evaluated exactly with divided differences of the phases.
    pub fn chi1_at(&self, t: f64) -> Vec<C64> {
        let dim = self.basis.len();
        let mut coeff = vec![czero(); dim];
        for a in 0..dim {
            coeff[a] = C64::new(0.0, -self.evals[a] * t).exp() * self.y1[a];
        }
        for a in 0..dim {
            let la = self.evals[a];
            let pa = C64::new(0.0, -la * t).exp();
            let mut acc = czero();
            for b in 0..dim {
                let hab = self.h1_tilde[(a, b)];
                if hab == 0.0 {
                    continue;
                }
                let lb = self.evals[b];
                let d = if (la - lb).abs() < 1e-9 {
                    pa * t
                } else {
                    (C64::new(0.0, -lb * t).exp() - pa) / C64::new(0.0, la - lb)
                };
                acc += hab * d * self.y0[b];
            }
            coeff[a] -= C64::new(0.0, 1.0) * acc;
        }
        self.from_eigenbasis(&coeff)
    }

    fn from_eigenbasis(&self, coeff: &[C64]) -> Vec<C64> {
        let dim = self.basis.len();
        let mut out = vec![czero(); dim];
        for a in 0..dim {
            if coeff[a] == czero() {
                continue;
            }
            for r in 0..dim {
                out[r] += self.evecs[(r, a)] * coeff[a];
            }
        }
        out
    }
}

/// Apply a single excitation-mode ladder operator to a complex vector.
fn apply_ladder_c(
    basis: &ExcitationBasis,
    mode: usize,
    dag: bool,
    x: &[C64],
) -> Vec<C64> {
    let m = basis.n_modes();
    let mut work = vec![0u8; m];
    let mut y = vec![czero(); basis.len()];
    for (i, amp) in x.iter().enumerate() {
        if *amp == czero() {
            continue;
        }
        work.copy_from_slice(basis.state(i));
        let factor;
        if dag {
            factor = (work[mode] as f64 + 1.0).sqrt();
            work[mode] += 1;
        } else {
            if work[mode] == 0 {
                continue;
            }
            factor = (work[mode] as f64).sqrt();
            work[mode] -= 1;
        }
        if let Some(j) = basis.index_of(&work) {
            y[j] += amp * factor;
        }
    }
    y
}

/// b_q(t) = u_q(t) a_q + v_q(t) a†_{-q} applied to a complex vector.
fn apply_b(
    basis: &ExcitationBasis,
    u: &[C64],
    v: &[C64],
    q: usize,
    x: &[C64],
) -> Vec<C64> {
    let neg = basis.negation[q];
    let a_part = apply_ladder_c(basis, q, false, x);
    let adag_part = apply_ladder_c(basis, neg, true, x);
    (0..basis.len())
        .map(|i| u[q] * a_part[i] + v[q] * adag_part[i])
        .collect()
}

/// The four ladder-pattern blocks of χ₁(t) relative to χ₀(t): pattern +1
/// marks a creation operator, −1 an annihilation operator.
#[derive(Debug, Clone)]
pub struct ChiOneDynamic {
    pub t: f64,
    /// (pattern, mode position, coefficient).
    pub c1: Vec<(i8, u16, C64)>,
    /// (patterns, mode positions, coefficient), entries in operator order.
    pub c3: Vec<([i8; 3], [u16; 3], C64)>,
    /// Rotated-frame block norms ‖Θ̃₁‖ and ‖Θ̃₃‖.
    pub theta1_norm: f64,
    pub theta3_norm: f64,
}

/// `chi1_dynamics`: decompose χ₁(t) over quasiparticle excitations of
/// χ₀(t) (sectors one and three), then expand each b†(t) into its ladder
/// patterns.
pub fn chi1_dynamics(
    layer: &QuenchLayer,
    prop: &ModePropagator,
    t_idx: usize,
) -> Result<ChiOneDynamic> {
    let t = prop.times[t_idx];
    let basis = &layer.basis;
    let m = basis.n_modes();
    let chi0 = layer.chi0_at(t);
    let chi1 = layer.chi1_at(t);
    let u = &prop.u[t_idx];
    let v = &prop.v[t_idx];
    let inner = |a: &[C64], b: &[C64]| -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    // Θ̃₁(q) = ⟨χ₀, b_q χ₁⟩
    let mut theta1 = vec![czero(); m];
    for q in 0..m {
        theta1[q] = inner(&chi0, &apply_b(basis, u, v, q, &chi1));
    }
    // Θ̃₃(ν) = ⟨χ₀, Π b^ν χ₁⟩ / √(ν!) over the sector-3 occupations
    let mut theta3: Vec<(Vec<u8>, C64)> = Vec::new();
    for i in basis.sector_range(3) {
        let occ = basis.state(i).to_vec();
        let mut y = chi1.clone();
        let mut fact = 1.0;
        for (q, &n) in occ.iter().enumerate() {
            for _ in 0..n {
                y = apply_b(basis, u, v, q, &y);
            }
            fact *= (1..=n as u64).map(|k| k as f64).product::<f64>();
        }
        let amp = inner(&chi0, &y) / fact.sqrt();
        if amp.norm() > 1e-14 {
            theta3.push((occ, amp));
        }
    }
    let theta1_norm = theta1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let theta3_norm = theta3
        .iter()
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    // expand into ladder patterns: b†_q = conj(u_q) a†_q + conj(v_q) a_{-q}
    let mut c1 = Vec::new();
    for q in 0..m {
        if theta1[q].norm() > 1e-14 {
            c1.push((1i8, q as u16, theta1[q] * u[q].conj()));
            c1.push((-1i8, basis.negation[q] as u16, theta1[q] * v[q].conj()));
        }
    }
    let mut c3 = Vec::new();
    for (occ, amp) in &theta3 {
        let mut quanta = Vec::new();
        for (q, &n) in occ.iter().enumerate() {
            for _ in 0..n {
                quanta.push(q);
            }
        }
        let norm_fact: f64 = occ
            .iter()
            .map(|&n| (1..=n as u64).map(|k| k as f64).product::<f64>())
            .product::<f64>()
            .sqrt();
        for bits in 0..8u8 {
            let mut patterns = [0i8; 3];
            let mut positions = [0u16; 3];
            let mut coeff = *amp / norm_fact;
            for (slot, &q) in quanta.iter().enumerate() {
                if bits & (1 << slot) == 0 {
                    patterns[slot] = 1;
                    positions[slot] = q as u16;
                    coeff *= u[q].conj();
                } else {
                    patterns[slot] = -1;
                    positions[slot] = basis.negation[q] as u16;
                    coeff *= v[q].conj();
                }
            }
            if coeff.norm() > 1e-16 {
                c3.push((patterns, positions, coeff));
            }
        }
    }
    Ok(ChiOneDynamic {
        t,
        c1,
        c3,
        theta1_norm,
        theta3_norm,
    })
}

/// Project a truncated excitation vector onto sectors ≤ n (the domain of
/// the reconstruction at particle number n).
pub fn project_to_sectors(chi: &[C64], basis: &ExcitationBasis, n: usize) -> Vec<C64> {
    chi.iter()
        .enumerate()
        .map(|(i, &z)| if basis.sector_of(i) <= n { z } else { czero() })
        .collect()
}

#[derive(Debug, Clone)]
pub struct DynamicsReport {
    pub t: f64,
    /// (N, ‖Ψ(t) − ψ₀(t)‖).
    pub errors0: Vec<(f64, f64)>,
    /// (N, ‖Ψ(t) − ψ₀(t) − N^{-1/2}ψ₁(t)‖).
    pub errors1: Vec<(f64, f64)>,
    pub norm_drift_max: f64,
    pub symplectic_defect: f64,
}

/// `norm_error_report`: exact quench evolution per N against the
/// reconstructed order-0 and order-1 approximations.
pub fn norm_error_report(
    pre: &CutoffModel,
    post: &CutoffModel,
    t: f64,
    n_list: &[usize],
    k_max: usize,
    tol: f64,
    seed: u64,
    workers: usize,
) -> Result<DynamicsReport> {
    let layer = QuenchLayer::new(pre, post, k_max)?;
    let chi0_t = layer.chi0_at(t);
    let chi1_t = layer.chi1_at(t);
    // symplectic defect from the per-mode propagator over the same run
    let hartree_pre = crate::hartree::minimize_hartree_torus(pre);
    let map_pre = crate::bogoliubov::diagonalize(
        &crate::bogoliubov::assemble_h0(pre, &hartree_pre)?,
        pre,
    )?;
    let hartree_post = crate::hartree::minimize_hartree_torus(post);
    let h0_post = crate::bogoliubov::assemble_h0(post, &hartree_post)?;
    let prop = evolve_bogoliubov(&map_pre, &h0_post, t, 2e-5, 64)?;

    let results = crate::util::parallel_map(n_list.len(), workers, |i| -> Result<(f64, f64, f64, f64)> {
        let n = n_list[i];
        let nf = n as f64;
        let model_pre = pre.with_n(n)?;
        let model_post = post.with_n(n)?;
        let occ = crate::fock::enumerate_basis(pre.modes.len(), n)?;
        let exc_full = ExcitationBasis::new(&pre.modes, n);
        let h_pre = crate::fock::assemble_hamiltonian(&model_pre, &occ)?;
        let (_, mut psi0) =
            crate::oracle::ground_state(&h_pre, tol, crate::oracle::DEFAULT_GS_MAX_ITER, seed)?;
        // deterministic sign: positive overlap with the reconstructed χ₀(0)
        let chi0_init = layer.chi0_at(0.0);
        let approx_init = crate::fock::excitation_reconstruct(
            &project_to_sectors(&chi0_init, &layer.basis, n)
                .iter()
                .enumerate()
                .filter(|(_, z)| z.norm() > 0.0)
                .map(|(i, z)| (i, *z))
                .fold(vec![czero(); layer.basis.len()], |mut acc, (i, z)| {
                    acc[i] = z;
                    acc
                }),
            &pre.modes,
            &layer.basis,
            &occ,
        )?;
        let ov: f64 = approx_init
            .iter()
            .zip(&psi0)
            .map(|(a, b)| a.re * b)
            .sum();
        if ov < 0.0 {
            psi0.iter_mut().for_each(|x| *x = -*x);
        }
        let h_post = crate::fock::assemble_hamiltonian(&model_post, &occ)?;
        let psi0_c: Vec<C64> = psi0.iter().map(|&x| C64::new(x, 0.0)).collect();
        let psi_t = crate::oracle::evolve(&h_post, &psi0_c, t, 1e-11)?;
        let drift = (cnorm(&psi_t) - 1.0).abs();
        // reconstructed approximations with the condensate phase
        let phase = C64::new(0.0, -(nf * layer.e_h_post) * t).exp();
        let rec = |chi: &[C64]| -> Result<Vec<C64>> {
            let projected = project_to_sectors(chi, &layer.basis, n);
            crate::fock::excitation_reconstruct(&projected, &pre.modes, &layer.basis, &occ)
        };
        let a0 = rec(&chi0_t)?;
        let a1 = rec(&chi1_t)?;
        let mut err0 = 0.0;
        let mut err1 = 0.0;
        for i in 0..occ.len() {
            let base = phase * a0[i];
            let with1 = base + phase * a1[i] / nf.sqrt();
            err0 += (psi_t[i] - base).norm_sqr();
            err1 += (psi_t[i] - with1).norm_sqr();
        }
        let _ = exc_full;
        Ok((nf, err0.sqrt(), err1.sqrt(), drift))
    });
    let mut errors0 = Vec::new();
    let mut errors1 = Vec::new();
    let mut norm_drift_max: f64 = 0.0;
    for r in results {
        let (n, e0, e1, drift) = r?;
        errors0.push((n, e0));
        errors1.push((n, e1));
        norm_drift_max = norm_drift_max.max(drift);
    }
    Ok(DynamicsReport {
        t,
        errors0,
        errors1,
        norm_drift_max,
        symplectic_defect: prop.defect_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hartree::minimize_hartree_torus;

    fn homogeneous_start(model: &CutoffModel) -> Vec<C64> {
        let mut phi = vec![czero(); model.modes.len()];
        phi[model.modes.zero_index()] = C64::new(1.0, 0.0);
        phi
    }

    #[test]
    fn homogeneous_condensate_is_stationary() {
        let model = CutoffModel::benchmark(1, 2.0, 10).unwrap();
        let phi0 = homogeneous_start(&model);
        let traj = evolve_hartree(&phi0, &model, 1.0, 1e-3, 8).unwrap();
        let last = traj.phis.last().unwrap();
        let err: f64 = last
            .iter()
            .zip(&phi0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-12, "homogeneous drift {err}");
        assert!((traj.mus.last().unwrap() - 2.0).abs() < 1e-12);
        assert!(traj.mass_drift < 1e-12 && traj.energy_drift < 1e-12);
    }

    #[test]
    fn free_single_mode_evolves_with_exact_phase() {
        let modes = crate::model::build_mode_set(1, 1).unwrap();
        let model =
            CutoffModel::new(modes, crate::model::PairPotential::zero(1, 2), 5).unwrap();
        let mut phi0 = vec![czero(); 3];
        phi0[2] = C64::new(1.0, 0.0); // p = 2π
        let t = 0.37;
        let traj = evolve_hartree(&phi0, &model, t, 1e-3, 4).unwrap();
        let expect = C64::new(0.0, -model.modes.kinetic(2) * t).exp();
        let got = traj.phis.last().unwrap()[2];
        assert!((got - expect).norm() < 1e-12);
    }

    #[test]
    fn split_step_is_second_order() {
        let model = CutoffModel::benchmark(1, 1.0, 10).unwrap();
        let mut phi0 = vec![czero(); 3];
        phi0[1] = C64::new((0.8f64).sqrt(), 0.0);
        phi0[2] = C64::new((0.2f64).sqrt(), 0.0);
        let t = 0.5;
        let run = |dt: f64| {
            evolve_hartree(&phi0, &model, t, dt, 1)
                .unwrap()
                .phis
                .last()
                .unwrap()
                .clone()
        };
        let fine = run(1e-5);
        let err = |dt: f64| -> f64 {
            run(dt)
                .iter()
                .zip(&fine)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let e1 = err(4e-3);
        let e2 = err(2e-3);
        let order = (e1 / e2).log2();
        assert!(order >= 1.9, "observed order {order}");
        // conserved-quantity logs within their contracts
        let traj = evolve_hartree(&phi0, &model, t, 2e-4, 8).unwrap();
        assert!(traj.mass_drift < 1e-8);
        assert!(traj.energy_drift < 1e-6);
    }

    fn quench_setup(v_pre: f64, v_post: f64) -> (CutoffModel, CutoffModel, BogoliubovMap, QuadraticHamiltonian) {
        let pre = CutoffModel::benchmark(1, v_pre, 10).unwrap();
        let post = CutoffModel::benchmark(1, v_post, 10).unwrap();
        let hp = minimize_hartree_torus(&pre);
        let map = crate::bogoliubov::diagonalize(
            &crate::bogoliubov::assemble_h0(&pre, &hp).unwrap(),
            &pre,
        )
        .unwrap();
        let hpost = minimize_hartree_torus(&post);
        let h0p = crate::bogoliubov::assemble_h0(&post, &hpost).unwrap();
        (pre, post, map, h0p)
    }

    #[test]
    fn no_quench_occupations_are_constant() {
        let (_, _, map, h0p) = quench_setup(1.0, 1.0);
        let prop = evolve_bogoliubov(&map, &h0p, 0.8, 2e-5, 16).unwrap();
        let n0 = prop.v[0][0].norm_sqr();
        for ti in 0..prop.times.len() {
            assert!((prop.v[ti][0].norm_sqr() - n0).abs() < 1e-8);
            let c = prop.pair_amplitude(ti, 0);
            assert!(c.norm() < 1.0);
        }
        assert!(prop.defect_max <= 1e-8);
    }

    #[test]
    fn rk4_matches_closed_form_propagator() {
        let (_, _, map, h0p) = quench_setup(0.5, 2.0);
        let t = 0.6;
        let prop = evolve_bogoliubov(&map, &h0p, t, 2e-5, 4).unwrap();
        let (uf, vf) = prop.final_uv();
        for p in 0..map.u.len() {
            let one = (C64::new(1.0, 0.0), czero());
            let (fe, se) = propagate_pair_exact(h0p.a[p], h0p.b[p], one, t);
            let ue = map.u[p] * fe + map.v[p] * se;
            let ve = (map.v[p] * fe + map.u[p] * se).conj();
            assert!((uf[p] - ue).norm() < 1e-9, "mode {p}: u");
            assert!((vf[p] - ve).norm() < 1e-9, "mode {p}: v");
        }
    }

    /// Vacuum quench: |v_p(t)|² oscillates at frequency 2ε′(p) between 0
    /// and (B′/ε′)²; pinned against dense evolution of the two-mode pair
    /// Hamiltonian truncated at 40 quanta.
    #[test]
    fn vacuum_quench_oscillation_matches_dense_pair_evolution() {
        let (_, _, map, h0p) = quench_setup(0.0, 1.5);
        let (a, b) = (h0p.a[0], h0p.b[0]);
        let eps = (a * a - b * b).sqrt();
        let t = 0.21;
        let prop = evolve_bogoliubov(&map, &h0p, t, 1e-5, 8).unwrap();
        let (_, vf) = prop.final_uv();
        let predicted = (b / eps).powi(2) * (eps * t).sin().powi(2); // v = conj(s)
        assert!((vf[0].norm_sqr() - predicted).abs() < 1e-9);
        // dense oracle: ⟨n_p⟩(t) in the evolved two-mode vacuum
        let mm = 41;
        let mut dense = nalgebra::DMatrix::<f64>::zeros(mm, mm);
        for m in 0..mm {
            dense[(m, m)] = 2.0 * a * m as f64;
            if m + 1 < mm {
                dense[(m + 1, m)] = b * (m as f64 + 1.0);
                dense[(m, m + 1)] = b * (m as f64 + 1.0);
            }
        }
        let mut x = vec![czero(); mm];
        x[0] = C64::new(1.0, 0.0);
        let y = crate::oracle::dense_expm_apply(&dense, &x, t);
        let occupation: f64 = y
            .iter()
            .enumerate()
            .map(|(m, z)| m as f64 * z.norm_sqr())
            .sum();
        assert!(
            (occupation - vf[0].norm_sqr()).abs() < 1e-9,
            "dense {occupation} vs propagator {}",
            vf[0].norm_sqr()
        );
    }

    #[test]
    fn quench_layer_chi0_is_quasiparticle_vacuum() {
        let (pre, post, map, h0p) = quench_setup(1.0, 2.0);
        let layer = QuenchLayer::new(&pre, &post, 10).unwrap();
        let t = 0.4;
        let prop = evolve_bogoliubov(&map, &h0p, t, 2e-5, 10).unwrap();
        let ti = prop
            .times
            .iter()
            .position(|&s| (s - t).abs() < 1e-9)
            .unwrap();
        let chi0 = layer.chi0_at(t);
        // norm preserved and annihilated by every evolved b_q
        assert!((cnorm(&chi0) - 1.0).abs() < 1e-9);
        for q in 0..layer.basis.n_modes() {
            let bchi = apply_b(&layer.basis, &prop.u[ti], &prop.v[ti], q, &chi0);
            assert!(cnorm(&bchi) < 1e-6, "b_{q} χ₀(t) = {}", cnorm(&bchi));
        }
    }

    #[test]
    fn chi1_dynamics_trivial_and_stationary_cases() {
        // v′ = 0 with χ₁(0) = 0: all coefficients stay zero
        let (pre0, post0, map0, h00) = quench_setup(0.0, 0.0);
        let layer0 = QuenchLayer::new(&pre0, &post0, 8).unwrap();
        let prop0 = evolve_bogoliubov(&map0, &h00, 0.5, 1e-4, 4).unwrap();
        let dyn0 = chi1_dynamics(&layer0, &prop0, prop0.times.len() - 1).unwrap();
        assert!(dyn0.theta1_norm < 1e-12 && dyn0.theta3_norm < 1e-12);
        // no quench: the coefficient norms are constant in time
        let (pre, post, map, h0p) = quench_setup(1.0, 1.0);
        let layer = QuenchLayer::new(&pre, &post, 10).unwrap();
        let prop = evolve_bogoliubov(&map, &h0p, 0.6, 2e-5, 6).unwrap();
        let mut norms = Vec::new();
        for ti in 0..prop.times.len() {
            let d = chi1_dynamics(&layer, &prop, ti).unwrap();
            norms.push((d.theta1_norm, d.theta3_norm));
            // pattern entries conserve momentum: Σ jᵢ·mᵢ = 0
            for (patterns, positions, _) in &d.c3 {
                let mut mom = 0i32;
                for s in 0..3 {
                    let id = layer.basis.mode_ids[positions[s] as usize];
                    mom += patterns[s] as i32 * pre.modes.mode(id)[0];
                }
                assert_eq!(mom, 0);
            }
        }
        // single-pair model: Θ norms are all zero (no cubic terms);
        // constancy is then trivial but still asserted
        for (a, b) in &norms {
            assert!((a - norms[0].0).abs() < 1e-8);
            assert!((b - norms[0].1).abs() < 1e-8);
        }
    }

    #[test]
    fn no_quench_norm_error_is_static() {
        let pre = CutoffModel::benchmark(1, 1.0, 10).unwrap();
        let at = |t: f64| {
            let rep = norm_error_report(&pre, &pre, t, &[8, 10, 12, 14], 10, 1e-11, 42, 2).unwrap();
            rep.errors0
        };
        let e0 = at(0.0);
        let e1 = at(0.7);
        for ((n, a), (_, b)) in e0.iter().zip(&e1) {
            // phases drift at O(1/N); the residual comparison allows that
            assert!(
                (a - b).abs() < 6.0 / n,
                "N={n}: static {a} vs evolved {b}"
            );
        }
    }
}
