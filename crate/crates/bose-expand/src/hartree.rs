//! Hartree layer: the condensate energy functional, its minimizer φ, the
//! chemical potential μ, and fixed-point residuals.
//!
//! On the torus everything is computed in mode space; for a positive-type
//! v̂ the homogeneous state φ ≡ 1 minimizes the functional, with
//! e_H = v̂(0)/2 and μ = v̂(0). On the trap grid the minimizer is found by
//! normalized imaginary-time stepping (implicit in the linear part, so the
//! step is not stability-limited by the grid Laplacian), with an
//! energy-decrease fallback that halves the step.

use crate::error::{Error, Result};
use crate::model::{CutoffModel, TrapGrid};
use crate::util::norm2;

#[derive(Debug, Clone)]
pub enum HartreeRepr {
    /// Real mode amplitudes on the torus, aligned with the mode set.
    TorusModes(Vec<f64>),
    /// Real grid samples, normalized with the grid weight h.
    TrapGrid(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct HartreeState {
    pub e_h: f64,
    pub mu: f64,
    pub residual: f64,
    pub repr: HartreeRepr,
    /// Energy change observed under one refinement probe, if requested.
    pub resolution_probe: Option<f64>,
}

impl HartreeState {
    pub fn is_homogeneous_torus(&self, model: &CutoffModel) -> bool {
        match &self.repr {
            HartreeRepr::TorusModes(phi) => {
                let z = model.modes.zero_index();
                phi.iter().enumerate().all(|(i, &a)| {
                    if i == z {
                        (a - 1.0).abs() < 1e-12
                    } else {
                        a.abs() < 1e-12
                    }
                })
            }
            _ => false,
        }
    }

    pub fn torus_amplitudes(&self) -> Option<&[f64]> {
        match &self.repr {
            HartreeRepr::TorusModes(phi) => Some(phi),
            _ => None,
        }
    }
}

/// ρ̂(k) = Σ_p φ̂(p) φ̂(p+k) for real mode amplitudes.
fn density_mode(phi: &[f64], model: &CutoffModel, k: &[i32; 3]) -> f64 {
    let modes = &model.modes;
    let mut acc = 0.0;
    for p in 0..modes.len() {
        if phi[p] == 0.0 {
            continue;
        }
        let n = modes.mode(p);
        let shifted = [n[0] + k[0], n[1] + k[1], n[2] + k[2]];
        if let Some(j) = modes.index_of(&shifted) {
            acc += phi[p] * phi[j];
        }
    }
    acc
}

fn transfers(model: &CutoffModel) -> Vec<[i32; 3]> {
    let r = 2 * model.modes.cutoff;
    let dim = model.modes.dim;
    let mut out = Vec::new();
    let mut k = [0i32; 3];
    for j in 0..dim {
        k[j] = -r;
    }
    loop {
        out.push(k);
        let mut j = dim;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if k[j] < r {
                k[j] += 1;
                for l in j + 1..dim {
                    k[l] = -r;
                }
                break;
            }
        }
    }
}

/// Raw Hartree functional on torus mode amplitudes (no norm constraint):
/// Σ|p|²φ̂² + ½ Σ_k v̂(k) ρ̂(k)².
pub fn torus_energy_raw(phi: &[f64], model: &CutoffModel) -> f64 {
    let modes = &model.modes;
    let mut kin = 0.0;
    for p in 0..modes.len() {
        kin += modes.kinetic(p) * phi[p] * phi[p];
    }
    let mut inter = 0.0;
    for k in transfers(model) {
        let v = model.potential.vhat(&k);
        if v != 0.0 {
            let rho = density_mode(phi, model, &k);
            inter += v * rho * rho;
        }
    }
    kin + 0.5 * inter
}

/// Mean-field operator (-Δ + v∗|φ|²) φ in mode space.
pub fn torus_meanfield_apply(phi: &[f64], model: &CutoffModel) -> Vec<f64> {
    let modes = &model.modes;
    let mut out = vec![0.0; modes.len()];
    for p in 0..modes.len() {
        out[p] = modes.kinetic(p) * phi[p];
    }
    for k in transfers(model) {
        let v = model.potential.vhat(&k);
        if v == 0.0 {
            continue;
        }
        let rho = density_mode(phi, model, &k);
        if rho == 0.0 {
            continue;
        }
        for p in 0..modes.len() {
            if phi[p] == 0.0 {
                continue;
            }
            let n = modes.mode(p);
            let tgt = [n[0] + k[0], n[1] + k[1], n[2] + k[2]];
            if let Some(j) = modes.index_of(&tgt) {
                out[j] += v * rho * phi[p];
            }
        }
    }
    out
}

/// `hartree_energy` on the torus; requires ‖φ‖ = 1.
pub fn hartree_energy(phi: &[f64], model: &CutoffModel) -> Result<f64> {
    let norm = norm2(phi);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized { norm });
    }
    Ok(torus_energy_raw(phi, model))
}

/// `hartree_residual`: ‖(-Δ + v∗|φ|² − μ)φ‖ with μ = ⟨φ, (-Δ + v∗|φ|²)φ⟩.
pub fn hartree_residual(phi: &[f64], model: &CutoffModel) -> f64 {
    let h = torus_meanfield_apply(phi, model);
    let mu = crate::util::dot(phi, &h);
    let r: Vec<f64> = h.iter().zip(phi).map(|(a, b)| a - mu * b).collect();
    norm2(&r)
}

/// `minimize_hartree` on the torus: the homogeneous condensate, validated
/// by its residual.
pub fn minimize_hartree_torus(model: &CutoffModel) -> HartreeState {
    let mut phi = vec![0.0; model.modes.len()];
    phi[model.modes.zero_index()] = 1.0;
    let e_h = torus_energy_raw(&phi, model);
    let h = torus_meanfield_apply(&phi, model);
    let mu = crate::util::dot(&phi, &h);
    let residual = hartree_residual(&phi, model);
    HartreeState {
        e_h,
        mu,
        residual,
        repr: HartreeRepr::TorusModes(phi),
        resolution_probe: None,
    }
}

/// Pair interaction on the trap grid (real space).
#[derive(Debug, Clone, Copy)]
pub enum TrapInteraction {
    None,
    /// v(x) = amplitude · exp(-x²/(2 width²)) — positive type.
    Gaussian { amplitude: f64, width: f64 },
}


#[derive(Debug, Clone)]
pub struct TrapSolve {
    pub tol: f64,
    pub max_iter: usize,
    pub dt: f64,
    /// Rerun at doubled resolution and report the energy change.
    pub probe_resolution: bool,
}

impl Default for TrapSolve {
    fn default() -> Self {
        TrapSolve {
            tol: 1e-10,
            max_iter: 4000,
            dt: 0.5,
            probe_resolution: false,
        }
    }
}

/// v∗|φ|² on the grid by zero-padded FFT convolution (quadrature weight h).
fn convolve_interaction(
    grid: &TrapGrid,
    v: &TrapInteraction,
    density: &[f64],
) -> Vec<f64> {
    match v {
        TrapInteraction::None => vec![0.0; density.len()],
        TrapInteraction::Gaussian { amplitude, width } => {
            use rustfft::{num_complex::Complex, FftPlanner};
            let n = density.len();
            let len = (2 * n - 1).next_power_of_two();
            let mut planner = FftPlanner::<f64>::new();
            let fft = planner.plan_fft_forward(len);
            let ifft = planner.plan_fft_inverse(len);
            // kernel sampled at offsets -(n-1)..=(n-1), stored circularly
            let mut ker = vec![Complex::new(0.0, 0.0); len];
            for off in -(n as i64 - 1)..=(n as i64 - 1) {
                let x = off as f64 * grid.spacing;
                let val = amplitude * (-0.5 * x * x / (width * width)).exp();
                let idx = ((off + len as i64) % len as i64) as usize;
                ker[idx] = Complex::new(val, 0.0);
            }
            let mut dens = vec![Complex::new(0.0, 0.0); len];
            for (i, &d) in density.iter().enumerate() {
                dens[i] = Complex::new(d, 0.0);
            }
            fft.process(&mut ker);
            fft.process(&mut dens);
            for i in 0..len {
                ker[i] *= dens[i];
            }
            ifft.process(&mut ker);
            let scale = grid.spacing / len as f64;
            (0..n).map(|i| ker[i].re * scale).collect()
        }
    }
}

fn grid_normalize(phi: &mut [f64], h: f64) {
    let norm = (h * phi.iter().map(|x| x * x).sum::<f64>()).sqrt();
    for x in phi.iter_mut() {
        *x /= norm;
    }
    // deterministic phase: first nonzero sample positive
    if let Some(first) = phi.iter().find(|x| x.abs() > 1e-300) {
        if *first < 0.0 {
            for x in phi.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// ⟨a, T b⟩ and T b for the Dirichlet second-difference Laplacian.
fn laplacian_apply(phi: &[f64], h: f64) -> Vec<f64> {
    let n = phi.len();
    let h2 = h * h;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let left = if i > 0 { phi[i - 1] } else { 0.0 };
        let right = if i + 1 < n { phi[i + 1] } else { 0.0 };
        out[i] = (2.0 * phi[i] - left - right) / h2;
    }
    out
}

fn trap_energy(grid: &TrapGrid, v: &TrapInteraction, phi: &[f64]) -> f64 {
    let h = grid.spacing;
    let t = laplacian_apply(phi, h);
    let kin: f64 = h * phi.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>();
    let pot: f64 = h * phi
        .iter()
        .zip(&grid.values)
        .map(|(a, vv)| vv * a * a)
        .sum::<f64>();
    let density: Vec<f64> = phi.iter().map(|x| x * x).collect();
    let w = convolve_interaction(grid, v, &density);
    let inter: f64 = h * phi
        .iter()
        .zip(&w)
        .map(|(a, wi)| wi * a * a)
        .sum::<f64>();
    kin + pot + 0.5 * inter
}

fn trap_mu_residual(grid: &TrapGrid, v: &TrapInteraction, phi: &[f64]) -> (f64, f64) {
    let h = grid.spacing;
    let t = laplacian_apply(phi, h);
    let density: Vec<f64> = phi.iter().map(|x| x * x).collect();
    let w = convolve_interaction(grid, v, &density);
    let hphi: Vec<f64> = (0..phi.len())
        .map(|i| t[i] + (grid.values[i] + w[i]) * phi[i])
        .collect();
    let mu = h * phi.iter().zip(&hphi).map(|(a, b)| a * b).sum::<f64>();
    let res = (h * phi
        .iter()
        .zip(&hphi)
        .map(|(p, hp)| (hp - mu * p) * (hp - mu * p))
        .sum::<f64>())
    .sqrt();
    (mu, res)
}

/// Thomas solve of (I + dt(T + diag(d))) x = rhs with T the Dirichlet
/// second-difference Laplacian.
fn implicit_step(rhs: &[f64], diag_pot: &[f64], h: f64, dt: f64) -> Vec<f64> {
    let n = rhs.len();
    let h2 = h * h;
    let off = -dt / h2;
    let mut diag: Vec<f64> = (0..n)
        .map(|i| 1.0 + dt * (2.0 / h2 + diag_pot[i]))
        .collect();
    let mut x = rhs.to_vec();
    // forward sweep
    for i in 1..n {
        let m = off / diag[i - 1];
        diag[i] -= m * off;
        x[i] -= m * x[i - 1];
    }
    // back substitution
    x[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (x[i] - off * x[i + 1]) / diag[i];
    }
    x
}

/// `minimize_hartree` on the trap grid.
pub fn minimize_hartree_trap(
    grid: &TrapGrid,
    v: &TrapInteraction,
    opts: &TrapSolve,
) -> Result<HartreeState> {
    let state = minimize_trap_once(grid, v, opts)?;
    if !opts.probe_resolution {
        return Ok(state);
    }
    // refinement probe: doubled resolution, halved step
    let fine = TrapGrid::new_1d(grid.half_width, 2 * grid.points - 1, |x| {
        // resample the trap by linear interpolation of the stored values
        let t = (x + grid.half_width) / grid.spacing;
        let i = (t.floor() as usize).min(grid.points - 2);
        let frac = t - i as f64;
        grid.values[i] * (1.0 - frac) + grid.values[i + 1] * frac
    })?;
    let fine_opts = TrapSolve {
        dt: 0.5 * opts.dt,
        probe_resolution: false,
        ..opts.clone()
    };
    let fine_state = minimize_trap_once(&fine, v, &fine_opts)?;
    let mut out = state;
    out.resolution_probe = Some((fine_state.e_h - out.e_h).abs());
    Ok(out)
}

fn minimize_trap_once(
    grid: &TrapGrid,
    v: &TrapInteraction,
    opts: &TrapSolve,
) -> Result<HartreeState> {
    let n = grid.points;
    let h = grid.spacing;
    // Gaussian-bump start, positive, normalized
    let mut phi: Vec<f64> = grid
        .xs
        .iter()
        .map(|&x| (-0.25 * x * x).exp())
        .collect();
    grid_normalize(&mut phi, h);
    let mut dt = opts.dt;
    let mut energy = trap_energy(grid, v, &phi);
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let density: Vec<f64> = phi.iter().map(|x| x * x).collect();
        let w = convolve_interaction(grid, v, &density);
        let diag_pot: Vec<f64> = (0..n).map(|i| grid.values[i] + w[i]).collect();
        let mut next = implicit_step(&phi, &diag_pot, h, dt);
        grid_normalize(&mut next, h);
        let next_energy = trap_energy(grid, v, &next);
        if next_energy > energy + 1e-13 {
            dt *= 0.5;
            if dt < 1e-8 {
                return Err(Error::IterationLimit {
                    max_iter: opts.max_iter,
                    residual,
                });
            }
            continue;
        }
        phi = next;
        energy = next_energy;
        let (_, res) = trap_mu_residual(grid, v, &phi);
        residual = res;
        if residual <= opts.tol {
            let (mu, res) = trap_mu_residual(grid, v, &phi);
            return Ok(HartreeState {
                e_h: energy,
                mu,
                residual: res,
                repr: HartreeRepr::TrapGrid(phi),
                resolution_probe: None,
            });
        }
    }
    Err(Error::IterationLimit {
        max_iter: opts.max_iter,
        residual,
    })
}
