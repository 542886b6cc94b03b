//! Quadratic excitation Hamiltonian and its symplectic diagonalization.
//!
//! On the homogeneous torus the quadratic coefficients are diagonal in
//! momentum: A(p) = |p|² + v̂(p), B(p) = v̂(p). The hyperbolic rotation
//! u_p = cosh θ_p, v_p = sinh θ_p with tanh 2θ_p = B/A gives mode energies
//! ε(p) = √(A² − B²), the ground energy E₀ = ½Σ(ε − A) ≤ 0, and the
//! squeezed ground state with pair amplitude c_p = -v_p/u_p.

use crate::error::{Error, Result};
use crate::fock::ExcitationBasis;
use crate::hartree::HartreeState;
use crate::ladder::{annihilate, create, Monomial};
use crate::model::CutoffModel;
use crate::sparse::SparseOperator;

/// Per nonzero mode (indexed as in `ModeSet::nonzero_indices`):
/// diagonal coefficient A and pairing coefficient B.
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    pub mode_ids: Vec<usize>,
    pub negation: Vec<usize>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BogoliubovMap {
    pub mode_ids: Vec<usize>,
    pub negation: Vec<usize>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub eps: Vec<f64>,
    /// Pair amplitude c_p = -v_p/u_p.
    pub c: Vec<f64>,
    pub e0: f64,
}

/// χ₀ on a truncated excitation basis, with the mass lost to the cutoff.
#[derive(Debug, Clone)]
pub struct QuasifreeState {
    pub coeffs: Vec<f64>,
    pub defect: f64,
    pub k_max: usize,
}

pub const DEFAULT_SECTOR_CUTOFF: usize = 12;
pub const DEFAULT_DEFECT_THRESHOLD: f64 = 1e-8;

fn nonzero_layout(model: &CutoffModel) -> (Vec<usize>, Vec<usize>) {
    let mode_ids = model.modes.nonzero_indices();
    let pos_of: std::collections::BTreeMap<usize, usize> = mode_ids
        .iter()
        .enumerate()
        .map(|(pos, &id)| (id, pos))
        .collect();
    let negation = mode_ids
        .iter()
        .map(|&id| pos_of[&model.modes.negate_index(id)])
        .collect();
    (mode_ids, negation)
}

/// `assemble_H0`: torus-only, homogeneous condensate required.
pub fn assemble_h0(model: &CutoffModel, hartree: &HartreeState) -> Result<QuadraticHamiltonian> {
    if !hartree.is_homogeneous_torus(model) {
        return Err(Error::Unsupported(
            "quadratic expansion needs the homogeneous torus condensate".into(),
        ));
    }
    let (mode_ids, negation) = nonzero_layout(model);
    let mut a = Vec::with_capacity(mode_ids.len());
    let mut b = Vec::with_capacity(mode_ids.len());
    for &id in &mode_ids {
        let vhat = model.potential.vhat(&model.modes.mode(id));
        a.push(model.modes.kinetic(id) + vhat);
        b.push(vhat);
    }
    Ok(QuadraticHamiltonian {
        mode_ids,
        negation,
        a,
        b,
    })
}

/// `diagonalize`: hyperbolic rotation per mode.
pub fn diagonalize(h0: &QuadraticHamiltonian, model: &CutoffModel) -> Result<BogoliubovMap> {
    let m = h0.a.len();
    let mut u = Vec::with_capacity(m);
    let mut v = Vec::with_capacity(m);
    let mut eps = Vec::with_capacity(m);
    let mut c = Vec::with_capacity(m);
    let mut e0 = 0.0;
    for p in 0..m {
        let (a, b) = (h0.a[p], h0.b[p]);
        if a <= b.abs() {
            let id = h0.mode_ids[p];
            let n = model.modes.mode(id);
            return Err(Error::Instability {
                k: n[..model.modes.dim].to_vec(),
                a,
                b: b.abs(),
            });
        }
        let e = (a * a - b * b).sqrt();
        let theta = 0.5 * (b / a).atanh();
        let (up, vp) = (theta.cosh(), theta.sinh());
        eps.push(e);
        u.push(up);
        v.push(vp);
        c.push(-vp / up);
        e0 += 0.5 * (e - a);
    }
    Ok(BogoliubovMap {
        mode_ids: h0.mode_ids.clone(),
        negation: h0.negation.clone(),
        u,
        v,
        eps,
        c,
        e0,
    })
}

/// Unordered ± pairs of nonzero modes: positions (i, j) with i < j = -i.
pub fn mode_pairs(negation: &[usize]) -> Vec<(usize, usize)> {
    (0..negation.len())
        .filter(|&i| i < negation[i])
        .map(|i| (i, negation[i]))
        .collect()
}

/// `chi0_state`: squeezed pair state on the kept sectors. Amplitude of the
/// configuration with m_p pairs in (p, -p) is Π_p √(1-c_p²) c_p^{m_p};
/// the kept mass shortfall is reported as the cutoff defect, and the kept
/// part is renormalized.
pub fn chi0_state(
    map: &BogoliubovMap,
    basis: &ExcitationBasis,
    defect_threshold: f64,
) -> Result<QuasifreeState> {
    debug_assert_eq!(map.mode_ids, basis.mode_ids);
    let pairs = mode_pairs(&map.negation);
    let norm2: f64 = pairs.iter().map(|&(i, _)| 1.0 - map.c[i] * map.c[i]).product();
    let mut coeffs = vec![0.0; basis.len()];
    let mut kept = 0.0;
    for idx in 0..basis.len() {
        let occ = basis.state(idx);
        let mut amp = norm2.sqrt();
        let mut paired = true;
        for &(i, j) in &pairs {
            if occ[i] != occ[j] {
                paired = false;
                break;
            }
            amp *= map.c[i].powi(occ[i] as i32);
        }
        if !paired {
            continue;
        }
        coeffs[idx] = amp;
        kept += amp * amp;
    }
    let defect = 1.0 - kept;
    if defect > defect_threshold {
        return Err(Error::CutoffTooSmall {
            defect,
            threshold: defect_threshold,
        });
    }
    let scale = kept.sqrt();
    for cfs in &mut coeffs {
        *cfs /= scale;
    }
    Ok(QuasifreeState {
        coeffs,
        defect,
        k_max: basis.k_max,
    })
}

/// chi0 with adaptive doubling of the sector cutoff until the defect is
/// below threshold. Returns the basis it settled on.
pub fn chi0_state_adaptive(
    map: &BogoliubovMap,
    modes: &crate::model::ModeSet,
    threshold: f64,
) -> Result<(ExcitationBasis, QuasifreeState)> {
    let mut k_max = DEFAULT_SECTOR_CUTOFF;
    loop {
        let basis = ExcitationBasis::new(modes, k_max);
        match chi0_state(map, &basis, threshold) {
            Ok(s) => return Ok((basis, s)),
            Err(Error::CutoffTooSmall { .. }) if k_max < 512 => {
                k_max *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

/// `number_moments`: ⟨χ, 𝒩^order χ⟩ over kept sectors.
pub fn number_moments(state: &QuasifreeState, basis: &ExcitationBasis, order: u32) -> f64 {
    let mut acc = 0.0;
    for k in 0..=basis.k_max {
        let mass: f64 = basis.sector_range(k).map(|i| state.coeffs[i] * state.coeffs[i]).sum();
        acc += (k as f64).powi(order as i32) * mass;
    }
    acc
}

/// ℍ₀ as ladder monomials: Σ A_p a†_p a_p + ½ Σ B_p (a†_p a†_{-p} + a_p a_{-p}).
pub fn h0_monomials(h0: &QuadraticHamiltonian) -> Vec<Monomial> {
    let m = h0.a.len();
    let mut out = Vec::with_capacity(3 * m);
    for p in 0..m {
        out.push(Monomial::new(h0.a[p], vec![create(p), annihilate(p)]));
        let np = h0.negation[p];
        out.push(Monomial::new(0.5 * h0.b[p], vec![create(p), create(np)]));
        out.push(Monomial::new(
            0.5 * h0.b[p],
            vec![annihilate(p), annihilate(np)],
        ));
    }
    out
}

pub fn realize_h0(h0: &QuadraticHamiltonian, basis: &ExcitationBasis) -> SparseOperator {
    crate::ladder::realize(&h0_monomials(h0), basis)
}

/// Generator of the squeezing transformation with e^G |Ω⟩ ∝ χ₀:
/// G = Σ_pairs θ_p (a_p a_{-p} − a†_p a†_{-p}).
pub fn squeeze_generator(map: &BogoliubovMap) -> Vec<Monomial> {
    let mut out = Vec::new();
    for (i, j) in mode_pairs(&map.negation) {
        let theta = map.v[i].asinh();
        out.push(Monomial::new(theta, vec![annihilate(i), annihilate(j)]));
        out.push(Monomial::new(-theta, vec![create(i), create(j)]));
    }
    out
}

/// Apply e^G to a vector by a Taylor series of sparse applications. The
/// generators in scope have small norm (θ ≪ 1), so the plain series
/// converges fast; terms are added until they stop changing the result.
pub fn expm_apply(gen: &SparseOperator, x: &[f64]) -> Vec<f64> {
    let mut acc = x.to_vec();
    let mut term = x.to_vec();
    for k in 1..400 {
        term = gen.apply_vec(&term);
        let kf = 1.0 / k as f64;
        for t in term.iter_mut() {
            *t *= kf;
        }
        let mut change: f64 = 0.0;
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += t;
            change += t * t;
        }
        if change.sqrt() < 1e-16 {
            return acc;
        }
    }
    acc
}

/// 𝕌₀† applied to a vector on the truncated basis (χ₀ = 𝕌₀†|Ω⟩).
pub fn u0_dag_apply(map: &BogoliubovMap, basis: &ExcitationBasis, x: &[f64]) -> Vec<f64> {
    let gen = crate::ladder::realize(&squeeze_generator(map), basis);
    expm_apply(&gen, x)
}

/// 𝕌₀ applied to a vector (inverse squeeze).
pub fn u0_apply(map: &BogoliubovMap, basis: &ExcitationBasis, x: &[f64]) -> Vec<f64> {
    let monos: Vec<Monomial> = squeeze_generator(map)
        .into_iter()
        .map(|mut m| {
            m.coeff = -m.coeff;
            m
        })
        .collect();
    let gen = crate::ladder::realize(&monos, basis);
    expm_apply(&gen, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hartree::minimize_hartree_torus;
    use crate::model::{build_mode_set, CutoffModel, PairPotential, TWO_PI};

    fn benchmark_map(cutoff: i32, vhat: f64) -> (CutoffModel, BogoliubovMap) {
        let model = CutoffModel::benchmark(cutoff, vhat, 12).unwrap();
        let hartree = minimize_hartree_torus(&model);
        let h0 = assemble_h0(&model, &hartree).unwrap();
        let map = diagonalize(&h0, &model).unwrap();
        (model, map)
    }

    #[test]
    fn free_gas_is_trivial() {
        let modes = build_mode_set(1, 2).unwrap();
        let model = CutoffModel::new(modes, PairPotential::zero(1, 4), 8).unwrap();
        let hartree = minimize_hartree_torus(&model);
        let h0 = assemble_h0(&model, &hartree).unwrap();
        let map = diagonalize(&h0, &model).unwrap();
        for p in 0..map.u.len() {
            assert!((map.eps[p] - h0.a[p]).abs() < 1e-12);
            assert!((map.u[p] - 1.0).abs() < 1e-14);
            assert!(map.v[p].abs() < 1e-14);
        }
        assert!(map.e0.abs() < 1e-14);
    }

    #[test]
    fn benchmark_dispersion_and_e0() {
        let (_, map) = benchmark_map(1, 1.0);
        let p2 = TWO_PI * TWO_PI;
        let eps_expect = (p2 * p2 + 2.0 * p2).sqrt();
        for p in 0..2 {
            assert!((map.eps[p] - eps_expect).abs() < 1e-10);
            assert!((map.u[p] * map.u[p] - map.v[p] * map.v[p] - 1.0).abs() < 1e-12);
        }
        let e0_expect = eps_expect - (p2 + 1.0);
        assert!((map.e0 - e0_expect).abs() < 1e-12);
        assert!(map.e0 < 0.0 && map.e0 > -0.02);
    }

    /// Dense oracle: the single-pair quadratic Hamiltonian on a two-mode
    /// boson space truncated at 40 quanta reproduces E₀ and the pair gap 2ε.
    #[test]
    fn dense_pair_hamiltonian_oracle() {
        let (_, map) = benchmark_map(1, 1.0);
        let (a, b) = (TWO_PI * TWO_PI + 1.0, 1.0);
        // states |m, m⟩, m ≤ 40: H|m⟩ = 2Am|m⟩ + B(m+1)|m+1⟩ + Bm|m-1⟩
        let mm = 41;
        let mut dense = nalgebra::DMatrix::<f64>::zeros(mm, mm);
        for m in 0..mm {
            dense[(m, m)] = 2.0 * a * m as f64;
            if m + 1 < mm {
                dense[(m + 1, m)] = b * (m as f64 + 1.0);
                dense[(m, m + 1)] = b * (m as f64 + 1.0);
            }
        }
        let eig = nalgebra::SymmetricEigen::new(dense);
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let eps = (a * a - b * b).sqrt();
        // one ± pair contributes ε - A to E₀
        assert!((ev[0] - (eps - a)).abs() < 1e-12);
        assert!((ev[1] - ev[0] - 2.0 * eps).abs() < 1e-9);
        // and matches the per-mode map on the same model
        assert!((map.e0 - (eps - a)).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_identity_random_inputs() {
        let mut rng = crate::util::SplitMix64::new(1);
        for _ in 0..50 {
            let a = 1.0 + 10.0 * rng.next_f64();
            let b = (a - 1e-3) * rng.next_f64();
            let theta = 0.5 * (b / a).atanh();
            let (u, v) = (theta.cosh(), theta.sinh());
            assert!((u * u - v * v - 1.0).abs() < 1e-12);
            let eps = (a * a - b * b).sqrt();
            assert!(eps <= a);
        }
    }

    #[test]
    fn instability_reported() {
        let modes = build_mode_set(1, 1).unwrap();
        let model =
            CutoffModel::new(modes.clone(), PairPotential::constant(1, 2, 1.0), 8).unwrap();
        let (mode_ids, negation) = nonzero_layout(&model);
        let h0 = QuadraticHamiltonian {
            mode_ids,
            negation,
            a: vec![1.0, 1.0],
            b: vec![2.0, 2.0],
        };
        assert!(matches!(
            diagonalize(&h0, &model).unwrap_err(),
            Error::Instability { .. }
        ));
    }

    #[test]
    fn chi0_even_sectors_and_geometric_pairs() {
        let (model, map) = benchmark_map(1, 1.0);
        let basis = ExcitationBasis::new(&model.modes, 10);
        let chi0 = chi0_state(&map, &basis, 1e-8).unwrap();
        for i in 0..basis.len() {
            if chi0.coeffs[i] != 0.0 {
                assert_eq!(basis.sector_of(i) % 2, 0);
            }
        }
        // sector-2k amplitude ∝ c^k
        let c = map.c[0];
        let a2 = chi0.coeffs[basis.index_of(&[1, 1]).unwrap()];
        let a4 = chi0.coeffs[basis.index_of(&[2, 2]).unwrap()];
        let a0 = chi0.coeffs[0];
        assert!((a2 / a0 - c).abs() < 1e-12);
        assert!((a4 / a2 - c).abs() < 1e-12);
        // vacuum limit
        let free = QuadraticHamiltonian {
            mode_ids: map.mode_ids.clone(),
            negation: map.negation.clone(),
            a: vec![1.0, 1.0],
            b: vec![0.0, 0.0],
        };
        let free_map = diagonalize(&free, &model).unwrap();
        let vac = chi0_state(&free_map, &basis, 1e-12).unwrap();
        assert!((vac.coeffs[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chi0_matches_dense_ground_state_of_h0() {
        let (model, map) = benchmark_map(1, 1.0);
        let hartree = minimize_hartree_torus(&model);
        let h0 = assemble_h0(&model, &hartree).unwrap();
        let basis = ExcitationBasis::new(&model.modes, 14);
        let chi0 = chi0_state(&map, &basis, 1e-10).unwrap();
        let h0_op = realize_h0(&h0, &basis);
        let dense = h0_op.to_dense();
        let eig = nalgebra::SymmetricEigen::new(dense);
        let mut idx = 0;
        for (i, ev) in eig.eigenvalues.iter().enumerate() {
            if ev < &eig.eigenvalues[idx] {
                idx = i;
            }
        }
        let gs = eig.eigenvectors.column(idx);
        let overlap: f64 = gs
            .iter()
            .zip(&chi0.coeffs)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .abs();
        assert!(overlap >= 1.0 - 1e-6, "overlap {overlap}");
        assert!((eig.eigenvalues[idx] - map.e0).abs() < 1e-8);
    }

    #[test]
    fn number_moments_pin_depletion() {
        let (model, map) = benchmark_map(1, 1.0);
        let basis = ExcitationBasis::new(&model.modes, 12);
        let chi0 = chi0_state(&map, &basis, 1e-8).unwrap();
        let n1 = number_moments(&chi0, &basis, 1);
        // direct series: ⟨𝒩⟩ = 2c²/(1-c²) for a single pair
        let s = map.c[0] * map.c[0];
        let direct: f64 = 2.0 * s / (1.0 - s);
        assert!((n1 - direct).abs() < 1e-12);
        assert!(number_moments(&chi0, &basis, 0) > 0.999999);
        // moments grow with |c|: compare against a stiffer potential
        let (_, map2) = benchmark_map(1, 3.0);
        let chi2 = chi0_state(&map2, &basis, 1e-8).unwrap();
        assert!(number_moments(&chi2, &basis, 1) > n1);
        assert!(number_moments(&chi2, &basis, 2) > number_moments(&chi0, &basis, 2));
        // vacuum: all moments vanish
        let free = QuadraticHamiltonian {
            mode_ids: map.mode_ids.clone(),
            negation: map.negation.clone(),
            a: vec![1.0, 1.0],
            b: vec![0.0, 0.0],
        };
        let vac = chi0_state(&diagonalize(&free, &model).unwrap(), &basis, 1e-12).unwrap();
        for order in 1..=4 {
            assert!(number_moments(&vac, &basis, order).abs() < 1e-15);
        }
    }

    /// Conjugating the realized ℍ₀ by the squeezing transformation gives a
    /// number-diagonal operator on low sectors.
    #[test]
    fn squeeze_conjugation_diagonalizes_h0() {
        let (model, map) = benchmark_map(1, 1.0);
        let hartree = minimize_hartree_torus(&model);
        let h0 = assemble_h0(&model, &hartree).unwrap();
        let basis = ExcitationBasis::new(&model.modes, 14);
        let h0_dense = realize_h0(&h0, &basis).to_dense();
        let gen = crate::ladder::realize(&squeeze_generator(&map), &basis);
        let dim = basis.len();
        // build S = e^G column by column
        let mut s = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        for c in 0..dim {
            e[c] = 1.0;
            let col = expm_apply(&gen, &e);
            e[c] = 0.0;
            for r in 0..dim {
                s[(r, c)] = col[r];
            }
        }
        // D = Sᵀ ℍ₀ S should be E₀ + Σ ε n on low sectors
        let d = s.transpose() * h0_dense * &s;
        let low = basis.sector_range(6).end;
        let mut max_off: f64 = 0.0;
        for r in 0..low {
            for c in 0..low {
                if r != c {
                    max_off = max_off.max(d[(r, c)].abs());
                }
            }
        }
        assert!(max_off <= 1e-6, "off-diagonal residue {max_off}");
        // diagonal entries: E₀ + Σ_p occ_p ε_p
        for i in 0..low {
            let occ = basis.state(i);
            let expect: f64 = map.e0
                + occ
                    .iter()
                    .enumerate()
                    .map(|(p, &n)| n as f64 * map.eps[p])
                    .sum::<f64>();
            assert!((d[(i, i)] - expect).abs() < 1e-6, "state {i}");
        }
        // and S|Ω⟩ reproduces χ₀
        let chi0 = chi0_state(&map, &basis, 1e-10).unwrap();
        let s_vac = u0_dag_apply(&map, &basis, &basis.vacuum());
        let overlap: f64 = s_vac.iter().zip(&chi0.coeffs).map(|(a, b)| a * b).sum();
        assert!(overlap > 1.0 - 1e-9, "squeeze vacuum overlap {overlap}");
    }

    #[test]
    fn adaptive_cutoff_reports_defect() {
        let (model, map) = benchmark_map(1, 1.0);
        let (_, chi0) = chi0_state_adaptive(&map, &model.modes, 1e-8).unwrap();
        assert!(chi0.defect < 1e-8);
    }
}
