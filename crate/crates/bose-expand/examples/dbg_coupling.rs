use bose_expand::fock::{enumerate_basis, ExcitationBasis};
use bose_expand::model::CutoffModel;
use num_complex::Complex64;

fn main() {
    for vhat in [1.0, 3.0, 6.0, 10.0] {
        let template = CutoffModel::benchmark(2, vhat, 12).unwrap();
        let hartree = bose_expand::hartree::minimize_hartree_torus(&template);
        let h0 = bose_expand::bogoliubov::assemble_h0(&template, &hartree).unwrap();
        let map = bose_expand::bogoliubov::diagonalize(&h0, &template).unwrap();
        let h1 = bose_expand::perturbation::assemble_h1(&template);
        let chi1 = bose_expand::perturbation::compute_chi1(&map, &h1, &template.modes).unwrap();
        let big = ExcitationBasis::new(&template.modes, 12);
        let chi0 = bose_expand::bogoliubov::chi0_state(&map, &big, 1e-8).unwrap();
        let chi1_lab = bose_expand::perturbation::chi1_lab(&chi1, &map, &big);

        let mut errs = Vec::new();
        for n in [8usize, 12, 16, 20, 24] {
            let nf = n as f64;
            let model = template.with_n(n).unwrap();
            let basis = enumerate_basis(model.modes.len(), n).unwrap();
            let h = bose_expand::fock::assemble_hamiltonian(&model, &basis).unwrap();
            let (_, mut psi) = bose_expand::oracle::ground_state(&h, 1e-11, 40000, 42).unwrap();
            let proj = |v: &[f64]| -> Vec<Complex64> {
                v.iter().enumerate().map(|(j, &x)| if big.sector_of(j) <= n { Complex64::new(x, 0.0) } else { Complex64::new(0.0, 0.0) }).collect()
            };
            let psi0 = bose_expand::fock::excitation_reconstruct(&proj(&chi0.coeffs), &template.modes, &big, &basis).unwrap();
            let psi1 = bose_expand::fock::excitation_reconstruct(&proj(&chi1_lab), &template.modes, &big, &basis).unwrap();
            let ov: f64 = psi0.iter().zip(&psi).map(|(a, b)| a.re * b).sum();
            if ov < 0.0 { psi.iter_mut().for_each(|x| *x = -*x); }
            let mut d0 = 0.0; let mut d1 = 0.0;
            for j in 0..basis.len() {
                let a0 = psi[j] - psi0[j].re;
                let a1 = psi[j] - psi0[j].re - psi1[j].re / nf.sqrt();
                d0 += a0 * a0; d1 += a1 * a1;
            }
            errs.push((nf, d0.sqrt(), d1.sqrt()));
        }
        let pts0: Vec<(f64,f64)> = errs.iter().map(|e| (e.0, e.1)).collect();
        let pts1: Vec<(f64,f64)> = errs.iter().map(|e| (e.0, e.2)).collect();
        let f0 = bose_expand::oracle::fit_power_law(&pts0, -0.5, 9.0).unwrap();
        let f1 = bose_expand::oracle::fit_power_law(&pts1, -1.0, 9.0).unwrap();
        println!("vhat={vhat}: |chi1|={:.4e}  slope0={:.3} slope1={:.3}  err0(N=16)={:.3e} err1(N=16)={:.3e}",
            bose_expand::util::norm2(&chi1_lab), f0.slope, f1.slope, errs[2].1, errs[2].2);
    }
}
