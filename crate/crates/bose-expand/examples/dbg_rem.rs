use bose_expand::fock::{enumerate_basis, ExcitationBasis};
use bose_expand::model::CutoffModel;
use num_complex::Complex64;

fn main() {
    let template = CutoffModel::benchmark(2, 1.0, 12).unwrap();
    let small = ExcitationBasis::new(&template.modes, 6);
    let mut xi = vec![0.0; small.len()];
    xi[small.index_of(&[0, 0, 1, 0]).unwrap()] = 1.0;

    let hartree = bose_expand::hartree::minimize_hartree_torus(&template);
    let h0 = bose_expand::bogoliubov::assemble_h0(&template, &hartree).unwrap();
    let h0m = bose_expand::bogoliubov::h0_monomials(&h0);
    let h1 = bose_expand::perturbation::assemble_h1(&template);
    let h2 = bose_expand::perturbation::assemble_h2(&template);
    let e_h = hartree.e_h;

    for n in [6usize, 10, 14, 18] {
        let nf = n as f64;
        let model = template.with_n(n).unwrap();
        let occ = enumerate_basis(model.modes.len(), n).unwrap();
        let h = bose_expand::fock::assemble_hamiltonian(&model, &occ).unwrap();
        let xi_c: Vec<Complex64> = xi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let psi = bose_expand::fock::excitation_reconstruct(&xi_c, &model.modes, &small, &occ).unwrap();
        let psi_r: Vec<f64> = psi.iter().map(|z| z.re).collect();
        let mut hpsi = h.apply_vec(&psi_r);
        for (hp, p) in hpsi.iter_mut().zip(&psi_r) { *hp -= nf * e_h * p; }
        let full = ExcitationBasis::new(&model.modes, n);
        let exact = bose_expand::fock::decompose_real(&hpsi, &model.modes, &occ, &full).unwrap();
        let y0 = bose_expand::ladder::apply_monomials(&h0m, &small, &xi);
        let y1 = bose_expand::ladder::apply_monomials(&h1, &small, &xi);
        let y2 = bose_expand::ladder::apply_monomials(&h2, &small, &xi);
        let mut odd2 = 0.0;
        let mut even2 = 0.0;
        for idx in 0..full.len() {
            let st = full.state(idx);
            let sector: usize = st.iter().map(|&x| x as usize).sum();
            let expansion = if sector <= 6 {
                let j = small.index_of(st).unwrap();
                y0[j] + y1[j] / nf.sqrt() + y2[j] / nf
            } else { 0.0 };
            let d = exact[idx] - expansion;
            if sector % 2 == 0 { even2 += d * d; } else { odd2 += d * d; }
        }
        println!("N={n}: odd-sector rem {:.6e} (x N^1.5: {:.4}), even-sector rem {:.6e} (x N^2: {:.4})",
            odd2.sqrt(), odd2.sqrt() * nf.powf(1.5), even2.sqrt(), even2.sqrt() * nf * nf);
    }
}
