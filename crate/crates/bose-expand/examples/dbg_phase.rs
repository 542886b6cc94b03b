
use bose_expand::fock::enumerate_basis;
use bose_expand::model::CutoffModel;
use num_complex::Complex64;

fn main() {
    let vpre = 32.0;
    let vpost = 36.0;
    let t = 1.0;
    let pre0 = CutoffModel::benchmark(2, vpre, 12).unwrap();
    let post0 = CutoffModel::benchmark(2, vpost, 12).unwrap();
    let layer = bose_expand::dynamics::QuenchLayer::new(&pre0, &post0, 12).unwrap();
    for n in [8usize, 12, 16, 20] {
        let pre = pre0.with_n(n).unwrap();
        let post = post0.with_n(n).unwrap();
        let occ = enumerate_basis(pre.modes.len(), n).unwrap();
        let h_pre = bose_expand::fock::assemble_hamiltonian(&pre, &occ).unwrap();
        let (_, psi0) = bose_expand::oracle::ground_state(&h_pre, 1e-11, 40000, 42).unwrap();
        let h_post = bose_expand::fock::assemble_hamiltonian(&post, &occ).unwrap();
        let psi0_c: Vec<Complex64> = psi0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let psi_t = bose_expand::oracle::evolve(&h_post, &psi0_c, t, 1e-11).unwrap();
        let chi0_t = layer.chi0_at(t);
        let proj = bose_expand::dynamics::project_to_sectors(&chi0_t, &layer.basis, n);
        let a0 = bose_expand::fock::excitation_reconstruct(&proj, &pre.modes, &layer.basis, &occ).unwrap();
        let ov_raw: Complex64 = a0.iter().zip(&psi_t).map(|(a, b)| a.conj() * b).sum();
        let want = ov_raw.arg();
        let applied = -((n as f64) * layer.e_h_post * t) % (2.0 * std::f64::consts::PI);
        let mut diff = applied - want;
        while diff > std::f64::consts::PI { diff -= 2.0 * std::f64::consts::PI; }
        while diff < -std::f64::consts::PI { diff += 2.0 * std::f64::consts::PI; }
        eprintln!("N={n}: |ov|={:.6} phase err={diff:.5} rad, xN={:.4}", ov_raw.norm(), diff * n as f64);
    }
}
