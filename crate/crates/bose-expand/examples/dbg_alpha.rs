use bose_expand::edgeworth::{self, ObservableKind};
use bose_expand::model::CutoffModel;

fn main() {
    for vhat in [20.0] {
        let template = CutoffModel::benchmark(2, vhat, 12).unwrap();
        let hartree = bose_expand::hartree::minimize_hartree_torus(&template);
        let map = bose_expand::bogoliubov::diagonalize(
            &bose_expand::bogoliubov::assemble_h0(&template, &hartree).unwrap(), &template).unwrap();
        let b = ObservableKind::HoppingTwo.matrix(&template.modes);
        let obs = edgeworth::compute_nu_sigma(&b, &template, &map).unwrap();
        // oracle kappa3 points
        let ns: Vec<usize> = (8..=24).step_by(2).collect();
        let est = edgeworth::estimate_alpha_oracle(&template, &b, &ns, obs.sigma, 1e-11, 42, 4).unwrap();
        println!("vhat={vhat}: oracle alpha = {:.6} ± {:.6}", est.value, est.error);
        for (n, y) in &est.points { println!("   N={n}: sqrtN*k3 = {y:.6}"); }
        let pert = edgeworth::estimate_alpha_perturbative(&template, &b,
            &[48, 64, 96, 128, 192, 256], obs.sigma).unwrap();
        println!("vhat={vhat}: pert alpha = {:.6} ± {:.6}", pert.value, pert.error);
        for (n, y) in &pert.points { println!("   N={n}: sqrtN*k3 = {y:.6}"); }
    }
}
