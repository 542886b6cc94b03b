use bose_expand::model::CutoffModel;

fn main() {
    let ns: Vec<usize> = (6..=20).step_by(2).collect();
    for (vpre, vpost) in [(20.0, 40.0), (32.0, 48.0), (32.0, 40.0), (40.0, 52.0)] {
        let pre = CutoffModel::benchmark(2, vpre, 12).unwrap();
        let post = CutoffModel::benchmark(2, vpost, 12).unwrap();
        match bose_expand::dynamics::norm_error_report(&pre, &post, 1.0, &ns, 12, 1e-11, 42, 4) {
            Ok(rep) => {
                let f0 = bose_expand::oracle::fit_power_law(&rep.errors0, -0.5, 9.0).unwrap();
                let f1 = bose_expand::oracle::fit_power_law(&rep.errors1, -1.0, 9.0).unwrap();
                eprintln!("quench {vpre}->{vpost}: slope0={:.3} slope1={:.3}", f0.slope, f1.slope);
                for i in [0usize, 3, 7] {
                    eprintln!("   N={}: err0={:.4e} err1={:.4e}", rep.errors0[i].0, rep.errors0[i].1, rep.errors1[i].1);
                }
            }
            Err(e) => eprintln!("quench {vpre}->{vpost}: ERROR {e}"),
        }
    }
}
