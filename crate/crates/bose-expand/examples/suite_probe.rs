use bose_expand::validate::{run_suite, SuiteConfig};

fn main() {
    let suite = std::env::args().nth(1).unwrap_or_else(|| "full".into());
    let cfg = SuiteConfig::default();
    let t0 = std::time::Instant::now();
    match run_suite(&suite, &cfg) {
        Ok(summary) => {
            for o in &summary.outcomes {
                println!("== {} [{}] ({:.1}s)", o.id, if o.pass { "PASS" } else { "FAIL" }, o.runtime.as_secs_f64());
                for c in &o.checks {
                    println!(
                        "   {} {}: {:.6} in [{:.4}, {:.4}]",
                        if c.pass { "ok " } else { "FAIL" },
                        c.name, c.measured, c.lo, c.hi
                    );
                }
            }
            println!("overall: {} ({:.1}s)", summary.overall, t0.elapsed().as_secs_f64());
        }
        Err(e) => {
            eprintln!("suite error: {e}");
            std::process::exit(1);
        }
    }
}
