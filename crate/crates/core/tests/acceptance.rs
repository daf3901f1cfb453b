use std::process::ExitCode;

use spider_bm::acceptance::{run_suite, SuiteConfig, N_CRITERIA};

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let ids: Vec<u8> = (1..=N_CRITERIA).collect();
    let mut failed = 0;
    println!("acceptance suite, seed {:#x}", cfg.seed);
    for report in run_suite(&ids, &cfg) {
        println!("{}", report.summary());
        for check in &report.checks {
            println!("{check}");
        }
        if !report.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", ids.len() - failed, ids.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
