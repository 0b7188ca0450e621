//! Acceptance run: one line per criterion with its runtime budget.
//!
//! Set `BDTK_ACCEPT_SEED` to rerun with another corpus.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bdtk::verify::{run_suite, VerifyReport};

struct Criterion {
    id: u32,
    name: &'static str,
    suites: &'static [&'static str],
    budget_s: u64,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "generator relations", suites: &["generator-relations"], budget_s: 5 },
    Criterion { id: 2, name: "Toeplitz map properties", suites: &["toeplitz-properties"], budget_s: 10 },
    Criterion { id: 3, name: "correction exactness", suites: &["correction"], budget_s: 30 },
    Criterion { id: 4, name: "correction estimate", suites: &["correction-estimate"], budget_s: 60 },
    Criterion { id: 5, name: "norm axioms", suites: &["mn-norms", "p-norms"], budget_s: 60 },
    Criterion { id: 6, name: "Toeplitz-compact estimates", suites: &["toeplitz-compact-estimates"], budget_s: 60 },
    Criterion { id: 7, name: "Bloch norm consistency", suites: &["bloch-norm"], budget_s: 120 },
    Criterion { id: 8, name: "exponential bounds", suites: &["exp-bounds"], budget_s: 120 },
    Criterion { id: 9, name: "inversion", suites: &["inversion"], budget_s: 120 },
    Criterion { id: 10, name: "derivation round trip", suites: &["derivations"], budget_s: 60 },
    Criterion { id: 11, name: "Fredholm index", suites: &["index"], budget_s: 60 },
    Criterion { id: 12, name: "G_S arithmetic", suites: &["gs"], budget_s: 5 },
];

fn describe(reports: &[VerifyReport]) -> String {
    let checks: usize = reports.iter().map(|r| r.records.len()).sum();
    let failed: usize = reports.iter().map(|r| r.failed()).sum();
    format!("{} checks, {failed} failed", checks)
}

fn main() -> ExitCode {
    let seed = std::env::var("BDTK_ACCEPT_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let mut all_ok = true;
    for c in CRITERIA {
        let start = Instant::now();
        let reports: Result<Vec<VerifyReport>, _> = c.suites.iter().map(|s| run_suite(s, seed, None)).collect();
        let elapsed = start.elapsed();
        let within = elapsed < Duration::from_secs(c.budget_s);
        let (ok, detail) = match &reports {
            Ok(r) => (r.iter().all(|r| r.all_pass()), describe(r)),
            Err(e) => (false, e.to_string()),
        };
        let pass = ok && within;
        all_ok &= pass;
        println!(
            "criterion {:>2} {:<28} {} ({:.2}s, budget {}s; {})",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.budget_s,
            detail
        );
        if let Ok(r) = &reports {
            for f in r.iter().flat_map(|r| r.failures()).take(5) {
                println!(
                    "    case {} [{}] {}: lhs {:e} rhs {:e} tol {:e}{}",
                    f.id,
                    f.digest,
                    f.check,
                    f.lhs,
                    f.rhs,
                    f.tolerance,
                    f.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
                );
            }
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
