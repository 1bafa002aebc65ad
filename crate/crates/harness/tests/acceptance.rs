//! Acceptance suite: one PASS/FAIL line per criterion, each backed by the
//! checks of registered experiment bodies at their default configurations.

use parabolic_harness::bank::Bank;
use parabolic_harness::experiments::{cauchy, classical, kernel_audit, ratios};
use parabolic_harness::report::CheckRecord;
use parabolic_harness::{ExperimentConfig, ExperimentReport, Result};
use std::process::ExitCode;
use std::time::Instant;

struct Verdict {
    id: usize,
    title: &'static str,
    checks: Vec<CheckRecord>,
    error: Option<String>,
    seconds: f64,
    limit: Option<f64>,
}

impl Verdict {
    fn passed(&self) -> bool {
        self.error.is_none()
            && !self.checks.is_empty()
            && self.checks.iter().all(|c| c.pass)
            && self.limit.is_none_or(|l| self.seconds <= l)
    }

    fn print(&self) {
        let limit = self.limit.map(|l| format!(", limit {l:.0} s")).unwrap_or_default();
        println!(
            "{} criterion {}: {} ({} checks, {:.1} s{limit})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.checks.len(),
            self.seconds,
        );
        for c in self.checks.iter().filter(|c| !c.pass) {
            println!("    failed {} = {:e} (threshold {:e})", c.name, c.value, c.threshold);
        }
        if let Some(e) = &self.error {
            println!("    aborted: {e}");
        }
        if self.limit.is_some_and(|l| self.seconds > l) {
            println!("    over the runtime limit");
        }
    }
}

fn report(id: &str) -> ExperimentReport {
    ExperimentReport::new(id, &[], serde_json::Value::Null)
}

fn criterion<F>(id: usize, title: &'static str, limit: Option<f64>, body: F) -> Verdict
where
    F: FnOnce(&mut ExperimentReport) -> Result<()>,
{
    let mut rep = report(title);
    let start = Instant::now();
    let error = body(&mut rep).err().map(|e| e.to_string());
    let seconds = start.elapsed().as_secs_f64();
    Verdict { id, title, checks: rep.checks, error, seconds, limit }
}

fn config(id: &str) -> ExperimentConfig {
    ExperimentConfig::defaults(id).unwrap_or_else(|e| panic!("defaults of {id}: {e}"))
}

fn main() -> ExitCode {
    let mut verdicts = Vec::new();

    let audit = config("kernel-audit");
    let fields = audit.built_fields().expect("audit fields");
    let v = criterion(1, "kernel identity suite", Some(60.0), |r| kernel_audit::identities(&audit, &fields, r));
    v.print();
    verdicts.push(v);
    let v = criterion(2, "correction terms", Some(30.0), |r| kernel_audit::multiplication_terms(&audit, &fields, r));
    v.print();
    verdicts.push(v);
    let v = criterion(3, "semigroup property", None, |r| kernel_audit::semigroup(&audit, &fields, r));
    v.print();
    verdicts.push(v);

    let cl = config("classical");
    let v = criterion(4, "classical solvability", None, |r| {
        for (fi, spec) in cl.fields.iter().enumerate() {
            classical::ladder(&cl, &spec.build()?, &format!("f{fi}"), r)?;
        }
        Ok(())
    });
    v.print();
    verdicts.push(v);
    let v = criterion(5, "representation formulas", None, |r| {
        for (fi, spec) in cl.fields.iter().enumerate() {
            classical::representation(&cl, &spec.build()?, &format!("f{fi}"), r)?;
        }
        Ok(())
    });
    v.print();
    verdicts.push(v);

    let v = criterion(6, "Calderón–Zygmund structure", None, |r| kernel_audit::calderon_zygmund(&audit, &fields, r));
    v.print();
    verdicts.push(v);

    let v = criterion(7, "inequality constants", None, |r| {
        let bank = Bank::build(&config("weighted-sobolev"))?;
        ratios::evaluate_weighted_sobolev(&config("weighted-sobolev"), &bank, r)?;
        ratios::evaluate_parabolic_bmo(&config("parabolic-bmo"), &bank, r)?;
        ratios::evaluate_mixed_sobolev(&config("mixed-sobolev"), &bank, r)?;
        ratios::evaluate_mixed_bmo(&config("mixed-bmo"), &bank, r)?;
        ratios::evaluate_mixed_holder(&config("mixed-holder"), &bank, r)
    });
    v.print();
    verdicts.push(v);

    let cc = config("cauchy");
    let v = criterion(8, "Cauchy comparison and Gaussian data", None, |r| cauchy::run(&cc, r));
    v.print();
    verdicts.push(v);

    let v = criterion(9, "weight machinery", None, |r| kernel_audit::weights(&audit, r));
    v.print();
    verdicts.push(v);

    let failed = verdicts.iter().filter(|v| !v.passed()).count();
    println!("{} of {} criteria passed", verdicts.len() - failed, verdicts.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
