//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use f2rank2::catalog::Catalog;
use f2rank2::classifiers::{ClassificationReport, Status, Suite, Verifier};
use f2rank2::gf2::{quadform_has_nonsingular_rep, QuadForm};
use f2rank2::orbits::KeyCache;

// Time bounds. Everything else is exact: the objects are finite.
const MAIN_BUDGET: Duration = Duration::from_secs(10 * 60);
const NEGATIVE_BUDGET: Duration = Duration::from_secs(30 * 60);
const SPECTRUM_BUDGET: Duration = Duration::from_secs(5 * 60);
const QUADFORM3_BUDGET: Duration = Duration::from_secs(1);
const QUADFORM5_BUDGET: Duration = Duration::from_secs(10 * 60);
const PROPERTY_BUDGET: Duration = Duration::from_secs(2 * 60);

struct Criterion {
    id: &'static str,
    title: &'static str,
    ok: bool,
    detail: String,
}

/// Checks of `report` whose names satisfy `select`; fails when none match.
fn select(report: &ClassificationReport, select: impl Fn(&str) -> bool) -> (bool, String) {
    let picked: Vec<_> = report.checks.iter().filter(|c| select(&c.check)).collect();
    let failed: Vec<String> = picked
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| format!("{} [{}]", c.check, c.detail))
        .collect();
    let ok = !picked.is_empty() && failed.is_empty();
    let detail = if failed.is_empty() {
        format!("{} checks", picked.len())
    } else {
        format!("failed: {}", failed.join("; "))
    };
    (ok, detail)
}

fn within(elapsed: Duration, budget: Duration) -> (bool, String) {
    (
        elapsed <= budget,
        format!("{:.1}s of {}s", elapsed.as_secs_f64(), budget.as_secs()),
    )
}

fn quadform_sweep(n: usize) -> (bool, Duration) {
    let start = Instant::now();
    let ok = QuadForm::all(n).all(|q| match quadform_has_nonsingular_rep(&q) {
        Ok(found) => found.is_some() != q.is_zero(),
        Err(_) => false,
    });
    (ok, start.elapsed())
}

fn main() -> ExitCode {
    let catalog = Catalog::builtin();
    let verifier = Verifier::new(catalog, Arc::new(KeyCache::in_memory()));
    let run = |s: Suite| verifier.run(s);
    let mut out: Vec<Criterion> = Vec::new();
    let mut push = |id, title, (ok, detail): (bool, String)| {
        out.push(Criterion {
            id,
            title,
            ok,
            detail,
        })
    };

    let core = run(Suite::Core);
    let main = run(Suite::Main);
    let negative = |c: &str| c.starts_with("no primitive urk-2 class at");

    let (ok, d) = select(&main, |c| !negative(c));
    let (tok, td) = within(main.elapsed, MAIN_BUDGET);
    push(
        "AC-1",
        "primitive urk-2 classes of Mat3",
        (ok && tok, format!("{d}; {td}")),
    );

    let (ok, d) = select(&main, negative);
    let (tok, td) = within(main.elapsed, NEGATIVE_BUDGET);
    push(
        "AC-2",
        "no primitive urk-2 class at 3x4, 4x3, 4x4",
        (ok && tok, format!("{d}; {td}")),
    );

    push(
        "AC-3",
        "n2 counts of Mata3, U3, V3",
        select(&core, |c| c.starts_with("n2 of")),
    );

    let j3 = run(Suite::J3);
    push(
        "AC-4",
        "J3 invariant tables",
        select(&j3, |c| {
            c.contains("M1..M4")
                || c.contains("N1..N4")
                || c.starts_with("primitive subspaces of J3")
        }),
    );

    let spectrum = run(Suite::Spectrum);
    let (ok, d) = select(&spectrum, |c| {
        [
            "3-dim trivial-spectrum similarity classes",
            "irreducible classes",
            "reducible classes",
            "no 4-dim trivial-spectrum space",
            "T1 is rank-2",
            "T2 equivalent to T3",
            "T2 not similar to T3",
        ]
        .contains(&c)
    });
    let (tok, td) = within(spectrum.elapsed, SPECTRUM_BUDGET);
    push(
        "AC-5",
        "trivial-spectrum similarity classes",
        (ok && tok, format!("{d}; {td}")),
    );

    let affine = run(Suite::Affine);
    let (ok, d) = select(&affine, |c| {
        c == "affine classes"
            || c == "affine classes match the listed translation spaces"
            || c == "I3+T2 equivalent to I3+T3"
    });
    let witness = affine
        .witnesses
        .iter()
        .find(|(l, _)| l == "I3+T2 -> I3+T3")
        .map(|(_, w)| format!("P={} Q={}", w.p, w.q));
    push(
        "AC-6",
        "affine spaces inside GL3",
        (
            ok && witness.is_some(),
            format!(
                "{d}; witness {}",
                witness.unwrap_or_else(|| "missing".into())
            ),
        ),
    );

    let maximal = run(Suite::Maximal);
    let (ok, d) = select(&maximal, |_| true);
    let (ok3, t3) = quadform_sweep(3);
    let (ok5, t5) = quadform_sweep(5);
    let (b3, d3) = within(t3, QUADFORM3_BUDGET);
    let (b5, d5) = within(t5, QUADFORM5_BUDGET);
    push(
        "AC-7",
        "the six maximal spaces",
        (
            ok && ok3 && ok5 && b3 && b5,
            format!("{d}; n=3 sweep {d3}; n=5 sweep {d5}"),
        ),
    );

    let lld = run(Suite::Lld);
    push("AC-8", "minimal LLD spaces", select(&lld, |_| true));

    let (ok, d) = select(&core, |c| c.contains("Beasley"));
    let ws: Vec<String> = core
        .witnesses
        .iter()
        .filter(|(l, _)| l.contains("-> V3"))
        .map(|(l, w)| format!("{l}: P={} Q={}", w.p, w.q))
        .collect();
    push(
        "AC-9",
        "Beasley spaces",
        (ok && ws.len() == 2, format!("{d}; {}", ws.join("; "))),
    );

    let properties = [
        "rank agrees with minors on Mat3",
        "block identity on rank <= 2 matrices of Mat3 and Mat3x4",
        "M adj(M) = det(M) I on Mat3",
        "equivalence keys invariant under random actions",
        "double dual equivalent to the space",
        "hyperplane form of deletion conditions matches GL3 search",
    ];
    let (ok, d) = select(&core, |c| properties.contains(&c));
    let (tok, td) = within(core.elapsed, PROPERTY_BUDGET);
    push(
        "AC-10",
        "property suites",
        (ok && tok && d.starts_with("6 "), format!("{d}; {td}")),
    );

    let mut all = true;
    for c in &out {
        all &= c.ok;
        println!(
            "{} {:<5} {} ({})",
            if c.ok { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            c.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
