//! The acceptance battery: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use padic_stringy::suite::{run_criterion, CRITERIA};

fn run(id: &str) {
    let report = run_criterion(id, 7).expect("known criterion id");
    let status = if report.pass { "PASS" } else { "FAIL" };
    println!(
        "[{status}] criterion {}: {} ({} checks)",
        report.index,
        report.title,
        report.checks.len()
    );
    for check in report.checks.iter().filter(|c| !c.pass) {
        println!("    failed: {} [{}]", check.name, check.anchor);
    }
    assert!(report.pass, "criterion {id} failed");
}

#[test]
fn criterion_1_weil_volume() {
    run("weil");
}

#[test]
fn criterion_2_orbifold_fiber_volume() {
    run("orbvol");
}

#[test]
fn criterion_3_volume_equals_stringy_count() {
    run("volume-bridge");
}

#[test]
fn criterion_4_stringy_sanity() {
    run("stringy-sanity");
}

#[test]
fn criterion_5_twisting() {
    run("twisting");
}

#[test]
fn criterion_6_euler_characteristic() {
    run("euler");
}

#[test]
fn criterion_7_selfdual_isogeny() {
    run("selfdual");
}

#[test]
fn criterion_8_mirror_identities() {
    run("mirror");
}

#[test]
fn criterion_9_pairing_structure() {
    run("pairing");
}

#[test]
fn criteria_table_is_complete() {
    assert_eq!(CRITERIA.len(), 9);
}
