//! Profiles opinion density, drops outliers and draws train and test
//! samples from the bundled SSA fixture.

use std::path::Path;

use opinion_kb::dataset::read_instances;
use opinion_kb::sampler::{density_profile, exclude_outliers, sample_test, sample_train};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ssa_docs.jsonl");
    let docs = read_instances(&path).expect("fixture");
    let profile = density_profile(&docs).unwrap();
    println!(
        "{} documents: Q1 {} Q3 {} IQR {} upper bound {}",
        docs.len(),
        profile.q1,
        profile.q3,
        profile.iqr,
        profile.upper_bound
    );
    let inliers = exclude_outliers(&docs, profile.upper_bound);
    println!("{} inliers kept", inliers.len());

    let train = sample_train(&inliers, 20, 42);
    println!("train strata {:?}", train.plan.strata);
    let test = sample_test(&inliers, 15, 42, 1.5);
    println!("test strata {:?}", test.plan.strata);
    for w in train.warnings.iter().chain(&test.warnings) {
        println!("warning: {w}");
    }
}
