//! Mean and standard deviation of metrics over repeated runs.

use seizure_freq::binning::PragmaticClass;
use seizure_freq::metrics::{aggregate_runs, class_report, ConfusionMatrix, SdKind};

fn main() {
    let runs = [
        vec![vec![22, 6, 2, 2, 0], vec![4, 65, 3, 0, 0], vec![6, 5, 141, 8, 3], vec![2, 1, 4, 26, 0]],
        vec![vec![20, 8, 2, 2, 0], vec![5, 63, 4, 0, 0], vec![7, 4, 144, 6, 2], vec![1, 2, 4, 25, 1]],
        vec![vec![23, 5, 3, 1, 0], vec![3, 66, 3, 0, 0], vec![6, 6, 139, 9, 3], vec![2, 1, 3, 27, 0]],
    ];
    let reports: Vec<_> = runs
        .iter()
        .map(|m| class_report(&ConfusionMatrix::<PragmaticClass>::from_counts(m)))
        .collect();
    for kind in [SdKind::Population, SdKind::Sample] {
        println!("{}", aggregate_runs(&reports, kind).unwrap().render());
    }
}
