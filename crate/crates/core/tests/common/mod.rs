//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;
use seizure_freq::label::{DurationUnit, FrequencyLabel, Quantity, TimeUnit};

pub fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![
        (1u32..=1000).prop_map(f64::from),
        (1u32..=1_000_000).prop_map(|k| f64::from(k) / 1000.0),
        1e-6f64..1e6,
    ]
}

pub fn quantity() -> impl Strategy<Value = Quantity> {
    prop_oneof![
        4 => positive().prop_map(Quantity::Exact),
        2 => (positive(), positive())
            .prop_filter_map("empty range", |(a, b)| {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                (lo < hi).then_some(Quantity::Range { lo, hi })
            }),
        1 => Just(Quantity::Multiple),
    ]
}

pub fn time_unit() -> impl Strategy<Value = TimeUnit> {
    prop_oneof![
        Just(TimeUnit::Day),
        Just(TimeUnit::Week),
        Just(TimeUnit::Month),
        Just(TimeUnit::Year)
    ]
}

pub fn label() -> impl Strategy<Value = FrequencyLabel> {
    prop_oneof![
        1 => Just(FrequencyLabel::Unknown),
        1 => Just(FrequencyLabel::NoSeizureReference),
        2 => (quantity(), prop_oneof![Just(DurationUnit::Month), Just(DurationUnit::Year)])
            .prop_map(|(duration, unit)| FrequencyLabel::SeizureFree { duration, unit }),
        6 => (quantity(), quantity(), time_unit())
            .prop_map(|(count, per, unit)| FrequencyLabel::Rate { count, per, unit }),
        4 => (quantity(), quantity(), time_unit(), quantity()).prop_map(|(clusters, per, unit, per_cluster)| {
            FrequencyLabel::Cluster { clusters, per, unit, per_cluster }
        }),
        1 => quantity().prop_map(|per_cluster| FrequencyLabel::UnknownCluster { per_cluster }),
    ]
}

/// Seizures per month computed straight from the conversion rules:
/// day x30, week x4, month x1, year /12, `multiple` = 3, ranges take their
/// lower bound, 3 dp rounding, clamp to [0.001, 999], sentinels 0 and 1000.
pub fn oracle_per_month(l: &FrequencyLabel) -> f64 {
    fn q(v: &Quantity) -> f64 {
        match v {
            Quantity::Exact(x) => *x,
            Quantity::Range { lo, .. } => *lo,
            Quantity::Multiple => 3.0,
        }
    }
    fn per_month(u: TimeUnit) -> f64 {
        match u {
            TimeUnit::Day => 30.0,
            TimeUnit::Week => 4.0,
            TimeUnit::Month => 1.0,
            TimeUnit::Year => 1.0 / 12.0,
        }
    }
    let rate = match l {
        FrequencyLabel::Unknown | FrequencyLabel::NoSeizureReference | FrequencyLabel::UnknownCluster { .. } => {
            return 1000.0
        }
        FrequencyLabel::SeizureFree { .. } => return 0.0,
        FrequencyLabel::Rate { count, per, unit } => q(count) / q(per) * per_month(*unit),
        FrequencyLabel::Cluster { clusters, per, unit, per_cluster } => {
            q(clusters) / q(per) * per_month(*unit) * q(per_cluster)
        }
    };
    let r = (rate * 1000.0).round() / 1000.0;
    r.clamp(0.001, 999.0)
}

/// Purist bin lookup by linear scan over upper bounds. Returns the purist
/// abbreviation.
pub fn oracle_purist(x: f64) -> &'static str {
    if x == 0.0 {
        return "NS";
    }
    if x == 1000.0 {
        return "UNK";
    }
    let bins = [
        (0.16, "<1/6M"),
        (0.18, "1/6M"),
        (0.99, "(1/6M,1/M)"),
        (1.1, "1/M"),
        (3.9, "(1/M,1/W)"),
        (4.1, "1/W"),
        (29.0, "(1/W,1/D)"),
        (999.0, "≥1/D"),
    ];
    for (hi, name) in bins {
        if x <= hi {
            return name;
        }
    }
    panic!("{x} is outside the binning domain")
}

pub fn oracle_pragmatic(x: f64) -> &'static str {
    match x {
        x if x == 0.0 => "NS",
        x if x == 1000.0 => "UNK",
        x if x <= 1.1 => "infrequent",
        _ => "frequent",
    }
}

/// Integer cells recovered from a published per-class report.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovered {
    pub tp: Vec<usize>,
    pub predicted: Vec<usize>,
    pub support: Vec<usize>,
}

fn r4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

/// Exhaustive search for integer true positives and predicted totals that
/// reproduce each row's 4 dp precision and recall. Rows with zero precision
/// and recall leave their predicted total open; the slack `n - sum(known)`
/// is spread over them evenly. Panics unless every other row has exactly
/// one solution.
pub fn back_compute(rows: &[(f64, f64, usize)], n: usize) -> Recovered {
    let mut tp = Vec::new();
    let mut predicted: Vec<Option<usize>> = Vec::new();
    for &(p, r, s) in rows {
        let tps: Vec<usize> = (0..=s).filter(|&t| r4(t as f64 / s as f64) == r).collect();
        assert_eq!(tps.len(), 1, "recall {r} with support {s}: {tps:?}");
        let t = tps[0];
        tp.push(t);
        if t == 0 {
            assert_eq!(p, 0.0);
            predicted.push(None);
            continue;
        }
        let ps: Vec<usize> = (t..=n).filter(|&q| r4(t as f64 / q as f64) == p).collect();
        assert_eq!(ps.len(), 1, "precision {p} with tp {t}: {ps:?}");
        predicted.push(Some(ps[0]));
    }
    let known: usize = predicted.iter().flatten().sum();
    let open = predicted.iter().filter(|p| p.is_none()).count();
    let slack = n - known;
    let mut left = slack;
    let mut k = 0;
    let predicted = predicted
        .into_iter()
        .map(|p| {
            p.unwrap_or_else(|| {
                k += 1;
                let share = if k == open { left } else { slack / open };
                left -= share;
                share
            })
        })
        .collect();
    Recovered {
        tp,
        predicted,
        support: rows.iter().map(|r| r.2).collect(),
    }
}

/// A confusion matrix with the recovered diagonal and off-diagonal cells
/// that meet the row (support) and column (predicted) margins, found by
/// augmenting-path max flow with the diagonal blocked.
pub fn matrix_from(rec: &Recovered) -> Vec<Vec<usize>> {
    let k = rec.tp.len();
    let row: Vec<usize> = (0..k).map(|i| rec.support[i] - rec.tp[i]).collect();
    let col: Vec<usize> = (0..k).map(|i| rec.predicted[i] - rec.tp[i]).collect();
    assert_eq!(row.iter().sum::<usize>(), col.iter().sum::<usize>(), "margins disagree");
    // nodes: 0 source, 1..=k rows, k+1..=2k cols, 2k+1 sink
    let nodes = 2 * k + 2;
    let sink = nodes - 1;
    let mut cap = vec![vec![0i64; nodes]; nodes];
    for i in 0..k {
        cap[0][1 + i] = row[i] as i64;
        cap[1 + k + i][sink] = col[i] as i64;
        for j in 0..k {
            if i != j {
                cap[1 + i][1 + k + j] = i64::MAX / 4;
            }
        }
    }
    let orig = cap.clone();
    loop {
        let mut prev = vec![usize::MAX; nodes];
        prev[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..nodes {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut f = i64::MAX;
        let mut v = sink;
        while v != 0 {
            f = f.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = sink;
        while v != 0 {
            cap[prev[v]][v] -= f;
            cap[v][prev[v]] += f;
            v = prev[v];
        }
    }
    let mut m = vec![vec![0usize; k]; k];
    for i in 0..k {
        m[i][i] = rec.tp[i];
        for j in 0..k {
            if i != j {
                m[i][j] = (orig[1 + i][1 + k + j] - cap[1 + i][1 + k + j]) as usize;
            }
        }
        assert_eq!(m[i].iter().sum::<usize>(), rec.support[i], "row {i} not met");
    }
    for j in 0..k {
        assert_eq!((0..k).map(|i| m[i][j]).sum::<usize>(), rec.predicted[j], "column {j} not met");
    }
    m
}

/// Published pragmatic rows: precision, recall, support.
pub const PRAGMATIC_ROWS: [(f64, f64, usize); 4] = [
    (0.6471, 0.6875, 32),
    (0.8442, 0.9028, 72),
    (0.9156, 0.8650, 163),
    (0.7429, 0.7879, 33),
];

/// Published purist rows: precision, recall, support.
pub const PURIST_ROWS: [(f64, f64, usize); 10] = [
    (0.2500, 0.2000, 5),
    (0.0000, 0.0000, 2),
    (0.5263, 0.5263, 19),
    (0.2000, 0.3333, 6),
    (0.5789, 0.5789, 19),
    (0.0000, 0.0000, 4),
    (0.7083, 0.6538, 26),
    (0.6129, 0.8261, 23),
    (0.9156, 0.8650, 163),
    (0.7429, 0.7879, 33),
];

pub const PRAGMATIC_F1: [f64; 4] = [0.6667, 0.8725, 0.8896, 0.7647];
pub const PURIST_F1: [f64; 10] = [0.2222, 0.0, 0.5263, 0.2500, 0.5789, 0.0, 0.6800, 0.7037, 0.8896, 0.7647];

pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}
