use frontier_cpd::model::TrimBox;
use frontier_cpd::stat::MemberScan;
use frontier_cpd::{quasi_lr_scan, quasi_lr_scan_cell, GridCell, ScoreSeries, Series};
use proptest::prelude::*;

fn score_series() -> impl Strategy<Value = ScoreSeries<f64>> {
    prop::collection::vec(
        (
            (0u8..=8).prop_map(|k| k as f64 / 8.0),
            prop::bool::weighted(0.8),
        ),
        1..=60,
    )
    .prop_map(|v| {
        let (r_hat, active): (Vec<f64>, Vec<bool>) = v
            .into_iter()
            .map(|(r, a)| (if a { r } else { 0.0 }, a))
            .unzip();
        ScoreSeries {
            r_hat,
            active,
            x0: TrimBox::zeros(1),
            zero_frontier: 0,
        }
    })
}

/// Recomputes one statistic from scratch.
fn naive(s: &ScoreSeries<f64>, t1: usize, tau: usize) -> f64 {
    let members: Vec<f64> = (t1..=tau)
        .filter(|&t| s.active[t - 1])
        .map(|t| s.r_hat[t - 1])
        .collect();
    if members.is_empty() {
        return 0.0;
    }
    let m = members.iter().cloned().fold(f64::MIN, f64::max);
    if m == 0.0 {
        2.0 * members.len() as f64 * 709.0
    } else {
        -2.0 * members.len() as f64 * m.ln()
    }
}

proptest! {
    #[test]
    fn scan_equals_naive(s in score_series()) {
        let n = s.len();
        for t1 in 1..=n {
            let scan = quasi_lr_scan(&s, t1, n).unwrap();
            for st in &scan {
                prop_assert_eq!(st.value, naive(&s, t1, st.tau));
                prop_assert!(st.value >= 0.0);
            }
            for w in scan.windows(2) {
                prop_assert!(w[0].n_active <= w[1].n_active);
                prop_assert!(w[0].max_score.unwrap_or(0.0) <= w[1].max_score.unwrap_or(0.0));
            }
        }
    }

    #[test]
    fn sparse_window_max_equals_dense_argmax(s in score_series()) {
        let n = s.len();
        let ms = MemberScan::active(&s, n);
        for t1 in 1..=n {
            for t2 in t1..=n {
                let dense = quasi_lr_scan(&s, t1, t2).unwrap();
                let best = dense.iter().fold(&dense[0], |b, st| if st.value >= b.value { st } else { b });
                let w = ms.window_max(t1, t2);
                prop_assert_eq!((w.tau, w.value), (best.tau, best.value));
                prop_assert_eq!(ms.dense(t1, t2), dense);
            }
        }
    }

    #[test]
    fn full_cell_equals_trimmed_scan(s in score_series()) {
        let n = s.len().max(2);
        let mut s = s;
        s.r_hat.resize(n, 0.5);
        s.active.resize(n, true);
        let rows = (1..=n).map(|t| (vec![1.0 + t as f64 / n as f64], 1.0)).collect();
        let series = Series::from_rows(rows).unwrap();
        let cell = GridCell { lo: vec![0.0], hi: vec![2.0], scale: 0 };
        prop_assert_eq!(quasi_lr_scan_cell(&series, &s, &cell, 1, n).unwrap(), quasi_lr_scan(&s, 1, n).unwrap());
    }
}
