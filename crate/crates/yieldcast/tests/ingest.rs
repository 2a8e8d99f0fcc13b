use chrono::NaiveDate;
use proptest::prelude::*;
use yieldcast::ingest::{format_date, format_yield, parse_treasury_csv, write_canonical_csv, MissingDataPolicy};
use yieldcast_core::curve::{TermGrid, YieldCurve, YieldSeries};

const HEADER: &str = "Date,1 Mo,3 Mo,6 Mo,1 Yr,2 Yr,3 Yr,5 Yr,7 Yr,10 Yr,20 Yr,30 Yr";

fn series_from(rows: &[Vec<f64>]) -> YieldSeries {
    let d0 = NaiveDate::from_ymd_opt(2009, 3, 2).unwrap();
    let curves = rows
        .iter()
        .enumerate()
        .map(|(i, y)| YieldCurve::new(d0 + chrono::Duration::days(3 * i as i64), y.clone()).unwrap())
        .collect();
    YieldSeries::new(TermGrid::default(), curves).unwrap()
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..20.0, 11), 1..30)
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn canonical_round_trip(rows in rows_strategy()) {
        let s = series_from(&rows);
        let mut buf = Vec::new();
        write_canonical_csv(&s, &mut buf).unwrap();
        let back = parse_treasury_csv(&buf[..], MissingDataPolicy::DropRow).unwrap();
        prop_assert_eq!(back.dropped, 0);
        prop_assert_eq!(back.series.len(), s.len());
        for (a, b) in back.series.curves().iter().zip(s.curves()) {
            prop_assert_eq!(a.date(), b.date());
            prop_assert_eq!(a.yields(), b.yields());
        }
    }

    #[test]
    fn row_order_does_not_matter(rows in rows_strategy(), perm_seed in any::<u64>()) {
        let s = series_from(&rows);
        let mut lines: Vec<String> = s
            .curves()
            .iter()
            .map(|c| {
                let mut l = format_date(c.date());
                for y in c.yields() {
                    l.push(',');
                    l.push_str(&format_yield(*y));
                }
                l
            })
            .collect();
        // cheap deterministic shuffle
        let mut state = perm_seed | 1;
        for i in (1..lines.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            lines.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let text = format!("{HEADER}\n{}\n", lines.join("\n"));
        let back = parse_treasury_csv(text.as_bytes(), MissingDataPolicy::DropRow).unwrap();
        let mut canon_a = Vec::new();
        let mut canon_b = Vec::new();
        write_canonical_csv(&back.series, &mut canon_a).unwrap();
        write_canonical_csv(&s, &mut canon_b).unwrap();
        prop_assert_eq!(canon_a, canon_b);
    }
}

#[test]
fn forward_fill_and_drop_on_gaps() {
    let text = format!(
        "{HEADER}\n03/04/09,1,1,1,1,1,1,1,1,1,1,1\n03/03/09,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0,1.1\n03/05/09,2,N/A,2,2,2,2,2,2,2,,2\n"
    );
    let dropped = parse_treasury_csv(text.as_bytes(), MissingDataPolicy::DropRow).unwrap();
    assert_eq!((dropped.series.len(), dropped.dropped), (2, 1));
    let filled = parse_treasury_csv(text.as_bytes(), MissingDataPolicy::ForwardFill).unwrap();
    assert_eq!((filled.series.len(), filled.filled_cells), (3, 2));
    let last = filled.series.curves()[2].yields();
    assert_eq!(last[1], 1.0);
    assert_eq!(last[9], 1.0);
    assert_eq!(last[0], 2.0);
}
