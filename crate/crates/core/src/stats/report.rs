//! Plain-text and CSV renderings of the evaluation results.

use std::fmt::Write;

use super::{per_pattern_accuracy, AnovaResult, ConfusionMatrix, PairwiseResult, StatsError};

/// Fixed-point formatting without a sign on values that round to zero.
fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        _ => s,
    }
}

type Header = Vec<String>;
type Rows = Vec<Vec<String>>;

fn csv_line(cells: &[String]) -> String {
    let mut line = cells
        .iter()
        .map(|c| {
            if c.contains([',', '"', '\n']) {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

fn text_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn confusion_rows(cm: &ConfusionMatrix) -> (Header, Rows) {
    let header = std::iter::once("true\\pred".to_string())
        .chain(cm.labels.iter().cloned())
        .collect();
    let rows = cm
        .labels
        .iter()
        .zip(cm.row_percent())
        .map(|(l, pct)| {
            std::iter::once(l.clone())
                .chain(pct.iter().map(|p| fixed(*p, 1)))
                .collect()
        })
        .collect();
    (header, rows)
}

/// Row percentages with one decimal.
pub fn confusion_text(cm: &ConfusionMatrix) -> String {
    let (h, r) = confusion_rows(cm);
    text_table(&h, &r)
}

pub fn confusion_csv(cm: &ConfusionMatrix) -> String {
    let (h, r) = confusion_rows(cm);
    std::iter::once(&h)
        .chain(&r)
        .map(|row| csv_line(row))
        .collect()
}

fn accuracy_rows(cm: &ConfusionMatrix) -> Result<(Header, Rows, f64), StatsError> {
    let acc = per_pattern_accuracy(cm)?;
    let header = ["pattern", "correct", "total", "accuracy_pct"]
        .map(String::from)
        .to_vec();
    let rows = acc
        .iter()
        .enumerate()
        .map(|(i, a)| {
            vec![
                cm.labels[i].clone(),
                cm.counts[i][i].to_string(),
                cm.row_sum(i).to_string(),
                fixed(100.0 * a, 1),
            ]
        })
        .collect();
    let mean = 100.0 * acc.iter().sum::<f64>() / acc.len().max(1) as f64;
    Ok((header, rows, mean))
}

pub fn accuracy_text(cm: &ConfusionMatrix) -> Result<String, StatsError> {
    let (h, r, mean) = accuracy_rows(cm)?;
    let mut out = text_table(&h, &r);
    writeln!(out, "mean accuracy: {mean:.1}%").expect("write to string");
    Ok(out)
}

/// Per-pattern rows followed by a `mean` row.
pub fn accuracy_csv(cm: &ConfusionMatrix) -> Result<String, StatsError> {
    let (h, mut r, mean) = accuracy_rows(cm)?;
    r.push(vec![
        "mean".into(),
        String::new(),
        String::new(),
        fixed(mean, 1),
    ]);
    Ok(std::iter::once(&h)
        .chain(&r)
        .map(|row| csv_line(row))
        .collect())
}

fn anova_rows(a: &AnovaResult) -> (Header, Rows) {
    let header = ["source", "ss", "df", "ms", "f", "p"]
        .map(String::from)
        .to_vec();
    let rows = vec![
        vec![
            "between".into(),
            fixed(a.ss_between, 6),
            a.df_between.to_string(),
            fixed(a.ms_between, 6),
            fixed(a.f_stat, 4),
            format!("{:.3e}", a.p_value),
        ],
        vec![
            "within".into(),
            fixed(a.ss_within, 6),
            a.df_within.to_string(),
            fixed(a.ms_within, 6),
            String::new(),
            String::new(),
        ],
        vec![
            "total".into(),
            fixed(a.ss_between + a.ss_within, 6),
            (a.df_between + a.df_within).to_string(),
            String::new(),
            String::new(),
            String::new(),
        ],
    ];
    (header, rows)
}

pub fn anova_text(a: &AnovaResult) -> String {
    let (h, r) = anova_rows(a);
    let mut out = text_table(&h, &r);
    writeln!(
        out,
        "F({}, {}) = {:.4}, p = {:.3e}",
        a.df_between, a.df_within, a.f_stat, a.p_value
    )
    .expect("write to string");
    out
}

pub fn anova_csv(a: &AnovaResult) -> String {
    let (h, r) = anova_rows(a);
    std::iter::once(&h)
        .chain(&r)
        .map(|row| csv_line(row))
        .collect()
}

fn pairwise_rows(test: &str, results: &[PairwiseResult], names: &[String]) -> (Header, Rows) {
    let header = [
        "test",
        "a",
        "b",
        "mean_diff",
        "statistic",
        "critical",
        "raw_p",
        "adjusted_p",
        "significant",
        "degenerate",
    ]
    .map(String::from)
    .to_vec();
    let name = |i: usize| names.get(i).cloned().unwrap_or_else(|| i.to_string());
    let rows = results
        .iter()
        .map(|r| {
            vec![
                test.to_string(),
                name(r.pair.0),
                name(r.pair.1),
                fixed(r.mean_diff, 6),
                fixed(r.statistic, 4),
                r.critical_value.map(|c| fixed(c, 4)).unwrap_or_default(),
                format!("{:.3e}", r.raw_p),
                format!("{:.3e}", r.adjusted_p),
                r.significant.to_string(),
                r.degenerate.to_string(),
            ]
        })
        .collect();
    (header, rows)
}

pub fn pairwise_text(test: &str, results: &[PairwiseResult], names: &[String]) -> String {
    let (h, r) = pairwise_rows(test, results, names);
    text_table(&h, &r)
}

pub fn pairwise_csv(test: &str, results: &[PairwiseResult], names: &[String]) -> String {
    let (h, r) = pairwise_rows(test, results, names);
    std::iter::once(&h)
        .chain(&r)
        .map(|row| csv_line(row))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::one_way_anova;

    fn cm() -> ConfusionMatrix {
        ConfusionMatrix::new(
            vec!["L1".into(), "L2+R1".into()],
            vec![vec![2, 1], vec![0, 4]],
        )
        .unwrap()
    }

    #[test]
    fn confusion_is_in_percent_with_one_decimal() {
        let csv = confusion_csv(&cm());
        assert_eq!(csv, "true\\pred,L1,L2+R1\nL1,66.7,33.3\nL2+R1,0.0,100.0\n");
        assert!(confusion_text(&cm()).contains("66.7"));
    }

    #[test]
    fn accuracy_tables() {
        let csv = accuracy_csv(&cm()).unwrap();
        assert!(csv.ends_with("mean,,,83.3\n"));
        assert!(accuracy_text(&cm())
            .unwrap()
            .contains("mean accuracy: 83.3%"));
    }

    #[test]
    fn anova_table() {
        let a = one_way_anova(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let text = anova_text(&a);
        assert!(text.contains("F(1, 4) = 13.5000"));
        assert!(anova_csv(&a)
            .starts_with("source,ss,df,ms,f,p\nbetween,13.500000,1,13.500000,13.5000,"));
    }

    #[test]
    fn no_negative_zero() {
        assert_eq!(fixed(-1e-12, 6), "0.000000");
        assert_eq!(fixed(-0.5, 1), "-0.5");
    }
}
