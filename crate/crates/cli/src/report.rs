//! Text table and per-metric series for a set of metric reports.

use jfp::metrics::MetricReport;

pub const COLUMNS: [&str; 9] = [
    "overlap_all",
    "overlap_av",
    "minADE",
    "minFDE",
    "miss_rate",
    "map",
    "pair_minSADE",
    "pair_minSFDE",
    "pair_sMissRate",
];

fn values(r: &MetricReport) -> [Option<f64>; 9] {
    [
        Some(r.overlap_all),
        Some(r.overlap_av),
        Some(r.min_ade),
        Some(r.min_fde),
        Some(r.miss_rate),
        Some(r.map),
        r.pair_min_sade,
        r.pair_min_sfde,
        r.pair_smiss_rate,
    ]
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

/// Aligned table with one row per report; absent values print as `-`.
pub fn render_table(reports: &[MetricReport]) -> String {
    let mut rows: Vec<Vec<String>> = vec![std::iter::once("label").chain(COLUMNS).map(String::from).collect()];
    for r in reports {
        rows.push(std::iter::once(r.label.clone()).chain(values(r).into_iter().map(cell)).collect());
    }
    let widths: Vec<usize> = (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// One `(file name, contents)` per metric: `label<TAB>value` lines in report order.
pub fn series_files(reports: &[MetricReport]) -> Vec<(String, String)> {
    COLUMNS
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let body: String = reports
                .iter()
                .map(|r| format!("{}\t{}\n", r.label, values(r)[c].map_or_else(|| "NA".to_string(), |v| format!("{v:.10e}"))))
                .collect();
            (format!("{name}.tsv"), body)
        })
        .collect()
}
