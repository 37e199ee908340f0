//! Side-by-side runs of two configs that differ only in α.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::runner::{run, RunReport};

#[derive(Clone, Debug)]
pub struct Comparison {
    pub labels: [String; 2],
    pub reports: [RunReport; 2],
    pub csv_path: PathBuf,
    pub text: String,
}

fn fmt_alpha(a: &[f64]) -> String {
    let inner: Vec<String> = a.iter().map(|v| format!("{v:e}")).collect();
    format!("[{}]", inner.join(", "))
}

fn fmt_sparsity(z: &[f64]) -> String {
    let inner: Vec<String> = z.iter().map(|v| format!("{v:.1}%")).collect();
    format!("[{}]", inner.join(", "))
}

/// Trains both configs under `out/<label>` and writes `comparison.csv` and
/// `comparison.txt` into `out`.
pub fn compare(a: &RunConfig, b: &RunConfig, labels: [&str; 2], out: &Path) -> Result<Comparison> {
    if let Some(field) = a.differing_field(b) {
        return Err(Error::ConfigMismatch(field));
    }
    if labels[0] == labels[1] {
        return Err(Error::Config("comparison labels must differ".into()));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut reports = Vec::with_capacity(2);
    for (cfg, label) in [a, b].into_iter().zip(labels) {
        let mut c = cfg.clone();
        c.output_dir = Some(out.join(label));
        reports.push(run(&c)?);
    }
    let reports: [RunReport; 2] = reports.try_into().expect("two runs");

    let csv_path = out.join("comparison.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    let depth = a.depth();
    let mut header = vec!["label".to_string(), "alpha".into(), "relative_l2".into()];
    header.extend((1..=depth).map(|i| format!("zero_percent_w{i}")));
    header.push("nonzero".into());
    w.write_record(&header)?;
    for (label, r) in labels.iter().zip(&reports) {
        let mut rec = vec![
            label.to_string(),
            fmt_alpha(&r.config.alpha_vec()),
            r.relative_l2.to_string(),
        ];
        rec.extend(r.sparsity.zero_percent.iter().map(|z| z.to_string()));
        rec.push(r.nonzero.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    let rows: Vec<[String; 5]> = labels
        .iter()
        .zip(&reports)
        .map(|(label, r)| {
            [
                label.to_string(),
                fmt_alpha(&r.config.alpha_vec()),
                format!("{:.3e}", r.relative_l2),
                fmt_sparsity(&r.sparsity.zero_percent),
                r.nonzero.to_string(),
            ]
        })
        .collect();
    let head = ["run", "alpha", "relative L2", "sparsity", "nonzero"];
    let widths: Vec<usize> = (0..5)
        .map(|k| {
            rows.iter()
                .map(|r| r[k].len())
                .chain([head[k].len()])
                .max()
                .unwrap()
        })
        .collect();
    let mut text = String::new();
    let mut line = |cells: [&str; 5]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        writeln!(text, "{}", parts.join("  ").trim_end()).unwrap();
    };
    line(head);
    for r in &rows {
        line([&r[0], &r[1], &r[2], &r[3], &r[4]]);
    }
    let txt_path = out.join("comparison.txt");
    std::fs::write(&txt_path, &text).map_err(|e| Error::io(&txt_path, e))?;

    Ok(Comparison {
        labels: [labels[0].to_string(), labels[1].to_string()],
        reports,
        csv_path,
        text,
    })
}
