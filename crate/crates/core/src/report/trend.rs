use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{csv_field, fmt4, ReportError};
use crate::similarity::SimilarityReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendEntry {
    pub label: String,
    pub path: String,
    pub similarity: SimilarityReport,
}

/// Similarity scores of successive models against a single truth model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub truth: String,
    entries: Vec<TrendEntry>,
}

const SCORE_SERIES: [(&str, &str); 6] = [
    ("volumetric", "#1f77b4"),
    ("surface", "#ff7f0e"),
    ("dimensional", "#2ca02c"),
    ("pca_alignment", "#9467bd"),
    ("icp_alignment", "#8c564b"),
    ("final", "#d62728"),
];

fn score(s: &SimilarityReport, key: &str) -> f64 {
    match key {
        "volumetric" => s.volumetric,
        "surface" => s.surface,
        "dimensional" => s.dimensional,
        "pca_alignment" => s.pca_alignment,
        "icp_alignment" => s.icp_alignment,
        "final" => s.final_score,
        _ => s.hausdorff,
    }
}

impl TrendSeries {
    pub fn new(truth: impl Into<String>, entries: Vec<TrendEntry>) -> Result<Self, ReportError> {
        if entries.is_empty() {
            return Err(ReportError::EmptyTrend);
        }
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.label.as_str()) {
                return Err(ReportError::DuplicateLabel(e.label.clone()));
            }
        }
        Ok(TrendSeries {
            truth: truth.into(),
            entries,
        })
    }

    pub fn entries(&self) -> &[TrendEntry] {
        &self.entries
    }

    /// Values of one metric in entry order.
    pub fn series(&self, metric: &str) -> Vec<f64> {
        self.entries.iter().map(|e| score(&e.similarity, metric)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,path,volumetric,surface,dimensional,pca_alignment,icp_alignment,final,hausdorff\n");
        for e in &self.entries {
            let s = &e.similarity;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                csv_field(&e.label),
                csv_field(&e.path),
                s.volumetric,
                s.surface,
                s.dimensional,
                s.pca_alignment,
                s.icp_alignment,
                s.final_score,
                s.hausdorff
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "# Trend vs {}\n\n| Label | Gen. | Vol. | Surf. | Dim. | PCA | ICP | Hausdorff |\n|---|---|---|---|---|---|---|---|\n",
            self.truth
        );
        for e in &self.entries {
            let s = &e.similarity;
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} |",
                e.label,
                fmt4(s.final_score),
                fmt4(s.volumetric),
                fmt4(s.surface),
                fmt4(s.dimensional),
                fmt4(s.pca_alignment),
                fmt4(s.icp_alignment),
                fmt4(s.hausdorff)
            );
        }
        out
    }

    /// Static line chart: scores in the upper panel, Hausdorff distance below.
    pub fn to_svg(&self) -> String {
        const W: f64 = 720.0;
        const LEFT: f64 = 60.0;
        const RIGHT: f64 = 150.0;
        const PANEL: f64 = 200.0;
        const TOP: f64 = 30.0;
        const GAP: f64 = 60.0;
        let n = self.entries.len();
        let plot_w = W - LEFT - RIGHT;
        let x = |i: usize| {
            if n == 1 {
                LEFT + plot_w / 2.0
            } else {
                LEFT + plot_w * i as f64 / (n - 1) as f64
            }
        };
        let lowest = SCORE_SERIES
            .iter()
            .flat_map(|(k, _)| self.series(k))
            .fold(0.0f64, f64::min);
        let lo = (lowest * 4.0).floor() / 4.0;
        let score_y = |v: f64| TOP + PANEL * (1.0 - (v - lo) / (1.0 - lo));
        let h_top = TOP + PANEL + GAP;
        let h_max = self.series("hausdorff").into_iter().fold(0.0f64, f64::max);
        let h_max = if h_max > 0.0 { (h_max / 5.0).ceil() * 5.0 } else { 1.0 };
        let h_y = |v: f64| h_top + PANEL * (1.0 - v / h_max);
        let height = h_top + PANEL + 50.0;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" viewBox="0 0 {W} {height}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{height}" fill="white"/>"#);
        for (top, bottom, title) in [
            (TOP, TOP + PANEL, format!("Similarity vs {}", self.truth)),
            (h_top, h_top + PANEL, "Hausdorff distance (mm)".to_string()),
        ] {
            let _ = writeln!(
                out,
                r##"<rect x="{LEFT}" y="{top}" width="{plot_w}" height="{PANEL}" fill="none" stroke="#999"/>"##
            );
            let _ = writeln!(out, r#"<text x="{LEFT}" y="{:.2}">{}</text>"#, top - 8.0, xml_escape(&title));
            for (i, e) in self.entries.iter().enumerate() {
                let _ = writeln!(
                    out,
                    r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                    x(i),
                    bottom + 16.0,
                    xml_escape(&e.label)
                );
            }
        }
        for k in 0..=4 {
            let v = lo + (1.0 - lo) * k as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
                LEFT - 6.0,
                score_y(v) + 4.0
            );
            let hv = h_max * k as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{hv:.2}</text>"#,
                LEFT - 6.0,
                h_y(hv) + 4.0
            );
        }
        let mut line = |values: &[f64], color: &str, name: &str, y: &dyn Fn(f64) -> f64, legend_y: f64| {
            let pts: Vec<String> = values.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v))).collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                pts.join(" ")
            );
            for p in &pts {
                let (cx, cy) = p.split_once(',').expect("formatted pair");
                let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
            }
            let lx = W - RIGHT + 15.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx}" y1="{legend_y:.2}" x2="{:.2}" y2="{legend_y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{name}</text>"#,
                lx + 18.0,
                lx + 24.0,
                legend_y + 4.0
            );
        };
        for (i, (key, color)) in SCORE_SERIES.iter().enumerate() {
            line(&self.series(key), color, key, &score_y, TOP + 10.0 + 16.0 * i as f64);
        }
        line(&self.series("hausdorff"), "#333333", "hausdorff", &h_y, h_top + 10.0);
        out.push_str("</svg>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
