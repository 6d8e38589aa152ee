use serde::{Deserialize, Serialize};

use super::ColoringResult;
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VerifyMode {
    Defective { f: usize },
    Frugal { beta: usize },
    List { lists: Vec<Vec<usize>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoringReport {
    pub passed: bool,
    pub complete: bool,
    pub proper: bool,
    /// Largest number of same-colored neighbours.
    pub max_defect: usize,
    /// Largest number of times one color appears in a neighbourhood.
    pub max_repeat: usize,
    pub lists_respected: Option<bool>,
    pub color_count: usize,
    pub cap: f64,
    /// First few offending nodes.
    pub offenders: Vec<usize>,
}

/// Exact check of a coloring against the requested property.
pub fn verify_coloring(g: &Graph, result: &ColoringResult, mode: &VerifyMode) -> ColoringReport {
    let colors = &result.colors;
    let complete = colors.len() == g.n();
    let mut report = ColoringReport {
        passed: false,
        complete,
        proper: false,
        max_defect: 0,
        max_repeat: 0,
        lists_respected: None,
        color_count: super::distinct(colors),
        cap: result.cap,
        offenders: Vec::new(),
    };
    if !complete {
        return report;
    }
    let mut bad = vec![false; g.n()];
    let mut buf = Vec::new();
    for v in 0..g.n() {
        let defect = g.neighbors(v).iter().filter(|&&u| colors[u] == colors[v]).count();
        report.max_defect = report.max_defect.max(defect);
        buf.clear();
        buf.extend(g.neighbors(v).iter().map(|&u| colors[u]));
        buf.sort_unstable();
        let repeat = buf.chunk_by(|a, b| a == b).map(<[usize]>::len).max().unwrap_or(0);
        report.max_repeat = report.max_repeat.max(repeat);
        bad[v] = match mode {
            VerifyMode::Defective { f } => defect > *f,
            VerifyMode::Frugal { beta } => defect > 0 || repeat > *beta,
            VerifyMode::List { lists } => {
                defect > 0 || lists.get(v).is_none_or(|l| !l.contains(&colors[v]))
            }
        };
    }
    report.proper = report.max_defect == 0;
    if let VerifyMode::List { lists } = mode {
        report.lists_respected = Some(
            lists.len() == g.n() && (0..g.n()).all(|v| lists[v].contains(&colors[v])),
        );
    }
    report.offenders = (0..g.n()).filter(|&v| bad[v]).take(10).collect();
    report.passed = report.offenders.is_empty();
    report
}
