//! Region-level comparison of two segmentations of the same image.
//!
//! Regions are rasterized; a predicted region matches a ground-truth region
//! of the same type when their pixel IoU is at least [`IOU_THRESHOLD`].
//! Matching is greedy by descending IoU, each region used at most once.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use larex_core::pagexml;
use larex_core::pipeline::PageSegmentation;
use larex_core::RegionId;
use serde::Serialize;

use crate::{CliError, Result};

pub const IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TypeScore {
    pub ground_truth: usize,
    pub predicted: usize,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiffReport {
    pub per_type: BTreeMap<String, TypeScore>,
    pub matches: Vec<(RegionId, RegionId, f64)>,
    pub unmatched_ground_truth: Vec<RegionId>,
    pub unmatched_predicted: Vec<RegionId>,
}

/// Empty denominators count as perfect: nothing expected, nothing missed.
fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        1.0
    } else {
        n as f64 / d as f64
    }
}

fn type_key(r: &larex_core::Region) -> String {
    r.assigned_type.as_ref().map_or("untyped".to_string(), |t| t.to_string())
}

pub fn iou(a: &HashSet<(u32, u32)>, b: &HashSet<(u32, u32)>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|p| large.contains(p)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn diff_pages(gt: &PageSegmentation, pred: &PageSegmentation) -> Result<DiffReport> {
    if gt.original_size != pred.original_size {
        return Err(CliError::SizeMismatch {
            gt: gt.original_size,
            pred: pred.original_size,
        });
    }
    let (w, h) = gt.original_size;
    let pixels = |seg: &PageSegmentation| -> Vec<HashSet<(u32, u32)>> {
        seg.regions.iter().map(|r| r.contour.pixels(w, h).into_iter().collect()).collect()
    };
    let (gp, pp) = (pixels(gt), pixels(pred));

    let mut pairs = Vec::new();
    for (i, g) in gt.regions.iter().enumerate() {
        for (j, p) in pred.regions.iter().enumerate() {
            if type_key(g) != type_key(p) || g.rectangle.intersection(&p.rectangle).is_none() {
                continue;
            }
            let v = iou(&gp[i], &pp[j]);
            if v >= IOU_THRESHOLD {
                pairs.push((v, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (mut used_g, mut used_p) = (BTreeSet::new(), BTreeSet::new());
    let mut matches = Vec::new();
    for (v, i, j) in pairs {
        if used_g.contains(&i) || used_p.contains(&j) {
            continue;
        }
        used_g.insert(i);
        used_p.insert(j);
        matches.push((gt.regions[i].id.clone(), pred.regions[j].id.clone(), v));
    }

    let mut counts: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for r in &gt.regions {
        counts.entry(type_key(r)).or_default().0 += 1;
    }
    for r in &pred.regions {
        counts.entry(type_key(r)).or_default().1 += 1;
    }
    for &i in &used_g {
        counts.entry(type_key(&gt.regions[i])).or_default().2 += 1;
    }
    let per_type = counts
        .into_iter()
        .map(|(t, (g, p, m))| {
            (
                t,
                TypeScore {
                    ground_truth: g,
                    predicted: p,
                    matched: m,
                    precision: ratio(m, p),
                    recall: ratio(m, g),
                },
            )
        })
        .collect();
    Ok(DiffReport {
        per_type,
        matches,
        unmatched_ground_truth: (0..gt.regions.len())
            .filter(|i| !used_g.contains(i))
            .map(|i| gt.regions[i].id.clone())
            .collect(),
        unmatched_predicted: (0..pred.regions.len())
            .filter(|j| !used_p.contains(j))
            .map(|j| pred.regions[j].id.clone())
            .collect(),
    })
}

pub fn diff_files(gt: &Path, pred: &Path) -> Result<DiffReport> {
    let (g, _) = pagexml::read_page_xml(gt)?;
    let (p, _) = pagexml::read_page_xml(pred)?;
    diff_pages(&g, &p)
}

impl DiffReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<20} {:>4} {:>4} {:>5} {:>9} {:>6}", "type", "gt", "pred", "match", "precision", "recall");
        for (t, sc) in &self.per_type {
            let _ = writeln!(
                s,
                "{t:<20} {:>4} {:>4} {:>5} {:>9.3} {:>6.3}",
                sc.ground_truth, sc.predicted, sc.matched, sc.precision, sc.recall
            );
        }
        let ids = |v: &[RegionId]| v.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(" ");
        if !self.unmatched_ground_truth.is_empty() {
            let _ = writeln!(s, "unmatched ground truth: {}", ids(&self.unmatched_ground_truth));
        }
        if !self.unmatched_predicted.is_empty() {
            let _ = writeln!(s, "unmatched predicted: {}", ids(&self.unmatched_predicted));
        }
        s
    }
}
