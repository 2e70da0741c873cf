//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the target exits non-zero if any criterion fails. It runs without the
//! libtest harness so the lines are never captured.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use larex_core::corrections::cut_region;
use larex_core::imaging::{self, Raster};
use larex_core::lineseg::{segment_page_lines, LineParams, ProjectionProfileSegmenter};
use larex_core::model::candidate_types;
use larex_core::pagexml::{self, Metadata};
use larex_core::pipeline::{resolve_max_occurrence, resolve_priorities, segment_binary, segment_page, ClassifiedRegion, PageSegmentation};
use larex_core::synth::{self, PageSpec, TruthRegion};
use larex_core::{geometry, profile, Point, Polygon, Rect, Region, RegionId, RegionType, SegmentationProfile};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- morphology

fn brute_dilate(r: &Raster, kw: u32, kh: u32) -> Vec<bool> {
    let (w, h) = (r.width() as i64, r.height() as i64);
    let (a, b) = ((kw / 2) as i64, (kh / 2) as i64);
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let mut hit = false;
            for yy in (y - b).max(0)..=(y + b).min(h - 1) {
                for xx in (x - a).max(0)..=(x + a).min(w - 1) {
                    hit |= r.get(xx as u32, yy as u32);
                }
            }
            out.push(hit);
        }
    }
    out
}

/// Flood fill from every unvisited ink pixel in raster order.
fn brute_labels(r: &Raster) -> Vec<u32> {
    let (w, h) = (r.width() as i64, r.height() as i64);
    let mut labels = vec![0u32; (w * h) as usize];
    let mut next = 0;
    for start in 0..(w * h) {
        let (sx, sy) = (start % w, start / w);
        if !r.get(sx as u32, sy as u32) || labels[start as usize] != 0 {
            continue;
        }
        next += 1;
        let mut queue = std::collections::VecDeque::from([(sx, sy)]);
        labels[start as usize] = next;
        while let Some((x, y)) = queue.pop_front() {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && nx < w && ny < h {
                        let i = (ny * w + nx) as usize;
                        if r.get(nx as u32, ny as u32) && labels[i] == 0 {
                            labels[i] = next;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
        }
    }
    labels
}

fn morphology_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for case in 0..1000 {
        let density = rng.random_range(0.005..0.5);
        let mut r = Raster::new(64, 64).unwrap();
        for y in 0..64 {
            for x in 0..64 {
                if rng.random_bool(density) {
                    r.set(x, y, true);
                }
            }
        }
        let (kw, kh) = (2 * rng.random_range(0..10) + 1, 2 * rng.random_range(0..10) + 1);
        let d = imaging::dilate(&r, kw, kh).map_err(|e| e.to_string())?;
        let got: Vec<bool> = (0..64 * 64).map(|i| d.get(i % 64, i / 64)).collect();
        check(got == brute_dilate(&r, kw, kh), || format!("dilation differs on raster {case} ({kw}x{kh})"))?;
        let (labels, _) = imaging::label_components(&r);
        check(labels == brute_labels(&r), || format!("labels differ on raster {case}"))?;
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(10), || format!("took {t:.2?}"))?;
    Ok(format!("1000 rasters agree, {t:.2?}"))
}

// ------------------------------------------------------------ classification

fn truth_for<'a>(region: &Region, truth: &'a [TruthRegion]) -> Option<&'a TruthRegion> {
    let c = region.rectangle.center();
    truth.iter().find(|t| {
        let r = t.rect;
        Rect::new(r.left - 15.0, r.top - 15.0, r.right + 15.0, r.bottom + 15.0).contains_point(c)
    })
}

fn default_rule_classification() -> Outcome {
    let adjusted = synth::adjusted_profile();
    let default = SegmentationProfile::default();
    let (mut total, mut correct) = (0, 0);
    for seed in 0..20u64 {
        let page = synth::figure_page(PageSpec {
            seed,
            with_image: seed % 3 == 1,
            ..Default::default()
        });
        let out = segment_binary(&page.raster, "p", &adjusted).map_err(|e| e.to_string())?;
        check(out.page.regions.len() == page.truth.len(), || {
            format!("page {seed}: {} regions for {} truth", out.page.regions.len(), page.truth.len())
        })?;
        for r in &out.page.regions {
            total += 1;
            if truth_for(r, &page.truth).is_some_and(|t| Some(&t.region_type) == r.assigned_type.as_ref()) {
                correct += 1;
            }
        }

        let plain = segment_binary(&page.raster, "p", &default).map_err(|e| e.to_string())?;
        let h = page.raster.height() as f64;
        for r in &plain.page.regions {
            check(r.assigned_type != Some(RegionType::SignatureMark), || format!("page {seed}: signature mark separated"))?;
            if r.assigned_type == Some(RegionType::PageNumber) {
                check(r.rectangle.center().y < 0.25 * h, || format!("page {seed}: page number at the bottom"))?;
            }
        }
    }
    check(correct == total, || format!("{correct}/{total} regions typed correctly"))?;
    Ok(format!("adjusted {correct}/{total} correct; default keeps bottom furniture out of page numbers on 20 pages"))
}

// ------------------------------------------------------------ priorities

fn priority_and_max_occurrence() -> Outcome {
    let order = [RegionType::PageNumber, RegionType::Marginalia, RegionType::Paragraph];
    let profile = SegmentationProfile::default();
    let strategy = proptest::collection::vec(
        (
            (0.0..900.0f64, 0.0..1500.0f64, 5.0..200.0f64, 5.0..200.0f64),
            proptest::sample::subsequence(order.to_vec(), 1..=3).prop_shuffle(),
        ),
        1..15,
    );
    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |items| {
            let classified: Vec<ClassifiedRegion> = items
                .iter()
                .enumerate()
                .map(|(i, ((x, y, w, h), c))| ClassifiedRegion {
                    region: Region::from_contour(RegionId::new(format!("r{i}")), Rect::from_xywh(*x, *y, *w, *h).to_polygon()),
                    candidates: c.clone(),
                })
                .collect();
            let (typed, _) = resolve_priorities(classified, &profile);
            // (a) highest-priority candidate
            for t in &typed {
                let want = order.iter().find(|o| t.candidates.contains(o));
                prop_assert_eq!(t.region.assigned_type.as_ref(), want);
            }
            let out = resolve_max_occurrence(typed.clone(), &profile);
            // (b) at most one page number
            let pns = out.iter().filter(|c| c.region.assigned_type == Some(RegionType::PageNumber)).count();
            prop_assert!(pns <= 1);
            let had = typed.iter().any(|c| c.region.assigned_type == Some(RegionType::PageNumber));
            prop_assert_eq!(pns, usize::from(had));
            // (c) losers fall back to their next candidate or drop out
            for t in typed.iter().filter(|t| t.region.assigned_type == Some(RegionType::PageNumber)) {
                let after = out.iter().find(|o| o.region.id == t.region.id);
                let survived = after.is_some_and(|a| a.region.assigned_type == Some(RegionType::PageNumber));
                if !survived {
                    let next = [RegionType::Marginalia, RegionType::Paragraph].into_iter().find(|o| t.candidates.contains(o));
                    prop_assert_eq!(after.and_then(|a| a.region.assigned_type.clone()), next);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    // candidate sets themselves come from the rule table
    let r = Region::from_contour(RegionId::new("x"), Rect::from_xywh(40.0, 40.0, 100.0, 60.0).to_polygon());
    let c = candidate_types(&r, &profile.rules, (1000, 1600));
    check(c.contains(&RegionType::PageNumber) && c.contains(&RegionType::Marginalia), || format!("{c:?}"))?;
    Ok("500 random candidate sets: priority, uniqueness and fallback hold".into())
}

// ------------------------------------------------------------ coordinates

fn coordinate_fidelity() -> Outcome {
    let mut worst = 0.0f64;
    let mut vertices = 0usize;
    for target in [800, 1600, 2400] {
        for seed in [5u64, 6] {
            let page = synth::figure_page(PageSpec {
                seed,
                scale: 1.7,
                with_image: true,
            });
            let profile = SegmentationProfile {
                target_height: target,
                ..Default::default()
            };
            let out = segment_binary(&page.raster, "p", &profile).map_err(|e| e.to_string())?;
            let (ow, oh) = out.page.original_size;
            for (emitted, internal) in out.page.regions.iter().zip(&out.working_regions) {
                for (p, q) in emitted.contour.points.iter().zip(&internal.contour.points) {
                    check(p.x >= 0.0 && p.y >= 0.0 && p.x <= ow as f64 && p.y <= oh as f64, || format!("{p:?} outside page"))?;
                    let back = out.scale.to_working(*p);
                    worst = worst.max((back.x - q.x).abs()).max((back.y - q.y).abs());
                    vertices += 1;
                }
            }
        }
    }
    check(worst <= 1.0, || format!("worst deviation {worst:.3} px"))?;
    Ok(format!("{vertices} vertices, worst deviation {worst:.3} px"))
}

// ------------------------------------------------------------ cut

fn random_region(rng: &mut ChaCha8Rng) -> Polygon {
    loop {
        let p = if rng.random_bool(0.5) {
            let pts: Vec<Point> = (0..rng.random_range(3..12))
                .map(|_| Point::new(rng.random_range(0.0..200.0), rng.random_range(0.0..200.0)))
                .collect();
            geometry::convex_hull(&pts)
        } else {
            let mut r = Raster::new(200, 200).unwrap();
            for _ in 0..rng.random_range(1..8) {
                let (x, y) = (rng.random_range(0..180), rng.random_range(0..180));
                let (w, h) = (rng.random_range(5..80), rng.random_range(5..80));
                for yy in y..(y + h).min(200) {
                    for xx in x..(x + w).min(200) {
                        r.set(xx, yy, true);
                    }
                }
            }
            match imaging::connected_components(&r).into_iter().max_by_key(|c| c.area) {
                Some(c) => c.contour,
                None => continue,
            }
        };
        if p.area() > 50.0 {
            return p;
        }
    }
}

fn cut_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2000);
    let mut split = 0;
    for case in 0..200 {
        let contour = random_region(&mut rng);
        let line: Vec<Point> = (0..rng.random_range(2..6))
            .map(|_| Point::new(rng.random_range(-20.0..220.0), rng.random_range(-20.0..220.0)))
            .collect();
        let parent = Region::from_contour(RegionId::new("r0"), contour);
        let before: BTreeSet<(u32, u32)> = parent.contour.pixels(200, 200).into_iter().collect();
        let parts = cut_region(&parent, &line, (200, 200));
        if parts.len() < 2 {
            continue;
        }
        split += 1;
        let mut union = BTreeSet::new();
        let mut total = 0;
        for p in &parts {
            let px = p.pixels(200, 200);
            total += px.len();
            union.extend(px);
        }
        check(total == union.len(), || format!("case {case}: pieces overlap"))?;
        check(union == before, || format!("case {case}: {} parent pixels, {} in pieces", before.len(), union.len()))?;
    }
    check(split >= 50, || format!("only {split} of 200 polylines split their region"))?;
    Ok(format!("200 regions, {split} split, every split conserves pixels exactly"))
}

// ------------------------------------------------------------ lines

fn deskew_and_lines() -> Outcome {
    let params = LineParams::default();
    let (mut good, mut n) = (0, 0);
    let mut misses = Vec::new();
    for (k, angle) in [-8.0, -4.0, 0.0, 4.0, 8.0].into_iter().enumerate() {
        for i in 0..20u64 {
            let seed = 5000 + 100 * k as u64 + i;
            let count = 3 + (seed % 6) as usize;
            let block = synth::skewed_block(seed, count, angle, None).map_err(|e| e.to_string())?;
            let mut page = PageSegmentation::empty("b", block.raster.size());
            page.regions.push(Region::from_contour(RegionId::new("r0"), block.region.clone()).with_type(RegionType::Paragraph));
            let res = segment_page_lines(&block.raster, &page, &params, &ProjectionProfileSegmenter);
            let r = &res.regions[0];
            n += 1;
            if (r.angle - angle).abs() <= 0.5 && r.lines.len() == count {
                good += 1;
            } else {
                misses.push(format!("{angle}°/{count}: {:.1}°/{}", r.angle, r.lines.len()));
            }
        }
    }
    check(good * 100 >= 95 * n, || format!("{good}/{n} ok; misses {misses:?}"))?;
    Ok(format!("{good}/{n} fixtures within 0.5° with exact line counts"))
}

// ------------------------------------------------------------ PageXML

fn pagexml_round_trip() -> Outcome {
    let profile = synth::adjusted_profile();
    let mut files = 0;
    for seed in 0..10u64 {
        let page = synth::figure_page(PageSpec {
            seed,
            with_image: seed % 2 == 0,
            ..Default::default()
        });
        let out = segment_binary(&page.raster, &format!("p{seed}"), &profile).map_err(|e| e.to_string())?;
        let lines = segment_page_lines(&page.raster, &out.page, &profile.lines, &ProjectionProfileSegmenter);
        for with_lines in [None, Some(&lines)] {
            let (doc, _) = pagexml::to_document(&out.page, "p.png", Metadata::at(1_600_000_000 + seed as i64), with_lines);
            let problems = pagexml::validate(&doc);
            check(problems.is_empty(), || format!("page {seed}: {problems:?}"))?;
            let xml = pagexml::write_xml(&doc);
            let back = pagexml::parse_xml(&xml).map_err(|e| e.to_string())?;
            check(pagexml::write_xml(&back) == xml, || format!("page {seed}: rewrite differs"))?;
            check(pagexml::validate(&back).is_empty(), || format!("page {seed}: reread invalid"))?;
            files += 1;
        }
    }
    Ok(format!("{files} documents rewrite byte-identically and validate"))
}

// ------------------------------------------------------------ CLI

fn read_tree(dir: &Path) -> HashMap<String, Vec<u8>> {
    let mut m = HashMap::new();
    for e in std::fs::read_dir(dir).unwrap().flatten() {
        let p = e.path();
        if p.is_dir() {
            for (k, v) in read_tree(&p) {
                m.insert(format!("{}/{k}", e.file_name().to_string_lossy()), v);
            }
        } else {
            m.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
        }
    }
    m
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let books = dir.path().join("book");
    synth::write_fixture_book(&books, 8, 900).map_err(|e| e.to_string())?;
    let prof = dir.path().join("profile.json");
    profile::save(&synth::adjusted_profile(), &prof).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let o = Command::new(env!("CARGO_BIN_EXE_larex"))
            .args(["run", "--lines", "--jobs", "4", "--books"])
            .arg(&books)
            .arg("--profile")
            .arg(&prof)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        check(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        runs.push((o.stdout, read_tree(&out)));
    }
    check(runs[0].0 == runs[1].0, || "summaries differ".into())?;
    check(runs[0].1 == runs[1].1, || "output files differ".into())?;
    check(runs[0].1.len() == 16, || format!("{} files written", runs[0].1.len()))?;
    Ok(format!("2 runs x {} files and summaries byte-identical", runs[0].1.len()))
}

// ------------------------------------------------------------ performance

fn performance() -> Outcome {
    let page = synth::figure_page(PageSpec {
        seed: 77,
        with_image: true,
        ..Default::default()
    });
    let image = image::DynamicImage::ImageLuma8(page.raster.to_gray_image());
    let profile = SegmentationProfile::default();
    let mut times = Vec::new();
    for _ in 0..5 {
        let t = Instant::now();
        segment_page(&image, "p", &profile).map_err(|e| e.to_string())?;
        times.push(t.elapsed());
    }
    times.sort();
    let median = times[2];
    check(median < Duration::from_millis(500), || format!("median {median:.2?}"))?;
    Ok(format!("{}x{} page, median {median:.2?} over 5 runs", page.raster.width(), page.raster.height()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 9] = [
        ("morphology oracle", morphology_oracle),
        ("default-rule classification", default_rule_classification),
        ("priority and max-occurrence", priority_and_max_occurrence),
        ("coordinate fidelity", coordinate_fidelity),
        ("cut conservation", cut_conservation),
        ("deskew and lines", deskew_and_lines),
        ("PageXML round-trip", pagexml_round_trip),
        ("CLI determinism", cli_determinism),
        ("performance sanity", performance),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                println!("FAIL {name}: {why}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
