use std::collections::BTreeSet;

use larex_core::corrections::{apply_edit, cut_region, replay, EditContext};
use larex_core::imaging::{self, Raster};
use larex_core::model::{candidate_types, default_rules, MaxOccurrence};
use larex_core::pagexml::{self, Metadata};
use larex_core::pipeline::{resolve_max_occurrence, resolve_priorities, ClassifiedRegion, PageSegmentation};
use larex_core::{
    Edit, EditLog, Point, Polygon, PriorityList, Rect, Region, RegionId, RegionType, SegmentationProfile,
};
use proptest::prelude::*;

const ORDER: [RegionType; 3] = [RegionType::PageNumber, RegionType::Marginalia, RegionType::Paragraph];

fn arb_candidates() -> impl Strategy<Value = Vec<RegionType>> {
    proptest::sample::subsequence(ORDER.to_vec(), 0..=3).prop_shuffle()
}

fn rect_region(id: usize, r: Rect) -> Region {
    Region::from_contour(RegionId::new(format!("r{id}")), r.to_polygon())
}

fn arb_rect(w: f64, h: f64) -> impl Strategy<Value = Rect> {
    (0.0..w - 10.0, 0.0..h - 10.0, 5.0..300.0f64, 5.0..300.0f64)
        .prop_map(move |(x, y, rw, rh)| Rect::from_xywh(x, y, rw.min(w - x), rh.min(h - y)))
}

/// Rects with integral corners, as stored in PAGE XML.
fn arb_int_rect(w: f64, h: f64) -> impl Strategy<Value = Rect> {
    arb_rect(w, h).prop_map(|r| Rect::new(r.left.floor(), r.top.floor(), r.right.ceil(), r.bottom.ceil()))
}

fn pixel_set(p: &Polygon, w: u32, h: u32) -> BTreeSet<(u32, u32)> {
    p.pixels(w, h).into_iter().collect()
}

/// Non-convex region: the outline of one blob of random overlapping boxes.
fn blob_contour(boxes: &[(u32, u32, u32, u32)]) -> Option<Polygon> {
    let mut r = Raster::new(200, 200).unwrap();
    for &(x, y, bw, bh) in boxes {
        for yy in y..(y + bh).min(200) {
            for xx in x..(x + bw).min(200) {
                r.set(xx, yy, true);
            }
        }
    }
    imaging::connected_components(&r)
        .into_iter()
        .max_by_key(|c| c.area)
        .map(|c| c.contour)
}

fn arb_region_contour() -> impl Strategy<Value = Polygon> {
    prop_oneof![
        proptest::collection::vec((0.0..200.0f64, 0.0..200.0f64), 3..12).prop_filter_map("degenerate", |pts| {
            let hull = larex_core::geometry::convex_hull(&pts.iter().map(|&(x, y)| Point::new(x, y)).collect::<Vec<_>>());
            (hull.area() > 50.0).then_some(hull)
        }),
        proptest::collection::vec((0u32..180, 0u32..180, 5u32..80, 5u32..80), 1..8)
            .prop_filter_map("empty", |b| blob_contour(&b)),
    ]
}

fn arb_polyline() -> impl Strategy<Value = Vec<Point>> {
    proptest::collection::vec((-20.0..220.0f64, -20.0..220.0f64), 2..6)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cut_pieces_partition_parent_pixels(contour in arb_region_contour(), polyline in arb_polyline()) {
        let parent = Region::from_contour(RegionId::new("r0"), contour);
        let parts = cut_region(&parent, &polyline, (200, 200));
        let before = pixel_set(&parent.contour, 200, 200);
        if parts.len() >= 2 {
            let mut union = BTreeSet::new();
            let mut total = 0;
            for p in &parts {
                let px = pixel_set(p, 200, 200);
                total += px.len();
                union.extend(px);
            }
            prop_assert_eq!(total, union.len(), "pieces overlap");
            prop_assert_eq!(union, before);
        }
    }

    #[test]
    fn highest_priority_candidate_wins(cands in proptest::collection::vec(arb_candidates(), 1..20)) {
        let profile = SegmentationProfile::default();
        let classified: Vec<ClassifiedRegion> = cands
            .iter()
            .enumerate()
            .map(|(i, c)| ClassifiedRegion {
                region: rect_region(i, Rect::from_xywh(i as f64, 0.0, 1.0, 1.0)),
                candidates: c.clone(),
            })
            .collect();
        let (typed, unclassified) = resolve_priorities(classified, &profile);
        prop_assert_eq!(typed.len() + unclassified.len(), cands.len());
        for t in &typed {
            let want = ORDER.iter().find(|o| t.candidates.contains(o));
            prop_assert_eq!(t.region.assigned_type.as_ref(), want);
        }
        for u in &unclassified {
            let i: usize = u.id.as_str()[1..].parse().unwrap();
            prop_assert!(cands[i].is_empty());
        }
    }

    #[test]
    fn one_page_number_survives_and_losers_fall_back(
        items in proptest::collection::vec((arb_rect(1000.0, 1600.0), arb_candidates()), 1..15)
    ) {
        let profile = SegmentationProfile::default();
        let classified: Vec<ClassifiedRegion> = items
            .iter()
            .enumerate()
            .map(|(i, (r, c))| ClassifiedRegion {
                region: rect_region(i, *r),
                candidates: c.clone(),
            })
            .filter(|c| !c.candidates.is_empty())
            .collect();
        let (typed, _) = resolve_priorities(classified, &profile);
        let out = resolve_max_occurrence(typed.clone(), &profile);

        let holders: Vec<&ClassifiedRegion> = typed
            .iter()
            .filter(|c| c.region.assigned_type == Some(RegionType::PageNumber))
            .collect();
        // independent winner: smallest top, then larger area, leftmost, topmost
        let winner = holders.iter().min_by(|a, b| {
            let (ra, rb) = (&a.region, &b.region);
            ra.rectangle.top.total_cmp(&rb.rectangle.top)
                .then(rb.area.total_cmp(&ra.area))
                .then(ra.rectangle.left.total_cmp(&rb.rectangle.left))
        });
        let pns: Vec<_> = out.iter().filter(|c| c.region.assigned_type == Some(RegionType::PageNumber)).collect();
        prop_assert!(pns.len() <= 1);
        if let Some(w) = winner {
            prop_assert_eq!(&pns[0].region.id, &w.region.id);
        }
        for t in &typed {
            let after = out.iter().find(|o| o.region.id == t.region.id);
            let is_loser = t.region.assigned_type == Some(RegionType::PageNumber)
                && winner.is_some_and(|w| w.region.id != t.region.id);
            if is_loser {
                let next = [RegionType::Marginalia, RegionType::Paragraph]
                    .into_iter()
                    .find(|o| t.candidates.contains(o));
                prop_assert_eq!(after.and_then(|a| a.region.assigned_type.clone()), next);
            } else {
                prop_assert_eq!(after.map(|a| &a.region.assigned_type), Some(&t.region.assigned_type));
            }
        }
    }

    #[test]
    fn candidate_types_match_rule_table(rect in arb_rect(1000.0, 1600.0), area in 0.0..5000.0f64) {
        let mut region = rect_region(0, rect);
        region.area = area;
        let got = candidate_types(&region, &default_rules(), (1000, 1600));
        let mut want = Vec::new();
        if area > 2000.0 {
            want.push(RegionType::Paragraph);
        }
        let in_side = rect.right <= 250.0 || rect.left >= 750.0;
        if area > 2000.0 && in_side {
            want.push(RegionType::Marginalia);
        }
        let in_head_foot = rect.bottom <= 400.0 || rect.top >= 1200.0;
        if area > 500.0 && in_head_foot {
            want.push(RegionType::PageNumber);
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn pagexml_rewrites_identically(
        rects in proptest::collection::vec((arb_int_rect(900.0, 1300.0), 0usize..8, any::<bool>()), 0..12)
    ) {
        let types = [
            RegionType::Paragraph,
            RegionType::Image,
            RegionType::Marginalia,
            RegionType::PageNumber,
            RegionType::Heading,
            RegionType::ImageDescription,
            RegionType::Other("floating".into()),
            RegionType::Other("my label".into()),
        ];
        let mut seg = PageSegmentation::empty("page", (900, 1300));
        for (i, (r, t, fixed)) in rects.iter().enumerate() {
            let mut region = rect_region(i, *r).with_type(types[*t].clone());
            region.fixed = *fixed;
            seg.regions.push(region);
        }
        seg.refresh_reading_order();
        let (doc, warnings) = pagexml::to_document(&seg, "page.png", Metadata::at(1_000_000), None);
        prop_assert!(warnings.is_empty());
        prop_assert!(pagexml::validate(&doc).is_empty());
        let xml = pagexml::write_xml(&doc);
        let parsed = pagexml::parse_xml(&xml).unwrap();
        prop_assert_eq!(pagexml::write_xml(&parsed), xml);
        let (back, _) = pagexml::from_document(&parsed);
        prop_assert_eq!(back.regions, seg.regions);
        prop_assert_eq!(back.reading_order, seg.reading_order);
    }
}

#[test]
fn replay_is_deterministic_and_matches_stepwise_application() {
    let mut seg = PageSegmentation::empty("p", (1000, 1600));
    seg.regions.push(rect_region(0, Rect::from_xywh(300.0, 300.0, 400.0, 600.0)).with_type(RegionType::Paragraph));
    seg.regions.push(rect_region(1, Rect::from_xywh(20.0, 300.0, 150.0, 100.0)).with_type(RegionType::Marginalia));
    seg.refresh_reading_order();
    let ctx = EditContext::new(&SegmentationProfile::default(), (1000, 1600));

    let mut log = EditLog::default();
    log.push(Edit::CutPolyline {
        region_id: RegionId::new("r0"),
        polyline: vec![Point::new(250.0, 600.5), Point::new(750.0, 600.5)],
    });
    log.push(Edit::Retype {
        region_id: RegionId::new("r2"),
        new_type: RegionType::Heading,
    });
    log.push(Edit::FixRect {
        rect: Rect::from_xywh(450.0, 40.0, 80.0, 30.0),
        new_type: RegionType::PageNumber,
    });
    log.push(Edit::Merge {
        target_region_ids: vec![RegionId::new("r3"), RegionId::new("r1")],
        new_type: RegionType::Paragraph,
    });

    let a = replay(&seg, &log, &ctx).unwrap();
    let b = replay(&seg, &log, &ctx).unwrap();
    assert_eq!(a.page, b.page);

    let mut step = seg.clone();
    for e in &log.edits {
        step = apply_edit(&step, &e.edit, &ctx).unwrap().page;
    }
    assert_eq!(step, a.page);
    assert!(a.page.region(&RegionId::new("r4")).is_some_and(|r| r.fixed));

    let json = serde_json::to_string(&log).unwrap();
    let back: EditLog = serde_json::from_str(&json).unwrap();
    assert_eq!(back, log);
}

#[test]
fn default_page_number_rule_is_unique() {
    let pn = default_rules()
        .into_iter()
        .find(|r| r.type_id == RegionType::PageNumber)
        .unwrap();
    assert_eq!(pn.max_occurrence, MaxOccurrence::One);
    assert_eq!(PriorityList::default().0, ORDER.to_vec());
}
