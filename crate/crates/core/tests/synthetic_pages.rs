use larex_core::corrections::{apply_edit, EditContext};
use larex_core::imaging::ScaleTransform;
use larex_core::pipeline::{segment_binary, segment_page};
use larex_core::synth::{self, PageSpec, TruthRegion};
use larex_core::{Edit, Rect, Region, RegionType, SegmentationProfile};

/// Truth region whose (slightly grown) ink bounds contain the region's
/// rectangle center.
fn truth_for<'a>(region: &Region, truth: &'a [TruthRegion]) -> Option<&'a TruthRegion> {
    let c = region.rectangle.center();
    truth.iter().find(|t| {
        let r = t.rect;
        Rect::new(r.left - 15.0, r.top - 15.0, r.right + 15.0, r.bottom + 15.0).contains_point(c)
    })
}

#[test]
fn adjusted_profile_types_every_region_correctly() {
    let profile = synth::adjusted_profile();
    for seed in 0..6 {
        let page = synth::figure_page(PageSpec {
            seed,
            with_image: seed % 2 == 0,
            ..Default::default()
        });
        let out = segment_binary(&page.raster, "p", &profile).unwrap();
        assert_eq!(out.page.regions.len(), page.truth.len(), "seed {seed}: {:#?}", out.page.regions);
        for r in &out.page.regions {
            let t = truth_for(r, &page.truth).unwrap_or_else(|| panic!("seed {seed}: no truth for {r:?}"));
            assert_eq!(r.assigned_type.as_ref(), Some(&t.region_type), "seed {seed}: {r:?}");
        }
    }
}

#[test]
fn default_profile_keeps_signature_mark_out_of_page_numbers() {
    let profile = SegmentationProfile::default();
    for seed in 0..6 {
        let page = synth::figure_page(PageSpec { seed, ..Default::default() });
        let out = segment_binary(&page.raster, "p", &profile).unwrap();
        let page_numbers: Vec<&Region> = out
            .page
            .regions
            .iter()
            .filter(|r| r.assigned_type == Some(RegionType::PageNumber))
            .collect();
        assert_eq!(page_numbers.len(), 1, "seed {seed}");
        let truth = truth_for(page_numbers[0], &page.truth).unwrap();
        assert_eq!(truth.region_type, RegionType::PageNumber);
        for r in &out.page.regions {
            assert_ne!(r.assigned_type, Some(RegionType::SignatureMark));
        }
    }
}

#[test]
fn segmentation_is_deterministic() {
    let page = synth::figure_page(PageSpec {
        seed: 3,
        with_image: true,
        ..Default::default()
    });
    let img = image::DynamicImage::ImageLuma8(synth::to_gray(&page.raster, 3));
    let a = segment_page(&img, "p", &SegmentationProfile::default()).unwrap();
    let b = segment_page(&img, "p", &SegmentationProfile::default()).unwrap();
    assert_eq!(a.page, b.page);
}

#[test]
fn gray_scan_matches_binary_input() {
    let page = synth::figure_page(PageSpec { seed: 9, ..Default::default() });
    let img = image::DynamicImage::ImageLuma8(synth::to_gray(&page.raster, 9));
    let from_gray = segment_page(&img, "p", &synth::adjusted_profile()).unwrap();
    let from_binary = segment_binary(&page.raster, "p", &synth::adjusted_profile()).unwrap();
    assert_eq!(from_gray.page, from_binary.page);
}

#[test]
fn emitted_vertices_map_back_within_one_pixel() {
    for target in [800, 1600, 2400] {
        let page = synth::figure_page(PageSpec {
            seed: 5,
            scale: 1.7,
            with_image: true,
        });
        let profile = SegmentationProfile {
            target_height: target,
            ..Default::default()
        };
        let out = segment_binary(&page.raster, "p", &profile).unwrap();
        let (ow, oh) = out.page.original_size;
        for (emitted, internal) in out.page.regions.iter().zip(&out.working_regions) {
            for (p, q) in emitted.contour.points.iter().zip(&internal.contour.points) {
                assert!(p.x >= 0.0 && p.y >= 0.0 && p.x <= ow as f64 && p.y <= oh as f64);
                let back = out.scale.to_working(*p);
                assert!((back.x - q.x).abs() <= 1.0 && (back.y - q.y).abs() <= 1.0, "{p:?} vs {q:?}");
            }
        }
    }
}

#[test]
fn roi_excludes_outside_ink() {
    let page = synth::figure_page(PageSpec { seed: 2, ..Default::default() });
    let profile = SegmentationProfile {
        roi: Some(Rect::new(0.3, 0.0, 0.7, 1.0)),
        ..synth::adjusted_profile()
    };
    let out = segment_binary(&page.raster, "p", &profile).unwrap();
    assert!(out
        .page
        .regions
        .iter()
        .all(|r| r.assigned_type != Some(RegionType::Marginalia)));
}

#[test]
fn fixed_region_survives_resegmentation() {
    let page = synth::figure_page(PageSpec { seed: 4, ..Default::default() });
    let profile = SegmentationProfile::default();
    let first = segment_binary(&page.raster, "p", &profile).unwrap();
    let ctx = EditContext::new(&profile, first.page.original_size);
    let rect = Rect::from_xywh(500.0, 1480.0, 150.0, 50.0);
    let fixed = apply_edit(
        &first.page,
        &Edit::FixRect {
            rect,
            new_type: RegionType::SignatureMark,
        },
        &ctx,
    )
    .unwrap()
    .page;

    let changed = SegmentationProfile {
        text_kernel: larex_core::pipeline::Kernel::new(31, 21),
        ..profile
    };
    let mut again = segment_binary(&page.raster, "p", &changed).unwrap().page;
    larex_core::corrections::carry_fixed_regions(&mut again, &fixed);
    let kept: Vec<&Region> = again.regions.iter().filter(|r| r.fixed).collect();
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].rectangle, rect);
    assert_eq!(kept[0].assigned_type, Some(RegionType::SignatureMark));
}

#[test]
fn scale_transform_matches_resize() {
    let (w, h, s) = ScaleTransform::for_target(3200, 4800, 1600);
    assert_eq!((w, h), (1067, 1600));
    assert!((s.factor_y - 3.0).abs() < 1e-12);
}
