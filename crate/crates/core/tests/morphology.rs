use std::collections::VecDeque;

use larex_core::imaging::{self, Raster};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_raster(rng: &mut ChaCha8Rng, w: u32, h: u32, density: f64) -> Raster {
    let mut r = Raster::new(w, h).unwrap();
    for y in 0..h {
        for x in 0..w {
            if rng.random_bool(density) {
                r.set(x, y, true);
            }
        }
    }
    r
}

/// Direct definition: a pixel is set when any ink lies in the window.
fn brute_dilate(r: &Raster, kw: u32, kh: u32) -> Vec<bool> {
    let (w, h) = (r.width() as i64, r.height() as i64);
    let (a, b) = ((kw / 2) as i64, (kh / 2) as i64);
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut hit = false;
            'win: for yy in (y - b).max(0)..=(y + b).min(h - 1) {
                for xx in (x - a).max(0)..=(x + a).min(w - 1) {
                    if r.get(xx as u32, yy as u32) {
                        hit = true;
                        break 'win;
                    }
                }
            }
            out.push(hit);
        }
    }
    out
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Union-find over all 8-adjacent ink pairs, then renumber by first pixel.
fn brute_labels(r: &Raster) -> Vec<u32> {
    let (w, h) = (r.width() as usize, r.height() as usize);
    let mut parent: Vec<usize> = (0..w * h).collect();
    for y in 0..h {
        for x in 0..w {
            if !r.get(x as u32, y as u32) {
                continue;
            }
            for (dx, dy) in [(1i64, 0i64), (-1, 1), (0, 1), (1, 1)] {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h && r.get(nx as u32, ny as u32) {
                    let (p, q) = (find(&mut parent, y * w + x), find(&mut parent, ny as usize * w + nx as usize));
                    parent[p] = q;
                }
            }
        }
    }
    let mut names = std::collections::HashMap::new();
    let mut out = vec![0u32; w * h];
    for (i, label) in out.iter_mut().enumerate() {
        if r.get((i % w) as u32, (i / w) as u32) {
            let root = find(&mut parent, i);
            let next = names.len() as u32 + 1;
            *label = *names.entry(root).or_insert(next);
        }
    }
    out
}

/// Component pixels plus the background pockets they enclose (background
/// not 4-reachable from outside the raster through non-member pixels).
fn filled_component(labels: &[u32], label: u32, w: usize, h: usize) -> Vec<bool> {
    let (pw, ph) = (w + 2, h + 2);
    let member = |x: usize, y: usize| x >= 1 && y >= 1 && x <= w && y <= h && labels[(y - 1) * w + (x - 1)] == label;
    let mut outside = vec![false; pw * ph];
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    outside[0] = true;
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= pw as i64 || ny >= ph as i64 {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !outside[ny * pw + nx] && !member(nx, ny) {
                outside[ny * pw + nx] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    (0..w * h).map(|i| !outside[(i / w + 1) * pw + i % w + 1]).collect()
}

#[test]
fn dilation_matches_window_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..300 {
        let density = rng.random_range(0.002..0.05);
        let r = random_raster(&mut rng, 64, 64, density);
        let kw = 2 * rng.random_range(0..8) + 1;
        let kh = 2 * rng.random_range(0..8) + 1;
        let got = imaging::dilate(&r, kw, kh).unwrap();
        let want = brute_dilate(&r, kw, kh);
        let got: Vec<bool> = (0..64 * 64).map(|i| got.get(i % 64, i / 64)).collect();
        assert_eq!(got, want, "case {case}, kernel {kw}x{kh}");
    }
}

#[test]
fn even_kernels_are_rejected() {
    let r = Raster::new(8, 8).unwrap();
    assert!(imaging::dilate(&r, 4, 3).is_err());
    assert!(imaging::dilate(&r, 3, 0).is_err());
}

#[test]
fn labels_match_union_find() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..300 {
        let density = rng.random_range(0.05..0.6);
        let r = random_raster(&mut rng, 64, 64, density);
        let (labels, count) = imaging::label_components(&r);
        let want = brute_labels(&r);
        assert_eq!(labels, want, "case {case}");
        assert_eq!(count, want.iter().copied().max().unwrap_or(0));
    }
}

#[test]
fn contours_enclose_exactly_their_component() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..150 {
        let density = rng.random_range(0.05..0.6);
        let r = random_raster(&mut rng, 64, 64, density);
        let labels = brute_labels(&r);
        for (k, c) in imaging::connected_components(&r).iter().enumerate() {
            let label = k as u32 + 1;
            assert_eq!(c.area, labels.iter().filter(|&&l| l == label).count());
            let want = filled_component(&labels, label, 64, 64);
            let mut got = vec![false; 64 * 64];
            for (x, y) in c.contour.pixels(64, 64) {
                got[y as usize * 64 + x as usize] = true;
            }
            assert_eq!(got, want, "case {case}, component {label}");
            let filled = want.iter().filter(|&&b| b).count() as f64;
            assert!((c.contour.area() - filled).abs() < 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn dilation_is_monotone_and_extensive(seed in any::<u64>(), k in 0u32..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_raster(&mut rng, 40, 30, 0.02);
        let mut b = a.clone();
        for _ in 0..20 {
            b.set(rng.random_range(0..40), rng.random_range(0..30), true);
        }
        let (da, db) = (imaging::dilate(&a, 2 * k + 1, 2 * k + 1).unwrap(), imaging::dilate(&b, 2 * k + 1, 2 * k + 1).unwrap());
        for (x, y) in a.foreground() {
            prop_assert!(da.get(x, y));
        }
        for (x, y) in da.foreground() {
            prop_assert!(db.get(x, y));
        }
    }
}
