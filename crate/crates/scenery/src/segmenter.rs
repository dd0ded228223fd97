//! Coarse-to-fine segmentation: k-means seeding at the working level, then
//! per-level label upsampling, mean correction, boundary relaxation, and
//! seed discovery down to full resolution.
//!
//! Everything here is deterministic: sweeps run in row-major order, ties
//! break toward the lower id, and new ids are handed out in row-major
//! first-encounter order. Splitting is the only structural change a
//! refinement can make; segments are never merged.

use std::collections::BTreeMap;
use std::fmt;

use crate::raster::{Pyramid, Raster};

/// Total partition of a level's pixels into segment ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    next_id: u32,
}

impl LabelMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// First id not yet handed out; all present ids are below it.
    pub fn next_id(&self) -> u32 {
        self.next_id
    }
}

/// One level of the evolving hierarchy: the partition plus per-segment
/// bookkeeping. `means` holds exactly the ids present in the label map;
/// `parents` and `births` also retain ids that died at finer levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelState {
    level: usize,
    labels: LabelMap,
    means: BTreeMap<u32, f64>,
    parents: BTreeMap<u32, Option<u32>>,
    births: BTreeMap<u32, usize>,
}

impl LevelState {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.labels
    }

    pub fn means(&self) -> &BTreeMap<u32, f64> {
        &self.means
    }

    pub fn parent(&self, id: u32) -> Option<u32> {
        self.parents.get(&id).copied().flatten()
    }

    pub fn birth(&self, id: u32) -> usize {
        self.births[&id]
    }
}

/// How the minimum seed area is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AminRule {
    Fixed(u32),
    /// max(4, round(0.0005 * pixels at the level being refined))
    ScaleRelative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegConfig {
    /// Seed deviation threshold, gray levels.
    pub theta: u32,
    pub a_min: AminRule,
    /// Upper bound on boundary relaxation sweeps per level.
    pub max_sweeps: usize,
    /// Cluster cap for the working-level k-means.
    pub k_max: usize,
}

impl Default for SegConfig {
    fn default() -> SegConfig {
        SegConfig { theta: 16, a_min: AminRule::ScaleRelative, max_sweeps: 5, k_max: 8 }
    }
}

impl SegConfig {
    pub fn a_min_for(&self, pixels: usize) -> u32 {
        match self.a_min {
            AminRule::Fixed(a) => a,
            AminRule::ScaleRelative => ((0.0005 * pixels as f64).round() as u32).max(4),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.theta < 1 {
            return Err(String::from("theta must be >= 1"));
        }
        if let AminRule::Fixed(a) = self.a_min {
            if a < 1 {
                return Err(String::from("amin must be >= 1"));
            }
        }
        if self.max_sweeps < 1 {
            return Err(String::from("sweeps must be >= 1"));
        }
        if !(1..=16).contains(&self.k_max) {
            return Err(String::from("kmax must be in 1..=16"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefineError {
    /// The fine raster is not exactly one halving below the previous level.
    DimensionMismatch { expected: (usize, usize), got: (usize, usize) },
}

impl fmt::Display for RefineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefineError::DimensionMismatch { expected, got } => write!(
                f,
                "fine raster is {}x{}, expected a level that halves to {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
        }
    }
}

impl std::error::Error for RefineError {}

fn compute_means(r: &Raster, labels: &[u32]) -> BTreeMap<u32, f64> {
    let mut sums: BTreeMap<u32, (f64, u64)> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        let e = sums.entry(l).or_insert((0.0, 0));
        e.0 += f64::from(r.samples()[i]);
        e.1 += 1;
    }
    sums.into_iter().map(|(l, (s, n))| (l, s / n as f64)).collect()
}

fn smoothed_histogram(hist: &[u64; 256]) -> [f64; 256] {
    let mut s: Vec<f64> = hist.iter().map(|&c| c as f64).collect();
    for _ in 0..3 {
        let prev = s.clone();
        for (i, v) in s.iter_mut().enumerate() {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(255);
            *v = prev[lo..=hi].iter().sum::<f64>() / 5.0;
        }
    }
    let mut out = [0.0; 256];
    out.copy_from_slice(&s);
    out
}

/// Initial cluster centers: run-compressed local maxima of the smoothed
/// histogram whose raw +-2 bin mass reaches 1% of the pixels. Falls back to
/// the tallest smoothed bin so at least one center always exists.
fn seed_centers(r: &Raster, k_max: usize) -> Vec<f64> {
    let mut hist = [0u64; 256];
    for &v in r.samples() {
        hist[v as usize] += 1;
    }
    let s = smoothed_histogram(&hist);
    let threshold = 0.01 * r.pixels() as f64;
    let mut peaks = Vec::new();
    let mut i = 0usize;
    while i < 256 {
        let mut j = i;
        while j + 1 < 256 && s[j + 1] == s[i] {
            j += 1;
        }
        let left_ok = i == 0 || s[i - 1] < s[i];
        let right_ok = j == 255 || s[j + 1] < s[i];
        if left_ok && right_ok {
            let mass: u64 = hist[i.saturating_sub(2)..=(i + 2).min(255)].iter().sum();
            if mass as f64 >= threshold {
                peaks.push(i);
            }
        }
        i = j + 1;
    }
    if peaks.is_empty() {
        let best = (0..256).max_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap().then(b.cmp(&a)));
        peaks.push(best.unwrap());
    }
    peaks.truncate(k_max.max(1));
    peaks.into_iter().map(|p| p as f64).collect()
}

/// Lloyd iteration over intensities; assignment ties go to the lower center
/// index and an emptied cluster keeps its previous center.
fn kmeans_classes(r: &Raster, k_max: usize) -> Vec<u8> {
    let mut centers = seed_centers(r, k_max);
    let k = centers.len();
    let mut assign = vec![0u8; r.pixels()];
    for _ in 0..20 {
        let mut changed = false;
        for (i, &v) in r.samples().iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, &center) in centers.iter().enumerate() {
                let d = (f64::from(v) - center).abs();
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assign[i] != best as u8 {
                assign[i] = best as u8;
                changed = true;
            }
        }
        let mut sums = vec![0.0f64; k];
        let mut counts = vec![0u64; k];
        for (i, &v) in r.samples().iter().enumerate() {
            sums[assign[i] as usize] += f64::from(v);
            counts[assign[i] as usize] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c] / counts[c] as f64;
            }
        }
        if !changed {
            break;
        }
    }
    assign
}

/// Row-major first-encounter labeling of 4-connected equal-class regions.
fn label_components(width: usize, height: usize, class: &[u8]) -> (Vec<u32>, u32) {
    let mut labels = vec![u32::MAX; width * height];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..width * height {
        if labels[start] != u32::MAX {
            continue;
        }
        labels[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (x, y) = (p % width, p / width);
            let mut try_push = |q: usize| {
                if labels[q] == u32::MAX && class[q] == class[p] {
                    labels[q] = next;
                    stack.push(q);
                }
            };
            if x > 0 {
                try_push(p - 1);
            }
            if x + 1 < width {
                try_push(p + 1);
            }
            if y > 0 {
                try_push(p - width);
            }
            if y + 1 < height {
                try_push(p + width);
            }
        }
        next += 1;
    }
    (labels, next)
}

/// Components of the marked set, in row-major first-encounter order.
fn marked_components(width: usize, height: usize, marked: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; width * height];
    let mut comps = Vec::new();
    let mut stack = Vec::new();
    for start in 0..width * height {
        if !marked[start] || seen[start] {
            continue;
        }
        let mut members = Vec::new();
        seen[start] = true;
        stack.push(start);
        while let Some(p) = stack.pop() {
            members.push(p);
            let (x, y) = (p % width, p / width);
            let mut try_push = |q: usize| {
                if marked[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            };
            if x > 0 {
                try_push(p - 1);
            }
            if x + 1 < width {
                try_push(p + 1);
            }
            if y > 0 {
                try_push(p - width);
            }
            if y + 1 < height {
                try_push(p + width);
            }
        }
        comps.push(members);
    }
    comps
}

/// Initial segmentation of the working level: histogram-peak-seeded k-means
/// over intensities, split into 4-connected components.
pub fn segment_top(r: &Raster, level: usize, cfg: &SegConfig) -> LevelState {
    assert_eq!(r.channels(), 1, "segmentation operates on luma rasters");
    let classes = kmeans_classes(r, cfg.k_max);
    let (labels, next_id) = label_components(r.width(), r.height(), &classes);
    let means = compute_means(r, &labels);
    let parents = means.keys().map(|&l| (l, None)).collect();
    let births = means.keys().map(|&l| (l, level)).collect();
    LevelState {
        level,
        labels: LabelMap { width: r.width(), height: r.height(), labels, next_id },
        means,
        parents,
        births,
    }
}

/// Expand `prev` one level finer: upsample labels, correct means, relax
/// boundaries, then discover seeds. Seed marking round one compares fine
/// pixels against the means inherited from the coarser level (the
/// description the fine data is being checked against); later rounds use
/// the corrected means and run to a fixpoint so no deviating component of
/// qualifying area survives.
pub fn refine_level(prev: &LevelState, r_fine: &Raster, cfg: &SegConfig) -> Result<LevelState, RefineError> {
    assert!(prev.level >= 1, "level 0 has nothing finer below it");
    let (w, h) = (r_fine.width(), r_fine.height());
    let expected = (prev.labels.width, prev.labels.height);
    if (w.div_ceil(2), h.div_ceil(2)) != expected {
        return Err(RefineError::DimensionMismatch { expected, got: (w, h) });
    }

    // (a) nearest-neighbor 2x label upsample
    let mut labels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            labels.push(prev.labels.label(x / 2, y / 2));
        }
    }

    // (b) mean correction from the fine raster
    let mut means = compute_means(r_fine, &labels);

    // (c) boundary relaxation: in-place row-major sweeps; means are frozen
    // during a sweep and recomputed after it
    for _ in 0..cfg.max_sweeps {
        let mut changed = 0usize;
        for y in 0..h {
            for x in 0..w {
                let p = y * w + x;
                let own = labels[p];
                let mut cand = [own, own, own, own, own];
                let mut n_cand = 1usize;
                let add = |l: u32, cand: &mut [u32; 5], n_cand: &mut usize| {
                    if !cand[..*n_cand].contains(&l) {
                        cand[*n_cand] = l;
                        *n_cand += 1;
                    }
                };
                if x > 0 {
                    add(labels[p - 1], &mut cand, &mut n_cand);
                }
                if x + 1 < w {
                    add(labels[p + 1], &mut cand, &mut n_cand);
                }
                if y > 0 {
                    add(labels[p - w], &mut cand, &mut n_cand);
                }
                if y + 1 < h {
                    add(labels[p + w], &mut cand, &mut n_cand);
                }
                if n_cand == 1 {
                    continue;
                }
                let v = f64::from(r_fine.samples()[p]);
                let mut best = own;
                let mut best_d = f64::INFINITY;
                for &l in &cand[..n_cand] {
                    let d = (v - means[&l]).abs();
                    if d < best_d || (d == best_d && l < best) {
                        best_d = d;
                        best = l;
                    }
                }
                if best != own {
                    labels[p] = best;
                    changed += 1;
                }
            }
        }
        means = compute_means(r_fine, &labels);
        if (changed as f64) < 0.001 * (w * h) as f64 {
            break;
        }
    }

    // (d) seed discovery
    let mut next_id = prev.labels.next_id;
    let mut parents = prev.parents.clone();
    let mut births = prev.births.clone();
    let a_min = cfg.a_min_for(w * h) as usize;
    let theta = f64::from(cfg.theta);
    let mut ref_means = prev.means.clone();
    // each accepted round changes the partition, so this cap is never hit
    // in practice; it guards termination
    for _ in 0..=w * h {
        let marked: Vec<bool> = labels
            .iter()
            .enumerate()
            .map(|(p, l)| (f64::from(r_fine.samples()[p]) - ref_means[l]).abs() > theta)
            .collect();
        let mut label_sizes: BTreeMap<u32, usize> = BTreeMap::new();
        for &l in &labels {
            *label_sizes.entry(l).or_insert(0) += 1;
        }
        let mut accepted = false;
        for members in marked_components(w, h, &marked) {
            if members.len() < a_min {
                continue;
            }
            let mut owners: BTreeMap<u32, usize> = BTreeMap::new();
            for &p in &members {
                *owners.entry(labels[p]).or_insert(0) += 1;
            }
            if owners.len() == 1 {
                let (&only, &count) = owners.iter().next().unwrap();
                if count == label_sizes[&only] {
                    // relabeling a whole segment would change nothing
                    continue;
                }
            }
            let (&owner, _) =
                owners.iter().max_by_key(|&(&id, &count)| (count, std::cmp::Reverse(id))).unwrap();
            for &p in &members {
                labels[p] = next_id;
            }
            *label_sizes.entry(next_id).or_insert(0) += members.len();
            parents.insert(next_id, Some(owner));
            births.insert(next_id, prev.level - 1);
            next_id += 1;
            accepted = true;
        }
        if !accepted {
            break;
        }
        means = compute_means(r_fine, &labels);
        ref_means = means.clone();
    }

    let means = compute_means(r_fine, &labels);
    Ok(LevelState {
        level: prev.level - 1,
        labels: LabelMap { width: w, height: h, labels, next_id },
        means,
        parents,
        births,
    })
}

/// Segment the working level and refine down to level 0. The result is
/// ordered coarse to fine; index 0 is the working level itself.
pub fn build_hierarchy(p: &Pyramid, working: usize, cfg: &SegConfig) -> Vec<LevelState> {
    assert!(working < p.depth(), "working level out of range");
    let mut states = vec![segment_top(p.level(working), working, cfg)];
    for level in (0..working).rev() {
        let next = refine_level(states.last().unwrap(), p.level(level), cfg)
            .expect("pyramid levels halve by construction");
        states.push(next);
    }
    states
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{build_pyramid, StopRule};
    use crate::infodensity::{scale_scan, select_working_level};
    use proptest::prelude::*;

    fn areas(s: &LevelState) -> BTreeMap<u32, usize> {
        let mut m = BTreeMap::new();
        for &l in s.label_map().labels() {
            *m.entry(l).or_insert(0) += 1;
        }
        m
    }

    fn lcg_raster(w: usize, h: usize, seed: u64, levels: &[u8]) -> Raster {
        let mut s = seed;
        let samples = (0..w * h)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                levels[(s >> 33) as usize % levels.len()]
            })
            .collect();
        Raster::luma(w, h, samples)
    }

    #[test]
    fn constant_image_is_one_segment() {
        let s = segment_top(&Raster::luma(8, 8, vec![100; 64]), 0, &SegConfig::default());
        assert_eq!(s.label_map().next_id(), 1);
        assert_eq!(s.means()[&0], 100.0);
        assert_eq!(s.birth(0), 0);
        assert_eq!(s.parent(0), None);
    }

    #[test]
    fn half_frame_split() {
        let img: Vec<u8> = (0..64).map(|i| if i % 8 < 4 { 0 } else { 255 }).collect();
        let s = segment_top(&Raster::luma(8, 8, img), 0, &SegConfig::default());
        assert_eq!(s.label_map().next_id(), 2);
        assert_eq!(s.means()[&0], 0.0);
        assert_eq!(s.means()[&1], 255.0);
        // row-major first encounter: the left half owns id 0
        assert_eq!(s.label_map().label(0, 0), 0);
        assert_eq!(s.label_map().label(7, 0), 1);
    }

    #[test]
    fn three_bands_split() {
        // rows 0-2: 0, rows 3-5: 128, rows 6-7: 255
        let img: Vec<u8> = (0..64)
            .map(|i| match i / 8 {
                0..=2 => 0,
                3..=5 => 128,
                _ => 255,
            })
            .collect();
        let s = segment_top(&Raster::luma(8, 8, img), 0, &SegConfig::default());
        assert_eq!(s.label_map().next_id(), 3);
        assert_eq!(s.means()[&0], 0.0);
        assert_eq!(s.means()[&1], 128.0);
        assert_eq!(s.means()[&2], 255.0);
    }

    #[test]
    fn cluster_cap_merges_classes() {
        let img: Vec<u8> = (0..64)
            .map(|i| match i / 8 {
                0..=2 => 0,
                3..=5 => 128,
                _ => 255,
            })
            .collect();
        let cfg = SegConfig { k_max: 2, ..SegConfig::default() };
        let s = segment_top(&Raster::luma(8, 8, img), 0, &cfg);
        assert_eq!(s.label_map().next_id(), 2);
    }

    #[test]
    fn seed_discovery_splits_deviating_block() {
        let prev = segment_top(&Raster::luma(4, 4, vec![0; 16]), 1, &SegConfig::default());
        let fine: Vec<u8> = (0..64)
            .map(|i| {
                let (x, y) = (i % 8, i / 8);
                if (2..6).contains(&x) && (2..6).contains(&y) {
                    255
                } else {
                    0
                }
            })
            .collect();
        let s = refine_level(&prev, &Raster::luma(8, 8, fine), &SegConfig::default()).unwrap();
        assert_eq!(s.label_map().next_id(), 2);
        assert_eq!(s.means()[&0], 0.0);
        assert_eq!(s.means()[&1], 255.0);
        assert_eq!(s.parent(1), Some(0));
        assert_eq!(s.birth(1), 0);
        assert_eq!(areas(&s)[&1], 16);
    }

    #[test]
    fn relaxation_moves_misassigned_boundary() {
        // coarse split at x=1 of 2, but the fine boundary sits at x=1 of 4:
        // the upsampled column 1 starts on the wrong side
        let coarse = Raster::luma(2, 2, vec![0, 255, 0, 255]);
        let prev = segment_top(&coarse, 1, &SegConfig::default());
        let fine: Vec<u8> = (0..16).map(|i| if i % 4 == 0 { 0 } else { 255 }).collect();
        let s = refine_level(&prev, &Raster::luma(4, 4, fine), &SegConfig::default()).unwrap();
        assert_eq!(s.label_map().next_id(), 2);
        for y in 0..4 {
            assert_eq!(s.label_map().label(0, y), 0);
            for x in 1..4 {
                assert_eq!(s.label_map().label(x, y), 1, "({x},{y})");
            }
        }
        assert_eq!(s.means()[&0], 0.0);
        assert_eq!(s.means()[&1], 255.0);
    }

    #[test]
    fn refine_rejects_dimension_mismatch() {
        let prev = segment_top(&Raster::luma(4, 4, vec![0; 16]), 1, &SegConfig::default());
        let err = refine_level(&prev, &Raster::luma(5, 5, vec![0; 25]), &SegConfig::default());
        assert_eq!(
            err,
            Err(RefineError::DimensionMismatch { expected: (4, 4), got: (5, 5) })
        );
    }

    #[test]
    fn constant_hierarchy_stays_single() {
        let p = build_pyramid(&Raster::luma(32, 32, vec![50; 1024]), StopRule::default());
        let states = build_hierarchy(&p, p.depth() - 1, &SegConfig::default());
        assert_eq!(states.len(), p.depth());
        for s in &states {
            assert_eq!(s.label_map().next_id(), 1);
            assert_eq!(s.means()[&0], 50.0);
        }
    }

    #[test]
    fn half_frame_hierarchy_tracks_edge() {
        let img: Vec<u8> = (0..64 * 64).map(|i| if i % 64 < 32 { 0 } else { 255 }).collect();
        let r = Raster::luma(64, 64, img);
        let p = build_pyramid(&r, StopRule::default());
        let scan = scale_scan(&p);
        let working = select_working_level(&scan, 0.15);
        assert_eq!(working, p.depth() - 1);
        let states = build_hierarchy(&p, working, &SegConfig::default());
        for s in &states {
            assert_eq!(areas(s).len(), 2, "level {}", s.level());
        }
        // the vertical edge is aligned to every level, so level 0 labels
        // reproduce the ground-truth mask exactly
        let finest = states.last().unwrap();
        for y in 0..64 {
            for x in 0..64 {
                assert_eq!(finest.label_map().label(x, y), u32::from(x >= 32));
            }
        }
    }

    #[test]
    fn invisible_speck_is_born_later() {
        // a 6x6 speck in 512x20: at the 64x3 working level it is below the
        // 1% histogram mass needed to seed a cluster, and its marked
        // component first reaches a_min two refinements down
        let img: Vec<u8> = (0..512 * 20)
            .map(|i| {
                let (x, y) = (i % 512, i / 512);
                if (48..54).contains(&x) && (8..14).contains(&y) {
                    255
                } else {
                    0
                }
            })
            .collect();
        let p = build_pyramid(&Raster::luma(512, 20, img), StopRule::default());
        assert_eq!(p.depth(), 4);
        let scan = scale_scan(&p);
        assert_eq!(select_working_level(&scan, 0.15), 3);
        let states = build_hierarchy(&p, 3, &SegConfig::default());

        assert_eq!(states[0].label_map().next_id(), 1, "speck invisible at the working level");
        let l2 = &states[1];
        assert_eq!(l2.label_map().next_id(), 2);
        assert_eq!(l2.birth(1), 2);
        assert_eq!(l2.parent(1), Some(0));
        assert_eq!(areas(l2)[&1], 4);
        assert!((l2.means()[&1] - 143.75).abs() < 1e-9);
        let l0 = states.last().unwrap();
        assert_eq!(areas(l0)[&0], 10204);
        assert_eq!(areas(l0)[&1], 36);
        assert_eq!(l0.means()[&1], 255.0);
    }

    #[test]
    fn stored_means_match_recomputation() {
        let r = lcg_raster(48, 40, 99, &[10, 90, 200, 250]);
        let p = build_pyramid(&r, StopRule::default());
        let scan = scale_scan(&p);
        let working = select_working_level(&scan, 0.15);
        for s in build_hierarchy(&p, working, &SegConfig::default()) {
            let recomputed = compute_means(p.level(s.level()), s.label_map().labels());
            assert_eq!(recomputed.len(), s.means().len());
            for (l, m) in s.means() {
                assert!((recomputed[l] - m).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ids_are_stable_across_levels() {
        let r = lcg_raster(64, 64, 7, &[0, 0, 0, 0, 128, 255]);
        let p = build_pyramid(&r, StopRule::default());
        let states = build_hierarchy(&p, p.depth() - 1, &SegConfig::default());
        for pair in states.windows(2) {
            let (coarse, fine) = (&pair[0], &pair[1]);
            assert!(fine.label_map().next_id() >= coarse.label_map().next_id());
            for (&id, &birth) in &fine.births {
                if id < coarse.label_map().next_id() {
                    assert_eq!(coarse.birth(id), birth, "id {id}");
                    assert_eq!(coarse.parent(id), fine.parent(id), "id {id}");
                } else {
                    assert_eq!(birth, fine.level(), "id {id}");
                    let parent = fine.parent(id).expect("seed segments have parents");
                    assert!(parent < id);
                }
            }
        }
    }

    #[test]
    fn hierarchy_is_deterministic() {
        let r = lcg_raster(56, 48, 1234, &[5, 60, 140, 230]);
        let p = build_pyramid(&r, StopRule::default());
        let scan = scale_scan(&p);
        let working = select_working_level(&scan, 0.15);
        let a = build_hierarchy(&p, working, &SegConfig::default());
        let b = build_hierarchy(&p, working, &SegConfig::default());
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn top_segmentation_is_a_total_partition(w in 1usize..20, h in 1usize..20, seed in 0u64..500) {
            let r = lcg_raster(w, h, seed, &[0, 40, 90, 160, 220, 255]);
            let s = segment_top(&r, 0, &SegConfig::default());
            let a = areas(&s);
            // consecutive ids, all non-empty, covering every pixel
            prop_assert_eq!(a.len() as u32, s.label_map().next_id());
            prop_assert_eq!(a.values().sum::<usize>(), w * h);
            for &id in a.keys() {
                prop_assert!(id < s.label_map().next_id());
            }
            prop_assert_eq!(a.len(), s.means().len());
        }

        #[test]
        fn refinement_keeps_partition_total(w in 2usize..14, h in 2usize..14, seed in 0u64..300) {
            let fine = lcg_raster(w, h, seed, &[0, 70, 180, 255]);
            let coarse = fine.downscale_half();
            let prev = segment_top(&coarse, 1, &SegConfig::default());
            let s = refine_level(&prev, &fine, &SegConfig::default()).unwrap();
            let a = areas(&s);
            prop_assert_eq!(a.values().sum::<usize>(), w * h);
            prop_assert_eq!(a.len(), s.means().len());
            for &id in a.keys() {
                prop_assert!(id < s.label_map().next_id());
            }
        }
    }
}
