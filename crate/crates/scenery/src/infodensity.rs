//! Per-scale information density and the working-level selection rule.
//!
//! Density is estimated in bits per pixel as the mean of three Shannon
//! entropies: the 256-bin intensity histogram and the histograms of nonzero
//! signed horizontal/vertical neighbor differences. Zero differences carry
//! no boundary information and would otherwise swamp the difference
//! channels on any image with large flat regions.

use crate::raster::{Pyramid, Raster};

/// One row of a scale scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub level: usize,
    pub width: usize,
    pub height: usize,
    pub pixels: usize,
    pub spid: f64,
}

fn entropy_bits(counts: impl Iterator<Item = u64>) -> f64 {
    let mut total = 0u64;
    let mut acc = 0.0f64;
    for c in counts {
        if c > 0 {
            total += c;
            acc += c as f64 * (c as f64).log2();
        }
    }
    if total == 0 {
        return 0.0;
    }
    // entropy is nonnegative; the factored form can leave a tiny negative
    // rounding residue when a single bin holds every count
    ((total as f64).log2() - acc / total as f64).max(0.0)
}

/// Specific information density of a luma raster, bits per pixel.
pub fn spid(r: &Raster) -> f64 {
    assert_eq!(r.channels(), 1, "density is defined on luma rasters");
    let mut hist = [0u64; 256];
    for &v in r.samples() {
        hist[v as usize] += 1;
    }
    // signed differences live in [-255, 255]; index shifted by 255, the
    // zero bin is never filled
    let mut dx = [0u64; 511];
    let mut dy = [0u64; 511];
    for y in 0..r.height() {
        for x in 1..r.width() {
            let d = i32::from(r.at(x, y)) - i32::from(r.at(x - 1, y));
            if d != 0 {
                dx[(d + 255) as usize] += 1;
            }
        }
    }
    for y in 1..r.height() {
        for x in 0..r.width() {
            let d = i32::from(r.at(x, y)) - i32::from(r.at(x, y - 1));
            if d != 0 {
                dy[(d + 255) as usize] += 1;
            }
        }
    }
    (entropy_bits(hist.iter().copied())
        + entropy_bits(dx.iter().copied())
        + entropy_bits(dy.iter().copied()))
        / 3.0
}

/// Density at every pyramid level, in level order.
pub fn scale_scan(p: &Pyramid) -> Vec<ScanRow> {
    p.levels()
        .iter()
        .enumerate()
        .map(|(level, r)| ScanRow {
            level,
            width: r.width(),
            height: r.height(),
            pixels: r.pixels(),
            spid: spid(r),
        })
        .collect()
}

/// Coarsest level whose density is still within `tau` of level 0, i.e. the
/// last scale before the conservation principle breaks. A zero baseline
/// (constant image) selects the coarsest level.
pub fn select_working_level(scan: &[ScanRow], tau: f64) -> usize {
    assert!(!scan.is_empty(), "scan must cover at least one level");
    let s0 = scan[0].spid;
    if s0 == 0.0 {
        return scan.len() - 1;
    }
    for row in scan.iter().rev() {
        if row.spid >= (1.0 - tau) * s0 {
            return row.level;
        }
    }
    0
}
