//! 8-bit rasters, binary netpbm I/O, and the halving pyramid.

use std::fmt;
use std::io::{self, Write};

/// Row-major 8-bit image, one (luma) or three (RGB) samples per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PnmError {
    /// Magic number is not P5 or P6.
    Magic(String),
    /// A header field is missing, non-numeric, or zero.
    Header { field: &'static str, token: String },
    /// Maxval present but not 255.
    MaxVal(String),
    /// Payload shorter than width * height * channels.
    Truncated { expected: usize, got: usize },
}

impl fmt::Display for PnmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PnmError::Magic(m) => write!(f, "unsupported magic {m:?}, expected P5 or P6"),
            PnmError::Header { field, token } => {
                write!(f, "bad header field {field}: {token:?}")
            }
            PnmError::MaxVal(t) => write!(f, "bad header field maxval: {t:?}, only 255 supported"),
            PnmError::Truncated { expected, got } => {
                write!(f, "truncated payload: expected {expected} bytes, got {got}")
            }
        }
    }
}

impl std::error::Error for PnmError {}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> Raster {
        assert!(width >= 1 && height >= 1, "zero dimension");
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        assert_eq!(samples.len(), width * height * channels, "sample count");
        Raster { width, height, channels, samples }
    }

    /// Single-channel raster from row-major samples.
    pub fn luma(width: usize, height: usize, samples: Vec<u8>) -> Raster {
        Raster::new(width, height, 1, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    /// Luma value at (x, y). Only valid on single-channel rasters.
    pub fn at(&self, x: usize, y: usize) -> u8 {
        debug_assert_eq!(self.channels, 1);
        self.samples[y * self.width + x]
    }

    /// Rec.601 luma conversion; identity on rasters that are already luma.
    pub fn to_luma(&self) -> Raster {
        if self.channels == 1 {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.width * self.height);
        for px in self.samples.chunks_exact(3) {
            let y = 0.299 * f64::from(px[0]) + 0.587 * f64::from(px[1]) + 0.114 * f64::from(px[2]);
            out.push(y.round().min(255.0) as u8);
        }
        Raster::luma(self.width, self.height, out)
    }

    /// Box-mean 2x2 downscale to ceil(w/2) x ceil(h/2); edge blocks are
    /// clipped to 2x1 / 1x2 / 1x1.
    pub fn downscale_half(&self) -> Raster {
        assert_eq!(self.channels, 1, "downscale operates on luma rasters");
        let ow = self.width.div_ceil(2);
        let oh = self.height.div_ceil(2);
        let mut out = Vec::with_capacity(ow * oh);
        for y in 0..oh {
            for x in 0..ow {
                let mut sum = 0u32;
                let mut n = 0u32;
                for sy in (2 * y)..(2 * y + 2).min(self.height) {
                    for sx in (2 * x)..(2 * x + 2).min(self.width) {
                        sum += u32::from(self.at(sx, sy));
                        n += 1;
                    }
                }
                out.push((f64::from(sum) / f64::from(n)).round() as u8);
            }
        }
        Raster::luma(ow, oh, out)
    }

    /// Serialize as binary PGM (1 channel) or PPM (3 channels), maxval 255.
    pub fn write_pnm(&self, w: &mut impl Write) -> io::Result<()> {
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        write!(w, "{magic}\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.samples)
    }
}

/// Parse a binary PGM (P5) or PPM (P6) stream, maxval 255, `#` comments
/// permitted between header fields.
pub fn load_pnm(bytes: &[u8]) -> Result<Raster, PnmError> {
    let mut pos = 0usize;

    let mut next_token = |field: &'static str| -> Result<String, PnmError> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(PnmError::Header { field, token: String::from("<eof>") });
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    let magic = next_token("magic").map_err(|_| PnmError::Magic(String::from("<eof>")))?;
    let channels = match magic.as_str() {
        "P5" => 1,
        "P6" => 3,
        other => return Err(PnmError::Magic(other.to_string())),
    };
    let parse_dim = |field: &'static str, token: String| -> Result<usize, PnmError> {
        match token.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(PnmError::Header { field, token }),
        }
    };
    let width = parse_dim("width", next_token("width")?)?;
    let height = parse_dim("height", next_token("height")?)?;
    let maxval = next_token("maxval")?;
    if maxval != "255" {
        return Err(PnmError::MaxVal(maxval));
    }
    // exactly one whitespace byte separates the header from the payload
    if pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    let expected = width * height * channels;
    let payload = &bytes[pos.min(bytes.len())..];
    if payload.len() < expected {
        return Err(PnmError::Truncated { expected, got: payload.len() });
    }
    Ok(Raster::new(width, height, channels, payload[..expected].to_vec()))
}

/// When to stop halving: either the total pixel count has dropped to
/// `max_pixels` or the smaller dimension has reached `min_dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub max_pixels: usize,
    pub min_dim: usize,
}

impl Default for StopRule {
    fn default() -> StopRule {
        StopRule { max_pixels: 128, min_dim: 4 }
    }
}

impl StopRule {
    fn satisfied(&self, r: &Raster) -> bool {
        r.pixels() <= self.max_pixels || r.width.min(r.height) <= self.min_dim
    }
}

/// Halving chain of luma rasters; level 0 is the original, the last level
/// is the first one satisfying the stop rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pyramid {
    levels: Vec<Raster>,
    halt: StopRule,
}

impl Pyramid {
    pub fn levels(&self) -> &[Raster] {
        &self.levels
    }

    pub fn level(&self, idx: usize) -> &Raster {
        &self.levels[idx]
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn halt_rule(&self) -> StopRule {
        self.halt
    }
}

pub fn build_pyramid(r: &Raster, stop: StopRule) -> Pyramid {
    assert_eq!(r.channels(), 1, "pyramids are built over luma rasters");
    let mut levels = vec![r.clone()];
    while !stop.satisfied(levels.last().unwrap()) {
        levels.push(levels.last().unwrap().downscale_half());
    }
    Pyramid { levels, halt: stop }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mean(r: &Raster) -> f64 {
        r.samples().iter().map(|&v| f64::from(v)).sum::<f64>() / r.samples().len() as f64
    }

    #[test]
    fn parses_minimal_pgm() {
        let r = load_pnm(b"P5 2 2 255 \x00\xff\x80\x40").unwrap();
        assert_eq!((r.width(), r.height(), r.channels()), (2, 2, 1));
        assert_eq!(r.samples(), &[0, 255, 128, 64]);
    }

    #[test]
    fn parses_minimal_ppm() {
        let r = load_pnm(b"P6 1 1 255 \xff\x00\x00").unwrap();
        assert_eq!((r.width(), r.height(), r.channels()), (1, 1, 3));
        assert_eq!(r.samples(), &[255, 0, 0]);
    }

    #[test]
    fn parses_header_comments() {
        let r = load_pnm(b"P5\n# generated\n2 1\n# noise\n255\n\x01\x02").unwrap();
        assert_eq!(r.samples(), &[1, 2]);
    }

    #[test]
    fn rejects_unsupported_magic() {
        assert_eq!(load_pnm(b"P7 1 1 255 \x00"), Err(PnmError::Magic(String::from("P7"))));
    }

    #[test]
    fn rejects_bad_maxval() {
        assert_eq!(load_pnm(b"P5 1 1 65535 \x00\x00"), Err(PnmError::MaxVal(String::from("65535"))));
    }

    #[test]
    fn rejects_zero_dimension() {
        assert_eq!(
            load_pnm(b"P5 0 4 255 "),
            Err(PnmError::Header { field: "width", token: String::from("0") })
        );
    }

    #[test]
    fn rejects_truncated_payload() {
        assert_eq!(
            load_pnm(b"P5 2 2 255 \x00\x01"),
            Err(PnmError::Truncated { expected: 4, got: 2 })
        );
    }

    #[test]
    fn write_then_load_roundtrips() {
        let r = Raster::luma(3, 2, vec![0, 10, 20, 30, 40, 255]);
        let mut buf = Vec::new();
        r.write_pnm(&mut buf).unwrap();
        assert_eq!(load_pnm(&buf).unwrap(), r);

        let rgb = Raster::new(2, 1, 3, vec![1, 2, 3, 4, 5, 6]);
        let mut buf = Vec::new();
        rgb.write_pnm(&mut buf).unwrap();
        assert_eq!(load_pnm(&buf).unwrap(), rgb);
    }

    #[test]
    fn luma_conversion_values() {
        let rgb = Raster::new(3, 1, 3, vec![255, 255, 255, 255, 0, 0, 0, 0, 0]);
        assert_eq!(rgb.to_luma().samples(), &[255, 76, 0]);
    }

    #[test]
    fn luma_is_identity_on_luma() {
        let r = Raster::luma(2, 2, vec![1, 2, 3, 4]);
        assert_eq!(r.to_luma(), r);
        assert_eq!(r.to_luma().to_luma(), r);
    }

    #[test]
    fn downscale_block_means() {
        #[rustfmt::skip]
        let r = Raster::luma(4, 4, vec![
            0, 0, 255, 255,
            0, 0, 255, 255,
            64, 64, 128, 128,
            64, 64, 128, 128,
        ]);
        assert_eq!(r.downscale_half(), Raster::luma(2, 2, vec![0, 255, 64, 128]));
    }

    #[test]
    fn downscale_degenerate_and_constant() {
        let one = Raster::luma(1, 1, vec![42]);
        assert_eq!(one.downscale_half(), one);
        let c = Raster::luma(2, 2, vec![100; 4]);
        assert_eq!(c.downscale_half(), Raster::luma(1, 1, vec![100]));
    }

    #[test]
    fn downscale_odd_dims_clip_blocks() {
        // 3x1: blocks [0,0] and [255]
        let r = Raster::luma(3, 1, vec![0, 0, 255]);
        assert_eq!(r.downscale_half(), Raster::luma(2, 1, vec![0, 255]));
        // 3x3 constant stays constant through the clipped edge blocks
        let c = Raster::luma(3, 3, vec![9; 9]);
        assert_eq!(c.downscale_half(), Raster::luma(2, 2, vec![9; 4]));
    }

    #[test]
    fn pyramid_chain_1920x1080() {
        let p = build_pyramid(&Raster::luma(1920, 1080, vec![7; 1920 * 1080]), StopRule::default());
        let dims: Vec<_> = p.levels().iter().map(|l| (l.width(), l.height())).collect();
        assert_eq!(
            dims,
            [
                (1920, 1080),
                (960, 540),
                (480, 270),
                (240, 135),
                (120, 68),
                (60, 34),
                (30, 17),
                (15, 9),
                (8, 5)
            ]
        );
    }

    #[test]
    fn pyramid_chain_512_and_128() {
        let p = build_pyramid(&Raster::luma(512, 512, vec![0; 512 * 512]), StopRule::default());
        assert_eq!(p.depth(), 7);
        let last = p.levels().last().unwrap();
        assert_eq!((last.width(), last.height()), (8, 8));

        let p = build_pyramid(&Raster::luma(128, 128, vec![0; 128 * 128]), StopRule::default());
        assert_eq!(p.depth(), 5);
    }

    #[test]
    fn pyramid_stop_presatisfied() {
        let p = build_pyramid(&Raster::luma(10, 10, vec![1; 100]), StopRule::default());
        assert_eq!(p.depth(), 1);
    }

    #[test]
    fn pyramid_stops_exactly_once() {
        let stop = StopRule::default();
        let p = build_pyramid(&Raster::luma(300, 200, vec![3; 60000]), stop);
        for (i, level) in p.levels().iter().enumerate() {
            let is_last = i + 1 == p.depth();
            assert_eq!(stop.satisfied(level), is_last, "level {i}");
        }
    }

    proptest! {
        #[test]
        fn downscale_dims_are_ceil_halves(w in 1usize..40, h in 1usize..40, seed in 0u64..1000) {
            let mut s = seed;
            let samples: Vec<u8> = (0..w * h)
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (s >> 56) as u8
                })
                .collect();
            let r = Raster::luma(w, h, samples);
            let d = r.downscale_half();
            prop_assert_eq!((d.width(), d.height()), (w.div_ceil(2), h.div_ceil(2)));
        }

        #[test]
        fn downscale_preserves_constants(w in 1usize..32, h in 1usize..32, v in 0u8..=255) {
            let r = Raster::luma(w, h, vec![v; w * h]);
            let d = r.downscale_half();
            prop_assert!(d.samples().iter().all(|&s| s == v));
        }

        // even dims: every block is a full 2x2, so the mean moves only by
        // rounding (<= 0.5) plus representation slack
        #[test]
        fn downscale_mean_drift_even_dims(w in 1usize..16, h in 1usize..16, seed in 0u64..1000) {
            let (w, h) = (2 * w, 2 * h);
            let mut s = seed;
            let samples: Vec<u8> = (0..w * h)
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (s >> 56) as u8
                })
                .collect();
            let r = Raster::luma(w, h, samples);
            prop_assert!((mean(&r) - mean(&r.downscale_half())).abs() <= 1.0);
        }

        #[test]
        fn pyramid_dims_strictly_decrease(w in 5usize..200, h in 5usize..200) {
            let p = build_pyramid(&Raster::luma(w, h, vec![0; w * h]), StopRule::default());
            for pair in p.levels().windows(2) {
                prop_assert!(pair[1].pixels() < pair[0].pixels());
                prop_assert_eq!(pair[1].width(), pair[0].width().div_ceil(2));
                prop_assert_eq!(pair[1].height(), pair[0].height().div_ceil(2));
            }
            let last = p.levels().last().unwrap();
            prop_assert!(last.pixels() <= 128 || last.width().min(last.height()) <= 4);
        }
    }
}
