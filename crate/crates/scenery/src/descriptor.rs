//! Segment attributes, topology relations, the canonical description text,
//! approximate reconstruction, and fixation proposals.
//!
//! The text format is the primary exchange artifact, so it is canonical
//! down to the byte: one item per line, single spaces, LF endings, floats
//! at exactly 4 decimals (round-half-even), records ordered by id,
//! relations ordered by (subject, predicate, object). The parser rejects
//! anything non-canonical rather than normalizing it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::raster::{Pyramid, Raster};
use crate::segmenter::{LevelState, SegConfig};

/// Quantize to 4 decimals, ties to even; description floats live in this
/// grid so serialization is lossless.
pub(crate) fn q4(x: f64) -> f64 {
    (x * 10000.0).round_ties_even() / 10000.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Predicate {
    // declaration order matches the textual sort order of the keywords
    Above,
    Adjacent,
    Below,
    Inside,
    LeftOf,
    RightOf,
}

impl Predicate {
    pub fn as_str(self) -> &'static str {
        match self {
            Predicate::Above => "ABOVE",
            Predicate::Adjacent => "ADJACENT",
            Predicate::Below => "BELOW",
            Predicate::Inside => "INSIDE",
            Predicate::LeftOf => "LEFT-OF",
            Predicate::RightOf => "RIGHT-OF",
        }
    }

    pub fn from_str(s: &str) -> Option<Predicate> {
        Some(match s {
            "ABOVE" => Predicate::Above,
            "ADJACENT" => Predicate::Adjacent,
            "BELOW" => Predicate::Below,
            "INSIDE" => Predicate::Inside,
            "LEFT-OF" => Predicate::LeftOf,
            "RIGHT-OF" => Predicate::RightOf,
            _ => return None,
        })
    }

    /// LEFT-OF(a,b) <=> RIGHT-OF(b,a); ABOVE/BELOW likewise.
    pub fn dual(self) -> Option<Predicate> {
        Some(match self {
            Predicate::LeftOf => Predicate::RightOf,
            Predicate::RightOf => Predicate::LeftOf,
            Predicate::Above => Predicate::Below,
            Predicate::Below => Predicate::Above,
            Predicate::Adjacent | Predicate::Inside => return None,
        })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Attribute list of one segment at one level. Centroid is normalized by
/// (dim - 1) per axis (0.5 on a 1-wide axis); perimeter counts crack edges,
/// bbox is inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    pub id: u32,
    pub level: usize,
    pub parent: Option<u32>,
    pub birth: usize,
    pub nx: f64,
    pub ny: f64,
    pub area: usize,
    pub perimeter: usize,
    pub mean: f64,
    pub bbox: (usize, usize, usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RelationTriple {
    pub subject: u32,
    pub predicate: Predicate,
    pub object: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelBlock {
    pub level: usize,
    pub width: usize,
    pub height: usize,
    pub records: Vec<SegmentRecord>,
    pub relations: Vec<RelationTriple>,
}

/// Full multi-level description, coarsest (working) level first.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneDescription {
    pub width: usize,
    pub height: usize,
    pub theta: u32,
    pub a_min: u32,
    pub levels: Vec<LevelBlock>,
}

impl SceneDescription {
    /// The level-0 block; descriptions always end at full resolution.
    pub fn finest(&self) -> &LevelBlock {
        self.levels.last().expect("descriptions have at least one level")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionMismatch {
    pub expected: (usize, usize),
    pub got: (usize, usize),
}

impl fmt::Display for DimensionMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "raster is {}x{}, label map is {}x{}",
            self.got.0, self.got.1, self.expected.0, self.expected.1
        )
    }
}

impl std::error::Error for DimensionMismatch {}

/// One record per label present at the level, ordered by id.
pub fn extract_attributes(s: &LevelState, r: &Raster) -> Result<Vec<SegmentRecord>, DimensionMismatch> {
    let (w, h) = (s.label_map().width(), s.label_map().height());
    if (r.width(), r.height()) != (w, h) {
        return Err(DimensionMismatch { expected: (w, h), got: (r.width(), r.height()) });
    }
    struct Acc {
        area: usize,
        sx: u64,
        sy: u64,
        sv: u64,
        perim: usize,
        bbox: (usize, usize, usize, usize),
    }
    let mut accs: BTreeMap<u32, Acc> = BTreeMap::new();
    for y in 0..h {
        for x in 0..w {
            let l = s.label_map().label(x, y);
            let a = accs.entry(l).or_insert(Acc {
                area: 0,
                sx: 0,
                sy: 0,
                sv: 0,
                perim: 0,
                bbox: (x, y, x, y),
            });
            a.area += 1;
            a.sx += x as u64;
            a.sy += y as u64;
            a.sv += u64::from(r.at(x, y));
            a.bbox.0 = a.bbox.0.min(x);
            a.bbox.1 = a.bbox.1.min(y);
            a.bbox.2 = a.bbox.2.max(x);
            a.bbox.3 = a.bbox.3.max(y);
            // crack edges: 4-neighbors outside the raster or differently labeled
            if x == 0 || s.label_map().label(x - 1, y) != l {
                a.perim += 1;
            }
            if x + 1 == w || s.label_map().label(x + 1, y) != l {
                a.perim += 1;
            }
            if y == 0 || s.label_map().label(x, y - 1) != l {
                a.perim += 1;
            }
            if y + 1 == h || s.label_map().label(x, y + 1) != l {
                a.perim += 1;
            }
        }
    }
    Ok(accs
        .into_iter()
        .map(|(id, a)| {
            let nx = if w == 1 { 0.5 } else { a.sx as f64 / a.area as f64 / (w - 1) as f64 };
            let ny = if h == 1 { 0.5 } else { a.sy as f64 / a.area as f64 / (h - 1) as f64 };
            SegmentRecord {
                id,
                level: s.level(),
                parent: s.parent(id),
                birth: s.birth(id),
                nx: q4(nx),
                ny: q4(ny),
                area: a.area,
                perimeter: a.perim,
                mean: q4(a.sv as f64 / a.area as f64),
                bbox: a.bbox,
            }
        })
        .collect())
}

/// Crack-edge counts between adjacent label pairs, keyed (low, high).
pub fn shared_edges(s: &LevelState) -> BTreeMap<(u32, u32), usize> {
    let (w, h) = (s.label_map().width(), s.label_map().height());
    let mut shared = BTreeMap::new();
    for y in 0..h {
        for x in 0..w {
            let l = s.label_map().label(x, y);
            if x + 1 < w {
                let m = s.label_map().label(x + 1, y);
                if m != l {
                    *shared.entry((l.min(m), l.max(m))).or_insert(0) += 1;
                }
            }
            if y + 1 < h {
                let m = s.label_map().label(x, y + 1);
                if m != l {
                    *shared.entry((l.min(m), l.max(m))).or_insert(0) += 1;
                }
            }
        }
    }
    shared
}

const DIRECTIONAL_EPS: f64 = 0.05;

/// Topology triples for one level: ADJACENT once per touching pair (low id
/// first), INSIDE for fully enclosed segments, and one directional pair per
/// adjacent non-nested pair when the centroid offset clears the epsilon.
/// A segment on the raster border abuts the exterior, so it is inside
/// nothing; enclosure also requires a single distinct surrounding label.
pub fn derive_relations(records: &[SegmentRecord], s: &LevelState) -> Vec<RelationTriple> {
    let (w, h) = (s.label_map().width(), s.label_map().height());
    let by_id: BTreeMap<u32, &SegmentRecord> = records.iter().map(|r| (r.id, r)).collect();
    let mut touches_border: BTreeSet<u32> = BTreeSet::new();
    let mut halo: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for y in 0..h {
        for x in 0..w {
            let l = s.label_map().label(x, y);
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                touches_border.insert(l);
            }
            let mut look = |nx: usize, ny: usize| {
                let m = s.label_map().label(nx, ny);
                if m != l {
                    halo.entry(l).or_default().insert(m);
                }
            };
            if x > 0 {
                look(x - 1, y);
            }
            if x + 1 < w {
                look(x + 1, y);
            }
            if y > 0 {
                look(x, y - 1);
            }
            if y + 1 < h {
                look(x, y + 1);
            }
        }
    }

    let mut rels: BTreeSet<RelationTriple> = BTreeSet::new();
    let mut nested: BTreeSet<(u32, u32)> = BTreeSet::new();
    for (&a, outs) in &halo {
        if touches_border.contains(&a) || outs.len() != 1 {
            continue;
        }
        let b = *outs.iter().next().unwrap();
        nested.insert((a, b));
        rels.insert(RelationTriple { subject: a, predicate: Predicate::Inside, object: b });
    }
    for &(a, b) in shared_edges(s).keys() {
        rels.insert(RelationTriple { subject: a, predicate: Predicate::Adjacent, object: b });
        if nested.contains(&(a, b)) || nested.contains(&(b, a)) {
            continue;
        }
        let dx = by_id[&b].nx - by_id[&a].nx;
        let dy = by_id[&b].ny - by_id[&a].ny;
        for (s_id, o_id, ddx, ddy) in [(a, b, dx, dy), (b, a, -dx, -dy)] {
            if ddx > DIRECTIONAL_EPS && ddx.abs() >= ddy.abs() {
                rels.insert(RelationTriple { subject: s_id, predicate: Predicate::LeftOf, object: o_id });
                rels.insert(RelationTriple { subject: o_id, predicate: Predicate::RightOf, object: s_id });
            } else if ddy > DIRECTIONAL_EPS && ddy.abs() > ddx.abs() {
                rels.insert(RelationTriple { subject: s_id, predicate: Predicate::Above, object: o_id });
                rels.insert(RelationTriple { subject: o_id, predicate: Predicate::Below, object: s_id });
            }
        }
    }
    rels.into_iter().collect()
}

/// Assemble the full description for a built hierarchy.
pub fn build_description(p: &Pyramid, states: &[LevelState], cfg: &SegConfig) -> SceneDescription {
    assert!(!states.is_empty());
    let finest = p.level(0);
    let levels = states
        .iter()
        .map(|s| {
            let r = p.level(s.level());
            let records = extract_attributes(s, r).expect("hierarchy levels match their rasters");
            let relations = derive_relations(&records, s);
            LevelBlock {
                level: s.level(),
                width: r.width(),
                height: r.height(),
                records,
                relations,
            }
        })
        .collect();
    SceneDescription {
        width: finest.width(),
        height: finest.height(),
        theta: cfg.theta,
        a_min: cfg.a_min_for(finest.pixels()),
        levels,
    }
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

/// Canonical text form; byte-deterministic and a fixpoint under
/// parse-then-serialize.
pub fn serialize(d: &SceneDescription) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "SCENE {} {} LEVELS {} THETA {} AMIN {}\n",
        d.width,
        d.height,
        d.levels.len(),
        d.theta,
        d.a_min
    ));
    for block in &d.levels {
        out.push_str(&format!("LEVEL {} SIZE {}x{}\n", block.level, block.width, block.height));
        for r in &block.records {
            let parent = r.parent.map_or(String::from("-"), |p| p.to_string());
            out.push_str(&format!(
                "SEG {} PARENT {} BIRTH {} CENTROID {} {} AREA {} PERIM {} MEAN {} BBOX {} {} {} {}\n",
                r.id,
                parent,
                r.birth,
                f4(r.nx),
                f4(r.ny),
                r.area,
                r.perimeter,
                f4(r.mean),
                r.bbox.0,
                r.bbox.1,
                r.bbox.2,
                r.bbox.3
            ));
        }
        for rel in &block.relations {
            out.push_str(&format!("REL {} {} {}\n", rel.subject, rel.predicate, rel.object));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn parse_uint(tok: &str, what: &str, line: usize) -> Result<u64, ParseError> {
    match tok.parse::<u64>() {
        // canonical form only: no signs, no leading zeros
        Ok(v) if v.to_string() == tok => Ok(v),
        _ => Err(ParseError::new(line, format!("bad {what} {tok:?}"))),
    }
}

fn parse_f4_token(tok: &str, what: &str, line: usize) -> Result<f64, ParseError> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() && f4(v) == tok => Ok(v),
        _ => Err(ParseError::new(line, format!("bad {what} {tok:?}, expected 4-decimal form"))),
    }
}

fn expect_kw(tokens: &[&str], idx: usize, kw: &str, line: usize) -> Result<(), ParseError> {
    if tokens.get(idx).copied() == Some(kw) {
        Ok(())
    } else {
        Err(ParseError::new(
            line,
            format!("expected {kw:?}, found {:?}", tokens.get(idx).copied().unwrap_or("<eol>")),
        ))
    }
}

/// Strict parser for the canonical grammar; errors carry the 1-based line
/// number and the offending token.
pub fn parse(text: &str) -> Result<SceneDescription, ParseError> {
    if !text.ends_with('\n') {
        let last = text.lines().count().max(1);
        return Err(ParseError::new(last, "missing trailing newline"));
    }
    let lines: Vec<&str> = text[..text.len() - 1].split('\n').collect();
    for (i, l) in lines.iter().enumerate() {
        if l.contains('\r') {
            return Err(ParseError::new(i + 1, "carriage return in line"));
        }
        if l.is_empty() {
            return Err(ParseError::new(i + 1, "empty line"));
        }
    }

    let mut cursor = 0usize;
    let header: Vec<&str> = lines
        .first()
        .ok_or_else(|| ParseError::new(1, "empty description"))?
        .split(' ')
        .collect();
    let hline = 1;
    expect_kw(&header, 0, "SCENE", hline)?;
    if header.len() != 9 {
        return Err(ParseError::new(hline, format!("SCENE line has {} tokens, expected 9", header.len())));
    }
    expect_kw(&header, 3, "LEVELS", hline)?;
    expect_kw(&header, 5, "THETA", hline)?;
    expect_kw(&header, 7, "AMIN", hline)?;
    let width = parse_uint(header[1], "width", hline)? as usize;
    let height = parse_uint(header[2], "height", hline)? as usize;
    let level_count = parse_uint(header[4], "level count", hline)? as usize;
    let theta = parse_uint(header[6], "theta", hline)? as u32;
    let a_min = parse_uint(header[8], "amin", hline)? as u32;
    if width == 0 || height == 0 {
        return Err(ParseError::new(hline, "zero scene dimension"));
    }
    if level_count == 0 {
        return Err(ParseError::new(hline, "level count must be at least 1"));
    }
    if theta == 0 || a_min == 0 {
        return Err(ParseError::new(hline, "theta and amin must be at least 1"));
    }
    cursor += 1;

    let mut blocks: Vec<LevelBlock> = Vec::with_capacity(level_count);
    // id -> (parent, birth), consistent across all blocks
    let mut lineage: BTreeMap<u32, (Option<u32>, usize)> = BTreeMap::new();

    for expected_level in (0..level_count).rev() {
        let lno = cursor + 1;
        let toks: Vec<&str> = lines
            .get(cursor)
            .ok_or_else(|| ParseError::new(lno, format!("missing LEVEL {expected_level} block")))?
            .split(' ')
            .collect();
        expect_kw(&toks, 0, "LEVEL", lno)?;
        if toks.len() != 4 {
            return Err(ParseError::new(lno, format!("LEVEL line has {} tokens, expected 4", toks.len())));
        }
        expect_kw(&toks, 2, "SIZE", lno)?;
        let idx = parse_uint(toks[1], "level index", lno)? as usize;
        if idx != expected_level {
            return Err(ParseError::new(lno, format!("level index {idx}, expected {expected_level}")));
        }
        let (ws, hs) = toks[3]
            .split_once('x')
            .ok_or_else(|| ParseError::new(lno, format!("bad SIZE {:?}", toks[3])))?;
        let bw = parse_uint(ws, "level width", lno)? as usize;
        let bh = parse_uint(hs, "level height", lno)? as usize;
        if bw == 0 || bh == 0 {
            return Err(ParseError::new(lno, "zero level dimension"));
        }
        if let Some(prev) = blocks.last() {
            // the previous block is one halving coarser
            if (prev.width, prev.height) != (bw.div_ceil(2), bh.div_ceil(2)) {
                return Err(ParseError::new(
                    lno,
                    format!(
                        "size {bw}x{bh} does not halve to the coarser level's {}x{}",
                        prev.width, prev.height
                    ),
                ));
            }
        }
        if expected_level == 0 && (bw, bh) != (width, height) {
            return Err(ParseError::new(lno, "level 0 size differs from the scene size"));
        }
        cursor += 1;

        let mut records: Vec<SegmentRecord> = Vec::new();
        while let Some(line) = lines.get(cursor) {
            if !line.starts_with("SEG ") {
                break;
            }
            let lno = cursor + 1;
            let t: Vec<&str> = line.split(' ').collect();
            if t.len() != 20 {
                return Err(ParseError::new(lno, format!("SEG line has {} tokens, expected 20", t.len())));
            }
            expect_kw(&t, 2, "PARENT", lno)?;
            expect_kw(&t, 4, "BIRTH", lno)?;
            expect_kw(&t, 6, "CENTROID", lno)?;
            expect_kw(&t, 9, "AREA", lno)?;
            expect_kw(&t, 11, "PERIM", lno)?;
            expect_kw(&t, 13, "MEAN", lno)?;
            expect_kw(&t, 15, "BBOX", lno)?;
            let id = parse_uint(t[1], "segment id", lno)? as u32;
            if let Some(last) = records.last() {
                if id <= last.id {
                    return Err(ParseError::new(lno, format!("segment id {id} not ascending")));
                }
            }
            let parent = if t[3] == "-" {
                None
            } else {
                let p = parse_uint(t[3], "parent id", lno)? as u32;
                if p >= id {
                    return Err(ParseError::new(lno, format!("parent {p} not below segment id {id}")));
                }
                Some(p)
            };
            let birth = parse_uint(t[5], "birth level", lno)? as usize;
            if birth < expected_level || birth > level_count - 1 {
                return Err(ParseError::new(lno, format!("birth level {birth} out of range")));
            }
            if parent.is_none() != (birth == level_count - 1) {
                return Err(ParseError::new(
                    lno,
                    "working-level segments have no parent; later births require one",
                ));
            }
            let nx = parse_f4_token(t[7], "centroid x", lno)?;
            let ny = parse_f4_token(t[8], "centroid y", lno)?;
            if !(0.0..=1.0).contains(&nx) || !(0.0..=1.0).contains(&ny) {
                return Err(ParseError::new(lno, "centroid outside [0,1]"));
            }
            let area = parse_uint(t[10], "area", lno)? as usize;
            if area == 0 || area > bw * bh {
                return Err(ParseError::new(lno, format!("area {area} out of range")));
            }
            let perimeter = parse_uint(t[12], "perimeter", lno)? as usize;
            if perimeter < 4 {
                return Err(ParseError::new(lno, format!("perimeter {perimeter} below 4")));
            }
            let mean = parse_f4_token(t[14], "mean", lno)?;
            if !(0.0..=255.0).contains(&mean) {
                return Err(ParseError::new(lno, "mean outside [0,255]"));
            }
            let x0 = parse_uint(t[16], "bbox x0", lno)? as usize;
            let y0 = parse_uint(t[17], "bbox y0", lno)? as usize;
            let x1 = parse_uint(t[18], "bbox x1", lno)? as usize;
            let y1 = parse_uint(t[19], "bbox y1", lno)? as usize;
            if x0 > x1 || x1 >= bw || y0 > y1 || y1 >= bh {
                return Err(ParseError::new(lno, "bbox outside the level or inverted"));
            }
            match lineage.get(&id) {
                Some(&(p, b)) if (p, b) != (parent, birth) => {
                    return Err(ParseError::new(lno, format!("segment {id} changes parent or birth")));
                }
                _ => {
                    lineage.insert(id, (parent, birth));
                }
            }
            records.push(SegmentRecord {
                id,
                level: expected_level,
                parent,
                birth,
                nx,
                ny,
                area,
                perimeter,
                mean,
                bbox: (x0, y0, x1, y1),
            });
            cursor += 1;
        }
        if records.is_empty() {
            return Err(ParseError::new(cursor + 1, "level block has no segments"));
        }
        let total: usize = records.iter().map(|r| r.area).sum();
        if total != bw * bh {
            return Err(ParseError::new(
                cursor + 1,
                format!("segment areas sum to {total}, level has {} pixels", bw * bh),
            ));
        }
        let ids: BTreeSet<u32> = records.iter().map(|r| r.id).collect();

        let mut relations: Vec<RelationTriple> = Vec::new();
        while let Some(line) = lines.get(cursor) {
            if !line.starts_with("REL ") {
                break;
            }
            let lno = cursor + 1;
            let t: Vec<&str> = line.split(' ').collect();
            if t.len() != 4 {
                return Err(ParseError::new(lno, format!("REL line has {} tokens, expected 4", t.len())));
            }
            let subject = parse_uint(t[1], "relation subject", lno)? as u32;
            let predicate = Predicate::from_str(t[2])
                .ok_or_else(|| ParseError::new(lno, format!("unknown predicate {:?}", t[2])))?;
            let object = parse_uint(t[3], "relation object", lno)? as u32;
            if subject == object {
                return Err(ParseError::new(lno, "relation relates a segment to itself"));
            }
            if !ids.contains(&subject) || !ids.contains(&object) {
                return Err(ParseError::new(lno, "relation references a missing segment"));
            }
            if predicate == Predicate::Adjacent && subject > object {
                return Err(ParseError::new(lno, "ADJACENT must list the lower id first"));
            }
            let triple = RelationTriple { subject, predicate, object };
            if let Some(last) = relations.last() {
                if *last >= triple {
                    return Err(ParseError::new(lno, "relation ordering violated"));
                }
            }
            relations.push(triple);
            cursor += 1;
        }
        let relset: BTreeSet<RelationTriple> = relations.iter().copied().collect();
        for rel in &relations {
            if let Some(dual) = rel.predicate.dual() {
                let want = RelationTriple { subject: rel.object, predicate: dual, object: rel.subject };
                if !relset.contains(&want) {
                    return Err(ParseError::new(
                        cursor,
                        format!("missing dual REL {} {} {}", want.subject, want.predicate, want.object),
                    ));
                }
            }
        }

        blocks.push(LevelBlock { level: expected_level, width: bw, height: bh, records, relations });
    }

    if cursor != lines.len() {
        return Err(ParseError::new(cursor + 1, "trailing content after the last level block"));
    }
    Ok(SceneDescription { width, height, theta, a_min, levels: blocks })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReconstructError {
    NoFinestLevel,
    DimensionMismatch(DimensionMismatch),
    MissingSegment(u32),
}

impl fmt::Display for ReconstructError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReconstructError::NoFinestLevel => write!(f, "description has no level 0 block"),
            ReconstructError::DimensionMismatch(d) => d.fmt(f),
            ReconstructError::MissingSegment(id) => {
                write!(f, "label map references segment {id} absent from the description")
            }
        }
    }
}

impl std::error::Error for ReconstructError {}

/// Paint every pixel with its segment's mean from the level-0 block.
pub fn reconstruct(d: &SceneDescription, s: &LevelState) -> Result<Raster, ReconstructError> {
    let block = d.levels.iter().find(|b| b.level == 0).ok_or(ReconstructError::NoFinestLevel)?;
    let (w, h) = (s.label_map().width(), s.label_map().height());
    if (block.width, block.height) != (w, h) {
        return Err(ReconstructError::DimensionMismatch(DimensionMismatch {
            expected: (block.width, block.height),
            got: (w, h),
        }));
    }
    let means: BTreeMap<u32, f64> = block.records.iter().map(|r| (r.id, r.mean)).collect();
    let mut samples = Vec::with_capacity(w * h);
    for &l in s.label_map().labels() {
        let m = means.get(&l).ok_or(ReconstructError::MissingSegment(l))?;
        samples.push(m.round() as u8);
    }
    Ok(Raster::luma(w, h, samples))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixation {
    pub id: u32,
    pub nx: f64,
    pub ny: f64,
    pub saliency: f64,
}

/// Rank working-level segments by boundary contrast: the sum over adjacent
/// neighbors of (shared edges / own perimeter) * |mean difference| / 255.
/// Zero-saliency segments (no contrasting neighbor) are excluded.
pub fn propose_fixations(records: &[SegmentRecord], s: &LevelState, n: usize) -> Vec<Fixation> {
    let by_id: BTreeMap<u32, &SegmentRecord> = records.iter().map(|r| (r.id, r)).collect();
    let mut scores: BTreeMap<u32, f64> = records.iter().map(|r| (r.id, 0.0)).collect();
    for (&(a, b), &edges) in &shared_edges(s) {
        let contrast = (by_id[&a].mean - by_id[&b].mean).abs() / 255.0;
        *scores.get_mut(&a).unwrap() += edges as f64 / by_id[&a].perimeter as f64 * contrast;
        *scores.get_mut(&b).unwrap() += edges as f64 / by_id[&b].perimeter as f64 * contrast;
    }
    let mut ranked: Vec<(u32, f64)> = scores.into_iter().filter(|&(_, s)| s > 0.0).collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(n)
        .map(|(id, saliency)| Fixation { id, nx: by_id[&id].nx, ny: by_id[&id].ny, saliency })
        .collect()
}
