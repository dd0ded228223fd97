//! Story memory and scene interpretation: a read-only library plus a
//! mutable session store, leaf-constraint matching against the finest level
//! of a description, and situation blindness when nothing fits well enough.
//!
//! Stories are canonical text files. The parser accepts directives in any
//! order between `STORY` and `END`, but serialization always emits the
//! sorted canonical form, and the library checksum is defined over that
//! form, so a library's identity is independent of incidental file layout.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::OpenOptions;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use crate::descriptor::{q4, LevelBlock, Predicate, SceneDescription, SegmentRecord};

/// Stories larger than this fall back to greedy assignment.
pub(crate) const EXHAUSTIVE_LEAF_LIMIT: usize = 8;

pub const DEFAULT_SIGMA: f64 = 0.6;

/// Segment attributes a leaf may constrain, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Attribute {
    AreaFraction,
    MeanIntensity,
    Nx,
    Ny,
}

impl Attribute {
    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::AreaFraction => "area_fraction",
            Attribute::MeanIntensity => "mean_intensity",
            Attribute::Nx => "nx",
            Attribute::Ny => "ny",
        }
    }

    pub fn from_str(s: &str) -> Option<Attribute> {
        Some(match s {
            "area_fraction" => Attribute::AreaFraction,
            "mean_intensity" => Attribute::MeanIntensity,
            "nx" => Attribute::Nx,
            "ny" => Attribute::Ny,
            _ => return None,
        })
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed range; `lo == hi` demands an exact value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoryNode {
    pub path: Vec<u32>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafPattern {
    pub path: Vec<u32>,
    pub name: String,
    pub constraints: BTreeMap<Attribute, Interval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Requirement {
    pub subject: String,
    pub predicate: Predicate,
    pub object: String,
}

/// One unit of stored knowledge: a labeled tree whose leaves carry
/// attribute constraints, plus required relations among the leaves.
/// Parsed stories are canonical: nodes and leaves sorted by path,
/// requirements sorted by (subject, predicate, object), values on the
/// 4-decimal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Story {
    pub id: String,
    pub nodes: Vec<StoryNode>,
    pub leaves: Vec<LeafPattern>,
    pub requires: Vec<Requirement>,
    pub sigma: Option<f64>,
}

#[derive(Debug)]
pub enum StoryError {
    Parse { source: String, line: usize, message: String },
    DuplicateId(String),
    UnknownId(String),
    TargetExists(PathBuf),
    Io(io::Error),
}

impl fmt::Display for StoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoryError::Parse { source, line, message } => write!(f, "{source}:{line}: {message}"),
            StoryError::DuplicateId(id) => write!(f, "story id {id:?} already present"),
            StoryError::UnknownId(id) => write!(f, "no story with id {id:?}"),
            StoryError::TargetExists(p) => write!(f, "refusing to overwrite {}", p.display()),
            StoryError::Io(e) => write!(f, "story write failed: {e}"),
        }
    }
}

impl std::error::Error for StoryError {}

fn valid_name(tok: &str) -> bool {
    !tok.is_empty() && tok.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn parse_path(tok: &str) -> Option<Vec<u32>> {
    let mut path = Vec::new();
    for comp in tok.split('.') {
        let n: u32 = comp.parse().ok()?;
        if n.to_string() != comp {
            return None;
        }
        path.push(n);
    }
    Some(path)
}

fn dotted(path: &[u32]) -> String {
    path.iter().map(u32::to_string).collect::<Vec<_>>().join(".")
}

/// Parse one story file. `source` labels errors (usually the file name).
pub fn parse_story(source: &str, text: &str) -> Result<Story, StoryError> {
    let err = |line: usize, message: String| StoryError::Parse {
        source: source.to_string(),
        line,
        message,
    };
    if !text.ends_with('\n') {
        return Err(err(text.lines().count().max(1), String::from("missing trailing newline")));
    }

    let mut id: Option<String> = None;
    let mut nodes: Vec<(Vec<u32>, String, usize)> = Vec::new();
    let mut leaves: Vec<(Vec<u32>, String, usize)> = Vec::new();
    let mut constraints: Vec<(String, Attribute, Interval, usize)> = Vec::new();
    let mut requires: Vec<(Requirement, usize)> = Vec::new();
    let mut sigma: Option<f64> = None;
    let mut ended = false;
    let mut last_line = 0;

    let parse_float = |tok: &str, what: &str, lno: usize| -> Result<f64, StoryError> {
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(q4(v)),
            _ => Err(StoryError::Parse {
                source: source.to_string(),
                line: lno,
                message: format!("bad {what} {tok:?}"),
            }),
        }
    };

    for (i, raw) in text[..text.len() - 1].split('\n').enumerate() {
        let lno = i + 1;
        last_line = lno;
        if raw.contains('\r') {
            return Err(err(lno, String::from("carriage return in line")));
        }
        if raw.is_empty() {
            continue;
        }
        if ended {
            return Err(err(lno, String::from("content after END")));
        }
        let t: Vec<&str> = raw.split(' ').collect();
        let arity = |n: usize| -> Result<(), StoryError> {
            if t.len() == n {
                Ok(())
            } else {
                Err(StoryError::Parse {
                    source: source.to_string(),
                    line: lno,
                    message: format!("{} line has {} tokens, expected {n}", t[0], t.len()),
                })
            }
        };
        if t[0] != "STORY" && id.is_none() {
            return Err(err(lno, String::from("first directive must be STORY")));
        }
        match t[0] {
            "STORY" => {
                arity(2)?;
                if id.is_some() {
                    return Err(err(lno, String::from("second STORY line")));
                }
                if !valid_name(t[1]) {
                    return Err(err(lno, format!("bad story id {:?}", t[1])));
                }
                id = Some(t[1].to_string());
            }
            "NODE" => {
                arity(3)?;
                let path = parse_path(t[1]).ok_or_else(|| err(lno, format!("bad path {:?}", t[1])))?;
                if !valid_name(t[2]) {
                    return Err(err(lno, format!("bad label {:?}", t[2])));
                }
                nodes.push((path, t[2].to_string(), lno));
            }
            "LEAF" => {
                arity(3)?;
                let path = parse_path(t[1]).ok_or_else(|| err(lno, format!("bad path {:?}", t[1])))?;
                if !valid_name(t[2]) {
                    return Err(err(lno, format!("bad leaf name {:?}", t[2])));
                }
                leaves.push((path, t[2].to_string(), lno));
            }
            "CONSTRAIN" => {
                arity(5)?;
                let attr = Attribute::from_str(t[2])
                    .ok_or_else(|| err(lno, format!("unknown attribute {:?}", t[2])))?;
                let lo = parse_float(t[3], "range low", lno)?;
                let hi = parse_float(t[4], "range high", lno)?;
                if lo > hi {
                    return Err(err(lno, format!("range low {lo} above high {hi}")));
                }
                constraints.push((t[1].to_string(), attr, Interval { lo, hi }, lno));
            }
            "REQUIRE" => {
                arity(4)?;
                let predicate = Predicate::from_str(t[2])
                    .ok_or_else(|| err(lno, format!("unknown predicate {:?}", t[2])))?;
                if t[1] == t[3] {
                    return Err(err(lno, String::from("relation relates a leaf to itself")));
                }
                requires.push((
                    Requirement {
                        subject: t[1].to_string(),
                        predicate,
                        object: t[3].to_string(),
                    },
                    lno,
                ));
            }
            "SIGMA" => {
                arity(2)?;
                if sigma.is_some() {
                    return Err(err(lno, String::from("second SIGMA line")));
                }
                let v = parse_float(t[1], "sigma", lno)?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(err(lno, String::from("sigma outside [0,1]")));
                }
                sigma = Some(v);
            }
            "END" => {
                arity(1)?;
                ended = true;
            }
            other => return Err(err(lno, format!("unknown directive {other:?}"))),
        }
    }
    if !ended {
        return Err(err(last_line.max(1), String::from("missing END")));
    }
    let id = id.expect("END implies a prior STORY line");

    let mut taken_paths: BTreeSet<&[u32]> = BTreeSet::new();
    for (path, _, lno) in nodes.iter().chain(leaves.iter()) {
        if !taken_paths.insert(path) {
            return Err(err(*lno, format!("duplicate path {}", dotted(path))));
        }
    }
    let node_paths: BTreeSet<&[u32]> = nodes.iter().map(|(p, _, _)| p.as_slice()).collect();
    for (path, _, lno) in &leaves {
        if path.len() == 1 {
            return Err(err(*lno, String::from("the root must be a labeled node, not a leaf")));
        }
    }
    for (path, _, lno) in nodes.iter().chain(leaves.iter()) {
        if path.len() == 1 {
            if path[0] != 0 {
                return Err(err(*lno, format!("root path must be 0, found {}", dotted(path))));
            }
        } else if !node_paths.contains(&path[..path.len() - 1]) {
            return Err(err(*lno, format!("path {} has no parent node", dotted(path))));
        }
    }
    if !node_paths.contains(&[0][..]) {
        return Err(err(last_line, String::from("missing root node 0")));
    }
    if leaves.is_empty() {
        return Err(err(last_line, String::from("story has no leaves")));
    }

    let mut leaf_map: BTreeMap<String, LeafPattern> = BTreeMap::new();
    for (path, name, lno) in &leaves {
        if leaf_map
            .insert(
                name.clone(),
                LeafPattern { path: path.clone(), name: name.clone(), constraints: BTreeMap::new() },
            )
            .is_some()
        {
            return Err(err(*lno, format!("duplicate leaf name {name:?}")));
        }
    }
    for (name, attr, iv, lno) in constraints {
        let leaf = leaf_map
            .get_mut(&name)
            .ok_or_else(|| err(lno, format!("constraint on unknown leaf {name:?}")))?;
        if leaf.constraints.insert(attr, iv).is_some() {
            return Err(err(lno, format!("duplicate constraint {name} {attr}")));
        }
    }
    let mut seen_reqs: BTreeSet<(String, Predicate, String)> = BTreeSet::new();
    for (req, lno) in &requires {
        for name in [&req.subject, &req.object] {
            if !leaf_map.contains_key(name) {
                return Err(err(*lno, format!("relation references unknown leaf {name:?}")));
            }
        }
        if !seen_reqs.insert((req.subject.clone(), req.predicate, req.object.clone())) {
            return Err(err(*lno, String::from("duplicate relation requirement")));
        }
    }

    let mut nodes: Vec<StoryNode> =
        nodes.into_iter().map(|(path, label, _)| StoryNode { path, label }).collect();
    nodes.sort_by(|a, b| a.path.cmp(&b.path));
    let mut leaves: Vec<LeafPattern> = leaf_map.into_values().collect();
    leaves.sort_by(|a, b| a.path.cmp(&b.path));
    let mut requires: Vec<Requirement> = requires.into_iter().map(|(r, _)| r).collect();
    requires.sort_by(|a, b| {
        (&a.subject, a.predicate, &a.object).cmp(&(&b.subject, b.predicate, &b.object))
    });

    Ok(Story { id, nodes, leaves, requires, sigma })
}

/// Canonical story text; parsing it back yields a structurally equal story.
pub fn serialize_story(s: &Story) -> String {
    let mut out = format!("STORY {}\n", s.id);
    for n in &s.nodes {
        out.push_str(&format!("NODE {} {}\n", dotted(&n.path), n.label));
    }
    for l in &s.leaves {
        out.push_str(&format!("LEAF {} {}\n", dotted(&l.path), l.name));
    }
    let mut by_name: Vec<&LeafPattern> = s.leaves.iter().collect();
    by_name.sort_by(|a, b| a.name.cmp(&b.name));
    for l in by_name {
        for (attr, iv) in &l.constraints {
            out.push_str(&format!("CONSTRAIN {} {} {:.4} {:.4}\n", l.name, attr, iv.lo, iv.hi));
        }
    }
    for r in &s.requires {
        out.push_str(&format!("REQUIRE {} {} {}\n", r.subject, r.predicate, r.object));
    }
    if let Some(v) = s.sigma {
        out.push_str(&format!("SIGMA {v:.4}\n"));
    }
    out.push_str("END\n");
    out
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

pub(crate) fn fnv1a64(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
    }
    h
}

/// The immutable library loaded at start plus the mutable session store.
/// Story ids are unique across both.
#[derive(Debug, Default)]
pub struct MemoryStores {
    library: BTreeMap<String, Story>,
    session: BTreeMap<String, Story>,
}

impl MemoryStores {
    pub fn empty() -> MemoryStores {
        MemoryStores::default()
    }

    /// Parse and validate `(source label, text)` pairs into a frozen library.
    pub fn load_library<S: AsRef<str>, T: AsRef<str>>(
        sources: &[(S, T)],
    ) -> Result<MemoryStores, StoryError> {
        let mut library = BTreeMap::new();
        for (label, text) in sources {
            let story = parse_story(label.as_ref(), text.as_ref())?;
            if library.contains_key(&story.id) {
                return Err(StoryError::DuplicateId(story.id));
            }
            library.insert(story.id.clone(), story);
        }
        Ok(MemoryStores { library, session: BTreeMap::new() })
    }

    pub fn library(&self) -> &BTreeMap<String, Story> {
        &self.library
    }

    pub fn session(&self) -> &BTreeMap<String, Story> {
        &self.session
    }

    /// FNV-1a over the canonical serializations of library stories in id
    /// order; recomputed on demand so any mutation would show.
    pub fn library_checksum(&self) -> u64 {
        self.library
            .values()
            .fold(FNV_OFFSET, |h, s| fnv1a64(h, serialize_story(s).as_bytes()))
    }

    /// Add an externally supplied story to the session store only.
    pub fn horizontal_import(&mut self, source: &str, text: &str) -> Result<(), StoryError> {
        let story = parse_story(source, text)?;
        if self.library.contains_key(&story.id) || self.session.contains_key(&story.id) {
            return Err(StoryError::DuplicateId(story.id));
        }
        self.session.insert(story.id.clone(), story);
        Ok(())
    }

    /// Persist a session story to a new library file, then drop it from the
    /// session. Refuses to overwrite; the story stays in the session if the
    /// write fails.
    pub fn promote(&mut self, id: &str, target: &Path) -> Result<(), StoryError> {
        let story = self.session.get(id).ok_or_else(|| StoryError::UnknownId(id.to_string()))?;
        let mut file = match OpenOptions::new().write(true).create_new(true).open(target) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                return Err(StoryError::TargetExists(target.to_path_buf()));
            }
            Err(e) => return Err(StoryError::Io(e)),
        };
        file.write_all(serialize_story(story).as_bytes()).map_err(StoryError::Io)?;
        self.session.remove(id);
        Ok(())
    }

    /// Independent copy from either store; mutating it cannot reach back.
    pub fn recall_copy(&self, id: &str) -> Result<Story, StoryError> {
        self.library
            .get(id)
            .or_else(|| self.session.get(id))
            .cloned()
            .ok_or_else(|| StoryError::UnknownId(id.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Interpretation {
    Match { story: String, score: f64, assignment: BTreeMap<String, u32> },
    SituationBlindness,
}

/// Per-constraint fit: 1 inside the range, linear decay to 0 at a distance
/// of one range width outside it; a zero-width range is exact or nothing.
fn leaf_compat(leaf: &LeafPattern, rec: &SegmentRecord, level_pixels: f64) -> f64 {
    let mut c = 1.0;
    for (&attr, iv) in &leaf.constraints {
        let v = match attr {
            Attribute::AreaFraction => rec.area as f64 / level_pixels,
            Attribute::MeanIntensity => rec.mean,
            Attribute::Nx => rec.nx,
            Attribute::Ny => rec.ny,
        };
        if v >= iv.lo && v <= iv.hi {
            continue;
        }
        let width = iv.hi - iv.lo;
        if width <= 0.0 {
            return 0.0;
        }
        let d = if v < iv.lo { iv.lo - v } else { v - iv.hi };
        c *= (1.0 - d / width).max(0.0);
    }
    c
}

/// ADJACENT is stored once with the lower id first, so it is checked
/// symmetrically; every other predicate is directional.
fn requirement_met(rels: &BTreeSet<(u32, Predicate, u32)>, sa: u32, p: Predicate, sb: u32) -> bool {
    if p == Predicate::Adjacent {
        rels.contains(&(sa.min(sb), Predicate::Adjacent, sa.max(sb)))
    } else {
        rels.contains(&(sa, p, sb))
    }
}

/// Exact best injective leaf-to-segment assignment by depth-first search.
/// Candidates are tried by descending compatibility (ties toward the lower
/// segment id); branches whose optimistic bound cannot beat the incumbent
/// are pruned, which never changes the result.
pub(crate) fn best_assignment(
    compat: &[Vec<f64>],
    requires: &[(usize, Predicate, usize)],
    rels: &BTreeSet<(u32, Predicate, u32)>,
    seg_ids: &[u32],
) -> (f64, Option<Vec<usize>>) {
    let n = compat.len();
    let m = seg_ids.len();
    if n == 0 || m < n {
        return (0.0, None);
    }
    let mut by_later: Vec<Vec<(usize, Predicate, usize)>> = vec![Vec::new(); n];
    for &(a, p, b) in requires {
        by_later[a.max(b)].push((a, p, b));
    }
    let order: Vec<Vec<usize>> = compat
        .iter()
        .map(|row| {
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
            idx
        })
        .collect();
    // suffix[i] = best possible compatibility sum over leaves i..n
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        let rowmax = compat[i].iter().cloned().fold(0.0f64, f64::max);
        suffix[i] = suffix[i + 1] + rowmax;
    }

    struct Search<'s> {
        compat: &'s [Vec<f64>],
        by_later: &'s [Vec<(usize, Predicate, usize)>],
        order: &'s [Vec<usize>],
        suffix: &'s [f64],
        rels: &'s BTreeSet<(u32, Predicate, u32)>,
        seg_ids: &'s [u32],
        n: usize,
        used: Vec<bool>,
        assign: Vec<usize>,
        best_score: f64,
        best_assign: Option<Vec<usize>>,
    }

    impl Search<'_> {
        fn dfs(&mut self, i: usize, sum: f64, factor: f64) {
            if i == self.n {
                let score = factor * (sum / self.n as f64);
                if score > self.best_score {
                    self.best_score = score;
                    self.best_assign = Some(self.assign.clone());
                }
                return;
            }
            if factor * ((sum + self.suffix[i]) / self.n as f64) <= self.best_score {
                return;
            }
            for t in 0..self.order[i].len() {
                let j = self.order[i][t];
                if self.used[j] {
                    continue;
                }
                self.used[j] = true;
                self.assign.push(j);
                let mut f = factor;
                for t2 in 0..self.by_later[i].len() {
                    let (a, p, b) = self.by_later[i][t2];
                    let sa = self.seg_ids[self.assign[a]];
                    let sb = self.seg_ids[self.assign[b]];
                    if !requirement_met(self.rels, sa, p, sb) {
                        f *= 0.25;
                    }
                }
                self.dfs(i + 1, sum + self.compat[i][j], f);
                self.assign.pop();
                self.used[j] = false;
            }
        }
    }

    let mut s = Search {
        compat,
        by_later: &by_later,
        order: &order,
        suffix: &suffix,
        rels,
        seg_ids,
        n,
        used: vec![false; m],
        assign: Vec::with_capacity(n),
        best_score: -1.0,
        best_assign: None,
    };
    s.dfs(0, 0.0, 1.0);
    (s.best_score.max(0.0), s.best_assign)
}

/// Leaves in order each take the most compatible free segment (ties toward
/// the lower id); the relation factor is applied afterwards.
pub(crate) fn greedy_assignment(
    compat: &[Vec<f64>],
    requires: &[(usize, Predicate, usize)],
    rels: &BTreeSet<(u32, Predicate, u32)>,
    seg_ids: &[u32],
) -> (f64, Option<Vec<usize>>) {
    let n = compat.len();
    let m = seg_ids.len();
    if n == 0 || m < n {
        return (0.0, None);
    }
    let mut used = vec![false; m];
    let mut assign = Vec::with_capacity(n);
    let mut sum = 0.0;
    for row in compat {
        let mut pick: Option<usize> = None;
        for (j, &c) in row.iter().enumerate() {
            if used[j] {
                continue;
            }
            if pick.map_or(true, |k| c > row[k]) {
                pick = Some(j);
            }
        }
        let j = pick.expect("m >= n leaves a free segment");
        used[j] = true;
        assign.push(j);
        sum += row[j];
    }
    let mut factor = 1.0;
    for &(a, p, b) in requires {
        if !requirement_met(rels, seg_ids[assign[a]], p, seg_ids[assign[b]]) {
            factor *= 0.25;
        }
    }
    (factor * (sum / n as f64), Some(assign))
}

fn score_story(
    story: &Story,
    block: &LevelBlock,
    rels: &BTreeSet<(u32, Predicate, u32)>,
) -> (f64, Option<BTreeMap<String, u32>>) {
    let pixels = (block.width * block.height) as f64;
    let seg_ids: Vec<u32> = block.records.iter().map(|r| r.id).collect();
    let compat: Vec<Vec<f64>> = story
        .leaves
        .iter()
        .map(|leaf| block.records.iter().map(|rec| leaf_compat(leaf, rec, pixels)).collect())
        .collect();
    let index: BTreeMap<&str, usize> =
        story.leaves.iter().enumerate().map(|(i, l)| (l.name.as_str(), i)).collect();
    let requires: Vec<(usize, Predicate, usize)> = story
        .requires
        .iter()
        .map(|r| (index[r.subject.as_str()], r.predicate, index[r.object.as_str()]))
        .collect();
    let (score, assign) = if story.leaves.len() <= EXHAUSTIVE_LEAF_LIMIT {
        best_assignment(&compat, &requires, rels, &seg_ids)
    } else {
        greedy_assignment(&compat, &requires, rels, &seg_ids)
    };
    let map = assign.map(|a| {
        story.leaves.iter().zip(&a).map(|(l, &j)| (l.name.clone(), seg_ids[j])).collect()
    });
    (score, map)
}

/// Score every stored story against the finest level of `d` and return the
/// best one at or above its threshold, or situation blindness. A story with
/// more leaves than the scene has segments can never match. Ties go to the
/// lexicographically smaller story id.
pub fn match_scene(d: &SceneDescription, m: &MemoryStores, sigma: f64) -> Interpretation {
    let block = d.finest();
    let rels: BTreeSet<(u32, Predicate, u32)> =
        block.relations.iter().map(|r| (r.subject, r.predicate, r.object)).collect();
    let mut stories: Vec<&Story> = m.library().values().chain(m.session().values()).collect();
    stories.sort_by(|a, b| a.id.cmp(&b.id));

    let mut best: Option<(f64, &Story, BTreeMap<String, u32>)> = None;
    for story in stories {
        let (score, assignment) = score_story(story, block, &rels);
        let Some(assignment) = assignment else { continue };
        if score < story.sigma.unwrap_or(sigma) {
            continue;
        }
        if best.as_ref().map_or(true, |(b, _, _)| score > *b) {
            best = Some((score, story, assignment));
        }
    }
    match best {
        Some((score, story, assignment)) => {
            Interpretation::Match { story: story.id.clone(), score, assignment }
        }
        None => Interpretation::SituationBlindness,
    }
}
