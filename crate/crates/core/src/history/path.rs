//! Splitting paths, their details, and splicing two histories along
//! equivalent paths.

use num_bigint::BigUint;
use serde::Serialize;

use super::{Diagram, Width};
use crate::engine::{reduce_traced, RuleSource};
use crate::error::{Error, Result};
use crate::letter::{format_word, Word};

/// Which side of a segment its substitutions happen on. A segment with none
/// counts as left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

/// A vertical segment at column `x` covering rows `top..=bottom`. The
/// substitutions between those rows all lie on `side`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub top: usize,
    pub bottom: usize,
    pub x: Width,
    pub side: Side,
}

/// Segments from the top row to the bottom one. Consecutive segments either
/// share a row at the same column, or the first ends in the row above a
/// substitution line and the next starts in the row below it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingPath {
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Crossing {
    #[serde(serialize_with = "ser_word")]
    pub lhs: Word,
    pub lhs_split: usize,
    pub rhs_split: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SegmentDetail {
    pub side: Side,
    /// The `W - 1` letters on the quiet side, fewer at an end of the word.
    #[serde(serialize_with = "ser_word")]
    pub context: Word,
    pub crossing: Option<Crossing>,
}

/// Two paths are equivalent when their details are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PathDetails(pub Vec<SegmentDetail>);

fn ser_word<S: serde::Serializer>(w: &Word, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_word(w))
}

impl SplittingPath {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Letters of the first word left of the path.
    pub fn start_position(&self, d: &Diagram) -> usize {
        d.letters_left_of(0, &self.segments[0].x)
    }

    /// Letters of the last word left of the path.
    pub fn end_position(&self, d: &Diagram) -> usize {
        d.letters_left_of(d.last_row(), &self.segments.last().unwrap().x)
    }

    pub fn details(&self, d: &Diagram) -> PathDetails {
        let keep = d.window() - 1;
        let segs = &self.segments;
        let details = segs
            .iter()
            .enumerate()
            .map(|(k, seg)| {
                let (left, right) = d.split_at(seg.top, &seg.x);
                let context = match seg.side {
                    Side::Left => right[..keep.min(right.len())].to_vec(),
                    Side::Right => left[left.len() - keep.min(left.len())..].to_vec(),
                };
                let crossing = segs
                    .get(k + 1)
                    .filter(|n| n.top == seg.bottom + 1)
                    .map(|n| {
                        let line = &d.lines()[seg.bottom];
                        let count = |row: usize, cells: std::ops::Range<usize>, x: &Width| {
                            d.rows()[row][cells]
                                .iter()
                                .filter(|c| c.letter.is_some() && c.end() <= *x)
                                .count()
                        };
                        Crossing {
                            lhs: line.lhs.clone(),
                            lhs_split: count(seg.bottom, line.lhs_cells.clone(), &seg.x),
                            rhs_split: count(n.top, line.rhs_cells.clone(), &n.x),
                        }
                    });
                SegmentDetail {
                    side: seg.side,
                    context,
                    crossing,
                }
            })
            .collect();
        PathDetails(details)
    }

    /// How often a segment runs along an end of a substitution line it does
    /// not cross. The path then counts the line as lying on one side.
    pub fn endpoint_contacts(&self, d: &Diagram) -> usize {
        self.segments
            .iter()
            .map(|seg| {
                (seg.top..seg.bottom)
                    .filter(|&j| d.lines()[j].x0 == seg.x || d.lines()[j].x1 == seg.x)
                    .count()
            })
            .sum()
    }

    /// Checks that this is a splitting path of `d`, with detail words that
    /// stay clear of subword boundaries.
    pub fn check(&self, d: &Diagram) -> std::result::Result<(), String> {
        let segs = &self.segments;
        let (first, last) = match (segs.first(), segs.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err("empty path".into()),
        };
        if first.top != 0 || last.bottom != d.last_row() {
            return Err("path does not run from the top row to the bottom one".into());
        }
        let on_edge = |row: usize, x: &Width| {
            *x == Width::from_integer(0.into()) || d.rows()[row].iter().any(|c| c.end() == *x)
        };
        for (k, seg) in segs.iter().enumerate() {
            if seg.top > seg.bottom {
                return Err(format!("segment {k} runs upwards"));
            }
            for row in seg.top..=seg.bottom {
                if !on_edge(row, &seg.x) {
                    return Err(format!("segment {k} cuts a letter in row {row}"));
                }
            }
            for j in seg.top..seg.bottom {
                let line = &d.lines()[j];
                let side = if line.x1 <= seg.x {
                    Side::Left
                } else if line.x0 >= seg.x {
                    Side::Right
                } else {
                    return Err(format!(
                        "segment {k} cuts the substitution line under row {j}"
                    ));
                };
                if side != seg.side {
                    return Err(format!("segment {k} has substitutions on both sides"));
                }
            }
            if let Some(n) = segs.get(k + 1) {
                if n.top == seg.bottom {
                    if n.x != seg.x {
                        return Err(format!("segments {k} and {} do not join", k + 1));
                    }
                } else if n.top == seg.bottom + 1 {
                    let line = &d.lines()[seg.bottom];
                    let inside = |x: &Width| line.x0 <= *x && *x <= line.x1;
                    if !inside(&seg.x) || !inside(&n.x) {
                        return Err(format!(
                            "segments {k} and {} are not linked by a substitution line",
                            k + 1
                        ));
                    }
                } else {
                    return Err(format!("gap between segments {k} and {}", k + 1));
                }
            }
            // Detail words must not cross a boundary.
            let p = d.letters_left_of(seg.top, &seg.x);
            let n = d.word(seg.top).len();
            let keep = d.window() - 1;
            let (lo, hi) = match seg.side {
                Side::Left => (p, (p + keep).min(n)),
                Side::Right => (p.saturating_sub(keep), p),
            };
            if d.boundaries_at(seg.top).iter().any(|&b| lo < b && b < hi) {
                return Err(format!("context of segment {k} crosses a subword boundary"));
            }
        }
        Ok(())
    }
}

/// A splitting path ending beside letter `target` of the last row, on
/// `end_side` of it. The path climbs along the letter, and at each
/// substitution line that made it, jumps to the lhs letter of least
/// generation; segments are then split where the side of the substitutions
/// passing them changes.
pub fn extract_splitting_path(
    d: &Diagram,
    target: usize,
    end_side: Side,
) -> Result<(SplittingPath, PathDetails)> {
    let t = d.last_row();
    let rows = d.rows();
    let mut cell = d
        .letter_cell(t, target)
        .ok_or_else(|| Error::Precondition(format!("no letter {target} in the last row")))?;
    if rows[t][cell].border {
        return Err(Error::Precondition(format!(
            "letter {target} is a border letter"
        )));
    }
    let edge = |row: usize, c: usize| match end_side {
        Side::Left => rows[row][c].x.clone(),
        Side::Right => rows[row][c].end(),
    };
    let mut raw: Vec<(usize, usize, Width)> = Vec::new();
    let (mut row, mut bottom, mut x) = (t, t, edge(t, cell));
    while row > 0 {
        let line = &d.lines()[row - 1];
        if line.rhs_cells.contains(&cell) {
            raw.push((row, bottom, x));
            let above = &rows[row - 1];
            cell = line
                .lhs_cells
                .clone()
                .filter(|&c| above[c].letter.is_some() && !above[c].border)
                .min_by_key(|&c| above[c].generation.unwrap_or(u32::MAX))
                .ok_or_else(|| {
                    Error::Precondition(format!("no non-border letter above line {}", row - 1))
                })?;
            row -= 1;
            bottom = row;
            x = edge(row, cell);
        } else {
            cell = rows[row][cell]
                .above
                .expect("copied cells know their origin");
            row -= 1;
        }
    }
    raw.push((0, bottom, x));
    raw.reverse();

    let mut segments = Vec::new();
    for (top, bottom, x) in raw {
        let mut from = top;
        let mut side = None;
        for j in top..bottom {
            let line = &d.lines()[j];
            let s = if line.x1 <= x {
                Side::Left
            } else if line.x0 >= x {
                Side::Right
            } else {
                return Err(Error::Precondition(format!(
                    "path cuts the substitution line under row {j}"
                )));
            };
            match side {
                Some(cur) if cur != s => {
                    segments.push(Segment {
                        top: from,
                        bottom: j,
                        x: x.clone(),
                        side: cur,
                    });
                    from = j;
                    side = Some(s);
                }
                None => side = Some(s),
                _ => {}
            }
        }
        segments.push(Segment {
            top: from,
            bottom,
            x,
            side: side.unwrap_or(Side::Left),
        });
    }
    let path = SplittingPath { segments };
    let details = path.details(d);
    Ok((path, details))
}

/// Bound on the number of classes of splitting paths of length at most `n`:
/// `(2 (W+1)^2 a^(2W+1))^(n+1)`.
pub fn class_count_bound(alphabet: usize, w: usize, n: usize) -> BigUint {
    let base = BigUint::from(2u32)
        * BigUint::from(w + 1).pow(2)
        * BigUint::from(alphabet).pow(2 * w as u32 + 1);
    base.pow(n as u32 + 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpliceResult {
    /// The part of the first word of `v` left of its path, then the part of
    /// the first word of `w` right of its path.
    pub word: Word,
    /// The same for the last words.
    pub predicted: Word,
    /// The part of `v` left of its path, in the row where the last segment
    /// starts.
    pub left_at_last_segment: Word,
}

/// Splices the history in `dv` with the one in `dw` along equivalent paths.
pub fn splice(
    dv: &Diagram,
    pv: &SplittingPath,
    dw: &Diagram,
    pw: &SplittingPath,
) -> Result<SpliceResult> {
    if pv.details(dv) != pw.details(dw) {
        return Err(Error::Precondition(
            "the splitting paths are not equivalent".into(),
        ));
    }
    let (v0, _) = dv.split_at(0, &pv.segments[0].x);
    let (_, w0) = dw.split_at(0, &pw.segments[0].x);
    let last_v = pv.segments.last().unwrap();
    let last_w = pw.segments.last().unwrap();
    let (vr, _) = dv.split_at(dv.last_row(), &last_v.x);
    let (_, ws) = dw.split_at(dw.last_row(), &last_w.x);
    let (left_at_last_segment, _) = dv.split_at(last_v.top, &last_v.x);
    Ok(SpliceResult {
        word: [v0, w0].concat(),
        predicted: [vr, ws].concat(),
        left_at_last_segment,
    })
}

impl SpliceResult {
    /// Runs `src` on the spliced word and returns the step after which the
    /// predicted word appears, if it does.
    pub fn verify<S: RuleSource + ?Sized>(&self, src: &S) -> Result<Option<usize>> {
        let h = reduce_traced(src, &self.word)?;
        Ok(h.words.iter().position(|w| *w == self.predicted))
    }
}
