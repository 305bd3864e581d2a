//! Diagrams of reduction histories, splitting paths and splicing, and the
//! search for words that break a candidate system.
//!
//! Row `i` of a diagram is the word `w_i`, drawn as cells of exact rational
//! width; row 0 has unit widths. The substitution taking `w_i` to `w_{i+1}`
//! is a line under its left-hand side, and the right-hand side letters share
//! that span. An empty right-hand side leaves a black cell, which is kept in
//! later rows until a substitution swallows it.
//!
//! Subword boundaries are fixed columns of row 0. They stay where they are in
//! every row: a deletion convention decides which letters of a right-hand
//! side fall on which side. The `W - 1` letters on either side of a boundary
//! are border letters, which keep their width in a mixed right-hand side and
//! carry no generation.

mod breaker;
mod path;
mod render;

pub use breaker::{find_breaker, naive_f2xz_candidate, BreakerOutcome, BreakerReport, F2xzSets};
pub use path::{
    class_count_bound, extract_splitting_path, splice, Crossing, PathDetails, Segment,
    SegmentDetail, Side, SpliceResult, SplittingPath,
};
pub use render::{render_ascii, render_svg};

use std::borrow::Cow;
use std::collections::HashMap;
use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::engine::ReductionHistory;
use crate::error::{Error, Result};
use crate::letter::{format_word, Letter, Word};

pub type Width = BigRational;

fn int(n: usize) -> Width {
    BigRational::from_integer(BigInt::from(n))
}

/// For each rule, which letters of the left-hand side survive as the letters
/// of the right-hand side: rhs position `j` comes from lhs position `map[j]`.
/// The default keeps a prefix, so the last letters are the deleted ones.
#[derive(Clone, Debug, Default)]
pub struct DeletionConvention {
    custom: HashMap<(Word, Word), Vec<usize>>,
}

impl DeletionConvention {
    pub fn keep_prefix() -> DeletionConvention {
        DeletionConvention::default()
    }

    pub fn set(&mut self, lhs: Word, rhs: Word, map: Vec<usize>) -> Result<()> {
        if map.len() != rhs.len()
            || map.windows(2).any(|p| p[0] >= p[1])
            || map.last().is_some_and(|&m| m >= lhs.len())
        {
            return Err(Error::Precondition(format!(
                "{:?} is not an order-preserving map from {} into {}",
                map,
                format_word(&rhs),
                format_word(&lhs)
            )));
        }
        self.custom.insert((lhs, rhs), map);
        Ok(())
    }

    pub fn map(&self, lhs: &[Letter], rhs: &[Letter]) -> Cow<'_, [usize]> {
        match self.custom.get(&(lhs.to_vec(), rhs.to_vec())) {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned((0..rhs.len()).collect()),
        }
    }
}

/// Where each boundary of `bounds` (letter indices in a word) moves when the
/// letters `start..start + lhs.len()` are replaced by `rhs`.
pub fn move_boundaries(
    bounds: &[usize],
    start: usize,
    lhs: &[Letter],
    rhs: &[Letter],
    conv: &DeletionConvention,
) -> Vec<usize> {
    let (l, r) = (lhs.len(), rhs.len());
    bounds
        .iter()
        .map(|&k| {
            if k <= start {
                k
            } else if k >= start + l {
                k - (l - r)
            } else {
                start
                    + conv
                        .map(lhs, rhs)
                        .iter()
                        .filter(|&&c| c < k - start)
                        .count()
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    /// `None` for a black cell.
    pub letter: Option<Letter>,
    pub x: Width,
    pub width: Width,
    pub generation: Option<u32>,
    pub border: bool,
    /// The cell this one copies in the row above.
    pub above: Option<usize>,
}

impl Cell {
    pub fn end(&self) -> Width {
        &self.x + &self.width
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionLine {
    pub rule: Option<usize>,
    pub x0: Width,
    pub x1: Width,
    pub lhs: Word,
    pub rhs: Word,
    /// Cells of the left-hand side in the row above the line, black cells it
    /// swallows included.
    pub lhs_cells: Range<usize>,
    /// Cells of the right-hand side in the row below.
    pub rhs_cells: Range<usize>,
}

#[derive(Clone, Debug)]
pub struct Diagram {
    window: usize,
    columns: Vec<usize>,
    rows: Vec<Vec<Cell>>,
    lines: Vec<SubstitutionLine>,
    /// Letter index of each boundary, per row.
    bounds: Vec<Vec<usize>>,
}

fn is_border(p: usize, bounds: &[usize], w: usize) -> bool {
    bounds.iter().any(|&k| p + w > k && p + 1 < k + w)
}

/// Builds the diagram of `history` for a system whose longest lhs has length
/// `window`. `boundaries` are columns of row 0.
pub fn build_diagram(
    history: &ReductionHistory,
    window: usize,
    boundaries: &[usize],
    conv: &DeletionConvention,
) -> Result<Diagram> {
    let w0 = history.start();
    let w = window.max(2);
    let mut columns = boundaries.to_vec();
    columns.sort_unstable();
    columns.dedup();
    if columns.last().is_some_and(|&c| c > w0.len()) {
        return Err(Error::Precondition(format!(
            "boundary beyond the word length {}",
            w0.len()
        )));
    }
    if !history.is_consistent() {
        return Err(Error::Precondition("inconsistent history".into()));
    }
    let first: Vec<Cell> = w0
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let border = is_border(i, &columns, w);
            Cell {
                letter: Some(l),
                x: int(i),
                width: Width::one(),
                generation: (!border).then_some(0),
                border,
                above: None,
            }
        })
        .collect();
    let mut d = Diagram {
        window: w,
        columns: columns.clone(),
        rows: vec![first],
        lines: vec![],
        bounds: vec![columns],
    };
    for step in &history.steps {
        d.push_step(step.rule, step.start, &step.lhs, &step.rhs, conv);
    }
    Ok(d)
}

impl Diagram {
    fn push_step(
        &mut self,
        rule: Option<usize>,
        start: usize,
        lhs: &[Letter],
        rhs: &[Letter],
        conv: &DeletionConvention,
    ) {
        let w = self.window;
        let row = self.rows.last().unwrap();
        let bounds = self.bounds.last().unwrap();
        let new_bounds = move_boundaries(bounds, start, lhs, rhs, conv);
        let letter_cells: Vec<usize> = (0..row.len())
            .filter(|&c| row[c].letter.is_some())
            .collect();
        let first = letter_cells[start];
        let last = letter_cells[start + lhs.len() - 1];
        let (x0, x1) = (row[first].x.clone(), row[last].end());
        let lhs_cells: Vec<&Cell> = row[first..=last]
            .iter()
            .filter(|c| c.letter.is_some())
            .collect();

        let mut next: Vec<Cell> = Vec::with_capacity(row.len());
        let copy = |c: usize, p: usize, next: &mut Vec<Cell>| {
            let old = &row[c];
            let border = old.letter.is_some() && is_border(p, &new_bounds, w);
            next.push(Cell {
                letter: old.letter,
                x: old.x.clone(),
                width: old.width.clone(),
                generation: if border { None } else { old.generation },
                border,
                above: Some(c),
            });
        };
        let mut p = 0;
        for c in 0..first {
            copy(c, p, &mut next);
            p += row[c].letter.is_some() as usize;
        }
        let rhs_from = next.len();

        // Columns of boundaries strictly inside the span cut it into pieces,
        // each holding the rhs letters on its side of the moved boundary.
        let inner: Vec<(Width, usize)> = self
            .columns
            .iter()
            .zip(&new_bounds)
            .map(|(&col, &k)| (int(col), k))
            .filter(|(col, _)| *col > x0 && *col < x1)
            .collect();
        let gen = 1 + lhs_cells
            .iter()
            .filter_map(|c| c.generation)
            .min()
            .unwrap_or(u32::MAX - 1);
        let gen = (gen != u32::MAX).then_some(gen);
        let new_cell = |letter: Option<Letter>, x: Width, width: Width, p: usize| {
            let border = letter.is_some() && is_border(p, &new_bounds, w);
            Cell {
                letter,
                x,
                width,
                generation: if border || letter.is_none() {
                    None
                } else {
                    gen
                },
                border,
                above: None,
            }
        };
        if !inner.is_empty() {
            let mut cuts = vec![x0.clone()];
            cuts.extend(inner.iter().map(|(c, _)| c.clone()));
            cuts.push(x1.clone());
            let mut j = 0;
            for (piece, ends) in cuts.windows(2).enumerate() {
                let limit = inner.get(piece).map_or(start + rhs.len(), |&(_, k)| k);
                let from = j;
                while j < rhs.len() && start + j < limit {
                    j += 1;
                }
                let span = &ends[1] - &ends[0];
                if from == j {
                    next.push(new_cell(None, ends[0].clone(), span, 0));
                    continue;
                }
                let each = span / int(j - from);
                for (i, &l) in rhs[from..j].iter().enumerate() {
                    next.push(new_cell(
                        Some(l),
                        &ends[0] + &each * int(i),
                        each.clone(),
                        start + from + i,
                    ));
                }
            }
        } else if rhs.is_empty() {
            next.push(new_cell(None, x0.clone(), &x1 - &x0, 0));
        } else {
            let border: Vec<bool> = (0..rhs.len())
                .map(|j| is_border(start + j, &new_bounds, w))
                .collect();
            let lead = border.iter().take_while(|&&b| b).count();
            let trail = border.iter().rev().take_while(|&&b| b).count();
            let mut widths: Vec<Width> = Vec::with_capacity(rhs.len());
            if lead == rhs.len() || lead + trail == 0 {
                let each = (&x1 - &x0) / int(rhs.len());
                widths.resize(rhs.len(), each);
            } else {
                let keep: Vec<Width> = (0..rhs.len())
                    .map(|j| {
                        if j < lead {
                            lhs_cells[j].width.clone()
                        } else if j >= rhs.len() - trail {
                            lhs_cells[lhs_cells.len() - (rhs.len() - j)].width.clone()
                        } else {
                            Width::zero()
                        }
                    })
                    .collect();
                let kept: Width = keep.iter().sum();
                let each = (&x1 - &x0 - kept) / int(rhs.len() - lead - trail);
                for (j, k) in keep.into_iter().enumerate() {
                    widths.push(if j < lead || j >= rhs.len() - trail {
                        k
                    } else {
                        each.clone()
                    });
                }
            }
            let mut x = x0.clone();
            for (j, (&l, width)) in rhs.iter().zip(widths).enumerate() {
                let nx = &x + &width;
                next.push(new_cell(Some(l), x, width, start + j));
                x = nx;
            }
        }
        let rhs_to = next.len();
        p = start + rhs.len();
        for c in last + 1..row.len() {
            copy(c, p, &mut next);
            p += row[c].letter.is_some() as usize;
        }
        self.lines.push(SubstitutionLine {
            rule,
            x0,
            x1,
            lhs: lhs.to_vec(),
            rhs: rhs.to_vec(),
            lhs_cells: first..last + 1,
            rhs_cells: rhs_from..rhs_to,
        });
        self.rows.push(next);
        self.bounds.push(new_bounds);
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Boundary columns of row 0.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn lines(&self) -> &[SubstitutionLine] {
        &self.lines
    }

    /// Index of the last row.
    pub fn last_row(&self) -> usize {
        self.rows.len() - 1
    }

    /// Letter index of each boundary in row `i`.
    pub fn boundaries_at(&self, i: usize) -> &[usize] {
        &self.bounds[i]
    }

    pub fn word(&self, i: usize) -> Word {
        self.rows[i].iter().filter_map(|c| c.letter).collect()
    }

    pub fn total_width(&self) -> Width {
        int(self.rows[0].len())
    }

    /// Cell index of the letter with index `p` in row `i`.
    pub fn letter_cell(&self, i: usize, p: usize) -> Option<usize> {
        self.rows[i]
            .iter()
            .enumerate()
            .filter(|(_, c)| c.letter.is_some())
            .nth(p)
            .map(|(c, _)| c)
    }

    /// Number of letters of row `i` lying left of column `x`.
    pub fn letters_left_of(&self, i: usize, x: &Width) -> usize {
        self.rows[i]
            .iter()
            .filter(|c| c.letter.is_some() && c.end() <= *x)
            .count()
    }

    /// Letters of row `i` left and right of column `x`.
    pub fn split_at(&self, i: usize, x: &Width) -> (Word, Word) {
        let word = self.word(i);
        let k = self.letters_left_of(i, x);
        (word[..k].to_vec(), word[k..].to_vec())
    }

    /// Checks the width and generation lemmas and the bookkeeping behind them.
    pub fn check_width_lemmas(&self) -> WidthReport {
        let w = self.window;
        let ratio = BigRational::new(BigInt::from(w), BigInt::from(w - 1));
        let total = self.total_width();
        let mut report = WidthReport::default();
        let mut bad = |row: usize, cell: Option<usize>, what: String| {
            report.violations.push(WidthViolation { row, cell, what })
        };
        for (i, row) in self.rows.iter().enumerate() {
            let sum: Width = row.iter().map(|c| c.width.clone()).sum();
            if sum != total {
                bad(i, None, format!("row width {sum} differs from {total}"));
            }
            let mut p = 0;
            for (c, cell) in row.iter().enumerate() {
                if cell.width <= Width::zero() {
                    bad(i, Some(c), "non-positive width".into());
                }
                if c > 0 && row[c - 1].end() != cell.x {
                    bad(i, Some(c), "cells do not abut".into());
                }
                if cell.letter.is_none() {
                    continue;
                }
                if cell.border != is_border(p, &self.bounds[i], w) {
                    bad(
                        i,
                        Some(c),
                        "border flag disagrees with the boundaries".into(),
                    );
                }
                p += 1;
                if cell.border {
                    continue;
                }
                report.letters_checked += 1;
                match cell.generation {
                    None => bad(i, Some(c), "non-border letter without a generation".into()),
                    Some(g) => {
                        report.max_generation = report.max_generation.max(g);
                        let floor = num_traits::pow(ratio.clone(), g as usize);
                        if cell.width < floor {
                            bad(
                                i,
                                Some(c),
                                format!("generation {g} but width {} < {floor}", cell.width),
                            );
                        }
                        if floor > total {
                            bad(
                                i,
                                Some(c),
                                format!("generation {g} exceeds the logarithmic bound"),
                            );
                        }
                    }
                }
            }
        }
        for (i, line) in self.lines.iter().enumerate() {
            let narrowest = self.rows[i][line.lhs_cells.clone()]
                .iter()
                .filter(|c| c.letter.is_some() && !c.border)
                .map(|c| c.width.clone())
                .min();
            let Some(narrowest) = narrowest else { continue };
            let floor = &ratio * narrowest;
            for c in line.rhs_cells.clone() {
                let cell = &self.rows[i + 1][c];
                if cell.letter.is_some() && !cell.border && cell.width < floor {
                    bad(
                        i + 1,
                        Some(c),
                        format!("rhs letter width {} < {floor}", cell.width),
                    );
                }
            }
        }
        report
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidthViolation {
    pub row: usize,
    pub cell: Option<usize>,
    pub what: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WidthReport {
    pub violations: Vec<WidthViolation>,
    pub letters_checked: usize,
    pub max_generation: u32,
}

impl WidthReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests;
