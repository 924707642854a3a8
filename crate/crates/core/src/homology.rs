//! Integer chain complexes and their homology via Smith normal form.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::cell_models::{Configuration, ModelCell};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HomologyError {
    #[error("integer overflow during Smith normal form reduction ({0})")]
    Overflow(&'static str),
    #[error("boundary of boundary is nonzero at dimension {dim}")]
    NotAComplex { dim: usize },
    #[error("boundary matrix {dim} has shape {got:?}, expected {expected:?}")]
    ShapeMismatch {
        dim: usize,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("configuration {index} of {kind} is not closed")]
    NotClosed { kind: String, index: u64 },
    #[error("residual matrix too large for dense reduction: {rows}x{cols}")]
    TooLarge { rows: usize, cols: usize },
}

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }
}

/// Result of a Smith normal form computation: the nonzero invariant
/// factors `d_1 | d_2 | ... | d_rank`, all positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub rank: usize,
    pub diagonal: Vec<i64>,
}

impl SmithForm {
    pub fn is_unimodular_diagonal(&self) -> bool {
        self.diagonal.iter().all(|&d| d == 1)
    }
}

fn checked_axpy(target: i64, factor: i64, source: i64) -> Result<i64, HomologyError> {
    factor
        .checked_mul(source)
        .and_then(|p| target.checked_sub(p))
        .ok_or(HomologyError::Overflow("row/column update"))
}

/// Smith normal form by unimodular row and column operations, choosing the
/// entry of smallest absolute value as pivot.
pub fn smith_normal_form(m: &IntMatrix) -> Result<SmithForm, HomologyError> {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut diagonal = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Pivot: smallest nonzero magnitude in the trailing block.
        let mut best: Option<(usize, usize, i64)> = None;
        for r in t..rows {
            for c in t..cols {
                let v = a.get(r, c);
                if v != 0 {
                    let av = v.checked_abs().ok_or(HomologyError::Overflow("abs"))?;
                    if best.map_or(true, |(_, _, b)| av < b) {
                        best = Some((r, c, av));
                        if av == 1 {
                            break;
                        }
                    }
                }
            }
            if matches!(best, Some((_, _, 1))) {
                break;
            }
        }
        let Some((pr, pc, _)) = best else { break };
        swap_rows(&mut a, t, pr);
        swap_cols(&mut a, t, pc);

        loop {
            let p = a.get(t, t);
            let mut dirty = false;
            // Clear column t below the pivot.
            for r in t + 1..rows {
                let v = a.get(r, t);
                if v != 0 {
                    let q = v.div_euclid(p);
                    if q != 0 {
                        for c in t..cols {
                            let nv = checked_axpy(a.get(r, c), q, a.get(t, c))?;
                            a.set(r, c, nv);
                        }
                    }
                    if a.get(r, t) != 0 {
                        dirty = true;
                    }
                }
            }
            // Clear row t right of the pivot.
            for c in t + 1..cols {
                let v = a.get(t, c);
                if v != 0 {
                    let q = v.div_euclid(p);
                    if q != 0 {
                        for r in t..rows {
                            let nv = checked_axpy(a.get(r, c), q, a.get(r, t))?;
                            a.set(r, c, nv);
                        }
                    }
                    if a.get(t, c) != 0 {
                        dirty = true;
                    }
                }
            }
            if dirty {
                // A remainder survived; move the smallest entry of row/col t to the pivot.
                let mut best = (t, t, a.get(t, t).abs());
                for r in t + 1..rows {
                    let v = a.get(r, t).abs();
                    if v != 0 && v < best.2 {
                        best = (r, t, v);
                    }
                }
                for c in t + 1..cols {
                    let v = a.get(t, c).abs();
                    if v != 0 && v < best.2 {
                        best = (t, c, v);
                    }
                }
                swap_rows(&mut a, t, best.0);
                swap_cols(&mut a, t, best.1);
                continue;
            }
            // Divisibility: every trailing entry must be a multiple of the pivot.
            let mut offender = None;
            'scan: for r in t + 1..rows {
                for c in t + 1..cols {
                    if a.get(r, c) % p != 0 {
                        offender = Some(r);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(r) => {
                    for c in t..cols {
                        let nv = a
                            .get(t, c)
                            .checked_add(a.get(r, c))
                            .ok_or(HomologyError::Overflow("row addition"))?;
                        a.set(t, c, nv);
                    }
                }
                None => break,
            }
        }
        diagonal.push(a.get(t, t).abs());
        t += 1;
    }
    Ok(SmithForm {
        rank: diagonal.len(),
        diagonal,
    })
}

fn swap_rows(a: &mut IntMatrix, r1: usize, r2: usize) {
    if r1 != r2 {
        for c in 0..a.cols {
            a.data.swap(r1 * a.cols + c, r2 * a.cols + c);
        }
    }
}

fn swap_cols(a: &mut IntMatrix, c1: usize, c2: usize) {
    if c1 != c2 {
        for r in 0..a.rows {
            a.data.swap(r * a.cols + c1, r * a.cols + c2);
        }
    }
}

/// Column-compressed sparse integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(u32, i64)>>,
}

impl SparseMatrix {
    pub fn new(rows: usize, columns: Vec<Vec<(u32, i64)>>) -> Self {
        debug_assert!(columns
            .iter()
            .all(|c| c.iter().all(|&(r, _)| (r as usize) < rows)));
        SparseMatrix {
            rows,
            cols: columns.len(),
            columns,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &[(u32, i64)] {
        &self.columns[c]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn to_dense(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, self.cols);
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                let cur = m.get(r as usize, c);
                m.set(r as usize, c, cur + v);
            }
        }
        m
    }

    /// True iff `self * rhs` is the zero matrix.
    pub fn composes_to_zero(&self, rhs: &SparseMatrix) -> bool {
        let mut acc: HashMap<u32, i64> = HashMap::new();
        for col in &rhs.columns {
            acc.clear();
            for &(mid, v) in col {
                for &(r, w) in &self.columns[mid as usize] {
                    *acc.entry(r).or_insert(0) += v * w;
                }
            }
            if acc.values().any(|&x| x != 0) {
                return false;
            }
        }
        true
    }

    /// Smith normal form. Unit pivots are eliminated sparsely first; the
    /// residual block, whose entries all have magnitude at least two, is
    /// finished densely.
    pub fn smith_form(&self) -> Result<SmithForm, HomologyError> {
        const DENSE_LIMIT: usize = 4096;
        if self.rows * self.cols <= DENSE_LIMIT {
            return smith_normal_form(&self.to_dense());
        }

        let mut rows: Vec<HashMap<u32, i64>> = vec![HashMap::new(); self.rows];
        let mut cols: Vec<HashSet<u32>> = vec![HashSet::new(); self.cols];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                if v != 0 {
                    *rows[r as usize].entry(c as u32).or_insert(0) += v;
                }
            }
        }
        for (r, row) in rows.iter_mut().enumerate() {
            row.retain(|_, v| *v != 0);
            for &c in row.keys() {
                cols[c as usize].insert(r as u32);
            }
        }

        let mut units = 0usize;
        let mut changed = true;
        while changed {
            changed = false;
            for c in 0..self.cols {
                if cols[c].is_empty() {
                    continue;
                }
                // Unit entry in the shortest row.
                let pivot = cols[c]
                    .iter()
                    .filter(|&&r| rows[r as usize][&(c as u32)].abs() == 1)
                    .min_by_key(|&&r| (rows[r as usize].len(), r))
                    .copied();
                let Some(pr) = pivot else { continue };
                let psign = rows[pr as usize][&(c as u32)];
                let prow: Vec<(u32, i64)> = rows[pr as usize]
                    .iter()
                    .filter(|(&k, _)| k != c as u32)
                    .map(|(&k, &v)| (k, v))
                    .collect();
                let others: Vec<u32> = cols[c].iter().copied().filter(|&r| r != pr).collect();
                for r in others {
                    let factor = rows[r as usize][&(c as u32)] * psign;
                    let row = &mut rows[r as usize];
                    row.remove(&(c as u32));
                    for &(k, v) in &prow {
                        let e = row.entry(k).or_insert(0);
                        *e = checked_axpy(*e, factor, v)?;
                        if *e == 0 {
                            row.remove(&k);
                            cols[k as usize].remove(&r);
                        } else {
                            cols[k as usize].insert(r);
                        }
                    }
                }
                for &(k, _) in &prow {
                    cols[k as usize].remove(&pr);
                }
                rows[pr as usize].clear();
                cols[c].clear();
                units += 1;
                changed = true;
            }
        }

        let live_rows: Vec<usize> = (0..self.rows).filter(|&r| !rows[r].is_empty()).collect();
        let live_cols: Vec<usize> = (0..self.cols).filter(|&c| !cols[c].is_empty()).collect();
        let mut diagonal = vec![1i64; units];
        if !live_rows.is_empty() {
            if live_rows.len() * live_cols.len() > 16 * 1024 * 1024 {
                return Err(HomologyError::TooLarge {
                    rows: live_rows.len(),
                    cols: live_cols.len(),
                });
            }
            let col_pos: HashMap<usize, usize> =
                live_cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
            let mut dense = IntMatrix::zeros(live_rows.len(), live_cols.len());
            for (i, &r) in live_rows.iter().enumerate() {
                for (&c, &v) in &rows[r] {
                    dense.set(i, col_pos[&(c as usize)], v);
                }
            }
            diagonal.extend(smith_normal_form(&dense)?.diagonal);
        }
        Ok(SmithForm {
            rank: diagonal.len(),
            diagonal,
        })
    }
}

/// Finite chain complex `C_0 <- C_1 <- ... <- C_D` with integer boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainComplex {
    counts: Vec<usize>,
    /// `boundaries[d - 1]` is the matrix of the boundary map from dimension d.
    boundaries: Vec<SparseMatrix>,
}

impl ChainComplex {
    pub fn new(counts: Vec<usize>, boundaries: Vec<SparseMatrix>) -> Result<Self, HomologyError> {
        for (i, b) in boundaries.iter().enumerate() {
            let d = i + 1;
            let expected = (
                counts.get(d - 1).copied().unwrap_or(0),
                counts.get(d).copied().unwrap_or(0),
            );
            if (b.rows(), b.cols()) != expected {
                return Err(HomologyError::ShapeMismatch {
                    dim: d,
                    got: (b.rows(), b.cols()),
                    expected,
                });
            }
        }
        let mut boundaries = boundaries;
        while boundaries.len() + 1 < counts.len() {
            let d = boundaries.len() + 1;
            boundaries.push(SparseMatrix::new(
                counts[d - 1],
                vec![Vec::new(); counts[d]],
            ));
        }
        Ok(ChainComplex { counts, boundaries })
    }

    /// Highest dimension (0 for an empty or point-like complex).
    pub fn dim(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn boundary(&self, d: usize) -> &SparseMatrix {
        &self.boundaries[d - 1]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(d, &n)| if d % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    pub fn check_is_complex(&self) -> Result<(), HomologyError> {
        for d in 1..self.boundaries.len() {
            if !self.boundaries[d - 1].composes_to_zero(&self.boundaries[d]) {
                return Err(HomologyError::NotAComplex { dim: d + 1 });
            }
        }
        Ok(())
    }
}

/// Betti numbers and torsion verdict of a chain complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologySummary {
    pub betti: Vec<usize>,
    pub torsion_free: bool,
    pub reduced_acyclic: bool,
}

impl HomologySummary {
    pub fn euler_characteristic(&self) -> i64 {
        self.betti
            .iter()
            .enumerate()
            .map(|(d, &b)| if d % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }

    /// Betti numbers with trailing zeros removed beyond `min_len`.
    pub fn betti_trimmed(&self, min_len: usize) -> Vec<usize> {
        let mut b = self.betti.clone();
        while b.len() > min_len && b.last() == Some(&0) {
            b.pop();
        }
        b
    }
}

pub fn homology_summary(cc: &ChainComplex) -> Result<HomologySummary, HomologyError> {
    cc.check_is_complex()?;
    let forms: Vec<SmithForm> = cc
        .boundaries
        .iter()
        .map(|b| b.smith_form())
        .collect::<Result<_, _>>()?;
    let rank = |d: usize| -> usize {
        if d == 0 || d > forms.len() {
            0
        } else {
            forms[d - 1].rank
        }
    };
    let betti: Vec<usize> = cc
        .counts
        .iter()
        .enumerate()
        .map(|(d, &n)| n - rank(d) - rank(d + 1))
        .collect();
    let torsion_free = forms.iter().all(|f| f.is_unimodular_diagonal());
    let reduced_acyclic =
        torsion_free && betti.first() == Some(&1) && betti.iter().skip(1).all(|&b| b == 0);
    Ok(HomologySummary {
        betti,
        torsion_free,
        reduced_acyclic,
    })
}

/// The sub-complex of a model cell's boundary spanned by a closed configuration.
pub fn configuration_complex(
    model: &ModelCell,
    config: &Configuration,
) -> Result<ChainComplex, HomologyError> {
    debug_assert_eq!(model.kind(), config.kind());
    if !config.is_closed() {
        return Err(HomologyError::NotClosed {
            kind: config.kind().to_string(),
            index: config.canonical_index(),
        });
    }
    mask_complex(model, config.mask())
}

pub(crate) fn mask_complex(model: &ModelCell, mask: u32) -> Result<ChainComplex, HomologyError> {
    let elements = model.elements();
    let top = elements
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, e)| e.dim)
        .max();
    let Some(top) = top else {
        return ChainComplex::new(Vec::new(), Vec::new());
    };
    // Position of each member within its dimension.
    let mut position = vec![u32::MAX; elements.len()];
    let mut counts = vec![0usize; top + 1];
    for (i, e) in elements.iter().enumerate() {
        if mask & (1 << i) != 0 {
            position[i] = counts[e.dim] as u32;
            counts[e.dim] += 1;
        }
    }
    let mut boundaries = Vec::with_capacity(top);
    for d in 1..=top {
        let columns: Vec<Vec<(u32, i64)>> = elements
            .iter()
            .enumerate()
            .filter(|(i, e)| e.dim == d && mask & (1 << i) != 0)
            .map(|(i, _)| {
                model
                    .element_boundary(i)
                    .iter()
                    .map(|&(f, c)| (position[f], c))
                    .collect()
            })
            .collect();
        boundaries.push(SparseMatrix::new(counts[d - 1], columns));
    }
    ChainComplex::new(counts, boundaries)
}

/// Reduced acyclicity of a closed configuration. The empty configuration is
/// not acyclic.
pub fn is_acyclic(model: &ModelCell, config: &Configuration) -> Result<bool, HomologyError> {
    Ok(homology_summary(&configuration_complex(model, config)?)?.reduced_acyclic)
}

pub(crate) fn mask_is_acyclic(model: &ModelCell, mask: u32) -> Result<bool, HomologyError> {
    Ok(homology_summary(&mask_complex(model, mask)?)?.reduced_acyclic)
}
