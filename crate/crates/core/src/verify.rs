//! Ground truth for thinning results: the full chain complex of a set of
//! top cells, with every lower face generated, and its Betti numbers.
//!
//! Faces are enumerated straight from vertex ids (simplices) or doubled
//! lattice coordinates (cubes), without going through the model cells or
//! the top-cell index, so this path checks the fast one rather than
//! echoing it.

use std::collections::HashMap;

use thiserror::Error;

use crate::cell_models::ModelKind;
use crate::complex::{CellId, Cells};
use crate::homology::{
    homology_summary, ChainComplex, HomologyError, HomologySummary, SparseMatrix,
};

/// Largest input accepted by [`full_complex`].
pub const MAX_CELLS: usize = 100_000;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{0} cells exceed the verification limit of {MAX_CELLS}")]
    TooLarge(usize),
    #[error("skeleton cell id {0} is not a cell of the input ({1} cells)")]
    NotASubset(usize, usize),
    #[error("skeleton lists cell {0} twice")]
    DuplicateId(usize),
    #[error("cells do not match {0}")]
    KindMismatch(ModelKind),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// Builds the chain complex of the closure of `cells`.
pub fn full_complex(cells: &Cells, kind: ModelKind) -> Result<ChainComplex, VerifyError> {
    if cells.len() > MAX_CELLS {
        return Err(VerifyError::TooLarge(cells.len()));
    }
    let top = kind.dim();
    match cells {
        Cells::Simplicial(list) if !kind.is_cubical() => {
            let mut faces: Vec<HashMap<Vec<u32>, u32>> = vec![HashMap::new(); top + 1];
            let mut order: Vec<Vec<Vec<u32>>> = vec![Vec::new(); top + 1];
            for cell in list {
                if cell.len() != top + 1 {
                    return Err(VerifyError::KindMismatch(kind));
                }
                let mut sorted = cell.clone();
                sorted.sort_unstable();
                for subset in 1u32..1 << sorted.len() {
                    let face: Vec<u32> = (0..sorted.len())
                        .filter(|i| subset & (1 << i) != 0)
                        .map(|i| sorted[i])
                        .collect();
                    let d = face.len() - 1;
                    if !faces[d].contains_key(&face) {
                        faces[d].insert(face.clone(), order[d].len() as u32);
                        order[d].push(face);
                    }
                }
            }
            let counts: Vec<usize> = order.iter().map(|o| o.len()).collect();
            let mut boundaries = Vec::with_capacity(top);
            for d in 1..=top {
                let columns = order[d]
                    .iter()
                    .map(|s| {
                        (0..s.len())
                            .map(|skip| {
                                let facet: Vec<u32> = s
                                    .iter()
                                    .enumerate()
                                    .filter(|&(i, _)| i != skip)
                                    .map(|(_, &v)| v)
                                    .collect();
                                let sign = if skip % 2 == 0 { 1 } else { -1 };
                                (faces[d - 1][&facet], sign)
                            })
                            .collect()
                    })
                    .collect();
                boundaries.push(SparseMatrix::new(counts[d - 1], columns));
            }
            trim(counts, boundaries)
        }
        Cells::Cubical(list) if kind.is_cubical() => {
            // A lattice cell is stored in doubled coordinates: odd entries
            // are the free axes.
            let mut faces: Vec<HashMap<[i64; 3], u32>> = vec![HashMap::new(); top + 1];
            let mut order: Vec<Vec<[i64; 3]>> = vec![Vec::new(); top + 1];
            for &origin in list {
                if top == 2 && origin[2] != 0 {
                    return Err(VerifyError::KindMismatch(kind));
                }
                for code in 0..3usize.pow(top as u32) {
                    let mut c = [0i64; 3];
                    let mut rest = code;
                    let mut dim = 0;
                    for (a, slot) in c.iter_mut().enumerate() {
                        if a >= top {
                            *slot = 2 * origin[a];
                            continue;
                        }
                        let choice = (rest % 3) as i64;
                        rest /= 3;
                        *slot = 2 * origin[a] + choice;
                        if choice == 1 {
                            dim += 1;
                        }
                    }
                    if !faces[dim].contains_key(&c) {
                        faces[dim].insert(c, order[dim].len() as u32);
                        order[dim].push(c);
                    }
                }
            }
            let counts: Vec<usize> = order.iter().map(|o| o.len()).collect();
            let mut boundaries = Vec::with_capacity(top);
            for d in 1..=top {
                let columns = order[d]
                    .iter()
                    .map(|c| {
                        let mut col = Vec::with_capacity(2 * d);
                        let mut k = 0;
                        for a in 0..3 {
                            if c[a] % 2 == 0 {
                                continue;
                            }
                            let sign = if k % 2 == 0 { 1 } else { -1 };
                            let mut lower = *c;
                            lower[a] -= 1;
                            let mut upper = *c;
                            upper[a] += 1;
                            col.push((faces[d - 1][&lower], -sign));
                            col.push((faces[d - 1][&upper], sign));
                            k += 1;
                        }
                        col
                    })
                    .collect();
                boundaries.push(SparseMatrix::new(counts[d - 1], columns));
            }
            trim(counts, boundaries)
        }
        _ => Err(VerifyError::KindMismatch(kind)),
    }
}

fn trim(counts: Vec<usize>, boundaries: Vec<SparseMatrix>) -> Result<ChainComplex, VerifyError> {
    if counts.iter().all(|&c| c == 0) {
        return Ok(ChainComplex::new(Vec::new(), Vec::new())?);
    }
    Ok(ChainComplex::new(counts, boundaries)?)
}

/// Homology of the closure of `cells`.
pub fn homology_of(cells: &Cells, kind: ModelKind) -> Result<HomologySummary, VerifyError> {
    Ok(homology_summary(&full_complex(cells, kind)?)?)
}

/// Betti numbers padded with zeros to length `kind.dim() + 1`.
pub fn betti_of(cells: &Cells, kind: ModelKind) -> Result<Vec<usize>, VerifyError> {
    let mut b = homology_of(cells, kind)?.betti;
    b.resize(kind.dim() + 1, 0);
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifyReport {
    pub betti_in: Vec<usize>,
    pub betti_out: Vec<usize>,
    pub torsion_free_in: bool,
    pub torsion_free_out: bool,
    pub isomorphic: bool,
}

/// Compares the homology of `input` with that of its sub-collection `kept`.
pub fn certify(
    input: &Cells,
    kept: &[CellId],
    kind: ModelKind,
) -> Result<CertifyReport, VerifyError> {
    let mut seen = vec![false; input.len()];
    for &id in kept {
        match seen.get_mut(id) {
            None => return Err(VerifyError::NotASubset(id, input.len())),
            Some(true) => return Err(VerifyError::DuplicateId(id)),
            Some(slot) => *slot = true,
        }
    }
    let full_in = homology_of(input, kind)?;
    let full_out = homology_of(&input.subset(kept), kind)?;
    let pad = |mut b: Vec<usize>| {
        b.resize(kind.dim() + 1, 0);
        b
    };
    let betti_in = pad(full_in.betti);
    let betti_out = pad(full_out.betti);
    let isomorphic = betti_in == betti_out && full_in.torsion_free == full_out.torsion_free;
    Ok(CertifyReport {
        betti_in,
        betti_out,
        torsion_free_in: full_in.torsion_free,
        torsion_free_out: full_out.torsion_free,
        isomorphic,
    })
}
