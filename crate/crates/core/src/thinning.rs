//! Queue-driven removal of simple cells.
//!
//! [`thin_topology`] removes simple cells until none is left.
//! [`thin_shape`] processes the complex layer by layer and stops as soon as
//! every remaining cell lies on the boundary of what is left. Both test
//! simplicity right before every removal, so the homology of the remaining
//! cells never changes. Anchored faces set at build time keep the skeleton
//! attached to chosen boundary patches.

use std::collections::VecDeque;

use thiserror::Error;

use crate::complex::{CellId, ComplexError, TopCellComplex};
use crate::table_gen::{AcyclicityLookup, TableError};
use crate::verify::{betti_of, VerifyError};

/// Upper size for the per-removal homology recomputation.
pub const DEBUG_MV_LIMIT: usize = 500;

#[derive(Debug, Error)]
pub enum ThinError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("per-removal homology check refused: {0} cells exceed the limit of {DEBUG_MV_LIMIT}")]
    DebugTooLarge(usize),
    #[error("homology changed when removing cell {cell} (step {step}): {before:?} -> {after:?}")]
    HomologyChanged {
        step: usize,
        cell: CellId,
        before: Vec<usize>,
        after: Vec<usize>,
    },
    #[error("{count} simple cells remain after thinning (first: {first})")]
    SimpleCellsRemain { count: usize, first: CellId },
    #[error("anchored thinning needs at least one anchored face")]
    NoAnchors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Remove simple cells as long as possible.
    Topology,
    /// Layer-synchronized removal that stops once all cells touch the boundary.
    Shape,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ThinOptions {
    /// Sweep the result for remaining simple cells and fail if the
    /// algorithm's termination property does not hold.
    pub verify_final: bool,
    /// Recompute the homology of the remaining cells after every removal.
    pub debug_mv: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThinningStats {
    pub initial_count: usize,
    pub kept_count: usize,
    pub queue_pushes: usize,
    /// Largest number of vertex-sharing neighbours of a cell.
    pub max_neighbors: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThinningOutcome {
    /// Remaining cells, ascending.
    pub kept: Vec<CellId>,
    /// Removed cells with the pass (queue generation or layer) that removed them.
    pub removed_order: Vec<(CellId, usize)>,
    pub passes: usize,
    pub stats: ThinningStats,
    /// True when the layered algorithm stopped because every remaining cell
    /// touches the boundary.
    pub stopped_on_boundary: bool,
}

struct MvCheck {
    before: Vec<usize>,
}

impl MvCheck {
    fn start(x: &TopCellComplex, on: bool) -> Result<Option<Self>, ThinError> {
        if !on {
            return Ok(None);
        }
        if x.len() > DEBUG_MV_LIMIT {
            return Err(ThinError::DebugTooLarge(x.len()));
        }
        let before = betti_of(&x.cells().subset(&x.alive_cells()), x.kind())?;
        Ok(Some(MvCheck { before }))
    }

    fn after_removal(
        &self,
        x: &TopCellComplex,
        step: usize,
        cell: CellId,
    ) -> Result<(), ThinError> {
        let after = betti_of(&x.cells().subset(&x.alive_cells()), x.kind())?;
        if after != self.before {
            return Err(ThinError::HomologyChanged {
                step,
                cell,
                before: self.before.clone(),
                after,
            });
        }
        Ok(())
    }
}

fn finish(
    x: &TopCellComplex,
    removed_order: Vec<(CellId, usize)>,
    queue_pushes: usize,
    initial_count: usize,
    stopped_on_boundary: bool,
) -> ThinningOutcome {
    let kept = x.alive_cells();
    let passes = removed_order.iter().map(|&(_, p)| p).max().unwrap_or(0);
    ThinningOutcome {
        stats: ThinningStats {
            initial_count,
            kept_count: kept.len(),
            queue_pushes,
            max_neighbors: x.max_neighbor_count(),
        },
        kept,
        removed_order,
        passes,
        stopped_on_boundary,
    }
}

/// Alive cells that are currently simple.
pub fn simple_cells(
    x: &TopCellComplex,
    table: &dyn AcyclicityLookup,
) -> Result<Vec<CellId>, ThinError> {
    let mut out = Vec::new();
    for t in x.alive_cells() {
        if x.is_simple(t, table)? {
            out.push(t);
        }
    }
    Ok(out)
}

/// Removes simple cells until none remains. Queue discipline is FIFO with
/// the initial scan in cell order, so the result is a function of the input
/// order.
pub fn thin_topology(
    x: &mut TopCellComplex,
    table: &dyn AcyclicityLookup,
    opts: ThinOptions,
) -> Result<ThinningOutcome, ThinError> {
    table.ensure_kind(x.kind())?;
    let mv = MvCheck::start(x, opts.debug_mv)?;
    let initial_count = x.alive_count();
    // Entries are (cell, pass); u32 keeps long queues compact.
    let mut queue: VecDeque<(u32, u32)> = VecDeque::new();
    let mut pushes = 0usize;
    for t in x.alive_cells() {
        if x.is_simple(t, table)? {
            queue.push_back((t as u32, 1));
            pushes += 1;
        }
    }
    let mut removed_order = Vec::new();
    while let Some((t, pass)) = queue.pop_front() {
        let (t, pass) = (t as CellId, pass as usize);
        if !x.is_alive(t) {
            continue;
        }
        if x.is_simple(t, table)? {
            x.remove(t)?;
            removed_order.push((t, pass));
            if let Some(mv) = &mv {
                mv.after_removal(x, removed_order.len(), t)?;
            }
            for n in x.neighbors(t)? {
                queue.push_back((n as u32, pass as u32 + 1));
                pushes += 1;
            }
        }
    }
    if opts.verify_final {
        let left = simple_cells(x, table)?;
        if let Some(&first) = left.first() {
            return Err(ThinError::SimpleCellsRemain {
                count: left.len(),
                first,
            });
        }
    }
    Ok(finish(x, removed_order, pushes, initial_count, false))
}

fn all_touch_boundary(x: &TopCellComplex) -> bool {
    x.alive_cells()
        .into_iter()
        .all(|t| x.touches_current_boundary(t))
}

/// Layer-synchronized thinning. Cells of the current layer are tested and
/// removed when simple; every processed cell queues its alive neighbours
/// for the next layer. Between layers, thinning stops when every remaining
/// cell has a (d-1)-face on the boundary of the remaining set. The test is
/// also made before the first layer, so an object that is already one cell
/// thick is returned unchanged. A layer without removals is a fixed point
/// and ends the run as well.
pub fn thin_shape(
    x: &mut TopCellComplex,
    table: &dyn AcyclicityLookup,
    opts: ThinOptions,
) -> Result<ThinningOutcome, ThinError> {
    table.ensure_kind(x.kind())?;
    let mv = MvCheck::start(x, opts.debug_mv)?;
    let initial_count = x.alive_count();
    let mut current: VecDeque<CellId> = VecDeque::new();
    let mut next: VecDeque<CellId> = VecDeque::new();
    let mut pushes = 0usize;
    for t in x.alive_cells() {
        if x.is_simple(t, table)? {
            current.push_back(t);
            pushes += 1;
        }
    }
    let mut removed_order = Vec::new();
    let mut stopped_on_boundary = all_touch_boundary(x);
    let mut layer = 1usize;
    let mut removed_in_layer = 0usize;
    if stopped_on_boundary {
        current.clear();
    }
    while let Some(t) = current.pop_front() {
        if x.is_alive(t) {
            if x.is_simple(t, table)? {
                x.remove(t)?;
                removed_order.push((t, layer));
                removed_in_layer += 1;
                if let Some(mv) = &mv {
                    mv.after_removal(x, removed_order.len(), t)?;
                }
            }
            for n in x.neighbors(t)? {
                next.push_back(n);
                pushes += 1;
            }
        }
        if current.is_empty() {
            std::mem::swap(&mut current, &mut next);
            next.clear();
            if removed_in_layer == 0 {
                break;
            }
            if all_touch_boundary(x) {
                stopped_on_boundary = true;
                break;
            }
            layer += 1;
            removed_in_layer = 0;
        }
    }
    if opts.verify_final && !stopped_on_boundary {
        let left = simple_cells(x, table)?;
        if let Some(&first) = left.first() {
            return Err(ThinError::SimpleCellsRemain {
                count: left.len(),
                first,
            });
        }
    }
    Ok(finish(
        x,
        removed_order,
        pushes,
        initial_count,
        stopped_on_boundary,
    ))
}

pub fn thin(
    x: &mut TopCellComplex,
    table: &dyn AcyclicityLookup,
    algorithm: Algorithm,
    opts: ThinOptions,
) -> Result<ThinningOutcome, ThinError> {
    match algorithm {
        Algorithm::Topology => thin_topology(x, table, opts),
        Algorithm::Shape => thin_shape(x, table, opts),
    }
}

/// Thinning of a complex built with anchored boundary faces. Anchored faces
/// never count as contact with the exterior.
pub fn thin_anchored(
    x: &mut TopCellComplex,
    table: &dyn AcyclicityLookup,
    algorithm: Algorithm,
    opts: ThinOptions,
) -> Result<ThinningOutcome, ThinError> {
    if x.anchored_face_count() == 0 {
        return Err(ThinError::NoAnchors);
    }
    thin(x, table, algorithm, opts)
}
