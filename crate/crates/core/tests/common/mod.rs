//! Oracles shared by the integration tests. They recompute facts from
//! element vertex labels only, without the library's boundary tables.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use cellthin::cell_models::{ModelCell, ModelKind};
use cellthin::complex::{Anchor, Cells};

/// Rank over GF(2) of a set of bit rows.
pub fn rank_gf2(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in 0..64 {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for r in 0..rows.len() {
            if r != rank && rows[r] >> bit & 1 == 1 {
                rows[r] ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers over GF(2) of a closed configuration, length `dim + 1`
/// of the model boundary (that is, `kind.dim()` entries).
pub fn betti_gf2(model: &ModelCell, mask: u32) -> Vec<usize> {
    let top = model.kind().dim() - 1;
    let members: Vec<usize> = (0..model.len()).filter(|&i| mask >> i & 1 == 1).collect();
    let by_dim: Vec<Vec<usize>> = (0..=top)
        .map(|d| {
            members
                .iter()
                .copied()
                .filter(|&i| model.elements()[i].dim == d)
                .collect()
        })
        .collect();
    let labels = |i: usize| model.elements()[i].label_mask();
    // rank of the boundary map from dimension d to d-1.
    let rank = |d: usize| -> usize {
        if d == 0 || d > top {
            return 0;
        }
        let rows: Vec<u64> = by_dim[d]
            .iter()
            .map(|&e| {
                by_dim[d - 1]
                    .iter()
                    .enumerate()
                    .filter(|&(_, &f)| labels(f) & !labels(e) == 0)
                    .fold(0u64, |acc, (k, _)| acc | 1 << k)
            })
            .collect();
        rank_gf2(rows)
    };
    (0..=top)
        .map(|d| by_dim[d].len() - rank(d) - rank(d + 1))
        .collect()
}

/// Connected components of a closed configuration by union-find on
/// vertex labels of its edges.
pub fn components(model: &ModelCell, mask: u32) -> usize {
    let n = model.kind().vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut present = vec![false; n];
    for i in (0..model.len()).filter(|&i| mask >> i & 1 == 1) {
        let e = &model.elements()[i];
        if e.dim == 0 {
            present[e.labels[0] as usize] = true;
        }
        if e.dim == 1 {
            let (a, b) = (
                find(&mut parent, e.labels[0] as usize),
                find(&mut parent, e.labels[1] as usize),
            );
            parent[a] = b;
        }
    }
    let mut roots: Vec<usize> = (0..n)
        .filter(|&v| present[v])
        .map(|v| find(&mut parent, v))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Faces of the (d-1)-skeleton that lie in exactly one cell, as anchors.
pub fn boundary_faces(kind: ModelKind, cells: &Cells) -> Vec<Anchor> {
    match cells {
        Cells::Simplicial(list) => {
            let mut count: HashMap<Vec<u32>, usize> = HashMap::new();
            for c in list {
                let mut s = c.clone();
                s.sort_unstable();
                for skip in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(skip);
                    *count.entry(f).or_default() += 1;
                }
            }
            let mut out: Vec<Vec<u32>> = count
                .into_iter()
                .filter(|&(_, n)| n == 1)
                .map(|(f, _)| f)
                .collect();
            out.sort();
            out.into_iter().map(Anchor::Simplex).collect()
        }
        Cells::Cubical(list) => {
            let set: HashSet<[i64; 3]> = list.iter().copied().collect();
            let mut out = Vec::new();
            for &c in list {
                for axis in 0..kind.dim() {
                    let mut below = c;
                    below[axis] -= 1;
                    let mut above = c;
                    above[axis] += 1;
                    if !set.contains(&below) {
                        out.push(Anchor::CubeFace { axis, origin: c });
                    }
                    if !set.contains(&above) {
                        out.push(Anchor::CubeFace {
                            axis,
                            origin: above,
                        });
                    }
                }
            }
            out
        }
    }
}
