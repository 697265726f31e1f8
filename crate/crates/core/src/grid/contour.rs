//! Marching-squares extraction of level sets from 2-D fields.

use std::collections::HashMap;

use super::DepthField;
use crate::error::{Error, Result};

/// A piecewise-linear curve; closed curves repeat the first vertex at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

// Edge ids: horizontal (i,j)-(i+1,j) → 2·node, vertical (i,j)-(i,j+1) → 2·node+1.
fn edge_id(node: usize, vertical: bool) -> usize {
    2 * node + vertical as usize
}

/// Level set {u = c} of a 2-D field as polylines.
///
/// Nodes with u ≥ c count as inside. Vertices are placed on cell edges by
/// linear interpolation, so each one interpolates to exactly `c` along its edge.
pub fn level_set(field: &DepthField, c: f64) -> Result<Vec<Polyline>> {
    let grid = field.grid();
    if grid.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: grid.dim() });
    }
    let max = field.max();
    if !(c > 0.0 && c <= max) {
        return Err(Error::LevelOutOfRange { level: c, max });
    }
    let (nx, ny) = (grid.dims()[0], grid.dims()[1]);
    let u = field.values();
    let h = grid.spacing();
    let (ox, oy) = (grid.origin()[0], grid.origin()[1]);
    let at = |i: usize, j: usize| u[i * ny + j];

    let mut vertex: HashMap<usize, [f64; 2]> = HashMap::new();
    let mut crossing = |i0: usize, j0: usize, i1: usize, j1: usize| -> usize {
        let vertical = j1 != j0;
        let id = edge_id(i0 * ny + j0, vertical);
        vertex.entry(id).or_insert_with(|| {
            let (a, b) = (at(i0, j0), at(i1, j1));
            let t = ((c - a) / (b - a)).clamp(0.0, 1.0);
            let x = ox + (i0 as f64 + t * (i1 - i0) as f64) * h;
            let y = oy + (j0 as f64 + t * (j1 - j0) as f64) * h;
            [x, y]
        });
        id
    };

    let mut segments: Vec<(usize, usize)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            // corners counter-clockwise: (i,j) (i+1,j) (i+1,j+1) (i,j+1)
            let v = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let code = v.iter().enumerate().fold(0u8, |acc, (k, &x)| acc | (((x >= c) as u8) << k));
            if code == 0 || code == 15 {
                continue;
            }
            // Crossing ids are cheap to compute; vertices on edges that do not
            // straddle the level are inserted but never referenced.
            let b = crossing(i, j, i + 1, j);
            let r = crossing(i + 1, j, i + 1, j + 1);
            let t = crossing(i, j + 1, i + 1, j + 1);
            let l = crossing(i, j, i, j + 1);
            let center = 0.25 * v.iter().sum::<f64>();
            let mut push = |p: usize, q: usize| segments.push((p, q));
            match code {
                1 | 14 => push(l, b),
                2 | 13 => push(b, r),
                3 | 12 => push(l, r),
                4 | 11 => push(r, t),
                6 | 9 => push(b, t),
                7 | 8 => push(l, t),
                5 => {
                    if center >= c {
                        push(l, t);
                        push(b, r);
                    } else {
                        push(l, b);
                        push(r, t);
                    }
                }
                10 => {
                    if center >= c {
                        push(l, b);
                        push(r, t);
                    } else {
                        push(l, t);
                        push(b, r);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    // Chain segments through shared edge crossings.
    let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, &(p, q)) in segments.iter().enumerate() {
        incident.entry(p).or_default().push(s);
        incident.entry(q).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let walk = |start_edge: usize, first_seg: usize, used: &mut Vec<bool>| -> (Vec<usize>, bool) {
        let mut chain = vec![start_edge];
        let mut cur_edge = start_edge;
        let mut seg = first_seg;
        loop {
            used[seg] = true;
            let (p, q) = segments[seg];
            let next = if p == cur_edge { q } else { p };
            chain.push(next);
            if next == start_edge {
                return (chain, true);
            }
            cur_edge = next;
            match incident[&cur_edge].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => return (chain, false),
            }
        }
    };
    // Open curves begin at crossings touched by a single segment.
    let mut ends: Vec<usize> = incident.iter().filter(|(_, s)| s.len() == 1).map(|(e, _)| *e).collect();
    ends.sort_unstable();
    for e in ends {
        let s = incident[&e][0];
        if used[s] {
            continue;
        }
        let (chain, closed) = walk(e, s, &mut used);
        lines.push((chain, closed));
    }
    for s in 0..segments.len() {
        if !used[s] {
            let (chain, closed) = walk(segments[s].0, s, &mut used);
            lines.push((chain, closed));
        }
    }
    Ok(lines
        .into_iter()
        .map(|(chain, closed)| Polyline { points: chain.iter().map(|e| vertex[e]).collect(), closed })
        .collect())
}
