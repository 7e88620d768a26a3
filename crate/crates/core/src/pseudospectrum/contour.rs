//! Marching-squares level sets of a [`PseudospectrumField`].
//!
//! Crossing points are linearly interpolated along cell edges. Saddle cells
//! are resolved by the average of the four corner values.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::field::PseudospectrumField;
use crate::matrix::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContourError {
    #[error("contour levels must be positive and finite, got {0}")]
    BadLevel(f64),
    #[error("contour levels must be strictly increasing")]
    NotIncreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    /// Vertices; for closed loops the first vertex is repeated at the end.
    pub points: Vec<C64>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub levels: Vec<f64>,
    /// `polylines[k]` traces `levels[k]`.
    pub polylines: Vec<Vec<Polyline>>,
}

impl ContourSet {
    pub fn polyline_count(&self) -> usize {
        self.polylines.iter().map(Vec::len).sum()
    }

    /// `(level, polylines)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &[Polyline])> {
        self.levels
            .iter()
            .copied()
            .zip(self.polylines.iter().map(Vec::as_slice))
    }
}

/// Checks that `levels` are positive, finite and strictly increasing.
pub fn validate_levels(levels: &[f64]) -> Result<(), ContourError> {
    if let Some(&bad) = levels.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(ContourError::BadLevel(bad));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ContourError::NotIncreasing);
    }
    Ok(())
}

pub fn extract_contours(
    field: &PseudospectrumField,
    levels: &[f64],
) -> Result<ContourSet, ContourError> {
    validate_levels(levels)?;
    let polylines = levels.iter().map(|&l| trace_level(field, l)).collect();
    Ok(ContourSet {
        levels: levels.to_vec(),
        polylines,
    })
}

/// A cell edge: horizontal edges join `(i, j)`–`(i+1, j)`, vertical edges
/// join `(i, j)`–`(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

impl Edge {
    fn ends(self) -> ((usize, usize), (usize, usize)) {
        match self {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        }
    }
}

fn crossing(field: &PseudospectrumField, edge: Edge, level: f64) -> C64 {
    let ((i0, j0), (i1, j1)) = edge.ends();
    let a = field.value(i0, j0);
    let b = field.value(i1, j1);
    let t = if a == b { 0.5 } else { ((level - a) / (b - a)).clamp(0.0, 1.0) };
    let p0 = field.grid.node(i0, j0);
    let p1 = field.grid.node(i1, j1);
    p0 + (p1 - p0) * t
}

fn cell_segments(field: &PseudospectrumField, i: usize, j: usize, level: f64, out: &mut Vec<(Edge, Edge)>) {
    let v = [
        field.value(i, j),
        field.value(i + 1, j),
        field.value(i + 1, j + 1),
        field.value(i, j + 1),
    ];
    let inside = v.map(|x| x < level);
    let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
    // edge k joins corner k and corner (k + 1) % 4
    let crossed: Vec<usize> = (0..4).filter(|&k| inside[k] != inside[(k + 1) % 4]).collect();
    match crossed.len() {
        2 => out.push((edges[crossed[0]], edges[crossed[1]])),
        4 => {
            let center_inside = (v.iter().sum::<f64>() / 4.0) < level;
            if center_inside == inside[0] {
                // corners 0 and 2 are joined through the centre; cut off 1 and 3
                out.push((edges[0], edges[1]));
                out.push((edges[2], edges[3]));
            } else {
                out.push((edges[3], edges[0]));
                out.push((edges[1], edges[2]));
            }
        }
        _ => {}
    }
}

fn trace_level(field: &PseudospectrumField, level: f64) -> Vec<Polyline> {
    let (nx, ny) = (field.grid.nx, field.grid.ny);
    let mut segments = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            cell_segments(field, i, j, level, &mut segments);
        }
    }

    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }

    let mut visited = vec![false; segments.len()];
    let next_from = |edge: Edge, visited: &mut Vec<bool>| -> Option<Edge> {
        let k = *by_edge.get(&edge)?.iter().find(|&&k| !visited[k])?;
        visited[k] = true;
        let (a, b) = segments[k];
        Some(if a == edge { b } else { a })
    };

    let mut lines = Vec::new();
    for start in 0..segments.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let (a, b) = segments[start];
        let mut forward = vec![a, b];
        let mut cur = b;
        while let Some(next) = next_from(cur, &mut visited) {
            forward.push(next);
            cur = next;
        }
        let closed = forward.len() > 2 && forward.first() == forward.last();
        let mut path = Vec::new();
        if !closed {
            let mut cur = a;
            while let Some(prev) = next_from(cur, &mut visited) {
                path.push(prev);
                cur = prev;
            }
            path.reverse();
        }
        path.extend(forward);
        lines.push(Polyline {
            points: path.into_iter().map(|e| crossing(field, e, level)).collect(),
            closed,
        });
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::pseudospectrum::field::compute_field;
    use crate::pseudospectrum::grid::GridSpec;

    #[test]
    fn identity_gives_one_circle() {
        let grid = GridSpec::new(0.0, 2.0, -1.0, 1.0, 81, 81).unwrap();
        let field = compute_field(&Matrix::identity(2), &grid).unwrap();
        let set = extract_contours(&field, &[0.3]).unwrap();
        assert_eq!(set.polylines[0].len(), 1);
        let loop_ = &set.polylines[0][0];
        assert!(loop_.closed);
        let max_dev = loop_
            .points
            .iter()
            .map(|p| ((*p - C64::new(1.0, 0.0)).norm() - 0.3).abs())
            .fold(0.0, f64::max);
        assert!(max_dev <= 2.0 * grid.step(), "deviation {max_dev}");
    }

    #[test]
    fn level_below_minimum_is_empty() {
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 5, 5).unwrap();
        let field = PseudospectrumField {
            grid,
            values: vec![2.0; 25],
            eigenvalues: vec![],
            source_dim: 1,
        };
        let set = extract_contours(&field, &[0.5, 1.0]).unwrap();
        assert!(set.polylines.iter().all(Vec::is_empty));
        assert_eq!(set.polyline_count(), 0);
    }

    #[test]
    fn separated_eigenvalues_give_two_loops() {
        let grid = GridSpec::new(-2.0, 2.0, -1.0, 1.0, 81, 41).unwrap();
        let field = compute_field(&Matrix::diag(&[1.0, -1.0]).unwrap(), &grid).unwrap();
        let set = extract_contours(&field, &[0.2]).unwrap();
        assert_eq!(set.polylines[0].len(), 2);
        assert!(set.polylines[0].iter().all(|p| p.closed));
    }

    #[test]
    fn open_contours_at_the_boundary() {
        // A disk clipped by the box edge leaves an open arc.
        let grid = GridSpec::new(0.0, 1.0, -1.0, 1.0, 21, 41).unwrap();
        let field = compute_field(&Matrix::diag(&[0.0]).unwrap(), &grid).unwrap();
        let set = extract_contours(&field, &[0.5]).unwrap();
        assert_eq!(set.polylines[0].len(), 1);
        let arc = &set.polylines[0][0];
        assert!(!arc.closed);
        assert!(arc.points.iter().all(|p| grid.contains(*p)));
    }

    #[test]
    fn rejects_bad_levels() {
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 3, 3).unwrap();
        let field = compute_field(&Matrix::identity(1), &grid).unwrap();
        assert_eq!(
            extract_contours(&field, &[0.2, 0.1]).unwrap_err(),
            ContourError::NotIncreasing
        );
        assert_eq!(
            extract_contours(&field, &[0.0]).unwrap_err(),
            ContourError::BadLevel(0.0)
        );
    }

    #[test]
    fn saddle_cell_produces_two_segments() {
        let grid = GridSpec::new(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        // corners (0,0) and (1,1) low, the others high
        let field = PseudospectrumField {
            grid,
            values: vec![0.0, 1.0, 1.0, 0.0],
            eigenvalues: vec![],
            source_dim: 1,
        };
        let set = extract_contours(&field, &[0.5]).unwrap();
        assert_eq!(set.polylines[0].len(), 2);
    }
}
