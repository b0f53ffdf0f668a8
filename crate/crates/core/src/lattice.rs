//! Geometry of the positive orthant and of the box `{0,..,L}^d`.
//!
//! Vertices are plain coordinate vectors (`Vec<i64>`) at the API boundary so
//! that members of an update neighborhood may carry negative coordinates.
//! Inside the box every vertex also has a mixed-radix index, coordinate 1
//! varying fastest. Because the index of `x - e_i` is always smaller than the
//! index of `x`, increasing index order is a topological order for the
//! orientation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type Vertex = Vec<i64>;

/// Upper bound on the number of vertices of a box.
const MAX_VERTICES: usize = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    dim: usize,
    side: usize,
    strides: Vec<usize>,
    len: usize,
}

impl LatticeBox {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        let width = side
            .checked_add(1)
            .ok_or_else(|| Error::InvalidInput("side too large".into()))?;
        let mut strides = Vec::with_capacity(dim);
        let mut len = 1usize;
        for _ in 0..dim {
            strides.push(len);
            len = len
                .checked_mul(width)
                .filter(|&n| n <= MAX_VERTICES)
                .ok_or_else(|| Error::InvalidInput(format!("box {{0..{side}}}^{dim} has too many vertices")))?;
        }
        Ok(Self {
            dim,
            side,
            strides,
            len,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of vertices, `(L+1)^d`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim && x.iter().all(|&c| c >= 0 && c as u64 <= self.side as u64)
    }

    pub fn encode(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        Some(x.iter().zip(&self.strides).map(|(&c, &s)| c as usize * s).sum())
    }

    pub fn encode_checked(&self, x: &[i64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        self.encode(x).ok_or_else(|| Error::OutsideBox(x.to_vec()))
    }

    pub fn decode(&self, index: usize) -> Vertex {
        debug_assert!(index < self.len);
        (0..self.dim).map(|i| self.coord(index, i) as i64).collect()
    }

    #[inline]
    pub fn coord(&self, index: usize, axis: usize) -> usize {
        (index / self.strides[axis]) % (self.side + 1)
    }

    /// Index of `x - e_axis`, if that vertex is still in the box.
    #[inline]
    pub fn pred(&self, index: usize, axis: usize) -> Option<usize> {
        (self.coord(index, axis) > 0).then(|| index - self.strides[axis])
    }

    /// Index of `x + e_axis`, if that vertex is still in the box.
    #[inline]
    pub fn succ(&self, index: usize, axis: usize) -> Option<usize> {
        (self.coord(index, axis) < self.side).then(|| index + self.strides[axis])
    }

    pub fn origin(&self) -> Vertex {
        vec![0; self.dim]
    }

    /// The far corner `L e*`.
    pub fn corner(&self) -> Vertex {
        vec![self.side as i64; self.dim]
    }

    /// `H_k` intersected with the box, in increasing index order.
    pub fn hyperplane(&self, k: usize) -> Vec<Vertex> {
        hyperplane_in_box(k, self)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.len).map(|i| self.decode(i))
    }
}

/// `U_x = { x - e_i : i in [d] }`. Members may leave the positive orthant;
/// such vertices are permanently healthy.
pub fn update_neighborhood(x: &[i64]) -> Vec<Vertex> {
    (0..x.len())
        .map(|i| {
            let mut y = x.to_vec();
            y[i] -= 1;
            y
        })
        .collect()
}

/// Coordinatewise order `x ≺ y`.
pub fn precedes(x: &[i64], y: &[i64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(x.iter().zip(y).all(|(a, b)| a <= b))
}

pub fn l1_distance(x: &[i64], y: &[i64]) -> u64 {
    x.iter().zip(y).map(|(a, b)| a.abs_diff(*b)).sum()
}

pub fn sup_norm(x: &[i64]) -> i64 {
    x.iter().map(|c| c.abs()).max().unwrap_or(0)
}

pub fn hyperplane_in_box(k: usize, lattice: &LatticeBox) -> Vec<Vertex> {
    let (d, side) = (lattice.dim(), lattice.side());
    if k > d * side {
        return Vec::new();
    }
    // Enumerate in index order; boxes handed to this are small enough.
    let mut out = Vec::new();
    let mut x = vec![0i64; d];
    fill_level(&mut x, d, k as i64, side as i64, &mut out);
    out.sort_by_key(|v| lattice.encode(v));
    out
}

fn fill_level(x: &mut Vertex, remaining_axes: usize, budget: i64, side: i64, out: &mut Vec<Vertex>) {
    let axis = remaining_axes - 1;
    if axis == 0 {
        if (0..=side).contains(&budget) {
            x[0] = budget;
            out.push(x.clone());
        }
        return;
    }
    for c in 0..=side.min(budget) {
        if budget - c > side * axis as i64 {
            continue;
        }
        x[axis] = c;
        fill_level(x, axis, budget - c, side, out);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedEdge {
    tail: Vertex,
    head: Vertex,
}

impl OrientedEdge {
    pub fn new(tail: Vertex, head: Vertex) -> Result<Self> {
        if !precedes(&tail, &head)? || l1_distance(&tail, &head) != 1 {
            return invalid(format!(
                "{tail:?} -> {head:?} is not a positively oriented nearest-neighbor edge"
            ));
        }
        Ok(Self { tail, head })
    }

    pub fn tail(&self) -> &[i64] {
        &self.tail
    }

    pub fn head(&self) -> &[i64] {
        &self.head
    }

    /// The axis `i` with `head = tail + e_i`.
    pub fn axis(&self) -> usize {
        self.tail
            .iter()
            .zip(&self.head)
            .position(|(a, b)| a != b)
            .expect("edge endpoints differ")
    }
}
