//! Non-uniform tensor grids for (S, v, R), lexicographic flattening, and the
//! extended jump grid that appends geometrically spaced nodes beyond the
//! diffusion domain.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("axis needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("invalid span: requires lo < center < hi, got lo={lo} center={center} hi={hi}")]
    InvalidSpan { lo: f64, center: f64, hi: f64 },
    #[error("concentration must be > 0, got {0}")]
    InvalidConcentration(f64),
    #[error("barrier level {level} outside axis range [{lo}, {hi}]")]
    BarrierOutOfRange { level: f64, lo: f64, hi: f64 },
    #[error("extension ratio must be > 1, got {0}")]
    InvalidRatio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Spot,
    Variance,
    CorrelationTransform,
}

/// Strictly increasing 1D node set.
#[derive(Debug, Clone)]
pub struct Axis {
    pub kind: AxisKind,
    nodes: Vec<f64>,
    /// index of the node that sits exactly at the requested center
    center_index: usize,
}

pub const MIN_AXIS_NODES: usize = 5;

impl Axis {
    /// Sinh-stretched axis on [lo, hi] clustered around `center`.
    ///
    /// `concentration` is the sinh length scale in axis units: node density
    /// near the center grows as it shrinks, and the grid tends to uniform as
    /// it grows. The center is always an exact node; endpoints are pinned.
    pub fn build(
        kind: AxisKind,
        count: usize,
        center: f64,
        span: (f64, f64),
        concentration: f64,
    ) -> Result<Axis, GridError> {
        let (lo, hi) = span;
        if count < MIN_AXIS_NODES {
            return Err(GridError::TooFewNodes {
                min: MIN_AXIS_NODES,
                got: count,
            });
        }
        if !(lo < center && center < hi) {
            return Err(GridError::InvalidSpan { lo, center, hi });
        }
        if !(concentration > 0.0) {
            return Err(GridError::InvalidConcentration(concentration));
        }
        let alpha = concentration;
        let u_lo = ((lo - center) / alpha).asinh();
        let u_hi = ((hi - center) / alpha).asinh();
        // split the uniform u-lattice so that u = 0 (the center) is a node
        let frac = -u_lo / (u_hi - u_lo);
        let n_lo = ((count - 1) as f64 * frac).round() as usize;
        let n_lo = n_lo.clamp(1, count - 2);
        let n_hi = count - 1 - n_lo;
        let mut nodes = Vec::with_capacity(count);
        for i in 0..=n_lo {
            let u = u_lo * (1.0 - i as f64 / n_lo as f64);
            nodes.push(center + alpha * u.sinh());
        }
        for j in 1..=n_hi {
            let u = u_hi * j as f64 / n_hi as f64;
            nodes.push(center + alpha * u.sinh());
        }
        // pin endpoints and the center bit-exactly
        nodes[0] = lo;
        nodes[n_lo] = center;
        nodes[count - 1] = hi;
        let axis = Axis {
            kind,
            nodes,
            center_index: n_lo,
        };
        axis.assert_increasing();
        Ok(axis)
    }

    /// Axis from explicit nodes (tests, refinement studies).
    pub fn from_nodes(kind: AxisKind, nodes: Vec<f64>, center_index: usize) -> Axis {
        let axis = Axis {
            kind,
            nodes,
            center_index,
        };
        axis.assert_increasing();
        axis
    }

    /// Nested refinement: one extra node at the midpoint of every interval.
    /// Existing nodes are preserved bit-exactly, so solutions are comparable.
    pub fn refined(&self) -> Axis {
        let mut nodes = Vec::with_capacity(self.nodes.len() * 2 - 1);
        for i in 0..self.nodes.len() - 1 {
            nodes.push(self.nodes[i]);
            nodes.push(0.5 * (self.nodes[i] + self.nodes[i + 1]));
        }
        nodes.push(*self.nodes.last().unwrap());
        Axis {
            kind: self.kind,
            nodes,
            center_index: self.center_index * 2,
        }
    }

    fn assert_increasing(&self) {
        for w in self.nodes.windows(2) {
            assert!(
                w[1] > w[0],
                "axis nodes must be strictly increasing: {} then {}",
                w[0],
                w[1]
            );
        }
        if self.kind == AxisKind::Variance {
            assert!(self.nodes[0] >= 0.0, "variance axis cannot go negative");
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }
    pub fn hi(&self) -> f64 {
        *self.nodes.last().unwrap()
    }
    pub fn center_index(&self) -> usize {
        self.center_index
    }

    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the node nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &n) in self.nodes.iter().enumerate() {
            let d = (n - x).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }
}

/// Barrier snapping: largest node index with node <= level (snap down).
pub fn locate_barrier(axis: &Axis, level: f64) -> Result<usize, GridError> {
    if level < axis.lo() || level > axis.hi() {
        return Err(GridError::BarrierOutOfRange {
            level,
            lo: axis.lo(),
            hi: axis.hi(),
        });
    }
    let mut idx = 0;
    for (i, &n) in axis.nodes().iter().enumerate() {
        if n <= level + 1e-12 * level.abs().max(1.0) {
            idx = i;
        } else {
            break;
        }
    }
    Ok(idx)
}

/// Tensor grid over the three axes. Flattened index: S fastest, then v,
/// then R: idx = i_s + n_s * (i_v + n_v * i_r).
#[derive(Debug, Clone)]
pub struct Grid3D {
    pub s: Axis,
    pub v: Axis,
    pub r: Axis,
}

impl Grid3D {
    pub fn new(s: Axis, v: Axis, r: Axis) -> Grid3D {
        Grid3D { s, v, r }
    }

    pub fn n_total(&self) -> usize {
        self.s.len() * self.v.len() * self.r.len()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.s.len(), self.v.len(), self.r.len())
    }

    #[inline]
    pub fn flatten(&self, i_s: usize, i_v: usize, i_r: usize) -> usize {
        i_s + self.s.len() * (i_v + self.v.len() * i_r)
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> (usize, usize, usize) {
        let i_s = idx % self.s.len();
        let rest = idx / self.s.len();
        (i_s, rest % self.v.len(), rest / self.v.len())
    }

    #[inline]
    pub fn node(&self, idx: usize) -> (f64, f64, f64) {
        let (i, j, k) = self.unflatten(idx);
        (self.s.nodes()[i], self.v.nodes()[j], self.r.nodes()[k])
    }

    /// Flattened index of the node nearest to the state point.
    pub fn nearest_node(&self, s: f64, v: f64, r: f64) -> usize {
        self.flatten(
            self.s.nearest_index(s),
            self.v.nearest_index(v),
            self.r.nearest_index(r),
        )
    }
}

/// One axis of the jump grid: the diffusion axis embedded (bit-exactly) with
/// geometric extension nodes appended beyond one or both ends.
#[derive(Debug, Clone)]
pub struct JumpAxis {
    pub axis: Axis,
    /// index in the jump axis of diffusion node 0
    pub offset: usize,
    /// number of diffusion nodes
    pub diff_len: usize,
}

impl JumpAxis {
    #[inline]
    pub fn embed_index(&self, diffusion_index: usize) -> usize {
        self.offset + diffusion_index
    }
}

/// Append `extra_lo` / `extra_hi` nodes beyond the ends of `axis`; the first
/// appended spacing is `ratio` times the adjacent boundary spacing and each
/// further spacing grows by `ratio`. A variance axis is never extended below
/// zero (the lower count is forced to 0 when the axis starts at 0).
pub fn extend_to_jump_grid(
    axis: &Axis,
    ratio: f64,
    extra_lo: usize,
    extra_hi: usize,
) -> Result<JumpAxis, GridError> {
    if !(ratio > 1.0) {
        return Err(GridError::InvalidRatio(ratio));
    }
    let extra_lo = if axis.kind == AxisKind::Variance && axis.lo() <= 0.0 {
        0
    } else {
        extra_lo
    };
    let n = axis.len();
    let mut nodes = Vec::with_capacity(n + extra_lo + extra_hi);
    let lo_spacing = axis.nodes()[1] - axis.nodes()[0];
    let hi_spacing = axis.nodes()[n - 1] - axis.nodes()[n - 2];
    let mut below = Vec::with_capacity(extra_lo);
    {
        let mut x = axis.lo();
        let mut h = lo_spacing * ratio;
        for _ in 0..extra_lo {
            x -= h;
            below.push(x);
            h *= ratio;
        }
    }
    below.reverse();
    nodes.extend_from_slice(&below);
    nodes.extend_from_slice(axis.nodes());
    {
        let mut x = axis.hi();
        let mut h = hi_spacing * ratio;
        for _ in 0..extra_hi {
            x += h;
            nodes.push(x);
            h *= ratio;
        }
    }
    Ok(JumpAxis {
        axis: Axis::from_nodes(axis.kind, nodes, axis.center_index() + extra_lo),
        offset: extra_lo,
        diff_len: n,
    })
}

/// Jump super-grid: every diffusion node appears exactly once.
#[derive(Debug, Clone)]
pub struct JumpGrid {
    pub s: JumpAxis,
    pub v: JumpAxis,
    pub r: JumpAxis,
}

impl JumpGrid {
    pub fn n_total(&self) -> usize {
        self.s.axis.len() * self.v.axis.len() * self.r.axis.len()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.s.axis.len(), self.v.axis.len(), self.r.axis.len())
    }

    #[inline]
    pub fn flatten(&self, i_s: usize, i_v: usize, i_r: usize) -> usize {
        i_s + self.s.axis.len() * (i_v + self.v.axis.len() * i_r)
    }

    /// Copy a diffusion-grid field into the jump grid (extension nodes zero).
    pub fn embed(&self, grid: &Grid3D, field: &[f64]) -> Vec<f64> {
        debug_assert_eq!(field.len(), grid.n_total());
        let mut out = vec![0.0; self.n_total()];
        for k in 0..grid.r.len() {
            for j in 0..grid.v.len() {
                let src = grid.flatten(0, j, k);
                let dst = self.flatten(
                    self.s.embed_index(0),
                    self.v.embed_index(j),
                    self.r.embed_index(k),
                );
                out[dst..dst + grid.s.len()].copy_from_slice(&field[src..src + grid.s.len()]);
            }
        }
        out
    }

    /// Restrict a jump-grid field back to the diffusion grid; returns the
    /// restricted field and the mass left behind on extension nodes.
    pub fn restrict(&self, grid: &Grid3D, field: &[f64]) -> (Vec<f64>, f64) {
        debug_assert_eq!(field.len(), self.n_total());
        let mut out = vec![0.0; grid.n_total()];
        for k in 0..grid.r.len() {
            for j in 0..grid.v.len() {
                let dst = grid.flatten(0, j, k);
                let src = self.flatten(
                    self.s.embed_index(0),
                    self.v.embed_index(j),
                    self.r.embed_index(k),
                );
                out[dst..dst + grid.s.len()].copy_from_slice(&field[src..src + grid.s.len()]);
            }
        }
        let total: f64 = field.iter().sum();
        let kept: f64 = out.iter().sum();
        (out, total - kept)
    }
}
