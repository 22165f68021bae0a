//! Transition-probability graphs, their probabilistic Laplacians and
//! reversibility measures.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{c, Real};

/// Default cap on the vertex count of a Cartesian power.
pub const DEFAULT_VERTEX_CAP: usize = 1_000_000;

const STOCHASTIC_TOL: f64 = 1e-12;
const BALANCE_TOL: f64 = 1e-10;

/// How a graph was built.
#[derive(Debug, Clone, PartialEq)]
pub enum Family<T> {
    /// Four-vertex directed path with reflecting ends.
    Path {
        p: T,
    },
    Complete {
        n: usize,
    },
    /// `d`-fold Cartesian power of `base`.
    Power {
        base: Box<Family<T>>,
        base_n: usize,
        d: usize,
    },
    Custom,
}

impl<T: Real> fmt::Display for Family<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Path { p } => write!(f, "path(p={p})"),
            Family::Complete { n } => write!(f, "complete(N={n})"),
            Family::Power { base, d, .. } => write!(f, "{base}^{d}"),
            Family::Custom => f.write_str("custom"),
        }
    }
}

/// Directed graph with row-stochastic edge weights `p(x, y)`.
///
/// Only strictly positive weights are stored, so an edge exists exactly when
/// its weight is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph<T> {
    /// Outgoing edges per vertex, sorted by head.
    out: Vec<Vec<(usize, T)>>,
    family: Family<T>,
}

impl<T: Real> TransitionGraph<T> {
    /// Builds a graph from `(from, to, weight)` triples. Zero weights are
    /// dropped; repeated edges are rejected.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, T)>,
        family: Family<T>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "graph needs at least one vertex"));
        }
        let mut out: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (x, y, w) in edges {
            if x >= n || y >= n {
                return Err(Error::invalid(
                    "edges",
                    format!("edge ({x}, {y}) out of range"),
                ));
            }
            if !(w >= T::zero() && w <= T::one()) {
                return Err(Error::invalid(
                    "edges",
                    format!("weight {w} on ({x}, {y}) outside [0, 1]"),
                ));
            }
            if w > T::zero() {
                out[x].push((y, w));
            }
        }
        for (x, row) in out.iter_mut().enumerate() {
            row.sort_by_key(|&(y, _)| y);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::invalid(
                    "edges",
                    format!("duplicate edge out of vertex {x}"),
                ));
            }
        }
        let g = TransitionGraph { out, family };
        g.check_stochastic()?;
        g.check_strongly_connected()?;
        Ok(g)
    }

    fn check_stochastic(&self) -> Result<()> {
        for (x, row) in self.out.iter().enumerate() {
            let sum: T = row.iter().map(|&(_, w)| w).sum();
            if (sum - T::one()).abs() > c(STOCHASTIC_TOL) {
                return Err(Error::NotStochastic {
                    vertex: x,
                    row_sum: sum.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    fn check_strongly_connected(&self) -> Result<()> {
        let n = self.len();
        let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (x, row) in self.out.iter().enumerate() {
            for &(y, _) in row {
                reverse[y].push(x);
            }
        }
        let forward: Vec<Vec<usize>> = self
            .out
            .iter()
            .map(|r| r.iter().map(|&(y, _)| y).collect())
            .collect();
        for adj in [&forward, &reverse] {
            let seen = reachable_from_zero(adj);
            if let Some(v) = seen.iter().position(|&s| !s) {
                return Err(Error::NotConnected { vertex: v });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    /// `p(x, y)`, zero when there is no edge.
    pub fn weight(&self, x: usize, y: usize) -> T {
        self.out[x]
            .binary_search_by_key(&y, |&(h, _)| h)
            .map_or(T::zero(), |i| self.out[x][i].1)
    }

    pub fn out_edges(&self, x: usize) -> &[(usize, T)] {
        &self.out[x]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |&(y, w)| (x, y, w)))
    }

    pub fn transition_matrix(&self) -> Matrix<T> {
        let mut p = Matrix::zeros(self.len(), self.len());
        for (x, y, w) in self.edges() {
            p[(x, y)] = w;
        }
        p
    }

    /// Side length and dimension when the graph is a lattice power (a plain
    /// family counts as its own first power).
    pub fn lattice_shape(&self) -> (usize, usize) {
        match &self.family {
            Family::Power { base_n, d, .. } => (*base_n, *d),
            _ => (self.len(), 1),
        }
    }

    /// Lattice coordinates of a vertex, first axis most significant.
    pub fn coordinates(&self, vertex: usize) -> Vec<usize> {
        let (side, d) = self.lattice_shape();
        let mut coords = vec![0; d];
        let mut rest = vertex;
        for k in (0..d).rev() {
            coords[k] = rest % side;
            rest /= side;
        }
        coords
    }
}

fn reachable_from_zero(adj: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// The 4-vertex directed path `0 - 1 - 2 - 3` with reflecting ends:
/// the interior vertices step outward with probability `1 - p` and inward
/// with probability `p`.
pub fn path_graph<T: Real>(p: T) -> Result<TransitionGraph<T>> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::invalid("p", format!("{p} not in (0, 1)")));
    }
    let q = T::one() - p;
    let one = T::one();
    TransitionGraph::new(
        4,
        [
            (0, 1, one),
            (1, 0, q),
            (1, 2, p),
            (2, 1, p),
            (2, 3, q),
            (3, 2, one),
        ],
        Family::Path { p },
    )
}

/// Complete graph on `n` vertices with uniform weights `1/(n-1)`.
pub fn complete_graph<T: Real>(n: usize) -> Result<TransitionGraph<T>> {
    if n < 2 {
        return Err(Error::invalid("N", format!("{n} < 2")));
    }
    let w = T::one() / T::from_usize_lossy(n - 1);
    let edges = (0..n).flat_map(move |x| (0..n).filter(move |&y| y != x).map(move |y| (x, y, w)));
    TransitionGraph::new(n, edges, Family::Complete { n })
}

/// Reversibility measure: `mu(x) p(x,y) = mu(y) p(y,x)` on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexMeasure<T> {
    mu: Vec<T>,
    volume: T,
}

impl<T: Real> VertexMeasure<T> {
    /// Panics on a non-positive entry.
    pub fn from_values(mu: Vec<T>) -> Self {
        assert!(
            mu.iter().all(|&m| m > T::zero()),
            "measure must be positive"
        );
        let volume = mu.iter().copied().sum();
        VertexMeasure { mu, volume }
    }

    pub fn values(&self) -> &[T] {
        &self.mu
    }

    pub fn at(&self, x: usize) -> T {
        self.mu[x]
    }

    pub fn volume(&self) -> T {
        self.volume
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Largest relative detailed-balance defect over all edges of `g`.
    pub fn balance_defect(&self, g: &TransitionGraph<T>) -> (T, usize, usize) {
        let mut worst = (T::zero(), 0, 0);
        for (x, y, pxy) in g.edges() {
            let lhs = self.mu[x] * pxy;
            let rhs = self.mu[y] * g.weight(y, x);
            let rel = (lhs - rhs).abs() / lhs.max(rhs);
            if rel > worst.0 {
                worst = (rel, x, y);
            }
        }
        worst
    }

    /// Product measure on the lexicographically ordered `d`-fold power.
    pub fn power(&self, d: usize) -> Self {
        let mut mu = vec![T::one()];
        for _ in 0..d {
            mu = mu
                .iter()
                .flat_map(|&a| self.mu.iter().map(move |&b| a * b))
                .collect();
        }
        Self::from_values(mu)
    }
}

/// Solves detailed balance by propagating `mu(0) = 1` along a breadth-first
/// spanning tree, then checks every edge.
pub fn kolmogorov_measure<T: Real>(g: &TransitionGraph<T>) -> Result<VertexMeasure<T>> {
    let n = g.len();
    let mut mu: Vec<Option<T>> = vec![None; n];
    mu[0] = Some(T::one());
    let mut queue = VecDeque::from([0]);
    while let Some(x) = queue.pop_front() {
        let mx = mu[x].unwrap();
        for &(y, pxy) in g.out_edges(x) {
            if mu[y].is_some() {
                continue;
            }
            let pyx = g.weight(y, x);
            if pyx == T::zero() {
                return Err(Error::CycleInconsistency {
                    from: x,
                    to: y,
                    defect: f64::INFINITY,
                });
            }
            mu[y] = Some(mx * pxy / pyx);
            queue.push_back(y);
        }
    }
    let mu: Vec<T> = mu
        .into_iter()
        .enumerate()
        .map(|(v, m)| m.ok_or(Error::NotConnected { vertex: v }))
        .collect::<Result<_>>()?;
    let measure = VertexMeasure::from_values(mu);
    for (x, y, _) in g.edges() {
        if g.weight(y, x) == T::zero() {
            return Err(Error::CycleInconsistency {
                from: x,
                to: y,
                defect: f64::INFINITY,
            });
        }
    }
    let (defect, from, to) = measure.balance_defect(g);
    if defect > c(BALANCE_TOL) {
        return Err(Error::CycleInconsistency {
            from,
            to,
            defect: defect.to_f64_lossy(),
        });
    }
    Ok(measure)
}

/// Probabilistic graph Laplacian `I - P` with its reversibility measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian<T> {
    matrix: Matrix<T>,
    measure: VertexMeasure<T>,
}

impl<T: Real> Laplacian<T> {
    pub fn new(g: &TransitionGraph<T>) -> Result<Self> {
        let measure = kolmogorov_measure(g)?;
        Ok(Self::with_measure(g, measure))
    }

    fn with_measure(g: &TransitionGraph<T>, measure: VertexMeasure<T>) -> Self {
        let n = g.len();
        let p = g.transition_matrix();
        let matrix = Matrix::from_fn(
            n,
            n,
            |i, j| if i == j { T::one() } else { T::zero() } - p[(i, j)],
        );
        Laplacian { matrix, measure }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn measure(&self) -> &VertexMeasure<T> {
        &self.measure
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `max |(M Δ - Δᵀ M)_ij|`; zero for a self-adjoint Laplacian.
    pub fn self_adjointness_defect(&self) -> T {
        let n = self.len();
        let mu = self.measure.values();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let lhs = mu[i] * self.matrix[(i, j)];
                let rhs = self.matrix[(j, i)] * mu[j];
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }
}

/// The `d`-fold Cartesian power of a graph.
#[derive(Debug, Clone)]
pub struct CartesianPower<T> {
    pub graph: TransitionGraph<T>,
    pub laplacian: Laplacian<T>,
    pub measure: VertexMeasure<T>,
}

/// `d`-fold Cartesian power with the `1/d`-normalized Kronecker sum Laplacian
/// and the product measure. Vertices are ordered lexicographically with the
/// first axis most significant.
pub fn cartesian_power<T: Real>(g: &TransitionGraph<T>, d: usize) -> Result<CartesianPower<T>> {
    cartesian_power_capped(g, d, DEFAULT_VERTEX_CAP)
}

pub fn cartesian_power_capped<T: Real>(
    g: &TransitionGraph<T>,
    d: usize,
    cap: usize,
) -> Result<CartesianPower<T>> {
    if d < 1 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    let side = g.len();
    let n = (side as u128)
        .checked_pow(d as u32)
        .filter(|&n| n <= cap as u128)
        .ok_or(Error::TooLarge {
            vertices: usize::try_from((side as u128).saturating_pow(d as u32))
                .unwrap_or(usize::MAX),
            cap,
        })? as usize;
    let base_measure = kolmogorov_measure(g)?;
    let inv_d = T::one() / T::from_usize_lossy(d);

    let mut edges = Vec::new();
    let mut stride = n;
    for _axis in 0..d {
        stride /= side;
        for v in 0..n {
            let coord = (v / stride) % side;
            let mut self_loop = T::zero();
            for &(h, w) in g.out_edges(coord) {
                if h == coord {
                    self_loop += w;
                } else {
                    let u = v - coord * stride + h * stride;
                    edges.push((v, u, w * inv_d));
                }
            }
            if self_loop > T::zero() {
                edges.push((v, v, self_loop * inv_d));
            }
        }
    }
    // merge self-loops contributed by several axes
    edges.sort_by_key(|&(x, y, _)| (x, y));
    let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(edges.len());
    for e in edges {
        match merged.last_mut() {
            Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 += e.2,
            _ => merged.push(e),
        }
    }

    let family = Family::Power {
        base: Box::new(g.family().clone()),
        base_n: side,
        d,
    };
    let graph = TransitionGraph::new(n, merged, family)?;
    let measure = base_measure.power(d);
    let laplacian = Laplacian::with_measure(&graph, measure.clone());
    Ok(CartesianPower {
        graph,
        laplacian,
        measure,
    })
}

/// `(1/d) Σ_k I ⊗ … ⊗ Δ ⊗ … ⊗ I`, assembled with explicit Kronecker products.
pub fn kronecker_sum_power<T: Real>(delta: &Matrix<T>, d: usize) -> Matrix<T> {
    let side = delta.nrows();
    let n = side.pow(d as u32);
    let mut acc = Matrix::zeros(n, n);
    for k in 0..d {
        let mut term = Matrix::identity(1);
        for j in 0..d {
            term = if j == k {
                term.kron(delta)
            } else {
                term.kron(&Matrix::identity(side))
            };
        }
        acc = acc.add(&term);
    }
    acc.scaled(T::one() / T::from_usize_lossy(d))
}

/// Spread of the measure over interior lattice vertices (no coordinate on
/// the boundary of its axis).
///
/// On a path power the interior measure is constant for every `p`, so the
/// verdict also asks that every interior vertex moves to each of its
/// neighbours with equal probability; both hold exactly when `p = 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureProfile<T> {
    pub interior_vertices: usize,
    pub min: T,
    pub max: T,
    pub measure_constant: bool,
    pub uniform_transitions: bool,
    pub homogeneous: bool,
}

pub fn interior_measure_profile<T: Real>(
    g: &TransitionGraph<T>,
    measure: &VertexMeasure<T>,
) -> MeasureProfile<T> {
    let (side, _) = g.lattice_shape();
    let mut min = T::infinity();
    let mut max = T::neg_infinity();
    let mut count = 0;
    let mut uniform_transitions = true;
    let tol = c::<T>(1e-12);
    for v in 0..g.len() {
        let interior = g.coordinates(v).iter().all(|&x| x != 0 && x + 1 != side);
        if interior {
            count += 1;
            min = min.min(measure.at(v));
            max = max.max(measure.at(v));
            let moves: Vec<T> = g
                .out_edges(v)
                .iter()
                .filter(|&&(y, _)| y != v)
                .map(|&(_, w)| w)
                .collect();
            let (lo, hi) = moves
                .iter()
                .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &w| {
                    (lo.min(w), hi.max(w))
                });
            uniform_transitions &= hi - lo <= tol * hi;
        }
    }
    let measure_constant = count > 0 && max - min <= tol * max;
    MeasureProfile {
        interior_vertices: count,
        min,
        max,
        measure_constant,
        uniform_transitions: count > 0 && uniform_transitions,
        homogeneous: measure_constant && count > 0 && uniform_transitions,
    }
}
