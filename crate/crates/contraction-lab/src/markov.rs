//! Finite-state Markov kernels.
//!
//! A kernel on `m` states is a row-stochastic matrix with `K[(x, y)] = K(y|x)`.
//! Measures act from the left (`μK(y) = Σ_x μ(x) K(y|x)`) and functions from
//! the right (`Kf(x) = Σ_y K(y|x) f(y)`).
//!
//! The dual of `K` with respect to `μ` is
//!
//! ```text
//! K*(x|y) = K(y|x) μ(x) / μK(y)
//! ```
//!
//! and satisfies `⟨Kf, g⟩_μ = ⟨f, K*g⟩_{μK}`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// Tolerance on row sums and total mass.
pub const SUM_TOL: f64 = 1e-10;
/// Singular values below this count towards the null space of `Kᵀ − I`.
pub const RANK_TOL: f64 = 1e-8;

/// A probability vector on a finite state space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    weights: Vec<f64>,
}

impl ProbVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite);
            }
            if w < 0.0 {
                return Err(Error::NegativeEntry { row: 0, col: i, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { weights })
    }

    /// Normalises nonnegative weights.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::NotNormalized { sum });
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(m: usize) -> Self {
        Self { weights: vec![1.0 / m as f64; m] }
    }

    pub fn dirac(m: usize, x: usize) -> Self {
        let mut weights = vec![0.0; m];
        weights[x] = 1.0;
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, x: usize) -> f64 {
        self.weights[x]
    }

    /// `μ(f) = Σ_x μ(x) f(x)`.
    pub fn expect(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Smallest weight; densities require it to be positive.
    pub fn min_mass(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Density `dν/dμ`, requiring `ν ≪ μ`. States with `μ(x) = 0` get density 0.
    pub fn density_wrt(&self, mu: &ProbVector) -> Result<Vec<f64>> {
        check_len(mu.len(), self.len())?;
        self.weights
            .iter()
            .zip(mu.as_slice())
            .enumerate()
            .map(|(x, (&n, &m))| {
                if m > 0.0 {
                    Ok(n / m)
                } else if n > 0.0 {
                    Err(Error::AbsoluteContinuityViolation { state: x })
                } else {
                    Ok(0.0)
                }
            })
            .collect()
    }

    /// Draws a point uniformly from the simplex.
    pub fn random<R: rand::Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let w: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = w.iter().sum();
        Self { weights: w.into_iter().map(|v: f64| v / s).collect() }
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// A row-stochastic matrix, `K[(x, y)] = K(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernel {
    mat: DMatrix<f64>,
}

impl MarkovKernel {
    /// Validates a raw matrix (rows summing to 1 within [`SUM_TOL`], no negative entries).
    pub fn from_matrix(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() == 0 {
            return Err(Error::Empty);
        }
        if mat.nrows() != mat.ncols() {
            return Err(Error::NonSquare { rows: mat.nrows(), cols: mat.ncols() });
        }
        for x in 0..mat.nrows() {
            let mut sum = 0.0;
            for y in 0..mat.ncols() {
                let v = mat[(x, y)];
                if !v.is_finite() {
                    return Err(Error::NonFinite);
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry { row: x, col: y, value: v });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::RowSumViolation { row: x, sum });
            }
        }
        Ok(Self { mat })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty);
        }
        let m = rows.len();
        for r in rows {
            if r.len() != m {
                return Err(Error::NonSquare { rows: m, cols: r.len() });
            }
        }
        Self::from_matrix(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
    }

    pub fn identity(m: usize) -> Self {
        Self { mat: DMatrix::identity(m, m) }
    }

    /// Every row equal to `mu`: the next state ignores the current one.
    pub fn independence(mu: &ProbVector) -> Self {
        let m = mu.len();
        Self { mat: DMatrix::from_fn(m, m, |_, y| mu.get(y)) }
    }

    /// Renormalises rows after arithmetic that may have drifted by a few ulps.
    fn from_matrix_renormalized(mut mat: DMatrix<f64>) -> Self {
        for x in 0..mat.nrows() {
            let mut s = 0.0;
            for y in 0..mat.ncols() {
                let v = mat[(x, y)].max(0.0);
                mat[(x, y)] = v;
                s += v;
            }
            for y in 0..mat.ncols() {
                mat[(x, y)] /= s;
            }
        }
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// `K(y|x)`.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.mat[(x, y)]
    }

    pub fn row(&self, x: usize) -> Vec<f64> {
        self.mat.row(x).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|x| self.row(x)).collect()
    }

    /// `μK`.
    pub fn push(&self, mu: &ProbVector) -> ProbVector {
        let m = self.dim();
        let w: Vec<f64> = (0..m)
            .map(|y| (0..m).map(|x| mu.get(x) * self.mat[(x, y)]).sum())
            .collect();
        ProbVector { weights: w }
    }

    /// `Kf`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m)
            .map(|x| (0..m).map(|y| self.mat[(x, y)] * f[y]).sum())
            .collect()
    }

    /// Kernel of "first `self`, then `other`": `(KL)(z|x) = Σ_y K(y|x) L(z|y)`.
    pub fn compose(&self, other: &MarkovKernel) -> MarkovKernel {
        Self::from_matrix_renormalized(&self.mat * &other.mat)
    }

    /// `Kᵗ` by repeated squaring; `K⁰ = I`.
    pub fn t_step(&self, t: usize) -> MarkovKernel {
        let mut result = DMatrix::identity(self.dim(), self.dim());
        let mut base = self.mat.clone();
        let mut e = t;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Self::from_matrix_renormalized(result)
    }

    /// Unique stationary distribution, solving `(Kᵀ − I)π = 0` with `Σπ = 1`.
    pub fn stationary(&self) -> Result<ProbVector> {
        let m = self.dim();
        let a = self.mat.transpose() - DMatrix::<f64>::identity(m, m);
        let sv = a.clone().svd(false, false).singular_values;
        let scale = sv.iter().copied().fold(1.0, f64::max);
        let null_dim = sv.iter().filter(|&&s| s <= RANK_TOL * scale).count();
        if null_dim != 1 {
            return Err(Error::NonUniqueStationary { dim: null_dim });
        }
        // Replace one balance equation by the normalisation constraint.
        let mut sys = a;
        for j in 0..m {
            sys[(m - 1, j)] = 1.0;
        }
        let mut rhs = nalgebra::DVector::<f64>::zeros(m);
        rhs[m - 1] = 1.0;
        let sol = sys.lu().solve(&rhs).ok_or(Error::NonUniqueStationary { dim: 2 })?;
        let w: Vec<f64> = sol.iter().map(|&v| if v < 0.0 && v > -1e-13 { 0.0 } else { v }).collect();
        let s: f64 = w.iter().sum();
        ProbVector::new(w.into_iter().map(|v| v / s).collect())
    }

    /// `max_y |πK(y) − π(y)|`.
    pub fn stationarity_residual(&self, pi: &ProbVector) -> f64 {
        let pk = self.push(pi);
        pk.as_slice()
            .iter()
            .zip(pi.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Dual kernel `K*_μ`, a kernel from the output space back to the input space.
    pub fn dual(&self, mu: &ProbVector) -> Result<MarkovKernel> {
        check_len(self.dim(), mu.len())?;
        let mk = self.push(mu);
        if let Some(y) = (0..self.dim()).find(|&y| mk.get(y) <= 0.0) {
            return Err(Error::ZeroPushedMass { state: y });
        }
        let m = self.dim();
        let mat = DMatrix::from_fn(m, m, |y, x| self.mat[(x, y)] * mu.get(x) / mk.get(y));
        Ok(Self::from_matrix_renormalized(mat))
    }

    /// Forward and dual Radon-Nikodym densities.
    pub fn densities(&self, mu: &ProbVector) -> Result<KernelDensities> {
        check_len(self.dim(), mu.len())?;
        if let Some(x) = (0..mu.len()).find(|&x| mu.get(x) <= 0.0) {
            return Err(Error::ZeroMass { state: x });
        }
        let mk = self.push(mu);
        if let Some(y) = (0..mk.len()).find(|&y| mk.get(y) <= 0.0) {
            return Err(Error::ZeroPushedMass { state: y });
        }
        let m = self.dim();
        let forward = DMatrix::from_fn(m, m, |x, y| self.mat[(x, y)] / mk.get(y));
        // g_y(x) = K*(x|y)/μ(x) = K(y|x)/μK(y).
        let dual = forward.transpose();
        Ok(KernelDensities { forward, dual, base: mu.clone(), pushed: mk })
    }

    /// `H_t = exp(−t(I − K))`.
    pub fn semigroup(&self, t: f64) -> Result<Semigroup> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("semigroup time {t} must be finite and >= 0")));
        }
        let m = self.dim();
        let gen = (&self.mat - DMatrix::<f64>::identity(m, m)) * t;
        let h = expm(&gen);
        Ok(Semigroup { time: t, kernel: Self::from_matrix_renormalized(h) })
    }
}

/// Radon-Nikodym densities of a kernel with respect to a base measure `μ`.
#[derive(Debug, Clone)]
pub struct KernelDensities {
    /// `forward[(x, y)] = g_x(y) = K(y|x) / μK(y)`.
    pub forward: DMatrix<f64>,
    /// `dual[(y, x)] = g_y(x) = K*(x|y) / μ(x)`.
    pub dual: DMatrix<f64>,
    pub base: ProbVector,
    pub pushed: ProbVector,
}

impl KernelDensities {
    /// `g_x − 1` as a function of `y`.
    pub fn forward_centered(&self, x: usize) -> Vec<f64> {
        self.forward.row(x).iter().map(|g| g - 1.0).collect()
    }

    /// `g_y − 1` as a function of `x`.
    pub fn dual_centered(&self, y: usize) -> Vec<f64> {
        self.dual.row(y).iter().map(|g| g - 1.0).collect()
    }
}

/// `H_t` together with its time parameter.
#[derive(Debug, Clone)]
pub struct Semigroup {
    pub time: f64,
    pub kernel: MarkovKernel,
}

const TAYLOR_ORDER: usize = 12;

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0i32;
    if norm1 > 0.5 {
        s = (norm1 / 0.5).log2().ceil() as i32;
    }
    let b = a / 2f64.powi(s);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=TAYLOR_ORDER {
        term = &term * &b / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `[[1−λ, λ], [κ, 1−κ]]`.
pub fn general_binary(lambda: f64, kappa: f64) -> Result<MarkovKernel> {
    for (name, v) in [("lambda", lambda), ("kappa", kappa)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must lie in [0, 1]")));
        }
    }
    MarkovKernel::from_rows(&[vec![1.0 - lambda, lambda], vec![kappa, 1.0 - kappa]])
}

/// Binary symmetric channel with crossover `λ`.
pub fn bsc(lambda: f64) -> Result<MarkovKernel> {
    general_binary(lambda, lambda)
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            if adj[a].contains(&b) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        Ok(Self { n, adj })
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges).expect("path graph is simple")
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Self::new(n, &edges).expect("complete graph is simple")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `π(x) = deg(x) / 2|E|`.
    pub fn degree_measure(&self) -> Result<ProbVector> {
        let two_e = 2.0 * self.num_edges() as f64;
        ProbVector::new((0..self.n).map(|v| self.degree(v) as f64 / two_e).collect())
    }
}

/// Lazy random walk: stay with probability `1−λ`, else move to a uniform neighbour.
pub fn lazy_graph_walk(g: &Graph, lambda: f64) -> Result<MarkovKernel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must lie in [0, 1]")));
    }
    if g.len() < 2 || !g.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let n = g.len();
    let mut mat = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        mat[(x, x)] = 1.0 - lambda;
        let d = g.degree(x) as f64;
        for &y in g.neighbors(x) {
            mat[(x, y)] += lambda / d;
        }
    }
    MarkovKernel::from_matrix(mat)
}

/// Random kernel with rows drawn uniformly from the simplex (normalised `Exp(1)` variates).
pub fn random_stochastic(m: usize, seed: u64) -> Result<MarkovKernel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_stochastic_with(m, &mut rng)
}

pub fn random_stochastic_with<R: rand::Rng + ?Sized>(m: usize, rng: &mut R) -> Result<MarkovKernel> {
    if m == 0 {
        return Err(Error::Empty);
    }
    let rows: Vec<Vec<f64>> = (0..m).map(|_| ProbVector::random(m, rng).weights).collect();
    MarkovKernel::from_rows(&rows)
}

/// Total variation distance `½ Σ |a − b|`.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
