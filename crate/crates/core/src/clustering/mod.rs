//! Density clustering of clients by the similarity of their sign vectors.
//!
//! The secure path ([`cosine_from_xor`] → [`euclid_rows`] →
//! [`indicator_matrix`]) runs over shares and opens only the indicator
//! matrix; [`dbscan_labels`] then runs in the clear on that matrix.
//! [`plaintext_clustering_oracle`] recomputes everything from the sign
//! vectors in `f64` for testing.

mod secure;

pub use secure::{
    compare_pairs, cosine_from_xor, euclid_rows, indicator_from_bits, indicator_matrix,
    SharedCosMatrix, SharedEucMatrix, MAX_CLIENTS, MAX_DIM,
};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::updates::SignVector;

/// Row-major `n × n` matrix of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let values = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Pairwise cosine similarity of the clients' ±1 vectors.
pub type CosMatrix = SquareMatrix;

/// Pairwise (approximate) Euclidean distance between rows of the cosine
/// matrix.
pub type EucMatrix = SquareMatrix;

/// Symmetric α-neighbourhood graph with ones on the diagonal.
#[derive(Clone, PartialEq, Eq)]
pub struct IndMatrix {
    n: usize,
    bits: BitVector,
}

impl IndMatrix {
    /// Builds the matrix from the strictly-upper triangle; the diagonal is
    /// set and the lower triangle mirrored.
    pub fn from_upper(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = BitVector::zeros(n * n);
        for i in 0..n {
            bits.set(i * n + i, true);
            for j in i + 1..n {
                if f(i, j) {
                    bits.set(i * n + j, true);
                    bits.set(j * n + i, true);
                }
            }
        }
        Self { n, bits }
    }

    /// Raw `n × n` row-major bits, with no structural guarantees. Used for
    /// broadcasts that may have been tampered with.
    pub fn from_raw(n: usize, bits: BitVector) -> Result<Self> {
        if bits.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: bits.len(),
            });
        }
        Ok(Self { n, bits })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits.get(i * self.n + j)
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.get(i, j)).count()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i))
    }
}

impl std::fmt::Debug for IndMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IndMatrix({})", self.n)?;
        for i in 0..self.n {
            let row: String = (0..self.n).map(|j| if self.get(i, j) { '1' } else { '.' }).collect();
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

/// Per-client cluster labels; `None` is noise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<Option<usize>>,
    pub clusters: usize,
    pub m_pts: usize,
}

impl ClusterAssignment {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == Some(cluster))
            .collect()
    }

    pub fn is_noise(&self, client: usize) -> bool {
        self.labels[client].is_none()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }
}

/// Default neighbourhood radius.
pub const DEFAULT_ALPHA: f64 = 1.2;

/// Default `mPts = ⌈0.3·n⌉`, at least 1.
pub fn default_m_pts(n: usize) -> usize {
    ((0.3 * n as f64).ceil() as usize).max(1)
}

/// Upper bound on α under Gaussian updates: two independent random sign
/// vectors have rows about `√2` apart.
pub fn gaussian_alpha_bound() -> f64 {
    std::f64::consts::SQRT_2
}

/// Third-order expansion of `√x` around 1:
/// `1 + (x-1)/2 - (x-1)²/8 + (x-1)³/16`.
///
/// Its derivative `1/2 - u/4 + 3u²/16` has negative discriminant, so the
/// polynomial is strictly increasing everywhere and thresholding it
/// preserves the order of the exact distances.
pub fn taylor_sqrt(x: f64) -> f64 {
    let u = x - 1.0;
    1.0 + u / 2.0 - u * u / 8.0 + u * u * u / 16.0
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut i = i;
        while self.0[i] != r {
            i = std::mem::replace(&mut self.0[i], r);
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index becomes the root
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// DBSCAN on a neighbourhood graph.
///
/// A point is core when its row (self included) has at least `m_pts` ones.
/// Core points adjacent in `ind` form clusters, numbered by their smallest
/// member. Other points join the lowest-numbered cluster they touch through
/// a core point, or are noise.
pub fn dbscan_labels(ind: &IndMatrix, m_pts: usize) -> ClusterAssignment {
    let n = ind.n();
    let core: Vec<bool> = (0..n).map(|i| ind.degree(i) >= m_pts).collect();
    let mut uf = UnionFind((0..n).collect());
    for i in 0..n {
        for j in i + 1..n {
            if core[i] && core[j] && ind.get(i, j) {
                uf.union(i, j);
            }
        }
    }
    let mut id_of_root = vec![None; n];
    let mut clusters = 0;
    let mut labels = vec![None; n];
    for i in 0..n {
        if core[i] {
            let r = uf.find(i);
            let id = *id_of_root[r].get_or_insert_with(|| {
                clusters += 1;
                clusters - 1
            });
            labels[i] = Some(id);
        }
    }
    for i in 0..n {
        if !core[i] {
            labels[i] = (0..n)
                .filter(|&j| core[j] && ind.get(i, j))
                .filter_map(|j| labels[j])
                .min();
        }
    }
    ClusterAssignment {
        labels,
        clusters,
        m_pts,
    }
}

/// Everything the secure pipeline produces, recomputed in the clear.
#[derive(Debug, Clone)]
pub struct OracleOutput {
    pub cos: CosMatrix,
    /// Squared distances between cosine rows.
    pub squared: SquareMatrix,
    pub euc_exact: EucMatrix,
    pub euc_taylor: EucMatrix,
    pub ind: IndMatrix,
    pub labels: ClusterAssignment,
}

/// Plaintext reference: cosine of the ±1 vectors, row distances, both the
/// exact square root and its Taylor expansion, the indicator matrix built
/// from the Taylor variant, and DBSCAN labels.
pub fn plaintext_clustering_oracle(
    signs: &[SignVector],
    alpha: f64,
    m_pts: usize,
) -> Result<OracleOutput> {
    let n = signs.len();
    if n == 0 {
        return Err(Error::Empty("sign vectors"));
    }
    let np = signs[0].dim();
    if let Some(s) = signs.iter().find(|s| s.dim() != np) {
        return Err(Error::DimensionMismatch {
            expected: np,
            actual: s.dim(),
        });
    }
    let pm: Vec<Vec<i64>> = signs.iter().map(|s| s.to_i64()).collect();
    let cos = SquareMatrix::from_fn(n, |i, j| {
        let dot: i64 = pm[i].iter().zip(&pm[j]).map(|(a, b)| a * b).sum();
        dot as f64 / np as f64
    });
    let squared = SquareMatrix::from_fn(n, |i, j| {
        cos.row(i)
            .iter()
            .zip(cos.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    });
    let euc_exact = SquareMatrix::from_fn(n, |i, j| squared.get(i, j).sqrt());
    let euc_taylor = SquareMatrix::from_fn(n, |i, j| taylor_sqrt(squared.get(i, j)));
    let ind = IndMatrix::from_upper(n, |i, j| euc_taylor.get(i, j) <= alpha);
    let labels = dbscan_labels(&ind, m_pts);
    Ok(OracleOutput {
        cos,
        squared,
        euc_exact,
        euc_taylor,
        ind,
        labels,
    })
}
