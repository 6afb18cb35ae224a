//! Real symmetric matrices, Cholesky log-determinants, and the random
//! simplex/partition generators used by the verification sweeps.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Relative symmetry tolerance applied when a matrix is built from raw entries.
const SYMMETRY_TOL: f64 = 1e-12;

/// Tolerance used by [`minkowski_det_check`].
pub const MINKOWSKI_SLACK: f64 = 1e-10;

/// Smallest coordinate a sampled simplex point may have before it is redrawn.
pub const SIMPLEX_FLOOR: f64 = 1e-3;

const SIMPLEX_MAX_ATTEMPTS: usize = 1000;

/// Deterministic per-trial random stream: the same `(seed, stream)` pair always
/// yields the same sequence, independently of any other stream.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A real symmetric `dim × dim` matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<MatrixRepr> for SymMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        if repr.rows.len() != repr.dim {
            return Err(Error::DimensionMismatch {
                expected: repr.dim,
                found: repr.rows.len(),
            });
        }
        SymMatrix::from_rows(&repr.rows)
    }
}

impl From<SymMatrix> for MatrixRepr {
    fn from(m: SymMatrix) -> Self {
        MatrixRepr {
            dim: m.dim,
            rows: m.rows(),
        }
    }
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, validating symmetry and then
    /// averaging the off-diagonal pairs so the stored matrix is exactly symmetric.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(domain("matrix dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("matrix entry {bad} is not finite")));
        }
        let norm = (0..dim)
            .map(|i| {
                data[i * dim..(i + 1) * dim]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let tol = SYMMETRY_TOL * norm.max(1.0);
        let mut m = SymMatrix { dim, data };
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (m.get(i, j), m.get(j, i));
                let gap = (a - b).abs();
                if gap > tol {
                    return Err(Error::NotSymmetric { i, j, gap });
                }
                let avg = 0.5 * (a + b);
                m.data[i * dim + j] = avg;
                m.data[j * dim + i] = avg;
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, v) in values.iter().enumerate() {
            m.data[i * dim + i] = *v;
        }
        m
    }

    /// 1×1 matrix holding `v`.
    pub fn scalar(v: f64) -> Self {
        Self::diag(&[v])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    fn check_same_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.check_same_dim(other)?;
        Ok(SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.check_same_dim(other)?;
        Ok(SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `Qᵀ M Q` for a square `q` of matching dimension.
    pub fn congruence(&self, q: &DMatrix<f64>) -> Result<SymMatrix> {
        if q.nrows() != self.dim || q.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: q.nrows(),
            });
        }
        let out = q.transpose() * self.to_dmatrix() * q;
        Ok(Self::symmetrized(&out))
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Takes the symmetric part of a square dense matrix.
    pub fn symmetrized(m: &DMatrix<f64>) -> SymMatrix {
        let dim = m.nrows();
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = 0.5 * (m[(i, j)] + m[(j, i)]);
            }
        }
        SymMatrix { dim, data }
    }

    /// Lower Cholesky factor (row-major). Fails with the index of the first
    /// non-positive pivot.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d.is_nan() || d <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(l)
    }

    pub fn is_pd(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// Positive semidefinite certification: Cholesky of `M + εI` with
    /// `ε = 1e-12 · trace(M) / m`.
    pub fn certify_psd(&self) -> Result<()> {
        let trace = self.trace();
        if trace < 0.0 {
            return Err(Error::NotPositiveSemidefinite(format!(
                "negative trace {trace}"
            )));
        }
        let jitter = 1e-12 * trace / self.dim as f64;
        let mut shifted = self.clone();
        for i in 0..self.dim {
            shifted.data[i * self.dim + i] += jitter;
        }
        if jitter == 0.0 {
            // trace zero: PSD only if every entry vanishes
            return if self.data.iter().all(|v| *v == 0.0) {
                Ok(())
            } else {
                Err(Error::NotPositiveSemidefinite(
                    "zero trace with nonzero entries".into(),
                ))
            };
        }
        shifted.cholesky().map(|_| ()).map_err(|e| match e {
            Error::NotPositiveDefinite { pivot } => Error::NotPositiveSemidefinite(format!(
                "Cholesky with jitter {jitter:e} failed at pivot {pivot}"
            )),
            other => other,
        })
    }

    pub fn is_psd(&self) -> bool {
        self.certify_psd().is_ok()
    }

    /// Log-determinant of a positive definite matrix.
    pub fn logdet_pd(&self) -> Result<f64> {
        logdet_pd(self)
    }

    /// Determinant of a positive semidefinite matrix, `0` when numerically
    /// rank deficient.
    pub fn det_psd(&self) -> f64 {
        self.logdet_psd().exp()
    }

    /// Log-determinant of a positive semidefinite matrix from its eigenvalues.
    /// Eigenvalues at or below `m · ε · λ_max` count as zero and give `-∞`;
    /// a rounding-level Cholesky pivot would otherwise pass for a tiny but
    /// nonzero determinant.
    pub fn logdet_psd(&self) -> f64 {
        let ev = self.eigenvalues();
        let max = ev.last().copied().unwrap_or(0.0);
        let cutoff = self.dim as f64 * f64::EPSILON * max;
        if max <= 0.0 || ev[0] <= cutoff {
            return f64::NEG_INFINITY;
        }
        ev.iter().map(|l| l.ln()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_dmatrix())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// ln|M| = 2 Σ ln L_ii from the Cholesky factor of a positive definite `M`.
pub fn logdet_pd(m: &SymMatrix) -> Result<f64> {
    let l = m.cholesky()?;
    let n = m.dim;
    Ok(2.0 * (0..n).map(|i| l[i * n + i].ln()).sum::<f64>())
}

/// Both sides of the Minkowski determinant inequality for PSD `a`, `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinkowskiCheck {
    /// |A + B|^(1/m)
    pub lhs: f64,
    /// |A|^(1/m) + |B|^(1/m)
    pub rhs: f64,
    pub holds: bool,
}

pub fn minkowski_det_check(a: &SymMatrix, b: &SymMatrix) -> Result<MinkowskiCheck> {
    let sum = a.add(b)?;
    a.certify_psd()?;
    b.certify_psd()?;
    let inv_m = 1.0 / a.dim() as f64;
    let root = |m: &SymMatrix| m.det_psd().powf(inv_m);
    let lhs = root(&sum);
    let rhs = root(a) + root(b);
    Ok(MinkowskiCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - MINKOWSKI_SLACK,
    })
}

/// Accepted JSON spellings of a matrix: `{"dim", "rows"}`, a bare number
/// (1×1), a list of rows, or a flat row-major list of square length.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MatrixInput {
    Object(SymMatrix),
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl TryFrom<MatrixInput> for SymMatrix {
    type Error = Error;

    fn try_from(input: MatrixInput) -> Result<Self> {
        match input {
            MatrixInput::Object(m) => Ok(m),
            MatrixInput::Scalar(v) => SymMatrix::from_row_major(1, vec![v]),
            MatrixInput::Rows(rows) => SymMatrix::from_rows(&rows),
            MatrixInput::Flat(data) => {
                let dim = (data.len() as f64).sqrt().round() as usize;
                SymMatrix::from_row_major(dim, data)
            }
        }
    }
}

/// Interior point of the unit simplex: `r` explicit coordinates plus the
/// implicit last coordinate `1 - Σu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint {
    u: Vec<f64>,
    last: f64,
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;

    fn try_from(u: Vec<f64>) -> Result<Self> {
        SimplexPoint::new(u)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Self {
        p.u
    }
}

impl SimplexPoint {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if u.is_empty() {
            return Err(domain("simplex point needs at least one coordinate"));
        }
        if let Some(bad) = u.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(domain(format!("simplex coordinate {bad} is not positive")));
        }
        let last = 1.0 - u.iter().sum::<f64>();
        if last.is_nan() || last <= 0.0 {
            return Err(domain(format!(
                "simplex coordinates must sum to less than 1 (implicit last coordinate {last})"
            )));
        }
        Ok(SimplexPoint { u, last })
    }

    /// Number of explicit coordinates.
    pub fn r(&self) -> usize {
        self.u.len()
    }

    pub fn explicit(&self) -> &[f64] {
        &self.u
    }

    pub fn last(&self) -> f64 {
        self.last
    }

    /// All `r + 1` coordinates, the implicit one last.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.u.clone();
        c.push(self.last);
        c
    }

    pub fn min_coord(&self) -> f64 {
        self.u.iter().copied().fold(self.last, f64::min)
    }
}

/// Uniform draw from the interior of the `r`-simplex with every one of the
/// `r + 1` coordinates at least [`SIMPLEX_FLOOR`].
///
/// After 1000 rejected draws the floor is halved and a warning is logged.
pub fn sample_simplex_interior<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Result<SimplexPoint> {
    if r == 0 {
        return Err(domain("simplex dimension r must be at least 1"));
    }
    let mut floor = SIMPLEX_FLOOR;
    loop {
        for _ in 0..SIMPLEX_MAX_ATTEMPTS {
            let draws: Vec<f64> = (0..=r).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = draws.iter().sum();
            let u: Vec<f64> = draws[..r].iter().map(|e| e / total).collect();
            let last = 1.0 - u.iter().sum::<f64>();
            if u.iter().all(|v| *v >= floor) && last >= floor {
                return SimplexPoint::new(u);
            }
        }
        floor *= 0.5;
        log::warn!("simplex sampler (r = {r}) widened its floor to {floor:e}");
    }
}

/// Matrices `M_1..M_r` together with `M_{r+1} = I - Σ M_i`, all PSD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<MatrixInput>", into = "Vec<SymMatrix>")]
pub struct MatrixPartition {
    dim: usize,
    parts: Vec<SymMatrix>,
    complement: SymMatrix,
}

impl TryFrom<Vec<MatrixInput>> for MatrixPartition {
    type Error = Error;

    fn try_from(parts: Vec<MatrixInput>) -> Result<Self> {
        let parts = parts
            .into_iter()
            .map(SymMatrix::try_from)
            .collect::<Result<Vec<_>>>()?;
        MatrixPartition::from_parts(parts)
    }
}

impl From<MatrixPartition> for Vec<SymMatrix> {
    fn from(p: MatrixPartition) -> Self {
        p.parts
    }
}

impl MatrixPartition {
    /// Derives the complement `I - Σ parts` and certifies every matrix PSD.
    pub fn from_parts(parts: Vec<SymMatrix>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| domain("a partition needs at least one part"))?;
        let dim = first.dim();
        let mut complement = SymMatrix::identity(dim);
        for (i, p) in parts.iter().enumerate() {
            complement = complement.sub(p)?;
            p.certify_psd()
                .map_err(|e| Error::NotPositiveSemidefinite(format!("part {}: {e}", i + 1)))?;
        }
        complement
            .certify_psd()
            .map_err(|e| Error::NotPositiveSemidefinite(format!("complement I - ΣM_i: {e}")))?;
        Ok(MatrixPartition {
            dim,
            parts,
            complement,
        })
    }

    /// Scalar (m = 1) partition from the explicit simplex coordinates.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Self::from_parts(p.iter().map(|v| SymMatrix::scalar(*v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of explicit parts `r`.
    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[SymMatrix] {
        &self.parts
    }

    pub fn complement(&self) -> &SymMatrix {
        &self.complement
    }

    /// All `r + 1` matrices, the complement last.
    pub fn all(&self) -> impl Iterator<Item = &SymMatrix> {
        self.parts.iter().chain(std::iter::once(&self.complement))
    }

    /// Applies `Qᵀ · Q` to every part; the complement is re-derived.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> Result<Self> {
        let parts = self
            .parts
            .iter()
            .map(|p| p.congruence(q))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(parts)
    }
}

fn random_pd<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(m, m, |_, _| rng.sample(StandardNormal));
    &g * g.transpose() + DMatrix::<f64>::identity(m, m) * 0.1
}

/// Random partition of `I_m` into `r + 1` positive definite parts.
///
/// Draws `A_i = G Gᵀ + 0.1 I`, then maps each through `S^{-1/2} A_i S^{-1/2}`
/// with `S = Σ A_i`. The complement is recomputed as `I - Σ M_i` so the stored
/// parts sum to the identity exactly.
pub fn sample_partition<R: Rng + ?Sized>(
    m: usize,
    r: usize,
    rng: &mut R,
) -> Result<MatrixPartition> {
    if m == 0 || r == 0 {
        return Err(domain("sample_partition needs m >= 1 and r >= 1"));
    }
    let draws: Vec<DMatrix<f64>> = (0..=r).map(|_| random_pd(m, rng)).collect();
    let total = draws
        .iter()
        .fold(DMatrix::<f64>::zeros(m, m), |acc, a| acc + a);
    let eig = SymmetricEigen::new(total);
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let s_inv_half =
        &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let parts = draws[..r]
        .iter()
        .map(|a| SymMatrix::symmetrized(&(&s_inv_half * a * &s_inv_half)))
        .collect();
    MatrixPartition::from_parts(parts)
}
