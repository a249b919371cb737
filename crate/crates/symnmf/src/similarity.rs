//! Experiment matrix builders: random low-rank symmetric matrices, cosine
//! and Gaussian-kernel similarity matrices, and synthetic 2-D point sets.

use crate::error::{Error, Result};
use crate::matrix::{matmul, DenseMatrix};
use crate::rng::PortableUniform;
use crate::scalar::Scalar;

/// Label assigned to uniform background noise points.
pub const NOISE_LABEL: u32 = u32::MAX;

/// 2-D point cloud with optional cluster labels.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub points: Vec<[f64; 2]>,
    pub labels: Option<Vec<u32>>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Kernel scale selection.
#[derive(Debug, Clone, Copy)]
pub enum KernelConfig {
    /// Mean distance to the 7th nearest neighbor.
    Knn7,
    /// `sqrt(2)/10` times the point-set diameter.
    Diameter,
    Explicit(f64),
}

impl KernelConfig {
    pub fn resolve(&self, points: &PointSet) -> Result<f64> {
        let sigma = match self {
            Self::Knn7 => sigma_knn7(points)?,
            Self::Diameter => sigma_diameter(points)?,
            Self::Explicit(v) => *v,
        };
        if sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kernel scale sigma={sigma} must be positive"
            )));
        }
        Ok(sigma)
    }
}

/// `A = V V^T` with `V` n-by-p uniform in [0,1]; symmetric, nonnegative,
/// positive semidefinite, rank at most p.
pub fn random_lowrank<T: Scalar>(n: usize, p: usize, seed: u64) -> Result<DenseMatrix<T>> {
    let v = random_lowrank_factor(n, p, seed)?;
    let mut a = matmul(&v, &v.transpose())?;
    // force bitwise symmetry
    for j in 0..n {
        for i in 0..j {
            let x = a.get(i, j);
            a.set(j, i, x);
        }
    }
    Ok(a)
}

/// The factor `V` behind [`random_lowrank`]: `n x p` with entries uniform
/// on [0,1). Exposed so callers can reason about the generated instance
/// (e.g. compute the spectrum of `A = V V^T` from the small Gram `V^T V`).
pub fn random_lowrank_factor<T: Scalar>(n: usize, p: usize, seed: u64) -> Result<DenseMatrix<T>> {
    if p == 0 || p > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= p <= n, got p={p}, n={n}"
        )));
    }
    let mut rng = PortableUniform::new(seed);
    Ok(DenseMatrix::from_fn(n, p, |_, _| rng.next_scalar::<T>()))
}

/// Cosine similarity of the columns of `M`: `a_ij = m_i.m_j/(|m_i||m_j|)`
/// off-diagonal, zero diagonal.
pub fn cosine_similarity<T: Scalar>(m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = m.cols();
    let norms: Vec<T> = (0..n)
        .map(|j| m.col(j).iter().map(|&v| v * v).sum::<T>().sqrt())
        .collect();
    if let Some(j) = norms.iter().position(|&v| v == T::zero()) {
        return Err(Error::ZeroColumn(j));
    }
    let gram = matmul(&m.transpose(), m)?;
    let mut a = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let v = gram.get(i, j) / (norms[i] * norms[j]);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    Ok(a)
}

/// Gaussian kernel weights `e_ij = exp(-|m_i - m_j|^2 / sigma^2)`,
/// zero diagonal.
pub fn gaussian_kernel(points: &PointSet, sigma: f64) -> Result<DenseMatrix<f64>> {
    if sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma={sigma} must be positive"
        )));
    }
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let s2 = sigma * sigma;
    let mut e = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let dx = points.points[i][0] - points.points[j][0];
            let dy = points.points[i][1] - points.points[j][1];
            let v = (-(dx * dx + dy * dy) / s2).exp();
            e.set(i, j, v);
            e.set(j, i, v);
        }
    }
    Ok(e)
}

/// Normalized-cut weighting `a_ij = e_ij / sqrt(d_i d_j)` with `d_i` the row
/// sums of the kernel matrix.
pub fn normalized_cut<T: Scalar>(e: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = e.rows();
    if e.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "normalized_cut input must be square",
            expected: (n, n),
            found: (e.rows(), e.cols()),
        });
    }
    let mut inv_sqrt_d = vec![T::zero(); n];
    for i in 0..n {
        let mut d = T::zero();
        for r in 0..n {
            d += e.get(i, r);
        }
        if d <= T::zero() {
            return Err(Error::IsolatedPoint(i));
        }
        inv_sqrt_d[i] = T::one() / d.sqrt();
    }
    let mut a = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v = e.get(i, j) * inv_sqrt_d[i] * inv_sqrt_d[j];
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    Ok(a)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Global kernel scale: mean over i of the distance from point i to its 7th
/// nearest other point.
pub fn sigma_knn7(points: &PointSet) -> Result<f64> {
    let n = points.len();
    if n < 8 {
        return Err(Error::TooFewPoints { needed: 8, got: n });
    }
    let mut total = 0.0;
    let mut d = Vec::with_capacity(n - 1);
    for i in 0..n {
        d.clear();
        for j in 0..n {
            if i != j {
                d.push(dist(points.points[i], points.points[j]));
            }
        }
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        total += d[6];
    }
    Ok(total / n as f64)
}

/// Global kernel scale: `sqrt(2)/10 * max_{i,j} |m_i - m_j|`.
pub fn sigma_diameter(points: &PointSet) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut dmax = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            dmax = dmax.max(dist(points.points[i], points.points[j]));
        }
    }
    Ok(2.0_f64.sqrt() / 10.0 * dmax)
}

/// The four synthetic point-set families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Five equal-variance clusters plus 5% uniform noise.
    Wsn,
    /// Three clusters, two of them split into subclusters.
    Sc,
    /// Three clusters with dispersions in ratio 1:2:4.
    Sk,
    /// Clusters with cardinalities in ratio 8:4:2:1.
    Dd,
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wsn" => Ok(Self::Wsn),
            "sc" => Ok(Self::Sc),
            "sk" => Ok(Self::Sk),
            "dd" => Ok(Self::Dd),
            other => Err(Error::InvalidParameter(format!(
                "unknown synthetic dataset kind '{other}'"
            ))),
        }
    }
}

/// Splits `n` into `parts` blob sizes differing by at most one.
fn even_split(n: usize, parts: usize) -> Vec<usize> {
    let base = n / parts;
    let rem = n % parts;
    (0..parts).map(|i| base + usize::from(i < rem)).collect()
}

fn push_blob(
    rng: &mut PortableUniform,
    out: &mut PointSet,
    center: [f64; 2],
    sd: f64,
    count: usize,
    label: u32,
) {
    let labels = out.labels.as_mut().expect("synthetic sets carry labels");
    for _ in 0..count {
        let x = center[0] + sd * rng.next_normal();
        let y = center[1] + sd * rng.next_normal();
        out.points.push([x, y]);
        labels.push(label);
    }
}

/// Generates one of the synthetic 2-D datasets; deterministic per seed.
pub fn gen_synthetic(kind: SyntheticKind, n: usize, seed: u64) -> Result<PointSet> {
    if n < 100 {
        return Err(Error::InvalidParameter(format!(
            "synthetic datasets need n >= 100, got {n}"
        )));
    }
    let mut rng = PortableUniform::new(seed);
    let mut set = PointSet {
        points: Vec::with_capacity(n),
        labels: Some(Vec::with_capacity(n)),
    };
    match kind {
        SyntheticKind::Wsn => {
            // centers separated by well over 4 standard deviations
            let centers = [
                [0.2, 0.2],
                [0.8, 0.2],
                [0.5, 0.5],
                [0.2, 0.8],
                [0.8, 0.8],
            ];
            let noise = n / 20; // 5%
            let sizes = even_split(n - noise, 5);
            for (c, (&count, center)) in sizes.iter().zip(centers).enumerate() {
                push_blob(&mut rng, &mut set, center, 0.04, count, c as u32);
            }
            let labels = set.labels.as_mut().unwrap();
            for _ in 0..noise {
                set.points.push([rng.next_f64(), rng.next_f64()]);
                labels.push(NOISE_LABEL);
            }
        }
        SyntheticKind::Sc => {
            let sizes = even_split(n, 3);
            // one plain cluster, two made of a pair of subclusters each
            push_blob(&mut rng, &mut set, [0.2, 0.75], 0.05, sizes[0], 0);
            let halves1 = even_split(sizes[1], 2);
            push_blob(&mut rng, &mut set, [0.68, 0.78], 0.035, halves1[0], 1);
            push_blob(&mut rng, &mut set, [0.82, 0.72], 0.035, halves1[1], 1);
            let halves2 = even_split(sizes[2], 2);
            push_blob(&mut rng, &mut set, [0.42, 0.22], 0.035, halves2[0], 2);
            push_blob(&mut rng, &mut set, [0.56, 0.28], 0.035, halves2[1], 2);
        }
        SyntheticKind::Sk => {
            let sizes = even_split(n, 3);
            let spec = [([0.2, 0.2], 0.02), ([0.5, 0.8], 0.04), ([0.85, 0.3], 0.08)];
            for (c, (&count, &(center, sd))) in sizes.iter().zip(&spec).enumerate() {
                push_blob(&mut rng, &mut set, center, sd, count, c as u32);
            }
        }
        SyntheticKind::Dd => {
            let unit = n / 15;
            let mut sizes = [8 * unit, 4 * unit, 2 * unit, unit];
            sizes[0] += n - sizes.iter().sum::<usize>(); // remainder to the largest
            let centers = [[0.3, 0.3], [0.75, 0.7], [0.2, 0.85], [0.85, 0.15]];
            for (c, (&count, center)) in sizes.iter().zip(centers).enumerate() {
                push_blob(&mut rng, &mut set, center, 0.05, count, c as u32);
            }
        }
    }
    Ok(set)
}

/// Full Class 2/3 pipeline: Gaussian kernel with the chosen scale followed by
/// the normalized cut.
pub fn kernel_similarity(points: &PointSet, cfg: KernelConfig) -> Result<DenseMatrix<f64>> {
    let sigma = cfg.resolve(points)?;
    let e = gaussian_kernel(points, sigma)?;
    normalized_cut(&e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chol::Cholesky;
    use crate::test_util::{rand_matrix, Rng64};

    #[test]
    fn lowrank_is_symmetric_psd() {
        let a: DenseMatrix<f64> = random_lowrank(12, 3, 5).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(a.get(i, j), a.get(j, i));
                assert!(a.get(i, j) >= 0.0);
            }
        }
        // PSD probe: Cholesky succeeds after a small diagonal shift
        let shifted = DenseMatrix::from_fn(12, 12, |i, j| {
            a.get(i, j) + if i == j { 1e-8 } else { 0.0 }
        });
        assert!(Cholesky::factor_full(&shifted).is_ok());

        let one: DenseMatrix<f64> = random_lowrank(1, 1, 9).unwrap();
        assert!(one.get(0, 0) >= 0.0);
    }

    #[test]
    fn cosine_examples() {
        let m: DenseMatrix<f64> = DenseMatrix::from_rows(&[&[1.0, 1.0], &[2.0, 2.0]]).unwrap();
        let a = cosine_similarity(&m).unwrap();
        assert!((a.get(0, 1) - 1.0).abs() < 1e-15);
        assert_eq!(a.get(0, 0), 0.0);

        let m = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let a = cosine_similarity(&m).unwrap();
        assert_eq!(a.get(0, 1), 0.0);

        let mut rng = Rng64::new(55);
        let m: DenseMatrix<f64> = rand_matrix(&mut rng, 5, 4);
        let a = cosine_similarity(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    assert_eq!(a.get(i, i), 0.0);
                    continue;
                }
                let mut dot = 0.0;
                let mut ni = 0.0;
                let mut nj = 0.0;
                for r in 0..5 {
                    dot += m.get(r, i) * m.get(r, j);
                    ni += m.get(r, i) * m.get(r, i);
                    nj += m.get(r, j) * m.get(r, j);
                }
                let expect = dot / (ni.sqrt() * nj.sqrt());
                assert!((a.get(i, j) - expect).abs() <= 1e-12);
                assert!((0.0..=1.0 + 1e-15).contains(&a.get(i, j)));
            }
        }

        let zero_col = DenseMatrix::from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]).unwrap();
        assert!(matches!(
            cosine_similarity(&zero_col),
            Err(Error::ZeroColumn(1))
        ));
    }

    #[test]
    fn gaussian_kernel_examples() {
        let coincident = PointSet {
            points: vec![[0.5, 0.5]; 3],
            labels: None,
        };
        let e = gaussian_kernel(&coincident, 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(e.get(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }

        let two = PointSet {
            points: vec![[0.0, 0.0], [3.0, 0.0]],
            labels: None,
        };
        let e = gaussian_kernel(&two, 3.0).unwrap();
        assert!((e.get(0, 1) - (-1.0_f64).exp()).abs() < 1e-15);

        assert!(gaussian_kernel(&two, 0.0).is_err());
    }

    #[test]
    fn gaussian_kernel_isometry_invariant() {
        let mut rng = Rng64::new(77);
        let pts: Vec<[f64; 2]> = (0..10).map(|_| [rng.uniform(), rng.uniform()]).collect();
        let set = PointSet {
            points: pts.clone(),
            labels: None,
        };
        let (c, s) = (0.6_f64.cos(), 0.6_f64.sin());
        let moved = PointSet {
            points: pts
                .iter()
                .map(|p| [c * p[0] - s * p[1] + 3.0, s * p[0] + c * p[1] - 1.5])
                .collect(),
            labels: None,
        };
        let e1 = gaussian_kernel(&set, 0.3).unwrap();
        let e2 = gaussian_kernel(&moved, 0.3).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                assert!((e1.get(i, j) - e2.get(i, j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn normalized_cut_examples() {
        let e = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let a = normalized_cut(&e).unwrap();
        assert_eq!(a, e);

        let e4: DenseMatrix<f64> = DenseMatrix::from_rows(&[&[0.0, 4.0], &[4.0, 0.0]]).unwrap();
        let a4 = normalized_cut(&e4).unwrap();
        assert!((a4.get(0, 1) - 1.0).abs() < 1e-15);

        // scale invariance
        let mut rng = Rng64::new(91);
        let raw: DenseMatrix<f64> = rand_matrix(&mut rng, 6, 6);
        let e = DenseMatrix::from_fn(6, 6, |i, j| {
            if i == j {
                0.0
            } else {
                raw.get(i.min(j), i.max(j)) + 0.1
            }
        });
        let a = normalized_cut(&e).unwrap();
        let a_scaled = normalized_cut(&e.scale(3.7)).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((a.get(i, j) - a_scaled.get(i, j)).abs() <= 1e-12);
                assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
        assert_eq!(a.get(2, 2), 0.0);

        let isolated = DenseMatrix::from_rows(&[&[0.0, 0.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            normalized_cut(&isolated),
            Err(Error::IsolatedPoint(0))
        ));
    }

    #[test]
    fn knn7_collinear_hand_case() {
        // 8 equally spaced collinear points, spacing 1: 7th-NN distances are
        // (7,6,5,4,4,5,6,7), mean 5.5
        let set = PointSet {
            points: (0..8).map(|i| [i as f64, 0.0]).collect(),
            labels: None,
        };
        assert!((sigma_knn7(&set).unwrap() - 5.5).abs() < 1e-14);

        let few = PointSet {
            points: vec![[0.0, 0.0]; 7],
            labels: None,
        };
        assert!(sigma_knn7(&few).is_err());

        let coincident = PointSet {
            points: vec![[1.0, 1.0]; 9],
            labels: None,
        };
        assert_eq!(sigma_knn7(&coincident).unwrap(), 0.0);
        assert!(KernelConfig::Knn7.resolve(&coincident).is_err());

        // permutation invariance
        let mut rng = Rng64::new(95);
        let pts: Vec<[f64; 2]> = (0..12).map(|_| [rng.uniform(), rng.uniform()]).collect();
        let fwd = PointSet {
            points: pts.clone(),
            labels: None,
        };
        let rev = PointSet {
            points: pts.iter().rev().cloned().collect(),
            labels: None,
        };
        assert!((sigma_knn7(&fwd).unwrap() - sigma_knn7(&rev).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn diameter_sigma() {
        let two = PointSet {
            points: vec![[0.0, 0.0], [10.0, 0.0]],
            labels: None,
        };
        assert!((sigma_diameter(&two).unwrap() - 2.0_f64.sqrt()).abs() < 1e-14);

        let mut rng = Rng64::new(99);
        let pts: Vec<[f64; 2]> = (0..20).map(|_| [rng.uniform(), rng.uniform()]).collect();
        let set = PointSet {
            points: pts.clone(),
            labels: None,
        };
        let shifted = PointSet {
            points: pts.iter().map(|p| [p[0] + 4.0, p[1] - 2.0]).collect(),
            labels: None,
        };
        let s1 = sigma_diameter(&set).unwrap();
        assert!((s1 - sigma_diameter(&shifted).unwrap()).abs() < 1e-12);
        // brute-force max pairwise distance oracle
        let mut dmax = 0.0_f64;
        for i in 0..20 {
            for j in 0..20 {
                dmax = dmax.max(dist(pts[i], pts[j]));
            }
        }
        assert!((s1 - 2.0_f64.sqrt() / 10.0 * dmax).abs() < 1e-14);

        let one = PointSet {
            points: vec![[0.0, 0.0]],
            labels: None,
        };
        assert!(sigma_diameter(&one).is_err());
    }

    #[test]
    fn synthetic_generators() {
        let wsn = gen_synthetic(SyntheticKind::Wsn, 1000, 3).unwrap();
        assert_eq!(wsn.len(), 1000);
        let noise = wsn
            .labels
            .as_ref()
            .unwrap()
            .iter()
            .filter(|&&l| l == NOISE_LABEL)
            .count();
        assert_eq!(noise, 50);

        let again = gen_synthetic(SyntheticKind::Wsn, 1000, 3).unwrap();
        assert_eq!(wsn.points, again.points);

        let dd = gen_synthetic(SyntheticKind::Dd, 1500, 1).unwrap();
        let labels = dd.labels.as_ref().unwrap();
        let count = |l: u32| labels.iter().filter(|&&x| x == l).count();
        assert_eq!(
            (count(0), count(1), count(2), count(3)),
            (800, 400, 200, 100)
        );

        let sc = gen_synthetic(SyntheticKind::Sc, 300, 5).unwrap();
        assert_eq!(sc.len(), 300);
        assert!(gen_synthetic(SyntheticKind::Sk, 50, 0).is_err());
        assert!("xx".parse::<SyntheticKind>().is_err());
    }

    #[test]
    fn kernel_similarity_pipeline_properties() {
        let set = gen_synthetic(SyntheticKind::Sk, 120, 11).unwrap();
        let a = kernel_similarity(&set, KernelConfig::Diameter).unwrap();
        for i in 0..120 {
            assert_eq!(a.get(i, i), 0.0);
            for j in 0..120 {
                assert_eq!(a.get(i, j), a.get(j, i));
                assert!((0.0..=1.0).contains(&a.get(i, j)));
            }
        }
    }
}
