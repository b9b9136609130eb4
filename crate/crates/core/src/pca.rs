//! Principal component analysis through the eigendecomposition of the sample
//! covariance (or correlation) matrix, computed with cyclic Jacobi rotations.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::matrix::{dot, mean, Matrix};
use crate::stats::ScalingParams;

/// Jacobi stops once the off-diagonal Frobenius norm falls below this fraction of the input norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Largest asymmetry |s_ij - s_ji| accepted, relative to max(1, max |s_ij|).
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Whether columns are rescaled to unit variance before the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PcaScaling {
    /// Centered only; decomposes the covariance matrix.
    #[default]
    Covariance,
    /// Centered and scaled; decomposes the correlation matrix.
    Correlation,
}

/// Sample covariance (n - 1 denominator) of the columns of `x`.
pub fn covariance_matrix(x: &DesignMatrix) -> Result<Matrix> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::Input(format!("covariance needs at least 2 rows, got {n}")));
    }
    x.ensure_finite()?;
    let mut cols = x.values().columns();
    for c in cols.iter_mut() {
        let m = mean(c);
        c.iter_mut().for_each(|v| *v -= m);
    }
    let p = cols.len();
    let denom = (n - 1) as f64;
    let mut cov = Matrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v = dot(&cols[i], &cols[j]) / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: Matrix,
    pub sweeps: usize,
}

fn rotate(a: &mut [f64], i: usize, j: usize, s: f64, tau: f64) {
    let g = a[i];
    let h = a[j];
    a[i] = g - s * (h + g * tau);
    a[j] = h + s * (g - h * tau);
}

/// Eigendecomposition by cyclic Jacobi rotations.
///
/// Rotations sweep the upper triangle row by row until the off-diagonal
/// Frobenius norm is below `JACOBI_TOLERANCE` times the norm of `s`.
/// Eigenvalues come back sorted descending (stable, so exact ties keep
/// rotation order) and each eigenvector is signed so its largest-magnitude
/// entry is positive.
pub fn symmetric_eigen(s: &Matrix) -> Result<SymmetricEigen> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::Input(format!("eigendecomposition needs a square matrix, got {}x{}", n, s.cols())));
    }
    if !s.is_finite() {
        return Err(Error::Input("matrix contains non-finite values".into()));
    }
    let max_abs = s.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (s[(i, j)] - s[(j, i)]).abs() > SYMMETRY_TOLERANCE * max_abs.max(1.0) {
                return Err(Error::Input(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    s[(i, j)],
                    s[(j, i)]
                )));
            }
        }
    }

    let mut a: Vec<f64> = s.as_slice().to_vec();
    let mut v = Matrix::identity(n);
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];
    let target = JACOBI_TOLERANCE * s.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let mut off_sq = 0.0;
        let mut off_abs = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += a[p * n + q] * a[p * n + q];
                off_abs += a[p * n + q].abs();
            }
        }
        if (2.0 * off_sq).sqrt() <= target {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NotConverged(format!("Jacobi eigensolver after {sweeps} sweeps")));
        }
        sweeps += 1;
        // early sweeps only rotate the larger elements
        let thresh = if sweeps < 4 { 0.2 * off_abs / (n * n) as f64 } else { 0.0 };
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = 100.0 * apq.abs();
                if sweeps > 4 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a[p * n + q] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh || apq == 0.0 {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                let tau = sn / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                a[p * n + q] = 0.0;
                for j in 0..p {
                    rotate(&mut a, j * n + p, j * n + q, sn, tau);
                }
                for j in (p + 1)..q {
                    rotate(&mut a, p * n + j, j * n + q, sn, tau);
                }
                for j in (q + 1)..n {
                    rotate(&mut a, p * n + j, q * n + j, sn, tau);
                }
                for j in 0..n {
                    let row = v.row_mut(j);
                    let (g, h) = (row[p], row[q]);
                    row[p] = g - sn * (h + g * tau);
                    row[q] = h + sn * (g - h * tau);
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = v.column(src);
        let lead = col
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > col[best].abs() { i } else { best });
        let sign = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        for (i, x) in col.iter().enumerate() {
            vectors[(i, dst)] = sign * x;
        }
    }
    Ok(SymmetricEigen {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors,
        sweeps,
    })
}

/// A fitted projection onto the leading principal directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaBasis {
    pub feature_labels: Vec<String>,
    pub center: Vec<f64>,
    /// Per-column divisors when fitted in correlation mode.
    pub scale: Option<Vec<f64>>,
    /// Full spectrum, descending, negatives from roundoff clamped to zero.
    pub eigenvalues: Vec<f64>,
    /// p x k, orthonormal columns.
    pub components: Matrix,
    pub k: usize,
}

#[derive(Serialize)]
struct PcaBasisJson<'a> {
    center: &'a [f64],
    scale: Option<&'a [f64]>,
    eigenvalues: &'a [f64],
    components: Vec<&'a [f64]>,
    k: usize,
}

impl PcaBasis {
    pub fn scaling(&self) -> PcaScaling {
        if self.scale.is_some() {
            PcaScaling::Correlation
        } else {
            PcaScaling::Covariance
        }
    }

    /// The same basis keeping only the first `k` components.
    pub fn truncate(&self, k: usize) -> Result<PcaBasis> {
        if k == 0 || k > self.k {
            return Err(Error::Input(format!("cannot truncate a {}-component basis to {k}", self.k)));
        }
        Ok(PcaBasis {
            components: self.components.take_columns(k),
            k,
            ..self.clone()
        })
    }

    pub fn retained_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[..self.k]
    }

    pub fn to_json(&self) -> String {
        crate::report::to_json(&PcaBasisJson {
            center: &self.center,
            scale: self.scale.as_deref(),
            eigenvalues: &self.eigenvalues,
            components: (0..self.components.rows()).map(|i| self.components.row(i)).collect(),
            k: self.k,
        })
    }

    /// SHA-256 over the bit patterns of every fitted quantity.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.k as u64).to_le_bytes());
        let mut feed = |vals: &[f64]| {
            h.update((vals.len() as u64).to_le_bytes());
            for v in vals {
                h.update(v.to_bits().to_le_bytes());
            }
        };
        feed(&self.center);
        feed(self.scale.as_deref().unwrap_or(&[]));
        feed(&self.eigenvalues);
        feed(self.components.as_slice());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Top-`k` principal components of the covariance of `x`.
pub fn fit_pca(x: &DesignMatrix, k: usize) -> Result<PcaBasis> {
    fit_pca_with(x, k, PcaScaling::Covariance)
}

pub fn fit_pca_with(x: &DesignMatrix, k: usize, scaling: PcaScaling) -> Result<PcaBasis> {
    if k == 0 || k > x.cols() {
        return Err(Error::Input(format!(
            "component count {k} must lie in 1..={}",
            x.cols()
        )));
    }
    if x.rows() < 2 {
        return Err(Error::Input(format!("PCA needs at least 2 rows, got {}", x.rows())));
    }
    let (work, center, scale) = match scaling {
        PcaScaling::Covariance => {
            let center = (0..x.cols()).map(|j| mean(&x.column(j))).collect();
            (None, center, None)
        }
        PcaScaling::Correlation => {
            let params = ScalingParams::fit(x)?;
            (Some(params.apply(x)?), params.means, Some(params.std_devs))
        }
    };
    let cov = covariance_matrix(work.as_ref().unwrap_or(x))?;
    let eig = symmetric_eigen(&cov)?;
    Ok(PcaBasis {
        feature_labels: x.labels().to_vec(),
        center,
        scale,
        eigenvalues: eig.values.iter().map(|&l| l.max(0.0)).collect(),
        components: eig.vectors.take_columns(k),
        k,
    })
}

fn check_width(x: &DesignMatrix, basis: &PcaBasis) -> Result<()> {
    if x.cols() != basis.center.len() {
        return Err(Error::Input(format!(
            "basis expects {} columns, got {}",
            basis.center.len(),
            x.cols()
        )));
    }
    Ok(())
}

/// Scores `(x - center) / scale * components`, labeled `PC1..PCk`.
pub fn project(x: &DesignMatrix, basis: &PcaBasis) -> Result<DesignMatrix> {
    check_width(x, basis)?;
    let mut centered = x.values().clone();
    for i in 0..centered.rows() {
        for (j, v) in centered.row_mut(i).iter_mut().enumerate() {
            *v -= basis.center[j];
            if let Some(s) = &basis.scale {
                *v /= s[j];
            }
        }
    }
    let scores = centered.matmul(&basis.components)?;
    DesignMatrix::new(scores, (1..=basis.k).map(|i| format!("PC{i}")).collect())
}

/// Maps scores back to the original feature space.
pub fn reconstruct(scores: &DesignMatrix, basis: &PcaBasis) -> Result<DesignMatrix> {
    if scores.cols() != basis.k {
        return Err(Error::Input(format!("basis has {} components, scores have {}", basis.k, scores.cols())));
    }
    let mut x = scores.values().matmul(&basis.components.transpose())?;
    for i in 0..x.rows() {
        for (j, v) in x.row_mut(i).iter_mut().enumerate() {
            if let Some(s) = &basis.scale {
                *v *= s[j];
            }
            *v += basis.center[j];
        }
    }
    DesignMatrix::new(x, basis.feature_labels.clone())
}

/// Share of total variance carried by each retained component.
pub fn explained_variance_ratio(basis: &PcaBasis) -> Result<Vec<f64>> {
    let total: f64 = basis.eigenvalues.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateInput("total variance is zero".into()));
    }
    Ok(basis.retained_eigenvalues().iter().map(|l| l / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(rows: &[Vec<f64>]) -> DesignMatrix {
        DesignMatrix::unlabeled(Matrix::from_rows(rows).unwrap())
    }

    fn eigen_residual(s: &Matrix, e: &SymmetricEigen) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..e.values.len() {
            let v = e.vectors.column(k);
            let sv = s.mul_vec(&v).unwrap();
            for (a, b) in sv.iter().zip(&v) {
                worst = worst.max((a - e.values[k] * b).abs());
            }
        }
        worst
    }

    #[test]
    fn diagonal_matrix() {
        let s = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let e = symmetric_eigen(&s).unwrap();
        assert_eq!(e.values, vec![2.0, 1.0]);
        assert_eq!(e.vectors.column(0), vec![0.0, 1.0]);
        assert_eq!(e.vectors.column(1), vec![1.0, 0.0]);
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        // det([[2-l, 1], [1, 2-l]]) = (l - 3)(l - 1)
        let s = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigen(&s).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[(0, 0)] - h).abs() < 1e-14 && (e.vectors[(1, 0)] - h).abs() < 1e-14);
        assert!(eigen_residual(&s, &e) < 1e-12);
    }

    #[test]
    fn identity_is_isotropic() {
        let e = symmetric_eigen(&Matrix::identity(4)).unwrap();
        assert!(e.values.iter().all(|&l| l == 1.0));
        let vtv = e.vectors.transpose().matmul(&e.vectors).unwrap();
        assert!(vtv.max_abs_diff(&Matrix::identity(4)) < 1e-15);
    }

    #[test]
    fn asymmetric_and_nonsquare_rejected() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(symmetric_eigen(&s), Err(Error::Input(_))));
        assert!(symmetric_eigen(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn sign_convention_largest_entry_positive() {
        let s = Matrix::from_rows(&[vec![4.0, -2.0, 0.5], vec![-2.0, 3.0, 1.0], vec![0.5, 1.0, 1.0]]).unwrap();
        let e = symmetric_eigen(&s).unwrap();
        for k in 0..3 {
            let col = e.vectors.column(k);
            let lead = col.iter().cloned().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(lead > 0.0);
        }
        assert!(eigen_residual(&s, &e) < 1e-12);
    }

    #[test]
    fn covariance_examples() {
        let same = design(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![4.0, 4.0]]);
        let c = covariance_matrix(&same).unwrap();
        assert!(c.as_slice().iter().all(|&v| (v - c[(0, 0)]).abs() < 1e-15));

        // columns [1, -1, 1, -1] and [1, 1, -1, -1] are orthogonal and centered
        let x = design(&[vec![1.0, 1.0], vec![-1.0, 1.0], vec![1.0, -1.0], vec![-1.0, -1.0]]);
        let c = covariance_matrix(&x).unwrap();
        assert_eq!(c.as_slice(), &[4.0 / 3.0, 0.0, 0.0, 4.0 / 3.0]);

        let x = design(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![4.0, 5.0]]);
        let c = covariance_matrix(&x).unwrap();
        assert_eq!((c[(0, 1)], c[(1, 0)], c[(1, 1)]), (0.0, 0.0, 0.0));

        assert!(covariance_matrix(&design(&[vec![1.0, 2.0]])).is_err());
    }

    #[test]
    fn rank_one_data() {
        let x = design(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![-3.0, -3.0], vec![0.5, 0.5]]);
        let basis = fit_pca(&x, 1).unwrap();
        let r = explained_variance_ratio(&basis).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diag_covariance_ratio() {
        // covariance diag(2, 1): columns sqrt(2)*[1,-1,1,-1]*c and [1,1,-1,-1]*c with c^2 = 3/4
        let c = (0.75f64).sqrt();
        let a = 2f64.sqrt() * c;
        let x = design(&[vec![a, c], vec![-a, c], vec![a, -c], vec![-a, -c]]);
        let cov = covariance_matrix(&x).unwrap();
        assert!((cov[(0, 0)] - 2.0).abs() < 1e-14 && (cov[(1, 1)] - 1.0).abs() < 1e-14);
        let basis = fit_pca(&x, 1).unwrap();
        let r = explained_variance_ratio(&basis).unwrap();
        assert!((r[0] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn ratio_arithmetic() {
        let basis = PcaBasis {
            feature_labels: vec!["a".into(), "b".into(), "c".into()],
            center: vec![0.0; 3],
            scale: None,
            eigenvalues: vec![2.0, 1.0, 1.0],
            components: Matrix::identity(3),
            k: 3,
        };
        assert_eq!(explained_variance_ratio(&basis).unwrap(), vec![0.5, 0.25, 0.25]);
        let zero = PcaBasis {
            eigenvalues: vec![0.0; 3],
            ..basis
        };
        assert!(matches!(explained_variance_ratio(&zero), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn full_basis_round_trip_and_center() {
        let x = design(&[
            vec![1.0, 2.0, 0.5],
            vec![3.0, -1.0, 2.0],
            vec![0.0, 4.0, 1.0],
            vec![2.0, 2.5, -1.0],
            vec![-1.0, 0.0, 0.0],
        ]);
        let basis = fit_pca(&x, 3).unwrap();
        let scores = project(&x, &basis).unwrap();
        assert_eq!(scores.labels(), &["PC1", "PC2", "PC3"]);
        let back = reconstruct(&scores, &basis).unwrap();
        assert!(back.values().max_abs_diff(x.values()) < 1e-12);

        let center = DesignMatrix::new(Matrix::from_rows(&[basis.center.clone()]).unwrap(), x.labels().to_vec()).unwrap();
        assert!(project(&center, &basis).unwrap().values().as_slice().iter().all(|v| v.abs() < 1e-15));

        assert!(fit_pca(&x, 0).is_err());
        assert!(fit_pca(&x, 4).is_err());
        assert!(project(&design(&[vec![1.0, 2.0]]), &basis).is_err());
    }

    #[test]
    fn correlation_mode_matches_standardized_covariance() {
        let x = design(&[vec![100.0, 0.1], vec![140.0, 0.4], vec![90.0, 0.2], vec![130.0, 0.25]]);
        let basis = fit_pca_with(&x, 2, PcaScaling::Correlation).unwrap();
        let total: f64 = basis.eigenvalues.iter().sum();
        assert!((total - 2.0).abs() < 1e-12);
        let back = reconstruct(&project(&x, &basis).unwrap(), &basis).unwrap();
        assert!(back.values().max_abs_diff(x.values()) < 1e-10);
    }

    #[test]
    fn fingerprint_tracks_contents() {
        let x = design(&[vec![1.0, 2.0], vec![3.0, -1.0], vec![0.0, 4.0]]);
        let a = fit_pca(&x, 2).unwrap();
        assert_eq!(a.fingerprint(), fit_pca(&x, 2).unwrap().fingerprint());
        assert_ne!(a.fingerprint(), a.truncate(1).unwrap().fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }
}
