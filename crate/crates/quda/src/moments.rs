//! Per-class sample moments.
//!
//! Covariances deliberately use the 1/n_k divisor (not 1/(n_k - 1)); every
//! estimator downstream is calibrated to that convention, so swapping in a
//! library covariance with the unbiased divisor would silently change the
//! fitted rule.

use crate::error::{shape_mismatch, QudaError, Result};
use crate::linalg::{Mat, SymMatrix};

/// Binary class label. The method is strictly two-class; anything other
/// than 1/2 is rejected at parse time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassLabel {
    One,
    Two,
}

impl ClassLabel {
    pub fn from_u8(v: u8, row: usize) -> Result<Self> {
        match v {
            1 => Ok(ClassLabel::One),
            2 => Ok(ClassLabel::Two),
            other => Err(QudaError::InvalidLabel {
                found: other.to_string(),
                row,
            }),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            ClassLabel::One => 1,
            ClassLabel::Two => 2,
        }
    }

    /// 1 for class 1, 0 for class 2; the convention used by the intercept scan.
    pub fn indicator_class1(self) -> u8 {
        match self {
            ClassLabel::One => 1,
            ClassLabel::Two => 0,
        }
    }
}

/// A labeled n x p dataset with both classes present at least twice and no
/// non-finite entries.
#[derive(Clone, Debug)]
pub struct LabeledDataset {
    x: Mat,
    labels: Vec<ClassLabel>,
}

impl LabeledDataset {
    pub fn new(x: Mat, labels: Vec<ClassLabel>) -> Result<Self> {
        if x.nrows() != labels.len() {
            return Err(shape_mismatch(
                format!("{} labels", x.nrows()),
                format!("{}", labels.len()),
            ));
        }
        if !x.is_finite() {
            return Err(QudaError::NonFinite { what: "dataset" });
        }
        for class in [ClassLabel::One, ClassLabel::Two] {
            let count = labels.iter().filter(|&&l| l == class).count();
            if count == 0 {
                return Err(QudaError::MissingClass {
                    label: class.as_u8(),
                });
            }
            if count < 2 {
                return Err(QudaError::ClassTooSmall {
                    label: class.as_u8(),
                    count,
                    required: 2,
                });
            }
        }
        Ok(LabeledDataset { x, labels })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Mat {
        &self.x
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.x.row(i)
    }

    pub fn count(&self, class: ClassLabel) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    /// Copies the given rows into a new dataset (used for CV folds).
    pub fn subset(&self, rows: &[usize]) -> Result<LabeledDataset> {
        let mut x = Mat::zeros(rows.len().max(1), self.p());
        let mut labels = Vec::with_capacity(rows.len());
        for (new_i, &old_i) in rows.iter().enumerate() {
            x.row_mut(new_i).copy_from_slice(self.x.row(old_i));
            labels.push(self.labels[old_i]);
        }
        LabeledDataset::new(x, labels)
    }
}

/// Sample means and covariances of the two classes.
#[derive(Clone, Debug)]
pub struct ClassMoments {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub sigma1: SymMatrix,
    pub sigma2: SymMatrix,
    pub n1: usize,
    pub n2: usize,
}

impl ClassMoments {
    pub fn p(&self) -> usize {
        self.mu1.len()
    }

    /// Centroid midpoint (mu1 + mu2) / 2.
    pub fn mu_mid(&self) -> Vec<f64> {
        self.mu1
            .iter()
            .zip(&self.mu2)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// mu1 - mu2.
    pub fn mu_diff(&self) -> Vec<f64> {
        self.mu1
            .iter()
            .zip(&self.mu2)
            .map(|(a, b)| a - b)
            .collect()
    }

    /// sigma1 - sigma2 as a plain matrix.
    pub fn sigma_diff(&self) -> Mat {
        self.sigma1.as_mat().sub(self.sigma2.as_mat())
    }

    /// sigma1 + sigma2 as a plain matrix.
    pub fn sigma_sum(&self) -> Mat {
        self.sigma1.as_mat().add(self.sigma2.as_mat())
    }
}

/// Class means and covariances with the 1/n_k divisor, exactly symmetric by
/// construction.
pub fn estimate_moments(data: &LabeledDataset) -> Result<ClassMoments> {
    let p = data.p();
    let mut result: Vec<(Vec<f64>, SymMatrix, usize)> = Vec::with_capacity(2);
    for class in [ClassLabel::One, ClassLabel::Two] {
        let rows: Vec<usize> = (0..data.n())
            .filter(|&i| data.labels()[i] == class)
            .collect();
        let n_k = rows.len();

        let mut mu = vec![0.0; p];
        for &i in &rows {
            for (m, &v) in mu.iter_mut().zip(data.row(i)) {
                *m += v;
            }
        }
        for m in mu.iter_mut() {
            *m /= n_k as f64;
        }

        let mut cov = Mat::zeros(p, p);
        let mut centered = vec![0.0; p];
        for &i in &rows {
            for (c, (&v, &m)) in centered.iter_mut().zip(data.row(i).iter().zip(&mu)) {
                *c = v - m;
            }
            for a in 0..p {
                let ca = centered[a];
                if ca == 0.0 {
                    continue;
                }
                let row = cov.row_mut(a);
                for b in a..p {
                    row[b] += ca * centered[b];
                }
            }
        }
        let scale = 1.0 / n_k as f64;
        for a in 0..p {
            for b in a..p {
                let v = cov.get(a, b) * scale;
                cov.set(a, b, v);
                cov.set(b, a, v);
            }
        }
        result.push((mu, SymMatrix::new(cov)?, n_k));
    }
    let (mu2, sigma2, n2) = result.pop().expect("two classes");
    let (mu1, sigma1, n1) = result.pop().expect("two classes");
    Ok(ClassMoments {
        mu1,
        mu2,
        sigma1,
        sigma2,
        n1,
        n2,
    })
}
