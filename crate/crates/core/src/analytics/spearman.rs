use statrs::distribution::{ContinuousCDF, StudentsT};

use super::AssociationMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spearman {
    pub rho: f64,
    /// Two-sided, from the Student-t approximation with `n - 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

/// 1-based ranks; tied values share the mean of the positions they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Spearman> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::UndefinedCorrelation(format!("lengths differ ({n} vs {})", y.len())));
    }
    if n < 3 {
        return Err(Error::UndefinedCorrelation(format!("need at least 3 observations, got {n}")));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::UndefinedCorrelation("NaN in input".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (dx, dy) = (a - mean, b - mean);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input vector".into()));
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(Spearman {
        rho,
        p_value: t_test_p_value(rho, n),
        n,
    })
}

fn t_test_p_value(rho: f64, n: usize) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Which form of the association matrix is flattened for RSA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlattenMode {
    #[default]
    Counts,
    Percentages,
}

/// Symmetric method × method Spearman matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct RsaMatrix {
    pub methods: Vec<String>,
    pub rho: Vec<f64>,
    pub p_values: Vec<f64>,
}

impl RsaMatrix {
    pub fn rho_at(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.methods.len() + j]
    }

    pub fn p_at(&self, i: usize, j: usize) -> f64 {
        self.p_values[i * self.methods.len() + j]
    }
}

/// Pairwise Spearman over named vectors; unit diagonal, mirrored halves.
pub fn rsa_vectors(methods: Vec<String>, vectors: &[Vec<f64>]) -> Result<RsaMatrix> {
    let m = methods.len();
    if m < 2 || vectors.len() != m {
        return Err(Error::InvalidArgument("RSA needs at least two named vectors".into()));
    }
    let mut rho = vec![0.0; m * m];
    let mut p_values = vec![0.0; m * m];
    for i in 0..m {
        rho[i * m + i] = 1.0;
        for j in i + 1..m {
            let s = spearman(&vectors[i], &vectors[j])?;
            rho[i * m + j] = s.rho;
            rho[j * m + i] = s.rho;
            p_values[i * m + j] = s.p_value;
            p_values[j * m + i] = s.p_value;
        }
    }
    Ok(RsaMatrix { methods, rho, p_values })
}

/// RSA over association matrices that share class and emotion orderings.
pub fn rsa(matrices: &[(String, AssociationMatrix)], mode: FlattenMode) -> Result<RsaMatrix> {
    if let Some((first, rest)) = matrices.split_first() {
        for (name, m) in rest {
            if !m.same_ordering(&first.1) {
                return Err(Error::OrderingMismatch(format!(
                    "\"{name}\" orders classes or emotions differently from \"{}\"",
                    first.0
                )));
            }
        }
    }
    let vectors: Vec<Vec<f64>> = matrices
        .iter()
        .map(|(_, m)| match mode {
            FlattenMode::Counts => m.flatten(),
            FlattenMode::Percentages => m.normalize().flatten(),
        })
        .collect();
    rsa_vectors(matrices.iter().map(|(n, _)| n.clone()).collect(), &vectors)
}
