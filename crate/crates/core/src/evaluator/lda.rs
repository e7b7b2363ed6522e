//! Linear discriminant analysis with the pooled within-class covariance shrunk
//! toward a scaled identity:
//!
//! ```text
//! Σr = (1 − γ) Σ̂ + γ (tr Σ̂ / d) I
//! δk(x) = xᵀ Σr⁻¹ μk − ½ μkᵀ Σr⁻¹ μk + ln πk
//! ```
//!
//! `Σr⁻¹ μk` comes from a Cholesky solve; the inverse is never formed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LdaModel {
    classes: Vec<u32>,
    // d × K, column k = Σr⁻¹ μk
    weights: DMatrix<f64>,
    offsets: Vec<f64>,
}

/// Fits on `rows` with matching `labels`; needs at least two classes.
pub fn fit_shrinkage_lda(rows: &[&[f64]], labels: &[u32], gamma: f64) -> Result<LdaModel> {
    assert_eq!(rows.len(), labels.len(), "one label per row");
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidConfig(format!("shrinkage gamma {gamma} outside [0, 1]")));
    }
    let d = rows.first().map_or(0, |r| r.len());
    if d == 0 {
        return Err(Error::InvalidConfig("feature dimension is zero".into()));
    }
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidConfig("training split holds fewer than two classes".into()));
    }
    let n = rows.len();
    let k = classes.len();
    let class_pos = |l: u32| classes.binary_search(&l).expect("label among classes");

    let mut means = DMatrix::<f64>::zeros(d, k);
    let mut counts = vec![0usize; k];
    for (row, &l) in rows.iter().zip(labels) {
        let j = class_pos(l);
        counts[j] += 1;
        for (i, &v) in row.iter().enumerate() {
            means[(i, j)] += v;
        }
    }
    for (j, &c) in counts.iter().enumerate() {
        means.column_mut(j).scale_mut(1.0 / c as f64);
    }

    let mut scatter = DMatrix::<f64>::zeros(d, d);
    let mut centered = DVector::<f64>::zeros(d);
    for (row, &l) in rows.iter().zip(labels) {
        let j = class_pos(l);
        for i in 0..d {
            centered[i] = row[i] - means[(i, j)];
        }
        scatter.ger(1.0, &centered, &centered, 1.0);
    }
    let dof = if n > k { n - k } else { n };
    let pooled = scatter / dof as f64;

    let trace = pooled.trace();
    let target = if trace > 0.0 { trace / d as f64 } else { 1.0 };
    let mut reg = pooled * (1.0 - gamma);
    for i in 0..d {
        reg[(i, i)] += gamma * target;
    }
    let chol = reg.cholesky().ok_or(Error::SingularCovariance)?;
    let weights = chol.solve(&means);

    let offsets = (0..k)
        .map(|j| {
            let prior = counts[j] as f64 / n as f64;
            -0.5 * means.column(j).dot(&weights.column(j)) + prior.ln()
        })
        .collect();
    Ok(LdaModel {
        classes,
        weights,
        offsets,
    })
}

impl LdaModel {
    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        (0..self.classes.len())
            .map(|j| x.dot(&self.weights.column(j)) + self.offsets[j])
            .collect()
    }

    /// Highest-scoring class; ties go to the smallest class id.
    pub fn predict(&self, x: &[f64]) -> u32 {
        let scores = self.scores(x);
        let mut best = 0;
        for j in 1..scores.len() {
            if scores[j] > scores[best] {
                best = j;
            }
        }
        self.classes[best]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(rows: &[Vec<f64>], labels: &[u32], gamma: f64) -> LdaModel {
        let r: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        fit_shrinkage_lda(&r, labels, gamma).unwrap()
    }

    #[test]
    fn symmetric_1d_threshold_at_zero() {
        let rows: Vec<Vec<f64>> = [-1.5, -1.0, -0.5, 0.5, 1.0, 1.5].iter().map(|&v| vec![v]).collect();
        let m = fit(&rows, &[1, 1, 1, 2, 2, 2], 0.0);
        assert_eq!(m.predict(&[-0.01]), 1);
        assert_eq!(m.predict(&[0.01]), 2);
        // exactly on the boundary: tie goes to class 1
        assert_eq!(m.predict(&[0.0]), 1);
    }

    // 8 points, two classes, correlated features
    fn toy8() -> (Vec<Vec<f64>>, Vec<u32>) {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, 0.0],
            vec![2.0, 1.0],
            vec![3.0, 3.0],
            vec![4.0, 4.0],
            vec![4.0, 3.0],
            vec![5.0, 4.0],
        ];
        (rows, vec![1, 1, 1, 1, 2, 2, 2, 2])
    }

    // Independent 2×2 route: closed-form inverse via the adjugate.
    // At γ = 0 the boundary is the line y = 2.
    fn oracle_predict(rows: &[Vec<f64>], labels: &[u32], gamma: f64, x: [f64; 2]) -> u32 {
        let mean = |c: u32| {
            let pts: Vec<&Vec<f64>> = rows.iter().zip(labels).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
            let n = pts.len() as f64;
            [pts.iter().map(|p| p[0]).sum::<f64>() / n, pts.iter().map(|p| p[1]).sum::<f64>() / n]
        };
        let (m1, m2) = (mean(1), mean(2));
        let mut s = [[0.0; 2]; 2];
        for (r, &l) in rows.iter().zip(labels) {
            let m = if l == 1 { m1 } else { m2 };
            let c = [r[0] - m[0], r[1] - m[1]];
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] += c[i] * c[j];
                }
            }
        }
        let dof = (rows.len() - 2) as f64;
        for row in s.iter_mut() {
            for v in row.iter_mut() {
                *v /= dof;
            }
        }
        let t = (s[0][0] + s[1][1]) / 2.0;
        let a = [
            [(1.0 - gamma) * s[0][0] + gamma * t, (1.0 - gamma) * s[0][1]],
            [(1.0 - gamma) * s[1][0], (1.0 - gamma) * s[1][1] + gamma * t],
        ];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let score = |m: [f64; 2]| {
            let w = [inv[0][0] * m[0] + inv[0][1] * m[1], inv[1][0] * m[0] + inv[1][1] * m[1]];
            x[0] * w[0] + x[1] * w[1] - 0.5 * (m[0] * w[0] + m[1] * w[1]) + 0.5f64.ln()
        };
        if score(m2) > score(m1) {
            2
        } else {
            1
        }
    }

    #[test]
    fn toy8_matches_closed_form() {
        let (rows, labels) = toy8();
        let probes = [[2.0, 2.1], [2.5, 1.9], [2.0, 2.5], [3.0, 1.0], [1.0, 3.0], [2.6, 2.4], [0.0, 4.0]];
        for gamma in [0.0, 0.1, 0.5, 1.0] {
            let m = fit(&rows, &labels, gamma);
            for p in probes {
                assert_eq!(m.predict(&p), oracle_predict(&rows, &labels, gamma, p), "gamma {gamma} probe {p:?}");
            }
            for (r, &l) in rows.iter().zip(&labels) {
                assert_eq!(m.predict(r), l);
            }
        }
    }

    #[test]
    fn gamma_one_is_nearest_mean() {
        let (rows, labels) = toy8();
        let m = fit(&rows, &labels, 1.0);
        // class means (1, 0.5) and (4, 3.5)
        for p in [[2.5, 2.0], [2.4, 2.0], [2.6, 2.1], [0.0, 5.0], [5.0, 0.0]] {
            let d1 = (p[0] - 1.0f64).powi(2) + (p[1] - 0.5f64).powi(2);
            let d2 = (p[0] - 4.0f64).powi(2) + (p[1] - 3.5f64).powi(2);
            let expected = if d2 < d1 { 2 } else { 1 };
            assert_eq!(m.predict(&p), expected, "{p:?}");
        }
    }

    #[test]
    fn small_gamma_change_is_stable() {
        let (rows, labels) = toy8();
        let (a, b) = (fit(&rows, &labels, 0.10), fit(&rows, &labels, 0.11));
        for i in 0..=20 {
            for j in 0..=20 {
                let p = [i as f64 * 0.25, j as f64 * 0.25];
                let sa = a.scores(&p);
                // skip points sitting on the boundary
                if (sa[0] - sa[1]).abs() > 0.5 {
                    assert_eq!(a.predict(&p), b.predict(&p));
                }
            }
        }
        for r in &rows {
            assert_eq!(a.predict(r), b.predict(r));
        }
    }

    #[test]
    fn singular_only_without_shrinkage() {
        // second feature duplicates the first: Σ̂ is rank one
        let rows: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 5.0, 6.0, 7.0].iter().map(|&v| vec![v, v]).collect();
        let labels = [1, 1, 1, 2, 2, 2];
        let r: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        assert!(matches!(fit_shrinkage_lda(&r, &labels, 0.0), Err(Error::SingularCovariance)));
        assert!(fit_shrinkage_lda(&r, &labels, 0.1).is_ok());

        let flat: Vec<Vec<f64>> = vec![vec![1.0]; 4];
        let r: Vec<&[f64]> = flat.iter().map(|r| r.as_slice()).collect();
        assert!(fit_shrinkage_lda(&r, &[1, 1, 2, 2], 0.1).is_ok());
    }

    #[test]
    fn needs_two_classes() {
        let rows = [vec![0.0], vec![1.0]];
        let r: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        assert!(fit_shrinkage_lda(&r, &[1, 1], 0.1).is_err());
    }
}
