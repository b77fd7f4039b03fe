//! Test-only reference computations on dense matrices.
//!
//! Deliberately naive: everything is materialized as `Vec<Vec<f64>>` and
//! summed in plain loops, sharing no code with the library's sparse path.

#![allow(dead_code)]

use topicfit::{DocumentTermMatrix, TopicModel};

pub struct DenseOracle {
    pub y: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
}

impl DenseOracle {
    pub fn new(y: Vec<Vec<f64>>, theta: Vec<Vec<f64>>, phi: Vec<Vec<f64>>) -> Self {
        Self { y, theta, phi }
    }

    pub fn from_parts(dtm: &DocumentTermMatrix, model: &TopicModel) -> Self {
        let y = (0..dtm.num_docs())
            .map(|d| (0..dtm.num_terms()).map(|v| dtm.get(d, v) as f64).collect())
            .collect();
        let theta = (0..model.theta.rows()).map(|d| model.theta.row(d).to_vec()).collect();
        let phi = (0..model.phi.rows()).map(|k| model.phi.row(k).to_vec()).collect();
        Self { y, theta, phi }
    }

    fn p(&self, d: usize, v: usize) -> f64 {
        let mut s = 0.0;
        for k in 0..self.phi.len() {
            s += self.theta[d][k] * self.phi[k][v];
        }
        s
    }

    pub fn fitted(&self) -> Vec<Vec<f64>> {
        (0..self.y.len())
            .map(|d| {
                let n: f64 = self.y[d].iter().sum();
                (0..self.y[d].len()).map(|v| n * self.p(d, v)).collect()
            })
            .collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        let v = self.y[0].len();
        let mut m = vec![0.0; v];
        for row in &self.y {
            for j in 0..v {
                m[j] += row[j];
            }
        }
        m.iter().map(|x| x / self.y.len() as f64).collect()
    }

    /// (ss_tot, ss_resid, r_squared)
    pub fn r_squared(&self) -> (f64, f64, f64) {
        let f = self.fitted();
        let m = self.mean();
        let mut tot = 0.0;
        let mut resid = 0.0;
        for d in 0..self.y.len() {
            for v in 0..m.len() {
                tot += (self.y[d][v] - m[v]).powi(2);
                resid += (self.y[d][v] - f[d][v]).powi(2);
            }
        }
        (tot, resid, 1.0 - resid / tot)
    }

    pub fn log_l_full(&self) -> f64 {
        let mut s = 0.0;
        for d in 0..self.y.len() {
            for v in 0..self.y[d].len() {
                if self.y[d][v] > 0.0 {
                    s += self.y[d][v] * self.p(d, v).ln();
                }
            }
        }
        s
    }

    pub fn log_l_null(&self) -> f64 {
        let v = self.y[0].len();
        let mut col = vec![0.0; v];
        let mut total = 0.0;
        for row in &self.y {
            for j in 0..v {
                col[j] += row[j];
                total += row[j];
            }
        }
        let mut s = 0.0;
        for row in &self.y {
            for j in 0..v {
                if row[j] > 0.0 {
                    s += row[j] * (col[j] / total).ln();
                }
            }
        }
        s
    }

    pub fn mcfadden(&self) -> f64 {
        1.0 - self.log_l_full() / self.log_l_null()
    }
}

/// The 2×3 hand corpus y₁ = (2,1,0), y₂ = (0,1,2) with its two-topic model.
pub fn hand_oracle() -> DenseOracle {
    DenseOracle::new(
        vec![vec![2.0, 1.0, 0.0], vec![0.0, 1.0, 2.0]],
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]],
    )
}

pub fn dtm_from_dense(y: &[Vec<f64>]) -> DocumentTermMatrix {
    let ids = (0..y.len()).map(|d| format!("doc{d}")).collect();
    let vocab = (0..y[0].len()).map(|v| format!("w{v}")).collect();
    let rows = y
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(_, &c)| c > 0.0)
                .map(|(v, &c)| (v as u32, c as u32))
                .collect()
        })
        .collect();
    DocumentTermMatrix::from_rows(ids, vocab, rows).unwrap()
}

pub fn model_from_dense(theta: &[Vec<f64>], phi: &[Vec<f64>]) -> TopicModel {
    TopicModel::new(
        topicfit::Matrix::from_rows(theta.to_vec()).unwrap(),
        topicfit::Matrix::from_rows(phi.to_vec()).unwrap(),
    )
    .unwrap()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
