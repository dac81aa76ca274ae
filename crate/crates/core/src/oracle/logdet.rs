use crate::element::{Element, Payload, PayloadKind};
use crate::scalar::Scalar;

use super::{Objective, OracleError};

/// Diversity objective `f(S) = ln det(I + α M_S)` with the similarity kernel
/// `M_ij = exp(−‖v_i − v_j‖₂)`.
///
/// The kernel is rebuilt for every query and factorized with a Cholesky
/// decomposition; `ln det = 2 Σ ln L_ii`.
#[derive(Clone, Copy, Debug)]
pub struct LogDet<T> {
    alpha: T,
}

impl<T: Scalar> LogDet<T> {
    /// Panics unless `alpha` is positive and finite.
    pub fn new(alpha: T) -> Self {
        assert!(
            alpha > T::zero() && alpha.is_finite(),
            "alpha must be positive"
        );
        LogDet { alpha }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }
}

fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .fold(T::zero(), |acc, d| acc + d)
        .sqrt()
}

/// In-place lower Cholesky factor of a row-major `n × n` symmetric matrix.
/// Returns `ln det` of the input.
fn cholesky_logdet<T: Scalar>(a: &mut [T], n: usize) -> Option<T> {
    let mut logdet = T::zero();
    for j in 0..n {
        let mut d = a[j * n + j];
        for p in 0..j {
            d = d - a[j * n + p] * a[j * n + p];
        }
        if !(d > T::zero()) {
            return None;
        }
        let l = d.sqrt();
        a[j * n + j] = l;
        logdet = logdet + l.ln();
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s = s - a[i * n + p] * a[j * n + p];
            }
            a[i * n + j] = s / l;
        }
    }
    Some(logdet + logdet)
}

impl<T: Scalar> Objective<T> for LogDet<T> {
    fn name(&self) -> &'static str {
        "logdet"
    }

    fn payload_kind(&self) -> PayloadKind {
        PayloadKind::Embedding
    }

    fn value(&self, set: &[&Element<T>]) -> Result<T, OracleError> {
        let vectors: Vec<&[T]> = set
            .iter()
            .filter_map(|e| match &e.payload {
                Payload::Embedding(v) => Some(v.coords.as_slice()),
                _ => None,
            })
            .collect();
        let n = vectors.len();
        if n == 0 {
            return Ok(T::zero());
        }
        let dim = vectors[0].len();
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(OracleError::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let mut kernel = vec![T::zero(); n * n];
        for i in 0..n {
            kernel[i * n + i] = T::one() + self.alpha;
            for j in 0..i {
                let m = self.alpha * (-distance(vectors[i], vectors[j])).exp();
                kernel[i * n + j] = m;
                kernel[j * n + i] = m;
            }
        }
        cholesky_logdet(&mut kernel, n).ok_or(OracleError::NotPositiveDefinite { size: n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::evaluate;

    #[test]
    fn identities() {
        let f = LogDet::new(1.0);
        let empty: [&Element<f64>; 0] = [];
        assert_eq!(evaluate(&f, &empty).unwrap(), 0.0);
        let v = Element::embedding(1, vec![0.3, -1.0, 2.0, 0.5]);
        let w = Element::embedding(2, vec![0.3, -1.0, 2.0, 0.5]);
        assert!((evaluate(&f, &[&v]).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((evaluate(&f, &[&v, &w]).unwrap() - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn two_distinct_vectors_closed_form() {
        let alpha = 0.7;
        let f = LogDet::new(alpha);
        let v = Element::embedding(1, vec![0.0, 0.0]);
        let w = Element::embedding(2, vec![3.0, 4.0]);
        let m = (-5.0f64).exp();
        let expected = ((1.0 + alpha) * (1.0 + alpha) - alpha * alpha * m * m).ln();
        assert!((evaluate(&f, &[&v, &w]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn ragged_dimensions_rejected() {
        let f = LogDet::new(1.0);
        let v = Element::embedding(1, vec![0.0, 0.0]);
        let w = Element::embedding(2, vec![0.0]);
        assert_eq!(
            evaluate(&f, &[&v, &w]),
            Err(OracleError::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_logdet(&mut a, 2).is_none());
    }
}
