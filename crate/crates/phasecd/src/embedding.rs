//! Real embedding of complex vectors: x in C^N <-> [Re(x); Im(x)] in R^{2N}.
//!
//! Working in the embedding makes every coordinate subproblem a real
//! univariate quartic, which has a closed-form exact minimizer.

use crate::ensemble::Complex;
use crate::{Error, Result};

/// [Re(x); Im(x)] stacked into a real vector of length 2N.
pub fn embed(x: &[Complex]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; 2 * n];
    for (i, v) in x.iter().enumerate() {
        out[i] = v.re;
        out[n + i] = v.im;
    }
    out
}

/// Inverse of [`embed`]. Errors on odd-length input.
pub fn unembed(xbar: &[f64]) -> Result<Vec<Complex>> {
    if xbar.len() % 2 != 0 {
        return Err(Error::OddEmbeddingLength(xbar.len()));
    }
    let n = xbar.len() / 2;
    Ok((0..n).map(|i| Complex::new(xbar[i], xbar[n + i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn embed_examples() {
        assert_eq!(embed(&[Complex::new(1.0, 2.0)]), vec![1.0, 2.0]);
        assert_eq!(embed(&[Complex::new(0.0, 0.0); 2]), vec![0.0; 4]);
        assert_eq!(
            embed(&[Complex::new(3.0, -1.0), Complex::new(0.0, 1.0)]),
            vec![3.0, 0.0, -1.0, 1.0]
        );
    }

    #[test]
    fn unembed_examples() {
        assert_eq!(unembed(&[1.0, 2.0]).unwrap(), vec![Complex::new(1.0, 2.0)]);
        assert_eq!(
            unembed(&[0.0, 0.0, 0.0, 0.0]).unwrap(),
            vec![Complex::new(0.0, 0.0); 2]
        );
        assert!(matches!(
            unembed(&[1.0, 2.0, 3.0]),
            Err(Error::OddEmbeddingLength(3))
        ));
    }

    proptest! {
        #[test]
        fn round_trip(parts in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 0..100)) {
            let x: Vec<Complex> = parts.iter().map(|&(re, im)| Complex::new(re, im)).collect();
            let back = unembed(&embed(&x)).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
