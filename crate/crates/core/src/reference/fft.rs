use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Precomputed twiddles and bit-reversal permutation for one length.
#[derive(Clone, Debug)]
pub struct FftPlan {
    n: usize,
    twiddles: Vec<Complex64>,
    rev: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::BadLength(n));
        }
        let bits = n.trailing_zeros();
        let rev = (0..n)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        Ok(FftPlan { n, twiddles, rev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place transform. The forward transform is unnormalized,
    /// `X_k = Σ x_j e^{−2πijk/N}`; the inverse carries the 1/N.
    pub fn process(&self, data: &mut [Complex64], inverse: bool) -> Result<()> {
        if data.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: data.len(),
            });
        }
        let n = self.n;
        for i in 0..n {
            let j = self.rev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len *= 2;
        }
        if inverse {
            let s = 1.0 / n as f64;
            for v in data.iter_mut() {
                *v *= s;
            }
        }
        Ok(())
    }
}

/// Radix-2 transform of a power-of-two length vector.
pub fn fft(v: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(v.len())?;
    let mut out = v.to_vec();
    plan.process(&mut out, inverse)?;
    Ok(out)
}
