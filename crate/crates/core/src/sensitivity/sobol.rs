use super::SensitivityError;

// Primitive polynomials and initial direction numbers (Joe & Kuo,
// new-joe-kuo-6.21201) for dimensions 2..=21: (degree, coefficients, m).
const DIRECTIONS: [(u32, u32, &[u32]); 20] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
];

const BITS: usize = 32;

/// Unscrambled Sobol low-discrepancy sequence in Gray-code order.
///
/// The all-zero first point is skipped, so in dimension one the sequence
/// starts 0.5, 0.75, 0.25.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    v: Vec<[u32; BITS]>,
    x: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    pub const MAX_DIM: usize = DIRECTIONS.len() + 1;

    pub fn new(dim: usize) -> Result<Self, SensitivityError> {
        if dim == 0 || dim > Self::MAX_DIM {
            return Err(SensitivityError::Dimension {
                requested: dim,
                max: Self::MAX_DIM,
            });
        }
        let mut v = Vec::with_capacity(dim);
        let mut first = [0u32; BITS];
        for (k, e) in first.iter_mut().enumerate() {
            *e = 1u32 << (BITS - 1 - k);
        }
        v.push(first);
        for &(s, a, m) in DIRECTIONS.iter().take(dim - 1) {
            let s = s as usize;
            let mut d = [0u32; BITS];
            for k in 0..BITS {
                if k < s {
                    d[k] = m[k] << (BITS - 1 - k);
                } else {
                    let mut val = d[k - s] ^ (d[k - s] >> s);
                    for i in 1..s {
                        if (a >> (s - 1 - i)) & 1 == 1 {
                            val ^= d[k - i];
                        }
                    }
                    d[k] = val;
                }
            }
            v.push(d);
        }
        let mut seq = SobolSequence {
            v,
            x: vec![0; dim],
            index: 0,
        };
        seq.advance();
        Ok(seq)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn advance(&mut self) {
        let c = (!self.index).trailing_zeros() as usize;
        for (x, v) in self.x.iter_mut().zip(&self.v) {
            *x ^= v[c];
        }
        self.index += 1;
    }

    /// Next point of the unit hypercube.
    pub fn next_point(&mut self) -> Vec<f64> {
        let scale = 1.0 / (1u64 << BITS) as f64;
        let p = self.x.iter().map(|&x| x as f64 * scale).collect();
        self.advance();
        p
    }

    /// The first `n` points (after the skipped origin).
    pub fn sample(dim: usize, n: usize) -> Result<Vec<Vec<f64>>, SensitivityError> {
        let mut s = Self::new(dim)?;
        Ok((0..n).map(|_| s.next_point()).collect())
    }
}
