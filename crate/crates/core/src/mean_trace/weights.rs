use crate::channel::ChannelSpec;
use crate::error::{Error, Result};

/// `V[i][j] = Pr[j in R_i]`: where the copies of input bit `i` land in the
/// trace, for positions `1..=len`.
///
/// Row `i` is the pmf of `S_{i-1} = M_1 + ... + M_{i-1}` convolved with the
/// replication profile. Positions up to `len` only depend on `S_{i-1} < len`,
/// so the truncated convolution is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionWeights {
    n: usize,
    len: usize,
    v: Vec<f64>,
    /// Row `i` holds `Pr[S_i = s]` for `s < len`.
    offsets: Vec<f64>,
}

impl PositionWeights {
    pub fn new(spec: &ChannelSpec, n: usize, len: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n", "input length must be at least 1"));
        }
        if len == 0 {
            return Err(Error::domain("N", "truncation point must be at least 1"));
        }
        let m_pmf = spec.m_pmf(len - 1);
        let r = spec.replication_profile(len).r;
        let mut v = vec![0.0; n * len];
        let mut offsets = vec![0.0; n * len];
        let mut current = vec![0.0; len];
        current[0] = 1.0;
        for i in 0..n {
            offsets[i * len..(i + 1) * len].copy_from_slice(&current);
            let row = &mut v[i * len..(i + 1) * len];
            for (s, &ps) in current.iter().enumerate() {
                if ps == 0.0 {
                    continue;
                }
                for (k, &rk) in r.iter().take(len - s).enumerate() {
                    row[s + k] += ps * rk;
                }
            }
            if i + 1 < n {
                current = convolve_truncated(&current, &m_pmf);
            }
        }
        Ok(Self { n, len, v, offsets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row `i` (0-based bit), entry `j` is position `j + 1`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.v[i * self.len..(i + 1) * self.len]
    }

    /// `Pr[S_{i} = s]` for `s < len`, where bit `i` (0-based) starts at offset `S_i`.
    pub fn offset_pmf(&self, i: usize) -> &[f64] {
        &self.offsets[i * self.len..(i + 1) * self.len]
    }

    /// `V^T d` for any real coefficients `d`.
    pub fn combine<T: Copy + Into<f64>>(&self, d: &[T]) -> Vec<f64> {
        assert_eq!(d.len(), self.n, "coefficient vector length");
        let mut out = vec![0.0; self.len];
        for (i, &di) in d.iter().enumerate() {
            let di: f64 = di.into();
            if di == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(i)) {
                *o += di * w;
            }
        }
        out
    }
}

/// First `a.len()` coefficients of `a * b`.
pub(crate) fn convolve_truncated(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len();
    let mut out = vec![0.0; len];
    for (s, &pa) in a.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        for (k, &pb) in b.iter().take(len - s).enumerate() {
            out[s + k] += pa * pb;
        }
    }
    out
}
