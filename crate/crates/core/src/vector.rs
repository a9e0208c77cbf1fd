use serde::{Deserialize, Serialize};

/// Sparse real vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds from arbitrary `(index, value)` pairs: sorts, merges duplicate
    /// indices by summing, and drops exact zeros.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        SparseVector { entries }
    }

    pub fn from_dense(v: &[f64]) -> Self {
        SparseVector {
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0.0)
                .map(|(i, &x)| (i as u32, x))
                .collect(),
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// One past the largest stored index.
    pub fn min_dim(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i as usize + 1)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Scales to unit Euclidean norm. A zero vector stays zero.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        SparseVector {
            entries: self.entries.iter().map(|&(i, v)| (i, v / n)).collect(),
        }
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut sum = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, v)| v * dense.get(i as usize).copied().unwrap_or(0.0))
            .sum()
    }

    /// `dense += scale * self`
    pub fn axpy_into(&self, scale: f64, dense: &mut [f64]) {
        for &(i, v) in &self.entries {
            dense[i as usize] += scale * v;
        }
    }

    /// Keeps only indices present in `map`, renumbering them.
    pub fn remap(&self, map: impl Fn(u32) -> Option<u32>) -> Self {
        SparseVector::from_pairs(
            self.entries
                .iter()
                .filter_map(|&(i, v)| map(i).map(|j| (j, v)))
                .collect(),
        )
    }
}

/// Cosine similarity of two vectors that are unit norm or zero; a zero
/// operand yields 0.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    if a.is_zero() || b.is_zero() {
        return 0.0;
    }
    a.dot(b)
}

pub fn dense_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dense_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine of two arbitrary dense vectors; 0 if either is zero.
pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na2, nb2) = (dense_dot(a, a), dense_dot(b, b));
    if na2 == 0.0 || nb2 == 0.0 {
        return 0.0;
    }
    // sqrt of the product keeps cos(a, a) exactly 1
    dense_dot(a, b) / (na2 * nb2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_merged_and_sorted() {
        let v = SparseVector::from_pairs(vec![(3, 1.0), (1, 2.0), (3, 0.5), (2, 0.0)]);
        assert_eq!(v.entries(), &[(1, 2.0), (3, 1.5)]);
        assert_eq!(v.min_dim(), 4);
        assert_eq!(v.to_dense(4), vec![0.0, 2.0, 0.0, 1.5]);
    }

    #[test]
    fn cosine_cases() {
        let a = SparseVector::from_dense(&[0.6, 0.8]);
        let b = SparseVector::from_dense(&[0.0, 1.0]);
        let c = SparseVector::from_dense(&[1.0, 0.0]);
        assert!((cosine(&a, &a) - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&b, &c), 0.0);
        assert_eq!(cosine(&a, &SparseVector::default()), 0.0);
        assert!((a.dot_dense(&[1.0, 1.0]) - 1.4).abs() < 1e-15);
    }

    #[test]
    fn normalization() {
        let v = SparseVector::from_dense(&[3.0, 0.0, 4.0]).normalized();
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!(SparseVector::default().normalized().is_zero());
        assert_eq!(dense_cosine(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
    }
}
