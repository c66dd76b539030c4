//! Index values on the lattice ℤ[{log pᵢ}] over the primes dividing the
//! local dimensions, with nearest-point rounding.

use serde::Serialize;

/// A real index estimate together with its rounding onto the admissible
/// lattice of integer combinations of logs of primes (natural logarithms).
#[derive(Debug, Clone, Serialize)]
pub struct IndexValue {
    pub raw: f64,
    /// (prime, integer coefficient) pairs of the rounded value.
    pub lattice: Vec<(u64, i64)>,
    pub rounded: f64,
    /// |raw − rounded|; reported, never hidden.
    pub residual: f64,
}

impl IndexValue {
    /// Rounds `raw` to the nearest Σ kᵢ·log pᵢ with |kᵢ| ≤ 4, ties broken
    /// toward smaller Σ|kᵢ|.
    pub fn round(raw: f64, primes: &[u64]) -> IndexValue {
        let mut best: Option<(f64, i64, Vec<i64>)> = None; // (dist, Σ|k|, ks)
        let mut ks = vec![0i64; primes.len()];
        enumerate(primes, 0, &mut ks, &mut |ks| {
            let val: f64 = ks
                .iter()
                .zip(primes)
                .map(|(&k, &p)| k as f64 * (p as f64).ln())
                .sum();
            let dist = (raw - val).abs();
            let weight: i64 = ks.iter().map(|k| k.abs()).sum();
            let better = match &best {
                None => true,
                Some((bd, bw, _)) => dist < bd - 1e-15 || (dist < bd + 1e-15 && weight < *bw),
            };
            if better {
                best = Some((dist, weight, ks.to_vec()));
            }
        });
        let (residual, _, ks) = best.unwrap_or((raw.abs(), 0, vec![0; primes.len()]));
        let rounded: f64 = ks
            .iter()
            .zip(primes)
            .map(|(&k, &p)| k as f64 * (p as f64).ln())
            .sum();
        IndexValue {
            raw,
            lattice: primes.iter().cloned().zip(ks).collect(),
            rounded,
            residual,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.lattice.iter().all(|&(_, k)| k == 0)
    }
}

fn enumerate(primes: &[u64], pos: usize, ks: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if pos == primes.len() {
        f(ks);
        return;
    }
    for k in -4..=4 {
        ks[pos] = k;
        enumerate(primes, pos + 1, ks, f);
    }
}

/// The set of primes dividing any of the local dimensions.
pub fn prime_set(local_dims: &[usize]) -> Vec<u64> {
    let mut primes = std::collections::BTreeSet::new();
    for &d in local_dims {
        let mut n = d as u64;
        let mut p = 2;
        while p * p <= n {
            while n % p == 0 {
                primes.insert(p);
                n /= p;
            }
            p += 1;
        }
        if n > 1 {
            primes.insert(n);
        }
    }
    primes.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_sets() {
        assert_eq!(prime_set(&[2, 2, 2]), vec![2]);
        assert_eq!(prime_set(&[6, 4]), vec![2, 3]);
        assert_eq!(prime_set(&[12]), vec![2, 3]);
    }

    #[test]
    fn rounds_to_log2() {
        let v = IndexValue::round(0.6931, &[2]);
        assert_eq!(v.lattice, vec![(2, 1)]);
        assert!((v.rounded - 2f64.ln()).abs() < 1e-12);
        assert!(v.residual < 1e-3);
    }

    #[test]
    fn ties_prefer_smaller_weight() {
        // halfway between 0 and log 2 rounds to 0 only when closer; at an
        // exact tie the smaller Σ|k| wins
        let v = IndexValue::round(2f64.ln() / 2.0, &[2]);
        assert!(v.is_zero());
    }

    #[test]
    fn mixed_primes() {
        let target = 2.0 * 2f64.ln() - 3f64.ln();
        let v = IndexValue::round(target + 1e-5, &[2, 3]);
        assert_eq!(v.lattice, vec![(2, 2), (3, -1)]);
        assert!(v.residual < 2e-5);
    }
}
