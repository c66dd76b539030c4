//! Automorphisms of the chain algebra: unitary-conjugation maps
//! α(x) = U†xU in the Heisenberg picture, with locality metadata.
//!
//! The action is stored structurally where possible (site permutations,
//! local-gate circuits, compositions) so that α(x) of a local operator stays
//! a small dense matrix even when the global unitary would not fit in
//! memory; a dense global unitary is materialized only on demand and only
//! under the chain's dimension cap.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::chain::{Boundary, ChainSpec, Region};
use crate::error::{QcaError, Result};
use crate::linalg;
use crate::op::ChainOperator;
use crate::UNITARITY_TOL;

/// Locality metadata carried by an automorphism.
#[derive(Debug, Clone)]
pub enum Locality {
    ExactRadius(usize),
    Measured(TailProfile),
    Unknown,
}

/// Measured tail profile f̂(r): near-inclusion error of α(𝒜_X) into the
/// algebra of B(X,r), per radius.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TailProfile {
    /// (r, f̂(r)) samples after isotonic (running-minimum) post-processing.
    pub samples: Vec<(usize, f64)>,
    /// raw values before the isotonic pass
    pub raw: Vec<(usize, f64)>,
    pub method: TailMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum TailMethod {
    RegionDistance,
    CommutatorSup,
}

#[derive(Debug, Clone)]
enum Action {
    /// α(x) = u† x u with a dense global unitary.
    Dense(Array2<C64>),
    /// Operator content of site i moves to site perm[i].
    SitePerm(Vec<usize>),
    /// Layers of disjoint local gates, listed in application (Schrödinger)
    /// order; the conjugation applies them gate by gate.
    Circuit(Vec<Vec<(Region, Array2<C64>)>>),
    /// α = parts[n-1] ∘ ... ∘ parts[0] (parts[0] acts first).
    Composed(Vec<Automorphism>),
}

#[derive(Debug, Clone)]
pub struct Automorphism {
    chain: ChainSpec,
    action: Action,
    locality: Locality,
}

impl Automorphism {
    /// From a dense unitary on the full chain (checked against
    /// [`UNITARITY_TOL`]).
    pub fn from_unitary(chain: &ChainSpec, u: Array2<C64>, locality: Locality) -> Result<Self> {
        let d = chain.total_dim();
        if u.nrows() != d || u.ncols() != d {
            return Err(QcaError::SpecMismatch(format!(
                "unitary is {}x{}, chain dimension is {d}",
                u.nrows(),
                u.ncols()
            )));
        }
        let defect = linalg::unitarity_defect(&u);
        if defect > UNITARITY_TOL {
            return Err(QcaError::NumericalFailure(format!(
                "matrix is not unitary: ‖U†U − I‖ = {defect:.3e}"
            )));
        }
        Ok(Automorphism { chain: chain.clone(), action: Action::Dense(u), locality })
    }

    pub fn identity(chain: &ChainSpec) -> Self {
        Automorphism {
            chain: chain.clone(),
            action: Action::Circuit(vec![]),
            locality: Locality::ExactRadius(0),
        }
    }

    /// Site permutation: the operator content of site i moves to site
    /// perm[i].  Local dimensions must match along the permutation.
    pub fn site_permutation(chain: &ChainSpec, perm: Vec<usize>) -> Result<Self> {
        let n = chain.num_sites();
        if perm.len() != n {
            return Err(QcaError::SpecMismatch("permutation length mismatch".into()));
        }
        let mut seen = vec![false; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || seen[p] {
                return Err(QcaError::SpecMismatch("not a permutation".into()));
            }
            seen[p] = true;
            if chain.dim_at(i) != chain.dim_at(p) {
                return Err(QcaError::SpecMismatch(format!(
                    "site {i} (dim {}) cannot move to site {p} (dim {})",
                    chain.dim_at(i),
                    chain.dim_at(p)
                )));
            }
        }
        let radius = (0..n)
            .map(|i| chain.site_distance(i, perm[i]))
            .max()
            .unwrap_or(0);
        Ok(Automorphism {
            chain: chain.clone(),
            action: Action::SitePerm(perm),
            locality: Locality::ExactRadius(radius),
        })
    }

    /// Circuit of layers of local gates; within a layer the gate regions
    /// must be disjoint.  Layers are listed in application order.
    pub fn circuit(
        chain: &ChainSpec,
        layers: Vec<Vec<(Region, Array2<C64>)>>,
        locality: Locality,
    ) -> Result<Self> {
        for layer in &layers {
            let mut used = vec![false; chain.num_sites()];
            for (region, gate) in layer {
                for &s in region.sites() {
                    if used[s] {
                        return Err(QcaError::OverlapInLayer { site: s });
                    }
                    used[s] = true;
                }
                let d = chain.region_dim(region);
                if gate.nrows() != d || gate.ncols() != d {
                    return Err(QcaError::SpecMismatch(format!(
                        "gate is {}x{} on a region of dimension {d}",
                        gate.nrows(),
                        gate.ncols()
                    )));
                }
                let defect = linalg::unitarity_defect(gate);
                if defect > UNITARITY_TOL {
                    return Err(QcaError::NumericalFailure(format!(
                        "gate is not unitary: defect {defect:.3e}"
                    )));
                }
            }
        }
        Ok(Automorphism { chain: chain.clone(), action: Action::Circuit(layers), locality })
    }

    /// Composition: (a2 ∘ a1)(x) = a2(a1(x)); a1 acts first.
    pub fn compose(a2: &Automorphism, a1: &Automorphism) -> Result<Self> {
        if a2.chain != a1.chain {
            return Err(QcaError::SpecMismatch("composition across different chains".into()));
        }
        let locality = match (&a1.locality, &a2.locality) {
            (Locality::ExactRadius(r1), Locality::ExactRadius(r2)) => {
                Locality::ExactRadius(r1 + r2)
            }
            _ => Locality::Unknown,
        };
        let mut parts = Vec::new();
        let mut push = |a: &Automorphism| match &a.action {
            Action::Composed(inner) => parts.extend(inner.iter().cloned()),
            _ => parts.push(a.clone()),
        };
        push(a1);
        push(a2);
        Ok(Automorphism { chain: a1.chain.clone(), action: Action::Composed(parts), locality })
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn locality(&self) -> &Locality {
        &self.locality
    }

    pub fn set_locality(&mut self, locality: Locality) {
        self.locality = locality;
    }

    /// Declared exact radius, when one is present.
    pub fn exact_radius(&self) -> Option<usize> {
        match self.locality {
            Locality::ExactRadius(r) => Some(r),
            _ => None,
        }
    }

    /// α(x) = U†xU; the support of the result is the lightcone of the
    /// structural action (full chain for dense unitaries).
    pub fn apply(&self, x: &ChainOperator) -> Result<ChainOperator> {
        match &self.action {
            Action::Dense(u) => {
                let full = self.chain.full_region();
                let xe = x.embed(&full)?;
                let m = linalg::dagger(u).dot(xe.matrix()).dot(u);
                ChainOperator::new(self.chain.clone(), full, m)
            }
            Action::SitePerm(perm) => {
                let sites = x.support().sites();
                let new_sites: Vec<usize> = sites.iter().map(|&s| perm[s]).collect();
                let target = Region::from_sites(new_sites.clone());
                // legs are ordered by the old (sorted) site order; permute
                // into the sorted order of the relocated sites
                let dims: Vec<usize> =
                    sites.iter().map(|&s| self.chain.dim_at(s)).collect();
                let leg_perm: Vec<usize> = new_sites
                    .iter()
                    .map(|ns| target.sites().iter().position(|t| t == ns).unwrap())
                    .collect();
                let m = linalg::permute_operator_legs(x.matrix(), &dims, &leg_perm);
                ChainOperator::new(self.chain.clone(), target, m)
            }
            Action::Circuit(layers) => {
                // Heisenberg: U = L_k ... L_1 (application order), so
                // α(x) = U†xU = L_1†( ... L_k† x L_k ... )L_1
                let mut cur = x.clone();
                for layer in layers.iter().rev() {
                    for (region, gate) in layer {
                        if region.is_disjoint(cur.support()) {
                            continue;
                        }
                        let joint = cur.support().union(region);
                        let xe = cur.embed(&joint)?;
                        let ge = ChainOperator::new(
                            self.chain.clone(),
                            region.clone(),
                            gate.clone(),
                        )?
                        .embed(&joint)?;
                        let m = linalg::dagger(ge.matrix())
                            .dot(xe.matrix())
                            .dot(ge.matrix());
                        cur = ChainOperator::new(self.chain.clone(), joint, m)?;
                    }
                }
                Ok(cur)
            }
            Action::Composed(parts) => {
                let mut cur = x.clone();
                for p in parts {
                    cur = p.apply(&cur)?;
                }
                Ok(cur)
            }
        }
    }

    /// The inverse automorphism.
    pub fn inverse(&self) -> Automorphism {
        let locality = self.locality.clone();
        let action = match &self.action {
            Action::Dense(u) => Action::Dense(linalg::dagger(u)),
            Action::SitePerm(perm) => {
                let mut inv = vec![0usize; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    inv[p] = i;
                }
                Action::SitePerm(inv)
            }
            Action::Circuit(layers) => Action::Circuit(
                layers
                    .iter()
                    .rev()
                    .map(|layer| {
                        layer
                            .iter()
                            .map(|(r, g)| (r.clone(), linalg::dagger(g)))
                            .collect()
                    })
                    .collect(),
            ),
            Action::Composed(parts) => {
                Action::Composed(parts.iter().rev().map(|p| p.inverse()).collect())
            }
        };
        Automorphism { chain: self.chain.clone(), action, locality }
    }

    /// Dense global unitary U with α(x) = U†xU, materialized on demand.
    /// Errors with `DimensionCap` when the chain dimension exceeds the cap.
    pub fn unitary(&self) -> Result<Array2<C64>> {
        let d = self.chain.total_dim();
        if d > self.chain.max_dim() {
            return Err(QcaError::DimensionCap {
                dim: d,
                cap: self.chain.max_dim(),
                context: "dense unitary materialization".into(),
            });
        }
        match &self.action {
            Action::Dense(u) => Ok(u.clone()),
            Action::SitePerm(perm) => {
                // the Schrödinger U with U†·(x at s)·U = x at perm[s] sends
                // the basis vector whose digit at site perm[k] is a to the
                // one with digit a at site k (pinned by tests)
                let n = self.chain.num_sites();
                let dims: Vec<usize> = (0..n).map(|s| self.chain.dim_at(s)).collect();
                let mut strides = vec![1usize; n];
                for k in (0..n - 1).rev() {
                    strides[k] = strides[k + 1] * dims[k + 1];
                }
                let mut u = Array2::<C64>::zeros((d, d));
                let mut digits = vec![0usize; n];
                for col in 0..d {
                    let mut rem = col;
                    for k in (0..n).rev() {
                        digits[k] = rem % dims[k];
                        rem /= dims[k];
                    }
                    let mut row = 0usize;
                    for k in 0..n {
                        row += digits[perm[k]] * strides[k];
                    }
                    u[[row, col]] = C64::new(1.0, 0.0);
                }
                Ok(u)
            }
            Action::Circuit(layers) => {
                let full = self.chain.full_region();
                let mut u = Array2::<C64>::eye(d);
                for layer in layers {
                    for (region, gate) in layer {
                        let ge = ChainOperator::new(self.chain.clone(), region.clone(), gate.clone())?
                            .embed(&full)?;
                        u = ge.matrix().dot(&u);
                    }
                }
                Ok(u)
            }
            Action::Composed(parts) => {
                // α = p_n ∘ ... ∘ p_1 with α(x) = U†xU needs U = U_1 U_2 ⋯ U_n
                let mut u = Array2::<C64>::eye(d);
                for p in parts {
                    u = u.dot(&p.unitary()?);
                }
                Ok(u)
            }
        }
    }

    /// Whether the structural action keeps images of local operators local
    /// (everything except a dense global unitary).
    pub fn is_structured(&self) -> bool {
        match &self.action {
            Action::Dense(_) => false,
            Action::SitePerm(_) | Action::Circuit(_) => true,
            Action::Composed(parts) => parts.iter().all(|p| p.is_structured()),
        }
    }

    /// Restricted distance ‖(self − other)|_{𝒜_X}‖, lower-bounded by the
    /// Weyl spanning set plus a randomized search over unit-norm Hermitian
    /// probes on X.
    pub fn restricted_distance_lb(
        &self,
        other: &Automorphism,
        region: &Region,
        probes: usize,
        seed: u64,
    ) -> Result<f64> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = self.chain.region_dim(region);
        let mut best = 0.0_f64;
        for b in crate::op::weyl_basis(&self.chain, region) {
            let diff = self.apply(&b)?.sub(&other.apply(&b)?)?;
            best = best.max(diff.operator_norm());
        }
        for _ in 0..probes {
            let h = linalg::random_hermitian(d, &mut rng);
            let norm = linalg::operator_norm(&h);
            let op = ChainOperator::new(self.chain.clone(), region.clone(), h)?
                .scale(C64::new(1.0 / norm, 0.0));
            let diff = self.apply(&op)?.sub(&other.apply(&op)?)?;
            best = best.max(diff.operator_norm());
        }
        Ok(best)
    }

    /// Exact distance ‖ad_U − ad_V‖ when both automorphisms can materialize
    /// unitaries: the smallest-enclosing-circle formula.
    pub fn conjugation_distance_to(&self, other: &Automorphism) -> Result<f64> {
        let u = self.unitary()?;
        let v = other.unitary()?;
        Ok(crate::stability::conjugation_distance(&u, &v))
    }
}

/// Builds a tensor-product automorphism on the sitewise product chain.
///
/// The product chain interleaves the two chains fine-grained (site i of the
/// first chain becomes site 2i, site i of the second becomes 2i+1), so a
/// blocking factor of 2 recovers the sitewise product with local dimensions
/// d1·d2.
pub fn tensor_product(a: &Automorphism, b: &Automorphism) -> Result<(ChainSpec, Automorphism)> {
    let ca = a.chain();
    let cb = b.chain();
    if ca.num_sites() != cb.num_sites() || ca.boundary() != cb.boundary() {
        return Err(QcaError::SpecMismatch(
            "tensor factors need equal length and boundary".into(),
        ));
    }
    let n = ca.num_sites();
    let mut dims = Vec::with_capacity(2 * n);
    for i in 0..n {
        dims.push(ca.dim_at(i));
        dims.push(cb.dim_at(i));
    }
    let cap = ca
        .max_dim()
        .max(cb.max_dim())
        .max(ca.total_dim().saturating_mul(cb.total_dim()));
    let product = ChainSpec::with_caps(dims, ca.boundary(), cap, ca.choi_amp_cap())?;
    let lifted_a = lift_to_product(a, &product, 0)?;
    let lifted_b = lift_to_product(b, &product, 1)?;
    let combined = Automorphism::compose(&lifted_b, &lifted_a)?;
    Ok((product, combined))
}

/// Re-expresses an automorphism of one factor chain on the interleaved
/// product chain (`offset` 0 for even legs, 1 for odd legs).
fn lift_to_product(a: &Automorphism, product: &ChainSpec, offset: usize) -> Result<Automorphism> {
    let n = a.chain().num_sites();
    let map_site = |s: usize| 2 * s + offset;
    let action = match &a.action {
        Action::SitePerm(perm) => {
            let mut full: Vec<usize> = (0..2 * n).collect();
            for (i, &p) in perm.iter().enumerate() {
                full[map_site(i)] = map_site(p);
            }
            Action::SitePerm(full)
        }
        Action::Circuit(layers) => Action::Circuit(
            layers
                .iter()
                .map(|layer| {
                    layer
                        .iter()
                        .map(|(r, g)| {
                            let region = Region::from_sites(
                                r.sites().iter().map(|&s| map_site(s)).collect(),
                            );
                            // the affine site map preserves ascending leg
                            // order, so the gate matrix carries over
                            (region, g.clone())
                        })
                        .collect()
                })
                .collect(),
        ),
        Action::Composed(parts) => {
            let mut lifted = Vec::new();
            for p in parts {
                lifted.push(lift_to_product(p, product, offset)?);
            }
            Action::Composed(lifted)
        }
        Action::Dense(_) => {
            return Err(QcaError::SpecMismatch(
                "tensor products of dense automorphisms are not supported".into(),
            ))
        }
    };
    Ok(Automorphism {
        chain: product.clone(),
        action,
        locality: match a.locality {
            // one factor-chain site = two product-chain sites
            Locality::ExactRadius(r) => Locality::ExactRadius(2 * r + 1),
            _ => Locality::Unknown,
        },
    })
}

/// Measures the tail profile f̂(r) of an automorphism by sweeping intervals
/// up to `max_interval` sites (the default policy caps this at
/// min(num_sites/2, 4)).
pub fn measure_tails(
    a: &Automorphism,
    r_max: usize,
    max_interval: usize,
    method: TailMethod,
) -> Result<TailProfile> {
    let chain = a.chain();
    let n = chain.num_sites();
    let mut raw = Vec::new();
    let mut images: Vec<(Region, ChainOperator)> = Vec::new();
    for len in 1..=max_interval.min(n) {
        let starts: Vec<usize> = match chain.boundary() {
            Boundary::Periodic => (0..n).collect(),
            Boundary::Open => (0..=n - len).collect(),
        };
        for s in starts {
            let region = chain.interval(s, len)?;
            for x in crate::op::weyl_basis(chain, &region) {
                if x.support().is_empty() {
                    continue; // identity element
                }
                let img = a.apply(&x)?;
                images.push((region.clone(), img));
            }
        }
    }
    for r in 0..=r_max {
        let mut worst = 0.0_f64;
        match method {
            TailMethod::RegionDistance => {
                for (region, img) in &images {
                    let ball = chain.ball(region, r);
                    if ball.len() == n {
                        continue; // ball swallowed the chain: distance 0
                    }
                    if img.support().is_subset_of(&ball) {
                        continue;
                    }
                    let e = img.conditional_expectation(&ball);
                    let diff = img.sub(&e)?;
                    let fr = linalg::frobenius_norm(diff.matrix());
                    if fr <= worst.max(1e-12) {
                        continue; // spectral ≤ Frobenius (probes have norm 1)
                    }
                    let eps = linalg::operator_norm(diff.matrix());
                    worst = worst.max(eps);
                }
            }
            TailMethod::CommutatorSup => {
                for (region, img) in &images {
                    let ball = chain.ball(region, r);
                    let far = ball.complement_in(chain);
                    if far.is_empty() {
                        continue;
                    }
                    // single-site far probes as the spanning set keep the
                    // sweep affordable
                    for &fs in far.sites() {
                        for y in crate::op::weyl_basis(chain, &Region::site(fs)) {
                            if y.support().is_empty() {
                                continue;
                            }
                            let c = crate::op::commutator_norm(img, &y)?;
                            worst = worst.max(c);
                        }
                    }
                }
            }
        }
        raw.push((r, worst));
    }
    // isotonic: running minimum makes the profile nonincreasing
    let mut samples = raw.clone();
    let mut running = f64::INFINITY;
    for s in &mut samples {
        running = running.min(s.1);
        s.1 = running;
    }
    if let Locality::ExactRadius(rad) = a.locality() {
        for s in &mut samples {
            if s.0 >= *rad {
                s.1 = 0.0;
            }
        }
    }
    Ok(TailProfile { samples, raw, method })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::{pauli_string, weyl_basis};

    fn ring(n: usize) -> ChainSpec {
        ChainSpec::uniform(n, 2, Boundary::Periodic).unwrap()
    }

    fn shift_by_one(chain: &ChainSpec) -> Automorphism {
        let n = chain.num_sites();
        // α(x at site s) = x at site s-1
        let perm: Vec<usize> = (0..n).map(|s| (s + n - 1) % n).collect();
        Automorphism::site_permutation(chain, perm).unwrap()
    }

    #[test]
    fn site_perm_moves_operators() {
        let chain = ring(4);
        let a = shift_by_one(&chain);
        let z3 = pauli_string(&chain, 3, "Z").unwrap();
        let img = a.apply(&z3).unwrap();
        assert_eq!(img.support().sites(), &[2]);
        let z2 = pauli_string(&chain, 2, "Z").unwrap();
        assert!(img.sub(&z2).unwrap().operator_norm() < 1e-14);
    }

    #[test]
    fn site_perm_matches_dense_unitary() {
        let chain = ring(4);
        let a = shift_by_one(&chain);
        let u = a.unitary().unwrap();
        assert!(linalg::unitarity_defect(&u) < 1e-12);
        let dense = Automorphism::from_unitary(&chain, u, Locality::Unknown).unwrap();
        for x in weyl_basis(&chain, &Region::from_sites(vec![0, 2])) {
            let lhs = a.apply(&x).unwrap();
            let rhs = dense.apply(&x).unwrap();
            assert!(lhs.sub(&rhs).unwrap().operator_norm() < 1e-12);
        }
    }

    #[test]
    fn circuit_conjugation_matches_dense() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let chain = ring(4);
        let g1 = linalg::random_unitary(4, &mut rng);
        let g2 = linalg::random_unitary(4, &mut rng);
        let layers = vec![
            vec![(Region::from_sites(vec![0, 1]), g1)],
            vec![(Region::from_sites(vec![1, 2]), g2)],
        ];
        let a = Automorphism::circuit(&chain, layers, Locality::Unknown).unwrap();
        let dense =
            Automorphism::from_unitary(&chain, a.unitary().unwrap(), Locality::Unknown).unwrap();
        for x in weyl_basis(&chain, &Region::site(1)) {
            let lhs = a.apply(&x).unwrap();
            let rhs = dense.apply(&x).unwrap();
            assert!(lhs.sub(&rhs).unwrap().operator_norm() < 1e-11);
        }
    }

    #[test]
    fn inverse_undoes_apply() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let chain = ring(4);
        let g = linalg::random_unitary(4, &mut rng);
        let circ = Automorphism::circuit(
            &chain,
            vec![vec![(Region::from_sites(vec![1, 2]), g)]],
            Locality::Unknown,
        )
        .unwrap();
        let shift = shift_by_one(&chain);
        let a = Automorphism::compose(&circ, &shift).unwrap();
        let inv = a.inverse();
        for x in weyl_basis(&chain, &Region::site(2)) {
            let roundtrip = inv.apply(&a.apply(&x).unwrap()).unwrap();
            assert!(roundtrip.sub(&x).unwrap().operator_norm() < 1e-11);
        }
    }

    #[test]
    fn overlapping_layer_rejected() {
        let chain = ring(4);
        let id2 = Array2::<C64>::eye(4);
        let layers = vec![vec![
            (Region::from_sites(vec![0, 1]), id2.clone()),
            (Region::from_sites(vec![1, 2]), id2),
        ]];
        assert!(matches!(
            Automorphism::circuit(&chain, layers, Locality::Unknown),
            Err(QcaError::OverlapInLayer { site: 1 })
        ));
    }

    #[test]
    fn tails_of_shift() {
        let chain = ring(6);
        let a = shift_by_one(&chain);
        let prof = measure_tails(&a, 3, 2, TailMethod::RegionDistance).unwrap();
        // f̂(0) = 1 (a shifted single-site operator is orthogonal to its old
        // site), f̂(r≥1) = 0
        assert!((prof.samples[0].1 - 1.0).abs() < 1e-9);
        for s in &prof.samples[1..] {
            assert!(s.1 < 1e-12);
        }
    }

    #[test]
    fn tensor_product_interleaves() {
        let ca = ring(4);
        let cb = ChainSpec::uniform(4, 3, Boundary::Periodic).unwrap();
        let a = shift_by_one(&ca);
        let b = Automorphism::identity(&cb);
        let (product, t) = tensor_product(&a, &b).unwrap();
        assert_eq!(product.local_dims(), &[2, 3, 2, 3, 2, 3, 2, 3]);
        // a qubit operator at product-site 2 (= first-chain site 1) moves to
        // product-site 0; the qutrit legs stay put
        let x = pauli_string(&product, 2, "X").unwrap();
        let img = t.apply(&x).unwrap();
        assert_eq!(img.support().sites(), &[0]);
    }
}
