//! Constructive stability results for finite-dimensional operator algebras:
//! making near-identity homomorphisms inner by an explicit twirl on the
//! doubled space, rotating near inclusions into exact inclusions through a
//! Stinespring dilation, exact conjugation distances from the smallest
//! enclosing circle of the spectrum, and randomized verification suites for
//! the commutator inequalities.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{twirl_onto_commutant, FactorBlock, OperatorAlgebra};
use crate::auto::Automorphism;
use crate::chain::{ChainSpec, Region};
use crate::error::{QcaError, Result};
use crate::linalg;
use crate::op::ChainOperator;

/// A family of near-identity unital *-homomorphisms Φᵢ on mutually commuting
/// source algebras, each represented by the images of the source basis.
pub struct NearHomomorphism {
    chain: ChainSpec,
    ambient: Region,
    sources: Vec<OperatorAlgebra>,
    /// Φᵢ applied to each basis element of source i, on the common ambient.
    images: Vec<Vec<Array2<C64>>>,
    /// measured (or exactly known) sup of ‖Φᵢ(a)−a‖/‖a‖
    gammas: Vec<f64>,
}

impl NearHomomorphism {
    /// Builds and verifies the family: sources must commute pairwise and each
    /// map must be unital and *-multiplicative on its source to 1e-9.
    ///
    /// `exact_gammas`, when given, overrides the measured per-map distances
    /// (useful when the map is a conjugation with an exactly computable
    /// superoperator distance).
    pub fn new(
        chain: &ChainSpec,
        pairs: Vec<(OperatorAlgebra, Vec<Array2<C64>>)>,
        exact_gammas: Option<Vec<f64>>,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(QcaError::SpecMismatch("no homomorphisms given".into()));
        }
        let mut ambient = Region::empty();
        for (s, _) in &pairs {
            ambient = ambient.union(s.ambient());
        }
        let d = chain.region_dim(&ambient);
        let mut sources = Vec::new();
        let mut images = Vec::new();
        for (s, imgs) in pairs {
            if imgs.len() != s.dim() {
                return Err(QcaError::SpecMismatch(
                    "one image per source basis element required".into(),
                ));
            }
            let lifted: Vec<Array2<C64>> = {
                let mut v = Vec::with_capacity(imgs.len());
                for (b, img) in s.basis().iter().zip(&imgs) {
                    let _ = b;
                    let op = ChainOperator::new(chain.clone(), s.ambient().clone(), img.clone())?;
                    v.push(op.embed(&ambient)?.matrix().clone());
                }
                v
            };
            sources.push(lift_algebra(&s, chain, &ambient)?);
            images.push(lifted);
        }
        // pairwise commutation of sources
        for i in 0..sources.len() {
            for j in i + 1..sources.len() {
                for a in sources[i].basis() {
                    for b in sources[j].basis() {
                        let c = a.dot(b) - b.dot(a);
                        if linalg::operator_norm(&c) > 1e-9 {
                            return Err(QcaError::SpecMismatch(format!(
                                "sources {i} and {j} do not commute"
                            )));
                        }
                    }
                }
            }
        }
        // verify each map: unital and multiplicative on the basis
        for (s, imgs) in sources.iter().zip(&images) {
            let apply = |m: &Array2<C64>| -> Array2<C64> {
                // linear extension through HS coefficients in the source basis
                let mut out = Array2::<C64>::zeros((d, d));
                for (b, img) in s.basis().iter().zip(imgs) {
                    let c = linalg::hs_dot(b, m) / C64::new(d as f64, 0.0);
                    out = &out + &img.mapv(|z| z * c);
                }
                out
            };
            let id_img = apply(&Array2::eye(d));
            if linalg::operator_norm(&(&id_img - &Array2::<C64>::eye(d))) > 1e-9 {
                return Err(QcaError::NotAnAutomorphism {
                    residual: linalg::operator_norm(&(&id_img - &Array2::<C64>::eye(d))),
                });
            }
            let mut worst = 0.0_f64;
            for (a, ia) in s.basis().iter().zip(imgs) {
                for (b, ib) in s.basis().iter().zip(imgs) {
                    let lhs = apply(&a.dot(b));
                    let rhs = ia.dot(ib);
                    worst = worst.max(linalg::operator_norm(&(&lhs - &rhs)));
                }
                let star = apply(&linalg::dagger(a));
                worst = worst.max(linalg::operator_norm(&(&star - &linalg::dagger(ia))));
            }
            if worst > 1e-9 {
                return Err(QcaError::NotAnAutomorphism { residual: worst });
            }
        }
        let gammas = match exact_gammas {
            Some(g) => g,
            None => sources
                .iter()
                .zip(&images)
                .map(|(s, imgs)| {
                    let mut g = 0.0_f64;
                    for (b, img) in s.basis().iter().zip(imgs) {
                        let norm = linalg::operator_norm(b);
                        if norm < 1e-14 {
                            continue;
                        }
                        g = g.max(linalg::operator_norm(&(img - b)) / norm);
                    }
                    g
                })
                .collect(),
        };
        Ok(NearHomomorphism { chain: chain.clone(), ambient, sources, images, gammas })
    }

    /// Conjugation maps Φᵢ(a) = wᵢ† a wᵢ with the exact superoperator
    /// distance (smallest-enclosing-circle diameter) as gamma.
    pub fn from_conjugations(
        chain: &ChainSpec,
        pairs: Vec<(OperatorAlgebra, Array2<C64>)>,
    ) -> Result<Self> {
        let mut ambient = Region::empty();
        for (s, _) in &pairs {
            ambient = ambient.union(s.ambient());
        }
        let mut built = Vec::new();
        let mut gammas = Vec::new();
        for (s, w) in pairs {
            let we = ChainOperator::new(chain.clone(), s.ambient().clone(), w.clone())?
                .embed(&ambient)?;
            let lifted = lift_algebra(&s, chain, &ambient)?;
            let wd = linalg::dagger(we.matrix());
            let imgs: Vec<Array2<C64>> = lifted
                .basis()
                .iter()
                .map(|b| wd.dot(b).dot(we.matrix()))
                .collect();
            gammas.push(conjugation_distance(&Array2::eye(we.matrix().nrows()), we.matrix()));
            built.push((lifted, imgs));
        }
        NearHomomorphism::new(chain, built, Some(gammas))
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn epsilon(&self) -> f64 {
        self.gammas.iter().sum()
    }

    pub fn ambient(&self) -> &Region {
        &self.ambient
    }
}

fn lift_algebra(
    alg: &OperatorAlgebra,
    chain: &ChainSpec,
    ambient: &Region,
) -> Result<OperatorAlgebra> {
    if alg.ambient() == ambient {
        return Ok(alg.clone());
    }
    let ops = alg.basis_ops();
    let lifted: Vec<ChainOperator> =
        ops.iter().map(|o| o.embed(ambient)).collect::<Result<_>>()?;
    OperatorAlgebra::span_on(chain, ambient, &lifted)
}

/// Outcome of [`make_inner`].
pub struct InnerUnitary {
    /// the intertwining unitary, on the homomorphism's ambient region
    pub unitary: Array2<C64>,
    /// ε = Σ γᵢ used in the norm bound
    pub epsilon: f64,
    /// max over source bases of ‖Φ(a) − u†au‖
    pub intertwining_residual: f64,
    /// ‖I − u‖ against the bound √2·ε/(1+(1−ε²)^½)^½
    pub norm_distance: f64,
    pub norm_bound: f64,
}

/// Makes a family of commuting near-identity homomorphisms inner: finds one
/// unitary u with Φᵢ(a) = u†au for all i, via nested exact twirls of the
/// corner element on the doubled space H⊕H followed by a polar
/// decomposition.
pub fn make_inner(h: &NearHomomorphism) -> Result<InnerUnitary> {
    let eps = h.epsilon();
    if eps >= 1.0 {
        return Err(QcaError::EpsilonTooLarge { eps, max: 1.0 });
    }
    let d = h.chain.region_dim(&h.ambient);
    // doubled space: block 2x2 matrices over H
    let two = 2 * d;
    let embed_pair = |a: &Array2<C64>, b: &Array2<C64>| -> Array2<C64> {
        let mut m = Array2::<C64>::zeros((two, two));
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = a[[i, j]];
                m[[d + i, d + j]] = b[[i, j]];
            }
        }
        m
    };
    let mut x = Array2::<C64>::zeros((two, two));
    for i in 0..d {
        x[[i, d + i]] = C64::new(1.0, 0.0);
    }
    for (s, imgs) in h.sources.iter().zip(&h.images) {
        let w = s.wedderburn()?;
        // units of C = {a ⊕ Φ(a)}: pair each source unit with its image
        let blocks: Vec<FactorBlock> = w
            .blocks
            .iter()
            .map(|b| {
                let units: Vec<Array2<C64>> = b
                    .units
                    .iter()
                    .map(|e| {
                        // Φ(e) through the HS expansion in the source basis
                        let mut img = Array2::<C64>::zeros((d, d));
                        for (bb, ib) in s.basis().iter().zip(imgs) {
                            let c = linalg::hs_dot(bb, e) / C64::new(d as f64, 0.0);
                            img = &img + &ib.mapv(|z| z * c);
                        }
                        embed_pair(e, &img)
                    })
                    .collect();
                FactorBlock {
                    central_projection: embed_pair(
                        &b.central_projection,
                        &b.central_projection,
                    ),
                    k: b.k,
                    multiplicity: b.multiplicity * 2,
                    units,
                }
            })
            .collect();
        x = twirl_onto_commutant(&blocks, &x);
    }
    // y = top-right block
    let mut y = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            y[[i, j]] = x[[i, d + j]];
        }
    }
    let y_dist = linalg::operator_norm(&(&y - &Array2::<C64>::eye(d)));
    if y_dist > eps + 1e-9 {
        return Err(QcaError::NumericalFailure(format!(
            "twirled intertwiner strayed: ‖I−y‖ = {y_dist:.3e} > ε = {eps:.3e}"
        )));
    }
    let (u, smin) = linalg::polar_unitary(&y);
    if smin < 1e-10 {
        return Err(QcaError::SingularY { sigma_min: smin });
    }
    let ud = linalg::dagger(&u);
    let mut residual = 0.0_f64;
    for (s, imgs) in h.sources.iter().zip(&h.images) {
        for (b, img) in s.basis().iter().zip(imgs) {
            let conj = ud.dot(b).dot(&u);
            residual = residual.max(linalg::operator_norm(&(&conj - img)));
        }
    }
    let norm_distance = linalg::operator_norm(&(&u - &Array2::<C64>::eye(d)));
    let norm_bound = 2f64.sqrt() * eps / (1.0 + (1.0 - eps * eps).sqrt()).sqrt();
    Ok(InnerUnitary {
        unitary: u,
        epsilon: eps,
        intertwining_residual: residual,
        norm_distance,
        norm_bound,
    })
}

/// Outcome of [`rotate_into`].
pub struct Rotation {
    pub unitary: Array2<C64>,
    /// region of the unitary (the joint ambient)
    pub ambient: Region,
    pub eps_in: f64,
    /// max residual ‖u†au − E_W(u†au)‖ over the rotated basis
    pub inclusion_residual: f64,
    pub norm_distance: f64,
    /// 12 · eps_in
    pub norm_bound: f64,
}

/// Rotates an algebra ε-included in a region algebra into an exact
/// inclusion: returns a unitary u with u†·a·u ⊆ 𝒜_W and ‖I−u‖ ≤ 12ε.
///
/// The construction dilates the conditional expectation onto the region
/// algebra with a maximally entangled ancilla pair, twirls the corner
/// projection over the rotated algebra, splits the spectrum, and makes the
/// resulting near-identity homomorphism inner.
pub fn rotate_into(alg: &OperatorAlgebra, b_region: &Region) -> Result<Rotation> {
    let chain = alg.chain().clone();
    let ambient = alg.ambient().union(b_region);
    let alg = lift_algebra(alg, &chain, &ambient)?;
    let eps_in = alg.near_inclusion_eps(b_region);
    if eps_in > 1.0 / 64.0 {
        return Err(QcaError::EpsilonTooLarge { eps: eps_in, max: 1.0 / 64.0 });
    }
    let d_h = chain.region_dim(&ambient);
    let f_region = ambient.difference(b_region);
    let d_f = chain.region_dim(&f_region);
    if d_f == 1 {
        // algebra region coincides with the target: E is the identity
        return Ok(Rotation {
            unitary: Array2::eye(d_h),
            ambient,
            eps_in,
            inclusion_residual: inclusion_residual(&alg, b_region, &Array2::eye(d_h))?,
            norm_distance: 0.0,
            norm_bound: 12.0 * eps_in,
        });
    }

    // dilated space K = F1 ⊗ F2 ⊗ H; π(x) acts on (F1, W-part of H) with the
    // F-part of H as the parking leg
    let h_sites = ambient.sites().to_vec();
    let f_sites: Vec<usize> = f_region.sites().to_vec();
    let h_dims: Vec<usize> = h_sites.iter().map(|&s| chain.dim_at(s)).collect();
    let f_dims: Vec<usize> = f_sites.iter().map(|&s| chain.dim_at(s)).collect();
    let n_f = f_sites.len();
    let n_h = h_sites.len();
    // leg order on K: [F1 legs][F2 legs][H legs]
    let mut k_dims: Vec<usize> = Vec::new();
    k_dims.extend(&f_dims);
    k_dims.extend(&f_dims);
    k_dims.extend(&h_dims);
    let d_k = d_f * d_f * d_h;

    // π(x): x's F-legs move onto the F1 slots; identity on F2 and on the
    // original F slots inside H
    let pi = |x: &Array2<C64>| -> Array2<C64> {
        let big = linalg::kron(&Array2::<C64>::eye(d_f * d_f), x);
        // swap F1 slot k <-> H-slot of f_sites[k]
        let mut perm: Vec<usize> = (0..2 * n_f + n_h).collect();
        for (k, fs) in f_sites.iter().enumerate() {
            let h_pos = h_sites.iter().position(|s| s == fs).unwrap();
            perm.swap(k, 2 * n_f + h_pos);
        }
        linalg::permute_operator_legs(&big, &k_dims, &perm)
    };

    // p = |Φ+⟩⟨Φ+| on (F1,F2) ⊗ I_H
    let mut phi = Array2::<C64>::zeros((d_f * d_f, d_f * d_f));
    let amp = 1.0 / d_f as f64;
    for a in 0..d_f {
        for b in 0..d_f {
            phi[[a * d_f + a, b * d_f + b]] = C64::new(amp, 0.0);
        }
    }
    let p = linalg::kron(&phi, &Array2::<C64>::eye(d_h));

    // twirl p over π(A0)
    let w = alg.wedderburn()?;
    let pi_blocks: Vec<FactorBlock> = w
        .blocks
        .iter()
        .map(|b| FactorBlock {
            central_projection: pi(&b.central_projection),
            k: b.k,
            multiplicity: b.multiplicity * d_f * d_f,
            units: b.units.iter().map(|e| pi(e)).collect(),
        })
        .collect();
    let x_hat = twirl_onto_commutant(&pi_blocks, &p);
    let x_herm = (&x_hat + &linalg::dagger(&x_hat)).mapv(|z| z * 0.5);
    let (vals, vecs) = linalg::eigh(&x_herm);
    for &v in vals.iter() {
        if v > 0.25 && v < 0.75 {
            return Err(QcaError::SpectralGapFailure { value: v });
        }
    }
    let mut q = Array2::<C64>::zeros((d_k, d_k));
    for (i, &v) in vals.iter().enumerate() {
        if v > 0.5 {
            let col = vecs.column(i);
            for a in 0..d_k {
                for b in 0..d_k {
                    q[[a, b]] += col[a] * col[b].conj();
                }
            }
        }
    }
    let q_perp = &Array2::<C64>::eye(d_k) - &q;
    let p_perp = &Array2::<C64>::eye(d_k) - &p;
    let y = q.dot(&p) + q_perp.dot(&p_perp);
    let (w_pol, smin) = linalg::polar_unitary(&y);
    if smin < 1e-8 {
        return Err(QcaError::SingularY { sigma_min: smin });
    }

    // Φ(a) = v† w† π(a) w v, contracted over the entangled ancilla pair
    let wd = linalg::dagger(&w_pol);
    let contract = |m: &Array2<C64>| -> Array2<C64> {
        // v|ψ⟩ = |Φ+⟩_(F1F2) ⊗ |ψ⟩_H
        let mut out = Array2::<C64>::zeros((d_h, d_h));
        for hb in 0..d_h {
            for hb2 in 0..d_h {
                let mut acc = C64::new(0.0, 0.0);
                for k1 in 0..d_f {
                    for k2 in 0..d_f {
                        let row = (k1 * d_f + k1) * d_h + hb;
                        let col = (k2 * d_f + k2) * d_h + hb2;
                        acc += m[[row, col]];
                    }
                }
                out[[hb, hb2]] = acc * C64::new(amp, 0.0);
            }
        }
        out
    };
    let images: Vec<Array2<C64>> = alg
        .basis()
        .iter()
        .map(|a| contract(&wd.dot(&pi(a)).dot(&w_pol)))
        .collect();
    let pairs = vec![(alg.clone(), images)];
    let near = NearHomomorphism::new(&chain, pairs, None)?;
    let inner = make_inner(&near)?;
    let u = inner.unitary;
    let residual = inclusion_residual(&alg, b_region, &u)?;
    let norm_distance = linalg::operator_norm(&(&u - &Array2::<C64>::eye(d_h)));
    Ok(Rotation {
        unitary: u,
        ambient,
        eps_in,
        inclusion_residual: residual,
        norm_distance,
        norm_bound: 12.0 * eps_in,
    })
}

fn inclusion_residual(alg: &OperatorAlgebra, region: &Region, u: &Array2<C64>) -> Result<f64> {
    let ud = linalg::dagger(u);
    let mut worst = 0.0_f64;
    for b in alg.basis() {
        let rotated = ud.dot(b).dot(u);
        let op = ChainOperator::new(alg.chain().clone(), alg.ambient().clone(), rotated)?;
        let e = op.conditional_expectation(region);
        worst = worst.max(op.sub(&e)?.operator_norm());
    }
    Ok(worst)
}

/// Exact superoperator distance ‖ad_u − ad_v‖: the diameter of the smallest
/// closed disk containing the spectrum of v·u† (global-phase invariant).
pub fn conjugation_distance(u: &Array2<C64>, v: &Array2<C64>) -> f64 {
    let w = v.dot(&linalg::dagger(u));
    let (vals, _) = w.eig().expect("eigensolve failed");
    let pts: Vec<(f64, f64)> = vals.iter().map(|z| (z.re, z.im)).collect();
    let (_, r) = linalg::smallest_enclosing_circle(&pts);
    2.0 * r
}

use ndarray_linalg::Eig;

/// Per-block restriction report for two automorphisms.
#[derive(Debug, Clone, Serialize)]
pub struct BlockErrorReport {
    /// per-block (search lower bound, certified upper bound when available)
    pub per_block: Vec<(f64, Option<f64>)>,
    /// Σ of the certified upper bounds (falls back to lower bounds where no
    /// certificate exists; `certified` records whether all blocks had one)
    pub eps_sum: f64,
    pub certified: bool,
    /// search lower bound on the global distance
    pub global_lower: f64,
    /// exact global distance when both unitaries materialize (disk formula)
    pub global_exact: Option<f64>,
    /// 2√2·ε
    pub bound: f64,
    pub bound_respected: bool,
}

/// Controls the global distance between two automorphisms by the sum of
/// their restricted distances on a disjoint block cover.
pub fn homomorphism_local_error_check(
    a1: &Automorphism,
    a2: &Automorphism,
    blocks: &[Region],
    seed: u64,
) -> Result<BlockErrorReport> {
    let chain = a1.chain();
    let mut covered = vec![false; chain.num_sites()];
    for b in blocks {
        for &s in b.sites() {
            if covered[s] {
                return Err(QcaError::SpecMismatch(format!("blocks overlap at site {s}")));
            }
            covered[s] = true;
        }
    }
    if !covered.iter().all(|&c| c) {
        return Err(QcaError::SpecMismatch("blocks do not cover the chain".into()));
    }
    // certified per-block upper bounds exist when w = U2 U1† factorizes over
    // the blocks
    let mut block_unitaries: Option<Vec<Array2<C64>>> = None;
    let mut global_exact = None;
    if let (Ok(u1), Ok(u2)) = (a1.unitary(), a2.unitary()) {
        let w = u2.dot(&linalg::dagger(&u1));
        global_exact = Some(conjugation_distance(&u1, &u2));
        let full = chain.full_region();
        let wop = ChainOperator::new(chain.clone(), full.clone(), w.clone())?;
        let mut factors = Vec::new();
        let mut tensor: Option<Array2<C64>> = None;
        for b in blocks {
            let reduced = wop.conditional_expectation(b);
            // normalize: a true tensor factor has modulus-1 normalized trace
            let m = reduced.matrix().clone();
            factors.push(m.clone());
            tensor = Some(match tensor {
                None => m,
                Some(t) => linalg::kron(&t, &m),
            });
        }
        if let Some(t) = tensor {
            // blocks are sorted internally; kron order must match site order
            let sites_sorted: Vec<usize> = {
                let mut all: Vec<(usize, usize)> = blocks
                    .iter()
                    .enumerate()
                    .map(|(i, b)| (b.sites()[0], i))
                    .collect();
                all.sort();
                all.iter().map(|&(_, i)| i).collect()
            };
            let mut ordered: Option<Array2<C64>> = None;
            for &i in &sites_sorted {
                ordered = Some(match ordered {
                    None => factors[i].clone(),
                    Some(t) => linalg::kron(&t, &factors[i]),
                });
            }
            let t = ordered.unwrap_or(t);
            // tensor-factor test up to a global complex scale (the reduced
            // factors are only proportional to the true ones)
            let dev = {
                let tt = linalg::hs_dot(&t, &t);
                if tt.norm() < 1e-24 {
                    f64::INFINITY
                } else {
                    let scale = linalg::hs_dot(&t, &w) / tt;
                    linalg::operator_norm(&(&t.mapv(|z| z * scale) - &w))
                }
            };
            if dev < 1e-8 {
                block_unitaries = Some(
                    factors
                        .iter()
                        .map(|f| {
                            let (u, _) = linalg::polar_unitary(f);
                            u
                        })
                        .collect(),
                );
            }
        }
    }
    let mut per_block = Vec::new();
    let mut eps_sum = 0.0_f64;
    let mut certified = true;
    for (i, b) in blocks.iter().enumerate() {
        let lower = a1.restricted_distance_lb(a2, b, 24, seed.wrapping_add(i as u64))?;
        let upper = block_unitaries.as_ref().map(|us| {
            conjugation_distance(&Array2::eye(us[i].nrows()), &us[i])
        });
        match upper {
            Some(up) => eps_sum += up.max(lower),
            None => {
                certified = false;
                eps_sum += lower;
            }
        }
        per_block.push((lower, upper));
    }
    let global_lower = match global_exact {
        Some(g) => g,
        None => {
            let full = chain.full_region();
            a1.restricted_distance_lb(a2, &full, 32, seed ^ 0x5eed)?
        }
    };
    let bound = 2.0 * 2f64.sqrt() * eps_sum;
    let bound_respected = eps_sum >= 1.0 || global_lower <= bound + 1e-9;
    Ok(BlockErrorReport {
        per_block,
        eps_sum,
        certified,
        global_lower,
        global_exact,
        bound,
        bound_respected,
    })
}

/// Randomized verification report for the commutator inequalities.
#[derive(Debug, Clone, Serialize)]
pub struct CommutatorSuiteReport {
    pub draws: usize,
    pub power_violations: usize,
    /// max observed LHS/RHS over the power-inequality draws
    pub power_max_ratio: f64,
    pub polar_violations: usize,
    pub polar_max_ratio: f64,
}

/// Verifies, over random draws: for normal y with ‖I−y‖ ≤ ε < 1 and
/// s ∈ [−1,1], ‖[x,yˢ]‖ ≤ (|s|/(1−ε)^(1−s))·‖[x,y]‖; and for ‖y−I‖ ≤ 1/8
/// with polar y = u|y|, ‖[x,u]‖ < 3‖[x,y]‖ + 2‖[x,y*]‖.
pub fn commutator_lemma_suite(draws: usize, seed: u64) -> CommutatorSuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut power_violations = 0usize;
    let mut power_max_ratio: f64 = 0.0;
    let mut polar_violations = 0usize;
    let mut polar_max_ratio: f64 = 0.0;
    for _ in 0..draws {
        let dim = rng.gen_range(2..=6);
        // normal y = V diag(λ) V† with |1−λ| ≤ ε
        let eps: f64 = rng.gen_range(0.05..0.9);
        let v = linalg::random_unitary(dim, &mut rng);
        let lambda: Array1<C64> = Array1::from_iter((0..dim).map(|_| {
            let r: f64 = rng.gen_range(0.0..eps);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            C64::new(1.0 + r * phi.cos(), r * phi.sin())
        }));
        let eps_actual = lambda
            .iter()
            .map(|l| (l - C64::new(1.0, 0.0)).norm())
            .fold(0.0_f64, f64::max)
            .max(1e-12);
        let vd = linalg::dagger(&v);
        let y = (&v * &lambda).dot(&vd);
        let s: f64 = rng.gen_range(-1.0..1.0);
        let ys_diag: Array1<C64> = lambda.mapv(|l| (l.ln() * s).exp());
        let ys = (&v * &ys_diag).dot(&vd);
        let x = {
            let g = linalg::random_ginibre(dim, &mut rng);
            let n = linalg::operator_norm(&g);
            g.mapv(|z| z / C64::new(n, 0.0))
        };
        let lhs = linalg::operator_norm(&(&x.dot(&ys) - &ys.dot(&x)));
        let base = linalg::operator_norm(&(&x.dot(&y) - &y.dot(&x)));
        let rhs = s.abs() / (1.0 - eps_actual).powf(1.0 - s) * base;
        if lhs > rhs + 1e-10 {
            power_violations += 1;
        }
        if rhs > 1e-14 {
            power_max_ratio = power_max_ratio.max(lhs / rhs);
        }

        // polar lemma
        let m = linalg::random_ginibre(dim, &mut rng);
        let scale: f64 = rng.gen_range(0.01..0.125) / linalg::operator_norm(&m);
        let y2 = &Array2::<C64>::eye(dim) + &m.mapv(|z| z * C64::new(scale, 0.0));
        let (u, _) = linalg::polar_unitary(&y2);
        let x2 = {
            let g = linalg::random_ginibre(dim, &mut rng);
            let n = linalg::operator_norm(&g);
            g.mapv(|z| z / C64::new(n, 0.0))
        };
        let comm = |a: &Array2<C64>, b: &Array2<C64>| {
            linalg::operator_norm(&(&a.dot(b) - &b.dot(a)))
        };
        let lhs2 = comm(&x2, &u);
        let rhs2 = 3.0 * comm(&x2, &y2) + 2.0 * comm(&x2, &linalg::dagger(&y2));
        if lhs2 > rhs2 + 1e-10 {
            polar_violations += 1;
        }
        if rhs2 > 1e-14 {
            polar_max_ratio = polar_max_ratio.max(lhs2 / rhs2);
        }
    }
    CommutatorSuiteReport {
        draws,
        power_violations,
        power_max_ratio,
        polar_violations,
        polar_max_ratio,
    }
}
