//! Observation masks, entrywise and tangent-space projections, incoherence
//! diagnostics, and scalar shrinkage.
//!
//! Masks are stored as a sorted list of flat indices (the `Tensor3` layout
//! order) plus a constant-time membership structure: a bitmap once density
//! exceeds 1%, a hash set below that. The entrywise projection dominates the
//! inner loop of the solver, so membership must stay O(1).

use std::collections::HashSet;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{conj_transpose, dft_mode3, idft_mode3, t_product, SpectralTensor3, Tensor3};
use crate::tsvd::{tsvd_skinny, tubal_ranks};

/// How the observed set is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingModel {
    /// Exactly `round(rate * n1 * n2 * n3)` indices, uniform among all sets
    /// of that cardinality.
    UniformWithoutReplacement,
    /// Each index observed independently with probability `rate`.
    Bernoulli,
}

impl SamplingModel {
    pub fn name(&self) -> &'static str {
        match self {
            SamplingModel::UniformWithoutReplacement => "uniform",
            SamplingModel::Bernoulli => "bernoulli",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SamplingModel::UniformWithoutReplacement),
            "bernoulli" => Ok(SamplingModel::Bernoulli),
            other => Err(Error::Parse(format!("unknown sampling model {other:?}"))),
        }
    }
}

const BITMAP_DENSITY: f64 = 0.01;

#[derive(Debug, Clone)]
enum Lookup {
    Bitmap(Vec<bool>),
    Hash(HashSet<usize>),
}

/// The observed index set with its sampling metadata.
#[derive(Debug, Clone)]
pub struct ObservationMask {
    dims: (usize, usize, usize),
    indices: Vec<usize>,
    model: SamplingModel,
    rate: f64,
    seed: u64,
    lookup: Lookup,
}

impl ObservationMask {
    /// Builds a mask from sorted-or-not flat indices, validating range and
    /// uniqueness.
    pub fn from_flat_indices(
        dims: (usize, usize, usize),
        mut indices: Vec<usize>,
        model: SamplingModel,
        rate: f64,
        seed: u64,
    ) -> Result<Self> {
        let total = dims.0 * dims.1 * dims.2;
        indices.sort_unstable();
        for pair in indices.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::Parse(format!("duplicate mask index {}", pair[0])));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= total {
                let (i, j, k) = unflatten(dims, last);
                return Err(Error::IndexOutOfBounds { i, j, k, n1: dims.0, n2: dims.1, n3: dims.2 });
            }
        }
        let lookup = if indices.len() as f64 > BITMAP_DENSITY * total as f64 {
            let mut bits = vec![false; total];
            for &idx in &indices {
                bits[idx] = true;
            }
            Lookup::Bitmap(bits)
        } else {
            Lookup::Hash(indices.iter().copied().collect())
        };
        Ok(ObservationMask { dims, indices, model, rate, seed, lookup })
    }

    /// The full mask: every entry observed.
    pub fn full(dims: (usize, usize, usize)) -> Self {
        let total = dims.0 * dims.1 * dims.2;
        ObservationMask::from_flat_indices(
            dims,
            (0..total).collect(),
            SamplingModel::UniformWithoutReplacement,
            1.0,
            0,
        )
        .expect("full mask is always valid")
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    /// Number of observed entries.
    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }

    pub fn model(&self) -> SamplingModel {
        self.model
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sorted flat indices in the `Tensor3` layout order.
    pub fn flat_indices(&self) -> &[usize] {
        &self.indices
    }

    #[inline]
    pub fn contains_flat(&self, idx: usize) -> bool {
        match &self.lookup {
            Lookup::Bitmap(bits) => bits[idx],
            Lookup::Hash(set) => set.contains(&idx),
        }
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize, k: usize) -> bool {
        self.contains_flat((k * self.dims.0 + i) * self.dims.1 + j)
    }

    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.indices.iter().map(move |&f| unflatten(self.dims, f))
    }
}

#[inline]
pub(crate) fn unflatten(dims: (usize, usize, usize), flat: usize) -> (usize, usize, usize) {
    let slice = dims.0 * dims.1;
    let k = flat / slice;
    let rem = flat % slice;
    (rem / dims.1, rem % dims.1, k)
}

/// Draws an observation set. Deterministic for a given seed.
pub fn sample_mask(
    dims: (usize, usize, usize),
    rate: f64,
    model: SamplingModel,
    seed: u64,
) -> Result<ObservationMask> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidRate(rate));
    }
    let total = dims.0 * dims.1 * dims.2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = match model {
        SamplingModel::UniformWithoutReplacement => {
            let m = (rate * total as f64).round() as usize;
            sample_without_replacement(&mut rng, total, m)
        }
        SamplingModel::Bernoulli => (0..total).filter(|_| rng.random::<f64>() < rate).collect(),
    };
    ObservationMask::from_flat_indices(dims, indices, model, rate, seed)
}

/// First `m` entries of a Fisher-Yates shuffle of `0..total`.
pub(crate) fn sample_without_replacement(
    rng: &mut ChaCha8Rng,
    total: usize,
    m: usize,
) -> Vec<usize> {
    let m = m.min(total);
    let mut pool: Vec<usize> = (0..total).collect();
    for i in 0..m {
        let j = rng.random_range(i..total);
        pool.swap(i, j);
    }
    pool.truncate(m);
    pool
}

/// Entrywise projection: keeps entries inside the (optionally complemented)
/// observed set and zeroes the rest.
pub fn project_omega(a: &Tensor3, mask: &ObservationMask, complement: bool) -> Result<Tensor3> {
    if a.dims() != mask.dims() {
        return Err(Error::dims(a.dims(), mask.dims(), "project_omega"));
    }
    let mut out = a.clone();
    for (idx, value) in out.as_mut_slice().iter_mut().enumerate() {
        if mask.contains_flat(idx) == complement {
            *value = 0.0;
        }
    }
    Ok(out)
}

/// The tangent space at a low-tubal-rank tensor, carried by its skinny
/// factors. Spectral forms are cached because both projections reduce to
/// slice-wise matrix products.
#[derive(Debug, Clone)]
pub struct TangentSpace {
    u: Tensor3,
    v: Tensor3,
    u_hat: Vec<Mat<Complex64>>,
    v_hat: Vec<Mat<Complex64>>,
}

impl TangentSpace {
    /// Wraps skinny factors `u` (n1 x r x n3) and `v` (n2 x r x n3),
    /// checking semi-orthogonality `u^H * u = v^H * v = I` within 1e-8.
    pub fn new(u: Tensor3, v: Tensor3) -> Result<Self> {
        let (_, ru, n3u) = u.dims();
        let (_, rv, n3v) = v.dims();
        if ru != rv || n3u != n3v {
            return Err(Error::dims(u.dims(), v.dims(), "tangent factors"));
        }
        let id = crate::tensor::identity_tensor(ru, n3u);
        for factor in [&u, &v] {
            let gram = t_product(&conj_transpose(factor), factor)?;
            let dev = (&gram - &id).fro_norm();
            if dev > 1e-8 {
                return Err(Error::NumericalFailure(format!(
                    "tangent factor is not semi-orthogonal (deviation {dev:.3e})"
                )));
            }
        }
        let u_hat = dft_mode3(&u).slices().to_vec();
        let v_hat = dft_mode3(&v).slices().to_vec();
        Ok(TangentSpace { u, v, u_hat, v_hat })
    }

    /// Tangent space of `l0` at its thresholded tubal rank.
    pub fn from_reference(l0: &Tensor3, rank_threshold: f64) -> Result<Self> {
        let r = tubal_ranks(l0, rank_threshold)?.tubal_rank;
        if r == 0 {
            return Err(Error::ZeroTensor);
        }
        let f = tsvd_skinny(l0, r)?;
        TangentSpace::new(f.u, f.v)
    }

    pub fn u(&self) -> &Tensor3 {
        &self.u
    }

    pub fn v(&self) -> &Tensor3 {
        &self.v
    }

    pub fn rank(&self) -> usize {
        self.u.dims().1
    }

    pub fn n3(&self) -> usize {
        self.u.dims().2
    }
}

/// Projects onto the tangent space (`perp = false`):
/// `P_T(z) = u*u^H*z + z*v*v^H - u*u^H*z*v*v^H`, or onto its complement
/// (`perp = true`): `P_T_perp(z) = (i - u*u^H) * z * (i - v*v^H)`.
pub fn project_tangent(z: &Tensor3, t: &TangentSpace, perp: bool) -> Result<Tensor3> {
    let (n1, n2, n3) = z.dims();
    if t.u.dims().0 != n1 || t.v.dims().0 != n2 || t.n3() != n3 {
        return Err(Error::dims(z.dims(), (t.u.dims().0, t.v.dims().0, t.n3()), "project_tangent"));
    }
    let z_hat = dft_mode3(z);
    let mut slices: Vec<Mat<Complex64>> = Vec::with_capacity(n3);
    for k in 0..n3 {
        let (a, b, zk) = (&t.u_hat[k], &t.v_hat[k], z_hat.slice(k));
        let t1 = a.adjoint() * zk; // r x n2
        let c1 = a * &t1; // u u^H z
        let t2 = zk * b; // n1 x r
        let c2 = &t2 * b.adjoint(); // z v v^H
        let t3 = &t1 * b; // r x r
        let c3 = a * (&t3 * b.adjoint()); // u u^H z v v^H
        let out = if perp {
            Mat::from_fn(n1, n2, |i, j| zk[(i, j)] - c1[(i, j)] - c2[(i, j)] + c3[(i, j)])
        } else {
            Mat::from_fn(n1, n2, |i, j| c1[(i, j)] + c2[(i, j)] - c3[(i, j)])
        };
        slices.push(out);
    }
    idft_mode3(&SpectralTensor3::new((n1, n2, n3), slices)?)
}

/// The tightest incoherence parameters of a low-tubal-rank tensor.
///
/// `mu_u` and `mu_v` are the standard column/row conditions and lie in
/// `[1, n/r]` for the respective dimension; `mu_joint` is the joint
/// condition and is reported separately because it obeys no such upper
/// bound. `mu` is the maximum of the three.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncoherenceReport {
    pub mu_u: f64,
    pub mu_v: f64,
    pub mu_joint: f64,
    pub mu: f64,
    pub rank: usize,
}

/// Measures incoherence with the rank taken from the thresholded tubal rank
/// of `l0` itself.
pub fn incoherence(l0: &Tensor3, rank_threshold: f64) -> Result<IncoherenceReport> {
    if l0.fro_norm() == 0.0 {
        return Err(Error::ZeroTensor);
    }
    let r = tubal_ranks(l0, rank_threshold)?.tubal_rank;
    incoherence_with_rank(l0, r)
}

/// Incoherence with an explicit rank override, for degenerate spectra where
/// the thresholded count is unreliable.
pub fn incoherence_with_rank(l0: &Tensor3, r: usize) -> Result<IncoherenceReport> {
    if l0.fro_norm() == 0.0 || r == 0 {
        return Err(Error::ZeroTensor);
    }
    let (n1, n2, n3) = l0.dims();
    let f = tsvd_skinny(l0, r)?;
    let u_hat = dft_mode3(&f.u);
    let v_hat = dft_mode3(&f.v);

    // ||U^H * col_i||_F^2 = (1/n3) sum_k ||row_i(U_hat^(k))||^2 by Parseval.
    let max_row_energy = |hat: &SpectralTensor3, rows: usize| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..rows {
            let mut acc = 0.0;
            for k in 0..n3 {
                let slice = hat.slice(k);
                for c in 0..r {
                    acc += slice[(i, c)].norm_sqr();
                }
            }
            worst = worst.max(acc / n3 as f64);
        }
        worst
    };
    let mu_u = n1 as f64 / r as f64 * max_row_energy(&u_hat, n1);
    let mu_v = n2 as f64 / r as f64 * max_row_energy(&v_hat, n2);

    let uv = t_product(&f.u, &conj_transpose(&f.v))?;
    let mu_joint = (n1 * n2 * n3) as f64 / r as f64 * uv.linf_norm().powi(2);

    Ok(IncoherenceReport {
        mu_u,
        mu_v,
        mu_joint,
        mu: mu_u.max(mu_v).max(mu_joint),
        rank: r,
    })
}

/// Entrywise shrinkage `x -> sign(x) * max(|x| - tau, 0)`, applied to the
/// masked entries only when a mask is given and to every entry otherwise.
pub fn soft_threshold(a: &Tensor3, tau: f64, mask: Option<&ObservationMask>) -> Tensor3 {
    assert!(tau >= 0.0, "shrinkage threshold must be nonnegative");
    let shrink = |x: f64| x.signum() * (x.abs() - tau).max(0.0);
    match mask {
        None => a.map(shrink),
        Some(m) => {
            let mut out = a.clone();
            for (idx, value) in out.as_mut_slice().iter_mut().enumerate() {
                if m.contains_flat(idx) {
                    *value = shrink(*value);
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{basis, inner_product, BasisSpec};
    use rand_distr::StandardNormal;

    fn random_tensor(dims: (usize, usize, usize), seed: u64) -> Tensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor3::from_fn(dims, |_, _, _| rng.sample(StandardNormal))
    }

    fn random_low_rank(n1: usize, n2: usize, n3: usize, r: usize, seed: u64) -> Tensor3 {
        let p = random_tensor((n1, r, n3), seed);
        let w = random_tensor((r, n2, n3), seed.wrapping_add(1));
        t_product(&p, &w).unwrap()
    }

    #[test]
    fn full_rate_uniform_mask_covers_everything() {
        let m = sample_mask((4, 3, 2), 1.0, SamplingModel::UniformWithoutReplacement, 7).unwrap();
        assert_eq!(m.len(), 24);
        assert!((0..24).all(|i| m.contains_flat(i)));
    }

    #[test]
    fn uniform_mask_cardinality_is_forced() {
        let m = sample_mask((10, 10, 10), 0.3, SamplingModel::UniformWithoutReplacement, 1).unwrap();
        assert_eq!(m.len(), 300);
        // indices sorted and unique
        assert!(m.flat_indices().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn bernoulli_mask_concentrates_near_rate() {
        for seed in 0..20 {
            let m = sample_mask((10, 100, 10), 0.3, SamplingModel::Bernoulli, seed).unwrap();
            let fraction = m.len() as f64 / 10_000.0;
            assert!((0.27..=0.33).contains(&fraction), "seed {seed}: fraction {fraction}");
        }
    }

    #[test]
    fn sample_mask_is_deterministic_and_validates_rate() {
        let a = sample_mask((5, 5, 5), 0.4, SamplingModel::Bernoulli, 9).unwrap();
        let b = sample_mask((5, 5, 5), 0.4, SamplingModel::Bernoulli, 9).unwrap();
        assert_eq!(a.flat_indices(), b.flat_indices());
        assert!(matches!(
            sample_mask((5, 5, 5), 0.0, SamplingModel::Bernoulli, 0),
            Err(Error::InvalidRate(_))
        ));
        assert!(matches!(
            sample_mask((5, 5, 5), 1.5, SamplingModel::Bernoulli, 0),
            Err(Error::InvalidRate(_))
        ));
    }

    #[test]
    fn project_omega_identities() {
        let a = random_tensor((4, 5, 3), 10);
        let full = ObservationMask::full(a.dims());
        assert_eq!(project_omega(&a, &full, false).unwrap(), a);

        let m = sample_mask(a.dims(), 0.5, SamplingModel::Bernoulli, 11).unwrap();
        let on = project_omega(&a, &m, false).unwrap();
        let off = project_omega(&a, &m, true).unwrap();
        assert_eq!(&(&on + &off), &a);

        let twice = project_omega(&on, &m, false).unwrap();
        assert_eq!(twice, on);

        let wrong = random_tensor((4, 5, 4), 12);
        assert!(matches!(project_omega(&wrong, &m, false), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn project_omega_is_self_adjoint_and_contractive() {
        let a = random_tensor((4, 4, 3), 13);
        let b = random_tensor((4, 4, 3), 14);
        let m = sample_mask(a.dims(), 0.4, SamplingModel::Bernoulli, 15).unwrap();
        let pa = project_omega(&a, &m, false).unwrap();
        let pb = project_omega(&b, &m, false).unwrap();
        let lhs = inner_product(&pa, &b).unwrap();
        let rhs = inner_product(&a, &pb).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        assert!(pa.fro_norm() <= a.fro_norm() + 1e-15);
    }

    fn tangent_of(l0: &Tensor3, r: usize) -> TangentSpace {
        let f = tsvd_skinny(l0, r).unwrap();
        TangentSpace::new(f.u, f.v).unwrap()
    }

    #[test]
    fn tangent_membership_by_construction() {
        let l0 = random_low_rank(6, 5, 4, 2, 20);
        let t = tangent_of(&l0, 2);
        // z = u * y^H lies in T for any y.
        let y = random_tensor((5, 2, 4), 21);
        let z = t_product(t.u(), &conj_transpose(&y)).unwrap();
        let pz = project_tangent(&z, &t, false).unwrap();
        assert!((&pz - &z).fro_norm() <= 1e-9 * z.fro_norm());
    }

    #[test]
    fn tangent_projections_are_orthogonal_complements() {
        let l0 = random_low_rank(5, 6, 3, 2, 22);
        let t = tangent_of(&l0, 2);
        let a = random_tensor((5, 6, 3), 23);
        let b = random_tensor((5, 6, 3), 24);

        let pa = project_tangent(&a, &t, false).unwrap();
        let qb = project_tangent(&b, &t, true).unwrap();
        let ip = inner_product(&pa, &qb).unwrap();
        assert!(ip.abs() <= 1e-9 * a.fro_norm() * b.fro_norm());

        // idempotence
        let ppa = project_tangent(&pa, &t, false).unwrap();
        assert!((&ppa - &pa).fro_norm() <= 1e-9 * pa.fro_norm().max(1.0));
        let qqb = project_tangent(&qb, &t, true).unwrap();
        assert!((&qqb - &qb).fro_norm() <= 1e-9 * qb.fro_norm().max(1.0));

        // complementarity and mutual annihilation
        let sum = &pa + &project_tangent(&a, &t, true).unwrap();
        assert!((&sum - &a).fro_norm() <= 1e-9 * a.fro_norm());
        let pq = project_tangent(&qb, &t, false).unwrap();
        assert!(pq.fro_norm() <= 1e-9 * b.fro_norm());
    }

    #[test]
    fn tangent_basis_projection_bound() {
        let (n1, n2, n3, r) = (6, 5, 4, 2);
        let l0 = random_low_rank(n1, n2, n3, r, 25);
        let t = tangent_of(&l0, r);
        let report = incoherence_with_rank(&l0, r).unwrap();
        let bound = (2.0 * report.mu * r as f64 / n2.min(n1) as f64).sqrt() + 1e-9;
        for &(i, j, k) in &[(0, 0, 0), (2, 3, 1), (5, 4, 3), (1, 2, 2)] {
            let e = basis(BasisSpec::Unit { i, j, k, dims: (n1, n2, n3) }).unwrap();
            let pe = project_tangent(&e, &t, false).unwrap();
            assert!(pe.fro_norm() <= bound, "({i},{j},{k}): {} > {bound}", pe.fro_norm());
        }
    }

    #[test]
    fn incoherence_of_spike_is_maximal() {
        let (n1, n2, n3) = (5, 4, 3);
        let col = basis(BasisSpec::Column { i: 0, n1, n3 }).unwrap();
        let row = basis(BasisSpec::Column { i: 0, n1: n2, n3 }).unwrap();
        let spike = t_product(&col, &conj_transpose(&row)).unwrap();
        let report = incoherence(&spike, crate::tsvd::RANK_THRESHOLD).unwrap();
        assert_eq!(report.rank, 1);
        assert!((report.mu_u - n1 as f64).abs() <= 1e-9 * n1 as f64);
        assert!((report.mu_v - n2 as f64).abs() <= 1e-9 * n2 as f64);
    }

    #[test]
    fn incoherence_matches_t_product_oracle() {
        let (n1, n2, n3, r) = (6, 5, 4, 2);
        let l0 = random_low_rank(n1, n2, n3, r, 26);
        let report = incoherence_with_rank(&l0, r).unwrap();
        let f = tsvd_skinny(&l0, r).unwrap();
        let uh = conj_transpose(&f.u);
        let mut worst = 0.0f64;
        for i in 0..n1 {
            let e = basis(BasisSpec::Column { i, n1, n3 }).unwrap();
            let proj = t_product(&uh, &e).unwrap();
            worst = worst.max(proj.fro_norm().powi(2));
        }
        let oracle = n1 as f64 / r as f64 * worst;
        assert!((report.mu_u - oracle).abs() <= 1e-9 * oracle.max(1.0));
    }

    #[test]
    fn incoherence_bounds_and_scale_invariance() {
        let (n1, n2, n3, r) = (8, 8, 5, 2);
        for seed in 0..5 {
            let l0 = random_low_rank(n1, n2, n3, r, 100 + seed);
            let report = incoherence_with_rank(&l0, r).unwrap();
            assert!(report.mu_u >= 1.0 - 1e-9 && report.mu_u <= n1 as f64 / r as f64 + 1e-9);
            assert!(report.mu_v >= 1.0 - 1e-9 && report.mu_v <= n2 as f64 / r as f64 + 1e-9);

            let scaled = incoherence_with_rank(&l0.scale(5.0), r).unwrap();
            assert!((scaled.mu_u - report.mu_u).abs() <= 1e-9 * report.mu_u);
            assert!((scaled.mu_v - report.mu_v).abs() <= 1e-9 * report.mu_v);
            assert!((scaled.mu_joint - report.mu_joint).abs() <= 1e-8 * report.mu_joint.max(1.0));
        }
    }

    #[test]
    fn incoherence_rejects_zero_tensor() {
        let z = Tensor3::zeros((3, 3, 3));
        assert!(matches!(incoherence(&z, 1e-8), Err(Error::ZeroTensor)));
    }

    #[test]
    fn soft_threshold_pointwise() {
        let mut a = Tensor3::zeros((2, 2, 1));
        a.set(0, 0, 0, 3.0);
        a.set(0, 1, 0, -0.5);
        let out = soft_threshold(&a, 1.0, None);
        assert_eq!(out.get(0, 0, 0), 2.0);
        assert_eq!(out.get(0, 1, 0), 0.0);

        let same = soft_threshold(&a, 0.0, None);
        assert_eq!(same, a);
    }

    #[test]
    fn soft_threshold_respects_mask() {
        let a = random_tensor((3, 3, 2), 30);
        let m = sample_mask(a.dims(), 0.5, SamplingModel::Bernoulli, 31).unwrap();
        let out = soft_threshold(&a, 0.4, Some(&m));
        for idx in 0..a.len() {
            let (i, j, k) = unflatten(a.dims(), idx);
            let x = a.get(i, j, k);
            let want = if m.contains_flat(idx) {
                x.signum() * (x.abs() - 0.4).max(0.0)
            } else {
                x
            };
            assert_eq!(out.get(i, j, k), want);
        }
    }

    #[test]
    fn soft_threshold_minimizes_scalar_objective_vs_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let tau = 0.3;
        for _ in 0..20 {
            let a: f64 = rng.sample(StandardNormal);
            let shrunk = a.signum() * (a.abs() - tau).max(0.0);
            let objective = |x: f64| tau * x.abs() + 0.5 * (x - a) * (x - a);
            let best_on_grid = (-4000..4000)
                .map(|g| g as f64 * 1e-3)
                .map(objective)
                .fold(f64::INFINITY, f64::min);
            assert!(objective(shrunk) <= best_on_grid + 1e-6);
        }
    }

    #[test]
    fn mask_lookup_uses_hash_below_density_threshold() {
        // 5 of 100_000 entries: density 0.005% < 1%, exercises the hash path.
        let m = ObservationMask::from_flat_indices(
            (100, 100, 10),
            vec![0, 17, 99_999, 4242, 777],
            SamplingModel::Bernoulli,
            0.00005,
            0,
        )
        .unwrap();
        assert!(m.contains_flat(4242));
        assert!(!m.contains_flat(4241));
        assert_eq!(m.len(), 5);
    }

    #[test]
    fn mask_rejects_duplicates_and_out_of_range() {
        assert!(ObservationMask::from_flat_indices(
            (2, 2, 2),
            vec![1, 1],
            SamplingModel::Bernoulli,
            0.5,
            0
        )
        .is_err());
        assert!(ObservationMask::from_flat_indices(
            (2, 2, 2),
            vec![8],
            SamplingModel::Bernoulli,
            0.5,
            0
        )
        .is_err());
    }
}
