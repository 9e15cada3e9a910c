//! Dense third-order tensors and the t-product algebra.
//!
//! A [`Tensor3`] is a real `n1 x n2 x n3` array stored frontal-slice-major:
//! entry `(i, j, k)` lives at flat offset `(k * n1 + i) * n2 + j`, so the
//! `k`-th frontal slice is a contiguous `n1 x n2` row-major block. All public
//! indices are 0-based; the common mathematical convention for this algebra
//! is 1-based, so "slice 1" in the literature is `k = 0` here. File formats
//! that serialize indices use 1-based triples (see the `io` module).
//!
//! The t-product multiplies two tensors like matrices whose scalars are
//! `1 x 1 x n3` tubes combined by circular convolution. Every product here is
//! computed spectrally: take the mode-3 DFT, multiply matching frontal slices
//! as complex matrices, and invert. The DFT convention is the unnormalized
//! forward transform with the `1/n3` factor on the inverse, matching
//! `fft(A, [], 3)` / `ifft(A, [], 3)`.

use std::cell::RefCell;
use std::ops::{Add, Mul, Neg, Sub};

use faer::Mat;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Dense real third-order tensor.
///
/// Invariants: `data.len() == n1 * n2 * n3` and every entry is finite after
/// any public operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

/// Entrywise norms of a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    LInf,
    Fro,
}

impl Tensor3 {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        assert!(
            dims.0 > 0 && dims.1 > 0 && dims.2 > 0,
            "tensor dims must be positive, got {dims:?}"
        );
        Tensor3 {
            dims,
            data: vec![0.0; dims.0 * dims.1 * dims.2],
        }
    }

    /// Builds a tensor from a flat buffer in the documented layout order
    /// (slice-major, row-major within each frontal slice). Finiteness is
    /// the caller's responsibility here; the file readers and the solver
    /// validate at their own boundaries.
    pub fn from_vec(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::dims(dims, data.len(), "from_vec buffer length"));
        }
        Ok(Tensor3 { dims, data })
    }

    pub fn from_fn(dims: (usize, usize, usize), mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Tensor3::zeros(dims);
        for k in 0..dims.2 {
            for i in 0..dims.0 {
                for j in 0..dims.1 {
                    let v = f(i, j, k);
                    t.data[(k * dims.0 + i) * dims.1 + j] = v;
                }
            }
        }
        t
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn flat_index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        (k * self.dims.0 + i) * self.dims.1 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.flat_index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.flat_index(i, j, k);
        self.data[idx] = value;
    }

    /// Flat data in layout order. The offset of `(i, j, k)` is
    /// `(k * n1 + i) * n2 + j`.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor3 {
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Tensor3 {
        self.map(|x| c * x)
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.data.iter().map(|x| x.abs()).sum(),
            NormKind::LInf => self.data.iter().fold(0.0, |m, x| m.max(x.abs())),
            NormKind::Fro => self.data.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    #[inline]
    pub fn fro_norm(&self) -> f64 {
        self.norm(NormKind::Fro)
    }

    #[inline]
    pub fn linf_norm(&self) -> f64 {
        self.norm(NormKind::LInf)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Add for &Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: &Tensor3) -> Tensor3 {
        assert_eq!(self.dims, rhs.dims, "tensor add dims");
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        assert_eq!(self.dims, rhs.dims, "tensor sub dims");
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Tensor3 {
    type Output = Tensor3;
    fn neg(self) -> Tensor3 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Tensor3 {
    type Output = Tensor3;
    fn mul(self, c: f64) -> Tensor3 {
        self.scale(c)
    }
}

/// Complex mode-3 Fourier transform of a [`Tensor3`], held as `n3` frontal
/// slices of shape `n1 x n2`.
///
/// When produced from a real tensor, slice `k` and slice `n3 - k`
/// (`k = 1..n3-1`, 0-based) are elementwise complex conjugates.
#[derive(Debug, Clone)]
pub struct SpectralTensor3 {
    dims: (usize, usize, usize),
    slices: Vec<Mat<Complex64>>,
}

impl SpectralTensor3 {
    pub fn new(dims: (usize, usize, usize), slices: Vec<Mat<Complex64>>) -> Result<Self> {
        if slices.len() != dims.2 {
            return Err(Error::dims(dims, slices.len(), "spectral slice count"));
        }
        for s in &slices {
            if s.nrows() != dims.0 || s.ncols() != dims.1 {
                return Err(Error::dims(dims, (s.nrows(), s.ncols()), "spectral slice shape"));
            }
        }
        Ok(SpectralTensor3 { dims, slices })
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    pub fn slice(&self, k: usize) -> &Mat<Complex64> {
        &self.slices[k]
    }

    #[inline]
    pub fn slice_mut(&mut self, k: usize) -> &mut Mat<Complex64> {
        &mut self.slices[k]
    }

    #[inline]
    pub fn slices(&self) -> &[Mat<Complex64>] {
        &self.slices
    }

    pub fn fro_norm(&self) -> f64 {
        self.slices
            .iter()
            .map(|s| {
                let mut acc = 0.0;
                for j in 0..s.ncols() {
                    for i in 0..s.nrows() {
                        acc += s[(i, j)].norm_sqr();
                    }
                }
                acc
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Largest elementwise deviation from conjugate symmetry between mirrored
    /// slices. Zero for any transform of a real tensor, up to rounding.
    pub fn max_conjugate_asymmetry(&self) -> f64 {
        let n3 = self.dims.2;
        let mut worst = 0.0f64;
        for k in 1..n3 {
            let m = n3 - k;
            if m <= k {
                break;
            }
            let (a, b) = (&self.slices[k], &self.slices[m]);
            for j in 0..self.dims.1 {
                for i in 0..self.dims.0 {
                    worst = worst.max((a[(i, j)] - b[(i, j)].conj()).norm());
                }
            }
        }
        worst
    }
}

/// Unnormalized forward DFT of every tube `a(i, j, :)`.
pub fn dft_mode3(a: &Tensor3) -> SpectralTensor3 {
    let (n1, n2, n3) = a.dims();
    let mut slices: Vec<Mat<Complex64>> = (0..n3).map(|_| Mat::zeros(n1, n2)).collect();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(n3);
        let mut tube = vec![Complex64::ZERO; n3];
        let stride = n1 * n2;
        for i in 0..n1 {
            for j in 0..n2 {
                let base = i * n2 + j;
                for (k, t) in tube.iter_mut().enumerate() {
                    *t = Complex64::new(a.as_slice()[base + k * stride], 0.0);
                }
                fft.process(&mut tube);
                for (k, t) in tube.iter().enumerate() {
                    slices[k][(i, j)] = *t;
                }
            }
        }
    });
    SpectralTensor3 { dims: a.dims(), slices }
}

/// Inverse of [`dft_mode3`], carrying the `1/n3` normalization.
///
/// The imaginary part left over after the inverse transform must stay below
/// `1e-10` times the spectral Frobenius norm; a larger residue means the
/// spectral tensor was edited in a way that breaks conjugate symmetry, which
/// no operation in this crate does.
pub fn idft_mode3(a_hat: &SpectralTensor3) -> Result<Tensor3> {
    let (n1, n2, n3) = a_hat.dims();
    let tolerance = IDFT_RESIDUE_TOL * a_hat.fro_norm();
    let mut out = Tensor3::zeros((n1, n2, n3));
    let mut worst_residue = 0.0f64;
    PLANNER.with(|p| {
        let ifft = p.borrow_mut().plan_fft_inverse(n3);
        let mut tube = vec![Complex64::ZERO; n3];
        let stride = n1 * n2;
        let scale = 1.0 / n3 as f64;
        for i in 0..n1 {
            for j in 0..n2 {
                for (k, t) in tube.iter_mut().enumerate() {
                    *t = a_hat.slices[k][(i, j)];
                }
                ifft.process(&mut tube);
                let base = i * n2 + j;
                for (k, t) in tube.iter().enumerate() {
                    let v = *t * scale;
                    worst_residue = worst_residue.max(v.im.abs());
                    out.as_mut_slice()[base + k * stride] = v.re;
                }
            }
        }
    });
    if worst_residue > tolerance {
        return Err(Error::ImaginaryResidueTooLarge {
            residue: worst_residue,
            tolerance,
        });
    }
    Ok(out)
}

/// Relative tolerance for the imaginary residue discarded by [`idft_mode3`].
pub const IDFT_RESIDUE_TOL: f64 = 1e-10;

/// t-product `a * b` of an `n1 x n2 x n3` and an `n2 x n4 x n3` tensor,
/// computed as slice-wise products in the Fourier domain.
pub fn t_product(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let (a1, a2, a3) = a.dims();
    let (b1, b2, b3) = b.dims();
    if a2 != b1 || a3 != b3 {
        return Err(Error::dims(a.dims(), b.dims(), "t_product"));
    }
    let a_hat = dft_mode3(a);
    let b_hat = dft_mode3(b);
    // Mirrored slices of the product stay conjugate-symmetric because
    // conj(A)conj(B) = conj(AB), so the inverse transform is real.
    let slices: Vec<Mat<Complex64>> = (0..a3)
        .map(|k| a_hat.slices[k].as_ref() * b_hat.slices[k].as_ref())
        .collect();
    idft_mode3(&SpectralTensor3 {
        dims: (a1, b2, a3),
        slices,
    })
}

/// Conjugate transpose: each frontal slice is transposed, and slices
/// `2..=n3` (1-based) are reversed in order.
pub fn conj_transpose(a: &Tensor3) -> Tensor3 {
    let (n1, n2, n3) = a.dims();
    Tensor3::from_fn((n2, n1, n3), |i, j, k| {
        let src_k = if k == 0 { 0 } else { n3 - k };
        a.get(j, i, src_k)
    })
}

/// Identity tensor: first frontal slice is `I_n`, the rest are zero.
pub fn identity_tensor(n: usize, n3: usize) -> Tensor3 {
    let mut t = Tensor3::zeros((n, n, n3));
    for i in 0..n {
        t.set(i, i, 0, 1.0);
    }
    t
}

/// Euclidean inner product; equals `(1/n3)` times the spectral-side inner
/// product of the block-diagonal forms.
pub fn inner_product(a: &Tensor3, b: &Tensor3) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::dims(a.dims(), b.dims(), "inner_product"));
    }
    Ok(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum())
}

/// Tensor spectral norm: the largest singular value over all spectral slices.
pub fn spectral_norm(a: &Tensor3) -> f64 {
    let a_hat = dft_mode3(a);
    let n3 = a.dims().2;
    // Conjugate slices share singular values, so half the slices suffice.
    let half = n3 / 2 + 1;
    let mut worst = 0.0f64;
    for k in 0..half {
        let svd = a_hat.slices[k]
            .singular_values()
            .expect("singular value computation failed");
        if let Some(&top) = svd.first() {
            worst = worst.max(top);
        }
    }
    worst
}

/// Standard tensor bases: columns, tubes, and single-entry unit tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSpec {
    /// `n1 x 1 x n3` with a single 1 at `(i, 0, 0)`.
    Column { i: usize, n1: usize, n3: usize },
    /// `1 x 1 x n3` with a single 1 at `(0, 0, k)`.
    Tube { k: usize, n3: usize },
    /// `dims`-shaped with a single 1 at `(i, j, k)`; equals the t-product
    /// chain `column(i) * tube(k) * column(j)^H`.
    Unit {
        i: usize,
        j: usize,
        k: usize,
        dims: (usize, usize, usize),
    },
}

pub fn basis(spec: BasisSpec) -> Result<Tensor3> {
    match spec {
        BasisSpec::Column { i, n1, n3 } => {
            if i >= n1 {
                return Err(Error::IndexOutOfBounds { i, j: 0, k: 0, n1, n2: 1, n3 });
            }
            let mut t = Tensor3::zeros((n1, 1, n3));
            t.set(i, 0, 0, 1.0);
            Ok(t)
        }
        BasisSpec::Tube { k, n3 } => {
            if k >= n3 {
                return Err(Error::IndexOutOfBounds { i: 0, j: 0, k, n1: 1, n2: 1, n3 });
            }
            let mut t = Tensor3::zeros((1, 1, n3));
            t.set(0, 0, k, 1.0);
            Ok(t)
        }
        BasisSpec::Unit { i, j, k, dims } => {
            let (n1, n2, n3) = dims;
            if i >= n1 || j >= n2 || k >= n3 {
                return Err(Error::IndexOutOfBounds { i, j, k, n1, n2, n3 });
            }
            let mut t = Tensor3::zeros(dims);
            t.set(i, j, k, 1.0);
            Ok(t)
        }
    }
}

/// True when `q^H * q` and `q * q^H` are both within `tol` of the identity
/// tensor in Frobenius norm. Only square tensors can be orthogonal.
pub fn is_orthogonal(q: &Tensor3, tol: f64) -> Result<bool> {
    let (n1, n2, n3) = q.dims();
    if n1 != n2 {
        return Err(Error::dims((n1, n2, n3), (n2, n1, n3), "is_orthogonal requires square"));
    }
    let qh = conj_transpose(q);
    let id = identity_tensor(n1, n3);
    let left = t_product(&qh, q)?;
    let right = t_product(q, &qh)?;
    Ok((&left - &id).fro_norm() <= tol && (&right - &id).fro_norm() <= tol)
}

/// True when every off-diagonal entry of every frontal slice has magnitude
/// at most `tol`.
pub fn is_f_diagonal(s: &Tensor3, tol: f64) -> bool {
    let (n1, n2, n3) = s.dims();
    for k in 0..n3 {
        for i in 0..n1 {
            for j in 0..n2 {
                if i != j && s.get(i, j, k).abs() > tol {
                    return false;
                }
            }
        }
    }
    true
}
