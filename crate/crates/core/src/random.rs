//! Random states and observables for property checks.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{eigh, ComplexMatrix};
use crate::state::{DensityMatrix, Observable, PureState};

fn gaussian_c<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Unit vector with i.i.d. complex Gaussian components before normalization.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| gaussian_c(rng)).collect();
        if let Ok(p) = PureState::normalize(v) {
            return p;
        }
    }
}

/// `G G^H / Tr` with a complex Gaussian `G` (full rank almost surely).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let mut g = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = gaussian_c(rng);
        }
    }
    let m = (&g * &g.adjoint()).hermitian_part();
    DensityMatrix::new(m)
        .and_then(|rho| rho.normalized())
        .expect("Wishart matrix is a valid state")
}

/// Eigenvectors of a random Hermitian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            h[(i, j)] = gaussian_c(rng);
        }
    }
    eigh(&h.hermitian_part()).expect("Hermitian input").vectors
}

/// Observable with eigenvalues uniform in `[-1, 1]` and a random eigenbasis.
/// With probability `p_degenerate` two eigenvalues are made equal.
pub fn random_observable<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    p_degenerate: f64,
) -> Observable {
    let mut values: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    if dim > 2 && rng.random::<f64>() < p_degenerate {
        values[1] = values[0];
    }
    Observable::from_spectrum(values, random_unitary(rng, dim)).expect("orthonormal basis")
}

/// Log-uniform pointer width in `[lo, hi]`.
pub fn random_sigma<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}
