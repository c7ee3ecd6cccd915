//! Named and random test states.
//!
//! Random states come from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`; complex amplitudes are drawn as pairs of standard
//! normals (real part first), then normalized.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{QpolyError, Result};
use crate::layout::SystemLayout;
use crate::state::{fresh_label, DensityOperator, StateVector};
use crate::{CMatrix, CVector, C64};

pub fn rng_for(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// `(|0...0> + |1...1>)/sqrt 2` on `n` qubits.
pub fn ghz(n: usize) -> Result<StateVector> {
    check_party_count(n)?;
    let layout = SystemLayout::qubits(n)?;
    let mut amps = CVector::zeros(layout.total_dim());
    amps[0] = C64::new(1.0, 0.0);
    amps[layout.total_dim() - 1] = C64::new(1.0, 0.0);
    StateVector::normalized(layout, amps)
}

/// Uniform superposition of the weight-`k` basis states of `n` qubits.
pub fn dicke(n: usize, k: usize) -> Result<StateVector> {
    check_party_count(n)?;
    if k > n {
        return Err(QpolyError::InvalidState(format!(
            "Dicke weight {k} exceeds {n} qubits"
        )));
    }
    let layout = SystemLayout::qubits(n)?;
    let amps = CVector::from_iterator(
        layout.total_dim(),
        (0..layout.total_dim()).map(|i: usize| {
            if i.count_ones() as usize == k {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
    );
    StateVector::normalized(layout, amps)
}

/// W state: Dicke state of weight one.
pub fn w_state(n: usize) -> Result<StateVector> {
    dicke(n, 1)
}

/// `|0...0>` on `n` qubits.
pub fn product_zero(n: usize) -> Result<StateVector> {
    check_party_count(n)?;
    let layout = SystemLayout::qubits(n)?;
    StateVector::basis(layout, &vec![0; n])
}

/// `(|00> + |11>)/sqrt 2`.
pub fn bell() -> StateVector {
    ghz(2).expect("two qubits are a valid layout")
}

/// Haar-random pure state on `layout`.
pub fn haar_random_pure(layout: SystemLayout, seed: u64) -> StateVector {
    let mut rng = rng_for(seed);
    haar_pure_with(layout, &mut rng)
}

pub fn haar_pure_with<R: rand::Rng + ?Sized>(layout: SystemLayout, rng: &mut R) -> StateVector {
    let n = layout.total_dim();
    let amps = CVector::from_iterator(n, (0..n).map(|_| complex_normal(rng)));
    StateVector::normalized(layout, amps).expect("gaussian vector is nonzero almost surely")
}

/// Marginal of a Haar-random pure state on `layout` times an environment of
/// dimension `layout.total_dim()`.
pub fn random_mixed(layout: SystemLayout, seed: u64) -> Result<DensityOperator> {
    let env = SystemLayout::new([(fresh_label(&layout, "env"), layout.total_dim())]);
    let joint = match env.and_then(|e| layout.concat(&e)) {
        Ok(j) => j,
        // environment would exceed the dense size cap: build the mixture directly
        Err(_) => return random_mixed_direct(layout, seed),
    };
    let psi = haar_random_pure(joint, seed);
    let keep = layout.labels();
    psi.partial_trace(&keep)
}

fn random_mixed_direct(layout: SystemLayout, seed: u64) -> Result<DensityOperator> {
    let mut rng = rng_for(seed);
    let n = layout.total_dim();
    let g = CMatrix::from_fn(n, n, |_, _| complex_normal(&mut rng));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityOperator::new(layout, m / tr)
}

fn check_party_count(n: usize) -> Result<()> {
    if n < 2 {
        return Err(QpolyError::InvalidState(format!(
            "need at least 2 parties, got {n}"
        )));
    }
    Ok(())
}
