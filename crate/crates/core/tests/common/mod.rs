#![allow(dead_code)]

use dimer_nm::opalg::{ComplexMatrix, C64};
use rand::Rng;

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_matrix(rng, n).hermitian_part()
}

/// `A A† / tr(A A†)`
pub fn random_density(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n);
    let p = a.matmul(&a.adjoint());
    let tr = p.trace().re;
    p.scale_real(1.0 / tr)
}

/// |value| at every local extremum of `x`, with `x[0]` counted as an extremum.
pub fn envelope(x: &[f64]) -> Vec<f64> {
    let mut env = vec![x[0].abs()];
    for w in x.windows(3) {
        if (w[1] >= w[0] && w[1] > w[2]) || (w[1] <= w[0] && w[1] < w[2]) {
            env.push(w[1].abs());
        }
    }
    env
}

/// Local maxima of the envelope, including a maximum at its first point.
pub fn envelope_maxima(x: &[f64]) -> usize {
    let env = envelope(x);
    let mut count = usize::from(env.len() > 1 && env[0] > env[1]);
    for w in env.windows(3) {
        if w[1] > w[0] && w[1] > w[2] {
            count += 1;
        }
    }
    count
}

/// Envelope non-increasing after its first point, within `slack`.
pub fn envelope_monotone(x: &[f64], slack: f64) -> bool {
    envelope(x).windows(2).skip(1).all(|w| w[1] <= w[0] + slack)
}
