//! Fixed-step RK4 on the vectorised master equation.
//!
//! For a time-independent linear generator one RK4 step is the matrix polynomial
//! `P = 1 + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24`. Advancing many steps can therefore be done
//! either by stepping with the sparse generator or by applying a precomputed power of `P`.
//! Both realise the same RK4 recursion; [`Stepping::Auto`] picks whichever is cheaper.

use crate::opalg::{ComplexMatrix, C64, ZERO};

use super::liouvillian::SparseGenerator;

/// How a chunk of RK4 steps is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Stepping {
    /// Step-by-step with the sparse generator.
    Direct,
    /// Apply the dense matrix `P^k` for a chunk of `k` steps.
    Propagator,
    #[default]
    Auto,
}

pub(crate) struct Rk4 {
    gen: SparseGenerator,
    dt: f64,
}

impl Rk4 {
    pub fn new(gen: SparseGenerator, dt: f64) -> Self {
        Rk4 { gen, dt }
    }

    pub fn dim(&self) -> usize {
        self.gen.len()
    }

    /// One classical RK4 step, in place.
    pub fn step(&self, y: &mut [C64], scratch: &mut Rk4Scratch) {
        let h = self.dt;
        let Rk4Scratch { k, tmp, acc } = scratch;
        self.gen.apply(y, k);
        for i in 0..y.len() {
            acc[i] = k[i];
            tmp[i] = y[i] + k[i] * (0.5 * h);
        }
        self.gen.apply(tmp, k);
        for i in 0..y.len() {
            acc[i] += k[i] * 2.0;
            tmp[i] = y[i] + k[i] * (0.5 * h);
        }
        self.gen.apply(tmp, k);
        for i in 0..y.len() {
            acc[i] += k[i] * 2.0;
            tmp[i] = y[i] + k[i] * h;
        }
        self.gen.apply(tmp, k);
        for i in 0..y.len() {
            y[i] += (acc[i] + k[i]) * (h / 6.0);
        }
    }

    /// Dense one-step matrix: column `j` is the RK4 step applied to `e_j`.
    pub fn one_step_matrix(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut p = ComplexMatrix::zeros(n, n);
        let mut scratch = Rk4Scratch::new(n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[j] = C64::new(1.0, 0.0);
            self.step(&mut e, &mut scratch);
            for i in 0..n {
                p[(i, j)] = e[i];
            }
        }
        p
    }

    fn direct_cost(&self, steps: usize) -> f64 {
        steps as f64 * (4.0 * self.gen.nnz() as f64 + 12.0 * self.dim() as f64)
    }
}

pub(crate) struct Rk4Scratch {
    k: Vec<C64>,
    tmp: Vec<C64>,
    acc: Vec<C64>,
}

impl Rk4Scratch {
    pub fn new(n: usize) -> Self {
        Rk4Scratch {
            k: vec![ZERO; n],
            tmp: vec![ZERO; n],
            acc: vec![ZERO; n],
        }
    }
}

/// `m^k` by binary powering.
pub(crate) fn matrix_power(m: &ComplexMatrix, mut k: usize) -> ComplexMatrix {
    let mut result: Option<ComplexMatrix> = None;
    let mut base = m.clone();
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r.matmul(&base),
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = base.matmul(&base);
    }
    result.unwrap_or_else(|| ComplexMatrix::identity(m.rows()))
}

fn power_products(k: usize) -> f64 {
    if k <= 1 {
        return 0.0;
    }
    let bits = usize::BITS - k.leading_zeros();
    (bits - 1 + k.count_ones() - 1) as f64
}

/// Advances a vector by a fixed number of RK4 steps.
pub(crate) struct ChunkAdvancer<'a> {
    rk4: &'a Rk4,
    steps: usize,
    dense: Option<ComplexMatrix>,
}

impl<'a> ChunkAdvancer<'a> {
    /// `expected_chunks` (times `vectors` advanced per chunk) feeds the cost model of `Auto`.
    pub fn new(rk4: &'a Rk4, steps: usize, expected_chunks: usize, vectors: usize, mode: Stepping) -> Self {
        let n = rk4.dim() as f64;
        let use_dense = match mode {
            Stepping::Direct => false,
            Stepping::Propagator => true,
            Stepping::Auto => {
                let applications = (expected_chunks * vectors.max(1)) as f64;
                let direct = applications * rk4.direct_cost(steps);
                let dense = n * rk4.direct_cost(1) + power_products(steps) * n * n * n + applications * n * n;
                dense < direct
            }
        };
        let dense = use_dense.then(|| matrix_power(&rk4.one_step_matrix(), steps));
        ChunkAdvancer { rk4, steps, dense }
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    pub fn advance(&self, y: &mut Vec<C64>, scratch: &mut Rk4Scratch) {
        match &self.dense {
            Some(p) => *y = p.matvec(y),
            None => {
                for _ in 0..self.steps {
                    self.rk4.step(y, scratch);
                }
            }
        }
    }
}
