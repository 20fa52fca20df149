//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_PIECES: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// ∫ₐᵇ f by global adaptive bisection: the piece with the largest error
/// estimate is split until the summed estimate drops below `tol` (or below
/// a few ulps of the result).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral> {
    let mut evaluations = 0;
    let mut eval = |lo: f64, hi: f64| -> Result<Piece> {
        let (value, error) = gk15(&f, lo, hi);
        evaluations += 15;
        if !value.is_finite() {
            return Err(Error::Numeric(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        Ok(Piece { lo, hi, value, error })
    };
    let mut heap = BinaryHeap::new();
    heap.push(eval(a, b)?);
    // Pieces too narrow to split further.
    let mut settled = Vec::new();
    loop {
        let value: f64 = crate::summation::sum(heap.iter().chain(&settled).map(|p| p.value));
        let error: f64 = heap.iter().chain(&settled).map(|p| p.error).sum();
        if error <= tol.max(50.0 * f64::EPSILON * value.abs()) || heap.is_empty() {
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() + settled.len() >= MAX_PIECES {
            return Err(Error::Numeric(format!(
                "quadrature on [{a}, {b}] did not converge (error estimate {error:e}, target {tol:e})"
            )));
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            settled.push(worst);
            continue;
        }
        heap.push(eval(worst.lo, mid)?);
        heap.push(eval(mid, worst.hi)?);
    }
}
