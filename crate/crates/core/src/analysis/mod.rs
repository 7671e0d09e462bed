//! Bound formulas, the constants `α_s` and `β`, and the certificates behind
//! the upper bounds, evaluated on concrete runs.

pub mod lemmas;
pub mod rounds_graph;
pub mod strict;

use serde::Serialize;

use crate::constructions::{cover_lower_formula, kroot_lower_formula, trees_lower_formula};
use crate::error::{Error, Result};
use crate::families::{Model, ModelSpec};

pub use rounds_graph::{build_rounds_graph, max_out_degree_witness, RoundsGraph};
pub use strict::{
    build_strict_sets, extremal_deltas, verify_littledeltas_bound, verify_strict_inequalities, InequalityCheck,
    LittleDeltasReport, StrictReport, StrictRoundsGraph, StrictSetsTrace,
};

/// `β = (π² + 6)/6`.
pub const BETA: f64 = (std::f64::consts::PI * std::f64::consts::PI + 6.0) / 6.0;

// π² = 9.869604401089358618834490999876…, bracketed with 18 decimals.
const PI2_LO: u128 = 9_869_604_401_089_358_618;
const PI2_HI: u128 = 9_869_604_401_089_358_619;
const PI2_SCALE: u128 = 1_000_000_000_000_000_000;

/// `⌈√m⌉` for integers.
fn ceil_sqrt(m: u64) -> u64 {
    let r = m.isqrt();
    if r * r == m {
        r
    } else {
        r + 1
    }
}

/// `⌈√2·n⌉`, exact.
pub fn ceil_sqrt2_n(n: usize) -> usize {
    let n = n as u64;
    ceil_sqrt(2 * n * n) as usize
}

/// `⌈(1+√2)n⌉`, exact.
pub fn trees_upper(n: usize) -> usize {
    n + ceil_sqrt2_n(n)
}

/// `⌊βn⌋`, exact for every `n` below `10^15`.
pub fn floor_beta_n(n: usize) -> usize {
    let n128 = n as u128;
    let lo = PI2_LO * n128 / (6 * PI2_SCALE);
    let hi = PI2_HI * n128 / (6 * PI2_SCALE);
    assert_eq!(lo, hi, "π² bracket too wide for n = {n}");
    n + lo as usize
}

/// `⌈βn⌉ + 1`; `βn` is never an integer for `n ≥ 1`.
pub fn forests_upper(n: usize) -> usize {
    floor_beta_n(n) + 2
}

/// `⌈(1+√2)n⌉ + k − 1`.
pub fn kroot_upper(n: usize, k: usize) -> usize {
    trees_upper(n) + k - 1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub model: Model,
    pub n: usize,
    pub k: usize,
    pub lower: i64,
    /// Lower bound written as `⌈a/2⌉ + c` instead of `⌈a/2 + c⌉`.
    pub lower_split_ceiling: i64,
    pub upper_real: f64,
    /// `⌈upper_real⌉`, computed in exact arithmetic.
    pub upper_int: usize,
}

pub fn bounds_for(spec: &ModelSpec) -> Bounds {
    let (n, k) = (spec.n, spec.k);
    let sqrt2 = std::f64::consts::SQRT_2;
    let (lower, lower_split_ceiling, upper_real, upper_int) = match spec.model {
        Model::Trees => {
            let l = trees_lower_formula(n);
            (l, l, (1.0 + sqrt2) * n as f64, trees_upper(n))
        }
        Model::KForests => {
            let l = cover_lower_formula(n, k);
            (l.whole_ceiling, l.split_ceiling, BETA * n as f64 + 1.0, forests_upper(n))
        }
        Model::KRooted => {
            let l = kroot_lower_formula(n, k);
            let u = kroot_upper(n, k);
            (l.whole_ceiling, l.split_ceiling, u as f64, u)
        }
    };
    Bounds { model: spec.model, n, k, lower, lower_split_ceiling, upper_real, upper_int }
}

/// Weighted out-degree of `s` in the strict rounds graph:
/// `((s−k+1)/2)²` if `s−k` is odd, `((s−k)/2)² + (s−k)/2` if even.
pub fn alpha(s: usize, k: usize) -> Result<u64> {
    if s <= k {
        return Err(Error::InvalidSpec(format!("alpha needs s > k (s = {s}, k = {k})")));
    }
    let d = (s - k) as u64;
    Ok(if d % 2 == 1 { ((d + 1) / 2).pow(2) } else { (d / 2).pow(2) + d / 2 })
}

/// Enclosure of `Σ 1/ℓ² + Σ 1/(ℓ²+ℓ)` from the first `terms` terms and
/// the tails `1/(L+1) ≤ Σ_{ℓ>L} 1/ℓ² ≤ 1/L` and `Σ_{ℓ>L} 1/(ℓ²+ℓ) = 1/(L+1)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BetaEnclosure {
    pub terms: usize,
    pub lower: f64,
    pub upper: f64,
}

impl BetaEnclosure {
    pub fn new(terms: usize) -> Self {
        assert!(terms >= 1);
        let l = terms as f64;
        let (mut squares, mut pronic) = (0.0, 0.0);
        for i in (1..=terms).rev() {
            let x = i as f64;
            squares += 1.0 / (x * x);
            pronic += 1.0 / (x * x + x);
        }
        let head = squares + pronic + 1.0 / (l + 1.0);
        BetaEnclosure { terms, lower: head + 1.0 / (l + 1.0), upper: head + 1.0 / l }
    }

    /// Whether `β` lies in the enclosure and the enclosure is `tol`-tight.
    pub fn pins_beta(&self, tol: f64) -> bool {
        self.upper - self.lower <= tol && self.lower - tol <= BETA && BETA <= self.upper + tol
    }
}
