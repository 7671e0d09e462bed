//! Grid verification: bounds, upper-bound adherence of random sequences,
//! construction sandwiches and certificate checks for every `(model, n, k)`
//! cell of a grid.

use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::lemmas::{duality, manyones, monotonicity, propagation_in, propagation_out, smallest_roots, transitivity};
use crate::analysis::{bounds_for, build_rounds_graph, build_strict_sets, max_out_degree_witness, verify_strict_inequalities};
use crate::constructions::construct;
use crate::dissemination::{run, Objective, RoundSequence};
use crate::error::{Error, Result};
use crate::families::{Model, ModelSpec};
use crate::nodeset::NodeSet;
use crate::trace::ProductTrace;

/// `n=LO..HI,k=LO..HI`; single values are accepted for either axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub n: RangeInclusive<usize>,
    pub k: RangeInclusive<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 3..=20, k: 1..=3 }
    }
}

fn parse_range(text: &str) -> Result<RangeInclusive<usize>> {
    let bad = || Error::InvalidSpec(format!("bad range `{text}`"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let range = match text.split_once("..") {
        Some((lo, hi)) => num(lo)?..=num(hi.trim_start_matches('='))?,
        None => num(text)?..=num(text)?,
    };
    if range.is_empty() {
        return Err(bad());
    }
    Ok(range)
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut grid = GridSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some(("n", r)) => grid.n = parse_range(r)?,
                Some(("k", r)) => grid.k = parse_range(r)?,
                _ => return Err(Error::InvalidSpec(format!("bad grid component `{part}`"))),
            }
        }
        if *grid.n.start() == 0 || *grid.k.start() == 0 {
            return Err(Error::InvalidSpec("grid values must be positive".into()));
        }
        Ok(grid)
    }
}

impl GridSpec {
    /// Every valid spec in the grid; trees only take `k = 1`.
    pub fn specs(&self) -> Vec<ModelSpec> {
        let mut out = Vec::new();
        for model in [Model::Trees, Model::KForests, Model::KRooted] {
            for n in self.n.clone() {
                for k in self.k.clone() {
                    if model == Model::Trees && k != 1 {
                        continue;
                    }
                    if let Ok(spec) = ModelSpec::new(model, n, k) {
                        out.push(spec);
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyEntry {
    pub check: &'static str,
    pub spec: ModelSpec,
    pub instances: usize,
    pub failures: usize,
    pub detail: String,
}

impl VerifyEntry {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub samples: usize,
    pub seed: u64,
    pub entries: Vec<VerifyEntry>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(VerifyEntry::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyEntry> {
        self.entries.iter().filter(|e| !e.passed())
    }
}

fn cell_seed(seed: u64, spec: &ModelSpec, sample: usize) -> u64 {
    let model = spec.model as u64;
    seed ^ (model << 56) ^ ((spec.n as u64) << 40) ^ ((spec.k as u64) << 32) ^ sample as u64
}

fn entry(check: &'static str, spec: ModelSpec) -> VerifyEntry {
    VerifyEntry { check, spec, instances: 0, failures: 0, detail: String::new() }
}

fn fail(e: &mut VerifyEntry, detail: String) {
    e.failures += 1;
    if e.detail.is_empty() {
        e.detail = detail;
    }
}

fn verify_cell(spec: ModelSpec, samples: usize, seed: u64) -> Vec<VerifyEntry> {
    let bounds = bounds_for(&spec);
    let objective = Objective::natural_for(&spec);
    let len = bounds.upper_int;
    let mut out = Vec::new();

    let mut b = entry("bounds-ordered", spec);
    b.instances = 1;
    if bounds.lower > bounds.upper_int as i64 {
        fail(&mut b, format!("lower {} > upper {}", bounds.lower, bounds.upper_int));
    }
    out.push(b);

    let mut adherence = entry("upper-bound-adherence", spec);
    let mut lemmas = entry("lemma-spot-checks", spec);
    let mut certificate = entry(if spec.model == Model::KForests { "strict-sets" } else { "rounds-graph" }, spec);
    for sample in 0..samples {
        let s = cell_seed(seed, &spec, sample);
        let seq = RoundSequence::random(spec, len, s);
        adherence.instances += 1;
        match run(&seq, objective) {
            Ok(res) if res.time <= len => {}
            Ok(res) => fail(&mut adherence, format!("seed {s}: time {} > {len}", res.time)),
            Err(e) => fail(&mut adherence, format!("seed {s}: {e}")),
        }
        let trace = match seq.to_trace(len) {
            Ok(t) => t,
            Err(e) => {
                fail(&mut certificate, format!("seed {s}: {e}"));
                continue;
            }
        };
        if spec.model != Model::KForests {
            spot_check_lemmas(&trace, s, &mut lemmas);
        }
        certificate.instances += 1;
        if let Err(detail) = check_certificate(&spec, &trace, s) {
            fail(&mut certificate, format!("seed {s}: {detail}"));
        }
    }
    out.push(adherence);
    if lemmas.instances > 0 {
        out.push(lemmas);
    }
    out.push(certificate);

    if let Ok((c, obj)) = construct(&spec) {
        let mut sandwich = entry("construction-sandwich", spec);
        sandwich.instances = 1;
        match run(&c.seq, obj) {
            Ok(res) if res.time >= c.claimed_time && res.time <= len => {}
            Ok(res) => fail(&mut sandwich, format!("time {} outside [{}, {len}]", res.time, c.claimed_time)),
            Err(e) => fail(&mut sandwich, e.to_string()),
        }
        out.push(sandwich);
    }
    out
}

fn check_certificate(spec: &ModelSpec, trace: &ProductTrace, seed: u64) -> std::result::Result<(), String> {
    match spec.model {
        Model::KForests => {
            let tr = build_strict_sets(trace, spec.k, trace.len()).map_err(|e| e.to_string())?;
            let report = verify_strict_inequalities(trace, &tr);
            if !report.complete {
                return Err("strict-sets trace incomplete".into());
            }
            match report.checks.iter().find(|c| !c.passed()) {
                Some(c) => Err(format!("{} failed at {:?}", c.name, c.first_failure)),
                None => Ok(()),
            }
        }
        Model::Trees | Model::KRooted => {
            // Avoid up to k − 1 nodes, chosen from the seed.
            let a = (seed as usize) % spec.k;
            let avoid: NodeSet = (0..a).map(|i| (seed as usize + i) % spec.n).collect();
            let rg = build_rounds_graph(trace, avoid).map_err(|e| e.to_string())?;
            let (id, deg) = max_out_degree_witness(&rg);
            if deg < spec.n {
                return Err(format!("max out-degree {deg} < {}", spec.n));
            }
            if !rg.witness_has_broadcast(trace, id) {
                return Err(format!("witness node {id} has not broadcast"));
            }
            Ok(())
        }
    }
}

fn spot_check_lemmas(trace: &ProductTrace, seed: u64, e: &mut VerifyEntry) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (n, len) = (trace.n(), trace.len());
    let roots = smallest_roots(trace);
    for _ in 0..50 {
        let t = rng.gen_range(1..=len);
        let t2 = rng.gen_range(t..=len);
        let t3 = rng.gen_range(t2..=len);
        let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        let checks = [
            ("duality", duality(trace, t, t2, x, y)),
            ("transitivity", transitivity(trace, (t, t2, t3), (x, y, z)).iter().all(|&b| b)),
            ("monotonicity", monotonicity(trace, (t, t2, t2, t3), x)),
            ("propagation-in", propagation_in(trace, t, t2, x, roots[t - 1])),
            ("propagation-out", propagation_out(trace, t, t2, x, roots[t2 - 1])),
            ("manyones", manyones(trace, t, t2, x, &roots)),
        ];
        for (name, ok) in checks {
            e.instances += 1;
            if !ok {
                fail(e, format!("{name} at t={t} t2={t2} t3={t3} x={x} y={y} z={z}"));
            }
        }
    }
}

/// Runs every check on every cell of `grid`, cells in parallel.
pub fn verify_grid(grid: &GridSpec, samples: usize, seed: u64) -> VerifyReport {
    let entries = grid.specs().into_par_iter().flat_map_iter(|spec| verify_cell(spec, samples, seed)).collect();
    VerifyReport { samples, seed, entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: GridSpec = "n=3..20,k=1..3".parse().unwrap();
        assert_eq!(g, GridSpec { n: 3..=20, k: 1..=3 });
        let g: GridSpec = "n=5".parse().unwrap();
        assert_eq!(g.n, 5..=5);
        assert_eq!(g.k, 1..=3);
        assert!("n=5..3".parse::<GridSpec>().is_err());
        assert!("m=1".parse::<GridSpec>().is_err());
        assert!("n=0..3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn specs_skip_invalid_cells() {
        let g: GridSpec = "n=2..3,k=1..3".parse().unwrap();
        let specs = g.specs();
        assert!(specs.iter().all(|s| s.k <= s.n));
        assert_eq!(specs.iter().filter(|s| s.model == Model::Trees).count(), 2);
    }

    #[test]
    fn small_grid_passes() {
        let report = verify_grid(&"n=3..7,k=1..2".parse().unwrap(), 3, 11);
        let failures: Vec<_> = report.failures().collect();
        assert!(failures.is_empty(), "{failures:?}");
    }
}
