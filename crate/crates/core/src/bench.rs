//! Algorithm dispatch and ratio sweeps over generated instances.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::exact::{balanced_ternary, brute_force_opt, weighted_lower_bound, BruteForceConfig};
use crate::instances::{gen_random, GenKind, GenSpec};
use crate::model::{hierarchy_cost, Hierarchy, Instance, MulticastOracle, UniformOracle};
use crate::multicast::LastParams;
use crate::par::{self, Exec};
use crate::routed::{approx_graph, approx_tree, RoutedParams};
use crate::uniform::{huffman_binary_build, ptas_build, PtasParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Brute,
    UniformOpt,
    Ptas,
    Huffman,
    ApproxTree,
    ApproxGraph,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Brute,
        Algorithm::UniformOpt,
        Algorithm::Ptas,
        Algorithm::Huffman,
        Algorithm::ApproxTree,
        Algorithm::ApproxGraph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Brute => "brute",
            Algorithm::UniformOpt => "uniform-opt",
            Algorithm::Ptas => "ptas",
            Algorithm::Huffman => "huffman",
            Algorithm::ApproxTree => "approx-tree",
            Algorithm::ApproxGraph => "approx-graph",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveParams {
    pub epsilon: Ratio<u64>,
    pub gamma: Ratio<u64>,
    pub brute_force: BruteForceConfig,
    pub exec: Exec,
    /// Score with `M = 1` instead of the instance's network.
    pub uniform_oracle: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            epsilon: Ratio::new(1, 2),
            gamma: Ratio::from_integer(7),
            brute_force: BruteForceConfig::default(),
            exec: Exec::default(),
            uniform_oracle: false,
        }
    }
}

impl SolveParams {
    fn routed(&self) -> Result<RoutedParams> {
        Ok(RoutedParams {
            ptas: self.ptas()?,
            last: LastParams::new(self.gamma)?,
            exec: self.exec,
        })
    }

    fn ptas(&self) -> Result<PtasParams> {
        let mut p = PtasParams::new(self.epsilon)?;
        p.brute_force = self.brute_force.with_exec(self.exec);
        Ok(p)
    }

    /// The oracle costs are reported against.
    pub fn oracle(&self, instance: &Instance) -> Result<Box<dyn MulticastOracle + Send>> {
        if self.uniform_oracle {
            Ok(Box::new(UniformOracle(1)))
        } else {
            instance.oracle()
        }
    }
}

/// A hierarchy and its cost under the scoring oracle.
#[derive(Clone, Debug)]
pub struct Solution {
    pub hierarchy: Hierarchy,
    pub cost: u64,
}

/// Runs `alg` on `instance`. Structure-only algorithms (ptas, huffman,
/// uniform-opt) ignore routing; the cost always uses the scoring oracle.
pub fn solve(instance: &Instance, alg: Algorithm, params: &SolveParams) -> Result<Solution> {
    let oracle = params.oracle(instance)?;
    let weights = instance.weights();
    let hierarchy = match alg {
        Algorithm::Brute => {
            let cfg = params.brute_force.with_exec(params.exec);
            brute_force_opt(weights, &oracle, &cfg)?.hierarchy
        }
        Algorithm::UniformOpt => balanced_ternary(&instance.members()),
        Algorithm::Ptas => ptas_build(weights, &UniformOracle(1), &params.ptas()?)?.hierarchy,
        Algorithm::Huffman => huffman_binary_build(weights)?,
        Algorithm::ApproxTree => approx_tree(instance, &params.routed()?)?.hierarchy,
        Algorithm::ApproxGraph => approx_graph(instance, &params.routed()?)?.hierarchy,
    };
    let cost = hierarchy_cost(&hierarchy, weights, &oracle)?;
    Ok(Solution { hierarchy, cost })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    BruteOpt,
    /// The weighted lower bound; needs the uniform oracle.
    LowerBound,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::BruteOpt => "brute-opt",
            Baseline::LowerBound => "lower-bound",
        }
    }
}

impl std::str::FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute-opt" => Ok(Baseline::BruteOpt),
            "lower-bound" => Ok(Baseline::LowerBound),
            other => Err(Error::InvalidParams(format!("unknown baseline `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRecord {
    pub n: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub cost: u64,
    pub baseline: Baseline,
    pub baseline_value: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioSweep {
    pub algorithm: Algorithm,
    pub kind: GenKind,
    pub n_range: RangeInclusive<usize>,
    pub trials: u64,
    pub seed: u64,
    pub baseline: Baseline,
    pub max_weight: u64,
    pub max_edge_cost: u64,
    pub params: SolveParams,
}

impl RatioSweep {
    pub fn new(algorithm: Algorithm, kind: GenKind, n_range: RangeInclusive<usize>, trials: u64, seed: u64) -> Self {
        Self {
            algorithm,
            kind,
            n_range,
            trials,
            seed,
            baseline: Baseline::BruteOpt,
            max_weight: 10,
            max_edge_cost: 10,
            params: SolveParams::default(),
        }
    }

    /// `(n, seed)` of every trial in output order. Trial `t` uses seed
    /// `seed + t` for every `n`.
    pub fn trial_keys(&self) -> Vec<(usize, u64)> {
        self.n_range
            .clone()
            .flat_map(|n| (0..self.trials).map(move |t| (n, t)))
            .map(|(n, t)| (n, self.seed.wrapping_add(t)))
            .collect()
    }

    pub fn check(&self) -> Result<()> {
        if self.n_range.is_empty() || *self.n_range.start() == 0 {
            return Err(Error::InvalidParams("n range must be non-empty and start at 1 or more".into()));
        }
        if self.baseline == Baseline::BruteOpt && *self.n_range.end() > self.params.brute_force.max_members {
            return Err(Error::TooLarge {
                n: *self.n_range.end(),
                cap: self.params.brute_force.max_members,
            });
        }
        if self.baseline == Baseline::LowerBound && !self.params.uniform_oracle {
            return Err(Error::InvalidParams("the lower-bound baseline needs the uniform oracle".into()));
        }
        Ok(())
    }
}

/// One record per trial in `(n, seed)` order. Trials run in parallel under
/// `params.exec`; each trial is itself sequential.
pub fn ratio_sweep(sweep: &RatioSweep) -> Result<Vec<RatioRecord>> {
    sweep.check()?;
    let inner = SolveParams {
        exec: Exec::Sequential,
        ..sweep.params
    };
    let keys = sweep.trial_keys();
    par::map(sweep.params.exec, &keys, |&(n, seed)| run_trial(sweep, &inner, n, seed))
        .into_iter()
        .collect()
}

fn run_trial(sweep: &RatioSweep, params: &SolveParams, n: usize, seed: u64) -> Result<RatioRecord> {
    let spec = GenSpec {
        max_weight: sweep.max_weight,
        max_edge_cost: sweep.max_edge_cost,
        ..GenSpec::new(sweep.kind, n, seed)
    };
    let instance = gen_random(&spec)?;
    let solution = solve(&instance, sweep.algorithm, params)?;
    let baseline_value = match sweep.baseline {
        Baseline::BruteOpt => {
            let oracle = params.oracle(&instance)?;
            brute_force_opt(instance.weights(), &oracle, &params.brute_force.with_exec(Exec::Sequential))?.cost as f64
        }
        Baseline::LowerBound => weighted_lower_bound(instance.weights())?,
    };
    let ratio = if baseline_value > 0.0 {
        solution.cost as f64 / baseline_value
    } else if solution.cost == 0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(RatioRecord {
        n,
        seed,
        algorithm: sweep.algorithm,
        cost: solution.cost,
        baseline: sweep.baseline,
        baseline_value,
        ratio,
    })
}

pub const CSV_HEADER: &str = "n,seed,alg,cost,baseline,baseline_value,ratio";

pub fn to_csv(records: &[RatioRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(out, "{},{},{},{},{},", r.n, r.seed, r.algorithm.name(), r.cost, r.baseline.name());
        match r.baseline {
            Baseline::BruteOpt => {
                let _ = write!(out, "{}", r.baseline_value as u64);
            }
            Baseline::LowerBound => {
                let _ = write!(out, "{:.6}", r.baseline_value);
            }
        }
        let _ = writeln!(out, ",{:.6}", r.ratio);
    }
    out
}
