//! Seeded instance generators.
//!
//! Randomness comes from ChaCha8 seeded with a 64-bit seed; the stream is
//! specified by the ChaCha algorithm and, together with the pinned `rand`
//! release, makes every generated instance a pure function of its
//! [`GenSpec`].
//!
//! Masses are drawn uniformly from `1..=mass_max` and then balanced: the
//! total difference is added to the last demand (or the last supply) and
//! whatever pushes that entry above `mass_max` is spread round-robin over
//! the entries of the same side that still have room (over all of them
//! once none has room).

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::Instance;

pub const DEFAULT_MASS_MAX: i64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    UniformSquare,
    UniformRect,
    GridQuadratic,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::UniformSquare => "usq",
            Family::UniformRect => "urect",
            Family::GridQuadratic => "grid",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "usq" | "uniform-square" => Ok(Family::UniformSquare),
            "urect" | "uniform-rect" => Ok(Family::UniformRect),
            "grid" | "grid-quadratic" => Ok(Family::GridQuadratic),
            other => Err(format!("unknown family `{other}` (expected usq, urect or grid)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("dimensions must be positive")]
    EmptyDimension,
    #[error("square family needs m == n (got {0}x{1})")]
    NotSquare(usize, usize),
    #[error("grid side must be at least 2")]
    GridTooSmall,
    #[error("mass_max and cost_max must be at least 1")]
    BadBound,
}

/// Parameters of one generated instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub family: Family,
    /// Sources (ignored for grids, where `m = n = side^2`).
    pub m: usize,
    pub n: usize,
    /// Grid side `g`.
    pub side: usize,
    pub seed: u64,
    pub mass_max: i64,
    /// Defaults to `max(m, n)` for the uniform families.
    pub cost_max: Option<i64>,
}

impl GenSpec {
    pub fn uniform_square(k: usize, seed: u64) -> Self {
        GenSpec {
            family: Family::UniformSquare,
            m: k,
            n: k,
            side: 0,
            seed,
            mass_max: DEFAULT_MASS_MAX,
            cost_max: None,
        }
    }

    pub fn uniform_rect(m: usize, n: usize, seed: u64) -> Self {
        GenSpec {
            family: Family::UniformRect,
            m,
            n,
            ..Self::uniform_square(0, seed)
        }
    }

    pub fn grid(side: usize, seed: u64) -> Self {
        GenSpec {
            family: Family::GridQuadratic,
            m: side * side,
            n: side * side,
            side,
            ..Self::uniform_square(0, seed)
        }
    }

    pub fn generate(&self) -> Result<Instance, GenError> {
        if self.mass_max < 1 || self.cost_max.is_some_and(|c| c < 1) {
            return Err(GenError::BadBound);
        }
        match self.family {
            Family::GridQuadratic => {
                if self.side < 2 {
                    return Err(GenError::GridTooSmall);
                }
                Ok(grid_quadratic(self.side, self.mass_max, self.seed))
            }
            Family::UniformSquare | Family::UniformRect => {
                if self.m == 0 || self.n == 0 {
                    return Err(GenError::EmptyDimension);
                }
                if self.family == Family::UniformSquare && self.m != self.n {
                    return Err(GenError::NotSquare(self.m, self.n));
                }
                let cost_max = self.cost_max.unwrap_or(self.m.max(self.n) as i64);
                Ok(uniform(self.m, self.n, self.mass_max, cost_max, self.seed))
            }
        }
    }
}

/// Uniform masses in `1..=mass_max`, uniform costs in `1..=cost_max`.
pub fn uniform(m: usize, n: usize, mass_max: i64, cost_max: i64, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (supplies, demands) = balanced_masses(&mut rng, m, n, mass_max);
    let costs = Uniform::new_inclusive(1, cost_max)
        .sample_iter(&mut rng)
        .take(m * n)
        .collect();
    Instance {
        m,
        n,
        supplies,
        demands,
        costs,
    }
}

/// Sources and destinations on the same `side x side` grid with squared
/// Euclidean costs; cell `k` sits at `(k % side, k / side)`.
pub fn grid_quadratic(side: usize, mass_max: i64, seed: u64) -> Instance {
    let cells = side * side;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (supplies, demands) = balanced_masses(&mut rng, cells, cells, mass_max);
    let mut costs = Vec::with_capacity(cells * cells);
    for a in 0..cells {
        let (xa, ya) = ((a % side) as i64, (a / side) as i64);
        for b in 0..cells {
            let (xb, yb) = ((b % side) as i64, (b / side) as i64);
            costs.push((xa - xb).pow(2) + (ya - yb).pow(2));
        }
    }
    Instance {
        m: cells,
        n: cells,
        supplies,
        demands,
        costs,
    }
}

fn balanced_masses(rng: &mut ChaCha8Rng, m: usize, n: usize, mass_max: i64) -> (Vec<i64>, Vec<i64>) {
    let dist = Uniform::new_inclusive(1, mass_max);
    let mut supplies: Vec<i64> = dist.sample_iter(&mut *rng).take(m).collect();
    let mut demands: Vec<i64> = dist.sample_iter(&mut *rng).take(n).collect();
    let gap: i64 = supplies.iter().sum::<i64>() - demands.iter().sum::<i64>();
    if gap > 0 {
        top_up(&mut demands, gap, mass_max);
    } else if gap < 0 {
        top_up(&mut supplies, -gap, mass_max);
    }
    (supplies, demands)
}

/// Adds `amount` to the last entry, then redistributes whatever exceeds
/// `mass_max` round-robin.
fn top_up(side: &mut [i64], amount: i64, mass_max: i64) {
    let last = side.len() - 1;
    side[last] += amount;
    let mut excess = (side[last] - mass_max).max(0);
    side[last] -= excess;
    while excess > 0 {
        let roomy = side.iter().filter(|&&v| v < mass_max).count() as i64;
        let capped = roomy > 0;
        let slots = if capped { roomy } else { side.len() as i64 };
        let share = (excess / slots).max(1);
        for v in side.iter_mut() {
            if excess == 0 {
                break;
            }
            let room = if capped { mass_max - *v } else { i64::MAX };
            let add = share.min(room).min(excess);
            *v += add;
            excess -= add;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_balanced() {
        let a = GenSpec::uniform_square(1000, 42).generate().unwrap();
        let b = GenSpec::uniform_square(1000, 42).generate().unwrap();
        assert_eq!(a, b);
        assert!(a.validate().is_ok());
        assert_ne!(a, GenSpec::uniform_square(1000, 43).generate().unwrap());
        for seed in 0..50 {
            let inst = uniform(37, 23, 1000, 50, seed);
            assert!(inst.validate().is_ok());
            assert!(inst.supplies.iter().chain(&inst.demands).all(|&x| x >= 1));
            assert!(inst.costs.iter().all(|&c| (1..=50).contains(&c)));
        }
    }

    #[test]
    fn cost_mean_matches_uniform() {
        let k = 1000;
        let expected = (k as f64 + 1.0) / 2.0;
        for seed in 0..10 {
            let inst = GenSpec::uniform_square(k, seed).generate().unwrap();
            let mean = inst.costs.iter().sum::<i64>() as f64 / inst.costs.len() as f64;
            assert!((mean - expected).abs() / expected < 0.03, "seed {seed}: mean {mean}");
        }
    }

    #[test]
    fn rectangular_balance_spreads_excess() {
        // 1000 x 36000 cannot stay below mass_max on the supply side
        let inst = GenSpec::uniform_rect(50, 1800, 9).generate().unwrap();
        assert!(inst.validate().is_ok());
        let spread = inst.supplies.iter().max().unwrap() - inst.supplies.iter().min().unwrap();
        assert!(spread <= 2, "supplies should be nearly even, spread {spread}");
    }

    #[test]
    fn top_up_stays_within_bounds_when_possible() {
        let mut v = vec![990, 500, 999, 995];
        top_up(&mut v, 30, 1000);
        assert_eq!(v.iter().sum::<i64>(), 990 + 500 + 999 + 995 + 30);
        assert!(v.iter().all(|&x| x <= 1000));
    }

    #[test]
    fn grid_costs() {
        let inst = GenSpec::grid(2, 1).generate().unwrap();
        assert_eq!((inst.m, inst.n), (4, 4));
        // cell 0 = (0,0), cell 3 = (1,1)
        assert_eq!(inst.cost(0, 3), 2);
        assert_eq!(inst.cost(2, 2), 0);
        let g = 7;
        let inst = grid_quadratic(g, 1000, 3);
        assert_eq!(*inst.costs.iter().max().unwrap(), 2 * (g as i64 - 1).pow(2));
        assert!(inst.validate().is_ok());
        let inst = GenSpec::grid(32, 7).generate().unwrap();
        assert_eq!((inst.m, inst.n), (1024, 1024));
    }

    #[test]
    fn bad_specs() {
        let mut s = GenSpec::uniform_square(3, 1);
        s.n = 4;
        assert_eq!(s.generate(), Err(GenError::NotSquare(3, 4)));
        assert_eq!(GenSpec::grid(1, 1).generate(), Err(GenError::GridTooSmall));
        let mut s = GenSpec::uniform_square(3, 1);
        s.mass_max = 0;
        assert_eq!(s.generate(), Err(GenError::BadBound));
    }
}
