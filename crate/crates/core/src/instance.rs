//! Balanced transportation instances, flow solutions and their plain-text
//! formats.
//!
//! An instance file looks like
//!
//! ```text
//! # comment
//! p tp 2 3
//! s 5 5
//! d 3 3 4
//! c 1 2 3
//! c 4 5 6
//! ```
//!
//! and a solution file like
//!
//! ```text
//! o 37
//! f 1 1 3
//! f 1 2 2
//! ...
//! ```
//!
//! with 1-based indices and one `f` line per positive entry.

use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Which side of the bipartite graph a row of data belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Source,
    Destination,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Source => f.write_str("source"),
            Side::Destination => f.write_str("destination"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("instance must have at least one source and one destination (got {m}x{n})")]
    EmptyDimension { m: usize, n: usize },
    #[error("dimension mismatch: expected {expected} {what}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("negative {what} at index {index}: {value}")]
    NegativeEntry {
        what: &'static str,
        index: usize,
        value: i64,
    },
    #[error("total {0} mass overflows 64 bits")]
    MassOverflow(Side),
    #[error("cost {value} at index {index} exceeds the exact range {limit} for a {m}x{n} instance")]
    CostOutOfRange {
        index: usize,
        value: i64,
        limit: i64,
        m: usize,
        n: usize,
    },
    #[error("unbalanced: total supply {supply} != total demand {demand}")]
    Unbalanced { supply: i64, demand: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolutionError {
    #[error("entry ({row}, {col}) out of range for a {m}x{n} instance")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        m: usize,
        n: usize,
    },
    #[error("negative flow {flow} on ({row}, {col})")]
    NegativeFlow {
        row: usize,
        col: usize,
        flow: i64,
    },
    #[error("objective overflows 128 bits")]
    Overflow,
    #[error("{side} {index} ships {actual} but must ship {expected}")]
    Imbalance {
        side: Side,
        index: usize,
        expected: i64,
        actual: i128,
    },
}

/// A balanced transportation instance with a dense row-major cost matrix.
///
/// Fields are public so that callers (and parsers) can assemble arbitrary
/// data; [`Instance::validate`] is the gatekeeper and every solver entry
/// point calls it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub m: usize,
    pub n: usize,
    pub supplies: Vec<i64>,
    pub demands: Vec<i64>,
    pub costs: Vec<i64>,
}

impl Instance {
    /// Builds and validates an instance from a row-major cost vector.
    pub fn new(
        supplies: Vec<i64>,
        demands: Vec<i64>,
        costs: Vec<i64>,
    ) -> Result<Self, InstanceError> {
        let inst = Instance {
            m: supplies.len(),
            n: demands.len(),
            supplies,
            demands,
            costs,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Builds and validates an instance from a list of cost rows.
    pub fn from_rows(
        supplies: Vec<i64>,
        demands: Vec<i64>,
        rows: &[Vec<i64>],
    ) -> Result<Self, InstanceError> {
        let n = demands.len();
        if rows.len() != supplies.len() {
            return Err(InstanceError::DimensionMismatch {
                what: "cost rows",
                expected: supplies.len(),
                found: rows.len(),
            });
        }
        if let Some(row) = rows.iter().find(|r| r.len() != n) {
            return Err(InstanceError::DimensionMismatch {
                what: "costs per row",
                expected: n,
                found: row.len(),
            });
        }
        Self::new(supplies, demands, rows.concat())
    }

    /// Largest cost accepted for an `m x n` instance.
    ///
    /// Multipliers are sums of at most `m + n - 1` alternating costs, so this
    /// bound keeps every multiplier and reduced cost inside `i64`.
    pub fn cost_limit(m: usize, n: usize) -> i64 {
        i64::MAX / (2 * (m + n) as i64 + 1)
    }

    /// Checks every invariant and reports the first one that is violated.
    pub fn validate(&self) -> Result<(), InstanceError> {
        let (m, n) = (self.m, self.n);
        if m == 0 || n == 0 {
            return Err(InstanceError::EmptyDimension { m, n });
        }
        let dims = [
            ("supplies", m, self.supplies.len()),
            ("demands", n, self.demands.len()),
            ("costs", m * n, self.costs.len()),
        ];
        for (what, expected, found) in dims {
            if expected != found {
                return Err(InstanceError::DimensionMismatch {
                    what,
                    expected,
                    found,
                });
            }
        }
        for (what, data) in [
            ("supply", &self.supplies),
            ("demand", &self.demands),
            ("cost", &self.costs),
        ] {
            if let Some((index, &value)) = data.iter().enumerate().find(|(_, &v)| v < 0) {
                return Err(InstanceError::NegativeEntry { what, index, value });
            }
        }
        let limit = Self::cost_limit(m, n);
        if let Some((index, &value)) = self.costs.iter().enumerate().find(|(_, &c)| c > limit) {
            return Err(InstanceError::CostOutOfRange {
                index,
                value,
                limit,
                m,
                n,
            });
        }
        let supply = checked_total(&self.supplies).ok_or(InstanceError::MassOverflow(Side::Source))?;
        let demand =
            checked_total(&self.demands).ok_or(InstanceError::MassOverflow(Side::Destination))?;
        if supply != demand {
            return Err(InstanceError::Unbalanced { supply, demand });
        }
        Ok(())
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> i64 {
        self.costs[i * self.n + j]
    }

    pub fn cost_row(&self, i: usize) -> &[i64] {
        &self.costs[i * self.n..(i + 1) * self.n]
    }

    /// Total shipped mass (sum of supplies).
    pub fn total_mass(&self) -> i64 {
        self.supplies.iter().sum()
    }

    /// Exact objective `sum c_ij x_ij` of a solution.
    pub fn objective(&self, solution: &FlowSolution) -> Result<i128, SolutionError> {
        let mut z: i128 = 0;
        for e in &solution.entries {
            self.check_index(e)?;
            let term = (self.cost(e.source, e.destination) as i128)
                .checked_mul(e.flow as i128)
                .ok_or(SolutionError::Overflow)?;
            z = z.checked_add(term).ok_or(SolutionError::Overflow)?;
        }
        Ok(z)
    }

    /// Checks index ranges, non-negativity and every row/column sum.
    pub fn check_feasible(&self, solution: &FlowSolution) -> Result<(), SolutionError> {
        let mut out = vec![0i128; self.m];
        let mut inc = vec![0i128; self.n];
        for e in &solution.entries {
            self.check_index(e)?;
            if e.flow < 0 {
                return Err(SolutionError::NegativeFlow {
                    row: e.source,
                    col: e.destination,
                    flow: e.flow,
                });
            }
            out[e.source] += e.flow as i128;
            inc[e.destination] += e.flow as i128;
        }
        for (side, sums, targets) in [
            (Side::Source, &out, &self.supplies),
            (Side::Destination, &inc, &self.demands),
        ] {
            for (index, (&actual, &expected)) in sums.iter().zip(targets.iter()).enumerate() {
                if actual != expected as i128 {
                    return Err(SolutionError::Imbalance {
                        side,
                        index,
                        expected,
                        actual,
                    });
                }
            }
        }
        Ok(())
    }

    fn check_index(&self, e: &FlowEntry) -> Result<(), SolutionError> {
        if e.source >= self.m || e.destination >= self.n {
            return Err(SolutionError::IndexOutOfRange {
                row: e.source,
                col: e.destination,
                m: self.m,
                n: self.n,
            });
        }
        Ok(())
    }
}

fn checked_total(values: &[i64]) -> Option<i64> {
    values.iter().try_fold(0i64, |acc, &v| acc.checked_add(v))
}

/// One shipment `x_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowEntry {
    pub source: usize,
    pub destination: usize,
    pub flow: i64,
}

/// Sparse list of shipments. When produced from a basis it also carries
/// the zero-flow basic entries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowSolution {
    pub entries: Vec<FlowEntry>,
}

impl FlowSolution {
    pub fn from_triples(triples: &[(usize, usize, i64)]) -> Self {
        FlowSolution {
            entries: triples
                .iter()
                .map(|&(source, destination, flow)| FlowEntry {
                    source,
                    destination,
                    flow,
                })
                .collect(),
        }
    }

    /// Entries with strictly positive flow, sorted by (source, destination).
    pub fn positive(&self) -> Vec<FlowEntry> {
        let mut v: Vec<FlowEntry> = self.entries.iter().copied().filter(|e| e.flow > 0).collect();
        v.sort_unstable();
        v
    }

    /// Dense row-major matrix of flows; duplicate entries accumulate.
    pub fn to_dense(&self, m: usize, n: usize) -> Vec<i64> {
        let mut x = vec![0i64; m * n];
        for e in &self.entries {
            x[e.source * n + e.destination] += e.flow;
        }
        x
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: malformed header, expected `p tp <m> <n>`")]
    Header { line: usize },
    #[error("line {line}: expected {expected} values after `{tag}`, found {found}")]
    TokenCount {
        line: usize,
        tag: char,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: `{token}` is not an integer")]
    BadToken { line: usize, token: String },
    #[error("line {line}: unexpected `{tag}` line")]
    UnexpectedLine { line: usize, tag: String },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

/// Splits a stream into `(line number, tag, values)` records, skipping
/// blank lines and `#` comments.
fn records<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String, Vec<String>), ParseError>> {
    reader.lines().enumerate().filter_map(|(idx, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(ParseError::Io(e))),
        };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        let mut tokens = trimmed.split_whitespace().map(str::to_owned);
        let tag = tokens.next().unwrap_or_default();
        Some(Ok((idx + 1, tag, tokens.collect())))
    })
}

fn parse_ints<T: std::str::FromStr>(line: usize, tokens: &[String]) -> Result<Vec<T>, ParseError> {
    tokens
        .iter()
        .map(|t| {
            t.parse::<T>().map_err(|_| ParseError::BadToken {
                line,
                token: t.clone(),
            })
        })
        .collect()
}

fn expect_values(
    line: usize,
    tag: char,
    expected: usize,
    tokens: &[String],
) -> Result<Vec<i64>, ParseError> {
    if tokens.len() != expected {
        return Err(ParseError::TokenCount {
            line,
            tag,
            expected,
            found: tokens.len(),
        });
    }
    parse_ints(line, tokens)
}

/// Reads an instance in the `p tp` text format and validates it.
pub fn read_instance<R: BufRead>(reader: R) -> Result<Instance, ParseError> {
    let mut recs = records(reader);
    let (line, tag, tokens) = recs.next().ok_or(ParseError::Missing("header"))??;
    if tag != "p" || tokens.len() != 3 || tokens[0] != "tp" {
        return Err(ParseError::Header { line });
    }
    let dims: Vec<usize> = parse_ints(line, &tokens[1..]).map_err(|_| ParseError::Header { line })?;
    let (m, n) = (dims[0], dims[1]);
    if m == 0 || n == 0 {
        return Err(InstanceError::EmptyDimension { m, n }.into());
    }

    let mut supplies = None;
    let mut demands = None;
    let mut costs = Vec::with_capacity(m.saturating_mul(n));
    let mut rows = 0usize;
    for rec in recs {
        let (line, tag, tokens) = rec?;
        match tag.as_str() {
            "s" if supplies.is_none() => supplies = Some(expect_values(line, 's', m, &tokens)?),
            "d" if demands.is_none() => demands = Some(expect_values(line, 'd', n, &tokens)?),
            "c" if rows < m => {
                costs.extend(expect_values(line, 'c', n, &tokens)?);
                rows += 1;
            }
            _ => return Err(ParseError::UnexpectedLine { line, tag }),
        }
    }
    let supplies = supplies.ok_or(ParseError::Missing("supply line `s`"))?;
    let demands = demands.ok_or(ParseError::Missing("demand line `d`"))?;
    if rows < m {
        return Err(ParseError::Missing("cost rows `c`"));
    }
    let inst = Instance {
        m,
        n,
        supplies,
        demands,
        costs,
    };
    inst.validate()?;
    Ok(inst)
}

fn write_line<W: Write>(w: &mut W, tag: char, values: &[i64]) -> io::Result<()> {
    write!(w, "{tag}")?;
    for v in values {
        write!(w, " {v}")?;
    }
    writeln!(w)
}

/// Writes an instance in the `p tp` text format.
pub fn write_instance<W: Write>(inst: &Instance, mut w: W) -> io::Result<()> {
    writeln!(w, "p tp {} {}", inst.m, inst.n)?;
    write_line(&mut w, 's', &inst.supplies)?;
    write_line(&mut w, 'd', &inst.demands)?;
    for i in 0..inst.m {
        write_line(&mut w, 'c', inst.cost_row(i))?;
    }
    w.flush()
}

/// Writes `o <objective>` and one 1-based `f i j x` line per positive entry.
pub fn write_solution<W: Write>(objective: i128, solution: &FlowSolution, mut w: W) -> io::Result<()> {
    writeln!(w, "o {objective}")?;
    for e in solution.positive() {
        writeln!(w, "f {} {} {}", e.source + 1, e.destination + 1, e.flow)?;
    }
    w.flush()
}

/// Reads a solution file. Returns the declared objective (if present) and
/// the entries with 0-based indices.
pub fn read_solution<R: BufRead>(reader: R) -> Result<(Option<i128>, FlowSolution), ParseError> {
    let mut objective = None;
    let mut entries = Vec::new();
    for rec in records(reader) {
        let (line, tag, tokens) = rec?;
        match tag.as_str() {
            "o" if objective.is_none() && entries.is_empty() => {
                if tokens.len() != 1 {
                    return Err(ParseError::TokenCount {
                        line,
                        tag: 'o',
                        expected: 1,
                        found: tokens.len(),
                    });
                }
                objective = Some(parse_ints::<i128>(line, &tokens)?[0]);
            }
            "f" => {
                let v = expect_values(line, 'f', 3, &tokens)?;
                if v[0] < 1 || v[1] < 1 {
                    return Err(ParseError::BadToken {
                        line,
                        token: format!("{} {}", v[0], v[1]),
                    });
                }
                entries.push(FlowEntry {
                    source: (v[0] - 1) as usize,
                    destination: (v[1] - 1) as usize,
                    flow: v[2],
                });
            }
            _ => return Err(ParseError::UnexpectedLine { line, tag }),
        }
    }
    Ok((objective, FlowSolution { entries }))
}
