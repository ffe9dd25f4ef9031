//! Lower bounds on the delivery load under uncoded placement.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{One, Zero};

use crate::caching::{yma_load, DemandVector, Placement};
use crate::combinatorics::{binom, permutations, tuples, UserSet};
use crate::lp::{LinearProgram, LpSolution, Relation};
use crate::scalar::int;
use crate::{Error, Rational, Result};

/// `x_t`: fraction of all library bits cached by exactly `t` users.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacementProfile {
    x: Vec<Rational>,
}

impl PlacementProfile {
    pub fn new(x: Vec<Rational>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::arg("profile needs at least x_0"));
        }
        if x.iter().any(|v| v < &Rational::zero()) {
            return Err(Error::arg("profile entries must be nonnegative"));
        }
        if x.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::arg("profile entries must sum to 1"));
        }
        Ok(PlacementProfile { x })
    }

    /// All bits cached by exactly `t` of `users` users.
    pub fn indicator(users: usize, t: usize) -> Self {
        let mut x = vec![Rational::zero(); users + 1];
        x[t] = Rational::one();
        PlacementProfile { x }
    }

    pub fn values(&self) -> &[Rational] {
        &self.x
    }

    pub fn users(&self) -> usize {
        self.x.len() - 1
    }

    /// `Σ t·x_t ≤ KM/N`.
    pub fn fits_memory(&self, files: usize, memory: &Rational) -> bool {
        let used: Rational = self.x.iter().enumerate().map(|(t, v)| v * int(t as i64)).sum();
        used <= memory * int(self.users() as i64) / int(files as i64)
    }
}

pub fn aggregate_xt(p: &Placement) -> PlacementProfile {
    let mut x = vec![Rational::zero(); p.users() + 1];
    let total = int((p.files() as u64 * p.file_bits()) as i64);
    for i in 0..p.files() {
        for (w, seg) in p.segments(i) {
            x[w.len()] += int(seg.len as i64);
        }
    }
    for v in &mut x {
        *v = &*v / &total;
    }
    PlacementProfile { x }
}

fn check_nk(files: usize, users: usize) -> Result<()> {
    if files == 0 || users == 0 {
        return Err(Error::arg("N and K must be positive"));
    }
    Ok(())
}

/// `c_q = (binom(K, q+1) - binom(K - min(K,N), q+1)) / binom(K, q)`.
pub fn c_q(files: usize, users: usize, q: usize) -> Result<Rational> {
    check_nk(files, users)?;
    if q > users {
        return Err(Error::arg(format!("q = {q} outside 0..={users}")));
    }
    Ok(yma_load(files, users, q))
}

/// `s_q = c_q - c_{q-1}`.
pub fn s_q(files: usize, users: usize, q: usize) -> Result<Rational> {
    if q == 0 {
        return Err(Error::arg("s_q is defined for q ≥ 1"));
    }
    Ok(c_q(files, users, q)? - c_q(files, users, q - 1)?)
}

/// `max_{q∈[K]} c_q + s_q (KM/N - q)`.
pub fn theorem3_bound(files: usize, users: usize, memory: &Rational) -> Result<Rational> {
    check_nk(files, users)?;
    if memory < &Rational::zero() || memory > &int(files as i64) {
        return Err(Error::arg(format!("M = {memory} outside [0, {files}]")));
    }
    let tm = memory * int(users as i64) / int(files as i64);
    let mut best: Option<Rational> = None;
    for q in 1..=users {
        let v = c_q(files, users, q)? + s_q(files, users, q)? * (&tm - int(q as i64));
        if best.as_ref().map_or(true, |b| &v > b) {
            best = Some(v);
        }
    }
    Ok(best.unwrap())
}

/// `Σ_t c_t x_t`.
pub fn profile_lower_bound(x: &PlacementProfile, files: usize, users: usize) -> Result<Rational> {
    if x.users() != users {
        return Err(Error::Dimension {
            expected: users + 1,
            actual: x.values().len(),
        });
    }
    (0..=users).map(|t| c_q(files, users, t).map(|c| c * &x.x[t])).sum()
}

/// `w_{q,i} = c_i - c_q + (q - i) s_q`.
pub fn appendix_c_weight(files: usize, users: usize, q: usize, i: usize) -> Result<Rational> {
    if q == 0 || q > users || i > users {
        return Err(Error::arg(format!("need q in 1..={users} and i in 0..={users}")));
    }
    Ok(c_q(files, users, i)? - c_q(files, users, q)? + s_q(files, users, q)? * int(q as i64 - i as i64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadMode {
    Worst,
    Average,
}

/// Which user orders enter the LP per demand vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderSet {
    /// Permutations of the lowest-indexed user per demanded file. Weaker
    /// than `Strict` when `N < K`.
    Leaders,
    /// Permutations of every user set with one user per demanded file.
    Strict,
}

/// Heterogeneous cache sizes and file lengths, in units of `B` bits.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralInstance {
    pub cache_sizes: Vec<Rational>,
    pub file_lengths: Vec<Rational>,
    pub mode: LoadMode,
    /// Per-file request probabilities for the average load, demands drawn
    /// independently per user; uniform when absent.
    pub popularity: Option<Vec<Rational>>,
}

impl GeneralInstance {
    pub fn new(
        cache_sizes: Vec<Rational>,
        file_lengths: Vec<Rational>,
        mode: LoadMode,
        popularity: Option<Vec<Rational>>,
    ) -> Result<Self> {
        if cache_sizes.is_empty() || file_lengths.is_empty() {
            return Err(Error::arg("need at least one user and one file"));
        }
        if cache_sizes.len() > 16 {
            return Err(Error::Size {
                what: "user count",
                limit: 16,
                actual: cache_sizes.len(),
            });
        }
        if cache_sizes.iter().chain(&file_lengths).any(|v| v < &Rational::zero()) {
            return Err(Error::arg("cache sizes and file lengths must be nonnegative"));
        }
        if let Some(p) = &popularity {
            if p.len() != file_lengths.len() {
                return Err(Error::Dimension {
                    expected: file_lengths.len(),
                    actual: p.len(),
                });
            }
            if p.iter().any(|v| v < &Rational::zero()) || p.iter().sum::<Rational>() != Rational::one() {
                return Err(Error::arg("file popularity must be a probability vector"));
            }
        }
        Ok(GeneralInstance {
            cache_sizes,
            file_lengths,
            mode,
            popularity,
        })
    }

    /// `K` users with memory `M`, `N` unit-length files.
    pub fn symmetric(files: usize, users: usize, memory: Rational, mode: LoadMode) -> Result<Self> {
        Self::new(vec![memory; users], vec![Rational::one(); files], mode, None)
    }

    pub fn files(&self) -> usize {
        self.file_lengths.len()
    }

    pub fn users(&self) -> usize {
        self.cache_sizes.len()
    }

    fn demand_probability(&self, d: &[usize]) -> Rational {
        match &self.popularity {
            Some(p) => d.iter().map(|&f| p[f].clone()).product(),
            None => int(1) / int(self.files().pow(self.users() as u32) as i64),
        }
    }
}

pub const DEFAULT_LP_CAP: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LpBoundOptions {
    pub orders: OrderSet,
    /// Limit on `N^K · min(N,K)!`.
    pub cap: usize,
}

impl Default for LpBoundOptions {
    fn default() -> Self {
        LpBoundOptions {
            orders: OrderSet::Strict,
            cap: DEFAULT_LP_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpBound {
    pub value: Rational,
    /// Optimal sub-file lengths `F_{j,W}` in units of `B`, indexed by file and
    /// the bitmask of `W`.
    pub placement: Vec<Vec<Rational>>,
    pub acyclic_rows: usize,
}

/// An acyclic-set row: ordered users with the distinct files they demand.
type OrderRow = Vec<(usize, usize)>;

fn order_rows(d: &[usize], orders: OrderSet) -> Vec<OrderRow> {
    let dv = DemandVector::new(d.to_vec(), usize::MAX).expect("indices checked by caller");
    let sets: Vec<Vec<usize>> = match orders {
        OrderSet::Leaders => vec![dv.leaders()],
        OrderSet::Strict => dv
            .distinct_files()
            .iter()
            .map(|&f| (0..d.len()).filter(|&u| d[u] == f).collect::<Vec<_>>())
            .multi_cartesian_product()
            .collect(),
    };
    let mut rows = Vec::new();
    for set in sets {
        for perm in permutations(&set) {
            rows.push(perm.iter().map(|&u| (u, d[u])).collect());
        }
    }
    rows
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// The LP bound over all uncoded placements: minimize the worst-case or
/// expected load subject to file-length, cache-size and acyclic-set
/// constraints from every demand vector and chosen user order.
pub fn general_lp_bound(g: &GeneralInstance, opts: LpBoundOptions) -> Result<LpBound> {
    let (n, k) = (g.files(), g.users());
    let work = (n as f64).powi(k as i32) * factorial(n.min(k)) as f64;
    if work > opts.cap as f64 {
        return Err(Error::Size {
            what: "N^K · min(N,K)!",
            limit: opts.cap,
            actual: work.min(usize::MAX as f64) as usize,
        });
    }
    let subsets = 1usize << k;
    let var = |j: usize, w: UserSet| j * subsets + w.0 as usize;
    let placement_vars = n * subsets;
    let demands = tuples(n, k);
    let load_vars = match g.mode {
        LoadMode::Worst => 1,
        LoadMode::Average => demands.len(),
    };
    let mut lp = LinearProgram::<Rational>::new(placement_vars + load_vars);

    for j in 0..n {
        let terms: Vec<_> = (0..subsets).map(|w| (j * subsets + w, Rational::one())).collect();
        lp.add_sparse(&terms, Relation::Eq, g.file_lengths[j].clone())?;
    }
    for u in 0..k {
        let terms: Vec<_> = (0..n)
            .flat_map(|j| {
                UserSet::full(k)
                    .subsets()
                    .filter(move |w| w.contains(u))
                    .map(move |w| (var(j, w), Rational::one()))
            })
            .collect();
        lp.add_sparse(&terms, Relation::Le, g.cache_sizes[u].clone())?;
    }

    let mut blocks: Vec<(usize, Vec<OrderRow>)> = Vec::new();
    match g.mode {
        LoadMode::Worst => {
            let rows: BTreeSet<OrderRow> = demands.iter().flat_map(|d| order_rows(d, opts.orders)).collect();
            // a row that is a proper prefix of another row is implied by it
            let kept = rows
                .iter()
                .filter(|r| {
                    rows.range((*r).clone()..)
                        .nth(1)
                        .map_or(true, |next| !next.starts_with(r))
                })
                .cloned()
                .collect();
            blocks.push((placement_vars, kept));
        }
        LoadMode::Average => {
            for (di, d) in demands.iter().enumerate() {
                blocks.push((placement_vars + di, order_rows(d, opts.orders)));
            }
        }
    }
    let mut acyclic_rows = 0;
    for (load, rows) in blocks {
        for row in rows {
            let mut terms = vec![(load, -Rational::one())];
            let mut removed = UserSet::EMPTY;
            for &(u, f) in &row {
                removed = removed.with(u);
                for w in UserSet::full(k).difference(removed).subsets() {
                    terms.push((var(f, w), Rational::one()));
                }
            }
            lp.add_sparse(&terms, Relation::Le, Rational::zero())?;
            acyclic_rows += 1;
        }
    }

    match g.mode {
        LoadMode::Worst => lp.set_objective_coeff(placement_vars, -Rational::one()),
        LoadMode::Average => {
            for (di, d) in demands.iter().enumerate() {
                lp.set_objective_coeff(placement_vars + di, -g.demand_probability(d));
            }
        }
    }

    match lp.maximize() {
        LpSolution::Optimal { value, witness } => Ok(LpBound {
            value: -value,
            placement: (0..n)
                .map(|j| witness[j * subsets..(j + 1) * subsets].to_vec())
                .collect(),
            acyclic_rows,
        }),
        LpSolution::Infeasible => Err(Error::arg("no placement satisfies the file and cache constraints")),
        LpSolution::Unbounded => unreachable!("loads are bounded below by zero"),
    }
}

/// Profile of a placement in which every `F_{j,W}` with `|W| = t` has length
/// `lengths_by_size[t]`.
pub fn symmetric_profile(users: usize, lengths_by_size: &[Rational]) -> Result<PlacementProfile> {
    if lengths_by_size.len() != users + 1 {
        return Err(Error::Dimension {
            expected: users + 1,
            actual: lengths_by_size.len(),
        });
    }
    let counts: Vec<Rational> = lengths_by_size
        .iter()
        .enumerate()
        .map(|(t, l)| l * int(binom(users as i64, t as i64) as i64))
        .collect();
    let total: Rational = counts.iter().sum();
    if total.is_zero() {
        return Err(Error::arg("placement has no bits"));
    }
    PlacementProfile::new(counts.into_iter().map(|c| c / &total).collect())
}
