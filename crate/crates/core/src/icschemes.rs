//! Achievable schemes for index coding: composite coding, linear
//! instantiations of the distributed-source-coding scheme, one-shot decoding
//! and an exhaustive scalar linear code search.
//!
//! Message sets are `u64` bitmasks (bit `i` = message `i`).

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::caching::{DemandVector, Placement};
use crate::combinatorics::UserSet;
use crate::gf2::{conditional_rank, BitMatrix, BitVector, EchelonBasis, LinearSystem};
use crate::icmap::{build_digraph, caching_to_ic, max_acyclic_bound, CachingReduction, ICInstance, DEFAULT_VERTEX_CAP};
use crate::lp::{LinearProgram, LpSolution, Relation};
use crate::scalar::int;
use crate::{Error, Rational, Result};

pub type MessageSet = u64;

pub fn members(set: MessageSet) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| set >> i & 1 == 1)
}

pub fn message_set(items: impl IntoIterator<Item = usize>) -> MessageSet {
    items.into_iter().fold(0, |m, i| m | 1 << i)
}

/// Nonempty subsets of `set`, ascending as integers.
fn nonempty_subsets(set: MessageSet) -> impl Iterator<Item = MessageSet> {
    let mut next = Some(set & set.wrapping_neg());
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == set { None } else { Some((cur.wrapping_sub(set)) & set) };
        Some(cur)
    })
    .filter(|&s| s != 0)
}

fn as_set(set: MessageSet) -> String {
    format!("{{{}}}", members(set).map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","))
}

/// Demand and side-information masks of every user.
struct Masks {
    demand: Vec<MessageSet>,
    side: Vec<MessageSet>,
    all: MessageSet,
}

impl Masks {
    fn of(ic: &ICInstance) -> Result<Self> {
        let n = ic.message_count();
        if n > 63 {
            return Err(Error::Size {
                what: "message count",
                limit: 63,
                actual: n,
            });
        }
        Ok(Masks {
            demand: ic.users().iter().map(|u| message_set(u.demand.iter().copied())).collect(),
            side: ic.users().iter().map(|u| message_set(u.side.iter().copied())).collect(),
            all: (1u64 << n) - 1,
        })
    }

    fn check_decode_sets(&self, sets: &[MessageSet]) -> Result<()> {
        if sets.len() != self.demand.len() {
            return Err(Error::Dimension {
                expected: self.demand.len(),
                actual: sets.len(),
            });
        }
        for (j, &k) in sets.iter().enumerate() {
            if k & self.demand[j] != self.demand[j] || k & (self.side[j] | !self.all) != 0 {
                return Err(Error::arg(format!(
                    "decode set {} of user {} must contain its demands and avoid its side information",
                    as_set(k),
                    j + 1
                )));
            }
        }
        Ok(())
    }
}

/// Decode sets `K_j` and composite rates `S_P` (channel uses per channel use).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeAssignment {
    pub decode_sets: Vec<MessageSet>,
    /// Nonzero `S_P` only.
    pub rates: BTreeMap<MessageSet, Rational>,
}

impl CompositeAssignment {
    /// `v_J` for user `j`: total rate of composites inside `A_j ∪ K_j` that meet `J`.
    pub fn v(&self, ic: &ICInstance, user: usize, set: MessageSet) -> Result<Rational> {
        let m = Masks::of(ic)?;
        let known = m.side[user] | self.decode_sets[user];
        Ok(self
            .rates
            .iter()
            .filter(|(&p, _)| p & !known == 0 && p & set != 0)
            .map(|(_, s)| s.clone())
            .sum())
    }

    /// Largest symmetric rate this assignment supports; `Σ_{P⊄A_j} S_P ≤ 1`
    /// must hold for every user.
    pub fn symmetric_rate(&self, ic: &ICInstance) -> Result<Rational> {
        let m = Masks::of(ic)?;
        m.check_decode_sets(&self.decode_sets)?;
        if ic.user_count() == 0 {
            return Err(Error::arg("instance has no users"));
        }
        if self.rates.iter().any(|(&p, s)| p == 0 || p & !m.all != 0 || s < &Rational::zero()) {
            return Err(Error::arg("composite rates must be nonnegative on nonempty message sets"));
        }
        for j in 0..ic.user_count() {
            let load: Rational = self
                .rates
                .iter()
                .filter(|(&p, _)| p & !m.side[j] != 0)
                .map(|(_, s)| s.clone())
                .sum();
            if load > Rational::one() {
                return Err(Error::arg(format!("user {} must decompress {load} > 1 channel uses", j + 1)));
            }
        }
        let mut best: Option<Rational> = None;
        for j in 0..ic.user_count() {
            for set in nonempty_subsets(self.decode_sets[j]) {
                let v = self.v(ic, j, set)? / int(set.count_ones() as i64);
                if best.as_ref().map_or(true, |b| &v < b) {
                    best = Some(v);
                }
            }
        }
        Ok(best.unwrap())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositeResult {
    pub rate: Rational,
    pub assignment: CompositeAssignment,
    /// Number of joint decode-set selections.
    pub selections: u128,
    pub lps_solved: u64,
    /// The search stopped because the incumbent met the acyclic converse.
    pub met_converse: bool,
}

pub const DEFAULT_MAX_LPS: u64 = 1_000_000;

/// Exact LP for fixed decode sets of the listed users; returns `R_sym` and
/// the rates. Only composites inside some listed `A_j ∪ K_j` can help, so
/// the others are left out.
fn composite_lp(m: &Masks, assigned: &[(usize, MessageSet)]) -> Result<(Rational, BTreeMap<MessageSet, Rational>)> {
    let mut index: HashMap<MessageSet, usize> = HashMap::new();
    let mut vars: Vec<MessageSet> = Vec::new();
    for &(j, k) in assigned {
        let union = m.side[j] | k;
        if union.count_ones() > 20 {
            return Err(Error::Size {
                what: "side information plus decode set",
                limit: 20,
                actual: union.count_ones() as usize,
            });
        }
        for p in nonempty_subsets(union) {
            index.entry(p).or_insert_with(|| {
                vars.push(p);
                vars.len() - 1
            });
        }
    }
    let r = vars.len();
    let mut lp = LinearProgram::<Rational>::new(r + 1);
    lp.set_objective_coeff(r, Rational::one());
    for &(j, k) in assigned {
        let known = m.side[j] | k;
        for set in nonempty_subsets(k) {
            let mut terms = vec![(r, int(set.count_ones() as i64))];
            terms.extend(
                nonempty_subsets(known)
                    .filter(|p| p & set != 0)
                    .map(|p| (index[&p], -Rational::one())),
            );
            lp.add_sparse(&terms, Relation::Le, Rational::zero())?;
        }
    }
    for &side in &m.side {
        let terms: Vec<_> = vars
            .iter()
            .enumerate()
            .filter(|(_, &p)| p & !side != 0)
            .map(|(i, _)| (i, Rational::one()))
            .collect();
        if !terms.is_empty() {
            lp.add_sparse(&terms, Relation::Le, Rational::one())?;
        }
    }
    match lp.maximize() {
        LpSolution::Optimal { value, witness } => {
            let rates = vars
                .iter()
                .zip(witness)
                .filter(|(_, s)| !s.is_zero())
                .map(|(&p, s)| (p, s))
                .collect();
            Ok((value, rates))
        }
        other => unreachable!("composite LP is feasible and bounded, got {:?}", other.status()),
    }
}

/// All admissible decode sets of user `j`: `D_j ⊆ K_j ⊆ [N'] \ A_j`.
fn decode_options(m: &Masks, j: usize) -> Vec<MessageSet> {
    let free = m.all & !m.side[j] & !m.demand[j];
    let mut out = vec![m.demand[j]];
    out.extend(nonempty_subsets(free).map(|s| s | m.demand[j]));
    out
}

struct CompositeSearch<'a> {
    masks: &'a Masks,
    options: Vec<Vec<(MessageSet, Rational)>>,
    best: Option<(Rational, Vec<MessageSet>, BTreeMap<MessageSet, Rational>)>,
    converse: Option<Rational>,
    lps: u64,
    max_lps: u64,
}

impl CompositeSearch<'_> {
    fn met_converse(&self) -> bool {
        matches!((&self.best, &self.converse), (Some((v, ..)), Some(c)) if v >= c)
    }

    fn incumbent_beats(&self, bound: &Rational) -> bool {
        self.best.as_ref().is_some_and(|(v, ..)| v >= bound)
    }

    fn solve(&mut self, assigned: &[(usize, MessageSet)]) -> Result<(Rational, BTreeMap<MessageSet, Rational>)> {
        if self.lps >= self.max_lps {
            return Err(Error::Size {
                what: "composite LP count",
                limit: self.max_lps as usize,
                actual: self.lps as usize + 1,
            });
        }
        self.lps += 1;
        composite_lp(self.masks, assigned)
    }

    fn descend(&mut self, assigned: &mut Vec<(usize, MessageSet)>) -> Result<()> {
        let depth = assigned.len();
        for o in 0..self.options[depth].len() {
            if self.met_converse() {
                return Ok(());
            }
            let (k, single) = self.options[depth][o].clone();
            // options are sorted by their single-user bound, so nothing later helps
            if self.incumbent_beats(&single) {
                return Ok(());
            }
            assigned.push((depth, k));
            let (value, rates) = self.solve(assigned)?;
            if !self.incumbent_beats(&value) {
                if assigned.len() == self.options.len() {
                    let sets = assigned.iter().map(|&(_, k)| k).collect();
                    self.best = Some((value, sets, rates));
                } else {
                    self.descend(assigned)?;
                }
            }
            assigned.pop();
        }
        Ok(())
    }
}

/// Largest symmetric rate of composite coding with a single joint
/// decode-set selection, found by branch and bound with exact LPs.
///
/// `max_lps` bounds both the number of joint selections and the number of
/// LPs solved.
pub fn composite_selection_rate(ic: &ICInstance, max_lps: u64) -> Result<CompositeResult> {
    let m = Masks::of(ic)?;
    let users = ic.user_count();
    if users == 0 {
        return Err(Error::arg("instance has no users"));
    }
    let raw: Vec<Vec<MessageSet>> = (0..users).map(|j| decode_options(&m, j)).collect();
    let selections = raw.iter().fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128));
    if selections > max_lps as u128 {
        return Err(Error::Size {
            what: "joint decode-set selections",
            limit: max_lps as usize,
            actual: selections.min(usize::MAX as u128) as usize,
        });
    }

    let g = build_digraph(&ic_with_unit_lengths(ic)?);
    let converse = max_acyclic_bound(&g, DEFAULT_VERTEX_CAP)
        .ok()
        .map(|(size, _)| Rational::one() / size);

    let mut search = CompositeSearch {
        masks: &m,
        options: Vec::with_capacity(users),
        best: None,
        converse,
        lps: 0,
        max_lps,
    };
    for (j, opts) in raw.into_iter().enumerate() {
        let mut scored = Vec::with_capacity(opts.len());
        for k in opts {
            let (v, _) = search.solve(&[(j, k)])?;
            scored.push((k, v));
        }
        scored.sort_by(|a, b| {
            b.1.cmp(&a.1)
                .then(a.0.count_ones().cmp(&b.0.count_ones()))
                .then(a.0.cmp(&b.0))
        });
        search.options.push(scored);
    }
    search.descend(&mut Vec::with_capacity(users))?;
    let met_converse = search.met_converse();
    let (rate, decode_sets, rates) = search.best.expect("at least one selection is evaluated");
    Ok(CompositeResult {
        rate,
        assignment: CompositeAssignment { decode_sets, rates },
        selections,
        lps_solved: search.lps,
        met_converse,
    })
}

/// One time-sharing component: a joint selection, its composite rates and
/// the message-rate point it serves.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeComponent {
    /// Fraction of channel uses spent on this component.
    pub weight: Rational,
    pub assignment: CompositeAssignment,
    /// `R_i` for every message.
    pub rates: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSharedComposite {
    /// `min_i Σ_c weight_c · rates_c[i]`.
    pub rate: Rational,
    pub components: Vec<CompositeComponent>,
    /// Best rate of a single selection.
    pub single: CompositeResult,
    /// Pricing rounds after the single-selection search.
    pub rounds: u64,
    /// LPs solved overall, including the single-selection search.
    pub lps_solved: u64,
    pub met_converse: bool,
}

struct Column {
    decode_sets: Vec<MessageSet>,
    s: BTreeMap<MessageSet, Rational>,
    r: Vec<Rational>,
}

/// `max w·R` over composite coding with the listed decode sets fixed. For
/// the remaining users, composites outside the modelled ones are pooled per
/// demanded message `i` into `T_i ≥ Σ_{P ∋ i} S_P`; each `T_i` alone loads
/// every user lacking `i`. `Σ_{i∈B} R_i ≤ 1` is added for every set in
/// `cuts`.
fn weighted_region(
    m: &Masks,
    assigned: &[(usize, MessageSet)],
    w: &[Rational],
    cuts: &[MessageSet],
) -> (Rational, Vec<Rational>, BTreeMap<MessageSet, Rational>) {
    let n = w.len();
    let mut index: HashMap<MessageSet, usize> = HashMap::new();
    let mut vars: Vec<MessageSet> = Vec::new();
    for &(j, k) in assigned {
        for p in nonempty_subsets(m.side[j] | k) {
            index.entry(p).or_insert_with(|| {
                vars.push(p);
                vars.len() - 1
            });
        }
    }
    let open: Vec<usize> = (0..m.demand.len())
        .filter(|j| !assigned.iter().any(|&(a, _)| a == *j))
        .collect();
    let pooled = open.iter().fold(0, |acc, &j| acc | m.demand[j]);
    let s = vars.len();
    let mut pool = vec![None; n];
    let mut t = s + n;
    for i in members(pooled) {
        pool[i] = Some(t);
        t += 1;
    }
    let one = Rational::one;
    let mut lp = LinearProgram::<Rational>::new(t);
    for (i, wi) in w.iter().enumerate() {
        lp.set_objective_coeff(s + i, wi.clone());
        lp.add_sparse(&[(s + i, one())], Relation::Le, one()).expect("index in range");
    }
    let rate_row = |lp: &mut LinearProgram<Rational>, set: MessageSet, modelled: &[MessageSet], pooled: bool| {
        let mut terms: Vec<_> = members(set).map(|i| (s + i, one())).collect();
        terms.extend(modelled.iter().filter(|&&p| p & set != 0).map(|p| (index[p], -one())));
        if pooled {
            terms.extend(members(set).map(|i| (pool[i].expect("pooled message"), -one())));
        }
        lp.add_sparse(&terms, Relation::Le, Rational::zero()).expect("index in range");
    };
    for &b in cuts {
        let terms: Vec<_> = members(b).map(|i| (s + i, one())).collect();
        lp.add_sparse(&terms, Relation::Le, one()).expect("index in range");
    }
    for &(j, k) in assigned {
        let known: Vec<MessageSet> = nonempty_subsets(m.side[j] | k).collect();
        for set in nonempty_subsets(k) {
            rate_row(&mut lp, set, &known, false);
        }
    }
    for &j in &open {
        for set in nonempty_subsets(m.demand[j]) {
            rate_row(&mut lp, set, &vars, true);
        }
    }
    for &side in &m.side {
        let base: Vec<_> = vars
            .iter()
            .enumerate()
            .filter(|(_, &p)| p & !side != 0)
            .map(|(i, _)| (i, one()))
            .collect();
        let lacking: Vec<usize> = members(pooled & !side).collect();
        if lacking.is_empty() && !base.is_empty() {
            lp.add_sparse(&base, Relation::Le, one()).expect("index in range");
        }
        for i in lacking {
            let mut terms = base.clone();
            terms.push((pool[i].expect("pooled message"), one()));
            lp.add_sparse(&terms, Relation::Le, one()).expect("index in range");
        }
    }
    match lp.maximize() {
        LpSolution::Optimal { value, witness } => {
            let rates = vars
                .iter()
                .zip(&witness)
                .filter(|(_, x)| !x.is_zero())
                .map(|(&p, x)| (p, x.clone()))
                .collect();
            (value, witness[s..s + n].to_vec(), rates)
        }
        other => unreachable!("region LP is feasible and bounded, got {:?}", other.status()),
    }
}

/// Branch and bound for a selection whose region reaches past `threshold`
/// in direction `w`.
struct Pricing<'a> {
    masks: &'a Masks,
    w: &'a [Rational],
    cuts: &'a [MessageSet],
    options: Vec<Vec<(MessageSet, Rational)>>,
    threshold: Rational,
    best: Option<Column>,
    lps: u64,
    max_lps: u64,
}

impl Pricing<'_> {
    fn solve(&mut self, assigned: &[(usize, MessageSet)]) -> Result<(Rational, Vec<Rational>, BTreeMap<MessageSet, Rational>)> {
        if self.lps >= self.max_lps {
            return Err(Error::Size {
                what: "composite LP count",
                limit: self.max_lps as usize,
                actual: self.lps as usize + 1,
            });
        }
        self.lps += 1;
        Ok(weighted_region(self.masks, assigned, self.w, self.cuts))
    }

    fn descend(&mut self, assigned: &mut Vec<(usize, MessageSet)>) -> Result<()> {
        let depth = assigned.len();
        for o in 0..self.options[depth].len() {
            let (k, single) = self.options[depth][o].clone();
            if single <= self.threshold {
                return Ok(());
            }
            assigned.push((depth, k));
            let (value, r, s) = self.solve(assigned)?;
            if value > self.threshold {
                if assigned.len() == self.options.len() {
                    self.threshold = value;
                    self.best = Some(Column {
                        decode_sets: assigned.iter().map(|&(_, k)| k).collect(),
                        s,
                        r,
                    });
                } else {
                    self.descend(assigned)?;
                }
            }
            assigned.pop();
        }
        Ok(())
    }
}

/// Maximal message sets `B` that some order `i_1, …, i_m` decodes in turn:
/// `i_k` is demanded by a user whose side information misses
/// `i_{k+1}, …, i_m`. Any index code then has `Σ_{i∈B} R_i ≤ 1`. Empty
/// above 16 messages.
fn decodable_chains(m: &Masks) -> Vec<MessageSet> {
    let n = m.all.count_ones() as usize;
    if n > 16 {
        return Vec::new();
    }
    let mut ok = vec![false; 1 << n];
    ok[0] = true;
    for b in 1..1usize << n {
        let b64 = b as MessageSet;
        ok[b] = members(b64).any(|i| {
            ok[b & !(1 << i)]
                && (0..m.demand.len()).any(|j| m.demand[j] >> i & 1 == 1 && m.side[j] & b64 == 0)
        });
    }
    (1..1usize << n)
        .filter(|&b| ok[b] && (0..n).all(|i| b >> i & 1 == 1 || !ok[b | 1 << i]))
        .map(|b| b as MessageSet)
        .collect()
}

/// `max_{λ ∈ simplex} min_i Σ_c λ_c r_c[i]` as the dual pair; returns the
/// value, the weights `λ` and the message prices `w`.
fn master(points: &[Vec<Rational>]) -> (Rational, Vec<Rational>, Vec<Rational>) {
    let n = points[0].len();
    let c = points.len();
    let one = Rational::one;
    let mut primal = LinearProgram::<Rational>::new(c + 1);
    primal.set_free(c);
    primal.set_objective_coeff(c, one());
    for i in 0..n {
        let mut terms: Vec<_> = points.iter().enumerate().map(|(k, p)| (k, -p[i].clone())).collect();
        terms.push((c, one()));
        primal.add_sparse(&terms, Relation::Le, Rational::zero()).expect("index in range");
    }
    primal.add_sparse(&(0..c).map(|k| (k, one())).collect::<Vec<_>>(), Relation::Eq, one()).expect("index in range");

    let mut dual = LinearProgram::<Rational>::new(n + 1);
    dual.set_free(n);
    dual.set_objective_coeff(n, -one());
    for p in points {
        let mut terms: Vec<_> = p.iter().enumerate().map(|(i, x)| (i, x.clone())).collect();
        terms.push((n, -one()));
        dual.add_sparse(&terms, Relation::Le, Rational::zero()).expect("index in range");
    }
    dual.add_sparse(&(0..n).map(|i| (i, one())).collect::<Vec<_>>(), Relation::Eq, one()).expect("index in range");

    let (LpSolution::Optimal { value, witness: lambda }, LpSolution::Optimal { witness: wz, .. }) =
        (primal.maximize(), dual.maximize())
    else {
        unreachable!("master LPs are feasible and bounded")
    };
    (value, lambda[..c].to_vec(), wz[..n].to_vec())
}

/// Largest symmetric rate of composite coding when the channel is shared in
/// time between joint decode-set selections.
///
/// Starts from [`composite_selection_rate`] and adds selections by column
/// generation: the master LP prices the messages, and a branch and bound
/// over selections looks for a rate point that beats the current value
/// under those prices. Every LP is exact. `max_lps` bounds the LPs solved
/// overall.
pub fn composite_symmetric_rate(ic: &ICInstance, max_lps: u64) -> Result<TimeSharedComposite> {
    let single = composite_selection_rate(ic, max_lps)?;
    let m = Masks::of(ic)?;
    let n = ic.message_count();
    let users = ic.user_count();
    let mut lps = single.lps_solved;
    let mut columns = vec![Column {
        decode_sets: single.assignment.decode_sets.clone(),
        s: single.assignment.rates.clone(),
        r: vec![single.rate.clone(); n],
    }];
    let g = build_digraph(&ic_with_unit_lengths(ic)?);
    let converse = max_acyclic_bound(&g, DEFAULT_VERTEX_CAP)
        .ok()
        .map(|(size, _)| Rational::one() / size);
    let options: Vec<Vec<MessageSet>> = (0..users).map(|j| decode_options(&m, j)).collect();
    let cuts = decodable_chains(&m);

    let mut rounds = 0;
    let (rate, lambda) = loop {
        let points: Vec<Vec<Rational>> = columns.iter().map(|c| c.r.clone()).collect();
        let (z, lambda, w) = master(&points);
        if single.met_converse || converse.as_ref().is_some_and(|c| &z >= c) {
            break (z, lambda);
        }
        rounds += 1;
        let mut pricing = Pricing {
            masks: &m,
            w: &w,
            cuts: &cuts,
            options: Vec::with_capacity(users),
            threshold: z.clone(),
            best: None,
            lps,
            max_lps,
        };
        for (j, opts) in options.iter().enumerate() {
            let mut scored = Vec::with_capacity(opts.len());
            for &k in opts {
                let (v, ..) = pricing.solve(&[(j, k)])?;
                scored.push((k, v));
            }
            scored.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            pricing.options.push(scored);
        }
        pricing.descend(&mut Vec::with_capacity(users))?;
        lps = pricing.lps;
        match pricing.best {
            Some(col) => columns.push(col),
            None => break (z, lambda),
        }
    };
    let met_converse = converse.as_ref().is_some_and(|c| &rate >= c);
    let components = columns
        .into_iter()
        .zip(lambda)
        .filter(|(_, l)| !l.is_zero())
        .map(|(c, weight)| CompositeComponent {
            weight,
            assignment: CompositeAssignment {
                decode_sets: c.decode_sets,
                rates: c.s,
            },
            rates: c.r,
        })
        .collect();
    Ok(TimeSharedComposite {
        rate,
        components,
        single,
        rounds,
        lps_solved: lps,
        met_converse,
    })
}

fn ic_with_unit_lengths(ic: &ICInstance) -> Result<ICInstance> {
    let labels = (0..ic.message_count()).map(|m| ic.label(m).to_string()).collect();
    ICInstance::with_labels(vec![int(1); ic.message_count()], ic.users().to_vec(), labels)
}

/// One composite `V_P`: rows over the bits of the messages in `P`, taken in
/// increasing message order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composite {
    pub subset: MessageSet,
    pub rows: Vec<BitVector>,
}

/// Linear choice of the auxiliaries: `U_i` is message `i` as `L_i` uniform
/// bits and every `V_P` is a GF(2) linear function of `(U_i : i ∈ P)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSpec {
    bits: Vec<usize>,
    offsets: Vec<usize>,
    composites: Vec<Composite>,
}

impl LinearSpec {
    pub fn new(bits: Vec<usize>, composites: Vec<Composite>) -> Result<Self> {
        let n = bits.len();
        if n > 63 {
            return Err(Error::Size {
                what: "message count",
                limit: 63,
                actual: n,
            });
        }
        let mut offsets = Vec::with_capacity(n);
        let mut total = 0;
        for &b in &bits {
            offsets.push(total);
            total += b;
        }
        for c in &composites {
            if c.subset == 0 || c.subset >> n != 0 {
                return Err(Error::arg(format!("composite subset {} is not a nonempty set of messages", as_set(c.subset))));
            }
            let width: usize = members(c.subset).map(|i| bits[i]).sum();
            if let Some(r) = c.rows.iter().find(|r| r.len() != width) {
                return Err(Error::Dimension {
                    expected: width,
                    actual: r.len(),
                });
            }
        }
        Ok(LinearSpec {
            bits,
            offsets,
            composites,
        })
    }

    pub fn message_count(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[usize] {
        &self.bits
    }

    pub fn composites(&self) -> &[Composite] {
        &self.composites
    }

    pub fn total_bits(&self) -> usize {
        self.bits.iter().sum()
    }

    /// Every composite row as a row over all message bits.
    pub fn global_rows(&self) -> BitMatrix {
        let total = self.total_bits();
        let mut m = BitMatrix::new(total);
        for c in &self.composites {
            for row in &c.rows {
                let mut g = BitVector::zeros(total);
                let mut local = 0;
                for i in members(c.subset) {
                    g.write_at(self.offsets[i], &row.slice(local, self.bits[i]));
                    local += self.bits[i];
                }
                m.push_row(g).expect("width fixed");
            }
        }
        m
    }

    /// Unit rows selecting every bit of the messages in `set`.
    pub fn selector(&self, set: MessageSet) -> BitMatrix {
        let cols = members(set).flat_map(|i| self.offsets[i]..self.offsets[i] + self.bits[i]);
        BitMatrix::selector(self.total_bits(), cols)
    }

    /// `H(V | U_B)` in bits.
    pub fn conditional_entropy(&self, given: MessageSet) -> usize {
        conditional_rank(&self.global_rows(), &self.selector(given)).expect("matching widths")
    }

    /// The broadcast: value of every composite row on the message bits.
    pub fn encode(&self, messages: &[BitVector]) -> Result<BitVector> {
        let x = self.concat(messages)?;
        Ok(self.global_rows().mul_vec(&x))
    }

    fn concat(&self, messages: &[BitVector]) -> Result<BitVector> {
        if messages.len() != self.bits.len() {
            return Err(Error::Dimension {
                expected: self.bits.len(),
                actual: messages.len(),
            });
        }
        for (m, &b) in messages.iter().zip(&self.bits) {
            if m.len() != b {
                return Err(Error::Dimension {
                    expected: b,
                    actual: m.len(),
                });
            }
        }
        let refs: Vec<&BitVector> = messages.iter().collect();
        Ok(BitVector::concat(&refs))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KappaConstraint {
    pub user: usize,
    pub set: MessageSet,
    /// `I(U_J; V | U_{A_j ∪ K_j \ J})` in bits.
    pub kappa: usize,
    /// `Σ_{i∈J} L_i`.
    pub message_bits: usize,
}

/// Rank accounting for a [`LinearSpec`] under fixed decode sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateCertificate {
    /// `H_j = H(V | U_{A_j})` in bits.
    pub budgets: Vec<usize>,
    /// `max_j H_j`: bits the broadcast must carry.
    pub channel_bits: usize,
    pub constraints: Vec<KappaConstraint>,
    /// `min κ_J / (|J| · channel_bits)` over all constraints, in messages
    /// per channel bit; `None` when there is nothing to decode.
    pub rate: Option<Rational>,
    /// Indices into `constraints` attaining `rate`.
    pub binding: Vec<usize>,
    /// Constraints with `Σ_{i∈J} L_i > κ_J`: the spec's own messages are not
    /// decodable at their full length.
    pub violations: Vec<usize>,
}

impl RateCertificate {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Whether symmetric rate `r` (message bits per channel bit) is covered.
    pub fn supports(&self, r: &Rational) -> bool {
        self.rate.as_ref().map_or(true, |rate| r <= rate)
    }

    /// Whether per-message rates are covered: `Σ_{i∈J} R_i · channel_bits ≤ κ_J`
    /// for every constraint.
    pub fn supports_rates(&self, rates: &[Rational]) -> bool {
        let c = int(self.channel_bits as i64);
        self.constraints.iter().all(|k| {
            let load: Rational = members(k.set).map(|i| rates[i].clone()).sum();
            load * &c <= int(k.kappa as i64)
        })
    }

    /// `min_i L_i / channel_bits` over demanded messages when the spec's
    /// messages decode at full length.
    pub fn oneshot_rate(&self, ic: &ICInstance, spec: &LinearSpec) -> Option<Rational> {
        if !self.is_feasible() || self.channel_bits == 0 {
            return None;
        }
        ic.users()
            .iter()
            .flat_map(|u| u.demand.iter())
            .map(|&i| Rational::new((spec.bits[i] as i64).into(), (self.channel_bits as i64).into()))
            .min()
    }

    pub fn describe(&self, c: &KappaConstraint) -> String {
        format!("user {} J={} kappa={}", c.user + 1, as_set(c.set), c.kappa)
    }
}

/// Evaluates the scheme's rank conditions for a linear spec: the budgets
/// `H_j`, and `κ_J` for every `J ⊆ K_j` meeting `D_j`.
pub fn novel_feasibility(ic: &ICInstance, spec: &LinearSpec, decode_sets: &[MessageSet]) -> Result<RateCertificate> {
    let m = Masks::of(ic)?;
    if spec.message_count() != ic.message_count() {
        return Err(Error::Dimension {
            expected: ic.message_count(),
            actual: spec.message_count(),
        });
    }
    m.check_decode_sets(decode_sets)?;
    let v = spec.global_rows();
    let cond = |given: MessageSet| conditional_rank(&v, &spec.selector(given)).expect("matching widths");

    let budgets: Vec<usize> = m.side.iter().map(|&a| cond(a)).collect();
    let channel_bits = budgets.iter().copied().max().unwrap_or(0);
    let mut constraints = Vec::new();
    for j in 0..ic.user_count() {
        let k = decode_sets[j];
        let base = cond(m.side[j] | k);
        for set in nonempty_subsets(k).filter(|s| s & m.demand[j] != 0) {
            constraints.push(KappaConstraint {
                user: j,
                set,
                kappa: cond(m.side[j] | (k & !set)) - base,
                message_bits: members(set).map(|i| spec.bits[i]).sum(),
            });
        }
    }
    let ratio = |c: &KappaConstraint| {
        if channel_bits == 0 {
            Rational::zero()
        } else {
            Rational::new(
                (c.kappa as i64).into(),
                ((c.set.count_ones() as usize * channel_bits) as i64).into(),
            )
        }
    };
    let rate = constraints.iter().map(ratio).min();
    let binding = match &rate {
        Some(r) => (0..constraints.len()).filter(|&i| &ratio(&constraints[i]) == r).collect(),
        None => Vec::new(),
    };
    let violations = (0..constraints.len())
        .filter(|&i| constraints[i].message_bits > constraints[i].kappa)
        .collect();
    Ok(RateCertificate {
        budgets,
        channel_bits,
        constraints,
        rate,
        binding,
        violations,
    })
}

/// Realizes a composite assignment linearly: `scale·S_P` bits per composite,
/// message `i` split into parts `U_{i,P}` of that size, `V_P = ⊕_{i∈P} U_{i,P}`.
pub fn composite_to_linear(ic: &ICInstance, ca: &CompositeAssignment, scale: u64) -> Result<LinearSpec> {
    let n = ic.message_count();
    let mut sizes: BTreeMap<MessageSet, usize> = BTreeMap::new();
    for (&p, s) in &ca.rates {
        if p == 0 || p >> n != 0 {
            return Err(Error::arg(format!("composite set {} outside the messages", as_set(p))));
        }
        let scaled = s * int(scale as i64);
        if !scaled.is_integer() || scaled < Rational::zero() {
            return Err(Error::arg(format!("scale {scale} does not clear S_{} = {s}", as_set(p))));
        }
        let b = scaled.to_integer().to_string().parse::<usize>().expect("small integer");
        if b > 0 {
            sizes.insert(p, b);
        }
    }
    let mut bits = vec![0usize; n];
    let mut part_offset: BTreeMap<(usize, MessageSet), usize> = BTreeMap::new();
    for (&p, &b) in &sizes {
        for i in members(p) {
            part_offset.insert((i, p), bits[i]);
            bits[i] += b;
        }
    }
    let composites = sizes
        .iter()
        .map(|(&p, &b)| {
            let width: usize = members(p).map(|i| bits[i]).sum();
            let rows = (0..b)
                .map(|r| {
                    let mut row = BitVector::zeros(width);
                    let mut local = 0;
                    for i in members(p) {
                        row.set(local + part_offset[&(i, p)] + r, true);
                        local += bits[i];
                    }
                    row
                })
                .collect();
            Composite { subset: p, rows }
        })
        .collect();
    LinearSpec::new(bits, composites)
}

/// Decodes one broadcast at every user: composite values plus side
/// information as known equations; a user succeeds when all bits of its
/// demanded messages are determined and correct.
pub fn oneshot_simulate(ic: &ICInstance, spec: &LinearSpec, messages: &[BitVector]) -> Result<Vec<bool>> {
    if spec.message_count() != ic.message_count() {
        return Err(Error::Dimension {
            expected: ic.message_count(),
            actual: spec.message_count(),
        });
    }
    let x = spec.concat(messages)?;
    let rows = spec.global_rows();
    let sent = rows.mul_vec(&x);
    let total = spec.total_bits();
    let mut out = Vec::with_capacity(ic.user_count());
    for u in ic.users() {
        let mut sys = LinearSystem::new(total);
        for (r, row) in rows.rows().iter().enumerate() {
            sys.add_equation(row, sent.get(r))?;
        }
        for &a in &u.side {
            for b in spec.offsets[a]..spec.offsets[a] + spec.bits[a] {
                sys.add_equation(&BitVector::unit(total, b), x.get(b))?;
            }
        }
        let ok = u.demand.iter().all(|&d| {
            (spec.offsets[d]..spec.offsets[d] + spec.bits[d])
                .all(|b| sys.evaluate(&BitVector::unit(total, b)) == Some(x.get(b)))
        });
        out.push(ok);
    }
    Ok(out)
}

/// The YMA delivery as a linear spec on the caching reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct NovelInstance {
    pub reduction: CachingReduction,
    pub spec: LinearSpec,
    pub decode_sets: Vec<MessageSet>,
}

impl NovelInstance {
    /// `max_j H_j / B` from a certificate of this instance.
    pub fn certified_load(&self, cert: &RateCertificate, file_bits: u64) -> Rational {
        Rational::new((cert.channel_bits as i64).into(), (file_bits as i64).into())
    }
}

/// MAN placement, `K_j = D_j`, and one composite per retained YMA
/// transmission.
pub fn yma_as_novel(p: &Placement, d: &DemandVector) -> Result<NovelInstance> {
    let t = p
        .man_parameter()
        .ok_or_else(|| Error::arg("the YMA mapping needs a MAN placement"))?;
    let reduction = caching_to_ic(p, d)?;
    let ic = &reduction.ic;
    let bits: Vec<usize> = reduction
        .messages
        .iter()
        .map(|&(i, w)| p.length(i, w) as usize)
        .collect();
    let leaders = UserSet::from_indices(d.leaders());
    let mut composites = Vec::new();
    for s in crate::combinatorics::subsets_of_size(p.users(), t + 1) {
        if !s.intersects(leaders) {
            continue;
        }
        let parts: Vec<usize> = s
            .iter()
            .map(|u| reduction.message_index(d.file_of(u), s.without(u)).expect("MAN sub-file present"))
            .collect();
        let subset = message_set(parts.iter().copied());
        let width: usize = members(subset).map(|i| bits[i]).sum();
        let sub = bits[parts[0]];
        let rows = (0..sub)
            .map(|r| {
                let mut row = BitVector::zeros(width);
                let mut local = 0;
                for i in members(subset) {
                    row.set(local + r, true);
                    local += bits[i];
                }
                row
            })
            .collect();
        composites.push(Composite { subset, rows });
    }
    let decode_sets = ic.users().iter().map(|u| message_set(u.demand.iter().copied())).collect();
    let spec = LinearSpec::new(bits, composites)?;
    Ok(NovelInstance {
        reduction,
        spec,
        decode_sets,
    })
}

/// Best symmetric rate of a one-shot scalar binary linear code with unit
/// messages and at most `max_tx_bits` transmitted bits; `0` if none exists.
///
/// Candidate codes are row spaces, each enumerated once in reduced
/// echelon form.
pub fn bruteforce_linear_capacity(ic: &ICInstance, max_tx_bits: usize) -> Result<Rational> {
    let n = ic.message_count();
    if n > 8 {
        return Err(Error::Size {
            what: "message count",
            limit: 8,
            actual: n,
        });
    }
    if max_tx_bits > 4 {
        return Err(Error::Size {
            what: "transmission budget",
            limit: 4,
            actual: max_tx_bits,
        });
    }
    if ic.user_count() == 0 {
        return Err(Error::arg("instance has no users"));
    }
    for r in 1..=max_tx_bits.min(n) {
        let mut found = false;
        for_each_rref(n, r, &mut |rows| {
            if !found && decodable(ic, n, rows) {
                found = true;
            }
            !found
        });
        if found {
            return Ok(Rational::new(1.into(), (r as i64).into()));
        }
    }
    Ok(Rational::zero())
}

fn decodable(ic: &ICInstance, n: usize, rows: &[BitVector]) -> bool {
    ic.users().iter().all(|u| {
        let mut basis = EchelonBasis::new(n);
        for r in rows {
            basis.insert(r);
        }
        for &a in &u.side {
            basis.insert(&BitVector::unit(n, a));
        }
        u.demand.iter().all(|&d| basis.contains(&BitVector::unit(n, d)))
    })
}

/// Calls `f` with every `r`-dimensional subspace of GF(2)^n as its reduced
/// row echelon basis; stops when `f` returns false.
fn for_each_rref(n: usize, r: usize, f: &mut dyn FnMut(&[BitVector]) -> bool) {
    use itertools::Itertools;
    for pivots in (0..n).combinations(r) {
        // free positions: columns right of row i's pivot that are not pivots
        let free: Vec<(usize, usize)> = (0..r)
            .flat_map(|i| {
                let pivots = &pivots;
                (pivots[i] + 1..n)
                    .filter(move |c| !pivots.contains(c))
                    .map(move |c| (i, c))
            })
            .collect();
        for fill in 0u64..1 << free.len() {
            let mut rows: Vec<BitVector> = pivots.iter().map(|&p| BitVector::unit(n, p)).collect();
            for (b, &(i, c)) in free.iter().enumerate() {
                if fill >> b & 1 == 1 {
                    rows[i].set(c, true);
                }
            }
            if !f(&rows) {
                return;
            }
        }
    }
}
