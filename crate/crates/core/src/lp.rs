//! Exact two-phase simplex with Bland's anti-cycling rule.
//!
//! The solver works on a compact dictionary that stores only the nonbasic
//! columns, so problems with many inequality rows and few variables stay
//! small. With an exact scalar the optimum and witness are exact.

use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn is_satisfied_by(&self, x: &[T]) -> bool {
        let lhs = self
            .coeffs
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (a, v)| acc + a.clone() * v.clone());
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// `maximize objective · x` subject to linear constraints.
///
/// Variables are nonnegative unless marked free with [`LinearProgram::set_free`].
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<T> {
    vars: usize,
    objective: Vec<T>,
    constraints: Vec<Constraint<T>>,
    nonneg: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpSolution<T> {
    Optimal { value: T, witness: Vec<T> },
    Unbounded,
    Infeasible,
}

impl<T> LpSolution<T> {
    pub fn status(&self) -> LpStatus {
        match self {
            LpSolution::Optimal { .. } => LpStatus::Optimal,
            LpSolution::Unbounded => LpStatus::Unbounded,
            LpSolution::Infeasible => LpStatus::Infeasible,
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            LpSolution::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&[T]> {
        match self {
            LpSolution::Optimal { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(vars: usize) -> Self {
        LinearProgram {
            vars,
            objective: vec![T::zero(); vars],
            constraints: Vec::new(),
            nonneg: vec![true; vars],
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn set_objective(&mut self, coeffs: Vec<T>) -> Result<()> {
        self.check_width(coeffs.len())?;
        self.objective = coeffs;
        Ok(())
    }

    pub fn set_objective_coeff(&mut self, var: usize, c: T) {
        self.objective[var] = c;
    }

    pub fn set_free(&mut self, var: usize) {
        self.nonneg[var] = false;
    }

    pub fn is_nonneg(&self, var: usize) -> bool {
        self.nonneg[var]
    }

    pub fn add_constraint(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> Result<()> {
        self.check_width(coeffs.len())?;
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(())
    }

    /// Adds a constraint given as `(variable, coefficient)` pairs; repeated
    /// variables accumulate.
    pub fn add_sparse(&mut self, terms: &[(usize, T)], relation: Relation, rhs: T) -> Result<()> {
        let mut coeffs = vec![T::zero(); self.vars];
        for (v, c) in terms {
            if *v >= self.vars {
                return Err(Error::arg(format!("variable {v} out of range {}", self.vars)));
            }
            coeffs[*v] = coeffs[*v].clone() + c.clone();
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    fn check_width(&self, len: usize) -> Result<()> {
        if len != self.vars {
            return Err(Error::Dimension {
                expected: self.vars,
                actual: len,
            });
        }
        Ok(())
    }

    /// Whether `x` satisfies every constraint and sign restriction.
    pub fn is_feasible(&self, x: &[T]) -> bool {
        x.len() == self.vars
            && x.iter().zip(&self.nonneg).all(|(v, &nn)| !nn || *v >= T::zero())
            && self.constraints.iter().all(|c| c.is_satisfied_by(x))
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        self.objective
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    }

    pub fn maximize(&self) -> LpSolution<T> {
        lp_maximize(self)
    }
}

/// Solves `lp` exactly. Deterministic for identical input.
pub fn lp_maximize<T: Scalar>(lp: &LinearProgram<T>) -> LpSolution<T> {
    // column layout: split structural columns, then one slack per inequality,
    // then one artificial per row that needs it
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(lp.vars);
    let mut ncols = 0;
    for v in 0..lp.vars {
        if lp.nonneg[v] {
            col_of.push((ncols, None));
            ncols += 1;
        } else {
            col_of.push((ncols, Some(ncols + 1)));
            ncols += 2;
        }
    }
    let structural = ncols;

    struct Row<T> {
        coeffs: Vec<T>,
        rel: Relation,
        rhs: T,
    }
    let rows: Vec<Row<T>> = lp
        .constraints
        .iter()
        .map(|c| {
            let mut coeffs = vec![T::zero(); structural];
            for (v, a) in c.coeffs.iter().enumerate() {
                let (p, n) = col_of[v];
                coeffs[p] = a.clone();
                if let Some(n) = n {
                    coeffs[n] = -a.clone();
                }
            }
            let (coeffs, rel, rhs) = if c.rhs < T::zero() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (coeffs.into_iter().map(|a| -a).collect(), flipped, -c.rhs.clone())
            } else {
                (coeffs, c.relation, c.rhs.clone())
            };
            Row { coeffs, rel, rhs }
        })
        .collect();

    let mut next = structural;
    let mut slack = vec![None; rows.len()];
    for (i, r) in rows.iter().enumerate() {
        if r.rel != Relation::Eq {
            slack[i] = Some(next);
            next += 1;
        }
    }
    let first_artificial = next;
    let mut artificial = vec![None; rows.len()];
    for (i, r) in rows.iter().enumerate() {
        if r.rel != Relation::Le {
            artificial[i] = Some(next);
            next += 1;
        }
    }

    // nonbasic: structural columns plus surplus columns of Ge rows
    let mut nonbasic: Vec<usize> = (0..structural).collect();
    for (i, r) in rows.iter().enumerate() {
        if r.rel == Relation::Ge {
            nonbasic.push(slack[i].unwrap());
        }
    }
    let pos: std::collections::HashMap<usize, usize> =
        nonbasic.iter().enumerate().map(|(p, &v)| (v, p)).collect();

    let mut dict = Dictionary {
        basic: Vec::with_capacity(rows.len()),
        nonbasic,
        rows: Vec::with_capacity(rows.len()),
        rhs: Vec::with_capacity(rows.len()),
        obj: Vec::new(),
        obj_const: T::zero(),
    };
    let width = dict.nonbasic.len();
    for (i, r) in rows.iter().enumerate() {
        // basic = rhs - a·x (+ surplus for Ge rows)
        let mut d: Vec<T> = r.coeffs.iter().map(|a| -a.clone()).collect();
        d.resize(width, T::zero());
        if r.rel == Relation::Ge {
            d[pos[&slack[i].unwrap()]] = T::one();
        }
        dict.basic.push(if r.rel == Relation::Le {
            slack[i].unwrap()
        } else {
            artificial[i].unwrap()
        });
        dict.rows.push(d);
        dict.rhs.push(r.rhs.clone());
    }

    let has_artificial = artificial.iter().any(Option::is_some);
    if has_artificial {
        // phase 1: maximize -(sum of artificials)
        let mut obj = vec![T::zero(); width];
        let mut c0 = T::zero();
        for (i, b) in dict.basic.iter().enumerate() {
            if *b >= first_artificial {
                c0 = c0 - dict.rhs[i].clone();
                for (o, d) in obj.iter_mut().zip(&dict.rows[i]) {
                    *o = o.clone() - d.clone();
                }
            }
        }
        dict.obj = obj;
        dict.obj_const = c0;
        match dict.run() {
            Phase::Optimal => {}
            Phase::Unbounded => unreachable!("phase one objective is bounded by zero"),
        }
        if dict.obj_const < T::zero() {
            return LpSolution::Infeasible;
        }
        // drive remaining artificials out of the basis
        let mut r = 0;
        while r < dict.basic.len() {
            if dict.basic[r] >= first_artificial {
                let entering = (0..dict.nonbasic.len())
                    .filter(|&j| dict.nonbasic[j] < first_artificial && !dict.rows[r][j].is_zero())
                    .min_by_key(|&j| dict.nonbasic[j]);
                match entering {
                    Some(e) => dict.pivot(r, e),
                    None => {
                        // redundant row
                        dict.remove_row(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        dict.drop_columns(|v| v >= first_artificial);
    }

    // phase 2 objective in terms of the current nonbasic variables
    let mut cost = vec![T::zero(); first_artificial];
    for (v, c) in lp.objective.iter().enumerate() {
        let (p, n) = col_of[v];
        cost[p] = c.clone();
        if let Some(n) = n {
            cost[n] = -c.clone();
        }
    }
    let mut obj: Vec<T> = dict.nonbasic.iter().map(|&v| cost[v].clone()).collect();
    let mut c0 = T::zero();
    for (i, &b) in dict.basic.iter().enumerate() {
        if !cost[b].is_zero() {
            c0 = c0 + cost[b].clone() * dict.rhs[i].clone();
            for (o, d) in obj.iter_mut().zip(&dict.rows[i]) {
                if !d.is_zero() {
                    *o = o.clone() + cost[b].clone() * d.clone();
                }
            }
        }
    }
    dict.obj = obj;
    dict.obj_const = c0;
    if let Phase::Unbounded = dict.run() {
        return LpSolution::Unbounded;
    }

    let mut values = vec![T::zero(); first_artificial];
    for (i, &b) in dict.basic.iter().enumerate() {
        values[b] = dict.rhs[i].clone();
    }
    let witness: Vec<T> = col_of
        .iter()
        .map(|&(p, n)| match n {
            Some(n) => values[p].clone() - values[n].clone(),
            None => values[p].clone(),
        })
        .collect();
    LpSolution::Optimal {
        value: lp.evaluate(&witness),
        witness,
    }
}

const DEGENERATE_LIMIT: usize = 50;

enum Phase {
    Optimal,
    Unbounded,
}

/// `basic[i] = rhs[i] + Σ_j rows[i][j] · nonbasic[j]`,
/// `z = obj_const + Σ_j obj[j] · nonbasic[j]`.
struct Dictionary<T> {
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    obj: Vec<T>,
    obj_const: T,
}

impl<T: Scalar> Dictionary<T> {
    fn run(&mut self) -> Phase {
        // largest coefficient first; Bland's rule during long degenerate
        // runs so the method cannot cycle
        let mut stalled = 0;
        loop {
            let improving = (0..self.nonbasic.len()).filter(|&j| self.obj[j] > T::zero());
            let entering = if stalled < DEGENERATE_LIMIT {
                improving.max_by(|&a, &b| {
                    self.obj[a]
                        .partial_cmp(&self.obj[b])
                        .unwrap()
                        .then(self.nonbasic[b].cmp(&self.nonbasic[a]))
                })
            } else {
                improving.min_by_key(|&j| self.nonbasic[j])
            };
            let Some(e) = entering else {
                return Phase::Optimal;
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.basic.len() {
                let d = &self.rows[i][e];
                if *d < T::zero() {
                    let ratio = self.rhs[i].clone() / -d.clone();
                    let better = match &leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < *best || (ratio == *best && self.basic[i] < self.basic[*r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, ratio)) => {
                    if ratio.is_zero() {
                        stalled += 1;
                    } else {
                        stalled = 0;
                    }
                    self.pivot(r, e)
                }
                None => return Phase::Unbounded,
            }
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let a = self.rows[r][e].clone();
        debug_assert!(!a.is_zero());
        let inv = T::one() / a;
        let mut prow = std::mem::take(&mut self.rows[r]);
        for (j, d) in prow.iter_mut().enumerate() {
            if j == e {
                *d = inv.clone();
            } else if !d.is_zero() {
                *d = -d.clone() * inv.clone();
            }
        }
        let prhs = -self.rhs[r].clone() * inv.clone();
        let nz: Vec<usize> = (0..prow.len()).filter(|&j| j != e && !prow[j].is_zero()).collect();

        let update = |row: &mut Vec<T>, rhs: &mut T| {
            let f = row[e].clone();
            if f.is_zero() {
                return;
            }
            *rhs = rhs.clone() + f.clone() * prhs.clone();
            for &j in &nz {
                row[j] = row[j].clone() + f.clone() * prow[j].clone();
            }
            row[e] = f * prow[e].clone();
        };
        for i in 0..self.rows.len() {
            if i != r {
                let (row, rhs) = (&mut self.rows[i], &mut self.rhs[i]);
                update(row, rhs);
            }
        }
        update(&mut self.obj, &mut self.obj_const);

        self.rows[r] = prow;
        self.rhs[r] = prhs;
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[e]);
    }

    fn remove_row(&mut self, r: usize) {
        self.basic.remove(r);
        self.rows.remove(r);
        self.rhs.remove(r);
    }

    fn drop_columns(&mut self, drop: impl Fn(usize) -> bool) {
        let keep: Vec<usize> = (0..self.nonbasic.len()).filter(|&j| !drop(self.nonbasic[j])).collect();
        let filter = |v: &Vec<T>| keep.iter().map(|&j| v[j].clone()).collect::<Vec<T>>();
        for row in &mut self.rows {
            *row = filter(row);
        }
        self.nonbasic = keep.iter().map(|&j| self.nonbasic[j]).collect();
        self.obj.clear();
    }
}
