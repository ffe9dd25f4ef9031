//! Index coding view of a delivery phase: the caching reduction, side
//! information digraphs and acyclic-set lower bounds.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::Zero;

use crate::caching::{DemandVector, Placement};
use crate::combinatorics::UserSet;
use crate::scalar::int;
use crate::{Error, Rational, Result};

/// One receiver: the messages it wants and the messages it already has.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IcUser {
    pub demand: BTreeSet<usize>,
    pub side: BTreeSet<usize>,
}

impl IcUser {
    pub fn new(demand: impl IntoIterator<Item = usize>, side: impl IntoIterator<Item = usize>) -> Self {
        IcUser {
            demand: demand.into_iter().collect(),
            side: side.into_iter().collect(),
        }
    }
}

/// A broadcast index coding instance with `N'` messages and `K'` users.
/// Indices are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct ICInstance {
    lengths: Vec<Rational>,
    users: Vec<IcUser>,
    labels: Vec<String>,
}

impl ICInstance {
    /// Messages of unit length labelled `1..=N'`.
    pub fn unit(messages: usize, users: Vec<IcUser>) -> Result<Self> {
        Self::new(vec![int(1); messages], users)
    }

    pub fn new(lengths: Vec<Rational>, users: Vec<IcUser>) -> Result<Self> {
        let labels = (1..=lengths.len()).map(|i| i.to_string()).collect();
        Self::with_labels(lengths, users, labels)
    }

    pub fn with_labels(lengths: Vec<Rational>, users: Vec<IcUser>, labels: Vec<String>) -> Result<Self> {
        let n = lengths.len();
        if labels.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: labels.len(),
            });
        }
        if let Some(i) = lengths.iter().position(|l| l < &Rational::zero()) {
            return Err(Error::arg(format!("message {} has negative length", i + 1)));
        }
        for (j, u) in users.iter().enumerate() {
            let j = j + 1;
            if u.demand.is_empty() {
                return Err(Error::arg(format!("user {j} demands nothing")));
            }
            if let Some(&m) = u.demand.iter().chain(&u.side).find(|&&m| m >= n) {
                return Err(Error::arg(format!("user {j} refers to message {} of {n}", m + 1)));
            }
            if u.side.len() == n {
                return Err(Error::arg(format!("user {j} already knows every message")));
            }
            if let Some(m) = u.demand.intersection(&u.side).next() {
                return Err(Error::arg(format!("user {j} both demands and knows message {}", m + 1)));
            }
        }
        Ok(ICInstance { lengths, users, labels })
    }

    pub fn message_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn users(&self) -> &[IcUser] {
        &self.users
    }

    pub fn user(&self, j: usize) -> &IcUser {
        &self.users[j]
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    pub fn length(&self, m: usize) -> &Rational {
        &self.lengths[m]
    }

    pub fn label(&self, m: usize) -> &str {
        &self.labels[m]
    }

    pub fn is_multiple_unicast(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.users
            .iter()
            .all(|u| u.demand.len() == 1 && u.demand.iter().all(|&m| seen.insert(m)))
    }
}

/// An [`ICInstance`] obtained from a caching delivery phase, with the maps
/// back to caching users and sub-files.
#[derive(Clone, Debug, PartialEq)]
pub struct CachingReduction {
    pub ic: ICInstance,
    /// Caching user behind each IC user.
    pub users: Vec<usize>,
    /// `(file, W)` behind each message.
    pub messages: Vec<(usize, UserSet)>,
}

impl CachingReduction {
    pub fn message_index(&self, file: usize, w: UserSet) -> Option<usize> {
        self.messages.iter().position(|&m| m == (file, w))
    }

    pub fn ic_user(&self, caching_user: usize) -> Option<usize> {
        self.users.iter().position(|&u| u == caching_user)
    }
}

pub fn message_label(file: usize, w: UserSet) -> String {
    format!("({},{})", file + 1, w)
}

/// One message per positive-length `F_{i,W}` with `i ∈ N(d)`; user `k`
/// demands `F_{d_k,W}` for `k ∉ W` and knows every `F_{i,W}` with `k ∈ W`.
/// Users left with nothing to demand are omitted.
pub fn caching_to_ic(p: &Placement, d: &DemandVector) -> Result<CachingReduction> {
    if d.users() != p.users() {
        return Err(Error::Dimension {
            expected: p.users(),
            actual: d.users(),
        });
    }
    let mut messages = Vec::new();
    let mut lengths = Vec::new();
    let mut labels = Vec::new();
    for i in d.distinct_files() {
        if i >= p.files() {
            return Err(Error::arg(format!("demanded file {} does not exist", i + 1)));
        }
        for (w, seg) in p.segments(i) {
            messages.push((i, w));
            lengths.push(int(seg.len as i64));
            labels.push(message_label(i, w));
        }
    }
    let mut users = Vec::new();
    let mut ic_users = Vec::new();
    for k in 0..p.users() {
        let demand: BTreeSet<usize> = messages
            .iter()
            .enumerate()
            .filter(|(_, &(i, w))| i == d.file_of(k) && !w.contains(k))
            .map(|(m, _)| m)
            .collect();
        if demand.is_empty() {
            continue;
        }
        let side = messages
            .iter()
            .enumerate()
            .filter(|(_, (_, w))| w.contains(k))
            .map(|(m, _)| m);
        ic_users.push(IcUser::new(demand, side));
        users.push(k);
    }
    Ok(CachingReduction {
        ic: ICInstance::with_labels(lengths, ic_users, labels)?,
        users,
        messages,
    })
}

/// A virtual single-demand user: IC user `user` wanting `message`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub user: usize,
    pub message: usize,
    pub label: String,
}

/// Digraph on virtual users; edge `a → b` iff the user of `b` knows the
/// message of `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct SideInfoDigraph {
    vertices: Vec<Vertex>,
    weights: Vec<Rational>,
    out: Vec<Vec<usize>>,
}

impl SideInfoDigraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn weight(&self, v: usize) -> &Rational {
        &self.weights[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.out[a].contains(&b)
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn find(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    /// The vertex for IC user `user` demanding `message`.
    pub fn vertex_of(&self, user: usize, message: usize) -> Option<usize> {
        self.vertices
            .iter()
            .position(|v| v.user == user && v.message == message)
    }

    pub fn resolve(&self, labels: &[&str]) -> Result<AcyclicSet> {
        labels
            .iter()
            .map(|l| self.find(l).ok_or_else(|| Error::arg(format!("unknown vertex {l}"))))
            .collect::<Result<Vec<_>>>()
            .map(AcyclicSet)
    }
}

/// Vertices are labelled by their message; a message wanted by several
/// users gets one vertex per user, labelled `message@user` (1-based user).
pub fn build_digraph(ic: &ICInstance) -> SideInfoDigraph {
    let mut demanders: HashMap<usize, usize> = HashMap::new();
    for u in ic.users() {
        for &m in &u.demand {
            *demanders.entry(m).or_default() += 1;
        }
    }
    let mut vertices = Vec::new();
    for (j, u) in ic.users().iter().enumerate() {
        for &m in &u.demand {
            let label = if demanders[&m] == 1 {
                ic.label(m).to_string()
            } else {
                format!("{}@{}", ic.label(m), j + 1)
            };
            vertices.push(Vertex {
                user: j,
                message: m,
                label,
            });
        }
    }
    let out = vertices
        .iter()
        .map(|a| {
            (0..vertices.len())
                .filter(|&b| ic.user(vertices[b].user).side.contains(&a.message))
                .collect()
        })
        .collect();
    let weights = vertices.iter().map(|v| ic.length(v.message).clone()).collect();
    SideInfoDigraph {
        vertices,
        weights,
        out,
    }
}

/// Vertex indices of a [`SideInfoDigraph`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AcyclicSet(pub Vec<usize>);

impl AcyclicSet {
    pub fn labels<'a>(&self, g: &'a SideInfoDigraph) -> Vec<&'a str> {
        self.0.iter().map(|&v| g.vertex(v).label.as_str()).collect()
    }
}

fn check_vertices(g: &SideInfoDigraph, s: &[usize]) -> Result<Vec<bool>> {
    let mut member = vec![false; g.vertex_count()];
    for &v in s {
        if v >= g.vertex_count() {
            return Err(Error::arg(format!("unknown vertex {v}")));
        }
        member[v] = true;
    }
    Ok(member)
}

/// Whether the subgraph induced by `s` has a topological order (Kahn).
pub fn is_acyclic(g: &SideInfoDigraph, s: &[usize]) -> Result<bool> {
    let member = check_vertices(g, s)?;
    let mut indeg = vec![0usize; g.vertex_count()];
    for v in (0..g.vertex_count()).filter(|&v| member[v]) {
        for &w in g.successors(v).iter().filter(|&&w| member[w]) {
            indeg[w] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..g.vertex_count()).filter(|&v| member[v] && indeg[v] == 0).collect();
    let mut ordered = 0;
    while let Some(v) = queue.pop_front() {
        ordered += 1;
        for &w in g.successors(v).iter().filter(|&&w| member[w]) {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    Ok(ordered == member.iter().filter(|&&m| m).count())
}

/// Same question answered by colouring depth-first search.
pub fn is_acyclic_dfs(g: &SideInfoDigraph, s: &[usize]) -> Result<bool> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let member = check_vertices(g, s)?;
    let mut mark = vec![Mark::New; g.vertex_count()];
    for root in (0..g.vertex_count()).filter(|&v| member[v]) {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Open;
        while let Some((v, next)) = stack.pop() {
            let succ = g.successors(v);
            match succ[next..].iter().position(|&w| member[w]) {
                Some(offset) => {
                    let w = succ[next + offset];
                    stack.push((v, next + offset + 1));
                    match mark[w] {
                        Mark::Open => return Ok(false),
                        Mark::New => {
                            mark[w] = Mark::Open;
                            stack.push((w, 0));
                        }
                        Mark::Done => {}
                    }
                }
                None => mark[v] = Mark::Done,
            }
        }
    }
    Ok(true)
}

/// `F_{d_{u_i}, W_i}` demanded by user `u_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lemma1Entry {
    pub user: usize,
    pub file: usize,
    pub subset: UserSet,
}

impl Lemma1Entry {
    pub fn label(&self) -> String {
        message_label(self.file, self.subset)
    }
}

/// `{F_{d_{u_i}, W_i} : W_i ⊆ [K] \ {u_1, ..., u_i}}` for the user order `u`.
pub fn lemma1_set(d: &DemandVector, order: &[usize]) -> Result<Vec<Lemma1Entry>> {
    let k = d.users();
    let mut users = UserSet::EMPTY;
    let mut files = BTreeSet::new();
    for &u in order {
        if u >= k || users.contains(u) {
            return Err(Error::arg(format!("user order {order:?} is not a sequence of distinct users")));
        }
        if !files.insert(d.file_of(u)) {
            return Err(Error::arg("users in the order must demand distinct files"));
        }
        users = users.with(u);
    }
    let mut out = Vec::new();
    let mut seen = UserSet::EMPTY;
    for &u in order {
        seen = seen.with(u);
        let rest = UserSet::full(k).difference(seen);
        for w in rest.subsets() {
            out.push(Lemma1Entry {
                user: u,
                file: d.file_of(u),
                subset: w,
            });
        }
    }
    Ok(out)
}

impl CachingReduction {
    /// Vertices of `g` for the given entries; zero-length sub-files have no
    /// message and are skipped.
    pub fn select(&self, g: &SideInfoDigraph, entries: &[Lemma1Entry]) -> Result<AcyclicSet> {
        let mut out = Vec::new();
        for e in entries {
            let Some(m) = self.message_index(e.file, e.subset) else {
                continue;
            };
            let v = self
                .ic_user(e.user)
                .and_then(|j| g.vertex_of(j, m))
                .ok_or_else(|| Error::arg(format!("user {} does not demand {}", e.user + 1, e.label())))?;
            out.push(v);
        }
        Ok(AcyclicSet(out))
    }
}

/// `Σ_{v∈s} L_v`, a lower bound on the number of broadcast bits.
///
/// Requires `s` acyclic with pairwise distinct messages.
pub fn acyclic_bound(g: &SideInfoDigraph, s: &AcyclicSet) -> Result<Rational> {
    if !is_acyclic(g, &s.0)? {
        return Err(Error::arg("vertex set contains a directed cycle"));
    }
    let mut messages = BTreeSet::new();
    for &v in &s.0 {
        if !messages.insert(g.vertex(v).message) {
            return Err(Error::arg(format!("message of {} appears twice", g.vertex(v).label)));
        }
    }
    Ok(s.0.iter().map(|&v| g.weight(v).clone()).sum())
}

pub const DEFAULT_VERTEX_CAP: usize = 20;

/// Maximum-weight acyclic vertex set with distinct messages, by exhaustive
/// branch and bound.
pub fn max_acyclic_bound(g: &SideInfoDigraph, cap: usize) -> Result<(Rational, AcyclicSet)> {
    let n = g.vertex_count();
    if n > cap || n > 63 {
        return Err(Error::Size {
            what: "vertex count",
            limit: cap.min(63),
            actual: n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| g.weight(b).cmp(g.weight(a)).then(a.cmp(&b)));
    let out_mask: Vec<u64> = (0..n)
        .map(|v| g.successors(v).iter().fold(0u64, |m, &w| m | 1 << w))
        .collect();
    let mut suffix = vec![Rational::zero(); n + 1];
    for i in (0..n).rev() {
        suffix[i] = &suffix[i + 1] + g.weight(order[i]);
    }
    let mut search = Search {
        g,
        order: &order,
        out_mask: &out_mask,
        suffix: &suffix,
        best: Rational::zero(),
        best_set: 0,
    };
    search.run(0, 0, Rational::zero());
    let set = (0..n).filter(|&v| search.best_set >> v & 1 == 1).collect();
    Ok((search.best, AcyclicSet(set)))
}

struct Search<'a> {
    g: &'a SideInfoDigraph,
    order: &'a [usize],
    out_mask: &'a [u64],
    suffix: &'a [Rational],
    best: Rational,
    best_set: u64,
}

impl Search<'_> {
    /// Whether some path inside `set` leads from `v` back to `v`.
    fn closes_cycle(&self, set: u64, v: usize) -> bool {
        let allowed = set | 1 << v;
        let mut seen = 0u64;
        let mut frontier = self.out_mask[v] & allowed;
        while frontier != 0 {
            if frontier >> v & 1 == 1 {
                return true;
            }
            seen |= frontier;
            let mut next = 0;
            let mut f = frontier;
            while f != 0 {
                let w = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.out_mask[w];
            }
            frontier = next & allowed & !seen;
        }
        false
    }

    fn run(&mut self, depth: usize, set: u64, weight: Rational) {
        if weight > self.best {
            self.best = weight.clone();
            self.best_set = set;
        }
        if depth == self.order.len() || &weight + &self.suffix[depth] <= self.best {
            return;
        }
        let v = self.order[depth];
        let message = self.g.vertex(v).message;
        let clash = (0..self.order.len()).any(|w| set >> w & 1 == 1 && self.g.vertex(w).message == message);
        if !clash && !self.closes_cycle(set, v) {
            self.run(depth + 1, set | 1 << v, &weight + self.g.weight(v));
        }
        self.run(depth + 1, set, weight);
    }
}
