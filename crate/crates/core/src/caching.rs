//! Bit-exact shared-link caching with uncoded placement.
//!
//! Users, files and sub-file labels are 0-based internally; `Display`
//! implementations print them 1-based.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{binom, subsets_of_size, UserSet};
use crate::envelope::{lower_convex_envelope, PiecewiseCurve};
use crate::gf2::{BitVector, EchelonBasis};
use crate::scalar::int;
use crate::{Error, Rational, Result, Scalar};

/// `N` files of `B` bits, `K` users, memory parameter `t` with `M = tN/K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CachingInstance {
    pub files: usize,
    pub users: usize,
    pub file_bits: u64,
    pub t: usize,
}

impl CachingInstance {
    pub fn new(files: usize, users: usize, file_bits: u64, t: usize) -> Result<Self> {
        if files == 0 || users == 0 {
            return Err(Error::arg("need at least one file and one user"));
        }
        if users > 16 {
            return Err(Error::Size {
                what: "user count",
                limit: 16,
                actual: users,
            });
        }
        if t > users {
            return Err(Error::arg(format!("t = {t} exceeds K = {users}")));
        }
        let parts = binom(users as i64, t as i64);
        if file_bits % parts != 0 {
            return Err(Error::arg(format!(
                "B = {file_bits} is not divisible by binom({users}, {t}) = {parts}"
            )));
        }
        Ok(CachingInstance {
            files,
            users,
            file_bits,
            t,
        })
    }

    /// The instance with the smallest valid file length, `B = binom(K, t)`.
    pub fn with_min_bits(files: usize, users: usize, t: usize) -> Result<Self> {
        Self::new(files, users, binom(users as i64, t as i64).max(1), t)
    }

    /// `M = tN/K`.
    pub fn memory(&self) -> Rational {
        Rational::new((self.t * self.files).into(), self.users.into())
    }

    pub fn subfile_bits(&self) -> u64 {
        self.file_bits / binom(self.users as i64, self.t as i64)
    }
}

/// Contiguous bit range of a file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub offset: u64,
    pub len: u64,
}

/// An uncoded placement: every file is partitioned into sub-files `F_{i,W}`,
/// where `W` is the set of users caching those bits.
///
/// Sub-files of a file occupy consecutive bit ranges in lexicographic order
/// of `W`. Only sub-files of positive length are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    files: usize,
    users: usize,
    file_bits: u64,
    memory: Rational,
    segments: Vec<BTreeMap<UserSet, Segment>>,
}

impl Placement {
    /// Builds a placement from sub-file lengths in bits.
    ///
    /// Fails unless each file is partitioned exactly and every user caches at
    /// most `memory · file_bits` bits.
    pub fn from_lengths(
        files: usize,
        users: usize,
        file_bits: u64,
        memory: Rational,
        lengths: impl Fn(usize, UserSet) -> u64,
    ) -> Result<Self> {
        if files == 0 || users == 0 || users > 16 {
            return Err(Error::arg("placement needs 1..=16 users and at least one file"));
        }
        let all = crate::combinatorics::all_subsets(users);
        let mut segments = Vec::with_capacity(files);
        for i in 0..files {
            let mut map = BTreeMap::new();
            let mut offset = 0;
            for &w in &all {
                let len = lengths(i, w);
                if len > 0 {
                    map.insert(w, Segment { offset, len });
                    offset += len;
                }
            }
            if offset != file_bits {
                return Err(Error::arg(format!(
                    "sub-files of file {} total {offset} bits, expected {file_bits}",
                    i + 1
                )));
            }
            segments.push(map);
        }
        let p = Placement {
            files,
            users,
            file_bits,
            memory,
            segments,
        };
        let budget = p.memory.clone() * int(file_bits as i64);
        for k in 0..users {
            if int(p.cached_bits(k) as i64) > budget {
                return Err(Error::arg(format!(
                    "user {} caches {} bits, over the budget of {budget}",
                    k + 1,
                    p.cached_bits(k)
                )));
            }
        }
        Ok(p)
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn file_bits(&self) -> u64 {
        self.file_bits
    }

    pub fn memory(&self) -> &Rational {
        &self.memory
    }

    pub fn length(&self, file: usize, w: UserSet) -> u64 {
        self.segment(file, w).map_or(0, |s| s.len)
    }

    pub fn segment(&self, file: usize, w: UserSet) -> Option<Segment> {
        self.segments[file].get(&w).copied()
    }

    /// Positive-length sub-files of `file` in bit order.
    pub fn segments(&self, file: usize) -> impl Iterator<Item = (UserSet, Segment)> + '_ {
        self.segments[file].iter().map(|(w, s)| (*w, *s))
    }

    pub fn cached_bits(&self, user: usize) -> u64 {
        self.segments
            .iter()
            .flat_map(|m| m.iter())
            .filter(|(w, _)| w.contains(user))
            .map(|(_, s)| s.len)
            .sum()
    }

    /// `Some(t)` if this is the MAN placement for some `t`.
    pub fn man_parameter(&self) -> Option<usize> {
        let t = self.segments[0].keys().next()?.len();
        let parts = binom(self.users as i64, t as i64);
        let each = self.file_bits / parts;
        let expected = subsets_of_size(self.users, t);
        let is_man = self.file_bits % parts == 0
            && self.segments.iter().all(|m| {
                m.len() == expected.len()
                    && expected
                        .iter()
                        .all(|w| m.get(w).is_some_and(|s| s.len == each))
            });
        is_man.then_some(t)
    }
}

/// The MAN placement: each file split into `binom(K, t)` equal sub-files,
/// sub-file `W` cached by exactly the users in `W`.
pub fn man_placement(inst: &CachingInstance) -> Result<Placement> {
    let inst = CachingInstance::new(inst.files, inst.users, inst.file_bits, inst.t)?;
    let each = inst.subfile_bits();
    let t = inst.t;
    Placement::from_lengths(inst.files, inst.users, inst.file_bits, inst.memory(), |_, w| {
        if w.len() == t {
            each
        } else {
            0
        }
    })
}

/// Demanded file per user (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DemandVector {
    files: Vec<usize>,
}

impl DemandVector {
    pub fn new(files: Vec<usize>, file_count: usize) -> Result<Self> {
        if let Some(&bad) = files.iter().find(|&&f| f >= file_count) {
            return Err(Error::arg(format!(
                "demanded file {} outside 1..={file_count}",
                bad + 1
            )));
        }
        Ok(DemandVector { files })
    }

    /// From 1-based file indices.
    pub fn from_one_based(files: &[usize], file_count: usize) -> Result<Self> {
        if files.contains(&0) {
            return Err(Error::arg("file indices are 1-based"));
        }
        Self::new(files.iter().map(|f| f - 1).collect(), file_count)
    }

    pub fn file_of(&self, user: usize) -> usize {
        self.files[user]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.files
    }

    pub fn users(&self) -> usize {
        self.files.len()
    }

    /// `N(d)`: distinct demanded files, ascending.
    pub fn distinct_files(&self) -> Vec<usize> {
        self.files.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Lowest-indexed user demanding each distinct file, ordered by file.
    pub fn leaders(&self) -> Vec<usize> {
        self.distinct_files()
            .into_iter()
            .map(|f| self.files.iter().position(|&x| x == f).unwrap())
            .collect()
    }
}

/// Content of all files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileLibrary {
    files: Vec<BitVector>,
}

impl FileLibrary {
    pub fn new(files: Vec<BitVector>) -> Self {
        FileLibrary { files }
    }

    /// Pseudo-random files from ChaCha8 seeded with `seed`; bits are drawn
    /// with `gen::<bool>()`, file 1 first, bit 0 first.
    pub fn random(files: usize, file_bits: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..files)
            .map(|_| {
                let bits: Vec<bool> = (0..file_bits).map(|_| rng.gen::<bool>()).collect();
                BitVector::from_bools(&bits)
            })
            .collect();
        FileLibrary { files }
    }

    pub fn file(&self, i: usize) -> &BitVector {
        &self.files[i]
    }

    pub fn subfile(&self, p: &Placement, file: usize, w: UserSet) -> BitVector {
        match p.segment(file, w) {
            Some(s) => self.files[file].slice(s.offset as usize, s.len as usize),
            None => BitVector::zeros(0),
        }
    }
}

/// Everything user `user` stores under a placement.
#[derive(Clone, Debug, PartialEq)]
pub struct UserCache {
    pub user: usize,
    pub users: usize,
    subfiles: BTreeMap<(usize, UserSet), BitVector>,
}

impl UserCache {
    pub fn get(&self, file: usize, w: UserSet) -> Option<&BitVector> {
        self.subfiles.get(&(file, w))
    }

    pub fn bits(&self) -> u64 {
        self.subfiles.values().map(|b| b.len() as u64).sum()
    }
}

pub fn cache_contents(p: &Placement, lib: &FileLibrary, user: usize) -> UserCache {
    let mut subfiles = BTreeMap::new();
    for i in 0..p.files() {
        for (w, _) in p.segments(i).filter(|(w, _)| w.contains(user)) {
            subfiles.insert((i, w), lib.subfile(p, i, w));
        }
    }
    UserCache {
        user,
        users: p.users(),
        subfiles,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Man,
    Yma,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub label: UserSet,
    pub payload: BitVector,
}

/// Coded multicast messages labelled by `(t+1)`-subsets of users.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransmissionSet {
    pub scheme: Scheme,
    pub users: usize,
    pub t: usize,
    pub subfile_bits: u64,
    pub transmissions: Vec<Transmission>,
    /// Labels the YMA scheme leaves out; empty for MAN.
    pub pruned: Vec<UserSet>,
}

impl TransmissionSet {
    pub fn total_bits(&self) -> u64 {
        self.transmissions.iter().map(|x| x.payload.len() as u64).sum()
    }
}

fn xor_payload(p: &Placement, d: &DemandVector, lib: &FileLibrary, s: UserSet, bits: u64) -> BitVector {
    let mut acc = BitVector::zeros(bits as usize);
    for u in s.iter() {
        acc.xor_assign(&lib.subfile(p, d.file_of(u), s.without(u)));
    }
    acc
}

fn check_man(p: &Placement, d: &DemandVector) -> Result<usize> {
    if d.users() != p.users() {
        return Err(Error::arg(format!(
            "demand vector has {} entries for {} users",
            d.users(),
            p.users()
        )));
    }
    if let Some(&f) = d.as_slice().iter().find(|&&f| f >= p.files()) {
        return Err(Error::arg(format!("demanded file {} does not exist", f + 1)));
    }
    p.man_parameter()
        .ok_or_else(|| Error::arg("delivery requires a MAN placement"))
}

/// MAN delivery: `X_S = ⊕_{s∈S} F_{d_s, S\{s}}` for every `(t+1)`-subset `S`.
pub fn man_delivery(p: &Placement, d: &DemandVector, lib: &FileLibrary) -> Result<TransmissionSet> {
    let t = check_man(p, d)?;
    let bits = p.file_bits() / binom(p.users() as i64, t as i64);
    let transmissions = subsets_of_size(p.users(), t + 1)
        .into_iter()
        .map(|s| Transmission {
            label: s,
            payload: xor_payload(p, d, lib, s, bits),
        })
        .collect();
    Ok(TransmissionSet {
        scheme: Scheme::Man,
        users: p.users(),
        t,
        subfile_bits: bits,
        transmissions,
        pruned: Vec::new(),
    })
}

/// YMA delivery: MAN transmissions restricted to labels meeting the leader
/// set; the others are XORs of the retained ones.
pub fn yma_delivery(p: &Placement, d: &DemandVector, lib: &FileLibrary) -> Result<TransmissionSet> {
    let mut tx = man_delivery(p, d, lib)?;
    let leaders = UserSet::from_indices(d.leaders());
    let (kept, pruned): (Vec<_>, Vec<_>) = tx
        .transmissions
        .into_iter()
        .partition(|x| x.label.intersects(leaders));
    tx.transmissions = kept;
    tx.pruned = pruned.into_iter().map(|x| x.label).collect();
    tx.scheme = Scheme::Yma;
    Ok(tx)
}

/// Sub-file coordinates for symbolic payloads: one column per
/// `(distinct demanded file, t-subset)`.
fn symbolic_label(d: &DemandVector, t: usize, s: UserSet, layout: &[UserSet]) -> BitVector {
    let files = d.distinct_files();
    let mut v = BitVector::zeros(files.len() * layout.len());
    for u in s.iter() {
        let f = files.iter().position(|&x| x == d.file_of(u)).unwrap();
        let w = layout.binary_search(&s.without(u)).unwrap();
        let col = f * layout.len() + w;
        let cur = v.get(col);
        v.set(col, !cur);
    }
    debug_assert!(s.len() == t + 1);
    v
}

/// Rebuilds the payload of every pruned label from the retained ones by
/// solving a linear system over the retained labels.
pub fn reconstruct_pruned(tx: &TransmissionSet, d: &DemandVector) -> Result<BTreeMap<UserSet, BitVector>> {
    let layout = subsets_of_size(tx.users, tx.t);
    let cols = d.distinct_files().len() * layout.len();
    let mut basis = EchelonBasis::with_tags(cols, tx.transmissions.len().max(1));
    for x in &tx.transmissions {
        basis.insert(&symbolic_label(d, tx.t, x.label, &layout));
    }
    let mut out = BTreeMap::new();
    for &s in &tx.pruned {
        let combo = basis
            .combination(&symbolic_label(d, tx.t, s, &layout))
            .ok_or_else(|| Error::Decode(format!("pruned transmission {s} is not recoverable")))?;
        let mut acc = BitVector::zeros(tx.subfile_bits as usize);
        for j in combo.iter_ones() {
            acc.xor_assign(&tx.transmissions[j].payload);
        }
        out.insert(s, acc);
    }
    Ok(out)
}

/// Recovers user `user`'s demanded file from its cache and the broadcast.
pub fn decode(user: usize, cache: &UserCache, tx: &TransmissionSet, d: &DemandVector) -> Result<BitVector> {
    if cache.user != user || cache.users != tx.users || d.users() != tx.users || user >= tx.users {
        return Err(Error::Decode("cache, transmissions and demand disagree".into()));
    }
    let mut payloads: BTreeMap<UserSet, &BitVector> =
        tx.transmissions.iter().map(|x| (x.label, &x.payload)).collect();
    let needs_rebuild = tx.pruned.iter().any(|s| s.contains(user));
    let rebuilt = if needs_rebuild {
        reconstruct_pruned(tx, d)?
    } else {
        BTreeMap::new()
    };
    payloads.extend(rebuilt.iter().map(|(s, p)| (*s, p)));

    let want = d.file_of(user);
    let layout = subsets_of_size(tx.users, tx.t);
    let mut parts = Vec::with_capacity(layout.len());
    for w in layout {
        let part = if w.contains(user) {
            cache
                .get(want, w)
                .cloned()
                .ok_or_else(|| Error::Decode(format!("sub-file ({}, {w}) missing from cache", want + 1)))?
        } else {
            let s = w.with(user);
            let mut acc = (*payloads
                .get(&s)
                .ok_or_else(|| Error::Decode(format!("no transmission for {s}")))?)
            .clone();
            for other in s.iter().filter(|&u| u != user) {
                let known = cache.get(d.file_of(other), s.without(other)).ok_or_else(|| {
                    Error::Decode(format!("side information ({}, {}) missing", d.file_of(other) + 1, s.without(other)))
                })?;
                acc.xor_assign(known);
            }
            acc
        };
        parts.push(part);
    }
    let refs: Vec<&BitVector> = parts.iter().collect();
    Ok(BitVector::concat(&refs))
}

/// `binom(K, t+1) / binom(K, t)`.
pub fn man_load<T: Scalar>(users: usize, t: usize) -> T {
    let (k, t) = (users as i64, t as i64);
    T::from_count(binom(k, t + 1)) / T::from_count(binom(k, t))
}

/// `(binom(K, t+1) - binom(K - min(K, N), t+1)) / binom(K, t)`.
pub fn yma_load<T: Scalar>(files: usize, users: usize, t: usize) -> T {
    let (n, k, t) = (files as i64, users as i64, t as i64);
    T::from_count(binom(k, t + 1) - binom(k - k.min(n), t + 1)) / T::from_count(binom(k, t))
}

/// Bits YMA sends for demand `d`: `B (binom(K,t+1) - binom(K-|N(d)|,t+1)) / binom(K,t)`.
pub fn yma_bits(inst: &CachingInstance, d: &DemandVector) -> u64 {
    let (k, t) = (inst.users as i64, inst.t as i64);
    let distinct = d.distinct_files().len() as i64;
    inst.subfile_bits() * (binom(k, t + 1) - binom(k - distinct, t + 1))
}

/// Lower convex envelope of `(tN/K, load(t))` for `t ∈ [0, K]`.
pub fn tradeoff_curve<T: Scalar>(files: usize, users: usize, scheme: Scheme) -> PiecewiseCurve<T> {
    let points: Vec<(T, T)> = (0..=users)
        .map(|t| {
            let m = T::from_count((t * files) as u64) / T::from_count(users as u64);
            let load = match scheme {
                Scheme::Man => man_load(users, t),
                Scheme::Yma => yma_load(files, users, t),
            };
            (m, load)
        })
        .collect();
    lower_convex_envelope(&points).expect("K+1 distinct memory points")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserTrace {
    pub user: usize,
    pub recovered: bool,
    pub cached_bits: u64,
    /// Payloads this user had to rebuild from retained YMA transmissions.
    pub rebuilt_payloads: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundtripOutcome {
    pub success: bool,
    pub transmitted_bits: u64,
    pub transmissions: usize,
    pub users: Vec<UserTrace>,
}

/// Places, delivers and decodes at every user with files drawn from `seed`,
/// checking exact recovery.
pub fn simulate_roundtrip(
    inst: &CachingInstance,
    d: &DemandVector,
    seed: u64,
    scheme: Scheme,
) -> Result<RoundtripOutcome> {
    let p = man_placement(inst)?;
    let lib = FileLibrary::random(inst.files, inst.file_bits, seed);
    let tx = match scheme {
        Scheme::Man => man_delivery(&p, d, &lib)?,
        Scheme::Yma => yma_delivery(&p, d, &lib)?,
    };
    let mut users = Vec::with_capacity(inst.users);
    for k in 0..inst.users {
        let cache = cache_contents(&p, &lib, k);
        let recovered = match decode(k, &cache, &tx, d) {
            Ok(bits) => &bits == lib.file(d.file_of(k)),
            Err(_) => false,
        };
        users.push(UserTrace {
            user: k,
            recovered,
            cached_bits: cache.bits(),
            rebuilt_payloads: tx.pruned.iter().filter(|s| s.contains(k)).count(),
        });
    }
    Ok(RoundtripOutcome {
        success: users.iter().all(|u| u.recovered),
        transmitted_bits: tx.total_bits(),
        transmissions: tx.transmissions.len(),
        users,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::tuples;
    use crate::scalar::rat;

    fn demand(d: &[usize], n: usize) -> DemandVector {
        DemandVector::from_one_based(d, n).unwrap()
    }

    fn users(v: &[usize]) -> UserSet {
        UserSet::from_indices(v.iter().map(|u| u - 1))
    }

    #[test]
    fn man_placement_examples() {
        let p = man_placement(&CachingInstance::new(3, 3, 3, 1).unwrap()).unwrap();
        for k in 0..3 {
            assert_eq!(p.cached_bits(k), 3);
            for i in 0..3 {
                assert_eq!(p.length(i, UserSet::from_indices([k])), 1);
            }
        }
        let p = man_placement(&CachingInstance::new(2, 4, 6, 2).unwrap()).unwrap();
        for k in 0..4 {
            // binom(3,1) = 3 sub-files per file
            assert_eq!(p.cached_bits(k), 6);
        }
        assert_eq!(p.memory(), &int(1));
        let p = man_placement(&CachingInstance::new(2, 3, 1, 0).unwrap()).unwrap();
        assert!((0..3).all(|k| p.cached_bits(k) == 0));
        assert_eq!(p.man_parameter(), Some(0));
    }

    #[test]
    fn instance_validation() {
        assert!(CachingInstance::new(2, 4, 5, 2).is_err());
        assert!(CachingInstance::new(0, 4, 6, 2).is_err());
        assert!(CachingInstance::new(2, 4, 6, 5).is_err());
        assert!(DemandVector::from_one_based(&[1, 4], 3).is_err());
    }

    #[test]
    fn placement_budget_and_partition_enforced() {
        let half = |_: usize, w: UserSet| if w.is_empty() || w == UserSet(1) { 2 } else { 0 };
        assert!(Placement::from_lengths(2, 2, 4, int(1), half).is_ok());
        assert!(Placement::from_lengths(2, 2, 4, rat(1, 2), half).is_err());
        assert!(Placement::from_lengths(2, 2, 5, int(1), half).is_err());
    }

    #[test]
    fn man_delivery_labels_and_payloads() {
        let inst = CachingInstance::new(3, 3, 3, 1).unwrap();
        let p = man_placement(&inst).unwrap();
        let lib = FileLibrary::random(3, 3, 7);
        let d = demand(&[1, 2, 3], 3);
        let tx = man_delivery(&p, &d, &lib).unwrap();
        let labels: Vec<String> = tx.transmissions.iter().map(|x| x.label.to_string()).collect();
        assert_eq!(labels, ["{1,2}", "{1,3}", "{2,3}"]);
        let mut expect = lib.subfile(&p, 0, users(&[2]));
        expect.xor_assign(&lib.subfile(&p, 1, users(&[1])));
        assert_eq!(tx.transmissions[0].payload, expect);

        let inst = CachingInstance::new(1, 2, 2, 1).unwrap();
        let p = man_placement(&inst).unwrap();
        let lib = FileLibrary::random(1, 2, 1);
        let tx = man_delivery(&p, &demand(&[1, 1], 1), &lib).unwrap();
        assert_eq!(tx.transmissions.len(), 1);
        let mut expect = lib.subfile(&p, 0, users(&[2]));
        expect.xor_assign(&lib.subfile(&p, 0, users(&[1])));
        assert_eq!(tx.transmissions[0].payload, expect);

        let inst = CachingInstance::new(2, 4, 6, 2).unwrap();
        let p = man_placement(&inst).unwrap();
        let lib = FileLibrary::random(2, 6, 3);
        let tx = man_delivery(&p, &demand(&[1, 2, 1, 2], 2), &lib).unwrap();
        assert_eq!(tx.total_bits(), 4);
    }

    #[test]
    fn yma_pruning_examples() {
        let inst = CachingInstance::new(4, 3, 3, 1).unwrap();
        let p = man_placement(&inst).unwrap();
        let lib = FileLibrary::random(4, 3, 0);
        let d = demand(&[1, 2, 3], 4);
        assert_eq!(
            yma_delivery(&p, &d, &lib).unwrap().transmissions,
            man_delivery(&p, &d, &lib).unwrap().transmissions
        );

        let inst = CachingInstance::new(1, 2, 2, 1).unwrap();
        let p = man_placement(&inst).unwrap();
        let lib = FileLibrary::random(1, 2, 0);
        let tx = yma_delivery(&p, &demand(&[1, 1], 1), &lib).unwrap();
        assert_eq!(tx.transmissions.len(), 1);
        assert_eq!(tx.transmissions[0].label, users(&[1, 2]));

        let inst = CachingInstance::new(2, 4, 4, 1).unwrap();
        let p = man_placement(&inst).unwrap();
        let lib = FileLibrary::random(2, 4, 0);
        let d = demand(&[1, 2, 1, 2], 2);
        let tx = yma_delivery(&p, &d, &lib).unwrap();
        assert_eq!(tx.total_bits(), 5);
        assert_eq!(tx.pruned, vec![users(&[3, 4])]);
        assert_eq!(yma_bits(&inst, &d), 5);
    }

    #[test]
    fn decode_examples() {
        let inst = CachingInstance::new(3, 3, 3, 1).unwrap();
        let p = man_placement(&inst).unwrap();
        let lib = FileLibrary::random(3, 3, 11);
        let d = demand(&[1, 2, 3], 3);
        let tx = man_delivery(&p, &d, &lib).unwrap();
        let cache = cache_contents(&p, &lib, 0);
        assert_eq!(&decode(0, &cache, &tx, &d).unwrap(), lib.file(0));

        let inst = CachingInstance::with_min_bits(2, 3, 3).unwrap();
        let out = simulate_roundtrip(&inst, &demand(&[1, 2, 1], 2), 0, Scheme::Man).unwrap();
        assert!(out.success);
        assert_eq!(out.transmitted_bits, 0);

        let inst = CachingInstance::new(1, 3, 3, 1).unwrap();
        let out = simulate_roundtrip(&inst, &demand(&[1, 1, 1], 1), 5, Scheme::Yma).unwrap();
        assert!(out.success);
        assert_eq!(out.transmissions, 2);
    }

    #[test]
    fn decode_rejects_mismatched_inputs() {
        let inst = CachingInstance::new(3, 3, 3, 1).unwrap();
        let p = man_placement(&inst).unwrap();
        let lib = FileLibrary::random(3, 3, 11);
        let d = demand(&[1, 2, 3], 3);
        let tx = man_delivery(&p, &d, &lib).unwrap();
        let cache = cache_contents(&p, &lib, 1);
        assert!(matches!(decode(0, &cache, &tx, &d), Err(Error::Decode(_))));
        let mut broken = tx.clone();
        broken.transmissions.pop();
        let cache = cache_contents(&p, &lib, 2);
        assert!(decode(2, &cache, &broken, &d).is_err());
    }

    #[test]
    fn load_formulas() {
        assert_eq!(man_load::<Rational>(3, 1), int(1));
        assert_eq!(yma_load::<Rational>(3, 3, 2), rat(1, 3));
        assert_eq!(yma_load::<Rational>(2, 4, 1), rat(5, 4));
        assert_eq!(man_load::<Rational>(4, 4), int(0));
    }

    #[test]
    fn yma_load_matches_simulated_bits() {
        // worst-case demand over all demand vectors for N=2, K=4, t=1, B=4
        let inst = CachingInstance::new(2, 4, 4, 1).unwrap();
        let worst = tuples(2, 4)
            .into_iter()
            .map(|d| {
                let d = DemandVector::new(d, 2).unwrap();
                simulate_roundtrip(&inst, &d, 1, Scheme::Yma).unwrap().transmitted_bits
            })
            .max()
            .unwrap();
        assert_eq!(worst, 5);
        assert_eq!(rat(worst as i64, 4), yma_load::<Rational>(2, 4, 1));
    }

    #[test]
    fn yma_never_exceeds_man_and_strictness() {
        for n in 1..=6 {
            for k in 1..=6 {
                for t in 0..=k {
                    let (m, y) = (man_load::<Rational>(k, t), yma_load::<Rational>(n, k, t));
                    assert!(y <= m);
                    let strict = n < k && t + 1 <= k - n;
                    assert_eq!(y < m, strict, "N={n} K={k} t={t}");
                }
            }
        }
    }

    #[test]
    fn tradeoff_curves() {
        let c = tradeoff_curve::<Rational>(3, 3, Scheme::Yma);
        assert_eq!(
            c.corners(),
            &[(int(0), int(3)), (int(1), int(1)), (int(2), rat(1, 3)), (int(3), int(0))]
        );
        assert_eq!(c, tradeoff_curve(3, 3, Scheme::Man));
        assert_eq!(tradeoff_curve::<Rational>(4, 3, Scheme::Man), tradeoff_curve(4, 3, Scheme::Yma));
        let c = tradeoff_curve::<Rational>(1, 2, Scheme::Yma);
        assert_eq!(
            c.corners(),
            &[(int(0), int(1)), (rat(1, 2), rat(1, 2)), (int(1), int(0))]
        );
    }

    #[test]
    fn simulate_examples() {
        let inst = CachingInstance::new(3, 3, 3, 1).unwrap();
        for seed in 0..5 {
            let out = simulate_roundtrip(&inst, &demand(&[1, 2, 3], 3), seed, Scheme::Man).unwrap();
            assert!(out.success);
            assert_eq!(out.transmitted_bits, 3);
        }
        let inst = CachingInstance::new(2, 4, 4, 1).unwrap();
        let out = simulate_roundtrip(&inst, &demand(&[1, 2, 1, 2], 2), 9, Scheme::Yma).unwrap();
        assert!(out.success);
        assert_eq!(out.transmitted_bits, 5);
    }

    #[test]
    fn random_files_are_reproducible() {
        assert_eq!(FileLibrary::random(2, 10, 42), FileLibrary::random(2, 10, 42));
        assert_ne!(FileLibrary::random(2, 64, 42), FileLibrary::random(2, 64, 43));
    }
}
