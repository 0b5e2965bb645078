//! Matroid constructions, rank/girth queries, greedy optimisation, and
//! independent-set polytope membership.
//!
//! Ground sets are index sets `{0, …, n−1}` with `n ≤ 32`; subsets are bit
//! masks ([`Subset`]).  Exact whole-lattice operations (polytope membership,
//! girth by enumeration) are budgeted at `n ≤ 20` resp. `n ≤ 24` and return
//! [`Error::Capacity`] beyond that.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on ground-set size: subsets are `u32` masks.
pub const MAX_GROUND_SET: usize = 32;

/// Budget for whole-lattice polytope scans.
pub const POLYTOPE_BUDGET: usize = 20;

/// Budget for girth computation by subset enumeration.
pub const GIRTH_BUDGET: usize = 24;

/// A subset of a ground set `{0, …, n−1}`, stored as a bit mask.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// Full ground set on `n` elements.
    pub fn full(n: usize) -> Subset {
        debug_assert!(n <= MAX_GROUND_SET);
        if n == 32 {
            Subset(u32::MAX)
        } else {
            Subset((1u32 << n) - 1)
        }
    }

    pub fn from_bits(bits: u32) -> Subset {
        Subset(bits)
    }

    /// Builds a subset from element indices; duplicates are rejected.
    pub fn from_indices(indices: &[usize]) -> Result<Subset> {
        let mut bits = 0u32;
        for &i in indices {
            if i >= MAX_GROUND_SET {
                return Err(Error::input(format!("element index {i} out of range")));
            }
            if bits & (1 << i) != 0 {
                return Err(Error::input(format!("duplicate element index {i}")));
            }
            bits |= 1 << i;
        }
        Ok(Subset(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Subset {
        Subset(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Subset {
        Subset(self.0 & !(1 << i))
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersect(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    /// Iterates element indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Girth of a matroid: size of its smallest dependent set.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Girth {
    Finite(u32),
    /// Every subset is independent (free-like matroid).
    Infinite,
}

impl Girth {
    pub fn finite(self) -> Option<u32> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Infinite => None,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    /// Rank of a set is `min(|S|, ell)`.
    Uniform { ell: u32 },
    /// Every set is independent (`uniform` with `ell = n`).
    Free,
    /// Consecutive parts with per-part caps; rank is the capped sum.
    Partition { parts: Vec<Part> },
    /// Forest rank of an edge subset.
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    /// Disjoint union; masks are split by per-child offsets.
    DirectSum { children: Vec<Matroid> },
    /// Independence = inclusion in one of the listed bases.
    Explicit { bases: Vec<u32> },
    /// Union of `uniform(ell, ell·block)` on a base segment `E_0` with `k`
    /// rank-one blocks of size `block`: rank `ell + k`, girth `ell + 1`.
    UnionConstruction { ell: u32, k: u32, block: usize },
}

#[derive(Clone, Debug)]
struct Part {
    mask: u32,
    cap: u32,
    size: usize,
}

/// A matroid on ground set `{0, …, n−1}`.
#[derive(Clone, Debug)]
pub struct Matroid {
    n: usize,
    kind: Kind,
    girth: OnceLock<Girth>,
}

impl Matroid {
    fn new(n: usize, kind: Kind) -> Matroid {
        Matroid {
            n,
            kind,
            girth: OnceLock::new(),
        }
    }

    fn check_n(n: usize) -> Result<()> {
        if n > MAX_GROUND_SET {
            return Err(Error::capacity(format!(
                "ground set of {n} elements exceeds the {MAX_GROUND_SET}-element cap"
            )));
        }
        Ok(())
    }

    /// Uniform matroid of rank `ell` on `n` elements.
    pub fn uniform(ell: u32, n: usize) -> Result<Matroid> {
        Self::check_n(n)?;
        Ok(Matroid::new(n, Kind::Uniform { ell }))
    }

    /// Free matroid: every subset independent.
    pub fn free(n: usize) -> Result<Matroid> {
        Self::check_n(n)?;
        Ok(Matroid::new(n, Kind::Free))
    }

    /// Partition matroid with consecutive parts of the given `(size, cap)`
    /// pairs; the ground set is their concatenation.
    pub fn partition(parts: &[(usize, u32)]) -> Result<Matroid> {
        let n: usize = parts.iter().map(|&(s, _)| s).sum();
        Self::check_n(n)?;
        let mut built = Vec::with_capacity(parts.len());
        let mut offset = 0usize;
        for &(size, cap) in parts {
            if size == 0 {
                return Err(Error::input("partition part of size 0"));
            }
            let mask = (Subset::full(offset + size).bits()) & !(Subset::full(offset).bits());
            built.push(Part { mask, cap, size });
            offset += size;
        }
        Ok(Matroid::new(n, Kind::Partition { parts: built }))
    }

    /// Graphic matroid of the multigraph with `vertices` vertices and the
    /// listed edges; element `i` is the `i`-th edge.  Loops and parallel
    /// edges are allowed.
    pub fn graphic(vertices: usize, edges: &[(usize, usize)]) -> Result<Matroid> {
        Self::check_n(edges.len())?;
        if vertices > 64 {
            return Err(Error::capacity("more than 64 vertices"));
        }
        for &(u, v) in edges {
            if u >= vertices || v >= vertices {
                return Err(Error::input(format!(
                    "edge ({u},{v}) has an endpoint outside 0..{vertices}"
                )));
            }
        }
        Ok(Matroid::new(
            edges.len(),
            Kind::Graphic {
                vertices,
                edges: edges.to_vec(),
            },
        ))
    }

    /// Direct sum; children occupy consecutive index blocks.
    ///
    /// The correlation gap of the result is the minimum of the childrens'
    /// gaps, which makes direct sums the natural fixture for decomposition
    /// tests.
    pub fn direct_sum(children: Vec<Matroid>) -> Result<Matroid> {
        let n: usize = children.iter().map(|m| m.n).sum();
        Self::check_n(n)?;
        if children.is_empty() {
            return Err(Error::input("direct sum of zero matroids"));
        }
        Ok(Matroid::new(n, Kind::DirectSum { children }))
    }

    /// Matroid given by an explicit list of bases (as index lists).
    ///
    /// All bases must have equal cardinality, and the list must satisfy the
    /// basis-exchange axiom; both are verified here.
    pub fn explicit(n: usize, bases: &[Vec<usize>]) -> Result<Matroid> {
        Self::check_n(n)?;
        if bases.is_empty() {
            return Err(Error::input("explicit matroid needs at least one basis"));
        }
        let mut masks = Vec::with_capacity(bases.len());
        for b in bases {
            let s = Subset::from_indices(b)?;
            if s.bits() & !Subset::full(n).bits() != 0 {
                return Err(Error::input("basis element outside the ground set"));
            }
            masks.push(s.bits());
        }
        let r = masks[0].count_ones();
        if masks.iter().any(|m| m.count_ones() != r) {
            return Err(Error::input("bases of unequal cardinality"));
        }
        masks.sort_unstable();
        masks.dedup();
        // Basis exchange: for bases A, B and x ∈ A∖B there is y ∈ B∖A with
        // A − x + y a basis.
        for &a in &masks {
            for &b in &masks {
                let mut x_bits = a & !b;
                while x_bits != 0 {
                    let x = x_bits.trailing_zeros();
                    x_bits &= x_bits - 1;
                    let mut y_bits = b & !a;
                    let mut ok = false;
                    while y_bits != 0 {
                        let y = y_bits.trailing_zeros();
                        y_bits &= y_bits - 1;
                        let cand = (a & !(1 << x)) | (1 << y);
                        if masks.binary_search(&cand).is_ok() {
                            ok = true;
                            break;
                        }
                    }
                    if !ok {
                        return Err(Error::input(
                            "basis list violates the exchange axiom".to_string(),
                        ));
                    }
                }
            }
        }
        Ok(Matroid::new(n, Kind::Explicit { bases: masks }))
    }

    /// The girth/rank union family: `uniform(ell, ell·block)` on a base
    /// segment joined with `k` partition blocks of size `block` and cap 1,
    /// as a matroid union.  Rank is `ell + k`; girth is `ell + 1` whenever
    /// `block ≥ 2`.
    ///
    /// Element layout: the base segment `E_0` occupies indices
    /// `0 .. ell·block`, followed by the `k` blocks of `block` elements each.
    pub fn union_construction(ell: u32, k: u32, block: usize) -> Result<Matroid> {
        if ell == 0 || block == 0 {
            return Err(Error::input("union construction needs ell ≥ 1, block ≥ 1"));
        }
        let n = (ell as usize + k as usize) * block;
        Self::check_n(n)?;
        Ok(Matroid::new(n, Kind::UnionConstruction { ell, k, block }))
    }

    /// Ground-set size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Rank of the full ground set.
    pub fn rank(&self) -> u32 {
        self.rank_mask(Subset::full(self.n).bits())
    }

    /// Rank of a subset.
    pub fn rank_subset(&self, s: Subset) -> Result<u32> {
        if s.bits() & !Subset::full(self.n).bits() != 0 {
            return Err(Error::input("subset contains out-of-range elements"));
        }
        Ok(self.rank_mask(s.bits()))
    }

    pub fn is_independent(&self, s: Subset) -> Result<bool> {
        Ok(self.rank_subset(s)? == s.len())
    }

    /// Rank oracle on raw masks (no range validation).
    pub(crate) fn rank_mask(&self, mask: u32) -> u32 {
        match &self.kind {
            Kind::Uniform { ell } => mask.count_ones().min(*ell),
            Kind::Free => mask.count_ones(),
            Kind::Partition { parts } => parts
                .iter()
                .map(|p| (mask & p.mask).count_ones().min(p.cap))
                .sum(),
            Kind::Graphic { vertices, edges } => {
                let mut uf = UnionFind::new(*vertices);
                let mut rank = 0;
                let mut bits = mask;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let (u, v) = edges[i];
                    if uf.union(u, v) {
                        rank += 1;
                    }
                }
                rank
            }
            Kind::DirectSum { children } => {
                let mut rank = 0;
                let mut offset = 0;
                for c in children {
                    let child_mask = (mask >> offset) & Subset::full(c.n).bits();
                    rank += c.rank_mask(child_mask);
                    offset += c.n;
                }
                rank
            }
            Kind::Explicit { bases } => {
                bases.iter().map(|b| (mask & b).count_ones()).max().unwrap()
            }
            Kind::UnionConstruction { ell, k, block } => {
                let base = mask & Subset::full(*ell as usize * block).bits();
                let mut singles = 0u32;
                let mut overflow = base.count_ones();
                for j in 0..*k as usize {
                    let off = (*ell as usize + j) * block;
                    let cnt = ((mask >> off) & Subset::full(*block).bits()).count_ones();
                    if cnt >= 1 {
                        singles += 1;
                        overflow += cnt - 1;
                    }
                }
                singles + overflow.min(*ell)
            }
        }
    }

    /// Girth: size of the smallest dependent set, or [`Girth::Infinite`].
    ///
    /// Closed forms cover every construction except explicit-basis matroids,
    /// which fall back to subset enumeration (budgeted at `n ≤ 24`).
    pub fn girth(&self) -> Result<Girth> {
        if let Some(g) = self.girth.get() {
            return Ok(*g);
        }
        let g = self.compute_girth()?;
        let _ = self.girth.set(g);
        Ok(g)
    }

    fn compute_girth(&self) -> Result<Girth> {
        Ok(match &self.kind {
            Kind::Uniform { ell } => {
                if (*ell as usize) < self.n {
                    Girth::Finite(ell + 1)
                } else {
                    Girth::Infinite
                }
            }
            Kind::Free => Girth::Infinite,
            Kind::Partition { parts } => {
                let mut best = None;
                for p in parts {
                    if (p.cap as usize) < p.size {
                        let g = p.cap + 1;
                        best = Some(best.map_or(g, |b: u32| b.min(g)));
                    }
                }
                best.map_or(Girth::Infinite, Girth::Finite)
            }
            Kind::Graphic { vertices, edges } => graphic_girth(*vertices, edges),
            Kind::DirectSum { children } => {
                let mut best = None;
                for c in children {
                    if let Girth::Finite(g) = c.girth()? {
                        best = Some(best.map_or(g, |b: u32| b.min(g)));
                    }
                }
                best.map_or(Girth::Infinite, Girth::Finite)
            }
            Kind::Explicit { .. } => self.girth_by_enumeration()?,
            Kind::UnionConstruction { ell, block, .. } => {
                if *block >= 2 {
                    Girth::Finite(ell + 1)
                } else {
                    Girth::Infinite
                }
            }
        })
    }

    /// Girth by scanning all subsets; exposed for cross-checking the closed
    /// forms in tests.
    pub fn girth_by_enumeration(&self) -> Result<Girth> {
        if self.n > GIRTH_BUDGET {
            return Err(Error::capacity(format!(
                "girth enumeration needs n ≤ {GIRTH_BUDGET}, got {}",
                self.n
            )));
        }
        let mut best: Option<u32> = None;
        for mask in 1u32..(1u32 << self.n) {
            let size = mask.count_ones();
            if best.is_some_and(|b| size >= b) {
                continue;
            }
            if self.rank_mask(mask) < size {
                best = Some(size);
            }
        }
        Ok(best.map_or(Girth::Infinite, Girth::Finite))
    }

    /// Greedy maximum-weight independent set: elements in decreasing weight,
    /// ties broken by ascending index; zero-weight elements are still added
    /// when independent, so the result is a basis of the support span.
    pub fn max_weight_independent(&self, weights: &[f64]) -> Result<Subset> {
        self.greedy_on(Subset::full(self.n), weights)
    }

    /// Greedy restricted to a subset `s` (used by weighted rank).
    pub(crate) fn greedy_on(&self, s: Subset, weights: &[f64]) -> Result<Subset> {
        if weights.len() != self.n {
            return Err(Error::input(format!(
                "expected {} weights, got {}",
                self.n,
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::input("weights must be finite and nonnegative"));
        }
        let mut order: Vec<usize> = s.iter().collect();
        order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
        let mut picked = Subset::EMPTY;
        let mut rank = 0;
        for e in order {
            let cand = picked.with(e);
            let r = self.rank_mask(cand.bits());
            if r > rank {
                picked = cand;
                rank = r;
            }
        }
        Ok(picked)
    }

    /// Membership of `x` in the independent-set polytope
    /// `{x ≥ 0 : x(S) ≤ rank(S) for all S}`, with boundary tolerance `1e−9`.
    ///
    /// Checks every subset; budgeted at `n ≤ 20`.
    pub fn in_polytope(&self, x: &[f64]) -> Result<bool> {
        const TOL: f64 = 1e-9;
        self.polytope_guard(x)?;
        if x.iter().any(|&v| v < -TOL) {
            return Ok(false);
        }
        for mask in 1u32..(1u32 << self.n) {
            let sum: f64 = Subset(mask).iter().map(|i| x[i]).sum();
            if sum > self.rank_mask(mask) as f64 + TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The largest `α ≥ 0` with `α·x` inside the independent-set polytope
    /// (`∞` when `x = 0`).  Same `n ≤ 20` budget as [`Matroid::in_polytope`].
    pub fn polytope_scale(&self, x: &[f64]) -> Result<f64> {
        self.polytope_guard(x)?;
        if x.iter().any(|&v| v < 0.0) {
            return Err(Error::input("polytope scaling needs x ≥ 0"));
        }
        let mut alpha = f64::INFINITY;
        for mask in 1u32..(1u32 << self.n) {
            let sum: f64 = Subset(mask).iter().map(|i| x[i]).sum();
            if sum > 0.0 {
                alpha = alpha.min(self.rank_mask(mask) as f64 / sum);
            }
        }
        Ok(alpha)
    }

    fn polytope_guard(&self, x: &[f64]) -> Result<()> {
        if self.n > POLYTOPE_BUDGET {
            return Err(Error::capacity(format!(
                "polytope scan needs n ≤ {POLYTOPE_BUDGET}, got {}",
                self.n
            )));
        }
        if x.len() != self.n {
            return Err(Error::input(format!(
                "expected a point with {} coordinates, got {}",
                self.n,
                x.len()
            )));
        }
        Ok(())
    }

    /// Parses a matroid from the JSON wire format (see [`MatroidSpec`]).
    pub fn from_json(text: &str) -> Result<Matroid> {
        let spec: MatroidSpec = serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!(
                "matroid JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        spec.build()
    }
}

/// Shortest cycle of a multigraph in edge count (1 for a loop, 2 for a
/// parallel pair), as the graphic matroid's girth.
fn graphic_girth(vertices: usize, edges: &[(usize, usize)]) -> Girth {
    let mut best: Option<u32> = None;
    let mut seen = std::collections::HashSet::new();
    for &(u, v) in edges {
        if u == v {
            return Girth::Finite(1);
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            best = Some(best.map_or(2, |b: u32| b.min(2)));
        }
    }
    // Simple-cycle search: BFS from each edge's endpoint avoiding that edge.
    let mut adj = vec![Vec::new(); vertices];
    for (idx, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, idx));
        adj[v].push((u, idx));
    }
    for (idx, &(u, v)) in edges.iter().enumerate() {
        if u == v {
            continue;
        }
        // Distance from u to v without edge idx.
        let mut dist = vec![u32::MAX; vertices];
        dist[u] = 0;
        let mut queue = std::collections::VecDeque::from([u]);
        while let Some(w) = queue.pop_front() {
            for &(t, e) in &adj[w] {
                if e == idx || dist[t] != u32::MAX {
                    continue;
                }
                dist[t] = dist[w] + 1;
                queue.push_back(t);
            }
        }
        if dist[v] != u32::MAX {
            let cycle = dist[v] + 1;
            best = Some(best.map_or(cycle, |b: u32| b.min(cycle)));
        }
    }
    best.map_or(Girth::Infinite, Girth::Finite)
}

struct UnionFind {
    parent: [u8; 64],
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        let mut parent = [0u8; 64];
        for (i, p) in parent.iter_mut().enumerate().take(n) {
            *p = i as u8;
        }
        UnionFind { parent }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            self.parent[x] = self.parent[self.parent[x] as usize];
            x = self.parent[x] as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            false
        } else {
            self.parent[ra] = rb as u8;
            true
        }
    }
}

/// A matroid rank function weighted by nonnegative element weights:
/// `r_w(S) = max{ w(T) : T ⊆ S independent }`, evaluated greedily.
#[derive(Clone, Debug)]
pub struct WeightedRank {
    matroid: Matroid,
    weights: Vec<f64>,
}

impl WeightedRank {
    pub fn new(matroid: Matroid, weights: Vec<f64>) -> Result<WeightedRank> {
        if weights.len() != matroid.n() {
            return Err(Error::input(format!(
                "expected {} weights, got {}",
                matroid.n(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::input("weights must be finite and nonnegative"));
        }
        Ok(WeightedRank { matroid, weights })
    }

    /// Unit weights: the plain rank function.
    pub fn unit(matroid: Matroid) -> WeightedRank {
        let w = vec![1.0; matroid.n()];
        WeightedRank {
            matroid,
            weights: w,
        }
    }

    pub fn matroid(&self) -> &Matroid {
        &self.matroid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.matroid.n()
    }

    /// Weighted rank of a subset.
    pub fn value_subset(&self, s: Subset) -> Result<f64> {
        let picked = self.matroid.greedy_on(s, &self.weights)?;
        Ok(picked.iter().map(|i| self.weights[i]).sum())
    }

    pub(crate) fn value_mask(&self, mask: u32) -> f64 {
        let picked = self
            .matroid
            .greedy_on(Subset(mask), &self.weights)
            .expect("weights validated at construction");
        picked.iter().map(|i| self.weights[i]).sum()
    }
}

/// JSON wire format for matroids.
///
/// ```json
/// {"type":"uniform","n":8,"rank":3}
/// {"type":"partition","parts":[{"size":3,"cap":1}]}
/// {"type":"graphic","vertices":4,"edges":[[0,1],[1,2],[2,0],[0,3]]}
/// {"type":"direct_sum","parts":[…]}
/// {"type":"explicit","n":4,"bases":[[0,1],[0,2]]}
/// {"type":"paper_union","ell":2,"k":3,"block":5}
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatroidSpec {
    Uniform {
        n: usize,
        rank: u32,
    },
    Partition {
        parts: Vec<PartSpec>,
    },
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    Free {
        n: usize,
    },
    DirectSum {
        parts: Vec<MatroidSpec>,
    },
    Explicit {
        n: usize,
        bases: Vec<Vec<usize>>,
    },
    #[serde(rename = "paper_union")]
    UnionConstruction {
        ell: u32,
        k: u32,
        block: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub size: usize,
    pub cap: u32,
}

impl MatroidSpec {
    pub fn build(&self) -> Result<Matroid> {
        match self {
            MatroidSpec::Uniform { n, rank } => Matroid::uniform(*rank, *n),
            MatroidSpec::Partition { parts } => {
                let pairs: Vec<(usize, u32)> = parts.iter().map(|p| (p.size, p.cap)).collect();
                Matroid::partition(&pairs)
            }
            MatroidSpec::Graphic { vertices, edges } => Matroid::graphic(*vertices, edges),
            MatroidSpec::Free { n } => Matroid::free(*n),
            MatroidSpec::DirectSum { parts } => {
                let children = parts
                    .iter()
                    .map(|p| p.build())
                    .collect::<Result<Vec<_>>>()?;
                Matroid::direct_sum(children)
            }
            MatroidSpec::Explicit { n, bases } => Matroid::explicit(*n, bases),
            MatroidSpec::UnionConstruction { ell, k, block } => {
                Matroid::union_construction(*ell, *k, *block)
            }
        }
    }
}

/// Weight-vector sidecar file: `{"weights":[…]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSpec {
    pub weights: Vec<f64>,
}

impl WeightsSpec {
    pub fn from_json(text: &str) -> Result<WeightsSpec> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!(
                "weights JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> Matroid {
        Matroid::graphic(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn uniform_rank_and_girth() {
        let m = Matroid::uniform(3, 8).unwrap();
        assert_eq!(m.rank(), 3);
        assert_eq!(
            m.rank_subset(Subset::from_indices(&[0, 1]).unwrap())
                .unwrap(),
            2
        );
        assert_eq!(m.girth().unwrap(), Girth::Finite(4));
        assert_eq!(m.girth_by_enumeration().unwrap(), Girth::Finite(4));
        let free = Matroid::uniform(8, 8).unwrap();
        assert_eq!(free.girth().unwrap(), Girth::Infinite);
    }

    #[test]
    fn union_construction_rank_matches_displayed_formula() {
        // ell=2, k=1, block=3: nine elements, full rank 3.
        let m = Matroid::union_construction(2, 1, 3).unwrap();
        assert_eq!(m.n(), 9);
        assert_eq!(m.rank(), 3);
        // Brute-force cross-check of the rank formula against the matroid
        // union definition r(S) = min_{T⊆S} (r_u(T) + r_p(T) + |S∖T|), where
        // r_u is uniform rank ell on the whole ground set and r_p is the
        // cap-1 partition on the blocks (base-segment elements are loops).
        let ell = 2u32;
        for mask in 0u32..(1 << 9) {
            let mut best = u32::MAX;
            let mut t = mask;
            loop {
                let r_u = t.count_ones().min(ell);
                let r_p = u32::from((t >> 6) & 0b111 != 0);
                best = best.min(r_u + r_p + (mask & !t).count_ones());
                if t == 0 {
                    break;
                }
                t = (t - 1) & mask;
            }
            assert_eq!(m.rank_mask(mask), best, "mask {mask:#b}");
        }
    }

    #[test]
    fn union_construction_girth() {
        let m = Matroid::union_construction(2, 2, 4).unwrap();
        assert_eq!(m.n(), 16);
        assert_eq!(m.rank(), 4);
        assert_eq!(m.girth().unwrap(), Girth::Finite(3));
        let small = Matroid::union_construction(2, 1, 3).unwrap();
        assert_eq!(small.girth().unwrap(), Girth::Finite(3));
        assert_eq!(small.girth_by_enumeration().unwrap(), Girth::Finite(3));
        // block = 1 degenerates to a free matroid.
        let free = Matroid::union_construction(2, 2, 1).unwrap();
        assert_eq!(free.girth().unwrap(), Girth::Infinite);
        assert_eq!(free.girth_by_enumeration().unwrap(), Girth::Infinite);
    }

    #[test]
    fn graphic_girth_matches_enumeration() {
        let m = k4();
        assert_eq!(m.girth().unwrap(), Girth::Finite(3));
        assert_eq!(m.girth_by_enumeration().unwrap(), Girth::Finite(3));
        let parallel = Matroid::graphic(3, &[(0, 1), (0, 1), (1, 2)]).unwrap();
        assert_eq!(parallel.girth().unwrap(), Girth::Finite(2));
        assert_eq!(parallel.girth_by_enumeration().unwrap(), Girth::Finite(2));
        let looped = Matroid::graphic(2, &[(0, 0), (0, 1)]).unwrap();
        assert_eq!(looped.girth().unwrap(), Girth::Finite(1));
        let path = Matroid::graphic(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(path.girth().unwrap(), Girth::Infinite);
        // Longer cycle found through BFS: C5 has girth 5.
        let c5 = Matroid::graphic(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(c5.girth().unwrap(), Girth::Finite(5));
        assert_eq!(c5.girth_by_enumeration().unwrap(), Girth::Finite(5));
    }

    #[test]
    fn partition_girth_closed_form() {
        let m = Matroid::partition(&[(3, 1), (3, 1), (3, 1)]).unwrap();
        assert_eq!(m.n(), 9);
        assert_eq!(m.rank(), 3);
        assert_eq!(m.girth().unwrap(), Girth::Finite(2));
        let mixed = Matroid::partition(&[(4, 2), (2, 2)]).unwrap();
        assert_eq!(mixed.girth().unwrap(), Girth::Finite(3));
        assert_eq!(mixed.girth_by_enumeration().unwrap(), Girth::Finite(3));
        let free = Matroid::partition(&[(2, 2), (3, 5)]).unwrap();
        assert_eq!(free.girth().unwrap(), Girth::Infinite);
        let loops = Matroid::partition(&[(2, 0)]).unwrap();
        assert_eq!(loops.girth().unwrap(), Girth::Finite(1));
    }

    #[test]
    fn weighted_rank_triangle() {
        // Greedy on a triangle picks the two heaviest edges: 5 + 4 = 9.
        let m = Matroid::graphic(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let wr = WeightedRank::new(m, vec![5.0, 4.0, 3.0]).unwrap();
        assert_eq!(wr.value_subset(Subset::full(3)).unwrap(), 9.0);
        // Brute force over independent subsets.
        let m = wr.matroid();
        let mut best = 0.0f64;
        for mask in 0u32..8 {
            if m.rank_mask(mask) == mask.count_ones() {
                let w: f64 = Subset(mask).iter().map(|i| wr.weights()[i]).sum();
                best = best.max(w);
            }
        }
        assert_eq!(best, 9.0);
    }

    #[test]
    fn greedy_tie_break_ascending_index() {
        let m = Matroid::partition(&[(2, 1), (2, 1)]).unwrap();
        let picked = m.max_weight_independent(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(picked, Subset::from_indices(&[1, 3]).unwrap());
        // All-equal weights: ties resolved by index, one per part.
        let tied = m.max_weight_independent(&[1.0; 4]).unwrap();
        assert_eq!(tied, Subset::from_indices(&[0, 2]).unwrap());
    }

    #[test]
    fn greedy_rejects_negative_weights() {
        let m = Matroid::uniform(1, 2).unwrap();
        assert!(matches!(
            m.max_weight_independent(&[1.0, -0.5]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn polytope_membership_triangle() {
        let m = Matroid::graphic(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(m.in_polytope(&[2.0 / 3.0; 3]).unwrap());
        assert!(!m.in_polytope(&[0.7; 3]).unwrap());
        assert!(!m.in_polytope(&[1.0, 1.0, 0.1]).unwrap());
        let alpha = m.polytope_scale(&[1.0; 3]).unwrap();
        assert!((alpha - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn polytope_capacity_cap() {
        let m = Matroid::uniform(2, 21).unwrap();
        assert!(matches!(
            m.in_polytope(&[0.01; 21]),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn direct_sum_layout() {
        let m = Matroid::direct_sum(vec![
            Matroid::uniform(1, 2).unwrap(),
            Matroid::free(2).unwrap(),
        ])
        .unwrap();
        assert_eq!(m.n(), 4);
        assert_eq!(m.rank(), 3);
        assert_eq!(
            m.rank_subset(Subset::from_indices(&[0, 1]).unwrap())
                .unwrap(),
            1
        );
        assert_eq!(
            m.rank_subset(Subset::from_indices(&[2, 3]).unwrap())
                .unwrap(),
            2
        );
        assert_eq!(m.girth().unwrap(), Girth::Finite(2));
    }

    #[test]
    fn explicit_matroid_validates_exchange() {
        let ok = Matroid::explicit(4, &[vec![0, 1], vec![0, 2]]).unwrap();
        assert_eq!(ok.rank(), 2);
        assert_eq!(ok.girth_by_enumeration().unwrap(), Girth::Finite(1));
        // {0,1} and {2,3} violate exchange: 0 cannot be swapped in.
        assert!(matches!(
            Matroid::explicit(4, &[vec![0, 1], vec![2, 3]]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            Matroid::explicit(4, &[vec![0, 1], vec![2]]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let m = Matroid::from_json(r#"{"type":"uniform","n":8,"rank":3}"#).unwrap();
        assert_eq!((m.n(), m.rank()), (8, 3));
        let m = Matroid::from_json(r#"{"type":"partition","parts":[{"size":3,"cap":1}]}"#).unwrap();
        assert_eq!((m.n(), m.rank()), (3, 1));
        let m = Matroid::from_json(
            r#"{"type":"graphic","vertices":4,"edges":[[0,1],[1,2],[2,0],[0,3]]}"#,
        )
        .unwrap();
        assert_eq!((m.n(), m.rank()), (4, 3));
        let m = Matroid::from_json(
            r#"{"type":"direct_sum","parts":[{"type":"uniform","n":2,"rank":1},{"type":"free","n":1}]}"#,
        )
        .unwrap();
        assert_eq!((m.n(), m.rank()), (3, 2));
        let m = Matroid::from_json(r#"{"type":"explicit","n":4,"bases":[[0,1],[0,2]]}"#).unwrap();
        assert_eq!((m.n(), m.rank()), (4, 2));
        let m = Matroid::from_json(r#"{"type":"paper_union","ell":2,"k":3,"block":5}"#).unwrap();
        assert_eq!((m.n(), m.rank()), (25, 5));
        let err = Matroid::from_json(r#"{"type":"uniform","n":8"#);
        assert!(matches!(err, Err(Error::Parse(_))));
    }

    #[test]
    fn girth_closed_forms_match_enumeration_small() {
        let instances = vec![
            Matroid::uniform(2, 5).unwrap(),
            Matroid::partition(&[(2, 1), (3, 2)]).unwrap(),
            k4(),
            Matroid::union_construction(1, 2, 2).unwrap(),
            Matroid::union_construction(3, 1, 2).unwrap(),
            Matroid::direct_sum(vec![
                Matroid::uniform(1, 3).unwrap(),
                Matroid::uniform(2, 2).unwrap(),
            ])
            .unwrap(),
        ];
        for m in instances {
            assert_eq!(
                m.girth().unwrap(),
                m.girth_by_enumeration().unwrap(),
                "girth mismatch for {m:?}"
            );
        }
    }
}
