//! Maximal (ω, ε, n)-separated sets, spanning counts and the
//! deviation-restricted counts M(α, δ, n, ε, ω) and N(α, δ, n, ε, ω).
//!
//! Grid search runs on the lattice `G_K = (1/K)Z^d`, which every integer
//! linear map preserves. Because fiber maps are affine, `p, q ∈ G_K` are
//! within Bowen distance ε exactly when `q - p` lies in the difference set
//! `D_n = {g : |A_{i-1}⋯A_0 g| ≤ ε on T^d for all i < n}`. `D_n` is computed
//! once per base point by iterating the ε-disk of offsets, and the greedy
//! pass blocks `p + D_n` whenever it selects `p`. The result is identical to
//! the naive greedy that compares every candidate against every member.

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::sync::atomic::{AtomicU64, Ordering};

use fibertherm::base::{base_step, BasePoint};
use fibertherm::error::{invalid, Error, Result};
use fibertherm::neighbors::NeighborIndex;
use fibertherm::observable::{birkhoff_sum, Observable};
use fibertherm::skew::{FiberKind, FiberPoint, LinearPart, SkewSystem};
use fibertherm::torus::{centered, Phase};

/// Default evaluation cap in fiber steps.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Running count of fiber steps against a fixed cap.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    spent: AtomicU64,
}

impl Budget {
    pub fn new(limit: u64) -> Budget {
        Budget {
            limit,
            spent: AtomicU64::new(0),
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn spent(&self) -> u64 {
        self.spent.load(Ordering::Relaxed)
    }

    /// Refuses when `cost` more steps would exceed the cap.
    pub fn check(&self, cost: u64) -> Result<()> {
        let predicted = self.spent().saturating_add(cost);
        if predicted > self.limit {
            return Err(Error::BudgetExceeded {
                predicted,
                budget: self.limit,
            });
        }
        Ok(())
    }

    /// Checks and then records `cost` steps.
    pub fn charge(&self, cost: u64) -> Result<()> {
        self.check(cost)?;
        self.spent.fetch_add(cost, Ordering::Relaxed);
        Ok(())
    }
}

/// Birkhoff deviation constraint `|S_n φ / n - α| < δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Restriction {
    pub phi: Observable,
    pub alpha: f64,
    pub delta: f64,
}

/// Whether `x ∈ P(α, δ, n, ω)`.
pub fn deviation_set_membership(
    sys: &SkewSystem,
    phi: &Observable,
    omega: &BasePoint,
    x: &FiberPoint,
    n: usize,
    alpha: f64,
    delta: f64,
) -> bool {
    let avg = birkhoff_sum(sys, phi, omega, x, n) / n as f64;
    (avg - alpha).abs() < delta
}

/// Order in which the greedy pass visits lattice points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanOrder {
    Lexicographic,
    /// A seeded pseudo-random permutation of the lattice.
    Shuffled(u64),
}

/// Candidate lattice `(1/resolution)Z^d` and its scan order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub resolution: u64,
    pub order: ScanOrder,
}

impl GridSpec {
    /// Spacing `r ≤ ε/8` in lexicographic order.
    pub fn for_epsilon(eps: f64) -> GridSpec {
        GridSpec {
            resolution: (8.0 / eps).ceil() as u64,
            order: ScanOrder::Lexicographic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Grid,
    Cylinder,
    Greedy,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Grid => "grid",
            Method::Cylinder => "cylinder",
            Method::Greedy => "greedy-cover",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// `None` selects [`GridSpec::for_epsilon`].
    pub grid: Option<GridSpec>,
    pub budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grid: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// A separated subset of the candidate lattice.
#[derive(Clone, Debug)]
pub struct SeparatedSet {
    pub points: Vec<FiberPoint>,
    pub omega: BasePoint,
    pub n: usize,
    pub eps: f64,
    pub method: Method,
    pub resolution: Option<u64>,
    /// Number of lattice points that satisfied the restriction.
    pub candidates: u64,
}

impl SeparatedSet {
    /// Cardinality, reported as 1 for an empty set.
    pub fn count(&self) -> u64 {
        (self.points.len() as u64).max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pairs at Bowen distance `≤ ε - slack`; empty when the set is
    /// strictly ε-separated.
    pub fn violations(&self, sys: &SkewSystem, slack: f64) -> Vec<(usize, usize, f64)> {
        let parts = sys.linear_parts(&self.omega, self.n);
        let index = NeighborIndex::new(&self.points, &parts, self.eps);
        let mut out = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            for j in index.within(p, self.eps - slack) {
                let j = j as usize;
                if j > i {
                    let d = fibertherm::skew::bowen_distance_with(&parts, p, &self.points[j], f64::INFINITY);
                    out.push((i, j, d));
                }
            }
        }
        out
    }

    /// Candidates farther than ε from every member; empty when the set is
    /// maximal among `candidates`.
    pub fn uncovered(&self, sys: &SkewSystem, candidates: &[FiberPoint]) -> Vec<usize> {
        let parts = sys.linear_parts(&self.omega, self.n);
        let index = NeighborIndex::new(&self.points, &parts, self.eps);
        fibertherm::parallel::map_chunks(candidates.len(), |i| index.within(&candidates[i], self.eps).is_empty())
            .into_iter()
            .enumerate()
            .filter_map(|(i, lonely)| lonely.then_some(i))
            .collect()
    }
}

/// Lattice offsets within ε at time 0, sorted by how long they stay within ε.
struct DifferenceTable {
    k: i64,
    dim: usize,
    offsets: Vec<[i64; 2]>,
    survival: Vec<u32>,
}

fn lattice_norm(v: [i64; 2], k: i64) -> f64 {
    let kf = k as f64;
    (centered(v[0], k) as f64 / kf).hypot(centered(v[1], k) as f64 / kf)
}

impl DifferenceTable {
    fn build(parts: &[LinearPart], eps: f64, k: i64, dim: usize, budget: &Budget) -> Result<DifferenceTable> {
        let r = (eps * k as f64).floor() as i64 + 1;
        let r2 = if dim == 1 { 0 } else { r };
        let mut offsets = Vec::new();
        for g0 in -r..=r {
            for g1 in -r2..=r2 {
                let g = [g0, g1];
                if lattice_norm(g, k) <= eps {
                    offsets.push(g);
                }
            }
        }
        let mut survival = vec![1u32; offsets.len()];
        let mut alive: Vec<(u32, [i64; 2])> = offsets
            .iter()
            .enumerate()
            .map(|(i, g)| (i as u32, [g[0].rem_euclid(k), g[1].rem_euclid(k)]))
            .collect();
        for a in parts.iter().take(parts.len().saturating_sub(1)) {
            if alive.is_empty() {
                break;
            }
            budget.charge(alive.len() as u64)?;
            let next: Vec<Option<(u32, [i64; 2])>> = fibertherm::parallel::map_chunks(alive.len(), |j| {
                let (i, v) = alive[j];
                let w = a.apply_mod(v, k);
                (lattice_norm(w, k) <= eps).then_some((i, w))
            });
            alive = next.into_iter().flatten().collect();
            for (i, _) in &alive {
                survival[*i as usize] += 1;
            }
        }
        let mut order: Vec<usize> = (0..offsets.len()).collect();
        order.sort_by_key(|&i| (Reverse(survival[i]), offsets[i]));
        Ok(DifferenceTable {
            k,
            dim,
            offsets: order.iter().map(|&i| offsets[i]).collect(),
            survival: order.iter().map(|&i| survival[i]).collect(),
        })
    }

    /// `D_n` as a prefix of the offset list.
    fn within(&self, n: usize) -> &[[i64; 2]] {
        let m = self.survival.partition_point(|&s| s as usize >= n);
        &self.offsets[..m]
    }
}

/// Keyed bijection of `[0, n)` by cycle-walking a mixing permutation of
/// `[0, 2^bits)`.
struct Shuffle {
    n: u64,
    bits: u32,
    keys: [u64; 4],
}

impl Shuffle {
    fn new(n: u64, seed: u64) -> Shuffle {
        let bits = (64 - n.saturating_sub(1).leading_zeros()).max(2);
        let mut s = seed ^ 0x9E37_79B9_7F4A_7C15;
        let mut next = || {
            s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        Shuffle {
            n,
            bits,
            keys: [next() | 1, next(), next() | 1, next()],
        }
    }

    fn mix(&self, mut x: u64) -> u64 {
        let mask = if self.bits == 64 { u64::MAX } else { (1u64 << self.bits) - 1 };
        let half = self.bits / 2 + 1;
        for r in 0..2 {
            x = x.wrapping_mul(self.keys[2 * r]) & mask;
            x ^= x >> half;
            x = x.wrapping_add(self.keys[2 * r + 1]) & mask;
            x ^= x >> (half.saturating_sub(1).max(1));
        }
        x
    }

    fn get(&self, i: u64) -> u64 {
        let mut x = self.mix(i);
        while x >= self.n {
            x = self.mix(x);
        }
        x
    }
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64)])
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.0[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i >> 6] |= 1 << (i & 63);
    }
}

fn lattice_point(idx: u64, k: u64, dim: usize) -> FiberPoint {
    if dim == 1 {
        FiberPoint::Circle(Phase::from_ratio(idx as i64, k))
    } else {
        FiberPoint::Torus([
            Phase::from_ratio((idx / k) as i64, k),
            Phase::from_ratio((idx % k) as i64, k),
        ])
    }
}

/// Lattice points per shuffled tile; a tile of bits fits in L1.
const TILE: u64 = 4096;

/// Calls `f` on every index of `[0, total)` once, in scan order. Shuffled
/// order permutes tiles of consecutive indices and then the indices inside
/// each tile, so memory access stays local.
fn visit(total: u64, order: ScanOrder, mut f: impl FnMut(u64)) {
    match order {
        ScanOrder::Lexicographic => (0..total).for_each(f),
        ScanOrder::Shuffled(seed) => {
            let tiles = total.div_ceil(TILE);
            let outer = Shuffle::new(tiles, seed);
            for t in 0..tiles {
                let tile = outer.get(t);
                let start = tile * TILE;
                let size = TILE.min(total - start);
                let inner = Shuffle::new(size, seed ^ tile.wrapping_mul(0xA24B_AED4_963E_E407));
                for j in 0..size {
                    f(start + inner.get(j));
                }
            }
        }
    }
}

fn greedy(table: &DifferenceTable, n: usize, order: ScanOrder, candidates: Option<&Bits>) -> Vec<u64> {
    let k = table.k;
    let dim = table.dim;
    let total = (k as u64).pow(dim as u32);
    let ball = table.within(n);
    let mut blocked = Bits::new(total as usize);
    let mut chosen = Vec::new();
    visit(total, order, |idx| {
        if blocked.get(idx as usize) {
            return;
        }
        if let Some(c) = candidates {
            if !c.get(idx as usize) {
                return;
            }
        }
        chosen.push(idx);
        let (p0, p1) = if dim == 1 {
            (idx as i64, 0)
        } else {
            ((idx / k as u64) as i64, (idx % k as u64) as i64)
        };
        for g in ball {
            let mut q0 = p0 + g[0];
            if q0 < 0 {
                q0 += k;
            } else if q0 >= k {
                q0 -= k;
            }
            let q = if dim == 1 {
                q0
            } else {
                let mut q1 = p1 + g[1];
                if q1 < 0 {
                    q1 += k;
                } else if q1 >= k {
                    q1 -= k;
                }
                q0 * k + q1
            };
            blocked.set(q as usize);
        }
    });
    chosen
}

/// Per-lattice-point Birkhoff sums `S_n φ`, one row per requested `n`.
/// A constant observable is stored as a single shared value per row.
#[derive(Clone, Debug)]
pub struct LatticeSums {
    rows: Vec<Vec<f64>>,
}

impl LatticeSums {
    fn get(&self, j: usize, idx: usize) -> f64 {
        let row = &self.rows[j];
        if row.len() == 1 {
            row[0]
        } else {
            row[idx]
        }
    }
}

/// Difference table and candidate lattice for one base point, shared by
/// every separated-set query at that base point.
pub struct LatticeSearch<'a> {
    sys: &'a SkewSystem,
    omega: BasePoint,
    ns: Vec<usize>,
    eps: f64,
    grid: GridSpec,
    dim: usize,
    total: u64,
    table: DifferenceTable,
    budget: &'a Budget,
}

impl<'a> LatticeSearch<'a> {
    /// Builds `D_n` for `n ≤ max(ns)`; charges the table iteration.
    pub fn new(
        sys: &'a SkewSystem,
        omega: &BasePoint,
        ns: &[usize],
        eps: f64,
        grid: GridSpec,
        budget: &'a Budget,
    ) -> Result<LatticeSearch<'a>> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(invalid(format!("epsilon {eps} outside (0, 1/2)")));
        }
        if ns.is_empty() || ns.contains(&0) {
            return Err(invalid("n values must be positive"));
        }
        if ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n values must be strictly increasing"));
        }
        let dim = sys.fiber_dim();
        let k = grid.resolution;
        if k < 2 || (dim == 2 && k > 1 << 16) || k > 1 << 31 {
            return Err(invalid(format!("grid resolution {k} out of range")));
        }
        let n_max = *ns.last().unwrap();
        let parts = sys.linear_parts(omega, n_max);
        let table = DifferenceTable::build(&parts, eps, k as i64, dim, budget)?;
        Ok(LatticeSearch {
            sys,
            omega: *omega,
            ns: ns.to_vec(),
            eps,
            grid,
            dim,
            total: k.pow(dim as u32),
            table,
            budget,
        })
    }

    pub fn ns(&self) -> &[usize] {
        &self.ns
    }

    /// Birkhoff sums of every lattice point; charges `|G_K|·max(ns)` steps
    /// unless φ is constant.
    pub fn birkhoff(&self, phi: &Observable) -> Result<LatticeSums> {
        if let Some(c) = phi.as_constant() {
            return Ok(LatticeSums {
                rows: self.ns.iter().map(|&n| vec![c * n as f64]).collect(),
            });
        }
        let n_max = *self.ns.last().unwrap();
        self.budget.charge(self.total * n_max as u64)?;
        let (sys, omega, k, dim, ns) = (self.sys, &self.omega, self.grid.resolution, self.dim, &self.ns);
        let omegas: Vec<BasePoint> = (0..n_max).map(|i| base_step(&sys.driving, omega, i as i64)).collect();
        let sums: Vec<Vec<f64>> = fibertherm::parallel::map_chunks(self.total as usize, |idx| {
            let orbit = fibertherm::skew::fiber_orbit(sys, omega, &lattice_point(idx as u64, k, dim), n_max);
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(ns.len());
            let mut next = 0;
            for (i, p) in orbit.iter().enumerate() {
                acc += phi.eval(&omegas[i], p);
                while next < ns.len() && ns[next] == i + 1 {
                    out.push(acc);
                    next += 1;
                }
            }
            out
        });
        Ok(LatticeSums {
            rows: (0..ns.len()).map(|j| sums.iter().map(|s| s[j]).collect()).collect(),
        })
    }

    /// Greedy separated sets for every `n`, restricted to
    /// `|S_n φ / n - α| < δ` when `level = Some((sums, α, δ))`.
    pub fn separated(&self, level: Option<(&LatticeSums, f64, f64)>) -> Vec<SeparatedSet> {
        let k = self.grid.resolution;
        let mut out = Vec::with_capacity(self.ns.len());
        for (j, &n) in self.ns.iter().enumerate() {
            let mask = level.map(|(sums, alpha, delta)| {
                let mut bits = Bits::new(self.total as usize);
                let mut any = 0u64;
                for idx in 0..self.total as usize {
                    if (sums.get(j, idx) / n as f64 - alpha).abs() < delta {
                        bits.set(idx);
                        any += 1;
                    }
                }
                (bits, any)
            });
            let candidates = mask.as_ref().map(|m| m.1).unwrap_or(self.total);
            let chosen = if candidates == 0 {
                Vec::new()
            } else {
                greedy(&self.table, n, self.grid.order, mask.as_ref().map(|m| &m.0))
            };
            out.push(SeparatedSet {
                points: chosen.iter().map(|&i| lattice_point(i, k, self.dim)).collect(),
                omega: self.omega,
                n,
                eps: self.eps,
                method: Method::Grid,
                resolution: Some(k),
                candidates,
            });
        }
        out
    }
}

/// Greedy maximal separated sets for every `n` in `ns` at one base point.
pub fn separated_sets_with_budget(
    sys: &SkewSystem,
    omega: &BasePoint,
    ns: &[usize],
    eps: f64,
    restriction: Option<&Restriction>,
    grid: GridSpec,
    budget: &Budget,
) -> Result<Vec<SeparatedSet>> {
    if let Some(r) = restriction {
        if r.phi.as_constant().is_none() {
            let total = grid.resolution.saturating_pow(sys.fiber_dim() as u32);
            let n_max = ns.iter().copied().max().unwrap_or(0) as u64;
            budget.check(total.saturating_mul(n_max))?;
        }
    }
    let search = LatticeSearch::new(sys, omega, ns, eps, grid, budget)?;
    match restriction {
        Some(r) => {
            let sums = search.birkhoff(&r.phi)?;
            Ok(search.separated(Some((&sums, r.alpha, r.delta))))
        }
        None => Ok(search.separated(None)),
    }
}

/// A maximal (ω, ε, n)-separated subset of the candidate lattice, restricted
/// to `P(α, δ, n, ω)` when a restriction is given.
pub fn max_separated_set(
    sys: &SkewSystem,
    omega: &BasePoint,
    n: usize,
    eps: f64,
    restriction: Option<&Restriction>,
    opts: &SearchOptions,
) -> Result<SeparatedSet> {
    let grid = opts.grid.unwrap_or_else(|| GridSpec::for_epsilon(eps));
    let budget = Budget::new(opts.budget);
    let mut v = separated_sets_with_budget(sys, omega, &[n], eps, restriction, grid, &budget)?;
    Ok(v.pop().unwrap())
}

/// One row of a count table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountRow {
    pub n: usize,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    /// Count with the empty-set convention applied (never 0).
    pub count: u128,
    pub method: Method,
    /// True when the underlying set was empty.
    pub empty: bool,
}

/// Count rows produced by one method.
#[derive(Clone, Debug, Default)]
pub struct CountTable {
    pub rows: Vec<CountRow>,
}

impl CountTable {
    /// Columns `n,epsilon,alpha,delta,count,method`; absent values are empty.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut s = String::from("n,epsilon,alpha,delta,count,method\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                opt(r.epsilon),
                opt(r.alpha),
                opt(r.delta),
                r.count,
                r.method.tag()
            ));
        }
        s
    }

    /// Rows whose count increases with ε at fixed `(n, α, δ)` and method.
    pub fn monotonicity_violations(&self) -> Vec<(CountRow, CountRow)> {
        let mut out = Vec::new();
        for a in &self.rows {
            for b in &self.rows {
                let same = a.n == b.n && a.alpha == b.alpha && a.delta == b.delta && a.method == b.method;
                if let (true, Some(ea), Some(eb)) = (same, a.epsilon, b.epsilon) {
                    if ea < eb && a.count < b.count {
                        out.push((*a, *b));
                    }
                }
            }
        }
        out
    }
}

fn digit_observable(sys: &SkewSystem, phi: &Observable) -> Result<(f64, f64)> {
    if !matches!(sys.fiber, FiberKind::Doubling) {
        return Err(invalid("cylinder enumeration needs the doubling system"));
    }
    phi.digit_affine()
        .ok_or_else(|| invalid("cylinder enumeration needs an observable of the first digit"))
}

fn binomial(n: u32, j: u32) -> u128 {
    let j = j.min(n - j);
    (0..j).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of length-`n` binary words whose digit average, weighted by φ,
/// lies within δ of α. Each word contributes one separated point for every
/// ε < 1/2.
pub fn cylinder_counts(sys: &SkewSystem, phi: &Observable, n: usize, alpha: f64, delta: f64) -> Result<CountRow> {
    let (a, b) = digit_observable(sys, phi)?;
    if n == 0 || n > 120 {
        return Err(invalid(format!("cylinder length {n} outside 1..=120")));
    }
    let count: u128 = (0..=n as u32)
        .filter(|&j| ((a * j as f64 + b * n as f64) / n as f64 - alpha).abs() < delta)
        .map(|j| binomial(n as u32, j))
        .sum();
    Ok(CountRow {
        n,
        epsilon: None,
        alpha: Some(alpha),
        delta: Some(delta),
        count: count.max(1),
        method: Method::Cylinder,
        empty: count == 0,
    })
}

/// `log Z_n = log Σ_w exp(S_n φ(w))` over the `2^n` cylinders.
pub fn cylinder_log_partition(sys: &SkewSystem, phi: &Observable, n: usize) -> Result<f64> {
    let (a, b) = digit_observable(sys, phi)?;
    let terms = (0..=n as u64).map(|j| fibertherm::stats::ln_binomial(n as u64, j) + a * j as f64 + b * n as f64);
    Ok(fibertherm::stats::log_sum_exp(terms))
}

/// Exact `(N, M)` for the doubling system with a digit observable when
/// `ε ≤ 1/4`: Bowen balls are arcs of radius `ε 2^{1-n}`, so N is the
/// minimal open-arc cover of `P(α, δ, n)` and M its largest packing.
pub fn oracle_cover_and_packing(
    sys: &SkewSystem,
    phi: &Observable,
    n: usize,
    alpha: f64,
    delta: f64,
    eps: f64,
) -> Result<(u128, u128)> {
    let (a, b) = digit_observable(sys, phi)?;
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(invalid("exact cover needs 0 < ε ≤ 1/4"));
    }
    if n == 0 || n > 24 {
        return Err(invalid("exact cover needs 1 ≤ n ≤ 24"));
    }
    let words = 1u64 << n;
    let inside = |w: u64| ((a * w.count_ones() as f64 + b * n as f64) / n as f64 - alpha).abs() < delta;
    let members: Vec<bool> = (0..words).map(inside).collect();
    let total_in = members.iter().filter(|&&m| m).count() as u64;
    if total_in == 0 {
        return Ok((1, 1));
    }
    // Lengths in units of one cylinder; an open arc spans 4ε cylinders.
    let arc = 4.0 * eps;
    let cover = |len: f64| (len / arc).floor() as u128 + 1;
    let pack = |len: f64| {
        let r = 2.0 * len / arc;
        if r.fract() == 0.0 {
            r as u128
        } else {
            r.ceil() as u128
        }
    };
    if total_in == words {
        let r = 2.0 * words as f64 / arc;
        let m = if r.fract() == 0.0 { r as u128 - 1 } else { r.floor() as u128 };
        return Ok(((words as f64 / arc).floor() as u128 + 1, m));
    }
    // Start scanning just after a gap so runs do not wrap.
    let start = (0..words).find(|&w| !members[w as usize]).unwrap();
    let (mut n_cov, mut m_pack, mut run) = (0u128, 0u128, 0u64);
    for step in 1..=words {
        let w = ((start + step) % words) as usize;
        if members[w] {
            run += 1;
        } else if run > 0 {
            n_cov += cover(run as f64);
            m_pack += pack(run as f64);
            run = 0;
        }
    }
    Ok((n_cov, m_pack))
}

/// Result of a greedy (1-δ)-cover of a sample by Bowen balls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpanningCount {
    pub count: u64,
    pub covered: u64,
    pub sample_size: u64,
}

/// Greedy upper bound on the number of closed Bowen ε-balls, centered at
/// sample points, needed to cover at least `(1-δ)` of the sample.
pub fn min_spanning_count(
    sys: &SkewSystem,
    omega: &BasePoint,
    n: usize,
    eps: f64,
    sample: &[FiberPoint],
    delta: f64,
) -> Result<SpanningCount> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta {delta} outside (0, 1)")));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let parts = sys.linear_parts(omega, n);
    let index = NeighborIndex::new(sample, &parts, eps);
    let (offsets, targets) = index.adjacency();
    let s = sample.len();
    let target = ((1.0 - delta) * s as f64).ceil().max(1.0) as u64;
    let mut covered = vec![false; s];
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        (0..s).map(|i| (offsets[i + 1] - offsets[i], Reverse(i))).collect();
    let (mut count, mut done) = (0u64, 0u64);
    while done < target {
        let Some((gain, Reverse(i))) = heap.pop() else { break };
        let nbrs = &targets[offsets[i]..offsets[i + 1]];
        let fresh = nbrs.iter().filter(|&&j| !covered[j as usize]).count();
        if fresh < gain {
            heap.push((fresh, Reverse(i)));
            continue;
        }
        if fresh == 0 {
            break;
        }
        for &j in nbrs {
            covered[j as usize] = true;
        }
        done += fresh as u64;
        count += 1;
    }
    Ok(SpanningCount {
        count,
        covered: done,
        sample_size: s as u64,
    })
}
