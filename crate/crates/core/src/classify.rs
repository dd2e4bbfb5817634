//! Classes of prescribed degree and self-intersection, by enumeration in
//! the orthogonal complement of the canonical class.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::field::Rational;
use crate::lattice::{kernel_basis, lll_reduce_with, snf, IntMatrix, PicardLattice};
use crate::surface::{Catalog, CurveKind};

pub const CANDIDATES_FORMAT: &str = "cuboid-candidates v1";

/// Classes `x` with `x·K = dot_with_k` and `x² = self_int`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClassQuery {
    pub dot_with_k: i64,
    pub self_int: i64,
}

impl ClassQuery {
    pub fn new(dot_with_k: i64, self_int: i64) -> Self {
        ClassQuery {
            dot_with_k,
            self_int,
        }
    }
}

/// The solutions of a query and those passing the positivity filter, in
/// lattice-basis coordinates, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    pub query: ClassQuery,
    /// Number of solutions.
    pub count: usize,
    /// The solutions themselves, kept when there are at most
    /// [`EnumerationOptions::keep_limit`] of them.
    pub vectors: Option<Vec<Vec<BigInt>>>,
    pub survivors: Vec<Vec<BigInt>>,
}

impl CandidateSet {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{CANDIDATES_FORMAT}\nquery {} {}\ncount {}\n",
            self.query.dot_with_k, self.query.self_int, self.count
        );
        match &self.vectors {
            Some(v) => {
                let _ = writeln!(out, "vectors {}", v.len());
                for x in v {
                    let _ = writeln!(out, "{}", join(x));
                }
            }
            None => out.push_str("vectors omitted\n"),
        }
        let _ = writeln!(out, "survivors {}", self.survivors.len());
        for v in &self.survivors {
            let _ = writeln!(out, "{}", join(v));
        }
        out
    }
}

fn join(v: &[BigInt]) -> String {
    v.iter()
        .map(BigInt::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Tuning for [`enumerate_classes`]; the solutions never depend on it.
#[derive(Clone, Copy, Debug)]
pub struct EnumerationOptions {
    /// LLL-reduce the complement before enumerating.
    pub reduce: bool,
    /// Number of subtrees to aim for before handing them to worker threads.
    pub split_target: usize,
    /// Largest solution set returned in full.
    pub keep_limit: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            reduce: true,
            split_target: 512,
            keep_limit: 100_000,
        }
    }
}

/// Fincke–Pohst data of a positive definite integer form:
/// `Q(w) = Σ_i q[i][i]·(w_i + Σ_{j>i} q[i][j]·w_j)²`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    q: Vec<Vec<Rational>>,
}

impl Cholesky {
    pub fn new(a: &IntMatrix) -> Result<Self> {
        if !a.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let n = a.rows();
        let mut q: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Rational::from_integer(a[(i, j)].clone()))
                    .collect()
            })
            .collect();
        for i in 0..n {
            if !q[i][i].is_positive() {
                return Err(Error::NotDefinite);
            }
            for j in i + 1..n {
                q[j][i] = q[i][j].clone();
                q[i][j] = &q[i][j] / &q[i][i];
            }
            for k in i + 1..n {
                for l in k..n {
                    let t = &q[k][i] * &q[i][l];
                    q[k][l] -= t;
                }
            }
        }
        Ok(Cholesky { q })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.q[i][j]
    }
}

/// Smallest and largest integers `z` with `(z − m)² ≤ s`.
fn integer_range(m: &Rational, s: &Rational) -> Option<(BigInt, BigInt)> {
    if s.is_negative() {
        return None;
    }
    let r = s.floor().to_integer().sqrt() + BigInt::one();
    let inside = |z: &BigInt| {
        let d = Rational::from_integer(z.clone()) - m;
        &d * &d <= *s
    };
    let mut lo = m.floor().to_integer() - &r;
    let limit = m.ceil().to_integer() + &r;
    while lo <= limit && !inside(&lo) {
        lo += 1;
    }
    if lo > limit {
        return None;
    }
    let mut hi = limit;
    while !inside(&hi) {
        hi -= 1;
    }
    Some((lo, hi))
}

/// A partial assignment of the coordinates `level..n`.
#[derive(Clone, Debug)]
struct Node {
    level: usize,
    z: Vec<BigInt>,
    remaining: Rational,
}

struct Search<'a> {
    chol: &'a Cholesky,
    center: &'a [Rational],
    exact: bool,
}

impl Search<'_> {
    fn children(&self, node: &Node) -> Vec<Node> {
        let i = node.level - 1;
        let n = self.chol.dim();
        let q = &self.chol.q;
        let mut u = Rational::zero();
        for j in i + 1..n {
            let w = Rational::from_integer(node.z[j].clone()) - &self.center[j];
            u += &q[i][j] * w;
        }
        let m = &self.center[i] - &u;
        let s = &node.remaining / &q[i][i];
        let Some((lo, hi)) = integer_range(&m, &s) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut z = lo;
        while z <= hi {
            let d = Rational::from_integer(z.clone()) - &m;
            let rest = &node.remaining - &q[i][i] * &d * &d;
            let mut zz = node.z.clone();
            zz[i] = z.clone();
            out.push(Node {
                level: i,
                z: zz,
                remaining: rest,
            });
            z += 1;
        }
        out
    }

    fn run<S>(
        &self,
        node: Node,
        state: &mut S,
        visit: &impl Fn(&mut S, &[BigInt]) -> Result<()>,
    ) -> Result<()> {
        if node.level == 0 {
            if !self.exact || node.remaining.is_zero() {
                visit(state, &node.z)?;
            }
            return Ok(());
        }
        for c in self.children(&node) {
            self.run(c, state, visit)?;
        }
        Ok(())
    }
}

/// Expands the tree breadth-first to about `split_target` nodes and
/// searches the subtrees in parallel, one state per subtree, returned in
/// frontier order.
fn expand<N: Send, S: Send, E: Send>(
    root: N,
    split_target: usize,
    is_leaf: impl Fn(&N) -> bool + Sync,
    children: impl Fn(&N) -> Result<Vec<N>, E> + Sync,
    init: impl Fn() -> S + Sync,
    run: impl Fn(N, &mut S) -> Result<(), E> + Sync,
) -> Result<Vec<S>, E> {
    let mut frontier = vec![root];
    while frontier.len() < split_target && frontier.iter().any(|x| !is_leaf(x)) {
        let mut next = Vec::new();
        for node in frontier {
            if is_leaf(&node) {
                next.push(node);
            } else {
                next.extend(children(&node)?);
            }
        }
        frontier = next;
    }
    frontier
        .into_par_iter()
        .map(|node| {
            let mut state = init();
            run(node, &mut state)?;
            Ok(state)
        })
        .collect()
}

fn collect_sorted(parts: Vec<Vec<Vec<BigInt>>>) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = parts.into_iter().flatten().collect();
    out.sort();
    out
}

fn push_solution(out: &mut Vec<Vec<BigInt>>, z: &[BigInt]) -> Result<()> {
    out.push(z.to_vec());
    Ok(())
}

/// Reference enumeration in rational arithmetic, following the
/// decomposition of [`Cholesky`] directly.
pub fn fincke_pohst_rational(
    a: &IntMatrix,
    center: &[Rational],
    r: &Rational,
    exact: bool,
    split_target: usize,
) -> Result<Vec<Vec<BigInt>>> {
    visit_rational(a, center, r, exact, split_target, Vec::new, push_solution).map(collect_sorted)
}

fn visit_rational<S: Send>(
    a: &IntMatrix,
    center: &[Rational],
    r: &Rational,
    exact: bool,
    split_target: usize,
    init: impl Fn() -> S + Sync,
    visit: impl Fn(&mut S, &[BigInt]) -> Result<()> + Sync,
) -> Result<Vec<S>> {
    let n = a.rows();
    if center.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: center.len(),
        });
    }
    if r.is_negative() {
        return Ok(Vec::new());
    }
    let chol = Cholesky::new(a)?;
    let search = Search {
        chol: &chol,
        center,
        exact,
    };
    let root = Node {
        level: n,
        z: vec![BigInt::zero(); n],
        remaining: r.clone(),
    };
    expand(
        root,
        split_target,
        |x| x.level == 0,
        |x| Ok::<_, Error>(search.children(x)),
        init,
        |x, st| search.run(x, st, &visit),
    )
}

/// Integral Gram–Schmidt data: `d[k]` is the `k`-th leading principal minor
/// and `lam[i][j] = d[j+1]·μ_ij` for `i > j`.
fn integral_gram_schmidt(a: &IntMatrix) -> Result<(Vec<BigInt>, Vec<Vec<BigInt>>)> {
    let n = a.rows();
    let mut d = vec![BigInt::one(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n]; n];
    for k in 0..n {
        for j in 0..=k {
            let mut u = a[(k, j)].clone();
            for i in 0..j {
                u = (&d[i + 1] * &u - &lam[k][i] * &lam[j][i]) / &d[i];
            }
            if j < k {
                lam[k][j] = u;
            } else {
                if !u.is_positive() {
                    return Err(Error::NotDefinite);
                }
                d[k + 1] = u;
            }
        }
    }
    Ok((d, lam))
}

/// Marker for leaving the 128-bit range.
enum Abort {
    Overflow,
    Visit(Error),
}

/// Fraction-free form of the search. With `D` a common denominator of the
/// center and of `D²·r`, the coordinate of a vector along the `j`-th
/// Gram–Schmidt direction is `Y_j / (D·d[j+1])` with `Y_j` integral, and
/// `T_j = D²·d[j]·(norm of the projection away from b_0..b_{j-1})` obeys
/// `T_j = (d[j]·T_{j+1} + Y_j²) / d[j+1]` with exact division.
struct IntSearch {
    d: Vec<i128>,
    lam: Vec<Vec<i128>>,
    /// `D·c_i`.
    dc: Vec<i128>,
    denom: i128,
    /// `D²·r`.
    target: i128,
    exact: bool,
    /// `d[k] = 2^shift[k]·odd[k]` and `inv[k]·odd[k] ≡ 1 mod 2^128`, for exact
    /// division by `d[k]`.
    shift: Vec<u32>,
    inv: Vec<i128>,
}

/// Inverse of an odd number modulo `2^128`, by Newton iteration.
fn inverse_mod_2_128(odd: i128) -> i128 {
    let mut x = odd;
    for _ in 0..7 {
        x = x.wrapping_mul(2i128.wrapping_sub(odd.wrapping_mul(x)));
    }
    x
}

/// `⌊a / b⌋` for `b > 0`, seeded like [`isqrt`] and certified exactly.
fn floor_div(a: i128, b: i128) -> i128 {
    let mut q = (a as f64 / b as f64).floor() as i128;
    while q.checked_mul(b).is_none_or(|p| p > a) {
        q -= 1;
    }
    while (q + 1).checked_mul(b).is_some_and(|p| p <= a) {
        q += 1;
    }
    q
}

/// `⌊√n⌋` for `n ≥ 0`. The float value only seeds the search; the result is
/// certified by integer comparisons.
fn isqrt(n: i128) -> i128 {
    let mut r = (n as f64).sqrt() as i128;
    while r > 0 && r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

#[derive(Clone, Debug)]
struct IntNode {
    level: usize,
    z: Vec<i128>,
    /// `D·(z_i − c_i)` for the assigned coordinates.
    w: Vec<i128>,
    t: i128,
}

fn big_to_i128(x: &BigInt) -> Option<i128> {
    x.to_i128()
}

impl IntSearch {
    fn new(a: &IntMatrix, center: &[Rational], r: &Rational, exact: bool) -> Result<Option<Self>> {
        let (d, lam) = integral_gram_schmidt(a)?;
        let mut denom = r.denom().clone();
        for c in center {
            denom = denom.lcm(c.denom());
        }
        let scale = Rational::from_integer(denom.clone());
        let dc: Vec<BigInt> = center.iter().map(|c| (c * &scale).to_integer()).collect();
        let target = (r * &scale * &scale).to_integer();
        let conv = || -> Option<IntSearch> {
            let d: Vec<i128> = d.iter().map(big_to_i128).collect::<Option<_>>()?;
            let shift: Vec<u32> = d.iter().map(|x| x.trailing_zeros()).collect();
            let inv = d
                .iter()
                .zip(&shift)
                .map(|(x, s)| inverse_mod_2_128(x >> s))
                .collect();
            Some(IntSearch {
                d,
                shift,
                inv,
                lam: lam
                    .iter()
                    .map(|row| row.iter().map(big_to_i128).collect::<Option<_>>())
                    .collect::<Option<_>>()?,
                dc: dc.iter().map(big_to_i128).collect::<Option<_>>()?,
                denom: big_to_i128(&denom)?,
                target: big_to_i128(&target)?,
                exact,
            })
        };
        Ok(conv())
    }

    fn children(&self, node: &IntNode) -> Result<Vec<IntNode>, Abort> {
        let j = node.level - 1;
        let n = self.d.len() - 1;
        let (dj, dj1) = (self.d[j], self.d[j + 1]);
        let mut yp = dj1
            .checked_mul(self.dc[j])
            .ok_or(Abort::Overflow)?
            .checked_neg()
            .ok_or(Abort::Overflow)?;
        for i in j + 1..n {
            let t = self.lam[i][j]
                .checked_mul(node.w[i])
                .ok_or(Abort::Overflow)?;
            yp = yp.checked_add(t).ok_or(Abort::Overflow)?;
        }
        let room = dj1
            .checked_mul(self.target)
            .ok_or(Abort::Overflow)?
            .checked_sub(node.t)
            .ok_or(Abort::Overflow)?;
        if room < 0 {
            return Ok(Vec::new());
        }
        let bound = dj.checked_mul(room).ok_or(Abort::Overflow)?;
        let r = bound.sqrt();
        let s = dj1.checked_mul(self.denom).ok_or(Abort::Overflow)?;
        let lo = -floor_div(r + yp, s);
        let hi = floor_div(r - yp, s);
        let mut out = Vec::new();
        let mut z = lo;
        while z <= hi {
            let y = s
                .checked_mul(z)
                .and_then(|v| v.checked_add(yp))
                .ok_or(Abort::Overflow)?;
            let num = dj
                .checked_mul(node.t)
                .and_then(|v| y.checked_mul(y).and_then(|y2| v.checked_add(y2)))
                .ok_or(Abort::Overflow)?;
            let t = self.exact_div(num, j + 1).ok_or(Abort::Overflow)?;
            let mut nz = node.z.clone();
            let mut nw = node.w.clone();
            nz[j] = z;
            nw[j] = self
                .denom
                .checked_mul(z)
                .and_then(|v| v.checked_sub(self.dc[j]))
                .ok_or(Abort::Overflow)?;
            out.push(IntNode {
                level: j,
                z: nz,
                w: nw,
                t,
            });
            z += 1;
        }
        Ok(out)
    }

    fn accept(&self, t: i128) -> bool {
        if self.exact {
            t == self.target
        } else {
            t <= self.target
        }
    }

    /// Depth-first search below `start`. `sums[k][j]` caches
    /// `Σ_{i≥k} lam[i][j]·w_i`; `stale[m]` is the highest index whose `w`
    /// changed since the column for level `m − 1` was refreshed, so only the
    /// rows that changed are recomputed on the way down.
    fn run<S>(
        &self,
        start: IntNode,
        state: &mut S,
        visit: &impl Fn(&mut S, &[BigInt]) -> Result<()>,
    ) -> Result<(), Abort> {
        let n = self.d.len() - 1;
        let top = start.level;
        let emit = |state: &mut S, z: &[i128]| {
            let big: Vec<BigInt> = z.iter().map(|&x| BigInt::from(x)).collect();
            visit(state, &big).map_err(Abort::Visit)
        };
        if top == 0 {
            if self.accept(start.t) {
                emit(state, &start.z)?;
            }
            return Ok(());
        }
        let (mut z, mut w) = (start.z, start.w);
        let mut t = vec![0i128; n + 1];
        t[top] = start.t;
        let mut sums = vec![vec![0i128; n]; n + 1];
        let mut stale = vec![n - 1; n + 1];
        let mut hi = vec![0i128; n];
        let mut yp = vec![0i128; n];
        let mut step = vec![0i128; n];
        self.refresh(top, &w, &mut sums, &mut stale)?;
        let mut j = top - 1;
        if j == 0 && self.exact {
            return self.exact_leaves(&t, &sums, &mut z, |z| emit(state, z));
        }
        self.init_level(j, &t, &sums, &mut z, &mut hi, &mut yp, &mut step)?;
        loop {
            if z[j] > hi[j] {
                if j + 1 == top {
                    return Ok(());
                }
                j += 1;
                z[j] += 1;
                continue;
            }
            let y = step[j]
                .checked_mul(z[j])
                .and_then(|v| v.checked_add(yp[j]))
                .ok_or(Abort::Overflow)?;
            let num = self.d[j]
                .checked_mul(t[j + 1])
                .and_then(|v| y.checked_mul(y).and_then(|y2| v.checked_add(y2)))
                .ok_or(Abort::Overflow)?;
            t[j] = self.exact_div(num, j + 1).ok_or(Abort::Overflow)?;
            if j == 0 {
                if self.accept(t[0]) {
                    emit(state, &z)?;
                }
                z[0] += 1;
                continue;
            }
            w[j] = self
                .denom
                .checked_mul(z[j])
                .and_then(|v| v.checked_sub(self.dc[j]))
                .ok_or(Abort::Overflow)?;
            self.refresh(j, &w, &mut sums, &mut stale)?;
            j -= 1;
            if j == 0 && self.exact {
                self.exact_leaves(&t, &sums, &mut z, |z| emit(state, z))?;
                j = 1;
                z[1] += 1;
                continue;
            }
            self.init_level(j, &t, &sums, &mut z, &mut hi, &mut yp, &mut step)?;
        }
    }

    /// Brings the center column of level `m − 1` up to date after `w_m`
    /// was set.
    fn refresh(
        &self,
        m: usize,
        w: &[i128],
        sums: &mut [Vec<i128>],
        stale: &mut [usize],
    ) -> Result<(), Abort> {
        let h = stale[m].max(m);
        for i in (m..=h.min(self.d.len() - 2)).rev() {
            let v = self.lam[i][m - 1]
                .checked_mul(w[i])
                .ok_or(Abort::Overflow)?;
            sums[i][m - 1] = sums[i + 1][m - 1].checked_add(v).ok_or(Abort::Overflow)?;
        }
        stale[m - 1] = stale[m - 1].max(h);
        stale[m] = m;
        Ok(())
    }

    /// In exact mode the last coordinate is solved for directly: the target
    /// is hit iff `y_0 = ±√(d[1]·target − t_1)`.
    fn exact_leaves(
        &self,
        t: &[i128],
        sums: &[Vec<i128>],
        z: &mut [i128],
        mut emit: impl FnMut(&[i128]) -> Result<(), Abort>,
    ) -> Result<(), Abort> {
        let d1 = self.d[1];
        let yp = d1
            .checked_mul(self.dc[0])
            .and_then(|v| sums[1][0].checked_sub(v))
            .ok_or(Abort::Overflow)?;
        let step = d1.checked_mul(self.denom).ok_or(Abort::Overflow)?;
        let room = d1
            .checked_mul(self.target)
            .and_then(|v| v.checked_sub(t[1]))
            .ok_or(Abort::Overflow)?;
        if room < 0 {
            return Ok(());
        }
        let r = isqrt(room);
        if r * r != room {
            return Ok(());
        }
        let ys = if r == 0 { vec![0] } else { vec![-r, r] };
        for y in ys {
            let v = y - yp;
            if v % step != 0 {
                continue;
            }
            z[0] = v / step;
            let num = y
                .checked_mul(y)
                .and_then(|y2| y2.checked_add(t[1]))
                .ok_or(Abort::Overflow)?;
            if self.exact_div(num, 1).ok_or(Abort::Overflow)? == self.target {
                emit(z)?;
            }
        }
        Ok(())
    }

    /// Sets the admissible range of `z_j` given the coordinates above it.
    #[allow(clippy::too_many_arguments)]
    fn init_level(
        &self,
        j: usize,
        t: &[i128],
        sums: &[Vec<i128>],
        z: &mut [i128],
        hi: &mut [i128],
        yp: &mut [i128],
        step: &mut [i128],
    ) -> Result<(), Abort> {
        let (dj, dj1) = (self.d[j], self.d[j + 1]);
        yp[j] = dj1
            .checked_mul(self.dc[j])
            .and_then(|v| sums[j + 1][j].checked_sub(v))
            .ok_or(Abort::Overflow)?;
        step[j] = dj1.checked_mul(self.denom).ok_or(Abort::Overflow)?;
        let room = dj1
            .checked_mul(self.target)
            .and_then(|v| v.checked_sub(t[j + 1]))
            .ok_or(Abort::Overflow)?;
        if room < 0 {
            z[j] = 1;
            hi[j] = 0;
            return Ok(());
        }
        let bound = dj.checked_mul(room).ok_or(Abort::Overflow)?;
        let r = isqrt(bound);
        z[j] = -floor_div(r + yp[j], step[j]);
        hi[j] = floor_div(r - yp[j], step[j]);
        Ok(())
    }

    /// `num / d[k]` for a quotient known to be exact; `None` if it is not.
    fn exact_div(&self, num: i128, k: usize) -> Option<i128> {
        let q = (num >> self.shift[k]).wrapping_mul(self.inv[k]);
        (q.checked_mul(self.d[k]) == Some(num)).then_some(q)
    }
}

/// All integer vectors `z` with `Q(z − c) = r` (or `≤ r` when `exact` is
/// false), where `Q` is the positive definite form with Gram matrix `a`.
///
/// The search runs in checked 128-bit integer arithmetic and falls back to
/// [`fincke_pohst_rational`] if any intermediate value leaves that range.
/// The tree is expanded breadth-first until it has about `split_target`
/// nodes, and the subtrees are searched in parallel.
pub fn fincke_pohst(
    a: &IntMatrix,
    center: &[Rational],
    r: &Rational,
    exact: bool,
    split_target: usize,
) -> Result<Vec<Vec<BigInt>>> {
    fincke_pohst_visit(a, center, r, exact, split_target, Vec::new, push_solution)
        .map(collect_sorted)
}

/// [`fincke_pohst`] without collecting: each subtree gets a fresh state from
/// `init` and `visit` sees every solution in it. The states come back in a
/// deterministic order.
pub fn fincke_pohst_visit<S: Send>(
    a: &IntMatrix,
    center: &[Rational],
    r: &Rational,
    exact: bool,
    split_target: usize,
    init: impl Fn() -> S + Sync,
    visit: impl Fn(&mut S, &[BigInt]) -> Result<()> + Sync,
) -> Result<Vec<S>> {
    let n = a.rows();
    if center.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: center.len(),
        });
    }
    if !a.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if r.is_negative() {
        return Ok(Vec::new());
    }
    let Some(search) = IntSearch::new(a, center, r, exact)? else {
        return visit_rational(a, center, r, exact, split_target, init, visit);
    };
    let root = IntNode {
        level: n,
        z: vec![0; n],
        w: vec![0; n],
        t: 0,
    };
    let result = expand(
        root,
        split_target,
        |x| x.level == 0,
        |x| search.children(x),
        &init,
        |x, st| search.run(x, st, &visit),
    );
    match result {
        Ok(v) => Ok(v),
        Err(Abort::Overflow) => visit_rational(a, center, r, exact, split_target, init, visit),
        Err(Abort::Visit(e)) => Err(e),
    }
}

fn solve_rational(a: &IntMatrix, b: &[Rational]) -> Result<Vec<Rational>> {
    let n = a.rows();
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = (0..n)
                .map(|j| Rational::from_integer(a[(i, j)].clone()))
                .collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .find(|&r| !m[r][c].is_zero())
            .ok_or(Error::DivisionByZero)?;
        m.swap(c, p);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        let pivot = m[c].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == c || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot) {
                *x -= &f * y;
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n].clone()).collect())
}

fn row_times(v: &[BigInt], m: &IntMatrix) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); m.cols()];
    for (i, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (o, y) in out.iter_mut().zip(m.row(i)) {
            *o += x * y;
        }
    }
    out
}

fn dot(x: &[BigInt], y: &[BigInt]) -> BigInt {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// The orthogonal complement `Λ` of the canonical class, prepared for
/// coset enumeration.
#[derive(Clone, Debug)]
pub struct CanonicalComplement {
    /// The canonical class in lattice coordinates.
    pub k: Vec<BigInt>,
    pub k_square: BigInt,
    /// `x ↦ x·K` as a coordinate vector.
    pub functional: Vec<BigInt>,
    /// Generator of the image of the functional.
    pub gcd: BigInt,
    /// A vector with `v·K = gcd`.
    pub unit: Vec<BigInt>,
    /// Basis of `Λ` (rows, lattice coordinates).
    pub basis: IntMatrix,
    /// Gram matrix of `−Λ` on `basis`.
    pub gram: IntMatrix,
}

impl CanonicalComplement {
    pub fn new(pic: &PicardLattice, k: &[BigInt], options: EnumerationOptions) -> Result<Self> {
        let n = pic.rank();
        if k.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: k.len(),
            });
        }
        let functional = row_times(k, &pic.gram64);
        let k_square = dot(&functional, k);
        if !k_square.is_positive() {
            return Err(Error::Precondition(
                "the canonical class must have positive square".into(),
            ));
        }
        let column = IntMatrix::with_width(
            &functional
                .iter()
                .map(|x| vec![x.clone()])
                .collect::<Vec<_>>(),
            1,
        );
        let s = snf(&column);
        let gcd = s.factors[0].clone();
        if gcd.is_zero() {
            return Err(Error::ZeroVector);
        }
        // U·f·V = (g, 0, …) with V = ±1
        let mut unit = s.u.row(0).to_vec();
        if s.v[(0, 0)].is_negative() {
            unit.iter_mut().for_each(|x| *x = -&*x);
        }
        if dot(&unit, &functional) != gcd {
            return Err(Error::Inconsistent(
                "coset representative has the wrong degree".into(),
            ));
        }
        let mut basis = kernel_basis(&column);
        let neg = |g: IntMatrix| {
            let rows: Vec<Vec<BigInt>> = g
                .row_vecs()
                .into_iter()
                .map(|r| r.into_iter().map(|x| -x).collect())
                .collect();
            IntMatrix::with_width(&rows, g.cols())
        };
        let mut gram = neg(basis.mul(&pic.gram64).mul(&basis.transpose()));
        if options.reduce {
            let (reduced, h) = lll_reduce_with(&gram, 99, 100)?;
            basis = h.mul(&basis);
            gram = reduced;
        }
        Ok(CanonicalComplement {
            k: k.to_vec(),
            k_square,
            functional,
            gcd,
            unit,
            basis,
            gram,
        })
    }

    pub fn degree(&self, x: &[BigInt]) -> BigInt {
        dot(x, &self.functional)
    }
}

/// The query as a problem in `Λ`: a vector `x0` with `x0·K = d`, the
/// center and squared radius such that the solutions are
/// `x0 + Σ z_i b_i` with `−(Σ (z_i − c_i) b_i)² = r`. `None` when the
/// radius is negative.
pub fn coset_problem(
    q: ClassQuery,
    pic: &PicardLattice,
    comp: &CanonicalComplement,
) -> Result<Option<(Vec<BigInt>, Vec<Rational>, Rational)>> {
    let d = BigInt::from(q.dot_with_k);
    if !d.is_multiple_of(&comp.gcd) {
        return Err(Error::NoCoset {
            target: d.to_string(),
        });
    }
    let scale = &d / &comp.gcd;
    let x0: Vec<BigInt> = comp.unit.iter().map(|x| x * &scale).collect();
    let k2 = Rational::from_integer(comp.k_square.clone());
    let dq = Rational::from_integer(d.clone());
    // x = (d/K²)·K + y with y ∈ Λ⊗Q and −y² = d²/K² − n
    let radius = &dq * &dq / &k2 - Rational::from_integer(BigInt::from(q.self_int));
    if radius.is_negative() {
        return Ok(None);
    }
    let t = &dq / &k2;
    let y0: Vec<Rational> = x0
        .iter()
        .zip(&comp.k)
        .map(|(x, k)| Rational::from_integer(x.clone()) - &t * Rational::from_integer(k.clone()))
        .collect();
    // coordinates s of y0 in the basis of Λ: −gram·s = B·G·y0
    let bg = comp.basis.mul(&pic.gram64);
    let rhs: Vec<Rational> = (0..bg.rows())
        .map(|i| {
            -bg.row(i)
                .iter()
                .zip(&y0)
                .map(|(a, y)| Rational::from_integer(a.clone()) * y)
                .sum::<Rational>()
        })
        .collect();
    let s = solve_rational(&comp.gram, &rhs)?;
    for (c, y) in y0.iter().enumerate() {
        let back: Rational = (0..comp.basis.rows())
            .map(|i| &s[i] * Rational::from_integer(comp.basis[(i, c)].clone()))
            .sum();
        if &back != y {
            return Err(Error::Inconsistent(
                "projection is not in the span of the complement".into(),
            ));
        }
    }
    // y0 + Σ z_i b_i = Σ (z_i − c_i) b_i with c = −s
    let center: Vec<Rational> = s.iter().map(|x| -x).collect();
    Ok(Some((x0, center, radius)))
}

/// Classes of the catalog curves in lattice coordinates, with the pairing of
/// every basis vector against every curve.
#[derive(Clone, Debug)]
pub struct CurveClasses {
    pub classes: Vec<Vec<BigInt>>,
    /// `pairings[i][c]` is the pairing of basis vector `i` with curve `c`.
    pairings: Vec<Vec<i64>>,
}

impl CurveClasses {
    pub fn new(pic: &PicardLattice) -> Result<Self> {
        let classes = pic.coords.row_vecs();
        let p = pic.gram64.mul(&pic.coords.transpose());
        let pairings = p
            .to_i64()
            .ok_or_else(|| Error::Inconsistent("pairings exceed 64 bits".into()))?;
        Ok(CurveClasses { classes, pairings })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn pair_with_curve(&self, x: &[BigInt], c: usize) -> BigInt {
        x.iter()
            .zip(&self.pairings)
            .filter(|(v, _)| !v.is_zero())
            .map(|(v, row)| v * row[c])
            .sum()
    }

    /// True when `x` meets every curve other than itself nonnegatively.
    pub fn is_nef_on_curves(&self, x: &[BigInt]) -> bool {
        (0..self.len()).all(|c| self.classes[c] == x || !self.pair_with_curve(x, c).is_negative())
    }
}

/// Keeps the classes meeting every catalog curve other than themselves
/// nonnegatively.
pub fn positivity_filter(vectors: &[Vec<BigInt>], curves: &CurveClasses) -> Vec<Vec<BigInt>> {
    vectors
        .par_iter()
        .filter(|x| curves.is_nef_on_curves(x))
        .cloned()
        .collect()
}

/// Machine-word copies of everything a candidate is checked against.
struct SmallData {
    x0: Vec<i64>,
    basis: Vec<Vec<i64>>,
    gram: Vec<Vec<i64>>,
    functional: Vec<i64>,
    /// `pairings[c][i]`: curve `c` against basis vector `i`.
    pairings: Vec<Vec<i64>>,
    classes: Vec<Vec<i64>>,
}

/// Largest coordinate for which the pairings below cannot overflow.
const SMALL_COORD: i64 = 1 << 12;

impl SmallData {
    fn new(
        x0: &[BigInt],
        comp: &CanonicalComplement,
        pic: &PicardLattice,
        curves: &CurveClasses,
    ) -> Option<Self> {
        let v = |x: &[BigInt]| {
            x.iter()
                .map(ToPrimitive::to_i64)
                .collect::<Option<Vec<i64>>>()
        };
        let gram = pic.gram64.to_i64()?;
        let functional = v(&comp.functional)?;
        let n = curves.pairings.first().map_or(0, Vec::len);
        let pairings: Vec<Vec<i64>> = (0..n)
            .map(|c| curves.pairings.iter().map(|row| row[c]).collect())
            .collect();
        let bound = gram
            .iter()
            .chain(&pairings)
            .chain(std::iter::once(&functional))
            .flatten()
            .map(|x| x.checked_abs())
            .try_fold(0i64, |m, x| x.map(|x| m.max(x)))?;
        let dim = x0.len() as i64;
        // |x·y| ≤ dim·SMALL_COORD·bound and |x·G·x| ≤ dim²·SMALL_COORD²·bound
        dim.checked_mul(dim)?
            .checked_mul(SMALL_COORD)?
            .checked_mul(SMALL_COORD)?
            .checked_mul(bound.max(1))?;
        Some(SmallData {
            x0: v(x0)?,
            basis: comp.basis.to_i64()?,
            gram,
            functional,
            pairings,
            classes: curves.classes.iter().map(|c| v(c)).collect::<Option<_>>()?,
        })
    }

    /// `x0 + z·basis`, if every coordinate is small.
    fn lift(&self, z: &[BigInt]) -> Option<Vec<i64>> {
        let mut x = self.x0.clone();
        for (zi, row) in z.iter().zip(&self.basis) {
            if zi.is_zero() {
                continue;
            }
            let zi = zi.to_i64()?;
            for (xc, b) in x.iter_mut().zip(row) {
                *xc = xc.checked_add(zi.checked_mul(*b)?)?;
            }
        }
        x.iter().all(|c| c.abs() <= SMALL_COORD).then_some(x)
    }

    fn degree_and_square(&self, x: &[i64]) -> (i64, i64) {
        let deg = x.iter().zip(&self.functional).map(|(a, b)| a * b).sum();
        let mut sq = 0;
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0 {
                sq += xi * self.gram[i].iter().zip(x).map(|(g, y)| g * y).sum::<i64>();
            }
        }
        (deg, sq)
    }

    fn is_nef_on_curves(&self, x: &[i64]) -> bool {
        self.pairings
            .iter()
            .zip(&self.classes)
            .all(|(p, class)| p.iter().zip(x).map(|(a, b)| a * b).sum::<i64>() >= 0 || class == x)
    }
}

/// Per-subtree tally of [`enumerate_classes`].
#[derive(Default)]
struct Tally {
    count: usize,
    kept: Vec<Vec<BigInt>>,
    survivors: Vec<Vec<BigInt>>,
}

/// All classes answering the query, each checked exactly against the query,
/// together with those passing the positivity filter against `curves`.
pub fn enumerate_classes(
    q: ClassQuery,
    pic: &PicardLattice,
    comp: &CanonicalComplement,
    curves: &CurveClasses,
    options: EnumerationOptions,
) -> Result<CandidateSet> {
    let Some((x0, center, radius)) = coset_problem(q, pic, comp)? else {
        return Ok(CandidateSet {
            query: q,
            count: 0,
            vectors: Some(Vec::new()),
            survivors: Vec::new(),
        });
    };
    let d = BigInt::from(q.dot_with_k);
    let n = BigInt::from(q.self_int);
    let small = SmallData::new(&x0, comp, pic, curves);
    let seen = AtomicUsize::new(0);
    let wrong = || Error::Inconsistent("enumerated vector does not answer the query".into());
    let visit = |t: &mut Tally, z: &[BigInt]| -> Result<()> {
        t.count += 1;
        let keep = seen.fetch_add(1, Ordering::Relaxed) < options.keep_limit;
        if !keep {
            t.kept = Vec::new();
        }
        if let Some((s, x)) = small.as_ref().and_then(|s| s.lift(z).map(|x| (s, x))) {
            if s.degree_and_square(&x) != (q.dot_with_k, q.self_int) {
                return Err(wrong());
            }
            let nef = s.is_nef_on_curves(&x);
            if nef || keep {
                let big: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
                if nef {
                    t.survivors.push(big.clone());
                }
                if keep {
                    t.kept.push(big);
                }
            }
            return Ok(());
        }
        let mut x = x0.clone();
        for (zi, row) in z.iter().zip(comp.basis.row_vecs()) {
            if !zi.is_zero() {
                for (xc, b) in x.iter_mut().zip(row) {
                    *xc += zi * b;
                }
            }
        }
        if comp.degree(&x) != d || pic.pair(&x, &x) != n {
            return Err(wrong());
        }
        if curves.is_nef_on_curves(&x) {
            t.survivors.push(x.clone());
        }
        if keep {
            t.kept.push(x);
        }
        Ok(())
    };
    let tallies = fincke_pohst_visit(
        &comp.gram,
        &center,
        &radius,
        true,
        options.split_target,
        Tally::default,
        visit,
    )?;
    let count = tallies.iter().map(|t| t.count).sum();
    let vectors = (count <= options.keep_limit)
        .then(|| collect_sorted(tallies.iter().map(|t| t.kept.clone()).collect()));
    let survivors = collect_sorted(tallies.into_iter().map(|t| t.survivors).collect());
    Ok(CandidateSet {
        query: q,
        count,
        vectors,
        survivors,
    })
}

/// One clause of the classification of low-degree curves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseResult {
    pub name: String,
    pub query: ClassQuery,
    pub candidates: usize,
    pub survivors: usize,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

fn sorted_classes(
    catalog: &Catalog,
    curves: &CurveClasses,
    pred: impl Fn(CurveKind) -> bool,
) -> Vec<Vec<BigInt>> {
    let mut v: Vec<Vec<BigInt>> = catalog
        .curves
        .iter()
        .filter(|c| pred(c.kind))
        .map(|c| curves.classes[c.id].clone())
        .collect();
    v.sort();
    v.dedup();
    v
}

/// Runs the queries for `(-2)`-classes, conics, rational quartics and
/// genus-one quartics and compares the survivors with the catalog.
pub fn classification_report(
    catalog: &Catalog,
    pic: &PicardLattice,
    k: &[BigInt],
    options: EnumerationOptions,
) -> Result<Vec<ClauseResult>> {
    let comp = CanonicalComplement::new(pic, k, options)?;
    let curves = CurveClasses::new(pic)?;
    let run = |q: ClassQuery| enumerate_classes(q, pic, &comp, &curves, options);
    let mut out = Vec::new();

    let roots = run(ClassQuery::new(0, -2))?;
    let exceptional = sorted_classes(catalog, &curves, |k| k == CurveKind::Exceptional);
    let listed = roots.vectors.as_deref().unwrap_or_default();
    let contains_all = exceptional.iter().all(|e| {
        let neg: Vec<BigInt> = e.iter().map(|x| -x).collect();
        listed.binary_search(e).is_ok() && listed.binary_search(&neg).is_ok()
    });
    out.push(ClauseResult {
        name: "(-2)-classes orthogonal to K".into(),
        query: roots.query,
        candidates: roots.count,
        survivors: roots.survivors.len(),
        expected: "contains ±E for all 48 exceptional curves".into(),
        computed: format!(
            "{} classes, exceptional pairs present: {contains_all}",
            roots.count
        ),
        pass: contains_all,
    });

    let conics = run(ClassQuery::new(2, -4))?;
    let known = sorted_classes(catalog, &curves, |k| k == CurveKind::Conic);
    out.push(ClauseResult {
        name: "conics".into(),
        query: conics.query,
        candidates: conics.count,
        survivors: conics.survivors.len(),
        expected: format!(
            "2048 candidates, survivors = the {} catalog conics",
            known.len()
        ),
        computed: format!(
            "{} candidates, {} survivors",
            conics.count,
            conics.survivors.len()
        ),
        pass: conics.count == 2048 && conics.survivors == known,
    });

    let rational = run(ClassQuery::new(4, -6))?;
    out.push(ClauseResult {
        name: "rational quartics".into(),
        query: rational.query,
        candidates: rational.count,
        survivors: rational.survivors.len(),
        expected: "0 survivors".into(),
        computed: format!(
            "{} candidates, {} survivors",
            rational.count,
            rational.survivors.len()
        ),
        pass: rational.survivors.is_empty(),
    });

    let elliptic = run(ClassQuery::new(4, -4))?;
    let known = sorted_classes(catalog, &curves, |k| {
        matches!(k, CurveKind::GenusOneB | CurveKind::GenusOneAA)
    });
    out.push(ClauseResult {
        name: "genus-one quartics".into(),
        query: elliptic.query,
        candidates: elliptic.count,
        survivors: elliptic.survivors.len(),
        expected: format!("survivors = the {} catalog genus-one curves", known.len()),
        computed: format!(
            "{} candidates, {} survivors",
            elliptic.count,
            elliptic.survivors.len()
        ),
        pass: elliptic.survivors == known,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ratio;
    use crate::lattice::lll_reduce;
    use proptest::prelude::*;

    fn brute_force(
        a: &IntMatrix,
        center: &[Rational],
        r: &Rational,
        exact: bool,
        bound: i64,
    ) -> Vec<Vec<BigInt>> {
        let n = a.rows();
        let mut out = Vec::new();
        let mut z = vec![-bound; n];
        loop {
            let w: Vec<Rational> = z
                .iter()
                .zip(center)
                .map(|(x, c)| Rational::from_integer(BigInt::from(*x)) - c)
                .collect();
            let mut val = Rational::zero();
            for i in 0..n {
                for j in 0..n {
                    val += &w[i] * &w[j] * Rational::from_integer(a[(i, j)].clone());
                }
            }
            if (exact && val == *r) || (!exact && val <= *r) {
                out.push(z.iter().map(|&x| BigInt::from(x)).collect());
            }
            let mut k = 0;
            while k < n && z[k] == bound {
                z[k] = -bound;
                k += 1;
            }
            if k == n {
                break;
            }
            z[k] += 1;
        }
        out.sort();
        out
    }

    #[test]
    fn integer_ranges() {
        assert_eq!(
            integer_range(&ratio(1, 2), &ratio(9, 4)),
            Some((BigInt::from(-1), BigInt::from(2)))
        );
        assert_eq!(integer_range(&ratio(1, 2), &ratio(1, 8)), None);
        assert_eq!(
            integer_range(&Rational::zero(), &Rational::zero()),
            Some((BigInt::zero(), BigInt::zero()))
        );
    }

    #[test]
    fn roots_of_a2() {
        let a = IntMatrix::from_i64(&[vec![2, -1], vec![-1, 2]]);
        let v = fincke_pohst(
            &a,
            &[Rational::zero(), Rational::zero()],
            &Rational::from_integer(2.into()),
            true,
            4,
        )
        .unwrap();
        assert_eq!(v.len(), 6);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = IntMatrix::from_i64(&[vec![1, 2], vec![2, 1]]);
        assert_eq!(Cholesky::new(&a).unwrap_err(), Error::NotDefinite);
    }

    fn definite_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..=4).prop_flat_map(|n| {
            proptest::collection::vec(-2i64..=2, n * n).prop_map(move |e| {
                // BᵀB + I is positive definite
                let b = IntMatrix::from_i64(&e.chunks(n).map(<[i64]>::to_vec).collect::<Vec<_>>());
                let mut g = b.transpose().mul(&b);
                for i in 0..n {
                    g[(i, i)] += 1;
                }
                g
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn fincke_pohst_matches_brute_force(
            a in definite_matrix(),
            c in proptest::collection::vec(-3i64..=3, 4),
            r in 0i64..6,
            exact in any::<bool>(),
        ) {
            let n = a.rows();
            let center: Vec<Rational> = c[..n].iter().map(|&x| ratio(x, 2)).collect();
            let r = Rational::from_integer(r.into());
            // λ_min ≥ 1, so every solution has |z_i − c_i| ≤ √r < 3
            let expected = brute_force(&a, &center, &r, exact, 5);
            prop_assert_eq!(fincke_pohst(&a, &center, &r, exact, 3).unwrap(), expected.clone());
            let (red, h) = lll_reduce(&a).unwrap();
            // searching the reduced basis and mapping back gives the same set
            let hinv_center: Vec<Rational> = {
                // center in the new basis: c' with c'·H = c
                let ht = h.transpose();
                solve_rational(&ht, &center).unwrap()
            };
            let mut back: Vec<Vec<BigInt>> = fincke_pohst(&red, &hinv_center, &r, exact, 1)
                .unwrap()
                .into_iter()
                .map(|z| row_times(&z, &h))
                .collect();
            back.sort();
            prop_assert_eq!(back, expected);
        }
    }

    #[test]
    fn rank_six_brute_force() {
        // diagonally dominant, so the smallest eigenvalue is at least 1
        let mut rows = vec![vec![0i64; 6]; 6];
        for i in 0..6 {
            rows[i][i] = 3;
            if i + 1 < 6 {
                rows[i][i + 1] = -1;
                rows[i + 1][i] = -1;
            }
        }
        let a = IntMatrix::from_i64(&rows);
        let center: Vec<Rational> = (0..6).map(|i| ratio(i % 2, 2)).collect();
        for r in 1..4 {
            let r = Rational::from_integer(r.into());
            assert_eq!(
                fincke_pohst(&a, &center, &r, false, 8).unwrap(),
                brute_force(&a, &center, &r, false, 3)
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn integer_and_rational_engines_agree(
            a in definite_matrix(),
            c in proptest::collection::vec(-5i64..=5, 4),
            r in 0i64..8,
            exact in any::<bool>(),
            split in 1usize..20,
        ) {
            let n = a.rows();
            let center: Vec<Rational> = c[..n].iter().map(|&x| ratio(x, 3)).collect();
            let r = Rational::from_integer(r.into());
            prop_assert_eq!(
                fincke_pohst(&a, &center, &r, exact, split).unwrap(),
                fincke_pohst_rational(&a, &center, &r, exact, split).unwrap()
            );
        }
    }

    #[test]
    fn huge_entries_fall_back_to_rationals() {
        let big = BigInt::from(10u64).pow(20);
        let a = IntMatrix::from_rows(&[
            vec![big.clone(), BigInt::one()],
            vec![BigInt::one(), big.clone()],
        ]);
        let center = vec![Rational::zero(); 2];
        let r = Rational::from_integer(big);
        let found = fincke_pohst(&a, &center, &r, false, 4).unwrap();
        let v = |x: i64, y: i64| vec![BigInt::from(x), BigInt::from(y)];
        assert_eq!(found, vec![v(-1, 0), v(0, -1), v(0, 0), v(0, 1), v(1, 0)]);
        assert_eq!(
            found,
            fincke_pohst_rational(&a, &center, &r, false, 4).unwrap()
        );
    }

    #[test]
    fn visitor_states_are_deterministic() {
        let a = IntMatrix::from_i64(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]);
        let center = vec![ratio(1, 2), Rational::zero(), ratio(-1, 3)];
        let r = Rational::from_integer(6.into());
        let run = |split| {
            fincke_pohst_visit(
                &a,
                &center,
                &r,
                false,
                split,
                Vec::new,
                |s: &mut Vec<Vec<BigInt>>, z: &[BigInt]| {
                    s.push(z.to_vec());
                    Ok(())
                },
            )
            .unwrap()
        };
        let all = fincke_pohst(&a, &center, &r, false, 1).unwrap();
        for split in [1, 5, 50] {
            let states = run(split);
            assert_eq!(states, run(split));
            let mut merged: Vec<Vec<BigInt>> = states.into_iter().flatten().collect();
            merged.sort();
            assert_eq!(merged, all);
        }
    }

    #[test]
    fn visitor_errors_propagate() {
        let a = IntMatrix::from_i64(&[vec![1, 0], vec![0, 1]]);
        let center = vec![Rational::zero(); 2];
        let err = fincke_pohst_visit(
            &a,
            &center,
            &Rational::one(),
            true,
            2,
            || (),
            |_, _| Err(Error::ZeroVector),
        );
        assert_eq!(err.unwrap_err(), Error::ZeroVector);
    }

    /// Classes `e0, e1, e2, e3` with `e0² = 2`, `ei² = −2` and `K = e0`.
    fn toy_lattice() -> (PicardLattice, Vec<BigInt>) {
        let g = IntMatrix::from_i64(&[
            vec![2, 0, 0, 0],
            vec![0, -2, 0, 0],
            vec![0, 0, -2, 0],
            vec![0, 0, 0, -2],
        ]);
        let pic = crate::lattice::build_picard_lattice(&g, 4).unwrap();
        let k = pic.to_basis(&[1, 0, 0, 0]);
        (pic, k)
    }

    fn toy_oracle(
        pic: &PicardLattice,
        k: &[BigInt],
        q: ClassQuery,
    ) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
        let mut all = Vec::new();
        let mut z = [-3i64; 4];
        loop {
            let x: Vec<BigInt> = z.iter().map(|&c| BigInt::from(c)).collect();
            if pic.pair(&x, k) == BigInt::from(q.dot_with_k)
                && pic.pair(&x, &x) == BigInt::from(q.self_int)
            {
                all.push(x);
            }
            let mut i = 0;
            while i < 4 && z[i] == 3 {
                z[i] = -3;
                i += 1;
            }
            if i == 4 {
                break;
            }
            z[i] += 1;
        }
        all.sort();
        let nef = all
            .iter()
            .filter(|x| {
                (0..4).all(|c| {
                    pic.coords.row(c) == x.as_slice()
                        || !pic.pair(x, pic.coords.row(c)).is_negative()
                })
            })
            .cloned()
            .collect();
        (all, nef)
    }

    #[test]
    fn toy_classes_match_the_box_search() {
        let (pic, k) = toy_lattice();
        let curves = CurveClasses::new(&pic).unwrap();
        for reduce in [true, false] {
            let options = EnumerationOptions {
                reduce,
                ..EnumerationOptions::default()
            };
            let comp = CanonicalComplement::new(&pic, &k, options).unwrap();
            for (d, n) in [(0, -2), (2, -4), (2, -2), (4, -6), (4, -4)] {
                let q = ClassQuery::new(d, n);
                let (all, nef) = toy_oracle(&pic, &k, q);
                let got = enumerate_classes(q, &pic, &comp, &curves, options).unwrap();
                assert_eq!(got.count, all.len(), "{q:?}");
                assert_eq!(got.vectors.as_deref(), Some(all.as_slice()), "{q:?}");
                assert_eq!(got.survivors, nef, "{q:?}");
            }
        }
        let options = EnumerationOptions::default();
        let comp = CanonicalComplement::new(&pic, &k, options).unwrap();
        let q = ClassQuery::new(2, -4);
        let got = enumerate_classes(q, &pic, &comp, &curves, options).unwrap();
        assert_eq!(got.count, 8);
        assert_eq!(got.survivors.len(), 1);
        assert_eq!(
            got.survivors,
            positivity_filter(got.vectors.as_deref().unwrap(), &curves)
        );
    }

    #[test]
    fn keep_limit_drops_only_the_listing() {
        let (pic, k) = toy_lattice();
        let curves = CurveClasses::new(&pic).unwrap();
        let full = EnumerationOptions::default();
        let capped = EnumerationOptions {
            keep_limit: 3,
            split_target: 2,
            ..full
        };
        let comp = CanonicalComplement::new(&pic, &k, full).unwrap();
        let q = ClassQuery::new(2, -4);
        let a = enumerate_classes(q, &pic, &comp, &curves, full).unwrap();
        let b = enumerate_classes(q, &pic, &comp, &curves, capped).unwrap();
        assert_eq!(b.vectors, None);
        assert_eq!((a.count, &a.survivors), (b.count, &b.survivors));
    }

    #[test]
    fn negative_radius_is_empty() {
        let (pic, k) = toy_lattice();
        let curves = CurveClasses::new(&pic).unwrap();
        let options = EnumerationOptions::default();
        let comp = CanonicalComplement::new(&pic, &k, options).unwrap();
        let got = enumerate_classes(ClassQuery::new(2, 10), &pic, &comp, &curves, options).unwrap();
        assert_eq!(
            (got.count, got.vectors, got.survivors.len()),
            (0, Some(vec![]), 0)
        );
        assert!(matches!(
            enumerate_classes(ClassQuery::new(1, 0), &pic, &comp, &curves, options),
            Err(Error::NoCoset { .. })
        ));
    }
}
