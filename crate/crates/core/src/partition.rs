//! Equipartitions: partitions of `0..n` into `k` nonempty classes whose
//! sizes differ by at most one.
//!
//! Class sizes are always the true `|V_i|`; nothing here assumes `k | n`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng;

/// Default ground-set bound for exhaustive enumeration.
pub const ENUMERATION_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartitionJson", into = "PartitionJson")]
pub struct Equipartition {
    class_of: Vec<usize>,
    sizes: Vec<usize>,
}

impl Equipartition {
    /// Validates `class_of` against `k` classes.
    pub fn new(class_of: Vec<usize>, k: usize) -> Result<Self> {
        let n = class_of.len();
        if k == 0 || k > n {
            return invalid(format!("cannot split {n} vertices into {k} classes"));
        }
        let mut sizes = vec![0usize; k];
        for (v, &c) in class_of.iter().enumerate() {
            if c >= k {
                return invalid(format!("vertex {v} has class {c}, expected < {k}"));
            }
            sizes[c] += 1;
        }
        let (lo, hi) = (sizes.iter().min().copied(), sizes.iter().max().copied());
        match (lo, hi) {
            (Some(lo), Some(hi)) if lo >= 1 && hi - lo <= 1 => Ok(Self { class_of, sizes }),
            _ => invalid(format!("class sizes {sizes:?} are not equitable")),
        }
    }

    /// The trivial partition with a single class.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![0; n], 1)
    }

    pub fn n(&self) -> usize {
        self.class_of.len()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    #[inline]
    pub fn class_of(&self, v: usize) -> usize {
        self.class_of[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.class_of
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Members of each class in increasing vertex order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k()];
        for (v, &c) in self.class_of.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    /// Relabels so that classes appear in order of their smallest vertex.
    pub fn canonical(&self) -> Self {
        let mut map = vec![usize::MAX; self.k()];
        let mut next = 0;
        let class_of = self
            .class_of
            .iter()
            .map(|&c| {
                if map[c] == usize::MAX {
                    map[c] = next;
                    next += 1;
                }
                map[c]
            })
            .collect();
        let mut sizes = vec![0; self.k()];
        for (old, &new) in map.iter().enumerate() {
            sizes[new] = self.sizes[old];
        }
        Self { class_of, sizes }
    }

    /// Refines by `marks`, then restores equitability.
    ///
    /// Cells `(class, mark)` that are nonempty become the new classes,
    /// ordered by `(class, mark)`. With `k'` cells, the `n mod k'` largest
    /// cells (ties to the lower index) are allowed `ceil(n/k')` vertices and
    /// the rest `floor(n/k')`. Surplus vertices are released lowest index
    /// first and handed to deficit classes in class-index order. This moves
    /// the minimum possible number of vertices.
    pub fn split_classes(&self, marks: &[usize]) -> Result<Self> {
        let n = self.n();
        if marks.len() != n {
            return invalid(format!("{} marks for {n} vertices", marks.len()));
        }
        let mut cells: Vec<(usize, usize)> =
            self.class_of.iter().copied().zip(marks.iter().copied()).collect();
        cells.sort_unstable();
        cells.dedup();
        let cell_index = |c: usize, m: usize| cells.binary_search(&(c, m)).expect("cell exists");
        let k = cells.len();
        let mut class_of: Vec<usize> = (0..n).map(|v| cell_index(self.class_of[v], marks[v])).collect();

        let mut sizes = vec![0usize; k];
        for &c in &class_of {
            sizes[c] += 1;
        }
        let (q, r) = (n / k, n % k);
        let mut by_size: Vec<usize> = (0..k).collect();
        by_size.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
        let mut target = vec![q; k];
        for &c in by_size.iter().take(r) {
            target[c] = q + 1;
        }

        let mut surplus = vec![0usize; k];
        for c in 0..k {
            surplus[c] = sizes[c].saturating_sub(target[c]);
        }
        let mut pool = Vec::new();
        for (v, &c) in class_of.iter().enumerate() {
            if surplus[c] > 0 {
                surplus[c] -= 1;
                pool.push(v);
            }
        }
        let mut pool = pool.into_iter();
        for c in 0..k {
            while sizes[c] < target[c] {
                let v = pool.next().expect("surplus matches deficit");
                sizes[class_of[v]] -= 1;
                class_of[v] = c;
                sizes[c] += 1;
            }
        }
        debug_assert!(pool.next().is_none());
        Self::new(class_of, k)
    }

    pub fn to_text(&self) -> String {
        let body: Vec<String> = self.class_of.iter().map(ToString::to_string).collect();
        format!("{} {}\n{}\n", self.n(), self.k(), body.join(" "))
    }

    /// Parses `n k` followed by `n` whitespace-separated class indices.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));
        let mut next = |what: &str| -> Result<(usize, usize)> {
            let (line, tok) = tokens.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("missing {what}"),
            })?;
            tok.parse::<usize>().map(|x| (line, x)).map_err(|_| Error::Parse {
                line,
                msg: format!("expected {what}, found {tok:?}"),
            })
        };
        let (_, n) = next("vertex count")?;
        let (line, k) = next("class count")?;
        let class_of = (0..n)
            .map(|_| next("class index").map(|(_, c)| c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(class_of, k).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })
    }
}

/// Uniform over all equitable assignments into exactly `k` classes.
///
/// A uniform shuffle is cut into consecutive blocks (larger blocks first),
/// and every unlabeled equipartition is produced by the same number of
/// shuffles.
pub fn random_equipartition(n: usize, k: usize, seed: u64) -> Result<Equipartition> {
    if k == 0 || k > n {
        return invalid(format!("cannot split {n} vertices into {k} classes"));
    }
    let mut rng = rng::from_seed(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut class_of = vec![0; n];
    let mut pos = 0;
    for (c, size) in class_sizes(n, k).into_iter().enumerate() {
        for &v in &order[pos..pos + size] {
            class_of[v] = c;
        }
        pos += size;
    }
    Equipartition::new(class_of, k)
}

/// The equitable size sequence for `n` into `k`, larger classes first.
pub fn class_sizes(n: usize, k: usize) -> Vec<usize> {
    let (q, r) = (n / k, n % k);
    (0..k).map(|c| if c < r { q + 1 } else { q }).collect()
}

/// Every equipartition of `0..n` into exactly `k` unlabeled classes, once
/// each, with classes labeled by first appearance.
pub fn enumerate_equipartitions(n: usize, k: usize) -> Result<Equipartitions> {
    enumerate_equipartitions_capped(n, k, ENUMERATION_CAP)
}

pub fn enumerate_equipartitions_capped(n: usize, k: usize, cap: usize) -> Result<Equipartitions> {
    if n > cap {
        return Err(Error::CapExceeded {
            what: "ground set for equipartition enumeration",
            value: n as u128,
            cap: cap as u128,
        });
    }
    if k == 0 || k > n {
        return invalid(format!("cannot split {n} vertices into {k} classes"));
    }
    Ok(Equipartitions {
        n,
        k,
        q: n / k,
        r: n % k,
        assign: vec![0; n],
        next_try: vec![0; n + 1],
        sizes: vec![0; k],
        opened: 0,
        big: 0,
        pos: 0,
        done: false,
    })
}

/// Number of equipartitions of `n` into `k` unlabeled classes:
/// `n! / (prod s_i! * prod_s m_s!)` where `m_s` counts classes of size `s`.
pub fn equipartition_count(n: usize, k: usize) -> u128 {
    if k == 0 || k > n {
        return 0;
    }
    let fact = |m: usize| (1..=m as u128).product::<u128>();
    let (q, r) = (n / k, n % k);
    let mut denom = fact(q + 1).pow(r as u32) * fact(q).pow((k - r) as u32);
    denom *= fact(r) * fact(k - r);
    fact(n) / denom
}

/// Backtracking iterator over restricted-growth class assignments.
pub struct Equipartitions {
    n: usize,
    k: usize,
    q: usize,
    r: usize,
    assign: Vec<usize>,
    next_try: Vec<usize>,
    sizes: Vec<usize>,
    opened: usize,
    big: usize,
    pos: usize,
    done: bool,
}

impl Equipartitions {
    fn feasible(&self, v: usize, c: usize) -> bool {
        let opened = if c == self.opened { self.opened + 1 } else { self.opened };
        if opened > self.k {
            return false;
        }
        let size = self.sizes[c] + 1;
        if size > self.q + 1 {
            return false;
        }
        if size == self.q + 1 && self.big + 1 > self.r {
            return false;
        }
        // Every class must still be able to reach `q` vertices.
        let remaining = self.n - v - 1;
        let mut need = (self.k - opened) * self.q;
        for (d, &s) in self.sizes[..opened].iter().enumerate() {
            let s = if d == c { size } else { s };
            need += self.q.saturating_sub(s);
        }
        need <= remaining
    }

    fn place(&mut self, v: usize, c: usize) {
        if c == self.opened {
            self.opened += 1;
        }
        self.sizes[c] += 1;
        if self.sizes[c] == self.q + 1 {
            self.big += 1;
        }
        self.assign[v] = c;
    }

    fn unplace(&mut self, v: usize) {
        let c = self.assign[v];
        if self.sizes[c] == self.q + 1 {
            self.big -= 1;
        }
        self.sizes[c] -= 1;
        if self.sizes[c] == 0 {
            self.opened -= 1;
        }
    }
}

impl Iterator for Equipartitions {
    type Item = Equipartition;

    fn next(&mut self) -> Option<Equipartition> {
        if self.done {
            return None;
        }
        if self.pos == self.n {
            self.pos -= 1;
            self.unplace(self.pos);
        }
        loop {
            if self.pos == self.n {
                return Some(Equipartition {
                    class_of: self.assign.clone(),
                    sizes: self.sizes.clone(),
                });
            }
            let v = self.pos;
            let limit = self.opened.min(self.k - 1);
            let found = (self.next_try[v]..=limit).find(|&c| self.feasible(v, c));
            match found {
                Some(c) => {
                    self.place(v, c);
                    self.next_try[v] = c + 1;
                    self.pos += 1;
                    self.next_try[self.pos] = 0;
                }
                None => {
                    self.next_try[v] = 0;
                    if v == 0 {
                        self.done = true;
                        return None;
                    }
                    self.pos -= 1;
                    self.unplace(self.pos);
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionJson {
    n: usize,
    k: usize,
    class_of: Vec<usize>,
}

impl TryFrom<PartitionJson> for Equipartition {
    type Error = Error;

    fn try_from(p: PartitionJson) -> Result<Self> {
        if p.class_of.len() != p.n {
            return invalid(format!("\"n\" is {} but {} classes given", p.n, p.class_of.len()));
        }
        Self::new(p.class_of, p.k)
    }
}

impl From<Equipartition> for PartitionJson {
    fn from(p: Equipartition) -> Self {
        Self {
            n: p.n(),
            k: p.k(),
            class_of: p.class_of,
        }
    }
}
