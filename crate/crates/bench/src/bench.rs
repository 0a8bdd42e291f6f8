//! Micro-benchmarks: each (benchmark, container) pair is timed for this
//! library and for a plain array baseline.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use fpp::heap::{self, AllocatorKind};
use fpp::pool::SLOT_SIZE;
use fpp::{End, SortedMap, SortedSet, Utf8String, Vector};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bench {
    Access,
    Append,
    Update,
    Concat,
    Erase,
    AccessIt,
    AppendIt,
    UpdateIt,
    EraseIt,
    Memory,
}

impl Bench {
    pub const ALL: [Bench; 10] = [
        Bench::Access,
        Bench::Append,
        Bench::Update,
        Bench::Concat,
        Bench::Erase,
        Bench::AccessIt,
        Bench::AppendIt,
        Bench::UpdateIt,
        Bench::EraseIt,
        Bench::Memory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Bench::Access => "access",
            Bench::Append => "append",
            Bench::Update => "update",
            Bench::Concat => "concat",
            Bench::Erase => "erase",
            Bench::AccessIt => "access_it",
            Bench::AppendIt => "append_it",
            Bench::UpdateIt => "update_it",
            Bench::EraseIt => "erase_it",
            Bench::Memory => "memory",
        }
    }

    /// Whether cells are per-operation times (as opposed to totals or bytes).
    pub fn per_op(self) -> bool {
        !matches!(self, Bench::Concat | Bench::Memory)
    }
}

impl fmt::Display for Bench {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bench {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Bench::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| BenchError::Usage(format!("unknown benchmark {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Container {
    Vector,
    Set,
    Map,
    String,
}

impl Container {
    pub const ALL: [Container; 4] = [Container::Vector, Container::Set, Container::Map, Container::String];

    pub fn name(self) -> &'static str {
        match self {
            Container::Vector => "vector",
            Container::Set => "set",
            Container::Map => "map",
            Container::String => "string",
        }
    }

    pub fn supports(self, b: Bench) -> bool {
        use Bench::*;
        match self {
            Container::Vector => true,
            Container::String => b != Update,
            Container::Set => matches!(b, Access | Append | Erase | AccessIt | EraseIt | Memory),
            Container::Map => !matches!(b, Concat | AppendIt),
        }
    }

    fn baseline_label(self) -> &'static str {
        match self {
            Container::Vector | Container::String => "baseline_array",
            Container::Set | Container::Map => "baseline_sorted_array",
        }
    }
}

impl fmt::Display for Container {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Container {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Container::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| BenchError::Usage(format!("unknown container {s:?}")))
    }
}

/// Which side of the comparison a measurement is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Impl {
    Fpp,
    Baseline,
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub bench: Bench,
    pub container: Container,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub alloc: AllocatorKind,
}

impl BenchSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if !self.container.supports(self.bench) {
            return Err(BenchError::Usage(format!(
                "{} is not defined for {}; valid pairs: {}",
                self.bench,
                self.container,
                valid_pairs()
            )));
        }
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::Usage("sizes must be nonempty and strictly increasing".into()));
        }
        if self.reps < 3 {
            return Err(BenchError::Usage("at least 3 repetitions are required".into()));
        }
        Ok(())
    }
}

pub fn valid_pairs() -> String {
    let mut out = Vec::new();
    for c in Container::ALL {
        let bs: Vec<&str> = Bench::ALL.into_iter().filter(|b| c.supports(*b)).map(Bench::name).collect();
        out.push(format!("{}: {}", c, bs.join(" ")));
    }
    out.join("; ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub cells: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchTable {
    pub columns: Vec<String>,
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    /// Values of one column, by label.
    pub fn column(&self, label: &str) -> Option<Vec<u64>> {
        let i = self.columns.iter().position(|c| c == label)?;
        Some(self.rows.iter().map(|r| r.cells[i]).collect())
    }
}

/// One timed run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Sample {
    /// Nanoseconds for the whole timed loop, or bytes for `memory`.
    pub value: u64,
    /// Pool allocations during the timed loop.
    pub allocs: u64,
}

/// Timed operations per measurement are topped up to about this many by
/// repeating the loop, so small sizes are not dominated by timer noise.
pub const MIN_TIMED_OPS: usize = 1 << 20;

fn rounds(bench: Bench, n: usize) -> usize {
    match bench {
        Bench::Memory => 1,
        Bench::Concat => (MIN_TIMED_OPS / 16 / n.max(1)).max(1),
        _ => (MIN_TIMED_OPS / n.max(1)).max(1),
    }
}

/// Runs one measurement on a fresh thread, so it gets its own node pool.
/// The result is averaged over the repeated rounds.
pub fn run_once(bench: Bench, container: Container, imp: Impl, n: usize, alloc: AllocatorKind) -> Sample {
    let destructive = heap::destructive_updates();
    std::thread::spawn(move || {
        heap::set_allocator(alloc).expect("fresh thread has no live nodes");
        heap::set_destructive_updates(destructive);
        let k = rounds(bench, n);
        let mut total = Sample::default();
        for _ in 0..k {
            let s = match (container, imp) {
                (Container::Vector, Impl::Fpp) => fpp_vector(bench, n),
                (Container::Vector, Impl::Baseline) => base_vector(bench, n),
                (Container::Set, Impl::Fpp) => fpp_set(bench, n),
                (Container::Set, Impl::Baseline) => base_set(bench, n),
                (Container::Map, Impl::Fpp) => fpp_map(bench, n),
                (Container::Map, Impl::Baseline) => base_map(bench, n),
                (Container::String, Impl::Fpp) => fpp_string(bench, n),
                (Container::String, Impl::Baseline) => base_string(bench, n),
            };
            total.value += s.value;
            total.allocs += s.allocs;
        }
        Sample { value: total.value / k as u64, allocs: total.allocs / k as u64 }
    })
    .join()
    .expect("benchmark thread panicked")
}

fn median(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

/// Median cell for one size: a warm-up run is discarded, then `reps` runs.
pub fn measure(bench: Bench, container: Container, imp: Impl, n: usize, reps: usize, alloc: AllocatorKind) -> u64 {
    run_once(bench, container, imp, n, alloc);
    let samples: Vec<u64> = (0..reps).map(|_| run_once(bench, container, imp, n, alloc).value).collect();
    let m = median(samples);
    if bench.per_op() {
        (m / n.max(1) as u64).max(1)
    } else {
        m
    }
}

pub fn run_bench(spec: &BenchSpec) -> Result<BenchTable, BenchError> {
    spec.validate()?;
    let columns = vec![format!("fpp_{}", spec.container), spec.container.baseline_label().to_string()];
    let rows = spec
        .sizes
        .iter()
        .map(|&n| BenchRow {
            size: n,
            cells: [Impl::Fpp, Impl::Baseline]
                .into_iter()
                .map(|imp| measure(spec.bench, spec.container, imp, n, spec.reps, spec.alloc))
                .collect(),
        })
        .collect();
    Ok(BenchTable { columns, rows })
}

pub fn emit_csv(table: &BenchTable, out: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "Size,{}", table.columns.join(","))?;
    for r in &table.rows {
        let cells: Vec<String> = r.cells.iter().map(u64::to_string).collect();
        writeln!(out, "{},{}", r.size, cells.join(","))?;
    }
    Ok(())
}

struct Timer {
    start: Instant,
    allocs: u64,
}

impl Timer {
    fn start() -> Timer {
        let allocs = heap::allocations();
        Timer { start: Instant::now(), allocs }
    }

    fn stop(self) -> Sample {
        let value = self.start.elapsed().as_nanos() as u64;
        Sample { value, allocs: heap::allocations() - self.allocs }
    }
}

fn pool_bytes() -> u64 {
    heap::live_nodes() * SLOT_SIZE as u64
}

fn ch(i: usize) -> char {
    (b'a' + (i % 26) as u8) as char
}

fn parts(n: usize) -> impl Iterator<Item = std::ops::Range<u64>> {
    let k = (n / 10) as u64;
    (0..10).map(move |j| j * k..(j + 1) * k)
}

fn fpp_vector(b: Bench, n: usize) -> Sample {
    let full = || (0..n as u64).collect::<Vector<u64>>();
    match b {
        Bench::Access => {
            let v = full();
            let t = Timer::start();
            let mut s = 0u64;
            for i in 0..n {
                s = s.wrapping_add(v[i]);
            }
            black_box(s);
            t.stop()
        }
        Bench::Append => {
            let t = Timer::start();
            let mut v: Vector<u64> = Vector::new();
            for i in 0..n as u64 {
                v.push_back(i);
            }
            let s = t.stop();
            black_box(v);
            s
        }
        Bench::Update => {
            let mut v = full();
            let t = Timer::start();
            for i in 0..n {
                v.set(i, i as u64 + 1).unwrap();
            }
            let s = t.stop();
            black_box(v);
            s
        }
        Bench::Concat => {
            let ps: Vec<Vector<u64>> = parts(n).map(|r| r.collect()).collect();
            let t = Timer::start();
            let all = ps.iter().fold(Vector::new(), |acc, p| acc.concat(p));
            let s = t.stop();
            assert_eq!(all.len(), n / 10 * 10);
            s
        }
        Bench::Erase => {
            let mut v = full();
            let t = Timer::start();
            while v.pop_back().is_some() {}
            t.stop()
        }
        Bench::AccessIt => {
            let v = full();
            let t = Timer::start();
            let mut s = 0u64;
            let mut it = v.begin();
            while it != End {
                s = s.wrapping_add(*it.get().unwrap());
                it.advance().unwrap();
            }
            black_box(s);
            t.stop()
        }
        Bench::AppendIt => {
            let v: Vector<u64> = Vector::new();
            let t = Timer::start();
            let mut it = v.begin();
            for i in 0..n as u64 {
                it.insert(i).unwrap();
            }
            let v = it.into_value();
            let s = t.stop();
            assert_eq!(v.len(), n);
            s
        }
        Bench::UpdateIt => {
            let v = full();
            let t = Timer::start();
            let mut it = v.begin();
            while it != End {
                let x = *it.get().unwrap();
                it.assign(x + 1).unwrap();
                it.advance().unwrap();
            }
            let v = it.into_value();
            let s = t.stop();
            black_box(v);
            s
        }
        Bench::EraseIt => {
            let v = full();
            let t = Timer::start();
            let mut it = v.iter_at(n);
            while it.retreat().is_ok() {
                it.erase().unwrap();
            }
            let s = t.stop();
            assert!(it.is_empty());
            s
        }
        Bench::Memory => {
            let v = full();
            black_box(&v);
            Sample { value: pool_bytes(), allocs: 0 }
        }
    }
}

fn base_vector(b: Bench, n: usize) -> Sample {
    let full = || (0..n as u64).collect::<Vec<u64>>();
    match b {
        Bench::Access => {
            let v = full();
            let t = Timer::start();
            let mut s = 0u64;
            for i in 0..n {
                s = s.wrapping_add(black_box(&v)[i]);
            }
            black_box(s);
            t.stop()
        }
        Bench::Append => {
            let t = Timer::start();
            let mut v = Vec::new();
            for i in 0..n as u64 {
                v.push(black_box(i));
            }
            let s = t.stop();
            black_box(v);
            s
        }
        Bench::Update => {
            let mut v = full();
            let t = Timer::start();
            for i in 0..n {
                black_box(&mut v)[i] = i as u64 + 1;
            }
            t.stop()
        }
        Bench::Concat => {
            let ps: Vec<Vec<u64>> = parts(n).map(|r| r.collect()).collect();
            let t = Timer::start();
            let mut all = Vec::new();
            for p in &ps {
                all.extend_from_slice(p);
            }
            black_box(&all);
            t.stop()
        }
        Bench::Erase | Bench::EraseIt => {
            let mut v = full();
            let t = Timer::start();
            while black_box(&mut v).pop().is_some() {}
            t.stop()
        }
        Bench::AccessIt => {
            let v = full();
            let t = Timer::start();
            let s = black_box(&v).iter().fold(0u64, |a, x| a.wrapping_add(*x));
            black_box(s);
            t.stop()
        }
        Bench::AppendIt => {
            let t = Timer::start();
            let mut v = Vec::new();
            v.extend((0..n as u64).map(black_box));
            black_box(v);
            t.stop()
        }
        Bench::UpdateIt => {
            let mut v = full();
            let t = Timer::start();
            for x in black_box(&mut v).iter_mut() {
                *x += 1;
            }
            t.stop()
        }
        Bench::Memory => {
            let mut v = Vec::new();
            for i in 0..n as u64 {
                v.push(i);
            }
            Sample { value: (v.capacity() * 8) as u64, allocs: 0 }
        }
    }
}

fn fpp_set(b: Bench, n: usize) -> Sample {
    let full = || {
        let mut s = SortedSet::<u64>::new();
        for i in 0..n as u64 {
            s.insert(i);
        }
        s
    };
    match b {
        Bench::Access => {
            let s = full();
            let t = Timer::start();
            let mut sum = 0u64;
            for i in 0..n {
                sum = sum.wrapping_add(s[i]);
            }
            black_box(sum);
            t.stop()
        }
        Bench::Append => {
            let t = Timer::start();
            let s = full();
            let out = t.stop();
            black_box(s);
            out
        }
        Bench::Erase => {
            let mut s = full();
            let t = Timer::start();
            for k in (0..n as u64).rev() {
                s.erase(&k);
            }
            let out = t.stop();
            assert!(s.is_empty());
            out
        }
        Bench::AccessIt => {
            let s = full();
            let t = Timer::start();
            let mut sum = 0u64;
            let mut it = s.begin();
            while it != End {
                sum = sum.wrapping_add(*it.get().unwrap());
                it.advance().unwrap();
            }
            black_box(sum);
            t.stop()
        }
        Bench::EraseIt => {
            let s = full();
            let t = Timer::start();
            let mut it = s.upper_bound(&u64::MAX);
            while it.retreat().is_ok() {
                it.erase().unwrap();
            }
            t.stop()
        }
        Bench::Memory => {
            let s = full();
            black_box(&s);
            Sample { value: pool_bytes(), allocs: 0 }
        }
        _ => unreachable!("validated"),
    }
}

fn base_set(b: Bench, n: usize) -> Sample {
    let insert = |v: &mut Vec<u64>, k: u64| {
        if let Err(at) = v.binary_search(&k) {
            v.insert(at, k);
        }
    };
    let full = || {
        let mut v = Vec::new();
        for i in 0..n as u64 {
            insert(&mut v, i);
        }
        v
    };
    match b {
        Bench::Access => base_vector(Bench::Access, n),
        Bench::Append => {
            let t = Timer::start();
            let v = full();
            let s = t.stop();
            black_box(v);
            s
        }
        Bench::Erase => {
            let mut v = full();
            let t = Timer::start();
            for k in (0..n as u64).rev() {
                if let Ok(at) = black_box(&v).binary_search(&k) {
                    v.remove(at);
                }
            }
            t.stop()
        }
        Bench::AccessIt | Bench::EraseIt => base_vector(b, n),
        Bench::Memory => {
            let v = full();
            Sample { value: (v.capacity() * 8) as u64, allocs: 0 }
        }
        _ => unreachable!("validated"),
    }
}

fn fpp_map(b: Bench, n: usize) -> Sample {
    let full = || {
        let mut m = SortedMap::<u64, u64>::new();
        for i in 0..n as u64 {
            m.insert(i, i);
        }
        m
    };
    match b {
        Bench::Access => {
            let m = full();
            let t = Timer::start();
            let mut sum = 0u64;
            for i in 0..n {
                sum = sum.wrapping_add(*m.nth(i).unwrap().1);
            }
            black_box(sum);
            t.stop()
        }
        Bench::Append => {
            let t = Timer::start();
            let m = full();
            let s = t.stop();
            black_box(m);
            s
        }
        Bench::Update => {
            let mut m = full();
            let t = Timer::start();
            for i in 0..n as u64 {
                m.insert(i, i + 1);
            }
            t.stop()
        }
        Bench::Erase => {
            let mut m = full();
            let t = Timer::start();
            for k in (0..n as u64).rev() {
                m.erase(&k);
            }
            let s = t.stop();
            assert!(m.is_empty());
            s
        }
        Bench::AccessIt => {
            let m = full();
            let t = Timer::start();
            let mut sum = 0u64;
            let mut it = m.begin();
            while it != End {
                sum = sum.wrapping_add(*it.get().unwrap().1);
                it.advance().unwrap();
            }
            black_box(sum);
            t.stop()
        }
        Bench::UpdateIt => {
            let m = full();
            let t = Timer::start();
            let mut it = m.begin();
            while it != End {
                let v = *it.get().unwrap().1;
                it.set_value(v + 1).unwrap();
                it.advance().unwrap();
            }
            let s = t.stop();
            black_box(it);
            s
        }
        Bench::EraseIt => {
            let m = full();
            let t = Timer::start();
            let mut it = m.begin();
            it.seek(n as isize).unwrap();
            while it.retreat().is_ok() {
                it.erase().unwrap();
            }
            t.stop()
        }
        Bench::Memory => {
            let m = full();
            black_box(&m);
            Sample { value: pool_bytes(), allocs: 0 }
        }
        _ => unreachable!("validated"),
    }
}

fn base_map(b: Bench, n: usize) -> Sample {
    let insert = |v: &mut Vec<(u64, u64)>, k: u64, x: u64| match v.binary_search_by_key(&k, |e| e.0) {
        Ok(at) => v[at].1 = x,
        Err(at) => v.insert(at, (k, x)),
    };
    let full = || {
        let mut v = Vec::new();
        for i in 0..n as u64 {
            insert(&mut v, i, i);
        }
        v
    };
    match b {
        Bench::Access => {
            let v = full();
            let t = Timer::start();
            let mut s = 0u64;
            for i in 0..n {
                s = s.wrapping_add(black_box(&v)[i].1);
            }
            black_box(s);
            t.stop()
        }
        Bench::Append => {
            let t = Timer::start();
            let v = full();
            let s = t.stop();
            black_box(v);
            s
        }
        Bench::Update => {
            let mut v = full();
            let t = Timer::start();
            for i in 0..n as u64 {
                insert(black_box(&mut v), i, i + 1);
            }
            t.stop()
        }
        Bench::Erase => {
            let mut v = full();
            let t = Timer::start();
            for k in (0..n as u64).rev() {
                if let Ok(at) = black_box(&v).binary_search_by_key(&k, |e| e.0) {
                    v.remove(at);
                }
            }
            t.stop()
        }
        Bench::AccessIt => {
            let v = full();
            let t = Timer::start();
            let s = black_box(&v).iter().fold(0u64, |a, e| a.wrapping_add(e.1));
            black_box(s);
            t.stop()
        }
        Bench::UpdateIt => {
            let mut v = full();
            let t = Timer::start();
            for e in black_box(&mut v).iter_mut() {
                e.1 += 1;
            }
            t.stop()
        }
        Bench::EraseIt => {
            let mut v = full();
            let t = Timer::start();
            while black_box(&mut v).pop().is_some() {}
            t.stop()
        }
        Bench::Memory => {
            let v = full();
            Sample { value: (v.capacity() * 16) as u64, allocs: 0 }
        }
        _ => unreachable!("validated"),
    }
}

fn fpp_string(b: Bench, n: usize) -> Sample {
    let full = || (0..n).map(ch).collect::<Utf8String>();
    match b {
        Bench::Access => {
            let s = full();
            let t = Timer::start();
            let mut sum = 0u64;
            for i in 0..n {
                sum = sum.wrapping_add(s.get(i).unwrap() as u64);
            }
            black_box(sum);
            t.stop()
        }
        Bench::Append => {
            let t = Timer::start();
            let mut s = Utf8String::new();
            for i in 0..n {
                s += ch(i);
            }
            let out = t.stop();
            black_box(s);
            out
        }
        Bench::Concat => {
            let ps: Vec<Utf8String> = parts(n).map(|r| r.map(|i| ch(i as usize)).collect()).collect();
            let t = Timer::start();
            let mut all = Utf8String::new();
            for p in &ps {
                all += p;
            }
            let s = t.stop();
            assert_eq!(all.size(), n / 10 * 10);
            s
        }
        Bench::Erase => {
            let mut s = full();
            let t = Timer::start();
            while s.pop().is_some() {}
            t.stop()
        }
        Bench::AccessIt => {
            let s = full();
            let t = Timer::start();
            let mut sum = 0u64;
            let mut it = s.begin();
            while it != End {
                sum = sum.wrapping_add(it.get().unwrap() as u64);
                it.advance().unwrap();
            }
            black_box(sum);
            t.stop()
        }
        Bench::AppendIt => {
            let s = Utf8String::new();
            let t = Timer::start();
            let mut it = s.begin();
            for i in 0..n {
                it.insert(ch(i)).unwrap();
            }
            let s = it.into_value();
            let out = t.stop();
            assert_eq!(s.size(), n);
            out
        }
        Bench::UpdateIt => {
            let s = full();
            let t = Timer::start();
            let mut it = s.begin();
            while it != End {
                let c = it.get().unwrap();
                it.assign(c.to_ascii_uppercase()).unwrap();
                it.advance().unwrap();
            }
            let out = t.stop();
            black_box(it);
            out
        }
        Bench::EraseIt => {
            let s = full();
            let t = Timer::start();
            let mut it = s.iter_at(n);
            while it.retreat().is_ok() {
                it.erase().unwrap();
            }
            t.stop()
        }
        Bench::Memory => {
            let s = full();
            black_box(&s);
            Sample { value: pool_bytes(), allocs: 0 }
        }
        Bench::Update => unreachable!("validated"),
    }
}

fn base_string(b: Bench, n: usize) -> Sample {
    let full = || (0..n).map(ch).collect::<Vec<char>>();
    match b {
        Bench::Access => {
            let v = full();
            let t = Timer::start();
            let mut s = 0u64;
            for i in 0..n {
                s = s.wrapping_add(black_box(&v)[i] as u64);
            }
            black_box(s);
            t.stop()
        }
        Bench::Append | Bench::AppendIt => {
            let t = Timer::start();
            let mut v = Vec::new();
            for i in 0..n {
                v.push(black_box(ch(i)));
            }
            black_box(v);
            t.stop()
        }
        Bench::Concat => {
            let ps: Vec<Vec<char>> = parts(n).map(|r| r.map(|i| ch(i as usize)).collect()).collect();
            let t = Timer::start();
            let mut all = Vec::new();
            for p in &ps {
                all.extend_from_slice(p);
            }
            black_box(&all);
            t.stop()
        }
        Bench::Erase | Bench::EraseIt => {
            let mut v = full();
            let t = Timer::start();
            while black_box(&mut v).pop().is_some() {}
            t.stop()
        }
        Bench::AccessIt => {
            let v = full();
            let t = Timer::start();
            let s = black_box(&v).iter().fold(0u64, |a, c| a.wrapping_add(*c as u64));
            black_box(s);
            t.stop()
        }
        Bench::UpdateIt => {
            let mut v = full();
            let t = Timer::start();
            for c in black_box(&mut v).iter_mut() {
                *c = c.to_ascii_uppercase();
            }
            t.stop()
        }
        Bench::Memory => {
            let mut v = Vec::new();
            for i in 0..n {
                v.push(ch(i));
            }
            Sample { value: (v.capacity() * 4) as u64, allocs: 0 }
        }
        Bench::Update => unreachable!("validated"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(bench: Bench, container: Container, sizes: &[usize]) -> BenchSpec {
        BenchSpec { bench, container, sizes: sizes.to_vec(), reps: 3, alloc: AllocatorKind::Pool }
    }

    #[test]
    fn header_is_pinned() {
        let t = run_bench(&spec(Bench::Access, Container::Vector, &[100, 1000])).unwrap();
        let mut out = Vec::new();
        emit_csv(&t, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "Size,fpp_vector,baseline_array");
        assert!(lines[1].starts_with("100,"));
        assert!(t.rows.iter().all(|r| r.cells.iter().all(|c| *c > 0)));
    }

    #[test]
    fn every_supported_pair_runs() {
        for c in Container::ALL {
            for b in Bench::ALL.into_iter().filter(|b| c.supports(*b)) {
                let t = run_bench(&spec(b, c, &[10, 200])).unwrap();
                assert_eq!(t.rows.len(), 2, "{b}/{c}");
            }
        }
    }

    #[test]
    fn unsupported_pairs_and_bad_specs_are_usage_errors() {
        assert!(matches!(run_bench(&spec(Bench::Concat, Container::Set, &[10])), Err(BenchError::Usage(_))));
        assert!(matches!(run_bench(&spec(Bench::Access, Container::Vector, &[10, 10])), Err(BenchError::Usage(_))));
        let mut s = spec(Bench::Access, Container::Vector, &[10]);
        s.reps = 2;
        assert!(s.validate().is_err());
        assert!("nope".parse::<Bench>().is_err());
    }

    #[test]
    fn memory_of_nothing_is_zero() {
        let t = run_bench(&spec(Bench::Memory, Container::Vector, &[0, 10])).unwrap();
        assert_eq!(t.rows[0].cells, vec![0, 0]);
    }

    #[test]
    fn row_shape_is_reproducible() {
        let s = spec(Bench::Append, Container::String, &[50, 500]);
        let a = run_bench(&s).unwrap();
        let b = run_bench(&s).unwrap();
        assert_eq!(a.columns, b.columns);
        assert_eq!(a.rows.iter().map(|r| r.size).collect::<Vec<_>>(), b.rows.iter().map(|r| r.size).collect::<Vec<_>>());
    }
}
