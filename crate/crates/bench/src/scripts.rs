//! Randomized operation scripts checked step by step against naive oracles.
//!
//! Every script returns a digest of everything it observed, so runs with
//! different heap settings can be compared for identical behavior.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::{Hash, Hasher};

use fpp::{MultiMap, MultiSet, SortedMap, SortedSet, StrIter, Utf8String, VecIter, Vector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Vector,
    String,
    Set,
    MultiSet,
    Map,
    MultiMap,
}

impl Kind {
    pub const ALL: [Kind; 6] = [Kind::Vector, Kind::String, Kind::Set, Kind::MultiSet, Kind::Map, Kind::MultiMap];
}

/// Containers drift around this size, so whole-value checks stay cheap.
const SOFT_CAP: usize = 256;
const SNAPSHOTS: usize = 8;

type Checked = Result<u64, String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn ensure_eq<T: PartialEq + Debug>(got: T, want: T, ctx: impl FnOnce() -> String) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{}: got {got:?}, want {want:?}", ctx()))
    }
}

/// Sequence containers driven through one generic script.
trait SeqUnder: Clone {
    type E: Clone + PartialEq + Debug + Hash;
    type It: Clone;

    fn elem(rng: &mut StdRng) -> Self::E;
    fn empty() -> Self;
    fn to_vec(&self) -> Vec<Self::E>;
    fn len(&self) -> usize;
    fn get(&self, i: usize) -> Option<Self::E>;
    fn push_back(&mut self, x: Self::E);
    fn push_front(&mut self, x: Self::E);
    fn pop_back(&mut self) -> Option<Self::E>;
    fn pop_front(&mut self) -> Option<Self::E>;
    fn set(&mut self, i: usize, x: Self::E);
    fn split_off(&mut self, i: usize) -> Self;
    fn concat(&self, other: &Self) -> Self;
    fn audit(&self) -> Result<(), String>;

    fn iter_at(&self, i: usize) -> Self::It;
    fn it_get(it: &Self::It) -> Option<Self::E>;
    fn it_pos(it: &Self::It) -> usize;
    fn it_len(it: &Self::It) -> usize;
    fn it_advance(it: &mut Self::It) -> bool;
    fn it_retreat(it: &mut Self::It) -> bool;
    fn it_seek(it: &mut Self::It, n: isize) -> bool;
    fn it_insert(it: &mut Self::It, x: Self::E);
    fn it_erase(it: &mut Self::It) -> bool;
    fn it_assign(it: &mut Self::It, x: Self::E) -> bool;
    fn it_value(it: &Self::It) -> Self;
}

impl SeqUnder for Vector<u64> {
    type E = u64;
    type It = VecIter<u64>;

    fn elem(rng: &mut StdRng) -> u64 {
        rng.gen_range(0..1_000_000)
    }
    fn empty() -> Self {
        Vector::new()
    }
    fn to_vec(&self) -> Vec<u64> {
        Vector::to_vec(self)
    }
    fn len(&self) -> usize {
        Vector::len(self)
    }
    fn get(&self, i: usize) -> Option<u64> {
        Vector::get(self, i).copied()
    }
    fn push_back(&mut self, x: u64) {
        Vector::push_back(self, x)
    }
    fn push_front(&mut self, x: u64) {
        Vector::push_front(self, x)
    }
    fn pop_back(&mut self) -> Option<u64> {
        Vector::pop_back(self)
    }
    fn pop_front(&mut self) -> Option<u64> {
        Vector::pop_front(self)
    }
    fn set(&mut self, i: usize, x: u64) {
        *self = self.with_set(i, x).unwrap();
    }
    fn split_off(&mut self, i: usize) -> Self {
        Vector::split_off(self, i).unwrap()
    }
    fn concat(&self, other: &Self) -> Self {
        Vector::concat(self, other)
    }
    fn audit(&self) -> Result<(), String> {
        self.check()
    }
    fn iter_at(&self, i: usize) -> VecIter<u64> {
        Vector::iter_at(self, i)
    }
    fn it_get(it: &VecIter<u64>) -> Option<u64> {
        it.get().copied()
    }
    fn it_pos(it: &VecIter<u64>) -> usize {
        it.pos()
    }
    fn it_len(it: &VecIter<u64>) -> usize {
        it.len()
    }
    fn it_advance(it: &mut VecIter<u64>) -> bool {
        it.advance().is_ok()
    }
    fn it_retreat(it: &mut VecIter<u64>) -> bool {
        it.retreat().is_ok()
    }
    fn it_seek(it: &mut VecIter<u64>, n: isize) -> bool {
        it.seek(n).is_ok()
    }
    fn it_insert(it: &mut VecIter<u64>, x: u64) {
        it.insert(x).unwrap()
    }
    fn it_erase(it: &mut VecIter<u64>) -> bool {
        it.erase().is_ok()
    }
    fn it_assign(it: &mut VecIter<u64>, x: u64) -> bool {
        it.assign(x).is_ok()
    }
    fn it_value(it: &VecIter<u64>) -> Self {
        it.value()
    }
}

impl SeqUnder for Utf8String {
    type E = char;
    type It = StrIter;

    fn elem(rng: &mut StdRng) -> char {
        const POOL: [char; 8] = ['a', 'z', ' ', 'é', 'ß', '€', '✓', '😀'];
        POOL[rng.gen_range(0..POOL.len())]
    }
    fn empty() -> Self {
        Utf8String::new()
    }
    fn to_vec(&self) -> Vec<char> {
        self.chars().collect()
    }
    fn len(&self) -> usize {
        self.size()
    }
    fn get(&self, i: usize) -> Option<char> {
        Utf8String::get(self, i)
    }
    fn push_back(&mut self, x: char) {
        *self += x
    }
    fn push_front(&mut self, x: char) {
        Utf8String::push_front(self, x)
    }
    fn pop_back(&mut self) -> Option<char> {
        self.pop()
    }
    fn pop_front(&mut self) -> Option<char> {
        let c = Utf8String::get(self, 0)?;
        *self = self.substr(1).unwrap();
        Some(c)
    }
    fn set(&mut self, i: usize, x: char) {
        let mut it = Utf8String::iter_at(self, i);
        it.assign(x).unwrap();
        *self = it.into_value();
    }
    fn split_off(&mut self, i: usize) -> Self {
        let tail = self.substr(i).unwrap();
        *self = self.slice(0, i).unwrap();
        tail
    }
    fn concat(&self, other: &Self) -> Self {
        Utf8String::concat(self, other)
    }
    fn audit(&self) -> Result<(), String> {
        self.check()
    }
    fn iter_at(&self, i: usize) -> StrIter {
        Utf8String::iter_at(self, i)
    }
    fn it_get(it: &StrIter) -> Option<char> {
        it.get()
    }
    fn it_pos(it: &StrIter) -> usize {
        it.pos()
    }
    fn it_len(it: &StrIter) -> usize {
        it.value().size()
    }
    fn it_advance(it: &mut StrIter) -> bool {
        it.advance().is_ok()
    }
    fn it_retreat(it: &mut StrIter) -> bool {
        it.retreat().is_ok()
    }
    fn it_seek(it: &mut StrIter, n: isize) -> bool {
        it.seek(n).is_ok()
    }
    fn it_insert(it: &mut StrIter, x: char) {
        it.insert(x).unwrap()
    }
    fn it_erase(it: &mut StrIter) -> bool {
        it.erase().is_ok()
    }
    fn it_assign(it: &mut StrIter, x: char) -> bool {
        it.assign(x).is_ok()
    }
    fn it_value(it: &StrIter) -> Self {
        it.value()
    }
}

fn grow_bias(rng: &mut StdRng, len: usize) -> bool {
    if len < SOFT_CAP / 4 {
        rng.gen_bool(0.75)
    } else if len > SOFT_CAP {
        rng.gen_bool(0.25)
    } else {
        rng.gen_bool(0.5)
    }
}

fn seq_script<S: SeqUnder>(seed: u64, ops: usize, audit: bool) -> Checked {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut h = DefaultHasher::new();
    let mut c = S::empty();
    let mut m: Vec<S::E> = Vec::new();
    let mut snaps: Vec<(S, Vec<S::E>)> = Vec::new();
    for step in 0..ops {
        let ctx = || format!("seed {seed} step {step}");
        let grow = grow_bias(&mut rng, m.len());
        let op = rng.gen_range(0..8);
        match (grow, op) {
            (true, 0..=2) => {
                let x = S::elem(&mut rng);
                c.push_back(x.clone());
                m.push(x);
            }
            (true, 3 | 4) => {
                let x = S::elem(&mut rng);
                c.push_front(x.clone());
                m.insert(0, x);
            }
            (true, 5 | 6) => {
                let i = rng.gen_range(0..=m.len());
                let x = S::elem(&mut rng);
                let mut it = c.iter_at(i);
                S::it_insert(&mut it, x.clone());
                c = S::it_value(&it);
                m.insert(i, x);
            }
            (true, _) => {
                let k = rng.gen_range(0..20);
                let extra: Vec<S::E> = (0..k).map(|_| S::elem(&mut rng)).collect();
                let mut t = S::empty();
                for x in &extra {
                    t.push_back(x.clone());
                }
                c = c.concat(&t);
                m.extend(extra);
            }
            (false, 0 | 1) => {
                let got = c.pop_back();
                ensure_eq(got.clone(), m.pop(), ctx)?;
                got.hash(&mut h);
            }
            (false, 2) => {
                let want = if m.is_empty() { None } else { Some(m.remove(0)) };
                let got = c.pop_front();
                ensure_eq(got.clone(), want, ctx)?;
                got.hash(&mut h);
            }
            (false, 3 | 4) => {
                if !m.is_empty() {
                    let i = rng.gen_range(0..m.len());
                    let mut it = c.iter_at(i);
                    ensure(S::it_erase(&mut it), || format!("{}: erase refused", ctx()))?;
                    ensure_eq(S::it_get(&it), m.get(i + 1).cloned(), ctx)?;
                    c = S::it_value(&it);
                    m.remove(i);
                }
            }
            (false, 5) => {
                if !m.is_empty() {
                    let i = rng.gen_range(0..m.len());
                    let x = S::elem(&mut rng);
                    c.set(i, x.clone());
                    m[i] = x;
                }
            }
            (false, 6) => {
                let i = rng.gen_range(0..=m.len());
                let tail = c.split_off(i);
                let mt = m.split_off(i);
                ensure_eq(tail.to_vec(), mt.clone(), ctx)?;
                if rng.gen_bool(0.7) {
                    c = c.concat(&tail);
                    m.extend(mt);
                }
            }
            (false, _) => {
                if snaps.len() < SNAPSHOTS {
                    snaps.push((c.clone(), m.clone()));
                } else {
                    let j = rng.gen_range(0..SNAPSHOTS);
                    let (s, sm) = &snaps[j];
                    ensure_eq(s.to_vec(), sm.clone(), || format!("{}: snapshot {j}", ctx()))?;
                    snaps[j] = (c.clone(), m.clone());
                }
            }
        }
        ensure_eq(c.len(), m.len(), ctx)?;
        if !m.is_empty() {
            let i = rng.gen_range(0..m.len());
            let got = c.get(i);
            ensure_eq(got.clone(), Some(m[i].clone()), ctx)?;
            got.hash(&mut h);
        }
        ensure_eq(c.get(m.len()), None, ctx)?;
        if audit {
            c.audit().map_err(|e| format!("{}: {e}", ctx()))?;
        }
        if audit || step % 64 == 0 {
            ensure_eq(c.to_vec(), m.clone(), ctx)?;
        }
    }
    for (j, (s, sm)) in snaps.iter().enumerate() {
        ensure_eq(s.to_vec(), sm.clone(), || format!("seed {seed}: snapshot {j}"))?;
        if audit {
            s.audit()?;
        }
    }
    ensure_eq(c.to_vec(), m.clone(), || format!("seed {seed}: final"))?;
    m.hash(&mut h);
    Ok(h.finish())
}

fn set_script<const MULTI: bool>(seed: u64, ops: usize, audit: bool) -> Checked {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut h = DefaultHasher::new();
    let mut set = SortedSet::<u64>::new();
    let mut multi = MultiSet::<u64>::new();
    let mut m: Vec<u64> = Vec::new();
    let mut snaps: Vec<(Vec<u64>, SortedSet<u64>, MultiSet<u64>)> = Vec::new();
    let keys = (SOFT_CAP as u64) * if MULTI { 1 } else { 2 };
    for step in 0..ops {
        let ctx = || format!("seed {seed} step {step}");
        let k = rng.gen_range(0..keys);
        let grow = grow_bias(&mut rng, m.len());
        match (grow, rng.gen_range(0..4)) {
            (true, _) => {
                let at = m.partition_point(|x| *x < k);
                let present = m.get(at) == Some(&k);
                if MULTI {
                    multi.insert(k);
                    m.insert(m.partition_point(|x| *x <= k), k);
                } else {
                    ensure_eq(set.insert(k), !present, ctx)?;
                    if !present {
                        m.insert(at, k);
                    }
                }
            }
            (false, 0) if MULTI => {
                let n = m.iter().filter(|x| **x == k).count();
                m.retain(|x| *x != k);
                ensure_eq(multi.erase_all(&k), n, ctx)?;
            }
            (false, 1) => {
                if snaps.len() < SNAPSHOTS {
                    snaps.push((m.clone(), set.clone(), multi.clone()));
                }
                let at = m.partition_point(|x| *x < k);
                let hit = m.get(at) == Some(&k);
                if hit {
                    m.remove(at);
                }
                if MULTI {
                    multi = multi.with_erase(&k);
                } else {
                    set = set.with_erase(&k);
                }
            }
            (false, _) => {
                let at = m.partition_point(|x| *x < k);
                let hit = m.get(at) == Some(&k);
                if hit {
                    m.remove(at);
                }
                let got = if MULTI { multi.erase(&k) } else { set.erase(&k) };
                ensure_eq(got, hit, ctx)?;
            }
        }
        let (len, contains, count, lower) = if MULTI {
            (multi.len(), multi.contains(&k), multi.count(&k), multi.lower_rank(&k))
        } else {
            (set.len(), set.contains(&k), set.count(&k), set.lower_rank(&k))
        };
        ensure_eq(len, m.len(), ctx)?;
        ensure_eq(contains, m.binary_search(&k).is_ok(), ctx)?;
        ensure_eq(count, m.iter().filter(|x| **x == k).count(), ctx)?;
        ensure_eq(lower, m.partition_point(|x| *x < k), ctx)?;
        if !m.is_empty() {
            let i = rng.gen_range(0..m.len());
            let got = if MULTI { multi.nth(i) } else { set.nth(i) };
            ensure_eq(got, Some(&m[i]), ctx)?;
        }
        (len, count, lower).hash(&mut h);
        if audit {
            let r = if MULTI { multi.check() } else { set.check() };
            r.map_err(|e| format!("{}: {e}", ctx()))?;
        }
        if audit || step % 64 == 0 {
            let got = if MULTI { multi.to_vec() } else { set.to_vec() };
            ensure_eq(got, m.clone(), ctx)?;
        }
    }
    for (sm, s, ms) in &snaps {
        let got = if MULTI { ms.to_vec() } else { s.to_vec() };
        ensure_eq(&got, sm, || format!("seed {seed}: snapshot"))?;
    }
    m.hash(&mut h);
    Ok(h.finish())
}

fn map_script(seed: u64, ops: usize, audit: bool) -> Checked {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut h = DefaultHasher::new();
    let mut c = SortedMap::<u64, u64>::new();
    let mut m = BTreeMap::new();
    let mut snaps: Vec<(SortedMap<u64, u64>, BTreeMap<u64, u64>)> = Vec::new();
    for step in 0..ops {
        let ctx = || format!("seed {seed} step {step}");
        let k = rng.gen_range(0..2 * SOFT_CAP as u64);
        let v = rng.gen::<u32>() as u64;
        let grow = grow_bias(&mut rng, m.len());
        match (grow, rng.gen_range(0..4)) {
            (true, 0) => ensure_eq(*c.get_or_insert(k, v), *m.entry(k).or_insert(v), ctx)?,
            (true, 1) => {
                c = c.with_insert(k, v);
                m.insert(k, v);
            }
            (true, _) => ensure_eq(c.insert(k, v), m.insert(k, v), ctx)?,
            (false, 0) => {
                if snaps.len() < SNAPSHOTS {
                    snaps.push((c.clone(), m.clone()));
                }
                if let Some(mut it) = c.find(&k) {
                    it.set_value(v).unwrap();
                    c = it.value();
                    m.insert(k, v);
                }
            }
            (false, _) => ensure_eq(c.erase(&k), m.remove(&k), ctx)?,
        }
        ensure_eq(c.len(), m.len(), ctx)?;
        let got = c.get(&k).copied();
        ensure_eq(got, m.get(&k).copied(), ctx)?;
        if !m.is_empty() {
            let i = rng.gen_range(0..m.len());
            let want = m.iter().nth(i).map(|(a, b)| (*a, *b));
            ensure_eq(c.nth(i).map(|(a, b)| (*a, *b)), want, ctx)?;
        }
        (c.len(), got).hash(&mut h);
        if audit {
            c.check().map_err(|e| format!("{}: {e}", ctx()))?;
        }
        if audit || step % 64 == 0 {
            ensure_eq(c.to_vec(), m.iter().map(|(a, b)| (*a, *b)).collect(), ctx)?;
        }
    }
    for (s, sm) in &snaps {
        ensure_eq(s.to_vec(), sm.iter().map(|(a, b)| (*a, *b)).collect(), || format!("seed {seed}: snapshot"))?;
    }
    c.to_vec().hash(&mut h);
    Ok(h.finish())
}

fn multimap_script(seed: u64, ops: usize, audit: bool) -> Checked {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut h = DefaultHasher::new();
    let mut c = MultiMap::<u64, u64>::new();
    let mut m: Vec<(u64, u64)> = Vec::new();
    for step in 0..ops {
        let ctx = || format!("seed {seed} step {step}");
        let k = rng.gen_range(0..SOFT_CAP as u64 / 2);
        let v = rng.gen::<u32>() as u64;
        let grow = grow_bias(&mut rng, m.len());
        match (grow, rng.gen_range(0..5)) {
            (true, _) => {
                c.insert(k, v);
                m.insert(m.partition_point(|e| e.0 <= k), (k, v));
            }
            (false, 0) => {
                let n = m.iter().filter(|e| e.0 == k).count();
                m.retain(|e| e.0 != k);
                ensure_eq(c.erase_all(&k), n, ctx)?;
            }
            (false, _) => {
                let at = m.partition_point(|e| e.0 < k);
                let want = (m.get(at).map(|e| e.0) == Some(k)).then(|| m.remove(at).1);
                ensure_eq(c.erase(&k), want, ctx)?;
            }
        }
        ensure_eq(c.len(), m.len(), ctx)?;
        let want: Vec<&u64> = m.iter().filter(|e| e.0 == k).map(|e| &e.1).collect();
        ensure_eq(c.get_all(&k), want, ctx)?;
        c.count(&k).hash(&mut h);
        if audit {
            c.check().map_err(|e| format!("{}: {e}", ctx()))?;
        }
        if audit || step % 64 == 0 {
            ensure_eq(c.to_vec(), m.clone(), ctx)?;
        }
    }
    m.hash(&mut h);
    Ok(h.finish())
}

/// One oracle-equivalence script; returns a digest of its observations.
pub fn oracle_script(kind: Kind, seed: u64, ops: usize, audit: bool) -> Checked {
    match kind {
        Kind::Vector => seq_script::<Vector<u64>>(seed, ops, audit),
        Kind::String => seq_script::<Utf8String>(seed, ops, audit),
        Kind::Set => set_script::<false>(seed, ops, audit),
        Kind::MultiSet => set_script::<true>(seed, ops, audit),
        Kind::Map => map_script(seed, ops, audit),
        Kind::MultiMap => multimap_script(seed, ops, audit),
    }
}

struct Tracked<S: SeqUnder> {
    it: S::It,
    model: Vec<S::E>,
    pos: usize,
}

fn seq_iterators<S: SeqUnder>(seed: u64, steps: usize, max_iters: usize, audit: bool) -> Checked {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut h = DefaultHasher::new();
    let mut c = S::empty();
    let mut m: Vec<S::E> = Vec::new();
    for _ in 0..rng.gen_range(0..200) {
        let x = S::elem(&mut rng);
        c.push_back(x.clone());
        m.push(x);
    }
    let mut its: Vec<Tracked<S>> = Vec::new();
    for step in 0..steps {
        let ctx = || format!("seed {seed} step {step}");
        match rng.gen_range(0..10) {
            0 if its.len() < max_iters => {
                let p = rng.gen_range(0..=m.len());
                its.push(Tracked { it: c.iter_at(p), model: m.clone(), pos: p });
            }
            0 | 1 => {
                let x = S::elem(&mut rng);
                if rng.gen_bool(0.5) || m.is_empty() {
                    c.push_back(x.clone());
                    m.push(x);
                } else {
                    let i = rng.gen_range(0..m.len());
                    c.set(i, x.clone());
                    m[i] = x;
                }
            }
            2 => {
                if let Some(x) = c.pop_front() {
                    ensure_eq(Some(x), Some(m.remove(0)), ctx)?;
                }
            }
            3 if !its.is_empty() => {
                // Rebind the container to an iterator's version.
                let j = rng.gen_range(0..its.len());
                c = S::it_value(&its[j].it);
                m = its[j].model.clone();
            }
            3 if !its.is_empty() => {}
            _ if its.is_empty() => {}
            op => {
                let j = rng.gen_range(0..its.len());
                let t = &mut its[j];
                match op {
                    4 => {
                        let ok = S::it_advance(&mut t.it);
                        ensure_eq(ok, t.pos < t.model.len(), ctx)?;
                        t.pos += ok as usize;
                    }
                    5 => {
                        let ok = S::it_retreat(&mut t.it);
                        ensure_eq(ok, t.pos > 0, ctx)?;
                        t.pos -= ok as usize;
                    }
                    6 => {
                        let d = rng.gen_range(-20..=20isize);
                        let target = t.pos as isize + d;
                        let ok = S::it_seek(&mut t.it, d);
                        ensure_eq(ok, target >= 0 && target as usize <= t.model.len(), ctx)?;
                        if ok {
                            t.pos = target as usize;
                        }
                    }
                    7 => {
                        let x = S::elem(&mut rng);
                        S::it_insert(&mut t.it, x.clone());
                        t.model.insert(t.pos, x);
                        t.pos += 1;
                    }
                    8 => {
                        let ok = S::it_erase(&mut t.it);
                        ensure_eq(ok, t.pos < t.model.len(), ctx)?;
                        if ok {
                            t.model.remove(t.pos);
                        }
                    }
                    _ => {
                        let x = S::elem(&mut rng);
                        let ok = S::it_assign(&mut t.it, x.clone());
                        ensure_eq(ok, t.pos < t.model.len(), ctx)?;
                        if ok {
                            t.model[t.pos] = x;
                        }
                    }
                }
            }
        }
        ensure_eq(c.len(), m.len(), ctx)?;
        for (j, t) in its.iter().enumerate() {
            let ctx = || format!("seed {seed} step {step} iterator {j}");
            ensure_eq(S::it_pos(&t.it), t.pos, ctx)?;
            ensure_eq(S::it_get(&t.it), t.model.get(t.pos).cloned(), ctx)?;
            S::it_get(&t.it).hash(&mut h);
        }
        if audit || step % 16 == 0 {
            ensure_eq(c.to_vec(), m.clone(), ctx)?;
            for (j, t) in its.iter().enumerate() {
                let v = S::it_value(&t.it);
                ensure_eq(S::it_len(&t.it), t.model.len(), || format!("{} iterator {j}", ctx()))?;
                ensure_eq(v.to_vec(), t.model.clone(), || format!("{} iterator {j}", ctx()))?;
                if audit {
                    v.audit().map_err(|e| format!("{} iterator {j}: {e}", ctx()))?;
                }
            }
        }
        if audit {
            c.audit().map_err(|e| format!("{}: {e}", ctx()))?;
        }
    }
    m.hash(&mut h);
    Ok(h.finish())
}

fn set_iterators(seed: u64, steps: usize, max_iters: usize, audit: bool) -> Checked {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut h = DefaultHasher::new();
    let mut c = SortedSet::<u64>::new();
    let mut m = BTreeSet::new();
    let mut its: Vec<(fpp::SetIter<u64>, Vec<u64>, usize)> = Vec::new();
    for step in 0..steps {
        let ctx = || format!("seed {seed} step {step}");
        let k = rng.gen_range(0..400u64);
        match rng.gen_range(0..6) {
            0 if its.len() < max_iters => {
                let it = c.lower_bound(&k);
                let model: Vec<u64> = m.iter().copied().collect();
                let pos = model.partition_point(|x| *x < k);
                its.push((it, model, pos));
            }
            0 | 1 => ensure_eq(c.insert(k), m.insert(k), ctx)?,
            2 => ensure_eq(c.erase(&k), m.remove(&k), ctx)?,
            _ if its.is_empty() => {}
            op => {
                let j = rng.gen_range(0..its.len());
                let (it, model, pos) = &mut its[j];
                match op {
                    3 => {
                        if it.advance().is_ok() {
                            *pos += 1;
                        }
                    }
                    4 => {
                        if it.retreat().is_ok() {
                            *pos -= 1;
                        }
                    }
                    _ => {
                        if it.erase().is_ok() {
                            model.remove(*pos);
                        }
                    }
                }
            }
        }
        for (j, (it, model, pos)) in its.iter().enumerate() {
            let ctx = || format!("seed {seed} step {step} iterator {j}");
            ensure_eq(it.pos(), *pos, ctx)?;
            ensure_eq(it.get(), model.get(*pos), ctx)?;
            if audit || step % 16 == 0 {
                let v: SortedSet<u64> = it.value();
                ensure_eq(&v.to_vec(), model, ctx)?;
                if audit {
                    v.check().map_err(|e| format!("{}: {e}", ctx()))?;
                }
            }
            it.get().hash(&mut h);
        }
        if audit {
            c.check().map_err(|e| format!("{}: {e}", ctx()))?;
        }
        ensure_eq(c.len(), m.len(), ctx)?;
    }
    Ok(h.finish())
}

fn map_iterators(seed: u64, steps: usize, max_iters: usize, audit: bool) -> Checked {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut h = DefaultHasher::new();
    let mut c = SortedMap::<u64, u64>::new();
    let mut m = BTreeMap::new();
    type Model = Vec<(u64, u64)>;
    let mut its: Vec<(fpp::MapIter<u64, u64>, Model, usize)> = Vec::new();
    for step in 0..steps {
        let ctx = || format!("seed {seed} step {step}");
        let k = rng.gen_range(0..400u64);
        let v = rng.gen_range(0..1000u64);
        match rng.gen_range(0..6) {
            0 if its.len() < max_iters => {
                if let Some(it) = c.find(&k) {
                    let model: Model = m.iter().map(|(a, b)| (*a, *b)).collect();
                    let pos = model.partition_point(|e| e.0 < k);
                    its.push((it, model, pos));
                }
            }
            0 | 1 => ensure_eq(c.insert(k, v), m.insert(k, v), ctx)?,
            2 => ensure_eq(c.erase(&k), m.remove(&k), ctx)?,
            _ if its.is_empty() => {}
            op => {
                let j = rng.gen_range(0..its.len());
                let (it, model, pos) = &mut its[j];
                match op {
                    3 => {
                        if it.advance().is_ok() {
                            *pos += 1;
                        }
                    }
                    4 => {
                        if it.set_value(v).is_ok() {
                            model[*pos].1 = v;
                        }
                    }
                    _ => {
                        if it.erase().is_ok() {
                            model.remove(*pos);
                        }
                    }
                }
            }
        }
        for (j, (it, model, pos)) in its.iter().enumerate() {
            let ctx = || format!("seed {seed} step {step} iterator {j}");
            ensure_eq(it.get().map(|(a, b)| (*a, *b)), model.get(*pos).copied(), ctx)?;
            if audit || step % 16 == 0 {
                let val: SortedMap<u64, u64> = it.value();
                ensure_eq(&val.to_vec(), model, ctx)?;
                if audit {
                    val.check().map_err(|e| format!("{}: {e}", ctx()))?;
                }
            }
            it.get().map(|(a, b)| (*a, *b)).hash(&mut h);
        }
        if audit {
            c.check().map_err(|e| format!("{}: {e}", ctx()))?;
        }
        ensure_eq(c.to_vec(), m.iter().map(|(a, b)| (*a, *b)).collect::<Vec<_>>(), ctx)?;
    }
    Ok(h.finish())
}

/// One no-invalidation script with up to `max_iters` live iterators.
pub fn iterator_script(kind: Kind, seed: u64, steps: usize, max_iters: usize, audit: bool) -> Checked {
    match kind {
        Kind::Vector => seq_iterators::<Vector<u64>>(seed, steps, max_iters, audit),
        Kind::String => seq_iterators::<Utf8String>(seed, steps, max_iters, audit),
        Kind::Set | Kind::MultiSet => set_iterators(seed, steps, max_iters, audit),
        Kind::Map | Kind::MultiMap => map_iterators(seed, steps, max_iters, audit),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_oracle_scripts_pass() {
        for kind in Kind::ALL {
            for seed in 0..3 {
                oracle_script(kind, seed, 1500, true).unwrap_or_else(|e| panic!("{kind:?}: {e}"));
            }
        }
    }

    #[test]
    fn short_iterator_scripts_pass() {
        for kind in Kind::ALL {
            for seed in 0..3 {
                iterator_script(kind, seed, 800, 8, true).unwrap_or_else(|e| panic!("{kind:?}: {e}"));
            }
        }
    }

    #[test]
    fn digests_ignore_audit_mode() {
        for kind in Kind::ALL {
            assert_eq!(oracle_script(kind, 11, 500, false), oracle_script(kind, 11, 500, true));
        }
    }
}
