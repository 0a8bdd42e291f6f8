use std::collections::{BTreeMap, BTreeSet};

use fpp::{MultiSet, SortedMap, SortedSet, Utf8String, Vector};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum VecOp {
    PushBack(u64),
    PushFront(u64),
    PopBack,
    PopFront,
    Set(usize, u64),
    SplitOff(usize),
    Concat(u8),
    Insert(usize, u64),
    Erase(usize),
}

fn vec_op() -> impl Strategy<Value = VecOp> {
    prop_oneof![
        3 => any::<u64>().prop_map(VecOp::PushBack),
        2 => any::<u64>().prop_map(VecOp::PushFront),
        1 => Just(VecOp::PopBack),
        1 => Just(VecOp::PopFront),
        1 => (any::<usize>(), any::<u64>()).prop_map(|(i, x)| VecOp::Set(i, x)),
        1 => any::<usize>().prop_map(VecOp::SplitOff),
        1 => any::<u8>().prop_map(VecOp::Concat),
        2 => (any::<usize>(), any::<u64>()).prop_map(|(i, x)| VecOp::Insert(i, x)),
        2 => any::<usize>().prop_map(VecOp::Erase),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vector_matches_vec(ops in prop::collection::vec(vec_op(), 0..300)) {
        let mut v: Vector<u64> = Vector::new();
        let mut m: Vec<u64> = Vec::new();
        let mut history = Vec::new();
        for op in ops {
            history.push((v.clone(), m.clone()));
            match op {
                VecOp::PushBack(x) => { v.push_back(x); m.push(x); }
                VecOp::PushFront(x) => { v.push_front(x); m.insert(0, x); }
                VecOp::PopBack => prop_assert_eq!(v.pop_back(), m.pop()),
                VecOp::PopFront => {
                    let want = if m.is_empty() { None } else { Some(m.remove(0)) };
                    prop_assert_eq!(v.pop_front(), want);
                }
                VecOp::Set(i, x) => {
                    if m.is_empty() {
                        prop_assert!(v.set(i, x).is_err());
                    } else {
                        let i = i % m.len();
                        v.set(i, x).unwrap();
                        m[i] = x;
                    }
                }
                VecOp::SplitOff(i) => {
                    let i = i % (m.len() + 1);
                    let tail = v.split_off(i).unwrap();
                    prop_assert_eq!(tail.to_vec(), m.split_off(i));
                }
                VecOp::Concat(n) => {
                    let w: Vector<u64> = (0..n as u64).collect();
                    v = v.concat(&w);
                    m.extend(0..n as u64);
                }
                VecOp::Insert(i, x) => {
                    let i = i % (m.len() + 1);
                    let mut it = v.iter_at(i);
                    it.insert(x).unwrap();
                    v = it.into_value();
                    m.insert(i, x);
                }
                VecOp::Erase(i) => {
                    if !m.is_empty() {
                        let i = i % m.len();
                        let mut it = v.iter_at(i);
                        it.erase().unwrap();
                        prop_assert_eq!(it.get(), m.get(i + 1));
                        v = it.value();
                        m.remove(i);
                    }
                }
            }
            prop_assert!(v.check().is_ok(), "{:?}", v.check());
            prop_assert_eq!(v.len(), m.len());
            prop_assert_eq!(v.to_vec(), m.clone());
        }
        for (old, want) in history {
            prop_assert_eq!(old.to_vec(), want);
        }
    }

    #[test]
    fn set_matches_btreeset(ops in prop::collection::vec((any::<bool>(), 0u16..200), 0..400)) {
        let mut s = SortedSet::<u16>::new();
        let mut m = BTreeSet::new();
        for (ins, k) in ops {
            let before = s.clone();
            let snapshot: Vec<u16> = m.iter().copied().collect();
            if ins {
                prop_assert_eq!(s.insert(k), m.insert(k));
            } else {
                prop_assert_eq!(s.erase(&k), m.remove(&k));
            }
            prop_assert!(s.check().is_ok());
            prop_assert_eq!(before.to_vec(), snapshot);
            prop_assert_eq!(s.contains(&k), m.contains(&k));
        }
        prop_assert_eq!(s.to_vec(), m.iter().copied().collect::<Vec<_>>());
        for (i, k) in m.iter().enumerate() {
            prop_assert_eq!(s.nth(i), Some(k));
        }
    }

    #[test]
    fn multiset_matches_sorted_vec(ops in prop::collection::vec((0u8..3, 0u16..40), 0..400)) {
        let mut s = MultiSet::<u16>::new();
        let mut m: Vec<u16> = Vec::new();
        for (kind, k) in ops {
            match kind {
                0 => {
                    s.insert(k);
                    let at = m.partition_point(|x| *x <= k);
                    m.insert(at, k);
                }
                1 => {
                    let at = m.partition_point(|x| *x < k);
                    let hit = m.get(at) == Some(&k);
                    if hit { m.remove(at); }
                    prop_assert_eq!(s.erase(&k), hit);
                }
                _ => {
                    let n = m.iter().filter(|x| **x == k).count();
                    m.retain(|x| *x != k);
                    prop_assert_eq!(s.erase_all(&k), n);
                }
            }
            prop_assert!(s.check().is_ok());
            prop_assert_eq!(s.count(&k), m.iter().filter(|x| **x == k).count());
        }
        prop_assert_eq!(s.to_vec(), m);
    }

    #[test]
    fn map_matches_btreemap(ops in prop::collection::vec((0u8..3, 0u32..100, any::<u32>()), 0..400)) {
        let mut s = SortedMap::<u32, u32>::new();
        let mut m = BTreeMap::new();
        for (kind, k, v) in ops {
            match kind {
                0 => prop_assert_eq!(s.insert(k, v), m.insert(k, v)),
                1 => prop_assert_eq!(s.erase(&k), m.remove(&k)),
                _ => prop_assert_eq!(*s.get_or_insert(k, v), *m.entry(k).or_insert(v)),
            }
            prop_assert!(s.check().is_ok());
            prop_assert_eq!(s.get(&k), m.get(&k));
        }
        prop_assert_eq!(s.to_vec(), m.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn utf8_round_trip(text in "\\PC{0,300}") {
        let s = Utf8String::from_utf8(text.as_bytes()).unwrap();
        prop_assert!(s.check().is_ok());
        prop_assert_eq!(s.to_bytes(), text.as_bytes().to_vec());
        prop_assert_eq!(s.size(), text.chars().count());
        prop_assert_eq!(s.byte_size(), text.len());
        for (i, c) in text.chars().enumerate() {
            prop_assert_eq!(s.get(i), Some(c));
        }
    }

    #[test]
    fn invalid_bytes_report_the_first_bad_offset(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        match std::str::from_utf8(&bytes) {
            Ok(_) => prop_assert_eq!(Utf8String::from_utf8(&bytes).unwrap().to_bytes(), bytes),
            Err(e) => prop_assert_eq!(
                Utf8String::from_utf8(&bytes).err(),
                Some(fpp::Error::InvalidUtf8 { offset: e.valid_up_to() })
            ),
        }
    }

    #[test]
    fn string_edits_match_string(ops in prop::collection::vec((0u8..5, any::<char>(), any::<usize>()), 0..200)) {
        let mut s = Utf8String::new();
        let mut m: Vec<char> = Vec::new();
        for (kind, c, i) in ops {
            let before = (s.clone(), m.clone());
            match kind {
                0 => { s += c; m.push(c); }
                1 => { s.push_front(c); m.insert(0, c); }
                2 => {
                    let i = i % (m.len() + 1);
                    prop_assert_eq!(s.substr(i).unwrap().to_string(), m[i..].iter().collect::<String>());
                }
                3 => {
                    let i = i % (m.len() + 1);
                    let mut it = s.iter_at(i);
                    it.insert(c).unwrap();
                    s = it.value();
                    m.insert(i, c);
                }
                _ => {
                    if !m.is_empty() {
                        let i = i % m.len();
                        let mut it = s.iter_at(i);
                        it.erase().unwrap();
                        s = it.into_value();
                        m.remove(i);
                    }
                }
            }
            prop_assert!(s.check().is_ok());
            prop_assert_eq!(s.to_string(), m.iter().collect::<String>());
            prop_assert_eq!(before.0.to_string(), before.1.iter().collect::<String>());
        }
    }

    #[test]
    fn concat_then_split_restores(a in 0usize..500, b in 0usize..500) {
        let x: Vector<u64> = (0..a as u64).collect();
        let y: Vector<u64> = (0..b as u64).map(|i| i + 1000).collect();
        let mut xy = x.concat(&y);
        prop_assert!(xy.check().is_ok());
        let tail = xy.split_off(a).unwrap();
        prop_assert_eq!(xy.to_vec(), x.to_vec());
        prop_assert_eq!(tail.to_vec(), y.to_vec());
        prop_assert!(xy.check().is_ok() && tail.check().is_ok());
    }
}
