use fpp::{heap, Cursor, End, FingerTree, SortedSet, Utf8String, Vector};

fn a() -> Vector<u64> {
    (1..=8).chain(10..=29).collect()
}

#[test]
fn gapped_vector_shape() {
    assert_eq!(
        a().dump(),
        "(deep 28 (finger 6 [1 2 3 4 5 6]) (finger 22 [7 8 10 11 12 13] [14 15 16 17 18 19] [20 21 22 23 24 25] [26 27 28 29]))"
    );
}

#[test]
fn push_back_copies_three_nodes() {
    let a = a();
    let mut b = a.clone();
    let before = heap::allocations();
    b.push_back(30);
    assert_eq!(heap::allocations() - before, 3);
    assert_eq!(b.back(), Some(&30));
    assert_eq!(a.len(), 28);
    assert_eq!(
        b.dump(),
        "(deep 29 (finger 6 [1 2 3 4 5 6]) (finger 23 [7 8 10 11 12 13] [14 15 16 17 18 19] [20 21 22 23 24 25] [26 27 28 29 30]))"
    );
}

#[test]
fn cursor_insert_nine() {
    let a = a();
    let z = a.iter_at(7);
    assert_eq!(z.get(), Some(&8));
    let mut y = z.clone();
    y.advance().unwrap();
    y.insert(9).unwrap();
    assert_eq!(y.value().to_vec(), (1..=29).collect::<Vec<_>>());
    assert_eq!(y.get(), Some(&10));
    assert_eq!(z.get(), Some(&8));
    assert_eq!(z.value(), a);
    assert_eq!(a.to_vec(), (1..=8).chain(10..=29).collect::<Vec<_>>());
    y.value().check().unwrap();
}

#[test]
fn erase_loop_against_the_end_sentinel() {
    let s = Utf8String::from("héllo wörld");
    let mut i = s.begin();
    while i != End {
        if i.get().unwrap() as u32 >= 0x7F {
            i.erase().unwrap();
        } else {
            i.advance().unwrap();
        }
    }
    assert_eq!(i.value(), "hllo wrld");
    assert_eq!(s, "héllo wörld");
}

#[test]
fn sorted_dump_shows_rank_and_max_key() {
    let s: SortedSet<u64> = [5, 3, 9, 1].into_iter().collect();
    assert_eq!(s.dump(), "[1 3 5 9]");
    let big: SortedSet<u64> = (0..10).collect();
    assert_eq!(big.dump(), "(deep 10@9 (finger 4@3 [0 1 2 3]) (finger 6@9 [4 5 6 7] [8 9]))");
}

#[test]
fn string_dump_counts_scalars_and_bytes() {
    let s = Utf8String::from("héllo");
    assert_eq!(s.dump(), "[104 195 169 108 108 111]");
    let t = Utf8String::from("é".repeat(25).as_str());
    assert_eq!(t.dump().split_whitespace().take(2).collect::<Vec<_>>(), vec!["(deep", "25/50"]);
}

#[test]
fn empty_dump() {
    assert_eq!(FingerTree::<fpp::measure::Seq<u64>>::new().dump(), "(empty)");
}

#[test]
fn cursor_on_raw_tree() {
    let t: FingerTree<fpp::measure::Seq<u64>> = (0..50).collect();
    let c = Cursor::<_>::new(&t, 49);
    assert_eq!(c.get(), Some(&49));
}
