use fpp::pool::{Pool, SlotRef, SLOT_SIZE};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pool_matches_a_shadow_free_list(script in prop::collection::vec(any::<(bool, u16)>(), 1..2000)) {
        let cap = 512;
        let mut pool = Pool::new(cap).unwrap();
        let base = pool.base();
        let mut live: Vec<SlotRef> = Vec::new();
        let mut free_stack: Vec<usize> = Vec::new();
        let mut fresh = base;
        let mut allocs = 0u64;
        let mut frees = 0u64;
        let mut peak = 0u64;
        for (alloc, pick) in script {
            if alloc || live.is_empty() {
                let expect = free_stack.last().copied().unwrap_or(fresh);
                if expect == base + cap * SLOT_SIZE {
                    prop_assert!(pool.alloc().is_err());
                    continue;
                }
                if expect == fresh {
                    prop_assert_eq!(pool.slot_bytes(expect), [0u8; SLOT_SIZE]);
                }
                let s = pool.alloc().unwrap();
                prop_assert_eq!(s.addr(), expect);
                prop_assert_eq!(s.addr() % SLOT_SIZE, 0);
                if free_stack.pop().is_none() {
                    fresh += SLOT_SIZE;
                }
                // SAFETY: the slot is ours until freed.
                unsafe { s.as_ptr().add(8).write_bytes(0xAB, SLOT_SIZE - 8) };
                live.push(s);
                allocs += 1;
            } else {
                let s = live.swap_remove(pick as usize % live.len());
                let addr = s.addr();
                let old_head = pool.head();
                pool.free(s);
                prop_assert_eq!(pool.head(), addr);
                prop_assert_eq!(pool.stored_delta(addr), old_head as i64 - (addr + SLOT_SIZE) as i64);
                free_stack.push(addr);
                frees += 1;
            }
            peak = peak.max(allocs - frees);
            let st = pool.stats();
            prop_assert_eq!((st.allocations, st.deallocations, st.live, st.peak_live), (allocs, frees, allocs - frees, peak));
        }
    }
}
