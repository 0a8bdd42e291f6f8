//! Fixed-size slot pools.
//!
//! Every slot is 64 bytes and 64-byte aligned. Free slots form a singly linked
//! list whose links are stored as offsets: the first 8 bytes of a free slot hold
//! the signed distance from the end of that slot to the next free slot. A zero
//! link therefore means "the slot right after me", so an all-zero region is
//! already a complete free list in ascending address order and needs no
//! initialization pass.
//!
//! [`Pool`] is confined to one thread. [`SharedPool`] may be used from many
//! threads and swings its head with a single compare-and-swap per operation.

use std::io;
use std::ptr::NonNull;
use std::sync::atomic::{AtomicI64, AtomicU64, Ordering};

use thiserror::Error;

/// Size and alignment of every slot, in bytes.
pub const SLOT_SIZE: usize = 64;

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("pool capacity must be positive")]
    ZeroCapacity,
    #[error("pool capacity of {0} slots is too large")]
    TooLarge(usize),
    #[error("cannot reserve pool region: {0}")]
    Reserve(#[source] io::Error),
    #[error("pool exhausted ({capacity} slots live)")]
    Exhausted { capacity: usize },
}

/// Allocation counters. Always maintained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PoolStats {
    pub allocations: u64,
    pub deallocations: u64,
    pub live: u64,
    pub peak_live: u64,
}

impl PoolStats {
    pub(crate) fn on_alloc(&mut self) {
        self.allocations += 1;
        self.live += 1;
        if self.live > self.peak_live {
            self.peak_live = self.live;
        }
    }

    pub(crate) fn on_free(&mut self) {
        self.deallocations += 1;
        self.live -= 1;
    }
}

/// Zero-filled, lazily committed memory.
struct Region {
    base: NonNull<u8>,
    bytes: usize,
}

impl Region {
    fn reserve(bytes: usize) -> Result<Region, PoolError> {
        #[cfg(unix)]
        unsafe {
            let p = libc::mmap(
                std::ptr::null_mut(),
                bytes,
                libc::PROT_READ | libc::PROT_WRITE,
                libc::MAP_PRIVATE | libc::MAP_ANONYMOUS | libc::MAP_NORESERVE,
                -1,
                0,
            );
            if p == libc::MAP_FAILED {
                return Err(PoolError::Reserve(io::Error::last_os_error()));
            }
            // mmap returns page-aligned memory, which is 64-aligned.
            Ok(Region { base: NonNull::new_unchecked(p.cast()), bytes })
        }
        #[cfg(not(unix))]
        unsafe {
            let layout = std::alloc::Layout::from_size_align(bytes, SLOT_SIZE)
                .map_err(|_| PoolError::TooLarge(bytes / SLOT_SIZE))?;
            let p = std::alloc::alloc_zeroed(layout);
            NonNull::new(p)
                .map(|base| Region { base, bytes })
                .ok_or_else(|| PoolError::Reserve(io::Error::from(io::ErrorKind::OutOfMemory)))
        }
    }
}

impl Drop for Region {
    fn drop(&mut self) {
        #[cfg(unix)]
        unsafe {
            libc::munmap(self.base.as_ptr().cast(), self.bytes);
        }
        #[cfg(not(unix))]
        unsafe {
            let layout = std::alloc::Layout::from_size_align_unchecked(self.bytes, SLOT_SIZE);
            std::alloc::dealloc(self.base.as_ptr(), layout);
        }
    }
}

fn region_bytes(capacity: usize) -> Result<usize, PoolError> {
    if capacity == 0 {
        return Err(PoolError::ZeroCapacity);
    }
    capacity
        .checked_mul(SLOT_SIZE)
        .filter(|b| *b <= isize::MAX as usize)
        .ok_or(PoolError::TooLarge(capacity))
}

/// Handle to one live slot. Not copyable: handing it back to [`Pool::free`]
/// consumes it.
#[derive(Debug, PartialEq, Eq)]
pub struct SlotRef {
    ptr: NonNull<u8>,
}

// SAFETY: a SlotRef is an exclusive claim on its slot; moving it to another
// thread is how SharedPool slots are meant to travel.
unsafe impl Send for SlotRef {}

impl SlotRef {
    pub fn addr(&self) -> usize {
        self.ptr.as_ptr() as usize
    }

    pub fn as_ptr(&self) -> *mut u8 {
        self.ptr.as_ptr()
    }

    /// Rebuilds a handle from a pointer previously obtained with [`SlotRef::into_raw`].
    ///
    /// # Safety
    /// `ptr` must come from `into_raw` on a slot that is still live.
    pub unsafe fn from_raw(ptr: NonNull<u8>) -> SlotRef {
        SlotRef { ptr }
    }

    pub fn into_raw(self) -> NonNull<u8> {
        self.ptr
    }
}

/// Single-threaded slot pool.
pub struct Pool {
    region: Region,
    capacity: usize,
    head: usize,
    stats: PoolStats,
    #[cfg(debug_assertions)]
    live_bits: Vec<u64>,
}

impl Pool {
    pub fn new(capacity: usize) -> Result<Pool, PoolError> {
        let bytes = region_bytes(capacity)?;
        let region = Region::reserve(bytes)?;
        let head = region.base.as_ptr() as usize;
        Ok(Pool {
            region,
            capacity,
            head,
            stats: PoolStats::default(),
            #[cfg(debug_assertions)]
            live_bits: Vec::new(),
        })
    }

    pub fn base(&self) -> usize {
        self.region.base.as_ptr() as usize
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Address of the first free slot. Equals `base + 64 * capacity` when exhausted.
    pub fn head(&self) -> usize {
        self.head
    }

    pub fn stats(&self) -> PoolStats {
        self.stats
    }

    pub fn contains(&self, addr: usize) -> bool {
        addr >= self.base() && addr < self.end() && (addr - self.base()) % SLOT_SIZE == 0
    }

    fn end(&self) -> usize {
        self.base() + self.capacity * SLOT_SIZE
    }

    pub fn alloc(&mut self) -> Result<SlotRef, PoolError> {
        self.alloc_raw().map(|ptr| SlotRef { ptr })
    }

    pub fn free(&mut self, slot: SlotRef) {
        // SAFETY: a SlotRef is only produced by alloc and is consumed here.
        unsafe { self.free_raw(slot.ptr) }
    }

    /// Pops the head slot. The returned memory is uninitialized from the
    /// caller's point of view (its first word holds a stale link).
    #[inline]
    pub fn alloc_raw(&mut self) -> Result<NonNull<u8>, PoolError> {
        let slot = self.head;
        if slot == self.end() {
            return Err(PoolError::Exhausted { capacity: self.capacity });
        }
        // SAFETY: slot lies inside the region and is free, so its first word is a link.
        let delta = unsafe { (slot as *const i64).read() };
        self.head = (slot as isize + SLOT_SIZE as isize + delta as isize) as usize;
        self.stats.on_alloc();
        #[cfg(debug_assertions)]
        self.mark(slot, true);
        // SAFETY: inside a live mapping, never null.
        Ok(unsafe { NonNull::new_unchecked(slot as *mut u8) })
    }

    /// Pushes a slot back onto the free list.
    ///
    /// # Safety
    /// `ptr` must have been returned by `alloc_raw` on this pool and not freed since.
    #[inline]
    pub unsafe fn free_raw(&mut self, ptr: NonNull<u8>) {
        let slot = ptr.as_ptr() as usize;
        debug_assert!(self.contains(slot), "slot {slot:#x} does not belong to this pool");
        #[cfg(debug_assertions)]
        self.mark(slot, false);
        let delta = self.head as i64 - (slot as i64 + SLOT_SIZE as i64);
        (slot as *mut i64).write(delta);
        self.head = slot;
        self.stats.on_free();
    }

    #[cfg(debug_assertions)]
    fn mark(&mut self, slot: usize, live: bool) {
        let i = (slot - self.base()) / SLOT_SIZE;
        let (w, b) = (i / 64, 1u64 << (i % 64));
        if w >= self.live_bits.len() {
            self.live_bits.resize(w + 1, 0);
        }
        let was_live = self.live_bits[w] & b != 0;
        if live {
            assert!(!was_live, "slot {slot:#x} handed out twice");
            self.live_bits[w] |= b;
        } else {
            assert!(was_live, "double free of slot {slot:#x}");
            self.live_bits[w] &= !b;
        }
    }

    /// Whether a slot is currently allocated. Only tracked in debug builds.
    #[cfg(debug_assertions)]
    pub fn is_live(&self, addr: usize) -> bool {
        let i = (addr - self.base()) / SLOT_SIZE;
        self.live_bits.get(i / 64).is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    /// Raw bytes of any slot in the region, for inspecting the free-list encoding.
    pub fn slot_bytes(&self, addr: usize) -> [u8; SLOT_SIZE] {
        assert!(self.contains(addr), "address {addr:#x} is not a slot of this pool");
        let mut out = [0u8; SLOT_SIZE];
        // SAFETY: addr is a slot inside the mapping.
        unsafe { std::ptr::copy_nonoverlapping(addr as *const u8, out.as_mut_ptr(), SLOT_SIZE) };
        out
    }

    /// The link word stored in a (free) slot.
    pub fn stored_delta(&self, addr: usize) -> i64 {
        let b = self.slot_bytes(addr);
        i64::from_ne_bytes(b[..8].try_into().unwrap())
    }
}

// Packed head word for SharedPool: low 32 bits slot index, high 32 bits a tag
// bumped on every update so a stale head can never be swung back in (ABA).
const INDEX_MASK: u64 = 0xffff_ffff;

/// Pool that may be shared between threads.
///
/// The free list has the same encoding as [`Pool`]. Each alloc and free
/// publishes the new head with exactly one successful compare-and-swap.
pub struct SharedPool {
    region: Region,
    capacity: usize,
    head: AtomicU64,
    allocations: AtomicU64,
    deallocations: AtomicU64,
    peak_live: AtomicU64,
}

// SAFETY: slots are handed out exclusively; all shared state is atomic.
unsafe impl Send for SharedPool {}
unsafe impl Sync for SharedPool {}

impl SharedPool {
    pub fn new(capacity: usize) -> Result<SharedPool, PoolError> {
        if capacity >= INDEX_MASK as usize {
            return Err(PoolError::TooLarge(capacity));
        }
        let region = Region::reserve(region_bytes(capacity)?)?;
        Ok(SharedPool {
            region,
            capacity,
            head: AtomicU64::new(0),
            allocations: AtomicU64::new(0),
            deallocations: AtomicU64::new(0),
            peak_live: AtomicU64::new(0),
        })
    }

    pub fn base(&self) -> usize {
        self.region.base.as_ptr() as usize
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn link(&self, index: u64) -> &AtomicI64 {
        // SAFETY: index < capacity, slot start is 64-aligned.
        unsafe { &*((self.base() + index as usize * SLOT_SIZE) as *const AtomicI64) }
    }

    pub fn alloc(&self) -> Result<SlotRef, PoolError> {
        let mut cur = self.head.load(Ordering::Acquire);
        loop {
            let index = cur & INDEX_MASK;
            if index as usize == self.capacity {
                return Err(PoolError::Exhausted { capacity: self.capacity });
            }
            // May read a link that a concurrent winner is overwriting; the tag
            // makes the CAS below fail in that case.
            let delta = self.link(index).load(Ordering::Relaxed);
            let next = (index as i64 + 1 + delta / SLOT_SIZE as i64) as u64;
            let new = ((cur >> 32).wrapping_add(1) << 32) | next;
            match self.head.compare_exchange_weak(cur, new, Ordering::AcqRel, Ordering::Acquire) {
                Ok(_) => break,
                Err(seen) => cur = seen,
            }
        }
        let allocs = self.allocations.fetch_add(1, Ordering::Relaxed) + 1;
        let live = allocs.saturating_sub(self.deallocations.load(Ordering::Relaxed));
        self.peak_live.fetch_max(live, Ordering::Relaxed);
        let addr = self.base() + (cur & INDEX_MASK) as usize * SLOT_SIZE;
        // SAFETY: inside the mapping.
        Ok(SlotRef { ptr: unsafe { NonNull::new_unchecked(addr as *mut u8) } })
    }

    pub fn free(&self, slot: SlotRef) {
        let addr = slot.addr();
        assert!(
            addr >= self.base() && addr < self.base() + self.capacity * SLOT_SIZE,
            "slot {addr:#x} does not belong to this pool"
        );
        let index = ((addr - self.base()) / SLOT_SIZE) as u64;
        let mut cur = self.head.load(Ordering::Acquire);
        loop {
            let delta = ((cur & INDEX_MASK) as i64 - (index as i64 + 1)) * SLOT_SIZE as i64;
            self.link(index).store(delta, Ordering::Relaxed);
            let new = ((cur >> 32).wrapping_add(1) << 32) | index;
            match self.head.compare_exchange_weak(cur, new, Ordering::AcqRel, Ordering::Acquire) {
                Ok(_) => break,
                Err(seen) => cur = seen,
            }
        }
        self.deallocations.fetch_add(1, Ordering::Relaxed);
    }

    pub fn head(&self) -> usize {
        self.base() + (self.head.load(Ordering::Acquire) & INDEX_MASK) as usize * SLOT_SIZE
    }

    pub fn stored_delta(&self, addr: usize) -> i64 {
        self.link(((addr - self.base()) / SLOT_SIZE) as u64).load(Ordering::Relaxed)
    }

    /// Snapshot of the counters. `live` is derived, so it is exact once the
    /// pool is quiescent.
    pub fn stats(&self) -> PoolStats {
        let allocations = self.allocations.load(Ordering::Relaxed);
        let deallocations = self.deallocations.load(Ordering::Relaxed);
        let live = allocations.saturating_sub(deallocations);
        PoolStats {
            allocations,
            deallocations,
            live,
            peak_live: self.peak_live.load(Ordering::Relaxed).max(live),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn fresh_pool_hands_out_ascending_slots() {
        let mut p = Pool::new(4).unwrap();
        let base = p.base();
        let got: Vec<usize> = (0..4).map(|_| p.alloc().unwrap().addr()).collect();
        assert_eq!(got, vec![base, base + 64, base + 128, base + 192]);
        assert!(matches!(p.alloc(), Err(PoolError::Exhausted { capacity: 4 })));
    }

    #[test]
    fn single_slot_is_reused() {
        let mut p = Pool::new(1).unwrap();
        let a = p.alloc().unwrap();
        let addr = a.addr();
        p.free(a);
        assert_eq!(p.alloc().unwrap().addr(), addr);
    }

    #[test]
    fn freed_slot_comes_back_first() {
        let mut p = Pool::new(4).unwrap();
        let s: Vec<SlotRef> = (0..4).map(|_| p.alloc().unwrap()).collect();
        let third = s[2].addr();
        let mut s = s.into_iter();
        let (_a, _b, c, _d) = (s.next(), s.next(), s.next().unwrap(), s.next());
        p.free(c);
        assert_eq!(p.alloc().unwrap().addr(), third);
    }

    #[test]
    fn alloc_alloc_free_alloc() {
        let mut p = Pool::new(8).unwrap();
        let a1 = p.alloc().unwrap();
        let a1_addr = a1.addr();
        let _a2 = p.alloc().unwrap();
        p.free(a1);
        assert_eq!(p.alloc().unwrap().addr(), a1_addr);
    }

    #[test]
    fn drain_and_refill_reverses_order() {
        let mut p = Pool::new(4).unwrap();
        let slots: Vec<SlotRef> = (0..4).map(|_| p.alloc().unwrap()).collect();
        let addrs: Vec<usize> = slots.iter().map(SlotRef::addr).collect();
        for s in slots {
            p.free(s);
        }
        let again: Vec<usize> = (0..4).map(|_| p.alloc().unwrap().addr()).collect();
        assert_eq!(again, vec![addrs[3], addrs[2], addrs[1], addrs[0]]);
    }

    #[test]
    fn free_stores_offset_to_previous_head() {
        let mut p = Pool::new(8).unwrap();
        let a = p.alloc().unwrap();
        let b = p.alloc().unwrap();
        let (a_addr, b_addr) = (a.addr(), b.addr());
        let head_before = p.head();
        p.free(a);
        assert_eq!(a_addr as i64 + 64 + p.stored_delta(a_addr), head_before as i64);
        assert_eq!(p.stored_delta(a_addr), 64);
        let head_before = p.head();
        p.free(b);
        assert_eq!(b_addr as i64 + 64 + p.stored_delta(b_addr), head_before as i64);
        assert_eq!(p.stored_delta(b_addr), -128);
        assert_eq!(&p.slot_bytes(b_addr)[..8], &(-128i64).to_ne_bytes());
    }

    #[test]
    fn stats_track_live_count() {
        let mut p = Pool::new(8).unwrap();
        assert_eq!(p.stats(), PoolStats::default());
        let a = p.alloc().unwrap();
        let _b = p.alloc().unwrap();
        let _c = p.alloc().unwrap();
        p.free(a);
        let s = p.stats();
        assert_eq!((s.allocations, s.deallocations, s.live, s.peak_live), (3, 1, 2, 3));
    }

    #[test]
    fn random_interleaving_never_duplicates_live_slots() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let mut p = Pool::new(16).unwrap();
        let mut live: Vec<SlotRef> = Vec::new();
        let mut shadow = HashSet::new();
        for _ in 0..1000 {
            if live.len() < 16 && (live.is_empty() || rng.gen_bool(0.5)) {
                let s = p.alloc().unwrap();
                assert_eq!(s.addr() % 64, 0);
                assert!(shadow.insert(s.addr()), "slot handed out twice");
                live.push(s);
            } else {
                let s = live.swap_remove(rng.gen_range(0..live.len()));
                shadow.remove(&s.addr());
                p.free(s);
            }
            assert_eq!(p.stats().live as usize, shadow.len());
        }
    }

    #[test]
    #[cfg(debug_assertions)]
    #[should_panic(expected = "double free")]
    fn double_free_is_caught() {
        let mut p = Pool::new(2).unwrap();
        let s = p.alloc().unwrap();
        let raw = s.into_raw();
        unsafe {
            p.free_raw(raw);
            p.free_raw(raw);
        }
    }

    #[test]
    fn shared_pool_matches_single_threaded_encoding() {
        let p = SharedPool::new(4).unwrap();
        let base = p.base();
        let a = p.alloc().unwrap();
        let b = p.alloc().unwrap();
        assert_eq!((a.addr(), b.addr()), (base, base + 64));
        let a_addr = a.addr();
        p.free(a);
        assert_eq!(p.stored_delta(a_addr), 64);
        assert_eq!(p.alloc().unwrap().addr(), a_addr);
    }

    #[test]
    fn shared_pool_survives_concurrent_churn() {
        let p = SharedPool::new(1024).unwrap();
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| {
                    let mut mine = Vec::new();
                    for i in 0..20_000 {
                        if i % 3 == 2 || mine.len() == 64 {
                            if let Some(x) = mine.pop() {
                                p.free(x);
                            }
                        } else {
                            mine.push(p.alloc().unwrap());
                        }
                    }
                    for x in mine {
                        p.free(x);
                    }
                });
            }
        });
        let st = p.stats();
        assert_eq!(st.live, 0);
        assert!(st.peak_live <= 256);
        // Every slot can still be drawn exactly once.
        let mut seen = HashSet::new();
        for _ in 0..1024 {
            assert!(seen.insert(p.alloc().unwrap().addr()));
        }
        assert!(p.alloc().is_err());
    }
}
