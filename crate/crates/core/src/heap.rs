//! Per-thread node heap backing every tree and iterator node.
//!
//! Each thread lazily creates its own [`Pool`]. The backend can be switched to
//! the global allocator with `FPP_ALLOC=system` (or [`set_allocator`]); both
//! backends keep the same counters. `FPP_POOL_SLOTS` overrides the pool size and
//! `FPP_DESTRUCTIVE=0` turns off in-place reuse of uniquely owned nodes.
//!
//! Nodes never leave the thread that allocated them.

use std::alloc::{self, Layout};
use std::cell::{Cell, UnsafeCell};
use std::fmt;
use std::ptr::NonNull;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pool::{Pool, PoolStats, SLOT_SIZE};

/// Slots reserved per thread unless `FPP_POOL_SLOTS` says otherwise (1 GiB of address space).
pub const DEFAULT_POOL_SLOTS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocatorKind {
    Pool,
    System,
}

impl FromStr for AllocatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pool" => Ok(AllocatorKind::Pool),
            "system" => Ok(AllocatorKind::System),
            other => Err(format!("unknown allocator {other:?} (expected pool or system)")),
        }
    }
}

impl fmt::Display for AllocatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AllocatorKind::Pool => "pool",
            AllocatorKind::System => "system",
        })
    }
}

/// Allocator selected by `FPP_ALLOC`, defaulting to the pool.
pub fn allocator_from_env() -> AllocatorKind {
    std::env::var("FPP_ALLOC").ok().and_then(|v| v.parse().ok()).unwrap_or(AllocatorKind::Pool)
}

fn pool_slots_from_env() -> usize {
    std::env::var("FPP_POOL_SLOTS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|n| *n > 0)
        .unwrap_or(DEFAULT_POOL_SLOTS)
}

fn destructive_from_env() -> bool {
    !matches!(std::env::var("FPP_DESTRUCTIVE").as_deref().map(str::trim), Ok("0" | "off" | "false"))
}

const SLOT_LAYOUT: Layout = match Layout::from_size_align(SLOT_SIZE, SLOT_SIZE) {
    Ok(l) => l,
    Err(_) => panic!("bad slot layout"),
};

struct Heap {
    kind: Cell<AllocatorKind>,
    pool: UnsafeCell<Option<Pool>>,
    slots: Cell<usize>,
    system: Cell<PoolStats>,
    destructive: Cell<bool>,
}

impl Heap {
    fn from_env() -> Heap {
        Heap {
            kind: Cell::new(allocator_from_env()),
            pool: UnsafeCell::new(None),
            slots: Cell::new(pool_slots_from_env()),
            system: Cell::new(PoolStats::default()),
            destructive: Cell::new(destructive_from_env()),
        }
    }

    #[allow(clippy::mut_from_ref)]
    fn pool(&self) -> &mut Pool {
        // SAFETY: thread-local and never re-entered while the borrow is alive.
        let slot = unsafe { &mut *self.pool.get() };
        slot.get_or_insert_with(|| {
            Pool::new(self.slots.get()).unwrap_or_else(|e| panic!("cannot create node pool: {e}"))
        })
    }

    fn stats(&self) -> PoolStats {
        match self.kind.get() {
            AllocatorKind::System => self.system.get(),
            AllocatorKind::Pool => unsafe { (*self.pool.get()).as_ref().map(Pool::stats).unwrap_or_default() },
        }
    }
}

impl Drop for Heap {
    fn drop(&mut self) {
        // Values that outlive the thread-local (e.g. leaked into another
        // thread-local's destructor) must keep pointing at mapped memory.
        if let Some(pool) = self.pool.get_mut().take() {
            if pool.stats().live > 0 {
                std::mem::forget(pool);
            }
        }
    }
}

thread_local! {
    static HEAP: Heap = Heap::from_env();
}

/// Allocates one 64-byte, 64-aligned slot. Panics if the backend is exhausted.
#[inline]
pub(crate) fn alloc_slot() -> NonNull<u8> {
    HEAP.with(|h| match h.kind.get() {
        AllocatorKind::Pool => h.pool().alloc_raw().unwrap_or_else(|e| panic!("{e}")),
        AllocatorKind::System => {
            // SAFETY: non-zero size layout.
            let p = unsafe { alloc::alloc(SLOT_LAYOUT) };
            let Some(p) = NonNull::new(p) else { alloc::handle_alloc_error(SLOT_LAYOUT) };
            let mut s = h.system.get();
            s.on_alloc();
            h.system.set(s);
            p
        }
    })
}

/// Returns a slot obtained from [`alloc_slot`] on this thread.
///
/// # Safety
/// `ptr` must be live and allocated by this thread's heap.
#[inline]
pub(crate) unsafe fn free_slot(ptr: NonNull<u8>) {
    // After the thread-local is gone the slot is simply leaked.
    let _ = HEAP.try_with(|h| match h.kind.get() {
        AllocatorKind::Pool => h.pool().free_raw(ptr),
        AllocatorKind::System => {
            alloc::dealloc(ptr.as_ptr(), SLOT_LAYOUT);
            let mut s = h.system.get();
            s.on_free();
            h.system.set(s);
        }
    });
}

/// Counters of this thread's node heap.
pub fn stats() -> PoolStats {
    HEAP.with(Heap::stats)
}

/// Nodes currently live on this thread.
pub fn live_nodes() -> u64 {
    stats().live
}

/// Total allocations on this thread so far.
pub fn allocations() -> u64 {
    stats().allocations
}

pub fn allocator() -> AllocatorKind {
    HEAP.with(|h| h.kind.get())
}

/// Switches this thread's backend and starts fresh counters. Only allowed while
/// no node is live.
pub fn set_allocator(kind: AllocatorKind) -> Result<()> {
    HEAP.with(|h| {
        let live = h.stats().live;
        if live > 0 {
            return Err(Error::HeapBusy { live });
        }
        // SAFETY: no live nodes, so nothing points into the pool.
        unsafe { *h.pool.get() = None };
        h.system.set(PoolStats::default());
        h.kind.set(kind);
        Ok(())
    })
}

/// Discards this thread's pool (if any) and zeroes the counters. Only allowed
/// while no node is live.
pub fn reset() -> Result<()> {
    set_allocator(allocator())
}

/// Like [`reset`] but also sets the pool size used when the pool is next created.
pub fn reset_with_slots(slots: usize) -> Result<()> {
    reset()?;
    HEAP.with(|h| h.slots.set(slots.max(1)));
    Ok(())
}

/// Whether uniquely owned nodes are updated in place.
#[inline]
pub fn destructive_updates() -> bool {
    HEAP.with(|h| h.destructive.get())
}

pub fn set_destructive_updates(on: bool) {
    HEAP.with(|h| h.destructive.set(on));
}

/// Runs `f` with destructive updates forced on or off, restoring the previous setting.
pub fn with_destructive_updates<R>(on: bool, f: impl FnOnce() -> R) -> R {
    struct Restore(bool);
    impl Drop for Restore {
        fn drop(&mut self) {
            set_destructive_updates(self.0);
        }
    }
    let _restore = Restore(destructive_updates());
    set_destructive_updates(on);
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_backend_counts_like_the_pool() {
        std::thread::spawn(|| {
            set_allocator(AllocatorKind::System).unwrap();
            let a = alloc_slot();
            assert_eq!(a.as_ptr() as usize % 64, 0);
            let b = alloc_slot();
            unsafe { free_slot(a) };
            let s = stats();
            assert_eq!((s.allocations, s.deallocations, s.live, s.peak_live), (2, 1, 1, 2));
            assert!(matches!(set_allocator(AllocatorKind::Pool), Err(Error::HeapBusy { live: 1 })));
            unsafe { free_slot(b) };
            set_allocator(AllocatorKind::Pool).unwrap();
            assert_eq!(stats(), PoolStats::default());
        })
        .join()
        .unwrap();
    }

    #[test]
    fn pool_backend_is_lifo() {
        std::thread::spawn(|| {
            set_allocator(AllocatorKind::Pool).unwrap();
            let a = alloc_slot();
            let b = alloc_slot();
            assert_eq!(b.as_ptr() as usize, a.as_ptr() as usize + 64);
            unsafe { free_slot(a) };
            let c = alloc_slot();
            assert_eq!(c, a);
            unsafe {
                free_slot(b);
                free_slot(c);
            }
        })
        .join()
        .unwrap();
    }

    #[test]
    fn parse_allocator_names() {
        assert_eq!("pool".parse::<AllocatorKind>(), Ok(AllocatorKind::Pool));
        assert_eq!(" System ".parse::<AllocatorKind>(), Ok(AllocatorKind::System));
        assert!("jemalloc".parse::<AllocatorKind>().is_err());
    }

    #[test]
    fn destructive_toggle_restores() {
        let before = destructive_updates();
        with_destructive_updates(!before, || assert_eq!(destructive_updates(), !before));
        assert_eq!(destructive_updates(), before);
    }
}
