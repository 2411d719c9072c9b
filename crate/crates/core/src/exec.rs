//! Fork-join hook used by the ensemble and sweep drivers.
//!
//! Reductions in this crate are written as fixed binary trees over sample
//! indices. The tree shape depends only on the number of leaves, so swapping
//! the executor (sequential, thread pool with any worker count) never changes
//! the floating-point result.

/// Runs two closures, possibly in parallel, and returns both results.
pub trait Join: Sync {
    fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send;
}

/// Runs everything on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Join for Sequential {
    fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        let ra = a();
        let rb = b();
        (ra, rb)
    }
}

/// Pairwise (tree) reduction over `lo..hi`.
///
/// `leaf(k)` produces the value for index `k`; `merge(left, right)` combines two
/// adjacent subranges. The split point is always the midpoint, independent of
/// the executor.
pub fn tree_reduce<E, T, L, M>(exec: &E, lo: usize, hi: usize, leaf: &L, merge: &M) -> T
where
    E: Join,
    T: Send,
    L: Fn(usize) -> T + Sync,
    M: Fn(T, T) -> T + Sync,
{
    assert!(lo < hi, "empty reduction range");
    if hi - lo == 1 {
        return leaf(lo);
    }
    let mid = lo + (hi - lo) / 2;
    let (a, b) = exec.join(|| tree_reduce(exec, lo, mid, leaf, merge), || tree_reduce(exec, mid, hi, leaf, merge));
    merge(a, b)
}

/// Maps `f` over `0..n` and returns results in index order.
pub fn ordered_map<E, T, F>(exec: &E, n: usize, f: &F) -> alloc::vec::Vec<T>
where
    E: Join,
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if n == 0 {
        return alloc::vec::Vec::new();
    }
    tree_reduce(exec, 0, n, &|k| alloc::vec![f(k)], &|mut a: alloc::vec::Vec<T>, mut b: alloc::vec::Vec<T>| {
        a.append(&mut b);
        a
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_reduce_sums_in_fixed_shape() {
        let s = tree_reduce(&Sequential, 0, 10, &|k| k as u64, &|a, b| a + b);
        assert_eq!(s, 45);
    }

    #[test]
    fn ordered_map_keeps_order() {
        let v = ordered_map(&Sequential, 7, &|k| k * k);
        assert_eq!(v, alloc::vec![0, 1, 4, 9, 16, 25, 36]);
    }
}
