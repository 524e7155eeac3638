//! Data-parallel map over independent instances. Uses rayon with the
//! `parallel` feature and a plain iterator otherwise.

/// Applies `f` to every item, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    map_sequential(items, f)
}

pub fn map_sequential<T, U>(items: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn order_preserved() {
        let xs: Vec<u64> = (0..100).collect();
        assert_eq!(super::map(&xs, |x| x * x), super::map_sequential(&xs, |x| x * x));
    }
}
