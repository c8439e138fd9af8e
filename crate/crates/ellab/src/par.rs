//! Internal map helpers: data-parallel via rayon when the `parallel`
//! feature is enabled, plain iteration otherwise. The `_seq` variant is
//! always sequential so callers can expose both paths for benchmarking.

pub fn map_vec<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

pub fn map_vec_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let input: Vec<u64> = (0..100).collect();
        let a = map_vec(input.clone(), |x| x * x + 1);
        let b = map_vec_seq(input, |x| x * x + 1);
        assert_eq!(a, b);
    }
}
