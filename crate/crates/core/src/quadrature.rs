//! Cached Gauss-Legendre rules on `[-1, 1]`.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, ordered by node.
pub fn gauss_legendre(n: usize) -> Arc<Vec<(f64, f64)>> {
    type Rules = Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>;
    static CACHE: OnceLock<Rules> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
            let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(pairs)
        })
        .clone()
}

/// Pushes the rule mapped to `[a, b]` onto `out`.
pub fn push_mapped(rule: &[(f64, f64)], a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    out.extend(rule.iter().map(|&(x, w)| (mid + half * x, half * w)));
}
