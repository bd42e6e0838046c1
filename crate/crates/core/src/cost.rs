use crate::share::Assoc;

/// Exact symbol and multiplication counts for one round, from padded block shapes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CostReport {
    pub workers: usize,
    pub recovery_threshold: usize,
    /// Total symbols the master sends, `P * per_worker_in_symbols`.
    pub master_out_symbols: u64,
    pub per_worker_in_symbols: u64,
    pub per_worker_out_symbols: u64,
    /// Symbols the fusion node needs, `k * per_worker_out_symbols`.
    pub fusion_in_symbols: u64,
    pub worker_mult_count: u64,
}

impl CostReport {
    /// `parts` are the encoded block shapes one worker receives, in chain order.
    pub fn from_shapes(workers: usize, recovery_threshold: usize, parts: &[(usize, usize)]) -> CostReport {
        let per_worker_in_symbols = parts.iter().map(|&(r, c)| (r * c) as u64).sum();
        let ((or, oc), worker_mult_count) = if parts.is_empty() {
            ((0, 0), 0)
        } else {
            Assoc::for_chain(parts.len())
                .cost(parts)
                .expect("encoded block shapes are conformable")
        };
        let per_worker_out_symbols = (or * oc) as u64;
        CostReport {
            workers,
            recovery_threshold,
            master_out_symbols: workers as u64 * per_worker_in_symbols,
            per_worker_in_symbols,
            per_worker_out_symbols,
            fusion_in_symbols: recovery_threshold as u64 * per_worker_out_symbols,
            worker_mult_count,
        }
    }
}
