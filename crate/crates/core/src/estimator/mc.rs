use rayon::prelude::*;

use super::report::Repetition;
use super::{Criticality, SampleSpace};
use crate::error::{Error, Result};
use crate::stream::RandomStream;

/// Counts critical points among `n` draws from the base density.
///
/// Sample `i` uses `stream.child(i)` for both its coordinates and the predicate.
pub(crate) fn count_critical<C: Criticality + ?Sized>(
    space: &SampleSpace,
    predicate: &C,
    n: usize,
    stream: &RandomStream,
) -> usize {
    (0..n)
        .into_par_iter()
        .filter(|&i| {
            let mut s = stream.child(i as u64);
            let point = space.sample(&mut s);
            predicate.is_critical(&point, &mut s)
        })
        .count()
}

/// Plain Monte Carlo: `p = #critical / n`.
pub fn mc_estimate<C: Criticality + ?Sized>(
    space: &SampleSpace,
    predicate: &C,
    n: usize,
    stream: &RandomStream,
) -> Result<Repetition> {
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    let hits = count_critical(space, predicate, n, stream);
    Ok(Repetition {
        p_hat: hits as f64 / n as f64,
        grid: None,
    })
}
