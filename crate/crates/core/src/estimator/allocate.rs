/// Splits `budget` samples across cells in proportion to `densities`.
///
/// Each cell first gets `floor(budget * g)`; the shortfall goes one sample at a
/// time to the largest fractional remainders (ties to the lower index). When
/// the budget covers every cell, empty cells then take one sample each from the
/// currently largest allocation, so no cell is left unsampled.
pub fn allocate_samples(budget: usize, densities: &[f64]) -> Vec<usize> {
    if densities.is_empty() {
        return Vec::new();
    }
    let exact: Vec<f64> = densities.iter().map(|g| budget as f64 * g.max(0.0)).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();

    if assigned < budget {
        let mut order: Vec<usize> = (0..densities.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &cell in order.iter().cycle().take(budget - assigned) {
            counts[cell] += 1;
        }
    } else if assigned > budget {
        // only reachable when densities sum above 1
        let mut excess = assigned - budget;
        while excess > 0 {
            let cell = argmax(&counts);
            counts[cell] -= 1;
            excess -= 1;
        }
    }

    if budget >= densities.len() {
        while let Some(empty) = counts.iter().position(|&c| c == 0) {
            let donor = argmax(&counts);
            counts[donor] -= 1;
            counts[empty] += 1;
        }
    }
    counts
}

fn argmax(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}
