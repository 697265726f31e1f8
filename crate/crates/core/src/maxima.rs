//! Plateau-aware local maxima on arbitrary neighborhoods.

/// Finds local maxima of `values` over the neighborhood relation given by
/// `neighbors`.
///
/// Nodes joined by a chain of neighbor pairs differing by less than
/// `margin` form a plateau. A plateau is a maximum when every neighbor
/// outside it is lower by at least `margin`; it is reported once, by its
/// lowest index. Non-finite values never belong to a maximum and are
/// ignored as neighbors.
pub(crate) fn plateau_maxima<F>(values: &[f64], margin: f64, mut neighbors: F) -> Vec<usize>
where
    F: FnMut(usize, &mut Vec<usize>),
{
    let n = values.len();
    let mut component = vec![usize::MAX; n];
    let mut nbrs = Vec::new();
    let mut stack = Vec::new();
    let mut members = Vec::new();
    let mut out = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX || !values[start].is_finite() {
            continue;
        }
        component[start] = start;
        stack.push(start);
        members.clear();
        let mut is_max = true;
        while let Some(a) = stack.pop() {
            members.push(a);
            neighbors(a, &mut nbrs);
            for &b in &nbrs {
                if !values[b].is_finite() {
                    continue;
                }
                let diff = values[b] - values[a];
                if diff.abs() < margin {
                    if component[b] == usize::MAX {
                        component[b] = start;
                        stack.push(b);
                    }
                } else if diff > 0.0 {
                    is_max = false;
                }
            }
        }
        if is_max {
            out.push(*members.iter().min().expect("plateau has a member"));
        }
    }
    out
}
