//! Derivative-free 2-D minimization: standard Nelder-Mead simplex with
//! reflection/expansion/contraction/shrink, used on the (log τ², log ψ²)
//! marginal-likelihood surface.

/// Minimize `f` from one starting point. Returns the best vertex and value.
pub(crate) fn nelder_mead_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    start: (f64, f64),
    step: f64,
    max_iter: usize,
    ftol: f64,
) -> ((f64, f64), f64) {
    let mut simplex = [
        start,
        (start.0 + step, start.1),
        (start.0, start.1 + step),
    ];
    let mut values = simplex.map(|(x, y)| f(x, y));

    for _ in 0..max_iter {
        // Order vertices best to worst.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let (best, mid, worst) = (idx[0], idx[1], idx[2]);
        if (values[worst] - values[best]).abs() < ftol {
            break;
        }
        let centroid = (
            0.5 * (simplex[best].0 + simplex[mid].0),
            0.5 * (simplex[best].1 + simplex[mid].1),
        );
        let reflect = (
            centroid.0 + (centroid.0 - simplex[worst].0),
            centroid.1 + (centroid.1 - simplex[worst].1),
        );
        let f_reflect = f(reflect.0, reflect.1);
        if f_reflect < values[best] {
            let expand = (
                centroid.0 + 2.0 * (centroid.0 - simplex[worst].0),
                centroid.1 + 2.0 * (centroid.1 - simplex[worst].1),
            );
            let f_expand = f(expand.0, expand.1);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                values[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                values[worst] = f_reflect;
            }
        } else if f_reflect < values[mid] {
            simplex[worst] = reflect;
            values[worst] = f_reflect;
        } else {
            let contract_base = if f_reflect < values[worst] {
                reflect
            } else {
                simplex[worst]
            };
            let contract = (
                centroid.0 + 0.5 * (contract_base.0 - centroid.0),
                centroid.1 + 0.5 * (contract_base.1 - centroid.1),
            );
            let f_contract = f(contract.0, contract.1);
            if f_contract < values[worst].min(f_reflect) {
                simplex[worst] = contract;
                values[worst] = f_contract;
            } else {
                // Shrink toward the best vertex.
                for i in [mid, worst] {
                    simplex[i] = (
                        simplex[best].0 + 0.5 * (simplex[i].0 - simplex[best].0),
                        simplex[best].1 + 0.5 * (simplex[i].1 - simplex[best].1),
                    );
                    values[i] = f(simplex[i].0, simplex[i].1);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..3 {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best], values[best])
}
