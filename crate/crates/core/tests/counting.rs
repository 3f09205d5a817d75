use wglab::arith::{build_mangoldt_table, integer_kth_root, MangoldtTable};
use wglab::counting::{interval_sums, representation_count, ExponentTriple};

fn points(table: &MangoldtTable<f64>, k: u32, bound: u64) -> Vec<(u64, f64)> {
    table
        .support()
        .iter()
        .map(|&(m, w)| (m.pow(k), w))
        .take_while(|&(p, _)| p <= bound)
        .collect()
}

// Enumerates the three slots in the given loop order.
fn count_in_order(n: u64, k: [u32; 3], order: [usize; 3], table: &MangoldtTable<f64>) -> f64 {
    let lists: Vec<_> = k.iter().map(|&kj| points(table, kj, n)).collect();
    let mut total = 0.0;
    for &(a, wa) in &lists[order[0]] {
        for &(b, wb) in &lists[order[1]] {
            for &(c, wc) in &lists[order[2]] {
                if a + b + c == n {
                    total += wa * wb * wc;
                }
            }
        }
    }
    total
}

#[test]
fn permutation_symmetry() {
    let table = build_mangoldt_table::<f64>(2000).unwrap();
    let orders = [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
    for k in [[2u32, 2, 2], [2, 2, 3], [3, 3, 3], [2, 3, 3]] {
        let t = ExponentTriple::<f64>::new(k[0], k[1], k[2]).unwrap();
        for n in (1..=1500u64).step_by(7) {
            let want = representation_count(n, &t, &table).unwrap();
            for order in orders {
                // Only exchanges between equal exponents leave the triple unchanged.
                let permuted: Vec<u32> = order.iter().map(|&i| k[i]).collect();
                if permuted != k {
                    continue;
                }
                let got = count_in_order(n, k, order, &table);
                assert!((got - want).abs() <= 1e-12, "k={k:?} n={n} order={order:?}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn additivity_of_interval_sums() {
    let t = ExponentTriple::<f64>::new(2, 2, 2).unwrap();
    let table = build_mangoldt_table::<f64>(integer_kth_root(20_000, 2).unwrap()).unwrap();
    for (n, h1, h2) in [(5000u64, 100u64, 250u64), (10_000, 1, 300), (7000, 500, 1)] {
        let whole = interval_sums(n, h1 + h2, &t, &table, false, 2).unwrap();
        let head = interval_sums(n, h1, &t, &table, false, 1).unwrap();
        let tail = interval_sums(n + h1, h2, &t, &table, true, 3).unwrap();
        let unweighted = head.sum_unweighted + tail.sum_unweighted;
        assert!((whole.sum_unweighted - unweighted).abs() <= 1e-9 * whole.sum_unweighted);

        // The shifted window carries weights e^{-n/(N+H1)}; reweight per n.
        let reweighted: f64 = tail
            .per_n
            .unwrap()
            .iter()
            .map(|&(m, r)| r * (-(m as f64) / n as f64).exp())
            .sum();
        let weighted = head.sum_weighted + reweighted;
        assert!((whole.sum_weighted - weighted).abs() <= 1e-9 * whole.sum_weighted);
    }
}

#[test]
fn worker_count_is_reproducible() {
    let t = ExponentTriple::<f64>::new(2, 2, 3).unwrap();
    let table = build_mangoldt_table::<f64>(400).unwrap();
    for workers in [1, 4, 7] {
        let a = interval_sums(100_000, 2000, &t, &table, false, workers).unwrap();
        let b = interval_sums(100_000, 2000, &t, &table, false, workers).unwrap();
        assert_eq!(a.sum_unweighted.to_bits(), b.sum_unweighted.to_bits());
        assert_eq!(a.sum_weighted.to_bits(), b.sum_weighted.to_bits());
    }
}
