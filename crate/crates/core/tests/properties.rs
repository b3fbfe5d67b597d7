use proptest::prelude::*;
use spgemm_core::kernels::esc::{esc_expand, esc_radix_sort};
use spgemm_core::machine::{Cmp, IndexOp, Operand};
use spgemm_core::plan::{hash_size_schedule, plan_blocks, sort_columns};
use spgemm_core::sparse::{
    dense_oracle, generate_random, generate_synthetic, matrices_match, read_matrix_market_str,
    write_matrix_market,
};
use spgemm_core::*;

fn random_pair() -> impl Strategy<Value = (CscMatrixF64, CscMatrixF64)> {
    (1usize..30, 1usize..30, 1usize..30, 0.0f64..0.4, any::<u64>()).prop_map(|(m, k, n, d, seed)| {
        (
            generate_random(m, k, d, seed).unwrap(),
            generate_random(k, n, d, seed ^ 0x9e37).unwrap(),
        )
    })
}

fn blocks() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=16).prop_flat_map(|lo| (Just(lo), lo..=32))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_kernel_matches_the_oracle((a, b) in random_pair(), (lo, hi) in blocks(), t in 0usize..20) {
        let want = dense_oracle(&a, &b).unwrap();
        let mut e = VecEngine::new(32, 8);
        let plain = ColumnPlan::build(&a, &b, PlanConfig::blocked(lo, hi).with_max_vl(32)).unwrap();
        let hybrid = ColumnPlan::build(
            &a,
            &b,
            PlanConfig::blocked(lo, hi).with_max_vl(32).with_threshold(Threshold::Finite(t)),
        )
        .unwrap();
        let outputs = [
            spa_kernel(&a, &b, &mut e).unwrap(),
            spars_kernel(&a, &b, &plain, &mut e).unwrap(),
            hash_kernel(&a, &b, &plain, DEFAULT_HASH_C, &mut e).unwrap(),
            hybrid_kernel(&a, &b, &hybrid, Accumulator::Dense, &mut e).unwrap(),
            hybrid_kernel(&a, &b, &hybrid, Accumulator::Hash { c: DEFAULT_HASH_C }, &mut e).unwrap(),
            esc_kernel(&a, &b, &EscParams { group_threshold: t, radix: RadixPolicy::Auto }, &mut e).unwrap(),
        ];
        for out in outputs {
            prop_assert!(matrices_match(&out.matrix, &want, 1e-12));
            prop_assert!(out.report.lane_slots_active <= out.report.lane_slots_total);
        }
    }

    #[test]
    fn permutation_round_trip((a, _) in random_pair(), seed in any::<u64>()) {
        let ops: Vec<usize> = (0..a.ncols()).map(|j| (j as u64 ^ seed) as usize % 7).collect();
        let perm = sort_columns(&ops);
        let p = a.permute_columns(&perm).unwrap();
        prop_assert_eq!(p.unpermute_columns(&perm).unwrap(), a);
    }

    #[test]
    fn sorted_ops_descend_and_sort_is_stable(ops in prop::collection::vec(0usize..10, 0..60)) {
        let perm = sort_columns(&ops);
        for w in perm.windows(2) {
            let (x, y) = (ops[w[0]], ops[w[1]]);
            prop_assert!(x > y || (x == y && w[0] < w[1]));
        }
    }

    #[test]
    fn hash_sizes_dominate_block_loads(ops in prop::collection::vec(0usize..300, 1..200), (lo, hi) in blocks()) {
        let mut sorted = ops.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let bl = plan_blocks(&sorted, lo, hi, 256).unwrap();
        let sizes = hash_size_schedule(&sorted, &bl).unwrap();
        for (r, h) in bl.iter().zip(&sizes) {
            prop_assert!(h.is_power_of_two());
            prop_assert!(*h > sorted[r.start]);
        }
        prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn engine_slot_accounting(lanes in 1usize..10, vl in 0usize..40, bits in prop::collection::vec(any::<bool>(), 40)) {
        let mut e = VecEngine::new(32, lanes);
        let vl = e.set_vl(vl);
        let mask = VecMask::from_vec(bits[..vl].to_vec());
        let a = e.iota();
        let b = e.index_op(&a, IndexOp::Mul, Operand::Scalar(3), &mask).unwrap();
        let _ = e.compare(&b, Cmp::Ge, Operand::Reg(&a), &mask).unwrap();
        let r = *e.report();
        let issued = if vl == 0 { 0 } else { 3 };
        prop_assert_eq!(r.vector_instructions, issued);
        prop_assert_eq!(r.lane_slots_total, issued * vl as u64);
        prop_assert!(r.lane_slots_active <= r.lane_slots_total);
        prop_assert_eq!(e.lane_cycles(), issued * vl.div_ceil(lanes) as u64);
    }

    #[test]
    fn esc_sort_orders_by_column_then_row((a, b) in random_pair(), r in 1u32..8) {
        let mut e = VecEngine::new(16, 8);
        let t = esc_expand(&mut e, &a, &b, 0..b.ncols()).unwrap();
        let n = t.len();
        let s = esc_radix_sort(&mut e, t.clone(), a.nrows(), b.ncols(), RadixPolicy::Fixed(r)).unwrap();
        prop_assert!(s.is_sorted());
        let mut want: Vec<(usize, usize, u64)> =
            (0..n).map(|i| (t.cols[i], t.rows[i], t.values[i].to_bits())).collect();
        want.sort_by_key(|&(c, r, _)| (c, r));
        let got: Vec<_> = (0..n).map(|i| (s.cols[i], s.rows[i], s.values[i].to_bits())).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn matrix_market_round_trip((a, _) in random_pair()) {
        let back: CscMatrixF64 = read_matrix_market_str(&write_matrix_market(&a)).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn json_round_trip((a, _) in random_pair()) {
        prop_assert_eq!(CscMatrixF64::from_json(&a.to_json().unwrap()).unwrap(), a);
    }
}

#[test]
fn f32_kernels_work_too() {
    let a = generate_synthetic::<f32>(40, 3, 2).unwrap();
    let want = dense_oracle(&a, &a).unwrap();
    let p = ColumnPlan::build(&a, &a, PlanConfig::blocked(8, 8)).unwrap();
    let out = spars_kernel(&a, &a, &p, &mut VecEngine::default()).unwrap();
    assert!(matrices_match(&out.matrix, &want, 1e-5));
}
