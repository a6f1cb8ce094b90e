//! Randomized checks of the structural invariants through the public API.

use lpp_core::geodesic::{forward_surface, trace_geodesic};
use lpp_core::oracle::{max_path_weight, NormalStream};
use lpp_core::passage::{passage_constrained, passage_full, passage_time};
use lpp_core::stats::{fit_loglog, residual_identity};
use lpp_core::{Environment, LatticePoint, LogLogPoint, MomentAccumulator, StripRegion, WeightField};
use proptest::prelude::*;

fn field(seed: u64, index: u64, side: u32) -> WeightField {
    WeightField::new(seed, index, LatticePoint::diag(side))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surfaces_satisfy_the_recursion(seed in any::<u64>(), w in 1u32..40, h in 1u32..40, fx in 0.0f64..1.0, fy in 0.0f64..1.0) {
        let f = field(seed, 0, 40);
        let s = passage_full(&f, LatticePoint::ORIGIN, LatticePoint::new(w, h)).unwrap();
        let v = LatticePoint::new(1 + (fx * (w - 1) as f64) as u32, 1 + (fy * (h - 1) as f64) as u32);
        let left = s.value(LatticePoint::new(v.x - 1, v.y)).unwrap();
        let down = s.value(LatticePoint::new(v.x, v.y - 1)).unwrap();
        prop_assert_eq!(s.value(v).unwrap() - f.weight_at(v.x, v.y), left.max(down));
    }

    #[test]
    fn diagonal_passage_is_superadditive(seed in any::<u64>(), n in 2u32..60) {
        let f = field(seed, 1, n);
        let t = passage_time(&f, LatticePoint::ORIGIN, LatticePoint::diag(n)).unwrap();
        for k in 1..n {
            let kk = LatticePoint::diag(k);
            let split = passage_time(&f, LatticePoint::ORIGIN, kk).unwrap()
                + passage_time(&f, kk, LatticePoint::diag(n)).unwrap()
                - f.weight_at(k, k);
            prop_assert!(t >= split);
        }
    }

    #[test]
    fn wider_strips_never_lower_passage_times(seed in any::<u64>(), r in 1u32..50, theta in 0.05f64..3.0, factor in 1.0f64..4.0) {
        let f = field(seed, 2, r);
        let narrow = StripRegion::new(r, theta).unwrap();
        let wide = StripRegion::new(r, theta * factor).unwrap();
        let (o, d) = (LatticePoint::ORIGIN, LatticePoint::diag(r));
        if narrow.width == 0 {
            prop_assert!(passage_constrained(&f, &narrow, o, d).is_err());
            return Ok(());
        }
        let a = passage_constrained(&f, &narrow, o, d).unwrap();
        let b = passage_constrained(&f, &wide, o, d).unwrap();
        prop_assert!(a <= b);
        prop_assert!(b <= passage_time(&f, o, d).unwrap());
    }

    #[test]
    fn wavefront_and_full_grid_agree(seed in any::<u64>(), ux in 0u32..30, uy in 0u32..30, dx in 0u32..30, dy in 0u32..30) {
        let f = field(seed, 3, 60);
        let (u, v) = (LatticePoint::new(ux, uy), LatticePoint::new(ux + dx, uy + dy));
        let full = passage_full(&f, u, v).unwrap();
        prop_assert_eq!(full.value(v).unwrap().to_bits(), passage_time(&f, u, v).unwrap().to_bits());
    }

    #[test]
    fn geodesic_invariants_hold(seed in any::<u64>(), x in 0u32..80, y in 0u32..80, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let f = field(seed, 4, 80);
        let surface = forward_surface(&f, LatticePoint::diag(80)).unwrap();
        let v = LatticePoint::new(x, y);
        let g = trace_geodesic(&surface, v).unwrap();
        prop_assert!(g.validate(&f).is_ok());
        prop_assert_eq!(g.total_weight(), surface.value(v).unwrap());
        prop_assert_eq!(g.len() as u32, x + y + 1);

        // Every sub-path of a geodesic is itself optimal.
        let (i, j) = {
            let (p, q) = ((a * g.len() as f64) as usize, (b * g.len() as f64) as usize);
            (p.min(q).min(g.len() - 1), p.max(q).min(g.len() - 1))
        };
        let (p, q) = (g.vertices()[i], g.vertices()[j]);
        let sub: f64 = g.vertices()[i..=j].iter().map(|p| f.weight_at(p.x, p.y)).sum();
        prop_assert_eq!(sub, passage_time(&f, p, q).unwrap());
    }

    #[test]
    fn constrained_passage_matches_enumeration(seed in any::<u64>(), r in 2u32..5, theta in 0.3f64..2.0) {
        let f = field(seed, 5, r);
        let strip = StripRegion::new(r, theta).unwrap();
        let (o, d) = (LatticePoint::ORIGIN, LatticePoint::diag(r));
        match max_path_weight(&f, o, d, |p| strip.contains(p)) {
            Some(truth) => prop_assert_eq!(passage_constrained(&f, &strip, o, d).unwrap(), truth),
            None => {
                prop_assert_eq!(strip.width, 0);
                prop_assert!(passage_constrained(&f, &strip, o, d).is_err());
            }
        }
    }

    #[test]
    fn chunked_accumulation_matches_one_stream(seed in any::<u64>(), n in 100usize..600, cut in 1usize..97) {
        let mut g = NormalStream::new(seed);
        let rows: Vec<[f64; 2]> = (0..n).map(|_| { let z = g.normal(); [4000.0 + z, 1000.0 + z + g.normal()] }).collect();
        let mut whole = MomentAccumulator::with_batches(2, 10);
        rows.iter().for_each(|r| whole.push(r).unwrap());
        let mut merged = MomentAccumulator::with_batches(2, 10);
        for chunk in rows.chunks(cut) {
            let mut part = MomentAccumulator::with_batches(2, 10);
            chunk.iter().for_each(|r| part.push(r).unwrap());
            merged.merge(&part).unwrap();
        }
        let (a, b) = (whole.correlation(0, 1).unwrap(), merged.correlation(0, 1).unwrap());
        prop_assert!(close(a.value, b.value, 1e-10) && close(a.stderr, b.stderr, 1e-10));
        prop_assert!((-1.0..=1.0).contains(&a.value));
        for i in 0..2 {
            prop_assert!(close(whole.variance(i).unwrap().value, merged.variance(i).unwrap().value, 1e-10));
        }
        let (lhs, rhs) = residual_identity(whole.pooled(), 0, 1).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * whole.pooled().variance(0));
    }

    #[test]
    fn correlations_stay_in_range(seed in any::<u64>(), mix in -1.0f64..1.0) {
        let mut g = NormalStream::new(seed);
        let mut acc = MomentAccumulator::with_batches(2, 4);
        for _ in 0..40 {
            let z = g.normal();
            acc.push(&[z, mix * z + 1e-9 * g.normal()]).unwrap();
        }
        let rho = acc.pooled().correlation(0, 1).unwrap();
        prop_assert!((-1.0..=1.0).contains(&rho));
    }

    #[test]
    fn fit_slope_is_scale_equivariant(c in 0.01f64..100.0, b in -1.0f64..1.0, noise in prop::collection::vec(-0.1f64..0.1, 5)) {
        let xs = [16.0, 32.0, 64.0, 128.0, 256.0];
        let pts: Vec<LogLogPoint> = xs.iter().zip(&noise).map(|(&x, e)| LogLogPoint::new(x, x.powf(b) * e.exp(), 1.0)).collect();
        let scaled: Vec<LogLogPoint> = pts.iter().map(|p| LogLogPoint::new(p.x, c * p.y, p.weight)).collect();
        let (f, g) = (fit_loglog(&pts).unwrap(), fit_loglog(&scaled).unwrap());
        prop_assert!((f.slope - g.slope).abs() <= 1e-12);
        prop_assert!((g.intercept - f.intercept - c.ln()).abs() <= 1e-12);
    }

    #[test]
    fn fields_are_pure_functions_of_their_keys(seed in any::<u64>(), index in any::<u64>(), x in 0u32..1000, y in 0u32..1000) {
        let a = field(seed, index, 1000);
        let b = field(seed, index, 1000);
        prop_assert_eq!(a.weight(LatticePoint::new(x, y)).unwrap().to_bits(), b.weight(LatticePoint::new(x, y)).unwrap().to_bits());
        prop_assert_eq!(a.fork_sample(index).weight_at(x, y).to_bits(), a.weight_at(x, y).to_bits());
    }
}
