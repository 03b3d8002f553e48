use nalgebra::DMatrix;
use rsc_core::sketch::dense_uncorrected;
use rsc_core::{
    build_operator, dense_reference, model_preset, population_pi, sample_msbm, sample_mscbm, sparsify, SamplingConfig,
    Variant,
};

#[test]
fn sampled_adjacency_is_unbiased() {
    let net = sample_msbm(&model_preset(1, 60, 2, 0.5).unwrap(), 3).unwrap();
    let p = 0.6;
    let r = 500;
    let n = net.n();
    let mut sums = vec![DMatrix::<f64>::zeros(n, n); net.num_layers()];
    for draw in 0..r {
        let s = sparsify(&net, SamplingConfig::new(p, 1000 + draw).unwrap()).unwrap();
        for (l, ly) in s.layers().iter().enumerate() {
            for (i, j, v) in ly.entries() {
                sums[l][(i, j)] += v;
            }
        }
    }
    let tol = 4.0 * ((1.0 / p - 1.0) / r as f64).sqrt();
    let mut checked = 0;
    for (l, sum) in sums.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let mean = sum[(i, j)] / r as f64;
                let a = net.layer(l).get(i, j);
                assert!((mean - a).abs() <= tol, "layer {l} ({i},{j}): {mean} vs {a}");
                checked += usize::from(a == 1.0);
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn directed_sampling_is_unbiased() {
    let net = sample_mscbm(&model_preset(4, 40, 2, 0.5).unwrap(), 8).unwrap();
    let p = 0.5;
    let r = 500;
    let mut sum = DMatrix::<f64>::zeros(40, 40);
    for draw in 0..r {
        let s = sparsify(&net, SamplingConfig::new(p, draw).unwrap()).unwrap();
        for (i, j, v) in s.layer(1).entries() {
            sum[(i, j)] += v;
        }
    }
    let tol = 4.0 * ((1.0 / p - 1.0) / r as f64).sqrt();
    for i in 0..40 {
        for j in 0..40 {
            assert!((sum[(i, j)] / r as f64 - net.layer(1).get(i, j)).abs() <= tol);
        }
    }
}

#[test]
fn degree_correction_moves_the_aggregate_toward_population() {
    let model = model_preset(1, 200, 10, 0.2).unwrap();
    let pi = population_pi(&model).unwrap().matrix;
    let p = 0.7;
    let r = 200;
    let mut debiased = DMatrix::<f64>::zeros(200, 200);
    let mut biased = DMatrix::<f64>::zeros(200, 200);
    for draw in 0..r {
        let net = sample_msbm(&model, draw).unwrap();
        let s = sparsify(&net, SamplingConfig::new(p, 10_000 + draw).unwrap()).unwrap();
        let op = build_operator(&s, p, Variant::Undirected).unwrap();
        debiased += dense_reference(&op).unwrap();
        biased += dense_uncorrected(&op).unwrap();
    }
    debiased /= r as f64;
    biased /= r as f64;
    let good = (&debiased - &pi).norm();
    let bad = (&biased - &pi).norm();
    assert!(good < bad, "debiased {good} vs uncorrected {bad}");
}

#[test]
fn diagonal_of_debiased_operator_vanishes() {
    let net = sample_msbm(&model_preset(3, 120, 4, 0.3).unwrap(), 1).unwrap();
    let s = sparsify(&net, SamplingConfig::new(0.5, 2).unwrap()).unwrap();
    let m = dense_reference(&build_operator(&s, 0.5, Variant::Undirected).unwrap()).unwrap();
    assert!(m.diagonal().amax() < 1e-12);
}
