// Calibration harness: convergence speed and out-of-distribution
// degradation across seeds for candidate architectures, learning rates,
// and weight-init ranges.
//
// Usage: cargo run --release -p nullstate-core --example tune -- \
//            19-10-8 1.0 3000 3.0

use std::time::Instant;

use nullstate_core::codec::ContextCode;
use nullstate_core::net::{
    decoded_agreement, detect_null, square_verb_pairs, square_verb_training_set, Network,
    TrainConfig,
};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let widths: Vec<usize> = if args.len() > 1 {
        args[1].split('-').map(|t| t.parse().unwrap()).collect()
    } else {
        vec![19, 64, 64, 8]
    };
    let lr: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2.0);
    let epochs: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(3000);
    let init_range: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0.1);

    let samples = square_verb_training_set(ContextCode::ALICE_LAB);
    let train_pairs = square_verb_pairs(ContextCode::ALICE_LAB);
    let ood_pairs = square_verb_pairs(ContextCode::NOVEL);
    // OOD "correct" = decoded output equals the ORIGINAL (training-context) target
    let ood_eval: Vec<_> = ood_pairs
        .iter()
        .zip(&train_pairs)
        .map(|((f, _), (_, want))| (*f, *want))
        .collect();

    let mut converged = 0;
    let mut epochs_used = Vec::new();
    let mut ood_rates = Vec::new();
    let mut answerable_rates = Vec::new();
    let mut null_rates = Vec::new();
    let t0 = Instant::now();
    for seed in 0..10u64 {
        let mut net = Network::with_init_range(&widths, 5.0, init_range, seed).unwrap();
        let cfg = TrainConfig {
            learning_rate: lr,
            epochs,
            seed,
            ..TrainConfig::default()
        };
        let report = net.train(&samples, &cfg).unwrap();
        if report.final_accuracy == 1.0 {
            converged += 1;
            epochs_used.push(report.converged_epoch.unwrap());
        }
        let ood = decoded_agreement(&net, &ood_eval, 0.5);
        let answerable: Vec<_> = ood_eval
            .iter()
            .filter(|(_, want)| !want.is_null())
            .cloned()
            .collect();
        let ood_answerable = decoded_agreement(&net, &answerable, 0.5);
        ood_rates.push(ood);
        answerable_rates.push(ood_answerable);
        let nulls = ood_eval
            .iter()
            .filter(|(f, _)| {
                let trace = net.forward_frame(f).unwrap();
                detect_null(&trace, 0.01, 0.5).is_null
            })
            .count();
        null_rates.push(nulls as f64 / ood_eval.len() as f64);
    }
    let dt = t0.elapsed();
    let mean_ood: f64 = ood_rates.iter().sum::<f64>() / ood_rates.len() as f64;
    let mean_null: f64 = null_rates.iter().sum::<f64>() / null_rates.len() as f64;
    println!(
        "widths={widths:?} lr={lr} budget={epochs} init={init_range}: converged {converged}/10, epochs {:?}",
        epochs_used
    );
    let mean_ans: f64 = answerable_rates.iter().sum::<f64>() / answerable_rates.len() as f64;
    println!(
        "OOD original-output rate per seed: {:?}  mean={mean_ood:.3}",
        ood_rates
    );
    println!(
        "OOD answerable-only rate per seed: {:?}  mean={mean_ans:.3}",
        answerable_rates
    );
    println!("OOD null-verdict rate mean={mean_null:.3}  total time {dt:?}");
}
