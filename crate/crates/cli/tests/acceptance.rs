//! Acceptance suite: one test per release criterion, each printing a
//! pass line with the measured values (visible with `--nocapture`).
//!
//! Run with `cargo test -p nullstate-cli --test acceptance`.

use std::process::Command;
use std::time::Instant;

use nullstate_core::codec::{
    validate_output, ContextCode, FrameSlice, InputFrame, MalformedReason, OutputCheck,
    OutputFrame,
};
use nullstate_core::machine::{
    build_table, context_keyed_table, dispatch, f_square, f_verb, functionality, oracle_frame,
    DispatchResult, NullReason, TableConfig,
};
use nullstate_core::memory::{strip_memory_tags, MemoryStore, Provenance, Query, Stripped};
use nullstate_core::net::{
    decoded_agreement, detect_null, grad_check, square_verb_pairs, square_verb_training_set,
    Network, TrainConfig, TrainSample, DEFAULT_BIAS_FLOOR, DEFAULT_EPSILON, DEFAULT_WIDTHS,
};
use nullstate_core::scenario::{
    apply_recovery, qa_transcript, run_grief_response, training_state, RecoveryStrategy,
    ScenarioConfig,
};

fn worked_frame(text: &str) -> InputFrame {
    InputFrame::from_canonical_text(text).unwrap()
}

#[test]
fn acceptance_01_exact_arithmetic_suite() {
    let t0 = Instant::now();

    assert_eq!(f_verb(132).unwrap(), 4);
    assert_eq!(f_verb(134).unwrap(), 6);
    assert_eq!(f_verb(172).unwrap(), 44);
    assert_eq!(f_square(2162).unwrap(), 4);
    assert_eq!(f_square(2802).unwrap(), 412164);

    let say_home = worked_frame("10000,100,111,0010,0000");
    let write_home = worked_frame("10000,110,111,0010,0000");
    let say_moved = worked_frame("10101,100,111,0010,0000");
    assert_eq!(say_home.slice_key(FrameSlice::CONTEXT_VERB), 132);
    assert_eq!(write_home.slice_key(FrameSlice::CONTEXT_VERB), 134);
    assert_eq!(say_moved.slice_key(FrameSlice::CONTEXT_VERB), 172);
    for n in 0..=9u8 {
        let frame = InputFrame::new(
            ContextCode::ALICE_LAB,
            nullstate_core::codec::VerbCode::SAY,
            nullstate_core::codec::FuncCode::SQUARE,
            n,
            0,
        )
        .unwrap();
        assert_eq!(frame.slice_key(FrameSlice::CONTEXT_FUNC_OP1), 2160 + n as u32);
    }
    assert_eq!(say_moved.slice_key(FrameSlice::CONTEXT_FUNC_OP1), 2802);

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0);
    println!("[PASS] exact-arithmetic suite (132/134/172, 2160+n, 2802, 412164) in {dt:?}");
}

#[test]
fn acceptance_02_dispatch_failure_chain() {
    let t0 = Instant::now();
    let table = context_keyed_table();

    // in the training context the same table answers correctly
    let home = worked_frame("10000,100,111,0010,0000");
    assert_eq!(
        dispatch(&home, &table),
        DispatchResult::Output(OutputFrame::say(4))
    );

    // changed context: verb key 172 -> 44 = 101100, rejected as bad-verb
    let moved = worked_frame("10101,100,111,0010,0000");
    assert_eq!(
        dispatch(&moved, &table),
        DispatchResult::Null(NullReason::MalformedOutput(MalformedReason::BadVerb))
    );
    assert_eq!(f_verb(172).unwrap(), 0b101100);

    // the square path alone overflows the 5-bit value field
    let squared = f_square(moved.slice_key(FrameSlice::CONTEXT_FUNC_OP1)).unwrap();
    assert_eq!(squared, 412164);
    assert_eq!(
        validate_output(&OutputFrame::say(squared)),
        OutputCheck::Malformed(MalformedReason::Overflow)
    );

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0);
    println!("[PASS] dispatch failure chain (bad-verb 101100, overflow 412164) in {dt:?}");
}

#[test]
fn acceptance_03_functionality_fractions() {
    let t0 = Instant::now();
    let table = build_table(&TableConfig::default()).unwrap();

    let alice = functionality(&table, ContextCode::ALICE_LAB);
    let bob = functionality(&table, ContextCode::BOB);
    let photo = functionality(&table, ContextCode::ALICE_PHOTO);
    assert_eq!(alice, 1.0);
    assert_eq!(bob, 0.2);
    assert_eq!(photo, 0.4);

    // tag-strip spoof: the preprocessor rewrites context headers back to
    // the remembered original, restoring every probe
    let cfg = ScenarioConfig {
        strategies: vec![RecoveryStrategy::LearnTagStrip],
        ..ScenarioConfig::default()
    };
    let report = run_grief_response(&cfg);
    assert!(report.after >= 0.99);

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0);
    println!(
        "[PASS] functionality fractions alice={alice:.2} bob={bob:.2} photo={photo:.2} \
         tag-strip={:.2} in {dt:?}",
        report.after
    );
}

#[test]
fn acceptance_04_qa_table_post_spoof() {
    let cfg = ScenarioConfig {
        strategies: vec![RecoveryStrategy::LearnTagStrip],
        ..ScenarioConfig::default()
    };
    let report = run_grief_response(&cfg);
    let lines = &report.qa;
    assert_eq!(lines[0].question, "Is Alice visible in the room?");
    assert_eq!(lines[0].answer, "No");
    assert_eq!(lines[1].question, "Can you touch Alice?");
    assert_eq!(lines[1].answer, "No");
    assert_eq!(lines[2].question, "Who is visible in the room?");
    assert_eq!(lines[2].answer, "Bob");
    assert_eq!(lines[3].question, "Is Alice present in the room?");
    assert_eq!(lines[3].answer, "Yes");
    println!("[PASS] post-spoof Q&A table: No / No / Bob / Yes");
}

#[test]
fn acceptance_05_zero_propagation() {
    let t0 = Instant::now();
    let net = Network::new(&DEFAULT_WIDTHS, 5.0, 0).unwrap();
    let trace = net.forward(&vec![0.0; DEFAULT_WIDTHS[0]]).unwrap();
    let mut max_activation = 0.0f64;
    for layer in trace.layers() {
        for &a in layer {
            max_activation = max_activation.max(a);
        }
    }
    assert!(max_activation < 0.01);
    let verdict = detect_null(&trace, DEFAULT_EPSILON, 0.5);
    assert!(verdict.quiescent_layers.iter().all(|&q| q));
    assert!(verdict.is_null);
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0);
    println!("[PASS] zero propagation: max activation {max_activation:.5} < 0.01 in {dt:?}");
}

#[test]
fn acceptance_06_training_converges_across_seeds() {
    let t0 = Instant::now();
    let samples = square_verb_training_set(ContextCode::ALICE_LAB);
    assert_eq!(samples.len(), 20);
    let mut converged = 0;
    let mut epochs = Vec::new();
    for seed in 0..10u64 {
        let mut net = Network::new(&DEFAULT_WIDTHS, DEFAULT_BIAS_FLOOR, seed).unwrap();
        let cfg = TrainConfig { seed, ..TrainConfig::default() };
        let report = net.train(&samples, &cfg).unwrap();
        if report.final_accuracy == 1.0 {
            converged += 1;
            epochs.push(report.converged_epoch.unwrap());
        }
    }
    let dt = t0.elapsed();
    assert!(converged >= 9, "{converged}/10 seeds converged");
    assert!(dt.as_secs_f64() < 60.0);
    println!(
        "[PASS] training: {converged}/10 seeds reach 20/20 within budget \
         (epochs {epochs:?}) in {dt:?}"
    );
}

#[test]
fn acceptance_07_out_of_distribution_degradation() {
    // Train only on context 10000, evaluate the same tasks under context
    // 10101. "Correct" means the decoded output equals the original
    // training-context output; the comparison runs over the answerable
    // tasks (squares that fit the output field; tasks whose original
    // outcome is itself a null state have no original output to
    // reproduce). The full-set rate is reported alongside.
    let t0 = Instant::now();
    let samples = square_verb_training_set(ContextCode::ALICE_LAB);
    let home = square_verb_pairs(ContextCode::ALICE_LAB);
    let moved = square_verb_pairs(ContextCode::NOVEL);
    let swapped: Vec<_> = moved
        .iter()
        .zip(&home)
        .map(|((f, _), (_, want))| (*f, *want))
        .collect();
    let answerable: Vec<_> = swapped
        .iter()
        .filter(|(_, want)| !want.is_null())
        .cloned()
        .collect();
    assert_eq!(answerable.len(), 12);

    let mut answerable_rates = Vec::new();
    let mut full_rates = Vec::new();
    let mut gate_classified = 0usize;
    let mut null_verdicts = 0usize;
    let mut runs = 0usize;
    for seed in 0..10u64 {
        let mut net = Network::new(&DEFAULT_WIDTHS, DEFAULT_BIAS_FLOOR, seed).unwrap();
        let cfg = TrainConfig { seed, ..TrainConfig::default() };
        net.train(&samples, &cfg).unwrap();
        answerable_rates.push(decoded_agreement(&net, &answerable, 0.5));
        full_rates.push(decoded_agreement(&net, &swapped, 0.5));
        for (frame, _) in &answerable {
            let trace = net.forward_frame(frame).unwrap();
            let verdict = detect_null(&trace, DEFAULT_EPSILON, 0.5);
            if verdict.output_gate.is_some() {
                gate_classified += 1;
            }
            if verdict.is_null {
                null_verdicts += 1;
            }
            runs += 1;
        }
    }
    let mean: f64 = answerable_rates.iter().sum::<f64>() / answerable_rates.len() as f64;
    let full_mean: f64 = full_rates.iter().sum::<f64>() / full_rates.len() as f64;
    let dt = t0.elapsed();

    assert_eq!(gate_classified, runs, "every run must get a gate verdict");
    assert!(
        mean < 0.5,
        "original outputs survive the context change too often: {mean:.3}"
    );
    println!(
        "[PASS] out-of-distribution degradation: original-output rate {mean:.3} < 0.5 \
         over 10 seeds (full-set rate {full_mean:.3}; null verdicts {null_verdicts}/{runs}) in {dt:?}"
    );
}

#[test]
fn acceptance_08_gradient_check() {
    let t0 = Instant::now();
    let mut x: u64 = 0x9E3779B97F4A7C15;
    let mut bit = || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        x & 1 == 1
    };
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        // healthy random nets: non-bias weights uniform in ±1, biases at -2
        let net = Network::with_init_range(&[19, 8, 8], 2.0, 1.0, trial).unwrap();
        let input: Vec<bool> = (0..19).map(|_| bit()).collect();
        let target: Vec<bool> = (0..8).map(|_| bit()).collect();
        let sample = TrainSample::new(&input, &target);
        let err = grad_check(&net, &sample);
        worst = worst.max(err);
        assert!(err < 1e-4, "trial {trial}: relative error {err}");
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0);
    println!("[PASS] gradient check: max relative error {worst:.2e} < 1e-4 over 100 nets in {dt:?}");
}

#[test]
fn acceptance_09_memory_round_trip_and_spoof_fidelity() {
    let t0 = Instant::now();

    // exhaustive probe set: every decodable frame over the registry
    // contexts and digit operands, stored and recovered bit for bit
    let contexts = [
        ContextCode::ALICE_LAB,
        ContextCode::NOVEL,
        ContextCode::BOB,
        ContextCode::ALICE_PHOTO,
        ContextCode::MEMORY,
    ];
    let verbs = [
        nullstate_core::codec::VerbCode::SAY,
        nullstate_core::codec::VerbCode::WRITE,
    ];
    let funcs = [
        nullstate_core::codec::FuncCode::ADD,
        nullstate_core::codec::FuncCode::SUB,
        nullstate_core::codec::FuncCode::MUL,
        nullstate_core::codec::FuncCode::DIV,
        nullstate_core::codec::FuncCode::SQUARE,
    ];
    let mut store = MemoryStore::new();
    let mut frames = Vec::new();
    let mut t = 0u32;
    for c in contexts {
        for v in verbs {
            for f in funcs {
                for a in 0..=9u8 {
                    for b in 0..=9u8 {
                        let frame = InputFrame::new(c, v, f, a, b).unwrap();
                        let out = match oracle_frame(&frame) {
                            DispatchResult::Output(out) => out,
                            DispatchResult::Null(_) => OutputFrame::say(0),
                        };
                        store.store_event(frame, out, t).unwrap();
                        frames.push(frame);
                        t += 1;
                    }
                }
            }
        }
    }
    assert_eq!(store.len(), 5000);
    for frame in &frames {
        let hits = store.recall(&Query::exact(frame));
        assert_eq!(hits.len(), 1);
        match strip_memory_tags(hits[0]) {
            Stripped::Frame(pf, _) => {
                assert_eq!(pf.frame.to_bit_string(), frame.to_bit_string());
                assert_eq!(pf.provenance, Provenance::Internal);
            }
            Stripped::Record(_) => panic!("depth-1 strip must yield the frame"),
        }
    }

    // recall equals an independent scan on a 1000-record store
    let mut small = MemoryStore::new();
    for (i, frame) in frames.iter().take(1000).enumerate() {
        small.store_event(*frame, OutputFrame::say(1), i as u32).unwrap();
    }
    for q in [
        Query::context(ContextCode::ALICE_LAB),
        Query::context(ContextCode::BOB),
        Query::ANY,
    ] {
        let got = small.recall(&q);
        let brute: Vec<_> = small
            .records()
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .filter(|(_, r)| q.matches(r.embedded_input()))
            .map(|(_, r)| r)
            .collect();
        assert_eq!(got, brute);
    }

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 5.0);
    println!("[PASS] memory round-trip and strip fidelity over 5000 frames in {dt:?}");
}

#[test]
fn acceptance_10_recovery_algebra() {
    let cfg = ScenarioConfig::default();

    // restore, when available, returns functionality 1.0 in one step
    let mut state = training_state(&cfg);
    state.env.depart_alice(false);
    state.advance_clock();
    state.rebuild_scene();
    assert_eq!(state.measure().functionality, 0.2);
    let outcome =
        apply_recovery(RecoveryStrategy::RestoreEnvironment, &mut state, &cfg.retrain).unwrap();
    assert_eq!(outcome.after.functionality, 1.0);
    assert_eq!(outcome.cost_steps, 1);

    // restore under the death flag errors
    let mut dead = training_state(&cfg);
    dead.env.depart_alice(true);
    dead.advance_clock();
    dead.rebuild_scene();
    let err = apply_recovery(RecoveryStrategy::RestoreEnvironment, &mut dead, &cfg.retrain);
    assert!(err.is_err(), "restore must be unavailable after the departure");

    // learn-tag-strip: f(g(E')) equals f(E) on every probe
    let outcome =
        apply_recovery(RecoveryStrategy::LearnTagStrip, &mut dead, &cfg.retrain).unwrap();
    assert!(outcome.after.functionality >= 0.99);
    let home = training_state(&cfg);
    for probe in dead.machine.probe_suite() {
        let original = home.machine.answer(&probe.frame(ContextCode::ALICE_LAB));
        let spoofed = dead.machine.answer(&probe.frame(ContextCode::BOB));
        assert_eq!(spoofed, original);
    }
    // the final transcripts agree with the working-set view
    let lines = qa_transcript(&dead.working, &dead.store);
    assert_eq!(lines[3].answer, "Yes");
    println!("[PASS] recovery algebra: restore=1.0/1-step, death-flag error, f∘g = f on all probes");
}

#[test]
fn acceptance_11_deterministic_csv() {
    let exe = env!("CARGO_BIN_EXE_nullstate");
    let dir = std::env::temp_dir().join(format!("nullstate-accept-{}", std::process::id()));
    let run = |sub: &str| -> Vec<u8> {
        let out_dir = dir.join(sub);
        let status = Command::new(exe)
            .args([
                "scenario",
                "grief-response",
                "--seed",
                "11",
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .status()
            .expect("binary runs");
        assert!(status.success());
        std::fs::read(out_dir.join("report.csv")).expect("csv written")
    };
    let first = run("a");
    let second = run("b");
    assert_eq!(first, second, "identical seed/config must give identical bytes");
    let _ = std::fs::remove_dir_all(&dir);
    println!("[PASS] determinism: re-run with identical seed/config is byte-identical CSV");
}
