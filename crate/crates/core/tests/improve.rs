mod common;

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use common::random_instance;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roster_core::ga::{run, GaConfig};
use roster_core::improve::protocol::{argmax_codes, Request, Response};
use roster_core::improve::{
    build_graph, identity_operator, layout, neural_operator, repair_operator, repair_schedule,
    GraphPayload, ImprovementOperator, NeuralOperator, FEATURE_DIM,
};
use roster_core::instance_gen::gen_instance;
use roster_core::model::evaluate;
use roster_core::{Error, Instance, Schedule, ShiftCode};

const TIMEOUT: Duration = Duration::from_secs(10);

fn loose(e: usize, d: usize) -> Instance {
    let mut inst = gen_instance(e, d, 0);
    inst.min_hours = 0;
    inst.max_hours = 8 * d as u32;
    inst.coverage = vec![vec![0; 3]; d];
    inst.pref_off = vec![vec![0; d]; e];
    inst.overstaff_weight = 0;
    inst
}

fn golden_instance() -> Instance {
    let mut inst = gen_instance(3, 4, 0);
    inst.min_hours = 16;
    inst.max_hours = 24;
    inst.max_consecutive = 2;
    inst.min_rest = 2;
    inst.coverage = vec![vec![1, 1, 1]; 4];
    inst.pref_off = vec![vec![0, 1, 0, 0], vec![0, 0, 0, 1], vec![1, 0, 0, 0]];
    inst
}

fn golden_schedule() -> Schedule {
    Schedule::from_rows(&[[3u8, 1, 0, 2], [1, 1, 1, 0], [0, 0, 0, 3]]).unwrap()
}

#[test]
fn graph_structure_counts() {
    let inst = loose(2, 2);
    let g = build_graph(
        &Schedule::random(2, 2, &mut ChaCha8Rng::seed_from_u64(0)),
        &inst,
    )
    .unwrap();
    assert_eq!(
        g.employee_feats.len() + g.day_feats.len() + g.shift_feats.len(),
        8
    );
    assert_eq!(g.edges_se.len(), 8);
    assert_eq!(g.edges_sd.len(), 8);
    assert_eq!(g.edges_ss.len(), 4);
    assert_eq!(g.meta.feature_dim, 17);
}

#[test]
fn graph_edges_follow_the_structure_rules() {
    let inst = loose(3, 4);
    let g = build_graph(&Schedule::new(3, 4, ShiftCode::Rest), &inst).unwrap();
    let n = 12;
    for e in 0..3 {
        for d in 0..4 {
            let s = e * 4 + d;
            assert!(g.edges_se[..n].contains(&[s, e]) && g.edges_se[n..].contains(&[e, s]));
            assert!(g.edges_sd[..n].contains(&[s, d]) && g.edges_sd[n..].contains(&[d, s]));
        }
    }
    let mut ss: Vec<[usize; 2]> = g.edges_ss.clone();
    ss.sort();
    let mut want = Vec::new();
    for e in 0..3 {
        for d in 0..3 {
            want.push([e * 4 + d, e * 4 + d + 1]);
            want.push([e * 4 + d + 1, e * 4 + d]);
        }
    }
    want.sort();
    assert_eq!(ss, want);
}

#[test]
fn zero_penalty_schedule_has_no_violation_features() {
    let inst = loose(3, 5);
    let s = Schedule::from_rows(&[[1u8, 1, 1, 0, 0], [0, 2, 2, 2, 0], [0, 0, 3, 3, 3]]).unwrap();
    let rep = evaluate(&s, &inst).unwrap();
    assert_eq!((rep.hard_total, rep.soft_unnormalized), (0, 0));
    let g = build_graph(&s, &inst).unwrap();
    for f in &g.employee_feats {
        assert_eq!(f[layout::BELOW_MIN_HOURS] + f[layout::ABOVE_MAX_HOURS], 0.0);
    }
    for f in &g.shift_feats {
        let flags = f[layout::NIGHT_MORNING] + f[layout::CONSECUTIVE] + f[layout::SHORT_REST];
        assert_eq!(flags, 0.0);
    }
    for f in &g.day_feats {
        assert_eq!(f[layout::UNDERSTAFF] + f[layout::OVERSTAFF], 0.0);
    }
}

#[test]
fn golden_payload() {
    let g = build_graph(&golden_schedule(), &golden_instance()).unwrap();
    let text = serde_json::to_string_pretty(&g).unwrap() + "\n";
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/graph_3x4.json");
    if std::env::var_os("ROSTER_BLESS").is_some() {
        std::fs::write(path, &text).unwrap();
    }
    let frozen = std::fs::read_to_string(path).unwrap();
    assert_eq!(text, frozen);
    let back: GraphPayload = serde_json::from_str(&frozen).unwrap();
    assert_eq!(back, g);
}

#[test]
fn golden_payload_values_by_hand() {
    let g = build_graph(&golden_schedule(), &golden_instance()).unwrap();
    let shift = |e: usize, d: usize| &g.shift_feats[e * 4 + d];
    // employee 0 works 24h of a 24h cap
    assert_eq!(g.employee_feats[0][..5], [0.0, 0.0, 1.0, 0.0, 0.0]);
    // employee 2 works 8h, below the 16h floor
    assert_eq!(g.employee_feats[2][..5], [0.0, 0.0, 1.0 / 3.0, 1.0, 0.0]);
    // night then morning
    assert_eq!(shift(0, 0)[layout::NIGHT_MORNING], 1.0);
    assert_eq!(shift(0, 1)[layout::NIGHT_MORNING], 1.0);
    assert_eq!(shift(0, 1)[layout::PREF_OFF], 1.0);
    // one-day rest between two worked days
    for d in 1..4 {
        assert_eq!(shift(0, d)[layout::SHORT_REST], 1.0);
    }
    assert_eq!(shift(0, 2)[layout::REST_STREAK], 0.5);
    assert_eq!(shift(0, 0)[layout::SHORT_REST], 0.0);
    // three worked days against a cap of two
    for d in 0..3 {
        assert_eq!(shift(1, d)[layout::CONSECUTIVE], 1.0);
    }
    assert_eq!(shift(1, 2)[layout::WORK_STREAK], 1.5);
    assert_eq!(shift(1, 3)[layout::CONSECUTIVE], 0.0);
    assert_eq!(
        shift(2, 3)[layout::CODE..layout::CODE + 4],
        [0.0, 0.0, 0.0, 1.0]
    );
    // day 2: nobody on morning or night, so 100/101 twice; afternoon overstaff-free
    let under = 2.0 * 100.0 / 101.0;
    assert!((g.day_feats[2][layout::UNDERSTAFF] - under).abs() < 1e-12);
    assert_eq!(g.day_feats[2][..2], [0.0, 1.0]);
    // day 1: two mornings, one extra over a denominator of 1 + max(100, 2)
    assert!((g.day_feats[1][layout::OVERSTAFF] - 1.0 / 101.0).abs() < 1e-12);
}

fn permute_rows<T: Clone>(v: &[T], perm: &[usize], block: usize) -> Vec<T> {
    let mut out = Vec::new();
    for &p in perm {
        out.extend_from_slice(&v[p * block..(p + 1) * block]);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn features_are_bounded_and_relabeling_equivariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 6, 7);
        let s = Schedule::random(inst.num_employees, inst.num_days, &mut rng);
        let g = build_graph(&s, &inst).unwrap();
        for f in g.employee_feats.iter().chain(&g.day_feats).chain(&g.shift_feats) {
            prop_assert_eq!(f.len(), FEATURE_DIM);
            prop_assert!(f.iter().all(|x| x.is_finite() && (0.0..=2.0).contains(x)));
        }

        let e_n = inst.num_employees;
        let mut perm: Vec<usize> = (0..e_n).collect();
        for i in (1..e_n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut pinst = inst.clone();
        pinst.pref_off = perm.iter().map(|&p| inst.pref_off[p].clone()).collect();
        let rows = s.to_rows();
        let ps = Schedule::from_rows(&perm.iter().map(|&p| rows[p].clone()).collect::<Vec<_>>()).unwrap();
        let pg = build_graph(&ps, &pinst).unwrap();
        prop_assert_eq!(pg.employee_feats, permute_rows(&g.employee_feats, &perm, 1));
        prop_assert_eq!(pg.shift_feats, permute_rows(&g.shift_feats, &perm, inst.num_days));
        prop_assert_eq!(pg.day_feats, g.day_feats);
    }
}

#[test]
fn identity_returns_copies() {
    let inst = loose(3, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let batch: Vec<Schedule> = (0..5).map(|_| Schedule::random(3, 4, &mut rng)).collect();
    let out = identity_operator().improve(&batch, &inst).unwrap();
    assert_eq!(out, batch);
    assert!(out
        .iter()
        .zip(&batch)
        .all(|(a, b)| a.cells().as_ptr() != b.cells().as_ptr()));
    assert!(identity_operator().improve(&[], &inst).unwrap().is_empty());
}

#[test]
fn repair_fixes_a_single_night_morning_pair_with_one_change() {
    let inst = loose(2, 4);
    let s = Schedule::from_rows(&[[0u8, 3, 1, 0], [2, 2, 0, 0]]).unwrap();
    assert_eq!(evaluate(&s, &inst).unwrap().c2_count, 1);
    assert_eq!(evaluate(&s, &inst).unwrap().hard_total, 1);
    let out = repair_schedule(&s, &inst).unwrap();
    assert_eq!(evaluate(&out, &inst).unwrap().hard_total, 0);
    assert_eq!(out.hamming(&s), 1);
}

#[test]
fn repair_leaves_zero_penalty_schedules_alone() {
    let inst = loose(3, 5);
    let s = Schedule::from_rows(&[[1u8, 1, 1, 0, 0], [0, 2, 2, 2, 0], [0, 0, 3, 3, 3]]).unwrap();
    assert_eq!(repair_schedule(&s, &inst).unwrap(), s);
}

#[test]
fn repair_never_increases_hard_penalty() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..300 {
        let inst = if rng.gen_bool(0.5) {
            random_instance(&mut rng, 6, 7)
        } else {
            gen_instance(rng.gen_range(3..=8), rng.gen_range(3..=7), rng.gen())
        };
        let s = Schedule::random(inst.num_employees, inst.num_days, &mut rng);
        let before = evaluate(&s, &inst).unwrap();
        let after = evaluate(&repair_schedule(&s, &inst).unwrap(), &inst).unwrap();
        assert!(
            (after.hard_total, after.soft_unnormalized)
                <= (before.hard_total, before.soft_unnormalized)
        );
    }
}

/// Serves one connection: handshake, then `reply` for every request line.
fn stub_server<F>(mut reply: F) -> (String, Arc<AtomicUsize>)
where
    F: FnMut(Request) -> String + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let count = Arc::new(AtomicUsize::new(0));
    let seen = count.clone();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut out = stream.try_clone().unwrap();
        let mut lines = BufReader::new(stream).lines();
        let hello = lines.next().unwrap().unwrap();
        assert_eq!(hello, r#"{"hello":1,"protocol":1}"#);
        writeln!(out, r#"{{"ready":true,"protocol":1}}"#).unwrap();
        for line in lines {
            let Ok(line) = line else { break };
            seen.fetch_add(1, Ordering::SeqCst);
            let req: Request = serde_json::from_str(&line).unwrap();
            if writeln!(out, "{}", reply(req)).is_err() {
                break;
            }
        }
    });
    (addr, count)
}

fn echo(req: Request) -> String {
    let schedules = req
        .graphs
        .iter()
        .map(|g| argmax_codes(req.meta, g))
        .collect();
    serde_json::to_string(&Response {
        id: req.id,
        schedules: Some(schedules),
        error: None,
    })
    .unwrap()
}

fn all_rest(req: Request) -> String {
    let one = vec![vec![0u8; req.meta.days]; req.meta.employees];
    let schedules = vec![one; req.graphs.len()];
    serde_json::to_string(&Response {
        id: req.id,
        schedules: Some(schedules),
        error: None,
    })
    .unwrap()
}

fn batch(inst: &Instance, k: usize, seed: u64) -> Vec<Schedule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| Schedule::random(inst.num_employees, inst.num_days, &mut rng))
        .collect()
}

#[test]
fn echo_stub_returns_the_input() {
    let inst = gen_instance(5, 7, 3);
    let (addr, count) = stub_server(echo);
    let mut op = neural_operator(&addr, TIMEOUT).unwrap();
    for round in 0..3 {
        let b = batch(&inst, 6, round);
        assert_eq!(op.improve(&b, &inst).unwrap(), b);
    }
    assert_eq!(count.load(Ordering::SeqCst), 3);
}

#[test]
fn constant_stub_gives_all_rest() {
    let inst = gen_instance(4, 5, 3);
    let (addr, _) = stub_server(all_rest);
    let mut op = neural_operator(&addr, TIMEOUT).unwrap();
    let out = op.improve(&batch(&inst, 3, 0), &inst).unwrap();
    assert_eq!(out, vec![Schedule::new(4, 5, ShiftCode::Rest); 3]);
}

#[test]
fn one_request_per_batch_in_order() {
    let inst = gen_instance(3, 4, 1);
    let sizes = Arc::new(std::sync::Mutex::new(Vec::new()));
    let log = sizes.clone();
    let (addr, count) = stub_server(move |req| {
        assert_eq!(req.meta.feature_dim, FEATURE_DIM);
        assert_eq!((req.meta.employees, req.meta.days), (3, 4));
        log.lock().unwrap().push((req.id, req.graphs.len()));
        echo(req)
    });
    let mut op = neural_operator(&addr, TIMEOUT).unwrap();
    let b = batch(&inst, 9, 5);
    let out = op.improve(&b, &inst).unwrap();
    assert_eq!(out, b);
    assert_eq!(count.load(Ordering::SeqCst), 1);
    assert_eq!(*sizes.lock().unwrap(), vec![(0, 9)]);
}

#[test]
fn request_graphs_equal_build_graph() {
    let inst = gen_instance(3, 4, 1);
    let b = batch(&inst, 2, 6);
    let expected: Vec<_> = b.iter().map(|s| build_graph(s, &inst).unwrap()).collect();
    let (addr, _) = stub_server(move |req| {
        for (g, e) in req.graphs.iter().zip(&expected) {
            assert_eq!(g.shift_feats, e.shift_feats);
            assert_eq!(g.edges_ss, e.edges_ss);
        }
        echo(req)
    });
    neural_operator(&addr, TIMEOUT)
        .unwrap()
        .improve(&b, &inst)
        .unwrap();
}

#[test]
fn every_operator_preserves_length_and_order() {
    let inst = gen_instance(4, 5, 9);
    let (addr, _) = stub_server(echo);
    let mut ops: Vec<Box<dyn ImprovementOperator>> = vec![
        Box::new(identity_operator()),
        Box::new(repair_operator()),
        Box::new(neural_operator(&addr, TIMEOUT).unwrap()),
    ];
    for op in &mut ops {
        for k in [0, 1, 7] {
            let b = batch(&inst, k, k as u64);
            let out = op.improve(&b, &inst).unwrap();
            assert_eq!(out.len(), k);
            for (o, i) in out.iter().zip(&b) {
                assert!(o.same_shape(i));
            }
        }
        let b = batch(&inst, 4, 77);
        let single: Vec<Schedule> = b
            .iter()
            .map(|s| {
                op.improve(std::slice::from_ref(s), &inst)
                    .unwrap()
                    .remove(0)
            })
            .collect();
        assert_eq!(op.improve(&b, &inst).unwrap(), single);
    }
}

fn expect_protocol_error(reply: fn(Request) -> String) -> Error {
    let inst = gen_instance(3, 4, 1);
    let (addr, _) = stub_server(reply);
    let mut op = neural_operator(&addr, TIMEOUT).unwrap();
    op.improve(&batch(&inst, 2, 0), &inst).unwrap_err()
}

#[test]
fn bad_responses_are_errors() {
    let short = |req: Request| {
        serde_json::to_string(&Response {
            id: req.id,
            schedules: Some(vec![]),
            error: None,
        })
        .unwrap()
    };
    assert!(matches!(expect_protocol_error(short), Error::Protocol(_)));
    let wrong_shape = |req: Request| {
        let s = vec![vec![vec![0u8; 3]; 3]; req.graphs.len()];
        serde_json::to_string(&Response {
            id: req.id,
            schedules: Some(s),
            error: None,
        })
        .unwrap()
    };
    assert!(matches!(
        expect_protocol_error(wrong_shape),
        Error::Protocol(_)
    ));
    let bad_code = |req: Request| {
        let s = vec![vec![vec![7u8; 4]; 3]; req.graphs.len()];
        serde_json::to_string(&Response {
            id: req.id,
            schedules: Some(s),
            error: None,
        })
        .unwrap()
    };
    assert!(matches!(
        expect_protocol_error(bad_code),
        Error::Protocol(_)
    ));
    let garbage = |_: Request| "not json".to_string();
    assert!(matches!(expect_protocol_error(garbage), Error::Protocol(_)));
    let wrong_id = |req: Request| {
        all_rest(Request {
            id: req.id + 5,
            ..req
        })
    };
    assert!(matches!(
        expect_protocol_error(wrong_id),
        Error::Protocol(_)
    ));
    let failed = |req: Request| format!(r#"{{"id":{},"error":"out of memory"}}"#, req.id);
    let err = expect_protocol_error(failed);
    assert!(
        matches!(&err, Error::Operator(m) if m.contains("out of memory")),
        "{err:?}"
    );
}

#[test]
fn refused_connection_and_timeouts() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    drop(listener);
    assert!(matches!(
        neural_operator(&addr, TIMEOUT),
        Err(Error::Protocol(_))
    ));

    // accepts but never answers the handshake
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let hold = thread::spawn(move || {
        let conn = listener.accept().unwrap();
        thread::sleep(Duration::from_millis(800));
        drop(conn);
    });
    let err = neural_operator(&addr, Duration::from_millis(200))
        .err()
        .unwrap();
    assert!(
        matches!(&err, Error::Protocol(m) if m.contains("no reply")),
        "{err:?}"
    );
    hold.join().unwrap();
}

#[test]
fn silent_server_times_out_and_drops_the_connection() {
    let inst = gen_instance(3, 4, 1);
    let (addr, _) = stub_server(|req| {
        thread::sleep(Duration::from_millis(600));
        echo(req)
    });
    let mut op = neural_operator(&addr, Duration::from_millis(150)).unwrap();
    let err = op.improve(&batch(&inst, 1, 0), &inst).unwrap_err();
    assert!(matches!(err, Error::Protocol(_)));
}

#[test]
fn ga_surfaces_neural_failures_with_the_epoch() {
    let inst = gen_instance(4, 5, 2);
    let (addr, _) = stub_server(|req| {
        if req.id < 2 {
            echo(req)
        } else {
            format!(r#"{{"id":{},"error":"boom"}}"#, req.id)
        }
    });
    let mut op = neural_operator(&addr, TIMEOUT).unwrap();
    let cfg = GaConfig {
        pop_size: 10,
        nb_max_epochs: 50,
        use_improver: true,
        ..GaConfig::default()
    };
    let err = run(&inst, &cfg, &mut op).unwrap_err();
    assert!(
        matches!(err, Error::OperatorFailure { epoch: 2, .. }),
        "{err:?}"
    );
}

#[test]
fn child_process_transport() {
    let inst = gen_instance(1, 3, 0);
    let script = r#"read hello; echo '{"ready":true,"protocol":1}'; read req; echo '{"id":0,"schedules":[[[1,0,2]],[[3,3,0]]]}'; read req"#;
    let mut cmd = Command::new("sh");
    cmd.arg("-c").arg(script);
    let mut op = NeuralOperator::spawn(cmd, TIMEOUT).unwrap();
    let out = op.improve(&batch(&inst, 2, 0), &inst).unwrap();
    assert_eq!(out[0], Schedule::from_rows(&[[1u8, 0, 2]]).unwrap());
    assert_eq!(out[1], Schedule::from_rows(&[[3u8, 3, 0]]).unwrap());

    let mut cmd = Command::new("sh");
    cmd.arg("-c")
        .arg(r#"read hello; echo '{"ready":true,"protocol":2}'"#);
    assert!(matches!(
        NeuralOperator::spawn(cmd, TIMEOUT),
        Err(Error::Protocol(_))
    ));
}
