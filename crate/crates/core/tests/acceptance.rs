//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a criterion that is expected to hold does not.

mod common;

use std::process::Command;
use std::time::Instant;

use capbound::bippt::{self, SearchConfig};
use capbound::bounds;
use capbound::channel::{self, Channel};
use capbound::distill;
use capbound::linalg;
use capbound::optim::{self, OptimOptions};
use capbound::sdp::{self, SdpOptions};
use capbound::state::BipartiteState;
use common::*;

const ERASURE_Q1_TOL: f64 = 1e-4;
const ERASURE_CE_TOL: f64 = 1e-5;
const ERASURE_CHI_TOL: f64 = 1e-3;
const COLLAPSE_TOL: f64 = 1e-4;
const DEGRADABLE_EPS_TOL: f64 = 1e-6;
const QE_DIRECT_TOL: f64 = 1e-4;
const CERTIFIED_ZERO_TOL: f64 = 1e-6;
const TRANSPOSE_SLACK: f64 = 1e-5;
const IDENTITY_TOL: f64 = 1e-9;
const STATE_TOL: f64 = 2e-4;
const PRODUCT_TOL: f64 = 1e-6;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    /// Known not to hold as stated; the check asserts the true values instead.
    unattainable: Option<&'static str>,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sdp_err(e: capbound::Error) -> String {
    e.to_string()
}

fn erasure_family() -> Outcome {
    let opts = OptimOptions::default();
    let mut worst = [0.0f64; 4];
    for p in [0.0, 0.1, 0.25, 0.5, 0.75, 1.0] {
        let ch = channel::erasure(2, p).unwrap().untagged();
        let q1 = optim::q1(&ch, &opts).value;
        let ce = optim::ce(&ch, &opts).value;
        let chi = optim::holevo_chi(&ch, &opts).value;
        let qc = optim::q1(&ch.complementary().untagged(), &opts).value;
        let q_flip = optim::q1(&channel::erasure(2, 1.0 - p).unwrap().untagged(), &opts).value;
        let errs = [(q1 - (1.0 - 2.0 * p).max(0.0)).abs(), (ce - 2.0 * (1.0 - p)).abs(), (chi - (1.0 - p)).abs(), (qc - q_flip).abs()];
        ensure(errs[0] <= ERASURE_Q1_TOL, || format!("p = {p}: q1 = {q1}"))?;
        ensure(errs[1] <= ERASURE_CE_TOL, || format!("p = {p}: ce = {ce}"))?;
        ensure(errs[2] <= ERASURE_CHI_TOL, || format!("p = {p}: chi = {chi}"))?;
        ensure(errs[3] <= ERASURE_Q1_TOL, || format!("p = {p}: q1(complement) = {qc}, q1(E_1-p) = {q_flip}"))?;
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
    }
    Ok(format!("max errors q1 {:.1e}, ce {:.1e}, chi {:.1e}, duality {:.1e}", worst[0], worst[1], worst[2], worst[3]))
}

fn degradable_collapse() -> Outcome {
    let opts = OptimOptions::default();
    let (mut gap, mut eps) = (0.0f64, 0.0f64);
    for g in [0.1, 0.2, 0.3, 0.4] {
        let ch = channel::amplitude_damping(g).unwrap().untagged();
        let q1 = optim::q1(&ch, &opts).value;
        let p1 = optim::p1(&ch, &opts).value;
        let e = sdp::eps_degradable(&ch).map_err(sdp_err)?.eps;
        ensure((p1 - q1).abs() <= COLLAPSE_TOL, || format!("gamma = {g}: p1 = {p1}, q1 = {q1}"))?;
        ensure(e <= DEGRADABLE_EPS_TOL, || format!("gamma = {g}: eps_degradable = {e}"))?;
        gap = gap.max((p1 - q1).abs());
        eps = eps.max(e);
    }
    Ok(format!("max |p1 - q1| {gap:.1e}, max eps_degradable {eps:.1e}"))
}

fn corpus() -> Vec<Channel> {
    let mut out = vec![
        channel::identity(2).unwrap(),
        channel::erasure(2, 0.25).unwrap(),
        channel::erasure(3, 0.6).unwrap(),
        channel::depolarizing(2, 0.2).unwrap(),
        channel::depolarizing(3, 0.5).unwrap(),
        channel::amplitude_damping(0.3).unwrap(),
        channel::dephasing(2, 0.3).unwrap(),
        channel::dephasing(2, 1.0).unwrap(),
        channel::symmetric_side_channel(2).unwrap(),
    ];
    let mut r = rng(3);
    out.extend((0..4).map(|_| random_small_channel(&mut r, 3)));
    out
}

fn qe_identity() -> Outcome {
    let opts = OptimOptions::default();
    for ch in corpus() {
        let q1 = optim::q1(&ch, &opts);
        let qe = optim::qe(&q1);
        ensure(qe.value == 2.0 * q1.value, || format!("qe {} != 2 q1 {}", qe.value, q1.value))?;
    }
    let mut r = rng(31);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let ch = random_channel(&mut r, 2, 2, 2);
        let q1 = optim::q1(&ch, &opts).value;
        let direct = optim::qe_direct(&ch, &opts).value;
        ensure((direct - 2.0 * q1).abs() <= QE_DIRECT_TOL, || format!("direct {direct} vs 2 q1 {}", 2.0 * q1))?;
        worst = worst.max((direct - 2.0 * q1).abs());
    }
    Ok(format!("qe = 2 q1 on {} channels; direct optimum max deviation {worst:.1e}", corpus().len()))
}

fn bippt_erasure() -> Outcome {
    let opts = SdpOptions::default();
    let v = bippt::bippt_verdict(&channel::erasure(2, 0.5).unwrap(), &opts).map_err(sdp_err)?;
    let expected = 2.0 * 1.5f64.log2();
    ensure(!v.bippt, || "erasure(2, 0.5) reported PPT".into())?;
    ensure((v.ppt_min_eig + 0.5).abs() < 1e-9, || format!("min eigenvalue of partial transpose {}", v.ppt_min_eig))?;
    ensure((v.p_upper_certified - expected).abs() < 1e-6, || format!("certified P upper {}", v.p_upper_certified))?;
    let z = bippt::bippt_verdict(&channel::dephasing(2, 1.0).unwrap(), &opts).map_err(sdp_err)?;
    ensure(z.bippt && z.p_upper_certified <= CERTIFIED_ZERO_TOL, || format!("dephasing verdict {z:?}"))?;
    Ok(format!(
        "erasure(2, 0.5): bippt = {}, min eig of J^T_B = {:.3}, certified P upper = {:.6} (= 2 log2 1.5); \
         complete dephasing: bippt = {}, certified P upper = {:.1e}",
        v.bippt, v.ppt_min_eig, v.p_upper_certified, z.bippt, z.p_upper_certified
    ))
}

fn transpose_soundness() -> Outcome {
    let opts = OptimOptions::default();
    let mut r = rng(55);
    let mut slack = f64::INFINITY;
    for _ in 0..30 {
        let ch = random_small_channel(&mut r, 3);
        let tq = sdp::transpose_q_upper(&ch).map_err(sdp_err)?.objective;
        let q1 = optim::q1(&ch, &opts).value;
        ensure(tq >= q1 - TRANSPOSE_SLACK, || format!("transpose bound {tq} < q1 {q1}"))?;
        slack = slack.min(tq - q1);
    }
    let mut ppt = 0;
    for ch in corpus().into_iter().chain([channel::erasure(2, 1.0).unwrap(), channel::depolarizing(2, 1.0).unwrap()]) {
        if sdp::ppt_check(&ch.choi()) {
            let tq = sdp::transpose_q_upper(&ch).map_err(sdp_err)?.objective;
            ensure(tq <= CERTIFIED_ZERO_TOL, || format!("PPT channel with transpose bound {tq}"))?;
            ppt += 1;
        }
    }
    Ok(format!("min (bound - q1) over 30 random channels {slack:.2e}; {ppt} PPT channels at zero"))
}

fn continuity() -> Outcome {
    for e in 2..=6 {
        for k in 0..=100 {
            let eps = k as f64 / 100.0;
            let (a, b) = (sdp::f1(e, eps).unwrap(), sdp::f2(e, eps).unwrap());
            ensure(a <= b, || format!("f1({e}, {eps}) = {a} > f2 = {b}"))?;
        }
    }
    let f = sdp::f1(2, 1.0).unwrap();
    ensure(f == 1.0, || format!("f1(2, 1) = {f}"))?;
    let opts = OptimOptions { restarts: 6, ..OptimOptions::default() };
    let mut r = rng(77);
    for _ in 0..10 {
        let ch = random_channel(&mut r, 2, 2, 2);
        let rep = bounds::approx_degradability_bounds(&ch, &opts, &SdpOptions::default()).map_err(sdp_err)?;
        let c = rep.chains;
        ensure(c.p_improved <= c.p_earlier + 1e-12 && c.p1_improved <= c.p1_earlier + 1e-12, || format!("{c:?}"))?;
    }
    Ok("f1 <= f2 on the grid, f1(2, 1) = 1, improved chains below earlier ones on 10 channels".into())
}

fn entropy_identities() -> Outcome {
    let mut r = rng(91);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let ch = random_small_channel(&mut r, 3);
        let ens = random_ensemble(&mut r, 2 + k % 3, ch.dim_in());
        let (lhs, rhs) = private_split(&ch, &ens);
        worst = worst.max((lhs - rhs).abs());
    }
    for _ in 0..20 {
        let ch = random_channel(&mut r, 2, 2, 2);
        let t = telescope(&ch, 3, &random_input(&mut r, 8));
        worst = worst.max((t.steps.iter().sum::<f64>() - t.total).abs());
        for (a, b) in t.steps.iter().zip(&t.split_steps) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= IDENTITY_TOL, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("max deviation {worst:.1e} over 40 instances"))
}

fn state_module() -> Outcome {
    let opts = OptimOptions::default();
    let mut worst = 0.0f64;
    for lambda in [0.5, 0.8, 0.95] {
        let st = BipartiteState::schmidt_qubits(lambda).unwrap();
        let est = distill::StateEstimates::compute(&st, &opts).map_err(sdp_err)?;
        let h = linalg::binary_entropy(lambda);
        ensure((est.d1.value - h).abs() <= STATE_TOL, || format!("lambda = {lambda}: d1 = {}", est.d1.value))?;
        ensure((est.k1.value - h).abs() <= STATE_TOL, || format!("lambda = {lambda}: k1 = {}", est.k1.value))?;
        for rep in distill::state_bounds_from(&est, opts.tol).map_err(sdp_err)? {
            ensure(rep.width() <= STATE_TOL, || format!("lambda = {lambda}: {} width {}", rep.label, rep.width()))?;
            worst = worst.max(rep.width());
        }
    }
    let mut v = nalgebra::DVector::zeros(4);
    v[0] = linalg::c(1.0, 0.0);
    let product = BipartiteState::pure(2, 2, &v).unwrap();
    let d1 = distill::d1_arrow(&product, &opts);
    let k1 = distill::k1_arrow_from(&product, &d1, &opts);
    ensure(d1.value.abs() <= PRODUCT_TOL && k1.value.abs() <= PRODUCT_TOL, || format!("product: d1 {}, k1 {}", d1.value, k1.value))?;
    Ok(format!("d1 = k1 = h(lambda) on pure states, widest chain {worst:.1e}"))
}

fn search_target() -> Outcome {
    let mut cfg = SearchConfig::default();
    let mut attempts = Vec::new();
    for _ in 0..2 {
        let started = Instant::now();
        let out = bippt::search(&cfg).map_err(sdp_err)?;
        let hits = out.accepted().count();
        attempts.push(format!("seeds {}..{}: {hits}/{} accepted in {:.1} s", cfg.seed, cfg.seed + cfg.seeds as u64 - 1, cfg.seeds, started.elapsed().as_secs_f64()));
        if let Some(best) = out.accepted().next() {
            let s = &best.scores;
            return Ok(format!(
                "{}; seed {}: q_upper {:.3}/{:.3}, coh_info_lb {:.1e}",
                attempts.join("; "),
                best.seed,
                s.q_upper_n,
                s.q_upper_nc,
                s.coh_info_lb
            ));
        }
        cfg.seed += cfg.seeds as u64;
    }
    Err(attempts.join("; "))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_capbound");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("ch.json");
    let ch = Command::new(bin).args(["builtin", "depolarizing", "2", "0.1"]).output().map_err(|e| e.to_string())?;
    std::fs::write(&path, &ch.stdout).map_err(|e| e.to_string())?;
    let run = || {
        Command::new(bin)
            .args(["bounds", path.to_str().unwrap(), "--format", "json", "--seed", "2024"])
            .output()
            .map(|o| o.stdout)
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(!a.is_empty() && a == b, || "outputs differ".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "erasure family", unattainable: None, run: erasure_family },
    Criterion { id: 2, name: "degradable collapse", unattainable: None, run: degradable_collapse },
    Criterion { id: 3, name: "Q_E = 2 Q1", unattainable: None, run: qe_identity },
    Criterion {
        id: 4,
        name: "certified bi-PPT verdict on erasure(2, 0.5)",
        unattainable: Some(
            "erasure(2, 0.5) is not PPT: the partial transpose of its Choi operator has eigenvalue -(1-p) = -0.5, \
             so bippt = true and a zero certified P upper cannot hold; the true values are checked instead",
        ),
        run: bippt_erasure,
    },
    Criterion { id: 5, name: "transpose-bound soundness", unattainable: None, run: transpose_soundness },
    Criterion { id: 6, name: "continuity functions", unattainable: None, run: continuity },
    Criterion { id: 7, name: "ensemble and telescoping identities", unattainable: None, run: entropy_identities },
    Criterion { id: 8, name: "state module on pure states", unattainable: None, run: state_module },
    Criterion { id: 9, name: "bi-PPT search statistical target", unattainable: None, run: search_target },
    Criterion { id: 10, name: "deterministic bounds JSON", unattainable: None, run: determinism },
];

fn main() {
    let mut unexpected = 0;
    for c in CRITERIA {
        let started = Instant::now();
        let result = (c.run)();
        let secs = started.elapsed().as_secs_f64();
        match (result, c.unattainable) {
            (Ok(detail), None) => println!("criterion {:>2} PASS [{secs:6.1} s] {}: {detail}", c.id, c.name),
            (Ok(detail), Some(why)) => {
                println!("criterion {:>2} FAIL [{secs:6.1} s] {}: unattainable, {why}. Observed: {detail}", c.id, c.name)
            }
            (Err(detail), _) => {
                unexpected += 1;
                println!("criterion {:>2} FAIL [{secs:6.1} s] {}: {detail}", c.id, c.name);
            }
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
