//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Every criterion compares the solvers against an independent oracle on
//! seeded random instances, so reruns are reproducible.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use blockip::cone::{deep_threshold, is_deep, weyl_dual};
use blockip::graver::{graver_basis, graver_norm_bound};
use blockip::lattice::lattice_member;
use blockip::mip::{mip_solve, tu_round, MipOptions, Status};
use blockip::model::{CnfFormula, FourBlockProgram};
use blockip::nfold::{build_model, expand_program, faithful_check, solve_nfold, NFoldOptions, NFoldOutcome};
use blockip::oracles::{
    fourblock_feasible_bf, graver_bf, intcone_member_exact, sat_bf, solve_nfold_bf, solve_twostage_scalar,
    subset_sum_dp, BoxVerdict,
};
use blockip::polyhedral::{certified_member, construct_q, CertificateOptions};
use blockip::reductions::{
    gen_3sat, gen_random_cnf, gen_random_fourblock, gen_random_nfold, gen_random_twostage, gen_subset_sum,
    shrink_4block, RandomParams,
};
use blockip::twostage::{solve_twostage_direct, solve_twostage_residue, TwoStageOptions, TwoStageVerdict};
use blockip::{IntMat, IntVec, Index, VectorSet};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rand_rows(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> Vec<Vec<BigInt>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect())
        .collect()
}

fn graver_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut total = 0;
    for k in 0..200 {
        let (t, y) = (rng.gen_range(1..=2), rng.gen_range(1..=3));
        let d = IntMat::new(Index::range("t", t), Index::range("y", y), rand_rows(&mut rng, t, y, 2)).unwrap();
        let bound = graver_norm_bound(&d);
        let mut got = graver_basis(&d, &Default::default()).map_err(|e| format!("matrix {k}: {e}"))?.elements;
        got.sort_by(|a, b| a.entries().cmp(b.entries()));
        let want = graver_bf(&d, bound.to_u64().unwrap()).map_err(|e| format!("matrix {k}: {e}"))?;
        ensure(got.len() == want.len() && got.iter().zip(&want).all(|(a, b)| a.entries() == b.entries()), || {
            format!("matrix {k} {:?}: {} elements, oracle {}", d.rows(), got.len(), want.len())
        })?;
        for g in &got {
            let l1: BigInt = g.entries().iter().map(|x| x.magnitude().clone()).sum::<num_bigint::BigUint>().into();
            ensure(l1 <= bound, || format!("matrix {k}: element {:?} exceeds the norm bound", g.entries()))?;
        }
        total += got.len();
    }
    Ok(format!("200 matrices, {total} Graver elements"))
}

/// Lattice points `r + B·k` inside `[−5B, 5B]^t`.
fn window(r: &[BigInt], b: &BigInt) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = vec![Vec::new()];
    let five_b: BigInt = b * 5;
    for ri in r {
        let mut coords = Vec::new();
        let mut v: BigInt = ri - &five_b;
        while v <= five_b {
            if v >= -&five_b {
                coords.push(v.clone());
            }
            v += b;
        }
        out = out
            .into_iter()
            .flat_map(|p| {
                coords.iter().map(move |c| {
                    let mut q = p.clone();
                    q.push(c.clone());
                    q
                })
            })
            .collect();
    }
    out
}

fn certificates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = CertificateOptions::default();
    let (mut checked, mut skipped, mut points, mut attempts) = (0, 0, 0usize, 0);
    while checked < 50 {
        attempts += 1;
        ensure(attempts <= 1000, || format!("only {checked} generator sets with B ≤ 10^5 in 1000 draws"))?;
        let t = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=3);
        let d = VectorSet::new(Index::range("t", t), rand_rows(&mut rng, n, t, 2)).unwrap();
        let zero = IntVec::zeros(Index::range("t", t));
        let b = match construct_q(&d, &zero, &opts) {
            Ok(cert) => cert.modulus.clone(),
            Err(e) if e.is_resource_limit() => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(format!("{:?}: {e}", d.vectors())),
        };
        if b > BigInt::from(100_000) {
            skipped += 1;
            continue;
        }
        let bu = b.to_u64().unwrap();
        for _ in 0..5 {
            let r: Vec<BigInt> = (0..t).map(|_| BigInt::from(rng.gen_range(0..bu))).collect();
            let rv = IntVec::new(Index::range("t", t), r.clone()).unwrap();
            let cert = construct_q(&d, &rv, &opts).map_err(|e| format!("{:?} r={r:?}: {e}", d.vectors()))?;
            for v in window(&r, &b) {
                let v = IntVec::new(Index::range("t", t), v).unwrap();
                let got = certified_member(&cert, &v).map_err(|e| e.to_string())?;
                let want = intcone_member_exact(&d, &v).map_err(|e| e.to_string())?;
                ensure(got == want, || {
                    format!("{:?} B={b} r={r:?} v={:?}: certificate {got}, oracle {want}", d.vectors(), v.entries())
                })?;
                points += 1;
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} generator sets × 5 residues, {points} points; {skipped} sets skipped with B > 10^5"))
}

fn deep_in_the_cone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut sampled, mut members, mut lattice_only, mut cones) = (0, 0, 0, 0);
    while sampled < 100 {
        cones += 1;
        ensure(cones <= 2000, || format!("only {sampled} deep points found"))?;
        let t = if sampled < 50 { 1 } else { 2 };
        let n = rng.gen_range(1..=3);
        let d = VectorSet::new(Index::range("t", t), rand_rows(&mut rng, n, t, 2)).unwrap();
        let dual = weyl_dual(&d);
        let (_, m) = deep_threshold(&dual);
        let scale = (&m + BigInt::one()).to_i64().unwrap_or(i64::MAX / 8).min(1 << 40);
        for _ in 0..4 {
            let mut v = vec![BigInt::zero(); t];
            for g in d.vectors() {
                let lam = BigInt::from(rng.gen_range(scale..=2 * scale));
                for (x, gi) in v.iter_mut().zip(g) {
                    *x += &lam * gi;
                }
            }
            for x in v.iter_mut() {
                *x += rng.gen_range(-2..=2);
            }
            let v = IntVec::new(Index::range("t", t), v).unwrap();
            if !is_deep(&dual, &v, &m) {
                continue;
            }
            let in_lattice = lattice_member(&d, &v).map_err(|e| e.to_string())?.is_some();
            let in_cone = intcone_member_exact(&d, &v).map_err(|e| e.to_string())?;
            ensure(in_lattice == in_cone, || {
                format!("{:?} v={:?}: lattice {in_lattice}, integer cone {in_cone}", d.vectors(), v.entries())
            })?;
            sampled += 1;
            members += usize::from(in_cone);
            lattice_only += usize::from(!in_lattice);
            if sampled == 50 || sampled == 100 {
                break;
            }
        }
    }
    Ok(format!("100 deep points ({members} members, {lattice_only} outside the lattice) from {cones} cones"))
}

fn two_stage_residue() -> Outcome {
    let opts = TwoStageOptions {
        budget: u64::MAX,
        ..TwoStageOptions::default()
    };
    let (mut feasible, mut infeasible) = (0, 0);
    for seed in 0..100u64 {
        let params = RandomParams {
            globals: 1,
            rows: 1,
            locals: 1 + (seed % 3) as usize,
            bricks: 1 + (seed % 4) as usize,
            delta: 3,
            coupling: 1_000_000_000,
            value: 5,
            ..RandomParams::default()
        };
        let (p, _) = gen_random_twostage(&params, seed, seed % 2 == 1);
        let verdict = solve_twostage_residue(&p, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        let oracle = solve_twostage_scalar(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        match verdict {
            TwoStageVerdict::Feasible(w) => {
                ensure(w.verify(&p), || format!("seed {seed}: witness does not re-substitute"))?;
                ensure(oracle.is_some(), || format!("seed {seed}: FEASIBLE but the oracle finds no x"))?;
                feasible += 1;
            }
            TwoStageVerdict::Infeasible => {
                ensure(oracle.is_none(), || format!("seed {seed}: INFEASIBLE but x = {} works", oracle.unwrap()))?;
                infeasible += 1;
            }
            TwoStageVerdict::ResourceLimit(m) => return Err(format!("seed {seed}: resource limit: {m}")),
        }
    }
    Ok(format!("100 instances, {feasible} feasible with verified witnesses, {infeasible} infeasible"))
}

fn three_sat() -> Outcome {
    let opts = TwoStageOptions::default();
    let mut sat = 0;
    for seed in 0..100u64 {
        let n = 3 + (seed % 3) as usize;
        let m = 1 + (seed % 8) as usize;
        // Every fifth formula uses all eight sign patterns on one triple, so it is unsatisfiable.
        let f = if seed % 5 == 4 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut vars: Vec<i64> = (1..=n as i64).collect();
            vars.shuffle(&mut rng);
            let mut clauses: Vec<[i64; 3]> = (0..8)
                .map(|s| [0, 1, 2].map(|k| if s >> k & 1 == 1 { -vars[k] } else { vars[k] }))
                .collect();
            clauses.shuffle(&mut rng);
            CnfFormula::new(n, clauses).unwrap()
        } else {
            gen_random_cnf(n, m, seed)
        };
        let p = gen_3sat(&f);
        let verdict = solve_twostage_direct(&p, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        let want = sat_bf(&f).is_some();
        if let TwoStageVerdict::Feasible(w) = &verdict {
            ensure(w.verify(&p), || format!("seed {seed}: witness does not re-substitute"))?;
        }
        ensure(!matches!(verdict, TwoStageVerdict::ResourceLimit(_)), || format!("seed {seed}: resource limit"))?;
        ensure(verdict.is_feasible() == want, || format!("seed {seed}: engine {}, SAT {want}", verdict.is_feasible()))?;
        sat += usize::from(want);
    }
    Ok(format!("100 formulas, {sat} satisfiable, {} unsatisfiable", 100 - sat))
}

fn nfold_params(seed: u64) -> RandomParams {
    RandomParams {
        locals: 1 + (seed % 3) as usize,
        rows: 1 + (seed % 2) as usize,
        link_rows: 1 + (seed / 3 % 2) as usize,
        bricks: 1 + (seed % 5) as usize,
        delta: 2,
        coupling: 1_000_000,
        value: 4,
        cost: 5,
        nonnegative_d: true,
        ..RandomParams::default()
    }
}

fn max_rhs(p: &blockip::model::NFoldProgram) -> u64 {
    p.bricks
        .iter()
        .flat_map(|b| b.b.entries().iter())
        .map(|x| x.to_u64().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

fn nfold_optimization() -> Outcome {
    let opts = NFoldOptions::default();
    let (mut optimal, mut infeasible, mut decompositions) = (0, 0, 0);
    for seed in 0..100u64 {
        let (p, _) = gen_random_nfold(&nfold_params(seed), seed, seed % 4 == 3);
        let got = solve_nfold(&p, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        // Nonnegative D without zero columns bounds every brick solution by ‖b‖∞.
        let want = match solve_nfold_bf(&p, max_rhs(&p)).map_err(|e| format!("seed {seed}: {e}"))? {
            BoxVerdict::Feasible((v, _)) => Some(v),
            BoxVerdict::Infeasible => None,
        };
        ensure(got.value() == want.as_ref(), || format!("seed {seed}: solver {got:?}, enumeration {want:?}"))?;
        match got {
            NFoldOutcome::Optimum { .. } => optimal += 1,
            _ => infeasible += 1,
        }
        let expansion = expand_program(&p, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        for (br, dec) in p.bricks.iter().zip(&expansion.decompositions) {
            let Some(dec) = dec else { continue };
            let ok = faithful_check(&br.d, &dec.target, &dec.parts, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(ok, || format!("seed {seed}: decomposition {:?} is not faithful", dec.parts))?;
            decompositions += 1;
        }
    }
    Ok(format!("100 instances ({optimal} optimal, {infeasible} infeasible), {decompositions} faithful decompositions"))
}

fn subset_sum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = NFoldOptions::default();
    let mut yes = 0;
    for k in 0..50 {
        let n = rng.gen_range(1..=12);
        let items: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=30)).collect();
        let total: u64 = items.iter().sum();
        let t = if k % 2 == 0 {
            items.iter().filter(|_| rng.gen_bool(0.5)).sum()
        } else {
            rng.gen_range(0..=total)
        };
        let p = gen_subset_sum(&items, t, None).map_err(|e| e.to_string())?;
        let got = solve_nfold(&p, &opts).map_err(|e| format!("{items:?} t={t}: {e}"))?;
        let want = subset_sum_dp(&items, t);
        ensure(matches!(got, NFoldOutcome::Optimum { .. }) == want, || format!("{items:?} t={t}: solver {got:?}, DP {want}"))?;
        yes += usize::from(want);
    }
    Ok(format!("50 instances, {yes} reachable targets"))
}

/// Bounds for the exhaustive search of a shrunk program, derived from the
/// bounds `x_box`, `y_box` of the original variables and the group count.
fn shrunk_bounds(q: &FourBlockProgram, x_box: u64, y_box: u64, groups: u64) -> (Vec<u64>, Vec<u64>) {
    let bound = |name: &str, original: u64| {
        if name.starts_with("z'(") {
            groups * x_box
        } else if name.starts_with("z(") {
            groups * y_box
        } else if name.starts_with("p") && !name.starts_with("pad") || name.starts_with('q') {
            x_box
        } else if name.starts_with("pad") {
            0
        } else {
            original
        }
    };
    (
        q.globals.names().iter().map(|n| bound(n, x_box)).collect(),
        q.locals.names().iter().map(|n| bound(n, y_box)).collect(),
    )
}

fn four_block_transform() -> Outcome {
    let (x_box, y_box) = (3u64, 3u64);
    let mut feasible = 0;
    for seed in 0..20u64 {
        let n = 2 + (seed % 2) as usize;
        let params = RandomParams {
            globals: 1 + (seed % 2) as usize,
            locals: 1 + (seed / 2 % 2) as usize,
            rows: 1 + (seed / 4 % 2) as usize,
            link_rows: 1,
            bricks: n,
            delta: n as i64,
            coupling: n as i64,
            value: 2,
            ..RandomParams::default()
        };
        let (p, _, _) = gen_random_fourblock(&params, seed, seed % 2 == 1);
        let q = shrink_4block(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        for m in [&q.a, &q.bmat, &q.c] {
            ensure(m.max_abs() <= BigInt::one(), || format!("seed {seed}: an entry outside {{-1, 0, 1}} remains"))?;
        }
        let before = fourblock_feasible_bf(&p, &vec![x_box; p.globals.len()], &vec![y_box; p.locals.len()])
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let (gb, lb) = shrunk_bounds(&q, x_box, y_box, n as u64);
        let after = fourblock_feasible_bf(&q, &gb, &lb).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(before == after, || format!("seed {seed}: original {before}, transformed {after}"))?;
        feasible += usize::from(before);
    }
    Ok(format!("20 instances, {feasible} feasible, all coupling entries in {{-1, 0, 1}}"))
}

fn tu_rounding() -> Outcome {
    let opts = NFoldOptions::default();
    let mip = MipOptions::default();
    let (mut models, mut omegas, mut seed) = (0, 0, 1000u64);
    while models < 100 {
        seed += 1;
        ensure(seed < 2000, || format!("only {models} models reached an optimum"))?;
        let mut params = nfold_params(seed);
        params.nonnegative_d = seed % 3 != 0;
        let (p, _) = gen_random_nfold(&params, seed, false);
        let Ok(expansion) = expand_program(&p, &opts) else { continue };
        let model = build_model(&expansion.program, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        let out = mip_solve(&model.program, &mip).map_err(|e| format!("seed {seed}: {e}"))?;
        if out.status != Status::Optimal {
            continue;
        }
        let fixed: Vec<(usize, BigInt)> = model.integer_vars().into_iter().map(|j| (j, out.int_value(j))).collect();
        // tu_round rejects any fractional coordinate of the vertex.
        let x = tu_round(&model.program, &fixed).map_err(|e| format!("seed {seed}: {e}"))?;
        omegas += model.omega_vars().len();
        ensure(x.len() == model.program.vars.len(), || format!("seed {seed}: wrong vertex length"))?;
        models += 1;
    }
    Ok(format!("100 models, {omegas} ω variables, 0 fractional"))
}

fn run_cli(args: &[&str]) -> Result<(Vec<u8>, i32), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_blockip"))
        .args(args)
        .env_remove("BLOCKIP_BUDGET")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.stdout, out.status.code().unwrap_or(-1)))
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("blockip-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn determinism() -> Outcome {
    let dir = scratch_dir();
    let f = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let path = |name: &str| -> PathBuf { dir.join(name) };
    let mut invocations: Vec<Vec<String>> = Vec::new();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    // Generate the inputs first; their outputs are compared like everything else.
    invocations.push(s(&["gen", "sat3", "--vars", "4", "--clauses", "6", "--seed", "5", "-o", &f("sat.txt")]));
    invocations.push(s(&["gen", "subset-sum", "--count", "8", "--max", "25", "--seed", "3", "-o", &f("ss.txt")]));
    invocations.push(s(&["gen", "random", "two-stage", "--seed", "4", "--coupling", "1000000", "-o", &f("ts.txt")]));
    invocations.push(s(&["gen", "random", "nfold", "--seed", "9", "--delta", "2", "-o", &f("nf.txt")]));
    invocations.push(s(&["gen", "random", "fourblock", "--seed", "2", "--bricks", "3", "-o", &f("fb.txt")]));
    invocations.push(s(&["gen", "random", "nfold", "--seed", "11"]));
    invocations.push(s(&["solve", "two-stage", &f("sat.txt"), "--engine", "direct", "--solution"]));
    invocations.push(s(&["solve", "two-stage", &f("ts.txt"), "--solution"]));
    invocations.push(s(&["solve", "nfold", &f("ss.txt"), "--solution"]));
    invocations.push(s(&["solve", "nfold", &f("nf.txt"), "--solution"]));
    invocations.push(s(&["analyze", &f("ts.txt"), "--graver", "--certificate"]));
    invocations.push(s(&["check", &f("ss.txt"), "--oracle-box", "30"]));
    invocations.push(s(&["transform", "shrink-4block", &f("fb.txt"), &f("fb-shrunk.txt")]));
    let outputs = ["sat.txt", "ss.txt", "ts.txt", "nf.txt", "fb.txt", "fb-shrunk.txt"];
    let mut reference: Option<Vec<(Vec<u8>, i32)>> = None;
    let mut runs = 0;
    for threads in ["1", "4", "1", "4"] {
        let mut results = Vec::new();
        for inv in &invocations {
            let mut args: Vec<&str> = vec!["--threads", threads];
            args.extend(inv.iter().map(String::as_str));
            results.push(run_cli(&args)?);
            runs += 1;
        }
        for name in outputs {
            results.push((std::fs::read(path(name)).map_err(|e| format!("{name}: {e}"))?, 0));
        }
        match &reference {
            None => reference = Some(results),
            Some(r) => {
                for (k, (a, b)) in r.iter().zip(&results).enumerate() {
                    let what = invocations.get(k).map_or_else(|| outputs[k - invocations.len()].to_string(), |i| i.join(" "));
                    ensure(a == b, || format!("`{what}` differs with --threads {threads}"))?;
                }
            }
        }
    }
    let codes = reference.unwrap().iter().take(invocations.len()).filter(|(_, c)| *c != 0).count();
    let _ = std::fs::remove_dir_all(&dir);
    ensure(codes == 0, || format!("{codes} invocations exited nonzero"))?;
    Ok(format!("{} invocations × {{1, 4}} threads × 2 runs ({runs} runs), outputs byte-identical", invocations.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("graver basis equals enumeration", graver_correctness),
        ("certified membership equals the integer cone", certificates),
        ("deep points: lattice membership equals cone membership", deep_in_the_cone),
        ("two-stage residue engine", two_stage_residue),
        ("3-SAT encoding via the direct engine", three_sat),
        ("n-fold optimum equals enumeration", nfold_optimization),
        ("subset sum via n-fold equals DP", subset_sum),
        ("4-block coefficient shrinking", four_block_transform),
        ("ω integral after TU rounding", tu_rounding),
        ("CLI output is deterministic", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = format!("{}", k + 1);
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
