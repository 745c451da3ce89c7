mod common;

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};

use common::*;
use detox_core::campaign::CampaignResult;
use detox_core::render::render_svg;
use detox_core::search::{exhaustive, ga, greedy, GaParams};
use detox_core::{
    golden_run, ground_truth, oracle, predict, predict_all, run_discovery, CampaignOptions, Configuration,
};
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn detox(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_detox")).args(args).output().expect("detox binary runs")
}

fn discover(name: &str) -> CampaignResult {
    run_discovery(&program(name), &CampaignOptions::default()).unwrap()
}

fn exactness() -> Check {
    let mut summary = Vec::new();
    for name in ["p0", "p1", "sort10", "mixed8"] {
        let out = detox(&["verify", workload_path(name).to_str().unwrap(), "--jobs", "8"]);
        let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("{name}: {e}"))?;
        let (exact, total) = (v["exact"].as_u64().unwrap_or(0), v["total"].as_u64().unwrap_or(0));
        ensure(
            out.status.success() && exact == total && total == 1 << v["assertions"].as_u64().unwrap(),
            format!("{name}: {exact}/{total} exact"),
        )?;
        summary.push(format!("{name} {exact}/{total}"));
    }
    Ok(summary.join(", "))
}

fn p1_table() -> Check {
    let p = program("p1");
    let campaign = discover("p1");
    for (bits, sdc, runtime) in [("11", 56, 8), ("01", 48, 7), ("10", 40, 6), ("00", 48, 5)] {
        let c: Configuration = bits.parse().unwrap();
        let predicted = predict(&campaign, &c).map_err(|e| e.to_string())?;
        let truth = brute_force_truth(&p, &c);
        ensure(
            truth.sdc == sdc && truth.runtime == runtime,
            format!("{bits}: oracle sdc {} runtime {}", truth.sdc, truth.runtime),
        )?;
        ensure(predicted == truth, format!("{bits}: predicted {predicted:?} oracle {truth:?}"))?;
    }
    let best = exhaustive(&campaign).map_err(|e| e.to_string())?.best.to_string();
    ensure(best == "10", format!("exhaustive picked {best}"))?;
    Ok("sdc 56/48/40/48, runtime 8/7/6/5, best 10".into())
}

fn pruning() -> Check {
    let mut checked = Vec::new();
    for name in CORPUS {
        let p = program(name);
        if area(&p) > 2000 {
            continue;
        }
        let campaign = run_discovery(&p, &CampaignOptions::default()).unwrap();
        let mut next = vec![0; campaign.total_bits as usize];
        for r in &campaign.records {
            ensure(next[r.bit as usize] == r.lo && r.lo < r.hi, format!("{name}: bit {} not partitioned", r.bit))?;
            next[r.bit as usize] = r.hi;
        }
        ensure(next.iter().all(|&t| t == campaign.total_steps), format!("{name}: bit rows end early"))?;

        let mut pruned = BTreeMap::new();
        for r in &campaign.records {
            let key = (r.detectors.iter().map(|d| d.assertion).collect::<Vec<_>>(), r.outcome.as_str());
            *pruned.entry(key).or_insert(0u64) += r.weight();
        }
        let mut full = BTreeMap::new();
        for (_, _, r) in inject_everywhere(&p) {
            let key = (r.detectors.iter().map(|d| d.assertion).collect::<Vec<_>>(), r.outcome.unwrap().as_str());
            *full.entry(key).or_insert(0u64) += 1;
        }
        ensure(pruned == full, format!("{name}: pruned {pruned:?} exhaustive {full:?}"))?;
        checked.push(name);
    }
    ensure(checked.len() >= 2, "too few small programs")?;
    Ok(checked.join(", "))
}

fn conservation() -> Check {
    let mut configs = 0;
    for name in CORPUS {
        let p = program(name);
        let campaign = run_discovery(&p, &CampaignOptions::default()).unwrap();
        for (c, k) in predict_all(&campaign).unwrap() {
            ensure(k.classified() == k.runtime * campaign.total_bits, format!("{name} {c}: {k:?}"))?;
            let variant_t = golden_run(&oracle::strip(&p, &c).unwrap().program).unwrap().total_steps;
            let truth = ground_truth(&p, &c, &CampaignOptions::default()).unwrap();
            ensure(
                k.runtime == variant_t && truth.runtime == variant_t,
                format!("{name} {c}: runtime {} vs {variant_t}", k.runtime),
            )?;
            configs += 1;
        }
    }
    Ok(format!("{configs} configurations"))
}

fn search() -> Check {
    let campaign = discover("mixed8");
    let ex = exhaustive(&campaign).map_err(|e| e.to_string())?;
    let all = predict_all(&campaign).unwrap();
    ensure(all.len() == 256, "expected 256 configurations")?;
    let min = all.values().map(|k| k.sdc).min().unwrap();
    ensure(
        ex.best_counts.sdc == min && all[&ex.best] == ex.best_counts,
        format!("exhaustive {} but minimum {min}", ex.best_counts.sdc),
    )?;
    let ones = all[&Configuration::all_enabled(8)].sdc;
    let gr = greedy(&campaign);
    ensure(gr.best_counts.sdc <= ones, format!("greedy {} > all-enabled {ones}", gr.best_counts.sdc))?;
    let params = GaParams { population: 32, generations: 100, seed: 1, ..GaParams::default() };
    let g = ga(&campaign, &params).map_err(|e| e.to_string())?;
    ensure(g.best_counts.sdc <= ones, "ga worse than all-enabled")?;
    ensure(g.best_counts.sdc == min, format!("ga reached {} ({}) instead of {min}", g.best_counts.sdc, g.best))?;
    Ok(format!(
        "optimum {} sdc {min}, greedy {} sdc {}, ga {} sdc {}, all-enabled sdc {ones}",
        ex.best, gr.best, gr.best_counts.sdc, g.best, g.best_counts.sdc
    ))
}

fn attr(line: &str, name: &str) -> Option<String> {
    let start = line.find(&format!(" {name}=\""))? + name.len() + 3;
    Some(line[start..].split('"').next()?.to_string())
}

fn render() -> Check {
    let c: Configuration = "11".parse().unwrap();
    let svg = render_svg(&discover("p1"), &c).map_err(|e| e.to_string())?;
    ensure(svg == render_svg(&discover("p1"), &c).unwrap(), "output differs between runs")?;
    let plot = svg.split("<g id=\"plot\"").nth(1).and_then(|s| s.split("</g>").next()).ok_or("no plot group")?;
    let mut areas: BTreeMap<String, u64> = BTreeMap::new();
    for line in plot.lines().filter(|l| l.starts_with("<rect")) {
        let num = |k: &str| attr(line, k).and_then(|v| v.parse::<u64>().ok()).unwrap_or(0);
        *areas.entry(attr(line, "class").unwrap_or_default()).or_default() += num("width") * num("height");
    }
    let get = |k: &str| areas.get(k).copied().unwrap_or(0);
    let k = predict(&discover("p1"), &c).unwrap();
    ensure(get("sdc") == 56 && get("sdc") == k.sdc, format!("sdc area {}", get("sdc")))?;
    ensure(
        get("detected-many") == 24 && get("detected-one") == 16,
        format!("detected areas {} / {}", get("detected-many"), get("detected-one")),
    )?;
    ensure(get("detected-many") + get("detected-one") == k.detected, "detected area differs from prediction")?;
    ensure(get("benign") == 32 && get("benign") == k.benign, format!("benign area {}", get("benign")))?;
    Ok("gray 56, light green 24, dark green 16, white 32, byte-identical".into())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for name in CORPUS {
        let w = workload_path(name);
        let mut files = Vec::new();
        for jobs in ["1", "8"] {
            let path = dir.path().join(format!("{name}-{jobs}.jsonl"));
            let out = detox(&["campaign", w.to_str().unwrap(), "-o", path.to_str().unwrap(), "--jobs", jobs]);
            ensure(out.status.success(), format!("{name}: campaign failed"))?;
            files.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(files[0] == files[1], format!("{name}: files differ"))?;
    }
    Ok(format!("{} programs", CORPUS.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 predictor exactness", exactness),
        ("2 P1 prediction table", p1_table),
        ("3 pruning equivalence", pruning),
        ("4 area conservation", conservation),
        ("5 search", search),
        ("6 render", render),
        ("7 determinism under parallelism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
