use spdgeo::props::run_all;
use spdgeo::Result;

pub fn run(seed: u64, trials: usize) -> Result<u8> {
    let outcomes = run_all(seed, trials);
    let mut all_ok = true;
    for o in &outcomes {
        let verdict = if o.passed() { "PASS" } else { "FAIL" };
        let tag = if o.expected_fail {
            " (expected-fail)"
        } else {
            ""
        };
        println!(
            "{verdict}  {:<44} {:>5} trials  {:>5} failures{tag}",
            o.name, o.trials, o.failures
        );
        all_ok &= o.passed();
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    println!("{passed}/{} properties passed (seed {seed})", outcomes.len());
    Ok(if all_ok { 0 } else { 3 })
}
