//! Bob reads Alice's record: Born rule versus cross-perspective links.

use wfcheck::checks::cpl_probability_check;
use wfcheck::qcore::C64;

fn main() {
    let probs = [0.2, 0.3, 0.5];
    let c: Vec<C64> = probs.iter().map(|p: &f64| C64::new(p.sqrt(), 0.0)).collect();
    for ra in 0..c.len() {
        let r = cpl_probability_check(&c, ra).unwrap();
        let f = r.finding("P(r_b != r_a)").unwrap();
        println!(
            "r_a = {ra}: born {:.3}, cpl {:.3}, verdict {:?}",
            f.prediction("born").unwrap(),
            f.prediction("cpl").unwrap(),
            r.verdict
        );
    }
    println!("{}", cpl_probability_check(&c, 0).unwrap().narrative);
}
