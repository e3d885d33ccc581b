//! Partition dependence of the EPR correlation.

use wfcheck::checks::epr_correlation_check;

fn main() {
    for p in [0.1, 0.3, 0.45] {
        let c = [f64::sqrt(p), f64::sqrt(1.0 - p)];
        let r = epr_correlation_check(&c).unwrap();
        let f = r.finding("P(r_a = r_b)").unwrap();
        let show: Vec<String> = f.predictions.iter().map(|x| format!("{} {:.4}", x.rule, x.value)).collect();
        println!("c^2 = ({p}, {}): {}  -> {:?}", 1.0 - p, show.join(", "), r.verdict);
    }
}
